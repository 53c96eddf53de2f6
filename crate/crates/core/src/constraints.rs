//! Hard placement constraints, as batch checks and as an incremental
//! propagator.
//!
//! Pins are addressed by their index in [`Circuit::pins`] order. A pin's
//! *group* is its net, or a group of its own when it belongs to no net;
//! every group must sit on one strip in a single run that no other group
//! interleaves with, so that the strip can be cut between groups.

use std::fmt;

use serde::Serialize;

use crate::circuit::{Circuit, ComponentKind};
use crate::layout::{GridConfig, Layout, PinPlacement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NetSplit,
    HoleConflict,
    SpanTooShort,
    SameStripComponent,
    OutOfBounds,
    SharedStripOverlap,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::NetSplit => "net_split",
            ViolationKind::HoleConflict => "hole_conflict",
            ViolationKind::SpanTooShort => "span_too_short",
            ViolationKind::SameStripComponent => "same_strip_component",
            ViolationKind::OutOfBounds => "out_of_bounds",
            ViolationKind::SharedStripOverlap => "shared_strip_overlap",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which hard constraint a layout breaks, and the placements that show it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintViolation {
    pub kind: ViolationKind,
    pub witnesses: Vec<PinPlacement>,
    pub message: String,
}

#[derive(Serialize)]
struct ViolationRecord<'a> {
    kind: ViolationKind,
    message: &'a str,
    pins: Vec<u32>,
    positions: Vec<i32>,
    refs: Vec<&'a str>,
    strips: Vec<i32>,
}

impl ConstraintViolation {
    fn to_record(&self) -> ViolationRecord<'_> {
        ViolationRecord {
            kind: self.kind,
            message: &self.message,
            pins: self.witnesses.iter().map(|w| w.pin).collect(),
            positions: self.witnesses.iter().map(|w| w.position).collect(),
            refs: self
                .witnesses
                .iter()
                .map(|w| w.reference.as_str())
                .collect(),
            strips: self.witnesses.iter().map(|w| w.strip).collect(),
        }
    }
}

/// `[{kind, message, pins, positions, refs, strips}, ...]`
pub fn violations_to_json(violations: &[ConstraintViolation]) -> String {
    let records: Vec<_> = violations.iter().map(|v| v.to_record()).collect();
    serde_json::to_string_pretty(&records).expect("violation serialization cannot fail")
}

/// Minimum signed pin-2-minus-pin-1 position offset per component kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanRules {
    spans: Vec<(ComponentKind, i32)>,
    /// Accept `|p2 - p1| >= span` instead of `p2 - p1 >= span`.
    pub unsigned: bool,
}

impl Default for SpanRules {
    fn default() -> Self {
        SpanRules {
            spans: vec![(ComponentKind::Resistor, 3)],
            unsigned: false,
        }
    }
}

impl SpanRules {
    pub fn none() -> Self {
        SpanRules {
            spans: Vec::new(),
            unsigned: false,
        }
    }

    pub fn with_unsigned(mut self, unsigned: bool) -> Self {
        self.unsigned = unsigned;
        self
    }

    pub fn with_span(mut self, kind: ComponentKind, span: i32) -> Self {
        self.spans.retain(|(k, _)| *k != kind);
        if span > 0 {
            self.spans.push((kind, span));
        }
        self
    }

    pub fn span_for(&self, kind: ComponentKind) -> Option<i32> {
        self.spans.iter().find(|(k, _)| *k == kind).map(|&(_, s)| s)
    }

    pub fn satisfied(&self, span: i32, p1: i32, p2: i32) -> bool {
        let d = p2 - p1;
        if self.unsigned {
            d.abs() >= span
        } else {
            d >= span
        }
    }
}

/// A component's pin-1/pin-2 pair, as pin indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PinPair {
    pub component: usize,
    pub first: usize,
    pub second: usize,
    /// Minimum position offset, when the component's kind has one.
    pub span: Option<i32>,
}

/// Index tables shared by the checks, the propagator and the solver.
#[derive(Debug, Clone)]
pub struct CheckModel {
    pub pin_component: Vec<usize>,
    pub pin_number: Vec<u32>,
    pub references: Vec<String>,
    /// Group id of every pin. Ids `0..nets` are nets in circuit order; each
    /// pin outside every net gets its own id after those.
    pub pin_group: Vec<usize>,
    pub groups: Vec<Vec<usize>>,
    pub net_count: usize,
    pub pairs: Vec<PinPair>,
    /// Pair index by component, for components with at least two pins.
    pub pair_of_component: Vec<Option<usize>>,
    pub rules: SpanRules,
}

impl CheckModel {
    pub fn new(circuit: &Circuit, rules: &SpanRules) -> CheckModel {
        let mut offsets = Vec::with_capacity(circuit.components().len());
        let mut pin_component = Vec::new();
        let mut pin_number = Vec::new();
        for (ci, c) in circuit.components().iter().enumerate() {
            offsets.push(pin_component.len());
            for pin in 1..=c.pin_count {
                pin_component.push(ci);
                pin_number.push(pin);
            }
        }
        let n = pin_component.len();
        let mut pin_group = vec![usize::MAX; n];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for net in circuit.nets() {
            let g = groups.len();
            let mut members = Vec::with_capacity(net.members.len());
            for m in &net.members {
                let ci = circuit
                    .component_index(&m.reference)
                    .expect("validated circuit");
                let idx = offsets[ci] + m.pin as usize - 1;
                pin_group[idx] = g;
                members.push(idx);
            }
            groups.push(members);
        }
        let net_count = groups.len();
        for (idx, g) in pin_group.iter_mut().enumerate() {
            if *g == usize::MAX {
                *g = groups.len();
                groups.push(vec![idx]);
            }
        }
        let mut pairs = Vec::new();
        let mut pair_of_component = vec![None; circuit.components().len()];
        for (ci, c) in circuit.components().iter().enumerate() {
            if c.pin_count >= 2 {
                pair_of_component[ci] = Some(pairs.len());
                pairs.push(PinPair {
                    component: ci,
                    first: offsets[ci],
                    second: offsets[ci] + 1,
                    span: rules.span_for(c.kind),
                });
            }
        }
        CheckModel {
            pin_component,
            pin_number,
            references: circuit
                .components()
                .iter()
                .map(|c| c.reference.clone())
                .collect(),
            pin_group,
            groups,
            net_count,
            pairs,
            pair_of_component,
            rules: rules.clone(),
        }
    }

    pub fn pin_count(&self) -> usize {
        self.pin_component.len()
    }

    pub fn placement(&self, pin: usize, (strip, position): (i32, i32)) -> PinPlacement {
        PinPlacement::new(
            self.references[self.pin_component[pin]].clone(),
            self.pin_number[pin],
            strip,
            position,
        )
    }

    fn describe(&self, pin: usize) -> String {
        format!(
            "{}.{}",
            self.references[self.pin_component[pin]], self.pin_number[pin]
        )
    }

    fn group_name(&self, group: usize) -> String {
        if group < self.net_count {
            format!("net #{}", group + 1)
        } else {
            format!("unconnected pin {}", self.describe(self.groups[group][0]))
        }
    }

    // --- individual checks over resolved coordinates ------------------------

    pub fn check_net_same_strip(&self, coords: &[(i32, i32)], out: &mut impl Sink) -> bool {
        for (g, members) in self.groups[..self.net_count].iter().enumerate() {
            let first = members[0];
            if let Some(&other) = members.iter().find(|&&m| coords[m].0 != coords[first].0) {
                let keep_going = out.hit(|| ConstraintViolation {
                    kind: ViolationKind::NetSplit,
                    witnesses: vec![
                        self.placement(first, coords[first]),
                        self.placement(other, coords[other]),
                    ],
                    message: format!(
                        "{} spans strips {} ({}) and {} ({})",
                        self.group_name(g),
                        coords[first].0,
                        self.describe(first),
                        coords[other].0,
                        self.describe(other)
                    ),
                });
                if !keep_going {
                    return false;
                }
            }
        }
        true
    }

    pub fn check_hole_exclusivity(&self, coords: &[(i32, i32)], out: &mut impl Sink) -> bool {
        let mut by_hole: Vec<((i32, i32), usize)> = coords
            .iter()
            .enumerate()
            .map(|(pin, &c)| (c, pin))
            .collect();
        by_hole.sort_unstable();
        for chunk in by_hole.chunk_by(|a, b| a.0 == b.0).filter(|c| c.len() > 1) {
            let hole = chunk[0].0;
            let names: Vec<_> = chunk.iter().map(|&(_, p)| self.describe(p)).collect();
            let keep_going = out.hit(|| ConstraintViolation {
                kind: ViolationKind::HoleConflict,
                witnesses: chunk
                    .iter()
                    .map(|&(_, p)| self.placement(p, hole))
                    .collect(),
                message: format!("hole ({}, {}) holds {}", hole.0, hole.1, names.join(", ")),
            });
            if !keep_going {
                return false;
            }
        }
        true
    }

    pub fn check_min_span(&self, coords: &[(i32, i32)], out: &mut impl Sink) -> bool {
        for pair in &self.pairs {
            let Some(span) = pair.span else { continue };
            let (p1, p2) = (coords[pair.first].1, coords[pair.second].1);
            if !self.rules.satisfied(span, p1, p2) {
                let keep_going = out.hit(|| ConstraintViolation {
                    kind: ViolationKind::SpanTooShort,
                    witnesses: vec![
                        self.placement(pair.first, coords[pair.first]),
                        self.placement(pair.second, coords[pair.second]),
                    ],
                    message: format!(
                        "{} pin 2 is at offset {} from pin 1, minimum is {}",
                        self.references[pair.component],
                        p2 - p1,
                        span
                    ),
                });
                if !keep_going {
                    return false;
                }
            }
        }
        true
    }

    pub fn check_two_pin_distinct_strips(
        &self,
        coords: &[(i32, i32)],
        out: &mut impl Sink,
    ) -> bool {
        for pair in &self.pairs {
            if coords[pair.first].0 == coords[pair.second].0 {
                let keep_going = out.hit(|| ConstraintViolation {
                    kind: ViolationKind::SameStripComponent,
                    witnesses: vec![
                        self.placement(pair.first, coords[pair.first]),
                        self.placement(pair.second, coords[pair.second]),
                    ],
                    message: format!(
                        "{} has pins 1 and 2 on strip {}",
                        self.references[pair.component], coords[pair.first].0
                    ),
                });
                if !keep_going {
                    return false;
                }
            }
        }
        true
    }

    pub fn check_bounds(
        &self,
        coords: &[(i32, i32)],
        grid: GridConfig,
        out: &mut impl Sink,
    ) -> bool {
        for (pin, &(s, p)) in coords.iter().enumerate() {
            if !grid.contains(s, p) {
                let keep_going = out.hit(|| ConstraintViolation {
                    kind: ViolationKind::OutOfBounds,
                    witnesses: vec![self.placement(pin, (s, p))],
                    message: format!(
                        "{} at ({s}, {p}) is outside the {}x{} grid",
                        self.describe(pin),
                        grid.max_strips,
                        grid.max_positions
                    ),
                });
                if !keep_going {
                    return false;
                }
            }
        }
        true
    }

    /// Per-strip run of each group: `(strip, group) -> (min pos, max pos, pin at min)`.
    pub(crate) fn runs(&self, coords: &[(i32, i32)]) -> Vec<(i32, i32, i32, usize, usize)> {
        let mut pins: Vec<(i32, usize, i32, usize)> = coords
            .iter()
            .enumerate()
            .map(|(pin, &(s, p))| (s, self.pin_group[pin], p, pin))
            .collect();
        pins.sort_unstable();
        let mut out: Vec<_> = pins
            .chunk_by(|a, b| (a.0, a.1) == (b.0, b.1))
            .map(|c| (c[0].0, c[0].2, c[c.len() - 1].2, c[0].1, c[0].3))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn check_shared_strip_segments(&self, coords: &[(i32, i32)], out: &mut impl Sink) -> bool {
        let runs = self.runs(coords);
        for (i, a) in runs.iter().enumerate() {
            for b in runs[i + 1..].iter().take_while(|b| b.0 == a.0) {
                // Runs are sorted by start; b starts at or after a.
                if b.1 <= a.2 + 1 {
                    let keep_going = out.hit(|| ConstraintViolation {
                        kind: ViolationKind::SharedStripOverlap,
                        witnesses: vec![
                            self.placement(a.4, coords[a.4]),
                            self.placement(b.4, coords[b.4]),
                        ],
                        message: format!(
                            "on strip {}, {} occupies {}..{} and {} occupies {}..{} with no free hole between",
                            a.0,
                            self.group_name(a.3),
                            a.1,
                            a.2,
                            self.group_name(b.3),
                            b.1,
                            b.2
                        ),
                    });
                    if !keep_going {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// All checks, in a fixed order. Empty exactly when the layout is feasible.
    pub fn check_all(&self, coords: &[(i32, i32)], grid: GridConfig) -> Vec<ConstraintViolation> {
        let mut out = Vec::new();
        self.check_bounds(coords, grid, &mut out);
        self.check_net_same_strip(coords, &mut out);
        self.check_hole_exclusivity(coords, &mut out);
        self.check_min_span(coords, &mut out);
        self.check_two_pin_distinct_strips(coords, &mut out);
        self.check_shared_strip_segments(coords, &mut out);
        out
    }

    /// Same verdict as [`CheckModel::check_all`] being empty, without
    /// building any report.
    pub fn is_feasible(&self, coords: &[(i32, i32)], grid: GridConfig) -> bool {
        let mut any = FirstHit(false);
        self.check_bounds(coords, grid, &mut any)
            && self.check_net_same_strip(coords, &mut any)
            && self.check_hole_exclusivity(coords, &mut any)
            && self.check_min_span(coords, &mut any)
            && self.check_two_pin_distinct_strips(coords, &mut any)
            && self.check_shared_strip_segments(coords, &mut any)
    }
}

/// Receives violations as the checks find them.
pub trait Sink {
    /// Records a violation; false stops the check early.
    fn hit(&mut self, make: impl FnOnce() -> ConstraintViolation) -> bool;
}

impl Sink for Vec<ConstraintViolation> {
    fn hit(&mut self, make: impl FnOnce() -> ConstraintViolation) -> bool {
        self.push(make());
        true
    }
}

struct FirstHit(bool);

impl Sink for FirstHit {
    fn hit(&mut self, _make: impl FnOnce() -> ConstraintViolation) -> bool {
        self.0 = true;
        false
    }
}

fn resolve(circuit: &Circuit, layout: &Layout, rules: &SpanRules) -> (CheckModel, Vec<(i32, i32)>) {
    let model = CheckModel::new(circuit, rules);
    let coords = layout
        .pin_coords(circuit)
        .expect("constraint checks need a layout that places every circuit pin");
    (model, coords)
}

macro_rules! batch_check {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        ///
        /// # Panics
        /// If `layout` does not place every pin of `circuit`.
        pub fn $name(circuit: &Circuit, layout: &Layout, rules: &SpanRules) -> Vec<ConstraintViolation> {
            let (model, coords) = resolve(circuit, layout, rules);
            let mut out = Vec::new();
            model.$name(&coords, &mut out);
            out
        }
    };
}

batch_check!(
    /// Every member of a net must share one strip.
    check_net_same_strip
);
batch_check!(
    /// No hole may hold two pins, from the same component or not.
    check_hole_exclusivity
);
batch_check!(
    /// Span-ruled components need pin 2 far enough from pin 1.
    check_min_span
);
batch_check!(
    /// Pins 1 and 2 of a component must be on different strips.
    check_two_pin_distinct_strips
);
batch_check!(
    /// Different groups on one strip must be separable by a cut.
    check_shared_strip_segments
);

/// Every check plus grid bounds. Empty exactly when the layout is feasible.
///
/// # Panics
/// If `layout` does not place every pin of `circuit`.
pub fn check_all(
    circuit: &Circuit,
    layout: &Layout,
    rules: &SpanRules,
) -> Vec<ConstraintViolation> {
    let (model, coords) = resolve(circuit, layout, rules);
    model.check_all(&coords, layout.grid())
}

// --- incremental form --------------------------------------------------------

const EMPTY: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Run {
    lo: i32,
    hi: i32,
    placed: u32,
    strip: i32,
}

#[derive(Debug, Clone, Copy)]
struct Trail {
    pin: usize,
    prev_run: Run,
}

/// Incremental checker over a partial assignment.
///
/// [`Propagator::place`] accepts a placement only if it conflicts with
/// nothing already placed; [`Propagator::undo`] retracts the most recent
/// accepted placement. A complete assignment is accepted pin by pin, in any
/// order, exactly when [`CheckModel::check_all`] finds no violation.
#[derive(Debug, Clone)]
pub struct Propagator<'m> {
    model: &'m CheckModel,
    grid: GridConfig,
    coords: Vec<Option<(i32, i32)>>,
    occupancy: Vec<u32>,
    runs: Vec<Run>,
    strip_groups: Vec<Vec<usize>>,
    trail: Vec<Trail>,
}

impl<'m> Propagator<'m> {
    pub fn new(model: &'m CheckModel, grid: GridConfig) -> Self {
        Propagator {
            model,
            grid,
            coords: vec![None; model.pin_count()],
            occupancy: vec![EMPTY; grid.holes() as usize],
            runs: vec![
                Run {
                    lo: 0,
                    hi: 0,
                    placed: 0,
                    strip: 0
                };
                model.groups.len()
            ],
            strip_groups: vec![Vec::new(); grid.max_strips as usize],
            trail: Vec::new(),
        }
    }

    pub fn model(&self) -> &CheckModel {
        self.model
    }

    pub fn coord(&self, pin: usize) -> Option<(i32, i32)> {
        self.coords[pin]
    }

    pub fn placed_count(&self) -> usize {
        self.trail.len()
    }

    pub fn is_complete(&self) -> bool {
        self.trail.len() == self.coords.len()
    }

    /// Strip the pin's group is committed to, if any of its pins is placed.
    pub fn group_strip(&self, group: usize) -> Option<i32> {
        (self.runs[group].placed > 0).then_some(self.runs[group].strip)
    }

    /// Position run `(lo, hi)` of a group's placed pins.
    pub fn group_run(&self, group: usize) -> Option<(i32, i32)> {
        let r = self.runs[group];
        (r.placed > 0).then_some((r.lo, r.hi))
    }

    fn cell(&self, strip: i32, position: i32) -> usize {
        (strip as usize - 1) * self.grid.max_positions as usize + position as usize - 1
    }

    pub fn occupant(&self, strip: i32, position: i32) -> Option<usize> {
        if !self.grid.contains(strip, position) {
            return None;
        }
        let o = self.occupancy[self.cell(strip, position)];
        (o != EMPTY).then_some(o as usize)
    }

    /// Cheap conflict test without building a witness.
    pub fn admits(&self, pin: usize, strip: i32, position: i32) -> bool {
        self.conflict_kind(pin, strip, position).is_none()
    }

    fn conflict_kind(
        &self,
        pin: usize,
        strip: i32,
        position: i32,
    ) -> Option<(ViolationKind, Option<usize>)> {
        debug_assert!(self.coords[pin].is_none(), "pin placed twice");
        let m = self.model;
        if !self.grid.contains(strip, position) {
            return Some((ViolationKind::OutOfBounds, None));
        }
        let occ = self.occupancy[self.cell(strip, position)];
        if occ != EMPTY {
            return Some((ViolationKind::HoleConflict, Some(occ as usize)));
        }
        let g = m.pin_group[pin];
        let run = self.runs[g];
        if run.placed > 0 && run.strip != strip {
            let other = m.groups[g]
                .iter()
                .copied()
                .find(|&q| self.coords[q].is_some());
            return Some((ViolationKind::NetSplit, other));
        }
        if let Some(pi) = m.pair_of_component[m.pin_component[pin]] {
            let pair = m.pairs[pi];
            let partner = if pin == pair.first {
                Some(pair.second)
            } else if pin == pair.second {
                Some(pair.first)
            } else {
                None
            };
            if let Some(q) = partner {
                if let Some((qs, qp)) = self.coords[q] {
                    if qs == strip {
                        return Some((ViolationKind::SameStripComponent, Some(q)));
                    }
                    if let Some(span) = pair.span {
                        let (p1, p2) = if pin == pair.first {
                            (position, qp)
                        } else {
                            (qp, position)
                        };
                        if !m.rules.satisfied(span, p1, p2) {
                            return Some((ViolationKind::SpanTooShort, Some(q)));
                        }
                    }
                }
            }
        }
        let (lo, hi) = if run.placed > 0 {
            (run.lo.min(position), run.hi.max(position))
        } else {
            (position, position)
        };
        for &h in &self.strip_groups[strip as usize - 1] {
            if h == g {
                continue;
            }
            let r = self.runs[h];
            if lo <= r.hi + 1 && r.lo <= hi + 1 {
                let other = m.groups[h]
                    .iter()
                    .copied()
                    .find(|&q| self.coords[q].is_some());
                return Some((ViolationKind::SharedStripOverlap, other));
            }
        }
        None
    }

    /// The violation placing `pin` at `(strip, position)` would cause, if any.
    pub fn conflict(&self, pin: usize, strip: i32, position: i32) -> Option<ConstraintViolation> {
        let (kind, other) = self.conflict_kind(pin, strip, position)?;
        let mut witnesses = vec![self.model.placement(pin, (strip, position))];
        if let Some(q) = other {
            witnesses.push(
                self.model
                    .placement(q, self.coords[q].expect("placed witness")),
            );
        }
        Some(ConstraintViolation {
            kind,
            message: format!(
                "placing {} at ({strip}, {position}) violates {kind}",
                self.model.describe(pin)
            ),
            witnesses,
        })
    }

    pub fn place(
        &mut self,
        pin: usize,
        strip: i32,
        position: i32,
    ) -> Result<(), ConstraintViolation> {
        if let Some(v) = self.conflict(pin, strip, position) {
            return Err(v);
        }
        self.place_unchecked(pin, strip, position);
        Ok(())
    }

    /// Places a pin the caller has already checked with [`Propagator::admits`].
    pub fn place_unchecked(&mut self, pin: usize, strip: i32, position: i32) {
        let g = self.model.pin_group[pin];
        let prev = self.runs[g];
        let cell = self.cell(strip, position);
        self.occupancy[cell] = pin as u32;
        self.coords[pin] = Some((strip, position));
        let run = &mut self.runs[g];
        if run.placed == 0 {
            *run = Run {
                lo: position,
                hi: position,
                placed: 1,
                strip,
            };
            self.strip_groups[strip as usize - 1].push(g);
        } else {
            run.lo = run.lo.min(position);
            run.hi = run.hi.max(position);
            run.placed += 1;
        }
        self.trail.push(Trail {
            pin,
            prev_run: prev,
        });
    }

    /// Retracts the most recent placement. Returns the pin, if any.
    pub fn undo(&mut self) -> Option<usize> {
        let t = self.trail.pop()?;
        let (strip, position) = self.coords[t.pin].take().expect("trail pin is placed");
        let cell = self.cell(strip, position);
        self.occupancy[cell] = EMPTY;
        let g = self.model.pin_group[t.pin];
        if t.prev_run.placed == 0 {
            let list = &mut self.strip_groups[strip as usize - 1];
            let at = list
                .iter()
                .rposition(|&h| h == g)
                .expect("group listed on its strip");
            list.remove(at);
        }
        self.runs[g] = t.prev_run;
        Some(t.pin)
    }

    /// Holes still open to `pin`, strip-major.
    pub fn candidates(&self, pin: usize) -> Vec<(i32, i32)> {
        let mut out = Vec::new();
        for s in 1..=self.grid.max_strips as i32 {
            for p in 1..=self.grid.max_positions as i32 {
                if self.admits(pin, s, p) {
                    out.push((s, p));
                }
            }
        }
        out
    }

    pub fn coords(&self) -> Option<Vec<(i32, i32)>> {
        self.coords.iter().copied().collect()
    }
}
