//! Normalization, cut derivation and the four layout checks.
//!
//! Normalized layouts are 1-based: the smallest used strip and position
//! are both 1.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::circuit::Circuit;
use crate::constraints::{CheckModel, SpanRules};
use crate::error::PostprocessError;
use crate::layout::{board_extent, BoardExtent, Cut, GridConfig, Layout, PinPlacement};

/// Translates to strip 1 and position 1, then drops empty strips and empty
/// columns.
///
/// Strips strictly between the two strips of a component's pins 1 and 2 are
/// kept so that no strip distance shrinks, and so are columns strictly
/// between those pins' positions. A column whose removal would break any
/// constraint (two groups left without a free hole between them) is also
/// kept. Cuts are dropped; derive them again with [`derive_cuts`].
pub fn normalize(
    layout: &Layout,
    circuit: &Circuit,
    rules: &SpanRules,
) -> Result<Layout, PostprocessError> {
    let coords = layout.pin_coords(circuit)?;
    let model = CheckModel::new(circuit, rules);
    let violations = model.check_all(&coords, layout.grid());
    if !violations.is_empty() {
        return Err(PostprocessError::Infeasible(violations));
    }
    if coords.is_empty() {
        return Ok(layout.with_cuts(Vec::new()));
    }

    let mut keep_strip = BTreeSet::new();
    let mut protected_cols = BTreeSet::new();
    for &(s, _) in &coords {
        keep_strip.insert(s);
    }
    for pair in &model.pairs {
        let (s1, p1) = coords[pair.first];
        let (s2, p2) = coords[pair.second];
        keep_strip.extend(s1.min(s2) + 1..s1.max(s2));
        protected_cols.extend(p1.min(p2) + 1..p1.max(p2));
    }
    let strip_map: BTreeMap<i32, i32> = keep_strip
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i as i32 + 1))
        .collect();
    let min_p = coords.iter().map(|c| c.1).min().expect("nonempty");
    let mut cur: Vec<(i32, i32)> = coords
        .iter()
        .map(|&(s, p)| (strip_map[&s], p - min_p + 1))
        .collect();
    let mut protected: BTreeSet<i32> = protected_cols.iter().map(|c| c - min_p + 1).collect();

    // Columns only move left, so one sweep reaches a fixpoint.
    let mut col = 1;
    while col <= cur.iter().map(|c| c.1).max().expect("nonempty") {
        let used = cur.iter().any(|c| c.1 == col);
        if !used && !protected.contains(&col) {
            let shifted: Vec<(i32, i32)> = cur
                .iter()
                .map(|&(s, p)| if p > col { (s, p - 1) } else { (s, p) })
                .collect();
            if model.is_feasible(&shifted, layout.grid()) {
                cur = shifted;
                protected = protected
                    .into_iter()
                    .map(|c| if c > col { c - 1 } else { c })
                    .collect();
                continue;
            }
        }
        col += 1;
    }

    let index: BTreeMap<(&str, u32), usize> = circuit
        .pins()
        .enumerate()
        .map(|(i, id)| {
            (
                (
                    circuit.components()[id.component].reference.as_str(),
                    id.pin,
                ),
                i,
            )
        })
        .collect();
    let placements = layout
        .placements()
        .iter()
        .map(|pl| {
            let (s, q) = cur[index[&(pl.reference.as_str(), pl.pin)]];
            PinPlacement::new(pl.reference.clone(), pl.pin, s, q)
        })
        .collect();
    let out = Layout::new(layout.grid(), placements, Vec::new())?;
    debug_assert!(model.check_all(&cur, layout.grid()).is_empty());
    Ok(out)
}

/// One cut right after each group's run on a strip shared with a later run,
/// i.e. at the leftmost hole of every gap between different groups.
pub fn derive_cuts(layout: &Layout, circuit: &Circuit) -> Result<Vec<Cut>, PostprocessError> {
    let coords = layout.pin_coords(circuit)?;
    let model = CheckModel::new(circuit, &SpanRules::none());
    let mut violations = Vec::new();
    model.check_shared_strip_segments(&coords, &mut violations);
    if !violations.is_empty() {
        return Err(PostprocessError::Infeasible(violations));
    }
    let runs = model.runs(&coords);
    let mut cuts: Vec<Cut> = runs
        .windows(2)
        .filter(|w| w[0].0 == w[1].0)
        .map(|w| Cut::new(w[0].0, w[0].2))
        .collect();
    cuts.sort();
    Ok(cuts)
}

/// Evidence for one check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckEvidence {
    pub check: &'static str,
    pub ok: bool,
    pub details: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub connectivity_ok: bool,
    pub pin_placement_ok: bool,
    pub dimensions_ok: bool,
    pub feasibility_ok: bool,
    pub overall: bool,
    pub evidence: Vec<CheckEvidence>,
}

impl VerificationReport {
    /// Key-sorted, pretty-printed JSON.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        serde_json::to_string_pretty(&value).expect("report serializes")
    }
}

fn fmt_pin((reference, pin): &(String, u32)) -> String {
    format!("{reference}.{pin}")
}

fn fmt_class(class: &[(String, u32)]) -> String {
    let pins: Vec<String> = class.iter().map(fmt_pin).collect();
    format!("{{{}}}", pins.join(", "))
}

/// Pin classes joined by copper: same strip, no cut between them.
pub fn reconstruct_nets(layout: &Layout) -> Vec<Vec<(String, u32)>> {
    let mut by_strip: BTreeMap<i32, Vec<(i32, String, u32)>> = BTreeMap::new();
    for p in layout.placements() {
        by_strip
            .entry(p.strip)
            .or_default()
            .push((p.position, p.reference.clone(), p.pin));
    }
    let mut classes = Vec::new();
    for (strip, mut pins) in by_strip {
        pins.sort();
        let cuts: Vec<i32> = layout
            .cuts()
            .iter()
            .filter(|c| c.strip == strip)
            .map(|c| c.after_position)
            .collect();
        let mut class: Vec<(String, u32)> = Vec::new();
        let mut last: Option<i32> = None;
        for (pos, reference, pin) in pins {
            let severed = last.is_some_and(|l| cuts.iter().any(|&c| l <= c && c < pos));
            if severed {
                class.sort();
                classes.push(std::mem::take(&mut class));
            }
            class.push((reference, pin));
            last = Some(pos);
        }
        class.sort();
        classes.push(class);
    }
    classes.sort();
    classes
}

/// Runs the four checks. `claimed` is the extent the layout reports, or
/// `None` for a layout that claims to be empty.
///
/// Nothing here trusts the solver: connectivity is rebuilt from strips and
/// cuts alone.
pub fn verify(
    circuit: &Circuit,
    layout: &Layout,
    claimed: Option<BoardExtent>,
) -> VerificationReport {
    // 1. connectivity
    let expected = circuit.pin_partition();
    let found = reconstruct_nets(layout);
    let mut conn = Vec::new();
    let exp_set: BTreeSet<&Vec<(String, u32)>> = expected.iter().collect();
    let found_set: BTreeSet<&Vec<(String, u32)>> = found.iter().collect();
    for c in exp_set.difference(&found_set) {
        conn.push(format!(
            "net {} is not a copper segment of its own",
            fmt_class(c)
        ));
    }
    for c in found_set.difference(&exp_set) {
        conn.push(format!("copper segment joins {}", fmt_class(c)));
    }

    // 2. pin placement
    let mut pins = Vec::new();
    for comp in circuit.components().iter().filter(|c| c.pin_count >= 2) {
        let strips: BTreeSet<Option<i32>> = (1..=comp.pin_count)
            .map(|pin| layout.coord(&comp.reference, pin).map(|c| c.0))
            .collect();
        if strips.len() == 1 {
            if let Some(Some(s)) = strips.into_iter().next() {
                pins.push(format!(
                    "all {} pins of {} are on strip {s}",
                    comp.pin_count, comp.reference
                ));
            }
        }
    }

    // 3. dimensions
    let mut dims = Vec::new();
    let actual = board_extent(layout).ok();
    if actual != claimed {
        let show = |e: Option<BoardExtent>| match e {
            Some(e) => format!(
                "strips {}..{}, positions {}..{} ({}x{})",
                e.min_strip, e.max_strip, e.min_position, e.max_position, e.width, e.length
            ),
            None => "empty".to_string(),
        };
        dims.push(format!(
            "claimed {} but pins occupy {}",
            show(claimed),
            show(actual)
        ));
    }

    // 4. feasibility
    let mut feas = Vec::new();
    let mut holes: BTreeMap<(i32, i32), Vec<String>> = BTreeMap::new();
    for p in layout.placements() {
        holes
            .entry((p.strip, p.position))
            .or_default()
            .push(format!("{}.{}", p.reference, p.pin));
        let inside = claimed.is_some_and(|e| e.contains(p.strip, p.position));
        if !inside {
            feas.push(format!(
                "{}.{} at ({}, {}) lies outside the claimed board",
                p.reference, p.pin, p.strip, p.position
            ));
        }
    }
    for ((s, q), who) in holes.iter().filter(|(_, w)| w.len() > 1) {
        feas.push(format!("hole ({s}, {q}) holds {}", who.join(" and ")));
    }

    let evidence = vec![
        CheckEvidence {
            check: "connectivity",
            ok: conn.is_empty(),
            details: conn,
        },
        CheckEvidence {
            check: "pin_placement",
            ok: pins.is_empty(),
            details: pins,
        },
        CheckEvidence {
            check: "dimensions",
            ok: dims.is_empty(),
            details: dims,
        },
        CheckEvidence {
            check: "feasibility",
            ok: feas.is_empty(),
            details: feas,
        },
    ];
    let flags: Vec<bool> = evidence.iter().map(|e| e.ok).collect();
    VerificationReport {
        connectivity_ok: flags[0],
        pin_placement_ok: flags[1],
        dimensions_ok: flags[2],
        feasibility_ok: flags[3],
        overall: flags.iter().all(|&b| b),
        evidence,
    }
}

/// The extent a layout file reports: its grid, read as a board anchored at
/// (1, 1). An empty layout reports nothing.
pub fn claimed_extent(layout: &Layout) -> Option<BoardExtent> {
    if layout.is_empty() {
        return None;
    }
    let g = layout.grid();
    Some(BoardExtent::from_bounds(
        1,
        g.max_strips as i32,
        1,
        g.max_positions as i32,
    ))
}

/// Normalizes, derives cuts, and shrinks the grid to the board, which is
/// the form the solver's layout files take.
pub fn finalize(
    layout: &Layout,
    circuit: &Circuit,
    rules: &SpanRules,
) -> Result<Layout, PostprocessError> {
    let norm = normalize(layout, circuit, rules)?;
    let cuts = derive_cuts(&norm, circuit)?;
    let grid = match board_extent(&norm) {
        Ok(e) => GridConfig::new(e.width as u32, e.length as u32)?,
        Err(_) => norm.grid(),
    };
    Ok(norm.with_cuts(cuts).with_grid(grid))
}
