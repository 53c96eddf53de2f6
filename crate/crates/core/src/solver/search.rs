//! Exact branch-and-bound in two levels.
//!
//! Level 1 gives every non-free group (a net, or a lone pin 1/2) a strip
//! relative to the first group; that fixes the total strip distance. Level 2
//! orders the groups along each strip that carries a span-ruled pin and
//! takes the least solution of the resulting difference constraints, which
//! minimises the board length for that order. Strips without span pins do
//! not interact with the rest and are packed from the left.
//!
//! Free pins (a one-member group that is neither pin 1 nor pin 2) only cost
//! holes; they are placed last into whatever room the window leaves, and
//! the window grows when there is too little.

use std::time::Instant;

use crate::circuit::Circuit;
use crate::constraints::CheckModel;
use crate::layout::{GridConfig, ObjectiveTuple};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Found {
    pub tuple: ObjectiveTuple,
    /// Per model pin, translated so the smallest strip and position are 1.
    pub coords: Vec<(i32, i32)>,
}

#[derive(Debug)]
struct Group {
    pins: Vec<usize>,
    k: i32,
    span_pins: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct SpanPair {
    first: usize,
    second: usize,
    span: i32,
}

#[derive(Debug)]
pub(crate) struct Problem<'m> {
    model: &'m CheckModel,
    grid: GridConfig,
    groups: Vec<Group>,
    fillers: Vec<usize>,
    /// One entry per pin-1/pin-2 pair touching the group.
    neighbors: Vec<Vec<usize>>,
    edge_count: usize,
    spans: Vec<SpanPair>,
    unsigned: bool,
    /// Earlier group the group is interchangeable with, if any.
    class_prev: Vec<Option<usize>>,
    designated: Vec<bool>,
    /// Pins plus groups over the whole circuit; each strip in use needs
    /// that many holes, less one.
    slots: i64,
    min_len: i32,
}

impl<'m> Problem<'m> {
    /// `Err` carries the reason the circuit can never be placed.
    pub fn new(model: &'m CheckModel, circuit: &Circuit, grid: GridConfig) -> Result<Self, String> {
        let n = model.pin_count();
        if n as u64 > grid.holes() {
            return Err(format!(
                "{n} pins cannot fit on a {}x{} grid of {} holes",
                grid.max_strips,
                grid.max_positions,
                grid.holes()
            ));
        }
        let mut in_pair = vec![false; n];
        for pair in &model.pairs {
            in_pair[pair.first] = true;
            in_pair[pair.second] = true;
            if model.pin_group[pair.first] == model.pin_group[pair.second] {
                return Err(format!(
                    "pins 1 and 2 of {} are on the same net but must use different strips",
                    model.references[pair.component]
                ));
            }
        }
        let free = |g: usize| model.groups[g].len() == 1 && !in_pair[model.groups[g][0]];

        let comps = circuit.components().len();
        let mut first_pin = vec![0usize; comps + 1];
        for c in 0..comps {
            first_pin[c + 1] = first_pin[c] + circuit.components()[c].pin_count as usize;
        }
        let degree = |c: usize| {
            (first_pin[c]..first_pin[c + 1])
                .filter(|&p| model.groups[model.pin_group[p]].len() > 1)
                .count()
        };
        let mut order: Vec<usize> = (0..comps).collect();
        order.sort_by_key(|&c| std::cmp::Reverse(degree(c)));

        let mut model_groups = Vec::new();
        let mut seen = vec![false; model.groups.len()];
        for &c in &order {
            for p in first_pin[c]..first_pin[c + 1] {
                let g = model.pin_group[p];
                if !seen[g] && !free(g) {
                    seen[g] = true;
                    model_groups.push(g);
                }
            }
        }
        let touches_pair = |g: usize| model.groups[g].iter().any(|&p| in_pair[p]);
        let (mut designated, loose): (Vec<usize>, Vec<usize>) =
            model_groups.into_iter().partition(|&g| touches_pair(g));
        let designated_count = designated.len();
        designated.extend(loose);
        let model_groups = designated;

        let mut search_of = vec![NONE; model.groups.len()];
        for (i, &g) in model_groups.iter().enumerate() {
            search_of[g] = i;
        }
        let mut is_span_pin = vec![false; n];
        let mut spans = Vec::new();
        for pair in &model.pairs {
            if let Some(span) = pair.span {
                is_span_pin[pair.first] = true;
                is_span_pin[pair.second] = true;
                spans.push(SpanPair {
                    first: pair.first,
                    second: pair.second,
                    span,
                });
            }
        }
        let groups: Vec<Group> = model_groups
            .iter()
            .map(|&g| Group {
                pins: model.groups[g].clone(),
                k: model.groups[g].len() as i32,
                span_pins: model.groups[g]
                    .iter()
                    .copied()
                    .filter(|&p| is_span_pin[p])
                    .collect(),
            })
            .collect();
        let mut neighbors = vec![Vec::new(); groups.len()];
        for pair in &model.pairs {
            let a = search_of[model.pin_group[pair.first]];
            let b = search_of[model.pin_group[pair.second]];
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        let mut class_prev = vec![None; groups.len()];
        for i in designated_count..groups.len() {
            class_prev[i] = (designated_count..i)
                .rev()
                .find(|&j| groups[j].k == groups[i].k);
        }
        let fillers = (0..model.groups.len())
            .filter(|&g| free(g))
            .map(|g| model.groups[g][0])
            .collect();
        Ok(Problem {
            model,
            grid,
            edge_count: model.pairs.len(),
            designated: (0..groups.len()).map(|i| i < designated_count).collect(),
            groups,
            fillers,
            neighbors,
            min_len: spans.iter().map(|s| s.span + 1).max().unwrap_or(1),
            spans,
            unsigned: model.rules.unsigned,
            class_prev,
            slots: (n + model.groups.len()) as i64,
        })
    }

    fn max_strips(&self) -> i32 {
        self.grid.max_strips as i32
    }

    fn max_positions(&self) -> i32 {
        self.grid.max_positions as i32
    }

    /// Smallest `(area, width)` any completion can reach once at least
    /// `w_min` strips and `l_min` positions are in use.
    fn area_bound(&self, w_min: i32, l_min: i32) -> Option<(u64, u64)> {
        let mut best: Option<(u64, u64)> = None;
        for w in w_min.max(1)..=self.max_strips() {
            let l = (l_min as i64)
                .max((self.slots + w as i64 - 1) / w as i64 - 1)
                .max(1);
            if l > self.max_positions() as i64 {
                continue;
            }
            let cand = ((w as i64 * l) as u64, w as u64);
            if best.is_none_or(|b| cand < b) {
                best = Some(cand);
            }
        }
        best
    }
}

pub(crate) struct SearchState {
    deadline: Option<Instant>,
    pub nodes: u64,
    pub timed_out: bool,
    first_only: bool,
    stopped: bool,
    pub incumbent: Option<Found>,
    pub trace: Vec<ObjectiveTuple>,
}

impl SearchState {
    pub fn new(deadline: Option<Instant>, first_only: bool, incumbent: Option<Found>) -> Self {
        SearchState {
            deadline,
            nodes: 0,
            timed_out: false,
            first_only,
            stopped: false,
            trace: incumbent.iter().map(|f| f.tuple).collect(),
            incumbent,
        }
    }

    /// Counts a node; true once the search must unwind.
    fn halted(&mut self) -> bool {
        if self.stopped || self.timed_out {
            return true;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) {
            self.check_clock();
        }
        self.timed_out
    }

    fn check_clock(&mut self) {
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out = true;
        }
    }

    fn improves(&self, t: &ObjectiveTuple) -> bool {
        self.incumbent.as_ref().is_none_or(|f| *t < f.tuple)
    }

    fn offer(&mut self, found: Found) {
        if self.improves(&found.tuple) {
            self.trace.push(found.tuple);
            self.incumbent = Some(found);
            if self.first_only {
                self.stopped = true;
            }
        }
    }
}

/// Runs the search to exhaustion, first leaf, or deadline.
pub(crate) fn run(p: &Problem<'_>, st: &mut SearchState) {
    st.check_clock();
    if p.groups.is_empty() {
        if !p.fillers.is_empty() {
            let l2 = Level2::new(p, &[], 0, 0);
            l2.finish_leaf(p, st);
        }
        return;
    }
    let span = p.max_strips();
    let mut l1 = Level1 {
        sigma: vec![0; p.groups.len()],
        off: span - 1,
        pins_at: vec![0; (2 * span - 1) as usize],
        groups_at: vec![0; (2 * span - 1) as usize],
        lo: 0,
        hi: 0,
        td: 0,
        closed: 0,
        reflect_fixed: false,
    };
    l1.assign(p, 0, 0);
    level1(p, st, &mut l1, 1);
}

// --- level 1: strips -----------------------------------------------------------

struct Level1 {
    sigma: Vec<i32>,
    off: i32,
    pins_at: Vec<i32>,
    groups_at: Vec<i32>,
    lo: i32,
    hi: i32,
    td: i64,
    closed: usize,
    reflect_fixed: bool,
}

struct Undo1 {
    lo: i32,
    hi: i32,
    td: i64,
    closed: usize,
    reflect_fixed: bool,
}

impl Level1 {
    fn slot(&self, v: i32) -> usize {
        (v + self.off) as usize
    }

    fn need_at(&self, v: i32) -> i32 {
        let i = self.slot(v);
        if self.groups_at[i] == 0 {
            0
        } else {
            self.pins_at[i] + self.groups_at[i] - 1
        }
    }

    fn assign(&mut self, p: &Problem<'_>, g: usize, v: i32) -> Undo1 {
        let undo = Undo1 {
            lo: self.lo,
            hi: self.hi,
            td: self.td,
            closed: self.closed,
            reflect_fixed: self.reflect_fixed,
        };
        self.sigma[g] = v;
        if g == 0 {
            self.lo = v;
            self.hi = v;
        } else {
            self.lo = self.lo.min(v);
            self.hi = self.hi.max(v);
        }
        for &h in &p.neighbors[g] {
            if h < g {
                self.td += (v - self.sigma[h]).abs() as i64;
                self.closed += 1;
            }
        }
        if p.designated[g] && v != 0 {
            self.reflect_fixed = true;
        }
        let i = self.slot(v);
        self.pins_at[i] += p.groups[g].k;
        self.groups_at[i] += 1;
        undo
    }

    fn unassign(&mut self, p: &Problem<'_>, g: usize, u: Undo1) {
        let i = self.slot(self.sigma[g]);
        self.pins_at[i] -= p.groups[g].k;
        self.groups_at[i] -= 1;
        self.lo = u.lo;
        self.hi = u.hi;
        self.td = u.td;
        self.closed = u.closed;
        self.reflect_fixed = u.reflect_fixed;
    }

    fn bound(&self, p: &Problem<'_>) -> Option<ObjectiveTuple> {
        let td = self.td + (p.edge_count - self.closed) as i64;
        let need = (self.lo..=self.hi)
            .map(|v| self.need_at(v))
            .max()
            .unwrap_or(0);
        let (area, width) = p.area_bound(self.hi - self.lo + 1, need.max(p.min_len))?;
        Some(ObjectiveTuple::new(td as u64, area, width))
    }
}

fn level1(p: &Problem<'_>, st: &mut SearchState, l1: &mut Level1, g: usize) {
    if st.halted() {
        return;
    }
    if g == p.groups.len() {
        level2_root(p, st, l1);
        return;
    }
    let reach = p.max_strips() - 1;
    let mut lo_v = l1.hi - reach;
    let hi_v = l1.lo + reach;
    if let Some(h) = p.class_prev[g] {
        lo_v = lo_v.max(l1.sigma[h]);
    }
    if p.designated[g] && !l1.reflect_fixed {
        lo_v = lo_v.max(0);
    }
    let mut values = Vec::new();
    'v: for v in lo_v..=hi_v {
        let mut td_inc = 0;
        for &h in &p.neighbors[g] {
            if h < g {
                if l1.sigma[h] == v {
                    continue 'v;
                }
                td_inc += (v - l1.sigma[h]).abs();
            }
        }
        let growth = l1.hi.max(v) - l1.lo.min(v) - (l1.hi - l1.lo);
        let i = l1.slot(v);
        let need_after = l1.pins_at[i] + p.groups[g].k + l1.groups_at[i];
        values.push((td_inc, growth, need_after, v));
    }
    values.sort_unstable();
    for (_, _, _, v) in values {
        let undo = l1.assign(p, g, v);
        let admissible = l1.bound(p).is_some_and(|b| st.improves(&b));
        if admissible {
            level1(p, st, l1, g + 1);
        }
        l1.unassign(p, g, undo);
        if st.stopped || st.timed_out {
            return;
        }
    }
}

// --- level 2: positions ----------------------------------------------------------

struct Graph {
    out: Vec<Vec<(usize, i32)>>,
    dist: Vec<i32>,
    trail: Vec<(usize, i32)>,
}

impl Graph {
    fn new(nodes: usize) -> Self {
        Graph {
            out: vec![Vec::new(); nodes],
            dist: vec![0; nodes],
            trail: Vec::new(),
        }
    }

    /// Adds `dist[v] >= dist[u] + w` and restores the least solution.
    /// False when some node would pass `cap`; the caller must still
    /// [`Graph::retract`] the edge.
    fn add_edge(&mut self, u: usize, v: usize, w: i32, cap: i32) -> bool {
        self.out[u].push((v, w));
        let mut stack = vec![(u, v, w)];
        while let Some((a, b, w)) = stack.pop() {
            let d = self.dist[a] + w;
            if d > self.dist[b] {
                if d > cap {
                    return false;
                }
                self.trail.push((b, self.dist[b]));
                self.dist[b] = d;
                for &(c, w2) in &self.out[b] {
                    stack.push((b, c, w2));
                }
            }
        }
        true
    }

    fn mark(&self) -> usize {
        self.trail.len()
    }

    fn retract(&mut self, u: usize, mark: usize) {
        self.out[u].pop();
        while self.trail.len() > mark {
            let (n, d) = self.trail.pop().expect("trail above mark");
            self.dist[n] = d;
        }
    }
}

struct Chain {
    /// Group ids for a strip chain, pin ids for a within-group pin chain.
    items: Vec<usize>,
    strip: bool,
    placed: Vec<bool>,
    seq: Vec<usize>,
    class_prev: Vec<Option<usize>>,
}

struct Level2 {
    td: u64,
    smin: i32,
    width: i32,
    /// Groups per relative strip `s - smin`, in search order.
    strips: Vec<Vec<usize>>,
    span_strip: Vec<bool>,
    lo_node: Vec<usize>,
    hi_node: Vec<usize>,
    x_node: Vec<usize>,
    graph: Graph,
    chains: Vec<Chain>,
    dirs_done: usize,
    /// Longest non-span strip, already packed.
    flat_need: i32,
}

impl Level2 {
    fn new(p: &Problem<'_>, sigma: &[i32], td: u64, smin: i32) -> Level2 {
        let width = sigma.iter().map(|&s| s - smin + 1).max().unwrap_or(0);
        let mut strips = vec![Vec::new(); width as usize];
        for (g, &s) in sigma.iter().enumerate() {
            strips[(s - smin) as usize].push(g);
        }
        let span_strip: Vec<bool> = strips
            .iter()
            .map(|gs| gs.iter().any(|&g| !p.groups[g].span_pins.is_empty()))
            .collect();
        let mut nodes = 0;
        let mut lo_node = vec![NONE; p.groups.len()];
        let mut hi_node = vec![NONE; p.groups.len()];
        let mut x_node = vec![NONE; p.model.pin_count()];
        let mut flat_need = 0;
        let mut chains = Vec::new();
        for (s, gs) in strips.iter().enumerate() {
            if !span_strip[s] {
                if !gs.is_empty() {
                    let need: i32 = gs.iter().map(|&g| p.groups[g].k + 1).sum::<i32>() - 1;
                    flat_need = flat_need.max(need);
                }
                continue;
            }
            for &g in gs {
                lo_node[g] = nodes;
                hi_node[g] = nodes + 1;
                nodes += 2;
                for &x in &p.groups[g].span_pins {
                    x_node[x] = nodes;
                    nodes += 1;
                }
                if p.groups[g].span_pins.len() > 1 {
                    let items = p.groups[g].span_pins.clone();
                    chains.push(Chain {
                        placed: vec![false; items.len()],
                        class_prev: vec![None; items.len()],
                        items,
                        strip: false,
                        seq: Vec::new(),
                    });
                }
            }
        }
        for (s, gs) in strips.iter().enumerate() {
            if !span_strip[s] {
                continue;
            }
            let class_prev = (0..gs.len())
                .map(|i| {
                    let gi = &p.groups[gs[i]];
                    if !gi.span_pins.is_empty() {
                        return None;
                    }
                    (0..i).rev().find(|&j| {
                        let gj = &p.groups[gs[j]];
                        gj.span_pins.is_empty() && gj.k == gi.k
                    })
                })
                .collect();
            chains.push(Chain {
                items: gs.clone(),
                strip: true,
                placed: vec![false; gs.len()],
                seq: Vec::new(),
                class_prev,
            });
        }
        Level2 {
            td,
            smin,
            width,
            strips,
            span_strip,
            lo_node,
            hi_node,
            x_node,
            graph: Graph::new(nodes),
            chains,
            dirs_done: 0,
            flat_need,
        }
    }

    /// Largest allowed last position, or `None` when nothing here can beat
    /// the incumbent.
    fn cap(&self, p: &Problem<'_>, st: &SearchState) -> Option<i32> {
        let max = p.max_positions();
        let Some(inc) = &st.incumbent else {
            return Some(max - 1);
        };
        let t = inc.tuple;
        if self.td > t.total_strip_distance {
            return None;
        }
        if self.td < t.total_strip_distance {
            return Some(max - 1);
        }
        let w = self.width.max(1) as u64;
        let l = if w < t.board_width {
            t.board_area / w
        } else {
            t.board_area.saturating_sub(1) / w
        };
        let l = (l as i64).min(max as i64) as i32;
        if l < 1 {
            None
        } else {
            Some(l - 1)
        }
    }

    fn length_bound(&self, p: &Problem<'_>) -> i32 {
        let mut l = self.flat_need.max(p.min_len);
        if let Some(&m) = self.graph.dist.iter().max() {
            l = l.max(m + 1);
        }
        for c in self.chains.iter().filter(|c| c.strip) {
            let end = c
                .seq
                .last()
                .map_or(-2, |&g| self.graph.dist[self.hi_node[g]]);
            let rest: i32 = c
                .items
                .iter()
                .zip(&c.placed)
                .filter(|(_, &done)| !done)
                .map(|(&g, _)| p.groups[g].k + 1)
                .sum();
            l = l.max(end + rest + 1);
        }
        l
    }

    fn admissible(&self, p: &Problem<'_>, st: &SearchState) -> bool {
        match p.area_bound(self.width, self.length_bound(p)) {
            Some((area, width)) => st.improves(&ObjectiveTuple::new(self.td, area, width)),
            None => false,
        }
    }

    fn item_nodes(&self, chain: &Chain, item: usize) -> (usize, usize) {
        if chain.strip {
            (self.lo_node[item], self.hi_node[item])
        } else {
            (self.x_node[item], self.x_node[item])
        }
    }
}

fn level2_root(p: &Problem<'_>, st: &mut SearchState, l1: &Level1) {
    let mut l2 = Level2::new(p, &l1.sigma, l1.td as u64, l1.lo);
    let Some(cap) = l2.cap(p, st) else { return };
    let mut edges = Vec::new();
    for g in 0..p.groups.len() {
        if l2.lo_node[g] == NONE {
            continue;
        }
        edges.push((l2.lo_node[g], l2.hi_node[g], p.groups[g].k - 1));
        for &x in &p.groups[g].span_pins {
            edges.push((l2.lo_node[g], l2.x_node[x], 0));
            edges.push((l2.x_node[x], l2.hi_node[g], 0));
        }
    }
    if !p.unsigned {
        for s in &p.spans {
            edges.push((l2.x_node[s.first], l2.x_node[s.second], s.span));
        }
    }
    for (u, v, w) in edges {
        if !l2.graph.add_edge(u, v, w, cap) {
            return;
        }
    }
    // Static edges are never retracted; forget their trail.
    l2.graph.trail.clear();
    if l2.admissible(p, st) {
        level2(p, st, &mut l2);
    }
}

fn level2(p: &Problem<'_>, st: &mut SearchState, l2: &mut Level2) {
    if st.halted() {
        return;
    }
    if p.unsigned && l2.dirs_done < p.spans.len() {
        let s = p.spans[l2.dirs_done];
        l2.dirs_done += 1;
        for (a, b) in [(s.first, s.second), (s.second, s.first)] {
            let Some(cap) = l2.cap(p, st) else { break };
            let (u, v) = (l2.x_node[a], l2.x_node[b]);
            let mark = l2.graph.mark();
            if l2.graph.add_edge(u, v, s.span, cap) && l2.admissible(p, st) {
                level2(p, st, l2);
            }
            l2.graph.retract(u, mark);
            if st.stopped || st.timed_out {
                break;
            }
        }
        l2.dirs_done -= 1;
        return;
    }
    let Some(ci) = l2.chains.iter().position(|c| c.seq.len() < c.items.len()) else {
        l2.finish_leaf(p, st);
        return;
    };
    let mut options: Vec<(i32, usize)> = Vec::new();
    {
        let chain = &l2.chains[ci];
        for (i, &item) in chain.items.iter().enumerate() {
            if chain.placed[i] || chain.class_prev[i].is_some_and(|j| !chain.placed[j]) {
                continue;
            }
            let (start, _) = l2.item_nodes(chain, item);
            options.push((l2.graph.dist[start], i));
        }
    }
    options.sort_unstable();
    for (_, i) in options {
        let Some(cap) = l2.cap(p, st) else { break };
        let chain = &l2.chains[ci];
        let item = chain.items[i];
        let (start, _) = l2.item_nodes(chain, item);
        let prev = chain.seq.last().map(|&last| {
            let (_, end) = l2.item_nodes(chain, last);
            (end, if chain.strip { 2 } else { 1 })
        });
        let mark = l2.graph.mark();
        let ok = match prev {
            Some((end, w)) => l2.graph.add_edge(end, start, w, cap),
            None => true,
        };
        l2.chains[ci].placed[i] = true;
        l2.chains[ci].seq.push(item);
        if ok && l2.admissible(p, st) {
            level2(p, st, l2);
        }
        l2.chains[ci].seq.pop();
        l2.chains[ci].placed[i] = false;
        if let Some((end, _)) = prev {
            l2.graph.retract(end, mark);
        }
        if st.stopped || st.timed_out {
            return;
        }
    }
}

// --- leaves ----------------------------------------------------------------------

/// Holes a free pin may take on one strip of length `len`, given the
/// sorted runs of the groups already there.
fn free_slots(runs: &[(i32, i32)], len: i32, out: &mut Vec<i32>) {
    let mut next = 0;
    for (i, &(lo, hi)) in runs.iter().enumerate() {
        if i == 0 {
            // Leading room: keep one hole before the run.
            let mut q = lo - 2;
            let mut lead = Vec::new();
            while q >= 0 {
                lead.push(q);
                q -= 2;
            }
            out.extend(lead.into_iter().rev());
        } else {
            let mut q = next;
            while q <= lo - 2 {
                out.push(q);
                q += 2;
            }
        }
        next = hi + 2;
    }
    let mut q = if runs.is_empty() { 0 } else { next };
    while q < len {
        out.push(q);
        q += 2;
    }
}

fn strip_capacity(runs: &[(i32, i32)], len: i32) -> i64 {
    if runs.is_empty() {
        return ((len + 1) / 2) as i64;
    }
    let mut cap = (runs[0].0 / 2) as i64;
    for w in runs.windows(2) {
        let m = w[1].0 - w[0].1 - 1;
        cap += ((m - 1) / 2) as i64;
    }
    cap + ((len - 1 - runs[runs.len() - 1].1) / 2) as i64
}

/// Non-free pins of one candidate, relative strips and 0-based positions.
struct Placed {
    coords: Vec<(i32, i32)>,
    runs: Vec<Vec<(i32, i32)>>,
    len: i32,
}

impl Level2 {
    fn pack_flat(
        &self,
        p: &Problem<'_>,
        coords: &mut [(i32, i32)],
        runs: &mut [Vec<(i32, i32)>],
    ) -> i32 {
        let mut len = 0;
        for (s, gs) in self.strips.iter().enumerate() {
            if self.span_strip[s] {
                continue;
            }
            let strip = self.smin + s as i32;
            let mut at = 0;
            for &g in gs {
                let grp = &p.groups[g];
                for (i, &pin) in grp.pins.iter().enumerate() {
                    coords[pin] = (strip, at + i as i32);
                }
                runs[s].push((at, at + grp.k - 1));
                at += grp.k + 1;
            }
            len = len.max(at - 1);
        }
        len
    }

    /// Puts a group's pins into `[lo, lo + len)`, span pins first.
    fn fill_group(
        p: &Problem<'_>,
        g: usize,
        strip: i32,
        lo: i32,
        len: i32,
        xs: &dyn Fn(usize) -> i32,
        coords: &mut [(i32, i32)],
    ) {
        let grp = &p.groups[g];
        let taken: Vec<i32> = grp.span_pins.iter().map(|&x| xs(x)).collect();
        for &x in &grp.span_pins {
            coords[x] = (strip, xs(x));
        }
        let mut hole = lo;
        for &pin in &grp.pins {
            if grp.span_pins.contains(&pin) {
                continue;
            }
            while taken.contains(&hole) {
                hole += 1;
            }
            debug_assert!(hole < lo + len);
            coords[pin] = (strip, hole);
            hole += 1;
        }
    }

    fn group_extent(p: &Problem<'_>, g: usize, xs: &dyn Fn(usize) -> i32) -> (i32, i32, i32) {
        let grp = &p.groups[g];
        let min_x = grp
            .span_pins
            .iter()
            .map(|&x| xs(x))
            .min()
            .unwrap_or(i32::MAX);
        let max_x = grp
            .span_pins
            .iter()
            .map(|&x| xs(x))
            .max()
            .unwrap_or(i32::MIN);
        let len = if grp.span_pins.is_empty() {
            grp.k
        } else {
            grp.k.max(max_x - min_x + 1)
        };
        (min_x, max_x, len)
    }

    /// The least solution, with each group's run pulled as far right as its
    /// own span pins allow.
    fn least(&self, p: &Problem<'_>) -> Placed {
        let mut coords = vec![(0, 0); p.model.pin_count()];
        let mut runs = vec![Vec::new(); self.strips.len()];
        let mut len = self.pack_flat(p, &mut coords, &mut runs);
        let dist = &self.graph.dist;
        let xs = |x: usize| dist[self.x_node[x]];
        for c in self.chains.iter().filter(|c| c.strip) {
            let strip = p.model_strip_of(self, c.items[0]);
            let s = (strip - self.smin) as usize;
            for &g in &c.seq {
                let (_, max_x, glen) = Self::group_extent(p, g, &xs);
                let lo = if p.groups[g].span_pins.is_empty() {
                    dist[self.lo_node[g]]
                } else {
                    dist[self.lo_node[g]].max(max_x - glen + 1)
                };
                Self::fill_group(p, g, strip, lo, glen, &xs, &mut coords);
                runs[s].push((lo, lo + glen - 1));
                len = len.max(lo + glen);
            }
        }
        let shift = runs.iter().flatten().map(|r| r.0).min().unwrap_or(0);
        if shift > 0 {
            for c in &mut coords {
                c.1 -= shift;
            }
            for r in runs.iter_mut().flatten() {
                r.0 -= shift;
                r.1 -= shift;
            }
            len -= shift;
        }
        Placed { coords, runs, len }
    }

    fn finish_leaf(&self, p: &Problem<'_>, st: &mut SearchState) {
        let placed = self.least(p);
        let cap: i64 = placed
            .runs
            .iter()
            .map(|r| strip_capacity(r, placed.len))
            .sum();
        if cap >= p.fillers.len() as i64 {
            let tuple = ObjectiveTuple::new(
                self.td,
                (self.width as i64 * placed.len as i64) as u64,
                self.width as u64,
            );
            if st.improves(&tuple) {
                let found = self.complete(p, placed, 0, tuple);
                st.offer(found);
            }
            return;
        }
        self.best_window(p, st, placed.len);
    }

    /// Adds free pins and `extra` filler-only strips, then translates.
    fn complete(
        &self,
        p: &Problem<'_>,
        mut placed: Placed,
        extra: i32,
        tuple: ObjectiveTuple,
    ) -> Found {
        let mut slots = Vec::new();
        let mut spots: Vec<(i32, i32)> = Vec::new();
        for (s, runs) in placed.runs.iter_mut().enumerate() {
            runs.sort_unstable();
            slots.clear();
            free_slots(runs, placed.len, &mut slots);
            spots.extend(slots.iter().map(|&q| (self.smin + s as i32, q)));
        }
        for e in 0..extra {
            let strip = self.smin + self.width + e;
            let mut q = 0;
            while q < placed.len {
                spots.push((strip, q));
                q += 2;
            }
        }
        debug_assert!(spots.len() >= p.fillers.len());
        for (&pin, &spot) in p.fillers.iter().zip(&spots) {
            placed.coords[pin] = spot;
        }
        let min_s = placed.coords.iter().map(|c| c.0).min().unwrap_or(1);
        let min_p = placed.coords.iter().map(|c| c.1).min().unwrap_or(1);
        let coords = placed
            .coords
            .iter()
            .map(|&(s, q)| (s - min_s + 1, q - min_p + 1))
            .collect();
        Found { tuple, coords }
    }
}

impl Problem<'_> {
    fn model_strip_of(&self, l2: &Level2, g: usize) -> i32 {
        l2.strips
            .iter()
            .position(|gs| gs.contains(&g))
            .map(|s| l2.smin + s as i32)
            .expect("group is on some strip")
    }
}

// --- free pins that do not fit ---------------------------------------------------

/// Longest paths from one node through the fixed constraint graph.
fn longest_from(graph: &Graph, src: usize) -> Vec<i32> {
    let mut d = vec![i32::MIN; graph.out.len()];
    d[src] = 0;
    let mut stack = vec![src];
    while let Some(u) = stack.pop() {
        for &(v, w) in &graph.out[u] {
            if d[u] + w > d[v] {
                d[v] = d[u] + w;
                stack.push(v);
            }
        }
    }
    d
}

struct SpanStrip {
    strip: usize,
    seq: Vec<usize>,
    /// Index into `Window::xs` after which every span pin here is set.
    done_at: usize,
    /// Holes the runs and their separators take at the least: see
    /// `Window::room_bound`.
    fixed: i64,
}

struct Window<'a> {
    p: &'a Problem<'a>,
    strips: Vec<SpanStrip>,
    xs: Vec<usize>,
    /// `gap[i][j]`: x_j - x_i must be at least this, when constrained.
    gap: Vec<Vec<Option<i32>>>,
    down: Vec<i32>,
    least: Vec<i32>,
    /// Strips whose last span pin sits at each index of `xs`.
    finishing: Vec<Vec<usize>>,
}

struct WindowBest {
    cap: i64,
    xs: Vec<i32>,
    los: Vec<Vec<i32>>,
}

/// What `Window::best` is after: `want` fits every free pin, and each `per`
/// short of it costs one more strip. Room below `floor` is of no use.
struct Goal {
    want: i64,
    per: i64,
    floor: i64,
}

impl Goal {
    fn met(&self, cap: i64) -> bool {
        cap >= self.want
    }

    /// After finding `cap`, only room that saves a strip still matters.
    fn raise(&mut self, cap: i64) {
        let short = (self.want - cap).max(0);
        let extra = (short + self.per - 1) / self.per;
        self.floor = self.want - (extra - 1) * self.per;
    }
}

impl<'a> Window<'a> {
    fn new(p: &'a Problem<'a>, l2: &'a Level2) -> Self {
        let mut strips: Vec<SpanStrip> = l2
            .chains
            .iter()
            .filter(|c| c.strip)
            .map(|c| SpanStrip {
                strip: (p.model_strip_of(l2, c.items[0]) - l2.smin) as usize,
                seq: c.seq.clone(),
                done_at: 0,
                fixed: 0,
            })
            .collect();
        // Strip by strip, so each strip's room is known as early as possible.
        let mut xs = Vec::new();
        for ss in &strips {
            let mut own: Vec<usize> = ss
                .seq
                .iter()
                .flat_map(|&g| p.groups[g].span_pins.iter().copied())
                .collect();
            own.sort_by_key(|&x| (l2.graph.dist[l2.x_node[x]], x));
            xs.extend(own);
        }
        let mut gap = vec![vec![None; xs.len()]; xs.len()];
        let mut down = vec![0; xs.len()];
        for (i, &x) in xs.iter().enumerate() {
            let d = longest_from(&l2.graph, l2.x_node[x]);
            down[i] = d.iter().copied().max().unwrap_or(0);
            for (j, &y) in xs.iter().enumerate() {
                if i != j && d[l2.x_node[y]] != i32::MIN {
                    gap[i][j] = Some(d[l2.x_node[y]]);
                }
            }
        }
        let index = |x: usize| xs.iter().position(|&y| y == x).expect("span pin");
        let mut finishing = vec![Vec::new(); xs.len()];
        for (si, ss) in strips.iter_mut().enumerate() {
            let mut used = 0i64;
            let mut last = 0;
            for &g in &ss.seq {
                let grp = &p.groups[g];
                let mut glen = grp.k;
                for &a in &grp.span_pins {
                    last = last.max(index(a));
                    for &b in &grp.span_pins {
                        if let Some(d) = gap[index(a)][index(b)] {
                            glen = glen.max(d + 1);
                        }
                    }
                }
                used += glen as i64;
            }
            ss.fixed = used + ss.seq.len() as i64 - 1;
            ss.done_at = last;
            finishing[last].push(si);
        }
        let least = xs.iter().map(|&x| l2.graph.dist[l2.x_node[x]]).collect();
        Window {
            p,
            strips,
            xs,
            gap,
            down,
            least,
            finishing,
        }
    }

    /// Free-pin room a strip can offer at length `len` whatever its span
    /// pins do: the holes left by runs and separators, halved.
    fn room_bound(ss: &SpanStrip, len: i32) -> i64 {
        (len as i64 - ss.fixed).div_euclid(2)
    }

    fn room_bound_total(&self, len: i32) -> i64 {
        self.strips.iter().map(|ss| Self::room_bound(ss, len)).sum()
    }

    /// Most free-pin room on the span strips within length `len`, or `None`
    /// when nothing reaches `goal.floor`.
    fn best(&self, len: i32, goal: &mut Goal, st: &mut SearchState) -> Option<WindowBest> {
        let mut vals = vec![0; self.xs.len()];
        let mut rooms: Vec<(i64, Vec<i32>)> = vec![(0, Vec::new()); self.strips.len()];
        let mut best: Option<WindowBest> = None;
        self.enumerate(0, len, goal, &mut vals, &mut rooms, &mut best, st);
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        i: usize,
        len: i32,
        goal: &mut Goal,
        vals: &mut Vec<i32>,
        rooms: &mut Vec<(i64, Vec<i32>)>,
        best: &mut Option<WindowBest>,
        st: &mut SearchState,
    ) {
        if st.halted() {
            return;
        }
        if i == self.xs.len() {
            let total: i64 = rooms.iter().map(|r| r.0).sum();
            if total >= goal.floor {
                goal.raise(total);
                *best = Some(WindowBest {
                    cap: total,
                    xs: vals.clone(),
                    los: rooms.iter().map(|r| r.1.clone()).collect(),
                });
            }
            return;
        }
        let mut lo = self.least[i];
        for (j, &x) in vals.iter().enumerate().take(i) {
            if let Some(g) = self.gap[j][i] {
                lo = lo.max(x + g);
            }
        }
        let mut hi = len - 1 - self.down[i];
        for (j, &x) in vals.iter().enumerate().take(i) {
            if let Some(g) = self.gap[i][j] {
                hi = hi.min(x - g);
            }
        }
        'v: for v in lo..=hi {
            vals[i] = v;
            for &si in &self.finishing[i] {
                match self.strip_dp(&self.strips[si], len, vals) {
                    Some(r) => rooms[si] = r,
                    None => continue 'v,
                }
            }
            let reach: i64 = self
                .strips
                .iter()
                .zip(rooms.iter())
                .map(|(ss, r)| {
                    if ss.done_at <= i {
                        r.0
                    } else {
                        Self::room_bound(ss, len)
                    }
                })
                .sum();
            if reach < goal.floor {
                continue;
            }
            self.enumerate(i + 1, len, goal, vals, rooms, best, st);
            if best.as_ref().is_some_and(|b| goal.met(b.cap)) || st.stopped || st.timed_out {
                return;
            }
        }
    }

    /// Run starts on one strip maximising its free-pin room, given span pin
    /// positions.
    fn strip_dp(&self, ss: &SpanStrip, len: i32, vals: &[i32]) -> Option<(i64, Vec<i32>)> {
        let p = self.p;
        let pos_of = |x: usize| vals[self.xs.iter().position(|&y| y == x).expect("span pin")];
        let m = ss.seq.len();
        let width = len as usize;
        const NEG: i64 = i64::MIN / 4;
        // score[i][lo]: best room left of group i's run starting at lo.
        let mut score = vec![vec![NEG; width]; m];
        let mut from = vec![vec![0i32; width]; m];
        let mut glen = vec![0; m];
        for (i, &g) in ss.seq.iter().enumerate() {
            let (min_x, max_x, gl) = Level2::group_extent(p, g, &pos_of);
            glen[i] = gl;
            let (a, b) = if p.groups[g].span_pins.is_empty() {
                (0, len - gl)
            } else {
                (max_x - gl + 1, min_x)
            };
            for lo in a.max(0)..=b.min(len - gl) {
                let val = if i == 0 {
                    Some(((lo / 2) as i64, 0))
                } else {
                    let mut best: Option<(i64, i32)> = None;
                    for plo in 0..width as i32 {
                        let prev = score[i - 1][plo as usize];
                        let gap = lo - (plo + glen[i - 1]);
                        if prev == NEG || gap < 1 {
                            continue;
                        }
                        let v = prev + ((gap - 1) / 2) as i64;
                        if best.is_none_or(|b| v > b.0) {
                            best = Some((v, plo));
                        }
                    }
                    best
                };
                if let Some((v, plo)) = val {
                    score[i][lo as usize] = v;
                    from[i][lo as usize] = plo;
                }
            }
        }
        let mut best: Option<(i64, i32)> = None;
        for lo in 0..width as i32 {
            let s = score[m - 1][lo as usize];
            if s == NEG {
                continue;
            }
            let v = s + ((len - lo - glen[m - 1]) / 2) as i64;
            if best.is_none_or(|b| v > b.0) {
                best = Some((v, lo));
            }
        }
        let (total, mut lo) = best?;
        let mut los = vec![0; m];
        for i in (0..m).rev() {
            los[i] = lo;
            lo = from[i][lo as usize];
        }
        Some((total, los))
    }
}

type WindowPick = (ObjectiveTuple, i32, i32, WindowBest);

impl Level2 {
    /// Exact best window for this order when the least solution leaves too
    /// little room for the free pins.
    fn best_window(&self, p: &Problem<'_>, st: &mut SearchState, least_len: i32) {
        let w = self.width;
        let f = p.fillers.len() as i64;
        let win = Window::new(p, self);
        let mut best: Option<WindowPick> = None;
        for len in least_len.max(1)..=p.max_positions() {
            let tuple_at = |e: i32| {
                ObjectiveTuple::new(
                    self.td,
                    ((w + e) as i64 * len as i64) as u64,
                    (w + e) as u64,
                )
            };
            let wins = |e: i32, st: &SearchState, best: &Option<WindowPick>| {
                let t = tuple_at(e);
                w + e <= p.max_strips() && st.improves(&t) && best.as_ref().is_none_or(|b| t < b.0)
            };
            if !wins(0, st, &best) {
                break;
            }
            let mut e_max = 0;
            while wins(e_max + 1, st, &best) {
                e_max += 1;
            }
            let mut flat: i64 = 0;
            for (s, gs) in self.strips.iter().enumerate() {
                if self.span_strip[s] {
                    continue;
                }
                flat += if gs.is_empty() {
                    ((len + 1) / 2) as i64
                } else {
                    let need: i32 = gs.iter().map(|&g| p.groups[g].k + 1).sum::<i32>() - 1;
                    ((len - need) / 2) as i64
                };
            }
            let per = ((len + 1) / 2) as i64;
            let mut goal = Goal {
                want: f - flat,
                per,
                floor: f - flat - e_max as i64 * per,
            };
            if win.room_bound_total(len) < goal.floor {
                continue;
            }
            let Some(wb) = win.best(len, &mut goal, st) else {
                if st.timed_out {
                    return;
                }
                continue;
            };
            let rem = f - flat - wb.cap;
            let extra = if rem <= 0 {
                0
            } else {
                ((rem + per - 1) / per) as i32
            };
            debug_assert!(extra <= e_max);
            let tuple = tuple_at(extra);
            if best.as_ref().is_none_or(|b| tuple < b.0) {
                best = Some((tuple, len, extra, wb));
            }
        }
        let Some((tuple, len, extra, wb)) = best else {
            return;
        };
        if !st.improves(&tuple) {
            return;
        }
        let mut coords = vec![(0, 0); p.model.pin_count()];
        let mut runs = vec![Vec::new(); self.strips.len()];
        self.pack_flat(p, &mut coords, &mut runs);
        let xs = |x: usize| wb.xs[win.xs.iter().position(|&y| y == x).expect("span pin")];
        for (ss, los) in win.strips.iter().zip(&wb.los) {
            let strip = self.smin + ss.strip as i32;
            for (&g, &lo) in ss.seq.iter().zip(los) {
                let (_, _, glen) = Self::group_extent(p, g, &xs);
                Self::fill_group(p, g, strip, lo, glen, &xs, &mut coords);
                runs[ss.strip].push((lo, lo + glen - 1));
            }
        }
        let placed = Placed { coords, runs, len };
        let found = self.complete(p, placed, extra, tuple);
        st.offer(found);
    }
}
