//! Random small circuits shared by the oracle tests.
#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;
use stripforge::{
    canonical_assignments, CheckModel, Circuit, CircuitBuilder, ComponentKind, GridConfig, Layout,
    PinPlacement, Propagator, SpanRules,
};

const KINDS: [(ComponentKind, &str); 5] = [
    (ComponentKind::Resistor, "R"),
    (ComponentKind::Capacitor, "C"),
    (ComponentKind::Diode, "D"),
    (ComponentKind::Inductor, "L"),
    (ComponentKind::Other, "SW"),
];

/// 1-3 two-pin components and 0-4 nets over their pins.
pub fn random_circuit<R: Rng>(rng: &mut R, max_components: usize) -> Circuit {
    let m = rng.random_range(1..=max_components);
    let nets = rng.random_range(0..=4usize);
    let mut b = CircuitBuilder::new("random");
    let mut pins = Vec::new();
    for i in 0..m {
        let &(kind, prefix) = KINDS.choose(rng).unwrap();
        let reference = format!("{prefix}{}", i + 1);
        b = b.component(&reference, kind, "", 2);
        pins.push((reference.clone(), 1));
        pins.push((reference, 2));
    }
    let mut members: Vec<Vec<(String, u32)>> = vec![Vec::new(); nets];
    if nets > 0 {
        for pin in &pins {
            // About one pin in four stays unconnected.
            if rng.random_range(0..4) > 0 {
                members[rng.random_range(0..nets)].push(pin.clone());
            }
        }
    }
    for (i, ms) in members.iter().filter(|ms| !ms.is_empty()).enumerate() {
        let refs: Vec<(&str, u32)> = ms.iter().map(|(r, p)| (r.as_str(), *p)).collect();
        b = b.net(&format!("N{}", i + 1), &refs);
    }
    b.build().unwrap()
}

/// Largest grid, at most 5x8, whose canonical assignment count stays under
/// `budget`, picked at random among those.
pub fn random_grid<R: Rng>(rng: &mut R, pins: usize, budget: f64) -> GridConfig {
    let mut options = Vec::new();
    for s in 1..=5u32 {
        for p in 1..=8u32 {
            if canonical_assignments(pins, s, p) <= budget && s * p >= pins as u32 {
                options.push((s, p));
            }
        }
    }
    // Prefer the roomier grids, which admit more feasible layouts.
    options.sort_by_key(|&(s, p)| std::cmp::Reverse(s * p));
    options.truncate(4);
    let &(s, p) = options.choose(rng).expect("some grid fits the budget");
    GridConfig::new(s, p).unwrap()
}

/// Like [`random_circuit`], but some parts have three or four pins, so pins
/// outside every net and outside pins 1/2 turn up.
pub fn random_mixed_circuit<R: Rng>(rng: &mut R) -> Circuit {
    let m = rng.random_range(1..=2usize);
    let mut b = CircuitBuilder::new("mixed");
    let mut pins = Vec::new();
    for i in 0..m {
        let (kind, prefix, count) = match rng.random_range(0..4) {
            0 => (ComponentKind::Transistor, "Q", 3),
            1 => (ComponentKind::Ic, "U", 4),
            2 => (ComponentKind::Resistor, "R", 2),
            _ => (ComponentKind::Connector, "J", rng.random_range(1..=3)),
        };
        let reference = format!("{prefix}{}", i + 1);
        b = b.component(&reference, kind, "", count);
        for pin in 1..=count {
            pins.push((reference.clone(), pin));
        }
    }
    let nets = rng.random_range(0..=3usize);
    let mut members: Vec<Vec<(String, u32)>> = vec![Vec::new(); nets];
    if nets > 0 {
        for pin in &pins {
            if rng.random_range(0..3) > 0 {
                members[rng.random_range(0..nets)].push(pin.clone());
            }
        }
    }
    for (i, ms) in members.iter().filter(|ms| !ms.is_empty()).enumerate() {
        let refs: Vec<(&str, u32)> = ms.iter().map(|(r, p)| (r.as_str(), *p)).collect();
        b = b.net(&format!("N{}", i + 1), &refs);
    }
    b.build().unwrap()
}

/// A random feasible layout built pin by pin through the propagator,
/// restarting on dead ends. `None` if `tries` attempts all dead-end.
pub fn random_feasible_layout<R: Rng>(
    rng: &mut R,
    circuit: &Circuit,
    grid: GridConfig,
    rules: &SpanRules,
    tries: usize,
) -> Option<Layout> {
    let model = CheckModel::new(circuit, rules);
    'attempt: for _ in 0..tries {
        let mut prop = Propagator::new(&model, grid);
        for pin in 0..model.pin_count() {
            let cands = prop.candidates(pin);
            let Some(&(s, p)) = cands.choose(rng) else {
                continue 'attempt;
            };
            prop.place(pin, s, p).unwrap();
        }
        let coords = prop.coords().unwrap();
        let placements = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| model.placement(i, c))
            .collect();
        return Some(Layout::new(grid, placements, Vec::new()).unwrap());
    }
    None
}

/// Inserts random empty strips and columns and shifts the whole layout,
/// staying inside `grid`. Feasibility survives: gaps only widen.
pub fn stretch<R: Rng>(rng: &mut R, layout: &Layout, grid: GridConfig) -> Layout {
    let Some(e) = layout.placements().iter().map(|p| p.strip).max() else {
        return layout.with_grid(grid);
    };
    let max_p = layout
        .placements()
        .iter()
        .map(|p| p.position)
        .max()
        .unwrap();
    let mut strip_map = Vec::new();
    let mut at = rng.random_range(0..3);
    for _ in 1..=e {
        at += 1 + rng.random_range(0..2) * rng.random_range(0..3);
        strip_map.push(at);
    }
    let mut pos_map = Vec::new();
    let mut at = rng.random_range(0..3);
    for _ in 1..=max_p {
        at += 1 + rng.random_range(0..2) * rng.random_range(0..3);
        pos_map.push(at);
    }
    if strip_map[strip_map.len() - 1] > grid.max_strips as i32
        || pos_map[pos_map.len() - 1] > grid.max_positions as i32
    {
        return layout.with_grid(grid);
    }
    let placements = layout
        .placements()
        .iter()
        .map(|p| {
            PinPlacement::new(
                p.reference.clone(),
                p.pin,
                strip_map[p.strip as usize - 1],
                pos_map[p.position as usize - 1],
            )
        })
        .collect();
    Layout::new(grid, placements, Vec::new()).unwrap()
}
