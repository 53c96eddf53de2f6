//! One check per acceptance criterion, each printed as a PASS/FAIL line.
//! The oracles here (feasibility, objective arithmetic, copper connectivity)
//! are written from the placement rules directly and share no code with the
//! library's constraint model.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stripforge::{
    brute_force_solve, check_all, claimed_extent, derive_cuts, finalize, json_to_circuit,
    normalize, solve, verify, Circuit, CircuitBuilder, ComponentKind, GridConfig, Layout, Mode,
    PinPlacement, SolveConfig, SpanRules, Status, ViolationKind,
};

const FIXTURES: [&str; 5] = [
    "counter4",
    "guitar_pedal",
    "led_flasher",
    "lrc",
    "opamp_filter",
];

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    root().join("fixtures").join(format!("{name}.net"))
}

fn stripforge(args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stripforge"));
    for (k, _) in std::env::vars() {
        if k.starts_with("STRIPFORGE_") {
            cmd.env_remove(k);
        }
    }
    cmd.args(args).output().unwrap()
}

fn ok(out: &Output, what: &str) {
    assert_eq!(
        out.status.code(),
        Some(0),
        "{what} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

// ---------------------------------------------------------------- oracles

type Pin = (String, u32);
type Coords = HashMap<Pin, (i32, i32)>;

fn coords(layout: &Layout) -> Coords {
    layout
        .placements()
        .iter()
        .map(|p| ((p.reference.clone(), p.pin), (p.strip, p.position)))
        .collect()
}

/// Connectivity group of every pin: its net, or a group of its own.
fn groups(circuit: &Circuit) -> HashMap<(String, u32), usize> {
    let mut g = HashMap::new();
    for (i, net) in circuit.nets().iter().enumerate() {
        for m in &net.members {
            g.insert((m.reference.clone(), m.pin), i);
        }
    }
    let mut next = circuit.nets().len();
    for c in circuit.components() {
        for pin in 1..=c.pin_count {
            g.entry((c.reference.clone(), pin)).or_insert_with(|| {
                next += 1;
                next - 1
            });
        }
    }
    g
}

/// The rule kinds a total placement breaks.
fn naive_violations(
    circuit: &Circuit,
    at: &Coords,
    grid: GridConfig,
    unsigned: bool,
) -> BTreeSet<ViolationKind> {
    let mut v = BTreeSet::new();
    for &(s, p) in at.values() {
        if s < 1 || p < 1 || s > grid.max_strips as i32 || p > grid.max_positions as i32 {
            v.insert(ViolationKind::OutOfBounds);
        }
    }
    for net in circuit.nets() {
        let strips: BTreeSet<i32> = net
            .members
            .iter()
            .map(|m| at[&(m.reference.clone(), m.pin)].0)
            .collect();
        if strips.len() > 1 {
            v.insert(ViolationKind::NetSplit);
        }
    }
    let holes: BTreeSet<(i32, i32)> = at.values().copied().collect();
    if holes.len() < at.len() {
        v.insert(ViolationKind::HoleConflict);
    }
    for c in circuit.components() {
        if c.pin_count < 2 {
            continue;
        }
        let a = at[&(c.reference.clone(), 1)];
        let b = at[&(c.reference.clone(), 2)];
        if a.0 == b.0 {
            v.insert(ViolationKind::SameStripComponent);
        }
        let span = if unsigned {
            (b.1 - a.1).abs()
        } else {
            b.1 - a.1
        };
        if c.kind == ComponentKind::Resistor && span < 3 {
            v.insert(ViolationKind::SpanTooShort);
        }
    }
    // Two groups sharing a strip need a free hole between their extents.
    let g = groups(circuit);
    let mut extent: BTreeMap<(i32, usize), (i32, i32)> = BTreeMap::new();
    for (pin, &(s, p)) in at {
        let e = extent.entry((s, g[pin])).or_insert((p, p));
        e.0 = e.0.min(p);
        e.1 = e.1.max(p);
    }
    let spans: Vec<_> = extent.into_iter().collect();
    for (i, ((sa, _), (lo_a, hi_a))) in spans.iter().enumerate() {
        for ((sb, _), (lo_b, hi_b)) in &spans[i + 1..] {
            if sa == sb && !(hi_a + 1 < *lo_b || hi_b + 1 < *lo_a) {
                v.insert(ViolationKind::SharedStripOverlap);
            }
        }
    }
    v
}

fn naive_feasible(circuit: &Circuit, layout: &Layout, unsigned: bool) -> bool {
    naive_violations(circuit, &coords(layout), layout.grid(), unsigned).is_empty()
}

/// (TD, area, width) straight from the definitions.
fn naive_tuple(circuit: &Circuit, layout: &Layout) -> (u64, u64, u64) {
    let at = coords(layout);
    if at.is_empty() {
        return (0, 0, 0);
    }
    let td: u64 = circuit
        .components()
        .iter()
        .filter(|c| c.pin_count >= 2)
        .map(|c| {
            (at[&(c.reference.clone(), 1)].0 - at[&(c.reference.clone(), 2)].0).unsigned_abs()
                as u64
        })
        .sum();
    let smin = at.values().map(|c| c.0).min().unwrap();
    let smax = at.values().map(|c| c.0).max().unwrap();
    let pmin = at.values().map(|c| c.1).min().unwrap();
    let pmax = at.values().map(|c| c.1).max().unwrap();
    let w = (smax - smin + 1) as u64;
    (td, w * (pmax - pmin + 1) as u64, w)
}

fn tuple3(t: stripforge::ObjectiveTuple) -> (u64, u64, u64) {
    (t.total_strip_distance, t.board_area, t.board_width)
}

/// Pin classes joined by copper: neighbours on a strip with no cut between.
fn copper_classes(layout: &Layout) -> BTreeSet<BTreeSet<(String, u32)>> {
    let mut rows: BTreeMap<i32, Vec<(i32, Pin)>> = BTreeMap::new();
    for p in layout.placements() {
        rows.entry(p.strip)
            .or_default()
            .push((p.position, (p.reference.clone(), p.pin)));
    }
    let mut out = BTreeSet::new();
    for (strip, mut row) in rows {
        row.sort();
        let mut class = BTreeSet::new();
        for i in 0..row.len() {
            if i > 0 {
                let (a, b) = (row[i - 1].0, row[i].0);
                if layout
                    .cuts()
                    .iter()
                    .any(|c| c.strip == strip && a <= c.after_position && c.after_position < b)
                {
                    out.insert(std::mem::take(&mut class));
                }
            }
            class.insert(row[i].1.clone());
        }
        out.insert(class);
    }
    out
}

fn expected_classes(circuit: &Circuit) -> BTreeSet<BTreeSet<(String, u32)>> {
    let mut by_group: BTreeMap<usize, BTreeSet<(String, u32)>> = BTreeMap::new();
    for (pin, g) in groups(circuit) {
        by_group.entry(g).or_default().insert(pin);
    }
    by_group.into_values().collect()
}

// ---------------------------------------------------------------- shared work

struct Solved {
    ir: PathBuf,
    layout_path: PathBuf,
    circuit: Circuit,
    layout: Layout,
    seconds: f64,
}

struct Ctx {
    dir: tempfile::TempDir,
    fixtures: BTreeMap<&'static str, Solved>,
    /// Finalized solver outputs on random circuits, kept for connectivity.
    random: Vec<(Circuit, Layout)>,
}

impl Ctx {
    /// parse -> solve -> (later) verify through the binary, once per fixture.
    fn fixture(&mut self, name: &'static str) -> &Solved {
        if !self.fixtures.contains_key(name) {
            let start = Instant::now();
            let ir = self.dir.path().join(format!("{name}.json"));
            let layout_path = self.dir.path().join(format!("{name}.layout.json"));
            ok(
                &stripforge(&["parse", s(&fixture(name)), "-o", s(&ir)]),
                "parse",
            );
            ok(
                &stripforge(&["solve", s(&ir), "-o", s(&layout_path)]),
                "solve",
            );
            let seconds = start.elapsed().as_secs_f64();
            let circuit = json_to_circuit(&fs::read_to_string(&ir).unwrap()).unwrap();
            let layout = Layout::from_json(&fs::read_to_string(&layout_path).unwrap()).unwrap();
            self.fixtures.insert(
                name,
                Solved {
                    ir,
                    layout_path,
                    circuit,
                    layout,
                    seconds,
                },
            );
        }
        &self.fixtures[name]
    }
}

// ---------------------------------------------------------------- criteria

fn c1_oracle_optimality(_: &mut Ctx) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(20_241);
    let cases = 200;
    let mut feasible = 0;
    for case in 0..cases {
        let circuit = common::random_circuit(&mut rng, 3);
        let grid = common::random_grid(&mut rng, circuit.pin_total(), 2e6);
        let cfg = SolveConfig::new(grid);
        let oracle = brute_force_solve(&circuit, &cfg).unwrap();
        if let Some(l) = &oracle.layout {
            assert!(
                naive_feasible(&circuit, l, false),
                "case {case}: oracle layout infeasible"
            );
            assert_eq!(Some(naive_tuple(&circuit, l)), oracle.objective.map(tuple3));
            feasible += 1;
        }
        for mode in [Mode::TwoPhase, Mode::OnePhase] {
            let got = solve(&circuit, &cfg.clone().with_mode(mode)).unwrap();
            assert_eq!(
                got.objective, oracle.objective,
                "case {case} {mode} on {}x{}",
                grid.max_strips, grid.max_positions
            );
            match &got.layout {
                Some(l) => {
                    assert_eq!(got.status, Status::Optimal);
                    assert!(
                        naive_feasible(&circuit, l, false),
                        "case {case} {mode}: infeasible layout"
                    );
                    assert_eq!(Some(naive_tuple(&circuit, l)), got.objective.map(tuple3));
                }
                None => assert_eq!(got.status, Status::Infeasible),
            }
        }
    }
    format!("{cases} circuits ({feasible} feasible), both modes equal brute force")
}

fn c2_end_to_end(ctx: &mut Ctx) -> String {
    let mut parts = Vec::new();
    for name in FIXTURES {
        let solved = ctx.fixture(name);
        let start = Instant::now();
        let out = stripforge(&["verify", s(&solved.ir), s(&solved.layout_path)]);
        let seconds = solved.seconds + start.elapsed().as_secs_f64();
        ok(&out, &format!("verify {name}"));
        let report = String::from_utf8(out.stdout).unwrap();
        for key in [
            "connectivity_ok",
            "pin_placement_ok",
            "dimensions_ok",
            "feasibility_ok",
            "overall",
        ] {
            assert!(
                report.contains(&format!("\"{key}\": true")),
                "{name}: {report}"
            );
        }
        assert!(seconds <= 120.0, "{name} took {seconds:.1} s");
        parts.push(format!("{name} {seconds:.1}s"));
    }
    parts.join(", ")
}

fn c3_single_resistor(ctx: &mut Ctx) -> String {
    let c = CircuitBuilder::new("r")
        .component("R1", ComponentKind::Resistor, "1k", 2)
        .build()
        .unwrap();
    let cfg = SolveConfig::default();
    assert_eq!((cfg.grid.max_strips, cfg.grid.max_positions), (30, 50));
    for mode in [Mode::TwoPhase, Mode::OnePhase] {
        let r = solve(&c, &cfg.clone().with_mode(mode)).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert_eq!(r.objective.map(tuple3), Some((1, 8, 2)), "{mode}");
        assert_eq!(naive_tuple(&c, r.layout.as_ref().unwrap()), (1, 8, 2));
    }
    // Same answer through the binary, after normalization.
    let ir = ctx.dir.path().join("resistor.json");
    fs::write(&ir, stripforge::circuit_to_json(&c)).unwrap();
    let out = ctx.dir.path().join("resistor.layout.json");
    ok(&stripforge(&["solve", s(&ir), "-o", s(&out)]), "solve");
    let l = Layout::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(naive_tuple(&c, &l), (1, 8, 2));
    // A smaller grid where brute force is affordable agrees.
    let small = SolveConfig::new(GridConfig::new(3, 6).unwrap());
    assert_eq!(
        brute_force_solve(&c, &small).unwrap().objective.map(tuple3),
        Some((1, 8, 2))
    );
    "(1, 8, 2) on 30x50 in both modes".into()
}

fn c4_constraint_soundness(_: &mut Ctx) -> String {
    let circuits: Vec<(Circuit, bool)> = vec![
        (
            CircuitBuilder::new("rc")
                .component("R1", ComponentKind::Resistor, "", 2)
                .component("C1", ComponentKind::Capacitor, "", 2)
                .net("N1", &[("R1", 1), ("C1", 1)])
                .net("N2", &[("R1", 2), ("C1", 2)])
                .build()
                .unwrap(),
            false,
        ),
        (
            CircuitBuilder::new("rr")
                .component("R1", ComponentKind::Resistor, "", 2)
                .component("R2", ComponentKind::Resistor, "", 2)
                .net("N1", &[("R1", 2), ("R2", 1)])
                .build()
                .unwrap(),
            false,
        ),
        (
            CircuitBuilder::new("rr-unsigned")
                .component("R1", ComponentKind::Resistor, "", 2)
                .component("R2", ComponentKind::Resistor, "", 2)
                .net("N1", &[("R1", 1), ("R2", 1)])
                .build()
                .unwrap(),
            true,
        ),
        (
            CircuitBuilder::new("cd")
                .component("C1", ComponentKind::Capacitor, "", 2)
                .component("D1", ComponentKind::Diode, "", 2)
                .build()
                .unwrap(),
            false,
        ),
        (
            CircuitBuilder::new("lc-short")
                .component("L1", ComponentKind::Inductor, "", 2)
                .component("C1", ComponentKind::Capacitor, "", 2)
                .net("N1", &[("L1", 1), ("C1", 1), ("C1", 2)])
                .build()
                .unwrap(),
            false,
        ),
    ];
    let grid = GridConfig::new(4, 6).unwrap();
    let holes: Vec<(i32, i32)> = (1..=4).flat_map(|s| (1..=6).map(move |p| (s, p))).collect();
    let mut total = 0u64;
    let mut feasible = 0u64;
    for (circuit, unsigned) in &circuits {
        let rules = SpanRules::default().with_unsigned(*unsigned);
        let pins: Vec<(String, u32)> = circuit
            .components()
            .iter()
            .flat_map(|c| (1..=c.pin_count).map(move |p| (c.reference.clone(), p)))
            .collect();
        assert_eq!(pins.len(), 4);
        let n = holes.len();
        for code in 0..n.pow(4) {
            let mut k = code;
            let mut at = Coords::new();
            let mut placements = Vec::with_capacity(4);
            for (r, pin) in &pins {
                let (s, p) = holes[k % n];
                k /= n;
                at.insert((r.clone(), *pin), (s, p));
                placements.push(PinPlacement::new(r.clone(), *pin, s, p));
            }
            let layout = Layout::new(grid, placements, Vec::new()).unwrap();
            let want = naive_violations(circuit, &at, grid, *unsigned);
            let got: BTreeSet<ViolationKind> = check_all(circuit, &layout, &rules)
                .into_iter()
                .map(|v| v.kind)
                .collect();
            assert_eq!(
                got.is_empty(),
                want.is_empty(),
                "{}: {at:?}",
                circuit.source_name()
            );
            assert_eq!(got, want, "{}: {at:?}", circuit.source_name());
            total += 1;
            feasible += want.is_empty() as u64;
        }
    }
    format!(
        "{total} assignments over {} circuits, {feasible} feasible, 0 mismatches",
        circuits.len()
    )
}

fn random_case(rng: &mut ChaCha8Rng) -> (Circuit, GridConfig) {
    let circuit = if rng.random_bool(0.5) {
        common::random_circuit(rng, 3)
    } else {
        common::random_mixed_circuit(rng)
    };
    let grid = GridConfig::new(rng.random_range(3..=7), rng.random_range(5..=12)).unwrap();
    (circuit, grid)
}

fn c5_normalization(ctx: &mut Ctx) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(5_005);
    let rules = SpanRules::default();
    let mut checked = 0;
    let mut shrank = 0;
    let check = |circuit: &Circuit, layout: &Layout| -> bool {
        let n = normalize(layout, circuit, &rules).unwrap();
        assert_eq!(normalize(&n, circuit, &rules).unwrap(), n, "not idempotent");
        let (td0, a0, _) = naive_tuple(circuit, layout);
        let (td1, a1, _) = naive_tuple(circuit, &n);
        assert_eq!(td1, td0, "TD changed");
        assert!(a1 <= a0, "area grew {a0} -> {a1}");
        assert!(check_all(circuit, &n, &rules).is_empty());
        assert!(naive_feasible(circuit, &n, false));
        a1 < a0
    };
    while checked < 500 {
        let (circuit, grid) = random_case(&mut rng);
        let r = solve(&circuit, &SolveConfig::new(grid)).unwrap();
        let Some(raw) = r.layout else { continue };
        // The solver's own output, then the same layout spread out.
        check(&circuit, &raw);
        let wide = GridConfig::new(grid.max_strips + 3, grid.max_positions + 5).unwrap();
        let spread = common::stretch(&mut rng, &raw, wide);
        assert!(naive_feasible(&circuit, &spread, false));
        shrank += check(&circuit, &spread) as usize;
        checked += 2;
        ctx.random
            .push((circuit.clone(), finalize(&raw, &circuit, &rules).unwrap()));
    }
    for name in FIXTURES {
        let f = ctx.fixture(name);
        let g = f.layout.grid();
        let bare = f.layout.with_cuts(Vec::new());
        let wide = GridConfig::new(g.max_strips + 4, g.max_positions + 8).unwrap();
        for _ in 0..4 {
            let spread = common::stretch(&mut rng, &bare, wide);
            check(&f.circuit, &spread);
            checked += 1;
        }
    }
    format!("{checked} layouts, {shrank} stretched ones shrank back")
}

fn c6_connectivity(ctx: &mut Ctx) -> String {
    let mut n = 0;
    let mut check = |circuit: &Circuit, layout: &Layout, label: &str| {
        assert_eq!(copper_classes(layout), expected_classes(circuit), "{label}");
        let report = verify(circuit, layout, claimed_extent(layout));
        assert!(report.connectivity_ok, "{label}: {}", report.to_json());
        // Dropping any one cut merges two classes.
        for i in 0..layout.cuts().len() {
            let mut cuts = layout.cuts().to_vec();
            cuts.remove(i);
            let fewer = layout.with_cuts(cuts);
            assert!(
                !verify(circuit, &fewer, claimed_extent(&fewer)).connectivity_ok,
                "{label}: cut {i} redundant"
            );
        }
        n += 1;
    };
    for name in FIXTURES {
        let f = ctx.fixture(name);
        check(&f.circuit, &f.layout, name);
    }
    if ctx.random.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(6_006);
        while ctx.random.len() < 200 {
            let (circuit, grid) = random_case(&mut rng);
            if let Some(l) = solve(&circuit, &SolveConfig::new(grid)).unwrap().layout {
                let f = finalize(&l, &circuit, &SpanRules::default()).unwrap();
                ctx.random.push((circuit, f));
            }
        }
    }
    for (i, (circuit, layout)) in ctx.random.iter().enumerate() {
        assert_eq!(
            layout.cuts(),
            derive_cuts(layout, circuit).unwrap().as_slice()
        );
        check(circuit, layout, &format!("random {i}"));
    }
    format!(
        "{n} layouts (5 fixtures + {} random), exact partition match",
        n - 5
    )
}

fn c7_determinism(ctx: &mut Ctx) -> String {
    for name in FIXTURES {
        let (ir, first) = {
            let f = ctx.fixture(name);
            (f.ir.clone(), f.layout_path.clone())
        };
        let again = ctx.dir.path().join(format!("{name}.again.json"));
        ok(&stripforge(&["solve", s(&ir), "-o", s(&again)]), "solve");
        assert_eq!(
            fs::read(&first).unwrap(),
            fs::read(&again).unwrap(),
            "{name}: layout bytes differ"
        );
        for format in ["svg", "ascii"] {
            let a = stripforge(&["render", s(&ir), s(&first), "--format", format]);
            let b = stripforge(&["render", s(&ir), s(&again), "--format", format]);
            ok(&a, "render");
            assert!(!a.stdout.is_empty());
            assert_eq!(a.stdout, b.stdout, "{name}: {format} differs");
        }
    }
    "5 fixtures: layout JSON, SVG and ASCII byte-identical across runs".into()
}

/// `component(atom, kind, "value").`, `pin(atom, n).` or `circuit_net(atom, n, id).`
fn asp_fact(line: &str) -> Option<(&str, Vec<&str>)> {
    let body = line.strip_suffix(").")?;
    let (pred, args) = body.split_once('(')?;
    let atom = |a: &str| {
        a.starts_with(|c: char| c.is_ascii_lowercase())
            && a.chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
    };
    let int =
        |a: &str| !a.is_empty() && !a.starts_with('0') && a.chars().all(|c| c.is_ascii_digit());
    let args: Vec<&str> = match pred {
        "component" => {
            let (a, rest) = args.split_once(", ")?;
            let (kind, value) = rest.split_once(", ")?;
            let inner = value.strip_prefix('"')?.strip_suffix('"')?;
            let escaped_ok = !inner
                .replace("\\\\", "")
                .replace("\\\"", "")
                .contains(['"', '\\']);
            (atom(a) && atom(kind) && escaped_ok).then(|| vec![a, kind, value])?
        }
        "pin" => {
            let v: Vec<&str> = args.split(", ").collect();
            (v.len() == 2 && atom(v[0]) && int(v[1])).then_some(v)?
        }
        "circuit_net" => {
            let v: Vec<&str> = args.split(", ").collect();
            (v.len() == 3 && atom(v[0]) && int(v[1]) && int(v[2])).then_some(v)?
        }
        _ => return None,
    };
    Some((pred, args))
}

fn c8_asp_golden(ctx: &mut Ctx) -> String {
    let mut facts = 0;
    for name in FIXTURES {
        let golden = root().join("fixtures/golden").join(format!("{name}.lp"));
        let want = fs::read_to_string(&golden).unwrap();
        let out = ctx.dir.path().join(format!("{name}.lp"));
        ok(
            &stripforge(&["export-asp", s(&fixture(name)), "-o", s(&out)]),
            "export-asp",
        );
        let got = fs::read_to_string(&out).unwrap();
        assert_eq!(got, want, "{name}: facts differ from golden");

        let ir = ctx.dir.path().join(format!("{name}.asp.json"));
        ok(
            &stripforge(&["parse", s(&fixture(name)), "-o", s(&ir)]),
            "parse",
        );
        let circuit = json_to_circuit(&fs::read_to_string(&ir).unwrap()).unwrap();
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        let mut ids = BTreeSet::new();
        let mut order = Vec::new();
        for line in got.lines() {
            let (pred, args) =
                asp_fact(line).unwrap_or_else(|| panic!("{name}: bad fact `{line}`"));
            *seen.entry(pred).or_default() += 1;
            order.push(pred);
            if pred == "circuit_net" {
                ids.insert(args[2].parse::<usize>().unwrap());
            }
        }
        let rank = |p: &str| {
            ["component", "pin", "circuit_net"]
                .iter()
                .position(|q| *q == p)
                .unwrap()
        };
        assert!(
            order.windows(2).all(|w| rank(w[0]) <= rank(w[1])),
            "{name}: facts out of order"
        );
        let pins: u32 = circuit.components().iter().map(|c| c.pin_count).sum();
        let members: usize = circuit.nets().iter().map(|n| n.members.len()).sum();
        assert_eq!(
            seen.get("component").copied().unwrap_or(0),
            circuit.components().len()
        );
        assert_eq!(seen.get("pin").copied().unwrap_or(0), pins as usize);
        assert_eq!(seen.get("circuit_net").copied().unwrap_or(0), members);
        assert_eq!(
            ids,
            (1..=circuit.nets().len()).collect(),
            "{name}: net ids not dense"
        );
        facts += got.lines().count();
    }
    format!("5 fixtures, {facts} facts byte-match golden and parse")
}

fn c9_bench(ctx: &mut Ctx) -> String {
    let out = ctx.dir.path().join("bench.csv");
    let dir = root().join("fixtures");
    let o = stripforge(&[
        "bench",
        s(&dir),
        "--modes",
        "two_phase,one_phase",
        "--jobs",
        "2",
        "-o",
        s(&out),
    ]);
    ok(&o, "bench");
    let mut got = csv::Reader::from_path(&out).unwrap();
    let header: Vec<String> = got.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(
        header,
        [
            "name",
            "components",
            "nets",
            "mode",
            "status",
            "td",
            "area",
            "width",
            "board",
            "phase1_s",
            "phase2_s",
            "total_s"
        ]
    );
    let mut golden = csv::Reader::from_path(root().join("fixtures/golden/bench.csv")).unwrap();
    let want: Vec<Vec<String>> = golden
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect();
    let rows: Vec<csv::StringRecord> = got.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), want.len());
    for (row, want) in rows.iter().zip(&want) {
        let structural: Vec<String> = row.iter().take(9).map(str::to_string).collect();
        assert_eq!(&structural, want);
        for t in row.iter().skip(9) {
            let secs: f64 = t.parse().unwrap();
            assert!(secs >= 0.0 && secs.is_finite());
        }
    }
    format!("{} rows, structural columns match golden", rows.len())
}

#[test]
fn acceptance() {
    type Criterion = fn(&mut Ctx) -> String;
    let criteria: [(&str, Criterion); 9] = [
        ("oracle optimality", c1_oracle_optimality),
        ("end-to-end verification", c2_end_to_end),
        ("single-resistor closed form", c3_single_resistor),
        ("constraint soundness", c4_constraint_soundness),
        ("normalization properties", c5_normalization),
        ("connectivity reconstruction", c6_connectivity),
        ("determinism", c7_determinism),
        ("ASP export golden", c8_asp_golden),
        ("bench harness", c9_bench),
    ];
    let mut ctx = Ctx {
        dir: tempfile::tempdir().unwrap(),
        fixtures: BTreeMap::new(),
        random: Vec::new(),
    };
    let mut failed = Vec::new();
    // Written straight to stderr so the lines show without --nocapture.
    let mut err = std::io::stderr();
    for (i, (title, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| check(&mut ctx)));
        let took = start.elapsed().as_secs_f64();
        let line = match &result {
            Ok(detail) => format!("criterion {} PASS {title}: {detail} [{took:.1}s]", i + 1),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                failed.push(i + 1);
                format!("criterion {} FAIL {title}: {msg}", i + 1)
            }
        };
        writeln!(err, "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
