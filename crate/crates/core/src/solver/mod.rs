//! Two-phase exact placement: a first feasible layout, then lexicographic
//! branch-and-bound on `(strip distance, area, width)`.

mod brute;
mod search;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::circuit::Circuit;
use crate::constraints::{CheckModel, SpanRules};
use crate::error::SolveError;
use crate::layout::{objective_tuple, GridConfig, Layout, ObjectiveTuple, PinPlacement};

pub use brute::{brute_force_solve, canonical_assignments, BRUTE_FORCE_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    TwoPhase,
    OnePhase,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::TwoPhase => "two_phase",
            Mode::OnePhase => "one_phase",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "two_phase" | "two-phase" => Ok(Mode::TwoPhase),
            "one_phase" | "one-phase" => Ok(Mode::OnePhase),
            other => Err(format!(
                "unknown mode `{other}` (expected two_phase or one_phase)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    FeasibleOnly,
    Infeasible,
    Timeout,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::FeasibleOnly => "feasible_only",
            Status::Infeasible => "infeasible",
            Status::Timeout => "timeout",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub grid: GridConfig,
    pub mode: Mode,
    /// Seconds; `None` means no limit.
    pub time_limit: Option<f64>,
    pub unsigned_span: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            grid: GridConfig::default(),
            mode: Mode::TwoPhase,
            time_limit: None,
            unsigned_span: false,
        }
    }
}

impl SolveConfig {
    pub fn new(grid: GridConfig) -> Self {
        SolveConfig {
            grid,
            ..SolveConfig::default()
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit = Some(seconds);
        self
    }

    pub fn with_unsigned_span(mut self, unsigned: bool) -> Self {
        self.unsigned_span = unsigned;
        self
    }

    pub fn span_rules(&self) -> SpanRules {
        SpanRules::default().with_unsigned(self.unsigned_span)
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        match self.time_limit {
            Some(t) if !(t > 0.0 && t.is_finite()) => Err(SolveError::InvalidTimeLimit),
            _ => Ok(()),
        }
    }

    fn deadline(&self, start: Instant) -> Option<Instant> {
        self.time_limit.map(|t| start + Duration::from_secs_f64(t))
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub layout: Option<Layout>,
    pub objective: Option<ObjectiveTuple>,
    pub status: Status,
    pub phase1_time: f64,
    pub phase2_time: f64,
    pub total_time: f64,
    /// Why the result is infeasible, when that is known up front.
    pub note: Option<String>,
    /// Objective of each new incumbent, in the order found.
    pub trace: Vec<ObjectiveTuple>,
    /// Search nodes visited.
    pub nodes: u64,
}

#[derive(Serialize)]
struct TimingRecord {
    phase1_s: f64,
    phase2_s: f64,
    status: Status,
    total_s: f64,
}

impl SolveResult {
    fn empty(status: Status) -> Self {
        SolveResult {
            layout: None,
            objective: None,
            status,
            phase1_time: 0.0,
            phase2_time: 0.0,
            total_time: 0.0,
            note: None,
            trace: Vec::new(),
            nodes: 0,
        }
    }

    /// `{"phase1_s": .., "phase2_s": .., "status": .., "total_s": ..}`
    pub fn timing_json(&self) -> String {
        serde_json::to_string(&TimingRecord {
            phase1_s: self.phase1_time,
            phase2_s: self.phase2_time,
            status: self.status,
            total_s: self.total_time,
        })
        .expect("timing serialization cannot fail")
    }
}

fn to_layout(circuit: &Circuit, grid: GridConfig, coords: &[(i32, i32)]) -> Layout {
    let placements = circuit
        .pins()
        .zip(coords)
        .map(|(id, &(s, p))| {
            PinPlacement::new(
                circuit.components()[id.component].reference.clone(),
                id.pin,
                s,
                p,
            )
        })
        .collect();
    Layout::new(grid, placements, Vec::new()).expect("one placement per pin")
}

fn empty_layout(grid: GridConfig, status: Status) -> SolveResult {
    SolveResult {
        layout: Some(Layout::empty(grid)),
        objective: Some(ObjectiveTuple::new(0, 0, 0)),
        ..SolveResult::empty(status)
    }
}

struct Run {
    found: Option<search::Found>,
    trace: Vec<ObjectiveTuple>,
    timed_out: bool,
    nodes: u64,
    note: Option<String>,
}

fn search(
    circuit: &Circuit,
    config: &SolveConfig,
    deadline: Option<Instant>,
    first_only: bool,
    incumbent: Option<search::Found>,
) -> Run {
    let model = CheckModel::new(circuit, &config.span_rules());
    let problem = match search::Problem::new(&model, circuit, config.grid) {
        Ok(p) => p,
        Err(note) => {
            return Run {
                found: None,
                trace: Vec::new(),
                timed_out: false,
                nodes: 0,
                note: Some(note),
            }
        }
    };
    let mut st = search::SearchState::new(deadline, first_only, incumbent);
    search::run(&problem, &mut st);
    if let Some(f) = &st.incumbent {
        debug_assert!(
            model.check_all(&f.coords, config.grid).is_empty(),
            "search produced an infeasible layout"
        );
    }
    Run {
        found: st.incumbent,
        trace: st.trace,
        timed_out: st.timed_out,
        nodes: st.nodes,
        note: None,
    }
}

fn finish(circuit: &Circuit, config: &SolveConfig, run: Run, done: Status) -> SolveResult {
    let status = match (&run.found, run.timed_out) {
        (_, true) => Status::Timeout,
        (Some(_), false) => done,
        (None, false) => Status::Infeasible,
    };
    let (layout, objective) = match run.found {
        Some(f) => {
            let layout = to_layout(circuit, config.grid, &f.coords);
            debug_assert_eq!(objective_tuple(&layout, circuit), f.tuple);
            (Some(layout), Some(f.tuple))
        }
        None => (None, None),
    };
    SolveResult {
        layout,
        objective,
        status,
        note: run.note,
        trace: run.trace,
        nodes: run.nodes,
        ..SolveResult::empty(status)
    }
}

fn phase1_at(circuit: &Circuit, config: &SolveConfig, deadline: Option<Instant>) -> SolveResult {
    let start = Instant::now();
    if circuit.components().is_empty() {
        return empty_layout(config.grid, Status::FeasibleOnly);
    }
    let run = search(circuit, config, deadline, true, None);
    let mut r = finish(circuit, config, run, Status::FeasibleOnly);
    r.phase1_time = start.elapsed().as_secs_f64();
    r.total_time = r.phase1_time;
    r
}

fn phase2_at(
    circuit: &Circuit,
    config: &SolveConfig,
    incumbent: Option<&Layout>,
    deadline: Option<Instant>,
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    if circuit.components().is_empty() {
        return Ok(empty_layout(config.grid, Status::Optimal));
    }
    let seed = match incumbent {
        Some(layout) => {
            let coords = layout
                .pin_coords(circuit)
                .map_err(|e| SolveError::InvalidIncumbent(e.to_string()))?;
            let model = CheckModel::new(circuit, &config.span_rules());
            let violations = model.check_all(&coords, config.grid);
            if let Some(v) = violations.first() {
                return Err(SolveError::InvalidIncumbent(v.message.clone()));
            }
            let min_s = coords.iter().map(|c| c.0).min().unwrap_or(1);
            let min_p = coords.iter().map(|c| c.1).min().unwrap_or(1);
            Some(search::Found {
                tuple: objective_tuple(layout, circuit),
                coords: coords
                    .iter()
                    .map(|&(s, p)| (s - min_s + 1, p - min_p + 1))
                    .collect(),
            })
        }
        None => None,
    };
    let run = search(circuit, config, deadline, false, seed);
    let mut r = finish(circuit, config, run, Status::Optimal);
    r.phase2_time = start.elapsed().as_secs_f64();
    r.total_time = r.phase2_time;
    Ok(r)
}

/// First feasible layout, in search order.
pub fn solve_phase1(circuit: &Circuit, config: &SolveConfig) -> Result<SolveResult, SolveError> {
    config.validate()?;
    Ok(phase1_at(circuit, config, config.deadline(Instant::now())))
}

/// Lexicographically optimal layout, using `incumbent` as the initial bound.
pub fn solve_phase2(
    circuit: &Circuit,
    config: &SolveConfig,
    incumbent: &Layout,
) -> Result<SolveResult, SolveError> {
    config.validate()?;
    phase2_at(
        circuit,
        config,
        Some(incumbent),
        config.deadline(Instant::now()),
    )
}

/// Runs the configured mode. Both modes reach the same optimal objective.
pub fn solve(circuit: &Circuit, config: &SolveConfig) -> Result<SolveResult, SolveError> {
    config.validate()?;
    let start = Instant::now();
    let deadline = config.deadline(start);
    let mut result = match config.mode {
        Mode::OnePhase => {
            let mut r = phase2_at(circuit, config, None, deadline)?;
            r.phase2_time = 0.0;
            r.phase1_time = 0.0;
            r
        }
        Mode::TwoPhase => {
            let p1 = phase1_at(circuit, config, deadline);
            if p1.status != Status::FeasibleOnly {
                let mut r = p1;
                r.phase1_time = start.elapsed().as_secs_f64();
                r.total_time = r.phase1_time;
                return Ok(r);
            }
            let mut p2 = phase2_at(circuit, config, p1.layout.as_ref(), deadline)?;
            p2.phase1_time = p1.phase1_time;
            p2.nodes += p1.nodes;
            p2
        }
    };
    result.total_time = start.elapsed().as_secs_f64();
    Ok(result)
}
