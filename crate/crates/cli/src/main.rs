//! `stripforge`: parse netlists, solve, verify, render and benchmark.
//!
//! Exit codes: 0 ok, 1 verification failed, 2 bad input, 3 infeasible,
//! 4 timeout, 5 internal error (including a mode mismatch in `bench`).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use stripforge::{
    circuit_to_json, claimed_extent, emit_asp_facts, finalize, json_to_circuit, parse_netlist,
    render, verify, Circuit, GridConfig, Layout, Mode, ObjectiveTuple, RenderFormat, RenderOptions,
    SolveConfig, SolveResult, Status, Theme,
};

const OK: u8 = 0;
const VERIFY_FAILED: u8 = 1;
const BAD_INPUT: u8 = 2;
const INFEASIBLE: u8 = 3;
const TIMEOUT: u8 = 4;
const INTERNAL: u8 = 5;

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

#[derive(Parser)]
#[command(name = "stripforge", version, about = "Stripboard layout synthesis")]
struct Cli {
    /// TOML file with defaults for grid, mode, time_limit, unsigned_span,
    /// format, cell_size, theme and labels.
    #[arg(long, global = true, env = "STRIPFORGE_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a KiCad netlist into circuit JSON.
    Parse {
        netlist: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Find an optimal layout, normalize it and derive strip cuts.
    Solve {
        /// Circuit JSON or a KiCad netlist.
        input: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Also write the timing record here.
        #[arg(long)]
        timing: Option<PathBuf>,
    },
    /// Run the four layout checks and print the report.
    Verify { circuit: PathBuf, layout: PathBuf },
    /// Draw a layout as SVG or ASCII.
    Render {
        circuit: PathBuf,
        layout: PathBuf,
        #[command(flatten)]
        render: RenderArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write the circuit as ASP facts.
    ExportAsp {
        circuit: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Solve every netlist in a directory under each mode and write a CSV.
    Bench {
        dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "two_phase,one_phase")]
        modes: Vec<Mode>,
        #[command(flatten)]
        solve: SolveArgs,
        /// Fixtures solved in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Search mode: two_phase or one_phase.
    #[arg(long, env = "STRIPFORGE_MODE")]
    mode: Option<Mode>,
    /// Grid as STRIPSxPOSITIONS, e.g. 30x50.
    #[arg(long, env = "STRIPFORGE_GRID")]
    grid: Option<Grid>,
    /// Seconds before giving up with the best layout so far.
    #[arg(long, env = "STRIPFORGE_TIME_LIMIT")]
    time_limit: Option<f64>,
    /// Let resistors span in either direction.
    #[arg(long, env = "STRIPFORGE_UNSIGNED_SPAN", num_args = 0..=1, default_missing_value = "true")]
    unsigned_span: Option<bool>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, env = "STRIPFORGE_FORMAT")]
    format: Option<RenderFormat>,
    #[arg(long, env = "STRIPFORGE_CELL_SIZE")]
    cell_size: Option<u32>,
    #[arg(long, env = "STRIPFORGE_THEME")]
    theme: Option<Theme>,
    #[arg(long, env = "STRIPFORGE_LABELS")]
    labels: Option<bool>,
    #[arg(long, conflicts_with = "labels")]
    no_labels: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Grid(GridConfig);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("grid `{s}` is not STRIPSxPOSITIONS"))?;
        let strips: u32 = a
            .trim()
            .parse()
            .map_err(|_| format!("bad strip count `{a}`"))?;
        let positions: u32 = b
            .trim()
            .parse()
            .map_err(|_| format!("bad position count `{b}`"))?;
        GridConfig::new(strips, positions)
            .map(Grid)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    grid: Option<String>,
    mode: Option<String>,
    time_limit: Option<f64>,
    unsigned_span: Option<bool>,
    format: Option<String>,
    cell_size: Option<u32>,
    theme: Option<String>,
    labels: Option<bool>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = read(path)?;
    toml::from_str(&text).map_err(|e| fail(BAD_INPUT, format!("{}: {e}", path.display())))
}

fn from_file<T: FromStr>(value: &Option<String>, key: &str) -> Result<Option<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    value
        .as_deref()
        .map(|v| {
            v.parse()
                .map_err(|e| fail(BAD_INPUT, format!("config `{key}`: {e}")))
        })
        .transpose()
}

impl SolveArgs {
    fn resolve(&self, file: &FileConfig) -> Result<SolveConfig, Failure> {
        let grid = match self.grid {
            Some(g) => g,
            None => from_file::<Grid>(&file.grid, "grid")?.unwrap_or(Grid(GridConfig::default())),
        };
        let mode = match self.mode {
            Some(m) => m,
            None => from_file::<Mode>(&file.mode, "mode")?.unwrap_or_default(),
        };
        let mut config = SolveConfig::new(grid.0)
            .with_mode(mode)
            .with_unsigned_span(self.unsigned_span.or(file.unsigned_span).unwrap_or(false));
        if let Some(t) = self.time_limit.or(file.time_limit) {
            config = config.with_time_limit(t);
        }
        config
            .validate()
            .map_err(|e| fail(BAD_INPUT, e.to_string()))?;
        Ok(config)
    }
}

impl RenderArgs {
    fn resolve(&self, file: &FileConfig) -> Result<RenderOptions, Failure> {
        let defaults = RenderOptions::default();
        let format = match self.format {
            Some(f) => f,
            None => from_file(&file.format, "format")?.unwrap_or(defaults.format),
        };
        let theme = match self.theme {
            Some(t) => t,
            None => from_file(&file.theme, "theme")?.unwrap_or(defaults.theme),
        };
        let show_labels = if self.no_labels {
            false
        } else {
            self.labels.or(file.labels).unwrap_or(defaults.show_labels)
        };
        let cell_size = self
            .cell_size
            .or(file.cell_size)
            .unwrap_or(defaults.cell_size);
        if cell_size == 0 {
            return Err(fail(BAD_INPUT, "cell size must be positive"));
        }
        Ok(RenderOptions {
            format,
            cell_size,
            show_labels,
            theme,
        })
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(BAD_INPUT, format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| fail(INTERNAL, format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| fail(INTERNAL, format!("stdout: {e}"))),
    }
}

fn with_newline(mut s: String) -> String {
    if !s.is_empty() && !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

/// Circuit JSON, or a netlist when the file starts with `(`.
fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    let text = read(path)?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("netlist");
    let parsed = if text.trim_start().starts_with('(') {
        parse_netlist(&text, name).map_err(|e| e.to_string())
    } else {
        json_to_circuit(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| fail(BAD_INPUT, format!("{}: {e}", path.display())))
}

fn load_layout(path: &Path) -> Result<Layout, Failure> {
    Layout::from_json(&read(path)?).map_err(|e| fail(BAD_INPUT, format!("{}: {e}", path.display())))
}

struct Solved {
    result: SolveResult,
    layout: Option<Layout>,
}

fn solve_one(circuit: &Circuit, config: &SolveConfig) -> Result<Solved, Failure> {
    let result = stripforge::solve(circuit, config).map_err(|e| fail(BAD_INPUT, e.to_string()))?;
    let layout = match &result.layout {
        Some(l) => Some(
            finalize(l, circuit, &config.span_rules())
                .map_err(|e| fail(INTERNAL, e.to_string()))?,
        ),
        None => None,
    };
    Ok(Solved { result, layout })
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Optimal | Status::FeasibleOnly => OK,
        Status::Infeasible => INFEASIBLE,
        Status::Timeout => TIMEOUT,
    }
}

fn cmd_solve(
    input: &Path,
    config: &SolveConfig,
    out: Option<&Path>,
    timing: Option<&Path>,
) -> Outcome {
    let circuit = load_circuit(input)?;
    let solved = solve_one(&circuit, config)?;
    let record = solved.result.timing_json();
    eprintln!("{record}");
    if let Some(t) = timing {
        fs::write(t, with_newline(record))
            .map_err(|e| fail(INTERNAL, format!("{}: {e}", t.display())))?;
    }
    match &solved.layout {
        Some(layout) => write_out(out, &with_newline(layout.to_json()))?,
        None => {
            let why = solved
                .result
                .note
                .as_deref()
                .unwrap_or("no layout fits the grid");
            eprintln!("{}: {why}", solved.result.status);
        }
    }
    Ok(status_code(solved.result.status))
}

fn cmd_verify(circuit: &Path, layout: &Path) -> Outcome {
    let circuit = load_circuit(circuit)?;
    let layout = load_layout(layout)?;
    let report = verify(&circuit, &layout, claimed_extent(&layout));
    println!("{}", report.to_json());
    Ok(if report.overall { OK } else { VERIFY_FAILED })
}

fn cmd_render(
    circuit: &Path,
    layout: &Path,
    options: &RenderOptions,
    out: Option<&Path>,
) -> Outcome {
    let circuit = load_circuit(circuit)?;
    let layout = load_layout(layout)?;
    let text = render(&layout, &circuit, layout.cuts(), options)
        .map_err(|e| fail(BAD_INPUT, e.to_string()))?;
    write_out(out, &text)?;
    Ok(OK)
}

const BENCH_HEADER: [&str; 12] = [
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
    "total_s",
];

fn bench_row(name: &str, circuit: &Circuit, mode: Mode, solved: &Solved) -> [String; 12] {
    let t = solved.result.objective;
    let field =
        |f: fn(&ObjectiveTuple) -> u64| t.as_ref().map(|t| f(t).to_string()).unwrap_or_default();
    let board = match &solved.layout {
        Some(l) => format!("{}x{}", l.grid().max_strips, l.grid().max_positions),
        None => String::new(),
    };
    let r = &solved.result;
    [
        name.to_string(),
        circuit.components().len().to_string(),
        circuit.nets().len().to_string(),
        mode.as_str().to_string(),
        r.status.as_str().to_string(),
        field(|t| t.total_strip_distance),
        field(|t| t.board_area),
        field(|t| t.board_width),
        board,
        format!("{:.3}", r.phase1_time),
        format!("{:.3}", r.phase2_time),
        format!("{:.3}", r.total_time),
    ]
}

fn bench_inputs(dir: &Path) -> Result<Vec<(String, PathBuf)>, Failure> {
    let entries =
        fs::read_dir(dir).map_err(|e| fail(BAD_INPUT, format!("{}: {e}", dir.display())))?;
    let mut inputs = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| fail(BAD_INPUT, e.to_string()))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "net" || e == "json") {
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            inputs.push((name, path));
        }
    }
    inputs.sort();
    Ok(inputs)
}

fn cmd_bench(
    dir: &Path,
    modes: &[Mode],
    base: &SolveConfig,
    jobs: usize,
    out: Option<&Path>,
) -> Outcome {
    let inputs = bench_inputs(dir)?;
    let circuits = inputs
        .iter()
        .map(|(name, path)| Ok((name.clone(), load_circuit(path)?)))
        .collect::<Result<Vec<_>, Failure>>()?;

    let tasks: Vec<(usize, Mode)> = (0..circuits.len())
        .flat_map(|i| modes.iter().map(move |&m| (i, m)))
        .collect();
    let results: Mutex<Vec<Option<Result<Solved, Failure>>>> =
        Mutex::new((0..tasks.len()).map(|_| None).collect());
    let next = Mutex::new(0usize);
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(tasks.len().max(1)) {
            scope.spawn(|| loop {
                let k = {
                    let mut n = next.lock().unwrap();
                    let k = *n;
                    *n += 1;
                    k
                };
                let Some(&(i, mode)) = tasks.get(k) else {
                    break;
                };
                let config = base.clone().with_mode(mode);
                let solved = solve_one(&circuits[i].1, &config);
                results.lock().unwrap()[k] = Some(solved);
            });
        }
    });

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(BENCH_HEADER)
        .map_err(|e| fail(INTERNAL, e.to_string()))?;
    let mut code = OK;
    let mut optimal: Vec<Option<(Mode, ObjectiveTuple)>> = vec![None; circuits.len()];
    for (k, solved) in results.into_inner().unwrap().into_iter().enumerate() {
        let (i, mode) = tasks[k];
        let (name, circuit) = &circuits[i];
        let solved = solved.expect("every task ran")?;
        writer
            .write_record(bench_row(name, circuit, mode, &solved))
            .map_err(|e| fail(INTERNAL, e.to_string()))?;
        if solved.result.status == Status::Optimal {
            let t = solved
                .result
                .objective
                .expect("optimal results carry a tuple");
            match optimal[i] {
                Some((m, prev)) if prev != t => {
                    eprintln!("{name}: {m} found {prev} but {mode} found {t}");
                    code = INTERNAL;
                }
                Some(_) => {}
                None => optimal[i] = Some((mode, t)),
            }
        }
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| fail(INTERNAL, e.to_string()))?;
    write_out(out, &String::from_utf8(bytes).expect("csv output is UTF-8"))?;
    Ok(code)
}

fn run(cli: Cli) -> Outcome {
    let file = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Parse { netlist, out } => {
            let text = read(&netlist)?;
            let name = netlist
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("netlist");
            let circuit = parse_netlist(&text, name)
                .map_err(|e| fail(BAD_INPUT, format!("{}:{e}", netlist.display())))?;
            write_out(out.as_deref(), &with_newline(circuit_to_json(&circuit)))?;
            Ok(OK)
        }
        Command::Solve {
            input,
            solve,
            out,
            timing,
        } => cmd_solve(
            &input,
            &solve.resolve(&file)?,
            out.as_deref(),
            timing.as_deref(),
        ),
        Command::Verify { circuit, layout } => cmd_verify(&circuit, &layout),
        Command::Render {
            circuit,
            layout,
            render,
            out,
        } => cmd_render(&circuit, &layout, &render.resolve(&file)?, out.as_deref()),
        Command::ExportAsp { circuit, out } => {
            let circuit = load_circuit(&circuit)?;
            let facts = emit_asp_facts(&circuit).map_err(|e| fail(BAD_INPUT, e.to_string()))?;
            write_out(out.as_deref(), &facts)?;
            Ok(OK)
        }
        Command::Bench {
            dir,
            modes,
            solve,
            jobs,
            out,
        } => cmd_bench(&dir, &modes, &solve.resolve(&file)?, jobs, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { BAD_INPUT } else { OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("stripforge: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
