//! Python bindings. Circuits and layouts cross the boundary as the same JSON
//! documents the command-line tool reads and writes.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use stripforge::{
    circuit_to_json, claimed_extent, emit_asp_facts, finalize, json_to_circuit,
    parse_netlist as parse_kicad, render as draw, verify as check, Circuit, GridConfig, Layout,
    Mode, RenderFormat, RenderOptions, SolveConfig, Theme,
};

fn bad<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn circuit(ir_json: &str) -> PyResult<Circuit> {
    json_to_circuit(ir_json).map_err(bad)
}

/// Parses a KiCad netlist and returns the circuit as IR JSON.
#[pyfunction]
#[pyo3(signature = (text, source_name = "netlist"))]
fn parse_netlist(text: &str, source_name: &str) -> PyResult<String> {
    Ok(circuit_to_json(
        &parse_kicad(text, source_name).map_err(bad)?,
    ))
}

/// Solves, normalizes and derives cuts.
///
/// Returns a dict with `status`, `objective` (a `(td, area, width)` tuple or
/// None), `layout` (layout JSON or None) and `timing` (JSON).
#[pyfunction]
#[pyo3(signature = (ir_json, mode = "two_phase", max_strips = 30, max_positions = 50, time_limit = None, unsigned_span = false))]
fn solve<'py>(
    py: Python<'py>,
    ir_json: &str,
    mode: &str,
    max_strips: u32,
    max_positions: u32,
    time_limit: Option<f64>,
    unsigned_span: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let c = circuit(ir_json)?;
    let mode: Mode = mode.parse().map_err(bad)?;
    let mut config = SolveConfig::new(GridConfig::new(max_strips, max_positions).map_err(bad)?)
        .with_mode(mode)
        .with_unsigned_span(unsigned_span);
    if let Some(t) = time_limit {
        config = config.with_time_limit(t);
    }
    let result = py.detach(|| stripforge::solve(&c, &config)).map_err(bad)?;
    let layout = match &result.layout {
        Some(l) => Some(
            finalize(l, &c, &config.span_rules())
                .map_err(|e| PyRuntimeError::new_err(e.to_string()))?
                .to_json(),
        ),
        None => None,
    };
    let out = PyDict::new(py);
    out.set_item("status", result.status.as_str())?;
    out.set_item(
        "objective",
        result
            .objective
            .map(|t| (t.total_strip_distance, t.board_area, t.board_width)),
    )?;
    out.set_item("layout", layout)?;
    out.set_item("timing", result.timing_json())?;
    Ok(out)
}

/// Runs the four layout checks; returns the report as JSON.
#[pyfunction]
fn verify(ir_json: &str, layout_json: &str) -> PyResult<String> {
    let c = circuit(ir_json)?;
    let l = Layout::from_json(layout_json).map_err(bad)?;
    Ok(check(&c, &l, claimed_extent(&l)).to_json())
}

/// Draws a normalized layout with its own cuts, as `svg` or `ascii`.
#[pyfunction]
#[pyo3(signature = (ir_json, layout_json, format = "svg", theme = "light", cell_size = 24, show_labels = true))]
fn render(
    ir_json: &str,
    layout_json: &str,
    format: &str,
    theme: &str,
    cell_size: u32,
    show_labels: bool,
) -> PyResult<String> {
    let c = circuit(ir_json)?;
    let l = Layout::from_json(layout_json).map_err(bad)?;
    let options = RenderOptions {
        format: format.parse::<RenderFormat>().map_err(bad)?,
        theme: theme.parse::<Theme>().map_err(bad)?,
        cell_size,
        show_labels,
    };
    draw(&l, &c, l.cuts(), &options).map_err(bad)
}

/// ASP facts for the circuit.
#[pyfunction]
fn export_asp(ir_json: &str) -> PyResult<String> {
    emit_asp_facts(&circuit(ir_json)?).map_err(bad)
}

#[pymodule]
#[pyo3(name = "stripforge")]
fn stripforge_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(parse_netlist, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(export_asp, m)?)?;
    Ok(())
}
