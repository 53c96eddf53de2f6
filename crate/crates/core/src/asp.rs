//! ASP fact export (`component/3`, `pin/2`, `circuit_net/3`).

use std::collections::HashMap;
use std::fmt::Write;

use crate::circuit::Circuit;
use crate::error::AspError;

/// Lowercases a reference and replaces anything outside `[a-z0-9_]` by `_`.
pub fn mangle_atom(reference: &str) -> String {
    reference
        .chars()
        .map(|c| {
            let c = c.to_ascii_lowercase();
            if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn quote(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

/// Atom for every component, in component order.
pub fn component_atoms(circuit: &Circuit) -> Result<Vec<String>, AspError> {
    let mut seen: HashMap<String, &str> = HashMap::new();
    let mut atoms = Vec::with_capacity(circuit.components().len());
    for c in circuit.components() {
        let atom = mangle_atom(&c.reference);
        if !atom.starts_with(|ch: char| ch.is_ascii_lowercase()) {
            return Err(AspError::InvalidAtom {
                reference: c.reference.clone(),
                atom,
            });
        }
        if let Some(first) = seen.insert(atom.clone(), &c.reference) {
            return Err(AspError::AtomCollision {
                first: first.to_string(),
                second: c.reference.clone(),
                atom,
            });
        }
        atoms.push(atom);
    }
    Ok(atoms)
}

/// Emits one fact per line: all `component/3` facts, then `pin/2` facts
/// (pins ascending), then `circuit_net/3` facts with the dense network id.
pub fn emit_asp_facts(circuit: &Circuit) -> Result<String, AspError> {
    let atoms = component_atoms(circuit)?;
    let mut out = String::new();
    for (c, atom) in circuit.components().iter().zip(&atoms) {
        writeln!(out, "component({atom}, {}, {}).", c.kind, quote(&c.value)).unwrap();
    }
    for (c, atom) in circuit.components().iter().zip(&atoms) {
        for pin in 1..=c.pin_count {
            writeln!(out, "pin({atom}, {pin}).").unwrap();
        }
    }
    for net in circuit.nets() {
        for m in &net.members {
            let ci = circuit
                .component_index(&m.reference)
                .expect("validated circuit");
            writeln!(out, "circuit_net({}, {}, {}).", atoms[ci], m.pin, net.id).unwrap();
        }
    }
    Ok(out)
}
