//! JSON form of the circuit IR.
//!
//! Field declaration order below is alphabetical, which is what makes the
//! serialized output key-sorted.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Component, ComponentKind, Net, NetMember};
use crate::error::{CircuitError, SchemaError};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IrCircuit {
    components: Vec<IrComponent>,
    nets: Vec<IrNet>,
    source_name: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IrComponent {
    kind: String,
    pin_count: u32,
    #[serde(rename = "ref")]
    reference: String,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IrNet {
    id: u32,
    members: Vec<IrMember>,
    name: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IrMember {
    pin: u32,
    #[serde(rename = "ref")]
    reference: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IrError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("invalid circuit: {0}")]
    Circuit(#[from] CircuitError),
}

/// Canonical compact JSON for a circuit (sorted keys, no whitespace).
pub fn circuit_to_json(circuit: &Circuit) -> String {
    let ir = IrCircuit {
        components: circuit
            .components()
            .iter()
            .map(|c| IrComponent {
                kind: c.kind.as_str().to_string(),
                pin_count: c.pin_count,
                reference: c.reference.clone(),
                value: c.value.clone(),
            })
            .collect(),
        nets: circuit
            .nets()
            .iter()
            .map(|n| IrNet {
                id: n.id,
                members: n
                    .members
                    .iter()
                    .map(|m| IrMember {
                        pin: m.pin,
                        reference: m.reference.clone(),
                    })
                    .collect(),
                name: n.name.clone(),
            })
            .collect(),
        source_name: circuit.source_name().to_string(),
    };
    serde_json::to_string(&ir).expect("IR serialization cannot fail")
}

pub fn json_to_circuit(text: &str) -> Result<Circuit, IrError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let ir: IrCircuit = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        SchemaError::new(path, e.into_inner().to_string())
    })?;

    let mut components = Vec::with_capacity(ir.components.len());
    for (i, c) in ir.components.into_iter().enumerate() {
        let kind: ComponentKind = c
            .kind
            .parse()
            .map_err(|msg: String| SchemaError::new(format!("components[{i}].kind"), msg))?;
        components.push(Component::new(c.reference, kind, c.value, c.pin_count));
    }
    let nets = ir
        .nets
        .into_iter()
        .map(|n| Net {
            id: n.id,
            name: n.name,
            members: n
                .members
                .into_iter()
                .map(|m| NetMember::new(m.reference, m.pin))
                .collect(),
        })
        .collect();
    Ok(Circuit::new(ir.source_name, components, nets)?)
}
