//! Circuit intermediate representation: components, pins and nets.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::CircuitError;

/// Electrical role of a component, inferred from its reference designator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentKind {
    Resistor,
    Capacitor,
    Inductor,
    Diode,
    Led,
    Transistor,
    Ic,
    Connector,
    Other,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 9] = [
        ComponentKind::Resistor,
        ComponentKind::Capacitor,
        ComponentKind::Inductor,
        ComponentKind::Diode,
        ComponentKind::Led,
        ComponentKind::Transistor,
        ComponentKind::Ic,
        ComponentKind::Connector,
        ComponentKind::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ComponentKind::Resistor => "resistor",
            ComponentKind::Capacitor => "capacitor",
            ComponentKind::Inductor => "inductor",
            ComponentKind::Diode => "diode",
            ComponentKind::Led => "led",
            ComponentKind::Transistor => "transistor",
            ComponentKind::Ic => "ic",
            ComponentKind::Connector => "connector",
            ComponentKind::Other => "other",
        }
    }

    /// Infers the kind from the alphabetic prefix of a reference designator.
    ///
    /// Only the exact prefixes `R`, `C`, `L`, `D`, `Q`, `U`, `J` and `P` are
    /// recognised, so `RV1` (a potentiometer) or `SW1` map to `Other`. A `D`
    /// part whose value or footprint mentions "LED" is an LED.
    pub fn infer(reference: &str, value: &str, footprint: &str) -> ComponentKind {
        let prefix: String = reference
            .chars()
            .take_while(|c| c.is_ascii_alphabetic())
            .map(|c| c.to_ascii_uppercase())
            .collect();
        match prefix.as_str() {
            "R" => ComponentKind::Resistor,
            "C" => ComponentKind::Capacitor,
            "L" => ComponentKind::Inductor,
            "D" => {
                let mentions_led = |s: &str| s.to_ascii_uppercase().contains("LED");
                if mentions_led(value) || mentions_led(footprint) {
                    ComponentKind::Led
                } else {
                    ComponentKind::Diode
                }
            }
            "Q" => ComponentKind::Transistor,
            "U" => ComponentKind::Ic,
            "J" | "P" => ComponentKind::Connector,
            _ => ComponentKind::Other,
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComponentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ComponentKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown component kind `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub reference: String,
    pub kind: ComponentKind,
    pub value: String,
    pub pin_count: u32,
}

impl Component {
    pub fn new(
        reference: impl Into<String>,
        kind: ComponentKind,
        value: impl Into<String>,
        pin_count: u32,
    ) -> Self {
        Component {
            reference: reference.into(),
            kind,
            value: value.into(),
            pin_count,
        }
    }
}

/// One `(component, pin)` endpoint of a net.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetMember {
    pub reference: String,
    pub pin: u32,
}

impl NetMember {
    pub fn new(reference: impl Into<String>, pin: u32) -> Self {
        NetMember {
            reference: reference.into(),
            pin,
        }
    }
}

/// A set of pins that must end up electrically connected.
///
/// `id` is the dense network id (1-based, in net-list order); `name` keeps
/// whatever the netlist called it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    pub id: u32,
    pub name: String,
    pub members: Vec<NetMember>,
}

/// Index-based pin handle, valid for the circuit it was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PinId {
    pub component: usize,
    pub pin: u32,
}

/// A validated circuit. Immutable once built.
#[derive(Debug, Clone)]
pub struct Circuit {
    source_name: String,
    components: Vec<Component>,
    nets: Vec<Net>,
    by_reference: HashMap<String, usize>,
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.source_name == other.source_name
            && self.components == other.components
            && self.nets == other.nets
    }
}

impl Eq for Circuit {}

impl Circuit {
    /// Builds a circuit, checking every structural invariant.
    pub fn new(
        source_name: impl Into<String>,
        components: Vec<Component>,
        nets: Vec<Net>,
    ) -> Result<Circuit, CircuitError> {
        let mut by_reference = HashMap::with_capacity(components.len());
        for (i, c) in components.iter().enumerate() {
            if c.reference.is_empty() {
                return Err(CircuitError::EmptyReference { index: i });
            }
            if c.pin_count == 0 {
                return Err(CircuitError::NoPins {
                    reference: c.reference.clone(),
                });
            }
            if by_reference.insert(c.reference.clone(), i).is_some() {
                return Err(CircuitError::DuplicateReference(c.reference.clone()));
            }
        }

        let mut seen: HashMap<(usize, u32), &str> = HashMap::new();
        for (i, net) in nets.iter().enumerate() {
            let expected = i as u32 + 1;
            if net.id != expected {
                return Err(CircuitError::NetIdNotDense {
                    name: net.name.clone(),
                    id: net.id,
                    expected,
                });
            }
            if net.members.is_empty() {
                return Err(CircuitError::EmptyNet(net.name.clone()));
            }
            let mut local = HashSet::new();
            for m in &net.members {
                let Some(&ci) = by_reference.get(&m.reference) else {
                    return Err(CircuitError::UnknownReference {
                        net: net.name.clone(),
                        reference: m.reference.clone(),
                    });
                };
                if m.pin == 0 || m.pin > components[ci].pin_count {
                    return Err(CircuitError::PinOutOfRange {
                        net: net.name.clone(),
                        reference: m.reference.clone(),
                        pin: m.pin,
                        pin_count: components[ci].pin_count,
                    });
                }
                if !local.insert((ci, m.pin)) {
                    return Err(CircuitError::DuplicateMember {
                        net: net.name.clone(),
                        reference: m.reference.clone(),
                        pin: m.pin,
                    });
                }
                if let Some(other) = seen.insert((ci, m.pin), &net.name) {
                    return Err(CircuitError::PinInTwoNets {
                        reference: m.reference.clone(),
                        pin: m.pin,
                        first: other.to_string(),
                        second: net.name.clone(),
                    });
                }
            }
        }

        Ok(Circuit {
            source_name: source_name.into(),
            components,
            nets,
            by_reference,
        })
    }

    pub fn empty(source_name: impl Into<String>) -> Circuit {
        Circuit::new(source_name, Vec::new(), Vec::new()).expect("empty circuit is valid")
    }

    pub fn source_name(&self) -> &str {
        &self.source_name
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    pub fn component_index(&self, reference: &str) -> Option<usize> {
        self.by_reference.get(reference).copied()
    }

    pub fn component(&self, reference: &str) -> Option<&Component> {
        self.component_index(reference).map(|i| &self.components[i])
    }

    /// Every pin of every component: components in order, pins ascending.
    pub fn pins(&self) -> impl Iterator<Item = PinId> + '_ {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(ci, c)| (1..=c.pin_count).map(move |pin| PinId { component: ci, pin }))
    }

    pub fn pin_total(&self) -> usize {
        self.components.iter().map(|c| c.pin_count as usize).sum()
    }

    pub fn pin_id(&self, member: &NetMember) -> Option<PinId> {
        let ci = self.component_index(&member.reference)?;
        (member.pin >= 1 && member.pin <= self.components[ci].pin_count).then_some(PinId {
            component: ci,
            pin: member.pin,
        })
    }

    /// For each pin (in [`Circuit::pins`] order), the index of its net.
    pub fn net_of_pins(&self) -> HashMap<PinId, usize> {
        let mut out = HashMap::new();
        for (ni, net) in self.nets.iter().enumerate() {
            for m in &net.members {
                if let Some(p) = self.pin_id(m) {
                    out.insert(p, ni);
                }
            }
        }
        out
    }

    /// The electrical partition of all pins: one class per net, plus a
    /// singleton for every pin that belongs to no net. Classes are sorted.
    pub fn pin_partition(&self) -> Vec<Vec<(String, u32)>> {
        let nets = self.net_of_pins();
        let mut classes: Vec<Vec<(String, u32)>> = self
            .nets
            .iter()
            .map(|n| {
                let mut v: Vec<_> = n
                    .members
                    .iter()
                    .map(|m| (m.reference.clone(), m.pin))
                    .collect();
                v.sort();
                v
            })
            .collect();
        for p in self.pins() {
            if !nets.contains_key(&p) {
                classes.push(vec![(
                    self.components[p.component].reference.clone(),
                    p.pin,
                )]);
            }
        }
        classes.sort();
        classes
    }
}

/// Incremental construction helper that assigns dense net ids.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    source_name: String,
    components: Vec<Component>,
    nets: Vec<Net>,
}

impl CircuitBuilder {
    pub fn new(source_name: impl Into<String>) -> Self {
        CircuitBuilder {
            source_name: source_name.into(),
            ..Default::default()
        }
    }

    pub fn component(
        mut self,
        reference: &str,
        kind: ComponentKind,
        value: &str,
        pin_count: u32,
    ) -> Self {
        self.components
            .push(Component::new(reference, kind, value, pin_count));
        self
    }

    pub fn net(mut self, name: &str, members: &[(&str, u32)]) -> Self {
        let id = self.nets.len() as u32 + 1;
        self.nets.push(Net {
            id,
            name: name.to_string(),
            members: members.iter().map(|&(r, p)| NetMember::new(r, p)).collect(),
        });
        self
    }

    pub fn build(self) -> Result<Circuit, CircuitError> {
        Circuit::new(self.source_name, self.components, self.nets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_inference_follows_prefix_table() {
        let k = |r: &str| ComponentKind::infer(r, "", "");
        assert_eq!(k("R1"), ComponentKind::Resistor);
        assert_eq!(k("C12"), ComponentKind::Capacitor);
        assert_eq!(k("L3"), ComponentKind::Inductor);
        assert_eq!(k("D1"), ComponentKind::Diode);
        assert_eq!(k("Q2"), ComponentKind::Transistor);
        assert_eq!(k("U1"), ComponentKind::Ic);
        assert_eq!(k("J1"), ComponentKind::Connector);
        assert_eq!(k("P4"), ComponentKind::Connector);
        assert_eq!(k("RV1"), ComponentKind::Other);
        assert_eq!(k("SW1"), ComponentKind::Other);
        assert_eq!(k("1X"), ComponentKind::Other);
        assert_eq!(
            ComponentKind::infer("D3", "LED red", ""),
            ComponentKind::Led
        );
        assert_eq!(
            ComponentKind::infer("D3", "", "LED_THT:LED_D5.0mm"),
            ComponentKind::Led
        );
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ComponentKind::ALL {
            assert_eq!(k.as_str().parse::<ComponentKind>().unwrap(), k);
        }
        assert!("widget".parse::<ComponentKind>().is_err());
    }

    #[test]
    fn rejects_duplicate_reference() {
        let err = CircuitBuilder::new("t")
            .component("R1", ComponentKind::Resistor, "1k", 2)
            .component("R1", ComponentKind::Resistor, "2k", 2)
            .build()
            .unwrap_err();
        assert!(matches!(err, CircuitError::DuplicateReference(r) if r == "R1"));
    }

    #[test]
    fn rejects_pin_in_two_nets() {
        let err = CircuitBuilder::new("t")
            .component("R1", ComponentKind::Resistor, "1k", 2)
            .net("A", &[("R1", 1)])
            .net("B", &[("R1", 1)])
            .build()
            .unwrap_err();
        assert!(matches!(err, CircuitError::PinInTwoNets { .. }));
    }

    #[test]
    fn rejects_unknown_member_and_bad_pin() {
        let err = CircuitBuilder::new("t")
            .component("R1", ComponentKind::Resistor, "1k", 2)
            .net("A", &[("C9", 1)])
            .build()
            .unwrap_err();
        assert!(
            matches!(err, CircuitError::UnknownReference { reference, .. } if reference == "C9")
        );

        let err = CircuitBuilder::new("t")
            .component("R1", ComponentKind::Resistor, "1k", 2)
            .net("A", &[("R1", 3)])
            .build()
            .unwrap_err();
        assert!(matches!(err, CircuitError::PinOutOfRange { pin: 3, .. }));
    }

    #[test]
    fn partition_includes_unconnected_pins_as_singletons() {
        let c = CircuitBuilder::new("t")
            .component("U1", ComponentKind::Ic, "", 3)
            .component("R1", ComponentKind::Resistor, "1k", 2)
            .net("A", &[("R1", 1), ("U1", 2)])
            .build()
            .unwrap();
        let p = c.pin_partition();
        assert_eq!(p.len(), 4);
        assert!(p.contains(&vec![("R1".to_string(), 1), ("U1".to_string(), 2)]));
        assert!(p.contains(&vec![("U1".to_string(), 3)]));
    }
}
