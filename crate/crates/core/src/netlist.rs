//! KiCad-style S-expression netlist reader.
//!
//! Parsing happens in two passes: a character-level tokenizer builds a tree
//! of lists and atoms, then an extractor walks the `components` and `nets`
//! sections of the `(export ...)` root. Sections it does not know about are
//! skipped.
//!
//! Pin counts are not part of the accepted subset; a component gets as many
//! pins as the highest pin number any net references (at least one).

use std::collections::HashMap;

use crate::circuit::{Circuit, Component, ComponentKind, Net, NetMember};
use crate::error::{CircuitError, NetlistError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExprKind {
    Atom(String),
    List(Vec<SExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SExpr {
    pub kind: SExprKind,
    pub line: usize,
    pub column: usize,
}

impl SExpr {
    pub fn as_atom(&self) -> Option<&str> {
        match &self.kind {
            SExprKind::Atom(s) => Some(s),
            SExprKind::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match &self.kind {
            SExprKind::List(v) => Some(v),
            SExprKind::Atom(_) => None,
        }
    }

    /// The leading atom of a list, e.g. `comp` for `(comp (ref R1))`.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }

    /// Child lists whose head is `name`.
    pub fn children<'a, 'n>(
        &'a self,
        name: &'n str,
    ) -> impl Iterator<Item = &'a SExpr> + use<'a, 'n> {
        self.as_list()
            .unwrap_or(&[])
            .iter()
            .skip(1)
            .filter(move |e| e.head() == Some(name))
    }

    pub fn child(&self, name: &str) -> Option<&SExpr> {
        self.children(name).next()
    }

    /// The first atom argument of a child list: `(name VALUE ...)`.
    pub fn field(&self, name: &str) -> Option<&str> {
        self.child(name)?.as_list()?.get(1)?.as_atom()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Between,
    Bare,
    Quoted,
    Escape,
    Comment,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> NetlistError {
    NetlistError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Reads exactly one S-expression (trailing whitespace allowed).
pub fn parse_sexpr(text: &str) -> Result<SExpr, NetlistError> {
    // Open lists: (line, column, items).
    let mut stack: Vec<(usize, usize, Vec<SExpr>)> = Vec::new();
    let mut root: Option<SExpr> = None;
    let mut state = State::Between;
    let mut buf = String::new();
    let (mut tok_line, mut tok_col) = (1, 1);
    let (mut line, mut col) = (1usize, 0usize);

    fn push_item(
        stack: &mut [(usize, usize, Vec<SExpr>)],
        root: &mut Option<SExpr>,
        item: SExpr,
    ) -> Result<(), NetlistError> {
        if let Some(top) = stack.last_mut() {
            top.2.push(item);
            Ok(())
        } else if root.is_none() {
            *root = Some(item);
            Ok(())
        } else {
            Err(syntax(
                item.line,
                item.column,
                "unexpected content after the top-level expression",
            ))
        }
    }

    for ch in text.chars() {
        if ch == '\n' {
            line += 1;
            col = 0;
        } else {
            col += 1;
        }
        match state {
            State::Escape => {
                buf.push(match ch {
                    'n' => '\n',
                    't' => '\t',
                    other => other,
                });
                state = State::Quoted;
            }
            State::Quoted => match ch {
                '\\' => state = State::Escape,
                '"' => {
                    let atom = SExpr {
                        kind: SExprKind::Atom(std::mem::take(&mut buf)),
                        line: tok_line,
                        column: tok_col,
                    };
                    push_item(&mut stack, &mut root, atom)?;
                    state = State::Between;
                }
                other => buf.push(other),
            },
            State::Comment => {
                if ch == '\n' {
                    state = State::Between;
                }
            }
            State::Between | State::Bare => {
                let delimiter =
                    ch.is_whitespace() || ch == '(' || ch == ')' || ch == '"' || ch == ';';
                if state == State::Bare && delimiter {
                    let atom = SExpr {
                        kind: SExprKind::Atom(std::mem::take(&mut buf)),
                        line: tok_line,
                        column: tok_col,
                    };
                    push_item(&mut stack, &mut root, atom)?;
                    state = State::Between;
                }
                match ch {
                    c if c.is_whitespace() => {}
                    '(' => {
                        if stack.is_empty() && root.is_some() {
                            return Err(syntax(
                                line,
                                col,
                                "unexpected content after the top-level expression",
                            ));
                        }
                        stack.push((line, col, Vec::new()));
                    }
                    ')' => {
                        let Some((l, c, items)) = stack.pop() else {
                            return Err(syntax(line, col, "unbalanced `)`"));
                        };
                        let list = SExpr {
                            kind: SExprKind::List(items),
                            line: l,
                            column: c,
                        };
                        push_item(&mut stack, &mut root, list)?;
                    }
                    '"' => {
                        tok_line = line;
                        tok_col = col;
                        state = State::Quoted;
                    }
                    ';' => state = State::Comment,
                    other => {
                        if state == State::Between {
                            tok_line = line;
                            tok_col = col;
                            state = State::Bare;
                        }
                        buf.push(other);
                    }
                }
            }
        }
    }

    match state {
        State::Quoted | State::Escape => {
            return Err(syntax(tok_line, tok_col, "unterminated string"));
        }
        State::Bare => {
            let atom = SExpr {
                kind: SExprKind::Atom(buf),
                line: tok_line,
                column: tok_col,
            };
            push_item(&mut stack, &mut root, atom)?;
        }
        State::Between | State::Comment => {}
    }
    if let Some((l, c, _)) = stack.last() {
        return Err(syntax(*l, *c, "unclosed `(`"));
    }
    root.ok_or_else(|| syntax(line.max(1), col, "empty input"))
}

/// Parses a netlist into a validated [`Circuit`].
pub fn parse_netlist(text: &str, source_name: &str) -> Result<Circuit, NetlistError> {
    let root = parse_sexpr(text)?;
    if root.head() != Some("export") {
        return Err(syntax(
            root.line,
            root.column,
            "expected an `(export ...)` netlist",
        ));
    }

    struct RawComp {
        reference: String,
        value: String,
        footprint: String,
    }

    let mut comps: Vec<RawComp> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for section in root.children("components") {
        for comp in section.children("comp") {
            let reference = comp
                .field("ref")
                .ok_or_else(|| syntax(comp.line, comp.column, "`comp` without `ref`"))?
                .to_string();
            if index.insert(reference.clone(), comps.len()).is_some() {
                return Err(CircuitError::DuplicateReference(reference).into());
            }
            comps.push(RawComp {
                reference,
                value: comp.field("value").unwrap_or_default().to_string(),
                footprint: comp.field("footprint").unwrap_or_default().to_string(),
            });
        }
    }

    let mut max_pin = vec![0u32; comps.len()];
    let mut nets = Vec::new();
    for section in root.children("nets") {
        for net in section.children("net") {
            let name = net
                .field("name")
                .or_else(|| net.field("code"))
                .unwrap_or_default()
                .to_string();
            let mut members = Vec::new();
            for node in net.children("node") {
                let reference = node
                    .field("ref")
                    .ok_or_else(|| syntax(node.line, node.column, "`node` without `ref`"))?;
                let pin_text = node
                    .field("pin")
                    .ok_or_else(|| syntax(node.line, node.column, "`node` without `pin`"))?;
                let Some(&ci) = index.get(reference) else {
                    return Err(CircuitError::UnknownReference {
                        net: name,
                        reference: reference.to_string(),
                    }
                    .into());
                };
                let pin = pin_text
                    .parse::<u32>()
                    .ok()
                    .filter(|&p| p > 0)
                    .ok_or_else(|| NetlistError::NonNumericPin {
                        line: node.line,
                        column: node.column,
                        reference: reference.to_string(),
                        pin: pin_text.to_string(),
                    })?;
                max_pin[ci] = max_pin[ci].max(pin);
                members.push(NetMember::new(reference, pin));
            }
            if !members.is_empty() {
                nets.push(Net {
                    id: nets.len() as u32 + 1,
                    name,
                    members,
                });
            }
        }
    }

    let components = comps
        .into_iter()
        .zip(max_pin)
        .map(|(rc, pins)| {
            let kind = ComponentKind::infer(&rc.reference, &rc.value, &rc.footprint);
            Component::new(rc.reference, kind, rc.value, pins.max(1))
        })
        .collect();
    Ok(Circuit::new(source_name, components, nets)?)
}
