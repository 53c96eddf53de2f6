//! SVG and ASCII pictures of a normalized layout.
//!
//! Strips are rows, positions are columns. A cut is drawn on the boundary
//! between `after_position` and the next hole in SVG; in ASCII, where there
//! is no room between characters, it takes the next hole (which a derived
//! cut always leaves empty).

use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use crate::circuit::Circuit;
use crate::error::RenderError;
use crate::layout::{board_extent, Cut, Layout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RenderFormat {
    #[default]
    Svg,
    Ascii,
}

impl FromStr for RenderFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "svg" => Ok(RenderFormat::Svg),
            "ascii" => Ok(RenderFormat::Ascii),
            _ => Err(format!("unknown format `{s}` (expected svg or ascii)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Theme {
    #[default]
    Light,
    Dark,
}

impl FromStr for Theme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "light" => Ok(Theme::Light),
            "dark" => Ok(Theme::Dark),
            _ => Err(format!("unknown theme `{s}` (expected light or dark)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    pub format: RenderFormat,
    /// Pixels per hole in SVG.
    pub cell_size: u32,
    pub show_labels: bool,
    pub theme: Theme,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            format: RenderFormat::Svg,
            cell_size: 24,
            show_labels: true,
            theme: Theme::Light,
        }
    }
}

struct Palette {
    background: &'static str,
    board: &'static str,
    copper: &'static str,
    hole: &'static str,
    part: &'static str,
    cut: &'static str,
    text: &'static str,
}

const LIGHT: Palette = Palette {
    background: "#ffffff",
    board: "#f3e9c6",
    copper: "#d59a5a",
    hole: "#fdfaf0",
    part: "#1f4e9a",
    cut: "#c0182b",
    text: "#111111",
};

const DARK: Palette = Palette {
    background: "#1b1d21",
    board: "#2d3a2a",
    copper: "#b07a3c",
    hole: "#101214",
    part: "#8fc1ff",
    cut: "#ff5f6d",
    text: "#eeeeee",
};

/// Strips, length and pins of a normalized layout, or `(0, 0)` when empty.
fn board(layout: &Layout) -> Result<(i32, i32), RenderError> {
    match board_extent(layout) {
        Ok(e) if e.min_strip != 1 || e.min_position != 1 => Err(RenderError::NotNormalized {
            min_strip: e.min_strip,
            min_position: e.min_position,
        }),
        Ok(e) => Ok((e.max_strip, e.max_position)),
        Err(_) => Ok((0, 0)),
    }
}

fn check_cuts(cuts: &[Cut], strips: i32, len: i32) -> Result<(), RenderError> {
    for c in cuts {
        if !(1..=strips).contains(&c.strip) || !(1..len).contains(&c.after_position) {
            return Err(RenderError::CutOutside {
                strip: c.strip,
                after_position: c.after_position,
            });
        }
    }
    Ok(())
}

/// Draws `layout`. Output is a pure function of the arguments.
pub fn render(
    layout: &Layout,
    circuit: &Circuit,
    cuts: &[Cut],
    options: &RenderOptions,
) -> Result<String, RenderError> {
    let (strips, len) = board(layout)?;
    check_cuts(cuts, strips, len)?;
    let mut cuts = cuts.to_vec();
    cuts.sort();
    cuts.dedup();
    match options.format {
        RenderFormat::Ascii => ascii(layout, circuit, &cuts, strips, len, options.show_labels),
        RenderFormat::Svg => {
            if options.cell_size < 8 {
                return Err(RenderError::CellTooSmall(options.cell_size));
            }
            Ok(svg(layout, circuit, &cuts, strips, len, options))
        }
    }
}

fn initial(reference: &str) -> char {
    reference
        .chars()
        .next()
        .map_or('?', |c| c.to_ascii_uppercase())
}

fn ascii(
    layout: &Layout,
    circuit: &Circuit,
    cuts: &[Cut],
    strips: i32,
    len: i32,
    labels: bool,
) -> Result<String, RenderError> {
    let mut grid = vec![vec!['o'; len as usize]; strips as usize];
    let mut who: BTreeMap<(i32, i32), (&str, u32)> = BTreeMap::new();
    for p in layout.placements() {
        grid[p.strip as usize - 1][p.position as usize - 1] = initial(&p.reference);
        who.insert((p.strip, p.position), (&p.reference, p.pin));
    }
    for c in cuts {
        if let Some(&(reference, pin)) = who.get(&(c.strip, c.after_position + 1)) {
            return Err(RenderError::CutOnPin {
                strip: c.strip,
                after_position: c.after_position,
                reference: reference.to_string(),
                pin,
            });
        }
        grid[c.strip as usize - 1][c.after_position as usize] = 'X';
    }
    let mut out = String::new();
    for row in grid {
        out.extend(row);
        out.push('\n');
    }
    if labels && !layout.is_empty() {
        out.push('\n');
        for comp in circuit.components() {
            let pins: Vec<String> = (1..=comp.pin_count)
                .filter_map(|pin| {
                    layout
                        .coord(&comp.reference, pin)
                        .map(|(s, q)| format!("{pin}@{s},{q}"))
                })
                .collect();
            let _ = writeln!(out, "{} {}", comp.reference, pins.join(" "));
        }
    }
    Ok(out)
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

fn svg(
    layout: &Layout,
    circuit: &Circuit,
    cuts: &[Cut],
    strips: i32,
    len: i32,
    options: &RenderOptions,
) -> String {
    let pal = if options.theme == Theme::Dark {
        &DARK
    } else {
        &LIGHT
    };
    let cell = options.cell_size as f64;
    let margin = cell;
    let width = 2.0 * margin + len as f64 * cell;
    let height = 2.0 * margin + strips as f64 * cell;
    let cx = |q: i32| margin + (q as f64 - 0.5) * cell;
    let cy = |s: i32| margin + (s as f64 - 0.5) * cell;

    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(
        o,
        r#"<rect x="0" y="0" width="{width:.1}" height="{height:.1}" fill="{}"/>"#,
        pal.background
    );
    let _ = writeln!(
        o,
        r#"<rect class="board" x="{margin:.1}" y="{margin:.1}" width="{:.1}" height="{:.1}" fill="{}" stroke="{}" stroke-width="1"/>"#,
        len as f64 * cell,
        strips as f64 * cell,
        pal.board,
        pal.text
    );
    for s in 1..=strips {
        let _ = writeln!(
            o,
            r#"<rect class="strip" x="{margin:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
            cy(s) - 0.3 * cell,
            len as f64 * cell,
            0.6 * cell,
            pal.copper
        );
    }
    for s in 1..=strips {
        for q in 1..=len {
            let _ = writeln!(
                o,
                r#"<circle class="hole" cx="{:.1}" cy="{:.1}" r="{:.1}" fill="{}"/>"#,
                cx(q),
                cy(s),
                0.12 * cell,
                pal.hole
            );
        }
    }
    for c in cuts {
        let x = margin + c.after_position as f64 * cell;
        let y = cy(c.strip);
        let d = 0.25 * cell;
        let _ = writeln!(
            o,
            r#"<line class="cut" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}" stroke-width="2"/>"#,
            x - d,
            y - d,
            x + d,
            y + d,
            pal.cut
        );
        let _ = writeln!(
            o,
            r#"<line class="cut" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}" stroke-width="2"/>"#,
            x - d,
            y + d,
            x + d,
            y - d,
            pal.cut
        );
    }
    for comp in circuit.components() {
        let pins: Vec<(u32, (i32, i32))> = (1..=comp.pin_count)
            .filter_map(|pin| layout.coord(&comp.reference, pin).map(|c| (pin, c)))
            .collect();
        for w in pins.windows(2) {
            let ((_, (s1, q1)), (_, (s2, q2))) = (w[0], w[1]);
            let _ = writeln!(
                o,
                r#"<line class="part" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}" stroke-width="{:.1}" stroke-linecap="round"/>"#,
                cx(q1),
                cy(s1),
                cx(q2),
                cy(s2),
                pal.part,
                0.12 * cell
            );
        }
        for &(_, (s, q)) in &pins {
            let _ = writeln!(
                o,
                r#"<circle class="pin" cx="{:.1}" cy="{:.1}" r="{:.1}" fill="{}"/>"#,
                cx(q),
                cy(s),
                0.22 * cell,
                pal.part
            );
        }
        if options.show_labels && !pins.is_empty() {
            // Between pins 1 and 2 when both exist, else at the first pin.
            let (sa, qa) = pins[0].1;
            let (sb, qb) = pins.get(1).map_or(pins[0].1, |p| p.1);
            let _ = writeln!(
                o,
                r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="{:.1}" text-anchor="middle" fill="{}">{}</text>"#,
                (cx(qa) + cx(qb)) / 2.0,
                (cy(sa) + cy(sb)) / 2.0 - 0.3 * cell,
                0.45 * cell,
                pal.text,
                escape(&comp.reference)
            );
        }
    }
    o.push_str("</svg>\n");
    o
}
