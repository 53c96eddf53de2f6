//! Grid model, layouts and the metrics the optimizer minimizes.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Component};
use crate::error::{LayoutError, SchemaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub max_positions: u32,
    pub max_strips: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            max_strips: 30,
            max_positions: 50,
        }
    }
}

impl GridConfig {
    pub fn new(max_strips: u32, max_positions: u32) -> Result<GridConfig, LayoutError> {
        if max_strips == 0 || max_positions == 0 {
            return Err(LayoutError::EmptyGrid);
        }
        Ok(GridConfig {
            max_strips,
            max_positions,
        })
    }

    pub fn holes(&self) -> u64 {
        self.max_strips as u64 * self.max_positions as u64
    }

    pub fn contains(&self, strip: i32, position: i32) -> bool {
        strip >= 1
            && position >= 1
            && strip as u32 <= self.max_strips
            && position as u32 <= self.max_positions
    }
}

/// One pin assigned to one hole.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinPlacement {
    pub pin: u32,
    pub position: i32,
    #[serde(rename = "ref")]
    pub reference: String,
    pub strip: i32,
}

impl PinPlacement {
    pub fn new(reference: impl Into<String>, pin: u32, strip: i32, position: i32) -> Self {
        PinPlacement {
            pin,
            position,
            reference: reference.into(),
            strip,
        }
    }
}

/// A break in the copper of `strip` between `after_position` and the next hole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cut {
    pub after_position: i32,
    pub strip: i32,
}

impl Cut {
    pub fn new(strip: i32, after_position: i32) -> Self {
        Cut {
            after_position,
            strip,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutDoc {
    cuts: Vec<Cut>,
    grid: GridConfig,
    placements: Vec<PinPlacement>,
}

/// Placements for a circuit on a grid, plus the strip cuts derived for it.
///
/// A `Layout` may be partial or out of bounds (it can come from an untrusted
/// file); [`Layout::check_total`] and the constraint checks say whether it is
/// usable for a given circuit.
#[derive(Debug, Clone)]
pub struct Layout {
    grid: GridConfig,
    placements: Vec<PinPlacement>,
    cuts: Vec<Cut>,
    index: HashMap<(String, u32), usize>,
}

impl PartialEq for Layout {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.placements == other.placements && self.cuts == other.cuts
    }
}

impl Eq for Layout {}

impl Layout {
    pub fn new(
        grid: GridConfig,
        placements: Vec<PinPlacement>,
        cuts: Vec<Cut>,
    ) -> Result<Layout, LayoutError> {
        if grid.max_strips == 0 || grid.max_positions == 0 {
            return Err(LayoutError::EmptyGrid);
        }
        let mut index = HashMap::with_capacity(placements.len());
        for (i, p) in placements.iter().enumerate() {
            if index.insert((p.reference.clone(), p.pin), i).is_some() {
                return Err(LayoutError::DuplicatePlacement {
                    reference: p.reference.clone(),
                    pin: p.pin,
                });
            }
        }
        Ok(Layout {
            grid,
            placements,
            cuts,
            index,
        })
    }

    pub fn empty(grid: GridConfig) -> Layout {
        Layout::new(grid, Vec::new(), Vec::new()).expect("empty layout is valid")
    }

    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    pub fn placements(&self) -> &[PinPlacement] {
        &self.placements
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    /// `(strip, position)` of a pin, if placed.
    pub fn coord(&self, reference: &str, pin: u32) -> Option<(i32, i32)> {
        self.index
            .get(&(reference.to_string(), pin))
            .map(|&i| (self.placements[i].strip, self.placements[i].position))
    }

    pub fn with_cuts(&self, mut cuts: Vec<Cut>) -> Layout {
        cuts.sort();
        Layout {
            cuts,
            ..self.clone()
        }
    }

    pub fn with_grid(&self, grid: GridConfig) -> Layout {
        Layout {
            grid,
            ..self.clone()
        }
    }

    /// Shifts every placement and cut by a constant offset.
    pub fn translated(&self, d_strip: i32, d_position: i32) -> Layout {
        let placements = self
            .placements
            .iter()
            .map(|p| PinPlacement {
                strip: p.strip + d_strip,
                position: p.position + d_position,
                ..p.clone()
            })
            .collect();
        let cuts = self
            .cuts
            .iter()
            .map(|c| Cut::new(c.strip + d_strip, c.after_position + d_position))
            .collect();
        Layout::new(self.grid, placements, cuts).expect("translation keeps pins unique")
    }

    /// Checks that every circuit pin is placed exactly once and nothing else is.
    pub fn check_total(&self, circuit: &Circuit) -> Result<(), LayoutError> {
        for p in &self.placements {
            let known = circuit
                .component(&p.reference)
                .is_some_and(|c| p.pin >= 1 && p.pin <= c.pin_count);
            if !known {
                return Err(LayoutError::UnknownPin {
                    reference: p.reference.clone(),
                    pin: p.pin,
                });
            }
        }
        for c in circuit.components() {
            for pin in 1..=c.pin_count {
                if self.coord(&c.reference, pin).is_none() {
                    return Err(LayoutError::MissingPlacement {
                        reference: c.reference.clone(),
                        pin,
                    });
                }
            }
        }
        Ok(())
    }

    /// Coordinates of every circuit pin in [`Circuit::pins`] order.
    pub fn pin_coords(&self, circuit: &Circuit) -> Result<Vec<(i32, i32)>, LayoutError> {
        self.check_total(circuit)?;
        Ok(circuit
            .pins()
            .map(|p| {
                self.coord(&circuit.components()[p.component].reference, p.pin)
                    .expect("checked total")
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        let doc = LayoutDoc {
            cuts: self.cuts.clone(),
            grid: self.grid,
            placements: self.placements.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("layout serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Layout, SchemaError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: LayoutDoc = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            SchemaError::new(path, e.into_inner().to_string())
        })?;
        Layout::new(doc.grid, doc.placements, doc.cuts)
            .map_err(|e| SchemaError::new("placements", e.to_string()))
    }
}

/// Bounding box of the holes that hold pins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoardExtent {
    pub min_strip: i32,
    pub max_strip: i32,
    pub min_position: i32,
    pub max_position: i32,
    pub width: u64,
    pub length: u64,
    pub area: u64,
}

impl BoardExtent {
    pub fn from_bounds(
        min_strip: i32,
        max_strip: i32,
        min_position: i32,
        max_position: i32,
    ) -> Self {
        let width = (max_strip - min_strip + 1) as u64;
        let length = (max_position - min_position + 1) as u64;
        BoardExtent {
            min_strip,
            max_strip,
            min_position,
            max_position,
            width,
            length,
            area: width * length,
        }
    }

    /// Extent of a set of `(strip, position)` holes; `None` when empty.
    pub fn of_coords<I: IntoIterator<Item = (i32, i32)>>(coords: I) -> Option<BoardExtent> {
        let mut it = coords.into_iter();
        let (s0, p0) = it.next()?;
        let (mut smin, mut smax, mut pmin, mut pmax) = (s0, s0, p0, p0);
        for (s, p) in it {
            smin = smin.min(s);
            smax = smax.max(s);
            pmin = pmin.min(p);
            pmax = pmax.max(p);
        }
        Some(BoardExtent::from_bounds(smin, smax, pmin, pmax))
    }

    pub fn contains(&self, strip: i32, position: i32) -> bool {
        (self.min_strip..=self.max_strip).contains(&strip)
            && (self.min_position..=self.max_position).contains(&position)
    }
}

pub fn board_extent(layout: &Layout) -> Result<BoardExtent, LayoutError> {
    BoardExtent::of_coords(layout.placements().iter().map(|p| (p.strip, p.position)))
        .ok_or(LayoutError::EmptyLayout)
}

/// `(total strip distance, board area, board width)`, compared in that order.
///
/// The derived `Ord` is the lexicographic order the optimizer uses.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct ObjectiveTuple {
    pub total_strip_distance: u64,
    pub board_area: u64,
    pub board_width: u64,
}

impl ObjectiveTuple {
    pub fn new(total_strip_distance: u64, board_area: u64, board_width: u64) -> Self {
        ObjectiveTuple {
            total_strip_distance,
            board_area,
            board_width,
        }
    }
}

impl std::fmt::Display for ObjectiveTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(td={}, area={}, width={})",
            self.total_strip_distance, self.board_area, self.board_width
        )
    }
}

pub fn lex_compare(a: &ObjectiveTuple, b: &ObjectiveTuple) -> Ordering {
    a.cmp(b)
}

/// `|strip(pin 1) - strip(pin 2)|`, or `None` when either pin is absent.
pub fn strip_distance(layout: &Layout, component: &Component) -> Option<u64> {
    if component.pin_count < 2 {
        return None;
    }
    let (s1, _) = layout.coord(&component.reference, 1)?;
    let (s2, _) = layout.coord(&component.reference, 2)?;
    Some(s1.abs_diff(s2) as u64)
}

/// Objective value of a layout. An empty layout scores `(0, 0, 0)`.
pub fn objective_tuple(layout: &Layout, circuit: &Circuit) -> ObjectiveTuple {
    let td = circuit
        .components()
        .iter()
        .filter_map(|c| strip_distance(layout, c))
        .sum();
    match board_extent(layout) {
        Ok(e) => ObjectiveTuple::new(td, e.area, e.width),
        Err(_) => ObjectiveTuple::new(td, 0, 0),
    }
}
