//! Read-only reference data: volumes and Chern–Simons invariants of the
//! supported hyperbolic links, known stationary points of their potentials,
//! and the tabulated log-ratio sequences.
//!
//! The data live in the workspace `data/` directory and are embedded at
//! compile time; [`ReferenceTable::load`] reads a replacement reference file
//! (same JSON layout), which is how corrupted-reference negative controls
//! are run.

use crate::error::{Error, Result};
use crate::links::LinkId;
use crate::potentials::{Coord, PotentialPoint};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::OnceLock;

const REFERENCE_JSON: &str = include_str!("../../../data/reference.json");
const TABLE_5_2: &str = include_str!("../../../data/tables/5_2.csv");
const TABLE_WHITEHEAD: &str = include_str!("../../../data/tables/whitehead.csv");

/// Reference volume and Chern–Simons invariant of one link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    /// Link.
    pub link: LinkId,
    /// Hyperbolic volume of the complement.
    pub vol: f64,
    /// Chern–Simons invariant (defined modulo π²). When absent in the file
    /// it is derived from `cs_ratio` as `CS = −2π²·cs_ratio`.
    #[serde(default)]
    pub cs: Option<f64>,
    /// The Chern–Simons invariant in the `−CS/(2π²)` normalization, if that
    /// is the form the value is usually quoted in.
    #[serde(default)]
    pub cs_ratio: Option<f64>,
    /// Free-form remark on conventions.
    #[serde(default)]
    pub note: String,
}

impl ReferenceEntry {
    /// Chern–Simons invariant in the `CS` normalization.
    pub fn cs(&self) -> f64 {
        match (self.cs, self.cs_ratio) {
            (Some(cs), _) => cs,
            (None, Some(r)) => -2.0 * PI * PI * r,
            (None, None) => 0.0,
        }
    }
}

/// A coordinate as written in the data file: `[re, im]` decimal strings or
/// `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordText {
    /// Finite value.
    Finite([String; 2]),
    /// `"inf"`.
    Infinity(String),
}

/// A known stationary point, as printed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    /// Link.
    pub link: LinkId,
    /// Coordinates.
    pub coords: Vec<CoordText>,
}

/// The reference table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable {
    /// Format version.
    pub version: u32,
    /// Conventions.
    #[serde(default)]
    pub note: String,
    /// Per-link constants.
    pub links: Vec<ReferenceEntry>,
    /// Known stationary points.
    pub stationary_points: Vec<StationaryPoint>,
}

fn decimals(s: &str) -> usize {
    s.split_once('.').map_or(0, |(_, frac)| frac.len())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
}

impl ReferenceTable {
    /// Parses and validates a reference document.
    pub fn from_json(text: &str) -> Result<Self> {
        let table: ReferenceTable = serde_json::from_str(text)?;
        table.validate()?;
        Ok(table)
    }

    /// Loads a reference document from a file.
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        for (i, e) in self.links.iter().enumerate() {
            if !(e.vol.is_finite() && e.vol > 0.0) || !e.cs().is_finite() {
                return Err(Error::Validation(format!("reference entry for {} is not a finite positive volume", e.link)));
            }
            if self.links[..i].iter().any(|o| o.link == e.link) {
                return Err(Error::Validation(format!("duplicate reference entry for {}", e.link)));
            }
        }
        for p in &self.stationary_points {
            for c in &p.coords {
                match c {
                    CoordText::Finite([re, im]) => {
                        parse_f64(re)?;
                        parse_f64(im)?;
                    }
                    CoordText::Infinity(s) if s == "inf" => {}
                    CoordText::Infinity(s) => {
                        return Err(Error::Validation(format!("bad coordinate {s:?} for {}", p.link)))
                    }
                }
            }
        }
        Ok(())
    }

    /// Reference constants for `link`.
    pub fn lookup(&self, link: LinkId) -> Result<&ReferenceEntry> {
        self.links
            .iter()
            .find(|e| e.link == link)
            .ok_or_else(|| Error::MissingReference(format!("no reference constants for {link}")))
    }

    fn stationary(&self, link: LinkId) -> Result<&StationaryPoint> {
        self.stationary_points
            .iter()
            .find(|p| p.link == link)
            .ok_or_else(|| Error::MissingReference(format!("no stationary point for {link}")))
    }

    /// Known stationary point of `link`'s potential.
    pub fn point(&self, link: LinkId) -> Result<PotentialPoint> {
        self.stationary(link)?
            .coords
            .iter()
            .map(|c| match c {
                CoordText::Finite([re, im]) => Ok(Coord::Finite(Complex64::new(parse_f64(re)?, parse_f64(im)?))),
                CoordText::Infinity(_) => Ok(Coord::Infinity),
            })
            .collect()
    }

    /// One unit in the last printed place of each finite coordinate
    /// (the larger of the two components), `None` at infinity.
    pub fn point_precision(&self, link: LinkId) -> Result<Vec<Option<f64>>> {
        Ok(self
            .stationary(link)?
            .coords
            .iter()
            .map(|c| match c {
                CoordText::Finite([re, im]) => Some(10f64.powi(-(decimals(re).min(decimals(im)) as i32))),
                CoordText::Infinity(_) => None,
            })
            .collect())
    }
}

/// The embedded reference table.
pub fn reference_table() -> &'static ReferenceTable {
    static TABLE: OnceLock<ReferenceTable> = OnceLock::new();
    TABLE.get_or_init(|| ReferenceTable::from_json(REFERENCE_JSON).expect("embedded reference data is valid"))
}

/// One row of a tabulated sequence, with the decimal strings kept verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    /// Color.
    #[serde(rename = "N")]
    pub n: usize,
    /// Real part as printed.
    pub re: String,
    /// Imaginary part as printed.
    pub im: String,
}

impl TableRow {
    /// The row value rounded to double precision.
    pub fn value(&self) -> Result<Complex64> {
        Ok(Complex64::new(parse_f64(&self.re)?, parse_f64(&self.im)?))
    }
}

/// Parses a sequence CSV (`N,re,im`).
pub fn parse_table(text: &str) -> Result<Vec<TableRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let rows = reader.deserialize().collect::<std::result::Result<Vec<TableRow>, _>>()?;
    for r in &rows {
        r.value()?;
    }
    Ok(rows)
}

/// The tabulated log-ratio sequence of `link`, if one ships with the crate.
pub fn published_sequence(link: LinkId) -> Option<Vec<TableRow>> {
    let text = match link {
        LinkId::K5_2 => TABLE_5_2,
        LinkId::Whitehead => TABLE_WHITEHEAD,
        _ => return None,
    };
    Some(parse_table(text).expect("embedded tables are valid"))
}
