//! Morse-slice description of a (1,1)-tangle and its text format.
//!
//! A diagram is read bottom to top as a list of elementary events acting on
//! the strands that cross the current horizontal level, numbered from 0 on
//! the left:
//!
//! ```text
//! # comment
//! X+ p          positive crossing of strands p and p+1
//! X- p          negative crossing of strands p and p+1
//! CUP p up      minimum creating strands p, p+1; left leg oriented up
//! CUP p down    minimum creating strands p, p+1; left leg oriented down
//! CAP p         maximum joining strands p, p+1
//! ```
//!
//! The diagram starts and ends with a single upward strand, the cut
//! component, whose two end edges carry the label 0. Crossings are only
//! allowed between two upward strands; a crossing with a downward strand is
//! rotated into that position with cups and caps when the diagram is written,
//! exactly as in the hand calculus. The orientation word `up`/`down` of a cup
//! is optional and defaults to `up`; a cap may carry it too, in which case it
//! is checked against the strands it joins.

use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Orientation of a strand at a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Traversed bottom to top.
    Up,
    /// Traversed top to bottom.
    Down,
}

/// Sign of a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingSign {
    /// Weighted by `R`.
    Positive,
    /// Weighted by `R̄`.
    Negative,
}

impl CrossingSign {
    /// `+1` or `-1`.
    pub fn value(self) -> i64 {
        match self {
            CrossingSign::Positive => 1,
            CrossingSign::Negative => -1,
        }
    }
}

/// One horizontal slice event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    /// Crossing of strands `pos` and `pos + 1`.
    Crossing {
        /// Crossing sign.
        sign: CrossingSign,
        /// Left strand position.
        pos: usize,
    },
    /// Minimum creating strands `pos` and `pos + 1`.
    Cup {
        /// Left leg position.
        pos: usize,
        /// Orientation of the left leg (the right leg is opposite).
        left: Orientation,
    },
    /// Maximum joining strands `pos` and `pos + 1`.
    Cap {
        /// Left leg position.
        pos: usize,
        /// Optional expected orientation of the left leg.
        left: Option<Orientation>,
    },
}

/// A (1,1)-tangle as an ordered list of slice events.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TangleDiagram {
    /// Events from bottom to top.
    pub events: Vec<Event>,
}

/// Orientation data derived by [`TangleDiagram::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramProfile {
    /// Strand orientations below each event and after the last one
    /// (`events.len() + 1` levels).
    pub levels: Vec<Vec<Orientation>>,
    /// Largest number of strands crossing any level.
    pub max_width: usize,
    /// Sum of crossing signs.
    pub writhe: i64,
}

impl DiagramProfile {
    /// Width at each level.
    pub fn widths(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }
}

impl TangleDiagram {
    /// Wraps an event list.
    pub fn new(events: Vec<Event>) -> Self {
        TangleDiagram { events }
    }

    /// Parses the line-oriented text format (see module docs).
    pub fn parse(text: &str) -> Result<Self> {
        let mut events = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Validation(format!("line {}: {msg}: '{raw}'", lineno + 1));
            let mut parts = line.split_whitespace();
            let op = parts.next().unwrap_or_default().to_ascii_uppercase();
            let pos: usize = parts
                .next()
                .ok_or_else(|| bad("missing strand position"))?
                .parse()
                .map_err(|_| bad("strand position is not a non-negative integer"))?;
            let orientation = match parts.next() {
                None => None,
                Some(w) => match w.to_ascii_lowercase().as_str() {
                    "up" => Some(Orientation::Up),
                    "down" => Some(Orientation::Down),
                    _ => return Err(bad("orientation must be 'up' or 'down'")),
                },
            };
            if parts.next().is_some() {
                return Err(bad("trailing tokens"));
            }
            let event = match op.as_str() {
                "X+" | "X-" => {
                    if orientation.is_some() {
                        return Err(bad("crossings take no orientation"));
                    }
                    let sign = if op == "X+" {
                        CrossingSign::Positive
                    } else {
                        CrossingSign::Negative
                    };
                    Event::Crossing { sign, pos }
                }
                "CUP" => Event::Cup {
                    pos,
                    left: orientation.unwrap_or(Orientation::Up),
                },
                "CAP" => Event::Cap {
                    pos,
                    left: orientation,
                },
                _ => return Err(bad("unknown event")),
            };
            events.push(event);
        }
        Ok(TangleDiagram { events })
    }

    /// Serializes to the text format; `parse(to_text(d)) == d` up to the
    /// optional cap orientations, which are always written out.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let profile = self.validate().ok();
        for (idx, e) in self.events.iter().enumerate() {
            let word = |o: Orientation| if o == Orientation::Up { "up" } else { "down" };
            match *e {
                Event::Crossing { sign, pos } => {
                    let s = if sign == CrossingSign::Positive { "X+" } else { "X-" };
                    let _ = writeln!(out, "{s} {pos}");
                }
                Event::Cup { pos, left } => {
                    let _ = writeln!(out, "CUP {pos} {}", word(left));
                }
                Event::Cap { pos, left } => {
                    let actual = profile
                        .as_ref()
                        .and_then(|p| p.levels[idx].get(pos).copied())
                        .or(left);
                    match actual {
                        Some(o) => {
                            let _ = writeln!(out, "CAP {pos} {}", word(o));
                        }
                        None => {
                            let _ = writeln!(out, "CAP {pos}");
                        }
                    }
                }
            }
        }
        out
    }

    /// Checks the width profile, orientations and (1,1) boundary condition.
    pub fn validate(&self) -> Result<DiagramProfile> {
        let mut level = vec![Orientation::Up];
        let mut levels = Vec::with_capacity(self.events.len() + 1);
        let mut max_width = 1;
        let mut writhe = 0;
        for (idx, e) in self.events.iter().enumerate() {
            levels.push(level.clone());
            let err = |msg: String| Error::Validation(format!("event {}: {msg}", idx + 1));
            match *e {
                Event::Crossing { sign, pos } => {
                    if pos + 1 >= level.len() {
                        return Err(err(format!(
                            "crossing at {pos} needs strands {pos},{} but width is {}",
                            pos + 1,
                            level.len()
                        )));
                    }
                    if level[pos] != Orientation::Up || level[pos + 1] != Orientation::Up {
                        return Err(err(format!(
                            "crossing at {pos} involves a downward strand; rotate it with cups/caps"
                        )));
                    }
                    writhe += sign.value();
                }
                Event::Cup { pos, left } => {
                    if pos > level.len() {
                        return Err(err(format!(
                            "cup at {pos} beyond width {}",
                            level.len()
                        )));
                    }
                    let right = match left {
                        Orientation::Up => Orientation::Down,
                        Orientation::Down => Orientation::Up,
                    };
                    level.splice(pos..pos, [left, right]);
                }
                Event::Cap { pos, left } => {
                    if pos + 1 >= level.len() {
                        return Err(err(format!(
                            "cap at {pos} needs strands {pos},{} but width is {}",
                            pos + 1,
                            level.len()
                        )));
                    }
                    if level[pos] == level[pos + 1] {
                        return Err(err(format!(
                            "cap at {pos} joins two strands with the same orientation"
                        )));
                    }
                    if let Some(expected) = left {
                        if expected != level[pos] {
                            return Err(err(format!(
                                "cap at {pos} declared with a left leg oriented the other way"
                            )));
                        }
                    }
                    level.drain(pos..pos + 2);
                }
            }
            max_width = max_width.max(level.len());
        }
        if level != [Orientation::Up] {
            return Err(Error::Validation(format!(
                "a (1,1)-tangle must end with one upward strand, found {} strands",
                level.len()
            )));
        }
        levels.push(level);
        Ok(DiagramProfile {
            levels,
            max_width,
            writhe,
        })
    }

    /// Estimated number of weight multiplications, `#slices · N^{w+1}`.
    pub fn cost_estimate(&self, n: usize) -> Result<f64> {
        let profile = self.validate()?;
        Ok(self.events.len().max(1) as f64 * (n as f64).powi(profile.max_width as i32 + 1))
    }

    /// Number of closed components, counting the cut strand as one.
    pub fn components(&self) -> Result<usize> {
        self.validate()?;
        // Union-find over strand segments: every event joins the segments
        // that pass through it.
        let mut parent: Vec<usize> = vec![0];
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        let mut strands: Vec<usize> = vec![0];
        for e in &self.events {
            match *e {
                Event::Crossing { pos, .. } => strands.swap(pos, pos + 1),
                Event::Cup { pos, .. } => {
                    let id = parent.len();
                    parent.push(id);
                    strands.splice(pos..pos, [id, id]);
                }
                Event::Cap { pos, .. } => {
                    let a = find(&mut parent, strands[pos]);
                    let b = find(&mut parent, strands[pos + 1]);
                    parent[a] = b;
                    strands.drain(pos..pos + 2);
                }
            }
        }
        let mut roots: Vec<usize> = (0..parent.len()).map(|x| find(&mut parent, x)).collect();
        roots.sort_unstable();
        roots.dedup();
        Ok(roots.len())
    }
}
