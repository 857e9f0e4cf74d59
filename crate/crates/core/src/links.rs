//! Identifiers for the supported links.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// One of the links the laboratory knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkId {
    /// Figure-eight knot.
    #[serde(rename = "4_1")]
    K4_1,
    /// Three-twist knot.
    #[serde(rename = "5_2")]
    K5_2,
    /// Stevedore knot.
    #[serde(rename = "6_1")]
    K6_1,
    /// Knot 6₃ (amphichiral).
    #[serde(rename = "6_3")]
    K6_3,
    /// Knot 8₉ (amphichiral).
    #[serde(rename = "8_9")]
    K8_9,
    /// Knot 8₂₀.
    #[serde(rename = "8_20")]
    K8_20,
    /// Whitehead link (two components).
    #[serde(rename = "whitehead")]
    Whitehead,
}

impl LinkId {
    /// Every supported link, in a fixed order.
    pub const ALL: [LinkId; 7] = [
        LinkId::K4_1,
        LinkId::K5_2,
        LinkId::K6_1,
        LinkId::K6_3,
        LinkId::K8_9,
        LinkId::K8_20,
        LinkId::Whitehead,
    ];

    /// Canonical short name (`4_1`, …, `whitehead`).
    pub fn name(self) -> &'static str {
        match self {
            LinkId::K4_1 => "4_1",
            LinkId::K5_2 => "5_2",
            LinkId::K6_1 => "6_1",
            LinkId::K6_3 => "6_3",
            LinkId::K8_9 => "8_9",
            LinkId::K8_20 => "8_20",
            LinkId::Whitehead => "whitehead",
        }
    }

    /// Number of link components.
    pub fn components(self) -> usize {
        match self {
            LinkId::Whitehead => 2,
            _ => 1,
        }
    }

    /// True when a closed-form sum from the literature is available.
    pub fn has_published_sum(self) -> bool {
        matches!(
            self,
            LinkId::K6_3 | LinkId::K8_9 | LinkId::K8_20 | LinkId::Whitehead
        )
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinkId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', '.'], "_");
        let id = match key.as_str() {
            "4_1" | "41" => LinkId::K4_1,
            "5_2" | "52" => LinkId::K5_2,
            "6_1" | "61" => LinkId::K6_1,
            "6_3" | "63" => LinkId::K6_3,
            "8_9" | "89" => LinkId::K8_9,
            "8_20" | "820" => LinkId::K8_20,
            "whitehead" | "wh" | "5_1^2" => LinkId::Whitehead,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown link '{s}' (expected one of 4_1, 5_2, 6_1, 6_3, 8_9, 8_20, whitehead)"
                )))
            }
        };
        Ok(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in LinkId::ALL {
            assert_eq!(id.name().parse::<LinkId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.name()));
        }
        assert!("7_4".parse::<LinkId>().is_err());
    }
}
