use std::fmt;
use std::str::FromStr;

use super::{tables, AhpError, Alternative, Criterion, Level1Matrix, Slice};
use crate::kv;

const DEFAULT_PROFILES: &str = include_str!("../../data/ahp_profiles.txt");

/// Where the level-1 weight matrix comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level1Source {
    /// The printed per-criterion weights (editable through `level1.*`).
    Printed,
    /// Recomputed from the printed level-1 comparison matrices.
    Recomputed,
}

impl fmt::Display for Level1Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level1Source::Printed => "printed",
            Level1Source::Recomputed => "recomputed",
        })
    }
}

impl FromStr for Level1Source {
    type Err = AhpError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "printed" => Ok(Level1Source::Printed),
            "recomputed" => Ok(Level1Source::Recomputed),
            _ => Err(AhpError::Unknown {
                kind: "level-1 source",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceProfile {
    pub slice: Slice,
    /// Criterion priorities on the 1-10 scale, in [`Criterion::ALL`] order.
    pub priorities: [f64; 4],
    pub level1_source: Level1Source,
}

/// Slice priorities and printed level-1 weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AhpData {
    pub priorities: [[f64; 4]; 3],
    pub level1: Level1Matrix,
}

impl Default for AhpData {
    fn default() -> Self {
        let mut data = AhpData {
            priorities: [[1.0; 4]; 3],
            level1: tables::PRINTED_LEVEL1,
        };
        let entries = kv::parse(DEFAULT_PROFILES).expect("bundled AHP data parses");
        for (key, value) in entries.iter() {
            data.apply(key, value).expect("bundled AHP data is valid");
        }
        data
    }
}

impl AhpData {
    pub fn from_text(text: &str) -> Result<Self, AhpError> {
        let entries = kv::parse(text).map_err(|e| AhpError::BadEntry {
            key: String::new(),
            reason: e.to_string(),
        })?;
        let mut data = AhpData::default();
        for (key, value) in entries.iter() {
            if !data.apply(key, value)? {
                return Err(AhpError::BadEntry {
                    key: key.to_string(),
                    reason: "unknown key".into(),
                });
            }
        }
        data.validate()?;
        Ok(data)
    }

    pub fn profile(&self, slice: Slice, level1_source: Level1Source) -> SliceProfile {
        SliceProfile {
            slice,
            priorities: self.priorities[slice as usize],
            level1_source,
        }
    }

    /// Applies one `slice.*` or `level1.*` entry. Returns `Ok(false)` when
    /// the key is outside these namespaces.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<bool, AhpError> {
        let parts: Vec<&str> = key.split('.').collect();
        let bad = |reason: String| AhpError::BadEntry {
            key: key.to_string(),
            reason,
        };
        let number = || -> Result<f64, AhpError> {
            value
                .parse::<f64>()
                .map_err(|_| bad(format!("`{value}` is not a number")))
        };
        match parts.as_slice() {
            ["slice", slice, "priority", criterion] => {
                let slice: Slice = slice.parse()?;
                let criterion: Criterion = criterion.parse()?;
                let v = number()?;
                if !(1.0..=10.0).contains(&v) {
                    return Err(bad(format!("priority {v} outside [1, 10]")));
                }
                self.priorities[slice as usize][criterion.index()] = v;
                Ok(true)
            }
            ["level1", criterion, alternative] => {
                let criterion: Criterion = criterion.parse()?;
                let alternative: Alternative = alternative.parse()?;
                let v = number()?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(bad(format!("weight {v} outside [0, 1]")));
                }
                self.level1[alternative.index()][criterion.index()] = v;
                Ok(true)
            }
            ["slice", ..] | ["level1", ..] => Err(bad("unrecognised key".into())),
            _ => Ok(false),
        }
    }

    pub fn validate(&self) -> Result<(), AhpError> {
        for criterion in Criterion::ALL {
            let sum: f64 = self.level1.iter().map(|r| r[criterion.index()]).sum();
            if (sum - 1.0).abs() > 0.02 {
                return Err(AhpError::Level1Sum { criterion, sum });
            }
        }
        Ok(())
    }

    /// Entries in data-file syntax, for echoing the effective config.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for slice in Slice::ALL {
            for c in Criterion::ALL {
                out.push((
                    format!("slice.{}.priority.{}", slice.key(), c.key()),
                    self.priorities[slice as usize][c.index()].to_string(),
                ));
            }
        }
        for c in Criterion::ALL {
            for a in Alternative::ALL {
                out.push((
                    format!("level1.{}.{}", c.key(), a.key()),
                    self.level1[a.index()][c.index()].to_string(),
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_defaults() {
        let d = AhpData::default();
        assert_eq!(d.priorities[Slice::Embb as usize], [10.0, 5.0, 2.0, 1.0]);
        assert_eq!(d.priorities[Slice::Urllc as usize], [3.0, 6.0, 7.0, 1.0]);
        assert_eq!(d.priorities[Slice::Mmtc as usize], [1.0, 3.0, 6.0, 9.0]);
        assert_eq!(d.level1, tables::PRINTED_LEVEL1);
    }

    #[test]
    fn override_and_reject() {
        let d = AhpData::from_text("slice.mmtc.priority.jitter = 4\n").unwrap();
        assert_eq!(d.priorities[Slice::Mmtc as usize][3], 4.0);
        assert!(AhpData::from_text("slice.mmtc.priority.jitter = 11").is_err());
        assert!(AhpData::from_text("slice.foo.priority.jitter = 2").is_err());
        assert!(AhpData::from_text("level1.jitter.lte = 0.9").is_err());
        assert!(AhpData::from_text("engine.runs = 3").is_err());
    }

    #[test]
    fn entries_roundtrip() {
        let d = AhpData::default();
        let text: String = d
            .entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        assert_eq!(AhpData::from_text(&text).unwrap(), d);
    }
}
