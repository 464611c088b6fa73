//! Jump discontinuities: locations on the circle and their heights.

use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let two_pi = 2.0 * PI;
    let mut y = (x + PI).rem_euclid(two_pi) - PI;
    if y <= -PI {
        y += two_pi;
    }
    y
}

/// Distance between two angles on the circle of circumference 2π.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// A single discontinuity: `height = f(x⁺) − f(x⁻)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Jump {
    pub location: f64,
    pub height: f64,
}

/// Jumps sorted by location in `(-π, π]`, with strictly increasing locations
/// and non-zero heights.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<Jump>", into = "Vec<Jump>")]
pub struct JumpSet {
    entries: Vec<Jump>,
}

impl JumpSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates and sorts. Locations are wrapped into `(-π, π]` first.
    pub fn new(jumps: impl IntoIterator<Item = Jump>) -> Result<Self> {
        let mut entries: Vec<Jump> = jumps
            .into_iter()
            .map(|j| Jump { location: wrap_angle(j.location), height: j.height })
            .collect();
        for j in &entries {
            if !j.location.is_finite() || !j.height.is_finite() {
                return Err(Error::InvalidSpec("non-finite jump entry".into()));
            }
            if j.height == 0.0 {
                return Err(Error::InvalidSpec(format!("zero-height jump at {}", j.location)));
            }
        }
        entries.sort_by(|a, b| a.location.total_cmp(&b.location));
        if entries.windows(2).any(|w| w[0].location >= w[1].location) {
            return Err(Error::InvalidSpec("jump locations must be distinct".into()));
        }
        Ok(Self { entries })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(location, height)| Jump { location, height }))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Jump> {
        self.entries.iter()
    }

    pub fn locations(&self) -> Vec<f64> {
        self.entries.iter().map(|j| j.location).collect()
    }

    pub fn heights(&self) -> Vec<f64> {
        self.entries.iter().map(|j| j.height).collect()
    }

    pub fn total_abs_height(&self) -> f64 {
        self.entries.iter().map(|j| j.height.abs()).sum()
    }

    /// Drops entries with `|height| < threshold`.
    pub fn filter_small(&self, threshold: f64) -> JumpSet {
        JumpSet {
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|j| j.height.abs() >= threshold)
                .collect(),
        }
    }

    /// Writes `location,height` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["location", "height"])?;
        for j in &self.entries {
            w.write_record([j.location.to_string(), j.height.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut out = Vec::new();
        for rec in r.deserialize() {
            let j: Jump = rec?;
            out.push(j);
        }
        Self::new(out)
    }
}

impl TryFrom<Vec<Jump>> for JumpSet {
    type Error = Error;

    fn try_from(v: Vec<Jump>) -> Result<Self> {
        JumpSet::new(v)
    }
}

impl From<JumpSet> for Vec<Jump> {
    fn from(s: JumpSet) -> Self {
        s.entries
    }
}

impl<'a> IntoIterator for &'a JumpSet {
    type Item = &'a Jump;
    type IntoIter = std::slice::Iter<'a, Jump>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_lands_in_half_open_interval() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(0.25 - 4.0 * PI) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn circular_distance_wraps() {
        assert!((circular_distance(PI - 0.1, -PI + 0.1) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn rejects_zero_height_and_duplicates() {
        assert!(JumpSet::from_pairs(&[(0.0, 0.0)]).is_err());
        assert!(JumpSet::from_pairs(&[(0.3, 1.0), (0.3, 2.0)]).is_err());
        let s = JumpSet::from_pairs(&[(1.0, 1.0), (-1.0, 2.0)]).unwrap();
        assert_eq!(s.locations(), vec![-1.0, 1.0]);
    }
}
