//! Point sets on the torus `T = R / 2πZ`.
//!
//! Frequencies live here. Everything is value-typed and canonicalized into
//! `[0, 2π)`, so distances never have to think about representatives.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Values this close below `2π` collapse onto `0`.
const WRAP_SNAP: f64 = 1e-12;

/// A point of the torus, stored as its representative in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(into = "f64", try_from = "f64")]
pub struct TorusPoint(f64);

impl TorusPoint {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(invalid(format!("torus point must be finite, got {value}")));
        }
        Ok(Self(canonicalize(value)))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Wrap-around distance `|self - other|_T`, always in `[0, π]`.
    pub fn distance(self, other: TorusPoint) -> f64 {
        circ_dist(self.0, other.0)
    }

    /// Rotate by `shift` radians.
    pub fn shifted(self, shift: f64) -> Result<Self> {
        Self::new(self.0 + shift)
    }
}

impl From<TorusPoint> for f64 {
    fn from(p: TorusPoint) -> f64 {
        p.0
    }
}

impl TryFrom<f64> for TorusPoint {
    type Error = crate::Error;
    fn try_from(v: f64) -> Result<Self> {
        TorusPoint::new(v)
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Floor-division remainder into `[0, 2π)`; anything within `1e-12` of `2π` maps to `0`.
pub fn canonicalize(value: f64) -> f64 {
    let r = value.rem_euclid(TAU);
    if r >= TAU - WRAP_SNAP {
        0.0
    } else {
        r
    }
}

#[inline]
pub(crate) fn circ_dist(u: f64, v: f64) -> f64 {
    let d = (u - v).rem_euclid(TAU);
    d.min(TAU - d)
}

/// `|u - v|_T = min_l |u - v + 2πl|`.
pub fn wrap_distance(u: f64, v: f64) -> Result<f64> {
    if !u.is_finite() || !v.is_finite() {
        return Err(invalid(format!("wrap_distance needs finite inputs, got ({u}, {v})")));
    }
    Ok(circ_dist(u, v))
}

/// A nonempty set of distinct torus points kept in strictly increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct FrequencySet {
    points: Vec<TorusPoint>,
}

impl FrequencySet {
    /// Canonicalizes and sorts `values`. Fails on an empty input, non-finite
    /// values, or two values that coincide on the torus.
    pub fn new(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut points = values
            .into_iter()
            .map(TorusPoint::new)
            .collect::<Result<Vec<_>>>()?;
        if points.is_empty() {
            return Err(invalid("frequency set must contain at least one point"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("frequency set contains duplicate points"));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[TorusPoint] {
        &self.points
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    /// Minimum pairwise wrap distance `Δ(x)`.
    ///
    /// Points are sorted, so only neighbours (plus the wrap gap between the
    /// last and first point) need checking. A singleton returns `2π`.
    pub fn min_separation(&self) -> f64 {
        let p = &self.points;
        if p.len() < 2 {
            return TAU;
        }
        let inner = p
            .windows(2)
            .map(|w| circ_dist(w[0].0, w[1].0))
            .fold(f64::INFINITY, f64::min);
        inner.min(circ_dist(p[p.len() - 1].0, p[0].0))
    }

    /// Every point rotated by `shift`.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        Self::new(self.iter().map(|v| v + shift))
    }
}

impl From<FrequencySet> for Vec<f64> {
    fn from(x: FrequencySet) -> Vec<f64> {
        x.values()
    }
}

impl TryFrom<Vec<f64>> for FrequencySet {
    type Error = crate::Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        FrequencySet::new(v)
    }
}

/// Free-function form of [`FrequencySet::min_separation`].
pub fn min_separation(x: &FrequencySet) -> f64 {
    x.min_separation()
}

/// `min_σ max_j |x_j - y_σ(j)|_T` over all bijections σ.
///
/// For circularly sorted sets the bottleneck matching is attained by a cyclic
/// shift of the sorted order, so this scans the `r` shifts in `O(r²)`.
pub fn matching_distance_inf(x: &FrequencySet, y: &FrequencySet) -> Result<f64> {
    let r = x.len();
    if r != y.len() {
        return Err(invalid(format!(
            "matching distance needs equal cardinalities, got {} and {}",
            r,
            y.len()
        )));
    }
    let (xs, ys) = (x.points(), y.points());
    let mut best = PI;
    for shift in 0..r {
        let mut worst = 0.0_f64;
        for j in 0..r {
            worst = worst.max(xs[j].distance(ys[(j + shift) % r]));
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);
    }
    Ok(best)
}
