//! Concave, nondecreasing value functions and the two reductions that turn
//! an arbitrary tabulated value function into one.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A function tabulated on strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulation {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Tabulation {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::InvalidInput("tabulation needs matching, nonempty x and y"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("tabulation values must be finite"));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("tabulation abscissae must be strictly increasing"));
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }
}

/// Least concave majorant, evaluated at the input abscissae.
///
/// Hull vertices keep their input value exactly; the other points get the
/// chord through the neighbouring vertices.
pub fn least_concave_majorant(points: &Tabulation) -> Tabulation {
    let (xs, ys) = (&points.xs, &points.ys);
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // b strictly below the chord a -> i
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross > 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = ys.clone();
    for pair in hull.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        for i in a + 1..b {
            let t = (xs[i] - xs[a]) / (xs[b] - xs[a]);
            out[i] = (ys[a] + t * (ys[b] - ys[a])).max(ys[i]);
        }
    }
    Tabulation { xs: xs.clone(), ys: out }
}

/// Running maximum from the left: `sup_{y <= x} v(y)`.
pub fn monotone_envelope(v: &Tabulation) -> Tabulation {
    let mut best = f64::NEG_INFINITY;
    let ys =
        v.ys.iter()
            .map(|y| {
                best = best.max(*y);
                best
            })
            .collect();
    Tabulation { xs: v.xs.clone(), ys }
}

/// Piecewise-linear, concave, nondecreasing value function on knots
/// `0 = x_0 < x_1 < ... < x_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PLCValue {
    knots: Vec<f64>,
    values: Vec<f64>,
    // slopes[k] is the left slope at knot k; slopes[0] = +inf.
    slopes: Vec<f64>,
}

const SHAPE_TOL: f64 = 1e-9;

impl PLCValue {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let tab = Tabulation::new(knots, values)?;
        Self::from_tabulation(tab)
    }

    pub fn from_tabulation(tab: Tabulation) -> Result<Self> {
        let Tabulation { xs: knots, ys: values } = tab;
        if knots[0] != 0.0 {
            return Err(Error::InvalidInput("first knot must be zero"));
        }
        let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let mut slopes = Vec::with_capacity(knots.len());
        slopes.push(f64::INFINITY);
        for k in 1..knots.len() {
            let dv = values[k] - values[k - 1];
            if dv < -SHAPE_TOL * scale {
                return Err(Error::InvalidInput("value function must be nondecreasing"));
            }
            let s = (dv / (knots[k] - knots[k - 1])).max(0.0);
            let prev = slopes[k - 1];
            if s > prev * (1.0 + SHAPE_TOL) + SHAPE_TOL * scale {
                return Err(Error::InvalidInput("value function must be concave"));
            }
            // absorb rounding so slopes are exactly nonincreasing
            slopes.push(s.min(prev));
        }
        Ok(Self { knots, values, slopes })
    }

    /// Envelope followed by concave majorant of an arbitrary tabulation
    /// starting at zero.
    pub fn concavify(tab: &Tabulation) -> Result<Self> {
        Self::from_tabulation(least_concave_majorant(&monotone_envelope(tab)))
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Left slopes, `slopes()[0] == +inf`.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn top(&self) -> f64 {
        *self.knots.last().expect("nonempty")
    }

    /// Index of the leftmost knot attaining the maximum value, i.e. the last
    /// knot with a positive left slope.
    pub fn top_useful_index(&self) -> usize {
        self.slopes.iter().rposition(|s| *s > 0.0).unwrap_or(0)
    }

    /// Linear interpolation; constant beyond the last knot.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.values[0];
        }
        let k = self.knots.partition_point(|k| *k < x);
        if k >= self.knots.len() {
            return *self.values.last().expect("nonempty");
        }
        if self.knots[k] == x {
            return self.values[k];
        }
        let t = (x - self.knots[k - 1]) / (self.knots[k] - self.knots[k - 1]);
        self.values[k - 1] + t * (self.values[k] - self.values[k - 1])
    }
}
