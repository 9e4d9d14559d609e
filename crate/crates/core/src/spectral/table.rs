use serde::{Deserialize, Serialize};

use crate::quadrature::{fixed_rule, GAUSS3, GAUSS8};
use crate::{Error, Result};

/// Tabulated spectral density with a monotone piecewise-cubic (PCHIP)
/// interpolant. Outside `[omega[0], omega[last]]` the density is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct Table {
    omega: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawTable {
    omega: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawTable> for Table {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        Table::new(raw.omega, raw.values)
    }
}

impl From<Table> for RawTable {
    fn from(t: Table) -> Self {
        RawTable {
            omega: t.omega,
            values: t.values,
        }
    }
}

/// Cubic on one interval in the local coordinate `t = x - x_k`.
#[derive(Clone, Copy, Debug)]
struct Piece {
    x0: f64,
    h: f64,
    c: [f64; 4],
}

impl Piece {
    #[inline]
    fn eval_local(&self, t: f64) -> f64 {
        let [c0, c1, c2, c3] = self.c;
        c0 + t * (c1 + t * (c2 + t * c3))
    }

    /// `∫_0^h (p(t) - p(s)) / (t - s) dt`, exact.
    #[inline]
    fn divided_integral(&self, s: f64) -> f64 {
        let [_, c1, c2, c3] = self.c;
        let h = self.h;
        c1 * h + c2 * (0.5 * h * h + s * h) + c3 * (h * h * h / 3.0 + 0.5 * s * h * h + s * s * h)
    }
}

impl Table {
    /// Build a table. The grid must be strictly increasing and finite, values
    /// finite and nonnegative, with at least two samples.
    pub fn new(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omega.len() != values.len() {
            return Err(Error::invalid(format!(
                "grid has {} points but {} values",
                omega.len(),
                values.len()
            )));
        }
        if omega.len() < 2 {
            return Err(Error::invalid("tabulated SD needs at least two samples"));
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("non-finite grid point"));
        }
        if let Some(w) = omega.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::invalid(format!(
                "grid not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!("SD value {v} is negative or non-finite")));
        }
        let slopes = pchip_slopes(&omega, &values);
        Ok(Table {
            omega,
            values,
            slopes,
        })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    fn piece(&self, k: usize) -> Piece {
        let h = self.omega[k + 1] - self.omega[k];
        let delta = (self.values[k + 1] - self.values[k]) / h;
        let d0 = self.slopes[k];
        let d1 = self.slopes[k + 1];
        Piece {
            x0: self.omega[k],
            h,
            c: [
                self.values[k],
                d0,
                (3.0 * delta - 2.0 * d0 - d1) / h,
                (d0 + d1 - 2.0 * delta) / (h * h),
            ],
        }
    }

    fn pieces(&self) -> impl Iterator<Item = Piece> + '_ {
        (0..self.omega.len() - 1).map(|k| self.piece(k))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if !(x >= a && x <= b) {
            return 0.0;
        }
        let k = self
            .omega
            .partition_point(|&w| w <= x)
            .saturating_sub(1)
            .min(self.omega.len() - 2);
        let p = self.piece(k);
        p.eval_local(x - p.x0).max(0.0)
    }

    /// `∫ x^power J(x) dx` over the support; exact for the cubic interpolant
    /// (power ≤ 2).
    pub fn moment(&self, power: i32) -> f64 {
        self.pieces()
            .map(|p| {
                fixed_rule(
                    &GAUSS3,
                    |x| x.powi(power) * p.eval_local(x - p.x0),
                    p.x0,
                    p.x0 + p.h,
                )
            })
            .sum()
    }

    /// Cauchy principal value `P ∫ J(x) / (x - y) dx` over the support.
    ///
    /// Uses global singularity subtraction. Intervals within two widths of `y`
    /// are integrated in closed form (the interpolant is cubic); the rest with
    /// an 8-point Gauss rule. Returns ±∞ at a support edge where `J ≠ 0`.
    pub fn principal_value(&self, y: f64) -> f64 {
        let (a, b) = self.support();
        let jy = self.eval(y);
        let inside = y > a && y < b;
        let mut total = 0.0;
        for p in self.pieces() {
            let s = y - p.x0;
            if s >= -2.0 * p.h && s <= 3.0 * p.h {
                let mut term = p.divided_integral(s);
                let contains = s >= 0.0 && s <= p.h;
                if !contains {
                    let ps = p.eval_local(s);
                    let log = ((p.h - s).abs() / s.abs()).ln();
                    term += (ps - jy) * log;
                }
                total += term;
            } else {
                total += fixed_rule(
                    &GAUSS8,
                    |x| (p.eval_local(x - p.x0) - jy) / (x - y),
                    p.x0,
                    p.x0 + p.h,
                );
            }
        }
        if jy != 0.0 {
            if inside {
                total += jy * ((b - y) / (y - a)).ln();
            } else if y == a {
                return f64::NEG_INFINITY;
            } else if y == b {
                return f64::INFINITY;
            }
        }
        total
    }
}

/// Fritsch-Carlson slopes with the non-centred three-point end condition.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (d0, d1) = (delta[k - 1], delta[k]);
        if d0 * d1 > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}
