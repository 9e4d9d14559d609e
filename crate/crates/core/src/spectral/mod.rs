//! Spectral densities and the fermionic reaction-coordinate mapping.
//!
//! A spectral density (hybridization function) `J(ω)` fully characterises how
//! a free-fermion bath couples to an impurity. The RC mapping extracts one
//! collective bath mode with coupling `λ` and energy `E`, leaving a residual
//! bath with density `J₁(ω) = 4λ² J(ω) / |W⁺(ω)|²`, where `W⁺` is the boundary
//! value of the Cauchy transform of `J`.

mod io;
mod mapping;
mod table;

pub use io::{read_chain_csv, read_table_csv, write_chain_csv, write_table_csv};
pub use mapping::{
    iterate_chain, rc_map, rc_map_quadrature, rc_map_with, MappingOptions, RcLevel,
    BREAKDOWN_TOLERANCE,
};
pub use table::Table;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::quadrature::{integrate, principal_value, Tolerance};
use crate::{Error, Result, C64};

/// Default half-width of the Lorentzian quadrature window, in units of `Δ`.
pub const DEFAULT_CUTOFF: f64 = 50.0;

fn default_cutoff() -> f64 {
    DEFAULT_CUTOFF
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralDensity {
    /// `Γ Δ² / ((ω - ω₀)² + Δ²)`; `cutoff` sets the quadrature window
    /// `[ω₀ - cutoff·Δ, ω₀ + cutoff·Δ]`.
    Lorentzian {
        gamma: f64,
        width: f64,
        center: f64,
        #[serde(default = "default_cutoff")]
        cutoff: f64,
    },
    /// Constant `height` on `[lower, upper]`, zero outside.
    Flat { height: f64, lower: f64, upper: f64 },
    /// `sqrt(radius² - (ω - center)²)` on `|ω - center| ≤ radius`.
    Semicircle { center: f64, radius: f64 },
    Tabulated(Table),
}

impl SpectralDensity {
    pub fn lorentzian(gamma: f64, width: f64, center: f64) -> Self {
        SpectralDensity::Lorentzian {
            gamma,
            width,
            center,
            cutoff: DEFAULT_CUTOFF,
        }
    }

    pub fn flat(height: f64, lower: f64, upper: f64) -> Self {
        SpectralDensity::Flat {
            height,
            lower,
            upper,
        }
    }

    pub fn semicircle(center: f64, radius: f64) -> Self {
        SpectralDensity::Semicircle { center, radius }
    }

    pub fn tabulated(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(SpectralDensity::Tabulated(Table::new(omega, values)?))
    }

    /// Check parameter invariants (positivity, ordered support).
    pub fn validate(&self) -> Result<()> {
        match *self {
            SpectralDensity::Lorentzian {
                gamma,
                width,
                center,
                cutoff,
            } => {
                if !(gamma >= 0.0 && width > 0.0 && center.is_finite() && cutoff > 0.0) {
                    return Err(Error::invalid(format!(
                        "lorentzian needs Γ ≥ 0, Δ > 0, cutoff > 0 (got Γ={gamma}, Δ={width}, cutoff={cutoff})"
                    )));
                }
            }
            SpectralDensity::Flat {
                height,
                lower,
                upper,
            } => {
                if !(height >= 0.0 && lower < upper && lower.is_finite() && upper.is_finite()) {
                    return Err(Error::invalid(format!(
                        "flat SD needs height ≥ 0 on a finite interval (got {height} on [{lower}, {upper}])"
                    )));
                }
            }
            SpectralDensity::Semicircle { center, radius } => {
                if !(radius > 0.0 && center.is_finite()) {
                    return Err(Error::invalid(format!("semicircle radius {radius} must be > 0")));
                }
            }
            SpectralDensity::Tabulated(_) => {}
        }
        Ok(())
    }

    /// `J(ω)`. Exactly zero outside the declared support for flat, semicircle
    /// and tabulated kinds; the Lorentzian is evaluated on the whole line.
    pub fn eval(&self, omega: f64) -> f64 {
        match *self {
            SpectralDensity::Lorentzian {
                gamma,
                width,
                center,
                ..
            } => {
                let x = omega - center;
                gamma * width * width / (x * x + width * width)
            }
            SpectralDensity::Flat {
                height,
                lower,
                upper,
            } => {
                if omega >= lower && omega <= upper {
                    height
                } else {
                    0.0
                }
            }
            SpectralDensity::Semicircle { center, radius } => {
                let x = omega - center;
                (radius * radius - x * x).max(0.0).sqrt()
            }
            SpectralDensity::Tabulated(ref t) => t.eval(omega),
        }
    }

    /// Support used for quadrature. For the Lorentzian this is the cutoff
    /// window.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            SpectralDensity::Lorentzian {
                width,
                center,
                cutoff,
                ..
            } => (center - cutoff * width, center + cutoff * width),
            SpectralDensity::Flat { lower, upper, .. } => (lower, upper),
            SpectralDensity::Semicircle { center, radius } => (center - radius, center + radius),
            SpectralDensity::Tabulated(ref t) => t.support(),
        }
    }

    /// Whether `J` vanishes identically outside [`support`](Self::support).
    pub fn is_compact(&self) -> bool {
        !matches!(self, SpectralDensity::Lorentzian { .. })
    }

    /// Points where `J` has kinks or peaks, for splitting quadrature.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            SpectralDensity::Lorentzian { center, .. } => vec![center],
            SpectralDensity::Semicircle { center, .. } => vec![center],
            _ => Vec::new(),
        }
    }

    /// Total weight `∫ J dω / 2π` (whole line for the Lorentzian).
    pub fn weight(&self) -> f64 {
        match *self {
            SpectralDensity::Lorentzian { gamma, width, .. } => 0.5 * gamma * width,
            SpectralDensity::Flat {
                height,
                lower,
                upper,
            } => height * (upper - lower) / (2.0 * PI),
            SpectralDensity::Semicircle { radius, .. } => 0.25 * radius * radius,
            SpectralDensity::Tabulated(ref t) => t.moment(0) / (2.0 * PI),
        }
    }

    /// `∫ ω J dω / 2π` (symmetric principal value for the Lorentzian).
    pub fn first_moment(&self) -> f64 {
        match *self {
            SpectralDensity::Lorentzian { center, .. } => center * self.weight(),
            SpectralDensity::Flat {
                height,
                lower,
                upper,
            } => height * (upper * upper - lower * lower) / (4.0 * PI),
            SpectralDensity::Semicircle { center, .. } => center * self.weight(),
            SpectralDensity::Tabulated(ref t) => t.moment(1) / (2.0 * PI),
        }
    }

    /// Weight of the Lorentzian outside its cutoff window, `∫ J dω / 2π`
    /// over the tails. Zero for compact kinds.
    pub fn tail_weight(&self) -> f64 {
        match *self {
            SpectralDensity::Lorentzian {
                gamma,
                width,
                cutoff,
                ..
            } => gamma * width / PI * (0.5 * PI - cutoff.atan()),
            _ => 0.0,
        }
    }

    /// Contribution of the Lorentzian tails outside the cutoff window to
    /// `P ∫ dω'/π J(ω') / (ω' - ω)`. Zero for compact kinds.
    pub fn tail_cauchy(&self, omega: f64) -> f64 {
        match *self {
            SpectralDensity::Lorentzian {
                gamma,
                width,
                center,
                cutoff,
            } => {
                let s = omega - center;
                let u = cutoff * width;
                let k = gamma * width * width / (s * s + width * width);
                let log = ((u + s) / (u - s)).abs().ln();
                k * (log - s / width * (PI - 2.0 * (u / width).atan())) / PI
            }
            _ => 0.0,
        }
    }

    /// Boundary value of the Cauchy transform,
    /// `W⁺(ω) = i J(ω) + P ∫ dω'/π J(ω') / (ω' - ω)`.
    ///
    /// Closed forms are used for the Lorentzian (whole line), flat and
    /// semicircle kinds; tabulated densities use piecewise-exact principal
    /// values of the cubic interpolant. The real part is ±∞ at a support
    /// edge where `J` jumps.
    pub fn cauchy_plus(&self, omega: f64) -> C64 {
        let re = match *self {
            SpectralDensity::Lorentzian {
                gamma,
                width,
                center,
                ..
            } => {
                let x = omega - center;
                -gamma * width * x / (x * x + width * width)
            }
            SpectralDensity::Flat {
                height,
                lower,
                upper,
            } => height / PI * ((upper - omega).abs() / (lower - omega).abs()).ln(),
            SpectralDensity::Semicircle { center, radius } => {
                let y = omega - center;
                if y.abs() <= radius {
                    -y
                } else {
                    -(y - y.signum() * (y * y - radius * radius).sqrt())
                }
            }
            SpectralDensity::Tabulated(ref t) => t.principal_value(omega) / PI,
        };
        C64::new(re, self.eval(omega))
    }

    /// `W⁺(ω)` by adaptive principal-value quadrature over the support,
    /// independent of the closed forms. Lorentzian tails beyond the cutoff
    /// window are added analytically.
    pub fn cauchy_plus_quadrature(&self, omega: f64, tol: Tolerance) -> Result<C64> {
        let (a, b) = self.support();
        let mut breaks = self.breakpoints();
        if let SpectralDensity::Tabulated(ref t) = *self {
            breaks.extend_from_slice(t.omega());
        }
        // Relative accuracy is measured against the overall SD scale: near a
        // symmetry point the principal value itself vanishes.
        let tol = Tolerance {
            abs: tol.abs.max(tol.rel * 2.0 * PI * self.weight()),
            ..tol
        };
        let pv = principal_value(|x| self.eval(x), a, b, omega, &breaks, tol)?;
        Ok(C64::new(
            pv.value / PI + self.tail_cauchy(omega),
            self.eval(omega),
        ))
    }

    /// `(∫ J dω/2π, ∫ ω J dω/2π)` over the support by adaptive quadrature.
    pub fn moments_quadrature(&self, tol: Tolerance) -> Result<(f64, f64)> {
        let (a, b) = self.support();
        let mut points = vec![a];
        let mut breaks = self.breakpoints();
        if let SpectralDensity::Tabulated(ref t) = *self {
            breaks.extend_from_slice(t.omega());
        }
        points.extend(breaks.into_iter().filter(|&x| x > a && x < b));
        points.push(b);
        points.sort_by(f64::total_cmp);
        points.dedup();
        let w0 = integrate(|x| self.eval(x), &points, tol)?.value / (2.0 * PI);
        let w1 = integrate(|x| x * self.eval(x), &points, tol)?.value / (2.0 * PI);
        Ok((w0, w1))
    }

    /// Sample onto a grid as a tabulated density.
    pub fn tabulate(&self, grid: &[f64]) -> Result<SpectralDensity> {
        let values = grid.iter().map(|&w| self.eval(w)).collect();
        SpectralDensity::tabulated(grid.to_vec(), values)
    }

    /// Largest `|J - other|` over `samples` equispaced points in `[lo, hi]`.
    pub fn sup_distance(&self, other: &SpectralDensity, lo: f64, hi: f64, samples: usize) -> f64 {
        let n = samples.max(2);
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .map(|w| (self.eval(w) - other.eval(w)).abs())
            .fold(0.0, f64::max)
    }
}

/// Chebyshev-Lobatto nodes on `[a, b]`, clustered at both edges.
pub fn chebyshev_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut g: Vec<f64> = (0..n)
        .map(|j| c - r * (PI * j as f64 / (n - 1) as f64).cos())
        .collect();
    g[0] = a;
    g[n - 1] = b;
    // Exact symmetry about the centre.
    for j in 0..n / 2 {
        let d = 0.5 * (g[n - 1 - j] - g[j]);
        g[j] = c - d;
        g[n - 1 - j] = c + d;
    }
    if n % 2 == 1 {
        g[n / 2] = c;
    }
    g
}

/// Grid uniform in `atan((ω - center)/width)` over `center ± cutoff·width`,
/// dense near a Lorentzian peak.
pub fn lorentzian_grid(center: f64, width: f64, cutoff: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let t = cutoff.atan();
    let mut g: Vec<f64> = (0..n)
        .map(|j| {
            let theta = -t + 2.0 * t * j as f64 / (n - 1) as f64;
            center + width * theta.tan()
        })
        .collect();
    g[0] = center - cutoff * width;
    g[n - 1] = center + cutoff * width;
    if n % 2 == 1 {
        g[n / 2] = center;
    }
    g
}
