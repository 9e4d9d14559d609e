//! Exact steady-state currents of a spinless level between two Lorentzian
//! leads (single-electron transistor), by direct quadrature of the
//! Landauer-type formula
//!
//! `I_M = ∫ (2 dω/π) J_L J_R (f_L - f_R) / ([J_L + J_R]² + 4[ω - ε - Σ]²)`
//!
//! with `Σ = Σ_L + Σ_R` the Lorentzian level shifts. `I_E` carries an extra
//! factor `ω`. Both are the flows out of the left lead.

use serde::{Deserialize, Serialize};

use crate::fock::Reservoir;
use crate::quadrature::{integrate, Tolerance};
use crate::redfield::fermi;
use crate::spectral::{SpectralDensity, DEFAULT_CUTOFF};
use crate::{Error, Result};

/// Fermi tails are integrated out to `μ ± FERMI_WINDOW / β`.
pub const FERMI_WINDOW: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lead {
    pub gamma: f64,
    pub width: f64,
    pub center: f64,
    pub beta: f64,
    pub mu: f64,
}

impl Lead {
    pub fn sd(&self, cutoff: f64) -> SpectralDensity {
        SpectralDensity::Lorentzian {
            gamma: self.gamma,
            width: self.width,
            center: self.center,
            cutoff,
        }
    }

    pub fn eval(&self, omega: f64) -> f64 {
        let x = omega - self.center;
        self.gamma * self.width * self.width / (x * x + self.width * self.width)
    }

    pub fn reservoir(&self, label: &str, cutoff: f64) -> Reservoir {
        Reservoir::new(label, self.beta, self.mu, self.sd(cutoff))
    }
}

/// Closed-form level shift of a Lorentzian lead,
/// `ΓΔ(ω - ω₀) / (2[(ω - ω₀)² + Δ²])`.
pub fn lamb_shift(lead: &Lead, omega: f64) -> f64 {
    let x = omega - lead.center;
    lead.gamma * lead.width * x / (2.0 * (x * x + lead.width * lead.width))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetParams {
    pub eps: f64,
    pub left: Lead,
    pub right: Lead,
    /// Lorentzian window half-width in units of the width.
    pub cutoff: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl SetParams {
    /// Benchmark device: `ε = ω₀ = 1`, `Δ = 0.1`, `β = 1`, `μ_L = 1 = -μ_R`,
    /// both leads with `Γ = beta_gamma / β`.
    pub fn benchmark(beta_gamma: f64) -> Self {
        let beta = 1.0;
        let lead = |mu| Lead {
            gamma: beta_gamma / beta,
            width: 0.1,
            center: 1.0,
            beta,
            mu,
        };
        SetParams {
            eps: 1.0,
            left: lead(1.0),
            right: lead(-1.0),
            cutoff: DEFAULT_CUTOFF,
            abs_tol: 0.0,
            rel_tol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, l) in [("left", &self.left), ("right", &self.right)] {
            if !(l.gamma > 0.0 && l.width > 0.0 && l.beta > 0.0) {
                return Err(Error::invalid(format!("{name} lead needs Γ, Δ, β > 0")));
            }
        }
        if !(self.rel_tol > 0.0 || self.abs_tol > 0.0) || self.abs_tol < 0.0 || self.rel_tol < 0.0 {
            return Err(Error::invalid("quadrature tolerance must be positive"));
        }
        if !(self.cutoff > 0.0) {
            return Err(Error::invalid("cutoff must be positive"));
        }
        Ok(())
    }

    pub fn swapped(&self) -> Self {
        SetParams {
            left: self.right,
            right: self.left,
            ..*self
        }
    }

    /// Integration window.
    pub fn window(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for l in [&self.left, &self.right] {
            lo = lo.min(l.center - self.cutoff * l.width).min(l.mu - FERMI_WINDOW / l.beta);
            hi = hi.max(l.center + self.cutoff * l.width).max(l.mu + FERMI_WINDOW / l.beta);
        }
        (lo, hi)
    }

    /// Matter-current integrand; multiply by `ω` for the energy current.
    pub fn integrand(&self, omega: f64) -> f64 {
        let (l, r) = (&self.left, &self.right);
        let jl = l.eval(omega);
        let jr = r.eval(omega);
        let df = fermi(l.beta, l.mu, omega) - fermi(r.beta, r.mu, omega);
        if df == 0.0 {
            return 0.0;
        }
        let shift = omega - self.eps - lamb_shift(l, omega) - lamb_shift(r, omega);
        let s = jl + jr;
        2.0 / std::f64::consts::PI * jl * jr * df / (s * s + 4.0 * shift * shift)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.window();
        let mut pts = vec![lo, hi, self.eps, self.left.center, self.right.center, self.left.mu, self.right.mu];
        pts.retain(|&x| x >= lo && x <= hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetCurrents {
    pub matter: f64,
    pub energy: f64,
    pub matter_error: f64,
    pub energy_error: f64,
}

/// `(I_M, I_E)` by adaptive quadrature over [`SetParams::window`].
pub fn exact_currents(p: &SetParams) -> Result<SetCurrents> {
    p.validate()?;
    let pts = p.breakpoints();
    let tol = Tolerance {
        abs: p.abs_tol,
        rel: p.rel_tol,
        max_subdivisions: 20_000,
    };
    let m = integrate(|w| p.integrand(w), &pts, tol)?;
    let e = integrate(|w| w * p.integrand(w), &pts, tol)?;
    Ok(SetCurrents {
        matter: m.value,
        energy: e.value,
        matter_error: m.error,
        energy_error: e.error,
    })
}
