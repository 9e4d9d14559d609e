//! Born-Markov generator for an impurity coupled to several free-fermion
//! reservoirs:
//!
//! `dρ/dt = -i[H, ρ] + Σ_ν ([χ_ν†ρ, d_ν] + [d_ν†, ρχ_ν] + [θ_νρ, d_ν†] + [d_ν, ρθ_ν†])`
//!
//! with `χ = Σ_kl (J(ω_lk)/2) f(ω_lk) d_kl |k⟩⟨l|`, `θ` the same with `1 - f`,
//! and `ω_lk = E_l - E_k`.
//!
//! Everything is assembled in the eigenbasis of `H`. Because the models
//! conserve particle number the frame is built sector by sector, so it also
//! diagonalises `N`. Superoperators act on row-major vectorised density
//! matrices, index `i * D + j` for `ρ_ij`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::fock::{ImpurityModel, Reservoir};
use crate::quadrature::{principal_value, Tolerance};
use crate::spectral::SpectralDensity;
use crate::{CMatrix, Error, Result, C64};

/// Largest Hilbert-space dimension for which the dense superoperator is built.
pub const MAX_DENSE_DIM: usize = 32;
/// Bohr frequencies closer than this times `max|E|` are grouped as equal.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Fermi-Dirac occupation, safe for large `|β(ω - μ)|`.
pub fn fermi(beta: f64, mu: f64, omega: f64) -> f64 {
    let x = beta * (omega - mu);
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Generator variants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Flags {
    pub lamb_shift: bool,
    pub secular: bool,
}

/// Eigenbasis of a number-conserving Hamiltonian.
#[derive(Clone, Debug)]
pub struct EigenFrame {
    /// Columns are eigenvectors in the occupation basis.
    pub unitary: CMatrix,
    pub energies: Vec<f64>,
    /// Particle number of each eigenvector.
    pub particles: Vec<u32>,
}

impl EigenFrame {
    /// Diagonalise `h` within each particle-number sector of the occupation
    /// basis. Eigenvectors are ordered by particle number, then energy.
    pub fn new(h: &CMatrix) -> Result<Self> {
        let dim = h.nrows();
        if h.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two(),
                found: h.ncols(),
            });
        }
        let n_modes = dim.trailing_zeros();
        let mut unitary = CMatrix::zeros(dim, dim);
        let mut energies = Vec::with_capacity(dim);
        let mut particles = Vec::with_capacity(dim);
        let mut col = 0;
        for n in 0..=n_modes {
            let states: Vec<usize> = (0..dim).filter(|s| s.count_ones() == n).collect();
            let m = states.len();
            let block = CMatrix::from_fn(m, m, |r, c| h[(states[r], states[c])]);
            let eig = block.symmetric_eigen();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            for &k in &order {
                for (r, &s) in states.iter().enumerate() {
                    unitary[(s, col)] = eig.eigenvectors[(r, k)];
                }
                energies.push(eig.eigenvalues[k]);
                particles.push(n);
                col += 1;
            }
        }
        Ok(EigenFrame {
            unitary,
            energies,
            particles,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `U† A U`.
    pub fn to_eigen(&self, a: &CMatrix) -> CMatrix {
        self.unitary.adjoint() * a * &self.unitary
    }

    /// `U A U†`.
    pub fn to_site(&self, a: &CMatrix) -> CMatrix {
        &self.unitary * a * self.unitary.adjoint()
    }

    /// `ω_kl = E_k - E_l`.
    pub fn bohr(&self, k: usize, l: usize) -> f64 {
        self.energies[k] - self.energies[l]
    }

    pub fn energy_scale(&self) -> f64 {
        self.energies.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(f64::MIN_POSITIVE)
    }

    /// `max |U†U - 1|`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        let g = self.unitary.adjoint() * &self.unitary - CMatrix::identity(d, d);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Coefficients `(a, b)` multiplying `d_kl` in `χ` and `θ` at frequency `ω`.
///
/// Without the Lamb shift `a = J f / 2`, `b = J (1 - f) / 2`. With it,
/// `a += (i/2π) P∫ dx J(x) f(x) / (ω - x)` and likewise for `b`.
pub fn coefficients(res: &Reservoir, omega: f64, lamb_shift: bool, tol: Tolerance) -> Result<(C64, C64)> {
    let j = res.sd.eval(omega);
    let f = fermi(res.beta, res.mu, omega);
    let mut a = C64::new(0.5 * j * f, 0.0);
    let mut b = C64::new(0.5 * j * (1.0 - f), 0.0);
    if lamb_shift {
        let (pf, pg) = lamb_integrals(res, omega, tol)?;
        a.im = pf / (2.0 * PI);
        b.im = pg / (2.0 * PI);
    }
    Ok((a, b))
}

/// `(P∫ J f / (ω - x), P∫ J (1 - f) / (ω - x))` over the support of `J`.
fn lamb_integrals(res: &Reservoir, omega: f64, tol: Tolerance) -> Result<(f64, f64)> {
    let sd = &res.sd;
    let (lo, hi) = sd.support();
    let mut breaks = sd.breakpoints();
    breaks.push(res.mu);
    if let SpectralDensity::Tabulated(ref t) = *sd {
        breaks.extend_from_slice(t.omega());
    }
    let (beta, mu) = (res.beta, res.mu);
    let occupied = principal_value(|x| sd.eval(x) * fermi(beta, mu, x), lo, hi, omega, &breaks, tol)?;
    let empty = principal_value(|x| sd.eval(x) * (1.0 - fermi(beta, mu, x)), lo, hi, omega, &breaks, tol)?;
    Ok((-occupied.value, -empty.value))
}

/// Site-basis `(χ, θ)` for coupling operator `d` and reservoir `res`.
pub fn build_chi_theta(
    frame: &EigenFrame,
    d: &CMatrix,
    res: &Reservoir,
    flags: Flags,
) -> Result<(CMatrix, CMatrix)> {
    let de = frame.to_eigen(d);
    let piece = Piece::new(frame, de, res, flags, Tolerance::default())?;
    Ok((frame.to_site(&piece.chi), frame.to_site(&piece.theta)))
}

/// One nonzero transition `d_kl` with its frequency group.
#[derive(Clone, Copy, Debug)]
struct Transition {
    k: usize,
    l: usize,
    group: usize,
}

/// Eigenbasis operators for one reservoir.
#[derive(Clone, Debug)]
pub struct Piece {
    pub label: String,
    pub d: CMatrix,
    pub chi: CMatrix,
    pub theta: CMatrix,
    /// Secular form: `(d_g, a_g, b_g)` per Bohr-frequency group.
    groups: Option<Vec<(CMatrix, C64, C64)>>,
}

impl Piece {
    fn new(frame: &EigenFrame, d: CMatrix, res: &Reservoir, flags: Flags, tol: Tolerance) -> Result<Self> {
        let dim = frame.dim();
        let mut transitions: Vec<(Transition, f64)> = Vec::new();
        for k in 0..dim {
            for l in 0..dim {
                if d[(k, l)] != C64::new(0.0, 0.0) {
                    transitions.push((Transition { k, l, group: 0 }, frame.bohr(l, k)));
                }
            }
        }
        transitions.sort_by(|a, b| a.1.total_cmp(&b.1));
        let eps = DEGENERACY_TOLERANCE * frame.energy_scale();
        let mut reps: Vec<f64> = Vec::new();
        for (t, w) in transitions.iter_mut() {
            match reps.last() {
                Some(&r) if (*w - r).abs() < eps => {}
                _ => reps.push(*w),
            }
            t.group = reps.len() - 1;
        }
        let coeffs = reps
            .iter()
            .map(|&w| coefficients(res, w, flags.lamb_shift, tol))
            .collect::<Result<Vec<_>>>()?;

        let mut chi = CMatrix::zeros(dim, dim);
        let mut theta = CMatrix::zeros(dim, dim);
        for &(t, w) in &transitions {
            // J and f at the exact transition frequency; the principal value
            // is shared within a group.
            let (mut a, mut b) = coefficients(res, w, false, tol)?;
            a.im = coeffs[t.group].0.im;
            b.im = coeffs[t.group].1.im;
            chi[(t.k, t.l)] = a * d[(t.k, t.l)];
            theta[(t.k, t.l)] = b * d[(t.k, t.l)];
        }
        let groups = flags.secular.then(|| {
            let mut g: Vec<(CMatrix, C64, C64)> = coeffs
                .iter()
                .map(|&(a, b)| (CMatrix::zeros(dim, dim), a, b))
                .collect();
            for &(t, _) in &transitions {
                g[t.group].0[(t.k, t.l)] = d[(t.k, t.l)];
            }
            g
        });
        Ok(Piece {
            label: res.label.clone(),
            d,
            chi,
            theta,
            groups,
        })
    }

    /// Operator pairs `(χ, θ, d)` entering the eight dissipator terms: the
    /// full operators, or one triple per Bohr-frequency group when secular.
    fn triples(&self) -> Vec<(CMatrix, CMatrix, CMatrix)> {
        match &self.groups {
            None => vec![(self.chi.clone(), self.theta.clone(), self.d.clone())],
            Some(groups) => groups
                .iter()
                .map(|(dg, a, b)| (dg * *a, dg * *b, dg.clone()))
                .collect(),
        }
    }

    /// Apply this dissipator to an eigenbasis density matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        for (chi, theta, d) in self.triples() {
            let (chi_h, theta_h, d_h) = (chi.adjoint(), theta.adjoint(), d.adjoint());
            out += &chi_h * rho * &d - &d * &chi_h * rho + &d_h * rho * &chi - rho * &chi * &d_h
                + &theta * rho * &d_h
                - &d_h * &theta * rho
                + &d * rho * &theta_h
                - rho * &theta_h * &d;
        }
        out
    }

    fn add_to(&self, s: &mut CMatrix, dim: usize) {
        for (chi, theta, d) in self.triples() {
            let (chi_h, theta_h, d_h) = (chi.adjoint(), theta.adjoint(), d.adjoint());
            let one = C64::new(1.0, 0.0);
            add_sandwich(s, dim, &chi_h, &d, one);
            add_sandwich(s, dim, &d_h, &chi, one);
            add_sandwich(s, dim, &theta, &d_h, one);
            add_sandwich(s, dim, &d, &theta_h, one);
            add_left(s, dim, &(&d * &chi_h + &d_h * &theta), -one);
            add_right(s, dim, &(&chi * &d_h + &theta_h * &d), -one);
        }
    }
}

fn nonzeros(m: &CMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v != C64::new(0.0, 0.0) {
                out.push((r, c, v));
            }
        }
    }
    out
}

/// `ρ ↦ c A ρ B`: `S[(i,j),(k,l)] += c A_ik B_lj`.
fn add_sandwich(s: &mut CMatrix, dim: usize, a: &CMatrix, b: &CMatrix, c: C64) {
    let bn = nonzeros(b);
    for (i, k, aik) in nonzeros(a) {
        let aik = aik * c;
        for &(l, j, blj) in &bn {
            s[(i * dim + j, k * dim + l)] += aik * blj;
        }
    }
}

/// `ρ ↦ c M ρ`: `S[(i,j),(k,j)] += c M_ik`.
fn add_left(s: &mut CMatrix, dim: usize, m: &CMatrix, c: C64) {
    for (i, k, v) in nonzeros(m) {
        for j in 0..dim {
            s[(i * dim + j, k * dim + j)] += c * v;
        }
    }
}

/// `ρ ↦ c ρ M`: `S[(i,j),(i,l)] += c M_lj`.
fn add_right(s: &mut CMatrix, dim: usize, m: &CMatrix, c: C64) {
    for (l, j, v) in nonzeros(m) {
        for i in 0..dim {
            s[(i * dim + j, i * dim + l)] += c * v;
        }
    }
}

/// Dense generator in the eigenbasis together with its per-reservoir pieces.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    pub frame: EigenFrame,
    pub flags: Flags,
    pieces: Vec<Piece>,
    matrix: CMatrix,
}

impl Liouvillian {
    pub fn new(model: &ImpurityModel, flags: Flags) -> Result<Self> {
        Self::with_tolerance(model, flags, Tolerance::default())
    }

    /// Build with an explicit quadrature tolerance for the Lamb-shift
    /// principal values.
    pub fn with_tolerance(model: &ImpurityModel, flags: Flags, tol: Tolerance) -> Result<Self> {
        let dim = model.dim();
        if dim > MAX_DENSE_DIM {
            return Err(Error::invalid(format!(
                "Hilbert-space dimension {dim} exceeds the dense limit {MAX_DENSE_DIM}"
            )));
        }
        if model.attachments.is_empty() {
            return Err(Error::invalid("model has no reservoir attachments"));
        }
        for a in &model.attachments {
            if a.coupling.nrows() != dim || a.coupling.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.coupling.nrows(),
                });
            }
        }
        let frame = EigenFrame::new(&model.hamiltonian)?;
        let pieces = model
            .attachments
            .iter()
            .map(|a| Piece::new(&frame, frame.to_eigen(&a.coupling), &a.reservoir, flags, tol))
            .collect::<Result<Vec<_>>>()?;

        let mut matrix = CMatrix::zeros(dim * dim, dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                matrix[(i * dim + j, i * dim + j)] = C64::new(0.0, -frame.bohr(i, j));
            }
        }
        for p in &pieces {
            p.add_to(&mut matrix, dim);
        }
        // nalgebra's SVD does not terminate on non-finite input.
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("generator has non-finite entries"));
        }
        Ok(Liouvillian {
            frame,
            flags,
            pieces,
            matrix,
        })
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// Full superoperator on eigenbasis vectorised density matrices.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Superoperator of reservoir `nu` alone.
    pub fn piece_matrix(&self, nu: usize) -> CMatrix {
        let dim = self.dim();
        let mut s = CMatrix::zeros(dim * dim, dim * dim);
        self.pieces[nu].add_to(&mut s, dim);
        s
    }

    /// Apply the full generator to an eigenbasis density matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let dim = self.dim();
        let mut out = CMatrix::from_fn(dim, dim, |i, j| C64::new(0.0, -self.frame.bohr(i, j)) * rho[(i, j)]);
        for p in &self.pieces {
            out += p.apply(rho);
        }
        out
    }

    /// Largest entry of the trace functional applied to the generator.
    pub fn trace_row_norm(&self) -> f64 {
        let dim = self.dim();
        (0..dim * dim)
            .map(|c| (0..dim).map(|i| self.matrix[(i * dim + i, c)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }
}

/// Row-major vectorisation.
pub fn vectorize(rho: &CMatrix) -> nalgebra::DVector<C64> {
    let dim = rho.nrows();
    nalgebra::DVector::from_fn(dim * dim, |idx, _| rho[(idx / dim, idx % dim)])
}

pub fn unvectorize(v: &nalgebra::DVector<C64>, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| v[i * dim + j])
}
