//! Steady states and the observables derived from them.
//!
//! Raw currents follow `I_E^ν = tr{H L_ν ρ}` and `I_M^ν = tr{N L_ν ρ}`:
//! positive means the impurity gains energy / particles from reservoir `ν`.
//! For reservoirs labelled `L`, `R`, `D` the report also carries the
//! device-level quantities `I_M = I_M^L` (matter flowing from `L` through the
//! system) and `I_E = -I_E^D` (energy flowing into the demon reservoir).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::fock::{Group, ImpurityModel};
use crate::redfield::Liouvillian;
use crate::{CMatrix, Error, Result, C64};

/// Singular values below this fraction of the largest count as null.
pub const NULL_TOLERANCE: f64 = 1e-12;
/// Eigenvalues below this are dropped from von Neumann entropies.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

pub const SIGN_CONVENTION: &str = "raw currents: tr{H L_nu rho}, tr{N L_nu rho}, positive = impurity gains from reservoir nu; \
heat Q_nu = I_E^nu - mu_nu I_M^nu; I_M = I_M^L (flow from L through the system); I_E = -I_E^D (energy into reservoir D)";

#[derive(Clone, Debug)]
pub struct SteadyState {
    /// Occupation (site) basis.
    pub rho: CMatrix,
    /// Eigenbasis of the Hamiltonian used by the generator.
    pub rho_eigen: CMatrix,
    pub null_dimension: usize,
    /// Set when the null space was not one-dimensional.
    pub degenerate: bool,
}

/// Null vector of the generator with unit trace.
///
/// The solve is restricted to density matrices that are block diagonal in
/// particle number, an invariant subspace of every number-conserving
/// generator that contains all steady states reachable from physical states.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    let dim = l.dim();
    let frame = &l.frame;
    let idx: Vec<(usize, usize)> = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .filter(|&(i, j)| frame.particles[i] == frame.particles[j])
        .collect();
    let m = idx.len();
    let full = l.matrix();
    let a = CMatrix::from_fn(m, m, |r, c| {
        let (i, j) = idx[r];
        let (k, q) = idx[c];
        full[(i * dim + j, k * dim + q)]
    });

    let svd = a.clone().svd(false, true);
    let smax = svd.singular_values.max();
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let null: Vec<usize> = (0..m)
        .filter(|&k| svd.singular_values[k] <= NULL_TOLERANCE * smax)
        .collect();
    if null.is_empty() {
        let smin = svd.singular_values.min();
        return Err(Error::NoSteadyState(format!(
            "smallest singular value {smin:e} exceeds null tolerance ({:e})",
            NULL_TOLERANCE * smax
        )));
    }

    let x = if null.len() == 1 {
        let mut sys = a;
        let mut rhs = DVector::<C64>::zeros(m);
        let trace_row = idx.iter().position(|&(i, j)| i == j).unwrap_or(0);
        for (c, &(i, j)) in idx.iter().enumerate() {
            sys[(trace_row, c)] = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        }
        rhs[trace_row] = C64::new(1.0, 0.0);
        sys.lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NoSteadyState("trace-augmented system is singular".into()))?
    } else {
        log::warn!(
            "steady state not unique (null dimension {}); projecting the maximally mixed state",
            null.len()
        );
        let mixed = DVector::<C64>::from_fn(m, |r, _| {
            let (i, j) = idx[r];
            if i == j {
                C64::new(1.0 / dim as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let mut x = DVector::<C64>::zeros(m);
        for &k in &null {
            let v: DVector<C64> = v_t.row(k).adjoint();
            let overlap = v.dotc(&mixed);
            x += v * overlap;
        }
        x
    };

    let mut rho_eigen = CMatrix::zeros(dim, dim);
    for (r, &(i, j)) in idx.iter().enumerate() {
        rho_eigen[(i, j)] = x[r];
    }
    rho_eigen = hermitize(&rho_eigen);
    if null.len() > 1 {
        rho_eigen = positive_part(&rho_eigen);
    }
    let mut rho = hermitize(&frame.to_site(&rho_eigen));
    let tr = rho.trace().re;
    if !(tr.is_finite() && tr.abs() > 0.0) {
        return Err(Error::NoSteadyState(format!("steady state has trace {tr}")));
    }
    rho /= C64::new(tr, 0.0);
    let rho_eigen = hermitize(&frame.to_eigen(&rho));
    Ok(SteadyState {
        rho,
        rho_eigen,
        null_dimension: null.len(),
        degenerate: null.len() > 1,
    })
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn positive_part(m: &CMatrix) -> CMatrix {
    let eig = m.clone().symmetric_eigen();
    let vals = eig.eigenvalues.map(|v| C64::new(v.max(0.0), 0.0));
    &eig.eigenvectors * CMatrix::from_diagonal(&vals) * eig.eigenvectors.adjoint()
}

/// `(I_E^ν, I_M^ν)` for reservoir `nu` given an eigenbasis density matrix.
pub fn currents(l: &Liouvillian, nu: usize, rho_eigen: &CMatrix) -> (f64, f64) {
    let out = l.pieces()[nu].apply(rho_eigen);
    let frame = &l.frame;
    let mut energy = 0.0;
    let mut matter = 0.0;
    for i in 0..l.dim() {
        let p = out[(i, i)].re;
        energy += frame.energies[i] * p;
        matter += frame.particles[i] as f64 * p;
    }
    (energy, matter)
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &CMatrix) -> f64 {
    rho.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .filter(|&&p| p > ENTROPY_CUTOFF)
        .map(|&p| -p * p.ln())
        .sum()
}

pub fn min_eigenvalue(rho: &CMatrix) -> f64 {
    rho.clone().symmetric_eigen().eigenvalues.min()
}

/// Reduced density matrix of `modes` (in the order given, first mode as the
/// least-significant bit of the reduced index). Traces out the remaining
/// occupation factors.
pub fn reduced_density(rho: &CMatrix, modes: &[usize]) -> Result<CMatrix> {
    let dim = rho.nrows();
    if !dim.is_power_of_two() || rho.ncols() != dim {
        return Err(Error::invalid("density matrix is not 2^n square"));
    }
    let n = dim.trailing_zeros() as usize;
    let mut seen = 0usize;
    for &m in modes {
        if m >= n || seen & (1 << m) != 0 {
            return Err(Error::invalid(format!("malformed partition: mode {m}")));
        }
        seen |= 1 << m;
    }
    let keep_mask = seen;
    let project = |s: usize| -> usize {
        modes
            .iter()
            .enumerate()
            .fold(0, |acc, (b, &m)| acc | (((s >> m) & 1) << b))
    };
    let rd = 1usize << modes.len();
    let mut out = CMatrix::zeros(rd, rd);
    for s in 0..dim {
        for t in 0..dim {
            if (s & !keep_mask) == (t & !keep_mask) {
                out[(project(s), project(t))] += rho[(s, t)];
            }
        }
    }
    Ok(out)
}

/// `S(ρ_A) + S(ρ_B) - S(ρ_AB)` for disjoint, nonempty mode sets.
pub fn mutual_information(rho: &CMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("malformed partition: empty side"));
    }
    if a.iter().any(|m| b.contains(m)) {
        return Err(Error::invalid("malformed partition: sides overlap"));
    }
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    let s_a = von_neumann_entropy(&reduced_density(rho, a)?);
    let s_b = von_neumann_entropy(&reduced_density(rho, b)?);
    let s_ab = von_neumann_entropy(&reduced_density(rho, &ab)?);
    Ok((s_a + s_b - s_ab).max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReservoirFlow {
    pub label: String,
    pub beta: f64,
    pub mu: f64,
    pub energy_current: f64,
    pub matter_current: f64,
    pub heat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyReport {
    pub flows: Vec<ReservoirFlow>,
    /// `-Σ β_ν Q̇_ν`.
    pub entropy_production: f64,
    /// `βV I_M + (β_D - β) I_E`, when `L`, `R` and `D` are present.
    pub entropy_production_demon: Option<f64>,
    pub matter_current: Option<f64>,
    pub energy_current: Option<f64>,
    /// `|I_E / I_E^L|`.
    pub energy_ratio: Option<f64>,
    pub energy: f64,
    pub entropy: f64,
    /// System-side modes against demon-side modes.
    pub mi_partition: Option<f64>,
    /// `d_s` against `d_d`.
    pub mi_dots: Option<f64>,
    pub min_eigenvalue: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    /// `|Σ I_M^ν| / max |I_M^ν|`.
    pub matter_balance: f64,
    /// `|Σ I_E^ν| / max |I_E^ν|`.
    pub energy_balance: f64,
    pub degenerate: bool,
    pub sign_convention: String,
}

impl SteadyReport {
    pub fn flow(&self, label: &str) -> Option<&ReservoirFlow> {
        self.flows.iter().find(|f| f.label == label)
    }
}

fn relative_balance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let largest = values.clone().fold(0.0f64, |m, v| m.max(v.abs()));
    let sum: f64 = values.sum();
    if largest == 0.0 {
        0.0
    } else {
        sum.abs() / largest
    }
}

/// Currents, heats, entropy production and correlations at the steady state.
pub fn thermo_report(model: &ImpurityModel, l: &Liouvillian, ss: &SteadyState) -> Result<SteadyReport> {
    let flows: Vec<ReservoirFlow> = model
        .attachments
        .iter()
        .enumerate()
        .map(|(nu, a)| {
            let (e, m) = currents(l, nu, &ss.rho_eigen);
            let r = &a.reservoir;
            ReservoirFlow {
                label: r.label.clone(),
                beta: r.beta,
                mu: r.mu,
                energy_current: e,
                matter_current: m,
                heat: e - r.mu * m,
            }
        })
        .collect();
    let entropy_production = -flows.iter().map(|f| f.beta * f.heat).sum::<f64>();
    let find = |label: &str| flows.iter().find(|f| f.label == label);
    let matter_current = find("L").map(|f| f.matter_current);
    let energy_current = find("D").map(|f| -f.energy_current);
    let energy_ratio = match (energy_current, find("L")) {
        (Some(ie), Some(left)) if left.energy_current != 0.0 => Some((ie / left.energy_current).abs()),
        _ => None,
    };
    let entropy_production_demon = match (find("L"), find("R"), find("D")) {
        (Some(left), Some(right), Some(demon)) => {
            let bias = left.mu - right.mu;
            let beta = left.beta;
            Some(beta * bias * left.matter_current + (demon.beta - beta) * (-demon.energy_current))
        }
        _ => None,
    };

    let rho = &ss.rho;
    let energy = (rho * &model.hamiltonian).trace().re;
    let entropy = von_neumann_entropy(rho);
    let system = model.modes_in(Group::System);
    let demon = model.modes_in(Group::Demon);
    let mi_partition = if !system.is_empty() && !demon.is_empty() {
        Some(mutual_information(rho, &system, &demon)?)
    } else {
        None
    };
    let mi_dots = match (model.mode_index("d_s"), model.mode_index("d_d")) {
        (Some(s), Some(d)) => Some(mutual_information(rho, &[s], &[d])?),
        _ => None,
    };
    let hermiticity_error = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);

    Ok(SteadyReport {
        matter_balance: relative_balance(flows.iter().map(|f| f.matter_current)),
        energy_balance: relative_balance(flows.iter().map(|f| f.energy_current)),
        flows,
        entropy_production,
        entropy_production_demon,
        matter_current,
        energy_current,
        energy_ratio,
        energy,
        entropy,
        mi_partition,
        mi_dots,
        min_eigenvalue: min_eigenvalue(rho),
        trace_error: (rho.trace() - C64::new(1.0, 0.0)).norm(),
        hermiticity_error,
        degenerate: ss.degenerate,
        sign_convention: SIGN_CONVENTION.to_string(),
    })
}

/// Build the generator, solve and report in one go.
pub fn solve(model: &ImpurityModel, flags: crate::redfield::Flags) -> Result<(SteadyState, SteadyReport)> {
    let l = Liouvillian::new(model, flags)?;
    let ss = steady_state(&l)?;
    let report = thermo_report(model, &l, &ss)?;
    Ok((ss, report))
}
