//! Fermionic operators on small Fock spaces and the impurity models built
//! from them.
//!
//! Basis: occupation-number kets `|n_{M-1} … n_1 n_0⟩` indexed by the binary
//! number with mode 0 as the least-significant bit. Annihilators carry the
//! Jordan-Wigner string over all lower modes, so
//! `d_j |…⟩ = (-1)^{Σ_{i<j} n_i} |…, n_j - 1, …⟩`.
//!
//! Model presets order their modes as `(d_s, d_d, C_l, C_r, C_d)`, skipping
//! absent ones.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::spectral::{rc_map, SpectralDensity, DEFAULT_CUTOFF};
use crate::{CMatrix, Error, Result, C64};

pub const MAX_MODES: usize = 12;
/// Models carry dense operators; keep them small.
pub const MAX_MODEL_MODES: usize = 8;

/// Sparse signed permutation-like matrix: entries `(row, col, sign)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionOp {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl FermionOp {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn adjoint(&self) -> FermionOp {
        FermionOp {
            dim: self.dim,
            entries: self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect(),
        }
    }
}

/// Annihilation operators for `n_modes` fermionic modes.
#[derive(Clone, Debug)]
pub struct ModeAlgebra {
    n_modes: usize,
    annihilators: Vec<FermionOp>,
}

impl ModeAlgebra {
    /// Build the Jordan-Wigner annihilators; `1 ≤ n_modes ≤ 12`.
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 || n_modes > MAX_MODES {
            return Err(Error::invalid(format!(
                "number of modes {n_modes} outside 1..={MAX_MODES}"
            )));
        }
        let dim = 1usize << n_modes;
        let annihilators = (0..n_modes)
            .map(|j| {
                let bit = 1usize << j;
                let lower = bit - 1;
                let entries = (0..dim)
                    .filter(|s| s & bit != 0)
                    .map(|s| {
                        let sign = if (s & lower).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        (s ^ bit, s, sign)
                    })
                    .collect();
                FermionOp { dim, entries }
            })
            .collect();
        Ok(ModeAlgebra {
            n_modes,
            annihilators,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        1 << self.n_modes
    }

    pub fn annihilator(&self, mode: usize) -> &FermionOp {
        &self.annihilators[mode]
    }

    pub fn annihilators(&self) -> &[FermionOp] {
        &self.annihilators
    }

    /// Diagonal of `n_j` in the occupation basis.
    pub fn occupation(&self, mode: usize, state: usize) -> f64 {
        ((state >> mode) & 1) as f64
    }

    pub fn number_operator(&self) -> CMatrix {
        let dim = self.dim();
        CMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                C64::new(r.count_ones() as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

/// Equilibrium free-fermion reservoir.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    pub label: String,
    pub beta: f64,
    pub mu: f64,
    pub sd: SpectralDensity,
}

impl Reservoir {
    pub fn new(label: impl Into<String>, beta: f64, mu: f64, sd: SpectralDensity) -> Self {
        Reservoir {
            label: label.into(),
            beta,
            mu,
            sd,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!(
                "reservoir {}: inverse temperature {} must be positive",
                self.label, self.beta
            )));
        }
        if !self.mu.is_finite() {
            return Err(Error::invalid(format!("reservoir {}: non-finite μ", self.label)));
        }
        self.sd.validate()
    }
}

/// A reservoir tunnel-coupled through the annihilator of one mode.
#[derive(Clone, Debug)]
pub struct Attachment {
    pub mode: usize,
    pub coupling: CMatrix,
    pub reservoir: Reservoir,
}

/// Which side of the system/demon partition a mode belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    #[default]
    System,
    Demon,
}

#[derive(Clone, Debug)]
pub struct ImpurityModel {
    pub algebra: ModeAlgebra,
    pub mode_labels: Vec<String>,
    pub groups: Vec<Group>,
    pub hamiltonian: CMatrix,
    pub number: CMatrix,
    pub attachments: Vec<Attachment>,
}

impl ImpurityModel {
    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.algebra.n_modes()
    }

    pub fn mode_index(&self, label: &str) -> Option<usize> {
        self.mode_labels.iter().position(|l| l == label)
    }

    pub fn modes_in(&self, group: Group) -> Vec<usize> {
        (0..self.n_modes()).filter(|&m| self.groups[m] == group).collect()
    }

    /// Dense annihilator of one mode.
    pub fn annihilator(&self, mode: usize) -> CMatrix {
        self.algebra.annihilator(mode).to_dense()
    }

    pub fn attachment(&self, label: &str) -> Option<&Attachment> {
        self.attachments.iter().find(|a| a.reservoir.label == label)
    }

    /// Attach a reservoir to `mode`.
    pub fn attach(&mut self, mode: usize, reservoir: Reservoir) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(Error::invalid(format!(
                "mode {mode} out of range for {} modes",
                self.n_modes()
            )));
        }
        reservoir.validate()?;
        self.attachments.push(Attachment {
            mode,
            coupling: self.annihilator(mode),
            reservoir,
        });
        Ok(())
    }

    /// `max |H - H†|`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.hamiltonian - self.hamiltonian.adjoint()))
    }

    /// `max |[H, N]|`.
    pub fn number_commutator(&self) -> f64 {
        max_abs(&commutator(&self.hamiltonian, &self.number))
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `AB - BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `AB + BA`.
pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

// ---------------------------------------------------------------------------
// Model descriptions

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub label: String,
    pub energy: f64,
    #[serde(default)]
    pub group: Group,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tunneling {
    pub a: String,
    pub b: String,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coulomb {
    pub a: String,
    pub b: String,
    pub u: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttachmentSpec {
    pub mode: String,
    pub reservoir: Reservoir,
}

/// Number-conserving impurity description, usable from JSON:
/// `H = Σ ε_i n_i + Σ t (a_i† a_j + h.c.) + Σ U n_i n_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub modes: Vec<ModeSpec>,
    #[serde(default)]
    pub tunneling: Vec<Tunneling>,
    #[serde(default)]
    pub coulomb: Vec<Coulomb>,
    #[serde(default)]
    pub attachments: Vec<AttachmentSpec>,
}

impl ModelSpec {
    fn index(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::invalid(format!("unknown mode label {label:?}")))
    }

    pub fn build(&self) -> Result<ImpurityModel> {
        let n = self.modes.len();
        if n == 0 || n > MAX_MODEL_MODES {
            return Err(Error::invalid(format!(
                "model must have 1..={MAX_MODEL_MODES} modes, got {n}"
            )));
        }
        for (i, m) in self.modes.iter().enumerate() {
            if self.modes[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::invalid(format!("duplicate mode label {:?}", m.label)));
            }
        }
        let algebra = ModeAlgebra::new(n)?;
        let dim = algebra.dim();
        let ops: Vec<CMatrix> = algebra.annihilators().iter().map(|a| a.to_dense()).collect();
        let occ = |mode: usize| -> Vec<f64> { (0..dim).map(|s| algebra.occupation(mode, s)).collect() };

        let mut h = CMatrix::zeros(dim, dim);
        for (i, m) in self.modes.iter().enumerate() {
            let ni = occ(i);
            for s in 0..dim {
                h[(s, s)] += C64::new(m.energy * ni[s], 0.0);
            }
        }
        for c in &self.coulomb {
            let (i, j) = (self.index(&c.a)?, self.index(&c.b)?);
            if i == j {
                return Err(Error::invalid(format!("Coulomb term on a single mode {:?}", c.a)));
            }
            let (ni, nj) = (occ(i), occ(j));
            for s in 0..dim {
                h[(s, s)] += C64::new(c.u * ni[s] * nj[s], 0.0);
            }
        }
        for t in &self.tunneling {
            let (i, j) = (self.index(&t.a)?, self.index(&t.b)?);
            if i == j {
                return Err(Error::invalid(format!("tunneling from {:?} to itself", t.a)));
            }
            let hop = ops[i].adjoint() * &ops[j] * C64::new(t.amplitude, 0.0);
            h += &hop + hop.adjoint();
        }

        let mut model = ImpurityModel {
            number: algebra.number_operator(),
            mode_labels: self.modes.iter().map(|m| m.label.clone()).collect(),
            groups: self.modes.iter().map(|m| m.group).collect(),
            algebra,
            hamiltonian: h,
            attachments: Vec::new(),
        };
        for a in &self.attachments {
            let mode = self.index(&a.mode)?;
            model.attach(mode, a.reservoir.clone())?;
        }
        if model.number_commutator() > 1e-12 {
            return Err(Error::invalid("Hamiltonian does not conserve particle number"));
        }
        Ok(model)
    }
}

/// `H = ε_s n_s + ε_d n_d + U n_s n_d` on modes `(d_s, d_d)`, no reservoirs.
pub fn build_double_dot(eps_s: f64, eps_d: f64, u: f64) -> Result<ImpurityModel> {
    double_dot_spec(eps_s, eps_d, u).build()
}

fn double_dot_spec(eps_s: f64, eps_d: f64, u: f64) -> ModelSpec {
    ModelSpec {
        modes: vec![
            ModeSpec {
                label: "d_s".into(),
                energy: eps_s,
                group: Group::System,
            },
            ModeSpec {
                label: "d_d".into(),
                energy: eps_d,
                group: Group::Demon,
            },
        ],
        tunneling: Vec::new(),
        coulomb: vec![Coulomb {
            a: "d_s".into(),
            b: "d_d".into(),
            u,
        }],
        attachments: Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// Maxwell-demon presets

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    /// Two dots, Lorentzian reservoirs attached directly.
    Dqdmd,
    /// RCs for the left and right reservoirs.
    Model1,
    /// RC for the demon reservoir.
    Model2,
    /// RCs for all three reservoirs.
    Model3,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [
        ModelVariant::Dqdmd,
        ModelVariant::Model1,
        ModelVariant::Model2,
        ModelVariant::Model3,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelVariant::Dqdmd => "dqdmd",
            ModelVariant::Model1 => "model1",
            ModelVariant::Model2 => "model2",
            ModelVariant::Model3 => "model3",
        }
    }

    fn system_rcs(&self) -> bool {
        matches!(self, ModelVariant::Model1 | ModelVariant::Model3)
    }

    fn demon_rc(&self) -> bool {
        matches!(self, ModelVariant::Model2 | ModelVariant::Model3)
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("invalid variant name {s:?}")))
    }
}

/// Parameters of the two-dot demon device, energies in units of `ε`.
///
/// Derived quantities follow the demon conventions: `ω₀L = ε_s`,
/// `ω₀R = ε_s + U`, `ω₀D = μ_D = ε_d + U/2`, `μ_{L,R} = ε_s ± V/2`,
/// `Γ_D = gamma_d_ratio · Γ_S`, `β_D = beta_ratio · β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DemonParams {
    pub eps_s: f64,
    pub eps_d: f64,
    pub u: f64,
    pub bias: f64,
    pub beta: f64,
    pub beta_ratio: f64,
    pub gamma_s: f64,
    pub gamma_d_ratio: f64,
    pub delta_s: f64,
    pub delta_d: f64,
    /// Lorentzian quadrature window half-width in units of the width.
    pub cutoff: f64,
}

impl Default for DemonParams {
    fn default() -> Self {
        DemonParams {
            eps_s: 1.0,
            eps_d: 1.0,
            u: 0.015,
            bias: 0.01,
            beta: 1.0,
            beta_ratio: 300.0,
            gamma_s: 1e-5,
            gamma_d_ratio: 100.0,
            delta_s: 0.01,
            delta_d: 0.01,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

impl DemonParams {
    pub fn gamma_d(&self) -> f64 {
        self.gamma_d_ratio * self.gamma_s
    }
    pub fn beta_d(&self) -> f64 {
        self.beta_ratio * self.beta
    }
    pub fn mu_l(&self) -> f64 {
        self.eps_s + 0.5 * self.bias
    }
    pub fn mu_r(&self) -> f64 {
        self.eps_s - 0.5 * self.bias
    }
    pub fn mu_d(&self) -> f64 {
        self.eps_d + 0.5 * self.u
    }
    pub fn omega0_l(&self) -> f64 {
        self.eps_s
    }
    pub fn omega0_r(&self) -> f64 {
        self.eps_s + self.u
    }
    pub fn omega0_d(&self) -> f64 {
        self.mu_d()
    }

    fn lorentzian(&self, gamma: f64, width: f64, center: f64) -> SpectralDensity {
        SpectralDensity::Lorentzian {
            gamma,
            width,
            center,
            cutoff: self.cutoff,
        }
    }

    pub fn left(&self) -> Reservoir {
        Reservoir::new(
            "L",
            self.beta,
            self.mu_l(),
            self.lorentzian(self.gamma_s, self.delta_s, self.omega0_l()),
        )
    }

    pub fn right(&self) -> Reservoir {
        Reservoir::new(
            "R",
            self.beta,
            self.mu_r(),
            self.lorentzian(self.gamma_s, self.delta_s, self.omega0_r()),
        )
    }

    pub fn demon(&self) -> Reservoir {
        Reservoir::new(
            "D",
            self.beta_d(),
            self.mu_d(),
            self.lorentzian(self.gamma_d(), self.delta_d, self.omega0_d()),
        )
    }

    /// `J_L(ε_s)/J_L(ε_s+U)` and `J_R(ε_s+U)/J_R(ε_s)`; both equal
    /// `1 + U²/Δ_S²`.
    pub fn sd_imbalance(&self) -> (f64, f64) {
        let l = self.left().sd;
        let r = self.right().sd;
        let e = self.eps_s;
        (
            l.eval(e) / l.eval(e + self.u),
            r.eval(e + self.u) / r.eval(e),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("beta", self.beta),
            ("beta_ratio", self.beta_ratio),
            ("gamma_s", self.gamma_s),
            ("gamma_d_ratio", self.gamma_d_ratio),
            ("delta_s", self.delta_s),
            ("delta_d", self.delta_d),
            ("cutoff", self.cutoff),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} = {v} must be positive")));
            }
        }
        for (name, v) in [("eps_s", self.eps_s), ("eps_d", self.eps_d), ("u", self.u), ("bias", self.bias)] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} is not finite")));
            }
        }
        Ok(())
    }
}

/// Build a demon preset with its reservoir attachments.
///
/// RC variants replace a Lorentzian reservoir by an extra mode at the RC
/// energy, tunnel-coupled with strength `λ = sqrt(ΓΔ/2)`, and attach the
/// residual flat reservoir (height `2Δ`) to that mode.
pub fn build_model(variant: ModelVariant, params: &DemonParams) -> Result<ImpurityModel> {
    params.validate()?;
    let mut spec = double_dot_spec(params.eps_s, params.eps_d, params.u);
    let add_rc = |spec: &mut ModelSpec, label: &str, host: &str, group: Group, res: Reservoir| -> Result<()> {
        let level = rc_map(&res.sd)?;
        spec.modes.push(ModeSpec {
            label: label.into(),
            energy: level.energy,
            group,
        });
        spec.tunneling.push(Tunneling {
            a: label.into(),
            b: host.into(),
            amplitude: level.coupling,
        });
        spec.attachments.push(AttachmentSpec {
            mode: label.into(),
            reservoir: Reservoir {
                sd: level.residual,
                ..res
            },
        });
        Ok(())
    };

    if variant.system_rcs() {
        add_rc(&mut spec, "C_l", "d_s", Group::System, params.left())?;
        add_rc(&mut spec, "C_r", "d_s", Group::System, params.right())?;
    } else {
        spec.attachments.push(AttachmentSpec {
            mode: "d_s".into(),
            reservoir: params.left(),
        });
        spec.attachments.push(AttachmentSpec {
            mode: "d_s".into(),
            reservoir: params.right(),
        });
    }
    if variant.demon_rc() {
        add_rc(&mut spec, "C_d", "d_d", Group::Demon, params.demon())?;
    } else {
        spec.attachments.push(AttachmentSpec {
            mode: "d_d".into(),
            reservoir: params.demon(),
        });
    }
    // Attachments in L, R, D order regardless of how they were added.
    spec.attachments.sort_by_key(|a| match a.reservoir.label.as_str() {
        "L" => 0,
        "R" => 1,
        _ => 2,
    });
    spec.build()
}

/// Single-level dot between two Lorentzian leads, each replaced by its RC
/// (modes `d, C_L, C_R`) with flat residual reservoirs.
pub fn build_set_rc(eps: f64, left: &Reservoir, right: &Reservoir) -> Result<ImpurityModel> {
    let mut spec = ModelSpec {
        modes: vec![ModeSpec {
            label: "d".into(),
            energy: eps,
            group: Group::System,
        }],
        tunneling: Vec::new(),
        coulomb: Vec::new(),
        attachments: Vec::new(),
    };
    for (label, res) in [("C_L", left), ("C_R", right)] {
        let level = rc_map(&res.sd)?;
        spec.modes.push(ModeSpec {
            label: label.into(),
            energy: level.energy,
            group: Group::System,
        });
        spec.tunneling.push(Tunneling {
            a: label.into(),
            b: "d".into(),
            amplitude: level.coupling,
        });
        spec.attachments.push(AttachmentSpec {
            mode: label.into(),
            reservoir: Reservoir {
                sd: level.residual,
                ..res.clone()
            },
        });
    }
    spec.build()
}

/// Single-level dot with Lorentzian leads attached directly.
pub fn build_set_direct(eps: f64, left: &Reservoir, right: &Reservoir) -> Result<ImpurityModel> {
    ModelSpec {
        modes: vec![ModeSpec {
            label: "d".into(),
            energy: eps,
            group: Group::System,
        }],
        tunneling: Vec::new(),
        coulomb: Vec::new(),
        attachments: vec![
            AttachmentSpec {
                mode: "d".into(),
                reservoir: left.clone(),
            },
            AttachmentSpec {
                mode: "d".into(),
                reservoir: right.clone(),
            },
        ],
    }
    .build()
}
