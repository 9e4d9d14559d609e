//! Acceptance suite. One PASS/FAIL line per criterion; exits non-zero if any
//! criterion fails.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fermionic_rc::dynamics::SteadyReport;
use fermionic_rc::fock::{anticommutator, build_model, DemonParams, ModeAlgebra, ModelVariant};
use fermionic_rc::redfield::Flags;
use fermionic_rc::scenario::{log_grid, run_demon_sweep, set_rcme, solve_demon, ScenarioConfig, Sweep, SweepAxis};
use fermionic_rc::set_oracle::{exact_currents, SetParams};
use fermionic_rc::spectral::{iterate_chain, rc_map_quadrature, MappingOptions, SpectralDensity};
use fermionic_rc::CMatrix;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn check(checks: &[(bool, String)]) -> Outcome {
    let failed: Vec<&String> = checks.iter().filter(|(ok, _)| !ok).map(|(_, s)| s).collect();
    if failed.is_empty() {
        outcome(true, checks.iter().map(|(_, s)| s.as_str()).collect::<Vec<_>>().join("; "))
    } else {
        outcome(false, failed.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("; "))
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    if elapsed > budget {
        o.pass = false;
        o.detail = format!("{} [runtime {elapsed:.2?} over budget {budget:?}]", o.detail);
    } else {
        o.detail = format!("{} [{elapsed:.2?}]", o.detail);
    }
    o
}

// --- 1 -------------------------------------------------------------------

fn lorentzian_mapping() -> Outcome {
    let (gamma, delta, w0) = (1.0, 0.1, 1.0);
    let sd = SpectralDensity::lorentzian(gamma, delta, w0);
    let level = match rc_map_quadrature(&sd, &MappingOptions::default()) {
        Ok(l) => l,
        Err(e) => return outcome(false, format!("mapping failed: {e}")),
    };
    let lambda = (gamma * delta / 2.0f64).sqrt();
    let lam_err = (level.coupling - lambda).abs() / lambda;
    let e_err = (level.energy - w0).abs();
    // Central 90% of the residual support.
    let (a, b) = level.residual.support();
    let (lo, hi) = (a + 0.05 * (b - a), b - 0.05 * (b - a));
    let n = 4001;
    let res_err = (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .map(|w| (level.residual.eval(w) - 2.0 * delta).abs() / (2.0 * delta))
        .fold(0.0, f64::max);
    check(&[
        (lam_err < 1e-4, format!("λ rel err {lam_err:.2e} < 1e-4")),
        (e_err < 1e-6, format!("E abs err {e_err:.2e} < 1e-6")),
        (res_err < 1e-3, format!("residual rel err {res_err:.2e} < 1e-3")),
    ])
}

// --- 2 -------------------------------------------------------------------

fn semicircle_fixed_point() -> Outcome {
    let sd = SpectralDensity::flat(1.0, -1.0, 1.0);
    let chain = match iterate_chain(&sd, 30, &MappingOptions::default()) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("chain failed: {e}")),
    };
    let last = chain.last().expect("30 levels");
    let target = SpectralDensity::semicircle(0.0, 1.0);
    let dist = last.residual.sup_distance(&target, -0.9, 0.9, 4001);
    let e_err = last.energy.abs();
    let lam_err = (2.0 * last.coupling - 1.0).abs();
    check(&[
        (dist < 1e-2, format!("sup |J_30 - semicircle| {dist:.2e} < 1e-2")),
        (e_err < 1e-6, format!("|E| {e_err:.2e} < 1e-6")),
        (lam_err < 1e-3, format!("|2λ - 1| {lam_err:.2e} < 1e-3")),
    ])
}

// --- 3 & 4 ---------------------------------------------------------------

fn conservation(report: &SteadyReport, context: &str) -> Vec<(bool, String)> {
    vec![
        (report.matter_balance < 1e-10, format!("{context}: Σ I_M {:.1e}", report.matter_balance)),
        (report.energy_balance < 1e-10, format!("{context}: Σ I_E {:.1e}", report.energy_balance)),
        (report.trace_error < 1e-14, format!("{context}: |tr ρ - 1| {:.1e}", report.trace_error)),
        (report.hermiticity_error < 1e-10, format!("{context}: herm {:.1e}", report.hermiticity_error)),
        (
            report.entropy_production >= -1e-10,
            format!("{context}: Σ̇ {:.2e}", report.entropy_production),
        ),
        (report.min_eigenvalue >= -1e-8, format!("{context}: min eig {:.2e}", report.min_eigenvalue)),
    ]
}

fn set_benchmark(reports: &mut Vec<(String, SteadyReport)>) -> Outcome {
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    for bg in log_grid(1e-3, 1e-1, 9) {
        let p = SetParams::benchmark(bg);
        let exact = match exact_currents(&p) {
            Ok(c) => c,
            Err(e) => return outcome(false, format!("oracle failed at βΓ={bg:.1e}: {e}")),
        };
        let (m, e, rep) = match set_rcme(&p, Flags::default()) {
            Ok(x) => x,
            Err(err) => return outcome(false, format!("RC+ME failed at βΓ={bg:.1e}: {err}")),
        };
        let em = ((m - exact.matter) / exact.matter).abs();
        let ee = ((e - exact.energy) / exact.energy).abs();
        worst = worst.max(em).max(ee);
        if em >= 0.05 || ee >= 0.05 {
            checks.push((false, format!("βΓ={bg:.1e}: I_M err {em:.2e}, I_E err {ee:.2e}")));
        }
        reports.push((format!("SET βΓ={bg:.1e}"), rep));
    }
    checks.push((worst < 0.05, format!("max rel err over βΓ∈[1e-3,1e-1] {worst:.2e} < 5e-2")));

    let p = SetParams::benchmark(1e-2);
    let exact = exact_currents(&p).map(|c| c.matter).unwrap_or(f64::NAN);
    let plain = set_rcme(&p, Flags::default());
    let secular = set_rcme(&p, Flags { lamb_shift: false, secular: true });
    match (plain, secular) {
        (Ok((m, _, _)), Ok((ms, _, rs))) => {
            let d = ((m - exact) / exact).abs();
            let ds = ((ms - exact) / exact).abs();
            checks.push((ds > d, format!("βΓ=1e-2 secular dev {ds:.2e} > non-secular dev {d:.2e}")));
            reports.push(("SET secular βΓ=1e-2".into(), rs));
        }
        (a, b) => checks.push((false, format!("variant solve failed: {:?} {:?}", a.err(), b.err()))),
    }
    check(&checks)
}

// --- 5 -------------------------------------------------------------------

fn demon_regime(reports: &mut Vec<(String, SteadyReport)>) -> Outcome {
    let p = DemonParams::default();
    let r = match solve_demon(ModelVariant::Model3, &p, Flags::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("model3 failed: {e}")),
    };
    let im = r.matter_current.unwrap_or(f64::NAN);
    let ie = r.energy_current.unwrap_or(f64::NAN);
    let mi = r.mi_dots.unwrap_or(f64::NAN);
    let out = check(&[
        (im < 0.0, format!("I_M {im:.3e} < 0")),
        (ie > 0.0, format!("I_E {ie:.3e} > 0")),
        (mi > 0.0 && mi <= LN_2 + 1e-6, format!("0 < MI {mi:.3e} ≤ ln2")),
    ]);
    reports.push(("model3 preset".into(), r));
    out
}

fn conservation_suite(reports: &[(String, SteadyReport)]) -> Outcome {
    if reports.is_empty() {
        return outcome(false, "no steady states sampled");
    }
    let checks: Vec<(bool, String)> = reports.iter().flat_map(|(ctx, r)| conservation(r, ctx)).collect();
    let failed: Vec<String> = checks.iter().filter(|c| !c.0).map(|c| c.1.clone()).collect();
    if failed.is_empty() {
        outcome(true, format!("{} steady states, all six checks each", reports.len()))
    } else {
        outcome(false, failed.join("; "))
    }
}

// --- 6 -------------------------------------------------------------------

/// Longest run of consecutive finite differences with the given strict sign,
/// restricted to grid indices in `range`.
fn longest_run(values: &[f64], range: std::ops::Range<usize>, sign: f64) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for k in range.start..range.end.min(values.len()).saturating_sub(1) {
        let d = values[k + 1] - values[k];
        if d * sign > 0.0 && d.is_finite() {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

fn sweep(model: ModelVariant, axis: SweepAxis, from: f64, to: f64, points: usize) -> Result<Vec<fermionic_rc::scenario::DemonRow>, String> {
    let cfg = ScenarioConfig {
        model,
        sweep: Some(Sweep { axis, from, to, points }),
        ..Default::default()
    };
    let rows = run_demon_sweep(&cfg).map_err(|e| e.to_string())?;
    if let Some(bad) = rows.iter().find(|r| !r.solved()) {
        return Err(format!("point failed: {:?}", bad.error));
    }
    Ok(rows)
}

fn trends() -> Outcome {
    let mut checks = Vec::new();

    // (a) model1 over Δ_S, reaching far enough below Γ_S-scale widths for the
    // RC current to collapse.
    match sweep(ModelVariant::Model1, SweepAxis::DeltaS, 1e-6, 1.0, 40) {
        Err(e) => checks.push((false, format!("(a) {e}"))),
        Ok(rows) => {
            let rc: Vec<f64> = rows.iter().map(|r| r.i_m_over_gamma_s.unwrap().abs()).collect();
            let naive: Vec<f64> = rows.iter().map(|r| r.dqdmd_i_m_over_gamma_s.unwrap().abs()).collect();
            let kmax = rc
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(k, _)| k)
                .unwrap();
            let rise = longest_run(&rc, 0..kmax + 1, 1.0);
            let fall = longest_run(&rc, kmax..rc.len(), -1.0);
            let naive_fall = longest_run(&naive, 0..kmax + 1, -1.0);
            let vanish = rc[0] < 0.1 * rc[kmax];
            let naive_finite = naive[0] > 0.5 * naive[kmax];
            checks.push((
                kmax > 0 && kmax < rc.len() - 1 && rise >= 5 && fall >= 5,
                format!("(a) interior max of |I_M|/Γ_S at Δ_S={:.2e}, rise run {rise}, fall run {fall}", rows[kmax].delta_s),
            ));
            checks.push((
                vanish,
                format!("(a) RC |I_M|/Γ_S at the smallest Δ_S is {:.2e} of the maximum", rc[0] / rc[kmax]),
            ));
            checks.push((
                naive_finite && naive_fall >= 5,
                format!("(a) dqdmd stays finite ({:.2e} of its value at the RC max), decreasing run {naive_fall}", naive[0] / naive[kmax]),
            ));
        }
    }

    // (b) model2 over Γ_S.
    match sweep(ModelVariant::Model2, SweepAxis::GammaS, 1e-6, 1e-2, 40) {
        Err(e) => checks.push((false, format!("(b) {e}"))),
        Ok(rows) => {
            let start = rows.iter().position(|r| r.gamma_s >= 1e-4).unwrap();
            let im: Vec<f64> = rows.iter().map(|r| r.i_m_over_gamma_s.unwrap().abs()).collect();
            let mi: Vec<f64> = rows.iter().map(|r| r.mi.unwrap()).collect();
            let a = longest_run(&im, start..rows.len(), -1.0);
            let b = longest_run(&mi, start..rows.len(), -1.0);
            checks.push((a >= 5, format!("(b) |I_M|/Γ_S decreasing run {a} past Γ_S=1e-4")));
            checks.push((b >= 5, format!("(b) MI decreasing run {b} past Γ_S=1e-4")));
        }
    }

    // (c) model2 over β_D/β.
    match sweep(ModelVariant::Model2, SweepAxis::BetaRatio, 1.0, 1000.0, 40) {
        Err(e) => checks.push((false, format!("(c) {e}"))),
        Ok(rows) => {
            let mi: Vec<f64> = rows.iter().map(|r| r.mi.unwrap()).collect();
            let run = longest_run(&mi, 0..rows.len(), 1.0);
            checks.push((run >= 5, format!("(c) MI increasing run {run} in β_D/β")));
        }
    }
    check(&checks)
}

// --- 7 -------------------------------------------------------------------

fn weak_coupling() -> Outcome {
    match sweep(ModelVariant::Dqdmd, SweepAxis::GammaS, 1e-7, 1e-6, 10) {
        Err(e) => outcome(false, e),
        Ok(rows) => {
            let v: Vec<f64> = rows.iter().map(|r| r.i_m_over_gamma_s.unwrap()).collect();
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let spread = (max - min) / min.abs().max(max.abs()).max(f64::MIN_POSITIVE);
            check(&[(spread < 0.01, format!("I_M/Γ_S spread {spread:.2e} < 1e-2 over Γ_S∈[1e-7,1e-6]"))])
        }
    }
}

// --- 8 -------------------------------------------------------------------

fn operator_algebra() -> Outcome {
    let alg = ModeAlgebra::new(5).expect("5 modes");
    let ops: Vec<CMatrix> = alg.annihilators().iter().map(|a| a.to_dense()).collect();
    let dim = alg.dim();
    let id = CMatrix::identity(dim, dim);
    let zero = CMatrix::zeros(dim, dim);
    let mut exact = 0;
    let mut total = 0;
    for i in 0..5 {
        for j in 0..5 {
            let ac = anticommutator(&ops[i], &ops[j].adjoint());
            total += 2;
            if (i == j && ac == id) || (i != j && ac == zero) {
                exact += 1;
            }
            if anticommutator(&ops[i], &ops[j]) == zero {
                exact += 1;
            }
        }
    }
    let mut worst: f64 = 0.0;
    for v in ModelVariant::ALL {
        match build_model(v, &DemonParams::default()) {
            Ok(m) => worst = worst.max(m.number_commutator()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    check(&[
        (exact == total, format!("{exact}/{total} anticommutators exact")),
        (worst == 0.0, format!("max |[H,N]| over presets {worst:.1e}")),
    ])
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut reports = Vec::new();
    results.push(("1 Lorentzian RC mapping", timed(Duration::from_secs(1), lorentzian_mapping)));
    results.push(("2 Semicircle fixed point", timed(Duration::from_secs(10), semicircle_fixed_point)));
    results.push(("3 SET benchmark", timed(Duration::from_secs(120), || set_benchmark(&mut reports))));
    results.push(("5 Demon regime", timed(Duration::from_secs(60), || demon_regime(&mut reports))));
    results.push(("4 Conservation suite", conservation_suite(&reports)));
    results.push(("6 Trend checks", timed(Duration::from_secs(600), trends)));
    results.push(("7 Weak-coupling proportionality", weak_coupling()));
    results.push(("8 Operator algebra", operator_algebra()));
    results.sort_by_key(|(name, _)| name.split_whitespace().next().and_then(|n| n.parse::<u32>().ok()));

    let mut all = true;
    for (name, o) in &results {
        all &= o.pass;
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
