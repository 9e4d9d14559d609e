//! Globally adaptive Gauss-Kronrod quadrature and Cauchy principal values.
//!
//! The integrator keeps a max-heap of subintervals keyed by their error
//! estimate and bisects the worst one until the requested tolerance is met
//! (QUADPACK `qagp` strategy with user breakpoints).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 8-point Gauss-Legendre rule on [-1, 1] (nodes, weights).
pub const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

/// 3-point Gauss-Legendre rule on [-1, 1]; exact through degree 5.
pub const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-14,
            rel: 1e-11,
            max_subdivisions: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let resasc = resasc * half.abs();
    let value = resk * half;
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    // Floor at rounding level of the rule itself.
    let floor = 50.0 * f64::EPSILON * (resk * half).abs();
    Segment {
        a,
        b,
        value,
        error: error.max(floor),
    }
}

/// Integrate `f` over `[points[0], points[last]]`, splitting at every interior
/// breakpoint first. `points` must be sorted ascending with at least 2 entries.
pub fn integrate<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: Tolerance) -> Result<Estimate> {
    if points.len() < 2 {
        return Err(Error::invalid("integration needs at least two breakpoints"));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if !(w[0] < w[1]) {
            if w[0] == w[1] {
                continue;
            }
            return Err(Error::invalid(format!(
                "breakpoints not ascending: {} then {}",
                w[0], w[1]
            )));
        }
        heap.push(kronrod15(&f, w[0], w[1]));
        evaluations += 15;
    }
    if heap.is_empty() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations,
        });
    }
    let mut total: f64 = heap.iter().map(|s| s.value).sum();
    let mut err: f64 = heap.iter().map(|s| s.error).sum();
    let mut subdivisions = 0;
    while err > tol.abs.max(tol.rel * total.abs()) || !err.is_finite() {
        if subdivisions >= tol.max_subdivisions || !total.is_finite() {
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // Interval exhausted at machine precision.
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
            });
        }
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        evaluations += 30;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // Re-sum to shed accumulated cancellation.
            total = heap.iter().map(|s| s.value).sum();
            err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value = heap.iter().map(|s| s.value).sum();
    Ok(Estimate {
        value,
        error: err,
        evaluations,
    })
}

/// Cauchy principal value `P ∫_a^b g(x) / (x - y) dx`.
///
/// For `y` strictly inside `(a, b)` the singularity is subtracted:
/// `∫ (g(x) - g(y)) / (x - y) dx + g(y) ln((b - y) / (y - a))`.
/// `breaks` are extra interior points (kinks, Fermi edges) to split at.
pub fn principal_value<F: Fn(f64) -> f64>(
    g: F,
    a: f64,
    b: f64,
    y: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    if !(a < b) {
        return Err(Error::invalid(format!("empty interval [{a}, {b}]")));
    }
    if !y.is_finite() {
        return Err(Error::invalid("principal value at non-finite point"));
    }
    let mut points = vec![a, b];
    points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    if y > a && y < b {
        points.push(y);
        points.sort_by(f64::total_cmp);
        points.dedup();
        let gy = g(y);
        let est = integrate(
            |x| {
                let dx = x - y;
                if dx == 0.0 {
                    0.0
                } else {
                    (g(x) - gy) / dx
                }
            },
            &points,
            tol,
        )?;
        Ok(Estimate {
            value: est.value + gy * ((b - y) / (y - a)).ln(),
            ..est
        })
    } else if y == a || y == b {
        let gy = g(y);
        if gy != 0.0 {
            return Err(Error::invalid(format!(
                "principal value diverges at support edge {y}"
            )));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        integrate(|x| if x == y { 0.0 } else { g(x) / (x - y) }, &points, tol)
    } else {
        points.sort_by(f64::total_cmp);
        points.dedup();
        integrate(|x| g(x) / (x - y), &points, tol)
    }
}

/// Apply a fixed rule on `[a, b]`.
pub fn fixed_rule<F: Fn(f64) -> f64>(rule: &[(f64, f64)], f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    rule.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}
