use serde::{Deserialize, Serialize};

use super::{chebyshev_grid, lorentzian_grid, SpectralDensity};
use crate::parallel::{self, Execution};
use crate::quadrature::Tolerance;
use crate::{Error, Result};

/// Residual values in `[-BREAKDOWN_TOLERANCE · max J, 0)` are clamped to zero;
/// anything more negative aborts the mapping.
pub const BREAKDOWN_TOLERANCE: f64 = 1e-8;

/// One step of the chain: coupling `λ ≥ 0` to the extracted mode, its on-site
/// energy `E`, and the residual density seen by that mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcLevel {
    pub coupling: f64,
    pub energy: f64,
    pub residual: SpectralDensity,
    /// Weight `∫ J dω/2π` lying outside the quadrature window (Lorentzian
    /// inputs on the quadrature route); already included in `coupling`.
    pub truncated_weight: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct MappingOptions {
    /// Nodes used when a residual has to be tabulated.
    pub grid_points: usize,
    pub tolerance: Tolerance,
    pub execution: Execution,
}

impl Default for MappingOptions {
    fn default() -> Self {
        MappingOptions {
            grid_points: 1025,
            tolerance: Tolerance::new(1e-14, 1e-11),
            execution: Execution::default(),
        }
    }
}

/// Single RC mapping step with default options.
pub fn rc_map(sd: &SpectralDensity) -> Result<RcLevel> {
    rc_map_with(sd, &MappingOptions::default())
}

/// Single RC mapping step.
///
/// Lorentzian and semicircle inputs use their closed-form images (flat
/// residual of height `2Δ` on the cutoff window; the semicircle is a fixed
/// point). Flat and tabulated inputs are mapped numerically and the residual
/// is returned tabulated.
pub fn rc_map_with(sd: &SpectralDensity, opts: &MappingOptions) -> Result<RcLevel> {
    rc_map_level(sd, opts, 0)
}

fn rc_map_level(sd: &SpectralDensity, opts: &MappingOptions, level: usize) -> Result<RcLevel> {
    sd.validate()?;
    match *sd {
        SpectralDensity::Lorentzian {
            gamma,
            width,
            center,
            cutoff,
        } => {
            if gamma <= 0.0 {
                return Err(Error::DegenerateSd {
                    weight: sd.weight(),
                });
            }
            Ok(RcLevel {
                coupling: (0.5 * gamma * width).sqrt(),
                energy: center,
                residual: SpectralDensity::flat(
                    2.0 * width,
                    center - cutoff * width,
                    center + cutoff * width,
                ),
                truncated_weight: 0.0,
            })
        }
        SpectralDensity::Semicircle { center, radius } => Ok(RcLevel {
            coupling: 0.5 * radius,
            energy: center,
            residual: sd.clone(),
            truncated_weight: 0.0,
        }),
        SpectralDensity::Flat { .. } | SpectralDensity::Tabulated(_) => {
            let weight = sd.weight();
            check_weight(weight)?;
            let energy = sd.first_moment() / weight;
            let grid = match sd {
                SpectralDensity::Tabulated(t) => t.omega().to_vec(),
                _ => {
                    let (a, b) = sd.support();
                    chebyshev_grid(a, b, opts.grid_points)
                }
            };
            let values = parallel::map(opts.execution, &grid, |&w| {
                residual_value(4.0 * weight, sd.eval(w), sd.cauchy_plus(w).norm_sqr())
            });
            let residual = finish_residual(grid, values, level)?;
            Ok(RcLevel {
                coupling: weight.sqrt(),
                energy,
                residual,
                truncated_weight: 0.0,
            })
        }
    }
}

/// RC mapping evaluated purely by adaptive quadrature, without the closed
/// forms. Lorentzian inputs are integrated over their cutoff window; the tail
/// weight beyond it is added analytically and reported as
/// [`RcLevel::truncated_weight`]. The residual is always tabulated.
pub fn rc_map_quadrature(sd: &SpectralDensity, opts: &MappingOptions) -> Result<RcLevel> {
    sd.validate()?;
    let (w0, w1) = sd.moments_quadrature(opts.tolerance)?;
    let tail = sd.tail_weight();
    let (weight, first) = match *sd {
        SpectralDensity::Lorentzian { center, .. } => (w0 + tail, w1 + center * tail),
        _ => (w0, w1),
    };
    check_weight(weight)?;
    let (a, b) = sd.support();
    let grid = match *sd {
        SpectralDensity::Lorentzian {
            width,
            center,
            cutoff,
            ..
        } => {
            // Window edges are excluded: the truncated principal value
            // diverges there.
            let g = lorentzian_grid(center, width, cutoff, opts.grid_points);
            g[1..g.len() - 1].to_vec()
        }
        SpectralDensity::Tabulated(ref t) => t.omega().to_vec(),
        _ => chebyshev_grid(a, b, opts.grid_points),
    };
    let compact = sd.is_compact();
    let values: Vec<Result<f64>> = parallel::map(opts.execution, &grid, |&w| {
        let j = sd.eval(w);
        if j == 0.0 || (compact && (w <= a || w >= b)) {
            return Ok(0.0);
        }
        let wp = sd.cauchy_plus_quadrature(w, opts.tolerance)?;
        Ok(residual_value(4.0 * weight, j, wp.norm_sqr()))
    });
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(RcLevel {
        coupling: weight.sqrt(),
        energy: first / weight,
        residual: finish_residual(grid, values, 0)?,
        truncated_weight: tail,
    })
}

/// Apply the mapping `n` times, feeding each residual into the next step.
/// Level `k` carries `(λ_k, E_{k+1}, J_{k+1})`.
pub fn iterate_chain(
    sd: &SpectralDensity,
    n: usize,
    opts: &MappingOptions,
) -> Result<Vec<RcLevel>> {
    if n == 0 {
        return Err(Error::invalid("chain length must be at least 1"));
    }
    if !sd.is_compact() {
        return Err(Error::invalid(
            "iterated mapping needs a finite support (flat, semicircle or tabulated SD)",
        ));
    }
    let mut levels = Vec::with_capacity(n);
    let mut current = sd.clone();
    for k in 0..n {
        let level = rc_map_level(&current, opts, k)?;
        current = level.residual.clone();
        levels.push(level);
    }
    Ok(levels)
}

fn check_weight(weight: f64) -> Result<()> {
    if weight > 0.0 && weight.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateSd { weight })
    }
}

#[inline]
fn residual_value(four_lambda_sq: f64, j: f64, w_norm_sq: f64) -> f64 {
    if j == 0.0 || !w_norm_sq.is_finite() {
        0.0
    } else {
        four_lambda_sq * j / w_norm_sq
    }
}

fn finish_residual(grid: Vec<f64>, mut values: Vec<f64>, level: usize) -> Result<SpectralDensity> {
    let max_value = values.iter().copied().fold(0.0, f64::max);
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::MappingBreakdown {
            level,
            min_value: f64::NAN,
            max_value,
        });
    }
    if min_value < -BREAKDOWN_TOLERANCE * max_value {
        return Err(Error::MappingBreakdown {
            level,
            min_value,
            max_value,
        });
    }
    for v in values.iter_mut() {
        *v = v.max(0.0);
    }
    if max_value <= 0.0 {
        return Err(Error::DegenerateSd { weight: 0.0 });
    }
    SpectralDensity::tabulated(grid, values)
}
