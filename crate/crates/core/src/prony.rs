//! Prony-type jump estimation.
//!
//! Multiplying the coefficients by `2πik` turns the leading term of the
//! coefficient asymptotics into an undamped exponential sum,
//!
//! ```text
//! y[k] = 2πik·f̂_k ≈ Σ_j a_j z_j^k,   z_j = e^{−ix_j},
//! ```
//!
//! whose nodes are found by linear prediction and polynomial rooting, and
//! whose amplitudes (the jump heights) by a Vandermonde least-squares solve.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::concentration::{refine_jumps, DetectionConfig};
use crate::error::{Error, Result};
use crate::jumps::{circular_distance, wrap_angle, Jump, JumpSet};
use crate::linalg;
use crate::spectrum::Spectrum1D;

/// Model order: fixed, or chosen from the singular-value gap of the Hankel
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelOrder {
    Fixed(usize),
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PronyConfig {
    pub order: ModelOrder,
    /// Lowest index used; `None` means `max(1, ⌊N/2⌋)`.
    pub k_min: Option<usize>,
    pub svd_gap_threshold: f64,
    pub unit_circle_projection: bool,
    /// Polish the nodes and heights with the same nonlinear least-squares fit
    /// the concentration detector uses. Raw Prony locations are only
    /// `O(N⁻²)` accurate, which caps the reconstruction rate near `N⁻¹`.
    pub refine: bool,
}

impl Default for PronyConfig {
    fn default() -> Self {
        Self {
            order: ModelOrder::Auto,
            k_min: None,
            svd_gap_threshold: 1e3,
            unit_circle_projection: true,
            refine: true,
        }
    }
}

impl PronyConfig {
    pub fn with_order(order: usize) -> Self {
        Self { order: ModelOrder::Fixed(order), ..Self::default() }
    }

    pub fn resolved_k_min(&self, band: usize) -> usize {
        self.k_min.unwrap_or(band / 2).max(1)
    }
}

/// Roots further than this from the unit circle are discarded before
/// projection.
pub const MAX_ROOT_MODULUS_DEVIATION: f64 = 0.2;
/// Roots closer than this on the circle are merged.
pub const ROOT_MERGE_DISTANCE: f64 = 1e-6;
/// Vandermonde condition numbers above this are rejected.
pub const MAX_VANDERMONDE_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct PronyEstimate {
    pub jumps: JumpSet,
    pub model_order: usize,
    /// Set when some fitted amplitude had `|Im| > 0.05·|Re|`.
    pub imaginary_height_warning: bool,
    pub vandermonde_condition: f64,
}

/// `y[k] = 2πik·f̂_k` for `k = 1..=N` (element 0 holds `k = 1`).
pub fn prony_observations(spectrum: &Spectrum1D) -> Vec<Complex64> {
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    (1..=spectrum.band() as i64)
        .map(|k| two_pi_i * k as f64 * spectrum.get(k))
        .collect()
}

/// Number of Hankel singular values above `σ_max / svd_gap_threshold`,
/// capped at `⌊L/3⌋` where `L` is the number of samples from `k_min` up.
pub fn estimate_model_order(y: &[Complex64], cfg: &PronyConfig) -> Result<usize> {
    let band = y.len();
    let k_min = cfg.resolved_k_min(band);
    let samples = &y[(k_min - 1).min(band)..];
    let len = samples.len();
    let j_max = len / 3;
    if j_max == 0 {
        return Err(Error::TooFewSamples { needed: 3, got: len });
    }
    let rows = len - j_max;
    let hankel = DMatrix::from_fn(rows, j_max + 1, |r, c| samples[r + c]);
    let sv = linalg::singular_values(hankel);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    let cut = top / cfg.svd_gap_threshold;
    Ok(sv.iter().filter(|&&s| s > cut).count().min(j_max))
}

/// Estimates jump locations and heights from the coefficients.
pub fn prony_estimate(spectrum: &Spectrum1D, cfg: &PronyConfig) -> Result<PronyEstimate> {
    let band = spectrum.band();
    let y = prony_observations(spectrum);
    let order = match cfg.order {
        ModelOrder::Fixed(j) => j,
        ModelOrder::Auto => estimate_model_order(&y, cfg)?,
    };
    let k_min = cfg.resolved_k_min(band);
    if order == 0 {
        return Ok(PronyEstimate {
            jumps: JumpSet::empty(),
            model_order: 0,
            imaginary_height_warning: false,
            vandermonde_condition: 1.0,
        });
    }
    if band < 2 * order + 1 || k_min + 2 * order > band {
        return Err(Error::TooFewCoefficients { band, order, k_min });
    }
    let obs = |k: usize| y[k - 1];

    // Forward linear prediction: Σ_i p_i y[m+i] = −y[m+J].
    let rows = band - order - k_min + 1;
    let lp = DMatrix::from_fn(rows, order, |r, c| obs(k_min + r + c));
    let rhs = DVector::from_fn(rows, |r, _| -obs(k_min + r + order));
    let (p, _) = linalg::lstsq(lp, &rhs).ok_or_else(|| Error::DegenerateFit("prediction solve failed".into()))?;
    let roots = linalg::monic_roots(p.as_slice())
        .ok_or_else(|| Error::DegenerateFit("companion eigenvalues did not converge".into()))?;

    let mut nodes: Vec<Complex64> = Vec::with_capacity(roots.len());
    for z in roots {
        let r = z.norm();
        if !r.is_finite() || r == 0.0 {
            continue;
        }
        if cfg.unit_circle_projection {
            if (r - 1.0).abs() > MAX_ROOT_MODULUS_DEVIATION {
                continue;
            }
            nodes.push(z / r);
        } else {
            nodes.push(z);
        }
    }
    let nodes = merge_close_nodes(nodes);
    if nodes.is_empty() {
        return Ok(PronyEstimate {
            jumps: JumpSet::empty(),
            model_order: order,
            imaginary_height_warning: false,
            vandermonde_condition: 1.0,
        });
    }

    let samples = band - k_min + 1;
    let vander = DMatrix::from_fn(samples, nodes.len(), |r, c| nodes[c].powi((k_min + r) as i32));
    let target = DVector::from_fn(samples, |r, _| obs(k_min + r));
    let (amps, cond) =
        linalg::lstsq(vander, &target).ok_or_else(|| Error::DegenerateFit("height solve failed".into()))?;
    if cond > MAX_VANDERMONDE_CONDITION {
        return Err(Error::IllConditioned(cond));
    }

    let mut warning = false;
    let mut entries: Vec<Jump> = nodes
        .iter()
        .zip(amps.iter())
        .map(|(z, c)| {
            if c.im.abs() > 0.05 * c.re.abs() {
                warning = true;
            }
            Jump { location: wrap_angle(-z.arg()), height: c.re }
        })
        .collect();
    let hmax = entries.iter().fold(0.0_f64, |m, j| m.max(j.height.abs()));
    entries.retain(|j| j.height.abs() >= 1e-8 * hmax && j.height != 0.0);
    let mut jumps = JumpSet::new(entries)?;
    if cfg.refine && !jumps.is_empty() {
        let r = refine_jumps(spectrum, &jumps, &DetectionConfig::default())?;
        if !r.diverged && r.jumps.len() == jumps.len() {
            jumps = r.jumps;
        }
    }
    Ok(PronyEstimate {
        jumps,
        model_order: order,
        imaginary_height_warning: warning,
        vandermonde_condition: cond,
    })
}

/// Averages nodes whose angles are within [`ROOT_MERGE_DISTANCE`].
fn merge_close_nodes(mut nodes: Vec<Complex64>) -> Vec<Complex64> {
    nodes.sort_by(|a, b| (-a.arg()).total_cmp(&(-b.arg())));
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for z in nodes {
        match out.iter_mut().find(|(w, n)| circular_distance((*w / *n as f64).arg(), z.arg()) < ROOT_MERGE_DISTANCE) {
            Some((w, n)) => {
                *w += z;
                *n += 1;
            }
            None => out.push((z, 1)),
        }
    }
    out.into_iter()
        .map(|(w, n)| {
            let mean = w / n as f64;
            if n > 1 {
                mean / mean.norm()
            } else {
                mean
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{h, ramp_sum};
    use crate::spectral::match_jump_sets;

    #[test]
    fn observations_of_unit_ramp_are_pure_exponentials() {
        let x0 = 0.4;
        let spec = ramp_sum(&JumpSet::from_pairs(&[(x0, 1.0)]).unwrap())
            .fourier_coeffs_exact(12)
            .unwrap();
        let y = prony_observations(&spec);
        for (i, v) in y.iter().enumerate() {
            let k = (i + 1) as f64;
            assert!((v - Complex64::from_polar(1.0, -k * x0)).norm() < 1e-13);
        }
        assert!(prony_observations(&Spectrum1D::zeros(5)).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn single_ramp_is_recovered_exactly() {
        let spec = ramp_sum(&JumpSet::from_pairs(&[(1.0, 1.0)]).unwrap())
            .fourier_coeffs_exact(8)
            .unwrap();
        let est = prony_estimate(&spec, &PronyConfig::with_order(1)).unwrap();
        let j = est.jumps.iter().next().unwrap();
        assert!((j.location - 1.0).abs() < 1e-12);
        assert!((j.height - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_ramps_are_recovered() {
        let truth = JumpSet::from_pairs(&[(-2.0, 0.5), (0.3, -1.25), (2.7, 2.0)]).unwrap();
        let spec = ramp_sum(&truth).fourier_coeffs_exact(16).unwrap();
        let est = prony_estimate(&spec, &PronyConfig::with_order(3)).unwrap();
        let m = match_jump_sets(&truth, &est.jumps).unwrap();
        assert!(m.eps_location < 1e-10 && m.delta_height < 1e-10, "{m:?}");
        assert!(!est.imaginary_height_warning);
    }

    #[test]
    fn model_order_from_singular_values() {
        let truth = JumpSet::from_pairs(&[(-2.0, 0.5), (0.3, -1.25), (2.7, 2.0)]).unwrap();
        let y = prony_observations(&ramp_sum(&truth).fourier_coeffs_exact(50).unwrap());
        assert_eq!(estimate_model_order(&y, &PronyConfig::default()).unwrap(), 3);
        let zeros = vec![Complex64::new(0.0, 0.0); 50];
        assert_eq!(estimate_model_order(&zeros, &PronyConfig::default()).unwrap(), 0);
        assert!(estimate_model_order(&zeros[..2], &PronyConfig::default()).is_err());
    }

    #[test]
    fn h_at_band_50() {
        let f = h();
        let est = prony_estimate(&f.fourier_coeffs_exact(50).unwrap(), &PronyConfig::with_order(6)).unwrap();
        let m = match_jump_sets(&f.jump_set(), &est.jumps).unwrap();
        assert!(m.eps_location <= 1e-2 && m.delta_height <= 1e-2, "{m:?}");
    }

    #[test]
    fn too_few_coefficients() {
        let spec = h().fourier_coeffs_exact(6).unwrap();
        assert!(matches!(
            prony_estimate(&spec, &PronyConfig::with_order(6)),
            Err(Error::TooFewCoefficients { .. })
        ));
    }
}
