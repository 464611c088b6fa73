//! Concentration-kernel edge detection.
//!
//! The conjugate sum
//!
//! ```text
//! K_N^σ[f](x) = Σ_{|k|≤N} f̂_k · i·sgn(k)·σ(|k|/N) · e^{ikx}
//! ```
//!
//! tends to the jump function `[f](x)`: it peaks at each discontinuity with
//! the value of the jump and decays elsewhere. Peaks give candidate jumps,
//! which are then refined by fitting the exponential model
//! `2πik·f̂_k ≈ Σ_j a_j e^{−ikx_j}` over the upper part of the band.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jumps::{circular_distance, wrap_angle, Jump, JumpSet};
use crate::linalg;
use crate::quadrature::adaptive;
use crate::spectral::{eval_series, uniform_grid, SampledFunction, REALNESS_TOL};
use crate::spectrum::Spectrum1D;

/// Below this `max |K|` a function is treated as smooth.
pub const PEAK_FLOOR: f64 = 1e-12;

/// Factor family and its free parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FactorSpec {
    Trigonometric { alpha: f64 },
    Polynomial { order: u32 },
    Exponential { alpha: f64 },
}

impl Default for FactorSpec {
    fn default() -> Self {
        FactorSpec::Trigonometric { alpha: PI }
    }
}

impl FactorSpec {
    pub fn trigonometric() -> Self {
        FactorSpec::Trigonometric { alpha: PI }
    }

    pub fn polynomial() -> Self {
        FactorSpec::Polynomial { order: 1 }
    }

    pub fn exponential() -> Self {
        FactorSpec::Exponential { alpha: 6.0 }
    }

    /// Binds the family to a band limit, computing its normalisation.
    pub fn build(self, band: usize) -> Result<ConcentrationFactor> {
        let constant = match self {
            FactorSpec::Trigonometric { alpha } => {
                check_alpha(alpha)?;
                sine_integral(alpha)
            }
            FactorSpec::Polynomial { order } => {
                if order == 0 {
                    return Err(Error::InvalidConfig("polynomial order must be at least 1".into()));
                }
                1.0
            }
            FactorSpec::Exponential { alpha } => {
                check_alpha(alpha)?;
                if band < 3 {
                    return Err(Error::InvalidConfig(format!(
                        "exponential factor needs N >= 3, got {band}"
                    )));
                }
                let lo = 1.0 / band as f64;
                let integral = adaptive(&|t: f64| exp_bump(alpha, t), lo, 1.0 - lo, 1e-13);
                PI / integral
            }
        };
        Ok(ConcentrationFactor { spec: self, band, constant })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("alpha must be positive, got {alpha}")))
    }
}

/// `Si(x) = ∫₀ˣ sin(t)/t dt`.
pub fn sine_integral(x: f64) -> f64 {
    let sinc = |t: f64| if t == 0.0 { 1.0 } else { t.sin() / t };
    adaptive(&sinc, 0.0, x, 1e-13)
}

fn exp_bump(alpha: f64, t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (1.0 / (alpha * t * (t - 1.0))).exp()
    }
}

/// A factor family bound to a band limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationFactor {
    spec: FactorSpec,
    band: usize,
    /// `Si(α)` for the trigonometric family, `C` for the exponential one.
    constant: f64,
}

impl ConcentrationFactor {
    pub fn spec(&self) -> FactorSpec {
        self.spec
    }

    pub fn band(&self) -> usize {
        self.band
    }

    /// `σ(η)` for `η = |k|/N ∈ (0, 1]`.
    pub fn eval(&self, eta: f64) -> f64 {
        match self.spec {
            FactorSpec::Trigonometric { alpha } => PI * (alpha * eta).sin() / self.constant,
            FactorSpec::Polynomial { order } => order as f64 * PI * eta.powi(order as i32),
            FactorSpec::Exponential { alpha } => self.constant * eta * exp_bump(alpha, eta),
        }
    }
}

pub fn factor_eval(factor: &ConcentrationFactor, eta: f64) -> f64 {
    factor.eval(eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionConfig {
    pub grid_size: usize,
    pub threshold_rel: f64,
    /// `None` means `2π·log₁₀(N)/N`.
    pub min_separation: Option<f64>,
    pub refine: bool,
    /// With `false` the peak locations are kept and only the heights (and
    /// higher model terms) are fitted.
    pub refine_locations: bool,
    /// `None` means `⌈N/4⌉`.
    pub refine_k_min: Option<usize>,
    pub max_refine_iters: usize,
    /// Terms of the coefficient asymptotics fitted per jump: 1 fits the
    /// jump alone, 2 adds the jump in `f'`, and so on. `None` uses 2 for
    /// exact spectra and 1 for noisy ones, where the extra parameters cost
    /// more in variance than they remove in bias.
    pub model_terms: Option<usize>,
    /// Refined jumps whose height is below this many standard errors are
    /// dropped. `0` disables the test.
    pub min_height_z: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            grid_size: 4096,
            threshold_rel: 0.1,
            min_separation: None,
            refine: true,
            refine_locations: true,
            refine_k_min: None,
            max_refine_iters: 50,
            model_terms: None,
            min_height_z: 5.0,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self, band: usize) -> Result<()> {
        if !(self.threshold_rel > 0.0 && self.threshold_rel < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "threshold_rel must lie in (0, 1), got {}",
                self.threshold_rel
            )));
        }
        if self.grid_size < 8 * band {
            return Err(Error::InvalidConfig(format!(
                "grid_size {} is below 8N = {}",
                self.grid_size,
                8 * band
            )));
        }
        if let Some(t) = self.model_terms {
            if !(1..=4).contains(&t) {
                return Err(Error::InvalidConfig(format!("model_terms must be 1..=4, got {t}")));
            }
        }
        if !(self.min_height_z >= 0.0) {
            return Err(Error::InvalidConfig(format!("min_height_z must be >= 0, got {}", self.min_height_z)));
        }
        if let Some(sep) = self.min_separation {
            if !(sep >= 0.0 && sep.is_finite()) {
                return Err(Error::InvalidConfig(format!("min_separation must be >= 0, got {sep}")));
            }
        }
        Ok(())
    }

    pub fn resolved_min_separation(&self, band: usize) -> f64 {
        self.min_separation
            .unwrap_or_else(|| 2.0 * PI * (band.max(2) as f64).log10() / band.max(1) as f64)
    }

    pub fn resolved_model_terms(&self, noisy: bool) -> usize {
        self.model_terms.unwrap_or(if noisy { 1 } else { 2 })
    }

    pub fn resolved_refine_k_min(&self, band: usize) -> usize {
        self.refine_k_min.unwrap_or(band.div_ceil(4)).max(1)
    }
}

/// Coefficients `f̂_k · i·sgn(k)·σ(|k|/N)` of the conjugate sum.
fn conjugate_coeffs(spectrum: &Spectrum1D, factor: &ConcentrationFactor) -> Vec<Complex64> {
    let n = spectrum.band() as f64;
    spectrum
        .indices()
        .map(|k| {
            if k == 0 {
                return Complex64::new(0.0, 0.0);
            }
            let s = factor.eval(k.unsigned_abs() as f64 / n) * (k.signum() as f64);
            spectrum.get(k) * Complex64::new(0.0, s)
        })
        .collect()
}

/// Evaluates `K_N^σ[f]` on `grid` by direct summation.
pub fn concentration_sum(
    spectrum: &Spectrum1D,
    factor: &ConcentrationFactor,
    grid: &[f64],
) -> Result<SampledFunction> {
    if factor.band() != spectrum.band() {
        return Err(Error::BandMismatch { factor: factor.band(), spectrum: spectrum.band() });
    }
    let coeffs = conjugate_coeffs(spectrum, factor);
    let band = spectrum.band();
    let guard = !spectrum.is_noisy();
    let values = grid
        .par_iter()
        .map(|&x| {
            let z = eval_series(&coeffs, band, x);
            if guard && z.im.abs() > REALNESS_TOL * (1.0 + z.re.abs()) {
                return Err(Error::NonRealResult { residual: z.im.abs(), x });
            }
            Ok(z.re)
        })
        .collect::<Result<Vec<_>>>()?;
    SampledFunction::new(grid.to_vec(), values)
}

/// Thresholded local maxima of `|K|` (periodic neighbours), thinned so that
/// kept peaks are at least `min_separation` apart, largest first.
pub fn detect_peaks(k: &SampledFunction, threshold_rel: f64, min_separation: f64) -> Result<JumpSet> {
    let n = k.len();
    let peak = k.max_abs();
    if n < 3 || peak < PEAK_FLOOR {
        return Ok(JumpSet::empty());
    }
    let cut = threshold_rel * peak;
    let mag = |i: usize| k.values[i].abs();
    let mut cands: Vec<usize> = (0..n)
        .filter(|&i| {
            let m = mag(i);
            m >= cut && m >= mag((i + n - 1) % n) && m > mag((i + 1) % n)
        })
        .collect();
    cands.sort_by(|&a, &b| mag(b).total_cmp(&mag(a)).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in cands {
        if kept.iter().all(|&j| circular_distance(k.grid[i], k.grid[j]) >= min_separation) {
            kept.push(i);
        }
    }
    JumpSet::new(kept.into_iter().map(|i| Jump { location: k.grid[i], height: k.values[i] }))
}

/// Outcome of [`refine_jumps`].
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub jumps: JumpSet,
    /// The damped iteration never improved on the candidates; `jumps` are the
    /// candidates unchanged.
    pub diverged: bool,
    pub iterations: usize,
    pub objective_before: f64,
    pub objective_after: f64,
}

/// Consecutive rejected steps after which the iteration gives up.
const MAX_REJECTED_STEPS: usize = 5;
/// Refined heights more than this multiple of the largest seed height are
/// treated as a failed fit.
const MAX_HEIGHT_GROWTH: f64 = 4.0;

struct ModelFit {
    /// `coeffs[j·terms + m]` multiplies `(ik)^{−m} e^{−ikx_j}`; `m = 0` is
    /// the jump height.
    coeffs: Vec<f64>,
    residual: Vec<Complex64>,
    objective: f64,
}

impl ModelFit {
    fn height(&self, j: usize, terms: usize) -> f64 {
        self.coeffs[j * terms]
    }
}

/// `(ik)^{−m} e^{−ikx}`
fn basis(k: f64, x: f64, m: usize) -> Complex64 {
    Complex64::from_polar(1.0, -k * x) * Complex64::new(0.0, k).powi(-(m as i32))
}

/// Real coefficients minimising
/// `Σ_k |y_k − Σ_j Σ_{m<terms} c_{jm} (ik)^{−m} e^{−ikx_j}|²` for fixed
/// locations.
fn fit_heights(y: &[Complex64], ks: &[f64], locs: &[f64], terms: usize) -> Option<ModelFit> {
    let rows = ks.len();
    let cols = locs.len() * terms;
    let col = |r: usize, c: usize| basis(ks[r], locs[c / terms], c % terms);
    let a = DMatrix::from_fn(2 * rows, cols, |r, c| {
        let z = col(r % rows, c);
        if r < rows {
            z.re
        } else {
            z.im
        }
    });
    let b = DVector::from_fn(2 * rows, |r, _| if r < rows { y[r].re } else { y[r - rows].im });
    let (coeffs, _) = linalg::lstsq(a, &b)?;
    let coeffs: Vec<f64> = coeffs.iter().copied().collect();
    let residual: Vec<Complex64> = (0..rows)
        .map(|r| y[r] - (0..cols).map(|c| coeffs[c] * col(r, c)).sum::<Complex64>())
        .collect();
    let objective = residual.iter().map(|z| z.norm_sqr()).sum();
    Some(ModelFit { coeffs, residual, objective })
}

/// Variable-projection fit of the exponential jump model over
/// `k ∈ [refine_k_min, N]`: linear coefficients by real least squares,
/// locations by Levenberg-Marquardt.
pub fn refine_jumps(spectrum: &Spectrum1D, candidates: &JumpSet, cfg: &DetectionConfig) -> Result<Refinement> {
    let band = spectrum.band();
    let k_min = cfg.resolved_refine_k_min(band);
    let terms = cfg.resolved_model_terms(spectrum.is_noisy());
    if candidates.is_empty() || k_min > band {
        return Ok(Refinement {
            jumps: candidates.clone(),
            diverged: false,
            iterations: 0,
            objective_before: 0.0,
            objective_after: 0.0,
        });
    }
    let ks: Vec<f64> = (k_min..=band).map(|k| k as f64).collect();
    let y: Vec<Complex64> = (k_min..=band)
        .map(|k| Complex64::new(0.0, 2.0 * PI * k as f64) * spectrum.get(k as i64))
        .collect();
    let mut locs = candidates.locations();
    let start_locs = locs.clone();
    // Locations stay within half the peak separation of their start and at
    // least that far from each other; otherwise neighbouring terms can
    // coalesce into a large cancelling pair at a feature that is not a jump.
    let trust = 0.5 * cfg.resolved_min_separation(band);
    let j = locs.len();
    let rows = ks.len();
    let params = j * (terms + 1);

    let mut fit = fit_heights(&y, &ks, &locs, terms)
        .ok_or_else(|| Error::DegenerateFit("height solve failed".into()))?;
    let start = fit.objective;
    let mut lambda = 1e-3;
    let mut rejected = 0;
    let mut improved = false;
    let mut iterations = 0;

    let max_iters = if cfg.refine_locations { cfg.max_refine_iters } else { 0 };
    while iterations < max_iters {
        iterations += 1;
        // Jacobian of the residual in (locations, linear coefficients),
        // real and imaginary parts stacked.
        let jac = DMatrix::from_fn(2 * rows, params, |r, c| {
            let row = r % rows;
            let k = ks[row];
            let z = if c < j {
                let model: Complex64 =
                    (0..terms).map(|m| fit.coeffs[c * terms + m] * basis(k, locs[c], m)).sum();
                Complex64::new(0.0, k) * model
            } else {
                let c = c - j;
                -basis(k, locs[c / terms], c % terms)
            };
            if r < rows {
                z.re
            } else {
                z.im
            }
        });
        let res = DVector::from_fn(2 * rows, |r, _| {
            if r < rows {
                fit.residual[r].re
            } else {
                fit.residual[r - rows].im
            }
        });
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * res;
        let mut damped = jtj.clone();
        for d in 0..params {
            damped[(d, d)] += lambda * jtj[(d, d)].max(1e-300);
        }
        let step = match damped.cholesky() {
            Some(ch) => ch.solve(&(-grad)),
            None => {
                lambda *= 2.0;
                rejected += 1;
                if rejected >= MAX_REJECTED_STEPS {
                    break;
                }
                continue;
            }
        };
        let trial: Vec<f64> = locs.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
        let max_step = step.iter().take(j).fold(0.0_f64, |m, d| m.max(d.abs()));
        let feasible = feasible_locations(&trial, &start_locs, trust);
        match fit_heights(&y, &ks, &trial, terms).filter(|_| feasible) {
            Some(next) if next.objective < fit.objective => {
                locs = trial;
                fit = next;
                lambda *= 0.5;
                rejected = 0;
                improved = true;
                if max_step < 1e-12 {
                    break;
                }
            }
            _ => {
                lambda *= 2.0;
                rejected += 1;
                if max_step < 1e-12 || rejected >= MAX_REJECTED_STEPS {
                    break;
                }
            }
        }
    }

    let unchanged = |diverged| Refinement {
        jumps: candidates.clone(),
        diverged,
        iterations,
        objective_before: start,
        objective_after: start,
    };
    // A rejected first step at an exact fit is convergence, not failure.
    if !improved && rejected >= MAX_REJECTED_STEPS && start > 1e-24 * (1.0 + y.len() as f64) {
        log::debug!("refinement made no progress from {j} candidates");
        return Ok(unchanged(true));
    }
    let heights: Vec<f64> = (0..j).map(|c| fit.height(c, terms)).collect();
    let hmax = heights.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    let seed_max = candidates.iter().fold(0.0_f64, |m, c| m.max(c.height.abs()));
    if seed_max > 0.0 && hmax > MAX_HEIGHT_GROWTH * seed_max {
        log::debug!("refined heights grew from {seed_max:.3e} to {hmax:.3e}");
        return Ok(unchanged(true));
    }
    let refined = locs
        .iter()
        .zip(&heights)
        .filter(|(_, a)| a.abs() > 1e-12 * hmax.max(1.0))
        .map(|(&x, &a)| Jump { location: wrap_angle(x), height: a });
    match JumpSet::new(refined) {
        Ok(jumps) => Ok(Refinement {
            jumps,
            diverged: false,
            iterations,
            objective_before: start,
            objective_after: fit.objective,
        }),
        // Two locations collapsed onto each other.
        Err(_) => Ok(unchanged(true)),
    }
}

fn feasible_locations(trial: &[f64], start: &[f64], trust: f64) -> bool {
    if trial.iter().zip(start).any(|(t, s)| (t - s).abs() > trust) {
        return false;
    }
    trial.iter().enumerate().all(|(i, &a)| {
        trial[i + 1..].iter().all(|&b| circular_distance(a, b) >= trust)
    })
}

/// `|a_j| / SE(a_j)` for the linear fit at fixed locations, with the noise
/// level estimated from the residual.
pub fn height_z_scores(spectrum: &Spectrum1D, jumps: &JumpSet, cfg: &DetectionConfig) -> Vec<f64> {
    let band = spectrum.band();
    let k_min = cfg.resolved_refine_k_min(band);
    let terms = cfg.resolved_model_terms(spectrum.is_noisy());
    let locs = jumps.locations();
    let ks: Vec<f64> = (k_min..=band).map(|k| k as f64).collect();
    let y: Vec<Complex64> = (k_min..=band)
        .map(|k| Complex64::new(0.0, 2.0 * PI * k as f64) * spectrum.get(k as i64))
        .collect();
    let cols = locs.len() * terms;
    let obs = 2 * ks.len();
    let infinite = vec![f64::INFINITY; locs.len()];
    if obs <= cols {
        return infinite;
    }
    let Some(fit) = fit_heights(&y, &ks, &locs, terms) else {
        return infinite;
    };
    let a = DMatrix::from_fn(obs, cols, |r, c| {
        let z = basis(ks[r % ks.len()], locs[c / terms], c % terms);
        if r < ks.len() {
            z.re
        } else {
            z.im
        }
    });
    let Some(inv) = (a.transpose() * a).try_inverse() else {
        return infinite;
    };
    let var = fit.objective / (obs - cols) as f64;
    (0..locs.len())
        .map(|j| {
            let se = (var * inv[(j * terms, j * terms)]).sqrt();
            let h = fit.height(j, terms).abs();
            if se > 0.0 {
                h / se
            } else {
                f64::INFINITY
            }
        })
        .collect()
}

/// Result of the full concentration pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub jumps: JumpSet,
    pub candidates: JumpSet,
    pub refinement_diverged: bool,
}

/// Concentration sum, peak picking and (optionally) refinement.
pub fn detect(spectrum: &Spectrum1D, factor: FactorSpec, cfg: &DetectionConfig) -> Result<Detection> {
    let band = spectrum.band();
    cfg.validate(band)?;
    let factor = factor.build(band)?;
    let grid = uniform_grid(cfg.grid_size);
    let k = concentration_sum(spectrum, &factor, &grid)?;
    let candidates = detect_peaks(&k, cfg.threshold_rel, cfg.resolved_min_separation(band))?;
    if !cfg.refine || candidates.is_empty() {
        return Ok(Detection { jumps: candidates.clone(), candidates, refinement_diverged: false });
    }
    let mut r = refine_jumps(spectrum, &candidates, cfg)?;
    // Spurious candidates are a common reason for a diverged fit, so pruning
    // runs either way: on the refined jumps, or else on the peaks themselves.
    let fitted = if r.diverged { candidates.clone() } else { r.jumps.clone() };
    // Peaks of a smooth function's kernel fit to (near) zero heights, and
    // noise peaks to heights within a few standard errors of zero.
    let floor = 0.5 * cfg.threshold_rel * k.max_abs();
    let mut kept = fitted.filter_small(floor);
    if cfg.min_height_z > 0.0 && !kept.is_empty() {
        let z = height_z_scores(spectrum, &kept, cfg);
        kept = JumpSet::new(kept.iter().zip(&z).filter(|(_, &z)| z >= cfg.min_height_z).map(|(j, _)| *j))?;
    }
    let mut jumps = fitted;
    if kept.len() < jumps.len() {
        // Refit the survivors without the spurious ones pulling on them.
        r = refine_jumps(spectrum, &kept, cfg)?;
        jumps = if r.diverged { kept } else { r.jumps.filter_small(floor) };
    }
    Ok(Detection { jumps, candidates, refinement_diverged: r.diverged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{h, ramp_sum, sine};
    use crate::spectral::match_jump_sets;

    fn unit_ramp(x0: f64, band: usize) -> Spectrum1D {
        ramp_sum(&JumpSet::from_pairs(&[(x0, 1.0)]).unwrap())
            .fourier_coeffs_exact(band)
            .unwrap()
    }

    #[test]
    fn factor_values() {
        let poly = FactorSpec::polynomial().build(10).unwrap();
        assert!((poly.eval(0.5) - PI / 2.0).abs() < 1e-15);
        let trig = FactorSpec::trigonometric().build(10).unwrap();
        assert!(trig.eval(1.0).abs() < 1e-15);
        assert!((sine_integral(PI) - 1.851_937_051_982_466_2).abs() < 1e-13);
        let e = FactorSpec::exponential().build(4).unwrap();
        assert_eq!(e.eval(1.0), 0.0);
        assert!(FactorSpec::exponential().build(2).is_err());
        assert!(FactorSpec::Polynomial { order: 0 }.build(8).is_err());
        assert!(FactorSpec::Trigonometric { alpha: -1.0 }.build(8).is_err());
    }

    #[test]
    fn zero_spectrum_has_no_peaks() {
        let f = FactorSpec::trigonometric().build(16).unwrap();
        let k = concentration_sum(&Spectrum1D::zeros(16), &f, &uniform_grid(256)).unwrap();
        assert!(k.values.iter().all(|&v| v == 0.0));
        assert!(detect_peaks(&k, 0.1, 0.1).unwrap().is_empty());
    }

    #[test]
    fn band_mismatch() {
        let f = FactorSpec::trigonometric().build(8).unwrap();
        assert!(matches!(
            concentration_sum(&Spectrum1D::zeros(9), &f, &[0.0]),
            Err(Error::BandMismatch { factor: 8, spectrum: 9 })
        ));
    }

    #[test]
    fn single_ramp_peak() {
        let spec = unit_ramp(0.0, 64);
        let f = FactorSpec::trigonometric().build(64).unwrap();
        let grid = uniform_grid(4096);
        let k = concentration_sum(&spec, &f, &grid).unwrap();
        let at0 = k.values[grid.iter().position(|&x| x.abs() < 1e-12).unwrap()];
        assert!((at0 - 1.0).abs() < 0.1, "{at0}");
        let peaks = detect_peaks(&k, 0.1, 2.0 * PI * 64f64.log10() / 64.0).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!(peaks.locations()[0].abs() <= 2.0 * PI / 4096.0 + 1e-15);
    }

    #[test]
    fn refinement_fixed_point_and_subgrid() {
        let spec = unit_ramp(0.7, 64);
        let cfg = DetectionConfig::default();
        let exact = JumpSet::from_pairs(&[(0.7, 1.0)]).unwrap();
        let r = refine_jumps(&spec, &exact, &cfg).unwrap();
        let m = match_jump_sets(&exact, &r.jumps).unwrap();
        assert!(m.eps_location < 1e-12 && m.delta_height < 1e-12);

        let off = JumpSet::from_pairs(&[(0.7 + PI / 4096.0, 0.9)]).unwrap();
        let r = refine_jumps(&spec, &off, &cfg).unwrap();
        assert!(!r.diverged);
        assert!(r.objective_after <= r.objective_before);
        assert!(match_jump_sets(&exact, &r.jumps).unwrap().eps_location < 1e-8);
    }

    #[test]
    fn h_at_band_50_candidates_cover_all_jumps() {
        let f = h();
        let truth = f.jump_set();
        let spec = f.fourier_coeffs_exact(50).unwrap();
        let tol = 2.0 * PI * 50f64.ln() / 50.0;
        let cfg = DetectionConfig { refine: false, ..DetectionConfig::default() };
        let d = detect(&spec, FactorSpec::trigonometric(), &cfg).unwrap();
        for t in truth.iter() {
            let dist = |c: &&Jump| circular_distance(c.location, t.location);
            let hit = d.candidates.iter().min_by(|a, b| dist(a).total_cmp(&dist(b))).unwrap();
            assert!(dist(&hit) <= tol);
            assert_eq!(hit.height.signum(), t.height.signum());
        }
        // Extra peaks on the steep linear piece are pruned by the model fit.
        let d = detect(&spec, FactorSpec::trigonometric(), &DetectionConfig::default()).unwrap();
        assert_eq!(d.jumps.len(), 6);
        let m = match_jump_sets(&truth, &d.jumps).unwrap();
        assert!(m.eps_location <= tol);
    }

    #[test]
    fn noisy_h_keeps_exactly_its_six_jumps() {
        let f = h();
        let clean = f.fourier_coeffs_exact(100).unwrap();
        for seed in 0..10 {
            let noisy = crate::noise::add_noise(&clean, crate::noise::NoiseSpec { snr_db: 30.0, seed }).unwrap();
            let d = detect(&noisy, FactorSpec::trigonometric(), &DetectionConfig::default()).unwrap();
            assert_eq!(d.jumps.len(), 6, "seed {seed}");
        }
    }

    #[test]
    fn spurious_jump_has_low_z_score() {
        let f = h();
        let clean = f.fourier_coeffs_exact(100).unwrap();
        let noisy = crate::noise::add_noise(&clean, crate::noise::NoiseSpec { snr_db: 30.0, seed: 5 }).unwrap();
        let mut with_fake: Vec<Jump> = f.jump_set().iter().copied().collect();
        with_fake.push(Jump { location: 0.0, height: 0.5 });
        let jumps = JumpSet::new(with_fake).unwrap();
        let cfg = DetectionConfig::default();
        let z = height_z_scores(&noisy, &jumps, &cfg);
        let locs = jumps.locations();
        for (x, z) in locs.iter().zip(&z) {
            if *x == 0.0 {
                assert!(*z < cfg.min_height_z, "fake z = {z}");
            } else {
                assert!(*z > cfg.min_height_z, "true jump at {x}: z = {z}");
            }
        }
    }

    #[test]
    fn smooth_function_has_no_jumps() {
        let spec = sine().fourier_coeffs_exact(32).unwrap();
        let d = detect(&spec, FactorSpec::trigonometric(), &DetectionConfig::default()).unwrap();
        assert!(d.jumps.is_empty(), "{:?}", d.jumps);
    }
}
