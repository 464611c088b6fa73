//! Fourier partial sums, ramp functions and edge-augmented reconstruction.
//!
//! The edge-augmented sum replaces the slowly decaying jump part of the
//! spectrum by its closed form:
//!
//! ```text
//! S_N^edge f(x) = Σ_{|k|≤N} (f̂_k − f̂ᵉˢᵗ_k) e^{ikx} + Σ_j a_j r_j(x)
//! f̂ᵉˢᵗ_k        = Σ_j a_j e^{−ikx_j} / (2πik),     f̂ᵉˢᵗ_0 = 0
//! ```
//!
//! where `r_j` is the zero-mean 2π-periodic sawtooth with a unit jump at `x_j`. The
//! same formula serves true and estimated jump sets.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functions::{PiecewiseFn, Side};
use crate::jumps::{circular_distance, wrap_angle, Jump, JumpSet};
use crate::quadrature::GaussLegendre;
use crate::spectrum::Spectrum1D;

/// Minimum distance from any jump for sup-norm comparisons.
pub const AWAY_FROM_JUMPS: f64 = 0.05;

/// Imaginary residual allowed in a reconstruction of a real function,
/// relative to `1 + |value|`.
pub const REALNESS_TOL: f64 = 1e-9;

/// Values of a reconstruction on a strictly increasing grid in `(-π, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "grid has {} points, values {}",
                grid.len(),
                values.len()
            )));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("grid must be strictly increasing".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes `x,value` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "value"])?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            w.write_record([x.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `n` equispaced points `x_i = −π + 2π(i+1)/n`, covering `(-π, π]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| -PI + 2.0 * PI * (i + 1) as f64 / n as f64).collect()
}

/// Grid points at least `min_dist` away from every jump.
pub fn points_away_from(grid: &[f64], jumps: &JumpSet, min_dist: f64) -> Vec<f64> {
    grid.iter()
        .copied()
        .filter(|&x| jumps.iter().all(|j| circular_distance(x, j.location) >= min_dist))
        .collect()
}

/// The 2π-periodic ramp with a unit jump at `xj`; the two-sided average at
/// the jump itself.
pub fn ramp_eval(xj: f64, x: f64) -> f64 {
    let x = wrap_angle(x);
    let xj = wrap_angle(xj);
    if x < xj {
        (-PI - x) / (2.0 * PI)
    } else if x > xj {
        (PI - x) / (2.0 * PI)
    } else {
        -xj / (2.0 * PI)
    }
}

/// [`ramp_eval`] shifted by its mean `−x_j/2π`, so that its Fourier series is
/// exactly `Σ_{k≠0} e^{−ikx_j}/(2πik) e^{ikx}` with no constant term.
pub fn ramp_eval_zero_mean(xj: f64, x: f64) -> f64 {
    ramp_eval(xj, x) + wrap_angle(xj) / (2.0 * PI)
}

/// Jump-induced coefficient model `Σ_j a_j e^{−ikx_j}/(2πik)`, zero at k = 0.
pub fn est_coeffs(jumps: &JumpSet, band: usize) -> Spectrum1D {
    Spectrum1D::from_fn(band, |k| {
        if k == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let denom = Complex64::new(0.0, 2.0 * PI * k as f64);
        jumps
            .iter()
            .map(|j| j.height * Complex64::from_polar(1.0, -(k as f64) * j.location))
            .sum::<Complex64>()
            / denom
    })
}

/// `Σ_{|k|≤N} c_k e^{ikx}` using a phase recurrence re-anchored every 64 terms.
pub fn eval_series(coeffs: &[Complex64], band: usize, x: f64) -> Complex64 {
    debug_assert_eq!(coeffs.len(), 2 * band + 1);
    let n = band as i64;
    let step = Complex64::from_polar(1.0, x);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut phase = Complex64::new(0.0, 0.0);
    for (i, c) in coeffs.iter().enumerate() {
        if i % 64 == 0 {
            phase = Complex64::from_polar(1.0, (i as i64 - n) as f64 * x);
        }
        acc += c * phase;
        phase *= step;
    }
    acc
}

/// Something that can be evaluated pointwise and integrated against a
/// piecewise function.
pub trait Approximant: Sync {
    fn value(&self, x: f64) -> f64;

    /// Points where the approximant itself is discontinuous.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Highest frequency present; sets the quadrature panel width.
    fn bandwidth(&self) -> usize {
        0
    }
}

impl Approximant for PiecewiseFn {
    fn value(&self, x: f64) -> f64 {
        self.eval(x, Side::Average)
    }

    fn breakpoints(&self) -> Vec<f64> {
        PiecewiseFn::breakpoints(self)
    }
}

/// A residual partial sum plus a ramp superposition. With an empty jump set
/// this is the classical partial sum `S_N f`.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    residual: Spectrum1D,
    jumps: JumpSet,
}

impl Reconstruction {
    pub fn standard(spectrum: &Spectrum1D) -> Self {
        Self { residual: spectrum.clone(), jumps: JumpSet::empty() }
    }

    pub fn edge_augmented(spectrum: &Spectrum1D, jumps: &JumpSet) -> Self {
        let residual = if jumps.is_empty() {
            spectrum.clone()
        } else {
            spectrum - &est_coeffs(jumps, spectrum.band())
        };
        Self { residual, jumps: jumps.clone() }
    }

    pub fn jumps(&self) -> &JumpSet {
        &self.jumps
    }

    pub fn residual(&self) -> &Spectrum1D {
        &self.residual
    }

    fn ramps(&self, x: f64) -> f64 {
        self.jumps.iter().map(|j| j.height * ramp_eval_zero_mean(j.location, x)).sum()
    }

    /// Value at `x`, failing when the residual sum is not real.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let z = eval_series(self.residual.coeffs(), self.residual.band(), x);
        if !self.residual.is_noisy() && z.im.abs() > REALNESS_TOL * (1.0 + z.re.abs()) {
            return Err(Error::NonRealResult { residual: z.im.abs(), x });
        }
        Ok(z.re + self.ramps(x))
    }

    pub fn sample(&self, grid: &[f64]) -> Result<SampledFunction> {
        let values = grid.par_iter().map(|&x| self.eval(x)).collect::<Result<Vec<_>>>()?;
        if self.residual.is_noisy() {
            log::debug!("noisy spectrum: realness guard relaxed");
        }
        SampledFunction::new(grid.to_vec(), values)
    }
}

impl Approximant for Reconstruction {
    fn value(&self, x: f64) -> f64 {
        eval_series(self.residual.coeffs(), self.residual.band(), x).re + self.ramps(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.jumps.locations()
    }

    fn bandwidth(&self) -> usize {
        self.residual.band()
    }
}

/// `S_N f` on `grid`.
pub fn partial_sum(spectrum: &Spectrum1D, grid: &[f64]) -> Result<SampledFunction> {
    Reconstruction::standard(spectrum).sample(grid)
}

/// `S_N^edge f` (true jumps) or `f̃` (estimated jumps) on `grid`.
pub fn edge_augmented_sum(
    spectrum: &Spectrum1D,
    jumps: &JumpSet,
    grid: &[f64],
) -> Result<SampledFunction> {
    Reconstruction::edge_augmented(spectrum, jumps).sample(grid)
}

/// Max discrepancy between the closed-form edge sum and the truncated tail
/// form `S_N f + Σ_{N<|k|≤K} f̂ᵉˢᵗ_k e^{ikx}`.
pub fn tail_form_check(
    spectrum: &Spectrum1D,
    jumps: &JumpSet,
    grid: &[f64],
    k_tail: usize,
) -> Result<f64> {
    let band = spectrum.band();
    if k_tail < band {
        return Err(Error::InvalidConfig(format!("K_tail {k_tail} below band {band}")));
    }
    if jumps.is_empty() {
        return Ok(0.0);
    }
    let closed = edge_augmented_sum(spectrum, jumps, grid)?;
    let standard = partial_sum(spectrum, grid)?;
    let disc = grid
        .par_iter()
        .zip(closed.values.par_iter().zip(&standard.values))
        .map(|(&x, (&c, &s))| {
            // Tail of a real series: 2 Re Σ_{k=N+1}^{K} f̂ᵉˢᵗ_k e^{ikx}.
            let tail: f64 = jumps
                .iter()
                .map(|j| {
                    let t = x - j.location;
                    let sum: f64 = ((band + 1)..=k_tail)
                        .map(|k| (k as f64 * t).sin() / k as f64)
                        .sum();
                    j.height * sum / PI
                })
                .sum();
            (s + tail - c).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(disc)
}

/// `‖f − recon‖₂ = √((1/2π) ∫ |f − recon|²)` by Gauss-Legendre on panels
/// bounded by every breakpoint of `f` and of `recon`, each panel at most one
/// period of the highest frequency wide.
pub fn l2_error<A: Approximant + ?Sized>(f: &PiecewiseFn, recon: &A, quad_nodes: usize) -> f64 {
    let mut breaks: Vec<f64> = vec![-PI];
    breaks.extend(f.breakpoints());
    breaks.extend(recon.breakpoints().into_iter().map(wrap_angle));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let max_len = 2.0 * PI / recon.bandwidth().max(8) as f64;
    let rule = GaussLegendre::cached(quad_nodes);
    let panels: Vec<(f64, f64)> = breaks
        .windows(2)
        .flat_map(|w| {
            let pieces = ((w[1] - w[0]) / max_len).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / pieces as f64;
            (0..pieces).map(move |i| (w[0] + i as f64 * h, if i + 1 == pieces { w[1] } else { w[0] + (i + 1) as f64 * h }))
        })
        .collect();
    // Summed in panel order so the result does not depend on the thread count.
    let parts: Vec<f64> = panels
        .par_iter()
        .map(|&(a, b)| {
            rule.integrate(a, b, |x| {
                let d = f.eval(x, Side::Average) - recon.value(x);
                d * d
            })
        })
        .collect();
    let total: f64 = parts.iter().sum();
    (total / (2.0 * PI)).sqrt()
}

/// `√(Σ_{N<|k|≤K} |f̂_k|²)` with exact coefficients: the Parseval form of
/// `‖f − S_N f‖₂`, truncated at `K`.
pub fn parseval_tail_error(f: &PiecewiseFn, band: usize, k_max: usize) -> Result<f64> {
    let spec = f.fourier_coeffs_exact(k_max)?;
    let n = band as i64;
    let sum: f64 = spec
        .indices()
        .filter(|k| k.abs() > n)
        .map(|k| spec.get(k).norm_sqr())
        .sum();
    Ok(sum.sqrt())
}

/// Least-squares slope of `log(error)` against `log(N)`.
pub fn convergence_slope(ns: &[usize], errors: &[f64]) -> Result<f64> {
    if ns.len() != errors.len() {
        return Err(Error::DegenerateFit("Ns and errors differ in length".into()));
    }
    if ns.len() < 4 {
        return Err(Error::DegenerateFit(format!("need at least 4 points, got {}", ns.len())));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateFit("Ns must be strictly increasing".into()));
    }
    if errors.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::DegenerateFit("errors must be positive and finite".into()));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    Ok(log_log_slope(&xs, &ys))
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `√(2c² / ((2p−1) N^{2p−1}))`: the L2 truncation bound for coefficients
/// decaying like `c/|k|^p`. `p = 1` is the piecewise-smooth partial-sum rate
/// and `p = 2` the edge-augmented one.
pub fn truncation_bound(c: f64, p: f64, band: usize) -> Result<f64> {
    if !(p > 0.5) {
        return Err(Error::InvalidConfig(format!("decay exponent must exceed 1/2, got {p}")));
    }
    if band == 0 {
        return Err(Error::InvalidConfig("band must be positive".into()));
    }
    let n = band as f64;
    Ok((2.0 * c * c / ((2.0 * p - 1.0) * n.powf(2.0 * p - 1.0))).sqrt())
}

/// Smallest `c` for which [`truncation_bound`] covers every measured error.
pub fn fit_bound_constant(ns: &[usize], errors: &[f64], p: f64) -> Result<f64> {
    if ns.len() != errors.len() || ns.is_empty() {
        return Err(Error::DegenerateFit("need matching, nonempty Ns and errors".into()));
    }
    ns.iter().zip(errors).try_fold(0.0_f64, |c, (&n, &e)| Ok(c.max(e / truncation_bound(1.0, p, n)?)))
}

/// Error budget for a reconstruction from jumps known to within `ε` in
/// location and `δ` in height:
/// `√(2c²/3N³) + Jδ + √(ε/2π)·(Jδ + Σ|[f](x_j)|)`.
pub fn estimated_jump_error_bound(c: f64, band: usize, eps: f64, delta: f64, truth: &JumpSet) -> Result<f64> {
    let j = truth.len() as f64;
    let total: f64 = truth.iter().map(|t| t.height.abs()).sum();
    Ok(truncation_bound(c, 2.0, band)? + j * delta + (eps / (2.0 * PI)).sqrt() * (j * delta + total))
}

/// Moves each location by `ε` and each height by `δ`, alternating the sign
/// of both from one jump to the next.
pub fn perturb_jumps(truth: &JumpSet, eps: f64, delta: f64) -> Result<JumpSet> {
    JumpSet::new(truth.iter().enumerate().map(|(i, t)| {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        Jump { location: wrap_angle(t.location + sign * eps), height: t.height - sign * delta }
    }))
}

/// Worst location (`ε`) and height (`δ`) errors after pairing.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JumpEstimateError {
    pub eps_location: f64,
    pub delta_height: f64,
}

/// Pairs estimates to truth greedily by circular distance, closest pair
/// first.
pub fn match_jump_sets(truth: &JumpSet, estimate: &JumpSet) -> Result<JumpEstimateError> {
    if truth.len() != estimate.len() {
        return Err(Error::CardinalityMismatch { truth: truth.len(), estimate: estimate.len() });
    }
    let t: Vec<_> = truth.iter().collect();
    let e: Vec<_> = estimate.iter().collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(t.len() * e.len());
    for (i, a) in t.iter().enumerate() {
        for (j, b) in e.iter().enumerate() {
            pairs.push((circular_distance(a.location, b.location), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_t = vec![false; t.len()];
    let mut used_e = vec![false; e.len()];
    let mut out = JumpEstimateError { eps_location: 0.0, delta_height: 0.0 };
    for (d, i, j) in pairs {
        if used_t[i] || used_e[j] {
            continue;
        }
        used_t[i] = true;
        used_e[j] = true;
        out.eps_location = out.eps_location.max(d);
        out.delta_height = out.delta_height.max((t[i].height - e[j].height).abs());
    }
    Ok(out)
}
