//! The acceptance suite: ten end-to-end checks with measured values,
//! tolerances and runtimes, collected into a JSON report.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use anyhow::{ensure, Result};
use gibbsfree_core::detector::Detector;
use gibbsfree_core::functions::{h, ramp_sum, CorpusId};
use gibbsfree_core::jumps::circular_distance;
use gibbsfree_core::noise::noise_sweep;
use gibbsfree_core::prony::{prony_estimate, PronyConfig};
use gibbsfree_core::spectral::{
    convergence_slope, estimated_jump_error_bound, fit_bound_constant, l2_error, match_jump_sets, perturb_jumps,
    Reconstruction, AWAY_FROM_JUMPS,
};
use gibbsfree_core::{JumpSet, PiecewiseFn, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::experiments::{convergence_rows, image, jump_error_rows, recon2d_outcome};
use crate::config::Image;

/// Thresholds for every criterion. Editing one (e.g. in a config file) is
/// how a deliberately failing run is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub standard_slope: f64,
    pub standard_slope_tol: f64,
    pub edge_slope: f64,
    pub edge_slope_tol: f64,
    pub estimated_max_slope: f64,
    pub jump_order_max_slope: f64,
    pub noise70_max_slope: f64,
    pub baseline_psnr: f64,
    pub baseline_psnr_tol: f64,
    pub min_proposed_psnr: f64,
    pub min_psnr_gain: f64,
    pub exact_jump_tol: f64,
    pub exact_recon_tol: f64,
    pub max_scaled_ratio: f64,
    pub oracle_1d_tol: f64,
    pub oracle_2d_tol: f64,
    /// Wall-clock limits in seconds, criterion 1 first.
    pub runtime_limits: [f64; 10],
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            standard_slope: -0.5,
            standard_slope_tol: 0.1,
            edge_slope: -1.5,
            edge_slope_tol: 0.15,
            estimated_max_slope: -1.3,
            jump_order_max_slope: -1.6,
            noise70_max_slope: -1.5,
            baseline_psnr: 26.97,
            baseline_psnr_tol: 1.5,
            min_proposed_psnr: 40.0,
            min_psnr_gain: 12.0,
            exact_jump_tol: 1e-9,
            exact_recon_tol: 1e-12,
            max_scaled_ratio: 3.0,
            oracle_1d_tol: 1e-9,
            oracle_2d_tol: 1e-8,
            runtime_limits: [30.0, 30.0, 180.0, 120.0, 600.0, 300.0, 30.0, 30.0, 60.0, 30.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    /// Non-finite measurements are stored as `null`.
    pub measured: BTreeMap<String, Option<f64>>,
    pub runtime_s: f64,
    pub runtime_limit_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CriterionResult {
    pub fn summary_line(&self) -> String {
        let values: Vec<String> = self
            .measured
            .iter()
            .map(|(k, v)| match v {
                Some(v) => format!("{k}={v:.4e}"),
                None => format!("{k}=null"),
            })
            .collect();
        let mut line = format!(
            "criterion {}: {} {} [{}] runtime={:.2}s",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            values.join(" "),
            self.runtime_s
        );
        if let Some(e) = &self.error {
            line.push_str(&format!(" error: {e}"));
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub all_passed: bool,
}

/// Measured values plus the verdict of the numeric checks.
struct Outcome {
    passed: bool,
    measured: Vec<(String, f64)>,
}

impl Outcome {
    fn new() -> Self {
        Self { passed: true, measured: Vec::new() }
    }

    fn record(&mut self, name: impl Into<String>, value: f64) {
        self.measured.push((name.into(), value));
    }

    /// Records `value` and folds `ok` into the verdict; NaN never passes.
    fn check(&mut self, name: impl Into<String>, value: f64, ok: bool) {
        self.record(name, value);
        self.passed &= ok && !value.is_nan();
    }
}

fn run(id: usize, name: &str, tol: &Tolerances, body: impl FnOnce() -> Result<Outcome>) -> CriterionResult {
    let limit = tol.runtime_limits[id - 1];
    let start = Instant::now();
    let result = body();
    let runtime_s = start.elapsed().as_secs_f64();
    let (passed, measured, error) = match result {
        Ok(o) => (o.passed, o.measured, None),
        Err(e) => (false, Vec::new(), Some(format!("{e:#}"))),
    };
    CriterionResult {
        id,
        name: name.to_string(),
        passed: passed && runtime_s <= limit,
        measured: measured.into_iter().map(|(k, v)| (k, v.is_finite().then_some(v))).collect(),
        runtime_s,
        runtime_limit_s: limit,
        error,
    }
}

const CONVERGENCE_NS: [usize; 6] = [16, 32, 64, 128, 256, 512];
const BOUND_NS: [usize; 11] = [16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 512];
const QUAD_NODES: usize = 16;

/// `(‖h − S_N h‖₂, ‖h − S_N^edge h‖₂)` with true jumps, per band limit.
fn h_errors(ns: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    let f = h();
    let truth = f.jump_set();
    let mut standard = Vec::with_capacity(ns.len());
    let mut edge = Vec::with_capacity(ns.len());
    for &n in ns {
        let spec = f.fourier_coeffs_exact(n)?;
        standard.push(l2_error(&f, &Reconstruction::standard(&spec), QUAD_NODES));
        edge.push(l2_error(&f, &Reconstruction::edge_augmented(&spec, &truth), QUAD_NODES));
    }
    Ok((standard, edge))
}

fn h_prony() -> Detector {
    Detector::Prony { config: PronyConfig::with_order(h().jump_set().len()) }
}

pub fn criterion_1(tol: &Tolerances, _seed: u64) -> CriterionResult {
    run(1, "standard-sum convergence", tol, || {
        let (standard, _) = h_errors(&CONVERGENCE_NS)?;
        let slope = convergence_slope(&CONVERGENCE_NS, &standard)?;
        let mut o = Outcome::new();
        o.check("slope", slope, (slope - tol.standard_slope).abs() <= tol.standard_slope_tol);
        Ok(o)
    })
}

pub fn criterion_2(tol: &Tolerances, _seed: u64) -> CriterionResult {
    run(2, "edge-augmented convergence, true jumps", tol, || {
        let (_, edge) = h_errors(&CONVERGENCE_NS)?;
        let slope = convergence_slope(&CONVERGENCE_NS, &edge)?;
        let mut o = Outcome::new();
        o.check("slope", slope, (slope - tol.edge_slope).abs() <= tol.edge_slope_tol);
        Ok(o)
    })
}

pub fn criterion_3(tol: &Tolerances, _seed: u64) -> CriterionResult {
    run(3, "estimated-jump convergence", tol, || {
        let ns = [64, 128, 256, 512];
        let rows = convergence_rows(&h(), &ns, &h_prony(), &Detector::concentration(), QUAD_NODES)?;
        let prony: Vec<f64> = rows.iter().map(|r| r.error_edge_prony).collect();
        let conc: Vec<f64> = rows.iter().map(|r| r.error_edge_conc).collect();
        let mut o = Outcome::new();
        for (name, errors) in [("slope_prony", prony), ("slope_concentration", conc)] {
            let slope = convergence_slope(&ns, &errors).unwrap_or(f64::NAN);
            o.check(name, slope, slope <= tol.estimated_max_slope);
        }
        Ok(o)
    })
}

pub fn criterion_4(tol: &Tolerances, _seed: u64) -> CriterionResult {
    run(4, "noiseless jump-location order", tol, || {
        let ns = [25, 50, 100, 200, 400];
        let f = h();
        let mut o = Outcome::new();
        for detector in [h_prony(), Detector::concentration()] {
            let rows = jump_error_rows(&f, &ns, &detector)?;
            let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
            let slope = convergence_slope(&ns, &eps).unwrap_or(f64::NAN);
            o.check(format!("slope_{}", detector.name()), slope, slope <= tol.jump_order_max_slope);
        }
        Ok(o)
    })
}

pub fn criterion_5(tol: &Tolerances, seed: u64) -> CriterionResult {
    run(5, "noise robustness", tol, || {
        let ns = [25, 50, 100, 200];
        let trials = 50;
        let f = h();
        let truth = f.jump_set();
        let spectrum = |n: usize| f.fourier_coeffs_exact(n);
        let conc = Detector::concentration();
        let mut o = Outcome::new();

        let rows70 = noise_sweep(spectrum, &truth, &conc, &ns, 70.0, trials, seed)?;
        let eps70: Vec<f64> = rows70.iter().map(|r| r.mean_eps).collect();
        let slope = convergence_slope(&ns, &eps70).unwrap_or(f64::NAN);
        o.check("slope_70db_concentration", slope, slope <= tol.noise70_max_slope);

        let c30 = noise_sweep(spectrum, &truth, &conc, &ns, 30.0, trials, seed)?;
        let p30 = noise_sweep(spectrum, &truth, &h_prony(), &ns, 30.0, trials, seed)?;
        for (c, p) in c30.iter().zip(&p30).filter(|(c, _)| c.band >= 50) {
            // A Prony estimator that never recovers the right jump count is
            // less noise tolerant than any finite concentration error.
            let better = c.mean_eps.is_finite() && (p.mean_eps.is_nan() || c.mean_eps < p.mean_eps);
            o.check(format!("eps_30db_concentration_N{}", c.band), c.mean_eps, better);
            o.record(format!("eps_30db_prony_N{}", p.band), p.mean_eps);
        }
        Ok(o)
    })
}

pub fn criterion_6(tol: &Tolerances, _seed: u64) -> CriterionResult {
    run(6, "2D PSNR", tol, || {
        let r = recon2d_outcome(&image(Image::F2), 25, 256, 512, &Detector::concentration_2d())?;
        let gain = r.psnr_proposed - r.psnr_partial;
        let mut o = Outcome::new();
        o.check(
            "psnr_partial_sum",
            r.psnr_partial,
            (r.psnr_partial - tol.baseline_psnr).abs() <= tol.baseline_psnr_tol,
        );
        o.check("psnr_proposed", r.psnr_proposed, r.psnr_proposed >= tol.min_proposed_psnr);
        o.check("psnr_gain", gain, gain >= tol.min_psnr_gain);
        Ok(o)
    })
}

/// A random ramp sum: `J ≤ 5` jumps at least `2π/N` apart with heights of
/// magnitude in `[0.1, 10]`, and a band limit `N ∈ [max(4J, 16), 64]`.
pub fn random_ramp_instance(rng: &mut ChaCha20Rng) -> Result<(JumpSet, usize)> {
    let j = rng.gen_range(1..=5usize);
    let n = rng.gen_range((4 * j).max(16)..=64usize);
    let sep = 2.0 * PI / n as f64;
    let mut locs: Vec<f64> = Vec::with_capacity(j);
    while locs.len() < j {
        let x = rng.gen_range(-PI..PI);
        if locs.iter().all(|&y| circular_distance(x, y) >= sep) {
            locs.push(x);
        }
    }
    let pairs: Vec<(f64, f64)> = locs
        .into_iter()
        .map(|x| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (x, sign * rng.gen_range(0.1..=10.0))
        })
        .collect();
    Ok((JumpSet::from_pairs(&pairs)?, n))
}

fn max_error_away_from_jumps(f: &PiecewiseFn, recon: &Reconstruction, truth: &JumpSet) -> Result<f64> {
    let mut worst = 0.0_f64;
    for i in 0..400 {
        let x = -PI + 2.0 * PI * (i as f64 + 0.5) / 400.0;
        if truth.iter().all(|t| circular_distance(x, t.location) >= AWAY_FROM_JUMPS) {
            worst = worst.max((recon.eval(x)? - f.eval(x, Side::Average)).abs());
        }
    }
    Ok(worst)
}

pub fn criterion_7(tol: &Tolerances, seed: u64) -> CriterionResult {
    run(7, "exact recovery on ramp sums", tol, || {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (mut eps, mut delta, mut recon, mut failures) = (0.0_f64, 0.0_f64, 0.0_f64, 0usize);
        for _ in 0..100 {
            let (truth, n) = random_ramp_instance(&mut rng)?;
            let f = ramp_sum(&truth);
            let spec = f.fourier_coeffs_exact(n)?;
            for refine in [true, false] {
                let cfg = PronyConfig { refine, ..PronyConfig::with_order(truth.len()) };
                match prony_estimate(&spec, &cfg).and_then(|e| match_jump_sets(&truth, &e.jumps)) {
                    Ok(m) => {
                        eps = eps.max(m.eps_location);
                        delta = delta.max(m.delta_height);
                    }
                    Err(_) => failures += 1,
                }
            }
            let r = Reconstruction::edge_augmented(&spec, &truth);
            recon = recon.max(max_error_away_from_jumps(&f, &r, &truth)?);
        }
        let mut o = Outcome::new();
        o.check("max_eps", eps, eps <= tol.exact_jump_tol);
        o.check("max_delta", delta, delta <= tol.exact_jump_tol);
        o.check("max_recon_error", recon, recon <= tol.exact_recon_tol);
        o.check("failed_estimates", failures as f64, failures == 0);
        Ok(o)
    })
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

pub fn criterion_8(tol: &Tolerances, _seed: u64) -> CriterionResult {
    run(8, "scaled error boundedness", tol, || {
        let (standard, edge) = h_errors(&BOUND_NS)?;
        let scaled = |errs: &[f64], p: f64| -> Vec<f64> {
            BOUND_NS.iter().zip(errs).map(|(&n, e)| e * (n as f64).powf(p)).collect()
        };
        let s = spread(&scaled(&standard, 0.5));
        let e = spread(&scaled(&edge, 1.5));
        let mut o = Outcome::new();
        o.check("ratio_standard", s, s < tol.max_scaled_ratio);
        o.check("ratio_edge", e, e < tol.max_scaled_ratio);
        Ok(o)
    })
}

pub fn criterion_9(tol: &Tolerances, _seed: u64) -> CriterionResult {
    run(9, "oracle equivalence", tol, || {
        let band = 128;
        // The 4N/π floor enforced by the quadrature only guarantees two
        // nodes per oscillation; single-piece functions spanning the whole
        // period need about twice that for Gauss-Legendre to converge.
        let nodes = 4 * band;
        let mut worst_1d = 0.0_f64;
        for id in CorpusId::ALL {
            let f = id.build();
            let exact = f.fourier_coeffs_exact(band)?;
            let quad = f.fourier_coeffs_quadrature(band, nodes)?;
            ensure!(exact.band() == quad.band(), "band mismatch for {}", id.name());
            for k in exact.indices() {
                worst_1d = worst_1d.max((exact.get(k) - quad.get(k)).norm());
            }
        }
        let band2 = 25i64;
        let mut worst_2d = 0.0_f64;
        for img in [Image::F1, Image::F2] {
            for (_, shape) in image(img).components {
                for k in -band2..=band2 {
                    for l in -band2..=band2 {
                        let d = shape.coefficient(k, l) - shape.coefficient_quadrature(k, l, 96);
                        worst_2d = worst_2d.max(d.norm());
                    }
                }
            }
        }
        let mut o = Outcome::new();
        o.check("max_diff_1d", worst_1d, worst_1d <= tol.oracle_1d_tol);
        o.check("max_diff_2d", worst_2d, worst_2d <= tol.oracle_2d_tol);
        Ok(o)
    })
}

pub fn criterion_10(tol: &Tolerances, _seed: u64) -> CriterionResult {
    run(10, "perturbed-jump error budget", tol, || {
        let (_, edge) = h_errors(&BOUND_NS)?;
        let c = fit_bound_constant(&BOUND_NS, &edge, 2.0)?;
        let f = h();
        let truth = f.jump_set();
        let band = 64;
        let spec = f.fourier_coeffs_exact(band)?;
        let levels = [1e-4, 1e-3, 1e-2];
        let mut o = Outcome::new();
        o.record("c_fitted", c);
        let mut worst_ratio = 0.0_f64;
        for &eps in &levels {
            for &delta in &levels {
                let jumps = perturb_jumps(&truth, eps, delta)?;
                let err = l2_error(&f, &Reconstruction::edge_augmented(&spec, &jumps), QUAD_NODES);
                let bound = estimated_jump_error_bound(c, band, eps, delta, &truth)?;
                worst_ratio = worst_ratio.max(err / bound);
            }
        }
        o.check("max_error_over_bound", worst_ratio, worst_ratio <= 1.0);
        Ok(o)
    })
}

pub type CriterionFn = fn(&Tolerances, u64) -> CriterionResult;

pub const CRITERIA: [CriterionFn; 10] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
];

pub fn run_acceptance(tol: &Tolerances, seed: u64) -> AcceptanceReport {
    run_selected(tol, seed, &[]).expect("an empty selection is valid")
}

/// Runs the criteria with the given 1-based ids, or all of them when `ids`
/// is empty.
pub fn run_selected(tol: &Tolerances, seed: u64, ids: &[usize]) -> Result<AcceptanceReport> {
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > CRITERIA.len()) {
        anyhow::bail!("no criterion {bad}; ids run from 1 to {}", CRITERIA.len());
    }
    let criteria: Vec<CriterionResult> = CRITERIA
        .iter()
        .enumerate()
        .filter(|(i, _)| ids.is_empty() || ids.contains(&(i + 1)))
        .map(|(_, c)| c(tol, seed))
        .collect();
    let all_passed = criteria.iter().all(|c| c.passed);
    Ok(AcceptanceReport { seed, criteria, all_passed })
}
