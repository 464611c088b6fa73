//! The experiment runners behind each subcommand. The `*_rows` functions
//! compute; the `run_*` functions also write CSV/SVG artifacts into the
//! output directory.

use std::path::Path;

use anyhow::{Context, Result};
use gibbsfree_core::concentration::concentration_sum;
use gibbsfree_core::detector::Detector;
use gibbsfree_core::functions::plane::{box_f1, composite_f2, PlanarFn};
use gibbsfree_core::noise::{noise_sweep, NoiseSweepRow};
use gibbsfree_core::recon2d::{edge_augmented_2d, partial_sum_2d, psnr, Recon2dDiagnostics};
use gibbsfree_core::spectral::{convergence_slope, l2_error, match_jump_sets, uniform_grid, Reconstruction};
use gibbsfree_core::{Grid2D, PiecewiseFn, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Experiment, ExperimentConfig, Image};
use crate::output::{write_atomic, write_csv, write_with};
use crate::plot::{render_svg, Plot, PlotError, Scale, Series};

/// One line of `convergence.csv`. Failed estimates are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub band: usize,
    pub error_standard: f64,
    pub error_edge_true: f64,
    pub error_edge_prony: f64,
    pub error_edge_conc: f64,
}

/// Fitted log-log slopes; `None` where a column has zeros or failures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSlopes {
    pub standard: Option<f64>,
    pub edge_true: Option<f64>,
    pub edge_prony: Option<f64>,
    pub edge_conc: Option<f64>,
}

fn estimate_error(f: &PiecewiseFn, spec: &gibbsfree_core::Spectrum1D, detector: &Detector, quad: usize) -> f64 {
    match detector.detect(spec) {
        Ok(jumps) => l2_error(f, &Reconstruction::edge_augmented(spec, &jumps), quad),
        Err(e) => {
            log::warn!("{} failed at N = {}: {e}", detector.name(), spec.band());
            f64::NAN
        }
    }
}

/// `‖f − S_N f‖₂`, `‖f − S_N^edge f‖₂` and the two estimated-jump errors per
/// band limit.
pub fn convergence_rows(
    f: &PiecewiseFn,
    ns: &[usize],
    prony: &Detector,
    conc: &Detector,
    quad_nodes: usize,
) -> Result<Vec<ConvergenceRow>> {
    let truth = f.jump_set();
    ns.par_iter()
        .map(|&n| {
            let spec = f.fourier_coeffs_exact(n)?;
            Ok(ConvergenceRow {
                band: n,
                error_standard: l2_error(f, &Reconstruction::standard(&spec), quad_nodes),
                error_edge_true: l2_error(f, &Reconstruction::edge_augmented(&spec, &truth), quad_nodes),
                error_edge_prony: estimate_error(f, &spec, prony, quad_nodes),
                error_edge_conc: estimate_error(f, &spec, conc, quad_nodes),
            })
        })
        .collect()
}

fn slope_of(ns: &[usize], errors: &[f64]) -> Option<f64> {
    convergence_slope(ns, errors).ok()
}

pub fn convergence_slopes(rows: &[ConvergenceRow]) -> ConvergenceSlopes {
    let ns: Vec<usize> = rows.iter().map(|r| r.band).collect();
    let col = |g: fn(&ConvergenceRow) -> f64| rows.iter().map(g).collect::<Vec<f64>>();
    ConvergenceSlopes {
        standard: slope_of(&ns, &col(|r| r.error_standard)),
        edge_true: slope_of(&ns, &col(|r| r.error_edge_true)),
        edge_prony: slope_of(&ns, &col(|r| r.error_edge_prony)),
        edge_conc: slope_of(&ns, &col(|r| r.error_edge_conc)),
    }
}

fn with_slope(label: &str, slope: Option<f64>) -> String {
    match slope {
        Some(s) => format!("{label} (slope {s:.2})"),
        None => label.to_string(),
    }
}

pub fn convergence_plot(rows: &[ConvergenceRow], title: &str) -> Plot {
    let slopes = convergence_slopes(rows);
    let pts = |g: fn(&ConvergenceRow) -> f64| rows.iter().map(|r| (r.band as f64, g(r))).collect::<Vec<_>>();
    Plot {
        title: title.to_string(),
        x_label: "N".into(),
        y_label: "L2 error".into(),
        scale: Scale::LogLog,
        series: vec![
            Series::new(with_slope("standard", slopes.standard), pts(|r| r.error_standard)),
            Series::new(with_slope("true jumps", slopes.edge_true), pts(|r| r.error_edge_true)),
            Series::new(with_slope("Prony", slopes.edge_prony), pts(|r| r.error_edge_prony)),
            Series::new(with_slope("concentration", slopes.edge_conc), pts(|r| r.error_edge_conc)),
        ],
    }
}

/// Writes `svg` unless the plot has nothing to show, in which case a
/// notice is logged and `false` returned.
fn write_plot(path: &Path, plot: &Plot) -> Result<bool> {
    match render_svg(plot) {
        Ok(svg) => {
            write_atomic(path, svg.as_bytes())?;
            Ok(true)
        }
        Err(PlotError::EmptySeries) => {
            log::warn!("nothing to plot for {}; skipped", path.display());
            Ok(false)
        }
    }
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceSlopes> {
    let f = cfg.function.build();
    let truth = f.jump_set();
    let ns = cfg.ns_for(Experiment::Convergence);
    let rows = convergence_rows(
        &f,
        &ns,
        &cfg.prony_detector(Some(&truth)),
        &cfg.concentration_detector(),
        cfg.quad_nodes,
    )?;
    write_csv(&cfg.out.join("convergence.csv"), &rows)?;
    let title = format!("L2 error, function {}", cfg.function.name());
    write_plot(&cfg.out.join("convergence.svg"), &convergence_plot(&rows, &title))?;
    Ok(convergence_slopes(&rows))
}

/// Location and height errors of one estimator at one band limit; `NaN` if
/// detection failed or found the wrong number of jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpErrorRow {
    #[serde(rename = "N")]
    pub band: usize,
    pub estimator: String,
    pub eps: f64,
    pub delta: f64,
}

pub fn jump_error_rows(f: &PiecewiseFn, ns: &[usize], detector: &Detector) -> Result<Vec<JumpErrorRow>> {
    let truth = f.jump_set();
    ns.par_iter()
        .map(|&n| {
            let spec = f.fourier_coeffs_exact(n)?;
            let (eps, delta) = match detector.detect(&spec).and_then(|j| match_jump_sets(&truth, &j)) {
                Ok(m) => (m.eps_location, m.delta_height),
                Err(e) => {
                    log::warn!("{} at N = {n}: {e}", detector.name());
                    (f64::NAN, f64::NAN)
                }
            };
            Ok(JumpErrorRow { band: n, estimator: detector.name().to_string(), eps, delta })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reconstruct1dRow {
    pub x: f64,
    pub exact: f64,
    pub standard: f64,
    pub edge_true: f64,
    pub edge_estimated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruct1dSummary {
    #[serde(rename = "N")]
    pub band: usize,
    pub detected_jumps: usize,
    pub error_standard: f64,
    pub error_edge_true: f64,
    pub error_edge_estimated: f64,
}

pub fn run_reconstruct1d(cfg: &ExperimentConfig) -> Result<Reconstruct1dSummary> {
    let f = cfg.function.build();
    let truth = f.jump_set();
    let band = *cfg.ns_for(Experiment::Reconstruct1d).last().context("no band limit")?;
    let spec = f.fourier_coeffs_exact(band)?;
    let jumps = cfg.selected_detector(Some(&truth)).detect(&spec)?;
    let standard = Reconstruction::standard(&spec);
    let edge_true = Reconstruction::edge_augmented(&spec, &truth);
    let edge_est = Reconstruction::edge_augmented(&spec, &jumps);
    let grid = uniform_grid(cfg.grid_points);
    let (s, t, e) = (standard.sample(&grid)?, edge_true.sample(&grid)?, edge_est.sample(&grid)?);
    let rows: Vec<Reconstruct1dRow> = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| Reconstruct1dRow {
            x,
            exact: f.eval(x, Side::Average),
            standard: s.values[i],
            edge_true: t.values[i],
            edge_estimated: e.values[i],
        })
        .collect();
    write_csv(&cfg.out.join("reconstruct1d.csv"), &rows)?;
    write_with(&cfg.out.join("jumps.csv"), |w| jumps.write_csv(w))?;
    let pts = |g: fn(&Reconstruct1dRow) -> f64| rows.iter().map(|r| (r.x, g(r))).collect::<Vec<_>>();
    let plot = Plot {
        title: format!("Reconstructions of {} with N = {band}", cfg.function.name()),
        x_label: "x".into(),
        y_label: "value".into(),
        scale: Scale::Linear,
        series: vec![
            Series::new("exact", pts(|r| r.exact)),
            Series::new("standard", pts(|r| r.standard)),
            Series::new("true jumps", pts(|r| r.edge_true)),
            Series::new("estimated jumps", pts(|r| r.edge_estimated)),
        ],
    };
    write_plot(&cfg.out.join("reconstruct1d.svg"), &plot)?;
    Ok(Reconstruct1dSummary {
        band,
        detected_jumps: jumps.len(),
        error_standard: l2_error(&f, &standard, cfg.quad_nodes),
        error_edge_true: l2_error(&f, &edge_true, cfg.quad_nodes),
        error_edge_estimated: l2_error(&f, &edge_est, cfg.quad_nodes),
    })
}

pub fn run_detect(cfg: &ExperimentConfig) -> Result<Vec<JumpErrorRow>> {
    let f = cfg.function.build();
    let truth = f.jump_set();
    let ns = cfg.ns_for(Experiment::Detect);
    let detector = cfg.selected_detector(Some(&truth));
    let band = *ns.last().context("no band limit")?;
    let spec = f.fourier_coeffs_exact(band)?;
    let jumps = detector.detect(&spec)?;
    write_with(&cfg.out.join("jumps.csv"), |w| jumps.write_csv(w))?;
    if let Detector::Concentration { factor, .. } = detector {
        let k = concentration_sum(&spec, &factor.build(band)?, &uniform_grid(cfg.concentration.grid_size))?;
        write_with(&cfg.out.join("concentration_sum.csv"), |w| k.write_csv(w))?;
    }
    let rows = jump_error_rows(&f, &ns, &detector)?;
    write_csv(&cfg.out.join("jump_errors.csv"), &rows)?;
    Ok(rows)
}

pub fn run_noise_sweep(cfg: &ExperimentConfig) -> Result<Vec<NoiseSweepRow>> {
    let f = cfg.function.build();
    let truth = f.jump_set();
    let ns = cfg.ns_for(Experiment::NoiseSweep);
    let detectors = [cfg.concentration_detector(), cfg.prony_detector(Some(&truth))];
    let mut rows = Vec::new();
    for &snr in &cfg.noise.snr_db {
        for d in &detectors {
            rows.extend(noise_sweep(
                |n| f.fourier_coeffs_exact(n),
                &truth,
                d,
                &ns,
                snr,
                cfg.noise.trials,
                cfg.seed,
            )?);
        }
    }
    write_csv(&cfg.out.join("noise_sweep.csv"), &rows)?;
    let mut series: Vec<Series> = Vec::new();
    for &snr in &cfg.noise.snr_db {
        for d in &detectors {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.snr_db == snr && r.estimator == d.name())
                .map(|r| (r.band as f64, r.mean_eps))
                .collect();
            let slope = slope_of(
                &pts.iter().map(|p| p.0 as usize).collect::<Vec<_>>(),
                &pts.iter().map(|p| p.1).collect::<Vec<_>>(),
            );
            series.push(Series::new(with_slope(&format!("{} {snr} dB", d.name()), slope), pts));
        }
    }
    let plot = Plot {
        title: format!("Mean location error over {} trials", cfg.noise.trials),
        x_label: "N".into(),
        y_label: "mean location error".into(),
        scale: Scale::LogLog,
        series,
    };
    write_plot(&cfg.out.join("noise_sweep.svg"), &plot)?;
    Ok(rows)
}

pub fn image(kind: Image) -> PlanarFn {
    match kind {
        Image::F1 => box_f1(),
        Image::F2 => composite_f2(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recon2dOutcome {
    pub reference: Grid2D,
    pub partial: Grid2D,
    pub proposed: Grid2D,
    pub psnr_partial: f64,
    pub psnr_proposed: f64,
    pub diagnostics: Recon2dDiagnostics,
}

pub fn recon2d_outcome(img: &PlanarFn, band: usize, m: usize, m_over: usize, detector: &Detector) -> Result<Recon2dOutcome> {
    let spec = img.fourier_coeffs_exact(band);
    let reference = img.sample(m);
    let partial = partial_sum_2d(&spec, m)?;
    let rec = edge_augmented_2d(&spec, detector, m, m_over)?;
    Ok(Recon2dOutcome {
        psnr_partial: psnr(&reference, &partial)?,
        psnr_proposed: psnr(&reference, &rec.grid)?,
        diagnostics: rec.diagnostics,
        reference,
        partial,
        proposed: rec.grid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsnrRow {
    pub method: String,
    pub psnr_db: f64,
}

pub fn run_recon2d(cfg: &ExperimentConfig) -> Result<Recon2dOutcome> {
    let r = &cfg.recon2d;
    let out = recon2d_outcome(&image(r.image), r.band, r.grid, r.resolved_oversample(), &cfg.recon2d_detector())?;
    for (name, g) in [("reference", &out.reference), ("partial_sum", &out.partial), ("proposed", &out.proposed)] {
        write_with(&cfg.out.join(format!("recon2d_{name}.g2d")), |w| g.write_binary(w))?;
        write_with(&cfg.out.join(format!("recon2d_{name}.pgm")), |w| g.write_pgm(w))?;
    }
    let rows = vec![
        PsnrRow { method: "partial_sum".into(), psnr_db: out.psnr_partial },
        PsnrRow { method: "proposed".into(), psnr_db: out.psnr_proposed },
    ];
    write_csv(&cfg.out.join("recon2d_psnr.csv"), &rows)?;
    write_atomic(
        &cfg.out.join("recon2d_diagnostics.json"),
        serde_json::to_string_pretty(&out.diagnostics)?.as_bytes(),
    )?;
    Ok(out)
}
