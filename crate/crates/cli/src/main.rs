use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gibbsfree_core::concentration::FactorSpec;
use gibbsfree_core::functions::CorpusId;
use gibbsfree_core::prony::ModelOrder;

use gibbsfree::acceptance::run_selected;
use gibbsfree::config::{DetectorKind, Experiment, ExperimentConfig, Image};
use gibbsfree::experiments;
use gibbsfree::output::write_atomic;

#[derive(Parser)]
#[command(name = "gibbsfree", version, about = "Edge-augmented Fourier reconstruction experiments")]
struct Cli {
    /// JSON experiment configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "GIBBSFREE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct a corpus function with and without edge augmentation.
    Reconstruct1d(OneD),
    /// Estimate jumps and report their errors.
    Detect(OneD),
    /// L2 error against N for all reconstruction variants.
    Convergence(OneD),
    /// Jump-location error of both estimators under noise.
    NoiseSweep(NoiseArgs),
    /// Two-dimensional row/column reconstruction of a test image.
    Recon2d(TwoD),
    /// Run every acceptance check and write a JSON report.
    Acceptance(AcceptanceArgs),
}

#[derive(Args)]
struct AcceptanceArgs {
    /// Comma-separated criterion ids to run (default: all).
    #[arg(long, value_delimiter = ',')]
    only: Vec<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectorArg {
    Conc,
    Prony,
}

#[derive(Clone, Copy, ValueEnum)]
enum FactorArg {
    Trig,
    Poly,
    Exp,
}

#[derive(Clone, Copy, ValueEnum)]
enum ImageArg {
    F1,
    F2,
}

#[derive(Args)]
struct DetectorFlags {
    #[arg(long, value_enum)]
    detector: Option<DetectorArg>,
    #[arg(long, value_enum)]
    factor: Option<FactorArg>,
    /// Parameter of the trigonometric or exponential factor.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    poly_order: Option<u32>,
    /// Peak threshold relative to max |K|.
    #[arg(long)]
    threshold: Option<f64>,
    /// Skip the nonlinear refinement of detected jumps.
    #[arg(long)]
    no_refine: bool,
    /// Fixed Prony model order.
    #[arg(long = "prony-J")]
    prony_j: Option<usize>,
    #[arg(long)]
    prony_kmin: Option<usize>,
    /// Choose the Prony order from the singular values even when the true
    /// jump count is known.
    #[arg(long)]
    prony_auto_order: bool,
}

#[derive(Args)]
struct OneD {
    #[arg(long)]
    function: Option<CorpusId>,
    /// Comma-separated band limits.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    /// Single band limit (shorthand for --ns N).
    #[arg(long, conflicts_with = "ns")]
    band: Option<usize>,
    #[command(flatten)]
    detector: DetectorFlags,
}

#[derive(Args)]
struct NoiseArgs {
    #[command(flatten)]
    one_d: OneD,
    #[arg(long, value_delimiter = ',')]
    snr_db: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct TwoD {
    #[arg(long, value_enum)]
    function: Option<ImageArg>,
    #[arg(long)]
    band: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    oversample: Option<usize>,
    #[command(flatten)]
    detector: DetectorFlags,
}

impl DetectorFlags {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(d) = self.detector {
            cfg.detector = match d {
                DetectorArg::Conc => DetectorKind::Concentration,
                DetectorArg::Prony => DetectorKind::Prony,
            };
        }
        if let Some(f) = self.factor {
            cfg.factor = match f {
                FactorArg::Trig => FactorSpec::trigonometric(),
                FactorArg::Poly => FactorSpec::polynomial(),
                FactorArg::Exp => FactorSpec::exponential(),
            };
        }
        match (&mut cfg.factor, self.alpha, self.poly_order) {
            (FactorSpec::Trigonometric { alpha } | FactorSpec::Exponential { alpha }, Some(a), _) => *alpha = a,
            (FactorSpec::Polynomial { order }, _, Some(p)) => *order = p,
            _ => {}
        }
        if let Some(t) = self.threshold {
            cfg.concentration.threshold_rel = t;
            cfg.recon2d.concentration.threshold_rel = t;
        }
        if self.no_refine {
            cfg.concentration.refine = false;
            cfg.recon2d.concentration.refine = false;
            cfg.prony.refine = false;
        }
        if let Some(j) = self.prony_j {
            cfg.prony.order = ModelOrder::Fixed(j);
        }
        if self.prony_kmin.is_some() {
            cfg.prony.k_min = self.prony_kmin;
        }
        if self.prony_auto_order {
            cfg.prony.order = ModelOrder::Auto;
            cfg.prony_known_order = false;
        }
    }
}

impl OneD {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(f) = self.function {
            cfg.function = f;
        }
        if let Some(ns) = &self.ns {
            cfg.ns = Some(ns.clone());
        }
        if let Some(b) = self.band {
            cfg.ns = Some(vec![b]);
        }
        self.detector.apply(cfg);
    }
}

fn build_config(cli: &Cli) -> Result<(Experiment, ExperimentConfig)> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    let experiment = match &cli.command {
        Command::Reconstruct1d(a) => {
            a.apply(&mut cfg);
            Experiment::Reconstruct1d
        }
        Command::Detect(a) => {
            a.apply(&mut cfg);
            Experiment::Detect
        }
        Command::Convergence(a) => {
            a.apply(&mut cfg);
            Experiment::Convergence
        }
        Command::NoiseSweep(a) => {
            a.one_d.apply(&mut cfg);
            if let Some(s) = &a.snr_db {
                cfg.noise.snr_db = s.clone();
            }
            if let Some(t) = a.trials {
                cfg.noise.trials = t;
            }
            Experiment::NoiseSweep
        }
        Command::Recon2d(a) => {
            a.detector.apply(&mut cfg);
            if let Some(f) = a.function {
                cfg.recon2d.image = match f {
                    ImageArg::F1 => Image::F1,
                    ImageArg::F2 => Image::F2,
                };
            }
            if let Some(b) = a.band {
                cfg.recon2d.band = b;
            }
            if let Some(g) = a.grid {
                cfg.recon2d.grid = g;
            }
            if a.oversample.is_some() {
                cfg.recon2d.oversample = a.oversample;
            }
            Experiment::Recon2d
        }
        Command::Acceptance(_) => Experiment::Acceptance,
    };
    cfg.experiment = Some(experiment);
    cfg.validate(experiment)?;
    Ok((experiment, cfg))
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let (experiment, cfg) = build_config(cli)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match experiment {
        Experiment::Reconstruct1d => print_json(&experiments::run_reconstruct1d(&cfg)?)?,
        Experiment::Detect => print_json(&experiments::run_detect(&cfg)?)?,
        Experiment::Convergence => print_json(&experiments::run_convergence(&cfg)?)?,
        Experiment::NoiseSweep => print_json(&experiments::run_noise_sweep(&cfg)?)?,
        Experiment::Recon2d => {
            let r = experiments::run_recon2d(&cfg)?;
            println!("PSNR partial sum: {:.2} dB", r.psnr_partial);
            println!("PSNR proposed:    {:.2} dB", r.psnr_proposed);
        }
        Experiment::Acceptance => {
            let only = match &cli.command {
                Command::Acceptance(a) => a.only.as_slice(),
                _ => &[],
            };
            let report = run_selected(&cfg.acceptance, cfg.seed, only)?;
            for c in &report.criteria {
                println!("{}", c.summary_line());
            }
            let path = cfg.out.join("acceptance.json");
            write_atomic(&path, serde_json::to_string_pretty(&report)?.as_bytes())?;
            println!("{} ({})", if report.all_passed { "all criteria passed" } else { "some criteria failed" }, path.display());
            return Ok(report.all_passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
