//! JSON experiment configuration. Every field has a default, so `{}` is a
//! valid config; command-line flags override whatever the file sets.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gibbsfree_core::concentration::{DetectionConfig, FactorSpec};
use gibbsfree_core::detector::Detector;
use gibbsfree_core::functions::CorpusId;
use gibbsfree_core::prony::{ModelOrder, PronyConfig};
use gibbsfree_core::JumpSet;
use serde::{Deserialize, Serialize};

use crate::acceptance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Reconstruct1d,
    Detect,
    Convergence,
    NoiseSweep,
    Recon2d,
    Acceptance,
}

impl Experiment {
    /// Band limits used when the config does not list any.
    pub fn default_ns(self) -> Vec<usize> {
        match self {
            Experiment::Convergence => vec![16, 32, 64, 128, 256, 512],
            Experiment::NoiseSweep => vec![25, 50, 100, 200],
            _ => vec![50],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    #[default]
    Concentration,
    Prony,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Image {
    F1,
    #[default]
    F2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub snr_db: Vec<f64>,
    pub trials: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { snr_db: vec![70.0, 30.0], trials: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Recon2dConfig {
    pub image: Image,
    pub band: usize,
    pub grid: usize,
    /// `None` means `2·grid`.
    pub oversample: Option<usize>,
    /// Detection settings for the cross-sections; by default locations are
    /// kept at the concentration peaks and only heights are fitted.
    pub concentration: DetectionConfig,
}

impl Default for Recon2dConfig {
    fn default() -> Self {
        Self {
            image: Image::F2,
            band: 25,
            grid: 256,
            oversample: None,
            concentration: DetectionConfig { refine_locations: false, ..DetectionConfig::default() },
        }
    }
}

impl Recon2dConfig {
    pub fn resolved_oversample(&self) -> usize {
        self.oversample.unwrap_or(2 * self.grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub function: CorpusId,
    /// Band limits; `None` takes the experiment's default list.
    pub ns: Option<Vec<usize>>,
    pub detector: DetectorKind,
    pub factor: FactorSpec,
    pub concentration: DetectionConfig,
    pub prony: PronyConfig,
    /// When the order is `auto` and the true jump count is known (corpus
    /// functions), use it instead of the singular-value rule.
    pub prony_known_order: bool,
    pub noise: NoiseConfig,
    pub recon2d: Recon2dConfig,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    /// Gauss-Legendre nodes per panel for L2 errors.
    pub quad_nodes: usize,
    /// Sample points for 1D reconstruction output.
    pub grid_points: usize,
    pub acceptance: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            function: CorpusId::H,
            ns: None,
            detector: DetectorKind::Concentration,
            factor: FactorSpec::default(),
            concentration: DetectionConfig::default(),
            prony: PronyConfig::default(),
            prony_known_order: true,
            noise: NoiseConfig::default(),
            recon2d: Recon2dConfig::default(),
            seed: 2024,
            threads: None,
            out: PathBuf::from("out"),
            quad_nodes: 16,
            grid_points: 1024,
            acceptance: Tolerances::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn ns_for(&self, experiment: Experiment) -> Vec<usize> {
        self.ns.clone().unwrap_or_else(|| experiment.default_ns())
    }

    pub fn validate(&self, experiment: Experiment) -> Result<()> {
        let ns = self.ns_for(experiment);
        if ns.is_empty() {
            bail!("ns must not be empty");
        }
        if ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
            bail!("ns must be positive and strictly ascending, got {ns:?}");
        }
        if self.quad_nodes < 2 {
            bail!("quad_nodes must be at least 2");
        }
        if self.grid_points == 0 {
            bail!("grid_points must be positive");
        }
        if self.noise.trials == 0 {
            bail!("noise.trials must be at least 1");
        }
        if self.recon2d.band == 0 || self.recon2d.grid == 0 {
            bail!("recon2d band and grid must be positive");
        }
        Ok(())
    }

    /// Prony settings for a function whose true jumps are `truth`.
    pub fn prony_for(&self, truth: Option<&JumpSet>) -> PronyConfig {
        match (self.prony.order, truth) {
            (ModelOrder::Auto, Some(t)) if self.prony_known_order => {
                PronyConfig { order: ModelOrder::Fixed(t.len()), ..self.prony }
            }
            _ => self.prony,
        }
    }

    pub fn concentration_detector(&self) -> Detector {
        Detector::Concentration { factor: self.factor, config: self.concentration }
    }

    pub fn prony_detector(&self, truth: Option<&JumpSet>) -> Detector {
        Detector::Prony { config: self.prony_for(truth) }
    }

    /// The detector selected by `detector`.
    pub fn selected_detector(&self, truth: Option<&JumpSet>) -> Detector {
        match self.detector {
            DetectorKind::Concentration => self.concentration_detector(),
            DetectorKind::Prony => self.prony_detector(truth),
        }
    }

    pub fn recon2d_detector(&self) -> Detector {
        match self.detector {
            DetectorKind::Concentration => {
                Detector::Concentration { factor: self.factor, config: self.recon2d.concentration }
            }
            DetectorKind::Prony => Detector::Prony { config: self.prony },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        let c: ExperimentConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), c);
    }

    #[test]
    fn unknown_keys_and_functions_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"function": "nope"}"#).is_err());
        let c: ExperimentConfig = serde_json::from_str(r#"{"function": "s"}"#).unwrap();
        assert_eq!(c.function, CorpusId::S);
    }

    #[test]
    fn ns_validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate(Experiment::Convergence).is_ok());
        c.ns = Some(vec![32, 16]);
        assert!(c.validate(Experiment::Convergence).is_err());
        c.ns = Some(vec![]);
        assert!(c.validate(Experiment::Convergence).is_err());
    }

    #[test]
    fn known_order_substitution() {
        let c = ExperimentConfig::default();
        let t = JumpSet::from_pairs(&[(0.0, 1.0), (1.0, -1.0)]).unwrap();
        assert_eq!(c.prony_for(Some(&t)).order, ModelOrder::Fixed(2));
        assert_eq!(c.prony_for(None).order, ModelOrder::Auto);
        let fixed = ExperimentConfig { prony: PronyConfig::with_order(3), ..c };
        assert_eq!(fixed.prony_for(Some(&t)).order, ModelOrder::Fixed(3));
    }
}
