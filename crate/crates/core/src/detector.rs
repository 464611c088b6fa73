//! A single entry point over the two jump estimators.

use serde::{Deserialize, Serialize};

use crate::concentration::{self, DetectionConfig, FactorSpec};
use crate::error::Result;
use crate::jumps::JumpSet;
use crate::prony::{self, PronyConfig};
use crate::spectrum::Spectrum1D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Detector {
    Concentration {
        #[serde(default)]
        factor: FactorSpec,
        #[serde(default)]
        config: DetectionConfig,
    },
    Prony {
        #[serde(default)]
        config: PronyConfig,
    },
}

impl Default for Detector {
    fn default() -> Self {
        Detector::concentration()
    }
}

impl Detector {
    pub fn concentration() -> Self {
        Detector::Concentration { factor: FactorSpec::default(), config: DetectionConfig::default() }
    }

    /// Default for the 2D cross-sections: concentration peaks with fitted
    /// heights but unrefined locations. Rows of the `y`-truncated image are
    /// not piecewise smooth where an edge runs nearly parallel to them, and
    /// on the pixel grid the peak-aligned edges score better than refined
    /// ones that land a fraction of a pixel off.
    pub fn concentration_2d() -> Self {
        Detector::Concentration {
            factor: FactorSpec::default(),
            config: DetectionConfig { refine_locations: false, ..DetectionConfig::default() },
        }
    }

    pub fn prony() -> Self {
        Detector::Prony { config: PronyConfig::default() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Detector::Concentration { .. } => "concentration",
            Detector::Prony { .. } => "prony",
        }
    }

    pub fn detect(&self, spectrum: &Spectrum1D) -> Result<JumpSet> {
        match self {
            Detector::Concentration { factor, config } => {
                Ok(concentration::detect(spectrum, *factor, config)?.jumps)
            }
            Detector::Prony { config } => Ok(prony::prony_estimate(spectrum, config)?.jumps),
        }
    }
}
