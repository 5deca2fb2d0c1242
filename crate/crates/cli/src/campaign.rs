use std::path::{Path, PathBuf};

use qfsk_lab::codes::CodeConfig;
use qfsk_lab::decoder::DecoderConfig;
use qfsk_lab::sim::StopRule;
use serde::{Deserialize, Serialize};

use crate::args::SnrRef;
use crate::Failure;

/// A complete experiment description. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignFile {
    pub code: CodeConfig,
    #[serde(default)]
    pub decoder: DecoderConfig,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub bounds: Option<BoundsSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub grid_db: Vec<f64>,
    #[serde(default)]
    pub snr_ref: SnrRef,
    #[serde(default)]
    pub stop: StopRule,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub e0_samples: Option<usize>,
    #[serde(default)]
    pub omega_samples: Option<usize>,
    #[serde(default)]
    pub capacity_samples: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub fer: Option<PathBuf>,
    #[serde(default)]
    pub rcu: Option<PathBuf>,
    #[serde(default)]
    pub normal: Option<PathBuf>,
}

impl CampaignFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::invalid(format!("cannot read campaign {}: {e}", path.display())))?;
        let c: CampaignFile = serde_json::from_str(&text)
            .map_err(|e| Failure::invalid(format!("campaign {}: {e}", path.display())))?;
        c.decoder.validate()?;
        if let Some(s) = &c.sweep {
            if s.grid_db.is_empty() {
                return Err(Failure::invalid("campaign sweep.grid_db is empty"));
            }
            if s.stop.min_frame_errors == 0 || s.stop.max_frames == 0 {
                return Err(Failure::invalid("campaign stop rule needs positive limits"));
            }
        }
        if c.workers == Some(0) {
            return Err(Failure::invalid("campaign workers must be >= 1"));
        }
        Ok(c)
    }
}
