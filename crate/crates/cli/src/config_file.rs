//! Run configuration file (JSON): cache parameters, policy selector,
//! trace input or inline workload, and output directory. Unknown keys are
//! rejected; missing keys take the library defaults.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use wearsim_core::{CacheConfig, PolicyKind, WorkloadSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    pub cache: CacheConfig,
    pub policy: PolicyKind,
    pub trace: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    /// Inline workload, used when no trace path is given.
    pub workload: Option<WorkloadSpec>,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        Self {
            cache: CacheConfig::default(),
            policy: PolicyKind::Proposed,
            trace: None,
            out_dir: None,
            workload: None,
        }
    }
}

impl RunConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let cfg: RunConfigFile = serde_json::from_str(&text)
            .with_context(|| format!("parsing config file {}", path.display()))?;
        Ok(cfg)
    }
}
