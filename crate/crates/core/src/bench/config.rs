use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::SAMENESS_STD_FRACTION;
use crate::error::{Error, Result};
use crate::explain::MethodId;
use crate::model::ForestParams;
use crate::neural::{C2cParams, VaeParams};
use crate::sf_free::{DserConfig, LocalRegionConfig, SgenConfig};
use crate::sf_guided::{C2cSfConfig, DiceConfig, KleorVariant, PieceConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub csv: PathBuf,
    pub schema: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scm: Option<PathBuf>,
}

/// Evaluation protocol. `lambda` and `diverse` override the matching
/// per-method settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    pub folds: usize,
    pub epsilon: f64,
    pub perturbations: usize,
    pub lambda: f64,
    pub diverse: usize,
    pub ideal_diff: usize,
    pub sameness_std_fraction: f64,
    /// Test queries explained per fold; `None` for all of them.
    pub max_queries_per_fold: Option<usize>,
    /// Queries per fold that also get the robustness sweep; `None` for all.
    pub robustness_queries_per_fold: Option<usize>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            folds: 5,
            epsilon: 0.1,
            perturbations: 100,
            lambda: 0.2,
            diverse: 3,
            ideal_diff: 1,
            sameness_std_fraction: SAMENESS_STD_FRACTION,
            max_queries_per_fold: None,
            robustness_queries_per_fold: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodSettings {
    pub forest: ForestParams,
    pub local_region: LocalRegionConfig,
    pub dser: DserConfig,
    pub sgen: SgenConfig,
    pub vae: VaeParams,
    pub c2c_model: C2cParams,
    pub c2c: C2cSfConfig,
    pub dice: DiceConfig,
    pub kleor: KleorVariant,
    pub piece: PieceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    #[serde(default = "all_methods")]
    pub methods: Vec<MethodId>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub settings: MethodSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; `None` lets the pool decide.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

fn all_methods() -> Vec<MethodId> {
    MethodId::ALL.to_vec()
}

impl ExperimentConfig {
    pub fn new(datasets: Vec<DatasetSpec>) -> Self {
        ExperimentConfig {
            datasets,
            methods: all_methods(),
            seed: 0,
            protocol: ProtocolConfig::default(),
            settings: MethodSettings::default(),
            output_dir: None,
            jobs: None,
        }
    }

    /// Read a JSON config; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for d in &mut cfg.datasets {
            resolve(&mut d.csv);
            resolve(&mut d.schema);
            if let Some(s) = &mut d.scm {
                resolve(s);
            }
        }
        if let Some(o) = &mut cfg.output_dir {
            resolve(o);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.datasets.is_empty() {
            return bad("at least one dataset is required");
        }
        let mut names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("dataset names must be unique");
        }
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        if methods.len() != self.methods.len() {
            return bad("methods are listed more than once");
        }
        if methods.len() < 2 {
            return bad("at least two methods are required");
        }
        let p = &self.protocol;
        if p.folds < 2 {
            return bad("folds must be at least 2");
        }
        if !(p.epsilon > 0.0) || p.perturbations == 0 {
            return bad("robustness needs epsilon > 0 and at least one perturbation");
        }
        if !(0.0..=1.0).contains(&p.lambda) {
            return bad("lambda must lie in [0, 1]");
        }
        if p.diverse == 0 || p.ideal_diff == 0 {
            return bad("diverse and ideal_diff must be at least 1");
        }
        if !(p.sameness_std_fraction >= 0.0) {
            return bad("sameness_std_fraction must be non-negative");
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1");
        }
        Ok(())
    }

    /// Method settings with the protocol-level values applied.
    pub fn effective_settings(&self) -> MethodSettings {
        let mut s = self.settings.clone();
        s.c2c.lambda = self.protocol.lambda;
        s.dser.n_diverse = self.protocol.diverse;
        s.sgen.m = self.protocol.diverse;
        s.dice.k = self.protocol.diverse;
        s
    }
}
