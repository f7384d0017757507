use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::TuneRequest;
use crate::entropy::EntropyModel;
use crate::error::{config, Error, Result};
use crate::harness::{ExperimentConfig, Perturbation, SmoothPositive, SuiteConfig};
use crate::models::{ErdsSystem, MobilitySpec, ReactionSpec, SktSystem, Variant};
use crate::solver::{Grid1D, TimeConfig};

/// Experiment kinds, one per subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Simulate,
    Stability,
    Uniqueness,
    Equilibrium,
    Check,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Stability => "stability",
            Kind::Uniqueness => "uniqueness",
            Kind::Equilibrium => "equilibrium",
            Kind::Check => "check",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

/// A truncation parameter: a number or `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tunable {
    Value(f64),
    Auto(AutoKeyword),
}

impl Default for Tunable {
    fn default() -> Self {
        Tunable::Auto(AutoKeyword::Auto)
    }
}

impl Tunable {
    pub fn value(self) -> Option<f64> {
        match self {
            Tunable::Value(v) => Some(v),
            Tunable::Auto(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(rename = "E")]
    pub e: Tunable,
    #[serde(rename = "N")]
    pub n: Tunable,
    pub iota: Tunable,
    pub alpha: Tunable,
}

impl TruncationConfig {
    pub fn request(&self) -> TuneRequest {
        TuneRequest {
            e: self.e.value(),
            n: self.n.value(),
            iota: self.iota.value(),
            alpha: self.alpha.value(),
        }
    }

    fn validate(&self) -> Result<()> {
        let checks = [("E", self.e, 1.0), ("N", self.n, 1.0), ("iota", self.iota, 0.0), ("alpha", self.alpha, 0.0)];
        for (key, v, above) in checks {
            if let Some(x) = v.value() {
                if !(x > above && x.is_finite()) {
                    return Err(config(format!("truncation.{key}"), format!("must be finite and > {above}")));
                }
            }
        }
        if let Some(i) = self.iota.value() {
            if i >= 1.0 {
                return Err(config("truncation.iota", "must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub entropy: EntropyModel,
    pub mobility: MobilitySpec,
    pub reactions: ReactionSpec,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            entropy: EntropyModel::default(),
            mobility: MobilitySpec::default(),
            reactions: ReactionSpec::none(),
        }
    }
}

/// The model a config describes.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Erds(ErdsSystem),
    Skt(SktSystem),
}

impl ModelConfig {
    /// Number of species.
    pub fn species(&self) -> usize {
        match (&self.mobility.variant, &self.mobility.skt) {
            (Variant::Skt, Some(p)) => p.n(),
            _ => self.entropy.n(),
        }
    }

    pub fn build(&self) -> Result<Model> {
        if self.mobility.variant == Variant::Skt {
            let params = self
                .mobility
                .skt
                .clone()
                .ok_or_else(|| config("model.mobility.skt", "required for variant skt"))?;
            if !self.reactions.pairs.is_empty() {
                return Err(config("model.reactions", "reactions are not supported with variant skt"));
            }
            return Ok(Model::Skt(SktSystem::new(params)?));
        }
        Ok(Model::Erds(ErdsSystem::new(
            self.entropy.clone(),
            self.mobility.clone(),
            self.reactions.clone(),
        )?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub cells: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            cells: 64,
            length: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Must match the subcommand when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    pub initial: SmoothPositive,
    pub perturbation: Perturbation,
    /// Samples for the truncation schedule.
    pub samples: usize,
    /// Step refinements for `uniqueness`.
    pub levels: usize,
    /// Samples for the sign, stability and flux checks of `check`.
    pub check_samples: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            kind: None,
            initial: SmoothPositive::default(),
            perturbation: Perturbation::default(),
            samples: 20_000,
            levels: 4,
            check_samples: 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            formats: vec![Format::Csv, Format::Json, Format::Svg],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Top-level run configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub time: TimeConfig,
    pub truncation: TruncationConfig,
    pub experiment: ExperimentSection,
    pub output: OutputConfig,
    pub seed: u64,
}

impl RunConfig {
    /// Fills per-species defaults so that the echoed config is complete.
    pub fn fill_defaults(&mut self) {
        let n = self.model.species();
        if self.model.mobility.variant != Variant::Skt {
            self.model.mobility.fill_defaults(n);
        }
        self.experiment.initial.fill_defaults(n);
    }

    /// Checks every section against the model and solver constraints.
    pub fn validate(&self) -> Result<()> {
        let model = self.model.build()?;
        let n = self.model.species();
        let grid = Grid1D::new(self.grid.cells, self.grid.length)?;
        self.time.validate()?;
        self.truncation.validate()?;
        self.experiment.initial.validate(n, "experiment.initial")?;
        self.experiment.perturbation.validate(grid.cells, n + 1, "experiment.perturbation")?;
        if self.experiment.samples == 0 {
            return Err(config("experiment.samples", "must be positive"));
        }
        if self.experiment.check_samples == 0 {
            return Err(config("experiment.check_samples", "must be positive"));
        }
        if self.experiment.levels < 3 {
            return Err(config("experiment.levels", "need at least 3 levels"));
        }
        if let Model::Skt(_) = model {
            if self.experiment.initial.u_amp != 0.0 {
                return Err(config("experiment.initial.u_amp", "variant skt has a constant u slot; use 0"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid1D {
        Grid1D {
            cells: self.grid.cells,
            length: self.grid.length,
        }
    }

    pub fn experiment_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            grid: self.grid(),
            time: self.time.clone(),
            initial: self.experiment.initial.clone(),
            perturbation: self.experiment.perturbation.clone(),
            truncation: self.truncation.request(),
            samples: self.experiment.samples,
            seed: self.seed,
        }
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            seed: self.seed,
            samples: self.experiment.check_samples,
            truncation: self.truncation.request(),
            grid: self.grid(),
            time: self.time.clone(),
            initial: self.experiment.initial.clone(),
            ..SuiteConfig::default()
        }
    }

    /// The effective configuration as JSON.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Parses a config from JSON text, fills defaults and validates it.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and validates a config file.
///
/// ```no_run
/// let cfg = erds::io::load_config("run.json").unwrap();
/// assert!(cfg.grid.cells > 0);
/// ```
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
