//! TOML configuration files for `run` and `synth`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dietnet::baselines::Head;
use dietnet::diet::TrainConfig;
use dietnet::embedding::{DaeConfig, EmbeddingKind};
use dietnet::evaluation::{EmbeddingSpec, ModelSpec};
use dietnet::nn::Activation;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Genotype cache written by `preprocess` or `synth`.
    pub dataset: PathBuf,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub jobs: usize,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default, rename = "model")]
    pub models: Vec<ModelEntry>,
    #[serde(default, rename = "baseline")]
    pub baselines: Vec<BaselineEntry>,
}

fn default_folds() -> usize {
    5
}

/// Overrides of [`TrainConfig`]; absent keys keep the defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub hidden: Option<Vec<usize>>,
    pub aux_hidden: Option<usize>,
    pub aux_layers: Option<Vec<usize>>,
    pub aux_output: Option<String>,
    pub aux_bias: Option<bool>,
    pub activation: Option<String>,
    pub gamma: Option<f64>,
    pub reconstruction: Option<bool>,
    pub dropout: Option<f64>,
    pub lr: Option<f64>,
    pub rho: Option<f64>,
    pub eps: Option<f64>,
    pub batch_size: Option<usize>,
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
    /// `0` disables the constraint.
    pub max_norm: Option<f64>,
    pub weight_decay: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    /// `basic` or `diet`.
    pub variant: String,
    pub embedding: Option<String>,
    /// Random-projection width.
    pub n_f: Option<usize>,
    /// Random-projection nonlinearity.
    pub activation: Option<String>,
    pub dae_hidden: Option<usize>,
    pub dae_epochs: Option<usize>,
    pub dae_corruption: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineEntry {
    pub pcs: usize,
    /// Hidden sizes of an MLP head; absent for a linear head.
    pub mlp: Option<Vec<usize>>,
}

pub fn activation(name: &str) -> Result<Activation> {
    Activation::from_name(name).with_context(|| format!("unknown activation `{name}`"))
}

impl TrainSection {
    pub fn to_config(&self, seed: u64) -> Result<TrainConfig> {
        let mut c = TrainConfig {
            seed,
            ..TrainConfig::default()
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { c.$f = v.clone(); } )* };
        }
        set!(
            hidden,
            aux_hidden,
            aux_layers,
            aux_bias,
            gamma,
            dropout,
            lr,
            rho,
            eps,
            batch_size,
            max_epochs,
            patience,
            weight_decay
        );
        if let Some(r) = self.reconstruction {
            c.reconstruction = Some(r);
        }
        if let Some(a) = &self.activation {
            c.activation = activation(a)?;
        }
        if let Some(a) = &self.aux_output {
            c.aux_output = activation(a)?;
        }
        if let Some(m) = self.max_norm {
            c.max_norm = (m > 0.0).then_some(m);
        }
        c.validate()?;
        Ok(c)
    }
}

impl ModelEntry {
    pub fn spec(&self) -> Result<ModelSpec> {
        match self.variant.as_str() {
            "basic" => {
                if self.embedding.is_some() {
                    bail!("the basic variant takes no embedding");
                }
                Ok(ModelSpec::Basic)
            }
            "diet" => {
                let name = self
                    .embedding
                    .as_deref()
                    .context("a diet model needs `embedding`")?;
                let kind = EmbeddingKind::from_name(name).with_context(|| {
                    let all: Vec<&str> = EmbeddingKind::ALL.iter().map(|k| k.name()).collect();
                    format!(
                        "unknown embedding `{name}` (expected one of {})",
                        all.join(", ")
                    )
                })?;
                let mut e = EmbeddingSpec::new(kind);
                if let Some(n) = self.n_f {
                    e.n_f = n;
                }
                if let Some(a) = &self.activation {
                    e.activation = activation(a)?;
                }
                e.dae = DaeConfig {
                    hidden_dim: self.dae_hidden.unwrap_or(e.dae.hidden_dim),
                    epochs: self.dae_epochs.unwrap_or(e.dae.epochs),
                    corruption_rate: self.dae_corruption.unwrap_or(e.dae.corruption_rate),
                    ..e.dae
                };
                if let Some(a) = self.alpha {
                    e.alpha = a;
                }
                Ok(ModelSpec::Diet(e))
            }
            v => bail!("unknown model variant `{v}` (expected basic or diet)"),
        }
    }
}

impl BaselineEntry {
    pub fn spec(&self) -> Result<ModelSpec> {
        if self.pcs == 0 {
            bail!("a PCA baseline needs at least one component");
        }
        let head = match &self.mlp {
            None => Head::Linear,
            Some(h) if h.is_empty() || h.contains(&0) => bail!("MLP head sizes must be positive"),
            Some(h) => Head::Mlp(h.clone()),
        };
        Ok(ModelSpec::Pca { k: self.pcs, head })
    }
}

impl RunConfig {
    /// Parses `path`; relative paths inside are taken from the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.dataset = base.join(&cfg.dataset);
        if let Some(o) = &cfg.out {
            cfg.out = Some(base.join(o));
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dataset.is_file() {
            bail!("dataset {} does not exist", self.dataset.display());
        }
        if self.folds < 3 {
            bail!("at least 3 folds are needed (test, validation and training)");
        }
        if self.models.is_empty() && self.baselines.is_empty() {
            bail!("nothing to run: add [[model]] or [[baseline]] entries");
        }
        self.train.to_config(self.seed)?;
        for m in &self.models {
            m.spec()?;
        }
        for b in &self.baselines {
            b.spec()?;
        }
        Ok(())
    }

    pub fn specs(&self) -> Result<Vec<ModelSpec>> {
        let mut out = Vec::new();
        for m in &self.models {
            out.push(m.spec()?);
        }
        for b in &self.baselines {
            out.push(b.spec()?);
        }
        Ok(out)
    }
}

/// Synthetic dataset description for `synth`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    #[serde(default)]
    pub seed: u64,
    pub snps: usize,
    #[serde(default)]
    pub frequencies: FrequencyModel,
    #[serde(rename = "population")]
    pub populations: Vec<PopulationEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "model", rename_all = "snake_case")]
pub enum FrequencyModel {
    /// Population `k` has `high` on every `k`-th SNP and `low` elsewhere.
    Blocks {
        #[serde(default = "default_high")]
        high: f64,
        #[serde(default = "default_low")]
        low: f64,
        #[serde(default)]
        overlap: f64,
    },
    BaldingNichols {
        fst: f64,
        #[serde(default)]
        overlap: f64,
    },
}

fn default_high() -> f64 {
    0.9
}

fn default_low() -> f64 {
    0.1
}

impl Default for FrequencyModel {
    fn default() -> Self {
        FrequencyModel::Blocks {
            high: default_high(),
            low: default_low(),
            overlap: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationEntry {
    pub name: String,
    pub region: Option<String>,
    pub samples: usize,
}

impl SynthSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
