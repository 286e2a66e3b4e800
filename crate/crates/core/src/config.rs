//! Run configuration: one TOML file with `${VAR}` environment
//! interpolation. Command-line flags override file values.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::ChunkConfig;
use crate::error::{Error, Result};
use crate::generation::{GenerationConfig, TemplateGenerator};
use crate::harness::{HttpAdapter, HttpAdapterConfig, ModelAdapter, ScriptedMock};
use crate::metrics::{BootstrapSettings, MetricConfig, DEFAULT_LEVEL, DEFAULT_RESAMPLES};
use crate::retrieval::{Embedder, HashEmbedder, HttpEmbedder};
use crate::review::DecisionThresholds;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    /// Offline generator that builds items from the prompt paragraph.
    Template,
    /// Replays a mock script file.
    Scripted { script: PathBuf },
    Http(HttpAdapterConfig),
}

impl BackendConfig {
    /// True for backends whose output is reproducible run to run.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, BackendConfig::Http(_))
    }

    pub fn build(&self) -> Result<Box<dyn ModelAdapter>> {
        Ok(match self {
            BackendConfig::Template => Box::new(TemplateGenerator),
            BackendConfig::Scripted { script } => Box::new(ScriptedMock::load(script)?),
            BackendConfig::Http(cfg) => Box::new(HttpAdapter::new(cfg.clone())?),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingConfig {
    #[default]
    Hash,
    Http {
        endpoint: String,
        #[serde(default)]
        api_key_env: Option<String>,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
    },
}

fn default_timeout() -> u64 {
    60
}

impl EmbeddingConfig {
    pub fn build(&self) -> Result<Box<dyn Embedder>> {
        Ok(match self {
            EmbeddingConfig::Hash => Box::new(HashEmbedder),
            EmbeddingConfig::Http {
                endpoint,
                api_key_env,
                timeout_secs,
            } => {
                let key = match api_key_env {
                    Some(v) => Some(
                        std::env::var(v).map_err(|_| Error::Config(format!("environment variable {v} is not set")))?,
                    ),
                    None => None,
                };
                Box::new(HttpEmbedder::new(endpoint, key, Duration::from_secs(*timeout_secs))?)
            }
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub items: Option<PathBuf>,
    pub scenarios: Vec<PathBuf>,
    pub transcripts: Option<PathBuf>,
    pub reports: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Backends {
    pub generation: Option<BackendConfig>,
    pub candidate: Option<BackendConfig>,
    pub embedding: EmbeddingConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: DEFAULT_RESAMPLES,
            level: DEFAULT_LEVEL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReviewConfig {
    pub redundancy: usize,
    pub port: u16,
    pub thresholds: DecisionThresholds,
}

impl Default for ReviewConfig {
    fn default() -> Self {
        Self {
            redundancy: 2,
            port: 8080,
            thresholds: DecisionThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub parallelism: usize,
    pub paths: Paths,
    pub backends: Backends,
    pub chunking: ChunkConfig,
    pub generation: GenerationConfig,
    pub metrics: MetricConfig,
    pub bootstrap: BootstrapConfig,
    pub review: ReviewConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            parallelism: 4,
            paths: Paths::default(),
            backends: Backends::default(),
            chunking: ChunkConfig::default(),
            generation: GenerationConfig::default(),
            metrics: MetricConfig::default(),
            bootstrap: BootstrapConfig::default(),
            review: ReviewConfig::default(),
        }
    }
}

fn var_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}").expect("valid pattern"))
}

/// Replace every `${NAME}` using `lookup`; an unset name is an error.
pub fn interpolate(text: &str, lookup: impl Fn(&str) -> Option<String>) -> Result<String> {
    let mut missing = Vec::new();
    let out = var_pattern().replace_all(text, |c: &regex::Captures| {
        lookup(&c[1]).unwrap_or_else(|| {
            missing.push(c[1].to_string());
            String::new()
        })
    });
    if !missing.is_empty() {
        return Err(Error::Config(format!(
            "unset environment variable(s): {}",
            missing.join(", ")
        )));
    }
    Ok(out.into_owned())
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let body = interpolate(text, |k| std::env::var(k).ok())?;
        let cfg: RunConfig = toml::from_str(&body).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load a config file; relative paths inside resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let p = &mut cfg.paths;
        for slot in [&mut p.corpus, &mut p.items, &mut p.transcripts, &mut p.reports]
            .into_iter()
            .flatten()
        {
            resolve(base, slot);
        }
        p.scenarios.iter_mut().for_each(|s| resolve(base, s));
        for b in [&mut cfg.backends.generation, &mut cfg.backends.candidate]
            .into_iter()
            .flatten()
        {
            if let BackendConfig::Scripted { script } = b {
                resolve(base, script);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        self.chunking.validate()?;
        self.metrics.validate()?;
        if self.bootstrap.resamples == 0 || !(self.bootstrap.level > 0.0 && self.bootstrap.level < 1.0) {
            return Err(Error::Config("bootstrap needs resamples >= 1 and level in (0,1)".into()));
        }
        if self.review.redundancy == 0 {
            return Err(Error::Config("review redundancy must be at least 1".into()));
        }
        Ok(())
    }

    pub fn bootstrap_settings(&self) -> BootstrapSettings {
        BootstrapSettings {
            resamples: self.bootstrap.resamples,
            level: self.bootstrap.level,
            seed: self.seed,
        }
    }
}
