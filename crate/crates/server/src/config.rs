//! Server configuration, read from a TOML file. Every key is optional:
//!
//! ```toml
//! port = 8080
//! palette = ["yellow", "green", "red"]
//! k = 4               # topics per query
//! n_top = 150         # search results kept
//! theta = 0.6         # similarity threshold, >= the one used by `omhc pairs`
//! iterations = 500    # Gibbs sweeps
//! seed = 42
//! keywords = 5        # keywords per topic circle
//! session_dir = "sessions"  # persist sessions here; omit to keep them in memory
//! ```

use std::path::{Path, PathBuf};

use omhc_core::notes::{Palette, DEFAULT_PALETTE};
use omhc_core::search::{SearchConfig, DEFAULT_N_TOP};
use omhc_core::similarity::DEFAULT_THRESHOLD;
use omhc_core::topics::{LdaConfig, DEFAULT_ITERATIONS, DEFAULT_K, DEFAULT_KEYWORDS};
use serde::{Deserialize, Serialize};

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub port: u16,
    pub palette: Vec<String>,
    pub k: usize,
    pub n_top: usize,
    pub theta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub keywords: usize,
    pub session_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            port: DEFAULT_PORT,
            palette: DEFAULT_PALETTE.iter().map(|c| c.to_string()).collect(),
            k: DEFAULT_K,
            n_top: DEFAULT_N_TOP,
            theta: DEFAULT_THRESHOLD,
            iterations: DEFAULT_ITERATIONS,
            seed: 42,
            keywords: DEFAULT_KEYWORDS,
            session_dir: None,
        }
    }
}

impl ServerConfig {
    pub fn from_toml_str(text: &str) -> Result<ServerConfig, ConfigError> {
        let cfg: ServerConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<ServerConfig, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        ServerConfig::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.palette()?;
        if self.k == 0 {
            return Err(ConfigError::Invalid("k must be at least 1".into()));
        }
        if self.n_top == 0 {
            return Err(ConfigError::Invalid("n_top must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(ConfigError::Invalid("theta must be within [0, 1]".into()));
        }
        if self.iterations == 0 {
            return Err(ConfigError::Invalid("iterations must be at least 1".into()));
        }
        Ok(())
    }

    pub fn palette(&self) -> Result<Palette, ConfigError> {
        Palette::new(self.palette.iter().cloned()).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig { n_top: self.n_top }
    }

    pub fn lda(&self) -> LdaConfig {
        LdaConfig { k: self.k, iterations: self.iterations, seed: self.seed, ..LdaConfig::default() }
    }
}
