//! Session configuration: TOML file (path from `--config` or the
//! `IWASAWA_CONFIG` environment variable) overridden by command-line flags.

use std::path::{Path, PathBuf};

use iwasawa_core::poly::DegreeBudget;
use iwasawa_core::Error;
use serde::{Deserialize, Serialize};

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "IWASAWA_CONFIG";

/// Output renderer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

/// Settings shared by every command of one invocation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionConfig {
    pub p: u64,
    /// Global precision exponent `N` (coefficients are known mod `p^N`).
    pub precision: u32,
    /// Maximal polynomial degree any computation may materialize.
    pub degree_budget: usize,
    pub n_max: u32,
    pub seed: u64,
    pub format: Format,
    /// Coinvariant engine name.
    pub engine: String,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            p: 5,
            precision: 24,
            degree_budget: DegreeBudget::default().0,
            n_max: 3,
            seed: 42,
            format: Format::Json,
            engine: "layered".to_string(),
        }
    }
}

/// Which fields were set explicitly (file or flag) rather than defaulted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Explicit {
    pub p: bool,
    pub precision: bool,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

impl SessionConfig {
    /// Reads the file at `path`, or at `$IWASAWA_CONFIG`, or returns defaults.
    pub fn load(path: Option<&Path>) -> Result<(Self, Explicit), Error> {
        let path: Option<PathBuf> = match path {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from),
        };
        let Some(path) = path else {
            return Ok((SessionConfig::default(), Explicit::default()));
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Io { message: format!("{}: {e}", path.display()) })?;
        let table: toml::Table = toml::from_str(&text).map_err(|e| Error::InvalidInput {
            field: "config".into(),
            message: format!("{}: {e}", path.display()),
        })?;
        let explicit = Explicit { p: table.contains_key("p"), precision: table.contains_key("precision") };
        let cfg: SessionConfig = toml::from_str(&text).map_err(|e| Error::InvalidInput {
            field: "config".into(),
            message: format!("{}: {e}", path.display()),
        })?;
        Ok((cfg, explicit))
    }

    /// Enforces `p ≥ 5` prime, `N ≥ 4`, and `n_max` within the degree budget.
    pub fn validate(&self) -> Result<(), Error> {
        if self.p < 5 || !is_prime(self.p) {
            return Err(Error::InvalidInput { field: "p".into(), message: format!("{} must be a prime ≥ 5", self.p) });
        }
        if self.precision < 4 {
            return Err(Error::InvalidInput {
                field: "precision".into(),
                message: format!("{} is below the minimum 4", self.precision),
            });
        }
        self.check_levels(self.p, self.n_max)
    }

    /// `n_max` levels at prime `p` fit the degree budget.
    pub fn check_levels(&self, p: u64, n_max: u32) -> Result<(), Error> {
        let need = DegreeBudget::for_levels(p, n_max).0;
        if need > self.degree_budget {
            return Err(Error::ResourceLimit {
                what: format!("n_max = {n_max} at p = {p} needs degree {need} > budget {}", self.degree_budget),
            });
        }
        Ok(())
    }
}
