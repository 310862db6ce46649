use sitepower::lp::{DenseSimplex, LpBackend};
use sitepower_highs::HighsBackend;

pub const BACKEND_VAR: &str = "SITEPOWER_LP_BACKEND";

#[derive(Debug, Clone)]
pub enum Backend {
    Dense(DenseSimplex),
    Highs(HighsBackend),
}

impl Backend {
    /// Reads [`BACKEND_VAR`]: `dense`, `highs`, or `auto` (the default, HiGHS).
    pub fn from_env() -> Result<Self, String> {
        match std::env::var(BACKEND_VAR) {
            Err(std::env::VarError::NotPresent) => Ok(Self::Highs(HighsBackend::default())),
            Err(e) => Err(format!("{}: {}", BACKEND_VAR, e)),
            Ok(v) => Self::parse(&v),
        }
    }

    pub fn parse(name: &str) -> Result<Self, String> {
        match name.trim().to_ascii_lowercase().as_str() {
            "" | "auto" | "highs" => Ok(Self::Highs(HighsBackend::default())),
            "dense" => Ok(Self::Dense(DenseSimplex::default())),
            other => Err(format!(
                "{}: unknown LP backend {:?} (expected dense, highs or auto)",
                BACKEND_VAR, other
            )),
        }
    }

    pub fn get(&self) -> &dyn LpBackend<f64> {
        match self {
            Self::Dense(b) => b,
            Self::Highs(b) => b,
        }
    }
}
