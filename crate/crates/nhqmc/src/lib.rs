//! Command-line runner for the `nhqmc-core` simulator: TOML configs, a rayon
//! executor, CSV/SVG output and the validation suite.

pub mod config;
pub mod error;
pub mod exec;
pub mod fig3;
pub mod output;
pub mod run;
pub mod setup;
pub mod validate;

use config::{Method, RunConfig};

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub shots: Option<u64>,
    pub method: Option<Method>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(m) = self.shots {
            cfg.readout.shots = Some(m);
        }
        if let Some(m) = self.method {
            cfg.propagator.method = Some(m);
            cfg.propagator.methods = None;
        }
    }
}
