//! Run parameters. Values come from, in increasing precedence, the built-in
//! defaults, a JSON config file and command-line flags.

use std::path::Path;

use protoalign::apart::LossWeights;
use protoalign::ot::{CurriculumSchedule, SolverConfig};
use protoalign::survival::MedianTies;
use protoalign::together::AlignParams;
use serde::{Deserialize, Serialize};

use crate::csvio::read_bytes;
use crate::error::{CliError, Result};

/// Environment variable naming the config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "PROTOALIGN_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Balanced,
    Uot,
    Curriculum,
}

macro_rules! run_config {
    ($($field:ident : $ty:ty = $default:expr),* $(,)?) => {
        /// Fully resolved parameters, echoed into every report.
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct RunConfig {
            $(pub $field: $ty,)*
        }

        impl Default for RunConfig {
            fn default() -> Self {
                Self { $($field: $default,)* }
            }
        }

        /// One layer of overrides; absent keys leave the lower layer alone.
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct ConfigLayer {
            $(#[serde(default, skip_serializing_if = "Option::is_none")] pub $field: Option<$ty>,)*
        }

        impl RunConfig {
            pub fn apply(&mut self, layer: &ConfigLayer) {
                $(if let Some(v) = &layer.$field { self.$field = v.clone(); })*
            }
        }
    };
}

run_config! {
    seed: u64 = 0,
    mode: SolveMode = SolveMode::Curriculum,
    epsilon: f64 = 0.05,
    gamma: f64 = 0.1,
    iota: f64 = 1e9,
    max_iters: usize = 1000,
    tol: f64 = 1e-9,
    log_domain: bool = true,
    exact_sink: bool = true,
    rho: f64 = 1.0,
    rho_base: f64 = 0.1,
    rho_upper: f64 = 1.0,
    horizon: u64 = 1000,
    steps: Option<u64> = None,
    k: usize = 32,
    d_prime: usize = 256,
    tau: f64 = 0.5,
    beta: f64 = 0.5,
    rescale_plan: bool = true,
    lambda_wsi: f64 = 1.0,
    lambda_gen: f64 = 1.0,
    tau_r: f64 = 0.1,
    lambda_contrast: f64 = 0.5,
    lambda_instance: f64 = 0.5,
    median_ties: MedianTies = MedianTies::Low,
}

fn check(ok: bool, name: &str, msg: impl std::fmt::Display) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name}: {msg}")))
    }
}

impl RunConfig {
    /// Defaults, then the file (if any), then the flags.
    pub fn resolve(file: Option<&ConfigLayer>, flags: &ConfigLayer) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(f) = file {
            cfg.apply(f);
        }
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver().validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.schedule()?;
        check((0.0..=1.0).contains(&self.rho), "rho", format!("must lie in [0, 1], got {}", self.rho))?;
        if let Some(steps) = self.steps {
            check(
                steps >= self.horizon,
                "steps",
                format!("must be >= horizon ({}) so the last row reaches rho_upper, got {steps}", self.horizon),
            )?;
        }
        check(self.k >= 2, "k", format!("need at least 2 prototypes, got {}", self.k))?;
        check(self.d_prime >= 1, "d_prime", "must be >= 1")?;
        check(self.tau > 0.0, "tau", format!("must be > 0, got {}", self.tau))?;
        check((0.0..=1.0).contains(&self.beta), "beta", format!("must lie in [0, 1], got {}", self.beta))?;
        check(self.tau_r > 0.0, "tau_r", format!("must be > 0, got {}", self.tau_r))?;
        for (name, v) in [
            ("lambda_wsi", self.lambda_wsi),
            ("lambda_gen", self.lambda_gen),
            ("lambda_contrast", self.lambda_contrast),
            ("lambda_instance", self.lambda_instance),
        ] {
            check(v >= 0.0, name, format!("must be >= 0, got {v}"))?;
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig<f64> {
        SolverConfig {
            epsilon: self.epsilon,
            gamma: self.gamma,
            iota: self.iota,
            max_iters: self.max_iters,
            tol: self.tol,
            log_domain: self.log_domain,
            exact_sink: self.exact_sink,
        }
    }

    pub fn schedule(&self) -> Result<CurriculumSchedule<f64>> {
        CurriculumSchedule::new(self.rho_base, self.rho_upper, self.horizon).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn align_params(&self) -> AlignParams<f64> {
        AlignParams {
            rho: self.rho,
            beta: self.beta,
            lambda_wsi: self.lambda_wsi,
            lambda_gen: self.lambda_gen,
            rescale_plan: self.rescale_plan,
        }
    }

    pub fn loss_weights(&self) -> LossWeights<f64> {
        LossWeights {
            lambda_contrast: self.lambda_contrast,
            lambda_instance: self.lambda_instance,
        }
    }
}

pub fn load_layer(path: &Path) -> Result<ConfigLayer> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::format(path, format!("invalid config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<ConfigLayer>(r#"{"epsilon": 0.1, "epslion": 2}"#).is_err());
        let l: ConfigLayer = serde_json::from_str(r#"{"epsilon": 0.1, "mode": "uot", "median_ties": "high"}"#).unwrap();
        assert_eq!(l.mode, Some(SolveMode::Uot));
    }

    #[test]
    fn layers_apply_in_order() {
        let file = ConfigLayer {
            epsilon: Some(0.2),
            gamma: Some(0.3),
            ..Default::default()
        };
        let flags = ConfigLayer {
            epsilon: Some(0.4),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Some(&file), &flags).unwrap();
        assert_eq!((cfg.epsilon, cfg.gamma, cfg.tol), (0.4, 0.3, 1e-9));
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = ConfigLayer {
            beta: Some(1.5),
            ..Default::default()
        };
        assert!(RunConfig::resolve(None, &bad).is_err());
        let bad = ConfigLayer {
            steps: Some(Some(10)),
            ..Default::default()
        };
        assert!(RunConfig::resolve(None, &bad).is_err());
    }
}
