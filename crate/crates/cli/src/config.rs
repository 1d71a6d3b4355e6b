//! Flat key-value scenario configuration.

use std::path::{Path, PathBuf};

use amt_core::closed::SweepConvention;
use amt_core::open::vsystem::{bose_einstein_occupation, CoherenceSign, VSystemParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    RabiSweep,
    VsystemTurnon,
    AdiabaticityCheck,
    JordanSelftest,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::RabiSweep,
        Scenario::VsystemTurnon,
        Scenario::AdiabaticityCheck,
        Scenario::JordanSelftest,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::RabiSweep => "rabi_sweep",
            Scenario::VsystemTurnon => "vsystem_turnon",
            Scenario::AdiabaticityCheck => "adiabaticity_check",
            Scenario::JordanSelftest => "jordan_selftest",
        }
    }

    pub fn summary(&self) -> &'static str {
        match self {
            Scenario::RabiSweep => {
                "driven two-level system under a linear frequency sweep, one CSV per sweep rate"
            }
            Scenario::VsystemTurnon => {
                "V-system under incoherent light switched on at several rates, one CSV per rate"
            }
            Scenario::AdiabaticityCheck => {
                "static avoided crossing: margin ratio vs retention vs Landau-Zener"
            }
            Scenario::JordanSelftest => {
                "Jordan-chain decomposition checks on constructed and V-system generators"
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialMode {
    #[default]
    Minus,
    Plus,
}

/// One run. Keys irrelevant to the chosen scenario are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,

    // two-level sweep
    pub delta0: f64,
    /// `|V|`.
    pub coupling: f64,
    /// `arg V`.
    pub coupling_phase: f64,
    /// Sweep rates `|d omega / dt|`.
    pub sweep_rates: Vec<f64>,
    pub sweep_convention: SweepConvention,
    pub initial_mode: InitialMode,
    /// Evenly spaced samples on `t / tau` in `[0, 1]`.
    pub samples: usize,
    /// RK4 step bound for closed propagation.
    pub max_step: f64,

    // V-system
    pub gamma1: f64,
    pub gamma2: f64,
    pub delta: f64,
    pub p: f64,
    pub nbar: Option<f64>,
    pub temperature_k: Option<f64>,
    pub transition_energy_ev: Option<f64>,
    /// Turn-on rates; `inf` for a sudden switch.
    pub alphas: Vec<f64>,
    /// Run length in units of `1 / gamma_bar`.
    pub t_end_gamma: f64,
    pub coherence_sign: CoherenceSign,
    pub adaptive: bool,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Fixed RK4 step for open propagation, in units of `1 / gamma_bar`.
    pub open_step: f64,
    pub log_samples: usize,
    pub linear_samples: usize,

    // avoided crossing
    pub gap: f64,
    /// Sweep `lambda` over `[-lambda_max, lambda_max]`.
    pub lambda_max: f64,

    /// Output directory; the command line wins over this.
    pub out_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::RabiSweep,
            delta0: 1.0,
            coupling: 0.5,
            coupling_phase: 0.0,
            sweep_rates: vec![1e-3, 1e-2, 1e-1, 1.0, 10.0],
            sweep_convention: SweepConvention::Detuning,
            initial_mode: InitialMode::Minus,
            samples: 501,
            max_step: 0.002,
            gamma1: 1.0,
            gamma2: 1.0,
            delta: 0.1,
            p: 1.0,
            nbar: None,
            temperature_k: Some(5800.0),
            transition_energy_ev: Some(1.98),
            alphas: vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4],
            t_end_gamma: 5e4,
            coherence_sign: CoherenceSign::Corrected,
            adaptive: false,
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            open_step: 0.05,
            log_samples: 200,
            linear_samples: 301,
            gap: 1.0,
            lambda_max: 5.0,
            out_dir: None,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.scenario {
            Scenario::RabiSweep => {
                positive("delta0", self.delta0)?;
                positive("coupling", self.coupling)?;
                finite("coupling_phase", self.coupling_phase)?;
                nonempty_positive("sweep_rates", &self.sweep_rates)?;
                positive("max_step", self.max_step)?;
                if self.samples < 2 {
                    return Err(bad("samples must be at least 2"));
                }
            }
            Scenario::VsystemTurnon => {
                self.vsystem_params(0.0)?;
                if self.alphas.is_empty() {
                    return Err(bad("alphas must not be empty"));
                }
                for &a in &self.alphas {
                    if !(a >= 0.0) {
                        return Err(bad(format!("alphas must be non-negative, got {a}")));
                    }
                }
                positive("t_end_gamma", self.t_end_gamma)?;
                positive("open_step", self.open_step)?;
                positive("rel_tol", self.rel_tol)?;
                positive("abs_tol", self.abs_tol)?;
                if self.log_samples + self.linear_samples < 2 {
                    return Err(bad("need at least 2 samples in total"));
                }
            }
            Scenario::AdiabaticityCheck => {
                positive("gap", self.gap)?;
                positive("lambda_max", self.lambda_max)?;
                positive("max_step", self.max_step)?;
                nonempty_positive("sweep_rates", &self.sweep_rates)?;
            }
            Scenario::JordanSelftest => {}
        }
        Ok(())
    }

    /// Mean occupation: `nbar` if given, else the Bose-Einstein value at
    /// `(temperature_k, transition_energy_ev)`.
    pub fn occupation(&self) -> Result<f64, ConfigError> {
        match (self.nbar, self.temperature_k, self.transition_energy_ev) {
            (Some(n), _, _) => {
                if !(n >= 0.0) || !n.is_finite() {
                    return Err(bad(format!(
                        "nbar must be finite and non-negative, got {n}"
                    )));
                }
                Ok(n)
            }
            (None, Some(t), Some(e)) => {
                bose_einstein_occupation(t, e).map_err(|e| bad(e.to_string()))
            }
            _ => Err(bad(
                "give nbar or both temperature_k and transition_energy_ev",
            )),
        }
    }

    pub fn vsystem_params(&self, alpha: f64) -> Result<VSystemParams, ConfigError> {
        let params = VSystemParams {
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            delta: self.delta,
            p: self.p,
            nbar: self.occupation()?,
            alpha,
        };
        params.validate().map_err(|e| bad(e.to_string()))?;
        Ok(params)
    }
}

fn finite(name: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be finite, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive, got {x}")))
    }
}

fn nonempty_positive(name: &str, xs: &[f64]) -> Result<(), ConfigError> {
    if xs.is_empty() {
        return Err(bad(format!("{name} must not be empty")));
    }
    for &x in xs {
        positive(name, x)?;
    }
    Ok(())
}
