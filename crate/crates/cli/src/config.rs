//! Experiment configuration files and their resolution against the
//! command line and per-experiment defaults.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use eswap_core::circuits::T_BS;
use eswap_core::dynamics::{NoiseConfig, NoiseModel};
use eswap_core::encodings::{default_cutoff, EncodingKind, DEFAULT_ALPHA};
use eswap_core::processtomo::{Mechanism, SpamModel};
use eswap_core::tomography::{DEFAULT_GRID_EXTENT, DEFAULT_GRID_N};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    FockDemo,
    CoherentSweep,
    Qpt,
    Fredkin,
    Kerr,
    ErrorBudget,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::FockDemo => "fock-demo",
            Experiment::CoherentSweep => "coherent-sweep",
            Experiment::Qpt => "qpt",
            Experiment::Fredkin => "fredkin",
            Experiment::Kerr => "kerr",
            Experiment::ErrorBudget => "error-budget",
        }
    }

    fn default_encoding(self) -> &'static str {
        match self {
            Experiment::FockDemo | Experiment::Qpt | Experiment::Fredkin => "fock",
            Experiment::CoherentSweep | Experiment::Kerr => "coherent",
            Experiment::ErrorBudget => "binomial",
        }
    }

    fn allowed_encodings(self) -> &'static [&'static str] {
        match self {
            Experiment::FockDemo | Experiment::Fredkin => &["fock"],
            Experiment::CoherentSweep | Experiment::Kerr => &["coherent"],
            Experiment::Qpt | Experiment::ErrorBudget => &["fock", "binomial"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Exact expectation values with the SPAM contrast applied.
    #[default]
    Exact,
    /// Finite parity shots from a seeded generator.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Points per axis.
    pub n: usize,
    /// Largest |coordinate| on each axis.
    pub extent: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n: DEFAULT_GRID_N,
            extent: DEFAULT_GRID_EXTENT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpamConfig {
    pub enabled: bool,
    /// Encode-only process fidelity the preparation noise is calibrated
    /// to. `None` picks 0.88 (Fock) or 0.77 (binomial).
    pub f_encode: Option<f64>,
    /// Fixed preparation strength; skips the calibration.
    pub prep_strength: Option<f64>,
    pub readout_error: [f64; 2],
    pub parity_contrast: [f64; 2],
    pub ancilla_init_error: f64,
}

impl Default for SpamConfig {
    fn default() -> Self {
        let m = SpamModel::default();
        Self {
            enabled: true,
            f_encode: None,
            prep_strength: None,
            readout_error: m.readout_error,
            parity_contrast: m.parity_contrast,
            ancilla_init_error: m.ancilla_init_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectroscopyConfig {
    /// Detuning half-span in MHz (the axis is `detuning/2π`).
    pub detuning_span_mhz: f64,
    pub detuning_points: usize,
    /// Longest drive duration in µs.
    pub max_duration_us: f64,
    pub duration_points: usize,
}

impl Default for SpectroscopyConfig {
    fn default() -> Self {
        Self {
            detuning_span_mhz: 2.0,
            detuning_points: 81,
            max_duration_us: 10.0,
            duration_points: 41,
        }
    }
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    /// `fock`, `coherent` or `binomial`.
    pub encoding: Option<String>,
    /// Coherent-state amplitude.
    pub alpha: Option<f64>,
    pub cutoff: Option<usize>,
    /// Control angles in radians.
    pub thetas: Option<Vec<f64>>,
    /// Number of points of the dense noiseless θ sweep.
    pub sweep_points: Option<usize>,
    /// Switch every noise mechanism off.
    pub noiseless: bool,
    /// Overrides on top of the default noise table.
    pub noise: NoiseConfig,
    pub spam: SpamConfig,
    pub mode: Mode,
    pub shots_per_point: Option<usize>,
    pub grid: GridSpec,
    pub spectroscopy: SpectroscopyConfig,
    /// Duration of the controlled SWAP in µs (default: two beamsplitter
    /// times, a full SWAP at the 50:50 coupling).
    pub cswap_duration_us: Option<f64>,
    /// Error-budget rows; all of them when absent.
    pub budget_rows: Option<Vec<Mechanism>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub mode: Option<Mode>,
}

/// Fully resolved configuration, echoed into every manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub experiment: Experiment,
    pub encoding: EncodingKind,
    pub cutoff: usize,
    pub thetas: Vec<f64>,
    pub sweep_points: usize,
    pub noiseless: bool,
    pub noise: NoiseConfig,
    pub spam: SpamConfig,
    pub mode: Mode,
    pub shots_per_point: usize,
    pub grid: GridSpec,
    pub spectroscopy: SpectroscopyConfig,
    pub cswap_duration_us: f64,
    pub budget_rows: Vec<Mechanism>,
    pub seed: u64,
    pub out: PathBuf,
}

pub const DEFAULT_SEED: u64 = 20_190_212;
pub const DEFAULT_SHOTS: usize = 500;
pub const OUT_ROOT_ENV: &str = "ESWAP_OUT_ROOT";

impl ResolvedConfig {
    pub fn resolve(cfg: ExperimentConfig, over: Overrides, env_root: Option<PathBuf>) -> Result<Self> {
        let experiment = match over.experiment.or(cfg.experiment) {
            Some(e) => e,
            None => bail!("no experiment given (use --experiment or the `experiment` key)"),
        };
        let enc_name = cfg
            .encoding
            .clone()
            .unwrap_or_else(|| experiment.default_encoding().to_string())
            .to_ascii_lowercase();
        let mut encoding: EncodingKind = enc_name.parse()?;
        if let EncodingKind::Coherent { alpha } = &mut encoding {
            *alpha = cfg.alpha.unwrap_or(DEFAULT_ALPHA);
            if !(*alpha > 0.0) || !alpha.is_finite() {
                bail!("alpha must be positive, got {alpha}");
            }
        } else if cfg.alpha.is_some() {
            bail!("`alpha` only applies to the coherent encoding");
        }
        let family = match encoding {
            EncodingKind::Fock => "fock",
            EncodingKind::Coherent { .. } => "coherent",
            EncodingKind::Binomial => "binomial",
        };
        if !experiment.allowed_encodings().contains(&family) {
            bail!(
                "{experiment} does not support the {family} encoding (allowed: {})",
                experiment.allowed_encodings().join(", ")
            );
        }
        let cutoff = cfg.cutoff.unwrap_or(match (experiment, encoding) {
            (Experiment::FockDemo, _) => 4,
            (Experiment::Fredkin, _) => 2,
            (_, EncodingKind::Coherent { alpha }) => coherent_dynamics_cutoff(alpha),
            (Experiment::ErrorBudget, EncodingKind::Binomial) => 10,
            _ => default_cutoff(encoding),
        });
        let min_cutoff = match (experiment, encoding) {
            (Experiment::FockDemo, _) => 4,
            (_, EncodingKind::Binomial) => 5,
            _ => 2,
        };
        if cutoff < min_cutoff {
            bail!("cutoff {cutoff} is below the minimum {min_cutoff} for {experiment}");
        }
        let thetas = cfg
            .thetas
            .clone()
            .unwrap_or_else(|| vec![0.0, FRAC_PI_4, FRAC_PI_2]);
        if thetas.is_empty() || thetas.iter().any(|t| !t.is_finite()) {
            bail!("thetas must be a non-empty list of finite angles");
        }
        let sweep_points = cfg.sweep_points.unwrap_or(17);
        if sweep_points < 3 {
            bail!("sweep_points must be >= 3");
        }
        let shots_per_point = cfg.shots_per_point.unwrap_or(DEFAULT_SHOTS);
        if shots_per_point == 0 {
            bail!("shots_per_point must be positive");
        }
        if cfg.grid.n == 0 || !(cfg.grid.extent > 0.0) {
            bail!("grid needs n >= 1 and a positive extent");
        }
        let sp = &cfg.spectroscopy;
        if sp.detuning_points < 3 || sp.duration_points < 2 || !(sp.max_duration_us > 0.0) {
            bail!("spectroscopy grid needs >= 3 detunings, >= 2 durations and a positive duration");
        }
        cfg.noise.to_model().context("noise overrides")?;
        let cswap_duration_us = cfg.cswap_duration_us.unwrap_or(2.0 * T_BS * 1e6);
        if !(cswap_duration_us > 0.0) {
            bail!("cswap_duration_us must be positive");
        }
        if let Some(f) = cfg.spam.f_encode {
            if !(0.0..=1.0).contains(&f) {
                bail!("spam.f_encode must lie in [0, 1]");
            }
        }
        let out = match over.out.or(cfg.out.clone()) {
            Some(p) => p,
            None => env_root
                .unwrap_or_else(|| PathBuf::from("runs"))
                .join(experiment.name()),
        };
        Ok(Self {
            experiment,
            encoding,
            cutoff,
            thetas,
            sweep_points,
            noiseless: cfg.noiseless,
            noise: cfg.noise,
            spam: cfg.spam,
            mode: over.mode.unwrap_or(cfg.mode),
            shots_per_point,
            grid: cfg.grid,
            spectroscopy: cfg.spectroscopy,
            cswap_duration_us,
            budget_rows: cfg.budget_rows.unwrap_or_else(|| Mechanism::ROWS.to_vec()),
            seed: over.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
            out,
        })
    }

    /// Defaults for `experiment` with nothing overridden.
    pub fn defaults(experiment: Experiment) -> Result<Self> {
        Self::resolve(
            ExperimentConfig::default(),
            Overrides {
                experiment: Some(experiment),
                out: Some(PathBuf::from(".")),
                ..Overrides::default()
            },
            None,
        )
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        if self.noiseless {
            return Ok(NoiseModel::noiseless());
        }
        Ok(self.noise.to_model()?)
    }

    /// SPAM model before the preparation strength is calibrated.
    pub fn spam_readout(&self) -> Option<SpamModel> {
        if !self.spam.enabled {
            return None;
        }
        Some(SpamModel {
            prep_strength: self.spam.prep_strength.unwrap_or(0.0),
            readout_error: self.spam.readout_error,
            parity_contrast: self.spam.parity_contrast,
            ancilla_init_error: self.spam.ancilla_init_error,
        })
    }
}

/// Per-mode cutoff for noisy dynamics of two coherent states: the total
/// photon-number sector must hold `2|α|²` with a small tail.
pub fn coherent_dynamics_cutoff(alpha: f64) -> usize {
    let total = 2.0 * alpha * alpha;
    (total + 5.0 * total.sqrt()).ceil() as usize + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"experiment":"qpt","colour":1}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"noise":{"alice_t1":1}}"#);
        assert!(err.is_err());
    }

    #[test]
    fn resolution_defaults() {
        let r = ResolvedConfig::defaults(Experiment::ErrorBudget).unwrap();
        assert_eq!(r.encoding, EncodingKind::Binomial);
        assert_eq!(r.cutoff, 10);
        assert_eq!(r.thetas.len(), 3);
        let r = ResolvedConfig::defaults(Experiment::CoherentSweep).unwrap();
        assert!(matches!(r.encoding, EncodingKind::Coherent { .. }));
        assert_eq!(r.cutoff, 15);
    }

    #[test]
    fn wrong_encoding_rejected() {
        let cfg = ExperimentConfig {
            encoding: Some("binomial".into()),
            ..ExperimentConfig::default()
        };
        let over = Overrides {
            experiment: Some(Experiment::FockDemo),
            ..Overrides::default()
        };
        assert!(ResolvedConfig::resolve(cfg, over, None).is_err());
    }

    #[test]
    fn out_root_from_environment() {
        let over = Overrides {
            experiment: Some(Experiment::Qpt),
            ..Overrides::default()
        };
        let r = ResolvedConfig::resolve(ExperimentConfig::default(), over, Some("/tmp/x".into())).unwrap();
        assert_eq!(r.out, PathBuf::from("/tmp/x/qpt"));
    }
}
