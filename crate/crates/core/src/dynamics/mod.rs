//! Open-system dynamics: noise parameters, gate Hamiltonians, the
//! Lindblad engine, noisy channels and spectroscopy.

mod channel;
mod hamiltonians;
pub mod lindblad;
mod schedule;
mod sector;
mod spectroscopy;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use channel::{
    choi_matrix, superoperator, AncillaBranch, CavityChannel, Channel, ComposedChannel,
    IdentityChannel, KrausChannel, NoisyCircuitChannel, UnitaryChannel,
};
pub use hamiltonians::{driven_bs_hamiltonian, kerr_unitary, DrivenBeamSplitter};
pub use lindblad::{lindblad_evolve, Liouvillian};
pub use schedule::{ancilla_exposure, PulseEntry, PulseSchedule};
pub use sector::Sector;
pub use spectroscopy::{simulate_cswap_spectroscopy, SpectroscopyMap};

/// Which ancilla state puts the parametric beamsplitter on resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResonantBranch {
    G,
    E,
}

/// Individually switchable error mechanisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mechanisms {
    pub cavity_loss: bool,
    pub cavity_dephasing: bool,
    pub kerr: bool,
    pub ancilla_decay: bool,
    pub ancilla_dephasing: bool,
    pub dispersive: bool,
    pub qc_heating: bool,
    pub cps_miscalibration: bool,
    pub rotation_error: bool,
}

impl Mechanisms {
    pub const ALL: Mechanisms = Mechanisms {
        cavity_loss: true,
        cavity_dephasing: true,
        kerr: true,
        ancilla_decay: true,
        ancilla_dephasing: true,
        dispersive: true,
        qc_heating: true,
        cps_miscalibration: true,
        rotation_error: true,
    };

    pub const NONE: Mechanisms = Mechanisms {
        cavity_loss: false,
        cavity_dephasing: false,
        kerr: false,
        ancilla_decay: false,
        ancilla_dephasing: false,
        dispersive: false,
        qc_heating: false,
        cps_miscalibration: false,
        rotation_error: false,
    };
}

impl Default for Mechanisms {
    fn default() -> Self {
        Self::ALL
    }
}

/// Noise and Hamiltonian parameters in SI units (seconds, rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub t1_alice: f64,
    pub t2_alice: f64,
    pub t1_bob: f64,
    pub t2_bob: f64,
    pub t1_qb: f64,
    pub t2_qb: f64,
    pub kerr_alice: f64,
    pub kerr_bob: f64,
    pub chi_qb_bob: f64,
    pub readout_error_qa: f64,
    pub readout_error_qb: f64,
    /// Probability per beamsplitter that mixing-element heating fully
    /// dephases both cavities in the number basis.
    pub qc_heating: f64,
    /// Fractional error on the CPS phase, π(1 + ε).
    pub cps_phase_error: f64,
    /// Fractional amplitude error on every ancilla rotation.
    pub rotation_error: f64,
    /// Effective time the cavities are exposed to loss and dephasing
    /// during a whole circuit; rates are rescaled by exposure / duration.
    /// `None` uses the raw rates for the full duration.
    pub cavity_exposure_time: Option<f64>,
    /// Effective time self-Kerr acts over a whole circuit; the Kerr
    /// Hamiltonian is rescaled by exposure / duration. `None` applies the
    /// raw Kerr for the full duration.
    pub kerr_exposure_time: Option<f64>,
    pub resonant_branch: ResonantBranch,
    pub mechanisms: Mechanisms,
}

fn khz(x: f64) -> f64 {
    2.0 * PI * x * 1e3
}

fn mhz(x: f64) -> f64 {
    2.0 * PI * x * 1e6
}

impl NoiseModel {
    /// All mechanisms switched off.
    pub fn noiseless() -> Self {
        Self {
            mechanisms: Mechanisms::NONE,
            ..NoiseConfig::default().to_model().expect("default noise config is valid")
        }
    }

    pub fn with_mechanisms(mut self, m: Mechanisms) -> Self {
        self.mechanisms = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let times = [
            ("t1_alice", self.t1_alice),
            ("t2_alice", self.t2_alice),
            ("t1_bob", self.t1_bob),
            ("t2_bob", self.t2_bob),
            ("t1_qb", self.t1_qb),
            ("t2_qb", self.t2_qb),
        ];
        for (name, t) in times {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {t}")));
            }
        }
        for (name, t1, t2) in [
            ("alice", self.t1_alice, self.t2_alice),
            ("bob", self.t1_bob, self.t2_bob),
            ("qb", self.t1_qb, self.t2_qb),
        ] {
            if t2 > 2.0 * t1 * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "{name}: T2 = {t2} exceeds 2 T1 = {}",
                    2.0 * t1
                )));
            }
        }
        for (name, p) in [
            ("readout_error_qa", self.readout_error_qa),
            ("readout_error_qb", self.readout_error_qb),
            ("qc_heating", self.qc_heating),
        ] {
            if !(0.0..=0.5).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 0.5], got {p}"
                )));
            }
        }
        for (name, t) in [
            ("cavity_exposure_time", self.cavity_exposure_time),
            ("kerr_exposure_time", self.kerr_exposure_time),
        ] {
            if let Some(t) = t {
                if !(t >= 0.0) {
                    return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {t}")));
                }
            }
        }
        Ok(())
    }

    /// `1/T1`.
    pub fn gamma(t1: f64) -> f64 {
        1.0 / t1
    }

    /// Pure dephasing `1/T2 − 1/(2 T1)`.
    pub fn gamma_phi(t1: f64, t2: f64) -> f64 {
        (1.0 / t2 - 0.5 / t1).max(0.0)
    }
}

/// Configuration in laboratory units: µs, kHz and MHz (the frequency
/// entries are `X/2π`). Defaults are the midpoints of the measured
/// coherence ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub alice_t1_us: f64,
    pub alice_t2_us: f64,
    pub bob_t1_us: f64,
    pub bob_t2_us: f64,
    pub qb_t1_us: f64,
    pub qb_t2_us: f64,
    pub alice_kerr_khz: f64,
    pub bob_kerr_khz: f64,
    pub chi_qb_bob_mhz: f64,
    pub readout_error_qa: f64,
    pub readout_error_qb: f64,
    pub qc_heating: f64,
    pub cps_phase_error: f64,
    pub rotation_error: f64,
    pub cavity_exposure_us: Option<f64>,
    pub kerr_exposure_us: Option<f64>,
    pub resonant_branch: ResonantBranch,
    pub mechanisms: Mechanisms,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            alice_t1_us: 250.0,
            alice_t2_us: 375.0,
            bob_t1_us: 325.0,
            bob_t2_us: 475.0,
            qb_t1_us: 75.0,
            qb_t2_us: 30.0,
            alice_kerr_khz: 6.0,
            bob_kerr_khz: 4.0,
            chi_qb_bob_mhz: 1.26,
            readout_error_qa: 0.0125,
            readout_error_qb: 0.0125,
            qc_heating: 0.01,
            cps_phase_error: 0.01,
            rotation_error: 0.03,
            cavity_exposure_us: Some(3.9),
            kerr_exposure_us: Some(1.7),
            resonant_branch: ResonantBranch::G,
            mechanisms: Mechanisms::ALL,
        }
    }
}

impl NoiseConfig {
    pub fn to_model(&self) -> Result<NoiseModel> {
        let us = 1e-6;
        let m = NoiseModel {
            t1_alice: self.alice_t1_us * us,
            t2_alice: self.alice_t2_us * us,
            t1_bob: self.bob_t1_us * us,
            t2_bob: self.bob_t2_us * us,
            t1_qb: self.qb_t1_us * us,
            t2_qb: self.qb_t2_us * us,
            kerr_alice: khz(self.alice_kerr_khz),
            kerr_bob: khz(self.bob_kerr_khz),
            chi_qb_bob: mhz(self.chi_qb_bob_mhz),
            readout_error_qa: self.readout_error_qa,
            readout_error_qb: self.readout_error_qb,
            qc_heating: self.qc_heating,
            cps_phase_error: self.cps_phase_error,
            rotation_error: self.rotation_error,
            cavity_exposure_time: self.cavity_exposure_us.map(|t| t * us),
            kerr_exposure_time: self.kerr_exposure_us.map(|t| t * us),
            resonant_branch: self.resonant_branch,
            mechanisms: self.mechanisms,
        };
        m.validate()?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rates() {
        let m = NoiseConfig::default().to_model().unwrap();
        assert!((NoiseModel::gamma(m.t1_qb) - 1.0 / 75e-6).abs() < 1e-6);
        let gphi = NoiseModel::gamma_phi(m.t1_qb, m.t2_qb);
        assert!((gphi - (1.0 / 30e-6 - 0.5 / 75e-6)).abs() < 1e-6);
        assert!((m.chi_qb_bob / (2.0 * PI) - 1.26e6).abs() < 1e-6);
    }

    #[test]
    fn t2_above_twice_t1_rejected() {
        let cfg = NoiseConfig {
            qb_t2_us: 200.0,
            ..NoiseConfig::default()
        };
        assert!(cfg.to_model().is_err());
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let r: std::result::Result<NoiseConfig, _> =
            serde_json::from_str(r#"{"alice_t1_us": 200, "bogus": 1}"#);
        assert!(r.is_err());
    }
}
