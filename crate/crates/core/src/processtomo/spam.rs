use serde::{Deserialize, Serialize};

use crate::dynamics::Channel;
use crate::encodings::LogicalEncoding;
use crate::error::{Error, Result};
use crate::fockspace::linalg::{CMat, C64};
use crate::fockspace::{check_canonical, ModeSpace};

use super::qpt::{run_qpt, Operation, QptMode, QptSetup};

/// State-preparation and measurement errors.
///
/// Preparation is a per-cavity amplitude-damping channel with damping
/// probability `prep_strength` followed by number-basis dephasing
/// `ρ_mn → ρ_mn e^{−s (m − n)²}` with the same strength. Measurement
/// multiplies every joint parity by the product of the per-ancilla
/// readout contrasts `1 − 2e` and the per-mode parity-mapping contrasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpamModel {
    pub prep_strength: f64,
    pub readout_error: [f64; 2],
    pub parity_contrast: [f64; 2],
    /// Thermal excited population of the ancilla before each gate sequence.
    pub ancilla_init_error: f64,
}

impl Default for SpamModel {
    fn default() -> Self {
        Self {
            prep_strength: 0.0,
            readout_error: [0.0125, 0.0125],
            parity_contrast: [0.975, 0.975],
            ancilla_init_error: 0.005,
        }
    }
}

impl SpamModel {
    pub fn ideal() -> Self {
        Self {
            prep_strength: 0.0,
            readout_error: [0.0, 0.0],
            parity_contrast: [1.0, 1.0],
            ancilla_init_error: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.prep_strength) {
            return Err(Error::InvalidParameter(format!(
                "prep_strength must lie in [0, 1], got {}",
                self.prep_strength
            )));
        }
        for e in self.readout_error.iter().chain([&self.ancilla_init_error]) {
            if !(0.0..=0.5).contains(e) {
                return Err(Error::InvalidParameter(format!(
                    "error probabilities must lie in [0, 0.5], got {e}"
                )));
            }
        }
        if self.parity_contrast.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidParameter("parity contrast must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Contrast of one cavity's parity measurement.
    pub fn mode_contrast(&self, k: usize) -> f64 {
        (1.0 - 2.0 * self.readout_error[k]) * self.parity_contrast[k]
    }

    /// Scale factor on a joint parity.
    pub fn joint_contrast(&self) -> f64 {
        self.mode_contrast(0) * self.mode_contrast(1)
    }

    /// Symmetric flip probabilities with the same per-mode contrast, for
    /// shot sampling.
    pub fn effective_flip(&self) -> [f64; 2] {
        [0, 1].map(|k| 0.5 * (1.0 - self.mode_contrast(k)))
    }

    pub fn ancilla_in(&self) -> CMat {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = C64::new(1.0 - self.ancilla_init_error, 0.0);
        m[(1, 1)] = C64::new(self.ancilla_init_error, 0.0);
        m
    }

    pub fn prep_channel(&self, space: &[ModeSpace]) -> Result<PrepNoiseChannel> {
        PrepNoiseChannel::new(space.to_vec(), self.prep_strength)
    }
}

/// Per-cavity amplitude damping plus number dephasing on Alice ⊗ Bob.
#[derive(Debug, Clone)]
pub struct PrepNoiseChannel {
    space: Vec<ModeSpace>,
    strength: f64,
    kraus: Vec<Vec<CMat>>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn damping_kraus(cutoff: usize, gamma: f64) -> Vec<CMat> {
    (0..cutoff)
        .map(|k| {
            let mut m = CMat::zeros(cutoff, cutoff);
            for n in k..cutoff {
                let amp = binomial(n, k).sqrt()
                    * (1.0 - gamma).powf(0.5 * (n - k) as f64)
                    * gamma.powf(0.5 * k as f64);
                m[(n - k, n)] = C64::new(amp, 0.0);
            }
            m
        })
        .filter(|m| m.iter().any(|z| z.norm() > 0.0))
        .collect()
}

impl PrepNoiseChannel {
    pub fn new(space: Vec<ModeSpace>, strength: f64) -> Result<Self> {
        check_canonical(&space)?;
        if space.len() != 2 {
            return Err(Error::SpaceMismatch("prep noise acts on two cavities".into()));
        }
        if !(0.0..=1.0).contains(&strength) {
            return Err(Error::InvalidParameter(format!("prep strength {strength}")));
        }
        let kraus = space.iter().map(|m| damping_kraus(m.cutoff, strength)).collect();
        Ok(Self {
            space,
            strength,
            kraus,
        })
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }
}

impl Channel for PrepNoiseChannel {
    fn space(&self) -> &[ModeSpace] {
        &self.space
    }

    fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
        let (ca, cb) = (self.space[0].cutoff, self.space[1].cutoff);
        if m.nrows() != ca * cb || m.ncols() != ca * cb {
            return Err(Error::SpaceMismatch("prep noise input dimension".into()));
        }
        if self.strength == 0.0 {
            return Ok(m.clone());
        }
        let id_a = CMat::identity(ca, ca);
        let id_b = CMat::identity(cb, cb);
        let mut rho = m.clone();
        for (k, ops) in self.kraus.iter().enumerate() {
            let mut out = CMat::zeros(rho.nrows(), rho.ncols());
            for op in ops {
                let full = if k == 0 {
                    op.kronecker(&id_b)
                } else {
                    id_a.kronecker(op)
                };
                out += &full * &rho * full.adjoint();
            }
            rho = out;
        }
        let s = self.strength;
        for c in 0..rho.ncols() {
            let (ma, mb) = (c / cb, c % cb);
            for r in 0..rho.nrows() {
                let (na, nb) = (r / cb, r % cb);
                let da = na as f64 - ma as f64;
                let db = nb as f64 - mb as f64;
                rho[(r, c)] *= (-s * (da * da + db * db)).exp();
            }
        }
        Ok(rho)
    }
}

/// Bisection for the preparation strength at which the encode-only
/// process fidelity equals `target`, with the readout part of `spam`
/// held fixed. Returns the calibrated model and the fidelity reached.
pub fn calibrate_prep(enc: &LogicalEncoding, spam: &SpamModel, target: f64) -> Result<(SpamModel, f64)> {
    let fid = |s: f64| -> Result<f64> {
        let model = SpamModel {
            prep_strength: s,
            ..spam.clone()
        };
        let setup = QptSetup {
            spam: Some(model),
            ..QptSetup::new(enc.clone())
        };
        Ok(run_qpt(&setup, Operation::EncodeOnly, QptMode::Exact)?.fidelity_chi)
    };
    let f0 = fid(0.0)?;
    if target > f0 {
        return Err(Error::InvalidParameter(format!(
            "F_encode target {target} exceeds the readout-limited {f0:.4}"
        )));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    if fid(hi)? > target {
        return Err(Error::InvalidParameter(format!(
            "F_encode target {target} is below the fully damped value"
        )));
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if fid(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-7 {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    let model = SpamModel {
        prep_strength: s,
        ..spam.clone()
    };
    Ok((model, fid(s)?))
}
