//! Conditional-resonance spectroscopy of the driven beamsplitter.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lindblad::Liouvillian;
use super::schedule::{collapse_ops, FullOps};
use super::sector::Sector;
use super::{NoiseModel, ResonantBranch};
use crate::circuits::T_BS;
use crate::error::{Error, Result};
use crate::fockspace::linalg::{CMat, C64};
use crate::fockspace::{flatten, ModeSpace};

/// Transfer probability `|0,1⟩ → |1,0⟩` over (detuning, duration), one
/// map per ancilla preparation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopyMap {
    /// Drive detunings in rad/s.
    pub detunings: Vec<f64>,
    /// Drive durations in seconds.
    pub durations: Vec<f64>,
    /// Coupling used, rad/s.
    pub g: f64,
    /// `transfer_g[i][j]` at `detunings[i]`, `durations[j]`, ancilla in |g⟩.
    pub transfer_g: Vec<Vec<f64>>,
    pub transfer_e: Vec<Vec<f64>>,
}

/// Index of the duration closest to a full SWAP, `π/(2g)`.
fn swap_column(m: &SpectroscopyMap) -> usize {
    let t_swap = PI / (2.0 * m.g);
    let mut best = 0;
    for (j, &t) in m.durations.iter().enumerate() {
        if (t - t_swap).abs() < (m.durations[best] - t_swap).abs() {
            best = j;
        }
    }
    best
}

/// Peak location with a parabola through the maximum and its neighbours.
fn refine_peak(x: &[f64], y: &[f64]) -> Result<f64> {
    let k = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::InvalidParameter("empty spectrum".into()))?;
    if k == 0 || k + 1 == y.len() {
        return Ok(x[k]);
    }
    let (x0, x1, x2) = (x[k - 1], x[k], x[k + 1]);
    let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
    let den = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
    if a >= 0.0 {
        return Ok(x1);
    }
    Ok((-b / (2.0 * a)).clamp(x0, x2))
}

impl SpectroscopyMap {
    /// Transfer spectra at the SWAP duration, `(ground, excited)`.
    pub fn swap_spectra(&self) -> (Vec<f64>, Vec<f64>) {
        let j = swap_column(self);
        (
            self.transfer_g.iter().map(|r| r[j]).collect(),
            self.transfer_e.iter().map(|r| r[j]).collect(),
        )
    }

    /// Resonance centres `(ground, excited)` in rad/s.
    pub fn resonance_centres(&self) -> Result<(f64, f64)> {
        let (g, e) = self.swap_spectra();
        Ok((
            refine_peak(&self.detunings, &g)?,
            refine_peak(&self.detunings, &e)?,
        ))
    }

    /// Distance between the two resonances in rad/s.
    pub fn separation(&self) -> Result<f64> {
        let (g, e) = self.resonance_centres()?;
        Ok((e - g).abs())
    }

    /// Largest transfer seen in either branch.
    pub fn max_transfer(&self) -> f64 {
        self.transfer_g
            .iter()
            .chain(&self.transfer_e)
            .flatten()
            .fold(0.0, |a, &b| a.max(b))
    }
}

/// Drives `g(ab† + a†b)` for each detuning and duration with the ancilla
/// prepared in |g⟩ and in |e⟩. The drive coupling is set for a full SWAP
/// in one beamsplitter time. The resonant branch of `noise` sits at zero
/// detuning; the other is shifted by χ.
pub fn simulate_cswap_spectroscopy(
    detunings: &[f64],
    durations: &[f64],
    noise: &NoiseModel,
) -> Result<SpectroscopyMap> {
    if detunings.is_empty() || durations.is_empty() {
        return Err(Error::InvalidParameter("spectroscopy grids must be non-empty".into()));
    }
    if durations.iter().any(|&t| !(t >= 0.0)) || detunings.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidParameter("bad spectroscopy grid value".into()));
    }
    let mut times: Vec<f64> = durations.to_vec();
    times.sort_by(f64::total_cmp);
    let spaces = vec![
        ModeSpace::ancilla(),
        ModeSpace::alice(2)?,
        ModeSpace::bob(2)?,
    ];
    let ops = FullOps::new(&spaces)?;
    let sector = Sector::new(&spaces, 1);
    let g = PI / (2.0 * T_BS);
    let coupling = (&ops.a * ops.b.adjoint()).map(|z| z * g);
    let coupling = &coupling + coupling.adjoint();
    let shifted = match noise.resonant_branch {
        ResonantBranch::G => ops.p_e.clone(),
        ResonantBranch::E => &ops.id - &ops.p_e,
    };
    let sign = match noise.resonant_branch {
        ResonantBranch::G => -1.0,
        ResonantBranch::E => 1.0,
    };
    let collapse: Vec<CMat> = collapse_ops(&ops, noise, 1.0)
        .iter()
        .map(|l| sector.restrict_op(l))
        .collect();
    let probe = |occ: &[usize]| {
        let full = flatten(occ, &spaces);
        sector
            .indices()
            .iter()
            .position(|&i| i == full)
            .expect("state lies in the one-photon sector")
    };
    let target = [probe(&[0, 1, 0]), probe(&[1, 1, 0])];
    let starts = [probe(&[0, 0, 1]), probe(&[1, 0, 1])];
    let mut maps = [Vec::new(), Vec::new()];
    for &delta in detunings {
        let h = &coupling + (&ops.n_b * C64::new(delta, 0.0))
            + (&shifted * &ops.n_b).map(|z| z * sign * noise.chi_qb_bob);
        let liou = Liouvillian::new(&sector.restrict_op(&h), &collapse)?;
        let t_max = *times.last().expect("non-empty");
        let dt = liou.default_dt(t_max.max(T_BS));
        for (branch, map) in maps.iter_mut().enumerate() {
            let d = sector.dim();
            let mut rho = CMat::zeros(d, d);
            rho[(starts[branch], starts[branch])] = C64::new(1.0, 0.0);
            let record = liou.evolve_record(&rho, &times, dt)?;
            let row: Vec<f64> = durations
                .iter()
                .map(|&t| {
                    let k = times.iter().position(|&s| s == t).expect("sorted copy");
                    target.iter().map(|&i| record[k][(i, i)].re).sum()
                })
                .collect();
            map.push(row);
        }
    }
    let [transfer_g, transfer_e] = maps;
    Ok(SpectroscopyMap {
        detunings: detunings.to_vec(),
        durations: durations.to_vec(),
        g,
        transfer_g,
        transfer_e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_duration_has_no_transfer() {
        let noise = NoiseModel::noiseless();
        let m = simulate_cswap_spectroscopy(&[0.0, 1e6], &[0.0, T_BS], &noise).unwrap();
        assert!(m.transfer_g.iter().all(|r| r[0].abs() < 1e-12));
        assert!(m.transfer_g[0][1] > 0.999);
    }

    #[test]
    fn parabola_recovers_vertex() {
        let x: Vec<f64> = (0..11).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - (v - 0.437).powi(2)).collect();
        assert!((refine_peak(&x, &y).unwrap() - 0.437).abs() < 1e-12);
    }
}
