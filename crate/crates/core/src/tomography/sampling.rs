use std::path::Path;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{joint_expectation, GridPoint, WignerGrid, WignerNorm};
use crate::error::{Error, Result};
use crate::fockspace::linalg::CMat;
use crate::fockspace::{displaced_parity_matrix, DensityMatrix, ModeLabel};

/// One single-shot joint readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shot {
    pub point: usize,
    pub parity_a: i8,
    pub parity_b: i8,
}

impl Shot {
    pub fn joint(&self) -> i8 {
        self.parity_a * self.parity_b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub points: Vec<GridPoint>,
    pub shots: Vec<Shot>,
    pub seed: u64,
    pub readout_error: [f64; 2],
}

/// Random stream for one grid point, independent of evaluation order.
fn point_rng(seed: u64, point: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(point as u64);
    rng
}

/// Draws `n_shots` joint parity readouts per point from the exact
/// distribution of the two commuting displaced-parity observables, then
/// flips each outcome independently with the readout error of its
/// ancilla.
pub fn sample_parity_shots(
    rho: &DensityMatrix,
    points: &[GridPoint],
    n_shots: usize,
    readout_error: [f64; 2],
    seed: Option<u64>,
) -> Result<MeasurementRecord> {
    let seed = seed.ok_or(Error::SeedRequired)?;
    if n_shots == 0 {
        return Err(Error::InvalidParameter("need at least one shot".into()));
    }
    if readout_error.iter().any(|e| !(0.0..=0.5).contains(e)) {
        return Err(Error::InvalidParameter(format!(
            "readout errors must lie in [0, 0.5], got {readout_error:?}"
        )));
    }
    let labels: Vec<ModeLabel> = rho.space.iter().map(|m| m.label).collect();
    if labels != [ModeLabel::Alice, ModeLabel::Bob] {
        return Err(Error::SpaceMismatch("shot sampling needs an (Alice, Bob) state".into()));
    }
    let (ca, cb) = (rho.space[0].cutoff, rho.space[1].cutoff);
    let id = |c: usize| CMat::identity(c, c);
    let mut shots = Vec::with_capacity(points.len() * n_shots);
    for (k, p) in points.iter().enumerate() {
        let b2 = p.beta2.ok_or_else(|| {
            Error::InvalidParameter("shot sampling needs joint points".into())
        })?;
        let pa = displaced_parity_matrix(p.beta1, ca);
        let pb = displaced_parity_matrix(b2, cb);
        let tr = rho.trace();
        let ea = joint_expectation(&pa, &id(cb), &rho.matrix) / tr;
        let eb = joint_expectation(&id(ca), &pb, &rho.matrix) / tr;
        let eab = joint_expectation(&pa, &pb, &rho.matrix) / tr;
        // outcome order (+,+), (+,−), (−,+), (−,−)
        let probs = [
            (1.0 + ea + eb + eab) / 4.0,
            (1.0 + ea - eb - eab) / 4.0,
            (1.0 - ea + eb - eab) / 4.0,
            (1.0 - ea - eb + eab) / 4.0,
        ]
        .map(|q: f64| q.max(0.0));
        let dist = WeightedIndex::new(probs)
            .map_err(|e| Error::InvalidParameter(format!("parity distribution: {e}")))?;
        let mut rng = point_rng(seed, k);
        for _ in 0..n_shots {
            let o = dist.sample(&mut rng);
            let mut a: i8 = if o < 2 { 1 } else { -1 };
            let mut b: i8 = if o % 2 == 0 { 1 } else { -1 };
            if rng.random::<f64>() < readout_error[0] {
                a = -a;
            }
            if rng.random::<f64>() < readout_error[1] {
                b = -b;
            }
            shots.push(Shot {
                point: k,
                parity_a: a,
                parity_b: b,
            });
        }
    }
    Ok(MeasurementRecord {
        points: points.to_vec(),
        shots,
        seed,
        readout_error,
    })
}

impl MeasurementRecord {
    /// Mean joint parity and its standard error per point.
    pub fn joint_means(&self) -> Vec<(f64, f64)> {
        let n = self.points.len();
        let mut sum = vec![0.0; n];
        let mut count = vec![0usize; n];
        for s in &self.shots {
            sum[s.point] += s.joint() as f64;
            count[s.point] += 1;
        }
        (0..n)
            .map(|k| {
                let c = count[k].max(1) as f64;
                let m = sum[k] / c;
                (m, ((1.0 - m * m).max(0.0) / c).sqrt())
            })
            .collect()
    }

    /// Shot-averaged joint Wigner grid.
    pub fn to_grid(&self, norm: WignerNorm) -> WignerGrid {
        let counts = self.shots.iter().filter(|s| s.point == 0).count();
        WignerGrid {
            points: self.points.clone(),
            values: self
                .joint_means()
                .into_iter()
                .map(|(m, _)| m * norm.factor(2))
                .collect(),
            shots_per_point: counts,
            normalization: norm,
        }
    }

    /// Shot rows as CSV; the points and seed go to a JSON sidecar.
    pub fn write(&self, csv_path: &Path, json_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(csv_path)?;
        for s in &self.shots {
            w.serialize(s)?;
        }
        w.flush()?;
        let meta = RecordMeta {
            points: self.points.clone(),
            seed: self.seed,
            readout_error: self.readout_error,
        };
        std::fs::write(json_path, serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    pub fn read(csv_path: &Path, json_path: &Path) -> Result<Self> {
        let meta: RecordMeta = serde_json::from_str(&std::fs::read_to_string(json_path)?)?;
        let mut r = csv::Reader::from_path(csv_path)?;
        let shots = r.deserialize().collect::<std::result::Result<Vec<Shot>, _>>()?;
        Ok(Self {
            points: meta.points,
            shots,
            seed: meta.seed,
            readout_error: meta.readout_error,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordMeta {
    points: Vec<GridPoint>,
    seed: u64,
    readout_error: [f64; 2],
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::linalg::C64;
    use crate::fockspace::{tensor_states, fock_state, ModeSpace};

    fn vacuum() -> DensityMatrix {
        let a = ModeSpace::alice(4).unwrap();
        let b = ModeSpace::bob(4).unwrap();
        tensor_states(&[fock_state(a, 0).unwrap(), fock_state(b, 0).unwrap()])
            .unwrap()
            .to_density()
    }

    #[test]
    fn seed_is_required() {
        let pts = [GridPoint::joint(C64::new(0.0, 0.0), C64::new(0.0, 0.0))];
        assert!(matches!(
            sample_parity_shots(&vacuum(), &pts, 10, [0.0, 0.0], None),
            Err(Error::SeedRequired)
        ));
    }

    #[test]
    fn vacuum_at_origin_is_always_even() {
        let pts = [GridPoint::joint(C64::new(0.0, 0.0), C64::new(0.0, 0.0))];
        let r = sample_parity_shots(&vacuum(), &pts, 200, [0.0, 0.0], Some(3)).unwrap();
        assert!(r.shots.iter().all(|s| s.parity_a == 1 && s.parity_b == 1));
    }

    #[test]
    fn same_seed_same_record_and_file_round_trip() {
        let pts = WignerGrid::product(&[C64::new(0.3, 0.1)], &[C64::new(-0.2, 0.4)]);
        let a = sample_parity_shots(&vacuum(), &pts, 50, [0.02, 0.01], Some(9)).unwrap();
        let b = sample_parity_shots(&vacuum(), &pts, 50, [0.02, 0.01], Some(9)).unwrap();
        assert_eq!(a, b);
        let dir = tempfile::tempdir().unwrap();
        let (c, j) = (dir.path().join("s.csv"), dir.path().join("s.json"));
        a.write(&c, &j).unwrap();
        assert_eq!(MeasurementRecord::read(&c, &j).unwrap(), a);
    }
}
