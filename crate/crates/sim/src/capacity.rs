//! CSV front end for the ergodic capacity estimator.

use std::io::Write;

use nbmimo_core::capacity::{ergodic_capacity, CapacityEstimate, CapacityEstimator};
use nbmimo_core::channel::substream;
use serde::Serialize;

use crate::error::Result;

#[derive(Serialize)]
struct Row {
    gamma_db: f64,
    mean: f64,
    stderr: f64,
}

/// Independent estimates at each SNR; point `i` draws from substream `i`.
pub fn capacity_points(nt: usize, nr: usize, snrs_db: &[f64], trials: usize, seed: u64) -> Result<Vec<CapacityEstimate>> {
    snrs_db
        .iter()
        .enumerate()
        .map(|(i, &g)| Ok(ergodic_capacity(nt, nr, g, trials, &mut substream(seed, i as u64, 0))?))
        .collect()
}

/// SNR reaching `target_bps_hz`, with the capacity estimate there. Both come
/// from the same `trials` channel draws.
pub fn capacity_for_rate(
    nt: usize,
    nr: usize,
    target_bps_hz: f64,
    tol_db: f64,
    trials: usize,
    seed: u64,
) -> Result<CapacityEstimate> {
    let est = CapacityEstimator::new(nt, nr, trials, &mut substream(seed, 0, 0))?;
    let g = est.snr_for_rate(target_bps_hz, tol_db)?;
    Ok(est.estimate(g))
}

pub fn write_capacity_csv<W: Write>(rows: &[CapacityEstimate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(Row { gamma_db: r.gamma_db, mean: r.mean_bps_hz, stderr: r.stderr })?;
    }
    w.flush()?;
    Ok(())
}
