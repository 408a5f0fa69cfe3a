//! Monte-Carlo ergodic capacity `E[log2 det(I + (gamma/Nt) H H^H)]` and its
//! inversion to the SNR at which capacity equals a target rate.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;

use crate::channel::{db_to_linear, sample_channel};
use crate::error::{Error, Result};
use crate::Complex;

/// Search range for [`snr_for_rate`], in dB.
pub const SNR_BRACKET_DB: (f64, f64) = (-20.0, 60.0);

/// Default trial count for a single capacity point.
pub const DEFAULT_TRIALS: usize = 100_000;
/// Default trial count per bisection step.
pub const DEFAULT_SEARCH_TRIALS: usize = 10_000;
pub const DEFAULT_TOL_DB: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    pub gamma_db: f64,
    /// Sample mean in bps/Hz.
    pub mean_bps_hz: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    pub trials: usize,
}

/// `log2 det(I + a G)` for Hermitian PSD `G`, via Cholesky.
fn log2_det_shifted(gram: &DMatrix<Complex>, a: f64) -> f64 {
    let n = gram.nrows();
    let mut m = gram * Complex::new(a, 0.0);
    for i in 0..n {
        m[(i, i)] += Complex::new(1.0, 0.0);
    }
    // I + aG has every eigenvalue >= 1, so the factorization always exists
    let l = m.cholesky().expect("I + aG is positive definite").unpack();
    let mut acc = 0.0;
    for i in 0..n {
        acc += libm::log(l[(i, i)].re);
    }
    2.0 * acc / core::f64::consts::LN_2
}

/// Running mean and variance (Welford).
#[derive(Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        libm::sqrt(self.m2 / (self.n - 1) as f64 / self.n as f64)
    }
}

/// Fresh-sample estimate of the ergodic capacity at one SNR.
pub fn ergodic_capacity<R: Rng + ?Sized>(
    nt: usize,
    nr: usize,
    gamma_db: f64,
    trials: usize,
    rng: &mut R,
) -> Result<CapacityEstimate> {
    if trials == 0 || nt == 0 || nr == 0 {
        return Err(Error::Dimension(alloc::format!("nt={nt} nr={nr} trials={trials}")));
    }
    if !gamma_db.is_finite() {
        return Err(Error::NonFinite("SNR"));
    }
    let a = db_to_linear(gamma_db) / nt as f64;
    let mut mom = Moments::default();
    for _ in 0..trials {
        let h = sample_channel(nt, nr, rng);
        mom.push(log2_det_shifted(&(&h * h.adjoint()), a));
    }
    Ok(CapacityEstimate { gamma_db, mean_bps_hz: mom.mean, stderr: mom.stderr(), trials })
}

/// Fixed set of channel draws reused across SNR evaluations (common random
/// numbers), so the estimate is a deterministic, monotone function of SNR.
pub struct CapacityEstimator {
    nt: usize,
    grams: Vec<DMatrix<Complex>>,
}

impl CapacityEstimator {
    pub fn new<R: Rng + ?Sized>(nt: usize, nr: usize, trials: usize, rng: &mut R) -> Result<Self> {
        if trials == 0 || nt == 0 || nr == 0 {
            return Err(Error::Dimension(alloc::format!("nt={nt} nr={nr} trials={trials}")));
        }
        let grams = (0..trials)
            .map(|_| {
                let h = sample_channel(nt, nr, rng);
                &h * h.adjoint()
            })
            .collect();
        Ok(CapacityEstimator { nt, grams })
    }

    pub fn trials(&self) -> usize {
        self.grams.len()
    }

    pub fn estimate(&self, gamma_db: f64) -> CapacityEstimate {
        let a = db_to_linear(gamma_db) / self.nt as f64;
        let mut mom = Moments::default();
        for g in &self.grams {
            mom.push(log2_det_shifted(g, a));
        }
        CapacityEstimate { gamma_db, mean_bps_hz: mom.mean, stderr: mom.stderr(), trials: self.grams.len() }
    }

    /// Bisection for the SNR where the estimated capacity reaches `target`;
    /// stops once the bracket is narrower than `tol_db`. Targets already met
    /// at the bottom of [`SNR_BRACKET_DB`] return its lower edge; targets not
    /// met at the top are an error.
    pub fn snr_for_rate(&self, target_bps_hz: f64, tol_db: f64) -> Result<f64> {
        let (mut lo, mut hi) = SNR_BRACKET_DB;
        if !(target_bps_hz > 0.0) || !(tol_db > 0.0) {
            return Err(Error::NoBracket { target: target_bps_hz, lo_db: lo, hi_db: hi });
        }
        if self.estimate(hi).mean_bps_hz < target_bps_hz {
            return Err(Error::NoBracket { target: target_bps_hz, lo_db: lo, hi_db: hi });
        }
        if self.estimate(lo).mean_bps_hz >= target_bps_hz {
            return Ok(lo);
        }
        while hi - lo > tol_db {
            let mid = 0.5 * (lo + hi);
            if self.estimate(mid).mean_bps_hz < target_bps_hz {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// SNR (dB) at which the ergodic capacity of an `nt x nr` channel equals
/// `target_bps_hz`, using `trials` common channel draws.
pub fn snr_for_rate<R: Rng + ?Sized>(
    nt: usize,
    nr: usize,
    target_bps_hz: f64,
    tol_db: f64,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    CapacityEstimator::new(nt, nr, trials, rng)?.snr_for_rate(target_bps_hz, tol_db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::substream;

    #[test]
    fn vanishing_snr_gives_vanishing_capacity() {
        let mut rng = substream(1, 0, 0);
        let c = ergodic_capacity(4, 4, -60.0, 1000, &mut rng).unwrap();
        assert!(c.mean_bps_hz >= 0.0 && c.mean_bps_hz < 1e-3);
        assert!(c.stderr >= 0.0);
    }

    #[test]
    fn scalar_channel_matches_quadrature() {
        // E[log2(1 + 10 X)], X ~ Exp(1), by Simpson's rule on [0, 60]
        let f = |x: f64| (1.0 + 10.0 * x).log2() * (-x).exp();
        let (a, b, n) = (0.0, 60.0, 600_000);
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = s * h / 3.0;
        let mut rng = substream(2, 0, 0);
        let c = ergodic_capacity(1, 1, 10.0, 100_000, &mut rng).unwrap();
        assert!((c.mean_bps_hz - oracle).abs() < 3.0 * c.stderr, "{} vs {oracle}", c.mean_bps_hz);
    }

    #[test]
    fn monotone_in_snr_with_common_draws() {
        let mut rng = substream(3, 0, 0);
        let est = CapacityEstimator::new(4, 4, 2000, &mut rng).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for g in 0..=30 {
            let c = est.estimate(g as f64).mean_bps_hz;
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn capacity_grows_with_antenna_count() {
        let mut prev = 0.0;
        for k in [1, 2, 4, 8] {
            let mut rng = substream(4, k as u64, 0);
            let c = ergodic_capacity(k, k, 10.0, 4000, &mut rng).unwrap().mean_bps_hz;
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn bisection_hits_target_rate() {
        let mut rng = substream(5, 0, 0);
        let est = CapacityEstimator::new(4, 4, 2000, &mut rng).unwrap();
        let g = est.snr_for_rate(8.0, 0.01).unwrap();
        assert!((est.estimate(g).mean_bps_hz - 8.0).abs() < 0.02);
        // a tiny target lands at the bottom of the bracket
        let g0 = est.snr_for_rate(1e-9, 0.05).unwrap();
        assert!(g0 < SNR_BRACKET_DB.0 + 0.1);
        assert!(est.snr_for_rate(1e6, 0.05).is_err());
        assert!(est.snr_for_rate(-1.0, 0.05).is_err());
    }

    #[test]
    fn refinement_is_self_consistent() {
        let g1 = snr_for_rate(4, 4, 8.0, 0.05, 5_000, &mut substream(6, 0, 0)).unwrap();
        let g2 = snr_for_rate(4, 4, 8.0, 0.05, 10_000, &mut substream(6, 1, 0)).unwrap();
        assert!((g1 - g2).abs() <= 0.05, "{g1} vs {g2}");
    }
}
