//! Soft-output linear MMSE detection.
//!
//! Each antenna stream is estimated with the MMSE filter
//! `W_k = ((N0 / (Es/Nt)) I + H H^H)^-1 H_k`, the estimate is modelled as
//! `s_hat_k = mu_k s_k + z_k` with `mu_k = W_k^H H_k` and
//! `Var z_k = (Es/Nt)(mu_k - mu_k^2)`, and the resulting per-antenna
//! constellation likelihoods are multiplied into symbol priors over GF(2^m).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::decoder::{normalize_with_floor, ProbVector};
use crate::error::{Error, Result};
use crate::modem::{Constellation, MappingPlan};
use crate::Complex;

/// Bounds applied to `mu_k` before forming the residual variance.
pub const MU_CLAMP: f64 = 1e-12;

/// MMSE filters; column `k` is `W_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MmseWeights {
    pub w: DMatrix<Complex>,
}

/// Equivalent scalar AWGN model of each filtered stream.
#[derive(Debug, Clone, PartialEq)]
pub struct EqAwgnParams {
    pub mu: Vec<f64>,
    pub eps_sq: Vec<f64>,
}

/// Solves `((N0 / (Es/Nt)) I + H H^H) W = H` with one LU factorization
/// shared by all columns.
pub fn compute_weights(h: &DMatrix<Complex>, n0: f64, es: f64, nt: usize) -> Result<MmseWeights> {
    if h.ncols() != nt {
        return Err(Error::Dimension(format!("H has {} columns, N_t = {nt}", h.ncols())));
    }
    if !(n0.is_finite() && n0 >= 0.0 && es.is_finite() && es > 0.0) {
        return Err(Error::NonFinite("noise density or symbol energy"));
    }
    if h.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::NonFinite("channel matrix"));
    }
    let reg = n0 / (es / nt as f64);
    let mut a = h * h.adjoint();
    for i in 0..a.nrows() {
        a[(i, i)] += Complex::new(reg, 0.0);
    }
    let w = a.lu().solve(h).ok_or(Error::NonFinite("MMSE matrix is singular"))?;
    Ok(MmseWeights { w })
}

/// `s_hat = W^H y`; entry `k` is `W_k^H y`.
pub fn detect(weights: &MmseWeights, y: &DVector<Complex>) -> Result<DVector<Complex>> {
    if weights.w.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "weights expect {} receive antennas, y has {}",
            weights.w.nrows(),
            y.len()
        )));
    }
    Ok(weights.w.ad_mul(y))
}

pub fn eq_awgn_params(weights: &MmseWeights, h: &DMatrix<Complex>, es: f64, nt: usize) -> Result<EqAwgnParams> {
    if weights.w.shape() != h.shape() || h.ncols() != nt {
        return Err(Error::Dimension(format!(
            "W is {:?}, H is {:?}, N_t = {nt}",
            weights.w.shape(),
            h.shape()
        )));
    }
    let per_antenna = es / nt as f64;
    let mut mu = Vec::with_capacity(nt);
    let mut eps_sq = Vec::with_capacity(nt);
    for k in 0..nt {
        let m = weights.w.column(k).dotc(&h.column(k)).re.clamp(MU_CLAMP, 1.0 - MU_CLAMP);
        mu.push(m);
        eps_sq.push(per_antenna * (m - m * m));
    }
    Ok(EqAwgnParams { mu, eps_sq })
}

/// `Pr(s_hat | s) ∝ exp(-|s_hat - mu s|^2 / eps^2)` over the constellation,
/// normalized to sum to one. Written into `out`, indexed by label.
pub fn likelihoods_into(s_hat: Complex, mu: f64, eps_sq: f64, constellation: &Constellation, out: &mut [f64]) {
    debug_assert_eq!(out.len(), constellation.order());
    let mut best = f64::NEG_INFINITY;
    for (o, p) in out.iter_mut().zip(constellation.points()) {
        *o = -(s_hat - p * mu).norm_sqr() / eps_sq;
        best = best.max(*o);
    }
    let mut sum = 0.0;
    for o in out.iter_mut() {
        *o = libm::exp(*o - best);
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
}

pub fn likelihoods(s_hat: Complex, mu: f64, eps_sq: f64, constellation: &Constellation) -> Vec<f64> {
    let mut out = vec![0.0; constellation.order()];
    likelihoods_into(s_hat, mu, eps_sq, constellation, &mut out);
    out
}

/// Prior over GF(2^m) for one coded symbol from the likelihood tables of
/// its `q` antennas: `p(x) = prod_i Pr(s_hat_{k+i} | label_i(x))`.
/// Costs `2^m (q - 1)` multiplications before normalization.
pub fn gf_priors(tables: &[&[f64]], plan: &MappingPlan) -> Result<ProbVector> {
    if tables.len() != plan.q {
        return Err(Error::Length { expected: plan.q, found: tables.len() });
    }
    let mask = (1usize << plan.p) - 1;
    if let Some(t) = tables.iter().find(|t| t.len() != mask + 1) {
        return Err(Error::Length { expected: mask + 1, found: t.len() });
    }
    let size = 1usize << plan.m;
    let mut out: Vec<f64> = (0..size).map(|x| tables[0][x & mask]).collect();
    for (i, t) in tables.iter().enumerate().skip(1) {
        let shift = i * plan.p as usize;
        for (x, o) in out.iter_mut().enumerate() {
            *o *= t[(x >> shift) & mask];
        }
    }
    normalize_with_floor(&mut out);
    Ok(ProbVector::from_normalized(out))
}

/// Runs the whole soft detector for one channel use and returns the
/// priors of its `K_t` coded symbols, in antenna order.
pub fn soft_priors(
    h: &DMatrix<Complex>,
    y: &DVector<Complex>,
    n0: f64,
    es: f64,
    constellation: &Constellation,
    plan: &MappingPlan,
) -> Result<Vec<ProbVector>> {
    let nt = plan.nt;
    let weights = compute_weights(h, n0, es, nt)?;
    let s_hat = detect(&weights, y)?;
    let eq = eq_awgn_params(&weights, h, es, nt)?;
    let m = constellation.order();
    let mut tables = vec![0.0; nt * m];
    for k in 0..nt {
        likelihoods_into(s_hat[k], eq.mu[k], eq.eps_sq[k], constellation, &mut tables[k * m..(k + 1) * m]);
    }
    (0..plan.kt)
        .map(|slot| {
            let t: Vec<&[f64]> = plan.antennas_of(slot).map(|k| &tables[k * m..(k + 1) * m]).collect();
            gf_priors(&t, plan)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{complex_gaussian, sample_channel, substream, transmit};
    use crate::modem::Scheme;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn scalar_closed_form() {
        let h = DMatrix::from_element(1, 1, c(1.0, 0.0));
        let w = compute_weights(&h, 1.0, 1.0, 1).unwrap();
        assert!((w.w[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        let eq = eq_awgn_params(&w, &h, 1.0, 1).unwrap();
        assert_eq!(eq.mu, vec![0.5]);
        assert_eq!(eq.eps_sq, vec![0.25]);

        let n0 = 0.3;
        let w = compute_weights(&h, n0, 1.0, 1).unwrap();
        let y = DVector::from_element(1, c(0.7, -0.2));
        let s_hat = detect(&w, &y).unwrap();
        assert!((s_hat[0] - y[0] / (1.0 + n0)).norm() < 1e-15);
        assert_eq!(detect(&w, &DVector::zeros(1)).unwrap()[0], c(0.0, 0.0));
    }

    #[test]
    fn zero_forcing_limit() {
        let mut rng = substream(11, 0, 0);
        let h = sample_channel(4, 4, &mut rng);
        let w = compute_weights(&h, 1e-12, 1.0, 4).unwrap();
        let g = w.w.ad_mul(&h);
        let eye = DMatrix::<Complex>::identity(4, 4);
        assert!((g - eye).iter().all(|d| d.norm() < 1e-6));

        let s = DVector::from_fn(4, |i, _| c(if i % 2 == 0 { 0.5 } else { -0.5 }, 0.5));
        let y = transmit(&h, &s, 0.0, &mut rng).unwrap();
        let w = compute_weights(&h, 1e-10, 1.0, 4).unwrap();
        let s_hat = detect(&w, &y).unwrap();
        assert!((s_hat - s).iter().all(|d| d.norm() < 1e-4));
    }

    /// Closed-form `E|s_k - w^H y|^2` for unit-rate i.i.d. symbols of
    /// energy `es/nt` and noise density `n0`.
    fn mse(w: &DVector<Complex>, h: &DMatrix<Complex>, k: usize, n0: f64, es_nt: f64) -> f64 {
        let hk = h.column(k);
        let r = h * h.adjoint() * c(es_nt, 0.0) + DMatrix::<Complex>::identity(h.nrows(), h.nrows()) * c(n0, 0.0);
        let quad = w.dotc(&(&r * w)).re;
        es_nt - 2.0 * es_nt * w.dotc(&hk).re + quad
    }

    #[test]
    fn weights_minimize_mse() {
        let mut rng = substream(12, 0, 0);
        let (nt, n0, es) = (4, 0.2, 1.0);
        let h = sample_channel(nt, nt, &mut rng);
        let w = compute_weights(&h, n0, es, nt).unwrap();
        for k in 0..nt {
            let wk: DVector<Complex> = w.w.column(k).into_owned();
            let base = mse(&wk, &h, k, n0, es / nt as f64);
            for _ in 0..50 {
                let dir = DVector::from_fn(nt, |_, _| complex_gaussian(&mut rng, 1.0));
                for delta in [1e-3, -1e-3, 1e-1] {
                    let moved = &wk + &dir * c(delta, 0.0);
                    assert!(mse(&moved, &h, k, n0, es / nt as f64) >= base - 1e-14);
                }
            }
        }
    }

    #[test]
    fn residual_variance_matches_equivalent_awgn_model() {
        let mut rng = substream(13, 0, 0);
        let (nt, es, n0) = (8, 1.0, 0.1);
        let h = sample_channel(nt, nt, &mut rng);
        let w = compute_weights(&h, n0, es, nt).unwrap();
        let eq = eq_awgn_params(&w, &h, es, nt).unwrap();
        let qpsk = Constellation::new(Scheme::Qpsk, es / nt as f64).unwrap();
        let trials = 100_000;
        let mut acc = vec![0.0; nt];
        for _ in 0..trials {
            let s = DVector::from_fn(nt, |_, _| qpsk.point(rng.random_range(0..4)));
            let y = transmit(&h, &s, n0 / 2.0, &mut rng).unwrap();
            let s_hat = detect(&w, &y).unwrap();
            for k in 0..nt {
                acc[k] += (s_hat[k] - s[k] * eq.mu[k]).norm_sqr();
            }
        }
        for k in 0..nt {
            let v = acc[k] / trials as f64;
            assert!((v / eq.eps_sq[k] - 1.0).abs() < 0.05, "k={k}: {v} vs {}", eq.eps_sq[k]);
        }
    }

    #[test]
    fn mu_is_real_and_inside_unit_interval() {
        let mut rng = substream(14, 0, 0);
        for nt in [2, 4, 8, 16] {
            for _ in 0..50 {
                let h = sample_channel(nt, nt, &mut rng);
                let n0 = 10f64.powf(-rng.random_range(0.0..2.0));
                let w = compute_weights(&h, n0, 1.0, nt).unwrap();
                let eq = eq_awgn_params(&w, &h, 1.0, nt).unwrap();
                for k in 0..nt {
                    let raw = w.w.column(k).dotc(&h.column(k));
                    assert!(raw.im.abs() < 1e-10);
                    assert!(eq.mu[k] > 0.0 && eq.mu[k] < 1.0);
                    assert!(eq.eps_sq[k] > 0.0);
                }
            }
        }
    }

    #[test]
    fn likelihood_fixtures() {
        let bpsk = Constellation::new(Scheme::Bpsk, 1.0).unwrap();
        let l = likelihoods(c(0.0, 0.0), 0.5, 0.3, &bpsk);
        assert!((l[0] - 0.5).abs() < 1e-15 && (l[1] - 0.5).abs() < 1e-15);

        let qpsk = Constellation::new(Scheme::Qpsk, 1.0).unwrap();
        let mu = 0.8;
        let target = qpsk.point(2);
        let sharp = likelihoods(target * mu, mu, 1e-6, &qpsk);
        assert!((sharp[2] - 1.0).abs() < 1e-12);

        // four-term direct evaluation with eps^2 = 0.5
        let s_hat = c(1.0, 1.0) * (mu / 2f64.sqrt());
        let got = likelihoods(s_hat, mu, 0.5, &qpsk);
        let raw: Vec<f64> = qpsk.points().iter().map(|p| (-(s_hat - p * mu).norm_sqr() / 0.5).exp()).collect();
        let z: f64 = raw.iter().sum();
        for (g, r) in got.iter().zip(&raw) {
            assert!((g - r / z).abs() < 1e-14);
        }
        // far-away estimate does not underflow to NaN
        let far = likelihoods(c(1e3, 0.0), 0.5, 1e-4, &qpsk);
        assert!(far.iter().all(|x| x.is_finite()) && (far.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn priors_from_point_mass_and_uniform_tables() {
        let plan = MappingPlan::new(8, Scheme::Qpsk, 16, 432).unwrap();
        let x = 0b10_01_11_00usize;
        let tables: Vec<Vec<f64>> = (0..4)
            .map(|i| {
                let mut t = vec![0.0; 4];
                t[(x >> (2 * i)) & 3] = 1.0;
                t
            })
            .collect();
        let refs: Vec<&[f64]> = tables.iter().map(Vec::as_slice).collect();
        let p = gf_priors(&refs, &plan).unwrap();
        assert_eq!(p.argmax().index(), x);
        assert!(p[x] > 1.0 - 1e-12);

        let u = vec![0.25; 4];
        let p = gf_priors(&[&u, &u, &u, &u], &plan).unwrap();
        assert!(p.as_slice().iter().all(|v| (v - 1.0 / 256.0).abs() < 1e-15));
        assert!(gf_priors(&[&u, &u], &plan).is_err());
    }

    #[test]
    fn priors_match_double_loop_for_16qam() {
        let plan = MappingPlan::new(8, Scheme::Qam16, 16, 256).unwrap();
        let mut rng = substream(15, 0, 0);
        for _ in 0..20 {
            let t0: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
            let t1: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
            let p = gf_priors(&[&t0, &t1], &plan).unwrap();
            let mut oracle = vec![0.0; 256];
            for lo in 0..16 {
                for hi in 0..16 {
                    oracle[lo | (hi << 4)] = t0[lo] * t1[hi];
                }
            }
            let z: f64 = oracle.iter().sum();
            for (a, b) in p.as_slice().iter().zip(&oracle) {
                assert!((a - b / z).abs() < 1e-15);
            }
            assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_soft_detection_picks_transmitted_symbols() {
        use crate::galois::GfSymbol;
        use crate::modem::map_codeword;
        let mut rng = substream(16, 0, 0);
        for scheme in [Scheme::Bpsk, Scheme::Qpsk, Scheme::Qam16] {
            let nt = 16;
            let plan = MappingPlan::new(8, scheme, nt, 2 * nt / (8 / scheme.bits_per_symbol() as usize)).unwrap();
            let cons = Constellation::new(scheme, 1.0 / nt as f64).unwrap();
            let x: Vec<GfSymbol> = (0..plan.n).map(|_| GfSymbol::from_raw(rng.random_range(0..256))).collect();
            let tx = map_codeword(&x, &plan, &cons).unwrap();
            for (u, s) in tx.iter().enumerate() {
                let h = sample_channel(nt, nt, &mut rng);
                let y = &h * s;
                let pri = soft_priors(&h, &y, 1e-10, 1.0, &cons, &plan).unwrap();
                for (slot, p) in pri.iter().enumerate() {
                    assert_eq!(p.argmax(), x[u * plan.kt + slot], "{scheme}");
                }
            }
        }
    }

    #[test]
    fn dimension_errors() {
        let h = DMatrix::<Complex>::identity(2, 2);
        assert!(compute_weights(&h, 0.1, 1.0, 3).is_err());
        assert!(compute_weights(&h, f64::NAN, 1.0, 2).is_err());
        let w = compute_weights(&h, 0.1, 1.0, 2).unwrap();
        assert!(detect(&w, &DVector::zeros(3)).is_err());
    }
}
