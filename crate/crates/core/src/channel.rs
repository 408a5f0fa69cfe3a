//! Flat Rayleigh-fading MIMO channel `y = Hs + n` and SNR bookkeeping.
//!
//! SNR is per receive antenna: `gamma = Es / N0` with `N0 = 2 sigma_n^2`.

use alloc::format;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::Complex;

/// Circularly-symmetric complex Gaussian with `E|z|^2 = variance`.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex {
    let s = libm::sqrt(variance / 2.0);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(s * re, s * im)
}

/// `N_r x N_t` matrix of i.i.d. unit-variance complex Gaussian gains.
pub fn sample_channel<R: Rng + ?Sized>(nt: usize, nr: usize, rng: &mut R) -> DMatrix<Complex> {
    // column-major fill; the draw order is part of the reproducibility contract
    DMatrix::from_fn(nr, nt, |_, _| complex_gaussian(rng, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLevel {
    /// One-sided noise density `N0`.
    pub n0: f64,
    /// Variance per real component, `N0 / 2`.
    pub sigma_sq: f64,
}

impl NoiseLevel {
    pub fn from_sigma_sq(sigma_sq: f64) -> Self {
        NoiseLevel { n0: 2.0 * sigma_sq, sigma_sq }
    }
}

pub fn noise_from_snr(gamma_db: f64, es: f64) -> NoiseLevel {
    let n0 = es / libm::pow(10.0, gamma_db / 10.0);
    NoiseLevel { n0, sigma_sq: n0 / 2.0 }
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// `y = H s + n` with `n` of variance `sigma_sq` per real component.
pub fn transmit<R: Rng + ?Sized>(
    h: &DMatrix<Complex>,
    s: &DVector<Complex>,
    sigma_sq: f64,
    rng: &mut R,
) -> Result<DVector<Complex>> {
    if h.ncols() != s.len() {
        return Err(Error::Dimension(format!("H is {}x{}, s has {} entries", h.nrows(), h.ncols(), s.len())));
    }
    if !(sigma_sq >= 0.0) || !sigma_sq.is_finite() {
        return Err(Error::NonFinite("noise variance"));
    }
    let mut y = h * s;
    if sigma_sq > 0.0 {
        for v in y.iter_mut() {
            *v += complex_gaussian(rng, 2.0 * sigma_sq);
        }
    }
    Ok(y)
}

/// One realization of the channel model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelUse {
    pub h: DMatrix<Complex>,
    pub s: DVector<Complex>,
    pub y: DVector<Complex>,
    pub sigma_n_sq: f64,
}

impl ChannelUse {
    /// Draws a fresh `H` and noise for `s`.
    pub fn draw<R: Rng + ?Sized>(s: DVector<Complex>, nr: usize, sigma_sq: f64, rng: &mut R) -> Result<Self> {
        let h = sample_channel(s.len(), nr, rng);
        let y = transmit(&h, &s, sigma_sq, rng)?;
        Ok(ChannelUse { h, s, y, sigma_n_sq: sigma_sq })
    }
}

/// Words reserved for each segment of a substream. A segment that draws
/// more than this many 32-bit words would run into the next one.
pub const SEGMENT_WORDS: u128 = 1 << 40;

/// Counter-based random stream for `(seed, stream, segment)`.
///
/// The ChaCha key comes from `seed`, the stream id selects an independent
/// keystream (one per frame), and `segment` positions the counter inside it
/// (one per channel use). Any segment can be regenerated in isolation.
pub fn substream(seed: u64, stream: u64, segment: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(segment as u128 * SEGMENT_WORDS);
    rng
}
