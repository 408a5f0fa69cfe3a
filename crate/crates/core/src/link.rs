//! One coded frame end to end: random information symbols, encoding,
//! mapping, independent Rayleigh channel uses, MMSE soft detection and
//! belief-propagation decoding.
//!
//! Every random draw of frame `f` under master seed `s` comes from
//! [`substream(s, f, segment)`](crate::channel::substream): segment 0 holds
//! the information symbols and segment `1 + u` holds channel use `u`
//! (channel matrix, then noise). Frames are therefore independent of the
//! order or thread they run on.

use alloc::vec::Vec;

use rand::Rng;

use crate::channel::{substream, ChannelUse, NoiseLevel};
use crate::code::{EncoderPlan, ParityCheckMatrix};
use crate::decoder::{BpDecoder, ProbVector};
use crate::detector::soft_priors;
use crate::error::{Error, Result};
use crate::galois::{FieldTable, GfSymbol};
use crate::modem::{map_codeword, Constellation, MappingPlan, Scheme};

/// Total transmit energy per channel use.
pub const ES: f64 = 1.0;

/// Everything about a link that stays fixed across frames.
#[derive(Debug, Clone)]
pub struct Link {
    pub field: FieldTable,
    pub code: ParityCheckMatrix,
    pub encoder: EncoderPlan,
    pub plan: MappingPlan,
    pub constellation: Constellation,
    pub nr: usize,
}

impl Link {
    pub fn new(field: FieldTable, code: ParityCheckMatrix, scheme: Scheme, nt: usize, nr: usize) -> Result<Self> {
        if nt != nr {
            return Err(Error::Dimension(alloc::format!("only square channels are modelled ({nt}x{nr})")));
        }
        if code.m() != field.m() {
            return Err(Error::Dimension(alloc::format!(
                "code over GF(2^{}) with field GF(2^{})",
                code.m(),
                field.m()
            )));
        }
        let encoder = EncoderPlan::new(&code, &field)?;
        let plan = MappingPlan::new(field.m(), scheme, nt, code.n())?;
        let constellation = Constellation::new(scheme, ES / nt as f64)?;
        Ok(Link { field, code, encoder, plan, constellation, nr })
    }

    pub fn nt(&self) -> usize {
        self.plan.nt
    }

    /// Information bits per frame, `m K`.
    pub fn info_bits(&self) -> usize {
        self.encoder.k() * self.field.m() as usize
    }

    /// `p R N_t` in bps/Hz.
    pub fn spectral_efficiency(&self) -> f64 {
        self.plan.p as f64 * self.encoder.k() as f64 / self.code.n() as f64 * self.plan.nt as f64
    }

    pub fn decoder(&self) -> Result<BpDecoder<'_>> {
        BpDecoder::new(&self.code, &self.field)
    }
}

/// Where the decoder priors come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorMode {
    /// The MMSE soft detector.
    Detector,
    /// Point masses on the transmitted codeword; skips the channel entirely.
    Genie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameOutcome {
    /// Errors among the `m K` information bits.
    pub bit_errors: u64,
    /// Any information bit in error.
    pub frame_error: bool,
    pub iterations: usize,
    pub converged: bool,
}

pub fn random_info(field: &FieldTable, k: usize, seed: u64, frame: u64) -> Vec<GfSymbol> {
    let mut rng = substream(seed, frame, 0);
    (0..k).map(|_| GfSymbol::from_raw(rng.random_range(0..field.size()) as u16)).collect()
}

/// Simulates frame number `frame` of the run keyed by `seed`.
pub fn run_frame(
    link: &Link,
    decoder: &mut BpDecoder<'_>,
    noise: NoiseLevel,
    l_max: usize,
    seed: u64,
    frame: u64,
    mode: PriorMode,
) -> Result<FrameOutcome> {
    let info = random_info(&link.field, link.encoder.k(), seed, frame);
    let codeword = link.encoder.encode(&link.field, &info)?;
    let size = link.field.size();

    let priors: Vec<ProbVector> = match mode {
        PriorMode::Genie => codeword.iter().map(|&s| ProbVector::point_mass(size, s)).collect(),
        PriorMode::Detector => {
            let tx = map_codeword(&codeword, &link.plan, &link.constellation)?;
            let mut priors = Vec::with_capacity(link.code.n());
            for (u, s) in tx.into_iter().enumerate() {
                let mut rng = substream(seed, frame, 1 + u as u64);
                let cu = ChannelUse::draw(s, link.nr, noise.sigma_sq, &mut rng)?;
                priors.extend(soft_priors(&cu.h, &cu.y, noise.n0, ES, &link.constellation, &link.plan)?);
            }
            priors
        }
    };

    let result = decoder.decode(&priors, l_max)?;
    let bit_errors: u64 = link
        .encoder
        .info_positions()
        .iter()
        .zip(&info)
        .map(|(&pos, s)| (result.symbols[pos].value() ^ s.value()).count_ones() as u64)
        .sum();
    Ok(FrameOutcome {
        bit_errors,
        frame_error: bit_errors > 0,
        iterations: result.iterations,
        converged: result.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::noise_from_snr;
    use crate::code::{construct_full_rank, CodeParams};

    fn small_link(scheme: Scheme, nt: usize) -> Link {
        let field = FieldTable::with_default_poly(8).unwrap();
        let params = CodeParams::from_bits(864, 4, 8, 3).unwrap();
        let (code, _) = construct_full_rank(&params, &field, 8).unwrap();
        Link::new(field, code, scheme, nt, nt).unwrap()
    }

    #[test]
    fn link_bookkeeping() {
        let link = small_link(Scheme::Qpsk, 16);
        assert_eq!(link.info_bits(), 432);
        assert_eq!(link.spectral_efficiency(), 16.0);
        assert_eq!(link.plan.uses_per_codeword(), 27);
        let field = FieldTable::with_default_poly(8).unwrap();
        assert!(Link::new(field, link.code.clone(), Scheme::Qpsk, 16, 8).is_err());
    }

    #[test]
    fn genie_priors_decode_instantly() {
        let link = small_link(Scheme::Qpsk, 16);
        let mut dec = link.decoder().unwrap();
        let out = run_frame(&link, &mut dec, noise_from_snr(0.0, ES), 100, 1, 0, PriorMode::Genie).unwrap();
        assert_eq!(out, FrameOutcome { bit_errors: 0, frame_error: false, iterations: 0, converged: true });
    }

    #[test]
    fn noiseless_frames_are_error_free() {
        for (scheme, nt) in [(Scheme::Qpsk, 16), (Scheme::Bpsk, 8), (Scheme::Qam16, 8)] {
            let link = small_link(scheme, nt);
            let mut dec = link.decoder().unwrap();
            for f in 0..3 {
                let out =
                    run_frame(&link, &mut dec, NoiseLevel::from_sigma_sq(1e-20), 100, 9, f, PriorMode::Detector).unwrap();
                assert_eq!(out.bit_errors, 0, "{scheme}");
                assert!(out.converged && out.iterations <= 2);
            }
        }
    }

    #[test]
    fn frames_replay_exactly() {
        let link = small_link(Scheme::Qpsk, 16);
        let mut dec = link.decoder().unwrap();
        let noise = noise_from_snr(4.0, ES);
        let a: Vec<_> = (0..4).map(|f| run_frame(&link, &mut dec, noise, 20, 5, f, PriorMode::Detector).unwrap()).collect();
        let b: Vec<_> = (0..4).rev().map(|f| run_frame(&link, &mut dec, noise, 20, 5, f, PriorMode::Detector).unwrap()).collect();
        assert_eq!(a, b.into_iter().rev().collect::<Vec<_>>());
        assert_ne!(random_info(&link.field, 10, 5, 0), random_info(&link.field, 10, 5, 1));
    }

    #[test]
    fn very_noisy_frames_fail_without_aborting() {
        let link = small_link(Scheme::Qpsk, 16);
        let mut dec = link.decoder().unwrap();
        let out = run_frame(&link, &mut dec, noise_from_snr(-10.0, ES), 5, 2, 0, PriorMode::Detector).unwrap();
        assert!(out.frame_error && out.bit_errors > 0);
        assert_eq!(out.iterations, 5);
        assert!(!out.converged);
    }
}
