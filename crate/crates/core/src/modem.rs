//! Gray-labelled constellations and the coded-symbol to antenna mapping.
//!
//! A label is a `p`-bit pattern stored in an integer whose bit `i` is the
//! `i`-th bit consumed from the coded symbol. Coded symbol bits are consumed
//! in `L(x)` order, lowest polynomial coefficient first, so modulated symbol
//! `j` of coded symbol `x` carries label `(x >> (j * p)) & (M - 1)`.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::galois::GfSymbol;
use crate::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Bpsk,
    Qpsk,
    Qam16,
}

impl Scheme {
    /// Bits per modulated symbol, `p`.
    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Scheme::Bpsk => 1,
            Scheme::Qpsk => 2,
            Scheme::Qam16 => 4,
        }
    }

    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Bpsk => "bpsk",
            Scheme::Qpsk => "qpsk",
            Scheme::Qam16 => "16qam",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Scheme::Bpsk),
            "qpsk" | "4qam" => Ok(Scheme::Qpsk),
            "16qam" | "qam16" | "16-qam" => Ok(Scheme::Qam16),
            other => Err(Error::Mapping(format!("unsupported modulation '{other}'"))),
        }
    }
}

/// Reflected Gray code on one real dimension: 2-bit label to amplitude
/// level in `{-3, -1, 1, 3}`. Adjacent levels differ in one bit.
const PAM4_LEVEL: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    scheme: Scheme,
    /// `points[label]`.
    points: Vec<Complex>,
    energy: f64,
}

impl Constellation {
    /// Constellation with mean point energy `es_over_nt`.
    pub fn new(scheme: Scheme, es_over_nt: f64) -> Result<Self> {
        if !(es_over_nt.is_finite() && es_over_nt > 0.0) {
            return Err(Error::NonFinite("per-antenna energy"));
        }
        let a = libm::sqrt(es_over_nt);
        let points = match scheme {
            // label 0 -> +1
            Scheme::Bpsk => alloc::vec![Complex::new(a, 0.0), Complex::new(-a, 0.0)],
            Scheme::Qpsk => {
                let s = a * core::f64::consts::FRAC_1_SQRT_2;
                (0..4u32)
                    .map(|l| {
                        let re = if l & 1 == 0 { s } else { -s };
                        let im = if l & 2 == 0 { s } else { -s };
                        Complex::new(re, im)
                    })
                    .collect()
            }
            Scheme::Qam16 => {
                let s = a / libm::sqrt(10.0);
                (0..16usize)
                    .map(|l| Complex::new(s * PAM4_LEVEL[l & 3], s * PAM4_LEVEL[l >> 2]))
                    .collect()
            }
        };
        Ok(Constellation { scheme, points, energy: es_over_nt })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.scheme.bits_per_symbol()
    }

    /// Number of points `M`.
    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Points indexed by label.
    pub fn points(&self) -> &[Complex] {
        &self.points
    }

    #[inline]
    pub fn point(&self, label: usize) -> Complex {
        self.points[label]
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Label of the nearest point; ties go to the lowest label.
    pub fn hard_demap(&self, y: Complex) -> usize {
        let mut best = 0;
        let mut best_d = (y - self.points[0]).norm_sqr();
        for (l, p) in self.points.iter().enumerate().skip(1) {
            let d = (y - p).norm_sqr();
            if d < best_d {
                best = l;
                best_d = d;
            }
        }
        best
    }
}

/// How coded symbols are spread over modulated symbols and antennas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MappingPlan {
    /// Bits per coded symbol.
    pub m: u32,
    /// Bits per modulated symbol.
    pub p: u32,
    /// Modulated symbols per coded symbol.
    pub q: usize,
    /// Coded symbols per channel use.
    pub kt: usize,
    pub nt: usize,
    /// Codeword length in symbols.
    pub n: usize,
}

impl MappingPlan {
    pub fn new(m: u32, scheme: Scheme, nt: usize, n: usize) -> Result<Self> {
        let p = scheme.bits_per_symbol();
        if m % p != 0 {
            return Err(Error::Mapping(format!("{m}-bit symbols do not split into {p}-bit labels")));
        }
        let q = (m / p) as usize;
        if nt == 0 || nt % q != 0 {
            return Err(Error::Mapping(format!("N_t = {nt} is not a multiple of q = {q}")));
        }
        let kt = nt / q;
        if n == 0 || n % kt != 0 {
            return Err(Error::Mapping(format!("N = {n} is not a multiple of K_t = {kt}")));
        }
        Ok(MappingPlan { m, p, q, kt, nt, n })
    }

    pub fn uses_per_codeword(&self) -> usize {
        self.n / self.kt
    }

    /// Label carried by part `part` (`0..q`) of coded symbol `x`.
    #[inline]
    pub fn label(&self, x: GfSymbol, part: usize) -> usize {
        ((x.value() as usize) >> (part * self.p as usize)) & ((1 << self.p) - 1)
    }

    /// Antennas `[first, first + q)` carrying coded symbol `slot` of a use.
    pub fn antennas_of(&self, slot: usize) -> core::ops::Range<usize> {
        slot * self.q..(slot + 1) * self.q
    }
}

/// Transmit vectors for one codeword, one per channel use. Coded symbol
/// `u * K_t + j` occupies antennas `j*q .. (j+1)*q` of use `u`.
pub fn map_codeword(x: &[GfSymbol], plan: &MappingPlan, constellation: &Constellation) -> Result<Vec<DVector<Complex>>> {
    if x.len() != plan.n {
        return Err(Error::Length { expected: plan.n, found: x.len() });
    }
    if constellation.bits_per_symbol() != plan.p {
        return Err(Error::Mapping(format!(
            "constellation carries {} bits, plan expects {}",
            constellation.bits_per_symbol(),
            plan.p
        )));
    }
    Ok(x.chunks_exact(plan.kt)
        .map(|group| {
            DVector::from_iterator(
                plan.nt,
                group.iter().flat_map(|&s| (0..plan.q).map(move |i| constellation.point(plan.label(s, i)))),
            )
        })
        .collect())
}
