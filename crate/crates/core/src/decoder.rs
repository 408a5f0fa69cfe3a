//! Belief propagation over GF(2^m) with transform-domain check updates.
//!
//! Messages are probability vectors of length `2^m` indexed by symbol value.
//! A check node multiplies each incoming message through its edge
//! coefficient, convolves them over the additive group of the field, and
//! maps the result back through the outgoing edge coefficient. The additive
//! group of GF(2^m) is `(Z/2)^m` under XOR, so the convolution diagonalises
//! under the Walsh-Hadamard transform.

use alloc::vec;
use alloc::vec::Vec;

use crate::code::ParityCheckMatrix;
use crate::error::{Error, Result};
use crate::galois::{FieldTable, GfSymbol};

/// Smallest value any normalized message entry may take.
pub const PROB_FLOOR: f64 = 1e-300;

const SUM_TOLERANCE: f64 = 1e-9;

/// Nonnegative vector over the field elements summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates length (power of two), sign, finiteness and unit sum.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 || !p.len().is_power_of_two() {
            return Err(Error::ProbVector(alloc::format!("length {} is not 2^m", p.len())));
        }
        if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::ProbVector("negative or non-finite entry".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::ProbVector(alloc::format!("entries sum to {s}")));
        }
        Ok(ProbVector(p))
    }

    /// Scales a nonnegative vector to unit sum.
    pub fn from_weights(mut w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::ProbVector("negative or non-finite weight".into()));
        }
        let s: f64 = w.iter().sum();
        if s <= 0.0 {
            return Err(Error::ProbVector("weights sum to zero".into()));
        }
        w.iter_mut().for_each(|x| *x /= s);
        Self::new(w)
    }

    pub fn uniform(q: usize) -> Self {
        ProbVector(vec![1.0 / q as f64; q])
    }

    pub fn point_mass(q: usize, at: GfSymbol) -> Self {
        let mut p = vec![0.0; q];
        p[at.index()] = 1.0;
        ProbVector(p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Most likely symbol; ties go to the lowest value.
    pub fn argmax(&self) -> GfSymbol {
        argmax(&self.0)
    }

    pub(crate) fn from_normalized(p: Vec<f64>) -> Self {
        ProbVector(p)
    }
}

impl core::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// In-place unnormalized fast Walsh-Hadamard transform. Applying it twice
/// multiplies by `data.len()`.
pub fn fwht(data: &mut [f64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    if n < 4 {
        if n == 2 {
            let (x, y) = (data[0], data[1]);
            data[0] = x + y;
            data[1] = x - y;
        }
        return;
    }
    // first two stages fused; they are too narrow to vectorize on their own
    for c in data.chunks_exact_mut(4) {
        let (a, b) = (c[0] + c[1], c[0] - c[1]);
        let (x, y) = (c[2] + c[3], c[2] - c[3]);
        c[0] = a + x;
        c[1] = b + y;
        c[2] = a - x;
        c[3] = b - y;
    }
    let mut h = 4;
    while h < n {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// `T(p)(u) = sum_x (-1)^<u,x> p(x)` over the bit representations.
pub fn wh_transform(p: &[f64]) -> Vec<f64> {
    let mut out = p.to_vec();
    fwht(&mut out);
    out
}

/// `(p1 * p2)(x) = sum_{y + z = x} p1(y) p2(z)`, evaluated in the
/// transform domain.
pub fn convolve(p1: &ProbVector, p2: &ProbVector) -> Result<ProbVector> {
    if p1.len() != p2.len() {
        return Err(Error::Length { expected: p1.len(), found: p2.len() });
    }
    let mut a = wh_transform(p1.as_slice());
    let b = wh_transform(p2.as_slice());
    a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y);
    fwht(&mut a);
    let scale = 1.0 / a.len() as f64;
    a.iter_mut().for_each(|x| *x *= scale);
    normalize_with_floor(&mut a);
    Ok(ProbVector(a))
}

/// Normalizes to unit sum, lifts entries below [`PROB_FLOOR`] (including
/// small negatives left by the transform) and renormalizes. A vector with
/// no positive mass becomes uniform.
pub fn normalize_with_floor(p: &mut [f64]) {
    let s: f64 = p.iter().fold(0.0, |acc, &x| acc + if x > 0.0 { x } else { 0.0 });
    if !(s > 0.0) || !s.is_finite() {
        let u = 1.0 / p.len() as f64;
        p.iter_mut().for_each(|x| *x = u);
        return;
    }
    let inv = 1.0 / s;
    let mut clamped = false;
    for x in p.iter_mut() {
        let y = *x * inv;
        clamped |= !(y >= PROB_FLOOR);
        *x = if y >= PROB_FLOOR { y } else { PROB_FLOOR };
    }
    if clamped {
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
    }
}

fn argmax(p: &[f64]) -> GfSymbol {
    let mut best = 0;
    for (i, &x) in p.iter().enumerate().skip(1) {
        if x > p[best] {
            best = i;
        }
    }
    GfSymbol::from_raw(best as u16)
}

/// Per-coefficient index maps: `mul[i]` is `a * i` for every symbol `i`.
fn multiply_map(field: &FieldTable, a: GfSymbol) -> Vec<u16> {
    (0..field.size() as u16)
        .map(|i| field.mul(a, GfSymbol::from_raw(i)).value())
        .collect()
}

/// Check-node update for one check.
///
/// For each target edge the other incoming messages are moved through
/// their coefficients (`p~(x) = p(a^-1 x)`), convolved, and mapped back
/// through the target coefficient (`p_cv(x) = p~(a_cv x)`).
pub fn check_to_var(
    field: &FieldTable,
    incoming: &[ProbVector],
    coeffs: &[GfSymbol],
) -> Result<Vec<ProbVector>> {
    if incoming.len() != coeffs.len() {
        return Err(Error::Length { expected: coeffs.len(), found: incoming.len() });
    }
    let q = field.size();
    if let Some(bad) = incoming.iter().find(|p| p.len() != q) {
        return Err(Error::Length { expected: q, found: bad.len() });
    }
    if coeffs.iter().any(|c| c.is_zero()) {
        return Err(Error::ZeroInverse);
    }
    let maps: Vec<Vec<u16>> = coeffs.iter().map(|&a| multiply_map(field, a)).collect();
    let mut spectra = vec![0.0; incoming.len() * q];
    for (e, p) in incoming.iter().enumerate() {
        permute_into(p.as_slice(), &maps[e], &mut spectra[e * q..(e + 1) * q]);
    }
    let mut out = vec![0.0; incoming.len() * q];
    let mut scratch = vec![0.0; 2 * q];
    check_update(&mut spectra, &maps, &mut out, &mut scratch, q);
    Ok(out.chunks_exact(q).map(|c| ProbVector(c.to_vec())).collect())
}

/// `dst[a * y] = src[y]`.
#[inline]
fn permute_into(src: &[f64], map: &[u16], dst: &mut [f64]) {
    for (y, &ay) in map.iter().enumerate() {
        dst[ay as usize] = src[y];
    }
}

/// Core check update. `spectra` holds the permuted incoming messages for
/// the edges of one check (overwritten by their transforms); `out`
/// receives normalized outgoing messages.
fn check_update(spectra: &mut [f64], maps: &[Vec<u16>], out: &mut [f64], scratch: &mut [f64], q: usize) {
    let dc = maps.len();
    for s in spectra.chunks_exact_mut(q) {
        fwht(s);
    }
    let (prefix, acc) = scratch.split_at_mut(q);
    // forward pass: out_e <- prod_{e' < e} T_e'
    prefix.iter_mut().for_each(|x| *x = 1.0);
    for e in 0..dc {
        out[e * q..(e + 1) * q].copy_from_slice(prefix);
        let t = &spectra[e * q..(e + 1) * q];
        prefix.iter_mut().zip(t).for_each(|(p, x)| *p *= x);
    }
    // backward pass: out_e *= prod_{e' > e} T_e'
    let suffix = prefix;
    suffix.iter_mut().for_each(|x| *x = 1.0);
    for e in (0..dc).rev() {
        let o = &mut out[e * q..(e + 1) * q];
        o.iter_mut().zip(suffix.iter()).for_each(|(a, b)| *a *= b);
        let t = &spectra[e * q..(e + 1) * q];
        suffix.iter_mut().zip(t).for_each(|(p, x)| *p *= x);
    }
    for e in 0..dc {
        let o = &mut out[e * q..(e + 1) * q];
        fwht(o);
        // p_cv(x) = p~(a_cv x)
        for (x, &ax) in maps[e].iter().enumerate() {
            acc[x] = o[ax as usize];
        }
        o.copy_from_slice(acc);
        normalize_with_floor(o);
    }
}

/// Variable-node update: prior times all other incoming check messages.
/// With no incoming messages this is the prior itself.
pub fn var_to_check(prior: &ProbVector, incoming: &[ProbVector]) -> Result<ProbVector> {
    let q = prior.len();
    if let Some(bad) = incoming.iter().find(|p| p.len() != q) {
        return Err(Error::Length { expected: q, found: bad.len() });
    }
    if incoming.is_empty() {
        return Ok(prior.clone());
    }
    let mut out = prior.as_slice().to_vec();
    for m in incoming {
        out.iter_mut().zip(m.as_slice()).for_each(|(a, b)| *a *= b);
    }
    normalize_with_floor(&mut out);
    Ok(ProbVector(out))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub symbols: Vec<GfSymbol>,
    /// Iterations run; 0 when the priors alone already give a codeword.
    pub iterations: usize,
    /// Whether decoding stopped on a zero syndrome.
    pub converged: bool,
}

/// Flooding-schedule decoder bound to one parity-check matrix. Owns all
/// message storage so repeated decodes do not allocate.
pub struct BpDecoder<'a> {
    code: &'a ParityCheckMatrix,
    field: &'a FieldTable,
    q: usize,
    maps: Vec<Vec<u16>>,
    priors: Vec<f64>,
    var_msgs: Vec<f64>,
    chk_msgs: Vec<f64>,
    posteriors: Vec<f64>,
    decision: Vec<GfSymbol>,
    spectra: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> BpDecoder<'a> {
    pub fn new(code: &'a ParityCheckMatrix, field: &'a FieldTable) -> Result<Self> {
        if code.m() != field.m() {
            return Err(Error::Dimension(alloc::format!(
                "code over GF(2^{}) used with GF(2^{})",
                code.m(),
                field.m()
            )));
        }
        let q = field.size();
        let maps = code
            .rows()
            .iter()
            .flatten()
            .map(|e| multiply_map(field, e.coeff))
            .collect();
        let edges = code.num_edges();
        Ok(BpDecoder {
            code,
            field,
            q,
            maps,
            priors: vec![0.0; code.n() * q],
            var_msgs: vec![0.0; edges * q],
            chk_msgs: vec![0.0; edges * q],
            posteriors: vec![0.0; code.n() * q],
            decision: vec![GfSymbol::ZERO; code.n()],
            spectra: vec![0.0; code.dc() * q],
            scratch: vec![0.0; 2 * q],
        })
    }

    pub fn code(&self) -> &ParityCheckMatrix {
        self.code
    }

    /// Runs until the tentative decision satisfies every check or `l_max`
    /// iterations have run.
    pub fn decode(&mut self, priors: &[ProbVector], l_max: usize) -> Result<DecodeResult> {
        self.run(priors, l_max, true)
    }

    /// Runs exactly `iterations` iterations without the syndrome stop.
    pub fn run_fixed(&mut self, priors: &[ProbVector], iterations: usize) -> Result<DecodeResult> {
        self.run(priors, iterations, false)
    }

    /// Normalized `p_v^(0) prod_c p_cv` from the last run, one per symbol.
    pub fn posteriors(&self) -> Vec<ProbVector> {
        self.posteriors.chunks_exact(self.q).map(|c| ProbVector(c.to_vec())).collect()
    }

    fn run(&mut self, priors: &[ProbVector], l_max: usize, stop_on_codeword: bool) -> Result<DecodeResult> {
        let (n, q) = (self.code.n(), self.q);
        if priors.len() != n {
            return Err(Error::Length { expected: n, found: priors.len() });
        }
        for (v, p) in priors.iter().enumerate() {
            if p.len() != q {
                return Err(Error::Length { expected: q, found: p.len() });
            }
            self.priors[v * q..(v + 1) * q].copy_from_slice(p.as_slice());
        }
        // initialization: p_vc = p_v^(0), decision from the priors alone
        for v in 0..n {
            for e in self.code.col(v) {
                let idx = self.code.edge_index(*e);
                self.var_msgs[idx * q..(idx + 1) * q].copy_from_slice(&self.priors[v * q..(v + 1) * q]);
            }
        }
        self.posteriors.copy_from_slice(&self.priors);
        for v in 0..n {
            normalize_with_floor(&mut self.posteriors[v * q..(v + 1) * q]);
            self.decision[v] = argmax(&self.posteriors[v * q..(v + 1) * q]);
        }
        if stop_on_codeword && self.syndrome_is_zero() {
            return Ok(self.result(0, true));
        }
        for l in 1..=l_max {
            self.check_phase();
            self.variable_phase();
            if stop_on_codeword && self.syndrome_is_zero() {
                return Ok(self.result(l, true));
            }
        }
        let converged = self.syndrome_is_zero();
        Ok(self.result(l_max, converged))
    }

    fn result(&self, iterations: usize, converged: bool) -> DecodeResult {
        DecodeResult { symbols: self.decision.clone(), iterations, converged }
    }

    fn check_phase(&mut self) {
        let q = self.q;
        for r in 0..self.code.p() {
            let dc = self.code.row(r).len();
            let base = self.code.row_offset(r);
            let maps = &self.maps[base..base + dc];
            let spectra = &mut self.spectra[..dc * q];
            for (i, map) in maps.iter().enumerate() {
                let e = base + i;
                permute_into(&self.var_msgs[e * q..(e + 1) * q], map, &mut spectra[i * q..(i + 1) * q]);
            }
            check_update(
                spectra,
                maps,
                &mut self.chk_msgs[base * q..(base + dc) * q],
                &mut self.scratch,
                q,
            );
        }
    }

    fn variable_phase(&mut self) {
        let q = self.q;
        for v in 0..self.code.n() {
            let edges = self.code.col(v);
            let prior = &self.priors[v * q..(v + 1) * q];
            let post = &mut self.posteriors[v * q..(v + 1) * q];
            post.copy_from_slice(prior);
            for e in edges {
                let idx = self.code.edge_index(*e);
                let m = &self.chk_msgs[idx * q..(idx + 1) * q];
                post.iter_mut().zip(m).for_each(|(a, b)| *a *= b);
            }
            normalize_with_floor(post);
            self.decision[v] = argmax(post);

            for (i, target) in edges.iter().enumerate() {
                let t = self.code.edge_index(*target);
                let out = &mut self.var_msgs[t * q..(t + 1) * q];
                out.copy_from_slice(prior);
                for (j, other) in edges.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let o = self.code.edge_index(*other);
                    let m = &self.chk_msgs[o * q..(o + 1) * q];
                    out.iter_mut().zip(m).for_each(|(a, b)| *a *= b);
                }
                normalize_with_floor(out);
            }
        }
    }

    fn syndrome_is_zero(&self) -> bool {
        let f = self.field;
        self.code.rows().iter().all(|row| {
            row.iter()
                .fold(GfSymbol::ZERO, |acc, e| f.add(acc, f.mul(e.coeff, self.decision[e.col])))
                .is_zero()
        })
    }
}

/// One-shot decode; see [`BpDecoder::decode`].
pub fn decode(
    code: &ParityCheckMatrix,
    field: &FieldTable,
    priors: &[ProbVector],
    l_max: usize,
) -> Result<DecodeResult> {
    BpDecoder::new(code, field)?.decode(priors, l_max)
}
