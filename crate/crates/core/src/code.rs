//! Regular `(2, dc)` parity-check matrices over GF(2^m), systematic
//! encoding and syndrome evaluation.

use alloc::collections::BTreeSet;
use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::galois::{FieldTable, GfSymbol};

/// Column weight of every code built by [`construct_code`].
pub const COLUMN_WEIGHT: usize = 2;

const CONSTRUCTION_RETRIES: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams {
    /// Codeword length in symbols.
    pub n: usize,
    /// Row weight.
    pub dc: usize,
    /// Field degree.
    pub m: u32,
    pub seed: u64,
}

impl CodeParams {
    pub fn new(n: usize, dc: usize, m: u32, seed: u64) -> Result<Self> {
        let p = CodeParams { n, dc, m, seed };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for a code of `n_bits` coded bits and rate `1 - 2/dc`.
    pub fn from_bits(n_bits: usize, dc: usize, m: u32, seed: u64) -> Result<Self> {
        if m == 0 || n_bits % m as usize != 0 {
            return Err(Error::CodeParams(format!(
                "{n_bits} bits is not a whole number of {m}-bit symbols"
            )));
        }
        Self::new(n_bits / m as usize, dc, m, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dc <= COLUMN_WEIGHT {
            return Err(Error::CodeParams(format!("row weight {} must exceed 2", self.dc)));
        }
        if self.n == 0 || (self.n * COLUMN_WEIGHT) % self.dc != 0 {
            return Err(Error::CodeParams(format!(
                "N*dv = {} is not divisible by dc = {}",
                self.n * COLUMN_WEIGHT,
                self.dc
            )));
        }
        if self.n < self.dc {
            return Err(Error::CodeParams(format!("N = {} is shorter than dc = {}", self.n, self.dc)));
        }
        Ok(())
    }

    pub fn dv(&self) -> usize {
        COLUMN_WEIGHT
    }

    /// Number of parity checks `P`.
    pub fn checks(&self) -> usize {
        self.n * COLUMN_WEIGHT / self.dc
    }

    /// Number of information symbols `K`.
    pub fn info_len(&self) -> usize {
        self.n - self.checks()
    }

    /// `K / N` as an exact fraction (numerator, denominator).
    pub fn rate(&self) -> (usize, usize) {
        (self.info_len(), self.n)
    }

    pub fn codeword_bits(&self) -> usize {
        self.n * self.m as usize
    }

    pub fn info_bits(&self) -> usize {
        self.info_len() * self.m as usize
    }
}

/// One nonzero entry of a parity-check row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub col: usize,
    pub coeff: GfSymbol,
}

/// Position of an edge: the row it lives in and its slot within that row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRef {
    pub row: usize,
    pub slot: usize,
}

/// Sparse `P x N` parity-check matrix with row and column adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    m: u32,
    n: usize,
    seed: u64,
    rows: Vec<Vec<Entry>>,
    cols: Vec<Vec<EdgeRef>>,
    row_offsets: Vec<usize>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from explicit rows. Every coefficient must be a
    /// nonzero element of GF(2^m) and every column index must be `< n`;
    /// a column may appear at most once per row.
    pub fn from_rows(m: u32, n: usize, rows: Vec<Vec<Entry>>, seed: u64) -> Result<Self> {
        let size = 1usize << m;
        let mut cols = vec![Vec::new(); n];
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut offset = 0;
        for (r, row) in rows.iter().enumerate() {
            row_offsets.push(offset);
            offset += row.len();
            for (slot, e) in row.iter().enumerate() {
                if e.col >= n {
                    return Err(Error::Dimension(format!(
                        "row {r} references column {} of {n}",
                        e.col
                    )));
                }
                if e.coeff.is_zero() || e.coeff.index() >= size {
                    return Err(Error::InvalidSymbol { value: e.coeff.value() as u32, m });
                }
                if row[..slot].iter().any(|o| o.col == e.col) {
                    return Err(Error::Dimension(format!(
                        "row {r} lists column {} twice",
                        e.col
                    )));
                }
                cols[e.col].push(EdgeRef { row: r, slot });
            }
        }
        row_offsets.push(offset);
        Ok(ParityCheckMatrix { m, n, seed, rows, cols, row_offsets })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Number of columns (codeword length in symbols).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of rows.
    pub fn p(&self) -> usize {
        self.rows.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Largest row weight; equal to every row weight for regular codes.
    pub fn dc(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn rows(&self) -> &[Vec<Entry>] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &[Entry] {
        &self.rows[r]
    }

    pub fn col(&self, c: usize) -> &[EdgeRef] {
        &self.cols[c]
    }

    pub fn num_edges(&self) -> usize {
        *self.row_offsets.last().unwrap_or(&0)
    }

    /// Flat edge index of `(row, slot)`; edges are numbered row by row.
    #[inline]
    pub fn edge_index(&self, e: EdgeRef) -> usize {
        self.row_offsets[e.row] + e.slot
    }

    pub fn row_offset(&self, r: usize) -> usize {
        self.row_offsets[r]
    }

    pub fn is_regular(&self, dv: usize, dc: usize) -> bool {
        self.rows.iter().all(|r| r.len() == dc) && self.cols.iter().all(|c| c.len() == dv)
    }

    /// Length of the shortest cycle in the Tanner graph, `None` if acyclic.
    pub fn girth(&self) -> Option<usize> {
        // nodes: columns 0..n, rows n..n+p
        let total = self.n + self.p();
        let neighbours = |u: usize| -> Vec<usize> {
            if u < self.n {
                self.cols[u].iter().map(|e| self.n + e.row).collect()
            } else {
                self.rows[u - self.n].iter().map(|e| e.col).collect()
            }
        };
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; total];
        let mut parent = vec![usize::MAX; total];
        let mut queue = VecDeque::new();
        for start in 0..total {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[start] = 0;
            parent[start] = usize::MAX;
            queue.clear();
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                if best.is_some_and(|b| 2 * dist[u] + 1 >= b) {
                    break;
                }
                for w in neighbours(u) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    } else if parent[u] != w {
                        let len = dist[u] + dist[w] + 1;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
        }
        best
    }

    /// Exhaustive scan for two rows sharing two columns.
    pub fn has_four_cycle(&self) -> bool {
        let mut pairs = BTreeSet::new();
        for col in &self.cols {
            for (i, a) in col.iter().enumerate() {
                for b in &col[i + 1..] {
                    let key = (a.row.min(b.row), a.row.max(b.row));
                    if !pairs.insert(key) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Builds a `(2, dc)`-regular matrix free of 4-cycles by progressive edge
/// placement, retrying with fresh randomness on dead ends.
///
/// With column weight 2 each column is an edge between two checks, so a
/// 4-cycle is exactly two columns joining the same pair of checks. The first
/// check of a column is one with the most free sockets; the second is the
/// check farthest from it in the graph built so far.
pub fn construct_code(params: &CodeParams, field: &FieldTable) -> Result<ParityCheckMatrix> {
    params.validate()?;
    if field.m() != params.m {
        return Err(Error::CodeParams(format!(
            "field degree {} does not match code degree {}",
            field.m(),
            params.m
        )));
    }
    let mut last = None;
    for attempt in 0..CONSTRUCTION_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(attempt);
        // short codes where greedy growth paints itself into a corner get
        // a random pairing repaired by edge swaps instead
        let placed = if attempt < CONSTRUCTION_RETRIES / 2 {
            place_edges(params, &mut rng)
        } else {
            pair_and_repair(params, &mut rng)
        };
        match placed {
            Ok(pairs) => {
                let mut rows = vec![Vec::with_capacity(params.dc); params.checks()];
                for (col, (a, b)) in pairs.into_iter().enumerate() {
                    for r in [a, b] {
                        let coeff = GfSymbol::from_raw(rng.random_range(1..field.size()) as u16);
                        rows[r].push(Entry { col, coeff });
                    }
                }
                return ParityCheckMatrix::from_rows(params.m, params.n, rows, params.seed);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(Error::Construction(format!(
        "no 4-cycle-free (2, {})-regular placement for N = {} after {CONSTRUCTION_RETRIES} attempts: {}",
        params.dc,
        params.n,
        last.unwrap_or_default()
    )))
}

fn place_edges(params: &CodeParams, rng: &mut ChaCha8Rng) -> core::result::Result<Vec<(usize, usize)>, alloc::string::String> {
    let p = params.checks();
    let mut free = vec![params.dc; p];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); p];
    let mut dist = vec![usize::MAX; p];
    let mut queue = VecDeque::new();
    let mut pairs = Vec::with_capacity(params.n);
    let mut candidates = Vec::new();

    for col in 0..params.n {
        let most = *free.iter().max().unwrap();
        candidates.clear();
        candidates.extend((0..p).filter(|&c| free[c] == most));
        let first = candidates[rng.random_range(0..candidates.len())];

        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[first] = 0;
        queue.clear();
        queue.push_back(first);
        while let Some(c) = queue.pop_front() {
            for &nb in &adj[c] {
                if dist[nb] == usize::MAX {
                    dist[nb] = dist[c] + 1;
                    queue.push_back(nb);
                }
            }
        }

        let eligible = |c: usize| c != first && free[c] > 0 && dist[c] != 1;
        let key = |c: usize| (dist[c], free[c]);
        let best = (0..p).filter(|&c| eligible(c)).map(key).max();
        let Some(best) = best else {
            return Err(format!("column {col}: every open check already neighbours check {first}"));
        };
        candidates.clear();
        candidates.extend((0..p).filter(|&c| eligible(c) && key(c) == best));
        let second = candidates[rng.random_range(0..candidates.len())];

        free[first] -= 1;
        free[second] -= 1;
        adj[first].push(second);
        adj[second].push(first);
        pairs.push(if first < second { (first, second) } else { (second, first) });
    }
    Ok(pairs)
}

/// Random socket pairing followed by double-edge swaps that remove
/// repeated check pairs (4-cycles) and self-pairs.
fn pair_and_repair(params: &CodeParams, rng: &mut ChaCha8Rng) -> core::result::Result<Vec<(usize, usize)>, alloc::string::String> {
    let p = params.checks();
    let mut sockets: Vec<usize> = (0..p).flat_map(|c| core::iter::repeat_n(c, params.dc)).collect();
    for i in (1..sockets.len()).rev() {
        sockets.swap(i, rng.random_range(0..=i));
    }
    let mut pairs: Vec<(usize, usize)> = sockets.chunks(2).map(|s| (s[0].min(s[1]), s[0].max(s[1]))).collect();
    let n = pairs.len();
    let mut count = BTreeSet::new();
    let bad = |pairs: &[(usize, usize)], count: &mut BTreeSet<(usize, usize)>| -> Vec<usize> {
        count.clear();
        let mut out = Vec::new();
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if a == b || !count.insert((a, b)) {
                out.push(i);
            }
        }
        out
    };
    for _ in 0..200 * n {
        let faults = bad(&pairs, &mut count);
        if faults.is_empty() {
            return Ok(pairs);
        }
        let i = faults[rng.random_range(0..faults.len())];
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let ((a, b), (c, d)) = (pairs[i], pairs[j]);
        let (x, y) = if rng.random::<bool>() { ((a, c), (b, d)) } else { ((a, d), (b, c)) };
        let norm = |(u, v): (usize, usize)| (u.min(v), u.max(v));
        let (old_i, old_j) = (pairs[i], pairs[j]);
        pairs[i] = norm(x);
        pairs[j] = norm(y);
        if bad(&pairs, &mut count).len() > faults.len() {
            pairs[i] = old_i;
            pairs[j] = old_j;
        }
    }
    Err(format!("edge swaps left repeated check pairs for N = {}", params.n))
}

/// Systematic encoder derived from the reduced row-echelon form of `A`.
///
/// Parity symbol `i` (at column `parity_positions[i]`) equals
/// `sum_j generator[i][j] * info[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderPlan {
    n: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    /// Row-major `P x K`.
    generator: Vec<GfSymbol>,
}

impl EncoderPlan {
    pub fn new(a: &ParityCheckMatrix, field: &FieldTable) -> Result<Self> {
        let (p, n) = (a.p(), a.n());
        let mut dense = vec![GfSymbol::ZERO; p * n];
        for (r, row) in a.rows().iter().enumerate() {
            for e in row {
                dense[r * n + e.col] = e.coeff;
            }
        }

        let mut pivots = Vec::with_capacity(p);
        let mut rank = 0;
        for col in 0..n {
            if rank == p {
                break;
            }
            let Some(piv) = (rank..p).find(|&r| !dense[r * n + col].is_zero()) else {
                continue;
            };
            if piv != rank {
                for j in 0..n {
                    dense.swap(piv * n + j, rank * n + j);
                }
            }
            let scale = field.inv(dense[rank * n + col])?;
            for j in col..n {
                dense[rank * n + j] = field.mul(dense[rank * n + j], scale);
            }
            let pivot_row: Vec<(usize, GfSymbol)> = (col..n)
                .map(|j| (j, dense[rank * n + j]))
                .filter(|(_, v)| !v.is_zero())
                .collect();
            for r in 0..p {
                if r == rank {
                    continue;
                }
                let factor = dense[r * n + col];
                if factor.is_zero() {
                    continue;
                }
                for &(j, v) in &pivot_row {
                    let idx = r * n + j;
                    dense[idx] = field.add(dense[idx], field.mul(factor, v));
                }
            }
            pivots.push(col);
            rank += 1;
        }
        if rank < p {
            return Err(Error::RankDeficient { rank, rows: p });
        }

        let mut is_pivot = vec![false; n];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let k = info_positions.len();
        let mut generator = Vec::with_capacity(p * k);
        for r in 0..p {
            // x_pivot + sum_free R[r][j] x_j = 0, and -1 = 1 in characteristic 2
            generator.extend(info_positions.iter().map(|&j| dense[r * n + j]));
        }
        Ok(EncoderPlan { n, info_positions, parity_positions: pivots, generator })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    /// Codeword positions that carry the information symbols, in order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn parity_positions(&self) -> &[usize] {
        &self.parity_positions
    }

    pub fn encode(&self, field: &FieldTable, info: &[GfSymbol]) -> Result<Vec<GfSymbol>> {
        let k = self.k();
        if info.len() != k {
            return Err(Error::Length { expected: k, found: info.len() });
        }
        let mut cw = vec![GfSymbol::ZERO; self.n];
        for (&pos, &s) in self.info_positions.iter().zip(info) {
            cw[pos] = s;
        }
        // log-domain info once; each parity is then exp-table lookups only
        let info_logs: Vec<Option<usize>> = info.iter().map(|&s| field.log_of(s)).collect();
        let order = field.order();
        for (r, &pos) in self.parity_positions.iter().enumerate() {
            let row = &self.generator[r * k..(r + 1) * k];
            let mut acc = 0u16;
            for (g, l) in row.iter().zip(&info_logs) {
                if let (Some(lg), Some(li)) = (field.log_of(*g), *l) {
                    let mut e = lg + li;
                    if e >= order {
                        e -= order;
                    }
                    acc ^= field.exp_table()[e];
                }
            }
            cw[pos] = GfSymbol::from_raw(acc);
        }
        Ok(cw)
    }

    /// Information symbols read back from a codeword.
    pub fn extract_info(&self, codeword: &[GfSymbol]) -> Vec<GfSymbol> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }
}

/// Builds a code and its encoder, moving to the next seed when the matrix
/// is rank deficient. The returned matrix records the seed actually used.
pub fn construct_full_rank(
    params: &CodeParams,
    field: &FieldTable,
    max_reseeds: u64,
) -> Result<(ParityCheckMatrix, EncoderPlan)> {
    let mut last = None;
    for i in 0..=max_reseeds {
        let p = CodeParams { seed: params.seed.wrapping_add(i), ..*params };
        let a = construct_code(&p, field)?;
        match EncoderPlan::new(&a, field) {
            Ok(plan) => return Ok((a, plan)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or(Error::Construction("no full-rank code found".into())))
}

/// `A x^T`; entry `i` is `sum_j a_ij x_j`.
pub fn syndrome(a: &ParityCheckMatrix, field: &FieldTable, x: &[GfSymbol]) -> Result<Vec<GfSymbol>> {
    if x.len() != a.n() {
        return Err(Error::Length { expected: a.n(), found: x.len() });
    }
    Ok(a.rows()
        .iter()
        .map(|row| {
            row.iter()
                .fold(GfSymbol::ZERO, |acc, e| field.add(acc, field.mul(e.coeff, x[e.col])))
        })
        .collect())
}

/// `true` when `A x^T = 0`; stops at the first unsatisfied row.
pub fn is_codeword(a: &ParityCheckMatrix, field: &FieldTable, x: &[GfSymbol]) -> bool {
    x.len() == a.n()
        && a.rows().iter().all(|row| {
            row.iter()
                .fold(GfSymbol::ZERO, |acc, e| field.add(acc, field.mul(e.coeff, x[e.col])))
                .is_zero()
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf256() -> FieldTable {
        FieldTable::with_default_poly(8).unwrap()
    }

    fn random_info(field: &FieldTable, k: usize, rng: &mut ChaCha8Rng) -> Vec<GfSymbol> {
        (0..k).map(|_| GfSymbol::from_raw(rng.random_range(0..field.size()) as u16)).collect()
    }

    #[test]
    fn reference_code_sizes() {
        let p = CodeParams::from_bits(3456, 4, 8, 1).unwrap();
        assert_eq!((p.n, p.checks(), p.info_len()), (432, 216, 216));
        assert_eq!(p.rate(), (216, 432));
        assert_eq!(p.codeword_bits(), 3456);

        let p = CodeParams::from_bits(2400, 3, 8, 1).unwrap();
        assert_eq!((p.n, p.checks(), p.info_len()), (300, 200, 100));
        assert_eq!(p.codeword_bits(), 2400);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(CodeParams::new(7, 4, 8, 0).is_err());
        assert!(CodeParams::new(6, 2, 8, 0).is_err());
        assert!(CodeParams::from_bits(3457, 4, 8, 0).is_err());
        assert!(CodeParams::new(0, 4, 8, 0).is_err());
    }

    #[test]
    fn small_code_counts() {
        // N = 6, dc = 4: 3 rows; the 3 pairs of rows are all used twice,
        // so girth > 4 is impossible and construction must report it.
        let f = gf256();
        let p = CodeParams::new(6, 4, 8, 3).unwrap();
        assert_eq!(p.checks(), 3);
        let err = construct_code(&p, &f).unwrap_err();
        assert!(matches!(err, Error::Construction(_)), "{err}");

        let p = CodeParams::new(12, 4, 8, 3).unwrap();
        let a = construct_code(&p, &f).unwrap();
        assert_eq!(a.p(), 6);
        assert!(a.is_regular(2, 4));
        assert!(!a.has_four_cycle());
        assert_eq!(a.girth(), Some(6));
    }

    #[test]
    fn constructed_codes_are_regular_and_4_cycle_free() {
        let f = gf256();
        for (bits, dc) in [(3456, 4), (2400, 3), (2400, 4), (864, 4), (864, 3)] {
            let p = CodeParams::from_bits(bits, dc, 8, 7).unwrap();
            let a = construct_code(&p, &f).unwrap();
            assert_eq!(a.p(), p.checks());
            assert!(a.is_regular(2, dc), "{bits} {dc}");
            assert!(!a.has_four_cycle(), "{bits} {dc}");
            assert!(a.girth().unwrap() >= 8, "{bits} {dc}");
            assert!(a.rows().iter().flatten().all(|e| !e.coeff.is_zero()));
            // K/N = 1 - dv/dc exactly
            assert_eq!(p.info_len() * dc, p.n * (dc - 2));
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let f = gf256();
        let p = CodeParams::from_bits(864, 4, 8, 11).unwrap();
        assert_eq!(construct_code(&p, &f).unwrap(), construct_code(&p, &f).unwrap());
        let q = CodeParams { seed: 12, ..p };
        assert_ne!(construct_code(&p, &f).unwrap(), construct_code(&q, &f).unwrap());
    }

    #[test]
    fn coefficients_cover_the_nonzero_elements() {
        let f = gf256();
        let p = CodeParams::from_bits(3456, 4, 8, 5).unwrap();
        let a = construct_code(&p, &f).unwrap();
        let mut counts = [0usize; 256];
        for e in a.rows().iter().flatten() {
            counts[e.coeff.index()] += 1;
        }
        assert_eq!(counts[0], 0);
        // 864 draws over 255 values: expect ~3.4 each, a handful of zeros at most
        assert!(counts[1..].iter().filter(|&&c| c > 0).count() > 230);
    }

    #[test]
    fn four_cycle_detector_finds_planted_cycle() {
        let c = |v| GfSymbol::from_raw(v);
        let rows = vec![
            vec![Entry { col: 0, coeff: c(1) }, Entry { col: 1, coeff: c(2) }],
            vec![Entry { col: 0, coeff: c(3) }, Entry { col: 1, coeff: c(1) }],
        ];
        let a = ParityCheckMatrix::from_rows(2, 2, rows, 0).unwrap();
        assert!(a.has_four_cycle());
        assert_eq!(a.girth(), Some(4));
    }

    #[test]
    fn girth_of_small_graphs() {
        let e = |col| Entry { col, coeff: GfSymbol::ONE };
        // three checks in a triangle over three columns
        let tri = ParityCheckMatrix::from_rows(2, 3, vec![vec![e(0), e(1)], vec![e(1), e(2)], vec![e(2), e(0)]], 0).unwrap();
        assert_eq!(tri.girth(), Some(6));
        let path = ParityCheckMatrix::from_rows(2, 4, vec![vec![e(0), e(1)], vec![e(1), e(2)], vec![e(2), e(3)]], 0).unwrap();
        assert_eq!(path.girth(), None);
    }

    #[test]
    fn from_rows_validates() {
        let c = |v| GfSymbol::from_raw(v);
        assert!(ParityCheckMatrix::from_rows(2, 2, vec![vec![Entry { col: 2, coeff: c(1) }]], 0).is_err());
        assert!(ParityCheckMatrix::from_rows(2, 2, vec![vec![Entry { col: 0, coeff: c(0) }]], 0).is_err());
        assert!(ParityCheckMatrix::from_rows(2, 2, vec![vec![Entry { col: 0, coeff: c(4) }]], 0).is_err());
        let dup = vec![vec![Entry { col: 0, coeff: c(1) }, Entry { col: 0, coeff: c(2) }]];
        assert!(ParityCheckMatrix::from_rows(2, 2, dup, 0).is_err());
    }

    #[test]
    fn zero_info_gives_zero_codeword() {
        let f = gf256();
        let p = CodeParams::from_bits(864, 4, 8, 2).unwrap();
        let (a, plan) = construct_full_rank(&p, &f, 8).unwrap();
        let cw = plan.encode(&f, &vec![GfSymbol::ZERO; plan.k()]).unwrap();
        assert!(cw.iter().all(|s| s.is_zero()));
        assert!(syndrome(&a, &f, &cw).unwrap().iter().all(|s| s.is_zero()));
    }

    #[test]
    fn encoding_is_linear_and_systematic() {
        let f = gf256();
        let p = CodeParams::from_bits(864, 3, 8, 2).unwrap();
        let (a, plan) = construct_full_rank(&p, &f, 8).unwrap();
        assert_eq!(plan.k(), p.info_len());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let u = random_info(&f, plan.k(), &mut rng);
            let v = random_info(&f, plan.k(), &mut rng);
            let w: Vec<GfSymbol> = u.iter().zip(&v).map(|(a, b)| f.add(*a, *b)).collect();
            let (cu, cv, cw) = (
                plan.encode(&f, &u).unwrap(),
                plan.encode(&f, &v).unwrap(),
                plan.encode(&f, &w).unwrap(),
            );
            let sum: Vec<GfSymbol> = cu.iter().zip(&cv).map(|(a, b)| f.add(*a, *b)).collect();
            assert_eq!(sum, cw);
            assert_eq!(plan.extract_info(&cu), u);
            assert!(is_codeword(&a, &f, &cu));
        }
    }

    /// Row-by-row evaluation written independently of `syndrome`.
    fn brute_syndrome(a: &ParityCheckMatrix, f: &FieldTable, x: &[GfSymbol]) -> Vec<GfSymbol> {
        let mut dense = vec![vec![GfSymbol::ZERO; a.n()]; a.p()];
        for (r, row) in a.rows().iter().enumerate() {
            for e in row {
                dense[r][e.col] = e.coeff;
            }
        }
        dense
            .iter()
            .map(|row| {
                let mut acc = 0u16;
                for (j, &c) in row.iter().enumerate() {
                    acc ^= f.mul(c, x[j]).value();
                }
                GfSymbol::from_raw(acc)
            })
            .collect()
    }

    #[test]
    fn syndrome_matches_dense_evaluation() {
        let f = gf256();
        let p = CodeParams::from_bits(864, 4, 8, 4).unwrap();
        let (a, plan) = construct_full_rank(&p, &f, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cw = plan.encode(&f, &random_info(&f, plan.k(), &mut rng)).unwrap();
        assert!(brute_syndrome(&a, &f, &cw).iter().all(|s| s.is_zero()));
        let noise = random_info(&f, a.n(), &mut rng);
        assert_eq!(syndrome(&a, &f, &noise).unwrap(), brute_syndrome(&a, &f, &noise));
        assert!(syndrome(&a, &f, &noise[1..]).is_err());
    }

    #[test]
    fn single_symbol_corruption_hits_its_rows() {
        let f = gf256();
        let p = CodeParams::from_bits(864, 4, 8, 4).unwrap();
        let (a, plan) = construct_full_rank(&p, &f, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cw = plan.encode(&f, &random_info(&f, plan.k(), &mut rng)).unwrap();
        cw[17] = f.add(cw[17], GfSymbol::from_raw(0x5A));
        let s = syndrome(&a, &f, &cw).unwrap();
        for e in a.col(17) {
            assert!(!s[e.row].is_zero());
        }
        assert_eq!(s.iter().filter(|x| !x.is_zero()).count(), 2);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let c = |v| GfSymbol::from_raw(v);
        // second row is alpha times the first
        let rows = vec![
            vec![Entry { col: 0, coeff: c(1) }, Entry { col: 1, coeff: c(3) }],
            vec![Entry { col: 0, coeff: c(2) }, Entry { col: 1, coeff: c(1) }],
        ];
        let f = FieldTable::with_default_poly(2).unwrap();
        let a = ParityCheckMatrix::from_rows(2, 3, rows, 0).unwrap();
        assert_eq!(EncoderPlan::new(&a, &f), Err(Error::RankDeficient { rank: 1, rows: 2 }));
    }
}
