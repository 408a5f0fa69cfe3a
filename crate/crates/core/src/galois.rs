//! GF(2^m) arithmetic over exp/log tables.
//!
//! A symbol is stored as the coefficient bit-vector of its polynomial-basis
//! representation: bit `i` of the value is the coefficient of `alpha^i`. With
//! `pi(alpha) = alpha^3 + alpha + 1` this gives `alpha^3 = 0b011`, i.e. the
//! tuple `(1, 1, 0)` when read lowest coefficient first.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default primitive polynomial for each supported degree, indexed by `m`.
///
/// Bit `i` of each entry is the coefficient of `x^i`.
const DEFAULT_POLYS: [u32; 17] = [
    0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

/// Element of a binary extension field. The field it belongs to is implied
/// by the [`FieldTable`] it is used with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct GfSymbol(u16);

impl GfSymbol {
    pub const ZERO: GfSymbol = GfSymbol(0);
    pub const ONE: GfSymbol = GfSymbol(1);

    /// Wraps a raw value without range checking. Use
    /// [`FieldTable::symbol`] when the value is untrusted.
    #[inline]
    pub const fn from_raw(value: u16) -> Self {
        GfSymbol(value)
    }

    #[inline]
    pub const fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Precomputed arithmetic for one GF(2^m).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldTable {
    m: u32,
    primitive_poly: u32,
    /// `exp[i] = alpha^i` for `i` in `0..2^m - 1`.
    exp: Vec<u16>,
    /// `log[x]` for nonzero `x`; `log[0]` is unused.
    log: Vec<u16>,
}

impl FieldTable {
    /// Builds the field from `pi`, rejecting polynomials that are not of
    /// degree `m` or not primitive.
    pub fn new(m: u32, primitive_poly: u32) -> Result<Self> {
        if !(2..=16).contains(&m) || primitive_poly >> m != 1 {
            return Err(Error::FieldDegree { m, poly: primitive_poly });
        }
        let size = 1u32 << m;
        let order = size - 1;
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = alloc::vec![0u16; size as usize];
        let mut x = 1u32;
        for i in 0..order {
            if x == 1 && i > 0 {
                return Err(Error::NotPrimitive { m, poly: primitive_poly, order: i });
            }
            if x == 0 {
                // reducible with factor x: alpha is nilpotent
                return Err(Error::NotPrimitive { m, poly: primitive_poly, order: 0 });
            }
            exp.push(x as u16);
            log[x as usize] = i as u16;
            x <<= 1;
            if x & size != 0 {
                x ^= primitive_poly;
            }
        }
        if x != 1 {
            return Err(Error::NotPrimitive { m, poly: primitive_poly, order: 0 });
        }
        Ok(FieldTable { m, primitive_poly, exp, log })
    }

    /// Field with the default primitive polynomial for `m`
    /// (`x^8 + x^4 + x^3 + x^2 + 1` for `m = 8`).
    pub fn with_default_poly(m: u32) -> Result<Self> {
        let poly = default_primitive_poly(m).ok_or(Error::FieldDegree { m, poly: 0 })?;
        Self::new(m, poly)
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn primitive_poly(&self) -> u32 {
        self.primitive_poly
    }

    /// Number of field elements, `2^m`.
    #[inline]
    pub fn size(&self) -> usize {
        1usize << self.m
    }

    /// Order of the multiplicative group, `2^m - 1`.
    #[inline]
    pub fn order(&self) -> usize {
        self.exp.len()
    }

    pub fn exp_table(&self) -> &[u16] {
        &self.exp
    }

    pub fn log_table(&self) -> &[u16] {
        &self.log
    }

    /// Checked conversion from a raw value.
    pub fn symbol(&self, value: u32) -> Result<GfSymbol> {
        if (value as usize) < self.size() {
            Ok(GfSymbol(value as u16))
        } else {
            Err(Error::InvalidSymbol { value, m: self.m })
        }
    }

    /// `alpha^k`, with `k` taken modulo the group order.
    #[inline]
    pub fn alpha_pow(&self, k: usize) -> GfSymbol {
        GfSymbol(self.exp[k % self.order()])
    }

    /// Discrete log of a nonzero symbol.
    #[inline]
    pub fn log_of(&self, a: GfSymbol) -> Option<usize> {
        if a.is_zero() {
            None
        } else {
            Some(self.log[a.index()] as usize)
        }
    }

    #[inline]
    pub fn add(&self, a: GfSymbol, b: GfSymbol) -> GfSymbol {
        GfSymbol(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: GfSymbol, b: GfSymbol) -> GfSymbol {
        if a.is_zero() || b.is_zero() {
            return GfSymbol::ZERO;
        }
        let mut k = self.log[a.index()] as usize + self.log[b.index()] as usize;
        if k >= self.order() {
            k -= self.order();
        }
        GfSymbol(self.exp[k])
    }

    pub fn inv(&self, a: GfSymbol) -> Result<GfSymbol> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let k = self.log[a.index()] as usize;
        Ok(GfSymbol(self.exp[(self.order() - k) % self.order()]))
    }

    /// `a / b` for nonzero `b`.
    pub fn div(&self, a: GfSymbol, b: GfSymbol) -> Result<GfSymbol> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `L(x)`: the `m` polynomial-basis coefficients, lowest order first.
    pub fn bits_of(&self, x: GfSymbol) -> Vec<u8> {
        (0..self.m).map(|i| ((x.0 >> i) & 1) as u8).collect()
    }

    /// Inverse of [`bits_of`](Self::bits_of).
    pub fn symbol_from_bits(&self, bits: &[u8]) -> Result<GfSymbol> {
        if bits.len() != self.m as usize {
            return Err(Error::Length { expected: self.m as usize, found: bits.len() });
        }
        let mut v = 0u32;
        for (i, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(Error::InvalidSymbol { value: b as u32, m: 1 });
            }
            v |= (b as u32) << i;
        }
        Ok(GfSymbol(v as u16))
    }
}

pub fn default_primitive_poly(m: u32) -> Option<u32> {
    DEFAULT_POLYS.get(m as usize).copied().filter(|&p| p != 0)
}
