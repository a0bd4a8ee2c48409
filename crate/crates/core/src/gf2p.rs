//! Arithmetic in GF(2^p) for 2 <= p <= 16 together with the companion-matrix
//! embedding of the field into p x p binary matrices.
//!
//! Elements are stored in coefficient encoding: bit `j` of the integer is the
//! coefficient of alpha^j. The companion matrix of an element `x` acts on
//! such coefficient vectors as multiplication by `x`.

use std::fmt;

use crate::error::{Error, Result};

/// Low coefficient bits (leading x^p term implicit) of the default primitive
/// polynomial for each degree, indexed by `p`.
const DEFAULT_POLYS: [u32; 17] = [
    0, 0, 0x3,    // x^2 + x + 1
    0x3,          // x^3 + x + 1
    0x3,          // x^4 + x + 1
    0x5,          // x^5 + x^2 + 1
    0x3,          // x^6 + x + 1
    0x3,          // x^7 + x + 1
    0x1d,         // x^8 + x^4 + x^3 + x^2 + 1
    0x11,         // x^9 + x^4 + 1
    0x9,          // x^10 + x^3 + 1
    0x5,          // x^11 + x^2 + 1
    0x53,         // x^12 + x^6 + x^4 + x + 1
    0x1b,         // x^13 + x^4 + x^3 + x + 1
    0x443,        // x^14 + x^10 + x^6 + x + 1
    0x3,          // x^15 + x + 1
    0x100b,       // x^16 + x^12 + x^3 + x + 1
];

pub const MIN_DEGREE: u32 = 2;
pub const MAX_DEGREE: u32 = 16;

/// Default primitive polynomial (low bits) for degree `p`.
pub fn default_poly(p: u32) -> Result<u32> {
    if !(MIN_DEGREE..=MAX_DEGREE).contains(&p) {
        return Err(Error::DegreeOutOfRange(p));
    }
    Ok(DEFAULT_POLYS[p as usize])
}

/// An element of GF(2^p) in coefficient encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(pub u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

/// GF(2^p) defined by a primitive polynomial, with log/antilog tables.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: u32,
    poly: u32,
    // exp[i] = alpha^i for i in [0, 2(q-1)) so products skip a modulo
    exp: Vec<u16>,
    // log[0] is unused
    log: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

impl FieldSpec {
    /// Builds GF(2^p). `poly` holds the coefficients pi_0..pi_{p-1}; a mask
    /// that also carries the leading bit `1 << p` is accepted and stripped.
    /// `None` selects the built-in default for `p`.
    pub fn new(p: u32, poly: Option<u32>) -> Result<Self> {
        let default = default_poly(p)?;
        let q = 1u32 << p;
        let mut poly = poly.unwrap_or(default);
        if poly >= q {
            if poly >> p == 1 {
                poly &= q - 1;
            } else {
                return Err(Error::NonPrimitivePolynomial { p, poly });
            }
        }
        let order = q - 1;
        let mut exp = Vec::with_capacity(2 * order as usize);
        let mut log = vec![u32::MAX; q as usize];
        let mut x = 1u32;
        for i in 0..order {
            if log[x as usize] != u32::MAX {
                // x has returned to an earlier power before reaching order q - 1
                return Err(Error::NonPrimitivePolynomial { p, poly });
            }
            log[x as usize] = i;
            exp.push(x as u16);
            x <<= 1;
            if x & q != 0 {
                x = (x ^ q) ^ poly;
            }
            if x == 0 {
                return Err(Error::NonPrimitivePolynomial { p, poly });
            }
        }
        if x != 1 {
            return Err(Error::NonPrimitivePolynomial { p, poly });
        }
        let first: Vec<u16> = exp.clone();
        exp.extend_from_slice(&first);
        Ok(FieldSpec { p, poly, exp, log })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Field size 2^p.
    #[inline]
    pub fn q(&self) -> usize {
        1usize << self.p
    }

    /// Multiplicative group order 2^p - 1.
    #[inline]
    pub fn order(&self) -> u32 {
        (1u32 << self.p) - 1
    }

    /// Low coefficient bits of the primitive polynomial.
    #[inline]
    pub fn poly(&self) -> u32 {
        self.poly
    }

    pub fn exp_table(&self) -> &[u16] {
        &self.exp[..self.order() as usize]
    }

    pub fn alpha(&self) -> FieldElement {
        FieldElement(2)
    }

    /// alpha^i, with `i` taken modulo 2^p - 1.
    #[inline]
    pub fn exp(&self, i: i64) -> FieldElement {
        let k = i.rem_euclid(self.order() as i64) as usize;
        FieldElement(self.exp[k])
    }

    pub fn log(&self, x: FieldElement) -> Result<u32> {
        if x.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.log[x.0 as usize])
    }

    pub fn contains(&self, x: FieldElement) -> bool {
        (x.0 as usize) < self.q()
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.is_zero() || b.is_zero() {
            return FieldElement::ZERO;
        }
        let k = self.log[a.0 as usize] + self.log[b.0 as usize];
        FieldElement(self.exp[k as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let l = self.log[a.0 as usize];
        Ok(FieldElement(self.exp[((self.order() - l) % self.order()) as usize]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, e: i64) -> Result<FieldElement> {
        if a.is_zero() {
            return match e {
                0 => Ok(FieldElement::ONE),
                e if e > 0 => Ok(FieldElement::ZERO),
                _ => Err(Error::DivisionByZero),
            };
        }
        let l = self.log[a.0 as usize] as i64;
        Ok(self.exp(l * e))
    }

    /// The image A(x): column j is the coefficient vector of x * alpha^j.
    pub fn companion(&self, x: FieldElement) -> BitMatrix {
        let p = self.p as usize;
        let mut m = BitMatrix::zeros(p, p);
        for j in 0..p {
            let col = self.mul(x, FieldElement(1 << j));
            for i in 0..p {
                if (col.0 >> i) & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// A(x) transposed, the block map used for the D side.
    pub fn companion_transpose(&self, x: FieldElement) -> BitMatrix {
        self.companion(x).transpose()
    }
}

/// Dense binary matrix with bit-packed rows; arithmetic is over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '.' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            words,
            bits: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &b) in r.iter().enumerate() {
                m.set(i, j, b & 1 == 1);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.bits[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.bits[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    #[inline]
    pub fn toggle(&mut self, r: usize, c: usize) {
        self.bits[r * self.words + c / 64] ^= 1 << (c % 64);
    }

    fn row_words(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words..(r + 1) * self.words]
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Entrywise sum over GF(2).
    pub fn xor(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect();
        BitMatrix { bits, ..*self }
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let src = other.row_words(k);
                    let dst = &mut out.bits[r * out.words..(r + 1) * out.words];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d ^= s;
                    }
                }
            }
        }
        out
    }

    /// Product with a column vector packed into the low `cols` bits.
    pub fn mul_vec(&self, v: u64) -> u64 {
        assert!(self.cols <= 64);
        let mut out = 0u64;
        for r in 0..self.rows {
            if (self.bits[r * self.words] & v).count_ones() & 1 == 1 {
                out |= 1 << r;
            }
        }
        out
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..m.cols {
            let Some(piv) = (rank..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            if piv != rank {
                for w in 0..m.words {
                    m.bits.swap(piv * m.words + w, rank * m.words + w);
                }
            }
            for r in 0..m.rows {
                if r != rank && m.get(r, c) {
                    for w in 0..m.words {
                        let s = m.bits[rank * m.words + w];
                        m.bits[r * m.words + w] ^= s;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }
}

/// A p x p binary matrix applied to p-bit symbols, stored as column masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolMap {
    columns: Vec<u32>,
}

impl SymbolMap {
    pub fn from_matrix(m: &BitMatrix) -> Self {
        assert!(m.rows() <= 32 && m.cols() <= 32);
        let columns = (0..m.cols())
            .map(|c| {
                (0..m.rows())
                    .filter(|&r| m.get(r, c))
                    .fold(0u32, |acc, r| acc | (1 << r))
            })
            .collect();
        SymbolMap { columns }
    }

    #[inline]
    pub fn apply(&self, v: u32) -> u32 {
        let mut out = 0;
        let mut rest = v;
        while rest != 0 {
            let j = rest.trailing_zeros();
            out ^= self.columns[j as usize];
            rest &= rest - 1;
        }
        out
    }

    /// `table[x] = M x` for every x in [0, 2^cols).
    pub fn table(&self) -> Vec<u16> {
        let q = 1usize << self.columns.len();
        let mut t = vec![0u16; q];
        for x in 1..q {
            let low = x.trailing_zeros() as usize;
            t[x] = t[x & (x - 1)] ^ self.columns[low] as u16;
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf16() -> FieldSpec {
        FieldSpec::new(4, Some(0x3)).unwrap()
    }

    // Multiplication by alpha with reduction, written out independently of
    // the table code.
    fn shift_reduce(x: u32, p: u32, poly: u32) -> u32 {
        let y = x << 1;
        if y >> p & 1 == 1 {
            (y & ((1 << p) - 1)) ^ poly
        } else {
            y
        }
    }

    #[test]
    fn alpha_satisfies_x4_plus_x_plus_1() {
        let f = gf16();
        let a = f.alpha();
        let a4 = f.pow(a, 4).unwrap();
        assert_eq!(f.add(a4, f.add(a, FieldElement::ONE)), FieldElement::ZERO);
        assert_eq!(f.exp_table()[4], 3);
    }

    #[test]
    fn exp_table_matches_repeated_shift() {
        for p in MIN_DEGREE..=MAX_DEGREE {
            let f = FieldSpec::new(p, None).unwrap();
            let mut x = 1u32;
            for (i, &e) in f.exp_table().iter().enumerate() {
                assert_eq!(e as u32, x, "p={p} i={i}");
                x = shift_reduce(x, p, f.poly());
            }
            assert_eq!(x, 1);
        }
    }

    #[test]
    fn reducible_polynomial_rejected() {
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2
        assert!(matches!(
            FieldSpec::new(4, Some(0x5)),
            Err(Error::NonPrimitivePolynomial { .. })
        ));
        // x^4 + x^3 + x^2 + x + 1 is irreducible but alpha has order 5
        assert!(FieldSpec::new(4, Some(0xf)).is_err());
        // leading bit is accepted
        assert_eq!(FieldSpec::new(4, Some(0x13)).unwrap().poly(), 0x3);
    }

    #[test]
    fn degree_bounds() {
        assert_eq!(FieldSpec::new(1, None), Err(Error::DegreeOutOfRange(1)));
        assert_eq!(FieldSpec::new(17, None), Err(Error::DegreeOutOfRange(17)));
    }

    #[test]
    fn basic_ops() {
        let f = gf16();
        assert_eq!(f.mul(FieldElement(3), FieldElement(14)), FieldElement::ONE);
        for x in 0..16u16 {
            let x = FieldElement(x);
            assert_eq!(f.add(x, x), FieldElement::ZERO);
            assert_eq!(f.mul(FieldElement::ONE, x), x);
            if !x.is_zero() {
                assert_eq!(f.mul(x, f.inv(x).unwrap()), FieldElement::ONE);
                assert_eq!(f.exp(f.log(x).unwrap() as i64), x);
            }
        }
        assert_eq!(f.inv(FieldElement::ZERO), Err(Error::DivisionByZero));
        assert_eq!(f.log(FieldElement::ZERO), Err(Error::DivisionByZero));
    }

    #[test]
    fn companion_of_alpha_is_the_companion_matrix() {
        let f = gf16();
        let a = f.companion(f.alpha());
        for i in 0..4 {
            for j in 0..3 {
                assert_eq!(a.get(i, j), i == j + 1);
            }
        }
        // last column = (pi_0, pi_1, pi_2, pi_3) = (1, 1, 0, 0)
        let last: Vec<bool> = (0..4).map(|i| a.get(i, 3)).collect();
        assert_eq!(last, vec![true, true, false, false]);
        // A(alpha) v(alpha^3) = v(alpha^4)
        assert_eq!(a.mul_vec(0b1000), 0b0011);
        assert!(f.companion(FieldElement::ZERO).is_zero());
        assert_eq!(f.companion(FieldElement::ONE), BitMatrix::identity(4));
        assert_eq!(f.companion_transpose(FieldElement::ONE), BitMatrix::identity(4));
        assert!(f.companion_transpose(FieldElement::ZERO).is_zero());
    }

    #[test]
    fn companion_power_structure() {
        let f = gf16();
        let a = f.companion(f.alpha());
        let mut acc = BitMatrix::identity(4);
        for i in 0..15 {
            assert_eq!(f.companion(f.exp(i)), acc);
            acc = acc.mul(&a);
        }
    }

    #[test]
    fn symbol_map_table_matches_mul_vec() {
        let f = FieldSpec::new(5, None).unwrap();
        let m = f.companion_transpose(FieldElement(19));
        let sm = SymbolMap::from_matrix(&m);
        let t = sm.table();
        for x in 0..32u32 {
            assert_eq!(t[x as usize] as u64, m.mul_vec(x as u64));
            assert_eq!(sm.apply(x), t[x as usize] as u32);
        }
    }

    #[test]
    fn rank_and_invertibility() {
        let f = gf16();
        for x in 1..16 {
            assert!(f.companion(FieldElement(x)).is_invertible());
        }
        assert_eq!(f.companion(FieldElement::ZERO).rank(), 0);
        let m = BitMatrix::from_rows(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(m.rank(), 1);
    }
}
