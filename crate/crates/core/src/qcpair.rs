//! Orthogonal (J, L, P) quasi-cyclic binary pairs.
//!
//! Both matrices are J x L arrays of P x P circulant permutation blocks
//! I(x) = I(1)^x, where row r of I(x) has its single one at column
//! (x + r) mod P. The exponents come from two units sigma and tau of Z_P.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::gf2p::BitMatrix;
use crate::Role;

/// Parameters of a quasi-cyclic pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QcParams {
    /// Number of block rows.
    pub j: usize,
    /// Number of block columns.
    pub l: usize,
    /// Circulant size P.
    pub circulant: u64,
    pub sigma: u64,
    pub tau: u64,
}

impl QcParams {
    pub fn new(j: usize, l: usize, circulant: u64, sigma: u64, tau: u64) -> Self {
        QcParams {
            j,
            l,
            circulant,
            sigma,
            tau,
        }
    }

    /// Number of rows JP of the expanded matrices.
    pub fn rows(&self) -> usize {
        self.j * self.circulant as usize
    }

    /// Number of columns LP of the expanded matrices.
    pub fn cols(&self) -> usize {
        self.l * self.circulant as usize
    }
}

/// A violated condition of the construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    CirculantTooSmall,
    SigmaNotUnit,
    TauNotUnit,
    HalfLengthNotOrder { half_l: usize, order: u64 },
    JOutOfRange { j: usize, order: u64 },
    OrderIsGroupSize { order: u64 },
    OneMinusPowerNotUnit { power: u64 },
    TauIsPowerOfSigma { power: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CirculantTooSmall => write!(f, "P must exceed 2"),
            Violation::SigmaNotUnit => write!(f, "sigma is not a unit of Z_P"),
            Violation::TauNotUnit => write!(f, "tau is not a unit of Z_P"),
            Violation::HalfLengthNotOrder { half_l, order } => {
                write!(f, "L/2 = {half_l} differs from ord(sigma) = {order}")
            }
            Violation::JOutOfRange { j, order } => {
                write!(f, "J = {j} outside 1..=ord(sigma) = {order}")
            }
            Violation::OrderIsGroupSize { order } => {
                write!(f, "ord(sigma) = {order} equals the size of Z_P^*")
            }
            Violation::OneMinusPowerNotUnit { power } => {
                write!(f, "1 - sigma^{power} is not a unit")
            }
            Violation::TauIsPowerOfSigma { power } => write!(f, "tau = sigma^{power}"),
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// a^e mod m for e possibly negative; `a` must be a unit when e < 0.
pub fn pow_mod(a: u64, e: i64, m: u64) -> u64 {
    let base = if e < 0 {
        inv_mod(a, m).expect("negative power of a non-unit")
    } else {
        a % m
    };
    let mut e = e.unsigned_abs();
    let mut b = base;
    let mut acc = 1 % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(m as i128) as u64)
}

/// Multiplicative order of a unit `a` modulo `m`.
pub fn order_mod(a: u64, m: u64) -> Option<u64> {
    if m < 2 || gcd(a % m, m) != 1 {
        return None;
    }
    let mut x = a % m;
    let mut k = 1;
    while x != 1 {
        x = mul_mod(x, a, m);
        k += 1;
    }
    Some(k)
}

fn totient(m: u64) -> u64 {
    (1..m).filter(|&z| gcd(z, m) == 1).count() as u64
}

/// Checks every condition of the construction and reports all violations.
pub fn validate_params(params: &QcParams) -> Vec<Violation> {
    let mut out = Vec::new();
    let p = params.circulant;
    if p <= 2 {
        out.push(Violation::CirculantTooSmall);
        return out;
    }
    let sigma_unit = gcd(params.sigma % p, p) == 1;
    if !sigma_unit {
        out.push(Violation::SigmaNotUnit);
    }
    if gcd(params.tau % p, p) != 1 {
        out.push(Violation::TauNotUnit);
    }
    if !sigma_unit {
        return out;
    }
    let order = order_mod(params.sigma, p).unwrap();
    if !params.l.is_multiple_of(2) || params.l / 2 != order as usize {
        out.push(Violation::HalfLengthNotOrder {
            half_l: params.l / 2,
            order,
        });
    }
    if params.j < 1 || params.j as u64 > order {
        out.push(Violation::JOutOfRange { j: params.j, order });
    }
    if order == totient(p) {
        out.push(Violation::OrderIsGroupSize { order });
    }
    for k in 1..order {
        let s = pow_mod(params.sigma, k as i64, p);
        if gcd((1 + p - s) % p, p) != 1 {
            out.push(Violation::OneMinusPowerNotUnit { power: k });
        }
    }
    for k in 0..order {
        if params.tau % p == pow_mod(params.sigma, k as i64, p) {
            out.push(Violation::TauIsPowerOfSigma { power: k });
        }
    }
    out
}

/// J x L block exponents over Z_P.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentMatrix {
    pub role: Role,
    pub circulant: u64,
    pub exponents: Vec<Vec<u64>>,
}

impl fmt::Display for ExponentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.exponents.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|e| format!("I({e})")).collect();
            write!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Builds the exponent matrices of H_C and H_D. J must be 2 unless
/// `allow_any_j` is set; the non-binary lift is only defined for J = 2.
pub fn build_pair(params: &QcParams, allow_any_j: bool) -> Result<(ExponentMatrix, ExponentMatrix)> {
    let violations = validate_params(params);
    if !violations.is_empty() {
        let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidParams(msg.join("; ")));
    }
    if params.j != 2 && !allow_any_j {
        return Err(Error::InvalidParams(format!(
            "J = {} but the lift requires J = 2",
            params.j
        )));
    }
    let p = params.circulant;
    let half = params.l / 2;
    let (sigma, tau) = (params.sigma % p, params.tau % p);
    let mut c = vec![vec![0u64; params.l]; params.j];
    let mut d = vec![vec![0u64; params.l]; params.j];
    for j in 0..params.j {
        for l in 0..params.l {
            let up = pow_mod(sigma, l as i64 - j as i64, p);
            let down = pow_mod(sigma, j as i64 - l as i64, p);
            if l < half {
                c[j][l] = up;
                d[j][l] = (p - mul_mod(tau, down, p)) % p;
            } else {
                c[j][l] = mul_mod(tau, up, p);
                d[j][l] = (p - down) % p;
            }
        }
    }
    Ok((
        ExponentMatrix {
            role: Role::C,
            circulant: p,
            exponents: c,
        },
        ExponentMatrix {
            role: Role::D,
            circulant: p,
            exponents: d,
        },
    ))
}

/// Binary matrix stored as sorted column lists per row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseBinaryMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<Vec<usize>>,
}

impl SparseBinaryMatrix {
    pub fn new(n_rows: usize, n_cols: usize, mut rows: Vec<Vec<usize>>) -> Self {
        assert_eq!(rows.len(), n_rows);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            assert!(r.last().is_none_or(|&c| c < n_cols), "column out of range");
        }
        SparseBinaryMatrix { n_rows, n_cols, rows }
    }

    pub fn from_dense(m: &BitMatrix) -> Self {
        let rows = (0..m.rows())
            .map(|r| (0..m.cols()).filter(|&c| m.get(r, c)).collect())
            .collect();
        SparseBinaryMatrix::new(m.rows(), m.cols(), rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Row indices of each column, ascending.
    pub fn col_supports(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c].push(r);
            }
        }
        cols
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        self.col_supports().iter().map(Vec::len).collect()
    }

    pub fn to_dense(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.n_rows, self.n_cols);
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                m.set(r, c, true);
            }
        }
        m
    }

    /// `self * other^T` over GF(2), accumulated column by column.
    pub fn mul_transpose(&self, other: &SparseBinaryMatrix) -> BitMatrix {
        assert_eq!(self.n_cols, other.n_cols, "column counts differ");
        let a = self.col_supports();
        let b = other.col_supports();
        let mut out = BitMatrix::zeros(self.n_rows, other.n_rows);
        for (ca, cb) in a.iter().zip(&b) {
            for &r in ca {
                for &s in cb {
                    out.toggle(r, s);
                }
            }
        }
        out
    }

    pub fn is_orthogonal_to(&self, other: &SparseBinaryMatrix) -> bool {
        self.n_cols == other.n_cols && self.mul_transpose(other).is_zero()
    }

    /// True iff two columns share at least two rows.
    pub fn has_4cycle(&self) -> bool {
        let mut seen = HashSet::new();
        for row in &self.rows {
            for (i, &a) in row.iter().enumerate() {
                for &b in &row[i + 1..] {
                    if !seen.insert((a, b)) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Expands an exponent matrix into its JP x LP binary matrix.
pub fn expand(exponents: &ExponentMatrix) -> SparseBinaryMatrix {
    let p = exponents.circulant as usize;
    let jb = exponents.exponents.len();
    let lb = exponents.exponents.first().map_or(0, Vec::len);
    let mut rows = Vec::with_capacity(jb * p);
    for block_row in &exponents.exponents {
        for r in 0..p {
            let row: Vec<usize> = block_row
                .iter()
                .enumerate()
                .map(|(l, &e)| l * p + (e as usize + r) % p)
                .collect();
            rows.push(row);
        }
    }
    SparseBinaryMatrix::new(jb * p, lb * p, rows)
}

pub fn has_4cycle(m: &SparseBinaryMatrix) -> bool {
    m.has_4cycle()
}

/// Every valid (P, sigma, tau) with J = 2 for the given L and P range.
pub fn find_params(l: usize, circulants: impl IntoIterator<Item = u64>) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    if l < 4 || !l.is_multiple_of(2) {
        return out;
    }
    for p in circulants {
        if p <= 2 {
            continue;
        }
        for sigma in 0..p {
            // cheap filter before the full check
            if order_mod(sigma, p) != Some(l as u64 / 2) {
                continue;
            }
            for tau in 0..p {
                let params = QcParams::new(2, l, p, sigma, tau);
                if validate_params(&params).is_empty() {
                    out.push((p, sigma, tau));
                }
            }
        }
    }
    out
}
