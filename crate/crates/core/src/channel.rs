//! Depolarizing-channel error sampling and syndrome computation.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::binexpand::CssCodePair;
use crate::error::{Error, Result};
use crate::gf2p::SymbolMap;
use crate::Role;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChannelMode {
    /// Every X and Z bit flips independently with probability f_m.
    #[default]
    Independent,
    /// Each qubit suffers I, X, Y, Z with probabilities
    /// (1 - f_dep, f_dep/3, f_dep/3, f_dep/3), f_dep = 3 f_m / 2.
    Joint,
}

impl fmt::Display for ChannelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelMode::Independent => "independent",
            ChannelMode::Joint => "joint",
        })
    }
}

impl FromStr for ChannelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(ChannelMode::Independent),
            "joint" => Ok(ChannelMode::Joint),
            other => Err(Error::DomainError(format!("unknown channel mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    /// Marginal X (and Z) flip probability.
    pub f_m: f64,
    pub mode: ChannelMode,
}

impl ChannelParams {
    pub fn new(f_m: f64, mode: ChannelMode) -> Result<Self> {
        if !(0.0..0.5).contains(&f_m) {
            return Err(Error::DomainError(format!("f_m = {f_m} outside [0, 0.5)")));
        }
        Ok(ChannelParams { f_m, mode })
    }

    /// Depolarizing probability 3 f_m / 2.
    pub fn f_dep(&self) -> f64 {
        1.5 * self.f_m
    }
}

/// N symbols of p bits each; bit j of symbol n is qubit n*p + j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorVector {
    pub p: u32,
    pub symbols: Vec<u16>,
}

impl ErrorVector {
    pub fn zeros(p: u32, n: usize) -> Self {
        ErrorVector {
            p,
            symbols: vec![0; n],
        }
    }

    pub fn bit_len(&self) -> usize {
        self.p as usize * self.symbols.len()
    }

    pub fn bit(&self, i: usize) -> bool {
        let p = self.p as usize;
        (self.symbols[i / p] >> (i % p)) & 1 == 1
    }

    pub fn weight(&self) -> usize {
        self.symbols.iter().map(|s| s.count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &ErrorVector) -> ErrorVector {
        assert_eq!(self.symbols.len(), other.symbols.len());
        ErrorVector {
            p: self.p,
            symbols: self.symbols.iter().zip(&other.symbols).map(|(a, b)| a ^ b).collect(),
        }
    }
}

/// M syndrome symbols of p bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syndrome {
    pub p: u32,
    pub symbols: Vec<u16>,
}

impl Syndrome {
    pub fn is_zero(&self) -> bool {
        self.symbols.iter().all(|&s| s == 0)
    }

    pub fn xor(&self, other: &Syndrome) -> Syndrome {
        assert_eq!(self.symbols.len(), other.symbols.len());
        Syndrome {
            p: self.p,
            symbols: self.symbols.iter().zip(&other.symbols).map(|(a, b)| a ^ b).collect(),
        }
    }
}

/// The X-type and Z-type components of one channel use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorPair {
    pub x: ErrorVector,
    pub z: ErrorVector,
}

impl ErrorPair {
    /// The component checked by `role`: X errors by C, Z errors by D.
    pub fn for_role(&self, role: Role) -> &ErrorVector {
        match role {
            Role::C => &self.x,
            Role::D => &self.z,
        }
    }
}

fn sample_independent<R: Rng + ?Sized>(n_sym: usize, p: u32, f_m: f64, rng: &mut R) -> ErrorVector {
    let mut e = ErrorVector::zeros(p, n_sym);
    if f_m == 0.0 {
        return e;
    }
    for s in e.symbols.iter_mut() {
        for j in 0..p {
            if rng.gen::<f64>() < f_m {
                *s |= 1 << j;
            }
        }
    }
    e
}

/// Samples X and Z error vectors for `n_sym` symbols of `p` qubits.
pub fn sample_error<R: Rng + ?Sized>(n_sym: usize, p: u32, params: &ChannelParams, rng: &mut R) -> ErrorPair {
    match params.mode {
        ChannelMode::Independent => {
            let x = sample_independent(n_sym, p, params.f_m, rng);
            let z = sample_independent(n_sym, p, params.f_m, rng);
            ErrorPair { x, z }
        }
        ChannelMode::Joint => {
            let mut x = ErrorVector::zeros(p, n_sym);
            let mut z = ErrorVector::zeros(p, n_sym);
            let third = params.f_dep() / 3.0;
            if third == 0.0 {
                return ErrorPair { x, z };
            }
            for n in 0..n_sym {
                for j in 0..p {
                    let u: f64 = rng.gen();
                    let bit = 1u16 << j;
                    if u < third {
                        x.symbols[n] |= bit;
                    } else if u < 2.0 * third {
                        // Y flips both components
                        x.symbols[n] |= bit;
                        z.symbols[n] |= bit;
                    } else if u < 3.0 * third {
                        z.symbols[n] |= bit;
                    }
                }
            }
            ErrorPair { x, z }
        }
    }
}

/// Per-entry p x p block maps of one constituent code: A(gamma) for C and
/// A^T(delta) for D.
#[derive(Clone, Debug)]
pub struct ParityMaps {
    p: u32,
    n_cols: usize,
    rows: Vec<Vec<(usize, SymbolMap)>>,
}

impl ParityMaps {
    pub fn new(code: &CssCodePair, role: Role) -> Self {
        let m = code.matrix(role);
        let field = m.field();
        let rows = m
            .rows()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&(c, x)| {
                        let block = match role {
                            Role::C => field.companion(x),
                            Role::D => field.companion_transpose(x),
                        };
                        (c, SymbolMap::from_matrix(&block))
                    })
                    .collect()
            })
            .collect();
        ParityMaps {
            p: field.p(),
            n_cols: m.n_cols(),
            rows,
        }
    }

    /// Maps for an arbitrary sparse structure; `rows[m]` lists (column, map).
    pub fn from_rows(p: u32, n_cols: usize, rows: Vec<Vec<(usize, SymbolMap)>>) -> Self {
        ParityMaps { p, n_cols, rows }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[Vec<(usize, SymbolMap)>] {
        &self.rows
    }

    /// s_m = sum over n in N_m of B(m, n) y_n.
    pub fn syndrome_symbols(&self, symbols: &[u16]) -> Result<Vec<u16>> {
        if symbols.len() != self.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "error has {} symbols, code has {}",
                symbols.len(),
                self.n_cols
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(0u32, |acc, (c, map)| acc ^ map.apply(symbols[*c] as u32)) as u16)
            .collect())
    }

    pub fn syndrome(&self, e: &ErrorVector) -> Result<Syndrome> {
        if e.p != self.p {
            return Err(Error::DimensionMismatch(format!("error symbols have p={}, code has p={}", e.p, self.p)));
        }
        Ok(Syndrome {
            p: self.p,
            symbols: self.syndrome_symbols(&e.symbols)?,
        })
    }
}

/// Syndrome of `e` under the constituent code `role`.
pub fn syndrome_of(code: &CssCodePair, role: Role, e: &ErrorVector) -> Result<Syndrome> {
    ParityMaps::new(code, role).syndrome(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2p::FieldSpec;
    use crate::qcpair::QcParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn code() -> CssCodePair {
        let f = Arc::new(FieldSpec::new(4, None).unwrap());
        CssCodePair::construct(QcParams::new(2, 6, 7, 2, 3), f, 17, true).unwrap()
    }

    // syndrome through the dense pM x pN binary matrix
    fn dense_syndrome(h: &crate::SparseBinaryMatrix, e: &ErrorVector) -> Vec<u16> {
        let p = e.p as usize;
        let mut out = vec![0u16; h.n_rows() / p];
        for (r, row) in h.rows().iter().enumerate() {
            let parity = row.iter().filter(|&&c| e.bit(c)).count() % 2;
            if parity == 1 {
                out[r / p] |= 1 << (r % p);
            }
        }
        out
    }

    #[test]
    fn zero_rate_gives_zero_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for mode in [ChannelMode::Independent, ChannelMode::Joint] {
            let params = ChannelParams::new(0.0, mode).unwrap();
            let e = sample_error(50, 4, &params, &mut rng);
            assert_eq!(e.x.weight() + e.z.weight(), 0);
        }
        assert!(ChannelParams::new(0.5, ChannelMode::Joint).is_err());
    }

    #[test]
    fn joint_marginals_and_correlation() {
        let f_m = 0.06;
        let params = ChannelParams::new(f_m, ChannelMode::Joint).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let e = sample_error(25_000, 4, &params, &mut rng);
        let n = e.x.bit_len() as f64;
        let sd = (f_m * (1.0 - f_m) / n).sqrt();
        let fx = e.x.weight() as f64 / n;
        let fz = e.z.weight() as f64 / n;
        assert!((fx - f_m).abs() < 4.0 * sd, "x marginal {fx}");
        assert!((fz - f_m).abs() < 4.0 * sd, "z marginal {fz}");
        let both = (0..e.x.bit_len()).filter(|&i| e.x.bit(i) && e.z.bit(i)).count() as f64 / n;
        let target = f_m / 2.0;
        let sd_both = (target * (1.0 - target) / n).sqrt();
        assert!((both - target).abs() < 4.0 * sd_both, "joint flip rate {both}");
        assert!(both > 5.0 * f_m * f_m);
    }

    #[test]
    fn independent_marginal() {
        let f_m = 0.1;
        let params = ChannelParams::new(f_m, ChannelMode::Independent).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = sample_error(25_000, 4, &params, &mut rng);
        let n = e.x.bit_len() as f64;
        let sd = (f_m * (1.0 - f_m) / n).sqrt();
        assert!((e.x.weight() as f64 / n - f_m).abs() < 4.0 * sd);
        assert!((e.z.weight() as f64 / n - f_m).abs() < 4.0 * sd);
    }

    #[test]
    fn syndrome_matches_dense_product() {
        let code = code();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let params = ChannelParams::new(0.2, ChannelMode::Independent).unwrap();
        for role in [Role::C, Role::D] {
            let maps = ParityMaps::new(&code, role);
            for _ in 0..100 {
                let e = sample_error(42, 4, &params, &mut rng).x;
                let s = maps.syndrome(&e).unwrap();
                assert_eq!(s.symbols, dense_syndrome(code.binary(role), &e));
            }
        }
    }

    #[test]
    fn single_symbol_error_hits_two_checks() {
        let code = code();
        let n = 11;
        let mut e = ErrorVector::zeros(4, 42);
        e.symbols[n] = 0b1010;
        let s = syndrome_of(&code, Role::C, &e).unwrap();
        let f = &code.field;
        let mut touched = 0;
        for (m, row) in code.gamma.rows().iter().enumerate() {
            match row.iter().find(|&&(c, _)| c == n) {
                Some(&(_, g)) => {
                    touched += 1;
                    assert_eq!(s.symbols[m], f.mul(g, crate::FieldElement(0b1010)).0);
                }
                None => assert_eq!(s.symbols[m], 0),
            }
        }
        assert_eq!(touched, 2);
    }

    #[test]
    fn linearity_and_dual_rows() {
        let code = code();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let params = ChannelParams::new(0.3, ChannelMode::Independent).unwrap();
        let e = sample_error(42, 4, &params, &mut rng);
        let maps = ParityMaps::new(&code, Role::C);
        let s1 = maps.syndrome(&e.x).unwrap();
        let s2 = maps.syndrome(&e.z).unwrap();
        assert_eq!(maps.syndrome(&e.x.xor(&e.z)).unwrap(), s1.xor(&s2));
        assert!(maps.syndrome(&ErrorVector::zeros(4, 42)).unwrap().is_zero());
        // every row of H_D has zero C-syndrome
        for row in code.hd.rows() {
            let mut v = ErrorVector::zeros(4, 42);
            for &c in row {
                v.symbols[c / 4] |= 1 << (c % 4);
            }
            assert!(maps.syndrome(&v).unwrap().is_zero());
        }
        assert!(matches!(
            maps.syndrome(&ErrorVector::zeros(4, 41)),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
