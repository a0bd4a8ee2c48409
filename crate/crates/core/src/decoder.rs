//! Syndrome sum-product decoding over GF(2)^p.
//!
//! Messages are probability vectors indexed by p-bit symbols. A check node
//! needs the distribution of a sum of independent symbols, which is a group
//! convolution over (Z_2)^p; the Walsh-Hadamard transform diagonalizes it, so
//! each check update costs O(L q log q) instead of O(L q^2).

use crate::binexpand::CssCodePair;
use crate::channel::{ParityMaps, Syndrome};
use crate::error::{Error, Result};
use crate::gf2p::{BitMatrix, SymbolMap};
use crate::Role;

/// A probability vector over p-bit symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct MessagePmf {
    pub probs: Vec<f64>,
}

impl MessagePmf {
    pub fn new(probs: Vec<f64>) -> Self {
        MessagePmf { probs }
    }

    pub fn point_mass(q: usize, at: usize) -> Self {
        let mut probs = vec![0.0; q];
        probs[at] = 1.0;
        MessagePmf { probs }
    }

    pub fn uniform(q: usize) -> Self {
        MessagePmf {
            probs: vec![1.0 / q as f64; q],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Index of the largest entry, lowest index on ties.
    pub fn argmax(&self) -> usize {
        argmax_lowest(&self.probs)
    }
}

fn argmax_lowest(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn argmax_highest(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x >= v[best] {
            best = i;
        }
    }
    best
}

/// Channel prior: P(e) = f^w (1 - f)^(p - w) with w the Hamming weight of e.
pub fn init_pmf(f_m: f64, p: u32) -> MessagePmf {
    let q = 1usize << p;
    let by_weight: Vec<f64> = (0..=p as i32).map(|w| f_m.powi(w) * (1.0 - f_m).powi(p as i32 - w)).collect();
    MessagePmf {
        probs: (0..q).map(|e| by_weight[e.count_ones() as usize]).collect(),
    }
}

/// `out(e) = msg(map * e)`.
pub fn permute_pmf(msg: &MessagePmf, map: &BitMatrix) -> Result<MessagePmf> {
    let q = msg.len();
    if !q.is_power_of_two() || 1usize << map.cols() != q {
        return Err(Error::LengthMismatch {
            expected: 1 << map.cols(),
            got: q,
        });
    }
    if !map.is_invertible() {
        return Err(Error::SingularMap);
    }
    let t = SymbolMap::from_matrix(map).table();
    Ok(MessagePmf {
        probs: (0..q).map(|e| msg.probs[t[e] as usize]).collect(),
    })
}

/// In-place unnormalized Walsh-Hadamard transform; applying it twice
/// multiplies by the length.
pub fn wht(v: &mut [f64]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in v.chunks_exact_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (s, d) = (*x + *y, *x - *y);
                *x = s;
                *y = d;
            }
        }
        h *= 2;
    }
}

#[inline]
fn character(shift: usize, w: usize) -> f64 {
    if (shift & w).count_ones() & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Convolution over (Z_2)^p of all `msgs` and the point mass at `shift`.
pub fn wht_convolve(msgs: &[MessagePmf], shift: usize) -> Result<MessagePmf> {
    let q = msgs.first().map_or(0, MessagePmf::len);
    if msgs.is_empty() || !q.is_power_of_two() {
        return Err(Error::LengthMismatch {
            expected: q.max(1).next_power_of_two(),
            got: q,
        });
    }
    if shift >= q {
        return Err(Error::DomainError(format!("shift {shift} outside [0, {q})")));
    }
    let mut acc: Vec<f64> = (0..q).map(|w| character(shift, w)).collect();
    let mut buf = vec![0.0; q];
    for m in msgs {
        if m.len() != q {
            return Err(Error::LengthMismatch {
                expected: q,
                got: m.len(),
            });
        }
        buf.copy_from_slice(&m.probs);
        wht(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a *= b;
        }
    }
    wht(&mut acc);
    for a in acc.iter_mut() {
        *a = a.max(0.0);
    }
    let s: f64 = acc.iter().sum();
    if s > 0.0 {
        for a in acc.iter_mut() {
            *a /= s;
        }
    }
    Ok(MessagePmf { probs: acc })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LowestSymbol,
    HighestSymbol,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoderConfig {
    pub max_iter: usize,
    /// Entries below this are raised to it after every normalization.
    pub pmf_floor: f64,
    pub tie_break: TieBreak,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            max_iter: 32,
            pmf_floor: 1e-300,
            tie_break: TieBreak::LowestSymbol,
        }
    }
}

impl DecoderConfig {
    pub fn with_max_iter(max_iter: usize) -> Self {
        DecoderConfig {
            max_iter,
            ..Default::default()
        }
    }

    fn validate(&self, q: usize) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::DomainError("max_iter must be at least 1".into()));
        }
        if !(0.0..1.0 / q as f64).contains(&self.pmf_floor) {
            return Err(Error::DomainError(format!("pmf_floor {} outside [0, 1/q)", self.pmf_floor)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    Success,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub status: DecodeStatus,
    /// The estimated error symbols; present only on success.
    pub estimate: Option<Vec<u16>>,
    /// Rounds of horizontal/vertical updates performed.
    pub iterations: usize,
}

impl DecodeOutcome {
    pub fn is_success(&self) -> bool {
        self.status == DecodeStatus::Success
    }
}

/// Arithmetic operations spent in horizontal steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub adds: u64,
    pub muls: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.adds + self.muls
    }
}

/// Decoder state for one constituent code. Owns its message buffers; the
/// same instance can be reused across many syndromes.
#[derive(Clone, Debug)]
pub struct Decoder {
    p: u32,
    q: usize,
    n_cols: usize,
    config: DecoderConfig,
    row_start: Vec<usize>,
    edge_col: Vec<usize>,
    /// `tables[e*q + x]` = B_e x
    tables: Vec<u16>,
    col_edges: Vec<Vec<usize>>,
    prior: Vec<f64>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    posterior: Vec<f64>,
    estimate: Vec<u16>,
    scratch: Vec<f64>,
    suffix: Vec<f64>,
    ops: OpCounts,
}

impl Decoder {
    /// Decoder for `role` of `code` (A(gamma) maps for C, A^T(delta) for D).
    pub fn new(code: &CssCodePair, role: Role, config: DecoderConfig) -> Result<Self> {
        Self::from_maps(&ParityMaps::new(code, role), config)
    }

    pub fn from_maps(maps: &ParityMaps, config: DecoderConfig) -> Result<Self> {
        let p = maps.p();
        let q = 1usize << p;
        config.validate(q)?;
        let n_cols = maps.n_cols();
        let mut row_start = Vec::with_capacity(maps.n_rows() + 1);
        let mut edge_col = Vec::new();
        let mut tables = Vec::new();
        let mut col_edges = vec![Vec::new(); n_cols];
        for row in maps.rows() {
            row_start.push(edge_col.len());
            for (c, map) in row {
                let t = map.table();
                if !is_permutation(&t) {
                    return Err(Error::SingularMap);
                }
                col_edges[*c].push(edge_col.len());
                edge_col.push(*c);
                tables.extend_from_slice(&t);
            }
        }
        row_start.push(edge_col.len());
        let edges = edge_col.len();
        let max_row = row_start.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
        Ok(Decoder {
            p,
            q,
            n_cols,
            config,
            row_start,
            edge_col,
            tables,
            col_edges,
            prior: vec![0.0; q],
            v2c: vec![0.0; edges * q],
            c2v: vec![0.0; edges * q],
            posterior: vec![0.0; n_cols * q],
            estimate: vec![0; n_cols],
            scratch: vec![0.0; (max_row + 1) * q],
            suffix: vec![0.0; (max_row + 1) * q],
            ops: OpCounts::default(),
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n_rows(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    pub fn ops(&self) -> OpCounts {
        self.ops
    }

    pub fn reset_ops(&mut self) {
        self.ops = OpCounts::default();
    }

    /// Runs the decoder on `syndrome`, assuming marginal flip rate `f_m`.
    pub fn decode(&mut self, syndrome: &[u16], f_m: f64) -> Result<DecodeOutcome> {
        self.start(syndrome, f_m)?;
        self.tentative(0)?;
        if self.syndrome_matches(syndrome) {
            return Ok(self.success(0));
        }
        for iter in 1..=self.config.max_iter {
            self.horizontal(syndrome, iter)?;
            self.vertical(iter)?;
            self.tentative(iter)?;
            if self.syndrome_matches(syndrome) {
                return Ok(self.success(iter));
            }
        }
        Ok(DecodeOutcome {
            status: DecodeStatus::Fail,
            estimate: None,
            iterations: self.config.max_iter,
        })
    }

    /// Runs exactly `iters` rounds without early stopping and returns the
    /// normalized per-symbol posteriors.
    pub fn iterate(&mut self, syndrome: &[u16], f_m: f64, iters: usize) -> Result<Vec<MessagePmf>> {
        self.start(syndrome, f_m)?;
        self.tentative(0)?;
        for iter in 1..=iters {
            self.horizontal(syndrome, iter)?;
            self.vertical(iter)?;
            self.tentative(iter)?;
        }
        Ok(self.marginals())
    }

    /// Normalized posteriors from the latest tentative decision.
    pub fn marginals(&self) -> Vec<MessagePmf> {
        self.posterior
            .chunks_exact(self.q)
            .map(|c| {
                let s: f64 = c.iter().sum();
                MessagePmf::new(c.iter().map(|x| x / s).collect())
            })
            .collect()
    }

    /// One horizontal step from freshly initialized messages; used to
    /// measure the per-iteration cost.
    pub fn horizontal_step_ops(&mut self, syndrome: &[u16], f_m: f64) -> Result<OpCounts> {
        self.start(syndrome, f_m)?;
        self.reset_ops();
        self.horizontal(syndrome, 1)?;
        Ok(self.ops)
    }

    fn start(&mut self, syndrome: &[u16], f_m: f64) -> Result<()> {
        if syndrome.len() != self.n_rows() {
            return Err(Error::DimensionMismatch(format!(
                "syndrome has {} symbols, code has {} checks",
                syndrome.len(),
                self.n_rows()
            )));
        }
        if syndrome.iter().any(|&s| s as usize >= self.q) {
            return Err(Error::DomainError("syndrome symbol wider than p bits".into()));
        }
        if !(0.0..0.5).contains(&f_m) {
            return Err(Error::DomainError(format!("f_m = {f_m} outside [0, 0.5)")));
        }
        let prior = init_pmf(f_m, self.p);
        self.prior.copy_from_slice(&prior.probs);
        let q = self.q;
        for e in 0..self.edge_col.len() {
            self.v2c[e * q..(e + 1) * q].copy_from_slice(&self.prior);
            self.c2v[e * q..(e + 1) * q].fill(1.0);
        }
        Ok(())
    }

    fn success(&self, iterations: usize) -> DecodeOutcome {
        DecodeOutcome {
            status: DecodeStatus::Success,
            estimate: Some(self.estimate.clone()),
            iterations,
        }
    }

    fn horizontal(&mut self, syndrome: &[u16], iter: usize) -> Result<()> {
        let q = self.q;
        let log_q = self.p as u64;
        let floor = self.config.pmf_floor;
        for (m, &s) in syndrome.iter().enumerate() {
            let (start, end) = (self.row_start[m], self.row_start[m + 1]);
            let k = end - start;
            if k == 0 {
                continue;
            }
            // permute incoming messages into the check's coordinates and transform
            for i in 0..k {
                let e = start + i;
                let src = &self.v2c[e * q..(e + 1) * q];
                let t = &self.tables[e * q..(e + 1) * q];
                let dst = &mut self.scratch[i * q..(i + 1) * q];
                for x in 0..q {
                    dst[t[x] as usize] = src[x];
                }
                wht(dst);
                self.ops.adds += q as u64 * log_q;
            }
            // suffix[i] = chi_s * prod_{j >= i} W_j
            {
                let last = &mut self.suffix[k * q..(k + 1) * q];
                for (w, v) in last.iter_mut().enumerate() {
                    *v = character(s as usize, w);
                }
            }
            for i in (0..k).rev() {
                let (head, tail) = self.suffix.split_at_mut((i + 1) * q);
                let dst = &mut head[i * q..];
                let w = &self.scratch[i * q..(i + 1) * q];
                for x in 0..q {
                    dst[x] = tail[x] * w[x];
                }
                self.ops.muls += q as u64;
            }
            // running prefix lives in the slot after the transforms
            let (transforms, rest) = self.scratch.split_at_mut(k * q);
            let prefix = &mut rest[..q];
            prefix.fill(1.0);
            let mut out = vec![0.0; q];
            for i in 0..k {
                let suf = &self.suffix[(i + 1) * q..(i + 2) * q];
                for x in 0..q {
                    out[x] = prefix[x] * suf[x];
                }
                self.ops.muls += q as u64;
                if i + 1 < k {
                    let w = &transforms[i * q..(i + 1) * q];
                    for x in 0..q {
                        prefix[x] *= w[x];
                    }
                    self.ops.muls += q as u64;
                }
                wht(&mut out);
                self.ops.adds += q as u64 * log_q;
                let mut sum = 0.0;
                for v in out.iter_mut() {
                    *v = v.max(0.0);
                    sum += *v;
                }
                self.ops.adds += q as u64;
                if !(sum.is_finite() && sum > 0.0) {
                    return Err(Error::NonFiniteMessage(iter));
                }
                let inv = 1.0 / sum;
                let e = start + i;
                let t = &self.tables[e * q..(e + 1) * q];
                let dst = &mut self.c2v[e * q..(e + 1) * q];
                for x in 0..q {
                    dst[x] = (out[t[x] as usize] * inv).max(floor);
                }
                self.ops.muls += q as u64 + 1;
            }
        }
        Ok(())
    }

    fn vertical(&mut self, iter: usize) -> Result<()> {
        let q = self.q;
        let floor = self.config.pmf_floor;
        for edges in &self.col_edges {
            for &e in edges {
                let dst_range = e * q..(e + 1) * q;
                let mut msg = self.prior.clone();
                for &other in edges {
                    if other != e {
                        let src = &self.c2v[other * q..(other + 1) * q];
                        for (a, b) in msg.iter_mut().zip(src) {
                            *a *= b;
                        }
                    }
                }
                let sum: f64 = msg.iter().sum();
                if !(sum.is_finite() && sum > 0.0) {
                    return Err(Error::NonFiniteMessage(iter));
                }
                for (d, v) in self.v2c[dst_range].iter_mut().zip(&msg) {
                    *d = (v / sum).max(floor);
                }
            }
        }
        Ok(())
    }

    fn tentative(&mut self, iter: usize) -> Result<()> {
        let q = self.q;
        for (n, edges) in self.col_edges.iter().enumerate() {
            let post = &mut self.posterior[n * q..(n + 1) * q];
            post.copy_from_slice(&self.prior);
            if iter > 0 {
                for &e in edges {
                    for (a, b) in post.iter_mut().zip(&self.c2v[e * q..(e + 1) * q]) {
                        *a *= b;
                    }
                }
            }
            if post.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteMessage(iter));
            }
            self.estimate[n] = match self.config.tie_break {
                TieBreak::LowestSymbol => argmax_lowest(post),
                TieBreak::HighestSymbol => argmax_highest(post),
            } as u16;
        }
        Ok(())
    }

    fn syndrome_matches(&self, syndrome: &[u16]) -> bool {
        let q = self.q;
        (0..self.n_rows()).all(|m| {
            let s = (self.row_start[m]..self.row_start[m + 1])
                .fold(0u16, |acc, e| acc ^ self.tables[e * q + self.estimate[self.edge_col[e]] as usize]);
            s == syndrome[m]
        })
    }
}

fn is_permutation(t: &[u16]) -> bool {
    let mut seen = vec![false; t.len()];
    for &x in t {
        if std::mem::replace(&mut seen[x as usize], true) {
            return false;
        }
    }
    true
}

/// Decodes one constituent code.
pub fn decode(code: &CssCodePair, role: Role, syndrome: &Syndrome, f_m: f64, config: DecoderConfig) -> Result<DecodeOutcome> {
    Decoder::new(code, role, config)?.decode(&syndrome.symbols, f_m)
}

/// Decodes C and D independently; X-Z correlations are ignored.
pub fn decode_css(
    code: &CssCodePair,
    syndrome_c: &Syndrome,
    syndrome_d: &Syndrome,
    f_m: f64,
    config: DecoderConfig,
) -> Result<(DecodeOutcome, DecodeOutcome)> {
    Ok((
        decode(code, Role::C, syndrome_c, f_m, config)?,
        decode(code, Role::D, syndrome_d, f_m, config)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_error, syndrome_of, ChannelMode, ChannelParams, ErrorVector};
    use crate::gf2p::FieldSpec;
    use crate::qcpair::QcParams;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    // direct O(q^2) convolution
    fn naive_convolve(msgs: &[MessagePmf], shift: usize) -> Vec<f64> {
        let q = msgs[0].len();
        let mut acc = vec![0.0; q];
        acc[shift] = 1.0;
        for m in msgs {
            let mut next = vec![0.0; q];
            for f in 0..q {
                for g in 0..q {
                    next[f ^ g] += acc[f] * m.probs[g];
                }
            }
            acc = next;
        }
        acc
    }

    fn random_pmf(q: usize, rng: &mut impl Rng) -> MessagePmf {
        let raw: Vec<f64> = (0..q).map(|_| rng.gen::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        MessagePmf::new(raw.into_iter().map(|x| x / s).collect())
    }

    #[test]
    fn prior_values() {
        let u = init_pmf(0.5, 4);
        assert!(u.probs.iter().all(|&x| (x - 1.0 / 16.0).abs() < 1e-15));
        let m = init_pmf(0.1, 4);
        assert!((m.probs[0] - 0.6561).abs() < 1e-12);
        for e in [1, 2, 4, 8] {
            assert!((m.probs[e] - 0.0729).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = rng.gen_range(1..=10);
            let f = rng.gen_range(0.0..0.5);
            assert!((init_pmf(f, p).sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_roundtrip() {
        let f = FieldSpec::new(4, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let msg = random_pmf(16, &mut rng);
        assert_eq!(permute_pmf(&msg, &BitMatrix::identity(4)).unwrap(), msg);
        for g in 1..16u16 {
            let g = crate::FieldElement(g);
            let a = f.companion(g);
            let b = f.companion(f.inv(g).unwrap());
            let once = permute_pmf(&msg, &a).unwrap();
            assert!((once.sum() - msg.sum()).abs() < 1e-12);
            assert_eq!(permute_pmf(&once, &b).unwrap(), msg);
        }
        assert_eq!(permute_pmf(&msg, &BitMatrix::zeros(4, 4)), Err(Error::SingularMap));
    }

    #[test]
    fn wht_twice_scales_by_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<f64> = (0..64).map(|_| rng.gen::<f64>()).collect();
        let mut w = v.clone();
        wht(&mut w);
        wht(&mut w);
        for (a, b) in v.iter().zip(&w) {
            assert!((a * 64.0 - b).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_special_cases() {
        let d = wht_convolve(&[MessagePmf::point_mass(16, 5)], 9).unwrap();
        let expected = MessagePmf::point_mass(16, 5 ^ 9);
        for (a, b) in d.probs.iter().zip(&expected.probs) {
            assert!((a - b).abs() < 1e-12);
        }
        let u = wht_convolve(&[MessagePmf::uniform(8), MessagePmf::uniform(8)], 0).unwrap();
        assert!(u.probs.iter().all(|&x| (x - 0.125).abs() < 1e-12));
        assert!(matches!(
            wht_convolve(&[MessagePmf::uniform(8), MessagePmf::uniform(4)], 0),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(wht_convolve(&[], 0).is_err());
    }

    proptest! {
        #[test]
        fn convolution_matches_naive(seed in any::<u64>(), p in 1u32..=6, k in 1usize..5) {
            let q = 1usize << p;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let msgs: Vec<MessagePmf> = (0..k).map(|_| random_pmf(q, &mut rng)).collect();
            let shift = rng.gen_range(0..q);
            let fast = wht_convolve(&msgs, shift).unwrap();
            let slow = naive_convolve(&msgs, shift);
            for (a, b) in fast.probs.iter().zip(&slow) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    fn example_code(seed: u64) -> CssCodePair {
        let f = Arc::new(FieldSpec::new(4, None).unwrap());
        CssCodePair::construct(QcParams::new(2, 6, 7, 2, 3), f, seed, true).unwrap()
    }

    #[test]
    fn zero_syndrome_decodes_at_iteration_zero() {
        let code = example_code(4);
        for role in [Role::C, Role::D] {
            let mut dec = Decoder::new(&code, role, DecoderConfig::default()).unwrap();
            let out = dec.decode(&[0; 14], 0.01).unwrap();
            assert_eq!(out.status, DecodeStatus::Success);
            assert_eq!(out.iterations, 0);
            assert_eq!(out.estimate, Some(vec![0; 42]));
        }
    }

    #[test]
    fn success_implies_syndrome_match() {
        let code = example_code(6);
        let params = ChannelParams::new(0.2, ChannelMode::Independent).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for role in [Role::C, Role::D] {
            let maps = ParityMaps::new(&code, role);
            let mut dec = Decoder::from_maps(&maps, DecoderConfig::with_max_iter(1)).unwrap();
            let mut fails = 0;
            for _ in 0..50 {
                let e = sample_error(42, 4, &params, &mut rng).x;
                let s = maps.syndrome(&e).unwrap();
                let out = dec.decode(&s.symbols, 0.2).unwrap();
                match out.status {
                    DecodeStatus::Success => {
                        let est = ErrorVector { p: 4, symbols: out.estimate.unwrap() };
                        assert_eq!(maps.syndrome(&est).unwrap(), s);
                    }
                    DecodeStatus::Fail => {
                        fails += 1;
                        assert!(out.estimate.is_none());
                        assert_eq!(out.iterations, 1);
                    }
                }
            }
            assert!(fails > 0, "f_m = 0.2 with one iteration should fail sometimes");
        }
    }

    #[test]
    fn css_wiring() {
        let code = example_code(8);
        let mut x = ErrorVector::zeros(4, 42);
        x.symbols[17] = 0b0110;
        let sc = syndrome_of(&code, Role::C, &x).unwrap();
        let sd = syndrome_of(&code, Role::D, &ErrorVector::zeros(4, 42)).unwrap();
        let (oc, od) = decode_css(&code, &sc, &sd, 0.01, DecoderConfig::default()).unwrap();
        assert_eq!(oc.estimate, Some(x.symbols.clone()));
        assert_eq!(od.estimate, Some(vec![0; 42]));
        assert_eq!(od.iterations, 0);
        let again = decode_css(&code, &sc, &sd, 0.01, DecoderConfig::default()).unwrap();
        assert_eq!(again, (oc, od));
    }

    #[test]
    fn bad_inputs() {
        let code = example_code(4);
        let mut dec = Decoder::new(&code, Role::C, DecoderConfig::default()).unwrap();
        assert!(matches!(dec.decode(&[0; 13], 0.01), Err(Error::DimensionMismatch(_))));
        assert!(Decoder::new(&code, Role::C, DecoderConfig::with_max_iter(0)).is_err());
        let cfg = DecoderConfig { pmf_floor: 0.1, ..Default::default() };
        assert!(Decoder::new(&code, Role::C, cfg).is_err());
    }

    #[test]
    fn messages_stay_normalized() {
        let code = example_code(3);
        let maps = ParityMaps::new(&code, Role::D);
        let mut dec = Decoder::from_maps(&maps, DecoderConfig::default()).unwrap();
        let params = ChannelParams::new(0.08, ChannelMode::Independent).unwrap();
        let e = sample_error(42, 4, &params, &mut ChaCha8Rng::seed_from_u64(77)).z;
        let s = maps.syndrome(&e).unwrap();
        dec.iterate(&s.symbols, 0.08, 5).unwrap();
        for chunk in dec.v2c.chunks_exact(16).chain(dec.c2v.chunks_exact(16)) {
            assert!((chunk.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    // p = 1 reduces to binary syndrome BP. Toy code: checks {0,1} and {1,2}.
    // The Tanner graph is a tree, so after two rounds the marginals equal
    // the exact posteriors.
    #[test]
    fn binary_degenerate_case() {
        let one = SymbolMap::from_matrix(&BitMatrix::identity(1));
        let maps = ParityMaps::from_rows(1, 3, vec![vec![(0, one.clone()), (1, one.clone())], vec![(1, one.clone()), (2, one)]]);
        let mut dec = Decoder::from_maps(&maps, DecoderConfig::default()).unwrap();
        let f = 0.1;
        let s = [1u16, 0];

        // one round: check 0 tells bit 0 that e0 = 1 ^ e1, e1 ~ prior, so
        // its message is (0.1, 0.9); bit 0's posterior is then
        // (0.9 * 0.1, 0.1 * 0.9) normalized = (0.5, 0.5)
        let m1 = dec.iterate(&s, f, 1).unwrap();
        assert!((m1[0].probs[1] - 0.5).abs() < 1e-12);

        // exact posteriors by enumeration over the 8 error patterns
        let mut exact = [0.0f64; 3];
        let mut total = 0.0;
        for e in 0..8u32 {
            let b = |i: u32| (e >> i) & 1;
            if (b(0) ^ b(1)) as u16 != s[0] || (b(1) ^ b(2)) as u16 != s[1] {
                continue;
            }
            let w = e.count_ones() as i32;
            let pr = f.powi(w) * (1.0 - f).powi(3 - w);
            total += pr;
            for (i, slot) in exact.iter_mut().enumerate() {
                if b(i as u32) == 1 {
                    *slot += pr;
                }
            }
        }
        let m2 = dec.iterate(&s, f, 2).unwrap();
        for i in 0..3 {
            assert!((m2[i].probs[1] - exact[i] / total).abs() < 1e-12, "bit {i}");
        }
        let out = dec.decode(&s, f).unwrap();
        assert_eq!(out.estimate, Some(vec![1, 0, 0]));
    }

    #[test]
    fn op_counts_track_q_log_q() {
        let code = example_code(4);
        let mut dec = Decoder::new(&code, Role::C, DecoderConfig::default()).unwrap();
        let ops = dec.horizontal_step_ops(&[0; 14], 0.05).unwrap();
        // 84 edges, each with a forward and an inverse transform of 16 * 4 adds
        assert!(ops.adds >= 84 * 2 * 64);
        assert!(ops.total() > 0);
    }
}
