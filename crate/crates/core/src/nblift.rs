//! Lifting an orthogonal binary QC pair to orthogonal matrices over GF(2^p).
//!
//! With column weight 2, the support of row m' of H_D meets H_C in a single
//! cycle of length 2L: columns n_0..n_{L-1} and checks m_0..m_{L-1} with
//! m_i adjacent to n_i and n_{i+1}. Row m' of H_Delta lies in the null space
//! of H_Gamma iff the bidiagonal cyclic system on that cycle is singular,
//! i.e. the product of gamma over E1 = {(m_i, n_i)} equals the product over
//! E2 = {(m_i, n_{i+1})}. Taking logs turns this into a homogeneous linear
//! equation over Z_{2^p - 1}.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2p::{FieldElement, FieldSpec};
use crate::modring::{solve_mod, ModSystem, SolutionSpace};
use crate::qcpair::{pow_mod, QcParams, SparseBinaryMatrix};
use crate::Role;

/// Sparse matrix over GF(2^p) with nonzero entries only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NbMatrix {
    n_rows: usize,
    n_cols: usize,
    role: Role,
    field: Arc<FieldSpec>,
    rows: Vec<Vec<(usize, FieldElement)>>,
}

impl NbMatrix {
    pub fn new(
        n_cols: usize,
        role: Role,
        field: Arc<FieldSpec>,
        mut rows: Vec<Vec<(usize, FieldElement)>>,
    ) -> Result<Self> {
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable_by_key(|&(c, _)| c);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::DimensionMismatch(format!("row {r} repeats column {}", w[0].0)));
                }
            }
            for &(c, x) in row.iter() {
                if c >= n_cols {
                    return Err(Error::DimensionMismatch(format!("row {r}: column {c} >= {n_cols}")));
                }
                if x.is_zero() || !field.contains(x) {
                    return Err(Error::DomainError(format!("row {r}, column {c}: entry {x} not a nonzero field element")));
                }
            }
        }
        Ok(NbMatrix {
            n_rows: rows.len(),
            n_cols,
            role,
            field,
            rows,
        })
    }

    /// Every one of `support` replaced by the field element `x`.
    pub fn constant(support: &SparseBinaryMatrix, role: Role, field: Arc<FieldSpec>, x: FieldElement) -> Result<Self> {
        let rows = support.rows().iter().map(|r| r.iter().map(|&c| (c, x)).collect()).collect();
        NbMatrix::new(support.n_cols(), role, field, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn row(&self, r: usize) -> &[(usize, FieldElement)] {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[Vec<(usize, FieldElement)>] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.rows[r]
            .binary_search_by_key(&c, |&(col, _)| col)
            .map_or(FieldElement::ZERO, |i| self.rows[r][i].1)
    }

    pub fn set(&mut self, r: usize, c: usize, x: FieldElement) -> Result<()> {
        if x.is_zero() {
            return Err(Error::DomainError("stored entries must be nonzero".into()));
        }
        match self.rows[r].binary_search_by_key(&c, |&(col, _)| col) {
            Ok(i) => self.rows[r][i].1 = x,
            Err(_) => return Err(Error::DomainError(format!("({r}, {c}) is outside the support"))),
        }
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn support(&self) -> SparseBinaryMatrix {
        let rows = self.rows.iter().map(|r| r.iter().map(|&(c, _)| c).collect()).collect();
        SparseBinaryMatrix::new(self.n_rows, self.n_cols, rows)
    }

    /// (row, element) pairs per column.
    pub fn col_entries(&self) -> Vec<Vec<(usize, FieldElement)>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, x) in row {
                cols[c].push((r, x));
            }
        }
        cols
    }
}

/// The 2L-cycle traced by one row of H_D through the Tanner graph of H_C.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleStructure {
    pub m_prime: usize,
    /// n_0..n_{L-1}
    pub n_seq: Vec<usize>,
    /// m_0..m_{L-1}
    pub m_seq: Vec<usize>,
}

impl CycleStructure {
    pub fn len(&self) -> usize {
        self.n_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_seq.is_empty()
    }

    /// Positions (m_i, n_i).
    pub fn e1(&self) -> Vec<(usize, usize)> {
        self.m_seq.iter().copied().zip(self.n_seq.iter().copied()).collect()
    }

    /// Positions (m_i, n_{i+1 mod L}).
    pub fn e2(&self) -> Vec<(usize, usize)> {
        let l = self.len();
        (0..l).map(|i| (self.m_seq[i], self.n_seq[(i + 1) % l])).collect()
    }
}

fn not_a_cycle(m_prime: usize, reason: impl Into<String>) -> Error {
    Error::NotACycle {
        m_prime,
        reason: reason.into(),
    }
}

fn walk_cycle(
    hc: &SparseBinaryMatrix,
    hc_cols: &[Vec<usize>],
    hd: &SparseBinaryMatrix,
    m_prime: usize,
) -> Result<CycleStructure> {
    if m_prime >= hd.n_rows() {
        return Err(not_a_cycle(m_prime, "row index out of range"));
    }
    if hc.n_cols() != hd.n_cols() {
        return Err(Error::DimensionMismatch("H_C and H_D column counts differ".into()));
    }
    let support = hd.row(m_prime);
    let l = support.len();
    if l < 2 {
        return Err(not_a_cycle(m_prime, "row weight below 2"));
    }
    let in_support = |n: usize| support.binary_search(&n).is_ok();
    let checks_of = |n: usize| -> Result<(usize, usize)> {
        match hc_cols[n].as_slice() {
            &[a, b] => Ok((a, b)),
            other => Err(not_a_cycle(m_prime, format!("column {n} of H_C has weight {}", other.len()))),
        }
    };
    let partner = |m: usize, n: usize| -> Result<usize> {
        let hits: Vec<usize> = hc.row(m).iter().copied().filter(|&c| c != n && in_support(c)).collect();
        match hits.as_slice() {
            &[c] => Ok(c),
            _ => Err(not_a_cycle(m_prime, format!("row {m} of H_C meets the support {} times", hits.len() + 1))),
        }
    };

    let n0 = support[0];
    let (m0, m_last) = checks_of(n0)?;
    let mut n_seq = vec![n0];
    let mut m_seq = vec![m0];
    for i in 0..l {
        let next = partner(m_seq[i], n_seq[i])?;
        if i == l - 1 {
            if next != n0 || m_seq[i] != m_last {
                return Err(not_a_cycle(m_prime, format!("walk did not close after {} steps", 2 * l)));
            }
            break;
        }
        if n_seq.contains(&next) {
            return Err(not_a_cycle(m_prime, format!("walk closed early at column {next}")));
        }
        let (a, b) = checks_of(next)?;
        let m_next = if a == m_seq[i] { b } else { a };
        if m_seq.contains(&m_next) {
            return Err(not_a_cycle(m_prime, format!("walk revisits check {m_next}")));
        }
        n_seq.push(next);
        m_seq.push(m_next);
    }
    Ok(CycleStructure { m_prime, n_seq, m_seq })
}

/// Traces the cycle of row `m_prime` of H_D through H_C. The walk starts
/// at the smallest column of the row and its lower-indexed check.
pub fn cycle_structure(hc: &SparseBinaryMatrix, hd: &SparseBinaryMatrix, m_prime: usize) -> Result<CycleStructure> {
    walk_cycle(hc, &hc.col_supports(), hd, m_prime)
}

/// Cycle structures of every row of H_D.
pub fn all_cycle_structures(hc: &SparseBinaryMatrix, hd: &SparseBinaryMatrix) -> Result<Vec<CycleStructure>> {
    let cols = hc.col_supports();
    (0..hd.n_rows()).map(|m| walk_cycle(hc, &cols, hd, m)).collect()
}

/// Closed-form cycle for an upper-half row (m' < P) of the QC construction.
///
/// The odd-indexed columns use sigma^{i mod L/2}; the inverse power yields
/// columns that are not in the support at all.
pub fn closed_form_cycle(params: &QcParams, m_prime: usize) -> Option<CycleStructure> {
    let p = params.circulant;
    if m_prime as u64 >= p || params.j != 2 || !params.l.is_multiple_of(2) {
        return None;
    }
    let half = params.l / 2;
    let (s, t) = (params.sigma % p, params.tau % p);
    let mp = m_prime as i64;
    let red = |x: i64| x.rem_euclid(p as i64) as usize;
    let sp = |e: i64| pow_mod(s, e, p) as i64;
    let ts = |e: i64| (t * pow_mod(s, e, p) % p) as i64;
    let pu = p as usize;
    let mut n_seq = vec![0usize; params.l];
    let mut m_seq = vec![0usize; params.l];
    for i in 0..half as i64 {
        let iu = i as usize;
        n_seq[2 * iu] = red(-ts(-i) + mp) + iu * pu;
        let k = (-i).rem_euclid(half as i64);
        n_seq[2 * iu + 1] = red(-sp(-k) + mp) + (k as usize + half) * pu;
        m_seq[2 * iu] = red(-sp(i) - ts(-i) + mp);
        let odd = (2 * i - 1).rem_euclid(params.l as i64) as usize;
        m_seq[odd] = red(-sp(i - 1) - ts(-i) + mp) + pu;
    }
    Some(CycleStructure { m_prime, n_seq, m_seq })
}

/// Maps each nonzero position of H_C to a variable index, row-major.
#[derive(Clone, Debug)]
pub struct PositionIndex {
    offsets: Vec<usize>,
    total: usize,
}

impl PositionIndex {
    pub fn new(hc: &SparseBinaryMatrix) -> Self {
        let mut offsets = Vec::with_capacity(hc.n_rows());
        let mut total = 0;
        for row in hc.rows() {
            offsets.push(total);
            total += row.len();
        }
        PositionIndex { offsets, total }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn index(&self, hc: &SparseBinaryMatrix, m: usize, n: usize) -> Option<usize> {
        hc.row(m).binary_search(&n).ok().map(|k| self.offsets[m] + k)
    }
}

/// Log-domain constraints of the lift, with the cycles that produced them.
#[derive(Clone, Debug)]
pub struct LiftConstraints {
    pub system: ModSystem,
    pub cycles: Vec<CycleStructure>,
    pub positions: PositionIndex,
}

/// One equation per row m' of H_D: +1 on E1(m'), -1 on E2(m'), over
/// Z_{2^p - 1}, with one unknown per nonzero of H_C.
pub fn assemble_constraints(hc: &SparseBinaryMatrix, hd: &SparseBinaryMatrix, modulus: u64) -> Result<LiftConstraints> {
    let cycles = all_cycle_structures(hc, hd)?;
    let positions = PositionIndex::new(hc);
    let mut system = ModSystem::new(modulus, positions.len());
    for cs in &cycles {
        let mut eq = Vec::with_capacity(2 * cs.len());
        for (m, n) in cs.e1() {
            eq.push((positions.index(hc, m, n).expect("E1 position in H_C"), 1));
        }
        for (m, n) in cs.e2() {
            eq.push((positions.index(hc, m, n).expect("E2 position in H_C"), -1));
        }
        system.push(eq);
    }
    Ok(LiftConstraints {
        system,
        cycles,
        positions,
    })
}

/// Builds H_Gamma from one log assignment (one value per nonzero of H_C).
pub fn gamma_from_logs(hc: &SparseBinaryMatrix, field: Arc<FieldSpec>, logs: &[u64]) -> Result<NbMatrix> {
    let positions = PositionIndex::new(hc);
    if logs.len() != positions.len() {
        return Err(Error::DimensionMismatch(format!("{} logs for {} positions", logs.len(), positions.len())));
    }
    let rows = hc
        .rows()
        .iter()
        .enumerate()
        .map(|(m, row)| row.iter().enumerate().map(|(k, &n)| (n, field.exp(logs[positions.offsets[m] + k] as i64))).collect())
        .collect();
    NbMatrix::new(hc.n_cols(), Role::C, field, rows)
}

/// Samples H_Gamma uniformly from the solutions of the lift constraints.
/// With `reject_trivial` the all-ones lift is redrawn.
pub fn lift_gamma<R: Rng + ?Sized>(
    hc: &SparseBinaryMatrix,
    hd: &SparseBinaryMatrix,
    field: Arc<FieldSpec>,
    rng: &mut R,
    reject_trivial: bool,
) -> Result<NbMatrix> {
    let constraints = assemble_constraints(hc, hd, field.order() as u64)?;
    let space = solve_mod(&constraints.system);
    let logs = draw_logs(&space, rng, reject_trivial)?;
    gamma_from_logs(hc, field, &logs)
}

fn draw_logs<R: Rng + ?Sized>(space: &SolutionSpace, rng: &mut R, reject_trivial: bool) -> Result<Vec<u64>> {
    if reject_trivial && space.is_trivial() {
        return Err(Error::TrivialOnly);
    }
    loop {
        let x = space.sample(rng);
        if !reject_trivial || x.iter().any(|&v| v != 0) {
            return Ok(x);
        }
    }
}

/// Propagates H_Delta along each cycle with delta_{m', n_0} = 1.
pub fn solve_delta(gamma: &NbMatrix, hd: &SparseBinaryMatrix) -> Result<NbMatrix> {
    let field = gamma.field().clone();
    let hc = gamma.support();
    let cycles = all_cycle_structures(&hc, hd)?;
    let mut rows = Vec::with_capacity(hd.n_rows());
    for cs in &cycles {
        let l = cs.len();
        let mut delta = vec![FieldElement::ZERO; l];
        delta[0] = FieldElement::ONE;
        for i in 0..l {
            let m = cs.m_seq[i];
            let here = gamma.get(m, cs.n_seq[i]);
            let next = gamma.get(m, cs.n_seq[(i + 1) % l]);
            let value = field.mul(delta[i], field.div(here, next)?);
            if i + 1 < l {
                delta[i + 1] = value;
            } else if value != delta[0] {
                return Err(Error::ClosureViolation(cs.m_prime));
            }
        }
        rows.push(cs.n_seq.iter().copied().zip(delta).collect());
    }
    NbMatrix::new(hd.n_cols(), Role::D, field, rows)
}

/// Whether every row of `gamma` is orthogonal to every row of `delta`.
pub fn verify_orthogonal(gamma: &NbMatrix, delta: &NbMatrix) -> Result<bool> {
    if gamma.n_cols() != delta.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} columns vs {} columns",
            gamma.n_cols(),
            delta.n_cols()
        )));
    }
    if gamma.field() != delta.field() {
        return Err(Error::FieldMismatch("matrices are over different fields".into()));
    }
    let field = gamma.field();
    let dcols = delta.col_entries();
    let mut acc: HashMap<(usize, usize), FieldElement> = HashMap::new();
    for (m, row) in gamma.rows().iter().enumerate() {
        for &(n, g) in row {
            for &(mp, d) in &dcols[n] {
                let e = acc.entry((m, mp)).or_insert(FieldElement::ZERO);
                *e = field.add(*e, field.mul(g, d));
            }
        }
    }
    Ok(acc.values().all(|x| x.is_zero()))
}

/// Product of gamma over E1 equals the product over E2.
pub fn det_condition_holds(gamma: &NbMatrix, cs: &CycleStructure) -> bool {
    let field = gamma.field();
    let prod = |pos: Vec<(usize, usize)>| pos.into_iter().fold(FieldElement::ONE, |acc, (m, n)| field.mul(acc, gamma.get(m, n)));
    prod(cs.e1()) == prod(cs.e2())
}
