//! Binary images of the non-binary pair and the NBQC interchange format.

use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2p::FieldSpec;
use crate::nblift::{lift_gamma, solve_delta, verify_orthogonal, NbMatrix};
use crate::qcpair::{build_pair, expand, QcParams, SparseBinaryMatrix};
use crate::Role;

/// A complete CSS code: the non-binary pair and its binary expansion.
#[derive(Clone, Debug)]
pub struct CssCodePair {
    pub field: Arc<FieldSpec>,
    pub params: QcParams,
    pub gamma: NbMatrix,
    pub delta: NbMatrix,
    pub hc: SparseBinaryMatrix,
    pub hd: SparseBinaryMatrix,
}

/// Replaces every entry by its p x p companion image (or its transpose).
pub fn expand_nb(m: &NbMatrix, transpose: bool) -> SparseBinaryMatrix {
    let field = m.field();
    let p = field.p() as usize;
    let mut rows = vec![Vec::new(); m.n_rows() * p];
    for (r, row) in m.rows().iter().enumerate() {
        for &(c, x) in row {
            let block = if transpose {
                field.companion_transpose(x)
            } else {
                field.companion(x)
            };
            for i in 0..p {
                for j in 0..p {
                    if block.get(i, j) {
                        rows[r * p + i].push(c * p + j);
                    }
                }
            }
        }
    }
    SparseBinaryMatrix::new(m.n_rows() * p, m.n_cols() * p, rows)
}

/// Expands (H_Gamma, H_Delta) into (H_C, H_D) and re-checks binary
/// orthogonality.
pub fn expand_pair(gamma: NbMatrix, delta: NbMatrix, params: QcParams) -> Result<CssCodePair> {
    if !verify_orthogonal(&gamma, &delta)? {
        return Err(Error::OrthogonalityBroken);
    }
    let hc = expand_nb(&gamma, false);
    let hd = expand_nb(&delta, true);
    if !hc.is_orthogonal_to(&hd) {
        return Err(Error::OrthogonalityBroken);
    }
    Ok(CssCodePair {
        field: gamma.field().clone(),
        params,
        gamma,
        delta,
        hc,
        hd,
    })
}

impl CssCodePair {
    /// Full construction: QC pair, random lift of H_Gamma, propagation of
    /// H_Delta and binary expansion.
    pub fn construct(params: QcParams, field: Arc<FieldSpec>, seed: u64, reject_trivial: bool) -> Result<Self> {
        let (c, d) = build_pair(&params, false)?;
        let (hc_hat, hd_hat) = (expand(&c), expand(&d));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = lift_gamma(&hc_hat, &hd_hat, field, &mut rng, reject_trivial)?;
        let delta = solve_delta(&gamma, &hd_hat)?;
        expand_pair(gamma, delta, params)
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    /// Symbols per block, N = LP.
    pub fn n_symbols(&self) -> usize {
        self.gamma.n_cols()
    }

    /// Code length pN in qubits.
    pub fn n_qubits(&self) -> usize {
        self.p() as usize * self.n_symbols()
    }

    pub fn classical_rate(&self) -> f64 {
        1.0 - self.params.j as f64 / self.params.l as f64
    }

    pub fn quantum_rate(&self) -> f64 {
        1.0 - 2.0 * self.params.j as f64 / self.params.l as f64
    }

    pub fn matrix(&self, role: Role) -> &NbMatrix {
        match role {
            Role::C => &self.gamma,
            Role::D => &self.delta,
        }
    }

    pub fn binary(&self, role: Role) -> &SparseBinaryMatrix {
        match role {
            Role::C => &self.hc,
            Role::D => &self.hd,
        }
    }

    pub fn write_files(&self, prefix: &str) -> Result<(String, String)> {
        let g = format!("{prefix}.gamma.nbqc");
        let d = format!("{prefix}.delta.nbqc");
        std::fs::write(&g, write_matrix(&self.gamma, &self.params))?;
        std::fs::write(&d, write_matrix(&self.delta, &self.params))?;
        Ok((g, d))
    }

    /// Loads a pair from two NBQC files; the binary matrices are derived.
    pub fn load(gamma_path: impl AsRef<Path>, delta_path: impl AsRef<Path>) -> Result<Self> {
        let (g, d) = load_pair(gamma_path, delta_path)?;
        expand_pair(g.matrix, d.matrix, g.params)
    }
}

/// A parsed NBQC file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NbqcDocument {
    pub params: QcParams,
    pub matrix: NbMatrix,
}

fn role_tag(role: Role) -> &'static str {
    match role {
        Role::C => "GAMMA",
        Role::D => "DELTA",
    }
}

/// Renders a matrix in NBQC text form.
pub fn write_matrix(m: &NbMatrix, params: &QcParams) -> String {
    let field = m.field();
    let mut out = String::new();
    out.push_str("NBQC 1\n");
    let _ = writeln!(
        out,
        "p={} poly={:#x} J={} L={} P={} sigma={} tau={} role={}",
        field.p(),
        field.poly(),
        params.j,
        params.l,
        params.circulant,
        params.sigma,
        params.tau,
        role_tag(m.role())
    );
    let _ = writeln!(out, "M={} N={}", m.n_rows(), m.n_cols());
    for (r, row) in m.rows().iter().enumerate() {
        let _ = write!(out, "r{r}:");
        for &(c, x) in row {
            let log = field.log(x).expect("stored entries are nonzero");
            let _ = write!(out, " {c}:{log:x}");
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix_to<W: io::Write>(m: &NbMatrix, params: &QcParams, mut sink: W) -> Result<()> {
    sink.write_all(write_matrix(m, params).as_bytes())?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::ParseError { line, msg: msg.into() }
}

fn kv<'a>(line_no: usize, token: Option<&'a str>, key: &str) -> Result<&'a str> {
    let token = token.ok_or_else(|| parse_err(line_no, format!("missing {key}=")))?;
    token
        .strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| parse_err(line_no, format!("expected {key}=, found {token:?}")))
}

fn num<T: std::str::FromStr>(line_no: usize, s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| parse_err(line_no, format!("bad {what}: {s:?}")))
}

/// Parses NBQC text. When `expected` is given its degree and polynomial
/// must match the file header.
pub fn read_matrix(source: &str, expected: Option<&FieldSpec>) -> Result<NbqcDocument> {
    let mut lines = source.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (n, magic) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    if magic != "NBQC 1" {
        return Err(parse_err(n, format!("expected \"NBQC 1\", found {magic:?}")));
    }

    let (n, header) = lines.next().ok_or_else(|| parse_err(2, "missing header line"))?;
    let mut t = header.split(' ');
    let p: u32 = num(n, kv(n, t.next(), "p")?, "p")?;
    let poly_s = kv(n, t.next(), "poly")?;
    let poly = poly_s
        .strip_prefix("0x")
        .and_then(|h| u32::from_str_radix(h, 16).ok())
        .ok_or_else(|| parse_err(n, format!("bad poly: {poly_s:?}")))?;
    let j: usize = num(n, kv(n, t.next(), "J")?, "J")?;
    let l: usize = num(n, kv(n, t.next(), "L")?, "L")?;
    let circ: u64 = num(n, kv(n, t.next(), "P")?, "P")?;
    let sigma: u64 = num(n, kv(n, t.next(), "sigma")?, "sigma")?;
    let tau: u64 = num(n, kv(n, t.next(), "tau")?, "tau")?;
    let role = match kv(n, t.next(), "role")? {
        "GAMMA" => Role::C,
        "DELTA" => Role::D,
        other => return Err(parse_err(n, format!("bad role: {other:?}"))),
    };
    if let Some(extra) = t.next() {
        return Err(parse_err(n, format!("unexpected token {extra:?}")));
    }
    let field = FieldSpec::new(p, Some(poly)).map_err(|e| parse_err(n, e.to_string()))?;
    if let Some(exp) = expected {
        if exp.p() != field.p() || exp.poly() != field.poly() {
            return Err(Error::FieldMismatch(format!(
                "file has p={} poly={:#x}, expected p={} poly={:#x}",
                field.p(),
                field.poly(),
                exp.p(),
                exp.poly()
            )));
        }
    }

    let (n, dims) = lines.next().ok_or_else(|| parse_err(3, "missing dimension line"))?;
    let mut t = dims.split(' ');
    let rows_n: usize = num(n, kv(n, t.next(), "M")?, "M")?;
    let cols_n: usize = num(n, kv(n, t.next(), "N")?, "N")?;
    if let Some(extra) = t.next() {
        return Err(parse_err(n, format!("unexpected token {extra:?}")));
    }

    let mut rows = Vec::with_capacity(rows_n);
    for r in 0..rows_n {
        let (n, line) = lines.next().ok_or_else(|| parse_err(4 + r, format!("missing row {r}")))?;
        let prefix = format!("r{r}:");
        let body = line
            .strip_prefix(&prefix)
            .ok_or_else(|| parse_err(n, format!("expected {prefix:?}")))?;
        let mut row = Vec::new();
        let mut last: Option<usize> = None;
        if !body.is_empty() {
            let body = body
                .strip_prefix(' ')
                .ok_or_else(|| parse_err(n, "expected a space after the row label"))?;
            for entry in body.split(' ') {
                let (c, h) = entry
                    .split_once(':')
                    .ok_or_else(|| parse_err(n, format!("bad entry {entry:?}")))?;
                let c: usize = num(n, c, "column")?;
                if c >= cols_n {
                    return Err(parse_err(n, format!("column {c} out of range")));
                }
                if last.is_some_and(|prev| c <= prev) {
                    return Err(parse_err(n, "columns must be strictly ascending"));
                }
                last = Some(c);
                if h.is_empty() || h.chars().any(|ch| !matches!(ch, '0'..='9' | 'a'..='f')) {
                    return Err(parse_err(n, format!("bad hex log {h:?}")));
                }
                let log = u32::from_str_radix(h, 16).map_err(|_| parse_err(n, format!("bad hex log {h:?}")))?;
                if log >= field.order() {
                    return Err(parse_err(n, format!("log {log} exceeds 2^p - 2")));
                }
                row.push((c, field.exp(log as i64)));
            }
        }
        rows.push(row);
    }
    if let Some((n, extra)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(parse_err(n, format!("trailing content {extra:?}")));
    }
    let matrix = NbMatrix::new(cols_n, role, Arc::new(field), rows)?;
    Ok(NbqcDocument {
        params: QcParams::new(j, l, circ, sigma, tau),
        matrix,
    })
}

pub fn read_matrix_file(path: impl AsRef<Path>, expected: Option<&FieldSpec>) -> Result<NbqcDocument> {
    let text = std::fs::read_to_string(path)?;
    read_matrix(&text, expected)
}

/// Reads a Gamma/Delta pair and checks that the headers agree.
pub fn load_pair(gamma_path: impl AsRef<Path>, delta_path: impl AsRef<Path>) -> Result<(NbqcDocument, NbqcDocument)> {
    let g = read_matrix_file(gamma_path, None)?;
    let d = read_matrix_file(delta_path, Some(g.matrix.field()))?;
    if g.matrix.role() != Role::C || d.matrix.role() != Role::D {
        return Err(Error::DomainError("expected a GAMMA file and a DELTA file".into()));
    }
    if g.params != d.params {
        return Err(Error::DomainError("GAMMA and DELTA headers disagree on QC parameters".into()));
    }
    // share one field instance between the two matrices
    let field = g.matrix.field().clone();
    let d_matrix = NbMatrix::new(d.matrix.n_cols(), Role::D, field, d.matrix.rows().to_vec())?;
    Ok((g, NbqcDocument { params: d.params, matrix: d_matrix }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2p::FieldElement;
    use crate::nblift::gamma_from_logs;
    use proptest::prelude::*;

    fn example_params() -> QcParams {
        QcParams::new(2, 6, 7, 2, 3)
    }

    #[test]
    fn one_by_one_all_ones() {
        let f = Arc::new(FieldSpec::new(4, None).unwrap());
        let m = NbMatrix::new(1, Role::C, f, vec![vec![(0, FieldElement::ONE)]]).unwrap();
        let text = write_matrix(&m, &example_params());
        assert_eq!(
            text,
            "NBQC 1\np=4 poly=0x3 J=2 L=6 P=7 sigma=2 tau=3 role=GAMMA\nM=1 N=1\nr0: 0:0\n"
        );
        let back = read_matrix(&text, None).unwrap();
        assert_eq!(back.matrix, m);
    }

    #[test]
    fn alpha_eleven_renders_b() {
        let f = Arc::new(FieldSpec::new(4, None).unwrap());
        let x = f.exp(11);
        let m = NbMatrix::new(3, Role::D, f, vec![vec![(2, x)], vec![]]).unwrap();
        let text = write_matrix(&m, &example_params());
        assert!(text.ends_with("M=2 N=3\nr0: 2:b\nr1:\n"), "{text}");
        assert_eq!(read_matrix(&text, None).unwrap().matrix, m);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let good = "NBQC 1\np=4 poly=0x3 J=2 L=6 P=7 sigma=2 tau=3 role=GAMMA\nM=1 N=2\nr0: 0:1 1:e\n";
        assert!(read_matrix(good, None).is_ok());
        let cases = [
            ("NBQC 2\n", 1),
            (&good.replace("role=GAMMA", "role=X"), 2),
            (&good.replace("M=1", "M=x"), 3),
            (&good.replace("1:e", "1:f"), 4),
            (&good.replace("0:1 1:e", "1:1 0:e"), 4),
            (&good.replace("0:1", "0:A"), 4),
            (&format!("{good}junk\n"), 5),
        ];
        for (text, line) in cases {
            match read_matrix(text, None) {
                Err(Error::ParseError { line: got, .. }) => assert_eq!(got, line, "{text}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
        let wrong = FieldSpec::new(4, Some(0x9)).unwrap();
        assert!(matches!(read_matrix(good, Some(&wrong)), Err(Error::FieldMismatch(_))));
    }

    #[test]
    fn all_ones_expansion_is_identity_blocks() {
        let params = example_params();
        let (c, d) = build_pair(&params, false).unwrap();
        let (hc_hat, hd_hat) = (expand(&c), expand(&d));
        let f = Arc::new(FieldSpec::new(4, None).unwrap());
        let gamma = gamma_from_logs(&hc_hat, f.clone(), &[0; 84]).unwrap();
        let delta = solve_delta(&gamma, &hd_hat).unwrap();
        let code = expand_pair(gamma, delta, params).unwrap();
        for (r, row) in hc_hat.rows().iter().enumerate() {
            for i in 0..4 {
                let expected: Vec<usize> = row.iter().map(|&c| c * 4 + i).collect();
                assert_eq!(code.hc.row(r * 4 + i), expected.as_slice());
            }
        }
    }

    #[test]
    fn example_two_dimensions_and_rates() {
        let f = Arc::new(FieldSpec::new(4, None).unwrap());
        let code = CssCodePair::construct(example_params(), f, 5, true).unwrap();
        assert_eq!((code.hc.n_rows(), code.hc.n_cols()), (56, 168));
        assert_eq!((code.hd.n_rows(), code.hd.n_cols()), (56, 168));
        assert_eq!(code.n_qubits(), 168);
        assert!((code.classical_rate() - 2.0 / 3.0).abs() < 1e-15);
        assert!((code.quantum_rate() - 1.0 / 3.0).abs() < 1e-15);
        assert!((code.quantum_rate() - (2.0 * code.classical_rate() - 1.0)).abs() < 1e-15);
        // symbol level is 4-cycle free, the binary image is not
        assert!(!code.gamma.support().has_4cycle());
        assert!(!code.delta.support().has_4cycle());
        assert!(code.hc.has_4cycle());
        assert!(code.hd.has_4cycle());
        assert!(code.hc.col_weights().iter().all(|&w| w <= 2 * 4));
        assert!(code.hc.nnz() <= 2 * 6 * 7 * 16);
    }

    #[test]
    fn non_orthogonal_input_rejected() {
        let f = Arc::new(FieldSpec::new(4, None).unwrap());
        let code = CssCodePair::construct(example_params(), f.clone(), 5, true).unwrap();
        let mut delta = code.delta.clone();
        let (c, x) = delta.row(0)[0];
        delta.set(0, c, f.mul(x, f.alpha())).unwrap();
        assert_eq!(
            expand_pair(code.gamma.clone(), delta, code.params).unwrap_err(),
            Error::OrthogonalityBroken
        );
    }

    fn arb_matrix() -> impl Strategy<Value = NbMatrix> {
        (2u32..=8, 1usize..6, 1usize..12).prop_flat_map(|(p, rows, cols)| {
            let q = 1u32 << p;
            let row = prop::collection::btree_map(0..cols, 1..q, 0..=cols);
            prop::collection::vec(row, rows).prop_map(move |rs| {
                let f = Arc::new(FieldSpec::new(p, None).unwrap());
                let rows = rs
                    .into_iter()
                    .map(|r| r.into_iter().map(|(c, v)| (c, FieldElement(v as u16))).collect())
                    .collect();
                NbMatrix::new(cols, Role::D, f, rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn write_read_write_is_byte_identical(m in arb_matrix()) {
            let params = QcParams::new(2, 8, 17, 4, 3);
            let first = write_matrix(&m, &params);
            let doc = read_matrix(&first, None).unwrap();
            prop_assert_eq!(&doc.matrix, &m);
            prop_assert_eq!(doc.params, params);
            prop_assert_eq!(write_matrix(&doc.matrix, &doc.params), first);
        }
    }
}
