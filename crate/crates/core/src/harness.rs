//! Command implementations behind the `nbcss` binary: construction,
//! verification, Monte Carlo simulation and rate-limit curves.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::binexpand::{expand_nb, load_pair, CssCodePair};
use crate::channel::{sample_error, ChannelMode, ChannelParams, ParityMaps};
use crate::decoder::{DecodeStatus, Decoder, DecoderConfig};
use crate::error::{Error, Result};
use crate::gf2p::FieldSpec;
use crate::nblift::{all_cycle_structures, det_condition_holds, verify_orthogonal, NbMatrix};
use crate::qcpair::{build_pair, expand, has_4cycle, QcParams};
use crate::Role;

/// Environment variable that sets the number of simulation worker threads.
pub const WORKERS_ENV: &str = "NBCSS_WORKERS";

pub const CSV_HEADER: &str = "f_m,role,trials,block_errors,bler,mean_iterations,fail_count,mismatch_count,seed";

pub const LIMITS_HEADER: &str = "f_m,shannon,s2,bdd";

// ---------------------------------------------------------------- construct

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructSummary {
    pub n_qubits: usize,
    pub classical_rate: f64,
    pub quantum_rate: f64,
    pub gamma_path: String,
    pub delta_path: String,
}

impl fmt::Display for ConstructSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n_qubits)?;
        writeln!(f, "R_C={:.6}", self.classical_rate)?;
        writeln!(f, "R_Q={:.6}", self.quantum_rate)?;
        writeln!(f, "wrote {}", self.gamma_path)?;
        write!(f, "wrote {}", self.delta_path)
    }
}

/// Builds a code pair and writes `<prefix>.gamma.nbqc` / `<prefix>.delta.nbqc`.
pub fn cmd_construct(
    p: u32,
    poly: Option<u32>,
    params: QcParams,
    seed: u64,
    reject_trivial: bool,
    out_prefix: &str,
) -> Result<ConstructSummary> {
    let field = Arc::new(FieldSpec::new(p, poly)?);
    let code = CssCodePair::construct(params, field, seed, reject_trivial)?;
    let (gamma_path, delta_path) = code.write_files(out_prefix)?;
    Ok(ConstructSummary {
        n_qubits: code.n_qubits(),
        classical_rate: code.classical_rate(),
        quantum_rate: code.quantum_rate(),
        gamma_path,
        delta_path,
    })
}

// ------------------------------------------------------------------- verify

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckResult {
            name,
            passed,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(f, "{tag} {}", c.name)?;
            } else {
                writeln!(f, "{tag} {} ({})", c.name, c.detail)?;
            }
        }
        write!(f, "{}", if self.all_passed() { "all checks passed" } else { "some checks failed" })
    }
}

/// Runs every structural invariant on a (Gamma, Delta) pair.
pub fn verify_matrices(gamma: &NbMatrix, delta: &NbMatrix, params: &QcParams) -> VerifyReport {
    let mut r = VerifyReport::default();
    let (sg, sd) = (gamma.support(), delta.support());

    match verify_orthogonal(gamma, delta) {
        Ok(ok) => r.push("nonbinary_orthogonality", ok, ""),
        Err(e) => r.push("nonbinary_orthogonality", false, e.to_string()),
    }

    let (hc, hd) = (expand_nb(gamma, false), expand_nb(delta, true));
    let bin_ok = hc.n_cols() == hd.n_cols() && hc.is_orthogonal_to(&hd);
    r.push("binary_orthogonality", bin_ok, format!("H_C {}x{}, H_D {}x{}", hc.n_rows(), hc.n_cols(), hd.n_rows(), hd.n_cols()));

    let bad_cols = |s: &crate::SparseBinaryMatrix| s.col_weights().iter().filter(|&&w| w != params.j).count();
    let (bc, bd) = (bad_cols(&sg), bad_cols(&sd));
    r.push("column_weight", bc == 0 && bd == 0, format!("expected {}, {} + {} columns differ", params.j, bc, bd));

    let bad_rows = |s: &crate::SparseBinaryMatrix| s.row_weights().iter().filter(|&&w| w != params.l).count();
    let (rc, rd) = (bad_rows(&sg), bad_rows(&sd));
    r.push("row_weight", rc == 0 && rd == 0, format!("expected {}, {} + {} rows differ", params.l, rc, rd));

    let cyc = has_4cycle(&sg) || has_4cycle(&sd);
    r.push("no_4_cycles", !cyc, "");

    let structure = build_pair(params, true).map(|(c, d)| (expand(&c), expand(&d)));
    let qc_ok = matches!(&structure, Ok((c, d)) if *c == sg && *d == sd);
    r.push("qc_support", qc_ok, "support matches the header parameters");

    let det = if qc_ok {
        let (c, d) = structure.expect("checked above");
        match all_cycle_structures(&c, &d) {
            Ok(cycles) => {
                let bad: Vec<usize> = cycles.iter().filter(|cs| !det_condition_holds(gamma, cs)).map(|cs| cs.m_prime).collect();
                (bad.is_empty(), if bad.is_empty() { String::new() } else { format!("rows {bad:?}") })
            }
            Err(e) => (false, e.to_string()),
        }
    } else {
        (false, "skipped: support is not the QC pair".to_string())
    };
    r.push("det_condition", det.0, det.1);
    r
}

/// Loads two NBQC files and verifies them.
pub fn cmd_verify(gamma_path: impl AsRef<Path>, delta_path: impl AsRef<Path>) -> Result<VerifyReport> {
    let (g, d) = load_pair(gamma_path, delta_path)?;
    Ok(verify_matrices(&g.matrix, &d.matrix, &g.params))
}

// ----------------------------------------------------------------- simulate

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub f_m: Vec<f64>,
    pub trials: u64,
    pub max_iter: usize,
    pub seed: u64,
    pub mode: ChannelMode,
    /// Count only decoder failures, crediting estimates that match the
    /// syndrome but differ from the true error.
    pub count_syndrome_only: bool,
    /// Worker threads; `None` reads the environment, then falls back to the
    /// number of CPUs.
    pub workers: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            f_m: vec![0.02],
            trials: 1000,
            max_iter: 32,
            seed: 1,
            mode: ChannelMode::Independent,
            count_syndrome_only: false,
            workers: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimRecord {
    pub f_m: f64,
    pub role: Role,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub mean_iterations: f64,
    pub fail_count: u64,
    pub mismatch_count: u64,
    pub seed: u64,
}

impl SimRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.9e},{:.6},{},{},{}",
            self.f_m, self.role, self.trials, self.block_errors, self.bler, self.mean_iterations, self.fail_count, self.mismatch_count, self.seed
        )
    }

    /// 95% Wilson score interval for the block error rate.
    pub fn wilson_interval(&self) -> (f64, f64) {
        wilson_interval(self.block_errors, self.trials, 1.959963984540054)
    }
}

pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Outcome of one constituent decode within a trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RoleOutcome {
    pub failed: bool,
    pub mismatched: bool,
    pub iterations: u32,
}

/// Both constituent outcomes of one trial, indexed by role (C then D).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrialOutcome {
    pub trial: u64,
    pub roles: [RoleOutcome; 2],
}

/// Seed of the stream family for the `f_index`-th flip rate.
fn point_seed(seed: u64, f_index: usize) -> u64 {
    seed ^ (f_index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Independent RNG for one trial; the result depends only on its arguments.
pub fn trial_rng(seed: u64, f_index: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed(seed, f_index));
    rng.set_stream(trial);
    rng
}

/// Worker count from the environment, or the number of CPUs.
pub fn workers_from_env() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

struct Workspace {
    maps: [Arc<ParityMaps>; 2],
    decoders: [Decoder; 2],
}

impl Workspace {
    fn new(code: &CssCodePair, max_iter: usize) -> Result<Self> {
        let config = DecoderConfig::with_max_iter(max_iter);
        let mc = Arc::new(ParityMaps::new(code, Role::C));
        let md = Arc::new(ParityMaps::new(code, Role::D));
        let decoders = [Decoder::from_maps(&mc, config)?, Decoder::from_maps(&md, config)?];
        Ok(Workspace { maps: [mc, md], decoders })
    }
}

fn run_trial(ws: &mut Workspace, code: &CssCodePair, cfg: &SimConfig, f_index: usize, trial: u64) -> Result<TrialOutcome> {
    let f_m = cfg.f_m[f_index];
    let params = ChannelParams::new(f_m, cfg.mode)?;
    let mut rng = trial_rng(cfg.seed, f_index, trial);
    let errors = sample_error(code.n_symbols(), code.p(), &params, &mut rng);
    let mut roles = [RoleOutcome { failed: false, mismatched: false, iterations: 0 }; 2];
    for (i, role) in [Role::C, Role::D].into_iter().enumerate() {
        let e = errors.for_role(role);
        let s = ws.maps[i].syndrome(e)?;
        let out = ws.decoders[i].decode(&s.symbols, f_m)?;
        roles[i] = RoleOutcome {
            failed: out.status == DecodeStatus::Fail,
            mismatched: out.status == DecodeStatus::Success && !cfg.count_syndrome_only && out.estimate.as_deref() != Some(&e.symbols[..]),
            iterations: out.iterations as u32,
        };
    }
    Ok(TrialOutcome { trial, roles })
}

/// Per-trial outcomes for one flip rate, in trial order, computed on
/// `workers` threads.
pub fn trial_outcomes(code: &CssCodePair, cfg: &SimConfig, f_index: usize, workers: usize) -> Result<Vec<TrialOutcome>> {
    if f_index >= cfg.f_m.len() {
        return Err(Error::DomainError(format!("flip-rate index {f_index} out of range")));
    }
    let template = Workspace::new(code, cfg.max_iter)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::DomainError(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map_init(
                || Workspace {
                    maps: template.maps.clone(),
                    decoders: template.decoders.clone(),
                },
                |ws, t| run_trial(ws, code, cfg, f_index, t),
            )
            .collect()
    })
}

/// Aggregates trial outcomes into one record per role.
pub fn aggregate(f_m: f64, seed: u64, outcomes: &[TrialOutcome]) -> [SimRecord; 2] {
    let trials = outcomes.len() as u64;
    let mk = |i: usize, role: Role| {
        let fail_count = outcomes.iter().filter(|o| o.roles[i].failed).count() as u64;
        let mismatch_count = outcomes.iter().filter(|o| o.roles[i].mismatched).count() as u64;
        let iters: u64 = outcomes.iter().map(|o| o.roles[i].iterations as u64).sum();
        let block_errors = fail_count + mismatch_count;
        SimRecord {
            f_m,
            role,
            trials,
            block_errors,
            bler: if trials == 0 { 0.0 } else { block_errors as f64 / trials as f64 },
            mean_iterations: if trials == 0 { 0.0 } else { iters as f64 / trials as f64 },
            fail_count,
            mismatch_count,
            seed,
        }
    };
    [mk(0, Role::C), mk(1, Role::D)]
}

/// Monte Carlo block-error-rate estimate for every flip rate and both roles.
pub fn simulate(code: &CssCodePair, cfg: &SimConfig) -> Result<Vec<SimRecord>> {
    if cfg.trials < 1 {
        return Err(Error::DomainError("trials must be at least 1".into()));
    }
    if cfg.max_iter < 1 {
        return Err(Error::DomainError("max_iter must be at least 1".into()));
    }
    for &f in &cfg.f_m {
        ChannelParams::new(f, cfg.mode)?;
    }
    let workers = cfg.workers.unwrap_or_else(workers_from_env);
    let mut records = Vec::with_capacity(cfg.f_m.len() * 2);
    for (i, &f) in cfg.f_m.iter().enumerate() {
        let outcomes = trial_outcomes(code, cfg, i, workers)?;
        records.extend(aggregate(f, cfg.seed, &outcomes));
    }
    Ok(records)
}

pub fn write_sim_csv<W: Write>(records: &[SimRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.to_csv_row())?;
    }
    Ok(())
}

/// Loads a pair, simulates it and writes the CSV to `out_csv`.
pub fn cmd_simulate(gamma_path: impl AsRef<Path>, delta_path: impl AsRef<Path>, cfg: &SimConfig, out_csv: impl AsRef<Path>) -> Result<Vec<SimRecord>> {
    let code = CssCodePair::load(gamma_path, delta_path)?;
    let records = simulate(&code, cfg)?;
    let mut buf = Vec::new();
    write_sim_csv(&records, &mut buf)?;
    std::fs::write(out_csv, buf)?;
    Ok(records)
}

// ------------------------------------------------------------------- limits

/// Binary entropy in bits; zero at both ends.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    /// Hashing bound of the depolarizing channel.
    Shannon,
    /// X and Z decoded separately at capacity.
    S2,
    /// Bounded distance decoding.
    Bdd,
}

impl LimitKind {
    pub fn eval(self, f_m: f64) -> f64 {
        match self {
            LimitKind::Shannon => {
                let f = 1.5 * f_m;
                1.0 - binary_entropy(f) - f * 3f64.log2()
            }
            LimitKind::S2 => 1.0 - 2.0 * binary_entropy(f_m),
            LimitKind::Bdd => 1.0 - 2.0 * binary_entropy(2.0 * f_m),
        }
    }

    // each curve is strictly decreasing on (0, upper)
    fn upper(self) -> f64 {
        match self {
            LimitKind::Shannon => 1.0 / 3.0,
            LimitKind::S2 => 1.0 / 3.0,
            LimitKind::Bdd => 0.25,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitPoint {
    pub f_m: f64,
    pub shannon: f64,
    pub s2: f64,
    pub bdd: f64,
}

impl LimitPoint {
    pub fn to_csv_row(&self) -> String {
        format!("{},{:.12},{:.12},{:.12}", self.f_m, self.shannon, self.s2, self.bdd)
    }
}

/// All three limits at `f_m`, which must lie in [0, 1/3).
pub fn limit_point(f_m: f64) -> Result<LimitPoint> {
    if !(0.0..1.0 / 3.0).contains(&f_m) {
        return Err(Error::DomainError(format!("f_m = {f_m} outside [0, 1/3)")));
    }
    Ok(LimitPoint {
        f_m,
        shannon: LimitKind::Shannon.eval(f_m),
        s2: LimitKind::S2.eval(f_m),
        bdd: LimitKind::Bdd.eval(f_m),
    })
}

/// The f_m at which `kind` equals `rate`, by bisection.
pub fn threshold(kind: LimitKind, rate: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, kind.upper());
    if !(kind.eval(hi) < rate && rate <= 1.0) {
        return Err(Error::DomainError(format!("rate {rate} not attained by {kind:?} on (0, {hi})")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kind.eval(mid) > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Evaluates the limits on a grid and writes them as CSV.
pub fn cmd_limits(grid: &[f64], out_csv: Option<&Path>) -> Result<Vec<LimitPoint>> {
    let points = grid.iter().map(|&f| limit_point(f)).collect::<Result<Vec<_>>>()?;
    if let Some(path) = out_csv {
        let mut text = String::from(LIMITS_HEADER);
        text.push('\n');
        for p in &points {
            text.push_str(&p.to_csv_row());
            text.push('\n');
        }
        std::fs::write(path, text)?;
    }
    Ok(points)
}
