//! Homogeneous linear systems over the residue ring Z_m.
//!
//! The modulus is typically 2^p - 1, which is composite for most p, so the
//! reduction uses Howell form: a row echelon form over Z_m whose pivots are
//! divisors of m and which is closed under annihilator multiples. Back
//! substitution over a Howell basis never gets stuck, which makes uniform
//! sampling of the solution module a simple top-down walk.

use rand::Rng;

/// One homogeneous equation: sum of `coeff * x[var]` is 0 mod m.
pub type Equation = Vec<(usize, i64)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModSystem {
    pub modulus: u64,
    pub n_vars: usize,
    pub equations: Vec<Equation>,
}

impl ModSystem {
    pub fn new(modulus: u64, n_vars: usize) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        ModSystem {
            modulus,
            n_vars,
            equations: Vec::new(),
        }
    }

    pub fn push(&mut self, eq: Equation) {
        debug_assert!(eq.iter().all(|&(v, _)| v < self.n_vars));
        self.equations.push(eq);
    }

    /// True when `x` satisfies every equation.
    pub fn is_satisfied(&self, x: &[u64]) -> bool {
        let m = self.modulus as i128;
        self.equations.iter().all(|eq| {
            let s: i128 = eq.iter().map(|&(v, c)| c as i128 * x[v] as i128).sum();
            s.rem_euclid(m) == 0
        })
    }

    fn dense_rows(&self) -> Vec<Vec<u64>> {
        let m = self.modulus as i64;
        self.equations
            .iter()
            .map(|eq| {
                let mut row = vec![0i64; self.n_vars];
                for &(v, c) in eq {
                    row[v] = (row[v] + c).rem_euclid(m);
                }
                row.into_iter().map(|x| x as u64).collect()
            })
            .collect()
    }
}

/// Reduced basis of the constraint module plus the column classification
/// needed to enumerate or sample solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSpace {
    modulus: u64,
    n_vars: usize,
    /// Howell-form rows; `rows[k]` has its pivot at `pivot_cols[k]`.
    rows: Vec<Vec<u64>>,
    pivot_cols: Vec<usize>,
    free_vars: Vec<usize>,
}

impl SolutionSpace {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivot_cols
    }

    pub fn free_vars(&self) -> &[usize] {
        &self.free_vars
    }

    /// Number of solutions, as log2 (it overflows any integer type quickly).
    pub fn log2_size(&self) -> f64 {
        let m = self.modulus as f64;
        let free = self.free_vars.len() as f64 * m.log2();
        let pivots: f64 = self.rows.iter().zip(&self.pivot_cols).map(|(r, &c)| (r[c] as f64).log2()).sum();
        free + pivots
    }

    /// Whether the space contains anything besides the zero vector.
    pub fn is_trivial(&self) -> bool {
        self.modulus == 1 || (self.free_vars.is_empty() && self.rows.iter().zip(&self.pivot_cols).all(|(r, &c)| r[c] == 1))
    }

    /// Draws a uniform element of the solution module. Free variables are
    /// uniform on Z_m; each pivot variable with pivot `a` has exactly `a`
    /// consistent values, one of which is drawn uniformly.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        self.back_substitute(|choices| rng.gen_range(0..choices))
    }

    /// Enumerates every solution. Intended for small systems.
    pub fn enumerate(&self) -> Vec<Vec<u64>> {
        let m = self.modulus;
        // per column, how many independent choices it has
        let mut choices = vec![m; self.n_vars];
        for (r, &c) in self.rows.iter().zip(&self.pivot_cols) {
            choices[c] = r[c];
        }
        let total: u64 = choices.iter().product();
        (0..total)
            .map(|mut idx| {
                // decode idx in mixed radix, consumed in back-substitution order
                self.back_substitute(|k| {
                    let d = idx % k;
                    idx /= k;
                    d
                })
            })
            .collect()
    }

    fn back_substitute(&self, mut pick: impl FnMut(u64) -> u64) -> Vec<u64> {
        let m = self.modulus;
        let mut x = vec![0u64; self.n_vars];
        if m == 1 {
            return x;
        }
        let mut row_of = vec![usize::MAX; self.n_vars];
        for (k, &c) in self.pivot_cols.iter().enumerate() {
            row_of[c] = k;
        }
        for c in (0..self.n_vars).rev() {
            if row_of[c] == usize::MAX {
                x[c] = pick(m);
                continue;
            }
            let row = &self.rows[row_of[c]];
            let a = row[c];
            let mut s: u128 = 0;
            for j in c + 1..self.n_vars {
                s += row[j] as u128 * x[j] as u128;
            }
            let s = (s % m as u128) as u64;
            let rhs = (m - s) % m;
            debug_assert_eq!(rhs % a, 0, "Howell property violated");
            let step = m / a;
            let base = rhs / a;
            x[c] = (base + pick(a) * step) % m;
        }
        x
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Extended gcd on signed integers: returns (g, s, t) with s*a + t*b = g >= 0.
fn xgcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let qt = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - qt * r1);
        (s0, s1) = (s1, s0 - qt * s1);
        (t0, t1) = (t1, t0 - qt * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

fn inverse_mod(a: u64, m: u64) -> Option<u64> {
    let (g, s, _) = xgcd(a as i128, m as i128);
    (g == 1).then(|| s.rem_euclid(m as i128) as u64)
}

/// A unit `u` of Z_m with `u * a = gcd(a, m) (mod m)`.
fn normalizing_unit(a: u64, m: u64) -> u64 {
    let g = gcd(a, m);
    let m_red = m / g;
    if m_red == 1 {
        return 1;
    }
    let u0 = inverse_mod((a / g) % m_red, m_red).expect("a/g is a unit mod m/g");
    // lift u0 from Z_{m/g} to a unit of Z_m
    let mut u = u0;
    while gcd(u, m) != 1 {
        u += m_red;
    }
    u % m
}

fn is_unit(a: u64, m: u64) -> bool {
    gcd(a, m) == 1
}

fn axpy(dst: &mut [u64], k: u64, src: &[u64], m: u64) {
    if k == 0 {
        return;
    }
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = ((*d as u128 + k as u128 * s as u128) % m as u128) as u64;
    }
}

fn scale(row: &mut [u64], k: u64, m: u64) {
    for v in row.iter_mut() {
        *v = ((*v as u128 * k as u128) % m as u128) as u64;
    }
}

/// Reduces a list of rows over Z_m to Howell form. Zero rows are dropped.
pub fn howell_form(mut rows: Vec<Vec<u64>>, n_cols: usize, m: u64) -> (Vec<Vec<u64>>, Vec<usize>) {
    if m == 1 {
        return (Vec::new(), Vec::new());
    }
    for r in rows.iter_mut() {
        for v in r.iter_mut() {
            *v %= m;
        }
    }
    let mut out_rows: Vec<Vec<u64>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for c in 0..n_cols {
        // rows still to be placed are `rows`; placed ones are `out_rows`
        rows.retain(|r| r.iter().any(|&v| v != 0));
        let nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][c] != 0).collect();
        if nz.is_empty() {
            continue;
        }
        // prefer a unit pivot (elimination is then a single subtraction),
        // otherwise the entry with the smallest gcd against m
        let piv_idx = nz
            .iter()
            .copied()
            .min_by_key(|&i| (gcd(rows[i][c], m), i))
            .unwrap();
        let mut pivot_row = rows.remove(piv_idx);
        for row in rows.iter_mut() {
            let b = row[c];
            if b == 0 {
                continue;
            }
            let a = pivot_row[c];
            if is_unit(a, m) {
                let k = m - (b as u128 * inverse_mod(a, m).unwrap() as u128 % m as u128) as u64;
                axpy(row, k % m, &pivot_row, m);
            } else if b.is_multiple_of(a) {
                axpy(row, m - (b / a) % m, &pivot_row, m);
            } else {
                // unimodular 2x2 transform [s t; -b/g a/g] zeroes the entry
                let (g, s, t) = xgcd(a as i128, b as i128);
                let mm = m as i128;
                let u = (-(b as i128) / g).rem_euclid(mm) as u64;
                let v = ((a as i128) / g).rem_euclid(mm) as u64;
                let s = s.rem_euclid(mm) as u64;
                let t = t.rem_euclid(mm) as u64;
                let mut new_piv = vec![0u64; n_cols];
                axpy(&mut new_piv, s, &pivot_row, m);
                axpy(&mut new_piv, t, row, m);
                let mut new_other = vec![0u64; n_cols];
                axpy(&mut new_other, u, &pivot_row, m);
                axpy(&mut new_other, v, row, m);
                pivot_row = new_piv;
                *row = new_other;
            }
            debug_assert_eq!(row[c], 0);
        }
        let unit = normalizing_unit(pivot_row[c], m);
        scale(&mut pivot_row, unit, m);
        let a = pivot_row[c];
        // reduce the rows above into [0, a) at this column
        for r in out_rows.iter_mut() {
            let k = r[c] / a;
            if k != 0 {
                axpy(r, m - (k % m), &pivot_row, m);
            }
        }
        if a != 1 {
            // annihilator multiple keeps the basis closed (Howell condition)
            let mut ann = pivot_row.clone();
            scale(&mut ann, m / a, m);
            rows.push(ann);
        }
        out_rows.push(pivot_row);
        pivots.push(c);
    }
    (out_rows, pivots)
}

/// Solves the homogeneous system, returning its Howell basis.
pub fn solve_mod(system: &ModSystem) -> SolutionSpace {
    let (rows, pivot_cols) = howell_form(system.dense_rows(), system.n_vars, system.modulus);
    let mut is_pivot = vec![false; system.n_vars];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    let free_vars = (0..system.n_vars).filter(|&c| !is_pivot[c]).collect();
    SolutionSpace {
        modulus: system.modulus,
        n_vars: system.n_vars,
        rows,
        pivot_cols,
        free_vars,
    }
}

/// Draws one solution.
pub fn sample_solution<R: Rng + ?Sized>(space: &SolutionSpace, rng: &mut R) -> Vec<u64> {
    space.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn brute_force(system: &ModSystem) -> BTreeSet<Vec<u64>> {
        let m = system.modulus;
        let n = system.n_vars;
        let total = m.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                (0..n)
                    .map(|_| {
                        let d = idx % m;
                        idx /= m;
                        d
                    })
                    .collect::<Vec<u64>>()
            })
            .filter(|x| system.is_satisfied(x))
            .collect()
    }

    #[test]
    fn single_incidence_equation() {
        let mut s = ModSystem::new(15, 4);
        s.push(vec![(0, 1), (1, 1), (2, -1), (3, -1)]);
        assert!(s.is_satisfied(&[0, 0, 0, 0]));
        assert!(s.is_satisfied(&[1, 2, 3, 0]));
        let space = solve_mod(&s);
        assert_eq!(space.free_vars().len(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert!(s.is_satisfied(&space.sample(&mut rng)));
        }
    }

    #[test]
    fn zero_divisor_pivots() {
        // 3x = 0 and 5y = 0 mod 15
        let mut s = ModSystem::new(15, 2);
        s.push(vec![(0, 3)]);
        s.push(vec![(1, 5)]);
        let space = solve_mod(&s);
        let got: BTreeSet<_> = space.enumerate().into_iter().collect();
        assert_eq!(got, brute_force(&s));
        assert_eq!(got.len(), 5 * 3);
    }

    #[test]
    fn deterministic_sampling() {
        let mut s = ModSystem::new(15, 5);
        s.push(vec![(0, 1), (1, 1), (2, -1), (4, -1)]);
        s.push(vec![(1, 3), (3, 6)]);
        let space = solve_mod(&s);
        let a = space.sample(&mut ChaCha8Rng::seed_from_u64(11));
        let b = space.sample(&mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn no_equations_is_uniform() {
        let s = ModSystem::new(15, 3);
        let space = solve_mod(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 10_000;
        let mut counts = vec![[0usize; 15]; 3];
        for _ in 0..draws {
            let x = space.sample(&mut rng);
            for (v, &val) in x.iter().enumerate() {
                counts[v][val as usize] += 1;
            }
        }
        // chi-square with 14 degrees of freedom; 0.999 quantile is 36.12
        let expected = draws as f64 / 15.0;
        for c in &counts {
            let chi2: f64 = c.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
            assert!(chi2 < 36.12, "chi2 = {chi2}");
        }
    }

    #[test]
    fn trivial_modulus() {
        let mut s = ModSystem::new(1, 2);
        s.push(vec![(0, 1)]);
        let space = solve_mod(&s);
        assert_eq!(space.enumerate(), vec![vec![0, 0]]);
    }

    fn arb_system() -> impl Strategy<Value = ModSystem> {
        (prop::sample::select(vec![2u64, 3, 4, 6, 8, 9, 12, 15]), 1usize..=4, 0usize..=4).prop_flat_map(
            |(m, n, k)| {
                let row = prop::collection::vec(0..m as i64, n);
                prop::collection::vec(row, k).prop_map(move |rows| {
                    let mut s = ModSystem::new(m, n);
                    for r in rows {
                        s.push(r.into_iter().enumerate().filter(|&(_, c)| c != 0).collect());
                    }
                    s
                })
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn enumeration_matches_brute_force(s in arb_system()) {
            let space = solve_mod(&s);
            let got: Vec<Vec<u64>> = space.enumerate();
            let set: BTreeSet<_> = got.iter().cloned().collect();
            prop_assert_eq!(set.len(), got.len(), "enumeration repeats a solution");
            prop_assert_eq!(set, brute_force(&s));
        }

        #[test]
        fn howell_is_idempotent(s in arb_system()) {
            let (rows, piv) = howell_form(s.dense_rows(), s.n_vars, s.modulus);
            let (rows2, piv2) = howell_form(rows.clone(), s.n_vars, s.modulus);
            prop_assert_eq!(rows, rows2);
            prop_assert_eq!(piv, piv2);
        }

        #[test]
        fn samples_satisfy(s in arb_system(), seed in any::<u64>()) {
            let space = solve_mod(&s);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..10 {
                prop_assert!(s.is_satisfied(&space.sample(&mut rng)));
            }
        }
    }
}
