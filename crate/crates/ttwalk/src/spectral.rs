//! Transition matrices, norms, spectral radii and Lyapunov estimates.
//!
//! Products along a walk have entries around e^{ℓ₁ n}, so matrices are kept
//! exact and floating point work goes through `Ext`, a float with a separate
//! 64-bit binary exponent.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{check_rank, Error, Result};
use crate::nielsen::{is_cyclically_admissible, NielsenAuto, NielsenSequence};
use crate::rose_map::RoseMap;
use crate::walk::{count_occurrences, sample_trajectory, WalkConfig};

/// A square matrix of nonnegative integers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix {
    n: usize,
    a: Vec<BigUint>,
}

impl Matrix {
    pub fn zero(n: usize) -> Matrix {
        Matrix { n, a: vec![BigUint::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zero(n);
        for i in 0..n {
            m.a[i * n + i] = BigUint::from(1u32);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Matrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed("matrix is not square".into()));
        }
        let a = rows.iter().flatten().map(|&x| BigUint::from(x)).collect();
        Ok(Matrix { n, a })
    }

    /// M(g_θ) for θ = [x ↦ yx]: the identity plus a 1 in row y, column x.
    pub fn elementary(t: &NielsenAuto) -> Matrix {
        let mut m = Matrix::identity(t.rank());
        m.add_one(t.y().generator() - 1, t.x().generator() - 1);
        m
    }

    /// M(θ_n) ⋯ M(θ_1).
    pub fn of_items(items: &[NielsenAuto], rank: usize) -> Matrix {
        let mut m = Matrix::identity(rank);
        for t in items {
            m.left_mul_elementary(t);
        }
        m
    }

    pub fn of_sequence(seq: &NielsenSequence) -> Matrix {
        Matrix::of_items(seq.items(), seq.rank())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigUint {
        &self.a[i * self.n + j]
    }

    pub(crate) fn add_one(&mut self, i: usize, j: usize) {
        self.a[i * self.n + j] += 1u32;
    }

    /// self ← M(g_θ) · self: row x is added into row y.
    pub fn left_mul_elementary(&mut self, t: &NielsenAuto) {
        let (x, y) = (t.x().generator() - 1, t.y().generator() - 1);
        for j in 0..self.n {
            let v = self.a[x * self.n + j].clone();
            self.a[y * self.n + j] += v;
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> Matrix {
        (0..k).fold(Matrix::identity(self.n), |acc, _| acc.mul(self))
    }

    pub fn is_positive(&self) -> bool {
        self.a.iter().all(|x| !x.is_zero())
    }

    pub fn min_entry(&self) -> &BigUint {
        self.a.iter().min().expect("empty matrix")
    }

    fn pattern(&self) -> Vec<bool> {
        self.a.iter().map(|x| !x.is_zero()).collect()
    }

    /// (I + M)^{n-1} > 0.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n;
        let mut p = self.pattern();
        for i in 0..n {
            p[i * n + i] = true;
        }
        let step = p.clone();
        let mut acc = p;
        for _ in 1..n.saturating_sub(1) {
            acc = bool_mul(&acc, &step, n);
        }
        acc.iter().all(|&b| b)
    }

    /// Least k ≤ cap with M^k > 0, computed on the zero pattern.
    pub fn positive_power(&self, cap: usize) -> Option<usize> {
        let p = self.pattern();
        let mut acc = p.clone();
        for k in 1..=cap {
            if acc.iter().all(|&b| b) {
                return Some(k);
            }
            acc = bool_mul(&acc, &p, self.n);
        }
        None
    }

    pub fn is_permutation(&self) -> bool {
        let one = BigUint::from(1u32);
        let n = self.n;
        (0..n).all(|i| {
            let row: Vec<&BigUint> = (0..n).map(|j| self.get(i, j)).collect();
            row.iter().filter(|x| ***x == one).count() == 1 && row.iter().filter(|x| x.is_zero()).count() == n - 1
        }) && (0..n).all(|j| (0..n).filter(|&i| !self.get(i, j).is_zero()).count() == 1)
    }

    /// ‖M‖∞ = max row sum.
    pub fn norm_inf(&self) -> BigUint {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).sum::<BigUint>())
            .max()
            .unwrap_or_default()
    }

    pub fn log_norm_inf(&self) -> f64 {
        ln_big(&self.norm_inf())
    }
}

fn bool_mul(a: &[bool], b: &[bool], n: usize) -> Vec<bool> {
    let mut out = vec![false; n * n];
    for i in 0..n {
        for k in 0..n {
            if a[i * n + k] {
                for j in 0..n {
                    out[i * n + j] |= b[k * n + j];
                }
            }
        }
    }
    out
}

/// Natural log of a big integer; −∞ for zero.
pub fn ln_big(x: &BigUint) -> f64 {
    Ext::from_big(x).ln()
}

/// m · 2^e with m in [0.5, 1), or zero.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Ext {
    m: f64,
    e: i64,
}

impl Ext {
    const ZERO: Ext = Ext { m: 0.0, e: 0 };

    fn new(m: f64, e: i64) -> Ext {
        if m == 0.0 || !m.is_finite() {
            return Ext { m: if m.is_finite() { 0.0 } else { m }, e: 0 };
        }
        let bits = m.abs().to_bits();
        let raw = ((bits >> 52) & 0x7ff) as i64;
        if raw == 0 {
            return Ext::new(m * 2f64.powi(64), e - 64);
        }
        let shift = raw - 1022;
        Ext { m: m / 2f64.powi(shift as i32), e: e + shift }
    }

    fn from_big(x: &BigUint) -> Ext {
        let bits = x.bits() as i64;
        if bits <= 1000 {
            Ext::new(x.to_f64().unwrap_or(0.0), 0)
        } else {
            let shift = bits - 64;
            Ext::new((x >> shift as usize).to_f64().unwrap_or(0.0), shift)
        }
    }

    fn is_zero(self) -> bool {
        self.m == 0.0
    }

    fn add(self, o: Ext) -> Ext {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let d = hi.e - lo.e;
        if d > 1100 {
            return hi;
        }
        Ext::new(hi.m + lo.m * 2f64.powi(-(d as i32)), hi.e)
    }

    fn mul(self, o: Ext) -> Ext {
        Ext::new(self.m * o.m, self.e + o.e)
    }

    fn div(self, o: Ext) -> Ext {
        Ext::new(self.m / o.m, self.e - o.e)
    }

    fn gt(self, o: Ext) -> bool {
        match (self.is_zero(), o.is_zero()) {
            (true, _) => false,
            (false, true) => self.m > 0.0,
            _ => (self.e, self.m) > (o.e, o.m),
        }
    }

    fn ln(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.m.ln() + self.e as f64 * std::f64::consts::LN_2
        }
    }

    fn to_f64(self) -> f64 {
        if self.e > 1100 {
            f64::INFINITY
        } else if self.e < -1100 {
            0.0
        } else {
            self.m * 2f64.powi(self.e as i32)
        }
    }
}

const MAX_ITER: usize = 200_000;

/// Strongly connected components of the graph i → j when m_ij ≠ 0.
fn components(p: &[bool], n: usize) -> Vec<Vec<usize>> {
    let mut reach = p.to_vec();
    for i in 0..n {
        reach[i * n + i] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i * n + k] {
                for j in 0..n {
                    if reach[k * n + j] {
                        reach[i * n + j] = true;
                    }
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let c: Vec<usize> = (0..n).filter(|&j| reach[i * n + j] && reach[j * n + i]).collect();
        for &j in &c {
            seen[j] = true;
        }
        out.push(c);
    }
    out
}

fn is_primitive(p: &[bool], n: usize) -> bool {
    let wielandt = (n - 1) * (n - 1) + 1;
    let mut acc = p.to_vec();
    for _ in 1..wielandt {
        acc = bool_mul(&acc, p, n);
    }
    acc.iter().all(|&b| b)
}

/// Collatz–Wielandt power iteration on an irreducible block; `done` decides
/// convergence from the current (lower, upper) bracket.
fn block_radius(entries: &[Ext], n: usize, done: &dyn Fn(Ext, Ext) -> bool) -> Result<Ext> {
    let p: Vec<bool> = entries.iter().map(|x| !x.is_zero()).collect();
    let shift = if is_primitive(&p, n) {
        Ext::ZERO
    } else {
        (0..n)
            .map(|i| (0..n).fold(Ext::ZERO, |s, j| s.add(entries[i * n + j])))
            .fold(Ext::ZERO, |a, b| if b.gt(a) { b } else { a })
    };
    let mut v = vec![Ext::new(1.0, 0); n];
    let mut best = Ext::ZERO;
    for _ in 0..MAX_ITER {
        let w: Vec<Ext> = (0..n)
            .map(|i| (0..n).fold(shift.mul(v[i]), |s, j| s.add(entries[i * n + j].mul(v[j]))))
            .collect();
        let ratios: Vec<Ext> = (0..n).map(|i| w[i].div(v[i])).collect();
        let mut lo = ratios[0];
        let mut hi = ratios[0];
        for &q in &ratios[1..] {
            if lo.gt(q) {
                lo = q;
            }
            if q.gt(hi) {
                hi = q;
            }
        }
        best = lo;
        if done(lo, hi) {
            let est = lo.add(hi).mul(Ext::new(0.5, 0));
            if shift.is_zero() {
                return Ok(est);
            }
            return Ok(Ext::new(est.to_f64() - shift.to_f64(), 0));
        }
        let top = w.iter().copied().fold(Ext::ZERO, |a, b| if b.gt(a) { b } else { a });
        v = w.iter().map(|&x| x.div(top)).collect();
    }
    Err(Error::NoConvergence(best.to_f64() - shift.to_f64()))
}

fn radius_ext(m: &Matrix, done: &dyn Fn(Ext, Ext) -> bool) -> Result<Ext> {
    let n = m.dim();
    let p = m.pattern();
    let mut best = Ext::ZERO;
    for c in components(&p, n) {
        let k = c.len();
        let r = if k == 1 {
            let i = c[0];
            Ext::from_big(m.get(i, i))
        } else {
            let entries: Vec<Ext> = c
                .iter()
                .flat_map(|&i| c.iter().map(move |&j| (i, j)))
                .map(|(i, j)| Ext::from_big(m.get(i, j)))
                .collect();
            block_radius(&entries, k, done)?
        };
        if r.gt(best) {
            best = r;
        }
    }
    Ok(best)
}

/// λ(M) to absolute tolerance `tol`, floored at the resolution of f64 near λ.
pub fn spectral_radius(m: &Matrix, tol: f64) -> Result<f64> {
    let done = move |lo: Ext, hi: Ext| {
        let (l, h) = (lo.to_f64(), hi.to_f64());
        h - l <= tol.max(8.0 * f64::EPSILON * h)
    };
    let r = radius_ext(m, &done)?.to_f64();
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::Precondition("spectral radius overflows f64; use log_spectral_radius".into()))
    }
}

/// log λ(M) to absolute tolerance `tol` on the log scale.
pub fn log_spectral_radius(m: &Matrix, tol: f64) -> Result<f64> {
    let done = move |lo: Ext, hi: Ext| hi.ln() - lo.ln() <= tol.max(8.0 * f64::EPSILON);
    Ok(radius_ext(m, &done)?.ln())
}

/// λ(M) ≤ ‖M‖ ≤ r·λ(M)², for matrices with every entry at least 1.
pub fn tao_bounds_check(m: &Matrix, tol: f64) -> Result<bool> {
    if !m.is_positive() {
        return Err(Error::Precondition("some entry is zero".into()));
    }
    let ll = log_spectral_radius(m, tol)?;
    let ln = m.log_norm_inf();
    let r = (m.dim() as f64).ln();
    let slack = tol;
    Ok(ll <= ln + slack && ln <= r + 2.0 * ll + slack)
}

fn expanding_matrix(f: &RoseMap) -> Result<Matrix> {
    let m = f.transition_matrix();
    if !m.is_irreducible() {
        return Err(Error::Precondition("transition matrix is reducible".into()));
    }
    if m.is_permutation() {
        return Err(Error::Precondition("map is not expanding".into()));
    }
    Ok(m)
}

/// λ(f) = λ(M(f)) for an expanding train track map with irreducible matrix.
pub fn stretch_factor(f: &RoseMap, tol: f64) -> Result<f64> {
    let l = spectral_radius(&expanding_matrix(f)?, tol)?;
    debug_assert!(l > 1.0);
    Ok(l)
}

/// log λ(M(g_𝔱)) for a long sequence, without building the map.
pub fn log_stretch_factor(seq: &NielsenSequence, tol: f64) -> Result<f64> {
    log_spectral_radius(&Matrix::of_sequence(seq), tol)
}

/// log λ(φ) / log |Q|_A, a lower bound on the word length of φ in a
/// generating set Q whose elements have A-length at most qa.
pub fn word_length_lower_bound(f: &RoseMap, qa: f64, tol: f64) -> Result<f64> {
    if qa.partial_cmp(&1.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Precondition(format!("qa must exceed 1, got {qa}")));
    }
    let l = log_spectral_radius(&expanding_matrix(f)?, tol)?;
    Ok(l / qa.ln())
}

/// X_0, ..., X_n where X_k = log ‖M(θ_k) ⋯ M(θ_1)‖∞.
pub fn log_norm_series(items: &[NielsenAuto], rank: usize) -> Vec<f64> {
    let mut m = Matrix::identity(rank);
    let mut out = Vec::with_capacity(items.len() + 1);
    out.push(0.0);
    for t in items {
        m.left_mul_elementary(t);
        out.push(m.log_norm_inf());
    }
    out
}

/// X_n along `items`; n must not exceed its length.
pub fn log_norm_process(items: &[NielsenAuto], rank: usize, n: usize) -> Result<f64> {
    if n > items.len() {
        return Err(Error::Precondition(format!("n = {n} exceeds trajectory length {}", items.len())));
    }
    Ok(Matrix::of_items(&items[..n], rank).log_norm_inf())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub ell1_hat: f64,
    pub n: usize,
    pub trials: usize,
    pub stderr: f64,
}

/// Mean and standard error of X_n / n over independent trajectories.
pub fn estimate_lyapunov(config: &WalkConfig) -> Result<LyapunovEstimate> {
    let n = config.length;
    let mut vals = Vec::with_capacity(config.trials);
    for t in 0..config.trials {
        let traj = sample_trajectory(config, t as u64)?;
        let x = log_norm_process(&traj.items, config.rank, n)?;
        vals.push(x / n as f64);
    }
    let (mean, se) = mean_stderr(&vals);
    Ok(LyapunovEstimate { ell1_hat: mean, n, trials: config.trials, stderr: se })
}

pub(crate) fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Rate of occurrences of `block` per step, pooled over trajectories.
pub fn occurrence_rate(config: &WalkConfig, block: &[NielsenAuto]) -> Result<f64> {
    let mut hits = 0usize;
    for t in 0..config.trials {
        let traj = sample_trajectory(config, t as u64)?;
        hits += count_occurrences(&traj.items, block);
    }
    Ok(hits as f64 / (config.trials * config.length) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub log_lambda_over_n: f64,
    pub in_band: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthBandReport {
    pub lower: f64,
    pub upper: f64,
    pub rows: Vec<GrowthRow>,
}

impl GrowthBandReport {
    pub fn all_in_band(&self) -> bool {
        self.rows.iter().all(|r| r.in_band)
    }
}

/// (1/n) log λ(g_{𝔱_n}) at each index, compared with the band
/// [ℓ̂₁/2·(1−eps), ℓ̂₁·(1+eps)].
pub fn growth_band_check(
    items: &[NielsenAuto],
    rank: usize,
    indices: &[usize],
    ell1_hat: f64,
    eps: f64,
) -> Result<GrowthBandReport> {
    let lower = ell1_hat / 2.0 * (1.0 - eps);
    let upper = ell1_hat * (1.0 + eps);
    let mut rows = Vec::new();
    let mut m = Matrix::identity(rank);
    let mut done = 0;
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    for &n in &sorted {
        if n == 0 || n > items.len() {
            return Err(Error::Precondition(format!("index {n} out of range")));
        }
        if !is_cyclically_admissible(&items[..n])? {
            return Err(Error::Precondition(format!("prefix of length {n} is not cyclically admissible")));
        }
        for t in &items[done..n] {
            m.left_mul_elementary(t);
        }
        done = n;
        let v = log_spectral_radius(&m, 1e-9)? / n as f64;
        rows.push(GrowthRow { n, log_lambda_over_n: v, in_band: v >= lower && v <= upper });
    }
    Ok(GrowthBandReport { lower, upper, rows })
}

/// CSV with columns n, X_n, X_n/n, log λ(g_{𝔱_n}); the last column is
/// filled only at cyclically admissible prefixes.
pub fn lyapunov_csv(items: &[NielsenAuto], rank: usize, every: usize) -> Result<String> {
    let mut out = String::from("n,x_n,x_n_over_n,log_lambda\n");
    let mut m = Matrix::identity(rank);
    let every = every.max(1);
    for (k, t) in items.iter().enumerate() {
        check_rank(rank, t.rank())?;
        m.left_mul_elementary(t);
        let n = k + 1;
        if n % every != 0 && n != items.len() {
            continue;
        }
        let x = m.log_norm_inf();
        let ll = if is_cyclically_admissible(&items[..n])? {
            format!("{:.9}", log_spectral_radius(&m, 1e-9)?)
        } else {
            String::new()
        };
        writeln!(out, "{n},{x:.9},{:.9},{ll}", x / n as f64).expect("write to string");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nielsen::enumerate_s;
    use proptest::prelude::*;

    fn m(rows: &[&[u64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn norms() {
        assert_eq!(Matrix::identity(3).norm_inf(), BigUint::from(1u32));
        let t = NielsenAuto::parse("[a1->a2a1]", 2).unwrap();
        assert_eq!(Matrix::elementary(&t), m(&[&[1, 0], &[1, 1]]));
        assert_eq!(Matrix::elementary(&t).norm_inf(), BigUint::from(2u32));
    }

    #[test]
    fn radii() {
        assert!((spectral_radius(&m(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]), 1e-12).unwrap() - 3.0).abs() < 1e-10);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((spectral_radius(&m(&[&[1, 1], &[1, 0]]), 1e-12).unwrap() - phi).abs() < 1e-10);
        for t in enumerate_s(3).unwrap() {
            assert_eq!(spectral_radius(&Matrix::elementary(&t), 1e-12).unwrap(), 1.0);
        }
        assert_eq!(spectral_radius(&m(&[&[0, 1], &[1, 0]]), 1e-12).unwrap(), 1.0);
        assert!((spectral_radius(&m(&[&[0, 2], &[8, 0]]), 1e-12).unwrap() - 4.0).abs() < 1e-10);
        assert_eq!(spectral_radius(&Matrix::zero(2), 1e-12).unwrap(), 0.0);
        assert_eq!(spectral_radius(&m(&[&[2, 5], &[0, 3]]), 1e-12).unwrap(), 3.0);
    }

    #[test]
    fn huge_entries_stay_finite_in_log() {
        let big = m(&[&[1, 1], &[1, 0]]).pow(3000);
        let ll = log_spectral_radius(&big, 1e-12).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((ll - 3000.0 * phi.ln()).abs() < 1e-6);
        assert!(spectral_radius(&big, 1e-8).is_err());
        assert!((big.log_norm_inf() - ln_big(&big.norm_inf())).abs() < 1e-12);
    }

    #[test]
    fn irreducibility() {
        assert!(m(&[&[1, 1], &[1, 0]]).is_irreducible());
        assert!(!m(&[&[1, 1], &[0, 1]]).is_irreducible());
        assert!(m(&[&[0, 1], &[1, 0]]).is_irreducible());
        assert!(m(&[&[0, 1], &[1, 0]]).is_permutation());
        assert_eq!(m(&[&[0, 1], &[1, 1]]).positive_power(5), Some(2));
        assert_eq!(m(&[&[0, 1], &[1, 0]]).positive_power(5), None);
    }

    #[test]
    fn stretch_of_fibonacci() {
        let f = RoseMap::parse("rank 2\na1 -> a1a2\na2 -> a1\n").unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((stretch_factor(&f, 1e-12).unwrap() - phi).abs() < 1e-10);
        assert!((word_length_lower_bound(&f, 2.0, 1e-12).unwrap() - 0.694_241_913_6).abs() < 1e-9);
        assert!(word_length_lower_bound(&f, 1.0, 1e-12).is_err());
        assert!(stretch_factor(&RoseMap::identity(2), 1e-12).is_err());
        let swap = RoseMap::parse("rank 2\na1 -> a2\na2 -> a1\n").unwrap();
        assert!(stretch_factor(&swap, 1e-12).is_err());
    }

    #[test]
    fn log_norm_first_steps() {
        let t = NielsenAuto::parse("[a1->a2a1]", 2).unwrap();
        let xs = log_norm_series(&[t], 2);
        assert_eq!(xs[0], 0.0);
        assert!((xs[1] - 2f64.ln()).abs() < 1e-15);
        assert!(log_norm_process(&[t], 2, 2).is_err());
    }

    #[test]
    fn tao_needs_positive_entries() {
        assert!(tao_bounds_check(&Matrix::identity(2), 1e-9).is_err());
        assert!(tao_bounds_check(&m(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]), 1e-9).unwrap());
    }

    fn product(rank: usize, picks: &[usize]) -> Matrix {
        let s = enumerate_s(rank).unwrap();
        let items: Vec<NielsenAuto> = picks.iter().map(|&i| s[i % s.len()]).collect();
        Matrix::of_items(&items, rank)
    }

    proptest! {
        #[test]
        fn product_matches_matrix_multiplication(picks in proptest::collection::vec(0usize..24, 0..20)) {
            let s = enumerate_s(3).unwrap();
            let mut want = Matrix::identity(3);
            for &i in &picks {
                want = Matrix::elementary(&s[i]).mul(&want);
            }
            prop_assert_eq!(product(3, &picks), want);
        }

        #[test]
        fn norm_is_submultiplicative_and_radius_below_norm(
            a in proptest::collection::vec(0usize..24, 0..25),
            b in proptest::collection::vec(0usize..24, 0..25),
        ) {
            let (ma, mb) = (product(3, &a), product(3, &b));
            prop_assert!(ma.mul(&mb).norm_inf() <= ma.norm_inf() * mb.norm_inf());
            prop_assert!(ma.norm_inf() >= BigUint::from(1u32));
            let l = spectral_radius(&ma, 1e-9).unwrap();
            prop_assert!(l <= ma.norm_inf().to_f64().unwrap() + 1e-9);
            prop_assert!(l >= 1.0 - 1e-9);
        }

        #[test]
        fn elementary_steps_do_not_shrink_vectors(i in 0usize..24, v in proptest::collection::vec(0u64..1000, 3)) {
            let e = Matrix::elementary(&enumerate_s(3).unwrap()[i]);
            let w: Vec<BigUint> = (0..3).map(|r| (0..3).map(|c| e.get(r, c) * BigUint::from(v[c])).sum()).collect();
            prop_assert!(w.iter().max() >= v.iter().map(|&x| BigUint::from(x)).max().as_ref());
        }
    }
}
