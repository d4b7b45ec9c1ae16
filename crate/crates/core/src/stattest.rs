//! Goodness-of-fit machinery: Kolmogorov–Smirnov, Pearson chi-square, total
//! variation and correlation bands, each producing a [`TestReport`].
//!
//! Every test runs at a fixed level (α = 0.01 in the acceptance suite) with
//! a fixed seed, so a run either reproduces its verdict exactly or changes
//! because the code changed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How `passed` is derived from `value`, `p_value` and `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassRule {
    /// `p_value ≥ threshold`.
    PValueAtLeast,
    /// `value ≤ threshold`.
    ValueAtMost,
    /// `|value| < threshold`.
    AbsBelow,
    /// `value ≥ threshold`.
    ValueAtLeast,
}

impl PassRule {
    fn evaluate(self, value: f64, p_value: Option<f64>, threshold: f64) -> bool {
        match self {
            PassRule::PValueAtLeast => p_value.is_some_and(|p| p >= threshold),
            PassRule::ValueAtMost => value <= threshold,
            PassRule::AbsBelow => value.abs() < threshold,
            PassRule::ValueAtLeast => value >= threshold,
        }
    }
}

/// Outcome of one statistical or exact check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub theorem_id: String,
    pub statistic_name: String,
    pub value: f64,
    pub p_value: Option<f64>,
    pub threshold: f64,
    pub rule: PassRule,
    pub passed: bool,
    /// Set when an unbounded-horizon functional was evaluated on a finite
    /// window and the result may be affected by the cut.
    pub truncation_flag: bool,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl TestReport {
    fn build(theorem_id: &str, statistic_name: &str, value: f64, p_value: Option<f64>, threshold: f64, rule: PassRule) -> Self {
        let p_value = p_value.map(|p| p.clamp(0.0, 1.0));
        Self {
            theorem_id: theorem_id.to_owned(),
            statistic_name: statistic_name.to_owned(),
            value,
            p_value,
            threshold,
            rule,
            passed: rule.evaluate(value, p_value, threshold),
            truncation_flag: false,
            seed: None,
            note: None,
        }
    }

    /// Passes when `p_value ≥ alpha`.
    pub fn p_value_test(theorem_id: &str, statistic_name: &str, value: f64, p_value: f64, alpha: f64) -> Self {
        Self::build(theorem_id, statistic_name, value, Some(p_value), alpha, PassRule::PValueAtLeast)
    }

    /// Passes when `value ≤ threshold`.
    pub fn upper_bound(theorem_id: &str, statistic_name: &str, value: f64, threshold: f64) -> Self {
        Self::build(theorem_id, statistic_name, value, None, threshold, PassRule::ValueAtMost)
    }

    /// Passes when `value ≥ threshold`.
    pub fn lower_bound(theorem_id: &str, statistic_name: &str, value: f64, threshold: f64) -> Self {
        Self::build(theorem_id, statistic_name, value, None, threshold, PassRule::ValueAtLeast)
    }

    /// Passes when `|value| < threshold`.
    pub fn abs_bound(theorem_id: &str, statistic_name: &str, value: f64, threshold: f64) -> Self {
        Self::build(theorem_id, statistic_name, value, None, threshold, PassRule::AbsBelow)
    }

    /// `estimate − target` against a band of `k` standard errors.
    pub fn deviation(theorem_id: &str, statistic_name: &str, estimate: f64, target: f64, stderr: f64, k: f64) -> Self {
        Self::abs_bound(theorem_id, statistic_name, estimate - target, k * stderr)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_truncation(mut self, flag: bool) -> Self {
        self.truncation_flag = flag;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// True when `passed` agrees with the rule and `p_value` lies in `[0, 1]`.
    pub fn is_consistent(&self) -> bool {
        let p_ok = self.p_value.is_none_or(|p| (0.0..=1.0).contains(&p));
        p_ok && self.passed == self.rule.evaluate(self.value, self.p_value, self.threshold)
    }
}

/// Sample mean and unbiased variance (variance 0 for fewer than two points).
pub fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let (m, v) = mean_and_var(xs);
    (m, (v / xs.len() as f64).sqrt())
}

/// Pearson correlation; `None` when either input is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ma, _) = mean_and_var(a);
    let (mb, _) = mean_and_var(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn exponential_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }
}

/// Complementary error function via `erfc(x) = Q(½, x²)`.
pub fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        gamma_q(0.5, x * x)
    } else {
        1.0 + gamma_p(0.5, x * x)
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;

pub(crate) fn gamma_p_series(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - ln_gamma(a)).exp()
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
pub(crate) fn gamma_q_cf(a: f64, x: f64) -> f64 {
    let tiny = f64::MIN_POSITIVE / GAMMA_EPS;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let step = d * c;
        h *= step;
        if (step - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularised lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

/// Regularised upper incomplete gamma `Q(a, x) = 1 − P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

/// `P(χ²_df > x)`.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    gamma_q(0.5 * df, 0.5 * x)
}

/// Kolmogorov survival function `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K ≤ λ) = √(2π)/λ Σ_{j≥1} exp(−(2j−1)²π²/(8λ²))
        let pi = std::f64::consts::PI;
        let y = -pi * pi / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for j in 1..=20 {
            let k = (2 * j - 1) as f64;
            let term = (k * k * y).exp();
            s += term;
            if term < 1e-17 * s {
                break;
            }
        }
        (1.0 - (2.0 * pi).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        let mut sign = 1.0;
        for j in 1..=100 {
            let j = j as f64;
            let term = (-2.0 * j * j * lambda * lambda).exp();
            s += sign * term;
            sign = -sign;
            if term < 1e-17 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Exact one-sample sample sizes handled by the Marsaglia–Tsang–Wang method.
pub const KS_EXACT_MAX_N: usize = 30;

/// `P(D_n < d)` for the one-sample KS statistic (Marsaglia, Tsang & Wang).
pub fn ks_exact_cdf(n: usize, d: f64) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    if d >= 1.0 {
        return 1.0;
    }
    let nf = n as f64;
    let k = (nf * d) as usize + 1;
    let m = 2 * k - 1;
    let h = k as f64 - nf * d;
    let mut hm = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                hm[i * m + j] = 1.0;
            }
        }
    }
    for i in 0..m {
        hm[i * m] -= h.powi(i as i32 + 1);
        hm[(m - 1) * m + i] -= h.powi((m - i) as i32);
    }
    if 2.0 * h - 1.0 > 0.0 {
        hm[(m - 1) * m] += (2.0 * h - 1.0).powi(m as i32);
    }
    for i in 0..m {
        for j in 0..m {
            if i + 1 > j {
                for g in 1..=(i + 1 - j) {
                    hm[i * m + j] /= g as f64;
                }
            }
        }
    }
    let q = mat_pow(&hm, m, n);
    let mut s = q[(k - 1) * m + k - 1];
    for i in 1..=n {
        s *= i as f64 / nf;
    }
    s.clamp(0.0, 1.0)
}

fn mat_mul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                c[i * m + j] += aik * b[k * m + j];
            }
        }
    }
    c
}

fn mat_pow(a: &[f64], m: usize, mut e: usize) -> Vec<f64> {
    let mut result = vec![0.0; m * m];
    for i in 0..m {
        result[i * m + i] = 1.0;
    }
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = mat_mul(&result, &base, m);
        }
        base = mat_mul(&base, &base, m);
        e >>= 1;
    }
    result
}

fn sorted_finite(data: &[f64], what: &str) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::InsufficientData(format!("{what}: empty sample")));
    }
    if data.iter().any(|x| x.is_nan()) {
        return Err(Error::Numeric(format!("{what}: NaN in sample")));
    }
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample Kolmogorov–Smirnov test against a continuous cdf. Samples of
/// at most [`KS_EXACT_MAX_N`] points use the exact null law, larger ones the
/// asymptotic law with Stephens' small-sample correction.
pub fn ks_one_sample(theorem_id: &str, data: &[f64], cdf: impl Fn(f64) -> f64, alpha: f64) -> Result<TestReport> {
    let xs = sorted_finite(data, "ks_one_sample")?;
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    let p = if n <= KS_EXACT_MAX_N {
        1.0 - ks_exact_cdf(n, d)
    } else {
        let sn = nf.sqrt();
        kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
    };
    Ok(TestReport::p_value_test(theorem_id, "ks_one_sample_d", d, p, alpha))
}

/// Two-sample KS statistic `sup |F_a − F_b|`.
pub fn ks_two_sample_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    let xa = sorted_finite(a, "ks_two_sample")?;
    let xb = sorted_finite(b, "ks_two_sample")?;
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] == x {
            i += 1;
        }
        while j < xb.len() && xb[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Exact `P(D ≥ d)` for two continuous samples of sizes `n`, `m` by counting
/// monotone lattice paths that stay inside the band.
pub fn ks_two_sample_exact_sf(n: usize, m: usize, d: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let eps = 1e-9;
    let inside = |i: usize, j: usize| (i as f64 / nf - j as f64 / mf).abs() < d - eps;
    // paths[j] holds the probability mass of reaching (i, j) while staying inside
    let mut row = vec![0.0; m + 1];
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                row[0] = 1.0;
                continue;
            }
            let from_left = if j > 0 { row[j - 1] * (j as f64 / (i + j) as f64) } else { 0.0 };
            let from_up = if i > 0 { row[j] * (i as f64 / (i + j) as f64) } else { 0.0 };
            row[j] = if inside(i, j) { from_left + from_up } else { 0.0 };
        }
    }
    (1.0 - row[m]).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test. Exact when both samples have at most
/// [`KS_EXACT_MAX_N`] points, asymptotic otherwise.
pub fn ks_two_sample(theorem_id: &str, a: &[f64], b: &[f64], alpha: f64) -> Result<TestReport> {
    let d = ks_two_sample_statistic(a, b)?;
    let (n, m) = (a.len(), b.len());
    let p = if n <= KS_EXACT_MAX_N && m <= KS_EXACT_MAX_N {
        ks_two_sample_exact_sf(n, m, d)
    } else {
        let ne = (n as f64 * m as f64 / (n + m) as f64).sqrt();
        kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d)
    };
    Ok(TestReport::p_value_test(theorem_id, "ks_two_sample_d", d, p, alpha))
}

/// Minimum expected count for a chi-square cell to stand on its own.
pub const CHI_SQUARE_MIN_EXPECTED: f64 = 5.0;

/// Pearson chi-square goodness of fit of `counts` against `pmf` (same
/// length). Any mass missing from `pmf` forms an extra cell with observed
/// count zero; callers that see outcomes outside the tabulated support
/// should tabulate a catch-all cell themselves. Cells whose expected count
/// is below [`CHI_SQUARE_MIN_EXPECTED`] are pooled into one cell.
pub fn chi_square_gof(theorem_id: &str, counts: &[u64], pmf: &[f64], alpha: f64) -> Result<TestReport> {
    if counts.len() != pmf.len() {
        return Err(Error::param("counts and pmf differ in length"));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InsufficientData("chi_square_gof: no observations".into()));
    }
    if pmf.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::param("pmf entries must be non-negative"));
    }
    let mass: f64 = pmf.iter().sum();
    if mass > 1.0 + 1e-9 {
        return Err(Error::param(format!("pmf has total mass {mass} > 1")));
    }
    let n = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::with_capacity(pmf.len() + 1);
    let (mut pool_obs, mut pool_exp) = (0.0, 0.0);
    let deficit = (1.0 - mass).max(0.0);
    pool_exp += n * deficit;
    for (&c, &p) in counts.iter().zip(pmf) {
        let e = n * p;
        if e < CHI_SQUARE_MIN_EXPECTED {
            pool_obs += c as f64;
            pool_exp += e;
        } else {
            cells.push((c as f64, e));
        }
    }
    if pool_exp > 0.0 || pool_obs > 0.0 {
        if pool_exp < CHI_SQUARE_MIN_EXPECTED && !cells.is_empty() {
            let smallest = cells
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                .map(|(i, _)| i)
                .expect("non-empty");
            let (o, e) = cells.swap_remove(smallest);
            pool_obs += o;
            pool_exp += e;
        }
        cells.push((pool_obs, pool_exp));
    }
    if cells.len() < 2 {
        return Err(Error::InsufficientData("chi_square_gof: fewer than two cells after pooling".into()));
    }
    let mut stat = 0.0;
    for &(o, e) in &cells {
        if e <= 0.0 {
            if o > 0.0 {
                return Ok(TestReport::p_value_test(theorem_id, "chi_square", f64::INFINITY, 0.0, alpha)
                    .with_note("observation in a cell of zero probability"));
            }
            continue;
        }
        stat += (o - e) * (o - e) / e;
    }
    let df = (cells.len() - 1) as f64;
    let p = chi_square_sf(stat, df);
    Ok(TestReport::p_value_test(theorem_id, "chi_square", stat, p, alpha).with_note(format!("df = {df}")))
}

/// Half the L¹ distance between two pmfs on `0..len`; the shorter one is
/// padded with zeros.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (at(a, i) - at(b, i)).abs()).sum::<f64>()
}

/// Total variation between pmfs indexed by arbitrary ordered keys.
pub fn tv_distance_map<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let mut s = 0.0;
    for (k, &pa) in a {
        s += (pa - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &pb) in b {
        if !a.contains_key(k) {
            s += pb.abs();
        }
    }
    0.5 * s
}

/// Empirical pmf of a sample of keys.
pub fn empirical_pmf<K: Ord + Clone>(samples: impl IntoIterator<Item = K>) -> BTreeMap<K, f64> {
    let mut counts: BTreeMap<K, u64> = BTreeMap::new();
    let mut n = 0u64;
    for k in samples {
        *counts.entry(k).or_default() += 1;
        n += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / n as f64)).collect()
}

/// Sample correlation against the band `±3/√n`.
pub fn corr_bound(theorem_id: &str, a: &[f64], b: &[f64]) -> Result<TestReport> {
    if a.len() != b.len() {
        return Err(Error::param("corr_bound inputs differ in length"));
    }
    if a.len() < 3 {
        return Err(Error::InsufficientData("corr_bound: fewer than three pairs".into()));
    }
    let r = pearson(a, b).ok_or_else(|| Error::InsufficientData("corr_bound: constant input, correlation undefined".into()))?;
    Ok(TestReport::abs_bound(theorem_id, "correlation", r, 3.0 / (a.len() as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::derive_stream;
    use rand::Rng;

    #[test]
    fn report_rules() {
        let r = TestReport::p_value_test("t", "s", 0.1, 0.5, 0.01);
        assert!(r.passed && r.is_consistent());
        let r = TestReport::p_value_test("t", "s", 0.1, 0.001, 0.01);
        assert!(!r.passed && r.is_consistent());
        assert!(TestReport::upper_bound("t", "s", 0.0, 0.0).passed);
        assert!(!TestReport::abs_bound("t", "s", -0.5, 0.5).passed);
        let mut r = TestReport::abs_bound("t", "s", 0.1, 0.5);
        r.passed = false;
        assert!(!r.is_consistent());
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut f = 1.0f64;
        for k in 1..30 {
            f *= k as f64;
            assert!((ln_gamma(k as f64 + 1.0) - f.ln()).abs() < 1e-12 * f.ln().max(1.0));
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn chi_square_quantile() {
        assert!((chi_square_sf(3.841_458_820_694_124, 1.0) - 0.05).abs() < 1e-4);
        assert!((chi_square_sf(3.841_458_820_694_124, 1.0) - 0.05).abs() < 1e-10);
        // χ²₂ survival is exp(−x/2)
        for x in [0.1, 1.0, 5.0, 30.0] {
            assert!((chi_square_sf(x, 2.0) - (-x / 2.0f64).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn incomplete_gamma_branches_agree_at_crossover() {
        for a in [0.5, 1.0, 2.5, 7.0, 20.0, 100.0] {
            for x in [a + 1.0, a + 0.5, a + 2.0] {
                let p_series = gamma_p_series(a, x);
                let p_cf = 1.0 - gamma_q_cf(a, x);
                assert!(((p_series - p_cf) / p_series).abs() < 1e-9, "a={a}, x={x}");
            }
        }
    }

    #[test]
    fn erfc_values() {
        assert!((erfc(0.0) - 1.0).abs() < 1e-15);
        assert!((erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-14);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-15);
    }

    #[test]
    fn p_values_monotone() {
        let mut prev = 1.0;
        for i in 0..400 {
            let lam = i as f64 * 0.01;
            let q = kolmogorov_sf(lam);
            assert!(q <= prev + 1e-15, "kolmogorov not monotone at {lam}");
            prev = q;
        }
        let mut prev = 1.0;
        for i in 0..200 {
            let q = chi_square_sf(i as f64 * 0.2, 4.0);
            assert!(q <= prev + 1e-15);
            prev = q;
        }
        for n in [1, 5, 17, 30] {
            let mut prev = 0.0;
            for i in 1..100 {
                let c = ks_exact_cdf(n, i as f64 / 100.0);
                assert!(c >= prev - 1e-12, "n={n}");
                prev = c;
            }
        }
    }

    #[test]
    fn kolmogorov_branches_meet() {
        let lo = kolmogorov_sf(1.18 - 1e-12);
        let hi = kolmogorov_sf(1.18);
        assert!((lo - hi).abs() < 1e-12);
        assert!((kolmogorov_sf(1.358_098_8) - 0.05).abs() < 1e-6);
    }

    #[test]
    fn ks_exact_small_cases() {
        // n = 1: D = max(U, 1−U) ≥ ½, P(D < d) = 2d − 1
        for d in [0.6, 0.75, 0.9] {
            assert!((ks_exact_cdf(1, d) - (2.0 * d - 1.0)).abs() < 1e-12);
        }
        // large n: exact approaches the asymptotic law
        let d = 1.0 / 30f64.sqrt();
        let exact = 1.0 - ks_exact_cdf(30, d);
        let sn = 30f64.sqrt();
        let asym = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
        assert!((exact - asym).abs() < 0.01, "{exact} vs {asym}");
    }

    #[test]
    fn ks_two_sample_exact_matches_enumeration() {
        // n = m = 2: the 6 equally likely interleavings give D ∈ {½, 1}
        // with D = 1 for AABB and BBAA
        assert!((ks_two_sample_exact_sf(2, 2, 1.0) - 2.0 / 6.0).abs() < 1e-12);
        assert!((ks_two_sample_exact_sf(2, 2, 0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a = [0.3, 0.1, 0.7, 0.2];
        assert_eq!(ks_two_sample_statistic(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample_statistic(&[1.0, 2.0], &[3.0, 4.0, 5.0]).unwrap(), 1.0);
        let r = ks_two_sample("t", &a, &a, 0.01).unwrap();
        assert!(r.passed && r.p_value == Some(1.0));
        assert!(ks_one_sample("t", &[], |x| x, 0.01).is_err());
    }

    #[test]
    fn ks_uniform_large_sample() {
        let mut rng = derive_stream(77, 0).rng();
        let xs: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let r = ks_one_sample("uniform", &xs, |x| x.clamp(0.0, 1.0), 0.01).unwrap();
        assert!(r.passed, "{r:?}");
        let shifted: Vec<f64> = xs.iter().map(|x| x * 0.98).collect();
        assert!(!ks_one_sample("uniform", &shifted, |x| x.clamp(0.0, 1.0), 0.01).unwrap().passed);
    }

    #[test]
    fn chi_square_proportional_counts() {
        let pmf = [0.25, 0.5, 0.25];
        let r = chi_square_gof("t", &[250, 500, 250], &pmf, 0.01).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.passed);
        assert!(chi_square_gof("t", &[0, 0, 0], &pmf, 0.01).is_err());
        assert!(chi_square_gof("t", &[1, 2], &pmf, 0.01).is_err());
        let r = chi_square_gof("t", &[100, 900, 0], &pmf, 0.01).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn chi_square_pools_small_cells() {
        // the last two cells expect 7 and 3 observations and are pooled
        let pmf = [0.5, 0.47, 0.02, 0.007, 0.003];
        let r = chi_square_gof("t", &[500, 470, 20, 7, 3], &pmf, 0.01).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert_eq!(r.note.as_deref(), Some("df = 3"));
        // a pooled cell still short of 5 is folded into the smallest cell
        let r = chi_square_gof("t", &[50, 47, 2, 1], &[0.5, 0.47, 0.02, 0.01], 0.01).unwrap();
        assert_eq!(r.note.as_deref(), Some("df = 1"));
    }

    #[test]
    fn tv_cases() {
        assert_eq!(tv_distance(&[0.2, 0.8], &[0.2, 0.8]), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert_eq!(tv_distance(&[0.5, 0.5], &[0.5, 0.0, 0.5]), 0.5);
        let a = empirical_pmf([(0, 1), (0, 1), (1, 0), (2, 2)]);
        let b = empirical_pmf([(0, 1), (3, 3)]);
        assert!((tv_distance_map(&a, &b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn correlation_band() {
        let a: Vec<f64> = (0..100).map(f64::from).collect();
        let r = corr_bound("t", &a, &a).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12 && !r.passed);
        assert!(corr_bound("t", &[1.0; 10], &a[..10]).is_err());
        let mut r1 = derive_stream(5, 1).rng();
        let mut r2 = derive_stream(5, 2).rng();
        let x: Vec<f64> = (0..10_000).map(|_| r1.random()).collect();
        let y: Vec<f64> = (0..10_000).map(|_| r2.random()).collect();
        assert!(corr_bound("t", &x, &y).unwrap().passed);
    }
}
