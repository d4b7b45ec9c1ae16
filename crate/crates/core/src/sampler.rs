//! Reproducible random inputs.
//!
//! Every generator is a ChaCha8 stream keyed by a 64-bit master seed and
//! selected by a 64-bit stream id. [`derive_stream`] maps a replicate index
//! to a stream id through the SplitMix64 finaliser, which is a bijection on
//! `u64`, so distinct replicates never share a stream and results do not
//! depend on evaluation order or worker count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pathcore::{GridPath, StepPath};

/// A reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (bijective).
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for replicate `replicate_index` under `master_seed`:
/// `stream_id = mix64(replicate_index + γ)` with γ the 64-bit golden ratio.
pub fn derive_stream(master_seed: u64, replicate_index: u64) -> RngStream {
    RngStream {
        master_seed,
        stream_id: mix64(replicate_index.wrapping_add(GOLDEN_GAMMA)),
    }
}

/// Derive a sub-seed for a named purpose (FNV-1a of the label, mixed with
/// the master seed), so that different experiments sharing a master seed
/// draw from unrelated key spaces.
pub fn salted_seed(master_seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix64(master_seed ^ h)
}

/// Homogeneous Poisson process with unit jumps on `[t_lo, t_hi]`, built
/// from exponential gaps.
pub fn sample_poisson_path<R: Rng + ?Sized>(rate: f64, window: (f64, f64), rng: &mut R) -> Result<StepPath> {
    let (t_lo, t_hi) = window;
    let times = poisson_times(rate, window, rng)?;
    StepPath::counting(t_lo, t_hi, times)
}

/// Epochs of a Poisson process on `(t_lo, t_hi)`.
pub fn poisson_times<R: Rng + ?Sized>(rate: f64, window: (f64, f64), rng: &mut R) -> Result<Vec<f64>> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::param(format!("Poisson rate must be positive, got {rate}")));
    }
    let (t_lo, t_hi) = window;
    if !(t_lo.is_finite() && t_hi.is_finite() && t_lo <= t_hi) {
        return Err(Error::param(format!("bad window [{t_lo}, {t_hi}]")));
    }
    let gap = Exp::new(rate).map_err(|e| Error::param(e.to_string()))?;
    let mut times = Vec::with_capacity(((t_hi - t_lo) * rate * 1.1) as usize + 4);
    let mut t = t_lo;
    loop {
        t += gap.sample(rng);
        if t >= t_hi {
            break;
        }
        times.push(t);
    }
    Ok(times)
}

/// Brownian motion with the given drift on the grid `0, dt, …, steps·dt`.
pub fn sample_brownian_grid<R: Rng + ?Sized>(drift: f64, dt: f64, steps: usize, rng: &mut R) -> Result<GridPath> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param(format!("dt must be positive, got {dt}")));
    }
    let sd = dt.sqrt();
    let mean = drift * dt;
    let mut values = Vec::with_capacity(steps + 1);
    let mut acc = 0.0;
    values.push(0.0);
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(rng);
        acc += mean + sd * z;
        values.push(acc);
    }
    GridPath::new(0.0, dt, values)
}

/// Simple random walk with `P(step = +1) = p_up`, `p_up ∈ (½, 1)`.
pub fn sample_srw_path<R: Rng + ?Sized>(p_up: f64, steps: usize, rng: &mut R) -> Result<GridPath> {
    if !(p_up > 0.5 && p_up < 1.0) {
        return Err(Error::param(format!("p_up must lie in (1/2, 1), got {p_up}")));
    }
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = 0.0;
    values.push(0.0);
    for _ in 0..steps {
        x += if rng.random::<f64>() < p_up { 1.0 } else { -1.0 };
        values.push(x);
    }
    GridPath::new(0.0, 1.0, values)
}

/// Partial sums of the ±1 Markov chain with `ξ₀ = 1`,
/// `P(ξ' = 1 | ξ = 1) = a` and `P(ξ' = −1 | ξ = −1) = b`, `0 < b < a < 1`.
pub fn sample_pm1_chain<R: Rng + ?Sized>(a: f64, b: f64, steps: usize, rng: &mut R) -> Result<GridPath> {
    if !(0.0 < b && b < a && a < 1.0) {
        return Err(Error::param(format!("need 0 < b < a < 1, got a={a}, b={b}")));
    }
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = 0.0;
    let mut xi = 1.0;
    values.push(0.0);
    for _ in 0..steps {
        let u: f64 = rng.random();
        xi = if xi > 0.0 {
            if u < a { 1.0 } else { -1.0 }
        } else if u < b {
            -1.0
        } else {
            1.0
        };
        x += xi;
        values.push(x);
    }
    GridPath::new(0.0, 1.0, values)
}

pub fn sample_gaussian_seq<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Dense Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Validates `A = A*` exactly.
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::param(format!("need {n}x{n} entries, got {}", entries.len())));
        }
        for i in 0..n {
            for j in i..n {
                if entries[i * n + j] != entries[j * n + i].conj() {
                    return Err(Error::domain(format!("matrix is not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_real_symmetric(n: usize, entries: &[f64]) -> Result<Self> {
        Self::new(n, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &x) in d.iter().enumerate() {
            entries[i * n + i] = Complex64::new(x, 0.0);
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `U A U*` for unitary `U` (row-major, not checked). The result is
    /// re-symmetrised so the Hermitian invariant holds exactly.
    pub fn conjugate_by(&self, u: &[Complex64]) -> Self {
        let n = self.n;
        let mut ua = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let uik = u[i * n + k];
                for j in 0..n {
                    ua[i * n + j] += uik * self.entries[k * n + j];
                }
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += ua[i * n + k] * u[j * n + k].conj();
                }
                out[i * n + j] = s;
            }
        }
        for i in 0..n {
            out[i * n + i].im = 0.0;
            for j in i + 1..n {
                let avg = (out[i * n + j] + out[j * n + i].conj()) * 0.5;
                out[i * n + j] = avg;
                out[j * n + i] = avg.conj();
            }
        }
        Self { n, entries: out }
    }
}

/// A GUE matrix: standard normal diagonal, off-diagonal entries with
/// independent real and imaginary parts of variance ½.
pub fn sample_gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<HermitianMatrix> {
    if n == 0 {
        return Err(Error::param("GUE dimension must be at least 1"));
    }
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        entries[i * n + i] = Complex64::new(d, 0.0);
        for j in i + 1..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let z = Complex64::new(re * half, im * half);
            entries[i * n + j] = z;
            entries[j * n + i] = z.conj();
        }
    }
    Ok(HermitianMatrix { n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stattest::{ks_one_sample, mean_and_var};

    fn rng(i: u64) -> ChaCha8Rng {
        derive_stream(20_240_601, i).rng()
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(rng(3), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(rng(3), |r, _| Some(r.random())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(rng(4), |r, _| Some(r.random())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let ids: std::collections::HashSet<u64> = (0..10_000).map(|i| derive_stream(1, i).stream_id).collect();
        assert_eq!(ids.len(), 10_000);
        assert_eq!(derive_stream(5, 7), derive_stream(5, 7));
    }

    #[test]
    fn aggregate_independent_of_order() {
        let draw = |i: u64| -> f64 { sample_gaussian_seq(100, &mut rng(i)).iter().sum() };
        let forward: Vec<f64> = (0..10).map(draw).collect();
        let mut backward: Vec<(u64, f64)> = (0..10).rev().map(|i| (i, draw(i))).collect();
        backward.sort_by_key(|p| p.0);
        let backward: Vec<f64> = backward.into_iter().map(|p| p.1).collect();
        assert_eq!(forward, backward);
    }

    #[test]
    fn poisson_edge_cases() {
        let p = sample_poisson_path(1.0, (3.0, 3.0), &mut rng(0)).unwrap();
        assert_eq!(p.num_jumps(), 0);
        assert!(sample_poisson_path(0.0, (0.0, 1.0), &mut rng(0)).is_err());
        assert!(sample_poisson_path(-1.0, (0.0, 1.0), &mut rng(0)).is_err());
    }

    #[test]
    fn poisson_mean_count() {
        let reps = 10_000;
        let mut r = rng(11);
        let total: usize = (0..reps)
            .map(|_| sample_poisson_path(1.0, (0.0, 10.0), &mut r).unwrap().num_jumps())
            .sum();
        let mean = total as f64 / reps as f64;
        assert!((mean - 10.0).abs() < 3.0 * (10.0f64 / reps as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn poisson_gaps_are_exponential() {
        let p = sample_poisson_path(2.0, (0.0, 2_000.0), &mut rng(12)).unwrap();
        let rep = ks_one_sample("poisson-gaps", &p.gaps(), |x| 1.0 - (-2.0 * x).exp(), 0.01).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn brownian_moments() {
        let b = sample_brownian_grid(0.0, 0.1, 0, &mut rng(0)).unwrap();
        assert_eq!(b.values(), &[0.0]);
        let reps = 100_000;
        let mut r = rng(13);
        let ends: Vec<f64> = (0..reps)
            .map(|_| *sample_brownian_grid(0.0, 0.1, 10, &mut r).unwrap().values().last().unwrap())
            .collect();
        let (m, v) = mean_and_var(&ends);
        let n = reps as f64;
        assert!(m.abs() < 3.0 / n.sqrt());
        // Var of the sample variance for normal data is 2σ⁴/(n−1)
        assert!((v - 1.0).abs() < 3.0 * (2.0 / n).sqrt(), "variance {v}");

        let drifted: Vec<f64> = (0..20_000)
            .map(|_| *sample_brownian_grid(0.7, 0.05, 40, &mut r).unwrap().values().last().unwrap())
            .collect();
        let (m, _) = mean_and_var(&drifted);
        assert!((m - 1.4).abs() < 3.0 * (2.0f64 / 20_000.0).sqrt(), "mean {m}");
    }

    #[test]
    fn srw_steps_and_drift() {
        assert!(sample_srw_path(0.5, 3, &mut rng(0)).is_err());
        assert_eq!(sample_srw_path(0.7, 0, &mut rng(0)).unwrap().values(), &[0.0]);
        let mut r = rng(14);
        let reps = 20_000;
        let mut ends = Vec::with_capacity(reps);
        for _ in 0..reps {
            let p = sample_srw_path(0.7, 25, &mut r).unwrap();
            assert!((1..p.len()).all(|i| p.increment(i).abs() == 1.0));
            ends.push(*p.values().last().unwrap());
        }
        let (m, _) = mean_and_var(&ends);
        let sd = (25.0 * (1.0 - 0.4f64 * 0.4)).sqrt() / (reps as f64).sqrt();
        assert!((m - 25.0 * 0.4).abs() < 3.0 * sd, "mean {m}");
    }

    #[test]
    fn pm1_chain_transitions() {
        assert!(sample_pm1_chain(0.4, 0.7, 3, &mut rng(0)).is_err());
        assert_eq!(sample_pm1_chain(0.7, 0.4, 0, &mut rng(0)).unwrap().values(), &[0.0]);
        let p = sample_pm1_chain(0.7, 0.4, 200_000, &mut rng(15)).unwrap();
        let (mut uu, mut u, mut dd, mut d) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 2..p.len() {
            let (prev, cur) = (p.increment(i - 1), p.increment(i));
            if prev > 0.0 {
                u += 1.0;
                if cur > 0.0 {
                    uu += 1.0;
                }
            } else {
                d += 1.0;
                if cur < 0.0 {
                    dd += 1.0;
                }
            }
        }
        let (a, b) = (uu / u, dd / d);
        assert!((a - 0.7).abs() < 3.0 * (0.21f64 / u).sqrt(), "a = {a}");
        assert!((b - 0.4).abs() < 3.0 * (0.24f64 / d).sqrt(), "b = {b}");
    }

    #[test]
    fn gue_structure() {
        assert!(sample_gue(0, &mut rng(0)).is_err());
        let mut r = rng(16);
        let mut offdiag = Vec::new();
        for _ in 0..20_000 {
            let m = sample_gue(3, &mut r).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(m.get(i, j), m.get(j, i).conj());
                }
            }
            offdiag.push(m.get(0, 1).norm_sqr());
        }
        let (m, _) = mean_and_var(&offdiag);
        // |A₁₂|² ~ Exp(1): mean 1, sd 1
        assert!((m - 1.0).abs() < 3.0 / (20_000f64).sqrt(), "E|A12|^2 = {m}");
    }

    #[test]
    fn gue_scalar_is_standard_normal() {
        let mut r = rng(17);
        let xs: Vec<f64> = (0..100_000).map(|_| sample_gue(1, &mut r).unwrap().get(0, 0).re).collect();
        let rep = ks_one_sample("gue-1", &xs, crate::stattest::normal_cdf, 0.01).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn gaussian_seq_moments() {
        assert!(sample_gaussian_seq(0, &mut rng(0)).is_empty());
        let xs = sample_gaussian_seq(100_000, &mut rng(18));
        let (m, v) = mean_and_var(&xs);
        assert!(m.abs() < 3.0 / (1e5f64).sqrt());
        assert!((v - 1.0).abs() < 3.0 * (2.0f64 / 1e5).sqrt());
    }

    #[test]
    fn hermitian_validation() {
        let bad = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0), Complex64::new(1.0, 1.0), Complex64::new(0.0, 0.0)];
        assert!(HermitianMatrix::new(2, bad).is_err());
        assert!(HermitianMatrix::new(2, vec![]).is_err());
    }
}
