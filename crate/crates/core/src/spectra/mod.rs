//! Eigenvalues of Hermitian matrices and the GUE, Weyl and Charlier laws.
//!
//! `h(x) = ∏_{i<j}(x_j − x_i)` is the Vandermonde function. The GUE
//! eigenvalue density on the chamber `λ₁ < ⋯ < λₙ` is
//! `Z⁻¹ h(λ)² ∏ e^{−λᵢ²/2}` with `Z = (2π)^{n/2} ∏_{j<n} j!`.

mod checks;
mod eigen;

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{sample_gue, HermitianMatrix};
use crate::stattest::ln_gamma;

pub use checks::{charlier_check, eigensolver_invariants_check, gue_marginal_check};
pub use eigen::ITERATIONS_PER_EIGENVALUE;

/// Dimension above which densities are evaluated in log space.
pub const LOG_SPACE_MIN_N: usize = 9;

/// Nondecreasing eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::domain("empty spectrum"));
        }
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("non-finite eigenvalue".into()));
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain("spectrum must be sorted"));
        }
        Ok(Self { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        let mut v: Vec<f64> = self.eigenvalues.iter().map(|x| c * x).collect();
        if c < 0.0 {
            v.reverse();
        }
        Self::new(v)
    }

    /// CSV with header `index,eigenvalue`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "eigenvalue"])?;
        for (i, x) in self.eigenvalues.iter().enumerate() {
            out.write_record([i.to_string(), x.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    GueWeyl,
    /// Started from `x* = (0, 1, …, n−1)`.
    Charlier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n: usize,
    pub t: f64,
    pub kind: EnsembleKind,
}

impl EnsembleParams {
    pub fn new(n: usize, t: f64, kind: EnsembleKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("ensemble dimension must be at least 1"));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::param(format!("ensemble time must be positive, got {t}")));
        }
        Ok(Self { n, t, kind })
    }

    /// `x* = (0, 1, …, n−1)`.
    pub fn start(&self) -> Vec<u64> {
        (0..self.n as u64).collect()
    }
}

/// `h(x) = ∏_{i<j}(x_j − x_i)`.
pub fn vandermonde_h(x: &[f64]) -> f64 {
    let mut p = 1.0;
    for j in 1..x.len() {
        for i in 0..j {
            p *= x[j] - x[i];
        }
    }
    p
}

/// `ln |h(x)|` (−∞ on a repeated coordinate).
pub fn ln_abs_vandermonde(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 1..x.len() {
        for i in 0..j {
            s += (x[j] - x[i]).abs().ln();
        }
    }
    s
}

/// `∏_{i≠j}(x_i − x_j)`, which equals `(−1)^{n(n−1)/2} h(x)²`.
pub fn offdiagonal_product(x: &[f64]) -> f64 {
    let mut p = 1.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            if i != j {
                p *= x[i] - x[j];
            }
        }
    }
    p
}

/// `ln ∏_{j=1}^{n−1} j!`.
fn ln_superfactorial(n: usize) -> f64 {
    (1..n).map(|j| ln_gamma(j as f64 + 1.0)).sum()
}

/// `C_t = [t^{n(n−1)/2} ∏_{j=1}^{n−1} j!]⁻¹`.
pub fn c_t(n: usize, t: f64) -> f64 {
    ln_c_t(n, t).exp()
}

pub fn ln_c_t(n: usize, t: f64) -> f64 {
    let pairs = (n * n.saturating_sub(1) / 2) as f64;
    -(pairs * t.ln() + ln_superfactorial(n))
}

/// GUE eigenvalue density on the ordered chamber, `Z⁻¹ h(λ)² ∏ e^{−λᵢ²/2}`.
pub fn weyl_density(lambda: &[f64]) -> f64 {
    let n = lambda.len();
    let gauss: f64 = lambda.iter().map(|x| x * x).sum::<f64>() * -0.5;
    let ln_z = 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln() + ln_superfactorial(n);
    if n >= LOG_SPACE_MIN_N {
        let lh = ln_abs_vandermonde(lambda);
        if lh == f64::NEG_INFINITY {
            return 0.0;
        }
        (2.0 * lh + gauss - ln_z).exp()
    } else {
        let h = vandermonde_h(lambda);
        h * h * (gauss - ln_z).exp()
    }
}

fn ln_poisson(k: u64, t: f64) -> f64 {
    let k = k as f64;
    if k == 0.0 {
        -t
    } else {
        k * t.ln() - t - ln_gamma(k + 1.0)
    }
}

/// Mass of the `n = 2` Weyl density on the chamber `λ₁ < λ₂`, by the
/// tensor Simpson rule with `m` (even) panels per axis on `[−L, L]²`. The
/// integrand is symmetric, so the chamber holds half the square's mass.
pub fn weyl_chamber_mass_n2(half_width: f64, m: usize) -> Result<f64> {
    if m == 0 || m % 2 == 1 || !(half_width > 0.0) {
        return Err(Error::param(format!("Simpson rule needs an even panel count and L > 0, got m={m}, L={half_width}")));
    }
    let h = 2.0 * half_width / m as f64;
    let w = |i: usize| if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
    let mut total = 0.0;
    for i in 0..=m {
        let x = -half_width + i as f64 * h;
        for j in 0..=m {
            let y = -half_width + j as f64 * h;
            total += w(i) * w(j) * weyl_density(&[x, y]);
        }
    }
    Ok(total * h * h / 9.0 / 2.0)
}

/// Charlier ensemble mass `C_t h(x*+y)² ∏ᵢ Poisson_t(x*ᵢ+yᵢ)` with
/// `x* = (0, 1, …, n−1)`; zero unless `x*+y` is strictly increasing,
/// i.e. unless `y` is nondecreasing.
pub fn charlier_pmf(y: &[u64], t: f64) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::param("charlier_pmf needs at least one coordinate"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param(format!("charlier time must be positive, got {t}")));
    }
    if y.windows(2).any(|w| w[1] < w[0]) {
        return Ok(0.0);
    }
    let n = y.len();
    let z: Vec<f64> = y.iter().enumerate().map(|(i, &v)| (v + i as u64) as f64).collect();
    let ln_p: f64 = y.iter().enumerate().map(|(i, &v)| ln_poisson(v + i as u64, t)).sum();
    Ok((ln_c_t(n, t) + 2.0 * ln_abs_vandermonde(&z) + ln_p).exp())
}

/// Every nondecreasing `y ∈ {0,…,max}^n`, in lexicographic order.
pub fn charlier_support(n: usize, max: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = vec![0u64; n];
    fn rec(i: usize, lo: u64, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in lo..=max {
            cur[i] = v;
            rec(i + 1, v, max, cur, out);
        }
    }
    if n > 0 {
        rec(0, 0, max, &mut cur, &mut out);
    }
    out
}

/// Box side for truncated Charlier sums: the first `k` with Poisson(t)
/// tail mass beyond `k` below `tail`, padded by `n`.
pub fn charlier_box(n: usize, t: f64, tail: f64) -> u64 {
    let mut k: u64 = 0;
    let mut cdf = 0.0;
    loop {
        cdf += ln_poisson(k, t).exp();
        if 1.0 - cdf < tail {
            return k + n as u64;
        }
        k += 1;
    }
}

pub fn eigenvalues(h: &HermitianMatrix) -> Result<Spectrum> {
    Spectrum::new(eigen::hermitian_eigenvalues(h)?)
}

/// Spectrum of `√t · A` with `A` drawn from the GUE.
pub fn sample_gue_spectrum<R: Rng + ?Sized>(n: usize, t: f64, rng: &mut R) -> Result<Spectrum> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param(format!("time must be positive, got {t}")));
    }
    eigenvalues(&sample_gue(n, rng)?)?.scaled(t.sqrt())
}

pub fn largest_component(spectrum: &Spectrum) -> f64 {
    *spectrum.eigenvalues.last().expect("spectrum is non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::derive_stream;
    use crate::stattest::{ks_one_sample, mean_and_var, normal_cdf};
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde_h(&[1.0, 2.0, 4.0]), 6.0);
        assert_eq!(vandermonde_h(&[1.0, 3.0, 1.0]), 0.0);
        assert_eq!(vandermonde_h(&[2.0, 1.0, 4.0]), -6.0);
        assert_eq!(vandermonde_h(&[5.0]), 1.0);
    }

    proptest! {
        #[test]
        fn pairing_identity(x in prop::collection::vec(-3.0f64..3.0, 1..7)) {
            let h = vandermonde_h(&x);
            let prod = offdiagonal_product(&x);
            prop_assert!(h * h >= 0.0);
            prop_assert!((prod.abs() - h * h).abs() <= 1e-9 * (h * h).max(1e-300));
            let n = x.len();
            if h != 0.0 && (n * (n - 1) / 2) % 2 == 0 {
                prop_assert!(prod >= 0.0);
            }
        }

        #[test]
        fn weyl_is_ct_times_gaussian(x in prop::collection::vec(-3.0f64..3.0, 1..12)) {
            let n = x.len();
            let h = vandermonde_h(&x);
            let g: f64 = x.iter().map(|v| (-v * v / 2.0).exp()).product();
            let expect = c_t(n, 1.0) * h * h * (2.0 * std::f64::consts::PI).powf(-(n as f64) / 2.0) * g;
            let got = weyl_density(&x);
            prop_assert!((got - expect).abs() <= 1e-12 * expect.abs().max(1e-300), "{got} vs {expect}");
        }

        #[test]
        fn spectrum_invariant_under_householder(seed in 0u64..200) {
            let mut rng = derive_stream(seed, 0).rng();
            let n = 1 + (seed % 8) as usize;
            let h = sample_gue(n, &mut rng).unwrap();
            let v = crate::sampler::sample_gaussian_seq(2 * n, &mut rng);
            let v: Vec<Complex64> = (0..n).map(|i| Complex64::new(v[2 * i], v[2 * i + 1])).collect();
            let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let mut u = vec![Complex64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for j in 0..n {
                    let id = if i == j { 1.0 } else { 0.0 };
                    u[i * n + j] = Complex64::new(id, 0.0) - v[i] * v[j].conj() * (2.0 / vv);
                }
            }
            let a = eigenvalues(&h).unwrap();
            let b = eigenvalues(&h.conjugate_by(&u)).unwrap();
            for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn weyl_scalar_and_repeat() {
        assert!((weyl_density(&[0.0]) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert_eq!(weyl_density(&[0.3, 0.3]), 0.0);
        assert_eq!(weyl_density(&[0.3; 10]), 0.0);
    }

    #[test]
    fn weyl_mass_two_dimensional() {
        let mass = weyl_chamber_mass_n2(9.0, 1800).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
        assert!(weyl_chamber_mass_n2(9.0, 7).is_err());
    }

    #[test]
    fn c_t_values() {
        assert_eq!(c_t(1, 1.0), 1.0);
        assert!((c_t(2, 1.0) - 1.0).abs() < 1e-15);
        assert!((c_t(3, 1.0) - 0.5).abs() < 1e-15);
        assert!((c_t(3, 2.0) - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_examples() {
        let d = eigenvalues(&HermitianMatrix::diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(d.eigenvalues(), &[1.0, 2.0, 3.0]);
        let s = eigenvalues(&HermitianMatrix::from_real_symmetric(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-15 && (s.eigenvalues()[1] - 1.0).abs() < 1e-15);
        assert_eq!(largest_component(&d), 3.0);
        assert_eq!(largest_component(&Spectrum::new(vec![-0.5]).unwrap()), -0.5);
    }

    #[test]
    fn trace_and_frobenius_n6() {
        let mut rng = derive_stream(6, 0).rng();
        let h = sample_gue(6, &mut rng).unwrap();
        let s = eigenvalues(&h).unwrap();
        let tr: f64 = s.eigenvalues().iter().sum();
        let fr: f64 = s.eigenvalues().iter().map(|x| x * x).sum();
        assert!((tr - h.trace()).abs() <= 1e-9 * h.trace().abs().max(1.0));
        assert!((fr - h.frobenius_norm_sq()).abs() <= 1e-9 * h.frobenius_norm_sq());
    }

    #[test]
    fn gue_spectrum_marginals() {
        let mut rng = derive_stream(7, 0).rng();
        let xs: Vec<f64> = (0..20_000).map(|_| sample_gue_spectrum(1, 1.0, &mut rng).unwrap().smallest()).collect();
        assert!(ks_one_sample("gue", &xs, normal_cdf, 0.01).unwrap().passed);
        let ys: Vec<f64> = (0..20_000).map(|_| sample_gue_spectrum(1, 4.0, &mut rng).unwrap().smallest()).collect();
        let (_, v) = mean_and_var(&ys);
        assert!((v - 4.0).abs() < 3.0 * 4.0 * (2.0f64 / 20_000.0).sqrt(), "variance {v}");
        for _ in 0..100 {
            let s = sample_gue_spectrum(5, 2.0, &mut rng).unwrap();
            assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        }
        assert!(sample_gue_spectrum(2, 0.0, &mut rng).is_err());
    }

    #[test]
    fn charlier_examples() {
        assert!((charlier_pmf(&[0], 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(charlier_pmf(&[2, 1], 1.0).unwrap(), 0.0);
        assert!(charlier_pmf(&[1, 1], 1.0).unwrap() > 0.0);
        let mass: f64 = charlier_support(2, 40).iter().map(|y| charlier_pmf(y, 1.0).unwrap()).sum();
        assert!((mass - 1.0).abs() < 1e-8, "mass {mass}");
    }

    #[test]
    fn charlier_normalisation_small_n() {
        for n in 1..=3 {
            for t in [0.5, 1.0, 2.0] {
                let m = charlier_box(n, t, 1e-12);
                let mass: f64 = charlier_support(n, m).iter().map(|y| charlier_pmf(y, t).unwrap()).sum();
                assert!((mass - 1.0).abs() < 1e-9, "n={n} t={t} box={m} mass={mass}");
            }
        }
    }

    #[test]
    fn spectrum_csv() {
        let mut buf = Vec::new();
        Spectrum::new(vec![-1.0, 2.5]).unwrap().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,eigenvalue\n0,-1\n1,2.5\n");
        assert!(Spectrum::new(vec![2.0, 1.0]).is_err());
    }
}
