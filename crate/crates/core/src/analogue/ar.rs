use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sampler::{derive_stream, sample_gaussian_seq};
use crate::stattest::{corr_bound, ks_one_sample, normal_cdf, TestReport};

/// Variance of the discarded tail `Σ_{j ≥ m} a^j b_{−1−j}` of the stationary
/// series.
pub const AR_TAIL_VARIANCE: f64 = 1e-12;

/// Parameters of `X_{n+1} = aX_n + b_n` and of the conditioned sequence
/// started from `Y₀ = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArParams {
    a: f64,
    horizon: usize,
    x: Option<f64>,
}

impl ArParams {
    /// `0 ≤ a < 1`; `a = 0` is the degenerate case `X_{n+1} = b_n`.
    pub fn new(a: f64, x: Option<f64>) -> Result<Self> {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::param(format!("AR coefficient must lie in [0, 1), got {a}")));
        }
        if x.is_some_and(|v| !v.is_finite()) {
            return Err(Error::param("conditioning value must be finite"));
        }
        let tail = |m: usize| a.powi(2 * m as i32) / (1.0 - a * a);
        let mut horizon = 1;
        while tail(horizon) >= AR_TAIL_VARIANCE {
            horizon += 1;
        }
        Ok(Self { a, horizon, x })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Number of pre-sample innovations used for `X₀`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn x(&self) -> Option<f64> {
        self.x
    }
}

/// One realisation of the stationary process on `0..=L` and the derived
/// sequences on `0..L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ar1Output {
    pub x: Vec<f64>,
    /// `b̂_n = X_n − aX_{n+1}`.
    pub hat_b: Vec<f64>,
    /// `d⁽ˣ⁾_n = Y_n − aY_{n+1}` with `Y₀ = x`, `Y_{n+1} = aY_n + b_n`.
    pub d: Option<Vec<f64>>,
}

/// `b` holds `horizon` pre-sample innovations `b_{−m}, …, b_{−1}` followed
/// by `b₀, …, b_{L−1}`. `X₀ = Σ_{j<m} a^j b_{−1−j}`.
pub fn ar1_forward(params: &ArParams, b: &[f64]) -> Result<Ar1Output> {
    let m = params.horizon;
    if b.len() <= m {
        return Err(Error::InsufficientData(format!("need more than {m} innovations, got {}", b.len())));
    }
    let a = params.a;
    let mut x0 = 0.0;
    let mut w = 1.0;
    for j in 0..m {
        x0 += w * b[m - 1 - j];
        w *= a;
    }
    let noise = &b[m..];
    let mut x = Vec::with_capacity(noise.len() + 1);
    x.push(x0);
    for (n, bn) in noise.iter().enumerate() {
        x.push(a * x[n] + bn);
    }
    let hat_b = (0..noise.len()).map(|n| x[n] - a * x[n + 1]).collect();
    let d = params.x.map(|x0| {
        let mut y = x0;
        noise
            .iter()
            .map(|bn| {
                let next = a * y + bn;
                let dn = y - a * next;
                y = next;
                dn
            })
            .collect()
    });
    Ok(Ar1Output { x, hat_b, d })
}

fn columns(rows: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    (0..k).map(|i| rows.iter().map(|r| r[i]).collect()).collect()
}

/// Marginal KS of each `b̂_i` against `N(0,1)` and pairwise correlations of
/// the coordinates, over independent replicates.
pub fn ar1_output_check(theorem_id: &str, a: f64, len: usize, samples: usize, seed: u64, alpha: f64) -> Result<Vec<TestReport>> {
    let params = ArParams::new(a, None)?;
    if len == 0 || samples < 2 {
        return Err(Error::InsufficientData("need len ≥ 1 and at least two samples".into()));
    }
    let rows: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|r| {
            let mut rng = derive_stream(seed, r as u64).rng();
            let b = sample_gaussian_seq(params.horizon + len, &mut rng);
            Ok(ar1_forward(&params, &b)?.hat_b)
        })
        .collect::<Result<_>>()?;
    let cols = columns(&rows, len);
    let mut out = Vec::new();
    for (i, c) in cols.iter().enumerate() {
        let mut r = ks_one_sample(theorem_id, c, normal_cdf, alpha)?;
        r.statistic_name = format!("ks_hat_b{i}_vs_normal(a={a})");
        out.push(r.with_seed(seed));
    }
    for i in 0..len {
        for j in (i + 1)..len {
            let mut r = corr_bound(theorem_id, &cols[i], &cols[j])?;
            r.statistic_name = format!("corr_hat_b{i}_hat_b{j}(a={a})");
            out.push(r.with_seed(seed));
        }
    }
    Ok(out)
}

/// Law of `(b₀, …, b_k)` given `Σ aⁿ bₙ = x`: mean `(1−a²) x w`, covariance
/// `I − (1−a²) w wᵀ`, `w_i = aⁱ`.
pub fn conditional_target(a: f64, x: f64, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let w: Vec<f64> = (0..=k).map(|i| a.powi(i as i32)).collect();
    let c = 1.0 - a * a;
    let mean = w.iter().map(|wi| c * x * wi).collect();
    let cov = (0..=k)
        .map(|i| (0..=k).map(|j| f64::from(u8::from(i == j)) - c * w[i] * w[j]).collect())
        .collect();
    (mean, cov)
}

/// Monte Carlo law of `(d⁽ˣ⁾₀, …, d⁽ˣ⁾_k)` against [`conditional_target`]:
/// Euclidean distance of the mean vector and Frobenius distance of the
/// covariance, each within three Monte Carlo standard deviations, and a KS
/// test per coordinate.
pub fn ar1_conditional_check(theorem_id: &str, a: f64, x: f64, k: usize, samples: usize, seed: u64, alpha: f64) -> Result<Vec<TestReport>> {
    let params = ArParams::new(a, Some(x))?;
    if samples < 2 {
        return Err(Error::InsufficientData("need at least two samples".into()));
    }
    let dim = k + 1;
    let rows: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|r| {
            let mut rng = derive_stream(seed, r as u64).rng();
            let b = sample_gaussian_seq(params.horizon + dim, &mut rng);
            Ok(ar1_forward(&params, &b)?.d.expect("x is set"))
        })
        .collect::<Result<_>>()?;
    let (mean, cov) = conditional_target(a, x, k);
    let n = samples as f64;
    let cols = columns(&rows, dim);
    let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n).collect();

    let mean_dist = means.iter().zip(&mean).map(|(m, t)| (m - t).powi(2)).sum::<f64>().sqrt();
    let mean_sigma = ((0..dim).map(|i| cov[i][i]).sum::<f64>() / n).sqrt();

    let mut cov_dist = 0.0;
    let mut cov_var = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let s = cols[i].iter().zip(&cols[j]).map(|(u, v)| (u - means[i]) * (v - means[j])).sum::<f64>() / (n - 1.0);
            cov_dist += (s - cov[i][j]).powi(2);
            cov_var += (cov[i][i] * cov[j][j] + cov[i][j] * cov[i][j]) / n;
        }
    }
    let cov_dist = cov_dist.sqrt();
    let cov_sigma = cov_var.sqrt();

    let tag = format!("(a={a},x={x},k={k})");
    let mut out = vec![
        TestReport::upper_bound(theorem_id, &format!("mean_distance{tag}"), mean_dist, 3.0 * mean_sigma).with_seed(seed),
        TestReport::upper_bound(theorem_id, &format!("cov_distance{tag}"), cov_dist, 3.0 * cov_sigma).with_seed(seed),
    ];
    for (i, c) in cols.iter().enumerate() {
        let sd = cov[i][i].sqrt();
        let mu = mean[i];
        let mut r = ks_one_sample(theorem_id, c, |v| normal_cdf((v - mu) / sd), alpha)?;
        r.statistic_name = format!("ks_d{i}_vs_conditional{tag}");
        out.push(r.with_seed(seed));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn horizon_meets_the_tail_bound() {
        for a in [0.0, 0.3, 0.5, 0.8, 0.95] {
            let p = ArParams::new(a, None).unwrap();
            let m = p.horizon() as i32;
            assert!(a.powi(2 * m) / (1.0 - a * a) < AR_TAIL_VARIANCE);
            if m > 1 {
                assert!(a.powi(2 * (m - 1)) / (1.0 - a * a) >= AR_TAIL_VARIANCE);
            }
        }
        assert!(ArParams::new(1.0, None).is_err());
        assert!(ArParams::new(-0.1, None).is_err());
    }

    #[test]
    fn degenerate_coefficient_shifts_the_noise() {
        let p = ArParams::new(0.0, Some(2.0)).unwrap();
        let b = [0.3, -1.0, 0.5, 2.0];
        let out = ar1_forward(&p, &b).unwrap();
        assert_eq!(out.x, vec![0.3, -1.0, 0.5, 2.0]);
        assert_eq!(out.hat_b, vec![0.3, -1.0, 0.5]);
        assert_eq!(out.d.unwrap(), vec![2.0, -1.0, 0.5]);
    }

    #[test]
    fn first_conditioned_coordinate_expands_symbolically() {
        let p = ArParams::new(0.5, Some(1.0)).unwrap();
        let mut b = vec![0.0; p.horizon()];
        b.extend([0.4, 0.0]);
        let d0 = ar1_forward(&p, &b).unwrap().d.unwrap()[0];
        assert!((d0 - (0.75 * 1.0 - 0.5 * 0.4)).abs() < 1e-15);
        let (mean, cov) = conditional_target(0.5, 1.0, 0);
        assert!((mean[0] - 0.75).abs() < 1e-15 && (cov[0][0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn conditional_target_is_centred_at_zero() {
        let (mean, cov) = conditional_target(0.8, 0.0, 4);
        assert!(mean.iter().all(|&m| m == 0.0));
        // Var(Σ_{i≤k} aⁱbᵢ | Σ aⁿbₙ) = |w|²·a^{2(k+1)}.
        let w: Vec<f64> = (0..5).map(|i| 0.8f64.powi(i)).collect();
        let w2: f64 = w.iter().map(|v| v * v).sum();
        let q: f64 = (0..5).map(|i| (0..5).map(|j| w[i] * cov[i][j] * w[j]).sum::<f64>()).sum();
        assert!((q - w2 * 0.8f64.powi(10)).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_from_hat_b_matches_within_the_tail() {
        let p = ArParams::new(0.7, None).unwrap();
        let mut rng = derive_stream(21, 0).rng();
        let len = 60;
        let b = sample_gaussian_seq(p.horizon() + len, &mut rng);
        let out = ar1_forward(&p, &b).unwrap();
        for n in 0..10 {
            let mut recon = 0.0;
            let mut w = 1.0;
            for j in 0..(len - n) {
                recon += w * out.hat_b[n + j];
                w *= 0.7;
            }
            let tail = 0.7f64.powi((len - n) as i32) * out.x[len];
            assert!((out.x[n] - recon - tail).abs() < 1e-12);
        }
    }

    #[test]
    fn small_output_and_conditional_runs_pass() {
        let reps = ar1_output_check("t", 0.5, 3, 4000, 31, 0.01).unwrap();
        assert!(reps.iter().all(|r| r.passed), "{reps:#?}");
        let reps = ar1_conditional_check("t", 0.5, 1.0, 2, 4000, 32, 0.01).unwrap();
        assert!(reps.iter().all(|r| r.passed), "{reps:#?}");
    }

    #[test]
    fn conditional_check_detects_a_wrong_x() {
        let params = ArParams::new(0.5, Some(1.0)).unwrap();
        let mut rng = derive_stream(33, 0).rng();
        let b = sample_gaussian_seq(params.horizon() + 1, &mut rng);
        assert!(ar1_forward(&params, &b).is_ok());
        // Sampling with x = 1 but testing against x = 2.
        let rows: Vec<f64> = (0..4000)
            .map(|r| {
                let mut rng = derive_stream(34, r).rng();
                let b = sample_gaussian_seq(params.horizon() + 1, &mut rng);
                ar1_forward(&params, &b).unwrap().d.unwrap()[0]
            })
            .collect();
        let (mean, cov) = conditional_target(0.5, 2.0, 0);
        let r = ks_one_sample("t", &rows, |v| normal_cdf((v - mean[0]) / cov[0][0].sqrt()), 0.01).unwrap();
        assert!(!r.passed);
    }

    proptest! {
        #[test]
        fn hat_b_and_x_are_consistent(a in 0.0f64..0.95, v in prop::collection::vec(-3.0f64..3.0, 400..420)) {
            let p = ArParams::new(a, Some(0.5)).unwrap();
            prop_assume!(v.len() > p.horizon() + 1);
            let out = ar1_forward(&p, &v).unwrap();
            for n in 0..out.hat_b.len() {
                let back = a * out.x[n + 1] + out.hat_b[n];
                prop_assert!((back - out.x[n]).abs() <= 1e-12 * (1.0 + out.x[n].abs()));
            }
        }
    }
}
