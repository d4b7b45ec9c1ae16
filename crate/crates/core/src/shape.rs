//! First-order asymptotics: the tandem shape function and its Legendre
//! dual, the Brownian last-passage constant, and the free energy of the
//! Brownian directed polymer.

use rayon::prelude::*;
use serde::Serialize;

use crate::analogue::LogExpPath;
use crate::error::{Error, Result};
use crate::pathcore::{chain_inf, chain_sup, StepPath};
use crate::sampler::{derive_stream, sample_brownian_grid, sample_poisson_path};
use crate::stattest::mean_and_stderr;

/// Sign relating `(B₁⊗⋯⊗Bₙ)(t)` to its positive limit `2√(xn)·n`, fixed by
/// `E[(B₁⊗B₂)(t)] = −2√(t/π)`.
pub const BROWNIAN_SHAPE_SIGN: f64 = -1.0;

/// `γ(x) = (√x − 1)² 1_{x > 1}`.
pub fn gamma_closed_form(x: f64) -> f64 {
    if x > 1.0 {
        (x.sqrt() - 1.0).powi(2)
    } else {
        0.0
    }
}

/// Grid maximisation of `λx − γ(x)` compared with `λ/(1−λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegendreResidual {
    pub lambda: f64,
    pub sup: f64,
    pub argmax: f64,
    pub residual: f64,
}

/// Maximise on the grid `step, 2·step, …, x_max`, doubling `x_max` (from 16)
/// until the maximiser is interior.
pub fn legendre_identity_check(lambda: f64, step: f64) -> Result<LegendreResidual> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::param(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if !(step > 0.0) {
        return Err(Error::param("grid step must be positive"));
    }
    let mut x_max = 16.0;
    loop {
        let points = (x_max / step).round() as usize;
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
        for i in 1..=points {
            let x = i as f64 * step;
            let v = lambda * x - gamma_closed_form(x);
            if v > best {
                best = v;
                arg = x;
            }
        }
        if arg < 0.5 * x_max {
            let target = lambda / (1.0 - lambda);
            return Ok(LegendreResidual {
                lambda,
                sup: best,
                argmax: arg,
                residual: (best - target).abs(),
            });
        }
        x_max *= 2.0;
        if x_max > 1e9 {
            return Err(Error::Numeric("Legendre maximiser not bracketed".into()));
        }
    }
}

/// Monte Carlo estimate of a scaled chain value on a grid of `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeEstimate {
    pub x_values: Vec<f64>,
    /// Mean over replicates of `(1/n)·chain(xn)`.
    pub estimates: Vec<f64>,
    pub n: usize,
    pub stderr: Vec<f64>,
    pub replicates: usize,
}

fn check_grid(x_grid: &[f64], n: usize, replicates: usize) -> Result<f64> {
    if n == 0 || replicates == 0 {
        return Err(Error::param("n and replicates must be positive"));
    }
    if x_grid.is_empty() || x_grid.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::param("x grid must be non-empty, finite and nonnegative"));
    }
    Ok(x_grid.iter().cloned().fold(0.0, f64::max))
}

fn summarise(x_grid: &[f64], n: usize, rows: Vec<Vec<f64>>) -> ShapeEstimate {
    let replicates = rows.len();
    let (estimates, stderr) = (0..x_grid.len())
        .map(|i| {
            let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            if col.len() > 1 {
                mean_and_stderr(&col)
            } else {
                (col[0], f64::NAN)
            }
        })
        .unzip();
    ShapeEstimate {
        x_values: x_grid.to_vec(),
        estimates,
        n,
        stderr,
        replicates,
    }
}

/// `(1/n)(S₁⊗⋯⊗Sₙ)(xn)` for independent rate-1 Poisson processes, exact on
/// step paths.
pub fn estimate_poisson_shape(x_grid: &[f64], n: usize, replicates: usize, seed: u64) -> Result<ShapeEstimate> {
    let x_max = check_grid(x_grid, n, replicates)?;
    let horizon = x_max * n as f64;
    let rows = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = derive_stream(seed, r as u64).rng();
            let paths: Vec<StepPath> = (0..n)
                .map(|_| sample_poisson_path(1.0, (0.0, horizon), &mut rng))
                .collect::<Result<_>>()?;
            let chain = chain_inf(&paths)?;
            Ok(x_grid.iter().map(|&x| chain.value(x * n as f64) / n as f64).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(summarise(x_grid, n, rows))
}

/// `BROWNIAN_SHAPE_SIGN·(1/n)(B₁⊗⋯⊗Bₙ)(xn)` for independent standard
/// Brownian motions on a grid of step `dt`, evaluated at the grid point
/// nearest `xn`.
pub fn estimate_brownian_shape(x_grid: &[f64], n: usize, dt: f64, replicates: usize, seed: u64) -> Result<ShapeEstimate> {
    let x_max = check_grid(x_grid, n, replicates)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param(format!("dt must be positive, got {dt}")));
    }
    let steps = ((x_max * n as f64) / dt).round() as usize;
    if steps > 50_000_000 {
        return Err(Error::TooLarge(format!("{steps} grid steps per path")));
    }
    let rows = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = derive_stream(seed, r as u64).rng();
            let mut chain = sample_brownian_grid(0.0, dt, steps, &mut rng)?;
            for _ in 1..n {
                let b = sample_brownian_grid(0.0, dt, steps, &mut rng)?;
                chain = chain_inf(&[chain, b])?;
            }
            let v = chain.values();
            Ok(x_grid
                .iter()
                .map(|&x| {
                    let j = ((x * n as f64) / dt).round() as usize;
                    BROWNIAN_SHAPE_SIGN * v[j.min(steps)] / n as f64
                })
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(summarise(x_grid, n, rows))
}

const DIGAMMA_SHIFT: f64 = 8.0;

/// `Ψ = Γ'/Γ` for `y > 0`: upward recurrence to `y ≥ 8`, then the
/// asymptotic series.
pub fn digamma(y: f64) -> f64 {
    if !(y > 0.0) || !y.is_finite() {
        return f64::NAN;
    }
    let mut acc = 0.0;
    let mut y = y;
    while y < DIGAMMA_SHIFT {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let r = 1.0 / (y * y);
    let series = r * (1.0 / 12.0
        - r * (1.0 / 120.0
            - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r / 12.0))))));
    acc + y.ln() - 0.5 / y - series
}

/// `Ψ'` by the same recurrence and asymptotic series.
pub fn trigamma(y: f64) -> f64 {
    if !(y > 0.0) || !y.is_finite() {
        return f64::NAN;
    }
    let mut acc = 0.0;
    let mut y = y;
    while y < DIGAMMA_SHIFT {
        acc += 1.0 / (y * y);
        y += 1.0;
    }
    let r = 1.0 / (y * y);
    let series = 1.0 / 6.0 - r * (1.0 / 30.0 - r * (1.0 / 42.0 - r * (1.0 / 30.0 - r * (5.0 / 66.0 - r * (691.0 / 2730.0 - r * 7.0 / 6.0)))));
    acc + 1.0 / y + 0.5 * r + series * r / y
}

/// Euler–Mascheroni constant from `H_m − ln m − 1/(2m) + 1/(12m²) −
/// 1/(120m⁴)` at `m = 1000`; the error is below 1e-18.
pub fn euler_gamma_series() -> f64 {
    let m = 1000.0f64;
    let h: f64 = (1..=1000).rev().map(|k| 1.0 / k as f64).sum();
    h - m.ln() - 0.5 / m + 1.0 / (12.0 * m * m) - 1.0 / (120.0 * m.powi(4))
}

/// Reference `Ψ(y) = −γ + Σ_{k≥0} (y−1)/((k+1)(k+y))`, compensated sum of
/// 10⁶ terms plus the tail `ln((K+y)/(K+1)) + (y−1)/(2(K+1)(K+y))`.
/// Independent of [`digamma`]; slow.
pub fn digamma_series(y: f64) -> f64 {
    let k_max = 1_000_000usize;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in (0..k_max).rev() {
        let k = k as f64;
        let term = (y - 1.0) / ((k + 1.0) * (k + y)) - comp;
        let t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    let kk = k_max as f64;
    let tail = ((kk + y) / (kk + 1.0)).ln() + (y - 1.0) / (2.0 * (kk + 1.0) * (kk + y));
    -euler_gamma_series() + sum + tail
}

/// `f(β) = −g(−β²) − 2 log β` with `g(x) = sup_{y>0}[xy + Ψ(y)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeEnergy {
    pub beta: f64,
    pub value: f64,
    /// `y*` with `Ψ'(y*) = β²`.
    pub maximizer: f64,
    /// `|Ψ'(y*) − β²|`.
    pub stationarity_residual: f64,
}

/// Bisection on `Ψ'(y) − β²` (strictly decreasing) inside `bracket`.
pub fn free_energy_maximizer(beta: f64, bracket: (f64, f64)) -> Result<f64> {
    let target = beta * beta;
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::param(format!("bad bracket ({lo}, {hi})")));
    }
    if !(trigamma(lo) >= target && trigamma(hi) <= target) {
        return Err(Error::param(format!("bracket ({lo}, {hi}) does not contain the maximiser for beta={beta}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if trigamma(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn free_energy(beta: f64) -> Result<FreeEnergy> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::param(format!("beta must be positive, got {beta}")));
    }
    let target = beta * beta;
    // Ψ'(y) > 1/y² and Ψ'(y) < 1/y + 1/y² bound the root.
    let lo = 0.5 / beta;
    let hi = 2.0 / target + 2.0 / beta;
    let y = free_energy_maximizer(beta, (lo, hi))?;
    let g = -target * y + digamma(y);
    Ok(FreeEnergy {
        beta,
        value: -g - 2.0 * beta.ln(),
        maximizer: y,
        stationarity_residual: (trigamma(y) - target).abs(),
    })
}

/// `(1/n) log Zₙ(β)` for one environment: the `log∫exp` chain of
/// `βB₁, …, βBₙ` on `[−n, 0]`, read at 0.
pub fn polymer_free_energy_mc(beta: f64, n: usize, dt: f64, seed: u64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) || n == 0 {
        return Err(Error::param("need beta > 0 and n ≥ 1"));
    }
    if !(dt > 0.0 && dt <= 1.0) {
        return Err(Error::param(format!("dt must lie in (0, 1], got {dt}")));
    }
    let steps = (n as f64 / dt).round() as usize;
    let mut rng = derive_stream(seed, n as u64).rng();
    let paths: Vec<LogExpPath> = (0..n)
        .map(|_| {
            let b = sample_brownian_grid(0.0, dt, steps, &mut rng)?.with_t0(-(n as f64))?;
            Ok(LogExpPath::from_grid(&b.scale(beta)))
        })
        .collect::<Result<_>>()?;
    Ok(chain_sup(&paths)?.last() / n as f64)
}

/// Mean and standard error of [`polymer_free_energy_mc`] over replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolymerPoint {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
}

pub fn polymer_trend(beta: f64, ns: &[usize], dt: f64, replicates: usize, seed: u64) -> Result<Vec<PolymerPoint>> {
    if replicates < 2 {
        return Err(Error::InsufficientData("need at least two replicates".into()));
    }
    ns.iter()
        .map(|&n| {
            let vals: Vec<f64> = (0..replicates)
                .into_par_iter()
                .map(|r| polymer_free_energy_mc(beta, n, dt, derive_stream(seed, r as u64).stream_id))
                .collect::<Result<_>>()?;
            let (mean, stderr) = mean_and_stderr(&vals);
            Ok(PolymerPoint { n, mean, stderr })
        })
        .collect()
}
