use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pathcore::GridPath;
use crate::sampler::{derive_stream, sample_pm1_chain, sample_srw_path};
use crate::stattest::{tv_distance, TestReport};

/// Stop doubling the look-ahead once the survival probability moves by less
/// than this.
pub const CONDITIONING_TOL: f64 = 1e-6;

const MC_CHUNK: usize = 20_000;

/// `2M − X` with `M(t) = max_{s ≤ t} X(s)`.
pub fn pitman_2m_minus_x(x: &GridPath) -> GridPath {
    let mut m = f64::NEG_INFINITY;
    let values = x
        .values()
        .iter()
        .map(|&v| {
            m = m.max(v);
            2.0 * m - v
        })
        .collect();
    GridPath::new(x.t0(), x.dt(), values).expect("starts at 2·0 − 0 = 0")
}

/// Endpoint law at step `n` of a ±1 walk conditioned never to go below 0,
/// the infinite horizon replaced by `n + pad`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedLaw {
    /// `pmf[x] = P(X_n = x | X ≥ 0 on [0, n + pad])`.
    pub pmf: Vec<f64>,
    pub n_steps: usize,
    pub pad: usize,
    /// `P(X ≥ 0 on [0, n + pad])`.
    pub survival: f64,
    /// Change in `survival` at the last doubling of `pad`.
    pub tail_change: f64,
}

/// Conditioned law for the simple walk with `P(+1) = p_up`.
pub fn conditioned_walk_law(p_up: f64, n_steps: usize) -> Result<ConditionedLaw> {
    if !(p_up > 0.5 && p_up <= 1.0) {
        return Err(Error::param(format!(
            "conditioning on staying nonnegative needs upward drift, p_up in (1/2, 1], got {p_up}"
        )));
    }
    conditioned_law(p_up, 1.0 - p_up, n_steps)
}

/// Conditioned law for the partial sums of the ±1 chain with `ξ₀ = 1`,
/// `P(ξ'=1 | ξ=1) = a`, `P(ξ'=−1 | ξ=−1) = b`, `0 < b < a < 1`.
pub fn conditioned_chain_law(a: f64, b: f64, n_steps: usize) -> Result<ConditionedLaw> {
    if !(0.0 < b && b < a && a < 1.0) {
        return Err(Error::param(format!("need 0 < b < a < 1, got a={a}, b={b}")));
    }
    conditioned_law(a, b, n_steps)
}

// States are (x, ξ) with ξ index 0 = last step −1, 1 = last step +1.
fn conditioned_law(stay_up: f64, stay_down: f64, n: usize) -> Result<ConditionedLaw> {
    let step = |from: usize, to: usize| match (from, to) {
        (1, 1) => stay_up,
        (1, _) => 1.0 - stay_up,
        (_, 0) => stay_down,
        _ => 1.0 - stay_down,
    };

    let mut mass = vec![[0.0f64; 2]; n + 1];
    mass[0][1] = 1.0;
    for k in 0..n {
        let mut next = vec![[0.0f64; 2]; n + 1];
        for x in 0..=k {
            for xi in 0..2 {
                let m = mass[x][xi];
                if m == 0.0 {
                    continue;
                }
                next[x + 1][1] += m * step(xi, 1);
                if x > 0 {
                    next[x - 1][0] += m * step(xi, 0);
                }
            }
        }
        mass = next;
    }

    let weighted = |pad: usize| {
        // alive[x][ξ] = P(no visit below 0 within `pad` further steps).
        let width = n + pad + 1;
        let mut alive = vec![[1.0f64; 2]; width];
        for _ in 0..pad {
            let mut next = vec![[0.0f64; 2]; width];
            for x in 0..width {
                for xi in 0..2 {
                    let up = if x + 1 < width { alive[x + 1][1] } else { 1.0 };
                    let down = if x > 0 { alive[x - 1][0] } else { 0.0 };
                    next[x][xi] = step(xi, 1) * up + step(xi, 0) * down;
                }
            }
            alive = next;
        }
        let w: Vec<f64> = (0..=n).map(|x| mass[x][0] * alive[x][0] + mass[x][1] * alive[x][1]).collect();
        let z: f64 = w.iter().sum();
        (w, z)
    };

    let mut pad = n.max(16);
    let (_, mut z) = weighted(pad);
    loop {
        let (w, z2) = weighted(2 * pad);
        let change = (z - z2).abs();
        pad *= 2;
        z = z2;
        if change < CONDITIONING_TOL {
            if z <= 0.0 {
                return Err(Error::Numeric("conditioning event has probability 0".into()));
            }
            return Ok(ConditionedLaw {
                pmf: w.iter().map(|v| v / z).collect(),
                n_steps: n,
                pad,
                survival: z,
                tail_change: change,
            });
        }
        if pad > 1 << 16 {
            return Err(Error::Numeric(format!("conditioning did not settle (last change {change:e})")));
        }
    }
}

fn endpoint_counts(n: usize, samples: usize, seed: u64, draw: impl Fn(&mut rand_chacha::ChaCha8Rng) -> Result<GridPath> + Sync) -> Result<Vec<f64>> {
    if samples == 0 {
        return Err(Error::InsufficientData("no Monte Carlo samples requested".into()));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = derive_stream(seed, c as u64).rng();
            let m = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut counts = vec![0u64; n + 1];
            for _ in 0..m {
                let y = pitman_2m_minus_x(&draw(&mut rng)?);
                let end = *y.values().last().expect("non-empty") as usize;
                counts[end] += 1;
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0u64; n + 1];
    for p in partial {
        for (t, c) in total.iter_mut().zip(p) {
            *t += c;
        }
    }
    Ok(total.iter().map(|&c| c as f64 / samples as f64).collect())
}

fn tv_report(theorem_id: &str, name: &str, mc: &[f64], law: &ConditionedLaw, threshold: f64, seed: u64) -> TestReport {
    TestReport::upper_bound(theorem_id, name, tv_distance(mc, &law.pmf), threshold)
        .with_seed(seed)
        .with_note(format!(
            "look-ahead pad {} steps, last survival change {:.1e}",
            law.pad, law.tail_change
        ))
}

/// TV distance between the Monte Carlo endpoint law of `2M − X` for the
/// simple walk and the conditioned law.
pub fn discrete_pitman_check(theorem_id: &str, p_up: f64, n_steps: usize, samples: usize, seed: u64, threshold: f64) -> Result<TestReport> {
    let law = conditioned_walk_law(p_up, n_steps)?;
    let mc = endpoint_counts(n_steps, samples, seed, |rng| sample_srw_path(p_up, n_steps, rng))?;
    Ok(tv_report(theorem_id, "tv_2M-X_vs_conditioned_walk", &mc, &law, threshold, seed))
}

/// As [`discrete_pitman_check`] for the ±1 Markov chain.
pub fn nonmarkov_pitman_check(theorem_id: &str, a: f64, b: f64, n_steps: usize, samples: usize, seed: u64, threshold: f64) -> Result<TestReport> {
    let law = conditioned_chain_law(a, b, n_steps)?;
    let mc = endpoint_counts(n_steps, samples, seed, |rng| sample_pm1_chain(a, b, n_steps, rng))?;
    Ok(tv_report(theorem_id, "tv_2M-X_vs_conditioned_chain", &mc, &law, threshold, seed))
}
