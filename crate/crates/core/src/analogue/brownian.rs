use rayon::prelude::*;
use serde::Serialize;

use super::logexp::{log_add_exp, LogExpParams};
use crate::error::{Error, Result};
use crate::pathcore::GridPath;
use crate::queuesim::TRUNCATION_TAIL_FRACTION;
use crate::sampler::{derive_stream, sample_brownian_grid};
use crate::stattest::{corr_bound, ks_one_sample, normal_cdf, TestReport};

/// Mass fraction of a `log∫exp` integral allowed in the discarded or
/// outermost tenth of the window before the truncation flag is raised.
pub const BURN_IN_MASS_TOL: f64 = 1e-6;

/// Which functional defines the queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QueueKind {
    /// `Q(t) = sup_{s ≤ t} [A(s,t) − S(s,t)]`.
    MaxPlus,
    /// `Q(t) = log∫_{−∞}^t exp[A(s,t) − S(s,t)] ds`.
    LogExp,
}

/// A grid queue seen on the observation window `[0, W]`, after a pre-window
/// that stands in for the infinite past.
#[derive(Debug, Clone, PartialEq)]
pub struct GridQueueOutput {
    pub kind: QueueKind,
    /// `Q` at the observation grid points.
    pub q: Vec<f64>,
    /// `D(t) = A(0,t) + Q(0) − Q(t)`.
    pub d: GridPath,
    /// `T(t) = S(0,t) − Q(0) + Q(t)`.
    pub t: GridPath,
    pub q0: f64,
    /// Raised when the pre-window may be too short for `Q(0)`.
    pub burn_in_flag: bool,
}

fn check_inputs(a: &GridPath, s: &GridPath, burn_in_steps: usize) -> Result<()> {
    if a.dt() != s.dt() || a.len() != s.len() {
        return Err(Error::domain("A and S must share a grid"));
    }
    if burn_in_steps == 0 || burn_in_steps >= a.steps() {
        return Err(Error::domain(format!(
            "pre-window of {burn_in_steps} steps must be positive and leave an observation window ({} steps total)",
            a.steps()
        )));
    }
    Ok(())
}

fn assemble(kind: QueueKind, a: &GridPath, s: &GridPath, q_full: Vec<f64>, burn: usize, burn_in_flag: bool) -> Result<GridQueueOutput> {
    let q = q_full[burn..].to_vec();
    let q0 = q[0];
    let (av, sv) = (a.values(), s.values());
    let mut d = Vec::with_capacity(q.len());
    let mut t = Vec::with_capacity(q.len());
    for (j, &qj) in q.iter().enumerate() {
        d.push(av[burn + j] - av[burn] + (q0 - qj));
        t.push(sv[burn + j] - sv[burn] - (q0 - qj));
    }
    Ok(GridQueueOutput {
        kind,
        q,
        d: GridPath::new(0.0, a.dt(), d)?,
        t: GridPath::new(0.0, a.dt(), t)?,
        q0,
        burn_in_flag,
    })
}

/// Brownian queue: `Q` by the Lindley recursion from an empty queue at the
/// start of the pre-window, then `(D, T)` on the observation window. Grid
/// index `burn_in_steps` is time 0.
///
/// The flag is raised when the maximiser of `A(s,0) − S(s,0)` lies in the
/// earliest tenth of the pre-window.
pub fn brownian_burke_transform(a: &GridPath, s: &GridPath, burn_in_steps: usize) -> Result<GridQueueOutput> {
    check_inputs(a, s, burn_in_steps)?;
    let (av, sv) = (a.values(), s.values());
    let mut q = Vec::with_capacity(av.len());
    q.push(0.0);
    let mut last_empty = 0;
    for j in 1..av.len() {
        let next = q[j - 1] + (av[j] - av[j - 1]) - (sv[j] - sv[j - 1]);
        if next <= 0.0 {
            q.push(0.0);
            if j <= burn_in_steps {
                last_empty = j;
            }
        } else {
            q.push(next);
        }
    }
    let flag = (last_empty as f64) < TRUNCATION_TAIL_FRACTION * burn_in_steps as f64;
    assemble(QueueKind::MaxPlus, a, s, q, burn_in_steps, flag)
}

/// `log∫exp` queue: `Q_j = log Σ_{i ≤ j} dt·exp(X(t_i, t_j))`, `X = A − S`,
/// summed from the start of the pre-window. The flag is raised when the
/// earliest tenth of the pre-window carries more than [`BURN_IN_MASS_TOL`]
/// of the integral at time 0.
pub fn logexp_queue(a: &GridPath, s: &GridPath, params: &LogExpParams, burn_in_steps: usize) -> Result<GridQueueOutput> {
    check_inputs(a, s, burn_in_steps)?;
    if (a.dt() - params.dt()).abs() > 1e-12 * params.dt() {
        return Err(Error::param(format!("grid step {} does not match dt = {}", a.dt(), params.dt())));
    }
    let log_dt = params.dt().ln();
    let (av, sv) = (a.values(), s.values());
    let cut = (TRUNCATION_TAIL_FRACTION * burn_in_steps as f64) as usize;
    let mut q = Vec::with_capacity(av.len());
    q.push(log_dt);
    for j in 1..av.len() {
        let dx = (av[j] - av[j - 1]) - (sv[j] - sv[j - 1]);
        q.push(log_add_exp(q[j - 1] + dx, log_dt));
    }
    // Mass of cells i ≤ cut in the integral at time 0.
    let x = |j: usize| av[j] - sv[j];
    let early = q[cut] + (x(burn_in_steps) - x(cut));
    let flag = early - q[burn_in_steps] > BURN_IN_MASS_TOL.ln();
    assemble(QueueKind::LogExp, a, s, q, burn_in_steps, flag)
}

/// Residual of a symmetry formula over the interior times `t ≤ W/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryResidual {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub points: usize,
    /// Some interior time needed the last tenth of the window.
    pub truncated: bool,
}

fn summarise(q: &[f64], rhs: &[f64], truncated: bool) -> SymmetryResidual {
    let interior = q.len() / 2 + 1;
    let diffs: Vec<f64> = q[..interior].iter().zip(&rhs[..interior]).map(|(a, b)| (a - b).abs()).collect();
    SymmetryResidual {
        max_abs: diffs.iter().cloned().fold(0.0, f64::max),
        mean_abs: diffs.iter().sum::<f64>() / interior as f64,
        points: interior,
        truncated,
    }
}

/// `Q(t) = sup_{u ≥ t} [D(t,u) − T(t,u)]` on the grid, by a backward
/// Lindley recursion over `Y = D − T`.
pub fn brownian_symmetry_residual(out: &GridQueueOutput) -> SymmetryResidual {
    let (d, t) = (out.d.values(), out.t.values());
    let k = d.len() - 1;
    let tail = ((1.0 - TRUNCATION_TAIL_FRACTION) * k as f64) as usize;
    let mut rhs = vec![0.0; k + 1];
    // argmax[j]: grid index attaining the supremum for time j.
    let mut argmax = vec![k; k + 1];
    for j in (0..k).rev() {
        let dy = (d[j + 1] - d[j]) - (t[j + 1] - t[j]);
        let cand = dy + rhs[j + 1];
        if cand > 0.0 {
            rhs[j] = cand;
            argmax[j] = argmax[j + 1];
        } else {
            argmax[j] = j;
        }
    }
    let truncated = argmax[..=k / 2].iter().any(|&u| u >= tail);
    summarise(&out.q, &rhs, truncated)
}

/// `Q(t) = log∫_t^∞ exp[D(t,u) − T(t,u)] du` as a left-endpoint sum over the
/// cells `[t_u, t_{u+1}]`, `u ≥ j`.
pub fn logexp_symmetry_residual(out: &GridQueueOutput) -> SymmetryResidual {
    let (d, t) = (out.d.values(), out.t.values());
    let k = d.len() - 1;
    let log_dt = out.d.dt().ln();
    let tail = ((1.0 - TRUNCATION_TAIL_FRACTION) * k as f64) as usize;
    let mut rhs = vec![0.0; k + 1];
    rhs[k - 1] = log_dt;
    for j in (0..k - 1).rev() {
        let dy = (d[j + 1] - d[j]) - (t[j + 1] - t[j]);
        rhs[j] = log_add_exp(log_dt, dy + rhs[j + 1]);
    }
    rhs[k] = f64::NEG_INFINITY;
    let y = |j: usize| d[j] - t[j];
    let truncated = (0..=k / 2).any(|j| rhs[tail] + (y(tail) - y(j)) - rhs[j] > BURN_IN_MASS_TOL.ln());
    summarise(&out.q, &rhs, truncated)
}

/// Unit-time increments of `D` and `T` pooled over replicates, tested
/// against `N(λu, u)` and `N(μu, u)`, plus the correlation of `D` and `T`
/// increments over the same interval.
pub fn grid_output_law_check(theorem_id: &str, outputs: &[GridQueueOutput], lambda: f64, mu: f64, unit: f64, alpha: f64) -> Result<Vec<TestReport>> {
    let Some(first) = outputs.first() else {
        return Err(Error::InsufficientData("no replicates".into()));
    };
    let lag = (unit / first.d.dt()).round() as usize;
    if lag == 0 || (lag as f64 * first.d.dt() - unit).abs() > 1e-9 * unit {
        return Err(Error::param(format!("unit {unit} is not a multiple of dt = {}", first.d.dt())));
    }
    let mut dd = Vec::new();
    let mut dt = Vec::new();
    for o in outputs {
        let (d, t) = (o.d.values(), o.t.values());
        let mut j = 0;
        while j + lag < d.len() {
            dd.push(d[j + lag] - d[j]);
            dt.push(t[j + lag] - t[j]);
            j += lag;
        }
    }
    let sd = unit.sqrt();
    let mut r1 = ks_one_sample(theorem_id, &dd, |x| normal_cdf((x - lambda * unit) / sd), alpha)?;
    r1.statistic_name = format!("ks_D_increments_vs_normal({lambda})");
    let mut r2 = ks_one_sample(theorem_id, &dt, |x| normal_cdf((x - mu * unit) / sd), alpha)?;
    r2.statistic_name = format!("ks_T_increments_vs_normal({mu})");
    let mut r3 = corr_bound(theorem_id, &dd, &dt)?;
    r3.statistic_name = "corr_D_T_increments".into();
    let flagged = outputs.iter().filter(|o| o.burn_in_flag).count();
    Ok([r1, r2, r3]
        .into_iter()
        .map(|r| r.with_truncation(flagged > 0).with_note(format!("{flagged} of {} replicates burn-in flagged", outputs.len())))
        .collect())
}

/// Empirical order of convergence of the symmetry residual. One fine pair
/// `(A, S)` per replicate is coarsened by factors `4^k`; the mean interior
/// residual is averaged over replicates at each level, and the least-squares
/// slope of `log residual` against `log dt` is compared with `min_order`.
#[allow(clippy::too_many_arguments)]
pub fn symmetry_rate_check(
    theorem_id: &str,
    kind: QueueKind,
    lambda: f64,
    mu: f64,
    horizon: (f64, f64),
    dts: &[f64],
    replicates: usize,
    seed: u64,
    min_order: f64,
) -> Result<TestReport> {
    let (pre, window) = horizon;
    if dts.len() < 2 || replicates == 0 {
        return Err(Error::param("need at least two step sizes and one replicate"));
    }
    let fine = dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let factors: Vec<usize> = dts
        .iter()
        .map(|&dt| {
            let f = (dt / fine).round();
            if (f * fine - dt).abs() > 1e-9 * dt {
                Err(Error::param(format!("dt = {dt} is not a multiple of {fine}")))
            } else {
                Ok(f as usize)
            }
        })
        .collect::<Result<_>>()?;
    let lcm = factors.iter().cloned().max().unwrap_or(1);
    let burn_fine = ((pre / fine).round() as usize).div_ceil(lcm) * lcm;
    let steps = burn_fine + ((window / fine).round() as usize).div_ceil(lcm) * lcm;

    let per_rep: Vec<(Vec<f64>, bool)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = derive_stream(seed, r as u64).rng();
            let a = sample_brownian_grid(lambda, fine, steps, &mut rng)?;
            let s = sample_brownian_grid(mu, fine, steps, &mut rng)?;
            let mut res = Vec::with_capacity(factors.len());
            let mut trunc = false;
            for &f in &factors {
                let (ac, sc) = (a.coarsen(f)?, s.coarsen(f)?);
                let out = match kind {
                    QueueKind::MaxPlus => brownian_burke_transform(&ac, &sc, burn_fine / f)?,
                    QueueKind::LogExp => logexp_queue(&ac, &sc, &LogExpParams::new(ac.dt())?, burn_fine / f)?,
                };
                let sr = match kind {
                    QueueKind::MaxPlus => brownian_symmetry_residual(&out),
                    QueueKind::LogExp => logexp_symmetry_residual(&out),
                };
                trunc |= sr.truncated || out.burn_in_flag;
                res.push(sr.mean_abs);
            }
            Ok((res, trunc))
        })
        .collect::<Result<_>>()?;

    let mut means = vec![0.0; dts.len()];
    for (res, _) in &per_rep {
        for (m, r) in means.iter_mut().zip(res) {
            *m += r / replicates as f64;
        }
    }
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / xs.len() as f64, ys.iter().sum::<f64>() / ys.len() as f64);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let levels: Vec<String> = dts.iter().zip(&means).map(|(d, m)| format!("dt={d:e}: {m:.3e}")).collect();
    let name = match kind {
        QueueKind::MaxPlus => "brownian_symmetry_residual_order",
        QueueKind::LogExp => "logexp_symmetry_residual_order",
    };
    Ok(TestReport::lower_bound(theorem_id, name, slope, min_order)
        .with_seed(seed)
        .with_truncation(per_rep.iter().any(|(_, t)| *t))
        .with_note(format!("mean interior residual {}", levels.join(", "))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathcore::Path;

    fn pair(lambda: f64, mu: f64, dt: f64, steps: usize, seed: u64) -> (GridPath, GridPath) {
        let mut rng = derive_stream(seed, 0).rng();
        let a = sample_brownian_grid(lambda, dt, steps, &mut rng).unwrap();
        let s = sample_brownian_grid(mu, dt, steps, &mut rng).unwrap();
        (a, s)
    }

    #[test]
    fn identical_inputs_give_an_empty_queue() {
        let (a, _) = pair(0.0, 1.0, 0.01, 2000, 1);
        let out = brownian_burke_transform(&a, &a, 1000).unwrap();
        assert!(out.q.iter().all(|&q| q == 0.0));
        assert_eq!(out.d, a.window(1000, 2000).unwrap().with_t0(0.0).unwrap());
        assert_eq!(out.t, out.d);
    }

    #[test]
    fn conservation_d_plus_t_is_a_plus_s() {
        let (a, s) = pair(0.0, 1.0, 0.01, 3000, 2);
        for out in [
            brownian_burke_transform(&a, &s, 1000).unwrap(),
            logexp_queue(&a, &s, &LogExpParams::new(0.01).unwrap(), 1000).unwrap(),
        ] {
            let lhs = out.d.add(&out.t).unwrap();
            let rhs = a.window(1000, 3000).unwrap().add(&s.window(1000, 3000).unwrap()).unwrap().with_t0(0.0).unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        }
    }

    #[test]
    fn constant_drift_logexp_queue_is_a_geometric_sum() {
        let (dt, c) = (0.01, 0.8);
        let steps = 5000;
        let a = GridPath::zero(0.0, dt, steps).unwrap();
        let s = GridPath::from_increments(0.0, dt, &vec![c * dt; steps]).unwrap();
        let out = logexp_queue(&a, &s, &LogExpParams::new(dt).unwrap(), 4000).unwrap();
        let closed = (dt / (1.0 - (-c * dt).exp())).ln();
        assert!(out.q.iter().all(|q| (q - closed).abs() < 1e-10), "{} vs {closed}", out.q[0]);
        assert!(!out.burn_in_flag);
    }

    #[test]
    fn logexp_queue_halving_dt_moves_q_by_order_dt() {
        let (dt, c) = (0.02, 0.5);
        let q = |dt: f64| (dt / (1.0 - (-c * dt).exp())).ln();
        let limit = -(c.ln());
        let e1 = (q(dt) - limit).abs();
        let e2 = (q(dt / 2.0) - limit).abs();
        assert!((e1 / e2 - 2.0).abs() < 0.05);
    }

    #[test]
    fn short_pre_window_is_flagged() {
        let (a, s) = pair(0.9, 1.0, 0.01, 400, 3);
        let out = brownian_burke_transform(&a, &s, 10).unwrap();
        let out2 = logexp_queue(&a, &s, &LogExpParams::new(0.01).unwrap(), 10).unwrap();
        assert!(out.burn_in_flag || out.q0 == 0.0);
        assert!(out2.burn_in_flag);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let (a, s) = pair(0.0, 1.0, 0.01, 100, 4);
        assert!(brownian_burke_transform(&a, &s, 0).is_err());
        assert!(brownian_burke_transform(&a, &s, 100).is_err());
        assert!(logexp_queue(&a, &s, &LogExpParams::new(0.02).unwrap(), 50).is_err());
        let short = GridPath::zero(0.0, 0.01, 50).unwrap();
        assert!(brownian_burke_transform(&a, &short, 10).is_err());
    }

    #[test]
    fn symmetry_residuals_are_small_at_interior_times() {
        let dt = 1e-3;
        let (a, s) = pair(0.0, 1.0, dt, 80_000, 5);
        let out = brownian_burke_transform(&a, &s, 20_000).unwrap();
        let r = brownian_symmetry_residual(&out);
        assert!(r.mean_abs < 0.5 * dt.sqrt(), "{r:?}");
        assert!(!r.truncated);
        let out = logexp_queue(&a, &s, &LogExpParams::new(dt).unwrap(), 20_000).unwrap();
        assert!(!out.burn_in_flag);
        let r = logexp_symmetry_residual(&out);
        assert!(r.mean_abs < 5.0 * dt, "{r:?}");
        assert!(!r.truncated);
    }

    #[test]
    fn output_laws_hold_on_a_small_run() {
        let dt = 0.01;
        let outs: Vec<_> = (0..20)
            .map(|r| {
                let mut rng = derive_stream(9, r).rng();
                let a = sample_brownian_grid(0.0, dt, 15_000, &mut rng).unwrap();
                let s = sample_brownian_grid(1.0, dt, 15_000, &mut rng).unwrap();
                brownian_burke_transform(&a, &s, 5000).unwrap()
            })
            .collect();
        let reps = grid_output_law_check("t", &outs, 0.0, 1.0, 1.0, 0.01).unwrap();
        assert!(reps.iter().all(|r| r.passed), "{reps:#?}");
    }
}
