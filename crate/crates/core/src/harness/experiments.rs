use rayon::prelude::*;

use super::{ExperimentSpec, Params};
use crate::analogue::{
    ar1_conditional_check, ar1_output_check, brownian_burke_transform, discrete_pitman_check, grid_output_law_check, logexp_queue,
    nonmarkov_pitman_check, symmetry_rate_check, LogExpParams, QueueKind,
};
use crate::error::{Error, Result};
use crate::pathcore::{chain_sup, gamma_n, m_n_functional, GridPath, PathBundle};
use crate::queuesim::{
    burke_independence_check, conditioned_pair_check, departures_law_check, future_formula_check, queue_sum_formula_check, simulate_queue,
    simulate_tandem, tandem_independence_check, tandem_law_check, zero_queue_identities_check, QueueRecord, TandemRecord,
};
use crate::sampler::{derive_stream, salted_seed, sample_brownian_grid};
use crate::shape::{
    digamma, digamma_series, estimate_brownian_shape, estimate_poisson_shape, free_energy, gamma_closed_form, legendre_identity_check, polymer_trend,
};
use crate::spectra::{charlier_check, eigensolver_invariants_check, gue_marginal_check, sample_gue_spectrum, weyl_chamber_mass_n2};
use crate::stattest::{ks_two_sample, TestReport};

pub(super) static REGISTRY: &[ExperimentSpec] = &[
    ExperimentSpec {
        id: "gue-marginal",
        citation: "Γₙ of n independent Brownian motions at time 1 has the law of the ordered GUE spectrum",
        defaults: &[("n", &[2.0, 3.0, 4.0]), ("dt", &[1e-3]), ("samples", &[1e5]), ("alpha", &[0.01])],
        run: gue_marginal,
    },
    ExperimentSpec {
        id: "mn-functional",
        citation: "The last-passage functional Mₙ is the max-plus chain Bₙ⊙⋯⊙B₁, the top component of Γₙ, and is distributed as the largest GUE eigenvalue",
        defaults: &[("n", &[3.0]), ("dt", &[1e-4]), ("samples", &[2000.0]), ("alpha", &[0.01])],
        run: mn_functional,
    },
    ExperimentSpec {
        id: "burke-mm1",
        citation: "Burke's theorem: departures of a stationary M/M/1 queue are Poisson(λ), independent of the unused-service process and of the current queue",
        defaults: &[("lambda", &[0.5]), ("mu", &[1.0]), ("window", &[1000.0]), ("replicates", &[400.0]), ("lookback", &[10.0]), ("alpha", &[0.01])],
        run: burke_mm1,
    },
    ExperimentSpec {
        id: "queue-symmetry",
        citation: "Symmetry formula: the queue length equals the supremum of future departures minus future T-epochs",
        defaults: &[("lambda", &[0.5]), ("mu", &[1.0]), ("window", &[1000.0]), ("runs", &[200.0]), ("points", &[20.0])],
        run: queue_symmetry,
    },
    ExperimentSpec {
        id: "tandem",
        citation: "Output theorem for M/M/1 queues in tandem: Dₙ, T₁, …, Tₙ are independent Poisson processes; mass conservation and the zero-queue identities hold pathwise",
        defaults: &[("lambda", &[0.5]), ("mu", &[1.0, 1.5, 2.0]), ("window", &[1000.0]), ("replicates", &[400.0]), ("alpha", &[0.01])],
        run: tandem,
    },
    ExperimentSpec {
        id: "queue-sum-formula",
        citation: "Total tandem queue length as a supremum of output minus the ⊗-chain of the T-processes, forwards and on reversed paths",
        defaults: &[("lambda", &[0.5]), ("mu", &[1.0, 1.5, 2.0]), ("window", &[1000.0]), ("runs", &[1000.0]), ("min_exact_fraction", &[0.99])],
        run: queue_sum_formula,
    },
    ExperimentSpec {
        id: "charlier",
        citation: "Γₙ of n unit-rate Poisson processes has the Charlier ensemble law started from (0, 1, …, n−1)",
        defaults: &[("n", &[2.0, 3.0]), ("t", &[1.0]), ("samples", &[1e6]), ("alpha", &[0.01])],
        run: charlier,
    },
    ExperimentSpec {
        id: "conditioned-pair",
        citation: "For unequal rates, Γ₂(A, S) has the law of (A, S) conditioned on A ≤ S for all time",
        defaults: &[("lambda", &[1.0]), ("mu", &[2.0]), ("t", &[5.0]), ("pad", &[25.0]), ("samples", &[1e6]), ("threshold", &[0.02])],
        run: conditioned_pair,
    },
    ExperimentSpec {
        id: "pitman-discrete",
        citation: "Discrete Pitman theorem: 2M − X of a biased simple walk is the walk conditioned to stay non-negative",
        defaults: &[("p_up", &[2.0 / 3.0]), ("n_steps", &[20.0]), ("samples", &[1e6]), ("threshold", &[0.01])],
        run: pitman_discrete,
    },
    ExperimentSpec {
        id: "pitman-nonmarkov",
        citation: "Pitman theorem for the ±1 Markov chain: 2M − X is the chain conditioned to stay non-negative",
        defaults: &[("a", &[0.7]), ("b", &[0.4]), ("n_steps", &[20.0]), ("samples", &[1e6]), ("threshold", &[0.01])],
        run: pitman_nonmarkov,
    },
    ExperimentSpec {
        id: "brownian-burke",
        citation: "Brownian Burke theorem: D and T of the Brownian queue are independent Brownian motions with drifts λ and μ; symmetry formula for Q",
        defaults: &BROWNIAN_DEFAULTS,
        run: brownian_burke,
    },
    ExperimentSpec {
        id: "logexp-burke",
        citation: "Output theorem for the log∫exp queue: D and T are independent Brownian motions with drifts λ and μ; log∫exp symmetry formula",
        defaults: &BROWNIAN_DEFAULTS,
        run: logexp_burke,
    },
    ExperimentSpec {
        id: "ar1-output",
        citation: "AR(1) output theorem: the reversed innovations b̂ are i.i.d. standard normal",
        defaults: &[("a", &[0.3, 0.5, 0.8]), ("len", &[3.0]), ("samples", &[1e5]), ("alpha", &[0.01])],
        run: ar1_output,
    },
    ExperimentSpec {
        id: "ar1-conditional",
        citation: "AR(1) conditional law: given X₀ = x the sequence d⁽ˣ⁾ is Gaussian with the conditioning mean and covariance",
        defaults: &[("a", &[0.3, 0.5, 0.8]), ("x", &[1.0]), ("k", &[5.0]), ("samples", &[1e5]), ("alpha", &[0.01])],
        run: ar1_conditional,
    },
    ExperimentSpec {
        id: "legendre",
        citation: "Tandem shape function γ(x) = (√x − 1)² for x > 1 as the Legendre dual of the queue-sum asymptotics",
        defaults: &[("lambda", &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]), ("step", &[1e-4]), ("tol", &[1e-6])],
        run: legendre,
    },
    ExperimentSpec {
        id: "shape-poisson",
        citation: "Poisson last-passage shape: (1/n)(S₁⊗⋯⊗Sₙ)(xn) → γ(x)",
        defaults: &[("x", &[4.0]), ("n", &[200.0]), ("replicates", &[200.0]), ("tol", &[0.05])],
        run: shape_poisson,
    },
    ExperimentSpec {
        id: "shape-brownian",
        citation: "Brownian last-passage shape: (1/n)(B₁⊗⋯⊗Bₙ)(xn) → 2√x up to sign",
        defaults: &[("x", &[1.0, 2.0]), ("n", &[400.0]), ("dt", &[1e-3]), ("replicates", &[4.0]), ("tol", &[0.05])],
        run: shape_brownian,
    },
    ExperimentSpec {
        id: "polymer",
        citation: "Directed polymer free energy f(β) = −g(−β²) − 2 log β with g(x) = sup_y[xy + Ψ(y)]",
        defaults: &[("beta", &[1.0]), ("n", &[10.0, 20.0, 40.0]), ("dt", &[0.01]), ("replicates", &[40.0]), ("tol", &[0.15]), ("stationarity_tol", &[1e-8])],
        run: polymer,
    },
    ExperimentSpec {
        id: "numerics",
        citation: "Numerical foundations: eigensolver invariants, Weyl-chamber normalisation, digamma accuracy",
        defaults: &[
            ("max_n", &[64.0]),
            ("per_size", &[5.0]),
            ("eigen_tol", &[1e-9]),
            ("weyl_half_width", &[9.0]),
            ("weyl_panels", &[1800.0]),
            ("weyl_tol", &[1e-6]),
            ("digamma_y", &[0.1, 0.5, 1.0, 2.5, 7.3, 20.0, 100.0]),
            ("digamma_tol", &[1e-10]),
        ],
        run: numerics,
    },
];

const BROWNIAN_DEFAULTS: [(&str, &[f64]); 13] = [
    ("lambda", &[0.0]),
    ("mu", &[1.0]),
    ("dt", &[1e-3]),
    ("window", &[100.0]),
    ("burn", &[50.0]),
    ("replicates", &[200.0]),
    ("unit", &[1.0]),
    ("alpha", &[0.01]),
    ("rate_dts", &[0.04, 0.01, 0.0025, 0.000625]),
    ("rate_pre", &[30.0]),
    ("rate_window", &[60.0]),
    ("rate_replicates", &[20.0]),
    ("min_order", &[0.8]),
];

fn positive(key: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::param(format!("`{key}` must be positive, got {x}")))
    }
}

fn gue_marginal(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let (dt, samples, alpha) = (p.f64("dt")?, p.count("samples")?, p.f64("alpha")?);
    let mut out = Vec::new();
    for n in p.counts("n")? {
        out.extend(gue_marginal_check(id, n, dt, samples, salted_seed(seed, &format!("n={n}")), alpha)?);
    }
    Ok(out)
}

fn mn_functional(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let (n, dt, samples, alpha) = (p.count("n")?, p.f64("dt")?, p.count("samples")?, p.f64("alpha")?);
    if n < 2 || samples < 2 {
        return Err(Error::param("need n ≥ 2 and at least two samples"));
    }
    let steps = (1.0 / positive("dt", dt)?).round() as usize;
    let rows: Vec<(f64, f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|r| {
            let mut rng = derive_stream(salted_seed(seed, "paths"), r as u64).rng();
            let paths: Vec<GridPath> = (0..n).map(|_| sample_brownian_grid(0.0, dt, steps, &mut rng)).collect::<Result<_>>()?;
            let bundle = PathBundle::new(paths)?;
            let t_end = bundle.components()[0].t_end();
            let m = m_n_functional(&bundle, t_end)?;
            let chain = *chain_sup(bundle.reversed().components())?.values().last().expect("non-empty grid");
            let top = *gamma_n(&bundle)?.components()[n - 1].values().last().expect("non-empty grid");
            Ok((m, chain, top))
        })
        .collect::<Result<_>>()?;
    let gue: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|r| {
            let mut rng = derive_stream(salted_seed(seed, "gue"), r as u64).rng();
            Ok(*sample_gue_spectrum(n, 1.0, &mut rng)?.eigenvalues().last().expect("n ≥ 2"))
        })
        .collect::<Result<_>>()?;
    let chain_gap = rows.iter().map(|(m, c, _)| (m - c).abs()).fold(0.0, f64::max);
    let top_gap = rows.iter().map(|(m, _, t)| (m - t).abs()).sum::<f64>() / rows.len() as f64;
    let m: Vec<f64> = rows.iter().map(|x| x.0).collect();
    let mut ks = ks_two_sample(id, &m, &gue, alpha)?;
    ks.statistic_name = format!("ks_Mn_vs_gue_largest_n{n}");
    Ok(vec![
        TestReport::upper_bound(id, "max_abs_Mn_minus_sup_chain", chain_gap, 1e-9).with_seed(seed),
        TestReport::upper_bound(id, "mean_abs_Mn_minus_top_component", top_gap, dt.sqrt())
            .with_seed(seed)
            .with_note("the identity holds for continuous paths; on a grid the gap is O(√dt)"),
        ks.with_seed(seed),
    ])
}

fn queues(p: &Params, seed: u64) -> Result<Vec<QueueRecord>> {
    let (lambda, mu, window, reps) = (p.f64("lambda")?, p.f64("mu")?, p.f64("window")?, p.count("replicates")?);
    (0..reps)
        .into_par_iter()
        .map(|r| simulate_queue(lambda, mu, (0.0, window), &mut derive_stream(seed, r as u64).rng()))
        .collect()
}

fn burke_mm1(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let records = queues(p, seed)?;
    let first = records.first().ok_or_else(|| Error::param("need at least one replicate"))?;
    let mut out = departures_law_check(id, first, p.f64("alpha")?)?;
    out.extend(burke_independence_check(id, &records, p.f64("lookback")?)?);
    Ok(out.into_iter().map(|r| r.with_seed(seed)).collect())
}

fn queue_symmetry(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let (lambda, mu, window, runs, points) = (p.f64("lambda")?, p.f64("mu")?, p.f64("window")?, p.count("runs")?, p.count("points")?);
    let per_run: Vec<(usize, usize, usize)> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let rec = simulate_queue(lambda, mu, (0.0, window), &mut derive_stream(seed, r as u64).rng())?;
            let (mut exact, mut flagged, mut bad) = (0, 0, 0);
            for k in 0..points {
                let res = future_formula_check(&rec, window * k as f64 / points as f64)?;
                if res.residual == 0.0 {
                    exact += 1;
                } else if res.truncated {
                    flagged += 1;
                } else {
                    bad += 1;
                }
            }
            Ok((exact, flagged, bad))
        })
        .collect::<Result<_>>()?;
    let (exact, flagged, bad) = per_run.iter().fold((0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let total = (runs * points).max(1) as f64;
    Ok(vec![
        TestReport::upper_bound(id, "unflagged_nonzero_residuals", bad as f64, 0.0)
            .with_seed(seed)
            .with_truncation(flagged > 0)
            .with_note(format!("{exact} exact, {flagged} truncation-flagged of {} evaluations", runs * points)),
        TestReport::lower_bound(id, "exact_fraction", exact as f64 / total, 0.0).with_seed(seed),
    ])
}

fn tandems(p: &Params, seed: u64, reps_key: &str) -> Result<Vec<TandemRecord>> {
    let (lambda, mus, window, reps) = (p.f64("lambda")?, p.list("mu")?, p.f64("window")?, p.count(reps_key)?);
    (0..reps)
        .into_par_iter()
        .map(|r| simulate_tandem(lambda, &mus, (0.0, window), &mut derive_stream(seed, r as u64).rng()))
        .collect()
}

fn tandem(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let runs = tandems(p, seed, "replicates")?;
    let first = runs.first().ok_or_else(|| Error::param("need at least one replicate"))?;
    let mut out = tandem_law_check(id, first, p.f64("alpha")?)?;
    out.extend(tandem_independence_check(id, &runs)?);
    let violations: usize = runs.iter().map(|t| t.mass_conservation_violations()).sum();
    out.push(TestReport::upper_bound(id, "mass_conservation_violations", violations as f64, 0.0));
    let (mut worst, mut applicable): (f64, usize) = (0.0, 0);
    for t in &runs {
        let r = zero_queue_identities_check(id, t)?;
        if r.note.is_none() {
            applicable += 1;
            worst = worst.max(r.value);
        }
    }
    out.push(
        TestReport::upper_bound(id, "zero_queue_identity_gap", worst, 0.0)
            .with_note(format!("{applicable} of {} runs started empty", runs.len())),
    );
    Ok(out.into_iter().map(|r| r.with_seed(seed)).collect())
}

fn queue_sum_formula(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let runs = tandems(p, seed, "runs")?;
    let mut exact = 0;
    let mut flagged = 0;
    let mut bad = 0;
    for t in &runs {
        let r = queue_sum_formula_check(t)?;
        if r.exact() {
            exact += 1;
        } else if r.truncated() {
            flagged += 1;
        } else {
            bad += 1;
        }
    }
    let n = runs.len().max(1) as f64;
    Ok(vec![
        TestReport::lower_bound(id, "exact_fraction", exact as f64 / n, p.f64("min_exact_fraction")?)
            .with_seed(seed)
            .with_truncation(flagged > 0)
            .with_note(format!("{exact} exact, {flagged} truncation-flagged of {}", runs.len())),
        TestReport::upper_bound(id, "unflagged_nonzero_residuals", bad as f64, 0.0).with_seed(seed),
    ])
}

fn charlier(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let (t, samples, alpha) = (p.f64("t")?, p.count("samples")?, p.f64("alpha")?);
    let mut out = Vec::new();
    for n in p.counts("n")? {
        out.extend(charlier_check(id, n, t, samples, salted_seed(seed, &format!("n={n}")), alpha)?);
    }
    Ok(out)
}

fn conditioned_pair(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    Ok(vec![conditioned_pair_check(
        id,
        p.f64("lambda")?,
        p.f64("mu")?,
        p.f64("t")?,
        p.f64("pad")?,
        p.count("samples")?,
        seed,
        p.f64("threshold")?,
    )?])
}

fn pitman_discrete(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    Ok(vec![discrete_pitman_check(id, p.f64("p_up")?, p.count("n_steps")?, p.count("samples")?, seed, p.f64("threshold")?)?])
}

fn pitman_nonmarkov(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    Ok(vec![nonmarkov_pitman_check(
        id,
        p.f64("a")?,
        p.f64("b")?,
        p.count("n_steps")?,
        p.count("samples")?,
        seed,
        p.f64("threshold")?,
    )?])
}

fn grid_queue(id: &str, kind: QueueKind, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let (lambda, mu) = (p.f64("lambda")?, p.f64("mu")?);
    if !(lambda < mu) {
        return Err(Error::Unstable { lambda, mu });
    }
    let dt = positive("dt", p.f64("dt")?)?;
    let burn = (positive("burn", p.f64("burn")?)? / dt).round() as usize;
    let steps = burn + (positive("window", p.f64("window")?)? / dt).round() as usize;
    let reps = p.count("replicates")?;
    let params = LogExpParams::new(dt)?;
    let outputs: Vec<_> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = derive_stream(seed, r as u64).rng();
            let a = sample_brownian_grid(lambda, dt, steps, &mut rng)?;
            let s = sample_brownian_grid(mu, dt, steps, &mut rng)?;
            match kind {
                QueueKind::MaxPlus => brownian_burke_transform(&a, &s, burn),
                QueueKind::LogExp => logexp_queue(&a, &s, &params, burn),
            }
        })
        .collect::<Result<_>>()?;
    let mut out = grid_output_law_check(id, &outputs, lambda, mu, p.f64("unit")?, p.f64("alpha")?)?;
    let rate_seed = salted_seed(seed, "symmetry");
    out.push(symmetry_rate_check(
        id,
        kind,
        lambda,
        mu,
        (p.f64("rate_pre")?, p.f64("rate_window")?),
        &p.list("rate_dts")?,
        p.count("rate_replicates")?,
        rate_seed,
        p.f64("min_order")?,
    )?);
    Ok(out.into_iter().map(|r| r.with_seed(seed)).collect())
}

fn brownian_burke(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    grid_queue(id, QueueKind::MaxPlus, p, seed)
}

fn logexp_burke(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    grid_queue(id, QueueKind::LogExp, p, seed)
}

fn tag(reports: Vec<TestReport>, label: &str) -> impl Iterator<Item = TestReport> + '_ {
    reports.into_iter().map(move |mut r| {
        r.statistic_name = format!("{}[{label}]", r.statistic_name);
        r
    })
}

fn ar1_output(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let (len, samples, alpha) = (p.count("len")?, p.count("samples")?, p.f64("alpha")?);
    let mut out = Vec::new();
    for a in p.list("a")? {
        let label = format!("a={a}");
        out.extend(tag(ar1_output_check(id, a, len, samples, salted_seed(seed, &label), alpha)?, &label));
    }
    Ok(out)
}

fn ar1_conditional(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let (x, k, samples, alpha) = (p.f64("x")?, p.count("k")?, p.count("samples")?, p.f64("alpha")?);
    let mut out = Vec::new();
    for a in p.list("a")? {
        let label = format!("a={a}");
        out.extend(tag(ar1_conditional_check(id, a, x, k, samples, salted_seed(seed, &label), alpha)?, &label));
    }
    Ok(out)
}

fn legendre(id: &str, p: &Params, _seed: u64) -> Result<Vec<TestReport>> {
    let (step, tol) = (p.f64("step")?, p.f64("tol")?);
    p.list("lambda")?
        .into_iter()
        .map(|l| {
            let r = legendre_identity_check(l, step)?;
            Ok(TestReport::upper_bound(id, &format!("legendre_residual[lambda={l}]"), r.residual, tol)
                .with_note(format!("sup attained at x = {:.6}", r.argmax)))
        })
        .collect()
}

fn shape_reports(id: &str, xs: &[f64], est: &[f64], stderr: &[f64], reference: impl Fn(f64) -> f64, tol: f64) -> Vec<TestReport> {
    xs.iter()
        .zip(est)
        .zip(stderr)
        .map(|((&x, &e), &se)| {
            let r = reference(x);
            let err = if r != 0.0 { (e / r - 1.0).abs() } else { e.abs() };
            TestReport::upper_bound(id, &format!("relative_error[x={x}]"), err, tol).with_note(format!("estimate {e:.5} ± {se:.5}, reference {r:.5}"))
        })
        .collect()
}

fn shape_poisson(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let xs = p.list("x")?;
    let est = estimate_poisson_shape(&xs, p.count("n")?, p.count("replicates")?, seed)?;
    let out = shape_reports(id, &xs, &est.estimates, &est.stderr, gamma_closed_form, p.f64("tol")?);
    Ok(out.into_iter().map(|r| r.with_seed(seed)).collect())
}

fn shape_brownian(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let xs = p.list("x")?;
    let est = estimate_brownian_shape(&xs, p.count("n")?, p.f64("dt")?, p.count("replicates")?, seed)?;
    let out = shape_reports(id, &xs, &est.estimates, &est.stderr, |x| 2.0 * x.sqrt(), p.f64("tol")?);
    Ok(out.into_iter().map(|r| r.with_seed(seed)).collect())
}

fn polymer(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let beta = p.f64("beta")?;
    let f = free_energy(beta)?;
    let ns = p.counts("n")?;
    let trend = polymer_trend(beta, &ns, p.f64("dt")?, p.count("replicates")?, seed)?;
    let gaps: Vec<f64> = trend.iter().map(|pt| (pt.mean - f.value).abs()).collect();
    let increases = gaps.windows(2).filter(|w| w[1] >= w[0]).count();
    let last = trend.last().ok_or_else(|| Error::param("need at least one n"))?;
    let listing: Vec<String> = trend.iter().map(|pt| format!("n={}: {:.4} ± {:.4}", pt.n, pt.mean, pt.stderr)).collect();
    Ok(vec![
        TestReport::upper_bound(id, "free_energy_stationarity_residual", f.stationarity_residual, p.f64("stationarity_tol")?)
            .with_note(format!("f({beta}) = {:.10}, maximiser y = {:.10}", f.value, f.maximizer)),
        TestReport::upper_bound(id, "gap_non_decreases", increases as f64, 0.0).with_seed(seed).with_note(listing.join(", ")),
        TestReport::upper_bound(id, &format!("relative_gap[n={}]", last.n), gaps[gaps.len() - 1] / f.value.abs(), p.f64("tol")?).with_seed(seed),
    ])
}

fn numerics(id: &str, p: &Params, seed: u64) -> Result<Vec<TestReport>> {
    let mut out = eigensolver_invariants_check(id, p.count("max_n")?, p.count("per_size")?, seed, p.f64("eigen_tol")?)?;
    let mass = weyl_chamber_mass_n2(p.f64("weyl_half_width")?, p.count("weyl_panels")?)?;
    out.push(TestReport::upper_bound(id, "weyl_n2_mass_error", (mass - 1.0).abs(), p.f64("weyl_tol")?));
    let ys = p.list("digamma_y")?;
    let worst = ys
        .iter()
        .map(|&y| {
            let o = digamma_series(y);
            ((digamma(y) - o) / o).abs()
        })
        .fold(0.0, f64::max);
    out.push(TestReport::upper_bound(id, "digamma_relative_error", worst, p.f64("digamma_tol")?).with_note(format!("{} points", ys.len())));
    Ok(out)
}
