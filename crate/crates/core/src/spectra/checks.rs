use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{charlier_box, charlier_pmf, charlier_support, eigenvalues, sample_gue_spectrum};
use crate::error::{Error, Result};
use crate::pathcore::{gamma_n, GridPath, PathBundle, StepPath};
use crate::sampler::{derive_stream, poisson_times, sample_brownian_grid, sample_gue, salted_seed};
use crate::stattest::{chi_square_gof, ks_two_sample, mean_and_var, TestReport};

const CHUNK: usize = 5_000;

// Runs `draw` `samples` times, chunk `c` on stream `derive_stream(seed, c)`.
fn chunked<T: Send>(samples: usize, seed: u64, draw: impl Fn(&mut ChaCha8Rng) -> Result<T> + Sync) -> Result<Vec<T>> {
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = derive_stream(seed, c as u64).rng();
            let m = CHUNK.min(samples - c * CHUNK);
            (0..m).map(|_| draw(&mut rng)).collect()
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn column(rows: &[Vec<f64>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i]).collect()
}

/// `Γₙ(B)(1)` for `n` standard Brownian motions on a grid of step `dt`,
/// against sampled GUE spectra at time 1: two-sample KS on the largest and
/// on the smallest component, and a 3σ band on the difference of the means
/// of every ordered component.
pub fn gue_marginal_check(theorem_id: &str, n: usize, dt: f64, samples: usize, seed: u64, alpha: f64) -> Result<Vec<TestReport>> {
    if n < 2 || samples < 2 {
        return Err(Error::param("need n ≥ 2 and at least two samples"));
    }
    let steps = (1.0 / dt).round() as usize;
    if steps == 0 || (steps as f64 * dt - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("dt = {dt} must divide 1")));
    }
    let transformed = chunked(samples, salted_seed(seed, "gamma_n"), |rng| {
        let paths: Vec<GridPath> = (0..n).map(|_| sample_brownian_grid(0.0, dt, steps, rng)).collect::<Result<_>>()?;
        let g = gamma_n(&PathBundle::new(paths)?)?;
        Ok(g.components().iter().map(|c| *c.values().last().expect("non-empty grid")).collect::<Vec<f64>>())
    })?;
    let gue = chunked(samples, salted_seed(seed, "gue"), |rng| Ok(sample_gue_spectrum(n, 1.0, rng)?.eigenvalues().to_vec()))?;

    let mut out = Vec::with_capacity(n + 2);
    for (label, i) in [("largest", n - 1), ("smallest", 0)] {
        let mut r = ks_two_sample(theorem_id, &column(&transformed, i), &column(&gue, i), alpha)?;
        r.statistic_name = format!("ks_{label}_component_n{n}");
        out.push(r.with_seed(seed));
    }
    for i in 0..n {
        let (ma, va) = mean_and_var(&column(&transformed, i));
        let (mb, vb) = mean_and_var(&column(&gue, i));
        let se = (va / transformed.len() as f64 + vb / gue.len() as f64).sqrt();
        out.push(TestReport::deviation(theorem_id, &format!("mean_gap_component_{}_n{n}", i + 1), ma, mb, se, 3.0).with_seed(seed));
    }
    Ok(out)
}

/// `Γₙ(N)(t)` for `n` independent rate-1 Poisson processes on `[0, t]`,
/// tabulated on the truncated Charlier support plus one overflow cell,
/// against `charlier_pmf` by chi-square. A second report carries the
/// truncation error of the tabulated mass.
pub fn charlier_check(theorem_id: &str, n: usize, t: f64, samples: usize, seed: u64, alpha: f64) -> Result<Vec<TestReport>> {
    if n < 2 || samples == 0 {
        return Err(Error::param("need n ≥ 2 and at least one sample"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param(format!("time must be positive, got {t}")));
    }
    let max = charlier_box(n, t, 1e-12);
    let support = charlier_support(n, max);
    let pmf: Vec<f64> = support.iter().map(|y| charlier_pmf(y, t)).collect::<Result<_>>()?;
    let mass: f64 = pmf.iter().sum();

    let draws = chunked(samples, salted_seed(seed, "charlier"), |rng| {
        let paths: Vec<StepPath> = (0..n)
            .map(|_| StepPath::counting(0.0, t, poisson_times(1.0, (0.0, t), rng)?))
            .collect::<Result<_>>()?;
        let g = gamma_n(&PathBundle::new(paths)?)?;
        Ok(g.components().iter().map(|c| c.terminal_value() as u64).collect::<Vec<u64>>())
    })?;
    let mut counts = vec![0u64; support.len() + 1];
    for y in &draws {
        match support.binary_search(y) {
            Ok(i) => counts[i] += 1,
            Err(_) => counts[support.len()] += 1,
        }
    }
    let mut cells = pmf.clone();
    cells.push((1.0 - mass).max(0.0));
    let mut chi = chi_square_gof(theorem_id, &counts, &cells, alpha)?;
    chi.statistic_name = format!("chi_square_charlier_n{n}");
    let mass_report = TestReport::upper_bound(theorem_id, &format!("charlier_mass_error_n{n}"), (mass - 1.0).abs(), 1e-8)
        .with_truncation(true)
        .with_note(format!("support truncated at {max}"));
    Ok(vec![chi.with_seed(seed), mass_report])
}

/// Eigenvalues of random GUE matrices of every size `1, 2, 4, …, max_n`
/// against the trace and Frobenius invariants, as the worst relative error
/// `|Σλ − tr A| / ‖A‖_F` and `|Σλ² − ‖A‖²_F| / ‖A‖²_F`.
pub fn eigensolver_invariants_check(theorem_id: &str, max_n: usize, per_size: usize, seed: u64, threshold: f64) -> Result<Vec<TestReport>> {
    if max_n == 0 || per_size == 0 {
        return Err(Error::param("need max_n ≥ 1 and at least one matrix per size"));
    }
    let mut sizes = Vec::new();
    let mut n = 1;
    while n <= max_n {
        sizes.push(n);
        n *= 2;
    }
    let mut rng = derive_stream(salted_seed(seed, "eigensolver"), 0).rng();
    let (mut trace_err, mut frob_err): (f64, f64) = (0.0, 0.0);
    for &n in &sizes {
        for _ in 0..per_size {
            let h = sample_gue(n, &mut rng)?;
            let ev = eigenvalues(&h)?;
            let f2 = h.frobenius_norm_sq();
            let sum: f64 = ev.eigenvalues().iter().sum();
            let sq: f64 = ev.eigenvalues().iter().map(|x| x * x).sum();
            trace_err = trace_err.max((sum - h.trace()).abs() / f2.sqrt());
            frob_err = frob_err.max((sq - f2).abs() / f2);
        }
    }
    let note = format!("sizes up to {max_n}, {per_size} matrices each");
    Ok(vec![
        TestReport::upper_bound(theorem_id, "eigen_trace_relative_error", trace_err, threshold).with_seed(seed).with_note(note.clone()),
        TestReport::upper_bound(theorem_id, "eigen_frobenius_relative_error", frob_err, threshold).with_seed(seed).with_note(note),
    ])
}
