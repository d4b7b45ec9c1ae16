//! Stationary M/M/1 queues and tandems on a finite window.
//!
//! A queue is driven by an arrival process `A` and a service process `S`.
//! The initial length `Q(t_lo)` is drawn from the stationary law
//! `P(Q = k) = (1 − ρ) ρᵏ`, `ρ = λ/μ`, after which the queue is evolved event
//! by event: an arrival adds a customer, a service epoch removes one if the
//! queue is occupied and is otherwise unused. At equal times the service
//! epoch is processed first. From the trajectory,
//!
//! ```text
//! D(s,t] = A(s,t] + Q(s) − Q(t),   U = S − D,   T = A + U,
//! ```
//!
//! and stage `k` of a tandem is the same construction driven by `D_{k−1}`
//! (with `D₀ = A`) and its own service process `S_k`, started from an
//! independent stationary length. Tandem stages also satisfy
//! `T_k(s,t] = S_k(s,t] − Q_k(s) + Q_k(t)`, which every record checks against
//! `A_k + U_k`.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use rand_distr::{Distribution, Geometric};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pathcore::{chain_inf, gamma2, Path, StepPath};
use crate::sampler::{derive_stream, poisson_times, salted_seed};
use crate::stattest::{corr_bound, empirical_pmf, exponential_cdf, ks_one_sample, tv_distance_map, TestReport};

/// Share of the horizon at the far end in which an argmax is treated as a
/// possible artefact of the finite window.
pub const TRUNCATION_TAIL_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Arrival,
    Departure,
    Unused,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Arrival => "arrival",
            EventKind::Departure => "departure",
            EventKind::Unused => "unused",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueEvent {
    pub time: f64,
    pub kind: EventKind,
}

/// One queue stage over `[t_lo, t_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueRecord {
    lambda: f64,
    mu: f64,
    arrivals: StepPath,
    services: StepPath,
    initial_queue: u64,
    // Q(t) − Q(t_lo)
    queue_change: StepPath,
    departures: StepPath,
    unused: StepPath,
    t_process: StepPath,
    events: Vec<QueueEvent>,
}

fn check_rates(lambda: f64, mu: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite() && mu.is_finite()) {
        return Err(Error::param(format!("rates must be positive and finite, got λ={lambda}, μ={mu}")));
    }
    if lambda >= mu {
        return Err(Error::Unstable { lambda, mu });
    }
    Ok(())
}

/// `P(Q = k) = (1 − ρ) ρᵏ`.
pub fn sample_stationary_length<R: Rng + ?Sized>(lambda: f64, mu: f64, rng: &mut R) -> Result<u64> {
    check_rates(lambda, mu)?;
    let g = Geometric::new(1.0 - lambda / mu).map_err(|e| Error::param(e.to_string()))?;
    Ok(g.sample(rng))
}

// Unit-jump path from sorted times, merging equal times into one jump.
fn counting_path(t_lo: f64, t_hi: f64, times: &[f64]) -> Result<StepPath> {
    let mut ts: Vec<f64> = Vec::with_capacity(times.len());
    let mut sizes: Vec<f64> = Vec::with_capacity(times.len());
    for &t in times {
        if ts.last() == Some(&t) {
            *sizes.last_mut().expect("parallel vectors") += 1.0;
        } else {
            ts.push(t);
            sizes.push(1.0);
        }
    }
    StepPath::new(t_lo, t_hi, ts, sizes)
}

fn expand_jumps(p: &StepPath) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(p.num_jumps());
    for (&t, &s) in p.jump_times().iter().zip(p.jump_sizes()) {
        if s < 1.0 || s.fract() != 0.0 {
            return Err(Error::domain(format!("not a counting path: jump of {s} at {t}")));
        }
        for _ in 0..s as u64 {
            out.push(t);
        }
    }
    Ok(out)
}

impl QueueRecord {
    /// Runs the queue from a given initial length.
    pub fn from_initial(arrivals: &StepPath, services: &StepPath, lambda: f64, mu: f64, initial_queue: u64) -> Result<Self> {
        check_rates(lambda, mu)?;
        if !arrivals.same_domain(services) {
            return Err(Error::domain("arrival and service paths must share a window"));
        }
        let (t_lo, t_hi) = arrivals.window();
        let a = expand_jumps(arrivals)?;
        let s = expand_jumps(services)?;
        let mut q = initial_queue;
        let mut events = Vec::with_capacity(a.len() + s.len());
        let (mut q_times, mut q_sizes) = (Vec::new(), Vec::new());
        let (mut dep, mut unused) = (Vec::new(), Vec::new());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < s.len() {
            let ta = a.get(i).copied().unwrap_or(f64::INFINITY);
            let ts = s.get(j).copied().unwrap_or(f64::INFINITY);
            if ts <= ta {
                j += 1;
                if q > 0 {
                    q -= 1;
                    dep.push(ts);
                    q_times.push(ts);
                    q_sizes.push(-1.0);
                    events.push(QueueEvent { time: ts, kind: EventKind::Departure });
                } else {
                    unused.push(ts);
                    events.push(QueueEvent { time: ts, kind: EventKind::Unused });
                }
            } else {
                i += 1;
                q += 1;
                q_times.push(ta);
                q_sizes.push(1.0);
                events.push(QueueEvent { time: ta, kind: EventKind::Arrival });
            }
        }
        let queue_change = merge_signed(t_lo, t_hi, &q_times, &q_sizes)?;
        let departures = counting_path(t_lo, t_hi, &dep)?;
        let unused = counting_path(t_lo, t_hi, &unused)?;
        let t_process = arrivals.add(&unused)?;
        Ok(Self {
            lambda,
            mu,
            arrivals: arrivals.clone(),
            services: services.clone(),
            initial_queue,
            queue_change,
            departures,
            unused,
            t_process,
            events,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn window(&self) -> (f64, f64) {
        self.arrivals.window()
    }

    pub fn arrivals(&self) -> &StepPath {
        &self.arrivals
    }

    pub fn services(&self) -> &StepPath {
        &self.services
    }

    pub fn initial_queue(&self) -> u64 {
        self.initial_queue
    }

    /// `Q(t) − Q(t_lo)` as a path.
    pub fn queue_change(&self) -> &StepPath {
        &self.queue_change
    }

    pub fn departures(&self) -> &StepPath {
        &self.departures
    }

    pub fn unused(&self) -> &StepPath {
        &self.unused
    }

    /// `T = A + U`.
    pub fn t_process(&self) -> &StepPath {
        &self.t_process
    }

    pub fn events(&self) -> &[QueueEvent] {
        &self.events
    }

    /// `Q(t)`.
    pub fn queue_length(&self, t: f64) -> f64 {
        self.initial_queue as f64 + self.queue_change.value(t)
    }

    /// Largest violation over all event times of `D(t_lo,t] = A(t_lo,t] +
    /// Q(t_lo) − Q(t)`, `U = S − D` and `T = S − Q(t_lo) + Q(t)`, together
    /// with the minimum queue length seen.
    pub fn invariant_residual(&self) -> (f64, f64) {
        let mut worst: f64 = 0.0;
        let mut min_q = self.initial_queue as f64;
        for e in &self.events {
            let t = e.time;
            let q = self.queue_length(t);
            min_q = min_q.min(q);
            let d = self.departures.value(t);
            worst = worst
                .max((d - (self.arrivals.value(t) - self.queue_change.value(t))).abs())
                .max((self.unused.value(t) - (self.services.value(t) - d)).abs())
                .max((self.t_process.value(t) - (self.services.value(t) + self.queue_change.value(t))).abs());
        }
        (worst, min_q)
    }
}

fn merge_signed(t_lo: f64, t_hi: f64, times: &[f64], sizes: &[f64]) -> Result<StepPath> {
    let mut ts: Vec<f64> = Vec::with_capacity(times.len());
    let mut ss: Vec<f64> = Vec::with_capacity(times.len());
    for (&t, &s) in times.iter().zip(sizes) {
        if ts.last() == Some(&t) {
            *ss.last_mut().expect("parallel vectors") += s;
        } else {
            ts.push(t);
            ss.push(s);
        }
    }
    let keep: Vec<bool> = ss.iter().map(|&s| s != 0.0).collect();
    let ts = ts.into_iter().zip(&keep).filter(|p| *p.1).map(|p| p.0).collect();
    let ss = ss.into_iter().zip(&keep).filter(|p| *p.1).map(|p| p.0).collect();
    StepPath::new(t_lo, t_hi, ts, ss)
}

/// Stationary M/M/1 queue driven by `A` and `S` on their common window.
pub fn build_stationary_queue<R: Rng + ?Sized>(arrivals: &StepPath, services: &StepPath, lambda: f64, mu: f64, rng: &mut R) -> Result<QueueRecord> {
    let q0 = sample_stationary_length(lambda, mu, rng)?;
    QueueRecord::from_initial(arrivals, services, lambda, mu, q0)
}

/// Samples `A ~ Poisson(λ)` and `S ~ Poisson(μ)` on the window and builds the queue.
pub fn simulate_queue<R: Rng + ?Sized>(lambda: f64, mu: f64, window: (f64, f64), rng: &mut R) -> Result<QueueRecord> {
    check_rates(lambda, mu)?;
    let a = counting_path(window.0, window.1, &poisson_times(lambda, window, rng)?)?;
    let s = counting_path(window.0, window.1, &poisson_times(mu, window, rng)?)?;
    build_stationary_queue(&a, &s, lambda, mu, rng)
}

/// Queues in series; stage `k` is fed by the departures of stage `k − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TandemRecord {
    stages: Vec<QueueRecord>,
}

impl TandemRecord {
    pub fn stages(&self) -> &[QueueRecord] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn arrivals(&self) -> &StepPath {
        self.stages[0].arrivals()
    }

    /// `D_n`, the output of the last stage.
    pub fn output(&self) -> &StepPath {
        self.stages.last().expect("tandem has a stage").departures()
    }

    pub fn window(&self) -> (f64, f64) {
        self.stages[0].window()
    }

    /// `Q₁(t) + ⋯ + Q_k(t)`.
    pub fn total_queue(&self, k: usize, t: f64) -> f64 {
        self.stages[..k].iter().map(|s| s.queue_length(t)).sum()
    }

    /// Count of event times at which `D_k(t) + Q₁(t)+⋯+Q_k(t) ≠ A(t) +
    /// Q₁(t_lo)+⋯+Q_k(t_lo)` for some `k`, compared exactly.
    pub fn mass_conservation_violations(&self) -> usize {
        let a = self.arrivals();
        let (t_lo, _) = self.window();
        let mut violations = 0;
        let mut times: Vec<f64> = self.stages.iter().flat_map(|s| s.events().iter().map(|e| e.time)).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        for &t in &times {
            for k in 1..=self.stages.len() {
                let lhs = self.stages[k - 1].departures().value(t) + self.total_queue(k, t);
                let rhs = a.value(t) + self.total_queue(k, t_lo);
                if lhs != rhs {
                    violations += 1;
                }
            }
        }
        violations
    }

    /// CSV event log with header `time,stage,event_type`; stages are 1-based
    /// and an arrival at stage `k > 1` is a departure from stage `k − 1`.
    pub fn write_event_log<W: Write>(&self, w: W) -> Result<()> {
        let mut rows: Vec<(f64, usize, EventKind)> = Vec::new();
        for (k, stage) in self.stages.iter().enumerate() {
            rows.extend(stage.events().iter().map(|e| (e.time, k + 1, e.kind)));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["time", "stage", "event_type"])?;
        for (t, k, kind) in rows {
            out.write_record([t.to_string(), k.to_string(), kind.as_str().to_owned()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Builds a tandem from the arrivals and one service path per stage.
pub fn build_tandem<R: Rng + ?Sized>(arrivals: &StepPath, services: &[StepPath], lambda: f64, mus: &[f64], rng: &mut R) -> Result<TandemRecord> {
    let initial: Vec<u64> = mus.iter().map(|&mu| sample_stationary_length(lambda, mu, rng)).collect::<Result<_>>()?;
    build_tandem_from_initial(arrivals, services, lambda, mus, &initial)
}

pub fn build_tandem_from_initial(arrivals: &StepPath, services: &[StepPath], lambda: f64, mus: &[f64], initial: &[u64]) -> Result<TandemRecord> {
    if services.is_empty() || services.len() != mus.len() || initial.len() != mus.len() {
        return Err(Error::param("need one service path, rate and initial length per stage"));
    }
    let mut stages: Vec<QueueRecord> = Vec::with_capacity(services.len());
    for ((s, &mu), &q0) in services.iter().zip(mus).zip(initial) {
        let input = stages.last().map_or(arrivals, |prev| prev.departures());
        stages.push(QueueRecord::from_initial(input, s, lambda, mu, q0)?);
    }
    Ok(TandemRecord { stages })
}

/// Samples all inputs on the window and builds the tandem.
pub fn simulate_tandem<R: Rng + ?Sized>(lambda: f64, mus: &[f64], window: (f64, f64), rng: &mut R) -> Result<TandemRecord> {
    for &mu in mus {
        check_rates(lambda, mu)?;
    }
    let a = counting_path(window.0, window.1, &poisson_times(lambda, window, rng)?)?;
    let services: Vec<StepPath> = mus
        .iter()
        .map(|&mu| counting_path(window.0, window.1, &poisson_times(mu, window, rng)?))
        .collect::<Result<_>>()?;
    build_tandem(&a, &services, lambda, mus, rng)
}

fn gap_ks(theorem_id: &str, label: &str, p: &StepPath, rate: f64, alpha: f64) -> Result<TestReport> {
    if p.num_jumps() < 2 {
        return Err(Error::InsufficientData(format!("{label}: fewer than two events in the window")));
    }
    let mut r = ks_one_sample(theorem_id, &p.gaps(), exponential_cdf(rate), alpha)?;
    r.statistic_name = format!("ks_{label}_gaps_vs_exp({rate})");
    Ok(r)
}

/// Gaps of `D` against Exponential(λ) and of `T` against Exponential(μ).
pub fn departures_law_check(theorem_id: &str, record: &QueueRecord, alpha: f64) -> Result<Vec<TestReport>> {
    Ok(vec![
        gap_ks(theorem_id, "D", record.departures(), record.lambda(), alpha)?,
        gap_ks(theorem_id, "T", record.t_process(), record.mu(), alpha)?,
    ])
}

/// Cross-replicate independence diagnostics: correlation of the window
/// counts of `D` and `T`, and of `D(t_hi − lookback, t_hi]` with `Q(t_hi)`.
pub fn burke_independence_check(theorem_id: &str, records: &[QueueRecord], lookback: f64) -> Result<Vec<TestReport>> {
    let mut d_counts = Vec::with_capacity(records.len());
    let mut t_counts = Vec::with_capacity(records.len());
    let mut past_d = Vec::with_capacity(records.len());
    let mut q_end = Vec::with_capacity(records.len());
    for r in records {
        let (lo, hi) = r.window();
        d_counts.push(r.departures().increment(lo, hi));
        t_counts.push(r.t_process().increment(lo, hi));
        past_d.push(r.departures().increment((hi - lookback).max(lo), hi));
        q_end.push(r.queue_length(hi));
    }
    let mut c1 = corr_bound(theorem_id, &d_counts, &t_counts)?;
    c1.statistic_name = "corr_D_T_counts".into();
    let mut c2 = corr_bound(theorem_id, &past_d, &q_end)?;
    c2.statistic_name = "corr_past_D_vs_Q".into();
    Ok(vec![c1, c2])
}

/// Gap tests for `D_n, T_1, …, T_n` of one tandem.
pub fn tandem_law_check(theorem_id: &str, tandem: &TandemRecord, alpha: f64) -> Result<Vec<TestReport>> {
    let lambda = tandem.stages[0].lambda();
    let mut out = vec![gap_ks(theorem_id, &format!("D{}", tandem.len()), tandem.output(), lambda, alpha)?];
    for (k, s) in tandem.stages.iter().enumerate() {
        out.push(gap_ks(theorem_id, &format!("T{}", k + 1), s.t_process(), s.mu(), alpha)?);
    }
    Ok(out)
}

/// Pairwise correlations of the window counts of `D_n, T_1, …, T_n` across
/// replicates.
pub fn tandem_independence_check(theorem_id: &str, tandems: &[TandemRecord]) -> Result<Vec<TestReport>> {
    let Some(first) = tandems.first() else {
        return Err(Error::InsufficientData("no tandem replicates".into()));
    };
    let n = first.len();
    let mut counts: Vec<Vec<f64>> = vec![Vec::with_capacity(tandems.len()); n + 1];
    let mut names = vec![format!("D{n}")];
    names.extend((1..=n).map(|k| format!("T{k}")));
    for t in tandems {
        let (lo, hi) = t.window();
        counts[0].push(t.output().increment(lo, hi));
        for (k, s) in t.stages.iter().enumerate() {
            counts[k + 1].push(s.t_process().increment(lo, hi));
        }
    }
    let mut out = Vec::new();
    for i in 0..=n {
        for j in (i + 1)..=n {
            let mut r = corr_bound(theorem_id, &counts[i], &counts[j])?;
            r.statistic_name = format!("corr_{}_{}", names[i], names[j]);
            out.push(r);
        }
    }
    Ok(out)
}

/// Both sides of an identity whose right-hand side is a supremum over an
/// unbounded horizon, evaluated on the finite window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormulaResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Argmax in the far tail of the horizon, or no horizon at all.
    pub truncated: bool,
}

impl FormulaResidual {
    fn new(lhs: f64, rhs: f64, truncated: bool) -> Self {
        Self { lhs, rhs, residual: (lhs - rhs).abs(), truncated }
    }
}

// sup over u ∈ [start, end] of a cadlag step path given as (time, level)
// pairs after `start`, with value 0 at `start`; returns the sup and the
// first time it is attained.
fn step_sup(start: f64, points: impl IntoIterator<Item = (f64, f64)>) -> (f64, f64) {
    let (mut best, mut at) = (0.0, start);
    for (t, v) in points {
        if v > best {
            best = v;
            at = t;
        }
    }
    (best, at)
}

fn in_tail(at: f64, start: f64, end: f64) -> bool {
    at >= start + (1.0 - TRUNCATION_TAIL_FRACTION) * (end - start)
}

/// `Q(t) = sup_{u>t}[D(t,u) − T(t,u)]` with the supremum over
/// `u ≤ t_hi`. The open intervals make the candidates the left limits at
/// event times plus the value after the last event.
pub fn future_formula_check(record: &QueueRecord, t: f64) -> Result<FormulaResidual> {
    let (lo, hi) = record.window();
    if !(t >= lo && t <= hi) {
        return Err(Error::domain(format!("time {t} outside window [{lo}, {hi}]")));
    }
    let lhs = record.queue_length(t);
    if t >= hi {
        return Ok(FormulaResidual::new(lhs, 0.0, true));
    }
    let d = record.departures();
    let tp = record.t_process();
    let (d0, t0) = (d.value(t), tp.value(t));
    let mut times: Vec<f64> = d.merged_times(tp).into_iter().filter(|&u| u > t).collect();
    times.push(hi);
    // D(t,u) − T(t,u) for u just before each event, i.e. the left limit
    let points = times.iter().map(|&u| (u, (d.left_limit(u) - d0) - (tp.left_limit(u) - t0)));
    let last = (hi, (d.value(hi) - d0) - (tp.value(hi) - t0));
    let (rhs, at) = step_sup(t, points.chain(std::iter::once(last)));
    Ok(FormulaResidual::new(lhs, rhs, in_tail(at, t, hi)))
}

/// Residuals of the tandem sum formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumFormulaResidual {
    /// `Σ Q_k(t_lo) = sup_{t>t_lo}[D_n(t) − (T₁⊗⋯⊗T_n)(t)]`.
    pub forward: FormulaResidual,
    /// `Σ Q_k(t_hi) = sup_{s≥0}[Ā(s) − (S̄_n⊗⋯⊗S̄₁)(s)]` on paths reversed
    /// about `t_hi`.
    pub reversed: FormulaResidual,
}

impl SumFormulaResidual {
    pub fn exact(&self) -> bool {
        self.forward.residual == 0.0 && self.reversed.residual == 0.0
    }

    pub fn truncated(&self) -> bool {
        self.forward.truncated || self.reversed.truncated
    }
}

fn sup_of_difference(x: &StepPath, y: &StepPath) -> Result<(f64, f64)> {
    let diff = x.sub(y)?;
    let (lo, _) = diff.window();
    let mut level = 0.0;
    let pts: Vec<(f64, f64)> = diff
        .jump_times()
        .iter()
        .zip(diff.jump_sizes())
        .map(|(&t, &s)| {
            level += s;
            (t, level)
        })
        .collect();
    Ok(step_sup(lo, pts))
}

pub fn queue_sum_formula_check(tandem: &TandemRecord) -> Result<SumFormulaResidual> {
    let (lo, hi) = tandem.window();
    let n = tandem.len();

    let t_paths: Vec<StepPath> = tandem.stages.iter().map(|s| s.t_process().clone()).collect();
    let chain = chain_inf(&t_paths)?;
    let (rhs, at) = sup_of_difference(tandem.output(), &chain)?;
    let forward = FormulaResidual::new(tandem.total_queue(n, lo), rhs, in_tail(at, lo, hi));

    let a_bar = tandem.arrivals().reversed()?;
    let s_bar: Vec<StepPath> = tandem.stages.iter().rev().map(|s| s.services().reversed()).collect::<Result<_>>()?;
    let chain = chain_inf(&s_bar)?;
    let (rhs, at) = sup_of_difference(&a_bar, &chain)?;
    let horizon = hi - lo;
    let reversed = FormulaResidual::new(tandem.total_queue(n, hi), rhs, in_tail(at, 0.0, horizon));
    Ok(SumFormulaResidual { forward, reversed })
}

/// On `{Q₁(t_lo) = ⋯ = Q_n(t_lo) = 0}`: `D_n = A ⊗ S₁ ⊗ ⋯ ⊗ S_n` and
/// `T_k = S_k ⊙ (A ⊗ S₁ ⊗ ⋯ ⊗ S_{k−1})`. The report value is the largest
/// discrepancy over all event times; runs with an occupied initial queue
/// are reported as skipped.
pub fn zero_queue_identities_check(theorem_id: &str, tandem: &TandemRecord) -> Result<TestReport> {
    if tandem.stages.iter().any(|s| s.initial_queue() > 0) {
        return Ok(TestReport::upper_bound(theorem_id, "zero_queue_identity_gap", 0.0, 0.0).with_note("skipped: occupied initial queue"));
    }
    let mut prefix = tandem.arrivals().clone();
    let mut worst: f64 = 0.0;
    let mut times: Vec<f64> = tandem.stages.iter().flat_map(|s| s.events().iter().map(|e| e.time)).collect();
    times.push(tandem.window().1);
    for stage in &tandem.stages {
        let t_expect = stage.services().sup_conv(&prefix)?;
        for &t in &times {
            worst = worst.max((stage.t_process().value(t) - t_expect.value(t)).abs());
        }
        prefix = prefix.inf_conv(stage.services())?;
    }
    for &t in &times {
        worst = worst.max((tandem.output().value(t) - prefix.value(t)).abs());
    }
    Ok(TestReport::upper_bound(theorem_id, "zero_queue_identity_gap", worst, 0.0))
}

/// Endpoint law at time `t` of `(A, S)` conditioned on `A ≤ S` throughout
/// `[0, t + pad]`, sampled by rejection, against the law of `Γ₂(A, S)(t)`
/// for unconditioned `A, S`. The report value is the total variation
/// distance between the two empirical joint pmfs.
#[allow(clippy::too_many_arguments)]
pub fn conditioned_pair_check(theorem_id: &str, lambda: f64, mu: f64, t: f64, pad: f64, samples: usize, seed: u64, threshold: f64) -> Result<TestReport> {
    if !(lambda > 0.0 && lambda < mu && mu.is_finite()) {
        return Err(Error::Unstable { lambda, mu });
    }
    if !(t > 0.0 && pad >= 0.0) || samples == 0 {
        return Err(Error::param("need t > 0, pad ≥ 0 and at least one sample"));
    }
    const CHUNK: usize = 20_000;
    let chunks = samples.div_ceil(CHUNK);
    let horizon = t + pad;
    let total = lambda + mu;
    let gap = rand_distr::Exp::new(total).map_err(|e| Error::param(e.to_string()))?;

    let conditioned: Vec<Vec<(u64, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = derive_stream(salted_seed(seed, "conditioned"), c as u64).rng();
            let m = CHUNK.min(samples - c * CHUNK);
            let mut out = Vec::with_capacity(m);
            while out.len() < m {
                let (mut a, mut s) = (0u64, 0u64);
                let mut at_t = None;
                let mut clock = 0.0;
                let accepted = loop {
                    clock += gap.sample(&mut rng);
                    if at_t.is_none() && clock > t {
                        at_t = Some((a, s));
                    }
                    if clock > horizon {
                        break true;
                    }
                    if rng.random::<f64>() * total < lambda {
                        a += 1;
                        if a > s {
                            break false;
                        }
                    } else {
                        s += 1;
                    }
                };
                if accepted {
                    out.push(at_t.expect("horizon ≥ t"));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let transformed: Vec<Vec<(u64, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = derive_stream(salted_seed(seed, "gamma2"), c as u64).rng();
            let m = CHUNK.min(samples - c * CHUNK);
            (0..m)
                .map(|_| {
                    let a = StepPath::counting(0.0, t, poisson_times(lambda, (0.0, t), &mut rng)?)?;
                    let s = StepPath::counting(0.0, t, poisson_times(mu, (0.0, t), &mut rng)?)?;
                    let g = gamma2(&a, &s)?;
                    let c = g.components();
                    Ok((c[0].terminal_value() as u64, c[1].terminal_value() as u64))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let p = empirical_pmf(conditioned.into_iter().flatten());
    let q = empirical_pmf(transformed.into_iter().flatten());
    Ok(TestReport::upper_bound(theorem_id, "tv_conditioned_pair_vs_gamma2", tv_distance_map(&p, &q), threshold)
        .with_seed(seed)
        .with_note(format!("conditioning horizon t + {pad}")))
}
