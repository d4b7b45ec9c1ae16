use super::Path;
use crate::error::{Error, Result};

/// A path sampled on the uniform grid `t0, t0 + dt, …`, with value 0 at `t0`.
///
/// Operators on grid paths optimise over grid points only.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl GridPath {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(Error::domain(format!("grid needs finite t0 and dt > 0 (t0={t0}, dt={dt})")));
        }
        match values.first() {
            None => return Err(Error::domain("grid path has no values")),
            Some(&v) if v != 0.0 => {
                return Err(Error::domain(format!("grid path must start at 0, got {v}")))
            }
            _ => {}
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite grid value at index {bad}")));
        }
        Ok(Self { t0, dt, values })
    }

    /// The zero path with `steps + 1` grid points.
    pub fn zero(t0: f64, dt: f64, steps: usize) -> Result<Self> {
        Self::new(t0, dt, vec![0.0; steps + 1])
    }

    /// Build from increments; the path is their running sum from 0.
    pub fn from_increments(t0: f64, dt: f64, increments: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for dx in increments {
            acc += dx;
            values.push(acc);
        }
        Self::new(t0, dt, values)
    }

    pub(crate) fn from_raw(t0: f64, dt: f64, values: Vec<f64>) -> Self {
        debug_assert!(values.first() == Some(&0.0));
        Self { t0, dt, values }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of steps, i.e. `len() - 1`.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.steps())
    }

    /// Index of the last grid point at or before `t`.
    pub fn index_at(&self, t: f64) -> Result<usize> {
        let x = (t - self.t0) / self.dt;
        let tol = 1e-9 * (1.0 + x.abs());
        if !x.is_finite() || x < -tol || x > self.steps() as f64 + tol {
            return Err(Error::domain(format!(
                "time {t} outside grid [{}, {}]",
                self.t0,
                self.t_end()
            )));
        }
        Ok(((x + tol).floor() as usize).min(self.steps()))
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.index_at(t)?])
    }

    /// Increment over step `i` (from grid point `i - 1` to `i`).
    pub fn increment(&self, i: usize) -> f64 {
        self.values[i] - self.values[i - 1]
    }

    /// The path restricted to grid points `from..=to`, re-based to 0.
    pub fn window(&self, from: usize, to: usize) -> Result<Self> {
        if from > to || to > self.steps() {
            return Err(Error::domain(format!("window {from}..={to} outside 0..={}", self.steps())));
        }
        let base = self.values[from];
        let values = self.values[from..=to].iter().map(|v| v - base).collect();
        Ok(Self::from_raw(self.time(from), self.dt, values))
    }

    /// The same values on a grid starting at `t0`.
    pub fn with_t0(&self, t0: f64) -> Result<Self> {
        Self::new(t0, self.dt, self.values.clone())
    }

    /// Every `factor`-th grid point; the coarser grid has spacing `factor * dt`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::param("coarsening factor must be positive"));
        }
        let values = self.values.iter().step_by(factor).copied().collect();
        Ok(Self::from_raw(self.t0, self.dt * factor as f64, values))
    }

    /// Pointwise scaling.
    pub fn scale(&self, c: f64) -> Self {
        Self::from_raw(self.t0, self.dt, self.values.iter().map(|v| v * c).collect())
    }

    /// Largest `|self − other|` over the grid.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_domain(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    fn check_domain(&self, other: &Self) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "grid mismatch: (t0={}, dt={}, n={}) vs (t0={}, dt={}, n={})",
                self.t0,
                self.dt,
                self.len(),
                other.t0,
                other.dt,
                other.len()
            )))
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_domain(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self::from_raw(self.t0, self.dt, values))
    }

    // (f ∘ g)(t_j) = g(t_j) + ext_{i ≤ j} (f − g)(t_i), one pass. The s = t
    // term is re-applied exactly so rounding never breaks f ∘ f = f.
    fn convolve(&self, g: &Self, pick: fn(f64, f64) -> f64) -> Result<Self> {
        self.check_domain(g)?;
        let mut values = Vec::with_capacity(self.len());
        let mut ext = 0.0;
        for (&f, &gv) in self.values.iter().zip(&g.values) {
            ext = pick(ext, f - gv);
            values.push(pick(gv + ext, f));
        }
        Ok(Self::from_raw(self.t0, self.dt, values))
    }
}

impl Path for GridPath {
    fn inf_conv(&self, other: &Self) -> Result<Self> {
        self.convolve(other, f64::min)
    }

    fn sup_conv(&self, other: &Self) -> Result<Self> {
        self.convolve(other, f64::max)
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn same_domain(&self, other: &Self) -> bool {
        self.t0 == other.t0 && self.dt == other.dt && self.values.len() == other.values.len()
    }
}
