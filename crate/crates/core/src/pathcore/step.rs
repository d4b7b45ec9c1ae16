use super::Path;
use crate::error::{Error, Result};

/// A right-continuous piecewise-constant path on `[t_lo, t_hi]`, stored as
/// its jumps. The value at `t_lo` is 0; every jump time lies in `(t_lo, t_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    t_lo: f64,
    t_hi: f64,
    times: Vec<f64>,
    sizes: Vec<f64>,
    // levels[i] = value just after the i-th jump
    levels: Vec<f64>,
}

impl StepPath {
    pub fn new(t_lo: f64, t_hi: f64, times: Vec<f64>, sizes: Vec<f64>) -> Result<Self> {
        if !(t_lo.is_finite() && t_hi.is_finite() && t_lo <= t_hi) {
            return Err(Error::domain(format!("bad window [{t_lo}, {t_hi}]")));
        }
        if times.len() != sizes.len() {
            return Err(Error::domain("jump times and sizes differ in length"));
        }
        if times.iter().any(|&t| !(t > t_lo && t <= t_hi)) {
            return Err(Error::domain(format!("jump time outside ({t_lo}, {t_hi}]")));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("jump times must be strictly increasing"));
        }
        if sizes.iter().any(|s| !s.is_finite()) {
            return Err(Error::domain("non-finite jump size"));
        }
        Ok(Self::from_raw(t_lo, t_hi, times, sizes))
    }

    /// A counting path with a unit jump at each of `times`.
    pub fn counting(t_lo: f64, t_hi: f64, times: Vec<f64>) -> Result<Self> {
        let sizes = vec![1.0; times.len()];
        Self::new(t_lo, t_hi, times, sizes)
    }

    pub fn empty(t_lo: f64, t_hi: f64) -> Result<Self> {
        Self::new(t_lo, t_hi, Vec::new(), Vec::new())
    }

    fn from_raw(t_lo: f64, t_hi: f64, times: Vec<f64>, sizes: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let levels = sizes
            .iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect();
        Self { t_lo, t_hi, times, sizes, levels }
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_lo, self.t_hi)
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.times
    }

    pub fn jump_sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn num_jumps(&self) -> usize {
        self.times.len()
    }

    /// Value after all jumps, i.e. the value at `t_hi`.
    pub fn terminal_value(&self) -> f64 {
        self.levels.last().copied().unwrap_or(0.0)
    }

    /// Value at `t` (right-continuous). Times before the window give 0 and
    /// times past it give the terminal value.
    pub fn value(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            0.0
        } else {
            self.levels[k - 1]
        }
    }

    /// Left limit at `t`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            0.0
        } else {
            self.levels[k - 1]
        }
    }

    /// Increment over the half-open interval `(s, t]`.
    pub fn increment(&self, s: f64, t: f64) -> f64 {
        self.value(t) - self.value(s)
    }

    /// Gaps between consecutive jumps, the first measured from `t_lo`.
    pub fn gaps(&self) -> Vec<f64> {
        let mut prev = self.t_lo;
        self.times
            .iter()
            .map(|&t| {
                let g = t - prev;
                prev = t;
                g
            })
            .collect()
    }

    /// Time reversal about `t_hi`: the reversed path on `[0, t_hi − t_lo]`
    /// has `X̄(s) = X[t_hi − s, t_hi)`, i.e. a jump at `t_hi − τ` for every
    /// original jump at `τ`.
    pub fn reversed(&self) -> Result<Self> {
        if self.times.last() == Some(&self.t_hi) {
            return Err(Error::domain("cannot reverse a path with a jump at the window end"));
        }
        let times = self.times.iter().rev().map(|&t| self.t_hi - t).collect();
        let sizes = self.sizes.iter().rev().copied().collect();
        Ok(Self::from_raw(0.0, self.t_hi - self.t_lo, times, sizes))
    }

    /// The path restricted to `[t_lo, t]`.
    pub fn truncate(&self, t: f64) -> Result<Self> {
        if !(t >= self.t_lo && t <= self.t_hi) {
            return Err(Error::domain(format!("truncation time {t} outside window")));
        }
        let k = self.times.partition_point(|&s| s <= t);
        Ok(Self::from_raw(self.t_lo, t, self.times[..k].to_vec(), self.sizes[..k].to_vec()))
    }

    /// Sorted union of the jump times of both paths.
    pub fn merged_times(&self, other: &Self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.times.len() + other.times.len());
        let (mut i, mut j) = (0, 0);
        while i < self.times.len() || j < other.times.len() {
            let next = match (self.times.get(i), other.times.get(j)) {
                (Some(&a), Some(&b)) if a < b => {
                    i += 1;
                    a
                }
                (Some(&a), Some(&b)) if b < a => {
                    j += 1;
                    b
                }
                (Some(&a), Some(_)) => {
                    i += 1;
                    j += 1;
                    a
                }
                (Some(&a), None) => {
                    i += 1;
                    a
                }
                (None, Some(&b)) => {
                    j += 1;
                    b
                }
                (None, None) => unreachable!(),
            };
            out.push(next);
        }
        out
    }

    fn check_domain(&self, other: &Self) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "window mismatch: [{}, {}] vs [{}, {}]",
                self.t_lo, self.t_hi, other.t_lo, other.t_hi
            )))
        }
    }

    // Walks the merged event sequence, yielding (time, self value, other value).
    fn walk<F: FnMut(f64, f64, f64)>(&self, other: &Self, mut visit: F) {
        let (mut i, mut j) = (0, 0);
        let (mut a, mut b) = (0.0, 0.0);
        while i < self.times.len() || j < other.times.len() {
            let ta = self.times.get(i).copied().unwrap_or(f64::INFINITY);
            let tb = other.times.get(j).copied().unwrap_or(f64::INFINITY);
            let t = ta.min(tb);
            if ta == t {
                a = self.levels[i];
                i += 1;
            }
            if tb == t {
                b = other.levels[j];
                j += 1;
            }
            visit(t, a, b);
        }
    }

    fn from_levels(t_lo: f64, t_hi: f64, points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut times = Vec::new();
        let mut sizes = Vec::new();
        let mut prev = 0.0;
        for (t, level) in points {
            let jump = level - prev;
            if jump != 0.0 {
                times.push(t);
                sizes.push(jump);
            }
            prev = level;
        }
        Self::from_raw(t_lo, t_hi, times, sizes)
    }

    // (f ∘ g)(t) = g(t) + ext_{s ≤ t}(f − g)(s). The extremum of a cadlag step
    // function over [t_lo, t] is attained at t_lo, a jump time, or a left limit;
    // a left limit equals the value after the preceding jump, so folding over
    // post-jump values covers every candidate.
    fn convolve(&self, g: &Self, pick: fn(f64, f64) -> f64) -> Result<Self> {
        self.check_domain(g)?;
        let mut ext = 0.0;
        let mut points = Vec::with_capacity(g.times.len());
        self.walk(g, |t, fv, gv| {
            ext = pick(ext, fv - gv);
            points.push((t, pick(gv + ext, fv)));
        });
        Ok(Self::from_levels(self.t_lo, self.t_hi, points))
    }

    fn combine(&self, other: &Self, op: fn(f64, f64) -> f64) -> Result<Self> {
        self.check_domain(other)?;
        let mut points = Vec::with_capacity(self.times.len() + other.times.len());
        self.walk(other, |t, a, b| points.push((t, op(a, b))));
        Ok(Self::from_levels(self.t_lo, self.t_hi, points))
    }
}

impl Path for StepPath {
    fn inf_conv(&self, other: &Self) -> Result<Self> {
        self.convolve(other, f64::min)
    }

    fn sup_conv(&self, other: &Self) -> Result<Self> {
        self.convolve(other, f64::max)
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    fn same_domain(&self, other: &Self) -> bool {
        self.t_lo == other.t_lo && self.t_hi == other.t_hi
    }
}
