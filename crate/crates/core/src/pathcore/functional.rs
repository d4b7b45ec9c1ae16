use super::{GridPath, PathBundle};
use crate::error::{Error, Result};

pub const NESTED_ORACLE_MAX_N: usize = 4;
pub const NESTED_ORACLE_MAX_K: usize = 200;

/// The last-passage functional
///
/// ```text
/// Mₙ(t) = sup_{0 ≤ s₁ ≤ ⋯ ≤ s_{n−1} ≤ t} [Bₙ(0,s₁) + Bₙ₋₁(s₁,s₂) + ⋯ + B₁(s_{n−1},t)]
/// ```
///
/// with split points restricted to the grid. Computed in `O(nK)` by the
/// recurrence `V_k(t_j) = max(V_k(t_{j−1}) + ΔB_{n−k+1}(j), V_{k−1}(t_j))`.
pub fn m_n_functional(bundle: &PathBundle<GridPath>, t: f64) -> Result<f64> {
    let paths = bundle.components();
    let end = paths[0].index_at(t)?;
    let n = paths.len();
    // V_1 is B_n itself
    let mut row: Vec<f64> = paths[n - 1].values()[..=end].to_vec();
    for k in 2..=n {
        let b = &paths[n - k];
        let mut acc = row[0];
        for j in 1..=end {
            acc = (acc + b.increment(j)).max(row[j]);
            row[j] = acc;
        }
        row[0] = 0.0;
    }
    Ok(row[end])
}

/// Exhaustive enumeration of the split points defining [`m_n_functional`].
/// Test-only oracle: refuses `n > 4` or more than 200 grid points up to `t`.
pub fn nested_sup_oracle(bundle: &PathBundle<GridPath>, t: f64) -> Result<f64> {
    let paths = bundle.components();
    let end = paths[0].index_at(t)?;
    if paths.len() > NESTED_ORACLE_MAX_N || end + 1 > NESTED_ORACLE_MAX_K {
        return Err(Error::TooLarge(format!(
            "n = {}, K = {} (limits {NESTED_ORACLE_MAX_N}, {NESTED_ORACLE_MAX_K})",
            paths.len(),
            end + 1
        )));
    }
    // Walk the paths from B_n down to B_1; `from` is the previous split index.
    fn go(paths: &[GridPath], k: usize, from: usize, end: usize) -> f64 {
        let b = paths[k].values();
        if k == 0 {
            return b[end] - b[from];
        }
        (from..=end)
            .map(|s| b[s] - b[from] + go(paths, k - 1, s, end))
            .fold(f64::NEG_INFINITY, f64::max)
    }
    Ok(go(paths, paths.len() - 1, 0, end))
}
