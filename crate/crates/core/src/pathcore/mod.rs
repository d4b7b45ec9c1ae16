//! Paths, the convolutions `⊗` (min-plus) and `⊙` (max-plus), and the
//! recursive transform `Γₙ` built from them.
//!
//! For paths `f, g` vanishing at the window start,
//!
//! ```text
//! (f ⊗ g)(t) = inf_{start ≤ s ≤ t} [f(s) + g(t) − g(s)]
//! (f ⊙ g)(t) = sup_{start ≤ s ≤ t} [f(s) + g(t) − g(s)]
//! ```
//!
//! Chains such as `f ⊗ g ⊗ h` always associate to the left.

mod functional;
mod grid;
mod io;
mod step;

pub use functional::{m_n_functional, nested_sup_oracle, NESTED_ORACLE_MAX_K, NESTED_ORACLE_MAX_N};
pub use grid::GridPath;
pub use step::StepPath;

use crate::error::{Error, Result};

/// Operations shared by exact step paths and grid-sampled paths.
pub trait Path: Clone + Sized {
    /// `self ⊗ other`.
    fn inf_conv(&self, other: &Self) -> Result<Self>;
    /// `self ⊙ other`.
    fn sup_conv(&self, other: &Self) -> Result<Self>;
    /// Pointwise sum.
    fn add(&self, other: &Self) -> Result<Self>;
    /// Pointwise difference.
    fn sub(&self, other: &Self) -> Result<Self>;
    /// True when both paths are defined on the same window or grid.
    fn same_domain(&self, other: &Self) -> bool;
}

/// An ordered list of paths over a common window or grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle<P> {
    components: Vec<P>,
}

impl<P: Path> PathBundle<P> {
    pub fn new(components: Vec<P>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::domain("a path bundle needs at least one component"));
        };
        if components.iter().any(|c| !first.same_domain(c)) {
            return Err(Error::domain("bundle components must share a window/grid"));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[P] {
        &self.components
    }

    pub fn into_components(self) -> Vec<P> {
        self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&P> {
        self.components.get(i)
    }

    /// Components in reverse index order.
    pub fn reversed(&self) -> Self {
        let mut components = self.components.clone();
        components.reverse();
        Self { components }
    }

    /// Pointwise sum of all components.
    pub fn sum(&self) -> Result<P> {
        let mut acc = self.components[0].clone();
        for c in &self.components[1..] {
            acc = acc.add(c)?;
        }
        Ok(acc)
    }
}

/// `f₁ ⊗ f₂ ⊗ ⋯ ⊗ fₙ`, folded left to right.
pub fn chain_inf<P: Path>(paths: &[P]) -> Result<P> {
    fold_chain(paths, P::inf_conv)
}

/// `f₁ ⊙ f₂ ⊙ ⋯ ⊙ fₙ`, folded left to right.
pub fn chain_sup<P: Path>(paths: &[P]) -> Result<P> {
    fold_chain(paths, P::sup_conv)
}

fn fold_chain<P: Path>(paths: &[P], op: impl Fn(&P, &P) -> Result<P>) -> Result<P> {
    let (first, rest) = paths
        .split_first()
        .ok_or_else(|| Error::domain("chain over an empty bundle"))?;
    rest.iter().try_fold(first.clone(), |acc, p| op(&acc, p))
}

/// `Γ₂(f, g) = (f ⊗ g, g ⊙ f)`.
pub fn gamma2<P: Path>(f: &P, g: &P) -> Result<PathBundle<P>> {
    if !f.same_domain(g) {
        return Err(Error::domain("gamma2 inputs must share a window/grid"));
    }
    Ok(PathBundle {
        components: vec![f.inf_conv(g)?, g.sup_conv(f)?],
    })
}

/// The transform `Γₙ`:
///
/// ```text
/// Γₖ(f₁,…,fₖ) = (f₁⊗⋯⊗fₖ, Γₖ₋₁(f₂⊙f₁, f₃⊙(f₁⊗f₂), …, fₖ⊙(f₁⊗⋯⊗fₖ₋₁)))
/// ```
///
/// with `Γ₁(f) = f`. Requires at least two components.
pub fn gamma_n<P: Path>(bundle: &PathBundle<P>) -> Result<PathBundle<P>> {
    if bundle.len() < 2 {
        return Err(Error::domain(format!(
            "gamma_n needs n >= 2 components, got {}",
            bundle.len()
        )));
    }
    let mut out = Vec::with_capacity(bundle.len());
    let mut current = bundle.components.clone();
    while current.len() > 1 {
        // prefix[i] = f₁ ⊗ ⋯ ⊗ f_{i+1}
        let mut prefix = Vec::with_capacity(current.len());
        prefix.push(current[0].clone());
        for f in &current[1..] {
            let next = prefix.last().expect("non-empty").inf_conv(f)?;
            prefix.push(next);
        }
        let next: Vec<P> = current[1..]
            .iter()
            .zip(&prefix)
            .map(|(f, pre)| f.sup_conv(pre))
            .collect::<Result<_>>()?;
        out.push(prefix.pop().expect("non-empty"));
        current = next;
    }
    out.push(current.pop().expect("one component left"));
    Ok(PathBundle { components: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(values: &[f64]) -> GridPath {
        GridPath::new(0.0, 1.0, values.to_vec()).unwrap()
    }

    #[test]
    fn empty_bundle_is_rejected() {
        assert!(PathBundle::<GridPath>::new(vec![]).is_err());
        assert!(chain_inf::<GridPath>(&[]).is_err());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = grid(&[0.0, 1.0]);
        let b = GridPath::new(0.0, 0.5, vec![0.0, 1.0]).unwrap();
        assert!(PathBundle::new(vec![a.clone(), b.clone()]).is_err());
        assert!(gamma2(&a, &b).is_err());
    }

    #[test]
    fn gamma_n_needs_two_components() {
        let b = PathBundle::new(vec![grid(&[0.0, 1.0])]).unwrap();
        assert!(gamma_n(&b).is_err());
    }

    #[test]
    fn gamma_n_with_two_components_is_gamma2() {
        let f = grid(&[0.0, 1.0, -1.0, 0.5]);
        let g = grid(&[0.0, -2.0, 0.0, 3.0]);
        let b = PathBundle::new(vec![f.clone(), g.clone()]).unwrap();
        assert_eq!(gamma_n(&b).unwrap(), gamma2(&f, &g).unwrap());
    }

    #[test]
    fn chains_of_one_and_two() {
        let f = grid(&[0.0, 1.0, -1.0]);
        let g = grid(&[0.0, 2.0, 2.5]);
        assert_eq!(chain_inf(&[f.clone()]).unwrap(), f);
        assert_eq!(chain_sup(&[f.clone()]).unwrap(), f);
        assert_eq!(chain_inf(&[f.clone(), g.clone()]).unwrap(), f.inf_conv(&g).unwrap());
        assert_eq!(chain_sup(&[f.clone(), g.clone()]).unwrap(), f.sup_conv(&g).unwrap());
    }

    #[test]
    fn gamma2_of_equal_paths() {
        let f = grid(&[0.0, 1.0, -1.0, 0.25]);
        let out = gamma2(&f, &f).unwrap();
        assert_eq!(out.components(), &[f.clone(), f]);
    }
}
