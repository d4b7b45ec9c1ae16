use crate::error::{Error, Result};
use crate::pathcore::{gamma_n, GridPath, Path, PathBundle};

/// Discretisation of `log∫exp` integrals: cell width `dt`, evaluated with a
/// max-shifted log-sum-exp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogExpParams {
    dt: f64,
    stabilizer: bool,
}

impl LogExpParams {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param(format!("log-integral cell width must be positive, got {dt}")));
        }
        Ok(Self { dt, stabilizer: true })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Always true; kept so reports can state the convention.
    pub fn stabilizer(&self) -> bool {
        self.stabilizer
    }
}

/// `log(eᵃ + eᵇ)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// A function on the grid `t0, t0 + dt, …` for the `log∫exp` algebra.
///
/// Unlike [`GridPath`] the value at `t0` is arbitrary: a `log∫exp`
/// convolution evaluated at the first grid point is `log dt` plus the
/// integrand, not 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LogExpPath {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl LogExpPath {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(Error::domain(format!("grid needs finite t0 and dt > 0 (t0={t0}, dt={dt})")));
        }
        if values.is_empty() {
            return Err(Error::domain("log-integral path has no values"));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value at index {bad}")));
        }
        Ok(Self { t0, dt, values })
    }

    pub fn from_grid(p: &GridPath) -> Self {
        Self {
            t0: p.t0(),
            dt: p.dt(),
            values: p.values().to_vec(),
        }
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

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("non-empty by construction")
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    fn check_domain(&self, other: &Self) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::domain("log-integral paths live on different grids"))
        }
    }

    // h(t_j) = g(t_j) + σ log Σ_{i ≤ j} dt·exp(σ (f − g)(t_i)), σ = ±1.
    fn convolve(&self, g: &Self, sign: f64) -> Result<Self> {
        self.check_domain(g)?;
        let log_dt = self.dt.ln();
        let mut acc = f64::NEG_INFINITY;
        let values = self
            .values
            .iter()
            .zip(&g.values)
            .map(|(&f, &gv)| {
                acc = log_add_exp(acc, sign * (f - gv));
                gv + sign * (acc + log_dt)
            })
            .collect();
        Ok(Self {
            t0: self.t0,
            dt: self.dt,
            values,
        })
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_domain(other)?;
        Ok(Self {
            t0: self.t0,
            dt: self.dt,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect(),
        })
    }
}

impl Path for LogExpPath {
    /// `−log∫ exp(−[f(s) + g(t) − g(s)]) ds`.
    fn inf_conv(&self, other: &Self) -> Result<Self> {
        self.convolve(other, -1.0)
    }

    /// `log∫ exp(f(s) + g(t) − g(s)) ds`.
    fn sup_conv(&self, other: &Self) -> Result<Self> {
        self.convolve(other, 1.0)
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

/// `Πₙ`: the `Γₙ` recursion with `sup` replaced by `log∫exp` and `inf` by
/// `−log∫exp(−·)`. Integrals are Riemann sums over the cells `t_i ≤ t_j`.
pub fn pi_n_transform(bundle: &PathBundle<GridPath>, params: &LogExpParams) -> Result<PathBundle<LogExpPath>> {
    if let Some(p) = bundle.components().iter().find(|p| (p.dt() - params.dt()).abs() > 1e-12 * params.dt()) {
        return Err(Error::param(format!("grid step {} does not match dt = {}", p.dt(), params.dt())));
    }
    let lifted = PathBundle::new(bundle.components().iter().map(LogExpPath::from_grid).collect())?;
    gamma_n(&lifted)
}

/// `2M − X` with `2M(t) = log∫₀ᵗ e^{2X(s)} ds` as a left-endpoint sum, on
/// the grid points `t₁, …, t_K` (the integral vanishes at `t₀`).
pub fn matsumoto_yor_transform(x: &GridPath) -> Result<LogExpPath> {
    if x.steps() == 0 {
        return Err(Error::domain("Matsumoto-Yor transform needs at least one grid step"));
    }
    let log_dt = x.dt().ln();
    let v = x.values();
    let mut acc = f64::NEG_INFINITY;
    let mut out = Vec::with_capacity(x.steps());
    for j in 1..v.len() {
        acc = log_add_exp(acc, 2.0 * v[j - 1]);
        out.push(acc + log_dt - v[j]);
    }
    LogExpPath::new(x.t0() + x.dt(), x.dt(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathcore::chain_sup;
    use crate::sampler::{derive_stream, sample_brownian_grid};
    use proptest::prelude::*;

    fn lp(values: Vec<f64>, dt: f64) -> LogExpPath {
        LogExpPath::new(0.0, dt, values).unwrap()
    }

    #[test]
    fn log_add_exp_matches_direct_and_survives_overflow() {
        assert!((log_add_exp(1.0, 2.0) - (1f64.exp() + 2f64.exp()).ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
        assert!((log_add_exp(1000.0, 1000.0) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn constant_paths_give_log_of_elapsed_cells() {
        let dt = 0.01;
        let z = lp(vec![0.0; 101], dt);
        let up = z.sup_conv(&z).unwrap();
        let down = z.inf_conv(&z).unwrap();
        for j in 0..=100 {
            let expect = ((j + 1) as f64 * dt).ln();
            assert!((up.values()[j] - expect).abs() < 1e-12);
            assert!((down.values()[j] + expect).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_integrand_matches_geometric_sum() {
        let (dt, c) = (0.05, 0.7);
        let f = lp((0..60).map(|i| c * i as f64 * dt).collect(), dt);
        let z = lp(vec![0.0; 60], dt);
        let h = f.sup_conv(&z).unwrap();
        for (j, &v) in h.values().iter().enumerate() {
            let r = (c * dt).exp();
            let expect = (dt * (r.powi(j as i32 + 1) - 1.0) / (r - 1.0)).ln();
            assert!((v - expect).abs() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn pi_2_conserves_the_sum() {
        let dt = 1e-3;
        let mut rng = derive_stream(3, 0).rng();
        let f = sample_brownian_grid(0.0, dt, 2000, &mut rng).unwrap();
        let g = sample_brownian_grid(0.5, dt, 2000, &mut rng).unwrap();
        let b = PathBundle::new(vec![f.clone(), g.clone()]).unwrap();
        let out = pi_n_transform(&b, &LogExpParams::new(dt).unwrap()).unwrap();
        let s_in = LogExpPath::from_grid(&b.sum().unwrap());
        let s_out = out.sum().unwrap();
        for (a, b) in s_in.values().iter().zip(s_out.values()) {
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn pi_n_conserves_the_sum_for_larger_bundles() {
        let dt = 1e-2;
        let mut rng = derive_stream(4, 0).rng();
        let paths: Vec<_> = (0..5).map(|_| sample_brownian_grid(0.0, dt, 300, &mut rng).unwrap()).collect();
        let b = PathBundle::new(paths).unwrap();
        let out = pi_n_transform(&b, &LogExpParams::new(dt).unwrap()).unwrap();
        let s_in = LogExpPath::from_grid(&b.sum().unwrap());
        let s_out = out.sum().unwrap();
        for (a, b) in s_in.values().iter().zip(s_out.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn pi_n_rejects_mismatched_dt() {
        let b = PathBundle::new(vec![GridPath::zero(0.0, 0.1, 4).unwrap(); 2]).unwrap();
        assert!(pi_n_transform(&b, &LogExpParams::new(0.2).unwrap()).is_err());
        assert!(LogExpParams::new(0.0).is_err());
    }

    #[test]
    fn zero_temperature_limit_recovers_gamma_n() {
        let dt = 1e-2;
        let beta = 50.0;
        let mut rng = derive_stream(5, 0).rng();
        let paths: Vec<_> = (0..3).map(|_| sample_brownian_grid(0.0, dt, 100, &mut rng).unwrap()).collect();
        let b = PathBundle::new(paths.clone()).unwrap();
        let hot = PathBundle::new(paths.iter().map(|p| p.scale(beta)).collect()).unwrap();
        let pi = pi_n_transform(&hot, &LogExpParams::new(dt).unwrap()).unwrap();
        let gamma = gamma_n(&b).unwrap();
        // Each of at most three nested integrals moves the value by at most
        // (log(#cells) + |log dt|)/β.
        let bound = 3.0 * ((101f64).ln() + dt.ln().abs()) / beta;
        for (p, g) in pi.components().iter().zip(gamma.components()) {
            for (pv, gv) in p.values().iter().zip(g.values()) {
                assert!((pv / beta - gv).abs() <= bound, "{} vs {}", pv / beta, gv);
            }
        }
    }

    #[test]
    fn sup_chain_scaled_is_bounded_by_max_plus_chain() {
        // log Σ dt e^{β h} ≤ β max h + log(K dt), so each level can only
        // exceed the max-plus value by log(K·dt)/β.
        let dt = 0.05;
        let mut rng = derive_stream(6, 0).rng();
        let paths: Vec<_> = (0..4).map(|_| sample_brownian_grid(0.0, dt, 40, &mut rng).unwrap()).collect();
        let beta = 2.0;
        let lifted: Vec<_> = paths.iter().map(|p| LogExpPath::from_grid(&p.scale(beta))).collect();
        let le = chain_sup(&lifted).unwrap();
        let mp = chain_sup(&paths).unwrap();
        let slack = 3.0 * (41.0 * dt).ln().max(0.0) / beta;
        for (l, m) in le.values().iter().zip(mp.values()) {
            assert!(l / beta <= m + slack + 1e-12);
        }
    }

    #[test]
    fn matsumoto_yor_of_zero_is_log_t() {
        let x = GridPath::zero(0.0, 0.01, 500).unwrap();
        let y = matsumoto_yor_transform(&x).unwrap();
        assert_eq!(y.len(), 500);
        for (j, v) in y.values().iter().enumerate() {
            assert!((v - y.time(j).ln()).abs() < 1e-12);
        }
        assert!(matsumoto_yor_transform(&GridPath::zero(0.0, 0.1, 0).unwrap()).is_err());
    }

    #[test]
    fn matsumoto_yor_refines_consistently() {
        // Nested grids: the value at t = 1 converges as dt shrinks.
        let mut rng = derive_stream(7, 0).rng();
        let fine = sample_brownian_grid(0.3, 1.0 / 4096.0, 4096, &mut rng).unwrap();
        let at_one = |f: usize| {
            let p = fine.coarsen(f).unwrap();
            matsumoto_yor_transform(&p).unwrap().last()
        };
        let errs: Vec<f64> = [64, 16, 4].iter().map(|&f| (at_one(f) - at_one(1)).abs()).collect();
        assert!(errs[2] < errs[0], "{errs:?}");
        assert!(errs[2] < 0.05, "{errs:?}");
    }

    #[test]
    fn matsumoto_yor_running_integral_is_nondecreasing() {
        let mut rng = derive_stream(8, 0).rng();
        let x = sample_brownian_grid(-0.5, 0.01, 1000, &mut rng).unwrap();
        let y = matsumoto_yor_transform(&x).unwrap();
        let two_m: Vec<f64> = y.values().iter().zip(&x.values()[1..]).map(|(v, xv)| v + xv).collect();
        assert!(two_m.windows(2).all(|w| w[1] >= w[0]));
    }

    proptest! {
        #[test]
        fn sup_conv_is_monotone_in_f_and_in_increments_of_g(
            f in prop::collection::vec(-3.0f64..3.0, 12),
            g in prop::collection::vec(-3.0f64..3.0, 12),
            bump in 0.0f64..2.0,
            at in 0usize..12,
        ) {
            let f = lp(f, 0.1);
            let g = lp(g, 0.1);
            let base_up = f.sup_conv(&g).unwrap();
            let base_dn = f.inf_conv(&g).unwrap();
            let mut fv = f.values().to_vec();
            fv[at] += bump;
            let f2 = lp(fv, 0.1);
            let mut gv = g.values().to_vec();
            for v in &mut gv[at..] {
                *v += bump;
            }
            let g2 = lp(gv, 0.1);
            for other in [f2.sup_conv(&g).unwrap(), f.sup_conv(&g2).unwrap()] {
                for (a, b) in base_up.values().iter().zip(other.values()) {
                    prop_assert!(*b >= *a - 1e-12);
                }
            }
            for other in [f2.inf_conv(&g).unwrap(), f.inf_conv(&g2).unwrap()] {
                for (a, b) in base_dn.values().iter().zip(other.values()) {
                    prop_assert!(*b >= *a - 1e-12);
                }
            }
        }
    }
}
