//! Dense Hermitian eigensolver: Householder reduction to complex
//! tridiagonal form, a diagonal phase change to a real symmetric
//! tridiagonal, then implicit-shift QL.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sampler::HermitianMatrix;

/// QL sweeps allowed per eigenvalue, scaled by the dimension.
pub const ITERATIONS_PER_EIGENVALUE: usize = 30;

struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<Complex64>,
    // accumulated reflectors, row-major, when eigenvectors are wanted
    basis: Option<Vec<Complex64>>,
}

fn tridiagonalize(h: &HermitianMatrix, want_basis: bool) -> Tridiagonal {
    let n = h.dim();
    let mut a = h.entries().to_vec();
    let zero = Complex64::new(0.0, 0.0);
    let mut basis = want_basis.then(|| {
        let mut q = vec![zero; n * n];
        for i in 0..n {
            q[i * n + i] = Complex64::new(1.0, 0.0);
        }
        q
    });
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let norm = ((k + 1)..n).map(|i| a[i * n + k].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1) * n + k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        v.iter_mut().for_each(|z| *z = zero);
        for i in (k + 1)..n {
            v[i] = a[i * n + k];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;
        // A ← H A H with H = I − τ v v*, as A − v w* − w v*
        for i in 0..n {
            let mut s = zero;
            for j in (k + 1)..n {
                s += a[i * n + j] * v[j];
            }
            p[i] = s * tau;
        }
        let kk: Complex64 = (k + 1..n).map(|i| v[i].conj() * p[i]).sum::<Complex64>() * (0.5 * tau);
        let w: Vec<Complex64> = (0..n).map(|i| p[i] - kk * v[i]).collect();
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] -= v[i] * w[j].conj() + w[i] * v[j].conj();
            }
        }
        for i in (k + 2)..n {
            a[i * n + k] = zero;
            a[k * n + i] = zero;
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
        if let Some(q) = basis.as_mut() {
            // Q ← Q H
            for r in 0..n {
                let s: Complex64 = ((k + 1)..n).map(|j| q[r * n + j] * v[j]).sum();
                for j in (k + 1)..n {
                    q[r * n + j] -= s * tau * v[j].conj();
                }
            }
        }
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    let off = (0..n.saturating_sub(1)).map(|i| a[(i + 1) * n + i]).collect();
    Tridiagonal { diag, off, basis }
}

// Implicit-shift QL on a real symmetric tridiagonal; `e[i]` couples `d[i]`
// and `d[i + 1]`, `e[n − 1]` is scratch. Rotations are applied to the
// columns of `z` (n × n, row-major) when given.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    let cap = ITERATIONS_PER_EIGENVALUE * n.max(1);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > cap {
                return Err(Error::Numeric(format!("QL iteration cap {cap} exceeded at eigenvalue {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Sorted eigenvalues of a Hermitian matrix.
pub(crate) fn hermitian_eigenvalues(h: &HermitianMatrix) -> Result<Vec<f64>> {
    let t = tridiagonalize(h, false);
    let mut d = t.diag;
    let mut e: Vec<f64> = t.off.iter().map(|z| z.norm()).collect();
    e.push(0.0);
    tql(&mut d, &mut e, None)?;
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite eigenvalue".into()));
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues with unit eigenvectors (column `j` of the row-major result
/// belongs to eigenvalue `j`).
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn hermitian_eigen(h: &HermitianMatrix) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let n = h.dim();
    let t = tridiagonalize(h, true);
    let mut d = t.diag;
    let mut e: Vec<f64> = t.off.iter().map(|z| z.norm()).collect();
    e.push(0.0);
    // T = P R P* with P = diag(phases), R real
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let u = t.off[k];
        phases[k + 1] = if u.norm() > 0.0 { phases[k] * (u / u.norm()) } else { phases[k] };
    }
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql(&mut d, &mut e, Some(&mut z))?;
    let q = t.basis.expect("basis requested");
    // vectors = Q P Z
    let mut vecs = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += q[r * n + k] * phases[k] * z[k * n + c];
            }
            vecs[r * n + c] = s;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut sorted = vec![Complex64::new(0.0, 0.0); n * n];
    for (new_c, &old_c) in order.iter().enumerate() {
        for r in 0..n {
            sorted[r * n + new_c] = vecs[r * n + old_c];
        }
    }
    Ok((values, sorted))
}
