//! Eigensolvers for the two matrix shapes this crate meets.
//!
//! * Real symmetric tridiagonal: the coupled-mode Hamiltonian. Implicit QL with
//!   Wilkinson-style shifts, optionally accumulating eigenvectors.
//! * Hermitian dense: `ΨΨ†`, whose eigenvalues are the squared Schmidt
//!   coefficients. Householder reduction to a tridiagonal with complex
//!   off-diagonals, whose moduli give a real tridiagonal with the same spectrum.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::matrix::{CMatrix, RMatrix};
use crate::{Error, Result};

const MAX_QL_ITERATIONS: usize = 64;

/// Eigenvalues (ascending) and orthonormal eigenvectors (as columns) of a real
/// symmetric tridiagonal matrix with diagonal `diag` and super-diagonal `off`.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, RMatrix)> {
    let n = diag.len();
    check_tridiagonal(n, off)?;
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = RMatrix::identity(n);
    tql(&mut d, &mut e, Some(&mut z))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = RMatrix::from_fn(n, n, |r, c| z[(r, order[c])]);
    Ok((values, vectors))
}

/// Eigenvalues only, ascending.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    check_tridiagonal(diag.len(), off)?;
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    tql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues (ascending) of a Hermitian matrix. Only the lower triangle is read.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: h.cols(),
        });
    }
    let n = h.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = h.clone();
    for r in 0..n {
        for c in (r + 1)..n {
            a[(r, c)] = a[(c, r)].conj();
        }
    }

    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut p = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let start = k + 1;
        let norm = libm::sqrt((start..n).map(|r| a[(r, k)].norm_sqr()).sum::<f64>());
        if norm == 0.0 {
            off[k] = 0.0;
            continue;
        }
        let x0 = a[(start, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        // Reflect x onto alpha·e₁ with alpha = −phase·‖x‖ (no cancellation).
        let alpha = -phase * norm;
        for r in start..n {
            v[r] = a[(r, k)];
        }
        v[start] -= alpha;
        let vnorm = libm::sqrt((start..n).map(|r| v[r].norm_sqr()).sum::<f64>());
        if vnorm == 0.0 {
            off[k] = norm;
            continue;
        }
        for r in start..n {
            v[r] /= vnorm;
        }
        // Trailing block B ← (I − 2vv†) B (I − 2vv†) = B − 2 v w† − 2 w v†,
        // with p = Bv and w = p − (v†p) v.
        for r in start..n {
            p[r] = (start..n).map(|c| a[(r, c)] * v[c]).sum();
        }
        let vp: Complex64 = (start..n).map(|r| v[r].conj() * p[r]).sum();
        for r in start..n {
            p[r] -= vp * v[r];
        }
        for r in start..n {
            for c in start..n {
                let delta = v[r] * p[c].conj() + p[r] * v[c].conj();
                a[(r, c)] -= delta * 2.0;
            }
        }
        off[k] = alpha.norm();
        a[(start, k)] = alpha;
        for r in (start + 1)..n {
            a[(r, k)] = Complex64::new(0.0, 0.0);
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    symmetric_tridiagonal_eigenvalues(&diag, &off)
}

fn check_tridiagonal(n: usize, off: &[f64]) -> Result<()> {
    if off.len() + 1 != n && !(n == 0 && off.is_empty()) {
        return Err(Error::DimensionMismatch {
            expected: n.saturating_sub(1),
            found: off.len(),
        });
    }
    if !off.iter().all(|x| x.is_finite()) {
        return Err(Error::Eigen("non-finite off-diagonal entry".into()));
    }
    Ok(())
}

/// Implicit QL on a symmetric tridiagonal matrix. `e[i]` couples `i` and `i+1`
/// and `e[n-1]` must be zero on entry. Eigenvalues are left in `d`.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut RMatrix>) -> Result<()> {
    let n = d.len();
    // Deflate below ε·max|d|+|e| as well as relative to the neighbours.
    let norm = (0..n).fold(0.0f64, |acc, i| acc.max(libm::fabs(d[i]) + libm::fabs(e[i])));
    let floor = f64::EPSILON * norm;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = libm::fabs(d[m]) + libm::fabs(d[m + 1]);
                if libm::fabs(e[m]) <= f64::EPSILON * dd || libm::fabs(e[m]) <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::Eigen(format!(
                    "QL iteration did not converge for eigenvalue {l}"
                )));
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
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
                        let zk1 = z[(k, i + 1)];
                        let zk = z[(k, i)];
                        z[(k, i + 1)] = s * zk + c * zk1;
                        z[(k, i)] = c * zk - s * zk1;
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
