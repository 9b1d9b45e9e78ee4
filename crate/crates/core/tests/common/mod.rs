#![allow(dead_code)]

use qwalk_core::{CMatrix, Complex64, LatticeSpec};
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense real-symmetric coupled-mode matrix built straight from the couplings.
pub fn dense_hamiltonian(spec: &LatticeSpec) -> CMatrix {
    let n = spec.n_waveguides();
    let k = spec.couplings();
    CMatrix::from_fn(n, n, |r, col| {
        if col == r + 1 {
            c(k[r], 0.0)
        } else if r == col + 1 {
            c(k[col], 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// exp(iHz) by scaling and squaring of a truncated Taylor series.
pub fn expm_i(h: &CMatrix, z: f64) -> CMatrix {
    let n = h.rows();
    let norm: f64 = (0..n)
        .map(|r| h.row(r).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        * z.abs();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scale = z / 2f64.powi(squarings as i32);
    let a = h.scale(c(0.0, scale));
    let mut term = CMatrix::identity(n);
    let mut sum = CMatrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&a).scale(c(1.0 / k as f64, 0.0));
        for (s, t) in sum.as_mut_slice().iter_mut().zip(term.as_slice()) {
            *s += t;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

/// Haar-ish random unitary: Gram–Schmidt on a random complex matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
    }
    CMatrix::from_fn(n, n, |r, col| cols[col][r])
}

/// K = (‖Ψ‖²)² / ‖ΨΨ†‖²_F, which equals 1/Σp² without any eigenvalues.
pub fn schmidt_by_purity(psi: &CMatrix) -> f64 {
    let norm = psi.norm_sqr();
    let gram = psi.matmul(&psi.adjoint());
    norm * norm / gram.norm_sqr()
}

/// Finite-array down-conversion state from the ODE
/// dΨ/dL = e^{iΔL} S + iHΨ + iΨHᵀ, Ψ(0) = 0, S = diag(A), by classical RK4.
pub fn spdc_by_ode(spec: &LatticeSpec, pump: &[(i64, Complex64)], delta: f64, steps: usize) -> CMatrix {
    let n = spec.n_waveguides();
    let h = dense_hamiltonian(spec);
    let mut source = CMatrix::zeros(n, n);
    for &(label, a) in pump {
        let p = spec.position(label).unwrap();
        source[(p, p)] = a;
    }
    let rhs = |l: f64, psi: &CMatrix| -> CMatrix {
        let hp = h.matmul(psi);
        let ph = psi.matmul(&h.transpose());
        let f = Complex64::cis(delta * l);
        CMatrix::from_fn(n, n, |r, col| {
            f * source[(r, col)] + c(0.0, 1.0) * (hp[(r, col)] + ph[(r, col)])
        })
    };
    let axpy = |x: &CMatrix, k: &CMatrix, s: f64| {
        CMatrix::from_fn(n, n, |r, col| x[(r, col)] + k[(r, col)] * s)
    };
    let dl = spec.length() / steps as f64;
    let mut psi = CMatrix::zeros(n, n);
    for j in 0..steps {
        let l = j as f64 * dl;
        let k1 = rhs(l, &psi);
        let k2 = rhs(l + 0.5 * dl, &axpy(&psi, &k1, 0.5 * dl));
        let k3 = rhs(l + 0.5 * dl, &axpy(&psi, &k2, 0.5 * dl));
        let k4 = rhs(l + dl, &axpy(&psi, &k3, dl));
        psi = CMatrix::from_fn(n, n, |r, col| {
            psi[(r, col)]
                + (k1[(r, col)] + k2[(r, col)] * 2.0 + k3[(r, col)] * 2.0 + k4[(r, col)]) * (dl / 6.0)
        });
    }
    psi
}
