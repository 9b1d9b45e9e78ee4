//! Observables of a biphoton state: coincidence patterns, entanglement,
//! non-classicality witnesses and pattern similarity.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::hermitian_eigenvalues;
use crate::linear_walk::BiphotonState;
use crate::matrix::{Matrix, RMatrix};
use crate::{Error, Result};

/// Coincidence probabilities `Γ(n_s, n_i) = |Ψ(n_s, n_i)|²`, rows indexed by the signal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    values: RMatrix,
    origin: usize,
    total: f64,
}

impl CorrelationMatrix {
    /// Wraps a square matrix of non-negative entries with a positive sum.
    pub fn from_values(values: RMatrix, origin: usize) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::DimensionMismatch {
                expected: values.rows(),
                found: values.cols(),
            });
        }
        if origin >= values.rows().max(1) {
            return Err(Error::Domain(format!(
                "origin {origin} outside a {}x{} matrix",
                values.rows(),
                values.cols()
            )));
        }
        if values.as_slice().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain(
                "correlation entries must be finite and non-negative".into(),
            ));
        }
        let total = values.sum();
        if !(total > 0.0) {
            return Err(Error::ZeroState);
        }
        Ok(Self {
            values,
            origin,
            total,
        })
    }

    pub fn values(&self) -> &RMatrix {
        &self.values
    }

    pub fn into_values(self) -> RMatrix {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.rows()
    }

    /// Index of waveguide label 0.
    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn labels(&self) -> core::ops::RangeInclusive<i64> {
        let lo = -(self.origin as i64);
        lo..=lo + self.dim() as i64 - 1
    }

    /// Entry by waveguide labels; zero outside the window.
    pub fn get(&self, signal: i64, idler: i64) -> f64 {
        let pos = |n: i64| {
            let p = n + self.origin as i64;
            (p >= 0 && (p as usize) < self.dim()).then_some(p as usize)
        };
        match (pos(signal), pos(idler)) {
            (Some(s), Some(i)) => self.values[(s, i)],
            _ => 0.0,
        }
    }

    /// Entries divided by the total, so they sum to one.
    pub fn normalized(&self) -> Self {
        let inv = 1.0 / self.total;
        Self {
            values: self.values.map(|v| v * inv),
            origin: self.origin,
            total: 1.0,
        }
    }

    /// Signal marginal `I(n_s) = Σ_{n_i} Γ(n_s, n_i) / ΣΓ`.
    pub fn signal_marginal(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|r| self.values.row(r).iter().sum::<f64>() / self.total)
            .collect()
    }

    /// Idler marginal `Σ_{n_s} Γ(n_s, n_i) / ΣΓ`.
    pub fn idler_marginal(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim()];
        for r in 0..self.dim() {
            for (o, v) in out.iter_mut().zip(self.values.row(r)) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|v| *v /= self.total);
        out
    }
}

/// `Γ = |Ψ|²` of a non-zero state.
pub fn correlation(state: &BiphotonState) -> Result<CorrelationMatrix> {
    CorrelationMatrix::from_values(state.amplitudes().abs_sqr(), state.origin())
}

/// Squared Schmidt coefficients `p_i`, descending and summing to one: the
/// normalized eigenvalues of `ΨΨ†`, i.e. the squared singular values of `Ψ`.
pub fn schmidt_coefficients(state: &BiphotonState) -> Result<Vec<f64>> {
    let psi = state.amplitudes();
    if !(psi.norm_sqr() > 0.0) {
        return Err(Error::ZeroState);
    }
    let gram = psi.matmul(&psi.adjoint());
    let mut p: Vec<f64> = hermitian_eigenvalues(&gram)?
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= sum);
    p.sort_by(|a, b| b.total_cmp(a));
    Ok(p)
}

/// Schmidt number `K = 1 / Σ pᵢ²`; 1 for a product state, up to the dimension.
pub fn schmidt_number(state: &BiphotonState) -> Result<f64> {
    let p = schmidt_coefficients(state)?;
    Ok(1.0 / p.iter().map(|v| v * v).sum::<f64>())
}

/// Violations of the two classical bounds on a correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NonClassicalityReport {
    /// `max(⅔√(Γ_ss Γ_ii) − Γ_si, 0)`.
    pub i_b: RMatrix,
    /// `max(Γ_si − √(Γ_ss Γ_ii), 0)`.
    pub i_cs: RMatrix,
    pub i_b_total: f64,
    pub i_cs_total: f64,
}

/// Bromberg and Cauchy–Schwarz indicator matrices and their sums. Entries are in
/// the units of `corr`; normalize the matrix first for scale-free totals.
/// Diagonal entries are zero.
pub fn nonclassicality(corr: &CorrelationMatrix) -> NonClassicalityReport {
    let g = corr.values();
    let n = corr.dim();
    let geo = |s: usize, i: usize| libm::sqrt(g[(s, s)] * g[(i, i)]);
    let i_b = Matrix::from_fn(n, n, |s, i| {
        if s == i {
            0.0
        } else {
            (2.0 / 3.0 * geo(s, i) - g[(s, i)]).max(0.0)
        }
    });
    let i_cs = Matrix::from_fn(n, n, |s, i| {
        if s == i {
            0.0
        } else {
            (g[(s, i)] - geo(s, i)).max(0.0)
        }
    });
    NonClassicalityReport {
        i_b_total: i_b.sum(),
        i_cs_total: i_cs.sum(),
        i_b,
        i_cs,
    }
}

fn check_same_shape(a: &CorrelationMatrix, b: &CorrelationMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `S = (Σ √(Γ_gen Γ_tar))² / (ΣΓ_gen ΣΓ_tar)`, in `[0, 1]` and equal to 1 only
/// for proportional matrices.
pub fn similarity(generated: &CorrelationMatrix, target: &CorrelationMatrix) -> Result<f64> {
    check_same_shape(generated, target)?;
    let overlap: f64 = generated
        .values()
        .as_slice()
        .iter()
        .zip(target.values().as_slice())
        .map(|(g, t)| libm::sqrt(g * t))
        .sum();
    Ok((overlap * overlap / (generated.total() * target.total())).min(1.0))
}

/// Fidelity `|⟨T|Ψ⟩|²` maximized over a free phase on every basis component of
/// the target: `(Σ |Ψ̂(n_s,n_i)| |T̂(n_s,n_i)|)²` with both states normalized.
/// The target is given by its correlation matrix (`|T|²`).
pub fn best_fidelity(state: &BiphotonState, target: &CorrelationMatrix) -> Result<f64> {
    let gen = correlation(state)?;
    check_same_shape(&gen, target)?;
    similarity(&gen, target)
}

/// Multinomial draw of `total_counts` coincidences from the normalized `Γ`,
/// reproducible for a fixed `seed`.
pub fn sample_counts(
    corr: &CorrelationMatrix,
    total_counts: u64,
    seed: u64,
) -> Result<Matrix<u64>> {
    if total_counts == 0 {
        return Err(Error::Domain("total_counts must be at least 1".into()));
    }
    let cells = corr.values().as_slice();
    let mut cdf = Vec::with_capacity(cells.len());
    let mut acc = 0.0;
    for v in cells {
        acc += v;
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = corr.dim();
    let mut counts = Matrix::from_elem(n, n, 0u64);
    for _ in 0..total_counts {
        let u = rng.random::<f64>() * acc;
        // First cell whose cumulative weight exceeds u; zero-weight cells are never hit.
        let k = cdf.partition_point(|&c| c <= u).min(cells.len() - 1);
        counts.as_mut_slice()[k] += 1;
    }
    Ok(counts)
}
