//! Waveguide-array model and single-photon propagators.

use alloc::format;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use num_complex::Complex64;

use crate::bessel::bessel_j;
use crate::linalg::symmetric_tridiagonal_eigen;
use crate::matrix::{CMatrix, RMatrix};
use crate::{Error, Result};

/// Relative tolerance under which two couplings count as equal.
pub const UNIFORM_RTOL: f64 = 1e-12;

/// Extra waveguides kept on each side of the ballistic front `2CL` when the
/// infinite array is truncated.
pub const INFINITE_MARGIN: usize = 20;

/// A one-dimensional array of identical waveguides with nearest-neighbour
/// couplings.
///
/// `couplings[k]` couples array positions `k` and `k + 1`. Waveguides are labelled
/// by signed indices centred on the array: position `p` has label
/// `p - origin` with `origin = (N - 1) / 2`, so an odd array runs `-n̄..=n̄`
/// (and a two-waveguide coupler is labelled `0, 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    couplings: Vec<f64>,
    length: f64,
}

impl LatticeSpec {
    pub fn new(n_waveguides: usize, couplings: Vec<f64>, length: f64) -> Result<Self> {
        if n_waveguides == 0 {
            return Err(Error::Config("a lattice needs at least one waveguide".into()));
        }
        if couplings.len() + 1 != n_waveguides {
            return Err(Error::Config(format!(
                "{n_waveguides} waveguides need {} couplings, got {}",
                n_waveguides - 1,
                couplings.len()
            )));
        }
        if let Some((k, c)) = couplings
            .iter()
            .enumerate()
            .find(|(_, c)| !(c.is_finite() && **c > 0.0))
        {
            return Err(Error::Config(format!(
                "coupling {k} must be positive and finite, got {c}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Config(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        Ok(Self { couplings, length })
    }

    pub fn uniform(n_waveguides: usize, coupling: f64, length: f64) -> Result<Self> {
        Self::new(
            n_waveguides,
            alloc::vec![coupling; n_waveguides.saturating_sub(1)],
            length,
        )
    }

    /// Mirror-symmetric array of `2m + 1` waveguides from couplings listed from the
    /// centre outward: `inner_to_outer[0]` couples the centre to its neighbours.
    pub fn symmetric(inner_to_outer: &[f64], length: f64) -> Result<Self> {
        let mut couplings: Vec<f64> = inner_to_outer.iter().rev().copied().collect();
        couplings.extend_from_slice(inner_to_outer);
        Self::new(couplings.len() + 1, couplings, length)
    }

    pub fn n_waveguides(&self) -> usize {
        self.couplings.len() + 1
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Array position of waveguide label 0.
    pub fn origin(&self) -> usize {
        (self.n_waveguides() - 1) / 2
    }

    /// Signed labels of the first and last waveguides.
    pub fn labels(&self) -> RangeInclusive<i64> {
        let o = self.origin() as i64;
        -o..=(self.n_waveguides() as i64 - 1 - o)
    }

    /// Array position of a signed label, if it lies inside the array.
    pub fn position(&self, label: i64) -> Option<usize> {
        self.labels()
            .contains(&label)
            .then(|| (label + self.origin() as i64) as usize)
    }

    pub fn is_uniform(&self) -> bool {
        match self.couplings.first() {
            None => true,
            Some(&c0) => self
                .couplings
                .iter()
                .all(|&c| libm::fabs(c - c0) <= UNIFORM_RTOL * libm::fmax(c, c0)),
        }
    }

    /// The common coupling of a uniform array.
    pub fn uniform_coupling(&self) -> Option<f64> {
        if self.is_uniform() {
            self.couplings.first().copied()
        } else {
            None
        }
    }

    pub fn mean_coupling(&self) -> f64 {
        if self.couplings.is_empty() {
            0.0
        } else {
            self.couplings.iter().sum::<f64>() / self.couplings.len() as f64
        }
    }

    pub fn max_coupling(&self) -> f64 {
        self.couplings.iter().copied().fold(0.0, f64::max)
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(self.n_waveguides(), self.couplings.clone(), length)
    }

    /// The same array seen from the other end.
    pub fn mirrored(&self) -> Self {
        Self {
            couplings: self.couplings.iter().rev().copied().collect(),
            length: self.length,
        }
    }

    /// Half-width of the window used to truncate an infinite uniform array of
    /// this coupling and length: `ceil(2CL) + 20`.
    pub fn infinite_window(coupling: f64, length: f64) -> usize {
        libm::ceil(2.0 * coupling * length) as usize + INFINITE_MARGIN
    }
}

/// Coupled-mode Hamiltonian: zero diagonal, `H[k][k+1] = H[k+1][k] = couplings[k]`.
///
/// The common propagation constant of identical waveguides only contributes a
/// global phase and is left out.
pub fn hamiltonian(spec: &LatticeSpec) -> RMatrix {
    let n = spec.n_waveguides();
    let mut h = RMatrix::zeros(n, n);
    for (k, &c) in spec.couplings().iter().enumerate() {
        h[(k, k + 1)] = c;
        h[(k + 1, k)] = c;
    }
    h
}

/// Single-photon propagator `U(z) = exp(+iHz)` at a given distance.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    matrix: CMatrix,
    z: f64,
}

impl Propagator {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// `max |U†U − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.matrix.rows();
        self.matrix
            .adjoint()
            .matmul(&self.matrix)
            .max_abs_diff(&CMatrix::identity(n))
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// Normal modes of a lattice: eigenvalues and real orthonormal eigenvectors of its
/// Hamiltonian. Building one is the expensive step; propagators at any distance
/// follow cheaply.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModes {
    eigenvalues: Vec<f64>,
    eigenvectors: RMatrix,
}

impl LatticeModes {
    pub fn new(spec: &LatticeSpec) -> Result<Self> {
        let diag = alloc::vec![0.0; spec.n_waveguides()];
        let (eigenvalues, eigenvectors) = symmetric_tridiagonal_eigen(&diag, spec.couplings())?;
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &RMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn propagator(&self, z: f64) -> Result<Propagator> {
        check_distance(z)?;
        let n = self.dim();
        let v = &self.eigenvectors;
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::cis(l * z))
            .collect();
        let matrix = CMatrix::from_fn(n, n, |r, c| {
            (0..n)
                .map(|m| phases[m] * (v[(r, m)] * v[(c, m)]))
                .sum()
        });
        Ok(Propagator { matrix, z })
    }

    /// Column `position` of `U(z)`, i.e. the amplitudes after injecting a single
    /// photon at that array position. Writes into `out` (length `dim`).
    pub fn column_into(&self, z: f64, position: usize, out: &mut [Complex64]) {
        let n = self.dim();
        let v = &self.eigenvectors;
        for o in out.iter_mut() {
            *o = Complex64::new(0.0, 0.0);
        }
        for m in 0..n {
            let weight = Complex64::cis(self.eigenvalues[m] * z) * v[(position, m)];
            for (r, o) in out.iter_mut().enumerate() {
                *o += weight * v[(r, m)];
            }
        }
    }
}

/// `U(z) = exp(+iHz)` for a finite array.
pub fn propagator(spec: &LatticeSpec, z: f64) -> Result<Propagator> {
    check_distance(z)?;
    LatticeModes::new(spec)?.propagator(z)
}

fn check_distance(z: f64) -> Result<()> {
    if z.is_finite() && z >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "propagation distance must be finite and non-negative, got {z}"
        )))
    }
}

/// `iⁿ` for a signed integer exponent.
#[inline]
pub(crate) fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Amplitude `iⁿ Jₙ(2Cz)` in waveguide `n` of an infinite uniform array after a
/// photon was injected in waveguide 0.
pub fn single_photon_amplitude_infinite(n: i32, coupling: f64, z: f64) -> Complex64 {
    i_pow(n as i64) * bessel_j(n, 2.0 * coupling * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;

    #[test]
    fn rejects_bad_specs() {
        assert!(LatticeSpec::new(0, alloc::vec![], 1.0).is_err());
        assert!(LatticeSpec::new(3, alloc::vec![1.0], 1.0).is_err());
        assert!(LatticeSpec::new(3, alloc::vec![1.0, -1.0], 1.0).is_err());
        assert!(LatticeSpec::new(3, alloc::vec![1.0, f64::NAN], 1.0).is_err());
        assert!(LatticeSpec::new(3, alloc::vec![1.0, 1.0], 0.0).is_err());
        assert!(LatticeSpec::uniform(1, 1.0, 1.0).is_ok());
    }

    #[test]
    fn centred_labels() {
        let spec = LatticeSpec::uniform(9, 1.0, 1.0).unwrap();
        assert_eq!(spec.labels(), -4..=4);
        assert_eq!(spec.position(-4), Some(0));
        assert_eq!(spec.position(0), Some(4));
        assert_eq!(spec.position(5), None);
        let pair = LatticeSpec::uniform(2, 1.0, 1.0).unwrap();
        assert_eq!(pair.labels(), 0..=1);
    }

    #[test]
    fn uniformity_tolerance() {
        let almost = LatticeSpec::new(3, alloc::vec![1.0, 1.0 + 1e-14], 1.0).unwrap();
        assert!(almost.is_uniform());
        let not = LatticeSpec::new(3, alloc::vec![1.0, 1.0 + 1e-9], 1.0).unwrap();
        assert!(!not.is_uniform());
        assert_eq!(not.uniform_coupling(), None);
    }

    #[test]
    fn symmetric_profile_is_mirrored() {
        let spec = LatticeSpec::symmetric(&[3.0, 9.58, 6.22, 7.68], 1.0).unwrap();
        assert_eq!(spec.n_waveguides(), 9);
        assert_eq!(spec.couplings(), &[7.68, 6.22, 9.58, 3.0, 3.0, 9.58, 6.22, 7.68]);
        assert_eq!(spec.mirrored(), spec);
        let h = hamiltonian(&spec);
        assert_eq!(h, h.transpose());
        assert_eq!(h, h.reversed());
    }

    #[test]
    fn hamiltonian_three_sites() {
        let h = hamiltonian(&LatticeSpec::uniform(3, 1.0, 1.0).unwrap());
        assert_eq!(
            h.as_slice(),
            &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]
        );
        let modes = LatticeModes::new(&LatticeSpec::uniform(3, 1.0, 1.0).unwrap()).unwrap();
        let s = libm::sqrt(2.0);
        let ev = modes.eigenvalues();
        assert_abs_diff_eq!(ev[0], -s, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[2], s, epsilon = 1e-14);
    }

    #[test]
    fn wide_uniform_band_edges() {
        let n = 101;
        let modes = LatticeModes::new(&LatticeSpec::uniform(n, 1.0, 1.0).unwrap()).unwrap();
        let edge = 2.0 * libm::cos(PI / (n + 1) as f64);
        assert_abs_diff_eq!(modes.eigenvalues()[n - 1], edge, epsilon = 1e-12);
        assert_abs_diff_eq!(modes.eigenvalues()[0], -edge, epsilon = 1e-12);
    }

    #[test]
    fn identity_at_zero_distance() {
        let spec = LatticeSpec::new(4, alloc::vec![0.3, 2.0, 1.1], 1.0).unwrap();
        let u = propagator(&spec, 0.0).unwrap();
        assert!(u.matrix().max_abs_diff(&CMatrix::identity(4)) < 1e-14);
        assert!(propagator(&spec, -1.0).is_err());
    }

    #[test]
    fn two_waveguide_cross_coupling() {
        let spec = LatticeSpec::uniform(2, 1.0, 1.0).unwrap();
        for &z in &[0.1, 0.5, 1.0, 2.3] {
            let u = propagator(&spec, z).unwrap();
            let s = libm::sin(z);
            assert_abs_diff_eq!(u.matrix()[(0, 1)].norm_sqr(), s * s, epsilon = 1e-14);
            // Tunnelling carries +i.
            assert_abs_diff_eq!(u.matrix()[(1, 0)].im, s, epsilon = 1e-14);
        }
    }

    #[test]
    fn column_matches_full_propagator() {
        let spec = LatticeSpec::new(5, alloc::vec![1.0, 2.0, 0.5, 1.5], 1.0).unwrap();
        let modes = LatticeModes::new(&spec).unwrap();
        let u = modes.propagator(0.83).unwrap();
        let mut col = alloc::vec![Complex64::new(0.0, 0.0); 5];
        modes.column_into(0.83, 2, &mut col);
        for r in 0..5 {
            assert_abs_diff_eq!((col[r] - u.matrix()[(r, 2)]).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn infinite_amplitudes() {
        assert_eq!(
            single_photon_amplitude_infinite(0, 1.0, 0.0),
            Complex64::new(1.0, 0.0)
        );
        let a = single_photon_amplitude_infinite(2, 0.5, 1.0);
        assert_abs_diff_eq!(a.re, -0.11490348493190048, epsilon = 1e-14);
        assert_abs_diff_eq!(a.im, 0.0, epsilon = 0.0);
        // |J₁| first equals |J₀| at 2Cz ≈ 1.43469565.
        let x = 2.0 * 0.7173478254097814;
        let a0 = single_photon_amplitude_infinite(0, 1.0, x / 2.0).norm();
        let a1 = single_photon_amplitude_infinite(1, 1.0, x / 2.0).norm();
        assert_abs_diff_eq!(a0, a1, epsilon = 1e-12);
    }

    #[test]
    fn i_powers() {
        assert_eq!(i_pow(-1), Complex64::new(0.0, -1.0));
        assert_eq!(i_pow(6), Complex64::new(-1.0, 0.0));
    }
}
