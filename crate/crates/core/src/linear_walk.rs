//! Two-photon walks in passive arrays.
//!
//! Both photons evolve under the same single-photon unitary, so an input
//! amplitude matrix `Ψ_in(a, b)` maps to `U Ψ_in Uᵀ`. In the infinite uniform
//! array `U` is known in closed form, `U(n, a) = i^{n−a} J_{n−a}(2CL)`.

use alloc::format;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use num_complex::Complex64;

use crate::bessel::{bessel_j_orders, signed_order};
use crate::lattice::{i_pow, LatticeModes, LatticeSpec};
use crate::matrix::CMatrix;
use crate::roots::first_onset;
use crate::{Error, Result};

/// Whether the lattice is treated as infinite (closed-form Bessel amplitudes) or
/// as the finite array described by its [`LatticeSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WalkMode {
    AnalyticInfinite,
    #[default]
    Finite,
}

/// How the two photons are told apart.
///
/// Type-II down-conversion emits cross-polarized photons, so the amplitude matrix
/// is indexed (signal, idler) and need not be symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Photons {
    Indistinguishable,
    #[default]
    SignalIdler,
}

/// Two-photon amplitude matrix `Ψ(n_s, n_i)` over centred waveguide labels.
///
/// Row index is the signal (first) photon, column the idler. Position `p` in either
/// direction carries label `p − origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiphotonState {
    amplitudes: CMatrix,
    origin: usize,
    photons: Photons,
}

impl BiphotonState {
    pub fn new(amplitudes: CMatrix, origin: usize, photons: Photons) -> Result<Self> {
        if !amplitudes.is_square() {
            return Err(Error::DimensionMismatch {
                expected: amplitudes.rows(),
                found: amplitudes.cols(),
            });
        }
        if amplitudes.rows() == 0 || origin >= amplitudes.rows() {
            return Err(Error::Config(format!(
                "origin {origin} outside a {}-waveguide state",
                amplitudes.rows()
            )));
        }
        if !amplitudes.is_finite() {
            return Err(Error::Config("state has non-finite amplitudes".into()));
        }
        Ok(Self {
            amplitudes,
            origin,
            photons,
        })
    }

    /// All-zero state over `dim` waveguides.
    pub fn zeros(dim: usize, origin: usize, photons: Photons) -> Result<Self> {
        Self::new(CMatrix::zeros(dim, dim), origin, photons)
    }

    /// Builds a state over the waveguides of `spec` from `(n_s, n_i, amplitude)`
    /// terms. Fails if a term lies outside the array.
    pub fn from_terms(
        spec: &LatticeSpec,
        terms: &[(i64, i64, Complex64)],
        photons: Photons,
    ) -> Result<Self> {
        let n = spec.n_waveguides();
        let mut m = CMatrix::zeros(n, n);
        for &(s, i, amp) in terms {
            match (spec.position(s), spec.position(i)) {
                (Some(ps), Some(pi)) => m[(ps, pi)] += amp,
                _ => {
                    return Err(Error::Config(format!(
                        "input waveguides ({s}, {i}) lie outside the array {:?}",
                        spec.labels()
                    )))
                }
            }
        }
        Self::new(m, spec.origin(), photons)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.rows()
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn photons(&self) -> Photons {
        self.photons
    }

    pub fn labels(&self) -> RangeInclusive<i64> {
        let o = self.origin as i64;
        -o..=(self.dim() as i64 - 1 - o)
    }

    pub fn position(&self, label: i64) -> Option<usize> {
        self.labels()
            .contains(&label)
            .then(|| (label + self.origin as i64) as usize)
    }

    /// `Ψ(n_s, n_i)`, zero outside the stored window.
    pub fn amplitude(&self, signal: i64, idler: i64) -> Complex64 {
        match (self.position(signal), self.position(idler)) {
            (Some(s), Some(i)) => self.amplitudes[(s, i)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn amplitudes(&self) -> &CMatrix {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CMatrix {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_sqr()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr();
        if !(norm > 0.0) {
            return Err(Error::ZeroState);
        }
        Ok(self.scaled(Complex64::new(1.0 / libm::sqrt(norm), 0.0)))
    }

    pub fn normalize(&mut self) -> Result<()> {
        *self = self.normalized()?;
        Ok(())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            amplitudes: self.amplitudes.scale(factor),
            origin: self.origin,
            photons: self.photons,
        }
    }

    /// Exchange-symmetric part `(Ψ + Ψᵀ)/2`, relabelled as indistinguishable.
    /// The norm is not restored.
    pub fn symmetrized(&self) -> Self {
        let t = self.amplitudes.transpose();
        let m = CMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            (self.amplitudes[(r, c)] + t[(r, c)]) * 0.5
        });
        Self {
            amplitudes: m,
            origin: self.origin,
            photons: Photons::Indistinguishable,
        }
    }

    /// Re-embeds the state into the centred window `labels`, dropping anything
    /// outside it.
    pub fn restricted(&self, labels: RangeInclusive<i64>) -> Self {
        let lo = *labels.start();
        let dim = (labels.end() - lo + 1).max(1) as usize;
        let m = CMatrix::from_fn(dim, dim, |r, c| {
            self.amplitude(lo + r as i64, lo + c as i64)
        });
        Self {
            amplitudes: m,
            origin: (-lo) as usize,
            photons: self.photons,
        }
    }

    /// Non-zero amplitudes as `(n_s, n_i, Ψ)`.
    pub fn terms(&self) -> Vec<(i64, i64, Complex64)> {
        let o = self.origin as i64;
        let n = self.dim();
        let mut out = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let a = self.amplitudes[(r, c)];
                if a != Complex64::new(0.0, 0.0) {
                    out.push((r as i64 - o, c as i64 - o, a));
                }
            }
        }
        out
    }
}

/// Two-photon input states.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    /// Both photons in waveguide `n`: `|n, n⟩`.
    SeparableSameWaveguide(i64),
    /// `(|n, n⟩ + |n+1, n+1⟩)/√2`.
    PathEntangledPlus(i64),
    /// `(|n, n⟩ − |n+1, n+1⟩)/√2`.
    PathEntangledMinus(i64),
    Custom(BiphotonState),
}

impl InputSpec {
    /// `(n_s, n_i, amplitude)` terms of the (unit-norm for the named kinds) input.
    pub fn terms(&self) -> Vec<(i64, i64, Complex64)> {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        match *self {
            InputSpec::SeparableSameWaveguide(n) => {
                alloc::vec![(n, n, Complex64::new(1.0, 0.0))]
            }
            InputSpec::PathEntangledPlus(n) => alloc::vec![
                (n, n, Complex64::new(h, 0.0)),
                (n + 1, n + 1, Complex64::new(h, 0.0)),
            ],
            InputSpec::PathEntangledMinus(n) => alloc::vec![
                (n, n, Complex64::new(h, 0.0)),
                (n + 1, n + 1, Complex64::new(-h, 0.0)),
            ],
            InputSpec::Custom(ref s) => s.terms(),
        }
    }

    fn photons(&self) -> Photons {
        match self {
            InputSpec::Custom(s) => s.photons(),
            _ => Photons::Indistinguishable,
        }
    }

    /// Input as a state over the waveguides of `spec`.
    pub fn to_state(&self, spec: &LatticeSpec) -> Result<BiphotonState> {
        BiphotonState::from_terms(spec, &self.terms(), self.photons())
    }
}

/// Output state after propagating `input` over the full length of `spec`.
///
/// Analytic mode ignores the array edges and returns the window
/// `|n| ≤ ceil(2CL) + 20 + max|input label|`; it requires a uniform lattice.
pub fn propagate_linear(
    input: &InputSpec,
    spec: &LatticeSpec,
    mode: WalkMode,
) -> Result<BiphotonState> {
    let terms = input.terms();
    // Validates that the input lies inside the array in either mode.
    let embedded = BiphotonState::from_terms(spec, &terms, input.photons())?;
    match mode {
        WalkMode::Finite => {
            let u = LatticeModes::new(spec)?.propagator(spec.length())?;
            let out = u
                .matrix()
                .matmul(embedded.amplitudes())
                .matmul(&u.matrix().transpose());
            BiphotonState::new(out, spec.origin(), input.photons())
        }
        WalkMode::AnalyticInfinite => {
            let coupling = spec.uniform_coupling().ok_or_else(|| {
                Error::Config("analytic mode requires a uniform lattice".into())
            })?;
            propagate_analytic(&terms, coupling, spec.length(), input.photons())
        }
    }
}

fn propagate_analytic(
    terms: &[(i64, i64, Complex64)],
    coupling: f64,
    length: f64,
    photons: Photons,
) -> Result<BiphotonState> {
    let reach = terms
        .iter()
        .map(|&(s, i, _)| s.abs().max(i.abs()))
        .max()
        .unwrap_or(0);
    let half = LatticeSpec::infinite_window(coupling, length) as i64 + reach;
    let table = bessel_j_orders((half + reach) as usize, 2.0 * coupling * length);
    let dim = (2 * half + 1) as usize;
    let g = |m: i64| i_pow(m) * signed_order(&table, m);

    let mut out = CMatrix::zeros(dim, dim);
    let mut gs = alloc::vec![Complex64::new(0.0, 0.0); dim];
    let mut gi = alloc::vec![Complex64::new(0.0, 0.0); dim];
    for &(a, b, amp) in terms {
        for p in 0..dim {
            let n = p as i64 - half;
            gs[p] = g(n - a) * amp;
            gi[p] = g(n - b);
        }
        for r in 0..dim {
            for c in 0..dim {
                out[(r, c)] += gs[r] * gi[c];
            }
        }
    }
    BiphotonState::new(out, half as usize, photons)
}

/// Finite-array propagation with distinct signal and idler lattices (e.g. the
/// two polarizations seeing slightly different couplings): `U_s Ψ U_iᵀ`.
pub fn propagate_linear_split(
    input: &InputSpec,
    signal: &LatticeSpec,
    idler: &LatticeSpec,
) -> Result<BiphotonState> {
    if signal.n_waveguides() != idler.n_waveguides() {
        return Err(Error::DimensionMismatch {
            expected: signal.n_waveguides(),
            found: idler.n_waveguides(),
        });
    }
    if signal.length() != idler.length() {
        return Err(Error::Config(
            "signal and idler lattices must share one length".into(),
        ));
    }
    let embedded = input.to_state(signal)?;
    let us = LatticeModes::new(signal)?.propagator(signal.length())?;
    let ui = LatticeModes::new(idler)?.propagator(idler.length())?;
    let out = us
        .matrix()
        .matmul(embedded.amplitudes())
        .matmul(&ui.matrix().transpose());
    BiphotonState::new(out, signal.origin(), input.photons())
}

/// One amplitude of the infinite-array output for input `terms` at walk depth
/// `x = 2CL`.
fn analytic_entry(terms: &[(i64, i64, Complex64)], x: f64, signal: i64, idler: i64) -> Complex64 {
    let order = terms
        .iter()
        .map(|&(a, b, _)| (signal - a).abs().max((idler - b).abs()))
        .max()
        .unwrap_or(0);
    let table = bessel_j_orders(order as usize, x);
    terms
        .iter()
        .map(|&(a, b, amp)| {
            amp * i_pow(signal - a)
                * signed_order(&table, signal - a)
                * i_pow(idler - b)
                * signed_order(&table, idler - b)
        })
        .sum()
}

/// Smallest walk depth `CL` from which the output pattern of the infinite array
/// has settled:
///
/// * both photons in `n`: the ballistic term `|Ψ(n+1, n+1)|` reaches the
///   off-diagonal `|Ψ(n, n+1)|`;
/// * plus state on `(n, n+1)`: the antidiagonal `|Ψ(n+1, n)|` reaches the
///   diagonal `|Ψ(n, n)|`;
/// * minus state: the antidiagonal vanishes identically, so the bunched
///   pattern holds from `CL = 0`.
///
/// Bisection tolerance is `1e-4` in `CL`. The result does not depend on
/// `coupling`, which only sets the length scale.
pub fn stabilization_threshold_linear(input: &InputSpec, coupling: f64) -> Result<f64> {
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::Domain(format!(
            "coupling must be positive, got {coupling}"
        )));
    }
    let terms = input.terms();
    let (dominant, reference) = match *input {
        InputSpec::SeparableSameWaveguide(n) => ((n + 1, n + 1), (n, n + 1)),
        InputSpec::PathEntangledPlus(n) => ((n + 1, n), (n, n)),
        InputSpec::PathEntangledMinus(n) => ((n, n), (n + 1, n)),
        InputSpec::Custom(_) => {
            return Err(Error::Domain(
                "stabilization threshold is defined for separable and path-entangled inputs only"
                    .into(),
            ))
        }
    };
    let onset = first_onset(|cl| {
        let x = 2.0 * cl;
        let d = analytic_entry(&terms, x, dominant.0, dominant.1).norm();
        let r = analytic_entry(&terms, x, reference.0, reference.1).norm();
        Ok(d - r)
    })?;
    onset.ok_or_else(|| Error::Domain("pattern does not stabilize for CL ≤ 10".into()))
}
