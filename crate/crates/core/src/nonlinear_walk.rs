//! Photon pairs generated by parametric down-conversion inside the array.
//!
//! To first order in the pump, a pair created at depth `L − z` in waveguide `n`
//! walks the remaining distance `z` as a linear two-photon state, so the output is
//!
//! ```text
//! Ψ = γ Σₙ Aₙ ∫₀ᴸ e^{iΔβ(L−z)} (U(z) eₙ)(U(z) eₙ)ᵀ dz
//! ```
//!
//! which for the infinite uniform array becomes
//! `γ Σₙ Aₙ ∫₀ᴸ i^{n_s+n_i−2n} J_{n_s−n}(2Cz) J_{n_i−n}(2Cz) dz`.
//! The integral is evaluated by composite Gauss–Legendre quadrature and checked
//! by doubling the number of nodes. The pump is assumed not to couple between
//! waveguides.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::bessel::{bessel_j_orders, signed_order};
use crate::lattice::{i_pow, LatticeModes, LatticeSpec};
use crate::linear_walk::{BiphotonState, Photons, WalkMode};
use crate::matrix::CMatrix;
use crate::quadrature::{CompositeRule, PANEL_ORDER};
use crate::roots::first_onset;
use crate::{Error, Result};

/// Largest change of the normalized state tolerated when the quadrature is doubled.
pub const QUADRATURE_TOL: f64 = 1e-8;

/// Minimum number of quadrature nodes.
pub const MIN_QUADRATURE_POINTS: usize = PANEL_ORDER;

/// Relative tolerance when classifying two-waveguide pumps as in or out of phase.
const PHASE_PATTERN_TOL: f64 = 1e-9;

/// Complex pump amplitudes `Aₙ` per waveguide label. Unpumped waveguides are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpProfile {
    amplitudes: BTreeMap<i64, Complex64>,
}

impl PumpProfile {
    /// Builds a profile; zero entries are dropped, repeated labels are rejected.
    pub fn new(entries: impl IntoIterator<Item = (i64, Complex64)>) -> Result<Self> {
        let mut amplitudes = BTreeMap::new();
        for (n, a) in entries {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::Config(format!("pump amplitude at {n} is not finite")));
            }
            if amplitudes.contains_key(&n) {
                return Err(Error::Config(format!("waveguide {n} pumped twice")));
            }
            if a != Complex64::new(0.0, 0.0) {
                amplitudes.insert(n, a);
            }
        }
        if amplitudes.is_empty() {
            return Err(Error::Config("pump profile has no non-zero amplitude".into()));
        }
        Ok(Self { amplitudes })
    }

    /// Unit pump in a single waveguide.
    pub fn single(n: i64) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(n, Complex64::new(1.0, 0.0));
        Self { amplitudes }
    }

    /// `Aₙ = 1`, `Aₙ₊₁ = ratio`.
    pub fn neighbours(n: i64, ratio: Complex64) -> Result<Self> {
        Self::new([(n, Complex64::new(1.0, 0.0)), (n + 1, ratio)])
    }

    /// Central three waveguides: `A₀ = 1`, `A₋₁ = A₁ = a·e^{iφ}`.
    pub fn symmetric_three(ratio: f64, phase: f64) -> Result<Self> {
        let side = Complex64::from_polar(ratio, phase);
        Self::new([(-1, side), (0, Complex64::new(1.0, 0.0)), (1, side)])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.amplitudes.iter().map(|(&n, &a)| (n, a))
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn get(&self, n: i64) -> Complex64 {
        self.amplitudes
            .get(&n)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Largest `|n|` that is pumped.
    pub fn reach(&self) -> i64 {
        self.amplitudes.keys().map(|n| n.abs()).max().unwrap_or(0)
    }

    pub fn mirrored(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|(&n, &a)| (-n, a)).collect(),
        }
    }

    /// `α·self + β·other`.
    pub fn combine(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        let mut sum: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (n, a) in self.iter() {
            *sum.entry(n).or_default() += alpha * a;
        }
        for (n, b) in other.iter() {
            *sum.entry(n).or_default() += beta * b;
        }
        Self::new(sum)
    }

    fn check_inside(&self, spec: &LatticeSpec) -> Result<()> {
        match self.amplitudes.keys().find(|&&n| spec.position(n).is_none()) {
            Some(n) => Err(Error::Config(format!(
                "pumped waveguide {n} lies outside the array {:?}",
                spec.labels()
            ))),
            None => Ok(()),
        }
    }
}

/// Parameters of the down-conversion model.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdcSettings {
    /// Overall efficiency; only scales the raw amplitudes.
    pub gamma: f64,
    /// Nodes of the base quadrature rule (rounded up to whole 16-point panels).
    pub quadrature_points: usize,
    pub mode: WalkMode,
    /// Single-waveguide phase mismatch `Δβ⁽⁰⁾`; zero on resonance.
    pub phase_mismatch: f64,
}

impl SpdcSettings {
    pub fn new(quadrature_points: usize, mode: WalkMode) -> Result<Self> {
        let s = Self {
            gamma: 1.0,
            quadrature_points,
            mode,
            phase_mismatch: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    /// Enough nodes for the fastest oscillation of the integrand, `e^{i4C_max z}`:
    /// one 16-point panel per quarter period, and at least two panels.
    pub fn recommended(spec: &LatticeSpec, mode: WalkMode) -> Self {
        Self {
            gamma: 1.0,
            quadrature_points: recommended_points(spec.max_coupling(), spec.length()),
            mode,
            phase_mismatch: 0.0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_phase_mismatch(mut self, delta: f64) -> Result<Self> {
        self.phase_mismatch = delta;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::Config(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.quadrature_points < MIN_QUADRATURE_POINTS {
            return Err(Error::Config(format!(
                "at least {MIN_QUADRATURE_POINTS} quadrature points are required, got {}",
                self.quadrature_points
            )));
        }
        if !self.phase_mismatch.is_finite() {
            return Err(Error::Config("phase mismatch must be finite".into()));
        }
        Ok(())
    }
}

pub(crate) fn recommended_points(max_coupling: f64, length: f64) -> usize {
    let panels = libm::ceil(4.0 * max_coupling * length / PI) as usize;
    PANEL_ORDER * panels.max(2)
}

/// Result of a converged down-conversion calculation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdcOutput {
    /// `Ψ` including `γ` and the pump magnitudes.
    pub raw: BiphotonState,
    /// `raw` scaled to unit norm.
    pub normalized: BiphotonState,
    /// Nodes used for `raw` (twice the requested base rule).
    pub quadrature_points: usize,
    /// Largest change of the normalized state between the base and doubled rules.
    pub residual: f64,
}

/// What the integrand needs at one quadrature node.
enum Kernel<'a> {
    Finite {
        signal: LatticeModes,
        idler: Option<LatticeModes>,
        pump: Vec<(usize, Complex64)>,
        origin: usize,
    },
    Analytic {
        coupling: f64,
        half: i64,
        pump: &'a PumpProfile,
    },
}

impl Kernel<'_> {
    fn dim(&self) -> usize {
        match self {
            Kernel::Finite { signal, .. } => signal.dim(),
            Kernel::Analytic { half, .. } => (2 * half + 1) as usize,
        }
    }

    fn origin(&self) -> usize {
        match self {
            Kernel::Finite { origin, .. } => *origin,
            Kernel::Analytic { half, .. } => *half as usize,
        }
    }

    /// `Σₙ Aₙ (U_s(z) eₙ)(U_i(z) eₙ)ᵀ · factor`, added into `acc`.
    fn add_node(&self, z: f64, factor: Complex64, acc: &mut CMatrix, scratch: &mut Scratch) {
        let dim = self.dim();
        match self {
            Kernel::Finite {
                signal,
                idler,
                pump,
                ..
            } => {
                for &(pos, a) in pump {
                    signal.column_into(z, pos, &mut scratch.left);
                    let right = match idler {
                        Some(modes) => {
                            modes.column_into(z, pos, &mut scratch.right);
                            &scratch.right
                        }
                        None => &scratch.left,
                    };
                    outer_add(acc, factor * a, &scratch.left, right);
                }
            }
            Kernel::Analytic {
                coupling,
                half,
                pump,
            } => {
                let reach = pump.reach();
                let table = bessel_j_orders((half + reach) as usize, 2.0 * coupling * z);
                for (n, a) in pump.iter() {
                    for (p, g) in scratch.left.iter_mut().enumerate() {
                        let m = p as i64 - half - n;
                        *g = i_pow(m) * signed_order(&table, m);
                    }
                    outer_add(acc, factor * a, &scratch.left, &scratch.left);
                }
            }
        }
        debug_assert_eq!(acc.rows(), dim);
    }

    fn integrate(&self, length: f64, points: usize, settings: &SpdcSettings) -> CMatrix {
        let dim = self.dim();
        let rule = CompositeRule::with_points(0.0, length, points);
        let mut total = CMatrix::zeros(dim, dim);
        let mut panel = CMatrix::zeros(dim, dim);
        let mut scratch = Scratch::new(dim);
        for (zs, ws) in rule.panel_chunks() {
            panel.as_mut_slice().fill(Complex64::new(0.0, 0.0));
            for (&z, &w) in zs.iter().zip(ws) {
                // Generated at depth L − z, then propagated over z.
                let factor = Complex64::cis(settings.phase_mismatch * (length - z)) * w;
                self.add_node(z, factor, &mut panel, &mut scratch);
            }
            for (t, p) in total.as_mut_slice().iter_mut().zip(panel.as_slice()) {
                *t += p;
            }
        }
        total.scale(Complex64::new(settings.gamma, 0.0))
    }
}

struct Scratch {
    left: Vec<Complex64>,
    right: Vec<Complex64>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Self {
            left: vec![Complex64::new(0.0, 0.0); dim],
            right: vec![Complex64::new(0.0, 0.0); dim],
        }
    }
}

fn outer_add(acc: &mut CMatrix, factor: Complex64, left: &[Complex64], right: &[Complex64]) {
    let cols = acc.cols();
    for (r, &l) in left.iter().enumerate() {
        let lf = l * factor;
        let row = &mut acc.as_mut_slice()[r * cols..(r + 1) * cols];
        for (o, &x) in row.iter_mut().zip(right) {
            *o += lf * x;
        }
    }
}

fn build_kernel<'a>(
    pump: &'a PumpProfile,
    signal: &LatticeSpec,
    idler: Option<&LatticeSpec>,
    mode: WalkMode,
    window_length: f64,
) -> Result<Kernel<'a>> {
    pump.check_inside(signal)?;
    match mode {
        WalkMode::Finite => {
            let idler = match idler {
                Some(spec) if spec.couplings() != signal.couplings() => {
                    if spec.n_waveguides() != signal.n_waveguides() {
                        return Err(Error::DimensionMismatch {
                            expected: signal.n_waveguides(),
                            found: spec.n_waveguides(),
                        });
                    }
                    Some(LatticeModes::new(spec)?)
                }
                _ => None,
            };
            let pump = pump
                .iter()
                .map(|(n, a)| (signal.position(n).expect("checked above"), a))
                .collect();
            Ok(Kernel::Finite {
                signal: LatticeModes::new(signal)?,
                idler,
                pump,
                origin: signal.origin(),
            })
        }
        WalkMode::AnalyticInfinite => {
            if idler.is_some_and(|s| s.couplings() != signal.couplings()) {
                return Err(Error::Config(
                    "distinct signal and idler couplings need finite mode".into(),
                ));
            }
            let coupling = signal.uniform_coupling().ok_or_else(|| {
                Error::Config("analytic mode requires a uniform lattice".into())
            })?;
            let half = LatticeSpec::infinite_window(coupling, window_length) as i64 + pump.reach();
            Ok(Kernel::Analytic {
                coupling,
                half,
                pump,
            })
        }
    }
}

fn converged(kernel: &Kernel<'_>, length: f64, settings: &SpdcSettings) -> Result<SpdcOutput> {
    settings.validate()?;
    let photons = Photons::SignalIdler;
    let coarse = BiphotonState::new(
        kernel.integrate(length, settings.quadrature_points, settings),
        kernel.origin(),
        photons,
    )?;
    let points = 2 * CompositeRule::with_points(0.0, length, settings.quadrature_points).len();
    let raw = BiphotonState::new(kernel.integrate(length, points, settings), kernel.origin(), photons)?;
    let normalized = raw.normalized()?;
    let residual = coarse
        .normalized()?
        .amplitudes()
        .max_abs_diff(normalized.amplitudes());
    if !(residual < QUADRATURE_TOL) {
        return Err(Error::QuadratureNotConverged { points, residual });
    }
    Ok(SpdcOutput {
        raw,
        normalized,
        quadrature_points: points,
        residual,
    })
}

/// Down-converted biphoton state at the output of `spec`, with the quadrature
/// doubling check.
pub fn spdc_state(
    pump: &PumpProfile,
    spec: &LatticeSpec,
    settings: &SpdcSettings,
) -> Result<SpdcOutput> {
    let kernel = build_kernel(pump, spec, None, settings.mode, spec.length())?;
    converged(&kernel, spec.length(), settings)
}

/// Finite-mode state with separate signal and idler lattices (polarization-split
/// couplings). Both lattices must have the same size; the signal length is used.
pub fn spdc_state_split(
    pump: &PumpProfile,
    signal: &LatticeSpec,
    idler: &LatticeSpec,
    settings: &SpdcSettings,
) -> Result<SpdcOutput> {
    if settings.mode != WalkMode::Finite {
        return Err(Error::Config(
            "distinct signal and idler couplings need finite mode".into(),
        ));
    }
    let kernel = build_kernel(pump, signal, Some(idler), settings.mode, signal.length())?;
    converged(&kernel, signal.length(), settings)
}

/// Raw state from a single fixed rule of `settings.quadrature_points` nodes,
/// without the doubling check. The result is a smooth function of the lattice
/// and pump parameters, which is what the optimizer needs.
pub fn spdc_state_fixed(
    pump: &PumpProfile,
    spec: &LatticeSpec,
    settings: &SpdcSettings,
) -> Result<BiphotonState> {
    settings.validate()?;
    let kernel = build_kernel(pump, spec, None, settings.mode, spec.length())?;
    BiphotonState::new(
        kernel.integrate(spec.length(), settings.quadrature_points, settings),
        kernel.origin(),
        Photons::SignalIdler,
    )
}

/// The down-converted state sampled on a uniform wavevector grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    values: CMatrix,
}

impl MomentumState {
    pub fn grid(&self) -> usize {
        self.values.rows()
    }

    /// `k_j = −π + 2πj/G`.
    pub fn wavevector(&self, j: usize) -> f64 {
        wavevector(self.grid(), j)
    }

    /// `Ψ̃(k_s, k_i)` with rows indexed by the signal wavevector.
    pub fn values(&self) -> &CMatrix {
        &self.values
    }

    /// Inverse discrete Fourier transform onto labels `-half..=half`:
    /// `Ψ(n_s, n_i) = G⁻² Σ Ψ̃(k_s, k_i) e^{i(k_s n_s + k_i n_i)}`.
    pub fn to_real_space(&self, half: usize) -> Result<BiphotonState> {
        let g = self.grid();
        let dim = 2 * half + 1;
        // phase[j][p] = e^{i k_j (p − half)}
        let phase = CMatrix::from_fn(g, dim, |j, p| {
            Complex64::cis(self.wavevector(j) * (p as f64 - half as f64))
        });
        // Idler transform first, then signal.
        let partial = self.values.matmul(&phase);
        let full = phase.transpose().matmul(&partial);
        let scale = 1.0 / (g * g) as f64;
        BiphotonState::new(full.scale(Complex64::new(scale, 0.0)), half, Photons::SignalIdler)
    }
}

fn wavevector(grid: usize, j: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / grid as f64
}

fn sinc(x: f64) -> f64 {
    if libm::fabs(x) < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        libm::sin(x) / x
    }
}

/// Closed-form momentum-space state of a uniform array,
/// `Ψ̃(k_s, k_i) = γL Ã(k_s + k_i) sinc(f) e^{if}` with
/// `f = (cos k_s + cos k_i) CL` and `Ã(k) = Σ Aₙ e^{−ikn}`.
///
/// A non-zero phase mismatch shifts `f` by `−Δβ⁽⁰⁾L/2` and adds the phase
/// `e^{iΔβ⁽⁰⁾L}`, matching the real-space convention.
pub fn spdc_state_momentum(
    pump: &PumpProfile,
    spec: &LatticeSpec,
    settings: &SpdcSettings,
    k_grid: usize,
) -> Result<MomentumState> {
    settings.validate()?;
    pump.check_inside(spec)?;
    if k_grid < 2 {
        return Err(Error::Domain(format!(
            "wavevector grid needs at least 2 points, got {k_grid}"
        )));
    }
    let coupling = spec.uniform_coupling().ok_or_else(|| {
        Error::Config("the momentum-space form requires a uniform lattice".into())
    })?;
    let length = spec.length();
    let delta = settings.phase_mismatch;
    let prefactor = Complex64::cis(delta * length) * (settings.gamma * length);
    let cosines: Vec<f64> = (0..k_grid).map(|j| libm::cos(wavevector(k_grid, j))).collect();
    let values = CMatrix::from_fn(k_grid, k_grid, |s, i| {
        let ktot = wavevector(k_grid, s) + wavevector(k_grid, i);
        let pump_ft: Complex64 = pump
            .iter()
            .map(|(n, a)| a * Complex64::cis(-ktot * n as f64))
            .sum();
        let f = (cosines[s] + cosines[i]) * coupling * length - 0.5 * delta * length;
        prefactor * pump_ft * sinc(f) * Complex64::cis(f)
    });
    Ok(MomentumState { values })
}

/// Pump patterns for which a stabilization onset is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
enum PumpPattern {
    Single(i64),
    InPhase(i64),
    OutOfPhase(i64),
}

fn classify(pump: &PumpProfile) -> Result<PumpPattern> {
    let entries: Vec<(i64, Complex64)> = pump.iter().collect();
    match entries.as_slice() {
        [(n, _)] => Ok(PumpPattern::Single(*n)),
        [(n, a), (m, b)] if *m == n + 1 => {
            let ratio = b / a;
            if (ratio - 1.0).norm() <= PHASE_PATTERN_TOL {
                Ok(PumpPattern::InPhase(*n))
            } else if (ratio + 1.0).norm() <= PHASE_PATTERN_TOL {
                Ok(PumpPattern::OutOfPhase(*n))
            } else {
                Err(Error::Domain(
                    "two-waveguide pumps must be equal in magnitude and in or out of phase".into(),
                ))
            }
        }
        _ => Err(Error::Domain(
            "stabilization threshold needs a single-waveguide or neighbouring-pair pump".into(),
        )),
    }
}

/// One amplitude of the infinite-array state at walk depth `cl`, integrating over
/// `t = Cz ∈ [0, CL]` (the constant factor `1/C` is dropped).
fn analytic_entry(pump: &PumpProfile, cl: f64, signal: i64, idler: i64) -> Complex64 {
    let order = pump
        .iter()
        .map(|(n, _)| (signal - n).abs().max((idler - n).abs()))
        .max()
        .unwrap_or(0) as usize;
    let panels = (libm::ceil(4.0 * cl / PI) as usize).max(4);
    let rule = CompositeRule::new(0.0, cl, panels);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
        let table = bessel_j_orders(order, 2.0 * t);
        for (n, a) in pump.iter() {
            acc += a
                * w
                * i_pow(signal + idler - 2 * n)
                * (signed_order(&table, signal - n) * signed_order(&table, idler - n));
        }
    }
    acc
}

/// Smallest walk depth `CL` from which the down-converted pattern of the
/// infinite array has settled:
///
/// * single pumped waveguide `n`: the ballistic diagonal `|Ψ(n+1, n+1)|`
///   reaches the off-diagonal `|Ψ(n, n+1)|`;
/// * neighbours pumped in phase: the antidiagonal `|Ψ(n+1, n)|` reaches the
///   diagonal `|Ψ(n, n)|`;
/// * neighbours pumped out of phase: the antidiagonal through the pumped pair
///   vanishes, so the bunched pattern holds from `CL = 0`.
///
/// Bisection tolerance is `1e-4` in `CL`.
pub fn stabilization_threshold_nonlinear(pump: &PumpProfile, coupling: f64) -> Result<f64> {
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::Domain(format!(
            "coupling must be positive, got {coupling}"
        )));
    }
    let (dominant, reference) = match classify(pump)? {
        PumpPattern::Single(n) => ((n + 1, n + 1), (n, n + 1)),
        PumpPattern::InPhase(n) => ((n + 1, n), (n, n)),
        PumpPattern::OutOfPhase(n) => ((n, n), (n + 1, n)),
    };
    let onset = first_onset(|cl| {
        let d = analytic_entry(pump, cl, dominant.0, dominant.1).norm();
        let r = analytic_entry(pump, cl, reference.0, reference.1).norm();
        Ok(d - r)
    })?;
    onset.ok_or_else(|| Error::Domain("pattern does not stabilize for CL ≤ 10".into()))
}

/// Normalized marginal `I(n_s) = Σ_{n_i} |Ψ(n_s, n_i; z)|²` of the state
/// generated up to depth `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSample {
    pub z: f64,
    /// Array position of label 0 within `marginal`.
    pub origin: usize,
    pub marginal: Vec<f64>,
}

/// Marginals of the running state at `z_steps` equally spaced depths from 0 to L.
///
/// At `z = 0` nothing has been generated and the marginal is all zeros. Each depth
/// uses a rule of `settings.quadrature_points` nodes over `[0, z]`. In analytic
/// mode the window is fixed by the full length so all samples share one size.
pub fn marginal_evolution(
    pump: &PumpProfile,
    spec: &LatticeSpec,
    settings: &SpdcSettings,
    z_steps: usize,
) -> Result<Vec<MarginalSample>> {
    settings.validate()?;
    if z_steps < 2 {
        return Err(Error::Domain(format!(
            "marginal evolution needs at least 2 steps, got {z_steps}"
        )));
    }
    let kernel = build_kernel(pump, spec, None, settings.mode, spec.length())?;
    let dim = kernel.dim();
    let origin = kernel.origin();
    (0..z_steps)
        .map(|j| {
            let z = spec.length() * j as f64 / (z_steps - 1) as f64;
            let marginal = if j == 0 {
                vec![0.0; dim]
            } else {
                let psi = kernel.integrate(z, settings.quadrature_points, settings);
                let total = psi.norm_sqr();
                if !(total > 0.0) {
                    return Err(Error::ZeroState);
                }
                (0..dim)
                    .map(|r| psi.row(r).iter().map(|a| a.norm_sqr()).sum::<f64>() / total)
                    .collect()
            };
            Ok(MarginalSample { z, origin, marginal })
        })
        .collect()
}
