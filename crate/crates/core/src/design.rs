//! Inverse design of symmetric aperiodic arrays and three-waveguide pumps.
//!
//! The search space is a mirror-symmetric coupling profile `C₁ … C_m` (innermost
//! first, `N = 2m + 1`) and a pump `A₀ = 1`, `A₋₁ = A₁ = a·e^{iφ}`. The objective
//! is the similarity between the generated coincidence pattern and a target.
//!
//! The optimizer is projected gradient ascent with backtracking in the internal
//! coordinates `(ln C₁, …, ln C_m, ln a, φ)`, so a central difference of step `ε`
//! is a relative step on the couplings and on `a`, and an absolute step on `φ`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{correlation, schmidt_number, similarity, CorrelationMatrix};
use crate::lattice::LatticeSpec;
use crate::linear_walk::{BiphotonState, WalkMode};
use crate::matrix::RMatrix;
use crate::nonlinear_walk::{
    recommended_points, spdc_state, spdc_state_fixed, PumpProfile, SpdcSettings,
};
use crate::{Error, Result};

/// Armijo sufficient-increase constant.
const ARMIJO: f64 = 1e-4;
/// Line search gives up once the step falls below this.
const MIN_STEP: f64 = 1e-12;

/// Which coincidence pattern to aim for.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetKind {
    /// Both photons in the same waveguide, equally spread: `Γ(n, n) = 1/N`.
    WState,
    /// Photons in mirrored waveguides: `Γ(−n, n) = 1/N`.
    AntiState,
    /// Any non-negative `N×N` pattern.
    Custom(RMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    kind: TargetKind,
    correlation: CorrelationMatrix,
}

impl TargetState {
    pub fn new(kind: TargetKind, n_waveguides: usize) -> Result<Self> {
        if n_waveguides.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "target needs an odd number of waveguides, got {n_waveguides}"
            )));
        }
        let inv = 1.0 / n_waveguides as f64;
        let values = match &kind {
            TargetKind::WState => RMatrix::identity(n_waveguides).scale(inv),
            TargetKind::AntiState => RMatrix::identity(n_waveguides).flipped_columns().scale(inv),
            TargetKind::Custom(m) => {
                if m.rows() != n_waveguides || m.cols() != n_waveguides {
                    return Err(Error::DimensionMismatch {
                        expected: n_waveguides,
                        found: m.rows().max(m.cols()),
                    });
                }
                m.clone()
            }
        };
        let correlation = CorrelationMatrix::from_values(values, n_waveguides / 2)?;
        Ok(Self { kind, correlation })
    }

    pub fn kind(&self) -> &TargetKind {
        &self.kind
    }

    pub fn n_waveguides(&self) -> usize {
        self.correlation.dim()
    }

    pub fn correlation(&self) -> &CorrelationMatrix {
        &self.correlation
    }
}

/// Box constraints on the design parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    /// Coupling range in units of `1/L`.
    pub coupling: (f64, f64),
    /// Range of the side pump ratio `a`.
    pub ratio: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            coupling: (0.1, 20.0),
            ratio: (0.01, 10.0),
        }
    }
}

impl Bounds {
    fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi;
        if !ok(self.coupling) || !ok(self.ratio) {
            return Err(Error::Config(format!("invalid bounds {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    pub target: TargetState,
    pub length: f64,
    pub bounds: Bounds,
    /// Fixed quadrature rule for the whole run, so the objective is smooth.
    pub quadrature_points: usize,
}

impl DesignProblem {
    /// Unit length, default bounds and a rule fine enough for the largest coupling.
    pub fn new(target: TargetState) -> Self {
        let bounds = Bounds::default();
        Self {
            target,
            length: 1.0,
            quadrature_points: recommended_points(bounds.coupling.1, 1.0),
            bounds,
        }
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Result<Self> {
        bounds.validate()?;
        self.bounds = bounds;
        self.quadrature_points = recommended_points(bounds.coupling.1, self.length);
        Ok(self)
    }

    pub fn n_waveguides(&self) -> usize {
        self.target.n_waveguides()
    }

    /// Number of independent couplings, `(N − 1)/2`.
    pub fn n_couplings(&self) -> usize {
        self.n_waveguides() / 2
    }

    fn settings_for(&self, spec: &LatticeSpec) -> Result<SpdcSettings> {
        let points = self
            .quadrature_points
            .max(recommended_points(spec.max_coupling(), spec.length()));
        SpdcSettings::new(points, WalkMode::Finite)
    }
}

/// A point of the search space.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignParams {
    /// `C₁ … C_m`, innermost first.
    pub couplings: Vec<f64>,
    /// Side pump ratio `a`.
    pub ratio: f64,
    /// Side pump phase `φ` in radians.
    pub phase: f64,
}

impl DesignParams {
    pub fn lattice(&self, length: f64) -> Result<LatticeSpec> {
        LatticeSpec::symmetric(&self.couplings, length)
    }

    pub fn pump(&self) -> Result<PumpProfile> {
        PumpProfile::symmetric_three(self.ratio, self.phase)
    }

    fn check(&self, problem: &DesignProblem) -> Result<()> {
        if self.couplings.len() != problem.n_couplings() {
            return Err(Error::DimensionMismatch {
                expected: problem.n_couplings(),
                found: self.couplings.len(),
            });
        }
        if !(self.ratio.is_finite() && self.ratio >= 0.0 && self.phase.is_finite()) {
            return Err(Error::Domain(format!(
                "invalid pump ratio {} or phase {}",
                self.ratio, self.phase
            )));
        }
        Ok(())
    }

    fn to_internal(&self) -> Vec<f64> {
        let mut x: Vec<f64> = self.couplings.iter().map(|&c| libm::log(c)).collect();
        x.push(libm::log(self.ratio));
        x.push(self.phase);
        x
    }

    fn from_internal(x: &[f64]) -> Self {
        let m = x.len() - 2;
        Self {
            couplings: x[..m].iter().map(|&v| libm::exp(v)).collect(),
            ratio: libm::exp(x[m]),
            phase: wrap_phase(x[m + 1]),
        }
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let w = phi - TAU * libm::floor(phi / TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Box in internal coordinates; the phase is unbounded.
fn internal_bounds(problem: &DesignProblem) -> Vec<(f64, f64)> {
    let log = |(lo, hi): (f64, f64)| (libm::log(lo), libm::log(hi));
    let mut b = alloc::vec![log(problem.bounds.coupling); problem.n_couplings()];
    b.push(log(problem.bounds.ratio));
    b.push((f64::NEG_INFINITY, f64::INFINITY));
    b
}

fn project(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Normalized down-converted state of a design, from the problem's fixed rule.
pub fn design_state(problem: &DesignProblem, params: &DesignParams) -> Result<BiphotonState> {
    params.check(problem)?;
    let spec = params.lattice(problem.length)?;
    let settings = problem.settings_for(&spec)?;
    spdc_state_fixed(&params.pump()?, &spec, &settings)?.normalized()
}

/// Similarity of the generated pattern to the target.
pub fn objective(problem: &DesignProblem, params: &DesignParams) -> Result<f64> {
    let state = design_state(problem, params)?;
    similarity(&correlation(&state)?, problem.target.correlation())
}

/// Figures of merit of one design.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub similarity: f64,
    pub schmidt: f64,
    /// Fidelity maximized over free phases of the target components.
    pub best_fidelity: f64,
    /// Change of the state when the quadrature rule is doubled.
    pub quadrature_residual: f64,
    pub state: BiphotonState,
}

/// Similarity, Schmidt number and best-phase fidelity, after checking that the
/// fixed rule is converged.
pub fn evaluate(problem: &DesignProblem, params: &DesignParams) -> Result<Evaluation> {
    let state = design_state(problem, params)?;
    let spec = params.lattice(problem.length)?;
    let check = spdc_state(&params.pump()?, &spec, &problem.settings_for(&spec)?)?;
    let corr = correlation(&state)?;
    let sim = similarity(&corr, problem.target.correlation())?;
    Ok(Evaluation {
        similarity: sim,
        schmidt: schmidt_number(&state)?,
        best_fidelity: crate::analysis::best_fidelity(&state, problem.target.correlation())?,
        quadrature_residual: check.residual,
        state,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSettings {
    pub starts: usize,
    pub max_iters: usize,
    /// Central-difference step in internal coordinates.
    pub fd_epsilon: f64,
    pub seed: u64,
    /// First trial step of the line search.
    pub initial_step: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            starts: 20,
            max_iters: 400,
            fd_epsilon: 1e-4,
            seed: 0,
            initial_step: 1.0,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::Config("at least one start is required".into()));
        }
        if !(self.fd_epsilon.is_finite() && self.fd_epsilon > 0.0 && self.fd_epsilon < 0.1) {
            return Err(Error::Config(format!(
                "fd_epsilon must lie in (0, 0.1), got {}",
                self.fd_epsilon
            )));
        }
        if !(self.initial_step.is_finite() && self.initial_step > 0.0) {
            return Err(Error::Config("initial_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub params: DesignParams,
    pub similarity: f64,
    pub schmidt: f64,
    pub best_fidelity: f64,
    /// Objective after every accepted step, starting with the initial point.
    pub trace: Vec<f64>,
    /// Number of starts that were run.
    pub starts: usize,
    /// Index of the start that produced this result.
    pub start_index: usize,
    /// False when no start improved on its initial point.
    pub converged: bool,
}

/// Random initial point of start `start_index`: couplings log-uniform in
/// `[1, 12]/L`, `a` log-uniform in `[0.2, 5]`, `φ` uniform, then projected onto
/// the bounds. Each start draws from its own stream of the seeded generator.
pub fn initial_params(problem: &DesignProblem, seed: u64, start_index: usize) -> DesignParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start_index as u64);
    let mut log_uniform =
        |lo: f64, hi: f64| libm::exp(rng.random_range(libm::log(lo)..libm::log(hi)));
    let couplings: Vec<f64> = (0..problem.n_couplings())
        .map(|_| log_uniform(1.0 / problem.length, 12.0 / problem.length))
        .collect();
    let ratio = log_uniform(0.2, 5.0);
    let phase = rng.random_range(0.0..TAU);
    let mut x = DesignParams {
        couplings,
        ratio,
        phase,
    }
    .to_internal();
    project(&mut x, &internal_bounds(problem));
    DesignParams::from_internal(&x)
}

fn internal_objective(problem: &DesignProblem, x: &[f64]) -> Result<f64> {
    objective(problem, &DesignParams::from_internal(x))
}

/// Central-difference gradient in internal coordinates. Steps are clipped to the
/// bounds and the actual spacing is used in the quotient.
pub fn fd_gradient(problem: &DesignProblem, params: &DesignParams, eps: f64) -> Result<Vec<f64>> {
    params.check(problem)?;
    gradient(problem, &params.to_internal(), eps, &internal_bounds(problem))
}

fn gradient(
    problem: &DesignProblem,
    x: &[f64],
    eps: f64,
    bounds: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let (lo, hi) = bounds[k];
        let up = (x[k] + eps).min(hi);
        let down = (x[k] - eps).max(lo);
        probe[k] = up;
        let fu = internal_objective(problem, &probe)?;
        probe[k] = down;
        let fd = internal_objective(problem, &probe)?;
        probe[k] = x[k];
        g.push(if up > down { (fu - fd) / (up - down) } else { 0.0 });
    }
    Ok(g)
}

/// Runs one start of the optimizer.
pub fn optimize_start(
    problem: &DesignProblem,
    settings: &OptimizerSettings,
    start_index: usize,
) -> Result<DesignResult> {
    settings.validate()?;
    let bounds = internal_bounds(problem);
    let mut x = initial_params(problem, settings.seed, start_index).to_internal();
    let mut f = internal_objective(problem, &x)?;
    let mut trace = alloc::vec![f];
    let mut step = settings.initial_step;

    for _ in 0..settings.max_iters {
        let g = gradient(problem, &x, settings.fd_epsilon, &bounds)?;
        let mut accepted = false;
        while step >= MIN_STEP {
            let mut trial: Vec<f64> = x.iter().zip(&g).map(|(v, d)| v + step * d).collect();
            project(&mut trial, &bounds);
            let predicted: f64 = trial.iter().zip(&x).zip(&g).map(|((t, v), d)| (t - v) * d).sum();
            if predicted <= 0.0 {
                break;
            }
            let ft = internal_objective(problem, &trial)?;
            if ft > f && ft >= f + ARMIJO * predicted {
                x = trial;
                x[bounds.len() - 1] = wrap_phase(x[bounds.len() - 1]);
                f = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        trace.push(f);
        step *= 2.0;
    }

    let params = DesignParams::from_internal(&x);
    let eval = evaluate(problem, &params)?;
    Ok(DesignResult {
        converged: trace.len() > 1,
        similarity: eval.similarity,
        schmidt: eval.schmidt,
        best_fidelity: eval.best_fidelity,
        params,
        trace,
        starts: 1,
        start_index,
    })
}

/// Best of several single-start results: highest similarity, ties broken by the
/// lower start index. `converged` is true if any start improved.
pub fn select_best(results: Vec<DesignResult>) -> Option<DesignResult> {
    let starts = results.len();
    let any_improved = results.iter().any(|r| r.converged);
    let mut best = results.into_iter().reduce(|a, b| {
        if b.similarity > a.similarity
            || (b.similarity == a.similarity && b.start_index < a.start_index)
        {
            b
        } else {
            a
        }
    })?;
    best.starts = starts;
    best.converged = any_improved;
    Some(best)
}

/// Multi-start optimization, run sequentially; deterministic for a fixed seed.
pub fn optimize(problem: &DesignProblem, settings: &OptimizerSettings) -> Result<DesignResult> {
    settings.validate()?;
    let results = (0..settings.starts)
        .map(|k| optimize_start(problem, settings, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(select_best(results).expect("at least one start"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessStats {
    pub min_similarity: f64,
    pub mean_similarity: f64,
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
    /// Similarity of every trial, in order.
    pub similarities: Vec<f64>,
    pub fidelities: Vec<f64>,
}

/// Random perturbation sweep: every coupling and `a` is multiplied by an
/// independent factor uniform in `[1 − p, 1 + p]` and `φ` is shifted uniformly
/// within `±pπ`. The perturbed points are not clipped to the bounds.
pub fn robustness_sweep(
    problem: &DesignProblem,
    params: &DesignParams,
    perturbation: f64,
    trials: usize,
    seed: u64,
) -> Result<RobustnessStats> {
    if !(0.0..=0.5).contains(&perturbation) {
        return Err(Error::Domain(format!(
            "perturbation must lie in [0, 0.5], got {perturbation}"
        )));
    }
    if trials < 10 {
        return Err(Error::Domain(format!("at least 10 trials are required, got {trials}")));
    }
    params.check(problem)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = move || 2.0 * rng.random::<f64>() - 1.0;
    let mut similarities = Vec::with_capacity(trials);
    let mut fidelities = Vec::with_capacity(trials);
    for _ in 0..trials {
        let trial = DesignParams {
            couplings: params
                .couplings
                .iter()
                .map(|c| c * (1.0 + perturbation * draw()))
                .collect(),
            ratio: params.ratio * (1.0 + perturbation * draw()),
            phase: params.phase + perturbation * PI * draw(),
        };
        let state = design_state(problem, &trial)?;
        let corr = correlation(&state)?;
        similarities.push(similarity(&corr, problem.target.correlation())?);
        fidelities.push(crate::analysis::best_fidelity(&state, problem.target.correlation())?);
    }
    let stats = |v: &[f64]| {
        (
            v.iter().copied().fold(f64::INFINITY, f64::min),
            v.iter().sum::<f64>() / v.len() as f64,
        )
    };
    let (min_similarity, mean_similarity) = stats(&similarities);
    let (min_fidelity, mean_fidelity) = stats(&fidelities);
    Ok(RobustnessStats {
        min_similarity,
        mean_similarity,
        min_fidelity,
        mean_fidelity,
        similarities,
        fidelities,
    })
}
