//! Experiment configuration files (TOML).
//!
//! Unknown keys are rejected and every value is range-checked while parsing, so
//! errors point at the offending line. Checks that involve several fields are
//! reported against the line of the section they belong to.

use std::fmt;
use std::ops::Range;
use std::path::Path;

use qwalk_core::design::{Bounds, DesignParams, DesignProblem, OptimizerSettings};
use qwalk_core::{
    BiphotonState, Complex64, InputSpec, LatticeSpec, Photons, PumpProfile, SpdcSettings,
    TargetKind, TargetState, WalkMode,
};
use serde::Deserialize;
use toml::Spanned;

/// A configuration problem, with the 1-based line it refers to when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config error at line {line}: {}", self.message),
            None => write!(f, "config error: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

macro_rules! checked_newtype {
    ($(#[$meta:meta])* $name:ident($inner:ty as $repr:literal), $check:expr, $what:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
        #[serde(try_from = $repr)]
        pub struct $name(pub $inner);

        impl TryFrom<$inner> for $name {
            type Error = String;
            fn try_from(v: $inner) -> Result<Self, String> {
                let check: fn($inner) -> bool = $check;
                if check(v) {
                    Ok(Self(v))
                } else {
                    Err(format!(concat!("expected ", $what, ", got {}"), v))
                }
            }
        }
    };
}

checked_newtype!(
    /// Finite and strictly positive.
    Positive(f64 as "f64"), |v| v.is_finite() && v > 0.0, "a positive number"
);
checked_newtype!(
    /// Finite and non-negative.
    NonNegative(f64 as "f64"), |v| v.is_finite() && v >= 0.0, "a non-negative number"
);
checked_newtype!(
    /// Any finite number.
    Finite(f64 as "f64"), |v| v.is_finite(), "a finite number"
);
checked_newtype!(
    /// At least one.
    Count(usize as "usize"), |v| v >= 1, "a count of at least 1"
);
checked_newtype!(
    /// Number of quadrature nodes; 0 selects an automatic rule.
    Points(usize as "usize"), |v| v == 0 || v >= 16, "0 (automatic) or at least 16 points"
);
checked_newtype!(
    /// Relative perturbation strength.
    Fraction(f64 as "f64"), |v| (0.0..=0.5).contains(&v), "a fraction in [0, 0.5]"
);
checked_newtype!(
    /// Finite-difference step.
    Step(f64 as "f64"), |v| v > 0.0 && v < 0.1, "a step in (0, 0.1)"
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Linear,
    Nonlinear,
    Momentum,
    Optimize,
    Robustness,
    Thresholds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Walk {
    #[default]
    Finite,
    Analytic,
}

impl From<Walk> for WalkMode {
    fn from(w: Walk) -> Self {
        match w {
            Walk::Finite => WalkMode::Finite,
            Walk::Analytic => WalkMode::AnalyticInfinite,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    /// Required with `coupling`; implied by `couplings` and `symmetric`.
    pub n_waveguides: Option<Count>,
    /// Array length `L`; with unit couplings this is the walk depth `CL`.
    pub length: Positive,
    /// Uniform coupling.
    pub coupling: Option<Positive>,
    /// All `N − 1` couplings, left to right.
    pub couplings: Option<Vec<Positive>>,
    /// Mirror-symmetric profile given from the centre outward.
    pub symmetric: Option<Vec<Positive>>,
    #[serde(default)]
    pub walk: Walk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    Separable,
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhotonKind {
    #[default]
    SignalIdler,
    Indistinguishable,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub kind: InputKind,
    #[serde(default)]
    pub waveguide: i64,
    #[serde(default)]
    pub photons: PhotonKind,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub waveguide: i64,
    /// Magnitude `|Aₙ|`.
    pub amplitude: NonNegative,
    /// Phase of `Aₙ` in radians.
    #[serde(default = "zero_phase")]
    pub phase: Finite,
}

fn zero_phase() -> Finite {
    Finite(0.0)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub beam: Vec<BeamConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpdcConfig {
    #[serde(default = "default_points")]
    pub quadrature_points: Points,
    #[serde(default = "unit")]
    pub gamma: Positive,
    #[serde(default = "zero_phase")]
    pub phase_mismatch: Finite,
    /// Wavevector grid for the momentum form.
    #[serde(default = "default_k_grid")]
    pub k_grid: Count,
    /// Rows of the marginal-evolution table; 0 disables it.
    #[serde(default)]
    pub z_steps: usize,
}

fn default_points() -> Points {
    Points(0)
}

fn unit() -> Positive {
    Positive(1.0)
}

fn default_k_grid() -> Count {
    Count(256)
}

impl Default for SpdcConfig {
    fn default() -> Self {
        Self {
            quadrature_points: default_points(),
            gamma: unit(),
            phase_mismatch: zero_phase(),
            k_grid: default_k_grid(),
            z_steps: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetName {
    W,
    Anti,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub kind: TargetName,
    #[serde(default = "nine")]
    pub n_waveguides: Count,
}

fn nine() -> Count {
    Count(9)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub coupling: Option<[Positive; 2]>,
    pub ratio: Option<[Positive; 2]>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_starts")]
    pub starts: Count,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default = "default_fd")]
    pub fd_epsilon: Step,
    #[serde(default = "unit")]
    pub initial_step: Positive,
    pub bounds: Option<BoundsConfig>,
}

fn default_starts() -> Count {
    Count(20)
}

fn default_iters() -> usize {
    400
}

fn default_fd() -> Step {
    Step(1e-4)
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: default_starts(),
            max_iters: default_iters(),
            fd_epsilon: default_fd(),
            initial_step: unit(),
            bounds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessConfig {
    #[serde(default = "default_perturbation")]
    pub perturbation: Fraction,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Design to perturb: couplings from the centre outward.
    pub couplings: Vec<Positive>,
    pub ratio: NonNegative,
    pub phase: Finite,
}

fn default_perturbation() -> Fraction {
    Fraction(0.1)
}

fn default_trials() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdCase {
    LinearSeparable,
    LinearPlus,
    LinearMinus,
    SpdcSingle,
    SpdcInPhase,
    SpdcOutOfPhase,
}

impl ThresholdCase {
    pub const ALL: [ThresholdCase; 6] = [
        ThresholdCase::LinearSeparable,
        ThresholdCase::SpdcSingle,
        ThresholdCase::LinearPlus,
        ThresholdCase::SpdcInPhase,
        ThresholdCase::LinearMinus,
        ThresholdCase::SpdcOutOfPhase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ThresholdCase::LinearSeparable => "linear-separable",
            ThresholdCase::LinearPlus => "linear-plus",
            ThresholdCase::LinearMinus => "linear-minus",
            ThresholdCase::SpdcSingle => "spdc-single",
            ThresholdCase::SpdcInPhase => "spdc-in-phase",
            ThresholdCase::SpdcOutOfPhase => "spdc-out-of-phase",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsConfig {
    #[serde(default = "all_cases")]
    pub cases: Vec<ThresholdCase>,
    #[serde(default = "unit")]
    pub coupling: Positive,
}

fn all_cases() -> Vec<ThresholdCase> {
    ThresholdCase::ALL.to_vec()
}

impl Default for ThresholdsConfig {
    fn default() -> Self {
        Self {
            cases: all_cases(),
            coupling: unit(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    #[serde(default = "default_counts")]
    pub counts: Count,
}

fn default_counts() -> Count {
    Count(100_000)
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            counts: default_counts(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub heatmap: bool,
    #[serde(default)]
    pub log_heatmap: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: Option<u64>,
    pub lattice: Option<Spanned<LatticeConfig>>,
    pub input: Option<Spanned<InputConfig>>,
    pub pump: Option<Spanned<PumpConfig>>,
    #[serde(default)]
    pub spdc: SpdcConfig,
    pub target: Option<Spanned<TargetConfig>>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    pub robustness: Option<Spanned<RobustnessConfig>>,
    #[serde(default)]
    pub thresholds: ThresholdsConfig,
    #[serde(default)]
    pub sample: SampleConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A parsed configuration together with its source text, for line lookups.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    source: String,
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

impl LoadedConfig {
    pub fn parse(source: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(source).map_err(|e| ConfigError {
            line: e.span().map(|s| line_of(source, s.start)),
            message: e.message().trim().to_string(),
        })?;
        Ok(Self {
            config,
            source: source.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let source = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&source)
    }

    fn error_at(&self, span: Range<usize>, message: impl fmt::Display) -> ConfigError {
        ConfigError {
            line: Some(line_of(&self.source, span.start)),
            message: message.to_string(),
        }
    }

    fn section<'a, T>(&self, value: &'a Option<Spanned<T>>, name: &str) -> Result<(&'a T, Range<usize>), ConfigError> {
        value
            .as_ref()
            .map(|s| (s.get_ref(), s.span()))
            .ok_or_else(|| ConfigError {
                line: None,
                message: format!("mode {:?} requires a [{name}] section", self.config.mode),
            })
    }

    pub fn lattice(&self) -> Result<(LatticeSpec, WalkMode), ConfigError> {
        let (l, span) = self.section(&self.config.lattice, "lattice")?;
        let length = l.length.0;
        let spec = match (&l.coupling, &l.couplings, &l.symmetric) {
            (Some(c), None, None) => {
                let n = l.n_waveguides.ok_or_else(|| {
                    self.error_at(span.clone(), "a uniform lattice needs n_waveguides")
                })?;
                LatticeSpec::uniform(n.0, c.0, length)
            }
            (None, Some(k), None) => {
                let n = l.n_waveguides.map_or(k.len() + 1, |n| n.0);
                LatticeSpec::new(n, k.iter().map(|v| v.0).collect(), length)
            }
            (None, None, Some(k)) => {
                let spec = LatticeSpec::symmetric(&k.iter().map(|v| v.0).collect::<Vec<_>>(), length);
                if let (Ok(s), Some(n)) = (&spec, l.n_waveguides) {
                    if s.n_waveguides() != n.0 {
                        return Err(self.error_at(
                            span,
                            format!("symmetric profile gives {} waveguides, not {}", s.n_waveguides(), n.0),
                        ));
                    }
                }
                spec
            }
            _ => {
                return Err(self.error_at(
                    span,
                    "give exactly one of coupling, couplings or symmetric",
                ))
            }
        }
        .map_err(|e| self.error_at(span, e))?;
        Ok((spec, l.walk.into()))
    }

    pub fn input(&self, spec: &LatticeSpec) -> Result<InputSpec, ConfigError> {
        let (i, span) = self.section(&self.config.input, "input")?;
        let base = match i.kind {
            InputKind::Separable => InputSpec::SeparableSameWaveguide(i.waveguide),
            InputKind::Plus => InputSpec::PathEntangledPlus(i.waveguide),
            InputKind::Minus => InputSpec::PathEntangledMinus(i.waveguide),
        };
        if i.photons == PhotonKind::SignalIdler {
            base.to_state(spec).map_err(|e| self.error_at(span.clone(), e))?;
            return Ok(base);
        }
        let state = BiphotonState::from_terms(spec, &base.terms(), Photons::Indistinguishable)
            .map_err(|e| self.error_at(span, e))?;
        Ok(InputSpec::Custom(state))
    }

    pub fn pump(&self, spec: &LatticeSpec) -> Result<PumpProfile, ConfigError> {
        let (p, span) = self.section(&self.config.pump, "pump")?;
        let pump = PumpProfile::new(
            p.beam
                .iter()
                .map(|b| (b.waveguide, Complex64::from_polar(b.amplitude.0, b.phase.0))),
        )
        .map_err(|e| self.error_at(span.clone(), e))?;
        if let Some((n, _)) = pump.iter().find(|(n, _)| spec.position(*n).is_none()) {
            return Err(self.error_at(
                span,
                format!("pumped waveguide {n} lies outside the array {:?}", spec.labels()),
            ));
        }
        Ok(pump)
    }

    pub fn spdc_settings(&self, spec: &LatticeSpec, walk: WalkMode) -> Result<SpdcSettings, ConfigError> {
        let s = &self.config.spdc;
        let mut settings = SpdcSettings::recommended(spec, walk);
        if s.quadrature_points.0 > 0 {
            settings.quadrature_points = s.quadrature_points.0;
        }
        settings
            .with_gamma(s.gamma.0)
            .and_then(|st| st.with_phase_mismatch(s.phase_mismatch.0))
            .map_err(|e| ConfigError {
                line: None,
                message: e.to_string(),
            })
    }

    pub fn target(&self) -> Result<TargetState, ConfigError> {
        let (t, span) = self.section(&self.config.target, "target")?;
        let kind = match t.kind {
            TargetName::W => TargetKind::WState,
            TargetName::Anti => TargetKind::AntiState,
        };
        TargetState::new(kind, t.n_waveguides.0).map_err(|e| self.error_at(span, e))
    }

    /// Target only if a `[target]` section is present.
    pub fn optional_target(&self) -> Result<Option<TargetState>, ConfigError> {
        match self.config.target {
            Some(_) => self.target().map(Some),
            None => Ok(None),
        }
    }

    pub fn design_problem(&self) -> Result<DesignProblem, ConfigError> {
        let problem = DesignProblem::new(self.target()?);
        let Some(b) = &self.config.optimizer.bounds else {
            return Ok(problem);
        };
        let defaults = Bounds::default();
        let pair = |p: Option<[Positive; 2]>, d: (f64, f64)| p.map_or(d, |[lo, hi]| (lo.0, hi.0));
        problem
            .with_bounds(Bounds {
                coupling: pair(b.coupling, defaults.coupling),
                ratio: pair(b.ratio, defaults.ratio),
            })
            .map_err(|e| ConfigError {
                line: None,
                message: format!("[optimizer.bounds]: {e}"),
            })
    }

    pub fn optimizer_settings(&self, seed: u64) -> OptimizerSettings {
        let o = &self.config.optimizer;
        OptimizerSettings {
            starts: o.starts.0,
            max_iters: o.max_iters,
            fd_epsilon: o.fd_epsilon.0,
            seed,
            initial_step: o.initial_step.0,
        }
    }

    pub fn robustness(&self) -> Result<(DesignParams, f64, usize), ConfigError> {
        let (r, span) = self.section(&self.config.robustness, "robustness")?;
        if r.trials < 10 {
            return Err(self.error_at(span, format!("at least 10 trials are required, got {}", r.trials)));
        }
        let params = DesignParams {
            couplings: r.couplings.iter().map(|v| v.0).collect(),
            ratio: r.ratio.0,
            phase: r.phase.0,
        };
        Ok((params, r.perturbation.0, r.trials))
    }
}
