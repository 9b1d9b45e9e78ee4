//! Runs one experiment and writes its artifacts.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Result;
use qwalk_core::design::{design_state, optimize_start, select_best};
use qwalk_core::{
    correlation, marginal_evolution, nonclassicality, propagate_linear, robustness_sweep,
    sample_counts, schmidt_number, similarity, spdc_state, spdc_state_momentum,
    stabilization_threshold_linear, stabilization_threshold_nonlinear, BiphotonState,
    CorrelationMatrix, DesignProblem, DesignResult, InputSpec, LatticeSpec, MarginalSample,
    OptimizerSettings, PumpProfile, TargetState, WalkMode,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ConfigError, Format, LoadedConfig, Mode, ThresholdCase};
use crate::output::{self, HeatmapScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Verb {
    Simulate,
    Optimize,
    Thresholds,
    Robustness,
    Sample,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub format: Format,
    pub heatmap: Option<HeatmapScale>,
}

impl RunOptions {
    /// Output settings from the config file, with command-line overrides.
    pub fn resolve(
        cfg: &LoadedConfig,
        out: Option<PathBuf>,
        seed: Option<u64>,
        format: Option<Format>,
        heatmap: bool,
        log_heatmap: bool,
    ) -> Self {
        let o = &cfg.config.output;
        let heatmap = if log_heatmap || (o.log_heatmap && !heatmap) {
            Some(HeatmapScale::Log)
        } else if heatmap || o.heatmap {
            Some(HeatmapScale::Linear)
        } else {
            None
        };
        Self {
            out_dir: out
                .or_else(|| o.dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out")),
            seed: seed.or(cfg.config.seed).unwrap_or(0),
            format: format.unwrap_or(o.format),
            heatmap,
        }
    }
}

/// Files written by a run and the result document.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub result: Value,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        output::write_atomic(&path, bytes)?;
        self.files.push(path);
        Ok(())
    }

    fn matrix(&mut self, stem: &str, corr: &CorrelationMatrix, opts: &RunOptions) -> Result<()> {
        match opts.format {
            Format::Csv => self.put(&format!("{stem}.csv"), &output::matrix_csv(corr.values(), corr.origin())?)?,
            Format::Json => self.put(&format!("{stem}.json"), &output::matrix_json(corr.values(), corr.origin())?)?,
        }
        if let Some(scale) = opts.heatmap {
            self.put(&format!("{stem}.pgm"), &output::heatmap_pgm(corr.values(), scale))?;
        }
        Ok(())
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Linear => "linear",
        Mode::Nonlinear => "nonlinear",
        Mode::Momentum => "momentum",
        Mode::Optimize => "optimize",
        Mode::Robustness => "robustness",
        Mode::Thresholds => "thresholds",
    }
}

fn check_verb(verb: Verb, mode: Mode) -> Result<(), ConfigError> {
    let ok = match verb {
        Verb::Simulate | Verb::Sample => matches!(mode, Mode::Linear | Mode::Nonlinear | Mode::Momentum),
        Verb::Optimize => mode == Mode::Optimize,
        Verb::Robustness => mode == Mode::Robustness,
        Verb::Thresholds => mode == Mode::Thresholds,
    };
    if ok {
        Ok(())
    } else {
        Err(ConfigError {
            line: None,
            message: format!("verb {verb:?} cannot run a config with mode = \"{}\"", mode_name(mode)),
        })
    }
}

/// Runs `verb` on `cfg`, writing artifacts into `opts.out_dir`.
pub fn run(verb: Verb, cfg: &LoadedConfig, opts: &RunOptions) -> Result<RunReport> {
    check_verb(verb, cfg.config.mode)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut w = Writer {
        dir: &opts.out_dir,
        files: Vec::new(),
    };
    let mut result = match verb {
        Verb::Simulate => simulate(cfg, opts, &mut w, None)?,
        Verb::Sample => {
            let counts = cfg.config.sample.counts.0 as u64;
            simulate(cfg, opts, &mut w, Some(counts))?
        }
        Verb::Optimize => run_optimize(cfg, opts, &mut w)?,
        Verb::Robustness => run_robustness(cfg, opts, &mut w)?,
        Verb::Thresholds => run_thresholds(cfg, &mut w)?,
    };
    result["tool"] = json!("qwalk");
    result["version"] = json!(env!("CARGO_PKG_VERSION"));
    result["mode"] = json!(mode_name(cfg.config.mode));
    result["seed"] = json!(opts.seed);
    let mut doc = serde_json::to_vec_pretty(&result)?;
    doc.push(b'\n');
    w.put("result.json", &doc)?;

    let finished = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut log = format!("started_unix={started}\nfinished_unix={finished}\nverb={verb:?}\n");
    for f in &w.files {
        log.push_str(&format!("wrote={}\n", f.display()));
    }
    w.put("run.log", log.as_bytes())?;
    Ok(RunReport {
        files: w.files,
        result,
    })
}

fn lattice_json(spec: &LatticeSpec, walk: WalkMode) -> Value {
    json!({
        "n_waveguides": spec.n_waveguides(),
        "length": spec.length(),
        "couplings": spec.couplings(),
        "walk": match walk { WalkMode::Finite => "finite", WalkMode::AnalyticInfinite => "analytic" },
    })
}

fn pump_json(pump: &PumpProfile) -> Value {
    Value::Array(
        pump.iter()
            .map(|(n, a)| json!({"waveguide": n, "amplitude": a.norm(), "phase": a.arg()}))
            .collect(),
    )
}

fn metrics(state: &BiphotonState, target: Option<&TargetState>) -> Result<(CorrelationMatrix, Value)> {
    let corr = correlation(state)?.normalized();
    let report = nonclassicality(&corr);
    let mut v = json!({
        "schmidt": schmidt_number(state)?,
        "i_b_total": report.i_b_total,
        "i_cs_total": report.i_cs_total,
    });
    if let Some(t) = target {
        v["similarity"] = json!(similarity(&corr, t.correlation())?);
        v["best_fidelity"] = json!(qwalk_core::best_fidelity(state, t.correlation())?);
    }
    Ok((corr, v))
}

fn simulate(cfg: &LoadedConfig, opts: &RunOptions, w: &mut Writer<'_>, counts: Option<u64>) -> Result<Value> {
    let (spec, walk) = cfg.lattice()?;
    let target = cfg.optional_target()?;
    let mut extra = json!({ "lattice": lattice_json(&spec, walk) });
    let mut marginals: Option<Vec<MarginalSample>> = None;
    let state = match cfg.config.mode {
        Mode::Linear => {
            let input = cfg.input(&spec)?;
            extra["input"] = json!(format!("{input:?}"));
            propagate_linear(&input, &spec, walk)?
        }
        Mode::Nonlinear => {
            let pump = cfg.pump(&spec)?;
            let settings = cfg.spdc_settings(&spec, walk)?;
            let out = spdc_state(&pump, &spec, &settings)?;
            extra["pump"] = pump_json(&pump);
            extra["quadrature"] = json!({"points": out.quadrature_points, "residual": out.residual});
            if cfg.config.spdc.z_steps > 0 {
                marginals = Some(marginal_evolution(&pump, &spec, &settings, cfg.config.spdc.z_steps)?);
            }
            out.normalized
        }
        Mode::Momentum => {
            let pump = cfg.pump(&spec)?;
            let settings = cfg.spdc_settings(&spec, WalkMode::AnalyticInfinite)?;
            let k = spdc_state_momentum(&pump, &spec, &settings, cfg.config.spdc.k_grid.0)?;
            extra["pump"] = pump_json(&pump);
            extra["k_grid"] = json!(k.grid());
            let half = spec.origin().max(spec.n_waveguides() - 1 - spec.origin());
            let kcorr = CorrelationMatrix::from_values(k.values().abs_sqr(), 0)?;
            w.put("momentum.csv", &momentum_csv(&kcorr, &k)?)?;
            k.to_real_space(half)?
        }
        _ => unreachable!("checked by check_verb"),
    };
    let state = if walk == WalkMode::AnalyticInfinite || cfg.config.mode == Mode::Momentum {
        state.restricted(spec.labels())
    } else {
        state
    };
    let state = state.normalized()?;
    let (corr, m) = metrics(&state, target.as_ref())?;
    merge(&mut extra, m);
    w.matrix("correlation", &corr, opts)?;
    if let Some(samples) = marginals {
        w.put("marginals.csv", &output::marginals_csv(&samples)?)?;
    }
    if let Some(total) = counts {
        let drawn = sample_counts(&corr, total, opts.seed)?;
        w.put("counts.csv", &output::counts_csv(&drawn, corr.origin())?)?;
        extra["counts"] = json!(total);
    }
    Ok(extra)
}

fn momentum_csv(kcorr: &CorrelationMatrix, k: &qwalk_core::MomentumState) -> Result<Vec<u8>> {
    let g = k.grid();
    let mut header = vec!["k_s\\k_i".to_string()];
    header.extend((0..g).map(|j| format!("{}", k.wavevector(j))));
    let rows: Vec<Vec<String>> = (0..g)
        .map(|r| {
            let mut row = vec![format!("{}", k.wavevector(r))];
            row.extend(kcorr.values().row(r).iter().map(|v| format!("{v}")));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    output::table_csv(&header, &rows)
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

/// Multi-start optimization with the starts spread over the rayon pool. Each
/// start owns its random stream, so the result does not depend on scheduling.
pub fn optimize_parallel(problem: &DesignProblem, settings: &OptimizerSettings) -> qwalk_core::Result<DesignResult> {
    settings.validate()?;
    let results = (0..settings.starts)
        .into_par_iter()
        .map(|k| optimize_start(problem, settings, k))
        .collect::<qwalk_core::Result<Vec<_>>>()?;
    Ok(select_best(results).expect("at least one start"))
}

fn design_json(p: &qwalk_core::DesignParams) -> Value {
    json!({"couplings": p.couplings, "ratio": p.ratio, "phase": p.phase})
}

fn run_optimize(cfg: &LoadedConfig, opts: &RunOptions, w: &mut Writer<'_>) -> Result<Value> {
    let problem = cfg.design_problem()?;
    let settings = cfg.optimizer_settings(opts.seed);
    let best = optimize_parallel(&problem, &settings)?;
    let state = design_state(&problem, &best.params)?;
    let (corr, m) = metrics(&state, Some(&problem.target))?;
    w.matrix("correlation", &corr, opts)?;
    w.put("trace.csv", &output::trace_csv(&best.trace)?)?;
    let mut v = json!({
        "params": design_json(&best.params),
        "starts": best.starts,
        "best_start": best.start_index,
        "converged": best.converged,
        "iterations": best.trace.len() - 1,
        "optimizer": {
            "max_iters": settings.max_iters,
            "fd_epsilon": settings.fd_epsilon,
            "initial_step": settings.initial_step,
            "quadrature_points": problem.quadrature_points,
        },
    });
    merge(&mut v, m);
    Ok(v)
}

fn run_robustness(cfg: &LoadedConfig, opts: &RunOptions, w: &mut Writer<'_>) -> Result<Value> {
    let problem = cfg.design_problem()?;
    let (params, perturbation, trials) = cfg.robustness()?;
    let stats = robustness_sweep(&problem, &params, perturbation, trials, opts.seed)?;
    let rows: Vec<Vec<String>> = stats
        .similarities
        .iter()
        .zip(&stats.fidelities)
        .enumerate()
        .map(|(k, (s, f))| vec![k.to_string(), format!("{s}"), format!("{f}")])
        .collect();
    w.put("robustness.csv", &output::table_csv(&["trial", "similarity", "fidelity"], &rows)?)?;
    let state = design_state(&problem, &params)?;
    let (corr, m) = metrics(&state, Some(&problem.target))?;
    w.matrix("correlation", &corr, opts)?;
    let mut v = json!({
        "params": design_json(&params),
        "perturbation": perturbation,
        "trials": trials,
        "min_similarity": stats.min_similarity,
        "mean_similarity": stats.mean_similarity,
        "min_fidelity": stats.min_fidelity,
        "mean_fidelity": stats.mean_fidelity,
    });
    merge(&mut v, m);
    Ok(v)
}

/// Stabilization depth `CL*` of one named scenario.
pub fn threshold(case: ThresholdCase, coupling: f64) -> qwalk_core::Result<f64> {
    use qwalk_core::Complex64;
    match case {
        ThresholdCase::LinearSeparable => stabilization_threshold_linear(&InputSpec::SeparableSameWaveguide(0), coupling),
        ThresholdCase::LinearPlus => stabilization_threshold_linear(&InputSpec::PathEntangledPlus(0), coupling),
        ThresholdCase::LinearMinus => stabilization_threshold_linear(&InputSpec::PathEntangledMinus(0), coupling),
        ThresholdCase::SpdcSingle => stabilization_threshold_nonlinear(&PumpProfile::single(0), coupling),
        ThresholdCase::SpdcInPhase => stabilization_threshold_nonlinear(
            &PumpProfile::neighbours(0, Complex64::new(1.0, 0.0))?,
            coupling,
        ),
        ThresholdCase::SpdcOutOfPhase => stabilization_threshold_nonlinear(
            &PumpProfile::neighbours(0, Complex64::new(-1.0, 0.0))?,
            coupling,
        ),
    }
}

fn run_thresholds(cfg: &LoadedConfig, w: &mut Writer<'_>) -> Result<Value> {
    let t = &cfg.config.thresholds;
    let values = t
        .cases
        .par_iter()
        .map(|&c| threshold(c, t.coupling.0).map(|v| (c, v)))
        .collect::<qwalk_core::Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = values.iter().map(|(c, v)| vec![c.name().to_string(), format!("{v}")]).collect();
    w.put("thresholds.csv", &output::table_csv(&["case", "cl"], &rows)?)?;
    let map: serde_json::Map<String, Value> = values.iter().map(|(c, v)| (c.name().to_string(), json!(v))).collect();
    Ok(json!({ "coupling": t.coupling.0, "thresholds": map }))
}

/// Process exit status for an error: 2 for configuration problems, 3 for
/// numerical failures, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<qwalk_core::Error>() {
        Some(qwalk_core::Error::Config(_) | qwalk_core::Error::Domain(_) | qwalk_core::Error::DimensionMismatch { .. }) => 2,
        Some(_) => 3,
        None => 1,
    }
}
