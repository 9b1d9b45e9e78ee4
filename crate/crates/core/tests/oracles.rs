mod common;

use std::f64::consts::{FRAC_PI_4, TAU};

use common::{c, dense_hamiltonian, expm_i, spdc_by_ode};
use qwalk_core::design::{fd_gradient, initial_params};
use qwalk_core::{
    propagate_linear, propagator, single_photon_amplitude_infinite, spdc_state,
    spdc_state_momentum, BiphotonState, CMatrix, Complex64, DesignProblem, InputSpec,
    LatticeSpec, Photons, PumpProfile, SpdcSettings, TargetKind, TargetState, WalkMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn propagator_matches_series_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let n = rng.random_range(2..15);
        let k: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.1..8.0)).collect();
        let spec = LatticeSpec::new(n, k, 1.0).unwrap();
        let z = rng.random_range(0.0..2.5);
        let oracle = expm_i(&dense_hamiltonian(&spec), z);
        let u = propagator(&spec, z).unwrap();
        assert!(u.matrix().max_abs_diff(&oracle) < 1e-11);
    }
}

#[test]
fn finite_propagator_matches_bessel_far_from_edges() {
    for (n, cl) in [(21usize, 1.0), (41, 2.0), (61, 6.0), (101, 9.9)] {
        assert!(2.0 * cl < 0.4 * n as f64);
        let spec = LatticeSpec::uniform(n, 1.0, cl).unwrap();
        let u = propagator(&spec, cl).unwrap();
        let o = spec.origin();
        for r in 0..n {
            let label = r as i64 - o as i64;
            let expected = single_photon_amplitude_infinite(label as i32, 1.0, cl);
            assert!((u.matrix()[(r, o)] - expected).norm() < 1e-8, "N={n} n={label}");
        }
    }
}

#[test]
fn two_waveguide_bunching_probability() {
    // One indistinguishable photon in each guide of a directional coupler.
    let amp = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let input = BiphotonState::new(
        CMatrix::from_fn(2, 2, |r, col| if r != col { amp } else { c(0.0, 0.0) }),
        0,
        Photons::Indistinguishable,
    )
    .unwrap();
    for cl in [0.0, 0.1, 0.3, FRAC_PI_4, 1.0, 2.2, 5.0] {
        let spec = LatticeSpec::uniform(2, 1.0, cl.max(1e-12)).unwrap();
        let out = propagate_linear(&InputSpec::Custom(input.clone()), &spec, WalkMode::Finite).unwrap();
        let bunched = out.amplitude(0, 0).norm_sqr() + out.amplitude(1, 1).norm_sqr();
        let expected = (2.0 * cl).sin().powi(2);
        assert!((bunched - expected).abs() < 1e-10, "CL={cl}: {bunched} vs {expected}");
    }
}

#[test]
fn finite_spdc_matches_ode_integration() {
    let table_w = LatticeSpec::symmetric(&[3.00, 9.58, 6.22, 7.68], 1.0).unwrap();
    let pump = PumpProfile::symmetric_three(2.4, std::f64::consts::PI).unwrap();
    let uniform = LatticeSpec::uniform(7, 1.3, 2.0).unwrap();
    let cases = [
        (table_w, pump.clone(), 0.0),
        (uniform.clone(), PumpProfile::single(1), 0.0),
        (uniform, pump, 0.7),
    ];
    for (spec, pump, delta) in cases {
        let settings = SpdcSettings::recommended(&spec, WalkMode::Finite)
            .with_phase_mismatch(delta)
            .unwrap();
        let out = spdc_state(&pump, &spec, &settings).unwrap();
        let terms: Vec<(i64, Complex64)> = pump.iter().collect();
        let oracle = spdc_by_ode(&spec, &terms, delta, 8000);
        let scale = oracle.norm_sqr().sqrt();
        let err = out.raw.amplitudes().max_abs_diff(&oracle) / scale;
        assert!(err < 1e-8, "relative error {err}");
    }
}

#[test]
fn momentum_form_matches_real_space() {
    let pumps = [
        PumpProfile::single(0),
        PumpProfile::neighbours(0, c(1.0, 0.0)).unwrap(),
        PumpProfile::neighbours(0, c(-1.0, 0.0)).unwrap(),
        PumpProfile::symmetric_three(0.6, 1.1).unwrap(),
    ];
    for cl in [0.5, 2.0, 5.0] {
        let spec = LatticeSpec::uniform(3, 1.0, cl).unwrap();
        let settings = SpdcSettings::recommended(&spec, WalkMode::AnalyticInfinite);
        for pump in &pumps {
            let real = spdc_state(pump, &spec, &settings).unwrap();
            let k = spdc_state_momentum(pump, &spec, &settings, 256).unwrap();
            let back = k.to_real_space(real.raw.origin()).unwrap();
            let err = back.amplitudes().max_abs_diff(real.raw.amplitudes());
            assert!(err < 1e-8, "CL={cl}: {err}");
        }
    }
}

/// Two mutually incoherent classical beams: the same-guide entry is the
/// zero-delay correlation behind a balanced splitter, ⟨I²⟩/2.
fn classical_margins(spec: &LatticeSpec, a: i64, b: i64, samples: usize, seed: u64) -> Vec<(f64, f64)> {
    let u = propagator(spec, spec.length()).unwrap();
    let (pa, pb) = (spec.position(a).unwrap(), spec.position(b).unwrap());
    let n = spec.n_waveguides();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let intensities: Vec<Vec<f64>> = (0..samples)
        .map(|_| {
            let (ta, tb) = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
            (0..n)
                .map(|q| {
                    (u.matrix()[(q, pa)] * Complex64::cis(ta) + u.matrix()[(q, pb)] * Complex64::cis(tb))
                        .norm_sqr()
                })
                .collect()
        })
        .collect();
    let m = samples as f64;
    let mean = |f: &dyn Fn(&Vec<f64>) -> f64| intensities.iter().map(f).sum::<f64>() / m;
    let mut out = Vec::new();
    for s in 0..n {
        for i in 0..n {
            if s == i {
                continue;
            }
            let g_si = mean(&|v| v[s] * v[i]);
            let d_s = mean(&|v| v[s] * v[s] / 2.0);
            let d_i = mean(&|v| v[i] * v[i] / 2.0);
            let margin = g_si - 2.0 / 3.0 * (d_s * d_i).sqrt();
            // Delta-method standard error of the margin.
            let (ws, wi) = ((d_i / d_s).sqrt() / 3.0, (d_s / d_i).sqrt() / 3.0);
            let lin: Vec<f64> = intensities
                .iter()
                .map(|v| v[s] * v[i] - ws * v[s] * v[s] / 2.0 - wi * v[i] * v[i] / 2.0)
                .collect();
            let lm = lin.iter().sum::<f64>() / m;
            let var = lin.iter().map(|x| (x - lm).powi(2)).sum::<f64>() / (m - 1.0);
            out.push((margin, (var / m).sqrt()));
        }
    }
    out
}

#[test]
fn classical_light_respects_bromberg_bound() {
    let cases = [
        (LatticeSpec::uniform(2, 1.0, FRAC_PI_4).unwrap(), 0, 1),
        (LatticeSpec::uniform(9, 1.0, 1.0).unwrap(), 0, 1),
        (LatticeSpec::uniform(9, 1.0, 3.3).unwrap(), -1, 2),
        (LatticeSpec::symmetric(&[3.0, 9.58, 6.22, 7.68], 1.0).unwrap(), 0, 0),
    ];
    for (k, (spec, a, b)) in cases.into_iter().enumerate() {
        let b = if a == b { a + 1 } else { b };
        for (margin, se) in classical_margins(&spec, a, b, 10_000, k as u64) {
            assert!(margin >= -5.0 * se, "case {k}: margin {margin}, se {se}");
        }
    }
}

#[test]
fn coupler_saturates_classical_bound() {
    // At the balanced point the classical margin vanishes, so the bound is tight.
    let spec = LatticeSpec::uniform(2, 1.0, FRAC_PI_4).unwrap();
    let (margin, se) = classical_margins(&spec, 0, 1, 10_000, 9)[0];
    assert!(margin.abs() <= 5.0 * se + 1e-12, "{margin} ± {se}");
}

#[test]
fn finite_difference_gradient_is_second_order() {
    let problem = DesignProblem::new(TargetState::new(TargetKind::WState, 9).unwrap());
    let h = 4e-3;
    let mut checked = 0;
    for k in 0..10 {
        let p = initial_params(&problem, 2024, k);
        let g1 = fd_gradient(&problem, &p, h).unwrap();
        let g2 = fd_gradient(&problem, &p, h / 2.0).unwrap();
        let g3 = fd_gradient(&problem, &p, h / 4.0).unwrap();
        for j in 0..g1.len() {
            let (e1, e2) = (g1[j] - g2[j], g2[j] - g3[j]);
            if e1.abs() < 1e-9 {
                continue;
            }
            let ratio = e1 / e2;
            assert!((2.0..=8.0).contains(&ratio), "point {k}, component {j}: ratio {ratio}");
            checked += 1;
        }
        // The default step agrees with the extrapolated derivative.
        let fine = fd_gradient(&problem, &p, 1e-4).unwrap();
        for j in 0..g1.len() {
            let extrapolated = (4.0 * g3[j] - g2[j]) / 3.0;
            assert!((fine[j] - extrapolated).abs() < 1e-6, "{} vs {}", fine[j], extrapolated);
        }
    }
    assert!(checked >= 30, "only {checked} components had measurable truncation error");
}
