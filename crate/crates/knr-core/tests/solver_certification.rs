//! Certification of the master-equation integrator against states and
//! dynamics that are known exactly: the drive-free fixed point, the
//! textbook relaxation law, and the closed-form linear cavity at chi = 0.

use knr_core::analytic::{displaced_thermal_stats, linear_cavity_alpha};
use knr_core::fock::{coherent_state, fock_state, thermal_state, SystemParams};
use knr_core::lindblad::{evolve, EvolutionConfig};
use knr_core::observables::field_expectation;
use knr_core::pulse::PulseTrain;
use num_complex::Complex64 as C64;

fn drive_off() -> PulseTrain {
    PulseTrain::new(C64::ZERO, 0.4, 5.5, 2.0, None).unwrap()
}

#[test]
fn thermal_state_stays_put_for_twenty_lifetimes() {
    let dim = 25;
    let p = SystemParams::new(2.0, -1.0, 0.58, dim).unwrap();
    let initial = thermal_state(dim, 0.58).unwrap();
    let cfg = EvolutionConfig::new(20.0, 5e-4, 0.1, initial.clone());
    let out = evolve(&cfg, &p, &drive_off()).unwrap();
    let deviation = out.final_state.mat.sub(&initial.mat).max_abs();
    assert!(deviation < 1e-8, "fixed point drifted by {deviation:.3e}");
}

#[test]
fn vacuum_relaxes_on_the_rate_equation_curve() {
    // d<n>/dt = -gamma <n> + gamma n_th, so <n>(t) = n_th (1 - e^-t).
    let dim = 25;
    let n_th = 0.58;
    let p = SystemParams::new(0.0, 0.0, n_th, dim).unwrap();
    let cfg = EvolutionConfig::new(20.0, 2e-4, 0.05, fock_state(dim, 0).unwrap());
    let out = evolve(&cfg, &p, &drive_off()).unwrap();
    let mut worst = 0.0f64;
    for (t, rec) in out.times.iter().zip(out.records.iter()) {
        let expect = n_th * (1.0 - (-t).exp());
        worst = worst.max((rec.mean_n - expect).abs());
    }
    assert!(worst < 1e-4, "relaxation curve off by {worst:.3e}");
}

#[test]
fn any_initial_state_thermalizes_by_t20() {
    let dim = 25;
    let n_th = 0.58;
    let p = SystemParams::new(2.0, 0.0, n_th, dim).unwrap();
    let target = thermal_state(dim, n_th).unwrap();
    for initial in [fock_state(dim, 3).unwrap(), coherent_state(dim, C64::ONE).unwrap()] {
        let cfg = EvolutionConfig::new(20.0, 5e-4, 0.1, initial);
        let out = evolve(&cfg, &p, &drive_off()).unwrap();
        let mut worst = 0.0f64;
        for n in 0..dim {
            worst = worst.max((out.final_state.population_raw(n) - target.population_raw(n)).abs());
        }
        assert!(worst < 1e-6, "populations {worst:.3e} from thermal at t = 20");
    }
}

#[test]
fn driven_run_keeps_trace_hermiticity_and_positivity() {
    let dim = 16;
    let p = SystemParams::new(15.0, 0.0, 0.0, dim).unwrap();
    let train = PulseTrain::new(C64::new(6.0, 0.0), 0.4, 5.5, 2.0, None).unwrap();
    let mut cfg = EvolutionConfig::new(6.0, 1e-4, 0.01, fock_state(dim, 0).unwrap());
    cfg.check_positivity = true;
    let out = evolve(&cfg, &p, &train).unwrap();
    assert!(
        out.diagnostics.max_trace_drift_rate < 1e-8,
        "trace drift rate {:.3e}",
        out.diagnostics.max_trace_drift_rate
    );
    assert!(out.diagnostics.max_hermiticity_defect < 1e-10);
    let min_eig = out.diagnostics.min_eigenvalue.unwrap();
    assert!(min_eig >= -1e-8, "sampled state went indefinite: {min_eig:.3e}");
    // The drive actually did something.
    let peak = out.records.iter().map(|r| r.mean_n).fold(0.0, f64::max);
    assert!(peak > 0.5);
}

/// chi = 0 against the closed first-moment equation, for both pulse
/// configurations used throughout.
#[test]
fn linear_cavity_field_matches_quadrature_solution() {
    for (omega, delta, dim) in [(6.0, 0.0, 50), (12.0, -30.0, 24)] {
        let p = SystemParams::new(0.0, delta, 0.0, dim).unwrap();
        let train = PulseTrain::new(C64::new(omega, 0.0), 0.4, 5.5, 2.0, None).unwrap();
        let mut cfg = EvolutionConfig::new(9.0, 2e-4, 0.05, fock_state(dim, 0).unwrap());
        cfg.store_states = true;
        let out = evolve(&cfg, &p, &train).unwrap();
        let reference =
            linear_cavity_alpha(&p, &train, &out.times, cfg.dt_max, C64::ZERO).unwrap();
        let mut worst = 0.0f64;
        for (state, expect) in out.states.iter().zip(reference.alpha.iter()) {
            worst = worst.max((field_expectation(state) - expect).norm());
        }
        assert!(worst < 1e-6, "omega = {omega}: field deviates by {worst:.3e}");
    }
}

#[test]
fn displaced_thermal_statistics_match_closed_form() {
    // Thermal initial state, chi = 0: the state remains displaced thermal,
    // so <n> and g2 follow the closed-form moments of alpha(t).
    let dim = 50;
    let n_th = 0.58;
    let p = SystemParams::new(0.0, 0.0, n_th, dim).unwrap();
    let train = PulseTrain::new(C64::new(6.0, 0.0), 0.4, 5.5, 2.0, None).unwrap();
    let cfg = EvolutionConfig::new(9.0, 2e-4, 0.05, thermal_state(dim, n_th).unwrap());
    let out = evolve(&cfg, &p, &train).unwrap();
    let reference = linear_cavity_alpha(&p, &train, &out.times, cfg.dt_max, C64::ZERO).unwrap();
    let mut worst_n = 0.0f64;
    let mut worst_g2 = 0.0f64;
    for (rec, alpha) in out.records.iter().zip(reference.alpha.iter()) {
        let (mean, g2) = displaced_thermal_stats(*alpha, n_th).unwrap();
        worst_n = worst_n.max((rec.mean_n - mean).abs());
        if let (Some(got), Some(expect)) = (rec.g2, g2) {
            worst_g2 = worst_g2.max((got - expect).abs());
        }
    }
    assert!(worst_n < 1e-5, "mean photon number deviates by {worst_n:.3e}");
    assert!(worst_g2 < 1e-5, "g2 deviates by {worst_g2:.3e}");
}
