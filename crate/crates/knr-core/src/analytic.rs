//! Closed-form reference solutions used to certify the solvers.
//!
//! At `chi = 0` the equation of motion for the field amplitude closes on
//! itself: `d<a>/dt = -(i delta + gamma/2) <a> - i Omega f(t)`, and an
//! initially thermal state stays a displaced thermal state, whose photon
//! statistics are known exactly. That gives two independent checks of the
//! full solvers, plus a pulse-area estimate for the resonant two-level
//! Rabi regime.

use alloc::vec::Vec;
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::fock::SystemParams;
use crate::observables::G2_UNDEFINED_THRESHOLD;
use crate::pulse::{validate_selectivity, PulseTrain};
use crate::Result;

/// Field amplitude of the linear (`chi = 0`) cavity on a sample grid.
#[derive(Debug, Clone)]
pub struct LinearCavitySolution {
    pub times: Vec<f64>,
    pub alpha: Vec<C64>,
    pub n_th: f64,
}

/// Integrate the closed first-moment equation of the linear cavity with
/// the integrating-factor form
///
/// ```text
/// alpha(t+h) = e^(-lambda h) alpha(t) - i Omega Int_0^h e^(-lambda (h-s)) f(t+s) ds
/// ```
///
/// evaluating the integral by composite Simpson quadrature with substeps
/// no longer than `dt_max / 10`. This shares no code with the
/// density-matrix integrator.
pub fn linear_cavity_alpha(
    p: &SystemParams,
    train: &PulseTrain,
    times: &[f64],
    dt_max: f64,
    alpha0: C64,
) -> Result<LinearCavitySolution> {
    p.validate()?;
    train.validate()?;
    if p.chi != 0.0 {
        return Err(Error::InvalidParameter {
            name: "chi",
            value: p.chi,
            reason: "the linear-cavity solution only exists at chi = 0",
        });
    }
    if dt_max.is_nan() || dt_max <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "dt_max",
            value: dt_max,
            reason: "quadrature step must be > 0",
        });
    }
    let lambda = C64::new(0.5 * p.gamma, p.delta);
    let minus_i_omega = C64::new(0.0, -1.0) * train.omega;
    let target = dt_max / 10.0;

    let mut alpha = Vec::with_capacity(times.len());
    let mut current = alpha0;
    alpha.push(current);
    for w in times.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let mut m = (h / target).ceil() as usize;
        if m % 2 == 1 {
            m += 1;
        }
        let m = m.max(2);
        let step = h / m as f64;
        // Simpson weights 1, 4, 2, 4, ..., 4, 1.
        let mut integral = C64::ZERO;
        for k in 0..=m {
            let s = k as f64 * step;
            let weight = if k == 0 || k == m {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let g = (-lambda * (h - s)).exp() * train.envelope(t + s);
            integral += weight * g;
        }
        integral *= step / 3.0;
        current = (-lambda * h).exp() * current + minus_i_omega * integral;
        alpha.push(current);
    }
    Ok(LinearCavitySolution { times: times.to_vec(), alpha, n_th: p.n_th })
}

/// Exact moments of a displaced thermal state: mean photon number and
/// zero-delay `g2`.
///
/// ```text
/// <n> = |alpha|^2 + n_th
/// g2  = 1 + (n_th^2 + 2 n_th |alpha|^2) / <n>^2
/// ```
pub fn displaced_thermal_stats(alpha: C64, n_th: f64) -> Result<(f64, Option<f64>)> {
    if n_th.is_nan() || n_th < 0.0 {
        return Err(Error::InvalidParameter {
            name: "n_th",
            value: n_th,
            reason: "thermal occupation must be >= 0",
        });
    }
    let coherent = alpha.norm_sqr();
    let mean = coherent + n_th;
    if mean < G2_UNDEFINED_THRESHOLD {
        return Ok((mean, None));
    }
    let g2 = 1.0 + (n_th * n_th + 2.0 * n_th * coherent) / (mean * mean);
    Ok((mean, Some(g2)))
}

/// Pulse-area prediction for the resonant, strongly selective regime in
/// which only `|0>` and `|1>` take part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiPrediction {
    /// Integrated pulse area `theta = 2 |Omega| T sqrt(pi)`.
    pub pulse_area: f64,
    /// Expected population oscillations per pulse, `theta / 2 pi`.
    pub cycles_per_pulse: f64,
    /// Whether the selectivity inequalities actually hold at this
    /// operating point; the prediction is advisory when they do not.
    pub selective: bool,
}

/// Predict how many population oscillations one pulse drives. Meant for
/// `delta = 0` and `chi T >> 1`; the count is compared against extrema of
/// the solver output with a tolerance of one full cycle.
pub fn two_level_rabi_check(p: &SystemParams, train: &PulseTrain) -> RabiPrediction {
    let area = 2.0 * train.omega.norm() * train.pulse_area();
    RabiPrediction {
        pulse_area: area,
        cycles_per_pulse: area / core::f64::consts::TAU,
        selective: validate_selectivity(train, p).all_satisfied() && p.delta == 0.0,
    }
}

/// Count local extrema of a sampled series, ignoring wiggles smaller than
/// `prominence`. A turning point is registered once the series has moved
/// away from it by at least `prominence`.
pub fn count_extrema(values: &[f64], prominence: f64) -> usize {
    let mut count = 0usize;
    let mut direction = 0i8;
    let Some(&first) = values.first() else {
        return 0;
    };
    let mut pivot = first;
    for &v in &values[1..] {
        match direction {
            0 => {
                if v - pivot >= prominence {
                    direction = 1;
                    pivot = v;
                } else if pivot - v >= prominence {
                    direction = -1;
                    pivot = v;
                }
            }
            1 => {
                if v > pivot {
                    pivot = v;
                } else if pivot - v >= prominence {
                    count += 1;
                    direction = -1;
                    pivot = v;
                }
            }
            _ => {
                if v < pivot {
                    pivot = v;
                } else if v - pivot >= prominence {
                    count += 1;
                    direction = 1;
                    pivot = v;
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t_end: f64, dt: f64) -> Vec<f64> {
        let n = (t_end / dt).round() as usize;
        (0..=n).map(|k| k as f64 * dt).collect()
    }

    #[test]
    fn undriven_amplitude_decays_at_half_gamma() {
        let p = SystemParams::new(0.0, 0.0, 0.0, 4).unwrap();
        let train = PulseTrain::new(C64::ZERO, 0.4, 5.5, 2.0, None).unwrap();
        let times = grid(6.0, 0.05);
        let sol = linear_cavity_alpha(&p, &train, &times, 1e-3, C64::ONE).unwrap();
        for (t, a) in times.iter().zip(sol.alpha.iter()) {
            assert!((a.re - (-0.5 * t).exp()).abs() < 1e-9);
            assert!(a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn flat_drive_steady_state() {
        // A pulse much longer than the run emulates constant f = 1;
        // the stationary amplitude is -2 i Omega / gamma.
        let omega = C64::new(0.7, 0.0);
        let p = SystemParams::new(0.0, 0.0, 0.0, 4).unwrap();
        let train = PulseTrain::new(omega, 1e6, 1e7, 0.0, Some(1)).unwrap();
        let times = grid(30.0, 0.05);
        let sol = linear_cavity_alpha(&p, &train, &times, 1e-3, C64::ZERO).unwrap();
        let expect = C64::new(0.0, -2.0) * omega;
        assert!((sol.alpha.last().unwrap() - expect).norm() < 1e-6);
    }

    #[test]
    fn gaussian_pulse_transfers_its_area() {
        // gamma -> 0: |alpha(inf)| = |Omega| T sqrt(pi).
        let mut p = SystemParams::new(0.0, 0.0, 0.0, 4).unwrap();
        p.gamma = 1e-9;
        let train = PulseTrain::new(C64::new(6.0, 0.0), 0.4, 5.5, 2.0, Some(1)).unwrap();
        let times = grid(8.0, 0.02);
        let sol = linear_cavity_alpha(&p, &train, &times, 1e-3, C64::ZERO).unwrap();
        let expect = 6.0 * 0.4 * core::f64::consts::PI.sqrt();
        let got = sol.alpha.last().unwrap().norm();
        assert!((got - expect).abs() < 1e-6 * expect, "got {got}, expect {expect}");
    }

    #[test]
    fn chi_must_be_zero() {
        let p = SystemParams::new(15.0, 0.0, 0.0, 4).unwrap();
        let train = PulseTrain::new(C64::ZERO, 0.4, 5.5, 2.0, None).unwrap();
        assert!(linear_cavity_alpha(&p, &train, &grid(1.0, 0.1), 1e-3, C64::ZERO).is_err());
    }

    #[test]
    fn displaced_thermal_limits() {
        // Pure thermal light bunches at g2 = 2.
        let (mean, g2) = displaced_thermal_stats(C64::ZERO, 0.4).unwrap();
        assert!((mean - 0.4).abs() < 1e-15);
        assert!((g2.unwrap() - 2.0).abs() < 1e-15);
        // Pure coherent light sits at g2 = 1.
        let (_, g2) = displaced_thermal_stats(C64::new(1.3, -0.2), 0.0).unwrap();
        assert!((g2.unwrap() - 1.0).abs() < 1e-15);
        // Mixed case from the closed form.
        let (mean, g2) = displaced_thermal_stats(C64::ONE, 1.0).unwrap();
        assert!((mean - 2.0).abs() < 1e-15);
        assert!((g2.unwrap() - 1.75).abs() < 1e-15);
        // Undefined at zero mean.
        let (_, g2) = displaced_thermal_stats(C64::ZERO, 0.0).unwrap();
        assert!(g2.is_none());
    }

    #[test]
    fn rabi_cycle_counts() {
        let p = SystemParams::new(15.0, 0.0, 0.0, 10).unwrap();
        let strong = PulseTrain::new(C64::new(8.0, 0.0), 0.8, 4.0, 2.0, None).unwrap();
        let check = two_level_rabi_check(&p, &strong);
        assert!((check.pulse_area - 2.0 * 8.0 * 0.8 * core::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((check.cycles_per_pulse - 3.61).abs() < 0.01);

        let weak = PulseTrain::new(C64::new(6.0, 0.0), 0.4, 5.5, 2.0, None).unwrap();
        let check_weak = two_level_rabi_check(&p, &weak);
        assert!((check_weak.cycles_per_pulse - 1.35).abs() < 0.01);

        // Cycle count scales linearly with the pump amplitude.
        let scaled = PulseTrain::new(C64::new(14.0, 0.0), 0.4, 5.5, 2.0, None).unwrap();
        let ratio = two_level_rabi_check(&p, &scaled).cycles_per_pulse / check_weak.cycles_per_pulse;
        assert!((ratio - 14.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn extrema_counting_with_prominence() {
        // Two full oscillations: 4 extrema.
        let values: Vec<f64> =
            (0..400).map(|k| (k as f64 * 0.0315).sin()).collect();
        assert_eq!(count_extrema(&values, 0.05), 4);
        // Noise below the prominence threshold does not count.
        let noisy: Vec<f64> = values
            .iter()
            .enumerate()
            .map(|(k, v)| v + 0.004 * if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        assert_eq!(count_extrema(&noisy, 0.05), 4);
        // A bare zigzag is all extrema once the threshold drops below it.
        let zigzag: Vec<f64> = (0..100).map(|k| if k % 2 == 0 { 0.0 } else { 1.0 }).collect();
        assert_eq!(count_extrema(&zigzag, 0.5), 98);
        // Monotone series has none.
        let ramp: Vec<f64> = (0..100).map(|k| k as f64).collect();
        assert_eq!(count_extrema(&ramp, 0.5), 0);
    }
}
