//! Gaussian pulse train driving the resonator, and the resonance schedule
//! of the anharmonic ladder.
//!
//! The envelope is `f(t) = sum_n exp(-((t - t0 - n*tau)/T)^2)`; the full
//! instantaneous drive amplitude is `omega * f(t)`.

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::fock::SystemParams;
use crate::Result;

/// Distance, in units of the pulse width `T`, beyond which a Gaussian term
/// is dropped. Each dropped term is below `exp(-64) ~ 1.6e-28`.
pub const ENVELOPE_CUTOFF_WIDTHS: f64 = 8.0;

/// Parameters of the drive pulse train.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseTrain {
    /// Peak drive amplitude, in units of `gamma`. Real and positive in the
    /// usual operating points, complex allowed.
    pub omega: C64,
    /// Pulse duration `T`, in units of `1/gamma`.
    pub width: f64,
    /// Separation `tau` between pulse centers, in units of `1/gamma`.
    pub period: f64,
    /// Center of the first pulse.
    pub t0: f64,
    /// Number of pulses; `None` for an unbounded train.
    pub count: Option<u64>,
}

impl PulseTrain {
    pub fn new(omega: C64, width: f64, period: f64, t0: f64, count: Option<u64>) -> Result<Self> {
        let train = Self { omega, width, period, t0, count };
        train.validate()?;
        Ok(train)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width.is_nan() || self.width <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "width",
                value: self.width,
                reason: "pulse duration must be > 0",
            });
        }
        if self.period.is_nan() || self.period <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "period",
                value: self.period,
                reason: "pulse separation must be > 0",
            });
        }
        if !self.t0.is_finite() || !self.omega.re.is_finite() || !self.omega.im.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t0/omega",
                value: self.t0,
                reason: "must be finite",
            });
        }
        if self.count == Some(0) {
            return Err(Error::InvalidParameter {
                name: "count",
                value: 0.0,
                reason: "pulse count must be positive",
            });
        }
        Ok(())
    }

    /// Pulse envelope at time `t`. Terms farther than
    /// [`ENVELOPE_CUTOFF_WIDTHS`] pulse widths from `t` are dropped, which
    /// keeps the evaluation O(1) per call.
    pub fn envelope(&self, t: f64) -> f64 {
        let reach = ENVELOPE_CUTOFF_WIDTHS * self.width;
        let lo = (t - self.t0 - reach) / self.period;
        let hi = (t - self.t0 + reach) / self.period;
        let mut n_lo = lo.ceil() as i64;
        let mut n_hi = hi.floor() as i64;
        n_lo = n_lo.max(0);
        if let Some(count) = self.count {
            n_hi = n_hi.min(count as i64 - 1);
        }
        let mut sum = 0.0;
        let mut n = n_lo;
        while n <= n_hi {
            let arg = (t - self.t0 - n as f64 * self.period) / self.width;
            sum += (-arg * arg).exp();
            n += 1;
        }
        sum
    }

    /// Center of pulse `n`.
    #[inline]
    pub fn center(&self, n: u64) -> f64 {
        self.t0 + n as f64 * self.period
    }

    /// Upper bound on the envelope over all times, accounting for overlap
    /// of neighboring pulses.
    pub fn envelope_sup(&self) -> f64 {
        let mut sup = 1.0;
        let mut k = 1.0;
        loop {
            let arg = k * self.period / self.width;
            let term = (-arg * arg).exp();
            if term < 1e-18 {
                break;
            }
            sup += 2.0 * term;
            k += 1.0;
        }
        if let Some(count) = self.count {
            sup = sup.min(count as f64);
        }
        sup
    }

    /// Integral of a single pulse, `T * sqrt(pi)`.
    pub fn pulse_area(&self) -> f64 {
        self.width * core::f64::consts::PI.sqrt()
    }
}

/// Detuning that puts the drive on the `|0> -> |n>` multiphoton resonance:
/// `Delta_n = -chi (n - 1)`.
pub fn resonance_detuning(n: u32, chi: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
            reason: "transition order must be >= 1",
        });
    }
    Ok(-chi * (n as f64 - 1.0))
}

/// Outcome of the pulse-selectivity checks. All three conditions have to
/// hold for a pulse to address a single ladder transition:
/// the pulse fits inside the photon lifetime (`gamma T < 1`), its spectral
/// width resolves the anharmonic splitting (`chi T > 1`), and consecutive
/// pulses are separated by more than the lifetime (`gamma tau > 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectivityReport {
    pub gamma_t: f64,
    pub chi_t: f64,
    pub gamma_tau: f64,
    pub within_lifetime: bool,
    pub resolves_levels: bool,
    pub separation_exceeds_lifetime: bool,
}

impl SelectivityReport {
    pub fn all_satisfied(&self) -> bool {
        self.within_lifetime && self.resolves_levels && self.separation_exceeds_lifetime
    }
}

/// Advisory check of the pulse parameters against the selectivity window;
/// violations are reported, never rejected.
pub fn validate_selectivity(train: &PulseTrain, p: &SystemParams) -> SelectivityReport {
    let gamma_t = p.gamma * train.width;
    let chi_t = p.chi.abs() * train.width;
    let gamma_tau = p.gamma * train.period;
    SelectivityReport {
        gamma_t,
        chi_t,
        gamma_tau,
        within_lifetime: gamma_t < 1.0,
        resolves_levels: chi_t > 1.0,
        separation_exceeds_lifetime: gamma_tau > 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train(width: f64, period: f64, t0: f64, count: Option<u64>) -> PulseTrain {
        PulseTrain::new(C64::new(6.0, 0.0), width, period, t0, count).unwrap()
    }

    #[test]
    fn single_pulse_peak() {
        let tr = train(0.4, 5.5, 2.0, Some(1));
        assert!((tr.envelope(2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn second_pulse_peak_with_negligible_neighbor() {
        // At the center of the second pulse the first contributes exp(-(tau/T)^2).
        let tr = train(0.4, 5.5, 2.0, Some(2));
        let neighbor = (-(5.5f64 / 0.4).powi(2)).exp();
        assert!((tr.envelope(7.5) - (1.0 + neighbor)).abs() < 1e-15);
        assert!(neighbor < 1e-80);
    }

    #[test]
    fn midpoint_between_pulses() {
        let tr = train(0.4, 5.5, 2.0, Some(2));
        let expect = 2.0 * (-(2.75f64 / 0.4).powi(2)).exp();
        let got = tr.envelope(2.0 + 2.75);
        assert!((got - expect).abs() < 1e-24, "got {got}, expect {expect}");
        assert!(expect < 1e-20);
    }

    #[test]
    fn unbounded_train_is_periodic_past_startup() {
        let tr = train(0.4, 5.5, 2.0, None);
        let mut t = 2.0 + 8.0 * 0.4 + 0.01;
        while t < 40.0 {
            assert!((tr.envelope(t + 5.5) - tr.envelope(t)).abs() < 1e-12);
            t += 0.37;
        }
    }

    #[test]
    fn resonance_schedule() {
        let chi = 15.0;
        assert_eq!(resonance_detuning(1, chi).unwrap(), 0.0);
        assert_eq!(resonance_detuning(2, chi).unwrap(), -chi);
        assert_eq!(resonance_detuning(3, chi).unwrap(), -2.0 * chi);
        assert!(resonance_detuning(0, chi).is_err());
    }

    #[test]
    fn selectivity_reference_point() {
        let p = SystemParams::new(15.0, 0.0, 0.0, 10).unwrap();
        let tr = train(0.4, 5.5, 2.0, None);
        let report = validate_selectivity(&tr, &p);
        assert!(report.all_satisfied());
    }

    #[test]
    fn selectivity_violations_flagged() {
        let p = SystemParams::new(15.0, 0.0, 0.0, 10).unwrap();
        let short = train(0.05, 5.5, 2.0, None);
        let report = validate_selectivity(&short, &p);
        assert!(!report.resolves_levels);
        assert!(report.within_lifetime);

        let long = train(2.0, 5.5, 2.0, None);
        let report = validate_selectivity(&long, &p);
        assert!(!report.within_lifetime);
        assert!(report.resolves_levels);
    }

    #[test]
    fn pulse_area() {
        let tr = train(0.8, 4.0, 2.0, None);
        assert!((tr.pulse_area() - 0.8 * core::f64::consts::PI.sqrt()).abs() < 1e-15);
    }
}
