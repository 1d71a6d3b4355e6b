//! Modulation protocols `t -> lambda_t` on `[0, tau]`.

use std::fmt;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A modulation protocol with its time derivative.
#[derive(Clone)]
pub struct ModulationProtocol {
    tau: f64,
    lambda: ScalarFn,
    rate: ScalarFn,
}

impl fmt::Debug for ModulationProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModulationProtocol")
            .field("tau", &self.tau)
            .field("lambda_0", &self.lambda(0.0))
            .field("lambda_tau", &self.lambda(self.tau))
            .finish()
    }
}

impl ModulationProtocol {
    pub fn new<L, R>(tau: f64, lambda: L, rate: R) -> Self
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        R: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            tau,
            lambda: Arc::new(lambda),
            rate: Arc::new(rate),
        }
    }

    pub fn constant(tau: f64, value: f64) -> Self {
        Self::new(tau, move |_| value, |_| 0.0)
    }

    /// `lambda_t = start + (end - start) t / tau`.
    pub fn linear(tau: f64, start: f64, end: f64) -> Self {
        let slope = (end - start) / tau;
        Self::new(tau, move |t| start + slope * t, move |_| slope)
    }

    /// `lambda_t = amplitude (1 - exp(-rate t))`. An infinite rate switches
    /// on instantly; a zero rate never switches on.
    pub fn exponential_turn_on(tau: f64, amplitude: f64, rate: f64) -> Self {
        if rate.is_infinite() {
            Self::constant(tau, amplitude)
        } else {
            Self::new(
                tau,
                move |t| amplitude * -(-rate * t).exp_m1(),
                move |t| amplitude * rate * (-rate * t).exp(),
            )
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn lambda(&self, t: f64) -> f64 {
        (self.lambda)(t)
    }

    pub fn rate(&self, t: f64) -> f64 {
        (self.rate)(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_rate(p: &ModulationProtocol) {
        let h = 1e-5 * p.tau();
        for k in 1..10 {
            let t = p.tau() * k as f64 / 10.0;
            let fd = (p.lambda(t + h) - p.lambda(t - h)) / (2.0 * h);
            let r = p.rate(t);
            assert!(
                (fd - r).abs() <= 1e-6 * r.abs().max(1e-12),
                "t={t} fd={fd} r={r}"
            );
        }
    }

    #[test]
    fn rates_match_finite_differences() {
        check_rate(&ModulationProtocol::linear(8.0, 2.0, -6.0));
        check_rate(&ModulationProtocol::exponential_turn_on(50.0, 0.02, 0.1));
        check_rate(&ModulationProtocol::constant(3.0, 1.5));
    }

    #[test]
    fn turn_on_limits() {
        let never = ModulationProtocol::exponential_turn_on(10.0, 0.02, 0.0);
        assert_eq!(never.lambda(5.0), 0.0);
        let sudden = ModulationProtocol::exponential_turn_on(10.0, 0.02, f64::INFINITY);
        assert_eq!(sudden.lambda(0.0), 0.02);
        assert_eq!(sudden.rate(1.0), 0.0);
    }
}
