//! First-step coefficients and the per-step coefficient schedule.
//!
//! Both transmitters start from independent messages (`rho_1 = 0`) at a
//! first-step power `P_1`. The first step's `(b_1, beta_1)` is chosen so that
//! step two lands exactly on the fixed point `P_2 = P`, `rho_2 = rho`; from
//! then on the steady-state `(b, beta)` keeps `P_n = P` and
//! `rho_n = (-1)^n rho`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rate::{best_at, discriminant_f, rho_max, ChannelParams, FixedPointSolution};
use crate::sgn;

/// Largest tolerated drift of the moment recursion, relative to `max(1, P)`.
const SCHEDULE_DRIFT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapParams {
    pub p1: f64,
    pub b1: f64,
    pub beta1: f64,
}

impl BootstrapParams {
    /// Residuals of the two step-two targets, `P rho` for the cross moment
    /// and `P` for the power.
    pub fn residuals(&self, rho: f64, ch: &ChannelParams) -> (f64, f64) {
        let (a, p) = (ch.abs_a(), ch.power());
        let BootstrapParams { p1, b1, beta1 } = *self;
        let beta2 = beta1 * beta1;
        let cross = p * rho - p1 / beta2 * 2.0 * a * (b1 * b1 - b1);
        let power = p - (p1 - 2.0 * b1 * p1 + b1 * b1 * (1.0 + p1 + a * a * p1)) / beta2;
        (cross, power)
    }
}

/// Chooses `(P_1, b_1, beta_1)` so that the second step starts on the fixed
/// point with correlation `rho`.
///
/// * `rho = 0`: `(P, 0, 1)`.
/// * `rho != |a|`: `P_1 = rho^2 / (a^2 (1 - rho^2))` makes the quadratic in
///   `b_1` a perfect square with the double root `rho / (rho - |a|)`.
/// * `rho = |a|` (only possible for `|a| < 1`): `P_1 = 2 / (1 - a^2)` and the
///   negative root of the quadratic.
pub fn bootstrap_params(rho: f64, ch: &ChannelParams) -> Result<BootstrapParams> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::domain("correlation", rho));
    }
    let p = ch.power();
    if rho == 0.0 {
        return Ok(BootstrapParams {
            p1: p,
            b1: 0.0,
            beta1: 1.0,
        });
    }
    if ch.a() == 0.0 {
        return Err(Error::Infeasible { rho, rho_max: 0.0 });
    }
    let a = ch.abs_a();
    if discriminant_f(rho, ch) < -1e-12 * (a * p * a * p).max(1.0) {
        return Err(Error::Infeasible {
            rho,
            rho_max: rho_max(ch)?,
        });
    }

    let (p1, b1) = if libm::fabs(rho - a) <= 1e-12 * a {
        if a >= 1.0 {
            return Err(Error::BootstrapInfeasible { abs_a: a });
        }
        let p1 = 2.0 / (1.0 - a * a);
        let c2 = (1.0 + p1 + a * a * p1) * rho - 2.0 * a * p1;
        let c1 = -2.0 * (rho - a) * p1;
        let c0 = p1 * rho;
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc <= 0.0 {
            return Err(Error::Consistency {
                what: "bootstrap quadratic has no real roots",
                deviation: disc,
            });
        }
        let q = -0.5 * (c1 + sgn(c1) * libm::sqrt(disc));
        let (r1, r2) = (q / c2, c0 / q);
        (p1, r1.min(r2))
    } else {
        // (rho - |a|) P_1 / ((1 + P_1 + a^2 P_1) rho - 2|a| P_1) with the
        // common factor (rho - |a|) cancelled.
        let p1 = rho * rho / (a * a * (1.0 - rho) * (1.0 + rho));
        (p1, rho / (rho - a))
    };

    let beta1_sq = 2.0 * a * p1 * (b1 * b1 - b1) / (p * rho);
    if !(beta1_sq > 0.0 && beta1_sq.is_finite()) {
        return Err(Error::Consistency {
            what: "first-step contraction factor squared is not positive",
            deviation: beta1_sq,
        });
    }
    let params = BootstrapParams {
        p1,
        b1,
        beta1: libm::sqrt(beta1_sq),
    };
    let (r_cross, r_power) = params.residuals(rho, ch);
    let worst = libm::fabs(r_cross).max(libm::fabs(r_power));
    if worst > ch.residual_tolerance() {
        return Err(Error::Consistency {
            what: "bootstrap residual",
            deviation: worst,
        });
    }
    Ok(params)
}

/// One step of the second-moment recursion: maps `(P_n, rho_n)` to
/// `(P_{n+1}, rho_{n+1})` under coefficients `(b_n, beta_n)`.
pub fn moment_step(power: f64, rho: f64, b: f64, beta: f64, abs_a: f64) -> (f64, f64) {
    let r = libm::fabs(rho);
    let a = abs_a;
    let beta2 = beta * beta;
    let next_power = (power - 2.0 * power * b * (1.0 + a * r)
        + b * b * (1.0 + power + a * a * power + 2.0 * a * r * power))
        / beta2;
    let cross = power * sgn(rho) * (r - 2.0 * b * (r + a) + b * b * (r * (1.0 + a * a) + 2.0 * a))
        / beta2;
    (next_power, cross / next_power)
}

/// Coefficients in force at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoefficients {
    /// `P_n = E[X_n^2]` for either user.
    pub power: f64,
    /// Signed correlation `rho_n` between the users' recursion states.
    pub rho: f64,
    pub b: f64,
    pub beta: f64,
}

/// Per-step coefficients for steps `1..=n_max`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    ch: ChannelParams,
    rho: f64,
    bootstrap: BootstrapParams,
    steady: FixedPointSolution,
    steps: Vec<StepCoefficients>,
}

impl Schedule {
    pub fn channel(&self) -> &ChannelParams {
        &self.ch
    }

    /// Steady correlation magnitude.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn bootstrap(&self) -> &BootstrapParams {
        &self.bootstrap
    }

    pub fn steady(&self) -> &FixedPointSolution {
        &self.steady
    }

    pub fn p1(&self) -> f64 {
        self.bootstrap.p1
    }

    pub fn n_max(&self) -> usize {
        self.steps.len()
    }

    /// Coefficients at step `n` (1-based).
    pub fn step(&self, n: usize) -> Option<&StepCoefficients> {
        n.checked_sub(1).and_then(|i| self.steps.get(i))
    }

    pub fn steps(&self) -> &[StepCoefficients] {
        &self.steps
    }

    /// `-log2(beta)` of the steady state, bits per channel use.
    pub fn rate_bits_per_use(&self) -> f64 {
        self.steady.rate_bits_per_use()
    }

    /// `(1/N) sum_{n<=N} P_n`.
    pub fn average_power(&self, horizon: usize) -> f64 {
        let horizon = horizon.min(self.steps.len());
        if horizon == 0 {
            return 0.0;
        }
        self.steps[..horizon].iter().map(|s| s.power).sum::<f64>() / horizon as f64
    }

    /// Applies the moment recursion to step `n` and returns the predicted
    /// `(P_{n+1}, rho_{n+1})`.
    pub fn propagate(&self, n: usize) -> Option<(f64, f64)> {
        let s = self.step(n)?;
        Some(moment_step(s.power, s.rho, s.b, s.beta, self.ch.abs_a()))
    }
}

/// Builds the two-phase schedule at correlation `rho`: bootstrap at step one,
/// the best steady-state solution at `rho` afterwards.
///
/// Every transition is checked against the moment recursion.
pub fn build_schedule(rho: f64, ch: &ChannelParams, n_max: usize) -> Result<Schedule> {
    if n_max < 2 {
        return Err(Error::domain("schedule horizon", n_max as f64));
    }
    let bootstrap = bootstrap_params(rho, ch)?;
    let steady = best_at(rho, ch)?;
    let p = ch.power();

    let mut steps = Vec::with_capacity(n_max);
    steps.push(StepCoefficients {
        power: bootstrap.p1,
        rho: 0.0,
        b: bootstrap.b1,
        beta: bootstrap.beta1,
    });
    for n in 2..=n_max {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        steps.push(StepCoefficients {
            power: p,
            rho: sign * rho,
            b: steady.b,
            beta: steady.beta,
        });
    }

    let schedule = Schedule {
        ch: *ch,
        rho,
        bootstrap,
        steady,
        steps,
    };
    let scale = p.max(1.0);
    for n in 1..n_max {
        let (next_power, next_rho) = schedule.propagate(n).expect("step within horizon");
        let want = schedule.steps[n];
        let drift = (libm::fabs(next_power - want.power) / scale)
            .max(libm::fabs(next_rho - want.rho));
        if drift.is_nan() || drift > SCHEDULE_DRIFT {
            return Err(Error::Consistency {
                what: "schedule recursion drift",
                deviation: drift,
            });
        }
    }
    Ok(schedule)
}
