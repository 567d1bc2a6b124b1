//! Seeded end-to-end trials of the feedback code.
//!
//! Each trial draws two message points, runs both encoder/decoder pairs over
//! the noisy channel and records the recursion states, the decoded-interval
//! widths and whether each message point is still inside its interval. A batch
//! aggregates trials into per-step power and correlation estimates with their
//! standard errors, error rates and empirical rates.

use alloc::vec::Vec;
use core::ops::RangeInclusive;

use crate::bootstrap::{build_schedule, Schedule};
use crate::codec::{
    channel_step, decode_interval, decoder_update, encoder_init, encoder_step, DecoderState,
    EncoderState, Role,
};
use crate::error::{Error, Result};
use crate::gauss::RngStream;
use crate::rate::ChannelParams;

/// States beyond this magnitude mark a trial as numerically invalid.
pub const OVERFLOW_LIMIT: f64 = 1e9;

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_STEPS: usize = 100;
pub const DEFAULT_SEED: u64 = 42;

/// How the receiver sizes the interval `J_1 = (-h_n, h_n)` at step `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfWidthRule {
    Fixed(f64),
    /// `h_n = sqrt(P) 2^(n (R_sym - R) / 2)` for a target rate `R < R_sym`:
    /// grows without bound (so the error probability vanishes) yet slowly
    /// enough that the decoded rate settles at `(R_sym + R) / 2`.
    Geometric { target_rate: f64 },
}

impl HalfWidthRule {
    pub fn half_width(&self, n: usize, sched: &Schedule) -> f64 {
        match *self {
            HalfWidthRule::Fixed(h) => h,
            HalfWidthRule::Geometric { target_rate } => {
                let gap = sched.rate_bits_per_use() - target_rate;
                libm::sqrt(sched.channel().power()) * libm::exp2(n as f64 * gap / 2.0)
            }
        }
    }

    /// Limit of the per-trial rate `-(1/n) log2 |Delta_n|` as `n` grows.
    pub fn limiting_rate(&self, sched: &Schedule) -> f64 {
        match *self {
            HalfWidthRule::Fixed(_) => sched.rate_bits_per_use(),
            HalfWidthRule::Geometric { target_rate } => {
                0.5 * (sched.rate_bits_per_use() + target_rate)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub ch: ChannelParams,
    /// Steady correlation magnitude.
    pub rho: f64,
    pub n_steps: usize,
    pub trials: usize,
    pub seed: u64,
    pub half_width: HalfWidthRule,
    /// Debug switch: all channel noise forced to zero.
    pub zero_noise: bool,
}

impl SimConfig {
    /// Defaults: 10^4 trials, 100 steps, seed 42, geometric half-width at
    /// `R = 0.8 R_sym(rho)` (filled in by [`SimConfig::with_default_target`]).
    pub fn new(ch: ChannelParams, rho: f64) -> Self {
        SimConfig {
            ch,
            rho,
            n_steps: DEFAULT_STEPS,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            half_width: HalfWidthRule::Geometric { target_rate: 0.0 },
            zero_noise: false,
        }
    }

    /// Sets the geometric rule with `R = fraction * R_sym(rho)`.
    pub fn with_default_target(mut self, fraction: f64) -> Result<Self> {
        let sched = build_schedule(self.rho, &self.ch, 2)?;
        self.half_width = HalfWidthRule::Geometric {
            target_rate: fraction * sched.rate_bits_per_use(),
        };
        Ok(self)
    }

    /// Schedule long enough for `n_steps` observations plus the final state.
    pub fn schedule(&self) -> Result<Schedule> {
        build_schedule(self.rho, &self.ch, self.n_steps + 1)
    }

    fn validate(&self, sched: &Schedule) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("trial count", 0.0));
        }
        if self.n_steps == 0 {
            return Err(Error::domain("step count", 0.0));
        }
        if sched.n_max() < self.n_steps + 1 {
            return Err(Error::Schedule {
                what: "schedule shorter than simulation",
                step: sched.n_max(),
            });
        }
        match self.half_width {
            HalfWidthRule::Fixed(h) if !(h > 0.0 && h.is_finite()) => {
                Err(Error::domain("half width", h))
            }
            HalfWidthRule::Geometric { target_rate }
                if !(target_rate > 0.0 && target_rate < sched.rate_bits_per_use()) =>
            {
                Err(Error::domain("target rate", target_rate))
            }
            _ => Ok(()),
        }
    }
}

/// One simulated transmission of both messages.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// False when a recursion state overflowed [`OVERFLOW_LIMIT`]; the
    /// per-step vectors are then truncated at the failing step.
    pub valid: bool,
    pub theta: [f64; 2],
    /// `x_n` for `n = 1..=n_steps`.
    pub states: Vec<[f64; 2]>,
    /// `theta in Delta_n` after `n = 1..=n_steps` observations.
    pub contained: Vec<[bool; 2]>,
    /// `log2 |Delta_n|`.
    pub log2_width: Vec<[f64; 2]>,
    /// Largest `|T_n(x_{n+1}) - x_1|` seen, relative to `max(|x_1|, sqrt(P_1))`.
    pub round_trip_error: f64,
}

/// Runs trial number `trial` on its own stream `(cfg.seed, trial)`.
///
/// `theta in Delta_n` is equivalent to `T_n^{-1}(x_1) in (-h_n, h_n)`, and
/// `T_n^{-1}(x_1)` is exactly the transmitter's next state `x_{n+1}`.
/// Containment is therefore decided on `x_{n+1}`, which stays well scaled,
/// rather than on interval endpoints that collapse below `f64` resolution
/// after a few dozen steps.
pub fn run_trial(cfg: &SimConfig, sched: &Schedule, trial: u64) -> Result<TrialResult> {
    cfg.validate(sched)?;
    let mut rng = RngStream::new(cfg.seed, trial);
    let theta = [rng.uniform_open(), rng.uniform_open()];
    let mut enc: [EncoderState; 2] = [
        encoder_init(theta[0], sched, Role::First)?,
        encoder_init(theta[1], sched, Role::Second)?,
    ];
    let mut dec = [DecoderState::new(Role::First), DecoderState::new(Role::Second)];
    let mut tx = [enc[0].emitted(sched)?, enc[1].emitted(sched)?];
    let x1 = [enc[0].x, enc[1].x];
    let scale = libm::sqrt(sched.p1());

    let mut out = TrialResult {
        valid: true,
        theta: [theta[0].value(), theta[1].value()],
        states: Vec::with_capacity(cfg.n_steps),
        contained: Vec::with_capacity(cfg.n_steps),
        log2_width: Vec::with_capacity(cfg.n_steps),
        round_trip_error: 0.0,
    };

    for n in 1..=cfg.n_steps {
        out.states.push([enc[0].x, enc[1].x]);
        let (z1, z2) = if cfg.zero_noise {
            (0.0, 0.0)
        } else {
            (rng.gaussian(1.0), rng.gaussian(1.0))
        };
        let (y1, y2) = channel_step(tx[0], tx[1], cfg.ch.a(), z1, z2);
        let h = cfg.half_width.half_width(n, sched);
        let mut contained = [false; 2];
        let mut widths = [0.0; 2];
        for (i, y) in [y1, y2].into_iter().enumerate() {
            dec[i] = decoder_update(&dec[i], y, sched)?;
            let (next, t) = encoder_step(&enc[i], y, sched)?;
            enc[i] = next;
            tx[i] = t;
            if !(libm::fabs(next.x) <= OVERFLOW_LIMIT) {
                out.valid = false;
                return Ok(out);
            }
            contained[i] = libm::fabs(next.x) < h;
            widths[i] = decode_interval(&dec[i], h, sched)?.log2_width;
            let err = libm::fabs(dec[i].apply(next.x) - x1[i]) / libm::fabs(x1[i]).max(scale);
            out.round_trip_error = out.round_trip_error.max(err);
        }
        out.contained.push(contained);
        out.log2_width.push(widths);
    }
    Ok(out)
}

/// Monte Carlo aggregates. Per-user arrays are indexed by [`Role::index`];
/// trajectories are indexed by `n - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub trials_valid: usize,
    pub trials_invalid: usize,
    /// Error rate at `n_steps`.
    pub err_rate: [f64; 2],
    /// Mean of `-(1/n) log2 |Delta_n|` at `n_steps`.
    pub empirical_rate: [f64; 2],
    /// `(1/N) sum_n P_hat_n`.
    pub avg_power: [f64; 2],
    pub err_trajectory: [Vec<f64>; 2],
    pub rate_trajectory: [Vec<f64>; 2],
    /// `P_hat_n`, the sample second moment of `x_n`.
    pub power_trajectory: [Vec<f64>; 2],
    pub power_se: [Vec<f64>; 2],
    /// `rho_hat_n`, the sample correlation of `(x_n^(1), x_n^(2))`.
    pub corr_trajectory: Vec<f64>,
    pub corr_se: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
struct StepAccumulator {
    second: [f64; 2],
    fourth: [f64; 2],
    cross: f64,
    errors: [usize; 2],
    rate: [f64; 2],
}

/// Runs `cfg.trials` trials on streams `0..trials` of `cfg.seed`.
pub fn run_batch(cfg: &SimConfig) -> Result<SimStats> {
    let sched = cfg.schedule()?;
    run_batch_with(cfg, &sched)
}

pub fn run_batch_with(cfg: &SimConfig, sched: &Schedule) -> Result<SimStats> {
    cfg.validate(sched)?;
    let steps = cfg.n_steps;
    let mut acc = alloc::vec![StepAccumulator::default(); steps];
    let (mut valid, mut invalid) = (0usize, 0usize);

    for trial in 0..cfg.trials as u64 {
        let t = run_trial(cfg, sched, trial)?;
        if !t.valid {
            invalid += 1;
            continue;
        }
        valid += 1;
        for (k, a) in acc.iter_mut().enumerate() {
            let x = t.states[k];
            let n = (k + 1) as f64;
            for i in 0..2 {
                let x2 = x[i] * x[i];
                a.second[i] += x2;
                a.fourth[i] += x2 * x2;
                if !t.contained[k][i] {
                    a.errors[i] += 1;
                }
                a.rate[i] += -t.log2_width[k][i] / n;
            }
            a.cross += x[0] * x[1];
        }
    }

    let count = valid.max(1) as f64;
    let mut stats = SimStats {
        trials_valid: valid,
        trials_invalid: invalid,
        err_rate: [0.0; 2],
        empirical_rate: [0.0; 2],
        avg_power: [0.0; 2],
        err_trajectory: [Vec::with_capacity(steps), Vec::with_capacity(steps)],
        rate_trajectory: [Vec::with_capacity(steps), Vec::with_capacity(steps)],
        power_trajectory: [Vec::with_capacity(steps), Vec::with_capacity(steps)],
        power_se: [Vec::with_capacity(steps), Vec::with_capacity(steps)],
        corr_trajectory: Vec::with_capacity(steps),
        corr_se: Vec::with_capacity(steps),
    };
    for a in &acc {
        let mut second = [0.0; 2];
        for i in 0..2 {
            second[i] = a.second[i] / count;
            let var = (a.fourth[i] / count - second[i] * second[i]).max(0.0);
            stats.power_trajectory[i].push(second[i]);
            stats.power_se[i].push(libm::sqrt(var / count));
            stats.err_trajectory[i].push(a.errors[i] as f64 / count);
            stats.rate_trajectory[i].push(a.rate[i] / count);
        }
        let rho = a.cross / count / libm::sqrt(second[0] * second[1]);
        stats.corr_trajectory.push(rho);
        stats.corr_se.push((1.0 - rho * rho) / libm::sqrt(count));
    }
    for i in 0..2 {
        stats.err_rate[i] = *stats.err_trajectory[i].last().unwrap_or(&0.0);
        stats.empirical_rate[i] = *stats.rate_trajectory[i].last().unwrap_or(&0.0);
        stats.avg_power[i] = stats.power_trajectory[i].iter().sum::<f64>() / steps as f64;
    }
    Ok(stats)
}

/// Largest per-user time-averaged power `(1/N) sum_n P_hat_n`.
pub fn power_check(stats: &SimStats) -> f64 {
    stats.avg_power[0].max(stats.avg_power[1])
}

/// Largest deviations of the empirical moments from the schedule, in units of
/// their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    /// Over the checked steps and both users: `|P_hat_n - P_n| / SE`.
    pub worst_power_z: f64,
    /// Over the checked steps: `|rho_hat_n - rho_n| / SE`.
    pub worst_corr_z: f64,
    /// Step one, both users: `|P_hat_1 - P_1| / SE`.
    pub first_step_power_z: f64,
}

impl MomentCheck {
    pub fn passes(&self, k_se: f64) -> bool {
        self.worst_power_z < k_se && self.worst_corr_z < k_se && self.first_step_power_z < k_se
    }
}

/// Compares the trajectories on `steps` (1-based) with the schedule's
/// `(P_n, rho_n)`.
pub fn moment_check(stats: &SimStats, sched: &Schedule, steps: RangeInclusive<usize>) -> MomentCheck {
    let z = |est: f64, want: f64, se: f64| {
        if se > 0.0 {
            libm::fabs(est - want) / se
        } else if est == want {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let mut check = MomentCheck {
        worst_power_z: 0.0,
        worst_corr_z: 0.0,
        first_step_power_z: 0.0,
    };
    let len = stats.corr_trajectory.len();
    for n in steps {
        if n == 0 || n > len {
            continue;
        }
        let Some(want) = sched.step(n) else { continue };
        let k = n - 1;
        for i in 0..2 {
            check.worst_power_z = check
                .worst_power_z
                .max(z(stats.power_trajectory[i][k], want.power, stats.power_se[i][k]));
        }
        check.worst_corr_z = check
            .worst_corr_z
            .max(z(stats.corr_trajectory[k], want.rho, stats.corr_se[k]));
    }
    if len > 0 {
        for i in 0..2 {
            check.first_step_power_z = check
                .first_step_power_z
                .max(z(stats.power_trajectory[i][0], sched.p1(), stats.power_se[i][0]));
        }
    }
    check
}
