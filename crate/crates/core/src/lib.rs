//! Time-varying feedback coding for the symmetric two-user Gaussian
//! interference channel.
//!
//! The crate covers both sides of the scheme:
//!
//! * [`rate`]: the closed-form achievable symmetric rate, obtained by sweeping
//!   the steady-state correlation `rho` over its feasible range and solving the
//!   fixed-point system for the feedback coefficient `b` and contraction
//!   factor `beta`. The Kramer linear-feedback baseline, the degraded
//!   (`a = 0`) capacity and the high-SNR degrees-of-freedom constructions live
//!   here too.
//! * [`bootstrap`]: the first-step coefficients that put both transmitters on
//!   the fixed point from step two onward, and the per-step [`Schedule`].
//! * [`codec`]: the transmitter recursions and the receivers'
//!   iterated-function-system decoder.
//! * [`montecarlo`]: seeded end-to-end trials measuring error rate, empirical
//!   rate, power and correlation trajectories.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bootstrap;
pub mod codec;
mod error;
pub mod gauss;
pub mod montecarlo;
pub mod rate;

pub use bootstrap::{bootstrap_params, build_schedule, BootstrapParams, Schedule};
pub use codec::{
    channel_step, decode_interval, decoder_update, encoder_init, encoder_step, DecoderState,
    EncoderState, Role, ThetaInterval,
};
pub use error::{Error, Result};
pub use gauss::{message_to_signal, std_normal_cdf, std_normal_inv_cdf, Probability, RngStream};
pub use montecarlo::{
    power_check, run_batch, run_trial, HalfWidthRule, SimConfig, SimStats, TrialResult,
};
pub use rate::{
    degraded_rate, discriminant_f, fixed_point_candidates, gdof_ratio, kramer_solution, rho_max,
    rho_star, symmetric_rate, ChannelParams, FixedPointSolution, RateResult, DEFAULT_GRID_STEP,
};

/// Sign convention used throughout the scheme: `sgn(0) = +1`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}
