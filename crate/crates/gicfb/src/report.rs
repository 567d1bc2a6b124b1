//! Plain-text reports printed by the CLI. Every figure carries its unit.

use std::fmt::Write;

use gicfb_core::montecarlo::MomentCheck;
use gicfb_core::{ChannelParams, RateResult, Schedule, SimConfig, SimStats};

use crate::gdof::GdofRow;

pub fn rate_report(ch: &ChannelParams, ours: &RateResult, kramer: Option<&RateResult>) -> String {
    let mut s = String::new();
    let sol = &ours.solution;
    let _ = writeln!(s, "channel: a = {}, P = {} (SNR {:.4} dB, INR {:.4} dB)", ch.a(), ch.power(),
        10.0 * ch.snr().log10(), 10.0 * ch.inr().log10());
    let _ = writeln!(s, "symmetric rate: {:.12} bits/channel use", ours.rate_bits_per_use);
    let _ = writeln!(s, "symmetric rate: {:.12} bits/s/Hz", ours.rate_bits_per_s_hz);
    let _ = writeln!(s, "optimum: rho = {:.12}, b = {:.12}, beta = {:.12}", sol.rho, sol.b, sol.beta);
    let _ = writeln!(s, "residuals: power {:.3e}, correlation {:.3e}", sol.power_residual, sol.correlation_residual);
    if ours.rho_grid_step > 0.0 {
        let _ = writeln!(s, "rho grid step: {:e}", ours.rho_grid_step);
    }
    match kramer {
        Some(k) => {
            let _ = writeln!(s, "kramer rate: {:.12} bits/channel use (rho = {:.12}, b = {:.12}, beta = {:.12})",
                k.rate_bits_per_use, k.solution.rho, k.solution.b, k.solution.beta);
            let _ = writeln!(s, "gain over kramer: {:.12} bits/channel use",
                ours.rate_bits_per_use - k.rate_bits_per_use);
        }
        None => {
            let _ = writeln!(s, "kramer rate: n/a (a = 0, interference-free channel)");
        }
    }
    s
}

pub fn gdof_report(alpha: f64, rows: &[GdofRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "alpha = {alpha}; ratio = R_sym [bits/s/Hz] / log2(SNR)");
    let _ = writeln!(s, "{:>14}  {:>10}  {:>16}  {:>16}", "P", "SNR [dB]", "ratio", "kramer (1+a)/4");
    for r in rows {
        let _ = writeln!(s, "{:>14.6e}  {:>10.3}  {:>16.12}  {:>16.12}",
            r.power, 10.0 * r.power.log10(), r.ratio, r.kramer_reference);
    }
    s
}

pub fn simulate_report(
    cfg: &SimConfig,
    sched: &Schedule,
    stats: &SimStats,
    moments: &MomentCheck,
    power_avg: f64,
) -> String {
    let mut s = String::new();
    let ch = &cfg.ch;
    let _ = writeln!(s, "channel: a = {}, P = {}; rho = {:.12}; steps = {}; trials = {}; seed = {}{}",
        ch.a(), ch.power(), cfg.rho, cfg.n_steps, cfg.trials, cfg.seed,
        if cfg.zero_noise { " (zero noise)" } else { "" });
    let _ = writeln!(s, "schedule: P1 = {:.12}, b1 = {:.12}, beta1 = {:.12}; b = {:.12}, beta = {:.12}",
        sched.p1(), sched.bootstrap().b1, sched.bootstrap().beta1, sched.steady().b, sched.steady().beta);
    let _ = writeln!(s, "analytic rate -log2(beta): {:.12} bits/channel use", sched.rate_bits_per_use());
    let _ = writeln!(s, "half-width rule: {:?}; limiting decoded rate {:.12} bits/channel use",
        cfg.half_width, cfg.half_width.limiting_rate(sched));
    let _ = writeln!(s, "trials: {} valid, {} invalid", stats.trials_valid, stats.trials_invalid);
    for (i, name) in ["user 1", "user 2"].iter().enumerate() {
        let _ = writeln!(s, "{name}: error rate {:.6} (fraction) at n = {}, empirical rate {:.12} bits/channel use, average power {:.12} (linear)",
            stats.err_rate[i], cfg.n_steps, stats.empirical_rate[i], stats.avg_power[i]);
    }
    let _ = writeln!(s, "power check: max time-averaged power {:.12} (limit P = {})", power_avg, ch.power());
    let _ = writeln!(s, "moment match: worst |P_hat - P_n| = {:.3} SE, worst |rho_hat - rho_n| = {:.3} SE, step-1 power {:.3} SE",
        moments.worst_power_z, moments.worst_corr_z, moments.first_step_power_z);
    s
}
