//! Achievable symmetric rate of the time-varying feedback code.
//!
//! In steady state both transmitters run the same linear recursion with
//! feedback coefficient `b`, contraction factor `beta` and a cross-correlation
//! of magnitude `rho` whose sign alternates each step. Stationarity of the
//! per-user power and of the correlation gives two equations in
//! `(rho, b, beta)`:
//!
//! ```text
//! P    = [P - 2bP(1 + |a|rho) + b^2 (1 + P + a^2 P + 2|a|rho P)] / beta^2      (power)
//! -rho = [rho - 2b(rho + |a|) + b^2 (rho(1 + a^2) + 2|a|)] / beta^2           (correlation)
//! ```
//!
//! Eliminating `beta` leaves a quadratic in `b` for each `rho`, with real roots
//! exactly when `rho` lies in `[0, rho_0]`. The rate `-log2(beta)` bits per
//! channel use is maximised over that range.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Correlation grid resolution used by default.
pub const DEFAULT_GRID_STEP: f64 = 1e-5;

/// The sweep always places at least this many cells across `[0, rho_0]`.
/// With weak interference `rho_0` shrinks like `|a| sqrt(P/2)` and a fixed
/// absolute step would otherwise sample only the endpoints.
const MIN_GRID_CELLS: f64 = 1000.0;

/// Resolution of the sign-change scan for the Kramer quartic.
const KRAMER_SCAN: usize = 1000;

/// Symmetric channel: `Y1 = X1 + a X2 + Z1`, `Y2 = X2 + a X1 + Z2` with unit
/// noise variance and per-user power `P` (SNR = P, INR = a^2 P).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    a: f64,
    p: f64,
}

impl ChannelParams {
    pub fn new(a: f64, p: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::domain("interference gain", a));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::domain("power", p));
        }
        Ok(ChannelParams { a, p })
    }

    /// Builds the channel from `SNR_dB = 10 log10 P`.
    pub fn from_snr_db(a: f64, snr_db: f64) -> Result<Self> {
        ChannelParams::new(a, libm::pow(10.0, snr_db / 10.0))
    }

    /// Channel with `INR = SNR^alpha`, i.e. `a = P^((alpha - 1) / 2)`.
    pub fn from_alpha(alpha: f64, p: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::domain("alpha", alpha));
        }
        ChannelParams::new(libm::pow(p, (alpha - 1.0) / 2.0), p)
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn abs_a(&self) -> f64 {
        libm::fabs(self.a)
    }

    #[inline]
    pub fn power(&self) -> f64 {
        self.p
    }

    pub fn snr(&self) -> f64 {
        self.p
    }

    pub fn inr(&self) -> f64 {
        self.a * self.a * self.p
    }

    /// Same channel with the interference gain negated.
    pub fn with_flipped_sign(&self) -> Self {
        ChannelParams {
            a: -self.a,
            p: self.p,
        }
    }

    /// Residual tolerance `1e-9 * max(1, P)` for the fixed-point equations.
    pub fn residual_tolerance(&self) -> f64 {
        1e-9 * self.p.max(1.0)
    }
}

/// A steady-state operating point `(rho, b, beta)` with the residuals of the
/// power and correlation stationarity equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSolution {
    pub rho: f64,
    pub b: f64,
    pub beta: f64,
    pub power_residual: f64,
    pub correlation_residual: f64,
}

impl FixedPointSolution {
    /// Evaluates both residuals at `(rho, b, beta)`.
    pub fn evaluate(rho: f64, b: f64, beta: f64, ch: &ChannelParams) -> Self {
        let (power_residual, correlation_residual) = residuals(rho, b, beta, ch);
        FixedPointSolution {
            rho,
            b,
            beta,
            power_residual,
            correlation_residual,
        }
    }

    pub fn max_residual(&self) -> f64 {
        libm::fabs(self.power_residual).max(libm::fabs(self.correlation_residual))
    }

    /// `(-log2 beta)^+` in bits per channel use.
    pub fn rate_bits_per_use(&self) -> f64 {
        (-libm::log2(self.beta)).max(0.0)
    }
}

/// Outcome of a rate computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    /// Bits per real channel use.
    pub rate_bits_per_use: f64,
    /// Bits/s/Hz, twice the per-use figure.
    pub rate_bits_per_s_hz: f64,
    pub solution: FixedPointSolution,
    /// Correlation grid step actually used; zero when no grid was swept.
    pub rho_grid_step: f64,
}

impl RateResult {
    fn new(solution: FixedPointSolution, rate_bits_per_use: f64, rho_grid_step: f64) -> Self {
        RateResult {
            rate_bits_per_use,
            rate_bits_per_s_hz: 2.0 * rate_bits_per_use,
            solution,
            rho_grid_step,
        }
    }

    fn from_solution(solution: FixedPointSolution, rho_grid_step: f64) -> Self {
        RateResult::new(solution, solution.rate_bits_per_use(), rho_grid_step)
    }
}

/// `E[Y^2]` in steady state: `1 + P + a^2 P + 2|a| rho P`.
#[inline]
fn output_energy(rho: f64, ch: &ChannelParams) -> f64 {
    let (a, p) = (ch.abs_a(), ch.p);
    1.0 + p + a * a * p + 2.0 * a * rho * p
}

/// Numerator of the power equation, `beta^2 P` at a fixed point.
#[inline]
fn power_numerator(rho: f64, b: f64, ch: &ChannelParams) -> f64 {
    let (a, p) = (ch.abs_a(), ch.p);
    p - 2.0 * b * p * (1.0 + a * rho) + b * b * output_energy(rho, ch)
}

/// Numerator of the correlation equation, `-rho beta^2` at a fixed point.
#[inline]
fn correlation_numerator(rho: f64, b: f64, ch: &ChannelParams) -> f64 {
    let a = ch.abs_a();
    rho - 2.0 * b * (rho + a) + b * b * (rho * (1.0 + a * a) + 2.0 * a)
}

/// Residuals `(P - N_power / beta^2, -rho - N_corr / beta^2)`.
pub fn residuals(rho: f64, b: f64, beta: f64, ch: &ChannelParams) -> (f64, f64) {
    let beta2 = beta * beta;
    (
        ch.p - power_numerator(rho, b, ch) / beta2,
        -rho - correlation_numerator(rho, b, ch) / beta2,
    )
}

/// Discriminant of the quadratic in `b`:
/// `f(rho) = P^2 a^2 rho^4 - 2 rho^2 (a^2 P^2 + P) + a^2 P^2`.
///
/// Evaluated as `a^2 P^2 (1 - rho^2)^2 - 2 P rho^2`, which avoids the
/// cancellation of the expanded form when `rho` is close to one.
pub fn discriminant_f(rho: f64, ch: &ChannelParams) -> f64 {
    let (a, p) = (ch.abs_a(), ch.p);
    let one_minus = (1.0 - rho) * (1.0 + rho);
    let ap = a * p;
    ap * ap * one_minus * one_minus - 2.0 * p * rho * rho
}

/// Smallest root `rho_0` of the discriminant, the upper end of the feasible
/// correlation range.
pub fn rho_max(ch: &ChannelParams) -> Result<f64> {
    if ch.a == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    // rho_0^2 = 1 + u - sqrt(u^2 + 2u) with u = 1 / (a^2 P), rationalised.
    let u = 1.0 / ch.inr();
    let mut rho = libm::sqrt(1.0 / (1.0 + u + libm::sqrt(u * (u + 2.0))));
    // Step down to the first float whose evaluated discriminant is
    // non-negative, so that rho_0 itself is feasible as computed.
    for _ in 0..MAX_ULP_BACKOFF {
        if discriminant_f(rho, ch) >= 0.0 {
            break;
        }
        rho = f64::from_bits(rho.to_bits() - 1);
    }
    Ok(rho)
}

const MAX_ULP_BACKOFF: usize = 1 << 12;

/// Steady-state solutions at a fixed `rho`: one per root `b*_{1,2}` of the
/// quadratic (`b*_1` takes the `+` sign), merged when the discriminant
/// vanishes.
pub fn fixed_point_candidates(rho: f64, ch: &ChannelParams) -> Result<Vec<FixedPointSolution>> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::domain("correlation", rho));
    }
    let p = ch.p;
    if ch.a == 0.0 {
        if rho != 0.0 {
            return Err(Error::Infeasible { rho, rho_max: 0.0 });
        }
        let sol = degraded_solution(ch);
        return Ok(alloc::vec![sol]);
    }

    let a = ch.abs_a();
    let disc = discriminant_f(rho, ch);
    let slack = 1e-12 * (a * p * a * p).max(1.0);
    if disc < -slack {
        return Err(Error::Infeasible {
            rho,
            rho_max: rho_max(ch)?,
        });
    }
    // Rounding dust on either side of zero is treated as the double root.
    let root = if disc <= slack { 0.0 } else { libm::sqrt(disc) };
    let mid = 2.0 * p * rho + a * p + a * p * rho * rho;
    let lead = 2.0 * a * p + 2.0 * p * rho + 2.0 * a * a * p * rho + rho + 2.0 * a * p * rho * rho;

    let plus = (mid + root) / lead;
    // Product of the roots is 2 P rho / lead; this form keeps full precision
    // when rho is small and mid ~ root.
    let minus = 2.0 * p * rho / (mid + root);

    let mut out = Vec::with_capacity(2);
    let bs: &[f64] = if root == 0.0 { &[plus] } else { &[plus, minus] };
    for &b in bs {
        let beta2 = power_numerator(rho, b, ch) / p;
        if !(beta2 > 0.0 && beta2.is_finite()) {
            continue;
        }
        out.push(FixedPointSolution::evaluate(rho, b, libm::sqrt(beta2), ch));
    }
    Ok(out)
}

/// The candidate with the smallest `beta` at `rho` (first root on ties).
pub fn best_at(rho: f64, ch: &ChannelParams) -> Result<FixedPointSolution> {
    let mut best: Option<FixedPointSolution> = None;
    for s in fixed_point_candidates(rho, ch)? {
        if best.is_none_or(|b| s.beta < b.beta) {
            best = Some(s);
        }
    }
    best.ok_or(Error::Consistency {
        what: "no fixed point with positive beta^2",
        deviation: rho,
    })
}

fn degraded_solution(ch: &ChannelParams) -> FixedPointSolution {
    let p = ch.p;
    let b = p / (1.0 + p);
    FixedPointSolution::evaluate(0.0, b, libm::sqrt(1.0 / (1.0 + p)), ch)
}

/// Maximum symmetric rate over the correlation grid `{0, step, 2 step, ...}`
/// plus the endpoint `rho_0` and the Kramer operating point.
///
/// `a = 0` is the interference-free channel, handled in closed form.
pub fn symmetric_rate(ch: &ChannelParams, grid_step: f64) -> Result<RateResult> {
    if !(grid_step > 0.0 && grid_step <= 1e-3) {
        return Err(Error::domain("grid step", grid_step));
    }
    if ch.a == 0.0 {
        return Ok(RateResult::new(degraded_solution(ch), degraded_rate(ch.p)?, 0.0));
    }

    let rho0 = rho_max(ch)?;
    let step = grid_step.min(rho0 / MIN_GRID_CELLS);
    let cells = libm::floor(rho0 / step) as usize;

    let mut best: Option<FixedPointSolution> = None;
    let mut consider = |rho: f64| -> Result<()> {
        for s in fixed_point_candidates(rho, ch)? {
            if best.is_none_or(|b| s.beta < b.beta) {
                best = Some(s);
            }
        }
        Ok(())
    };
    for k in 0..=cells {
        let rho = k as f64 * step;
        if rho >= rho0 {
            break;
        }
        consider(rho)?;
    }
    consider(rho0)?;
    // Kramer's triple solves both stationarity equations, so it belongs to
    // the searched set; evaluating it exactly makes dominance hold without
    // depending on the grid resolution.
    if let Ok(k) = kramer_solution(ch) {
        if k.solution.rho <= rho0 {
            consider(k.solution.rho)?;
        }
    }

    let solution = best.ok_or(Error::Consistency {
        what: "empty correlation grid",
        deviation: rho0,
    })?;
    Ok(RateResult::from_solution(solution, step))
}

/// Kramer quartic divided by its constant term `2|a|P(a^2 P + 1)`.
pub fn kramer_quartic_residual(rho: f64, ch: &ChannelParams) -> f64 {
    let (a, p) = (ch.abs_a(), ch.p);
    let c0 = 2.0 * a * p * (a * a * p + 1.0);
    let c4 = 2.0 * a * a * a * p * p;
    let c3 = a * a * p;
    let c2 = -4.0 * a * p * (a * a * p + 1.0);
    let c1 = -(2.0 * a * a * p + p + 2.0);
    ((((c4 * rho + c3) * rho + c2) * rho + c1) * rho + c0) / c0
}

/// Kramer's linear feedback code: the `b` minimising `beta` in the power
/// equation alone, at the single `rho` where it also satisfies the
/// correlation equation.
pub fn kramer_solution(ch: &ChannelParams) -> Result<RateResult> {
    if ch.a == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let q = |r: f64| kramer_quartic_residual(r, ch);

    let mut bracket = None;
    let mut prev = q(0.0);
    for k in 1..=KRAMER_SCAN {
        let r = k as f64 / KRAMER_SCAN as f64;
        let cur = q(r);
        if prev == 0.0 {
            bracket = Some(((k - 1) as f64 / KRAMER_SCAN as f64, r));
            break;
        }
        if (prev > 0.0) != (cur > 0.0) || cur == 0.0 {
            bracket = Some(((k - 1) as f64 / KRAMER_SCAN as f64, r));
            break;
        }
        prev = cur;
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoBracket {
        what: "Kramer quartic",
    })?;

    let lo_positive = q(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = q(mid);
        if v == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = if libm::fabs(q(lo)) <= libm::fabs(q(hi)) {
        lo
    } else {
        hi
    };
    let residual = libm::fabs(q(rho));
    if residual > 1e-10 {
        return Err(Error::Consistency {
            what: "Kramer quartic residual",
            deviation: residual,
        });
    }

    let (a, p) = (ch.abs_a(), ch.p);
    let denom = p * (1.0 + a * a + 2.0 * a * rho) + 1.0;
    let b = p * (1.0 + a * rho) / denom;
    let beta = libm::sqrt((a * a * p * (1.0 - rho) * (1.0 + rho) + 1.0) / denom);
    let solution = FixedPointSolution::evaluate(rho, b, beta, ch);
    Ok(RateResult::from_solution(solution, 0.0))
}

/// Capacity of the interference-free channel, `log2(1 + P) / 2`.
pub fn degraded_rate(p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::domain("power", p));
    }
    Ok(0.5 * libm::log2(1.0 + p))
}

/// Correlation `rho* = sqrt(1 - P^-gamma + P^-(alpha-1)) - P^-((alpha-1)/2)`,
/// chosen so that `1 - rho*^2 - 2 rho* P^((1-alpha)/2) = P^-gamma`.
pub fn rho_star(alpha: f64, p: f64, gamma: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::domain("alpha", alpha));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::domain("power", p));
    }
    if !(gamma > 0.0 && gamma < alpha / 2.0) {
        return Err(Error::domain("gamma", gamma));
    }
    let c = libm::pow(p, -(alpha - 1.0) / 2.0);
    Ok(libm::sqrt(1.0 - libm::pow(p, -gamma) + c * c) - c)
}

/// `R_sym / log2(SNR)` in bits/s/Hz at `INR = SNR^alpha`.
pub fn gdof_ratio(alpha: f64, p: f64) -> Result<f64> {
    gdof_ratio_with_step(alpha, p, DEFAULT_GRID_STEP)
}

pub fn gdof_ratio_with_step(alpha: f64, p: f64, grid_step: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::domain("alpha", alpha));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::domain("power", p));
    }
    let ch = ChannelParams::from_alpha(alpha, p)?;
    let r = symmetric_rate(&ch, grid_step)?;
    Ok(r.rate_bits_per_s_hz / libm::log2(p))
}
