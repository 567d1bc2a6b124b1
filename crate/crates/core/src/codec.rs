//! Transmitter recursions and the receivers' iterated-function-system decoder.
//!
//! Each transmitter keeps an unsigned state `x_n`. Transmitter 1 emits
//! `x_n sgn(rho_n)`, transmitter 2 emits `x_n sgn(a)`; with these signs the
//! physical channel `Y1 = X1 + a X2 + Z1`, `Y2 = X2 + a X1 + Z2` becomes
//!
//! ```text
//! Y1 = x1 sgn(rho_n) + |a| x2 + Z1
//! Y2 = sgn(a) x2 + a sgn(rho_n) x1 + Z2
//! ```
//!
//! After observing its own output the transmitter updates
//! `x_{n+1} = (x_n - b_n s_n y_n) / beta_n`, where `s_n = sgn(rho_n)` for user
//! 1 and `sgn(a)` for user 2. The receiver inverts the same map,
//! `w_n(x) = beta_n x + b_n s_n y_n`, and pulls a fixed interval around zero
//! back through `w_1 o ... o w_n` onto `x_1`.

use crate::error::{Error, Result};
use crate::gauss::{log2_normal_mass, message_to_signal, phi, Probability};
use crate::bootstrap::Schedule;
use crate::sgn;

/// Which transmitter/receiver pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    First,
    Second,
}

impl Role {
    pub const BOTH: [Role; 2] = [Role::First, Role::Second];

    pub fn index(self) -> usize {
        match self {
            Role::First => 0,
            Role::Second => 1,
        }
    }

    /// The sign `s_n` multiplying this user's feedback at step `n`.
    fn feedback_sign(self, sched: &Schedule, n: usize) -> Result<f64> {
        match self {
            Role::First => sched
                .step(n)
                .map(|s| sgn(s.rho))
                .ok_or(Error::Schedule {
                    what: "step beyond horizon",
                    step: n,
                }),
            Role::Second => Ok(sgn(sched.channel().a())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderState {
    pub role: Role,
    /// Unsigned recursion state `x_n`.
    pub x: f64,
    /// Step index `n >= 1`.
    pub n: usize,
}

impl EncoderState {
    /// Channel symbol for the current step: `x_n` times the user's sign.
    pub fn emitted(&self, sched: &Schedule) -> Result<f64> {
        Ok(self.x * self.role.feedback_sign(sched, self.n)?)
    }
}

/// Step-one encoder: `x_1 = F^{-1}(theta)` for `X ~ N(0, P_1)`.
pub fn encoder_init(theta: Probability, sched: &Schedule, role: Role) -> Result<EncoderState> {
    Ok(EncoderState {
        role,
        x: message_to_signal(theta, sched.p1())?,
        n: 1,
    })
}

/// Consumes this user's feedback `y_n` and returns the next state with its
/// emitted symbol.
pub fn encoder_step(st: &EncoderState, y: f64, sched: &Schedule) -> Result<(EncoderState, f64)> {
    let step = sched.step(st.n).ok_or(Error::Schedule {
        what: "step beyond horizon",
        step: st.n,
    })?;
    if step.beta == 0.0 {
        return Err(Error::Schedule {
            what: "zero contraction factor",
            step: st.n,
        });
    }
    let s = st.role.feedback_sign(sched, st.n)?;
    let next = EncoderState {
        role: st.role,
        x: (st.x - step.b * s * y) / step.beta,
        n: st.n + 1,
    };
    let tx = next.emitted(sched)?;
    Ok((next, tx))
}

/// The interference channel acting on emitted symbols.
#[inline]
pub fn channel_step(tx1: f64, tx2: f64, a: f64, z1: f64, z2: f64) -> (f64, f64) {
    (tx1 + a * tx2 + z1, tx2 + a * tx1 + z2)
}

/// Receiver state: the composed map `T_n(s) = slope * s + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderState {
    pub role: Role,
    pub slope: f64,
    pub offset: f64,
    /// Number of observations absorbed.
    pub n: usize,
}

impl DecoderState {
    /// Identity map before any observation.
    pub fn new(role: Role) -> Self {
        DecoderState {
            role,
            slope: 1.0,
            offset: 0.0,
            n: 0,
        }
    }

    #[inline]
    pub fn apply(&self, s: f64) -> f64 {
        self.slope * s + self.offset
    }
}

/// Absorbs observation `y_n`: `T_n = T_{n-1} o w_n`.
pub fn decoder_update(st: &DecoderState, y: f64, sched: &Schedule) -> Result<DecoderState> {
    let n = st.n + 1;
    let step = sched.step(n).ok_or(Error::Schedule {
        what: "step beyond horizon",
        step: n,
    })?;
    let c = step.b * st.role.feedback_sign(sched, n)? * y;
    Ok(DecoderState {
        role: st.role,
        slope: st.slope * step.beta,
        offset: st.slope * c + st.offset,
        n,
    })
}

/// Decoded message interval.
///
/// Once the interval is narrower than the spacing of `f64` values near
/// `theta`, `lo` and `hi` may round to the same number; `log2_width` stays
/// exact and is the quantity rates are computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaInterval {
    pub lo: f64,
    pub hi: f64,
    pub log2_width: f64,
}

impl ThetaInterval {
    pub fn width(&self) -> f64 {
        libm::exp2(self.log2_width)
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo < theta && theta < self.hi
    }
}

/// Maps `(-h, h)` through `T_n` and the CDF of `N(0, P_1)`.
pub fn decode_interval(st: &DecoderState, half_width: f64, sched: &Schedule) -> Result<ThetaInterval> {
    if !(half_width > 0.0) {
        return Err(Error::domain("half width", half_width));
    }
    let scale = libm::sqrt(sched.p1());
    // All beta_k > 0, so T_n is increasing and the endpoints stay ordered.
    let center = st.offset / scale;
    let half = half_width * st.slope / scale;
    Ok(ThetaInterval {
        lo: phi(center - half),
        hi: phi(center + half),
        log2_width: log2_normal_mass(center, half),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::build_schedule;
    use crate::gauss::RngStream;
    use crate::rate::ChannelParams;

    fn schedule(a: f64, p: f64, rho: f64, n: usize) -> Schedule {
        build_schedule(rho, &ChannelParams::new(a, p).unwrap(), n).unwrap()
    }

    #[test]
    fn init_examples() {
        let s = schedule(1.0, 10.0, 0.0, 4);
        let st = encoder_init(Probability::new(0.5).unwrap(), &s, Role::First).unwrap();
        assert_eq!(st.x, 0.0);
        assert_eq!(st.emitted(&s).unwrap(), 0.0);
        assert!(encoder_init(Probability::new(1.0).unwrap(), &s, Role::First).is_err());
    }

    #[test]
    fn init_uses_first_step_power() {
        // P_1 = 4 is the rho = 0 bootstrap at P = 4.
        let s = schedule(1.0, 4.0, 0.0, 4);
        assert_eq!(s.p1(), 4.0);
        let st = encoder_init(Probability::new(0.975).unwrap(), &s, Role::Second).unwrap();
        assert!((st.x - 3.919928).abs() < 1e-4);
    }

    #[test]
    fn identity_step() {
        // rho = 0 with the b = 0 root: beta = 1 and the state is frozen.
        let s = schedule(3.0, 2.0, 0.0, 4);
        assert_eq!(s.steady().b, 0.0, "b = 1 would expand at this gain");
        let st = EncoderState {
            role: Role::First,
            x: 1.25,
            n: 2,
        };
        let (next, _) = encoder_step(&st, 7.0, &s).unwrap();
        assert_eq!(next.x, 1.25);
    }

    #[test]
    fn decoder_inverts_encoder_one_step() {
        let s = schedule(0.8, 12.0, 0.4, 6);
        for role in Role::BOTH {
            let st = EncoderState { role, x: -0.37, n: 1 };
            let y = 1.9;
            let (next, _) = encoder_step(&st, y, &s).unwrap();
            let dec = decoder_update(&DecoderState::new(role), y, &s).unwrap();
            assert!((dec.apply(next.x) - st.x).abs() < 1e-12);
            let step = s.step(1).unwrap();
            assert_eq!(dec.slope, step.beta);
        }
    }

    #[test]
    fn channel_examples() {
        assert_eq!(channel_step(1.0, 1.0, 0.5, 0.0, 0.0), (1.5, 1.5));
        assert_eq!(channel_step(2.0, 0.0, -0.7, 0.0, 0.0), (2.0, -1.4));
    }

    #[test]
    fn slope_is_product_of_betas() {
        let s = schedule(1.0, 10.0, 0.5, 12);
        let mut dec = DecoderState::new(Role::First);
        let mut product = 1.0;
        for n in 1..=10 {
            dec = decoder_update(&dec, 0.3, &s).unwrap();
            product *= s.step(n).unwrap().beta;
        }
        assert_eq!(dec.slope, product);
        let beta = s.steady().beta;
        assert!((dec.slope - s.step(1).unwrap().beta * beta.powi(9)).abs() < 1e-15);
    }

    #[test]
    fn round_trip_with_noise() {
        let c = ChannelParams::new(0.6, 25.0).unwrap();
        let r0 = crate::rate::rho_max(&c).unwrap();
        let s = build_schedule(0.9 * r0, &c, 201).unwrap();
        let mut rng = RngStream::new(11, 0);
        let mut enc = [
            encoder_init(rng.uniform_open(), &s, Role::First).unwrap(),
            encoder_init(rng.uniform_open(), &s, Role::Second).unwrap(),
        ];
        let x1 = [enc[0].x, enc[1].x];
        let mut dec = [DecoderState::new(Role::First), DecoderState::new(Role::Second)];
        let mut tx = [enc[0].emitted(&s).unwrap(), enc[1].emitted(&s).unwrap()];
        for _ in 0..200 {
            let (y1, y2) = channel_step(tx[0], tx[1], c.a(), rng.gaussian(1.0), rng.gaussian(1.0));
            for (i, y) in [y1, y2].into_iter().enumerate() {
                dec[i] = decoder_update(&dec[i], y, &s).unwrap();
                let (next, t) = encoder_step(&enc[i], y, &s).unwrap();
                enc[i] = next;
                tx[i] = t;
            }
            for i in 0..2 {
                let back = dec[i].apply(enc[i].x);
                let scale = x1[i].abs().max(s.p1().sqrt());
                assert!((back - x1[i]).abs() <= 1e-9 * scale, "n={} user {i}", dec[i].n);
            }
        }
    }

    #[test]
    fn interval_width_grows_with_half_width() {
        let s = schedule(1.0, 10.0, 0.5, 8);
        let mut dec = DecoderState::new(Role::Second);
        for y in [0.4, -1.1, 2.0] {
            dec = decoder_update(&dec, y, &s).unwrap();
        }
        let mut prev = f64::NEG_INFINITY;
        let mut prev_iv: Option<ThetaInterval> = None;
        for h in [0.1, 0.5, 1.0, 3.0, 10.0] {
            let iv = decode_interval(&dec, h, &s).unwrap();
            assert!(iv.lo < iv.hi);
            assert!(iv.log2_width > prev);
            if let Some(p) = prev_iv {
                assert!(iv.lo <= p.lo && iv.hi >= p.hi);
            }
            prev = iv.log2_width;
            prev_iv = Some(iv);
        }
        let wide = decode_interval(&dec, 1e6, &s).unwrap();
        assert!(wide.lo < 1e-12 && wide.hi > 1.0 - 1e-12);
        assert!(decode_interval(&dec, 0.0, &s).is_err());
    }

    #[test]
    fn noiseless_containment() {
        let c = ChannelParams::new(0.5, 10.0).unwrap();
        let s = build_schedule(0.6, &c, 30).unwrap();
        let theta = [Probability::new(0.31).unwrap(), Probability::new(0.77).unwrap()];
        let mut enc = [
            encoder_init(theta[0], &s, Role::First).unwrap(),
            encoder_init(theta[1], &s, Role::Second).unwrap(),
        ];
        let mut dec = [DecoderState::new(Role::First), DecoderState::new(Role::Second)];
        let mut tx = [enc[0].emitted(&s).unwrap(), enc[1].emitted(&s).unwrap()];
        for _ in 0..12 {
            let (y1, y2) = channel_step(tx[0], tx[1], c.a(), 0.0, 0.0);
            for (i, y) in [y1, y2].into_iter().enumerate() {
                dec[i] = decoder_update(&dec[i], y, &s).unwrap();
                let (next, t) = encoder_step(&enc[i], y, &s).unwrap();
                enc[i] = next;
                tx[i] = t;
                let h = enc[i].x.abs() + 1.0;
                let iv = decode_interval(&dec[i], h, &s).unwrap();
                assert!(iv.contains(theta[i].value()), "n={} user {i}", dec[i].n);
            }
        }
    }

    #[test]
    fn encoder_step_needs_horizon() {
        let s = schedule(1.0, 10.0, 0.5, 3);
        let st = EncoderState {
            role: Role::First,
            x: 0.1,
            n: 3,
        };
        assert!(matches!(encoder_step(&st, 0.0, &s), Err(Error::Schedule { .. })));
    }
}
