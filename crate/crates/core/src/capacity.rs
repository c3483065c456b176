//! Shannon, Holevo and entanglement-assisted capacities of `M` parallel
//! thermal-noise bosonic modes sharing a total photon budget `P`.
//!
//! All capacities are returned in bits per unit time when `P` is a photon
//! rate (photons/s), or bits per block when `P` is photons per block.
//!
//! The entanglement-assisted capacity is a sum of four entropies,
//!
//! ```text
//! C_E = M [g(n) - g(d_0)] + M [g(tau n + nu) - g(d_1)],     n = P / M,
//! ```
//!
//! whose two brackets individually grow like `+-M g(nu)`. For large `M` the
//! sum is therefore evaluated in the regrouped pairing
//!
//! ```text
//! C_E = M [g(tau n + nu) - g(d_0)] + M [g(n) - g(d_1)]
//!         (noise term -> constant)   (growth term ~ P (1 - T) log2 M)
//! ```
//!
//! where both brackets are small differences of nearby arguments and are
//! computed with [`g_increment`](crate::entropy::g_increment)-style kernels.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::entropy::{
    d1_slope_at_zero, d_minus_raw, d_plus_raw, d_raw, g_increment_nats, g_nats,
    output_minus_d_plus, NoisePhotons, Transmittivity,
};
use crate::error::{non_negative, Error, Result};

/// Lower end of the initial bisection bracket for [`min_modes_for_advantage`].
pub const ADVANTAGE_BRACKET_LO: f64 = 1e2;
/// Upper end of the initial bisection bracket.
pub const ADVANTAGE_BRACKET_HI: f64 = 1e20;
/// Search ceiling for [`min_modes_for_advantage`].
pub const ADVANTAGE_M_MAX: f64 = 1e60;
/// Bisection stops once the bracket is narrower than this in `log2 M`.
pub const ADVANTAGE_LOG2_TOLERANCE: f64 = 1e-3;

/// Effective single-use description of `M` parallel modes.
///
/// `modes` is a real number: the interesting range reaches `1e40`, far
/// beyond exactly representable integers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    modes: f64,
    power: f64,
    tau: Transmittivity,
    nu: NoisePhotons,
}

impl ChannelParams {
    pub fn new(modes: f64, power: f64, tau: Transmittivity, nu: NoisePhotons) -> Result<Self> {
        non_negative("modes", modes)?;
        if modes < 1.0 {
            return Err(Error::domain("modes", modes, "must be at least 1"));
        }
        non_negative("power", power)?;
        let n = power / modes;
        non_negative("photons per mode", n)?;
        Ok(ChannelParams {
            modes,
            power,
            tau,
            nu,
        })
    }

    /// Shorthand taking raw numbers, validating all four.
    pub fn from_raw(modes: f64, power: f64, tau: f64, nu: f64) -> Result<Self> {
        Self::new(
            modes,
            power,
            Transmittivity::new(tau)?,
            NoisePhotons::new(nu)?,
        )
    }

    pub fn modes(&self) -> f64 {
        self.modes
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn tau(&self) -> Transmittivity {
        self.tau
    }

    pub fn nu(&self) -> NoisePhotons {
        self.nu
    }

    /// Photons per mode `n = P / M`.
    pub fn photons_per_mode(&self) -> f64 {
        self.power / self.modes
    }

    /// `T = (1 + nu - tau) / (1 + nu)`.
    pub fn slope_t(&self) -> f64 {
        d1_slope_at_zero(self.tau, self.nu)
    }
}

/// All capacities at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub shannon: f64,
    pub holevo: f64,
    pub ea: f64,
    /// `P (1 - T) log2 M`.
    pub ea_approx: f64,
    /// `M [g(n) - g(d_0)]`, the x = 0 summand as written in the capacity formula.
    pub ea_term_x0: f64,
    /// `M [g(tau n + nu) - g(d_1)]`, the x = 1 summand.
    pub ea_term_x1: f64,
    /// `M [g(tau n + nu) - g(d_0)]`, bounded as `M -> infinity`.
    pub ea_noise_term: f64,
    /// `M [g(n) - g(d_1)]`, the logarithmically growing part.
    pub ea_growth_term: f64,
    pub slope_t: f64,
}

/// Entanglement-assisted capacity in both pairings of its four entropy terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EaBreakdown {
    /// Sum of the regrouped terms.
    pub total: f64,
    pub term_x0: f64,
    pub term_x1: f64,
    pub noise_term: f64,
    pub growth_term: f64,
}

/// `M log2(1 + tau P / (M (1 + nu)))`.
pub fn shannon_capacity(ch: &ChannelParams) -> f64 {
    let snr = ch.tau.get() * ch.photons_per_mode() / (1.0 + ch.nu.get());
    ch.modes * snr.ln_1p() / LN_2
}

/// `M (g(tau P / M + nu) - g(nu))`.
pub fn holevo_capacity(ch: &ChannelParams) -> f64 {
    let signal = ch.tau.get() * ch.photons_per_mode();
    ch.modes * g_increment_nats(ch.nu.get(), signal) / LN_2
}

/// `M sum_x [g(tau^x P/M + x nu) - g(d_x(tau, P/M, nu))]`.
pub fn ea_capacity(ch: &ChannelParams) -> Result<EaBreakdown> {
    let (tau, nu) = (ch.tau.get(), ch.nu.get());
    let n = ch.photons_per_mode();
    let m = ch.modes;
    let d = d_raw(tau, n, nu)?;
    let d_plus = d_plus_raw(tau, n, nu, d);
    let d_minus = d_minus_raw(tau, n, nu, d);

    let noise = m * g_increment_nats(d_plus, output_minus_d_plus(tau, n, nu, d)) / LN_2;
    let growth = m * g_increment_nats(d_minus, n - d_minus) / LN_2;

    let output = tau * n + nu;
    let term_x0 = m * (g_nats(n) - g_nats(d_plus)) / LN_2;
    let term_x1 = m * (g_nats(output) - g_nats(d_minus)) / LN_2;

    Ok(EaBreakdown {
        total: noise + growth,
        term_x0,
        term_x1,
        noise_term: noise,
        growth_term: growth,
    })
}

/// `P (1 - T) log2 M` with `T = (1 + nu - tau) / (1 + nu)`.
pub fn ea_asymptotic(ch: &ChannelParams) -> f64 {
    let one_minus_t = ch.tau.get() / (1.0 + ch.nu.get());
    ch.power * one_minus_t * ch.modes.log2()
}

/// The constant the noise term is stated to approach, taken literally and
/// multiplied by `P`: `P (1 - tau nu / (1 + nu)) log2(1 + nu) / nu`.
///
/// This literal form does not match the numerically observed limit; see
/// [`ea_noise_limit`] for the value the noise term actually converges to.
pub fn ea_constant_as_printed(power: f64, tau: Transmittivity, nu: NoisePhotons) -> Result<f64> {
    let (t, v) = (tau.get(), nu.get());
    if v == 0.0 {
        return Err(Error::Diverges("asymptotic constant"));
    }
    Ok(power * (1.0 - t * v / (1.0 + v)) * v.ln_1p() / LN_2 / v)
}

/// `lim_{M -> inf} M [g(tau P/M + nu) - g(d_0)] = P tau / (1 + nu) log2((1 + nu) / nu)`.
///
/// Follows from `d d_0/dn |_{n=0} = tau nu / (1 + nu)` and `g'(nu) = log2((1+nu)/nu)`.
pub fn ea_noise_limit(power: f64, tau: Transmittivity, nu: NoisePhotons) -> Result<f64> {
    let v = nu.get();
    if v == 0.0 {
        return Err(Error::Diverges("noise-term limit"));
    }
    Ok(power * tau.get() / (1.0 + v) * v.recip().ln_1p() / LN_2)
}

/// `lim_{M -> inf} C_J = P tau log2((1 + nu) / nu)`.
pub fn holevo_limit(power: f64, tau: Transmittivity, nu: NoisePhotons) -> Result<f64> {
    non_negative("power", power)?;
    let v = nu.get();
    if v == 0.0 {
        return Err(Error::Diverges("Holevo limit"));
    }
    Ok(power * tau.get() * v.recip().ln_1p() / LN_2)
}

/// `lim_{M -> inf} C_S = P tau / ((1 + nu) ln 2)`; an upper bound for every `M`.
pub fn shannon_saturation(power: f64, tau: Transmittivity, nu: NoisePhotons) -> f64 {
    power * tau.get() / ((1.0 + nu.get()) * LN_2)
}

/// Evaluates every capacity at one point.
pub fn capacities(ch: &ChannelParams) -> Result<CapacityResult> {
    let ea = ea_capacity(ch)?;
    Ok(CapacityResult {
        shannon: shannon_capacity(ch),
        holevo: holevo_capacity(ch),
        ea: ea.total,
        ea_approx: ea_asymptotic(ch),
        ea_term_x0: ea.term_x0,
        ea_term_x1: ea.term_x1,
        ea_noise_term: ea.noise_term,
        ea_growth_term: ea.growth_term,
        slope_t: ch.slope_t(),
    })
}

/// Outcome of the smallest-`M` search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Advantage {
    pub modes: f64,
    pub ea: f64,
    pub holevo: f64,
    pub ratio: f64,
}

/// Smallest `M` with `C_E >= factor * C_J` for a fixed effective channel.
pub fn min_modes_for_advantage(
    power: f64,
    tau: Transmittivity,
    nu: NoisePhotons,
    factor: f64,
) -> Result<Advantage> {
    if nu.get() == 0.0 {
        return Err(Error::Diverges("Holevo limit"));
    }
    min_modes_for_advantage_with(|m| ChannelParams::new(m, power, tau, nu), factor)
}

/// Same search for a channel whose parameters depend on `M` (e.g. G2 links).
///
/// The bracket starts at `[1e2, 1e20]`; its upper exponent is doubled until
/// the condition holds or `1e60` is reached. The crossing is then bisected in
/// `log2 M` down to a width of `1e-3`, and the upper end is returned.
pub fn min_modes_for_advantage_with<F>(channel_at: F, factor: f64) -> Result<Advantage>
where
    F: Fn(f64) -> Result<ChannelParams>,
{
    if !factor.is_finite() || factor < 1.0 {
        return Err(Error::domain("factor", factor, "must be finite and >= 1"));
    }
    let evaluate = |m: f64| -> Result<Advantage> {
        let ch = channel_at(m)?;
        let ea = ea_capacity(&ch)?.total;
        let holevo = holevo_capacity(&ch);
        Ok(Advantage {
            modes: m,
            ea,
            holevo,
            ratio: ea / holevo,
        })
    };
    let holds = |a: &Advantage| a.ea >= factor * a.holevo;

    let mut lo = ADVANTAGE_BRACKET_LO;
    let first = evaluate(lo)?;
    if holds(&first) {
        return Ok(first);
    }

    let mut exponent = ADVANTAGE_BRACKET_HI.log10();
    let hi = loop {
        let m = 10f64.powf(exponent).min(ADVANTAGE_M_MAX);
        if holds(&evaluate(m)?) {
            break m;
        }
        if m >= ADVANTAGE_M_MAX {
            return Err(Error::NoCrossing {
                factor,
                m_max: ADVANTAGE_M_MAX,
            });
        }
        lo = m;
        exponent *= 2.0;
    };

    if holds(&evaluate(lo)?) || !holds(&evaluate(hi)?) {
        return Err(Error::Bracket { lo, hi });
    }

    let (mut lo_log, mut hi_log) = (lo.log2(), hi.log2());
    while hi_log - lo_log > ADVANTAGE_LOG2_TOLERANCE {
        let mid = 0.5 * (lo_log + hi_log);
        if holds(&evaluate(mid.exp2())?) {
            hi_log = mid;
        } else {
            lo_log = mid;
        }
    }
    evaluate(hi_log.exp2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(m: f64, p: f64, t: f64, v: f64) -> ChannelParams {
        ChannelParams::from_raw(m, p, t, v).unwrap()
    }

    #[test]
    fn unit_channel_values() {
        let c = capacities(&ch(1.0, 1.0, 1.0, 0.0)).unwrap();
        assert!((c.shannon - 1.0).abs() < 1e-15);
        assert!((c.holevo - 2.0).abs() < 1e-15);
        assert!((c.ea - 4.0).abs() < 1e-15);
        assert_eq!(c.slope_t, 0.0);
    }

    #[test]
    fn zero_power_gives_zero() {
        let c = capacities(&ch(1e6, 0.0, 0.4, 2.0)).unwrap();
        assert_eq!(c.shannon, 0.0);
        assert_eq!(c.holevo, 0.0);
        assert_eq!(c.ea, 0.0);
        assert_eq!(c.ea_approx, 0.0);
    }

    #[test]
    fn pairings_agree() {
        let c = capacities(&ch(10.0, 7.0, 0.6, 0.9)).unwrap();
        let printed = c.ea_term_x0 + c.ea_term_x1;
        assert!(((printed - c.ea) / c.ea).abs() < 1e-12);
    }

    #[test]
    fn ea_doubles_holevo_on_pure_loss_free_channel() {
        for &(m, p) in &[(1.0, 1.0), (1e9, 1e16), (1e40, 1e16), (3.0, 1e-20)] {
            let c = capacities(&ch(m, p, 1.0, 0.0)).unwrap();
            assert!(((c.ea - 2.0 * c.holevo) / c.ea).abs() < 1e-12, "M={m}");
        }
    }

    #[test]
    fn invalid_channels_are_rejected() {
        assert!(ChannelParams::from_raw(0.5, 1.0, 1.0, 0.0).is_err());
        assert!(ChannelParams::from_raw(1.0, -1.0, 1.0, 0.0).is_err());
        assert!(ChannelParams::from_raw(1.0, 1.0, 1.5, 0.0).is_err());
        assert!(ChannelParams::from_raw(f64::NAN, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn asymptotic_examples() {
        let c = ch(1e30, 1e16, 1.0, 1.0);
        let expected = 1e16 * 0.5 * 1e30f64.log2();
        assert!(((ea_asymptotic(&c) - expected) / expected).abs() < 1e-15);
        let c = ch(1e10, 3.0, 1.0, 0.0);
        assert!(((ea_asymptotic(&c) - 3.0 * 1e10f64.log2()) / 30.0).abs() < 1e-15);
    }

    #[test]
    fn limits() {
        let one = Transmittivity::ONE;
        let nu1 = NoisePhotons::new(1.0).unwrap();
        assert!((holevo_limit(1e16, one, nu1).unwrap() - 1e16).abs() < 1.0);
        assert_eq!(
            holevo_limit(1e16, Transmittivity::new(0.0).unwrap(), nu1).unwrap(),
            0.0
        );
        assert_eq!(
            holevo_limit(1.0, one, NoisePhotons::ZERO),
            Err(Error::Diverges("Holevo limit"))
        );
        let s = shannon_saturation(1.0, one, NoisePhotons::ZERO);
        assert!((s - 1.0 / LN_2).abs() < 1e-15);
        let c = shannon_capacity(&ch(1e9, 1.0, 1.0, 0.0));
        assert!(((c - s) / s).abs() < 1e-6);
        let h = holevo_capacity(&ch(1e20, 1e16, 1.0, 1.0));
        assert!(h < 1e16 && (1e16 - h) / 1e16 < 0.01);
    }

    #[test]
    fn printed_constant_needs_noise() {
        let one = Transmittivity::ONE;
        assert!(ea_constant_as_printed(1.0, one, NoisePhotons::ZERO).is_err());
        assert!(ea_noise_limit(1.0, one, NoisePhotons::ZERO).is_err());
        let nu = NoisePhotons::new(1.0).unwrap();
        // P (1 - 1/2) log2(2) / 1
        assert!((ea_constant_as_printed(2.0, one, nu).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn advantage_factor_one_returns_lower_bracket() {
        let a = min_modes_for_advantage(
            1e16,
            Transmittivity::ONE,
            NoisePhotons::new(1.0).unwrap(),
            1.0,
        )
        .unwrap();
        assert_eq!(a.modes, ADVANTAGE_BRACKET_LO);
        assert!(a.ratio >= 1.0);
    }

    #[test]
    fn advantage_unreachable_factor() {
        let err = min_modes_for_advantage(
            1e16,
            Transmittivity::ONE,
            NoisePhotons::new(1.0).unwrap(),
            1e6,
        )
        .unwrap_err();
        assert_eq!(err.code(), "no_crossing");
    }

    #[test]
    fn advantage_rejects_bad_inputs() {
        let one = Transmittivity::ONE;
        assert!(min_modes_for_advantage(1e16, one, NoisePhotons::ZERO, 2.0).is_err());
        assert!(min_modes_for_advantage(1e16, one, NoisePhotons::new(1.0).unwrap(), 0.5).is_err());
    }
}
