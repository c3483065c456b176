//! Thermal-state entropy `g` and the correlation functions `d`, `d_0`, `d_1`
//! of the entanglement-assisted capacity formula.
//!
//! Everything here is in bits. The natural-log variants (`*_nats`) are kept
//! crate-private and exist only so that sums of several entropy terms can be
//! divided by `ln 2` once.
//!
//! ## Stable forms
//!
//! With `B = 1 + nu - (1 - tau) n` and `C = 1 - nu + (1 - tau) n` the radicand
//! of `d` satisfies
//!
//! ```text
//! d^2 = B^2 + 4 n (1 + nu - tau)        (sum of non-negative terms)
//!     = C^2 + 4 nu (n + 1)
//! ```
//!
//! so `d >= 0` holds for every `tau` in `[0, 1]`, `n >= 0`, `nu >= 0`, and
//!
//! ```text
//! d_1 = (d - B) / 2 = 2 n (1 + nu - tau) / (d + B)
//! d_0 = (d - C) / 2 = 2 nu (n + 1)       / (d + C)
//! ```
//!
//! which never subtract nearly equal quantities when `B, C > 0`.
//!
//! Note: `d(tau, 0, nu) = nu + 1`, not `0`. The latter value sometimes quoted
//! for this limit is wrong (it would contradict `d_0(tau, 0, nu) = nu`).
//!
//! ## Small-argument expansion
//!
//! For small `eps`, `g(eps) ~ ((1 + eps) eps - eps ln(eps)) / ln 2`: the
//! logarithm in the expansion is natural and the whole bracket is converted
//! to bits afterwards. Reading the `ln` as `log2` instead is off by
//! `eps (1/ln 2 - 1)`, a few percent at `eps = 1e-4`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, Error, Result};

/// Above this argument `g` switches to `log2(x) + (1 + 1/(2x)) / ln 2`.
pub const LARGE_ARGUMENT: f64 = 1e15;

/// Below this photon number `d_1` uses its two-term Taylor expansion.
pub const TAYLOR_THRESHOLD: f64 = 1e-30;

/// Mean photon number per mode per channel use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PhotonNumber(f64);

/// Power transmittivity in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Transmittivity(f64);

/// Mean thermal noise photons per mode per channel use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoisePhotons(f64);

impl PhotonNumber {
    pub const ZERO: PhotonNumber = PhotonNumber(0.0);

    pub fn new(value: f64) -> Result<Self> {
        non_negative("photon number", value).map(PhotonNumber)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Transmittivity {
    pub const ONE: Transmittivity = Transmittivity(1.0);

    pub fn new(value: f64) -> Result<Self> {
        non_negative("transmittivity", value)?;
        if value > 1.0 {
            return Err(Error::domain("transmittivity", value, "must not exceed 1"));
        }
        Ok(Transmittivity(value))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl NoisePhotons {
    pub const ZERO: NoisePhotons = NoisePhotons(0.0);

    pub fn new(value: f64) -> Result<Self> {
        non_negative("noise photons", value).map(NoisePhotons)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

macro_rules! impl_f64_conversions {
    ($($ty:ident),*) => {$(
        impl TryFrom<f64> for $ty {
            type Error = Error;
            fn try_from(value: f64) -> Result<Self> {
                $ty::new(value)
            }
        }

        impl From<$ty> for f64 {
            fn from(value: $ty) -> f64 {
                value.0
            }
        }
    )*};
}

impl_f64_conversions!(PhotonNumber, Transmittivity, NoisePhotons);

/// Selects `d_0` (`x = 0`, written `d_+` in the asymptotic analysis) or
/// `d_1` (`x = 1`, written `d_-`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// The index `x` of `d_x`.
    pub fn index(self) -> u8 {
        match self {
            Branch::Plus => 0,
            Branch::Minus => 1,
        }
    }

    pub fn from_index(x: u8) -> Result<Self> {
        match x {
            0 => Ok(Branch::Plus),
            1 => Ok(Branch::Minus),
            _ => Err(Error::domain("d_x index", f64::from(x), "must be 0 or 1")),
        }
    }
}

/// `ln(1 + u) - u`, accurate for small `|u|`.
fn ln_1p_minus_identity(u: f64) -> f64 {
    if u.abs() < 1e-2 {
        // sum_{k >= 2} (-1)^{k+1} u^k / k
        let mut power = u;
        let mut sum = 0.0;
        for k in 2..40 {
            power *= -u;
            let term = power / k as f64;
            sum += term;
            if term.abs() <= f64::EPSILON * 1e-3 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        u.ln_1p() - u
    }
}

/// Thermal entropy in nats for a validated, non-negative argument.
pub(crate) fn g_nats(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < 1.0 {
        // both terms are positive for x < 1
        (1.0 + x) * x.ln_1p() - x * x.ln()
    } else if x <= LARGE_ARGUMENT {
        // (x+1) ln(x+1) - x ln x = ln(1+x) + x ln(1 + 1/x)
        x.ln_1p() + x * x.recip().ln_1p()
    } else {
        x.ln() + 1.0 + 0.5 / x
    }
}

/// `x phi(1/x) = x ln(1 + 1/x) - 1`, so that `g(x) = ln(1 + x) + 1 + tail(x)`
/// in nats. Small (about `-1/(2x)`) for large `x`.
fn entropy_tail(x: f64) -> f64 {
    x * ln_1p_minus_identity(x.recip())
}

/// `g(base + delta) - g(base)` in nats, with `delta` carried separately so a
/// tiny increment is not lost in `base + delta`.
pub(crate) fn g_increment_nats(base: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    let top = base + delta;
    if base == 0.0 {
        return g_nats(top);
    }
    if top <= 1e-280 || base <= 1e-280 {
        return g_nats(top) - g_nats(base);
    }
    if base >= 1.0 && top >= 1.0 && delta.abs() >= 1.0 {
        // ln((top + 1)/(base + 1)) plus the difference of two small tails;
        // relative error stays near eps for large base and large delta
        return (delta / (base + 1.0)).ln_1p() + (entropy_tail(top) - entropy_tail(base));
    }
    if delta.abs() > 0.5 * base {
        return g_nats(top) - g_nats(base);
    }
    // F(y) = y ln y and F(y + h) - F(y) = h + y*phi(h/y) + h ln(y + h), with
    // phi(u) = ln(1+u) - u. The two `h` terms cancel analytically, leaving
    //   g(a) - g(b) = (b+1) phi(h/(b+1)) - b phi(h/b) + h ln(1 + 1/a).
    // Accurate for |h| < 1, where the phi terms are O(h^2 / b).
    (base + 1.0) * ln_1p_minus_identity(delta / (base + 1.0))
        - base * ln_1p_minus_identity(delta / base)
        + delta * top.recip().ln_1p()
}

/// Entropy of a zero-mean single-mode thermal state with mean photon number
/// `x`, `g(x) = (x+1) log2(x+1) - x log2(x)`, in bits.
pub fn g(x: PhotonNumber) -> f64 {
    g_nats(x.0) / LN_2
}

/// Convenience wrapper validating a raw `f64` argument.
pub fn g_checked(x: f64) -> Result<f64> {
    PhotonNumber::new(x).map(g)
}

/// `g(a) - g(b)` without cancellation when `a` and `b` are close.
pub fn g_diff(a: PhotonNumber, b: PhotonNumber) -> f64 {
    g_increment_nats(b.0, a.0 - b.0) / LN_2
}

/// `g(base + delta) - g(base)` for an increment known exactly on its own.
///
/// `delta` may be negative as long as `base + delta >= 0`.
pub fn g_increment(base: PhotonNumber, delta: f64) -> Result<f64> {
    if !delta.is_finite() || base.0 + delta < 0.0 {
        return Err(Error::domain("delta", delta, "base + delta must be >= 0"));
    }
    Ok(g_increment_nats(base.0, delta) / LN_2)
}

/// `1 + nu - (1 - tau) n`
fn shifted_b(tau: f64, n: f64, nu: f64) -> f64 {
    1.0 + nu - (1.0 - tau) * n
}

/// `1 - nu + (1 - tau) n`
fn shifted_c(tau: f64, n: f64, nu: f64) -> f64 {
    1.0 - nu + (1.0 - tau) * n
}

/// Radicand of `d` in the cancellation-free form `B^2 + 4 n (1 + nu - tau)`.
pub(crate) fn radicand(tau: f64, n: f64, nu: f64) -> f64 {
    let b = shifted_b(tau, n, nu);
    b * b + 4.0 * n * ((1.0 - tau) + nu)
}

pub(crate) fn d_raw(tau: f64, n: f64, nu: f64) -> Result<f64> {
    if n == 0.0 {
        return Ok(nu + 1.0);
    }
    let r = radicand(tau, n, nu);
    if r < -1e-15 {
        return Err(Error::NegativeRadicand(r));
    }
    Ok(r.max(0.0).sqrt())
}

pub(crate) fn d_minus_raw(tau: f64, n: f64, nu: f64, d: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    if n < TAYLOR_THRESHOLD {
        let s = 1.0 + nu;
        let slope = ((1.0 - tau) + nu) / s;
        return slope * n * (1.0 - tau * nu * n / (s * s));
    }
    let b = shifted_b(tau, n, nu);
    if b > 0.0 {
        2.0 * n * ((1.0 - tau) + nu) / (d + b)
    } else {
        0.5 * (d - b)
    }
}

pub(crate) fn d_plus_raw(tau: f64, n: f64, nu: f64, d: f64) -> f64 {
    if n == 0.0 {
        return nu;
    }
    let c = shifted_c(tau, n, nu);
    if c > 0.0 {
        2.0 * nu * (n + 1.0) / (d + c)
    } else {
        0.5 * (d - c)
    }
}

/// `tau n + nu - d_0`, the gap between the x = 1 output argument and `d_0`.
///
/// Equals `((1 + tau) n + nu + 1 - d) / 2 = 2 tau n (n + 1) / (A + d)` with
/// `A = (1 + tau) n + nu + 1`.
pub(crate) fn output_minus_d_plus(tau: f64, n: f64, nu: f64, d: f64) -> f64 {
    let a = (1.0 + tau) * n + nu + 1.0;
    2.0 * tau * n * (n + 1.0) / (a + d)
}

/// `d(tau, n, nu) = sqrt(((1+tau) n + nu + 1)^2 - 4 tau n (n+1))`.
pub fn d(tau: Transmittivity, n: PhotonNumber, nu: NoisePhotons) -> Result<f64> {
    d_raw(tau.0, n.0, nu.0)
}

/// `d_x = (d - 1 + (-1)^x ((tau - 1) n + nu)) / 2`.
pub fn d_x(
    branch: Branch,
    tau: Transmittivity,
    n: PhotonNumber,
    nu: NoisePhotons,
) -> Result<f64> {
    let dv = d_raw(tau.0, n.0, nu.0)?;
    Ok(match branch {
        Branch::Plus => d_plus_raw(tau.0, n.0, nu.0, dv),
        Branch::Minus => d_minus_raw(tau.0, n.0, nu.0, dv),
    })
}

/// `d_0`, written `d_+` in the asymptotic analysis.
pub fn d_plus(tau: Transmittivity, n: PhotonNumber, nu: NoisePhotons) -> Result<f64> {
    d_x(Branch::Plus, tau, n, nu)
}

/// `d_1`, written `d_-` in the asymptotic analysis.
pub fn d_minus(tau: Transmittivity, n: PhotonNumber, nu: NoisePhotons) -> Result<f64> {
    d_x(Branch::Minus, tau, n, nu)
}

/// Derivative of `d_1` with respect to `n` at `n = 0`:
/// `T = (1 + nu - tau) / (1 + nu)`.
pub fn d1_slope_at_zero(tau: Transmittivity, nu: NoisePhotons) -> f64 {
    ((1.0 - tau.0) + nu.0) / (1.0 + nu.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pn(x: f64) -> PhotonNumber {
        PhotonNumber::new(x).unwrap()
    }
    fn tr(x: f64) -> Transmittivity {
        Transmittivity::new(x).unwrap()
    }
    fn np(x: f64) -> NoisePhotons {
        NoisePhotons::new(x).unwrap()
    }

    #[test]
    fn g_identities() {
        assert_eq!(g(pn(0.0)), 0.0);
        assert!((g(pn(1.0)) - 2.0).abs() < 1e-15);
        // g(3) = 4 log2 4 - 3 log2 3
        let expected = 8.0 - 3.0 * 3f64.log2();
        assert!((g(pn(3.0)) - expected).abs() < 1e-14);
    }

    #[test]
    fn g_rejects_bad_arguments() {
        assert!(g_checked(-1e-300).is_err());
        assert!(g_checked(f64::NAN).is_err());
        assert!(g_checked(f64::INFINITY).is_err());
    }

    #[test]
    fn g_is_continuous_across_branches() {
        for &x in &[1.0, LARGE_ARGUMENT] {
            let below = g(pn(x * (1.0 - 1e-12)));
            let above = g(pn(x * (1.0 + 1e-12)));
            assert!(((above - below) / above).abs() < 1e-10, "jump at {x}");
        }
    }

    #[test]
    fn small_argument_expansion_uses_natural_log() {
        let mut eps = 1e-12;
        while eps <= 1e-4 {
            let exact = g(pn(eps));
            let natural = ((1.0 + eps) * eps - eps * eps.ln()) / LN_2;
            assert!(((exact - natural) / exact).abs() < 1e-3, "eps={eps}");
            eps *= 10.0;
        }
        // the log2 reading drifts by a few percent at 1e-4
        let eps: f64 = 1e-4;
        let mixed = (1.0 + eps) * eps - eps * eps.log2();
        assert!(((g(pn(eps)) - mixed) / g(pn(eps))).abs() > 1e-2);
    }

    #[test]
    fn g_diff_identities() {
        assert_eq!(g_diff(pn(5.0), pn(5.0)), 0.0);
        assert!((g_diff(pn(1.0), pn(0.0)) - 2.0).abs() < 1e-15);
        // antisymmetric
        let a = g_diff(pn(2.5), pn(2.4));
        let b = g_diff(pn(2.4), pn(2.5));
        assert!((a + b).abs() < 1e-16);
    }

    #[test]
    fn g_diff_tracks_derivative_for_tiny_steps() {
        // g'(x) = log2((x+1)/x)
        for &x in &[1e-3, 0.5, 5.0, 1e3, 1e12, 1e18] {
            let h = x * 1e-11;
            let diff = g_increment(pn(x), h).unwrap();
            let slope = x.recip().ln_1p() / LN_2;
            assert!(((diff / h - slope) / slope).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn g_increment_validates_target() {
        assert!(g_increment(pn(1.0), -2.0).is_err());
        assert!(g_increment(pn(1.0), f64::NAN).is_err());
        assert!((g_increment(pn(1.0), -1.0).unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn d_limits() {
        for &t in &[0.0, 0.3, 1.0] {
            for &v in &[0.0, 0.7, 12.0] {
                assert_eq!(d(tr(t), pn(0.0), np(v)).unwrap(), v + 1.0);
                assert_eq!(d_minus(tr(t), pn(0.0), np(v)).unwrap(), 0.0);
                assert_eq!(d_plus(tr(t), pn(0.0), np(v)).unwrap(), v);
            }
        }
        for &n in &[0.0, 1e-9, 1.0, 1e6] {
            assert!((d(tr(1.0), pn(n), np(0.0)).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn d_x_sum_and_difference() {
        for &t in &[0.05, 0.5, 0.99] {
            for &n in &[1e-20, 1e-5, 0.3, 40.0] {
                for &v in &[1e-3, 0.9, 50.0] {
                    let dv = d(tr(t), pn(n), np(v)).unwrap();
                    let p = d_plus(tr(t), pn(n), np(v)).unwrap();
                    let m = d_minus(tr(t), pn(n), np(v)).unwrap();
                    assert!((p + m - (dv - 1.0)).abs() <= 1e-12 * dv);
                    let gap = (t - 1.0) * n + v;
                    assert!((p - m - gap).abs() <= 1e-12 * p.abs().max(m.abs()));
                }
            }
        }
    }

    #[test]
    fn d_minus_taylor_branch_is_continuous() {
        let (t, v) = (tr(0.8), np(1.5));
        let below = d_minus(t, pn(TAYLOR_THRESHOLD * 0.999_999), v).unwrap();
        let above = d_minus(t, pn(TAYLOR_THRESHOLD), v).unwrap();
        assert!(((above - below) / above - 1e-6).abs() < 1e-9);
    }

    #[test]
    fn d_minus_large_n_uses_direct_branch() {
        // B = 1 + nu - (1 - tau) n < 0 here
        let (t, n, v) = (0.1, 100.0, 1.0);
        let m = d_minus(tr(t), pn(n), np(v)).unwrap();
        let dv = d(tr(t), pn(n), np(v)).unwrap();
        let direct = 0.5 * (dv - (1.0 + v - (1.0 - t) * n));
        assert!(((m - direct) / m).abs() < 1e-12);
    }

    #[test]
    fn slope_examples() {
        assert_eq!(d1_slope_at_zero(tr(1.0), np(0.0)), 0.0);
        assert_eq!(d1_slope_at_zero(tr(0.5), np(1.0)), 0.75);
    }

    #[test]
    fn branch_index_round_trip() {
        assert_eq!(Branch::from_index(0).unwrap(), Branch::Plus);
        assert_eq!(Branch::from_index(1).unwrap().index(), 1);
        assert!(Branch::from_index(2).is_err());
    }

    #[test]
    fn newtypes_validate() {
        assert!(Transmittivity::new(1.0 + 1e-15).is_err());
        assert!(Transmittivity::new(-0.0).is_ok());
        assert!(NoisePhotons::new(-1.0).is_err());
        assert!(PhotonNumber::new(f64::INFINITY).is_err());
    }
}
