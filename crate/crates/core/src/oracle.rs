//! High-precision reference evaluations.
//!
//! Every function here transcribes its formula literally, with no
//! rearrangement for numerical stability, and evaluates it with
//! [`PRECISION_BITS`] bits of mantissa (about 96 significant decimal digits).
//! The margin over 50 digits absorbs the worst cancellation in `d_1` and in
//! the four-term entanglement-assisted sum at `M = 1e40`.
//!
//! The oracle is slow (each logarithm costs microseconds) and is meant for
//! tests and validation runs only.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use crate::entropy::Branch;
use crate::error::{non_negative, Error, Result};
use crate::link::{GainRule, Receiver, SegmentedLink};

/// Working precision in bits.
pub const PRECISION_BITS: usize = 320;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// A real number carried at [`PRECISION_BITS`] bits.
#[derive(Clone, Debug)]
pub struct HighPrecisionValue(BigFloat);

impl HighPrecisionValue {
    /// Parses an exact decimal literal such as `"0.1"` or `"6.626e-34"`.
    pub fn from_decimal(text: &str) -> Result<Self> {
        let value = with_consts(|cc| BigFloat::parse(text, Radix::Dec, PRECISION_BITS, RM, cc));
        if value.is_nan() || value.is_inf() {
            return Err(Error::domain("decimal literal", f64::NAN, "not a finite number"));
        }
        Ok(HighPrecisionValue(value))
    }

    /// The exact value of a binary64 number (every finite double is a
    /// terminating decimal).
    pub fn from_f64(value: f64) -> Self {
        HighPrecisionValue(BigFloat::from_f64(value, PRECISION_BITS))
    }

    pub fn zero() -> Self {
        Self::from_f64(0.0)
    }

    pub fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// Decimal representation with all carried digits.
    pub fn to_decimal_string(&self) -> String {
        with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
    }

    /// Nearest binary64 value.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        self.to_decimal_string().parse().unwrap_or(f64::NAN)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        HighPrecisionValue(self.0.abs())
    }

    pub fn sqrt(&self) -> Self {
        HighPrecisionValue(self.0.sqrt(PRECISION_BITS, RM))
    }

    pub fn ln(&self) -> Self {
        HighPrecisionValue(with_consts(|cc| self.0.ln(PRECISION_BITS, RM, cc)))
    }

    pub fn log2(&self) -> Self {
        HighPrecisionValue(with_consts(|cc| self.0.log2(PRECISION_BITS, RM, cc)))
    }

    pub fn exp(&self) -> Self {
        HighPrecisionValue(with_consts(|cc| self.0.exp(PRECISION_BITS, RM, cc)))
    }

    pub fn powi(&self, exponent: u32) -> Self {
        HighPrecisionValue(self.0.powi(exponent as usize, PRECISION_BITS, RM))
    }

    /// `x log2 x` with the limit value 0 at `x = 0`.
    fn x_log2_x(&self) -> Self {
        if self.is_zero() {
            Self::zero()
        } else {
            self * &self.log2()
        }
    }
}

impl PartialEq for HighPrecisionValue {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for HighPrecisionValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for HighPrecisionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident) => {
        impl $trait<&HighPrecisionValue> for &HighPrecisionValue {
            type Output = HighPrecisionValue;
            fn $method(self, rhs: &HighPrecisionValue) -> HighPrecisionValue {
                HighPrecisionValue(self.0.$method(&rhs.0, PRECISION_BITS, RM))
            }
        }

        impl $trait<HighPrecisionValue> for HighPrecisionValue {
            type Output = HighPrecisionValue;
            fn $method(self, rhs: HighPrecisionValue) -> HighPrecisionValue {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&HighPrecisionValue> for HighPrecisionValue {
            type Output = HighPrecisionValue;
            fn $method(self, rhs: &HighPrecisionValue) -> HighPrecisionValue {
                (&self).$method(rhs)
            }
        }

        impl $trait<HighPrecisionValue> for &HighPrecisionValue {
            type Output = HighPrecisionValue;
            fn $method(self, rhs: HighPrecisionValue) -> HighPrecisionValue {
                self.$method(&rhs)
            }
        }
    };
}

binary_op!(Add, add);
binary_op!(Sub, sub);
binary_op!(Mul, mul);
binary_op!(Div, div);

impl Neg for HighPrecisionValue {
    type Output = HighPrecisionValue;
    fn neg(self) -> HighPrecisionValue {
        HighPrecisionValue(self.0.neg())
    }
}

impl From<f64> for HighPrecisionValue {
    fn from(value: f64) -> Self {
        Self::from_f64(value)
    }
}

fn hp(x: f64) -> HighPrecisionValue {
    HighPrecisionValue::from_f64(x)
}

fn check_tau(tau: f64) -> Result<()> {
    non_negative("transmittivity", tau)?;
    if tau > 1.0 {
        return Err(Error::domain("transmittivity", tau, "must not exceed 1"));
    }
    Ok(())
}

/// `g(x) = (x+1) log2(x+1) - x log2 x`.
pub fn g_ref(x: f64) -> Result<HighPrecisionValue> {
    non_negative("photon number", x)?;
    Ok(g_hp(&hp(x)))
}

/// `g` on a high-precision argument (which must be non-negative).
pub fn g_hp(x: &HighPrecisionValue) -> HighPrecisionValue {
    let x1 = x + HighPrecisionValue::one();
    x1.x_log2_x() - x.x_log2_x()
}

fn d_hp(tau: &HighPrecisionValue, n: &HighPrecisionValue, nu: &HighPrecisionValue) -> HighPrecisionValue {
    let one = HighPrecisionValue::one();
    let four = hp(4.0);
    let a = (&one + tau) * n + nu + &one;
    let radicand = &a * &a - four * tau * n * (n + &one);
    radicand.sqrt()
}

fn dx_hp(
    branch: Branch,
    tau: &HighPrecisionValue,
    n: &HighPrecisionValue,
    nu: &HighPrecisionValue,
) -> HighPrecisionValue {
    let one = HighPrecisionValue::one();
    let gap = (tau - &one) * n + nu;
    let signed = match branch {
        Branch::Plus => gap,
        Branch::Minus => -gap,
    };
    (d_hp(tau, n, nu) - &one + signed) / hp(2.0)
}

/// `d = sqrt(((1+tau) n + nu + 1)^2 - 4 tau n (n+1))`.
pub fn d_ref(tau: f64, n: f64, nu: f64) -> Result<HighPrecisionValue> {
    check_tau(tau)?;
    non_negative("photon number", n)?;
    non_negative("noise photons", nu)?;
    Ok(d_hp(&hp(tau), &hp(n), &hp(nu)))
}

/// `d_x = (d - 1 + (-1)^x ((tau - 1) n + nu)) / 2`.
pub fn dx_ref(branch: Branch, tau: f64, n: f64, nu: f64) -> Result<HighPrecisionValue> {
    check_tau(tau)?;
    non_negative("photon number", n)?;
    non_negative("noise photons", nu)?;
    Ok(dx_hp(branch, &hp(tau), &hp(n), &hp(nu)))
}

/// Central difference `(d_1(h) - d_1(-h)) / 2h` at `n = 0`, carried out in
/// high precision so the quotient is free of rounding noise. `d_1` is
/// analytic in `n` around zero, so evaluating at `-h` is legitimate.
pub fn d1_central_difference_ref(tau: f64, nu: f64, step: f64) -> Result<HighPrecisionValue> {
    check_tau(tau)?;
    non_negative("noise photons", nu)?;
    if !(step > 0.0) {
        return Err(Error::domain("step", step, "must be positive"));
    }
    let (t, v, h) = (hp(tau), hp(nu), hp(step));
    let forward = dx_hp(Branch::Minus, &t, &h, &v);
    let backward = dx_hp(Branch::Minus, &t, &(-h.clone()), &v);
    Ok((forward - backward) / (hp(2.0) * h))
}

/// Which capacity formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityKind {
    Shannon,
    Holevo,
    EntanglementAssisted,
}

/// Literal capacity formula at `(M, P, tau, nu)`.
pub fn capacity_ref(
    kind: CapacityKind,
    modes: f64,
    power: f64,
    tau: f64,
    nu: f64,
) -> Result<HighPrecisionValue> {
    check_tau(tau)?;
    non_negative("noise photons", nu)?;
    non_negative("power", power)?;
    non_negative("modes", modes)?;
    if modes < 1.0 {
        return Err(Error::domain("modes", modes, "must be at least 1"));
    }
    let (m, t, v) = (hp(modes), hp(tau), hp(nu));
    let n = hp(power) / &m;
    let one = HighPrecisionValue::one();
    Ok(match kind {
        CapacityKind::Shannon => {
            let arg = &one + &t * &n / (&one + &v);
            &m * arg.log2()
        }
        CapacityKind::Holevo => &m * (g_hp(&(&t * &n + &v)) - g_hp(&v)),
        CapacityKind::EntanglementAssisted => {
            let x0 = g_hp(&n) - g_hp(&dx_hp(Branch::Plus, &t, &n, &v));
            let x1 = g_hp(&(&t * &n + &v)) - g_hp(&dx_hp(Branch::Minus, &t, &n, &v));
            &m * (x0 + x1)
        }
    })
}

/// Literal stage-by-stage propagation through the link.
///
/// Per segment both signal and accumulated noise are multiplied by `tau_L`.
/// Each amplifier multiplies the signal by `G` and adds `G - 1` noise
/// photons; previously accumulated noise is only attenuated. Amplifiers sit
/// after segments `1..K-1` (passive) or `1..K` (active). Returns
/// `(tau_eff, nu_eff)`.
pub fn cascade_ref(link: &SegmentedLink, n: f64) -> Result<(HighPrecisionValue, HighPrecisionValue)> {
    link.validate()?;
    non_negative("photon number", n)?;
    let one = HighPrecisionValue::one();
    let tau_l = (-(hp(link.attenuation_per_km) * hp(link.segment_length_km))).exp();
    if tau_l.is_zero() {
        return Err(Error::domain("tau_L", 0.0, "must be positive"));
    }
    let gain = match link.gain_rule {
        GainRule::FullRegeneration => &one / &tau_l,
        GainRule::ModeDependent => {
            let n = hp(n);
            (&one + &n) / (&one + &tau_l * &n)
        }
    };
    let injected = &gain - &one;

    let mut signal = one.clone();
    let mut noise = HighPrecisionValue::zero();
    for segment in 1..=link.segment_count {
        signal = &signal * &tau_l;
        noise = &noise * &tau_l;
        let amplified = segment < link.segment_count || link.receiver == Receiver::Active;
        if amplified {
            signal = &signal * &gain;
            noise = &noise + &injected;
        }
    }
    Ok((signal, noise))
}
