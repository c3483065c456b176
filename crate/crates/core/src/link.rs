//! Effective transmittivity and noise of a segmented, amplified fiber link.
//!
//! A link consists of `K` segments of length `L`, each with transmittivity
//! `tau_L = exp(-alpha L)`. Amplifier placement:
//!
//! * passive receiver: an amplifier after each of the first `K - 1`
//!   segments, none before detection, so `tau_eff = tau_L (G tau_L)^(K-1)`;
//! * active receiver: an amplifier after every segment, including one right
//!   before detection, so `tau_eff = (G tau_L)^K`.
//!
//! Each amplifier injects `G - 1` noise photons per mode. Injected noise is
//! attenuated by the remaining segments, which yields the geometric series
//!
//! ```text
//! nu_eff = (G - 1) (tau_L + ... + tau_L^(K-1))            passive
//!        = (G - 1) (1 + tau_L + ... + tau_L^(K-1))        active
//! ```
//!
//! This convention reproduces both full-regeneration closed forms
//! `1 - tau_L^(K-1)` and `(1 - tau_L^K) / tau_L`.
//!
//! Under the mode-dependent rule the gain uses the transmitter photon number
//! `n = P / M` at every stage.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::capacity::ChannelParams;
use crate::entropy::{NoisePhotons, PhotonNumber, Transmittivity};
use crate::error::{non_negative, positive, Error, Result};

/// Receiver front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Receiver {
    /// No pre-amplifier before detection.
    Passive,
    /// One extra amplifier directly before detection.
    Active,
}

/// Amplifier gain rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GainRule {
    /// `G1 = 1 / tau_L`.
    #[serde(rename = "g1")]
    FullRegeneration,
    /// `G2 = (1 + n) / (1 + tau_L n)`.
    #[serde(rename = "g2")]
    ModeDependent,
}

impl FromStr for Receiver {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "passive" => Ok(Receiver::Passive),
            "active" => Ok(Receiver::Active),
            other => Err(format!("unknown receiver `{other}` (expected passive|active)")),
        }
    }
}

impl FromStr for GainRule {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "g1" | "full" | "full-regeneration" => Ok(GainRule::FullRegeneration),
            "g2" | "mode-dependent" => Ok(GainRule::ModeDependent),
            other => Err(format!("unknown gain rule `{other}` (expected g1|g2)")),
        }
    }
}

impl fmt::Display for Receiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Receiver::Passive => "passive",
            Receiver::Active => "active",
        })
    }
}

impl fmt::Display for GainRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GainRule::FullRegeneration => "g1",
            GainRule::ModeDependent => "g2",
        })
    }
}

/// Physical plan of a segmented link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentedLink {
    /// Segment length `L` in km.
    pub segment_length_km: f64,
    /// Number of segments `K`.
    pub segment_count: u32,
    /// Attenuation `alpha` per km (natural-log units).
    pub attenuation_per_km: f64,
    pub receiver: Receiver,
    pub gain_rule: GainRule,
    /// Read the active-receiver G2 noise denominator `1 - tau_L n` as a typo
    /// for `1 + tau_L n`. Off by default.
    #[serde(default)]
    pub assume_nu_eff_a_typo: bool,
}

impl SegmentedLink {
    pub fn new(
        segment_length_km: f64,
        segment_count: u32,
        attenuation_per_km: f64,
        receiver: Receiver,
        gain_rule: GainRule,
    ) -> Result<Self> {
        let link = SegmentedLink {
            segment_length_km,
            segment_count,
            attenuation_per_km,
            receiver,
            gain_rule,
            assume_nu_eff_a_typo: false,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn with_typo_assumption(mut self, assume: bool) -> Self {
        self.assume_nu_eff_a_typo = assume;
        self
    }

    pub fn validate(&self) -> Result<()> {
        positive("segment length", self.segment_length_km)?;
        non_negative("attenuation", self.attenuation_per_km)?;
        if self.segment_count == 0 {
            return Err(Error::domain("segment count", 0.0, "must be at least 1"));
        }
        Ok(())
    }

    /// `tau_L = exp(-alpha L)`.
    pub fn segment_transmittivity(&self) -> Result<Transmittivity> {
        segment_transmittivity(self.attenuation_per_km, self.segment_length_km)
    }
}

/// Effective channel seen by the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveChannel {
    pub tau_eff: Transmittivity,
    pub nu_eff: NoisePhotons,
    pub gain: f64,
    pub photons_per_mode: PhotonNumber,
}

/// `tau_L = exp(-alpha L)`.
pub fn segment_transmittivity(alpha: f64, length_km: f64) -> Result<Transmittivity> {
    non_negative("attenuation", alpha)?;
    positive("segment length", length_km)?;
    Transmittivity::new((-alpha * length_km).exp())
}

/// Attenuation `alpha` per km from a loss in dB per km: `alpha = ln(10) loss / 10`.
pub fn attenuation_from_db(loss_db_per_km: f64) -> Result<f64> {
    non_negative("loss (dB/km)", loss_db_per_km)?;
    Ok(std::f64::consts::LN_10 * loss_db_per_km / 10.0)
}

fn check_segment_tau(tau_l: Transmittivity) -> Result<f64> {
    let t = tau_l.get();
    if t == 0.0 {
        return Err(Error::domain("tau_L", t, "must be positive"));
    }
    Ok(t)
}

/// Amplifier gain `G` under `rule`.
pub fn gain(rule: GainRule, tau_l: Transmittivity, n: PhotonNumber) -> Result<f64> {
    Ok(1.0 + gain_excess(rule, tau_l, n)?)
}

/// `G - 1`, computed without forming `G` first.
pub fn gain_excess(rule: GainRule, tau_l: Transmittivity, n: PhotonNumber) -> Result<f64> {
    let t = check_segment_tau(tau_l)?;
    Ok(match rule {
        GainRule::FullRegeneration => (1.0 - t) / t,
        GainRule::ModeDependent => {
            let n = n.get();
            (1.0 - t) * n / (1.0 + t * n)
        }
    })
}

/// Number of `G tau_L` stages between transmitter and detector.
fn stage_count(link: &SegmentedLink) -> u32 {
    match link.receiver {
        Receiver::Passive => link.segment_count - 1,
        Receiver::Active => link.segment_count,
    }
}

/// Effective transmittivity at transmitter photon number `n`.
pub fn effective_transmittivity(link: &SegmentedLink, n: PhotonNumber) -> Result<Transmittivity> {
    link.validate()?;
    let tau_l = link.segment_transmittivity()?;
    let t = check_segment_tau(tau_l)?;
    if link.gain_rule == GainRule::FullRegeneration {
        return Ok(match link.receiver {
            Receiver::Passive => tau_l,
            Receiver::Active => Transmittivity::ONE,
        });
    }
    let stage = (1.0 + gain_excess(link.gain_rule, tau_l, n)?) * t;
    let lead = match link.receiver {
        Receiver::Passive => t,
        Receiver::Active => 1.0,
    };
    let value = lead * stage.powi(stage_count(link) as i32);
    Transmittivity::new(value.min(1.0))
}

/// `sum_{j=1}^{K-1} tau_L^j = (tau_L - tau_L^K) / (1 - tau_L)`, with the
/// `tau_L -> 1` limit `K - 1`.
pub fn passive_noise_series(tau_l: f64, segment_count: u32) -> f64 {
    let k = f64::from(segment_count);
    if tau_l == 1.0 {
        return k - 1.0;
    }
    // tau_L - tau_L^K = tau_L (1 - tau_L^(K-1))
    tau_l * -((k - 1.0) * tau_l.ln()).exp_m1() / (1.0 - tau_l)
}

/// `sum_{j=0}^{K-1} tau_L^j = (1 - tau_L^K) / (1 - tau_L)`.
pub fn active_noise_series(tau_l: f64, segment_count: u32) -> f64 {
    let k = f64::from(segment_count);
    if tau_l == 1.0 {
        return k;
    }
    -(k * tau_l.ln()).exp_m1() / (1.0 - tau_l)
}

/// Generic geometric-series noise `((tau_L - tau_L^K)/(1 - tau_L)) (G - 1)`,
/// plus the pre-detection amplifier's `G - 1` for an active receiver.
pub fn geometric_noise(link: &SegmentedLink, n: PhotonNumber) -> Result<NoisePhotons> {
    link.validate()?;
    let tau_l = link.segment_transmittivity()?;
    let excess = gain_excess(link.gain_rule, tau_l, n)?;
    let series = match link.receiver {
        Receiver::Passive => passive_noise_series(tau_l.get(), link.segment_count),
        Receiver::Active => active_noise_series(tau_l.get(), link.segment_count),
    };
    NoisePhotons::new(series * excess)
}

/// Effective noise photons at transmitter photon number `n`.
///
/// The active-receiver G2 case uses the closed form
/// `(1 - tau_L^K) n / (1 - tau_L n)` unless the link sets
/// `assume_nu_eff_a_typo`, in which case the geometric series is used
/// (equivalent to a `1 + tau_L n` denominator). The closed form has a pole at
/// `n = 1 / tau_L` and is rejected with [`Error::ActiveG2Pole`] at or beyond it.
pub fn effective_noise(link: &SegmentedLink, n: PhotonNumber) -> Result<NoisePhotons> {
    if link.gain_rule == GainRule::ModeDependent
        && link.receiver == Receiver::Active
        && !link.assume_nu_eff_a_typo
    {
        link.validate()?;
        let tau_l = link.segment_transmittivity()?;
        return closed_form::g2_active_as_printed(tau_l.get(), link.segment_count, n.get())
            .and_then(NoisePhotons::new);
    }
    geometric_noise(link, n)
}

/// Effective channel for `M` modes sharing `P` photons.
pub fn effective_channel(link: &SegmentedLink, modes: f64, power: f64) -> Result<EffectiveChannel> {
    let params = ChannelParams::from_raw(modes, power, 1.0, 0.0)?;
    let n = PhotonNumber::new(params.photons_per_mode())?;
    let tau_l = link.segment_transmittivity()?;
    Ok(EffectiveChannel {
        tau_eff: effective_transmittivity(link, n)?,
        nu_eff: effective_noise(link, n)?,
        gain: gain(link.gain_rule, tau_l, n)?,
        photons_per_mode: n,
    })
}

impl EffectiveChannel {
    pub fn channel_params(&self, modes: f64, power: f64) -> Result<ChannelParams> {
        ChannelParams::new(modes, power, self.tau_eff, self.nu_eff)
    }
}

/// The four closed-form special cases, evaluated exactly as written.
pub mod closed_form {
    use crate::error::{Error, Result};

    /// Full regeneration, passive receiver: `1 - tau_L^(K-1)`.
    pub fn g1_passive(tau_l: f64, segment_count: u32) -> f64 {
        1.0 - tau_l.powi(segment_count as i32 - 1)
    }

    /// Full regeneration, active receiver: `(1 - tau_L^K) / tau_L`.
    pub fn g1_active(tau_l: f64, segment_count: u32) -> f64 {
        (1.0 - tau_l.powi(segment_count as i32)) / tau_l
    }

    /// Mode-dependent gain, passive receiver: `(tau_L - tau_L^K) n / (1 + tau_L n)`.
    pub fn g2_passive(tau_l: f64, segment_count: u32, n: f64) -> f64 {
        (tau_l - tau_l.powi(segment_count as i32)) * n / (1.0 + tau_l * n)
    }

    /// Mode-dependent gain, active receiver, as printed: `(1 - tau_L^K) n / (1 - tau_L n)`.
    pub fn g2_active_as_printed(tau_l: f64, segment_count: u32, n: f64) -> Result<f64> {
        let denominator = 1.0 - tau_l * n;
        if denominator <= 0.0 {
            return Err(Error::ActiveG2Pole { denominator });
        }
        Ok((1.0 - tau_l.powi(segment_count as i32)) * n / denominator)
    }

    /// Mode-dependent gain, active receiver, with the `1 + tau_L n` denominator.
    pub fn g2_active_corrected(tau_l: f64, segment_count: u32, n: f64) -> f64 {
        (1.0 - tau_l.powi(segment_count as i32)) * n / (1.0 + tau_l * n)
    }
}
