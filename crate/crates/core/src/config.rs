//! Run configuration: a TOML file with sections, layered over an optional
//! preset and overridden by command-line `section.key=value` pairs.
//!
//! ```toml
//! [channel]
//! modes = 1e9          # M
//! # tau = 1.0          # direct channel: set tau and/or nu to bypass [link]
//! # nu = 0.0
//!
//! [power]
//! photons_per_second = 1e16   # exactly one of these two
//! # watts = 1e-3
//!
//! [link]
//! segment_length_km = 10.0
//! segment_count = 5
//! attenuation_per_km = 0.05   # or attenuation_db_per_km
//! receiver = "passive"        # passive | active
//! gain_rule = "g1"            # g1 | g2
//! assume_nu_eff_a_typo = false
//!
//! [constants]
//! planck = 6.626e-34
//! light_speed = 2.998e8
//! wavelength = 1.55e-6
//!
//! [sweep]
//! variable = "modes"          # modes | segment_count | segment_length | power
//! start = 1e2
//! stop = 1e40
//! points = 400
//! spacing = "log"             # log | linear
//!
//! [advantage]
//! factor = 2.0
//!
//! [geometry]
//! core_radius = 25e-6
//! n_core = 1.46
//! n_clad = 1.45
//! slot_rate = 1e10
//!
//! [output]
//! format = "csv"              # csv | json
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::{Table, Value};

use crate::entropy::{NoisePhotons, Transmittivity};
use crate::link::{attenuation_from_db, GainRule, Receiver, SegmentedLink};
use crate::output::OutputFormat;
use crate::physical::{photon_flux_from_watts, FiberGeometry, PhysicalConstants};
use crate::sweep::{Spacing, SweepSpec, SweepVariable, DEFAULT_POINTS};

pub const DEFAULT_ADVANTAGE_FACTOR: f64 = 2.0;

/// A configuration problem, naming the offending key.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("config error in `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

type ConfigResult<T> = std::result::Result<T, ConfigError>;

/// Named starting points for a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `P = 1e16`, `L = 10 km`, `K = 5`, `alpha = 0.05`, G1, passive
    /// receiver, `M` swept over `[1e2, 1e40]` with 400 log-spaced points.
    /// A reconstruction of the published figure set, not published numbers.
    PaperLike,
}

impl Preset {
    pub fn table(self) -> Table {
        match self {
            Preset::PaperLike => PAPER_LIKE
                .parse()
                .expect("built-in preset is valid TOML"),
        }
    }
}

const PAPER_LIKE: &str = r#"
[channel]
modes = 1e9

[power]
photons_per_second = 1e16

[link]
segment_length_km = 10.0
segment_count = 5
attenuation_per_km = 0.05
receiver = "passive"
gain_rule = "g1"

[sweep]
variable = "modes"
start = 1e2
stop = 1e40
points = 400
spacing = "log"
"#;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub modes: Option<f64>,
    pub tau: Option<f64>,
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    pub photons_per_second: Option<f64>,
    pub watts: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub segment_length_km: Option<f64>,
    pub segment_count: Option<i64>,
    pub attenuation_per_km: Option<f64>,
    pub attenuation_db_per_km: Option<f64>,
    pub receiver: Option<Receiver>,
    pub gain_rule: Option<GainRule>,
    pub assume_nu_eff_a_typo: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    pub planck: Option<f64>,
    pub light_speed: Option<f64>,
    pub wavelength: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: Option<SweepVariable>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<i64>,
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvantageSection {
    pub factor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub core_radius: Option<f64>,
    pub n_core: Option<f64>,
    pub n_clad: Option<f64>,
    pub slot_rate: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<OutputFormat>,
}

/// The file format as written, every key optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advantage: Option<AdvantageSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

/// Where the effective channel comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelSource {
    /// `tau` and `nu` given directly.
    Direct {
        tau: Transmittivity,
        nu: NoisePhotons,
    },
    Link(SegmentedLink),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySettings {
    pub fiber: FiberGeometry,
    pub slot_rate: f64,
}

/// A validated configuration. Power is always in photons/s.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Option<ChannelSource>,
    pub modes: Option<f64>,
    pub power: Option<f64>,
    pub constants: PhysicalConstants,
    pub sweep: Option<SweepSettings>,
    pub advantage_factor: f64,
    pub geometry: Option<GeometrySettings>,
    pub output: OutputFormat,
}

/// Recursively merges `over` into `base`; scalar keys in `over` win.
pub fn merge_tables(base: &mut Table, over: Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge_tables(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Parses `section.key=value` into a one-entry nested table. The value is
/// read as a TOML value, falling back to a plain string.
pub fn parse_override(assignment: &str) -> ConfigResult<Table> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::new(assignment, "expected section.key=value"))?;
    let path = path.trim();
    let raw = raw.trim();
    let keys: Vec<&str> = path.split('.').map(str::trim).collect();
    if keys.len() != 2 || keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::new(path, "expected section.key"));
    }
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let mut inner = Table::new();
    inner.insert(keys[1].to_string(), value);
    let mut outer = Table::new();
    outer.insert(keys[0].to_string(), Value::Table(inner));
    Ok(outer)
}

/// Parses a TOML document into a table.
pub fn parse_table(text: &str, origin: &str) -> ConfigResult<Table> {
    text.parse::<Table>()
        .map_err(|e| ConfigError::new(origin, e.message()))
}

pub fn read_table(path: &Path) -> ConfigResult<Table> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(&origin, e))?;
    parse_table(&text, &origin)
}

/// Builds the typed file view of a merged table.
pub fn config_file(table: Table) -> ConfigResult<ConfigFile> {
    let text = toml::to_string(&table).map_err(|e| ConfigError::new("config", e))?;
    toml::from_str::<ConfigFile>(&text).map_err(|e| {
        let field = e
            .message()
            .split('`')
            .nth(1)
            .unwrap_or("config")
            .to_string();
        ConfigError::new(field, e.message().trim())
    })
}

fn finite(field: &str, v: f64) -> ConfigResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(field, "must be finite"))
    }
}

fn positive(field: &str, v: f64) -> ConfigResult<f64> {
    if finite(field, v)? > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be > 0, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> ConfigResult<f64> {
    if finite(field, v)? >= 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be >= 0, got {v}")))
    }
}

fn required<T: Copy>(field: &str, v: Option<T>) -> ConfigResult<T> {
    v.ok_or_else(|| ConfigError::new(field, "missing"))
}

impl RunConfig {
    /// Merges `preset`, file and overrides (later wins) and validates.
    pub fn load(
        preset: Option<Preset>,
        file: Option<&Path>,
        overrides: &[Table],
    ) -> ConfigResult<RunConfig> {
        let mut table = preset.map(Preset::table).unwrap_or_default();
        if let Some(path) = file {
            merge_tables(&mut table, read_table(path)?);
        }
        for o in overrides {
            merge_tables(&mut table, o.clone());
        }
        RunConfig::from_file(&config_file(table)?)
    }

    pub fn from_toml(text: &str) -> ConfigResult<RunConfig> {
        RunConfig::from_file(&config_file(parse_table(text, "config")?)?)
    }

    pub fn from_file(file: &ConfigFile) -> ConfigResult<RunConfig> {
        let constants = constants(file.constants.as_ref())?;
        let channel = file.channel.clone().unwrap_or_default();
        let modes = channel
            .modes
            .map(|m| {
                if finite("channel.modes", m)? >= 1.0 {
                    Ok(m)
                } else {
                    Err(ConfigError::new("channel.modes", format!("must be >= 1, got {m}")))
                }
            })
            .transpose()?;

        let source = if channel.tau.is_some() || channel.nu.is_some() {
            let tau = Transmittivity::new(channel.tau.unwrap_or(1.0))
                .map_err(|e| ConfigError::new("channel.tau", e))?;
            let nu = NoisePhotons::new(channel.nu.unwrap_or(0.0))
                .map_err(|e| ConfigError::new("channel.nu", e))?;
            Some(ChannelSource::Direct { tau, nu })
        } else {
            file.link.as_ref().map(link).transpose()?.map(ChannelSource::Link)
        };

        let power = match &file.power {
            None => None,
            Some(PowerSection {
                photons_per_second: Some(_),
                watts: Some(_),
            }) => {
                return Err(ConfigError::new(
                    "power",
                    "give exactly one of photons_per_second and watts",
                ))
            }
            Some(PowerSection {
                photons_per_second: Some(p),
                ..
            }) => Some(non_negative("power.photons_per_second", *p)?),
            Some(PowerSection { watts: Some(w), .. }) => {
                non_negative("power.watts", *w)?;
                Some(
                    photon_flux_from_watts(*w, &constants)
                        .map_err(|e| ConfigError::new("power.watts", e))?,
                )
            }
            Some(_) => {
                return Err(ConfigError::new(
                    "power",
                    "give exactly one of photons_per_second and watts",
                ))
            }
        };

        let sweep = file.sweep.as_ref().map(sweep).transpose()?;
        let advantage_factor = match file.advantage.as_ref().and_then(|a| a.factor) {
            Some(f) if f.is_finite() && f >= 1.0 => f,
            Some(f) => {
                return Err(ConfigError::new("advantage.factor", format!("must be >= 1, got {f}")))
            }
            None => DEFAULT_ADVANTAGE_FACTOR,
        };
        let geometry = file.geometry.as_ref().map(geometry).transpose()?;
        let output = file
            .output
            .as_ref()
            .and_then(|o| o.format)
            .unwrap_or_default();

        Ok(RunConfig {
            source,
            modes,
            power,
            constants,
            sweep,
            advantage_factor,
            geometry,
            output,
        })
    }

    /// The file view of this configuration; power is written in photons/s.
    pub fn to_file(&self) -> ConfigFile {
        let channel = match (self.modes, self.source) {
            (None, None | Some(ChannelSource::Link(_))) => None,
            (modes, Some(ChannelSource::Direct { tau, nu })) => Some(ChannelSection {
                modes,
                tau: Some(tau.get()),
                nu: Some(nu.get()),
            }),
            (modes, _) => Some(ChannelSection {
                modes,
                ..Default::default()
            }),
        };
        let link = match self.source {
            Some(ChannelSource::Link(l)) => Some(LinkSection {
                segment_length_km: Some(l.segment_length_km),
                segment_count: Some(i64::from(l.segment_count)),
                attenuation_per_km: Some(l.attenuation_per_km),
                attenuation_db_per_km: None,
                receiver: Some(l.receiver),
                gain_rule: Some(l.gain_rule),
                assume_nu_eff_a_typo: Some(l.assume_nu_eff_a_typo),
            }),
            _ => None,
        };
        ConfigFile {
            channel,
            power: self.power.map(|p| PowerSection {
                photons_per_second: Some(p),
                watts: None,
            }),
            link,
            constants: Some(ConstantsSection {
                planck: Some(self.constants.planck),
                light_speed: Some(self.constants.light_speed),
                wavelength: Some(self.constants.wavelength),
            }),
            sweep: self.sweep.map(|s| SweepSection {
                variable: Some(s.variable),
                start: Some(s.start),
                stop: Some(s.stop),
                points: Some(s.points as i64),
                spacing: Some(s.spacing),
            }),
            advantage: Some(AdvantageSection {
                factor: Some(self.advantage_factor),
            }),
            geometry: self.geometry.map(|g| GeometrySection {
                core_radius: Some(g.fiber.core_radius),
                n_core: Some(g.fiber.n_core),
                n_clad: Some(g.fiber.n_clad),
                slot_rate: Some(g.slot_rate),
            }),
            output: Some(OutputSection {
                format: Some(self.output),
            }),
        }
    }

    /// TOML text that re-parses to this configuration.
    pub fn dump(&self) -> String {
        toml::to_string(&self.to_file()).expect("config serializes")
    }

    pub fn require_modes(&self) -> ConfigResult<f64> {
        required("channel.modes", self.modes)
    }

    pub fn require_power(&self) -> ConfigResult<f64> {
        self.power
            .ok_or_else(|| ConfigError::new("power", "missing photons_per_second or watts"))
    }

    pub fn require_source(&self) -> ConfigResult<ChannelSource> {
        self.source
            .ok_or_else(|| ConfigError::new("link", "missing [link] section or channel.tau/nu"))
    }

    pub fn require_link(&self) -> ConfigResult<SegmentedLink> {
        match self.source {
            Some(ChannelSource::Link(l)) => Ok(l),
            Some(ChannelSource::Direct { .. }) => Err(ConfigError::new(
                "channel.tau",
                "this command needs a [link] section, not a direct channel",
            )),
            None => Err(ConfigError::new("link", "missing [link] section")),
        }
    }

    /// The sweep described by this configuration.
    pub fn sweep_spec(&self) -> ConfigResult<SweepSpec> {
        let s = self
            .sweep
            .ok_or_else(|| ConfigError::new("sweep", "missing [sweep] section"))?;
        let link = self.require_link()?;
        let modes = match s.variable {
            SweepVariable::Modes => self.modes.unwrap_or(1.0),
            _ => self.require_modes()?,
        };
        let power = match s.variable {
            SweepVariable::Power => self.power.unwrap_or(0.0),
            _ => self.require_power()?,
        };
        let spec = SweepSpec {
            variable: s.variable,
            start: s.start,
            stop: s.stop,
            points: s.points,
            spacing: s.spacing,
            link,
            modes,
            power,
            constants: self.constants,
        };
        Ok(spec)
    }
}

fn constants(section: Option<&ConstantsSection>) -> ConfigResult<PhysicalConstants> {
    let d = PhysicalConstants::default();
    let s = section.cloned().unwrap_or_default();
    Ok(PhysicalConstants {
        planck: positive("constants.planck", s.planck.unwrap_or(d.planck))?,
        light_speed: positive("constants.light_speed", s.light_speed.unwrap_or(d.light_speed))?,
        wavelength: positive("constants.wavelength", s.wavelength.unwrap_or(d.wavelength))?,
    })
}

fn link(s: &LinkSection) -> ConfigResult<SegmentedLink> {
    let length = positive("link.segment_length_km", required("link.segment_length_km", s.segment_length_km)?)?;
    let count = required("link.segment_count", s.segment_count)?;
    let count = u32::try_from(count)
        .ok()
        .filter(|&k| k >= 1)
        .ok_or_else(|| ConfigError::new("link.segment_count", format!("must be >= 1, got {count}")))?;
    let alpha = match (s.attenuation_per_km, s.attenuation_db_per_km) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::new(
                "link.attenuation_per_km",
                "give only one of attenuation_per_km and attenuation_db_per_km",
            ))
        }
        (Some(a), None) => non_negative("link.attenuation_per_km", a)?,
        (None, Some(db)) => attenuation_from_db(non_negative("link.attenuation_db_per_km", db)?)
            .map_err(|e| ConfigError::new("link.attenuation_db_per_km", e))?,
        (None, None) => return Err(ConfigError::new("link.attenuation_per_km", "missing")),
    };
    let l = SegmentedLink::new(
        length,
        count,
        alpha,
        required("link.receiver", s.receiver)?,
        required("link.gain_rule", s.gain_rule)?,
    )
    .map_err(|e| ConfigError::new("link", e))?
    .with_typo_assumption(s.assume_nu_eff_a_typo.unwrap_or(false));
    Ok(l)
}

fn sweep(s: &SweepSection) -> ConfigResult<SweepSettings> {
    let variable = required("sweep.variable", s.variable)?;
    let spacing = s.spacing.unwrap_or_default();
    let start = finite("sweep.start", required("sweep.start", s.start)?)?;
    let stop = finite("sweep.stop", required("sweep.stop", s.stop)?)?;
    let points = s.points.unwrap_or(DEFAULT_POINTS as i64);
    if points < 2 {
        return Err(ConfigError::new("sweep.points", format!("must be >= 2, got {points}")));
    }
    if start >= stop {
        return Err(ConfigError::new("sweep.stop", "must exceed sweep.start"));
    }
    if spacing == Spacing::Log && start <= 0.0 {
        return Err(ConfigError::new("sweep.start", "log spacing needs start > 0"));
    }
    Ok(SweepSettings {
        variable,
        start,
        stop,
        points: points as usize,
        spacing,
    })
}

fn geometry(s: &GeometrySection) -> ConfigResult<GeometrySettings> {
    let fiber = FiberGeometry {
        core_radius: positive("geometry.core_radius", required("geometry.core_radius", s.core_radius)?)?,
        n_core: positive("geometry.n_core", required("geometry.n_core", s.n_core)?)?,
        n_clad: positive("geometry.n_clad", required("geometry.n_clad", s.n_clad)?)?,
    };
    fiber
        .validate()
        .map_err(|e| ConfigError::new("geometry.n_core", e))?;
    let slot_rate = positive("geometry.slot_rate", required("geometry.slot_rate", s.slot_rate)?)?;
    Ok(GeometrySettings { fiber, slot_rate })
}
