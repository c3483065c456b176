//! Command-line front end.
//!
//! Capacities are reported in bits per second when `P` is in photons per
//! second (bits per use summed over all `M` modes).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;
use toml::{Table, Value};

use crate::capacity::{capacities, min_modes_for_advantage_with, ChannelParams};
use crate::config::{parse_override, ChannelSource, ConfigError, Preset, RunConfig};
use crate::entropy::PhotonNumber;
use crate::error::Error;
use crate::link::{effective_channel, gain, SegmentedLink};
use crate::output::{Field, OutputFormat, Table as OutTable};
use crate::physical::{
    amplifier_count, consumption_watts, mode_count, power_consumption, total_channels,
};
use crate::sweep::{run_sweep, Cell};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NO_CROSSING: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    PaperLike,
}

#[derive(Debug, Parser)]
#[command(name = "fibercap", version, about = "Capacities of amplified multi-mode fiber links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output format (overrides output.format).
    #[arg(long, global = true, value_enum)]
    pub output: Option<OutputFormat>,

    /// Write results to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Start from a built-in configuration; file and flags are applied on top.
    #[arg(long, global = true, value_enum)]
    pub preset: Option<PresetArg>,

    /// Read the active-receiver G2 noise denominator as `1 + tau_L n`.
    #[arg(long, global = true)]
    pub assume_nu_eff_a_typo: bool,

    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,

    /// Override any configuration key, e.g. `--set link.segment_count=8`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shannon, Holevo and entanglement-assisted capacity at one point.
    Capacity,
    /// Tabulate every quantity over the configured [sweep].
    Sweep,
    /// Spatial mode count N and channel count M = N B from [geometry].
    Modes,
    /// Smallest M with C_E >= factor * C_J.
    Advantage {
        /// Overrides advantage.factor.
        #[arg(long)]
        factor: Option<f64>,
    },
    /// Amplifier power consumption of the configured link.
    Power,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Compute(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Compute(Error::NoCrossing { .. }) => EXIT_NO_CROSSING,
            CliError::Compute(_) => EXIT_DOMAIN,
            CliError::Io(_) => EXIT_CONFIG,
        }
    }
}

impl Cli {
    /// Flag-derived overrides, applied after the file.
    fn overrides(&self) -> Result<Vec<Table>, ConfigError> {
        let mut out = Vec::new();
        for s in &self.set {
            out.push(parse_override(s)?);
        }
        let mut single = |section: &str, key: &str, value: Value| {
            let mut inner = Table::new();
            inner.insert(key.into(), value);
            let mut t = Table::new();
            t.insert(section.into(), Value::Table(inner));
            out.push(t);
        };
        if let Some(format) = self.output {
            let name = match format {
                OutputFormat::Csv => "csv",
                OutputFormat::Json => "json",
            };
            single("output", "format", Value::String(name.into()));
        }
        if self.assume_nu_eff_a_typo {
            single("link", "assume_nu_eff_a_typo", Value::Boolean(true));
        }
        if let Command::Advantage {
            factor: Some(f),
        } = self.command
        {
            single("advantage", "factor", Value::Float(f));
        }
        Ok(out)
    }

    pub fn load_config(&self) -> Result<RunConfig, ConfigError> {
        let preset = self.preset.map(|p| match p {
            PresetArg::PaperLike => Preset::PaperLike,
        });
        RunConfig::load(preset, self.config.as_deref(), &self.overrides()?)
    }
}

/// Runs the parsed command line, writing results to `--out` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = cli.load_config()?;
    if cli.dump_config {
        stdout.write_all(config.dump().as_bytes())?;
        return Ok(());
    }
    let table = match &cli.command {
        Command::Capacity => cmd_capacity(&config)?,
        Command::Sweep => cmd_sweep(&config)?,
        Command::Modes => cmd_modes(&config)?,
        Command::Advantage { .. } => cmd_advantage(&config)?,
        Command::Power => cmd_power(&config)?,
    };
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(config.output, &mut w)?;
            w.flush()?;
        }
        None => table.write(config.output, stdout)?,
    }
    Ok(())
}

fn channel_at(source: ChannelSource, modes: f64, power: f64) -> Result<(ChannelParams, f64), Error> {
    match source {
        ChannelSource::Direct { tau, nu } => Ok((ChannelParams::new(modes, power, tau, nu)?, 1.0)),
        ChannelSource::Link(link) => {
            let eff = effective_channel(&link, modes, power)?;
            Ok((eff.channel_params(modes, power)?, eff.gain))
        }
    }
}

pub fn cmd_capacity(config: &RunConfig) -> Result<OutTable, CliError> {
    let modes = config.require_modes()?;
    let power = config.require_power()?;
    let (ch, gain) = channel_at(config.require_source()?, modes, power)?;
    let c = capacities(&ch)?;
    Ok(OutTable::record([
        ("modes", Field::Number(modes)),
        ("power", Field::Number(power)),
        ("photons_per_mode", Field::Number(ch.photons_per_mode())),
        ("tau_eff", Field::Number(ch.tau().get())),
        ("nu_eff", Field::Number(ch.nu().get())),
        ("gain", Field::Number(gain)),
        ("shannon", Field::Number(c.shannon)),
        ("holevo", Field::Number(c.holevo)),
        ("ea", Field::Number(c.ea)),
        ("ea_approx", Field::Number(c.ea_approx)),
        ("ea_term_x0", Field::Number(c.ea_term_x0)),
        ("ea_term_x1", Field::Number(c.ea_term_x1)),
        ("ea_noise_term", Field::Number(c.ea_noise_term)),
        ("ea_growth_term", Field::Number(c.ea_growth_term)),
        ("slope_t", Field::Number(c.slope_t)),
    ]))
}

pub fn cmd_sweep(config: &RunConfig) -> Result<OutTable, CliError> {
    let spec = config.sweep_spec()?;
    let rows = run_sweep(&spec)?;
    let any_ok = rows
        .iter()
        .any(|r| r.cells().iter().all(|c| matches!(c, Cell::Value(_))));
    if !any_ok {
        return Err(Error::Domain {
            name: "sweep",
            value: spec.start,
            reason: "no row could be evaluated",
        }
        .into());
    }
    Ok(OutTable::from_sweep(&rows))
}

pub fn cmd_modes(config: &RunConfig) -> Result<OutTable, CliError> {
    let geometry = config
        .geometry
        .ok_or_else(|| ConfigError {
            field: "geometry".into(),
            message: "missing [geometry] section".into(),
        })?;
    let wavelength = config.constants.wavelength;
    let n = mode_count(&geometry.fiber, wavelength)?;
    let m = total_channels(n, geometry.slot_rate)?;
    let mut pairs = vec![
        ("numerical_aperture", Field::Number(geometry.fiber.numerical_aperture())),
        ("v_number", Field::Number(geometry.fiber.v_number(wavelength))),
        ("spatial_modes", Field::Number(n)),
        ("modes", Field::Number(m)),
    ];
    if let Some(p) = config.power {
        pairs.push(("photons_per_mode", Field::Number(p / m)));
    }
    Ok(OutTable::record(pairs))
}

pub fn cmd_advantage(config: &RunConfig) -> Result<OutTable, CliError> {
    let power = config.require_power()?;
    let source = config.require_source()?;
    let factor = config.advantage_factor;
    let a = min_modes_for_advantage_with(
        |m| {
            let (ch, _) = channel_at(source, m, power)?;
            if ch.nu().get() == 0.0 {
                return Err(Error::Domain {
                    name: "nu_eff",
                    value: 0.0,
                    reason: "advantage search needs nu_eff > 0",
                });
            }
            Ok(ch)
        },
        factor,
    )?;
    Ok(OutTable::record([
        ("factor", Field::Number(factor)),
        ("modes", Field::Number(a.modes)),
        ("ea", Field::Number(a.ea)),
        ("holevo", Field::Number(a.holevo)),
        ("ratio", Field::Number(a.ratio)),
    ]))
}

pub fn cmd_power(config: &RunConfig) -> Result<OutTable, CliError> {
    let link: SegmentedLink = config.require_link()?;
    let modes = config.require_modes()?;
    let power = config.require_power()?;
    let ch = ChannelParams::from_raw(modes, power, 1.0, 0.0)?;
    let n = PhotonNumber::new(ch.photons_per_mode())?;
    let tau_l = link.segment_transmittivity()?;
    let g = gain(link.gain_rule, tau_l, n)?;
    let per_mode = power_consumption(n.get(), link.segment_count, g, tau_l.get(), link.receiver)?;
    let watts = consumption_watts(per_mode, modes, &config.constants)?;
    Ok(OutTable::record([
        ("modes", Field::Number(modes)),
        ("photons_per_mode", Field::Number(n.get())),
        ("tau_l", Field::Number(tau_l.get())),
        ("gain", Field::Number(g)),
        ("amplifiers", Field::Number(amplifier_count(link.segment_count, link.receiver))),
        ("consumption_per_mode", Field::Number(per_mode)),
        ("power_watts", Field::Number(watts)),
    ]))
}
