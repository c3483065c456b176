//! One-dimensional parameter sweeps over a link, maxima detection and
//! convergence diagnostics.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{capacities, ea_asymptotic};
use crate::entropy::PhotonNumber;
use crate::error::{Error, Result};
use crate::link::{effective_noise, effective_transmittivity, gain, SegmentedLink};
use crate::physical::{consumption_watts, power_consumption, PhysicalConstants};

/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 400;

/// Relative x-tolerance of maxima refinement.
pub const MAXIMUM_X_TOLERANCE: f64 = 1e-6;

/// A grid peak must exceed both neighbours by this fraction of its value;
/// smaller bumps are rounding noise on a plateau.
pub const PEAK_MIN_PROMINENCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Number of modes `M`.
    Modes,
    /// Number of segments `K` (grid values are rounded to integers).
    SegmentCount,
    /// Segment length `L` in km.
    SegmentLength,
    /// Total power `P`.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

impl FromStr for SweepVariable {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "modes" | "M" => Ok(SweepVariable::Modes),
            "segment_count" | "K" => Ok(SweepVariable::SegmentCount),
            "segment_length" | "L" => Ok(SweepVariable::SegmentLength),
            "power" | "P" => Ok(SweepVariable::Power),
            other => Err(format!(
                "unknown sweep variable `{other}` (expected modes|segment_count|segment_length|power)"
            )),
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVariable::Modes => "modes",
            SweepVariable::SegmentCount => "segment_count",
            SweepVariable::SegmentLength => "segment_length",
            SweepVariable::Power => "power",
        })
    }
}

/// A sweep over one variable with everything else held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
    pub link: SegmentedLink,
    /// `M` when not swept.
    pub modes: f64,
    /// `P` in photons/s when not swept.
    pub power: f64,
    pub constants: PhysicalConstants,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("start", self.start), ("stop", self.stop)] {
            if !v.is_finite() {
                return Err(Error::domain(name, v, "must be finite"));
            }
        }
        if !(self.start < self.stop) {
            return Err(Error::domain("stop", self.stop, "must exceed start"));
        }
        if self.points < 2 {
            return Err(Error::domain("points", self.points as f64, "must be at least 2"));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(Error::domain("start", self.start, "log spacing needs start > 0"));
        }
        self.link.validate()?;
        self.constants.validate()?;
        Ok(())
    }

    /// Grid values in increasing order; the end points are exactly `start`
    /// and `stop`.
    pub fn grid(&self) -> Vec<f64> {
        let last = self.points - 1;
        let raw = (0..self.points).map(|i| {
            if i == 0 {
                return self.start;
            }
            if i == last {
                return self.stop;
            }
            let frac = i as f64 / last as f64;
            match self.spacing {
                Spacing::Linear => self.start + frac * (self.stop - self.start),
                Spacing::Log => {
                    let (a, b) = (self.start.log10(), self.stop.log10());
                    10f64.powf(a + frac * (b - a))
                }
            }
        });
        if self.variable == SweepVariable::SegmentCount {
            raw.map(f64::round).collect()
        } else {
            raw.collect()
        }
    }

    /// Evaluates one grid point.
    pub fn evaluate(&self, x: f64) -> SweepRow {
        let mut link = self.link;
        let (mut modes, mut power) = (self.modes, self.power);
        match self.variable {
            SweepVariable::Modes => modes = x,
            SweepVariable::Power => power = x,
            SweepVariable::SegmentLength => link.segment_length_km = x,
            SweepVariable::SegmentCount => {
                if x < 1.0 || x > f64::from(u32::MAX) {
                    return SweepRow::failed(x, &Error::domain("segment count", x, "out of range"));
                }
                link.segment_count = x.round() as u32;
            }
        }
        evaluate_point(x, &link, modes, power, &self.constants)
    }
}

/// One cell of a sweep table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(f64),
    /// The quantity is infinite at this point (a `log((1+nu)/nu)` at `nu = 0`).
    Diverges,
    /// Evaluation failed; the payload is [`Error::code`].
    Error(&'static str),
}

impl Cell {
    pub fn value(self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(v),
            _ => None,
        }
    }

    fn from_result(r: &Result<f64>) -> Cell {
        match r {
            Ok(v) if v.is_finite() => Cell::Value(*v),
            Ok(_) => Cell::Error("non_finite"),
            Err(Error::Diverges(_)) => Cell::Diverges,
            Err(e) => Cell::Error(e.code()),
        }
    }
}

/// Column names of a sweep table, in output order.
pub const COLUMNS: [&str; 9] = [
    "x",
    "tau_eff",
    "nu_eff",
    "gain",
    "shannon",
    "holevo",
    "ea",
    "ea_approx",
    "power_watts",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub tau_eff: Cell,
    pub nu_eff: Cell,
    pub gain: Cell,
    pub shannon: Cell,
    pub holevo: Cell,
    pub ea: Cell,
    pub ea_approx: Cell,
    pub power_watts: Cell,
}

impl SweepRow {
    fn failed(x: f64, err: &Error) -> SweepRow {
        let cell = Cell::Error(err.code());
        SweepRow {
            x,
            tau_eff: cell,
            nu_eff: cell,
            gain: cell,
            shannon: cell,
            holevo: cell,
            ea: cell,
            ea_approx: cell,
            power_watts: cell,
        }
    }

    /// Cells after `x`, in [`COLUMNS`] order.
    pub fn cells(&self) -> [Cell; 8] {
        [
            self.tau_eff,
            self.nu_eff,
            self.gain,
            self.shannon,
            self.holevo,
            self.ea,
            self.ea_approx,
            self.power_watts,
        ]
    }

    pub fn get(&self, column: Column) -> Cell {
        match column {
            Column::TauEff => self.tau_eff,
            Column::NuEff => self.nu_eff,
            Column::Gain => self.gain,
            Column::Shannon => self.shannon,
            Column::Holevo => self.holevo,
            Column::Ea => self.ea,
            Column::EaApprox => self.ea_approx,
            Column::PowerWatts => self.power_watts,
            Column::EaResidual => match (self.ea, self.ea_approx) {
                (Cell::Value(a), Cell::Value(b)) => Cell::Value(a - b),
                (Cell::Value(_), other) | (other, _) => other,
            },
        }
    }
}

/// Row columns addressable by the analysis helpers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    TauEff,
    NuEff,
    Gain,
    Shannon,
    Holevo,
    Ea,
    EaApprox,
    PowerWatts,
    /// `ea - ea_approx`.
    EaResidual,
}

impl Column {
    pub const CAPACITIES: [Column; 3] = [Column::Shannon, Column::Holevo, Column::Ea];
}

fn evaluate_point(
    x: f64,
    link: &SegmentedLink,
    modes: f64,
    power: f64,
    constants: &PhysicalConstants,
) -> SweepRow {
    let base = (|| -> Result<_> {
        link.validate()?;
        let params = crate::capacity::ChannelParams::from_raw(modes, power, 1.0, 0.0)?;
        let n = PhotonNumber::new(params.photons_per_mode())?;
        let tau_l = link.segment_transmittivity()?;
        Ok((n, tau_l))
    })();
    let (n, tau_l) = match base {
        Ok(v) => v,
        Err(e) => return SweepRow::failed(x, &e),
    };

    let tau_eff = effective_transmittivity(link, n);
    let nu_eff = effective_noise(link, n);
    let g = gain(link.gain_rule, tau_l, n);

    let caps = match (&tau_eff, &nu_eff) {
        (Ok(t), Ok(v)) => crate::capacity::ChannelParams::new(modes, power, *t, *v)
            .and_then(|ch| Ok((capacities(&ch)?, ea_asymptotic(&ch)))),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };

    let watts = g.clone().and_then(|g| {
        let p = power_consumption(n.get(), link.segment_count, g, tau_l.get(), link.receiver)?;
        consumption_watts(p, modes, constants)
    });

    let pick = |f: fn(&crate::capacity::CapacityResult) -> f64| -> Cell {
        Cell::from_result(&caps.as_ref().map(|(c, _)| f(c)).map_err(Clone::clone))
    };

    SweepRow {
        x,
        tau_eff: Cell::from_result(&tau_eff.map(f64::from)),
        nu_eff: Cell::from_result(&nu_eff.map(f64::from)),
        gain: Cell::from_result(&g),
        shannon: pick(|c| c.shannon),
        holevo: pick(|c| c.holevo),
        ea: pick(|c| c.ea),
        ea_approx: Cell::from_result(&caps.as_ref().map(|(_, a)| *a).map_err(Clone::clone)),
        power_watts: Cell::from_result(&watts),
    }
}

/// Evaluates every grid point, concurrently, returning rows in grid order.
///
/// Per-point failures are recorded in the affected cells; only an invalid
/// spec is an error.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec.grid().par_iter().map(|&x| spec.evaluate(x)).collect())
}

/// Single-threaded variant of [`run_sweep`].
pub fn run_sweep_serial(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec.grid().iter().map(|&x| spec.evaluate(x)).collect())
}

/// Whether a maximum is the largest value of its column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakKind {
    Local,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub column: Column,
    pub value: f64,
    pub kind: PeakKind,
}

/// Maximises a unimodal `f` on `[lo, hi]` by golden-section search until the
/// bracket is narrower than `tol`. Returns `(x, f(x))`.
pub fn golden_section_max<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Strict interior peaks of `ys` (value above both neighbours by at least
/// [`PEAK_MIN_PROMINENCE`] relative), each refined
/// with golden-section search on `f` between the neighbouring grid points.
///
/// With `log_x` the search runs in `ln x`, so the tolerance is relative in x.
/// Returns `(x, value)` pairs in grid order.
pub fn find_peaks<F>(xs: &[f64], ys: &[f64], f: F, log_x: bool) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    assert_eq!(xs.len(), ys.len());
    let mut peaks = Vec::new();
    if ys.len() < 3 {
        return peaks;
    }
    for i in 1..ys.len() - 1 {
        let (prev, here, next) = (ys[i - 1], ys[i], ys[i + 1]);
        let margin = PEAK_MIN_PROMINENCE * here.abs();
        if !(here - prev > margin && here - next > margin) {
            continue;
        }
        let (a, b) = (xs[i - 1], xs[i + 1]);
        let (x, v) = if log_x {
            let (x, v) = golden_section_max(|u| f(u.exp()), a.ln(), b.ln(), MAXIMUM_X_TOLERANCE);
            (x.exp(), v)
        } else {
            let tol = MAXIMUM_X_TOLERANCE * xs[i].abs().max(f64::MIN_POSITIVE);
            golden_section_max(&f, a, b, tol)
        };
        // never report a refined value worse than the grid sample
        if v >= here {
            peaks.push((x, v));
        } else {
            peaks.push((xs[i], here));
        }
    }
    peaks
}

/// Detects and refines maxima of the requested columns.
///
/// A maximum is [`PeakKind::Global`] when no row of the column exceeds it.
/// Rows whose cell is not a value are skipped. Returns an empty list for
/// fewer than three rows or monotone columns.
pub fn find_maxima(spec: &SweepSpec, rows: &[SweepRow], columns: &[Column]) -> Vec<Maximum> {
    let mut found = Vec::new();
    if rows.len() < 3 {
        return found;
    }
    let log_x = spec.spacing == Spacing::Log && spec.variable != SweepVariable::SegmentCount;
    let continuous = spec.variable != SweepVariable::SegmentCount;
    for &column in columns {
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter_map(|r| r.get(column).value().map(|v| (r.x, v)))
            .unzip();
        let f = |x: f64| {
            if continuous {
                spec.evaluate(x).get(column).value().unwrap_or(f64::NEG_INFINITY)
            } else {
                f64::NEG_INFINITY
            }
        };
        let column_max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (x, value) in find_peaks(&xs, &ys, f, log_x) {
            let kind = if value >= column_max {
                PeakKind::Global
            } else {
                PeakKind::Local
            };
            found.push(Maximum {
                x,
                column,
                value,
                kind,
            });
        }
    }
    found
}

/// Relative distance of a column from a target value, row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub target: f64,
    /// `|value - target| / |target|`, `None` where the cell is not a value.
    pub gaps: Vec<Option<f64>>,
    /// First row whose gap is within the tolerance.
    pub first_within: Option<usize>,
    /// Whether the available gaps never increase.
    pub gaps_monotone: bool,
    /// Differences of consecutive column values.
    pub successive_differences: Vec<Option<f64>>,
}

pub fn convergence_report(
    rows: &[SweepRow],
    target: f64,
    column: Column,
    tolerance: f64,
) -> Result<ConvergenceReport> {
    if !target.is_finite() || target == 0.0 {
        return Err(Error::domain("target", target, "must be finite and nonzero"));
    }
    let values: Vec<Option<f64>> = rows.iter().map(|r| r.get(column).value()).collect();
    let gaps: Vec<Option<f64>> = values
        .iter()
        .map(|v| v.map(|v| ((v - target) / target).abs()))
        .collect();
    let first_within = gaps
        .iter()
        .position(|g| matches!(g, Some(g) if *g <= tolerance));
    let present: Vec<f64> = gaps.iter().flatten().copied().collect();
    let gaps_monotone = present.windows(2).all(|w| w[1] <= w[0]);
    let successive_differences = values
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        })
        .collect();
    Ok(ConvergenceReport {
        target,
        gaps,
        first_within,
        gaps_monotone,
        successive_differences,
    })
}
