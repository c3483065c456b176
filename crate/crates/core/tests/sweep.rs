//! Sweep engine and its analysis helpers on realistic links.

use fibercap::capacity::{capacities, ea_asymptotic, holevo_limit, ChannelParams};
use fibercap::link::{effective_channel, GainRule, Receiver, SegmentedLink};
use fibercap::physical::PhysicalConstants;
use fibercap::sweep::{
    convergence_report, find_maxima, run_sweep, run_sweep_serial, Column, PeakKind, Spacing,
    SweepSpec, SweepVariable,
};
use fibercap::{NoisePhotons, Transmittivity};

fn modes_sweep(link: SegmentedLink, start: f64, stop: f64, points: usize) -> SweepSpec {
    SweepSpec {
        variable: SweepVariable::Modes,
        start,
        stop,
        points,
        spacing: Spacing::Log,
        link,
        modes: 1.0,
        power: 1e16,
        constants: PhysicalConstants::default(),
    }
}

fn g1_link() -> SegmentedLink {
    SegmentedLink::new(10.0, 5, 0.05, Receiver::Passive, GainRule::FullRegeneration).unwrap()
}

#[test]
fn parallel_equals_serial() {
    let mut spec = modes_sweep(g1_link(), 1e2, 1e40, 200);
    spec.link.gain_rule = GainRule::ModeDependent;
    let a = run_sweep(&spec).unwrap();
    let b = run_sweep_serial(&spec).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rows_equal_direct_evaluation() {
    let spec = modes_sweep(g1_link(), 1e2, 1e40, 41);
    for row in run_sweep(&spec).unwrap() {
        let eff = effective_channel(&spec.link, row.x, spec.power).unwrap();
        let c = capacities(&eff.channel_params(row.x, spec.power).unwrap()).unwrap();
        assert_eq!(row.shannon.value(), Some(c.shannon));
        assert_eq!(row.holevo.value(), Some(c.holevo));
        assert_eq!(row.ea.value(), Some(c.ea));
    }
}

#[test]
fn g1_holevo_approaches_its_limit() {
    let spec = modes_sweep(g1_link(), 1e10, 1e40, 31);
    let rows = run_sweep(&spec).unwrap();
    let eff = effective_channel(&spec.link, 1.0, spec.power).unwrap();
    let limit = holevo_limit(spec.power, eff.tau_eff, eff.nu_eff).unwrap();
    let report = convergence_report(&rows, limit, Column::Holevo, 1e-3).unwrap();
    assert!(report.first_within.is_some());
    // gaps shrink until they reach rounding level
    let gaps: Vec<f64> = report.gaps.iter().flatten().copied().filter(|g| *g > 1e-13).collect();
    assert!(gaps.len() > 10);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    let bounded = rows.iter().all(|r| r.holevo.value().unwrap() <= limit * (1.0 + 1e-12));
    assert!(bounded);
}

#[test]
fn ea_grows_logarithmically() {
    // one point per decade, so each step should add P (1 - T) log2(10)
    let spec = modes_sweep(g1_link(), 1e24, 1e40, 17);
    let rows = run_sweep(&spec).unwrap();
    let eff = effective_channel(&spec.link, 1.0, spec.power).unwrap();
    let ch = ChannelParams::new(1.0, spec.power, eff.tau_eff, eff.nu_eff).unwrap();
    let step = spec.power * (1.0 - ch.slope_t()) * 10f64.log2();
    let report = convergence_report(&rows, step, Column::Ea, 1.0).unwrap();
    for diff in report.successive_differences.iter().flatten() {
        assert!(((diff - step) / step).abs() < 0.1, "{diff:e} vs {step:e}");
    }
    let residual = convergence_report(&rows, 1.0, Column::EaResidual, 1.0).unwrap();
    let diffs: Vec<f64> = residual.successive_differences.iter().flatten().map(|d| d.abs()).collect();
    assert!(diffs.last().unwrap() < &diffs[0]);
}

#[test]
fn asymptotic_form_at_large_modes() {
    // ea = P (1 - T) (log2 M - log2 P) + O(P), so the ratio creeps up to 1
    // only once log M dominates log P
    let at = |m: f64| {
        let ch = ChannelParams::new(
            m,
            1e16,
            Transmittivity::new(0.6065).unwrap(),
            NoisePhotons::new(0.9).unwrap(),
        )
        .unwrap();
        let ea = capacities(&ch).unwrap().ea;
        (ea / ea_asymptotic(&ch), ea - ea_asymptotic(&ch))
    };
    let (r30, d30) = at(1e30);
    let (r100, d100) = at(1e100);
    let (r300, d300) = at(1e300);
    assert!(r30 < r100 && r100 < r300 && r300 < 1.0);
    assert!((0.9..=1.1).contains(&r300), "{r300}");
    assert!((d100 - d30).abs() < 1e-6 * d30.abs());
    assert!((d300 - d100).abs() < 1e-6 * d30.abs());
}

#[test]
fn g2_maximum_on_lossy_segments() {
    let link = SegmentedLink::new(1.0, 3, -(0.5f64).ln(), Receiver::Passive, GainRule::ModeDependent)
        .unwrap();
    let spec = modes_sweep(link, 1e2, 1e40, 400);
    let rows = run_sweep(&spec).unwrap();
    let maxima = find_maxima(&spec, &rows, &[Column::Shannon]);
    let global: Vec<_> = maxima.iter().filter(|m| m.kind == PeakKind::Global).collect();
    assert_eq!(global.len(), 1);
    let peak = global[0];
    assert!(peak.x > 1e14 && peak.x < 1e17, "{:e}", peak.x);
    let beyond = rows.iter().filter(|r| r.x > peak.x * 10.0);
    for r in beyond {
        assert!(r.shannon.value().unwrap() < peak.value);
    }
}

#[test]
fn g1_has_no_interior_maximum() {
    let spec = modes_sweep(g1_link(), 1e2, 1e40, 400);
    let rows = run_sweep(&spec).unwrap();
    assert!(find_maxima(&spec, &rows, &Column::CAPACITIES).is_empty());
}
