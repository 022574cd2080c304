use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use soler_core::linops::*;
use soler_core::profiles::{ground_state, NonlinearityModel, SolitonProfile};
use soler_core::spectra::*;
use soler_core::Error;

fn profile() -> &'static SolitonProfile {
    static P: OnceLock<SolitonProfile> = OnceLock::new();
    P.get_or_init(|| ground_state(&NonlinearityModel::cubic(), 0.9, 1e-13).unwrap())
}

fn settings(n: usize) -> EvaluationSettings {
    EvaluationSettings { n, ..Default::default() }
}

fn synthetic(eigs: Vec<C64>) -> SpectrumReport {
    let k = eigs.len();
    SpectrumReport {
        sector: Sector::one_frequency(0, 0),
        n: 16,
        r_max: 1.0,
        omega: 0.9,
        eigenvalues: eigs,
        classes: vec![EigenClass::Imaginary; k],
        growth_rate: 0.0,
        norm: 1.0,
        tol_real: 0.0,
        band_edge: 0.1,
    }
}

#[test]
fn free_generator_spectrum_is_symmetric() {
    let grid = make_radial_grid(40, 20.0).unwrap();
    let dp = DiscreteProfile::from_values(&grid, NonlinearityModel::cubic(), 0.5, vec![0.0; 40], vec![0.0; 40]).unwrap();
    let m = assemble_one_frequency(&dp, 1, 1).unwrap();
    let eigs = compute_spectrum(&m).unwrap();
    assert_eq!(eigs.len(), 320);
    for l in &eigs {
        let partner = eigs.iter().map(|z| (z + l).norm()).fold(f64::INFINITY, f64::min);
        assert!(partner < 1e-9 * m.norm_inf());
    }
}

#[test]
fn rs_spectrum_is_imaginary() {
    let dp = DiscreteProfile::from_profile(profile(), &make_radial_grid(100, 40.0).unwrap()).unwrap();
    for ell in [0, 3] {
        let eigs = compute_spectrum(&assemble_rs(&dp, ell)).unwrap();
        assert_eq!(eigs.len(), 200);
        assert!(eigs.iter().all(|l| l.re == 0.0));
    }
}

#[test]
fn classification_rules() {
    let r = classify_spectrum(synthetic(vec![C64::new(0.0, 1.8), C64::new(0.0, -1.8)]), 1e-4);
    assert_eq!(r.count(EigenClass::Imaginary), 2);
    assert_eq!(r.growth_rate, 0.0);
    let r = classify_spectrum(synthetic(vec![C64::new(0.01, 0.0), C64::new(-0.01, 0.0)]), 1e-4);
    assert_eq!(r.count(EigenClass::RealPair), 2);
    assert_eq!(r.growth_rate, 0.01);
    assert_eq!(r.real_pair_rate(), 0.01);
    let quad = vec![C64::new(0.2, 0.5), C64::new(0.2, -0.5), C64::new(-0.2, 0.5), C64::new(-0.2, -0.5)];
    let r = classify_spectrum(synthetic(quad), 1e-4);
    assert_eq!(r.count(EigenClass::ComplexQuad), 4);
    assert_eq!(r.real_pair_rate(), 0.0);
    assert!((r.growth_rate - 0.2).abs() < 1e-15);
}

#[test]
fn filtered_values_do_not_count() {
    let mut r = synthetic(vec![C64::new(0.5, 0.0), C64::new(0.0, 1.0)]);
    r.classes[0] = EigenClass::Filtered;
    let r = classify_spectrum(r, 1e-4);
    assert_eq!(r.growth_rate, 0.0);
    assert_eq!(r.retained().count(), 1);
}

#[test]
fn pairing_defect_detects_missing_partners() {
    let r = synthetic(vec![C64::new(0.1, 0.3), C64::new(-0.1, -0.3)]);
    assert!((r.pairing_defect() - 0.2).abs() < 1e-12);
}

#[test]
fn gauge_mode_survives_refinement() {
    let grid = make_radial_grid(200, 20.0).unwrap();
    let r = classify_spectrum(refine_and_filter(profile(), Sector::one_frequency(0, 0), &grid).unwrap(), 1e-4);
    let smallest = r.retained().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
    assert!(smallest < 5e-3, "{smallest}");
    assert!(r.pairing_defect() < 1e-8 * r.norm);
}

#[test]
fn values_missing_at_refinement_are_dropped() {
    let grid = make_radial_grid(200, 20.0).unwrap();
    let dp = DiscreteProfile::from_profile(profile(), &grid).unwrap();
    let fine_dp = DiscreteProfile::from_profile(profile(), &grid.refined()).unwrap();
    let sector = Sector::one_frequency(0, 0);
    let mut coarse = compute_spectrum(&assemble(&dp, sector).unwrap()).unwrap();
    let fine = compute_spectrum(&assemble(&fine_dp, sector).unwrap()).unwrap();
    // A spurious value inside the spectral gap that the fine run does not see.
    coarse.push(C64::new(0.0, 0.05));
    let band = band_edge(&profile().model, 0.9);
    let r = filter_report(sector, &grid, 0.9, 1.0, coarse, &fine, band);
    assert_eq!(*r.classes.last().unwrap(), EigenClass::Filtered);
    assert!(r.classes[..r.classes.len() - 1].iter().all(|c| *c == EigenClass::Imaginary));
}

#[test]
fn double_frequency_modes_survive_refinement() {
    let r = evaluate_sector_with_profile(profile(), Sector::one_frequency(1, 0), &settings(100)).unwrap();
    let target = C64::new(0.0, 1.8);
    for sign in [1.0, -1.0] {
        let err = r.retained().map(|l| (l - target * sign).norm()).fold(f64::INFINITY, f64::min);
        assert!(err < 1e-2, "{err}");
    }
    let translation = r.retained().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
    assert!(translation < 5e-2);
}

#[test]
fn merged_orders_close_the_spectrum() {
    let r = evaluate_sector_with_profile(profile(), Sector::one_frequency(1, 1), &settings(100)).unwrap();
    assert_eq!(r.sector.m, 1);
    assert_eq!(r.eigenvalues.len(), 2 * 8 * 100);
    assert!(r.pairing_defect() < 1e-8 * r.norm, "{}", r.pairing_defect());
    assert_eq!(r.growth_rate, 0.0);
}

#[test]
fn rs_sector_report_is_stable() {
    let r = evaluate_sector_with_profile(profile(), Sector::rs(2), &settings(100)).unwrap();
    assert_eq!(r.growth_rate, 0.0);
    assert!(r.eigenvalues.iter().all(|l| l.re.abs() <= 1e-8));
}

#[test]
fn invalid_sectors_are_rejected() {
    let e = evaluate_sector_with_profile(profile(), Sector::one_frequency(1, 2), &settings(32));
    assert!(matches!(e, Err(Error::InvalidArgument(_))));
}

#[test]
fn sweep_requires_a_straddle() {
    let model = NonlinearityModel::cubic();
    let s = settings(100);
    let e = sweep_threshold(&model, Sector::one_frequency(0, 0), 0.80, 0.85, 1e-2, &s);
    assert!(matches!(e, Err(Error::NoStraddle { .. })), "{e:?}");
    let e = sweep_threshold(&model, Sector::one_frequency(0, 0), 0.9, 0.9, 1e-2, &s);
    assert!(matches!(e, Err(Error::InvalidArgument(_))));
    let e = sweep_threshold(&model, Sector::one_frequency(0, 0), 0.9, 0.95, 0.0, &s);
    assert!(matches!(e, Err(Error::InvalidArgument(_))));
}

#[test]
fn coarse_sweep_brackets_the_threshold() {
    let model = NonlinearityModel::cubic();
    let mut seen = 0;
    let result = sweep_threshold_with(&model, Sector::one_frequency(0, 0), 0.90, 0.98, 1e-2, &settings(100), |_| seen += 1).unwrap();
    assert_eq!(seen, result.samples.len());
    assert!(result.bracket.1 - result.bracket.0 <= 1e-2);
    assert!(result.omega_star > 0.9 && result.omega_star < 0.97, "{}", result.omega_star);
    assert!(result.samples.windows(2).all(|w| w[0].omega <= w[1].omega));
    let mut csv = Vec::new();
    result.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("omega,growth_rate\n"));
    assert_eq!(text.lines().count(), result.samples.len() + 1);
    let json = result.summary_json();
    assert_eq!(json["omega_star"].as_f64().unwrap(), result.omega_star);
    assert_eq!(json["bracket"][0].as_f64().unwrap(), result.bracket.0);
}

#[test]
fn report_serialization() {
    let r = classify_spectrum(synthetic(vec![C64::new(0.01, 0.0), C64::new(-0.01, 0.0)]), 1e-4);
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["eigenvalues"][0][0].as_f64().unwrap(), 0.01);
    assert_eq!(json["classes"][0], "REAL_PAIR");
    let back: SpectrumReport = serde_json::from_value(json).unwrap();
    assert_eq!(back.eigenvalues, r.eigenvalues);
    let mut csv = Vec::new();
    r.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap(), "re,im,class\n0.01,0,REAL_PAIR\n-0.01,0,REAL_PAIR\n");
}
