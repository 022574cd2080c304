use soler_core::profiles::*;
use soler_core::Error;

#[test]
fn nonlinearity_values() {
    let cubic = NonlinearityModel::cubic();
    assert_eq!(evaluate_nonlinearity(&cubic, 0.0), (1.0, -1.0));
    assert_eq!(evaluate_nonlinearity(&cubic, 0.25), (0.75, -1.0));
    let quartic = NonlinearityModel::new(2.0, 2).unwrap();
    assert_eq!(evaluate_nonlinearity(&quartic, 0.5), (1.75, -1.0));
}

#[test]
fn model_rejects_bad_parameters() {
    assert!(NonlinearityModel::new(0.0, 1).is_err());
    assert!(NonlinearityModel::new(1.0, 0).is_err());
}

#[test]
fn generic_small_amplitude_never_decays() {
    let model = NonlinearityModel::cubic();
    let kappa = model.decay_rate(0.9);
    for a in [1e-3, 0.05, 0.3, 0.7] {
        let out = integrate_shoot(&model, 0.9, a, 150.0 / kappa, 1e-3 / kappa).unwrap();
        assert_ne!(out.class, ShootClass::Decayed, "a = {a}");
    }
}

#[test]
fn free_dirac_has_no_bound_state() {
    let model = NonlinearityModel::free(1.0).unwrap();
    let kappa = model.decay_rate(0.9);
    for a in [0.01, 0.1, 1.0, 10.0] {
        let out = integrate_shoot(&model, 0.9, a, 150.0 / kappa, 1e-3 / kappa).unwrap();
        assert_ne!(out.class, ShootClass::Decayed);
    }
    assert!(matches!(scan_bracket(&model, 0.9), Err(Error::BracketFailure { .. })));
}

#[test]
fn shooting_argument_checks() {
    let model = NonlinearityModel::cubic();
    assert!(integrate_shoot(&model, 0.9, 1.0, 10.0, 0.0).is_err());
    assert!(integrate_shoot(&model, 0.9, 1.0, -1.0, 0.01).is_err());
    assert!(matches!(ground_state(&model, 1.0, 1e-12), Err(Error::InvalidArgument(_))));
    assert!(matches!(ground_state(&model, 0.0, 1e-12), Err(Error::InvalidArgument(_))));
}

#[test]
fn bracket_sides_classify_differently() {
    let model = NonlinearityModel::cubic();
    let (lo, hi) = scan_bracket(&model, 0.9).unwrap();
    let kappa = model.decay_rate(0.9);
    let shoot = |a| integrate_shoot(&model, 0.9, a, 150.0 / kappa, 1e-3 / kappa).unwrap().class;
    let (a, b) = (shoot(lo), shoot(hi));
    assert_ne!(a, b);
    assert!([a, b].contains(&ShootClass::CrossedZero));
    assert!([a, b].contains(&ShootClass::BlewUp));
}

#[test]
fn bracket_without_sign_change_fails() {
    let model = NonlinearityModel::cubic();
    let (lo, _) = scan_bracket(&model, 0.9).unwrap();
    let res = solve_profile(&model, 0.9, (0.5 * lo, 0.9 * lo), 1e-10);
    assert!(matches!(res, Err(Error::BracketFailure { .. })));
}

#[test]
fn ground_states_are_accurate() {
    let model = NonlinearityModel::cubic();
    for omega in [0.8, 0.9, 0.95, 0.99] {
        let p = ground_state(&model, omega, 1e-13).unwrap();
        let res = profile_residual(&p, &model);
        assert!(res <= 1e-8, "ω = {omega}: residual {res:e}");
        assert!(p.decay_mismatch() <= 0.01, "ω = {omega}: mismatch {}", p.decay_mismatch());
        let last = *p.v.last().unwrap();
        assert!(last.abs() <= 1e-6 * p.amplitude);
        assert!(p.v[0] * p.v[0] - p.u[0] * p.u[0] > 0.0);
        assert!((p.decay_rate - (1.0 - omega * omega).sqrt()).abs() < 1e-15);
    }
}

#[test]
fn slow_decay_near_the_mass() {
    let model = NonlinearityModel::cubic();
    let p = ground_state(&model, 0.99, 1e-12).unwrap();
    let heavy = ground_state(&model, 0.9, 1e-12).unwrap();
    assert!((p.decay_rate - 0.141).abs() < 1e-3);
    assert!(p.amplitude < heavy.amplitude);
}

#[test]
fn ground_state_amplitude_shoots_to_decay() {
    let model = NonlinearityModel::cubic();
    let p = ground_state(&model, 0.9, 1e-14).unwrap();
    let kappa = p.decay_rate;
    let out = integrate_shoot(&model, 0.9, p.amplitude, 30.0 / kappa, 1e-3 / kappa).unwrap();
    assert_eq!(out.class, ShootClass::Decayed);
}

#[test]
fn residual_detects_defects() {
    let model = NonlinearityModel::cubic();
    let mut p = ground_state(&model, 0.9, 1e-12).unwrap();
    let mut zero = p.clone();
    zero.v.iter_mut().for_each(|x| *x = 0.0);
    zero.u.iter_mut().for_each(|x| *x = 0.0);
    assert_eq!(profile_residual(&zero, &model), 0.0);
    let k = p.grid.len() / 10;
    p.v[k] += 1e-3;
    let g = model.g(p.v[k] * p.v[k] - p.u[k] * p.u[k]);
    assert!(profile_residual(&p, &model) >= 1e-3 * (0.9 - g).abs());
}

#[test]
fn interpolation_agrees_with_nodes() {
    let p = ground_state(&NonlinearityModel::cubic(), 0.9, 1e-12).unwrap();
    for i in [3, 100, 1000, p.grid.len() / 2] {
        let (v, u) = p.value_at(p.grid[i]);
        assert!((v - p.v[i]).abs() < 1e-12 && (u - p.u[i]).abs() < 1e-12);
    }
    let (v, u) = p.value_at(1e3);
    assert!(v.abs() < 1e-30 && u.abs() < 1e-30);
}

#[test]
fn csv_export_has_full_precision() {
    let p = ground_state(&NonlinearityModel::cubic(), 0.9, 1e-12).unwrap();
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,v,u"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row, vec![p.grid[0], p.v[0], p.u[0]]);
    assert_eq!(text.lines().count(), p.grid.len() + 1);
}

#[test]
fn decay_rate_is_read_off_the_integrated_tail() {
    for omega in [0.8, 0.9, 0.95, 0.99] {
        let p = ground_state(&NonlinearityModel::cubic(), omega, 1e-13).unwrap();
        assert!(p.decay_mismatch() < 5e-3, "ω = {omega}: mismatch {}", p.decay_mismatch());
    }
}
