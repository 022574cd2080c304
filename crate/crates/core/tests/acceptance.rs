//! Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soler_core::fields::*;
use soler_core::harmonics::{eval_harmonic, mat_vec, sigma_r, verify_spin_orbit_identities, AngularGrid, HarmonicIndex};
use soler_core::linops::*;
use soler_core::profiles::{ground_state, profile_residual, NonlinearityModel, SolitonProfile};
use soler_core::spectra::*;

const N: usize = 400;
const R_MAX: f64 = 40.0;
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }

    fn failed(err: impl std::fmt::Display) -> Self {
        Self { pass: false, detail: format!("error: {err}") }
    }
}

fn settings() -> EvaluationSettings {
    EvaluationSettings { n: N, r_max: R_MAX, tol_real: 1e-4, profile_tol: 1e-13 }
}

fn nearest(values: impl Iterator<Item = C64>, target: C64) -> f64 {
    values.map(|l| (l - target).norm()).fold(f64::INFINITY, f64::min)
}

/// Reports whose pairing is checked by the spectrum-structure criterion.
#[derive(Default)]
struct Collected {
    reports: Vec<(String, SpectrumReport)>,
}

fn threshold(collected: &mut Collected) -> soler_core::Result<Outcome> {
    let model = NonlinearityModel::cubic();
    let mut seen = Vec::new();
    let sweep = sweep_threshold_with(&model, Sector::one_frequency(0, 0), 0.90, 0.98, 2e-3, &settings(), |r| {
        seen.push(r.clone())
    })?;
    for r in seen {
        collected.reports.push((format!("sweep ℓ=0 ω={}", r.omega), r));
    }
    let w = sweep.omega_star;
    let width = sweep.bracket.1 - sweep.bracket.0;
    Ok(Outcome::new(
        (0.916..=0.956).contains(&w) && width <= 2e-3,
        format!(
            "ω* = {w:.5} (bracket [{:.5}, {:.5}], {} samples, growth monotone: {})",
            sweep.bracket.0,
            sweep.bracket.1,
            sweep.samples.len(),
            sweep.monotone
        ),
    ))
}

fn double_frequency(profile: &SolitonProfile, collected: &mut Collected) -> soler_core::Result<(Outcome, SpectrumReport)> {
    let grid = make_radial_grid(N, R_MAX)?;
    let omega = profile.omega;
    let target = C64::new(0.0, 2.0 * omega);
    let mut pass = true;
    let mut parts = Vec::new();
    let mut m0_report = None;
    for orders in [vec![0i64], vec![1, -1]] {
        let mut merged: Option<SpectrumReport> = None;
        let mut fine_err = 0.0f64;
        let mut coarse_err = 0.0f64;
        for &m in &orders {
            let refined = refine_and_filter_detailed(profile, Sector::one_frequency(1, m), &grid)?;
            let report = classify_spectrum(refined.report, 1e-4);
            for sign in [1.0, -1.0] {
                coarse_err = coarse_err.max(nearest(report.retained(), target * sign));
                fine_err = fine_err.max(nearest(refined.fine.iter().copied(), target * sign));
            }
            merged = Some(match merged {
                None => report,
                Some(prev) => prev.merge(&report),
            });
        }
        let merged = merged.expect("at least one order");
        let ratio = coarse_err / fine_err;
        let ok = coarse_err <= 1e-2 && ratio >= 3.0;
        pass &= ok;
        parts.push(format!("|m|={}: err(N)={coarse_err:.2e} err(2N)={fine_err:.2e} ratio {ratio:.1}", orders[0].abs()));
        collected.reports.push((format!("ℓ=1 |m|={}", orders[0].abs()), merged.clone()));
        if orders[0] == 0 {
            m0_report = Some(merged);
        }
    }
    Ok((Outcome::new(pass, parts.join("; ")), m0_report.expect("m = 0 evaluated")))
}

fn kernels(profile: &SolitonProfile, gauge_report: &SpectrumReport, translation_report: &SpectrumReport) -> soler_core::Result<Outcome> {
    let grid = make_radial_grid(N, R_MAX)?;
    let dp = DiscreteProfile::from_profile(profile, &grid)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, report) in [(KnownMode::Gauge, gauge_report), (KnownMode::Translation, translation_report)] {
        let smallest = report.retained().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
        let (ell, m) = kind.sector();
        let block = assemble_one_frequency(&dp, ell, m)?;
        let x = known_mode_vector(profile, kind, &grid)?;
        let residual = block.apply_complex(&x).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let bound = 10.0 * grid.h * grid.h * block.norm_inf();
        let ok = smallest <= 5e-3 && residual <= bound;
        pass &= ok;
        parts.push(format!("{kind:?}: min|λ|={smallest:.2e}, residual {residual:.2e} ≤ {bound:.2e}"));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn rs_stability() -> soler_core::Result<Outcome> {
    let model = NonlinearityModel::cubic();
    let mut worst_re = 0.0f64;
    let mut worst_growth = 0.0f64;
    for omega in [0.8, 0.9] {
        let profile = ground_state(&model, omega, 1e-13)?;
        for ell in 0..=4 {
            let r = evaluate_sector_with_profile(&profile, Sector::rs(ell), &settings())?;
            worst_growth = worst_growth.max(r.growth_rate);
            worst_re = r.eigenvalues.iter().map(|l| l.re.abs()).fold(worst_re, f64::max);
        }
    }
    Ok(Outcome::new(
        worst_growth == 0.0 && worst_re <= 1e-8,
        format!("10 sectors, max growth {worst_growth:e}, max |Re λ| {worst_re:e}"),
    ))
}

fn bi_frequency_matrices(profile: &SolitonProfile) -> soler_core::Result<Outcome> {
    let grid = make_radial_grid(100, R_MAX)?;
    let dp = DiscreteProfile::from_profile(profile, &grid)?;
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for ell in 0..=3usize {
        for m in -(ell as i64)..=ell as i64 {
            let one = assemble_one_frequency(&dp, ell, m)?;
            let bi0 = assemble_bi_frequency(&dp, ell, m, 0.0)?;
            let size = one.size();
            for i in 0..size {
                for j in 0..size {
                    mismatches += usize::from(one.entries[(i, j)] != bi0.entries[(i, j)]);
                }
            }
            checked += 1;
            if ell == 0 {
                continue;
            }
            let base = assemble_generator(&dp, ell, m, 0.0)?;
            let part = assemble_coupling_part(&dp, ell, m)?;
            for i in 0..size {
                for j in 0..size {
                    mismatches += usize::from(one.entries[(i, j)] != base.entries[(i, j)] + part.entries[(i, j)]);
                }
            }
            for nu in [0.25, 0.5, 1.0, 2.0] {
                let scale = 1.0 + 2.0 * nu * nu;
                let bi = assemble_bi_frequency(&dp, ell, m, nu)?;
                for i in 0..size {
                    for j in 0..size {
                        mismatches += usize::from(bi.entries[(i, j)] != base.entries[(i, j)] + scale * part.entries[(i, j)]);
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(Outcome::new(mismatches == 0, format!("{checked} matrix comparisons, {mismatches} differing entries")))
}

fn bi_frequency_density(profile: &SolitonProfile) -> soler_core::Result<Outcome> {
    let grid = make_radial_grid(100, R_MAX)?;
    let radii = grid.primal();
    let angular = AngularGrid::for_degree(3);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let s = 0.6f64;
    let parallel = BiFrequencyWave::new(
        profile.clone(),
        [C64::from_polar((1.0 + s * s).sqrt(), 0.4), ZERO],
        [C64::from_polar(s, -1.3), ZERO],
    )?;
    let xi = [C64::new(0.8, 0.1), C64::new(-0.2, 0.5)];
    let norm = xi[0].norm_sqr() + xi[1].norm_sqr();
    let nu = 0.75;
    let scale = 1.0 / (norm * (1.0 - nu * nu)).sqrt();
    let eta = sigma2_conj(xi).map(|z| z * C64::from_polar(nu * scale, 0.9));
    let conjugate = BiFrequencyWave::new(profile.clone(), xi.map(|z| z * scale), eta)?;
    let carrier: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let (v, u) = profile.value_at(r);
            v * v - u * u
        })
        .collect();
    let mut worst = [0.0f64; 2];
    for (k, wave) in [parallel, conjugate].iter().enumerate() {
        for _ in 0..10 {
            let t = rng.gen_range(0.0..100.0);
            let rho = scalar_density(&build_bi_frequency_wave(wave, t, &radii, &angular));
            for (i, c) in carrier.iter().enumerate() {
                for a in 0..angular.len() {
                    worst[k] = worst[k].max((rho[i * angular.len() + a] - c).abs());
                }
            }
        }
    }
    Ok(Outcome::new(
        worst[0] <= 1e-10 && worst[1] <= 1e-10,
        format!("ξ ∥ η ∥ e₁: {:.2e}; η ∥ σ₂Kξ: {:.2e}", worst[0], worst[1]),
    ))
}

fn identities() -> soler_core::Result<Outcome> {
    let report = verify_spin_orbit_identities(6)?;
    let diag = report.worst("diagonal_e1").max(report.worst("diagonal_e2"));
    let corners = report.worst("vanishing_corners");
    let leak = report.worst("degree_leakage");
    let square = report.worst("spin_orbit_square");
    let anti = report.worst("anticommutator");
    Ok(Outcome::new(
        diag <= 1e-10 && corners <= 1e-10 && leak <= 1e-10 && square <= 1e-8 && anti <= 1e-10,
        format!("diagonal {diag:.1e}, corners {corners:.1e}, leakage {leak:.1e}, square {square:.1e}, anticommutator {anti:.1e}"),
    ))
}

fn round_trip() -> soler_core::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let angular = AngularGrid::for_degree(3);
    let radii = [0.2, 0.9, 1.7, 3.1, 6.0];
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut terms = Vec::new();
        for ell in 0..=3usize {
            for m in -(ell as i64)..=ell as i64 {
                let c: [C64; 4] = std::array::from_fn(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                let decay: f64 = rng.gen_range(0.1..1.0);
                terms.push((HarmonicIndex { ell, m }, c, decay));
            }
        }
        let field = SpinorField::from_fn(&radii, &angular, |r, t, p| {
            let mut up = [ZERO; 2];
            let mut lo = [ZERO; 2];
            for (idx, c, decay) in &terms {
                let h = eval_harmonic(*idx, t, p) * (-decay * r).exp();
                up[0] += c[0] * h;
                up[1] += c[1] * h;
                lo[0] += c[2] * h;
                lo[1] += c[3] * h;
            }
            let lo = mat_vec(&sigma_r(t, p), &lo).map(|z| I * z);
            [up[0], up[1], lo[0], lo[1]]
        });
        let coeffs = decompose_field(&field, 3)?;
        let back = reconstruct_field_on(&coeffs, &angular);
        worst = worst.max(back.distance(&field)).max(back.max_abs_diff(&field));
    }
    Ok(Outcome::new(worst <= 1e-9, format!("20 fields, worst deviation {worst:.2e}")))
}

fn profiles() -> soler_core::Result<Outcome> {
    let model = NonlinearityModel::cubic();
    let mut pass = true;
    let mut parts = Vec::new();
    for omega in [0.8, 0.9, 0.95, 0.99] {
        let p = ground_state(&model, omega, 1e-13)?;
        let res = profile_residual(&p, &model);
        let mismatch = p.decay_mismatch();
        pass &= res <= 1e-8 && mismatch <= 0.01;
        parts.push(format!("ω={omega}: residual {res:.1e}, decay {:.2}%", 100.0 * mismatch));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn structure(collected: &Collected) -> Outcome {
    let mut pass = !collected.reports.is_empty();
    let mut worst = 0.0f64;
    for (_, r) in &collected.reports {
        let rel = r.pairing_defect() / r.norm;
        worst = worst.max(rel);
        pass &= r.pairing_defect() <= 1e-8 * r.norm;
    }
    Outcome::new(pass, format!("{} spectra, worst pairing defect {worst:.2e}·‖M‖", collected.reports.len()))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut collected = Collected::default();
    let report = |id: u32, name: &str, o: &Outcome| {
        println!("{} criterion {id} ({name}): {} [{:.0?}]", if o.pass { "PASS" } else { "FAIL" }, o.detail, start.elapsed());
    };

    let model = NonlinearityModel::cubic();
    let profile = match ground_state(&model, 0.9, 1e-13) {
        Ok(p) => p,
        Err(e) => {
            println!("FAIL all criteria: profile at ω = 0.9 could not be computed: {e}");
            return ExitCode::FAILURE;
        }
    };

    let o = threshold(&mut collected).unwrap_or_else(Outcome::failed);
    report(1, "instability threshold", &o);
    results.push((1, "instability threshold", o));

    let (o, translation) = match double_frequency(&profile, &mut collected) {
        Ok((o, r)) => (o, Some(r)),
        Err(e) => (Outcome::failed(e), None),
    };
    report(2, "±2ωi eigenvalues", &o);
    results.push((2, "±2ωi eigenvalues", o));

    let gauge = collected
        .reports
        .iter()
        .find(|(_, r)| r.sector.ell == 0 && r.omega == 0.9)
        .map(|(_, r)| r.clone());
    let o = match (gauge, translation) {
        (Some(g), Some(t)) => kernels(&profile, &g, &t).unwrap_or_else(Outcome::failed),
        _ => Outcome::failed("prerequisite spectra unavailable"),
    };
    report(3, "symmetry kernels", &o);
    results.push((3, "symmetry kernels", o));

    let o = rs_stability().unwrap_or_else(Outcome::failed);
    report(4, "R/S sector stability", &o);
    results.push((4, "R/S sector stability", o));

    let o = bi_frequency_matrices(&profile).unwrap_or_else(Outcome::failed);
    report(5, "bi-frequency matrix identities", &o);
    results.push((5, "bi-frequency matrix identities", o));

    let o = bi_frequency_density(&profile).unwrap_or_else(Outcome::failed);
    report(6, "bi-frequency density", &o);
    results.push((6, "bi-frequency density", o));

    let o = identities().unwrap_or_else(Outcome::failed);
    report(7, "angular identities", &o);
    results.push((7, "angular identities", o));

    let o = round_trip().unwrap_or_else(Outcome::failed);
    report(8, "decomposition round trip", &o);
    results.push((8, "decomposition round trip", o));

    let o = profiles().unwrap_or_else(Outcome::failed);
    report(9, "profile quality", &o);
    results.push((9, "profile quality", o));

    let o = structure(&collected);
    report(10, "spectrum structure", &o);
    results.push((10, "spectrum structure", o));

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {}/{} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
