//! Spectra of the assembled blocks, refinement filtering, classification and
//! the instability-threshold sweep.

use std::io::Write;

use faer::Side;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linops::{assemble, make_radial_grid, BlockKind, BlockOperatorMatrix, DiscreteProfile, RadialGrid, Sector};
use crate::profiles::{ground_state, NonlinearityModel, SolitonProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EigenClass {
    Imaginary,
    RealPair,
    ComplexQuad,
    /// Inside the continuous-spectrum band and not reproduced under
    /// refinement: reported, but excluded from the growth rate.
    Essential,
    /// Not reproduced under refinement.
    Filtered,
}

impl EigenClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            EigenClass::Imaginary => "IMAGINARY",
            EigenClass::RealPair => "REAL_PAIR",
            EigenClass::ComplexQuad => "COMPLEX_QUAD",
            EigenClass::Essential => "ESSENTIAL",
            EigenClass::Filtered => "FILTERED",
        }
    }

    /// Whether the eigenvalue counts as a discrete, resolved mode.
    pub fn is_classified(&self) -> bool {
        matches!(self, EigenClass::Imaginary | EigenClass::RealPair | EigenClass::ComplexQuad)
    }
}

/// Eigenvalues of the generator `−iM` of one sector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub sector: Sector,
    pub n: usize,
    pub r_max: f64,
    pub omega: f64,
    #[serde(serialize_with = "ser_complex", deserialize_with = "de_complex")]
    pub eigenvalues: Vec<C64>,
    pub classes: Vec<EigenClass>,
    pub growth_rate: f64,
    /// `‖M‖_∞` of the matrix the eigenvalues belong to.
    pub norm: f64,
    /// Absolute real-part tolerance used by the classification.
    pub tol_real: f64,
    /// `|Im λ|` above which eigenvalues lie in the continuous-spectrum band.
    pub band_edge: f64,
}

fn ser_complex<S: serde::Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

fn de_complex<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<C64>, D::Error> {
    let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
    Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
}

/// All eigenvalues of the generator `−iM`, sorted by imaginary then real
/// part. The R/S sector goes through the symmetric solver.
pub fn compute_spectrum(block: &BlockOperatorMatrix) -> Result<Vec<C64>> {
    let m = &block.entries;
    if (0..m.ncols()).any(|j| (0..m.nrows()).any(|i| !m[(i, j)].is_finite())) {
        return Err(invalid(format!("matrix {} has non-finite entries", block.fingerprint())));
    }
    let fail = |_| Error::EigenFailure { fingerprint: block.fingerprint() };
    let mu: Vec<C64> = if block.sector.kind == BlockKind::RsSector {
        m.self_adjoint_eigenvalues(Side::Lower).map_err(fail)?.into_iter().map(|x| C64::new(x, 0.0)).collect()
    } else {
        m.eigenvalues().map_err(fail)?
    };
    let mut lambda: Vec<C64> = mu.into_iter().map(|z| C64::new(z.im, -z.re)).collect();
    sort_spectrum(&mut lambda);
    Ok(lambda)
}

fn sort_spectrum(v: &mut [C64]) {
    v.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
}

/// For each coarse eigenvalue, whether some fine eigenvalue lies within
/// `max(10⁻³, 10 h² |λ|)`.
pub fn match_under_refinement(coarse: &[C64], fine: &[C64], h: f64) -> Vec<bool> {
    coarse
        .iter()
        .map(|l| {
            let tol = (10.0 * h * h * l.norm()).max(1e-3);
            fine.iter().any(|f| (f - l).norm() <= tol)
        })
        .collect()
}

/// Continuous-spectrum threshold `m − ω` of the generator.
pub fn band_edge(model: &NonlinearityModel, omega: f64) -> f64 {
    (model.mass - omega).abs()
}

/// Marks unmatched eigenvalues as filtered (or essential, inside the band)
/// and returns a report whose classification is still to be filled in.
pub fn filter_report(
    sector: Sector,
    grid: &RadialGrid,
    omega: f64,
    norm: f64,
    coarse: Vec<C64>,
    fine: &[C64],
    band: f64,
) -> SpectrumReport {
    let matched = match_under_refinement(&coarse, fine, grid.h);
    let classes = coarse
        .iter()
        .zip(&matched)
        .map(|(l, &ok)| match (ok, l.im.abs() >= band) {
            (true, _) => EigenClass::Imaginary,
            (false, true) => EigenClass::Essential,
            (false, false) => EigenClass::Filtered,
        })
        .collect();
    SpectrumReport {
        sector,
        n: grid.n,
        r_max: grid.r_max,
        omega,
        eigenvalues: coarse,
        classes,
        growth_rate: 0.0,
        norm,
        tol_real: 0.0,
        band_edge: band,
    }
}

/// Spectrum of one sector at `N` and `2N`, filtered by refinement.
pub fn refine_and_filter(profile: &SolitonProfile, sector: Sector, grid: &RadialGrid) -> Result<SpectrumReport> {
    Ok(refine_and_filter_detailed(profile, sector, grid)?.report)
}

/// A filtered report together with the raw spectrum of the refined run.
#[derive(Clone, Debug)]
pub struct RefinedSpectrum {
    pub report: SpectrumReport,
    /// All eigenvalues at `2N`.
    pub fine: Vec<C64>,
    pub fine_norm: f64,
}

pub fn refine_and_filter_detailed(profile: &SolitonProfile, sector: Sector, grid: &RadialGrid) -> Result<RefinedSpectrum> {
    let fine_grid = grid.refined();
    let solve = |g: &RadialGrid| -> Result<(Vec<C64>, f64)> {
        let dp = DiscreteProfile::from_profile(profile, g)?;
        let block = assemble(&dp, sector)?;
        Ok((compute_spectrum(&block)?, block.norm_inf()))
    };
    let (coarse, fine) = rayon::join(|| solve(grid), || solve(&fine_grid));
    let (coarse, norm) = coarse?;
    let (fine, fine_norm) = fine?;
    let report = filter_report(sector, grid, profile.omega, norm, coarse, &fine, band_edge(&profile.model, profile.omega));
    Ok(RefinedSpectrum { report, fine, fine_norm })
}

/// Fills in the classification; `tol_real` is relative to `‖M‖_∞`.
pub fn classify_spectrum(mut report: SpectrumReport, tol_real: f64) -> SpectrumReport {
    let tol = tol_real * report.norm;
    report.tol_real = tol;
    let mut growth = 0.0f64;
    for (l, class) in report.eigenvalues.iter().zip(report.classes.iter_mut()) {
        if !class.is_classified() {
            continue;
        }
        *class = if l.re.abs() <= tol {
            EigenClass::Imaginary
        } else if l.im.abs() <= tol {
            EigenClass::RealPair
        } else {
            EigenClass::ComplexQuad
        };
        growth = growth.max(l.re);
    }
    report.growth_rate = if growth > tol { growth } else { 0.0 };
    report
}

impl SpectrumReport {
    /// Largest real part among eigenvalues classified as real pairs.
    pub fn real_pair_rate(&self) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.classes)
            .filter(|(_, c)| **c == EigenClass::RealPair)
            .map(|(l, _)| l.re)
            .fold(0.0, f64::max)
    }

    /// Retained (non-filtered) eigenvalues.
    pub fn retained(&self) -> impl Iterator<Item = C64> + '_ {
        self.eigenvalues.iter().zip(&self.classes).filter(|(_, c)| **c != EigenClass::Filtered).map(|(l, _)| *l)
    }

    pub fn count(&self, class: EigenClass) -> usize {
        self.classes.iter().filter(|c| **c == class).count()
    }

    /// Merges the reports of the `+m` and `−m` blocks of one sector. The two
    /// blocks are exchanged by `λ → −λ`, so only their union is closed under
    /// the full symmetry group.
    pub fn merge(&self, other: &SpectrumReport) -> SpectrumReport {
        let mut pairs: Vec<(C64, EigenClass)> = self
            .eigenvalues
            .iter()
            .copied()
            .zip(self.classes.iter().copied())
            .chain(other.eigenvalues.iter().copied().zip(other.classes.iter().copied()))
            .collect();
        pairs.sort_by(|a, b| a.0.im.total_cmp(&b.0.im).then(a.0.re.total_cmp(&b.0.re)));
        let mut merged = self.clone();
        merged.sector.m = self.sector.m.abs();
        merged.eigenvalues = pairs.iter().map(|p| p.0).collect();
        merged.classes = pairs.iter().map(|p| p.1).collect();
        merged.growth_rate = self.growth_rate.max(other.growth_rate);
        merged.norm = self.norm.max(other.norm);
        merged.tol_real = self.tol_real.max(other.tol_real);
        merged
    }

    /// Largest distance from a retained eigenvalue to the nearest `−λ` and to
    /// the nearest `−conj(λ)` in the full list.
    pub fn pairing_defect(&self) -> f64 {
        pairing_defect(&self.eigenvalues, &self.classes)
    }

    /// `re,im,class` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "re,im,class")?;
        for (l, c) in self.eigenvalues.iter().zip(&self.classes) {
            writeln!(out, "{},{},{}", l.re, l.im, c.as_str())?;
        }
        Ok(())
    }
}

pub fn pairing_defect(eigenvalues: &[C64], classes: &[EigenClass]) -> f64 {
    let mut worst = 0.0f64;
    for (l, c) in eigenvalues.iter().zip(classes) {
        if *c == EigenClass::Filtered {
            continue;
        }
        let neg = eigenvalues.iter().map(|m| (m + l).norm()).fold(f64::INFINITY, f64::min);
        let refl = eigenvalues.iter().map(|m| (m + l.conj()).norm()).fold(f64::INFINITY, f64::min);
        worst = worst.max(neg).max(refl);
    }
    worst
}

/// Numerical settings of one stability evaluation.
#[derive(Clone, Copy, Debug)]
pub struct EvaluationSettings {
    pub n: usize,
    pub r_max: f64,
    /// Relative to `‖M‖_∞`.
    pub tol_real: f64,
    /// Amplitude tolerance of the profile bisection.
    pub profile_tol: f64,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        Self { n: 400, r_max: 40.0, tol_real: 1e-4, profile_tol: 1e-13 }
    }
}

/// Solves the profile at `ω`, then filters and classifies one sector. For
/// `m ≠ 0` the `±m` blocks are both computed and merged.
pub fn evaluate_sector(
    model: &NonlinearityModel,
    omega: f64,
    sector: Sector,
    settings: &EvaluationSettings,
) -> Result<SpectrumReport> {
    let profile = ground_state(model, omega, settings.profile_tol)?;
    evaluate_sector_with_profile(&profile, sector, settings)
}

pub fn evaluate_sector_with_profile(
    profile: &SolitonProfile,
    sector: Sector,
    settings: &EvaluationSettings,
) -> Result<SpectrumReport> {
    sector.validate()?;
    let grid = make_radial_grid(settings.n, settings.r_max)?;
    if sector.m == 0 || sector.kind == BlockKind::RsSector {
        return Ok(classify_spectrum(refine_and_filter(profile, sector, &grid)?, settings.tol_real));
    }
    let mirrored = Sector { m: -sector.m, ..sector };
    let (a, b) = rayon::join(
        || refine_and_filter(profile, sector, &grid),
        || refine_and_filter(profile, mirrored, &grid),
    );
    let a = classify_spectrum(a?, settings.tol_real);
    let b = classify_spectrum(b?, settings.tol_real);
    Ok(a.merge(&b))
}

/// One evaluated frequency of a sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSample {
    pub omega: f64,
    pub growth_rate: f64,
    pub real_pair_rate: f64,
    pub unstable: bool,
    pub pairing_defect: f64,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub sector: Sector,
    /// Sorted by `ω`.
    pub samples: Vec<SweepSample>,
    pub omega_star: f64,
    pub bracket: (f64, f64),
    /// Whether the growth rate is non-decreasing in `ω` over the samples.
    pub monotone: bool,
}

impl SweepResult {
    /// `omega,growth_rate` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "omega,growth_rate")?;
        for s in &self.samples {
            writeln!(out, "{},{}", s.omega, s.growth_rate)?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "omega_star": self.omega_star,
            "bracket": [self.bracket.0, self.bracket.1],
            "sector": self.sector,
            "monotone": self.monotone,
        })
    }
}

fn sample_at(model: &NonlinearityModel, omega: f64, sector: Sector, settings: &EvaluationSettings) -> Result<(SweepSample, SpectrumReport)> {
    let report = evaluate_sector(model, omega, sector, settings)?;
    let rate = report.real_pair_rate();
    let sample = SweepSample {
        omega,
        growth_rate: report.growth_rate,
        real_pair_rate: rate,
        unstable: rate > 0.0,
        pairing_defect: report.pairing_defect(),
        norm: report.norm,
    };
    Ok((sample, report))
}

/// Bisection in `ω` on the emergence of a real eigenvalue pair.
///
/// `observer` sees every evaluated spectrum, in evaluation order.
pub fn sweep_threshold_with(
    model: &NonlinearityModel,
    sector: Sector,
    omega_lo: f64,
    omega_hi: f64,
    tol_omega: f64,
    settings: &EvaluationSettings,
    mut observer: impl FnMut(&SpectrumReport),
) -> Result<SweepResult> {
    if !(omega_lo < omega_hi) {
        return Err(invalid(format!("empty frequency bracket [{omega_lo}, {omega_hi}]")));
    }
    if !(tol_omega > 0.0) {
        return Err(invalid("tol_omega must be positive"));
    }
    let (lo, hi) = rayon::join(
        || sample_at(model, omega_lo, sector, settings),
        || sample_at(model, omega_hi, sector, settings),
    );
    let (lo, lo_report) = lo?;
    let (hi, hi_report) = hi?;
    observer(&lo_report);
    observer(&hi_report);
    if lo.unstable == hi.unstable {
        return Err(Error::NoStraddle { lo: omega_lo, hi: omega_hi });
    }
    let lo_unstable = lo.unstable;
    let (mut a, mut b) = (omega_lo, omega_hi);
    let mut samples = vec![lo, hi];
    while b - a > tol_omega {
        let mid = 0.5 * (a + b);
        let (s, report) = sample_at(model, mid, sector, settings)?;
        observer(&report);
        if s.unstable == lo_unstable {
            a = mid;
        } else {
            b = mid;
        }
        samples.push(s);
    }
    samples.sort_by(|x, y| x.omega.total_cmp(&y.omega));
    let monotone = samples.windows(2).all(|w| w[1].growth_rate >= w[0].growth_rate)
        || samples.windows(2).all(|w| w[1].growth_rate <= w[0].growth_rate);
    Ok(SweepResult { sector, samples, omega_star: 0.5 * (a + b), bracket: (a, b), monotone })
}

pub fn sweep_threshold(
    model: &NonlinearityModel,
    sector: Sector,
    omega_lo: f64,
    omega_hi: f64,
    tol_omega: f64,
    settings: &EvaluationSettings,
) -> Result<SweepResult> {
    sweep_threshold_with(model, sector, omega_lo, omega_hi, tol_omega, settings, |_| {})
}
