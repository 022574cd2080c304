//! Command execution and artifact writing.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use soler_core::fields::{
    build_bi_frequency_wave, decompose_field, known_mode_field, reconstruct_field_on, scalar_density, sigma2_conj,
    BiFrequencyWave, SpinorField,
};
use soler_core::harmonics::{eval_harmonic, mat_vec, sigma_r, verify_spin_orbit_identities, AngularGrid, HarmonicIndex, IdentityReport};
use soler_core::linops::{assemble, make_radial_grid, BlockKind, DiscreteProfile, Sector};
use soler_core::profiles::{ground_state, SolitonProfile};
use soler_core::spectra::{evaluate_sector_with_profile, sweep_threshold, EvaluationSettings, SpectrumReport};

use crate::config::{ConfigError, FieldSource, RunConfig};

/// Frequency used by `validate` when the configuration gives none.
const DEFAULT_VALIDATE_OMEGA: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Profile,
    Spectrum,
    Sweep,
    Validate,
    Decompose,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Validate => "validate",
            Command::Decompose => "decompose",
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(String),
    /// The validation suite ran to completion and found deviations.
    Validation(Vec<String>),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 1,
            RunError::Numerical(_) => 2,
            RunError::Validation(_) => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error: {e}"),
            RunError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            RunError::Validation(failed) => write!(f, "validation failed: {}", failed.join("; ")),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<soler_core::Error> for RunError {
    fn from(e: soler_core::Error) -> Self {
        RunError::Numerical(e.to_string())
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Numerical(format!("I/O: {e}"))
    }
}

impl From<serde_json::Error> for RunError {
    fn from(e: serde_json::Error) -> Self {
        RunError::Numerical(format!("JSON: {e}"))
    }
}

/// Writes artifacts into one directory, each with a metadata sidecar.
struct Artifacts {
    dir: PathBuf,
    config_hash: String,
    command: Command,
    grid: serde_json::Value,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path, config: &RunConfig, command: Command) -> Result<Self, RunError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config_hash: config_hash(config),
            command,
            grid: serde_json::json!({ "N": config.n, "r_max": config.r_max }),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        let meta = serde_json::json!({
            "file": name,
            "command": self.command.name(),
            "config_sha256": self.config_hash,
            "grid": self.grid,
        });
        fs::write(self.dir.join(format!("{name}.meta.json")), pretty(&meta)?)?;
        self.written.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let text = pretty(value)?;
        self.write(name, text.as_bytes())
    }
}

fn pretty<T: Serialize>(value: &T) -> Result<String, RunError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// SHA-256 of the canonical JSON form of the configuration.
///
/// The output directory is not part of the hash, so the same run written to
/// two places carries the same fingerprint.
pub fn config_hash(config: &RunConfig) -> String {
    let mut canonical = config.clone();
    canonical.output = None;
    let text = serde_json::to_string(&canonical).expect("configuration serializes");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn settings(config: &RunConfig) -> EvaluationSettings {
    EvaluationSettings {
        n: config.n,
        r_max: config.r_max,
        tol_real: config.tolerances.tol_real,
        profile_tol: config.tolerances.profile_tol,
    }
}

fn solve(config: &RunConfig, omega: f64) -> Result<SolitonProfile, RunError> {
    Ok(ground_state(&config.model, omega, config.tolerances.profile_tol)?)
}

/// Runs `command` and returns the paths of the data files written.
pub fn execute(config: &RunConfig, command: Command, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let mut artifacts = Artifacts::new(out, config, command)?;
    match command {
        Command::Profile => profile(config, &mut artifacts)?,
        Command::Spectrum => spectrum(config, &mut artifacts)?,
        Command::Sweep => sweep(config, &mut artifacts)?,
        Command::Validate => validate(config, &mut artifacts)?,
        Command::Decompose => decompose(config, &mut artifacts)?,
    }
    Ok(artifacts.written)
}

fn profile(config: &RunConfig, artifacts: &mut Artifacts) -> Result<(), RunError> {
    let p = solve(config, config.require_omega()?)?;
    let mut csv = Vec::new();
    p.write_csv(&mut csv)?;
    artifacts.write("profile.csv", &csv)
}

/// File stem of a sector's spectrum.
pub fn spectrum_stem(sector: &Sector) -> String {
    match sector.kind {
        BlockKind::OneFreq => format!("spectrum_{}_{}", sector.ell, sector.m),
        BlockKind::BiFreq => format!("spectrum_{}_{}_bi_{}", sector.ell, sector.m, sector.nu),
        BlockKind::RsSector => format!("spectrum_{}_{}_rs", sector.ell, sector.m),
        BlockKind::L0Only => format!("spectrum_{}_{}_l0", sector.ell, sector.m),
    }
}

fn spectrum(config: &RunConfig, artifacts: &mut Artifacts) -> Result<(), RunError> {
    let omega = config.require_omega()?;
    let p = solve(config, omega)?;
    let s = settings(config);
    let grid = make_radial_grid(config.n, config.r_max)?;
    if let Some(warning) = grid.truncation_warning(p.decay_rate) {
        eprintln!("warning: {warning}");
    }
    let sectors = config.sectors_or_default();
    let reports: Vec<SpectrumReport> = sectors
        .par_iter()
        .map(|sector| evaluate_sector_with_profile(&p, *sector, &s))
        .collect::<Result<_, _>>()?;
    for report in &reports {
        let stem = spectrum_stem(&report.sector);
        let mut csv = Vec::new();
        report.write_csv(&mut csv)?;
        artifacts.write(&format!("{stem}.csv"), &csv)?;
        artifacts.write_json(&format!("{stem}.json"), report)?;
    }
    Ok(())
}

fn sweep(config: &RunConfig, artifacts: &mut Artifacts) -> Result<(), RunError> {
    let (lo, hi) = config
        .omega_range
        .ok_or_else(|| ConfigError { key: "run.omega_range".into(), message: "required by sweep".into() })?;
    let sector = match config.sectors.as_slice() {
        [] => Sector::one_frequency(0, 0),
        [one] => *one,
        _ => {
            return Err(ConfigError { key: "sector".into(), message: "sweep takes a single sector".into() }.into());
        }
    };
    let result = sweep_threshold(&config.model, sector, lo, hi, config.tolerances.tol_omega, &settings(config))?;
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    artifacts.write("sweep.csv", &csv)?;
    artifacts.write_json("threshold.json", &result.summary_json())
}

/// Thresholds applied to each named check of the validation report.
fn tolerance_for(check: &str) -> f64 {
    match check {
        "spin_orbit_square" => 1e-8,
        "round_trip" => 1e-9,
        _ => 1e-10,
    }
}

#[derive(Serialize)]
struct ValidationOutput {
    omega: f64,
    passed: bool,
    #[serde(flatten)]
    report: IdentityReport,
    failures: Vec<String>,
}

fn validate(config: &RunConfig, artifacts: &mut Artifacts) -> Result<(), RunError> {
    let omega = config.omega.unwrap_or(DEFAULT_VALIDATE_OMEGA);
    let mut report = verify_spin_orbit_identities(config.validate_ell_max)?;
    let p = solve(config, omega)?;
    field_checks(&p, config, &mut report)?;

    let failures: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !(c.max_abs_deviation <= tolerance_for(&c.check_name)))
        .map(|c| format!("{} at ell={}: {:.3e}", c.check_name, c.ell, c.max_abs_deviation))
        .collect();
    let output = ValidationOutput { omega, passed: failures.is_empty(), report, failures: failures.clone() };
    artifacts.write_json("validate.json", &output)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(RunError::Validation(failures))
    }
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Field-level checks: decomposition round trip, constant scalar density of
/// bi-frequency waves, and the `ν = 0` reduction of the bi-frequency block.
fn field_checks(p: &SolitonProfile, config: &RunConfig, report: &mut IdentityReport) -> Result<(), RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ell_max = 3usize;
    let angular = AngularGrid::for_degree(ell_max);
    let radii = [0.3, 1.1, 2.4, 5.0];
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let terms: Vec<(HarmonicIndex, [C64; 4])> = (0..=ell_max)
            .flat_map(|ell| (-(ell as i64)..=ell as i64).map(move |m| HarmonicIndex { ell, m }))
            .map(|idx| (idx, std::array::from_fn(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))))
            .collect();
        let field = SpinorField::from_fn(&radii, &angular, |r, t, ph| {
            let (mut up, mut lo) = ([ZERO; 2], [ZERO; 2]);
            for (idx, c) in &terms {
                let h = eval_harmonic(*idx, t, ph) * (-0.4 * r).exp();
                up[0] += c[0] * h;
                up[1] += c[1] * h;
                lo[0] += c[2] * h;
                lo[1] += c[3] * h;
            }
            let lo = mat_vec(&sigma_r(t, ph), &lo).map(|z| I * z);
            [up[0], up[1], lo[0], lo[1]]
        });
        let back = reconstruct_field_on(&decompose_field(&field, ell_max)?, &angular);
        worst = worst.max(back.max_abs_diff(&field));
    }
    report.push("round_trip", ell_max, worst);

    let grid = make_radial_grid(64, config.r_max.min(20.0))?;
    let radii = grid.primal();
    let angular = AngularGrid::for_degree(2);
    let xi = [C64::new(0.7, 0.2), C64::new(-0.3, 0.4)];
    let nu = 0.5;
    let scale = 1.0 / ((xi[0].norm_sqr() + xi[1].norm_sqr()) * (1.0 - nu * nu)).sqrt();
    let wave = BiFrequencyWave::new(p.clone(), xi.map(|z| z * scale), sigma2_conj(xi).map(|z| z * nu * scale))?;
    let mut worst = 0.0f64;
    for t in [0.0, 1.3, 7.9] {
        let rho = scalar_density(&build_bi_frequency_wave(&wave, t, &radii, &angular));
        for (i, &r) in radii.iter().enumerate() {
            let (v, u) = p.value_at(r);
            for a in 0..angular.len() {
                worst = worst.max((rho[i * angular.len() + a] - (v * v - u * u)).abs());
            }
        }
    }
    report.push("bi_frequency_density", 0, worst);

    let dp = DiscreteProfile::sample(p, &grid);
    let mut worst = 0.0f64;
    for (ell, m) in [(1usize, 1i64), (2, -1)] {
        let one = assemble(&dp, Sector::one_frequency(ell, m))?;
        let bi = assemble(&dp, Sector::bi_frequency(ell, m, 0.0))?;
        let (a, b) = (&one.entries, &bi.entries);
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
            }
        }
    }
    report.push("bi_frequency_reduction", 2, worst);
    Ok(())
}

/// Spinor field file read by `decompose`.
///
/// `values` holds one `[[re, im]; 4]` per sample, radius-major; within a
/// radius the samples run over `θ` (Gauss–Legendre nodes in `cos θ`,
/// increasing `θ`) and, innermost, over `n_phi` equally spaced `φ` from 0.
#[derive(Debug, Serialize, Deserialize)]
pub struct FieldFile {
    pub radii: Vec<f64>,
    pub n_theta: usize,
    pub n_phi: usize,
    pub values: Vec<[[f64; 2]; 4]>,
}

impl FieldFile {
    pub fn from_field(field: &SpinorField) -> Self {
        Self {
            radii: field.radii.clone(),
            n_theta: field.angular.theta.len(),
            n_phi: field.angular.phi.len(),
            values: field.values.iter().map(|s| s.map(|z| [z.re, z.im])).collect(),
        }
    }

    pub fn into_field(self) -> Result<SpinorField, String> {
        let angular = AngularGrid::new(self.n_theta, self.n_phi).map_err(|e| e.to_string())?;
        let expected = self.radii.len() * angular.len();
        if self.values.len() != expected {
            return Err(format!("expected {expected} samples, found {}", self.values.len()));
        }
        let mut field = SpinorField::zeros(&self.radii, &angular);
        for (dst, src) in field.values.iter_mut().zip(&self.values) {
            *dst = src.map(|[re, im]| C64::new(re, im));
        }
        Ok(field)
    }
}

fn decompose(config: &RunConfig, artifacts: &mut Artifacts) -> Result<(), RunError> {
    let field = match &config.field {
        None => {
            return Err(ConfigError { key: "decompose".into(), message: "give decompose.field or decompose.known_mode".into() }.into())
        }
        Some(FieldSource::File(path)) => {
            let key = || "decompose.field".to_string();
            let text = fs::read_to_string(path)
                .map_err(|e| ConfigError { key: key(), message: format!("cannot read {}: {e}", path.display()) })?;
            let file: FieldFile =
                serde_json::from_str(&text).map_err(|e| ConfigError { key: key(), message: format!("malformed field file: {e}") })?;
            file.into_field().map_err(|message| ConfigError { key: key(), message })?
        }
        Some(FieldSource::Known(kind)) => {
            let p = solve(config, config.require_omega()?)?;
            let radii = make_radial_grid(config.n, config.r_max)?.primal();
            known_mode_field(&p, *kind, &radii, &AngularGrid::for_degree(config.ell_max + 1))
        }
    };
    let coeffs = decompose_field(&field, config.ell_max)?;
    artifacts.write_json("coefficients.json", &coeffs)
}
