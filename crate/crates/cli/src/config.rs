//! Line-oriented run configuration.
//!
//! ```text
//! # comment
//! mass = 1              # keys may appear before any section header
//! [model]
//! power = 1
//! [grid]
//! N = 400
//! r_max = 40
//! [run]
//! omega = 0.9
//! omega_range = 0.90, 0.98
//! [tolerances]
//! tol_real = 1e-4
//! [sector]              # repeatable; each header starts a new sector
//! kind = ONE_FREQ
//! ell = 1
//! m = 0
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use soler_core::fields::KnownMode;
use soler_core::linops::{BlockKind, Sector, MIN_NODES};
use soler_core::profiles::NonlinearityModel;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// The offending key, written `section.key`.
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { key: key.to_string(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub tol_real: f64,
    pub tol_omega: f64,
    pub profile_tol: f64,
}

/// Where the field for `decompose` comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FieldSource {
    File(PathBuf),
    Known(KnownMode),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: NonlinearityModel,
    pub n: usize,
    pub r_max: f64,
    pub sectors: Vec<Sector>,
    pub omega: Option<f64>,
    pub omega_range: Option<(f64, f64)>,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
    pub field: Option<FieldSource>,
    pub ell_max: usize,
    pub validate_ell_max: usize,
}

/// Every accepted key and the section it belongs to.
const KEYS: &[(&str, &str)] = &[
    ("model", "mass"),
    ("model", "power"),
    ("grid", "N"),
    ("grid", "r_max"),
    ("run", "omega"),
    ("run", "omega_range"),
    ("tolerances", "tol_real"),
    ("tolerances", "tol_omega"),
    ("tolerances", "profile_tol"),
    ("output", "directory"),
    ("decompose", "field"),
    ("decompose", "known_mode"),
    ("decompose", "ell_max"),
    ("validate", "ell_max"),
    ("sector", "kind"),
    ("sector", "ell"),
    ("sector", "m"),
    ("sector", "nu"),
];

struct Entry {
    value: String,
    line: usize,
}

#[derive(Default)]
struct Parsed {
    values: BTreeMap<String, Entry>,
    sectors: Vec<BTreeMap<String, Entry>>,
}

fn parse_text(text: &str) -> Result<Parsed, ConfigError> {
    let mut parsed = Parsed::default();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(&format!("line {line_no}"), format!("malformed section header `{line}`")))?
                .trim()
                .to_string();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(err(&name, format!("unknown section on line {line_no}")));
            }
            if name == "sector" {
                parsed.sectors.push(BTreeMap::new());
            }
            section = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(&format!("line {line_no}"), format!("expected `key = value`, found `{line}`")))?;
        let key = key.trim();
        let value = value.trim().to_string();
        let resolved = match &section {
            Some(s) => {
                if !KEYS.iter().any(|(ks, k)| ks == s && *k == key) {
                    return Err(err(&format!("{s}.{key}"), format!("unknown key on line {line_no}")));
                }
                format!("{s}.{key}")
            }
            None => {
                let mut owners = KEYS.iter().filter(|(s, k)| *k == key && *s != "sector");
                match (owners.next(), owners.next()) {
                    (Some((s, _)), None) => format!("{s}.{key}"),
                    (Some(_), Some(_)) => {
                        return Err(err(key, format!("ambiguous outside a section (line {line_no}); put it under a section header")))
                    }
                    (None, _) => return Err(err(key, format!("unknown key on line {line_no}"))),
                }
            }
        };
        let target = if section.as_deref() == Some("sector") {
            parsed.sectors.last_mut().expect("sector section opened")
        } else {
            &mut parsed.values
        };
        if let Some(prev) = target.get(&resolved) {
            return Err(err(&resolved, format!("given twice (lines {} and {line_no})", prev.line)));
        }
        target.insert(resolved, Entry { value, line: line_no });
    }
    Ok(parsed)
}

fn number(key: &str, entry: Option<&Entry>) -> Result<Option<f64>, ConfigError> {
    entry
        .map(|e| {
            e.value
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(key, format!("expected a number, found `{}`", e.value)))
        })
        .transpose()
}

fn integer<T: std::str::FromStr>(key: &str, entry: Option<&Entry>) -> Result<Option<T>, ConfigError> {
    entry
        .map(|e| e.value.parse::<T>().map_err(|_| err(key, format!("expected an integer, found `{}`", e.value))))
        .transpose()
}

fn positive(key: &str, value: f64) -> Result<f64, ConfigError> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(err(key, format!("must be positive, got {value}")))
    }
}

fn parse_kind(key: &str, value: &str) -> Result<BlockKind, ConfigError> {
    match value.to_ascii_uppercase().as_str() {
        "ONE_FREQ" => Ok(BlockKind::OneFreq),
        "BI_FREQ" => Ok(BlockKind::BiFreq),
        "RS_SECTOR" | "RS" => Ok(BlockKind::RsSector),
        _ => Err(err(key, format!("unknown sector kind `{value}` (ONE_FREQ, BI_FREQ or RS_SECTOR)"))),
    }
}

pub fn parse_known_mode(key: &str, value: &str) -> Result<KnownMode, ConfigError> {
    match value.to_ascii_uppercase().as_str() {
        "GAUGE" => Ok(KnownMode::Gauge),
        "TRANSLATION" => Ok(KnownMode::Translation),
        "PSI1" => Ok(KnownMode::Psi1),
        "PSI2" => Ok(KnownMode::Psi2),
        _ => Err(err(key, format!("unknown mode `{value}` (GAUGE, TRANSLATION, PSI1 or PSI2)"))),
    }
}

fn sector_from(index: usize, entries: &BTreeMap<String, Entry>) -> Result<Sector, ConfigError> {
    let key = |k: &str| format!("sector[{index}].{k}");
    let kind = match entries.get("sector.kind") {
        Some(e) => parse_kind(&key("kind"), &e.value)?,
        None => BlockKind::OneFreq,
    };
    let ell = integer::<usize>(&key("ell"), entries.get("sector.ell"))?.unwrap_or(0);
    let m = integer::<i64>(&key("m"), entries.get("sector.m"))?.unwrap_or(0);
    let nu = number(&key("nu"), entries.get("sector.nu"))?.unwrap_or(0.0);
    if m.unsigned_abs() as usize > ell {
        return Err(err(&key("m"), format!("|m| = {} exceeds ell = {ell}", m.abs())));
    }
    if nu < 0.0 {
        return Err(err(&key("nu"), format!("must be non-negative, got {nu}")));
    }
    match kind {
        BlockKind::RsSector if m != 0 => Err(err(&key("m"), "the R/S sector has no order; use m = 0")),
        BlockKind::OneFreq if nu != 0.0 => Err(err(&key("nu"), "only BI_FREQ sectors take nu")),
        _ => Ok(Sector { kind, ell, m, nu }),
    }
}

/// Parses configuration text; relative paths are resolved against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let parsed = parse_text(text)?;
    let v = &parsed.values;
    let mass = positive("model.mass", number("model.mass", v.get("model.mass"))?.unwrap_or(1.0))?;
    let power = integer::<u32>("model.power", v.get("model.power"))?.unwrap_or(1);
    if power == 0 {
        return Err(err("model.power", "must be a positive integer"));
    }
    let model = NonlinearityModel::new(mass, power).map_err(|e| err("model", e.to_string()))?;

    let n = integer::<usize>("grid.N", v.get("grid.N"))?.unwrap_or(400);
    if n < MIN_NODES {
        return Err(err("grid.N", format!("must be at least {MIN_NODES}, got {n}")));
    }
    let r_max = positive("grid.r_max", number("grid.r_max", v.get("grid.r_max"))?.unwrap_or(40.0))?;

    let omega = number("run.omega", v.get("run.omega"))?;
    if let Some(w) = omega {
        if !(w > 0.0 && w < mass) {
            return Err(err("run.omega", format!("must lie in (0, mass = {mass}), got {w}")));
        }
    }
    let omega_range = match v.get("run.omega_range") {
        None => None,
        Some(e) => {
            let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
            let bounds: Vec<f64> = parts.iter().filter_map(|p| p.parse::<f64>().ok()).collect();
            if parts.len() != 2 || bounds.len() != 2 {
                return Err(err("run.omega_range", format!("expected `lo, hi`, found `{}`", e.value)));
            }
            let (lo, hi) = (bounds[0], bounds[1]);
            if !(lo < hi) {
                return Err(err("run.omega_range", format!("lower end {lo} must be below upper end {hi}")));
            }
            if !(lo > 0.0 && hi < mass) {
                return Err(err("run.omega_range", format!("must lie inside (0, mass = {mass})")));
            }
            Some((lo, hi))
        }
    };

    let tolerances = Tolerances {
        tol_real: positive("tolerances.tol_real", number("tolerances.tol_real", v.get("tolerances.tol_real"))?.unwrap_or(1e-4))?,
        tol_omega: positive("tolerances.tol_omega", number("tolerances.tol_omega", v.get("tolerances.tol_omega"))?.unwrap_or(2e-3))?,
        profile_tol: positive(
            "tolerances.profile_tol",
            number("tolerances.profile_tol", v.get("tolerances.profile_tol"))?.unwrap_or(1e-13),
        )?,
    };

    let sectors = parsed
        .sectors
        .iter()
        .enumerate()
        .map(|(i, s)| sector_from(i, s))
        .collect::<Result<Vec<_>, _>>()?;

    let output = v.get("output.directory").map(|e| base.join(&e.value));
    let field = match (v.get("decompose.field"), v.get("decompose.known_mode")) {
        (Some(_), Some(_)) => return Err(err("decompose.field", "give either field or known_mode, not both")),
        (Some(e), None) => Some(FieldSource::File(base.join(&e.value))),
        (None, Some(e)) => Some(FieldSource::Known(parse_known_mode("decompose.known_mode", &e.value)?)),
        (None, None) => None,
    };
    let ell_max = integer::<usize>("decompose.ell_max", v.get("decompose.ell_max"))?.unwrap_or(3);
    let validate_ell_max = integer::<usize>("validate.ell_max", v.get("validate.ell_max"))?.unwrap_or(6);
    if validate_ell_max < 1 {
        return Err(err("validate.ell_max", "must be at least 1"));
    }

    Ok(RunConfig { model, n, r_max, sectors, omega, omega_range, tolerances, output, field, ell_max, validate_ell_max })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| err("config", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

impl RunConfig {
    /// The frequency of single-ω commands.
    pub fn require_omega(&self) -> Result<f64, ConfigError> {
        self.omega.ok_or_else(|| err("run.omega", "required by this command"))
    }

    /// Sectors to evaluate; the degree-zero one-frequency sector if none are
    /// listed.
    pub fn sectors_or_default(&self) -> Vec<Sector> {
        if self.sectors.is_empty() {
            vec![Sector::one_frequency(0, 0)]
        } else {
            self.sectors.clone()
        }
    }
}
