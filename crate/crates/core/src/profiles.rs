//! Ground-state radial profiles of the stationary Soler system.
//!
//! A solitary wave `e^{-iωt}(v(r) e₁; i u(r) σ_r e₁)` solves the Soler
//! equation exactly when the real pair `(v, u)` satisfies
//!
//! ```text
//! ω v =  u' + 2u/r + g(v² − u²) v
//! ω u = −v'        − g(v² − u²) u
//! ```
//!
//! with `g(τ) = m − f(τ)`. The nodeless solution is found by shooting from the
//! origin on the amplitude `a = v(0)`. The far tail, where the shooting
//! trajectory is dominated by the growing mode of the exponential dichotomy,
//! is replaced by the exact decaying solution of the linearized system.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Pure-power self-interaction `f(τ) = strength · τ^power` with mass `mass`.
///
/// `strength` is 1 for the Soler model proper; setting it to 0 gives the free
/// Dirac operator, which is handy as a control case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityModel {
    pub mass: f64,
    pub power: u32,
    #[serde(default = "unit_strength")]
    pub strength: f64,
}

fn unit_strength() -> f64 {
    1.0
}

impl NonlinearityModel {
    pub fn new(mass: f64, power: u32) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(invalid(format!("mass must be positive, got {mass}")));
        }
        if power == 0 {
            return Err(invalid("power must be a positive integer"));
        }
        Ok(Self { mass, power, strength: 1.0 })
    }

    /// The cubic Soler model with unit mass.
    pub fn cubic() -> Self {
        Self { mass: 1.0, power: 1, strength: 1.0 }
    }

    /// Free Dirac equation (`f ≡ 0`) with the given mass.
    pub fn free(mass: f64) -> Result<Self> {
        let mut model = Self::new(mass, 1)?;
        model.strength = 0.0;
        Ok(model)
    }

    /// `g(τ)` and `g'(τ)`.
    pub fn evaluate(&self, tau: f64) -> (f64, f64) {
        let k = self.power as i32;
        let f = self.strength * tau.powi(k);
        let fprime = self.strength * f64::from(self.power) * tau.powi(k - 1);
        (self.mass - f, -fprime)
    }

    pub fn g(&self, tau: f64) -> f64 {
        self.mass - self.strength * tau.powi(self.power as i32)
    }

    pub fn decay_rate(&self, omega: f64) -> f64 {
        (self.mass * self.mass - omega * omega).sqrt()
    }

    fn check_omega(&self, omega: f64) -> Result<()> {
        if omega > 0.0 && omega < self.mass {
            Ok(())
        } else {
            Err(invalid(format!(
                "omega must lie in (0, {}), got {omega}",
                self.mass
            )))
        }
    }
}

/// `(g(τ), g'(τ))` for the given model.
pub fn evaluate_nonlinearity(model: &NonlinearityModel, tau: f64) -> (f64, f64) {
    model.evaluate(tau)
}

/// How a shooting trajectory ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ShootClass {
    /// `v` became negative: the amplitude overshot the ground state.
    CrossedZero,
    /// `v` started to grow, or exceeded ten times the amplitude.
    BlewUp,
    /// Both components dropped below `10⁻⁸·a` while `v` was still decreasing.
    Decayed,
    /// The integration window ended before any of the above happened.
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootOutcome {
    pub class: ShootClass,
    /// Radius at which the class was decided (or the end of the window).
    pub radius: f64,
}

pub(crate) const START_RADIUS: f64 = 1e-6;
const DECAY_FRACTION: f64 = 1e-8;
const BLOWUP_FACTOR: f64 = 10.0;

struct Trajectory {
    class: ShootClass,
    radius: f64,
    samples: Vec<(f64, f64, f64)>,
}

fn rhs(model: &NonlinearityModel, omega: f64, r: f64, v: f64, u: f64) -> (f64, f64) {
    let g = model.g(v * v - u * u);
    (-(omega + g) * u, (omega - g) * v - 2.0 * u / r)
}

/// Integrates from the Taylor start and records every `stride`-th state when
/// `stride > 0`.
fn shoot(
    model: &NonlinearityModel,
    omega: f64,
    a: f64,
    r_max: f64,
    step: f64,
    stride: usize,
) -> Trajectory {
    let mut r = START_RADIUS;
    let mut v = a;
    let mut u = (omega - model.g(a * a)) * a / 3.0 * r;
    let mut samples = Vec::new();
    if stride > 0 {
        samples.push((r, v, u));
    }
    let floor = DECAY_FRACTION * a;
    let h = step;
    let mut k = 0usize;
    while r < r_max {
        let (k1v, k1u) = rhs(model, omega, r, v, u);
        let (k2v, k2u) = rhs(model, omega, r + 0.5 * h, v + 0.5 * h * k1v, u + 0.5 * h * k1u);
        let (k3v, k3u) = rhs(model, omega, r + 0.5 * h, v + 0.5 * h * k2v, u + 0.5 * h * k2u);
        let (k4v, k4u) = rhs(model, omega, r + h, v + h * k3v, u + h * k3u);
        let vn = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        let un = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        k += 1;
        r = START_RADIUS + k as f64 * h;
        if stride > 0 && k % stride == 0 {
            samples.push((r, vn, un));
        }
        let class = if vn < 0.0 {
            Some(ShootClass::CrossedZero)
        } else if vn > v || vn > BLOWUP_FACTOR * a {
            Some(ShootClass::BlewUp)
        } else if vn.abs() < floor && un.abs() < floor {
            Some(ShootClass::Decayed)
        } else {
            None
        };
        v = vn;
        u = un;
        if let Some(class) = class {
            return Trajectory { class, radius: r, samples };
        }
    }
    Trajectory { class: ShootClass::Unresolved, radius: r, samples }
}

/// Integrates the stationary system with classical RK4 from `r = 10⁻⁶` and
/// classifies the trajectory.
pub fn integrate_shoot(
    model: &NonlinearityModel,
    omega: f64,
    amplitude: f64,
    r_max: f64,
    step: f64,
) -> Result<ShootOutcome> {
    if !(step > 0.0) {
        return Err(invalid(format!("step must be positive, got {step}")));
    }
    if !(r_max > 0.0) {
        return Err(invalid(format!("r_max must be positive, got {r_max}")));
    }
    if !(amplitude > 0.0) {
        return Err(invalid(format!("amplitude must be positive, got {amplitude}")));
    }
    model.check_omega(omega)?;
    let t = shoot(model, omega, amplitude, r_max, step, 0);
    Ok(ShootOutcome { class: t.class, radius: t.radius })
}

/// Numerical parameters of the profile solver.
#[derive(Clone, Copy, Debug)]
pub struct ShootingSettings {
    /// RK4 step in units of `1/κ`.
    pub step_kappa: f64,
    /// Outer radius of the stored profile in units of `1/κ`.
    pub extent_kappa: f64,
    /// Every `stride`-th RK4 state is stored.
    pub stride: usize,
    /// The trajectory is replaced by the far-field solution once
    /// `max(|v|,|u|)` falls below this fraction of the amplitude.
    pub match_fraction: f64,
}

impl Default for ShootingSettings {
    fn default() -> Self {
        Self { step_kappa: 1e-3, extent_kappa: 150.0, stride: 4, match_fraction: 1e-4 }
    }
}

/// Stationary profile on a uniform grid `r_i = r₀ + i·Δ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolitonProfile {
    pub model: NonlinearityModel,
    pub omega: f64,
    pub grid: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub amplitude: f64,
    pub decay_rate: f64,
    /// Radius beyond which the stored values are the far-field solution.
    pub match_radius: f64,
    /// `C` in `v ≈ C e^{−κr}/r`.
    pub far_constant: f64,
}

/// Scans upward from `a = 0.01` in steps of ×1.1 until the shooting class
/// changes, returning the bracketing pair.
pub fn scan_bracket(model: &NonlinearityModel, omega: f64) -> Result<(f64, f64)> {
    model.check_omega(omega)?;
    let kappa = model.decay_rate(omega);
    let s = ShootingSettings::default();
    let (r_max, step) = (s.extent_kappa / kappa, s.step_kappa / kappa);
    let mut a = 0.01;
    let first = integrate_shoot(model, omega, a, r_max, step)?.class;
    for _ in 0..200 {
        let next = a * 1.1;
        let class = integrate_shoot(model, omega, next, r_max, step)?.class;
        if class != first {
            return Ok((a, next));
        }
        a = next;
    }
    Err(Error::BracketFailure { lo: 0.01, hi: a })
}

/// Bisects the shooting amplitude inside `bracket` and returns the matched
/// profile.
pub fn solve_profile(
    model: &NonlinearityModel,
    omega: f64,
    bracket: (f64, f64),
    tol: f64,
) -> Result<SolitonProfile> {
    solve_profile_with(model, omega, bracket, tol, &ShootingSettings::default())
}

/// Ground state found by [`scan_bracket`] followed by bisection to `tol`.
pub fn ground_state(model: &NonlinearityModel, omega: f64, tol: f64) -> Result<SolitonProfile> {
    let bracket = scan_bracket(model, omega)?;
    solve_profile(model, omega, bracket, tol)
}

pub fn solve_profile_with(
    model: &NonlinearityModel,
    omega: f64,
    bracket: (f64, f64),
    tol: f64,
    settings: &ShootingSettings,
) -> Result<SolitonProfile> {
    model.check_omega(omega)?;
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(invalid(format!("bracket ({lo}, {hi}) is not an increasing pair of positive amplitudes")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    let kappa = model.decay_rate(omega);
    let step = settings.step_kappa / kappa;
    let r_max = settings.extent_kappa / kappa;
    let class_lo = shoot(model, omega, lo, r_max, step, 0).class;
    let class_hi = shoot(model, omega, hi, r_max, step, 0).class;
    if class_lo == class_hi {
        return Err(Error::BracketFailure { lo, hi });
    }
    if class_lo != ShootClass::Decayed && class_hi != ShootClass::Decayed {
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match shoot(model, omega, mid, r_max, step, 0).class {
                ShootClass::Decayed => {
                    lo = mid;
                    hi = mid;
                }
                c if c == class_lo => lo = mid,
                _ => hi = mid,
            }
        }
    } else if class_lo == ShootClass::Decayed {
        hi = lo;
    } else {
        lo = hi;
    }
    let amplitude = 0.5 * (lo + hi);
    build_profile(model, omega, amplitude, settings)
}

fn build_profile(
    model: &NonlinearityModel,
    omega: f64,
    amplitude: f64,
    settings: &ShootingSettings,
) -> Result<SolitonProfile> {
    let kappa = model.decay_rate(omega);
    let step = settings.step_kappa / kappa;
    let extent = settings.extent_kappa / kappa;
    let traj = shoot(model, omega, amplitude, extent, step, settings.stride);
    let threshold = settings.match_fraction * amplitude;
    let Some(m) = traj
        .samples
        .iter()
        .position(|&(_, v, u)| v.abs().max(u.abs()) <= threshold)
    else {
        return Err(Error::BracketFailure { lo: amplitude, hi: amplitude });
    };
    let (r_m, v_m, _) = traj.samples[m];
    let far_constant = v_m * r_m * (kappa * r_m).exp();
    let spacing = step * settings.stride as f64;
    let count = ((extent - START_RADIUS) / spacing).ceil() as usize + 1;
    let mut grid = Vec::with_capacity(count);
    let mut v = Vec::with_capacity(count);
    let mut u = Vec::with_capacity(count);
    for i in 0..count {
        let r = START_RADIUS + i as f64 * spacing;
        grid.push(r);
        if i <= m {
            let (_, vi, ui) = traj.samples[i];
            v.push(vi);
            u.push(ui);
        } else {
            let (vf, uf) = far_field(far_constant, kappa, omega, model.mass, r);
            v.push(vf);
            u.push(uf);
        }
    }
    Ok(SolitonProfile {
        model: *model,
        omega,
        grid,
        v,
        u,
        amplitude,
        decay_rate: kappa,
        match_radius: r_m,
        far_constant,
    })
}

/// Exact decaying solution of the stationary system with `g ≡ m`.
fn far_field(c: f64, kappa: f64, omega: f64, mass: f64, r: f64) -> (f64, f64) {
    let e = (-kappa * r).exp();
    (c * e / r, c / (omega + mass) * e * (kappa * r + 1.0) / (r * r))
}

impl SolitonProfile {
    /// Profile values at an arbitrary radius: cubic Hermite interpolation
    /// between stored nodes with slopes taken from the stationary system, and
    /// the far-field solution past the last node.
    pub fn value_at(&self, r: f64) -> (f64, f64) {
        let n = self.grid.len();
        let r0 = self.grid[0];
        if r <= r0 {
            let u0 = (self.omega - self.model.g(self.amplitude * self.amplitude)) * self.amplitude / 3.0;
            return (self.amplitude, u0 * r);
        }
        if r >= self.grid[n - 1] {
            return far_field(self.far_constant, self.decay_rate, self.omega, self.model.mass, r);
        }
        let spacing = self.grid[1] - self.grid[0];
        let i = (((r - r0) / spacing).floor() as usize).min(n - 2);
        let (ra, rb) = (self.grid[i], self.grid[i + 1]);
        let (va, ua) = (self.v[i], self.u[i]);
        let (vb, ub) = (self.v[i + 1], self.u[i + 1]);
        let (dva, dua) = rhs(&self.model, self.omega, ra, va, ua);
        let (dvb, dub) = rhs(&self.model, self.omega, rb, vb, ub);
        let d = rb - ra;
        let t = (r - ra) / d;
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        (
            h00 * va + h10 * d * dva + h01 * vb + h11 * d * dvb,
            h00 * ua + h10 * d * dua + h01 * ub + h11 * d * dub,
        )
    }

    /// `(v', u')` from the stationary system.
    pub fn derivative_at(&self, r: f64) -> (f64, f64) {
        let (v, u) = self.value_at(r);
        rhs(&self.model, self.omega, r, v, u)
    }

    /// Least-squares slope of `ln(r·sqrt(v² + u²))` over the integrated tail:
    /// from where the profile has dropped below `10⁻²` of its amplitude out to
    /// the matching radius. The factor `r` removes the algebraic prefactor of
    /// the `e^{−κr}/r` decay.
    pub fn outer_log_slope(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .grid
            .iter()
            .zip(self.v.iter().zip(&self.u))
            .filter(|(&r, _)| r < self.match_radius)
            .map(|(&r, (&v, &u))| (r, (v * v + u * u).sqrt()))
            .skip_while(|&(_, norm)| norm > 1e-2 * self.amplitude)
            .map(|(r, norm)| (r, (r * norm).ln()))
            .collect();
        let len = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        sxy / sxx
    }

    /// Relative mismatch between the outer log-slope and `−κ`.
    pub fn decay_mismatch(&self) -> f64 {
        (self.outer_log_slope() + self.decay_rate).abs() / self.decay_rate
    }

    /// Writes `r,v,u` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,v,u")?;
        for i in 0..self.grid.len() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.grid[i], self.v[i], self.u[i])?;
        }
        Ok(())
    }
}

/// Largest absolute residual of the two stationary equations over interior
/// nodes, with derivatives from 4th-order central differences.
///
/// The grid must be uniform.
pub fn profile_residual(profile: &SolitonProfile, model: &NonlinearityModel) -> f64 {
    let n = profile.grid.len();
    if n < 5 {
        return 0.0;
    }
    let (r, v, u, w) = (&profile.grid, &profile.v, &profile.u, profile.omega);
    let mut worst = 0.0f64;
    for i in 2..n - 2 {
        let d = r[i + 1] - r[i];
        let dv = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * d);
        let du = (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / (12.0 * d);
        let g = model.g(v[i] * v[i] - u[i] * u[i]);
        let e1 = w * v[i] - du - 2.0 * u[i] / r[i] - g * v[i];
        let e2 = w * u[i] + dv + g * u[i];
        worst = worst.max(e1.abs()).max(e2.abs());
    }
    worst
}
