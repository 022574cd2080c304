//! Explicit spinor fields on a radial × angular product grid, the
//! Bogoliubov transformation, and the decomposition of fields into the
//! radial coefficients of the invariant subspaces.
//!
//! In degree `ℓ` the upper spinor is expanded as
//!
//! ```text
//! Σ_m (A_{ℓ,m} + B_{ℓ,m} r⁻¹ σ_rΣ_Ω) h_{ℓ,m} e₁  +  R_ℓ h_{ℓ,−ℓ} e₂
//! ```
//!
//! and the lower spinor as `iσ_r` times the same expansion with `(P, Q, S)`.
//! Because `σ_rΣ_Ω h_{ℓ,ℓ} e₁ = −ℓ h_{ℓ,ℓ} e₁`, the element `B_{ℓ,ℓ}` is
//! redundant; it is fixed to zero (the `ℓ = 0` case is the familiar
//! vanishing of `σ_rΣ_Ω h_{0,0}`).

use std::f64::consts::PI;

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::harmonics::{
    basis_position, eval_harmonic, mat_vec, sigma_r, srso_apply_point, srso_matrix_elements, AngularGrid, HarmonicIndex,
    Mat2, Spinor2,
};
use crate::linops::RadialGrid;
use crate::profiles::SolitonProfile;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub type Spinor4 = [C64; 4];

/// Four-spinor samples on `radii × angular`, radius-major.
#[derive(Clone, Debug)]
pub struct SpinorField {
    pub radii: Vec<f64>,
    pub angular: AngularGrid,
    pub values: Vec<Spinor4>,
}

impl SpinorField {
    pub fn zeros(radii: &[f64], angular: &AngularGrid) -> Self {
        Self { radii: radii.to_vec(), angular: angular.clone(), values: vec![[ZERO; 4]; radii.len() * angular.len()] }
    }

    /// Samples `f(r, θ, φ)`.
    pub fn from_fn(radii: &[f64], angular: &AngularGrid, f: impl Fn(f64, f64, f64) -> Spinor4) -> Self {
        let mut values = Vec::with_capacity(radii.len() * angular.len());
        for &r in radii {
            for (t, p, _) in angular.nodes() {
                values.push(f(r, t, p));
            }
        }
        Self { radii: radii.to_vec(), angular: angular.clone(), values }
    }

    fn at(&self, ir: usize) -> &[Spinor4] {
        let n = self.angular.len();
        &self.values[ir * n..(ir + 1) * n]
    }

    /// Largest angular `L²` norm of `self − other` over the radii.
    pub fn distance(&self, other: &SpinorField) -> f64 {
        let n = self.angular.len();
        let weights = self.angular.weights();
        (0..self.radii.len())
            .map(|ir| {
                let mut acc = 0.0;
                for ia in 0..n {
                    let (a, b) = (self.values[ir * n + ia], other.values[ir * n + ia]);
                    acc += weights[ia] * (0..4).map(|c| (a[c] - b[c]).norm_sqr()).sum::<f64>();
                }
                acc.sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest pointwise component difference.
    pub fn max_abs_diff(&self, other: &SpinorField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| (0..4).map(move |c| (a[c] - b[c]).norm()))
            .fold(0.0, f64::max)
    }
}

fn upper(s: &Spinor4) -> Spinor2 {
    [s[0], s[1]]
}

fn lower(s: &Spinor4) -> Spinor2 {
    [s[2], s[3]]
}

fn join(a: Spinor2, b: Spinor2) -> Spinor4 {
    [a[0], a[1], b[0], b[1]]
}

fn scale2(c: C64, x: Spinor2) -> Spinor2 {
    [c * x[0], c * x[1]]
}

fn add2(x: Spinor2, y: Spinor2) -> Spinor2 {
    [x[0] + y[0], x[1] + y[1]]
}

/// `σ₂ K x`.
pub fn sigma2_conj(x: Spinor2) -> Spinor2 {
    // σ₂ = [[0, −i], [i, 0]]
    [-I * x[1].conj(), I * x[0].conj()]
}

fn spinor_norm_sqr(x: &Spinor2) -> f64 {
    x[0].norm_sqr() + x[1].norm_sqr()
}

/// `(v ξ; i u σ_r ξ)` at `t = 0`.
pub fn build_one_frequency_wave(
    profile: &SolitonProfile,
    xi: Spinor2,
    radii: &[f64],
    angular: &AngularGrid,
) -> Result<SpinorField> {
    if spinor_norm_sqr(&xi) == 0.0 {
        return Err(invalid("xi must be nonzero"));
    }
    Ok(SpinorField::from_fn(radii, angular, |r, t, p| {
        let (v, u) = profile.value_at(r);
        join(scale2(v.into(), xi), scale2(I * u, mat_vec(&sigma_r(t, p), &xi)))
    }))
}

/// Pointwise `ψ ↦ (a + b γ² K) ψ` with `γ² = [[0, σ₂], [−σ₂, 0]]`.
pub fn bogoliubov_transform(a: C64, b: C64, field: &SpinorField) -> Result<SpinorField> {
    let defect = a.norm_sqr() - b.norm_sqr() - 1.0;
    if defect.abs() > 1e-12 {
        return Err(invalid(format!("|a|² − |b|² = {} differs from 1", 1.0 + defect)));
    }
    let values = field
        .values
        .iter()
        .map(|psi| {
            let up = upper(psi);
            let lo = lower(psi);
            let new_up = add2(scale2(a, up), scale2(b, sigma2_conj(lo)));
            let new_lo = add2(scale2(a, lo), scale2(-b, sigma2_conj(up)));
            join(new_up, new_lo)
        })
        .collect();
    Ok(SpinorField { radii: field.radii.clone(), angular: field.angular.clone(), values })
}

/// A bi-frequency solitary wave `e^{−iωt}(vξ; iuσ_rξ) + e^{iωt}(−iuσ_rη; vη)`.
#[derive(Clone, Debug)]
pub struct BiFrequencyWave {
    pub profile: SolitonProfile,
    pub xi: Spinor2,
    pub eta: Spinor2,
}

impl BiFrequencyWave {
    pub fn new(profile: SolitonProfile, xi: Spinor2, eta: Spinor2) -> Result<Self> {
        let defect = spinor_norm_sqr(&xi) - spinor_norm_sqr(&eta) - 1.0;
        if defect.abs() > 1e-12 {
            return Err(invalid(format!("|ξ|² − |η|² = {} differs from 1", 1.0 + defect)));
        }
        Ok(Self { profile, xi, eta })
    }
}

pub fn build_bi_frequency_wave(wave: &BiFrequencyWave, t: f64, radii: &[f64], angular: &AngularGrid) -> SpinorField {
    let w = wave.profile.omega;
    let minus = C64::from_polar(1.0, -w * t);
    let plus = C64::from_polar(1.0, w * t);
    SpinorField::from_fn(radii, angular, |r, th, ph| {
        let (v, u) = wave.profile.value_at(r);
        let sr = sigma_r(th, ph);
        let first = join(scale2(minus * v, wave.xi), scale2(minus * I * u, mat_vec(&sr, &wave.xi)));
        let second = join(scale2(-plus * I * u, mat_vec(&sr, &wave.eta)), scale2(plus * v, wave.eta));
        [first[0] + second[0], first[1] + second[1], first[2] + second[2], first[3] + second[3]]
    })
}

/// Pointwise `ψ*βψ`.
pub fn scalar_density(field: &SpinorField) -> Vec<f64> {
    field
        .values
        .iter()
        .map(|psi| {
            let z: C64 = psi[0].conj() * psi[0] + psi[1].conj() * psi[1] - psi[2].conj() * psi[2] - psi[3].conj() * psi[3];
            debug_assert!(z.im.abs() <= 1e-12 * (1.0 + z.re.abs()));
            z.re
        })
        .collect()
}

/// Pointwise `Re ⟨φ, βψ⟩` summed over the angular grid with weights; `φ`
/// and `ψ` share a grid.
pub fn beta_inner_by_radius(phi: &SpinorField, psi: &SpinorField) -> Vec<C64> {
    let n = phi.angular.len();
    let w = phi.angular.weights();
    (0..phi.radii.len())
        .map(|ir| {
            (0..n)
                .map(|ia| {
                    let (a, b) = (phi.values[ir * n + ia], psi.values[ir * n + ia]);
                    (a[0].conj() * b[0] + a[1].conj() * b[1] - a[2].conj() * b[2] - a[3].conj() * b[3]) * w[ia]
                })
                .sum()
        })
        .collect()
}

/// Radial coefficients of one `(ℓ, m)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficients {
    pub ell: usize,
    pub m: i64,
    #[serde(rename = "A", with = "complex_vec")]
    pub a: Vec<C64>,
    #[serde(rename = "B", with = "complex_vec")]
    pub b: Vec<C64>,
    #[serde(rename = "P", with = "complex_vec")]
    pub p: Vec<C64>,
    #[serde(rename = "Q", with = "complex_vec")]
    pub q: Vec<C64>,
}

/// Radial coefficients along the orthogonal polarization of degree `ℓ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RsCoefficients {
    pub ell: usize,
    #[serde(rename = "R", with = "complex_vec")]
    pub r: Vec<C64>,
    #[serde(rename = "S", with = "complex_vec")]
    pub s: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub radii: Vec<f64>,
    pub ell_max: usize,
    pub modes: Vec<ModeCoefficients>,
    pub rs: Vec<RsCoefficients>,
    /// Angular norm of the part of the field outside degrees `≤ ℓ_max`.
    #[serde(default)]
    pub leakage: f64,
}

mod complex_vec {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl CoefficientSet {
    /// All-zero coefficients for every `(ℓ, m)` with `ℓ ≤ ℓ_max`.
    pub fn zeros(radii: &[f64], ell_max: usize) -> Self {
        let nr = radii.len();
        let mut modes = Vec::new();
        let mut rs = Vec::new();
        for ell in 0..=ell_max {
            for m in -(ell as i64)..=ell as i64 {
                modes.push(ModeCoefficients {
                    ell,
                    m,
                    a: vec![ZERO; nr],
                    b: vec![ZERO; nr],
                    p: vec![ZERO; nr],
                    q: vec![ZERO; nr],
                });
            }
            rs.push(RsCoefficients { ell, r: vec![ZERO; nr], s: vec![ZERO; nr] });
        }
        Self { radii: radii.to_vec(), ell_max, modes, rs, leakage: 0.0 }
    }

    pub fn mode(&self, ell: usize, m: i64) -> Option<&ModeCoefficients> {
        self.modes.iter().find(|c| c.ell == ell && c.m == m)
    }

    pub fn mode_mut(&mut self, ell: usize, m: i64) -> Option<&mut ModeCoefficients> {
        self.modes.iter_mut().find(|c| c.ell == ell && c.m == m)
    }

    pub fn rs_mut(&mut self, ell: usize) -> Option<&mut RsCoefficients> {
        self.rs.iter_mut().find(|c| c.ell == ell)
    }

    /// Largest coefficient magnitude outside the listed `(ℓ, m)` pairs (the
    /// R/S coefficients count as outside unless `keep_rs` is set).
    pub fn max_outside(&self, support: &[(usize, i64)], keep_rs: bool) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.modes {
            if support.contains(&(c.ell, c.m)) {
                continue;
            }
            for v in [&c.a, &c.b, &c.p, &c.q] {
                worst = v.iter().map(|z| z.norm()).fold(worst, f64::max);
            }
        }
        if !keep_rs {
            for c in &self.rs {
                worst = c.r.iter().chain(&c.s).map(|z| z.norm()).fold(worst, f64::max);
            }
        }
        worst
    }

    /// Largest difference between matching coefficients of two sets.
    pub fn max_abs_diff(&self, other: &CoefficientSet) -> f64 {
        let mut worst = 0.0f64;
        for (x, y) in self.modes.iter().zip(&other.modes) {
            for (u, v) in [(&x.a, &y.a), (&x.b, &y.b), (&x.p, &y.p), (&x.q, &y.q)] {
                worst = u.iter().zip(v).map(|(a, b)| (a - b).norm()).fold(worst, f64::max);
            }
        }
        for (x, y) in self.rs.iter().zip(&other.rs) {
            for (u, v) in [(&x.r, &y.r), (&x.s, &y.s)] {
                worst = u.iter().zip(v).map(|(a, b)| (a - b).norm()).fold(worst, f64::max);
            }
        }
        worst
    }
}

/// Projection data of one degree: the basis written in the orthonormal
/// spinor harmonics `h_{ℓ,k} e_j`, and the dual basis `G⁻¹E*`.
struct DegreeBasis {
    ell: usize,
    /// `dual[i][c]`: coefficient of spinor-harmonic coordinate `c` in the
    /// `i`-th dual vector.
    dual: Vec<Vec<C64>>,
}

/// Basis ordering per degree: `A_{−ℓ..ℓ}`, then `B_{−ℓ..ℓ−1}`, then `R`.
fn degree_basis(ell: usize) -> Result<DegreeBasis> {
    let dim = 2 * (2 * ell + 1);
    let srso = srso_matrix_elements(ell);
    let li = ell as i64;
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for m in -li..=li {
        let mut e = vec![ZERO; dim];
        e[basis_position(ell, m, 0)] = C64::new(1.0, 0.0);
        columns.push(e);
    }
    for m in -li..li {
        columns.push((0..dim).map(|c| srso[c][basis_position(ell, m, 0)]).collect());
    }
    let mut e = vec![ZERO; dim];
    e[basis_position(ell, -li, 1)] = C64::new(1.0, 0.0);
    columns.push(e);

    let gram = Mat::<C64>::from_fn(dim, dim, |i, j| (0..dim).map(|c| columns[i][c].conj() * columns[j][c]).sum());
    let eig = gram
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::DegenerateBasis { ell, condition: f64::INFINITY })?;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > 1e8 {
        return Err(Error::DegenerateBasis { ell, condition });
    }
    let inv = gram.partial_piv_lu().inverse();
    let dual = (0..dim)
        .map(|i| (0..dim).map(|c| (0..dim).map(|k| inv[(i, k)] * columns[k][c].conj()).sum()).collect())
        .collect();
    Ok(DegreeBasis { ell, dual })
}

/// Spinor-harmonic coordinates `∫ conj(h_{ℓ,k}) f_j dΩ` of a two-spinor
/// sampled on the angular grid.
fn coordinates(samples: &[Spinor2], harmonics: &[Vec<C64>], weights: &[f64], ell: usize) -> Vec<C64> {
    let li = ell as i64;
    let mut out = vec![ZERO; 2 * (2 * ell + 1)];
    for m in -li..=li {
        let h = &harmonics[(m + li) as usize];
        for j in 0..2 {
            out[basis_position(ell, m, j)] =
                samples.iter().zip(h).zip(weights).map(|((f, hh), w)| hh.conj() * f[j] * *w).sum();
        }
    }
    out
}

/// Projects a field onto the invariant-subspace basis of degrees `≤ ℓ_max`.
pub fn decompose_field(field: &SpinorField, ell_max: usize) -> Result<CoefficientSet> {
    let bases: Vec<DegreeBasis> = (0..=ell_max).map(degree_basis).collect::<Result<_>>()?;
    let grid = &field.angular;
    let weights = grid.weights();
    let harmonics: Vec<Vec<Vec<C64>>> = (0..=ell_max)
        .map(|ell| (-(ell as i64)..=ell as i64).map(|m| grid.sample(HarmonicIndex { ell, m })).collect())
        .collect();
    let sr: Vec<Mat2> = grid.nodes().map(|(t, p, _)| sigma_r(t, p)).collect();
    let mut set = CoefficientSet::zeros(&field.radii, ell_max);
    for (ir, &r) in field.radii.iter().enumerate() {
        let samples = field.at(ir);
        let up: Vec<Spinor2> = samples.iter().map(upper).collect();
        let lo: Vec<Spinor2> = samples.iter().zip(&sr).map(|(s, m)| scale2(-I, mat_vec(m, &lower(s)))).collect();
        for basis in &bases {
            let ell = basis.ell;
            let li = ell as i64;
            for (part, values) in [(0usize, &up), (1, &lo)] {
                let c = coordinates(values, &harmonics[ell], &weights, ell);
                let x: Vec<C64> =
                    basis.dual.iter().map(|d| d.iter().zip(&c).map(|(a, b)| a * b).sum()).collect();
                for m in -li..=li {
                    let k = (m + li) as usize;
                    let coef = set.mode_mut(ell, m).expect("mode exists");
                    let (first, second) = if part == 0 { (&mut coef.a, &mut coef.b) } else { (&mut coef.p, &mut coef.q) };
                    first[ir] = x[k];
                    if m < li {
                        second[ir] = x[2 * ell + 1 + k] * r;
                    }
                }
                let rs = set.rs_mut(ell).expect("rs exists");
                let slot = if part == 0 { &mut rs.r } else { &mut rs.s };
                slot[ir] = x[4 * ell + 1];
            }
        }
    }
    let rebuilt = reconstruct_on(&set, grid);
    set.leakage = field.distance(&rebuilt);
    Ok(set)
}

/// Upper-spinor pattern `A h e₁ + B r⁻¹ σ_rΣ_Ω h e₁` plus `R h_{ℓ,−ℓ} e₂`.
fn pattern(coeffs: &CoefficientSet, ir: usize, r: f64, t: f64, p: f64, lower_part: bool) -> Spinor2 {
    let mut acc = [ZERO; 2];
    for c in &coeffs.modes {
        let idx = HarmonicIndex { ell: c.ell, m: c.m };
        let (a, b) = if lower_part { (c.p[ir], c.q[ir]) } else { (c.a[ir], c.b[ir]) };
        if a != ZERO {
            acc[0] += a * eval_harmonic(idx, t, p);
        }
        if b != ZERO {
            acc = add2(acc, scale2(b / r, srso_apply_point(idx, 0, t, p)));
        }
    }
    for c in &coeffs.rs {
        let v = if lower_part { c.s[ir] } else { c.r[ir] };
        if v != ZERO {
            acc[1] += v * eval_harmonic(HarmonicIndex { ell: c.ell, m: -(c.ell as i64) }, t, p);
        }
    }
    acc
}

fn reconstruct_on(coeffs: &CoefficientSet, angular: &AngularGrid) -> SpinorField {
    let mut values = Vec::with_capacity(coeffs.radii.len() * angular.len());
    for (ir, &r) in coeffs.radii.iter().enumerate() {
        for (t, p, _) in angular.nodes() {
            let up = pattern(coeffs, ir, r, t, p, false);
            let lo = scale2(I, mat_vec(&sigma_r(t, p), &pattern(coeffs, ir, r, t, p, true)));
            values.push(join(up, lo));
        }
    }
    SpinorField { radii: coeffs.radii.clone(), angular: angular.clone(), values }
}

/// Rebuilds the field of a coefficient set on the angular grid matching its
/// degree.
pub fn reconstruct_field(coeffs: &CoefficientSet) -> SpinorField {
    reconstruct_on(coeffs, &AngularGrid::for_degree(coeffs.ell_max))
}

/// Rebuilds the field on a caller-chosen angular grid.
pub fn reconstruct_field_on(coeffs: &CoefficientSet, angular: &AngularGrid) -> SpinorField {
    reconstruct_on(coeffs, angular)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KnownMode {
    /// `iφ`, the phase rotation.
    Gauge,
    /// `∂₃φ`, translation along the third axis.
    Translation,
    /// `iγ²Kφ`, eigenvalue `−2ω`.
    Psi1,
    /// `(−iσ_r u e₁; v e₁)`, eigenvalue `−2ω`.
    Psi2,
}

impl KnownMode {
    /// The `(ℓ, m)` sector the mode lives in.
    pub fn sector(&self) -> (usize, i64) {
        match self {
            KnownMode::Gauge => (0, 0),
            KnownMode::Translation | KnownMode::Psi2 => (1, 0),
            KnownMode::Psi1 => (1, -1),
        }
    }

    /// Eigenvalue of the real block matrix `M` on the mode's block vector.
    pub fn matrix_eigenvalue(&self, omega: f64) -> f64 {
        match self {
            KnownMode::Gauge | KnownMode::Translation => 0.0,
            KnownMode::Psi1 | KnownMode::Psi2 => -2.0 * omega,
        }
    }

    /// Whether the mode is a real perturbation (block vector `(Ψ, conj Ψ)`)
    /// rather than a complex eigenvector with vanishing conjugate part.
    fn is_real_perturbation(&self) -> bool {
        matches!(self, KnownMode::Gauge | KnownMode::Translation)
    }
}

/// Closed-form field of a known mode.
pub fn known_mode_field(profile: &SolitonProfile, kind: KnownMode, radii: &[f64], angular: &AngularGrid) -> SpinorField {
    let e1: Spinor2 = [C64::new(1.0, 0.0), ZERO];
    SpinorField::from_fn(radii, angular, |r, t, p| {
        let (v, u) = profile.value_at(r);
        let sr = sigma_r(t, p);
        match kind {
            KnownMode::Gauge => join(scale2(I * v, e1), scale2(C64::from(-u), mat_vec(&sr, &e1))),
            KnownMode::Translation => {
                let (dv, du) = profile.derivative_at(r);
                let c = t.cos();
                let s3: Mat2 = [[C64::new(1.0, 0.0), ZERO], [ZERO, C64::new(-1.0, 0.0)]];
                let sr_e1 = mat_vec(&sr, &e1);
                let dsr_e1 = add2(scale2((1.0 / r).into(), mat_vec(&s3, &e1)), scale2((-c / r).into(), sr_e1));
                let lo = add2(scale2(I * du * c, sr_e1), scale2(I * u, dsr_e1));
                join(scale2((dv * c).into(), e1), lo)
            }
            KnownMode::Psi1 => {
                let phi_up = scale2(v.into(), e1);
                let phi_lo = scale2(I * u, mat_vec(&sr, &e1));
                join(scale2(I, sigma2_conj(phi_lo)), scale2(-I, sigma2_conj(phi_up)))
            }
            KnownMode::Psi2 => join(scale2(-I * u, mat_vec(&sr, &e1)), scale2(v.into(), e1)),
        }
    })
}

/// Decomposition of a known mode's closed-form field.
pub fn known_mode(profile: &SolitonProfile, kind: KnownMode, radii: &[f64]) -> Result<CoefficientSet> {
    let angular = AngularGrid::for_degree(2);
    decompose_field(&known_mode_field(profile, kind, radii, &angular), 1)
}

/// Half-weighted block vector of a known mode on a radial grid, in the
/// unknown ordering of the assembled generator of its sector.
pub fn known_mode_vector(profile: &SolitonProfile, kind: KnownMode, grid: &RadialGrid) -> Result<Vec<C64>> {
    let (ell, m) = kind.sector();
    let r = grid.primal();
    let s = grid.dual();
    let on_primal = known_mode(profile, kind, &r)?;
    let on_dual = known_mode(profile, kind, &s)?;
    let n = grid.n;
    let this = (on_primal.mode(ell, m).cloned(), on_dual.mode(ell, m).cloned());
    let (Some(cp), Some(cd)) = this else {
        return Err(invalid("known mode sector missing from decomposition"));
    };
    let mirror = (on_primal.mode(ell, -m).cloned(), on_dual.mode(ell, -m).cloned());
    let (Some(mp), Some(md)) = mirror else {
        return Err(invalid("known mode sector missing from decomposition"));
    };
    let weigh = |v: &[C64], w: &[f64]| -> Vec<C64> { v.iter().zip(w).map(|(a, b)| a * b).collect() };
    let mut first = Vec::with_capacity(4 * n);
    first.extend(weigh(&cp.a, &r));
    first.extend(weigh(&cd.p, &s));
    let mut second = Vec::with_capacity(4 * n);
    if kind.is_real_perturbation() {
        second.extend(weigh(&mp.a, &r).iter().map(|z| z.conj()));
        second.extend(weigh(&md.p, &s).iter().map(|z| z.conj()));
    } else {
        second.extend(std::iter::repeat_n(ZERO, 2 * n));
    }
    if ell == 0 {
        first.extend(second);
        return Ok(first);
    }
    first.extend(weigh(&cp.b, &r));
    first.extend(weigh(&cd.q, &s));
    if kind.is_real_perturbation() {
        second.extend(weigh(&mp.b, &r).iter().map(|z| z.conj()));
        second.extend(weigh(&md.q, &s).iter().map(|z| z.conj()));
    } else {
        second.extend(std::iter::repeat_n(ZERO, 2 * n));
    }
    first.extend(second);
    Ok(first)
}

/// `√(4π)`, the factor relating radial coefficients of `ℓ = 0` to profile
/// values.
pub fn sqrt_four_pi() -> f64 {
    (4.0 * PI).sqrt()
}
