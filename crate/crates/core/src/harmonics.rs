//! Spherical harmonics without the Condon–Shortley phase, the angular
//! operator `σ_r Σ_Ω` on spinor-valued harmonics, and numeric checks of the
//! spin-orbit identities.
//!
//! Conventions: `h_{ℓ,m}(θ,φ) = N_{ℓ,m} P_{ℓ,m}(cos θ) e^{imφ}` for `m ≥ 0`
//! with `P_{ℓ,m}(w) = (1−w²)^{m/2} (d/dw)^m P_ℓ(w)` and
//! `N_{ℓ,m} = sqrt((2ℓ+1)/4π · (ℓ−m)!/(ℓ+m)!)`, and `h_{ℓ,−m} = conj(h_{ℓ,m})`.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// A 2×2 complex matrix in row-major order.
pub type Mat2 = [[C64; 2]; 2];
/// A 2-spinor.
pub type Spinor2 = [C64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HarmonicIndex {
    pub ell: usize,
    pub m: i64,
}

impl HarmonicIndex {
    pub fn new(ell: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > ell {
            return Err(invalid(format!("order {m} exceeds degree {ell}")));
        }
        Ok(Self { ell, m })
    }

    /// Laplace–Beltrami eigenvalue `ℓ(ℓ+1)`.
    pub fn kappa(&self) -> f64 {
        (self.ell * (self.ell + 1)) as f64
    }
}

/// `P_{ℓ,m}(w)` by upward recurrence in `ℓ`; zero when `m > ℓ`.
pub fn assoc_legendre(ell: usize, m: usize, w: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&w) {
        return Err(invalid(format!("argument {w} outside [-1, 1]")));
    }
    Ok(legendre_unchecked(ell, m, w))
}

fn legendre_unchecked(ell: usize, m: usize, w: f64) -> f64 {
    if m > ell {
        return 0.0;
    }
    let s = (1.0 - w * w).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 0..m {
        pmm *= (2 * i + 1) as f64 * s;
    }
    if ell == m {
        return pmm;
    }
    let mut prev = pmm;
    let mut cur = w * (2 * m + 1) as f64 * pmm;
    for l in (m + 2)..=ell {
        let next = (w * (2 * l - 1) as f64 * cur - (l + m - 1) as f64 * prev) / (l - m) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// `N_{ℓ,m}` for `0 ≤ m ≤ ℓ`.
pub fn normalization(ell: usize, m: usize) -> f64 {
    let mut ratio = 1.0;
    for k in (ell - m + 1)..=(ell + m) {
        ratio /= k as f64;
    }
    ((2 * ell + 1) as f64 / (4.0 * PI) * ratio).sqrt()
}

/// `h_{ℓ,m}(θ, φ)`.
pub fn eval_harmonic(idx: HarmonicIndex, theta: f64, phi: f64) -> C64 {
    let k = idx.m.unsigned_abs() as usize;
    let value = normalization(idx.ell, k) * legendre_unchecked(idx.ell, k, theta.cos());
    C64::from_polar(value, idx.m as f64 * phi)
}

/// `∂_θ h_{ℓ,m}(θ, φ)`, from the derivative recurrence for `P_{ℓ,k}(cos θ)`.
pub fn eval_harmonic_dtheta(idx: HarmonicIndex, theta: f64, phi: f64) -> C64 {
    let ell = idx.ell;
    let k = idx.m.unsigned_abs() as usize;
    let w = theta.cos();
    let dp = if k == 0 {
        -legendre_unchecked(ell, 1, w)
    } else {
        let lower = ((ell + k) * (ell + 1 - k)) as f64 * legendre_unchecked(ell, k - 1, w);
        0.5 * (lower - legendre_unchecked(ell, k + 1, w))
    };
    C64::from_polar(normalization(ell, k) * dp, idx.m as f64 * phi)
}

/// Product quadrature on the sphere: Gauss–Legendre in `cos θ`, uniform in `φ`.
#[derive(Clone, Debug)]
pub struct AngularGrid {
    pub theta: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub phi: Vec<f64>,
}

impl AngularGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 1 {
            return Err(invalid(format!("angular grid {n_theta}×{n_phi} is too small")));
        }
        let rule = GaussLegendre::new(n_theta.try_into().map_err(|_| invalid("n_theta must be positive"))?);
        let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (x.acos(), *w)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let phi = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        Ok(Self {
            theta: pairs.iter().map(|p| p.0).collect(),
            theta_weights: pairs.iter().map(|p| p.1).collect(),
            phi,
        })
    }

    /// A grid that integrates products of degree-`ℓ_max` spinor harmonics
    /// exactly even after two further multiplications by `σ_r`.
    pub fn for_degree(ell_max: usize) -> Self {
        Self::new(ell_max + 4, 2 * ell_max + 8).expect("grid sizes are valid")
    }

    pub fn len(&self) -> usize {
        self.theta.len() * self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(θ, φ, weight)` for every node, θ-major.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let dphi = 2.0 * PI / self.phi.len() as f64;
        self.theta.iter().zip(&self.theta_weights).flat_map(move |(&t, &wt)| {
            self.phi.iter().map(move |&p| (t, p, wt * dphi))
        })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.nodes().map(|n| n.2).collect()
    }

    /// Samples `h_{ℓ,m}` on every node.
    pub fn sample(&self, idx: HarmonicIndex) -> Vec<C64> {
        self.nodes().map(|(t, p, _)| eval_harmonic(idx, t, p)).collect()
    }
}

/// Two-component complex field on an [`AngularGrid`].
#[derive(Clone, Debug)]
pub struct SpinorAngularField {
    pub values: Vec<Spinor2>,
}

impl SpinorAngularField {
    pub fn zeros(grid: &AngularGrid) -> Self {
        Self { values: vec![[ZERO; 2]; grid.len()] }
    }

    /// `h_{ℓ,m} e_j` with `j ∈ {0, 1}`.
    pub fn basis(grid: &AngularGrid, idx: HarmonicIndex, component: usize) -> Self {
        let values = grid
            .sample(idx)
            .into_iter()
            .map(|h| {
                let mut s = [ZERO; 2];
                s[component] = h;
                s
            })
            .collect();
        Self { values }
    }

    /// Quadrature inner product `∫ ⟨self, other⟩ dΩ`, antilinear in `self`.
    pub fn inner(&self, other: &Self, grid: &AngularGrid) -> C64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(grid.nodes())
            .map(|((a, b), (_, _, w))| (a[0].conj() * b[0] + a[1].conj() * b[1]) * w)
            .sum()
    }
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn mat_add(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = *a;
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] += b[i][j];
        }
    }
    c
}

pub fn mat_vec(a: &Mat2, x: &Spinor2) -> Spinor2 {
    [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]]
}

/// `σ_r(θ, φ)`.
pub fn sigma_r(theta: f64, phi: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    let e = C64::from_polar(1.0, phi);
    [[ONE * c, e.conj() * s], [e * s, -ONE * c]]
}

/// `σ_θ(θ, φ)`.
pub fn sigma_theta(theta: f64, phi: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    let e = C64::from_polar(1.0, phi);
    [[-ONE * s, e.conj() * c], [e * c, ONE * s]]
}

/// `σ_φ(θ, φ)`, singular at the poles.
pub fn sigma_phi(theta: f64, phi: f64) -> Mat2 {
    let s = theta.sin();
    let e = C64::from_polar(1.0, phi);
    [[ZERO, -I * e.conj() / s], [I * e / s, ZERO]]
}

fn d_sigma_r_dtheta(theta: f64, phi: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    let e = C64::from_polar(1.0, phi);
    [[-ONE * s, e.conj() * c], [e * c, ONE * s]]
}

fn d_sigma_r_dphi(theta: f64, phi: f64) -> Mat2 {
    let s = theta.sin();
    let e = C64::from_polar(1.0, phi);
    [[ZERO, -I * e.conj() * s], [I * e * s, ZERO]]
}

/// `σ_r Σ_Ω (h_{ℓ,m} e_j)` at one point, with the `∂_φ` derivative taken
/// exactly as `i m` and `∂_θ h` from the recurrence.
pub fn srso_apply_point(idx: HarmonicIndex, component: usize, theta: f64, phi: f64) -> Spinor2 {
    let h = eval_harmonic(idx, theta, phi);
    let dh = eval_harmonic_dtheta(idx, theta, phi);
    let st = sigma_theta(theta, phi);
    let e = C64::from_polar(1.0, phi);
    let coupling: Mat2 = [[ZERO, e.conj()], [-e, ZERO]];
    let scale = idx.m as f64 / theta.sin();
    let mut out = [ZERO; 2];
    for (row, slot) in out.iter_mut().enumerate() {
        *slot = st[row][component] * h * scale + coupling[row][component] * dh;
    }
    out
}

/// `σ_r Σ_Ω (h_{ℓ,m} e_j)` sampled on the grid.
pub fn srso_apply(grid: &AngularGrid, idx: HarmonicIndex, component: usize) -> SpinorAngularField {
    let values = grid.nodes().map(|(t, p, _)| srso_apply_point(idx, component, t, p)).collect();
    SpinorAngularField { values }
}

/// Position of `h_{ℓ,m} e_j` in the degree-`ℓ` spinor basis: all `e₁` orders
/// `−ℓ..=ℓ` first, then all `e₂` orders.
pub fn basis_position(ell: usize, m: i64, component: usize) -> usize {
    component * (2 * ell + 1) + (m + ell as i64) as usize
}

/// Matrix of `σ_r Σ_Ω` on the degree-`ℓ` spinor basis, by quadrature
/// projection; column `basis_position(ℓ,k,j)` holds the image of `h_{ℓ,k}e_j`.
pub fn srso_matrix_elements(ell: usize) -> Vec<Vec<C64>> {
    srso_matrix_with_leakage(ell).0
}

/// Matrix elements together with the largest projection of any image onto
/// degrees `ℓ' ≠ ℓ`, `ℓ' ≤ ℓ + 2`.
pub fn srso_matrix_with_leakage(ell: usize) -> (Vec<Vec<C64>>, f64) {
    let grid = AngularGrid::for_degree(ell + 2);
    let dim = 2 * (2 * ell + 1);
    let mut mat = vec![vec![ZERO; dim]; dim];
    let mut leakage = 0.0f64;
    let li = ell as i64;
    for component in 0..2 {
        for k in -li..=li {
            let col = basis_position(ell, k, component);
            let image = srso_apply(&grid, HarmonicIndex { ell, m: k }, component);
            for l2 in 0..=ell + 2 {
                let l2i = l2 as i64;
                for m2 in -l2i..=l2i {
                    for c2 in 0..2 {
                        let b = SpinorAngularField::basis(&grid, HarmonicIndex { ell: l2, m: m2 }, c2);
                        let value = b.inner(&image, &grid);
                        if l2 == ell {
                            mat[basis_position(ell, m2, c2)][col] = value;
                        } else {
                            leakage = leakage.max(value.norm());
                        }
                    }
                }
            }
        }
    }
    (mat, leakage)
}

/// `C_{m,k}`: coefficient of `h_{ℓ,m}` in
/// `ξ*σ_rΣ_Ω h_{ℓ,k} ξ + η*σ_rΣ_Ω h_{ℓ,k} η`. Row index `m + ℓ`, column `k + ℓ`.
pub fn coupling_coefficients(ell: usize, xi: Spinor2, eta: Spinor2) -> Result<Vec<Vec<C64>>> {
    let norm = xi[0].norm_sqr() + xi[1].norm_sqr() + eta[0].norm_sqr() + eta[1].norm_sqr();
    if norm == 0.0 {
        return Err(invalid("xi and eta are both zero"));
    }
    let srso = srso_matrix_elements(ell);
    let n = 2 * ell + 1;
    let li = ell as i64;
    let mut c = vec![vec![ZERO; n]; n];
    for m in -li..=li {
        for k in -li..=li {
            let mut acc = ZERO;
            for vec in [&xi, &eta] {
                for j in 0..2 {
                    for jp in 0..2 {
                        acc += vec[jp].conj() * vec[j] * srso[basis_position(ell, m, jp)][basis_position(ell, k, j)];
                    }
                }
            }
            c[(m + li) as usize][(k + li) as usize] = acc;
        }
    }
    Ok(c)
}

/// One line of an identity report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub check_name: String,
    pub ell: usize,
    pub max_abs_deviation: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn push(&mut self, name: &str, ell: usize, deviation: f64) {
        self.checks.push(IdentityCheck { check_name: name.to_string(), ell, max_abs_deviation: deviation });
    }

    /// Largest deviation among checks whose name matches.
    pub fn worst(&self, name: &str) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.check_name == name)
            .map(|c| c.max_abs_deviation)
            .fold(0.0, f64::max)
    }
}

/// Pointwise anticommutator defect `{Σ_Ω, σ_r} − 2` applied to every
/// degree-`ℓ` basis spinor.
fn anticommutator_defect(ell: usize, grid: &AngularGrid) -> f64 {
    let li = ell as i64;
    let mut worst = 0.0f64;
    for (t, p, _) in grid.nodes() {
        let sr = sigma_r(t, p);
        let sp = sigma_phi(t, p);
        let st = sigma_theta(t, p);
        // {Σ_Ω, σ_r} f − 2f = C f + A ∂_φ f + B ∂_θ f
        let a = mat_add(&mat_mul(&sp, &sr), &mat_mul(&sr, &sp));
        let b = mat_add(&mat_mul(&st, &sr), &mat_mul(&sr, &st));
        let mut c = mat_add(&mat_mul(&sp, &d_sigma_r_dphi(t, p)), &mat_mul(&st, &d_sigma_r_dtheta(t, p)));
        c[0][0] -= 2.0;
        c[1][1] -= 2.0;
        for m in -li..=li {
            let idx = HarmonicIndex { ell, m };
            let h = eval_harmonic(idx, t, p);
            let dphi = I * m as f64 * h;
            let dtheta = eval_harmonic_dtheta(idx, t, p);
            for j in 0..2 {
                for row in 0..2 {
                    let v = c[row][j] * h + a[row][j] * dphi + b[row][j] * dtheta;
                    worst = worst.max(v.norm());
                }
            }
        }
    }
    worst
}

/// Runs the angular identity suite for every `ℓ ≤ ℓ_max`.
///
/// Checks reported: `anticommutator`, `spin_orbit_square`,
/// `degree_leakage`, `diagonal_e1`, `diagonal_e2`, `vanishing_corners`,
/// `orthonormality`, `band_structure`.
pub fn verify_spin_orbit_identities(ell_max: usize) -> Result<IdentityReport> {
    if ell_max < 1 {
        return Err(invalid("ell_max must be at least 1"));
    }
    let mut report = IdentityReport::default();
    for ell in 0..=ell_max {
        let grid = AngularGrid::for_degree(ell + 2);
        let li = ell as i64;
        let dim = 2 * (2 * ell + 1);
        let (s, leakage) = srso_matrix_with_leakage(ell);
        let kappa = (ell * (ell + 1)) as f64;

        report.push("anticommutator", ell, anticommutator_defect(ell, &grid));

        let mut square = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let mut v: C64 = (0..dim).map(|k| s[i][k] * s[k][j]).sum();
                v -= s[i][j];
                if i == j {
                    v -= kappa;
                }
                square = square.max(v.norm());
            }
        }
        report.push("spin_orbit_square", ell, square);
        report.push("degree_leakage", ell, leakage);

        let mut d1 = 0.0f64;
        let mut d2 = 0.0f64;
        let mut band = 0.0f64;
        for m in -li..=li {
            let p1 = basis_position(ell, m, 0);
            let p2 = basis_position(ell, m, 1);
            d1 = d1.max((s[p1][p1] + m as f64).norm());
            d2 = d2.max((s[p2][p2] - m as f64).norm());
            for k in -li..=li {
                if (m - k).abs() > 1 {
                    for a in 0..2 {
                        for b in 0..2 {
                            band = band.max(s[basis_position(ell, m, a)][basis_position(ell, k, b)].norm());
                        }
                    }
                }
                if m != k {
                    band = band.max(s[p1][basis_position(ell, k, 0)].norm());
                    band = band.max(s[p2][basis_position(ell, k, 1)].norm());
                }
            }
        }
        report.push("diagonal_e1", ell, d1);
        report.push("diagonal_e2", ell, d2);
        report.push("band_structure", ell, band);

        let corner_a = s[basis_position(ell, li, 1)][basis_position(ell, li, 0)].norm();
        let corner_b = s[basis_position(ell, -li, 0)][basis_position(ell, -li, 1)].norm();
        report.push("vanishing_corners", ell, corner_a.max(corner_b));

        let mut ortho = 0.0f64;
        let samples: Vec<Vec<C64>> = (-li..=li).map(|m| grid.sample(HarmonicIndex { ell, m })).collect();
        let weights = grid.weights();
        for l2 in 0..=ell {
            for m2 in -(l2 as i64)..=(l2 as i64) {
                let other = grid.sample(HarmonicIndex { ell: l2, m: m2 });
                for (mi, a) in samples.iter().enumerate() {
                    let m = mi as i64 - li;
                    let g: C64 = a.iter().zip(&other).zip(&weights).map(|((x, y), w)| x.conj() * y * w).sum();
                    let target = if l2 == ell && m2 == m { 1.0 } else { 0.0 };
                    ortho = ortho.max((g - target).norm());
                }
            }
        }
        report.push("orthonormality", ell, ortho);
    }
    Ok(report)
}
