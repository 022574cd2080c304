use faer::linalg::solvers::Solve;
use faer::Mat;

use super::stencils::{derivative, interpolate, interpolate_even_to_dual, Sparse};
use super::RadialGrid;
use crate::error::{invalid, Error, Result};
use crate::profiles::{NonlinearityModel, SolitonProfile};

/// A profile restricted to a staggered radial grid: `v` on primal nodes and
/// `u` on dual nodes, both unweighted.
///
/// After [`DiscreteProfile::from_profile`] the pair solves the discrete
/// stationary system used by the assembled operators to round-off, so the
/// symmetry modes of the continuum problem are exact kernel vectors of the
/// discrete ones.
#[derive(Clone, Debug)]
pub struct DiscreteProfile {
    pub grid: RadialGrid,
    pub model: NonlinearityModel,
    pub omega: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    /// Max-norm residual of the discrete stationary equations.
    pub residual: f64,
}

/// Pointwise coefficient fields derived from a [`DiscreteProfile`].
#[derive(Clone, Debug)]
pub struct ProfileFields {
    /// `u` interpolated to primal nodes.
    pub u_primal: Vec<f64>,
    /// `v` interpolated to dual nodes.
    pub v_dual: Vec<f64>,
    pub g_primal: Vec<f64>,
    pub gp_primal: Vec<f64>,
    pub g_dual: Vec<f64>,
    pub gp_dual: Vec<f64>,
}

impl DiscreteProfile {
    /// Samples `profile` on the grid without any correction.
    pub fn sample(profile: &SolitonProfile, grid: &RadialGrid) -> Self {
        let v = grid.primal().iter().map(|&r| profile.value_at(r).0).collect();
        let u = grid.dual().iter().map(|&s| profile.value_at(s).1).collect();
        let mut dp = Self {
            grid: grid.clone(),
            model: profile.model,
            omega: profile.omega,
            v,
            u,
            residual: 0.0,
        };
        dp.residual = dp.stationary_residual();
        dp
    }

    /// Samples `profile` and Newton-polishes it on the discrete stationary
    /// system.
    pub fn from_profile(profile: &SolitonProfile, grid: &RadialGrid) -> Result<Self> {
        let mut dp = Self::sample(profile, grid);
        dp.polish()?;
        Ok(dp)
    }

    /// Wraps given nodal values; used for synthetic profiles in tests.
    pub fn from_values(
        grid: &RadialGrid,
        model: NonlinearityModel,
        omega: f64,
        v: Vec<f64>,
        u: Vec<f64>,
    ) -> Result<Self> {
        if v.len() != grid.n || u.len() != grid.n {
            return Err(invalid(format!(
                "profile has {} / {} values on a grid of {} nodes",
                v.len(),
                u.len(),
                grid.n
            )));
        }
        let mut dp = Self { grid: grid.clone(), model, omega, v, u, residual: 0.0 };
        dp.residual = dp.stationary_residual();
        Ok(dp)
    }

    pub fn fields(&self) -> ProfileFields {
        let n = self.grid.n;
        let u_primal = interpolate(n, -1.0).apply(&self.u);
        let v_dual = interpolate_even_to_dual(n).apply(&self.v);
        let mut out = ProfileFields {
            u_primal,
            v_dual,
            g_primal: vec![0.0; n],
            gp_primal: vec![0.0; n],
            g_dual: vec![0.0; n],
            gp_dual: vec![0.0; n],
        };
        for j in 0..n {
            let (g, gp) = self.model.evaluate(self.v[j] * self.v[j] - out.u_primal[j] * out.u_primal[j]);
            out.g_primal[j] = g;
            out.gp_primal[j] = gp;
            let (g, gp) = self.model.evaluate(out.v_dual[j] * out.v_dual[j] - self.u[j] * self.u[j]);
            out.g_dual[j] = g;
            out.gp_dual[j] = gp;
        }
        out
    }

    /// Radial operator `T = ∂ + 1/r` acting on weighted dual functions of the
    /// degree-zero sector.
    fn t_zero(&self) -> Sparse {
        let n = self.grid.n;
        let s = self.grid.dual();
        derivative(n, self.grid.h, -1.0).plus(&interpolate(n, -1.0).scale_cols(&inv(&s)))
    }

    fn equations(&self, t: &Sparse, tt: &Sparse) -> Vec<f64> {
        let n = self.grid.n;
        let r = self.grid.primal();
        let s = self.grid.dual();
        let f = self.fields();
        let vh: Vec<f64> = (0..n).map(|j| r[j] * self.v[j]).collect();
        let uh: Vec<f64> = (0..n).map(|j| s[j] * self.u[j]).collect();
        let tu = t.apply(&uh);
        let tv = tt.apply(&vh);
        let mut out = vec![0.0; 2 * n];
        for j in 0..n {
            out[j] = (f.g_primal[j] - self.omega) * vh[j] + tu[j];
            out[n + j] = tv[j] - (f.g_dual[j] + self.omega) * uh[j];
        }
        out
    }

    /// Max-norm residual of the discrete stationary system in weighted form.
    pub fn stationary_residual(&self) -> f64 {
        let t = self.t_zero();
        let tt = t.transpose();
        self.equations(&t, &tt).iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    fn polish(&mut self) -> Result<()> {
        let n = self.grid.n;
        let r = self.grid.primal();
        let s = self.grid.dual();
        let inv_r = inv(&r);
        let inv_s = inv(&s);
        let t = self.t_zero();
        let tt = t.transpose();
        let iu = interpolate(n, -1.0).scale_cols(&inv_s);
        let iv = interpolate_even_to_dual(n).scale_cols(&inv_r);
        let scale = self.v.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
        let mut best = f64::INFINITY;
        for _ in 0..12 {
            let residual = self.equations(&t, &tt);
            let size = residual.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            best = best.min(size);
            if size <= 1e-14 * scale {
                break;
            }
            let f = self.fields();
            let vh: Vec<f64> = (0..n).map(|j| r[j] * self.v[j]).collect();
            let uh: Vec<f64> = (0..n).map(|j| s[j] * self.u[j]).collect();
            let mut jac = Mat::<f64>::zeros(2 * n, 2 * n);
            for j in 0..n {
                jac[(j, j)] += f.g_primal[j] - self.omega + 2.0 * vh[j] * f.gp_primal[j] * self.v[j] * inv_r[j];
                jac[(n + j, n + j)] +=
                    -(f.g_dual[j] + self.omega) + 2.0 * uh[j] * f.gp_dual[j] * self.u[j] * inv_s[j];
            }
            for &(i, k, c) in &t.entries {
                jac[(i, n + k)] += c;
            }
            for &(i, k, c) in &tt.entries {
                jac[(n + i, k)] += c;
            }
            for &(i, k, c) in &iu.entries {
                jac[(i, n + k)] += -2.0 * vh[i] * f.gp_primal[i] * f.u_primal[i] * c;
            }
            for &(i, k, c) in &iv.entries {
                jac[(n + i, k)] += -2.0 * uh[i] * f.gp_dual[i] * f.v_dual[i] * c;
            }
            let rhs = Mat::<f64>::from_fn(2 * n, 1, |i, _| -residual[i]);
            let step = jac.partial_piv_lu().solve(&rhs);
            let mut largest = 0.0f64;
            for j in 0..n {
                self.v[j] += step[(j, 0)] * inv_r[j];
                self.u[j] += step[(n + j, 0)] * inv_s[j];
                largest = largest.max(step[(j, 0)].abs()).max(step[(n + j, 0)].abs());
            }
            if !largest.is_finite() {
                return Err(Error::PolishFailure { residual: best });
            }
        }
        self.residual = self.stationary_residual();
        if self.residual > 1e-10 * scale.max(1.0) {
            return Err(Error::PolishFailure { residual: self.residual });
        }
        Ok(())
    }
}

pub(crate) fn inv(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| 1.0 / v).collect()
}
