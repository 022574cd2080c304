//! Discrete radial linearization operators.
//!
//! All radial unknowns are stored half-weighted, `â(r) = r·a(r)`, so that the
//! measure `r² dr` becomes `dr` and the two derivative terms of every adjoint
//! pair are exact transposes of each other. `A`, `B` and `R` live on primal
//! nodes `(j+½)h`; `P`, `Q` and `S` live on dual nodes `(j+1)h`.
//!
//! In a degree-`ℓ` sector the first-order operators are realized through the
//! spin-orbit split: with `D` the dual→primal derivative and `X` the
//! dual→primal "`1/r`" (interpolation of the unweighted function), the
//! radial couplings become
//!
//! ```text
//! row A:  (∂ + 2/r) P  →  (D + X) P̂         −κ_ℓ Q / r²  →  −κ_ℓ X diag(1/s) Q̂
//! row B:   −P          →  −diag(r) X P̂         ∂ Q      →   diag(r) D diag(1/s) Q̂
//! ```
//!
//! with the rows for `P` and `Q` given by the transposed stencils. Parity
//! ghost values at `r ≤ 0` make the stencils fourth-order up to the origin.

mod discrete;
mod export;
pub mod stencils;

use faer::Mat;
use serde::{Deserialize, Serialize};

pub use discrete::{DiscreteProfile, ProfileFields};
pub use export::{read_matrix, write_matrix};

use crate::error::{invalid, Result};
use discrete::inv;
use stencils::{derivative, interpolate, interpolate_vanishing, Sparse};

/// Staggered uniform radial grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub n: usize,
    pub r_max: f64,
    pub h: f64,
}

/// Smallest admissible number of radial nodes.
pub const MIN_NODES: usize = 16;

pub fn make_radial_grid(n: usize, r_max: f64) -> Result<RadialGrid> {
    if n < MIN_NODES {
        return Err(invalid(format!("N = {n} is below the minimum of {MIN_NODES}")));
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(invalid(format!("r_max must be positive, got {r_max}")));
    }
    Ok(RadialGrid { n, r_max, h: r_max / n as f64 })
}

impl RadialGrid {
    /// Primal nodes `(j+½)h`.
    pub fn primal(&self) -> Vec<f64> {
        (0..self.n).map(|j| (j as f64 + 0.5) * self.h).collect()
    }

    /// Dual nodes `(j+1)h`.
    pub fn dual(&self) -> Vec<f64> {
        (0..self.n).map(|j| (j as f64 + 1.0) * self.h).collect()
    }

    /// The same radius with twice the resolution.
    pub fn refined(&self) -> RadialGrid {
        RadialGrid { n: 2 * self.n, r_max: self.r_max, h: self.h / 2.0 }
    }

    /// A warning when the truncation radius is short compared with the decay
    /// length `1/κ` of the profile.
    pub fn truncation_warning(&self, decay_rate: f64) -> Option<String> {
        let wanted = 20.0 / decay_rate;
        (self.r_max < wanted).then(|| {
            format!("r_max = {} is below 20/κ = {wanted:.3}; eigenfunctions may feel the outer boundary", self.r_max)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BlockKind {
    OneFreq,
    BiFreq,
    RsSector,
    L0Only,
}

impl BlockKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BlockKind::OneFreq => "ONE_FREQ",
            BlockKind::BiFreq => "BI_FREQ",
            BlockKind::RsSector => "RS_SECTOR",
            BlockKind::L0Only => "L0_ONLY",
        }
    }
}

/// Sector metadata shared by matrices and spectra.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub kind: BlockKind,
    pub ell: usize,
    pub m: i64,
    pub nu: f64,
}

impl Sector {
    pub fn one_frequency(ell: usize, m: i64) -> Self {
        Self { kind: BlockKind::OneFreq, ell, m, nu: 0.0 }
    }

    pub fn bi_frequency(ell: usize, m: i64, nu: f64) -> Self {
        Self { kind: BlockKind::BiFreq, ell, m, nu }
    }

    pub fn rs(ell: usize) -> Self {
        Self { kind: BlockKind::RsSector, ell, m: 0, nu: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.unsigned_abs() as usize > self.ell {
            return Err(invalid(format!("|m| = {} exceeds ℓ = {}", self.m.abs(), self.ell)));
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(invalid(format!("nu must be a non-negative real, got {}", self.nu)));
        }
        Ok(())
    }

    /// Factor multiplying the `(m/r)W` couplings.
    pub fn coupling_scale(&self) -> f64 {
        match self.kind {
            BlockKind::BiFreq => 1.0 + 2.0 * self.nu * self.nu,
            _ => 1.0,
        }
    }
}

/// Dense real matrix `M` of a radial block; the generator is `−iM`.
#[derive(Clone, Debug)]
pub struct BlockOperatorMatrix {
    pub sector: Sector,
    /// Radial nodes per unknown.
    pub n: usize,
    pub entries: Mat<f64>,
    /// `‖M − Mᵀ‖_F / ‖M‖_F` before symmetrization (R/S sector only).
    pub asymmetry: Option<f64>,
}

impl BlockOperatorMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let m = &self.entries;
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `(block_row, block_col)` pairs of `n × n` blocks holding any nonzero
    /// entry.
    pub fn nonzero_blocks(&self) -> Vec<(usize, usize)> {
        let b = self.size() / self.n;
        let mut out = Vec::new();
        for bi in 0..b {
            for bj in 0..b {
                let any = (0..self.n).any(|i| (0..self.n).any(|j| self.entries[(bi * self.n + i, bj * self.n + j)] != 0.0));
                if any {
                    out.push((bi, bj));
                }
            }
        }
        out
    }

    /// A short content hash for diagnostics.
    pub fn fingerprint(&self) -> String {
        let mut acc: u64 = 0xcbf29ce484222325;
        let m = &self.entries;
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                for b in m[(i, j)].to_bits().to_le_bytes() {
                    acc ^= u64::from(b);
                    acc = acc.wrapping_mul(0x100000001b3);
                }
            }
        }
        format!(
            "{}(ℓ={}, m={}, ν={}, {}×{}, {:016x})",
            self.sector.kind.as_str(),
            self.sector.ell,
            self.sector.m,
            self.sector.nu,
            m.nrows(),
            m.ncols(),
            acc
        )
    }

    /// Real matrix–vector product applied to a complex vector.
    pub fn apply_complex(&self, x: &[num_complex::Complex64]) -> Vec<num_complex::Complex64> {
        let m = &self.entries;
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| x[j] * m[(i, j)]).sum())
            .collect()
    }
}

/// Radial stencils for one degree.
struct SectorOps {
    n: usize,
    r: Vec<f64>,
    s: Vec<f64>,
    d: Sparse,
    x: Sparse,
}

impl SectorOps {
    fn new(grid: &RadialGrid, ell: usize) -> Self {
        let sign = parity_g(ell);
        let s = grid.dual();
        Self {
            n: grid.n,
            r: grid.primal(),
            d: derivative(grid.n, grid.h, sign),
            x: interpolate(grid.n, sign).scale_cols(&inv(&s)),
            s,
        }
    }
}

/// Parity of the unweighted `P − ℓQ/r`-type combinations in degree `ℓ`.
fn parity_g(ell: usize) -> f64 {
    if ell % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

fn scatter(m: &mut Mat<f64>, block: &Sparse, row: usize, col: usize) {
    for &(i, j, v) in &block.entries {
        m[(row + i, col + j)] += v;
    }
}

/// The four-by-four block operator `L₀` on `(Â, P̂, B̂, Q̂)`.
fn l0_blocks(dp: &DiscreteProfile, ell: usize) -> [[Option<Sparse>; 4]; 4] {
    let ops = SectorOps::new(&dp.grid, ell);
    let f = dp.fields();
    let w = dp.omega;
    let kappa = (ell * (ell + 1)) as f64;
    let gpw: Vec<f64> = f.g_primal.iter().map(|g| g - w).collect();
    let gdw: Vec<f64> = f.g_dual.iter().map(|g| -g - w).collect();
    let inv_r = inv(&ops.r);
    let inv_s = inv(&ops.s);

    let a_p = ops.d.plus(&ops.x);
    let a_q = ops.x.scale_cols(&inv_s).scale(-kappa);
    let p_a = a_p.transpose();
    let p_b = ops.x.transpose().scale_cols(&inv_r).scale(-kappa);
    let b_p = ops.x.scale_rows(&ops.r).scale(-1.0);
    let b_q = ops.d.scale_rows(&ops.r).scale_cols(&inv_s);
    let q_a = ops.x.transpose().scale_rows(&ops.s).scale(-1.0);
    let q_b = ops.d.transpose().scale_rows(&ops.s).scale_cols(&inv_r);
    let _ = ops.n;
    [
        [Some(Sparse::diag(&gpw)), Some(a_p), None, Some(a_q)],
        [Some(p_a), Some(Sparse::diag(&gdw)), Some(p_b), None],
        [None, Some(b_p), Some(Sparse::diag(&gpw)), Some(b_q)],
        [Some(q_a), None, Some(q_b), Some(Sparse::diag(&gdw))],
    ]
}

/// `L₀(ω)` in degree `ℓ` as a `4N × 4N` matrix on `(Â, P̂, B̂, Q̂)`.
pub fn assemble_l0(dp: &DiscreteProfile, ell: usize) -> BlockOperatorMatrix {
    let n = dp.grid.n;
    let blocks = l0_blocks(dp, ell);
    let mut m = Mat::<f64>::zeros(4 * n, 4 * n);
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, block) in row.iter().enumerate() {
            if let Some(b) = block {
                scatter(&mut m, b, bi * n, bj * n);
            }
        }
    }
    BlockOperatorMatrix {
        sector: Sector { kind: BlockKind::L0Only, ell, m: 0, nu: 0.0 },
        n,
        entries: m,
        asymmetry: None,
    }
}

/// The potential `W = g'·(v, −u)ᵀ(v, −u)` split into its four blocks.
///
/// `aa` and `ap` act into primal rows, `pa` and `pp` into dual rows. The
/// mixed blocks carry the interpolation between the two node families, so
/// `pa` is the transpose of `ap`.
#[derive(Clone, Debug)]
pub struct PotentialW {
    pub aa: Sparse,
    pub ap: Sparse,
    pub pa: Sparse,
    pub pp: Sparse,
    /// Pointwise `(g'v², −g'uv, g'u²)` at primal nodes.
    pub primal_entries: Vec<[f64; 3]>,
}

impl PotentialW {
    /// Pointwise 2×2 block `[[g'v², −g'uv], [−g'uv, g'u²]]` at primal node `j`.
    pub fn pointwise(&self, j: usize) -> [[f64; 2]; 2] {
        let [vv, uv, uu] = self.primal_entries[j];
        [[vv, uv], [uv, uu]]
    }
}

/// Assembles `W` for degree `ℓ` (the mixed blocks depend on the parity of the
/// sector's `P` and `Q` unknowns).
pub fn assemble_w(dp: &DiscreteProfile, ell: usize) -> PotentialW {
    let n = dp.grid.n;
    let f = dp.fields();
    let mut aa = vec![0.0; n];
    let mut pp = vec![0.0; n];
    let mut mixed = vec![0.0; n];
    let mut primal_entries = Vec::with_capacity(n);
    for j in 0..n {
        let (v, u) = (dp.v[j], f.u_primal[j]);
        let gp = f.gp_primal[j];
        aa[j] = gp * v * v;
        mixed[j] = -gp * u * v;
        pp[j] = f.gp_dual[j] * dp.u[j] * dp.u[j];
        primal_entries.push([gp * v * v, -gp * u * v, gp * u * u]);
    }
    let ap = interpolate_vanishing(n, -parity_g(ell)).scale_rows(&mixed);
    let pa = ap.transpose();
    PotentialW { aa: Sparse::diag(&aa), ap, pa, pp: Sparse::diag(&pp), primal_entries }
}

fn scatter_w(m: &mut Mat<f64>, w: &PotentialW, row: usize, col: usize, n: usize, factor: f64, col_scale: Option<(&[f64], &[f64])>) {
    let parts = [(&w.aa, 0, 0), (&w.ap, 0, n), (&w.pa, n, 0), (&w.pp, n, n)];
    for (block, ro, co) in parts {
        for &(i, j, v) in &block.entries {
            let c = match col_scale {
                Some((primal, dual)) => {
                    if co == 0 {
                        primal[j]
                    } else {
                        dual[j]
                    }
                }
                None => 1.0,
            };
            m[(row + ro + i, col + co + j)] += factor * (v * c);
        }
    }
}

/// Generator matrix of a one-frequency (`coupling_scale = 1`) or
/// bi-frequency sector.
///
/// For `ℓ = 0` the result is the reduced `4N` matrix on `(Â, P̂, Ā, P̄)`; for
/// `ℓ ≥ 1` it is the `8N` matrix on `(Ψ_m, Ψ̄_{−m})` with every `(m/r)W` entry
/// multiplied by `coupling_scale`.
pub fn assemble_generator(dp: &DiscreteProfile, ell: usize, m: i64, coupling_scale: f64) -> Result<BlockOperatorMatrix> {
    let kind = if coupling_scale == 1.0 { BlockKind::OneFreq } else { BlockKind::BiFreq };
    let nu = ((coupling_scale - 1.0) / 2.0).max(0.0).sqrt();
    assemble_sector(dp, Sector { kind, ell, m, nu }, coupling_scale)
}

pub fn assemble_one_frequency(dp: &DiscreteProfile, ell: usize, m: i64) -> Result<BlockOperatorMatrix> {
    assemble_sector(dp, Sector::one_frequency(ell, m), 1.0)
}

pub fn assemble_bi_frequency(dp: &DiscreteProfile, ell: usize, m: i64, nu: f64) -> Result<BlockOperatorMatrix> {
    let sector = Sector::bi_frequency(ell, m, nu);
    assemble_sector(dp, sector, sector.coupling_scale())
}

/// Dispatches on the sector kind.
pub fn assemble(dp: &DiscreteProfile, sector: Sector) -> Result<BlockOperatorMatrix> {
    match sector.kind {
        BlockKind::OneFreq | BlockKind::BiFreq => assemble_sector(dp, sector, sector.coupling_scale()),
        BlockKind::RsSector => Ok(assemble_rs(dp, sector.ell)),
        BlockKind::L0Only => Ok(assemble_l0(dp, sector.ell)),
    }
}

fn assemble_sector(dp: &DiscreteProfile, sector: Sector, coupling_scale: f64) -> Result<BlockOperatorMatrix> {
    sector.validate()?;
    let (ell, m) = (sector.ell, sector.m);
    let n = dp.grid.n;
    let w = assemble_w(dp, ell);
    let l0 = l0_blocks(dp, ell);
    if ell == 0 {
        let mut mat = Mat::<f64>::zeros(4 * n, 4 * n);
        for (bi, row) in l0.iter().take(2).enumerate() {
            for (bj, block) in row.iter().take(2).enumerate() {
                if let Some(b) = block {
                    scatter(&mut mat, b, bi * n, bj * n);
                    scatter(&mut mat, &b.scale(-1.0), (bi + 2) * n, (bj + 2) * n);
                }
            }
        }
        for (row, col, factor) in [(0, 0, 1.0), (0, 2, 1.0), (2, 0, -1.0), (2, 2, -1.0)] {
            scatter_w(&mut mat, &w, row * n, col * n, n, factor, None);
        }
        return Ok(BlockOperatorMatrix { sector, n, entries: mat, asymmetry: None });
    }
    let mut mat = Mat::<f64>::zeros(8 * n, 8 * n);
    for (bi, row) in l0.iter().enumerate() {
        for (bj, block) in row.iter().enumerate() {
            if let Some(b) = block {
                scatter(&mut mat, b, bi * n, bj * n);
                scatter(&mut mat, &b.scale(-1.0), (bi + 4) * n, (bj + 4) * n);
            }
        }
    }
    // K₁ = [[W, −(m/r)W], [0, 0]] and K₂ = [[W, (m/r)W], [0, 0]] enter as
    // [[L₀ + K₁, K₂], [−K₁, −L₀ − K₂]]. The (m/r)W entries are accumulated
    // separately and added with a single multiplication by the scale.
    scatter_w(&mut mat, &w, 0, 0, n, 1.0, None);
    scatter_w(&mut mat, &w, 0, 4 * n, n, 1.0, None);
    scatter_w(&mut mat, &w, 4 * n, 0, n, -1.0, None);
    scatter_w(&mut mat, &w, 4 * n, 4 * n, n, -1.0, None);
    if m != 0 {
        let part = coupling_matrix(dp, &w, m);
        for j in 0..8 * n {
            for i in 0..8 * n {
                let p = part[(i, j)];
                if p != 0.0 {
                    mat[(i, j)] += coupling_scale * p;
                }
            }
        }
    }
    Ok(BlockOperatorMatrix { sector, n, entries: mat, asymmetry: None })
}

fn coupling_matrix(dp: &DiscreteProfile, w: &PotentialW, m: i64) -> Mat<f64> {
    let n = dp.grid.n;
    let mw: (Vec<f64>, Vec<f64>) = (
        inv(&dp.grid.primal()).iter().map(|x| m as f64 * x).collect(),
        inv(&dp.grid.dual()).iter().map(|x| m as f64 * x).collect(),
    );
    let cols = Some((mw.0.as_slice(), mw.1.as_slice()));
    let mut mat = Mat::<f64>::zeros(8 * n, 8 * n);
    scatter_w(&mut mat, w, 0, 2 * n, n, -1.0, cols);
    scatter_w(&mut mat, w, 0, 6 * n, n, 1.0, cols);
    scatter_w(&mut mat, w, 4 * n, 2 * n, n, 1.0, cols);
    scatter_w(&mut mat, w, 4 * n, 6 * n, n, -1.0, cols);
    mat
}

/// Only the `(m/r)W` entries of an `ℓ ≥ 1` generator, with unit scale and
/// the signs they carry in the full matrix.
pub fn assemble_coupling_part(dp: &DiscreteProfile, ell: usize, m: i64) -> Result<BlockOperatorMatrix> {
    let sector = Sector::one_frequency(ell, m);
    sector.validate()?;
    if ell == 0 {
        return Err(invalid("the degree-zero block has no (m/r)W coupling"));
    }
    let w = assemble_w(dp, ell);
    Ok(BlockOperatorMatrix { sector, n: dp.grid.n, entries: coupling_matrix(dp, &w, m), asymmetry: None })
}

/// The symmetric `2N × 2N` operator of the R/S sector of degree `ℓ`,
/// `[[g + ω, ∂ + (ℓ+2)/r], [−∂ + ℓ/r, −g + ω]]` in weighted form.
pub fn assemble_rs(dp: &DiscreteProfile, ell: usize) -> BlockOperatorMatrix {
    let n = dp.grid.n;
    let ops = SectorOps::new(&dp.grid, ell);
    let f = dp.fields();
    let t = ops.d.plus(&ops.x.scale((ell + 1) as f64));
    let mut m = Mat::<f64>::zeros(2 * n, 2 * n);
    let top: Vec<f64> = f.g_primal.iter().map(|g| g + dp.omega).collect();
    let bottom: Vec<f64> = f.g_dual.iter().map(|g| -g + dp.omega).collect();
    scatter(&mut m, &Sparse::diag(&top), 0, 0);
    scatter(&mut m, &t, 0, n);
    scatter(&mut m, &t.transpose(), n, 0);
    scatter(&mut m, &Sparse::diag(&bottom), n, n);
    let (mut diff, mut total) = (0.0f64, 0.0f64);
    for i in 0..2 * n {
        for j in 0..2 * n {
            diff += (m[(i, j)] - m[(j, i)]).powi(2);
            total += m[(i, j)].powi(2);
        }
    }
    let asymmetry = if total > 0.0 { (diff / total).sqrt() } else { 0.0 };
    let sym = Mat::<f64>::from_fn(2 * n, 2 * n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    BlockOperatorMatrix { sector: Sector::rs(ell), n, entries: sym, asymmetry: Some(asymmetry) }
}
