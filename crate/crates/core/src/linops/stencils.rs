//! Fourth-order staggered stencils with parity ghosts.
//!
//! Primal nodes sit at `r_j = (j+½)h`, dual nodes at `s_j = (j+1)h`. Values
//! left of the origin are supplied by the parity of the represented function,
//! so no one-sided stencils are needed at the inner boundary. Past `r_max`
//! every function is zero.

/// Sparse `n × n` matrix as an unsorted triplet list; duplicates add.
#[derive(Clone, Debug, Default)]
pub struct Sparse {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Sparse {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn diag(values: &[f64]) -> Self {
        Self {
            n: values.len(),
            entries: values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|&(i, j, v)| (j, i, v)).collect() }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|&(i, j, v)| (i, j, c * v)).collect() }
    }

    /// `diag(d) · self`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|&(i, j, v)| (i, j, d[i] * v)).collect() }
    }

    /// `self · diag(d)`.
    pub fn scale_cols(&self, d: &[f64]) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|&(i, j, v)| (i, j, v * d[j])).collect() }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self { n: self.n, entries }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for &(i, j, v) in &self.entries {
            m[i][j] += v;
        }
        m
    }
}

/// Derivative at primal nodes of a half-weighted dual function `f̂ = s·f`.
///
/// `sign` is the parity of the unweighted `f`; `f̂` vanishes at the origin and
/// its value at `s = −h` is `−sign · f̂(h)`.
pub fn derivative(n: usize, h: f64, sign: f64) -> Sparse {
    let mut d = Sparse::new(n);
    let scale = 1.0 / (24.0 * h);
    for j in 0..n as i64 {
        for (k, c) in [(j, 27.0), (j - 1, -27.0), (j + 1, -1.0), (j - 2, 1.0)] {
            match k {
                -1 => {}
                -2 => d.entries.push((j as usize, 0, -sign * c * scale)),
                k if k >= n as i64 => {}
                k => d.entries.push((j as usize, k as usize, c * scale)),
            }
        }
    }
    d
}

/// Interpolation from dual to primal nodes of an unweighted function of
/// parity `sign`. For even functions the origin value is extrapolated from
/// the first two dual nodes; for odd ones it is zero.
pub fn interpolate(n: usize, sign: f64) -> Sparse {
    let mut m = Sparse::new(n);
    for j in 0..n as i64 {
        for (k, c) in [(j, 9.0), (j - 1, 9.0), (j + 1, -1.0), (j - 2, -1.0)] {
            let c = c / 16.0;
            match k {
                -2 => m.entries.push((j as usize, 0, sign * c)),
                -1 => {
                    if sign > 0.0 {
                        m.entries.push((j as usize, 0, c * 4.0 / 3.0));
                        if n > 1 {
                            m.entries.push((j as usize, 1, -c / 3.0));
                        }
                    }
                }
                k if k >= n as i64 => {}
                k => m.entries.push((j as usize, k as usize, c)),
            }
        }
    }
    m
}

/// Interpolation from dual to primal nodes of a function that vanishes at the
/// origin and whose reflection has parity `sign`.
pub fn interpolate_vanishing(n: usize, sign: f64) -> Sparse {
    let mut m = Sparse::new(n);
    for j in 0..n as i64 {
        for (k, c) in [(j, 9.0), (j - 1, 9.0), (j + 1, -1.0), (j - 2, -1.0)] {
            let c = c / 16.0;
            match k {
                -1 => {}
                -2 => m.entries.push((j as usize, 0, sign * c)),
                k if k >= n as i64 => {}
                k => m.entries.push((j as usize, k as usize, c)),
            }
        }
    }
    m
}

/// Interpolation from primal to dual nodes of an even function.
pub fn interpolate_even_to_dual(n: usize) -> Sparse {
    let mut m = Sparse::new(n);
    for j in 0..n as i64 {
        for (k, c) in [(j, 9.0), (j + 1, 9.0), (j - 1, -1.0), (j + 2, -1.0)] {
            let c = c / 16.0;
            match k {
                -1 => m.entries.push((j as usize, 0, c)),
                k if k >= n as i64 => {}
                k => m.entries.push((j as usize, k as usize, c)),
            }
        }
    }
    m
}
