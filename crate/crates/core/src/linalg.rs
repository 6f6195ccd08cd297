//! Matrix-free stencil operators and Jacobi-preconditioned conjugate gradients.

use alloc::{format, vec, vec::Vec};

use crate::grid::Grid;
use crate::math::dot;
use crate::{Error, Result};

pub(crate) const UNMAPPED: u32 = u32::MAX;

/// Symmetric stencil operator `y_i = d_i x_i - sum_j w_ij x_j` restricted to
/// a set of unknown nodes, with homogeneous Dirichlet data everywhere else.
#[derive(Clone, Debug)]
pub(crate) struct StencilOperator {
    width: usize,
    diag: Vec<f64>,
    cols: Vec<u32>,
    weights: Vec<f64>,
}

impl StencilOperator {
    /// `local[g]` maps a grid node to its unknown index (or [`UNMAPPED`]);
    /// `edge(p, q)` is the (symmetric, nonnegative) weight of edge `p-q`.
    pub(crate) fn assemble(
        grid: &Grid,
        nodes: &[usize],
        local: &[u32],
        mut edge: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let width = 2 * grid.dim();
        let mut diag = vec![0.0; nodes.len()];
        let mut cols = vec![UNMAPPED; nodes.len() * width];
        let mut weights = vec![0.0; nodes.len() * width];
        for (i, &p) in nodes.iter().enumerate() {
            for (slot, q) in grid.neighbors(p).enumerate() {
                let w = edge(p, q);
                diag[i] += w;
                if local[q] != UNMAPPED {
                    cols[i * width + slot] = local[q];
                    weights[i * width + slot] = w;
                }
            }
        }
        StencilOperator { width, diag, cols, weights }
    }

    pub(crate) fn len(&self) -> usize {
        self.diag.len()
    }

    pub(crate) fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub(crate) fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let row = i * self.width;
            let mut acc = self.diag[i] * x[i];
            for s in row..row + self.width {
                let c = self.cols[s];
                if c != UNMAPPED {
                    acc -= self.weights[s] * x[c as usize];
                }
            }
            *yi = acc;
        }
    }

    /// `x^T A x`, computed edge-wise so that it stays nonnegative in floating point.
    pub(crate) fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.len() {
            let row = i * self.width;
            let mut offsum = 0.0;
            for s in row..row + self.width {
                let c = self.cols[s];
                if c != UNMAPPED {
                    let j = c as usize;
                    offsum += self.weights[s];
                    if j > i {
                        let d = x[i] - x[j];
                        acc += self.weights[s] * d * d;
                    }
                }
            }
            // edges to pinned nodes
            acc += (self.diag[i] - offsum) * x[i] * x[i];
        }
        acc
    }
}

/// Convergence record of a conjugate-gradient solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solve `A x = b` by Jacobi-preconditioned CG, starting from the contents of `x`.
pub(crate) fn pcg(op: &StencilOperator, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> Result<CgStats> {
    let n = op.len();
    let bnorm = dot(b, b).sqrt_nonneg();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats { iterations: 0, relative_residual: 0.0 });
    }
    let inv_diag: Vec<f64> = op.diag().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let target = rel_tol * bnorm;
    let mut rnorm = dot(&r, &r).sqrt_nonneg();
    for it in 0..max_iter {
        if rnorm <= target {
            return Ok(CgStats { iterations: it, relative_residual: rnorm / bnorm });
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NumericalFailure(format!("conjugate gradients broke down (p^T A p = {pap:e})")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rnorm = dot(&r, &r).sqrt_nonneg();
    }
    if rnorm <= target {
        return Ok(CgStats { iterations: max_iter, relative_residual: rnorm / bnorm });
    }
    Err(Error::NumericalFailure(format!(
        "conjugate gradients stalled at relative residual {:e} after {max_iter} iterations",
        rnorm / bnorm
    )))
}

trait SqrtNonneg {
    fn sqrt_nonneg(self) -> f64;
}

impl SqrtNonneg for f64 {
    fn sqrt_nonneg(self) -> f64 {
        crate::math::sqrt(self.max(0.0))
    }
}
