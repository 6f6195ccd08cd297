//! First Dirichlet eigenpair of the unweighted five-point (2N+1-point)
//! Laplacian on a component, and the slope/eigenvalue gate.

use alloc::{format, vec, vec::Vec};

use crate::grid::Grid;
use crate::linalg::{pcg, StencilOperator, UNMAPPED};
use crate::math::{dot, sqrt};
use crate::topology::{Component, ComponentId};
use crate::weights::WeightField;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Stop when successive Rayleigh quotients differ by less than this, relatively.
    pub rel_tol: f64,
    pub max_iter: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { rel_tol: 1e-8, max_iter: 5_000, cg_tol: 1e-11, cg_max_iter: 50_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub lambda1: f64,
    /// Eigenfunction on `component.nodes`, positive with maximum 1.
    pub e1: Vec<f64>,
    pub iterations: usize,
}

/// Local numbering of a node list inside the full grid.
pub(crate) fn local_map(grid: &Grid, nodes: &[usize]) -> Vec<u32> {
    let mut local = vec![UNMAPPED; grid.len()];
    for (i, &p) in nodes.iter().enumerate() {
        local[p] = i as u32;
    }
    local
}

/// Smallest eigenvalue of `-Laplace` on the component with zero data on its shell.
pub fn dirichlet_lambda1(component: &Component, grid: &Grid, opts: &EigenOptions) -> Result<EigenPair> {
    if component.is_empty() {
        return Err(Error::NumericalFailure("eigenproblem on an empty component".into()));
    }
    let h = grid.spacing();
    let w = 1.0 / (h * h);
    let local = local_map(grid, &component.nodes);
    let op = StencilOperator::assemble(grid, &component.nodes, &local, |_, _| w);
    let n = op.len();

    let mut x = vec![1.0 / sqrt(n as f64); n];
    let mut y = vec![0.0; n];
    let mut ky = vec![0.0; n];
    let mut lambda_prev = f64::NAN;
    let mut converged_at = None;
    for it in 1..=opts.max_iter {
        if lambda_prev.is_finite() {
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi = xi / lambda_prev;
            }
        }
        pcg(&op, &x, &mut y, opts.cg_tol, opts.cg_max_iter)?;
        op.apply(&y, &mut ky);
        let yy = dot(&y, &y);
        let lambda = dot(&y, &ky) / yy;
        let norm = sqrt(yy);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        let done = lambda_prev.is_finite() && (lambda - lambda_prev).abs() < opts.rel_tol * lambda;
        lambda_prev = lambda;
        if done {
            let sign = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            if x.iter().all(|v| sign * v > 0.0) {
                converged_at = Some(it);
                break;
            }
        }
    }
    let Some(iterations) = converged_at else {
        return Err(Error::NumericalFailure(format!(
            "inverse iteration did not converge in {} steps on {}",
            opts.max_iter, component.id
        )));
    };
    op.apply(&x, &mut ky);
    let lambda1 = dot(&x, &ky) / dot(&x, &x);
    let peak = x.iter().copied().fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
    let e1 = x.iter().map(|v| v / peak).collect();
    Ok(EigenPair { lambda1, e1, iterations })
}

/// One row of the `a_M < gamma / lambda_1` check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F2Entry {
    pub component: ComponentId,
    /// Maximum of the weight over the component nodes and their shell.
    pub a_max: f64,
    pub lambda1: f64,
    pub gamma: f64,
    /// `gamma / lambda1 - a_max`.
    pub margin: f64,
    pub verdict: bool,
}

pub fn check_hypothesis_f2(component: &Component, field: &WeightField, lambda1: f64, gamma: f64) -> F2Entry {
    let a_max = component.nodes.iter().chain(&component.shell).map(|&p| field.value(p)).fold(0.0_f64, f64::max);
    let margin = gamma / lambda1 - a_max;
    F2Entry { component: component.id, a_max, lambda1, gamma, margin, verdict: margin > 0.0 }
}
