//! Discrete weak residuals and qualitative checks on nodal fields.
//!
//! The residual at a node `p` is the defect of the discrete weak formulation
//! tested against the nodal hat function of `p`:
//!
//! ```text
//! r_p = sum_q c_pq (u_p - u_q) h^(N-2) - f(u_p) h^N
//! ```
//!
//! It is only measured at interior nodes outside the zero set.

use alloc::vec::Vec;

use crate::energy::NonlinearitySpec;
use crate::grid::{Grid, NodeClass};
use crate::math::powi;
use crate::multibump::w11_seminorm;
use crate::weights::{WeightField, ZeroSet};

/// `(A u)_p` for every node, zero at exterior nodes.
pub fn apply_weighted_stiffness(u: &[f64], field: &WeightField, grid: &Grid) -> Vec<f64> {
    let dim = grid.dim();
    let scale = powi(grid.spacing(), dim as i32 - 2);
    let mut out = alloc::vec![0.0; grid.len()];
    for p in 0..grid.len() {
        if grid.class(p) == NodeClass::Exterior {
            continue;
        }
        for k in 0..dim {
            if let Some(q) = grid.neighbor(p, k, true) {
                let c = field.forward_conductance(p, k);
                if c > 0.0 {
                    let flux = c * (u[p] - u[q]) * scale;
                    out[p] += flux;
                    out[q] -= flux;
                }
            }
        }
    }
    out
}

/// Max-norm of `(A u)_p - source(p, u_p) h^N` over interior nodes off the zero set.
pub fn weak_residual_with(
    u: &[f64],
    field: &WeightField,
    zero: &ZeroSet,
    grid: &Grid,
    source: impl Fn(usize, f64) -> f64,
) -> f64 {
    let au = apply_weighted_stiffness(u, field, grid);
    let vol = grid.node_volume();
    (0..grid.len())
        .filter(|&p| grid.class(p) == NodeClass::Interior && !zero.contains(p))
        .map(|p| (au[p] - source(p, u[p]) * vol).abs())
        .fold(0.0, f64::max)
}

/// Weak residual of `-div(a grad u) = f(u)` with the untruncated `f`.
pub fn weak_residual(u: &[f64], field: &WeightField, zero: &ZeroSet, spec: &NonlinearitySpec, grid: &Grid) -> f64 {
    weak_residual_with(u, field, zero, grid, |_, s| spec.eval(s))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyTolerances {
    /// `None` means `1e-6 * gamma * s_star * h^N`.
    pub residual: Option<f64>,
    /// Allowed excursion below 0 and above `s_star`.
    pub bound: Option<f64>,
    pub zero_trace: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances { residual: None, bound: None, zero_trace: 0.0 }
    }
}

impl VerifyTolerances {
    pub fn residual_for(&self, spec: &NonlinearitySpec, grid: &Grid) -> f64 {
        self.residual.unwrap_or(1e-6 * spec.gamma * spec.s_star * grid.node_volume())
    }

    pub fn bound_for(&self, spec: &NonlinearitySpec) -> f64 {
        self.bound.unwrap_or(1e-8 * spec.s_star)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerificationReport {
    pub residual_norm: f64,
    pub min_u: f64,
    pub max_u: f64,
    /// Max `|u|` over zero-set and domain-boundary nodes.
    pub zero_trace_max: f64,
    pub w11_seminorm: f64,
    pub residual_ok: bool,
    pub bounds_ok: bool,
    pub zero_trace_ok: bool,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.residual_ok && self.bounds_ok && self.zero_trace_ok
    }
}

pub fn check_conclusions(
    u: &[f64],
    field: &WeightField,
    zero: &ZeroSet,
    spec: &NonlinearitySpec,
    grid: &Grid,
    tol: &VerifyTolerances,
) -> VerificationReport {
    let residual_norm = weak_residual(u, field, zero, spec, grid);
    let mut min_u = f64::INFINITY;
    let mut max_u = f64::NEG_INFINITY;
    let mut zero_trace_max = 0.0_f64;
    for p in 0..grid.len() {
        match grid.class(p) {
            NodeClass::Exterior => continue,
            NodeClass::Boundary => zero_trace_max = zero_trace_max.max(u[p].abs()),
            NodeClass::Interior if zero.contains(p) => zero_trace_max = zero_trace_max.max(u[p].abs()),
            NodeClass::Interior => {}
        }
        min_u = min_u.min(u[p]);
        max_u = max_u.max(u[p]);
    }
    let bound = tol.bound_for(spec);
    VerificationReport {
        residual_norm,
        min_u,
        max_u,
        zero_trace_max,
        w11_seminorm: w11_seminorm(u, grid),
        residual_ok: residual_norm <= tol.residual_for(spec, grid),
        bounds_ok: min_u >= -bound && max_u <= spec.s_star + bound,
        zero_trace_ok: zero_trace_max <= tol.zero_trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};
    use crate::weights::{detect_zero_set, evaluate_weight, WeightSpec};

    #[test]
    fn zero_field_has_zero_residual_and_bound_failure_is_caught() {
        let grid = build_grid(&DomainSpec::unit_box(2), 17).unwrap();
        let field = evaluate_weight(&WeightSpec::Constant { value: 1.0 }, &grid).unwrap();
        let zero = detect_zero_set(&field, &grid, 1e-6);
        let spec = NonlinearitySpec::logistic(30.0, 1.0);
        let u = alloc::vec![0.0; grid.len()];
        let r = check_conclusions(&u, &field, &zero, &spec, &grid, &VerifyTolerances::default());
        assert_eq!(r.residual_norm, 0.0);
        assert!(r.passed());
        let two: Vec<f64> =
            (0..grid.len()).map(|p| if grid.class(p) == NodeClass::Interior { 2.0 } else { 0.0 }).collect();
        let r = check_conclusions(&two, &field, &zero, &spec, &grid, &VerifyTolerances::default());
        assert!(!r.bounds_ok);
    }
}
