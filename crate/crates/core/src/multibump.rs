//! Zero extension of bumps and enumeration of their nonempty sums.

use alloc::{format, vec, vec::Vec};

use crate::energy::BumpSolution;
use crate::grid::{Grid, NodeClass};
use crate::math::{powi, sqrt};
use crate::topology::ComponentId;
use crate::weights::WeightField;
use crate::{Error, Result};

/// Largest `chi` enumerated without an explicit override.
pub const DEFAULT_MAX_CHI: usize = 20;

/// The bump extended by zero to the whole grid.
pub fn extend_bump(bump: &BumpSolution, grid: &Grid) -> Vec<f64> {
    let mut u = vec![0.0; grid.len()];
    for (&p, &v) in bump.nodes.iter().zip(&bump.values) {
        u[p] = v;
    }
    u
}

/// Sum of the zero extensions of a subset of bumps, stored as indices into
/// the bump list it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiBumpSolution {
    /// Ascending positions in the bump list.
    pub members: Vec<usize>,
    pub subset: Vec<ComponentId>,
    pub n_bumps: usize,
    /// Sum of the member energies.
    pub energy: f64,
}

impl MultiBumpSolution {
    /// Dense nodal field over the grid.
    pub fn materialize(&self, bumps: &[BumpSolution], grid: &Grid) -> Vec<f64> {
        let mut u = vec![0.0; grid.len()];
        for &m in &self.members {
            for (&p, &v) in bumps[m].nodes.iter().zip(&bumps[m].values) {
                u[p] += v;
            }
        }
        u
    }

    pub fn label(&self) -> alloc::string::String {
        let parts: Vec<_> = self.subset.iter().map(|id| format!("{id}")).collect();
        parts.join("+")
    }
}

fn from_members(bumps: &[BumpSolution], members: Vec<usize>) -> MultiBumpSolution {
    let subset = members.iter().map(|&m| bumps[m].component).collect();
    let energy = members.iter().map(|&m| bumps[m].energy).sum();
    MultiBumpSolution { n_bumps: members.len(), members, subset, energy }
}

pub fn compose_bumps(bumps: &[BumpSolution], subset: &[ComponentId]) -> Result<MultiBumpSolution> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut members = Vec::with_capacity(subset.len());
    for id in subset {
        let m = bumps.iter().position(|b| b.component == *id).ok_or_else(|| Error::MissingBump(format!("{id}")))?;
        members.push(m);
    }
    members.sort_unstable();
    members.dedup();
    Ok(from_members(bumps, members))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub max_chi: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { max_chi: DEFAULT_MAX_CHI }
    }
}

/// All `2^chi - 1` nonempty subsets, by size and then lexicographically.
pub fn enumerate_all(bumps: &[BumpSolution], opts: &EnumerationOptions) -> Result<Vec<MultiBumpSolution>> {
    let chi = bumps.len();
    if chi > opts.max_chi || chi >= usize::BITS as usize {
        return Err(Error::TooManyComponents { chi, limit: opts.max_chi });
    }
    let mut out = Vec::with_capacity((1usize << chi) - 1);
    for k in 1..=chi {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(from_members(bumps, idx.clone()));
            // next k-combination of 0..chi
            let mut i = k;
            while i > 0 && idx[i - 1] == chi - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(out)
}

/// Discrete `W^{1,1}` seminorm `sum_edges |u_p - u_q| h^(N-1)`.
pub fn w11_seminorm(u: &[f64], grid: &Grid) -> f64 {
    let scale = powi(grid.spacing(), grid.dim() as i32 - 1);
    let mut sum = 0.0;
    for p in 0..grid.len() {
        if grid.class(p) == NodeClass::Exterior {
            continue;
        }
        for k in 0..grid.dim() {
            if let Some(q) = grid.neighbor(p, k, true) {
                if grid.class(q) != NodeClass::Exterior {
                    sum += (u[p] - u[q]).abs();
                }
            }
        }
    }
    sum * scale
}

/// Terms of `int |grad u| <= (int 1/a)^{1/2} (int a |grad u|^2)^{1/2}` over
/// the edges where `u` varies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderCheck {
    pub w11: f64,
    pub inverse_weight_sqrt: f64,
    pub energy_sqrt: f64,
    pub holds: bool,
}

pub fn holder_check(u: &[f64], field: &WeightField, grid: &Grid) -> HolderCheck {
    let h = grid.spacing();
    let dim = grid.dim() as i32;
    let (s1, sn, s2) = (powi(h, dim - 1), powi(h, dim), powi(h, dim - 2));
    let (mut w11, mut inv, mut en) = (0.0, 0.0, 0.0);
    for p in 0..grid.len() {
        if grid.class(p) == NodeClass::Exterior {
            continue;
        }
        for k in 0..grid.dim() {
            let Some(q) = grid.neighbor(p, k, true) else { continue };
            let du = u[p] - u[q];
            if du == 0.0 || grid.class(q) == NodeClass::Exterior {
                continue;
            }
            let c = field.forward_conductance(p, k);
            w11 += du.abs() * s1;
            inv += if c > 0.0 { sn / c } else { f64::INFINITY };
            en += c * du * du * s2;
        }
    }
    let (inverse_weight_sqrt, energy_sqrt) = (sqrt(inv), sqrt(en));
    let rhs = inverse_weight_sqrt * energy_sqrt;
    HolderCheck { w11, inverse_weight_sqrt, energy_sqrt, holds: w11 <= rhs * (1.0 + 1e-12) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(i: usize, l: usize, nodes: Vec<usize>, energy: f64) -> BumpSolution {
        let values = nodes.iter().map(|_| 0.5).collect();
        BumpSolution {
            component: ComponentId { boundary_manifolds: i, ordinal: l },
            nodes,
            values,
            energy,
            gradient_norm: 0.0,
            min_u: 0.5,
            max_u: 0.5,
            iterations: 0,
            seed_scale: 1.0,
        }
    }

    #[test]
    fn counts_are_binomial() {
        let bumps: Vec<_> = (0..4).map(|k| bump(1, k + 1, vec![k], -1.0)).collect();
        let all = enumerate_all(&bumps, &EnumerationOptions::default()).unwrap();
        assert_eq!(all.len(), 15);
        let hist: Vec<usize> = (1..=4).map(|n| all.iter().filter(|s| s.n_bumps == n).count()).collect();
        assert_eq!(hist, vec![4, 6, 4, 1]);
        assert_eq!(all[4].members, vec![0, 1]);
        assert_eq!(all[9].members, vec![2, 3]);
        assert_eq!(all[14].energy, -4.0);

        let five: Vec<_> = (0..5).map(|k| bump(1, k + 1, vec![k], -1.0)).collect();
        assert_eq!(enumerate_all(&five, &EnumerationOptions::default()).unwrap().len(), 31);
        assert_eq!(enumerate_all(&five[..1], &EnumerationOptions::default()).unwrap().len(), 1);
    }

    #[test]
    fn guard_and_errors() {
        let bumps: Vec<_> = (0..3).map(|k| bump(1, k + 1, vec![k], -1.0)).collect();
        let opts = EnumerationOptions { max_chi: 2 };
        assert!(matches!(enumerate_all(&bumps, &opts), Err(Error::TooManyComponents { chi: 3, limit: 2 })));
        assert_eq!(compose_bumps(&bumps, &[]), Err(Error::EmptySubset));
        let missing = ComponentId { boundary_manifolds: 7, ordinal: 1 };
        assert!(matches!(compose_bumps(&bumps, &[missing]), Err(Error::MissingBump(_))));
    }
}
