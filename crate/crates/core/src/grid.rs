//! Uniform tensor grids over implicit domains.
//!
//! A domain is described by a level function `phi` that is negative inside,
//! zero on the boundary and positive outside. The grid covers a cube that
//! contains the domain's bounding box; every node is classified as
//!
//! - [`NodeClass::Interior`]: inside the domain and free in every solve,
//! - [`NodeClass::Boundary`]: pinned to zero (nearest node to a boundary
//!   crossing, on either side of it),
//! - [`NodeClass::Exterior`]: outside, never touched by the linear algebra.
//!
//! For every stencil edge crossing the boundary the endpoint nearer to the
//! crossing (linear interpolation of `phi`) is pinned, so that no interior
//! node ever has an exterior neighbour.

use alloc::{format, string::String, sync::Arc, vec, vec::Vec};
use core::fmt;

use crate::math::dist;
use crate::{Error, Result};

/// Scalar field over `R^N`.
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DomainSpec {
    /// Axis-aligned box `[lower, upper]`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Open ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Spherical shell `inner < |x - center| < outer`.
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
    /// Region `{ level < 0 }` inside the box `[lower, upper]`.
    Implicit { lower: Vec<f64>, upper: Vec<f64>, level: ScalarFn, description: String },
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Box { lower, upper } => {
                f.debug_struct("Box").field("lower", lower).field("upper", upper).finish()
            }
            DomainSpec::Ball { center, radius } => {
                f.debug_struct("Ball").field("center", center).field("radius", radius).finish()
            }
            DomainSpec::Annulus { center, inner, outer } => {
                f.debug_struct("Annulus").field("center", center).field("inner", inner).field("outer", outer).finish()
            }
            DomainSpec::Implicit { lower, upper, description, .. } => f
                .debug_struct("Implicit")
                .field("lower", lower)
                .field("upper", upper)
                .field("description", description)
                .finish_non_exhaustive(),
        }
    }
}

impl DomainSpec {
    pub fn unit_box(dim: usize) -> Self {
        DomainSpec::Box { lower: vec![0.0; dim], upper: vec![1.0; dim] }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        DomainSpec::Ball { center, radius }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Box { lower, .. } | DomainSpec::Implicit { lower, .. } => lower.len(),
            DomainSpec::Ball { center, .. } | DomainSpec::Annulus { center, .. } => center.len(),
        }
    }

    /// Level function: negative inside, positive outside.
    pub fn level(&self, x: &[f64]) -> f64 {
        match self {
            DomainSpec::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&xi, (&lo, &hi))| (lo - xi).max(xi - hi))
                .fold(f64::NEG_INFINITY, f64::max),
            DomainSpec::Ball { center, radius } => dist(x, center) - radius,
            DomainSpec::Annulus { center, inner, outer } => {
                let r = dist(x, center);
                (inner - r).max(r - outer)
            }
            DomainSpec::Implicit { level, .. } => level(x),
        }
    }

    /// Axis-aligned bounding box of the domain.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            DomainSpec::Box { lower, upper } | DomainSpec::Implicit { lower, upper, .. } => {
                (lower.clone(), upper.clone())
            }
            DomainSpec::Ball { center, radius: r } | DomainSpec::Annulus { center, outer: r, .. } => {
                (center.iter().map(|c| c - r).collect(), center.iter().map(|c| c + r).collect())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if dim < 2 {
            return Err(Error::InvalidDomain(format!("dimension {dim} < 2")));
        }
        let (lower, upper) = self.bounds();
        if upper.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: upper.len() });
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidDomain(format!("empty or unbounded extent [{lo}, {hi}]")));
            }
        }
        match self {
            DomainSpec::Ball { radius, .. } if !(*radius > 0.0) => {
                Err(Error::InvalidDomain(format!("radius {radius} must be positive")))
            }
            DomainSpec::Annulus { inner, outer, .. } if !(*inner >= 0.0 && inner < outer) => {
                Err(Error::InvalidDomain(format!("shell radii {inner} < {outer} required")))
            }
            _ => Ok(()),
        }
    }

    /// Short human-readable description used in reports.
    pub fn describe(&self) -> String {
        match self {
            DomainSpec::Box { lower, upper } => format!("box {lower:?} x {upper:?}"),
            DomainSpec::Ball { center, radius } => format!("ball center {center:?} radius {radius}"),
            DomainSpec::Annulus { center, inner, outer } => {
                format!("shell center {center:?} radii ({inner}, {outer})")
            }
            DomainSpec::Implicit { description, .. } => format!("implicit {{ {description} < 0 }}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Exterior,
    Interior,
    Boundary,
}

/// Classified uniform grid. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Grid {
    dim: usize,
    n: usize,
    lower: Vec<f64>,
    spacing: f64,
    extent: f64,
    strides: Vec<usize>,
    cell_strides: Vec<usize>,
    classes: Vec<NodeClass>,
    levels: Vec<f64>,
    cell_inside: Vec<bool>,
    interior_count: usize,
}

/// Build and classify a grid with `n` nodes per axis over the cube that
/// contains the domain's bounding box.
pub fn build_grid(domain: &DomainSpec, n: usize) -> Result<Grid> {
    domain.validate()?;
    if n < 2 {
        return Err(Error::ResolutionTooCoarse { n });
    }
    let dim = domain.dim();
    let (lower, upper) = domain.bounds();
    let extent = lower.iter().zip(&upper).map(|(lo, hi)| hi - lo).fold(0.0_f64, f64::max);
    let spacing = extent / (n - 1) as f64;

    let len = checked_len(n, dim)?;
    let cells = checked_len(n - 1, dim)?;
    let strides: Vec<usize> = (0..dim).map(|k| n.pow(k as u32)).collect();
    let cell_strides: Vec<usize> = (0..dim).map(|k| (n - 1).pow(k as u32)).collect();

    let mut x = vec![0.0; dim];
    let mut levels = Vec::with_capacity(len);
    for idx in 0..len {
        let mut rem = idx;
        for k in 0..dim {
            x[k] = lower[k] + (rem % n) as f64 * spacing;
            rem /= n;
        }
        levels.push(domain.level(&x));
    }

    let mut classes = vec![NodeClass::Exterior; len];
    let mut interior_count = 0;
    for idx in 0..len {
        let phi = levels[idx];
        let class = if phi == 0.0 {
            NodeClass::Boundary
        } else if phi < 0.0 {
            let mut pinned = false;
            for k in 0..dim {
                let i = (idx / strides[k]) % n;
                if i == 0 || i == n - 1 {
                    pinned = true;
                    break;
                }
                for nb in [idx - strides[k], idx + strides[k]] {
                    let psi = levels[nb];
                    if psi > 0.0 && phi / (phi - psi) <= 0.5 {
                        pinned = true;
                    }
                }
            }
            if pinned {
                NodeClass::Boundary
            } else {
                NodeClass::Interior
            }
        } else {
            let mut pinned = false;
            for k in 0..dim {
                let i = (idx / strides[k]) % n;
                let mut check = |nb: usize| {
                    let psi = levels[nb];
                    if psi < 0.0 && phi / (phi - psi) <= 0.5 {
                        pinned = true;
                    }
                };
                if i > 0 {
                    check(idx - strides[k]);
                }
                if i + 1 < n {
                    check(idx + strides[k]);
                }
            }
            if pinned {
                NodeClass::Boundary
            } else {
                NodeClass::Exterior
            }
        };
        if class == NodeClass::Interior {
            interior_count += 1;
        }
        classes[idx] = class;
    }
    if interior_count == 0 {
        return Err(Error::ResolutionTooCoarse { n });
    }

    let mut cell_inside = Vec::with_capacity(cells);
    for c in 0..cells {
        let mut rem = c;
        for k in 0..dim {
            x[k] = lower[k] + ((rem % (n - 1)) as f64 + 0.5) * spacing;
            rem /= n - 1;
        }
        cell_inside.push(domain.level(&x) < 0.0);
    }

    Ok(Grid { dim, n, lower, spacing, extent, strides, cell_strides, classes, levels, cell_inside, interior_count })
}

fn checked_len(n: usize, dim: usize) -> Result<usize> {
    n.checked_pow(dim as u32)
        .filter(|&len| len <= u32::MAX as usize)
        .ok_or_else(|| Error::InvalidDomain(format!("{n}^{dim} nodes exceed the supported size")))
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `h`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Volume `h^N` attached to each node (and to each cell).
    pub fn node_volume(&self) -> f64 {
        crate::math::powi(self.spacing, self.dim as i32)
    }

    /// Largest side of the domain's bounding box.
    pub fn domain_extent(&self) -> f64 {
        self.extent
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class(&self, idx: usize) -> NodeClass {
        self.classes[idx]
    }

    pub fn classes(&self) -> &[NodeClass] {
        &self.classes
    }

    /// Domain level function sampled at node `idx`.
    pub fn level(&self, idx: usize) -> f64 {
        self.levels[idx]
    }

    pub fn interior_count(&self) -> usize {
        self.interior_count
    }

    /// Number of nodes strictly inside the domain, pinned or not.
    pub fn inside_count(&self) -> usize {
        self.levels.iter().filter(|&&phi| phi < 0.0).count()
    }

    pub fn count(&self, class: NodeClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Index along `axis` of node `idx`.
    #[inline]
    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.n
    }

    pub fn multi_index(&self, idx: usize, out: &mut [usize]) {
        let mut rem = idx;
        for o in out.iter_mut().take(self.dim) {
            *o = rem % self.n;
            rem /= self.n;
        }
    }

    pub fn index_of(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Coordinates of node `idx`.
    pub fn point(&self, idx: usize, out: &mut [f64]) {
        let mut rem = idx;
        for k in 0..self.dim {
            out[k] = self.lower[k] + (rem % self.n) as f64 * self.spacing;
            rem /= self.n;
        }
    }

    pub fn point_vec(&self, idx: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        self.point(idx, &mut x);
        x
    }

    /// Neighbour of `idx` one step along `axis`, backwards or forwards.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, forward: bool) -> Option<usize> {
        let i = self.axis_index(idx, axis);
        if forward {
            (i + 1 < self.n).then(|| idx + self.strides[axis])
        } else {
            (i > 0).then(|| idx - self.strides[axis])
        }
    }

    /// Existing stencil neighbours of `idx` (at most `2N`).
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim)
            .flat_map(move |k| [self.neighbor(idx, k, false), self.neighbor(idx, k, true)].into_iter().flatten())
    }

    pub fn cell_count(&self) -> usize {
        self.cell_inside.len()
    }

    /// Cells per axis (`n - 1`).
    pub fn cells_per_axis(&self) -> usize {
        self.n - 1
    }

    pub fn cell_strides(&self) -> &[usize] {
        &self.cell_strides
    }

    pub fn cell_center(&self, cell: usize, out: &mut [f64]) {
        let m = self.n - 1;
        let mut rem = cell;
        for k in 0..self.dim {
            out[k] = self.lower[k] + ((rem % m) as f64 + 0.5) * self.spacing;
            rem /= m;
        }
    }

    /// Whether the center of `cell` lies inside the domain.
    pub fn cell_inside(&self, cell: usize) -> bool {
        self.cell_inside[cell]
    }

    /// Fraction of box nodes classified interior.
    pub fn interior_fraction(&self) -> f64 {
        self.interior_count as f64 / self.len() as f64
    }
}
