//! Weights `a(x) >= 0`, their zero sets and admissibility diagnostics.
//!
//! Integrals of `a` and `1/a` are evaluated with midpoint quadrature at cell
//! centers, which never coincide with grid nodes. Inside such integrals the
//! weight is floored at `eps_zero * a_max`, so every estimate stays finite and
//! divergence shows up as growth under grid refinement instead.
//!
//! Zero sets are detected on interior nodes in two ways: nodes whose value is
//! below `eps_zero * a_max`, and, when the weight carries a sign-changing
//! zero level function, the node nearer to every level crossing on an
//! interior stencil edge. The second rule is what resolves zeros of
//! fractional order, which a pure threshold never sees on a lattice.

use alloc::{format, string::String, sync::Arc, vec, vec::Vec};
use core::fmt;

use crate::grid::{build_grid, DomainSpec, Grid, NodeClass, ScalarFn};
use crate::math::{ceil, dist, dot, floor, powf, sqrt};
use crate::{Error, Result};

/// Default relative threshold separating degeneracy from small positive values.
pub const DEFAULT_EPS_ZERO: f64 = 1e-6;

/// Largest relative growth of a refined estimate still considered stable.
pub const DEFAULT_GROWTH_LIMIT: f64 = 1.10;

/// Exponents scanned for `1/a in L^t`, as multiples of `N/2`.
pub const DEFAULT_LT_FACTORS: [f64; 6] = [1.0, 1.25, 1.5, 2.0, 3.0, 4.0];

/// `|r - root|^power`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootPower {
    pub root: f64,
    pub power: f64,
}

/// Radial profile `coeff * prod |r - root|^power` on `(previous r_max, r_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialPiece {
    pub r_max: f64,
    pub coeff: f64,
    pub factors: Vec<RootPower>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PowerFactor {
    /// `| |x - center| - radius |^power`, vanishing on a sphere.
    Sphere { center: Vec<f64>, radius: f64, power: f64 },
    /// `|normal . x - offset|^power`, vanishing on a hyperplane.
    Plane { normal: Vec<f64>, offset: f64, power: f64 },
    /// `|x - center|^power`, vanishing at a point.
    Point { center: Vec<f64>, power: f64 },
}

impl PowerFactor {
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            PowerFactor::Sphere { power, .. } | PowerFactor::Plane { power, .. } => {
                powf(self.level(x).unwrap_or(0.0).abs(), *power)
            }
            PowerFactor::Point { center, power } => powf(dist(x, center), *power),
        }
    }

    /// Signed level whose zero set is the factor's zero set, if it changes sign.
    fn level(&self, x: &[f64]) -> Option<f64> {
        match self {
            PowerFactor::Sphere { center, radius, .. } => Some(dist(x, center) - radius),
            PowerFactor::Plane { normal, offset, .. } => Some(dot(normal, x) - offset),
            PowerFactor::Point { .. } => None,
        }
    }

    fn power(&self) -> f64 {
        match self {
            PowerFactor::Sphere { power, .. } | PowerFactor::Plane { power, .. } | PowerFactor::Point { power, .. } => {
                *power
            }
        }
    }
}

#[derive(Clone)]
pub enum WeightSpec {
    Constant {
        value: f64,
    },
    RadialPiecewise {
        center: Vec<f64>,
        pieces: Vec<RadialPiece>,
    },
    ProductOfPowers {
        scale: f64,
        factors: Vec<PowerFactor>,
    },
    Custom {
        value: ScalarFn,
        /// Optional signed function vanishing exactly where `value` does.
        zero_level: Option<ScalarFn>,
        reference: String,
    },
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Constant { value } => f.debug_struct("Constant").field("value", value).finish(),
            WeightSpec::RadialPiecewise { center, pieces } => {
                f.debug_struct("RadialPiecewise").field("center", center).field("pieces", pieces).finish()
            }
            WeightSpec::ProductOfPowers { scale, factors } => {
                f.debug_struct("ProductOfPowers").field("scale", scale).field("factors", factors).finish()
            }
            WeightSpec::Custom { reference, zero_level, .. } => f
                .debug_struct("Custom")
                .field("reference", reference)
                .field("has_zero_level", &zero_level.is_some())
                .finish_non_exhaustive(),
        }
    }
}

impl WeightSpec {
    /// Radial weight with cusp zeros on the unit sphere and on the sphere of
    /// radius 2: `(1 - r^2)^(1/3)` for `r <= 1`, `((r - 1)(2 - r))^(1/2)` beyond.
    pub fn cusp_radial(dim: usize) -> Self {
        WeightSpec::RadialPiecewise {
            center: vec![0.0; dim],
            pieces: vec![
                RadialPiece {
                    r_max: 1.0,
                    coeff: 1.0,
                    factors: vec![
                        RootPower { root: 1.0, power: 1.0 / 3.0 },
                        RootPower { root: -1.0, power: 1.0 / 3.0 },
                    ],
                },
                RadialPiece {
                    r_max: 2.0,
                    coeff: 1.0,
                    factors: vec![RootPower { root: 1.0, power: 0.5 }, RootPower { root: 2.0, power: 0.5 }],
                },
            ],
        }
    }

    /// `|x - center|^2`, a weight with a quadratic point zero.
    pub fn quadratic_point(center: Vec<f64>) -> Self {
        WeightSpec::ProductOfPowers { scale: 1.0, factors: vec![PowerFactor::Point { center, power: 2.0 }] }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            WeightSpec::Constant { value } => *value,
            WeightSpec::RadialPiecewise { center, pieces } => {
                let r = dist(x, center);
                let piece =
                    pieces.iter().find(|p| r <= p.r_max).or(pieces.last()).expect("radial weight without pieces");
                piece.factors.iter().fold(piece.coeff, |acc, f| acc * powf((r - f.root).abs(), f.power))
            }
            WeightSpec::ProductOfPowers { scale, factors } => factors.iter().fold(*scale, |acc, f| acc * f.value(x)),
            WeightSpec::Custom { value, .. } => value(x),
        }
    }

    pub fn has_zero_level(&self) -> bool {
        match self {
            WeightSpec::Constant { .. } => false,
            WeightSpec::RadialPiecewise { .. } => !self.radial_zeros().is_empty(),
            WeightSpec::ProductOfPowers { factors, .. } => factors
                .iter()
                .any(|f| f.power() > 0.0 && matches!(f, PowerFactor::Sphere { .. } | PowerFactor::Plane { .. })),
            WeightSpec::Custom { zero_level, .. } => zero_level.is_some(),
        }
    }

    /// Signed function changing sign across the zero set, where one is known.
    pub fn zero_level(&self, x: &[f64]) -> Option<f64> {
        match self {
            WeightSpec::Constant { .. } => None,
            WeightSpec::RadialPiecewise { center, .. } => {
                let zeros = self.radial_zeros();
                if zeros.is_empty() {
                    return None;
                }
                let r = dist(x, center);
                Some(zeros.iter().fold(1.0, |acc, z| acc * (r - z)))
            }
            WeightSpec::ProductOfPowers { factors, .. } => {
                let mut any = false;
                let mut level = 1.0;
                for f in factors.iter().filter(|f| f.power() > 0.0) {
                    if let Some(l) = f.level(x) {
                        any = true;
                        level *= l;
                    }
                }
                any.then_some(level)
            }
            WeightSpec::Custom { zero_level, .. } => zero_level.as_ref().map(|z| z(x)),
        }
    }

    fn radial_zeros(&self) -> Vec<f64> {
        let WeightSpec::RadialPiecewise { pieces, .. } = self else {
            return Vec::new();
        };
        let mut zeros: Vec<f64> = Vec::new();
        let mut lo = 0.0;
        for p in pieces {
            for f in &p.factors {
                if f.power > 0.0 && f.root >= lo && f.root <= p.r_max && !zeros.contains(&f.root) {
                    zeros.push(f.root);
                }
            }
            lo = p.r_max;
        }
        zeros
    }

    /// The weight `lambda * a`.
    pub fn scaled(&self, lambda: f64) -> Self {
        match self {
            WeightSpec::Constant { value } => WeightSpec::Constant { value: lambda * value },
            WeightSpec::RadialPiecewise { center, pieces } => WeightSpec::RadialPiecewise {
                center: center.clone(),
                pieces: pieces.iter().map(|p| RadialPiece { coeff: lambda * p.coeff, ..p.clone() }).collect(),
            },
            WeightSpec::ProductOfPowers { scale, factors } => {
                WeightSpec::ProductOfPowers { scale: lambda * scale, factors: factors.clone() }
            }
            WeightSpec::Custom { value, zero_level, reference } => {
                let inner = value.clone();
                WeightSpec::Custom {
                    value: Arc::new(move |x: &[f64]| lambda * inner(x)),
                    zero_level: zero_level.clone(),
                    reference: format!("{lambda} * ({reference})"),
                }
            }
        }
    }

    /// Closed-form description used in reports.
    pub fn reference(&self) -> String {
        match self {
            WeightSpec::Constant { value } => format!("a = {value}"),
            WeightSpec::RadialPiecewise { center, pieces } => {
                let mut s = format!("radial about {center:?}:");
                let mut lo = 0.0;
                for p in pieces {
                    s.push_str(&format!(" r in [{lo}, {}]: {}", p.r_max, p.coeff));
                    for f in &p.factors {
                        if f.root < 0.0 {
                            s.push_str(&format!(" |r + {}|^{}", -f.root, f.power));
                        } else {
                            s.push_str(&format!(" |r - {}|^{}", f.root, f.power));
                        }
                    }
                    s.push(';');
                    lo = p.r_max;
                }
                s.pop();
                s
            }
            WeightSpec::ProductOfPowers { scale, factors } => {
                let mut s = format!("{scale}");
                for f in factors {
                    match f {
                        PowerFactor::Sphere { center, radius, power } => {
                            s.push_str(&format!(" * ||x - {center:?}| - {radius}|^{power}"))
                        }
                        PowerFactor::Plane { normal, offset, power } => {
                            s.push_str(&format!(" * |{normal:?}.x - {offset}|^{power}"))
                        }
                        PowerFactor::Point { center, power } => s.push_str(&format!(" * |x - {center:?}|^{power}")),
                    }
                }
                s
            }
            WeightSpec::Custom { reference, .. } => reference.clone(),
        }
    }
}

/// Weight sampled on a grid.
#[derive(Clone, Debug)]
pub struct WeightField {
    dim: usize,
    values: Vec<f64>,
    cell_values: Vec<f64>,
    conductance: Vec<f64>,
    zero_level: Option<Vec<f64>>,
    a_max: f64,
    eps_zero: f64,
}

/// Evaluate the weight on `grid` with the default zero threshold.
pub fn evaluate_weight(spec: &WeightSpec, grid: &Grid) -> Result<WeightField> {
    evaluate_weight_with(spec, grid, DEFAULT_EPS_ZERO)
}

pub fn evaluate_weight_with(spec: &WeightSpec, grid: &Grid, eps_zero: f64) -> Result<WeightField> {
    let dim = grid.dim();
    let mut x = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    let checked = |v: f64, at: &[f64]| {
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(Error::InvalidWeight { point: at.to_vec(), value: v })
        }
    };

    let mut values = vec![0.0; grid.len()];
    for idx in 0..grid.len() {
        if grid.class(idx) == NodeClass::Exterior {
            continue;
        }
        let phi = grid.level(idx);
        grid.point(idx, &mut x);
        values[idx] = if phi <= 0.0 {
            checked(spec.value(&x), &x)?
        } else {
            // Pinned node outside the domain: use the weight at the boundary
            // crossings of its stencil edges.
            let mut sum = 0.0;
            let mut count = 0usize;
            for nb in grid.neighbors(idx) {
                let psi = grid.level(nb);
                if psi < 0.0 {
                    let t = phi / (phi - psi);
                    grid.point(nb, &mut y);
                    for k in 0..dim {
                        y[k] = x[k] + t * (y[k] - x[k]);
                    }
                    sum += checked(spec.value(&y), &y)?;
                    count += 1;
                }
            }
            sum / count.max(1) as f64
        };
    }

    let a_max = values.iter().copied().fold(0.0_f64, f64::max);
    if !(a_max > 0.0) {
        return Err(Error::InvalidWeight { point: Vec::new(), value: a_max });
    }

    let mut cell_values = vec![0.0; grid.cell_count()];
    for (c, cv) in cell_values.iter_mut().enumerate() {
        if grid.cell_inside(c) {
            grid.cell_center(c, &mut x);
            *cv = checked(spec.value(&x), &x)?;
        }
    }

    let threshold = eps_zero * a_max;
    let mut conductance = vec![0.0; grid.len() * dim];
    for p in 0..grid.len() {
        if grid.class(p) == NodeClass::Exterior {
            continue;
        }
        for k in 0..dim {
            if let Some(q) = grid.neighbor(p, k, true) {
                if grid.class(q) == NodeClass::Exterior {
                    continue;
                }
                let (ap, aq) = (values[p], values[q]);
                if !(ap < threshold && aq < threshold) {
                    conductance[p * dim + k] = 0.5 * (ap + aq);
                }
            }
        }
    }

    let zero_level = spec.has_zero_level().then(|| {
        (0..grid.len())
            .map(|idx| {
                if grid.class(idx) == NodeClass::Exterior {
                    0.0
                } else {
                    grid.point(idx, &mut x);
                    spec.zero_level(&x).unwrap_or(0.0)
                }
            })
            .collect()
    });

    Ok(WeightField { dim, values, cell_values, conductance, zero_level, a_max, eps_zero })
}

impl WeightField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Weight at cell centers (zero for cells outside the domain).
    pub fn cell_values(&self) -> &[f64] {
        &self.cell_values
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn eps_zero(&self) -> f64 {
        self.eps_zero
    }

    /// Value used inside quadratures of negative powers of `a`.
    pub fn floor_value(&self) -> f64 {
        self.eps_zero * self.a_max
    }

    /// Conductance of the edge between stencil neighbours `p` and `q`.
    #[inline]
    pub fn conductance(&self, p: usize, q: usize, grid: &Grid) -> f64 {
        let (lo, hi) = if p < q { (p, q) } else { (q, p) };
        let diff = hi - lo;
        let axis = grid.strides().iter().position(|&s| s == diff).expect("nodes are not stencil neighbours");
        self.conductance[lo * self.dim + axis]
    }

    /// Conductance of the edge from `p` forwards along `axis`.
    #[inline]
    pub fn forward_conductance(&self, p: usize, axis: usize) -> f64 {
        self.conductance[p * self.dim + axis]
    }

    pub fn zero_levels(&self) -> Option<&[f64]> {
        self.zero_level.as_deref()
    }
}

/// Nodes resolving the zero set of the weight.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSet {
    mask: Vec<bool>,
    pub threshold: f64,
    pub touches_domain_boundary: bool,
    count: usize,
}

impl ZeroSet {
    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i)
    }
}

/// Mark the interior nodes that resolve `a^{-1}(0)`.
pub fn detect_zero_set(field: &WeightField, grid: &Grid, eps_zero: f64) -> ZeroSet {
    let threshold = eps_zero * field.a_max;
    let mut mask = vec![false; grid.len()];
    for p in 0..grid.len() {
        if grid.class(p) != NodeClass::Interior {
            continue;
        }
        if field.values[p] < threshold {
            mask[p] = true;
            continue;
        }
        if let Some(levels) = &field.zero_level {
            let lp = levels[p];
            if lp == 0.0 {
                mask[p] = true;
                continue;
            }
            for q in grid.neighbors(p) {
                if grid.class(q) != NodeClass::Interior {
                    continue;
                }
                let lq = levels[q];
                if lp * lq < 0.0 && lp / (lp - lq) <= 0.5 {
                    mask[p] = true;
                    break;
                }
            }
        }
    }
    let touches_domain_boundary = mask
        .iter()
        .enumerate()
        .filter(|(_, m)| **m)
        .any(|(p, _)| grid.neighbors(p).any(|q| grid.class(q) == NodeClass::Boundary));
    let count = mask.iter().filter(|m| **m).count();
    ZeroSet { mask, threshold: eps_zero, touches_domain_boundary, count }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Which balls enter the supremum of the `A_p` quotient.
#[derive(Clone, Debug, PartialEq)]
pub enum BallFamily {
    /// Centers at every interior node, radii `2h, 4h, ...` up to half the
    /// domain extent.
    Dyadic,
    Explicit(Vec<Ball>),
}

/// Dyadic radii `2h * 2^k <= extent / 2`.
pub fn dyadic_radii(grid: &Grid) -> Vec<f64> {
    let mut radii = Vec::new();
    let limit = 0.5 * grid.domain_extent() * (1.0 + 1e-12);
    let mut r = 2.0 * grid.spacing();
    while r <= limit {
        radii.push(r);
        r *= 2.0;
    }
    radii
}

/// The dyadic family of `grid`, materialized (for evaluation on other grids).
pub fn dyadic_balls(grid: &Grid) -> Vec<Ball> {
    let radii = dyadic_radii(grid);
    let mut balls = Vec::new();
    for idx in 0..grid.len() {
        if grid.class(idx) == NodeClass::Interior {
            let center = grid.point_vec(idx);
            for &radius in &radii {
                balls.push(Ball { center: center.clone(), radius });
            }
        }
    }
    balls
}

/// Supremum of the `A_p` quotient over a ball family, with its maximizer.
#[derive(Clone, Debug, PartialEq)]
pub struct ApEstimate {
    pub value: f64,
    pub center: Vec<f64>,
    pub radius: f64,
    pub balls: usize,
}

/// Row-wise prefix sums of the cell samples along axis 0.
struct CellSums {
    m: usize,
    count: Vec<f64>,
    sum_a: Vec<f64>,
    sum_dual: Vec<f64>,
}

impl CellSums {
    fn new(field: &WeightField, grid: &Grid, dual_exponent: f64) -> Self {
        let m = grid.cells_per_axis();
        let rows = grid.cell_count() / m;
        let floor_value = field.floor_value();
        let mut count = vec![0.0; rows * (m + 1)];
        let mut sum_a = vec![0.0; rows * (m + 1)];
        let mut sum_dual = vec![0.0; rows * (m + 1)];
        for row in 0..rows {
            let base = row * (m + 1);
            for i in 0..m {
                let c = row * m + i;
                let (dc, da, dd) = if grid.cell_inside(c) {
                    let a = field.cell_values[c].max(floor_value);
                    (1.0, a, powf(a, dual_exponent))
                } else {
                    (0.0, 0.0, 0.0)
                };
                count[base + i + 1] = count[base + i] + dc;
                sum_a[base + i + 1] = sum_a[base + i] + da;
                sum_dual[base + i + 1] = sum_dual[base + i] + dd;
            }
        }
        CellSums { m, count, sum_a, sum_dual }
    }

    /// (cell count, sum of a, sum of a^dual) over cells centered in the ball.
    fn ball(&self, grid: &Grid, center: &[f64], radius: f64) -> (f64, f64, f64) {
        let dim = grid.dim();
        let h = grid.spacing();
        let lower = grid.lower();
        let m = self.m as i64;
        let r2 = radius * radius;
        let span = |k: usize, half: f64| -> (i64, i64) {
            let lo = ceil((center[k] - half - lower[k]) / h - 0.5) as i64;
            let hi = floor((center[k] + half - lower[k]) / h - 0.5) as i64;
            (lo.max(0), hi.min(m - 1))
        };
        let mut ranges = Vec::with_capacity(dim);
        for k in 1..dim {
            let (lo, hi) = span(k, radius);
            if lo > hi {
                return (0.0, 0.0, 0.0);
            }
            ranges.push((lo, hi));
        }
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let mut total = (0.0, 0.0, 0.0);
        loop {
            let mut d2 = 0.0;
            let mut row = 0usize;
            for (j, &i) in idx.iter().enumerate() {
                let k = j + 1;
                let xc = lower[k] + (i as f64 + 0.5) * h;
                d2 += (xc - center[k]) * (xc - center[k]);
                row += i as usize * grid.cell_strides()[k] / self.m;
            }
            if d2 <= r2 {
                let (lo, hi) = span(0, sqrt(r2 - d2));
                if lo <= hi {
                    let base = row * (self.m + 1);
                    let (a, b) = (base + lo as usize, base + hi as usize + 1);
                    total.0 += self.count[b] - self.count[a];
                    total.1 += self.sum_a[b] - self.sum_a[a];
                    total.2 += self.sum_dual[b] - self.sum_dual[a];
                }
            }
            // advance the multi-index over axes 1..N
            let mut j = 0;
            loop {
                if j == idx.len() {
                    return total;
                }
                if idx[j] < ranges[j].1 {
                    idx[j] += 1;
                    break;
                }
                idx[j] = ranges[j].0;
                j += 1;
            }
        }
    }
}

/// Estimate the `A_p` constant `sup_B (avg_B a) (avg_B a^{-1/(p-1)})^{p-1}`.
pub fn estimate_ap_constant(field: &WeightField, grid: &Grid, p: f64, family: &BallFamily) -> ApEstimate {
    assert!(p > 1.0, "A_p requires p > 1");
    let dual = -1.0 / (p - 1.0);
    let sums = CellSums::new(field, grid, dual);
    let mut best = ApEstimate { value: 0.0, center: Vec::new(), radius: 0.0, balls: 0 };
    let mut visit = |center: &[f64], radius: f64| {
        let (count, sa, sd) = sums.ball(grid, center, radius);
        if count > 0.0 {
            best.balls += 1;
            let q = (sa / count) * powf(sd / count, p - 1.0);
            if q > best.value {
                best.value = q;
                best.center = center.to_vec();
                best.radius = radius;
            }
        }
    };
    match family {
        BallFamily::Dyadic => {
            let radii = dyadic_radii(grid);
            let mut x = vec![0.0; grid.dim()];
            for idx in 0..grid.len() {
                if grid.class(idx) == NodeClass::Interior {
                    grid.point(idx, &mut x);
                    for &r in &radii {
                        visit(&x, r);
                    }
                }
            }
        }
        BallFamily::Explicit(balls) => {
            for b in balls {
                visit(&b.center, b.radius);
            }
        }
    }
    best
}

/// `A_2` estimate over `family`.
pub fn estimate_a2_constant(field: &WeightField, grid: &Grid, family: &BallFamily) -> ApEstimate {
    estimate_ap_constant(field, grid, 2.0, family)
}

/// Quadrature estimate of `|1/a|_{L^t(Omega)} = (int a^{-t})^{1/t}`.
pub fn estimate_lt_norm(field: &WeightField, grid: &Grid, t: f64) -> f64 {
    assert!(t >= 1.0, "L^t norm requires t >= 1");
    let floor_value = field.floor_value();
    let integral: f64 = field
        .cell_values
        .iter()
        .enumerate()
        .filter(|(c, _)| grid.cell_inside(*c))
        .map(|(_, a)| powf(a.max(floor_value), -t))
        .sum::<f64>()
        * grid.node_volume();
    powf(integral, 1.0 / t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityOptions {
    pub eps_zero: f64,
    /// Refined/coarse ratio above which an estimate is flagged divergent.
    pub growth_limit: f64,
    /// Scanned exponents `t`, as multiples of `N/2`.
    pub lt_factors: Vec<f64>,
}

impl Default for AdmissibilityOptions {
    fn default() -> Self {
        AdmissibilityOptions {
            eps_zero: DEFAULT_EPS_ZERO,
            growth_limit: DEFAULT_GROWTH_LIMIT,
            lt_factors: DEFAULT_LT_FACTORS.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Admissible,
    ViolatesA2,
    ViolatesLt,
    ZeroSetTouchesBoundary,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Admissible => "admissible",
            Verdict::ViolatesA2 => "violates-a2",
            Verdict::ViolatesLt => "violates-lt",
            Verdict::ZeroSetTouchesBoundary => "zero-set-touches-boundary",
        }
    }
}

/// One exponent of the `L^t` scan at two resolutions.
#[derive(Clone, Debug, PartialEq)]
pub struct LtRow {
    pub t: f64,
    pub coarse: f64,
    pub fine: f64,
    pub growth: f64,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub n_coarse: usize,
    pub n_fine: usize,
    /// `A_2` estimate over the fine grid's dyadic family.
    pub a2_estimate: f64,
    /// `A_2` estimate over the coarse family with coarse quadrature.
    pub a2_coarse: f64,
    /// Same balls as `a2_coarse`, fine quadrature.
    pub a2_refined: f64,
    pub a2_growth: f64,
    pub a2_divergent: bool,
    pub lt_norms: Vec<LtRow>,
    pub best_t: Option<f64>,
    pub n_over_2: f64,
    pub zero_set_nodes: usize,
    pub touches_domain_boundary: bool,
    pub verdict: Verdict,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.verdict == Verdict::Admissible
    }
}

/// Admissibility of the weight at resolution `n`, with divergence judged
/// against the nested coarse grid of `(n - 1) / 2 + 1` nodes per axis.
pub fn assess_admissibility(
    domain: &DomainSpec,
    weight: &WeightSpec,
    n: usize,
    opts: &AdmissibilityOptions,
) -> Result<AdmissibilityReport> {
    let n_coarse = (n - 1) / 2 + 1;
    let fine_grid = build_grid(domain, n)?;
    let coarse_grid = build_grid(domain, n_coarse)?;
    let fine = evaluate_weight_with(weight, &fine_grid, opts.eps_zero)?;
    let coarse = evaluate_weight_with(weight, &coarse_grid, opts.eps_zero)?;

    let zero = detect_zero_set(&fine, &fine_grid, opts.eps_zero);

    let a2_estimate = estimate_a2_constant(&fine, &fine_grid, &BallFamily::Dyadic).value;
    let coarse_family = BallFamily::Explicit(dyadic_balls(&coarse_grid));
    let a2_coarse = estimate_a2_constant(&coarse, &coarse_grid, &coarse_family).value;
    let a2_refined = estimate_a2_constant(&fine, &fine_grid, &coarse_family).value;
    let a2_growth = a2_refined / a2_coarse;
    let a2_divergent = !(a2_growth <= opts.growth_limit) || !a2_estimate.is_finite();

    let n_over_2 = fine_grid.dim() as f64 / 2.0;
    let lt_norms: Vec<LtRow> = opts
        .lt_factors
        .iter()
        .map(|factor| {
            let t = factor * n_over_2;
            let c = estimate_lt_norm(&coarse, &coarse_grid, t);
            let f = estimate_lt_norm(&fine, &fine_grid, t);
            let growth = f / c;
            LtRow { t, coarse: c, fine: f, growth, stable: growth <= opts.growth_limit && f.is_finite() }
        })
        .collect();
    let best_t = lt_norms
        .iter()
        .filter(|r| r.stable)
        .map(|r| r.t)
        .fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.max(t))));

    let verdict = if zero.touches_domain_boundary {
        Verdict::ZeroSetTouchesBoundary
    } else if a2_divergent {
        Verdict::ViolatesA2
    } else if !best_t.is_some_and(|t| t > n_over_2) {
        Verdict::ViolatesLt
    } else {
        Verdict::Admissible
    };

    Ok(AdmissibilityReport {
        n_coarse,
        n_fine: n,
        a2_estimate,
        a2_coarse,
        a2_refined,
        a2_growth,
        a2_divergent,
        lt_norms,
        best_t,
        n_over_2,
        zero_set_nodes: zero.len(),
        touches_domain_boundary: zero.touches_domain_boundary,
        verdict,
    })
}
