//! Truncated nonlinearity, discrete energy and its minimization on one component.
//!
//! The energy of a nodal field `u` on the unknowns of a component is
//!
//! ```text
//! J(u) = 1/2 sum_edges c_e (u_p - u_q)^2 h^(N-2) - h^N sum_nodes F*(u_p)
//! ```
//!
//! with `c_e` the edge conductance and zero data on every node outside the
//! unknowns. Minimization is a descent method in the metric of the stiffness
//! matrix `K`: the search direction is `-K^{-1} grad J`, which makes a unit
//! step one damped fixed-point update `u <- K^{-1} (h^N f*(u))`.

use alloc::{format, string::String, sync::Arc, vec, vec::Vec};
use core::fmt;

use crate::grid::Grid;
use crate::linalg::{pcg, StencilOperator, UNMAPPED};
use crate::math::{dot, max_abs, powi};
use crate::spectral::{EigenPair, F2Entry};
use crate::topology::{Component, ComponentId};
use crate::weights::WeightField;
use crate::{Error, Hypothesis, Result};

/// `f : R -> R`.
pub type ScalarFn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum NonlinearityKind {
    /// `gamma |s| (1 - s / s_star)` for `s <= s_star`, zero above.
    LogisticDefault,
    Custom {
        f: ScalarFn1,
        description: String,
    },
}

impl fmt::Debug for NonlinearityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonlinearityKind::LogisticDefault => f.write_str("LogisticDefault"),
            NonlinearityKind::Custom { description, .. } => {
                f.debug_struct("Custom").field("description", description).finish_non_exhaustive()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    /// Slope of `f` at `0+`.
    pub gamma: f64,
    /// Upper zero of `f`.
    pub s_star: f64,
    /// Truncation depth below zero.
    pub beta_star: f64,
}

impl NonlinearitySpec {
    /// Default logistic-type nonlinearity with `beta_star = s_star / 2`.
    pub fn logistic(gamma: f64, s_star: f64) -> Self {
        NonlinearitySpec { kind: NonlinearityKind::LogisticDefault, gamma, s_star, beta_star: 0.5 * s_star }
    }

    pub fn custom(f: ScalarFn1, description: String, gamma: f64, s_star: f64, beta_star: f64) -> Self {
        NonlinearitySpec { kind: NonlinearityKind::Custom { f, description }, gamma, s_star, beta_star }
    }

    /// `f(s)`, untruncated.
    pub fn eval(&self, s: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::LogisticDefault => {
                if s <= self.s_star {
                    self.gamma * s.abs() * (1.0 - s / self.s_star)
                } else {
                    0.0
                }
            }
            NonlinearityKind::Custom { f, .. } => f(s),
        }
    }

    /// The nonlinearity `lambda f`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let kind = match &self.kind {
            NonlinearityKind::LogisticDefault => NonlinearityKind::LogisticDefault,
            NonlinearityKind::Custom { f, description } => {
                let inner = f.clone();
                NonlinearityKind::Custom {
                    f: Arc::new(move |s| lambda * inner(s)),
                    description: format!("{lambda} * ({description})"),
                }
            }
        };
        NonlinearitySpec { kind, gamma: lambda * self.gamma, ..self.clone() }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            NonlinearityKind::LogisticDefault => {
                format!("f(s) = {} |s| (1 - s/{}) for s <= {}, 0 above", self.gamma, self.s_star, self.s_star)
            }
            NonlinearityKind::Custom { description, .. } => format!("f(s) = {description}"),
        }
    }
}

/// Composite Simpson table of `F*` on `[-beta_star, s_star]`.
#[derive(Clone, Debug)]
struct PrimitiveTable {
    /// Panel widths on `[0, s_star]` and on `[-beta_star, 0]`.
    up: f64,
    down: f64,
    /// `F*` at `k * up`.
    positive: Vec<f64>,
    /// `F*` at `-k * down`.
    negative: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TruncatedNonlinearity {
    spec: NonlinearitySpec,
    f_low: f64,
    table: Option<PrimitiveTable>,
}

const SAMPLES: usize = 1000;

fn invalid(hypothesis: Hypothesis, detail: String) -> Error {
    Error::InvalidNonlinearity { hypothesis, detail }
}

/// Validate `f` and build `f*` and its primitive.
pub fn truncate_nonlinearity(spec: &NonlinearitySpec) -> Result<TruncatedNonlinearity> {
    let NonlinearitySpec { gamma, s_star, beta_star, .. } = *spec;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(Hypothesis::F2, format!("gamma must be positive and finite, got {gamma}")));
    }
    if !(s_star > 0.0 && s_star.is_finite()) {
        return Err(invalid(Hypothesis::F1, format!("s_star must be positive and finite, got {s_star}")));
    }
    if !(beta_star > 0.0 && beta_star.is_finite()) {
        return Err(invalid(Hypothesis::F1, format!("beta_star must be positive and finite, got {beta_star}")));
    }
    let scale = gamma * s_star;
    let f0 = spec.eval(0.0);
    if !(f0.abs() <= 1e-12 * scale) {
        return Err(invalid(Hypothesis::F1, format!("f(0) = {f0}, expected 0")));
    }
    let fs = spec.eval(s_star);
    if !(fs.abs() <= 1e-12 * scale) {
        return Err(invalid(Hypothesis::F1, format!("f(s_star) = {fs}, expected 0")));
    }
    for k in 1..SAMPLES {
        let s = s_star * k as f64 / SAMPLES as f64;
        let v = spec.eval(s);
        if !(v > 0.0) {
            return Err(invalid(Hypothesis::F1, format!("f({s}) = {v} is not positive on (0, s_star)")));
        }
    }
    for k in 0..SAMPLES {
        let s = -beta_star * (SAMPLES - k) as f64 / SAMPLES as f64;
        let v = spec.eval(s);
        if !(v > 0.0) {
            return Err(invalid(Hypothesis::F1, format!("f({s}) = {v} is not positive on [-beta_star, 0)")));
        }
    }
    let delta = 1e-6 * s_star;
    let slope = spec.eval(delta) / delta;
    if !((slope - gamma).abs() <= 1e-3 * gamma) {
        return Err(invalid(Hypothesis::F2, format!("slope f(s)/s near 0+ is {slope}, but gamma = {gamma}")));
    }

    let f_low = spec.eval(-beta_star);
    let table = match spec.kind {
        NonlinearityKind::LogisticDefault => None,
        NonlinearityKind::Custom { .. } => Some(build_table(spec)),
    };
    Ok(TruncatedNonlinearity { spec: spec.clone(), f_low, table })
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn cumulate(spec: &NonlinearitySpec, width: f64, panels: usize, sign: f64) -> Vec<f64> {
    let mut out = vec![0.0; panels + 1];
    for k in 0..panels {
        let (a, b) = (sign * k as f64 * width, sign * (k + 1) as f64 * width);
        out[k + 1] = out[k] + simpson(|s| spec.eval(s), a, b);
    }
    out
}

fn build_table(spec: &NonlinearitySpec) -> PrimitiveTable {
    let width = spec.s_star / SAMPLES as f64;
    let below = libm::ceil(spec.beta_star / width) as usize;
    let down = spec.beta_star / below as f64;
    PrimitiveTable {
        up: width,
        down,
        positive: cumulate(spec, width, SAMPLES, 1.0),
        negative: cumulate(spec, down, below, -1.0),
    }
}

impl TruncatedNonlinearity {
    pub fn spec(&self) -> &NonlinearitySpec {
        &self.spec
    }

    /// `f*(s)`.
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        if s <= -self.spec.beta_star {
            self.f_low
        } else if s >= self.spec.s_star {
            0.0
        } else {
            self.spec.eval(s)
        }
    }

    /// `F*(s) = int_0^s f*`.
    pub fn primitive(&self, s: f64) -> f64 {
        let (beta, s_star) = (self.spec.beta_star, self.spec.s_star);
        if s <= -beta {
            return self.primitive_inner(-beta) + self.f_low * (s + beta);
        }
        if s >= s_star {
            return self.primitive_inner(s_star);
        }
        self.primitive_inner(s)
    }

    /// `F*(b) - F*(a)`, evaluated without forming the two primitives when the
    /// interval is short.
    pub fn primitive_increment(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let breaks = [-self.spec.beta_star, 0.0, self.spec.s_star];
        let mut total = 0.0;
        let mut start = lo;
        for &k in breaks.iter().chain(core::iter::once(&f64::INFINITY)) {
            if start >= hi {
                break;
            }
            if k <= start {
                continue;
            }
            let end = hi.min(k);
            total += self.piece_increment(start, end);
            start = end;
        }
        sign * total
    }

    /// Increment over `[a, b]` lying within one branch of `f*`.
    fn piece_increment(&self, a: f64, b: f64) -> f64 {
        let (beta, s_star) = (self.spec.beta_star, self.spec.s_star);
        if b <= -beta {
            return self.f_low * (b - a);
        }
        if a >= s_star {
            return 0.0;
        }
        match &self.table {
            None => {
                let g = self.spec.gamma;
                let quad = (a * a + a * b + b * b) / (3.0 * s_star);
                let mid = 0.5 * (a + b);
                if a >= 0.0 {
                    g * (b - a) * (mid - quad)
                } else {
                    g * (b - a) * (quad - mid)
                }
            }
            Some(t) if b - a <= t.up.min(t.down) => simpson(|x| self.spec.eval(x), a, b),
            Some(_) => self.primitive(b) - self.primitive(a),
        }
    }

    fn primitive_inner(&self, s: f64) -> f64 {
        match &self.table {
            None => {
                let g = self.spec.gamma;
                let ss = self.spec.s_star;
                let s2 = s * s;
                if s >= 0.0 {
                    g * (0.5 * s2 - s2 * s / (3.0 * ss))
                } else {
                    g * (-0.5 * s2 + s2 * s / (3.0 * ss))
                }
            }
            Some(t) => {
                let (width, cumulative, sign) =
                    if s >= 0.0 { (t.up, &t.positive, 1.0) } else { (t.down, &t.negative, -1.0) };
                let k = (libm::floor(s.abs() / width) as usize).min(cumulative.len() - 1);
                cumulative[k] + simpson(|x| self.spec.eval(x), sign * k as f64 * width, s)
            }
        }
    }
}

/// `F*(s)`.
pub fn primitive_f(trunc: &TruncatedNonlinearity, s: f64) -> f64 {
    trunc.primitive(s)
}

/// Discrete energy on the unknowns of one component.
#[derive(Clone, Debug)]
pub struct DiscreteEnergy {
    component: ComponentId,
    nodes: Vec<usize>,
    /// Position of each unknown in `component.nodes`.
    slots: Vec<usize>,
    stiffness: StencilOperator,
    volume: f64,
    trunc: TruncatedNonlinearity,
}

pub fn assemble_energy(
    component: &Component,
    field: &WeightField,
    trunc: &TruncatedNonlinearity,
    grid: &Grid,
) -> DiscreteEnergy {
    let dim = grid.dim();
    let h = grid.spacing();
    let edge_scale = powi(h, dim as i32 - 2);
    let mut nodes = Vec::with_capacity(component.len());
    let mut slots = Vec::with_capacity(component.len());
    for (slot, &p) in component.nodes.iter().enumerate() {
        if grid.neighbors(p).any(|q| field.conductance(p, q, grid) > 0.0) {
            nodes.push(p);
            slots.push(slot);
        }
    }
    let mut local = vec![UNMAPPED; grid.len()];
    for (i, &p) in nodes.iter().enumerate() {
        local[p] = i as u32;
    }
    let stiffness = StencilOperator::assemble(grid, &nodes, &local, |p, q| field.conductance(p, q, grid) * edge_scale);
    DiscreteEnergy {
        component: component.id,
        nodes,
        slots,
        stiffness,
        volume: grid.node_volume(),
        trunc: trunc.clone(),
    }
}

impl DiscreteEnergy {
    pub fn component(&self) -> ComponentId {
        self.component
    }

    /// Grid indices of the unknowns, ascending.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn truncation(&self) -> &TruncatedNonlinearity {
        &self.trunc
    }

    /// `K u`.
    pub fn apply_stiffness(&self, u: &[f64], out: &mut [f64]) {
        self.stiffness.apply(u, out);
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        let potential: f64 = u.iter().map(|&s| self.trunc.primitive(s)).sum();
        0.5 * self.stiffness.quadratic_form(u) - self.volume * potential
    }

    pub fn gradient(&self, u: &[f64], out: &mut [f64]) {
        self.stiffness.apply(u, out);
        for (g, &s) in out.iter_mut().zip(u) {
            *g -= self.volume * self.trunc.eval(s);
        }
    }

    /// `J(u + alpha d) - J(u)` without cancellation between the two energies.
    fn increment(&self, u: &[f64], ku: &[f64], d: &[f64], dkd: f64, alpha: f64) -> f64 {
        let mut linear = 0.0;
        let mut potential = 0.0;
        for i in 0..u.len() {
            linear += ku[i] * d[i];
            potential += self.trunc.primitive_increment(u[i], u[i] + alpha * d[i]);
        }
        alpha * linear + 0.5 * alpha * alpha * dkd - self.volume * potential
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Stop when `max |grad J| < tol_grad`; `None` means `1e-8 * gamma * s_star * h^N`.
    pub tol_grad: Option<f64>,
    pub armijo_c: f64,
    pub max_iter: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// The seed scale is halved at most this many times.
    pub max_halvings: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_grad: None,
            armijo_c: 1e-4,
            max_iter: 100_000,
            cg_tol: 1e-12,
            cg_max_iter: 50_000,
            max_halvings: 30,
        }
    }
}

impl SolverOptions {
    pub fn gradient_tolerance(&self, trunc: &TruncatedNonlinearity, grid: &Grid) -> f64 {
        self.tol_grad.unwrap_or_else(|| 1e-8 * trunc.spec.gamma * trunc.spec.s_star * grid.node_volume())
    }
}

/// Converged minimizer on one component.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpSolution {
    pub component: ComponentId,
    /// Grid indices, ascending.
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
    pub energy: f64,
    /// `max |grad J|` at `values`.
    pub gradient_norm: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub iterations: usize,
    /// `s_0` with `J(s_0 e_1) < 0`.
    pub seed_scale: f64,
}

/// Minimize the energy from the seed `s_0 e_1`.
pub fn minimize_energy(
    energy: &DiscreteEnergy,
    eigen: &EigenPair,
    f2: &F2Entry,
    grid: &Grid,
    opts: &SolverOptions,
) -> Result<BumpSolution> {
    if !f2.verdict {
        return Err(Error::HypothesisViolation {
            hypothesis: Hypothesis::F2,
            detail: format!(
                "on {}: a_M = {} is not below gamma / lambda_1 = {}; refusing to seed",
                f2.component,
                f2.a_max,
                f2.gamma / f2.lambda1
            ),
        });
    }
    let n = energy.len();
    if n == 0 {
        return Err(Error::NumericalFailure(format!("{} has no unknowns", energy.component)));
    }
    let s_star = energy.trunc.spec.s_star;
    let e1: Vec<f64> = energy.slots.iter().map(|&k| eigen.e1[k]).collect();

    let mut u = vec![0.0; n];
    let mut scale = s_star;
    let mut seeded = false;
    for _ in 0..=opts.max_halvings {
        for (ui, ei) in u.iter_mut().zip(&e1) {
            *ui = scale * ei;
        }
        if energy.value(&u) < 0.0 {
            seeded = true;
            break;
        }
        scale *= 0.5;
    }
    if !seeded {
        return Err(Error::SeedFailure { component: format!("{}", energy.component), smallest_scale: scale * 2.0 });
    }
    let seed_scale = scale;

    let tol = opts.gradient_tolerance(&energy.trunc, grid);
    let mut g = vec![0.0; n];
    let mut ku = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut kd = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut alpha = 1.0_f64;
    let mut iterations = 0;
    loop {
        energy.stiffness.apply(&u, &mut ku);
        for i in 0..n {
            g[i] = ku[i] - energy.volume * energy.trunc.eval(u[i]);
        }
        let gnorm = max_abs(&g);
        if gnorm < tol {
            break;
        }
        if iterations == opts.max_iter {
            return Err(Error::NumericalFailure(format!(
                "descent on {} did not converge in {} iterations (max |grad J| = {gnorm:e})",
                energy.component, opts.max_iter
            )));
        }
        iterations += 1;

        // d = -K^{-1} g, warm-started from the previous direction
        for v in trial.iter_mut().zip(&g) {
            *v.0 = -v.1;
        }
        pcg(&energy.stiffness, &trial, &mut d, opts.cg_tol, opts.cg_max_iter)?;
        energy.stiffness.apply(&d, &mut kd);
        let dkd = dot(&d, &kd);
        let slope = dot(&g, &d);
        if !(slope < 0.0) {
            return Err(Error::NumericalFailure(format!(
                "no descent direction on {} (g.d = {slope:e})",
                energy.component
            )));
        }

        alpha = (2.0 * alpha).min(1.0);
        loop {
            let dj = energy.increment(&u, &ku, &d, dkd, alpha);
            if dj <= opts.armijo_c * alpha * slope {
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-20 {
                return Err(Error::NumericalFailure(format!(
                    "line search stalled on {} (max |grad J| = {gnorm:e})",
                    energy.component
                )));
            }
        }
        for i in 0..n {
            u[i] += alpha * d[i];
        }
    }

    let value = energy.value(&u);
    let min_u = u.iter().copied().fold(f64::INFINITY, f64::min);
    let max_u = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BumpSolution {
        component: energy.component,
        nodes: energy.nodes.clone(),
        values: u,
        energy: value,
        gradient_norm: max_abs(&g),
        min_u,
        max_u,
        iterations,
        seed_scale,
    })
}
