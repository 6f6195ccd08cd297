//! Run reports: JSON on disk, plain text on the terminal.
//!
//! Reports contain no timings, so repeated runs of one configuration produce
//! identical files. Stage timings go to a separate sidecar.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{AppError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub status: Status,
    pub abort: Option<Abort>,
    pub problem: ProblemSummary,
    pub admissibility: Option<AdmissibilitySummary>,
    pub decomposition: Option<DecompositionSummary>,
    pub f2: Vec<F2Row>,
    pub bumps: Vec<BumpRow>,
    pub solutions: Vec<SolutionRow>,
    /// `n_bumps -> count`.
    pub histogram: BTreeMap<usize, usize>,
    pub verdicts: Verdicts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Completed,
    Checked,
    Aborted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortKind {
    Hypothesis,
    Numerical,
    Enumeration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Abort {
    pub stage: String,
    pub kind: AbortKind,
    /// `a1`, `a2`, `f1` or `f2` for hypothesis failures.
    pub hypothesis: Option<String>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub dim: usize,
    pub domain: String,
    pub weight: String,
    pub nonlinearity: String,
    pub gamma: f64,
    pub s_star: f64,
    pub beta_star: f64,
    pub resolution: usize,
    pub spacing: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LtSummary {
    pub t: f64,
    pub coarse: f64,
    pub fine: f64,
    pub growth: f64,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilitySummary {
    pub verdict: String,
    pub n_coarse: usize,
    pub n_fine: usize,
    pub a2_estimate: f64,
    pub a2_coarse: f64,
    pub a2_refined: f64,
    pub a2_growth: f64,
    pub a2_divergent: bool,
    pub lt: Vec<LtSummary>,
    pub best_t: Option<f64>,
    pub n_over_2: f64,
    pub zero_set_nodes: usize,
    pub touches_domain_boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentRow {
    pub id: String,
    pub boundary_manifolds: usize,
    pub nodes: usize,
    pub shell: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub chi: usize,
    /// `i -> j_i`.
    pub j_counts: BTreeMap<usize, usize>,
    pub components: Vec<ComponentRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct F2Row {
    pub component: String,
    pub a_max: f64,
    pub lambda1: f64,
    pub gamma: f64,
    pub margin: f64,
    pub verdict: bool,
    pub eigen_iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpRow {
    pub component: String,
    pub unknowns: usize,
    pub energy: f64,
    pub gradient_norm: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub iterations: usize,
    pub seed_scale: f64,
    pub field: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRow {
    pub index: usize,
    pub subset: Vec<String>,
    pub n_bumps: usize,
    pub energy: f64,
    pub residual: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub zero_trace_max: f64,
    pub w11_seminorm: f64,
    pub residual_ok: bool,
    pub bounds_ok: bool,
    pub zero_trace_ok: bool,
    pub field: Option<String>,
}

impl SolutionRow {
    pub fn passed(&self) -> bool {
        self.residual_ok && self.bounds_ok && self.zero_trace_ok
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub admissible: Option<bool>,
    pub f2: Option<bool>,
    pub solutions_verified: Option<bool>,
    /// Number of solutions equals `2^chi - 1`.
    pub count: Option<bool>,
}

impl Verdicts {
    /// True when no stage failed and every stage that ran passed.
    pub fn all_passed(&self) -> bool {
        [self.admissible, self.f2, self.solutions_verified, self.count].iter().all(|v| v.unwrap_or(true))
    }
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.abort.is_none() && self.verdicts.all_passed()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| AppError::Format { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let p = &self.problem;
        let _ = writeln!(out, "domain        {}", p.domain);
        let _ = writeln!(out, "weight        {}", p.weight);
        let _ = writeln!(out, "nonlinearity  {}", p.nonlinearity);
        let _ = writeln!(out, "grid          n = {}, h = {:.6}, N = {}", p.resolution, p.spacing, p.dim);

        if let Some(a) = &self.admissibility {
            let _ = writeln!(out, "\nadmissibility: {}", a.verdict);
            let _ = writeln!(
                out,
                "  A2 estimate {:.4}  (same balls, n={} -> n={}: {:.4} -> {:.4}, growth {:.3}{})",
                a.a2_estimate,
                a.n_coarse,
                a.n_fine,
                a.a2_coarse,
                a.a2_refined,
                a.a2_growth,
                if a.a2_divergent { ", divergent" } else { "" }
            );
            for row in &a.lt {
                let _ = writeln!(
                    out,
                    "  |1/a|_L^{:<5} {:>12.4e} -> {:>12.4e}  growth {:.3}{}",
                    row.t,
                    row.coarse,
                    row.fine,
                    row.growth,
                    if row.stable { "" } else { "  divergent" }
                );
            }
            match a.best_t {
                Some(t) => {
                    let _ = writeln!(out, "  largest stable t = {t} (needs > {})", a.n_over_2);
                }
                None => {
                    let _ = writeln!(out, "  no stable t (needs > {})", a.n_over_2);
                }
            }
            let _ = writeln!(
                out,
                "  zero set: {} nodes{}",
                a.zero_set_nodes,
                if a.touches_domain_boundary { ", touches the boundary" } else { "" }
            );
        }

        if let Some(d) = &self.decomposition {
            let js: Vec<String> = d.j_counts.iter().map(|(i, j)| format!("j{i}={j}")).collect();
            let _ = writeln!(out, "\ncomponents: chi = {}  {}", d.chi, js.join(" "));
            for c in &d.components {
                let _ = writeln!(
                    out,
                    "  {:<8} {:>8} nodes  {:>6} shell  {} boundary pieces",
                    c.id, c.nodes, c.shell, c.boundary_manifolds
                );
            }
        }

        if !self.f2.is_empty() {
            let _ = writeln!(out, "\nslope gate a_M < gamma / lambda_1:");
            for r in &self.f2 {
                let _ = writeln!(
                    out,
                    "  {:<8} a_M {:.4}  lambda_1 {:.4}  gamma/lambda_1 {:.4}  margin {:+.4}  {}",
                    r.component,
                    r.a_max,
                    r.lambda1,
                    r.gamma / r.lambda1,
                    r.margin,
                    pass(r.verdict)
                );
            }
        }

        if !self.bumps.is_empty() {
            let _ = writeln!(out, "\nbumps:");
            for b in &self.bumps {
                let _ = writeln!(
                    out,
                    "  {:<8} J = {:+.6e}  u in [{:.3e}, {:.6}]  |grad J| {:.2e}  {} steps",
                    b.component, b.energy, b.min_u, b.max_u, b.gradient_norm, b.iterations
                );
            }
        }

        if !self.solutions.is_empty() {
            let _ = writeln!(out, "\nsolutions: {}", self.solutions.len());
            let hist: Vec<String> = self.histogram.iter().map(|(n, c)| format!("{n}:{c}")).collect();
            let _ = writeln!(out, "  by number of bumps  {}", hist.join("  "));
            for s in &self.solutions {
                let _ = writeln!(
                    out,
                    "  #{:<4} {:<24} J = {:+.6e}  residual {:.2e}  max u {:.6}  {}",
                    s.index,
                    s.subset.join("+"),
                    s.energy,
                    s.residual,
                    s.max_u,
                    pass(s.passed())
                );
            }
        }

        if let Some(a) = &self.abort {
            let _ = writeln!(out);
            match &a.hypothesis {
                Some(h) => {
                    let _ = writeln!(out, "aborted at {}: hypothesis ({h}) fails: {}", a.stage, a.message);
                }
                None => {
                    let _ = writeln!(out, "aborted at {}: {}", a.stage, a.message);
                }
            }
        }
        let _ = writeln!(out, "\nresult: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}
