//! Stages of a run, from admissibility checks to verified multi-bump solutions.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use multibump_core::energy::{assemble_energy, minimize_energy, truncate_nonlinearity, BumpSolution};
use multibump_core::grid::{build_grid, Grid};
use multibump_core::multibump::{enumerate_all, MultiBumpSolution};
use multibump_core::spectral::{check_hypothesis_f2, dirichlet_lambda1, EigenPair, F2Entry};
use multibump_core::topology::{decompose_components, Decomposition};
use multibump_core::verify::{check_conclusions, VerificationReport};
use multibump_core::weights::{
    assess_admissibility, detect_zero_set, evaluate_weight_with, AdmissibilityReport, Verdict, WeightField, ZeroSet,
};
use multibump_core::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::io::read_field_csv;
use crate::report::{
    Abort, AbortKind, AdmissibilitySummary, BumpRow, ComponentRow, DecompositionSummary, F2Row, LtSummary,
    ProblemSummary, RunReport, SolutionRow, Status, Verdicts,
};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Hypotheses only: admissibility, components and the slope gate.
    Check,
    Solve,
}

/// Wall-clock seconds per stage.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub stages: Vec<(String, f64)>,
}

impl Timings {
    fn record(&mut self, stage: &str, start: Instant) {
        self.stages.push((stage.to_string(), start.elapsed().as_secs_f64()));
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, f64> = self.stages.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let mut s = serde_json::to_string_pretty(&map).expect("timings serialize");
        s.push('\n');
        s
    }
}

/// Everything needed to export or re-verify fields after a run.
#[derive(Debug)]
pub struct Solved {
    pub grid: Grid,
    pub field: WeightField,
    pub zero: ZeroSet,
    pub decomposition: Decomposition,
    pub bumps: Vec<BumpSolution>,
    pub solutions: Vec<MultiBumpSolution>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub timings: Timings,
    pub solved: Option<Solved>,
}

impl RunOutcome {
    /// Process exit status: 0 when every verdict passed, 1 on a failed
    /// verdict or hypothesis, 2 on numerical or enumeration failures.
    pub fn exit_code(&self) -> i32 {
        match &self.report.abort {
            Some(a) if a.kind != AbortKind::Hypothesis => 2,
            _ if self.report.passed() => 0,
            _ => 1,
        }
    }
}

fn abort_from(stage: &str, err: &Error) -> Abort {
    let (kind, hypothesis) = match err {
        Error::TooManyComponents { .. } => (AbortKind::Enumeration, None),
        e => match e.hypothesis() {
            Some(h) => (AbortKind::Hypothesis, Some(h.label().to_string())),
            None => (AbortKind::Numerical, None),
        },
    };
    Abort { stage: stage.to_string(), kind, hypothesis, message: err.to_string() }
}

fn admissibility_summary(r: &AdmissibilityReport) -> AdmissibilitySummary {
    AdmissibilitySummary {
        verdict: r.verdict.label().to_string(),
        n_coarse: r.n_coarse,
        n_fine: r.n_fine,
        a2_estimate: r.a2_estimate,
        a2_coarse: r.a2_coarse,
        a2_refined: r.a2_refined,
        a2_growth: r.a2_growth,
        a2_divergent: r.a2_divergent,
        lt: r
            .lt_norms
            .iter()
            .map(|l| LtSummary { t: l.t, coarse: l.coarse, fine: l.fine, growth: l.growth, stable: l.stable })
            .collect(),
        best_t: r.best_t,
        n_over_2: r.n_over_2,
        zero_set_nodes: r.zero_set_nodes,
        touches_domain_boundary: r.touches_domain_boundary,
    }
}

fn admissibility_abort(r: &AdmissibilityReport, growth_limit: f64) -> Option<Abort> {
    let (hypothesis, message) = match r.verdict {
        Verdict::Admissible => return None,
        Verdict::ZeroSetTouchesBoundary => {
            ("a1", "the zero set of the weight reaches the boundary of the domain".to_string())
        }
        Verdict::ViolatesA2 => (
            "a2",
            format!(
                "the A2 estimate grows by a factor {:.3} under refinement (limit {}), so the weight is not in A2",
                r.a2_growth, growth_limit
            ),
        ),
        Verdict::ViolatesLt => (
            "a2",
            match r.best_t {
                Some(t) => {
                    format!("1/a is only stable in L^t up to t = {t}, which does not exceed N/2 = {}", r.n_over_2)
                }
                None => format!("no L^t norm of 1/a is stable under refinement (N/2 = {})", r.n_over_2),
            },
        ),
    };
    Some(Abort {
        stage: "admissibility".into(),
        kind: AbortKind::Hypothesis,
        hypothesis: Some(hypothesis.into()),
        message,
    })
}

/// Run the stages of `config` in order. Hypothesis and numerical failures end
/// the run with a partial report; only configuration errors are returned as `Err`.
pub fn run_pipeline(config: &RunConfig, mode: Mode) -> Result<RunOutcome> {
    let domain = config.domain()?;
    let weight = config.weight()?;
    let spec = config.nonlinearity()?;
    let n = config.grid.resolution;
    let mut timings = Timings::default();

    let grid_start = Instant::now();
    let grid = build_grid(&domain, n)?;
    let problem = ProblemSummary {
        dim: grid.dim(),
        domain: domain.describe(),
        weight: weight.reference(),
        nonlinearity: spec.describe(),
        gamma: spec.gamma,
        s_star: spec.s_star,
        beta_star: spec.beta_star,
        resolution: n,
        spacing: grid.spacing(),
    };
    let mut report = RunReport {
        status: Status::Aborted,
        abort: None,
        problem,
        admissibility: None,
        decomposition: None,
        f2: Vec::new(),
        bumps: Vec::new(),
        solutions: Vec::new(),
        histogram: BTreeMap::new(),
        verdicts: Verdicts::default(),
    };
    timings.record("grid", grid_start);

    macro_rules! bail {
        ($stage:expr, $err:expr) => {{
            report.abort = Some(abort_from($stage, &$err));
            return Ok(RunOutcome { report, timings, solved: None });
        }};
    }

    let start = Instant::now();
    let admissibility = match assess_admissibility(&domain, &weight, n, &config.admissibility_options()) {
        Ok(r) => r,
        Err(e) => bail!("admissibility", e),
    };
    timings.record("admissibility", start);
    report.admissibility = Some(admissibility_summary(&admissibility));
    report.verdicts.admissible = Some(admissibility.is_admissible());
    if let Some(abort) = admissibility_abort(&admissibility, config.tolerances.growth_limit) {
        report.abort = Some(abort);
        return Ok(RunOutcome { report, timings, solved: None });
    }

    let start = Instant::now();
    let field = match evaluate_weight_with(&weight, &grid, config.tolerances.eps_zero) {
        Ok(f) => f,
        Err(e) => bail!("weight", e),
    };
    let zero = detect_zero_set(&field, &grid, config.tolerances.eps_zero);
    let decomposition = match decompose_components(&grid, &zero) {
        Ok(d) => d,
        Err(e) => bail!("decomposition", e),
    };
    timings.record("decomposition", start);
    report.decomposition = Some(DecompositionSummary {
        chi: decomposition.chi,
        j_counts: decomposition.j_counts.clone(),
        components: decomposition
            .components
            .iter()
            .map(|c| ComponentRow {
                id: c.id.to_string(),
                boundary_manifolds: c.boundary_manifolds,
                nodes: c.len(),
                shell: c.shell.len(),
            })
            .collect(),
    });

    let trunc = match truncate_nonlinearity(&spec) {
        Ok(t) => t,
        Err(e) => bail!("nonlinearity", e),
    };

    let start = Instant::now();
    let eigen_opts = config.eigen_options();
    let eigen: std::result::Result<Vec<(EigenPair, F2Entry)>, Error> = decomposition
        .components
        .par_iter()
        .map(|c| {
            let pair = dirichlet_lambda1(c, &grid, &eigen_opts)?;
            let f2 = check_hypothesis_f2(c, &field, pair.lambda1, spec.gamma);
            Ok((pair, f2))
        })
        .collect();
    let eigen = match eigen {
        Ok(v) => v,
        Err(e) => bail!("eigenvalues", e),
    };
    timings.record("eigenvalues", start);
    report.f2 = eigen
        .iter()
        .map(|(pair, f)| F2Row {
            component: f.component.to_string(),
            a_max: f.a_max,
            lambda1: f.lambda1,
            gamma: f.gamma,
            margin: f.margin,
            verdict: f.verdict,
            eigen_iterations: pair.iterations,
        })
        .collect();
    let f2_ok = eigen.iter().all(|(_, f)| f.verdict);
    report.verdicts.f2 = Some(f2_ok);
    if !f2_ok {
        let failing: Vec<String> = eigen
            .iter()
            .filter(|(_, f)| !f.verdict)
            .map(|(_, f)| {
                format!("{} (a_M = {:.4}, gamma/lambda_1 = {:.4})", f.component, f.a_max, f.gamma / f.lambda1)
            })
            .collect();
        report.abort = Some(Abort {
            stage: "slope-gate".into(),
            kind: AbortKind::Hypothesis,
            hypothesis: Some("f2".into()),
            message: format!("a_M >= gamma / lambda_1 on {}", failing.join(", ")),
        });
        return Ok(RunOutcome { report, timings, solved: None });
    }
    if mode == Mode::Check {
        report.status = Status::Checked;
        return Ok(RunOutcome { report, timings, solved: None });
    }

    let start = Instant::now();
    let solver_opts = config.solver_options();
    let bumps: std::result::Result<Vec<BumpSolution>, Error> = decomposition
        .components
        .par_iter()
        .zip(eigen.par_iter())
        .map(|(c, (pair, f2))| {
            let energy = assemble_energy(c, &field, &trunc, &grid);
            minimize_energy(&energy, pair, f2, &grid, &solver_opts)
        })
        .collect();
    let bumps = match bumps {
        Ok(b) => b,
        Err(e) => bail!("minimization", e),
    };
    timings.record("minimization", start);
    report.bumps = bumps
        .iter()
        .map(|b| BumpRow {
            component: b.component.to_string(),
            unknowns: b.nodes.len(),
            energy: b.energy,
            gradient_norm: b.gradient_norm,
            min_u: b.min_u,
            max_u: b.max_u,
            iterations: b.iterations,
            seed_scale: b.seed_scale,
            field: None,
        })
        .collect();

    let start = Instant::now();
    let solutions = match enumerate_all(&bumps, &config.enumeration_options()) {
        Ok(s) => s,
        Err(e) => bail!("enumeration", e),
    };
    let tol = config.verify_tolerances();
    let rows: Vec<SolutionRow> = solutions
        .par_iter()
        .enumerate()
        .map(|(index, sol)| {
            let u = sol.materialize(&bumps, &grid);
            let v = check_conclusions(&u, &field, &zero, &spec, &grid, &tol);
            SolutionRow {
                index: index + 1,
                subset: sol.subset.iter().map(|id| id.to_string()).collect(),
                n_bumps: sol.n_bumps,
                energy: sol.energy,
                residual: v.residual_norm,
                min_u: v.min_u,
                max_u: v.max_u,
                zero_trace_max: v.zero_trace_max,
                w11_seminorm: v.w11_seminorm,
                residual_ok: v.residual_ok,
                bounds_ok: v.bounds_ok,
                zero_trace_ok: v.zero_trace_ok,
                field: None,
            }
        })
        .collect();
    timings.record("verification", start);
    for row in &rows {
        *report.histogram.entry(row.n_bumps).or_insert(0) += 1;
    }
    report.verdicts.solutions_verified = Some(rows.iter().all(SolutionRow::passed));
    report.verdicts.count = Some(rows.len() == (1usize << decomposition.chi) - 1);
    report.solutions = rows;
    report.status = Status::Completed;

    Ok(RunOutcome { report, timings, solved: Some(Solved { grid, field, zero, decomposition, bumps, solutions }) })
}

/// Result of checking a stored field against a configuration.
#[derive(Clone, Debug)]
pub struct FieldCheck {
    pub report: VerificationReport,
    pub residual_tol: f64,
    pub bound: f64,
}

/// Check the solution conclusions for a CSV field written on the grid of `config`.
pub fn verify_field_file(config: &RunConfig, path: &Path) -> Result<FieldCheck> {
    let domain = config.domain()?;
    let weight = config.weight()?;
    let spec = config.nonlinearity()?;
    let grid = build_grid(&domain, config.grid.resolution)?;
    let field = evaluate_weight_with(&weight, &grid, config.tolerances.eps_zero)?;
    let zero = detect_zero_set(&field, &grid, config.tolerances.eps_zero);
    let u = read_field_csv(path, &grid)?;
    let tol = config.verify_tolerances();
    Ok(FieldCheck {
        report: check_conclusions(&u, &field, &zero, &spec, &grid, &tol),
        residual_tol: tol.residual_for(&spec, &grid),
        bound: tol.bound_for(&spec),
    })
}
