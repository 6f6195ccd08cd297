//! Acceptance suite. Each test prints one line `criterion N: PASS|FAIL ...`
//! and then asserts it.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use multibump::config::{RunConfig, WeightConfig};
use multibump::pipeline::{run_pipeline, Mode, RunOutcome};
use multibump::report::AbortKind;
use multibump_core::prelude::*;
use multibump_core::verify::weak_residual_with;
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn load(name: &str) -> RunConfig {
    RunConfig::load(&config_path(name)).unwrap()
}

fn verdict(criterion: u32, ok: bool, detail: String) {
    println!("criterion {criterion}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion}: {detail}");
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

struct Problem {
    grid: Grid,
    field: WeightField,
    zero: ZeroSet,
    decomposition: Decomposition,
}

fn problem(domain: &DomainSpec, weight: &WeightSpec, n: usize) -> Problem {
    let grid = build_grid(domain, n).unwrap();
    let field = evaluate_weight(weight, &grid).unwrap();
    let zero = detect_zero_set(&field, &grid, field.eps_zero());
    let decomposition = decompose_components(&grid, &zero).unwrap();
    Problem { grid, field, zero, decomposition }
}

fn unit_weight() -> WeightSpec {
    WeightSpec::Constant { value: 1.0 }
}

#[test]
fn criterion_1_multiplicity() {
    let config = load("remark.toml");
    let start = Instant::now();
    let outcome = single_threaded(|| run_pipeline(&config, Mode::Solve).unwrap());
    let secs = start.elapsed().as_secs_f64();
    let r = &outcome.report;
    let chi = r.decomposition.as_ref().map(|d| d.chi);
    let bounds = r.solutions.iter().all(|s| s.min_u >= -1e-8 && s.max_u <= 1.0 + 1e-8 && s.zero_trace_max == 0.0);
    let ok =
        chi == Some(2) && r.solutions.len() == 3 && r.solutions.iter().all(|s| s.passed()) && bounds && secs < 60.0;
    let worst = r.solutions.iter().map(|s| s.residual).fold(0.0, f64::max);
    verdict(
        1,
        ok,
        format!("chi={chi:?} solutions={} max residual {worst:.2e} in {secs:.1}s on one thread", r.solutions.len()),
    );
}

#[test]
fn criterion_2_binomial_histogram() {
    let config = load("rings.toml");
    let start = Instant::now();
    let outcome = run_pipeline(&config, Mode::Solve).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let r = &outcome.report;
    let hist: Vec<usize> = (1..=4).map(|k| r.histogram.get(&k).copied().unwrap_or(0)).collect();
    let chi = r.decomposition.as_ref().map(|d| d.chi);
    let ok = chi == Some(4)
        && r.solutions.len() == 15
        && hist == [4, 6, 4, 1]
        && r.solutions.iter().all(|s| s.passed())
        && secs < 120.0;
    verdict(2, ok, format!("chi={chi:?} solutions={} histogram {hist:?} in {secs:.1}s", r.solutions.len()));
}

fn dense_laplacian(m: usize, h: f64) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(m * m, m * m);
    let w = 1.0 / (h * h);
    for j in 0..m {
        for i in 0..m {
            let k = j * m + i;
            a[(k, k)] = 4.0 * w;
            if i > 0 {
                a[(k, k - 1)] = -w;
            }
            if i + 1 < m {
                a[(k, k + 1)] = -w;
            }
            if j > 0 {
                a[(k, k - m)] = -w;
            }
            if j + 1 < m {
                a[(k, k + m)] = -w;
            }
        }
    }
    a
}

fn lambda1(domain: &DomainSpec, n: usize, opts: &EigenOptions) -> (Problem, f64) {
    let p = problem(domain, &unit_weight(), n);
    let l = dirichlet_lambda1(&p.decomposition.components[0], &p.grid, opts).unwrap().lambda1;
    (p, l)
}

#[test]
fn criterion_3_eigenvalues() {
    let square_exact = 2.0 * PI * PI;
    let (_, square) = lambda1(&DomainSpec::unit_box(2), 129, &EigenOptions::default());
    let square_err = (square - square_exact).abs() / square_exact;

    let disk_exact = 5.7832;
    let (_, disk) = lambda1(&DomainSpec::ball(vec![0.0, 0.0], 1.0), 129, &EigenOptions::default());
    let disk_err = (disk - disk_exact).abs() / disk_exact;

    let tight = EigenOptions { rel_tol: 1e-14, ..EigenOptions::default() };
    let (p, coarse) = lambda1(&DomainSpec::unit_box(2), 9, &tight);
    let h = p.grid.spacing();
    let closed = 8.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
    let dense = dense_laplacian(7, h).symmetric_eigenvalues().min();
    let coarse_err = (coarse - closed).abs() / closed;
    let dense_err = (dense - closed).abs() / closed;

    let ok = square_err < 5e-3 && disk_err < 1e-2 && coarse_err < 1e-10 && dense_err < 1e-10;
    verdict(
        3,
        ok,
        format!(
            "square {square:.5} (rel {square_err:.2e}), disk {disk:.5} (rel {disk_err:.2e}), n=9 rel {coarse_err:.1e} (dense oracle {dense_err:.1e})"
        ),
    );
}

#[test]
fn criterion_4_gradient_consistency() {
    let start = Instant::now();
    let p = problem(&DomainSpec::ball(vec![0.0, 0.0], 2.0), &WeightSpec::cusp_radial(2), 65);
    let spec = NonlinearitySpec::logistic(10.0, 1.0);
    let trunc = truncate_nonlinearity(&spec).unwrap();
    let c = p.decomposition.components.iter().max_by_key(|c| c.len()).unwrap();
    let energy = assemble_energy(c, &p.field, &trunc, &p.grid);
    let n = energy.len();
    let mut rng = StdRng::seed_from_u64(2024);
    let delta = 1e-6 * spec.s_star;
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-spec.beta_star..spec.s_star + 1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let mut g = vec![0.0; n];
        energy.gradient(&u, &mut g);
        let shifted = |t: f64| -> Vec<f64> { u.iter().zip(&v).map(|(a, b)| a + t * b).collect() };
        let fd = (energy.value(&shifted(delta)) - energy.value(&shifted(-delta))) / (2.0 * delta);
        let exact: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
        worst = worst.max((fd - exact).abs() / exact.abs());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        4,
        n >= 500 && worst < 1e-5 && secs < 5.0,
        format!("{n} unknowns, worst relative error {worst:.2e} over 10 fields in {secs:.2}s"),
    );
}

/// `u <- (u + K^{-1} h^2 f*(u)) / 2` with a dense Cholesky factor of the five-point matrix.
fn fixed_point_oracle(m: usize, h: f64, gamma: f64, s_star: f64) -> Vec<f64> {
    let k = dense_laplacian(m, 1.0);
    let chol = k.cholesky().unwrap();
    let f = |s: f64| if s >= s_star { 0.0 } else { gamma * s.abs() * (1.0 - s / s_star) };
    let mut u = DVector::from_element(m * m, 0.5 * s_star);
    for _ in 0..20_000 {
        let rhs = u.map(|s| h * h * f(s));
        let next = 0.5 * &u + 0.5 * chol.solve(&rhs);
        let change = (&next - &u).amax();
        u = next;
        if change < 1e-15 {
            break;
        }
    }
    u.as_slice().to_vec()
}

#[test]
fn criterion_5_minimizer_oracle() {
    let p = problem(&DomainSpec::unit_box(2), &unit_weight(), 33);
    let spec = NonlinearitySpec::logistic(30.0, 1.0);
    let trunc = truncate_nonlinearity(&spec).unwrap();
    let c = &p.decomposition.components[0];
    let eig = dirichlet_lambda1(c, &p.grid, &EigenOptions::default()).unwrap();
    let f2 = check_hypothesis_f2(c, &p.field, eig.lambda1, spec.gamma);
    let energy = assemble_energy(c, &p.field, &trunc, &p.grid);
    let bump = minimize_energy(&energy, &eig, &f2, &p.grid, &SolverOptions::default()).unwrap();
    let oracle = fixed_point_oracle(31, p.grid.spacing(), spec.gamma, spec.s_star);
    let diff = bump.values.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    verdict(5, diff < 1e-4 && bump.max_u > 0.0, format!("max |u - u_oracle| = {diff:.2e}, max u {:.6}", bump.max_u));
}

fn hypothesis_abort(outcome: &RunOutcome) -> Option<String> {
    outcome.report.abort.as_ref().filter(|a| a.kind == AbortKind::Hypothesis).and_then(|a| a.hypothesis.clone())
}

#[test]
fn criterion_6_hypothesis_gates() {
    // (i) slope gate
    let p = problem(&DomainSpec::unit_box(2), &unit_weight(), 33);
    let spec = NonlinearitySpec::logistic(10.0, 1.0);
    let trunc = truncate_nonlinearity(&spec).unwrap();
    let c = &p.decomposition.components[0];
    let eig = dirichlet_lambda1(c, &p.grid, &EigenOptions::default()).unwrap();
    let f2 = check_hypothesis_f2(c, &p.field, eig.lambda1, spec.gamma);
    let energy = assemble_energy(c, &p.field, &trunc, &p.grid);
    let refused =
        minimize_energy(&energy, &eig, &f2, &p.grid, &SolverOptions::default()).err().and_then(|e| e.hypothesis())
            == Some(Hypothesis::F2);
    let mut gate_config = load("constant.toml");
    gate_config.nonlinearity = toml::from_str("kind = \"logistic\"\ngamma = 10.0\ns_star = 1.0").unwrap();
    let gate_run = run_pipeline(&gate_config, Mode::Solve).unwrap();
    let gate_ok = !f2.verdict && refused && hypothesis_abort(&gate_run).as_deref() == Some("f2");

    // (ii) quadratic point zero, n = 65 -> 129
    let quad = run_pipeline(&load("quadratic.toml"), Mode::Solve).unwrap();
    let a = quad.report.admissibility.as_ref().unwrap();
    let lt_flags = a.lt.iter().filter(|row| row.t >= a.n_over_2).all(|row| !row.stable);
    let max_growth = a.lt.iter().map(|row| row.growth).fold(a.a2_growth, f64::max);
    let quad_ok = a.n_coarse == 65
        && a.n_fine == 129
        && a.a2_divergent
        && lt_flags
        && max_growth > 2.0
        && hypothesis_abort(&quad).as_deref() == Some("a2");

    // (iii) zero set touching the boundary
    let seg = run_pipeline(&load("segment.toml"), Mode::Solve).unwrap();
    let seg_ok = hypothesis_abort(&seg).as_deref() == Some("a1");

    verdict(
        6,
        gate_ok && quad_ok && seg_ok,
        format!(
            "(i) a_M {:.3} vs gamma/lambda_1 {:.3}, refused {refused}, abort {:?}; (ii) A2 growth {:.3}, max growth {max_growth:.3}, abort {:?}; (iii) abort {:?}",
            f2.a_max,
            f2.gamma / f2.lambda1,
            hypothesis_abort(&gate_run),
            a.a2_growth,
            hypothesis_abort(&quad),
            hypothesis_abort(&seg)
        ),
    );
}

#[test]
fn criterion_7_scaling_invariance() {
    let base_config = load("remark.toml");
    let mut scaled_config = base_config.clone();
    match &mut scaled_config.weight {
        WeightConfig::RadialPiecewise { pieces, .. } => pieces.iter_mut().for_each(|p| p.coeff *= 2.0),
        other => panic!("unexpected weight {other:?}"),
    }
    scaled_config.nonlinearity = toml::from_str("kind = \"logistic\"\ngamma = 20.0\ns_star = 1.0").unwrap();

    let base = run_pipeline(&base_config, Mode::Solve).unwrap();
    let scaled = run_pipeline(&scaled_config, Mode::Solve).unwrap();
    let (b, s) = (base.solved.as_ref().unwrap(), scaled.solved.as_ref().unwrap());
    let mut field_diff = 0.0_f64;
    let mut energy_err = 0.0_f64;
    for (x, y) in b.solutions.iter().zip(&s.solutions) {
        let u = x.materialize(&b.bumps, &b.grid);
        let v = y.materialize(&s.bumps, &s.grid);
        field_diff = u.iter().zip(&v).map(|(p, q)| (p - q).abs()).fold(field_diff, f64::max);
        energy_err = energy_err.max((y.energy - 2.0 * x.energy).abs() / x.energy.abs());
    }
    let count = b.solutions.len() == 3 && s.solutions.len() == 3;
    verdict(
        7,
        count && field_diff <= 1e-8 && energy_err <= 1e-10,
        format!("max field change {field_diff:.2e}, max energy ratio error {energy_err:.2e}"),
    );
}

fn manufactured_residual(n: usize) -> f64 {
    let p = problem(&DomainSpec::unit_box(2), &unit_weight(), n);
    let exact = |q: usize| {
        let x = p.grid.point_vec(q);
        (PI * x[0]).sin() * (PI * x[1]).sin()
    };
    let u: Vec<f64> =
        (0..p.grid.len()).map(|q| if p.grid.class(q) == NodeClass::Interior { exact(q) } else { 0.0 }).collect();
    weak_residual_with(&u, &p.field, &p.zero, &p.grid, |q, _| 2.0 * PI * PI * exact(q))
}

#[test]
fn criterion_8_manufactured_convergence() {
    let coarse = manufactured_residual(33);
    let fine = manufactured_residual(65);
    let ratio = coarse / fine;
    verdict(8, ratio >= 3.0, format!("residual {coarse:.3e} -> {fine:.3e}, ratio {ratio:.2}"));
}

fn solve_into(dir: &Path) {
    let status = Command::new(env!("CARGO_BIN_EXE_multibump"))
        .arg("--config")
        .arg(config_path("remark.toml"))
        .arg("--out")
        .arg(dir)
        .arg("solve")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
}

fn output_files(dir: &Path) -> Vec<PathBuf> {
    let mut files = vec![PathBuf::from("report.json")];
    for sub in ["bumps", "solutions"] {
        let mut names: Vec<PathBuf> =
            fs::read_dir(dir.join(sub)).unwrap().map(|e| Path::new(sub).join(e.unwrap().file_name())).collect();
        names.sort();
        files.extend(names);
    }
    files
}

#[test]
fn criterion_9_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let (first, second) = (tmp.path().join("first"), tmp.path().join("second"));
    solve_into(&first);
    solve_into(&second);
    let files = output_files(&first);
    let same_listing = files == output_files(&second);
    let differing: Vec<String> = files
        .iter()
        .filter(|f| fs::read(first.join(f)).ok() != fs::read(second.join(f)).ok())
        .map(|f| f.display().to_string())
        .collect();
    verdict(
        9,
        same_listing && differing.is_empty() && files.len() == 6,
        format!("{} files compared, differing: {differing:?}", files.len()),
    );
}
