//! Acceptance run: one PASS/FAIL line per numbered criterion. Exits nonzero
//! if any gating criterion fails. Criterion 10 is a wall-clock comparison and
//! is reported without gating.

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use ridge_sketch::bench::{run_bench, BenchConfig};
use ridge_sketch::core::decomp::{singular_values, HouseholderQr};
use ridge_sketch::core::matrix::relative_error;
use ridge_sketch::core::oracle::{
    augmented_block_frobenius_sq, cond_preconditioned, direct_solve, iteration_bound,
    measure_epsilon_classic, measure_epsilon_statdim,
};
use ridge_sketch::core::{
    build_cholesky, build_gram, estimate_sd, exact_sd, generate_problem, run_sweep,
    AugmentedForm, AugmentedOperator, DenseMatrix, Embedding, EmbeddingKind, EmbeddingSpec,
    GeneratedProblem, GeneratorSpec, GramSide, LowRankPreconditioner, LsqrConfig, Method,
    NoClock, Orientation, SdSource, SketchChoice, Spectrum, SvdSketch, SweepRequest,
    SweepResult,
};
use ridge_sketch::grid::parse_grid;

const TOL: f64 = 1e-8;
const SHAPES: [(usize, usize); 4] = [(600, 40), (600, 200), (40, 600), (200, 600)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn problem(m: usize, n: usize, sigma_min: f64, seed: u64) -> GeneratedProblem {
    generate_problem(&GeneratorSpec {
        m,
        n,
        spectrum: Spectrum::ExpDecay {
            max: 1.0,
            min: sigma_min,
        },
        noise_norm: 1e-3,
        seed,
    })
    .unwrap()
}

fn randn(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Run {
    g: GeneratedProblem,
    method: Method,
    result: SweepResult,
}

/// The sketch a finished sweep used, redrawn from its recorded spec.
fn redraw_sketch(run: &Run) -> (DenseMatrix, GramSide) {
    let a = run.g.problem.a();
    let spec = run.result.embedding.expect("preconditioned sweep");
    match run.result.orientation {
        Orientation::Overdetermined => {
            let e = Embedding::draw(spec, a.rows()).unwrap();
            (e.apply_left(a).unwrap(), GramSide::Left)
        }
        Orientation::Underdetermined => {
            let e = Embedding::draw(spec, a.cols()).unwrap();
            (e.apply_right(a).unwrap(), GramSide::Right)
        }
    }
}

fn criterion_1() -> (Outcome, Vec<Run>) {
    let t0 = Instant::now();
    let lambdas = parse_grid("10:1e-10:13log").unwrap();
    let mut runs = Vec::new();
    let mut worst = (0.0f64, String::new());
    for (i, &(m, n)) in SHAPES.iter().enumerate() {
        for method in [Method::Cholesky, Method::LowRank] {
            let sigma_min = if method == Method::Cholesky { 1e-6 } else { 1e-12 };
            let g = problem(m, n, sigma_min, 100 + i as u64);
            let result = {
                let mut req = SweepRequest::new(&g.problem, lambdas.clone(), method);
                req.solver = LsqrConfig::with_tolerance(TOL);
                req.sketch = SketchChoice::Auto {
                    kind: EmbeddingKind::Gaussian,
                    seed: 3,
                };
                if method == Method::Cholesky {
                    req.oversampling = 4.0;
                } else {
                    req.sd = SdSource::Supplied(
                        lambdas.iter().map(|&l| exact_sd(&g.sigma, l).unwrap()).collect(),
                    );
                }
                run_sweep(&req, &NoClock).unwrap()
            };
            for r in &result.records {
                let x = direct_solve(g.problem.a(), g.problem.b(), r.lambda).unwrap();
                let err = relative_error(&r.solution, &x);
                if err > worst.0 {
                    worst = (err, format!("{m}x{n} {} λ={:.1e}", method.name(), r.lambda));
                }
            }
            runs.push(Run { g, method, result });
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = worst.0 <= 1e-6 && secs <= 60.0;
    let detail = format!(
        "{} solves, worst relative error {:.2e} ({}), {secs:.1} s",
        runs.len() * lambdas.len(),
        worst.0,
        worst.1
    );
    (outcome(pass, detail), runs)
}

fn criterion_2() -> Outcome {
    let g = problem(2000, 50, 1e-6, 200);
    let a = g.problem.a();
    let (mut skipped, mut passed, mut worst) = (0, 0, 0.0f64);
    for seed in 0..100 {
        let e = Embedding::draw(EmbeddingSpec::new(EmbeddingKind::Gaussian, 200, seed), 2000)
            .unwrap();
        let eps = measure_epsilon_classic(&e.to_dense(), a).unwrap();
        if eps >= 1.0 {
            skipped += 1;
            continue;
        }
        let c = build_gram(&e.apply_left(a).unwrap(), GramSide::Left);
        let bound = (1.0 + eps) / (1.0 - eps);
        let mut ok = true;
        for lambda in [1e-4, 1e-1, 10.0] {
            let p = build_cholesky(&c, lambda).unwrap();
            let kappa = cond_preconditioned(a, lambda, &p, Orientation::Overdetermined).unwrap();
            worst = worst.max(kappa / bound);
            ok &= kappa <= bound * (1.0 + 1e-8);
        }
        passed += ok as usize;
    }
    outcome(
        passed == 100,
        format!("{passed}/100 seeds within bound, {skipped} skipped (ε ≥ 1), max κ/bound {worst:.3}"),
    )
}

fn criterion_3() -> Outcome {
    let g = problem(2000, 50, 1e-12, 300);
    let a = g.problem.a();
    let mut pass = true;
    let mut parts = Vec::new();
    for lambda in [1e-4, 1e-1, 10.0] {
        let sd = exact_sd(&g.sigma, lambda).unwrap();
        let s = 4 * (sd.ceil() as usize).max(1);
        let (mut below, mut violations) = (0, 0);
        for seed in 0..100 {
            let e = Embedding::draw(EmbeddingSpec::new(EmbeddingKind::Gaussian, s, seed), 2000)
                .unwrap();
            let eps = measure_epsilon_statdim(&e.to_dense(), a, lambda).unwrap().epsilon;
            if eps >= 1.0 {
                continue;
            }
            below += 1;
            let svd = SvdSketch::from_sketch(&e.apply_left(a).unwrap(), GramSide::Left);
            let p = LowRankPreconditioner::from_svd(&svd, lambda, svd.rank_capacity()).unwrap();
            let kappa = cond_preconditioned(a, lambda, &p, Orientation::Overdetermined).unwrap();
            if kappa > ((1.0 + eps) / (1.0 - eps)).sqrt() * (1.0 + 1e-8) {
                violations += 1;
            }
        }
        pass &= below >= 95 && violations == 0;
        parts.push(format!("λ={lambda:.0e} s={s}: ε<1 in {below}/100, {violations} bound violations"));
    }
    outcome(pass, parts.join("; "))
}

/// Textbook Gram product used as the reference for the factor checks.
fn naive_gram(y: &DenseMatrix, side: GramSide, lambda: f64) -> DenseMatrix {
    let (dim, inner) = match side {
        GramSide::Left => (y.cols(), y.rows()),
        GramSide::Right => (y.rows(), y.cols()),
    };
    DenseMatrix::from_fn(dim, dim, |i, j| {
        let mut s = if i == j { lambda } else { 0.0 };
        for k in 0..inner {
            s += match side {
                GramSide::Left => y.get(k, i) * y.get(k, j),
                GramSide::Right => y.get(i, k) * y.get(j, k),
            };
        }
        s
    })
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_chol, mut worst_lr) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let side = if i % 2 == 0 { GramSide::Left } else { GramSide::Right };
        let dim = rng.random_range(2..=30);
        let other = rng.random_range(1..=3 * dim);
        let y = match side {
            GramSide::Left => randn(&mut rng, other, dim),
            GramSide::Right => randn(&mut rng, dim, other),
        };
        let lambda = log_uniform(&mut rng, -6.0, 1.0);
        let want = naive_gram(&y, side, lambda);
        let scale = want.frobenius_norm();

        let r = build_cholesky(&build_gram(&y, side), lambda).unwrap().r().clone();
        worst_chol = worst_chol.max(r.tr_matmul(&r).sub(&want).frobenius_norm() / scale);

        let svd = SvdSketch::from_sketch(&y, side);
        let p = LowRankPreconditioner::from_svd(&svd, lambda, svd.rank_capacity()).unwrap();
        let r = p.to_dense_factor();
        worst_lr = worst_lr.max(r.tr_matmul(&r).sub(&want).frobenius_norm() / scale);
    }
    outcome(
        worst_chol <= 1e-11 && worst_lr <= 1e-11,
        format!("worst relative Frobenius error: cholesky {worst_chol:.2e}, low-rank {worst_lr:.2e}"),
    )
}

fn criterion_5(runs: &[Run]) -> Outcome {
    let (mut total, mut over, mut squared_ok) = (0, Vec::new(), 0);
    for run in runs {
        let a = run.g.problem.a();
        let (y, side) = redraw_sketch(run);
        let svd = (run.method == Method::LowRank).then(|| SvdSketch::from_sketch(&y, side));
        let gram = (run.method == Method::Cholesky).then(|| build_gram(&y, side));
        for r in &run.result.records {
            let kappa = match (&gram, &svd) {
                (Some(c), _) => {
                    let p = build_cholesky(c, r.lambda).unwrap();
                    cond_preconditioned(a, r.lambda, &p, run.result.orientation).unwrap()
                }
                (_, Some(svd)) => {
                    let p = LowRankPreconditioner::from_svd(svd, r.lambda, r.rank.unwrap()).unwrap();
                    cond_preconditioned(a, r.lambda, &p, run.result.orientation).unwrap()
                }
                _ => unreachable!(),
            };
            let bound = iteration_bound(kappa, TOL);
            total += 1;
            // Same formula with the normal-equations condition number κ².
            squared_ok += (r.report.iterations <= iteration_bound(kappa * kappa, TOL)) as usize;
            if r.report.iterations > bound {
                over.push(format!(
                    "{}x{} {} λ={:.1e}: {} > {bound} (κ={kappa:.2})",
                    a.rows(),
                    a.cols(),
                    run.method.name(),
                    r.lambda,
                    r.report.iterations
                ));
            }
        }
    }
    let mut detail = format!(
        "{}/{total} solves within the iteration bound ({squared_ok}/{total} with κ² in place of κ)",
        total - over.len()
    );
    if !over.is_empty() {
        detail.push_str("; over: ");
        detail.push_str(&over.join(", "));
    }
    outcome(over.is_empty(), detail)
}

fn criterion_6() -> Outcome {
    let g = problem(2000, 50, 1e-12, 600);
    let a = g.problem.a();
    let lambdas = parse_grid("10:1e-10:13log").unwrap();
    let exact: Vec<f64> = lambdas.iter().map(|&l| exact_sd(&g.sigma, l).unwrap()).collect();
    let (mut good, mut lo, mut hi) = (0, f64::INFINITY, 0.0f64);
    for seed in 0..100 {
        let e = Embedding::draw(EmbeddingSpec::new(EmbeddingKind::Gaussian, 50, seed), 2000)
            .unwrap();
        let svd = SvdSketch::from_sketch(&e.apply_left(a).unwrap(), GramSide::Left);
        let mut ok = true;
        for (&l, &sd) in lambdas.iter().zip(&exact) {
            let ratio = estimate_sd(svd.singular_values(), l).unwrap() / sd;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            ok &= (0.5..=2.0).contains(&ratio);
        }
        good += ok as usize;
    }
    outcome(
        good >= 95,
        format!("{good}/100 seeds with every ratio in [0.5, 2]; ratios ranged {lo:.3}..{hi:.3}"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let m = rng.random_range(2..=40);
        let n = rng.random_range(2..=40);
        let a = randn(&mut rng, m, n);
        let lambda = log_uniform(&mut rng, -6.0, 2.0);
        let sd = exact_sd(&singular_values(&a), lambda).unwrap();
        let f = augmented_block_frobenius_sq(&a, lambda).unwrap();
        worst = worst.max((f - sd).abs() / sd.max(1.0));
    }
    outcome(worst <= 1e-10, format!("worst |‖U₁‖²_F − sd| = {worst:.2e}"))
}

fn criterion_8(runs: &[Run]) -> Outcome {
    let (mut count, mut worst) = (0, 0.0f64);
    for run in runs.iter().filter(|r| r.result.orientation == Orientation::Underdetermined) {
        let a = run.g.problem.a();
        for r in &run.result.records {
            let mut z = r.solution.clone();
            z.extend_from_slice(r.augmented_tail.as_ref().unwrap());
            let dt = AugmentedOperator::new(a, r.lambda, AugmentedForm::SideBySide)
                .unwrap()
                .to_dense()
                .transpose();
            let q = HouseholderQr::new(&dt).thin_q();
            let proj = q.matvec(&q.tr_matvec(&z));
            let off: Vec<f64> = z.iter().zip(&proj).map(|(p, q)| p - q).collect();
            worst = worst.max(norm(&off) / norm(&z));
            count += 1;
        }
    }
    outcome(
        worst <= 1e-6,
        format!("{count} solutions, worst distance from range(Dᵀ) {worst:.2e} relative"),
    )
}

fn criterion_9() -> Outcome {
    let g = problem(5000, 100, 1e-6, 900);
    let lambdas = parse_grid("10:1e-10:13log").unwrap();
    let mut pre = SweepRequest::new(&g.problem, lambdas.clone(), Method::Cholesky);
    pre.solver = LsqrConfig::with_tolerance(1e-6);
    pre.sketch = SketchChoice::Fixed(EmbeddingSpec::new(EmbeddingKind::Gaussian, 400, 3));
    let mut plain = SweepRequest::new(&g.problem, lambdas, Method::Unpreconditioned);
    plain.solver = LsqrConfig::with_tolerance(1e-6);
    plain.solver.max_iterations = Some(100 * 100);
    let pre = run_sweep(&pre, &NoClock).unwrap();
    let plain = run_sweep(&plain, &NoClock).unwrap();
    let mut failing = Vec::new();
    let mut cells = Vec::new();
    for (p, u) in pre.records.iter().zip(&plain.records) {
        let (ip, iu) = (p.report.iterations, u.report.iterations);
        cells.push(format!("{:.0e}:{ip}/{iu}", p.lambda));
        if ip as f64 > 0.2 * iu as f64 {
            failing.push(format!("{:.1e}", p.lambda));
        }
    }
    let mut detail = format!("preconditioned/unpreconditioned iterations {}", cells.join(" "));
    if !failing.is_empty() {
        detail.push_str(&format!("; ratio > 20% at λ = {}", failing.join(", ")));
    }
    outcome(failing.is_empty(), detail)
}

fn criterion_10() -> Outcome {
    let g = problem(12000, 500, 1e-6, 1000);
    let cfg = BenchConfig {
        methods: vec![Method::Cholesky, Method::QrBaseline],
        lambdas: parse_grid("10:1e-10:15log").unwrap(),
        runs: 5,
        kind: EmbeddingKind::Srtt,
        oversampling: 20.0,
        seed: 1,
        solver: LsqrConfig::with_tolerance(TOL),
    };
    let report = run_bench(&g.problem, &cfg).unwrap();
    let chol = report.timing(Method::Cholesky).unwrap().median_per_lambda_s;
    let qr = report.timing(Method::QrBaseline).unwrap().median_per_lambda_s;
    outcome(
        chol < qr,
        format!("median per-λ time: chol {:.4} s, qr_baseline {:.4} s (s = 10000)", chol, qr),
    )
}

fn criterion_11(runs: &[Run]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut count, mut worst) = (0, 0.0f64);
    for run in runs.iter().filter(|r| r.method == Method::LowRank) {
        let (y, side) = redraw_sketch(run);
        let svd = SvdSketch::from_sketch(&y, side);
        for r in &run.result.records {
            let rank = r.rank.unwrap();
            let p = LowRankPreconditioner::from_svd(&svd, r.lambda, rank).unwrap();
            let dim = svd.dim();
            let mut x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let mut flops = 0u64;
            p.apply_inverse_counted(&mut x, &mut flops);
            let budget = 3 * (2 * dim * rank + rank * rank + dim);
            worst = worst.max(flops as f64 / budget as f64);
            count += 1;
        }
    }
    outcome(
        worst <= 1.0,
        format!("{count} applies, worst flops/budget {worst:.3}"),
    )
}

fn report(id: usize, gating: bool, o: &Outcome) {
    let tag = match (o.pass, gating) {
        (true, _) => "PASS",
        (false, true) => "FAIL",
        (false, false) => "FAIL (informational)",
    };
    println!("criterion {id:>2} {tag}: {}", o.detail);
    std::io::stdout().flush().ok();
}

fn main() -> ExitCode {
    let mut failed = Vec::new();
    let mut record = |id: usize, gating: bool, o: Outcome| {
        report(id, gating, &o);
        if gating && !o.pass {
            failed.push(id);
        }
    };

    let (c1, runs) = criterion_1();
    record(1, true, c1);
    record(2, true, criterion_2());
    record(3, true, criterion_3());
    record(4, true, criterion_4());
    record(5, true, criterion_5(&runs));
    record(6, true, criterion_6());
    record(7, true, criterion_7());
    record(8, true, criterion_8(&runs));
    record(9, true, criterion_9());
    record(10, false, criterion_10());
    record(11, true, criterion_11(&runs));

    if failed.is_empty() {
        println!("acceptance: all gating criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
