//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::time::{Duration, Instant};

use hyponorm::dense::ORBIT_SLACK;
use hyponorm::xcheck::{corpus, jn_identity_residual, jn_route_residual, CorpusSpec};
use hyponorm::{
    closed_range_check, continuous_example_check, douglas_factor, lambda_sequence, matrix_of_system, minimal_lambda,
    orbit_bound_check, xcheck_kernels, xcheck_lambda, AnalysisOptions, CertificateKind, Complex, DenseTolerances,
    LambdaBound, LambdaSequence, Matrix, QuadratureGrid, Scope, System, Theorem,
};
use hyponorm_cli::commands::{analyze_text, reverify};
use hyponorm_cli::{catalog, OptionsDocument};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;
const CORPUS: usize = 100;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn systems() -> Vec<System> {
    corpus(SEED, CORPUS, &CorpusSpec::default())
}

fn rel_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn lambda_sequences() -> Outcome {
    let quarter = match lambda_sequence(0.25, 50) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let four = match lambda_sequence(4.0, 50) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    // 1/sqrt(1/4) = 2 and 1/sqrt(4) = 1/2, raised to n(n-1)/2.
    let exact = quarter.values[3] == 8.0
        && quarter.values[4] == 64.0
        && quarter.values[5] == 1024.0
        && four.values[5] == 2f64.powi(-10);
    let mut worst_value = 0.0f64;
    let mut worst_log = 0.0f64;
    for seq in [&quarter, &four] {
        let log_base = -0.5 * seq.lambda.ln();
        for n in 0..=50 {
            let closed = LambdaSequence::closed_form(seq.lambda, n);
            let v = seq.values[n];
            if closed.is_finite() && closed > f64::MIN_POSITIVE {
                worst_value = worst_value.max(rel_gap(v, closed));
            } else if v != closed {
                worst_value = f64::INFINITY;
            }
            let oracle = log_base * (n * n.saturating_sub(1) / 2) as f64;
            worst_log = worst_log.max(rel_gap(seq.log_values[n], oracle));
        }
    }
    outcome(
        exact && worst_value <= 1e-12 && worst_log <= 1e-12,
        format!("exact powers {exact}, value gap {worst_value:.1e}, log gap {worst_log:.1e} for n <= 50"),
    )
}

fn lambda_agreement(systems: &[System]) -> Outcome {
    let opts = AnalysisOptions::default();
    let dense = DenseTolerances::default();
    let mut bad = Vec::new();
    let mut infinite = 0;
    for (i, sys) in systems.iter().enumerate() {
        match xcheck_lambda(sys, 1e-6, &opts, &dense) {
            Ok(a) if a.agree => infinite += usize::from(a.criterion == LambdaBound::Infinite),
            Ok(a) => bad.push(format!("#{i}: {:?} vs {:?}", a.criterion, a.dense)),
            Err(e) => bad.push(format!("#{i}: {e}")),
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{}/{} agree within 1e-6 ({infinite} jointly infinite){}",
            systems.len() - bad.len(),
            systems.len(),
            first(&bad)
        ),
    )
}

fn jn_routes(systems: &[System]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut routes = 0.0f64;
    let mut identity = 0.0f64;
    for sys in systems {
        routes = routes.max(jn_route_residual(sys, 6));
        match jn_identity_residual(sys, 6, 20, &mut rng) {
            Ok(r) => identity = identity.max(r),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    outcome(
        routes <= 1e-10 && identity <= 1e-9,
        format!("route gap {routes:.1e}, identity residual {identity:.1e} over 20 vectors, n <= 6"),
    )
}

fn closed_range_growth(systems: &[System]) -> Outcome {
    let opts = AnalysisOptions {
        max_n: 10,
        ..AnalysisOptions::default()
    };
    let mut tested = 0;
    let mut bad = Vec::new();
    for (i, sys) in systems.iter().enumerate() {
        let report = closed_range_check(sys, &opts);
        if !report.preimage_invariant || report.degenerate {
            continue;
        }
        tested += 1;
        // Independent recomputation: J_n from the direct route against delta^n.
        let delta = report.delta.expect("non-degenerate report has delta");
        let j = sys.jn_direct(1);
        let cut = 1e-12 * j.values().iter().fold(0.0f64, |a, b| a.max(*b));
        let support: Vec<usize> = (0..sys.len()).filter(|&k| j.values()[k] > cut).collect();
        for n in 1..=10 {
            let jn = sys.jn_direct(n);
            let floor = delta.powi(n as i32) * (1.0 - 1e-12);
            if support.iter().any(|&k| jn.values()[k] < floor) {
                bad.push(format!("#{i} at n = {n}"));
                break;
            }
        }
        if !report.growth_holds() {
            bad.push(format!("#{i}: reported growth failure"));
        }
    }
    outcome(
        bad.is_empty() && tested > 0,
        format!(
            "J_n >= delta^n for n <= 10 on {tested} preimage-invariant systems{}",
            first(&bad)
        ),
    )
}

fn kernel_supports(systems: &[System]) -> Outcome {
    let opts = AnalysisOptions::default();
    let dense = DenseTolerances::default();
    let mut bad = Vec::new();
    let mut excluded = 0;
    for (i, sys) in systems.iter().enumerate() {
        match xcheck_kernels(sys, &opts, &dense) {
            Ok(k) if k.passed() => excluded += usize::from(!k.support_answer),
            Ok(k) => bad.push(format!("#{i}: {k:?}")),
            Err(e) => bad.push(format!("#{i}: {e}")),
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{}/{} match SVD ({excluded} with Ker(W) not in Ker(W*)){}",
            systems.len() - bad.len(),
            systems.len(),
            first(&bad)
        ),
    )
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex<f64> {
    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_operator(rng: &mut ChaCha8Rng) -> Matrix {
    let n = rng.gen_range(1..=10);
    let entries = (0..n * n).map(|_| random_complex(rng)).collect();
    let masses = rng
        .gen_bool(0.5)
        .then(|| (0..n).map(|_| rng.gen_range(0.1..10.0)).collect());
    Matrix::new(n, entries, masses).expect("valid random operator")
}

/// `X·Yᴴ` of rank `r < n`; with `Y = X` the ranges coincide.
fn low_rank_operator(rng: &mut ChaCha8Rng, symmetric_range: bool) -> Matrix {
    let n = rng.gen_range(2..=8);
    let r = rng.gen_range(1..n);
    let x: Vec<Complex<f64>> = (0..n * r).map(|_| random_complex(rng)).collect();
    let y: Vec<Complex<f64>> = if symmetric_range {
        let mix: Vec<Complex<f64>> = (0..r * r).map(|_| random_complex(rng)).collect();
        (0..n * r)
            .map(|idx| {
                let (i, j) = (idx / r, idx % r);
                (0..r).map(|k| x[i * r + k] * mix[k * r + j]).sum()
            })
            .collect()
    } else {
        (0..n * r).map(|_| random_complex(rng)).collect()
    };
    let entries = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            (0..r).map(|k| x[i * r + k] * y[j * r + k].conj()).sum()
        })
        .collect();
    Matrix::new(n, entries, None).expect("valid low-rank operator")
}

fn orbit_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let tol = DenseTolerances::default();
    let mut bad = Vec::new();
    let mut rows = 0;
    for case in 0..200 {
        let t = random_operator(&mut rng);
        let h: Vec<Complex<f64>> = (0..t.dim()).map(|_| random_complex(&mut rng)).collect();
        let lambda = match minimal_lambda(&t, &tol).map(|m| m.bound) {
            Ok(LambdaBound::Finite(v)) => v,
            Ok(other) => {
                bad.push(format!("case {case}: minimal lambda {other:?}"));
                continue;
            }
            Err(e) => {
                bad.push(format!("case {case}: {e}"));
                continue;
            }
        };
        match orbit_bound_check(&t, &h, lambda, 20, &tol) {
            Ok(table) if !table.contradiction => rows += table.rows.len(),
            Ok(table) => {
                let row = table.rows.iter().find(|r| !r.holds).expect("a failing row");
                bad.push(format!(
                    "case {case}: n = {} norm {} < bound {}",
                    row.n, row.norm, row.bound
                ));
            }
            Err(e) => bad.push(format!("case {case}: {e}")),
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "200 operators, {rows} rows hold with slack {ORBIT_SLACK:e}{}",
            first(&bad)
        ),
    )
}

fn trace_bound_and_douglas(systems: &[System]) -> Outcome {
    let tol = DenseTolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let mut operators: Vec<Matrix> = systems.iter().map(matrix_of_system).collect();
    operators.extend((0..200).map(|_| random_operator(&mut rng)));
    operators.extend((0..60).map(|i| low_rank_operator(&mut rng, i % 2 == 0)));
    let mut bad = Vec::new();
    let mut lowest = f64::INFINITY;
    let (mut finite, mut infinite) = (0, 0);
    for (i, t) in operators.iter().enumerate() {
        if t.is_zero() {
            continue;
        }
        let (m, f) = match (minimal_lambda(t, &tol), douglas_factor(t, &tol)) {
            (Ok(m), Ok(f)) => (m, f),
            (Err(e), _) | (_, Err(e)) => {
                bad.push(format!("#{i}: {e}"));
                continue;
            }
        };
        if let LambdaBound::Finite(v) = m.bound {
            lowest = lowest.min(v);
            finite += 1;
            if v < 1.0 - 1e-10 {
                bad.push(format!("#{i}: minimal lambda {v}"));
            }
        } else {
            infinite += 1;
        }
        if f.feasible != m.bound.is_finite() {
            bad.push(format!("#{i}: douglas {} vs {:?}", f.feasible, m.bound));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} operators ({finite} finite, {infinite} infinite), smallest lambda {lowest:.12}{}",
            operators.len(),
            first(&bad)
        ),
    )
}

fn continuous_example() -> Outcome {
    let grid = match QuadratureGrid::new(1 << 12, 1e-6) {
        Ok(g) => g,
        Err(e) => return outcome(false, e.to_string()),
    };
    match continuous_example_check(&grid) {
        Ok(r) => outcome(
            r.h_at_quarter == 1.0
                && r.change_of_variables_residual < 1e-6
                && r.criterion_holds
                && r.criterion_max_numerical <= 1.0
                && r.winner.is_some(),
            format!(
                "h(1/4) = {}, change-of-variables residual {:.1e}, criterion max {:.4}, J winner {}",
                r.h_at_quarter,
                r.change_of_variables_residual,
                r.criterion_max_numerical,
                r.winner.map_or("none", |w| w.label())
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn discrete_example() -> Outcome {
    let doc = match catalog::paper_discrete(200) {
        Ok(d) => d,
        Err(e) => return outcome(false, e.to_string()),
    };
    let text = serde_json::to_string(&doc).expect("document serializes");
    let scope_of = |overrides: &OptionsDocument| -> Result<Option<Scope>, String> {
        let report = analyze_text(&text, "paper-discrete", overrides).map_err(|e| e.to_string())?;
        reverify(&report).map_err(|e| e.to_string())?;
        Ok(report
            .certificates
            .iter()
            .find(|c| {
                c.kind == CertificateKind::NotWeaklyHypercyclic && c.theorem == Theorem::PointwiseNotWeaklyHypercyclic
            })
            .map(|c| c.scope))
    };
    let asserted = OptionsDocument {
        tail_bound_asserted: Some(true),
        ..OptionsDocument::default()
    };
    match (scope_of(&OptionsDocument::default()), scope_of(&asserted)) {
        (Ok(plain), Ok(tail)) => outcome(
            plain == Some(Scope::PrefixEvidence) && tail == Some(Scope::TailBoundAsserted),
            format!("window 200: scope {plain:?}, with asserted tail bound {tail:?}"),
        ),
        (Err(e), _) | (_, Err(e)) => outcome(false, e),
    }
}

fn first(bad: &[String]) -> String {
    bad.first().map(|b| format!("; first failure {b}")).unwrap_or_default()
}

type Check<'a> = (&'static str, Option<Duration>, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let systems = systems();
    let criteria: Vec<Check> = vec![
        (
            "lambda_n recursion and closed form",
            Some(Duration::from_secs(1)),
            Box::new(lambda_sequences),
        ),
        (
            "pointwise vs dense minimal lambda",
            Some(Duration::from_secs(30)),
            Box::new(|| lambda_agreement(&systems)),
        ),
        ("J_n routes and norm identity", None, Box::new(|| jn_routes(&systems))),
        (
            "closed-range power growth",
            None,
            Box::new(|| closed_range_growth(&systems)),
        ),
        (
            "kernel and range supports vs SVD",
            None,
            Box::new(|| kernel_supports(&systems)),
        ),
        (
            "orbit lower bounds",
            Some(Duration::from_secs(60)),
            Box::new(orbit_bounds),
        ),
        (
            "trace bound and Douglas feasibility",
            None,
            Box::new(|| trace_bound_and_douglas(&systems)),
        ),
        ("continuous example", None, Box::new(continuous_example)),
        ("discrete example certificate scopes", None, Box::new(discrete_example)),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = check();
        let elapsed = start.elapsed();
        if let Some(limit) = budget {
            if elapsed > *limit {
                result.pass = false;
                result.detail += &format!("; exceeded {limit:?}");
            }
        }
        failed += usize::from(!result.pass);
        println!(
            "criterion {}: {} {name} [{:.2?}] {}",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            elapsed,
            result.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
