use std::fmt::Write as _;
use std::time::Instant;

use hyponorm::dense::{self, orbit_bound_check, OrbitBoundTable};
use hyponorm::xcheck::{validate_corpus, CaseResult, CorpusTolerances, Fault};
use hyponorm::{
    analyze, analyze_matrix, continuous_example_check, growth_certificate, minimal_lambda,
    not_weakly_hypercyclic_certificate, orbit_norms, verify_certificate, weakly_closed_orbit_certificate,
    AnalysisOptions, Certificate, Complex, ContinuousReport, DenseTolerances, LambdaBound, Matrix, QuadratureGrid,
    System, SystemScope,
};
use serde::{Deserialize, Serialize};

use crate::documents::{
    digest, pairs, Flags, GrowthRowDocument, InputDocument, LambdaValue, MatrixSection, OptionsDocument,
    ReportDocument, Settings, SystemDocument, SystemSection, Timings, TOOL, VERSION,
};
use crate::failure::Failure;

/// A rendered command result; `code` is the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub structured: String,
    pub code: u8,
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents serialize") + "\n"
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn analysis_options(settings: &Settings, scope: SystemScope) -> AnalysisOptions<f64> {
    AnalysisOptions {
        support_tol: settings.support_tol,
        max_n: settings.max_n,
        scope,
        tail_bound_asserted: settings.tail_bound_asserted,
        ..AnalysisOptions::default()
    }
}

fn dense_tolerances(settings: &Settings) -> DenseTolerances<f64> {
    DenseTolerances {
        psd: settings.psd_tol,
        ..DenseTolerances::default()
    }
}

/// Analyzes raw document text; `overrides` come from command-line flags.
pub fn analyze_text(text: &str, origin: &str, overrides: &OptionsDocument) -> Result<ReportDocument, Failure> {
    let input = InputDocument::parse(text, origin)?;
    analyze_document(input, digest(text.as_bytes()), overrides)
}

pub fn analyze_document(
    input: InputDocument,
    input_digest: String,
    overrides: &OptionsDocument,
) -> Result<ReportDocument, Failure> {
    let start = Instant::now();
    let settings = Settings::default().overlay(&input.options()).overlay(overrides);
    settings.validate()?;
    let mut report = match &input {
        InputDocument::System(doc) => analyze_system(doc, &settings)?,
        InputDocument::Matrix(doc) => analyze_dense(&doc.to_matrix()?, &settings)?,
    };
    report.input_digest = input_digest;
    report.input = input;
    report.timings.total_ms = elapsed_ms(start);
    Ok(report)
}

fn skeleton(settings: Settings) -> ReportDocument {
    ReportDocument {
        tool: TOOL.into(),
        version: VERSION.into(),
        input_digest: String::new(),
        input: InputDocument::System(SystemDocument {
            masses: Vec::new(),
            phi: Vec::new(),
            u: Vec::new(),
            scope: SystemScope::Finite,
            options: OptionsDocument::default(),
        }),
        settings,
        lambda_min: LambdaValue::Any,
        delta: None,
        flags: Flags {
            degenerate: false,
            closed_range: true,
            kernel_inclusion: true,
            prefix_window: false,
            tail_bound_asserted: settings.tail_bound_asserted,
        },
        system: None,
        matrix: None,
        certificates: Vec::new(),
        timings: Timings { total_ms: 0.0 },
    }
}

fn analyze_system(doc: &SystemDocument, settings: &Settings) -> Result<ReportDocument, Failure> {
    let sys = doc.to_system()?;
    let opts = analysis_options(settings, doc.scope);
    let r = analyze(&sys, &opts)?;
    let c = &r.criterion;
    let mut out = skeleton(*settings);
    out.lambda_min = r.lambda_min().into();
    out.delta = r.closed_range.delta;
    out.flags = Flags {
        degenerate: r.degenerate,
        closed_range: r.closed_range.closed,
        kernel_inclusion: r.kernel_inclusion,
        prefix_window: doc.scope == SystemScope::PrefixWindow,
        tail_bound_asserted: settings.tail_bound_asserted,
    };
    out.system = Some(SystemSection {
        h: c.h.values().to_vec(),
        j: c.j.values().to_vec(),
        j_table: r.j_table.iter().map(|f| f.values().to_vec()).collect(),
        support_u: c.support_u.one_based(),
        support_j: c.support_j.one_based(),
        criterion: c.values.values().to_vec(),
        argmax: c.argmax.map(|k| k + 1),
        violating: c.violating.map(|k| k + 1),
        delta: r.closed_range.delta,
        preimage_invariant: r.closed_range.preimage_invariant,
        growth: r
            .closed_range
            .growth
            .iter()
            .map(|g| GrowthRowDocument {
                n: g.n,
                min_on_support: g.min_on_support,
                bound: g.bound,
                holds: g.holds,
            })
            .collect(),
        range_star_support: r.range_star_support.one_based(),
    });
    out.certificates = r.certificates;
    Ok(out)
}

fn analyze_dense(t: &Matrix, settings: &Settings) -> Result<ReportDocument, Failure> {
    let r = analyze_matrix(t, &dense_tolerances(settings))?;
    let mut out = skeleton(*settings);
    out.lambda_min = r.lambda_min().into();
    out.flags.degenerate = t.is_zero();
    out.flags.kernel_inclusion = r.minimal.bound.is_finite();
    out.matrix = Some(MatrixSection {
        bracket: r.minimal.bracket.map(|(a, b)| [a, b]),
        iterations: r.minimal.iterations,
        diagnostic: r.minimal.diagnostic.clone(),
        douglas_feasible: r.factor.feasible,
        factor_norm: r.factor.norm,
        implied_lambda: r.factor.implied_lambda,
        factor_residual: r.factor.residual,
        violating_vector: r.factor.violating_vector.as_deref().map(pairs),
    });
    out.certificates = r.certificates;
    Ok(out)
}

/// Recomputes every certificate of a (possibly reloaded) report.
pub fn reverify(report: &ReportDocument) -> Result<(), Failure> {
    let settings = report.settings;
    let ok = match &report.input {
        InputDocument::System(doc) => {
            let sys = doc.to_system()?;
            let opts = analysis_options(&settings, doc.scope);
            let fresh = analyze(&sys, &opts)?;
            let lambda_ok = LambdaValue::from(fresh.lambda_min()) == report.lambda_min;
            lambda_ok && report.certificates.iter().all(|c| verify_certificate(c, &sys, &opts))
        }
        InputDocument::Matrix(doc) => {
            let t = doc.to_matrix()?;
            let tol = dense_tolerances(&settings);
            let mut ok = true;
            for c in &report.certificates {
                ok &= dense::verify_certificate(c, &t, &tol)?;
            }
            ok
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Failure::oracle("a certificate did not re-verify against its input"))
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| format!("{x:?}"))
}

fn fmt_certificates(out: &mut String, certs: &[Certificate]) {
    if certs.is_empty() {
        let _ = writeln!(out, "certificates: none (inconclusive)");
    }
    for c in certs {
        let _ = writeln!(out, "certificate: {c}");
    }
}

pub fn render_report(r: &ReportDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}  input sha256 {}", r.tool, r.version, r.input_digest);
    let _ = writeln!(
        out,
        "settings: support_tol={:?} psd_tol={:?} max_n={} tail_bound_asserted={}",
        r.settings.support_tol, r.settings.psd_tol, r.settings.max_n, r.settings.tail_bound_asserted
    );
    let _ = writeln!(out, "lambda_min: {}", r.lambda_min);
    let _ = writeln!(out, "delta: {}", fmt_opt(r.delta));
    let f = &r.flags;
    let _ = writeln!(
        out,
        "flags: degenerate={} closed_range={} kernel_inclusion={} prefix_window={} tail_bound_asserted={}",
        f.degenerate, f.closed_range, f.kernel_inclusion, f.prefix_window, f.tail_bound_asserted
    );
    if let Some(s) = &r.system {
        let _ = writeln!(out, "h: {}", fmt_vec(&s.h));
        let _ = writeln!(out, "J: {}", fmt_vec(&s.j));
        for (i, jn) in s.j_table.iter().enumerate() {
            let _ = writeln!(out, "J_{}: {}", i + 1, fmt_vec(jn));
        }
        let _ = writeln!(out, "S(u): {:?}", s.support_u);
        let _ = writeln!(out, "S(J): {:?}", s.support_j);
        let _ = writeln!(out, "criterion: {}", fmt_vec(&s.criterion));
        let point = |k: Option<usize>| k.map_or_else(|| "none".to_string(), |k| k.to_string());
        let _ = writeln!(out, "argmax: {}  violating: {}", point(s.argmax), point(s.violating));
        let _ = writeln!(out, "preimage invariant: {}", s.preimage_invariant);
        for g in &s.growth {
            let _ = writeln!(
                out,
                "growth n={}: min J_n on S(J) = {:?}, delta^n = {:?}, holds = {}",
                g.n, g.min_on_support, g.bound, g.holds
            );
        }
        let _ = writeln!(out, "closure of R(W*) supported on: {:?}", s.range_star_support);
    }
    if let Some(m) = &r.matrix {
        if let Some([lo, hi]) = m.bracket {
            let _ = writeln!(out, "bisection: bracket [{lo:?}, {hi:?}], {} iterations", m.iterations);
        }
        if let Some(d) = &m.diagnostic {
            let _ = writeln!(out, "diagnostic: {d}");
        }
        let _ = writeln!(
            out,
            "douglas: feasible={} |C|={} lambda=|C|^2={} residual={}",
            m.douglas_feasible,
            fmt_opt(m.factor_norm),
            fmt_opt(m.implied_lambda),
            fmt_opt(m.factor_residual)
        );
        if let Some(v) = &m.violating_vector {
            let _ = writeln!(out, "range vector outside R(T*): {v:?}");
        }
    }
    fmt_certificates(&mut out, &r.certificates);
    let _ = writeln!(out, "time: {:.3} ms", r.timings.total_ms);
    out
}

pub fn report_output(r: &ReportDocument) -> Output {
    Output {
        text: render_report(r),
        structured: pretty(r),
        code: 0,
    }
}

/// Parses `"1, 2-0.5i, 3i"` into complex entries.
pub fn parse_vector(spec: &str) -> Result<Vec<Complex<f64>>, Failure> {
    spec.split(',')
        .map(|item| {
            let s: String = item.chars().filter(|c| !c.is_whitespace()).collect();
            parse_complex(&s).ok_or_else(|| Failure::input(format!("--vector: cannot parse entry {item:?}")))
        })
        .collect()
}

fn parse_complex(s: &str) -> Option<Complex<f64>> {
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| Complex::new(re, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse().ok()?,
    };
    Some(Complex::new(re, im))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRowDocument {
    pub n: usize,
    pub norm: f64,
    /// `‖h‖·λ_n·(‖Th‖/‖h‖)ⁿ`.
    pub floor: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitDocument {
    pub tool: String,
    pub version: String,
    pub input_digest: String,
    pub vector: Vec<[f64; 2]>,
    pub steps: usize,
    pub norms: Vec<f64>,
    pub lambda_min: LambdaValue,
    pub rows: Vec<OrbitRowDocument>,
    pub contradiction: bool,
    /// `min_n (‖Tⁿh‖/‖h‖)^{1/n}`.
    pub growth_constant: Option<f64>,
    pub certificates: Vec<Certificate>,
    pub timings: Timings,
}

/// Operator for orbit work: matrices as given, systems as `W` acting on
/// functions with their own masses.
fn operator_of(input: &InputDocument) -> Result<Matrix, Failure> {
    match input {
        InputDocument::Matrix(doc) => doc.to_matrix(),
        InputDocument::System(doc) => {
            let sys: System = doc.to_system()?;
            let n = sys.len();
            let mut entries = vec![0.0; n * n];
            for k in 0..n {
                entries[k * n + sys.map().apply(k)] = sys.weight()[k];
            }
            Ok(Matrix::from_real(n, entries, Some(sys.space().masses().to_vec()))?)
        }
    }
}

pub fn orbit_text(
    text: &str,
    origin: &str,
    vector: &str,
    steps: usize,
    overrides: &OptionsDocument,
) -> Result<Output, Failure> {
    let start = Instant::now();
    let input = InputDocument::parse(text, origin)?;
    let settings = Settings::default().overlay(&input.options()).overlay(overrides);
    settings.validate()?;
    let tol = dense_tolerances(&settings);
    let t = operator_of(&input)?;
    let h = parse_vector(vector)?;
    if h.len() != t.dim() {
        return Err(Failure::input(format!(
            "--vector: expected {} entries, found {}",
            t.dim(),
            h.len()
        )));
    }
    if h.iter().all(|z| z.norm() == 0.0) {
        return Err(Failure::input(
            "--vector: the orbit of the zero vector is trivial; give a nonzero vector",
        ));
    }
    let norms = orbit_norms(&t, &h, steps)?;
    let bound = minimal_lambda(&t, &tol)?.bound;
    let table: Option<OrbitBoundTable<f64>> = match bound {
        LambdaBound::Finite(l) => Some(orbit_bound_check(&t, &h, l, steps, &tol)?),
        _ => None,
    };
    let normalized: Vec<f64> = norms[1..].iter().map(|x| x / norms[0]).collect();
    let growth = growth_certificate(&normalized, None, 1e-12);
    let growth_constant = normalized
        .iter()
        .enumerate()
        .map(|(i, x)| x.powf(1.0 / (i + 1) as f64))
        .reduce(f64::min);
    let mut certificates = Vec::new();
    certificates.extend(not_weakly_hypercyclic_certificate(&t, &tol)?);
    certificates.extend(weakly_closed_orbit_certificate(&t, &h, &tol)?);
    certificates.extend(growth);
    let rows: Vec<OrbitRowDocument> = table
        .as_ref()
        .map(|tb| {
            tb.rows
                .iter()
                .map(|r| OrbitRowDocument {
                    n: r.n,
                    norm: r.norm,
                    floor: r.bound,
                    holds: r.holds,
                })
                .collect()
        })
        .unwrap_or_default();
    let contradiction = table.as_ref().is_some_and(|tb| tb.contradiction);
    let doc = OrbitDocument {
        tool: TOOL.into(),
        version: VERSION.into(),
        input_digest: digest(text.as_bytes()),
        vector: pairs(&h),
        steps,
        norms,
        lambda_min: bound.into(),
        rows,
        contradiction,
        growth_constant,
        certificates,
        timings: Timings {
            total_ms: elapsed_ms(start),
        },
    };

    let mut out = String::new();
    let _ = writeln!(out, "{} {}  input sha256 {}", doc.tool, doc.version, doc.input_digest);
    let _ = writeln!(out, "lambda_min: {}", doc.lambda_min);
    let _ = writeln!(out, "{:>4}  {:>24}  {:>24}  holds", "n", "|T^n h|", "floor");
    for (n, norm) in doc.norms.iter().enumerate() {
        match doc.rows.get(n) {
            Some(r) => {
                let _ = writeln!(out, "{n:>4}  {norm:>24?}  {:>24?}  {}", r.floor, r.holds);
            }
            None => {
                let _ = writeln!(out, "{n:>4}  {norm:>24?}  {:>24}  -", "-");
            }
        }
    }
    let _ = writeln!(out, "growth constant (auto c): {}", fmt_opt(doc.growth_constant));
    if doc.contradiction {
        let _ = writeln!(out, "CONTRADICTION: an orbit floor failed for a certified lambda");
    }
    fmt_certificates(&mut out, &doc.certificates);
    let _ = writeln!(out, "time: {:.3} ms", doc.timings.total_ms);
    Ok(Output {
        text: out,
        structured: pretty(&doc),
        code: if doc.contradiction { 1 } else { 0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayCase {
    pub case: CaseResult,
    pub system: SystemDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XcheckDocument {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub count: usize,
    pub passed: usize,
    pub failed: usize,
    pub failures: Vec<CaseResult>,
    pub first_failure: Option<ReplayCase>,
    pub timings: Timings,
}

pub fn xcheck(
    seed: u64,
    count: usize,
    lambda_tol: f64,
    overrides: &OptionsDocument,
    fault: Fault,
) -> Result<Output, Failure> {
    let start = Instant::now();
    let settings = Settings::default().overlay(overrides);
    settings.validate()?;
    if !(lambda_tol > 0.0) {
        return Err(Failure::input("--lambda-tol must be positive"));
    }
    let opts = analysis_options(&settings, SystemScope::Finite);
    let tols = CorpusTolerances {
        lambda: lambda_tol,
        ..CorpusTolerances::default()
    };
    let (systems, summary) = validate_corpus(seed, count, &opts, &dense_tolerances(&settings), &tols, fault);
    let failures: Vec<CaseResult> = summary.cases.iter().filter(|c| !c.passed()).cloned().collect();
    let first_failure = failures.first().map(|c| ReplayCase {
        case: c.clone(),
        system: SystemDocument::from_system(&systems[c.index], SystemScope::Finite),
    });
    let doc = XcheckDocument {
        tool: TOOL.into(),
        version: VERSION.into(),
        seed,
        count,
        passed: summary.passed,
        failed: summary.failed,
        failures,
        first_failure,
        timings: Timings {
            total_ms: elapsed_ms(start),
        },
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "corpus seed {} count {}: {} passed, {} failed",
        seed, count, doc.passed, doc.failed
    );
    for c in &doc.failures {
        let _ = writeln!(out, "case {} ({} points):", c.index, c.points);
        for f in &c.failures {
            let _ = writeln!(out, "  {f}");
        }
    }
    if let Some(r) = &doc.first_failure {
        let _ = writeln!(out, "first failing system (replay with `hyponorm analyze`):");
        let _ = writeln!(
            out,
            "{}",
            serde_json::to_string(&r.system).expect("documents serialize")
        );
    }
    let _ = writeln!(out, "time: {:.3} ms", doc.timings.total_ms);
    Ok(Output {
        text: out,
        structured: pretty(&doc),
        code: if doc.failed == 0 { 0 } else { 1 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousDocument {
    pub tool: String,
    pub version: String,
    pub passed: bool,
    pub report: ContinuousReport,
    pub timings: Timings,
}

pub fn paper_continuous(nodes: usize, quad_tol: f64) -> Result<Output, Failure> {
    let start = Instant::now();
    let grid = QuadratureGrid::new(nodes, quad_tol)?;
    let report = continuous_example_check(&grid)?;
    let doc = ContinuousDocument {
        tool: TOOL.into(),
        version: VERSION.into(),
        passed: report.passed(),
        report,
        timings: Timings {
            total_ms: elapsed_ms(start),
        },
    };
    let r = &doc.report;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "X = [0, 1/2], u(x) = x^(3/2), phi(x) = x^2, {} midpoint nodes",
        r.grid.nodes
    );
    let _ = writeln!(out, "h(0.25) = {:?}", r.h_at_quarter);
    let _ = writeln!(out, "numerical h vs 1/(2 sqrt y): max cell gap {:e}", r.h_deviation);
    let _ = writeln!(
        out,
        "change of variables residual: {:e} ({:e} at half the nodes)",
        r.change_of_variables_residual, r.change_of_variables_coarse_residual
    );
    let _ = writeln!(out, "integral of u^2 over phi^-1(0, 1/4): {:?}", r.preimage_integral);
    let _ = writeln!(out, "integral of numerical J: {:?}", r.pushforward_total);
    let _ = writeln!(out, "|Wf|^2 = int J f^2 residual: {:e}", r.identity_residual);
    for c in &r.candidates {
        let _ = writeln!(
            out,
            "candidate J = {}: max gap {:e}, total {:?}, matches = {}, criterion max {:?}",
            c.form.label(),
            c.max_deviation,
            c.total_mass,
            c.matches,
            c.criterion_max
        );
    }
    let _ = writeln!(
        out,
        "winner: {}",
        r.winner
            .map_or("none (no candidate reproduces the pushforward)", |w| w.label())
    );
    let _ = writeln!(
        out,
        "criterion max over grid (numerical J): {:?}",
        r.criterion_max_numerical
    );
    let _ = writeln!(out, "criterion <= 1 on every node: {}", r.criterion_holds);
    if let Some((a, b)) = r.support_gap {
        let _ = writeln!(
            out,
            "support gap: u > 0 but J = 0 for nodes in [{a:?}, {b:?}] (outside phi(X)); S(u) is not inside S(J) there"
        );
    }
    let _ = writeln!(out, "passed: {}", doc.passed);
    let _ = writeln!(out, "time: {:.3} ms", doc.timings.total_ms);
    Ok(Output {
        text: out,
        structured: pretty(&doc),
        code: if doc.passed { 0 } else { 1 },
    })
}

/// Emits an example document, or its analysis when `run` is set.
pub fn example_document(doc: SystemDocument, run: bool, overrides: &OptionsDocument) -> Result<Output, Failure> {
    let text = serde_json::to_string_pretty(&doc).expect("documents serialize") + "\n";
    if run {
        return Ok(report_output(&analyze_text(&text, "example", overrides)?));
    }
    Ok(Output {
        text: text.clone(),
        structured: text,
        code: 0,
    })
}
