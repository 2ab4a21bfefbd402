//! Oracles that recompute the pointwise answers through the dense route.
//!
//! A system is carried to standard coordinates by the isometry
//! `f ↦ (f_k√m_k)`, where `W` becomes the matrix with entries
//! `(k, φ(k)) = u_k√(m_k/m_φ(k))`. Every pointwise decision is then compared
//! with an independent matrix computation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    closed_range_check, hyponormality_criterion, kernel_inclusion_check, range_star_support, AnalysisOptions,
    LambdaBound,
};
use crate::dense::{douglas_factor, minimal_lambda, DenseTolerances, MatrixOperator};
use crate::error::{Error, Result};
use crate::linalg::{norm2, svd, Mat};
use crate::scalar::Real;
use crate::wco::WeightedCompositionSystem;

/// Matrix of `W` in standard coordinates.
pub fn matrix_of_system<S: Real>(sys: &WeightedCompositionSystem<S>) -> MatrixOperator<S> {
    let n = sys.len();
    let m = sys.space().masses();
    let mut entries = vec![S::zero(); n * n];
    for k in 0..n {
        let j = sys.map().apply(k);
        entries[k * n + j] = sys.weight()[k] * (m[k] / m[j]).sqrt();
    }
    MatrixOperator::from_real(n, entries, None).expect("system dimensions were validated")
}

/// `f ↦ (f_k√m_k)`.
pub fn to_standard<S: Real>(sys: &WeightedCompositionSystem<S>, f: &[S]) -> Vec<S> {
    f.iter().zip(sys.space().masses()).map(|(x, m)| *x * m.sqrt()).collect()
}

fn real_bridge<S: Real>(sys: &WeightedCompositionSystem<S>) -> Mat<S> {
    matrix_of_system(sys).entries().map(|z| z.re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaAgreement<S> {
    pub criterion: LambdaBound<S>,
    pub dense: LambdaBound<S>,
    pub agree: bool,
}

impl<S: Real> LambdaAgreement<S> {
    /// Turns a disagreement into an error carrying both values.
    pub fn into_result(self) -> Result<Self> {
        if self.agree {
            Ok(self)
        } else {
            Err(Error::Consistency(format!(
                "criterion lambda {:?} disagrees with dense minimal lambda {:?}",
                self.criterion, self.dense
            )))
        }
    }
}

fn bounds_agree<S: Real>(a: LambdaBound<S>, b: LambdaBound<S>, tol: S) -> bool {
    match (a, b) {
        (LambdaBound::Any, LambdaBound::Any) | (LambdaBound::Infinite, LambdaBound::Infinite) => true,
        (LambdaBound::Finite(x), LambdaBound::Finite(y)) => (x - y).abs() <= tol * x.abs().max(y.abs()),
        _ => false,
    }
}

/// Pointwise `lambda_min` against `minimal_lambda` of the bridge matrix.
pub fn xcheck_lambda<S: Real>(
    sys: &WeightedCompositionSystem<S>,
    tol: S,
    opts: &AnalysisOptions<S>,
    dense: &DenseTolerances<S>,
) -> Result<LambdaAgreement<S>> {
    let criterion = hyponormality_criterion(sys, opts).lambda_min;
    let dense = minimal_lambda(&matrix_of_system(sys), dense)?.bound;
    Ok(LambdaAgreement {
        criterion,
        dense,
        agree: bounds_agree(criterion, dense, tol),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormulaCheck<S> {
    /// Largest relative residual of `T*T f̃` against `J⊙f`.
    pub gram: S,
    /// Largest relative residual of `TT* f̃` against the explicit `WW*` formula.
    pub co_gram: S,
    /// Largest relative residual of `‖Tf̃‖` against `‖Wf‖_μ`.
    pub isometry: S,
    pub passed: bool,
}

fn relative_gap<S: Real>(a: &[S], b: &[S]) -> S {
    let diff: Vec<S> = a.iter().zip(b).map(|(x, y)| *x - *y).collect();
    norm2(&diff) / norm2(b).max(S::one())
}

/// Matrix-level `T*T` and `TT*` against `J` and the explicit `WW*` formula on
/// random vectors.
pub fn xcheck_operator_formulas<S: Real>(
    sys: &WeightedCompositionSystem<S>,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<FormulaCheck<S>> {
    let b = real_bridge(sys);
    let bt = b.transpose();
    let j = sys.compute_j();
    let (mut gram, mut co_gram, mut isometry) = (S::zero(), S::zero(), S::zero());
    for _ in 0..trials {
        let f: Vec<S> = (0..sys.len()).map(|_| S::lit(rng.gen_range(-1.0..1.0))).collect();
        let ft = to_standard(sys, &f);
        let jf: Vec<S> = f.iter().zip(j.iter()).map(|(x, y)| *x * *y).collect();
        gram = gram.max(relative_gap(&bt.mul_vec(&b.mul_vec(&ft)), &to_standard(sys, &jf)));
        let wws = sys.apply_ww_star(&f)?;
        co_gram = co_gram.max(relative_gap(&b.mul_vec(&bt.mul_vec(&ft)), &to_standard(sys, &wws)));
        let lhs = norm2(&b.mul_vec(&ft));
        let rhs = sys.space().norm_sq(&sys.apply_w(&f)?)?.sqrt();
        isometry = isometry.max((lhs - rhs).abs() / rhs.max(S::min_positive_value()));
    }
    let limit = S::lit(1e-11);
    Ok(FormulaCheck {
        gram,
        co_gram,
        isometry,
        passed: gram <= limit && co_gram <= limit && isometry <= S::lit(1e-12).max(limit / S::lit(10.0)),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelCheck {
    /// `S(u) ⊆ S(J)`.
    pub support_answer: bool,
    /// `Ker(T) ⊆ Ker(Tᵀ)` from a singular value decomposition.
    pub svd_answer: bool,
    /// `S(J)`, 0-based.
    pub support_j: Vec<usize>,
    /// Coordinate support of the column space of `Tᵀ`.
    pub column_support: Vec<usize>,
}

impl KernelCheck {
    pub fn passed(&self) -> bool {
        self.support_answer == self.svd_answer && self.support_j == self.column_support
    }
}

/// Support-based kernel inclusion and range support against SVD answers.
pub fn xcheck_kernels<S: Real>(
    sys: &WeightedCompositionSystem<S>,
    opts: &AnalysisOptions<S>,
    dense: &DenseTolerances<S>,
) -> Result<KernelCheck> {
    let b = real_bridge(sys);
    let bt = b.transpose();
    let support_answer = kernel_inclusion_check(sys, opts);
    let support_j = range_star_support(sys, opts).indices().to_vec();
    if sys.is_zero() {
        return Ok(KernelCheck {
            support_answer,
            svd_answer: true,
            support_j,
            column_support: Vec::new(),
        });
    }
    let dec = svd(&b)?;
    let smax = dec.largest();
    let cut = dense.rank.sqrt();
    let svd_answer = dec
        .null_space(dense.rank)
        .iter()
        .all(|v| norm2(&bt.mul_vec(v)) <= cut * smax);
    let corange = dec.corange(dense.rank);
    let column_support = (0..sys.len())
        .filter(|&i| corange.iter().any(|v| v[i].abs() > cut))
        .collect();
    Ok(KernelCheck {
        support_answer,
        svd_answer,
        support_j,
        column_support,
    })
}

/// Largest relative gap of `‖Wⁿf‖² = Σ J_n f² m` over random `f`, `n ≤ max_n`.
pub fn jn_identity_residual<S: Real>(
    sys: &WeightedCompositionSystem<S>,
    max_n: usize,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<S> {
    let table = sys.j_table(max_n);
    let mut worst = S::zero();
    for _ in 0..trials {
        let f: Vec<S> = (0..sys.len()).map(|_| S::lit(rng.gen_range(-1.0..1.0))).collect();
        let mut wf = f.clone();
        for jn in &table {
            wf = sys.apply_w(&wf)?.into_values();
            let lhs = sys.space().norm_sq(&wf)?;
            let weighted: Vec<S> = f.iter().zip(jn.iter()).map(|(x, j)| *x * *x * *j).collect();
            let rhs = sys.space().integrate(&weighted)?;
            let gap = (lhs - rhs).abs() / lhs.abs().max(rhs.abs());
            if lhs != rhs {
                worst = worst.max(gap);
            }
        }
    }
    Ok(worst)
}

/// Largest relative gap between recursive and direct `J_n`, `n ≤ max_n`.
pub fn jn_route_residual<S: Real>(sys: &WeightedCompositionSystem<S>, max_n: usize) -> S {
    let mut worst = S::zero();
    for n in 1..=max_n {
        let a = sys.jn_recursive(n);
        let b = sys.jn_direct(n);
        let scale = a.max_abs().max(b.max_abs());
        if scale > S::zero() {
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max((*x - *y).abs() / scale);
            }
        }
    }
    worst
}

/// Shape of the seeded random corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    pub max_points: usize,
    pub mass_range: (f64, f64),
    pub weight_range: (f64, f64),
    pub zero_fraction: f64,
    /// Share of maps drawn as permutations, so that finite λ is common.
    pub permutation_fraction: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            max_points: 12,
            mass_range: (0.1, 10.0),
            weight_range: (0.1, 3.0),
            zero_fraction: 0.2,
            permutation_fraction: 0.5,
        }
    }
}

/// A random system on `1..=max_points` points. Maps are drawn inside the
/// window, so every system is φ-invariant.
pub fn random_system(rng: &mut impl Rng, spec: &CorpusSpec) -> WeightedCompositionSystem<f64> {
    let n = rng.gen_range(1..=spec.max_points);
    let masses = (0..n)
        .map(|_| rng.gen_range(spec.mass_range.0..=spec.mass_range.1))
        .collect();
    let image: Vec<usize> = if rng.gen_bool(spec.permutation_fraction) {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(rng);
        p
    } else {
        (0..n).map(|_| rng.gen_range(0..n)).collect()
    };
    let weight = (0..n)
        .map(|_| {
            if rng.gen_bool(spec.zero_fraction) {
                0.0
            } else {
                rng.gen_range(spec.weight_range.0..=spec.weight_range.1)
            }
        })
        .collect();
    WeightedCompositionSystem::from_parts(masses, image, weight).expect("generated systems are valid")
}

pub fn corpus(seed: u64, count: usize, spec: &CorpusSpec) -> Vec<WeightedCompositionSystem<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_system(&mut rng, spec)).collect()
}

/// A deliberately wrong oracle, for checking that the harness fails loudly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Scales the pointwise `lambda_min` by 1.01 before comparison.
    SkewLambda,
}

/// Per-system outcome of every oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub index: usize,
    pub points: usize,
    pub failures: Vec<String>,
}

impl CaseResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub seed: u64,
    pub count: usize,
    pub passed: usize,
    pub failed: usize,
    pub cases: Vec<CaseResult>,
}

impl CorpusSummary {
    pub fn first_failure(&self) -> Option<&CaseResult> {
        self.cases.iter().find(|c| !c.passed())
    }
}

/// Tolerances for corpus validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusTolerances {
    pub lambda: f64,
    pub jn_routes: f64,
    pub jn_identity: f64,
    pub growth_steps: usize,
    pub identity_steps: usize,
    pub trials: usize,
}

impl Default for CorpusTolerances {
    fn default() -> Self {
        Self {
            lambda: 1e-6,
            jn_routes: 1e-10,
            jn_identity: 1e-9,
            growth_steps: 10,
            identity_steps: 6,
            trials: 20,
        }
    }
}

/// Runs every oracle on one system; failures are described, not raised.
pub fn validate_system(
    index: usize,
    sys: &WeightedCompositionSystem<f64>,
    opts: &AnalysisOptions<f64>,
    dense: &DenseTolerances<f64>,
    tols: &CorpusTolerances,
    fault: Fault,
    rng: &mut impl Rng,
) -> CaseResult {
    let mut failures = Vec::new();
    let mut fail = |msg: String| failures.push(msg);

    match xcheck_lambda(sys, tols.lambda, opts, dense) {
        Ok(mut a) => {
            if fault == Fault::SkewLambda {
                if let LambdaBound::Finite(v) = a.criterion {
                    a.criterion = LambdaBound::Finite(v * 1.01);
                    a.agree = bounds_agree(a.criterion, a.dense, tols.lambda);
                }
            }
            if !a.agree {
                fail(format!("lambda: criterion {:?} vs dense {:?}", a.criterion, a.dense));
            }
            if let LambdaBound::Finite(v) = a.dense {
                if v < 1.0 - 1e-10 {
                    fail(format!("trace bound: dense minimal lambda {v} < 1"));
                }
            }
        }
        Err(e) => fail(format!("lambda: {e}")),
    }

    let bridge = matrix_of_system(sys);
    match (douglas_factor(&bridge, dense), minimal_lambda(&bridge, dense)) {
        (Ok(f), Ok(m)) if f.feasible != m.bound.is_finite() => fail(format!(
            "douglas: feasible = {} but minimal lambda = {:?}",
            f.feasible, m.bound
        )),
        (Err(e), _) | (_, Err(e)) => fail(format!("douglas: {e}")),
        _ => {}
    }

    match xcheck_operator_formulas(sys, tols.trials, rng) {
        Ok(f) if !f.passed => fail(format!(
            "formulas: gram {:e}, co-gram {:e}, isometry {:e}",
            f.gram, f.co_gram, f.isometry
        )),
        Err(e) => fail(format!("formulas: {e}")),
        _ => {}
    }

    match xcheck_kernels(sys, opts, dense) {
        Ok(k) if !k.passed() => fail(format!(
            "kernels: support {} vs svd {}, S(J) {:?} vs column support {:?}",
            k.support_answer, k.svd_answer, k.support_j, k.column_support
        )),
        Err(e) => fail(format!("kernels: {e}")),
        _ => {}
    }

    let routes = jn_route_residual(sys, tols.identity_steps);
    if routes > tols.jn_routes {
        fail(format!("J_n routes differ by {routes:e}"));
    }
    match jn_identity_residual(sys, tols.identity_steps, tols.trials, rng) {
        Ok(r) if r > tols.jn_identity => fail(format!("J_n identity residual {r:e}")),
        Err(e) => fail(format!("J_n identity: {e}")),
        _ => {}
    }

    let growth_opts = AnalysisOptions {
        max_n: tols.growth_steps,
        ..opts.clone()
    };
    let report = closed_range_check(sys, &growth_opts);
    if report.preimage_invariant && !report.degenerate && !report.growth_holds() {
        let row = report.growth.iter().find(|r| !r.holds).expect("a failing row");
        fail(format!(
            "closed range growth: min J_{} = {} < delta^n = {}",
            row.n, row.min_on_support, row.bound
        ));
    }

    CaseResult {
        index,
        points: sys.len(),
        failures,
    }
}

/// Validates the seeded corpus; the same seed always yields the same summary.
pub fn validate_corpus(
    seed: u64,
    count: usize,
    opts: &AnalysisOptions<f64>,
    dense: &DenseTolerances<f64>,
    tols: &CorpusTolerances,
    fault: Fault,
) -> (Vec<WeightedCompositionSystem<f64>>, CorpusSummary) {
    let systems = corpus(seed, count, &CorpusSpec::default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let cases: Vec<CaseResult> = systems
        .iter()
        .enumerate()
        .map(|(i, sys)| validate_system(i, sys, opts, dense, tols, fault, &mut rng))
        .collect();
    let passed = cases.iter().filter(|c| c.passed()).count();
    let summary = CorpusSummary {
        seed,
        count,
        passed,
        failed: count - passed,
        cases,
    };
    (systems, summary)
}
