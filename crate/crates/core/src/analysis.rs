//! Pointwise decision procedures for `W = M_u C_φ`: support gate, minimal λ,
//! closed range, kernel and range supports, and certificate emission.

use serde::{Deserialize, Serialize};

use crate::certificate::{witness_matches, Certificate, CertificateKind, Scope, Theorem, Witnesses};
use crate::error::{Error, Result};
use crate::measure::{conditional_expectation, relative_tolerance, support_of, RealFunction, Role, Support};
use crate::scalar::Field;
use crate::wco::WeightedCompositionSystem;

/// Smallest λ for which an operator is λ-hyponormal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaBound<S> {
    /// Zero operator: every λ > 0 works.
    Any,
    Finite(S),
    /// No λ works (the range condition fails).
    Infinite,
}

impl<S: Field> LambdaBound<S> {
    pub fn is_finite(&self) -> bool {
        !matches!(self, LambdaBound::Infinite)
    }

    pub fn value(&self) -> Option<S> {
        match self {
            LambdaBound::Finite(v) => Some(*v),
            _ => None,
        }
    }

    /// Whether the operator is λ-hyponormal at `lambda`.
    pub fn admits(&self, lambda: S) -> bool {
        match self {
            LambdaBound::Any => true,
            LambdaBound::Finite(v) => *v <= lambda,
            LambdaBound::Infinite => false,
        }
    }

    /// Whether some `λ ≤ 1 + tol` works.
    pub fn within_unit(&self, tol: S) -> bool {
        self.admits(S::one() + tol)
    }

    pub fn to_f64(&self) -> LambdaBound<f64> {
        match self {
            LambdaBound::Any => LambdaBound::Any,
            LambdaBound::Finite(v) => LambdaBound::Finite(v.to_f64_lossy()),
            LambdaBound::Infinite => LambdaBound::Infinite,
        }
    }
}

/// Whether the analysed system is a whole finite system or a window of an
/// infinite one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemScope {
    #[default]
    Finite,
    PrefixWindow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions<S> {
    /// Support threshold, relative to the maximum of each function.
    pub support_tol: S,
    /// Slack on the `λ ≤ 1` test that gates non-hypercyclicity.
    pub certificate_tol: S,
    /// Length of the `J_n` table.
    pub max_n: usize,
    pub scope: SystemScope,
    /// Caller asserts the pointwise bound also holds outside the window.
    pub tail_bound_asserted: bool,
}

impl<S: Field> Default for AnalysisOptions<S> {
    fn default() -> Self {
        Self {
            support_tol: S::default_relative_tolerance(),
            certificate_tol: S::default_relative_tolerance(),
            max_n: 6,
            scope: SystemScope::Finite,
            tail_bound_asserted: false,
        }
    }
}

impl<S: Field> AnalysisOptions<S> {
    pub fn certificate_scope(&self) -> Scope {
        match (self.scope, self.tail_bound_asserted) {
            (SystemScope::Finite, _) => Scope::ExactFinite,
            (SystemScope::PrefixWindow, false) => Scope::PrefixEvidence,
            (SystemScope::PrefixWindow, true) => Scope::TailBoundAsserted,
        }
    }

    fn support(&self, f: &[S]) -> Support<S> {
        support_of(f, relative_tolerance(f, self.support_tol)).expect("relative tolerance is nonnegative")
    }
}

/// Pointwise λ-hyponormality data.
#[derive(Debug, Clone, PartialEq)]
pub struct Criterion<S> {
    pub h: RealFunction<S>,
    pub j: RealFunction<S>,
    pub support_u: Support<S>,
    pub support_j: Support<S>,
    /// `K = (h∘φ)·E(u²/J)` on `S(u)`, zero elsewhere. `u²/J` is taken as zero
    /// off `S(J)`.
    pub values: RealFunction<S>,
    pub lambda_min: LambdaBound<S>,
    /// Point attaining `lambda_min` when finite.
    pub argmax: Option<usize>,
    /// A point of `S(u) \ S(J)` when no λ exists.
    pub violating: Option<usize>,
}

pub fn hyponormality_criterion<S: Field>(
    sys: &WeightedCompositionSystem<S>,
    opts: &AnalysisOptions<S>,
) -> Criterion<S> {
    let h = sys.h();
    let j = sys.compute_j();
    let u = sys.weight();
    let support_u = opts.support(u);
    let support_j = opts.support(&j);

    let ratio: Vec<S> = (0..sys.len())
        .map(|k| {
            if support_j.contains(k) {
                u[k] * u[k] / j[k]
            } else {
                S::zero()
            }
        })
        .collect();
    let expectation =
        conditional_expectation(sys.space(), sys.map(), &ratio).expect("system dimensions were validated");
    let values: Vec<S> = (0..sys.len())
        .map(|k| {
            if support_u.contains(k) {
                h[sys.map().apply(k)] * expectation[k]
            } else {
                S::zero()
            }
        })
        .collect();

    let violating = support_u.first_outside(&support_j);
    let (lambda_min, argmax) = if violating.is_some() {
        (LambdaBound::Infinite, None)
    } else if support_u.is_empty() {
        (LambdaBound::Any, None)
    } else {
        let mut best = support_u.indices()[0];
        for &k in support_u.indices() {
            if values[k] > values[best] {
                best = k;
            }
        }
        (LambdaBound::Finite(values[best]), Some(best))
    };

    Criterion {
        h,
        j,
        support_u,
        support_j,
        values: RealFunction::new(values, Role::Generic),
        lambda_min,
        argmax,
        violating,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRow<S> {
    pub n: usize,
    /// `min J_n` over `S(J)`.
    pub min_on_support: S,
    /// `δⁿ`.
    pub bound: S,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedRangeReport<S> {
    /// `W = 0`: `S(J)` is empty.
    pub degenerate: bool,
    pub closed: bool,
    /// `min J` over `S(J)`.
    pub delta: Option<S>,
    /// Whether `φ⁻¹(S(J)) ⊆ S(J)`, the hypothesis of the power growth bound.
    pub preimage_invariant: bool,
    /// `J_n ≥ δⁿ` on `S(J)` for `n = 1..=max_n`. Reported regardless of
    /// `preimage_invariant`.
    pub growth: Vec<GrowthRow<S>>,
}

impl<S: Field> ClosedRangeReport<S> {
    /// All rows hold. Only guaranteed when `preimage_invariant`.
    pub fn growth_holds(&self) -> bool {
        self.growth.iter().all(|r| r.holds)
    }
}

pub fn closed_range_check<S: Field>(
    sys: &WeightedCompositionSystem<S>,
    opts: &AnalysisOptions<S>,
) -> ClosedRangeReport<S> {
    let table = sys.j_table(opts.max_n.max(1));
    closed_range_from_table(sys, opts, &table)
}

fn closed_range_from_table<S: Field>(
    sys: &WeightedCompositionSystem<S>,
    opts: &AnalysisOptions<S>,
    table: &[RealFunction<S>],
) -> ClosedRangeReport<S> {
    let j = &table[0];
    let support_j = opts.support(j);
    if support_j.is_empty() {
        return ClosedRangeReport {
            degenerate: true,
            closed: true,
            delta: None,
            preimage_invariant: true,
            growth: Vec::new(),
        };
    }
    let delta = support_j
        .indices()
        .iter()
        .map(|&k| j[k])
        .reduce(|a, b| a.min_of(b))
        .expect("support is nonempty");
    let mask = support_j.mask(sys.len());
    let preimage_invariant = sys
        .map()
        .preimage_of_set(&mask)
        .iter()
        .zip(&mask)
        .all(|(pre, inside)| !pre || *inside);

    let slack = S::one() - S::default_relative_tolerance();
    let mut bound = S::one();
    let growth = table
        .iter()
        .take(opts.max_n)
        .enumerate()
        .map(|(i, jn)| {
            bound = bound * delta;
            let min_on_support = support_j
                .indices()
                .iter()
                .map(|&k| jn[k])
                .reduce(|a, b| a.min_of(b))
                .expect("support is nonempty");
            GrowthRow {
                n: i + 1,
                min_on_support,
                bound,
                holds: min_on_support >= bound * slack,
            }
        })
        .collect();

    ClosedRangeReport {
        degenerate: false,
        closed: delta > S::zero(),
        delta: Some(delta),
        preimage_invariant,
        growth,
    }
}

/// `Ker(W) ⊆ Ker(W*)`, decided as `S(u) ⊆ S(J)`.
pub fn kernel_inclusion_check<S: Field>(sys: &WeightedCompositionSystem<S>, opts: &AnalysisOptions<S>) -> bool {
    let support_u = opts.support(sys.weight());
    let support_j = opts.support(&sys.compute_j());
    support_u.is_subset_of(&support_j)
}

/// Coordinate support of `closure(R(W*))`, which is `S(J)`.
pub fn range_star_support<S: Field>(sys: &WeightedCompositionSystem<S>, opts: &AnalysisOptions<S>) -> Support<S> {
    opts.support(&sys.compute_j())
}

fn index_witness(k: Option<usize>) -> Option<usize> {
    k.map(|k| k + 1)
}

fn not_hypercyclic_from<S: Field>(crit: &Criterion<S>, opts: &AnalysisOptions<S>) -> Option<Certificate> {
    if !crit.lambda_min.within_unit(opts.certificate_tol) {
        return None;
    }
    Some(Certificate::new(
        CertificateKind::NotWeaklyHypercyclic,
        Theorem::PointwiseNotWeaklyHypercyclic,
        Witnesses {
            lambda: crit.lambda_min.value().map(Field::to_f64_lossy),
            index: index_witness(crit.argmax),
            ..Default::default()
        },
        opts.certificate_scope(),
    ))
}

/// Emits a non-hypercyclicity certificate iff `lambda_min ≤ 1` (up to
/// `certificate_tol`). `None` means inconclusive.
pub fn hypercyclicity_certificate<S: Field>(
    sys: &WeightedCompositionSystem<S>,
    opts: &AnalysisOptions<S>,
) -> Option<Certificate> {
    not_hypercyclic_from(&hyponormality_criterion(sys, opts), opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport<S> {
    pub criterion: Criterion<S>,
    /// `J_1..=J_max_n`.
    pub j_table: Vec<RealFunction<S>>,
    pub closed_range: ClosedRangeReport<S>,
    pub kernel_inclusion: bool,
    pub range_star_support: Support<S>,
    /// `u ≡ 0`.
    pub degenerate: bool,
    pub certificates: Vec<Certificate>,
}

impl<S: Field> AnalysisReport<S> {
    pub fn lambda_min(&self) -> LambdaBound<S> {
        self.criterion.lambda_min
    }

    pub fn j(&self) -> &RealFunction<S> {
        &self.criterion.j
    }
}

/// Full pointwise analysis.
///
/// Fails with [`Error::Consistency`] if a nonzero system reports a finite
/// `lambda_min < 1`: `trace(W*W) = trace(WW*)` forces `λ ≥ 1` on any finite
/// window.
pub fn analyze<S: Field>(sys: &WeightedCompositionSystem<S>, opts: &AnalysisOptions<S>) -> Result<AnalysisReport<S>> {
    let criterion = hyponormality_criterion(sys, opts);
    let j_table = sys.j_table(opts.max_n.max(1));
    let closed_range = closed_range_from_table(sys, opts, &j_table);
    let kernel_inclusion = criterion.support_u.is_subset_of(&criterion.support_j);
    let range_star_support = criterion.support_j.clone();
    let degenerate = criterion.support_u.is_empty();

    if let LambdaBound::Finite(lambda) = criterion.lambda_min {
        if lambda < S::one() - S::consistency_tolerance() {
            return Err(Error::Consistency(format!(
                "finite system reports lambda_min = {lambda} < 1"
            )));
        }
    }
    if kernel_inclusion != criterion.lambda_min.is_finite() {
        return Err(Error::Consistency("support gate and lambda_min disagree".into()));
    }

    let scope = opts.certificate_scope();
    let mut certificates = Vec::new();
    match criterion.lambda_min {
        LambdaBound::Infinite => certificates.push(Certificate::new(
            CertificateKind::NoLambdaExists,
            Theorem::SupportInclusionGate,
            Witnesses {
                index: index_witness(criterion.violating),
                ..Default::default()
            },
            scope,
        )),
        bound => certificates.push(Certificate::new(
            CertificateKind::LambdaHyponormal,
            Theorem::PointwiseHyponormality,
            Witnesses {
                lambda: bound.value().map(Field::to_f64_lossy),
                index: index_witness(criterion.argmax),
                ..Default::default()
            },
            scope,
        )),
    }
    if let (false, Some(delta)) = (closed_range.degenerate, closed_range.delta) {
        certificates.push(Certificate::new(
            CertificateKind::ClosedRange,
            Theorem::ClosedRangeLowerBound,
            Witnesses {
                delta: Some(delta.to_f64_lossy()),
                ..Default::default()
            },
            scope,
        ));
    }
    certificates.extend(not_hypercyclic_from(&criterion, opts));

    Ok(AnalysisReport {
        criterion,
        j_table,
        closed_range,
        kernel_inclusion,
        range_star_support,
        degenerate,
        certificates,
    })
}

/// Replays a certificate's witnesses against a fresh computation.
pub fn verify_certificate<S: Field>(
    cert: &Certificate,
    sys: &WeightedCompositionSystem<S>,
    opts: &AnalysisOptions<S>,
) -> bool {
    if cert.scope != opts.certificate_scope() {
        return false;
    }
    let tol = S::consistency_tolerance().to_f64_lossy().max(1e-12);
    let crit = hyponormality_criterion(sys, opts);
    let w = &cert.witnesses;
    let lambda_and_index_match = |crit: &Criterion<S>| match crit.lambda_min {
        LambdaBound::Any => w.lambda.is_none() && w.index.is_none(),
        LambdaBound::Finite(v) => {
            let at_index = w
                .index
                .filter(|&i| i >= 1 && i <= sys.len())
                .map(|i| crit.values[i - 1].to_f64_lossy());
            witness_matches(w.lambda, v.to_f64_lossy(), tol)
                && at_index.is_some_and(|k| witness_matches(w.lambda, k, tol))
        }
        LambdaBound::Infinite => false,
    };
    match (cert.kind, cert.theorem) {
        (CertificateKind::LambdaHyponormal, Theorem::PointwiseHyponormality) => lambda_and_index_match(&crit),
        (CertificateKind::NotWeaklyHypercyclic, Theorem::PointwiseNotWeaklyHypercyclic) => {
            crit.lambda_min.within_unit(opts.certificate_tol) && lambda_and_index_match(&crit)
        }
        (CertificateKind::NoLambdaExists, Theorem::SupportInclusionGate) => match w.index {
            Some(i) if i >= 1 && i <= sys.len() => crit.support_u.contains(i - 1) && !crit.support_j.contains(i - 1),
            _ => false,
        },
        (CertificateKind::ClosedRange, Theorem::ClosedRangeLowerBound) => {
            let report = closed_range_check(sys, opts);
            match report.delta {
                Some(d) => d > S::zero() && witness_matches(w.delta, d.to_f64_lossy(), tol),
                None => false,
            }
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn qs(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| Ratio::from_integer(x)).collect()
    }

    fn q(n: i64, d: i64) -> Q {
        Ratio::new(n, d)
    }

    fn cycle() -> WeightedCompositionSystem<Q> {
        WeightedCompositionSystem::from_parts(qs(&[1, 1, 1]), vec![1, 2, 0], qs(&[1, 2, 4])).unwrap()
    }

    fn folded(u: &[i64]) -> WeightedCompositionSystem<Q> {
        WeightedCompositionSystem::from_parts(qs(&[1, 2, 1]), vec![1, 2, 2], qs(u)).unwrap()
    }

    fn opts() -> AnalysisOptions<Q> {
        AnalysisOptions::default()
    }

    #[test]
    fn criterion_on_cycle() {
        let crit = hyponormality_criterion(&cycle(), &opts());
        assert_eq!(crit.values.values(), &[q(1, 16), q(4, 1), q(4, 1)]);
        assert_eq!(crit.lambda_min, LambdaBound::Finite(q(4, 1)));
        assert_eq!(crit.argmax, Some(1));
        assert!(crit.lambda_min.admits(q(4, 1)));
        assert!(!crit.lambda_min.admits(q(399, 100)));
    }

    #[test]
    fn criterion_on_identity_is_one() {
        let sys =
            WeightedCompositionSystem::from_parts(vec![0.5, 2.0, 3.0], vec![0, 1, 2], vec![0.3, 1.7, 2.2]).unwrap();
        let crit = hyponormality_criterion(&sys, &AnalysisOptions::default());
        assert!(crit.values.iter().all(|k: &f64| (*k - 1.0).abs() < 1e-15));
        assert_eq!(crit.lambda_min, LambdaBound::Finite(1.0));
    }

    #[test]
    fn criterion_detects_support_violation() {
        let crit = hyponormality_criterion(&folded(&[1, 0, 1]), &opts());
        assert_eq!(crit.support_u.indices(), &[0, 2]);
        assert_eq!(crit.support_j.indices(), &[1, 2]);
        assert_eq!(crit.lambda_min, LambdaBound::Infinite);
        assert_eq!(crit.violating, Some(0));
    }

    #[test]
    fn closed_range_on_cycle() {
        let report = closed_range_check(&cycle(), &opts());
        assert_eq!(report.delta, Some(q(1, 1)));
        assert!(report.closed && !report.degenerate && report.preimage_invariant);
        assert_eq!(report.growth[1].min_on_support, q(4, 1));
        assert!(report.growth_holds());
    }

    #[test]
    fn closed_range_identity_boundary() {
        let sys = WeightedCompositionSystem::<Q>::from_parts(qs(&[1, 3]), vec![0, 1], qs(&[1, 1])).unwrap();
        let report = closed_range_check(&sys, &opts());
        assert_eq!(report.delta, Some(q(1, 1)));
        assert!(report.growth.iter().all(|r| r.min_on_support == r.bound && r.holds));
        assert_eq!(report.growth.len(), 6);
    }

    #[test]
    fn closed_range_hypothesis_failure_still_reports_table() {
        let report = closed_range_check(&folded(&[1, 1, 1]), &opts());
        assert_eq!(report.delta, Some(q(1, 2)));
        assert!(!report.preimage_invariant);
        assert_eq!(report.growth.len(), 6);
    }

    #[test]
    fn zero_operator_is_degenerate() {
        let sys = folded(&[0, 0, 0]);
        let report = analyze(&sys, &opts()).unwrap();
        assert!(report.degenerate && report.closed_range.degenerate && report.closed_range.closed);
        assert_eq!(report.lambda_min(), LambdaBound::Any);
        assert!(report.kernel_inclusion);
        assert!(report
            .certificates
            .iter()
            .any(|c| c.kind == CertificateKind::NotWeaklyHypercyclic));
        for cert in &report.certificates {
            assert!(verify_certificate(cert, &sys, &opts()), "{cert}");
        }
    }

    #[test]
    fn kernel_inclusion_examples() {
        assert!(!kernel_inclusion_check(&folded(&[1, 0, 1]), &opts()));
        let perm = WeightedCompositionSystem::<Q>::from_parts(qs(&[1, 2, 3]), vec![2, 0, 1], qs(&[1, 5, 2])).unwrap();
        assert!(kernel_inclusion_check(&perm, &opts()));
        assert!(kernel_inclusion_check(&folded(&[0, 0, 0]), &opts()));
    }

    #[test]
    fn range_star_support_examples() {
        assert_eq!(range_star_support(&cycle(), &opts()).indices(), &[0, 1, 2]);
        let id = WeightedCompositionSystem::<Q>::from_parts(qs(&[1, 1, 1]), vec![0, 1, 2], qs(&[2, 3, 1])).unwrap();
        assert_eq!(range_star_support(&id, &opts()).indices(), &[0, 1, 2]);
        assert_eq!(range_star_support(&folded(&[1, 0, 1]), &opts()).indices(), &[1, 2]);
    }

    #[test]
    fn hypercyclicity_certificate_examples() {
        let id = WeightedCompositionSystem::<Q>::from_parts(qs(&[1, 1]), vec![0, 1], qs(&[1, 1])).unwrap();
        let cert = hypercyclicity_certificate(&id, &opts()).expect("identity is not hypercyclic");
        assert_eq!(cert.witnesses.lambda, Some(1.0));
        assert_eq!(cert.scope, Scope::ExactFinite);
        assert!(hypercyclicity_certificate(&cycle(), &opts()).is_none());
    }

    #[test]
    fn scope_follows_options() {
        let id = WeightedCompositionSystem::<f64>::from_parts(vec![1.0; 2], vec![1, 0], vec![1.0; 2]).unwrap();
        let mut o = AnalysisOptions::<f64> {
            scope: SystemScope::PrefixWindow,
            ..Default::default()
        };
        assert_eq!(
            hypercyclicity_certificate(&id, &o).unwrap().scope,
            Scope::PrefixEvidence
        );
        o.tail_bound_asserted = true;
        assert_eq!(
            hypercyclicity_certificate(&id, &o).unwrap().scope,
            Scope::TailBoundAsserted
        );
    }

    #[test]
    fn analyze_emits_replayable_certificates() {
        for sys in [cycle(), folded(&[1, 0, 1]), folded(&[1, 1, 1])] {
            let report = analyze(&sys, &opts()).unwrap();
            assert!(!report.certificates.is_empty());
            for cert in &report.certificates {
                assert!(verify_certificate(cert, &sys, &opts()), "{cert}");
            }
        }
        let report = analyze(&folded(&[1, 0, 1]), &opts()).unwrap();
        assert_eq!(report.certificates[0].kind, CertificateKind::NoLambdaExists);
        assert_eq!(report.certificates[0].witnesses.index, Some(1));
    }

    #[test]
    fn tampered_certificates_fail_replay() {
        let sys = cycle();
        let report = analyze(&sys, &opts()).unwrap();
        let mut cert = report.certificates[0].clone();
        assert_eq!(cert.kind, CertificateKind::LambdaHyponormal);
        cert.witnesses.lambda = Some(3.0);
        assert!(!verify_certificate(&cert, &sys, &opts()));
        let mut forged = cert.clone();
        forged.kind = CertificateKind::NotWeaklyHypercyclic;
        forged.theorem = Theorem::PointwiseNotWeaklyHypercyclic;
        forged.witnesses.lambda = Some(4.0);
        assert!(!verify_certificate(&forged, &sys, &opts()));
        let mut rescoped = report.certificates[0].clone();
        rescoped.scope = Scope::TailBoundAsserted;
        assert!(!verify_certificate(&rescoped, &sys, &opts()));
    }

    #[test]
    fn lambda_is_at_least_one_on_small_exact_systems() {
        // Every self-map of three points with a few weight patterns.
        for code in 0..27usize {
            let image = vec![code % 3, (code / 3) % 3, code / 9];
            for u in [[1, 2, 3], [0, 1, 1], [2, 0, 0], [1, 1, 0]] {
                let sys = WeightedCompositionSystem::from_parts(qs(&[1, 2, 5]), image.clone(), qs(&u)).unwrap();
                let report = analyze(&sys, &opts()).unwrap();
                if let LambdaBound::Finite(l) = report.lambda_min() {
                    assert!(l >= q(1, 1));
                }
            }
        }
    }
}
