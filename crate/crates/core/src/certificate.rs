//! Machine-checkable records of which sufficient condition fired.
//!
//! Witnesses are stored as `f64` regardless of the scalar the analysis ran
//! in; replaying a certificate recomputes the decision in the original scalar
//! and compares against the stored witnesses.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    NotWeaklyHypercyclic,
    WeaklyClosedOrbit,
    ClosedRange,
    LambdaHyponormal,
    NoLambdaExists,
}

/// The result a certificate relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// A set with `‖x_n‖ ≥ cⁿ`, `c > 1`, is weakly closed.
    GeometricGrowthWeaklyClosed,
    /// `‖Th‖ > ‖h‖` for a λ-hyponormal `T`, `λ ≤ 1`, gives a weakly closed orbit.
    ExpandingOrbitWeaklyClosed,
    /// λ-hyponormal with `0 < λ ≤ 1` excludes weak hypercyclicity.
    HyponormalNotWeaklyHypercyclic,
    /// `T = T*C` with `‖C‖ ≤ 1` excludes weak hypercyclicity.
    ContractiveFactorNotWeaklyHypercyclic,
    /// Some λ works iff `R(T) ⊆ R(T*)`.
    RangeInclusion,
    /// `R(W)` is closed iff `J ≥ δ > 0` on `S(J)`.
    ClosedRangeLowerBound,
    /// Some λ works iff `S(u) ⊆ S(J)`.
    SupportInclusionGate,
    /// λ-hyponormal iff `S(u) ⊆ S(J)` and `(h∘φ)·E(u²/J) ≤ λ`.
    PointwiseHyponormality,
    /// The pointwise criterion at some `λ ≤ 1` excludes weak hypercyclicity
    /// of `M_u C_φ`.
    PointwiseNotWeaklyHypercyclic,
}

impl Theorem {
    pub fn tag(self) -> &'static str {
        match self {
            Theorem::GeometricGrowthWeaklyClosed => "geometric-growth-weakly-closed",
            Theorem::ExpandingOrbitWeaklyClosed => "expanding-orbit-weakly-closed",
            Theorem::HyponormalNotWeaklyHypercyclic => "hyponormal-not-weakly-hypercyclic",
            Theorem::ContractiveFactorNotWeaklyHypercyclic => "contractive-factor-not-weakly-hypercyclic",
            Theorem::RangeInclusion => "range-inclusion",
            Theorem::ClosedRangeLowerBound => "closed-range-lower-bound",
            Theorem::SupportInclusionGate => "support-inclusion-gate",
            Theorem::PointwiseHyponormality => "pointwise-hyponormality",
            Theorem::PointwiseNotWeaklyHypercyclic => "pointwise-not-weakly-hypercyclic",
        }
    }
}

/// How far the conclusion reaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    /// The analysed object is the whole (finite) operator.
    ExactFinite,
    /// Checked on a finite window of an infinite system only.
    PrefixEvidence,
    /// Window check plus a caller-asserted bound on the tail.
    TailBoundAsserted,
}

impl Scope {
    pub fn note(self) -> &'static str {
        match self {
            Scope::ExactFinite => "exact for the finite system",
            Scope::PrefixEvidence => "prefix evidence only",
            Scope::TailBoundAsserted => "window verified, tail bound asserted by caller",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Witnesses {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// 1-based point or coordinate index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub theorem: Theorem,
    pub witnesses: Witnesses,
    pub scope: Scope,
}

impl Certificate {
    pub fn new(kind: CertificateKind, theorem: Theorem, witnesses: Witnesses, scope: Scope) -> Self {
        Self {
            kind,
            theorem,
            witnesses,
            scope,
        }
    }

    pub fn is_conclusive(&self) -> bool {
        self.scope != Scope::PrefixEvidence
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} [{}] ({})", self.kind, self.theorem.tag(), self.scope.note())?;
        let w = &self.witnesses;
        if let Some(l) = w.lambda {
            write!(f, " lambda={l:?}")?;
        }
        if let Some(d) = w.delta {
            write!(f, " delta={d:?}")?;
        }
        if let Some(i) = w.index {
            write!(f, " index={i}")?;
        }
        if let Some(c) = w.growth_constant {
            write!(f, " c={c:?}")?;
        }
        if let Some(n) = w.factor_norm {
            write!(f, " factor_norm={n:?}")?;
        }
        Ok(())
    }
}

/// `|a − b| ≤ tol·max(|a|, |b|, 1)`.
pub(crate) fn witness_matches(stored: Option<f64>, recomputed: f64, tol: f64) -> bool {
    match stored {
        Some(s) => (s - recomputed).abs() <= tol * s.abs().max(recomputed.abs()).max(1.0),
        None => false,
    }
}
