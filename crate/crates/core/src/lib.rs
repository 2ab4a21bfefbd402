//! Weighted composition operators `W = M_u C_φ` on discrete measure spaces,
//! λ-hyponormality, closed range, and weak-hypercyclicity exclusion, with
//! dense-matrix oracles for every pointwise decision.
//!
//! The pointwise kernels are generic over [`Field`] and run on `f32`, `f64`
//! and exact rationals; the dense and quadrature routines need [`Real`].
//!
//! ```
//! use hyponorm::{analyze, AnalysisOptions, LambdaBound, System};
//!
//! let sys = System::from_parts(vec![1.0; 3], vec![1, 2, 0], vec![1.0, 2.0, 4.0]).unwrap();
//! let report = analyze(&sys, &AnalysisOptions::default()).unwrap();
//! assert_eq!(report.lambda_min(), LambdaBound::Finite(4.0));
//! ```

// `!(x > 0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod certificate;
pub mod continuous;
pub mod dense;
pub mod error;
pub mod linalg;
pub mod measure;
pub mod scalar;
pub mod wco;
pub mod xcheck;

pub use analysis::{
    analyze, closed_range_check, hypercyclicity_certificate, hyponormality_criterion, kernel_inclusion_check,
    range_star_support, verify_certificate, AnalysisOptions, AnalysisReport, ClosedRangeReport, Criterion, GrowthRow,
    LambdaBound, SystemScope,
};
pub use certificate::{Certificate, CertificateKind, Scope, Theorem, Witnesses};
pub use continuous::{continuous_example_check, ContinuousReport, JClosedForm, QuadratureGrid};
pub use dense::{
    analyze_matrix, douglas_factor, growth_certificate, is_lambda_hyponormal, lambda_sequence, minimal_lambda,
    not_weakly_hypercyclic_certificate, orbit_bound_check, orbit_norms, weakly_closed_orbit_certificate,
    DenseTolerances, FactorizationResult, LambdaSequence, MatrixOperator, MatrixReport, MinimalLambda, OrbitBoundTable,
};
pub use error::{Error, Result};
pub use measure::{
    conditional_expectation, pushforward_density, radon_nikodym_h, support_of, DiscreteMeasureSpace, RealFunction,
    Role, Support, Transformation,
};
pub use scalar::{Field, Real};
pub use wco::WeightedCompositionSystem;
pub use xcheck::{matrix_of_system, xcheck_kernels, xcheck_lambda, xcheck_operator_formulas};

pub use num_complex::Complex;

/// Exact rational scalar. Arithmetic panics on `i64` overflow, which long
/// `J_n` tables reach quickly; keep `max_n` small.
pub type Rational = num_rational::Ratio<i64>;
pub type MeasureSpace = DiscreteMeasureSpace<f64>;
pub type System = WeightedCompositionSystem<f64>;
pub type ExactSystem = WeightedCompositionSystem<Rational>;
pub type Matrix = MatrixOperator<f64>;
pub type Report = AnalysisReport<f64>;
