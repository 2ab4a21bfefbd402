//! JSON documents read and written by the command-line tool. Indices are
//! 1-based throughout.

use hyponorm::{Certificate, Complex, LambdaBound, Matrix, MeasureSpace, System, SystemScope, Transformation};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::failure::Failure;

pub const TOOL: &str = "hyponorm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `λ_min` as written to reports: a number, `"infinity"` or `"any"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaValue {
    Finite(f64),
    Infinity,
    /// The zero operator; every λ works.
    Any,
}

impl From<LambdaBound<f64>> for LambdaValue {
    fn from(b: LambdaBound<f64>) -> Self {
        match b {
            LambdaBound::Finite(v) => LambdaValue::Finite(v),
            LambdaBound::Infinite => LambdaValue::Infinity,
            LambdaBound::Any => LambdaValue::Any,
        }
    }
}

impl std::fmt::Display for LambdaValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LambdaValue::Finite(v) => write!(f, "{v:?}"),
            LambdaValue::Infinity => f.write_str("infinity"),
            LambdaValue::Any => f.write_str("any"),
        }
    }
}

impl Serialize for LambdaValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            LambdaValue::Finite(v) => s.serialize_f64(*v),
            LambdaValue::Infinity => s.serialize_str("infinity"),
            LambdaValue::Any => s.serialize_str("any"),
        }
    }
}

impl<'de> Deserialize<'de> for LambdaValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Token(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(LambdaValue::Finite(v)),
            Raw::Token(t) if t == "infinity" => Ok(LambdaValue::Infinity),
            Raw::Token(t) if t == "any" => Ok(LambdaValue::Any),
            Raw::Token(t) => Err(serde::de::Error::custom(format!(
                "expected a number, \"infinity\" or \"any\", found {t:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound_asserted: Option<bool>,
}

impl OptionsDocument {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// `(masses, φ, u)` on points `1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    pub masses: Vec<f64>,
    pub phi: Vec<usize>,
    pub u: Vec<f64>,
    /// `prefix-window` marks a finite window of an infinite system.
    #[serde(default)]
    pub scope: SystemScope,
    #[serde(default, skip_serializing_if = "OptionsDocument::is_empty")]
    pub options: OptionsDocument,
}

impl SystemDocument {
    pub fn from_system(sys: &System, scope: SystemScope) -> Self {
        Self {
            masses: sys.space().masses().to_vec(),
            phi: sys.map().image().iter().map(|k| k + 1).collect(),
            u: sys.weight().values().to_vec(),
            scope,
            options: OptionsDocument::default(),
        }
    }

    pub fn to_system(&self) -> Result<System, Failure> {
        let n = self.masses.len();
        if n == 0 {
            return Err(Failure::input("masses: the space needs at least one point"));
        }
        for (name, len) in [("phi", self.phi.len()), ("u", self.u.len())] {
            if len != n {
                return Err(Failure::input(format!("{name}: expected {n} entries, found {len}")));
            }
        }
        if let Some(i) = self.masses.iter().position(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(Failure::input(format!(
                "masses[{}]: mass must be positive and finite",
                i + 1
            )));
        }
        if let Some(i) = self.u.iter().position(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Failure::input(format!(
                "u[{}]: weight must be nonnegative and finite",
                i + 1
            )));
        }
        if let Some(i) = self.phi.iter().position(|&t| t == 0 || t > n) {
            return Err(Failure::invariant(format!(
                "phi[{}] = {} leaves the window 1..={n}; the window is not phi-invariant",
                i + 1,
                self.phi[i]
            )));
        }
        let space = MeasureSpace::new(self.masses.clone()).map_err(|e| Failure::input(e.to_string()))?;
        let map = Transformation::from_one_based(&self.phi).map_err(|e| Failure::invariant(e.to_string()))?;
        System::new(space, map, self.u.clone()).map_err(|e| Failure::input(e.to_string()))
    }
}

/// Dense operator; `entries` are `[re, im]` pairs in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

impl MatrixDocument {
    pub fn to_matrix(&self) -> Result<Matrix, Failure> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Failure::input(format!(
                "entries: expected dim^2 = {} pairs, found {}",
                self.dim * self.dim,
                self.entries.len()
            )));
        }
        let entries = self.entries.iter().map(|[re, im]| Complex::new(*re, *im)).collect();
        Matrix::new(self.dim, entries, self.masses.clone()).map_err(|e| Failure::input(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputDocument {
    Matrix(MatrixDocument),
    System(SystemDocument),
}

impl InputDocument {
    /// Parses either document, dispatching on the presence of `entries`.
    pub fn parse(text: &str, origin: &str) -> Result<Self, Failure> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Failure::input(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
        let is_matrix = value.get("entries").is_some();
        let parsed = if is_matrix {
            serde_json::from_value(value).map(InputDocument::Matrix)
        } else {
            serde_json::from_value(value).map(InputDocument::System)
        };
        let kind = if is_matrix { "matrix" } else { "system" };
        parsed.map_err(|e| Failure::input(format!("{origin}: invalid {kind} document: {e}")))
    }

    pub fn options(&self) -> OptionsDocument {
        match self {
            InputDocument::System(s) => s.options.clone(),
            InputDocument::Matrix(_) => OptionsDocument::default(),
        }
    }
}

/// Lowercase hex SHA-256.
pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Effective tolerances after merging defaults, document options and flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub support_tol: f64,
    pub psd_tol: f64,
    pub max_n: usize,
    pub tail_bound_asserted: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            support_tol: 1e-12,
            psd_tol: 1e-10,
            max_n: 6,
            tail_bound_asserted: false,
        }
    }
}

impl Settings {
    pub fn overlay(mut self, o: &OptionsDocument) -> Self {
        if let Some(v) = o.support_tol {
            self.support_tol = v;
        }
        if let Some(v) = o.psd_tol {
            self.psd_tol = v;
        }
        if let Some(v) = o.max_n {
            self.max_n = v;
        }
        if let Some(v) = o.tail_bound_asserted {
            self.tail_bound_asserted = v;
        }
        self
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if !(self.support_tol >= 0.0) || !(self.psd_tol >= 0.0) {
            return Err(Failure::input("tolerances must be nonnegative"));
        }
        if self.max_n == 0 {
            return Err(Failure::input("--max-n must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRowDocument {
    pub n: usize,
    pub min_on_support: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSection {
    pub h: Vec<f64>,
    pub j: Vec<f64>,
    /// `J_1..J_max_n`.
    pub j_table: Vec<Vec<f64>>,
    pub support_u: Vec<usize>,
    pub support_j: Vec<usize>,
    pub criterion: Vec<f64>,
    pub argmax: Option<usize>,
    pub violating: Option<usize>,
    pub delta: Option<f64>,
    pub preimage_invariant: bool,
    pub growth: Vec<GrowthRowDocument>,
    pub range_star_support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSection {
    pub bracket: Option<[f64; 2]>,
    pub iterations: usize,
    pub diagnostic: Option<String>,
    pub douglas_feasible: bool,
    pub factor_norm: Option<f64>,
    pub implied_lambda: Option<f64>,
    pub factor_residual: Option<f64>,
    pub violating_vector: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flags {
    pub degenerate: bool,
    pub closed_range: bool,
    pub kernel_inclusion: bool,
    pub prefix_window: bool,
    pub tail_bound_asserted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub input_digest: String,
    pub input: InputDocument,
    pub settings: Settings,
    pub lambda_min: LambdaValue,
    pub delta: Option<f64>,
    pub flags: Flags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSection>,
    pub certificates: Vec<Certificate>,
    pub timings: Timings,
}

pub fn pairs(v: &[Complex<f64>]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}
