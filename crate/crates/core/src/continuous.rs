//! Quadrature validator for `W = M_u C_φ` on `X = [0, 1/2]` with Lebesgue
//! measure, `φ(x) = x²` and `u(x) = x^{3/2}`.
//!
//! The pushforward identity is treated as ground truth; candidate closed
//! forms for `J` are hypotheses that the validator accepts or rejects.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Right end of `X`.
pub const RIGHT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Midpoint,
}

/// Composite rule on `[0, 1/2]`. Nodes are cell midpoints, so `x = 0` is
/// never sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub nodes: usize,
    pub rule: Rule,
    pub tolerance: f64,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            nodes: 1 << 12,
            rule: Rule::Midpoint,
            tolerance: 1e-6,
        }
    }
}

impl QuadratureGrid {
    pub fn new(nodes: usize, tolerance: f64) -> Result<Self> {
        if nodes < 2 || !(tolerance > 0.0) {
            return Err(Error::InvalidArgument(
                "grid needs at least two nodes and a positive tolerance".into(),
            ));
        }
        Ok(Self {
            nodes,
            rule: Rule::Midpoint,
            tolerance,
        })
    }

    pub fn width(&self) -> f64 {
        RIGHT / self.nodes as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.width()
    }

    /// Cell index containing `y ∈ [0, 1/2]`.
    fn cell_of(&self, y: f64) -> usize {
        ((y / self.width()) as usize).min(self.nodes - 1)
    }

    fn coarsened(&self) -> Self {
        Self {
            nodes: self.nodes / 2,
            ..*self
        }
    }
}

/// Composite midpoint rule with `n` cells.
pub fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let w = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * w)).sum::<f64>() * w
}

pub fn weight(x: f64) -> f64 {
    x * x.sqrt()
}

pub fn map(x: f64) -> f64 {
    x * x
}

/// `dμ∘φ⁻¹/dμ`: `1/(2√y)` on `(0, 1/4]`, zero beyond `φ(X)`.
pub fn h(y: f64) -> f64 {
    if y > 0.0 && y <= map(RIGHT) {
        0.5 / y.sqrt()
    } else {
        0.0
    }
}

/// Candidate closed forms for `J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JClosedForm {
    /// `√x/4` on all of `X`.
    SqrtOverFour,
    /// `x/2` on `φ(X) = [0, 1/4]`, zero beyond.
    HalfX,
}

impl JClosedForm {
    pub const ALL: [JClosedForm; 2] = [JClosedForm::SqrtOverFour, JClosedForm::HalfX];

    pub fn eval(self, x: f64) -> f64 {
        match self {
            JClosedForm::SqrtOverFour => x.sqrt() / 4.0,
            JClosedForm::HalfX if x <= map(RIGHT) => x / 2.0,
            JClosedForm::HalfX => 0.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            JClosedForm::SqrtOverFour => "sqrt(x)/4",
            JClosedForm::HalfX => "x/2",
        }
    }

    /// `(h∘φ)·u²/J`; `φ` is injective on `X`, so the conditional expectation
    /// is the identity.
    pub fn criterion(self, x: f64) -> f64 {
        let j = self.eval(x);
        if j > 0.0 {
            h(map(x)) * weight(x).powi(2) / j
        } else {
            0.0
        }
    }
}

/// Intervals `(a, b)` used for the change-of-variables identity.
pub const INTERVALS: [(f64, f64); 4] = [(0.01, 0.04), (0.0625, 0.25), (0.04, 0.2), (0.1, 0.2)];

fn test_polynomials() -> [fn(f64) -> f64; 4] {
    [|_| 1.0, |x| x, |x| x * x, |x| 3.0 * x.powi(3) - x + 2.0]
}

/// `max |∫_{φ⁻¹(a,b)} f dx − ∫_a^b f(√y)/(2√y) dy|` over test data.
fn change_of_variables_residual(n: usize) -> f64 {
    let mut worst = 0.0f64;
    for (a, b) in INTERVALS {
        for f in test_polynomials() {
            let lhs = midpoint(f, a.sqrt(), b.sqrt().min(RIGHT), n);
            let rhs = midpoint(|y| f(y.sqrt()) / (2.0 * y.sqrt()), a, b, n);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// Sub-cells per grid cell when integrating inside a cell.
const SUB: usize = 8;

/// Pushforward densities of `u²dx` and `dx` under `φ`, averaged per cell:
/// `ν(cell)/|cell|` with `ν(cell) = ∫_{φ⁻¹(cell)∩X} g dx`.
fn pushforward_cells(grid: &QuadratureGrid, g: impl Fn(f64) -> f64) -> Vec<f64> {
    let w = grid.width();
    (0..grid.nodes)
        .map(|i| {
            let (lo, hi) = (i as f64 * w, (i + 1) as f64 * w);
            let (a, b) = (lo.sqrt().min(RIGHT), hi.sqrt().min(RIGHT));
            midpoint(&g, a, b, SUB) / w
        })
        .collect()
}

fn cell_average(grid: &QuadratureGrid, i: usize, f: impl Fn(f64) -> f64) -> f64 {
    let w = grid.width();
    midpoint(f, i as f64 * w, (i + 1) as f64 * w, SUB) / w
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFit {
    pub form: JClosedForm,
    /// Largest gap between the numerical cell values of `J` and the cell
    /// averages of the candidate.
    pub max_deviation: f64,
    pub total_mass: f64,
    pub matches: bool,
    /// Largest criterion value on the grid under this candidate.
    pub criterion_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousReport {
    pub grid: QuadratureGrid,
    /// `h(1/4)` from the closed form.
    pub h_at_quarter: f64,
    /// Largest gap between numerical and closed-form `h` cell averages.
    pub h_deviation: f64,
    pub change_of_variables_residual: f64,
    pub change_of_variables_coarse_residual: f64,
    /// `∫_{φ⁻¹(0,1/4)} u² dx`, by quadrature.
    pub preimage_integral: f64,
    /// `∫ J dμ` from the numerical `J`.
    pub pushforward_total: f64,
    /// Largest relative gap of `∫ J f² dμ = ‖Wf‖²` over test functions.
    pub identity_residual: f64,
    pub candidates: Vec<CandidateFit>,
    /// The unique candidate that reproduces the pushforward, if any.
    pub winner: Option<JClosedForm>,
    /// Criterion from the numerical `J` and `h`, maximized over nodes in `S(J)`.
    pub criterion_max_numerical: f64,
    /// The criterion is `≤ 1` on every node for every evaluation.
    pub criterion_holds: bool,
    /// Nodes where `u > 0` but the numerical `J` vanishes, as `[first, last]`.
    pub support_gap: Option<(f64, f64)>,
}

impl ContinuousReport {
    pub fn passed(&self) -> bool {
        self.change_of_variables_residual < self.grid.tolerance
            && self.identity_residual < self.grid.tolerance
            && self.criterion_holds
            && self.winner.is_some()
    }
}

/// Runs the full validation. Fails with a resolution error when the grid is
/// too coarse for the requested tolerance.
pub fn continuous_example_check(grid: &QuadratureGrid) -> Result<ContinuousReport> {
    let n = grid.nodes;
    let cov = change_of_variables_residual(n);
    let cov_coarse = change_of_variables_residual(grid.coarsened().nodes.max(1));
    if cov >= grid.tolerance {
        return Err(Error::Resolution(format!(
            "change-of-variables residual {cov:e} at {n} nodes exceeds {:e} ({cov_coarse:e} at {} nodes)",
            grid.tolerance,
            n / 2
        )));
    }

    let j_num = pushforward_cells(grid, |x| weight(x).powi(2));
    let h_num = pushforward_cells(grid, |_| 1.0);
    let w = grid.width();
    // exact cell averages of 1/(2√y) on φ(X): (√b − √a)/|cell|
    let quarter = map(RIGHT);
    let h_deviation = (0..n)
        .map(|i| {
            let (a, b) = ((i as f64 * w).min(quarter), ((i + 1) as f64 * w).min(quarter));
            (h_num[i] - (b.sqrt() - a.sqrt()) / w).abs()
        })
        .fold(0.0, f64::max);

    let preimage_integral = midpoint(|x| weight(x).powi(2), 0.0, 0.25f64.sqrt(), n);
    let pushforward_total: f64 = j_num.iter().sum::<f64>() * w;

    let tests: [fn(f64) -> f64; 3] = [|_| 1.0, |y| y, |y| 1.0 - 2.0 * y];
    let identity_residual = tests
        .iter()
        .map(|f| {
            let lhs: f64 = (0..n)
                .map(|i| j_num[i] * cell_average(grid, i, |y| f(y).powi(2)))
                .sum::<f64>()
                * w;
            let rhs = midpoint(|x| weight(x).powi(2) * f(map(x)).powi(2), 0.0, RIGHT, n);
            (lhs - rhs).abs() / rhs.abs()
        })
        .fold(0.0, f64::max);

    let candidates: Vec<CandidateFit> = JClosedForm::ALL
        .iter()
        .map(|&form| {
            let max_deviation = (0..n)
                .map(|i| (j_num[i] - cell_average(grid, i, |y| form.eval(y))).abs())
                .fold(0.0, f64::max);
            let total_mass = midpoint(|y| form.eval(y), 0.0, RIGHT, n);
            let criterion_max = (0..n).map(|i| form.criterion(grid.node(i))).fold(0.0, f64::max);
            CandidateFit {
                form,
                max_deviation,
                total_mass,
                matches: max_deviation < grid.tolerance,
                criterion_max,
            }
        })
        .collect();
    let matching: Vec<JClosedForm> = candidates.iter().filter(|c| c.matches).map(|c| c.form).collect();
    let winner = (matching.len() == 1).then(|| matching[0]);

    let support_cut = grid.tolerance * j_num.iter().cloned().fold(0.0, f64::max);
    let mut criterion_max_numerical = 0.0f64;
    let mut gap: Option<(f64, f64)> = None;
    for (i, &j) in j_num.iter().enumerate().take(n) {
        let x = grid.node(i);
        if j > support_cut {
            let k = h_num[grid.cell_of(map(x))] * weight(x).powi(2) / j;
            criterion_max_numerical = criterion_max_numerical.max(k);
        } else if weight(x) > 0.0 {
            gap = Some(gap.map_or((x, x), |(a, _)| (a, x)));
        }
    }
    let criterion_holds = criterion_max_numerical <= 1.0 && candidates.iter().all(|c| c.criterion_max <= 1.0);

    Ok(ContinuousReport {
        grid: *grid,
        h_at_quarter: h(0.25),
        h_deviation,
        change_of_variables_residual: cov,
        change_of_variables_coarse_residual: cov_coarse,
        preimage_integral,
        pushforward_total,
        identity_residual,
        candidates,
        winner,
        criterion_max_numerical,
        criterion_holds,
        support_gap: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn h_closed_form() {
        assert_eq!(h(0.25), 1.0);
        assert_eq!(h(0.3), 0.0);
        assert_eq!(h(0.0), 0.0);
    }

    #[test]
    fn preimage_integral_is_one_sixty_fourth() {
        let v = midpoint(|x| weight(x).powi(2), 0.0, 0.5, 1 << 12);
        assert_relative_eq!(v, 1.0 / 64.0, max_relative = 1e-6);
    }

    #[test]
    fn candidate_criteria() {
        assert_relative_eq!(
            JClosedForm::SqrtOverFour.criterion(0.5),
            2.0 * 0.5f64.powf(1.5),
            max_relative = 1e-14
        );
        assert_relative_eq!(JClosedForm::HalfX.criterion(0.2), 0.2, max_relative = 1e-14);
        assert_eq!(JClosedForm::HalfX.criterion(0.3), 0.0);
    }

    #[test]
    fn default_grid_report() {
        let r = continuous_example_check(&QuadratureGrid::default()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.winner, Some(JClosedForm::HalfX));
        assert!(r.change_of_variables_residual < 1e-6);
        assert_relative_eq!(r.pushforward_total, 1.0 / 64.0, max_relative = 1e-6);
        let (a, b) = r.support_gap.unwrap();
        assert!(a > 0.25 && a < 0.2502 && b > 0.4999);
        assert!(r.criterion_max_numerical <= 0.2501);
        assert!(r.h_deviation < 1e-6, "{}", r.h_deviation);
    }

    #[test]
    fn midpoint_converges_at_second_order() {
        let coarse = change_of_variables_residual(1 << 10);
        let fine = change_of_variables_residual(1 << 11);
        let ratio = coarse / fine;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }

    #[test]
    fn coarse_grid_is_a_resolution_error() {
        let grid = QuadratureGrid::new(4, 1e-9).unwrap();
        assert!(matches!(continuous_example_check(&grid), Err(Error::Resolution(_))));
    }
}
