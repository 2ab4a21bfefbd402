//! Built-in example systems.

use clap::ValueEnum;
use hyponorm::SystemScope;

use crate::documents::{OptionsDocument, SystemDocument};
use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    /// Quadrature validation of u(x) = x^(3/2), phi(x) = x^2 on [0, 1/2].
    PaperContinuous,
    /// A finite window of a sequence-space family with pointwise criterion 1.
    PaperDiscrete,
    /// The 3-cycle with weights (1, 2, 4).
    CycleDemo,
}

pub fn cycle_demo() -> SystemDocument {
    SystemDocument {
        masses: vec![1.0; 3],
        phi: vec![2, 3, 1],
        u: vec![1.0, 2.0, 4.0],
        scope: SystemScope::Finite,
        options: OptionsDocument::default(),
    }
}

/// Points `1..=window` with `μ({k}) = 1 + 1/k`. Blocks `(3j+1, 3j+2, 3j+3)`
/// map as `a ↦ b`, `b ↦ a`, `c ↦ b`; `u = 1/m` on `a, b` and `0` on `c`.
/// Then `u_a m_a = u_b m_b` on every block, which makes the pointwise
/// criterion identically `1` on the weight's support.
pub fn paper_discrete(window: usize) -> Result<SystemDocument, Failure> {
    if window == 0 || window % 3 == 1 {
        return Err(Failure::input(format!(
            "window {window} would split a block and leave point {window} without its partner; use a size not congruent to 1 mod 3"
        )));
    }
    let mut masses = Vec::with_capacity(window);
    let mut phi = Vec::with_capacity(window);
    let mut u = Vec::with_capacity(window);
    for k in 1..=window {
        let m = 1.0 + 1.0 / k as f64;
        masses.push(m);
        match k % 3 {
            1 => {
                phi.push(k + 1);
                u.push(1.0 / m);
            }
            2 => {
                phi.push(k - 1);
                u.push(1.0 / m);
            }
            _ => {
                phi.push(k - 1);
                u.push(0.0);
            }
        }
    }
    Ok(SystemDocument {
        masses,
        phi,
        u,
        scope: SystemScope::PrefixWindow,
        options: OptionsDocument::default(),
    })
}
