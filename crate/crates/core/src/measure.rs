//! Discrete sigma-finite measure spaces and the fiber sums every weighted
//! composition formula reduces to.
//!
//! Points are indexed `0..n` internally. Documents and reports use 1-based
//! indices; the conversion happens at the I/O boundary only.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Field;

/// Atoms `0..n` with strictly positive masses.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasureSpace<S> {
    masses: Vec<S>,
}

impl<S: Field> DiscreteMeasureSpace<S> {
    pub fn new(masses: Vec<S>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::EmptySpace);
        }
        if let Some(index) = masses.iter().position(|m| *m <= S::zero()) {
            return Err(Error::NonPositiveMass { index });
        }
        Ok(Self { masses })
    }

    /// Counting measure on `n` points.
    pub fn counting(n: usize) -> Result<Self> {
        Self::new(vec![S::one(); n])
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[S] {
        &self.masses
    }

    pub fn mass(&self, k: usize) -> S {
        self.masses[k]
    }

    pub fn total_mass(&self) -> S {
        self.masses.iter().fold(S::zero(), |acc, m| acc + *m)
    }

    /// `Σ a_k b_k m_k`.
    pub fn inner(&self, a: &[S], b: &[S]) -> Result<S> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        Ok(a.iter()
            .zip(b)
            .zip(&self.masses)
            .fold(S::zero(), |acc, ((x, y), m)| acc + *x * *y * *m))
    }

    /// `Σ |f_k|² m_k`.
    pub fn norm_sq(&self, f: &[S]) -> Result<S> {
        self.inner(f, f)
    }

    /// `Σ f_k m_k`.
    pub fn integrate(&self, f: &[S]) -> Result<S> {
        self.check_len(f.len())?;
        Ok(f.iter().zip(&self.masses).fold(S::zero(), |acc, (x, m)| acc + *x * *m))
    }

    pub(crate) fn check_len(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }
}

/// A self-map of the point window together with its cached preimage lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transformation {
    image: Vec<usize>,
    preimages: Vec<Vec<usize>>,
}

impl Transformation {
    /// Builds the map `k ↦ image[k]` (0-based). Every target must stay inside
    /// the window `0..image.len()`.
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let len = image.len();
        if len == 0 {
            return Err(Error::EmptySpace);
        }
        let mut preimages = vec![Vec::new(); len];
        for (index, &target) in image.iter().enumerate() {
            if target >= len {
                return Err(Error::OutsideWindow { index, target, len });
            }
            preimages[target].push(index);
        }
        Ok(Self { image, preimages })
    }

    /// Same as [`Transformation::new`] with 1-based targets. A target of `0`
    /// is reported as outside the window.
    pub fn from_one_based(targets: &[usize]) -> Result<Self> {
        let len = targets.len();
        let image = targets
            .iter()
            .enumerate()
            .map(|(index, &t)| {
                if t == 0 || t > len {
                    Err(Error::OutsideWindow {
                        index,
                        target: t.wrapping_sub(1),
                        len,
                    })
                } else {
                    Ok(t - 1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(image)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.image[k]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `φ⁻¹({k})`, in increasing order.
    pub fn preimage(&self, k: usize) -> &[usize] {
        &self.preimages[k]
    }

    /// The fiber `φ⁻¹(φ(k))` containing `k`.
    pub fn fiber_of(&self, k: usize) -> &[usize] {
        &self.preimages[self.image[k]]
    }

    pub fn is_injective(&self) -> bool {
        self.preimages.iter().all(|p| p.len() <= 1)
    }

    /// `φⁿ`; `n = 0` gives the identity.
    pub fn iterate(&self, n: usize) -> Self {
        let image = (0..self.len()).map(|k| (0..n).fold(k, |x, _| self.image[x])).collect();
        Self::new(image).expect("iterates of a window map stay in the window")
    }

    /// Full preimage `φ⁻¹(set)` of an index set given as a membership mask.
    pub fn preimage_of_set(&self, members: &[bool]) -> Vec<bool> {
        self.image.iter().map(|&t| members[t]).collect()
    }
}

/// What a pointwise function stands for. Purely informational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Weight,
    Density,
    Multiplier,
    Test,
    Generic,
}

/// A real function on the atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFunction<S> {
    values: Vec<S>,
    role: Role,
}

impl<S: Field> RealFunction<S> {
    pub fn new(values: Vec<S>, role: Role) -> Self {
        Self { values, role }
    }

    pub fn constant(value: S, n: usize, role: Role) -> Self {
        Self::new(vec![value; n], role)
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn max_abs(&self) -> S {
        max_abs(&self.values)
    }
}

impl<S> Deref for RealFunction<S> {
    type Target = [S];

    fn deref(&self) -> &[S] {
        &self.values
    }
}

impl<S: Field> From<Vec<S>> for RealFunction<S> {
    fn from(values: Vec<S>) -> Self {
        Self::new(values, Role::Generic)
    }
}

pub(crate) fn max_abs<S: Field>(values: &[S]) -> S {
    values.iter().fold(S::zero(), |acc, v| acc.max_of(v.abs()))
}

/// The set of indices where a function exceeds a threshold in absolute value.
#[derive(Debug, Clone, PartialEq)]
pub struct Support<S> {
    indices: Vec<usize>,
    tolerance: S,
}

impl<S: Field> Support<S> {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn tolerance(&self) -> S {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.indices.binary_search(&k).is_ok()
    }

    /// First index of `self` missing from `other`, if any.
    pub fn first_outside(&self, other: &Support<S>) -> Option<usize> {
        self.indices.iter().copied().find(|&k| !other.contains(k))
    }

    pub fn is_subset_of(&self, other: &Support<S>) -> bool {
        self.first_outside(other).is_none()
    }

    /// Membership mask over a window of `n` points.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &k in &self.indices {
            mask[k] = true;
        }
        mask
    }

    /// 1-based indices for reporting.
    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|k| k + 1).collect()
    }
}

/// `{k : |f_k| > tol}`.
pub fn support_of<S: Field>(f: &[S], tol: S) -> Result<Support<S>> {
    if tol < S::zero() {
        return Err(Error::InvalidArgument("support tolerance must be nonnegative".into()));
    }
    let indices = f
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > tol)
        .map(|(k, _)| k)
        .collect();
    Ok(Support {
        indices,
        tolerance: tol,
    })
}

/// `rel · max|f|`.
pub fn relative_tolerance<S: Field>(f: &[S], rel: S) -> S {
    rel * max_abs(f)
}

/// Support with the default relative threshold of the scalar type.
pub fn default_support<S: Field>(f: &[S]) -> Support<S> {
    let tol = relative_tolerance(f, S::default_relative_tolerance());
    support_of(f, tol).expect("relative tolerance is nonnegative")
}

fn check_system<S: Field>(space: &DiscreteMeasureSpace<S>, t: &Transformation, f: &[S]) -> Result<()> {
    space.check_len(t.len())?;
    space.check_len(f.len())
}

/// Density of the pushforward of `w dμ` under `φ`:
/// `g(k) = (1/m_k) Σ_{j∈φ⁻¹(k)} w_j m_j`.
///
/// With `w ≡ 1` this is the Radon–Nikodym derivative `h`; with `w = u²` it is
/// `J`.
pub fn pushforward_density<S: Field>(
    space: &DiscreteMeasureSpace<S>,
    t: &Transformation,
    w: &[S],
) -> Result<RealFunction<S>> {
    check_system(space, t, w)?;
    let values = (0..space.len())
        .map(|k| {
            let pushed = t
                .preimage(k)
                .iter()
                .fold(S::zero(), |acc, &j| acc + w[j] * space.mass(j));
            pushed / space.mass(k)
        })
        .collect();
    Ok(RealFunction::new(values, Role::Density))
}

/// `h = dμ∘φ⁻¹ / dμ`.
pub fn radon_nikodym_h<S: Field>(space: &DiscreteMeasureSpace<S>, t: &Transformation) -> Result<RealFunction<S>> {
    space.check_len(t.len())?;
    let ones = vec![S::one(); space.len()];
    pushforward_density(space, t, &ones)
}

/// Conditional expectation onto `φ⁻¹(Σ)`: the mass-weighted average of `f`
/// over the fiber `φ⁻¹(φ(k))`.
pub fn conditional_expectation<S: Field>(
    space: &DiscreteMeasureSpace<S>,
    t: &Transformation,
    f: &[S],
) -> Result<RealFunction<S>> {
    check_system(space, t, f)?;
    let n = space.len();
    // One average per image point, then spread over its fiber.
    let mut averages: Vec<Option<S>> = vec![None; n];
    let values = (0..n)
        .map(|k| {
            let p = t.apply(k);
            *averages[p].get_or_insert_with(|| {
                let (num, den) = t.preimage(p).iter().fold((S::zero(), S::zero()), |(num, den), &j| {
                    (num + f[j] * space.mass(j), den + space.mass(j))
                });
                num / den
            })
        })
        .collect();
    Ok(RealFunction::new(values, Role::Generic))
}
