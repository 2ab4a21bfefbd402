//! The weighted composition operator `W = M_u C_φ` on `ℓ²(μ)`.

use crate::error::{Error, Result};
use crate::measure::{
    conditional_expectation, pushforward_density, radon_nikodym_h, DiscreteMeasureSpace, RealFunction, Role,
    Transformation,
};
use crate::scalar::{Field, Real};

/// `(space, φ, u)` with `u ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCompositionSystem<S> {
    space: DiscreteMeasureSpace<S>,
    map: Transformation,
    weight: RealFunction<S>,
}

impl<S: Field> WeightedCompositionSystem<S> {
    pub fn new(space: DiscreteMeasureSpace<S>, map: Transformation, weight: Vec<S>) -> Result<Self> {
        space.check_len(map.len())?;
        space.check_len(weight.len())?;
        if let Some(index) = weight.iter().position(|w| *w < S::zero()) {
            return Err(Error::NegativeWeight { index });
        }
        Ok(Self {
            space,
            map,
            weight: RealFunction::new(weight, Role::Weight),
        })
    }

    /// Convenience constructor from raw masses, 0-based images and weights.
    pub fn from_parts(masses: Vec<S>, image: Vec<usize>, weight: Vec<S>) -> Result<Self> {
        Self::new(DiscreteMeasureSpace::new(masses)?, Transformation::new(image)?, weight)
    }

    pub fn space(&self) -> &DiscreteMeasureSpace<S> {
        &self.space
    }

    pub fn map(&self) -> &Transformation {
        &self.map
    }

    pub fn weight(&self) -> &RealFunction<S> {
        &self.weight
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.weight.iter().all(|w| w.is_zero())
    }

    /// `(Wf)(k) = u_k f(φ(k))`.
    pub fn apply_w(&self, f: &[S]) -> Result<RealFunction<S>> {
        self.space.check_len(f.len())?;
        let values = (0..self.len()).map(|k| self.weight[k] * f[self.map.apply(k)]).collect();
        Ok(RealFunction::new(values, Role::Generic))
    }

    /// `(W*f)(k) = (1/m_k) Σ_{j∈φ⁻¹(k)} u_j f_j m_j`.
    pub fn apply_w_star(&self, f: &[S]) -> Result<RealFunction<S>> {
        self.space.check_len(f.len())?;
        let uf: Vec<S> = self.weight.iter().zip(f).map(|(u, x)| *u * *x).collect();
        Ok(pushforward_density(&self.space, &self.map, &uf)?.with_role(Role::Generic))
    }

    /// `WW*f = u·(h∘φ)·E(uf)`, evaluated from that explicit form rather than
    /// by composing `W` with `W*`.
    pub fn apply_ww_star(&self, f: &[S]) -> Result<RealFunction<S>> {
        self.space.check_len(f.len())?;
        let h = self.h();
        let uf: Vec<S> = self.weight.iter().zip(f).map(|(u, x)| *u * *x).collect();
        let e = conditional_expectation(&self.space, &self.map, &uf)?;
        let values = (0..self.len())
            .map(|k| self.weight[k] * h[self.map.apply(k)] * e[k])
            .collect();
        Ok(RealFunction::new(values, Role::Generic))
    }

    /// Applies `W` `n` times.
    pub fn apply_w_power(&self, f: &[S], n: usize) -> Result<RealFunction<S>> {
        self.space.check_len(f.len())?;
        let mut current = RealFunction::new(f.to_vec(), Role::Generic);
        for _ in 0..n {
            current = self.apply_w(&current)?;
        }
        Ok(current)
    }

    /// Radon–Nikodym derivative of `μ∘φ⁻¹`.
    pub fn h(&self) -> RealFunction<S> {
        radon_nikodym_h(&self.space, &self.map).expect("system dimensions were validated")
    }

    /// `J = h·E(u²)∘φ⁻¹`, the multiplier of `W*W`.
    pub fn compute_j(&self) -> RealFunction<S> {
        let u2: Vec<S> = self.weight.iter().map(|u| *u * *u).collect();
        pushforward_density(&self.space, &self.map, &u2)
            .expect("system dimensions were validated")
            .with_role(Role::Multiplier)
    }

    /// `u_n = Π_{k<n} u∘φᵏ`; the empty product for `n = 0`.
    pub fn weight_power(&self, n: usize) -> RealFunction<S> {
        let values = (0..self.len())
            .map(|k| {
                let mut x = k;
                let mut product = S::one();
                for _ in 0..n {
                    product = product * self.weight[x];
                    x = self.map.apply(x);
                }
                product
            })
            .collect();
        RealFunction::new(values, Role::Weight)
    }

    /// `Wⁿ` as a weighted composition system `(space, φⁿ, u_n)`.
    pub fn power_system(&self, n: usize) -> Self {
        Self {
            space: self.space.clone(),
            map: self.map.iterate(n),
            weight: self.weight_power(n),
        }
    }

    /// `J_n` via `J_n = h·E(J_{n−1} u²)∘φ⁻¹` starting from `J_1 = J`.
    /// `n = 0` yields the constant 1 (the multiplier of the identity).
    pub fn jn_recursive(&self, n: usize) -> RealFunction<S> {
        self.j_table(n)
            .pop()
            .unwrap_or_else(|| RealFunction::constant(S::one(), self.len(), Role::Multiplier))
    }

    /// `J_1..=J_max` by recursion.
    pub fn j_table(&self, max_n: usize) -> Vec<RealFunction<S>> {
        let u2: Vec<S> = self.weight.iter().map(|u| *u * *u).collect();
        let mut table: Vec<RealFunction<S>> = Vec::with_capacity(max_n);
        for n in 1..=max_n {
            let next = match table.last() {
                None => self.compute_j(),
                Some(prev) => {
                    let w: Vec<S> = prev.iter().zip(&u2).map(|(j, u)| *j * *u).collect();
                    pushforward_density(&self.space, &self.map, &w)
                        .expect("system dimensions were validated")
                        .with_role(Role::Multiplier)
                }
            };
            debug_assert_eq!(table.len() + 1, n);
            table.push(next);
        }
        table
    }

    /// `J_n = h_n E_n(u_n²)∘φ⁻ⁿ`, i.e. the `J` of `(space, φⁿ, u_n)`.
    pub fn jn_direct(&self, n: usize) -> RealFunction<S> {
        self.power_system(n).compute_j()
    }

    /// `h_n`, the Radon–Nikodym derivative of `μ∘φ⁻ⁿ`.
    pub fn hn(&self, n: usize) -> RealFunction<S> {
        radon_nikodym_h(&self.space, &self.map.iterate(n)).expect("system dimensions were validated")
    }
}

impl<S: Real> WeightedCompositionSystem<S> {
    /// Multiplier `√J` of `|W|`.
    pub fn compute_modulus(&self) -> RealFunction<S> {
        let values = self.compute_j().iter().map(|j| j.sqrt()).collect();
        RealFunction::new(values, Role::Multiplier)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

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

    fn folded() -> WeightedCompositionSystem<Q> {
        WeightedCompositionSystem::from_parts(qs(&[1, 2, 1]), vec![1, 2, 2], qs(&[1, 0, 1])).unwrap()
    }

    fn identity(u: Vec<f64>) -> WeightedCompositionSystem<f64> {
        let n = u.len();
        WeightedCompositionSystem::from_parts(vec![1.0; n], (0..n).collect(), u).unwrap()
    }

    #[test]
    fn rejects_negative_weight() {
        let err = WeightedCompositionSystem::from_parts(vec![1.0, 1.0], vec![0, 1], vec![1.0, -0.5]).unwrap_err();
        assert_eq!(err, Error::NegativeWeight { index: 1 });
    }

    #[test]
    fn apply_w_examples() {
        assert_eq!(cycle().apply_w(&qs(&[1, 1, 1])).unwrap().values(), &qs(&[1, 2, 4])[..]);
        let id = identity(vec![1.0; 3]);
        assert_eq!(id.apply_w(&[3.0, -1.0, 2.0]).unwrap().values(), &[3.0, -1.0, 2.0]);
        assert_eq!(cycle().apply_w(&qs(&[0, 0, 0])).unwrap().values(), &qs(&[0, 0, 0])[..]);
    }

    #[test]
    fn apply_w_star_examples() {
        assert_eq!(
            cycle().apply_w_star(&qs(&[1, 1, 1])).unwrap().values(),
            &qs(&[4, 1, 2])[..]
        );
        let id = identity(vec![1.0; 3]);
        assert_eq!(id.apply_w_star(&[3.0, -1.0, 2.0]).unwrap().values(), &[3.0, -1.0, 2.0]);
    }

    #[test]
    fn ww_star_examples() {
        let id = identity(vec![1.0; 2]);
        assert_eq!(id.apply_ww_star(&[5.0, -2.0]).unwrap().values(), &[5.0, -2.0]);
        // Functions supported off S(u) are orthogonal to R(W).
        let sys = folded();
        let f = qs(&[0, 7, 0]);
        assert_eq!(sys.apply_ww_star(&f).unwrap().values(), &qs(&[0, 0, 0])[..]);
        assert_eq!(sys.apply_w_star(&f).unwrap().values(), &qs(&[0, 0, 0])[..]);
    }

    #[test]
    fn j_examples() {
        assert_eq!(cycle().compute_j().values(), &qs(&[16, 1, 4])[..]);
        assert_eq!(folded().compute_j().values(), &[q(0, 1), q(1, 2), q(1, 1)]);
        let ones = WeightedCompositionSystem::from_parts(qs(&[1, 2, 1]), vec![1, 2, 2], qs(&[1, 1, 1])).unwrap();
        assert_eq!(ones.compute_j(), ones.h().with_role(Role::Multiplier));
    }

    #[test]
    fn j_matches_gram_diagonal_of_cycle() {
        // W*W e_k = J_k e_k, so the k-th diagonal entry of W*W is J_k.
        let sys = cycle();
        for k in 0..3 {
            let mut e = qs(&[0, 0, 0]);
            e[k] = q(1, 1);
            let gram = sys.apply_w_star(&sys.apply_w(&e).unwrap()).unwrap();
            assert_eq!(gram[k], sys.compute_j()[k]);
        }
    }

    #[test]
    fn modulus_squares_to_j() {
        let sys = WeightedCompositionSystem::<f64>::from_parts(vec![1.0, 2.0, 1.0], vec![1, 2, 2], vec![1.0, 0.0, 1.0])
            .unwrap();
        let m = sys.compute_modulus();
        let j = sys.compute_j();
        for (a, b) in m.iter().zip(j.iter()) {
            assert!((a * a - b).abs() < 1e-15);
        }
        let cyc = WeightedCompositionSystem::from_parts(vec![1.0; 3], vec![1, 2, 0], vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(cyc.compute_modulus().values(), &[4.0, 1.0, 2.0]);
    }

    #[test]
    fn weight_power_examples() {
        let sys = cycle();
        assert_eq!(sys.weight_power(1).values(), sys.weight().values());
        assert_eq!(sys.weight_power(2).values(), &qs(&[2, 8, 4])[..]);
        assert_eq!(sys.weight_power(0).values(), &qs(&[1, 1, 1])[..]);
        let ones = identity(vec![1.0; 4]);
        assert!(ones.weight_power(5).iter().all(|v| *v == 1.0));
    }

    #[test]
    fn jn_examples() {
        let sys = cycle();
        assert_eq!(sys.jn_recursive(2).values(), &qs(&[64, 16, 4])[..]);
        assert_eq!(sys.jn_direct(2).values(), &qs(&[64, 16, 4])[..]);
        assert_eq!(sys.jn_recursive(1), sys.compute_j());
        assert_eq!(sys.jn_direct(1), sys.compute_j());
        assert_eq!(sys.jn_recursive(0).values(), &qs(&[1, 1, 1])[..]);
        let id = identity(vec![1.0; 3]);
        assert!(id.jn_recursive(4).iter().all(|v| *v == 1.0));
        assert!(id.jn_direct(4).iter().all(|v| *v == 1.0));
    }

    #[test]
    fn hn_is_jn_of_unit_weight() {
        let sys =
            WeightedCompositionSystem::from_parts(qs(&[1, 2, 1, 3]), vec![1, 2, 2, 0], qs(&[1, 1, 1, 1])).unwrap();
        for n in 1..5 {
            assert_eq!(sys.hn(n).values(), sys.jn_recursive(n).values());
            assert_eq!(sys.hn(n).values(), sys.jn_direct(n).values());
        }
    }

    #[test]
    fn exact_jn_equivalence_on_small_systems() {
        // Exhaustive over all self-maps of three points.
        for code in 0..27usize {
            let image = vec![code % 3, (code / 3) % 3, code / 9];
            let sys =
                WeightedCompositionSystem::from_parts(qs(&[1, 2, 3]), image, vec![q(1, 2), q(0, 1), q(3, 1)]).unwrap();
            for n in 1..=5 {
                assert_eq!(sys.jn_recursive(n), sys.jn_direct(n), "image code {code}, n {n}");
            }
        }
    }

    fn random_system() -> impl Strategy<Value = (WeightedCompositionSystem<f64>, Vec<f64>, Vec<f64>)> {
        (1usize..10).prop_flat_map(|n| {
            (
                prop::collection::vec(0.1f64..10.0, n),
                prop::collection::vec(0..n, n),
                prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0f64..2.0], n),
                prop::collection::vec(-1.0f64..1.0, n),
                prop::collection::vec(-1.0f64..1.0, n),
            )
                .prop_map(|(m, phi, u, f, g)| (WeightedCompositionSystem::from_parts(m, phi, u).unwrap(), f, g))
        })
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    fn vec_close(a: &[f64], b: &[f64], tol: f64) -> bool {
        let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale.max(1e-300))
    }

    proptest! {
        #[test]
        fn adjoint_identity((sys, f, g) in random_system()) {
            let lhs = sys.space().inner(&sys.apply_w(&f).unwrap(), &g).unwrap();
            let rhs = sys.space().inner(&f, &sys.apply_w_star(&g).unwrap()).unwrap();
            let scale = sys.space().norm_sq(&sys.apply_w(&f).unwrap()).unwrap().sqrt()
                * sys.space().norm_sq(&g).unwrap().sqrt();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn ww_star_formula_matches_composition((sys, f, _g) in random_system()) {
            let explicit = sys.apply_ww_star(&f).unwrap();
            let composed = sys.apply_w(&sys.apply_w_star(&f).unwrap()).unwrap();
            prop_assert!(vec_close(&explicit, &composed, 1e-12));
        }

        #[test]
        fn norm_identity_for_w((sys, f, _g) in random_system()) {
            let lhs = sys.space().norm_sq(&sys.apply_w(&f).unwrap()).unwrap();
            let j = sys.compute_j();
            let jf: Vec<f64> = j.iter().zip(&f).map(|(a, b)| a * b * b).collect();
            let rhs = sys.space().integrate(&jf).unwrap();
            prop_assert!(rel_close(lhs, rhs, 1e-10) || lhs.max(rhs) < 1e-300);
            let gram = sys.apply_w_star(&sys.apply_w(&f).unwrap()).unwrap();
            let mult: Vec<f64> = j.iter().zip(&f).map(|(a, b)| a * b).collect();
            prop_assert!(vec_close(&gram, &mult, 1e-12));
        }

        #[test]
        fn jn_routes_agree_and_match_powers((sys, f, _g) in random_system(), n in 1usize..=8) {
            let rec = sys.jn_recursive(n);
            let dir = sys.jn_direct(n);
            prop_assert!(vec_close(&rec, &dir, 1e-10));
            let wn = sys.apply_w_power(&f, n).unwrap();
            let lhs = sys.space().norm_sq(&wn).unwrap();
            let weighted: Vec<f64> = rec.iter().zip(&f).map(|(a, b)| a * b * b).collect();
            let rhs = sys.space().integrate(&weighted).unwrap();
            prop_assert!(rel_close(lhs, rhs, 1e-10) || lhs.max(rhs) < 1e-300);
            let un = sys.weight_power(n);
            let phin = sys.map().iterate(n);
            for k in 0..sys.len() {
                prop_assert!(rel_close(wn[k], un[k] * f[phin.apply(k)], 1e-12) || wn[k] == 0.0);
            }
        }
    }
}
