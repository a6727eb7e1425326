//! Property tests over randomly generated *-polynomials, derivatives,
//! and point clouds.

use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

use ncdc::covering::{kcover, spack, CoverMode, Metric, PointCloud};
use ncdc::derivation::{d_u, partial_deriv, Flavor, TensorElement, URoute};
use ncdc::ncpoly::{Letter, Monomial, PolyTuple, Polynomial};

const ARITY: usize = 3;

fn word_strategy(max_len: usize) -> impl Strategy<Value = Monomial> {
    prop::collection::vec((1u32..=ARITY as u32, any::<bool>()), 0..=max_len)
        .prop_map(|ls| Monomial(ls.into_iter().map(|(g, s)| Letter { gen: g, starred: s }).collect()))
}

fn poly_strategy() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((word_strategy(4), -3i32..=3, -3i32..=3), 1..=4).prop_map(|terms| {
        let mut p = Polynomial::zero(ARITY);
        for (w, re, im) in terms {
            p.add_term(w, Complex64::new(re as f64, im as f64));
        }
        p
    })
}

fn max_coeff(t: &TensorElement) -> f64 {
    t.terms().values().map(|c| c.norm()).fold(0.0, f64::max)
}

fn te_close(a: &TensorElement, b: &TensorElement) -> bool {
    max_coeff(&a.add(&b.scale(Complex64::new(-1.0, 0.0)))) < 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// ∂(fg) = ∂f·(1⊗g) + ∂g·(f⊗1) for both coordinate flavors and
    /// every variable.
    #[test]
    fn leibniz_rule(f in poly_strategy(), g in poly_strategy()) {
        let fg = f.mul(&g).unwrap();
        let one = Polynomial::one(ARITY);
        for flavor in [Flavor::Sa, Flavor::Sk] {
            for j in 1..=ARITY as u32 {
                let lhs = partial_deriv(&fg, j, flavor).unwrap();
                let rhs = partial_deriv(&f, j, flavor)
                    .unwrap()
                    .bimodule_poly(&one, &g)
                    .add(&partial_deriv(&g, j, flavor).unwrap().bimodule_poly(&f, &one));
                prop_assert!(te_close(&lhs, &rhs));
            }
        }
    }

    /// (fg)* = g* f* and f** = f.
    #[test]
    fn star_is_an_anti_involution(f in poly_strategy(), g in poly_strategy()) {
        prop_assert_eq!(f.mul(&g).unwrap().star(), g.star().mul(&f.star()).unwrap());
        prop_assert_eq!(f.star().star(), f);
    }

    /// Derivatives are additive.
    #[test]
    fn derivative_is_additive(f in poly_strategy(), g in poly_strategy()) {
        let sum = f.add(&g).unwrap();
        for j in 1..=ARITY as u32 {
            let lhs = partial_deriv(&sum, j, Flavor::Sa).unwrap();
            let rhs = partial_deriv(&f, j, Flavor::Sa)
                .unwrap()
                .add(&partial_deriv(&g, j, Flavor::Sa).unwrap());
            prop_assert!(te_close(&lhs, &rhs));
        }
    }

    /// The two unitary-calculus routes agree on every word after free
    /// reduction.
    #[test]
    fn unitary_routes_agree(w in word_strategy(5)) {
        let f = PolyTuple::new(vec![Polynomial::from_term(
            ARITY,
            w,
            Complex64::new(1.0, 0.0),
        )])
        .unwrap();
        let by_def = d_u(&f, URoute::Definition).unwrap();
        let by_rule = d_u(&f, URoute::OccurrenceRule).unwrap();
        for j in 0..ARITY {
            let diff = by_def
                .get(0, j)
                .unitary_reduce()
                .add(&by_rule.get(0, j).unitary_reduce().scale(Complex64::new(-1.0, 0.0)));
            prop_assert!(max_coeff(&diff.unitary_reduce()) < 1e-9);
        }
    }

    /// Covering/packing chain on random Euclidean clouds:
    /// S(2ε) ≤ K(ε) ≤ S(ε) ≤ |cloud|, and K is monotone in ε.
    #[test]
    fn covering_packing_chain(
        pts in prop::collection::vec(
            prop::collection::vec(-1.0f64..1.0, 3),
            2..=9,
        ),
        eps in 0.05f64..1.5,
    ) {
        let cloud = PointCloud::new(
            pts.into_iter().map(DVector::from_vec).collect(),
            Metric::Euclidean,
        )
        .unwrap();
        let k_eps = kcover(&cloud, eps, CoverMode::Exact).unwrap();
        let s_eps = spack(&cloud, eps).unwrap();
        let s_2eps = spack(&cloud, 2.0 * eps).unwrap();
        let k_2eps = kcover(&cloud, 2.0 * eps, CoverMode::Exact).unwrap();
        prop_assert!(s_2eps <= k_eps);
        prop_assert!(k_eps <= s_eps);
        prop_assert!(s_eps <= cloud.len());
        prop_assert!(k_2eps <= k_eps);
        prop_assert!(k_eps >= 1);
    }
}
