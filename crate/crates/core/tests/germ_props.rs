mod common;

use std::collections::BTreeMap;

use common::*;
use linpole_core::exactlin::{orthogonal, InnerProduct, Subspace};
use linpole_core::germ::*;
use linpole_core::polynomial::Polynomial;
use linpole_core::rational::{int, Rational};
use proptest::prelude::*;

/// Graded components `f_U` as germs.
fn components(d: &Decomposition, c: &Rational) -> BTreeMap<Subspace, RationalGerm> {
    d.components()
        .into_iter()
        .map(|(u, terms)| {
            let fu = terms.iter().fold(RationalGerm::zero(), |acc, t| acc.add(&t.to_germ()));
            (u, fu.scale(c))
        })
        .collect()
}

fn merge(
    mut a: BTreeMap<Subspace, RationalGerm>,
    b: BTreeMap<Subspace, RationalGerm>,
) -> BTreeMap<Subspace, RationalGerm> {
    for (u, g) in b {
        let slot = a.entry(u).or_default();
        *slot = slot.add(&g);
    }
    a.retain(|_, g| !g.is_zero());
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn round_trip(f in arb_germ(4)) {
        let d = decompose(&f, &InnerProduct::standard());
        prop_assert!(same_function(&recompose(&d), &f));
        prop_assert_eq!(recompose(&d), f);
    }

    #[test]
    fn polar_terms_are_polar(f in arb_germ(4)) {
        let q = InnerProduct::standard();
        let d = decompose(&f, &q);
        for t in &d.terms {
            prop_assert!(!t.num.is_zero());
            prop_assert!(orthogonal(&q, &dep_oracle(&RationalGerm::from_poly(t.num.clone())), &t.supporting_space()));
        }
    }

    #[test]
    fn decomposition_is_linear(f in arb_germ(3), g in arb_germ_sized(3, 2, 2), c in -3i64..=3) {
        let q = InnerProduct::standard();
        let h = f.add(&g.scale(&int(c)));
        let df = decompose(&f, &q);
        let dg = decompose(&g, &q);
        let dh = decompose(&h, &q);
        let one = int(1);
        prop_assert_eq!(components(&dh, &one), merge(components(&df, &one), components(&dg, &int(c))));
        prop_assert_eq!(dh.holo, df.holo.add(&dg.holo.scale(&int(c))));
    }

    #[test]
    fn separation(f in arb_germ(3), g in arb_germ(3)) {
        let q = InnerProduct::standard();
        let zero = f.add(&g).sub(&g.add(&f.scale(&int(2)))).add(&f);
        prop_assert!(decompose(&zero, &q).is_empty());
    }

    #[test]
    fn canonical_under_presentation(f in arb_germ(3), extra in arb_form(3), k in 1i64..=4) {
        let q = InnerProduct::standard();
        let total: u32 = f.denominator().iter().map(|p| p.exp).sum();
        let num = f
            .numerator()
            .mul(&Polynomial::from_form(&extra))
            .scale(&int(k))
            .scale(&num_traits::pow(int(-2), total as usize));
        let mut den: Vec<_> = f.denominator().iter().map(|p| (p.form.scale(&int(-2)), p.exp)).collect();
        den.push((extra.scale(&int(k)), 1));
        den.reverse();
        let g = RationalGerm::new(num, den).unwrap();
        prop_assert_eq!(decompose(&g, &q), decompose(&f, &q));
    }

    #[test]
    fn dependence_matches_oracle(f in arb_germ(4)) {
        let q = InnerProduct::standard();
        prop_assert_eq!(dependence(&f, &q), dep_oracle(&f));
    }

    #[test]
    fn dependence_is_additive_over_components(f in arb_germ(3), g in arb_germ_sized(3, 2, 2)) {
        let q = InnerProduct::standard();
        let h = f.add(&g);
        let d = decompose(&h, &q);
        let mut total = dep_oracle(&RationalGerm::from_poly(d.holo.clone()));
        for (_, terms) in d.components() {
            let fu = terms.iter().fold(RationalGerm::zero(), |acc, t| acc.add(&t.to_germ()));
            total = total.sum(&dep_oracle(&fu));
        }
        prop_assert_eq!(total, dep_oracle(&h));
    }

    #[test]
    fn support_in_dependence(f in arb_germ(3), g in arb_germ_sized(3, 2, 2)) {
        let q = InnerProduct::standard();
        let d = decompose(&f.add(&g), &q);
        for (u, terms) in d.components() {
            let fu = terms.iter().fold(RationalGerm::zero(), |acc, t| acc.add(&t.to_germ()));
            prop_assert!(!fu.is_zero());
            prop_assert!(u.is_subspace_of(&dep_oracle(&fu)));
        }
    }

    #[test]
    fn numerators_confined(f in arb_germ(4)) {
        let q = InnerProduct::standard();
        let dep = dep_oracle(&f);
        for t in &decompose(&f, &q).terms {
            prop_assert!(poly_dependence(&t.num).is_subspace_of(&dep));
        }
    }

    #[test]
    fn p_residue_ignores_inner_product(f in arb_germ(3), q in arb_gram(3)) {
        let std = InnerProduct::standard();
        prop_assert_eq!(p_residue(&f, &std), p_residue(&f, &q));
    }

    #[test]
    fn gram_decomposition_round_trip(f in arb_germ(3), q in arb_gram(3)) {
        let d = decompose(&f, &q);
        prop_assert_eq!(recompose(&d), f);
        for t in &d.terms {
            prop_assert!(orthogonal(&q, &poly_dependence(&t.num), &t.supporting_space()));
        }
    }

    #[test]
    fn projection_is_locality_multiplicative(f in arb_germ(2), g in arb_germ(2)) {
        let q = InnerProduct::standard();
        let g = g.relabel(|v| v + 2);
        prop_assert!(is_local_pair(&f, &g, &q));
        let lhs = project_plus(&f.mul(&g), &q);
        prop_assert_eq!(lhs, project_plus(&f, &q).mul(&project_plus(&g, &q)));
    }
}

#[test]
fn rotated_pair_projection() {
    let q = InnerProduct::standard();
    let s = form(&[(1, 1), (2, 1)]);
    let d = form(&[(1, 1), (2, -1)]);
    let f = frac(Polynomial::from_form(&s).add(&pz(3)).add(&Polynomial::one()), &[(s.clone(), 2)]);
    let g = frac(Polynomial::from_form(&d).add(&Polynomial::constant(int(3))), &[(d, 1)]);
    assert!(is_local_pair(&f, &g, &q));
    assert_eq!(project_plus(&f.mul(&g), &q), project_plus(&f, &q).mul(&project_plus(&g, &q)));
}

#[test]
fn dependence_zero_for_constants() {
    let q = InnerProduct::standard();
    assert_eq!(dependence(&RationalGerm::constant(int(5)), &q), Subspace::zero());
    assert_eq!(dependence(&RationalGerm::zero(), &q), Subspace::zero());
}
