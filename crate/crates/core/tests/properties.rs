//! Property tests: algebraic identities, structural invariants, and
//! independent oracles for the engines, obfuscation, and predictors.

use std::collections::BTreeMap;
use std::sync::Arc;

use iwasawa_core::coinvariants::{CoinvariantEngine, ExpandedEngine, LayeredEngine};
use iwasawa_core::expand::{smith_normal_form, DenseMatrix};
use iwasawa_core::oracle::{build_elementary, obfuscate, random_recipe, ConstructionRecipe};
use iwasawa_core::padic::CoefficientRing;
use iwasawa_core::poly::{cyclotomic, omega, phi_p_power, weierstrass_divide, DegreeBudget, IwasawaPoly};
use iwasawa_core::predictors::{
    bdp_order_lower_bound, growth_sequence, mw_tate_prediction, predict, total_rank, GrowthKind, GrowthSequence,
    RankTable, SettingTag,
};
use iwasawa_core::presentation::ModulePresentation;
use iwasawa_core::structure::{StructureAnalyzer, Verdict};
use proptest::prelude::*;

const PRIMES: [u64; 3] = [5, 7, 11];

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(PRIMES.to_vec())
}

fn ring_and_triple() -> impl Strategy<Value = (CoefficientRing, [Vec<u128>; 3])> {
    (prime(), 1usize..=2, 2u32..=12).prop_flat_map(|(p, d, n)| {
        let r = CoefficientRing::new(p, d, n).unwrap();
        let m = r.modulus();
        let elem = prop::collection::vec(0..m, d);
        (Just(r), [elem.clone(), elem.clone(), elem])
    })
}

/// A random distinguished polynomial of degree `1..=4` and a random
/// polynomial of degree `< 9`.
fn division_pair() -> impl Strategy<Value = (CoefficientRing, Vec<i128>, Vec<i128>)> {
    (prime(), 3u32..=10, 1usize..=4, 0usize..9).prop_flat_map(|(p, n, dg, df)| {
        let r = CoefficientRing::zp(p, n).unwrap();
        let m = r.modulus() as i128;
        let low = prop::collection::vec((0..m / p as i128).prop_map(move |c| c * p as i128), dg);
        let f = prop::collection::vec(0..m, df + 1);
        (Just(r), low, f)
    })
}

/// Small random presentations: entries of degree ≤ 2 with small integer
/// coefficients, `1..=2` generators and `0..=2` relations.
fn small_presentation(p: u64) -> impl Strategy<Value = ModulePresentation> {
    (1usize..=2, 0usize..=2).prop_flat_map(move |(g, c)| {
        prop::collection::vec(prop::collection::vec(-6i128..=6, 3), g * c).prop_map(move |entries| {
            let r = CoefficientRing::zp(p, 24).unwrap();
            let rows: Vec<Vec<Vec<i128>>> =
                (0..g).map(|i| (0..c).map(|k| entries[i * c + k].clone()).collect()).collect();
            if c == 0 {
                ModulePresentation::free(&r, g)
            } else {
                ModulePresentation::from_int_rows(&r, &rows).unwrap()
            }
        })
    })
}

fn poly_det(m: &[Vec<IwasawaPoly>]) -> IwasawaPoly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = IwasawaPoly::zero(m[0][0].ring());
    for j in 0..n {
        let minor: Vec<Vec<IwasawaPoly>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, e)| e.clone()).collect()).collect();
        let term = m[0][j].mul(&poly_det(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Random unimodular matrix: product of unit-lower and unit-upper
/// triangular matrices with a permutation.
fn unimodular(r: &CoefficientRing, n: usize, lower: &[i128], upper: &[i128], perm: &[usize]) -> DenseMatrix {
    let mut l = DenseMatrix::identity(r, n);
    let mut u = DenseMatrix::identity(r, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..i {
            l.set(i, j, r.from_int(lower[k]));
            u.set(j, i, r.from_int(upper[k]));
            k += 1;
        }
    }
    let mut pm = DenseMatrix::zeros(r, n, n);
    for (i, &j) in perm.iter().enumerate() {
        pm.set(i, j, r.one());
    }
    pm.mul(&l).mul(&u)
}

fn levels(n_max: u32) -> Vec<u32> {
    (0..=n_max).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn ring_axioms((r, [a, b, c]) in ring_and_triple()) {
        let (a, b, c) = (r.from_coords(&a).unwrap(), r.from_coords(&b).unwrap(), r.from_coords(&c).unwrap());
        prop_assert_eq!(r.mul(&r.mul(&a, &b), &c), r.mul(&a, &r.mul(&b, &c)));
        prop_assert_eq!(r.add(&r.add(&a, &b), &c), r.add(&a, &r.add(&b, &c)));
        prop_assert_eq!(r.mul(&a, &r.add(&b, &c)), r.add(&r.mul(&a, &b), &r.mul(&a, &c)));
        prop_assert_eq!(r.mul(&a, &b), r.mul(&b, &a));
        prop_assert_eq!(r.sub(&r.add(&a, &b), &b), a.clone());
        if r.is_unit(&a) {
            prop_assert_eq!(r.mul(&r.invert(&a).unwrap(), &a), r.one());
        } else {
            prop_assert!(r.invert(&a).is_err());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn weierstrass_round_trip((r, low, f) in division_pair()) {
        let mut g = low;
        g.push(1);
        let g = IwasawaPoly::from_ints(&r, &g);
        let f = IwasawaPoly::from_ints(&r, &f);
        prop_assert!(g.is_distinguished());
        let (q, rem) = weierstrass_divide(&f, &g).unwrap();
        prop_assert_eq!(q.mul(&g).add(&rem), f);
        prop_assert!(rem.degree().map_or(true, |d| d < g.degree().unwrap()));
    }
}

#[test]
fn tower_polynomial_identities() {
    for p in PRIMES {
        let r = CoefficientRing::zp(p, 20).unwrap();
        let b = DegreeBudget::default();
        let top = if p == 5 { 4 } else { 3 };
        for n in 0..=top {
            let phi = cyclotomic(&r, n, b).unwrap();
            let w = omega(&r, n, b).unwrap();
            assert!(phi.is_distinguished(), "Φ_{n} at p = {p}");
            assert_eq!(w.degree(), Some((p as usize).pow(n)));
            assert_eq!(phi.degree(), Some(phi_p_power(p, n)));
            if n >= 1 {
                assert_eq!(phi.mul(&omega(&r, n - 1, b).unwrap()), w, "n = {n}, p = {p}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn smith_exponents_are_invariant_under_unimodular_conjugation(
        n in 2usize..=4,
        entries in prop::collection::vec(prop::sample::select(vec![0i128, 1, 5, 25, 3, 10, 125, -5, 50]), 16),
        lower in prop::collection::vec(-40i128..40, 6),
        upper in prop::collection::vec(-40i128..40, 6),
        lower2 in prop::collection::vec(-40i128..40, 6),
        upper2 in prop::collection::vec(-40i128..40, 6),
        perm_seed in any::<u64>(),
    ) {
        let r = CoefficientRing::zp(5, 16).unwrap();
        let rows: Vec<Vec<i128>> = (0..n).map(|i| entries[i * n..(i + 1) * n].to_vec()).collect();
        let a = DenseMatrix::from_ints(&r, &rows);
        let perm: Vec<usize> = (0..n).map(|i| (i + perm_seed as usize) % n).collect();
        let u = unimodular(&r, n, &lower, &upper, &perm);
        let v = unimodular(&r, n, &lower2, &upper2, &(0..n).collect::<Vec<_>>());
        let conj = u.mul(&a).mul(&v);
        prop_assert_eq!(smith_normal_form(&a).exponents, smith_normal_form(&conj).exponents);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn free_rank_is_additive_under_direct_sum(
        a in small_presentation(5),
        b in small_presentation(5),
        n in 0u32..=2,
    ) {
        let budget = DegreeBudget::for_levels(5, 2);
        let sum = a.direct_sum(&b).unwrap();
        let rank = |m: &ModulePresentation| LayeredEngine.analyze(m, &[n], budget).unwrap()[0].structure.free_rank;
        prop_assert_eq!(rank(&sum), rank(&a) + rank(&b));
    }

    #[test]
    fn component_ranks_sum_to_the_free_rank(m in small_presentation(7), n in 0u32..=2) {
        let budget = DegreeBudget::for_levels(7, 2);
        for la in LayeredEngine.analyze(&m, &levels(n), budget).unwrap() {
            prop_assert_eq!(la.components.ranks.iter().sum::<usize>(), la.structure.free_rank);
        }
    }

    #[test]
    fn layered_and_expanded_engines_agree(m in small_presentation(5)) {
        let budget = DegreeBudget::for_levels(5, 2);
        let a = LayeredEngine.analyze(&m, &levels(2), budget).unwrap();
        let b = ExpandedEngine.analyze(&m, &levels(2), budget).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn determinant_scales_by_the_recorded_factor(
        g in 1usize..=3,
        entries in prop::collection::vec(prop::collection::vec(-6i128..=6, 2), 9),
        seed in any::<u64>(),
        steps in 0usize..=10,
    ) {
        let r = CoefficientRing::zp(5, 20).unwrap();
        let rows: Vec<Vec<Vec<i128>>> = (0..g).map(|i| (0..g).map(|k| entries[i * 3 + k].clone()).collect()).collect();
        let m = ModulePresentation::from_int_rows(&r, &rows).unwrap();
        let ob = obfuscate(&m, seed, steps);
        let before = poly_det(m.relations());
        let after = poly_det(ob.presentation.relations());
        prop_assert_eq!(after, before.scale(&ob.det_factor));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn elementary_modules_match_the_closed_form_rank(
        p in prop::sample::select(vec![5u64, 7]),
        r in 0u32..=2,
        s in prop::collection::vec(0u32..=2, 4),
    ) {
        let ring = CoefficientRing::zp(p, 24).unwrap();
        let recipe = ConstructionRecipe {
            free_rank: r,
            cyclo_multiplicities: s.iter().enumerate().map(|(j, &x)| (j as u32, x)).collect::<BTreeMap<_, _>>(),
            ..Default::default()
        };
        let budget = DegreeBudget::for_levels(p, 3);
        let m = build_elementary(&ring, &recipe, budget).unwrap();
        for la in LayeredEngine.analyze(&m, &levels(3), budget).unwrap() {
            let n = la.structure.level;
            let closed = r as usize * (p as usize).pow(n)
                + (0..=n).map(|j| s[j as usize] as usize * phi_p_power(p, j)).sum::<usize>();
            prop_assert_eq!(la.structure.free_rank, closed);
            prop_assert_eq!(la.structure.free_rank, recipe.expected_free_rank(p, n));
        }
    }

    #[test]
    fn obfuscation_preserves_every_level_invariant(seed in any::<u64>(), p in prop::sample::select(vec![5u64, 7])) {
        let ring = CoefficientRing::zp(p, 24).unwrap();
        let budget = DegreeBudget::for_levels(p, 2);
        let recipe = random_recipe(seed, p, 2, 5);
        let m = build_elementary(&ring, &recipe, budget).unwrap();
        let ob = obfuscate(&m, seed.rotate_left(17), 24).presentation;
        let a = LayeredEngine.analyze(&m, &levels(2), budget).unwrap();
        let b = LayeredEngine.analyze(&ob, &levels(2), budget).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn classification_is_invariant_under_a_change_of_generator(seed in any::<u64>(), u in 1u128..200) {
        prop_assume!(u % 5 != 0);
        let ring = CoefficientRing::zp(5, 24).unwrap();
        let recipe = random_recipe(seed, 5, 3, 5);
        let m = build_elementary(&ring, &recipe, DegreeBudget::for_levels(5, 3)).unwrap();
        let rep = StructureAnalyzer::new(Arc::new(LayeredEngine)).generator_change_invariance(&m, u, 3).unwrap();
        prop_assert_eq!(rep.verdict, Verdict::Pass);
    }
}

fn growth(kind: GrowthKind, max: u64) -> impl Strategy<Value = GrowthSequence> {
    (prime(), prop::collection::vec(0..=max, 1..=5))
        .prop_map(move |(p, v)| GrowthSequence::new(p, kind, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn predictions_are_monotone(
        idx in 0usize..8,
        s in growth(GrowthKind::E, 6),
        bump_at in any::<prop::sample::Index>(),
        bump in 1u64..4,
    ) {
        let tag = SettingTag::ALL[idx];
        let mut values: Vec<u64> = s.values.iter().map(|&x| x.max(1)).collect();
        let base = GrowthSequence::new(s.p, tag.growth_kind(), values.clone()).unwrap();
        let i = bump_at.index(values.len());
        values[i] += bump;
        let bigger = GrowthSequence::new(s.p, tag.growth_kind(), values).unwrap();
        let a = predict(tag, &base).unwrap().prediction;
        let b = predict(tag, &bigger).unwrap().prediction;
        for n in 0..=base.n_max() {
            let (lo_a, hi_a) = a.bounds_at(n);
            let (lo_b, hi_b) = b.bounds_at(n);
            prop_assert!(lo_a <= lo_b && hi_a <= hi_b, "{} level {}", tag.name(), n);
        }
    }

    #[test]
    fn fine_intervals_are_the_two_bounding_formulas(s in growth(GrowthKind::E, 8)) {
        let fine = predict(SettingTag::HeegnerFine, &s).unwrap().prediction;
        for (n, &e) in s.values.iter().enumerate() {
            let (lo, hi) = fine.bounds_at(n as u32);
            prop_assert_eq!(lo, e.saturating_sub(2));
            prop_assert_eq!(hi, e.saturating_sub(1));
            // Every admissible exponent lies between them.
            for admissible in e.saturating_sub(2)..=e.saturating_sub(1) {
                prop_assert!(lo <= admissible && admissible <= hi);
            }
        }
        if s.values.iter().all(|&e| e >= 1) {
            let bdp = predict(SettingTag::HeegnerBDP, &s).unwrap().prediction;
            for n in 0..=s.n_max() {
                let (m, _) = bdp.bounds_at(n);
                let (lo, hi) = fine.bounds_at(n);
                prop_assert!(lo <= m && m <= hi);
            }
        }
    }

    #[test]
    fn growth_sequence_inverts_the_table_builder(
        s in growth(GrowthKind::E, 5),
        o in any::<bool>(),
    ) {
        let s = if o { GrowthSequence::new(s.p, GrowthKind::F, s.values.clone()).unwrap() } else { s };
        let table = RankTable::from_growth(&s).unwrap();
        prop_assert_eq!(growth_sequence(&table, s.kind).unwrap(), s);
    }

    #[test]
    fn tate_type_reproduces_the_rank(s in growth(GrowthKind::E, 5)) {
        let table = RankTable::from_growth(&s).unwrap();
        for n in 0..=s.n_max() {
            let factors = mw_tate_prediction(&s, n).unwrap();
            prop_assert_eq!(total_rank(s.p, &factors), table.values[n as usize]);
        }
    }

    #[test]
    fn bdp_bound_is_nonnegative_and_vanishes_only_at_one(e in 1u64..10_000) {
        let b = bdp_order_lower_bound(e).unwrap();
        prop_assert_eq!(b.numerator == 0, e == 1);
        prop_assert_eq!(b.ceiling == 0, e == 1);
        prop_assert_eq!(b.numerator * 2, (e - 1) * b.denominator);
        prop_assert!(b.ceiling * 2 >= e - 1 && b.ceiling * 2 <= e);
    }
}
