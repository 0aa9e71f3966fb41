//! Construction, obfuscation, and round-trip behaviour of the oracle harness.

use std::collections::BTreeMap;

use iwasawa_core::oracle::{
    build_elementary, instance_seeds, obfuscate, random_recipe, roundtrip_suite, run_instance, ConstructionRecipe,
    RoundTripConfig, ROUNDTRIP_MAX_GENERATORS,
};
use iwasawa_core::padic::CoefficientRing;
use iwasawa_core::poly::{cyclotomic, DegreeBudget, IwasawaPoly};
use iwasawa_core::presentation::ModulePresentation;
use iwasawa_core::structure::{classify_elementary, GVerdict, StructureAnalyzer, Verdict};

fn zp(p: u64) -> CoefficientRing {
    CoefficientRing::zp(p, 24).unwrap()
}

fn budget() -> DegreeBudget {
    DegreeBudget::for_levels(5, 3)
}

#[test]
fn recipe_for_lambda() {
    let r = zp(5);
    let recipe = ConstructionRecipe { free_rank: 1, ..Default::default() };
    assert_eq!(build_elementary(&r, &recipe, budget()).unwrap(), ModulePresentation::free(&r, 1));
}

#[test]
fn recipe_for_phi_one_plus_p() {
    let r = zp(5);
    let recipe = ConstructionRecipe {
        cyclo_multiplicities: BTreeMap::from([(1, 1)]),
        mu_summands: vec![1],
        ..Default::default()
    };
    let expected = ModulePresentation::cyclic(cyclotomic(&r, 1, budget()).unwrap())
        .direct_sum(&ModulePresentation::cyclic(IwasawaPoly::from_ints(&r, &[5])))
        .unwrap();
    assert_eq!(build_elementary(&r, &recipe, budget()).unwrap(), expected);
}

#[test]
fn recipe_for_the_warning_module() {
    let r = zp(5);
    let recipe = ConstructionRecipe { extra_factors: vec![vec![-5, 1]], ..Default::default() };
    let m = build_elementary(&r, &recipe, budget()).unwrap();
    assert_eq!(m, ModulePresentation::cyclic(IwasawaPoly::from_ints(&r, &[-5, 1])));
    let ty = classify_elementary(&m, 3).unwrap();
    assert_eq!(ty.residual_lambda, 1);
    assert_eq!(ty.g_functor_vanishes, GVerdict::No);
}

#[test]
fn non_distinguished_extra_factors_are_rejected() {
    let r = zp(5);
    let recipe = ConstructionRecipe { extra_factors: vec![vec![1, 1]], ..Default::default() };
    assert_eq!(build_elementary(&r, &recipe, budget()).unwrap_err().exit_code(), 2);
}

#[test]
fn zero_steps_return_the_input_verbatim() {
    let r = zp(5);
    let m = ModulePresentation::free(&r, 2).direct_sum(&ModulePresentation::cyclic(IwasawaPoly::t(&r))).unwrap();
    let ob = obfuscate(&m, 17, 0);
    assert_eq!(ob.presentation, m);
    assert_eq!(ob.det_factor, r.one());
}

#[test]
fn obfuscation_destroys_block_structure_but_not_the_type() {
    let r = zp(7);
    let recipe = ConstructionRecipe {
        free_rank: 1,
        cyclo_multiplicities: BTreeMap::from([(0, 1), (2, 1)]),
        mu_summands: vec![2],
        ..Default::default()
    };
    let m = build_elementary(&r, &recipe, DegreeBudget::for_levels(7, 3)).unwrap();
    let ob = obfuscate(&m, 5, 24).presentation;
    assert_ne!(ob, m);
    assert_eq!(classify_elementary(&ob, 3).unwrap(), classify_elementary(&m, 3).unwrap());
}

#[test]
fn finite_summands_do_not_change_the_type() {
    let r = zp(5);
    let base = ConstructionRecipe { cyclo_multiplicities: BTreeMap::from([(1, 2)]), ..Default::default() };
    let with_finite = ConstructionRecipe { finite_summands: vec![1, 2], ..base.clone() };
    let a = classify_elementary(&build_elementary(&r, &base, budget()).unwrap(), 3).unwrap();
    let b = classify_elementary(&build_elementary(&r, &with_finite, budget()).unwrap(), 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn random_recipes_stay_inside_the_documented_distribution() {
    for seed in 0..200 {
        let rec = random_recipe(seed, 5, 3, ROUNDTRIP_MAX_GENERATORS);
        assert!(rec.generator_count() <= ROUNDTRIP_MAX_GENERATORS);
        assert!(rec.cyclo_multiplicities.iter().all(|(&j, &s)| j <= 2 && s <= 2));
        assert!(rec.mu_summands.len() <= 2 && rec.mu_summands.iter().all(|&e| (1..=2).contains(&e)));
        assert!(rec.extra_factors.len() <= 1 && rec.extra_factors.iter().all(|f| f.len() <= 3));
    }
}

#[test]
fn extra_factor_instances_are_excluded_from_the_verifiers() {
    let cfg = RoundTripConfig::new(5, 3, 1, 0);
    let recipe = ConstructionRecipe { seed: 9, extra_factors: vec![vec![-5, 1]], ..Default::default() };
    let out = run_instance(&StructureAnalyzer::default(), &cfg, 0, 9, recipe);
    assert_eq!(out.verdict, Verdict::Pass);
    assert_eq!(out.found.unwrap().residual_lambda, 1);
    assert_eq!(out.prop_g0, None);
    assert_eq!(out.tech_module, None);
}

#[test]
fn zero_instances_give_an_empty_summary() {
    let s = roundtrip_suite(5, 3, 0, 42);
    assert_eq!((s.passed, s.failed, s.undetermined), (0, 0, 0));
    assert!(s.outcomes.is_empty() && s.failing_seeds.is_empty());
}

#[test]
fn small_roundtrip_passes_and_is_reproducible() {
    let a = roundtrip_suite(5, 3, 12, 7);
    assert_eq!(a.passed, 12, "failing seeds: {:?}", a.failing_seeds);
    let b = roundtrip_suite(5, 3, 12, 7);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    // Every instance is reproducible from its (seed, recipe) pair alone.
    let cfg = RoundTripConfig::new(5, 3, 12, 7);
    let seeds = instance_seeds(7, 12);
    for (i, o) in a.outcomes.iter().enumerate() {
        assert_eq!(o.seed, seeds[i]);
        let again = run_instance(&StructureAnalyzer::default(), &cfg, i, o.seed, o.recipe.clone());
        assert_eq!(&again, o);
    }
}
