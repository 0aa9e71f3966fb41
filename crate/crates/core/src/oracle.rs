//! Modules of known elementary type, presentation obfuscation, and the
//! randomized round-trip suite.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{CoefficientRing, RingElem};
use crate::poly::{cyclotomic, DegreeBudget, IwasawaPoly};
use crate::presentation::ModulePresentation;
use crate::structure::{
    ElementaryType, GVerdict, SelectorRegistry, StructureAnalyzer, StructureReport, TowerSpec, Verdict,
};

/// Ground truth for a constructed module
/// `Λ^r ⊕ ⊕_j (Λ/Φ_j)^{s_j} ⊕ ⊕ Λ/p^{e} ⊕ ⊕ Λ/f ⊕ ⊕ Λ/(p, T^k)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionRecipe {
    pub seed: u64,
    pub free_rank: u32,
    /// `level → s_level`.
    #[serde(default)]
    pub cyclo_multiplicities: BTreeMap<u32, u32>,
    /// Exponents `e` of the summands `Λ/p^e`.
    #[serde(default)]
    pub mu_summands: Vec<u32>,
    /// Distinguished, non-cyclotomic polynomials (integer coefficients,
    /// constant first), e.g. `[-p, 1]` for `T − p`.
    #[serde(default)]
    pub extra_factors: Vec<Vec<i64>>,
    /// Exponents `k` of finite summands `Λ/(p, T^k)`.
    #[serde(default)]
    pub finite_summands: Vec<u32>,
}

/// The elementary-type data a recipe should classify to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExpectedType {
    pub free_rank: u64,
    pub cyclo_multiplicities: BTreeMap<u32, u64>,
    pub mu: u64,
    pub residual_lambda: u64,
}

impl ConstructionRecipe {
    /// Number of generators of the block-diagonal presentation.
    pub fn generator_count(&self) -> usize {
        self.free_rank as usize
            + self.cyclo_multiplicities.values().map(|&s| s as usize).sum::<usize>()
            + self.mu_summands.len()
            + self.extra_factors.len()
            + self.finite_summands.len()
    }

    pub fn expected(&self) -> ExpectedType {
        ExpectedType {
            free_rank: self.free_rank as u64,
            cyclo_multiplicities: self
                .cyclo_multiplicities
                .iter()
                .filter(|(_, &s)| s > 0)
                .map(|(&j, &s)| (j, s as u64))
                .collect(),
            mu: self.mu_summands.iter().map(|&e| e as u64).sum(),
            residual_lambda: self.extra_factors.iter().map(|f| (f.len() - 1) as u64).sum(),
        }
    }

    /// Closed-form free rank of the level-`n` coinvariants (over the
    /// coefficient ring).
    pub fn expected_free_rank(&self, p: u64, n: u32) -> usize {
        let pn = (p as usize).pow(n);
        self.free_rank as usize * pn
            + self
                .cyclo_multiplicities
                .iter()
                .filter(|(&j, _)| j <= n)
                .map(|(&j, &s)| s as usize * crate::poly::phi_p_power(p, j))
                .sum::<usize>()
    }
}

/// Block-diagonal presentation realizing `recipe` exactly.
pub fn build_elementary(ring: &CoefficientRing, recipe: &ConstructionRecipe, budget: DegreeBudget) -> Result<ModulePresentation> {
    let p = ring.prime() as i128;
    let mut parts = Vec::new();
    if recipe.free_rank > 0 {
        parts.push(ModulePresentation::free(ring, recipe.free_rank as usize));
    }
    for (&j, &s) in &recipe.cyclo_multiplicities {
        let phi = cyclotomic(ring, j, budget)?;
        for _ in 0..s {
            parts.push(ModulePresentation::cyclic(phi.clone()));
        }
    }
    for &e in &recipe.mu_summands {
        if e == 0 {
            return Err(Error::input("mu_summands", "exponents must be positive"));
        }
        let pe = p.checked_pow(e).ok_or_else(|| Error::resource("p-power summand too large"))?;
        parts.push(ModulePresentation::cyclic(IwasawaPoly::from_ints(ring, &[pe])));
    }
    for f in &recipe.extra_factors {
        let coeffs: Vec<i128> = f.iter().map(|&c| c as i128).collect();
        let poly = IwasawaPoly::from_ints(ring, &coeffs);
        if !poly.is_distinguished() || poly.degree().unwrap_or(0) == 0 {
            return Err(Error::input("extra_factors", format!("{} is not a distinguished polynomial", poly.render())));
        }
        budget.check(poly.degree().unwrap_or(0), "extra factor degree")?;
        parts.push(ModulePresentation::cyclic(poly));
    }
    for &k in &recipe.finite_summands {
        budget.check(k as usize, "finite summand degree")?;
        let rows = vec![vec![vec![p], {
            let mut t = vec![0i128; k as usize];
            t.push(1);
            t
        }]];
        parts.push(ModulePresentation::from_int_rows(ring, &rows)?);
    }
    ModulePresentation::direct_sum_all(ring, &parts)
}

/// An obfuscated presentation together with the determinant bookkeeping
/// (`det(result) = det_factor · det(input)` for square matrices).
#[derive(Clone, Debug)]
pub struct Obfuscation {
    pub presentation: ModulePresentation,
    pub det_factor: RingElem,
    pub steps: usize,
}

/// Applies `steps` random elementary operations over Λ: adding a multiple
/// (degree ≤ 2) of one row/column to another, swaps, and scaling by a unit
/// constant.  The cokernel is unchanged up to isomorphism.
pub fn obfuscate(m: &ModulePresentation, seed: u64, steps: usize) -> Obfuscation {
    let ring = m.ring().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<IwasawaPoly>> = m.relations().to_vec();
    let g = m.generators();
    let c = m.relation_count();
    let mut det = ring.one();
    let random_coeff = |rng: &mut ChaCha8Rng| -> RingElem {
        let coords: Vec<u128> = (0..ring.degree()).map(|_| rng.gen_range(0..ring.modulus())).collect();
        ring.from_coords(&coords).expect("coordinate count matches")
    };
    let random_unit = |rng: &mut ChaCha8Rng| -> RingElem {
        loop {
            let x = random_coeff(rng);
            if ring.is_unit(&x) {
                return x;
            }
        }
    };
    for _ in 0..steps {
        let kind = rng.gen_range(0..6u8);
        match kind {
            // row_b += λ·row_a
            0 | 1 if g >= 2 => {
                let (a, b) = two_distinct(&mut rng, g);
                let lambda = IwasawaPoly::new(&ring, (0..3).map(|_| random_coeff(&mut rng)).collect());
                for k in 0..c {
                    rows[b][k] = rows[b][k].add(&lambda.mul(&rows[a][k]));
                }
            }
            // col_b += λ·col_a
            2 | 3 if c >= 2 => {
                let (a, b) = two_distinct(&mut rng, c);
                let lambda = IwasawaPoly::new(&ring, (0..3).map(|_| random_coeff(&mut rng)).collect());
                for row in rows.iter_mut() {
                    row[b] = row[b].add(&lambda.mul(&row[a]));
                }
            }
            4 if g >= 2 || c >= 2 => {
                if rng.gen_bool(0.5) && g >= 2 {
                    let (a, b) = two_distinct(&mut rng, g);
                    rows.swap(a, b);
                } else if c >= 2 {
                    let (a, b) = two_distinct(&mut rng, c);
                    for row in rows.iter_mut() {
                        row.swap(a, b);
                    }
                } else {
                    let (a, b) = two_distinct(&mut rng, g);
                    rows.swap(a, b);
                }
                det = ring.neg(&det);
            }
            _ => {
                let u = random_unit(&mut rng);
                if c > 0 && (g == 0 || rng.gen_bool(0.5)) {
                    let k = rng.gen_range(0..c);
                    for row in rows.iter_mut() {
                        row[k] = row[k].scale(&u);
                    }
                } else if g > 0 {
                    let i = rng.gen_range(0..g);
                    for e in rows[i].iter_mut() {
                        *e = e.scale(&u);
                    }
                }
                det = ring.mul(&det, &u);
            }
        }
    }
    let presentation = ModulePresentation::new(&ring, g, rows).expect("shape preserved by elementary operations");
    Obfuscation { presentation, det_factor: det, steps }
}

fn two_distinct(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    (idx[0], idx[1])
}

/// Draws a recipe: `r ∈ {0,1,2}`, `s_j ≤ 2` for `j ≤ min(2, n_max)`, up to two
/// `μ`-summands with exponent ≤ 2, at most one extra factor from
/// `{T − p, T² − p}`, optionally one finite summand, and at most
/// `max_generators` generators.
pub fn random_recipe(seed: u64, p: u64, n_max: u32, max_generators: usize) -> ConstructionRecipe {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, weights: &[u32]| -> u32 {
        let total: u32 = weights.iter().sum();
        let mut x = rng.gen_range(0..total);
        for (i, &w) in weights.iter().enumerate() {
            if x < w {
                return i as u32;
            }
            x -= w;
        }
        unreachable!("weights are positive")
    };
    let p = p as i64;
    loop {
        let free_rank = pick(&mut rng, &[50, 35, 15]);
        let mut cyclo = BTreeMap::new();
        for j in 0..=n_max.min(2) {
            let s = pick(&mut rng, &[55, 30, 15]);
            if s > 0 {
                cyclo.insert(j, s);
            }
        }
        let mu_count = pick(&mut rng, &[55, 30, 15]);
        let mu_summands = (0..mu_count).map(|_| 1 + pick(&mut rng, &[60, 40])).collect();
        let extra_factors = match pick(&mut rng, &[60, 20, 20]) {
            1 => vec![vec![-p, 1]],
            2 => vec![vec![-p, 0, 1]],
            _ => Vec::new(),
        };
        let finite_summands = if pick(&mut rng, &[85, 15]) == 1 { vec![1 + pick(&mut rng, &[50, 50])] } else { Vec::new() };
        let recipe = ConstructionRecipe { seed, free_rank, cyclo_multiplicities: cyclo, mu_summands, extra_factors, finite_summands };
        let n = recipe.generator_count();
        if n >= 1 && n <= max_generators {
            return recipe;
        }
    }
}

/// Obfuscation steps applied by the round-trip suite.
pub const ROUNDTRIP_OBFUSCATION_STEPS: usize = 24;
/// Generator cap of random recipes.
pub const ROUNDTRIP_MAX_GENERATORS: usize = 7;
/// Precision exponent of the round-trip suite.
pub const ROUNDTRIP_PRECISION: u32 = 24;

/// Settings of a round-trip run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTripConfig {
    pub p: u64,
    pub n_max: u32,
    pub instances: usize,
    pub seed: u64,
    pub precision: u32,
    pub obfuscation_steps: usize,
    pub max_generators: usize,
    /// Also run the structure verifiers on instances meeting their hypotheses.
    pub run_verifiers: bool,
}

impl RoundTripConfig {
    pub fn new(p: u64, n_max: u32, instances: usize, seed: u64) -> Self {
        RoundTripConfig {
            p,
            n_max,
            instances,
            seed,
            precision: ROUNDTRIP_PRECISION,
            obfuscation_steps: ROUNDTRIP_OBFUSCATION_STEPS,
            max_generators: ROUNDTRIP_MAX_GENERATORS,
            run_verifiers: true,
        }
    }
}

/// Result of one round-trip instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundTripOutcome {
    pub index: usize,
    pub seed: u64,
    pub recipe: ConstructionRecipe,
    pub verdict: Verdict,
    pub expected: ExpectedType,
    pub expected_g_vanishes: GVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub found: Option<ElementaryType>,
    /// Free ranks of the coinvariants at levels `0..=n_max` (empty when the
    /// analysis did not complete).
    pub ranks: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prop_g0: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tech_module: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The obfuscated presentation, kept for failing instances only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub presentation: Option<serde_json::Value>,
}

/// Aggregate of a round-trip run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundTripSummary {
    pub schema_version: String,
    pub config: RoundTripConfig,
    pub engine: String,
    pub passed: usize,
    pub failed: usize,
    pub undetermined: usize,
    pub failing_seeds: Vec<u64>,
    pub outcomes: Vec<RoundTripOutcome>,
}

/// Per-instance seeds derived from the run seed.
pub fn instance_seeds(seed: u64, instances: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..instances).map(|_| rng.next_u64()).collect()
}

/// The 𝔊 verdict a recipe must produce: the inverse limit of torsion is
/// zero exactly when no `μ`-summand and no extra factor is present.
pub fn expected_g_verdict(recipe: &ConstructionRecipe) -> GVerdict {
    if recipe.mu_summands.is_empty() && recipe.extra_factors.is_empty() {
        GVerdict::Yes
    } else {
        GVerdict::No
    }
}

/// Builds, obfuscates, and classifies one instance from `(seed, recipe)`.
pub fn run_instance(
    analyzer: &StructureAnalyzer,
    cfg: &RoundTripConfig,
    index: usize,
    seed: u64,
    recipe: ConstructionRecipe,
) -> RoundTripOutcome {
    let expected = recipe.expected();
    let expected_g = expected_g_verdict(&recipe);
    let mut out = RoundTripOutcome {
        index,
        seed,
        recipe,
        verdict: Verdict::Undetermined,
        expected,
        expected_g_vanishes: expected_g,
        found: None,
        ranks: Vec::new(),
        prop_g0: None,
        tech_module: None,
        error: None,
        presentation: None,
    };
    let fail = |out: &mut RoundTripOutcome, err: Option<String>, m: Option<&ModulePresentation>| {
        out.verdict = Verdict::Fail;
        out.error = err;
        out.presentation = m.and_then(|m| serde_json::from_str(&m.to_json()).ok());
    };
    let ring = match CoefficientRing::zp(cfg.p, cfg.precision) {
        Ok(r) => r,
        Err(e) => {
            fail(&mut out, Some(e.to_string()), None);
            return out;
        }
    };
    let budget = DegreeBudget::for_levels(cfg.p, cfg.n_max);
    let base = match build_elementary(&ring, &out.recipe, budget) {
        Ok(m) => m,
        Err(e) => {
            fail(&mut out, Some(e.to_string()), None);
            return out;
        }
    };
    let m = obfuscate(&base, seed ^ 0x6f62_6675_7363_6174, cfg.obfuscation_steps).presentation;
    let analyses = match analyzer.analyze(&m, cfg.n_max) {
        Ok(a) => a,
        Err(e @ Error::ResourceLimit { .. }) => {
            out.error = Some(e.to_string());
            return out;
        }
        Err(e) => {
            fail(&mut out, Some(e.to_string()), Some(&m));
            return out;
        }
    };
    out.ranks = analyses.iter().map(|a| a.structure.free_rank).collect();
    let class = match analyzer.classify_analyses(cfg.p, &analyses) {
        Ok(c) => c,
        Err(e) => {
            fail(&mut out, Some(e.to_string()), Some(&m));
            return out;
        }
    };
    let ty = class.elementary_type;
    let type_ok = ty.free_rank == out.expected.free_rank
        && ty.cyclo_multiplicities == out.expected.cyclo_multiplicities
        && ty.mu == out.expected.mu
        && ty.residual_lambda == out.expected.residual_lambda
        && ty.g_functor_vanishes == expected_g;
    out.found = Some(ty.clone());
    if !type_ok {
        fail(&mut out, None, Some(&m));
        return out;
    }
    out.verdict = Verdict::Pass;
    if cfg.run_verifiers && ty.g_functor_vanishes == GVerdict::Yes {
        let verdict_of = |r: Result<StructureReport>| match r {
            Ok(rep) => rep.verdict,
            Err(_) => Verdict::Fail,
        };
        let g0 = verdict_of(analyzer.verify_prop_g0_analyses(cfg.p, &analyses));
        out.prop_g0 = Some(g0);
        let mut tech = None;
        if ty.free_rank == 0 {
            let spec = TowerSpec { base: m.clone(), selectors: SelectorRegistry::builtin().all(), seed };
            tech = Some(verdict_of(analyzer.verify_tech_module_analyses(&spec, &analyses)));
        }
        out.tech_module = tech;
        if g0 == Verdict::Fail || tech == Some(Verdict::Fail) {
            fail(&mut out, Some("structure verifier failed".into()), Some(&m));
        }
    }
    out
}

/// Generates `instances` random recipes, builds and obfuscates them,
/// classifies, and runs the verifiers where their hypotheses hold.
/// Instances run in parallel; the summary is in instance order.
pub fn roundtrip_suite_with(analyzer: &StructureAnalyzer, cfg: &RoundTripConfig) -> RoundTripSummary {
    let seeds = instance_seeds(cfg.seed, cfg.instances);
    let outcomes: Vec<RoundTripOutcome> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let recipe = random_recipe(s, cfg.p, cfg.n_max, cfg.max_generators);
            run_instance(analyzer, cfg, i, s, recipe)
        })
        .collect();
    let count = |v: Verdict| outcomes.iter().filter(|o| o.verdict == v).count();
    RoundTripSummary {
        schema_version: crate::presentation::SCHEMA_VERSION.to_string(),
        config: cfg.clone(),
        engine: analyzer.engine().name().to_string(),
        passed: count(Verdict::Pass),
        failed: count(Verdict::Fail),
        undetermined: count(Verdict::Undetermined),
        failing_seeds: outcomes.iter().filter(|o| o.verdict == Verdict::Fail).map(|o| o.seed).collect(),
        outcomes,
    }
}

/// [`roundtrip_suite_with`] using the default engine and settings.
pub fn roundtrip_suite(p: u64, n_max: u32, instances: usize, seed: u64) -> RoundTripSummary {
    roundtrip_suite_with(&StructureAnalyzer::default(), &RoundTripConfig::new(p, n_max, instances, seed))
}
