//! Elementary-type classification from finite-level data, the vanishing test
//! for the functor 𝔊 (inverse limit of the `p`-primary torsion of the
//! coinvariants), and verifiers for the structure statements about towers of
//! coinvariants.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coinvariants::{
    default_engine, multiplicities, quotient_matrix, torsion_generators, CoinvariantEngine, LevelAnalysis,
    TorsionGen,
};
use crate::error::{Error, Result};
use crate::poly::{one_plus_t_pow, omega, phi_p_power, DegreeBudget, IwasawaPoly};
use crate::presentation::{ModulePresentation, SCHEMA_VERSION};

/// Tri-state outcome of the finite-level 𝔊-vanishing test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GVerdict {
    Yes,
    No,
    Undetermined,
}

impl GVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            GVerdict::Yes => "yes",
            GVerdict::No => "no",
            GVerdict::Undetermined => "undetermined",
        }
    }
}

/// Structure-theorem data of a presented module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElementaryType {
    pub free_rank: u64,
    /// `level → s_level`, nonzero entries only.
    pub cyclo_multiplicities: BTreeMap<u32, u64>,
    pub mu: u64,
    pub residual_lambda: u64,
    pub g_functor_vanishes: GVerdict,
}

/// Per-level data backing a classification.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Evidence {
    /// `t_n = ord_p(M_{Γ_n}[p^∞])`.
    pub torsion_orders: Vec<u64>,
    /// `t_n` minus the contribution `s_j·p^n` of each `Λ/Φ_j` with `j > n`
    /// (at those levels `Λ/(Φ_j, ω_n) = Λ/(p, ω_n)`).
    pub corrected_torsion_orders: Vec<i64>,
    /// Free ranks of `M_{Γ_n}`.
    pub ranks: Vec<usize>,
    /// `Φ_j`-component ranks `c_0..c_n` per level.
    pub component_ranks: Vec<Vec<usize>>,
    /// Quotient checks of the tower verifier.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tech_checks: Vec<TechCheck>,
}

/// One `(level, selector)` check of the tower verifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TechCheck {
    pub level: u32,
    pub selector: String,
    /// Number of torsion generators spanning the chosen finite submodule.
    pub submodule_generators: usize,
    pub component_ranks: Vec<usize>,
    pub expected: Vec<usize>,
    pub ok: bool,
}

/// Verdict of a verification report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Undetermined,
}

/// Machine-readable report shared by the structure commands.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub schema_version: String,
    pub kind: String,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    pub elementary_type: Option<ElementaryType>,
    pub evidence: Evidence,
    pub verdict: Verdict,
    /// The 𝔊 tri-state, surfaced for scripts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<GVerdict>,
    /// Reason when a verifier's precondition filtered the input out.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<serde_json::Value>,
    /// Hypotheses that are assumed rather than checked.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub assumptions: Vec<String>,
}

impl StructureReport {
    fn new(kind: &str, evidence: Evidence, verdict: Verdict) -> Self {
        StructureReport {
            schema_version: SCHEMA_VERSION.to_string(),
            kind: kind.to_string(),
            elementary_type: None,
            evidence,
            verdict,
            status: None,
            skipped: None,
            counterexample: None,
            assumptions: Vec::new(),
        }
    }
}

/// Classification with its evidence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub elementary_type: ElementaryType,
    pub evidence: Evidence,
}

/// The structure-analysis entry points, parameterized by a coinvariant engine.
#[derive(Clone)]
pub struct StructureAnalyzer {
    engine: Arc<dyn CoinvariantEngine>,
}

impl Default for StructureAnalyzer {
    fn default() -> Self {
        StructureAnalyzer { engine: default_engine() }
    }
}

fn levels_upto(n_max: u32) -> Vec<u32> {
    (0..=n_max).collect()
}

fn budget_for(m: &ModulePresentation, n_max: u32) -> DegreeBudget {
    DegreeBudget::for_levels(m.ring().prime(), n_max)
}

fn uncertified(level: u32) -> Error {
    Error::resource(format!("precision exhausted at level {level}: raise the precision exponent"))
}

/// `Φ_j`-multiplicities `m_j = c_j/φ(p^j)` read from the top level.
fn cyclotomic_multiplicities(p: u64, analyses: &[LevelAnalysis]) -> Result<Vec<u64>> {
    let top = analyses.last().expect("at least one level");
    top.components
        .ranks
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let phi = phi_p_power(p, j as u32);
            if c % phi != 0 {
                return Err(Error::Classification {
                    level: j,
                    message: format!("component rank {c} is not a multiple of φ(p^{j}) = {phi}"),
                });
            }
            Ok((c / phi) as u64)
        })
        .collect()
}

/// Finite-level 𝔊 decision on corrected torsion orders.
fn g_verdict(t: &[i64]) -> GVerdict {
    let k = t.len();
    if k >= 3 && t[k - 3] == t[k - 2] && t[k - 2] == t[k - 1] {
        GVerdict::Yes
    } else if k >= 2 && t[k - 2] < t[k - 1] {
        GVerdict::No
    } else {
        GVerdict::Undetermined
    }
}

impl StructureAnalyzer {
    pub fn new(engine: Arc<dyn CoinvariantEngine>) -> Self {
        StructureAnalyzer { engine }
    }

    pub fn engine(&self) -> &Arc<dyn CoinvariantEngine> {
        &self.engine
    }

    /// Levels `0..=n_max`, all certified.
    pub fn analyze(&self, m: &ModulePresentation, n_max: u32) -> Result<Vec<LevelAnalysis>> {
        let analyses = self.engine.analyze(m, &levels_upto(n_max), budget_for(m, n_max))?;
        for a in &analyses {
            if !a.structure.is_certified() || !a.components.certified {
                return Err(uncertified(a.structure.level));
            }
        }
        Ok(analyses)
    }

    /// Evidence without the fit: ranks, torsion orders, shadow-corrected
    /// orders, and the multiplicities `r`, `s_j`.
    fn evidence(&self, p: u64, analyses: &[LevelAnalysis]) -> Result<(Evidence, u64, Vec<u64>)> {
        let m = cyclotomic_multiplicities(p, analyses)?;
        let r = *m.iter().min().expect("levels are nonempty");
        let s: Vec<u64> = m.iter().map(|&x| x - r).collect();
        let n_max = analyses.len() - 1;
        for (n, a) in analyses.iter().enumerate() {
            let expected = r as usize * (p as usize).pow(n as u32)
                + (0..=n).map(|j| s[j] as usize * phi_p_power(p, j as u32)).sum::<usize>();
            if a.structure.free_rank != expected {
                return Err(Error::Classification {
                    level: n,
                    message: format!(
                        "free rank {} is not explained by cyclotomic multiplicities (expected {expected})",
                        a.structure.free_rank
                    ),
                });
            }
        }
        let torsion_orders: Vec<u64> = analyses.iter().map(|a| a.structure.torsion_order).collect();
        let corrected = torsion_orders
            .iter()
            .enumerate()
            .map(|(n, &t)| {
                let shadow: u64 = (n + 1..=n_max).map(|j| s[j] * (p as u64).pow(n as u32)).sum();
                t as i64 - shadow as i64
            })
            .collect();
        let evidence = Evidence {
            torsion_orders,
            corrected_torsion_orders: corrected,
            ranks: analyses.iter().map(|a| a.structure.free_rank).collect(),
            component_ranks: analyses.iter().map(|a| a.components.ranks.clone()).collect(),
            tech_checks: Vec::new(),
        };
        Ok((evidence, r, s))
    }

    /// Semi-decides 𝔊(M) = 0 from levels `0..=n_max`.
    pub fn g_functor_vanishes(&self, m: &ModulePresentation, n_max: u32) -> Result<(GVerdict, Evidence)> {
        let analyses = self.analyze(m, n_max)?;
        let (evidence, _, _) = self.evidence(m.ring().prime(), &analyses)?;
        Ok((g_verdict(&evidence.corrected_torsion_orders), evidence))
    }

    /// Recovers `(r, {s_n}, μ, residual λ)` and the 𝔊 verdict.
    pub fn classify(&self, m: &ModulePresentation, n_max: u32) -> Result<Classification> {
        let analyses = self.analyze(m, n_max)?;
        self.classify_analyses(m.ring().prime(), &analyses)
    }

    /// Classification from precomputed level analyses (levels `0..=n_max`).
    pub fn classify_analyses(&self, p: u64, analyses: &[LevelAnalysis]) -> Result<Classification> {
        let n_max = analyses.len().saturating_sub(1);
        if analyses.len() < 3 {
            return Err(Error::Classification {
                level: n_max,
                message: "at least three levels (n_max ≥ 2) are needed to separate μ from λ".into(),
            });
        }
        let (evidence, r, s) = self.evidence(p, analyses)?;
        let t = &evidence.corrected_torsion_orders;
        let a = n_max - 2;
        let d1 = t[a + 1] - t[a];
        let d2 = t[a + 2] - t[a + 1];
        let pa = (p as i64).pow(a as u32);
        let denom = pa * (p as i64 - 1) * (p as i64 - 1);
        if (d2 - d1) % denom != 0 || d2 < d1 {
            return Err(Error::Classification {
                level: a + 2,
                message: format!("torsion growth {d1}, {d2} admits no integral μ (need (Δ2 − Δ1) ∈ {denom}·ℕ)"),
            });
        }
        let mu = (d2 - d1) / denom;
        let lambda = d1 - mu * pa * (p as i64 - 1);
        if lambda < 0 {
            return Err(Error::Classification { level: a + 1, message: format!("negative residual λ = {lambda}") });
        }
        let elementary_type = ElementaryType {
            free_rank: r,
            cyclo_multiplicities: s.iter().enumerate().filter(|(_, &x)| x > 0).map(|(j, &x)| (j as u32, x)).collect(),
            mu: mu as u64,
            residual_lambda: lambda as u64,
            g_functor_vanishes: g_verdict(t),
        };
        Ok(Classification { elementary_type, evidence })
    }

    /// Classification report (verdict `pass` once a type is obtained; the 𝔊
    /// tri-state is reported in `status`).
    pub fn classify_report(&self, m: &ModulePresentation, n_max: u32) -> Result<StructureReport> {
        let c = self.classify(m, n_max)?;
        let mut rep = StructureReport::new("classify", c.evidence, Verdict::Pass);
        rep.status = Some(c.elementary_type.g_functor_vanishes);
        rep.elementary_type = Some(c.elementary_type);
        Ok(rep)
    }

    /// Checks that the classified cyclotomic type reproduces every level's
    /// free rank; skipped (never vacuously passed) unless 𝔊 = yes.
    pub fn verify_prop_g0(&self, m: &ModulePresentation, n_max: u32) -> Result<StructureReport> {
        let analyses = self.analyze(m, n_max)?;
        self.verify_prop_g0_analyses(m.ring().prime(), &analyses)
    }

    /// [`Self::verify_prop_g0`] on precomputed level analyses.
    pub fn verify_prop_g0_analyses(&self, p: u64, analyses: &[LevelAnalysis]) -> Result<StructureReport> {
        let c = self.classify_analyses(p, analyses)?;
        let ty = c.elementary_type.clone();
        let mut rep = StructureReport::new("prop_g0", c.evidence, Verdict::Pass);
        rep.status = Some(ty.g_functor_vanishes);
        if ty.g_functor_vanishes != GVerdict::Yes {
            rep.verdict = Verdict::Undetermined;
            rep.skipped = Some(format!("precondition 𝔊 = 0 not established (verdict {})", ty.g_functor_vanishes.as_str()));
            rep.elementary_type = Some(ty);
            return Ok(rep);
        }
        for (n, a) in analyses.iter().enumerate() {
            let expected = ty.free_rank as usize * (p as usize).pow(n as u32)
                + ty.cyclo_multiplicities
                    .iter()
                    .filter(|(&j, _)| j as usize <= n)
                    .map(|(&j, &s)| s as usize * phi_p_power(p, j))
                    .sum::<usize>();
            if a.structure.free_rank != expected {
                rep.verdict = Verdict::Fail;
                rep.counterexample = Some(serde_json::json!({
                    "level": n, "expected_rank": expected, "found_rank": a.structure.free_rank
                }));
                break;
            }
        }
        rep.elementary_type = Some(ty);
        Ok(rep)
    }

    /// Verifies, for every level `n ≤ n_max` and every selector, that the
    /// `Φ_j`-component ranks of `M_n/M'_n` are `s_j·φ(p^j)` for `j ≤ n`.
    pub fn verify_tech_module(&self, spec: &TowerSpec, n_max: u32) -> Result<StructureReport> {
        let analyses = self.analyze(&spec.base, n_max)?;
        self.verify_tech_module_analyses(spec, &analyses)
    }

    /// [`Self::verify_tech_module`] on precomputed analyses of `spec.base`
    /// (levels `0..=n_max`).
    pub fn verify_tech_module_analyses(&self, spec: &TowerSpec, analyses: &[LevelAnalysis]) -> Result<StructureReport> {
        let m = &spec.base;
        let p = m.ring().prime();
        let d = m.ring().degree();
        let n_max = analyses.len().saturating_sub(1) as u32;
        let c = self.classify_analyses(p, analyses)?;
        let ty = c.elementary_type.clone();
        if ty.free_rank > 0 {
            return Err(Error::hypothesis(format!(
                "the module is not Λ-torsion (free rank r = {}); the tower statement needs r = 0",
                ty.free_rank
            )));
        }
        let mut rep = StructureReport::new("tech_module", c.evidence, Verdict::Pass);
        rep.status = Some(ty.g_functor_vanishes);
        rep.assumptions.push("each selected M'_n is generated by p-power torsion elements, hence finite".into());
        if ty.g_functor_vanishes != GVerdict::Yes {
            rep.verdict = Verdict::Undetermined;
            rep.skipped = Some(format!(
                "𝔊 does not vanish (verdict {}): routed to the counterexample track",
                ty.g_functor_vanishes.as_str()
            ));
            rep.elementary_type = Some(ty);
            return Ok(rep);
        }
        let zp = m.restrict_to_zp();
        let budget = budget_for(m, n_max);
        for n in 0..=n_max {
            let gens = torsion_generators(&zp, n, budget)?;
            let expected: Vec<usize> = (0..=n)
                .map(|j| *ty.cyclo_multiplicities.get(&j).unwrap_or(&0) as usize * phi_p_power(p, j))
                .collect();
            for (idx, sel) in spec.selectors.iter().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    spec.seed ^ (u64::from(n) << 32) ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                );
                let chosen = sel.select(&gens, p, &mut rng);
                let quotient = if chosen.is_empty() { zp.clone() } else { quotient_matrix(&zp, &chosen) };
                let mults = multiplicities(&quotient, n)?;
                if !mults.iter().all(|x| x.certified) {
                    return Err(uncertified(n));
                }
                let ranks: Vec<usize> =
                    mults.iter().enumerate().map(|(j, x)| x.value * phi_p_power(p, j as u32) / d).collect();
                let ok = ranks == expected;
                rep.evidence.tech_checks.push(TechCheck {
                    level: n,
                    selector: sel.name().to_string(),
                    submodule_generators: chosen.len(),
                    component_ranks: ranks.clone(),
                    expected: expected.clone(),
                    ok,
                });
                if !ok && rep.counterexample.is_none() {
                    rep.verdict = Verdict::Fail;
                    rep.counterexample = Some(serde_json::json!({
                        "level": n, "selector": sel.name(), "expected": expected, "found": ranks
                    }));
                }
            }
        }
        rep.elementary_type = Some(ty);
        Ok(rep)
    }

    /// Re-expresses the relations under `T ↦ (1+T)^u − 1` (modulo
    /// `ω_{n_max}`) and checks the classification is unchanged.
    pub fn generator_change_invariance(&self, m: &ModulePresentation, u: u128, n_max: u32) -> Result<StructureReport> {
        let transformed = substitute_generator(m, u, n_max)?;
        let before = self.classify(m, n_max)?;
        let after = self.classify(&transformed, n_max)?;
        let same = before.elementary_type == after.elementary_type;
        let mut rep = StructureReport::new("generator_change", after.evidence, if same { Verdict::Pass } else { Verdict::Fail });
        rep.status = Some(after.elementary_type.g_functor_vanishes);
        if !same {
            rep.counterexample = Some(serde_json::json!({
                "unit": u.to_string(),
                "before": before.elementary_type,
                "after": after.elementary_type,
            }));
        }
        rep.elementary_type = Some(after.elementary_type);
        Ok(rep)
    }
}

/// `M` with every entry replaced by `f((1+T)^u − 1) mod ω_{n_max}`.  Since
/// `(1+T)^{p^{n_max}} ≡ 1` modulo `ω_{n_max}`, only `u mod p^{n_max}` matters;
/// for `u ≡ 1` the presentation is returned unchanged.
pub fn substitute_generator(m: &ModulePresentation, u: u128, n_max: u32) -> Result<ModulePresentation> {
    let ring = m.ring();
    let p = ring.prime() as u128;
    if u % p == 0 {
        return Err(Error::input("unit", format!("{u} is not a p-adic unit")));
    }
    let period = p.pow(n_max);
    let ubar = (u % period) as usize;
    if ubar == 1 % period as usize {
        return Ok(m.clone());
    }
    let budget = DegreeBudget::for_levels(ring.prime(), n_max);
    let w = omega(ring, n_max, budget)?;
    let sigma = one_plus_t_pow(ring, ubar).sub(&IwasawaPoly::one(ring)).rem_monic(&w)?;
    m.map_entries(|f| {
        let mut acc = IwasawaPoly::zero(ring);
        for c in f.coeffs().iter().rev() {
            acc = acc.mul(&sigma).add(&IwasawaPoly::constant(ring, c.clone())).rem_monic(&w)?;
        }
        Ok(acc)
    })
}

/// Chooses a finite submodule `M'_n ⊆ M_n[p^∞]` from torsion generators.
pub trait SubmoduleSelector: Send + Sync {
    /// Registry name.
    fn name(&self) -> &'static str;
    fn select(&self, torsion: &[TorsionGen], p: u64, rng: &mut ChaCha8Rng) -> Vec<TorsionGen>;
}

/// `M'_n = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroSelector;

/// `M'_n = M_n[p^∞]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FullTorsionSelector;

/// A random subset of torsion generators, each scaled by `p^{0..=2}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomSubgroupSelector;

impl SubmoduleSelector for ZeroSelector {
    fn name(&self) -> &'static str {
        "zero"
    }
    fn select(&self, _: &[TorsionGen], _: u64, _: &mut ChaCha8Rng) -> Vec<TorsionGen> {
        Vec::new()
    }
}

impl SubmoduleSelector for FullTorsionSelector {
    fn name(&self) -> &'static str {
        "full-torsion"
    }
    fn select(&self, torsion: &[TorsionGen], _: u64, _: &mut ChaCha8Rng) -> Vec<TorsionGen> {
        torsion.to_vec()
    }
}

impl SubmoduleSelector for RandomSubgroupSelector {
    fn name(&self) -> &'static str {
        "random-subgroup"
    }
    fn select(&self, torsion: &[TorsionGen], p: u64, rng: &mut ChaCha8Rng) -> Vec<TorsionGen> {
        let mut chosen = Vec::new();
        for g in torsion {
            if !rng.gen_bool(0.5) {
                continue;
            }
            let e = rng.gen_range(0..=2u32);
            let m = (p as u128).pow(g.digits);
            let scale = (p as u128).pow(e) % m;
            chosen.push(TorsionGen {
                digits: g.digits,
                vector: g
                    .vector
                    .iter()
                    .map(|poly| poly.iter().map(|&c| crate::padic::mul_mod(c, scale, m)).collect())
                    .collect(),
            });
        }
        chosen
    }
}

/// Name → selector lookup.
pub struct SelectorRegistry {
    selectors: BTreeMap<&'static str, Arc<dyn SubmoduleSelector>>,
}

impl SelectorRegistry {
    pub fn builtin() -> Self {
        let mut r = SelectorRegistry { selectors: BTreeMap::new() };
        r.register(Arc::new(ZeroSelector));
        r.register(Arc::new(FullTorsionSelector));
        r.register(Arc::new(RandomSubgroupSelector));
        r
    }

    pub fn register(&mut self, s: Arc<dyn SubmoduleSelector>) {
        self.selectors.insert(s.name(), s);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SubmoduleSelector>> {
        self.selectors.get(name).cloned().ok_or_else(|| {
            Error::input("selector", format!("unknown selector `{name}` (known: {})", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.selectors.keys().copied().collect()
    }

    /// All built-in selectors in a fixed order.
    pub fn all(&self) -> Vec<Arc<dyn SubmoduleSelector>> {
        ["zero", "full-torsion", "random-subgroup"].iter().filter_map(|n| self.selectors.get(n).cloned()).collect()
    }
}

/// A tower `{M_n}` of coinvariants with finite submodules `M'_n`.
#[derive(Clone)]
pub struct TowerSpec {
    pub base: ModulePresentation,
    /// Every selector is evaluated at every level.
    pub selectors: Vec<Arc<dyn SubmoduleSelector>>,
    pub seed: u64,
}

/// [`StructureAnalyzer::g_functor_vanishes`] with the default engine.
pub fn g_functor_vanishes(m: &ModulePresentation, n_max: u32) -> Result<(GVerdict, Evidence)> {
    StructureAnalyzer::default().g_functor_vanishes(m, n_max)
}

/// [`StructureAnalyzer::classify`] with the default engine.
pub fn classify_elementary(m: &ModulePresentation, n_max: u32) -> Result<ElementaryType> {
    Ok(StructureAnalyzer::default().classify(m, n_max)?.elementary_type)
}

/// [`StructureAnalyzer::verify_prop_g0`] with the default engine.
pub fn verify_prop_g0(m: &ModulePresentation, n_max: u32) -> Result<StructureReport> {
    StructureAnalyzer::default().verify_prop_g0(m, n_max)
}

/// [`StructureAnalyzer::verify_tech_module`] with the default engine.
pub fn verify_tech_module(spec: &TowerSpec, n_max: u32) -> Result<StructureReport> {
    StructureAnalyzer::default().verify_tech_module(spec, n_max)
}

/// [`StructureAnalyzer::generator_change_invariance`] with the default engine.
pub fn generator_change_invariance(m: &ModulePresentation, u: u128, n_max: u32) -> Result<StructureReport> {
    StructureAnalyzer::default().generator_change_invariance(m, u, n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::CoefficientRing;
    use crate::poly::cyclotomic;

    fn zp() -> CoefficientRing {
        CoefficientRing::zp(5, 24).unwrap()
    }

    #[test]
    fn warning_module() {
        let r = zp();
        let m = ModulePresentation::cyclic(IwasawaPoly::from_ints(&r, &[-5, 1]));
        let c = StructureAnalyzer::default().classify(&m, 4).unwrap();
        assert_eq!(c.evidence.torsion_orders, vec![1, 2, 3, 4, 5]);
        assert_eq!(c.elementary_type.residual_lambda, 1);
        assert_eq!(c.elementary_type.mu, 0);
        assert_eq!(c.elementary_type.g_functor_vanishes, GVerdict::No);
    }

    #[test]
    fn phi_two_vanishes() {
        let r = zp();
        let m = ModulePresentation::cyclic(cyclotomic(&r, 2, DegreeBudget::default()).unwrap());
        let (v, ev) = g_functor_vanishes(&m, 4).unwrap();
        assert_eq!(v, GVerdict::Yes);
        assert_eq!(ev.torsion_orders, vec![1, 5, 0, 0, 0]);
    }

    #[test]
    fn p_squared_has_mu_two() {
        let r = zp();
        let m = ModulePresentation::cyclic(IwasawaPoly::from_ints(&r, &[25]));
        let ty = classify_elementary(&m, 3).unwrap();
        assert_eq!((ty.mu, ty.residual_lambda, ty.g_functor_vanishes), (2, 0, GVerdict::No));
    }
}
