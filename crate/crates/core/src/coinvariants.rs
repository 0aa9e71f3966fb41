//! Finite-level coinvariants `M_{Γ_n} = M/ω_n M`: free rank, torsion
//! exponents, and ranks of the `Φ_j`-isotypic parts of the free quotient.
//!
//! Two interchangeable engines implement [`CoinvariantEngine`]:
//!
//! * `layered` (default): `Φ_j`-multiplicities from ranks of the relation
//!   matrix at `p^j`-th roots of unity, torsion exponents from the layered
//!   `p`-saturation over `Zp[T]/ω_n` (no expansion to coefficient-ring
//!   matrices).  Scales to `p^n` in the hundreds.
//! * `expanded`: full expansion to a `(g·p^n)`-row matrix over the coefficient
//!   ring, Smith normal form, and kernels of `Φ_j` acting on the free part.
//!   Independent of the layered code; used as an oracle on small cases.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::dvr::specialized_rank;
pub use crate::engine::TorsionGen;
use crate::engine::layered;
use crate::error::{Error, Result};
use crate::expand::expand_to_level;
use crate::padic::CoefficientRing;
use crate::poly::{cyclotomic, level_degree, omega, phi_p_power, DegreeBudget};
use crate::presentation::{ModulePresentation, ZpMatrix};

/// `Zp`-structure (over the coefficient ring) of one level's coinvariants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoinvariantStructure {
    pub level: u32,
    pub free_rank: usize,
    /// Weakly decreasing exponents in `[1, N)`.
    pub torsion_exponents: Vec<u32>,
    /// One flag per exponent; `false` when the exponent reaches `N − 2`.
    pub certified: Vec<bool>,
    /// `Σ exponents`, i.e. `ord_p` of the torsion subgroup (in the
    /// coefficient ring's uniformizer).
    pub torsion_order: u64,
    /// False when the free rank itself could not be certified.
    pub free_rank_certified: bool,
}

impl CoinvariantStructure {
    fn new(level: u32, free_rank: usize, mut pairs: Vec<(u32, bool)>, free_rank_certified: bool) -> Self {
        pairs.sort_by(|a, b| b.0.cmp(&a.0));
        CoinvariantStructure {
            level,
            free_rank,
            torsion_order: pairs.iter().map(|p| p.0 as u64).sum(),
            torsion_exponents: pairs.iter().map(|p| p.0).collect(),
            certified: pairs.iter().map(|p| p.1).collect(),
            free_rank_certified,
        }
    }

    /// True when every reported number is certified.
    pub fn is_certified(&self) -> bool {
        self.free_rank_certified && self.certified.iter().all(|&c| c)
    }
}

/// Coefficient-ring ranks `c_0..c_n` of the `Φ_j`-parts of the free quotient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentRanks {
    pub ranks: Vec<usize>,
    pub certified: bool,
}

/// Everything computed for one level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelAnalysis {
    pub structure: CoinvariantStructure,
    pub components: ComponentRanks,
}

/// A strategy for computing coinvariant structure.
pub trait CoinvariantEngine: Send + Sync {
    /// Registry name.
    fn name(&self) -> &'static str;
    /// Analyses the given levels (in the order given).
    fn analyze(&self, m: &ModulePresentation, levels: &[u32], budget: DegreeBudget) -> Result<Vec<LevelAnalysis>>;
}

/// Name → engine lookup.
pub struct EngineRegistry {
    engines: BTreeMap<&'static str, Arc<dyn CoinvariantEngine>>,
}

impl EngineRegistry {
    /// Registry with the built-in engines.
    pub fn builtin() -> Self {
        let mut r = EngineRegistry { engines: BTreeMap::new() };
        r.register(Arc::new(LayeredEngine));
        r.register(Arc::new(ExpandedEngine));
        r
    }

    pub fn register(&mut self, engine: Arc<dyn CoinvariantEngine>) {
        self.engines.insert(engine.name(), engine);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn CoinvariantEngine>> {
        self.engines.get(name).cloned().ok_or_else(|| {
            Error::input("engine", format!("unknown engine `{name}` (known: {})", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.engines.keys().copied().collect()
    }
}

/// The default engine.
pub fn default_engine() -> Arc<dyn CoinvariantEngine> {
    Arc::new(LayeredEngine)
}

/// Layered saturation plus root-of-unity specialization.
#[derive(Clone, Copy, Debug, Default)]
pub struct LayeredEngine;

/// Full expansion plus dense Smith form.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExpandedEngine;

/// Multiplicity of `Φ_j` in the restricted (`Zp`) presentation: `g·d` minus
/// the rank at a primitive `p^j`-th root of unity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Multiplicity {
    pub value: usize,
    pub certified: bool,
}

fn phi_residues(p: u64, precision: u32, j: u32) -> Result<Vec<u128>> {
    let ring = CoefficientRing::zp(p, precision)?;
    let f = cyclotomic(&ring, j, DegreeBudget(usize::MAX))?;
    Ok(f.coeffs().iter().map(|c| c.rational_part()).collect())
}

pub(crate) fn omega_residues(p: u64, precision: u32, n: u32, budget: DegreeBudget) -> Result<Vec<u128>> {
    let ring = CoefficientRing::zp(p, precision)?;
    let w = omega(&ring, n, budget)?;
    Ok(w.coeffs().iter().map(|c| c.rational_part()).collect())
}

/// `Zp`-multiplicities `m_0..=m_{n_max}` of a restricted matrix.
pub(crate) fn multiplicities(zp: &ZpMatrix, n_max: u32) -> Result<Vec<Multiplicity>> {
    (0..=n_max)
        .map(|j| {
            let phi = phi_residues(zp.prime, zp.precision, j)?;
            let r = specialized_rank(zp, &phi);
            Ok(Multiplicity { value: zp.rows - r.rank, certified: r.certified })
        })
        .collect()
}

/// Converts `Zp` layered data into a structure over the coefficient ring.
fn structure_from_layers(
    level: u32,
    c_seq: &[usize],
    terminated: bool,
    free_zp: usize,
    free_certified: bool,
    precision: u32,
    d: usize,
) -> CoinvariantStructure {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for e in 1..c_seq.len() {
        let k = c_seq[e - 1] - c_seq[e].min(c_seq[e - 1]);
        if k > 0 {
            *counts.entry(e as u32).or_default() += k;
        }
    }
    let mut all_certified = free_certified;
    if !terminated {
        // Exponents beyond the last round cannot be resolved at this precision.
        let last = *c_seq.last().unwrap_or(&0);
        let rest = last.saturating_sub(free_zp);
        if rest > 0 {
            *counts.entry(c_seq.len() as u32).or_default() += rest;
        }
        all_certified = false;
    }
    let mut pairs = Vec::new();
    for (&e, &k) in &counts {
        let ok = all_certified && e + 2 < precision && k % d == 0;
        for _ in 0..k.div_ceil(d) {
            pairs.push((e, ok));
        }
    }
    CoinvariantStructure::new(level, free_zp / d, pairs, free_certified && free_zp % d == 0)
}

impl CoinvariantEngine for LayeredEngine {
    fn name(&self) -> &'static str {
        "layered"
    }

    fn analyze(&self, m: &ModulePresentation, levels: &[u32], budget: DegreeBudget) -> Result<Vec<LevelAnalysis>> {
        let Some(&top) = levels.iter().max() else { return Ok(Vec::new()) };
        let ring = m.ring();
        let (p, d) = (ring.prime(), ring.degree());
        level_degree(p, top, budget)?;
        DegreeBudget::default().check(m.max_degree(), "relation entry degree")?;
        let zp = m.restrict_to_zp();
        let mults = multiplicities(&zp, top)?;
        levels
            .iter()
            .map(|&n| {
                let used = &mults[..=n as usize];
                let free_zp: usize = used.iter().enumerate().map(|(j, mu)| mu.value * phi_p_power(p, j as u32)).sum();
                let free_certified = used.iter().all(|mu| mu.certified);
                let w = omega_residues(p, zp.precision, n, budget)?;
                let run = layered(&zp, &w, free_certified.then_some(free_zp), false);
                let structure =
                    structure_from_layers(n, &run.c_seq, run.terminated, free_zp, free_certified, zp.precision, d);
                let components = ComponentRanks {
                    ranks: used.iter().enumerate().map(|(j, mu)| mu.value * phi_p_power(p, j as u32) / d).collect(),
                    certified: free_certified,
                };
                Ok(LevelAnalysis { structure, components })
            })
            .collect()
    }
}

impl CoinvariantEngine for ExpandedEngine {
    fn name(&self) -> &'static str {
        "expanded"
    }

    fn analyze(&self, m: &ModulePresentation, levels: &[u32], budget: DegreeBudget) -> Result<Vec<LevelAnalysis>> {
        levels
            .iter()
            .map(|&n| {
                let lvl = expand_to_level(m, n, budget)?;
                let st = lvl.structure();
                let (ranks, certified) = lvl.phi_component_ranks(&st)?;
                let pairs = st.torsion.iter().copied().zip(st.certified.iter().copied()).collect();
                let free_certified = st.smith.exponents.iter().zip(&st.smith.certified).all(|(e, &c)| c || e.finite().is_none());
                Ok(LevelAnalysis {
                    structure: CoinvariantStructure::new(n, st.free_rank, pairs, free_certified),
                    components: ComponentRanks { ranks, certified },
                })
            })
            .collect()
    }
}

/// Structure of `M_{Γ_n}` with the default engine.
pub fn coinvariants(m: &ModulePresentation, n: u32) -> Result<CoinvariantStructure> {
    let budget = DegreeBudget::for_levels(m.ring().prime(), n);
    Ok(default_engine().analyze(m, &[n], budget)?.remove(0).structure)
}

/// `Φ_j`-component ranks `c_0..c_n` with the default engine.
pub fn phi_component_ranks(m: &ModulePresentation, n: u32) -> Result<ComponentRanks> {
    let budget = DegreeBudget::for_levels(m.ring().prime(), n);
    Ok(default_engine().analyze(m, &[n], budget)?.remove(0).components)
}

/// Result of [`transition_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransitionReport {
    pub level: u32,
    /// Free ranks at levels `n` and `n + 1`.
    pub ranks: [usize; 2],
    pub rank_monotone: bool,
    /// Images of torsion generators of level `n + 1` are torsion at level `n`.
    pub torsion_to_torsion: bool,
    /// `t_0..=t_{n+1}`.
    pub torsion_orders: Vec<u64>,
    pub certified: bool,
}

/// Checks the natural projection `M_{Γ_{n+1}} → M_{Γ_n}`.
pub fn transition_check(m: &ModulePresentation, n: u32) -> Result<TransitionReport> {
    let p = m.ring().prime();
    let budget = DegreeBudget::for_levels(p, n + 1);
    let levels: Vec<u32> = (0..=n + 1).collect();
    let analyses = default_engine().analyze(m, &levels, budget)?;
    let ranks = [analyses[n as usize].structure.free_rank, analyses[n as usize + 1].structure.free_rank];
    let zp = m.restrict_to_zp();
    let gens = torsion_generators(&zp, n + 1, budget)?;
    // Project to level n: a vector is torsion there iff adjoining it as a
    // relation leaves every Φ_j-multiplicity (j ≤ n) unchanged.
    let torsion_to_torsion = if gens.is_empty() {
        true
    } else {
        let before = multiplicities(&zp, n)?;
        let quotient = quotient_matrix(&zp, &gens);
        let after = multiplicities(&quotient, n)?;
        before.iter().zip(&after).all(|(a, b)| a.value == b.value)
    };
    let certified = analyses.iter().all(|a| a.structure.is_certified());
    Ok(TransitionReport {
        level: n,
        ranks,
        rank_monotone: ranks[1] >= ranks[0],
        torsion_to_torsion,
        torsion_orders: analyses.iter().map(|a| a.structure.torsion_order).collect(),
        certified,
    })
}

/// Generators of `(M_{Γ_n})[p^∞]` in the restricted coordinates.
pub(crate) fn torsion_generators(zp: &ZpMatrix, n: u32, budget: DegreeBudget) -> Result<Vec<TorsionGen>> {
    let mults = multiplicities(zp, n)?;
    let free: usize = mults.iter().enumerate().map(|(j, mu)| mu.value * phi_p_power(zp.prime, j as u32)).sum();
    if !mults.iter().all(|m| m.certified) {
        return Err(Error::resource(format!("precision exhausted deciding free rank at level {n}")));
    }
    let w = omega_residues(zp.prime, zp.precision, n, budget)?;
    let run = layered(zp, &w, Some(free), true);
    if !run.terminated {
        return Err(Error::resource(format!("precision exhausted resolving torsion at level {n}")));
    }
    Ok(run.gens)
}

/// `[B | W]` at the precision of the least precise generator.
pub(crate) fn quotient_matrix(zp: &ZpMatrix, gens: &[TorsionGen]) -> ZpMatrix {
    let digits = gens.iter().map(|g| g.digits).min().unwrap_or(zp.precision).min(zp.precision);
    let modulus = (zp.prime as u128).pow(digits);
    let reduce = |poly: &Vec<u128>| -> Vec<u128> {
        let mut v: Vec<u128> = poly.iter().map(|&c| c % modulus).collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    };
    let mut out = ZpMatrix {
        prime: zp.prime,
        precision: digits,
        rows: zp.rows,
        cols: zp.cols,
        entries: zp.entries.iter().map(|row| row.iter().map(reduce).collect()).collect(),
    };
    let cols: Vec<Vec<Vec<u128>>> = gens.iter().map(|g| g.vector.iter().map(reduce).collect()).collect();
    out = out.with_columns(&cols);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::IwasawaPoly;

    fn ring(p: u64) -> CoefficientRing {
        CoefficientRing::zp(p, 24).unwrap()
    }

    fn both(m: &ModulePresentation, levels: &[u32]) -> (Vec<LevelAnalysis>, Vec<LevelAnalysis>) {
        let b = DegreeBudget::for_levels(m.ring().prime(), *levels.iter().max().unwrap());
        (LayeredEngine.analyze(m, levels, b).unwrap(), ExpandedEngine.analyze(m, levels, b).unwrap())
    }

    #[test]
    fn t_minus_p_torsion_grows_linearly() {
        let r = ring(5);
        let m = ModulePresentation::cyclic(IwasawaPoly::from_ints(&r, &[-5, 1]));
        let levels: Vec<u32> = (0..=4).collect();
        let out = LayeredEngine.analyze(&m, &levels, DegreeBudget::for_levels(5, 4)).unwrap();
        for (n, a) in out.iter().enumerate() {
            assert_eq!(a.structure.free_rank, 0);
            assert_eq!(a.structure.torsion_exponents, vec![n as u32 + 1]);
            assert!(a.components.ranks.iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn layered_matches_expanded_on_small_modules() {
        let r = ring(5);
        let f1 = cyclotomic(&r, 1, DegreeBudget::default()).unwrap();
        let parts = [
            ModulePresentation::cyclic(f1.clone()),
            ModulePresentation::cyclic(IwasawaPoly::from_ints(&r, &[25])),
            ModulePresentation::cyclic(IwasawaPoly::from_ints(&r, &[-5, 0, 1])),
            ModulePresentation::free(&r, 1),
            ModulePresentation::from_int_rows(&r, &[vec![vec![5], vec![0, 0, 1]]]).unwrap(),
        ];
        let m = ModulePresentation::direct_sum_all(&r, &parts).unwrap();
        let (a, b) = both(&m, &[0, 1, 2]);
        assert_eq!(a, b);
    }

    #[test]
    fn unramified_coefficients() {
        let r = CoefficientRing::new(5, 2, 12).unwrap();
        let f1 = cyclotomic(&r, 1, DegreeBudget::default()).unwrap();
        let m = ModulePresentation::cyclic(f1)
            .direct_sum(&ModulePresentation::cyclic(IwasawaPoly::from_ints(&r, &[-5, 1])))
            .unwrap();
        let (a, b) = both(&m, &[0, 1]);
        assert_eq!(a, b);
        assert_eq!(a[1].structure.free_rank, 4);
        assert_eq!(a[1].structure.torsion_exponents, vec![2]);
    }
}
