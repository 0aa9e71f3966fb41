//! Arithmetic-facing formulas: growth sequences from Mordell–Weil rank
//! tables, predicted cyclotomic types for each setting, Tate-module
//! predictions, the BDP order bound, conjectural reports, and the
//! anticyclotomic parity diagnostic.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{char_ideal_text, phi_p_power};
use crate::presentation::SCHEMA_VERSION;

/// Whether a rank table counts `Z`-ranks or ranks over the CM order `O`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankKind {
    Z,
    O,
}

impl std::str::FromStr for RankKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Z" | "z" => Ok(RankKind::Z),
            "O" | "o" => Ok(RankKind::O),
            _ => Err(Error::input("rank_kind", format!("expected `Z` or `O`, got `{s}`"))),
        }
    }
}

/// Mordell–Weil ranks at levels `0..=n_max` of a `Zp`-tower.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTable {
    pub p: u64,
    pub kind: RankKind,
    pub values: Vec<u64>,
}

fn check_prime(p: u64) -> Result<()> {
    if p < 2 || !(2..).take_while(|d| d * d <= p).all(|d| p % d != 0) {
        return Err(Error::input("p", format!("{p} is not a prime")));
    }
    Ok(())
}

impl RankTable {
    /// Validates primality of `p`, nonemptiness, monotonicity, and jump
    /// divisibility by `φ(p^n)`.
    pub fn new(p: u64, kind: RankKind, values: Vec<u64>) -> Result<Self> {
        check_prime(p)?;
        if values.is_empty() {
            return Err(Error::input("ranks", "at least one level is required"));
        }
        for n in 1..values.len() {
            if values[n] < values[n - 1] {
                return Err(Error::InvalidRankTable {
                    level: n,
                    message: format!("rank decreases from {} to {}", values[n - 1], values[n]),
                });
            }
            let jump = values[n] - values[n - 1];
            let phi = phi_p_power(p, n as u32) as u64;
            if jump % phi != 0 {
                return Err(Error::InvalidRankTable {
                    level: n,
                    message: format!("jump {jump} not divisible by {phi}"),
                });
            }
        }
        Ok(RankTable { p, kind, values })
    }

    pub fn n_max(&self) -> u32 {
        self.values.len() as u32 - 1
    }

    /// The table whose growth sequence is `seq` (the inverse of
    /// [`growth_sequence`]).
    pub fn from_growth(seq: &GrowthSequence) -> Result<Self> {
        let mut acc = 0u64;
        let values = seq
            .values
            .iter()
            .enumerate()
            .map(|(n, &x)| {
                let step = x
                    .checked_mul(phi_p_power(seq.p, n as u32) as u64)
                    .and_then(|s| acc.checked_add(s))
                    .ok_or_else(|| Error::resource("rank overflow"))?;
                acc = step;
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        RankTable::new(seq.p, seq.kind.rank_kind(), values)
    }

    /// Converts a `Z`-rank table of an `O`-module to `O`-ranks
    /// (`rank_Z = 2·rank_O`); every value must be even.
    pub fn to_rank_o(&self) -> Result<RankTable> {
        if self.kind != RankKind::Z {
            return Err(Error::input("rank_kind", "conversion expects a table of Z-ranks"));
        }
        if let Some(n) = self.values.iter().position(|v| v % 2 != 0) {
            return Err(Error::InvalidRankTable {
                level: n,
                message: format!("Z-rank {} of an O-module must be even", self.values[n]),
            });
        }
        RankTable::new(self.p, RankKind::O, self.values.iter().map(|v| v / 2).collect())
    }
}

/// `e` (from `Z`-ranks) or `f` (from `O`-ranks).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthKind {
    E,
    F,
}

impl GrowthKind {
    pub fn rank_kind(self) -> RankKind {
        match self {
            GrowthKind::E => RankKind::Z,
            GrowthKind::F => RankKind::O,
        }
    }

    pub fn letter(self) -> char {
        match self {
            GrowthKind::E => 'e',
            GrowthKind::F => 'f',
        }
    }
}

/// `x_0 = rank(0)` and `x_n = (rank(n) − rank(n−1))/φ(p^n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthSequence {
    pub p: u64,
    pub kind: GrowthKind,
    pub values: Vec<u64>,
}

impl GrowthSequence {
    /// A sequence given directly (nonnegative by type).
    pub fn new(p: u64, kind: GrowthKind, values: Vec<u64>) -> Result<Self> {
        check_prime(p)?;
        if values.is_empty() {
            return Err(Error::input("growth", "at least one level is required"));
        }
        Ok(GrowthSequence { p, kind, values })
    }

    pub fn n_max(&self) -> u32 {
        self.values.len() as u32 - 1
    }
}

/// Growth sequence of a validated table; `kind` must match the table's rank kind.
pub fn growth_sequence(t: &RankTable, kind: GrowthKind) -> Result<GrowthSequence> {
    if kind.rank_kind() != t.kind {
        return Err(Error::Setting {
            message: format!("{}_n needs a table of {:?}-ranks, got {:?}-ranks", kind.letter(), kind.rank_kind(), t.kind),
        });
    }
    let values = (0..t.values.len())
        .map(|n| {
            if n == 0 {
                t.values[0]
            } else {
                (t.values[n] - t.values[n - 1]) / phi_p_power(t.p, n as u32) as u64
            }
        })
        .collect();
    Ok(GrowthSequence { p: t.p, kind, values })
}

/// Sign of the functional equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootNumber {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl std::str::FromStr for RootNumber {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+1" | "1" | "+" => Ok(RootNumber::Plus),
            "-1" | "-" => Ok(RootNumber::Minus),
            _ => Err(Error::input("root_number", format!("expected `+1` or `-1`, got `{s}`"))),
        }
    }
}

/// The arithmetic settings with a proven cyclotomic-type statement.
/// Serialized by [`SettingTag::name`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SettingTag {
    CMInertCyc,
    CMInertAnticyc,
    CMSplitSingleQ,
    CMSplitCyc,
    CMSplitAnticycRootPlus,
    CMSplitAnticycRootMinus,
    HeegnerBDP,
    HeegnerFine,
}

/// Coefficient ring of the predicted module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RingTag {
    /// `Λ = Zp[[T]]`.
    #[serde(rename = "Lambda")]
    Lambda,
    /// `Λ_{O_p} = O_p[[T]]`, `O_p` the unramified quadratic extension.
    #[serde(rename = "Lambda_Op")]
    LambdaOp,
}

impl SettingTag {
    pub const ALL: [SettingTag; 8] = [
        SettingTag::CMInertCyc,
        SettingTag::CMInertAnticyc,
        SettingTag::CMSplitSingleQ,
        SettingTag::CMSplitCyc,
        SettingTag::CMSplitAnticycRootPlus,
        SettingTag::CMSplitAnticycRootMinus,
        SettingTag::HeegnerBDP,
        SettingTag::HeegnerFine,
    ];

    /// Registry / CLI name.
    pub fn name(self) -> &'static str {
        match self {
            SettingTag::CMInertCyc => "cm_inert_cyc",
            SettingTag::CMInertAnticyc => "cm_inert_anticyc",
            SettingTag::CMSplitSingleQ => "cm_split_single_q",
            SettingTag::CMSplitCyc => "cm_split_cyc",
            SettingTag::CMSplitAnticycRootPlus => "cm_split_anticyc_root_plus",
            SettingTag::CMSplitAnticycRootMinus => "cm_split_anticyc_root_minus",
            SettingTag::HeegnerBDP => "heegner_bdp",
            SettingTag::HeegnerFine => "heegner_fine",
        }
    }

    /// Parses a setting name.  `cm_split_anticyc` is resolved by the root
    /// number, which it requires.
    pub fn parse(name: &str, root_number: Option<RootNumber>) -> Result<SettingTag> {
        let norm = name.trim().to_ascii_lowercase().replace('-', "_");
        if norm == "cm_split_anticyc" {
            return match root_number {
                Some(RootNumber::Plus) => Ok(SettingTag::CMSplitAnticycRootPlus),
                Some(RootNumber::Minus) => Ok(SettingTag::CMSplitAnticycRootMinus),
                None => Err(Error::input("root_number", "required for setting cm_split_anticyc")),
            };
        }
        let tag = SettingTag::ALL
            .into_iter()
            .find(|t| t.name() == norm || format!("{t:?}").eq_ignore_ascii_case(name.trim()))
            .ok_or_else(|| {
                Error::input(
                    "setting",
                    format!(
                        "unknown setting `{name}` (known: cm_split_anticyc, {})",
                        SettingTag::ALL.iter().map(|t| t.name()).collect::<Vec<_>>().join(", ")
                    ),
                )
            })?;
        if let (Some(r), Some(own)) = (root_number, tag.root_number()) {
            if r != own {
                return Err(Error::input("root_number", format!("{} contradicts setting {}", root_label(r), tag.name())));
            }
        }
        Ok(tag)
    }

    fn root_number(self) -> Option<RootNumber> {
        match self {
            SettingTag::CMSplitAnticycRootPlus => Some(RootNumber::Plus),
            SettingTag::CMSplitAnticycRootMinus => Some(RootNumber::Minus),
            _ => None,
        }
    }

    /// Growth sequence the setting's statement is phrased in.
    pub fn growth_kind(self) -> GrowthKind {
        match self {
            SettingTag::CMInertCyc | SettingTag::CMInertAnticyc | SettingTag::CMSplitSingleQ => GrowthKind::F,
            _ => GrowthKind::E,
        }
    }

    pub fn ring(self) -> RingTag {
        match self {
            SettingTag::CMInertCyc | SettingTag::CMInertAnticyc => RingTag::LambdaOp,
            _ => RingTag::Lambda,
        }
    }

    /// The module the proven statement is about.
    pub fn object(self) -> &'static str {
        match self {
            SettingTag::CMInertCyc => "ℳ(E/F^cyc)^∨",
            SettingTag::CMInertAnticyc => "Y_f(E/F^ac)",
            SettingTag::CMSplitSingleQ => "ℳ_q(E/F_{q^∞})^∨",
            SettingTag::CMSplitCyc => "ℳ(E/F^cyc)^∨",
            SettingTag::CMSplitAnticycRootPlus => "ℳ(E/F^ac)^∨",
            SettingTag::CMSplitAnticycRootMinus => "Y_f(E/F^ac)",
            SettingTag::HeegnerBDP => "X_f^BDP(E/F^ac)",
            SettingTag::HeegnerFine => "Y_f(E/F^ac)",
        }
    }

    /// Short description of the arithmetic situation.
    pub fn description(self) -> &'static str {
        match self {
            SettingTag::CMInertCyc => "CM curve, p inert in F, cyclotomic Zp-extension of F",
            SettingTag::CMInertAnticyc => "CM curve, p inert in F, anticyclotomic Zp-extension of F",
            SettingTag::CMSplitSingleQ => "CM curve, p split in F, Zp-extension unramified outside one prime q above p",
            SettingTag::CMSplitCyc => "CM curve, p split in F, cyclotomic Zp-extension of F",
            SettingTag::CMSplitAnticycRootPlus => "CM curve, p split in F, anticyclotomic, root number +1",
            SettingTag::CMSplitAnticycRootMinus => "CM curve, p split in F, anticyclotomic, root number -1",
            SettingTag::HeegnerBDP => "generalized Heegner hypothesis, anticyclotomic, BDP-Selmer group",
            SettingTag::HeegnerFine => "generalized Heegner hypothesis, anticyclotomic, fine Selmer group",
        }
    }

    /// Number of the open question attached to the setting.
    pub fn question(self) -> u8 {
        match self {
            SettingTag::CMInertCyc => 1,
            SettingTag::CMInertAnticyc => 2,
            SettingTag::CMSplitSingleQ => 3,
            SettingTag::CMSplitCyc => 4,
            SettingTag::CMSplitAnticycRootPlus | SettingTag::CMSplitAnticycRootMinus => 5,
            SettingTag::HeegnerBDP | SettingTag::HeegnerFine => 6,
        }
    }
}

impl Serialize for SettingTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for SettingTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        SettingTag::parse(&name, None).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for SettingTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn root_label(r: RootNumber) -> &'static str {
    match r {
        RootNumber::Plus => "+1",
        RootNumber::Minus => "-1",
    }
}

/// Per-level multiplicities of `Λ/Φ_n`, exact or as intervals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Prediction {
    /// `(n, multiplicity)` for every level.
    Factors(Vec<(u32, u64)>),
    /// `(n, lo, hi)` for every level.
    Intervals(Vec<(u32, u64, u64)>),
}

impl Prediction {
    /// `∏ Φ_n^{m_n}`, with `Φ_n^{lo..hi}` for proper intervals.
    pub fn render(&self) -> String {
        match self {
            Prediction::Factors(f) => char_ideal_text(f),
            Prediction::Intervals(iv) => {
                let parts: Vec<String> = iv
                    .iter()
                    .filter(|(_, _, hi)| *hi > 0)
                    .map(|&(n, lo, hi)| if lo == hi { format!("Φ_{n}^{lo}") } else { format!("Φ_{n}^{{{lo}..{hi}}}") })
                    .collect();
                if parts.is_empty() {
                    "1".to_string()
                } else {
                    parts.join(" · ")
                }
            }
        }
    }

    /// Multiplicity (lower, upper) at level `n`.
    pub fn bounds_at(&self, n: u32) -> (u64, u64) {
        match self {
            Prediction::Factors(f) => f.iter().find(|x| x.0 == n).map(|x| (x.1, x.1)).unwrap_or((0, 0)),
            Prediction::Intervals(iv) => iv.iter().find(|x| x.0 == n).map(|x| (x.1, x.2)).unwrap_or((0, 0)),
        }
    }
}

/// Whether an output is backed by a theorem or only conjectured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionStatus {
    ProvenShape,
    Conjectural,
}

/// The predicted pseudo-isomorphism type of a setting's module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PredictedCharIdeal {
    pub setting: SettingTag,
    pub ring: RingTag,
    pub object: String,
    pub prediction: Prediction,
    pub char_ideal: String,
    /// Which statement produced the prediction.
    pub provenance: String,
}

/// A per-setting prediction rule.
pub trait Predictor: Send + Sync {
    /// Registry name.
    fn name(&self) -> &'static str;
    /// Multiplicity bounds at a level from the growth value there.
    fn rule(&self, x: u64, level: u32) -> Result<(u64, u64)>;
    /// Interval-valued rules report intervals; exact rules report factors.
    fn exact(&self) -> bool {
        true
    }
    /// Human-readable form of the rule.
    fn formula(&self) -> &'static str;
}

/// `scale · max{0, x − 1}`.
struct MaxMinusOne {
    name: &'static str,
    scale: u64,
}

impl Predictor for MaxMinusOne {
    fn name(&self) -> &'static str {
        self.name
    }
    fn rule(&self, x: u64, _: u32) -> Result<(u64, u64)> {
        let m = self.scale * x.saturating_sub(1);
        Ok((m, m))
    }
    fn formula(&self) -> &'static str {
        if self.scale == 1 {
            "max{0, x_n - 1}"
        } else {
            "2·max{0, e_n - 1}"
        }
    }
}

/// `e_n − 1`, with `e_n ≥ 1` required.
struct ExactMinusOne;

impl Predictor for ExactMinusOne {
    fn name(&self) -> &'static str {
        "heegner_bdp"
    }
    fn rule(&self, x: u64, level: u32) -> Result<(u64, u64)> {
        if x == 0 {
            return Err(Error::hypothesis(format!(
                "e_{level} = 0, but the BDP statement needs e_n ≥ 1 at every level (surjectivity onto the local points fails)"
            )));
        }
        Ok((x - 1, x - 1))
    }
    fn formula(&self) -> &'static str {
        "e_n - 1"
    }
}

/// `max{0, e_n − 2} ≤ s_n ≤ max{0, e_n − 1}`.
struct FineInterval;

impl Predictor for FineInterval {
    fn name(&self) -> &'static str {
        "heegner_fine"
    }
    fn rule(&self, x: u64, _: u32) -> Result<(u64, u64)> {
        Ok((x.saturating_sub(2), x.saturating_sub(1)))
    }
    fn exact(&self) -> bool {
        false
    }
    fn formula(&self) -> &'static str {
        "max{0, e_n - 2} <= s_n <= max{0, e_n - 1}"
    }
}

/// Setting → prediction rule.
pub struct PredictorRegistry {
    rules: BTreeMap<SettingTag, Arc<dyn Predictor>>,
}

impl PredictorRegistry {
    pub fn builtin() -> Self {
        let mut r = PredictorRegistry { rules: BTreeMap::new() };
        for tag in SettingTag::ALL {
            let rule: Arc<dyn Predictor> = match tag {
                SettingTag::CMInertCyc | SettingTag::CMInertAnticyc | SettingTag::CMSplitSingleQ => {
                    Arc::new(MaxMinusOne { name: tag.name(), scale: 1 })
                }
                SettingTag::CMSplitCyc | SettingTag::CMSplitAnticycRootPlus | SettingTag::CMSplitAnticycRootMinus => {
                    Arc::new(MaxMinusOne { name: tag.name(), scale: 2 })
                }
                SettingTag::HeegnerBDP => Arc::new(ExactMinusOne),
                SettingTag::HeegnerFine => Arc::new(FineInterval),
            };
            r.register(tag, rule);
        }
        r
    }

    /// Replaces the rule of a setting.
    pub fn register(&mut self, tag: SettingTag, rule: Arc<dyn Predictor>) {
        self.rules.insert(tag, rule);
    }

    pub fn get(&self, tag: SettingTag) -> Result<Arc<dyn Predictor>> {
        self.rules
            .get(&tag)
            .cloned()
            .ok_or_else(|| Error::Setting { message: format!("no predictor registered for {tag}") })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.rules.keys().map(|t| t.name()).collect()
    }

    /// Applies the setting's rule level by level.
    pub fn predict(&self, setting: SettingTag, s: &GrowthSequence) -> Result<PredictedCharIdeal> {
        if s.kind != setting.growth_kind() {
            return Err(Error::Setting {
                message: format!(
                    "setting {setting} is stated in terms of {}_n, got a sequence of kind {}",
                    setting.growth_kind().letter(),
                    s.kind.letter()
                ),
            });
        }
        let rule = self.get(setting)?;
        let bounds = s
            .values
            .iter()
            .enumerate()
            .map(|(n, &x)| rule.rule(x, n as u32).map(|b| (n as u32, b)))
            .collect::<Result<Vec<_>>>()?;
        let prediction = if rule.exact() {
            Prediction::Factors(bounds.iter().map(|&(n, (m, _))| (n, m)).collect())
        } else {
            Prediction::Intervals(bounds.iter().map(|&(n, (lo, hi))| (n, lo, hi)).collect())
        };
        Ok(PredictedCharIdeal {
            setting,
            ring: setting.ring(),
            object: setting.object().to_string(),
            char_ideal: prediction.render(),
            prediction,
            provenance: format!("proven: {} ({}), multiplicity {}", setting.object(), setting.description(), rule.formula()),
        })
    }
}

/// [`PredictorRegistry::predict`] with the built-in rules.
pub fn predict(setting: SettingTag, s: &GrowthSequence) -> Result<PredictedCharIdeal> {
    PredictorRegistry::builtin().predict(setting, s)
}

/// Type of the Tate module of the Mordell–Weil group at level `n`:
/// `(j, e_j)` for `j ≤ n` with `e_j > 0`.
pub fn mw_tate_prediction(s: &GrowthSequence, n: u32) -> Result<Vec<(u32, u64)>> {
    if s.kind != GrowthKind::E {
        return Err(Error::Setting { message: "the Tate-module type is read from e_n".into() });
    }
    if n > s.n_max() {
        return Err(Error::input("level", format!("level {n} exceeds the table's last level {}", s.n_max())));
    }
    Ok((0..=n).map(|j| (j, s.values[j as usize])).filter(|x| x.1 > 0).collect())
}

/// Local analogue: multiplicity `g·d` at every level `j ≤ n`, where `g` is
/// the dimension and `d = [K : Qp]`.
pub fn local_mw_prediction(g: u64, d: u64, n: u32) -> Result<Vec<(u32, u64)>> {
    if g == 0 {
        return Err(Error::input("g", "the dimension must be at least 1"));
    }
    if d == 0 {
        return Err(Error::input("d", "the field degree must be at least 1"));
    }
    let m = g.checked_mul(d).ok_or_else(|| Error::resource("g·d overflows"))?;
    Ok((0..=n).map(|j| (j, m)).collect())
}

/// `Σ_j m_j·φ(p^j)`: the `Zp`-rank of `⊕ (Λ/Φ_j)^{m_j}`.
pub fn total_rank(p: u64, factors: &[(u32, u64)]) -> u64 {
    factors.iter().map(|&(j, m)| m * phi_p_power(p, j) as u64).sum()
}

/// Lower bound `(e_n − 1)/2` for the `Φ_n`-order of the BDP `p`-adic
/// L-function, and its integer ceiling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BdpBound {
    pub e: u64,
    /// Numerator over denominator 2, in lowest terms as `numerator/denominator`.
    pub numerator: u64,
    pub denominator: u64,
    /// `⌈(e − 1)/2⌉`: an order is an integer.
    pub ceiling: u64,
}

impl BdpBound {
    pub fn rational(&self) -> String {
        if self.denominator == 1 {
            self.numerator.to_string()
        } else {
            format!("{}/{}", self.numerator, self.denominator)
        }
    }
}

pub fn bdp_order_lower_bound(e: u64) -> Result<BdpBound> {
    if e == 0 {
        return Err(Error::hypothesis("the bound needs e_n ≥ 1 (generalized Heegner setting)"));
    }
    let num = e - 1;
    let (numerator, denominator) = if num % 2 == 0 { (num / 2, 1) } else { (num, 2) };
    Ok(BdpBound { e, numerator, denominator, ceiling: num.div_ceil(2) })
}

/// One side of a question report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuestionClaim {
    pub object: String,
    pub ring: RingTag,
    pub prediction: Prediction,
    pub char_ideal: String,
    pub statement: String,
}

/// Theorem-backed part and conjectural extension, in separate namespaces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuestionReport {
    pub schema_version: String,
    pub question: u8,
    pub setting: SettingTag,
    pub growth: Vec<u64>,
    #[serde(rename = "PROVEN")]
    pub proven: QuestionClaim,
    #[serde(rename = "CONJECTURAL")]
    pub conjectural: QuestionClaim,
    pub notes: Vec<String>,
}

/// The object whose characteristic ideal the question asks about.
fn question_object(setting: SettingTag) -> &'static str {
    match setting {
        SettingTag::CMInertCyc | SettingTag::CMSplitCyc => "Y(E/F^cyc)",
        SettingTag::CMSplitSingleQ => "R_q(E/F_{q^∞})^∨",
        _ => "Y(E/F^ac)",
    }
}

/// What a positive answer amounts to, given the proven statement.
fn question_equivalence(setting: SettingTag) -> &'static str {
    match setting.question() {
        1 | 3 => "given the proven part, a positive answer amounts to finiteness of the fine Tate–Shafarevich group over the whole tower",
        2 | 4 => "given the proven part, a positive answer amounts to the full fine Selmer dual having the same cyclotomic type as the proven module",
        5 => "asks that the full fine Selmer dual carry the proven cyclotomic type",
        _ => "asks for some exponents s_n inside the proven intervals; the report does not choose a distinguished value",
    }
}

/// Conjectural characteristic ideal of the full fine Selmer dual attached
/// to the setting, next to the proven statement it extends.
pub fn question_report(setting: SettingTag, s: &GrowthSequence) -> Result<QuestionReport> {
    let proven = predict(setting, s)?;
    let conj_prediction = match setting {
        // The BDP statement is about a different module; the question for
        // the fine Selmer dual uses the fine intervals.
        SettingTag::HeegnerBDP => predict(SettingTag::HeegnerFine, s)?.prediction,
        _ => proven.prediction.clone(),
    };
    let q = setting.question();
    let mut notes = vec![format!(
        "convention: the product includes Φ_0 with exponent read from the level-0 value {}_0",
        s.kind.letter()
    )];
    if setting == SettingTag::HeegnerBDP {
        notes.push("the proven part concerns X_f^BDP; the conjectural part uses the fine-Selmer intervals".into());
    }
    Ok(QuestionReport {
        schema_version: SCHEMA_VERSION.to_string(),
        question: q,
        setting,
        growth: s.values.clone(),
        proven: QuestionClaim {
            object: proven.object.clone(),
            ring: proven.ring,
            char_ideal: proven.char_ideal.clone(),
            prediction: proven.prediction.clone(),
            statement: proven.provenance.clone(),
        },
        conjectural: QuestionClaim {
            object: question_object(setting).to_string(),
            ring: setting.ring(),
            char_ideal: conj_prediction.render(),
            prediction: conj_prediction,
            statement: question_equivalence(setting).to_string(),
        },
        notes,
    })
}

/// Outcome of the anticyclotomic parity diagnostic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParityReport {
    pub schema_version: String,
    pub growth: Vec<u64>,
    pub pass: bool,
    /// No growth level in the tail: nothing to infer.
    pub degenerate: bool,
    /// First level of the `{0,1}`-valued tail.
    pub tail_start: Option<u32>,
    /// Parity of the stalling levels (`f_n = 0`) once growth has started.
    pub parity: Option<String>,
    /// Parity of the growth levels (`f_n = 1`).
    pub growth_parity: Option<String>,
    pub notes: Vec<String>,
}

fn parity_name(n: u32) -> String {
    if n % 2 == 0 { "even" } else { "odd" }.to_string()
}

/// Checks that the tail of `f` (levels `n ≥ 1` valued in `{0,1}`) has all
/// growth levels of one parity, with every level of the other parity after
/// the first growth level stalling.
pub fn anticyclotomic_parity_check(s: &GrowthSequence) -> ParityReport {
    let mut rep = ParityReport {
        schema_version: SCHEMA_VERSION.to_string(),
        growth: s.values.clone(),
        pass: true,
        degenerate: false,
        tail_start: None,
        parity: None,
        growth_parity: None,
        notes: Vec::new(),
    };
    if s.kind != GrowthKind::F {
        rep.notes.push("diagnostic intended for f_n (O-ranks); applied as given".into());
    }
    let v = &s.values;
    let n_max = v.len() as u32 - 1;
    if n_max == 0 {
        rep.degenerate = true;
        rep.notes.push("no level n ≥ 1: nothing to check".into());
        return rep;
    }
    let mut start = n_max + 1;
    while start > 1 && v[start as usize - 1] <= 1 {
        start -= 1;
    }
    if start > n_max {
        rep.pass = false;
        rep.notes.push(format!("f_{n_max} = {} is not in {{0, 1}}", v[n_max as usize]));
        return rep;
    }
    rep.tail_start = Some(start);
    let ones: Vec<u32> = (start..=n_max).filter(|&n| v[n as usize] == 1).collect();
    let Some(&first) = ones.first() else {
        rep.degenerate = true;
        rep.notes.push("the tail never grows: no parity class to infer".into());
        return rep;
    };
    let q = first % 2;
    if let Some(&bad) = ones.iter().find(|&&n| n % 2 != q) {
        rep.pass = false;
        rep.notes.push(format!("growth at levels {first} and {bad}: both parities occupied in the tail"));
        return rep;
    }
    if let Some(bad) = (first..=n_max).find(|&n| n % 2 == q && v[n as usize] == 0) {
        rep.pass = false;
        rep.notes.push(format!("level {bad} stalls although it has the growth parity"));
        return rep;
    }
    rep.growth_parity = Some(parity_name(q));
    rep.parity = Some(parity_name(1 - q));
    rep
}

/// JSON input of the predictor entry points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictInput {
    pub p: u64,
    pub setting: String,
    pub rank_kind: RankKind,
    pub ranks: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_number: Option<RootNumber>,
}

/// JSON output of `predict`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PredictOutput {
    pub schema_version: String,
    pub setting: SettingTag,
    pub growth_kind: GrowthKind,
    pub growth: Vec<u64>,
    pub prediction: Prediction,
    pub char_ideal: String,
    pub ring: RingTag,
    pub object: String,
    pub status: PredictionStatus,
    pub notes: Vec<String>,
}

impl PredictInput {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput {
            field: "predict input".into(),
            message: e.to_string(),
        })
    }

    /// Setting, validated table, and growth sequence.
    pub fn resolve(&self) -> Result<(SettingTag, GrowthSequence)> {
        check_prime(self.p)?;
        if self.p < 5 {
            return Err(Error::input("p", format!("{} must be a prime ≥ 5", self.p)));
        }
        let setting = SettingTag::parse(&self.setting, self.root_number)?;
        let table = RankTable::new(self.p, self.rank_kind, self.ranks.clone())?;
        let seq = growth_sequence(&table, setting.growth_kind())?;
        Ok((setting, seq))
    }

    pub fn run(&self) -> Result<PredictOutput> {
        let (setting, seq) = self.resolve()?;
        let pred = predict(setting, &seq)?;
        let mut notes = vec![pred.provenance.clone()];
        if matches!(pred.prediction, Prediction::Intervals(_)) {
            notes.push("multiplicities are only bounded; no value inside the interval is preferred".into());
        }
        notes.push(format!("ring: {}", if pred.ring == RingTag::LambdaOp { "Λ_{O_p}" } else { "Λ" }));
        Ok(PredictOutput {
            schema_version: SCHEMA_VERSION.to_string(),
            setting,
            growth_kind: seq.kind,
            growth: seq.values,
            char_ideal: pred.char_ideal,
            prediction: pred.prediction,
            ring: pred.ring,
            object: pred.object,
            status: PredictionStatus::ProvenShape,
            notes,
        })
    }
}
