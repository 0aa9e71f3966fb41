//! Command-line front end: argument parsing, dispatch, and report rendering.
//!
//! Exit codes: `0` success, `1` a verification or oracle run found failures,
//! `2` malformed or inconsistent input, `3` a mathematical hypothesis or
//! classification failed, `4` a resource budget was exceeded.

pub mod config;
pub mod io;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use iwasawa_core::coinvariants::{CoinvariantEngine, EngineRegistry};
use iwasawa_core::oracle::{roundtrip_suite_with, RoundTripConfig, RoundTripSummary};
use iwasawa_core::predictors::{
    anticyclotomic_parity_check, bdp_order_lower_bound, growth_sequence, local_mw_prediction, mw_tate_prediction,
    question_report, total_rank, GrowthKind, GrowthSequence, ParityReport, PredictInput, PredictOutput, Prediction,
    QuestionReport, RankKind, RankTable, RootNumber, SettingTag,
};
use iwasawa_core::presentation::SCHEMA_VERSION;
use iwasawa_core::structure::{SelectorRegistry, StructureAnalyzer, StructureReport, TowerSpec, Verdict};
use iwasawa_core::Error;
use serde::Serialize;

use crate::config::{Format, SessionConfig};

/// Exit code of a run that completed but found failures.
pub const EXIT_FAILURES: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "iwasawa", version, about = "Finite-level analysis of Iwasawa modules and rank-growth predictions")]
pub struct Cli {
    /// TOML session configuration (default: $IWASAWA_CONFIG).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Global precision exponent N.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Coinvariant engine (`layered` or `expanded`).
    #[arg(long, global = true)]
    pub engine: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Predicted cyclotomic type for a rank table in one setting.
    Predict(PredictArgs),
    /// Elementary type of a presented module.
    Classify(ClassifyArgs),
    /// Structure verifiers on a presented module.
    Verify(VerifyArgs),
    /// Randomized round-trip suite.
    Oracle(OracleArgs),
    /// Mordell–Weil Tate-module type at a level.
    MwTate(MwTateArgs),
    /// Local Mordell–Weil Tate-module type.
    LocalMw(LocalMwArgs),
    /// Lower bounds for the Φ_n-order of the BDP p-adic L-function.
    BdpBound(BdpArgs),
    /// Parity diagnostic for anticyclotomic f_n.
    Parity(ParityArgs),
}

/// Where a rank table comes from.
#[derive(Debug, Args)]
pub struct RankSource {
    #[arg(long)]
    pub p: Option<u64>,
    /// Comma-separated ranks at levels 0, 1, 2, ….
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<u64>>,
    /// CSV file with header `level,rank`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// `Z` or `O` (default: the kind the setting is stated in).
    #[arg(long)]
    pub rank_kind: Option<String>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// JSON input `{p, setting, rank_kind, ranks, root_number}`.
    #[arg(long, conflicts_with_all = ["setting", "ranks", "csv"])]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub setting: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub root_number: Option<String>,
    #[command(flatten)]
    pub source: RankSource,
    /// Emit the question report (proven and conjectural parts) instead.
    #[arg(long)]
    pub question: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Presentation JSON file.
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long)]
    pub n_max: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Check {
    /// Φ_j-ranks of quotients by finite submodules of the coinvariants.
    Tech,
    /// Free ranks reproduced by the classified cyclotomic type.
    PropG0,
    /// Classification unchanged under T ↦ (1+T)^u − 1.
    GeneratorChange,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long)]
    pub n_max: Option<u32>,
    #[arg(long, value_enum, default_value = "tech")]
    pub check: Check,
    /// Submodule selectors for the tower check.
    #[arg(long, value_delimiter = ',')]
    pub selectors: Option<Vec<String>>,
    /// Unit for the generator change.
    #[arg(long, default_value_t = 6)]
    pub unit: u128,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long)]
    pub n_max: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Unimodular obfuscation steps per instance.
    #[arg(long, default_value_t = iwasawa_core::oracle::ROUNDTRIP_OBFUSCATION_STEPS)]
    pub steps: usize,
    /// Skip the structure verifiers.
    #[arg(long)]
    pub no_verifiers: bool,
}

#[derive(Debug, Args)]
pub struct MwTateArgs {
    #[command(flatten)]
    pub source: RankSource,
    /// Level (default: the last level of the table).
    #[arg(long)]
    pub n: Option<u32>,
}

#[derive(Debug, Args)]
pub struct LocalMwArgs {
    /// Dimension of the abelian variety.
    #[arg(long)]
    pub g: u64,
    /// Degree [K : Qp].
    #[arg(long)]
    pub d: u64,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub p: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BdpArgs {
    /// Comma-separated values e_n.
    #[arg(long, value_delimiter = ',', required = true)]
    pub e: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct ParityArgs {
    /// Comma-separated values f_n (alternatively a table via --ranks/--csv).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["ranks", "csv"])]
    pub f: Option<Vec<u64>>,
    #[command(flatten)]
    pub source: RankSource,
}

/// A rendered report plus the exit code it implies.
struct Outcome {
    json: String,
    text: String,
    exit: i32,
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

/// Parses `argv`, runs the command, writes the report, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, Error> {
    let (mut cfg, explicit) = SessionConfig::load(cli.config.as_deref())?;
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    let precision_override = cli.precision.or(explicit.precision.then_some(cfg.precision));
    if let Some(n) = cli.precision {
        cfg.precision = n;
    }
    if let Some(e) = &cli.engine {
        cfg.engine = e.clone();
    }
    let engine = EngineRegistry::builtin().get(&cfg.engine)?;
    let outcome = match &cli.command {
        Command::Predict(a) => cmd_predict(&mut cfg, a)?,
        Command::Classify(a) => cmd_classify(&mut cfg, a, precision_override, engine)?,
        Command::Verify(a) => cmd_verify(&mut cfg, a, precision_override, engine)?,
        Command::Oracle(a) => cmd_oracle(&mut cfg, a, engine)?,
        Command::MwTate(a) => cmd_mw_tate(&mut cfg, a)?,
        Command::LocalMw(a) => cmd_local_mw(&mut cfg, a)?,
        Command::BdpBound(a) => cmd_bdp(a)?,
        Command::Parity(a) => cmd_parity(&mut cfg, a)?,
    };
    let body = match cfg.format {
        Format::Json => outcome.json,
        Format::Text => outcome.text,
    };
    io::emit(&body, cli.out.as_deref())?;
    Ok(outcome.exit)
}

fn rank_table(cfg: &mut SessionConfig, src: &RankSource, default_kind: RankKind) -> Result<RankTable, Error> {
    if let Some(p) = src.p {
        cfg.p = p;
    }
    cfg.validate()?;
    let ranks = match (&src.ranks, &src.csv) {
        (Some(r), None) => r.clone(),
        (None, Some(path)) => io::read_rank_csv(path)?,
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInput { field: "ranks".into(), message: "give either --ranks or --csv".into() })
        }
        (None, None) => {
            return Err(Error::InvalidInput { field: "ranks".into(), message: "a rank table is required".into() })
        }
    };
    let kind = match &src.rank_kind {
        Some(k) => k.parse()?,
        None => default_kind,
    };
    RankTable::new(cfg.p, kind, ranks)
}

fn render_prediction(pred: &Prediction) -> String {
    match pred {
        Prediction::Factors(f) => f.iter().map(|(n, m)| format!("{n}:{m}")).collect::<Vec<_>>().join(" "),
        Prediction::Intervals(iv) => {
            iv.iter().map(|(n, lo, hi)| format!("{n}:[{lo},{hi}]")).collect::<Vec<_>>().join(" ")
        }
    }
}

fn cmd_predict(cfg: &mut SessionConfig, a: &PredictArgs) -> Result<Outcome, Error> {
    let input = match &a.input {
        Some(path) => {
            let input = PredictInput::from_json(&io::read_text(path)?)?;
            cfg.p = input.p;
            input
        }
        None => {
            let setting_name = a.setting.clone().ok_or_else(|| Error::InvalidInput {
                field: "setting".into(),
                message: "--setting is required without --input".into(),
            })?;
            let root: Option<RootNumber> = a.root_number.as_deref().map(str::parse).transpose()?;
            let setting = SettingTag::parse(&setting_name, root)?;
            let table = rank_table(cfg, &a.source, setting.growth_kind().rank_kind())?;
            PredictInput { p: table.p, setting: setting_name, rank_kind: table.kind, ranks: table.values, root_number: root }
        }
    };
    cfg.validate()?;
    if a.question {
        let (setting, seq) = input.resolve()?;
        let q: QuestionReport = question_report(setting, &seq)?;
        let text = format!(
            "question {}  setting {}\n{} = {:?}\nPROVEN       {}  ~  {}\nCONJECTURAL  char {} = {}\n  ({})\n",
            q.question,
            q.setting,
            seq.kind.letter(),
            q.growth,
            q.proven.object,
            q.proven.char_ideal,
            q.conjectural.object,
            q.conjectural.char_ideal,
            q.conjectural.statement
        );
        return Ok(Outcome { json: to_json(&q), text, exit: 0 });
    }
    let out: PredictOutput = input.run()?;
    let text = format!(
        "setting {}\n{} = {:?}\nprediction {}\n{} ~ {}   [{}]\n",
        out.setting,
        out.growth_kind.letter(),
        out.growth,
        render_prediction(&out.prediction),
        out.object,
        out.char_ideal,
        "proven-shape"
    );
    Ok(Outcome { json: to_json(&out), text, exit: 0 })
}

fn structure_text(rep: &StructureReport) -> String {
    let mut s = format!("{}: {:?}\n", rep.kind, rep.verdict);
    if let Some(t) = &rep.elementary_type {
        let cyclo: Vec<String> = t.cyclo_multiplicities.iter().map(|(j, m)| format!("Φ_{j}^{m}")).collect();
        s += &format!(
            "type: Λ^{} ⊕ [{}] ; μ = {} ; residual λ = {} ; 𝔊 = 0: {}\n",
            t.free_rank,
            if cyclo.is_empty() { "-".to_string() } else { cyclo.join(" · ") },
            t.mu,
            t.residual_lambda,
            t.g_functor_vanishes.as_str()
        );
    }
    s += &format!("ranks: {:?}\ntorsion orders: {:?}\n", rep.evidence.ranks, rep.evidence.torsion_orders);
    for c in &rep.evidence.tech_checks {
        s += &format!(
            "  level {} {:<16} ranks {:?} expected {:?} {}\n",
            c.level,
            c.selector,
            c.component_ranks,
            c.expected,
            if c.ok { "ok" } else { "FAIL" }
        );
    }
    if let Some(r) = &rep.skipped {
        s += &format!("skipped: {r}\n");
    }
    if let Some(c) = &rep.counterexample {
        s += &format!("counterexample: {c}\n");
    }
    s
}

fn load_module(
    cfg: &mut SessionConfig,
    file: &Path,
    precision: Option<u32>,
    n_max: Option<u32>,
) -> Result<(iwasawa_core::presentation::ModulePresentation, u32), Error> {
    let m = io::read_presentation(file, precision)?;
    cfg.p = m.ring().prime();
    cfg.precision = m.ring().precision();
    let n_max = n_max.unwrap_or(cfg.n_max);
    cfg.n_max = n_max;
    cfg.validate()?;
    Ok((m, n_max))
}

fn cmd_classify(
    cfg: &mut SessionConfig,
    a: &ClassifyArgs,
    precision: Option<u32>,
    engine: Arc<dyn CoinvariantEngine>,
) -> Result<Outcome, Error> {
    let (m, n_max) = load_module(cfg, &a.file, precision, a.n_max)?;
    let rep = StructureAnalyzer::new(engine).classify_report(&m, n_max)?;
    Ok(Outcome { json: to_json(&rep), text: structure_text(&rep), exit: 0 })
}

fn cmd_verify(
    cfg: &mut SessionConfig,
    a: &VerifyArgs,
    precision: Option<u32>,
    engine: Arc<dyn CoinvariantEngine>,
) -> Result<Outcome, Error> {
    let (m, n_max) = load_module(cfg, &a.file, precision, a.n_max)?;
    let analyzer = StructureAnalyzer::new(engine);
    let rep = match a.check {
        Check::PropG0 => analyzer.verify_prop_g0(&m, n_max)?,
        Check::GeneratorChange => analyzer.generator_change_invariance(&m, a.unit, n_max)?,
        Check::Tech => {
            let registry = SelectorRegistry::builtin();
            let selectors = match &a.selectors {
                Some(names) => names.iter().map(|n| registry.get(n)).collect::<Result<Vec<_>, _>>()?,
                None => registry.all(),
            };
            let spec = TowerSpec { base: m, selectors, seed: a.seed.unwrap_or(cfg.seed) };
            analyzer.verify_tech_module(&spec, n_max)?
        }
    };
    let exit = if rep.verdict == Verdict::Fail { EXIT_FAILURES } else { 0 };
    Ok(Outcome { json: to_json(&rep), text: structure_text(&rep), exit })
}

fn oracle_text(s: &RoundTripSummary) -> String {
    let mut t = format!(
        "round-trip p={} n_max={} instances={} seed={} engine={}\npassed {}  failed {}  undetermined {}\n",
        s.config.p, s.config.n_max, s.config.instances, s.config.seed, s.engine, s.passed, s.failed, s.undetermined
    );
    if !s.failing_seeds.is_empty() {
        t += &format!("failing seeds: {:?}\n", s.failing_seeds);
    }
    t
}

fn cmd_oracle(cfg: &mut SessionConfig, a: &OracleArgs, engine: Arc<dyn CoinvariantEngine>) -> Result<Outcome, Error> {
    if let Some(p) = a.p {
        cfg.p = p;
    }
    if let Some(n) = a.n_max {
        cfg.n_max = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let mut rc = RoundTripConfig::new(cfg.p, cfg.n_max, a.instances, cfg.seed);
    rc.precision = cfg.precision;
    rc.obfuscation_steps = a.steps;
    rc.run_verifiers = !a.no_verifiers;
    let summary = roundtrip_suite_with(&StructureAnalyzer::new(engine), &rc);
    let exit = if summary.failed == 0 { 0 } else { EXIT_FAILURES };
    Ok(Outcome { json: to_json(&summary), text: oracle_text(&summary), exit })
}

#[derive(Serialize)]
struct MultisetReport {
    schema_version: String,
    kind: &'static str,
    level: u32,
    /// `(j, multiplicity)` of `Λ/Φ_j`.
    factors: Vec<(u32, u64)>,
    /// `Zp`-rank `Σ m_j·φ(p^j)`.
    total_rank: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    growth: Option<Vec<u64>>,
}

fn multiset_text(r: &MultisetReport) -> String {
    let f: Vec<String> = r.factors.iter().map(|(j, m)| format!("(Λ/Φ_{j})^{m}")).collect();
    format!(
        "{} level {}: {}\ntotal rank {}\n",
        r.kind,
        r.level,
        if f.is_empty() { "0".to_string() } else { f.join(" ⊕ ") },
        r.total_rank
    )
}

fn cmd_mw_tate(cfg: &mut SessionConfig, a: &MwTateArgs) -> Result<Outcome, Error> {
    let table = rank_table(cfg, &a.source, RankKind::Z)?;
    let seq = growth_sequence(&table, GrowthKind::E)?;
    let n = a.n.unwrap_or(seq.n_max());
    let factors = mw_tate_prediction(&seq, n)?;
    let rep = MultisetReport {
        schema_version: SCHEMA_VERSION.into(),
        kind: "mw_tate",
        level: n,
        total_rank: total_rank(table.p, &factors),
        factors,
        growth: Some(seq.values),
    };
    Ok(Outcome { json: to_json(&rep), text: multiset_text(&rep), exit: 0 })
}

fn cmd_local_mw(cfg: &mut SessionConfig, a: &LocalMwArgs) -> Result<Outcome, Error> {
    if let Some(p) = a.p {
        cfg.p = p;
    }
    cfg.validate()?;
    let factors = local_mw_prediction(a.g, a.d, a.n)?;
    let rep = MultisetReport {
        schema_version: SCHEMA_VERSION.into(),
        kind: "local_mw",
        level: a.n,
        total_rank: total_rank(cfg.p, &factors),
        factors,
        growth: None,
    };
    Ok(Outcome { json: to_json(&rep), text: multiset_text(&rep), exit: 0 })
}

fn cmd_bdp(a: &BdpArgs) -> Result<Outcome, Error> {
    #[derive(Serialize)]
    struct Row {
        level: usize,
        e: u64,
        bound: String,
        ceiling: u64,
    }
    #[derive(Serialize)]
    struct Report {
        schema_version: String,
        kind: &'static str,
        bounds: Vec<Row>,
        notes: Vec<&'static str>,
    }
    let bounds = a
        .e
        .iter()
        .enumerate()
        .map(|(level, &e)| {
            bdp_order_lower_bound(e).map(|b| Row { level, e, bound: b.rational(), ceiling: b.ceiling })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let text = bounds
        .iter()
        .map(|r| format!("level {}: e = {}  ord ≥ {}  (integer: {})\n", r.level, r.e, r.bound, r.ceiling))
        .collect();
    let rep = Report {
        schema_version: SCHEMA_VERSION.into(),
        kind: "bdp_bound",
        bounds,
        notes: vec!["the integer ceiling is a derived sharpening: an order of vanishing is an integer"],
    };
    Ok(Outcome { json: to_json(&rep), text, exit: 0 })
}

fn cmd_parity(cfg: &mut SessionConfig, a: &ParityArgs) -> Result<Outcome, Error> {
    let seq = match &a.f {
        Some(f) => {
            if let Some(p) = a.source.p {
                cfg.p = p;
            }
            cfg.validate()?;
            GrowthSequence::new(cfg.p, GrowthKind::F, f.clone())?
        }
        None => {
            let table = rank_table(cfg, &a.source, RankKind::O)?;
            growth_sequence(&table, GrowthKind::F)?
        }
    };
    let rep: ParityReport = anticyclotomic_parity_check(&seq);
    let text = format!(
        "f = {:?}\n{}{}{}\n",
        rep.growth,
        if rep.pass { "pass" } else { "fail" },
        if rep.degenerate { " (degenerate)" } else { "" },
        rep.parity.as_deref().map(|p| format!(", stalling levels {p}")).unwrap_or_default()
    );
    let exit = if rep.pass { 0 } else { EXIT_FAILURES };
    Ok(Outcome { json: to_json(&rep), text, exit })
}
