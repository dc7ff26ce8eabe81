//! Command-line front end: argument model, dispatch, and report rendering.
//!
//! Exit codes: 0 success, 1 identity check failed, 2 usage error,
//! 3 budget or search bound exhausted.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::PrimeBasis;
use crate::charsum::{self, BoundParams, RVariant};
use crate::error::Error;
use crate::pseudopower;
use crate::pseudosquare::{self, SearchOptions};
use crate::window::{random_windows, Budget, CountReport, Window};

/// Upper end of the range that seeded random windows are drawn from.
pub const RANDOM_WINDOW_RANGE: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "pseudo",
    version,
    about = "Pseudosquare and pseudopower experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub group: Group,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// x-pseudosquares
    #[command(subcommand)]
    Psq(PsqCmd),
    /// x-pseudopowers to base g
    #[command(subcommand)]
    Ppw(PpwCmd),
    /// Character sums and bounds
    #[command(subcommand)]
    Charsum(CharsumCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum PsqCmd {
    Search,
    Pigeonhole,
    Count,
    VerifyIdentity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum PpwCmd {
    Profile,
    Search,
    Count,
    VerifyIdentity,
    WeightedSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CharsumCmd {
    Rf,
    Sum,
    Bounds,
    ChooseR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Theorem1,
    Theorem3,
    #[value(name = "q_g")]
    QG,
    #[value(name = "p_g")]
    PG,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Threshold x (decimal; choose-r accepts arbitrarily large values)
    #[arg(long, global = true)]
    pub x: Option<String>,
    /// Base g, |g| >= 2
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub g: Option<i64>,
    /// Window start A of (A, A+N]
    #[arg(long, global = true)]
    pub from: Option<String>,
    /// Window length N of (A, A+N]
    #[arg(long, global = true)]
    pub len: Option<String>,
    #[arg(long, global = true, default_value_t = 10)]
    pub bins: u64,
    #[arg(long, global = true)]
    pub f: Option<u64>,
    #[arg(long, global = true)]
    pub q: Option<u64>,
    #[arg(long, global = true)]
    pub r: Option<u32>,
    #[arg(long, global = true, value_enum)]
    pub variant: Option<Variant>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Cap on modular-symbol evaluations per call
    #[arg(long, global = true, default_value_t = Budget::DEFAULT.0)]
    pub budget: u64,
    /// Seed for randomized windows
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest candidate examined by searches
    #[arg(long, global = true)]
    pub scan_limit: Option<u64>,
    /// Candidates per search segment
    #[arg(long, global = true, default_value_t = pseudosquare::DEFAULT_SEGMENT)]
    pub segment: u64,
    /// Number of seeded random windows when no window is given
    #[arg(long, global = true, default_value_t = 10)]
    pub windows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Psq(PsqCmd),
    Ppw(PpwCmd),
    Charsum(CharsumCmd),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Psq(PsqCmd::Search) => "psq search",
            Command::Psq(PsqCmd::Pigeonhole) => "psq pigeonhole",
            Command::Psq(PsqCmd::Count) => "psq count",
            Command::Psq(PsqCmd::VerifyIdentity) => "psq verify-identity",
            Command::Ppw(PpwCmd::Profile) => "ppw profile",
            Command::Ppw(PpwCmd::Search) => "ppw search",
            Command::Ppw(PpwCmd::Count) => "ppw count",
            Command::Ppw(PpwCmd::VerifyIdentity) => "ppw verify-identity",
            Command::Ppw(PpwCmd::WeightedSum) => "ppw weighted-sum",
            Command::Charsum(CharsumCmd::Rf) => "charsum rf",
            Command::Charsum(CharsumCmd::Sum) => "charsum sum",
            Command::Charsum(CharsumCmd::Bounds) => "charsum bounds",
            Command::Charsum(CharsumCmd::ChooseR) => "charsum choose-r",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub opts: Opts,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        let command = match cli.group {
            Group::Psq(c) => Command::Psq(c),
            Group::Ppw(c) => Command::Ppw(c),
            Group::Charsum(c) => Command::Charsum(c),
        };
        RunConfig {
            command,
            opts: cli.opts,
        }
    }
}

impl RunConfig {
    /// Parse from an argument vector (first element is the program name).
    pub fn parse_from<I, T>(args: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        Cli::try_parse_from(args).map(RunConfig::from)
    }

    /// Command-specific completeness of the flags.
    pub fn validate(&self) -> Result<(), CliError> {
        let o = &self.opts;
        let need = |ok: bool, flag: &str| {
            if ok {
                Ok(())
            } else {
                Err(CliError::Usage(format!(
                    "{} requires --{flag}",
                    self.command.name()
                )))
            }
        };
        match self.command {
            Command::Psq(_) => need(o.x.is_some(), "x")?,
            Command::Ppw(_) => {
                need(o.x.is_some(), "x")?;
                need(o.g.is_some(), "g")?;
            }
            Command::Charsum(CharsumCmd::Rf) => {
                need(o.x.is_some(), "x")?;
                need(o.f.is_some(), "f")?;
                need(o.len.is_some(), "len")?;
            }
            Command::Charsum(CharsumCmd::Sum) => {
                need(o.q.is_some() || o.x.is_some(), "q or --x")?;
                need(o.len.is_some(), "len")?;
            }
            Command::Charsum(CharsumCmd::Bounds) => {
                let pv = o.x.is_some() && o.f.is_some();
                let gr = o.q.is_some() && o.r.is_some() && o.len.is_some();
                need(pv || gr, "x with --f, or --q with --r and --len")?;
            }
            Command::Charsum(CharsumCmd::ChooseR) => need(o.x.is_some(), "x")?,
        }
        if o.from.is_some() && o.len.is_none() {
            return Err(CliError::Usage("--from requires --len".into()));
        }
        if o.bins == 0 {
            return Err(CliError::Usage("--bins must be positive".into()));
        }
        if let Some(v) = o.variant {
            let ok = match self.command {
                Command::Charsum(CharsumCmd::ChooseR) => {
                    matches!(v, Variant::Theorem1 | Variant::Theorem3)
                }
                Command::Ppw(_) => matches!(v, Variant::QG | Variant::PG),
                _ => false,
            };
            if !ok {
                return Err(CliError::Usage(format!(
                    "--variant {v:?} does not apply to {}",
                    self.command.name()
                )));
            }
        }
        Ok(())
    }

    fn x(&self) -> Result<u64, CliError> {
        let raw = self.opts.x.as_deref().unwrap_or_default();
        raw.parse().map_err(|_| {
            CliError::Usage(format!("--x must be a non-negative integer, got {raw:?}"))
        })
    }

    fn g(&self) -> i64 {
        self.opts.g.unwrap_or_default()
    }

    fn budget(&self) -> Budget {
        Budget(self.opts.budget)
    }

    fn explicit_window(&self) -> Result<Option<Window>, CliError> {
        let Some(len) = &self.opts.len else {
            return Ok(None);
        };
        let len: BigUint = parse_big(len, "len")?;
        let from: BigUint = match &self.opts.from {
            Some(a) => parse_big(a, "from")?,
            None => BigUint::ZERO,
        };
        Ok(Some(Window::new(from, len)))
    }
}

fn parse_big(raw: &str, flag: &str) -> Result<BigUint, CliError> {
    raw.parse().map_err(|_| {
        CliError::Usage(format!(
            "--{flag} must be a non-negative integer, got {raw:?}"
        ))
    })
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(Error::BudgetExceeded { .. } | Error::SearchExhausted { .. }) => 3,
            CliError::Compute(_) => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

impl IdentityCheck {
    fn new(name: impl Into<String>, lhs: impl ToString, rhs: impl ToString, pass: bool) -> Self {
        IdentityCheck {
            name: name.into(),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            pass,
        }
    }

    fn eq<T: PartialEq + ToString>(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        let pass = lhs == rhs;
        Self::new(name, lhs, rhs, pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub outputs: Value,
    pub identity_checks: Vec<IdentityCheck>,
    /// Model comparisons only; checks are informative.
    pub exploratory: bool,
    pub timing_ms: u64,
    #[serde(skip)]
    pub table: Option<Table>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.identity_checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.exploratory || self.all_pass() {
            0
        } else {
            1
        }
    }

    /// Canonical JSON: keys sorted at every level, big integers as strings.
    pub fn to_json(&self) -> String {
        canonical_json(&serde_json::to_value(self).expect("report serializes"))
    }

    pub fn to_csv(&self) -> String {
        let table = self
            .table
            .clone()
            .unwrap_or_else(|| flatten_outputs(&self.outputs));
        let mut out = String::new();
        let _ = writeln!(out, "{}", table.header.join(","));
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = self.to_json();
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv(),
        }
    }
}

/// Re-serialize through `Value`, whose maps are ordered by key.
pub fn canonical_json(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("value serializes")
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

fn flatten_outputs(v: &Value) -> Table {
    let rows = match v {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| {
                let cell = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                vec![k.clone(), cell]
            })
            .collect(),
        other => vec![vec!["value".into(), other.to_string()]],
    };
    Table {
        header: vec!["key".into(), "value".into()],
        rows,
    }
}

fn histogram_table(report: &CountReport) -> Table {
    Table {
        header: ["bin_start", "bin_end", "count", "model"]
            .map(String::from)
            .to_vec(),
        rows: report
            .histogram
            .iter()
            .map(|b| {
                vec![
                    b.start.to_string(),
                    b.end.to_string(),
                    b.count.to_string(),
                    b.model.to_string(),
                ]
            })
            .collect(),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("payload serializes")
}

struct Outcome {
    outputs: Value,
    checks: Vec<IdentityCheck>,
    exploratory: bool,
    table: Option<Table>,
}

impl Outcome {
    fn new(outputs: Value, checks: Vec<IdentityCheck>) -> Self {
        Outcome {
            outputs,
            checks,
            exploratory: false,
            table: None,
        }
    }
}

fn echo_inputs(config: &RunConfig) -> BTreeMap<String, Value> {
    let o = &config.opts;
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: Value| {
        if !v.is_null() {
            m.insert(k.to_string(), v);
        }
    };
    put("x", json!(o.x));
    put("g", json!(o.g));
    put("from", json!(o.from));
    put("len", json!(o.len));
    put("f", json!(o.f));
    put("q", json!(o.q));
    put("r", json!(o.r));
    put("variant", json!(o.variant));
    put("scan_limit", json!(o.scan_limit.map(|s| s.to_string())));
    put("bins", json!(o.bins));
    put("budget", json!(o.budget.to_string()));
    put("seed", json!(o.seed.to_string()));
    m
}

/// Run a validated configuration.
pub fn dispatch(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let started = Instant::now();
    let outcome = match config.command {
        Command::Psq(c) => run_psq(config, c)?,
        Command::Ppw(c) => run_ppw(config, c)?,
        Command::Charsum(c) => run_charsum(config, c)?,
    };
    Ok(Report {
        command: config.command.name().to_string(),
        inputs: echo_inputs(config),
        outputs: outcome.outputs,
        identity_checks: outcome.checks,
        exploratory: outcome.exploratory,
        timing_ms: started.elapsed().as_millis() as u64,
        table: outcome.table,
    })
}

fn count_outcome(report: &CountReport) -> Outcome {
    let binned: u64 = report.histogram.iter().map(|b| b.count).sum();
    let mut outputs = to_value(report);
    outputs["ratio_to_model"] = json!(report.ratio_to_model());
    Outcome {
        outputs,
        checks: vec![IdentityCheck::eq("bins_sum_to_count", binned, report.count)],
        exploratory: false,
        table: Some(histogram_table(report)),
    }
}

fn run_psq(config: &RunConfig, cmd: PsqCmd) -> Result<Outcome, CliError> {
    let x = config.x()?;
    let budget = config.budget();
    Ok(match cmd {
        PsqCmd::Search => {
            let opts = SearchOptions {
                search_bound: config.opts.scan_limit,
                segment: config.opts.segment,
            };
            let rec = pseudosquare::least_pseudosquare_with(x, opts)?;
            let checks = vec![IdentityCheck::eq(
                "is_pseudosquare",
                pseudosquare::is_pseudosquare(&rec.n, x),
                true,
            )];
            Outcome::new(to_value(&rec), checks)
        }
        PsqCmd::Pigeonhole => {
            let out = pseudosquare::pigeonhole_pseudosquare(x, config.opts.scan_limit)?;
            let (l1, l2) = out.factors;
            let checks = vec![
                IdentityCheck::eq(
                    "is_pseudosquare",
                    pseudosquare::is_pseudosquare(&out.record.n, x),
                    true,
                ),
                IdentityCheck::eq("factors_congruent_mod_8", l1 % 8, l2 % 8),
                IdentityCheck::eq(
                    "within_bound_consistent",
                    out.within_bound,
                    BigUint::from(l2) <= out.bound_x,
                ),
            ];
            Outcome::new(to_value(&out), checks)
        }
        PsqCmd::Count => {
            let window = config
                .explicit_window()?
                .unwrap_or_else(|| pseudosquare::period_window(x));
            let report = pseudosquare::count_pseudosquares(x, &window, config.opts.bins, budget)?;
            count_outcome(&report)
        }
        PsqCmd::VerifyIdentity => {
            let windows = match config.explicit_window()? {
                Some(w) => vec![w],
                None => random_windows(config.opts.seed, config.opts.windows, RANDOM_WINDOW_RANGE),
            };
            let mut checks = Vec::new();
            let mut rows = Vec::new();
            for (k, w) in windows.iter().enumerate() {
                let d = charsum::decompose(x, w, budget)?;
                checks.push(IdentityCheck::eq(
                    format!("squarecount[{k}]"),
                    d.s_an.sum.value,
                    d.s_an.identity_rhs,
                ));
                checks.push(IdentityCheck::eq(
                    format!("decomposition[{k}]"),
                    d.s_an.sum.value,
                    d.rhs(),
                ));
                for c in &d.contributions {
                    let pv = charsum::pv_bounds(x, c.modulus_f)?;
                    checks.push(IdentityCheck::new(
                        format!("pv_bound[{k}][f={}]", c.modulus_f),
                        c.value.abs(),
                        pv.rf_bound,
                        pv.admits_rf(c.value),
                    ));
                }
                rows.push(json!({
                    "window": w,
                    "s_an": d.s_an.sum.value.to_string(),
                    "count_sbar": d.s_an.count_sbar.to_string(),
                    "main_term": d.main.count.to_string(),
                    "r_f": d.contributions.iter()
                        .map(|c| (c.modulus_f.to_string(), Value::String(c.value.to_string())))
                        .collect::<serde_json::Map<_, _>>(),
                }));
            }
            let period = pseudosquare::period_window(x);
            let period_cost = period.n_len.to_u128().unwrap_or(u128::MAX) / 8
                * PrimeBasis::new(x).pi_x.max(1) as u128;
            let mut outputs = json!({ "windows": rows });
            if budget.charge(period_cost).is_ok() {
                let r = pseudosquare::count_pseudosquares(x, &period, 1, budget)?;
                let expect = pseudosquare::period_closure_count(x);
                checks.push(IdentityCheck::eq(
                    "period_count",
                    BigUint::from(r.closure_count),
                    expect.clone(),
                ));
                outputs["period_closure_count"] = json!(expect.to_string());
            }
            Outcome::new(outputs, checks)
        }
    })
}

fn run_ppw(config: &RunConfig, cmd: PpwCmd) -> Result<Outcome, CliError> {
    let x = config.x()?;
    let g = config.g();
    let budget = config.budget();
    Ok(match cmd {
        PpwCmd::Profile => {
            let p = pseudopower::power_profile(g, x)?;
            let mut checks: Vec<IdentityCheck> = p
                .rows
                .iter()
                .map(|r| IdentityCheck::eq(format!("l*i=p-1[p={}]", r.p), r.l * r.i, r.p - 1))
                .collect();
            checks.push(IdentityCheck::eq(
                "I*prod_l=phi(M_g)",
                &p.i_product * &p.l_product,
                p.totient(),
            ));
            let table = Table {
                header: ["p", "l", "i"].map(String::from).to_vec(),
                rows: p
                    .rows
                    .iter()
                    .map(|r| vec![r.p.to_string(), r.l.to_string(), r.i.to_string()])
                    .collect(),
            };
            let mut o = Outcome::new(to_value(&p), checks);
            o.table = Some(table);
            o
        }
        PpwCmd::Search => {
            let s = pseudopower::pseudopower_search(g, x)?;
            let big = |n: u64| BigUint::from(n);
            let mut checks = vec![IdentityCheck::new(
                "q_g<=|g|*p_g",
                s.q_g,
                g.unsigned_abs() as u128 * s.p_g as u128,
                s.relation_holds,
            )];
            checks.push(IdentityCheck::eq(
                "q_g_is_pseudopower",
                pseudopower::is_pseudopower(&big(s.q_g), g, x, false)?,
                true,
            ));
            checks.push(IdentityCheck::eq(
                "p_g_is_pseudopower_ignoring_g",
                pseudopower::is_pseudopower(&big(s.p_g), g, x, true)?,
                true,
            ));
            let mut outputs = json!({
                "q_g": s.q_g.to_string(),
                "p_g": s.p_g.to_string(),
                "relation_holds": s.relation_holds,
                "trivial_bound": pseudopower::trivial_bound(x).to_string(),
            });
            if let Some(v) = config.opts.variant {
                let chosen = if v == Variant::QG { s.q_g } else { s.p_g };
                outputs["selected"] = json!(chosen.to_string());
            }
            Outcome::new(outputs, checks)
        }
        PpwCmd::Count => {
            let window = config
                .explicit_window()?
                .unwrap_or_else(|| Window::initial(PrimeBasis::new(x).m_x));
            let report = pseudopower::count_pseudopowers(g, x, &window, config.opts.bins, budget)?;
            count_outcome(&report)
        }
        PpwCmd::VerifyIdentity => {
            let full = Window::initial(PrimeBasis::new(x).m_x);
            let window = config.explicit_window()?.unwrap_or_else(|| full.clone());
            let pan = pseudopower::p_an_identity(g, x, &window, budget)?;
            let tol = 1e-6 * pan.terms.max(1) as f64;
            let weight_f64 = pan.weight.to_f64().unwrap_or(f64::INFINITY);
            let mut checks = vec![IdentityCheck::new(
                "p_an=I*direct",
                pan.re,
                weight_f64 * pan.direct as f64,
                pan.deviation() <= tol,
            )];
            let profile = pseudopower::power_profile(g, x)?;
            checks.push(IdentityCheck::eq(
                "I*prod_l=phi(M_g)",
                &profile.i_product * &profile.l_product,
                profile.totient(),
            ));
            let mut outputs = json!({ "p_an": to_value(&pan) });
            if window == full {
                let period = pseudopower::exact_count_period(g, x)?;
                checks.push(IdentityCheck::eq(
                    "period_count",
                    period.count_pbar.clone(),
                    BigUint::from(pan.direct),
                ));
                outputs["period"] = to_value(&period);
            }
            Outcome::new(outputs, checks)
        }
        PpwCmd::WeightedSum => {
            let s = pseudopower::weighted_sum_sg(g, x)?;
            let checks = vec![
                IdentityCheck::new(
                    "s_g=I*sum_lambda",
                    s.re,
                    s.identity_rhs,
                    s.deviation() <= 1e-6,
                ),
                IdentityCheck::new("imaginary_part", s.im, 0.0, s.im.abs() <= 1e-6),
            ];
            Outcome::new(to_value(&s), checks)
        }
    })
}

fn run_charsum(config: &RunConfig, cmd: CharsumCmd) -> Result<Outcome, CliError> {
    let budget = config.budget();
    let o = &config.opts;
    Ok(match cmd {
        CharsumCmd::Rf => {
            let x = config.x()?;
            let f = o.f.unwrap_or_default();
            let window = config.explicit_window()?.expect("validated");
            let rec = charsum::r_f(x, f, &window, budget)?;
            let pv = charsum::pv_bounds(x, f)?;
            let checks = vec![IdentityCheck::new(
                "pv_bound",
                rec.value.abs(),
                pv.rf_bound,
                pv.admits_rf(rec.value),
            )];
            Outcome::new(to_value(&rec), checks)
        }
        CharsumCmd::Sum => {
            let window = config.explicit_window()?.expect("validated");
            if let Some(q) = o.q {
                let rec = charsum::char_sum(q, &window, budget)?;
                let generic = charsum::pv_bounds(0, q)?;
                let checks = vec![IdentityCheck::new(
                    "pv_bound",
                    rec.value.abs(),
                    generic.generic_bound,
                    generic.admits_single(rec.value),
                )];
                Outcome::new(to_value(&rec), checks)
            } else {
                let x = config.x()?;
                let r = charsum::s_an(x, &window, budget)?;
                let checks = vec![IdentityCheck::eq(
                    "squarecount",
                    r.sum.value,
                    r.identity_rhs,
                )];
                Outcome::new(to_value(&r), checks)
            }
        }
        CharsumCmd::Bounds => {
            let mut outputs = serde_json::Map::new();
            if let (Some(_), Some(f)) = (&o.x, o.f) {
                outputs.insert("pv".into(), to_value(&charsum::pv_bounds(config.x()?, f)?));
            }
            if let (Some(q), Some(r), Some(_)) = (o.q, o.r, &o.len) {
                let n_len = config.explicit_window()?.expect("len present").n_len;
                let params = BoundParams { q, n_len, r };
                let value = match charsum::gr_bound(&params) {
                    Ok(b) => to_value(&b),
                    Err(Error::Precondition(p)) => {
                        json!({ "precondition_failed": to_value(&p), "message": p.to_string() })
                    }
                    Err(e) => return Err(e.into()),
                };
                outputs.insert("graham_ringrose".into(), value);
            }
            Outcome::new(Value::Object(outputs), Vec::new())
        }
        CharsumCmd::ChooseR => {
            let raw = o.x.as_deref().unwrap_or_default();
            let x: BigUint = parse_big(raw, "x")?;
            let variant = match o.variant {
                Some(Variant::Theorem3) => RVariant::Theorem3,
                _ => RVariant::Theorem1,
            };
            let choice = charsum::choose_r_for_log(ln_big(&x), variant);
            let mut outputs = to_value(&choice);
            outputs["variant"] = to_value(&variant);
            Outcome::new(outputs, Vec::new())
        }
    })
}

/// Natural log of a big integer without overflowing `f64`.
fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}
