//! Command-line front end.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::analysis::enumerate::{discounted_correct, exact_probability, float_probability, ProbabilityResult};
use crate::analysis::{
    check_conditions, monte_carlo, scan_parameters, verify_herding_inclusion, AnalysisError, EventSpec, NumericMode,
    ScanGrid,
};
use crate::config::{bundled, bundled_names, ConfigError, OutputFormat, RunConfig};
use crate::decision::CongestionSpec;
use crate::equilibrium::{Game, TraceRow};
use crate::numeric::{format_rational, parse_rational, to_f64, Rational};
use crate::signal_model::{constraint_checks, parse_history, ConstraintKind, SignalModel};

#[derive(Debug, Parser)]
#[command(name = "herdsim", version, about = "Exact analysis of sequential social learning with congestion")]
pub struct Cli {
    /// Override the configured horizon.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Arithmetic: exact rationals or double precision.
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<NumericMode>,
    #[arg(long, global = true, value_parser = parse_format)]
    pub format: Option<OutputFormat>,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Config file, or `bundled:NAME` for a shipped config.
    pub config: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every parameter constraint.
    Validate(ConfigArg),
    /// Print the LLR constants.
    Constants(ConfigArg),
    /// Trace beliefs and strategies along an action history.
    Trace {
        #[command(flatten)]
        config: ConfigArg,
        /// Actions such as `LRR`.
        #[arg(long, default_value = "")]
        history: String,
    },
    /// Evaluate the closed-form herding conditions.
    Check(ConfigArg),
    /// Exact probability of an event by enumeration.
    Exact {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        event: String,
        #[arg(long)]
        condition: Option<String>,
    },
    /// Monte Carlo estimate of an event probability.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        event: String,
        #[arg(long, default_value_t = 100_000)]
        runs: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Search a parameter grid for cells satisfying a condition set.
    Scan {
        #[arg(long)]
        grid: PathBuf,
        /// Directory to write one config per satisfying cell.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Discounted probability of correct actions, with and without cost.
    Discounted {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value = "9/10")]
        delta: String,
    },
    /// Compare herd histories at zero and at the configured cost.
    Inclusion(ConfigArg),
    /// Rerun a shipped example and compare with published values.
    Reproduce { name: String },
}

fn parse_mode(s: &str) -> Result<NumericMode, String> {
    match s {
        "exact" => Ok(NumericMode::Exact),
        "float" => Ok(NumericMode::Float),
        _ => Err(format!("`{s}`: expected exact or float")),
    }
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "text" => Ok(OutputFormat::Text),
        "json" => Ok(OutputFormat::Json),
        "csv" => Ok(OutputFormat::Csv),
        _ => Err(format!("`{s}`: expected text, json or csv")),
    }
}

/// Result of a subcommand: rendered output and exit status.
pub struct Outcome {
    pub output: String,
    pub code: i32,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

struct Ctx {
    config: RunConfig,
    model: SignalModel,
    spec: CongestionSpec,
    horizon: usize,
    mode: NumericMode,
    format: OutputFormat,
}

fn load_config(arg: &str) -> Result<RunConfig, CliError> {
    if let Some(name) = arg.strip_prefix("bundled:") {
        return bundled(name).ok_or_else(|| {
            CliError::Usage(format!("unknown bundled config `{name}`; available: {}", bundled_names().join(", ")))
        });
    }
    Ok(RunConfig::load(std::path::Path::new(arg))?)
}

impl Cli {
    fn context(&self, config: RunConfig) -> Result<Ctx, CliError> {
        let model = config.model()?;
        let spec = config.spec()?;
        Ok(Ctx {
            horizon: self.horizon.unwrap_or_else(|| config.horizon()),
            mode: self.mode.unwrap_or(config.run.numeric),
            format: self.format.unwrap_or(config.run.format),
            config,
            model,
            spec,
        })
    }

    fn format_or_default(&self) -> OutputFormat {
        self.format.unwrap_or_default()
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &outcome.output) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 1;
                }
            } else {
                print!("{}", outcome.output);
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Validate(c) => validate(cli, &c.config),
        Command::Constants(c) => constants(&cli.context(load_config(&c.config)?)?),
        Command::Trace { config, history } => trace(&cli.context(load_config(&config.config)?)?, history),
        Command::Check(c) => check(&cli.context(load_config(&c.config)?)?),
        Command::Exact { config, event, condition } => {
            exact(&cli.context(load_config(&config.config)?)?, event, condition.as_deref())
        }
        Command::Simulate { config, event, runs, seed } => {
            simulate(&cli.context(load_config(&config.config)?)?, event, *runs, *seed)
        }
        Command::Scan { grid, emit } => scan(cli, grid, emit.as_ref()),
        Command::Discounted { config, delta } => discounted(&cli.context(load_config(&config.config)?)?, delta),
        Command::Inclusion(c) => inclusion(&cli.context(load_config(&c.config)?)?),
        Command::Reproduce { name } => reproduce(cli, name),
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[derive(Serialize)]
struct CheckLine {
    name: String,
    kind: &'static str,
    holds: bool,
}

fn validate(cli: &Cli, arg: &str) -> Result<Outcome, CliError> {
    let config = load_config(arg)?;
    let mut lines: Vec<CheckLine> = constraint_checks(&config.model)
        .map_err(ConfigError::from)?
        .into_iter()
        .map(|c| CheckLine {
            name: c.name,
            kind: match c.kind {
                ConstraintKind::Structural => "structural",
                ConstraintKind::Assumption => "assumption",
            },
            holds: c.holds,
        })
        .collect();
    let model_ok = SignalModel::new(config.model.clone());
    if let Ok(m) = &model_ok {
        for (name, holds) in m.constants().ordering_checks() {
            lines.push(CheckLine { name, kind: "ordering", holds });
        }
    }
    let congestion = config.spec();
    lines.push(CheckLine {
        name: match &congestion {
            Ok(_) => "congestion spec".into(),
            Err(e) => format!("congestion spec: {e}"),
        },
        kind: "structural",
        holds: congestion.is_ok(),
    });
    let failed = lines.iter().any(|l| !l.holds && l.kind != "assumption");
    let output = match cli.format_or_default() {
        OutputFormat::Json => json(&lines),
        OutputFormat::Csv => csv_rows(&lines)?,
        OutputFormat::Text => {
            let mut s = String::new();
            for l in &lines {
                let _ = writeln!(s, "{}  {:<11} {}", if l.holds { "PASS" } else { "FAIL" }, l.kind, l.name);
            }
            let _ = writeln!(s, "{}", if failed { "invalid" } else { "valid" });
            s
        }
    };
    Ok(Outcome { output, code: failed as i32 })
}

fn constants(ctx: &Ctx) -> Result<Outcome, CliError> {
    #[derive(Serialize)]
    struct Row {
        constant: String,
        odds: String,
        llr: f64,
    }
    let rows: Vec<Row> = ctx
        .model
        .constants()
        .render_table()
        .into_iter()
        .map(|(constant, odds, llr)| Row { constant, odds, llr })
        .collect();
    let output = match ctx.format {
        OutputFormat::Json => json(&rows),
        OutputFormat::Csv => csv_rows(&rows)?,
        OutputFormat::Text => rows.iter().fold(String::new(), |mut s, r| {
            let _ = writeln!(s, "{:<6} {:>+.12}  = ln({})", r.constant, r.llr, r.odds);
            s
        }),
    };
    Ok(Outcome { output, code: 0 })
}

#[derive(Serialize)]
struct SymbolicRow {
    #[serde(flatten)]
    row: TraceRow,
    /// Public LLR as a sum of named constants, when each step is one.
    symbolic: Option<String>,
}

fn render_terms(terms: &[(String, i64)]) -> String {
    let mut out = String::new();
    for (sym, c) in terms.iter().filter(|(_, c)| *c != 0) {
        let sign = if *c < 0 { "-" } else { "+" };
        let mag = if c.abs() == 1 { String::new() } else { c.abs().to_string() };
        if out.is_empty() {
            out = format!("{}{mag}{sym}", if *c < 0 { "-" } else { "" });
        } else {
            let _ = write!(out, " {sign} {mag}{sym}");
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

fn symbolic_rows(model: &SignalModel, rows: Vec<TraceRow>) -> Vec<SymbolicRow> {
    let constants = model.constants();
    let mut terms = Some(vec![(String::from("l0"), 1i64)]);
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let current = terms.as_deref().map(render_terms);
        if let Some(a) = row.observed {
            let inc = if a == 'L' { &row.increment_odds_l } else { &row.increment_odds_r };
            let step = parse_rational(inc).ok().and_then(|o| constants.identify(&o));
            terms = match (terms, step) {
                (Some(t), Some(s)) if s == "0" => Some(t),
                (Some(mut t), Some(s)) => {
                    let (sign, sym) = s.split_at(1);
                    let d = if sign == "-" { -1 } else { 1 };
                    match t.iter_mut().find(|(n, _)| n == sym) {
                        Some(e) => e.1 += d,
                        None => t.push((sym.to_string(), d)),
                    }
                    Some(t)
                }
                _ => None,
            };
        }
        out.push(SymbolicRow { row, symbolic: current });
    }
    out
}

fn trace(ctx: &Ctx, history: &str) -> Result<Outcome, CliError> {
    let h = parse_history(history).map_err(|c| CliError::Usage(format!("invalid action `{c}` in history")))?;
    if h.len() >= ctx.horizon {
        return Err(CliError::Usage(format!(
            "history of length {} needs a horizon above {} (got {})",
            h.len(),
            h.len(),
            ctx.horizon
        )));
    }
    let rows = match ctx.mode {
        NumericMode::Exact => Game::<Rational>::new(&ctx.model, &ctx.spec, ctx.config.run.tiebreak).trace(&h),
        NumericMode::Float => Game::<f64>::new(&ctx.model, &ctx.spec, ctx.config.run.tiebreak).trace(&h),
    };
    let rows = symbolic_rows(&ctx.model, rows);
    let output = match ctx.format {
        OutputFormat::Json => json(&rows),
        OutputFormat::Csv => {
            let plain: Vec<&TraceRow> = rows.iter().map(|r| &r.row).collect();
            csv_rows(&plain)?
        }
        OutputFormat::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{:>3} {:<10} {:>12} {:<8} {:<7} {:>10} {:>10} {:<4} {:<4} {:<4} public llr",
                "i", "history", "llr", "f", "strat", "inc(L)", "inc(R)", "inf", "herd", "obs"
            );
            for r in &rows {
                let t = &r.row;
                let path = if t.state_on_path { "" } else { " (off-path)" };
                let _ = writeln!(
                    s,
                    "{:>3} {:<10} {:>+12.6} {:<8} {:<7} {:>+10.4} {:>+10.4} {:<4} {:<4} {:<4} {}{path}",
                    t.period,
                    if t.history.is_empty() { "-" } else { &t.history },
                    t.public_llr,
                    t.fraction,
                    t.strategy,
                    t.increment_llr_l,
                    t.increment_llr_r,
                    if t.informative { "yes" } else { "no" },
                    if t.herd { "yes" } else { "no" },
                    t.observed.map(String::from).unwrap_or_else(|| "-".into()),
                    r.symbolic.as_deref().unwrap_or("?"),
                );
            }
            s
        }
    };
    Ok(Outcome { output, code: 0 })
}

fn check(ctx: &Ctx) -> Result<Outcome, CliError> {
    let report = check_conditions(&ctx.model, ctx.spec.k(), ctx.horizon, ctx.mode)?;
    let failed = !report.all_hypotheses_hold() || !report.internal_errors().is_empty();
    let output = match ctx.format {
        OutputFormat::Json => json(&report),
        OutputFormat::Csv => {
            let entries: Vec<_> = report.groups.iter().flat_map(|g| g.entries.iter()).collect();
            csv_rows(&entries)?
        }
        OutputFormat::Text => report.render_text(),
    };
    Ok(Outcome { output, code: failed as i32 })
}

fn parse_event(s: &str) -> Result<EventSpec, CliError> {
    s.parse().map_err(CliError::Usage)
}

fn probability(ctx: &Ctx, spec: &CongestionSpec, event: &EventSpec, cond: Option<&EventSpec>) -> Result<ProbabilityResult, CliError> {
    let tb = ctx.config.run.tiebreak;
    Ok(match ctx.mode {
        NumericMode::Exact => exact_probability(&Game::new(&ctx.model, spec, tb), ctx.horizon, event, cond)?,
        NumericMode::Float => float_probability(&Game::new(&ctx.model, spec, tb), ctx.horizon, event, cond)?,
    })
}

fn render_probability(p: &ProbabilityResult) -> String {
    let label = match &p.conditioned_on {
        Some(c) => format!("P({} | {c})", p.event),
        None => format!("P({})", p.event),
    };
    match &p.exact {
        Some(e) => format!("{label} = {} ≈ {:.6}\n", format_rational(e), p.float),
        None => format!("{label} ≈ {:.15}\n", p.float),
    }
}

fn exact(ctx: &Ctx, event: &str, condition: Option<&str>) -> Result<Outcome, CliError> {
    let e = parse_event(event)?;
    let c = condition.map(parse_event).transpose()?;
    let p = probability(ctx, &ctx.spec, &e, c.as_ref())?;
    let output = match ctx.format {
        OutputFormat::Json => json(&p),
        OutputFormat::Csv => csv_rows(&[CsvProbability::from(&p)])?,
        OutputFormat::Text => render_probability(&p),
    };
    Ok(Outcome { output, code: 0 })
}

#[derive(Serialize)]
struct CsvProbability {
    event: String,
    condition: String,
    exact: String,
    float: f64,
}

impl From<&ProbabilityResult> for CsvProbability {
    fn from(p: &ProbabilityResult) -> Self {
        CsvProbability {
            event: p.event.to_string(),
            condition: p.conditioned_on.as_ref().map(|c| c.to_string()).unwrap_or_default(),
            exact: p.exact.as_ref().map(format_rational).unwrap_or_default(),
            float: p.float,
        }
    }
}

fn simulate(ctx: &Ctx, event: &str, runs: u64, seed: Option<u64>) -> Result<Outcome, CliError> {
    let e = parse_event(event)?;
    let seed = seed.unwrap_or(ctx.config.run.seed);
    let tb = ctx.config.run.tiebreak;
    let r = match ctx.mode {
        NumericMode::Exact => monte_carlo(&Game::<Rational>::new(&ctx.model, &ctx.spec, tb), ctx.horizon, &e, runs, seed)?,
        NumericMode::Float => monte_carlo(&Game::<f64>::new(&ctx.model, &ctx.spec, tb), ctx.horizon, &e, runs, seed)?,
    };
    let output = match ctx.format {
        OutputFormat::Json => json(&r),
        OutputFormat::Csv => csv_rows(&[&r])?,
        OutputFormat::Text => format!(
            "P({}) ≈ {:.6} ± {:.6} (95% CI [{:.6}, {:.6}], {} of {} runs, seed {})\n",
            r.event, r.frequency, r.std_error, r.ci_low, r.ci_high, r.hits, r.runs, r.seed
        ),
    };
    Ok(Outcome { output, code: 0 })
}

fn scan(cli: &Cli, grid: &PathBuf, emit: Option<&PathBuf>) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(grid).map_err(|e| CliError::Io(format!("cannot read {}: {e}", grid.display())))?;
    let mut g = ScanGrid::from_toml_str(&text)?;
    if let Some(h) = cli.horizon {
        g.horizon = h;
    }
    let report = scan_parameters(&g)?;
    if let Some(dir) = emit {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(e.to_string()))?;
        for (i, cell) in report.satisfying.iter().enumerate() {
            let path = dir.join(format!("cell-{i:04}.toml"));
            std::fs::write(&path, &cell.config).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
    }
    let output = match cli.format_or_default() {
        OutputFormat::Json => json(&report),
        OutputFormat::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                index: usize,
                k: &'a str,
                config: &'a str,
            }
            let rows: Vec<Row> = report
                .satisfying
                .iter()
                .enumerate()
                .map(|(index, c)| Row { index, k: &c.k, config: &c.config })
                .collect();
            csv_rows(&rows)?
        }
        OutputFormat::Text => {
            let mut s = format!(
                "target {:?}: {} cells, {} invalid, {} evaluated, {} satisfying\n",
                report.target,
                report.cells,
                report.invalid,
                report.evaluated,
                report.satisfying.len()
            );
            for (i, c) in report.satisfying.iter().enumerate() {
                let _ = writeln!(s, "# cell {i}\n{}", c.config);
            }
            s
        }
    };
    Ok(Outcome { output, code: 0 })
}

fn discounted(ctx: &Ctx, delta: &str) -> Result<Outcome, CliError> {
    let d = parse_rational(delta).map_err(|e| CliError::Usage(format!("delta: {e}")))?;
    let zero = ctx.spec.with_cost(Rational::zero()).map_err(ConfigError::from)?;
    let tb = ctx.config.run.tiebreak;
    let run = |spec: &CongestionSpec| -> Result<_, CliError> {
        Ok(match ctx.mode {
            NumericMode::Exact => discounted_correct(&Game::<Rational>::new(&ctx.model, spec, tb), ctx.horizon, &d)?,
            NumericMode::Float => discounted_correct(&Game::<f64>::new(&ctx.model, spec, tb), ctx.horizon, &d)?,
        })
    };
    #[derive(Serialize)]
    struct Pair {
        k0: crate::analysis::enumerate::DiscountedResult,
        kpos: crate::analysis::enumerate::DiscountedResult,
        k: String,
    }
    let pair = Pair { k0: run(&zero)?, kpos: run(&ctx.spec)?, k: format_rational(ctx.spec.k()) };
    let output = match ctx.format {
        OutputFormat::Json => json(&pair),
        OutputFormat::Csv => {
            #[derive(Serialize)]
            struct Row {
                k: String,
                delta: String,
                horizon: usize,
                value: String,
                float: f64,
            }
            let row = |k: String, r: &crate::analysis::enumerate::DiscountedResult| Row {
                k,
                delta: r.delta.clone(),
                horizon: r.horizon,
                value: r.value.clone(),
                float: r.float,
            };
            csv_rows(&[row("0".into(), &pair.k0), row(pair.k.clone(), &pair.kpos)])?
        }
        OutputFormat::Text => format!(
            "discounted correct (delta = {}, horizon {}):\n  k = 0      {:.9}\n  k = {:<6} {:.9}\n",
            pair.k0.delta, pair.k0.horizon, pair.k0.float, pair.k, pair.kpos.float
        ),
    };
    Ok(Outcome { output, code: 0 })
}

fn inclusion(ctx: &Ctx) -> Result<Outcome, CliError> {
    let r = verify_herding_inclusion(&ctx.model, &ctx.spec, ctx.horizon, ctx.config.run.tiebreak)?;
    let output = match ctx.format {
        OutputFormat::Json => json(&r),
        OutputFormat::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                player: usize,
                histories: usize,
                herd_k0: usize,
                herd_kpos: usize,
                counterexamples: usize,
                herd_probability_k0: &'a str,
                herd_probability_kpos: &'a str,
                difference_mass: f64,
            }
            let rows: Vec<Row> = r
                .players
                .iter()
                .map(|p| Row {
                    player: p.player,
                    histories: p.histories,
                    herd_k0: p.herd_histories_k0,
                    herd_kpos: p.herd_histories_kpos,
                    counterexamples: p.counterexamples.len(),
                    herd_probability_k0: &p.herd_probability_k0,
                    herd_probability_kpos: &p.herd_probability_kpos,
                    difference_mass: p.difference_mass_float,
                })
                .collect();
            csv_rows(&rows)?
        }
        OutputFormat::Text => {
            let mut s = format!(
                "k = {}, horizon {}, sufficient conditions {}\n",
                r.k,
                r.horizon,
                if r.hypotheses_met { "met" } else { "unmet" }
            );
            for p in &r.players {
                let _ = writeln!(
                    s,
                    "player {}: {} histories, herd at k=0: {}, at k>0: {}, difference mass {:.6}, counterexamples: {}",
                    p.player,
                    p.histories,
                    p.herd_histories_k0,
                    p.herd_histories_kpos,
                    p.difference_mass_float,
                    if p.counterexamples.is_empty() { "none".to_string() } else { p.counterexamples.join(" ") }
                );
            }
            s
        }
    };
    Ok(Outcome { output, code: (!r.holds()) as i32 })
}

/// One published number against its recomputation.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub published: String,
    pub published_value: f64,
    pub computed: String,
    pub computed_value: f64,
    pub diff: f64,
    pub tolerance: f64,
    pub ok: bool,
}

fn compare(quantity: &str, published: &str, published_value: f64, computed: &Rational, tolerance: f64) -> Comparison {
    let v = to_f64(computed);
    let diff = (v - published_value).abs();
    Comparison {
        quantity: quantity.into(),
        published: published.into(),
        published_value,
        computed: format_rational(computed),
        computed_value: v,
        diff,
        tolerance,
        ok: diff <= tolerance,
    }
}

fn exact_match(quantity: &str, published: &str, expected: &Rational, computed: &Rational) -> Comparison {
    let mut c = compare(quantity, published, to_f64(expected), computed, 0.0);
    c.ok = expected == computed;
    c
}

/// Recomputes the published numbers for a shipped config.
pub fn reproduction(name: &str) -> Result<Vec<Comparison>, CliError> {
    let config = bundled(name).ok_or_else(|| {
        CliError::Usage(format!("unknown example `{name}`; available: {}", bundled_names().join(", ")))
    })?;
    let model = config.model()?;
    let spec = config.spec()?;
    let zero = spec.with_cost(Rational::zero()).map_err(ConfigError::from)?;
    let tb = config.run.tiebreak;
    let horizon = config.horizon();
    let p = |s: &CongestionSpec, e: EventSpec| -> Result<Rational, CliError> {
        Ok(crate::analysis::enumerate::probability(&Game::new(&model, s, tb), horizon, &e, None)?)
    };
    let params = &config.model;
    let one = Rational::one();
    let mut out = Vec::new();
    match name {
        "example1a" | "example1b" | "herd-witness" => {
            let published = name != "herd-witness";
            let s = &params.strong_hit + &params.second_hit;
            let closed = &s * &s + (&one - &s) * (&one - &s);
            let herd = p(&spec, EventSpec::HerdStartedBy(3))?;
            let herd0 = p(&zero, EventSpec::HerdStartedBy(3))?;
            out.push(exact_match("P(player 3 herds), k = 0", "0", &Rational::zero(), &herd0));
            out.push(exact_match("P(player 3 herds), k > 0", "(Q+q)^2+(1-Q-q)^2", &closed, &herd));
            if published {
                out.push(compare("P(player 3 herds), k > 0, rounded", "0.98", 0.98, &herd, 0.005));
            }
        }
        "appendix" => {
            let q_big = &params.strong_hit;
            let q = &params.second_hit;
            let eta = params.weak_hit.as_ref().expect("six-signal config");
            let ps = params.medium_mass.as_ref().expect("six-signal config");
            let psig = params.weak_mass.as_ref().expect("six-signal config");
            let top = q_big + q + eta;
            let closed0 = &top * (psig + q + q_big) + (&one - &top) * (&one - q - q_big);
            let closed1 = &top * (psig + ps + q_big) + (&one - &top) * (&one - q_big);
            let m0 = p(&zero, EventSpec::MatchesPredecessor(2))?;
            let m1 = p(&spec, EventSpec::MatchesPredecessor(2))?;
            out.push(exact_match("P(a2 = a1), k = 0, closed form", "(Q+q+η)(pσ+q+Q)+(1-Q-q-η)(1-q-Q)", &closed0, &m0));
            out.push(exact_match("P(a2 = a1), k > 0, closed form", "(Q+q+η)(pσ+ps+Q)+(1-Q-q-η)(1-Q)", &closed1, &m1));
            out.push(compare("P(a2 = a1), k = 0", "0.92", 0.92, &m0, 0.01));
            out.push(compare("P(a2 = a1), k > 0", "0.94", 0.94, &m1, 0.01));
            let i0 = p(&zero, EventSpec::ActionInformative(3))?;
            let i1 = p(&spec, EventSpec::ActionInformative(3))?;
            out.push(compare("P(player 3 informative), k = 0", "0.08", 0.08, &i0, 0.01));
            out.push(exact_match("P(player 3 informative), k > 0", "1", &one, &i1));
        }
        _ => unreachable!("bundled names are covered"),
    }
    Ok(out)
}

fn reproduce(cli: &Cli, name: &str) -> Result<Outcome, CliError> {
    let rows = reproduction(name)?;
    let failed = rows.iter().any(|r| !r.ok);
    let output = match cli.format_or_default() {
        OutputFormat::Json => json(&rows),
        OutputFormat::Csv => csv_rows(&rows)?,
        OutputFormat::Text => {
            let mut s = format!("{name}\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "  {}  {:<38} published {:<10} computed {:.6} ({})  |diff| {:.2e}",
                    if r.ok { "ok  " } else { "DIFF" },
                    r.quantity,
                    if r.published.len() > 10 { format!("{:.6}", r.published_value) } else { r.published.clone() },
                    r.computed_value,
                    r.computed,
                    r.diff
                );
            }
            s
        }
    };
    Ok(Outcome { output, code: failed as i32 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<Outcome, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("herdsim").chain(args.iter().copied())).unwrap();
        execute(&cli)
    }

    #[test]
    fn validate_bundled() {
        let o = run(&["validate", "bundled:example1a"]).unwrap();
        assert_eq!(o.code, 0);
        assert!(o.output.contains("valid"));
    }

    #[test]
    fn unknown_bundled_name_is_usage_error() {
        let e = run(&["validate", "bundled:nope"]).err().unwrap();
        assert_eq!(e.exit_code(), 2);
        let e = run(&["reproduce", "nope"]).err().unwrap();
        assert!(e.to_string().contains("example1a"));
    }

    #[test]
    fn trace_rejects_bad_history() {
        assert_eq!(run(&["trace", "bundled:example1a", "--history", "LX"]).err().unwrap().exit_code(), 2);
    }

    #[test]
    fn trace_empty_history_starts_at_prior() {
        let o = run(&["--format", "json", "trace", "bundled:example1a"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&o.output).unwrap();
        assert_eq!(v[0]["public_llr"], 0.0);
        assert_eq!(v[0]["symbolic"], "l0");
    }

    #[test]
    fn symbolic_terms_collapse() {
        let t = vec![("l0".to_string(), 1), ("lQq".to_string(), 2), ("lQ".to_string(), -1)];
        assert_eq!(render_terms(&t), "l0 + 2lQq - lQ");
        assert_eq!(render_terms(&[("l0".to_string(), 0)]), "0");
    }

    #[test]
    fn exact_prints_fraction() {
        let o = run(&["exact", "bundled:herd-witness", "--event", "herd-by:3"]).unwrap();
        assert!(o.output.contains("16553/32768"), "{}", o.output);
    }
}
