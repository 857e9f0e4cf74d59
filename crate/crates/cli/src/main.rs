//! `kashaev`: command-line front end for the Kashaev invariant laboratory.
//!
//! Subcommands evaluate invariants, build and fit log-ratio sequences,
//! solve for stationary points of the potentials, and run the full
//! verification against the reference table. Every subcommand accepts
//! `--json`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or evaluation
//! error, 3 no admissible stationary point.

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kashaev_core::analysis::{
    build_sequence_records, fit_sequence, read_sequence_csv, write_sequence_csv, BackendChoice, FitReport,
    AUTO_ERROR_TARGET,
};
use kashaev_core::backend::{cabs, to_c64, Real};
use kashaev_core::potentials::PotentialPoint;
use kashaev_core::qarith::make_context;
use kashaev_core::reference::{published_sequence, reference_table, ReferenceTable};
use kashaev_core::saddle::{solve_saddle, verify_observation, ObservationCheck, SaddleOptions, SaddleResult};
use kashaev_core::statesum::{evaluate_cached, oracle_unit, Budgets, Cache, Formula, CACHE_ENV_VAR};
use kashaev_core::tangle::{builtin_diagram, evaluate_tangle, TangleDiagram};
use kashaev_core::verify::{reference_seeds, verify_all, VerifyConfig};
use kashaev_core::{Error, LinkId};
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "kashaev", version, about = "Kashaev invariants, potentials and sequence fits")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Arithmetic backend.
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Auto)]
    backend: BackendArg,
    /// Working precision of the extended backend, in bits.
    #[arg(long, global = true, value_name = "BITS")]
    precision_bits: Option<u32>,
    /// Value cache directory (overrides the KASHAEV_CACHE_DIR variable);
    /// nothing is written unless the directory exists.
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Worker threads (default: available parallelism; 1 is fully sequential).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cost budget for tangle contraction (operations).
    #[arg(long, global = true)]
    cost_budget: Option<f64>,
    /// Reference table to use instead of the shipped one.
    #[arg(long, global = true, value_name = "FILE")]
    reference: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Auto,
    Double,
    Extended,
}

impl From<BackendArg> for BackendChoice {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Auto => BackendChoice::Auto,
            BackendArg::Double => BackendChoice::Double,
            BackendArg::Extended => BackendChoice::Extended,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate J_N(L) at q = exp(2πi/N).
    Invariant {
        /// Link name (4_1, 5_2, 6_1, 6_3, 8_9, 8_20, whitehead).
        link: String,
        /// Color N.
        #[arg(long)]
        n: usize,
        /// Also contract the built-in tangle diagram and compare.
        #[arg(long)]
        oracle: bool,
        /// Contract this diagram file instead of using a closed form.
        #[arg(long, value_name = "FILE")]
        diagram: Option<PathBuf>,
        /// Evaluation formula (default: the link's closed form).
        #[arg(long)]
        formula: Option<String>,
    },
    /// Emit the sequence 2π·Log(J_{N+1}/J_N) as CSV (N,re,im).
    Sequence {
        /// Link name.
        link: String,
        /// First N.
        #[arg(long, requires = "to")]
        from: Option<usize>,
        /// Last N (inclusive).
        #[arg(long, requires = "from")]
        to: Option<usize>,
        /// Step between N.
        #[arg(long, default_value_t = 1)]
        step: usize,
        /// Explicit list of N (comma separated).
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to"])]
        ns: Option<Vec<usize>>,
    },
    /// Locate the geometric stationary point of a link's potential.
    Saddle {
        /// Link name (6_3, 8_9, 8_20, whitehead).
        link: String,
        /// JSON array of starting points replacing the default seeds; a
        /// point is a list of `{"Finite": [re, im]}` or `"Infinity"`.
        #[arg(long, value_name = "FILE")]
        seeds: Option<PathBuf>,
    },
    /// Fit a + b/N + c/N² to a sequence and compare with the reference.
    Fit {
        /// Link name (computes the sequence unless --csv is given).
        link: Option<String>,
        /// Colors to compute (default: the tabulated ones).
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
        /// Read the sequence from a CSV file (N,re,im).
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        /// Polynomial degree in 1/N.
        #[arg(long, default_value_t = 2)]
        degree: usize,
    },
    /// Run every saddle and fit check; exit 0 iff all pass.
    VerifyAll,
}

/// Settings shared by the subcommands.
struct Ctx {
    json: bool,
    backend: BackendChoice,
    budgets: Budgets,
    cache: Option<Cache>,
    reference: ReferenceTable,
}

fn parse_link(s: &str) -> anyhow::Result<LinkId> {
    Ok(s.parse::<LinkId>()?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::SaddleNotFound { .. }) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let g = cli.global;
    if let Some(t) = g.threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring the thread pool")?;
    }
    if let Some(bits) = g.precision_bits {
        if !(64..=65536).contains(&bits) {
            bail!("--precision-bits must be between 64 and 65536");
        }
        #[cfg(feature = "extended")]
        kashaev_core::backend::set_extended_precision(bits);
    }
    let mut budgets = Budgets::default();
    if let Some(c) = g.cost_budget {
        if !(c > 0.0) {
            bail!("--cost-budget must be positive");
        }
        budgets.tangle_cost = c;
    }
    let cache = match g.cache_dir {
        Some(dir) => Some(Cache::new(dir)),
        None => Cache::from_env(),
    };
    let reference = match &g.reference {
        Some(p) => ReferenceTable::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => reference_table().clone(),
    };
    let ctx = Ctx { json: g.json, backend: g.backend.into(), budgets, cache, reference };
    log::debug!("cache: {:?} ({CACHE_ENV_VAR})", ctx.cache.as_ref().map(|c| c.dir().to_path_buf()));
    match cli.command {
        Command::Invariant { link, n, oracle, diagram, formula } => {
            cmd_invariant(&ctx, parse_link(&link)?, n, oracle, diagram, formula.as_deref())
        }
        Command::Sequence { link, from, to, step, ns } => cmd_sequence(&ctx, parse_link(&link)?, from, to, step, ns),
        Command::Saddle { link, seeds } => cmd_saddle(&ctx, parse_link(&link)?, seeds),
        Command::Fit { link, ns, csv, degree } => {
            let link = link.as_deref().map(parse_link).transpose()?;
            cmd_fit(&ctx, link, ns, csv, degree)
        }
        Command::VerifyAll => cmd_verify_all(&ctx),
    }
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct OracleComparison {
    re: String,
    im: String,
    /// `|closed − unit·oracle| / |closed|`.
    relative_difference: Option<f64>,
}

#[derive(Serialize)]
struct InvariantReport {
    link: LinkId,
    #[serde(rename = "N")]
    n: usize,
    re: String,
    im: String,
    backend: String,
    method: String,
    formula: String,
    implementer_derived: bool,
    condition: f64,
    error_estimate: f64,
    oracle: Option<OracleComparison>,
}

fn invariant_in<R: Real>(
    ctx: &Ctx,
    link: LinkId,
    n: usize,
    oracle: bool,
    diagram: Option<&TangleDiagram>,
    formula: Formula,
) -> anyhow::Result<InvariantReport> {
    let rc = make_context::<R>(n)?;
    let tag = kashaev_core::backend::backend_tag::<R>();
    if let Some(d) = diagram {
        let v = evaluate_tangle(d, &rc, ctx.budgets.tangle_cost)?;
        return Ok(InvariantReport {
            link,
            n,
            re: v.re.to_repr(),
            im: v.im.to_repr(),
            backend: tag,
            method: "tangle_oracle".into(),
            formula: "diagram-file".into(),
            implementer_derived: false,
            condition: 1.0,
            error_estimate: R::epsilon().to_f64(),
            oracle: None,
        });
    }
    let v = evaluate_cached(&rc, link, formula, &ctx.budgets, ctx.cache.as_ref())?;
    let oracle = if oracle {
        let o = evaluate_tangle(&builtin_diagram(link), &rc, ctx.budgets.tangle_cost)?;
        let rel = oracle_unit(formula, &rc).map(|u| {
            let scale = cabs(&v.value).to_f64().max(f64::MIN_POSITIVE);
            (to_c64(&v.value) - to_c64(&(u * o.clone()))).norm() / scale
        });
        Some(OracleComparison { re: o.re.to_repr(), im: o.im.to_repr(), relative_difference: rel })
    } else {
        None
    };
    Ok(InvariantReport {
        link,
        n,
        re: v.value.re.to_repr(),
        im: v.value.im.to_repr(),
        backend: tag,
        method: v.method.to_string(),
        formula: v.formula.to_string(),
        implementer_derived: v.implementer_derived,
        condition: v.condition,
        error_estimate: v.error_estimate(),
        oracle,
    })
}

#[cfg(feature = "extended")]
fn invariant_extended(
    ctx: &Ctx,
    link: LinkId,
    n: usize,
    oracle: bool,
    diagram: Option<&TangleDiagram>,
    formula: Formula,
) -> anyhow::Result<InvariantReport> {
    invariant_in::<kashaev_core::backend::Mp>(ctx, link, n, oracle, diagram, formula)
}

#[cfg(not(feature = "extended"))]
fn invariant_extended(
    _: &Ctx,
    _: LinkId,
    _: usize,
    _: bool,
    _: Option<&TangleDiagram>,
    _: Formula,
) -> anyhow::Result<InvariantReport> {
    bail!("built without the extended backend")
}

/// A decimal string with an explicit leading sign.
fn signed(s: &str) -> String {
    if s.starts_with('-') {
        s.to_string()
    } else {
        format!("+{s}")
    }
}

fn cmd_invariant(
    ctx: &Ctx,
    link: LinkId,
    n: usize,
    oracle: bool,
    diagram: Option<PathBuf>,
    formula: Option<&str>,
) -> anyhow::Result<ExitCode> {
    let formula = match formula {
        Some(f) => f.parse::<Formula>()?,
        None => Formula::default_for(link),
    };
    let diagram = diagram
        .map(|p| -> anyhow::Result<TangleDiagram> {
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            Ok(TangleDiagram::parse(&text)?)
        })
        .transpose()?;
    let report = match ctx.backend {
        BackendChoice::Double => invariant_in::<f64>(ctx, link, n, oracle, diagram.as_ref(), formula)?,
        BackendChoice::Extended => invariant_extended(ctx, link, n, oracle, diagram.as_ref(), formula)?,
        BackendChoice::Auto => {
            let r = invariant_in::<f64>(ctx, link, n, oracle, diagram.as_ref(), formula)?;
            if r.error_estimate > AUTO_ERROR_TARGET && cfg!(feature = "extended") {
                invariant_extended(ctx, link, n, oracle, diagram.as_ref(), formula)?
            } else {
                r
            }
        }
    };
    if ctx.json {
        print_json(&report)?;
    } else {
        println!("{} N={}: {}{}i", report.link, report.n, report.re, signed(&report.im));
        println!(
            "  backend {}, method {}, formula {}{}, condition {:.3e}, error estimate {:.1e}",
            report.backend,
            report.method,
            report.formula,
            if report.implementer_derived { " (derived)" } else { "" },
            report.condition,
            report.error_estimate
        );
        if let Some(o) = &report.oracle {
            print!("  oracle: {}{}i", o.re, signed(&o.im));
            match o.relative_difference {
                Some(d) => println!(", relative difference {d:.2e}"),
                None => println!(" (formula not normalized like the oracle)"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sequence(
    ctx: &Ctx,
    link: LinkId,
    from: Option<usize>,
    to: Option<usize>,
    step: usize,
    ns: Option<Vec<usize>>,
) -> anyhow::Result<ExitCode> {
    if step == 0 {
        bail!("--step must be positive");
    }
    let ns = match (ns, from, to) {
        (Some(ns), _, _) => ns,
        (None, Some(a), Some(b)) => (a..=b).step_by(step).collect(),
        _ => bail!("give --from/--to or --ns"),
    };
    let records = build_sequence_records(link, &ns, ctx.backend, &ctx.budgets, ctx.cache.as_ref())?;
    if ctx.json {
        print_json(&records)?;
    } else {
        let mut buf = Vec::new();
        write_sequence_csv(&mut buf, &records)?;
        std::io::stdout().lock().write_all(&buf)?;
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SaddleReport<'a> {
    #[serde(flatten)]
    result: &'a SaddleResult,
    observation: Option<ObservationCheck>,
}

fn cmd_saddle(ctx: &Ctx, link: LinkId, seeds: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let seeds: Vec<PotentialPoint> = match seeds {
        Some(p) => {
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing seeds in {}", p.display()))?
        }
        None => reference_seeds(&ctx.reference, link),
    };
    let result = solve_saddle(link, Some(&seeds), &SaddleOptions::default())?;
    let observation = match ctx.reference.lookup(link) {
        Ok(r) => Some(verify_observation(&result, r)?),
        Err(_) => None,
    };
    if ctx.json {
        print_json(&SaddleReport { result: &result, observation })?;
        return Ok(ExitCode::SUCCESS);
    }
    let names = kashaev_core::potentials::potential_for(link).map(|p| p.var_names()).unwrap_or_default();
    println!("{link}: stationary point");
    for (name, c) in names.iter().zip(&result.point) {
        println!("  {name} = {c}");
    }
    println!("  V = {:.10}{:+.10}i", result.v.re, result.v.im);
    println!("  vol_pred = {:.7}, cs_pred = {:.7}", result.vol_pred, result.cs_pred);
    println!("  residual = {:.2e} after {} iterations", result.residual, result.iterations);
    for c in &result.constraints {
        let verdict = match c.holds {
            Some(true) => "holds",
            Some(false) => "fails",
            None => "n/a",
        };
        println!("  constraint {}: {verdict}", c.name);
    }
    if !result.alternatives.is_empty() {
        println!("  {} other admissible root(s) with smaller volume", result.alternatives.len());
    }
    if let Some(o) = observation {
        println!(
            "  reference vol {:.7} ({} digits), cs {:.7} ({} digits): {}",
            o.vol.reference,
            o.vol.digits,
            o.cs.reference,
            o.cs.digits,
            if o.confirmed { "confirmed" } else { "not confirmed" }
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_fit(
    ctx: &Ctx,
    link: Option<LinkId>,
    ns: Option<Vec<usize>>,
    csv: Option<PathBuf>,
    degree: usize,
) -> anyhow::Result<ExitCode> {
    let points = match (&csv, link) {
        (Some(path), _) => {
            if ns.is_some() {
                bail!("--ns cannot be combined with --csv");
            }
            let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            read_sequence_csv(file)?
        }
        (None, Some(link)) => {
            let ns = match ns {
                Some(ns) => ns,
                None => published_sequence(link)
                    .map(|rows| rows.iter().map(|r| r.n).collect())
                    .ok_or_else(|| anyhow!("no tabulated colors for {link}; pass --ns"))?,
            };
            build_sequence_records(link, &ns, ctx.backend, &ctx.budgets, ctx.cache.as_ref())?
                .iter()
                .map(|r| (r.n, r.value))
                .collect()
        }
        (None, None) => bail!("give a link or --csv"),
    };
    let fit = fit_sequence(&points, degree)?;
    let reference = link.and_then(|l| ctx.reference.lookup(l).ok());
    let report = FitReport::new(link, &fit, reference);
    if ctx.json {
        print_json(&report)?;
        return Ok(ExitCode::SUCCESS);
    }
    let label = link.map_or_else(|| "sequence".to_string(), |l| l.to_string());
    println!("{label}: fit {} on {} points", report.model, report.points_used);
    for (k, c) in report.coefficients.iter().enumerate() {
        println!("  coefficient 1/N^{k}: {:.8}{:+.8}i", c.re, c.im);
    }
    println!("  limit = {:.5}{:+.5}i, cs_top = {:.8}", report.a.re, report.a.im, report.cs_top);
    println!("  residual rms = {:.2e}", report.residual_rms);
    if let Some(c) = &report.comparison {
        println!("  {}", c.verdict(2e-3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_all(ctx: &Ctx) -> anyhow::Result<ExitCode> {
    let config = VerifyConfig { backend: ctx.backend, budgets: ctx.budgets, ..VerifyConfig::default() };
    let verdicts = verify_all(&ctx.reference, &config, ctx.cache.as_ref());
    let passed = verdicts.iter().filter(|v| v.passed()).count();
    if ctx.json {
        print_json(&verdicts)?;
    } else {
        for v in &verdicts {
            println!("{}", v.line());
        }
        println!("{passed}/{} checks passed", verdicts.len());
    }
    Ok(if passed == verdicts.len() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
