//! `sparse-bilinear`: region queries, operator evaluation, sparse
//! construction and verification suites.
//!
//! Exit codes: 0 success or member, 1 negative answer or failed suite,
//! 2 usage error.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sparse_bilinear::exponents::{parse_rational, region, ExponentTriple, MembershipMode, RegionName};
use sparse_bilinear::grid::{random_test_function, GridFunction, GridSpec, TestFunctionKind};
use sparse_bilinear::measures::MeasureFamily;
use sparse_bilinear::operators::{full_maximal, lacunary_maximal, scale_average, single_scale_maximal, OperatorConfig};
use sparse_bilinear::verify::{default_measure, run_suite, sparse_ratio_experiment, sparse_run, SparseRatioConfig};
use sparse_bilinear::Error;

use manifest::{Manifest, Outputs};

#[derive(Parser, Debug)]
#[command(name = "sparse-bilinear", version, about = "Bilinear averages, sparse forms and exponent regions")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact exponent region: vertices, facets, optional membership.
    Region(RegionArgs),
    /// Evaluate an averaging operator on grid functions.
    Operator(OperatorArgs),
    /// Build a sparse family and the ratio against the lacunary operator.
    Sparse(SparseArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct RegionArgs {
    name: String,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    m: Option<u32>,
    /// Rational triple `1/p 1/q 1/r`.
    #[arg(long, num_args = 3, value_names = ["INV_P", "INV_Q", "INV_R"])]
    contains: Option<Vec<String>>,
    #[arg(long)]
    interior: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OpKind {
    Single,
    SingleMax,
    Lacunary,
    Full,
}

#[derive(Args, Debug, Serialize)]
struct InputArgs {
    #[arg(long)]
    f: Option<PathBuf>,
    #[arg(long)]
    g: Option<PathBuf>,
    /// Random inputs on the unit grid instead of files.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Cells per axis for random inputs.
    #[arg(long, default_value_t = 256)]
    grid: usize,
}

#[derive(Args, Debug, Serialize)]
struct OperatorArgs {
    #[arg(long)]
    measure: String,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, value_enum, default_value = "single")]
    kind: OpKind,
    #[arg(long, default_value_t = -4)]
    jmin: i32,
    #[arg(long, default_value_t = -1)]
    jmax: i32,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SparseArgs {
    /// Exponents as rationals, e.g. `2` or `5/3`.
    #[arg(long)]
    p: String,
    #[arg(long)]
    q: String,
    #[arg(long)]
    r: String,
    #[arg(long, default_value = "bisphere")]
    measure: String,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = -8)]
    jmin: i32,
    #[arg(long, default_value_t = -3)]
    jmax: i32,
    #[arg(long)]
    h: Option<PathBuf>,
    /// Seeded random batch of this many trials.
    #[arg(long)]
    trials: Option<usize>,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// Suite name or `all`.
    suite: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidExponent(_) | Error::InvalidParameters(_) | Error::InvalidDimension(_) | Error::NotImplemented(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn parse_triple(parts: &[String]) -> Result<ExponentTriple, Failure> {
    ExponentTriple::parse(&parts.join(",")).map_err(|e| Failure::Usage(format!("bad rational triple: {e}")))
}

/// `(1/p, 1/q, 1/r)` from exponents given as rationals.
fn reciprocal_triple(p: &str, q: &str, r: &str) -> Result<ExponentTriple, Failure> {
    let inv = |s: &str| -> Result<String, Failure> {
        let v = parse_rational(s).map_err(|e| Failure::Usage(format!("bad rational {s}: {e}")))?;
        if v <= parse_rational("0").expect("zero parses") {
            return Err(Failure::Usage(format!("exponent {s} must be positive")));
        }
        let w = v.recip();
        Ok(format!("{}/{}", w.numer(), w.denom()))
    };
    let s = format!("{},{},{}", inv(p)?, inv(q)?, inv(r)?);
    ExponentTriple::parse(&s).map_err(|e| Failure::Usage(e.to_string()))
}

/// Prints to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn write(out: &mut Outputs, dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    out.push(path);
    Ok(())
}

fn cmd_region(a: &RegionArgs, man: &mut Manifest) -> CmdResult {
    let name: RegionName = a.name.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let reg = region(name, a.d, a.m)?;
    let mut doc = reg.to_json_value();
    let mut code = ExitCode::SUCCESS;
    if let Some(parts) = &a.contains {
        let x = parse_triple(parts)?;
        let mode = if a.interior { MembershipMode::Interior } else { MembershipMode::Closed };
        let member = reg.contains(&x, mode);
        doc["query"] = json!({ "point": x.to_string(), "interior": a.interior, "member": member });
        if !member {
            code = ExitCode::from(1);
        }
    }
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&doc)?,
        Format::Csv => reg.to_csv(),
    };
    match &a.out {
        Some(dir) => {
            let ext = match a.format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            write(&mut man.outputs, dir, &format!("region.{ext}"), &text)?;
            man.finish(dir)?;
        }
        None => emit(&text),
    }
    Ok(code)
}

fn load(path: &Path, man: &mut Manifest) -> Result<GridFunction, Failure> {
    let text = std::fs::read_to_string(path)?;
    man.hash_input(path, text.as_bytes());
    GridFunction::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn random_input(seed: u64, d: usize, n: usize) -> Result<GridFunction, Failure> {
    let spec = GridSpec::unit(d, n)?;
    let kind = TestFunctionKind::IndicatorUnionOfCubes { count: 4, min_level: 1, max_level: spec.levels().min(6) };
    Ok(random_test_function(seed, &kind, &spec)?)
}

fn inputs(i: &InputArgs, d: usize, man: &mut Manifest) -> Result<(GridFunction, GridFunction), Failure> {
    match (&i.f, &i.g, i.random) {
        (Some(f), Some(g), false) => Ok((load(f, man)?, load(g, man)?)),
        (None, None, true) => Ok((random_input(i.seed.wrapping_mul(2), d, i.grid)?, random_input(i.seed.wrapping_mul(2).wrapping_add(1), d, i.grid)?)),
        _ => Err(Failure::Usage("give either --f and --g, or --random".into())),
    }
}

fn family(s: &str) -> Result<MeasureFamily, Failure> {
    s.parse().map_err(|e: Error| Failure::Usage(e.to_string()))
}

fn cmd_operator(a: &OperatorArgs, man: &mut Manifest) -> CmdResult {
    let mu = default_measure(family(&a.measure)?, a.d)?;
    let (f, g) = inputs(&a.input, a.d, man)?;
    if f.dim != a.d {
        return Err(Failure::Usage(format!("inputs have dimension {}, --d is {}", f.dim, a.d)));
    }
    let cfg = OperatorConfig::new(mu, a.t)?.with_j_range(a.jmin, a.jmax)?;
    let out = match a.kind {
        OpKind::Single => scale_average(&f, &g, &cfg)?,
        OpKind::SingleMax => single_scale_maximal(&f, &g, &cfg)?,
        OpKind::Lacunary => lacunary_maximal(&f, &g, &cfg)?,
        OpKind::Full => full_maximal(&f, &g, &cfg)?,
    };
    let text = out.to_json()?;
    match &a.out {
        Some(dir) => {
            write(&mut man.outputs, dir, "output.json", &text)?;
            write(&mut man.outputs, dir, "output.csv", &out.to_csv())?;
            man.finish(dir)?;
        }
        None => emit(&text),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sparse(a: &SparseArgs, man: &mut Manifest) -> CmdResult {
    let x = reciprocal_triple(&a.p, &a.q, &a.r)?;
    let fam = family(&a.measure)?;
    if let Some(trials) = a.trials {
        let base = if a.d == 1 { SparseRatioConfig::d1(trials, a.input.seed) } else { SparseRatioConfig::d2(trials, a.input.seed) };
        let cfg = SparseRatioConfig {
            family: fam,
            dim: a.d,
            x: (x.inv_p.to_string(), x.inv_q.to_string(), x.inv_r.to_string()),
            grid_n: a.input.grid,
            j_min: a.jmin,
            j_max: a.jmax,
            ..base
        };
        let stats = sparse_ratio_experiment(&cfg)?;
        let summary = json!({
            "trials": trials,
            "max_ratio": stats.max_ratio,
            "median_ratio": stats.median_ratio,
            "skipped": stats.skipped,
            "sparsity_failures": stats.sparsity_failures,
        });
        match &a.out {
            Some(dir) => {
                write(&mut man.outputs, dir, "stats.json", &serde_json::to_string_pretty(&stats)?)?;
                write(&mut man.outputs, dir, "stats.csv", &stats.to_csv())?;
                man.finish(dir)?;
            }
            None => emit(&serde_json::to_string_pretty(&summary)?),
        }
        return Ok(ExitCode::SUCCESS);
    }
    let (f, g) = inputs(&a.input, a.d, man)?;
    let h = match &a.h {
        Some(p) => load(p, man)?,
        None if a.input.random => random_input(a.input.seed.wrapping_mul(2).wrapping_add(7919), f.dim, f.n)?,
        None => return Err(Failure::Usage("--h is required with --f and --g".into())),
    };
    let (s, rep) = sparse_run(&f, &g, &h, &x, fam, a.jmin, a.jmax)?;
    match &a.out {
        Some(dir) => {
            write(&mut man.outputs, dir, "sparse.json", &s.to_json()?)?;
            write(&mut man.outputs, dir, "report.json", &serde_json::to_string_pretty(&rep)?)?;
            man.finish(dir)?;
        }
        None => emit(&serde_json::to_string_pretty(&json!({ "report": rep, "cubes": s.cubes }))?),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: &VerifyArgs, man: &mut Manifest) -> CmdResult {
    let setup = match (&a.measure, a.d) {
        (Some(m), Some(d)) => Some((family(m)?, d)),
        (None, None) => None,
        _ => return Err(Failure::Usage("--measure and --d go together".into())),
    };
    let reports = run_suite(&a.suite, a.seed, setup)?;
    let pass = reports.iter().all(|r| r.pass);
    for r in &reports {
        emit(&format!("{}: {} ({} checks, {:.2}s)", r.suite, if r.pass { "PASS" } else { "FAIL" }, r.checks.len(), r.seconds));
        for c in r.checks.iter().filter(|c| !c.pass) {
            emit(&format!("  failed {}: {} vs {}", c.name, c.value, c.bound));
        }
    }
    if let Some(dir) = &a.out {
        write(&mut man.outputs, dir, "verify.json", &serde_json::to_string_pretty(&reports)?)?;
        let csv: String = reports.iter().enumerate().map(|(i, r)| {
            let t = r.to_csv();
            if i == 0 { t } else { t.lines().skip(1).map(|l| format!("{l}\n")).collect() }
        }).collect();
        write(&mut man.outputs, dir, "verify.csv", &csv)?;
        man.finish(dir)?;
    }
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let res = match &cli.cmd {
        Command::Region(a) => cmd_region(a, &mut Manifest::new("region", a, None, start)),
        Command::Operator(a) => cmd_operator(a, &mut Manifest::new("operator", a, Some(a.input.seed), start)),
        Command::Sparse(a) => cmd_sparse(a, &mut Manifest::new("sparse", a, Some(a.input.seed), start)),
        Command::Verify(a) => cmd_verify(a, &mut Manifest::new("verify", a, Some(a.seed), start)),
    };
    match res {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
