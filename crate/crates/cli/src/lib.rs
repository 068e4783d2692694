//! Command-line driver: `solve`, `check`, `generate`, `experiment`, `bench`.
//!
//! Exit codes: 0 success, 1 a `check` verdict was negative, 2 the LP was
//! infeasible and the fallback rounding was used, 3 a randomized stage or
//! search did not terminate within its budget, 4 input error.

pub mod experiment;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heavylight::baselines::matching_baseline_search;
use heavylight::canonical::{parse_canonical, CanonicalInstance, HeavyAssignment};
use heavylight::goodness::{best_goodness, is_delta_good, WitnessDoc};
use heavylight::instance::{
    gen_planted, gen_random, gen_vertex_cover, instance_to_json, machine_loads, makespan, parse_instance,
    parse_schedule, random_cubic_graph, schedule_to_json, validate_schedule, EligibilitySize, GenParams, Instance,
    Schedule,
};
use heavylight::pipeline::{check_lp_params, parse_constants, parse_param, solve, Constants, SolveConfig, SolvePath};
use heavylight::rational::{format_rational, int, Rational};
use heavylight::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_FALLBACK: i32 = 2;
pub const EXIT_NON_TERMINATED: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "heavylight", version, about = "Makespan rounding for (1,eps)-restricted assignment")]
pub struct Cli {
    /// Print a summary to stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the rounding pipeline on one instance.
    Solve(SolveArgs),
    /// Validate a schedule, or test a heavy assignment of a canonical instance for δ-goodness.
    Check(CheckArgs),
    /// Write a generated instance.
    Generate(GenerateArgs),
    /// Run an experiment grid from a JSON config and write CSV.
    Experiment(ExperimentArgs),
    /// Time the pipeline against the matching baseline on planted instances.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConstantArgs {
    /// JSON file overriding pipeline constants.
    #[arg(long)]
    pub constants: Option<PathBuf>,
    /// Start from the desk-scale constants instead of the asymptotic defaults.
    #[arg(long)]
    pub desk_scale: bool,
    #[arg(long)]
    pub q0: Option<u64>,
}

impl ConstantArgs {
    pub fn resolve(&self) -> Result<Constants, CliError> {
        let mut c = match &self.constants {
            Some(path) => parse_constants(&read(path)?)?,
            None if self.desk_scale => Constants::desk_scale(),
            None => Constants::default(),
        };
        if let Some(q0) = self.q0 {
            c.q0 = q0;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "0.6")]
    pub rho: String,
    #[arg(long, default_value = "1/20")]
    pub delta: String,
    #[command(flatten)]
    pub constants: ConstantArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Result document; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the bare schedule (job -> machine) here.
    #[arg(long)]
    pub schedule_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long, requires = "schedule", conflicts_with = "canonical")]
    pub instance: Option<PathBuf>,
    /// Either a bare job -> machine map or a `solve` result document.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[arg(long, requires = "heavy")]
    pub canonical: Option<PathBuf>,
    /// Group job -> machine map for `--canonical`.
    #[arg(long)]
    pub heavy: Option<PathBuf>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Random,
    Planted,
    VertexCover,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 8)]
    pub machines: usize,
    #[arg(long, default_value_t = 4)]
    pub heavy: usize,
    #[arg(long, default_value_t = 8)]
    pub light: usize,
    #[arg(long, default_value = "1/3")]
    pub eps: String,
    #[arg(long, default_value_t = 1)]
    pub min_eligible: usize,
    #[arg(long, default_value_t = 3)]
    pub max_eligible: usize,
    /// Vertex-cover family: vertices of the random cubic graph.
    #[arg(long, default_value_t = 8)]
    pub vertices: usize,
    /// Vertex-cover family: cover size K; the minimum cover size when absent.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Io(PathBuf, std::io::Error),
    Core(Error),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(s) => write!(f, "{s}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(Error::Json(e))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(format!("csv: {e}"))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::NonTerminated(_) | Error::BudgetExceeded(_)) => EXIT_NON_TERMINATED,
            _ => EXIT_INPUT,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Writes `text` to `path`, or to stdout.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(p.to_path_buf(), e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| if text.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") })
                .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))
        }
    }
}

pub fn load_instance(path: &Path) -> Result<Instance, CliError> {
    Ok(parse_instance(&read(path)?)?)
}

/// Parses a bare schedule map, or the `schedule` field of a result document.
pub fn load_schedule(inst: &Instance, text: &str) -> Result<Schedule, CliError> {
    match parse_schedule(inst, text) {
        Ok(s) => Ok(s),
        Err(first) => {
            let v: serde_json::Value = serde_json::from_str(text)?;
            match v.get("schedule") {
                Some(inner) => Ok(parse_schedule(inst, &inner.to_string())?),
                None => Err(first.into()),
            }
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, cli.verbose),
        Command::Check(a) => cmd_check(a),
        Command::Generate(a) => cmd_generate(a).map(|_| EXIT_OK),
        Command::Experiment(a) => cmd_experiment(a).map(|_| EXIT_OK),
        Command::Bench(a) => cmd_bench(a).map(|_| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("heavylight: {e}");
            if let CliError::Core(Error::Precondition(msg)) = &e {
                if msg.contains("θ") {
                    eprintln!("hint: pass --desk-scale or a --constants file for small instances");
                }
            }
            e.exit_code()
        }
    }
}

pub fn solve_config(rho: &str, delta: &str, constants: Constants, seed: u64) -> Result<SolveConfig, CliError> {
    let rho = parse_param("rho", rho)?;
    let delta = parse_param("delta", delta)?;
    check_lp_params(&rho, &delta)?;
    Ok(SolveConfig { rho, delta, constants, seed })
}

pub fn cmd_solve(a: &SolveArgs, verbose: u8) -> Result<i32, CliError> {
    let inst = load_instance(&a.instance)?;
    let cfg = solve_config(&a.rho, &a.delta, a.constants.resolve()?, a.seed)?;
    let out = solve(&inst, &cfg)?;
    validate_schedule(&inst, &out.schedule)?;
    if makespan(&inst, &out.schedule)? != out.makespan {
        return Err(Error::Internal("reported makespan does not match the schedule".into()).into());
    }
    if verbose > 0 {
        eprintln!(
            "path={:?} makespan={} verified={}",
            out.path,
            format_rational(&out.makespan),
            out.verified()
        );
    }
    emit(a.out.as_deref(), &out.to_json(&inst))?;
    if let Some(p) = &a.schedule_out {
        emit(Some(p), &schedule_to_json(&inst, &out.schedule))?;
    }
    Ok(match out.path {
        SolvePath::Pipeline => EXIT_OK,
        SolvePath::Fallback => EXIT_FALLBACK,
    })
}

/// Reads a group job -> machine map into a heavy assignment.
pub fn parse_heavy(ci: &CanonicalInstance, text: &str) -> Result<HeavyAssignment, CliError> {
    let doc: BTreeMap<String, String> = serde_json::from_str(text)?;
    let mut machine_of = Vec::with_capacity(ci.groups.len());
    for g in &ci.groups {
        let name = doc
            .get(&g.job)
            .ok_or_else(|| Error::Parse(format!("no machine for group {:?}", g.job)))?;
        let m = ci
            .machines
            .iter()
            .position(|x| x == name)
            .ok_or_else(|| Error::Parse(format!("unknown machine {name:?}")))?;
        machine_of.push(m);
    }
    if doc.len() != ci.groups.len() {
        return Err(Error::Parse("heavy assignment names unknown groups".into()).into());
    }
    let f = HeavyAssignment { machine_of };
    ci.validate_assignment(&f)?;
    Ok(f)
}

pub fn cmd_check(a: &CheckArgs) -> Result<i32, CliError> {
    let delta = a.delta.as_deref().map(|d| parse_param("delta", d)).transpose()?;
    let (doc, ok) = match (&a.instance, &a.schedule, &a.canonical, &a.heavy) {
        (Some(ip), Some(sp), None, None) => {
            let inst = load_instance(ip)?;
            let sched = load_schedule(&inst, &read(sp)?)?;
            check_schedule(&inst, &sched, delta.as_ref())?
        }
        (None, None, Some(cp), Some(hp)) => {
            let ci = parse_canonical(&read(cp)?)?;
            let f = parse_heavy(&ci, &read(hp)?)?;
            check_heavy(&ci, &f, &delta.unwrap_or_default())?
        }
        _ => {
            return Err(CliError::Usage(
                "check needs --instance with --schedule, or --canonical with --heavy".into(),
            ))
        }
    };
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&doc)?)?;
    Ok(if ok { EXIT_OK } else { EXIT_REJECTED })
}

pub fn check_schedule(
    inst: &Instance,
    sched: &Schedule,
    delta: Option<&Rational>,
) -> Result<(serde_json::Value, bool), CliError> {
    if let Err(e) = validate_schedule(inst, sched) {
        return Ok((json!({ "valid": false, "error": e.to_string() }), false));
    }
    let loads = machine_loads(inst, sched)?;
    let mk = makespan(inst, sched)?;
    let loads: BTreeMap<&str, String> = inst
        .machines
        .iter()
        .zip(&loads)
        .map(|(m, l)| (m.as_str(), format_rational(l)))
        .collect();
    let mut doc = json!({ "valid": true, "makespan": format_rational(&mk), "loads": loads });
    let mut ok = true;
    if let Some(d) = delta {
        let bound = int(2) - d;
        ok = mk <= bound;
        doc["bound"] = json!(format_rational(&bound));
        doc["within_bound"] = json!(ok);
    }
    Ok((doc, ok))
}

pub fn check_heavy(
    ci: &CanonicalInstance,
    f: &HeavyAssignment,
    delta: &Rational,
) -> Result<(serde_json::Value, bool), CliError> {
    let res = is_delta_good(ci, f, delta)?;
    let best = best_goodness(ci, f)?.map(|(d, _)| format_rational(&d));
    let mut doc = json!({ "good": res.good, "delta": format_rational(delta), "best_delta": best });
    if let Some(w) = &res.witness {
        doc["witness"] = serde_json::to_value(WitnessDoc::from_witness(&ci.machines, w))?;
    }
    Ok((doc, res.good))
}

pub fn generate(a: &GenerateArgs) -> Result<Instance, CliError> {
    let eps = parse_param("eps", &a.eps)?;
    let params = GenParams {
        machines: a.machines,
        heavy: a.heavy,
        light: a.light,
        eps,
        eligibility: EligibilitySize::Uniform { min: a.min_eligible, max: a.max_eligible },
        seed: a.seed,
    };
    Ok(match a.family {
        Family::Random => gen_random(&params)?,
        Family::Planted => gen_planted(&params)?,
        Family::VertexCover => {
            let g = random_cubic_graph(a.vertices, &mut ChaCha8Rng::seed_from_u64(a.seed))?;
            let k = match a.k {
                Some(k) => k,
                None => g.min_vertex_cover()?,
            };
            gen_vertex_cover(&g, k, &params.eps)?
        }
    })
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<(), CliError> {
    emit(a.out.as_deref(), &instance_to_json(&generate(a)?))
}

pub fn cmd_experiment(a: &ExperimentArgs) -> Result<(), CliError> {
    let cfg = experiment::parse_experiment_config(&read(&a.config)?)?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    let rows = experiment::run_experiment(&cfg, base)?;
    emit(a.out.as_deref(), &experiment::rows_to_csv(&rows)?)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BenchRow {
    pub machines: usize,
    pub instance: usize,
    pub jobs: usize,
    pub solve_ms: f64,
    pub baseline_ms: f64,
    pub makespan: String,
    pub baseline_makespan: String,
}

pub fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for &m in &a.sizes {
        for i in 0..a.count {
            let seed = a.seed.wrapping_add((m * 1000 + i) as u64);
            let heavy = m / 3;
            let params = GenParams {
                machines: m,
                heavy,
                light: 2 * (m - heavy),
                eps: Rational::new(1.into(), 3.into()),
                eligibility: EligibilitySize::Uniform { min: 2, max: 3.min(m) },
                seed,
            };
            let inst = gen_planted(&params)?;
            let cfg = SolveConfig { constants: Constants::desk_scale(), seed, ..SolveConfig::default() };
            let t = Instant::now();
            let out = solve(&inst, &cfg)?;
            let solve_ms = t.elapsed().as_secs_f64() * 1e3;
            let t = Instant::now();
            let base = matching_baseline_search(&inst)?;
            let baseline_ms = t.elapsed().as_secs_f64() * 1e3;
            w.serialize(BenchRow {
                machines: m,
                instance: i,
                jobs: inst.heavy.len() + inst.light.len(),
                solve_ms: (solve_ms * 1e3).round() / 1e3,
                baseline_ms: (baseline_ms * 1e3).round() / 1e3,
                makespan: format_rational(&out.makespan),
                baseline_makespan: base.map(|b| format_rational(&b.makespan)).unwrap_or_default(),
            })?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    emit(a.out.as_deref(), &String::from_utf8_lossy(&bytes))
}
