use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arrowwalk::counterexamples::{build_ce2, ce1_milestones, lead_sets, Ce2Variant};
use arrowwalk::couplings::{
    chain_glue, couple_block_stacks, envelope_walk, sample_system, BlockPartition, Clamped, CookieEnvironment,
    Envelope, Orrw, StreamTag, UniformField,
};
use arrowwalk::verifier::{verify, CoupledPair, Provenance, Statement, VerifyResult};
use arrowwalk::{paths_admit_preceq, run_walk, RelationMode};
use arrowwalk_lab::formats::{load_env, load_partition, load_system, load_trajectory, write_trajectory};
use arrowwalk_lab::montecarlo::{run_campaign, speed_and_recurrence_stats, CampaignConfig, Family};
use arrowwalk_lab::table::{Format, Table};
use arrowwalk_lab::{LabError, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "arrowwalk", version, about = "Arrow-system walks, couplings and their comparison checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Walk one arrow system and write its trajectory as `n,pos`.
    Run(RunArgs),
    /// Run the comparison checks on a pair of walks.
    Verify(VerifyArgs),
    /// Build a counterexample pair.
    Counterexample(CounterexampleArgs),
    /// Couple two walks with one of the constructions and check them.
    Couple(CoupleArgs),
    /// Many coupled pairs from one family, aggregated into a JSON report.
    Campaign(CampaignArgs),
    /// Speed and zero-right return statistics of an excited walk.
    Stats(StatsArgs),
}

#[derive(Args)]
struct Output {
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    /// Arrow system file.
    #[arg(long, conflicts_with = "env", required_unless_present = "env")]
    system: Option<PathBuf>,
    /// Cookie environment file, sampled with `--seed`.
    #[arg(long)]
    env: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long)]
    horizon: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Preceq,
    Trileq,
}

impl From<Mode> for RelationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Preceq => RelationMode::Preceq,
            Mode::Trileq => RelationMode::Trileq,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// System playing `L`; needs `--system2` and `--horizon`.
    #[arg(long, requires_all = ["system2", "horizon"], conflicts_with_all = ["env", "paths"])]
    system: Option<PathBuf>,
    /// System playing `R`.
    #[arg(long, requires = "system")]
    system2: Option<PathBuf>,
    /// Environment of `L`, coupled to `--env2` by shared uniforms.
    #[arg(long, requires_all = ["env2", "horizon"], conflicts_with = "paths")]
    env: Option<PathBuf>,
    #[arg(long, requires = "env")]
    env2: Option<PathBuf>,
    /// Two `n,pos` trajectory files, `L` then `R`.
    #[arg(long, value_delimiter = ',')]
    paths: Option<Vec<PathBuf>>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Preceq)]
    mode: Mode,
    /// Comma-separated check names; all if absent.
    #[arg(long, value_delimiter = ',', value_parser = parse_statement)]
    checks: Vec<Statement>,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Ce1,
    Ce2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Primed,
    Periodic,
}

#[derive(Args)]
struct CounterexampleArgs {
    #[arg(value_enum)]
    which: Which,
    #[arg(long = "N", default_value_t = 3)]
    n: u64,
    #[arg(long, default_value_t = 8)]
    kmax: u32,
    #[arg(long, value_enum, default_value_t = Variant::Primed)]
    variant: Variant,
    #[arg(long, default_value_t = 1)]
    cycles: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    SharedUniform,
    BlockStack,
    SwapChain,
    Envelope,
}

#[derive(Args)]
struct CoupleArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    env: Option<PathBuf>,
    #[arg(long)]
    env2: Option<PathBuf>,
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Envelope cookies, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.9")]
    eta: Vec<f64>,
    /// Reinforcement of the once-reinforced walk under the envelope.
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long)]
    horizon: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CampaignArgs {
    #[arg(long, value_enum, default_value_t = Family::SharedUniform)]
    family: Family,
    #[arg(long)]
    env: Option<PathBuf>,
    #[arg(long)]
    env2: Option<PathBuf>,
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1000)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "N", default_value_t = 3)]
    n: u64,
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.9")]
    eta: Vec<f64>,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, value_delimiter = ',', value_parser = parse_statement)]
    checks: Vec<Statement>,
    /// Per-trial `trial,check,status` CSV.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Leave the wall-clock field out of the report.
    #[arg(long)]
    no_timestamp: bool,
    /// Report file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `json` writes the full report, `csv` the per-check tallies.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    env: PathBuf,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 10_000)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Count returns to 0 after this time.
    #[arg(long, default_value_t = 1000)]
    after: usize,
    #[command(flatten)]
    output: Output,
}

fn parse_statement(s: &str) -> std::result::Result<Statement, String> {
    Statement::from_name(s.trim()).ok_or_else(|| {
        let names: Vec<_> = Statement::ALL.iter().map(|s| s.name()).collect();
        format!("unknown check {s:?}; expected one of {}", names.join(", "))
    })
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|source| LabError::Io { path: p.to_owned(), source })?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(table: &Table, output: &Output) -> Result<()> {
    let mut out = open_out(output.out.as_deref())?;
    table.write(output.format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn pair_table(pair: &CoupledPair) -> Table {
    let mut t = Table::new(["n", "left", "right"]);
    for (n, (l, r)) in pair.left.positions().iter().zip(pair.right.positions()).enumerate() {
        t.push(vec![json!(n), json!(l), json!(r)]);
    }
    t
}

/// Runs the checks, reports failures on stderr and returns whether all passed.
fn run_checks(pair: &CoupledPair, checks: &[Statement]) -> Vec<VerifyResult> {
    let checks = if checks.is_empty() { &Statement::ALL[..] } else { checks };
    let results: Vec<VerifyResult> = checks.iter().map(|&s| verify(pair, s)).collect();
    for r in results.iter().filter(|r| !r.passed) {
        let w = r.witness.as_ref().expect("failures carry a witness");
        let k = w.k.map_or(String::new(), |k| format!(" k={k}"));
        eprintln!("FAIL {}: t={} x={}{}: {}", r.statement.name(), w.t, w.x, k, w.detail);
    }
    results
}

fn status(results: &[VerifyResult]) -> ExitCode {
    if results.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn env_or_default(path: Option<&Path>, default: &CookieEnvironment) -> Result<CookieEnvironment> {
    path.map_or_else(|| Ok(default.clone()), load_env)
}

fn required<'a>(path: Option<&'a Path>, flag: &str) -> Result<&'a Path> {
    path.ok_or_else(|| LabError::Config(format!("{flag} is required here")))
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let traj = match (&args.system, &args.env) {
        (Some(p), _) => run_walk(&load_system(p)?, args.horizon),
        (None, Some(p)) => {
            let env = load_env(p)?;
            run_walk(&sample_system(&env, UniformField::new(args.seed), StreamTag(args.stream)), args.horizon)
        }
        (None, None) => unreachable!("clap requires one"),
    };
    let mut out = open_out(args.output.out.as_deref())?;
    match args.output.format {
        Format::Csv => write_trajectory(&mut out, &traj)?,
        Format::Json => {
            let mut t = Table::new(["n", "pos"]);
            for (n, x) in traj.positions().iter().enumerate() {
                t.push(vec![json!(n), json!(x)]);
            }
            t.write(Format::Json, &mut out)?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(args: VerifyArgs) -> Result<ExitCode> {
    let mode = args.mode.into();
    let pair = if let Some(paths) = &args.paths {
        if paths.len() != 2 {
            return Err(LabError::Config("--paths takes two files, L then R".into()));
        }
        let (l, r) = (load_trajectory(&paths[0])?, load_trajectory(&paths[1])?);
        let h = args.horizon.unwrap_or(l.horizon().min(r.horizon()));
        let order = paths_admit_preceq(l.positions(), r.positions())?;
        if !order.admits {
            let (x, k) = order.witness.expect("refusal carries a witness");
            eprintln!("paths admit no L ⪯ R completion: first conflict at site {x}, level {k}");
        }
        CoupledPair::new(l.truncate(h)?, r.truncate(h)?, mode, Provenance::Explicit)?
    } else if let (Some(a), Some(b)) = (&args.system, &args.system2) {
        let h = args.horizon.expect("clap requires horizon");
        CoupledPair::new(run_walk(&load_system(a)?, h), run_walk(&load_system(b)?, h), mode, Provenance::Explicit)?
    } else if let (Some(a), Some(b)) = (&args.env, &args.env2) {
        let h = args.horizon.expect("clap requires horizon");
        let field = UniformField::new(args.seed);
        let (l, r) = (load_env(a)?, load_env(b)?);
        CoupledPair::new(
            run_walk(&sample_system(&l, field, StreamTag(0)), h),
            run_walk(&sample_system(&r, field, StreamTag(0)), h),
            mode,
            Provenance::SharedUniform,
        )?
    } else {
        return Err(LabError::Config("verify needs --system/--system2, --env/--env2 or --paths".into()));
    };
    let results = run_checks(&pair, &args.checks);
    let mut t = Table::new(["check", "passed", "vacuous", "t", "x", "k", "detail"]);
    for r in &results {
        let w = r.witness.as_ref();
        t.push(vec![
            json!(r.statement.name()),
            json!(r.passed),
            json!(r.vacuous),
            w.map_or(Value::Null, |w| json!(w.t)),
            w.map_or(Value::Null, |w| json!(w.x)),
            w.and_then(|w| w.k).map_or(Value::Null, |k| json!(k)),
            w.map_or(Value::Null, |w| json!(w.detail)),
        ]);
    }
    emit(&t, &args.output)?;
    Ok(status(&results))
}

fn counterexample(args: CounterexampleArgs) -> Result<ExitCode> {
    match args.which {
        Which::Ce1 => {
            let m = ce1_milestones(args.n, args.kmax)?;
            let mut t = Table::new(["k", "x_k", "t_k", "s_k", "ratio_hi", "ratio_lo"]);
            for r in &m.rows {
                t.push(vec![json!(r.k), json!(r.site), json!(r.first_hit), json!(r.last_exit), json!(r.ratio_hi), json!(r.ratio_lo)]);
            }
            emit(&t, &args.output)?;
            eprintln!("limits: ratio_hi -> {}, ratio_lo -> {}", m.limit_hi(), m.limit_lo());
            Ok(ExitCode::SUCCESS)
        }
        Which::Ce2 => {
            let variant = match args.variant {
                Variant::Primed => Ce2Variant::Primed,
                Variant::Periodic => Ce2Variant::Periodic { cycles: args.cycles },
            };
            let pair = build_ce2(variant)?;
            let sets = lead_sets(&pair, pair.horizon())?;
            println!("lead sets ({}, {}) at t = {}", sets.ahead_right, sets.ahead_left, pair.horizon());
            let order = paths_admit_preceq(pair.left.positions(), pair.right.positions())?;
            println!("paths admit L ⪯ R: {}", order.admits);
            if args.output.out.is_some() {
                emit(&pair_table(&pair), &args.output)?;
            }
            let results = run_checks(&pair, &[]);
            Ok(if order.admits { status(&results) } else { ExitCode::from(1) })
        }
    }
}

fn couple(args: CoupleArgs) -> Result<ExitCode> {
    let field = UniformField::new(args.seed);
    let stream = StreamTag(args.stream);
    let h = args.horizon;
    let pair = match args.method {
        Method::Envelope => {
            let envelope = Envelope::new(args.eta.clone())?;
            let law = Clamped { law: Orrw { beta: args.beta }, envelope: envelope.clone() };
            let run = envelope_walk(&law, &envelope, field, stream, h)?;
            eprintln!("alpha = {}", run.alpha);
            run.pair
        }
        method => {
            let env = load_env(required(args.env.as_deref(), "--env")?)?;
            let env2 = load_env(required(args.env2.as_deref(), "--env2")?)?;
            let partition = match &args.partition {
                Some(p) => load_partition(p)?,
                None => BlockPartition::singletons(),
            };
            match method {
                Method::SharedUniform => CoupledPair::new(
                    run_walk(&sample_system(&env, field, stream), h),
                    run_walk(&sample_system(&env2, field, stream), h),
                    RelationMode::Trileq,
                    Provenance::SharedUniform,
                )?,
                Method::BlockStack => {
                    let sys = couple_block_stacks(&env, &partition, &[env.clone(), env2], field, stream)?;
                    CoupledPair::new(run_walk(&sys[0], h), run_walk(&sys[1], h), RelationMode::Preceq, Provenance::BlockStack)?
                }
                Method::SwapChain => chain_glue(&env, &env2, &partition, field, stream)?.walk_pair(h),
                Method::Envelope => unreachable!(),
            }
        }
    };
    emit(&pair_table(&pair), &args.output)?;
    Ok(status(&run_checks(&pair, &[])))
}

fn campaign(args: CampaignArgs) -> Result<ExitCode> {
    let base = CampaignConfig::new(args.family);
    let mut cfg = CampaignConfig {
        env: env_or_default(args.env.as_deref(), &base.env)?,
        env2: env_or_default(args.env2.as_deref(), &base.env2)?,
        trials: args.trials,
        horizon: args.horizon,
        seed: args.seed,
        eta: args.eta,
        beta: args.beta,
        ce1_n: args.n,
        timestamp: !args.no_timestamp,
        ..base
    };
    if let Some(p) = &args.partition {
        cfg.partition = load_partition(p)?;
    }
    if !args.checks.is_empty() {
        cfg.checks = args.checks;
    }
    let result = run_campaign(&cfg)?;
    if let Some(p) = &args.dump {
        let f = File::create(p).map_err(|source| LabError::Io { path: p.clone(), source })?;
        result.write_trial_dump(BufWriter::new(f))?;
    }
    let report = &result.report;
    let mut out = open_out(args.out.as_deref())?;
    match args.format {
        Format::Json => out.write_all(report.to_json().as_bytes())?,
        Format::Csv => {
            let mut t = Table::new(["check", "pass", "vacuous", "fail", "first_failing_trial"]);
            for c in &report.checks {
                let first = c.first_failure.as_ref().map_or(Value::Null, |f| json!(f.trial));
                t.push(vec![json!(c.statement.name()), json!(c.pass), json!(c.vacuous), json!(c.fail), first]);
            }
            t.write_csv(&mut out)?;
        }
    }
    out.flush()?;
    for c in report.checks.iter().filter(|c| c.fail > 0) {
        let f = c.first_failure.as_ref().expect("failures recorded");
        let what = match (&f.witness, &f.error) {
            (Some(w), _) => format!("t={} x={}: {}", w.t, w.x, w.detail),
            (None, Some(e)) => e.clone(),
            (None, None) => String::new(),
        };
        eprintln!("FAIL {}: {} of {} trials, first in trial {}: {}", c.statement.name(), c.fail, report.trials, f.trial, what);
    }
    Ok(if report.total_failures() == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn stats(args: StatsArgs) -> Result<ExitCode> {
    let env = load_env(&args.env)?;
    let s = speed_and_recurrence_stats(&env, args.trials, args.horizon, args.seed, args.after)?;
    let mut t = Table::new(["quantity", "mean", "std_err"]);
    t.push(vec![json!("speed"), json!(s.speed.mean), json!(s.speed.std_err)]);
    t.push(vec![json!("max_speed"), json!(s.max_speed.mean), json!(s.max_speed.std_err)]);
    t.push(vec![json!("returns_after"), json!(s.returns_after.mean), json!(s.returns_after.std_err)]);
    t.push(vec![json!("returning_fraction"), json!(s.returning_fraction), Value::Null]);
    emit(&t, &args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Counterexample(a) => counterexample(a),
        Command::Couple(a) => couple(a),
        Command::Campaign(a) => campaign(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(code) => code,
        Err(LabError::Core(
            e @ (arrowwalk::Error::ContractViolation { .. } | arrowwalk::Error::CouplingBroken { .. }),
        )) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
