//! The `netcontest` command line. Exit codes: 0 success, 1 invalid input,
//! 2 solver or certification failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use netcontest::design::{
    design_max_effort_equal, design_max_effort_general, design_max_welfare, verify_design, DesignedNetworks,
};
use netcontest::endogenous::{endogenous_equilibrium, verify_endogenous};
use netcontest::oracle::{br_dynamics, compare, TruncationSchedule, Verdict, DEFAULT_MAX_ROUNDS};
use netcontest::repro::{default_corpus, find_cases, run_corpus, CorpusOptions};
use netcontest::sweep::{sweep, SweepSpec};
use netcontest::{solve_with, validate_game, ContestGame, SolveOptions};
use serde::de::DeserializeOwned;
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

/// Environment variable overriding the default certification tolerance.
pub const TOL_ENV: &str = "NETCONTEST_TOL";

const ORACLE_TOL: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "netcontest", version, about = "Equilibria of multi-battlefield contests with spillover networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a game file for invariant violations and singular matrices.
    Validate { game: PathBuf },
    /// Compute a certified equilibrium.
    Solve {
        game: PathBuf,
        /// Cross-check with best-response dynamics.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the best-response trace as CSV (implies --oracle).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Build networks for a design objective and certify them.
    #[command(subcommand)]
    Design(DesignCommand),
    /// Out-star equilibrium when players also choose their networks.
    Endogenous {
        game: PathBuf,
        /// Hub of player 1 (1-based).
        #[arg(long)]
        hub1: usize,
        /// Hub of player 2 (1-based).
        #[arg(long)]
        hub2: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun the corpus of worked examples.
    Repro {
        /// Only cases whose id starts with this.
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
        /// Skip best-response cross-checks.
        #[arg(long)]
        no_oracle: bool,
        /// List case ids and exit.
        #[arg(long)]
        list: bool,
    },
    /// Solve along a parameter grid and write a CSV table.
    Sweep {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 uses every core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

#[derive(Debug, Args)]
struct DesignArgs {
    /// Unit costs `c1,c2` with c1 <= c2.
    #[arg(long, value_delimiter = ',', required = true)]
    costs: Vec<f64>,
    /// Battlefield values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Contest exponent used to certify the design.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum DesignCommand {
    /// Equal prizes: complete networks maximizing total effort.
    MaxEffort {
        #[command(flatten)]
        args: DesignArgs,
        #[arg(long, default_value_t = 0.0)]
        lambda1: f64,
    },
    /// Unequal prizes: block networks over pairs and a triple.
    General {
        #[command(flatten)]
        args: DesignArgs,
        /// One weight per group, comma separated.
        #[arg(long, value_delimiter = ',')]
        lambda1: Option<Vec<f64>>,
    },
    /// Networks pushing combined effort below epsilon.
    MaxWelfare {
        #[command(flatten)]
        args: DesignArgs,
        #[arg(long)]
        epsilon: f64,
    },
}

enum Failure {
    Input(anyhow::Error),
    Solver(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn solver<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Solver(e.into())
}

/// Parses a JSON file, reporting the failing field path with line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        anyhow!("{}: field `{field}` (line {}, column {}): {inner}", path.display(), inner.line(), inner.column())
    })
}

fn read_game(path: &Path) -> Result<ContestGame, Failure> {
    let game: ContestGame = read_json(path).map_err(input)?;
    let report = validate_game(&game);
    if !report.is_valid() {
        return Err(input(anyhow!("{}: {}", path.display(), report.violations.join("; "))));
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(game)
}

/// `--tol`, else `NETCONTEST_TOL`, else `None`.
fn tolerance(flag: Option<f64>) -> Result<Option<f64>, Failure> {
    let tol = match flag {
        Some(t) => Some(t),
        None => match std::env::var(TOL_ENV) {
            Ok(s) => Some(s.trim().parse::<f64>().map_err(|e| input(anyhow!("{TOL_ENV}={s:?}: {e}")))?),
            Err(_) => None,
        },
    };
    match tol {
        Some(t) if !(t.is_finite() && t >= 0.0) => Err(input(anyhow!("tolerance must be nonnegative, got {t}"))),
        t => Ok(t),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).map_err(input),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json values serialize")
}

fn validate(path: &Path) -> Outcome {
    let game: ContestGame = read_json(path).map_err(input)?;
    let report = validate_game(&game);
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if report.is_valid() {
        Ok(())
    } else {
        Err(input(anyhow!("{} violation(s): {}", report.violations.len(), report.violations.join("; "))))
    }
}

fn solve_cmd(path: &Path, oracle: bool, tol: Option<f64>, out: Option<&Path>, trace: Option<&Path>) -> Outcome {
    let game = read_game(path)?;
    let opts = SolveOptions { tol: tolerance(tol)?, ..SolveOptions::default() };
    let report = solve_with(&game, &opts).map_err(solver)?;
    if !(oracle || trace.is_some()) {
        return emit(&report.to_json(), out);
    }
    let run = br_dynamics(&game, &TruncationSchedule::for_game(&game), DEFAULT_MAX_ROUNDS);
    if let Some(t) = trace {
        fs::write(t, run.trace_csv()).with_context(|| format!("cannot write {}", t.display())).map_err(input)?;
    }
    let agreement = compare(&game, &report, &run, ORACLE_TOL);
    let verdict = agreement.verdict;
    let text = pretty(&json!({ "report": report, "oracle": agreement }));
    emit(&text, out)?;
    if verdict == Verdict::Agree {
        Ok(())
    } else {
        Err(solver(anyhow!("oracle verdict {verdict:?}")))
    }
}

fn design_cmd(cmd: DesignCommand) -> Outcome {
    let costs = match &cmd {
        DesignCommand::MaxEffort { args, .. } | DesignCommand::General { args, .. } | DesignCommand::MaxWelfare { args, .. } => {
            &args.costs
        }
    };
    if costs.len() != 2 {
        return Err(input(anyhow!("--costs takes exactly two values, got {}", costs.len())));
    }
    let (args, built): (DesignArgs, netcontest::Result<DesignedNetworks>) = match cmd {
        DesignCommand::MaxEffort { args, lambda1 } => {
            let d = design_max_effort_equal(args.costs[0], args.costs[1], &args.values, lambda1);
            (args, d)
        }
        DesignCommand::General { args, lambda1 } => {
            let d = design_max_effort_general(args.costs[0], args.costs[1], &args.values, lambda1.as_deref());
            (args, d)
        }
        DesignCommand::MaxWelfare { args, epsilon } => {
            let d = design_max_welfare(args.costs[0], args.costs[1], args.gamma, &args.values, epsilon);
            (args, d)
        }
    };
    let networks = built.map_err(input)?;
    let (c1, c2) = (args.costs[0], args.costs[1]);
    let verification = verify_design(&networks, c1, c2, args.gamma, &args.values).map_err(solver)?;
    let text = pretty(&json!({ "design": networks, "verification": verification }));
    emit(&text, args.out.as_deref())?;
    if verification.passed() {
        Ok(())
    } else {
        Err(solver(anyhow!("design not certified:\n{verification}")))
    }
}

fn endogenous_cmd(path: &Path, hub1: usize, hub2: usize, out: Option<&Path>) -> Outcome {
    let game: ContestGame = read_json(path).map_err(input)?;
    let m = game.values.len();
    for (name, hub) in [("hub1", hub1), ("hub2", hub2)] {
        if hub == 0 || hub > m {
            return Err(input(anyhow!("--{name} must lie in 1..={m}, got {hub}")));
        }
    }
    let [c1, c2] = game.costs;
    let profile = endogenous_equilibrium(&game.values, c1, c2, game.gamma, hub1 - 1, hub2 - 1).map_err(input)?;
    let verification = verify_endogenous(&profile, &game.values, c1, c2, game.gamma).map_err(solver)?;
    let text = pretty(&json!({ "profile": profile, "verification": verification }));
    emit(&text, out)?;
    if verification.passed() {
        Ok(())
    } else {
        Err(solver(anyhow!("profile not verified:\n{verification}")))
    }
}

fn repro_cmd(case: Option<&str>, tol: Option<f64>, as_json: bool, no_oracle: bool, list: bool) -> Outcome {
    if list {
        print!("{}", netcontest::repro::list_cases());
        return Ok(());
    }
    let cases = match case {
        Some(prefix) => find_cases(prefix),
        None => default_corpus(),
    };
    if cases.is_empty() {
        return Err(input(anyhow!("no case id starts with {:?}", case.unwrap_or_default())));
    }
    let mut opts = CorpusOptions { oracle: !no_oracle, ..CorpusOptions::default() };
    if let Some(t) = tolerance(tol)? {
        opts.tol = t;
    }
    let report = run_corpus(&cases, &opts);
    if as_json {
        println!("{}", report.to_json());
    } else {
        print!("{report}");
    }
    if report.passed() {
        Ok(())
    } else {
        Err(solver(anyhow!("corpus failed at tolerance {:e}", opts.tol)))
    }
}

fn sweep_cmd(path: &Path, out: Option<&Path>, jobs: usize) -> Outcome {
    let mut spec: SweepSpec = read_json(path).map_err(input)?;
    if spec.tol.is_none() {
        spec.tol = tolerance(None)?;
    }
    spec.validate().map_err(input)?;
    let table = sweep(&spec, jobs).map_err(input)?;
    let failed = table.rows.iter().filter(|r| r.report.is_err()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} grid points failed to solve", table.rows.len());
    }
    match out {
        Some(p) => fs::write(p, table.to_csv()).with_context(|| format!("cannot write {}", p.display())).map_err(input),
        None => {
            print!("{}", table.to_csv());
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { game } => validate(&game),
        Command::Solve { game, oracle, tol, out, trace } => {
            solve_cmd(&game, oracle, tol, out.as_deref(), trace.as_deref())
        }
        Command::Design(cmd) => design_cmd(cmd),
        Command::Endogenous { game, hub1, hub2, out } => endogenous_cmd(&game, hub1, hub2, out.as_deref()),
        Command::Repro { case, tol, json, no_oracle, list } => repro_cmd(case.as_deref(), tol, json, no_oracle, list),
        Command::Sweep { spec, out, jobs } => sweep_cmd(&spec, out.as_deref(), jobs),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e:#}");
            EXIT_SOLVER
        }
    }
}
