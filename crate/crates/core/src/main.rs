//! Command line front end: solve, oracle and selftest subcommands.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::bigint::BigInt;
use num::rational::BigRational;

use mucalc::engine::{Engine, EngineOptions, ExpansionOrder, Verdict};
use mucalc::formula::{monotonicity_lint, normalize, Formula, LogicSpec, ModalKind};
use mucalc::model::{parse_model, write_model};
use mucalc::onestep::OsOptions;
use mucalc::selftest;
use mucalc::tracking::TrackingNpa;
use mucalc::Error;

#[derive(Parser)]
#[command(
    name = "mucalc",
    about = "Satisfiability solver and model builder for arithmetic mu-calculi",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide satisfiability of a formula and optionally extract a model.
    Solve(SolveArgs),
    /// Brute-force relational model search up to a state bound.
    Oracle(OracleArgs),
    /// Run the randomized property suites.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct FormulaInput {
    /// The formula itself (see the grammar in the README).
    #[arg(value_name = "FORMULA", conflicts_with = "file", required_unless_present = "file")]
    formula: Option<String>,
    /// Read the formula from a file instead (use `-` for stdin).
    #[arg(long, short = 'f')]
    file: Option<String>,
}

impl FormulaInput {
    fn read(&self) -> Result<String, Error> {
        match (&self.formula, &self.file) {
            (Some(text), None) => Ok(text.clone()),
            (None, Some(path)) if path == "-" => {
                let mut buf = String::new();
                std::io::stdin().read_to_string(&mut buf)?;
                Ok(buf)
            }
            (None, Some(path)) => Ok(std::fs::read_to_string(path)?),
            _ => Err(Error::Contract("exactly one input source required".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Fifo,
    LabelSize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: FormulaInput,
    /// Logic: rel, graded, prob, or fusion:tag+tag (e.g. fusion:rel+prob).
    #[arg(long, default_value = "rel")]
    logic: String,
    /// Run propagation every N expansions (0 = only after full expansion).
    #[arg(long, default_value_t = 0)]
    solve_every: usize,
    /// Frontier expansion order.
    #[arg(long, value_enum, default_value = "fifo")]
    expansion_order: OrderArg,
    /// Cap on expanded automaton nodes.
    #[arg(long, default_value_t = 100_000)]
    max_nodes: usize,
    /// Resolution for the nonlinear probabilistic search, as a rational
    /// (e.g. 1/1048576).
    #[arg(long)]
    eps: Option<String>,
    /// Extract a model on SAT, verify it, and re-check the written file.
    #[arg(long)]
    verify: bool,
    /// Verify every pseudo-extension membership of the extracted model.
    #[arg(long)]
    deep_verify: bool,
    /// Write the extracted model to this path on SAT.
    #[arg(long, value_name = "PATH")]
    extract_model: Option<String>,
    /// Print run statistics (includes wall time).
    #[arg(long)]
    stats: bool,
    /// Print the tracking automaton transition table and exit.
    #[arg(long)]
    dump_npa: bool,
    /// Print the expanded co-determinized automaton after solving.
    #[arg(long)]
    dump_dpa: bool,
    /// Warn about probabilistic polynomials that fail a sampled
    /// monotonicity check on [0,1]^n.
    #[arg(long)]
    lint_monotonicity: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: FormulaInput,
    /// Maximum number of model states to enumerate.
    #[arg(long, default_value_t = 3)]
    max_states: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Determinize,
    Onestep,
    Fixgame,
    Mcgame,
    OracleAgreement,
    NormalizePair,
}

#[derive(Args)]
struct SelftestArgs {
    /// Which suite to run.
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    /// Number of cases (per suite instance).
    #[arg(long, default_value_t = 200)]
    cases: usize,
    /// Random seed; the MUCALC_SEED environment variable overrides this.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Logic for the onestep suite: rel, graded or prob (default: all).
    #[arg(long)]
    logic: Option<String>,
}

fn parse_eps(text: &str) -> Result<BigRational, Error> {
    let err = || Error::Contract(format!("invalid resolution `{text}`"));
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        if d == BigInt::from(0) {
            return Err(err());
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = text.parse().map_err(|_| err())?;
        Ok(BigRational::from_integer(n))
    }
}

fn lint_polynomials(f: &Formula) {
    match f {
        Formula::Modal(op, args) => {
            if let ModalKind::DiaPoly(p) | ModalKind::BoxPoly(p) = &op.kind {
                if op.logic == mucalc::Logic::Probabilistic {
                    if let Some((a, b)) = monotonicity_lint(p) {
                        eprintln!(
                            "warning: polynomial {p} is not monotone on the sampled grid \
                             (decreases from {a:?} to {b:?}); verdicts assume declared monotonicity"
                        );
                    }
                }
            }
            args.iter().for_each(lint_polynomials);
        }
        Formula::And(l, r) | Formula::Or(l, r) => {
            lint_polynomials(l);
            lint_polynomials(r);
        }
        Formula::Mu(_, b) | Formula::Nu(_, b) | Formula::Not(b) => lint_polynomials(b),
        _ => {}
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<u8, Error> {
    let logic = LogicSpec::parse(&args.logic).map_err(Error::Contract)?;
    let text = args.input.read()?;
    let parsed = mucalc::parse::parse(text.trim(), &logic)?;
    if args.lint_monotonicity {
        lint_polynomials(&parsed);
    }
    let chi = normalize(&parsed);

    if args.dump_npa {
        let table = mucalc::closure::fl_closure(&chi);
        print!("{}", TrackingNpa::new(&table).dump());
        return Ok(0);
    }

    let mut os_options = OsOptions::default();
    if let Some(eps) = &args.eps {
        os_options.eps = parse_eps(eps)?;
    }
    let opts = EngineOptions {
        solve_every: args.solve_every,
        expansion_order: match args.expansion_order {
            OrderArg::Fifo => ExpansionOrder::Fifo,
            OrderArg::LabelSize => ExpansionOrder::LabelSize,
        },
        max_nodes: args.max_nodes,
        os_options,
        verify: args.verify || args.deep_verify,
        deep_verify: args.deep_verify,
        extract_model: args.extract_model.is_some(),
    };
    let mut engine = Engine::new(&chi, logic.clone(), opts)?;
    let result = engine.run()?;

    println!("{}", result.verdict);
    if result.incomplete_backend {
        println!("note: nonlinear probabilistic queries hit the resolution limit");
    }
    if args.stats {
        let s = &result.stats;
        println!("closure size: {}", s.closure_size);
        println!("alternation depth: {}", s.alternation_depth);
        println!("expanded nodes: {}", s.expanded_nodes);
        println!("discovered nodes: {}", s.discovered_nodes);
        println!("backend calls: {}", s.backend_calls);
        println!("fixpoint sweeps: {}", s.fixpoint_sweeps);
        println!("label checks: {}", s.label_checks);
        println!("wall time: {:?}", s.wall);
    }
    if args.dump_dpa {
        print!("{}", engine.dump_dpa());
    }
    if let Some(model) = &result.model {
        if let Some(path) = &args.extract_model {
            let serialized = write_model(model, &logic);
            std::fs::write(path, &serialized)?;
            println!("model written to {path} ({} states)", model.num_states);
            if args.verify || args.deep_verify {
                // Round trip: re-read, re-serialize bit-exactly, re-check.
                let readback = std::fs::read_to_string(path)?;
                let (parsed_model, _) = parse_model(&readback, Some(&logic))?;
                if write_model(&parsed_model, &logic) != serialized {
                    return Err(Error::Model("model file round trip differs".into()));
                }
                if !mucalc::model::verify_truth(&parsed_model, &chi, false) {
                    return Err(Error::Model("re-read model fails verification".into()));
                }
                println!("model verified (root satisfies the formula)");
            }
        } else if args.verify || args.deep_verify {
            println!("model verified (root satisfies the formula)");
        }
    }

    Ok(match result.verdict {
        Verdict::Sat => 10,
        Verdict::Unsat => 20,
        Verdict::Unknown => 30,
    })
}

fn cmd_oracle(args: &OracleArgs) -> Result<u8, Error> {
    let logic = LogicSpec::parse("rel").unwrap();
    let text = args.input.read()?;
    let chi = normalize(&mucalc::parse::parse(text.trim(), &logic)?);
    match selftest::relational_oracle(&chi, args.max_states) {
        Some(model) => {
            println!(
                "model found with {} states (root {})",
                model.num_states, model.root
            );
            print!("{}", write_model(&model, &logic));
            Ok(0)
        }
        None => {
            println!("none up to bound {}", args.max_states);
            Ok(0)
        }
    }
}

fn cmd_selftest(args: &SelftestArgs) -> Result<u8, Error> {
    let seed = std::env::var("MUCALC_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(args.seed);
    let cases = args.cases;
    let mut reports = Vec::new();
    let logics = match args.logic.as_deref() {
        Some("rel") => vec![mucalc::Logic::Relational],
        Some("graded") => vec![mucalc::Logic::Graded],
        Some("prob") => vec![mucalc::Logic::Probabilistic],
        Some(other) => return Err(Error::Contract(format!("unknown logic `{other}`"))),
        None => vec![
            mucalc::Logic::Relational,
            mucalc::Logic::Graded,
            mucalc::Logic::Probabilistic,
        ],
    };
    match args.suite {
        SuiteArg::All => {
            reports.push(selftest::suite_determinize(seed, 10, cases / 10));
            for l in &logics {
                reports.push(selftest::suite_onestep(seed, *l, cases));
            }
            reports.push(selftest::suite_fixpoint_game(seed, cases.min(50)));
            reports.push(selftest::suite_mcgame(seed, 10, 5));
            reports.push(selftest::suite_solver_vs_oracle(seed, cases.min(100), 12, 3));
            reports.push(selftest::suite_normalize_pair(seed, cases));
        }
        SuiteArg::Determinize => {
            reports.push(selftest::suite_determinize(seed, 20, cases));
        }
        SuiteArg::Onestep => {
            for l in &logics {
                reports.push(selftest::suite_onestep(seed, *l, cases));
            }
        }
        SuiteArg::Fixgame => reports.push(selftest::suite_fixpoint_game(seed, cases.min(50))),
        SuiteArg::Mcgame => reports.push(selftest::suite_mcgame(seed, cases.min(20), 5)),
        SuiteArg::OracleAgreement => {
            reports.push(selftest::suite_solver_vs_oracle(seed, cases, 12, 3))
        }
        SuiteArg::NormalizePair => reports.push(selftest::suite_normalize_pair(seed, cases)),
    }
    let mut failed = false;
    for r in &reports {
        println!("{r}");
        for f in r.failures.iter().take(5) {
            println!("  FAIL {f}");
        }
        failed |= !r.passed();
    }
    Ok(if failed { 1 } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Selftest(args) => cmd_selftest(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
