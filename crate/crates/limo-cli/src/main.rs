//! Command-line front end: prove formulas, export derivations and
//! countermodels, verify models against the frame conditions, and run
//! corpus regressions.
//!
//! Exit codes: `prove` returns 0 (provable), 1 (unprovable), 2 (usage or
//! parse error), 3 (step budget exceeded); `check-model` returns 0 (all
//! checks hold), 1 (a property fails or the formula is not forced
//! somewhere), 2 (error); `corpus` returns 0 (all entries pass),
//! 1 (some entry fails), 2 (error).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use limo_core::calculus::LogicId;
use limo_core::formula::{parse_formula, Formula};
use limo_core::random::corpus as random_corpus;
use limo_core::search::{
    prove_with_budget, prove_minus, MinusVerdict, SearchError, SearchOutcome,
};
use limo_core::semantics::{
    brute_force_status, check_frame, forces, frame_properties_for, BruteForceStatus, Model,
};

#[derive(Parser)]
#[command(
    name = "limo",
    about = "Prover and countermodel generator for the local intuitionistic modal logics \
             LIK, LIKD and LIKT"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a formula; optionally print the derivation and countermodel.
    Prove(ProveArgs),
    /// Check a model file against the frame conditions and a formula.
    CheckModel(CheckModelArgs),
    /// Run a corpus of prove jobs, or generate one.
    Corpus(CorpusArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LogicArg {
    Lik,
    Likd,
    Likt,
}

impl From<LogicArg> for LogicId {
    fn from(arg: LogicArg) -> LogicId {
        match arg {
            LogicArg::Lik => LogicId::Lik,
            LogicArg::Likd => LogicId::Likd,
            LogicArg::Likt => LogicId::Likt,
        }
    }
}

fn parse_logic_name(name: &str) -> Result<LogicId, String> {
    match name {
        "lik" => Ok(LogicId::Lik),
        "likd" => Ok(LogicId::Likd),
        "likt" => Ok(LogicId::Likt),
        other => Err(format!("unknown logic {other:?} (expected lik, likd or likt)")),
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    /// The full calculus with the downward-interaction rule.
    Full,
    /// The restricted calculus without it (verdicts only).
    Minus,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Latex,
}

#[derive(Args)]
struct ProveArgs {
    /// The formula to decide (or use --file).
    formula: Option<String>,
    /// Read the formula from a file instead.
    #[arg(long, conflicts_with = "formula")]
    file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "lik")]
    logic: LogicArg,
    #[arg(long, value_enum, default_value = "full")]
    variant: VariantArg,
    /// Print the derivation tree.
    #[arg(long)]
    derivation: bool,
    /// Print the extracted countermodel (after re-verifying it).
    #[arg(long)]
    countermodel: bool,
    /// Output format for the derivation.
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Step budget for the search.
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
}

#[derive(Args)]
struct CheckModelArgs {
    /// Model file in the JSON format emitted by `prove --countermodel`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "lik")]
    logic: LogicArg,
    /// Formula whose forcing should be reported.
    #[arg(long)]
    formula: Option<String>,
    /// World to check the formula at (default: every world).
    #[arg(long)]
    world: Option<String>,
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus file: one `logic<TAB>expected<TAB>formula` entry per line,
    /// `#` comments allowed; expected is provable, unprovable or unknown.
    #[arg(long, required_unless_present = "generate", conflicts_with = "generate")]
    corpus: Option<PathBuf>,
    /// Instead of running a corpus, print one with this many entries.
    #[arg(long)]
    generate: Option<usize>,
    /// Seed for corpus generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Logic column for generated entries.
    #[arg(long, value_enum, default_value = "lik")]
    logic: LogicArg,
    /// Cross-check every verdict against the restricted calculus.
    #[arg(long)]
    check_equivalence: bool,
    /// Cross-check falsified verdicts against brute-force search up to
    /// this many worlds.
    #[arg(long, value_name = "WORLDS")]
    check_oracle: Option<usize>,
    /// Step budget per entry.
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn error(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    fn budget(message: impl Into<String>) -> Failure {
        Failure { code: 3, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prove(args) => cmd_prove(&args),
        Command::CheckModel(args) => cmd_check_model(&args),
        Command::Corpus(args) => cmd_corpus(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn parse_cli_formula(text: &str) -> Result<Formula, Failure> {
    parse_formula(text).map_err(|e| Failure::error(format!("cannot parse {text:?}: {e}")))
}

fn goal_formula(args: &ProveArgs) -> Result<Formula, Failure> {
    let text = match (&args.formula, &args.file) {
        (Some(text), None) => text.clone(),
        (None, Some(path)) => fs::read_to_string(path)
            .map_err(|e| Failure::error(format!("cannot read {}: {e}", path.display())))?,
        _ => return Err(Failure::error("provide a formula or --file")),
    };
    parse_cli_formula(text.trim())
}

fn search_failure(e: SearchError) -> Failure {
    match e {
        SearchError::BudgetExceeded { .. } => Failure::budget(e.to_string()),
        SearchError::Precondition(_) => Failure::error(e.to_string()),
    }
}

fn cmd_prove(args: &ProveArgs) -> Result<u8, Failure> {
    let goal = goal_formula(args)?;
    let logic = LogicId::from(args.logic);
    if matches!(args.variant, VariantArg::Minus) {
        if args.derivation || args.countermodel {
            return Err(Failure::error(
                "--derivation and --countermodel require --variant full",
            ));
        }
        return match prove_minus(&goal, logic, args.max_steps) {
            MinusVerdict::Provable => {
                println!("PROVABLE");
                Ok(0)
            }
            MinusVerdict::Unprovable => {
                println!("UNPROVABLE");
                Ok(1)
            }
            MinusVerdict::BudgetExhausted => {
                Err(Failure::budget("step budget exhausted".to_string()))
            }
        };
    }
    let outcome = prove_with_budget(&goal, logic, args.max_steps).map_err(search_failure)?;
    println!("{}", if outcome.is_provable() { "PROVABLE" } else { "UNPROVABLE" });
    if args.derivation {
        let d = outcome.derivation();
        match args.format {
            FormatArg::Text => print!("{}", d.to_text()),
            FormatArg::Json => println!(
                "{}",
                serde_json::to_string_pretty(&d.to_json()).expect("derivation JSON serializes")
            ),
            FormatArg::Latex => print!("{}", d.to_latex()),
        }
    }
    match outcome {
        SearchOutcome::Provable { .. } => Ok(0),
        SearchOutcome::Unprovable { countermodel, .. } => {
            if args.countermodel {
                verify_countermodel(&countermodel, &goal, logic)?;
                println!(
                    "{}",
                    serde_json::to_string_pretty(&countermodel.to_json())
                        .expect("model JSON serializes")
                );
                println!("countermodel verified: frame checks pass, goal not forced at r");
            }
            Ok(1)
        }
    }
}

/// The CLI never prints an unchecked model: frame properties for the
/// logic's class must hold and the goal must fail at the root world.
fn verify_countermodel(m: &Model, goal: &Formula, logic: LogicId) -> Result<(), Failure> {
    for check in check_frame(m, &frame_properties_for(logic)) {
        if !check.holds {
            return Err(Failure::error(format!(
                "extracted model violates {}: witness {:?}",
                check.property, check.witness
            )));
        }
    }
    let forced = forces(m, "r", goal).map_err(|e| Failure::error(e.to_string()))?;
    if forced {
        return Err(Failure::error("extracted model forces the goal at the root"));
    }
    Ok(())
}

fn cmd_check_model(args: &CheckModelArgs) -> Result<u8, Failure> {
    let text = fs::read_to_string(&args.model)
        .map_err(|e| Failure::error(format!("cannot read {}: {e}", args.model.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::error(format!("malformed model JSON: {e}")))?;
    let model = Model::from_json(&value).map_err(|e| Failure::error(e.to_string()))?;
    let logic = LogicId::from(args.logic);
    let mut all_hold = true;
    for check in check_frame(&model, &frame_properties_for(logic)) {
        if check.holds {
            println!("{}: ok", check.property);
        } else {
            all_hold = false;
            let witness = check.witness.unwrap_or_default().join(" ");
            println!("{}: violated ({witness})", check.property);
        }
    }
    if let Some(text) = &args.formula {
        let f = parse_cli_formula(text)?;
        let worlds: Vec<String> = match &args.world {
            Some(world) => {
                model.world_index(world).map_err(|e| Failure::error(e.to_string()))?;
                vec![world.clone()]
            }
            None => model.worlds().to_vec(),
        };
        for world in worlds {
            let forced = forces(&model, &world, &f).map_err(|e| Failure::error(e.to_string()))?;
            println!("{f} {} at {world}", if forced { "forced" } else { "not forced" });
            all_hold &= forced;
        }
    }
    Ok(u8::from(!all_hold))
}

enum Expected {
    Provable,
    Unprovable,
    Unknown,
}

struct CorpusEntry {
    line: usize,
    logic: LogicId,
    expected: Expected,
    formula: Formula,
}

fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, Failure> {
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [logic, expected, formula] = fields.as_slice() else {
            return Err(Failure::error(format!(
                "line {line_no}: expected `logic<TAB>expected<TAB>formula`"
            )));
        };
        let logic = parse_logic_name(logic)
            .map_err(|e| Failure::error(format!("line {line_no}: {e}")))?;
        let expected = match *expected {
            "provable" => Expected::Provable,
            "unprovable" => Expected::Unprovable,
            "unknown" => Expected::Unknown,
            other => {
                return Err(Failure::error(format!(
                    "line {line_no}: unknown expectation {other:?}"
                )))
            }
        };
        let formula = parse_formula(formula)
            .map_err(|e| Failure::error(format!("line {line_no}: {e}")))?;
        entries.push(CorpusEntry { line: line_no, logic, expected, formula });
    }
    Ok(entries)
}

fn cmd_corpus(args: &CorpusArgs) -> Result<u8, Failure> {
    if let Some(count) = args.generate {
        let logic = LogicId::from(args.logic);
        for f in random_corpus(args.seed, count) {
            println!("{}\tunknown\t{f}", logic.name().to_lowercase());
        }
        return Ok(0);
    }
    let path = args.corpus.as_ref().expect("clap requires --corpus without --generate");
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::error(format!("cannot read {}: {e}", path.display())))?;
    let entries = parse_corpus(&text)?;
    let mut failures = 0;
    for entry in &entries {
        let outcome = prove_with_budget(&entry.formula, entry.logic, args.max_steps)
            .map_err(search_failure)?;
        let provable = outcome.is_provable();
        let verdict = if provable { "provable" } else { "unprovable" };
        let mut problems = Vec::new();
        match entry.expected {
            Expected::Provable if !provable => problems.push("expected provable".to_string()),
            Expected::Unprovable if provable => problems.push("expected unprovable".to_string()),
            _ => {}
        }
        if args.check_equivalence {
            let minus = prove_minus(&entry.formula, entry.logic, args.max_steps);
            let agree = matches!(
                (provable, minus),
                (true, MinusVerdict::Provable) | (false, MinusVerdict::Unprovable)
            );
            if !agree {
                problems.push(format!("restricted calculus disagrees ({minus:?})"));
            }
        }
        if let Some(bound) = args.check_oracle {
            if let BruteForceStatus::Falsified { world, .. } =
                brute_force_status(&entry.formula, entry.logic, bound)
            {
                if provable {
                    problems.push(format!("brute force falsifies the formula at {world}"));
                }
            }
        }
        let status = if problems.is_empty() { "ok".to_string() } else { problems.join("; ") };
        println!(
            "line {}: {} {verdict} {} — {status}",
            entry.line,
            entry.logic.name().to_lowercase(),
            entry.formula
        );
        if !problems.is_empty() {
            failures += 1;
        }
    }
    println!("{} entries, {failures} failures", entries.len());
    Ok(u8::from(failures > 0))
}
