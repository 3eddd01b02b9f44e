use anyhow::{bail, Context, Result};
use ckmu::denotational::{eval, DiamondClause};
use ckmu::fuzz::{fuzz, FuzzConfig};
use ckmu::game::{build_arena, build_arena_all, solve, Player};
use ckmu::model::{close, ClosureOptions, Env, ModelDocument, ModelError};
use ckmu::proofsys::{check_progress, prove, Budget, Progress, ProofGraph, Verdict};
use ckmu::{analyze, parse, LogicVariant, Model, WellNamedSentence, WorldSet};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Model checking, parity games and cyclic proof search for the constructive
/// modal mu-calculus.
#[derive(Parser)]
#[command(name = "ckmu", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a model document, close it and validate it.
    CheckModel {
        file: PathBuf,
        #[command(flatten)]
        load: Load,
    },
    /// Print the truth set of a sentence.
    Eval {
        file: PathBuf,
        #[arg(long)]
        formula: String,
        /// Exit 0 iff this world satisfies the formula.
        #[arg(long)]
        world: Option<String>,
        #[command(flatten)]
        load: Load,
    },
    /// Solve the evaluation game at one world.
    Game {
        file: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        world: String,
        /// Write the arena, one position per line.
        #[arg(long)]
        dump_arena: Option<PathBuf>,
        #[command(flatten)]
        load: Load,
    },
    /// Search for a cyclic proof or a countermodel.
    Prove {
        #[arg(long)]
        formula: String,
        #[arg(long, default_value = "ck")]
        logic: LogicVariant,
        #[arg(long, default_value_t = Budget::default().nodes as u64, value_parser = clap::value_parser!(u64).range(1..))]
        budget_nodes: u64,
        #[arg(long, default_value_t = Budget::default().labels as u64, value_parser = clap::value_parser!(u64).range(1..))]
        budget_labels: u64,
        #[arg(long)]
        emit_proof: Option<PathBuf>,
        #[arg(long)]
        emit_countermodel: Option<PathBuf>,
    },
    /// Compare evaluation and game outcomes at every world.
    Diff {
        file: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        world: String,
        #[command(flatten)]
        load: Load,
    },
    /// Random differential testing of evaluator, game solver and prover.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value = "ck")]
        logic: LogicVariant,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, hide = true)]
        inject_diamond_bug: bool,
    },
}

#[derive(Args)]
struct Load {
    #[arg(long, default_value = "ck")]
    logic: LogicVariant,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    close_pre: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    close_heredity: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set, value_name = "BOOL")]
    close_fallible: bool,
}

impl Load {
    fn options(&self) -> ClosureOptions {
        ClosureOptions {
            pre: self.close_pre,
            heredity: self.close_heredity,
            fallible: self.close_fallible,
        }
    }

    fn document(&self, path: &Path) -> Result<ModelDocument> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(ModelDocument::from_json(&text)?)
    }

    fn model(&self, path: &Path) -> Result<Model> {
        Ok(close(&self.document(path)?, self.options(), self.logic)?)
    }
}

fn sentence(text: &str) -> Result<WellNamedSentence> {
    let f = parse(text).with_context(|| format!("parsing {text:?}"))?;
    Ok(analyze(&f)?)
}

fn world(m: &Model, name: &str) -> Result<usize> {
    m.world_index(name)
        .with_context(|| format!("no world named {name:?}"))
}

fn listing(m: &Model, s: &WorldSet) -> String {
    let mut names = m.names_of(s);
    names.sort();
    format!("{{{}}}", names.join(", "))
}

fn status(positive: bool) -> ExitCode {
    ExitCode::from(if positive { 0 } else { 1 })
}

fn check_model(file: &Path, load: &Load) -> Result<ExitCode> {
    match close(&load.document(file)?, load.options(), load.logic) {
        Ok(m) => {
            println!("valid {} model with {} worlds", load.logic, m.len());
            Ok(status(true))
        }
        Err(ModelError::ValidationFailed(vs)) => {
            println!("invalid {} model", load.logic);
            for v in vs {
                println!("  {v}");
            }
            Ok(status(false))
        }
        Err(e) => Err(e.into()),
    }
}

fn run_eval(file: &Path, formula: &str, w: Option<&str>, load: &Load) -> Result<ExitCode> {
    let m = load.model(file)?;
    let s = sentence(formula)?;
    let truth = eval(&m, s.formula(), &Env::new())?;
    println!("{}", listing(&m, &truth));
    match w {
        Some(w) => Ok(status(truth.contains(world(&m, w)?))),
        None => Ok(status(true)),
    }
}

fn run_game(
    file: &Path,
    formula: &str,
    w: &str,
    dump: Option<&Path>,
    load: &Load,
) -> Result<ExitCode> {
    let m = load.model(file)?;
    let s = sentence(formula)?;
    let arena = build_arena(&m, &s, world(&m, w)?)?;
    let winner = solve(&arena).winner[arena.initial()[0]];
    if let Some(path) = dump {
        std::fs::write(path, arena.dump())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    println!("winner: {winner}");
    println!("positions: {}", arena.len());
    Ok(status(winner == Player::I))
}

fn run_diff(file: &Path, formula: &str, w: &str, load: &Load) -> Result<ExitCode> {
    let m = load.model(file)?;
    let s = sentence(formula)?;
    let w = world(&m, w)?;
    let truth = eval(&m, s.formula(), &Env::new())?;
    let arena = build_arena_all(&m, &s)?;
    let sol = solve(&arena);
    let mut mismatches = 0;
    for v in 0..m.len() {
        let game = sol.winner[arena.initial()[v]] == Player::I;
        if game != truth.contains(v) {
            mismatches += 1;
            println!(
                "mismatch at {}: eval {}, game {game}",
                m.world_name(v),
                truth.contains(v)
            );
        }
    }
    let game = sol.winner[arena.initial()[w]] == Player::I;
    println!(
        "{}: eval {}, game {game}",
        m.world_name(w),
        truth.contains(w)
    );
    println!("mismatches: {mismatches}");
    Ok(status(mismatches == 0))
}

/// Writes a proof only if the written text reads back as an accepted proof
/// of the goal.
fn emit_proof(
    g: &ProofGraph,
    goal: &WellNamedSentence,
    variant: LogicVariant,
    path: &Path,
) -> Result<()> {
    let text = g.to_text();
    let back = ProofGraph::from_text(&text, goal, variant)?;
    back.validate(Some(goal))?;
    match check_progress(&back)? {
        Progress::Accept => {}
        Progress::Reject(l) => {
            bail!("refusing to write a proof that fails the trace condition: {l:?}")
        }
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run_prove(
    formula: &str,
    logic: LogicVariant,
    budget: Budget,
    proof_path: Option<&Path>,
    model_path: Option<&Path>,
) -> Result<ExitCode> {
    let s = sentence(formula)?;
    match prove(&s, logic, budget) {
        Verdict::Proved(g) => {
            if let Some(path) = proof_path {
                emit_proof(&g, &s, logic, path)?;
            }
            println!("proved ({} nodes)", g.len());
            Ok(ExitCode::from(0))
        }
        Verdict::Refuted(r) => {
            let doc = serde_json::to_string_pretty(&r.model.to_document())?;
            if let Some(path) = model_path {
                std::fs::write(path, &doc)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            println!("refuted at {}", r.model.world_name(r.world));
            println!("{doc}");
            Ok(ExitCode::from(1))
        }
        Verdict::Unknown(report) => {
            println!(
                "unknown after {} nodes and {} labels: {}",
                report.nodes, report.max_labels, report.reason
            );
            Ok(ExitCode::from(3))
        }
    }
}

fn run_fuzz(
    seed: u64,
    cases: usize,
    logic: LogicVariant,
    workers: usize,
    inject: bool,
) -> Result<ExitCode> {
    let mut cfg = FuzzConfig::new(seed, cases, logic);
    cfg.workers = workers;
    if inject {
        cfg.diamond = DiamondClause::Local;
    }
    let r = fuzz(&cfg);
    println!(
        "{} cases: {} proved, {} refuted, {} unknown, {} discrepancies",
        r.cases,
        r.proved,
        r.refuted,
        r.unknown,
        r.discrepancies.len()
    );
    for d in &r.discrepancies {
        println!("{d}");
    }
    Ok(status(r.is_clean()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::CheckModel { file, load } => check_model(&file, &load),
        Command::Eval {
            file,
            formula,
            world,
            load,
        } => run_eval(&file, &formula, world.as_deref(), &load),
        Command::Game {
            file,
            formula,
            world,
            dump_arena,
            load,
        } => run_game(&file, &formula, &world, dump_arena.as_deref(), &load),
        Command::Prove {
            formula,
            logic,
            budget_nodes,
            budget_labels,
            emit_proof,
            emit_countermodel,
        } => run_prove(
            &formula,
            logic,
            Budget {
                nodes: budget_nodes as usize,
                labels: budget_labels as usize,
            },
            emit_proof.as_deref(),
            emit_countermodel.as_deref(),
        ),
        Command::Diff {
            file,
            formula,
            world,
            load,
        } => run_diff(&file, &formula, &world, &load),
        Command::Fuzz {
            seed,
            cases,
            logic,
            workers,
            inject_diamond_bug,
        } => run_fuzz(seed, cases, logic, workers, inject_diamond_bug),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
