//! Differential testing of the evaluator, the game solver and the prover on
//! seeded random cases.

use crate::denotational::{eval_with, DiamondClause, EvalOptions};
use crate::game::{build_arena_all, solve, Player};
use crate::model::{
    close, random_model, validate, ClosureOptions, Env, LogicVariant, Model, RandomParams,
};
use crate::proofsys::{prove, Budget, Verdict};
use crate::syntax::{analyze, Formula, WellNamedSentence};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub seed: u64,
    pub cases: usize,
    pub variant: LogicVariant,
    /// Formula nesting depth.
    pub depth: usize,
    pub max_worlds: usize,
    pub props: Vec<String>,
    /// Budget for the prover on each case; `None` skips the prover.
    pub budget: Option<Budget>,
    /// Evaluator clause for `<>`; anything but the default is a planted bug.
    pub diamond: DiamondClause,
    /// Worker threads; `0` lets the pool decide.
    pub workers: usize,
}

impl FuzzConfig {
    pub fn new(seed: u64, cases: usize, variant: LogicVariant) -> Self {
        FuzzConfig {
            seed,
            cases,
            variant,
            depth: 4,
            max_worlds: 4,
            props: vec!["p".into(), "q".into()],
            budget: Some(Budget {
                nodes: 300,
                labels: 8,
            }),
            diamond: DiamondClause::Persistent,
            workers: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Discrepancy {
    /// A generated model fails validation for the variant.
    InvalidModel {
        case: usize,
        model: Model,
        message: String,
    },
    /// Evaluator and game solver disagree at `world`.
    EvalGame {
        case: usize,
        formula: Formula,
        model: Model,
        world: usize,
        eval: bool,
    },
    /// The prover proved a formula that fails in the sampled model.
    ProvedButFalsified {
        case: usize,
        formula: Formula,
        model: Model,
        world: usize,
    },
    /// The prover's countermodel does not refute the formula.
    BadRefutation {
        case: usize,
        formula: Formula,
        message: String,
    },
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let doc = |m: &Model| serde_json::to_string(&m.to_document()).expect("documents serialize");
        match self {
            Discrepancy::InvalidModel {
                case,
                model,
                message,
            } => {
                write!(f, "case {case}: invalid model {}: {message}", doc(model))
            }
            Discrepancy::EvalGame {
                case,
                formula,
                model,
                world,
                eval,
            } => write!(
                f,
                "case {case}: eval says {eval} but the game disagrees for {formula} at {} in {}",
                model.world_name(*world),
                doc(model)
            ),
            Discrepancy::ProvedButFalsified {
                case,
                formula,
                model,
                world,
            } => write!(
                f,
                "case {case}: proved {formula} but it fails at {} in {}",
                model.world_name(*world),
                doc(model)
            ),
            Discrepancy::BadRefutation {
                case,
                formula,
                message,
            } => {
                write!(
                    f,
                    "case {case}: refutation of {formula} is wrong: {message}"
                )
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct FuzzReport {
    pub cases: usize,
    pub proved: usize,
    pub refuted: usize,
    pub unknown: usize,
    pub discrepancies: Vec<Discrepancy>,
}

impl FuzzReport {
    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// A random well-named sentence over `props`: every variable occurs at most
/// once, positively and under a modality.
pub fn random_formula(rng: &mut impl Rng, depth: usize, props: &[String]) -> Formula {
    let mut g = Gen {
        rng,
        props,
        vars: Vec::new(),
        next: 0,
    };
    g.formula(depth, false)
}

struct Var {
    name: String,
    flipped: bool,
    guarded: bool,
    used: bool,
}

struct Gen<'a, R> {
    rng: &'a mut R,
    props: &'a [String],
    vars: Vec<Var>,
    next: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn leaf(&mut self, flipped: bool) -> Formula {
        let free: Vec<usize> = (0..self.vars.len())
            .filter(|&i| {
                let v = &self.vars[i];
                !v.used && v.guarded && v.flipped == flipped
            })
            .collect();
        if !free.is_empty() && self.rng.gen_bool(0.6) {
            let i = *free.choose(self.rng).unwrap();
            self.vars[i].used = true;
            return Formula::var(&self.vars[i].name);
        }
        match self.rng.gen_range(0..10) {
            0 => Formula::Bottom,
            1 => Formula::top(),
            _ => Formula::prop(
                self.props
                    .choose(self.rng)
                    .expect("at least one proposition"),
            ),
        }
    }

    fn formula(&mut self, depth: usize, flipped: bool) -> Formula {
        if depth == 0 {
            return self.leaf(flipped);
        }
        match self.rng.gen_range(0..9) {
            0 => self.leaf(flipped),
            1 => Formula::and(
                self.formula(depth - 1, flipped),
                self.formula(depth - 1, flipped),
            ),
            2 => Formula::or(
                self.formula(depth - 1, flipped),
                self.formula(depth - 1, flipped),
            ),
            3 => {
                let a = self.formula(depth - 1, !flipped);
                Formula::implies(a, self.formula(depth - 1, flipped))
            }
            4 => Formula::boxed(self.modal(depth, flipped)),
            5 => Formula::dia(self.modal(depth, flipped)),
            _ => {
                let name = format!("X{}", self.next);
                self.next += 1;
                self.vars.push(Var {
                    name: name.clone(),
                    flipped,
                    guarded: false,
                    used: false,
                });
                let body = self.formula(depth - 1, flipped);
                self.vars.pop();
                if self.rng.gen_bool(0.5) {
                    Formula::mu(&name, body)
                } else {
                    Formula::nu(&name, body)
                }
            }
        }
    }

    fn modal(&mut self, depth: usize, flipped: bool) -> Formula {
        let saved: Vec<bool> = self.vars.iter().map(|v| v.guarded).collect();
        for v in &mut self.vars {
            v.guarded = true;
        }
        let f = self.formula(depth - 1, flipped);
        for (v, g) in self.vars.iter_mut().zip(saved) {
            v.guarded = g;
        }
        f
    }
}

/// A seeded random model of `variant` with `1..=max_worlds` worlds.
pub fn random_case_model(
    rng: &mut impl Rng,
    max_worlds: usize,
    props: &[String],
    variant: LogicVariant,
) -> Model {
    let params = RandomParams {
        worlds: rng.gen_range(1..=max_worlds.max(1)),
        pre_density: rng.gen_range(0.1..0.5),
        rel_density: rng.gen_range(0.1..0.6),
        fallible_density: 0.15,
        val_density: 0.5,
        props: props.to_vec(),
        ..RandomParams::default()
    };
    random_model(rng.gen(), &params, variant).expect("small models are found quickly")
}

fn game_winners(m: &Model, s: &WellNamedSentence) -> Vec<bool> {
    let arena = build_arena_all(m, s).expect("closed sentences have arenas");
    let sol = solve(&arena);
    arena
        .initial()
        .iter()
        .map(|&i| sol.winner[i] == Player::I)
        .collect()
}

fn eval_game_mismatch(
    m: &Model,
    s: &WellNamedSentence,
    diamond: DiamondClause,
) -> Option<(usize, bool)> {
    let truth = eval_with(m, s.formula(), &Env::new(), EvalOptions { diamond })
        .expect("closed sentences evaluate");
    let game = game_winners(m, s);
    (0..m.len())
        .find(|&w| truth.contains(w) != game[w])
        .map(|w| (w, truth.contains(w)))
}

/// Smaller formula and model still showing an eval/game mismatch.
pub fn shrink(
    formula: &Formula,
    model: &Model,
    variant: LogicVariant,
    diamond: DiamondClause,
) -> (Formula, Model) {
    let fails = |f: &Formula, m: &Model| {
        analyze(f)
            .ok()
            .is_some_and(|s| eval_game_mismatch(m, &s, diamond).is_some())
    };
    let (mut f, mut m) = (formula.clone(), model.clone());
    loop {
        let smaller_f = candidates(&f).into_iter().find(|c| fails(c, &m));
        if let Some(c) = smaller_f {
            f = c;
            continue;
        }
        let smaller_m = (0..m.len())
            .filter_map(|w| drop_world(&m, w, variant))
            .find(|c| fails(&f, c));
        match smaller_m {
            Some(c) => m = c,
            None => return (f, m),
        }
    }
}

/// Each subformula replaced by one of its children or a constant.
fn candidates(f: &Formula) -> Vec<Formula> {
    let mut out: Vec<Formula> = f.children().into_iter().cloned().collect();
    if !matches!(f, Formula::Bottom | Formula::Prop(_)) {
        out.push(Formula::Bottom);
    }
    let rebuild = |i: usize, c: Formula| -> Formula {
        match (f, i) {
            (Formula::And(_, b), 0) => Formula::and(c, (**b).clone()),
            (Formula::And(a, _), _) => Formula::and((**a).clone(), c),
            (Formula::Or(_, b), 0) => Formula::or(c, (**b).clone()),
            (Formula::Or(a, _), _) => Formula::or((**a).clone(), c),
            (Formula::Implies(_, b), 0) => Formula::implies(c, (**b).clone()),
            (Formula::Implies(a, _), _) => Formula::implies((**a).clone(), c),
            (Formula::Box(_), _) => Formula::boxed(c),
            (Formula::Dia(_), _) => Formula::dia(c),
            (Formula::LocalDia(_), _) => Formula::local_dia(c),
            (Formula::Query(_, b), 0) => Formula::query(c, (**b).clone()),
            (Formula::Query(a, _), _) => Formula::query((**a).clone(), c),
            (Formula::Mu(x, _), _) => Formula::mu(x, c),
            (Formula::Nu(x, _), _) => Formula::nu(x, c),
            _ => unreachable!("only composite formulas have children"),
        }
    };
    for (i, child) in f.children().into_iter().enumerate() {
        for c in candidates(child) {
            out.push(rebuild(i, c));
        }
    }
    out
}

fn drop_world(m: &Model, w: usize, variant: LogicVariant) -> Option<Model> {
    if m.len() <= 1 {
        return None;
    }
    let name = m.world_name(w).to_string();
    let mut doc = m.to_document();
    doc.worlds.retain(|x| *x != name);
    doc.fallible.retain(|x| *x != name);
    doc.pre.retain(|(a, b)| *a != name && *b != name);
    doc.rel.retain(|(a, b)| *a != name && *b != name);
    for ws in doc.val.values_mut() {
        ws.retain(|x| *x != name);
    }
    close(&doc, ClosureOptions::all(), variant).ok()
}

enum Outcome {
    Proved,
    Refuted,
    Unknown,
    Skipped,
}

fn run_case(cfg: &FuzzConfig, case: usize) -> (Outcome, Vec<Discrepancy>) {
    let mut rng = ChaCha8Rng::seed_from_u64(
        cfg.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(case as u64),
    );
    let model = random_case_model(&mut rng, cfg.max_worlds, &cfg.props, cfg.variant);
    let formula = random_formula(&mut rng, cfg.depth, &cfg.props);
    let mut out = Vec::new();
    let violations = validate(&model, cfg.variant);
    if !violations.is_empty() {
        out.push(Discrepancy::InvalidModel {
            case,
            model: model.clone(),
            message: format!("{violations:?}"),
        });
    }
    let s = analyze(&formula).expect("generated formulas are well-named");
    if let Some((w, e)) = eval_game_mismatch(&model, &s, cfg.diamond) {
        let (formula, model) = shrink(&formula, &model, cfg.variant, cfg.diamond);
        let s = analyze(&formula).expect("shrinking keeps formulas well-named");
        let (world, eval) = eval_game_mismatch(&model, &s, cfg.diamond).unwrap_or((w, e));
        out.push(Discrepancy::EvalGame {
            case,
            formula,
            model,
            world,
            eval,
        });
    }
    let Some(budget) = cfg.budget else {
        return (Outcome::Skipped, out);
    };
    let opts = EvalOptions {
        diamond: cfg.diamond,
    };
    let outcome = match prove(&s, cfg.variant, budget) {
        Verdict::Proved(_) => {
            let truth =
                eval_with(&model, &formula, &Env::new(), opts).expect("closed sentences evaluate");
            if let Some(world) = (0..model.len()).find(|&w| !truth.contains(w)) {
                out.push(Discrepancy::ProvedButFalsified {
                    case,
                    formula: formula.clone(),
                    model: model.clone(),
                    world,
                });
            }
            Outcome::Proved
        }
        Verdict::Refuted(r) => {
            let bad = |message: String| Discrepancy::BadRefutation {
                case,
                formula: formula.clone(),
                message,
            };
            let violations = validate(&r.model, cfg.variant);
            if !violations.is_empty() {
                out.push(bad(format!("countermodel invalid: {violations:?}")));
            }
            let truth = eval_with(&r.model, &formula, &Env::new(), opts)
                .expect("closed sentences evaluate");
            if truth.contains(r.world) {
                out.push(bad(format!(
                    "formula holds at {}",
                    r.model.world_name(r.world)
                )));
            }
            if game_winners(&r.model, &s)[r.world] {
                out.push(bad(format!(
                    "verifier wins at {}",
                    r.model.world_name(r.world)
                )));
            }
            Outcome::Refuted
        }
        Verdict::Unknown(_) => Outcome::Unknown,
    };
    (outcome, out)
}

/// Runs `cfg.cases` seeded cases. Each case samples a model and a sentence,
/// compares evaluation with the game at every world and, with a budget,
/// checks the prover's verdict against both.
pub fn fuzz(cfg: &FuzzConfig) -> FuzzReport {
    let work = || {
        (0..cfg.cases)
            .into_par_iter()
            .map(|i| run_case(cfg, i))
            .collect::<Vec<_>>()
    };
    let results = if cfg.workers == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .expect("thread pool")
            .install(work)
    };
    let mut report = FuzzReport {
        cases: cfg.cases,
        ..FuzzReport::default()
    };
    for (outcome, ds) in results {
        match outcome {
            Outcome::Proved => report.proved += 1,
            Outcome::Refuted => report.refuted += 1,
            Outcome::Unknown => report.unknown += 1,
            Outcome::Skipped => {}
        }
        report.discrepancies.extend(ds);
    }
    report
}
