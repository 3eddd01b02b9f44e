use ckmu::model::{random_model, RandomParams};
use ckmu::proofsys::{check_progress, Progress, ProofGraph};
use ckmu::{analyze, parse, LogicVariant};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn ckmu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ckmu"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TWO_WORLDS: &str =
    r#"{"worlds":["w","v"],"fallible":[],"pre":[["w","v"]],"rel":[["v","w"]],"val":{"p":["v"]}}"#;

#[test]
fn eval_greatest_box_fixpoint_holds_everywhere() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", TWO_WORLDS);
    let o = ckmu(&["eval", s(&m), "--formula", "nu X. []X"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "{v, w}");
}

#[test]
fn eval_exit_status_follows_the_world() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "m.json",
        r#"{"worlds":["w"],"fallible":[],"pre":[],"rel":[],"val":{}}"#,
    );
    assert_eq!(
        code(&ckmu(&[
            "eval",
            s(&m),
            "--formula",
            "false",
            "--world",
            "w"
        ])),
        1
    );
    let two = write(&dir, "two.json", TWO_WORLDS);
    assert_eq!(
        code(&ckmu(&["eval", s(&two), "--formula", "p", "--world", "v"])),
        0
    );
    assert_eq!(
        code(&ckmu(&["eval", s(&two), "--formula", "p", "--world", "w"])),
        1
    );
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"worlds\": [");
    let good = write(&dir, "m.json", TWO_WORLDS);
    assert_eq!(code(&ckmu(&["eval", s(&bad), "--formula", "p"])), 2);
    assert_eq!(code(&ckmu(&["eval", s(&good), "--formula", "p &"])), 2);
    assert_eq!(
        code(&ckmu(&["eval", s(&good), "--formula", "mu X. X -> p"])),
        2
    );
    assert_eq!(
        code(&ckmu(&["eval", s(&good), "--formula", "p", "--world", "u"])),
        2
    );
    assert_eq!(
        code(&ckmu(&["eval", "/nonexistent.json", "--formula", "p"])),
        2
    );
    assert_eq!(
        code(&ckmu(&["prove", "--formula", "p", "--logic", "s4"])),
        2
    );
    assert_eq!(
        code(&ckmu(&["prove", "--formula", "p", "--budget-nodes", "0"])),
        2
    );
}

#[test]
fn check_model_reports_frame_violations() {
    let dir = TempDir::new().unwrap();
    // forward confluence fails: w <= v, w R u, but v sees nothing
    let fork = write(
        &dir,
        "fork.json",
        r#"{"worlds":["w","v","u"],"fallible":[],"pre":[["w","v"]],"rel":[["w","u"]],"val":{}}"#,
    );
    assert_eq!(code(&ckmu(&["check-model", s(&fork)])), 0);
    let o = ckmu(&["check-model", s(&fork), "--logic", "ik"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("invalid ik model"));
}

#[test]
fn closure_flags_can_be_switched_off() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", TWO_WORLDS);
    assert_eq!(code(&ckmu(&["check-model", s(&m)])), 0);
    assert_eq!(
        code(&ckmu(&["check-model", s(&m), "--close-pre", "false"])),
        1
    );
}

#[test]
fn game_on_a_true_atom() {
    let dir = TempDir::new().unwrap();
    let m = write(
        &dir,
        "m.json",
        r#"{"worlds":["w"],"fallible":[],"pre":[],"rel":[],"val":{"p":["w"]}}"#,
    );
    let o = ckmu(&["game", s(&m), "--formula", "p", "--world", "w"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("winner: I\n"));
    assert!(stdout(&o).contains("positions: 1"));
}

#[test]
fn dumped_arena_has_one_line_per_position() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", TWO_WORLDS);
    let dump = dir.path().join("arena.txt");
    let o = ckmu(&[
        "game",
        s(&m),
        "--formula",
        "nu X. mu Y. (p & []X) | <>Y",
        "--world",
        "w",
        "--dump-arena",
        s(&dump),
    ]);
    let positions: usize = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("positions: "))
        .unwrap()
        .parse()
        .unwrap();
    let text = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(text.lines().count(), positions);
    let arena = ckmu::game::load_arena(&text).unwrap();
    assert_eq!(arena.len(), positions);
}

#[test]
fn game_exit_mirrors_eval() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", TWO_WORLDS);
    for f in [
        "p",
        "<>p",
        "[]p",
        "~p",
        "mu X. p | <>X",
        "nu X. p & []X",
        "~~p -> p",
    ] {
        for w in ["w", "v"] {
            let e = code(&ckmu(&["eval", s(&m), "--formula", f, "--world", w]));
            let g = code(&ckmu(&["game", s(&m), "--formula", f, "--world", w]));
            assert_eq!(e, g, "{f} at {w}");
        }
    }
}

#[test]
fn diff_finds_no_mismatches_on_random_instances() {
    let dir = TempDir::new().unwrap();
    let formulas = [
        "<>p",
        "[]p -> <>q",
        "mu X. p | <>X",
        "nu X. q & []X",
        "nu X. mu Y. (p & []X) | <>Y",
        "(mu X. [](X | p)) -> q",
        "~~(p | ~p)",
        "<>(p | q) -> <>p | <>q",
    ];
    let params = RandomParams::default();
    for seed in 0..1000u64 {
        let variant = LogicVariant::ALL[seed as usize % 3];
        let m = random_model(seed, &params, variant).unwrap();
        let path = write(&dir, "m.json", &m.to_document().to_json());
        let f = formulas[seed as usize % formulas.len()];
        let o = ckmu(&[
            "diff",
            s(&path),
            "--formula",
            f,
            "--world",
            m.world_name(0),
            "--logic",
            &variant.to_string(),
        ]);
        assert_eq!(code(&o), 0, "seed {seed}: {}", stdout(&o));
        assert!(stdout(&o).contains("mismatches: 0"));
    }
}

#[test]
fn prove_k_axiom() {
    assert_eq!(
        code(&ckmu(&[
            "prove",
            "--formula",
            "[](p->q) -> ([]p -> []q)",
            "--logic",
            "ck"
        ])),
        0
    );
}

#[test]
fn diamond_distribution_needs_ik() {
    let dir = TempDir::new().unwrap();
    let cm = dir.path().join("cm.json");
    let goal = "<>(p|q) -> (<>p | <>q)";
    let o = ckmu(&[
        "prove",
        "--formula",
        goal,
        "--logic",
        "ck",
        "--emit-countermodel",
        s(&cm),
    ]);
    assert_eq!(code(&o), 1);
    let world = stdout(&o)
        .lines()
        .next()
        .unwrap()
        .strip_prefix("refuted at ")
        .unwrap()
        .to_string();
    // the countermodel feeds straight back into eval
    assert_eq!(
        code(&ckmu(&[
            "eval",
            s(&cm),
            "--formula",
            goal,
            "--world",
            &world
        ])),
        1
    );
    assert_eq!(
        code(&ckmu(&[
            "check-model",
            s(&cm),
            "--close-pre",
            "false",
            "--close-heredity",
            "false",
            "--close-fallible",
            "false"
        ])),
        0
    );
    assert_eq!(
        code(&ckmu(&["prove", "--formula", goal, "--logic", "ik"])),
        0
    );
}

#[test]
fn linearity_needs_gk() {
    let goal = "(p->q) | (q->p)";
    assert_eq!(
        code(&ckmu(&["prove", "--formula", goal, "--logic", "gk"])),
        0
    );
    let dir = TempDir::new().unwrap();
    let cm = dir.path().join("cm.json");
    let o = ckmu(&[
        "prove",
        "--formula",
        goal,
        "--logic",
        "ik",
        "--emit-countermodel",
        s(&cm),
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&ckmu(&["check-model", s(&cm), "--logic", "ik"])), 0);
}

#[test]
fn emitted_proofs_reload_and_check() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("proof.txt");
    let goal = "(nu X. p & []X) -> [](nu Y. p & []Y)";
    assert_eq!(
        code(&ckmu(&[
            "prove",
            "--formula",
            goal,
            "--emit-proof",
            s(&path)
        ])),
        0
    );
    let text = std::fs::read_to_string(&path).unwrap();
    let s = analyze(&parse(goal).unwrap()).unwrap();
    let g = ProofGraph::from_text(&text, &s, LogicVariant::CK).unwrap();
    g.validate(Some(&s)).unwrap();
    assert_eq!(check_progress(&g).unwrap(), Progress::Accept);
}

#[test]
fn exhausted_budget_exits_3() {
    let o = ckmu(&[
        "prove",
        "--formula",
        "[](p->q) -> ([]p -> []q)",
        "--budget-nodes",
        "2",
    ]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).starts_with("unknown"));
}

#[test]
fn fuzz_passes_and_catches_a_planted_bug() {
    let o = ckmu(&["fuzz", "--seed", "42", "--cases", "500", "--logic", "ck"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("500 cases"));
    assert_eq!(
        code(&ckmu(&[
            "fuzz", "--seed", "42", "--cases", "500", "--logic", "gk"
        ])),
        0
    );
    let o = ckmu(&[
        "fuzz",
        "--seed",
        "42",
        "--cases",
        "500",
        "--inject-diamond-bug",
    ]);
    assert_eq!(code(&o), 1);
    assert!(!stdout(&o).contains(" 0 discrepancies"));
}
