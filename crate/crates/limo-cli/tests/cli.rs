//! End-to-end tests of the `limo` binary: verdicts, exit codes, output
//! formats, model checking and corpus runs.

use std::path::PathBuf;
use std::process::{Command, Output};

fn limo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_limo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_temp(name: &str, content: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("limo-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, content).expect("temp file writes");
    path
}

#[test]
fn prove_reports_provable_axioms_with_exit_zero() {
    for (formula, logic) in [
        ("[](p | q) -> <>p | []q", "lik"),
        ("<>T", "likd"),
        ("[]p -> p", "likt"),
    ] {
        let out = limo(&["prove", formula, "--logic", logic]);
        assert_eq!(code(&out), 0, "{formula}: {}", stderr(&out));
        assert_eq!(stdout(&out), "PROVABLE\n");
    }
}

#[test]
fn prove_reports_unprovable_with_exit_one() {
    let out = limo(&["prove", "p", "--logic", "lik"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out), "UNPROVABLE\n");
}

#[test]
fn prove_emits_a_verified_countermodel() {
    let out = limo(&["prove", "(<>p -> []q) -> [](p -> q)", "--countermodel"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.starts_with("UNPROVABLE\n"));
    assert!(text.contains("r.m0.i0"));
    assert!(text.contains("countermodel verified: frame checks pass, goal not forced at r"));
}

#[test]
fn prove_renders_derivations_in_all_formats() {
    let out = limo(&["prove", "p & q -> q", "--derivation"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("[and_L @ r]"));
    assert!(text.contains("[axiom]"));

    let out = limo(&["prove", "p & q -> q", "--derivation", "--format", "json"]);
    let text = stdout(&out);
    let json: serde_json::Value =
        serde_json::from_str(text.trim_start_matches("PROVABLE\n")).expect("valid JSON");
    assert_eq!(json["logic"], "LIK");
    assert_eq!(json["tree"]["rule"], "and_L");

    let out = limo(&["prove", "p & q -> q", "--derivation", "--format", "latex"]);
    let text = stdout(&out);
    assert!(text.contains("\\begin{prooftree}"));
    assert!(text.contains("\\end{prooftree}"));
}

#[test]
fn prove_reads_formulas_from_files() {
    let path = write_temp("goal.txt", "[](p -> q) -> ([]p -> []q)\n");
    let out = limo(&["prove", "--file", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "PROVABLE\n");
}

#[test]
fn prove_maps_errors_to_exit_codes() {
    let out = limo(&["prove", "p ->"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cannot parse"));

    let out = limo(&["prove", "[](p | q) -> <>p | []q", "--max-steps", "1"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("budget"));
}

#[test]
fn prove_minus_variant_gives_verdicts_only() {
    let out = limo(&["prove", "[](p | q) -> <>p | []q", "--variant", "minus"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "PROVABLE\n");

    let out = limo(&["prove", "p", "--variant", "minus"]);
    assert_eq!(code(&out), 1);

    let out = limo(&["prove", "p", "--variant", "minus", "--countermodel"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--variant full"));
}

#[test]
fn prove_output_is_deterministic() {
    let args = ["prove", "(<>p -> []q) -> [](p -> q)", "--countermodel", "--derivation"];
    let first = limo(&args);
    let second = limo(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(code(&first), code(&second));
}

const THREE_WORLD_MODEL: &str = r#"{
  "worlds": ["r", "r.m0", "r.m0.i0"],
  "le": [["r", "r"], ["r.m0", "r.m0"], ["r.m0", "r.m0.i0"], ["r.m0.i0", "r.m0.i0"]],
  "r": [["r", "r.m0"]],
  "val": {"p": ["r.m0.i0"], "q": []}
}"#;

#[test]
fn check_model_reports_frame_checks_and_forcing() {
    let path = write_temp("model.json", THREE_WORLD_MODEL);
    let out = limo(&[
        "check-model",
        "--model",
        path.to_str().unwrap(),
        "--formula",
        "(<>p -> []q) -> [](p -> q)",
        "--world",
        "r",
    ]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    for line in ["preorder: ok", "heredity: ok", "fc: ok", "dc: ok"] {
        assert!(text.contains(line), "missing {line:?} in {text}");
    }
    assert!(text.contains("not forced at r"));

    // Without a formula the clean frame exits zero.
    let out = limo(&["check-model", "--model", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
}

#[test]
fn check_model_confirms_forcing_everywhere() {
    let path = write_temp(
        "identity.json",
        r#"{"worlds": ["w"], "le": [["w", "w"]], "r": [["w", "w"]], "val": {"p": []}}"#,
    );
    let out = limo(&[
        "check-model",
        "--model",
        path.to_str().unwrap(),
        "--logic",
        "likt",
        "--formula",
        "p -> p",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("reflexive: ok"));
    assert!(text.contains("p -> p forced at w"));
}

#[test]
fn check_model_rejects_heredity_violations_with_a_witness() {
    let path = write_temp(
        "broken.json",
        r#"{"worlds": ["a", "b"], "le": [["a", "a"], ["b", "b"], ["a", "b"]],
            "r": [], "val": {"p": ["a"]}}"#,
    );
    let out = limo(&["check-model", "--model", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("heredity: violated (a b p)"));
}

#[test]
fn check_model_rejects_bad_inputs() {
    let path = write_temp("garbage.json", "not json");
    let out = limo(&["check-model", "--model", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("malformed model JSON"));

    let path = write_temp("model2.json", THREE_WORLD_MODEL);
    let out = limo(&[
        "check-model",
        "--model",
        path.to_str().unwrap(),
        "--formula",
        "p",
        "--world",
        "nowhere",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn corpus_runs_entries_and_reports_in_order() {
    let path = write_temp(
        "corpus.tsv",
        "# axioms and a non-theorem\n\
         lik\tprovable\t[](p | q) -> <>p | []q\n\
         lik\tunprovable\t[]F\n\
         likd\tprovable\t<>T\n",
    );
    let out = limo(&[
        "corpus",
        "--corpus",
        path.to_str().unwrap(),
        "--check-equivalence",
        "--check-oracle",
        "3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("line 2: lik provable"));
    assert!(lines[1].starts_with("line 3: lik unprovable"));
    assert!(lines[2].starts_with("line 4: likd provable"));
    assert_eq!(lines[3], "3 entries, 0 failures");
}

#[test]
fn corpus_flags_expectation_mismatches() {
    let path = write_temp("bad-corpus.tsv", "lik\tprovable\tp\n");
    let out = limo(&["corpus", "--corpus", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("expected provable"));
    assert!(text.contains("1 entries, 1 failures"));
}

#[test]
fn corpus_generation_is_deterministic_and_round_trips() {
    let first = limo(&["corpus", "--generate", "12", "--seed", "9"]);
    let second = limo(&["corpus", "--generate", "12", "--seed", "9"]);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().all(|line| line.starts_with("lik\tunknown\t")));

    let path = write_temp("generated.tsv", &text);
    let out = limo(&[
        "corpus",
        "--corpus",
        path.to_str().unwrap(),
        "--check-equivalence",
        "--check-oracle",
        "3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("12 entries, 0 failures"));
}
