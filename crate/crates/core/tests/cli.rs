use std::io::Write;
use std::process::{Command, Output, Stdio};

const FIVE_THREE_TWO: &str = r#"{"rounds":[[5,3,2]],"repeat":true}"#;

fn frege(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_frege"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn simulate_reads_standard_input() {
    let out = frege(&["simulate", "-t", "10"], FIVE_THREE_TWO);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let winners: String = text
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().nth(4).unwrap())
        .collect();
    assert_eq!(winners, "aabacababa");
}

#[test]
fn json_trace_lists_winners() {
    let out = frege(&["--output", "json", "simulate", "-t", "10", "-"], FIVE_THREE_TWO);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let winners: String = v["rounds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["winner"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(winners, "aabacababa");
}

#[test]
fn csv_modified_trace() {
    let out = frege(
        &["--output", "csv", "simulate", "--method", "modified", "-t", "3"],
        "5,3,2\n5,3,2\n5,3,2\n",
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("t,"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn negative_score_is_rejected() {
    let out = frege(&["simulate"], "5,-1\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("negative score, round 1, candidate 2"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(frege(&["bogus"], "").status.code(), Some(1));
    assert_eq!(frege(&["--help"], "").status.code(), Some(0));
}

#[test]
fn apportion_from_flags() {
    let out = frege(
        &[
            "--output",
            "json",
            "apportion",
            "--votes",
            "79,7,6,3,2,1",
            "--seats",
            "20",
            "--method",
            "frege",
        ],
        "",
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).replace([' ', '\n'], "").contains("[16,1,1,1,1,0]"));
}

#[test]
fn stabilize_prints_round() {
    let out = frege(&["stabilize", "1000", "25"], "");
    assert!(stdout(&out).contains("184"));
}

#[test]
fn replay_matches_direct_run() {
    let args = ["--seed", "5", "--output", "json", "bias", "--samples", "500"];
    let direct = frege(&args, "");
    assert!(direct.status.success(), "{}", stderr(&direct));
    let mut emit = args.to_vec();
    emit.insert(0, "--emit-command");
    let command = stdout(&frege(&emit, ""));
    let replayed = frege(&["--output", "json", "replay"], &command);
    assert!(replayed.status.success(), "{}", stderr(&replayed));
    assert_eq!(stdout(&direct), stdout(&replayed));
}
