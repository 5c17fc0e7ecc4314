use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mec-morl"))
}

fn run(args: &[&str], env: &[(&str, &str)]) -> (i32, String) {
    let mut c = bin();
    c.args(args);
    for (k, v) in env {
        c.env(k, v);
    }
    let out = c.output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["train", "--out", "x"], &[]).0, 2);
    assert_eq!(run(&["train", "--sweep", "--preference", "0.5", "--out", "x"], &[]).0, 2);
    assert_eq!(run(&["frobnicate"], &[]).0, 2);
    assert_eq!(run(&["calibrate", "--episodes", "1"], &[("MECMORL_NUM_USERS", "zero")]).0, 2);
    assert_eq!(run(&["calibrate", "--episodes", "1"], &[("MECMORL_UNKNOWN", "1")]).0, 2);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    assert_eq!(run(&["--preset", "smoke", "train", "--preference", "1.5", "--out", s(&out)], &[]).0, 2);
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"], &[]).0, 0);
}

#[test]
fn corrupt_checkpoint_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("bad.ckpt");
    std::fs::write(&ck, b"MECMORL\0garbage").unwrap();
    let (code, text) = run(&["--preset", "smoke", "evaluate", s(&ck), "--out", s(&dir.path().join("e"))], &[]);
    assert_eq!(code, 3, "{text}");
}

#[test]
fn unreadable_results_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("r.csv");
    std::fs::write(&f, "a,b\n1,2\n").unwrap();
    assert_eq!(run(&["front", s(&f), "--out", s(&dir.path().join("f"))], &[]).0, 3);
}

#[test]
fn end_to_end_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let smoke = ["--preset", "smoke"];
    let cal = d.join("cal");
    let (code, text) = run(&[&smoke[..], &["calibrate", "--episodes", "5", "--out", s(&cal)]].concat(), &[("MECMORL_STEPS_PER_EPISODE", "10")]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("alpha_t"));
    let scales = cal.join("scales.txt");
    let env = [("MECMORL_STEPS_PER_EPISODE", "10")];
    let train = d.join("train");
    let (code, text) = run(
        &[&smoke[..], &["train", "--sweep", "--interval", "0.5", "--episodes", "4", "--rest-episodes", "2",
            "--episodes-per-update", "2", "--batch", "32", "--scales", s(&scales), "--out", s(&train)]].concat(),
        &env,
    );
    assert_eq!(code, 0, "{text}");
    let ckpts: Vec<String> = ["policy_000_wT0.5000.ckpt", "policy_001_wT1.0000.ckpt"]
        .iter()
        .map(|n| s(&train.join(n)).to_string())
        .collect();
    let eval = d.join("eval");
    let mut args: Vec<&str> = smoke.to_vec();
    args.extend(["evaluate", "--episodes", "2", "--greedy", "--out", s(&eval)]);
    args.extend(ckpts.iter().map(String::as_str));
    let (code, text) = run(&args, &env);
    assert_eq!(code, 0, "{text}");
    let (code, text) = run(&[&smoke[..], &["evaluate", "--scheme", "heuristic", "--interval", "0.5", "--episodes", "2",
        "--scales", s(&scales), "--out", s(&d.join("heur"))]].concat(), &env);
    assert_eq!(code, 0, "{text}");
    let front = d.join("front");
    let (code, text) = run(
        &["front", "--per-mbit", s(&eval.join("results_morl.csv")), s(&d.join("heur/results_heuristic.csv")), "--out", s(&front)],
        &[],
    );
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("morl over heuristic"), "{text}");
    let (code, text) = run(&[&smoke[..], &["simulate", "--policy", "checkpoint", "--checkpoint", &ckpts[0], "--out", s(&d.join("sim"))]].concat(), &env);
    assert_eq!(code, 0, "{text}");
    // Same checkpoint under a different config.
    let (code, _) = run(&[&smoke[..], &["evaluate", &ckpts[0], "--episodes", "1", "--out", s(&d.join("x"))]].concat(), &[]);
    assert_eq!(code, 3);
}
