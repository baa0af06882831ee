use std::fs;
use std::process::{Command, Output};

fn gforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gforge")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn commutator_is_nontrivial_in_s() {
    let o = gforge(&["wp", "--builtin", "s", "--word", "a t a t^-1 a^-1 t a^-1 t^-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "non-trivial");
}

#[test]
fn expectation_mismatch_exits_one() {
    let o = gforge(&["wp", "--builtin", "s", "--word", "a t a t^-1 a^-1 t a^-1 t^-1", "--expect", "trivial"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn q_is_perfect() {
    let o = gforge(&["h1", "--builtin", "q"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "trivial");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(gforge(&["h1", "--bogus"]).status.code(), Some(2));
    assert_eq!(gforge(&["h1", "--pres", "/nonexistent/x.pres"]).status.code(), Some(2));
    assert_eq!(gforge(&["wp", "--builtin", "s", "--word", "zz"]).status.code(), Some(2));
}

#[test]
fn failing_check_exits_one() {
    let o = gforge(&["smallcanc", "--builtin", "s"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("C'(1/6): fail"));
}

#[test]
fn json_reports_are_versioned() {
    let o = gforge(&["--json", "wp", "--builtin", "lambda", "--word", "tau1 zeta tau1^-1 zeta^-1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["data"]["verdict"], "trivial");
    assert_eq!(v["checks"][0]["status"], "pass");
    assert_eq!(v["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn jobs_come_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_gforge"))
        .env("GFORGE_JOBS", "2")
        .args(["witness", "--n", "0", "--m", "1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn corrupted_builtin_fails_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("s", "name: S\ngens: a t\nrel: t a^2 t^-1 a^-3\n"),
        ("b", "name: B\ngens: a1 t1 a2 t2\nrel: t1 a1^2 t1^-1 a1^-3\n"),
        ("q", ""),
        ("lambda", ""),
    ] {
        fs::write(dir.path().join(format!("{name}.pres")), text).unwrap();
    }
    let o = gforge(&["check", "--fail-fast", "--presentations", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("PASS    builtin s round trip"), "{out}");
    assert!(out.contains("FAIL    builtin b round trip"), "{out}");
    assert!(!out.contains("h1("), "{out}");
}

#[test]
fn rips_then_fibre_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    assert!(gforge(&["build", "b", "-o", &p("b.pres")]).status.success());
    assert!(gforge(&["build", "lambda", "-o", &p("lambda.pres")]).status.success());
    let o = gforge(&["rips", &p("b.pres"), "-o", &p("gamma.pres"), "--map-out", &p("pi0.map")]);
    assert!(o.status.success(), "{}", stdout(&o));
    fs::write(
        p("f2.map"),
        "from: lambda.pres\nto: b.pres\nalpha1 -> a1\ntau1 -> t1\nalpha2 -> a2\ntau2 -> t2\nzeta -> 1\n",
    )
    .unwrap();
    let fibre = |extra: &[&str]| {
        let mut args = vec![
            "fibre".to_string(),
            "--gamma".into(),
            p("gamma.pres"),
            "--gamma2".into(),
            p("lambda.pres"),
            "--q".into(),
            p("b.pres"),
            "--f1".into(),
            p("pi0.map"),
            "--f2".into(),
            p("f2.map"),
            "--kernel".into(),
            "A1,A2".into(),
            "-o".into(),
            p("p.pres"),
            "--embed-out".into(),
            p("p.embed"),
        ];
        args.extend(extra.iter().map(|s| s.to_string()));
        gforge(&args.iter().map(String::as_str).collect::<Vec<_>>())
    };
    assert_eq!(fibre(&[]).status.code(), Some(2));
    let o = fibre(&["--aspherical"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let embed = fs::read_to_string(p("p.embed")).unwrap();
    assert!(embed.contains("d_zeta -> ( 1 , zeta )"), "{embed}");
}
