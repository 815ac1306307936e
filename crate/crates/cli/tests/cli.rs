use std::fs;
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn enkvote(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enkvote"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn setup(dir: &Path, voters: usize) {
    let out = enkvote(&[
        "setup",
        "--out",
        dir.to_str().unwrap(),
        "--voters",
        &voters.to_string(),
        "--candidates",
        "ada,bo",
        "--group",
        "modp768",
        "--seed",
        "4",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn costmodel_ion_trap_table() {
    let out = enkvote(&["costmodel", "--profile", "ion-trap"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("2.85e-2"), "{text}");
    assert!(text.contains("88"), "{text}");
    assert!(!text.contains(" NO"));
}

#[test]
fn costmodel_generic_table() {
    let out = enkvote(&["costmodel", "--profile", "generic"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("66"));
}

#[test]
fn run_then_verify_every_voter() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path(), 4);
    let choices = dir.path().join("choices.txt");
    fs::write(&choices, "ada\nbo\n2\n1\n").unwrap();
    let manifest = dir.path().join("manifest.txt");
    let m = manifest.to_str().unwrap();
    let out = enkvote(&[
        "run",
        "--manifest",
        m,
        "--choices",
        choices.to_str().unwrap(),
        "--seed",
        "9",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("ada: 2") && text.contains("bo: 2"), "{text}");

    let board = dir.path().join("board.txt");
    let b = board.to_str().unwrap();
    for i in 1..=4 {
        let cred = dir.path().join(format!("voter-{i:04}.cred"));
        let receipt = dir.path().join(format!("voter-{i:04}.receipt"));
        let out = enkvote(&[
            "verify",
            "--board",
            b,
            "--manifest",
            m,
            "--credential",
            cred.to_str().unwrap(),
            "--receipt",
            receipt.to_str().unwrap(),
        ]);
        assert_eq!(stdout(&out).trim(), "counted");
        assert!(out.status.success());
    }

    let admin = dir.path().join("admin.cred");
    let out = enkvote(&[
        "audit",
        "--board",
        b,
        "--manifest",
        m,
        "--credential",
        admin.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "no offending rows");
}

#[test]
fn audit_reports_an_altered_row() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path(), 2);
    let choices = dir.path().join("choices.txt");
    fs::write(&choices, "ada\nbo\n").unwrap();
    let manifest = dir.path().join("manifest.txt");
    let m = manifest.to_str().unwrap();
    assert!(enkvote(&[
        "run",
        "--manifest",
        m,
        "--choices",
        choices.to_str().unwrap()
    ])
    .status
    .success());
    let board = dir.path().join("board.txt");
    let text = fs::read_to_string(&board).unwrap();
    let code_ada = fs::read_to_string(&manifest)
        .unwrap()
        .lines()
        .find_map(|l| l.strip_prefix("candidate: ada=").map(str::to_owned))
        .unwrap();
    let code_bo = fs::read_to_string(&manifest)
        .unwrap()
        .lines()
        .find_map(|l| l.strip_prefix("candidate: bo=").map(str::to_owned))
        .unwrap();
    assert!(text.contains(&code_ada));
    let forged = text
        .replacen(&code_ada, &code_bo, 1)
        .replace("TALLY ada=1\nTALLY bo=1", "TALLY ada=0\nTALLY bo=2");
    fs::write(&board, forged).unwrap();
    let admin = dir.path().join("admin.cred");
    let out = enkvote(&[
        "audit",
        "--board",
        board.to_str().unwrap(),
        "--manifest",
        m,
        "--credential",
        admin.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stdout(&out).contains("offending row"));
}

#[test]
fn attack_tamper_admin_is_detected() {
    let out = enkvote(&["attack", "--scenario", "tamper-admin"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("detected"));
}

#[test]
fn usage_errors_exit_nonzero_on_stderr() {
    for args in [
        &["costmodel", "--profile", "quantum"][..],
        &["attack", "--scenario", "nope"][..],
        &["frobnicate"][..],
        &[
            "setup",
            "--out",
            "/nonexistent/x",
            "--voters",
            "2",
            "--group",
            "modp1",
        ][..],
    ] {
        let out = enkvote(args);
        assert!(!out.status.success(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

fn free_port() -> String {
    TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .to_string()
}

#[test]
fn socket_processes_match_the_simulation() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path(), 3);
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let m = p("manifest.txt");
    let counter_addr = free_port();
    let admin_addr = free_port();
    let bin = env!("CARGO_BIN_EXE_enkvote");
    let mut counter = Command::new(bin)
        .args([
            "serve-counter",
            "--listen",
            &counter_addr,
            "--manifest",
            &m,
            "--credential",
            &p("counter.cred"),
            "--seed",
            "5",
        ])
        .spawn()
        .unwrap();
    let mut admin = Command::new(bin)
        .args([
            "serve-admin",
            "--listen",
            &admin_addr,
            "--connect",
            &counter_addr,
            "--manifest",
            &m,
            "--credential",
            &p("admin.cred"),
            "--seed",
            "5",
            "--board",
            &p("socket-board.txt"),
        ])
        .spawn()
        .unwrap();
    let voters: Vec<_> = ["ada", "bo", "bo"]
        .iter()
        .enumerate()
        .map(|(i, c)| {
            Command::new(bin)
                .args([
                    "vote",
                    "--connect",
                    &admin_addr,
                    "--manifest",
                    &m,
                    "--credential",
                    &p(&format!("voter-{:04}.cred", i + 1)),
                    "--choice",
                    c,
                    "--seed",
                    "5",
                ])
                .stdout(Stdio::piped())
                .stderr(Stdio::piped())
                .spawn()
                .unwrap()
        })
        .collect();
    for v in voters {
        let v = v.wait_with_output().unwrap();
        assert_eq!(
            stdout(&v).trim(),
            "counted",
            "{}",
            String::from_utf8_lossy(&v.stderr)
        );
    }
    assert!(admin.wait().unwrap().success());
    assert!(counter.wait().unwrap().success());

    fs::write(p("choices.txt"), "ada\nbo\nbo\n").unwrap();
    let out = enkvote(&[
        "run",
        "--manifest",
        &m,
        "--choices",
        &p("choices.txt"),
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    assert_eq!(
        fs::read_to_string(p("socket-board.txt")).unwrap(),
        fs::read_to_string(p("board.txt")).unwrap()
    );
}
