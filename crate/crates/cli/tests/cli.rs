use std::path::Path;
use std::process::{Command, Output};

fn kcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcert")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn oracle_on_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "triangle.hyg", "hyg 3 3 2\n1 2\n2 3\n1 3\n");
    let o = kcert(&["cover", "oracle", &tri, "--cap", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "3\n1 2 3\n");
    let cover = write(dir.path(), "c.txt", "1 2 3\n");
    assert_eq!(kcert(&["cover", "verify", &tri, &cover]).status.code(), Some(0));
    let partial = write(dir.path(), "partial.txt", "1 2\n");
    assert_eq!(kcert(&["cover", "verify", &tri, &partial]).status.code(), Some(2));
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "dup.hyg", "hyg 3 2 2\n1 2\n1 1\n");
    let o = kcert(&["cover", "oracle", &f, "--cap", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn single_clause_refutation_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.xor", "xor 2 1 2\n+1 1 2\n");
    let cert = dir.path().join("cert.json");
    let cert = cert.to_str().unwrap();
    let o = kcert(&["refute", &inst, "--r", "1", "--seed", "0", "-o", cert]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(cert).unwrap();
    assert!(text.contains("\"certified_bound\": \"1\""));
    assert_eq!(kcert(&["verify-cert", &inst, cert]).status.code(), Some(0));

    // a deflated eigenvalue must be rejected
    let tampered: String = text
        .lines()
        .map(|l| if l.trim_start().starts_with("\"lambda_cert\"") { "      \"lambda_cert\": 0.25," } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    assert_ne!(tampered.trim_end(), text.trim_end());
    let bad = write(dir.path(), "bad.json", &tampered);
    assert_eq!(kcert(&["verify-cert", &inst, &bad]).status.code(), Some(2));

    // a certificate for another instance is rejected on its digest
    let other = write(dir.path(), "other.xor", "xor 2 1 2\n-1 1 2\n");
    assert_eq!(kcert(&["verify-cert", &other, cert]).status.code(), Some(2));
}

#[test]
fn seed_is_mandatory() {
    assert!(!kcert(&["gen", "random", "--n", "5", "--k", "2", "--m", "3"]).status.success());
    assert!(!kcert(&["refute", "x.xor", "--r", "1"]).status.success());
}

#[test]
fn generation_and_refutation_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str, threads: &str| {
        let inst = dir.path().join(format!("i{tag}.xor"));
        let inst = inst.to_str().unwrap().to_string();
        let g = kcert(&["gen", "random", "--n", "12", "--k", "3", "--m", "60", "--seed", "4", "--signed", "-o", &inst]);
        assert!(g.status.success());
        let c = Command::new(env!("CARGO_BIN_EXE_kcert"))
            .env("KCERT_THREADS", threads)
            .args(["refute", &inst, "--r", "3", "--seed", "9", "--relaxed", "--eta", "2"])
            .output()
            .unwrap();
        assert!(c.status.success(), "{}", String::from_utf8_lossy(&c.stderr));
        let d = kcert(&["kikuchi", "dump", &inst, "--odd", "--r", "3", "--relaxed", "--level", "1"]);
        (std::fs::read_to_string(&inst).unwrap(), stdout(&c), stdout(&d))
    };
    let a = run("a", "1");
    let b = run("b", "4");
    assert_eq!(a, b);
    let cert = dir.path().join("c.json");
    std::fs::write(&cert, &a.1).unwrap();
    let inst = dir.path().join("ia.xor");
    assert_eq!(
        kcert(&["verify-cert", inst.to_str().unwrap(), cert.to_str().unwrap()]).status.code(),
        Some(0)
    );
}

#[test]
fn capacity_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "t.hyg", "hyg 3 3 2\n1 2\n2 3\n1 3\n");
    assert_eq!(kcert(&["kikuchi", "stats", &tri, "--max-vertices", "2"]).status.code(), Some(3));
}

#[test]
fn audits() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.hyg");
    let p = p.to_str().unwrap();
    assert!(kcert(&["gen", "petersen", "--seed", "0", "-o", p]).status.success());
    let o = kcert(&["audit", "moore", p]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("exact-bound 8 ok"));
    let o = kcert(&["audit", "girth", p, "--ell", "4"]);
    assert!(stdout(&o).contains("girth 5") && stdout(&o).contains("pass"));
    assert_eq!(kcert(&["audit", "girth", p, "--ell", "3"]).status.code(), Some(1));
    let o = kcert(&["audit", "trace", p, "--ell", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("within\n"));
}

#[test]
fn decomposition_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "h.hyg", "hyg 16 2 3\n1 2 3\n1 2 4\n");
    let o = kcert(&["decompose", &h, "--mode", "cover", "--r", "4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("level 2 tau 2 groups 1"));
    assert!(out.contains("[1 2] 1 2"));
    let o = kcert(&["decompose", &h, "--mode", "refute", "--r", "4"]);
    assert_eq!(o.status.code(), Some(1), "r below 2k is rejected without --relaxed");

    let tri = write(dir.path(), "t.hyg", "hyg 3 3 2\n1 2\n2 3\n1 3\n");
    let o = kcert(&["kikuchi", "stats", &tri]);
    assert!(stdout(&o).starts_with("vertices 3\nedges 3\nalpha 1\nd 2\n"));
}
