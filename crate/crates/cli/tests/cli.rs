use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use revnets::analysis::dependence;
use revnets::explore::{check_lockstep, explore_rpn, find_stuck_states, rpn_lts_dot};
use revnets::fixtures;
use revnets::reversing::{fire_moves, parse_moves, DependenceKind, Semantics};
use revnets::translate::translate;
use revnets_cli::commands::analysis_report;
use revnets_cli::{CpnDocument, NetDocument};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_revnets"));
    c.env_remove("REVNETS_MAX_STATES");
    c
}

fn revnets(args: &[&str]) -> (i32, String, String) {
    let out: Output = bin().args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn fixture_file(name: &str) -> String {
    repo_root()
        .join("fixtures")
        .join(format!("{name}.rpn.json"))
        .display()
        .to_string()
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn validate_exit_codes() {
    assert_eq!(revnets(&["validate", &fixture_file("figure1")]).0, 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.rpn.json", "{ \"format\": 1, ");
    assert_eq!(revnets(&["validate", &bad]).0, 2);
    assert_eq!(revnets(&["validate", "no-such-net"]).0, 2);

    // A transition with two output places.
    let mut doc = NetDocument::from_fixture("single").unwrap();
    doc.net.places.push("p3".into());
    let mut arc = doc.net.arcs[1].clone();
    arc.to = "p3".into();
    doc.net.arcs.push(arc);
    let fork = write_temp(&dir, "fork.rpn.json", &doc.to_json());
    let (code, out, _) = revnets(&["validate", &fork]);
    assert_eq!(code, 1);
    assert!(out.contains("t1: clause 3"), "{out}");

    let mut doc = NetDocument::from_fixture("figure1").unwrap();
    doc.initial.get_mut("p2").unwrap().bases.push("a".into());
    let dup = write_temp(&dir, "dup.rpn.json", &doc.to_json());
    let (code, out, _) = revnets(&["validate", &dup]);
    assert_eq!(code, 1);
    assert!(out.contains("base a occurs in 2 places"), "{out}");
}

#[test]
fn run_assembles_figure1() {
    let (code, out, _) = revnets(&["run", &fixture_file("figure1"), "--moves", "t1,t2,t3,t4"]);
    assert_eq!(code, 0);
    assert!(
        out.contains("  p7: {a, b, c, a-b, b-c}\n  history: t1={1} t2={2} t3={3} t4={4}"),
        "{out}"
    );

    let (net, s0) = fixtures::figure1();
    let (code, out, _) = revnets(&["run", "figure1", "--trace", "assemble-and-undo"]);
    assert_eq!(code, 0);
    assert!(
        out.ends_with(&format!("final: {}\n", s0.canonical(&net))),
        "{out}"
    );
}

#[test]
fn run_reverse_moves() {
    let (net, s0) = fixtures::figure1();
    let (code, out, _) = revnets(&[
        "run",
        "figure1",
        "--semantics",
        "backtracking",
        "--moves",
        "t1,~t1",
    ]);
    assert_eq!(code, 0);
    assert!(out.ends_with(&format!("final: {}\n", s0.canonical(&net))));

    let causal = [
        "run",
        "figure1",
        "--semantics",
        "causal",
        "--dep",
        "structural",
        "--moves",
        "t1,t2,~t1",
    ];
    assert_eq!(revnets(&causal).0, 0);
    let (code, _, err) = revnets(&[
        "run",
        "figure1",
        "--semantics",
        "backtracking",
        "--moves",
        "t1,t2,~t1",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("not bt-enabled"), "{err}");

    assert_eq!(revnets(&["run", "figure1", "--moves", "t1,t7"]).0, 2);
    assert_eq!(revnets(&["run", "figure1", "--trace", "missing"]).0, 2);
}

#[test]
fn run_matches_library() {
    let (net, s0) = fixtures::figure3a();
    let text = "t1,t2,t3,t4,t5,~t5,~t4";
    let dep = dependence(&net, &s0, DependenceKind::CoBackwardConflict).unwrap();
    let moves = parse_moves(&net, text).unwrap();
    let expected = fire_moves(&net, &s0, &moves, Semantics::Causal, &dep).unwrap();
    let (code, out, _) = revnets(&[
        "run",
        "figure3a",
        "--semantics",
        "causal",
        "--dep",
        "co",
        "--moves",
        text,
    ]);
    assert_eq!(code, 0);
    assert!(
        out.ends_with(&format!("final: {}\n", expected.canonical(&net))),
        "{out}"
    );
}

#[test]
fn analyze_reports() {
    let (_, out, _) = revnets(&["analyze", "figure1"]);
    assert!(
        out.starts_with("trans-acyclic: yes; cycles: 0; transferring: t1,t2\n"),
        "{out}"
    );

    let (code, out, _) = revnets(&["analyze", "transport-loop"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("trans-acyclic: NO;"), "{out}");
    assert!(out.contains("witness: p1 -> t -> p2 -> u -> p1"), "{out}");
    assert!(out.contains("notice: marking dependence skipped"), "{out}");

    let (_, out, _) = revnets(&["analyze", "figure3a"]);
    assert!(
        out.contains(
            "dependence structural: {t1,t2} {t1,t3} {t1,t5} {t2,t3} {t3,t4} {t3,t6} {t4,t5} {t5,t6}\n"
        ),
        "{out}"
    );
}

#[test]
fn analyze_json_matches_library() {
    for f in fixtures::all() {
        let (net, s0) = (f.build)();
        let (code, out, _) = revnets(&["analyze", f.name, "--json"]);
        assert_eq!(code, 0);
        let report: revnets_cli::commands::AnalysisReport = serde_json::from_str(&out).unwrap();
        assert_eq!(report, analysis_report(&net, &s0));
        for kind in DependenceKind::ALL {
            let expected = dependence(&net, &s0, kind).ok().map(|r| {
                r.named_pairs(&net)
                    .into_iter()
                    .map(|(a, b)| [a, b])
                    .collect::<Vec<_>>()
            });
            assert_eq!(report.dependence[kind.as_str()], expected, "{} {kind}", f.name);
        }
    }
}

#[test]
fn translate_writes_documents() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("figure1.cpn.json");
    let dot_path = dir.path().join("figure1.dot");
    let (code, out, _) = revnets(&[
        "translate",
        "figure1",
        "-o",
        out_path.to_str().unwrap(),
        "--dot",
        dot_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("17 places"), "{out}");
    let text = std::fs::read_to_string(&out_path).unwrap();
    let doc = CpnDocument::parse(&text).unwrap();
    assert_eq!(doc.cpn.places.len(), 7 + 4 + 6);
    assert_eq!(doc.to_json(), text);
    assert_eq!(doc.regenerate().unwrap(), doc);
    assert!(std::fs::read_to_string(&dot_path).unwrap().starts_with("digraph"));

    // Same net as the library produces.
    let (net, s0) = fixtures::figure1();
    let dep = dependence(&net, &s0, DependenceKind::Structural).unwrap();
    let tr = translate(&net, &s0, Semantics::Backtracking, &dep).unwrap();
    assert_eq!(doc.cpn, tr.cpn);
    assert_eq!(doc.layout, tr.layout);

    let (_, out, _) = revnets(&["translate", "figure2"]);
    let doc = CpnDocument::parse(&out).unwrap();
    for name in ["h_t1", "h_t2", "h_t1_t2"] {
        assert!(doc.cpn.places.contains_key(name), "{name}");
    }
    assert!(doc.cpn.transitions.contains_key("tr_t1"));

    assert_eq!(revnets(&["translate", "transport-loop"]).0, 1);
}

#[test]
fn check_theorems() {
    let (code, out, _) = revnets(&["check", "figure1", "--theorem", "lockstep"]);
    assert_eq!(code, 0, "{out}");
    let (net, s0) = fixtures::figure1();
    let dep = dependence(&net, &s0, DependenceKind::Structural).unwrap();
    let tr = translate(&net, &s0, Semantics::Backtracking, &dep).unwrap();
    let report = check_lockstep(&net, &s0, &tr, Semantics::Backtracking, &dep, 1000).unwrap();
    assert!(out.contains(&format!(
        "rpn states: {}; cpn states: {}; steps checked: {}",
        report.rpn_states, report.cpn_states, report.steps_checked
    )));

    let (code, out, _) = revnets(&["check", "figure4", "--dep", "co", "--theorem", "stuck"]);
    assert_eq!(code, 1);
    assert!(out.contains("trace: t1 t2 t3 t4 ~t2\n"), "{out}");
    let (net, s0) = fixtures::figure4();
    let dep = dependence(&net, &s0, DependenceKind::CoBackwardConflict).unwrap();
    let stuck = find_stuck_states(&net, &s0, &dep, 10_000).unwrap();
    assert!(out.contains(&format!("stuck states: {}\n", stuck.len())));

    assert_eq!(
        revnets(&["check", "figure4", "--dep", "structural", "--theorem", "stuck"]).0,
        0
    );

    let (code, out, _) = revnets(&[
        "check",
        "figure1",
        "--semantics",
        "causal",
        "--dep",
        "marking",
        "--theorem",
        "roundtrip",
        "--max-len",
        "6",
        "--trials",
        "50",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("50 random walks (seed 3)"), "{out}");
}

#[test]
fn cap_exceeded_exits_three() {
    let out = bin()
        .args(["check", "figure1", "--theorem", "lockstep"])
        .env("REVNETS_MAX_STATES", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("frontier of"));
    assert_eq!(
        revnets(&["check", "figure1", "--theorem", "stuck", "--max-states", "3"]).0,
        3
    );
    let out = bin()
        .args(["check", "figure1", "--theorem", "stuck"])
        .env("REVNETS_MAX_STATES", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lts_dot_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lts.dot");
    let (code, _, _) = revnets(&[
        "check",
        "figure2",
        "--theorem",
        "roundtrip",
        "--lts-dot",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (net, s0) = fixtures::figure2();
    let dep = dependence(&net, &s0, DependenceKind::Structural).unwrap();
    let lts = explore_rpn(&net, &s0, Semantics::Backtracking, &dep, 1000).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), rpn_lts_dot(&net, &lts));
}

#[test]
fn repl_session() {
    let mut child = bin()
        .args(["repl", "figure1", "--semantics", "causal"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"state\nfire t1\nfire t2\nlist\nundo t3\nhistory\nbogus\nquit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("reverse: t1, t2"), "{text}");
    assert!(text.contains("t3 has not been executed"), "{text}");
    assert!(text.contains("t1:{1} t2:{2}"), "{text}");
    assert!(text.contains("unknown command \"bogus\""), "{text}");
}

#[test]
fn shipped_fixture_files_match_exports() {
    let bless = std::env::var_os("REVNETS_BLESS").is_some();
    for f in fixtures::all() {
        let path = fixture_file(f.name);
        let expected = NetDocument::from_fixture(f.name).unwrap().to_json();
        if bless {
            std::fs::write(&path, &expected).unwrap();
        }
        let text = std::fs::read_to_string(&path)
            .unwrap_or_else(|_| panic!("{path} missing; rerun with REVNETS_BLESS=1"));
        assert_eq!(text, expected, "{path} is stale; rerun with REVNETS_BLESS=1");
        let (code, out, _) = revnets(&["export", f.name]);
        assert_eq!(code, 0);
        assert_eq!(out, text);
        let parsed = NetDocument::parse(&text).unwrap();
        assert_eq!(parsed.to_json(), text);
    }
}

#[test]
fn equivalent_documents_share_a_digest() {
    let doc = NetDocument::from_fixture("figure3a").unwrap();
    let mut shuffled = doc.clone();
    shuffled.net.places.reverse();
    shuffled.net.arcs.reverse();
    shuffled.traces.clear();
    assert_ne!(shuffled.to_json(), doc.to_json());
    assert_eq!(shuffled.digest().unwrap(), doc.digest().unwrap());
}

/// The `console` examples in the book's CLI chapter are real output.
#[test]
fn book_console_examples_are_current() {
    let text = std::fs::read_to_string(repo_root().join("book/src/cli.md")).unwrap();
    let block = text
        .split("```console\n")
        .nth(1)
        .unwrap()
        .split("```")
        .next()
        .unwrap();
    let mut checked = 0;
    for example in block.split("\n\n") {
        let mut lines = example.lines();
        let command = lines.next().unwrap().strip_prefix("$ revnets ").unwrap();
        let expected: Vec<&str> = lines.collect();
        let (cmd, filter) = match command.split_once(" | ") {
            Some((c, f)) => (c, Some(f)),
            None => (command, None),
        };
        let args: Vec<String> = cmd
            .split('"')
            .enumerate()
            .flat_map(|(k, part)| {
                if k % 2 == 1 {
                    vec![part.to_string()]
                } else {
                    part.split_whitespace().map(str::to_string).collect()
                }
            })
            .collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (_, out, _) = revnets(&args);
        let all: Vec<&str> = out.lines().collect();
        let shown: Vec<&str> = match filter {
            Some(f) if f.starts_with("tail -") => {
                all[all.len() - f[6..].parse::<usize>().unwrap()..].to_vec()
            }
            Some(f) if f.starts_with("head -") => all[..f[6..].parse::<usize>().unwrap()].to_vec(),
            Some(f) => panic!("unsupported filter {f}"),
            None => all,
        };
        assert_eq!(shown, expected, "{command}");
        checked += 1;
    }
    assert_eq!(checked, 3);
}
