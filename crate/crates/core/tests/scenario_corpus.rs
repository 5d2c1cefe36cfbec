//! The scenario language over the bundled corpus: printing round trips,
//! single-expectation mutations, deterministic reports and the CLI.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use gcx::exterior::equality::SampleConfig;
use gcx::scenario::ast::{Scenario, Stmt};
use gcx::scenario::corpus::{list_corpus, run_file};
use gcx::scenario::parser::parse;
use gcx::scenario::printer::print_scenario;
use gcx::scenario::runner::run;

fn corpus() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))
}

fn scenarios() -> Vec<(String, Scenario)> {
    let entries = list_corpus(&corpus()).unwrap();
    assert!(entries.len() >= 20, "corpus has {} files", entries.len());
    entries
        .into_iter()
        .map(|e| {
            let src = fs::read_to_string(&e.path).unwrap();
            let s = parse(&src).unwrap_or_else(|err| panic!("{}: {err}", e.file));
            (e.file, s)
        })
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("gcx-test-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn printing_round_trips() {
    for (file, s) in scenarios() {
        let text = print_scenario(&s);
        let again = parse(&text).unwrap_or_else(|e| panic!("{file}: reparse failed: {e}\n{text}"));
        assert_eq!(again.title, s.title, "{file}");
        assert_eq!(again.stmts(), s.stmts(), "{file}");
        assert_eq!(print_scenario(&again), text, "{file}");
    }
}

fn mutate(value: &str) -> String {
    match value {
        "true" => "false".into(),
        "false" => "true".into(),
        v => match v.parse::<i64>() {
            Ok(n) => (n + 1).to_string(),
            Err(_) => format!("{v} mutated"),
        },
    }
}

#[test]
fn each_mutated_expectation_fails_alone() {
    let cfg = SampleConfig::default();
    let mut mutations = 0;
    for (file, s) in scenarios() {
        let base = run(&s, &file, &cfg);
        assert_eq!(base.exit_code(), 0, "{file}:\n{}", base.render());
        for (i, l) in s.statements.iter().enumerate() {
            let Stmt::Expect { key, value } = &l.stmt else { continue };
            let mut m = s.clone();
            m.statements[i].stmt = Stmt::Expect { key: key.clone(), value: mutate(value) };
            let r = run(&m, &file, &cfg);
            let failed: Vec<usize> =
                r.commands.iter().flat_map(|c| c.assertions.iter()).filter(|a| !a.passed).map(|a| a.line).collect();
            assert_eq!(failed, vec![l.line], "{file} line {}: `{key}`", l.line);
            assert!(r.commands.iter().all(|c| c.unexpected_error.is_none()), "{file} line {}", l.line);
            assert_eq!(r.failures(), 1);
            assert_eq!(r.exit_code(), 1);
            mutations += 1;
        }
    }
    assert!(mutations > 100, "only {mutations} expectations in the corpus");
}

#[test]
fn reports_are_deterministic() {
    for e in list_corpus(&corpus()).unwrap() {
        let cfg = SampleConfig::default().with_seed(7);
        let a = run_file(&e.path, &cfg).render();
        let b = run_file(&e.path, &cfg).render();
        assert_eq!(a, b, "{}", e.file);
        assert!(a.contains("seed: 7\n"), "{}", e.file);
    }
}

#[test]
fn corpus_passes_under_other_seeds() {
    for seed in [1, 12345] {
        for e in list_corpus(&corpus()).unwrap() {
            let r = run_file(&e.path, &SampleConfig::default().with_seed(seed));
            assert_eq!(r.exit_code(), 0, "{} seed {seed}:\n{}", e.file, r.render());
        }
    }
}

#[test]
fn manifest_titles_are_descriptive() {
    let entries = list_corpus(&corpus()).unwrap();
    for e in &entries {
        assert!(!e.title.starts_with('('), "{}: {}", e.file, e.title);
    }
    let files: Vec<&str> = entries.iter().map(|e| e.file.as_str()).collect();
    for f in ["cor_2_8.gcx", "ex_3_3_torsion.gcx", "thm_3_6.gcx", "prop_3_9_e1.gcx", "ex_5_3_elliptic.gcx"] {
        assert!(files.contains(&f), "{f} missing");
    }
}

fn gcx() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gcx"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const PASSING: &str = "# title: passing\nmanifold M { dim = 4\n chi = 2\n signature = 0 }\nreport M\nexpect chi = 2\n";
const FAILING: &str = "# title: failing\nmanifold M { dim = 4\n chi = 2\n signature = 0 }\nreport M\nexpect chi = 3\n";
const BROKEN: &str = "# title: broken\nform = dx^\n";

#[test]
fn cli_exit_codes() {
    let dir = scratch("exit");
    let ok = write(&dir, "ok.gcx", PASSING);
    let bad = write(&dir, "bad.gcx", FAILING);
    let broken = write(&dir, "broken.gcx", BROKEN);
    let status = |args: &[&str]| gcx().args(args).output().unwrap();

    let out = status(&["run", ok.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("--- machine ---") && text.contains("status: pass"));

    let out = status(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAILED (got 2)"));

    let out = status(&["run", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(status(&["run", dir.join("absent.gcx").to_str().unwrap()]).status.code(), Some(2));

    let report = dir.join("report.txt");
    let out = status(&["run", ok.to_str().unwrap(), "--seed", "3", "--samples", "8", "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = fs::read_to_string(&report).unwrap();
    assert!(written.contains("seed: 3\n") && written.contains("samples: 8\n"));
}

#[test]
fn cli_corpus_directory_override() {
    let empty = scratch("empty");
    let out = gcx().args(["corpus", "list"]).env("GCX_CORPUS_DIR", &empty).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let out = gcx().args(["corpus", "run-all"]).env("GCX_CORPUS_DIR", &empty).output().unwrap();
    assert_eq!(out.status.code(), Some(0));

    let mixed = scratch("mixed");
    write(&mixed, "a.gcx", PASSING);
    write(&mixed, "b.gcx", FAILING);
    write(&mixed, "notes.txt", "ignored");
    let out = gcx().args(["corpus", "list"]).env("GCX_CORPUS_DIR", &mixed).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "a.gcx  passing\nb.gcx  failing\n");
    let out = gcx().args(["corpus", "run-all"]).env("GCX_CORPUS_DIR", &mixed).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    write(&mixed, "c.gcx", BROKEN);
    let out = gcx().args(["corpus", "run-all"]).env("GCX_CORPUS_DIR", &mixed).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = gcx().args(["corpus", "list"]).env("GCX_CORPUS_DIR", empty.join("missing")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_verify_checks_declared_spinors() {
    let out = gcx().args(["verify", corpus().join("cor_2_8.gcx").to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("integrable"));
}
