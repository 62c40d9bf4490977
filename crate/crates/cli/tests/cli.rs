use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use skipalign_core::io;

fn skipalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skipalign"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p: PathBuf = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn align_single_trace() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.tree", "->(a,X(b,c),d)\n");
    let log = write(dir.path(), "l.csv", "case_id,activity\nc1,a\nc1,d\n");
    let o = skipalign(&["align", "--model", &model, "--log", &log]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = io::read_results(&stdout(&o)).unwrap();
    assert_eq!(doc.traces.len(), 1);
    assert_eq!(doc.traces[0].cost, Some(1));
    assert_eq!(doc.traces[0].alignments.len(), 1);
    assert_eq!(doc.traces[0].alignments[0].cost, 1);
}

#[test]
fn empty_log_gives_empty_document() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.tree", "->(a,b)");
    let log = write(dir.path(), "l.csv", "case_id,activity\n");
    let o = skipalign(&["align", "--model", &model, "--log", &log]);
    assert_eq!(o.status.code(), Some(0));
    assert!(io::read_results(&stdout(&o)).unwrap().traces.is_empty());

    let xes = write(dir.path(), "l.xes", "<log></log>");
    let o = skipalign(&["align", "--model", &model, "--log", &xes]);
    assert_eq!(o.status.code(), Some(0));
    assert!(io::read_results(&stdout(&o)).unwrap().traces.is_empty());
}

#[test]
fn input_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.tree", "->(a,");
    let log = write(dir.path(), "l.csv", "case_id,activity\nc1,a\n");
    let o = skipalign(&["align", "--model", &bad, "--log", &log]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("syntax error at offset"), "{}", stderr(&o));

    let model = write(dir.path(), "m.tree", "->(a,b)");
    let txt = write(dir.path(), "l.txt", "a b");
    assert_eq!(
        skipalign(&["align", "--model", &model, "--log", &txt]).status.code(),
        Some(1)
    );
    let o = skipalign(&["align", "--model", &model, "--log", &txt, "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1), "missing columns");
    assert_eq!(
        skipalign(&["align", "--model", "nope.tree", "--log", &log])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        skipalign(&["align", "--model", &model, "--log", &log, "--max-states", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        skipalign(&["align", "--model", &model, "--log", &log, "--heuristic", "best"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(skipalign(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(skipalign(&["--help"]).status.code(), Some(0));
}

#[test]
fn state_limit_is_a_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "m.tree", "*(->(a,b),c)");
    let log = write(dir.path(), "l.csv", "case_id,activity\nc1,b\nc1,a\nc2,a\nc2,b\n");
    let out = dir.path().join("out.json");
    let o = skipalign(&[
        "align",
        "--model",
        &model,
        "--log",
        &log,
        "--max-states",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let doc = io::read_results(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc.traces.len(), 2);
    let failed: Vec<_> = doc.traces.iter().filter(|t| t.error.is_some()).collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|t| t.cost.is_none() && t.alignments.is_empty()));
}

#[test]
fn output_is_deterministic_and_deduplicated() {
    let dir = tempfile::tempdir().unwrap();
    let model = data("claims.tree");
    let log = data("claims.csv");
    let mut outputs = Vec::new();
    for workers in ["1", "2", "8"] {
        let out = dir.path().join(format!("out{workers}.json"));
        let o = skipalign(&[
            "align",
            "--model",
            &model,
            "--log",
            &log,
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let doc = io::read_results(std::str::from_utf8(&outputs[0]).unwrap()).unwrap();
    // k1 and k5 share a variant
    assert_eq!(doc.traces.len(), 4);
    assert_eq!(doc.traces[0].cases, vec!["k1", "k5"]);
    assert_eq!(doc.traces[0].multiplicity, 2);
}

#[test]
fn verify_bundled_examples() {
    for (model, log) in [
        ("choice.tree", "choice.csv"),
        ("loop.tree", "loop.xes"),
        ("claims.tree", "claims.csv"),
    ] {
        let o = skipalign(&["verify", "--model", &data(model), "--log", &data(log)]);
        assert_eq!(o.status.code(), Some(0), "{model}: {}", stdout(&o));
        assert!(!stdout(&o).contains("MISMATCH"));
    }
}

#[test]
fn verify_budget_and_fault() {
    let dir = tempfile::tempdir().unwrap();
    let leaves: Vec<String> = (0..39).map(|i| format!("a{i}")).collect();
    let big = write(dir.path(), "big.tree", &format!("->({})", leaves.join(",")));
    let log = write(dir.path(), "l.csv", "case_id,activity\nc1,a0\nc1,a7\n");
    let o = skipalign(&["verify", "--model", &big, "--log", &log]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));

    let o = skipalign(&[
        "verify",
        "--model",
        &data("choice.tree"),
        "--log",
        &data("choice.csv"),
        "--inject-fault",
    ]);
    assert_eq!(o.status.code(), Some(4));
    let text = stdout(&o);
    assert!(text.contains("MISMATCH"));
    assert!(text.contains("+ oracle only: <sync(a), skip(B2), sync(d)>"), "{text}");
}

#[test]
fn stats_tables() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(
        dir.path(),
        "empty.json",
        &io::write_results(&io::ResultDocument::default()),
    );
    let o = skipalign(&["stats", "--results", &empty]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("traces 0  cases 0  failed 0\n"));

    let model = write(dir.path(), "m.tree", "->(a,X(b,c),d)");
    let log = write(dir.path(), "l.csv", "case_id,activity\nc1,a\nc1,d\n");
    let results = dir.path().join("r.json");
    let o = skipalign(&[
        "align",
        "--model",
        &model,
        "--log",
        &log,
        "--out",
        results.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = skipalign(&["stats", "--results", results.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("\nblock\tskips\nB2\t1\n"), "{text}");
    assert!(text.contains("\ncost\ttraces\tcases\n1\t1\t1\n"), "{text}");
    assert!(text.contains("\na\t0\t1\n"), "{text}");

    assert_eq!(
        skipalign(&["stats", "--results", "missing.json"]).status.code(),
        Some(1)
    );
    let junk = write(dir.path(), "junk.json", "{\"schema\":\"other/9\",\"traces\":[]}");
    assert_eq!(skipalign(&["stats", "--results", &junk]).status.code(), Some(1));
}
