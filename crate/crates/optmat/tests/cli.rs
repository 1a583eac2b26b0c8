//! End-to-end checks of the command-line interface: exit codes, stream
//! separation, file formats.

use std::path::Path;
use std::process::{Command, Output};

use optmat::bitmat::{Dim, Family};
use optmat::bits::BitArray;
use optmat::index::{bitmat_path, read_bitmat, write_bitmat};
use optmat::term::{Space, Term};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optmat"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).to_string()
}

fn write_fixture(dir: &Path) -> (String, String) {
    let nt = dir.join("g.nt");
    let rq = dir.join("q.rq");
    std::fs::write(&nt, include_str!("data/sitcoms.nt")).unwrap();
    std::fs::write(&rq, include_str!("data/friends_query.rq")).unwrap();
    (nt.display().to_string(), rq.display().to_string())
}

#[test]
fn index_reports_dataset_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let (nt, _) = write_fixture(tmp.path());
    let idx = tmp.path().join("idx");
    let out = run(&["index", "--data", &nt, "--index-dir", &idx.display().to_string()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("#triples: 12"), "{text}");
    assert!(text.contains("#P: 3"), "{text}");

    // refuses to clobber without --force
    let again = run(&["index", "--data", &nt, "--index-dir", &idx.display().to_string()]);
    assert_eq!(again.status.code(), Some(1));
    assert!(stderr(&again).contains("--force"));
    let forced =
        run(&["index", "--data", &nt, "--index-dir", &idx.display().to_string(), "--force"]);
    assert!(forced.status.success());
}

#[test]
fn index_empty_file_builds_empty_index() {
    let tmp = tempfile::tempdir().unwrap();
    let nt = tmp.path().join("empty.nt");
    std::fs::write(&nt, "").unwrap();
    let idx = tmp.path().join("idx");
    let out = run(&["index", "--data", &nt.display().to_string(), "--index-dir", &idx.display().to_string()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("#triples: 0"));
    assert!(stdout(&out).contains("#bitmats: 0"));
}

#[test]
fn query_streams_tsv_rows_and_stats_separately() {
    let tmp = tempfile::tempdir().unwrap();
    let (nt, rq) = write_fixture(tmp.path());
    let idx = tmp.path().join("idx").display().to_string();
    assert!(run(&["index", "--data", &nt, "--index-dir", &idx]).status.success());

    let stats_json = tmp.path().join("stats.json");
    let out = run(&[
        "query",
        "--index-dir",
        &idx,
        "--query",
        &rq,
        "--dump-plan",
        "--stats-json",
        &stats_json.display().to_string(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = stdout(&out);
    let mut lines = rows.lines();
    assert_eq!(lines.next(), Some("?friend\t?sitcom"));
    let data: Vec<&str> = lines.collect();
    assert_eq!(data.len(), 2);
    assert!(data.iter().any(|l| l.contains("NULL")), "{rows}");
    assert!(data.iter().any(|l| l.contains("Seinfeld")), "{rows}");

    let diag = stderr(&out);
    assert!(diag.contains("#results with nulls: 1"), "{diag}");
    assert!(diag.contains("supernodes:"), "--dump-plan report present: {diag}");

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&stats_json).unwrap()).unwrap();
    assert_eq!(json["#total results"], 2);
    assert_eq!(json["#results with nulls"], 1);
    assert_eq!(json["best-match reqd?"], false);
}

#[test]
fn unsupported_features_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let (nt, _) = write_fixture(tmp.path());
    let idx = tmp.path().join("idx").display().to_string();
    assert!(run(&["index", "--data", &nt, "--index-dir", &idx]).status.success());
    let rq = tmp.path().join("union.rq");
    std::fs::write(&rq, "SELECT * WHERE { { ?a <p> ?b } UNION { ?a <q> ?b } }").unwrap();
    let out = run(&["query", "--index-dir", &idx, "--query", &rq.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unsupported feature"));
}

#[test]
fn forced_best_match_returns_identical_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let (nt, rq) = write_fixture(tmp.path());
    let idx = tmp.path().join("idx").display().to_string();
    assert!(run(&["index", "--data", &nt, "--index-dir", &idx]).status.success());
    let plain = run(&["query", "--index-dir", &idx, "--query", &rq]);
    let forced = run(&["query", "--index-dir", &idx, "--query", &rq, "--force-best-match"]);
    let mut a: Vec<String> = stdout(&plain).lines().map(String::from).collect();
    let mut b: Vec<String> = stdout(&forced).lines().map(String::from).collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn verify_passes_and_detects_corruption() {
    let tmp = tempfile::tempdir().unwrap();
    let (nt, rq) = write_fixture(tmp.path());
    let idx = tmp.path().join("idx");
    let idx_s = idx.display().to_string();
    assert!(run(&["index", "--data", &nt, "--index-dir", &idx_s]).status.success());

    let ok = run(&["verify", "--index-dir", &idx_s, "--data", &nt, "--query", &rq]);
    assert!(ok.status.success(), "{}", stderr(&ok));
    assert!(stdout(&ok).contains("PASS"));

    // drop one acting triple from the S-O slice only: the engine reads the
    // damaged index, the oracle reads the raw data, and they disagree
    let dict = optmat::dictionary::load_dictionary(&optmat::index::dictionary_path(&idx)).unwrap();
    let p = dict.encode(&Term::iri("http://ex/actedIn"), Space::Predicate).unwrap();
    let seinfeld = dict.encode(&Term::iri("http://ex/Seinfeld"), Space::Object).unwrap();
    let path = bitmat_path(&idx, Family::So, p);
    let mut bm = read_bitmat(&path).unwrap();
    let keep: Vec<u32> = (1..=bm.col_dim).filter(|c| *c != seinfeld).collect();
    let mask = BitArray::from_positions(bm.col_dim, keep);
    bm.unfold(&mask, Dim::Col).unwrap();
    write_bitmat(&path, &bm).unwrap();

    let bad = run(&["verify", "--index-dir", &idx_s, "--data", &nt, "--query", &rq]);
    assert_eq!(bad.status.code(), Some(3), "{}", stderr(&bad));
    assert!(stdout(&bad).contains("FAIL"));
    assert!(stderr(&bad).contains("divergence"), "{}", stderr(&bad));
}

#[test]
fn verify_random_suites_pass() {
    let out = run(&["verify", "--random", "25", "--seed", "11", "--class", "mixed-wd"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("PASS"));
    let out = run(&["verify", "--random", "10", "--seed", "3", "--class", "nwd"]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn stats_reports_dimension_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let (nt, _) = write_fixture(tmp.path());
    let idx = tmp.path().join("idx").display().to_string();
    assert!(run(&["index", "--data", &nt, "--index-dir", &idx]).status.success());
    let out = run(&["stats", "--index-dir", &idx, "--json"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["#triples"], 12);
    assert_eq!(json["#P"], 3);
}

#[test]
fn gen_is_deterministic_and_labels_classes() {
    let tmp = tempfile::tempdir().unwrap();
    let p1 = tmp.path().join("a");
    let p2 = tmp.path().join("b");
    for (prefix, seed) in [(&p1, "5"), (&p2, "5")] {
        let out = run(&[
            "gen",
            "--seed",
            seed,
            "--class",
            "cyclic-single-jvar-slave",
            "--out-prefix",
            &prefix.display().to_string(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stdout(&out).contains("class: cyclic-single-jvar-slave"));
    }
    let a_nt = std::fs::read_to_string(p1.with_extension("nt")).unwrap();
    let b_nt = std::fs::read_to_string(p2.with_extension("nt")).unwrap();
    assert_eq!(a_nt, b_nt);
    let a_rq = std::fs::read_to_string(p1.with_extension("rq")).unwrap();
    let b_rq = std::fs::read_to_string(p2.with_extension("rq")).unwrap();
    assert_eq!(a_rq, b_rq);
}
