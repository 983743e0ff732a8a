use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use domainweb_core::classifier::ClassifierModel;
use domainweb_core::sharing::{ingest, read_share_records};

const BIN: &str = env!("CARGO_BIN_EXE_domainweb");

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn domainweb(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--output-dir")
        .arg(out)
        .arg("--config")
        .arg(fixtures().join("pipeline.toml"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_level_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = domainweb(dir.path(), &["crawl", "--level", "3"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    fs::write(dir.path().join("level.toml"), "[crawl]\nlevel = 3\n").unwrap();
    let o = Command::new(BIN)
        .arg("--config")
        .arg(dir.path().join("level.toml"))
        .arg("--output-dir")
        .arg(dir.path())
        .args(["crawl", "--domains"])
        .arg(fixtures().join("curation/denylist.txt"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn missing_records_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.ndjson");
    let o = domainweb(
        dir.path(),
        &["social", "--shares", missing.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains(missing.to_str().unwrap()),
        "{}",
        stderr(&o)
    );
}

#[test]
fn crawl_refuses_to_overwrite_a_run() {
    let dir = tempfile::tempdir().unwrap();
    assert!(domainweb(dir.path(), &["curate"]).status.success());
    let crawl = ["crawl", "--run-id", "twice"];
    let o = domainweb(dir.path(), &crawl);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["snapshots"], 12);
    let before = fs::read(dir.path().join("snapshots/twice.ndjson")).unwrap();

    let o = domainweb(dir.path(), &crawl);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--force"), "{}", stderr(&o));
    assert_eq!(
        fs::read(dir.path().join("snapshots/twice.ndjson")).unwrap(),
        before
    );

    let o = domainweb(dir.path(), &["crawl", "--run-id", "twice", "--force"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(dir.path().join("snapshots/twice.ndjson")).unwrap(),
        before
    );
}

#[test]
fn empty_graph_gives_valid_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("gone.txt");
    fs::write(&list, "gone.com\n").unwrap();
    assert!(domainweb(dir.path(), &["curate"]).status.success());
    let o = domainweb(
        dir.path(),
        &[
            "crawl",
            "--run-id",
            "empty",
            "--domains",
            list.to_str().unwrap(),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let o = domainweb(dir.path(), &["analyze", "--run-id", "empty"]);
    assert!(o.status.success(), "{}", stderr(&o));

    let out = dir.path().join("analysis/empty");
    for name in [
        "communities.json",
        "cliques.json",
        "discoveries.json",
        "summary.json",
    ] {
        let text = fs::read_to_string(out.join(name)).unwrap();
        serde_json::from_str::<serde_json::Value>(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["graph"]["nodes"], 0);
    assert_eq!(summary["excluded_domains"][0], "gone.com");
    let gexf = fs::read_to_string(out.join("graph.gexf")).unwrap();
    assert!(gexf.contains("<nodes") && gexf.trim_end().ends_with("</gexf>"));
    assert_eq!(
        fs::read_to_string(out.join("partition.csv")).unwrap(),
        "domain,community_id\n"
    );
    assert!(fs::read_to_string(out.join("link_stats.csv"))
        .unwrap()
        .contains("misinfo,0,0.00,0,0.00,0,0.00,0"));
}

#[test]
fn empty_sources_give_an_empty_list() {
    let dir = tempfile::tempdir().unwrap();
    let sources = dir.path().join("sources.csv");
    fs::write(&sources, "source,domain,headline\n").unwrap();
    let o = Command::new(BIN)
        .arg("--output-dir")
        .arg(dir.path())
        .args(["curate", "--sources"])
        .arg(&sources)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("no source entries"), "{}", stderr(&o));
    let master = fs::read_to_string(dir.path().join("master.csv")).unwrap();
    assert_eq!(master.lines().count(), 1);
}

#[test]
fn predictions_match_the_stored_model() {
    let dir = tempfile::tempdir().unwrap();
    let o = domainweb(
        dir.path(),
        &["social", "--predict", "rumor03.news", "daily07.com"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let printed: Vec<&str> = stdout.lines().rev().take(2).collect();

    let model_path = dir.path().join("social/model.json");
    let model = ClassifierModel::from_json(&fs::read_to_string(&model_path).unwrap()).unwrap();
    assert_eq!(model.trained_at.as_deref(), Some("2023-11-14T22:13:20Z"));
    let matrix = ingest(
        read_share_records(&fixtures().join("social/shares.ndjson"))
            .unwrap()
            .records,
    )
    .matrix;
    let expect = |domain: &str| {
        let row = matrix.row_of(domain).unwrap();
        let users: Vec<&str> = matrix
            .sharers(row)
            .iter()
            .map(|&u| matrix.users()[u as usize].as_str())
            .collect();
        format!(
            "{domain}\t{:.4}",
            model.predict(&model.features_for(&users)).unwrap()
        )
    };
    assert_eq!(printed, [expect("daily07.com"), expect("rumor03.news")]);

    // Loading the saved model prints the same lines.
    let o = domainweb(
        dir.path(),
        &[
            "social",
            "--model",
            model_path.to_str().unwrap(),
            "--predict",
            "rumor03.news",
            "daily07.com",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let again: Vec<String> = String::from_utf8_lossy(&o.stdout)
        .lines()
        .map(String::from)
        .collect();
    assert_eq!(again, [expect("rumor03.news"), expect("daily07.com")]);
}

#[test]
fn serve_fixtures_answers_by_host() {
    let mut child = Command::new(BIN)
        .arg("serve-fixtures")
        .arg(fixtures().join("web"))
        .args(["--port", "0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line.trim().rsplit("http://").next().unwrap().to_string();

    let get = |host: &str| {
        let mut s = TcpStream::connect(&addr).unwrap();
        write!(
            s,
            "GET / HTTP/1.1\r\nHost: {host}\r\nConnection: close\r\n\r\n"
        )
        .unwrap();
        let mut reply = String::new();
        s.read_to_string(&mut reply).unwrap();
        reply
    };
    let alpha = get("alpha.news");
    let gone = get("gone.com");
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(alpha.starts_with("HTTP/1.1 200"), "{alpha}");
    assert!(alpha.contains("bravo.news"));
    assert!(gone.starts_with("HTTP/1.1 404"), "{gone}");
}
