use std::path::PathBuf;
use std::process::{Command, Output};

use bwsched_cli::svg::{MARGIN_TOP, PLOT_HEIGHT};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn bwsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bwsched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn validate_table1_is_clean() {
    let out = bwsched(&["validate", "-s", &fixture("table1.json"), "--limit", "10"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("max concurrency: 1"));
    assert!(!stdout(&out).contains("VIOLATION"));
}

#[test]
fn validate_duplicate_window_violates_limit() {
    let out = bwsched(&["validate", "-s", &fixture("duplicate.json"), "--limit", "1"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("VIOLATION: concurrency 2 exceeds limit 1"));
}

#[test]
fn validate_close_centers_violate_spacing() {
    let out = bwsched(&[
        "validate",
        "-s",
        &fixture("close_centers.json"),
        "--spacing",
        "12",
        "--json",
    ]);
    assert_eq!(code(&out), 1);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let v = &report["spacing_violations"];
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert!((v[0]["gap"].as_f64().unwrap() - 10.0).abs() < 1e-9);
}

#[test]
fn validate_missing_file_is_io_error() {
    let out = bwsched(&["validate", "-s", "/nonexistent/schedule.json"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn validate_accepts_schedule_outcome_as_new_windows() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = dir.path().join("out.json");
    let out = bwsched(&[
        "schedule",
        "-s",
        &fixture("weekly_cluster.json"),
        "--k",
        "3",
        "--epsilon",
        "40",
        "--alpha",
        "0.2",
        "-o",
        outcome.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = bwsched(&[
        "validate",
        "-s",
        &fixture("weekly_cluster.json"),
        "--new",
        outcome.to_str().unwrap(),
        "--spacing",
        "40",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = report["windows"].as_array().unwrap();
    assert_eq!(rows.iter().filter(|r| r["new"] == true).count(), 3);
}

#[test]
fn schedule_writes_outcome_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = bwsched(&[
        "schedule",
        "-s",
        &fixture("weekly_cluster.json"),
        "--k",
        "4",
        "--epsilon",
        "10",
        "--alpha",
        "0.8",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["centers"].as_array().unwrap().len(), 4);
    assert_eq!(doc["effective_params"]["alpha"], 0.8);
    assert_eq!(doc["effective_params"]["epsilon"], 10.0);
    assert_eq!(doc["rng"], "ChaCha8Rng");
    // table on stdout when JSON goes to a file
    assert!(stdout(&out).contains("center"));
    assert_eq!(
        stdout(&out).lines().filter(|l| l.contains(" new ")).count(),
        4
    );
}

#[test]
fn schedule_flags_override_intent() {
    let out = bwsched(&[
        "schedule",
        "-s",
        &fixture("weekly_cluster.json"),
        "--intent",
        "Incremental backup for asset  VM16as_v1 4 times with moderate overlap with my existing schedules. Ensure that they are spread apart by at least 10 hours",
        "--alpha-table",
        "paper",
        "--k",
        "2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let p = &doc["effective_params"];
    assert_eq!(p["k"], 2);
    assert_eq!(p["alpha"], 0.8);
    assert_eq!(p["epsilon"], 10.0);
    assert_eq!(p["asset"], "VM16as_v1");
    assert_eq!(doc["windows"][0]["client"], "VM16as_v1");
}

#[test]
fn schedule_ill_posed_request_exits_2() {
    let out = bwsched(&[
        "schedule",
        "-s",
        &fixture("weekly_cluster.json"),
        "--k",
        "20",
        "--epsilon",
        "12",
    ]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("20×12 = 240 ≥ 168"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn schedule_exhaustion_exits_1() {
    let out = bwsched(&[
        "schedule",
        "-s",
        &fixture("empty.json"),
        "--k",
        "8",
        "--epsilon",
        "1",
        "--cap",
        "1",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("Unable to proceed"));
    assert!(stderr(&out).contains("iteration 8 of 8"));
}

#[test]
fn schedule_on_empty_schedule_uses_uniform_start() {
    let out = bwsched(&[
        "schedule",
        "-s",
        &fixture("empty.json"),
        "--k",
        "3",
        "--epsilon",
        "20",
        "--seed",
        "9",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["uniform_start"], true);
    assert!(doc["bandwidth"].is_null());
}

#[test]
fn schedule_bad_schedule_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"jobs": [{"client": "a", "start": "Xyz 10:00", "end": "Mon 11:00"}]}"#,
    )
    .unwrap();
    let out = bwsched(&["schedule", "-s", path.to_str().unwrap(), "--k", "1"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn schedule_plot_has_density_and_markers() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("run.svg");
    let out = bwsched(&[
        "schedule",
        "-s",
        &fixture("weekly_cluster.json"),
        "--k",
        "3",
        "--epsilon",
        "40",
        "--alpha",
        "0.2",
        "--plot",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let classes: Vec<&str> = doc
        .descendants()
        .filter(|n| n.has_tag_name("path"))
        .filter_map(|n| n.attribute("class"))
        .collect();
    assert_eq!(classes, ["kde-corrected", "g-before", "g-after"]);
    let markers = doc
        .descendants()
        .find(|n| n.attribute("class") == Some("new-windows"))
        .unwrap();
    assert_eq!(
        markers
            .children()
            .filter(|n| n.has_tag_name("circle"))
            .count(),
        3
    );
}

#[test]
fn parse_intent_paper_prompt() {
    let out = bwsched(&[
        "parse-intent",
        "I need to backup VM16as_v1 3 times but try to schedule them when no other backups are happening, and not more frequently than once every 40 hours.",
        "--alpha-table",
        "paper",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let p: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(p["k"], 3);
    assert_eq!(p["epsilon"], 40.0);
    assert_eq!(p["alpha"], 0.2);
}

#[test]
fn parse_intent_unparseable_exits_2() {
    let out = bwsched(&["parse-intent", "please make it nice"]);
    assert_eq!(code(&out), 2);
    let out = bwsched(&["parse-intent", ""]);
    assert_eq!(code(&out), 2);
}

fn path_ordinates(doc: &roxmltree::Document, class: &str) -> Vec<f64> {
    let node = doc
        .descendants()
        .find(|n| n.has_tag_name("path") && n.attribute("class") == Some(class))
        .unwrap_or_else(|| panic!("no path {class}"));
    node.attribute("d")
        .unwrap()
        .split_whitespace()
        .map(|cmd| cmd[1..].split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .collect()
}

#[test]
fn plot_boundary_cluster_edges() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("kde.svg");
    let out = bwsched(&[
        "plot",
        "-s",
        &fixture("boundary_cluster.csv"),
        "-o",
        svg.to_str().unwrap(),
        "--show-raw",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(
        doc.descendants().filter(|n| n.has_tag_name("path")).count(),
        2
    );
    let ymax: f64 = doc
        .root_element()
        .attribute("data-ymax")
        .unwrap()
        .parse()
        .unwrap();
    let to_value = |y: f64| (1.0 - (y - MARGIN_TOP) / PLOT_HEIGHT) * ymax;

    let corrected: Vec<f64> = path_ordinates(&doc, "kde-corrected")
        .into_iter()
        .map(to_value)
        .collect();
    let raw: Vec<f64> = path_ordinates(&doc, "kde-raw")
        .into_iter()
        .map(to_value)
        .collect();
    let cmax = corrected.iter().copied().fold(0.0, f64::max);
    let rmax = raw.iter().copied().fold(0.0, f64::max);
    let cgap = (corrected[0] - corrected[corrected.len() - 1]).abs();
    let rgap = (raw[0] - raw[raw.len() - 1]).abs();
    assert!(cgap < 0.01 * cmax, "corrected gap {cgap} vs max {cmax}");
    assert!(rgap > 0.01 * rmax, "raw gap {rgap} vs max {rmax}");
}

#[test]
fn plot_without_raw_has_one_path() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("kde.svg");
    let out = bwsched(&[
        "plot",
        "-s",
        &fixture("table1.json"),
        "-o",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(
        doc.descendants().filter(|n| n.has_tag_name("path")).count(),
        1
    );
}

#[test]
fn plot_empty_schedule_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("kde.svg");
    let out = bwsched(&[
        "plot",
        "-s",
        &fixture("empty.json"),
        "-o",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("no windows"));
    assert!(!svg.exists());
}
