//! End-to-end tests of the command-line contract: exit codes, stdin and
//! file input, text and JSON formats, and determinism of emitted bytes.

use std::io::Write as _;
use std::process::{Command, Output, Stdio};

fn aediag(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_aediag"))
        .args(args)
        .env("NO_COLOR", "1")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn aediag");
    child
        .stdin
        .take()
        .expect("stdin piped")
        .write_all(stdin)
        .expect("write stdin");
    child.wait_with_output().expect("wait for aediag")
}

fn stdout_of(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).expect("stdout is UTF-8")
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("process exited")
}

/// A four-step rim everyone can follow, plus a shortcut only V holds:
/// the meet of the rim tags exceeds the shortcut tag, an epistemic
/// violation that completion must repair.
fn leaky_square() -> String {
    serde_json::json!({
        "version": "1",
        "metadata": {},
        "diagram": {
            "universe": ["V", "W", "X", "Y", "Z"],
            "theory": {"kind": "modexp", "p": 11},
            "nodes": [
                {"id": "n0", "object": "carrier"},
                {"id": "n1", "object": "carrier"},
                {"id": "n2", "object": "carrier"},
                {"id": "n3", "object": "carrier"},
                {"id": "n4", "object": "carrier"}
            ],
            "edges": [
                {"src": "n0", "dst": "n1", "arrow": {"op": "pow", "exp": 2},
                 "tag": ["V", "W", "X", "Y", "Z"]},
                {"src": "n1", "dst": "n2", "arrow": {"op": "pow", "exp": 3},
                 "tag": ["V", "W", "X", "Y", "Z"]},
                {"src": "n2", "dst": "n3", "arrow": {"op": "pow", "exp": 4},
                 "tag": ["V", "W", "X", "Y", "Z"]},
                {"src": "n3", "dst": "n4", "arrow": {"op": "pow", "exp": 5},
                 "tag": ["V", "W", "X", "Y", "Z"]},
                {"src": "n0", "dst": "n4", "arrow": {"op": "pow", "exp": 10},
                 "tag": ["V"]}
            ]
        }
    })
    .to_string()
}

#[test]
fn gen_writes_documents_and_check_accepts_them() {
    for family in ["dh2", "dh-pairwise", "dh-ring", "dh-nk", "cake"] {
        let gen = aediag(&["gen", family], b"");
        assert_eq!(code_of(&gen), 0, "gen {family} failed");
        let doc: serde_json::Value = serde_json::from_slice(&gen.stdout).unwrap();
        assert_eq!(doc["version"], "1", "gen {family} version");
        let check = aediag(&["check"], &gen.stdout);
        assert_eq!(code_of(&check), 0, "check of {family} failed");
        assert!(stdout_of(&check).contains("check: ok"));
    }
}

#[test]
fn gen_records_parameters_in_metadata() {
    let out = aediag(&["gen", "dh-ring", "--n", "3"], b"");
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let meta = &doc["metadata"];
    assert_eq!(meta["p"], "101");
    assert_eq!(meta["g"], "2");
    assert_eq!(meta["preset"], "dh-ring");
    assert_eq!(meta["key.A"], "3");
    assert_eq!(meta["key.B"], "4");
    assert_eq!(meta["key.C"], "5");
}

#[test]
fn gen_accepts_explicit_keys_and_eavesdroppers() {
    let out = aediag(
        &[
            "gen", "dh2", "--p", "13", "--g", "2", "--keys", "P=3,Q=5", "--eve", "M",
        ],
        b"",
    );
    assert_eq!(code_of(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        doc["diagram"]["universe"],
        serde_json::json!(["P", "Q", "M"]),
        "owners come first, eavesdroppers after"
    );
    assert_eq!(doc["metadata"]["key.P"], "3");
    let check = aediag(&["check"], &out.stdout);
    assert_eq!(code_of(&check), 0);
}

#[test]
fn gen_writes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("doc.json");
    let out = aediag(&["gen", "dh2", "-o", path.to_str().unwrap()], b"");
    assert_eq!(code_of(&out), 0);
    assert!(out.stdout.is_empty(), "file output must not echo to stdout");
    let piped = aediag(&["gen", "dh2"], b"");
    assert_eq!(std::fs::read(&path).unwrap(), piped.stdout);
    let check = aediag(&["check", path.to_str().unwrap()], b"");
    assert_eq!(code_of(&check), 0);
}

#[test]
fn check_reports_an_epistemic_violation_with_exit_one() {
    let out = aediag(&["check"], leaky_square().as_bytes());
    assert_eq!(code_of(&out), 1);
    let text = stdout_of(&out);
    assert!(text.contains("epistemic: edge n0 -> n4 tagged {V}"));
    assert!(text.contains("check: FAIL (0 commute, "));
    assert!(!out.stdout.contains(&b'\x1b'), "piped output must be plain");
}

#[test]
fn check_reports_algebraic_and_commute_violations() {
    // The shortcut exponent disagrees with the rim composite 2*3*4*5.
    let doc = leaky_square().replace("\"exp\":10", "\"exp\":9");
    assert_ne!(doc, leaky_square(), "sabotage must hit");
    let out = aediag(&["check"], doc.as_bytes());
    assert_eq!(code_of(&out), 1);
    let text = stdout_of(&out);
    assert!(text.contains("commute:"));
    assert!(text.contains("algebraic: edge n0 -> n4"));
}

#[test]
fn check_json_carries_the_verdict() {
    let out = aediag(&["check", "--format", "json"], leaky_square().as_bytes());
    assert_eq!(code_of(&out), 1);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["ok"], false);
    assert_eq!(v["commute"]["ok"], true);
    assert_eq!(v["flow"]["ok"], false);
    assert_eq!(v["flow"]["violations"][0]["kind"], "epistemic");
}

#[test]
fn complete_repairs_the_leaky_square() {
    let completed = aediag(&["complete"], leaky_square().as_bytes());
    assert_eq!(code_of(&completed), 0);
    let check = aediag(&["check"], &completed.stdout);
    assert_eq!(code_of(&check), 0);
    let doc: serde_json::Value = serde_json::from_slice(&completed.stdout).unwrap();
    // The shortcut tag rises to the rim meet joined with its own tag.
    let edges = doc["diagram"]["edges"].as_array().unwrap();
    let shortcut = edges
        .iter()
        .find(|e| e["src"] == "n0" && e["dst"] == "n4")
        .unwrap();
    assert_eq!(
        shortcut["tag"],
        serde_json::json!(["V", "W", "X", "Y", "Z"])
    );
    let again = aediag(&["complete"], &completed.stdout);
    assert_eq!(again.stdout, completed.stdout, "completion is idempotent");
}

#[test]
fn complete_preserves_metadata() {
    let gen = aediag(&["gen", "dh2"], b"");
    let completed = aediag(&["complete"], &gen.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&completed.stdout).unwrap();
    assert_eq!(doc["metadata"]["p"], "101");
    assert_eq!(doc["metadata"]["preset"], "dh2");
}

#[test]
fn view_restricts_and_rejects_unknown_participants() {
    let gen = aediag(&["gen", "dh-ring", "--n", "3"], b"");
    let view = aediag(&["view", "--who", "A,B"], &gen.stdout);
    assert_eq!(code_of(&view), 0);
    let doc: serde_json::Value = serde_json::from_slice(&view.stdout).unwrap();
    assert_eq!(doc["diagram"]["edges"].as_array().unwrap().len(), 4);
    let bad = aediag(&["view", "--who", "Q"], &gen.stdout);
    assert_eq!(code_of(&bad), 2);
    assert!(!bad.stderr.is_empty(), "errors must be explained on stderr");
}

#[test]
fn events_text_lists_classes_and_counts() {
    let gen = aediag(&["gen", "dh2"], b"");
    let out = aediag(&["events"], &gen.stdout);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("announcement: star -> g^A by {A} newly informing {B,E}"));
    assert!(text.contains("computation:  star -> g^AB from {B} v {A}"));
    assert!(text.contains("primitive:    star -> g"));
    // Four exponentiations plus the root selection have no parallel
    // paths at all.
    assert!(text.ends_with("events: 5 primitive, 1 computation, 2 announcement\n"));
}

#[test]
fn events_json_matches_the_text_classes() {
    let gen = aediag(&["gen", "dh2"], b"");
    let out = aediag(&["events", "--format", "json"], &gen.stdout);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let classes: Vec<(&str, &str)> = v["events"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                e["edge"]["dst"].as_str().unwrap(),
                e["class"].as_str().unwrap(),
            )
        })
        .collect();
    // Canonical edge order: the four exponentiations, then the four
    // selections sorted by destination.
    assert_eq!(
        classes,
        [
            ("g^A", "primitive"),
            ("g^B", "primitive"),
            ("g^AB", "primitive"),
            ("g^AB", "primitive"),
            ("g", "primitive"),
            ("g^A", "announcement"),
            ("g^AB", "computation"),
            ("g^B", "announcement"),
        ]
    );
}

#[test]
fn triangulate_enumerates_fan_scenarios() {
    let out = aediag(
        &["triangulate", "--edge", "n0:n4", "--format", "json"],
        leaky_square().as_bytes(),
    );
    assert_eq!(code_of(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["count"], 5);
    assert_eq!(v["policy"], "audience");
    assert_eq!(v["scenarios"].as_array().unwrap().len(), 5);
    let text = aediag(
        &["triangulate", "--edge", "n0:n4"],
        leaky_square().as_bytes(),
    );
    assert!(stdout_of(&text).ends_with("scenarios: 5\n"));
    let missing = aediag(
        &["triangulate", "--edge", "n0:n9"],
        leaky_square().as_bytes(),
    );
    assert_eq!(code_of(&missing), 2);
}

#[test]
fn orderings_lists_up_to_the_limit() {
    let gen = aediag(&["gen", "dh-ring", "--n", "3"], b"");
    let out = aediag(&["orderings", "--limit", "2"], &gen.stdout);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    assert_eq!(text.lines().count(), 4, "two listed plus summary lines");
    assert!(text.contains("... and 88 more\n"));
    assert!(text.ends_with("orderings: 90\n"));
    let json = aediag(
        &["orderings", "--limit", "2", "--format", "json"],
        &gen.stdout,
    );
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["count"], 90);
    assert_eq!(v["orderings"].as_array().unwrap().len(), 2);
}

#[test]
fn dot_is_deterministic_and_annotates_violations() {
    let gen = aediag(&["gen", "dh2"], b"");
    let a = aediag(&["dot"], &gen.stdout);
    let b = aediag(&["dot"], &gen.stdout);
    assert_eq!(code_of(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout_of(&a);
    assert!(text.starts_with("digraph"));
    assert!(text.contains("rankdir=LR"));
    let flow = aediag(&["dot", "--annotate", "flow"], leaky_square().as_bytes());
    assert_eq!(code_of(&flow), 0, "annotation must not turn into a verdict");
    assert!(stdout_of(&flow).contains("red"));
    let events = aediag(&["dot", "--annotate", "events"], &gen.stdout);
    assert!(stdout_of(&events).contains("blue"));
}

#[test]
fn leak_rule_forms_agree() {
    let gen = aediag(&["gen", "dh-ring", "--n", "3"], b"");
    let by_name = aediag(&["leak", "--rule", "pow:a+E"], &gen.stdout);
    assert_eq!(code_of(&by_name), 0);
    let by_exponent = aediag(&["leak", "--rule", "pow:3+E"], &gen.stdout);
    assert_eq!(by_name.stdout, by_exponent.stdout);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rules.json");
    std::fs::write(
        &path,
        r#"[{"arrow": {"op": "pow", "exp": 3}, "add": ["E"]}]"#,
    )
    .unwrap();
    let by_file = aediag(
        &["leak", "--rules-file", path.to_str().unwrap()],
        &gen.stdout,
    );
    assert_eq!(by_name.stdout, by_file.stdout);
}

#[test]
fn leak_tag_matcher_and_diagram_emit() {
    let gen = aediag(&["gen", "dh2"], b"");
    let out = aediag(
        &["leak", "--rule", "tag:{A}+E", "--emit", "diagram"],
        &gen.stdout,
    );
    assert_eq!(code_of(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["version"], "1", "diagram emit is a plain document");
    let edges = doc["diagram"]["edges"].as_array().unwrap();
    let ga = edges
        .iter()
        .find(|e| e["src"] == "g" && e["dst"] == "g^A")
        .unwrap();
    assert_eq!(ga["tag"], serde_json::json!(["A", "E"]));
    let check = aediag(&["check"], &out.stdout);
    assert_eq!(code_of(&check), 0);
}

#[test]
fn leak_without_rules_is_a_usage_error() {
    let gen = aediag(&["gen", "dh2"], b"");
    let out = aediag(&["leak"], &gen.stdout);
    assert_eq!(code_of(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn diff_compares_documents_with_gnu_exit_codes() {
    let gen = aediag(&["gen", "dh2"], b"");
    let dir = tempfile::tempdir().unwrap();
    let left = dir.path().join("left.json");
    let right = dir.path().join("right.json");
    std::fs::write(&left, &gen.stdout).unwrap();
    std::fs::write(&right, &gen.stdout).unwrap();
    let same = aediag(
        &["diff", left.to_str().unwrap(), right.to_str().unwrap()],
        b"",
    );
    assert_eq!(code_of(&same), 0);

    let leaked = aediag(
        &["leak", "--rule", "tag:{A}+E", "--emit", "diagram"],
        &gen.stdout,
    );
    std::fs::write(&right, &leaked.stdout).unwrap();
    let changed = aediag(
        &["diff", left.to_str().unwrap(), right.to_str().unwrap()],
        b"",
    );
    assert_eq!(code_of(&changed), 1);
    assert!(stdout_of(&changed).contains("g -> g^A"));

    let other = aediag(&["gen", "dh-ring", "--n", "3"], b"");
    std::fs::write(&right, &other.stdout).unwrap();
    let mismatch = aediag(
        &["diff", left.to_str().unwrap(), right.to_str().unwrap()],
        b"",
    );
    assert_eq!(code_of(&mismatch), 2, "structural mismatch is trouble");
    assert!(!mismatch.stderr.is_empty());
}

#[test]
fn diff_validates_leak_reports_from_stdin() {
    let gen = aediag(&["gen", "dh-ring", "--n", "3"], b"");
    let report = aediag(&["leak", "--rule", "pow:a+E"], &gen.stdout);
    let out = aediag(&["diff"], &report.stdout);
    assert_eq!(code_of(&out), 0);
    let text = stdout_of(&out);
    assert!(text.contains("substitution g -> g^A: {A} => {A,E}"));
    assert!(text.contains("consequence  star -> g^ABC: {A,B,C} => {A,B,C,E}"));
    assert!(text.ends_with("leak report: consistent\n"));

    // Tampering with the embedded diff must be caught.
    let mut v: serde_json::Value = serde_json::from_slice(&report.stdout).unwrap();
    v["diff"]["consequences"] = serde_json::json!([]);
    let out = aediag(&["diff"], v.to_string().as_bytes());
    assert_eq!(code_of(&out), 1);
    assert!(stdout_of(&out).ends_with("leak report: INCONSISTENT\n"));
}

#[test]
fn malformed_input_is_a_usage_error() {
    for garbage in ["{]", "42", "{\"version\": \"7\"}"] {
        let out = aediag(&["check"], garbage.as_bytes());
        assert_eq!(code_of(&out), 2, "input {garbage:?} must exit 2");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
    let out = aediag(&["check", "--no-such-flag"], b"");
    assert_eq!(code_of(&out), 2);
}

#[test]
fn version_flag_works() {
    let out = aediag(&["--version"], b"");
    assert_eq!(code_of(&out), 0);
    assert!(stdout_of(&out).starts_with("aediag "));
}
