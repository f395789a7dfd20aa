use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn otr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otr"))
        .args(args)
        .env("OTR_LOG", "warn")
        .output()
        .expect("spawn otr")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(format!("{name}.schema.json"))
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

/// Validate `doc` against `schemas/<name>.schema.json`, resolving references to sibling schemas.
fn assert_schema(name: &str, doc: &serde_json::Value) {
    let mut opts = jsonschema::options();
    for dep in ["network", "tree", "trace"] {
        let res = jsonschema::Resource::from_contents(read_json(&schema_path(dep))).unwrap();
        opts.with_resource(format!("https://otr.invalid/schemas/{dep}.schema.json"), res);
    }
    let v = opts.build(&read_json(&schema_path(name))).unwrap();
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn translate_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("t.json");
    let net = fixture("relu3.net.json");
    ok(&otr(&["translate", "--net", s(&net), "--out", s(&tree)]));
    let out = otr(&["verify", "--net", s(&net), "--tree", s(&tree), "--samples", "500", "--box", "-3:3"]);
    ok(&out);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["samples"], 500);
    assert!(report["max_rel_diff"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn verify_against_a_changed_network_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("t.json");
    let net = fixture("relu3.net.json");
    ok(&otr(&["translate", "--net", s(&net), "--out", s(&tree)]));
    let changed = dir.path().join("changed.json");
    let text = std::fs::read_to_string(&net).unwrap().replace("\"biases\": [1.4]", "\"biases\": [1.5]");
    std::fs::write(&changed, text).unwrap();
    let out = otr(&["verify", "--net", s(&changed), "--tree", s(&tree)]);
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], false);
}

#[test]
fn emit_mountain_car_tree() {
    let out = otr(&["emit", "--tree", s(&fixture("mcc_depth1.tree.json")), "--names", "x,v_x", "--check"]);
    ok(&out);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "if -2.2 - 3.8*x + 114.3*v_x <= 0 then\n    -6.1\nelse\n    -102.3 - 169.8*x + 5116.5*v_x\n"
    );
}

#[test]
fn emit_pid_policy() {
    let out = otr(&["emit", "--pid", s(&fixture("pendulum_pid.json")), "--check"]);
    ok(&out);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("* P + ["), "{text}");
    assert!(text.contains("* D"), "{text}");
}

#[test]
fn prune_single_pattern_trace_to_one_leaf() {
    let dir = tempfile::tempdir().unwrap();
    // Hidden units ignore the input, so every state has the pattern 10.
    let net = dir.path().join("const.json");
    std::fs::write(
        &net,
        r#"{"input_dim": 2, "task": "regression", "dense": false, "leaf_activation": "identity",
            "layers": [
              {"weights": [[0, 0], [0, 0]], "biases": [1, -1], "activation": "relu"},
              {"weights": [[0.5, 0.5]], "biases": [0], "activation": "linear"}]}"#,
    )
    .unwrap();
    let trace = dir.path().join("trace.json");
    let full = dir.path().join("full.json");
    let pruned = dir.path().join("pruned.json");
    ok(&otr(&["trace", "--net", s(&net), "--env", "mountain_car", "--episodes", "2", "--out", s(&trace)]));
    ok(&otr(&["translate", "--net", s(&net), "--out", s(&full)]));
    ok(&otr(&["prune", "--tree", s(&full), "--trace", s(&trace), "--topk", "2", "--out", s(&pruned)]));
    let out = otr(&["stats", "--tree", s(&pruned)]);
    ok(&out);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["stats"]["leaves"], 1);
    assert_eq!(doc["stats"]["patterns"], 1);
    assert_eq!(doc["stats"]["pruned_leaves"], 2);
}

#[test]
fn eval_reports_rewards() {
    let out = otr(&["--seed", "3", "eval", "--env", "mountain_car", "--episodes", "4", "--tree", s(&fixture("mcc_depth1.tree.json"))]);
    ok(&out);
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["rewards"].as_array().unwrap().len(), 4);
    assert_eq!(r["seed"], 3);
    assert!(r["mean"].as_f64().unwrap() > 80.0);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(otr(&["translate"]).status.code(), Some(2));
    assert_eq!(otr(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(otr(&["translate", "--net", "x", "--mode", "trace"]).status.code(), Some(2));
}

#[test]
fn pipeline_errors_exit_1() {
    let net = fixture("relu3.net.json");
    let out = otr(&["trace", "--net", s(&net), "--env", "cartpole", "--episodes", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert_eq!(otr(&["translate", "--net", "/nonexistent/net.json"]).status.code(), Some(1));
    assert_eq!(otr(&["translate", "--net", s(&net), "--budget", "4"]).status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let net = fixture("relu3.net.json");
    let mut outs = Vec::new();
    for (i, jobs) in ["1", "4"].iter().enumerate() {
        let trace = dir.path().join(format!("trace{i}.json"));
        let tree = dir.path().join(format!("tree{i}.json"));
        let rep = dir.path().join(format!("eval{i}.json"));
        ok(&otr(&["--seed", "11", "--jobs", jobs, "trace", "--net", s(&net), "--env", "mountain_car", "--episodes", "6", "--out", s(&trace)]));
        ok(&otr(&["translate", "--net", s(&net), "--mode", "trace", "--trace", s(&trace), "--out", s(&tree)]));
        ok(&otr(&["--seed", "11", "--jobs", jobs, "eval", "--env", "mountain_car", "--episodes", "6", "--tree", s(&tree), "--out", s(&rep)]));
        outs.push([trace, tree, rep].map(|p| std::fs::read(p).unwrap()));
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn outputs_and_fixtures_match_the_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let net = fixture("relu3.net.json");
    let p = |n: &str| dir.path().join(n);
    assert_schema("network", &read_json(&net));
    assert_schema("tree", &read_json(&fixture("mcc_depth1.tree.json")));
    assert_schema("tree", &read_json(&fixture("mcc_simplified.tree.json")));
    assert_schema("pid_policy", &read_json(&fixture("pendulum_pid.json")));

    ok(&otr(&["trace", "--net", s(&net), "--env", "mountain_car", "--episodes", "3", "--out", s(&p("tr.json"))]));
    assert_schema("trace", &read_json(&p("tr.json")));
    ok(&otr(&["translate", "--net", s(&net), "--out", s(&p("full.json"))]));
    assert_schema("tree", &read_json(&p("full.json")));
    ok(&otr(&["translate", "--net", s(&net), "--mode", "trace", "--trace", s(&p("tr.json")), "--out", s(&p("td.json"))]));
    assert_schema("tree", &read_json(&p("td.json")));
    ok(&otr(&["prune", "--tree", s(&p("full.json")), "--trace", s(&p("tr.json")), "--topk", "1", "--out", s(&p("top1.json"))]));
    assert_schema("tree", &read_json(&p("top1.json")));
    ok(&otr(&["verify", "--net", s(&net), "--tree", s(&p("td.json")), "--out", s(&p("ver.json"))]));
    assert_schema("verification_report", &read_json(&p("ver.json")));
    ok(&otr(&["eval", "--env", "pendulum", "--episodes", "2", "--pid", s(&fixture("pendulum_pid.json")), "--out", s(&p("ev.json"))]));
    assert_schema("rollout_report", &read_json(&p("ev.json")));
    ok(&otr(&["eval", "--env", "mountain_car", "--episodes", "2", "--tree", s(&p("top1.json")), "--out", s(&p("ev2.json"))]));
    assert_schema("rollout_report", &read_json(&p("ev2.json")));

    let mut bad = read_json(&p("full.json"));
    bad["root"]["kind"] = "branch".into();
    let v = jsonschema::validator_for(&read_json(&schema_path("tree"))).unwrap();
    assert!(!v.is_valid(&bad));
}
