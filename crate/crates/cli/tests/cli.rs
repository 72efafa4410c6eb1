use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tcbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcbench")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let o = tcbench(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn fp_expressions() {
    let v = ok_json(&["fp", "1+1", "-p", "4"]);
    assert_eq!((v["m"].as_str().unwrap(), v["e"].as_i64().unwrap()), ("8", -2));
    assert_eq!(v["value"].as_f64().unwrap(), 2.0);

    let v = ok_json(&["fp", "log(2)", "-p", "16"]);
    let got = v["value"].as_f64().unwrap();
    assert!((got - std::f64::consts::LN_2).abs() / std::f64::consts::LN_2 <= 2f64.powi(-16), "{got}");
    assert_eq!(v["p"], 16);

    let v = ok_json(&["fp", "silu(1) + softplus(0) * floor(2.5) - sqrt(4)/exp(0)"]);
    assert!((v["value"].as_f64().unwrap() - (0.7310585786 + 2.0 * std::f64::consts::LN_2 - 2.0)).abs() < 1e-3);
}

#[test]
fn fp_errors_and_exit_codes() {
    let o = tcbench(&["fp", "1/0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("division by zero"));
    assert_eq!(tcbench(&["fp", "1+"]).status.code(), Some(2));
    assert_eq!(tcbench(&["fp", "log(1)", "-p", "1"]).status.code(), Some(2));
    assert_eq!(tcbench(&["fp", "log(0)"]).status.code(), Some(1));
    assert_eq!(tcbench(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn mamba_init_run_compare() {
    let dir = tempfile::tempdir().unwrap();
    let (zero, out) = (path(dir.path(), "zero.json"), path(dir.path(), "y.json"));
    assert!(tcbench(&["mamba", "init", "--shape", "4,2,3,2,2", "--zero", "-o", &zero]).status.success());
    assert!(tcbench(&["mamba", "run", "--model", &zero, "-o", &out]).status.success());
    let y: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((y["rows"].as_u64(), y["cols"].as_u64()), (Some(4), Some(2)));
    assert!(y["entries"].as_array().unwrap().iter().all(|e| e["m"] == "0"));

    let exact = path(dir.path(), "exact.json");
    assert!(tcbench(&["mamba", "init", "--shape", "5,2,3,3,2", "--mode", "exact", "--seed", "9", "-o", &exact])
        .status
        .success());
    let v = ok_json(&["mamba", "compare", "--model", &exact]);
    assert_eq!(v["max_relative_gap_exact"], "0");
    assert_eq!(v["identical"], true);

    let v = ok_json(&["mamba", "compare", "--shape", "8,2,3,3,2", "-p", "16", "--seed", "4"]);
    assert!(v["max_relative_gap"].as_f64().unwrap() <= 64.0 * 8.0 * 2f64.powi(-16));

    // runs are byte-identical
    let a = stdout(&tcbench(&["mamba", "run", "--model", &exact, "--seed", "2"]));
    let b = stdout(&tcbench(&["mamba", "run", "--model", &exact, "--seed", "2"]));
    assert_eq!(a, b);
    assert_eq!(tcbench(&["mamba", "run", "--model", &path(dir.path(), "missing.json")]).status.code(), Some(2));
    assert_eq!(tcbench(&["mamba", "init", "--shape", "1,2,3"]).status.code(), Some(2));
}

#[test]
fn mamba_depth_report() {
    let v = ok_json(&["mamba", "depth", "--shape", "4,2,2,2,2", "--assign", "all=1"]);
    assert!(v["numeric_depth"]["mamba_forward"].as_u64().unwrap() > 0);
    let checks = v["checks"].as_array().unwrap();
    let comp = checks.iter().find(|c| c["formula_name"] == "d_mamba_compositional").unwrap();
    assert_eq!(comp["verdict"], "WithinBound");
    assert!(checks.iter().filter(|c| c["exact_required"] == true).all(|c| c["verdict"] == "WithinBound"));

    let o = tcbench(&["mamba", "depth", "--shape", "2,1,1,1,1", "--table"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("d_mamba_compositional"));
    assert_eq!(tcbench(&["mamba", "depth", "--assign", "d_bogus=1"]).status.code(), Some(2));
}

#[test]
fn circuit_commands() {
    let o = tcbench(&["circuit", "check", "compare", "-p", "3"]);
    assert!(o.status.success());
    let line = stdout(&o);
    assert!(line.starts_with("exhaustive: PASS"), "{line}");
    assert!(line.contains("4225 cases, 0 mismatches"), "{line}");

    let dir = tempfile::tempdir().unwrap();
    let (c64, c2) = (path(dir.path(), "a64.txt"), path(dir.path(), "a2.txt"));
    let s64 = ok_json(&["circuit", "synth", "iter_add", "-m", "64", "-p", "3", "-o", &c64]);
    ok_json(&["circuit", "synth", "iter_add", "-m", "2", "-p", "3", "-o", &c2]);
    let (d64, d2) = (ok_json(&["circuit", "depth", &c64]), ok_json(&["circuit", "depth", &c2]));
    assert_eq!(d64["depth"], d2["depth"]);
    assert_eq!(d64["size"], s64["size"]);

    let add = path(dir.path(), "add.txt");
    ok_json(&["circuit", "synth", "add", "-p", "3", "-o", &add]);
    let o = tcbench(&["circuit", "check", "add", "-p", "3", "--circuit", &add]);
    assert!(stdout(&o).starts_with("exhaustive: PASS"));

    let maj = path(dir.path(), "maj.txt");
    ok_json(&["circuit", "rewrite", &add, "-o", &maj]);
    let rewritten = tcbench_circuit::Circuit::from_netlist(&std::fs::read_to_string(&maj).unwrap()).unwrap();
    assert!(rewritten.is_majority_only());
    // <4,0> + <4,0> = 8 = <4,1>: ok bit, then m=4 in 4 bits, then e=1 in 4 bits, LSB first
    let enc = "0010000".repeat(2);
    let a = stdout(&tcbench(&["circuit", "eval", &add, "--input", &enc]));
    let b = stdout(&tcbench(&["circuit", "eval", &maj, "--input", &enc]));
    assert_eq!(a, b);
    assert_eq!(a.trim(), "100101000");
    assert_eq!(tcbench(&["circuit", "eval", &add, "--input", "01"]).status.code(), Some(2));
    assert_eq!(tcbench(&["circuit", "synth", "add", "-p", "16"]).status.code(), Some(2));
}

#[test]
fn hardness_gen_eval_barrington() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (path(dir.path(), "a.txt"), path(dir.path(), "b.txt"));
    for f in [&a, &b] {
        ok_json(&["hardness", "gen", "bool", "--size", "15", "--seed", "42", "-n", "100", "-o", f]);
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 100);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(std::fs::read(format!("{a}.labels")).unwrap(), std::fs::read(format!("{b}.labels")).unwrap());

    let o = tcbench(&["hardness", "eval", "bool", &a, "--labels", &format!("{a}.labels")]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("labels: PASS"));

    // a flipped label is a check failure
    let labels = std::fs::read_to_string(format!("{a}.labels")).unwrap();
    let flipped: String = labels.replacen('0', "x", 1).replacen('1', "0", 1).replacen('x', "1", 1);
    let bad = path(dir.path(), "bad.labels");
    std::fs::write(&bad, flipped).unwrap();
    assert_eq!(tcbench(&["hardness", "eval", "bool", &a, "--labels", &bad]).status.code(), Some(1));

    for kind in ["arith", "word"] {
        let f = path(dir.path(), kind);
        ok_json(&["hardness", "gen", kind, "--size", "6", "--seed", "1", "-n", "50", "-o", &f]);
        assert!(tcbench(&["hardness", "eval", kind, &f, "--labels", &format!("{f}.labels")]).status.success());
    }

    let net = path(dir.path(), "c.txt");
    std::fs::write(&net, "0 INPUT\n1 INPUT\n2 INPUT\n3 OR 0 1\n4 NOT 2\n5 AND 3 4\nOUTPUT 5\n").unwrap();
    let prog = path(dir.path(), "c.pbp");
    let v = ok_json(&["hardness", "barrington", &net, "-o", &prog]);
    assert_eq!(v["mismatches"], 0);
    assert_eq!(v["within_bound"], true);
    assert!(std::fs::read_to_string(&prog).unwrap().starts_with("ACCEPT"));

    let thr = path(dir.path(), "t.txt");
    std::fs::write(&thr, "0 INPUT\n1 INPUT\n2 THRESHOLD 1 0 1\nOUTPUT 2\n").unwrap();
    assert_eq!(tcbench(&["hardness", "barrington", &thr]).status.code(), Some(2));
    assert_eq!(tcbench(&["hardness", "gen", "bool", "--size", "0"]).status.code(), Some(2));
}
