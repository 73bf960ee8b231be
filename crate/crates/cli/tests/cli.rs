use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn eulerlab(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_eulerlab"))
        .args(args)
        .output()
        .expect("binary runs");
    let code = out.status.code().expect("exit code");
    let text = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(&text).unwrap_or(Value::Null);
    (code, json)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn catalog_verify_exit_codes() {
    let (code, v) = eulerlab(&["catalog", "verify", "--id", "ab_trig", "--param", "c1=1,c2=2,c3=0,k=3"]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
    assert_eq!(v["config"]["params"]["k"], 3.0);

    let (code, _) = eulerlab(&["catalog", "verify", "--id", "x2_power_R", "--param", "b=2"]);
    assert_eq!(code, 0);
    let (code, _) = eulerlab(&["catalog", "verify", "--id", "ab_trig", "--param", "k=0"]);
    assert_eq!(code, 0);

    let (code, v) = eulerlab(&["catalog", "verify", "--id", "no_such_entry"]);
    assert_eq!(code, 2);
    assert_eq!(v["exit_code"], 2);
    let (code, _) = eulerlab(&["catalog", "verify", "--id", "ab_trig", "--param", "zz=1"]);
    assert_eq!(code, 3);
    let (code, _) = eulerlab(&["catalog", "verify", "--id", "ab_trig", "--param", "k=oops"]);
    assert_eq!(code, 3);
    let (code, _) = eulerlab(&["catalog", "verify", "--id", "ab_trig", "--no-such-flag"]);
    assert_eq!(code, 3);
    let (code, _) = eulerlab(&["catalog", "verify"]);
    assert_eq!(code, 3);
}

#[test]
fn catalog_list_names_every_entry() {
    let (code, v) = eulerlab(&["catalog", "list"]);
    assert_eq!(code, 0);
    let ids: Vec<&str> = v["result"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, eulerlab::catalog::ids());
}

#[test]
fn symmetry_and_orbit() {
    let (code, v) = eulerlab(&["symmetry", "check", "--id", "static_gauss", "--generator", "X2"]);
    assert_eq!(code, 0, "{v}");
    let (code, _) = eulerlab(&[
        "symmetry",
        "check",
        "--id",
        "ab_trig",
        "--generator",
        "X1",
        "--a",
        "0.7",
        "--b",
        "-0.2",
    ]);
    assert_eq!(code, 0);
    let (code, v) = eulerlab(&[
        "symmetry",
        "check",
        "--id",
        "static_gauss",
        "--generator",
        "Xab",
        "--a",
        "0.3",
        "--b",
        "2",
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["pass"], false);
    let (code, _) = eulerlab(&["symmetry", "check", "--id", "static_gauss", "--generator", "X9"]);
    assert_eq!(code, 2);

    let (code, v) = eulerlab(&[
        "orbit",
        "--id",
        "xab_example",
        "--generator",
        "Xab",
        "--a",
        "1",
        "--b",
        "1",
        "--lambda",
        "0.5",
        "--verify",
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["result"]["verification"]["pass"], true);

    let (code, v) = eulerlab(&["orbit", "--id", "static_gauss", "--generator", "X2", "--lambda", "0"]);
    assert_eq!(code, 0);
    let (_, base) = eulerlab(&["catalog", "verify", "--id", "static_gauss"]);
    assert_eq!(v["result"]["pair"]["psi"], base["result"]["pair"]["psi"]);

    // Xab with (a, b) off the invariant direction of the pair has no
    // admissible orbit through it.
    let (code, _) = eulerlab(&[
        "orbit",
        "--id",
        "xab_example",
        "--generator",
        "Xab",
        "--a",
        "0.3",
        "--b",
        "2",
        "--lambda",
        "0.5",
    ]);
    assert_eq!(code, 4);
}

#[test]
fn reduce_commands() {
    let (code, v) = eulerlab(&["reduce", "power", "--exponent", "-2"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["result"]["a"], -1.0);
    for kind in ["v", "w"] {
        let (code, v) = eulerlab(&["reduce", "bvp", "--kind", kind]);
        assert_eq!(code, 0, "{v}");
    }
    let (code, _) = eulerlab(&["reduce", "bvp", "--kind", "u"]);
    assert_eq!(code, 3);
    let (code, v) = eulerlab(&[
        "reduce",
        "superpose",
        "--id",
        "x2_power_R",
        "--with",
        "x2_power_R",
        "--with-param",
        "b=3",
    ]);
    assert_eq!(code, 0, "{v}");
}

#[test]
fn simulate_conserve_potential() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("run");
    let (code, v) = eulerlab(&[
        "simulate",
        "--nx",
        "32",
        "--ny",
        "32",
        "--steps",
        "60",
        "--trace",
        path(&trace),
    ]);
    assert_eq!(code, 0, "{v}");
    assert!(trace.join("manifest.json").exists());
    assert!(trace.join("gp_000060.eulf").exists());

    let (code, v) = eulerlab(&["conserve", "--trace", path(&trace)]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["result"]["log_matches_trace"], true);

    let (code, v) = eulerlab(&["potential", "--trace", path(&trace)]);
    assert_eq!(code, 0, "{v}");
    assert!(trace.join("potential/p4_000060.eulf").exists());

    let closed = dir.path().join("trig");
    let (code, v) = eulerlab(&[
        "simulate",
        "--init",
        "ab_trig",
        "--param",
        "c1=0.3,c2=0.2,c3=0,k=1",
        "--nx",
        "32",
        "--ny",
        "32",
        "--steps",
        "40",
        "--dt",
        "0.01",
        "--trace",
        path(&closed),
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["result"]["drift_velocity"], serde_json::json!([1.0, -1.0]));
    let (code, v) = eulerlab(&["conserve", "--trace", path(&closed)]);
    assert_eq!(code, 0, "{v}");
}

#[test]
fn simulate_refusals() {
    let dir = tempfile::tempdir().unwrap();
    let t = |name: &str| dir.path().join(name);
    let (code, _) = eulerlab(&[
        "simulate",
        "--nx",
        "32",
        "--ny",
        "32",
        "--dt",
        "1",
        "--trace",
        path(&t("cfl")),
    ]);
    assert_eq!(code, 5);
    let (code, _) = eulerlab(&["simulate", "--nx", "30", "--ny", "32", "--trace", path(&t("grid"))]);
    assert_eq!(code, 3);
    // x2_power_R is not periodic on the box.
    let (code, _) = eulerlab(&[
        "simulate",
        "--init",
        "x2_power_R",
        "--t0",
        "1",
        "--trace",
        path(&t("np")),
    ]);
    assert_eq!(code, 4);

    let (code, _) = eulerlab(&[
        "simulate",
        "--nonzero-mean",
        "--nx",
        "32",
        "--ny",
        "32",
        "--steps",
        "4",
        "--trace",
        path(&t("mean")),
    ]);
    assert_eq!(code, 0);
    let (code, _) = eulerlab(&["potential", "--trace", path(&t("mean"))]);
    assert_eq!(code, 4);
    let (code, _) = eulerlab(&["conserve", "--trace", path(&t("missing"))]);
    assert_eq!(code, 3);
}

#[test]
fn saved_config_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    let (code, _) = eulerlab(&[
        "catalog",
        "verify",
        "--id",
        "ab_traveling",
        "--samples",
        "50",
        "--seed",
        "7",
        "--save-config",
        path(&cfg),
        "--out",
        path(&first),
    ]);
    assert_eq!(code, 0);
    let (code, _) = eulerlab(&["catalog", "verify", "--config", path(&cfg), "--out", path(&second)]);
    assert_eq!(code, 0);
    let a: Value = serde_json::from_slice(&std::fs::read(&first).unwrap()).unwrap();
    let mut b: Value = serde_json::from_slice(&std::fs::read(&second).unwrap()).unwrap();
    b["config"]["out"] = a["config"]["out"].clone();
    assert_eq!(a, b);
    assert_eq!(a["config"]["plan"]["points"], 50);
}

#[test]
fn simulation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let trace = dir.path().join(name);
        let (code, v) = eulerlab(&[
            "simulate",
            "--nx",
            "32",
            "--ny",
            "32",
            "--steps",
            "20",
            "--seed",
            "11",
            "--trace",
            path(&trace),
        ]);
        assert_eq!(code, 0);
        (trace, v)
    };
    let (ta, a) = run("a");
    let (tb, b) = run("b");
    assert_eq!(a["result"]["drift"], b["result"]["drift"]);
    for f in ["gp_000020.eulf", "gm_000020.eulf", "conservation.csv"] {
        assert_eq!(
            std::fs::read(ta.join(f)).unwrap(),
            std::fs::read(tb.join(f)).unwrap(),
            "{f}"
        );
    }
}
