//! End-to-end checks of the command-line binary.

use std::process::{Command, Output};

fn randclt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randclt")).args(args).output().expect("spawn randclt")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn systems_list_names_every_kind() {
    let text = stdout(&randclt(&["systems", "list"]));
    for kind in ["trig", "cosine", "chebyshev", "shifted_periodic", "walsh", "empirical", "lacunary"] {
        assert!(text.lines().any(|l| l.starts_with(kind)), "{kind} missing from {text}");
    }
}

#[test]
fn jn_matches_closed_form() {
    let text = stdout(&randclt(&["jn", "--n", "3", "--t-grid", "0,2"]));
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][2], 1.0);
    assert!((rows[1][2] - 2f64.sin() / 2.0).abs() < 1e-12);
}

#[test]
fn distance_is_deterministic_in_the_seed() {
    let args = [
        "--seed",
        "5",
        "distance",
        "--system",
        "walsh",
        "--d",
        "3",
        "--metric",
        "rho",
        "--target",
        "normal",
        "--n-theta",
        "20",
    ];
    let a = stdout(&randclt(&args));
    let b = stdout(&randclt(&args));
    assert_eq!(a, b);
    assert!(a.starts_with("system,kind,n,metric,target,mean,stderr,n_theta,inner_budget,seed\n"));
}

#[test]
fn json_output_parses() {
    let text = stdout(&randclt(&["--format", "json", "moments", "--system", "empirical", "--n", "8"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["n"], 8);
    assert!((v["m2"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn bad_input_exits_with_config_code() {
    assert_eq!(randclt(&["jn", "--n", "1", "--t-grid", "1"]).status.code(), Some(2));
    assert_eq!(
        randclt(&["distance", "--system", "nope", "--metric", "rho", "--target", "normal"]).status.code(),
        Some(2)
    );
    assert_eq!(randclt(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(randclt(&["--format", "csv", "moments", "--system", "trig", "--n", "4"]).status.code(), Some(2));
}

#[test]
fn run_reads_a_config_file() {
    let dir = std::env::temp_dir().join(format!("randclt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("exp.json");
    let out = dir.join("out.csv");
    std::fs::write(
        &cfg,
        r#"{"system": {"kind": "walsh"}, "n_list": [3, 7], "metrics": ["omega_sq"], "targets": ["typical"],
            "n_theta": 16, "seed": 9, "audits": ["chain"], "bounds": ["eq211"]}"#,
    )
    .unwrap();
    let status =
        randclt(&["--format", "csv", "--out", out.to_str().unwrap(), "run", "--config", cfg.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("walsh[d=2],walsh,3,omega_sq,typical"), "{text}");
    assert!(text.contains("walsh[d=3],walsh,7,omega_sq,typical"), "{text}");
    let audits = std::fs::read_to_string(dir.join("out.audits.csv")).unwrap();
    assert!(audits.starts_with("name,n,target,lhs,rhs,satisfied,detail\n"), "{audits}");
    assert_eq!(audits.lines().filter(|l| l.starts_with("chain,")).count(), 2);
    let bounds = std::fs::read_to_string(dir.join("out.bounds.csv")).unwrap();
    assert!(bounds.lines().nth(1).unwrap().starts_with("eq211_lower,3,"), "{bounds}");
    assert!(bounds.contains("T=1"), "{bounds}");
    std::fs::remove_dir_all(&dir).unwrap();
}
