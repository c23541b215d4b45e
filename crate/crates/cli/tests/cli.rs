use std::path::Path;
use std::process::{Command, Output};

use mvbv_core::{parse_sequence_spec, SequenceProvider};

fn mvbvlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvbvlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn body(csv: &str) -> &str {
    let (first, rest) = csv.split_once('\n').unwrap();
    assert!(first.starts_with("# mvbvlab "), "{first}");
    rest
}

#[test]
fn generate_then_parse_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for (name, extra) in [("thm1", vec!["--jmax", "3"]), ("prop3", vec!["--kmax", "8"]), ("log_damped", vec![])] {
        let mut args = vec!["generate", "--builtin", name, "--terms", "500", "--out", name];
        args.extend(extra);
        let out = mvbvlab(&args, dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let from_csv = parse_sequence_spec(dir.path().join(format!("{name}.csv"))).unwrap();
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{name}.json"))).unwrap()).unwrap();
        let rebuilt = mvbv_core::spec_io::parse_sequence_value(&meta["spec"]).unwrap();
        let (a, b) = (from_csv.real().unwrap(), rebuilt.real().unwrap());
        assert_eq!(a.known_length(), Some(500));
        for k in 1..=500 {
            assert_eq!(a.term(k).unwrap().to_bits(), b.term(k).unwrap().to_bits(), "{name} k = {k}");
        }
    }
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_caps() {
    let dir = tempfile::tempdir().unwrap();
    let run = |prefix: &str, threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_mvbvlab"))
            .args(["converge", "--builtin", "power_p", "--p", "1.5", "--levels", "4:9", "--out", prefix])
            .env("MVBVLAB_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read_to_string(dir.path().join(format!("{prefix}.csv"))).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "4");
    let c = run("c", "4");
    assert_eq!(body(&a), body(&b));
    assert_eq!(body(&b), body(&c));
    assert!(body(&a).starts_with("pair_n,pair_m,sup_gap\n16,32,"));
}

#[test]
fn relations_matrix_holds() {
    let dir = tempfile::tempdir().unwrap();
    let out = mvbvlab(&["relations", "--out", "rel"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("rel.csv")).unwrap();
    assert_eq!(body(&csv).lines().count(), 1 + 40);
    assert!(!csv.contains(",false\n"));
}

#[test]
fn assertion_flags_map_to_exit_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let ok = mvbvlab(
        &["certify", "--builtin", "power_p", "--p", "1", "--class", "mvbvs", "--lambda", "2", "--window", "4:4096", "--assert-member"],
        dir.path(),
    );
    assert_eq!(ok.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(cert["verdict"], "member_on_window");

    let rejected = mvbvlab(
        &["certify", "--builtin", "prop3", "--class", "gbvs", "--n0", "2", "--window", "16:2048", "--assert-member"],
        dir.path(),
    );
    assert_eq!(rejected.status.code(), Some(2));

    let without_flag = mvbvlab(&["certify", "--builtin", "prop3", "--class", "nbvs", "--window", "16:2048"], dir.path());
    assert_eq!(without_flag.status.code(), Some(0));

    let divergent = mvbvlab(&["converge", "--builtin", "power_p", "--p", "1", "--levels", "4:7", "--assert-convergent"], dir.path());
    assert_eq!(divergent.status.code(), Some(2));
}

#[test]
fn errors_exit_with_status_one_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("neg.json"), r#"{"type": "explicit", "values": [1.0, 0.5, -0.25]}"#).unwrap();
    let out = mvbvlab(&["certify", "--spec", "neg.json", "--class", "ms", "--window", "1:2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("term 3"));

    let out = mvbvlab(&["certify", "--builtin", "power_p", "--p", "1", "--class", "mvbvs", "--window", "5:2"], dir.path());
    assert_ne!(out.status.code(), Some(0));

    let out = mvbvlab(&["generate", "--builtin", "nonexistent"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.name"));

    let out = Command::new(env!("CARGO_BIN_EXE_mvbvlab"))
        .args(["relations"])
        .env("MVBVLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn diverge_demo_and_complex_check_write_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = mvbvlab(&["diverge-demo", "--builtin", "thm6", "--jmax", "3", "--out", "d"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    assert!(body(&csv).starts_with("j,n_j,t_j,gap,sqrt_log_scale\n2,10,"));

    let spec = serde_json::json!({
        "type": "complex",
        "theta0": 0.6,
        "terms": (1..=32).flat_map(|k| {
            let r = 1.0 / (k * k) as f64;
            [serde_json::json!([k, r, 0.2 * r]), serde_json::json!([-k, r, -0.2 * r])]
        }).collect::<Vec<_>>(),
    });
    std::fs::write(dir.path().join("c.json"), spec.to_string()).unwrap();
    let out = mvbvlab(&["complex-check", "--spec", "c.json", "--out", "c"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(body(&csv).starts_with("pair_n,pair_m,sup_gap_re,sup_gap_im\n"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(report["sector"]["holds"], true);
    assert_eq!(report["symmetric_sum"]["flagged_divergent"], false);

    let out = mvbvlab(&["complex-check", "--spec", "d.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
