use std::fs;
use std::process::Command;

fn rcmap() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rcmap"))
}

#[test]
fn map_sd_from_tabulated_file() {
    let dir = tempfile::tempdir().unwrap();
    let n = 201;
    let mut table = String::from("omega,J\n");
    for k in 0..n {
        let w = -1.0 + 2.0 * k as f64 / (n - 1) as f64;
        table.push_str(&format!("{w},{}\n", (1.0 - w * w).max(0.0).sqrt()));
    }
    fs::write(dir.path().join("sd.csv"), table).unwrap();
    fs::write(dir.path().join("cfg.json"), r#"{"sd": {"file": "sd.csv"}, "chain_length": 3}"#).unwrap();
    let out = dir.path().join("map.csv");
    let status = rcmap()
        .args(["map-sd", "--config"])
        .arg(dir.path().join("cfg.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,lambda,E"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((row[1] - 0.5).abs() < 1e-3);
    assert!(row[2].abs() < 1e-10);

    let out = dir.path().join("chain.csv");
    let status = rcmap()
        .args(["chain", "--workers", "1", "--config"])
        .arg(dir.path().join("cfg.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 4);
}

#[test]
fn demon_sweep_is_deterministic_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"model": "model2", "sweep": {"axis": "gamma_s", "from": 1e-6, "to": 1e-4, "points": 5}}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("sweep{workers}.csv"));
        let status = rcmap()
            .args(["demon-sweep", "--workers", workers, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    let header = text.lines().next().unwrap();
    for col in ["model", "gamma_s", "delta_s", "beta_ratio", "i_m", "i_m_over_gamma_s", "i_e", "i_e_ratio", "sigma_dot", "mi", "min_eig", "dqdmd_i_m_over_gamma_s", "error"] {
        assert!(header.split(',').any(|h| h == col), "missing column {col}");
    }
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn report_flags_imbalance() {
    let output = rcmap().arg("report").output().unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["imbalance"]["consistent"], false);
    assert!((v["imbalance"]["closed_form"].as_f64().unwrap() - 3.25).abs() < 1e-12);
    assert_eq!(v["models"].as_array().unwrap().len(), 4);
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"sweep": {"axis": "delta_s", "from": -1, "to": 1}}"#).unwrap();
    let status = rcmap().args(["demon-sweep", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = rcmap().arg("map-sd").status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = rcmap().args(["report", "--workers", "0"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn failed_grid_points_give_exit_code_one() {
    // The second point overflows the generator.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"model": "model1", "sweep": {"axis": "delta_s", "from": 1e-2, "to": 1e307, "points": 2}}"#,
    )
    .unwrap();
    let output = rcmap().args(["demon-sweep", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
}
