//! End-to-end checks of the `sdpinn` binary on miniature configs.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdpinn"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn tiny_config(out_dir: &Path) -> String {
    format!(
        r#"{{
        "problem": {{ "name": "kdv", "b": 20.0 }},
        "thresholds": [-0.5],
        "grid": {{ "n_x": 40, "n_t": 20 }},
        "seeds": [0, 1],
        "output_dir": "{}",
        "methods": [
            {{
                "method": "sdpinn",
                "subdomains": [ {{ "layers": 2, "neurons": 8, "n_u": 15, "n_f": 25, "n_i": 5 }} ],
                "optimizer": {{ "max_iters": 8 }}
            }},
            {{
                "method": "pinn",
                "subdomains": [ {{ "layers": 2, "neurons": 8, "n_u": 15, "n_f": 25 }} ],
                "optimizer": {{ "max_iters": 8 }}
            }}
        ]
    }}"#,
        out_dir.display()
    )
}

#[test]
fn run_and_report_produce_the_documented_artifacts() {
    let base = std::env::temp_dir().join("sdpinn_cli_test_run");
    let _ = std::fs::remove_dir_all(&base);
    let out = base.join("out");
    let config = write_config(&base, "tiny.json", &tiny_config(&out));

    let status = bin().arg("run").arg(&config).arg("--workers").arg("2").status().unwrap();
    assert!(status.success());

    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 1 + 4, "2 methods x 2 seeds: {summary}");
    assert!(lines[0].starts_with("problem,b,method,seed,status,error,error_1,error_2"));
    assert!(lines.iter().skip(1).all(|l| l.contains(",ok,")));

    // Per-run artifacts for one sdpinn run.
    let run_dir = out.join("kdv_sdpinn_seed0");
    for file in [
        "trace_sub0.csv",
        "trace_sub1.csv",
        "loss_reports_sub0.csv",
        "params_sub0.ckpt",
        "params_sub1.ckpt",
        "grid.csv",
        "points.csv",
    ] {
        assert!(run_dir.join(file).exists(), "missing {file}");
    }
    let grid = std::fs::read_to_string(run_dir.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 40 * 20);
    assert!(grid.starts_with("x,t,pred,exact,abs_err,subdomain"));

    // PINN runs write a single trace/checkpoint.
    assert!(out.join("kdv_pinn_seed1").join("trace.csv").exists());
    assert!(out.join("kdv_pinn_seed1").join("params.ckpt").exists());

    // Report aggregates mean/median rows per method.
    let status = bin().arg("report").arg(&out).status().unwrap();
    assert!(status.success());
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 4 + 2 * 2);
    assert!(report.contains("mean"));
    assert!(report.contains("median"));
}

#[test]
fn rerunning_a_config_reproduces_the_summary_bitwise() {
    let base = std::env::temp_dir().join("sdpinn_cli_test_rerun");
    let _ = std::fs::remove_dir_all(&base);
    let out = base.join("out");
    let config = write_config(&base, "tiny.json", &tiny_config(&out));

    assert!(bin().arg("run").arg(&config).status().unwrap().success());
    let first = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(bin().arg("run").arg(&config).status().unwrap().success());
    let second = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn seed_offset_shifts_the_seed_column() {
    let base = std::env::temp_dir().join("sdpinn_cli_test_offset");
    let _ = std::fs::remove_dir_all(&base);
    let out = base.join("out");
    let config = write_config(&base, "tiny.json", &tiny_config(&out));
    let status = bin()
        .arg("run")
        .arg(&config)
        .arg("--seed-offset")
        .arg("10")
        .status()
        .unwrap();
    assert!(status.success());
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains(",10,"), "{summary}");
    assert!(summary.contains(",11,"), "{summary}");
}

#[test]
fn invalid_config_fails_with_a_field_level_message() {
    let base = std::env::temp_dir().join("sdpinn_cli_test_invalid");
    let _ = std::fs::remove_dir_all(&base);
    let config = write_config(
        &base,
        "bad.json",
        r#"{
            "problem": { "name": "kdv", "b": 20.0 },
            "grid": { "n_x": 40, "n_t": 20 },
            "seeds": [],
            "methods": [
                { "method": "sdpinn",
                  "subdomains": [ { "layers": 2, "neurons": 8, "n_u": 15, "n_f": 25 } ] }
            ]
        }"#,
    );
    let output = bin().arg("run").arg(&config).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("seed"), "stderr: {stderr}");
}

#[test]
fn shipped_configs_validate() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(configs).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            sdpinn_cli::config::ExperimentConfig::from_file(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5, "expected the shipped experiment configs, found {seen}");
}

#[test]
fn sweep_collects_per_amplitude_rows() {
    let base = std::env::temp_dir().join("sdpinn_cli_test_sweep");
    let _ = std::fs::remove_dir_all(&base);
    let out = base.join("out");
    let body = format!(
        r#"{{
        "problem": {{ "name": "kdv", "b": 1.0 }},
        "grid": {{ "n_x": 30, "n_t": 15 }},
        "seeds": [0],
        "output_dir": "{}",
        "methods": [
            {{ "method": "pinn",
               "subdomains": [ {{ "layers": 2, "neurons": 6, "n_u": 10, "n_f": 15 }} ],
               "optimizer": {{ "max_iters": 5 }} }}
        ]
    }}"#,
        out.display()
    );
    let config = write_config(&base, "sweep.json", &body);
    let status = bin()
        .arg("sweep")
        .arg(&config)
        .arg("--param")
        .arg("b")
        .arg("--values")
        .arg("1,2")
        .status()
        .unwrap();
    assert!(status.success());
    let sweep = std::fs::read_to_string(
        PathBuf::from(format!("{}_sweep", out.display())).join("sweep_summary.csv"),
    )
    .unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines.len(), 1 + 2, "{sweep}");
    assert!(lines[1].contains("1.00000000000000000e0"));
    assert!(lines[2].contains("2.00000000000000000e0"));
}
