use std::path::{Path, PathBuf};
use std::process::Command;

use resoshift::polarization::BoundaryCurve;
use resoshift_cli::{run, Cell, ConfigError, ResultTable, RunError, RunOptions, ScenarioConfig, Task};

const W0: (f64, f64) = (4.250755867232418, -1.468777917384384);

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn exec(json: &str, task: Task) -> Result<ResultTable, RunError> {
    let cfg = ScenarioConfig::from_slice(json.as_bytes())?;
    run(&cfg, task, json.as_bytes(), &RunOptions::default())
}

fn col(t: &ResultTable, name: &str) -> Vec<f64> {
    let j = t.column(name).unwrap_or_else(|| panic!("no column {name} in {:?}", t.columns));
    t.rows.iter().map(|r| r[j].as_f64().unwrap()).collect()
}

fn disk_sweep(sweep: &str) -> String {
    format!(
        r#"{{
  "cavity": {{ "type": "disk", "radius": 1.0, "eps": "0.2+0j" }},
  "mode": {{ "m": 1, "search_box": [3.5, 5.0, -2.0, -1.0] }},
  "particles": [{{ "center": [1.2, 0.0], "delta": 0.1, "eps": "0.2+0j" }}],
  "sweep": {sweep}
}}"#
    )
}

fn slab(extra: &str) -> String {
    format!(
        r#"{{
  "cavity": {{ "type": "slab", "a": -1, "b": 1, "eps": "4" }},
  "mode": {{ "search_box": [0.1, 3, -1, -0.01], "index": 1 }},
  "particles": [{{ "center": [0.0], "delta": 0.01, "eps": "2" }}]{extra}
}}"#
    )
}

#[test]
fn shipped_configs_validate() {
    for (name, param) in [("size_sweep", "delta"), ("position_sweep", "z"), ("permittivity_sweep", "inv_eps_c")] {
        let path = repo_root().join(format!("configs/{name}.json"));
        let (cfg, _) = ScenarioConfig::load(&path).unwrap();
        cfg.validate(Task::Sweep).unwrap();
        assert_eq!(cfg.sweep.as_ref().unwrap().parameter.name(), param);
    }
}

#[test]
fn size_sweep_has_the_declared_columns() {
    let json = disk_sweep(r#"{ "parameter": "delta", "values": { "logspace": [0.01, 0.1, 3] }, "oracle": true, "center_offset": 2.0 }"#);
    let t = exec(&json, Task::Sweep).unwrap();
    let expected = [
        "delta", "re_omega0", "im_omega0", "shift_asym_1", "shift_asym_2", "shift_oracle_1", "shift_oracle_2", "rel_err_1", "rel_err_2",
    ];
    assert_eq!(t.columns, expected);
    assert_eq!(col(&t, "delta"), vec![0.01, 10f64.powf(-1.5), 0.1]);
    for w in col(&t, "re_omega0") {
        assert!((w - W0.0).abs() < 1e-12);
    }
    for j in ["1", "2"] {
        let asym = col(&t, &format!("shift_asym_{j}"));
        let oracle = col(&t, &format!("shift_oracle_{j}"));
        let err = col(&t, &format!("rel_err_{j}"));
        for i in 0..3 {
            assert_eq!(err[i], (asym[i] - oracle[i]) / oracle[i]);
        }
        // shifts grow like delta^2 (the gap shrinks with delta too) and agree to a few percent at delta = 0.01
        assert!(asym[1] / asym[0] > 8.0 && asym[1] / asym[0] < 13.0);
        assert!(err[0].abs() < 0.05, "branch {j}: {}", err[0]);
    }
}

#[test]
fn sweeps_are_deterministic_across_thread_counts() {
    let json = disk_sweep(r#"{ "parameter": "z", "values": { "linspace": [1.2, 2.0, 5] }, "oracle": true }"#);
    let cfg = ScenarioConfig::from_slice(json.as_bytes()).unwrap();
    let one = run(&cfg, Task::Sweep, json.as_bytes(), &RunOptions { threads: Some(1) }).unwrap();
    let four = run(&cfg, Task::Sweep, json.as_bytes(), &RunOptions { threads: Some(4) }).unwrap();
    assert_eq!(one.to_csv_string(), four.to_csv_string());
    assert_eq!(col(&one, "z"), vec![1.2, 1.4, 1.6, 1.8, 2.0]);
}

#[test]
fn permittivity_sweep_flags_one_peak() {
    let json = disk_sweep(r#"{ "parameter": "inv_eps_c", "values": { "linspace": [-3.0, 3.0, 42] } }"#);
    let t = exec(&json, Task::Sweep).unwrap();
    let shift = col(&t, "shift_asym_1");
    let peak = col(&t, "peak");
    assert_eq!(peak.iter().filter(|&&p| p == 1.0).count(), 1);
    let i = peak.iter().position(|&p| p == 1.0).unwrap();
    assert!(shift.iter().all(|&s| s <= shift[i]));
    // the peak sits at the plasmonic contrast 1/eps_c = -1
    assert!((col(&t, "inv_eps_c")[i] + 1.0).abs() < 0.1);
    let status = t.column("status").unwrap();
    assert!(t.rows.iter().all(|r| r[status] == Cell::Text("ok".into())));
}

#[test]
fn singular_contrast_becomes_a_row_status() {
    let json = disk_sweep(r#"{ "parameter": "inv_eps_c", "values": [-2.0, -1.0, 0.5] }"#);
    let t = exec(&json, Task::Sweep).unwrap();
    let status = t.column("status").unwrap();
    assert_eq!(t.rows[1][status], Cell::Text("CavityError::Polarization::SingularContrast".into()));
    assert!(col(&t, "shift_asym_1")[1].is_nan());
    assert_eq!(col(&t, "peak"), vec![1.0, 0.0, 0.0]);
}

#[test]
fn disk_modes_are_the_degenerate_pair() {
    let json = r#"{ "cavity": { "type": "disk", "eps": "0.2" }, "mode": { "m": 1, "search_box": [3.5, 5.0, -2.0, -1.0] } }"#;
    let t = exec(json, Task::Modes).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert_eq!(t.rows[0][1], Cell::Text("cos".into()));
    assert_eq!(t.rows[1][1], Cell::Text("sin".into()));
    let (re, im) = (col(&t, "re_omega0"), col(&t, "im_omega0"));
    assert!((re[0] - W0.0).abs() < 1e-12 && (im[0] - W0.1).abs() < 1e-12);

    let seeded = r#"{ "cavity": { "type": "disk", "eps": "0.2" }, "mode": { "m": 1, "seed": "4.2-1.4j" } }"#;
    let s = exec(seeded, Task::Modes).unwrap();
    assert!((col(&s, "re_omega0")[0] - W0.0).abs() < 1e-12);
}

#[test]
fn shift_rows_follow_the_mode_pair() {
    let json = r#"{ "cavity": { "type": "disk", "eps": "0.2" }, "mode": { "m": 1, "search_box": [3.5, 5.0, -2.0, -1.0] },
      "particles": [{ "center": [1.2, 0], "delta": 0.1, "eps": "0.2" }] }"#;
    let t = exec(json, Task::Shift).unwrap();
    assert_eq!(t.rows.len(), 2);
    let (re, im) = (col(&t, "re_eta"), col(&t, "im_eta"));
    let shift = col(&t, "shift_asym");
    for j in 0..2 {
        assert!((re[j].hypot(im[j]) - shift[j]).abs() < 1e-12 * shift[j]);
    }
}

#[test]
fn oracle_reports_truncations() {
    let json = r#"{ "cavity": { "type": "disk", "eps": "0.2" }, "mode": { "m": 1, "search_box": [3.5, 5.0, -2.0, -1.0] },
      "particles": [{ "center": [1.2, 0], "delta": 0.1, "eps": "0.2" }] }"#;
    let t = exec(json, Task::Oracle).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert!(col(&t, "n1").iter().all(|&n| n >= 13.0));
    assert!(col(&t, "stability").iter().all(|&s| s < 1e-8));
    assert!(t.provenance.iter().any(|(k, _)| k == "truncation"));
}

#[test]
fn slab_sweep_error_shrinks_with_delta() {
    let t = exec(&slab(r#", "sweep": { "parameter": "delta", "values": [0.001, 0.01], "oracle": true }"#), Task::Sweep).unwrap();
    assert_eq!(t.columns, ["delta", "re_omega0", "im_omega0", "shift_asym", "shift_oracle", "rel_err"]);
    let err = col(&t, "rel_err");
    assert!(err[0].abs() < 1e-2 && err[0].abs() < err[1].abs(), "{err:?}");
}

#[test]
fn slab_shift_and_oracle_agree() {
    let s = exec(&slab(""), Task::Shift).unwrap();
    let o = exec(&slab(""), Task::Oracle).unwrap();
    let (pr, pi) = (col(&s, "re_omega_pred")[0], col(&s, "im_omega_pred")[0]);
    let (er, ei) = (col(&o, "re_omega")[0], col(&o, "im_omega")[0]);
    let (w0r, w0i) = (col(&s, "re_omega0")[0], col(&s, "im_omega0")[0]);
    let shift = (er - w0r).hypot(ei - w0i);
    assert!((pr - er).hypot(pi - ei) < 0.05 * shift);
}

#[test]
fn pt_closed_form_matches_numeric() {
    let cfg = |method: &str| {
        format!(
            r#"{{ "cavity": {{ "type": "disk", "eps": "0.2" }},
               "pt": {{ "shape": {{ "type": "ellipse", "semi_axes": [1.0, 0.5], "angle": 0.3 }}, "contrast": "5", "method": "{method}", "nodes": 256 }} }}"#
        )
    };
    let a = exec(&cfg("auto"), Task::Pt).unwrap();
    let b = exec(&cfg("numeric"), Task::Pt).unwrap();
    assert_eq!(a.rows.len(), 4);
    for (x, y) in col(&a, "re").iter().zip(col(&b, "re")) {
        assert!((x - y).abs() < 1e-8 * x.abs().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn curve_paths_resolve_next_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    BoundaryCurve::kite(128).write(&dir.path().join("kite.txt")).unwrap();
    let json = r#"{ "cavity": { "type": "disk", "eps": "0.2" }, "pt": { "shape": { "type": "curve", "path": "kite.txt" }, "contrast": "3" } }"#;
    let path = dir.path().join("pt.json");
    std::fs::write(&path, json).unwrap();
    let (cfg, raw) = ScenarioConfig::load(&path).unwrap();
    let from_file = run(&cfg, Task::Pt, &raw, &RunOptions::default()).unwrap();
    let builtin = json.replace(r#"{ "type": "curve", "path": "kite.txt" }"#, r#"{ "type": "kite", "nodes": 128 }"#);
    let direct = exec(&builtin, Task::Pt).unwrap();
    for (x, y) in col(&from_file, "re").iter().zip(col(&direct, "re")) {
        assert!((x - y).abs() < 1e-12 * x.abs().max(1.0));
    }
}

#[test]
fn size_inversion_from_oracle_data() {
    let json = r#"{ "cavity": { "type": "disk", "eps": "0.2" }, "mode": { "m": 1, "search_box": [3.5, 5.0, -2.0, -1.0] },
      "particles": [{ "center": [1.02, 0], "delta": 0.01, "eps": "0.2" }], "invert_size": { "from_oracle": true } }"#;
    let t = exec(json, Task::InvertSize).unwrap();
    assert_eq!(t.rows.len(), 2);
    for e in col(&t, "rel_err") {
        assert!(e.abs() < 0.05, "{e}");
    }
}

#[test]
fn count_inversion_recovers_the_count() {
    let json = r#"{ "cavity": { "type": "disk", "eps": "0.2" },
      "particles": [{ "center": [1.01, 0], "delta": 0.01, "eps": "0.2" }],
      "invert_count": {
        "modes": [
          { "m": 1, "search_box": [3.5, 5.0, -2.0, -1.0] },
          { "m": 2, "search_box": [6.5, 7.5, -2.2, -1.4] },
          { "m": 3, "search_box": [9.0, 10.5, -2.5, -1.6] }
        ],
        "true_count": 3, "noise": 0.01, "seed": 7, "candidates": [1, 8]
      } }"#;
    let t = exec(json, Task::InvertCount).unwrap();
    let n = col(&t, "n");
    let sel = col(&t, "selected");
    assert_eq!(n.len(), 8);
    assert_eq!(n[sel.iter().position(|&s| s == 1.0).unwrap()], 3.0);
}

#[test]
fn schema_errors_carry_the_field_path() {
    let cases = [
        // internally tagged enums report the enclosing object
        (r#"{ "cavity": { "type": "disk", "eps": "abc" } }"#, "cavity"),
        (r#"{ "cavity": { "type": "disk", "eps": "0.2" }, "mode": { "m": 1, "seed": "x" } }"#, "mode.seed"),
        (r#"{ "cavity": { "type": "disk", "eps": "0.2", "colour": 1 } }"#, "cavity"),
        (r#"{ "cavity": { "type": "torus", "eps": "0.2" } }"#, "cavity.type"),
        (r#"{ "cavity": { "type": "disk", "eps": "0.2" }, "particles": [{ "center": [1.2, 0], "delta": "big", "eps": "1" }] }"#, "particles[0].delta"),
    ];
    for (json, path) in cases {
        match ScenarioConfig::from_slice(json.as_bytes()) {
            Err(ConfigError::Invalid { path: p, .. }) => assert_eq!(p, path, "{json}"),
            other => panic!("{json}: {other:?}"),
        }
    }
}

#[test]
fn task_preconditions_are_checked_before_dispatch() {
    let base = r#"{ "cavity": { "type": "disk", "eps": "0.2" }, "mode": { "m": 1, "search_box": [3.5, 5.0, -2.0, -1.0] } "#;
    let cases = [
        (format!("{base} }}"), Task::Shift, "particles"),
        (format!(r#"{base}, "particles": [{{ "center": [1.2, 0], "delta": -1, "eps": "1" }}] }}"#), Task::Shift, "particles[0].delta"),
        (format!(r#"{base}, "particles": [{{ "center": [1.05, 0], "delta": 0.1, "eps": "1" }}] }}"#), Task::Shift, "particles[0]"),
        (format!(r#"{base}, "particles": [{{ "center": [1.2, 0.1], "delta": 0.1, "eps": "1" }}] }}"#), Task::Oracle, "particles[0].center"),
        (format!(r#"{base}, "task": "pt" }}"#), Task::Modes, "task"),
        (format!(r#"{base}, "particles": [{{ "center": [1.2, 0], "delta": 0.1, "eps": "1" }}] }}"#), Task::Sweep, "sweep"),
        (
            format!(r#"{base}, "particles": [{{ "center": [1.2, 0], "delta": 0.1, "eps": "1" }}], "sweep": {{ "parameter": "delta", "values": [0.1, 0.3] }} }}"#),
            Task::Sweep,
            "sweep.values[1]",
        ),
    ];
    for (json, task, path) in cases {
        match exec(&json, task) {
            Err(RunError::Config(ConfigError::Invalid { path: p, .. })) => assert_eq!(p, path, "{json}"),
            other => panic!("{json}: {:?}", other.map(|t| t.to_csv_string())),
        }
    }
}

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_resoshift")).args(args).output().unwrap()
}

#[test]
fn binary_writes_csv_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("modes.json");
    std::fs::write(&cfg, r#"{ "cavity": { "type": "disk", "eps": "0.2" }, "mode": { "m": 1, "search_box": [3.5, 5.0, -2.0, -1.0] } }"#).unwrap();
    let out = dir.path().join("modes.csv");
    let o = binary(&["modes", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# resoshift: "));
    assert_eq!(lines[1], "# task: modes");
    assert!(lines[2].starts_with("# config_sha256: ") && lines[2].len() == "# config_sha256: ".len() + 64);
    let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert_eq!(lines[header], "m,parity,re_omega0,im_omega0,dispersion_residual");
    assert_eq!(lines.len(), header + 3);

    let again = binary(&["modes", "--config", cfg.to_str().unwrap()]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn binary_reports_errors_by_variant() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, r#"{ "cavity": { "type": "disk", "eps": "0.2" }, "mode": { "m": 1, "search_box": [0.1, 0.5, -0.2, -0.1] } }"#).unwrap();
    let o = binary(&["modes", "--config", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CavityError::EmptyBox"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{ "cavity": { "type": "disk", "eps": "0.2" }, "mode": { "m": 1, "search_box": [3.5, 5.0, -2.0, 1.0] } }"#).unwrap();
    let o = binary(&["modes", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ConfigError::Invalid") && err.contains("mode.search_box"), "{err}");

    let o = binary(&["modes", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
