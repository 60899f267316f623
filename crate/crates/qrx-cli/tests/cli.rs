//! End-to-end runs of the `qrx` binary.

use qrx::linalg::max_abs_diff;
use qrx::povm::{binary_tree_decompose, reconstruct};
use qrx_cli::commands::tree::{povm_json, sample};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qrx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrx")).args(args).env_remove("QRX_THREADS").output().expect("binary runs")
}

fn qrx_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrx")).args(args).env("QRX_THREADS", threads).output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("missing column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bpsk_sweep_has_documented_columns_and_monotone_grid() {
    let text = ok(&qrx(&["bpsk-sweep", "--receiver", "nhpa", "--alpha-grid", "0.05:1.0:40"]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["alpha_sq", "p_succ", "p_helstrom", "gap", "gain_over_kennedy_pct", "beta", "gain", "cutoff", "squeezing"]);
    assert_eq!(rows.len(), 40);
    let alpha_sq = column(&header, &rows, "alpha_sq");
    assert!(alpha_sq.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(alpha_sq[0], 0.05 * 0.05);
    let p = column(&header, &rows, "p_succ");
    let h = column(&header, &rows, "p_helstrom");
    for ((a, p), h) in alpha_sq.iter().zip(&p).zip(&h) {
        assert!(*p <= h + 1e-12 && *p >= 0.5, "alpha_sq={a}");
        assert!((h - (0.5 + 0.5 * (1.0 - (-4.0 * a).exp()).sqrt())).abs() < 1e-12);
    }
    assert!(column(&header, &rows, "gain_over_kennedy_pct").iter().all(|g| *g >= -1e-9));
}

#[test]
fn bpsk_multistep_and_homodyne() {
    let text = ok(&qrx(&["bpsk-sweep", "--receiver", "kennedy", "--alpha-grid", "0.3,0.6", "--steps", "2"]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[5].is_empty() && r[8].is_empty()));
    let single = ok(&qrx(&["bpsk-sweep", "--receiver", "kennedy", "--alpha-grid", "0.3,0.6"]));
    let (_, single_rows) = csv_rows(&single);
    for (two, one) in column(&header, &rows, "p_succ").iter().zip(column(&header, &single_rows, "p_succ")) {
        assert!(*two >= one - 1e-12);
    }
    let text = ok(&qrx(&["bpsk-sweep", "--receiver", "homodyne", "--alpha-grid", "0.5"]));
    let (header, rows) = csv_rows(&text);
    let p = column(&header, &rows, "p_succ")[0];
    assert!((p - 0.8413447460685429).abs() < 1e-12);
    assert_eq!(qrx(&["bpsk-sweep", "--receiver", "homodyne", "--steps", "2"]).status.code(), Some(2));
    assert_eq!(qrx(&["bpsk-sweep", "--alpha-grid", "-1,0.5"]).status.code(), Some(2));
}

#[test]
fn hadamard_rates_are_bounded_by_capacity() {
    let text = ok(&qrx(&["hadamard-rates", "--M", "2", "--N", "2", "--E-grid", "log:1e-3:1:50"]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["E", "N", "M", "kind", "rate", "capacity"]);
    assert_eq!(rows.len(), 50);
    let rate = column(&header, &rows, "rate");
    let cap = column(&header, &rows, "capacity");
    assert!(rate.iter().zip(&cap).all(|(r, c)| *r > 0.0 && r <= c));
    let text = ok(&qrx(&["hadamard-rates", "--M", "3,4", "--N", "2,4,...,16", "--E-grid", "log:1e-3:1:7", "--kernel", "optimal,helstrom,realistic", "--J", "30"]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 7 * 4 * 2 * 3);
    let rate = column(&header, &rows, "rate");
    let cap = column(&header, &rows, "capacity");
    assert!(rate.iter().zip(&cap).all(|(r, c)| *r <= c + 1e-12));
    for chunk in rate.chunks(3) {
        assert!(chunk[0] >= chunk[1] - 1e-12 && chunk[1] >= chunk[2] - 1e-12, "optimal ≥ helstrom ≥ realistic");
    }
}

#[test]
fn invalid_hadamard_inputs_are_config_errors() {
    for args in [
        &["hadamard-rates", "--N", "3"][..],
        &["hadamard-rates", "--kernel", "psychic"],
        &["hadamard-rates", "--J", "0"],
        &["hadamard-rates", "--M", "5", "--kernel", "realistic"],
        &["hadamard-rates", "--E-grid", "log:0:1:3"],
    ] {
        assert_eq!(qrx(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn tree_decompose_reports_the_library_reconstruction_error() {
    let dir = tempfile::tempdir().unwrap();
    let povm = sample(1, 5, 7, 99).pop().unwrap();
    let input = dir.path().join("povm.json");
    fs::write(&input, povm_json(&povm).to_string()).unwrap();
    let text = ok(&qrx(&["tree-decompose", "--in", path_str(&input)]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 1);
    let reported = column(&header, &rows, "max_reconstruction_error")[0];
    let rebuilt = reconstruct(&binary_tree_decompose(&povm).unwrap());
    let oracle = povm.elements().iter().zip(rebuilt.elements()).map(|(a, b)| max_abs_diff(a, b)).fold(0.0, f64::max);
    assert!(reported < 1e-9);
    assert!((reported - oracle).abs() <= 1e-15, "reported {reported} vs {oracle}");
    assert_eq!(column(&header, &rows, "outcomes")[0], povm.len() as f64);
    assert_eq!(column(&header, &rows, "padded_outcomes")[0], povm.len().next_power_of_two() as f64);
}

#[test]
fn tree_decompose_accepts_a_bare_matrix_list() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("trine.json");
    // Trine POVM: (2/3)|ψ_k⟩⟨ψ_k| for real qubit states at 120°.
    let elements: Vec<Vec<Vec<[f64; 2]>>> = (0..3)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let v = [(t / 2.0).cos(), (t / 2.0).sin()];
            (0..2).map(|i| (0..2).map(|j| [2.0 / 3.0 * v[i] * v[j], 0.0]).collect()).collect()
        })
        .collect();
    fs::write(&input, serde_json::to_string(&elements).unwrap()).unwrap();
    let text = ok(&qrx(&["tree-decompose", "--in", path_str(&input)]));
    let (header, rows) = csv_rows(&text);
    assert!(column(&header, &rows, "max_reconstruction_error")[0] < 1e-12);
    assert_eq!(column(&header, &rows, "depth")[0], 2.0);
}

#[test]
fn tree_decompose_sampling_needs_a_seed_and_is_reproducible() {
    assert_eq!(qrx(&["tree-decompose", "--random", "5"]).status.code(), Some(2));
    let a = ok(&qrx(&["tree-decompose", "--random", "20", "--seed", "7"]));
    let b = ok(&qrx_threads(&["tree-decompose", "--random", "20", "--seed", "7"], "1"));
    assert_eq!(a, b);
    let (header, rows) = csv_rows(&a);
    assert_eq!(rows.len(), 20);
    assert!(column(&header, &rows, "max_reconstruction_error").iter().all(|e| *e < 1e-9));
    assert_ne!(a, ok(&qrx(&["tree-decompose", "--random", "20", "--seed", "8"])));
}

#[test]
fn tolerance_violation_is_a_numerical_error() {
    let out = qrx(&["tree-decompose", "--random", "3", "--seed", "1", "--tolerance", "1e-300"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(csv_rows(&String::from_utf8(out.stdout).unwrap()).1.len(), 3);
    assert_eq!(qrx(&["tree-decompose", "--random", "3", "--seed", "1", "--tolerance", "0"]).status.code(), Some(2));
}

#[test]
fn qubit_disc_trine_and_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("trine.csv");
    let mut text = String::from("c,rx,ry,rz,p\n");
    for k in 0..3 {
        let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
        text += &format!("0.5,{:.17e},{:.17e},0,{:.17e}\n", 0.5 * t.cos(), 0.5 * t.sin(), 1.0 / 3.0);
    }
    fs::write(&input, text).unwrap();
    let out = ok(&qrx(&["qubit-disc", "--in", path_str(&input)]));
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["states", "p_succ", "q_c", "q_rx", "q_ry", "q_rz", "ordering", "method"]);
    assert!((column(&header, &rows, "p_succ")[0] - 2.0 / 3.0).abs() < 1e-6);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "c,rx,ry,rz,p\n0.5,0.9,0,0,0.5\n0.5,0,0,0.5,0.5\n").unwrap();
    assert_eq!(qrx(&["qubit-disc", "--in", path_str(&bad)]).status.code(), Some(2));
    fs::write(&bad, "a,b\n1,2\n").unwrap();
    assert_eq!(qrx(&["qubit-disc", "--in", path_str(&bad)]).status.code(), Some(2));
    assert_eq!(qrx(&["qubit-disc", "--in", path_str(&dir.path().join("missing.csv"))]).status.code(), Some(4));
    assert_eq!(qrx(&["qubit-disc"]).status.code(), Some(2));
}

#[test]
fn gaussian_check_defaults() {
    let text = ok(&qrx(&["gaussian-check"]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 27);
    let i = header.iter().position(|h| h == "physical").unwrap();
    assert!(rows.iter().all(|r| r[i] == "true"));
    assert!(column(&header, &rows, "composition_error").iter().all(|e| *e <= 1e-12));
    assert!(column(&header, &rows, "margin").iter().all(|m| *m >= -1e-12));
}

#[test]
fn outputs_are_deterministic_and_json_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str, threads: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let json = dir.path().join(format!("{tag}.json"));
        let out = qrx_threads(
            &["hadamard-rates", "--M", "2,3", "--N", "2,4,8", "--E-grid", "log:1e-3:1:11", "--kernel", "helstrom,realistic", "--out", path_str(&csv), "--json", path_str(&json)],
            threads,
        );
        ok(&out);
        (fs::read(csv).unwrap(), fs::read(json).unwrap())
    };
    let (csv_a, json_a) = run("a", "1");
    let (csv_b, json_b) = run("b", "4");
    assert_eq!(csv_a, csv_b);
    assert_eq!(json_a, json_b);
    let (header, rows) = csv_rows(std::str::from_utf8(&csv_a).unwrap());
    let json: serde_json::Value = serde_json::from_slice(&json_a).unwrap();
    assert_eq!(json["columns"].as_array().unwrap().len(), header.len());
    for (row, object) in rows.iter().zip(json["rows"].as_array().unwrap()) {
        for (name, cell) in header.iter().zip(row) {
            match object[name.as_str()].as_f64() {
                Some(x) if name != "kind" => assert_eq!(cell.parse::<f64>().unwrap(), x, "{name}"),
                _ => assert_eq!(object[name.as_str()].as_str().unwrap(), cell),
            }
        }
    }
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"alpha-grid": "0.2:0.4:3", "receiver": "kennedy"}"#).unwrap();
    let text = ok(&qrx(&["bpsk-sweep", "--receiver", "nhpa", "--alpha-grid", "0.1:1:10", "--config", path_str(&config)]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(column(&header, &rows, "gain_over_kennedy_pct"), vec![0.0; 3]);

    fs::write(&config, r#"{"subcommand": "hadamard-rates", "M": "2", "N": "2", "E-grid": "0.1,0.2"}"#).unwrap();
    let (_, rows) = csv_rows(&ok(&qrx(&["--config", path_str(&config)])));
    assert_eq!(rows.len(), 2);

    fs::write(&config, r#"{"subcommand": "hadamard-rates", "alpha-grid": "0.1"}"#).unwrap();
    assert_eq!(qrx(&["--config", path_str(&config)]).status.code(), Some(2));
    assert_eq!(qrx(&["--config", path_str(&dir.path().join("none.json"))]).status.code(), Some(4));
}

#[test]
fn exit_codes_for_unknown_subcommand_and_unwritable_path() {
    assert_eq!(qrx(&["teleport"]).status.code(), Some(2));
    assert_eq!(qrx(&[]).status.code(), Some(2));
    let out = qrx(&["gaussian-check", "--out", "/nonexistent-dir/out.csv"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(qrx_threads(&["gaussian-check"], "0").status.code(), Some(2));
    assert_eq!(qrx_threads(&["gaussian-check"], "many").status.code(), Some(2));
}

#[test]
fn figures_writes_all_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("figs");
    ok(&qrx(&["figures", "--out-dir", path_str(&out), "--E-grid", "log:1e-3:0.1:4", "--N", "2,4,...,64", "--J", "30"]));
    for stem in ["optimal_rates", "optimal_rate_tiles", "helstrom_rates", "separable_rates", "psk_advantage"] {
        assert!(out.join(format!("{stem}.json")).exists(), "{stem}");
        let (header, rows) = csv_rows(&fs::read_to_string(out.join(format!("{stem}.csv"))).unwrap());
        assert!(!header.is_empty() && !rows.is_empty(), "{stem}");
    }
    let (header, rows) = csv_rows(&fs::read_to_string(out.join("psk_advantage.csv")).unwrap());
    assert_eq!(rows.len(), 4 * 2 * 2);
    let hel = column(&header, &rows, "delta_helstrom");
    let real = column(&header, &rows, "delta_realistic");
    assert!(hel.iter().zip(&real).all(|(h, r)| r <= &(h + 1e-12)));
    let (_, tiles) = csv_rows(&fs::read_to_string(out.join("optimal_rate_tiles.csv")).unwrap());
    assert_eq!(tiles.len(), 7 * 8);
}
