use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zakharov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zakharov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn wave_matches_golden_file() {
    let o = zakharov(&[
        "wave", "--kappa", "0.5", "--c", "0", "--sigma", "1", "--n", "16",
    ]);
    assert_eq!(code(&o), 0);
    let golden =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/wave_kappa0.5_c0_sigma1_n16.csv");
    let want = std::fs::read_to_string(golden).unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), want);
}

#[test]
fn wave_header_and_rows() {
    let o = zakharov(&[
        "wave", "--kappa", "0.5", "--c", "0", "--sigma", "1", "--n", "256",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header: Value =
        serde_json::from_str(lines.next().unwrap().strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(lines.next().unwrap(), "x,phi,dphi,psi");
    assert_eq!(lines.count(), 256);
    // α² = σ/(2 − κ²) and φ0² = 4α² at c = 0.
    let alpha = header["alpha"].as_f64().unwrap();
    assert!((alpha * alpha - 1.0 / 1.75).abs() < 1e-15);
    let phi0 = header["phi0"].as_f64().unwrap();
    assert!((phi0 - 2.0 * alpha).abs() < 1e-15);
    assert!(header["T"].as_f64().unwrap() > 0.0);
}

#[test]
fn wave_winding_header() {
    let o = zakharov(&[
        "wave", "--kappa", "0.5", "--c", "0.5", "--l", "1", "--n", "32",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let header: Value =
        serde_json::from_str(text.lines().next().unwrap().strip_prefix("# ").unwrap()).unwrap();
    assert!((header["cT_over_2pi"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(header["l"], 1);
}

#[test]
fn invalid_parameters_exit_two() {
    let o = zakharov(&["wave", "--kappa", "1.5", "--sigma", "1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("modulus out of (0,1)"));

    let o = zakharov(&["wave", "--kappa", "0.5", "--c", "1.2", "--sigma", "1"]);
    assert_eq!(code(&o), 2);
    let o = zakharov(&["wave", "--kappa", "0.5", "--sigma", "1", "--n", "31"]);
    assert_eq!(code(&o), 2);
    let o = zakharov(&["wave", "--kappa", "0.5"]);
    assert_eq!(code(&o), 2);
    let o = zakharov(&["lame-check", "--kappa", "half"]);
    assert_eq!(code(&o), 2);
    let o = zakharov(&["sweep", "--kappa", "0.1,0.9,0", "--sigma", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn lame_check_tables() {
    for (kappa, n) in [("0.5", "256"), ("0.9", "512")] {
        let o = zakharov(&["lame-check", "--kappa", kappa, "--n", n]);
        assert_eq!(code(&o), 0, "kappa {kappa}");
        let text = String::from_utf8(o.stdout).unwrap();
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 7);
        for r in &rows {
            assert!(r[3].parse::<f64>().unwrap() < 1e-8);
        }
    }
    // Too coarse a grid for the steep potential: the regression signal fires.
    let o = zakharov(&["lame-check", "--kappa", "0.95", "--n", "16"]);
    assert_eq!(code(&o), 1);
}

const STABILITY_FIELDS: [&str; 13] = [
    "params",
    "inner_I",
    "d_matrix",
    "det_closed",
    "det_numeric",
    "n_H",
    "n0_D",
    "k_r",
    "k_c",
    "k_i_minus",
    "max_re_lambda",
    "verdict",
    "residuals",
];

#[test]
fn stability_schema_and_verdicts() {
    let o = zakharov(&[
        "stability",
        "--kappa",
        "0.5",
        "--c",
        "0.5",
        "--l",
        "1",
        "--n",
        "128",
    ]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert_eq!(&keys[..STABILITY_FIELDS.len()], &STABILITY_FIELDS);
    assert_eq!(v["verdict"], "stable");
    assert!(v["d_matrix"]["closed"]["d11"].is_number());
    assert!(v["d_matrix"]["numeric"]["d21"].is_number());

    let o = zakharov(&[
        "stability",
        "--kappa",
        "0.5",
        "--c",
        "0",
        "--sigma",
        "1",
        "--n",
        "128",
    ]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "stable");
    assert_eq!(v["k_i_minus"], 0);

    let o = zakharov(&[
        "stability",
        "--kappa",
        "0.5",
        "--c",
        "0.5",
        "--l",
        "1",
        "--n",
        "64",
        "--corrupt-I",
        "1.1",
    ]);
    assert_eq!(code(&o), 3);
    assert_eq!(stdout_json(&o)["verdict"], "inconclusive");
}

#[test]
fn stability_closed_form_mode_has_no_spectrum() {
    let o = zakharov(&[
        "stability",
        "--kappa",
        "0.7",
        "--c",
        "-0.2",
        "--sigma",
        "2",
        "--mode",
        "closed-form",
    ]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!(v["max_re_lambda"].is_null());
    assert!(v["det_numeric"].is_null());
    assert!(v["det_closed"].as_f64().unwrap() < 0.0);
}

#[test]
fn spectrum_report() {
    let o = zakharov(&[
        "spectrum", "--kappa", "0.5", "--c", "0.3", "--sigma", "1", "--n", "64",
    ]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["L_minus"]["kernel_dim"], 1);
    assert_eq!(v["L_plus"]["morse_index"], 1);
    assert_eq!(v["H"]["kernel_dim"], 2);
    assert_eq!(v["JH"]["k_r"], 0);
    assert_eq!(v["krein"]["k_i_minus"], 0);
}

#[test]
fn sweep_rows_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("s.csv");
    let o = zakharov(&[
        "sweep",
        "--kappa",
        "0.2,0.8,3",
        "--c",
        "0,0.4",
        "--sigma",
        "1",
        "--n",
        "32",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("summary"));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(text.lines().last().unwrap().starts_with("# summary"));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0].parse::<usize>().unwrap(), i);
        assert_eq!(&r[21], "stable");
    }

    let json_path = dir.path().join("s.json");
    let o = zakharov(&[
        "sweep",
        "--kappa",
        "0.3,0.6,2",
        "--c",
        "0.5",
        "--l",
        "1,2",
        "--n",
        "32",
        "--format",
        "json",
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["rows"][1]["l"], 2);
    assert_eq!(v["summary"]["stable"], 4);
}
