use std::fs;
use std::path::Path;
use std::process::Command;

fn wl1(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_wl1")).args(args).output().unwrap();
    out.status.code().unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn recover_exit_codes_and_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("rec");
    let o = out.to_str().unwrap();
    let code = wl1(&["recover", "--n", "200", "--m", "100", "--n1", "100", "--p1", "0.3", "--p2", "0.05", "--w2", "3", "--seed", "7", "--out", o]);
    assert!(code == 0 || code == 1);
    for f in ["manifest.json", "x_true.csv", "x_hat.csv", "diagnostics.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let again = tmp.path().join("again");
    let code2 = wl1(&["recover", "--n", "200", "--m", "100", "--n1", "100", "--p1", "0.3", "--p2", "0.05", "--w2", "3", "--seed", "7", "--out", again.to_str().unwrap()]);
    assert_eq!(code, code2);
    assert_eq!(read(&out, "x_hat.csv"), read(&again, "x_hat.csv"));

    assert_eq!(wl1(&["recover", "--n", "200", "--m", "100", "--out", o]), 2);
    // a dense support far above the weak threshold must fail
    let dense = tmp.path().join("dense");
    assert_eq!(wl1(&["recover", "--n", "60", "--m", "20", "--n1", "30", "--p1", "0.9", "--p2", "0.9", "--w2", "1", "--seed", "1", "--out", dense.to_str().unwrap()]), 1);
}

#[test]
fn unit_weight_matches_plain_l1() {
    use weighted_l1::model::{gaussian_instance, AmplitudeLaw, SparsityModel, WeightScheme};
    use weighted_l1::recovery::{recover, RecoveryOptions};

    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    wl1(&["recover", "--n", "40", "--m", "20", "--n1", "20", "--p1", "0.2", "--p2", "0.1", "--w2", "1", "--seed", "5", "--out", out.to_str().unwrap()]);
    let model = SparsityModel::new(20, 20, 0.2, 0.1).unwrap();
    let inst = gaussian_instance(&model, 20, AmplitudeLaw::Gaussian, 5).unwrap();
    let r = recover(&inst, &WeightScheme::uniform(40), &RecoveryOptions::default()).unwrap();
    let mut expected = String::from("index,x_hat\n");
    for (i, v) in r.x_hat.iter().enumerate() {
        expected.push_str(&format!("{i},{v}\n"));
    }
    assert_eq!(String::from_utf8(read(out, "x_hat.csv")).unwrap(), expected);
}

#[test]
fn threshold_sweep_rows_and_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let args = ["threshold", "--delta", "0.75", "--p2", "0.1", "--gamma1", "0.5", "--w2-range", "1:3:0.1", "--out"];
    assert_eq!(wl1(&[&args[..], &[a.to_str().unwrap()]].concat()), 0);
    let csv = String::from_utf8(read(&a, "threshold.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);
    assert_eq!(csv.lines().nth(11).unwrap().split(',').next().unwrap(), "2");

    let b = tmp.path().join("b");
    let manifest = a.join("manifest.json");
    assert_eq!(wl1(&["replay", manifest.to_str().unwrap(), "--out", b.to_str().unwrap(), "--threads", "1"]), 0);
    assert_eq!(read(&a, "threshold.csv"), read(&b, "threshold.csv"));
}

#[test]
fn degenerate_threshold_sweep_is_unweighted_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    assert_eq!(wl1(&["threshold", "--delta", "0.5", "--p2", "0.05", "--gamma1", "0.5", "--w2-range", "1:1:1", "--out", out.to_str().unwrap()]), 0);
    let csv = String::from_utf8(read(out, "threshold.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 2);
    let t: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    let direct = weighted_l1::exponents::threshold_p1(0.5, 0.05, 0.5, 0.5, 1.0).unwrap();
    assert_eq!(t, direct);
}

#[test]
fn simulate_validation_and_plan_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    let o = out.to_str().unwrap();
    let base = ["simulate", "--n", "40", "--n1", "20", "--m", "20", "--p2", "0.05", "--trials", "3", "--out", o];
    assert_eq!(wl1(&[&base[..], &["--p1-values", "", "--w2-values", "1,2"]].concat()), 2);
    assert_eq!(wl1(&[&base[..], &["--p1-values", "0.1,0.2", "--w2-values", "1,2", "--plot", "--theory"]].concat()), 0);
    let csv = String::from_utf8(read(&out, "curve.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "P1,W2,trials,successes,rate,ci_lo,ci_hi");
    assert_eq!(csv.lines().count(), 5);
    assert!(out.join("curve.svg").exists() && out.join("theory.csv").exists());

    // the written manifest doubles as a plan file
    let again = tmp.path().join("again");
    let manifest = out.join("manifest.json");
    assert_eq!(wl1(&["simulate", "--plan", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]), 0);
    assert_eq!(read(&out, "curve.csv"), read(&again, "curve.csv"));
}

#[test]
fn weights_surface_and_angles_write_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let s = tmp.path().join("surface");
    assert_eq!(wl1(&["surface", "--delta", "0.5", "--gamma1", "0.5", "--p1", "0.2", "--p2", "0.05", "--w2", "2", "--grid", "30", "--out", s.to_str().unwrap()]), 0);
    assert!(String::from_utf8(read(&s, "surface.csv")).unwrap().starts_with("t1p,t2p,psi_com,psi_int,psi_ext,psi_total\n"));
    let a = tmp.path().join("angles");
    assert_eq!(wl1(&["angles", "--n1", "10", "--n2", "10", "--w2", "2", "--k1", "2", "--k2", "1", "--format", "json", "--out", a.to_str().unwrap()]), 0);
    let rows: serde_json::Value = serde_json::from_slice(&read(&a, "angles.json")).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 9 * 10);
    assert_eq!(wl1(&["weights", "--delta", "0.5", "--p2", "0.05", "--gamma1", "0.5", "--w-min", "2", "--w-max", "1", "--out", tmp.path().join("w").to_str().unwrap()]), 2);
}
