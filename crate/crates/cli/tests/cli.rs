use std::fs;
use std::path::Path;

use isosceles::section::OrbitRecord;
use isosceles_cli::run;

fn go(dir: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["isosceles", "--out", dir.to_str().unwrap()];
    argv.extend_from_slice(args);
    run(argv)
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(run(["isosceles", "hill", "--no-such-flag"]), 2);
    assert_eq!(run(["isosceles", "frobnicate"]), 2);
}

#[test]
fn outside_domain_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(go(d.path(), &["hill", "--beta", "0.9", "--eps", "0.9"]), 2);
    assert_eq!(go(d.path(), &["euler", "--beta-frac", "1/0"]), 2);
}

#[test]
fn unwritable_directory() {
    let d = tempfile::tempdir().unwrap();
    let f = d.path().join("file");
    fs::write(&f, "x").unwrap();
    assert_eq!(go(&f.join("sub"), &["hill"]), 2);
}

#[test]
fn euler_resonant_fraction() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(go(d.path(), &["euler", "--beta-frac", "5/28", "--eps", "0"]), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("euler.json")).unwrap()).unwrap();
    assert!((v["rho_e"].as_f64().unwrap() - 2.5).abs() < 1e-9);
    let csv = fs::read_to_string(d.path().join("euler_orbit.csv")).unwrap();
    assert!(csv.starts_with("t,p_r,p_z,r,z,H_err\n"));
    for line in csv.lines().skip(1) {
        let h: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(h.abs() < 1e-9);
    }
}

#[test]
fn return_map_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["return-map", "--orbits", "4", "--iters", "30"];
    assert_eq!(go(a.path(), &args), 0);
    assert_eq!(go(b.path(), &args), 0);
    let x = fs::read(a.path().join("return_map.csv")).unwrap();
    let y = fs::read(b.path().join("return_map.csv")).unwrap();
    assert_eq!(x, y);
    assert_eq!(String::from_utf8(x).unwrap().lines().count(), 1 + 4 * 31);
}

#[test]
fn harvest_records_round_trip() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(go(d.path(), &["harvest", "--n-max", "4"]), 0);
    let body = fs::read_to_string(d.path().join("harvest.jsonl")).unwrap();
    let recs: Vec<OrbitRecord> = body.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!recs.is_empty());
    for r in &recs {
        assert!(r.period > 0.0);
        assert!(r.link_euler >= 1);
    }
    let counts = fs::read_to_string(d.path().join("harvest_counts.csv")).unwrap();
    assert_eq!(counts.lines().next(), Some("n,count"));
}

#[test]
fn convexity_curve_endpoints() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(go(d.path(), &["convexity", "--curve", "--n", "21"]), 0);
    let body = fs::read_to_string(d.path().join("convexity_curve.csv")).unwrap();
    let rows: Vec<Vec<&str>> = body.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 21);
    let f = |s: &str| s.parse::<f64>().unwrap();
    let e0 = (7.0 + 17f64.sqrt()) / 16.0;
    assert!(f(rows[0][0]).abs() < 1e-12 && (f(rows[0][1]) - e0).abs() < 1e-12);
    assert!((f(rows[20][0]) - 1.0).abs() < 1e-12 && f(rows[20][1]).abs() < 1e-12);
    for w in rows.windows(2) {
        assert!(f(w[1][1]) < f(w[0][1]));
    }
}

#[test]
fn svg_only_on_request() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(go(d.path(), &["hill"]), 0);
    assert!(!d.path().join("hill_region.svg").exists());
    assert_eq!(go(d.path(), &["--svg", "hill"]), 0);
    let s = fs::read_to_string(d.path().join("hill_region.svg")).unwrap();
    assert!(s.starts_with("<svg"));
}

#[test]
fn floats_carry_seventeen_digits() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(go(d.path(), &["hitting-time", "--n", "3"]), 0);
    let body = fs::read_to_string(d.path().join("t_infinity.csv")).unwrap();
    let cell = body.lines().nth(1).unwrap().split(',').nth(2).unwrap();
    let mantissa = cell.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn verify_single_criterion() {
    assert_eq!(run(["isosceles", "verify", "--only", "1"]), 0);
    assert_eq!(run(["isosceles", "verify", "--only", "15"]), 2);
}
