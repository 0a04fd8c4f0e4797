use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bellphase(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellphase"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RUST_BACKTRACE")
        .output()
        .unwrap()
}

fn ok(args: &[&str], out: &Path) {
    let o = bellphase(args, out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn table(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    (
        header,
        lines.map(|l| l.split(',').map(str::to_string).collect()).collect(),
    )
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn analytic_curves() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["analytic"], dir.path());
    let (header, rows) = table(&dir.path().join("analytic.csv"));
    assert_eq!(header, "gamma_rad,s_no_adjust,s_polar_max,s_azimuthal_max");
    assert_eq!(rows.len(), 25);
    assert_eq!(num(&rows[0][0]), 0.0);
    assert!((num(&rows[0][1]) - 2.0 * SQRT_2).abs() < 1e-12);
    for r in &rows {
        let (no, polar, az) = (num(&r[1]), num(&r[2]), num(&r[3]));
        assert!(no <= polar + 1e-12 && polar <= az + 1e-12);
        assert_eq!(az, 2.0 * SQRT_2);
    }
}

#[test]
fn surface_maximum_at_quarter_turn() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["surface", "--set", "gamma=90deg"], dir.path());
    let (header, rows) = table(&dir.path().join("surface.csv"));
    assert_eq!(header, "beta1_rad,beta1p_rad,s");
    assert_eq!(rows.len(), 180 * 180);
    let max = rows.iter().map(|r| num(&r[2])).fold(f64::MIN, f64::max);
    assert!((max - 2.0).abs() < 1e-3, "{max}");
    let m = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(m.contains(&format!("gamma = {FRAC_PI_2}")), "{m}");
}

#[test]
fn empty_gamma_list_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["analytic", "scan-polar", "scan-azimuthal"] {
        let o = bellphase(&[cmd, "--set", "gammas="], dir.path());
        assert!(!o.status.success());
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains("`gammas`"), "{err}");
    }
    assert!(!dir.path().join("manifest.txt").exists());
}

#[test]
fn invalid_fields_are_named() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, kv, name) in [
        ("simulate", "visibility=2", "visibility"),
        ("beam-block", "blocked_path=III", "blocked_path"),
        ("scan-polar", "delta_grid=0, 1", "delta_grid"),
        ("surface", "gammas=0", "gammas"),
        ("scan-azimuthal", "sampling=gaussian", "sampling"),
    ] {
        let o = bellphase(&[cmd, "--set", kv], dir.path());
        assert!(!o.status.success(), "{cmd} {kv}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(name), "{cmd} {kv}: {err}");
    }
}

#[test]
fn config_file_and_units() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.cfg");
    fs::write(
        &cfg,
        "# small scan\nvisibility = 0.9\ndyn_offset = 10 deg\ngammas = 0, 0.5pi, 3.141592653589793rad\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(
        &["scan-azimuthal", "--config", cfg.to_str().unwrap(), "--seed", "4"],
        &out,
    );
    let (_, rows) = table(&out.join("scan_azimuthal.csv"));
    assert_eq!(rows.len(), 6);
    let counts: Vec<_> = rows.iter().filter(|r| r[6] == "counts").collect();
    assert_eq!(counts.len(), 3);
    for r in counts {
        let (s, sigma) = (num(&r[4]), num(&r[5]));
        assert!((s - 0.9 * 2.0 * SQRT_2).abs() < 4.0 * sigma, "{r:?}");
    }
    let (_, un) = table(&out.join("scan_azimuthal_unadjusted.csv"));
    assert_eq!(un.len(), 6);
    let m = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(m.contains("seed = 4\n") && m.contains("visibility = 0.9\n"), "{m}");
}

#[test]
fn reruns_are_byte_identical_and_manifest_replays() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let args = [
        "scan-polar",
        "--seed",
        "11",
        "--set",
        "gammas=0, 1, 2",
        "--set",
        "visibility=0.8",
    ];
    ok(&args, &a);
    ok(&args, &b);
    let manifest = a.join("manifest.txt");
    ok(&["run", manifest.to_str().unwrap()], &c);
    let first = fs::read(a.join("scan_polar.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("scan_polar.csv")).unwrap());
    assert_eq!(first, fs::read(c.join("scan_polar.csv")).unwrap());
    assert_eq!(fs::read(&manifest).unwrap(), fs::read(c.join("manifest.txt")).unwrap());
    assert!(!first.contains(&b'\r'));

    let d = dir.path().join("d");
    ok(&["run", manifest.to_str().unwrap(), "--seed", "12"], &d);
    assert_ne!(first, fs::read(d.join("scan_polar.csv")).unwrap());
}

#[test]
fn simulate_and_beam_block_write_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &["simulate", "--set", "flipper_on=false", "--set", "sampling=expected"],
        dir.path(),
    );
    let (header, rows) = table(&dir.path().join("interferogram.csv"));
    assert_eq!(header, "chi_rad,counts");
    assert_eq!(rows.len(), 32);
    let meta = fs::read_to_string(dir.path().join("interferogram.csv.meta")).unwrap();
    assert!(meta.contains("flipper_on = false"), "{meta}");

    ok(&["beam-block", "--set", "blocked_path=I"], dir.path());
    let (header, rows) = table(&dir.path().join("beam_block.csv"));
    assert_eq!(header, "delta_rad,counts");
    assert_eq!(rows.len(), 16);
    let meta = fs::read_to_string(dir.path().join("beam_block.csv.meta")).unwrap();
    assert!(meta.contains("blocked_path = I\n"), "{meta}");
    let m = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(m.starts_with("kind = beam-block\n"), "{m}");
}
