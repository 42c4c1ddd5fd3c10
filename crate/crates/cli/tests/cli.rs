use std::fs;
use std::process::{Command, Output};

fn rabiq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rabiq"))
        .args(args)
        .env_remove("RABIQ_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "stderr: {}", stderr(o));
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn csv_column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(col).unwrap().to_string())
        .collect()
}

#[test]
fn solve_decoupled_vacuum() {
    let v = json(&rabiq(&[
        "solve", "--omega", "0.001", "--g1", "0", "--g2", "0",
    ]));
    assert!((v["energy"].as_f64().unwrap() + 0.5).abs() < 1e-10);
    assert!((v["sigma_x"].as_f64().unwrap() + 1.0).abs() < 1e-10);
}

#[test]
fn solve_broken_phase_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("deep/point.json");
    let o = rabiq(&[
        "solve",
        "--omega",
        "0.001",
        "--g1",
        "1.5gs",
        "--g2",
        "1e-10gt",
        "--json-out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["sigma_z"].as_f64().unwrap() < -0.5);
}

#[test]
fn collapse_is_a_validation_error() {
    let o = rabiq(&["solve", "--omega", "0.1", "--g2", "0.06"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("spectral collapse"), "{}", stderr(&o));
}

#[test]
fn bad_flag_is_usage_error() {
    let o = rabiq(&["solve", "--omega", "abc"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lowfreq_boundary_points() {
    let o = rabiq(&[
        "boundary",
        "--kind",
        "lowfreq",
        "--omega",
        "0.001",
        "--range",
        "0:0.99:100",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let g1 = csv_column(&stdout(&o), "g1");
    assert_eq!(g1.len(), 100);
    // zero two-photon coupling sits at the single-photon scale
    let gs = 0.001f64.sqrt() / 2.0;
    assert!((g1[0].parse::<f64>().unwrap() - gs).abs() < 1e-12);
}

#[test]
fn boundary_ii_magnitude_and_domain() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ii.csv");
    let o = rabiq(&[
        "boundary",
        "--kind",
        "II",
        "--omega",
        "0.1",
        "--range",
        "1.1:2.0:10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let g1 = csv_column(&text, "g1");
    let g2 = csv_column(&text, "g2_tilde");
    let (gs, gt) = (0.1f64.sqrt() / 2.0, 0.05);
    let i = g1
        .iter()
        .position(|v| (v.parse::<f64>().unwrap() / gs - 1.5).abs() < 1e-9)
        .unwrap();
    let at_1_5 = g2[i].parse::<f64>().unwrap() / gt;
    assert!(at_1_5 > 1e-4 && at_1_5 < 4e-4, "{at_1_5}");

    let o = rabiq(&[
        "boundary",
        "--kind",
        "II",
        "--omega",
        "0.1",
        "--range",
        "0.5:0.9:5",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_output_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str, name: &str| {
        let out = dir.path().join(name);
        let o = rabiq(&[
            "sweep",
            "--axis1",
            "g1=0:2:9:gs",
            "--axis2",
            "g2_tilde=-0.5:0.5:5:gt",
            "--omega",
            "0.01",
            "--jobs",
            jobs,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("8", "b.csv");
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 1 + 9 * 5);
}

#[test]
fn sweep_from_config_with_panel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let csv = dir.path().join("line.csv");
    fs::write(
        &cfg,
        format!(
            r#"
[axis1]
name = "g1"
min = 0.0
max = 2.0
n_points = 7
unit = "gs"

[fixed]
omega = 0.01
g2 = "0gt"

[output]
csv = {:?}
"#,
            csv.display().to_string()
        ),
    )
    .unwrap();
    let o = rabiq(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--svg",
        &format!("sigma_z={}", dir.path().join("line.svg").display()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 8);
    assert!(dir.path().join("line.svg").exists());
}

#[test]
fn wavefunction_vacuum_profile() {
    let o = rabiq(&["wavefunction", "--omega", "1", "--grid", "-6:6:121"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let xs: Vec<f64> = csv_column(&text, "x")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    let rho: Vec<f64> = csv_column(&text, "density")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(xs.len(), 121);
    let norm: f64 = rho.iter().sum::<f64>() * (xs[1] - xs[0]);
    assert!((norm - 1.0).abs() < 1e-4, "{norm}");
    assert!(rho[60] > rho[0]);
}

#[test]
fn classify_double_well() {
    // just past the first transition at omega = 0.1 the density has two peaks
    let v = json(&rabiq(&[
        "classify", "--omega", "0.1", "--g1", "1.34gs", "--g2", "1e-8gt",
    ]));
    assert_eq!(v["label"], "double");
}

#[test]
fn unknown_figure_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = rabiq(&[
        "reproduce",
        "--figure",
        "9z",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reproduce_density_cuts() {
    let dir = tempfile::tempdir().unwrap();
    let o = rabiq(&[
        "reproduce",
        "--figure",
        "1f",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "fig1f_zero.csv",
        "fig1f_plus.csv",
        "fig1f_minus.csv",
        "fig1f.svg",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}
