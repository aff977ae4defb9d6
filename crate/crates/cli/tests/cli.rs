use std::path::Path;
use std::process::{Command, Output};

fn chemrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chemrep")).args(args).output().expect("spawn chemrep")
}

fn series(dir: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(dir.join("series.csv")).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        chemrep_cli::run::SERIES_HEADER.to_vec()
    );
    r.records().map(Result::unwrap).collect()
}

#[test]
fn constant_run_keeps_mass() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("const");
    let o = chemrep(&[
        "run", "--scheme", "US0", "--ic", "constant:2:1", "--nx", "4", "--ny", "4", "--steps", "10",
        "--dt", "1e-2", "--out-dir", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = series(&out);
    assert_eq!(rows.len(), 11);
    assert_eq!(&rows[0][5], "", "no residual for the initial state");
    let m0: f64 = rows[0][2].parse().unwrap();
    assert!((m0 - 8.0).abs() < 1e-12);
    for r in &rows[1..] {
        let m: f64 = r[2].parse().unwrap();
        assert!((m - m0).abs() <= 1e-12 * m0, "mass {m}");
        assert!(!r[5].is_empty());
    }
}

#[test]
fn output_every_thins_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("thin");
    let o = chemrep(&[
        "run", "--nx", "4", "--ny", "4", "--steps", "7", "--output-every", "3", "--track-re", "false",
        "--out-dir", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let steps: Vec<String> = series(&out).iter().map(|r| r[0].to_string()).collect();
    assert_eq!(steps, ["0", "3", "6", "7"]);
}

#[test]
fn sweep_two_by_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let o = chemrep(&[
        "sweep", "--schemes", "UVEPS,USEPS", "--ps", "1.2,1.8", "--nx", "4", "--ny", "4", "--steps", "3",
        "--out-dir", out.to_str().unwrap(), "--jobs", "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dirs: Vec<_> = std::fs::read_dir(&out).unwrap().filter_map(|e| e.ok()).filter(|e| e.path().is_dir()).collect();
    assert_eq!(dirs.len(), 4);
    let mut r = csv::Reader::from_path(out.join("manifest.csv")).unwrap();
    let rows: Vec<_> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    let mut combos = Vec::new();
    for row in &rows {
        assert_eq!(&row[5], "ok");
        assert_eq!(&row[6], "3");
        assert!(out.join(&row[4]).join("series.csv").is_file());
        combos.push((row[1].to_string(), row[2].to_string()));
    }
    combos.sort();
    assert_eq!(
        combos,
        [("USEPS", "1.2"), ("USEPS", "1.8"), ("UVEPS", "1.2"), ("UVEPS", "1.8")]
            .map(|(a, b)| (a.to_string(), b.to_string()))
    );
}

#[test]
fn sweep_records_failures_and_continues() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    // One Picard iteration cannot meet a 1e-14 tolerance for the nonlinear schemes.
    let o = chemrep(&[
        "sweep", "--schemes", "UV,USEPS", "--nx", "4", "--ny", "4", "--steps", "2", "--picard-max", "1",
        "--picard-tol", "1e-14", "--ic", "cosine", "--out-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let mut r = csv::Reader::from_path(out.join("manifest.csv")).unwrap();
    let rows: Vec<_> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|row| &row[5] == "failed" && &row[7] == "2"));
    assert!(out.join(&rows[0][4]).join("series.csv").is_file());
}

#[test]
fn echo_reproduces_series_bitwise() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let o = chemrep(&[
        "run", "--scheme", "UVEPS", "--ic", "cosine", "--nx", "6", "--ny", "6", "--steps", "5",
        "--out-dir", a.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = tmp.path().join("b");
    let o = chemrep(&["run", "--config", a.join("config.echo").to_str().unwrap(), "--out-dir", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sa = std::fs::read(a.join("series.csv")).unwrap();
    let sb = std::fs::read(b.join("series.csv")).unwrap();
    assert_eq!(sa, sb);
}

#[test]
fn echo_lists_every_key() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("e");
    let o = chemrep(&["run", "--nx", "2", "--ny", "2", "--steps", "1", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success());
    let echo = std::fs::read_to_string(out.join("config.echo")).unwrap();
    for key in chemrep_cli::config::KEYS {
        assert!(echo.lines().any(|l| l.starts_with(&format!("{key} = "))), "missing {key}");
    }
}

#[test]
fn dump_writes_vtk() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("s.vtk");
    let o = chemrep(&[
        "dump", "--scheme", "USEPS", "--nx", "1", "--ny", "1", "--step", "1", "--output", path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# vtk DataFile"));
    assert!(lines.contains(&"DATASET UNSTRUCTURED_GRID"));
    assert!(lines.contains(&"POINTS 4 double"));
    assert!(lines.contains(&"CELLS 2 8"));
    assert!(lines.contains(&"CELL_TYPES 2"));
    assert_eq!(lines.iter().filter(|l| **l == "5").count(), 2);
    assert!(lines.contains(&"POINT_DATA 4"));
    assert!(lines.contains(&"SCALARS u double 1"));
    assert!(lines.contains(&"SCALARS v double 1"));
    assert!(lines.contains(&"VECTORS sigma double"));
}

#[test]
fn bad_config_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "p = 2.5\n").unwrap();
    let o = chemrep(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    std::fs::write(&cfg, "flavour = mint\n").unwrap();
    assert_eq!(chemrep(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(chemrep(&["run", "--dt", "-1"]).status.code(), Some(3));
    assert_eq!(chemrep(&["run", "--config", "/nonexistent/x.cfg"]).status.code(), Some(3));
}

#[test]
fn flags_override_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.cfg");
    std::fs::write(&cfg, "# base\nscheme = UV\nnx = 3\nny = 3\nsteps = 2\n").unwrap();
    let out = tmp.path().join("o");
    let o = chemrep(&["run", "--config", cfg.to_str().unwrap(), "--steps", "1", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let echo = std::fs::read_to_string(out.join("config.echo")).unwrap();
    assert!(echo.contains("scheme = UV\n") && echo.contains("steps = 1\n") && echo.contains("nx = 3\n"));
    assert_eq!(series(&out).len(), 2);
}

#[test]
fn verify_fast_passes() {
    let o = chemrep(&["verify", "fast"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("PASS criterion 1")));
    assert!(!stdout.contains("FAIL"));
}

fn column(dir: &Path, name: &str) -> Vec<f64> {
    let idx = chemrep_cli::run::SERIES_HEADER.iter().position(|h| *h == name).unwrap();
    series(dir).iter().filter(|r| !r[idx].is_empty()).map(|r| r[idx].parse().unwrap()).collect()
}

#[test]
fn smaller_eps_undershoots_less() {
    let tmp = tempfile::tempdir().unwrap();
    let mut lowest = Vec::new();
    for eps in ["1e-3", "1e-5"] {
        let out = tmp.path().join(eps);
        let o = chemrep(&[
            "run", "--scheme", "UVEPS", "--ic", "gauss", "--eps", eps, "--steps", "60", "--track-re", "false",
            "--out-dir", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        lowest.push(column(&out, "min_u").into_iter().fold(f64::INFINITY, f64::min));
    }
    assert!(lowest[0] < 0.0 && lowest[1].abs() < lowest[0].abs(), "{lowest:?}");
}

#[test]
fn us0_cosine_residual_nonpositive() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("c");
    let o = chemrep(&[
        "run", "--scheme", "US0", "--ic", "cosine", "--dt", "1e-5", "--steps", "40", "--out-dir", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let re = column(&out, "residual_RE");
    assert_eq!(re.len(), 40);
    assert!(re.iter().all(|&r| r <= 0.0), "{re:?}");
}
