use std::path::Path;
use std::process::{Command, Output};

fn adsdirac(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adsdirac"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

/// Header and rows of a CSV file, after checking the manifest line.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let manifest = lines.next().unwrap();
    assert!(manifest.starts_with("# manifest ") && manifest.len() == "# manifest ".len() + 64, "{manifest}");
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("missing column {name}"))
}

#[test]
fn spectrum_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let o = adsdirac(&["spectrum", "--M", "0.25", "--Lambda", "3", "--bc", "mit", "--two-l-max", "5", "--n", "128"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("spectrum.csv"));
    assert_eq!(header, ["two_l", "two_n_multiplicity", "eig_index", "lambda", "residual", "n_nodes", "converged"]);
    for two_l in ["1", "3", "5"] {
        let mode: Vec<_> = rows.iter().filter(|r| r[0] == two_l).collect();
        assert!(mode.len() >= 5, "2l = {two_l}: {} rows", mode.len());
        for r in mode {
            assert!(r[4].parse::<f64>().unwrap() < 1e-8);
        }
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["meta"]["params"]["regime"], "light");
    assert!(dir.path().join("spectrum.manifest.json").exists());
}

#[test]
fn outputs_are_bit_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["spectrum", "--M", "0.25", "--Lambda", "3", "--bc", "aps", "--two-l-max", "3"];
    assert_eq!(adsdirac(&args, a.path()).status.code(), Some(0));
    assert_eq!(adsdirac(&args, b.path()).status.code(), Some(0));
    for f in ["spectrum.csv", "spectrum.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_document_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"Lambda": 3, "M": 0.75, "bc": "mit", "two_l_max": 1}"#).unwrap();
    // Heavy mass with a light-regime condition is a regime error ...
    let o = adsdirac(&["spectrum", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    // ... fixed by overriding the boundary condition from the command line.
    let o = adsdirac(&["spectrum", "--config", cfg.to_str().unwrap(), "--bc", "dirichlet"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["bc"], "dirichlet");
    assert_eq!(json["meta"]["params"]["regime"], "heavy");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = adsdirac(&["spectrum", "--bc", "dirichlet", "--M", "0.25", "--Lambda", "3"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Lambda/12"));
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(adsdirac(&["spectrum", "--config", empty.to_str().unwrap()], dir.path()).status.code(), Some(2));
    std::fs::write(&empty, "{}").unwrap();
    assert_eq!(adsdirac(&["spectrum", "--config", empty.to_str().unwrap()], dir.path()).status.code(), Some(2));
    std::fs::write(&empty, r#"{"mass": 1}"#).unwrap();
    assert_eq!(adsdirac(&["spectrum", "--config", empty.to_str().unwrap()], dir.path()).status.code(), Some(2));
    let o = adsdirac(&["spectrum", "--M", "0.25", "--Lambda", "3", "--bc", "mit", "--two-l-max", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(adsdirac(&["kg", "--alpha", "1,abc"], dir.path()).status.code(), Some(2));
    assert_eq!(adsdirac(&["kg", "--alpha", "2.5"], dir.path()).status.code(), Some(3));
    assert_eq!(adsdirac(&["selftest", "bogus"], dir.path()).status.code(), Some(2));
}

#[test]
fn evolve_conserves_charge() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["evolve", "--M", "0.25", "--Lambda", "3", "--bc", "mit", "--two-l-max", "3"];
    let o = adsdirac(&[&base[..], &["--times", "0,0.5,1,2.5,7"]].concat(), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("evolve.csv"));
    assert_eq!(header, ["t", "charge", "chiral_observable", "cesaro_running_average"]);
    let q: Vec<f64> = rows.iter().map(|r| r[col(&header, "charge")].parse().unwrap()).collect();
    assert!(q.iter().all(|v| (v - q[0]).abs() < 1e-12 * q[0]), "{q:?}");
    let o = adsdirac(&[&base[..], &["--times", "0.3"]].concat(), dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read_csv(&dir.path().join("evolve.csv")).1.len(), 1);
}

#[test]
fn equipartition_decays_like_one_over_t() {
    let dir = tempfile::tempdir().unwrap();
    let o = adsdirac(
        &["equipartition", "--M", "0.25", "--Lambda", "3", "--bc", "mit", "--horizons", "10,100,1000"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("equipartition.csv"));
    for r in &rows {
        let avg: f64 = r[col(&header, "cesaro_average")].parse().unwrap();
        let bound: f64 = r[col(&header, "bound")].parse().unwrap();
        assert!(avg.abs() <= bound);
    }
}

#[test]
fn causal_compare_writes_discrepancies() {
    let dir = tempfile::tempdir().unwrap();
    let o = adsdirac(
        &[
            "causal-compare", "--M", "0.25", "--Lambda", "3", "--bc", "mit", "--bc-b", "chiral", "--n", "128",
            "--n-eigs", "60", "--width", "0.2", "--rho0", "0.5", "--times", "0,0.2",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("causal-compare.csv"));
    assert_eq!(header, ["t", "rho_max", "inside", "outside", "reconstruction_error"]);
    assert_eq!(rows.len(), 2);
    // Beyond the data support the region check refuses to run.
    let o = adsdirac(
        &["causal-compare", "--M", "0.25", "--Lambda", "3", "--bc", "mit", "--bc-b", "chiral", "--n", "128",
          "--n-eigs", "60", "--width", "0.2", "--rho0", "0.5", "--times", "1.2"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kg_threshold_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = adsdirac(&["kg", "--alpha", "0.5,1,1.2,1.3,1.6,2,2.2", "--l", "0,1,2", "--theta", "0,0.8,1.6"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("kg.csv"));
    assert_eq!(&header[..3], ["alpha", "l", "classification"]);
    assert_eq!(header.len(), 7 + 3);
    for r in &rows {
        let alpha: f64 = r[0].parse().unwrap();
        let l: u32 = r[1].parse().unwrap();
        let expect = if l == 0 || alpha > 1.25 { "limit_circle" } else { "limit_point" };
        assert_eq!(r[2], expect, "{r:?}");
        let lowest: Vec<f64> = r[7..].iter().map(|v| v.parse().unwrap()).collect();
        if alpha > 1.25 {
            assert!(lowest[0] - lowest[2] > 1e-2, "{r:?}");
        } else {
            assert!(lowest.iter().all(|&v| v == lowest[0]));
        }
    }
}

#[test]
fn selftest_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["harmonics", "green"] {
        let o = adsdirac(&["selftest", suite], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
        assert!(String::from_utf8_lossy(&o.stdout).lines().all(|l| l.starts_with("PASS")));
    }
}
