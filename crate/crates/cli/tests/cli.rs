use std::path::Path;
use std::process::{Command, Output};

fn qfsk(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfsk-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("QFSK_LAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn search_reports_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = qfsk(&["search", "--nu", "2", "--m", "3", "--out", "s.json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("(1, b, 1, a)   11    21    1305"), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "s.json")).unwrap();
    assert_eq!(report["d_min"], 11);
    assert_eq!(report["best"], "1,b,1,a");
    assert!(read(dir.path(), "s.txt").contains("1305"));

    let o = qfsk(&["search", "--nu", "4", "--m", "0"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("9     6     378"), "{}", stdout(&o));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = qfsk(&["search", "--nu", "2", "--m", "3", "--dtilde", "5"], p);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("increase dtilde"));
    let o = qfsk(&["search", "--nu", "2", "--m", "3", "--g1", "1,q", "--g2", "1,1"], p);
    assert_eq!(o.status.code(), Some(2));
    let o = qfsk(&["fer", "--nu", "2", "--K", "8", "--grid", "3", "--out", "f.csv"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
    let o = qfsk(&["rcu", "--n", "40", "--K", "8", "--grid", "3", "--out", "r.csv"], p);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(p.join("file"), "").unwrap();
    let o = qfsk(&["fer", "--nu", "2", "--K", "8", "--grid", "3", "--seed", "1", "--out", "file/f.csv"], p);
    assert_eq!(o.status.code(), Some(4));
    let o = qfsk(&["fer", "--nu", "2", "--K", "8", "--grid", "3:1:1", "--seed", "1", "--out", "f.csv"], p);
    assert_eq!(o.status.code(), Some(2));
    let o = qfsk(&["frobnicate"], p);
    assert_eq!(o.status.code(), Some(2));
}

const CAMPAIGN: &str = r#"{
  "code": { "K": 16, "nu": 2, "g1": "1,1,1", "g2": "1,a,1", "m": 2, "g": "1,b,1" },
  "decoder": { "max_list": 64 },
  "sweep": { "grid_db": [1.0, 2.0, 3.0], "stop": { "min_frame_errors": 30, "max_frames": 3000 } },
  "bounds": { "e0_samples": 20000, "omega_samples": 20000, "capacity_samples": 100000 },
  "output": { "fer": "fer.csv", "rcu": "rcu.csv", "normal": "normal.csv" },
  "seed": 11,
  "workers": 2
}"#;

#[test]
fn campaign_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("c.json"), CAMPAIGN).unwrap();
    let mut first = Vec::new();
    for cmd in ["fer", "rcu", "normal"] {
        let o = qfsk(&[cmd, "--campaign", "c.json"], p);
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
        assert_eq!(stdout(&o).lines().count(), 3, "one summary line per grid point");
        first.push(read(p, &format!("{cmd}.csv")));
        let manifest: serde_json::Value = serde_json::from_str(&read(p, &format!("{cmd}.manifest.json"))).unwrap();
        assert_eq!(manifest["seed"], 11);
        assert_eq!(manifest["command"], cmd);
    }
    for (cmd, before) in ["fer", "rcu", "normal"].iter().zip(&first) {
        let o = qfsk(&[cmd, "--campaign", "c.json"], p);
        assert!(o.status.success());
        assert_eq!(&read(p, &format!("{cmd}.csv")), before, "{cmd} output changed between runs");
        assert!(before.starts_with(&format!("# qfsk-lab {cmd} --campaign c.json\n# seed 11 workers 2\n")));
    }
    let column = |text: &str| -> Vec<String> {
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').next().unwrap().to_string())
            .collect()
    };
    assert_eq!(column(&first[1]), column(&first[2]), "rcu and normal rows are aligned");
    assert_eq!(column(&first[0]), column(&first[1]));

    let mid: f64 = first[1].lines().filter(|l| !l.starts_with('#')).nth(2).unwrap().split(',').nth(7).unwrap().parse().unwrap();
    let target = format!("{mid:e}");
    let o = qfsk(&["gap", "--curve", "rcu.csv", "--bound", "rcu.csv", "--fer", &target, "--out", "g.csv"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let gap: f64 = read(p, "g.csv").lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(gap, 0.0, "{}", read(p, "g.csv"));
}

#[test]
fn flags_override_campaign_and_env_sets_workers() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("c.json"), CAMPAIGN).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qfsk-lab"))
        .args(["fer", "--campaign", "c.json", "--seed", "5", "--grid", "2", "--out", "x.csv"])
        .current_dir(p)
        .env("QFSK_LAB_WORKERS", "3")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value = serde_json::from_str(&read(p, "x.manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["workers"], 3);
    assert_eq!(manifest["config"]["ebno_grid_db"], serde_json::json!([2.0]));
}

#[test]
fn campaign_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let bad = CAMPAIGN.replace("\"seed\": 11", "\"seed\": 11, \"sede\": 3");
    std::fs::write(p.join("c.json"), bad).unwrap();
    let o = qfsk(&["fer", "--campaign", "c.json"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sede"), "{}", stderr(&o));
    assert!(!p.join("fer.csv").exists(), "nothing computed before validation");
}

#[test]
fn rate_above_capacity_saturates_rcu() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = qfsk(
        &["rcu", "--n", "148", "--K", "64", "--grid", "-6", "--snr-ref", "esno", "--seed", "1", "--out", "r.csv"],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let row = read(p, "r.csv").lines().last().unwrap().to_string();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells[2], "below");
    assert!(cells[3].parse::<f64>().unwrap() < 0.0);
    assert!(cells[7].parse::<f64>().unwrap() > 0.99);
}

#[test]
fn spectrum_with_union_bound() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = qfsk(
        &[
            "spectrum", "--nu", "2", "--K", "64", "--dtilde", "10", "--out", "sp.json", "--grid", "6,8", "--seed", "4",
            "--p2-samples", "20000", "--union-out", "ub.csv",
        ],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("  6         6        381"), "{}", stdout(&o));
    let sp: serde_json::Value = serde_json::from_str(&read(p, "sp.json")).unwrap();
    assert_eq!(sp["n_c"][6], 381);
    let ub = read(p, "ub.csv");
    assert!(ub.contains("estimated union bound"));
    assert_eq!(ub.lines().filter(|l| !l.starts_with('#')).count(), 3);
}
