//! End-to-end runs of the `ctnoise` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ctnoise(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ctnoise"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("CTNOISE_THREADS", t),
        None => cmd.env_remove("CTNOISE_THREADS"),
    };
    cmd.output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn make_phantom(dir: &Path, seed: &str) -> PathBuf {
    make_sized_phantom(dir, seed, "128x128")
}

fn make_sized_phantom(dir: &Path, seed: &str, size: &str) -> PathBuf {
    let out = ctnoise(
        &["phantom", "--out", p(dir), "--size", size, "--sigma-high", "10", "--ratio", "9.6", "--seed", seed],
        None,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("manifest.json")
}

const GRID: &str = r#"{
  "filters": {
    "ad": {"iterations": [0, 10, 20], "kappa": [54]},
    "cdwt": {"threshold": [50, 100, 150, 200, 300]},
    "fde": {"noise_variance": [1e-9, 1e-7]},
    "mf": {"half_width": [1, 2]}
  },
  "betas": [0.1, 10]
}"#;

/// Two phantom pairs under one manifest.
fn two_pair_manifest(root: &Path) -> PathBuf {
    make_phantom(&root.join("p1"), "1");
    make_phantom(&root.join("p2"), "2");
    let entry = |d: &str, id: &str| {
        serde_json::json!({"id": id, "high": format!("{d}/high"), "low": format!("{d}/low"),
                           "roi": {"x": 0, "y": 0, "w": 128, "h": 128}})
    };
    let manifest = serde_json::json!({"pairs": [entry("p2", "b"), entry("p1", "a")]});
    let path = root.join("pairs.json");
    fs::write(&path, manifest.to_string()).unwrap();
    path
}

fn tree_bytes(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(tree_bytes(&path));
        } else {
            out.insert(path.clone(), fs::read(&path).unwrap());
        }
    }
    out
}

#[test]
fn phantom_writes_six_containers_and_is_repeatable() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    make_phantom(&a, "42");
    for name in ["high", "low", "groundtruth/clean", "groundtruth/noise_high", "groundtruth/noise_low", "groundtruth/roi_mask"] {
        assert!(a.join(format!("{name}.json")).is_file(), "{name}");
        assert_eq!(fs::metadata(a.join(format!("{name}.raw"))).unwrap().len(), 128 * 128 * 4);
    }
    let manifest: Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["pairs"][0]["id"], "phantom-42");
    let b = tmp.path().join("b");
    make_phantom(&b, "42");
    let strip = |m: BTreeMap<PathBuf, Vec<u8>>, root: &Path| -> Vec<(PathBuf, Vec<u8>)> {
        m.into_iter().map(|(k, v)| (k.strip_prefix(root).unwrap().to_path_buf(), v)).collect()
    };
    assert_eq!(strip(tree_bytes(&a), &a), strip(tree_bytes(&b), &b));
}

#[test]
fn phantom_usage_and_output_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("x");
    let base = ["phantom", "--out", p(&d), "--size", "64x64", "--sigma-high", "10", "--seed", "1"];
    let with = |extra: &[&str]| {
        let mut v = base.to_vec();
        v.extend_from_slice(extra);
        code(&ctnoise(&v, None))
    };
    assert_eq!(with(&["--ratio", "-1"]), 1);
    assert_eq!(with(&["--ratio", "2", "--signal", "disc"]), 1);
    assert_eq!(with(&["--ratio", "2", "--roi", "60,60,10,10"]), 1);
    assert_eq!(code(&ctnoise(&["phantom", "--out", p(&d), "--size", "64"], None)), 1);
    let blocker = tmp.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let out = ctnoise(
        &["phantom", "--out", p(&blocker.join("sub")), "--size", "64x64", "--sigma-high", "10", "--ratio", "2", "--seed", "1"],
        None,
    );
    assert_eq!(code(&out), 2);
    assert_eq!(code(&ctnoise(&["--help"], None)), 0);
    assert_eq!(code(&ctnoise(&["--version"], None)), 0);
    assert_eq!(code(&ctnoise(&[], None)), 1);
}

#[test]
fn estimate_outputs_and_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("ph");
    make_sized_phantom(&d, "42", "512x512");
    let (high, low) = (d.join("high"), d.join("low"));
    let run = |extra: &[&str]| {
        let mut v = vec!["estimate", "--high", p(&high), "--low", p(&low), "--roi", "192,192,128,128"];
        v.extend_from_slice(extra);
        ctnoise(&v, None)
    };

    let out = run(&["--filter", "none"]);
    assert_eq!(code(&out), 0);
    let est: Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = est["r_blind"].as_f64().unwrap();
    assert!((r / 9.6 - 1.0).abs() <= 0.05, "{r}");
    assert_eq!(est["r_the"].as_f64(), Some(9.6));
    assert_eq!(est["m"].as_f64(), Some(0.0));

    let out = run(&["--filter", "ad", "--params", "iterations=20,delta=0.2,kappa=54"]);
    assert_eq!(code(&out), 0);
    let est: Value = serde_json::from_slice(&out.stdout).unwrap();
    let betas: Vec<f64> = est["theta_by_beta"].as_array().unwrap().iter().map(|t| t["beta"].as_f64().unwrap()).collect();
    assert_eq!(betas, ctnoise::DEFAULT_BETAS);

    let out = run(&["--filter", "cdwt", "--params", "threshold=100", "--rthe", "5", "--betas", "1,2"]);
    let est: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(est["r_the"].as_f64(), Some(5.0));
    assert_eq!(est["theta_by_beta"].as_array().unwrap().len(), 2);

    assert_eq!(code(&run(&["--filter", "ad", "--params", "iterations=0"])), 3);
    assert_eq!(code(&run(&["--filter", "ad", "--params", "kappa=-3"])), 1);
    assert_eq!(code(&run(&["--filter", "wavelet"])), 1);
    let missing = ctnoise(
        &["estimate", "--high", p(&d.join("nope")), "--low", p(&low), "--roi", "0,0,8,8", "--filter", "none"],
        None,
    );
    assert_eq!(code(&missing), 2);
    let outside = ctnoise(
        &["estimate", "--high", p(&high), "--low", p(&low), "--roi", "500,500,64,64", "--filter", "none"],
        None,
    );
    assert_eq!(code(&outside), 2);
}

fn records(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.deserialize().map(|row| row.unwrap()).collect()
}

fn f(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-8 * b.abs().max(1e-12)
}

#[test]
fn sweep_outputs_match_independent_recompute() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = two_pair_manifest(tmp.path());
    let config = tmp.path().join("grid.json");
    fs::write(&config, GRID).unwrap();
    let inputs_before = tree_bytes(&tmp.path().join("p1"));

    let out_a = tmp.path().join("sa");
    let run = ctnoise(&["sweep", "--pairs", p(&manifest), "--config", p(&config), "--out", p(&out_a)], Some("2"));
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(tree_bytes(&tmp.path().join("p1")), inputs_before);

    // 3 ad + 5 cdwt + 2 fde + 2 mf + baseline, two pairs, two betas
    let rows = records(&out_a.join("records.csv"));
    assert_eq!(rows.len(), 13 * 2 * 2);
    assert_eq!(rows[0]["pair_id"], "a");
    assert!(rows.iter().filter(|r| r["status"] == "degenerate").all(|r| r["params"].starts_with("iterations=0")));
    assert_eq!(rows.iter().filter(|r| r["status"] == "degenerate").count(), 4);

    let optimal = records(&out_a.join("optimal.csv"));
    for beta in ["0.1", "10"] {
        assert!(optimal.iter().filter(|r| r["beta"] == beta).count() <= 6);
    }

    let summary: Value = serde_json::from_str(&fs::read_to_string(out_a.join("summary.json")).unwrap()).unwrap();
    for s in summary.as_array().unwrap() {
        let beta = s["beta"].as_f64().unwrap();
        let at: Vec<_> = rows.iter().filter(|r| f(r, "beta") == beta).collect();
        let base: Vec<_> = at.iter().filter(|r| r["filter"] == "none").collect();
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        let bt = mean(&base.iter().map(|r| f(r, "theta")).collect::<Vec<_>>());
        let bq = mean(&base.iter().map(|r| f(r, "ratio_of_ratios")).collect::<Vec<_>>());
        assert!(close(s["baseline_mean_theta"].as_f64().unwrap(), bt));
        assert!(close(s["baseline_mean_ratio"].as_f64().unwrap(), bq));

        for entry in s["filters"].as_array().unwrap() {
            let kind = entry["filter"].as_str().unwrap();
            let mut by_spec: BTreeMap<&str, Vec<&BTreeMap<String, String>>> = BTreeMap::new();
            for r in at.iter().filter(|r| r["filter"] == kind) {
                by_spec.entry(r["params"].as_str()).or_default().push(r);
            }
            let best = by_spec
                .values()
                .filter(|rs| rs.iter().all(|r| r["status"] == "ok"))
                .map(|rs| mean(&rs.iter().map(|r| f(r, "theta")).collect::<Vec<_>>()))
                .fold(f64::INFINITY, f64::min);
            assert!(close(entry["mean_theta"].as_f64().unwrap(), best), "{kind} at {beta}");
            let chosen = &by_spec[entry["params"].as_str().unwrap()];
            let q = mean(&chosen.iter().map(|r| f(r, "ratio_of_ratios")).collect::<Vec<_>>());
            assert!(close(entry["mean_ratio"].as_f64().unwrap(), q));
        }
    }

    let out_b = tmp.path().join("sb");
    let run = ctnoise(&["sweep", "--pairs", p(&manifest), "--config", p(&config), "--out", p(&out_b)], Some("1"));
    assert_eq!(code(&run), 0);
    for name in ["records.csv", "optimal.csv", "summary.json"] {
        assert_eq!(fs::read(out_a.join(name)).unwrap(), fs::read(out_b.join(name)).unwrap(), "{name}");
    }

    // report
    let rep = tmp.path().join("rep");
    assert_eq!(code(&ctnoise(&["report", "--in", p(&out_a), "--beta", "10", "--out", p(&rep)], None)), 0);
    let cdwt = records(&rep.join("cdwt_theta_vs_param.csv"));
    assert_eq!(cdwt.len(), 5);
    assert_eq!(cdwt[0]["params"], "threshold=50");
    let ad = records(&rep.join("ad_theta_vs_param.csv"));
    assert_eq!(ad[0]["n_ok"], "0");
    assert_eq!(ad[1]["n_ok"], "2");
    let cdwt100: Vec<f64> = rows
        .iter()
        .filter(|r| r["beta"] == "10" && r["params"] == "threshold=100")
        .map(|r| f(r, "theta"))
        .collect();
    assert!(close(f(&cdwt[1], "mean"), (cdwt100[0] + cdwt100[1]) / 2.0));
    let ratio = records(&rep.join("mf_ratio_vs_param.csv"));
    assert_eq!(ratio.len(), 2);
    let fig4 = records(&rep.join("fig4_baseline.csv"));
    assert_eq!(fig4.len(), 2);
    for r in &fig4 {
        assert!((f(r, "ratio_of_ratios") - 1.0).abs() <= 0.05);
    }
    let fig6 = records(&rep.join("fig6_optimal.csv"));
    assert_eq!(fig6.len(), 4);
    let rep2 = tmp.path().join("rep2");
    assert_eq!(code(&ctnoise(&["report", "--in", p(&out_a), "--beta", "10", "--out", p(&rep2)], None)), 0);
    for name in ["cdwt_theta_vs_param.csv", "fig4_baseline.csv", "fig6_optimal.csv"] {
        assert_eq!(fs::read(rep.join(name)).unwrap(), fs::read(rep2.join(name)).unwrap());
    }
    assert_eq!(code(&ctnoise(&["report", "--in", p(&out_a), "--beta", "3", "--out", p(&rep2)], None)), 2);
    assert_eq!(code(&ctnoise(&["report", "--in", p(&tmp.path().join("none")), "--beta", "10", "--out", p(&rep2)], None)), 2);
}

#[test]
fn sweep_rejects_bad_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = make_phantom(&tmp.path().join("ph"), "3");
    let out = tmp.path().join("out");
    let bad = tmp.path().join("bad.json");
    let run = |pairs: &Path, config: &Path, threads: Option<&str>| {
        code(&ctnoise(&["sweep", "--pairs", p(pairs), "--config", p(config), "--out", p(&out)], threads))
    };
    fs::write(&bad, r#"{"filters": {"ad": {"kappa": []}}}"#).unwrap();
    assert_eq!(run(&manifest, &bad, None), 2);
    fs::write(&bad, "{not json").unwrap();
    assert_eq!(run(&manifest, &bad, None), 2);
    assert_eq!(run(&bad, &bad, None), 2);
    assert_eq!(run(&tmp.path().join("missing.json"), &bad, None), 2);
    let good = tmp.path().join("good.json");
    fs::write(&good, r#"{"filters": {"mf": {}}, "betas": [1]}"#).unwrap();
    assert_eq!(run(&manifest, &good, Some("0")), 1);
    assert_eq!(run(&manifest, &good, Some("many")), 1);
    assert_eq!(run(&manifest, &good, Some("3")), 0);
    // the baseline is added even when the config leaves it out
    assert_eq!(records(&out.join("records.csv")).len(), 2);
}
