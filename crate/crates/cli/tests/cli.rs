use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use attrib_core::data::{load_fasta, load_labels, load_predictions, validate};
use attrib_core::report::{sha256_file, MetricReport};
use tempfile::TempDir;

fn attrib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_attrib"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = attrib(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> i32 {
    attrib(args).status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Matrix CSV from rows; categories are `c0..`.
fn matrix_csv(rows: &[Vec<f64>]) -> String {
    let k = rows[0].len();
    let mut out = String::from("sequence_id");
    for j in 0..k {
        out.push_str(&format!(",c{j}"));
    }
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        out.push_str(&format!("s{i}"));
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

fn labels_csv(truth: &[usize]) -> String {
    let mut out = String::from("sequence_id,lab_id\n");
    for (i, t) in truth.iter().enumerate() {
        out.push_str(&format!("s{i},c{t}\n"));
    }
    out
}

fn one_hot(truth: &[usize], k: usize) -> Vec<Vec<f64>> {
    truth
        .iter()
        .map(|&t| (0..k).map(|j| if j == t { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn score(dir: &TempDir, pred: &Path, labels: &Path, out: &str) -> MetricReport {
    let path = dir.path().join(out);
    ok(&[
        "score",
        "--predictions",
        s(pred),
        "--labels",
        s(labels),
        "--out",
        s(&path),
    ]);
    MetricReport::load(&path).unwrap()
}

const TRUTH: [usize; 6] = [0, 1, 2, 3, 4, 0];

#[test]
fn perfect_submission_scores_one() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", &matrix_csv(&one_hot(&TRUTH, 5)));
    let l = write(&dir, "l.csv", &labels_csv(&TRUTH));
    let r = score(&dir, &p, &l, "r.json");
    assert!(r.top_n.iter().all(|t| t.accuracy == 1.0));
    assert!(r.x_metrics.scores.iter().all(|&x| x == 1));
    assert_eq!((r.ece, r.mce), (0.0, 0.0));
    assert_eq!(r.macro_f1, 1.0);
}

#[test]
fn uniform_submission_ranks_everything_last() {
    let dir = TempDir::new().unwrap();
    let k = 5;
    let rows = vec![vec![0.2; k]; TRUTH.len()];
    let p = write(&dir, "p.csv", &matrix_csv(&rows));
    let l = write(&dir, "l.csv", &labels_csv(&TRUTH));
    let r = score(&dir, &p, &l, "r.json");
    for n in 1..k {
        assert_eq!(r.accuracy_curve[n - 1], 0.0);
    }
    assert_eq!(r.accuracy_curve[k - 1], 1.0);
    assert_eq!(r.x_metrics.get(95.0), Some(k));
}

#[test]
fn scoring_is_byte_deterministic_and_digests_inputs() {
    let dir = TempDir::new().unwrap();
    let rows = vec![
        vec![0.5, 0.3, 0.2],
        vec![0.1, 0.6, 0.3],
        vec![0.4, 0.4, 0.2],
    ];
    let p = write(&dir, "p.csv", &matrix_csv(&rows));
    let l = write(&dir, "l.csv", &labels_csv(&[0, 2, 1]));
    let a = ok(&["score", "--predictions", s(&p), "--labels", s(&l)]).stdout;
    let b = ok(&["score", "--predictions", s(&p), "--labels", s(&l)]).stdout;
    assert_eq!(a, b);
    let report: MetricReport = serde_json::from_slice(&a).unwrap();
    assert_eq!(
        report.provenance.predictions_sha256,
        sha256_file(&p).unwrap()
    );
    assert_eq!(report.provenance.labels_sha256, sha256_file(&l).unwrap());
    assert_eq!(report.provenance.tool_version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn csv_format_summary() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", &matrix_csv(&one_hot(&TRUTH, 5)));
    let l = write(&dir, "l.csv", &labels_csv(&TRUTH));
    let out = ok(&[
        "--format",
        "csv",
        "score",
        "--predictions",
        s(&p),
        "--labels",
        s(&l),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("name,sequences,categories,top1,top5,top10,top20,x80"));
}

#[test]
fn validation_failures_exit_2() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", "sequence_id,c0,c1\ns0,0.9,0.3\n");
    let l = write(&dir, "l.csv", "sequence_id,lab_id\ns0,c0\n");
    let out = attrib(&["validate", "--predictions", s(&p), "--labels", s(&l)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sums to"));
    assert_eq!(
        code(&["score", "--predictions", s(&p), "--labels", s(&l)]),
        2
    );

    let bad = write(&dir, "bad.csv", "sequence_id,c0\ns0,abc\n");
    assert_eq!(
        code(&["validate", "--predictions", s(&bad), "--labels", s(&l)]),
        2
    );
}

#[test]
fn usage_and_config_errors_exit_3() {
    assert_eq!(code(&["no-such-command"]), 3);
    assert_eq!(code(&["validate"]), 3);
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.conf", "colour=blue\n");
    assert_eq!(code(&["--config", s(&cfg), "validate"]), 3);
}

#[test]
fn config_file_supplies_paths() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", &matrix_csv(&one_hot(&TRUTH, 5)));
    let l = write(&dir, "l.csv", &labels_csv(&TRUTH));
    let cfg = write(
        &dir,
        "run.conf",
        &format!(
            "# inputs\npredictions={}\nlabels={}\nbins=5\n",
            s(&p),
            s(&l)
        ),
    );
    let out = ok(&["--config", s(&cfg), "calibration"]);
    let table: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(table["bins"].as_array().unwrap().len(), 5);
}

#[test]
fn xmetrics_and_calibration_outputs() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", &matrix_csv(&one_hot(&TRUTH, 5)));
    let l = write(&dir, "l.csv", &labels_csv(&TRUTH));
    let out = ok(&[
        "xmetrics",
        "--predictions",
        s(&p),
        "--labels",
        s(&l),
        "--thresholds",
        "50,100",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["scores"], serde_json::json!([1, 1]));
    assert_eq!(v["accuracy_curve"].as_array().unwrap().len(), 5);
    assert_eq!(
        code(&[
            "xmetrics",
            "--predictions",
            s(&p),
            "--labels",
            s(&l),
            "--thresholds",
            "0"
        ]),
        3
    );

    let out = ok(&[
        "--format",
        "csv",
        "calibration",
        "--predictions",
        s(&p),
        "--labels",
        s(&l),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("bin,count,accuracy,confidence"));
    assert_eq!(text.lines().count(), 16);
}

#[test]
fn identity_ensemble_reproduces_member_report() {
    let dir = TempDir::new().unwrap();
    let rows = vec![
        vec![0.5, 0.25, 0.25],
        vec![0.125, 0.625, 0.25],
        vec![0.375, 0.375, 0.25],
    ];
    let truth = [0, 2, 1];
    let p = write(&dir, "member.csv", &matrix_csv(&rows));
    let l = write(&dir, "l.csv", &labels_csv(&truth));
    let e = dir.path().join("ens.csv");
    ok(&["ensemble", s(&p), s(&p), s(&p), s(&p), "--output", s(&e)]);

    let combined = load_predictions(&e).unwrap();
    assert!(validate(&combined, &load_labels(&l).unwrap()).ok);
    assert_eq!(combined, load_predictions(&p).unwrap());

    let mut a = score(&dir, &p, &l, "a.json");
    let mut b = score(&dir, &e, &l, "b.json");
    a.name.clear();
    b.name.clear();
    a.provenance = b.provenance.clone();
    assert_eq!(a, b);
}

#[test]
fn ensemble_misaligned_members_fail() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "sequence_id,c0,c1\ns0,0.5,0.5\n");
    let b = write(&dir, "b.csv", "sequence_id,c0,c2\ns0,0.5,0.5\n");
    let out = attrib(&[
        "ensemble",
        s(&a),
        s(&b),
        "--output",
        s(&dir.path().join("o.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("c2"));
}

#[test]
fn compare_sorts_by_top10() {
    let dir = TempDir::new().unwrap();
    // 12 categories so top-10 differs from saturation
    let k = 12;
    let truth: Vec<usize> = (0..4).collect();
    let l = write(&dir, "l.csv", &labels_csv(&truth));
    let mut reports = Vec::new();
    // predictor i puts the truth last for i of the 4 rows
    for (i, name) in ["best", "middle", "worst"].iter().enumerate() {
        let rows: Vec<Vec<f64>> = truth
            .iter()
            .enumerate()
            .map(|(r, &t)| {
                let mut row: Vec<f64> = (0..k).map(|j| (k - j) as f64).collect();
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= total);
                // weights are strictly decreasing by column; swap so the
                // truth sits first or last
                let target = if r < i { k - 1 } else { 0 };
                row.swap(t, target);
                row
            })
            .collect();
        let p = write(&dir, &format!("{name}.csv"), &matrix_csv(&rows));
        let out = dir.path().join(format!("{name}.json"));
        ok(&[
            "score",
            "--predictions",
            s(&p),
            "--labels",
            s(&l),
            "--out",
            s(&out),
        ]);
        reports.push(out);
    }
    let deciles = dir.path().join("deciles.csv");
    let out = ok(&[
        "--format",
        "json",
        "compare",
        s(&reports[2]),
        s(&reports[0]),
        s(&reports[1]),
        "--deciles",
        s(&deciles),
    ]);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, vec!["best", "middle", "worst"]);
    assert_eq!(fs::read_to_string(&deciles).unwrap().lines().count(), 11);

    let table = String::from_utf8(ok(&["compare", s(&reports[1]), s(&reports[0])]).stdout).unwrap();
    assert!(table.lines().nth(1).unwrap().contains("best"));
}

#[test]
fn plotdata_emits_k_rows() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", &matrix_csv(&one_hot(&TRUTH, 5)));
    let l = write(&dir, "l.csv", &labels_csv(&TRUTH));
    let report = dir.path().join("r.json");
    ok(&[
        "score",
        "--predictions",
        s(&p),
        "--labels",
        s(&l),
        "--target",
        "c0",
        "--out",
        s(&report),
    ]);
    let plots = dir.path().join("plots");
    ok(&["plotdata", s(&report), "--out-dir", s(&plots), "--svg"]);
    let curve = fs::read_to_string(plots.join("accuracy_curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 1 + 5);
    assert_eq!(curve.lines().next(), Some("n,accuracy,misclassification"));
    assert!(plots.join("calibration.csv").exists());
    assert!(plots.join("category_analysis.csv").exists());
    let svg = fs::read_to_string(plots.join("reliability.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    fn dna(&mut self, len: usize) -> String {
        (0..len)
            .map(|_| b"ACGT"[(self.next() % 4) as usize] as char)
            .collect()
    }
}

/// Labs `lab0..lab2` with 20 records each plus two 2-record labs that get pooled.
fn corpus(dir: &TempDir) -> (PathBuf, PathBuf, PathBuf) {
    let mut rng = Lcg(7);
    let mut fasta = String::new();
    let mut meta = String::from("sequence_id,growth_strain,copy_number\n");
    let mut ids = Vec::new();
    let labs: Vec<(String, usize)> = (0..3)
        .map(|i| (format!("lab{i}"), 20))
        .chain([("tiny_a".to_string(), 2), ("tiny_b".to_string(), 2)])
        .collect();
    for (lab, n) in &labs {
        let motif = rng.dna(20);
        for j in 0..*n {
            let id = format!("{lab}_{j}");
            fasta.push_str(&format!(
                ">{id} {lab}\n{}{}{}\n",
                rng.dna(60),
                motif,
                rng.dna(60)
            ));
            meta.push_str(&format!("{id},DH5alpha,High Copy\n"));
            ids.push(id);
        }
    }
    let mut lineage = String::from("id_a,id_b\n");
    for w in ids.chunks(4) {
        lineage.push_str(&format!("{},{}\n", w[0], w[1]));
    }
    (
        write(dir, "corpus.fa", &fasta),
        write(dir, "meta.csv", &meta),
        write(dir, "lineage.csv", &lineage),
    )
}

#[test]
fn prep_end_to_end_and_deterministic() {
    let dir = TempDir::new().unwrap();
    let (fa, meta, lineage) = corpus(&dir);
    let run = |seed: &str, out: &str| {
        let out = dir.path().join(out);
        let summary = ok(&[
            "--seed",
            seed,
            "prep",
            "--fasta",
            s(&fa),
            "--metadata",
            s(&meta),
            "--lineage",
            s(&lineage),
            "--out-dir",
            s(&out),
        ]);
        (
            out,
            serde_json::from_slice::<serde_json::Value>(&summary.stdout).unwrap(),
        )
    };
    let (a, summary) = run("11", "a");
    let (b, _) = run("11", "b");
    let (c, _) = run("12", "c");
    assert_eq!(summary["categories"], 4);
    assert_eq!(summary["records"], 64);
    for f in [
        "split.csv",
        "pooling.csv",
        "obfuscation.csv",
        "onehot.csv",
        "labels.csv",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs under the same seed"
        );
    }
    assert_ne!(
        fs::read(a.join("split.csv")).unwrap(),
        fs::read(c.join("split.csv")).unwrap()
    );

    // every artifact re-ingests
    let labels = load_labels(a.join("labels.csv")).unwrap();
    assert_eq!(labels.len(), 64);
    assert!(labels
        .categories()
        .iter()
        .any(|c| c.as_str() == "unknown_engineered"));
    let holdout = load_fasta(a.join("holdout.fasta")).unwrap();
    for cat in labels.categories() {
        let n = holdout
            .iter()
            .filter(|r| r.lab_id.as_deref() == Some(cat.as_str()))
            .count();
        assert!(n >= 3, "{cat} has {n} holdout records");
    }
    let onehot = fs::read_to_string(a.join("onehot.csv")).unwrap();
    assert_eq!(onehot.lines().next().unwrap().split(',').count(), 40);
}

#[test]
fn prep_infeasible_and_seedless_exit_3() {
    let dir = TempDir::new().unwrap();
    let (fa, _, _) = corpus(&dir);
    let out = dir.path().join("o");
    assert_eq!(code(&["prep", "--fasta", s(&fa), "--out-dir", s(&out)]), 3);
    let infeasible = attrib(&[
        "--seed",
        "1",
        "prep",
        "--fasta",
        s(&fa),
        "--out-dir",
        s(&out),
        "--min-holdout",
        "30",
    ]);
    assert_eq!(infeasible.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&infeasible.stderr).contains("lab0"));
}

#[test]
fn baseline_build_and_predict() {
    let dir = TempDir::new().unwrap();
    let (fa, _, _) = corpus(&dir);
    let prep = dir.path().join("prep");
    ok(&[
        "--seed",
        "3",
        "prep",
        "--fasta",
        s(&fa),
        "--out-dir",
        s(&prep),
    ]);
    let index = dir.path().join("index.json");
    ok(&[
        "baseline",
        "build-index",
        "--fasta",
        s(&prep.join("train.fasta")),
        "--k",
        "8",
        "--out",
        s(&index),
    ]);
    let labels = prep.join("labels.csv");
    let queries = prep.join("holdout.fasta");

    // holdout-only labels for validation
    let holdout_ids: Vec<String> = load_fasta(&queries)
        .unwrap()
        .into_iter()
        .map(|r| r.sequence_id)
        .collect();
    let all = load_labels(&labels).unwrap();
    let mut text = String::from("sequence_id,lab_id\n");
    for id in &holdout_ids {
        text.push_str(&format!("{id},{}\n", all.get(id).unwrap()));
    }
    let holdout_labels = write(&dir, "holdout_labels.csv", &text);

    for extra in [
        vec!["--mode", "stable"],
        vec!["--mode", "unstable", "--seed", "9"],
        vec!["--method", "naive-bayes"],
    ] {
        let pred = dir.path().join("pred.csv");
        let mut args = vec![
            "baseline",
            "predict",
            "--index",
            s(&index),
            "--fasta",
            s(&queries),
            "--output",
            s(&pred),
            "--labels",
            s(&labels),
            "--k",
            "8",
        ];
        args.extend(extra.iter().copied());
        ok(&args);
        let report = score(&dir, &pred, &holdout_labels, "pred.json");
        // pooled tiny labs have distinct motifs, so some of their holdout
        // records have no training relative
        assert!(
            report.top(1).unwrap() >= 0.75,
            "{extra:?}: {:?}",
            report.top_n
        );
    }

    let pred = dir.path().join("x.csv");
    let base = [
        "baseline",
        "predict",
        "--index",
        s(&index),
        "--fasta",
        s(&queries),
        "--output",
        s(&pred),
    ];
    let mut unseeded = base.to_vec();
    unseeded.extend(["--mode", "unstable"]);
    assert_eq!(code(&unseeded), 3);
    let mut wrong_k = base.to_vec();
    wrong_k.extend(["--k", "5"]);
    assert_eq!(code(&wrong_k), 3);
}
