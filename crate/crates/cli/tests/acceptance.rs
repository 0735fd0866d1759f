//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Seeds: the synthetic fixture (`core/tests/fixtures/fixture_spec.json`) is
//! fixed at seed 1; group recovery is checked on seeds 1..=10 and the
//! condition-count sweep averages seeds 1..=5. Random oracle inputs use
//! `TestRng` seeds 100 and up, one per criterion.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use oracles::{OracleLinkage, TestRng};
use rsa_toolkit::io;
use rsa_toolkit::*;

const FIXTURE: &str = include_str!("../../core/tests/fixtures/fixture_spec.json");
const TRANSFER_SPEC: &str = include_str!("fixtures/transfer_spec.json");
const TRANSFER_AFFINITY: &str = include_str!("fixtures/pascal_affinity.csv");

type Check = Result<String, String>;
/// Name, body, time limit in seconds.
type Criterion = (&'static str, fn() -> Check, u64);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    }};
}

fn tid(s: &str) -> TaskId {
    TaskId::new(s).unwrap()
}

fn conditions(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("c{i}")).collect()
}

fn fixture(seed: u64) -> SyntheticSpec {
    let mut spec = SyntheticSpec::from_json(FIXTURE).unwrap();
    spec.seed = seed;
    spec
}

fn rdms_of(spec: &SyntheticSpec) -> Vec<Rdm64> {
    generate::<f64>(spec)
        .unwrap()
        .iter()
        .map(|f| compute_rdm(f, DegeneratePolicy::Error).unwrap())
        .collect()
}

/// One ranking per task, each probing against all the others.
fn all_rankings(spec: &SyntheticSpec) -> Vec<Ranking64> {
    let rdms = rdms_of(spec);
    rdms.iter().map(|p| rank_by_similarity(p, &rdms).unwrap()).collect()
}

fn mean_agreement(a: &[Ranking64], b: &[Ranking64], method: Method) -> f64 {
    let total: f64 = a.iter().zip(b).map(|(x, y)| ranking_correlation(x, y, method).unwrap()).sum();
    total / a.len() as f64
}

fn criterion_1() -> Check {
    let mut rng = TestRng::new(100);
    let (mut worst, mut worst_closed, mut tied) = (0.0f64, 0.0f64, 0);
    for case in 0..1200 {
        let n = 3 + rng.below(62);
        let with_ties = case % 2 == 1;
        let (x, y) = if with_ties {
            (rng.tied_vec(n, 1 + n / 3), rng.tied_vec(n, 1 + n / 3))
        } else {
            (rng.vec(n, -100.0, 100.0), rng.vec(n, -100.0, 100.0))
        };
        let (Ok(p), Ok(s)) = (pearson(&x, &y), spearman(&x, &y)) else {
            // Constant vectors are rejected by both; the oracle would give NaN.
            ensure!(with_ties, "tie-free case {case} rejected");
            continue;
        };
        worst = worst.max((p - oracles::pearson(&x, &y)).abs());
        worst = worst.max((s - oracles::spearman(&x, &y)).abs());
        if oracles::has_ties(&x) || oracles::has_ties(&y) {
            tied += 1;
        } else {
            worst_closed = worst_closed.max((s - oracles::spearman_closed_form(&x, &y)).abs());
        }
    }
    ensure!(worst <= 1e-12, "max deviation from oracle {worst:e}");
    ensure!(worst_closed <= 1e-12, "max deviation from closed form {worst_closed:e}");
    ensure!(tied >= 300, "only {tied} tied cases");
    Ok(format!("1200 pairs ({tied} with ties), max err {worst:.1e}, closed-form err {worst_closed:.1e}"))
}

fn criterion_2() -> Check {
    let mut rng = TestRng::new(101);
    let mut worst = 0.0f64;
    for case in 0..120 {
        let n = 3 + rng.below(48);
        let f = 2 + rng.below(127);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| rng.vec(f, -5.0, 5.0)).collect();
        let fm = FeatureMatrix::from_rows(tid("t"), conditions(n), &rows).unwrap();
        let rdm = compute_rdm(&fm, DegeneratePolicy::Error).map_err(|e| format!("case {case}: {e}"))?;
        let want = oracles::rdm(&rows);
        for i in 0..n {
            ensure!(rdm.get(i, i) == 0.0, "case {case}: diagonal {i} is {}", rdm.get(i, i));
            for j in 0..n {
                ensure!(rdm.get(i, j) == rdm.get(j, i), "case {case}: asymmetric at ({i},{j})");
                worst = worst.max((rdm.get(i, j) - want[i * n + j]).abs());
            }
        }
    }
    ensure!(worst <= 1e-10, "max deviation {worst:e}");
    Ok(format!("120 matrices up to 50x128, max err {worst:.1e}"))
}

fn random_rdm(rng: &mut TestRng, name: &str, n: usize, f: usize) -> (Vec<Vec<f64>>, Rdm64) {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| rng.vec(f, -3.0, 3.0)).collect();
    let fm = FeatureMatrix::from_rows(tid(name), conditions(n), &rows).unwrap();
    let rdm = compute_rdm(&fm, DegeneratePolicy::Error).unwrap();
    (rows, rdm)
}

fn map_rdm(r: &Rdm64, f: impl Fn(f64) -> f64) -> Rdm64 {
    let n = r.n();
    let values = (0..n * n)
        .map(|k| if k / n == k % n { 0.0 } else { f(r.values()[k]) })
        .collect();
    Rdm::new(r.task().clone(), r.conditions().to_vec(), values).unwrap()
}

fn criterion_3() -> Check {
    let mut rng = TestRng::new(102);
    let mut affine_worst = 0.0f64;
    for case in 0..100 {
        let n = 3 + rng.below(20);
        let f = 2 + rng.below(30);
        let (rows, rdm) = random_rdm(&mut rng, "t", n, f);
        let (a, b) = (rng.range(0.01, 100.0), rng.range(-1e3, 1e3));
        let shifted: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| a * v + b).collect()).collect();
        let fm = FeatureMatrix::from_rows(tid("t"), conditions(n), &shifted).unwrap();
        let r2 = compute_rdm(&fm, DegeneratePolicy::Error).unwrap();
        for (x, y) in rdm.values().iter().zip(r2.values()) {
            affine_worst = affine_worst.max((x - y).abs());
        }
        ensure!(affine_worst <= 1e-10, "affine case {case}: {affine_worst:e}");
    }

    // Strictly increasing maps of [0, 2] into [0, 2].
    let transforms: [fn(f64) -> f64; 3] = [
        |v| (2.0 * v).sqrt(),
        |v| (v * v + v) / 3.0,
        |v| 2.0 * v.exp_m1() / 2f64.exp_m1(),
    ];
    for case in 0..60 {
        let n = 4 + rng.below(10);
        let f = 3 + rng.below(10);
        let rdms: Vec<Rdm64> = (0..5).map(|t| random_rdm(&mut rng, &format!("t{t}"), n, f).1).collect();
        let sim = similarity_matrix(&rdms).unwrap();
        for i in 0..sim.n() {
            ensure!(sim.get(i, i) == 1.0, "case {case}: similarity diagonal");
            for j in 0..sim.n() {
                ensure!(sim.get(i, j) == sim.get(j, i), "case {case}: similarity asymmetric");
            }
        }
        let base = rank_by_similarity(&rdms[0], &rdms[1..]).unwrap();
        let names = |r: &Ranking64| r.tasks().cloned().collect::<Vec<_>>();
        for g in transforms {
            let s0 = rdm_similarity(&rdms[0], &rdms[1]).unwrap();
            let s1 = rdm_similarity(&rdms[0], &map_rdm(&rdms[1], g)).unwrap();
            ensure!(s0 == s1, "case {case}: rdm_similarity changed {s0} -> {s1}");
            let moved: Vec<Rdm64> = rdms[1..].iter().map(|r| map_rdm(r, g)).collect();
            let after = rank_by_similarity(&rdms[0], &moved).unwrap();
            ensure!(names(&base) == names(&after), "case {case}: ranking order changed");
        }
    }
    Ok(format!("affine max err {affine_worst:.1e}; monotone, symmetry and ranking checks exact"))
}

fn criterion_4() -> Check {
    let mut rng = TestRng::new(103);
    let linkages = [
        (Linkage::Average, OracleLinkage::Average),
        (Linkage::Complete, OracleLinkage::Complete),
        (Linkage::Single, OracleLinkage::Single),
    ];
    let mut cases = 0;
    for case in 0..120 {
        let n = 2 + rng.below(9);
        // Every other matrix uses a coarse value grid so that exact ties occur.
        let quantized = case % 2 == 1;
        let mut values = rng.similarity(n);
        if quantized {
            for v in &mut values {
                *v = (*v * 4.0).round() / 4.0;
            }
        }
        let tasks = (0..n).map(|i| tid(&format!("t{i}"))).collect();
        let sim = SimilarityMatrix::new(tasks, values).unwrap();
        for (linkage, ol) in linkages {
            // Averages over grid values round differently in the two
            // formulations, so ties there are only checked for min/max.
            if quantized && linkage == Linkage::Average {
                continue;
            }
            let dend = cluster(&sim, linkage).unwrap();
            let want = oracles::agglomerate(sim.values(), n, ol);
            for (step, (m, (l, r, h))) in dend.merges().iter().zip(&want).enumerate() {
                ensure!(
                    (m.left, m.right) == (*l, *r),
                    "case {case} {linkage} step {step}: got ({}, {}), oracle ({l}, {r})",
                    m.left,
                    m.right
                );
                let tol = if linkage == Linkage::Average { 1e-12 } else { 0.0 };
                ensure!((m.height - h).abs() <= tol, "case {case} {linkage} step {step}: height {} vs {h}", m.height);
            }
            if linkage == Linkage::Average {
                for w in dend.merges().windows(2) {
                    ensure!(w[1].height >= w[0].height, "case {case}: average heights decrease");
                }
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} linkage runs over 120 matrices (60 with grid ties) match the rescan oracle"))
}

fn criterion_5() -> Check {
    let mut recovered = 0;
    for seed in 1..=10 {
        let spec = fixture(seed);
        let truth: Vec<usize> = spec.task_groups().into_iter().map(|(_, g)| g).collect();
        let sim = similarity_matrix(&rdms_of(&spec)).unwrap();
        let labels: Vec<usize> = cut(&cluster(&sim, Linkage::Average).unwrap(), 3)
            .unwrap()
            .into_iter()
            .map(|(_, c)| c)
            .collect();
        recovered += usize::from(labels == truth);
    }
    ensure!(recovered >= 9, "groups recovered on {recovered}/10 seeds");

    let sized = |seed: u64, dim: usize| {
        let mut spec = fixture(seed);
        spec.feature_dim_per_task = dim;
        all_rankings(&spec)
    };
    let rs = mean_agreement(&sized(1, 16), &sized(1, 256), Method::Spearman);
    let spread: Vec<String> = (1..=10)
        .map(|seed| format!("{:.2}", mean_agreement(&sized(seed, 16), &sized(seed, 256), Method::Spearman)))
        .collect();
    ensure!(rs >= 0.8, "feature-dim 16 vs 256 mean r_s {rs:.3}");
    Ok(format!(
        "groups recovered on {recovered}/10 seeds; dim 16 vs 256 mean r_s {rs:.3} (seeds 1..10: {})",
        spread.join(" ")
    ))
}

fn criterion_6() -> Check {
    let mut report = Vec::new();
    let mut failed = Vec::new();
    let references: Vec<Vec<Ranking64>> = (1..=5)
        .map(|seed| {
            let mut spec = fixture(seed);
            spec.n_conditions = 800;
            all_rankings(&spec)
        })
        .collect();
    for n in [50, 100, 200, 400] {
        let mut rho = 0.0;
        for (seed, reference) in (1..=5).zip(&references) {
            let mut spec = fixture(seed);
            spec.n_conditions = n;
            rho += mean_agreement(&all_rankings(&spec), reference, Method::Pearson) / 5.0;
        }
        report.push(format!("n={n}: {rho:.4}"));
        if n >= 200 && rho < 0.9 {
            failed.push(n);
        }
    }
    ensure!(failed.is_empty(), "rho < 0.9 for n in {failed:?} ({})", report.join(", "));
    Ok(format!("mean rho vs n=800 over seeds 1..5: {}", report.join(", ")))
}

fn criterion_7() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = TestRng::new(107);
    for case in 0..20 {
        let n = 3 + rng.below(30);
        let f = 2 + rng.below(40);
        let names: Vec<String> = (0..n).map(|i| format!("img {i}, \"q\"")).collect();
        let fm = FeatureMatrix::new(tid(&format!("task {case}")), names, f, rng.vec(n * f, -1e6, 1e6)).unwrap();
        let path = dir.path().join(format!("{case}.rsaf"));
        io::write_features(&fm, &path).unwrap();
        let back: FeatureMatrix64 = io::read_features(&path).map_err(|e| e.to_string())?;
        let bits = |m: &FeatureMatrix64| m.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        ensure!(back.task() == fm.task() && back.conditions() == fm.conditions(), "RSAF labels differ");
        ensure!(bits(&back) == bits(&fm), "RSAF payload differs in case {case}");

        let rdm = compute_rdm(&fm, DegeneratePolicy::Error).unwrap();
        let rpath = dir.path().join(format!("{case}.rdm.csv"));
        io::write_rdm(&rdm, &rpath).unwrap();
        ensure!(io::read_rdm::<f64>(&rpath).unwrap() == rdm, "RDM CSV differs in case {case}");

        let t = 2 + rng.below(12);
        let sim = SimilarityMatrix::new((0..t).map(|i| tid(&format!("t,{i}"))).collect(), rng.similarity(t)).unwrap();
        let spath = dir.path().join(format!("{case}.sim.csv"));
        io::write_similarity(&sim, &spath).unwrap();
        ensure!(io::read_similarity::<f64>(&spath).unwrap() == sim, "similarity CSV differs in case {case}");
    }

    let clean = io::encode_features(&FeatureMatrix::new(tid("t"), conditions(6), 5, rng.vec(30, -1.0, 1.0)).unwrap());
    let mut errors = 0;
    for case in 0..10_000 {
        let bytes = if case % 2 == 0 {
            clean[..rng.below(clean.len())].to_vec()
        } else {
            let mut b = clean.clone();
            for _ in 0..1 + rng.below(6) {
                let at = rng.below(b.len());
                b[at] = rng.below(256) as u8;
            }
            b
        };
        let outcome = panic::catch_unwind(|| io::decode_features::<f64>(&bytes));
        match outcome {
            Err(_) => return Err(format!("decoder panicked on fuzz case {case}")),
            Ok(Err(e)) => {
                ensure!(e.class() == ErrorClass::Data, "untyped error {e}");
                errors += 1;
            }
            Ok(Ok(_)) => ensure!(case % 2 == 1, "truncated input accepted in case {case}"),
        }
    }
    Ok(format!("60 exact round trips; 10000 fuzz cases, {errors} typed errors, no panics"))
}

fn rsa_bin(args: &[&str], jobs: &str) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rsa"))
        .args(args)
        .env("RSA_JOBS", jobs)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    Ok(())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Runs every command on the transfer-benchmark fixture; returns (relative path, bytes).
fn cli_pipeline(root: &Path, spec: &Path, affinity: &Path, jobs: &str) -> Result<Vec<(String, Vec<u8>)>, String> {
    let feat_dir = root.join("features");
    rsa_bin(&["synth", "--spec", p(spec), "--out-dir", p(&feat_dir)], jobs)?;
    let mut features: Vec<PathBuf> = std::fs::read_dir(&feat_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    features.sort();
    let rdm_dir = root.join("rdm");
    let mut args = vec!["rdm", "--out-dir", p(&rdm_dir), "--features"];
    args.extend(features.iter().map(|f| p(f)));
    rsa_bin(&args, jobs)?;

    let rdm_of = |task: &str| rdm_dir.join(format!("{}.rdm.csv", task.replace(' ', "_")));
    let tasks: Vec<String> = SyntheticSpec::from_json(TRANSFER_SPEC)
        .unwrap()
        .task_groups()
        .into_iter()
        .map(|(t, _)| t)
        .collect();
    let rdm_paths: Vec<PathBuf> = tasks.iter().map(|t| rdm_of(t)).collect();
    let sim = root.join("sim.csv");
    let mut args = vec!["simmat", "--out", p(&sim), "--rdm"];
    args.extend(rdm_paths.iter().map(|f| p(f)));
    rsa_bin(&args, jobs)?;
    rsa_bin(&["cluster", "--simmat", p(&sim), "--out", p(&root.join("tree.nwk")), "--cut", "3"], jobs)?;
    rsa_bin(&["cluster", "--simmat", p(&sim), "--linkage", "single", "--out", p(&root.join("tree.json"))], jobs)?;
    for k in ["1", "5"] {
        let mut args = vec!["rank", "--probe-rdm", p(&rdm_paths[0]), "--candidates"];
        args.extend(rdm_paths[1..].iter().map(|f| p(f)));
        let out = root.join(format!("rank_top{k}.csv"));
        args.extend(["--out", p(&out), "--affinity", p(affinity), "--topk", k]);
        rsa_bin(&args, jobs)?;
    }

    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    Ok(files)
}

fn criterion_8() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec_path = dir.path().join("spec.json");
    let affinity_path = dir.path().join("affinity.csv");
    std::fs::write(&spec_path, TRANSFER_SPEC).unwrap();
    std::fs::write(&affinity_path, TRANSFER_AFFINITY).unwrap();

    let runs: Vec<Vec<(String, Vec<u8>)>> = [("a", "1"), ("b", "1"), ("c", "4"), ("d", "16")]
        .iter()
        .map(|(name, jobs)| cli_pipeline(&dir.path().join(name), &spec_path, &affinity_path, jobs))
        .collect::<Result<_, _>>()?;
    for run in &runs[1..] {
        ensure!(run == &runs[0], "outputs differ between runs or --jobs values");
    }
    let files: std::collections::BTreeMap<&str, &[u8]> =
        runs[0].iter().map(|(k, v)| (k.as_str(), v.as_slice())).collect();
    let text = |name: &str| String::from_utf8(files[name].to_vec()).unwrap();

    // Library path on the same spec.
    let spec = SyntheticSpec::from_json(TRANSFER_SPEC).unwrap();
    let feats: Vec<FeatureMatrix64> = generate(&spec).unwrap();
    let rdms: Vec<Rdm64> = feats.iter().map(|f| compute_rdm(f, DegeneratePolicy::Error).unwrap()).collect();
    for (fm, rdm) in feats.iter().zip(&rdms) {
        let stem = fm.task().as_str().replace(' ', "_");
        ensure!(files[format!("features/{stem}.rsaf").as_str()] == io::encode_features(fm).as_slice(), "synth differs for {stem}");
        ensure!(text(&format!("rdm/{stem}.rdm.csv")) == io::format_rdm(rdm), "rdm differs for {stem}");
    }
    let sim = similarity_matrix(&rdms).unwrap();
    ensure!(text("sim.csv") == io::format_similarity(&sim), "simmat differs");
    let avg = cluster(&sim, Linkage::Average).unwrap();
    ensure!(text("tree.nwk").trim_end() == io::to_newick(&avg), "newick differs");
    let single = cluster(&sim, Linkage::Single).unwrap();
    ensure!(io::from_json::<f64>(&text("tree.json")).unwrap() == single, "json dendrogram differs");
    let labels = cut(&avg, 3).unwrap();
    let mut want = String::from("task,cluster\n");
    for (t, c) in &labels {
        want.push_str(&format!("{t},{c}\n"));
    }
    ensure!(text("tree.clusters.csv") == want, "cluster assignment differs");

    let ranking = rank_by_similarity(&rdms[0], &rdms[1..]).unwrap();
    ensure!(ranking.top().as_str() == "Object class", "RSA top-1 is {}", ranking.top());
    let table: AffinityTable64 = io::parse_affinity(TRANSFER_AFFINITY).unwrap();
    let mut expected_body = String::from("task,score,rank\n");
    for (i, (t, s)) in ranking.ordered().iter().enumerate() {
        expected_body.push_str(&format!("{t},{},{}\n", io::matrix::format_value(*s), i + 1));
    }
    let transfer = table.oriented_ranking();
    let corr = format!(
        "ranking_correlation,pearson,{}\nranking_correlation,spearman,{}\n",
        io::matrix::format_value(ranking_correlation(&ranking, &transfer, Method::Pearson).unwrap()),
        io::matrix::format_value(ranking_correlation(&ranking, &transfer, Method::Spearman).unwrap()),
    );
    // By hand from the table: mIoU order is Scene class, Occlusion edges,
    // Object class, Semantic segmentation, Autoencoder, Vanishing point.
    // Object class is third, so it is in the top 5 but not the top 1.
    for (k, agrees) in [(1, false), (5, true)] {
        let got = text(&format!("rank_top{k}.csv"));
        let want = format!("{expected_body}topk_agreement,{k},{agrees}\n{corr}");
        ensure!(got == want, "rank --topk {k} output:\n{got}\nexpected:\n{want}");
    }
    Ok(format!(
        "{} files byte-identical over 4 runs (--jobs 1,1,4,16) and equal to library output; top-1 Object class: top5 true, top1 false",
        runs[0].len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("correlation oracles", criterion_1, 5),
        ("RDM oracle", criterion_2, 10),
        ("invariance suite", criterion_3, 60),
        ("clustering oracle", criterion_4, 5),
        ("synthetic end-to-end", criterion_5, 60),
        ("condition-count stability", criterion_6, 120),
        ("format round trips and fuzz", criterion_7, 60),
        ("CLI equivalence and determinism", criterion_8, 60),
    ];
    // Fuzzing deliberately provokes panics if the decoder were to panic; keep
    // the default hook quiet so the report stays readable.
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>().map(String::as_str).or(e.downcast_ref::<&str>().copied()))));
        let elapsed = start.elapsed();
        let result = result.and_then(|msg| {
            if elapsed > Duration::from_secs(limit) {
                Err(format!("took {elapsed:.1?}, limit {limit}s ({msg})"))
            } else {
                Ok(msg)
            }
        });
        match result {
            Ok(msg) => println!("PASS criterion {} ({name}) [{elapsed:.2?}]: {msg}", i + 1),
            Err(msg) => {
                failures += 1;
                println!("FAIL criterion {} ({name}) [{elapsed:.2?}]: {msg}", i + 1);
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
