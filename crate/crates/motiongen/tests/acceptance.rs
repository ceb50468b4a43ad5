//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use motiongen::formats::{load_dataset, ClassifierCheckpoint, ModelCheckpoint, ReportFile};
use motiongen_core::data::{default_specs, preprocess, round_trip_error, synthesize_dataset, PreparedDataset};
use motiongen_core::eval::{
    class_conditional_fid, diversity, fid, fid_between, multimodality, recognition_accuracy, sample_real,
    GaussianStats,
};
use motiongen_core::lie::{self, exp_so3, log_so3, Vec3};
use motiongen_core::neural::{grad_check, AdamConfig, Bound};
use motiongen_core::vae::{draw_noise, generate_batch, sequence_loss, Sequence, Trainer, VaeConfig, VaeModel};
use motiongen_core::{forward_kinematics, rng_from_seed, LiePose, Rng, Skeleton};
use rand::Rng as _;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn random_axis(rng: &mut Rng) -> Vec3 {
    loop {
        let v: Vec3 = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = lie::norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return lie::scale(&v, 1.0 / n);
        }
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn lie_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(101);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let theta = rng.random_range(0.0..std::f64::consts::PI - 1e-3);
        let w = lie::scale(&random_axis(&mut rng), theta);
        worst = worst.max(max_diff(&log_so3(&exp_so3(&w)), &w));
    }
    let mut worst_pi = 0.0f64;
    for _ in 0..1_000 {
        let theta = rng.random_range(std::f64::consts::PI - 1e-3..std::f64::consts::PI);
        let w = lie::scale(&random_axis(&mut rng), theta);
        worst_pi = worst_pi.max(max_diff(&log_so3(&exp_so3(&w)), &w));
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-8 && worst_pi <= 1e-5 && within(t, 5.0),
        format!("max error {worst:.2e} (≤ 1e-8), near π {worst_pi:.2e} (≤ 1e-5), {t:.2?}"),
    )
}

fn random_pose(skeleton: &Skeleton, rng: &mut Rng) -> LiePose {
    LiePose {
        omega: (0..skeleton.bone_count())
            .map(|_| lie::scale(&random_axis(rng), rng.random_range(0.0..std::f64::consts::PI)))
            .collect(),
        root_translation: [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
    }
}

fn fk_structure() -> Outcome {
    let start = Instant::now();
    let skeleton = Skeleton::default_human();
    let mut rng = rng_from_seed(102);
    let (mut bones, mut shift, mut scaling) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1_000 {
        let pose = random_pose(&skeleton, &mut rng);
        let joints = forward_kinematics(&pose, &skeleton).unwrap();
        for (b, bone) in skeleton.bones().iter().enumerate() {
            let d = lie::norm(&lie::sub(&joints.joints[bone.child], &joints.joints[bone.parent]));
            bones = bones.max((d - skeleton.bone_lengths()[b]).abs());
        }
        let t: Vec3 = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let moved = LiePose {
            root_translation: lie::add(&pose.root_translation, &t),
            ..pose.clone()
        };
        let moved = forward_kinematics(&moved, &skeleton).unwrap();
        shift = shift.max(max_diff(&moved.to_flat(), &joints.translated(&t).to_flat()));
        let k = rng.random_range(0.25..4.0);
        let scaled = LiePose {
            root_translation: lie::scale(&pose.root_translation, k),
            ..pose.clone()
        };
        let scaled = forward_kinematics(&scaled, &skeleton.scale_uniform(k).unwrap()).unwrap();
        let expected: Vec<f64> = joints.to_flat().iter().map(|v| v * k).collect();
        scaling = scaling.max(max_diff(&scaled.to_flat(), &expected));
    }
    let t = start.elapsed();
    outcome(
        bones <= 1e-9 && shift <= 1e-9 && scaling <= 1e-9 && within(t, 5.0),
        format!("bone length {bones:.2e}, translation {shift:.2e}, scaling {scaling:.2e} (all ≤ 1e-9), {t:.2?}"),
    )
}

fn ik_fk_round_trip() -> Outcome {
    let start = Instant::now();
    let skeleton = Skeleton::default_human();
    let data = synthesize_dataset(&default_specs(), 50, &skeleton, 12.0, &mut rng_from_seed(103)).unwrap();
    let prepared = preprocess(&data).unwrap();
    let motions: Vec<_> = prepared.train.iter().chain(&prepared.test).collect();
    let worst = motions
        .iter()
        .map(|m| round_trip_error(m, &skeleton).unwrap())
        .fold(0.0f64, f64::max);
    let t = start.elapsed();
    outcome(
        motions.len() == 200 && worst < 1e-5 && within(t, 30.0),
        format!("{} motions, max error {worst:.2e} m (< 1e-5), {t:.2?}", motions.len()),
    )
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let skeleton = Skeleton::default_human();
    let data = synthesize_dataset(&default_specs(), 2, &skeleton, 12.0, &mut rng_from_seed(104)).unwrap();
    let prepared = preprocess(&data).unwrap();
    let config = VaeConfig {
        latent_dim: 4,
        hidden_dim: 8,
        encoder_out: 8,
        sequence_length: 4,
        lambda_kl: 0.5,
        ..VaeConfig::for_skeleton(&skeleton, prepared.actions.len())
    };
    let model = VaeModel::new(config, prepared.normalizer.clone(), &mut rng_from_seed(105)).unwrap();
    let windows = [
        Sequence {
            joints: &prepared.train[0].joints[3..7],
            action: prepared.train[0].action_id,
        },
        Sequence {
            joints: &prepared.train[3].joints[10..14],
            action: prepared.train[3].action_id,
        },
    ];
    let noise = draw_noise(2, 4, 4, &mut rng_from_seed(106));
    let report = grad_check(
        |tape, vars| {
            let bound = Bound::from_vars(vars.to_vec());
            Ok(sequence_loss(&model, tape, &bound, &windows, &[true, false], &noise, &skeleton)?.total)
        },
        model.params.values(),
        1e-5,
        1e-4,
    )
    .unwrap();
    let t = start.elapsed();
    outcome(
        report.passed() && within(t, 60.0),
        format!(
            "{} parameters, max relative error {:.2e} (≤ 1e-4), {t:.2?}",
            report.checked, report.max_rel_error
        ),
    )
}

fn overfit() -> Outcome {
    let start = Instant::now();
    let skeleton = Skeleton::default_human();
    let data = synthesize_dataset(&default_specs(), 4, &skeleton, 12.0, &mut rng_from_seed(107)).unwrap();
    let prepared = preprocess(&data).unwrap();
    let config = VaeConfig {
        latent_dim: 8,
        hidden_dim: 32,
        encoder_out: 32,
        sequence_length: 8,
        lambda_kl: 0.0,
        teacher_forcing: 1.0,
        ..VaeConfig::for_skeleton(&skeleton, prepared.actions.len())
    };
    let model = VaeModel::new(config, prepared.normalizer.clone(), &mut rng_from_seed(108)).unwrap();
    let mut trainer = Trainer::new(
        model,
        AdamConfig {
            lr: 3e-3,
            weight_decay: 0.0,
            ..AdamConfig::default()
        },
    );
    let motion = &prepared.train[0];
    let batch = [Sequence {
        joints: &motion.joints[10..18],
        action: motion.action_id,
    }];
    let mut rng = rng_from_seed(109);
    let mut steps = 0;
    let mut per_frame = f64::INFINITY;
    while steps < 2_000 && per_frame >= 1e-3 {
        per_frame = trainer.step(&batch, &skeleton, &mut rng).unwrap().reconstruction / 8.0;
        steps += 1;
    }
    let t = start.elapsed();
    outcome(
        per_frame < 1e-3 && within(t, 120.0),
        format!("per-frame reconstruction {per_frame:.2e} (< 1e-3) after {steps} steps, {t:.2?}"),
    )
}

fn motiongen(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_motiongen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = motiongen(args);
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Reconstruction per logged step, from a training log.
fn reconstruction_curve(log: &str) -> Vec<f64> {
    log.lines()
        .filter(|l| l.starts_with(|c: char| c.is_ascii_digit()))
        .map(|l| l.split('\t').nth(2).unwrap().parse().unwrap())
        .collect()
}

fn end_to_end(root: &Path) -> Result<Outcome, String> {
    let data_dir = root.join("data");
    let train_dir = root.join("train");
    let eval_dir = root.join("evaluate");
    run_cli(&["synth", "--n-per-action", "50", "--seed", "7", "--out", s(&data_dir)])?;
    let manifest = data_dir.join("manifest.txt");

    let start = Instant::now();
    run_cli(&["train", "--manifest", s(&manifest), "--seed", "7", "--out", s(&train_dir)])?;
    let train_time = start.elapsed();
    let log = std::fs::read_to_string(train_dir.join("train_log.tsv")).map_err(|e| e.to_string())?;
    let curve = reconstruction_curve(&log);
    let tail = &curve[curve.len() - 50..];
    let early = curve[9];
    let late = tail.iter().sum::<f64>() / tail.len() as f64;

    run_cli(&[
        "evaluate",
        "--checkpoint",
        s(&train_dir.join("final.bin")),
        "--manifest",
        s(&manifest),
        "--seed",
        "7",
        "--repetitions",
        "20",
        "--out",
        s(&eval_dir),
    ])?;
    let report = ReportFile::load(&eval_dir.join("report.txt")).map_err(|e| e.to_string())?;
    let classifier = ClassifierCheckpoint::load(&eval_dir.join("classifier.bin")).map_err(|e| e.to_string())?;
    let model = ModelCheckpoint::load(&train_dir.join("final.bin")).map_err(|e| e.to_string())?.model;
    let (_, dataset) = load_dataset(&manifest).map_err(|e| e.to_string())?;
    let data: PreparedDataset = preprocess(&dataset).map_err(|e| e.to_string())?;
    let classes = data.actions.len();
    let length = model.config.sequence_length;

    let actions: Vec<usize> = (0..200).map(|i| i % classes).collect();
    let generated = generate_batch(&model, &actions, length, &data.skeleton, &mut rng_from_seed(71))
        .map_err(|e| e.to_string())?;
    let rows: Vec<Vec<Vec<f64>>> = generated
        .iter()
        .map(|m| m.joints.iter().map(|p| p.to_flat()).collect())
        .collect();
    let motions: Vec<&[Vec<f64>]> = rows.iter().map(Vec::as_slice).collect();
    let c = &classifier.classifier;
    let accuracy = recognition_accuracy(c, &motions, &actions).map_err(|e| e.to_string())?;

    let features = c.extract_many(&motions).map_err(|e| e.to_string())?;
    let (real, real_labels) = sample_real(&data.test, 200, length, &mut rng_from_seed(72));
    let real_features = c.extract_many(&real).map_err(|e| e.to_string())?;
    let deranged: Vec<usize> = actions.iter().map(|a| (a + 1) % classes).collect();
    let matched_fid = class_conditional_fid(&features, &actions, &real_features, &real_labels, classes)
        .map_err(|e| e.to_string())?;
    let shuffled_fid = class_conditional_fid(&features, &deranged, &real_features, &real_labels, classes)
        .map_err(|e| e.to_string())?;

    let mm = report.get("generated", "multimodality").ok_or("report lacks multimodality")?;
    let checks = [
        (
            "classifier",
            classifier.test_accuracy >= 0.95,
            format!("classifier held-out accuracy {:.3} (≥ 0.95)", classifier.test_accuracy),
        ),
        ("a", accuracy >= 0.80, format!("(a) generated accuracy {accuracy:.3} (≥ 0.80)")),
        (
            "b",
            matched_fid < shuffled_fid,
            format!("(b) FID matched {matched_fid:.3} < shuffled {shuffled_fid:.3}"),
        ),
        (
            "c",
            report.repetitions == 20 && mm.mean - mm.ci95 > 0.0,
            format!("(c) multimodality {:.3} ± {:.3} over {} repetitions", mm.mean, mm.ci95, report.repetitions),
        ),
        (
            "time",
            within(train_time, 600.0),
            format!("training {} steps in {train_time:.1?} (< 10 min)", curve.len()),
        ),
        (
            "curve",
            early >= 10.0 * late,
            format!("reconstruction {early:.3} at step 10 -> {late:.4} at the end (≥ 10× drop)"),
        ),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = checks.iter().map(|c| c.2.as_str()).collect::<Vec<_>>().join("; ");
    Ok(outcome(failed.is_empty(), detail))
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut errors = Vec::new();

    // 1-D Gaussians: (μ₁ − μ₂)² + (σ₁ − σ₂)².
    let mut rng = rng_from_seed(110);
    let mut worst_1d = 0.0f64;
    for _ in 0..200 {
        let (m1, m2) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let (s1, s2) = (rng.random_range(0.1..3.0f64), rng.random_range(0.1..3.0f64));
        let a = GaussianStats {
            mean: vec![m1],
            cov: vec![s1 * s1],
        };
        let b = GaussianStats {
            mean: vec![m2],
            cov: vec![s2 * s2],
        };
        let expected = (m1 - m2).powi(2) + (s1 - s2).powi(2);
        worst_1d = worst_1d.max((fid(&a, &b).unwrap() - expected).abs());
    }
    if worst_1d > 1e-10 {
        errors.push("1-D closed form");
    }

    // 4-D statistics against a Denman–Beavers square root.
    let mut worst_db = 0.0f64;
    for _ in 0..50 {
        let a = random_stats(4, &mut rng);
        let b = random_stats(4, &mut rng);
        let root = denman_beavers(&matmul(&a.cov, &b.cov, 4), 4);
        let tr = |m: &[f64]| (0..4).map(|i| m[i * 4 + i]).sum::<f64>();
        let mean_term: f64 = a.mean.iter().zip(&b.mean).map(|(x, y)| (x - y).powi(2)).sum();
        let expected = mean_term + tr(&a.cov) + tr(&b.cov) - 2.0 * tr(&root);
        worst_db = worst_db.max((fid(&a, &b).unwrap() - expected).abs());
    }
    if worst_db > 1e-8 {
        errors.push("iterative square root");
    }

    // Diversity and multimodality on tiny sets against exhaustive expectations.
    let runs = 4000;
    let points: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 4.0]];
    let (div_expected, div_var) = exhaustive(&points, 2);
    let sigma = (div_var / runs as f64).sqrt();
    let mut drng = rng_from_seed(111);
    let div_mean = (0..runs).map(|_| diversity(&points, 2, &mut drng).unwrap()).sum::<f64>() / runs as f64;
    if (div_mean - div_expected).abs() > 3.0 * sigma {
        errors.push("diversity expectation");
    }
    let mut all = points.clone();
    all.extend([vec![10.0, 0.0], vec![10.0, 1.0]]);
    let labels = [0usize, 0, 0, 1, 1];
    let (m1, v1) = exhaustive(&all[3..], 2);
    let mm_expected = 0.5 * (div_expected + m1);
    let mm_sigma = (0.25 * (div_var + v1) / runs as f64).sqrt();
    let mm_mean = (0..runs).map(|_| multimodality(&all, &labels, 2, 2, &mut drng).unwrap()).sum::<f64>() / runs as f64;
    if (mm_mean - mm_expected).abs() > 3.0 * mm_sigma {
        errors.push("multimodality expectation");
    }
    let same = fid_between(&points, &points).unwrap();
    if same.abs() > 1e-10 {
        errors.push("self FID");
    }
    let t = start.elapsed();
    outcome(
        errors.is_empty() && within(t, 30.0),
        format!(
            "1-D {worst_1d:.1e}, Denman–Beavers {worst_db:.1e}, diversity {div_mean:.3} vs {div_expected:.3}, \
             multimodality {mm_mean:.3} vs {mm_expected:.3}, {t:.2?}{}",
            if errors.is_empty() { String::new() } else { format!("; failed: {}", errors.join(", ")) }
        ),
    )
}

/// Mean and variance of the paired distance between two independent ordered
/// draws of `size` distinct points, over every equally likely outcome.
fn exhaustive(points: &[Vec<f64>], size: usize) -> (f64, f64) {
    fn draws(n: usize, size: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == size {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if prefix.contains(&i) {
                continue;
            }
            prefix.push(i);
            draws(n, size, prefix, out);
            prefix.pop();
        }
    }
    let mut all = Vec::new();
    draws(points.len(), size, &mut Vec::new(), &mut all);
    let values: Vec<f64> = all
        .iter()
        .flat_map(|a| all.iter().map(move |b| (a, b)))
        .map(|(a, b)| a.iter().zip(b).map(|(&i, &j)| dist(&points[i], &points[j])).sum::<f64>() / size as f64)
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
    (mean, var)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn random_stats(n: usize, rng: &mut Rng) -> GaussianStats {
    let m: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut cov = matmul(&m, &transpose(&m, n), n);
    (0..n).for_each(|i| cov[i * n + i] += 0.1);
    GaussianStats {
        mean: (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
        cov,
    }
}

fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    (0..n * n).map(|k| a[(k % n) * n + k / n]).collect()
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i * n + j] += a[i * n + k] * b[k * n + j];
            }
        }
    }
    out
}

fn inverse(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut inv: Vec<f64> = (0..n * n).map(|k| if k % (n + 1) == 0 { 1.0 } else { 0.0 }).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x * n + c].abs().total_cmp(&m[y * n + c].abs())).unwrap();
        for j in 0..n {
            m.swap(c * n + j, p * n + j);
            inv.swap(c * n + j, p * n + j);
        }
        let d = m[c * n + c];
        for j in 0..n {
            m[c * n + j] /= d;
            inv[c * n + j] /= d;
        }
        for r in (0..n).filter(|&r| r != c) {
            let f = m[r * n + c];
            for j in 0..n {
                m[r * n + j] -= f * m[c * n + j];
                inv[r * n + j] -= f * inv[c * n + j];
            }
        }
    }
    inv
}

/// Principal square root by the Denman–Beavers iteration.
fn denman_beavers(a: &[f64], n: usize) -> Vec<f64> {
    let mut y = a.to_vec();
    let mut z: Vec<f64> = (0..n * n).map(|k| if k % (n + 1) == 0 { 1.0 } else { 0.0 }).collect();
    for _ in 0..100 {
        let (yi, zi) = (inverse(&y, n), inverse(&z, n));
        let next_y: Vec<f64> = y.iter().zip(&zi).map(|(a, b)| 0.5 * (a + b)).collect();
        let next_z: Vec<f64> = z.iter().zip(&yi).map(|(a, b)| 0.5 * (a + b)).collect();
        let change = max_diff(&next_y, &y);
        y = next_y;
        z = next_z;
        if change < 1e-15 {
            break;
        }
    }
    y
}

/// Every file under `dir`, keyed by relative path.
fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

const TINY: &str = "seed = 5
[model]
latent_dim = 4
hidden_dim = 8
encoder_out = 8
sequence_length = 8
[training]
steps = 20
batch_size = 4
checkpoint_every = 10
[evaluation]
n_samples = 16
diversity_subset = 4
multimodality_subset = 2
repetitions = 3
[classifier]
hidden_dim = 8
steps = 20
";

/// Runs every command into `run`, using paths inside `run` only.
fn all_commands(run: &Path) -> Result<(), String> {
    let config = run.join("tiny.toml");
    std::fs::create_dir_all(run).map_err(|e| e.to_string())?;
    std::fs::write(&config, TINY).map_err(|e| e.to_string())?;
    let data = run.join("synth");
    run_cli(&["synth", "--n-per-action", "4", "--seed", "11", "--out", s(&data)])?;
    let manifest = data.join("manifest.txt");
    let train = run.join("train");
    run_cli(&["train", "--config", s(&config), "--manifest", s(&manifest), "--out", s(&train)])?;
    let ckpt = train.join("final.bin");
    let generated = run.join("generate");
    run_cli(&[
        "generate", "--checkpoint", s(&ckpt), "--action", "reach", "--count", "3", "--seed", "4", "--bone-scale",
        "1.5", "--out", s(&generated),
    ])?;
    run_cli(&["evaluate", "--checkpoint", s(&ckpt), "--config", s(&config), "--manifest", s(&manifest), "--out", s(&run.join("evaluate"))])?;
    let motion = data.join("motions/wave_000.txt");
    let lie = run.join("convert/wave_000.lie.txt");
    run_cli(&["convert", "--input", s(&motion), "--to", "lie", "--out", s(&lie)])?;
    run_cli(&["convert", "--input", s(&lie), "--to", "joints", "--out", s(&run.join("convert/wave_000.txt"))])?;
    run_cli(&["render", "--input", s(&generated.join("reach_000.lie.txt")), "--skeleton", s(&generated.join("skeleton.txt")), "--every", "2", "--out", s(&run.join("render/reach.svg"))])?;
    Ok(())
}

fn determinism(root: &Path) -> Result<Outcome, String> {
    let (a, b) = (root.join("a"), root.join("b"));
    all_commands(&a)?;
    all_commands(&b)?;
    let (ta, tb) = (tree(&a), tree(&b));
    let differing: Vec<String> = ta
        .iter()
        .filter(|(k, v)| tb.get(*k) != Some(*v))
        .map(|(k, _)| k.display().to_string())
        .collect();
    let same_set = ta.keys().eq(tb.keys());
    Ok(outcome(
        same_set && differing.is_empty() && ta.len() > 20,
        format!(
            "{} files from synth, train, generate, evaluate, convert and render compared{}",
            ta.len(),
            if differing.is_empty() { String::new() } else { format!("; differ: {}", differing.join(", ")) }
        ),
    ))
}

fn main() {
    let root = tempfile::tempdir().expect("temporary directory");
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Check)> = vec![
        ("Lie round trip", Box::new(lie_round_trip)),
        ("FK structural guarantees", Box::new(fk_structure)),
        ("IK/FK round trip", Box::new(ik_fk_round_trip)),
        ("full-loss gradient check", Box::new(gradient_check)),
        ("overfit one sequence", Box::new(overfit)),
        (
            "end-to-end desk run",
            Box::new(|| end_to_end(&root.path().join("e2e")).unwrap_or_else(|e| outcome(false, e))),
        ),
        ("metric oracles", Box::new(metric_oracles)),
        (
            "CLI determinism",
            Box::new(|| determinism(&root.path().join("det")).unwrap_or_else(|e| outcome(false, e))),
        ),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| outcome(false, "panicked"));
        if !result.passed {
            failures += 1;
        }
        println!(
            "{} {}. {name}: {}",
            if result.passed { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
