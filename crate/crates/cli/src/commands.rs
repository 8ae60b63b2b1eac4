//! One function per subcommand. Each returns a one-line JSON summary that
//! the binary prints on success.

use std::fs;
use std::path::Path;
use std::time::Instant;

use artipose::action::{
    accuracy, action_train_config, confusion_matrix, extract_features, motion_sequence, normalize_sequence, train_action, ActionClass,
    FeatureMode, MOTION_CLASSES, NORMALIZED_LEN,
};
use artipose::cascade::{train_cascade, train_metric_with_cascade, Cascade, CascadeConfig, EstimateResult, LearnedMetric};
use artipose::eval::{average_joint_error, ced, mean};
use artipose::lie::BrownianParams;
use artipose::rng::{derive_seed, stream};
use artipose::synth::{render_sample, smooth_sequence, synth_sample, PoseRanges, Sample};
use artipose::tracker::{Tracker, TrackerConfig};
use artipose::{CameraModel, JointPositions, SkeletalModel};
use serde::Serialize;
use serde_json::json;

use crate::cli::*;
use crate::error::{CliError, Result};
use crate::formats::bundle::{self, ActionHeader};
use crate::formats::dataset::{self, positions_json, DatasetKind, Frame, Manifest, PoseJson};
use crate::formats::sequence::{self, NamedSequence};
use crate::formats::{read_json, write_atomic, write_csv, write_json};

/// CED thresholds written by `estimate` and `eval`, mm.
pub fn ced_thresholds() -> Vec<f64> {
    (0..=100).map(|i| i as f64 * 0.5).collect()
}

pub fn run(cli: Cli) -> Result<String> {
    let threads = match (&cli.command, cli.threads) {
        (_, Some(n)) => n,
        (Command::Bench(_), None) => 1,
        (_, None) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::SynthGen(a) => synth_gen(&a),
        Command::TrainPose(a) => train_pose(&a),
        Command::Estimate(a) => estimate(&a),
        Command::Track(a) => track(&a),
        Command::TrainAction(a) => train_action_cmd(&a),
        Command::Recognize(a) => recognize(&a),
        Command::Eval(a) => eval(&a),
        Command::Bench(a) => bench(&a, threads),
    })
}

/// A preset by name, or a skeletal model JSON file.
pub fn load_model(preset: &str) -> Result<SkeletalModel> {
    if let Some(m) = SkeletalModel::preset(preset) {
        return Ok(m);
    }
    let path = Path::new(preset);
    if !path.exists() {
        return Err(CliError::Usage(format!("unknown preset `{preset}` (expected fish, mouse, hand or a model file)")));
    }
    let m: SkeletalModel = read_json(path)?;
    m.revalidate().map_err(|e| CliError::corrupt(path, e))
}

fn read_bytes(path: &Path, missing: fn(std::path::PathBuf) -> CliError) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::read(path, e, missing))
}

pub fn load_pose_bundle(path: &Path) -> Result<(Cascade, LearnedMetric)> {
    let bytes = read_bytes(path, CliError::ModelNotFound)?;
    bundle::decode_pose(&bytes).map_err(|e| CliError::corrupt(path, e))
}

fn f(v: f64) -> String {
    format!("{v}")
}

fn synth_gen(a: &SynthGenArgs) -> Result<String> {
    if !(a.noise_mm >= 0.0) {
        return Err(CliError::Usage("--noise-mm must be non-negative".into()));
    }
    let model = load_model(&a.preset)?;
    let camera = CameraModel::PRESET;
    let ranges = PoseRanges::for_model(&model);
    fs::create_dir_all(&a.out).map_err(|e| CliError::io(&a.out, e))?;
    if a.kind == SynthKind::Actions {
        let seqs: Vec<NamedSequence> = (0..a.count)
            .map(|i| {
                let class = (i % MOTION_CLASSES.len()) as u32;
                let mut rng = stream(a.seed, "motion", &[i as u64]);
                let s = motion_sequence(&model, class, &mut rng);
                NamedSequence { poses: s.poses, timestamps: s.timestamps, label: Some(MOTION_CLASSES[class as usize].to_string()) }
            })
            .collect();
        let path = a.out.join("sequences.jsonl");
        sequence::write(&path, &seqs)?;
        return Ok(json!({"command": "synth-gen", "kind": "actions", "sequences": a.count, "path": path}).to_string());
    }
    let samples: Vec<Sample> = match a.kind {
        SynthKind::Images => {
            use rayon::prelude::*;
            (0..a.count).into_par_iter().map(|i| synth_sample(&model, &ranges, &camera, a.noise_mm, a.seed, i as u64)).collect()
        }
        _ => {
            let mut rng = stream(a.seed, "sequence", &[]);
            let poses = smooth_sequence(&model, &ranges, a.count, a.speed, &mut rng);
            poses
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut rng = stream(a.seed, "sequence-noise", &[i as u64]);
                    render_sample(&model, p, &camera, &ranges.radii, a.noise_mm, &mut rng)
                        .map_err(|e| CliError::Pipeline(format!("frame {i}: {e}")))
                })
                .collect::<Result<_>>()?
        }
    };
    for (i, s) in samples.iter().enumerate() {
        dataset::write_frame(&a.out, i, &camera, s)?;
    }
    let manifest = Manifest {
        kind: if a.kind == SynthKind::Images { DatasetKind::Images } else { DatasetKind::Sequence },
        preset: a.preset.clone(),
        model,
        camera,
        count: a.count,
        noise_mm: a.noise_mm,
        seed: a.seed,
        frames: (0..a.count).map(dataset::stem).collect(),
    };
    write_json(&a.out.join(dataset::MANIFEST), &manifest)?;
    Ok(json!({"command": "synth-gen", "frames": a.count, "out": a.out}).to_string())
}

fn ground_truth(frames: &[Frame], dir: &Path) -> Result<Vec<Sample>> {
    frames
        .iter()
        .map(|fr| fr.sample().ok_or_else(|| CliError::corrupt(dir.join(format!("{}.json", fr.stem)), "frame has no ground truth")))
        .collect()
}

fn train_pose(a: &TrainPoseArgs) -> Result<String> {
    let (manifest, frames) = dataset::read_dataset(&a.data)?;
    let samples = ground_truth(&frames, &a.data)?;
    let mut config = CascadeConfig::for_preset(&manifest.model.name);
    if let Some(r) = a.rounds {
        config.rounds = r;
    }
    if let Some(k) = a.train_poses {
        config.training_poses = k;
    }
    if let Some(m) = a.features {
        config.ik.features_per_node = m;
        config.metric.features_per_node = m;
    }
    config.ik.energy = a.energy_mode.into();
    config.metric.energy = a.energy_mode.into();
    if config.rounds == 0 || config.training_poses == 0 {
        return Err(CliError::Usage("--rounds and --train-poses must be positive".into()));
    }
    let t = Instant::now();
    let (cascade, report) = train_cascade(&samples, &manifest.model, &manifest.camera, &config, derive_seed(a.seed, "cascade", &[]))
        .map_err(|e| CliError::Pipeline(e.to_string()))?;
    let (metric, _) = train_metric_with_cascade(&samples, &cascade, &config, derive_seed(a.seed, "metric", &[]))
        .map_err(|e| CliError::Pipeline(e.to_string()))?;
    write_atomic(&a.out, &bundle::encode_pose(&cascade, &metric))?;
    Ok(json!({
        "command": "train-pose",
        "images": samples.len(),
        "ik_examples": report.ik_examples,
        "dropped_labels": report.dropped_labels,
        "training_error": report.training_error.last(),
        "seconds": t.elapsed().as_secs_f64(),
        "out": a.out,
    })
    .to_string())
}

#[derive(Serialize)]
struct EstimateJson<'a> {
    frame: &'a str,
    pose: PoseJson,
    positions: Vec<[f64; 3]>,
    predicted_error: f64,
    best_index: usize,
    candidates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<f64>,
}

fn estimate_frame(cascade: &Cascade, metric: &LearnedMetric, frame: &Frame, kt: usize, rounds: usize, seed: u64, index: usize) -> Result<EstimateResult> {
    let mut rng = stream(seed, "estimate", &[index as u64]);
    cascade
        .estimate_with_rounds(&frame.image, metric, kt, rounds, &mut rng)
        .map_err(|e| CliError::Pipeline(format!("frame {}: {e}", frame.stem)))
}

fn error_of(est: &JointPositions, truth: Option<&JointPositions>) -> Option<f64> {
    truth.and_then(|t| average_joint_error(est, t).ok())
}

fn check_compatible(cascade: &Cascade, manifest: &Manifest, data: &Path) -> Result<()> {
    if cascade.model.joint_count() != manifest.model.joint_count() {
        return Err(CliError::corrupt(data, "dataset skeleton does not match the model"));
    }
    Ok(())
}

fn estimate(a: &EstimateArgs) -> Result<String> {
    let (cascade, metric) = load_pose_bundle(&a.model)?;
    let (manifest, frames) = dataset::read_dataset(&a.data)?;
    check_compatible(&cascade, &manifest, &a.data)?;
    let kt = a.kt.unwrap_or(cascade.config.initial.count);
    let rounds = a.rounds.unwrap_or(cascade.rounds());
    let results = frames
        .iter()
        .enumerate()
        .map(|(i, fr)| estimate_frame(&cascade, &metric, fr, kt, rounds, a.seed, i))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (fr, r) in frames.iter().zip(&results) {
        let error = error_of(&r.best.positions, fr.positions.as_ref());
        let out = EstimateJson {
            frame: &fr.stem,
            pose: PoseJson::from(&r.best.pose),
            positions: positions_json(&r.best.positions),
            predicted_error: r.best.predicted_error,
            best_index: r.best_index,
            candidates: r.candidates.len(),
            error,
        };
        write_json(&a.out.join(format!("{}.json", fr.stem)), &out)?;
        rows.push(vec![fr.stem.clone(), error.map(f).unwrap_or_default(), f(r.best.predicted_error)]);
        errors.extend(error);
    }
    write_csv(&a.out.join("summary.csv"), &["frame", "error_mm", "predicted_error_mm"], &rows)?;
    let m = (!errors.is_empty()).then(|| mean(&errors));
    if m.is_some() {
        write_ced(&a.out.join("ced.csv"), &errors)?;
    }
    Ok(json!({"command": "estimate", "frames": frames.len(), "kt": kt, "rounds": rounds, "mean_error_mm": m, "out": a.out}).to_string())
}

fn write_ced(path: &Path, errors: &[f64]) -> Result<()> {
    let rows: Vec<Vec<String>> = ced(errors, &ced_thresholds()).into_iter().map(|(t, p)| vec![f(t), f(p)]).collect();
    write_csv(path, &["threshold_mm", "fraction"], &rows)
}

#[derive(Serialize)]
struct TrackJson<'a> {
    frame: &'a str,
    pose: PoseJson,
    positions: Vec<[f64; 3]>,
    predicted_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<f64>,
}

fn track(a: &TrackArgs) -> Result<String> {
    let (cascade, metric) = load_pose_bundle(&a.model)?;
    let (manifest, frames) = dataset::read_dataset(&a.data)?;
    check_compatible(&cascade, &manifest, &a.data)?;
    if frames.is_empty() {
        return Err(CliError::corrupt(&a.data, "sequence has no frames"));
    }
    let r2 = a.rot_std * a.rot_std;
    let t2 = a.trans_std * a.trans_std;
    let brownian = BrownianParams::diagonal(1.0, [r2, r2, r2, t2, t2, t2]).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut config = TrackerConfig::new(a.kr, a.sigma, brownian).map_err(|e| CliError::Usage(e.to_string()))?;
    config.rounds = a.rounds;
    let kt = a.kt.unwrap_or(cascade.config.initial.count);
    let first = estimate_frame(&cascade, &metric, &frames[0], kt, cascade.rounds(), derive_seed(a.seed, "track-init", &[]), 0)?;
    let mut tracker = Tracker::new(config, &first.best.pose);
    let mut rng = stream(a.seed, "track", &[]);
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, fr) in frames.iter().enumerate() {
        let (pose, positions, predicted) = if i == 0 {
            (first.best.pose.clone(), first.best.positions.clone(), first.best.predicted_error)
        } else {
            let e = tracker.step(&fr.image, &cascade, &metric, &mut rng);
            (e.pose, e.positions, e.predicted_error)
        };
        let error = error_of(&positions, fr.positions.as_ref());
        let out = TrackJson { frame: &fr.stem, pose: PoseJson::from(&pose), positions: positions_json(&positions), predicted_error: predicted, error };
        write_json(&a.out.join(format!("{}.json", fr.stem)), &out)?;
        rows.push(vec![fr.stem.clone(), error.map(f).unwrap_or_default(), f(predicted)]);
        errors.extend(error);
    }
    write_csv(&a.out.join("track.csv"), &["frame", "error_mm", "predicted_error_mm"], &rows)?;
    let m = (!errors.is_empty()).then(|| mean(&errors));
    Ok(json!({"command": "track", "frames": frames.len(), "degenerate_steps": tracker.degenerate_steps, "mean_error_mm": m, "out": a.out}).to_string())
}

/// The catalogue covering every label, else the sorted distinct labels.
pub fn classes_for(labels: &[&str]) -> Vec<ActionClass> {
    for cat in [ActionClass::motion_catalogue(), ActionClass::fish_catalogue()] {
        if labels.iter().all(|l| cat.iter().any(|c| c.name == *l)) {
            return cat;
        }
    }
    let mut names: Vec<&str> = labels.to_vec();
    names.sort_unstable();
    names.dedup();
    names.iter().enumerate().map(|(i, n)| ActionClass { id: i as u32, name: n.to_string() }).collect()
}

fn features_of(model: &SkeletalModel, seqs: &[NamedSequence], mode: FeatureMode, compact: bool, path: &Path) -> Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    seqs.par_iter()
        .enumerate()
        .map(|(i, s)| {
            let n = normalize_sequence(&s.to_sequence(None), NORMALIZED_LEN).map_err(|e| CliError::corrupt(path, format!("sequence {i}: {e}")))?;
            extract_features(model, &n, mode, compact).map_err(|e| CliError::corrupt(path, format!("sequence {i}: {e}")))
        })
        .collect()
}

fn train_action_cmd(a: &TrainActionArgs) -> Result<String> {
    let model = load_model(&a.preset)?;
    let seqs = sequence::read(&a.data)?;
    let labels: Vec<&str> = seqs
        .iter()
        .enumerate()
        .map(|(i, s)| s.label.as_deref().ok_or_else(|| CliError::corrupt(&a.data, format!("sequence {i} has no label"))))
        .collect::<Result<_>>()?;
    if labels.is_empty() {
        return Err(CliError::corrupt(&a.data, "no sequences"));
    }
    let classes = classes_for(&labels);
    let ids: Vec<u32> = labels.iter().map(|l| classes.iter().find(|c| c.name == *l).expect("class").id).collect();
    let mode = match a.mode {
        ModeArg::Tangent => FeatureMode::Tangent,
        ModeArg::JointPosition => FeatureMode::JointPosition,
    };
    let compact = !a.full;
    let feats = features_of(&model, &seqs, mode, compact, &a.data)?;
    let (clf, _) = train_action(&feats, &ids, classes.len(), mode, compact, &action_train_config(), derive_seed(a.seed, "action", &[]))
        .map_err(|e| CliError::Pipeline(e.to_string()))?;
    let header = ActionHeader { mode, compact, feature_len: clf.feature_len, classes, model: model.name.clone() };
    write_atomic(&a.out, &bundle::encode_action(&header, &clf))?;
    Ok(json!({"command": "train-action", "sequences": seqs.len(), "feature_len": clf.feature_len, "out": a.out}).to_string())
}

fn recognize(a: &RecognizeArgs) -> Result<String> {
    let bytes = read_bytes(&a.model, CliError::ModelNotFound)?;
    let (header, clf) = bundle::decode_action(&bytes).map_err(|e| CliError::corrupt(&a.model, e))?;
    let model = load_model(&a.preset)?;
    let seqs = sequence::read(&a.data)?;
    let feats = features_of(&model, &seqs, header.mode, header.compact, &a.data)?;
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    let mut pred = Vec::new();
    for (i, x) in feats.iter().enumerate() {
        let (c, _) = clf.classify(x).map_err(|e| CliError::corrupt(&a.data, format!("sequence {i}: {e}")))?;
        let label = seqs[i].label.clone().unwrap_or_default();
        if let Some(t) = header.classes.iter().find(|k| k.name == label) {
            truth.push(t.id);
            pred.push(c);
        }
        rows.push(vec![i.to_string(), label, header.classes[c as usize].name.clone()]);
    }
    write_csv(&a.out.join("predictions.csv"), &["sequence", "truth", "predicted"], &rows)?;
    let m = confusion_matrix(&truth, &pred, header.classes.len());
    let mut head: Vec<&str> = vec!["truth\\predicted"];
    head.extend(header.classes.iter().map(|c| c.name.as_str()));
    let crow: Vec<Vec<String>> = m
        .iter()
        .zip(&header.classes)
        .map(|(r, c)| std::iter::once(c.name.clone()).chain(r.iter().map(|v| v.to_string())).collect())
        .collect();
    write_csv(&a.out.join("confusion.csv"), &head, &crow)?;
    let acc = (!truth.is_empty()).then(|| accuracy(&truth, &pred));
    Ok(json!({"command": "recognize", "sequences": seqs.len(), "accuracy": acc, "out": a.out}).to_string())
}

#[derive(serde::Deserialize)]
struct PredJson {
    frame: String,
    positions: Vec<[f64; 3]>,
}

fn eval(a: &EvalArgs) -> Result<String> {
    let (manifest, frames) = dataset::read_dataset(&a.truth)?;
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for fr in &frames {
        let path = a.pred.join(format!("{}.json", fr.stem));
        let p: PredJson = read_json(&path)?;
        if p.frame != fr.stem {
            return Err(CliError::corrupt(&path, "frame name does not match"));
        }
        let truth = fr.positions.as_ref().ok_or_else(|| CliError::corrupt(a.truth.join(format!("{}.json", fr.stem)), "frame has no ground truth"))?;
        let e = average_joint_error(&dataset::positions_from_json(&p.positions), truth).map_err(|e| CliError::corrupt(&path, e))?;
        rows.push(vec![fr.stem.clone(), f(e)]);
        errors.push(e);
    }
    write_csv(&a.out.join("errors.csv"), &["frame", "error_mm"], &rows)?;
    write_ced(&a.out.join("ced.csv"), &errors)?;
    let m = mean(&errors);
    write_json(&a.out.join("report.json"), &json!({"frames": errors.len(), "mean_error_mm": m, "preset": manifest.preset}))?;
    Ok(json!({"command": "eval", "frames": errors.len(), "mean_error_mm": m, "out": a.out}).to_string())
}

fn bench(a: &BenchArgs, threads: usize) -> Result<String> {
    let (cascade, metric) = load_pose_bundle(&a.model)?;
    let ranges = PoseRanges::for_model(&cascade.model);
    let rounds = a.rounds.unwrap_or(cascade.rounds());
    let frames: Vec<Sample> =
        (0..a.frames).map(|i| synth_sample(&cascade.model, &ranges, &cascade.camera, a.noise_mm, derive_seed(a.seed, "bench", &[]), i as u64)).collect();
    let mut errors = Vec::with_capacity(frames.len());
    let t = Instant::now();
    for (i, s) in frames.iter().enumerate() {
        let mut rng = stream(a.seed, "estimate", &[i as u64]);
        let r = cascade
            .estimate_with_rounds(&s.image, &metric, a.kt, rounds, &mut rng)
            .map_err(|e| CliError::Pipeline(e.to_string()))?;
        errors.push(average_joint_error(&r.best.positions, &s.positions).unwrap_or(f64::NAN));
    }
    let wall = t.elapsed().as_secs_f64();
    let fps = if wall > 0.0 { a.frames as f64 / wall } else { f64::INFINITY };
    let threads = if threads == 0 { rayon::current_num_threads() } else { threads };
    if let Some(dir) = &a.out {
        write_csv(
            &dir.join("bench.csv"),
            &["preset", "frames", "kt", "rounds", "threads", "wall_s", "fps", "mean_error_mm"],
            &[vec![cascade.model.name.clone(), a.frames.to_string(), a.kt.to_string(), rounds.to_string(), threads.to_string(), f(wall), f(fps), f(mean(&errors))]],
        )?;
    }
    Ok(json!({
        "command": "bench",
        "preset": cascade.model.name,
        "frames": a.frames,
        "kt": a.kt,
        "rounds": rounds,
        "threads": threads,
        "wall_s": wall,
        "fps": fps,
        "mean_error_mm": mean(&errors),
    })
    .to_string())
}
