use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use m3t_core::bodymodel::{load_body_model, save_body_model, toy_body_model, BodyModel, PoseParams};
use m3t_core::fitting::{
    refine_sequence, toy_fit_problem, toy_ground_truth, FitProblem, FitWeights, KeypointSequence,
    OrthoCamera,
};
use m3t_core::metrics::{
    bleu4, rouge_l, sequence_metrics, BleuSmoothing, JointSequence, MetricReport, KEY_BLEU4,
    KEY_ROUGE_L, ROUGE_BETA_SQ,
};
use m3t_core::motionvae::{
    face_dataset, load_motion, sinusoid_dataset, save_motion, train as train_vae, vae_from_json,
    vae_to_json, FaceGenerator, TrainOptions, Vae, VaeConfig,
};
use m3t_core::quantizers::{utilization, LevelSpec, TokenStream};
use m3t_core::tokencodec::{
    build_vocabulary, parse_streams, serialize_streams, steps_from_streams, streams_from_steps,
    TokenDocument, Vocabulary,
};
use m3t_core::{Error, Modality, Result, TokenizerFamily};

use crate::args::*;
use crate::files::*;
use crate::jobs::map_ordered;

const DATA_DIR_VAR: &str = "M3T_DATA_DIR";
const VQ_BETA: f64 = 0.25;

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn family_from_name(name: &str) -> Result<TokenizerFamily> {
    match name {
        "body" => Ok(TokenizerFamily::Body),
        "hand" => Ok(TokenizerFamily::Hand),
        "face" => Ok(TokenizerFamily::Face),
        other => Ok(other.parse::<Modality>()?.family()),
    }
}

/// Network for `modality` at the chosen scale, with the preset's quantizer.
pub fn vae_config(preset: Option<&str>, modality: Modality, scale: Scale) -> Result<VaeConfig> {
    let family = modality.family();
    let base = match scale {
        Scale::Desk => VaeConfig::desk(family),
        Scale::Paper => VaeConfig::paper(family),
    };
    let Some(preset) = preset else {
        return Ok(base);
    };
    let (kind, name) = preset
        .split_once('-')
        .ok_or_else(|| usage(format!("unknown preset `{preset}`")))?;
    let preset_family = family_from_name(name)
        .map_err(|_| usage(format!("unknown preset `{preset}`")))?;
    if preset_family != family {
        return Err(usage(format!(
            "preset `{preset}` is for {} motion, not {}",
            preset_family.name(),
            modality.name()
        )));
    }
    match kind {
        "fsq" if matches!(name, "body" | "hand" | "face") => Ok(base),
        "vq" => Ok(base.with_vq(VQ_BETA)),
        _ => Err(usage(format!("unknown preset `{preset}`"))),
    }
}

fn train_options(scale: Scale, epochs: Option<usize>, seed: u64) -> TrainOptions {
    let mut opts = match scale {
        Scale::Desk => TrainOptions::default(),
        Scale::Paper => TrainOptions::paper(),
    };
    if let Some(e) = epochs {
        // keep the warm-up share of the default schedule
        opts.warmup_epochs = (opts.warmup_epochs * e / opts.epochs).max(1);
        opts.epochs = e;
    }
    opts.seed = seed;
    opts
}

fn dataset_path(arg: &Option<PathBuf>, modality: Modality) -> Result<PathBuf> {
    if let Some(p) = arg {
        return Ok(p.clone());
    }
    match std::env::var_os(DATA_DIR_VAR) {
        Some(root) => Ok(Path::new(&root).join("motion").join(modality.name())),
        None => Err(usage(format!(
            "no dataset: pass --data or set {DATA_DIR_VAR}"
        ))),
    }
}

pub fn train(global: &GlobalArgs, a: &TrainArgs) -> Result<()> {
    let config = vae_config(a.preset.as_deref(), a.modality, global.scale)?;
    let data = load_dataset(&dataset_path(&a.data, a.modality)?)?;
    let validation = match &a.validation {
        Some(p) => load_dataset(p)?,
        None => Vec::new(),
    };
    let opts = train_options(global.scale, a.epochs, global.seed);
    let mut vae = Vae::new(config, global.seed)?;
    let report = train_vae(&mut vae, &data, &validation, &opts)?;

    write_text(&a.output, &vae_to_json(&vae)?)?;
    let mut trace = String::new();
    for (e, loss) in report.epoch_losses.iter().enumerate() {
        let _ = write!(trace, "{e}\t{loss:.10e}");
        if let Some(v) = report.validation_losses.get(e) {
            let _ = write!(trace, "\t{v:.10e}");
        }
        trace.push('\n');
    }
    let trace_path = a.trace.clone().unwrap_or_else(|| default_trace(&a.output));
    write_text(&trace_path, &trace)?;
    println!(
        "trained {} tokenizer on {} sequences for {} epochs; best epoch {}",
        a.modality,
        data.len(),
        opts.epochs,
        report.best_epoch.map_or("-".into(), |b| b.to_string())
    );
    Ok(())
}

/// Token vocabulary with preset codebook sizes, except the checkpoint's own
/// family, which uses the checkpoint's size.
fn vocabulary_for(vae: &Vae) -> Result<Vocabulary> {
    let cfg = vae.config();
    let sizes = Modality::ALL.map(|m| {
        if m.family() == cfg.family {
            cfg.codebook_size()
        } else {
            LevelSpec::preset(m.family()).codebook_size()
        }
    });
    build_vocabulary::<&str, &str>(&[], &[], sizes)
}

fn tokenize_one(vae: &Vae, input: &Path) -> Result<String> {
    let motion = load_motion(input)?;
    let stream = vae.tokenize(&motion)?;
    let vocab = vocabulary_for(vae)?;
    let doc = TokenDocument {
        steps: steps_from_streams(&[stream], &vocab)?,
        eos: None,
    };
    serialize_streams(&doc, &vocab)
}

pub fn tokenize(global: &GlobalArgs, a: &TokenizeArgs) -> Result<()> {
    let ckpt = read_text(&a.checkpoint)?;
    let docs = map_ordered(
        &a.inputs,
        global.jobs,
        || vae_from_json(&ckpt),
        |vae, input| tokenize_one(vae, input),
    )?;
    if let [doc] = docs.as_slice() {
        write_text(&a.output, doc)?;
    } else {
        create_dir(&a.output)?;
        for (input, doc) in a.inputs.iter().zip(&docs) {
            let stem = input
                .file_stem()
                .ok_or_else(|| usage(format!("bad input name {}", input.display())))?;
            write_text(&a.output.join(stem).with_extension("m3t"), doc)?;
        }
    }
    println!("tokenized {} file(s)", docs.len());
    Ok(())
}

pub fn detokenize(a: &DetokenizeArgs) -> Result<()> {
    let vae = vae_from_json(&read_text(&a.checkpoint)?)?;
    let vocab = vocabulary_for(&vae)?;
    let doc = parse_streams(&read_text(&a.input)?, &vocab)?;
    let family = vae.config().family;
    let streams: Vec<TokenStream> = streams_from_steps(&doc.steps, "", &vocab)?
        .into_iter()
        .filter(|s| family.accepts(s.modality))
        .collect();
    let stream = match (a.modality, streams.as_slice()) {
        (Some(m), _) => streams
            .iter()
            .find(|s| s.modality == m)
            .ok_or_else(|| usage(format!("no {m} stream for a {family} tokenizer")))?,
        (None, [one]) => one,
        (None, []) => {
            return Err(usage(format!(
                "document has no stream a {family} tokenizer can decode"
            )))
        }
        (None, _) => return Err(usage("several streams match; pick one with --modality")),
    };
    let motion = vae.detokenize(stream, a.fps)?;
    save_motion(&a.output, &motion)?;
    println!(
        "decoded {} tokens into {} frames",
        stream.indices.len(),
        motion.n_frames()
    );
    Ok(())
}

pub fn stats(a: &StatsArgs) -> Result<()> {
    if a.inputs.is_empty() {
        return Err(usage("no token documents given"));
    }
    let sizes: [usize; 4] = a
        .sizes
        .clone()
        .try_into()
        .map_err(|_| usage("--sizes needs four values"))?;
    let vocab = build_vocabulary::<&str, &str>(&[], &[], sizes)?;
    let mut per_modality: BTreeMap<Modality, Vec<TokenStream>> = BTreeMap::new();
    for path in &a.inputs {
        let doc = parse_streams(&read_text(path)?, &vocab)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
        for s in streams_from_steps(&doc.steps, "", &vocab)? {
            per_modality.entry(s.modality).or_default().push(s);
        }
    }
    if per_modality.values().flatten().all(|s| s.indices.is_empty()) {
        return Err(usage("token documents contain no motion tokens"));
    }

    let mut summary = String::from("modality\tcodebook_size\ttotal_tokens\tused_fraction\tfrequency_sd\n");
    let mut hist = String::from("modality\tindex\tcount\n");
    for (m, streams) in &per_modality {
        let r = utilization(streams, sizes[m.index()])?;
        let _ = writeln!(
            summary,
            "{m}\t{}\t{}\t{:.6}\t{:.6}",
            r.codebook_size, r.total_tokens, r.used_fraction, r.frequency_sd
        );
        for (k, c) in r.frequency_histogram.iter().enumerate() {
            let _ = writeln!(hist, "{m}\t{k}\t{c}");
        }
    }
    let report = format!("# summary\n{summary}\n# histogram\n{hist}");
    match &a.output {
        Some(p) => write_text(p, &report),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

pub fn fit(a: &FitArgs) -> Result<()> {
    let model = load_body_model(&a.model)?;
    let problem = FitProblem {
        init_params: load_poses(&a.init)?,
        keypoints: KeypointSequence::load(&a.keypoints)?,
        camera: OrthoCamera::new(a.camera[0], [a.camera[1], a.camera[2]])?,
        weights: FitWeights {
            keypoint: a.keypoint_weight,
            acceleration: a.acceleration_weight,
            regularization: a.regularization_weight,
        },
    };
    let result = refine_sequence(&model, &problem, a.steps, a.lr)?;
    save_poses(&a.output, &result.params)?;
    let trace: String = result
        .loss_trace
        .iter()
        .enumerate()
        .map(|(i, l)| format!("{i}\t{l:.10e}\n"))
        .collect();
    write_text(&a.trace.clone().unwrap_or_else(|| default_trace(&a.output)), &trace)?;
    println!(
        "fit {} frames: loss {:.6e} -> {:.6e}",
        problem.n_frames(),
        result.loss_trace[0],
        result.loss_trace[result.loss_trace.len() - 1]
    );
    Ok(())
}

/// Joints and vertices (face region when the model marks one) per frame.
fn pose_geometry(model: &BodyModel, poses: &[PoseParams]) -> Result<(JointSequence, JointSequence)> {
    if poses.is_empty() {
        return Err(usage("pose sequence is empty"));
    }
    let (mut joints, mut verts) = (Vec::new(), Vec::new());
    for p in poses {
        p.check_dims(model.shape_dims())?;
        let out = model.lbs_forward(p)?;
        joints.push(out.joints);
        verts.push(out.vertices);
    }
    let verts = JointSequence::new(verts)?;
    let face = &model.parts().face_vertices;
    let verts = if face.is_empty() { verts } else { verts.select(face)? };
    Ok((JointSequence::new(joints)?, verts))
}

fn pair_metrics(model: &BodyModel, pred: &Path, gt: &Path) -> Result<BTreeMap<String, f64>> {
    let (pj, pv) = pose_geometry(model, &load_poses(pred)?)?;
    let (gj, gv) = pose_geometry(model, &load_poses(gt)?)?;
    sequence_metrics(&pj, &gj, Some((&pv, &gv)))
}

pub fn eval(global: &GlobalArgs, a: &EvalArgs) -> Result<()> {
    if a.pred.len() != a.gt.len() {
        return Err(usage(format!(
            "{} predictions but {} ground-truth sequences",
            a.pred.len(),
            a.gt.len()
        )));
    }
    let mut report = MetricReport::default();
    if !a.pred.is_empty() {
        let model_path = a
            .model
            .as_ref()
            .ok_or_else(|| usage("--model is required to evaluate pose sequences"))?;
        let pairs: Vec<(&PathBuf, &PathBuf)> = a.pred.iter().zip(&a.gt).collect();
        let values = map_ordered(
            &pairs,
            global.jobs,
            || load_body_model(model_path),
            |model, (p, g)| pair_metrics(model, p, g),
        )?;
        for v in values {
            report.push_sequence(v);
        }
        report.aggregate();
    }
    match (&a.hyp, &a.reference) {
        (Some(h), Some(r)) => {
            let hyps = load_sentences(h)?;
            let refs = load_sentences(r)?;
            report
                .corpus
                .insert(KEY_BLEU4.into(), bleu4(&hyps, &refs, BleuSmoothing::AddOne)?);
            report
                .corpus
                .insert(KEY_ROUGE_L.into(), rouge_l(&hyps, &refs, ROUGE_BETA_SQ)?);
        }
        (None, None) => {}
        _ => return Err(usage("--hyp and --ref go together")),
    }
    if a.pred.is_empty() && a.hyp.is_none() {
        return Err(usage("nothing to evaluate: give --pred/--gt or --hyp/--ref"));
    }
    let json = report.to_json();
    match &a.output {
        Some(p) => write_text(p, &json),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

const HYPOTHESES: &str = "the weather is nice today\nwhere is the train station\ni like to read books\n";
const REFERENCES: &str = "the weather is very nice today\nwhere is the station\ni like reading books\n";

pub fn gen_fixtures(global: &GlobalArgs, a: &GenFixturesArgs) -> Result<()> {
    let root = &a.output;
    let seed = global.seed;
    let model = toy_body_model();
    create_dir(root)?;
    save_body_model(&model, root.join("body_model.json"))?;

    for (k, m) in Modality::ALL.into_iter().enumerate() {
        let seqs = match m {
            Modality::Face => face_dataset(&FaceGenerator::default(), a.count, a.frames, seed)?,
            _ => sinusoid_dataset(m, a.count, a.frames, seed.wrapping_add(k as u64))?,
        };
        let dir = root.join("motion").join(m.name());
        create_dir(&dir)?;
        for (i, s) in seqs.iter().enumerate() {
            save_motion(dir.join(format!("seq_{i:04}.m3tk")), s)?;
        }
    }

    let fit_dir = root.join("fit");
    create_dir(&fit_dir)?;
    let problem = toy_fit_problem(&model, seed, 0.2)?;
    problem.keypoints.save(fit_dir.join("keypoints.txt"))?;
    save_poses(&fit_dir.join("init.json"), &problem.init_params)?;
    save_poses(&fit_dir.join("truth.json"), &toy_ground_truth(&model))?;

    let text_dir = root.join("text");
    write_text(&text_dir.join("hyp.txt"), HYPOTHESES)?;
    write_text(&text_dir.join("ref.txt"), REFERENCES)?;
    println!(
        "wrote fixtures to {} ({} sequences x {} frames per modality)",
        root.display(),
        a.count,
        a.frames
    );
    Ok(())
}
