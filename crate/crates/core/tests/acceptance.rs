//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test -p m3t-core --test acceptance` runs everything; pass criterion
//! numbers as arguments to run a subset, e.g. `-- 2 5`. Failures are
//! reported but only change the exit status when `M3T_ACCEPTANCE_STRICT` is
//! set.

use std::time::Instant;

use nalgebra::{Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use m3t_core::bodymodel::{
    matrix_to_rot6d, mirror_hand_pose, rot6d_to_matrix, toy_body_model, PoseParams, HAND_JOINTS,
    TOY_SHAPE_DIMS,
};
use m3t_core::fitting::{fit_loss_tensors, refine_sequence, toy_fit_problem};
use m3t_core::metrics::{
    bleu4, procrustes_align, rouge_l, tokenize as words, BleuSmoothing, ROUGE_BETA_SQ,
};
use m3t_core::motionvae::{
    face_dataset, residual_block, sinusoid_dataset, train, FaceGenerator, Rounding, TrainOptions,
    Vae, VaeConfig,
};
use m3t_core::numcore::{elementwise, finite_difference_gradient, grads_close, Elementwise, Tensor};
use m3t_core::quantizers::{utilization, LevelSpec};
use m3t_core::tokencodec::{
    build_vocabulary, fuse_embeddings, greedy_decode, parse_streams, serialize_streams,
    streams_from_steps, EmbeddingTable, MultiModalStep, TokenDocument, Vocabulary,
};
use m3t_core::{Modality, TokenizerFamily};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

// ---------------------------------------------------------------- 1

fn codebook_collapse() -> Outcome {
    let data = face_dataset(&FaceGenerator::default(), 2000, 16, 3).map_err(err)?;
    let opts = TrainOptions {
        epochs: 20,
        batch_size: 16,
        base_lr: 2e-4,
        min_lr: 2e-6,
        warmup_epochs: 1,
        seed: 0,
    };
    let fsq_config = VaeConfig::desk(TokenizerFamily::Face);
    let mut reports = Vec::new();
    for config in [fsq_config.clone(), fsq_config.with_vq(0.25)] {
        let mut vae = Vae::new(config, 7).map_err(err)?;
        train(&mut vae, &data, &[], &opts).map_err(err)?;
        let streams = data
            .iter()
            .map(|s| vae.tokenize(s))
            .collect::<m3t_core::Result<Vec<_>>>()
            .map_err(err)?;
        reports.push(utilization(&streams, 216).map_err(err)?);
    }
    let (fsq, vq) = (&reports[0], &reports[1]);
    let detail = format!(
        "FSQ used {:.3} sd {:.1}, VQ used {:.3} sd {:.1}",
        fsq.used_fraction, fsq.frequency_sd, vq.used_fraction, vq.frequency_sd
    );
    ensure(fsq.used_fraction >= 0.95, || format!("FSQ below 0.95: {detail}"))?;
    ensure(vq.used_fraction <= fsq.used_fraction - 0.10, || {
        format!("VQ not 10 points below FSQ: {detail}")
    })?;
    ensure(fsq.frequency_sd < vq.frequency_sd, || {
        format!("FSQ frequency SD not below VQ: {detail}")
    })?;
    Ok(detail)
}

// ---------------------------------------------------------------- 2

const INSTANCES: usize = 20;

fn check_fd<F>(f: F, x: &[f64], shape: &[usize], h: f64, label: &str) -> Result<(), String>
where
    F: Fn(&Tensor) -> m3t_core::Result<Tensor>,
{
    let leaf = Tensor::parameter(x.to_vec(), shape).map_err(err)?;
    f(&leaf).map_err(err)?.backward().map_err(err)?;
    let analytic = leaf.grad().ok_or_else(|| format!("{label}: no gradient"))?;
    let point = Tensor::new(x.to_vec(), shape).map_err(err)?;
    let numeric = finite_difference_gradient(&f, &point, h).map_err(err)?;
    ensure(grads_close(&analytic, &numeric, 1e-4, 1e-6), || {
        let worst = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        format!("{label}: max gradient deviation {worst:.3e}")
    })
}

fn gradient_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;

    let kinds = [
        Elementwise::Add,
        Elementwise::Sub,
        Elementwise::Mul,
        Elementwise::Div,
        Elementwise::Scale(-1.7),
        Elementwise::Tanh,
        Elementwise::Square,
        Elementwise::Relu,
        Elementwise::Sqrt,
    ];
    for kind in kinds {
        for _ in 0..INSTANCES {
            // positive operands keep sqrt and division smooth; relu needs
            // points away from its kink
            let positive = matches!(kind, Elementwise::Div | Elementwise::Sqrt);
            let x: Vec<f64> = (0..6)
                .map(|_| {
                    let v: f64 = rng.random_range(0.2..2.0);
                    if positive || rng.random_bool(0.5) { v } else { -v }
                })
                .collect();
            let other = Tensor::new(uniform(&mut rng, 6, 0.5, 2.0), &[2, 3]).map_err(err)?;
            let weights = Tensor::new(uniform(&mut rng, 6, -1.0, 1.0), &[2, 3]).map_err(err)?;
            let f = |t: &Tensor| {
                let b = matches!(
                    kind,
                    Elementwise::Add | Elementwise::Sub | Elementwise::Mul | Elementwise::Div
                )
                .then_some(&other);
                elementwise(kind, t, b)?.mul(&weights).map(|y| y.sum())
            };
            check_fd(f, &x, &[2, 3], 1e-5, &format!("{kind:?}"))?;
            checked += 1;
        }
    }

    for _ in 0..INSTANCES {
        let (m, k, n) = (rng.random_range(1..5), rng.random_range(1..5), rng.random_range(1..5));
        let a = uniform(&mut rng, m * k, -2.0, 2.0);
        let b = Tensor::new(uniform(&mut rng, k * n, -2.0, 2.0), &[k, n]).map_err(err)?;
        check_fd(|x| Ok(x.matmul(&b)?.tanh().sum()), &a, &[m, k], 1e-5, "matmul")?;
        checked += 1;
    }

    for _ in 0..INSTANCES {
        let (c_in, c_out) = (rng.random_range(1..4), rng.random_range(1..4));
        let width = [1, 3, 5][rng.random_range(0..3)];
        let (stride, dilation) = (rng.random_range(1..=2), rng.random_range(1..=3));
        let len = rng.random_range(3..10);
        let x = uniform(&mut rng, c_in * len, -1.0, 1.0);
        let w = uniform(&mut rng, c_out * c_in * width, -1.0, 1.0);
        let wt = Tensor::new(w.clone(), &[c_out, c_in, width]).map_err(err)?;
        check_fd(
            |v| Ok(v.conv1d(&wt, stride, dilation)?.square().sum()),
            &x,
            &[c_in, len],
            1e-5,
            "conv1d input",
        )?;
        let xt = Tensor::new(x, &[c_in, len]).map_err(err)?;
        check_fd(
            |k| Ok(xt.conv1d(k, stride, dilation)?.tanh().sum()),
            &w,
            &[c_out, c_in, width],
            1e-5,
            "conv1d kernel",
        )?;
        checked += 1;
    }

    for _ in 0..INSTANCES {
        let c = rng.random_range(1..5);
        let len = rng.random_range(2..9);
        let dilation = [1, 3, 9][rng.random_range(0..3)];
        let mut param = |shape: &[usize]| {
            let n = shape.iter().product();
            Tensor::new(uniform(&mut rng, n, -0.8, 0.8), shape).unwrap()
        };
        let wd = param(&[c, c, 3]);
        let bd = param(&[c, 1]);
        let wp = param(&[c, c, 1]);
        let bp = param(&[c, 1]);
        let x = uniform(&mut rng, c * len, -1.0, 1.0);
        check_fd(
            |v| residual_block(v, [&wd, &bd], [&wp, &bp], dilation).map(|y| y.square().sum()),
            &x,
            &[c, len],
            1e-6,
            "residual block",
        )?;
        checked += 1;
    }

    let model = toy_body_model();
    for seed in 0..INSTANCES as u64 {
        let problem = toy_fit_problem(&model, seed, rng.random_range(0.05..0.4)).map_err(err)?;
        let base: Vec<_> = problem.init_params.iter().map(PoseParams::to_tensors).collect();
        let frame = rng.random_range(0..base.len());
        let field = rng.random_range(0..3);
        let (x, shape) = match field {
            0 => (problem.init_params[frame].body.clone(), vec![60]),
            1 => (problem.init_params[frame].global_rotation.to_vec(), vec![6]),
            _ => (problem.init_params[frame].right_hand.clone(), vec![90]),
        };
        let loss = |t: &Tensor| {
            let mut poses = base.clone();
            match field {
                0 => poses[frame].body = t.clone(),
                1 => poses[frame].global_rotation = t.clone(),
                _ => poses[frame].right_hand = t.clone(),
            }
            fit_loss_tensors(&model, &problem, &poses)
        };
        check_fd(loss, &x, &shape, 1e-6, "fit_loss")?;
        checked += 1;
    }

    for seed in 0..INSTANCES as u64 {
        let config = VaeConfig {
            width: 6,
            n_res_blocks: 1,
            ..VaeConfig::desk(TokenizerFamily::Body)
        };
        let vae = Vae::new(config, seed).map_err(err)?;
        let frames = 4 * rng.random_range(1..3);
        let x = uniform(&mut rng, 60 * frames, -1.0, 1.0);
        check_fd(
            |t| vae.loss_graph(t, Rounding::Smooth),
            &x,
            &[60, frames],
            1e-6,
            "reconstruction loss",
        )?;
        checked += 1;
    }

    Ok(format!("{checked} instances across 14 op groups"))
}

// ---------------------------------------------------------------- 3

fn codebook_arithmetic() -> Outcome {
    let mut sizes = Vec::new();
    for (levels, want) in [(vec![5, 5, 4], 100), (vec![6, 6, 5], 180), (vec![6, 6, 6], 216)] {
        let spec = LevelSpec::new(levels.clone()).map_err(err)?;
        let c = spec.codebook_size();
        ensure(c == want, || format!("{levels:?} gives {c}, expected {want}"))?;
        for idx in 0..c {
            let digits = spec.index_to_digits(idx).map_err(err)?;
            let back = spec.digits_to_index(&digits).map_err(err)?;
            ensure(back == idx, || format!("{levels:?}: {idx} -> {digits:?} -> {back}"))?;
        }
        sizes.push(c);
    }
    let presets = [TokenizerFamily::Body, TokenizerFamily::Hand, TokenizerFamily::Face]
        .map(|f| LevelSpec::preset(f).codebook_size());
    ensure(presets == [100, 180, 216], || format!("family presets give {presets:?}"))?;
    Ok(format!("C = {sizes:?}, all indices round-trip"))
}

// ---------------------------------------------------------------- 4

fn random_params(rng: &mut ChaCha8Rng, scale: f64) -> PoseParams {
    let mut p = PoseParams::neutral(TOY_SHAPE_DIMS);
    for v in p
        .beta
        .iter_mut()
        .chain(p.body.iter_mut())
        .chain(p.left_hand.iter_mut())
        .chain(p.right_hand.iter_mut())
        .chain(p.face.iter_mut())
        .chain(p.global_rotation.iter_mut())
        .chain(p.global_translation.iter_mut())
    {
        *v += scale * rng.random_range(-1.0..1.0);
    }
    p
}

fn max_gap(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn kinematics() -> Outcome {
    let model = toy_body_model();
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    let neutral = model.neutral_params();
    let rest = model.lbs_forward(&neutral).map_err(err)?.vertices;
    ensure(rest == model.template(), || "zero parameters moved the template".into())?;

    let mut worst_equivariance: f64 = 0.0;
    for _ in 0..50 {
        let params = random_params(&mut rng, 0.3);
        let before = model.lbs_forward(&params).map_err(err)?;
        let axis = Unit::new_normalize(Vector3::from(std::array::from_fn::<f64, 3, _>(|_| {
            rng.random_range(-1.0..1.0)
        })));
        let extra = *Rotation3::from_axis_angle(&axis, rng.random_range(-3.0..3.0)).matrix();
        let shift: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let mut moved = params.clone();
        let root = rot6d_to_matrix(&params.global_rotation).map_err(err)?;
        moved.global_rotation = matrix_to_rot6d(&(extra * root));
        for (t, s) in moved.global_translation.iter_mut().zip(shift) {
            *t += s;
        }
        let after = model.lbs_forward(&moved).map_err(err)?;
        let pivot = Vector3::from(before.joints[0]);
        let expect = |p: &[f64; 3]| {
            let q = extra * (Vector3::from(*p) - pivot) + pivot + Vector3::from(shift);
            [q.x, q.y, q.z]
        };
        let verts: Vec<_> = before.vertices.iter().map(expect).collect();
        let joints: Vec<_> = before.joints.iter().map(expect).collect();
        worst_equivariance = worst_equivariance
            .max(max_gap(&after.vertices, &verts))
            .max(max_gap(&after.joints, &joints));
    }
    ensure(worst_equivariance < 1e-9, || {
        format!("rigid equivariance off by {worst_equivariance:.3e}")
    })?;

    let mut worst_ortho: f64 = 0.0;
    for _ in 0..1000 {
        let r6: Vec<f64> = uniform(&mut rng, 6, -3.0, 3.0);
        let m = match rot6d_to_matrix(&r6) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let gram = m.transpose() * m - nalgebra::Matrix3::identity();
        worst_ortho = worst_ortho
            .max(gram.abs().max())
            .max((m.determinant() - 1.0).abs());
    }
    ensure(worst_ortho < 1e-9, || format!("rot6d orthonormality off by {worst_ortho:.3e}"))?;

    let mut worst_mirror: f64 = 0.0;
    for _ in 0..200 {
        let theta = uniform(&mut rng, HAND_JOINTS * 6, -2.0, 2.0);
        let twice = mirror_hand_pose(&mirror_hand_pose(&theta).map_err(err)?).map_err(err)?;
        let gap = theta.iter().zip(&twice).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_mirror = worst_mirror.max(gap);
    }
    ensure(worst_mirror < 1e-9, || format!("mirror involution off by {worst_mirror:.3e}"))?;

    Ok(format!(
        "template bit-exact; equivariance {worst_equivariance:.1e}, rot6d {worst_ortho:.1e}, mirror {worst_mirror:.1e}"
    ))
}

// ---------------------------------------------------------------- 5

fn enumerate_min(a: &[f64], b: &[f64], i: usize, j: usize) -> f64 {
    let here = (a[i] - b[j]).abs();
    if i + 1 == a.len() && j + 1 == b.len() {
        return here;
    }
    let mut best = f64::INFINITY;
    if i + 1 < a.len() {
        best = best.min(enumerate_min(a, b, i + 1, j));
    }
    if j + 1 < b.len() {
        best = best.min(enumerate_min(a, b, i, j + 1));
    }
    if i + 1 < a.len() && j + 1 < b.len() {
        best = best.min(enumerate_min(a, b, i + 1, j + 1));
    }
    here + best
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pairs = 250;
    for _ in 0..pairs {
        let (m, n) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let a: Vec<f64> = (0..m).map(|_| rng.random_range(0..4) as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0..4) as f64).collect();
        let (cost, path) = m3t_core::metrics::dtw(&a, &b, |x, y| (x - y).abs()).map_err(err)?;
        let oracle = enumerate_min(&a, &b, 0, 0);
        ensure(cost == oracle, || format!("dtw {a:?} vs {b:?}: {cost} != {oracle}"))?;
        ensure(path.is_valid(a.len(), b.len()), || "invalid alignment path".into())?;
    }

    let mut worst_residual: f64 = 0.0;
    for _ in 0..50 {
        let x: Vec<[f64; 3]> = (0..rng.random_range(4..20))
            .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
            .collect();
        let axis = Unit::new_normalize(Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ));
        let r = Rotation3::from_axis_angle(&axis, rng.random_range(-3.1..3.1));
        let t = Vector3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let y: Vec<[f64; 3]> = x
            .iter()
            .map(|p| {
                let q = r * Vector3::from(*p) + t;
                [q.x, q.y, q.z]
            })
            .collect();
        let fit = procrustes_align(&x, &y).map_err(err)?;
        worst_residual = worst_residual.max(fit.residual(&y));
    }
    ensure(worst_residual < 1e-9, || format!("Procrustes residual {worst_residual:.3e}"))?;

    let corpus: Vec<Vec<&str>> = ["the cat sat on the mat", "signing is a language", "a b c d e f"]
        .iter()
        .map(|s| words(s))
        .collect();
    let same_bleu = bleu4(&corpus, &corpus, BleuSmoothing::AddOne).map_err(err)?;
    let same_rouge = rouge_l(&corpus, &corpus, ROUGE_BETA_SQ).map_err(err)?;
    ensure(same_bleu == 1.0 && same_rouge == 1.0, || {
        format!("identical corpora give BLEU {same_bleu}, ROUGE {same_rouge}")
    })?;

    let bleu = bleu4(&[words("a b c d")], &[words("a b c d e")], BleuSmoothing::AddOne).map_err(err)?;
    let want_bleu = (1.0f64 - 5.0 / 4.0).exp();
    ensure((bleu - want_bleu).abs() < 1e-12, || format!("BLEU fixture {bleu} != {want_bleu}"))?;

    // LCS 2, P = 2/3, R = 1
    let rouge = rouge_l(&[words("a b c")], &[words("a c")], ROUGE_BETA_SQ).map_err(err)?;
    let (p, r) = (2.0 / 3.0, 1.0);
    let want_rouge = (1.0 + ROUGE_BETA_SQ) * p * r / (r + ROUGE_BETA_SQ * p);
    ensure((rouge - want_rouge).abs() < 1e-12, || format!("ROUGE fixture {rouge} != {want_rouge}"))?;

    Ok(format!(
        "{pairs} DTW pairs exact; Procrustes residual {worst_residual:.1e}; BLEU {bleu:.6}; ROUGE-L {rouge:.6}"
    ))
}

// ---------------------------------------------------------------- 6

fn training_progress() -> Outcome {
    let data = sinusoid_dataset(Modality::Body, 64, 32, 1).map_err(err)?;
    let run = || -> Result<(Vae, Vec<f64>), String> {
        let mut vae = Vae::new(VaeConfig::desk(TokenizerFamily::Body), 7).map_err(err)?;
        let report = train(&mut vae, &data, &[], &TrainOptions::default()).map_err(err)?;
        Ok((vae, report.epoch_losses))
    };
    let (a, losses) = run()?;
    let (b, again) = run()?;
    ensure(losses.len() == 50, || format!("{} epochs recorded", losses.len()))?;
    let (first, last) = (losses[0], losses[losses.len() - 1]);
    ensure(last < 0.5 * first, || format!("loss {first:.4} -> {last:.4}"))?;
    ensure(losses == again, || "loss traces differ between identical runs".into())?;
    let same = a
        .parameters()
        .iter()
        .zip(b.parameters())
        .all(|(p, q)| p.value() == q.value());
    ensure(same, || "weights differ between identical runs".into())?;
    Ok(format!("loss {first:.4} -> {last:.4} ({:.1}%), bitwise reproducible", 100.0 * last / first))
}

// ---------------------------------------------------------------- 7

fn decoding_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut early = 0;
    for trial in 0..100 {
        let sizes: [usize; 4] = std::array::from_fn(|_| rng.random_range(2..12));
        let vocab = build_vocabulary::<&str, &str>(&[], &["ASL", "DGS"], sizes).map_err(err)?;
        let table = EmbeddingTable::seeded(vocab.len(), 8, trial).map_err(err)?;
        let max_steps = rng.random_range(1..25);
        // scripted choice per step and head; index == size means EOS
        let eos_rate = rng.random_range(0.0..0.15);
        let script: Vec<[usize; 4]> = (0..max_steps)
            .map(|_| {
                std::array::from_fn(|m| {
                    if rng.random_bool(eos_rate) {
                        sizes[m]
                    } else {
                        rng.random_range(0..sizes[m])
                    }
                })
            })
            .collect();
        let noise: Vec<Vec<Vec<f64>>> = script
            .iter()
            .map(|_| (0..4).map(|m| uniform(&mut rng, sizes[m] + 1, 0.0, 1.0)).collect())
            .collect();
        let prompt = vocab.prompt_tags(["ASL", "DGS"][trial as usize % 2]).map_err(err)?;
        let mut predictor = |history: &[Vec<f64>], prompt: &[usize]| {
            let u = history.len() - prompt.len();
            (0..4)
                .map(|m| {
                    let mut logits = noise[u][m].clone();
                    logits[script[u][m]] = 2.0;
                    logits
                })
                .collect::<Vec<_>>()
        };
        let out = greedy_decode(&mut predictor, &vocab, &table, &prompt, max_steps).map_err(err)?;

        let first_eos = script
            .iter()
            .position(|s| (0..4).any(|m| s[m] == sizes[m]));
        let want_len = first_eos.map_or(max_steps, |u| u + 1);
        ensure(out.steps.len() == want_len, || {
            format!("trial {trial}: {} steps, expected {want_len}", out.steps.len())
        })?;
        let want_by = first_eos.map(|u| Modality::ALL[(0..4).find(|&m| script[u][m] == sizes[m]).unwrap()]);
        ensure(out.terminated_by == want_by, || {
            format!("trial {trial}: terminated by {:?}, expected {want_by:?}", out.terminated_by)
        })?;
        for (u, step) in out.steps.iter().enumerate() {
            for m in Modality::ALL {
                let k = script[u][m.index()];
                let want = if k == sizes[m.index()] {
                    vocab.eos()
                } else {
                    vocab.motion_id(m, k).map_err(err)?
                };
                ensure(step.get(m) == want, || format!("trial {trial}: step {u} {m:?} mismatch"))?;
            }
        }
        let streams = streams_from_steps(&out.steps, "ASL", &vocab).map_err(err)?;
        // an EOS on the first step leaves nothing to detokenize
        let want_streams = if first_eos == Some(0) { 0 } else { 4 };
        ensure(streams.len() == want_streams, || format!("trial {trial}: {} streams", streams.len()))?;
        let lens: Vec<usize> = streams.iter().map(|s| s.indices.len()).collect();
        ensure(lens.iter().all(|&l| l == lens[0]), || format!("trial {trial}: stream lengths {lens:?}"))?;
        if first_eos.is_some() {
            early += 1;
        }
    }

    for _ in 0..100 {
        let v = uniform(&mut rng, 16, -1e6, 1e6);
        let fused = fuse_embeddings(&[&v, &v, &v, &v]).map_err(err)?;
        ensure(fused == v, || "fusion of equal embeddings changed them".into())?;
    }
    Ok(format!("100 scripted decodes ({early} stopped on EOS); fusion idempotent"))
}

// ---------------------------------------------------------------- 8

/// Training sequences for the fixed-point tokenizer; the held-out motions
/// come from the same generator.
const FIXED_POINT_TRAIN: usize = 1024;
const FIXED_POINT_FRAMES: usize = 32;

fn random_document(rng: &mut ChaCha8Rng, vocab: &Vocabulary, sizes: [usize; 4]) -> TokenDocument {
    let steps = (0..rng.random_range(0..40))
        .map(|_| {
            MultiModalStep::new(std::array::from_fn(|m| match rng.random_range(0..20) {
                0 => vocab.eos(),
                1 => vocab.pad(),
                _ => vocab
                    .motion_id(Modality::ALL[m], rng.random_range(0..sizes[m]))
                    .unwrap(),
            }))
        })
        .collect();
    let eos = rng
        .random_bool(0.5)
        .then(|| Modality::ALL[rng.random_range(0..4)]);
    TokenDocument { steps, eos }
}

fn round_trips() -> Outcome {
    let sizes = [100, 180, 180, 216];
    let vocab = build_vocabulary(&["hello", "sign"], &["ASL", "DGS", "CSL"], sizes).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..500 {
        let doc = random_document(&mut rng, &vocab, sizes);
        let text = serialize_streams(&doc, &vocab).map_err(err)?;
        let back = parse_streams(&text, &vocab).map_err(err)?;
        ensure(back == doc, || format!("document {i} changed through text"))?;
    }

    let all = sinusoid_dataset(Modality::Body, FIXED_POINT_TRAIN + 50, FIXED_POINT_FRAMES, 1)
        .map_err(err)?;
    let (data, held_out) = all.split_at(FIXED_POINT_TRAIN);
    let mut vae = Vae::new(VaeConfig::desk(TokenizerFamily::Body), 7).map_err(err)?;
    train(&mut vae, data, &[], &TrainOptions::default()).map_err(err)?;
    let (mut fixed, mut same_tokens, mut total_tokens) = (0, 0, 0);
    for motion in held_out {
        let first = vae.tokenize(motion).map_err(err)?;
        let decoded = vae.detokenize(&first, motion.fps).map_err(err)?;
        let second = vae.tokenize(&decoded).map_err(err)?;
        if first == second {
            fixed += 1;
        }
        total_tokens += first.indices.len();
        same_tokens += first
            .indices
            .iter()
            .zip(&second.indices)
            .filter(|(a, b)| a == b)
            .count();
    }
    let detail = format!(
        "500 documents exact; fixed points {fixed}/50 (tokens {same_tokens}/{total_tokens})"
    );
    ensure(fixed == 50, || detail.clone())?;
    Ok(detail)
}

// ---------------------------------------------------------------- 9

fn fitting() -> Outcome {
    let model = toy_body_model();
    let problem = toy_fit_problem(&model, 0, 0.2).map_err(err)?;
    let result = refine_sequence(&model, &problem, 200, 0.01).map_err(err)?;
    let (first, last) = (result.loss_trace[0], *result.loss_trace.last().unwrap());
    ensure(last < 0.5 * first, || format!("toy fit {first:.4e} -> {last:.4e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 1..=20 {
        let scale = rng.random_range(0.05..0.5);
        let problem = toy_fit_problem(&model, seed, scale).map_err(err)?;
        let steps = rng.random_range(20..150);
        let trace = refine_sequence(&model, &problem, steps, 0.01).map_err(err)?.loss_trace;
        let (a, b) = (trace[0], trace[trace.len() - 1]);
        ensure(b <= a, || format!("perturbation {seed} (scale {scale:.2}): {a:.4e} -> {b:.4e}"))?;
    }
    Ok(format!("toy fit {first:.3e} -> {last:.3e} ({:.1}%); 20 perturbations end below start", 100.0 * last / first))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "FSQ vs VQ codebook collapse", codebook_collapse),
        (2, "gradient oracles", gradient_oracles),
        (3, "codebook arithmetic", codebook_arithmetic),
        (4, "kinematics", kinematics),
        (5, "metric oracles", metric_oracles),
        (6, "VAE training progress", training_progress),
        (7, "decoding contract", decoding_contract),
        (8, "round trips", round_trips),
        (9, "fitting", fitting),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(reason) => {
                failures += 1;
                println!("criterion {id} FAIL  {name}: {reason} [{secs:.1}s]");
            }
        }
    }
    println!("{failures} criteria failed");
    if failures > 0 && std::env::var_os("M3T_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
