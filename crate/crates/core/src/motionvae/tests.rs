use super::*;
use crate::numcore::{finite_difference_gradient, grads_close, Tensor};
use crate::quantizers::TokenStream;
use crate::{Error, Modality, TokenizerFamily};

fn tiny(family: TokenizerFamily) -> VaeConfig {
    VaeConfig {
        width: 8,
        n_res_blocks: 1,
        ..VaeConfig::desk(family)
    }
}

fn ramp(modality: Modality, frames: usize) -> MotionSequence {
    let d = modality.frame_dim();
    let data = (0..frames * d).map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0).collect();
    MotionSequence::new(modality, 25.0, data).unwrap()
}

#[test]
fn latent_length_is_frames_over_window() {
    let vae = Vae::new(tiny(TokenizerFamily::Body), 1).unwrap();
    assert_eq!(vae.config().window(), 4);
    assert_eq!(vae.encode(&ramp(Modality::Body, 16)).unwrap().len(), 4);
    assert_eq!(vae.encode(&ramp(Modality::Body, 4)).unwrap().len(), 1);
    let z = vae.encode(&ramp(Modality::Body, 18)).unwrap();
    assert_eq!(z.len(), 5);
    assert!(z.iter().all(|row| row.len() == 3));
    assert!(matches!(vae.encode(&ramp(Modality::Body, 3)), Err(Error::Usage(_))));
    assert!(matches!(vae.tokenize(&ramp(Modality::Body, 3)), Err(Error::Usage(_))));
}

#[test]
fn encode_is_bitwise_deterministic() {
    let vae = Vae::new(tiny(TokenizerFamily::Face), 2).unwrap();
    let x = ramp(Modality::Face, 12);
    assert_eq!(vae.encode(&x).unwrap(), vae.encode(&x).unwrap());
}

#[test]
fn face_tokens_fit_the_preset_codebook() {
    let vae = Vae::new(tiny(TokenizerFamily::Face), 3).unwrap();
    let data = face_dataset(&FaceGenerator::default(), 8, 16, 5).unwrap();
    for seq in &data {
        let s = vae.tokenize(seq).unwrap();
        assert_eq!(s.indices.len(), 4);
        assert!(s.indices.iter().all(|&i| i < 216));
    }
}

#[test]
fn zero_network_on_zero_input_gives_constant_tokens() {
    let vae = Vae::zeroed(tiny(TokenizerFamily::Body)).unwrap();
    let x = MotionSequence::new(Modality::Body, 25.0, vec![0.0; 32 * 60]).unwrap();
    let s = vae.tokenize(&x).unwrap();
    assert_eq!(s.indices.len(), 8);
    assert!(s.indices.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn detokenize_length_and_determinism() {
    let vae = Vae::new(tiny(TokenizerFamily::Body), 4).unwrap();
    let stream = TokenStream::new(Modality::Body, "", vec![0, 17, 99, 42]);
    let a = vae.detokenize(&stream, 25.0).unwrap();
    assert_eq!(a.n_frames(), 16);
    assert_eq!(a, vae.detokenize(&stream, 25.0).unwrap());
    let bad = TokenStream::new(Modality::Body, "", vec![0, 100]);
    assert!(matches!(vae.detokenize(&bad, 25.0), Err(Error::Data(_))));
}

#[test]
fn round_trip_keeps_whole_windows() {
    let vae = Vae::new(tiny(TokenizerFamily::Hand), 5).unwrap();
    for t in [4, 7, 16, 19] {
        let out = vae.reconstruct(&ramp(Modality::RightHand, t)).unwrap();
        assert_eq!(out.n_frames(), t / 4 * 4);
    }
}

#[test]
fn wrong_modality_is_rejected() {
    let vae = Vae::new(tiny(TokenizerFamily::Hand), 5).unwrap();
    assert!(matches!(vae.tokenize(&ramp(Modality::Face, 8)), Err(Error::Usage(_))));
}

#[test]
fn left_hand_shares_the_right_hand_encoder() {
    let vae = Vae::new(tiny(TokenizerFamily::Hand), 6).unwrap();
    let left = ramp(Modality::LeftHand, 16);
    let as_right = left.mirrored(Modality::RightHand);
    assert_eq!(
        vae.tokenize(&left).unwrap().indices,
        vae.tokenize(&as_right).unwrap().indices
    );
    let stream = vae.tokenize(&left).unwrap();
    assert_eq!(stream.modality, Modality::LeftHand);
    let decoded_left = vae.detokenize(&stream, 25.0).unwrap();
    let right_stream = TokenStream::new(Modality::RightHand, "", stream.indices.clone());
    let decoded_right = vae.detokenize(&right_stream, 25.0).unwrap();
    assert_eq!(decoded_left.modality, Modality::LeftHand);
    assert_eq!(decoded_left, decoded_right.mirrored(Modality::LeftHand));
}

#[test]
fn zero_epochs_is_a_no_op() {
    let mut vae = Vae::new(tiny(TokenizerFamily::Body), 7).unwrap();
    let before = vae.parameters().to_vec();
    let opts = TrainOptions {
        epochs: 0,
        ..TrainOptions::default()
    };
    let report = train(&mut vae, &[], &[], &opts).unwrap();
    assert!(report.epoch_losses.is_empty());
    assert_eq!(report.best_epoch, None);
    for (a, b) in before.iter().zip(vae.parameters()) {
        assert_eq!(a.value(), b.value());
    }
}

fn short_run(seed: u64) -> (Vae, TrainReport) {
    let data = sinusoid_dataset(Modality::Body, 8, 16, 11).unwrap();
    let mut vae = Vae::new(tiny(TokenizerFamily::Body), seed).unwrap();
    let opts = TrainOptions {
        epochs: 6,
        batch_size: 4,
        warmup_epochs: 1,
        ..TrainOptions::default()
    };
    let report = train(&mut vae, &data[..6], &data[6..], &opts).unwrap();
    (vae, report)
}

#[test]
fn training_is_deterministic_and_finite() {
    let (a, ra) = short_run(9);
    let (b, rb) = short_run(9);
    assert_eq!(ra, rb);
    assert_eq!(ra.epoch_losses.len(), 6);
    assert_eq!(ra.validation_losses.len(), 6);
    assert!(ra.epoch_losses.iter().all(|l| l.is_finite()));
    for (p, q) in a.parameters().iter().zip(b.parameters()) {
        assert_eq!(p.value(), q.value());
    }
    let best = ra.best_epoch.unwrap();
    let min = ra.validation_losses.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(ra.validation_losses[best], min);
}

#[test]
fn vq_training_runs() {
    let data = face_dataset(&FaceGenerator::default(), 4, 8, 1).unwrap();
    let mut vae = Vae::new(tiny(TokenizerFamily::Face).with_vq(0.25), 2).unwrap();
    let opts = TrainOptions {
        epochs: 2,
        batch_size: 2,
        warmup_epochs: 1,
        ..TrainOptions::default()
    };
    let report = train(&mut vae, &data, &[], &opts).unwrap();
    assert_eq!(report.epoch_losses.len(), 2);
    let s = vae.tokenize(&data[0]).unwrap();
    assert!(s.indices.iter().all(|&i| i < 216));
}

#[test]
fn smooth_loss_gradient_matches_finite_differences() {
    let vae = Vae::new(tiny(TokenizerFamily::Body), 12).unwrap();
    let x = ramp(Modality::Body, 8).to_channels(8).unwrap();
    let leaf = Tensor::parameter(x.to_vec(), x.shape()).unwrap();
    vae.loss_graph(&leaf, Rounding::Smooth).unwrap().backward().unwrap();
    let analytic = leaf.grad().unwrap();
    let numeric =
        finite_difference_gradient(|t| vae.loss_graph(t, Rounding::Smooth), &leaf, 1e-6).unwrap();
    assert!(grads_close(&analytic, &numeric, 1e-4, 1e-6));
}

#[test]
fn residual_block_gradients_match_finite_differences() {
    let c = 3;
    let t = 7;
    let vals = |n: usize, k: usize| (0..n).map(|i| ((i * k % 17) as f64 - 8.3) / 9.0).collect::<Vec<_>>();
    let x = Tensor::parameter(vals(c * t, 5), &[c, t]).unwrap();
    let wd = Tensor::parameter(vals(c * c * 3, 7), &[c, c, 3]).unwrap();
    let bd = Tensor::parameter(vals(c, 3), &[c, 1]).unwrap();
    let wp = Tensor::parameter(vals(c * c, 11), &[c, c, 1]).unwrap();
    let bp = Tensor::parameter(vals(c, 13), &[c, 1]).unwrap();
    let f = |x: &Tensor| residual_block(x, [&wd, &bd], [&wp, &bp], 3).map(|y| y.square().sum());
    f(&x).unwrap().backward().unwrap();
    let numeric = finite_difference_gradient(|v| f(v), &x, 1e-6).unwrap();
    assert!(grads_close(&x.grad().unwrap(), &numeric, 1e-4, 1e-6));
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let vae = Vae::new(tiny(TokenizerFamily::Face).with_vq(0.25), 13).unwrap();
    let back = vae_from_json(&vae_to_json(&vae).unwrap()).unwrap();
    assert_eq!(back.config(), vae.config());
    for (a, b) in vae.parameters().iter().zip(back.parameters()) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.value(), b.value());
    }
    let x = ramp(Modality::Face, 8);
    assert_eq!(vae.tokenize(&x).unwrap(), back.tokenize(&x).unwrap());
}

#[test]
fn checkpoint_with_bad_config_fails_to_load() {
    let vae = Vae::new(tiny(TokenizerFamily::Body), 14).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&vae_to_json(&vae).unwrap()).unwrap();
    json["config"]["latent_dim"] = 4.into();
    let err = vae_from_json(&json.to_string()).unwrap_err();
    assert!(matches!(err, Error::Load(_)), "{err}");
    assert!(matches!(vae_from_json("{\"version\": 1,"), Err(Error::Parse { .. })));
}

#[test]
fn config_invariants() {
    let mut cfg = VaeConfig::desk(TokenizerFamily::Hand);
    assert_eq!(cfg.codebook_size(), 180);
    assert!(cfg.validate().is_ok());
    cfg.latent_dim = 2;
    assert!(cfg.validate().is_err());
    let mut cfg = VaeConfig::desk(TokenizerFamily::Hand);
    cfg.input_dim = 60;
    assert!(cfg.validate().is_err());
    assert_eq!(VaeConfig::paper(TokenizerFamily::Face).width, 1024);
}

#[test]
fn motion_file_round_trips_both_forms() {
    let seq = ramp(Modality::LeftHand, 5);
    let bytes = motion_to_bytes(&seq);
    assert_eq!(&bytes[..4], b"M3TK");
    assert_eq!(bytes.len(), 24 + 5 * 90 * 8);
    assert_eq!(motion_from_bytes(&bytes).unwrap(), seq);
    assert_eq!(motion_from_json(&motion_to_json(&seq)).unwrap(), seq);

    let dir = std::env::temp_dir().join(format!("m3t-motion-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for name in ["a.m3tk", "a.json"] {
        save_motion(dir.join(name), &seq).unwrap();
        assert_eq!(load_motion(dir.join(name)).unwrap(), seq);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn corrupt_motion_files_are_load_errors() {
    let bytes = motion_to_bytes(&ramp(Modality::Face, 2));
    assert!(matches!(motion_from_bytes(&bytes[..bytes.len() - 1]), Err(Error::Load(_))));
    assert!(matches!(motion_from_bytes(b"NOPE"), Err(Error::Load(_))));
    let mut bad_modality = bytes.clone();
    bad_modality[6] = 9;
    assert!(matches!(motion_from_bytes(&bad_modality), Err(Error::Load(_))));
    let mut bad_dim = bytes;
    bad_dim[20] = 7;
    assert!(matches!(motion_from_bytes(&bad_dim), Err(Error::Load(_))));
    assert!(matches!(motion_from_json("{"), Err(Error::Parse { line: 1, .. })));
}
