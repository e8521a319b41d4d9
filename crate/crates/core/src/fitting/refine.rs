use serde::{Deserialize, Serialize};

use super::problem::{fit_loss_tensors, FitProblem};
use crate::bodymodel::{BodyModel, PoseParams};
use crate::error::{bail, Result};
use crate::numcore::{adam_step, AdamState, Parameter};

/// Refined clip and the loss at every iterate (`steps + 1` entries, the
/// first at the initialization, the last at the returned parameters).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Vec<PoseParams>,
    pub loss_trace: Vec<f64>,
}

const FIELDS: [&str; 5] = ["global_rotation", "global_translation", "body", "left_hand", "right_hand"];

fn field_values(p: &PoseParams, field: usize) -> &[f64] {
    match field {
        0 => &p.global_rotation,
        1 => &p.global_translation,
        2 => &p.body,
        3 => &p.left_hand,
        _ => &p.right_hand,
    }
}

fn write_field(p: &mut PoseParams, field: usize, v: &[f64]) {
    match field {
        0 => p.global_rotation.copy_from_slice(v),
        1 => p.global_translation.copy_from_slice(v),
        2 => p.body.copy_from_slice(v),
        3 => p.left_hand.copy_from_slice(v),
        _ => p.right_hand.copy_from_slice(v),
    }
}

/// Adam over global motion, body and hand poses of every frame; shape and
/// face stay at their initial values.
pub fn refine_sequence(
    model: &BodyModel,
    problem: &FitProblem,
    steps: usize,
    lr: f64,
) -> Result<FitResult> {
    if steps == 0 {
        bail!(Usage, "refine_sequence needs at least one step");
    }
    problem.validate(model)?;
    let mut params: Vec<Parameter> = Vec::new();
    for (t, init) in problem.init_params.iter().enumerate() {
        for (f, name) in FIELDS.iter().enumerate() {
            let v = field_values(init, f).to_vec();
            let n = v.len();
            params.push(Parameter::new(format!("frame{t}.{name}"), v, &[n])?);
        }
    }
    let mut adam = AdamState::new(lr);
    let mut trace = Vec::with_capacity(steps + 1);

    for step in 0..=steps {
        let leaves: Vec<_> = params.iter().map(Parameter::leaf).collect();
        let poses: Vec<_> = problem
            .init_params
            .iter()
            .enumerate()
            .map(|(t, init)| {
                let mut pose = init.to_tensors();
                let l = &leaves[t * FIELDS.len()..(t + 1) * FIELDS.len()];
                pose.global_rotation = l[0].clone();
                pose.global_translation = l[1].clone();
                pose.body = l[2].clone();
                pose.left_hand = l[3].clone();
                pose.right_hand = l[4].clone();
                pose
            })
            .collect();
        let loss = fit_loss_tensors(model, problem, &poses)?;
        let value = loss.item()?;
        if !value.is_finite() {
            bail!(Numeric, "fit loss became {value} at step {step}");
        }
        trace.push(value);
        if step == steps {
            break;
        }
        loss.backward()?;
        for (p, leaf) in params.iter_mut().zip(&leaves) {
            p.zero_grad();
            p.absorb_leaf_grad(leaf)?;
        }
        adam_step(&mut params, &mut adam)?;
    }

    let mut refined = problem.init_params.clone();
    for (t, frame) in refined.iter_mut().enumerate() {
        for f in 0..FIELDS.len() {
            write_field(frame, f, params[t * FIELDS.len() + f].value());
        }
    }
    Ok(FitResult {
        params: refined,
        loss_trace: trace,
    })
}
