use std::sync::Arc;

use super::tensor::{numel, Tensor};
use crate::error::{bail, Result};

/// Named trainable array. The value is shared (not copied) with every leaf
/// tensor built from it, so many graphs can read the same weights.
#[derive(Debug, Clone)]
pub struct Parameter {
    pub name: String,
    shape: Vec<usize>,
    value: Arc<[f64]>,
    grad: Option<Vec<f64>>,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: Vec<f64>, shape: &[usize]) -> Result<Self> {
        let name = name.into();
        if numel(shape) != value.len() {
            bail!(
                Dimension,
                "parameter `{name}`: shape {shape:?} does not hold {} values",
                value.len()
            );
        }
        Ok(Parameter {
            name,
            shape: shape.to_vec(),
            value: value.into(),
            grad: None,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn value(&self) -> &[f64] {
        &self.value
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn set_value(&mut self, value: Vec<f64>) -> Result<()> {
        if value.len() != self.value.len() {
            bail!(
                Dimension,
                "parameter `{}`: expected {} values, got {}",
                self.name,
                self.value.len(),
                value.len()
            );
        }
        self.value = value.into();
        Ok(())
    }

    /// Fresh gradient-collecting leaf over the current value.
    pub fn leaf(&self) -> Tensor {
        Tensor::from_shared(Arc::clone(&self.value), &self.shape, true)
            .expect("parameter shape validated at construction")
    }

    /// Constant view of the current value.
    pub fn constant(&self) -> Tensor {
        Tensor::from_shared(Arc::clone(&self.value), &self.shape, false)
            .expect("parameter shape validated at construction")
    }

    pub fn grad(&self) -> Option<&[f64]> {
        self.grad.as_deref()
    }

    pub fn accumulate_grad(&mut self, g: &[f64]) -> Result<()> {
        if g.len() != self.value.len() {
            bail!(
                Dimension,
                "parameter `{}`: gradient has {} values, expected {}",
                self.name,
                g.len(),
                self.value.len()
            );
        }
        match self.grad.as_mut() {
            Some(acc) => acc.iter_mut().zip(g).for_each(|(a, v)| *a += v),
            None => self.grad = Some(g.to_vec()),
        }
        Ok(())
    }

    /// Pull the gradient gathered on a leaf built by [`Parameter::leaf`].
    /// A leaf the backward pass never reached contributes zeros.
    pub fn absorb_leaf_grad(&mut self, leaf: &Tensor) -> Result<()> {
        match leaf.grad() {
            Some(g) => self.accumulate_grad(&g),
            None => self.accumulate_grad(&vec![0.0; self.value.len()]),
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad = None;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step_count: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(lr: f64) -> Self {
        AdamState {
            first_moment: Vec::new(),
            second_moment: Vec::new(),
            step_count: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            bail!(Usage, "adam learning rate must be positive, got {}", self.lr);
        }
        let unit = 0.0..1.0;
        if !unit.contains(&self.beta1) || self.beta1 == 0.0 || !unit.contains(&self.beta2) || self.beta2 == 0.0 {
            bail!(Usage, "adam betas must lie in (0,1)");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1e-2) {
            bail!(Usage, "adam epsilon must lie in (0, 1e-2)");
        }
        Ok(())
    }
}

/// One bias-corrected Adam update over every parameter. All parameters must
/// carry a gradient; gradients are left in place for the caller to clear.
pub fn adam_step(params: &mut [Parameter], state: &mut AdamState) -> Result<()> {
    state.validate()?;
    if let Some(p) = params.iter().find(|p| p.grad.is_none()) {
        bail!(Usage, "parameter `{}` has no gradient", p.name);
    }
    if state.first_moment.is_empty() && state.step_count == 0 {
        state.first_moment = params.iter().map(|p| vec![0.0; p.len()]).collect();
        state.second_moment = state.first_moment.clone();
    }
    if state.first_moment.len() != params.len()
        || params
            .iter()
            .zip(&state.first_moment)
            .any(|(p, m)| p.len() != m.len())
    {
        bail!(Usage, "adam moment buffers do not match the parameter set");
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let bias1 = 1.0 - state.beta1.powi(t);
    let bias2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, lr, eps) = (state.beta1, state.beta2, state.lr, state.epsilon);
    for ((p, m), v) in params
        .iter_mut()
        .zip(&mut state.first_moment)
        .zip(&mut state.second_moment)
    {
        let g = p.grad.as_ref().expect("checked above");
        let mut next = p.value.to_vec();
        for i in 0..next.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            next[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        p.value = next.into();
    }
    Ok(())
}
