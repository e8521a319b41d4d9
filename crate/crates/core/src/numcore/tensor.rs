use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use crate::error::{bail, Error, Result};

/// Per-parent gradient returned by a backward closure. `None` means the
/// parent receives nothing (it does not require a gradient).
pub type ParentGrads = Vec<Option<Vec<f64>>>;

pub(crate) type BackwardFn = Box<dyn Fn(&[f64]) -> ParentGrads>;

struct GradFn {
    parents: Vec<Tensor>,
    backward: BackwardFn,
}

struct Node {
    shape: Vec<usize>,
    data: Arc<[f64]>,
    requires_grad: bool,
    grad: RefCell<Option<Vec<f64>>>,
    grad_fn: Option<GradFn>,
}

/// Row-major f64 tensor that records the operations producing it so that
/// [`Tensor::backward`] can push gradients back to every leaf created with
/// [`Tensor::parameter`].
///
/// Cloning is cheap (reference counted). Values are immutable once built;
/// only the gradient slot changes.
#[derive(Clone)]
pub struct Tensor(Rc<Node>);

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor")
            .field("shape", &self.0.shape)
            .field("requires_grad", &self.0.requires_grad)
            .field("data", &&self.0.data[..self.0.data.len().min(8)])
            .finish()
    }
}

pub(crate) fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

fn check_shape(data_len: usize, shape: &[usize]) -> Result<()> {
    if shape.iter().any(|&d| d == 0) {
        bail!(Dimension, "shape {shape:?} has a zero extent");
    }
    if numel(shape) != data_len {
        bail!(
            Dimension,
            "shape {shape:?} holds {} values but {data_len} were given",
            numel(shape)
        );
    }
    Ok(())
}

impl Tensor {
    fn from_parts(
        data: Arc<[f64]>,
        shape: Vec<usize>,
        requires_grad: bool,
        grad_fn: Option<GradFn>,
    ) -> Tensor {
        Tensor(Rc::new(Node {
            shape,
            data,
            requires_grad,
            grad: RefCell::new(None),
            grad_fn,
        }))
    }

    /// A constant (no gradient).
    pub fn new(data: Vec<f64>, shape: &[usize]) -> Result<Tensor> {
        check_shape(data.len(), shape)?;
        Ok(Self::from_parts(data.into(), shape.to_vec(), false, None))
    }

    /// A leaf that collects gradients during backward.
    pub fn parameter(data: Vec<f64>, shape: &[usize]) -> Result<Tensor> {
        check_shape(data.len(), shape)?;
        Ok(Self::from_parts(data.into(), shape.to_vec(), true, None))
    }

    /// Leaf sharing an existing buffer; used to hand the same weights to
    /// several independent graphs without copying.
    pub fn from_shared(data: Arc<[f64]>, shape: &[usize], requires_grad: bool) -> Result<Tensor> {
        check_shape(data.len(), shape)?;
        Ok(Self::from_parts(data, shape.to_vec(), requires_grad, None))
    }

    pub fn scalar(value: f64) -> Tensor {
        Self::from_parts(vec![value].into(), vec![1], false, None)
    }

    pub fn zeros(shape: &[usize]) -> Tensor {
        Self::from_parts(vec![0.0; numel(shape)].into(), shape.to_vec(), false, None)
    }

    /// Builds the result of an operation. The graph edge is only kept when
    /// some parent requires a gradient.
    pub(crate) fn from_op(
        data: Vec<f64>,
        shape: Vec<usize>,
        parents: &[&Tensor],
        backward: impl Fn(&[f64]) -> ParentGrads + 'static,
    ) -> Tensor {
        debug_assert_eq!(data.len(), numel(&shape));
        let requires_grad = parents.iter().any(|p| p.requires_grad());
        let grad_fn = requires_grad.then(|| GradFn {
            parents: parents.iter().map(|p| (*p).clone()).collect(),
            backward: Box::new(backward),
        });
        Self::from_parts(data.into(), shape, requires_grad, grad_fn)
    }

    /// Node with a caller-supplied forward value and backward rule.
    ///
    /// `backward` receives the upstream gradient (same length as `data`) and
    /// returns one gradient per input, each matching that input's length.
    /// This is how quantizers declare a rounding forward with an identity
    /// backward.
    pub fn custom(
        inputs: &[&Tensor],
        data: Vec<f64>,
        shape: &[usize],
        backward: impl Fn(&[f64]) -> Vec<Vec<f64>> + 'static,
    ) -> Result<Tensor> {
        check_shape(data.len(), shape)?;
        let lens: Vec<usize> = inputs.iter().map(|t| t.numel()).collect();
        let flags: Vec<bool> = inputs.iter().map(|t| t.requires_grad()).collect();
        Ok(Self::from_op(data, shape.to_vec(), inputs, move |g| {
            let grads = backward(g);
            assert_eq!(grads.len(), lens.len(), "custom backward arity");
            grads
                .into_iter()
                .zip(&lens)
                .zip(&flags)
                .map(|((gi, &len), &rg)| {
                    assert_eq!(gi.len(), len, "custom backward gradient length");
                    rg.then_some(gi)
                })
                .collect()
        }))
    }

    pub fn shape(&self) -> &[usize] {
        &self.0.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.0.data
    }

    pub fn shared_data(&self) -> Arc<[f64]> {
        Arc::clone(&self.0.data)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.data.to_vec()
    }

    pub fn numel(&self) -> usize {
        self.0.data.len()
    }

    pub fn requires_grad(&self) -> bool {
        self.0.requires_grad
    }

    /// Value of a single-element tensor.
    pub fn item(&self) -> Result<f64> {
        if self.numel() != 1 {
            bail!(Usage, "item() on tensor of shape {:?}", self.shape());
        }
        Ok(self.0.data[0])
    }

    /// Accumulated gradient; `None` until a backward pass reaches this tensor.
    pub fn grad(&self) -> Option<Vec<f64>> {
        self.0.grad.borrow().clone()
    }

    pub fn zero_grad(&self) {
        *self.0.grad.borrow_mut() = None;
    }

    /// Same values, cut from the graph (stop-gradient).
    pub fn detach(&self) -> Tensor {
        Self::from_parts(self.shared_data(), self.0.shape.clone(), false, None)
    }

    /// Reverse-mode sweep from a scalar loss. Gradients are summed into the
    /// slot of every tensor on the path that requires one; calling twice
    /// without [`Tensor::zero_grad`] accumulates.
    pub fn backward(&self) -> Result<()> {
        if self.numel() != 1 {
            return Err(Error::Usage(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape()
            )));
        }
        if !self.requires_grad() {
            return Ok(());
        }
        let order = self.topological_order();
        let mut pending: HashMap<*const Node, Vec<f64>> = HashMap::new();
        pending.insert(Rc::as_ptr(&self.0), vec![1.0]);
        for tensor in order.iter().rev() {
            let key = Rc::as_ptr(&tensor.0);
            let Some(g) = pending.remove(&key) else {
                continue;
            };
            if let Some(grad_fn) = &tensor.0.grad_fn {
                let parent_grads = (grad_fn.backward)(&g);
                for (parent, pg) in grad_fn.parents.iter().zip(parent_grads) {
                    let Some(pg) = pg else { continue };
                    if !parent.requires_grad() {
                        continue;
                    }
                    debug_assert_eq!(pg.len(), parent.numel());
                    match pending.entry(Rc::as_ptr(&parent.0)) {
                        std::collections::hash_map::Entry::Occupied(mut e) => {
                            for (acc, v) in e.get_mut().iter_mut().zip(&pg) {
                                *acc += v;
                            }
                        }
                        std::collections::hash_map::Entry::Vacant(e) => {
                            e.insert(pg);
                        }
                    }
                }
            }
            let mut slot = tensor.0.grad.borrow_mut();
            match slot.as_mut() {
                Some(acc) => {
                    for (a, v) in acc.iter_mut().zip(&g) {
                        *a += v;
                    }
                }
                None => *slot = Some(g),
            }
        }
        Ok(())
    }

    /// Post-order over nodes that require a gradient (parents before children).
    fn topological_order(&self) -> Vec<Tensor> {
        let mut order = Vec::new();
        let mut visited: HashSet<*const Node> = HashSet::new();
        let mut stack: Vec<(Tensor, usize)> = vec![(self.clone(), 0)];
        visited.insert(Rc::as_ptr(&self.0));
        while let Some((tensor, next)) = stack.pop() {
            let parents = tensor
                .0
                .grad_fn
                .as_ref()
                .map(|g| g.parents.as_slice())
                .unwrap_or(&[]);
            if next < parents.len() {
                let parent = parents[next].clone();
                stack.push((tensor, next + 1));
                if parent.requires_grad() && visited.insert(Rc::as_ptr(&parent.0)) {
                    stack.push((parent, 0));
                }
            } else {
                order.push(tensor);
            }
        }
        order
    }
}
