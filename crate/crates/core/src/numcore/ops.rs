use super::tensor::{numel, Tensor};
use crate::error::{bail, Result};

/// Elementwise operation kinds. Binary kinds broadcast numpy-style
/// (trailing axes aligned, extent 1 stretches).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementwise {
    Add,
    Sub,
    Mul,
    Div,
    Scale(f64),
    Tanh,
    Square,
    Relu,
    Sqrt,
}

impl Elementwise {
    fn is_binary(self) -> bool {
        matches!(
            self,
            Elementwise::Add | Elementwise::Sub | Elementwise::Mul | Elementwise::Div
        )
    }
}

pub fn elementwise(kind: Elementwise, a: &Tensor, b: Option<&Tensor>) -> Result<Tensor> {
    match (kind.is_binary(), b) {
        (true, Some(b)) => binary(kind, a, b),
        (true, None) => bail!(Usage, "{kind:?} needs two operands"),
        (false, None) => Ok(unary(kind, a)),
        (false, Some(_)) => bail!(Usage, "{kind:?} takes a single operand"),
    }
}

fn broadcast_shape(a: &[usize], b: &[usize]) -> Result<Vec<usize>> {
    let rank = a.len().max(b.len());
    let mut out = vec![0; rank];
    for i in 0..rank {
        let da = if i + a.len() >= rank { a[i + a.len() - rank] } else { 1 };
        let db = if i + b.len() >= rank { b[i + b.len() - rank] } else { 1 };
        out[i] = match (da, db) {
            (x, y) if x == y => x,
            (1, y) => y,
            (x, 1) => x,
            _ => bail!(Dimension, "cannot broadcast {a:?} with {b:?}"),
        };
    }
    Ok(out)
}

/// For every flat index of `out`, the flat index into a tensor of shape
/// `src` that broadcasts onto it.
fn broadcast_map(src: &[usize], out: &[usize]) -> Vec<usize> {
    let rank = out.len();
    let offset = rank - src.len();
    let mut strides = vec![0usize; rank];
    let mut acc = 1;
    for i in (0..src.len()).rev() {
        strides[i + offset] = if src[i] == 1 { 0 } else { acc };
        acc *= src[i];
    }
    let total = numel(out);
    let mut map = Vec::with_capacity(total);
    let mut idx = vec![0usize; rank];
    let mut flat = 0usize;
    for _ in 0..total {
        map.push(flat);
        for axis in (0..rank).rev() {
            idx[axis] += 1;
            flat += strides[axis];
            if idx[axis] < out[axis] {
                break;
            }
            flat -= strides[axis] * out[axis];
            idx[axis] = 0;
        }
    }
    map
}

/// Sum `g` (shaped like the broadcast output) back onto the source extent.
fn reduce_to(g: &[f64], map: Option<&[usize]>, len: usize) -> Vec<f64> {
    match map {
        None => g.to_vec(),
        Some(map) => {
            let mut out = vec![0.0; len];
            for (gi, &m) in g.iter().zip(map) {
                out[m] += gi;
            }
            out
        }
    }
}

fn binary(kind: Elementwise, a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let shape = broadcast_shape(a.shape(), b.shape())?;
    let map_a = (a.shape() != shape.as_slice()).then(|| broadcast_map(a.shape(), &shape));
    let map_b = (b.shape() != shape.as_slice()).then(|| broadcast_map(b.shape(), &shape));
    let n = numel(&shape);
    let (ad, bd) = (a.data(), b.data());
    let at = |i: usize| map_a.as_ref().map_or(i, |m| m[i]);
    let bt = |i: usize| map_b.as_ref().map_or(i, |m| m[i]);
    let f: fn(f64, f64) -> f64 = match kind {
        Elementwise::Add => |x, y| x + y,
        Elementwise::Sub => |x, y| x - y,
        Elementwise::Mul => |x, y| x * y,
        Elementwise::Div => |x, y| x / y,
        _ => unreachable!(),
    };
    let data: Vec<f64> = if map_a.is_none() && map_b.is_none() {
        ad.iter().zip(bd).map(|(&x, &y)| f(x, y)).collect()
    } else {
        (0..n).map(|i| f(ad[at(i)], bd[bt(i)])).collect()
    };

    let (a_req, b_req) = (a.requires_grad(), b.requires_grad());
    let (a_len, b_len) = (a.numel(), b.numel());
    let needs_values = matches!(kind, Elementwise::Mul | Elementwise::Div);
    let (ac, bc) = if needs_values {
        (Some(a.detach()), Some(b.detach()))
    } else {
        (None, None)
    };
    Ok(Tensor::from_op(data, shape, &[a, b], move |g| {
        let at = |i: usize| map_a.as_ref().map_or(i, |m| m[i]);
        let bt = |i: usize| map_b.as_ref().map_or(i, |m| m[i]);
        let (ga, gb): (Option<Vec<f64>>, Option<Vec<f64>>) = match kind {
            Elementwise::Add => (
                a_req.then(|| reduce_to(g, map_a.as_deref(), a_len)),
                b_req.then(|| reduce_to(g, map_b.as_deref(), b_len)),
            ),
            Elementwise::Sub => (
                a_req.then(|| reduce_to(g, map_a.as_deref(), a_len)),
                b_req.then(|| {
                    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
                    reduce_to(&neg, map_b.as_deref(), b_len)
                }),
            ),
            Elementwise::Mul => {
                let (ad, bd) = (ac.as_ref().unwrap().data(), bc.as_ref().unwrap().data());
                (
                    a_req.then(|| {
                        let local: Vec<f64> =
                            g.iter().enumerate().map(|(i, gi)| gi * bd[bt(i)]).collect();
                        reduce_to(&local, map_a.as_deref(), a_len)
                    }),
                    b_req.then(|| {
                        let local: Vec<f64> =
                            g.iter().enumerate().map(|(i, gi)| gi * ad[at(i)]).collect();
                        reduce_to(&local, map_b.as_deref(), b_len)
                    }),
                )
            }
            Elementwise::Div => {
                let (ad, bd) = (ac.as_ref().unwrap().data(), bc.as_ref().unwrap().data());
                (
                    a_req.then(|| {
                        let local: Vec<f64> =
                            g.iter().enumerate().map(|(i, gi)| gi / bd[bt(i)]).collect();
                        reduce_to(&local, map_a.as_deref(), a_len)
                    }),
                    b_req.then(|| {
                        let local: Vec<f64> = g
                            .iter()
                            .enumerate()
                            .map(|(i, gi)| {
                                let y = bd[bt(i)];
                                -gi * ad[at(i)] / (y * y)
                            })
                            .collect();
                        reduce_to(&local, map_b.as_deref(), b_len)
                    }),
                )
            }
            _ => unreachable!(),
        };
        vec![ga, gb]
    }))
}

fn unary(kind: Elementwise, a: &Tensor) -> Tensor {
    let x = a.data();
    let data: Vec<f64> = match kind {
        Elementwise::Scale(s) => x.iter().map(|v| v * s).collect(),
        Elementwise::Tanh => x.iter().map(|v| v.tanh()).collect(),
        Elementwise::Square => x.iter().map(|v| v * v).collect(),
        Elementwise::Relu => x.iter().map(|v| v.max(0.0)).collect(),
        Elementwise::Sqrt => x.iter().map(|v| v.sqrt()).collect(),
        _ => unreachable!(),
    };
    // Derivatives need either the input or the output; keep whichever.
    let input = a.detach();
    let output: Option<Vec<f64>> =
        matches!(kind, Elementwise::Tanh | Elementwise::Sqrt).then(|| data.clone());
    Tensor::from_op(data, a.shape().to_vec(), &[a], move |g| {
        let x = input.data();
        let gx: Vec<f64> = match kind {
            Elementwise::Scale(s) => g.iter().map(|v| v * s).collect(),
            Elementwise::Tanh => {
                let y = output.as_ref().unwrap();
                g.iter().zip(y).map(|(gi, yi)| gi * (1.0 - yi * yi)).collect()
            }
            Elementwise::Square => g.iter().zip(x).map(|(gi, xi)| 2.0 * gi * xi).collect(),
            Elementwise::Relu => g
                .iter()
                .zip(x)
                .map(|(gi, &xi)| if xi > 0.0 { *gi } else { 0.0 })
                .collect(),
            Elementwise::Sqrt => {
                let y = output.as_ref().unwrap();
                g.iter().zip(y).map(|(gi, yi)| gi * 0.5 / yi).collect()
            }
            _ => unreachable!(),
        };
        vec![Some(gx)]
    })
}

impl Tensor {
    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        binary(Elementwise::Add, self, other)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        binary(Elementwise::Sub, self, other)
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        binary(Elementwise::Mul, self, other)
    }

    pub fn div(&self, other: &Tensor) -> Result<Tensor> {
        binary(Elementwise::Div, self, other)
    }

    pub fn scale(&self, s: f64) -> Tensor {
        unary(Elementwise::Scale(s), self)
    }

    pub fn tanh(&self) -> Tensor {
        unary(Elementwise::Tanh, self)
    }

    pub fn square(&self) -> Tensor {
        unary(Elementwise::Square, self)
    }

    pub fn relu(&self) -> Tensor {
        unary(Elementwise::Relu, self)
    }

    pub fn sqrt(&self) -> Tensor {
        unary(Elementwise::Sqrt, self)
    }

    pub fn sum(&self) -> Tensor {
        let total: f64 = self.data().iter().sum();
        let n = self.numel();
        Tensor::from_op(vec![total], vec![1], &[self], move |g| {
            vec![Some(vec![g[0]; n])]
        })
    }

    pub fn mean(&self) -> Tensor {
        let n = self.numel() as f64;
        self.sum().scale(1.0 / n)
    }

    /// Same data, new extents.
    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor> {
        if numel(shape) != self.numel() || shape.iter().any(|&d| d == 0) {
            bail!(
                Dimension,
                "cannot reshape {:?} into {shape:?}",
                self.shape()
            );
        }
        Ok(Tensor::from_op(
            self.to_vec(),
            shape.to_vec(),
            &[self],
            |g| vec![Some(g.to_vec())],
        ))
    }

    /// `out[i] = self.flat[indices[i]]`, shaped as `shape`. The backward pass
    /// scatter-adds, so indices may repeat.
    pub fn gather(&self, indices: &[usize], shape: &[usize]) -> Result<Tensor> {
        if numel(shape) != indices.len() {
            bail!(
                Dimension,
                "gather of {} indices into shape {shape:?}",
                indices.len()
            );
        }
        let n = self.numel();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            bail!(Dimension, "gather index {bad} out of range for {n} values");
        }
        let src = self.data();
        let data = indices.iter().map(|&i| src[i]).collect();
        let idx = indices.to_vec();
        Ok(Tensor::from_op(data, shape.to_vec(), &[self], move |g| {
            let mut out = vec![0.0; n];
            for (gi, &i) in g.iter().zip(&idx) {
                out[i] += gi;
            }
            vec![Some(out)]
        }))
    }

    /// 2-D transpose.
    pub fn transpose(&self) -> Result<Tensor> {
        let [r, c] = self.matrix_dims()?;
        let indices: Vec<usize> = (0..c)
            .flat_map(|j| (0..r).map(move |i| i * c + j))
            .collect();
        self.gather(&indices, &[c, r])
    }

    fn matrix_dims(&self) -> Result<[usize; 2]> {
        match *self.shape() {
            [r, c] => Ok([r, c]),
            _ => bail!(Dimension, "expected a matrix, got shape {:?}", self.shape()),
        }
    }

    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        let [m, k] = self.matrix_dims()?;
        let [k2, n] = other.matrix_dims()?;
        if k != k2 {
            bail!(
                Dimension,
                "matmul inner dimensions differ: {:?} x {:?}",
                self.shape(),
                other.shape()
            );
        }
        let data = matmul_raw(self.data(), other.data(), m, k, n);
        let (a, b) = (self.detach(), other.detach());
        let (a_req, b_req) = (self.requires_grad(), other.requires_grad());
        Ok(Tensor::from_op(data, vec![m, n], &[self, other], move |g| {
            // dA = G · Bᵀ, dB = Aᵀ · G
            let ga = a_req.then(|| {
                let bd = b.data();
                let mut out = vec![0.0; m * k];
                for i in 0..m {
                    let grow = &g[i * n..(i + 1) * n];
                    for p in 0..k {
                        let brow = &bd[p * n..(p + 1) * n];
                        out[i * k + p] = grow.iter().zip(brow).map(|(x, y)| x * y).sum();
                    }
                }
                out
            });
            let gb = b_req.then(|| {
                let ad = a.data();
                let mut out = vec![0.0; k * n];
                for i in 0..m {
                    let grow = &g[i * n..(i + 1) * n];
                    for p in 0..k {
                        let av = ad[i * k + p];
                        if av == 0.0 {
                            continue;
                        }
                        let orow = &mut out[p * n..(p + 1) * n];
                        for (o, gv) in orow.iter_mut().zip(grow) {
                            *o += av * gv;
                        }
                    }
                }
                out
            });
            vec![ga, gb]
        }))
    }

    /// Concatenate along `axis`; all other extents must agree.
    pub fn concat(tensors: &[&Tensor], axis: usize) -> Result<Tensor> {
        let Some(first) = tensors.first() else {
            bail!(Usage, "concat of zero tensors");
        };
        let rank = first.shape().len();
        if axis >= rank {
            bail!(Dimension, "concat axis {axis} for rank {rank}");
        }
        for t in tensors {
            let s = t.shape();
            if s.len() != rank
                || s.iter()
                    .zip(first.shape())
                    .enumerate()
                    .any(|(i, (x, y))| i != axis && x != y)
            {
                bail!(
                    Dimension,
                    "concat shapes {:?} and {s:?} differ off axis {axis}",
                    first.shape()
                );
            }
        }
        let outer: usize = first.shape()[..axis].iter().product();
        let inner: usize = first.shape()[axis + 1..].iter().product();
        let blocks: Vec<usize> = tensors.iter().map(|t| t.shape()[axis] * inner).collect();
        let mut shape = first.shape().to_vec();
        shape[axis] = tensors.iter().map(|t| t.shape()[axis]).sum();
        let row: usize = blocks.iter().sum();
        let mut data = Vec::with_capacity(outer * row);
        for o in 0..outer {
            for (t, &blk) in tensors.iter().zip(&blocks) {
                data.extend_from_slice(&t.data()[o * blk..(o + 1) * blk]);
            }
        }
        let flags: Vec<bool> = tensors.iter().map(|t| t.requires_grad()).collect();
        Ok(Tensor::from_op(data, shape, tensors, move |g| {
            let mut grads: Vec<Vec<f64>> = blocks
                .iter()
                .map(|&blk| Vec::with_capacity(outer * blk))
                .collect();
            for o in 0..outer {
                let mut start = o * row;
                for (gv, &blk) in grads.iter_mut().zip(&blocks) {
                    gv.extend_from_slice(&g[start..start + blk]);
                    start += blk;
                }
            }
            grads
                .into_iter()
                .zip(&flags)
                .map(|(gv, &f)| f.then_some(gv))
                .collect()
        }))
    }

    /// Repeat every time step `factor` times: `[C×T] -> [C×(T·factor)]`.
    pub fn upsample_nearest(&self, factor: usize) -> Result<Tensor> {
        let [c, t] = self.matrix_dims()?;
        if factor == 0 {
            bail!(Usage, "upsample factor must be positive");
        }
        let indices: Vec<usize> = (0..c)
            .flat_map(|ch| (0..t * factor).map(move |s| ch * t + s / factor))
            .collect();
        self.gather(&indices, &[c, t * factor])
    }
}

pub(crate) fn matmul_raw(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let orow = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let av = a[i * k + p];
            let brow = &b[p * n..(p + 1) * n];
            for (o, bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    out
}

/// Mean squared difference, the reconstruction loss used throughout.
pub fn mse(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    Ok(a.sub(b)?.square().mean())
}
