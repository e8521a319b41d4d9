use super::tensor::Tensor;
use crate::error::{bail, Result};

/// Output length of a same-padded convolution with the given stride.
pub fn conv_output_len(t: usize, stride: usize) -> usize {
    t.div_ceil(stride)
}

/// Valid output positions `[lo, hi)` for one kernel tap, and the input
/// offset that tap reads relative to `t * stride`.
fn tap_range(t_in: usize, t_out: usize, stride: usize, offset: isize) -> (usize, usize) {
    // need 0 <= t*stride + offset < t_in
    let lo = if offset < 0 {
        ((-offset) as usize).div_ceil(stride)
    } else {
        0
    };
    let hi_input = t_in as isize - offset; // t*stride < hi_input
    let hi = if hi_input <= 0 {
        0
    } else {
        (hi_input as usize).div_ceil(stride).min(t_out)
    };
    (lo.min(hi), hi)
}

impl Tensor {
    /// Same-padded 1-D cross-correlation.
    ///
    /// `self` is `[C_in × T]`, `kernel` is `[C_out × C_in × K]` with odd `K`.
    /// Zero padding of `dilation·(K−1)/2` on both sides; the output has
    /// `ceil(T/stride)` steps.
    pub fn conv1d(&self, kernel: &Tensor, stride: usize, dilation: usize) -> Result<Tensor> {
        let (c_in, t_in) = match *self.shape() {
            [c, t] => (c, t),
            _ => bail!(Dimension, "conv1d input must be [C×T], got {:?}", self.shape()),
        };
        let (c_out, kc, k) = match *kernel.shape() {
            [o, c, k] => (o, c, k),
            _ => bail!(
                Dimension,
                "conv1d kernel must be [C_out×C_in×K], got {:?}",
                kernel.shape()
            ),
        };
        if kc != c_in {
            bail!(
                Dimension,
                "conv1d channel mismatch: input has {c_in}, kernel expects {kc}"
            );
        }
        if k % 2 == 0 {
            bail!(Usage, "conv1d same padding needs an odd kernel, got {k}");
        }
        if !(1..=2).contains(&stride) || dilation == 0 {
            bail!(Usage, "conv1d stride {stride} / dilation {dilation} unsupported");
        }
        let t_out = conv_output_len(t_in, stride);
        let pad = (dilation * (k - 1) / 2) as isize;
        let x = self.data();
        let w = kernel.data();
        let mut y = vec![0.0; c_out * t_out];
        for o in 0..c_out {
            let yrow = &mut y[o * t_out..(o + 1) * t_out];
            for c in 0..c_in {
                let xrow = &x[c * t_in..(c + 1) * t_in];
                for tap in 0..k {
                    let wv = w[(o * c_in + c) * k + tap];
                    let offset = (tap * dilation) as isize - pad;
                    let (lo, hi) = tap_range(t_in, t_out, stride, offset);
                    if lo >= hi {
                        continue;
                    }
                    if stride == 1 {
                        let start = (lo as isize + offset) as usize;
                        let xs = &xrow[start..start + (hi - lo)];
                        for (yv, xv) in yrow[lo..hi].iter_mut().zip(xs) {
                            *yv += wv * xv;
                        }
                    } else {
                        for t in lo..hi {
                            yrow[t] += wv * xrow[(t as isize * stride as isize + offset) as usize];
                        }
                    }
                }
            }
        }

        let xin = self.detach();
        let win = kernel.detach();
        let (x_req, w_req) = (self.requires_grad(), kernel.requires_grad());
        Ok(Tensor::from_op(
            y,
            vec![c_out, t_out],
            &[self, kernel],
            move |g| {
                let x = xin.data();
                let w = win.data();
                let mut gx = x_req.then(|| vec![0.0; c_in * t_in]);
                let mut gw = w_req.then(|| vec![0.0; c_out * c_in * k]);
                for o in 0..c_out {
                    let grow = &g[o * t_out..(o + 1) * t_out];
                    for c in 0..c_in {
                        let xrow = &x[c * t_in..(c + 1) * t_in];
                        for tap in 0..k {
                            let widx = (o * c_in + c) * k + tap;
                            let offset = (tap * dilation) as isize - pad;
                            let (lo, hi) = tap_range(t_in, t_out, stride, offset);
                            if lo >= hi {
                                continue;
                            }
                            if let Some(gx) = gx.as_mut() {
                                let wv = w[widx];
                                let gxrow = &mut gx[c * t_in..(c + 1) * t_in];
                                for t in lo..hi {
                                    gxrow[(t as isize * stride as isize + offset) as usize] +=
                                        wv * grow[t];
                                }
                            }
                            if let Some(gw) = gw.as_mut() {
                                let mut acc = 0.0;
                                for t in lo..hi {
                                    acc += grow[t]
                                        * xrow[(t as isize * stride as isize + offset) as usize];
                                }
                                gw[widx] += acc;
                            }
                        }
                    }
                }
                vec![gx, gw]
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tap_ranges_stay_in_bounds() {
        for t_in in 1..20 {
            for stride in 1..=2 {
                let t_out = conv_output_len(t_in, stride);
                for offset in -5isize..=5 {
                    let (lo, hi) = tap_range(t_in, t_out, stride, offset);
                    for t in 0..t_out {
                        let src = t as isize * stride as isize + offset;
                        let valid = src >= 0 && src < t_in as isize;
                        assert_eq!(valid, (lo..hi).contains(&t), "t_in={t_in} s={stride} off={offset} t={t}");
                    }
                }
            }
        }
    }
}
