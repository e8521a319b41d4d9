use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::Error;

fn t(data: &[f64], shape: &[usize]) -> Tensor {
    Tensor::new(data.to_vec(), shape).unwrap()
}

fn p(data: &[f64], shape: &[usize]) -> Tensor {
    Tensor::parameter(data.to_vec(), shape).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()
}

/// Reverse-mode gradient of `f` at `x` against central differences.
fn check_grad<F>(f: F, x: &[f64], shape: &[usize])
where
    F: Fn(&Tensor) -> crate::Result<Tensor>,
{
    let leaf = p(x, shape);
    f(&leaf).unwrap().backward().unwrap();
    let analytic = leaf.grad().unwrap();
    let numeric = finite_difference_gradient(&f, &t(x, shape), 1e-5).unwrap();
    assert!(
        grads_close(&analytic, &numeric, 1e-4, 1e-6),
        "analytic {analytic:?}\nnumeric  {numeric:?}"
    );
}

#[test]
fn elementwise_examples() {
    let z = elementwise(Elementwise::Tanh, &t(&[0.0], &[1]), None).unwrap();
    assert_eq!(z.data(), &[0.0]);

    let x = p(&[3.0], &[1]);
    let sq = elementwise(Elementwise::Square, &x, None).unwrap();
    sq.backward().unwrap();
    assert_eq!(x.grad().unwrap(), vec![6.0]);

    let s = elementwise(Elementwise::Add, &t(&[1.0, 2.0], &[2]), Some(&t(&[3.0, 4.0], &[2]))).unwrap();
    assert_eq!(s.data(), &[4.0, 6.0]);
}

#[test]
fn elementwise_arity_and_shape_errors() {
    let a = t(&[1.0, 2.0], &[2]);
    assert!(matches!(elementwise(Elementwise::Add, &a, None), Err(Error::Usage(_))));
    assert!(matches!(
        elementwise(Elementwise::Tanh, &a, Some(&a)),
        Err(Error::Usage(_))
    ));
    let b = t(&[1.0, 2.0, 3.0], &[3]);
    assert!(matches!(a.add(&b), Err(Error::Dimension(_))));
}

#[test]
fn broadcasting_adds_column_bias() {
    let x = t(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[2, 3]);
    let bias = p(&[10.0, 20.0], &[2, 1]);
    let y = x.add(&bias).unwrap();
    assert_eq!(y.data(), &[11.0, 12.0, 13.0, 24.0, 25.0, 26.0]);
    y.sum().backward().unwrap();
    assert_eq!(bias.grad().unwrap(), vec![3.0, 3.0]);
}

#[test]
fn matmul_examples() {
    let eye = t(&[1.0, 0.0, 0.0, 1.0], &[2, 2]);
    let m = t(&[1.0, 2.0, 3.0, 4.0], &[2, 2]);
    assert_eq!(eye.matmul(&m).unwrap().data(), m.data());
    let row = t(&[1.0, 0.0], &[1, 2]);
    let col = t(&[0.0, 1.0], &[2, 1]);
    assert_eq!(row.matmul(&col).unwrap().data(), &[0.0]);
    assert!(matches!(row.matmul(&m.reshape(&[4, 1]).unwrap()), Err(Error::Dimension(_))));
}

#[test]
fn matmul_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = random_vec(&mut rng, 12);
    let b = random_vec(&mut rng, 8);
    let bt = t(&b, &[4, 2]);
    check_grad(|x| Ok(x.matmul(&bt)?.square().sum()), &a, &[3, 4]);
    let at = t(&a, &[3, 4]);
    check_grad(|x| Ok(at.matmul(x)?.tanh().sum()), &b, &[4, 2]);
}

#[test]
fn conv1d_identity_kernels() {
    let x = t(&[1.0, -2.0, 3.5, 0.25, 7.0], &[1, 5]);
    let id1 = t(&[1.0], &[1, 1, 1]);
    assert_eq!(x.conv1d(&id1, 1, 1).unwrap().data(), x.data());
    let delta = t(&[0.0, 1.0, 0.0], &[1, 1, 3]);
    assert_eq!(x.conv1d(&delta, 1, 1).unwrap().data(), x.data());
    assert_eq!(x.conv1d(&delta, 1, 3).unwrap().data(), x.data());
}

#[test]
fn conv1d_two_stride2_stages_divide_time_by_four() {
    let x = Tensor::zeros(&[2, 16]);
    let k = Tensor::zeros(&[2, 2, 3]);
    let y = x.conv1d(&k, 2, 1).unwrap().conv1d(&k, 2, 1).unwrap();
    assert_eq!(y.shape(), &[2, 4]);
}

#[test]
fn conv1d_rejects_channel_mismatch_and_even_kernels() {
    let x = Tensor::zeros(&[3, 8]);
    assert!(matches!(
        x.conv1d(&Tensor::zeros(&[2, 2, 3]), 1, 1),
        Err(Error::Dimension(_))
    ));
    assert!(matches!(
        x.conv1d(&Tensor::zeros(&[2, 3, 2]), 1, 1),
        Err(Error::Usage(_))
    ));
}

#[test]
fn conv1d_matches_direct_sum() {
    // brute-force cross-correlation with explicit zero padding
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (c_in, c_out, k, t_in) = (3, 2, 3, 9);
    for &(stride, dil) in &[(1, 1), (1, 3), (2, 1), (2, 3)] {
        let x = random_vec(&mut rng, c_in * t_in);
        let w = random_vec(&mut rng, c_out * c_in * k);
        let y = t(&x, &[c_in, t_in]).conv1d(&t(&w, &[c_out, c_in, k]), stride, dil).unwrap();
        let pad = dil * (k - 1) / 2;
        let t_out = t_in.div_ceil(stride);
        for o in 0..c_out {
            for s in 0..t_out {
                let mut acc = 0.0;
                for c in 0..c_in {
                    for tap in 0..k {
                        let src = (s * stride + tap * dil) as isize - pad as isize;
                        if src >= 0 && (src as usize) < t_in {
                            acc += w[(o * c_in + c) * k + tap] * x[c * t_in + src as usize];
                        }
                    }
                }
                assert!((acc - y.data()[o * t_out + s]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn backward_examples() {
    let x = p(&[3.0], &[1]);
    x.square().backward().unwrap();
    assert_eq!(x.grad().unwrap(), vec![6.0]);

    let y = p(&[1.0, -2.0, 0.5], &[3]);
    mse(&y, &y).unwrap().backward().unwrap();
    assert_eq!(y.grad().unwrap(), vec![0.0; 3]);

    let v = p(&[1.0, 2.0], &[2]);
    assert!(matches!(v.square().backward(), Err(Error::Usage(_))));
}

#[test]
fn repeated_backward_accumulates() {
    let x = p(&[3.0], &[1]);
    let loss = x.square();
    loss.backward().unwrap();
    loss.backward().unwrap();
    assert_eq!(x.grad().unwrap(), vec![12.0]);
    x.zero_grad();
    assert!(x.grad().is_none());
}

#[test]
fn grad_shapes_match_for_every_reachable_tensor() {
    let w = p(&[0.1; 6], &[2, 3]);
    let x = t(&[1.0, 2.0, 3.0], &[3, 1]);
    let h = w.matmul(&x).unwrap().tanh();
    h.sum().backward().unwrap();
    assert_eq!(w.grad().unwrap().len(), 6);
    assert_eq!(h.grad().unwrap().len(), 2);
}

#[test]
fn three_layer_net_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w1 = t(&random_vec(&mut rng, 4 * 3 * 3), &[4, 3, 3]);
    let w2 = t(&random_vec(&mut rng, 4 * 4), &[4, 4]);
    let w3 = t(&random_vec(&mut rng, 2 * 4 * 3), &[2, 4, 3]);
    let b = t(&random_vec(&mut rng, 4), &[4, 1]);
    let net = |x: &Tensor| -> crate::Result<Tensor> {
        let h = x.conv1d(&w1, 2, 1)?.add(&b)?.tanh();
        let h = w2.matmul(&h)?.square();
        let h = h.upsample_nearest(2)?.conv1d(&w3, 1, 3)?;
        Ok(h.tanh().mean())
    };
    for _ in 0..5 {
        check_grad(&net, &random_vec(&mut rng, 3 * 7), &[3, 7]);
    }
}

#[test]
fn gather_concat_reshape_transpose_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = random_vec(&mut rng, 6);
    let other = t(&random_vec(&mut rng, 4), &[2, 2]);
    check_grad(
        |x| {
            let g = x.gather(&[0, 0, 5, 2], &[2, 2])?;
            let c = Tensor::concat(&[&g, &other, &x.reshape(&[3, 2])?.transpose()?.gather(&[0, 1, 2, 3], &[2, 2])?], 1)?;
            Ok(c.tanh().square().sum())
        },
        &x,
        &[2, 3],
    );
}

#[test]
fn div_and_sqrt_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let x: Vec<f64> = (0..5).map(|_| rng.random_range(0.5..2.0)).collect();
    let denom = t(&[1.5], &[1]);
    check_grad(|x| Ok(x.sqrt().div(&x.sum())?.div(&denom)?.square().sum()), &x, &[5]);
}

#[test]
fn custom_node_passes_declared_gradient() {
    let x = p(&[0.4, 1.6], &[2]);
    let rounded: Vec<f64> = x.data().iter().map(|v| v.round()).collect();
    let y = Tensor::custom(&[&x], rounded, &[2], |g| vec![g.to_vec()]).unwrap();
    assert_eq!(y.data(), &[0.0, 2.0]);
    y.scale(3.0).sum().backward().unwrap();
    assert_eq!(x.grad().unwrap(), vec![3.0, 3.0]);
}

#[test]
fn detach_blocks_gradient() {
    let x = p(&[2.0], &[1]);
    let y = x.mul(&x.detach()).unwrap();
    y.backward().unwrap();
    assert_eq!(x.grad().unwrap(), vec![2.0]);
}

#[test]
fn finite_difference_examples() {
    let ones = finite_difference_gradient(|x| Ok(x.sum()), &t(&[0.3, -1.0, 4.0], &[3]), 1e-5).unwrap();
    assert!(grads_close(&ones, &[1.0, 1.0, 1.0], 0.0, 1e-9));
    let g = finite_difference_gradient(|x| Ok(x.square().sum()), &t(&[3.0], &[1]), 1e-5).unwrap();
    assert!((g[0] - 6.0).abs() < 1e-6);
    check_grad(|x| Ok(x.tanh().square().sum()), &[0.3, -1.2, 1.9], &[3]);
}

#[test]
fn evaluation_is_bitwise_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let x = random_vec(&mut rng, 2 * 10);
    let w = random_vec(&mut rng, 3 * 2 * 3);
    let run = || {
        let xt = p(&x, &[2, 10]);
        let y = xt.conv1d(&t(&w, &[3, 2, 3]), 2, 1).unwrap().tanh().mean();
        y.backward().unwrap();
        (y.item().unwrap().to_bits(), xt.grad().unwrap())
    };
    let (a, b) = (run(), run());
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
}

proptest! {
    #[test]
    fn conv_length_is_ceil(t_in in 1usize..=64, stride in 1usize..=2, dil in 1usize..=3) {
        let x = Tensor::zeros(&[1, t_in]);
        let y = x.conv1d(&Tensor::zeros(&[1, 1, 3]), stride, dil).unwrap();
        prop_assert_eq!(y.shape()[1], t_in.div_ceil(stride));
    }

    #[test]
    fn elementwise_grads_match_fd(
        a in proptest::collection::vec(-2.0f64..2.0, 6),
        b in proptest::collection::vec(-2.0f64..2.0, 3),
    ) {
        let bt = t(&b, &[3]);
        let leaf = p(&a, &[2, 3]);
        let f = |x: &Tensor| -> crate::Result<Tensor> {
            Ok(x.mul(&bt)?.sub(&x.tanh())?.add(&bt.scale(0.5))?.square().sum())
        };
        f(&leaf).unwrap().backward().unwrap();
        let numeric = finite_difference_gradient(f, &t(&a, &[2, 3]), 1e-5).unwrap();
        prop_assert!(grads_close(&leaf.grad().unwrap(), &numeric, 1e-4, 1e-6));
    }
}
