use super::tensor::Tensor;
use crate::error::Result;

/// Central-difference gradient of a scalar function at `x`:
/// `(f(x + h·eᵢ) − f(x − h·eᵢ)) / 2h` per coordinate.
///
/// Independent of the reverse-mode machinery: `f` only ever sees constant
/// tensors.
pub fn finite_difference_gradient<F>(f: F, x: &Tensor, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&Tensor) -> Result<Tensor>,
{
    let base = x.to_vec();
    let shape = x.shape().to_vec();
    let mut grad = Vec::with_capacity(base.len());
    let mut probe = base.clone();
    for i in 0..base.len() {
        probe[i] = base[i] + h;
        let plus = f(&Tensor::new(probe.clone(), &shape)?)?.item()?;
        probe[i] = base[i] - h;
        let minus = f(&Tensor::new(probe.clone(), &shape)?)?.item()?;
        probe[i] = base[i];
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// `true` when `a` and `b` agree within `rel` relative error or `abs` absolute.
pub fn grads_close(a: &[f64], b: &[f64], rel: f64, abs: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(&x, &y)| {
            let diff = (x - y).abs();
            diff <= abs || diff <= rel * x.abs().max(y.abs())
        })
}
