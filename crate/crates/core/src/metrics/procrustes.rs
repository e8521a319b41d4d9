use nalgebra::{Matrix3, Vector3};

use crate::error::{bail, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RigidAlignment {
    /// Proper rotation, row-major.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    /// `R·xᵢ + t` for every source point.
    pub aligned: Vec<[f64; 3]>,
}

impl RigidAlignment {
    /// Sum of squared distances between the aligned points and `target`.
    pub fn residual(&self, target: &[[f64; 3]]) -> f64 {
        self.aligned
            .iter()
            .zip(target)
            .map(|(a, b)| (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>())
            .sum()
    }
}

fn centroid(points: &[[f64; 3]]) -> Vector3<f64> {
    points.iter().map(|p| Vector3::from(*p)).sum::<Vector3<f64>>() / points.len() as f64
}

/// Least-squares rotation and translation (no scale) taking `x` onto `y`,
/// by SVD of the cross-covariance. Reflections are excluded.
pub fn procrustes_align(x: &[[f64; 3]], y: &[[f64; 3]]) -> Result<RigidAlignment> {
    if x.len() != y.len() {
        bail!(Usage, "point counts differ: {} vs {}", x.len(), y.len());
    }
    if x.len() < 3 {
        bail!(Usage, "rigid alignment needs at least 3 points, got {}", x.len());
    }
    let cx = centroid(x);
    let cy = centroid(y);
    let mut cross = Matrix3::zeros();
    let mut spread = Matrix3::zeros();
    for (p, q) in x.iter().zip(y) {
        let dp = Vector3::from(*p) - cx;
        let dq = Vector3::from(*q) - cy;
        cross += dp * dq.transpose();
        spread += dp * dp.transpose();
    }
    if !cross.iter().all(|v| v.is_finite()) {
        bail!(Numeric, "non-finite point coordinates");
    }

    let sv = spread.symmetric_eigenvalues();
    let mut ev: Vec<f64> = sv.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if ev[0] <= 0.0 || ev[1] <= 1e-12 * ev[0] {
        bail!(Numeric, "source points are coincident or collinear");
    }

    let svd = cross.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => bail!(Numeric, "SVD did not converge"),
    };
    let v = v_t.transpose();
    let sign = (v * u.transpose()).determinant().signum();
    let fix = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, sign));
    let r = v * fix * u.transpose();
    let t = cy - r * cx;

    let aligned = x
        .iter()
        .map(|p| {
            let q = r * Vector3::from(*p) + t;
            [q.x, q.y, q.z]
        })
        .collect();
    Ok(RigidAlignment {
        rotation: [
            [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
            [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
            [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
        ],
        translation: [t.x, t.y, t.z],
        aligned,
    })
}
