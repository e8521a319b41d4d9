use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{BodyModel, BodyModelParts, JointSlot};
use super::params::{EXPRESSION_DIMS, EYELID_DIMS};

pub const TOY_SHAPE_DIMS: usize = 110;
pub const TOY_FACE_SHAPE_DIMS: usize = 100;

const TOY_VERTICES: [[f64; 3]; 12] = [
    [-0.3, 0.0, 0.0],
    [0.3, 0.0, 0.0],
    [-0.2, 0.8, 0.0],
    [0.2, 0.8, 0.0],
    [0.0, 1.1, 0.1],
    [-0.1, 1.3, 0.1],
    [0.1, 1.3, 0.1],
    [0.0, 1.5, 0.0],
    [0.0, 1.15, 0.15],
    [0.0, 1.05, 0.12],
    [0.6, 0.85, 0.0],
    [0.9, 0.85, 0.0],
];

const FACE_VERTICES: [usize; 6] = [4, 5, 6, 7, 8, 9];

/// Small synthetic upper body: pelvis root, neck, jaw, shoulder.
///
/// Vertices 2 and 3 form the neck ring, vertex 8 is a tooth on the jaw.
/// Basis directions are seeded noise so every term is exercised.
pub fn toy_body_model() -> BodyModel {
    let nv = TOY_VERTICES.len();
    let nj = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(0x70_7e);
    let mut basis = |k: usize, scale: f64, only_face: bool| -> Vec<f64> {
        let mut out = Vec::with_capacity(nv * 3 * k);
        for v in 0..nv {
            let live = !only_face || FACE_VERTICES.contains(&v);
            for _ in 0..3 * k {
                let x: f64 = rng.random_range(-1.0..1.0);
                out.push(if live { x * scale } else { 0.0 });
            }
        }
        out
    };
    let shape_dirs = basis(TOY_SHAPE_DIMS, 0.01, false);
    let pose_dirs = basis(9 * (nj - 1), 0.005, false);
    let expr_dirs = basis(EXPRESSION_DIMS, 0.002, true);
    let eyelid_dirs = basis(EYELID_DIMS, 0.01, true);

    let mut regressor = vec![0.0; nj * nv];
    for (j, verts) in [&[0usize, 1][..], &[2, 3], &[4, 9], &[10]].iter().enumerate() {
        for &v in *verts {
            regressor[j * nv + v] = 1.0 / verts.len() as f64;
        }
    }
    let rows: [[f64; 4]; 12] = [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.7, 0.3, 0.0, 0.0],
        [0.7, 0.3, 0.0, 0.0],
        [0.0, 0.5, 0.5, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.4, 0.0, 0.0, 0.6],
        [0.0, 0.0, 0.0, 1.0],
    ];

    BodyModel::new(BodyModelParts {
        n_vertices: nv,
        n_joints: nj,
        template: TOY_VERTICES.concat(),
        shape_dirs,
        n_shape: TOY_SHAPE_DIMS,
        n_face_shape: TOY_FACE_SHAPE_DIMS,
        pose_dirs,
        n_pose: 9 * (nj - 1),
        expr_dirs,
        eyelid_dirs,
        joint_regressor: regressor,
        blend_weights: rows.concat(),
        parents: vec![-1, 0, 1, 0],
        neck_ring: vec![(2, 0.9), (3, 0.6)],
        face_weights: vec![vec![0.0, 1.0, 0.0, 0.0]; 2],
        face_vertices: FACE_VERTICES.to_vec(),
        teeth: vec![(8, 2)],
        joint_slots: vec![
            JointSlot::Root,
            JointSlot::Body(0),
            JointSlot::Jaw,
            JointSlot::Body(1),
        ],
    })
    .expect("toy model is valid")
}
