use crate::error::{bail, Result};

/// Monotone alignment between two sequences as `(i, j)` index pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentPath(pub Vec<(usize, usize)>);

impl AlignmentPath {
    /// Starts at `(0,0)`, ends at `(m−1,n−1)`, and moves by `(1,0)`, `(0,1)`
    /// or `(1,1)`.
    pub fn is_valid(&self, m: usize, n: usize) -> bool {
        let p = &self.0;
        if m == 0 || n == 0 || p.first() != Some(&(0, 0)) || p.last() != Some(&(m - 1, n - 1)) {
            return false;
        }
        p.windows(2).all(|w| {
            let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
        })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }
}

/// Exact dynamic-time-warping cost and one optimal path.
///
/// On backtracking, ties prefer the diagonal, then advancing `a`, then `b`.
pub fn dtw<T>(a: &[T], b: &[T], dist: impl Fn(&T, &T) -> f64) -> Result<(f64, AlignmentPath)> {
    let (m, n) = (a.len(), b.len());
    if m == 0 || n == 0 {
        bail!(Usage, "DTW needs non-empty sequences, got lengths {m} and {n}");
    }
    let mut acc = vec![f64::INFINITY; m * n];
    let at = |i: usize, j: usize| i * n + j;
    for i in 0..m {
        for j in 0..n {
            let d = dist(&a[i], &b[j]);
            if d.is_nan() {
                bail!(Numeric, "frame distance is NaN at ({i}, {j})");
            }
            let prev = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { acc[at(i - 1, j - 1)] } else { f64::INFINITY };
                let up = if i > 0 { acc[at(i - 1, j)] } else { f64::INFINITY };
                let left = if j > 0 { acc[at(i, j - 1)] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[at(i, j)] = prev + d;
        }
    }

    let mut path = vec![(m - 1, n - 1)];
    let (mut i, mut j) = (m - 1, n - 1);
    while (i, j) != (0, 0) {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = acc[at(i - 1, j - 1)];
            let up = acc[at(i - 1, j)];
            let left = acc[at(i, j - 1)];
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        path.push((i, j));
    }
    path.reverse();
    Ok((acc[at(m - 1, n - 1)], AlignmentPath(path)))
}
