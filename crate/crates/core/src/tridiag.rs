//! Implicit-shift QL eigensolver for real symmetric tridiagonal matrices.

/// Eigen-decomposition result. `vectors` is row-major with one eigenvector
/// per row, matching the order of `values` (ascending).
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
    pub n: usize,
}

impl TridiagEigen {
    pub fn vector(&self, i: usize) -> Option<&[f64]> {
        self.vectors.as_ref().map(|v| &v[i * self.n..(i + 1) * self.n])
    }
}

/// Diagonalizes the matrix with diagonal `diag` and sub-diagonal `offdiag`.
/// Returns `None` if some eigenvalue fails to converge in 30·n sweeps.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], offdiag: &[f64], want_vectors: bool) -> Option<TridiagEigen> {
    let n = diag.len();
    assert!(n == 0 || offdiag.len() == n - 1, "offdiag must have n-1 entries");
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(offdiag);
    // z holds the accumulated rotations transposed: row i is column i of Z.
    let mut z = if want_vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        Some(z)
    } else {
        None
    };

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 30 * n.max(1) {
                return None;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for k in 0..n {
                        let f = zi1[k];
                        zi1[k] = s * zi[k] + c * f;
                        zi[k] = c * zi[k] - s * f;
                    }
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = z.map(|z| {
        let mut out = Vec::with_capacity(n * n);
        for &i in &order {
            let row = &z[i * n..(i + 1) * n];
            // fix the sign so the largest component is positive
            let pivot = row.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            out.extend(row.iter().map(|x| sign * x));
        }
        out
    });
    Some(TridiagEigen { values, vectors, n })
}
