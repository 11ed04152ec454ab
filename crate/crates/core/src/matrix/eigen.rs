use alloc::vec::Vec;

use super::{Matrix, Vector};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;
const REL_OFF_DIAGONAL: f64 = 1e-12;

/// Eigen-decomposition `M = V diag(λ) Vᵀ` of a real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: Vector,
    /// Orthonormal eigenvectors, column `k` belongs to `values[k]`.
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps over every upper off-diagonal pair, annihilating it with a plane
/// rotation, until the off-diagonal Frobenius norm drops below
/// `1e-12 · ‖M‖_F`. At most 100 sweeps are attempted.
///
/// `tol` bounds the admissible asymmetry `|m_ij − m_ji|` of the input.
pub fn sym_eigen(m: &Matrix, tol: f64) -> Result<SymEigen> {
    let (row, col, defect) = m.asymmetry().ok_or_else(|| Error::Dimension {
        op: "sym_eigen",
        detail: alloc::format!("expected a square matrix, got {}x{}", m.rows(), m.cols()),
    })?;
    if defect > tol {
        return Err(Error::NotSymmetric { row, col, defect });
    }

    let n = m.rows();
    // symmetrize so rotations act on an exactly symmetric matrix
    let mut a = m.clone();
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let mut v = Matrix::identity(n);
    let threshold = REL_OFF_DIAGONAL * a.norm_frobenius();

    let mut converged = off_diagonal_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) <= threshold;
    }
    if !converged {
        return Err(Error::EigenNoConvergence { sweeps });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&k| a[(k, k)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(SymEigen {
        values: Vector(values),
        vectors,
    })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    libm::sqrt(sum)
}

/// Applies the rotation that zeroes `a[p][q]`, accumulating it into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.is_infinite() {
        0.0
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0))
    };
    if t == 0.0 {
        // |apq| is negligible relative to the diagonal gap
        a[(p, q)] = 0.0;
        a[(q, p)] = 0.0;
        return;
    }
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    let s = t * c;
    let n = a.rows();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}
