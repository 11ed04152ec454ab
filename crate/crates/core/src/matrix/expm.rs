use super::Matrix;
use crate::{Error, Result};

const TAYLOR_DEGREE: usize = 13;

/// `e^{M t}` by scaling and squaring around a degree-13 Taylor polynomial.
///
/// The scaling exponent `k` is the smallest one with `‖M t‖₁ / 2^k ≤ 1/2`.
/// For `t = 0` the result is exactly the identity.
pub fn expm(m: &Matrix, t: f64) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::Dimension {
            op: "expm",
            detail: alloc::format!("expected a square matrix, got {}x{}", m.rows(), m.cols()),
        });
    }
    let n = m.rows();
    if t == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let mt = m.scale(t);
    let norm = mt.norm_1();
    if !norm.is_finite() {
        return Err(Error::Domain(alloc::format!(
            "expm: non-finite input norm {norm}"
        )));
    }

    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm *= 0.5;
        squarings += 1;
    }
    let x = mt.scale(libm::ldexp(1.0, -(squarings as i32)));

    // Horner: I + X(I + X/2(I + X/3(...)))
    let mut acc = Matrix::identity(n);
    for k in (1..=TAYLOR_DEGREE).rev() {
        acc = x.matmul(&acc)?.scale(1.0 / k as f64).shift_diagonal(1.0)?;
    }
    for _ in 0..squarings {
        acc = acc.matmul(&acc)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_is_identity() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, -4.0]]).unwrap();
        assert_eq!(expm(&m, 0.0).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn diagonal_is_analytic() {
        let m = Matrix::from_diag(&[-1.5, 0.7]).unwrap();
        for t in [0.1, 1.0, 3.0, 10.0] {
            let e = expm(&m, t).unwrap();
            assert!(
                (e[(0, 0)] - libm::exp(-1.5 * t)).abs() <= 1e-10 * libm::exp(-1.5 * t).max(1.0)
            );
            assert!((e[(1, 1)] - libm::exp(0.7 * t)).abs() <= 1e-10 * libm::exp(0.7 * t));
            assert_eq!(e[(0, 1)], 0.0);
            assert_eq!(e[(1, 0)], 0.0);
        }
    }

    #[test]
    fn nilpotent_exact() {
        // e^{Nt} = I + Nt for N² = 0
        let m = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let e = expm(&m, 3.0).unwrap();
        assert!((e[(0, 1)] - 3.0).abs() < 1e-14);
        assert!((e[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_generator() {
        let m = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let t = 2.5;
        let e = expm(&m, t).unwrap();
        assert!((e[(0, 0)] - libm::cos(t)).abs() < 1e-12);
        assert!((e[(1, 0)] - libm::sin(t)).abs() < 1e-12);
    }

    #[test]
    fn non_square_rejected() {
        assert!(expm(&Matrix::zeros(2, 3), 1.0).is_err());
    }
}
