use num_complex::Complex64;

use super::lu::Lu;
use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Numerator coefficients of the [13/13] Padé approximant to `e^x`.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the [13/13] approximant meets double precision
/// without scaling.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a [13/13] Padé
/// approximant.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_finite() {
        return Err(Error::NonFinite("expm input"));
    }
    let n = m.dim();
    let norm = m.norm_one();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = m.scale(Complex64::new(2f64.powi(-squarings), 0.0));

    let id = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| Complex64::new(PADE13[k], 0.0);

    let u_inner = &(&a6.scale(b(13)) + &a4.scale(b(11))) + &a2.scale(b(9));
    let u_tail = &(&(&a6.scale(b(7)) + &a4.scale(b(5))) + &a2.scale(b(3))) + &id.scale(b(1));
    let u = &a * &(&(&a6 * &u_inner) + &u_tail);

    let v_inner = &(&a6.scale(b(12)) + &a4.scale(b(10))) + &a2.scale(b(8));
    let v_tail = &(&(&a6.scale(b(6)) + &a4.scale(b(4))) + &a2.scale(b(2))) + &id.scale(b(0));
    let v = &(&a6 * &v_inner) + &v_tail;

    let lu = Lu::factor(&(&v - &u))?;
    let mut r = lu.solve(&(&v + &u));
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_gives_identity() {
        let e = expm(&ComplexMatrix::zeros(3)).unwrap();
        assert!(e.distance(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn diagonal_exponentiates_entrywise() {
        let a = c(0.3, -2.0);
        let b = c(-7.5, 11.0);
        let e = expm(&ComplexMatrix::from_diagonal(&[a, b])).unwrap();
        assert!((e[(0, 0)] - a.exp()).norm() < 1e-13 * a.exp().norm());
        assert!((e[(1, 1)] - b.exp()).norm() < 1e-12 * b.exp().norm().max(1.0));
        assert_eq!(e[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn nilpotent_series_terminates() {
        // exp([[0, 1], [0, 0]]) = [[1, 1], [0, 1]]
        let n = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let want = ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert!(expm(&n).unwrap().distance(&want) < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        // exp(θ·[[0, -1], [1, 0]]) is the rotation by θ, here with heavy scaling
        let theta = 40.0;
        let g = ComplexMatrix::from_real_rows(&[vec![0.0, -theta], vec![theta, 0.0]]).unwrap();
        let e = expm(&g).unwrap();
        let want =
            ComplexMatrix::from_real_rows(&[vec![theta.cos(), -theta.sin()], vec![theta.sin(), theta.cos()]]).unwrap();
        assert!(e.distance(&want) < 1e-12);
    }
}
