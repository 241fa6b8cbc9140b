//! Norms over the torus with the normalized measure dx/(2pi)^2, so the L2
//! norm of sin is sqrt(1/2) and grid means are the exact quadrature.

use crate::field::{ScalarField, SymTensorField, VectorField};
use crate::spectral::{derivative, Axis};

pub fn lp_norm(f: &ScalarField, p: f64) -> f64 {
    assert!(p >= 1.0);
    let mean = f
        .data()
        .iter()
        .map(|v| v.abs().powf(p))
        .sum::<f64>()
        / f.data().len() as f64;
    mean.powf(1.0 / p)
}

pub fn linf_norm(f: &ScalarField) -> f64 {
    f.max_abs()
}

pub fn l2_norm(f: &ScalarField) -> f64 {
    let mean = f.data().iter().map(|v| v * v).sum::<f64>() / f.data().len() as f64;
    mean.sqrt()
}

/// Lp of the pointwise Euclidean magnitude.
pub fn lp_norm_vec(v: &VectorField, p: f64) -> f64 {
    assert!(p >= 1.0);
    let mean = v
        .x
        .data()
        .iter()
        .zip(v.y.data())
        .map(|(a, b)| (a * a + b * b).sqrt().powf(p))
        .sum::<f64>()
        / v.x.data().len() as f64;
    mean.powf(1.0 / p)
}

pub fn linf_norm_vec(v: &VectorField) -> f64 {
    v.max_speed()
}

/// Lp of the pointwise Frobenius magnitude.
pub fn lp_norm_sym(t: &SymTensorField, p: f64) -> f64 {
    lp_norm(&t.frobenius(), p)
}

pub fn linf_norm_sym(t: &SymTensorField) -> f64 {
    t.max_frobenius()
}

/// sup |f| + sup |grad f|; the gradient enters through its Euclidean magnitude.
pub fn c1_norm(f: &ScalarField) -> f64 {
    let g = crate::spectral::gradient(f);
    linf_norm(f) + linf_norm_vec(&g)
}

/// sup Frobenius norm of the Hessian.
pub fn hessian_sup(f: &ScalarField) -> f64 {
    let fxx = derivative(f, Axis::X, 2);
    let fyy = derivative(f, Axis::Y, 2);
    let fxy = derivative(&derivative(f, Axis::X, 1), Axis::Y, 1);
    let n = fxx.data().len();
    let mut m = 0.0_f64;
    for i in 0..n {
        let a = fxx.data()[i];
        let b = fxy.data()[i];
        let c = fyy.data()[i];
        m = m.max((a * a + 2.0 * b * b + c * c).sqrt());
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use std::f64::consts::{FRAC_2_PI, FRAC_1_SQRT_2};

    #[test]
    fn lp_of_sine() {
        let grid = Grid2D::new(64).unwrap();
        let f = ScalarField::from_fn(grid, |x, _| x.sin());
        // |sin| has corners, so the grid mean is the exact discrete value
        // 2 cot(pi/N)/N, only O(h^2) close to 2/pi
        let discrete = 2.0 / (std::f64::consts::PI / 64.0).tan() / 64.0;
        assert!((lp_norm(&f, 1.0) - discrete).abs() < 1e-13);
        assert!((lp_norm(&f, 1.0) - FRAC_2_PI).abs() < 1e-3);
        assert!((lp_norm(&f, 2.0) - FRAC_1_SQRT_2).abs() < 1e-12);
        // mean sin^4 = 3/8
        assert!((lp_norm(&f, 4.0) - (3.0_f64 / 8.0).powf(0.25)).abs() < 1e-12);
        assert!((linf_norm(&f) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn c1_of_cosine_mode() {
        let grid = Grid2D::new(64).unwrap();
        let f = ScalarField::from_fn(grid, |x, _| 3.0 * (3.0 * x).cos());
        // sup 3 + sup of |9 sin(3x)|; both hit exactly on this grid
        assert!((c1_norm(&f) - 12.0).abs() < 1e-10);
    }

    #[test]
    fn vector_magnitude_norm() {
        let grid = Grid2D::new(32).unwrap();
        let v = VectorField {
            x: ScalarField::from_fn(grid, |x, _| x.cos()),
            y: ScalarField::from_fn(grid, |x, _| x.sin()),
        };
        // |v| = 1 everywhere
        assert!((lp_norm_vec(&v, 3.0) - 1.0).abs() < 1e-14);
        assert!((linf_norm_vec(&v) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hessian_of_plane_wave() {
        let grid = Grid2D::new(32).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| (x + 2.0 * y).sin());
        // D2 = -sin * [[1,2],[2,4]], Frobenius factor sqrt(1+8+16) = 5
        assert!((hessian_sup(&f) - 5.0).abs() < 1e-10);
    }
}
