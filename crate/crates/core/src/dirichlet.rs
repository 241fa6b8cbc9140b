//! Square Dirichlet kernels: the intermittency generator. The 2D kernel is
//! the lattice-box trigonometric sum normalized to unit L2,
//! D_r(x) = (2r+1)^-1 sum_{|j|,|k| <= r} e^{i(j x1 + k x2)}.

use crate::error::{Error, Result};
use crate::field::{ScalarField, Spectrum};
use crate::grid::Grid2D;
use num_complex::Complex64;

/// Kernel as a real field; needs 3(2r+1) grid points per axis so that later
/// pointwise squares stay resolved.
pub fn dirichlet_kernel_2d(r: u32, grid: Grid2D) -> Result<ScalarField> {
    let required = 3 * (2 * r as usize + 1);
    if grid.ng() < required {
        return Err(Error::Resolution {
            what: format!("Dirichlet kernel r={r}"),
            required,
            ng: grid.ng(),
        });
    }
    let mut s = Spectrum::zeros(grid);
    let c = Complex64::new(1.0 / (2.0 * r as f64 + 1.0), 0.0);
    let ri = r as i64;
    for k in -ri..=ri {
        for j in -ri..=ri {
            s.add_mode(j, k, c);
        }
    }
    Ok(s.ifft())
}

/// Lp norm of the 1D kernel d_r(y) = 1 + 2 sum_{j<=r} cos(jy) by quadrature
/// on a fine 1D grid. The integrand |d|^p is smooth except at the kernel's
/// simple zeros, and 2^15 points resolve every lobe for r <= 512.
pub fn kernel_lp_1d(r: u32, p: f64) -> f64 {
    assert!(p >= 1.0);
    let n: usize = 1 << 15;
    let mut acc = 0.0;
    for i in 0..n {
        let y = crate::grid::TAU * i as f64 / n as f64;
        let mut d = 1.0;
        for j in 1..=r {
            d += 2.0 * (j as f64 * y).cos();
        }
        acc += d.abs().powf(p);
    }
    (acc / n as f64).powf(1.0 / p)
}

/// Lp norm of the 2D kernel via separability:
/// ||D_r||_p = ||d_r||_p^2 / (2r+1).
pub fn kernel_lp_2d(r: u32, p: f64) -> f64 {
    let one_d = kernel_lp_1d(r, p);
    one_d * one_d / (2.0 * r as f64 + 1.0)
}

/// Sup norm, attained at the origin.
pub fn kernel_linf_2d(r: u32) -> f64 {
    2.0 * r as f64 + 1.0
}
