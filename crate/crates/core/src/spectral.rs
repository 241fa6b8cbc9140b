//! Spectral operators: derivatives, fractional dissipation, projections,
//! the divergence inverse, and the padded (3/2-rule) product.
//!
//! Odd-order derivatives zero the Nyquist modes along the differentiation
//! axis; even symbols act on all modes. Every inverse symbol (1/|k|^s) sends
//! the zero mode to zero.

use num_complex::Complex64;

use crate::field::{ScalarField, Spectrum, SymTensorField, TensorField, VectorField};
use crate::grid::Grid2D;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// d^order/d(axis)^order in place.
pub fn derivative_spec(s: &mut Spectrum, axis: Axis, order: u32) {
    if order == 0 {
        return;
    }
    let grid = s.grid();
    let ng = grid.ng();
    let nyq = (ng as i64) / 2;
    let odd = order % 2 == 1;
    for iy in 0..ng {
        let ky = grid.wavenumber(iy);
        for ix in 0..ng {
            let kx = grid.wavenumber(ix);
            let k = match axis {
                Axis::X => kx,
                Axis::Y => ky,
            };
            let c = &mut s.coef_mut()[iy * ng + ix];
            if odd && k.abs() == nyq {
                *c = Complex64::default();
                continue;
            }
            let km = (k as f64).powi(order as i32);
            // (ik)^m = i^m k^m
            *c *= match order % 4 {
                0 => Complex64::new(km, 0.0),
                1 => Complex64::new(0.0, km),
                2 => Complex64::new(-km, 0.0),
                _ => Complex64::new(0.0, -km),
            };
        }
    }
}

pub fn derivative(f: &ScalarField, axis: Axis, order: u32) -> ScalarField {
    let mut s = f.fft();
    derivative_spec(&mut s, axis, order);
    s.ifft()
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let s = f.fft();
    gradient_spec(&s)
}

pub fn gradient_spec(s: &Spectrum) -> VectorField {
    let mut sx = s.clone();
    derivative_spec(&mut sx, Axis::X, 1);
    let mut sy = s.clone();
    derivative_spec(&mut sy, Axis::Y, 1);
    VectorField {
        x: sx.ifft(),
        y: sy.ifft(),
    }
}

/// Rotated gradient (-df/dy, df/dx); always divergence-free.
pub fn grad_perp(f: &ScalarField) -> VectorField {
    let s = f.fft();
    grad_perp_spec(&s)
}

pub fn grad_perp_spec(s: &Spectrum) -> VectorField {
    let mut sx = s.clone();
    derivative_spec(&mut sx, Axis::Y, 1);
    let mut x = sx.ifft();
    x.scale(-1.0);
    let mut sy = s.clone();
    derivative_spec(&mut sy, Axis::X, 1);
    VectorField { x, y: sy.ifft() }
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let mut sx = v.x.fft();
    derivative_spec(&mut sx, Axis::X, 1);
    let mut sy = v.y.fft();
    derivative_spec(&mut sy, Axis::Y, 1);
    for (a, b) in sx.coef_mut().iter_mut().zip(sy.coef()) {
        *a += b;
    }
    sx.ifft()
}

/// Row divergence (div T)_i = d_j T_ij.
pub fn tensor_divergence(t: &TensorField) -> VectorField {
    VectorField {
        x: divergence(&VectorField {
            x: t.xx.clone(),
            y: t.xy.clone(),
        }),
        y: divergence(&VectorField {
            x: t.yx.clone(),
            y: t.yy.clone(),
        }),
    }
}

pub fn sym_tensor_divergence(t: &SymTensorField) -> VectorField {
    VectorField {
        x: divergence(&VectorField {
            x: t.xx.clone(),
            y: t.xy.clone(),
        }),
        y: divergence(&VectorField {
            x: t.xy.clone(),
            y: t.yy.clone(),
        }),
    }
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let mut s = f.fft();
    s.apply_symbol(|kx, ky| Complex64::new(-((kx * kx + ky * ky) as f64), 0.0));
    s.ifft()
}

/// Fractional dissipation (-Lap)^alpha, symbol |k|^(2 alpha).
pub fn frac_laplacian(f: &ScalarField, alpha: f64) -> ScalarField {
    let mut s = f.fft();
    frac_laplacian_spec(&mut s, alpha);
    s.ifft()
}

pub fn frac_laplacian_spec(s: &mut Spectrum, alpha: f64) {
    s.apply_symbol(|kx, ky| {
        let k2 = (kx * kx + ky * ky) as f64;
        Complex64::new(k2.powf(alpha), 0.0)
    });
}

pub fn frac_laplacian_vec(v: &VectorField, alpha: f64) -> VectorField {
    VectorField {
        x: frac_laplacian(&v.x, alpha),
        y: frac_laplacian(&v.y, alpha),
    }
}

/// Lap^-1 with zero mode sent to zero.
pub fn inverse_laplacian(f: &ScalarField) -> ScalarField {
    let mut s = f.fft();
    s.apply_symbol(|kx, ky| {
        let k2 = (kx * kx + ky * ky) as f64;
        if k2 == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(-1.0 / k2, 0.0)
        }
    });
    s.ifft()
}

/// Lap^-1 div v, the scalar potential of the compressible part.
pub fn inverse_laplacian_divergence(v: &VectorField) -> ScalarField {
    let sx = v.x.fft();
    let sy = v.y.fft();
    let grid = sx.grid();
    let ng = grid.ng();
    let nyq = (ng as i64) / 2;
    let mut out = Spectrum::zeros(grid);
    for iy in 0..ng {
        let ky = grid.wavenumber(iy);
        for ix in 0..ng {
            let kx = grid.wavenumber(ix);
            let k2 = (kx * kx + ky * ky) as f64;
            if k2 == 0.0 || kx.abs() == nyq || ky.abs() == nyq {
                continue;
            }
            let i = iy * ng + ix;
            let div = Complex64::new(0.0, kx as f64) * sx.coef()[i]
                + Complex64::new(0.0, ky as f64) * sy.coef()[i];
            out.coef_mut()[i] = -div / k2;
        }
    }
    out.ifft()
}

/// |grad|^-s with zero mode sent to zero; s = 1 gives the order -1 smoothing
/// used in the commutator estimate.
pub fn inv_modulus(f: &ScalarField, s: f64) -> ScalarField {
    let mut sp = f.fft();
    sp.apply_symbol(|kx, ky| {
        let k2 = (kx * kx + ky * ky) as f64;
        if k2 == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(k2.powf(-s / 2.0), 0.0)
        }
    });
    sp.ifft()
}

/// Remove the mean. Exact and FFT-free.
pub fn project_mean_free(f: &ScalarField) -> ScalarField {
    let m = f.mean();
    let mut out = f.clone();
    for v in out.data_mut() {
        *v -= m;
    }
    out
}

pub fn project_mean_free_vec(v: &VectorField) -> VectorField {
    VectorField {
        x: project_mean_free(&v.x),
        y: project_mean_free(&v.y),
    }
}

/// Leray projection Id - grad Lap^-1 div; constants pass through.
/// Nyquist rows are zeroed outright: first derivatives vanish there, so
/// k (k.v)/k^2 cannot reach them and leaving them in would make the output
/// fail `divergence(leray(v)) == 0` by exactly that content.
pub fn leray(v: &VectorField) -> VectorField {
    let mut sx = v.x.fft();
    let mut sy = v.y.fft();
    let grid = sx.grid();
    let ng = grid.ng();
    let nyq = (ng as i64) / 2;
    for iy in 0..ng {
        let ky = grid.wavenumber(iy);
        for ix in 0..ng {
            let kx = grid.wavenumber(ix);
            let i = iy * ng + ix;
            if kx.abs() == nyq || ky.abs() == nyq {
                sx.coef_mut()[i] = Complex64::default();
                sy.coef_mut()[i] = Complex64::default();
                continue;
            }
            let k2 = (kx * kx + ky * ky) as f64;
            if k2 == 0.0 {
                continue;
            }
            let kxf = kx as f64;
            let kyf = ky as f64;
            let dot = (kxf * sx.coef()[i] + kyf * sy.coef()[i]) / k2;
            sx.coef_mut()[i] -= kxf * dot;
            sy.coef_mut()[i] -= kyf * dot;
        }
    }
    VectorField {
        x: sx.ifft(),
        y: sy.ifft(),
    }
}

/// Keep modes with low < |k| <= high (Euclidean). low = 0 keeps the zero mode
/// so that the projection is the full low-pass to |k| <= high.
pub fn band_project(f: &ScalarField, low: f64, high: f64) -> ScalarField {
    let mut s = f.fft();
    band_project_spec(&mut s, low, high);
    s.ifft()
}

pub fn band_project_spec(s: &mut Spectrum, low: f64, high: f64) {
    s.apply_symbol(|kx, ky| {
        let k = ((kx * kx + ky * ky) as f64).sqrt();
        let keep = k <= high && (k > low || (low == 0.0 && k == 0.0));
        if keep {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    });
}

/// Keep modes with |k| >= kmin.
pub fn high_pass(f: &ScalarField, kmin: f64) -> ScalarField {
    let mut s = f.fft();
    s.apply_symbol(|kx, ky| {
        if ((kx * kx + ky * ky) as f64).sqrt() >= kmin {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::default()
        }
    });
    s.ifft()
}

/// Symmetric anti-divergence: with u = -Lap^-1 (v - mean v),
/// R = grad u + (grad u)^T - (div u) Id. Trace-free by construction and
/// div R = v - mean v for Nyquist-free v.
pub fn anti_divergence(v: &VectorField) -> SymTensorField {
    let sx = v.x.fft();
    let sy = v.y.fft();
    let grid = sx.grid();
    let ng = grid.ng();
    let nyq = (ng as i64) / 2;
    let mut rxx = Spectrum::zeros(grid);
    let mut rxy = Spectrum::zeros(grid);
    for iy in 0..ng {
        let ky = grid.wavenumber(iy);
        for ix in 0..ng {
            let kx = grid.wavenumber(ix);
            let k2 = (kx * kx + ky * ky) as f64;
            if k2 == 0.0 || kx.abs() == nyq || ky.abs() == nyq {
                continue;
            }
            let i = iy * ng + ix;
            let ux = -sx.coef()[i] / k2;
            let uy = -sy.coef()[i] / k2;
            let kxf = kx as f64;
            let kyf = ky as f64;
            // R_xx = dx u_x - dy u_y, R_xy = dy u_x + dx u_y, R_yy = -R_xx
            rxx.coef_mut()[i] = Complex64::new(0.0, 1.0) * (kxf * ux - kyf * uy);
            rxy.coef_mut()[i] = Complex64::new(0.0, 1.0) * (kyf * ux + kxf * uy);
        }
    }
    let xx = rxx.ifft();
    let mut yy = xx.clone();
    yy.scale(-1.0);
    SymTensorField {
        xx,
        xy: rxy.ifft(),
        yy,
    }
}

/// Zero every coefficient on a Nyquist row. The inverse operators above
/// never place content there (odd derivatives vanish on those rows), while
/// a directly evaluated pointwise product keeps whatever folds onto them;
/// stripping puts both on the footing the discrete calculus defines.
pub fn strip_nyquist_vec(v: &VectorField) -> VectorField {
    let mut sx = v.x.fft();
    let mut sy = v.y.fft();
    let grid = sx.grid();
    let ng = grid.ng();
    let nyq = (ng as i64) / 2;
    for iy in 0..ng {
        let ky = grid.wavenumber(iy);
        for ix in 0..ng {
            let kx = grid.wavenumber(ix);
            if kx.abs() == nyq || ky.abs() == nyq {
                let i = iy * ng + ix;
                sx.coef_mut()[i] = Complex64::default();
                sy.coef_mut()[i] = Complex64::default();
            }
        }
    }
    VectorField {
        x: sx.ifft(),
        y: sy.ifft(),
    }
}

/// Fraction of spectral mass carried by per-axis frequencies above kmax.
pub fn energy_fraction_above(s: &Spectrum, kmax: i64) -> f64 {
    let grid = s.grid();
    let ng = grid.ng();
    let total = s.mass();
    if total == 0.0 {
        return 0.0;
    }
    let mut high = 0.0;
    for iy in 0..ng {
        let ky = grid.wavenumber(iy).abs();
        for ix in 0..ng {
            let kx = grid.wavenumber(ix).abs();
            if kx.max(ky) > kmax {
                high += s.coef()[iy * ng + ix].norm_sqr();
            }
        }
    }
    high / total
}

fn axis_targets(k: i64, coarse_n: usize, fine: Grid2D) -> ([(usize, f64); 2], usize) {
    let nyq = (coarse_n as i64) / 2;
    if k == -nyq {
        (
            [(fine.index_of(nyq), 0.5), (fine.index_of(-nyq), 0.5)],
            2,
        )
    } else {
        ([(fine.index_of(k), 1.0), (0, 0.0)], 1)
    }
}

/// Zero-pad a spectrum onto a finer grid, splitting Nyquist content evenly.
pub(crate) fn pad_spectrum(s: &Spectrum, fine: Grid2D) -> Spectrum {
    let grid = s.grid();
    let n = grid.ng();
    let m = fine.ng();
    assert!(m > n);
    let mut out = Spectrum::zeros(fine);
    for iy in 0..n {
        let ky = grid.wavenumber(iy);
        let (ty, ny) = axis_targets(ky, n, fine);
        for ix in 0..n {
            let c = s.coef()[iy * n + ix];
            if c == Complex64::default() {
                continue;
            }
            let kx = grid.wavenumber(ix);
            let (tx, nx) = axis_targets(kx, n, fine);
            for (jy, wy) in ty.iter().take(ny) {
                for (jx, wx) in tx.iter().take(nx) {
                    out.coef_mut()[jy * m + jx] += c * (wx * wy);
                }
            }
        }
    }
    out
}

/// Truncate a fine-grid spectrum back to this grid, dropping the Nyquist rows.
pub(crate) fn truncate_spectrum(s: &Spectrum, coarse: Grid2D) -> Spectrum {
    let fine = s.grid();
    let m = fine.ng();
    let n = coarse.ng();
    let nyq = (n as i64) / 2;
    let mut out = Spectrum::zeros(coarse);
    for iy in 0..n {
        let ky = coarse.wavenumber(iy);
        if ky.abs() == nyq {
            continue;
        }
        let fy = fine.index_of(ky);
        for ix in 0..n {
            let kx = coarse.wavenumber(ix);
            if kx.abs() == nyq {
                continue;
            }
            out.coef_mut()[iy * n + ix] = s.coef()[fy * m + fine.index_of(kx)];
        }
    }
    out
}

/// Product computed on a 3/2 padded grid and truncated. Alias-free: every
/// retained mode |k| <= Ng/2 - 1 of the true product is exact.
pub fn dealiased_product_spec(fs: &Spectrum, gs: &Spectrum) -> Spectrum {
    let grid = fs.grid();
    debug_assert_eq!(grid, gs.grid());
    let n = grid.ng();
    let fine = Grid2D::new(crate::grid::next_fast_size(3 * n / 2)).unwrap();
    let ff = pad_spectrum(fs, fine).ifft();
    let gf = pad_spectrum(gs, fine).ifft();
    let prod = ff.mul_pointwise(&gf).fft();
    truncate_spectrum(&prod, grid)
}

pub fn dealiased_product(f: &ScalarField, g: &ScalarField) -> ScalarField {
    dealiased_product_spec(&f.fft(), &g.fft()).ifft()
}
