//! Real fields on the torus and their spectra, with cached-plan 2D FFTs.
//!
//! `ScalarField` holds point values; `Spectrum` holds Fourier coefficients
//! normalized so that f(x) = sum_k c_k exp(i k.x). With the normalized measure
//! dx/(2pi)^2 this makes Parseval read sum |c_k|^2 = mean of f^2.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use crate::grid::Grid2D;

struct FftCache {
    planner: FftPlanner<f64>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
    scratch: Vec<Complex64>,
}

impl FftCache {
    fn new() -> Self {
        FftCache {
            planner: FftPlanner::new(),
            forward: HashMap::new(),
            inverse: HashMap::new(),
            scratch: Vec::new(),
        }
    }

    fn plan(&mut self, n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
        let (map, planner) = if inverse {
            (&mut self.inverse, &mut self.planner)
        } else {
            (&mut self.forward, &mut self.planner)
        };
        map.entry(n)
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    }
}

thread_local! {
    static FFT_CACHE: RefCell<FftCache> = RefCell::new(FftCache::new());
}

fn transpose(ng: usize, src: &[Complex64], dst: &mut [Complex64]) {
    for iy in 0..ng {
        let row = &src[iy * ng..(iy + 1) * ng];
        for (ix, v) in row.iter().enumerate() {
            dst[ix * ng + iy] = *v;
        }
    }
}

/// In-place 2D FFT on a row-major ng x ng complex buffer.
pub(crate) fn fft2_inplace(ng: usize, buf: &mut Vec<Complex64>, inverse: bool) {
    assert_eq!(buf.len(), ng * ng);
    FFT_CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        let plan = cache.plan(ng, inverse);
        let need = plan.get_inplace_scratch_len();
        if cache.scratch.len() < need {
            cache.scratch.resize(need, Complex64::default());
        }
        let scratch = &mut cache.scratch[..need];
        for row in buf.chunks_exact_mut(ng) {
            plan.process_with_scratch(row, scratch);
        }
        let mut tmp = vec![Complex64::default(); ng * ng];
        transpose(ng, buf, &mut tmp);
        for row in tmp.chunks_exact_mut(ng) {
            plan.process_with_scratch(row, scratch);
        }
        transpose(ng, &tmp, buf);
    });
}

#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid2D,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        ScalarField {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        ScalarField {
            grid,
            data: vec![c; grid.len()],
        }
    }

    pub fn from_data(grid: Grid2D, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.len());
        ScalarField { grid, data }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let ng = grid.ng();
        let mut data = Vec::with_capacity(grid.len());
        for iy in 0..ng {
            let y = grid.coord(iy);
            for ix in 0..ng {
                data.push(f(grid.coord(ix), y));
            }
        }
        ScalarField { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fft(&self) -> Spectrum {
        let ng = self.grid.ng();
        let mut buf: Vec<Complex64> = self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2_inplace(ng, &mut buf, false);
        let norm = 1.0 / (ng * ng) as f64;
        for c in buf.iter_mut() {
            *c *= norm;
        }
        Spectrum {
            grid: self.grid,
            coef: buf,
        }
    }

    /// Grid mean; equals the normalized-measure integral for resolved content.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// self += a * other
    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        debug_assert_eq!(self.grid, other.grid);
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for v in self.data.iter_mut() {
            *v *= a;
        }
    }

    /// Pointwise product. Exact only when the factors' combined frequency
    /// content is resolved on this grid; pipeline callers validate that at
    /// setup, general callers should use `spectral::dealiased_product`.
    pub fn mul_pointwise(&self, other: &ScalarField) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        ScalarField {
            grid: self.grid,
            data,
        }
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        ScalarField {
            grid: self.grid,
            data,
        }
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        ScalarField {
            grid: self.grid,
            data,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Grid2D,
    coef: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: Grid2D) -> Self {
        Spectrum {
            grid,
            coef: vec![Complex64::default(); grid.len()],
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    #[inline]
    pub fn coef(&self) -> &[Complex64] {
        &self.coef
    }

    #[inline]
    pub fn coef_mut(&mut self) -> &mut [Complex64] {
        &mut self.coef
    }

    /// Coefficient of exp(i(kx x + ky y)).
    pub fn at(&self, kx: i64, ky: i64) -> Complex64 {
        let ix = self.grid.index_of(kx);
        let iy = self.grid.index_of(ky);
        self.coef[iy * self.grid.ng() + ix]
    }

    pub fn add_mode(&mut self, kx: i64, ky: i64, c: Complex64) {
        let ix = self.grid.index_of(kx);
        let iy = self.grid.index_of(ky);
        self.coef[iy * self.grid.ng() + ix] += c;
    }

    /// Inverse transform; imaginary residue of a Hermitian spectrum is dropped.
    pub fn ifft(&self) -> ScalarField {
        let ng = self.grid.ng();
        let mut buf = self.coef.clone();
        fft2_inplace(ng, &mut buf, true);
        ScalarField {
            grid: self.grid,
            data: buf.iter().map(|c| c.re).collect(),
        }
    }

    /// Max imaginary part after inverse transform; diagnostic for Hermitian symmetry.
    pub fn ifft_imag_residue(&self) -> f64 {
        let ng = self.grid.ng();
        let mut buf = self.coef.clone();
        fft2_inplace(ng, &mut buf, true);
        buf.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()))
    }

    /// Apply a multiplier m(kx, ky) to every coefficient.
    pub fn apply_symbol(&mut self, sym: impl Fn(i64, i64) -> Complex64) {
        let ng = self.grid.ng();
        for iy in 0..ng {
            let ky = self.grid.wavenumber(iy);
            for ix in 0..ng {
                let kx = self.grid.wavenumber(ix);
                self.coef[iy * ng + ix] *= sym(kx, ky);
            }
        }
    }

    /// L2 mass (normalized measure) = sum |c_k|^2.
    pub fn mass(&self) -> f64 {
        self.coef.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest per-axis frequency carrying more than `tol` times the max
    /// coefficient magnitude; 0 for an all-zero spectrum.
    pub fn max_active_freq(&self, tol: f64) -> i64 {
        let ng = self.grid.ng();
        let peak = self.coef.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if peak == 0.0 {
            return 0;
        }
        let cut = peak * tol;
        let mut kmax = 0i64;
        for iy in 0..ng {
            let ky = self.grid.wavenumber(iy).abs();
            for ix in 0..ng {
                let kx = self.grid.wavenumber(ix).abs();
                if self.coef[iy * ng + ix].norm() > cut {
                    kmax = kmax.max(kx.max(ky));
                }
            }
        }
        kmax
    }
}

/// Velocity-style field with components (x, y).
#[derive(Clone, Debug)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn zeros(grid: Grid2D) -> Self {
        VectorField {
            x: ScalarField::zeros(grid),
            y: ScalarField::zeros(grid),
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.x.grid()
    }

    pub fn components(&self) -> [&ScalarField; 2] {
        [&self.x, &self.y]
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        self.x.axpy(a, &other.x);
        self.y.axpy(a, &other.y);
    }

    pub fn scale(&mut self, a: f64) {
        self.x.scale(a);
        self.y.scale(a);
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            x: self.x.add(&other.x),
            y: self.y.add(&other.y),
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField {
            x: self.x.sub(&other.x),
            y: self.y.sub(&other.y),
        }
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let data = self
            .x
            .data()
            .iter()
            .zip(self.y.data())
            .map(|(a, b)| (a * a + b * b).sqrt())
            .collect();
        ScalarField::from_data(self.grid(), data)
    }

    pub fn max_speed(&self) -> f64 {
        self.x
            .data()
            .iter()
            .zip(self.y.data())
            .fold(0.0_f64, |m, (a, b)| m.max((a * a + b * b).sqrt()))
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &VectorField) -> ScalarField {
        let data = self
            .x
            .data()
            .iter()
            .zip(self.y.data())
            .zip(other.x.data().iter().zip(other.y.data()))
            .map(|((ax, ay), (bx, by))| ax * bx + ay * by)
            .collect();
        ScalarField::from_data(self.grid(), data)
    }
}

/// General (not necessarily symmetric) 2x2 tensor field, row-major entries.
#[derive(Clone, Debug)]
pub struct TensorField {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yx: ScalarField,
    pub yy: ScalarField,
}

impl TensorField {
    pub fn zeros(grid: Grid2D) -> Self {
        TensorField {
            xx: ScalarField::zeros(grid),
            xy: ScalarField::zeros(grid),
            yx: ScalarField::zeros(grid),
            yy: ScalarField::zeros(grid),
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.xx.grid()
    }

    /// Outer product a (x) b with entries a_i b_j.
    pub fn outer(a: &VectorField, b: &VectorField) -> TensorField {
        TensorField {
            xx: a.x.mul_pointwise(&b.x),
            xy: a.x.mul_pointwise(&b.y),
            yx: a.y.mul_pointwise(&b.x),
            yy: a.y.mul_pointwise(&b.y),
        }
    }

    pub fn add(&self, other: &TensorField) -> TensorField {
        TensorField {
            xx: self.xx.add(&other.xx),
            xy: self.xy.add(&other.xy),
            yx: self.yx.add(&other.yx),
            yy: self.yy.add(&other.yy),
        }
    }

    pub fn axpy(&mut self, a: f64, other: &TensorField) {
        self.xx.axpy(a, &other.xx);
        self.xy.axpy(a, &other.xy);
        self.yx.axpy(a, &other.yx);
        self.yy.axpy(a, &other.yy);
    }
}

/// Symmetric 2x2 tensor field (stress-shaped), stored as (xx, xy, yy).
#[derive(Clone, Debug)]
pub struct SymTensorField {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yy: ScalarField,
}

impl SymTensorField {
    pub fn zeros(grid: Grid2D) -> Self {
        SymTensorField {
            xx: ScalarField::zeros(grid),
            xy: ScalarField::zeros(grid),
            yy: ScalarField::zeros(grid),
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid2D {
        self.xx.grid()
    }

    pub fn components(&self) -> [&ScalarField; 3] {
        [&self.xx, &self.xy, &self.yy]
    }

    pub fn axpy(&mut self, a: f64, other: &SymTensorField) {
        self.xx.axpy(a, &other.xx);
        self.xy.axpy(a, &other.xy);
        self.yy.axpy(a, &other.yy);
    }

    pub fn add(&self, other: &SymTensorField) -> SymTensorField {
        SymTensorField {
            xx: self.xx.add(&other.xx),
            xy: self.xy.add(&other.xy),
            yy: self.yy.add(&other.yy),
        }
    }

    pub fn sub(&self, other: &SymTensorField) -> SymTensorField {
        SymTensorField {
            xx: self.xx.sub(&other.xx),
            xy: self.xy.sub(&other.xy),
            yy: self.yy.sub(&other.yy),
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.xx.scale(a);
        self.xy.scale(a);
        self.yy.scale(a);
    }

    pub fn trace(&self) -> ScalarField {
        self.xx.add(&self.yy)
    }

    /// Pointwise Frobenius norm sqrt(xx^2 + 2 xy^2 + yy^2).
    pub fn frobenius(&self) -> ScalarField {
        let data = self
            .xx
            .data()
            .iter()
            .zip(self.xy.data())
            .zip(self.yy.data())
            .map(|((&a, &b), &c)| (a * a + 2.0 * b * b + c * c).sqrt())
            .collect();
        ScalarField::from_data(self.grid(), data)
    }

    pub fn max_frobenius(&self) -> f64 {
        self.xx
            .data()
            .iter()
            .zip(self.xy.data())
            .zip(self.yy.data())
            .fold(0.0_f64, |m, ((&a, &b), &c)| {
                m.max((a * a + 2.0 * b * b + c * c).sqrt())
            })
    }

    /// Embed into a general tensor (yx = xy).
    pub fn to_tensor(&self) -> TensorField {
        TensorField {
            xx: self.xx.clone(),
            xy: self.xy.clone(),
            yx: self.xy.clone(),
            yy: self.yy.clone(),
        }
    }
}

/// Shared immutable handle used where per-direction carrier fields are reused.
pub type FieldRc = Rc<ScalarField>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_roundtrip_is_tight() {
        let grid = Grid2D::new(32).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| (3.0 * x).cos() + 0.5 * (2.0 * y).sin() + 0.25);
        let back = f.fft().ifft();
        let err = f
            .data()
            .iter()
            .zip(back.data())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12, "roundtrip error {err}");
    }

    #[test]
    fn fft_picks_out_modes() {
        let grid = Grid2D::new(16).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| 2.0 * (x + 2.0 * y).cos());
        let s = f.fft();
        // 2 cos(k.x) = exp(ik.x) + exp(-ik.x)
        assert!((s.at(1, 2) - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        assert!((s.at(-1, -2) - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        assert!(s.at(0, 0).norm() < 1e-14);
    }

    #[test]
    fn parseval_normalized() {
        let grid = Grid2D::new(32).unwrap();
        let f = ScalarField::from_fn(grid, |x, _| x.sin());
        // mean of sin^2 = 1/2
        let mass = f.fft().mass();
        assert!((mass - 0.5).abs() < 1e-13);
    }
}
