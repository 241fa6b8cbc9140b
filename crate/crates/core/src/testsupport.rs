//! Shared fixtures for unit tests across modules.

use crate::amplitudes::AmplitudeSlice;
use crate::field::{ScalarField, SymTensorField};
use crate::geometry::Family;
use crate::grid::Grid2D;
use crate::waves::{WaveParams, WaveSet};

pub(crate) fn demo_wavesets(grid: Grid2D) -> ([WaveSet; 2], WaveParams) {
    let params = WaveParams::new(20, 2, 2, 6.0, 5).unwrap();
    let w0 = WaveSet::new(Family::Zero, params, grid).unwrap();
    let w1 = WaveSet::new(Family::One, params, grid).unwrap();
    ([w0, w1], params)
}

/// Two shells on opposite families with smooth band-limited amplitudes and
/// a stress manufactured so the cancellation identity holds exactly:
/// R0 := iso Id - sum a^2 xi xi with iso := half the trace. Returns
/// (amplitudes, their time derivatives, R0, iso).
pub(crate) fn synthetic_two_shell(
    grid: Grid2D,
    t: f64,
) -> (
    AmplitudeSlice,
    Vec<[ScalarField; 3]>,
    SymTensorField,
    ScalarField,
) {
    let mut a = Vec::new();
    let mut a_dot = Vec::new();
    for j in 0..2usize {
        let mut row: [ScalarField; 3] = [
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
        ];
        let mut row_dot = row.clone();
        for d in 0..3 {
            let jj = j as f64;
            let dd = d as f64;
            let f = ScalarField::from_fn(grid, |x, y| {
                0.4 + 0.1 * (x + 0.3 * dd).cos() + 0.05 * (2.0 * y - jj).sin()
            });
            let tfac = 1.0 + 0.25 * ((2.0 + dd) * t + jj).cos();
            let tfac_dot = -0.25 * (2.0 + dd) * ((2.0 + dd) * t + jj).sin();
            row[d] = f.clone();
            row[d].scale(tfac);
            row_dot[d] = f;
            row_dot[d].scale(tfac_dot);
        }
        a.push(row);
        a_dot.push(row_dot);
    }
    let families = vec![Family::Zero, Family::One];

    let mut sxx = ScalarField::zeros(grid);
    let mut sxy = ScalarField::zeros(grid);
    let mut syy = ScalarField::zeros(grid);
    for j in 0..2 {
        for (d, xi) in families[j].directions().iter().enumerate() {
            let (xx, xy) = xi.as_f64();
            let a2 = a[j][d].mul_pointwise(&a[j][d]);
            for i in 0..grid.len() {
                let v = a2.data()[i];
                sxx.data_mut()[i] += v * xx * xx;
                sxy.data_mut()[i] += v * xx * xy;
                syy.data_mut()[i] += v * xy * xy;
            }
        }
    }
    let mut iso = ScalarField::zeros(grid);
    for i in 0..grid.len() {
        iso.data_mut()[i] = 0.5 * (sxx.data()[i] + syy.data()[i]);
    }
    let mut r0 = SymTensorField::zeros(grid);
    for i in 0..grid.len() {
        r0.xx.data_mut()[i] = iso.data()[i] - sxx.data()[i];
        r0.xy.data_mut()[i] = -sxy.data()[i];
        r0.yy.data_mut()[i] = iso.data()[i] - syy.data()[i];
    }
    let amps = AmplitudeSlice {
        a,
        rho: vec![1.0, 1.0],
        families,
        domain_quotients: vec![0.0, 0.0],
    };
    (amps, a_dot, r0, iso)
}
