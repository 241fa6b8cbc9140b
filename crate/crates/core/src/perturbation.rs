//! Velocity perturbation assembly. The principal part rides the
//! intermittent waves; the incompressibility corrector is defined so that
//! w^p + w^c is exactly the perp-gradient of the stream function Phi; the
//! temporal corrector absorbs the fast time derivative of eta^2.

use crate::amplitudes::AmplitudeSlice;
use crate::error::Result;
use crate::field::{ScalarField, VectorField};
use crate::geometry::Direction;
use crate::spectral::{grad_perp, leray, project_mean_free_vec};
use crate::waves::{wave_product_frequencies, WaveParams, WaveSet};

/// dst += s * a * b, pointwise.
fn acc_mul(dst: &mut ScalarField, s: f64, a: &ScalarField, b: &ScalarField) {
    for ((d, x), y) in dst.data_mut().iter_mut().zip(a.data()).zip(b.data()) {
        *d += s * x * y;
    }
}

/// Everything one (shell, direction) pair contributes, kept for the stress
/// and energy bookkeeping downstream.
pub struct WaveEntry {
    pub j: usize,
    pub family: crate::geometry::Family,
    pub dir: usize,
    pub xi: Direction,
    pub a: ScalarField,
    pub a_dot: ScalarField,
    pub eta: ScalarField,
    pub eta_dot: ScalarField,
}

/// One time sample of the perturbation and its analytic time derivatives.
pub struct PerturbationSlice {
    pub t: f64,
    pub entries: Vec<WaveEntry>,
    pub wp: VectorField,
    pub wc: VectorField,
    pub wt: VectorField,
    pub w1: VectorField,
    pub phi: ScalarField,
    pub dphi_dt: ScalarField,
    pub dwt_dt: VectorField,
    /// d/dt of sum a^2 eta^2 xi before any projection; the pressure carries
    /// its compressible part
    pub dq: VectorField,
}

/// Grid size needed so every pairwise product of wave factors (including
/// self-products and both families) stays inside the resolved band.
pub fn required_grid_size(params: &WaveParams) -> usize {
    let dirs: Vec<Direction> = crate::geometry::Family::Zero
        .directions()
        .into_iter()
        .chain(crate::geometry::Family::One.directions())
        .collect();
    let mut worst = 0i64;
    for a in &dirs {
        for b in &dirs {
            if let Ok(freqs) = wave_product_frequencies(*a, *b, params) {
                for (kx, ky) in freqs {
                    worst = worst.max(kx.abs()).max(ky.abs());
                }
            }
        }
    }
    2 * worst as usize + 2
}

/// Assemble the slice at time t. `a_dot` must align with `amps.a`; both
/// come from the amplitude ring in the driver (or analytically in tests).
pub fn build_perturbation_slice(
    t: f64,
    amps: &AmplitudeSlice,
    a_dot: &[[ScalarField; 3]],
    wavesets: &[WaveSet; 2],
    params: &WaveParams,
) -> Result<PerturbationSlice> {
    let grid = wavesets[0].grid;
    assert_eq!(amps.a.len(), a_dot.len());
    let lambda = params.lambda as f64;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let phi_scale = -std::f64::consts::SQRT_2 / lambda;

    let mut entries = Vec::new();
    let mut wp = VectorField::zeros(grid);
    let mut phi = ScalarField::zeros(grid);
    let mut dphi_dt = ScalarField::zeros(grid);
    // q = sum a^2 eta^2 xi and its time derivative, before projection
    let mut q = VectorField::zeros(grid);
    let mut dq = VectorField::zeros(grid);

    for (j, fields) in amps.a.iter().enumerate() {
        let fam = amps.families[j];
        let ws = &wavesets[match fam {
            crate::geometry::Family::Zero => 0,
            crate::geometry::Family::One => 1,
        }];
        for dir in 0..3 {
            let a = &fields[dir];
            if a.data().iter().all(|&v| v == 0.0) {
                continue;
            }
            let ad = &a_dot[j][dir];
            let eta = ws.eta(dir, t);
            let eta_dot = ws.eta_dt(dir, t);
            let dw = &ws.dirs[dir];
            let (xix, xiy) = dw.xi.as_f64();

            // a eta and its time derivative a_dot eta + a eta_dot
            let ae = a.mul_pointwise(&eta);
            let mut ae_dot = ad.mul_pointwise(&eta);
            acc_mul(&mut ae_dot, 1.0, a, &eta_dot);

            acc_mul(&mut wp.x, inv_sqrt2, &ae, &dw.wpair.x);
            acc_mul(&mut wp.y, inv_sqrt2, &ae, &dw.wpair.y);
            acc_mul(&mut phi, phi_scale, &ae, &dw.carrier_cos);
            acc_mul(&mut dphi_dt, phi_scale, &ae_dot, &dw.carrier_cos);

            // a^2 eta^2 = (a eta)^2; d/dt = 2 (a eta)(a eta)'
            acc_mul(&mut q.x, xix, &ae, &ae);
            acc_mul(&mut q.y, xiy, &ae, &ae);
            acc_mul(&mut dq.x, 2.0 * xix, &ae, &ae_dot);
            acc_mul(&mut dq.y, 2.0 * xiy, &ae, &ae_dot);

            entries.push(WaveEntry {
                j,
                family: fam,
                dir,
                xi: dw.xi,
                a: a.clone(),
                a_dot: ad.clone(),
                eta,
                eta_dot,
            });
        }
    }

    let scale = -1.0 / params.mu;
    let mut wt = leray(&project_mean_free_vec(&q));
    wt.scale(scale);
    let mut dwt_dt = leray(&project_mean_free_vec(&dq));
    dwt_dt.scale(scale);

    // w^c := grad_perp(phi) - w^p, which makes w^p + w^c = grad_perp(phi)
    // an identity rather than an approximation
    let gp = grad_perp(&phi);
    let wc = gp.sub(&wp);
    let w1 = gp.add(&wt);

    Ok(PerturbationSlice {
        t,
        entries,
        wp,
        wc,
        wt,
        w1,
        phi,
        dphi_dt,
        dwt_dt,
        dq,
    })
}
