//! The pressure increment carried along with the velocity perturbation.
//! Three parts: the isotropic trade of stress for pressure, the
//! compressible part of the temporal corrector's time derivative, and one
//! scalar per interacting wave pair whose gradient absorbs the pair's
//! divergence.

use crate::field::ScalarField;
use crate::geometry::Family;
use crate::perturbation::{PerturbationSlice, WaveEntry};
use crate::spectral::inverse_laplacian_divergence;
use crate::waves::{DirectionWaves, WaveParams, WaveSet};

/// Scalar potential of a wave pair: div(W_a x W_b + W_b x W_a) = 2 grad P
/// with P = 2 cos_a cos_b + 2 (xi_a . xi_b) sin_a sin_b. For a == b this is
/// identically 2, matching div(W x W) = 0.
pub fn interaction_coefficient(wa: &DirectionWaves, wb: &DirectionWaves) -> ScalarField {
    let (ax, ay) = wa.xi.as_f64();
    let (bx, by) = wb.xi.as_f64();
    let dot = ax * bx + ay * by;
    let grid = wa.carrier_cos.grid();
    let mut out = ScalarField::zeros(grid);
    for i in 0..out.data().len() {
        out.data_mut()[i] = 2.0 * wa.carrier_cos.data()[i] * wb.carrier_cos.data()[i]
            + 2.0 * dot * wa.carrier_sin.data()[i] * wb.carrier_sin.data()[i];
    }
    out
}

/// Unordered index pairs of entries that can interact: same shell with
/// distinct directions, or adjacent shells (which carry opposite families).
/// Shells two or more apart have disjoint supports, so their products
/// vanish identically and are skipped.
pub fn interaction_pairs(entries: &[WaveEntry]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for alpha in 0..entries.len() {
        for beta in alpha + 1..entries.len() {
            if entries[alpha].j.abs_diff(entries[beta].j) <= 1 {
                pairs.push((alpha, beta));
            }
        }
    }
    pairs
}

pub fn waves_for<'a>(entry: &WaveEntry, wavesets: &'a [WaveSet; 2]) -> &'a DirectionWaves {
    let ws = &wavesets[match entry.family {
        Family::Zero => 0,
        Family::One => 1,
    }];
    &ws.dirs[entry.dir]
}

pub struct PressureParts {
    /// sum_j rho_j chi_j^2
    pub isotropic: ScalarField,
    /// (1/mu) Lap^-1 div d/dt(sum a^2 eta^2 xi)
    pub temporal: ScalarField,
    /// sum over pairs of a a' eta eta' P_{ab}
    pub interaction: ScalarField,
}

impl PressureParts {
    /// p1 - p0 = -(isotropic + temporal + interaction)
    pub fn increment(&self) -> ScalarField {
        let mut out = self.isotropic.clone();
        out.axpy(1.0, &self.temporal);
        out.axpy(1.0, &self.interaction);
        out.scale(-1.0);
        out
    }
}

pub fn pressure_parts(
    isotropic: &ScalarField,
    slice: &PerturbationSlice,
    wavesets: &[WaveSet; 2],
    params: &WaveParams,
) -> PressureParts {
    let grid = isotropic.grid();
    let mut temporal = inverse_laplacian_divergence(&slice.dq);
    temporal.scale(1.0 / params.mu);

    let mut interaction = ScalarField::zeros(grid);
    let ae: Vec<ScalarField> = slice
        .entries
        .iter()
        .map(|e| e.a.mul_pointwise(&e.eta))
        .collect();
    for (alpha, beta) in interaction_pairs(&slice.entries) {
        let p = interaction_coefficient(
            waves_for(&slice.entries[alpha], wavesets),
            waves_for(&slice.entries[beta], wavesets),
        );
        let g = ae[alpha].mul_pointwise(&ae[beta]);
        for i in 0..interaction.data().len() {
            interaction.data_mut()[i] += g.data()[i] * p.data()[i];
        }
    }

    PressureParts {
        isotropic: isotropic.clone(),
        temporal,
        interaction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::TensorField;
    use crate::grid::Grid2D;
    use crate::norms::{linf_norm, linf_norm_vec};
    use crate::spectral::{gradient, tensor_divergence};

    fn setup() -> ([WaveSet; 2], WaveParams, Grid2D) {
        let grid = Grid2D::new(192).unwrap();
        let (ws, params) = crate::testsupport::demo_wavesets(grid);
        (ws, params, grid)
    }

    #[test]
    fn pair_divergence_is_gradient_of_coefficient() {
        let (wavesets, _, _) = setup();
        // all pair types: within a family and across families
        let cases = [(0usize, 0usize, 1usize), (0, 1, 2), (0, 0, 0), (1, 0, 2)];
        for &(fa, da, db) in &cases {
            for fb in [fa, 1 - fa] {
                let wa = &wavesets[fa].dirs[da];
                let wb = &wavesets[fb].dirs[db];
                if fa == fb && da == db {
                    continue;
                }
                let t = TensorField::outer(&wa.wpair, &wb.wpair)
                    .add(&TensorField::outer(&wb.wpair, &wa.wpair));
                let divt = tensor_divergence(&t);
                let mut gp = gradient(&interaction_coefficient(wa, wb));
                gp.scale(2.0);
                let err = linf_norm_vec(&divt.sub(&gp));
                let scale = linf_norm_vec(&divt).max(1.0);
                assert!(err / scale < 1e-11, "pair ({fa},{da})x({fb},{db}): {err}");
            }
        }
    }

    #[test]
    fn self_coefficient_is_constant_two() {
        let (wavesets, _, _) = setup();
        for ws in &wavesets {
            for d in &ws.dirs {
                let p = interaction_coefficient(d, d);
                let dev = p.data().iter().fold(0.0f64, |m, &v| m.max((v - 2.0).abs()));
                assert!(dev < 1e-14);
            }
        }
    }

    #[test]
    fn temporal_part_closes_the_leray_split() {
        // dwt_dt - grad(temporal) must equal -(1/mu) (dq - mean dq)
        let (wavesets, params, grid) = setup();
        let chi = ScalarField::from_fn(grid, |x, y| {
            0.5 + 0.1 * x.cos() + 0.07 * (y - 0.3).sin()
        });
        let t = 0.37_f64;
        let mut a = vec![[
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
        ]];
        let mut a_dot = a.clone();
        for d in 0..3 {
            let (c, s) = ((3.0 * t).cos(), (3.0 * t).sin());
            a[0][d] = chi.clone();
            a[0][d].scale(1.0 + 0.3 * c * (d as f64 + 1.0));
            a_dot[0][d] = chi.clone();
            a_dot[0][d].scale(-0.9 * s * (d as f64 + 1.0));
        }
        let amps = crate::amplitudes::AmplitudeSlice {
            a,
            rho: vec![1.0],
            families: vec![Family::Zero],
            domain_quotients: vec![0.0],
        };
        let slice =
            crate::perturbation::build_perturbation_slice(t, &amps, &a_dot, &wavesets, &params)
                .unwrap();
        let iso = ScalarField::zeros(grid);
        let parts = pressure_parts(&iso, &slice, &wavesets, &params);
        let mut lhs = slice.dwt_dt.clone();
        lhs = lhs.sub(&gradient(&parts.temporal));
        let mut rhs = crate::spectral::project_mean_free_vec(&slice.dq);
        rhs.scale(-1.0 / params.mu);
        let err = linf_norm_vec(&lhs.sub(&rhs));
        assert!(err < 1e-11 * linf_norm_vec(&rhs).max(1.0), "split error {err}");
        assert!(linf_norm(&parts.temporal) > 0.0);
    }
}
