//! Smooth dyadic partition of unity over the stress magnitude. chi_0 owns
//! the region where the old stress is small against eps0*delta; chi_j for
//! j >= 1 owns the dyadic shell where the bracket <50 R0/(eps0 delta)> is
//! comparable to 4^j. The squares telescope, so the partition identity is
//! exact in floating point, not just to truncation.

use crate::error::{Error, Result};
use crate::field::{ScalarField, SymTensorField};

/// Largest ladder height before we refuse the input stress as out of scale.
pub const J_MAX_CAP: usize = 12;

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Standard smooth step: 0 for t <= 0, 1 for t >= 1.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = bump(t);
        a / (a + bump(1.0 - t))
    }
}

/// Decreasing profile: 1 on [0,1], 0 on [4,inf).
pub fn psi(y: f64) -> f64 {
    smooth_step((4.0 - y) / 3.0)
}

/// chi_tilde_j(y): sqrt(psi) for j = 0, the dyadic shell sqrt(psi(4^-j y)
/// - psi(4^{1-j} y)) for j >= 1. Shell j lives on [4^{j-1}, 4^{j+1}].
pub fn chi_tilde(j: usize, y: f64) -> f64 {
    if j == 0 {
        return psi(y).sqrt();
    }
    let z = y / 4f64.powi(j as i32);
    // psi(4z) = 0 exactly once z > 1, so the difference never cancels
    (psi(z) - psi(4.0 * z)).max(0.0).sqrt()
}

/// Pointwise bracket <50 R / (eps0 delta)> = sqrt(1 + (50/(eps0 delta))^2 |R|_F^2).
pub fn stress_argument(r_frob: f64, delta: f64, eps0: f64) -> f64 {
    let s = 50.0 * r_frob / (eps0 * delta);
    (1.0 + s * s).sqrt()
}

/// The ladder geometry shared by every time slice: height chosen once from
/// the largest stress over all samples so the per-slice partitions agree.
#[derive(Clone, Copy, Debug)]
pub struct CutoffLadder {
    pub j_max: usize,
    pub delta: f64,
    pub eps0: f64,
}

impl CutoffLadder {
    pub fn new(max_r0_frob: f64, delta: f64, eps0: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Validation {
                what: "delta",
                message: format!("need 0 < delta <= 1, got {delta}"),
            });
        }
        if !(eps0 > 0.0) {
            return Err(Error::Validation {
                what: "eps0",
                message: format!("need eps0 > 0, got {eps0}"),
            });
        }
        let y_max = stress_argument(max_r0_frob, delta, eps0);
        // smallest j with 4^j >= y_max; the tail shells then vanish identically
        let j_max = y_max.log(4.0).ceil().max(0.0) as usize;
        if j_max > J_MAX_CAP {
            return Err(Error::Validation {
                what: "cutoff ladder",
                message: format!(
                    "stress magnitude {max_r0_frob:.3e} needs {j_max} dyadic shells (cap {J_MAX_CAP}); \
                     rescale the input stress or loosen delta"
                ),
            });
        }
        if j_max >= 2 {
            // ladder height bound; only meaningful once the ladder is real
            let lhs = 4f64.powi(j_max as i32);
            let rhs = 800.0 * max_r0_frob / (eps0 * delta);
            assert!(
                lhs <= rhs,
                "ladder height 4^{j_max} = {lhs} exceeds {rhs:.3e}"
            );
        }
        Ok(CutoffLadder {
            j_max,
            delta,
            eps0,
        })
    }

    /// chi_j(t,.) for one time sample, j = 0..=j_max.
    pub fn slice(&self, r0: &SymTensorField) -> Vec<ScalarField> {
        let grid = r0.grid();
        let [xx, xy, yy] = r0.components();
        let mut chi: Vec<ScalarField> = (0..=self.j_max).map(|_| ScalarField::zeros(grid)).collect();
        for i in 0..grid.len() {
            let f = (xx.data()[i] * xx.data()[i]
                + 2.0 * xy.data()[i] * xy.data()[i]
                + yy.data()[i] * yy.data()[i])
                .sqrt();
            let y = stress_argument(f, self.delta, self.eps0);
            for (j, field) in chi.iter_mut().enumerate() {
                field.data_mut()[i] = chi_tilde(j, y);
            }
        }
        chi
    }
}

/// max_x |sum_j chi_j^2 - 1| over one slice.
pub fn partition_defect(chi: &[ScalarField]) -> f64 {
    let n = chi[0].grid().len();
    let mut worst = 0.0_f64;
    for i in 0..n {
        let s: f64 = chi.iter().map(|c| c.data()[i] * c.data()[i]).sum();
        worst = worst.max((s - 1.0).abs());
    }
    worst
}

/// max_x |chi_j1 chi_j2| over all pairs |j1 - j2| >= 2.
pub fn overlap_defect(chi: &[ScalarField]) -> f64 {
    let n = chi[0].grid().len();
    let mut worst = 0.0_f64;
    for j1 in 0..chi.len() {
        for j2 in j1 + 2..chi.len() {
            for i in 0..n {
                worst = worst.max((chi[j1].data()[i] * chi[j2].data()[i]).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    #[test]
    fn step_profile() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert_eq!(smooth_step(2.0), 1.0);
        // symmetry of the spline pair at the midpoint
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = smooth_step(i as f64 / 100.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert_eq!(psi(0.5), 1.0);
        assert_eq!(psi(1.0), 1.0);
        assert_eq!(psi(4.0), 0.0);
        assert_eq!(psi(9.0), 0.0);
    }

    #[test]
    fn zero_stress_collapses_to_chi0() {
        let grid = Grid2D::new(16).unwrap();
        let r0 = SymTensorField::zeros(grid);
        let ladder = CutoffLadder::new(0.0, 0.5, 0.34).unwrap();
        assert_eq!(ladder.j_max, 0);
        let chi = ladder.slice(&r0);
        assert_eq!(chi.len(), 1);
        assert!(chi[0].data().iter().all(|&v| v == 1.0));
    }

    fn sample_stress(grid: Grid2D, scale: f64) -> SymTensorField {
        // trace-free by construction
        let mut r = SymTensorField::zeros(grid);
        let f = ScalarField::from_fn(grid, |x, y| scale * (x.sin() + 0.3 * (2.0 * y).cos()));
        let g = ScalarField::from_fn(grid, |x, y| scale * 0.7 * (x + y).cos());
        let n = grid.len();
        let (xx, xy, yy) = (f.data().to_vec(), g.data().to_vec(), f.data().to_vec());
        for i in 0..n {
            r.xx.data_mut()[i] = xx[i];
            r.xy.data_mut()[i] = xy[i];
            r.yy.data_mut()[i] = -yy[i];
        }
        r
    }

    #[test]
    fn partition_is_exact_and_local() {
        let grid = Grid2D::new(64).unwrap();
        let (delta, eps0) = (0.5, 0.34);
        // scale so y_max lands around 40: a three-shell ladder
        let r0 = sample_stress(grid, 0.1);
        let max_f = r0.max_frobenius();
        let ladder = CutoffLadder::new(max_f, delta, eps0).unwrap();
        assert!(ladder.j_max >= 2, "j_max {}", ladder.j_max);
        let chi = ladder.slice(&r0);
        assert!(partition_defect(&chi) <= 1e-10);
        assert!(overlap_defect(&chi) <= 1e-12);
        for c in &chi {
            assert!(c.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
        // chi0 must keep some mass for the rho0 schedule
        let chi0_sq = chi[0].mul_pointwise(&chi[0]).mean();
        assert!(chi0_sq > 0.0);
    }

    #[test]
    fn ladder_height_tracks_log4() {
        let (delta, eps0) = (1.0, 0.2);
        // y_max ~ sqrt(1 + (50 f / (eps0 delta))^2); pick f so y_max = 15.9
        let f = (15.9_f64 * 15.9 - 1.0).sqrt() * eps0 * delta / 50.0;
        let ladder = CutoffLadder::new(f, delta, eps0).unwrap();
        assert_eq!(ladder.j_max, 2);
        let f = (16.5_f64 * 16.5 - 1.0).sqrt() * eps0 * delta / 50.0;
        let ladder = CutoffLadder::new(f, delta, eps0).unwrap();
        assert_eq!(ladder.j_max, 3);
        assert!(CutoffLadder::new(1e12, delta, eps0).is_err());
    }
}
