//! Energy schedule and perturbation amplitudes. Shell j >= 1 carries the
//! fixed budget rho_j = 4^j delta; shell 0 carries the time-dependent
//! budget rho_0(t) that steers the total kinetic energy toward e(t). The
//! amplitude a_(xi,j) = sqrt(rho_j) chi_j gamma_xi(Id - R0/rho_j) is what
//! makes the low-frequency square of the perturbation cancel the stress.

use crate::error::{Error, Result};
use crate::field::{ScalarField, SymTensorField};
use crate::geometry::{gamma_coeffs, reconstruct, Family, SymMat2};
use crate::grid::TAU;

/// Unnormalized torus area (the Lp norms use the normalized measure; the
/// energy bookkeeping does not).
pub const AREA: f64 = TAU * TAU;

/// rho_j = 4^j delta for j >= 1.
pub fn rho_shell(j: usize, delta: f64) -> f64 {
    assert!(j >= 1);
    4f64.powi(j as i32) * delta
}

/// Admissibility window for the starting pair (v0, e): the energy gap
/// must sit inside [3/4 delta e, 5/4 delta e]. `v0_energy` is the
/// unnormalized integral of |v0|^2.
pub fn energy_window_ok(e_t: f64, v0_energy: f64, delta: f64) -> bool {
    let gap = e_t - v0_energy;
    gap >= 0.75 * delta * e_t && gap <= 1.25 * delta * e_t
}

/// rho_0(t) = [e(t)(1 - delta/2) - int |v0|^2] / (2 int chi_0^2), all
/// integrals unnormalized. Fails if the bracket is not positive.
pub fn rho0_of_t(
    t: f64,
    e_t: f64,
    v0_energy: f64,
    chi0_sq_mean: f64,
    delta: f64,
) -> Result<f64> {
    let bracket = e_t * (1.0 - delta / 2.0) - v0_energy;
    if bracket <= 0.0 {
        return Err(Error::NonPositiveRho0 { t, bracket });
    }
    let chi0_sq_int = AREA * chi0_sq_mean;
    if chi0_sq_int <= 0.0 {
        return Err(Error::Validation {
            what: "chi0 mass",
            message: format!("chi_0 vanishes identically at t = {t}"),
        });
    }
    Ok(bracket / (2.0 * chi0_sq_int))
}

/// One time sample of the amplitude family.
pub struct AmplitudeSlice {
    /// a[j][i] for the three directions of shell j's family.
    pub a: Vec<[ScalarField; 3]>,
    /// rho[0] = rho_0(t), rho[j] = 4^j delta.
    pub rho: Vec<f64>,
    /// family of shell j (alternates starting from the base family).
    pub families: Vec<Family>,
    /// per shell: max |R0|/rho_j over supp chi_j, the gamma domain margin.
    pub domain_quotients: Vec<f64>,
}

pub fn shell_family(base: Family, j: usize) -> Family {
    if j % 2 == 0 {
        base
    } else {
        base.other()
    }
}

/// Build all amplitudes for one time sample. chi is the cutoff slice at
/// that time, rho0 the schedule value there. The gamma solve runs only on
/// supp chi_j and must stay inside the eps0 ball there; anywhere else the
/// amplitude is zero by definition.
pub fn build_amplitude_slice(
    chi: &[ScalarField],
    r0: &SymTensorField,
    rho0: f64,
    delta: f64,
    base: Family,
    eps0: f64,
) -> Result<AmplitudeSlice> {
    let grid = r0.grid();
    let n = grid.len();
    let j_max = chi.len() - 1;
    let mut rho = vec![rho0];
    for j in 1..=j_max {
        rho.push(rho_shell(j, delta));
    }
    let families: Vec<Family> = (0..=j_max).map(|j| shell_family(base, j)).collect();
    let mut a: Vec<[ScalarField; 3]> = (0..=j_max)
        .map(|_| {
            [
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
            ]
        })
        .collect();
    let mut domain_quotients = vec![0.0_f64; j_max + 1];
    let (xx, xy, yy) = (r0.xx.data(), r0.xy.data(), r0.yy.data());
    for j in 0..=j_max {
        let sqrt_rho = rho[j].sqrt();
        for i in 0..n {
            let c = chi[j].data()[i];
            if c == 0.0 {
                continue;
            }
            let s = SymMat2 {
                xx: xx[i] / rho[j],
                xy: xy[i] / rho[j],
                yy: yy[i] / rho[j],
            };
            let q = s.frobenius();
            if q > eps0 {
                return Err(Error::Validation {
                    what: "gamma domain",
                    message: format!(
                        "|R0|/rho_{j} = {q:.4} > eps0 = {eps0:.4} inside supp chi_{j}; \
                         shell 0 needs a larger energy profile"
                    ),
                });
            }
            if q > domain_quotients[j] {
                domain_quotients[j] = q;
            }
            let m = SymMat2::IDENTITY.sub(&s);
            let gam = gamma_coeffs(families[j], m)?;
            for (d, g) in gam.iter().enumerate() {
                a[j][d].data_mut()[i] = sqrt_rho * c * g;
            }
        }
    }
    Ok(AmplitudeSlice {
        a,
        rho,
        families,
        domain_quotients,
    })
}

impl AmplitudeSlice {
    /// Sum_j rho_j chi_j^2 as a field, the isotropic part the amplitudes add.
    pub fn isotropic_part(&self, chi: &[ScalarField]) -> ScalarField {
        let grid = chi[0].grid();
        let mut out = ScalarField::zeros(grid);
        for (j, c) in chi.iter().enumerate() {
            for (o, v) in out.data_mut().iter_mut().zip(c.data()) {
                *o += self.rho[j] * v * v;
            }
        }
        out
    }

    /// max_x |R0 + sum a^2 xi(x)xi - (sum rho_j chi_j^2) Id|_F: the pointwise
    /// cancellation the whole scheme rests on.
    pub fn cancellation_defect(&self, chi: &[ScalarField], r0: &SymTensorField) -> f64 {
        let n = r0.grid().len();
        let iso = self.isotropic_part(chi);
        let mut worst = 0.0_f64;
        for i in 0..n {
            let mut acc = SymMat2 {
                xx: r0.xx.data()[i],
                xy: r0.xy.data()[i],
                yy: r0.yy.data()[i],
            };
            for (j, fam) in self.families.iter().enumerate() {
                let sq = [
                    self.a[j][0].data()[i].powi(2),
                    self.a[j][1].data()[i].powi(2),
                    self.a[j][2].data()[i].powi(2),
                ];
                acc = acc.add(&reconstruct(*fam, sq));
            }
            let want = iso.data()[i];
            acc.xx -= want;
            acc.yy -= want;
            worst = worst.max(acc.frobenius());
        }
        worst
    }
}
