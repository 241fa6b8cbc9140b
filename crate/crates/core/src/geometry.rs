//! Direction families on the unit circle, the coefficient solver that writes
//! a symmetric matrix near the identity as a positive combination of ξ (x) ξ,
//! and the numerically estimated positivity radius.

use crate::error::{Error, Result};

/// Unit direction with exact rational components num/den.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Direction {
    pub num: (i64, i64),
    pub den: i64,
}

impl Direction {
    pub const fn new(nx: i64, ny: i64, den: i64) -> Self {
        Direction { num: (nx, ny), den }
    }

    #[inline]
    pub fn as_f64(&self) -> (f64, f64) {
        (
            self.num.0 as f64 / self.den as f64,
            self.num.1 as f64 / self.den as f64,
        )
    }

    /// Counterclockwise rotation by 90 degrees.
    pub fn perp(&self) -> Direction {
        Direction {
            num: (-self.num.1, self.num.0),
            den: self.den,
        }
    }

    pub fn neg(&self) -> Direction {
        Direction {
            num: (-self.num.0, -self.num.1),
            den: self.den,
        }
    }

    /// k * xi as an exact integer vector; k must clear the denominator.
    pub fn scaled(&self, k: i64) -> Result<(i64, i64)> {
        if k % self.den != 0 {
            return Err(Error::NonIntegerLattice(format!(
                "{k} * ({}, {})/{} is not an integer vector",
                self.num.0, self.num.1, self.den
            )));
        }
        let f = k / self.den;
        Ok((f * self.num.0, f * self.num.1))
    }

    /// Representative of the pair {xi, -xi}: the member of a family's
    /// positive half when there is one, else the lexicographically positive
    /// sign. Quantities defined to be even in xi evaluate the canonical side.
    pub fn canonical(&self) -> Direction {
        for fam in [Family::Zero, Family::One] {
            for d in fam.directions() {
                if *self == d {
                    return *self;
                }
                if self.neg() == d {
                    return d;
                }
            }
        }
        if self.num.0 > 0 || (self.num.0 == 0 && self.num.1 > 0) {
            *self
        } else {
            self.neg()
        }
    }

    #[cfg(test)]
    fn is_unit(&self) -> bool {
        self.num.0 * self.num.0 + self.num.1 * self.num.1 == self.den * self.den
    }
}

/// Small symmetric 2x2 matrix value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    pub const IDENTITY: SymMat2 = SymMat2 {
        xx: 1.0,
        xy: 0.0,
        yy: 1.0,
    };

    pub const ZERO: SymMat2 = SymMat2 {
        xx: 0.0,
        xy: 0.0,
        yy: 0.0,
    };

    pub fn frobenius(&self) -> f64 {
        (self.xx * self.xx + 2.0 * self.xy * self.xy + self.yy * self.yy).sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn add(&self, o: &SymMat2) -> SymMat2 {
        SymMat2 {
            xx: self.xx + o.xx,
            xy: self.xy + o.xy,
            yy: self.yy + o.yy,
        }
    }

    pub fn sub(&self, o: &SymMat2) -> SymMat2 {
        SymMat2 {
            xx: self.xx - o.xx,
            xy: self.xy - o.xy,
            yy: self.yy - o.yy,
        }
    }

    pub fn scale(&self, a: f64) -> SymMat2 {
        SymMat2 {
            xx: a * self.xx,
            xy: a * self.xy,
            yy: a * self.yy,
        }
    }
}

/// The two direction families; consecutive iteration steps alternate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Zero,
    One,
}

impl Family {
    /// Positive half of the family; the full family adds the negations.
    pub fn directions(&self) -> [Direction; 3] {
        match self {
            Family::Zero => [
                Direction::new(1, 0, 1),
                Direction::new(3, 4, 5),
                Direction::new(3, -4, 5),
            ],
            Family::One => [
                Direction::new(0, 1, 1),
                Direction::new(4, 3, 5),
                Direction::new(-4, 3, 5),
            ],
        }
    }

    pub fn other(&self) -> Family {
        match self {
            Family::Zero => Family::One,
            Family::One => Family::Zero,
        }
    }
}

/// All 12 directions of both families including negations.
pub fn all_directions() -> Vec<Direction> {
    let mut out = Vec::with_capacity(12);
    for fam in [Family::Zero, Family::One] {
        for d in fam.directions() {
            out.push(d);
            out.push(d.neg());
        }
    }
    out
}

/// Squared coefficients gamma_xi^2(M) solving sum gamma^2 xi (x) xi = M.
/// Closed form; the 3x3 system has constant determinant 384/625 so it never
/// degenerates. Order matches Family::directions().
pub fn gamma_sq(family: Family, m: SymMat2) -> [f64; 3] {
    match family {
        Family::Zero => [
            m.xx - (9.0 / 16.0) * m.yy,
            (25.0 / 32.0) * m.yy + (25.0 / 24.0) * m.xy,
            (25.0 / 32.0) * m.yy - (25.0 / 24.0) * m.xy,
        ],
        Family::One => [
            m.yy - (9.0 / 16.0) * m.xx,
            (25.0 / 32.0) * m.xx + (25.0 / 24.0) * m.xy,
            (25.0 / 32.0) * m.xx - (25.0 / 24.0) * m.xy,
        ],
    }
}

/// Determinant of the coefficient system, identical for both families.
pub const GAMMA_SYSTEM_DET: f64 = 384.0 / 625.0;

/// gamma_xi(M) with a hard failure outside the positivity region.
pub fn gamma_coeffs(family: Family, m: SymMat2) -> Result<[f64; 3]> {
    let sq = gamma_sq(family, m);
    for (i, &v) in sq.iter().enumerate() {
        if v <= 0.0 {
            return Err(Error::NonPositiveCoefficient { dir: i, value: v });
        }
    }
    Ok([sq[0].sqrt(), sq[1].sqrt(), sq[2].sqrt()])
}

/// sum gamma_i^2 xi_i (x) xi_i, for verifying reconstruction.
pub fn reconstruct(family: Family, sq: [f64; 3]) -> SymMat2 {
    let mut out = SymMat2::ZERO;
    for (d, &g2) in family.directions().iter().zip(sq.iter()) {
        let (x, y) = d.as_f64();
        out.xx += g2 * x * x;
        out.xy += g2 * x * y;
        out.yy += g2 * y * y;
    }
    out
}

/// Half the minimal |xi + xi'| over all direction pairs with xi + xi' != 0;
/// brute force over all 144 ordered pairs.
pub fn c0() -> f64 {
    let dirs = all_directions();
    let mut best = f64::INFINITY;
    for a in &dirs {
        for b in &dirs {
            // exact cancellation test on the rational components
            if a.num.0 * b.den + b.num.0 * a.den == 0 && a.num.1 * b.den + b.num.1 * a.den == 0 {
                continue;
            }
            let (ax, ay) = a.as_f64();
            let (bx, by) = b.as_f64();
            let s = ((ax + bx).powi(2) + (ay + by).powi(2)).sqrt();
            best = best.min(s);
        }
    }
    best / 2.0
}

/// Number of unit-sphere directions scanned by the radius estimate.
pub const SPHERE_SAMPLES: usize = 20_001;

/// The engine works at 0.9 times the estimated radius.
pub const EPS0_SHRINK: f64 = 0.9;

/// Deterministic quasi-uniform points on the unit sphere of symmetric
/// matrices in the Frobenius metric, via the golden-angle spiral in the
/// orthonormal coordinates (s_xx, sqrt(2) s_xy, s_yy).
fn sphere_point(i: usize, n: usize) -> SymMat2 {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = golden * i as f64;
    SymMat2 {
        xx: r * phi.cos(),
        xy: r * phi.sin() / std::f64::consts::SQRT_2,
        yy: z,
    }
}

/// Largest radius eps (within +-tolerance, by bisection) such that every
/// gamma^2 of both families stays strictly positive on the whole sampled
/// sphere ||M - Id||_F = eps. Callers shrink by EPS0_SHRINK before use.
pub fn estimate_eps0(tolerance: f64) -> f64 {
    assert!(tolerance > 0.0);
    let ok = |eps: f64| -> bool {
        for i in 0..SPHERE_SAMPLES {
            let s = sphere_point(i, SPHERE_SAMPLES);
            let m = SymMat2::IDENTITY.add(&s.scale(eps));
            for fam in [Family::Zero, Family::One] {
                if gamma_sq(fam, m).iter().any(|&v| v <= 0.0) {
                    return false;
                }
            }
        }
        true
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    debug_assert!(!ok(hi));
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
