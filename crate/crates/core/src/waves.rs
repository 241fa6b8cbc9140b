//! Wave parameters, the intermittent densities eta riding plane-wave
//! carriers, analytic time derivatives, and frequency-support reports.
//!
//! eta_(xi)(x,t) samples the 2D Dirichlet kernel along the rotated integer
//! lattice: modes K = s N (j xi + k xi_perp), |j|,|k| <= r, with coefficient
//! e^{i j s N mu t}/(2r+1) where s = lambda*sigma is kept as an exact
//! integer. The carrier pair for xi is (cos, sin) of lambda xi_perp . x.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, Spectrum, VectorField};
use crate::geometry::{c0, Direction, Family};
use crate::grid::{Grid2D, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Strict,
    Demo,
}

#[derive(Clone, Copy, Debug)]
pub struct WaveParams {
    /// Carrier frequency lambda.
    pub lambda: u64,
    /// s = lambda * sigma, kept integer so the oscillation lattice is exact.
    pub s: u64,
    /// Kernel half-width r.
    pub r: u32,
    /// Temporal frequency mu (integer-valued in practice).
    pub mu: f64,
    /// The fixed geometric N.
    pub n_geom: u32,
}

impl WaveParams {
    pub fn new(lambda: u64, s: u64, r: u32, mu: f64, n_geom: u32) -> Result<Self> {
        if lambda == 0 || s == 0 || n_geom == 0 {
            return Err(Error::Validation {
                what: "wave parameters",
                message: format!("lambda={lambda}, s={s}, N={n_geom} must all be positive"),
            });
        }
        if !(mu > 0.0) {
            return Err(Error::Validation {
                what: "wave parameters",
                message: format!("mu = {mu} must be positive"),
            });
        }
        Ok(WaveParams {
            lambda,
            s,
            r,
            mu,
            n_geom,
        })
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.s as f64 / self.lambda as f64
    }

    /// Whether the disjoint-support spacing condition sigma r <= c0/(50 N)
    /// holds for these values.
    pub fn strict_ok(&self) -> bool {
        self.sigma() * self.r as f64 <= c0() / (50.0 * self.n_geom as f64)
    }

    /// sigma r relative to its strict-mode ceiling; 1 is the boundary.
    pub fn spacing_violation(&self) -> f64 {
        self.sigma() * self.r as f64 / (c0() / (50.0 * self.n_geom as f64))
    }

    /// Base frequency of the eta lattice, s*N.
    #[inline]
    pub fn base_freq(&self) -> u64 {
        self.s * self.n_geom as u64
    }

    /// Fundamental period of eta in time, 2 pi / (s N mu).
    pub fn eta_period(&self) -> f64 {
        TAU / (self.base_freq() as f64 * self.mu)
    }
}

/// Parameters tied to the single knob lambda: r = [lambda^alpha],
/// sigma = lambda^{-(1+alpha)/2} rounded so that lambda*sigma is an integer,
/// mu = [lambda^{(3 alpha + 1)/4}]. Strict mode fails with the smallest
/// feasible lambda when the spacing condition cannot hold.
pub fn choose_params(alpha: f64, lambda1: u64, mode: Mode) -> Result<WaveParams> {
    if !(0.5..1.0).contains(&alpha) {
        return Err(Error::Validation {
            what: "alpha",
            message: format!("alpha = {alpha} outside [1/2, 1)"),
        });
    }
    if lambda1 == 0 || lambda1 % 5 != 0 {
        return Err(Error::Validation {
            what: "lambda",
            message: format!("lambda = {lambda1} must be a positive multiple of 5"),
        });
    }
    let lf = lambda1 as f64;
    // floor with a one-ulp-scale nudge so exact powers are not lost to
    // powf rounding (e.g. 160000^(1/4))
    let r = ((lf.powf(alpha) + 1e-9).floor() as u32).max(1);
    let s = (lf.powf((1.0 - alpha) / 2.0).round() as u64).max(1);
    let mu = ((lf.powf((3.0 * alpha + 1.0) / 4.0) + 1e-9).floor()).max(1.0);
    let n_geom = 5;
    let params = WaveParams::new(lambda1, s, r, mu, n_geom)?;
    if mode == Mode::Strict && !params.strict_ok() {
        let limit = c0() / (50.0 * n_geom as f64);
        // with the formula values sigma*r = lambda^{(alpha-1)/2}
        let min_lambda = limit.powf(2.0 / (alpha - 1.0));
        return Err(Error::StrictInfeasible {
            lambda: lambda1,
            sigma_r: params.sigma() * params.r as f64,
            limit,
            min_lambda,
        });
    }
    Ok(params)
}

/// One direction's cached time-independent pieces.
pub struct DirectionWaves {
    pub xi: Direction,
    /// lambda xi_perp as an exact lattice vector.
    pub carrier_k: (i64, i64),
    /// cos(lambda xi_perp . x), sin(lambda xi_perp . x).
    pub carrier_cos: ScalarField,
    pub carrier_sin: ScalarField,
    /// W_(xi) + W_(-xi) = -2 xi sin(lambda xi_perp . x).
    pub wpair: VectorField,
    /// s N xi and s N xi_perp as exact lattice vectors.
    base: (i64, i64),
    base_perp: (i64, i64),
}

/// cos/sin of an exact lattice phase l . x, via a period-exact phase table.
pub fn harmonic_pair(grid: Grid2D, l: (i64, i64)) -> (ScalarField, ScalarField) {
    let ng = grid.ng();
    let n = ng as i64;
    let table: Vec<(f64, f64)> = (0..ng)
        .map(|m| {
            let a = TAU * m as f64 / ng as f64;
            (a.cos(), a.sin())
        })
        .collect();
    let mut c = ScalarField::zeros(grid);
    let mut s = ScalarField::zeros(grid);
    for iy in 0..ng {
        for ix in 0..ng {
            let phase = (l.0 * ix as i64 + l.1 * iy as i64).rem_euclid(n) as usize;
            let (cv, sv) = table[phase];
            c.data_mut()[iy * ng + ix] = cv;
            s.data_mut()[iy * ng + ix] = sv;
        }
    }
    (c, s)
}

fn check_axis_resolved(what: &str, k: (i64, i64), grid: Grid2D) -> Result<()> {
    let m = k.0.abs().max(k.1.abs());
    if m > grid.max_resolved() {
        return Err(Error::Resolution {
            what: what.to_string(),
            required: 2 * m as usize + 2,
            ng: grid.ng(),
        });
    }
    Ok(())
}

/// Spectral fill of eta (or its analytic time derivative when with_dt).
fn eta_spectrum(
    xi: Direction,
    params: &WaveParams,
    t: f64,
    grid: Grid2D,
    with_dt: bool,
) -> Result<Spectrum> {
    // eta is declared even in xi; evaluate the canonical representative
    let xi = xi.canonical();
    let sn = (params.base_freq()) as i64;
    let base = xi.scaled(sn)?;
    let base_perp = xi.perp().scaled(sn)?;
    let ri = params.r as i64;
    let corner = (
        ri * (base.0.abs() + base_perp.0.abs()),
        ri * (base.1.abs() + base_perp.1.abs()),
    );
    check_axis_resolved("eta lattice", corner, grid)?;
    let mut spec = Spectrum::zeros(grid);
    let norm = 1.0 / (2.0 * params.r as f64 + 1.0);
    for j in -ri..=ri {
        // phase angle j s N mu t; j s N is exact in f64 at these sizes
        let omega = (j * sn) as f64 * params.mu;
        let angle = omega * t;
        let mut coef = Complex64::new(angle.cos(), angle.sin()) * norm;
        if with_dt {
            coef *= Complex64::new(0.0, omega);
        }
        for k in -ri..=ri {
            let kk = (j * base.0 + k * base_perp.0, j * base.1 + k * base_perp.1);
            spec.add_mode(kk.0, kk.1, coef);
        }
    }
    Ok(spec)
}

/// eta_(xi)(., t); even in xi, mean 1/(2r+1), unit L2 mass.
pub fn eta_field(xi: Direction, params: &WaveParams, t: f64, grid: Grid2D) -> Result<ScalarField> {
    Ok(eta_spectrum(xi, params, t, grid, false)?.ifft())
}

/// Analytic d/dt of eta_(xi); satisfies (1/mu) d_t eta = xi . grad eta.
pub fn eta_dt_field(
    xi: Direction,
    params: &WaveParams,
    t: f64,
    grid: Grid2D,
) -> Result<ScalarField> {
    Ok(eta_spectrum(xi, params, t, grid, true)?.ifft())
}

pub struct WaveSet {
    pub family: Family,
    pub params: WaveParams,
    pub grid: Grid2D,
    pub dirs: Vec<DirectionWaves>,
}

impl WaveSet {
    /// Builds carriers and wave pairs for the family's positive half.
    /// Validates every lattice placement and the grid resolution.
    pub fn new(family: Family, params: WaveParams, grid: Grid2D) -> Result<WaveSet> {
        let mut dirs = Vec::with_capacity(3);
        for xi in family.directions() {
            let carrier_k = xi.perp().scaled(params.lambda as i64)?;
            check_axis_resolved("carrier", carrier_k, grid)?;
            let sn = params.base_freq() as i64;
            let base = xi.scaled(sn)?;
            let base_perp = xi.perp().scaled(sn)?;
            let ri = params.r as i64;
            let corner = (
                ri * (base.0.abs() + base_perp.0.abs()),
                ri * (base.1.abs() + base_perp.1.abs()),
            );
            check_axis_resolved("eta lattice", corner, grid)?;
            let (carrier_cos, carrier_sin) = harmonic_pair(grid, carrier_k);
            let (xf, yf) = xi.as_f64();
            let mut wx = carrier_sin.clone();
            wx.scale(-2.0 * xf);
            let mut wy = carrier_sin.clone();
            wy.scale(-2.0 * yf);
            dirs.push(DirectionWaves {
                xi,
                carrier_k,
                carrier_cos,
                carrier_sin,
                wpair: VectorField { x: wx, y: wy },
                base,
                base_perp,
            });
        }
        Ok(WaveSet {
            family,
            params,
            grid,
            dirs,
        })
    }

    pub fn eta(&self, dir: usize, t: f64) -> ScalarField {
        eta_field(self.dirs[dir].xi, &self.params, t, self.grid)
            .expect("validated at construction")
    }

    pub fn eta_dt(&self, dir: usize, t: f64) -> ScalarField {
        eta_dt_field(self.dirs[dir].xi, &self.params, t, self.grid)
            .expect("validated at construction")
    }

    /// Exact frequency lattice of the real combined wave eta * Wpair for one
    /// direction: +-lambda xi_perp + K over all kernel modes K.
    pub fn wave_frequencies(&self, dir: usize) -> Vec<(i64, i64)> {
        let d = &self.dirs[dir];
        let ri = self.params.r as i64;
        let mut out = Vec::new();
        for sign in [1i64, -1] {
            for j in -ri..=ri {
                for k in -ri..=ri {
                    out.push((
                        sign * d.carrier_k.0 + j * d.base.0 + k * d.base_perp.0,
                        sign * d.carrier_k.1 + j * d.base.1 + k * d.base_perp.1,
                    ));
                }
            }
        }
        out
    }
}

/// Exact frequency lattice of the product of two real combined waves,
/// s1 lambda xi_perp + s2 lambda xi'_perp + K + K' over signs and modes.
pub fn wave_product_frequencies(
    xi: Direction,
    xi2: Direction,
    params: &WaveParams,
) -> Result<Vec<(i64, i64)>> {
    let l1 = xi.perp().scaled(params.lambda as i64)?;
    let l2 = xi2.perp().scaled(params.lambda as i64)?;
    let sn = params.base_freq() as i64;
    let (b1, p1) = (xi.scaled(sn)?, xi.perp().scaled(sn)?);
    let (b2, p2) = (xi2.scaled(sn)?, xi2.perp().scaled(sn)?);
    let ri = params.r as i64;
    let mut out = Vec::new();
    for s1 in [1i64, -1] {
        for s2 in [1i64, -1] {
            for j1 in -ri..=ri {
                for k1 in -ri..=ri {
                    for j2 in -ri..=ri {
                        for k2 in -ri..=ri {
                            out.push((
                                s1 * l1.0 + s2 * l2.0 + j1 * b1.0 + k1 * p1.0 + j2 * b2.0
                                    + k2 * p2.0,
                                s1 * l1.1 + s2 * l2.1 + j1 * b1.1 + k1 * p1.1 + j2 * b2.1
                                    + k2 * p2.1,
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub struct SupportReport {
    pub pass: bool,
    pub leaked_mass: f64,
}

/// L2 mass fraction outside low <= |k| <= high (Euclidean, inclusive;
/// the zero mode counts as inside only when low = 0). Pass at <= 1e-12.
pub fn check_frequency_support(spec: &Spectrum, low: f64, high: f64) -> SupportReport {
    let grid = spec.grid();
    let ng = grid.ng();
    let total = spec.mass();
    if total == 0.0 {
        return SupportReport {
            pass: true,
            leaked_mass: 0.0,
        };
    }
    let mut outside = 0.0;
    for iy in 0..ng {
        let ky = grid.wavenumber(iy);
        for ix in 0..ng {
            let kx = grid.wavenumber(ix);
            let k = ((kx * kx + ky * ky) as f64).sqrt();
            let inside = k >= low && k <= high;
            if !inside {
                outside += spec.coef()[iy * ng + ix].norm_sqr();
            }
        }
    }
    let leaked = outside / total;
    SupportReport {
        pass: leaked <= 1e-12,
        leaked_mass: leaked,
    }
}

/// Same report for an exact frequency list instead of a gridded spectrum,
/// each frequency carrying equal mass. Used where the lattice is too large
/// to grid (strict-mode parameters).
pub fn check_lattice_support(freqs: &[(i64, i64)], low: f64, high: f64) -> SupportReport {
    if freqs.is_empty() {
        return SupportReport {
            pass: true,
            leaked_mass: 0.0,
        };
    }
    let outside = freqs
        .iter()
        .filter(|&&(kx, ky)| {
            let k = ((kx * kx + ky * ky) as f64).sqrt();
            !(k >= low && k <= high)
        })
        .count();
    let leaked = outside as f64 / freqs.len() as f64;
    SupportReport {
        pass: leaked == 0.0,
        leaked_mass: leaked,
    }
}
