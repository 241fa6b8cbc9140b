//! The iteration state: time-sampled (v, p, theta, R) plus the scalar data
//! (delta, alpha, energy profile) that a step consumes and reproduces.

use crate::error::{Error, Result};
use crate::field::{ScalarField, SymTensorField, VectorField};
use crate::grid::Grid2D;
use crate::norms::linf_norm;
use crate::spectral::divergence;
use crate::timegrid::TimeGrid;

/// Prescribed kinetic energy e(t) >= 1 on [0,1].
#[derive(Clone, Copy, Debug)]
pub enum EnergyProfile {
    Constant { base: f64 },
    Sinusoid { base: f64, amp: f64, phase: f64 },
}

impl EnergyProfile {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            EnergyProfile::Constant { base } => base,
            EnergyProfile::Sinusoid { base, amp, phase } => {
                base + amp * (crate::grid::TAU * t + phase).sin()
            }
        }
    }

    /// e(t) and its time derivative.
    pub fn at_with_dt(&self, t: f64) -> (f64, f64) {
        match *self {
            EnergyProfile::Constant { base } => (base, 0.0),
            EnergyProfile::Sinusoid { base, amp, phase } => {
                let arg = crate::grid::TAU * t + phase;
                (
                    base + amp * arg.sin(),
                    amp * crate::grid::TAU * arg.cos(),
                )
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min = match *self {
            EnergyProfile::Constant { base } => base,
            EnergyProfile::Sinusoid { base, amp, .. } => base - amp.abs(),
        };
        if min < 1.0 {
            return Err(Error::Validation {
                what: "energy profile",
                message: format!("min e(t) = {min} but the profile must stay >= 1"),
            });
        }
        Ok(())
    }
}

/// Linear interpolation between uniformly spaced field samples; t is clamped
/// to [0,1] so FD edge effects cannot read out of range.
pub fn interp_vector(samples: &[VectorField], times: &TimeGrid, t: f64) -> VectorField {
    assert_eq!(samples.len(), times.len());
    let m = samples.len();
    let dt = times.dt();
    let pos = (t.clamp(0.0, 1.0)) / dt;
    let i = (pos.floor() as usize).min(m - 2);
    let w = pos - i as f64;
    let mut out = samples[i].clone();
    out.scale(1.0 - w);
    out.axpy(w, &samples[i + 1]);
    out
}

/// One full iterate: everything Prop-style step k hands to step k+1.
pub struct IterationState {
    pub grid: Grid2D,
    pub times: TimeGrid,
    pub v: Vec<VectorField>,
    pub p: Vec<ScalarField>,
    pub theta: Vec<ScalarField>,
    pub stress: Vec<SymTensorField>,
    pub delta: f64,
    pub alpha: f64,
    pub e: EnergyProfile,
}

/// Measured state invariants; thresholds live with the caller because demo
/// and strict runs react differently.
#[derive(Clone, Debug)]
pub struct StateHealth {
    pub max_div_v: f64,
    pub max_stress_trace: f64,
    pub max_theta_mean: f64,
    /// (t, e(t) - int |v|^2, admissible) per sample.
    pub window: Vec<(f64, f64, bool)>,
}

impl IterationState {
    /// The bootstrap state (0, 0, 0, 0).
    pub fn zero(
        grid: Grid2D,
        times: TimeGrid,
        delta: f64,
        alpha: f64,
        e: EnergyProfile,
    ) -> IterationState {
        let m = times.len();
        IterationState {
            grid,
            times,
            v: (0..m).map(|_| VectorField::zeros(grid)).collect(),
            p: (0..m).map(|_| ScalarField::zeros(grid)).collect(),
            theta: (0..m).map(|_| ScalarField::zeros(grid)).collect(),
            stress: (0..m).map(|_| SymTensorField::zeros(grid)).collect(),
            delta,
            alpha,
            e,
        }
    }

    pub fn v_at(&self, t: f64) -> VectorField {
        interp_vector(&self.v, &self.times, t)
    }

    /// Unnormalized kinetic energy int |v|^2 at sample i.
    pub fn kinetic_energy(&self, i: usize) -> f64 {
        let v = &self.v[i];
        let mean = v.x.data().iter().map(|a| a * a).sum::<f64>()
            + v.y.data().iter().map(|a| a * a).sum::<f64>();
        crate::amplitudes::AREA * mean / self.grid.len() as f64
    }

    pub fn health(&self) -> StateHealth {
        let mut max_div_v = 0.0_f64;
        let mut max_stress_trace = 0.0_f64;
        let mut max_theta_mean = 0.0_f64;
        let mut window = Vec::with_capacity(self.times.len());
        for i in 0..self.times.len() {
            max_div_v = max_div_v.max(linf_norm(&divergence(&self.v[i])));
            max_stress_trace = max_stress_trace.max(
                self.stress[i]
                    .trace()
                    .data()
                    .iter()
                    .fold(0.0_f64, |m, v| m.max(v.abs())),
            );
            max_theta_mean = max_theta_mean.max(self.theta[i].mean().abs());
            let t = self.times.t(i);
            let e_t = self.e.at(t);
            let gap = e_t - self.kinetic_energy(i);
            let ok = crate::amplitudes::energy_window_ok(e_t, self.kinetic_energy(i), self.delta);
            window.push((t, gap, ok));
        }
        StateHealth {
            max_div_v,
            max_stress_trace,
            max_theta_mean,
            window,
        }
    }

    /// Largest stress magnitude over all samples; sets the cutoff ladder.
    pub fn max_stress(&self) -> f64 {
        self.stress
            .iter()
            .fold(0.0_f64, |m, r| m.max(r.max_frobenius()))
    }
}
