//! One full step: from (v0, p0, theta0, R0) with window parameter delta to
//! (v1, p1, theta1, R1) with delta/2, streaming over the slow time grid so
//! peak memory stays at a handful of field slices regardless of M.
//!
//! Per sample the stages run in a fixed order: cutoff ladder, rho_0, the
//! amplitude solve, wave assembly, v1, the temperature march across the
//! interval, pressure and stress assembly, then the identity checks and the
//! energy decomposition. Any stage error aborts tagged with the stage name.

use crate::amplitudes::{build_amplitude_slice, rho0_of_t, AmplitudeSlice};
use crate::config::RunConfig;
use crate::cutoffs::{partition_defect, CutoffLadder};
use crate::energy::{energy_terms, v1_energy};
use crate::error::{at_stage, Error, Result};
use crate::field::{ScalarField, SymTensorField, TensorField, VectorField};
use crate::geometry::Family;
use crate::norms::{linf_norm, linf_norm_vec, lp_norm_sym, lp_norm_vec};
use crate::oscillation::oscillation_identity;
use crate::perturbation::{build_perturbation_slice, required_grid_size, PerturbationSlice};
use crate::spectral::{
    anti_divergence, divergence, frac_laplacian_vec, grad_perp, gradient,
    sym_tensor_divergence, tensor_divergence,
};
use crate::state::IterationState;
use crate::stress::{assemble_stress, momentum_residual, StressInputs};
use crate::temperature::{energy_drift_parts, ThetaSolver, Velocity};
use crate::waves::{WaveParams, WaveSet};
use serde::Serialize;
use std::collections::HashMap;

pub struct StepOptions {
    /// Retain the full (v1, p1, theta1, R1) series for chaining. Off, the
    /// step returns only the report and memory stays O(1) in M.
    pub keep_state: bool,
    /// Slow-sample indices where the finite-difference residual oracle
    /// runs; each must lie in [2, M-3] so the centered stencil fits.
    pub probes: Vec<usize>,
    /// Family of shell 0; alternate it between chained steps.
    pub base_family: Family,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            keep_state: true,
            probes: Vec::new(),
            base_family: Family::Zero,
        }
    }
}

/// One named measurement with its pass threshold. `required = false` rows
/// are reported (the desk-scale window checks) but cannot fail a run.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub required: bool,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StressRow {
    pub t: f64,
    pub l1_linear: f64,
    pub l1_corrector: f64,
    pub l1_oscillation: f64,
    pub l1_temperature: f64,
    pub l1_total: f64,
    pub lp_total: f64,
    pub linf_total: f64,
    /// identity residual with analytic time derivatives, sup norm over x
    pub residual_linf: f64,
    pub residual_scale: f64,
    /// grouped-vs-direct oscillation mismatch, sup norm over x
    pub cancellation_defect: f64,
    pub cancellation_scale: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    pub e: f64,
    pub target: f64,
    pub v1_energy: f64,
    pub base_exchange: f64,
    pub corrector: f64,
    pub lattice_defect: f64,
    pub carrier_defect: f64,
    pub higher_shells: f64,
    pub e_err: f64,
    /// |(v1_energy - target) - e_err|: quadrature-level consistency
    pub decomposition_gap: f64,
    pub window_lo: f64,
    pub window_hi: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SampleRow {
    pub t: f64,
    pub rho0: f64,
    pub div_w1: f64,
    pub div_v1: f64,
    pub wp_l2: f64,
    pub wc_l2: f64,
    pub wt_l2: f64,
    pub w1_l2: f64,
    pub w1_l1: f64,
    pub partition_defect: f64,
    pub cancellation_defect: f64,
    pub stress_trace: f64,
    pub theta_l2_sq: f64,
    pub theta_grad_sq: f64,
    pub osc_mean_defect: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProbeRow {
    pub index: usize,
    pub t: f64,
    /// L2 of the full equation residual over L2 scale of its largest term
    pub rel_l2: f64,
    pub abs_l2: f64,
    pub scale: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThetaSummary {
    pub initial_linf: f64,
    pub sup_linf: f64,
    pub initial_l2_sq: f64,
    pub final_l2_sq: f64,
    pub energy_drift: f64,
    pub substeps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepParams {
    pub lambda: u64,
    pub s: u64,
    pub r: u32,
    pub mu: f64,
    pub sigma: f64,
    pub ng: usize,
    pub m_time: usize,
    pub alpha: f64,
    pub delta: f64,
    pub eps0: f64,
    pub j_max: usize,
    pub base_family: usize,
    pub spacing_violation: f64,
}

#[derive(Serialize)]
pub struct StepReport {
    pub params: StepParams,
    pub checks: Vec<CheckRow>,
    pub stress_rows: Vec<StressRow>,
    pub energy_rows: Vec<EnergyRow>,
    pub sample_rows: Vec<SampleRow>,
    pub probe_rows: Vec<ProbeRow>,
    pub theta: ThetaSummary,
    /// input-state window outcomes per sample: (t, gap, admissible)
    pub input_window: Vec<(f64, f64, bool)>,
    pub r1_l1_sup: f64,
    pub r1_lp_sup: f64,
    pub r1_linf_sup: f64,
    pub wc_over_wp_l2: f64,
    pub e_err_rel_sup: f64,
    pub term3_abs_sup: f64,
}

/// 4th-order first-derivative stencils on five consecutive samples; row k
/// differentiates at offset k. Divide by 12 h.
const FD4: [[f64; 5]; 5] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
    [-1.0, 6.0, -18.0, 10.0, 3.0],
    [3.0, -16.0, 36.0, -48.0, 25.0],
];

struct AmpSample {
    amps: AmplitudeSlice,
    iso: ScalarField,
    rho0: f64,
    partition_defect: f64,
    cancellation_defect: f64,
}

fn build_amp_sample(
    m: usize,
    state0: &IterationState,
    ladder: &CutoffLadder,
    eps0: f64,
    base: Family,
) -> Result<AmpSample> {
    let t = state0.times.t(m);
    let r0 = &state0.stress[m];
    let chi = ladder.slice(r0);
    let e_t = state0.e.at(t);
    let v0_energy = state0.kinetic_energy(m);
    let rho0 = at_stage(
        "rho0_of_t",
        rho0_of_t(t, e_t, v0_energy, chi[0].mul_pointwise(&chi[0]).mean(), state0.delta),
    )?;
    let amps = at_stage(
        "build_amplitudes",
        build_amplitude_slice(&chi, r0, rho0, state0.delta, base, eps0),
    )?;
    let iso = amps.isotropic_part(&chi);
    Ok(AmpSample {
        partition_defect: partition_defect(&chi),
        cancellation_defect: amps.cancellation_defect(&chi, r0),
        amps,
        iso,
        rho0,
    })
}

/// a_dot at window offset `off` from five consecutive amplitude slices.
fn amp_time_derivative(window: &[&AmplitudeSlice; 5], off: usize, h: f64) -> Vec<[ScalarField; 3]> {
    let grid = window[0].a[0][0].grid();
    let shells = window[0].a.len();
    let w = FD4[off];
    let mut out = Vec::with_capacity(shells);
    for j in 0..shells {
        let mut per_dir: [ScalarField; 3] = [
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
        ];
        for (d, field) in per_dir.iter_mut().enumerate() {
            for k in 0..5 {
                if w[k] != 0.0 {
                    field.axpy(w[k] / (12.0 * h), &window[k].a[j][d]);
                }
            }
        }
        out.push(per_dir);
    }
    out
}

fn lerp_vec(a: &VectorField, b: &VectorField, w: f64) -> VectorField {
    let mut out = a.clone();
    out.scale(1.0 - w);
    out.axpy(w, b);
    out
}

struct ProbePending {
    t: f64,
    r1: SymTensorField,
    p1: ScalarField,
    theta1: ScalarField,
}

/// Static wave diagnostics: lattice density normalization and the transport
/// identity (1/mu) dt eta = xi . grad eta, measured on one slice.
fn wave_checks(wavesets: &[WaveSet; 2], params: &WaveParams, checks: &mut Vec<CheckRow>) {
    let mut eta_norm_defect = 0.0_f64;
    let mut transport_rel = 0.0_f64;
    let t_probe = 0.231;
    for ws in wavesets {
        for dir in 0..3 {
            let eta = ws.eta(dir, t_probe);
            eta_norm_defect =
                eta_norm_defect.max((eta.mul_pointwise(&eta).mean() - 1.0).abs());
            let eta_dot = ws.eta_dt(dir, t_probe);
            let g = gradient(&eta);
            let (xix, xiy) = ws.dirs[dir].xi.as_f64();
            let mut resid = 0.0_f64;
            let mut scale = 0.0_f64;
            for i in 0..eta.data().len() {
                let advect = xix * g.x.data()[i] + xiy * g.y.data()[i];
                resid = resid.max((eta_dot.data()[i] / params.mu - advect).abs());
                scale = scale.max(advect.abs());
            }
            transport_rel = transport_rel.max(resid / scale.max(1e-300));
        }
    }
    checks.push(CheckRow {
        name: "eta mean-square density = 1".into(),
        measured: eta_norm_defect,
        threshold: 1e-12,
        required: true,
        pass: eta_norm_defect <= 1e-12,
    });
    checks.push(CheckRow {
        name: "transport identity (1/mu) dt eta = xi . grad eta".into(),
        measured: transport_rel,
        threshold: 1e-8,
        required: true,
        pass: transport_rel <= 1e-8,
    });
}

/// div(R(v)) must reproduce v - mean v for band-limited v.
fn anti_divergence_check(grid: crate::grid::Grid2D, checks: &mut Vec<CheckRow>) {
    let psi = ScalarField::from_fn(grid, |x, y| {
        (x + 2.0 * y).sin() + 0.4 * (3.0 * x - y).cos()
    });
    let phi = ScalarField::from_fn(grid, |x, y| 0.7 * (2.0 * x + y).cos() + (y).sin());
    let v = grad_perp(&psi).add(&gradient(&phi));
    let rebuilt = sym_tensor_divergence(&anti_divergence(&v));
    let mean_free = {
        let mut m = v.clone();
        let mx = v.x.mean();
        let my = v.y.mean();
        for d in m.x.data_mut() {
            *d -= mx;
        }
        for d in m.y.data_mut() {
            *d -= my;
        }
        m
    };
    let defect = linf_norm_vec(&rebuilt.sub(&mean_free)) / linf_norm_vec(&mean_free).max(1e-300);
    checks.push(CheckRow {
        name: "anti-divergence right inverse".into(),
        measured: defect,
        threshold: 1e-10,
        required: true,
        pass: defect <= 1e-10,
    });
}

pub fn run_iteration(
    state0: &IterationState,
    config: &RunConfig,
    lambda: u64,
    opts: &StepOptions,
) -> Result<(Option<IterationState>, StepReport)> {
    let grid = state0.grid;
    let times = state0.times;
    let m_total = times.len();
    if m_total < 5 {
        return Err(Error::Validation {
            what: "time grid",
            message: format!("need at least 5 slow samples for the time stencils, got {m_total}"),
        });
    }
    if m_total != config.m_time {
        return Err(Error::Validation {
            what: "time grid",
            message: format!(
                "state carries {m_total} samples but the config asks for {}",
                config.m_time
            ),
        });
    }
    for &p in &opts.probes {
        if p < 2 || p + 2 >= m_total {
            return Err(Error::Validation {
                what: "probe index",
                message: format!("probe {p} outside [2, {}]", m_total - 3),
            });
        }
    }
    let params = at_stage("choose_params", config.wave_params(lambda))?;
    let required = required_grid_size(&params);
    if grid.ng() < required {
        return at_stage(
            "choose_params",
            Err(Error::Resolution {
                what: "wave products on the run grid".into(),
                required,
                ng: grid.ng(),
            }),
        );
    }
    let eps0 = config
        .eps0_override
        .unwrap_or_else(|| crate::geometry::estimate_eps0(1e-4));

    let mut checks: Vec<CheckRow> = Vec::new();

    // input health: divergence, trace, theta means, energy window
    let health = state0.health();
    checks.push(CheckRow {
        name: "input div v = 0".into(),
        measured: health.max_div_v,
        threshold: 1e-8,
        required: true,
        pass: health.max_div_v <= 1e-8,
    });
    checks.push(CheckRow {
        name: "input stress trace-free".into(),
        measured: health.max_stress_trace,
        threshold: 1e-10 * state0.max_stress().max(1.0),
        required: true,
        pass: health.max_stress_trace <= 1e-10 * state0.max_stress().max(1.0),
    });
    checks.push(CheckRow {
        name: "input theta mean-free".into(),
        measured: health.max_theta_mean,
        threshold: 1e-10,
        required: true,
        pass: health.max_theta_mean <= 1e-10,
    });
    let window_violations = health.window.iter().filter(|&&(_, _, ok)| !ok).count();
    checks.push(CheckRow {
        name: "input energy window (3/4 .. 5/4) delta e".into(),
        measured: window_violations as f64,
        threshold: 0.0,
        required: config.mode == crate::waves::Mode::Strict,
        pass: window_violations == 0,
    });

    let ladder = at_stage(
        "build_cutoffs",
        CutoffLadder::new(state0.max_stress(), state0.delta, eps0),
    )?;

    let wavesets = at_stage(
        "waves",
        (|| -> Result<[WaveSet; 2]> {
            Ok([
                WaveSet::new(Family::Zero, params, grid)?,
                WaveSet::new(Family::One, params, grid)?,
            ])
        })(),
    )?;
    wave_checks(&wavesets, &params, &mut checks);
    anti_divergence_check(grid, &mut checks);

    // temperature initial data comes from the config, not from state0
    let theta_init = at_stage("advance_theta", config.theta0(grid))?;
    let theta_trivial = theta_init.data().iter().all(|&v| v == 0.0)
        && state0.theta.iter().all(|th| th.data().iter().all(|&v| v == 0.0));
    let mut theta_solver = if theta_trivial {
        None
    } else {
        Some(at_stage("advance_theta", ThetaSolver::new(&theta_init, times.t(0)))?)
    };
    let theta_initial_linf = theta_init.max_abs();
    let theta_initial_l2_sq = theta_solver.as_ref().map_or(0.0, |s| s.l2_sq());
    let mut theta_sup_linf = theta_initial_linf;
    let mut theta_final_l2_sq = theta_initial_l2_sq;

    let h = times.dt();
    let mut amp_cache: HashMap<usize, AmpSample> = HashMap::new();
    let mut slice_next: Option<PerturbationSlice> = None;
    let mut v1_ring: Vec<(usize, VectorField)> = Vec::new();
    let mut probe_pending: HashMap<usize, ProbePending> = HashMap::new();

    let mut stress_rows = Vec::with_capacity(m_total);
    let mut energy_rows = Vec::with_capacity(m_total);
    let mut sample_rows = Vec::with_capacity(m_total);
    let mut probe_rows: Vec<ProbeRow> = Vec::new();

    let mut out_v: Vec<VectorField> = Vec::new();
    let mut out_p: Vec<ScalarField> = Vec::new();
    let mut out_theta: Vec<ScalarField> = Vec::new();
    let mut out_stress: Vec<SymTensorField> = Vec::new();

    let mut max_div_w1 = 0.0_f64;
    let mut max_div_v1 = 0.0_f64;
    let mut max_partition = 0.0_f64;
    let mut max_cancellation = 0.0_f64;
    let mut max_trace_rel = 0.0_f64;
    let mut max_residual_rel = 0.0_f64;
    let mut max_osc_rel = 0.0_f64;
    let mut max_osc_mean_rel = 0.0_f64;
    let mut max_split_defect = 0.0_f64;
    let mut max_decomposition_gap_rel = 0.0_f64;
    let mut r1_l1_sup = 0.0_f64;
    let mut r1_lp_sup = 0.0_f64;
    let mut r1_linf_sup = 0.0_f64;
    let mut wc_over_wp = 0.0_f64;
    let mut e_err_rel_sup = 0.0_f64;
    let mut term3_abs_sup = 0.0_f64;
    let mut j_max_seen = 0usize;

    let build_slice = |m: usize,
                       amp_cache: &HashMap<usize, AmpSample>|
     -> Result<PerturbationSlice> {
        let w0 = (m.saturating_sub(2)).min(m_total - 5);
        let window: [&AmplitudeSlice; 5] = [
            &amp_cache[&w0].amps,
            &amp_cache[&(w0 + 1)].amps,
            &amp_cache[&(w0 + 2)].amps,
            &amp_cache[&(w0 + 3)].amps,
            &amp_cache[&(w0 + 4)].amps,
        ];
        let a_dot = amp_time_derivative(&window, m - w0, h);
        at_stage(
            "assemble_perturbation",
            build_perturbation_slice(times.t(m), &amp_cache[&m].amps, &a_dot, &wavesets, &params),
        )
    };

    for c in 0..m_total {
        // amplitude slices needed by the time stencils of slice c and c+1:
        // the five-point window of slice m starts at min(max(m-2,0), M-5)
        let hi = c.saturating_sub(1).min(m_total - 5) + 4;
        let lo = c.saturating_sub(2).min(m_total - 5);
        for m in lo..=hi {
            if !amp_cache.contains_key(&m) {
                let s = build_amp_sample(m, state0, &ladder, eps0, opts.base_family)?;
                j_max_seen = j_max_seen.max(s.amps.a.len() - 1);
                amp_cache.insert(m, s);
            }
        }
        amp_cache.retain(|&m, _| m + 2 >= c.min(m_total - 5) && m <= hi);

        let slice = match slice_next.take() {
            Some(s) => s,
            None => build_slice(c, &amp_cache)?,
        };
        if c + 1 < m_total {
            slice_next = Some(build_slice(c + 1, &amp_cache)?);
        }

        let t_c = times.t(c);
        let amp = &amp_cache[&c];
        let v0_c = &state0.v[c];
        let v1_c = v0_c.add(&slice.w1);

        // theta at this sample, before marching the interval
        let theta1_c = match &theta_solver {
            Some(s) => s.theta(),
            None => ScalarField::zeros(grid),
        };
        let (theta_l2_sq, theta_grad_sq) = match &theta_solver {
            Some(s) => (s.l2_sq(), s.grad_l2_sq()),
            None => (0.0, 0.0),
        };
        theta_sup_linf = theta_sup_linf.max(theta1_c.max_abs());
        theta_final_l2_sq = theta_l2_sq;

        let inputs = StressInputs {
            slice: &slice,
            v0: v0_c,
            r0: &state0.stress[c],
            isotropic: &amp.iso,
            theta0: &state0.theta[c],
            theta1: &theta1_c,
            alpha: state0.alpha,
        };
        let breakdown = at_stage("assemble_stress", assemble_stress(&inputs, &wavesets, &params))?;
        let res = momentum_residual(&inputs, &breakdown);
        let osc = oscillation_identity(&slice, &state0.stress[c], &breakdown.pressure, &breakdown.groups);
        let p1_c = state0.p[c].add(&breakdown.pressure.increment());

        let div_w1 = linf_norm(&divergence(&slice.w1));
        let div_v1 = linf_norm(&divergence(&v1_c));
        let trace = linf_norm(&breakdown.total.trace());
        let trace_rel = trace / breakdown.total.max_frobenius().max(1e-300);
        let split = linf_norm_vec(
            &slice
                .w1
                .sub(&slice.wp.add(&slice.wc).add(&slice.wt)),
        );

        max_div_w1 = max_div_w1.max(div_w1);
        max_div_v1 = max_div_v1.max(div_v1);
        max_partition = max_partition.max(amp.partition_defect);
        max_cancellation = max_cancellation.max(amp.cancellation_defect);
        max_trace_rel = max_trace_rel.max(trace_rel);
        max_residual_rel = max_residual_rel.max(res.linf / res.scale.max(1e-300));
        max_osc_rel = max_osc_rel.max(osc.residual_linf / osc.scale.max(1e-300));
        max_osc_mean_rel = max_osc_mean_rel.max(osc.mean_defect / osc.scale.max(1e-300));
        max_split_defect = max_split_defect.max(split);

        let wp_l2 = lp_norm_vec(&slice.wp, 2.0);
        let wc_l2 = lp_norm_vec(&slice.wc, 2.0);
        let wt_l2 = lp_norm_vec(&slice.wt, 2.0);
        if wp_l2 > 0.0 {
            wc_over_wp = wc_over_wp.max(wc_l2 / wp_l2);
        }

        let r1_l1 = lp_norm_sym(&breakdown.total, 1.0);
        let r1_lp = lp_norm_sym(&breakdown.total, config.p_report);
        let r1_linf = crate::norms::linf_norm_sym(&breakdown.total);
        r1_l1_sup = r1_l1_sup.max(r1_l1);
        r1_lp_sup = r1_lp_sup.max(r1_lp);
        r1_linf_sup = r1_linf_sup.max(r1_linf);

        stress_rows.push(StressRow {
            t: t_c,
            l1_linear: lp_norm_sym(&breakdown.linear, 1.0),
            l1_corrector: lp_norm_sym(&breakdown.corrector, 1.0),
            l1_oscillation: lp_norm_sym(&breakdown.oscillation, 1.0),
            l1_temperature: lp_norm_sym(&breakdown.temperature, 1.0),
            l1_total: r1_l1,
            lp_total: r1_lp,
            linf_total: r1_linf,
            residual_linf: res.linf,
            residual_scale: res.scale,
            cancellation_defect: osc.residual_linf,
            cancellation_scale: osc.scale,
        });

        let e_t = state0.e.at(t_c);
        let target = e_t * (1.0 - state0.delta / 2.0);
        let terms = energy_terms(v0_c, &slice, &wavesets);
        let measured_energy = v1_energy(v0_c, &slice);
        let gap = measured_energy - target;
        let decomposition_gap = (gap - terms.total()).abs();
        max_decomposition_gap_rel =
            max_decomposition_gap_rel.max(decomposition_gap / measured_energy.abs().max(1e-300));
        e_err_rel_sup = e_err_rel_sup.max(terms.total().abs() / e_t);
        term3_abs_sup = term3_abs_sup.max(terms.lattice_defect.abs());
        energy_rows.push(EnergyRow {
            t: t_c,
            e: e_t,
            target,
            v1_energy: measured_energy,
            base_exchange: terms.base_exchange,
            corrector: terms.corrector,
            lattice_defect: terms.lattice_defect,
            carrier_defect: terms.carrier_defect,
            higher_shells: terms.higher_shells,
            e_err: terms.total(),
            decomposition_gap,
            window_lo: e_t * (1.0 - 5.0 * state0.delta / 8.0),
            window_hi: e_t * (1.0 - 3.0 * state0.delta / 8.0),
        });

        sample_rows.push(SampleRow {
            t: t_c,
            rho0: amp.rho0,
            div_w1,
            div_v1,
            wp_l2,
            wc_l2,
            wt_l2,
            w1_l2: lp_norm_vec(&slice.w1, 2.0),
            w1_l1: lp_norm_vec(&slice.w1, 1.0),
            partition_defect: amp.partition_defect,
            cancellation_defect: amp.cancellation_defect,
            stress_trace: trace,
            theta_l2_sq,
            theta_grad_sq,
            osc_mean_defect: osc.mean_defect,
        });

        if opts.probes.contains(&c) {
            probe_pending.insert(
                c,
                ProbePending {
                    t: t_c,
                    r1: breakdown.total.clone(),
                    p1: p1_c.clone(),
                    theta1: theta1_c.clone(),
                },
            );
        }

        if opts.keep_state {
            out_v.push(v1_c.clone());
            out_p.push(p1_c);
            out_theta.push(theta1_c.clone());
            out_stress.push(breakdown.total.clone());
        }

        v1_ring.push((c, v1_c));
        if v1_ring.len() > 5 {
            v1_ring.remove(0);
        }
        // FD residual once the ring covers probe +/- 2
        let ready: Vec<usize> = probe_pending
            .keys()
            .copied()
            .filter(|&p| p + 2 == c)
            .collect();
        for p in ready {
            let pend = probe_pending.remove(&p).unwrap();
            let row = fd_probe_residual(p, &pend, &v1_ring, h, state0.alpha)?;
            probe_rows.push(row);
        }

        // march theta across [t_c, t_{c+1}] under the interpolated v1
        if c + 1 < m_total {
            if let Some(solver) = theta_solver.as_mut() {
                let w1_next = &slice_next.as_ref().unwrap().w1;
                let v1_next = state0.v[c + 1].add(w1_next);
                let t_next = times.t(c + 1);
                let v_here = v1_ring.last().unwrap().1.clone();
                // a lerp's speed never exceeds the endpoint speeds, so this
                // cap keeps every substep inside the advection limit
                let vmax = v_here.max_speed().max(v1_next.max_speed()).max(1e-300);
                let dt_cap = h.min(0.45 * grid.spacing() / vmax);
                let vel_fn = move |t: f64| -> VectorField {
                    let w = ((t - t_c) / (t_next - t_c)).clamp(0.0, 1.0);
                    lerp_vec(&v_here, &v1_next, w)
                };
                let vel = Velocity::Analytic(&vel_fn);
                at_stage("advance_theta", solver.advance_to(&vel, t_next, dt_cap))?;
            }
        }
    }

    // final-sample theta stats were taken inside the loop at c = M-1
    let (drift, substeps) = match &theta_solver {
        Some(s) => (
            energy_drift_parts(theta_initial_l2_sq, s.l2_sq(), &s.grad_sq_series),
            s.grad_sq_series.len() - 1,
        ),
        None => (0.0, 0),
    };
    if let Some(s) = &theta_solver {
        theta_final_l2_sq = s.l2_sq();
    }

    checks.push(CheckRow {
        name: "div w1 = 0".into(),
        measured: max_div_w1,
        threshold: 1e-10 * sample_rows.iter().map(|r| r.w1_l2).fold(1.0, f64::max),
        required: true,
        pass: max_div_w1
            <= 1e-10 * sample_rows.iter().map(|r| r.w1_l2).fold(1.0, f64::max),
    });
    checks.push(CheckRow {
        name: "div v1 = 0".into(),
        measured: max_div_v1,
        threshold: 1e-8,
        required: true,
        pass: max_div_v1 <= 1e-8,
    });
    checks.push(CheckRow {
        name: "cutoff partition sums to 1".into(),
        measured: max_partition,
        threshold: 1e-10,
        required: true,
        pass: max_partition <= 1e-10,
    });
    checks.push(CheckRow {
        name: "amplitude cancellation R0 + sum a^2 xi xi = iso Id".into(),
        measured: max_cancellation,
        threshold: 1e-9,
        required: true,
        pass: max_cancellation <= 1e-9,
    });
    checks.push(CheckRow {
        name: "new stress trace-free (relative)".into(),
        measured: max_trace_rel,
        threshold: 1e-12,
        required: true,
        pass: max_trace_rel <= 1e-12,
    });
    checks.push(CheckRow {
        name: "w1 = wp + wc + wt split".into(),
        measured: max_split_defect,
        threshold: 1e-11,
        required: true,
        pass: max_split_defect <= 1e-11,
    });
    checks.push(CheckRow {
        name: "momentum identity residual (relative sup)".into(),
        measured: max_residual_rel,
        threshold: 1e-3,
        required: true,
        pass: max_residual_rel <= 1e-3,
    });
    checks.push(CheckRow {
        name: "oscillation grouped = direct (relative sup)".into(),
        measured: max_osc_rel,
        threshold: 1e-3,
        required: true,
        pass: max_osc_rel <= 1e-3,
    });
    checks.push(CheckRow {
        name: "oscillation mean-free (relative)".into(),
        measured: max_osc_mean_rel,
        threshold: 1e-10,
        required: true,
        pass: max_osc_mean_rel <= 1e-10,
    });
    checks.push(CheckRow {
        name: "energy decomposition closes (relative)".into(),
        measured: max_decomposition_gap_rel,
        threshold: 1e-9,
        required: true,
        pass: max_decomposition_gap_rel <= 1e-9,
    });
    let theta_growth = if theta_initial_linf > 0.0 {
        theta_sup_linf / theta_initial_linf - 1.0
    } else {
        0.0
    };
    checks.push(CheckRow {
        name: "theta sup bounded by initial data".into(),
        measured: theta_growth,
        threshold: 1e-6,
        required: true,
        pass: theta_growth <= 1e-6,
    });
    // second-order scheme and second-order quadrature of the dissipation
    // integral: the drift budget is the square of the mean substep size
    let drift_budget = if substeps == 0 {
        1e-12
    } else {
        let span = times.t(m_total - 1) - times.t(0);
        (span / substeps as f64).powi(2).max(1e-12)
    };
    checks.push(CheckRow {
        name: "theta energy balance drift".into(),
        measured: drift,
        threshold: drift_budget,
        required: true,
        pass: drift <= drift_budget,
    });
    let e_err_budget = state0.delta / 8.0;
    checks.push(CheckRow {
        name: "|E_err| <= delta e / 8 (needs asymptotic lambda)".into(),
        measured: e_err_rel_sup,
        threshold: e_err_budget,
        required: false,
        pass: e_err_rel_sup <= e_err_budget,
    });

    let report = StepReport {
        params: StepParams {
            lambda: params.lambda,
            s: params.s,
            r: params.r,
            mu: params.mu,
            sigma: params.sigma(),
            ng: grid.ng(),
            m_time: m_total,
            alpha: state0.alpha,
            delta: state0.delta,
            eps0,
            j_max: j_max_seen,
            base_family: match opts.base_family {
                Family::Zero => 0,
                Family::One => 1,
            },
            spacing_violation: params.spacing_violation(),
        },
        checks,
        stress_rows,
        energy_rows,
        sample_rows,
        probe_rows,
        theta: ThetaSummary {
            initial_linf: theta_initial_linf,
            sup_linf: theta_sup_linf,
            initial_l2_sq: theta_initial_l2_sq,
            final_l2_sq: theta_final_l2_sq,
            energy_drift: drift,
            substeps,
        },
        input_window: health.window,
        r1_l1_sup,
        r1_lp_sup,
        r1_linf_sup,
        wc_over_wp_l2: wc_over_wp,
        e_err_rel_sup,
        term3_abs_sup,
    };

    let state1 = if opts.keep_state {
        Some(IterationState {
            grid,
            times,
            v: out_v,
            p: out_p,
            theta: out_theta,
            stress: out_stress,
            delta: state0.delta / 2.0,
            alpha: state0.alpha,
            e: state0.e,
        })
    } else {
        None
    };
    Ok((state1, report))
}

/// The equation residual at one probe sample, with dt v1 from the centered
/// 4th-order stencil over the five ring slices. The relative size uses the
/// largest single term as the scale.
fn fd_probe_residual(
    p: usize,
    pend: &ProbePending,
    ring: &[(usize, VectorField)],
    h: f64,
    alpha: f64,
) -> Result<ProbeRow> {
    let grid = pend.r1.grid();
    let find = |m: usize| -> Result<&VectorField> {
        ring.iter()
            .find(|&&(i, _)| i == m)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::Numeric(format!("probe ring missing sample {m}")))
    };
    let mut dt_v1 = VectorField::zeros(grid);
    for (k, wgt) in FD4[2].iter().enumerate() {
        if *wgt != 0.0 {
            dt_v1.axpy(wgt / (12.0 * h), find(p - 2 + k)?);
        }
    }
    let v1 = find(p)?;
    let terms: [VectorField; 6] = [
        dt_v1,
        tensor_divergence(&TensorField::outer(v1, v1)),
        gradient(&pend.p1),
        frac_laplacian_vec(v1, alpha),
        {
            let mut buoy = VectorField::zeros(grid);
            buoy.y.axpy(-1.0, &pend.theta1);
            buoy
        },
        {
            let mut d = sym_tensor_divergence(&pend.r1);
            d.scale(-1.0);
            d
        },
    ];
    let mut resid = VectorField::zeros(grid);
    let mut scale = 0.0_f64;
    for t in &terms {
        resid.axpy(1.0, t);
        scale = scale.max(lp_norm_vec(t, 2.0));
    }
    let abs_l2 = lp_norm_vec(&resid, 2.0);
    Ok(ProbeRow {
        index: p,
        t: pend.t,
        rel_l2: abs_l2 / scale.max(1e-300),
        abs_l2,
        scale,
    })
}
