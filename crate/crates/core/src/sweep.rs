//! Frequency sweeps: run one step per lambda on its own grid and fit the
//! scaling of the new stress, the corrector, and the energy error against
//! lambda. The interesting numbers are slopes in log-log, so every row
//! records the raw sups and the fits are appended once at the end.

use crate::config::RunConfig;
use crate::error::Result;
use crate::field::SymTensorField;
use crate::fit::loglog_slope;
use crate::geometry::Family;
use crate::grid::{next_fast_size, Grid2D};
use crate::iterate::{run_iteration, StepOptions};
use crate::perturbation::required_grid_size;
use crate::state::IterationState;
use crate::timegrid::TimeGrid;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub struct SweepSpec<'a> {
    pub lambdas: &'a [u64],
    /// Slow samples per step; sweeps care about scaling, not time coverage,
    /// so this stays small.
    pub m_time: usize,
    /// Optional input stress, constant in slow time. None runs from zero.
    pub stress_seed: Option<&'a dyn Fn(Grid2D) -> SymTensorField>,
    /// Per-lambda config adjustment (demo overrides that must track lambda).
    pub tweak: Option<&'a dyn Fn(u64, &mut RunConfig)>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepRow {
    pub lambda: u64,
    pub ng: usize,
    pub s: u64,
    pub r: u32,
    pub mu: f64,
    pub sigma: f64,
    pub r1_l1_sup: f64,
    pub r1_lp_sup: f64,
    pub r1_linf_sup: f64,
    pub wc_over_wp_l2: f64,
    pub e_err_rel_sup: f64,
    pub term3_abs_sup: f64,
    pub momentum_rel: f64,
    pub all_required_pass: bool,
}

/// d log y / d log lambda for each tracked quantity.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepSlopes {
    pub r1_l1: f64,
    pub r1_lp: f64,
    pub wc_over_wp: f64,
    pub e_err_rel: f64,
    pub term3_abs: f64,
}

#[derive(Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub slopes: SweepSlopes,
}

pub fn run_sweep(base: &RunConfig, spec: &SweepSpec) -> Result<SweepReport> {
    let mut rows = Vec::with_capacity(spec.lambdas.len());
    for &lambda in spec.lambdas {
        let mut cfg = base.clone();
        cfg.m_time = spec.m_time;
        if let Some(tw) = &spec.tweak {
            tw(lambda, &mut cfg);
        }
        let params = cfg.wave_params(lambda)?;
        let ng = next_fast_size(required_grid_size(&params));
        let grid = Grid2D::new(ng)?;
        let times = TimeGrid::new(cfg.m_time)?;
        let mut state0 = IterationState::zero(
            grid,
            times,
            cfg.delta,
            cfg.alpha,
            cfg.energy_profile(),
        );
        if let Some(seed) = &spec.stress_seed {
            let r0 = seed(grid);
            for s in state0.stress.iter_mut() {
                *s = r0.clone();
            }
        }
        let opts = StepOptions {
            keep_state: false,
            probes: Vec::new(),
            base_family: Family::Zero,
        };
        let (_, report) = run_iteration(&state0, &cfg, lambda, &opts)?;
        let momentum_rel = report
            .checks
            .iter()
            .find(|c| c.name.starts_with("momentum identity"))
            .map_or(f64::NAN, |c| c.measured);
        let all = report.checks.iter().all(|c| !c.required || c.pass);
        rows.push(SweepRow {
            lambda,
            ng,
            s: params.s,
            r: params.r,
            mu: params.mu,
            sigma: params.sigma(),
            r1_l1_sup: report.r1_l1_sup,
            r1_lp_sup: report.r1_lp_sup,
            r1_linf_sup: report.r1_linf_sup,
            wc_over_wp_l2: report.wc_over_wp_l2,
            e_err_rel_sup: report.e_err_rel_sup,
            term3_abs_sup: report.term3_abs_sup,
            momentum_rel,
            all_required_pass: all,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.lambda as f64).collect();
    let pick = |f: fn(&SweepRow) -> f64| -> f64 {
        let ys: Vec<f64> = rows.iter().map(f).collect();
        if ys.iter().any(|&y| y <= 0.0 || !y.is_finite()) {
            f64::NAN
        } else {
            loglog_slope(&xs, &ys)
        }
    };
    let slopes = SweepSlopes {
        r1_l1: pick(|r| r.r1_l1_sup),
        r1_lp: pick(|r| r.r1_lp_sup),
        wc_over_wp: pick(|r| r.wc_over_wp_l2),
        e_err_rel: pick(|r| r.e_err_rel_sup),
        term3_abs: pick(|r| r.term3_abs_sup),
    };
    Ok(SweepReport { rows, slopes })
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut s = String::from(
        "lambda,ng,s,r,mu,sigma,r1_l1_sup,r1_lp_sup,r1_linf_sup,\
         wc_over_wp_l2,e_err_rel_sup,term3_abs_sup,momentum_rel,all_required_pass\n",
    );
    for r in &report.rows {
        let _ = write!(s, "{},{},{},{},", r.lambda, r.ng, r.s, r.r);
        let _ = write!(
            s,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}\n",
            r.mu,
            r.sigma,
            r.r1_l1_sup,
            r.r1_lp_sup,
            r.r1_linf_sup,
            r.wc_over_wp_l2,
            r.e_err_rel_sup,
            r.term3_abs_sup,
            r.momentum_rel,
            r.all_required_pass,
        );
    }
    s
}

pub fn emit_sweep(report: &SweepReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv = dir.join("sweep.csv");
    fs::write(&csv, sweep_csv(report))?;
    let json = dir.join("sweep.json");
    let mut text = serde_json::to_string_pretty(report).expect("sweep serialization");
    text.push('\n');
    fs::write(&json, text)?;
    Ok(vec![csv, json])
}
