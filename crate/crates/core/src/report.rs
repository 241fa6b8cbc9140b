//! CSV and JSON emission for a step report. Output is deterministic down to
//! the byte: fixed row order, fixed headers, and every float printed with
//! the full 17 significant digits so a rerun of the same configuration
//! reproduces the files exactly.

use crate::error::Result;
use crate::iterate::StepReport;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

fn push_row(out: &mut String, cells: &[f64]) {
    for (i, c) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt(*c));
    }
    out.push('\n');
}

fn diagnostics_csv(report: &StepReport) -> String {
    let mut s = String::from(
        "t,rho0,div_w1,div_v1,wp_l2,wc_l2,wt_l2,w1_l2,w1_l1,\
         partition_defect,cancellation_defect,stress_trace,\
         theta_l2_sq,theta_grad_sq,osc_mean_defect\n",
    );
    for r in &report.sample_rows {
        push_row(
            &mut s,
            &[
                r.t,
                r.rho0,
                r.div_w1,
                r.div_v1,
                r.wp_l2,
                r.wc_l2,
                r.wt_l2,
                r.w1_l2,
                r.w1_l1,
                r.partition_defect,
                r.cancellation_defect,
                r.stress_trace,
                r.theta_l2_sq,
                r.theta_grad_sq,
                r.osc_mean_defect,
            ],
        );
    }
    s
}

fn stress_csv(report: &StepReport) -> String {
    let mut s = String::from(
        "t,l1_linear,l1_corrector,l1_oscillation,l1_temperature,l1_total,\
         lp_total,linf_total,residual_linf,residual_scale,\
         cancellation_defect,cancellation_scale\n",
    );
    for r in &report.stress_rows {
        push_row(
            &mut s,
            &[
                r.t,
                r.l1_linear,
                r.l1_corrector,
                r.l1_oscillation,
                r.l1_temperature,
                r.l1_total,
                r.lp_total,
                r.linf_total,
                r.residual_linf,
                r.residual_scale,
                r.cancellation_defect,
                r.cancellation_scale,
            ],
        );
    }
    s
}

fn energy_csv(report: &StepReport) -> String {
    let mut s = String::from(
        "t,e,target,v1_energy,base_exchange,corrector,lattice_defect,\
         carrier_defect,higher_shells,e_err,decomposition_gap,\
         window_lo,window_hi\n",
    );
    for r in &report.energy_rows {
        push_row(
            &mut s,
            &[
                r.t,
                r.e,
                r.target,
                r.v1_energy,
                r.base_exchange,
                r.corrector,
                r.lattice_defect,
                r.carrier_defect,
                r.higher_shells,
                r.e_err,
                r.decomposition_gap,
                r.window_lo,
                r.window_hi,
            ],
        );
    }
    s
}

fn probes_csv(report: &StepReport) -> String {
    let mut s = String::from("index,t,rel_l2,abs_l2,scale\n");
    for r in &report.probe_rows {
        let _ = write!(s, "{},", r.index);
        push_row(&mut s, &[r.t, r.rel_l2, r.abs_l2, r.scale]);
    }
    s
}

/// The JSON summary carries the scalar side of the report: parameters,
/// every named check, the temperature summary, and the sup norms. The
/// per-sample series live in the CSVs.
#[derive(Serialize)]
struct Summary<'a> {
    params: &'a crate::iterate::StepParams,
    all_required_pass: bool,
    checks: &'a [crate::iterate::CheckRow],
    theta: &'a crate::iterate::ThetaSummary,
    probes: &'a [crate::iterate::ProbeRow],
    r1_l1_sup: f64,
    r1_lp_sup: f64,
    r1_linf_sup: f64,
    wc_over_wp_l2: f64,
    e_err_rel_sup: f64,
    term3_abs_sup: f64,
}

pub fn summary_json(report: &StepReport) -> String {
    let all = report
        .checks
        .iter()
        .all(|c| !c.required || c.pass);
    let s = Summary {
        params: &report.params,
        all_required_pass: all,
        checks: &report.checks,
        theta: &report.theta,
        probes: &report.probe_rows,
        r1_l1_sup: report.r1_l1_sup,
        r1_lp_sup: report.r1_lp_sup,
        r1_linf_sup: report.r1_linf_sup,
        wc_over_wp_l2: report.wc_over_wp_l2,
        e_err_rel_sup: report.e_err_rel_sup,
        term3_abs_sup: report.term3_abs_sup,
    };
    let mut out = serde_json::to_string_pretty(&s).expect("report serialization");
    out.push('\n');
    out
}

/// Write the four report files into `dir`, creating it if needed.
/// Returns the paths written, in a fixed order.
pub fn emit_outputs(report: &StepReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let files: [(&str, String); 5] = [
        ("diagnostics.csv", diagnostics_csv(report)),
        ("stress_breakdown.csv", stress_csv(report)),
        ("energy.csv", energy_csv(report)),
        ("probes.csv", probes_csv(report)),
        ("summary.json", summary_json(report)),
    ];
    for (name, content) in files {
        let path = dir.join(name);
        fs::write(&path, content)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::geometry::Family;
    use crate::grid::Grid2D;
    use crate::iterate::{run_iteration, StepOptions};
    use crate::state::{EnergyProfile, IterationState};
    use crate::timegrid::TimeGrid;

    #[test]
    fn reruns_are_byte_identical() {
        let mut cfg = RunConfig::default();
        cfg.ng = 200;
        cfg.ng_auto = false;
        cfg.m_time = 6;
        cfg.r1 = Some(2);
        cfg.s1 = Some(2);
        cfg.mu1 = Some(6.0);
        let grid = Grid2D::new(200).unwrap();
        let times = TimeGrid::new(6).unwrap();
        let opts = StepOptions {
            keep_state: false,
            probes: vec![2],
            base_family: Family::Zero,
        };
        let run = || {
            let state0 = IterationState::zero(
                grid,
                times,
                1.0,
                0.5,
                EnergyProfile::Constant { base: 2.0 },
            );
            let (_, report) = run_iteration(&state0, &cfg, 20, &opts).unwrap();
            (
                diagnostics_csv(&report),
                stress_csv(&report),
                energy_csv(&report),
                probes_csv(&report),
                summary_json(&report),
            )
        };
        let a = run();
        let b = run();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.2, b.2);
        assert_eq!(a.3, b.3);
        assert_eq!(a.4, b.4);
        // spot the formatting contract: full-precision scientific floats
        assert!(a.0.lines().nth(1).unwrap().contains('e'));
    }

    #[test]
    fn emit_writes_all_four_files() {
        let mut cfg = RunConfig::default();
        cfg.ng = 200;
        cfg.ng_auto = false;
        cfg.m_time = 5;
        cfg.r1 = Some(2);
        cfg.s1 = Some(2);
        cfg.mu1 = Some(6.0);
        let grid = Grid2D::new(200).unwrap();
        let times = TimeGrid::new(5).unwrap();
        let state0 = IterationState::zero(
            grid,
            times,
            1.0,
            0.5,
            EnergyProfile::Constant { base: 2.0 },
        );
        let opts = StepOptions {
            keep_state: false,
            probes: vec![2],
            base_family: Family::Zero,
        };
        let (_, report) = run_iteration(&state0, &cfg, 20, &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let written = emit_outputs(&report, dir.path()).unwrap();
        assert_eq!(written.len(), 5);
        for p in &written {
            assert!(p.exists());
            assert!(fs::metadata(p).unwrap().len() > 0);
        }
    }
}
