//! Run configuration: a small key = value format with strict validation.
//! Unknown keys are rejected so that a typo cannot silently fall back to a
//! default mid-experiment.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid2D;
use crate::state::EnergyProfile;
use crate::waves::{choose_params, Mode, WaveParams};
use std::path::Path;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub alpha: f64,
    pub lambda1: u64,
    /// 0 means "auto": smallest power of two >= 12 lambda1.
    pub ng: usize,
    pub ng_auto: bool,
    pub m_time: usize,
    pub delta: f64,
    pub mode: Mode,
    pub e_kind: EKind,
    pub e_base: f64,
    pub e_amp: f64,
    pub e_phase: f64,
    /// theta^0 as a short list of modes: kx,ky,cos-amp,sin-amp per entry.
    pub theta0_modes: Vec<(i64, i64, f64, f64)>,
    pub eps0_override: Option<f64>,
    pub out_dir: String,
    pub snapshots: Vec<f64>,
    pub p_report: f64,
    /// Demo-mode decoupling knobs: pin r, s, mu instead of deriving them
    /// from lambda.
    pub r1: Option<u32>,
    pub s1: Option<u64>,
    pub mu1: Option<f64>,
    pub steps: usize,
    pub lambda_schedule: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EKind {
    Constant,
    Sinusoid,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 0.5,
            lambda1: 20,
            ng: 0,
            ng_auto: true,
            m_time: 256,
            delta: 1.0,
            mode: Mode::Demo,
            e_kind: EKind::Constant,
            e_base: 2.0,
            e_amp: 0.0,
            e_phase: 0.0,
            theta0_modes: vec![(1, 0, 0.0, 1.0), (0, 1, 0.5, 0.0)],
            eps0_override: None,
            out_dir: "out".into(),
            snapshots: Vec::new(),
            p_report: 1.2,
            r1: None,
            s1: None,
            mu1: None,
            steps: 1,
            lambda_schedule: Vec::new(),
        }
    }
}

fn bad(line: usize, message: String) -> Error {
    Error::Config {
        line: Some(line),
        message,
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| bad(line, format!("{key}: cannot parse {v:?}")))
}

impl RunConfig {
    pub fn parse_str(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut ng_seen = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
                continue;
            }
            let (key, value) = s
                .split_once('=')
                .ok_or_else(|| bad(line, format!("expected key = value, got {s:?}")))?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "alpha" => cfg.alpha = parse_num(line, key, v)?,
                "lambda1" => cfg.lambda1 = parse_num(line, key, v)?,
                "Ng" => {
                    cfg.ng = parse_num(line, key, v)?;
                    ng_seen = true;
                }
                "M_time" => cfg.m_time = parse_num(line, key, v)?,
                "delta" => cfg.delta = parse_num(line, key, v)?,
                "mode" => {
                    cfg.mode = match v {
                        "demo" => Mode::Demo,
                        "strict" => Mode::Strict,
                        _ => return Err(bad(line, format!("mode must be demo or strict, got {v:?}"))),
                    }
                }
                "e_kind" => {
                    cfg.e_kind = match v {
                        "constant" => EKind::Constant,
                        "sinusoid" => EKind::Sinusoid,
                        _ => {
                            return Err(bad(
                                line,
                                format!("e_kind must be constant or sinusoid, got {v:?}"),
                            ))
                        }
                    }
                }
                "e_base" => cfg.e_base = parse_num(line, key, v)?,
                "e_amp" => cfg.e_amp = parse_num(line, key, v)?,
                "e_phase" => cfg.e_phase = parse_num(line, key, v)?,
                "theta0_modes" => {
                    cfg.theta0_modes = parse_modes(line, v)?;
                }
                "eps0_override" => cfg.eps0_override = Some(parse_num(line, key, v)?),
                "out_dir" => cfg.out_dir = v.to_string(),
                "snapshots" => {
                    cfg.snapshots = v
                        .split(',')
                        .filter(|p| !p.trim().is_empty())
                        .map(|p| parse_num(line, key, p))
                        .collect::<Result<Vec<f64>>>()?;
                }
                "p_report" => cfg.p_report = parse_num(line, key, v)?,
                "r1" => cfg.r1 = Some(parse_num(line, key, v)?),
                "s1" => cfg.s1 = Some(parse_num(line, key, v)?),
                "mu1" => cfg.mu1 = Some(parse_num(line, key, v)?),
                "steps" => cfg.steps = parse_num(line, key, v)?,
                "lambda_schedule" => {
                    cfg.lambda_schedule = v
                        .split(',')
                        .filter(|p| !p.trim().is_empty())
                        .map(|p| parse_num(line, key, p))
                        .collect::<Result<Vec<u64>>>()?;
                }
                _ => return Err(bad(line, format!("unknown key {key:?}"))),
            }
        }
        if ng_seen {
            cfg.ng_auto = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::parse_str(&text)
    }

    fn validate(&self) -> Result<()> {
        if !(0.5..1.0).contains(&self.alpha) {
            return Err(Error::Validation {
                what: "alpha",
                message: format!("alpha must lie in [0.5, 1), got {}", self.alpha),
            });
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Validation {
                what: "delta",
                message: format!("delta must lie in (0, 1], got {}", self.delta),
            });
        }
        if self.m_time < 5 {
            return Err(Error::Validation {
                what: "M_time",
                message: format!("need at least 5 time samples, got {}", self.m_time),
            });
        }
        if !(1.0 < self.p_report && self.p_report < 2.0) {
            return Err(Error::Validation {
                what: "p_report",
                message: format!("p_report must lie in (1, 2), got {}", self.p_report),
            });
        }
        if let Some(e) = self.eps0_override {
            if !(e > 0.0 && e < 0.3814) {
                return Err(Error::Validation {
                    what: "eps0_override",
                    message: format!("eps0 must lie in (0, 0.3814), got {e}"),
                });
            }
        }
        if self.steps == 0 {
            return Err(Error::Validation {
                what: "steps",
                message: "steps must be >= 1".into(),
            });
        }
        for &t in &self.snapshots {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Validation {
                    what: "snapshots",
                    message: format!("snapshot time {t} outside [0,1]"),
                });
            }
        }
        self.energy_profile().validate()
    }

    /// Grid size: explicit, or the 12 lambda rule of thumb rounded up to a
    /// power of two. Assembly still re-checks the exact product bandwidth.
    pub fn grid_size(&self) -> usize {
        if !self.ng_auto {
            return self.ng;
        }
        let mut n = 4usize;
        while n < 12 * self.lambda1 as usize {
            n *= 2;
        }
        n
    }

    pub fn energy_profile(&self) -> EnergyProfile {
        match self.e_kind {
            EKind::Constant => EnergyProfile::Constant { base: self.e_base },
            EKind::Sinusoid => EnergyProfile::Sinusoid {
                base: self.e_base,
                amp: self.e_amp,
                phase: self.e_phase,
            },
        }
    }

    /// Wave parameters for the step at `lambda`, honouring the demo
    /// decoupling overrides.
    pub fn wave_params(&self, lambda: u64) -> Result<WaveParams> {
        let derived = choose_params(self.alpha, lambda, self.mode)?;
        if self.r1.is_none() && self.s1.is_none() && self.mu1.is_none() {
            return Ok(derived);
        }
        if self.mode == Mode::Strict {
            return Err(Error::Validation {
                what: "overrides",
                message: "r1/s1/mu1 overrides are demo-mode only".into(),
            });
        }
        WaveParams::new(
            lambda,
            self.s1.unwrap_or(derived.s),
            self.r1.unwrap_or(derived.r),
            self.mu1.unwrap_or(derived.mu),
            derived.n_geom,
        )
    }

    /// The lambda used by chain step k (0-based).
    pub fn lambda_for_step(&self, k: usize) -> u64 {
        if let Some(&l) = self.lambda_schedule.get(k) {
            return l;
        }
        // default schedule: double each step
        self.lambda1 << k as u32
    }

    /// theta^0 from the configured mode list; mean-zero by construction.
    pub fn theta0(&self, grid: Grid2D) -> Result<ScalarField> {
        let mut f = ScalarField::zeros(grid);
        for &(kx, ky, ac, as_) in &self.theta0_modes {
            if kx == 0 && ky == 0 {
                return Err(Error::Validation {
                    what: "theta0_modes",
                    message: "the (0,0) mode would break the zero-mean requirement".into(),
                });
            }
            let lim = grid.max_resolved();
            if kx.abs() > lim || ky.abs() > lim {
                return Err(Error::Resolution {
                    what: format!("theta0 mode ({kx},{ky})"),
                    required: 2 * (kx.abs().max(ky.abs()) as usize) + 2,
                    ng: grid.ng(),
                });
            }
            let (c, s) = crate::waves::harmonic_pair(grid, (kx, ky));
            f.axpy(ac, &c);
            f.axpy(as_, &s);
        }
        Ok(f)
    }
}

fn parse_modes(line: usize, v: &str) -> Result<Vec<(i64, i64, f64, f64)>> {
    let mut out = Vec::new();
    for part in v.split(';') {
        let p = part.trim();
        if p.is_empty() {
            continue;
        }
        let nums: Vec<&str> = p.split(',').map(|x| x.trim()).collect();
        if nums.len() != 4 {
            return Err(bad(
                line,
                format!("theta0_modes entry {p:?} needs kx,ky,cos-amp,sin-amp"),
            ));
        }
        if nums[0] == "0" && nums[1] == "0" {
            return Err(bad(
                line,
                "theta0_modes: the (0,0) mode would break the zero-mean requirement".into(),
            ));
        }
        out.push((
            parse_num(line, "theta0_modes kx", nums[0])?,
            parse_num(line, "theta0_modes ky", nums[1])?,
            parse_num(line, "theta0_modes cos-amp", nums[2])?,
            parse_num(line, "theta0_modes sin-amp", nums[3])?,
        ));
    }
    if out.is_empty() {
        return Err(bad(line, "theta0_modes must list at least one mode".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_and_defaults() {
        let cfg = RunConfig::parse_str(
            "alpha = 0.5\nlambda1 = 80\nNg = 512\ndelta = 1.0\nmode = demo\n",
        )
        .unwrap();
        assert_eq!(cfg.lambda1, 80);
        assert_eq!(cfg.grid_size(), 512);
        assert!(!cfg.ng_auto);
        assert_eq!(cfg.m_time, 256);
        // auto grid: smallest power of two >= 12 * 20 = 240
        let auto = RunConfig::parse_str("lambda1 = 20\n").unwrap();
        assert_eq!(auto.grid_size(), 256);
        assert!(auto.ng_auto);
    }

    #[test]
    fn rejections() {
        let e = RunConfig::parse_str("alpha = 1.2\n").unwrap_err();
        assert!(format!("{e}").contains("alpha"));
        let e = RunConfig::parse_str("bogus_key = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: Some(1), .. }));
        let e = RunConfig::parse_str("# fine\nM_time = banana\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: Some(2), .. }));
        assert!(RunConfig::parse_str("theta0_modes = 0,0,1,0\n").is_err());
    }

    #[test]
    fn overrides_and_schedule() {
        let cfg =
            RunConfig::parse_str("lambda1 = 20\nr1 = 2\nlambda_schedule = 20,40,80\n").unwrap();
        let wp = cfg.wave_params(20).unwrap();
        assert_eq!(wp.r, 2);
        // s, mu keep their derived values
        assert_eq!(wp.s, 2);
        assert_eq!(wp.mu, 6.0);
        assert_eq!(cfg.lambda_for_step(2), 80);
        let plain = RunConfig::parse_str("lambda1 = 20\n").unwrap();
        assert_eq!(plain.lambda_for_step(1), 40);
    }

    #[test]
    fn theta0_build() {
        let cfg = RunConfig::parse_str("theta0_modes = 1,0,0,1; 0,2,0.5,0\n").unwrap();
        let grid = Grid2D::new(32).unwrap();
        let f = cfg.theta0(grid).unwrap();
        let want = ScalarField::from_fn(grid, |x, y| x.sin() + 0.5 * (2.0 * y).cos());
        let diff = f
            .data()
            .iter()
            .zip(want.data())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-12);
        assert!(f.mean().abs() < 1e-15);
    }
}
