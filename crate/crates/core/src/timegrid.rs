//! Uniform time sampling of [0,1], fourth-order differentiation of sampled
//! series, and a cubic-panel cumulative integral.

/// m uniformly spaced samples t_i = i/(m-1) covering [0,1].
#[derive(Clone, Copy, Debug)]
pub struct TimeGrid {
    m: usize,
}

impl TimeGrid {
    pub fn new(m: usize) -> crate::Result<Self> {
        if m < 5 {
            return Err(crate::Error::Validation {
                what: "time grid",
                message: format!("need at least 5 samples for the stencils, got {m}"),
            });
        }
        Ok(TimeGrid { m })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        1.0 / (self.m - 1) as f64
    }

    #[inline]
    pub fn t(&self, i: usize) -> f64 {
        i as f64 / (self.m - 1) as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |i| self.t(i))
    }
}

const FD4_ROWS: [[f64; 5]; 5] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
    [-1.0, 6.0, -18.0, 10.0, 3.0],
    [3.0, -16.0, 36.0, -48.0, 25.0],
];

/// Window base and weights for d/dt at sample j of an m-sample series:
/// f'(t_j) = sum_r w_r f(t_{base+r}) / (12 h). One-sided near the ends,
/// centered inside; all rows are exact on quartics.
pub fn fd4_window(j: usize, m: usize) -> (usize, [f64; 5]) {
    assert!(m >= 5 && j < m);
    if j <= 1 {
        (0, FD4_ROWS[j])
    } else if j >= m - 2 {
        (m - 5, FD4_ROWS[j + 5 - m])
    } else {
        (j - 2, FD4_ROWS[2])
    }
}

pub fn fd4_series(samples: &[f64], h: f64) -> Vec<f64> {
    let m = samples.len();
    (0..m)
        .map(|j| {
            let (base, w) = fd4_window(j, m);
            let s: f64 = w
                .iter()
                .enumerate()
                .map(|(r, wr)| wr * samples[base + r])
                .sum();
            s / (12.0 * h)
        })
        .collect()
}

/// Cumulative integral at every sample, spacing h. Each panel uses the cubic
/// through its four nearest samples, so the result is exact on cubics and
/// fourth order in general. Needs at least 4 samples.
pub fn cumulative_integral(samples: &[f64], h: f64) -> Vec<f64> {
    let m = samples.len();
    assert!(m >= 4);
    let mut out = Vec::with_capacity(m);
    out.push(0.0);
    let mut acc = 0.0;
    for j in 1..m {
        let panel = if j == 1 {
            (9.0 * samples[0] + 19.0 * samples[1] - 5.0 * samples[2] + samples[3]) / 24.0
        } else if j == m - 1 {
            (9.0 * samples[m - 1] + 19.0 * samples[m - 2] - 5.0 * samples[m - 3]
                + samples[m - 4])
                / 24.0
        } else {
            (-samples[j - 2] + 13.0 * samples[j - 1] + 13.0 * samples[j] - samples[j + 1]) / 24.0
        };
        acc += h * panel;
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn grid_covers_unit_interval() {
        let tg = TimeGrid::new(9).unwrap();
        assert_eq!(tg.t(0), 0.0);
        assert_eq!(tg.t(8), 1.0);
        assert!((tg.dt() - 0.125).abs() < 1e-16);
        assert!(TimeGrid::new(4).is_err());
    }

    #[test]
    fn fd4_exact_on_quartics() {
        let m = 9;
        let h = 0.25;
        let f: Vec<f64> = (0..m)
            .map(|i| {
                let t = i as f64 * h;
                t.powi(4) - 2.0 * t.powi(3) + t
            })
            .collect();
        let d = fd4_series(&f, h);
        for (i, di) in d.iter().enumerate() {
            let t = i as f64 * h;
            let want = 4.0 * t.powi(3) - 6.0 * t * t + 1.0;
            assert!((di - want).abs() < 1e-12, "i={i}: {di} vs {want}");
        }
    }

    #[test]
    fn fd4_fourth_order_on_sine() {
        let err = |m: usize| {
            let h = 1.0 / (m - 1) as f64;
            let f: Vec<f64> = (0..m).map(|i| (TAU * i as f64 * h).sin()).collect();
            let d = fd4_series(&f, h);
            d.iter()
                .enumerate()
                .map(|(i, di)| (di - TAU * (TAU * i as f64 * h).cos()).abs())
                .fold(0.0_f64, f64::max)
        };
        let ratio = err(17) / err(33);
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn cumulative_exact_on_cubics() {
        let m = 11;
        let h = 0.1;
        let f: Vec<f64> = (0..m)
            .map(|i| {
                let t = i as f64 * h;
                t.powi(3) - t + 2.0
            })
            .collect();
        let ci = cumulative_integral(&f, h);
        for (i, c) in ci.iter().enumerate() {
            let t = i as f64 * h;
            let want = t.powi(4) / 4.0 - t * t / 2.0 + 2.0 * t;
            assert!((c - want).abs() < 1e-13, "i={i}");
        }
    }

    #[test]
    fn cumulative_fourth_order_on_cosine() {
        let err = |m: usize| {
            let h = 1.0 / (m - 1) as f64;
            let f: Vec<f64> = (0..m).map(|i| (TAU * i as f64 * h).cos()).collect();
            let ci = cumulative_integral(&f, h);
            ci.iter()
                .enumerate()
                .map(|(i, c)| (c - (TAU * i as f64 * h).sin() / TAU).abs())
                .fold(0.0_f64, f64::max)
        };
        let ratio = err(17) / err(33);
        assert!(ratio > 10.0 && ratio < 24.0, "ratio {ratio}");
    }
}
