//! Uniform periodic grid on the 2-torus [0, 2pi)^2.
//!
//! Values are stored row-major with x fastest: `data[iy * ng + ix]` holds the
//! value at (x, y) = (2pi*ix/ng, 2pi*iy/ng). Spectra use the same layout with
//! the standard FFT index-to-wavenumber fold (index i maps to i for
//! i <= ng/2 - 1 and to i - ng above).

use crate::error::{Error, Result};

pub const TAU: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid2D {
    ng: usize,
}

impl Grid2D {
    pub fn new(ng: usize) -> Result<Self> {
        if ng < 4 || ng % 2 != 0 {
            return Err(Error::Validation {
                what: "grid size",
                message: format!("Ng must be even and >= 4, got {ng}"),
            });
        }
        Ok(Grid2D { ng })
    }

    #[inline]
    pub fn ng(&self) -> usize {
        self.ng
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.ng * self.ng
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing 2pi/Ng.
    #[inline]
    pub fn spacing(&self) -> f64 {
        TAU / self.ng as f64
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.ng + ix
    }

    /// Coordinate of node i along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        TAU * i as f64 / self.ng as f64
    }

    /// Wavenumber for FFT index i (integer cycles; Nyquist folds to -Ng/2).
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.ng as i64;
        let i = i as i64;
        if i <= n / 2 - 1 {
            i
        } else {
            i - n
        }
    }

    /// FFT index for an integer wavenumber (must satisfy |k| <= Ng/2).
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        let n = self.ng as i64;
        debug_assert!(k >= -n / 2 && k <= n / 2 - 1, "wavenumber {k} out of range");
        k.rem_euclid(n) as usize
    }

    /// Largest representable frequency magnitude per axis (Ng/2 - 1 for
    /// symmetric content; the unmatched -Ng/2 mode is treated as inert).
    #[inline]
    pub fn max_resolved(&self) -> i64 {
        (self.ng as i64) / 2 - 1
    }

    /// Band limit for fields that will enter pointwise products under the
    /// 3/2-rule (Ng/3); constructors reject product ingredients above this.
    #[inline]
    pub fn product_band_limit(&self) -> i64 {
        (self.ng as i64) / 3
    }
}

/// Smallest even 5-smooth integer >= min; these sizes keep the FFT on fast
/// mixed-radix paths.
pub fn next_fast_size(min: usize) -> usize {
    let mut n = min.max(4);
    if n % 2 == 1 {
        n += 1;
    }
    loop {
        let mut m = n;
        for p in [2usize, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_tiny() {
        assert!(Grid2D::new(5).is_err());
        assert!(Grid2D::new(2).is_err());
        assert!(Grid2D::new(4).is_ok());
    }

    #[test]
    fn wavenumber_fold() {
        let g = Grid2D::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for k in -4..=3 {
            assert_eq!(g.wavenumber(g.index_of(k)), k);
        }
    }

    #[test]
    fn fast_sizes_are_even_and_smooth() {
        assert_eq!(next_fast_size(24), 24);
        assert_eq!(next_fast_size(25), 30);
        assert_eq!(next_fast_size(7), 8);
        assert_eq!(next_fast_size(49), 50);
        assert_eq!(next_fast_size(769), 800);
    }
}
