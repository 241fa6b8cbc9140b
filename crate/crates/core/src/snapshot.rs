//! Field snapshots: full-precision CSV for analysis and plain-text PGM for a
//! quick look without any plotting stack.

use crate::error::Result;
use crate::field::ScalarField;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// One value per line in row-major order (x fastest), preceded by a header
/// comment carrying the grid size, the component name, and the sample time.
pub fn write_scalar_csv(field: &ScalarField, name: &str, t: f64, path: &Path) -> Result<()> {
    let ng = field.grid().ng();
    let mut s = String::with_capacity(field.data().len() * 26 + 64);
    let _ = writeln!(s, "# Ng={ng} component={name} t={t:.17e}");
    for v in field.data() {
        let _ = writeln!(s, "{v:.17e}");
    }
    fs::write(path, s)?;
    Ok(())
}

/// 8-bit ASCII PGM, linearly rescaled so the snapshot's own min maps to
/// black and max to white. The scale is in the comment line.
pub fn write_scalar_pgm(field: &ScalarField, name: &str, path: &Path) -> Result<()> {
    let ng = field.grid().ng();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in field.data() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = (hi - lo).max(1e-300);
    let mut s = String::with_capacity(field.data().len() * 4 + 64);
    let _ = writeln!(s, "P2");
    let _ = writeln!(s, "# {name} min={lo:.6e} max={hi:.6e}");
    let _ = writeln!(s, "{ng} {ng}");
    let _ = writeln!(s, "255");
    // image rows run top to bottom; flip y so the torus origin sits at the
    // bottom-left like a plot
    for iy in (0..ng).rev() {
        for ix in 0..ng {
            let v = field.data()[iy * ng + ix];
            let g = (((v - lo) / span) * 255.0).round() as i64;
            let _ = write!(s, "{} ", g.clamp(0, 255));
        }
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    #[test]
    fn csv_roundtrips_values() {
        let grid = Grid2D::new(16).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| (x).sin() + 0.3 * (2.0 * y).cos());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_scalar_csv(&f, "f", 0.25, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.contains("Ng=16"));
        assert!(header.contains("component=f"));
        let vals: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
        assert_eq!(vals.len(), 256);
        for (a, b) in vals.iter().zip(f.data()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn pgm_has_valid_shape_and_range() {
        let grid = Grid2D::new(8).unwrap();
        let f = ScalarField::from_fn(grid, |x, y| (x + y).cos());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.pgm");
        write_scalar_pgm(&f, "f", &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "P2");
        assert!(lines.next().unwrap().starts_with('#'));
        assert_eq!(lines.next().unwrap(), "8 8");
        assert_eq!(lines.next().unwrap(), "255");
        let pixels: Vec<i64> = lines
            .flat_map(|l| l.split_whitespace())
            .map(|w| w.parse().unwrap())
            .collect();
        assert_eq!(pixels.len(), 64);
        assert!(pixels.iter().all(|&p| (0..=255).contains(&p)));
        assert!(pixels.contains(&0));
        assert!(pixels.contains(&255));
    }
}
