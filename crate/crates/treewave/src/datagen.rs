//! Correlated 2D field synthesis from a second-order AR model, plus field
//! sampling at node positions.
//!
//! The generator drives unit-variance white Gaussian noise through the AR(2)
//! recursion `y[t] = 2ρ cos(ω0) y[t-1] - ρ² y[t-2] + w[t]` separably: first
//! along rows, then along columns, discarding a `4/(1-ρ)` warm-up per line.
//! The pole angle ω0 is in degrees; ω0 near 360° puts the pole pair near DC
//! (smooth, highly correlated fields), while mid-range angles oscillate.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::topology::{Network, NodeId, Point};

/// AR(2) field parameters.
#[derive(Debug, Clone, Copy)]
pub struct ArFieldSpec {
    /// Pole modulus, strictly inside the unit circle.
    pub rho: f64,
    /// Pole angle in degrees.
    pub omega0_deg: f64,
    /// Grid dimension (the field is `size x size`).
    pub size: usize,
    pub seed: u64,
}

impl ArFieldSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "pole modulus must be in (0, 1), got {}",
                self.rho
            )));
        }
        if self.size == 0 {
            return Err(Error::InvalidArgument(
                "grid size must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn coefficients(&self) -> (f64, f64) {
        let w = self.omega0_deg.to_radians();
        (2.0 * self.rho * w.cos(), -self.rho * self.rho)
    }

    pub fn warmup(&self) -> usize {
        (4.0 / (1.0 - self.rho)).ceil() as usize
    }
}

/// Square field stored row-major.
#[derive(Debug, Clone)]
pub struct Field {
    pub size: usize,
    pub values: Vec<f64>,
}

impl Field {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.size + col]
    }

    pub fn std_dev(&self) -> f64 {
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        (self
            .values
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / n)
            .sqrt()
    }
}

/// Run the AR(2) recursion over a driving sequence, starting from rest.
fn ar2_filter(a: f64, b: f64, input: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(input.len());
    let (mut y1, mut y2) = (0.0, 0.0);
    for &w in input {
        let y = a * y1 + b * y2 + w;
        out.push(y);
        y2 = y1;
        y1 = y;
    }
    out
}

/// One 1D AR(2) run of `len` samples after warm-up, for statistics tests and
/// calibration.
pub fn ar2_line(rho: f64, omega0_deg: f64, len: usize, seed: u64) -> Result<Vec<f64>> {
    let spec = ArFieldSpec {
        rho,
        omega0_deg,
        size: 1,
        seed,
    };
    spec.validate()?;
    let (a, b) = spec.coefficients();
    let warmup = spec.warmup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..warmup + len)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    Ok(ar2_filter(a, b, &noise)[warmup..].to_vec())
}

/// Synthesize a `size x size` field: row filtering over `warmup + size`
/// columns and rows, then column filtering, keeping the trailing square.
pub fn ar2_field(spec: &ArFieldSpec) -> Result<Field> {
    spec.validate()?;
    let (a, b) = spec.coefficients();
    let size = spec.size;
    let warmup = spec.warmup();
    let ext = warmup + size;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Row pass over an extended grid so the column pass has warm-up input.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(ext);
    let mut noise = vec![0.0; ext];
    for _ in 0..ext {
        for w in noise.iter_mut() {
            *w = StandardNormal.sample(&mut rng);
        }
        let filtered = ar2_filter(a, b, &noise);
        rows.push(filtered[warmup..].to_vec());
    }

    // Column pass consumes the row-filtered values as its driving input.
    let mut values = vec![0.0; size * size];
    let mut column = vec![0.0; ext];
    for c in 0..size {
        for (r, row) in rows.iter().enumerate() {
            column[r] = row[c];
        }
        let filtered = ar2_filter(a, b, &column);
        for r in 0..size {
            values[r * size + c] = filtered[warmup + r];
        }
    }
    Ok(Field { size, values })
}

/// Nearest-grid-cell lookup of node measurements. Positions map linearly from
/// `[0, extent]` onto cell centers `0..size-1`.
pub fn sample_field(field: &Field, extent: f64, positions: &[Point]) -> Result<Vec<f64>> {
    let scale = (field.size - 1) as f64 / extent;
    positions
        .iter()
        .map(|p| {
            if p.x < 0.0 || p.x > extent || p.y < 0.0 || p.y > extent {
                return Err(Error::InvalidArgument(format!(
                    "position ({}, {}) outside the field extent {extent}",
                    p.x, p.y
                )));
            }
            let col = (p.x * scale).round() as usize;
            let row = (p.y * scale).round() as usize;
            Ok(field.get(row.min(field.size - 1), col.min(field.size - 1)))
        })
        .collect()
}

/// Theoretical AR(2) autocorrelation at nonnegative lags via the Yule-Walker
/// recursion: `r(1) = a / (1 - b)`, `r(k) = a r(k-1) + b r(k-2)`.
pub fn theoretical_acf(rho: f64, omega0_deg: f64, max_lag: usize) -> Vec<f64> {
    let w = omega0_deg.to_radians();
    let a = 2.0 * rho * w.cos();
    let b = -rho * rho;
    let mut r = Vec::with_capacity(max_lag + 1);
    r.push(1.0);
    if max_lag >= 1 {
        r.push(a / (1.0 - b));
    }
    for k in 2..=max_lag {
        let v = a * r[k - 1] + b * r[k - 2];
        r.push(v);
    }
    r
}

/// Empirical lag autocorrelation of a 1D series.
pub fn empirical_acf(series: &[f64], lag: usize) -> f64 {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let var: f64 = series.iter().map(|v| (v - mean) * (v - mean)).sum();
    let cov: f64 = (0..n - lag)
        .map(|i| (series[i] - mean) * (series[i + lag] - mean))
        .sum();
    cov / var
}

/// Separable spatial covariance of the sampled measurements: nodes read the
/// nearest grid cell, so the correlation of two nodes is the product of the
/// 1D autocorrelations at their cell-index lags. Computing lags between cell
/// indices (rather than rounding raw distances) keeps this an exact Gram
/// matrix of the stationary field; the ridge absorbs shared-cell duplicates.
pub fn spatial_covariance(
    network: &Network,
    rho: f64,
    omega0_deg: f64,
    extent: f64,
    grid_size: usize,
    sigma2: f64,
) -> DMatrix<f64> {
    let n = network.len();
    let scale = (grid_size - 1) as f64 / extent;
    let max_lag = grid_size;
    let acf = theoretical_acf(rho, omega0_deg, max_lag);
    let cell = |i: usize| {
        let p = network.position(NodeId(i + 1));
        ((p.x * scale).round() as i64, (p.y * scale).round() as i64)
    };
    let cells: Vec<(i64, i64)> = (0..n).map(cell).collect();
    DMatrix::from_fn(n, n, |i, j| {
        let dx = (cells[i].0 - cells[j].0).unsigned_abs() as usize;
        let dy = (cells[i].1 - cells[j].1).unsigned_abs() as usize;
        let corr = acf[dx.min(max_lag)] * acf[dy.min(max_lag)];
        sigma2 * corr + if i == j { 1e-6 * sigma2 } else { 0.0 }
    })
}

const FIELD_MAGIC: &[u8; 8] = b"TWFLD001";

/// Dump a field as little-endian doubles behind a 16-byte header.
pub fn write_field(path: &Path, field: &Field) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(FIELD_MAGIC)?;
    f.write_all(&(field.size as u32).to_le_bytes())?;
    f.write_all(&[0u8; 4])?;
    for v in &field.values {
        f.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field(path: &Path) -> Result<Field> {
    let mut f = std::fs::File::open(path)?;
    let mut header = [0u8; 16];
    f.read_exact(&mut header)?;
    if &header[..8] != FIELD_MAGIC {
        return Err(Error::Validation("not a field dump (bad magic)".into()));
    }
    let size = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let mut values = vec![0.0f64; size * size];
    let mut buf = [0u8; 8];
    for v in values.iter_mut() {
        f.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    Ok(Field { size, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_zero_pole_gives_white_noise() {
        let line = ar2_line(1e-6, 99.0, 100_000, 3).unwrap();
        let r1 = empirical_acf(&line, 1);
        assert!(r1.abs() < 0.05, "lag-1 autocorrelation {r1}");
    }

    #[test]
    fn high_correlation_setting_has_high_lag1() {
        let line = ar2_line(0.99, 359.0, 100_000, 4).unwrap();
        let r1 = empirical_acf(&line, 1);
        assert!(r1 > 0.95, "lag-1 autocorrelation {r1}");
    }

    #[test]
    fn low_correlation_setting_matches_theory() {
        let line = ar2_line(0.99, 99.0, 100_000, 5).unwrap();
        let theory = theoretical_acf(0.99, 99.0, 3);
        for lag in 1..=3 {
            let emp = empirical_acf(&line, lag);
            assert!(
                (emp - theory[lag]).abs() < 0.05,
                "lag {lag}: empirical {emp} vs theory {}",
                theory[lag]
            );
        }
    }

    #[test]
    fn field_is_deterministic_per_seed() {
        let spec = ArFieldSpec {
            rho: 0.9,
            omega0_deg: 359.0,
            size: 40,
            seed: 11,
        };
        let a = ar2_field(&spec).unwrap();
        let b = ar2_field(&spec).unwrap();
        assert_eq!(a.values, b.values);
        let c = ar2_field(&ArFieldSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn field_rows_carry_the_1d_autocorrelation() {
        // Row direction of the separable field keeps the 1D lag-1 value.
        let spec = ArFieldSpec {
            rho: 0.95,
            omega0_deg: 359.0,
            size: 150,
            seed: 6,
        };
        let field = ar2_field(&spec).unwrap();
        let mut acc = 0.0;
        for r in 0..field.size {
            let row = &field.values[r * field.size..(r + 1) * field.size];
            acc += empirical_acf(row, 1);
        }
        let mean_r1 = acc / field.size as f64;
        let theory = theoretical_acf(0.95, 359.0, 1)[1];
        assert!(
            (mean_r1 - theory).abs() < 0.05,
            "row lag-1 {mean_r1} vs theory {theory}"
        );
    }

    #[test]
    fn variance_stable_across_seeds_for_oscillatory_pole() {
        let mut vars = Vec::new();
        for seed in 0..20 {
            let spec = ArFieldSpec {
                rho: 0.99,
                omega0_deg: 99.0,
                size: 64,
                seed,
            };
            let f = ar2_field(&spec).unwrap();
            let s = f.std_dev();
            vars.push(s * s);
        }
        let mean = vars.iter().sum::<f64>() / vars.len() as f64;
        let std =
            (vars.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vars.len() as f64).sqrt();
        assert!(std / mean < 0.5, "cv = {}", std / mean);
    }

    #[test]
    fn sampling_is_nearest_cell() {
        let field = Field {
            size: 3,
            values: vec![0.0, 1.0, 2.0, 10.0, 11.0, 12.0, 20.0, 21.0, 22.0],
        };
        // extent 2.0 maps x=1.0 to column 1, y=2.0 to row 2.
        let x = sample_field(&field, 2.0, &[Point::new(1.0, 2.0)]).unwrap();
        assert_eq!(x, vec![21.0]);
        // Two nodes in the same cell read the same value.
        let x = sample_field(&field, 2.0, &[Point::new(0.95, 0.0), Point::new(1.05, 0.0)]).unwrap();
        assert_eq!(x[0], x[1]);
        // Constant field samples constant.
        let ones = Field {
            size: 3,
            values: vec![1.0; 9],
        };
        let x = sample_field(&ones, 2.0, &[Point::new(0.3, 1.7)]).unwrap();
        assert_eq!(x, vec![1.0]);
        // Out of bounds errors.
        assert!(sample_field(&field, 2.0, &[Point::new(-0.1, 0.0)]).is_err());
    }

    #[test]
    fn field_dump_round_trips() {
        let spec = ArFieldSpec {
            rho: 0.9,
            omega0_deg: 99.0,
            size: 16,
            seed: 1,
        };
        let field = ar2_field(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.bin");
        write_field(&path, &field).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(field.size, back.size);
        assert_eq!(field.values, back.values);
    }
}
