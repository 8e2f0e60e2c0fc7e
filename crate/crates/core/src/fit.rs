//! Small least-squares fits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Polynomial least squares in `u`: returns coefficients of `u^0..=u^degree`
/// and the RMS residual.
pub fn polynomial(u: &[f64], y: &[f64], degree: usize) -> Result<(Vec<f64>, f64)> {
    let needed = degree + 1;
    let distinct = distinct_count(u);
    if u.len() != y.len() || distinct < needed {
        return Err(Error::InsufficientData {
            needed,
            got: distinct.min(y.len()),
        });
    }
    let design = DMatrix::from_fn(u.len(), needed, |r, c| u[r].powi(c as i32));
    let rhs = DVector::from_column_slice(y);
    let coeffs = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|_| Error::InsufficientData {
            needed,
            got: distinct,
        })?;
    let residual = &design * &coeffs - rhs;
    let rms = (residual.norm_squared() / u.len() as f64).sqrt();
    Ok((coeffs.iter().copied().collect(), rms))
}

/// Ordinary least-squares line `y = intercept + slope x`.
pub fn line(x: &[f64], y: &[f64]) -> Result<Line> {
    if x.len() != y.len() || distinct_count(x) < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: distinct_count(x),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(Line {
        intercept,
        slope,
        rms,
        sxx,
        mean_x: mx,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    pub intercept: f64,
    pub slope: f64,
    pub rms: f64,
    sxx: f64,
    mean_x: f64,
}

impl Line {
    /// Standard error of the slope for independent points with known
    /// variances `var[i]`.
    pub fn slope_std_error(&self, x: &[f64], var: &[f64]) -> f64 {
        x.iter()
            .zip(var)
            .map(|(a, v)| (a - self.mean_x).powi(2) * v)
            .sum::<f64>()
            .sqrt()
            / self.sxx
    }
}

fn distinct_count(x: &[f64]) -> usize {
    let mut v: Vec<f64> = x.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}
