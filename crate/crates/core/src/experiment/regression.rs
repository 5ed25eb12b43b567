//! Ordinary least squares of error against the gap statistic.

use serde::Serialize;

use crate::error::{Error, Result};

/// OLS line fit with its coefficient of determination.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_used: usize,
}

/// Fits `y = slope·x + intercept` by ordinary least squares, optionally
/// dropping points with `x` above `cutoff` first. No log scaling. A
/// constant response yields slope 0 and R² = 0; fewer than 3 surviving
/// points or a constant predictor is an error.
pub fn fit_line_xy(points: &[(f64, f64)], cutoff: Option<f64>) -> Result<LineFit> {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, _)| cutoff.is_none_or(|c| *x <= c))
        .copied()
        .collect();
    if kept.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 points for a line fit, have {}",
            kept.len()
        )));
    }
    let n = kept.len() as f64;
    let mean_x = kept.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = kept.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = kept.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = kept.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("predictor has zero variance".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = kept.iter().map(|(_, y)| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 = kept
        .iter()
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        r2,
        n_used: kept.len(),
    })
}
