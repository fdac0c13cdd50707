//! Percent relative bias, interval width and interval coverage.

use crate::error::{Error, Result};

/// True value: the mean of the full-data estimates.
pub fn true_value(full: &[f64]) -> Result<f64> {
    if full.is_empty() {
        return Err(Error::EmptyInput("no full-data estimates".into()));
    }
    Ok(full.iter().sum::<f64>() / full.len() as f64)
}

/// Absolute percent relative bias of `estimates` against the mean of `full`.
pub fn compute_prb(estimates: &[f64], full: &[f64]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput("no estimates".into()));
    }
    let phi = true_value(full)?;
    if phi == 0.0 {
        return Err(Error::invalid("relative bias is undefined for a true value of 0"));
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    Ok((mean - phi).abs() / phi.abs() * 100.0)
}

/// Mean confidence-interval width.
pub fn compute_ciw(intervals: &[(f64, f64)]) -> Result<f64> {
    if intervals.is_empty() {
        return Err(Error::EmptyInput("no intervals".into()));
    }
    Ok(intervals.iter().map(|(lo, hi)| hi - lo).sum::<f64>() / intervals.len() as f64)
}

/// Proportion of intervals containing `truth` (bounds inclusive).
pub fn compute_cic(intervals: &[(f64, f64)], truth: f64) -> Result<f64> {
    if intervals.is_empty() {
        return Err(Error::EmptyInput("no intervals".into()));
    }
    let hits = intervals
        .iter()
        .filter(|(lo, hi)| *lo <= truth && truth <= *hi)
        .count();
    Ok(hits as f64 / intervals.len() as f64)
}
