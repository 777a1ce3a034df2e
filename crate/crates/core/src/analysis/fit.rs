use crate::error::{Error, Result};

use super::EnergyCurve;

/// Least-squares line through `(log lambda, log log E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Points used, as `(lambda, energy)`.
    pub used: Vec<(f64, f64)>,
    /// Lambdas left out because `E <= 1` or `lambda <= 0`.
    pub dropped: Vec<f64>,
}

pub const MIN_FIT_POINTS: usize = 4;

/// Fits the excitation index at one time from `(lambda, energy)` pairs.
pub fn fit_points(points: &[(f64, f64)]) -> Result<IndexFit> {
    let (used, dropped): (Vec<_>, Vec<_>) = points
        .iter()
        .copied()
        .partition(|&(l, e)| l > 0.0 && e > 1.0 && e.is_finite());
    let dropped: Vec<f64> = dropped.into_iter().map(|(l, _)| l).collect();
    if used.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "need {MIN_FIT_POINTS} points with energy > 1, have {} (dropped lambda = {:?})",
            used.len(),
            dropped
        )));
    }
    let xs: Vec<f64> = used.iter().map(|(l, _)| l.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|(_, e)| e.ln().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all lambdas are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(IndexFit {
        slope,
        intercept,
        r2,
        used,
        dropped,
    })
}

/// Fits the excitation index from the curve's entries at time `t`.
pub fn fit_excitation_index(curve: &EnergyCurve, t: f64) -> Result<IndexFit> {
    let points: Vec<(f64, f64)> = curve
        .at_time(t)
        .iter()
        .map(|p| (p.lambda, p.energy))
        .collect();
    fit_points(&points)
}
