use crate::error::{Error, Result};
use crate::observables::ExpFit;

/// Fits Q = A·exp(−rate·M₀) by least squares on ln|Q|.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<ExpFit> {
    if points.len() < 3 {
        return Err(Error::FitDomain(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(m, _)) = points.iter().find(|(_, q)| *q == 0.0 || !q.is_finite()) {
        return Err(Error::FitDomain(format!("Q is zero or non-finite at M0 = {m}")));
    }
    let sign = points[0].1.signum();
    if points.iter().any(|(_, q)| q.signum() != sign) {
        return Err(Error::FitDomain("Q changes sign across the sweep".into()));
    }

    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1.abs().ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, q) in points {
        let dx = x - mean_x;
        let dy = q.abs().ln() - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::FitDomain("all M0 values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = points
        .iter()
        .map(|&(x, q)| (q.abs().ln() - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ExpFit {
        amplitude: sign * intercept.exp(),
        rate: -slope,
        residual,
        r_squared,
    })
}
