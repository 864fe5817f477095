use crate::{Error, Result};

/// Least-squares line through `(log h, log err)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence half-width of the slope (Student t).
    pub half_width: f64,
}

// Two-sided 97.5% Student t quantiles, df = 1..=30.
const T975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
    2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
];

pub fn fit_loglog(hs: &[f64], errs: &[f64]) -> Result<LogLogFit> {
    if hs.len() != errs.len() {
        return Err(Error::DimensionMismatch {
            context: "log-log fit",
            expected: hs.len(),
            found: errs.len(),
        });
    }
    if hs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "log-log fit needs at least 3 points, got {}",
            hs.len()
        )));
    }
    if hs.iter().chain(errs).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidArgument("log-log fit needs positive finite data".into()));
    }
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("log-log fit needs distinct step sizes".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let df = x.len() - 2;
    let se = (rss / df as f64 / sxx).sqrt();
    let t = T975.get(df - 1).copied().unwrap_or(1.96);
    Ok(LogLogFit {
        slope,
        intercept,
        half_width: t * se,
    })
}
