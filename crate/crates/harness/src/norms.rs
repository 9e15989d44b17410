//! Discrete error norms and log-log slope fits.

use serde::Serialize;

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// L1 = h sum|e|, L2 = sqrt(h sum e^2), Linf = max|e|, over every grid point
/// and component.
pub fn error_norms(numeric: &[f64], reference: &[f64], h: f64) -> Result<Norms> {
    if numeric.len() != reference.len() {
        return Err(HarnessError::Numerical(relaxbl_core::Error::DimensionMismatch(format!(
            "numeric has {} values, reference {}",
            numeric.len(),
            reference.len()
        ))));
    }
    let mut n = Norms::default();
    let mut sq = 0.0;
    for (a, b) in numeric.iter().zip(reference) {
        let e = (a - b).abs();
        n.l1 += e;
        sq += e * e;
        n.linf = n.linf.max(e);
    }
    n.l1 *= h;
    n.l2 = (h * sq).sqrt();
    Ok(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Slope {
    Fitted(f64),
    /// Every error vanished.
    Exact,
    /// Fewer than two usable points.
    Insufficient,
}

impl std::fmt::Display for Slope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Slope::Fitted(s) => write!(f, "{s:.4}"),
            Slope::Exact => f.write_str("exact"),
            Slope::Insufficient => f.write_str("n/a"),
        }
    }
}

/// Least-squares slope of log(err) against log(h). Exact-zero errors are
/// dropped from the fit.
pub fn fit_slope(h: &[f64], err: &[f64]) -> Slope {
    if !err.is_empty() && err.iter().all(|&e| e == 0.0) {
        return Slope::Exact;
    }
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(err)
        .filter(|(&h, &e)| h > 0.0 && e > 0.0 && e.is_finite())
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return Slope::Insufficient;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Slope::Insufficient;
    }
    Slope::Fitted(sxy / sxx)
}
