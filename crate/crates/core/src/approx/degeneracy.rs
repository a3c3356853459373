use serde::Serialize;

use super::model::FitTrace;
use crate::error::{arg_err, Result};

/// A mode counts as collinear when its factor vectors reach this `|cos|`.
pub const COLLINEAR_COS: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    /// At least two diverging coefficient series while the model stays bounded.
    pub degenerate: bool,
    pub diverging_terms: usize,
    /// Final model within `2·‖A‖` of the target.
    pub bounded: bool,
    pub collinear_modes: usize,
    pub max_lambda: f64,
    pub threshold: f64,
    pub final_residual: f64,
}

/// Heuristic verdict on a finite trace. A coefficient series diverges if it
/// ends above `10·‖A‖` and is non-decreasing over the last tenth of the trace.
pub fn degeneracy_report(trace: &FitTrace, a_norm: f64) -> Result<DegeneracyReport> {
    let last = match trace.last() {
        Some(r) => r,
        None => return arg_err("empty trace"),
    };
    let threshold = 10.0 * a_norm;
    let n = trace.len();
    let tail = (n / 10).max(2).min(n);
    let diverging_terms = (0..last.lambdas.len())
        .filter(|&j| {
            let s = trace.lambda_series(j);
            let t = &s[n - tail..];
            s[n - 1] > threshold && t.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12))
        })
        .count();
    let bounded = last.residual <= 2.0 * a_norm;
    Ok(DegeneracyReport {
        degenerate: diverging_terms >= 2 && bounded,
        diverging_terms,
        bounded,
        collinear_modes: last.cosines.iter().filter(|&&c| c >= COLLINEAR_COS).count(),
        max_lambda: last.lambdas.iter().cloned().fold(0.0, f64::max),
        threshold,
        final_residual: last.residual,
    })
}
