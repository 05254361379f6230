//! Plain-text table formatting helpers.

/// `value ± std` with two significant digits on the uncertainty,
/// e.g. `0.7353 ± 6.0e-4`.
pub fn fmt_mean_std(mean: f64, std: f64) -> String {
    if std == 0.0 {
        format!("{mean:.4} ± 0")
    } else {
        format!("{mean:.4} ± {std:.1e}")
    }
}

/// Threshold bound for tables; infinities render as -inf/+inf.
pub fn fmt_tau(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.6}")
    }
}
