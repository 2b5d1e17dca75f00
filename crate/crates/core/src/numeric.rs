/// Rounds to 12 significant digits, dropping noise from accumulated steps
/// (0.1·3 → 0.3).
pub(crate) fn tidy(v: f64) -> f64 {
    format!("{v:.12e}").parse().unwrap_or(v)
}

/// Shortest round-trip text, in exponent form from 1e6 up.
pub(crate) fn axis_text(v: f64) -> String {
    if v.abs() >= 1e6 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}
