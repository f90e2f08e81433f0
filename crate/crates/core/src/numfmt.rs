//! Shortest round-trip decimal text for floating-point output files.

/// Shortest string that parses back to exactly `x`. Plain notation for
/// magnitudes in [10⁻⁵, 10¹⁶), scientific otherwise.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-5..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}
