//! Plain-decimal number formatting with a guaranteed number of significant
//! digits, used by every CSV writer in the crate.

/// Formats `x` as a plain decimal carrying at least `sig` significant digits.
pub fn sig(x: f64, sig: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.*}", sig.saturating_sub(1), 0.0);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}
