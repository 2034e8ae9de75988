//! Fixed-precision number rendering shared by every output path.

/// Rounds to 9 significant digits.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Renders `x` rounded to 9 significant digits, in plain decimal notation.
pub fn sig9(x: f64) -> String {
    format!("{}", round_sig9(x))
}
