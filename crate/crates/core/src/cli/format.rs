//! Number formatting shared by CSV, headers and stdout.

/// Decimal text of `x` rounded to 12 significant digits, printed in the
/// shortest form that reads back to the rounded value. Plain notation is
/// used for magnitudes in `[1e-5, 1e15)`, exponent notation otherwise.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    let a = rounded.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// [`num`] when that reads back to `x` exactly, otherwise the shortest
/// exponent form that does. Used for configuration values, which must
/// reproduce a run bit for bit.
pub fn exact(x: f64) -> String {
    let short = num(x);
    if short.parse::<f64>().ok() == Some(x) || !x.is_finite() {
        short
    } else {
        format!("{x:e}")
    }
}

/// Comma-joined [`exact`] values.
pub fn exact_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| exact(x)).collect::<Vec<_>>().join(",")
}

/// Comma-joined [`num`] values.
pub fn num_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}
