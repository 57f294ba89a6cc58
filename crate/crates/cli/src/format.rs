//! Float formatting for CSV output.

/// Formats with 17 significant digits, which round-trips every `f64`.
/// Fixed notation is used for moderate magnitudes, scientific otherwise.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exponent = v.abs().log10().floor() as i32;
    if (-5..17).contains(&exponent) {
        let decimals = (16 - exponent).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_f64;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [
            49.973_456_789_012_34,
            0.1,
            1.0 / 3.0,
            -2.5e-9,
            1e-300,
            123_456_789.0,
            0.018_575_004_4,
            f64::MIN_POSITIVE,
            f64::MAX,
        ] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(50.0), "50.000000000000000");
    }
}
