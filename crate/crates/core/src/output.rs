//! Fixed-format numeric output shared by every CSV writer.

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x == 0.0 {
        // drop the sign of -0.0
        format!("{:.16e}", 0.0)
    } else {
        format!("{x:.16e}")
    }
}

/// Parses what [`format_float`] writes.
pub fn parse_float(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.0, 1.0 / 3.0, 6.02214076e23, -2.2250738585072014e-308, f64::MAX] {
            let s = format_float(x);
            assert_eq!(parse_float(&s).unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_float(-0.0), format_float(0.0));
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        assert!(parse_float(&format_float(f64::NAN)).unwrap().is_nan());
        assert_eq!(format_float(f64::INFINITY), "inf");
    }
}
