//! Numeric formatting shared by every CSV writer: 9 significant digits, `%g` style.

/// Formats `x` like C's `%.9g`: fixed notation for exponents in `[-5, 9)`,
/// scientific otherwise, trailing zeros trimmed.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig9;

    #[test]
    fn matches_printf_g() {
        assert_eq!(sig9(1.690_770_422_751_423_4), "1.69077042");
        assert_eq!(sig9(175.0), "175");
        assert_eq!(sig9(-0.354_614_788_624_288_3), "-0.354614789");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(1e-7), "1e-07");
        assert_eq!(sig9(123_456_789_012.0), "1.23456789e+11");
        assert_eq!(sig9(9.999_999_999_7), "10");
        assert_eq!(sig9(0.000_123_456_789_1), "0.000123456789");
        assert_eq!(sig9(f64::NAN), "NaN");
    }
}
