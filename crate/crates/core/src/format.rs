//! Locale-independent number formatting for CSV output.

/// Formats `x` with 12 significant digits, `.` as the decimal separator and
/// no trailing zeros. Magnitudes outside `[1e-5, 1e12)` use exponent form.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.11e}");
        match s.split_once('e') {
            Some((mantissa, exp)) => format!("{}e{}", trim(mantissa.to_string()), exp),
            None => s,
        }
    }
}

fn trim(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn formats() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1.0 / 3.0), "0.333333333333");
        assert_eq!(num(-2.25), "-2.25");
        assert_eq!(num(123456.789), "123456.789");
        assert_eq!(num(1.5e-7), "1.5e-7");
        assert_eq!(num(2.0e15), "2e15");
    }

    #[test]
    fn round_trips_to_twelve_digits() {
        for &x in &[std::f64::consts::PI, 1e-4 * std::f64::consts::E, 98765.4321012345] {
            let y: f64 = num(x).parse().unwrap();
            assert!(((y - x) / x).abs() < 1e-11);
        }
    }
}
