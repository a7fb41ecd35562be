//! Locale-independent rendering of floats at 12 significant digits.

const SIG_DIGITS: usize = 12;

/// `v` with 12 significant digits: positional notation for exponents in
/// `-5..12`, scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig12(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return "0".into();
    }
    // rounding happens once, here; the exponent comes from the rounded mantissa
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{:.*}", decimals, v))
    } else {
        format!("{}e{}", trim_fraction(mantissa), exp)
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `v` rounded to the value that [`fmt_sig12`] prints.
pub fn round_sig12(v: f64) -> f64 {
    if v.is_finite() {
        fmt_sig12(v).parse().expect("formatted float parses")
    } else {
        v
    }
}
