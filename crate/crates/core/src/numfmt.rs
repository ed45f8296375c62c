//! Portable numeric text formatting for CSV and report output.

/// Formats `x` with six significant digits, `%g` style: trailing zeros are
/// trimmed and exponent notation is used outside `[1e-4, 1e6)`.
pub fn sig6(x: f64) -> String {
    sig(x, 6)
}

pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    // Round first so the exponent reflects carries such as 999999.7 -> 1e6.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        let s = trim_zeros(&s);
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    }
}

/// Shortest decimal text that parses back to the identical `f64`.
pub fn exact(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
