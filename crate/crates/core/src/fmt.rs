//! Deterministic number rendering shared by every text output.

/// Renders `x` like C's `%.17g`: 17 significant digits, trailing zeros
/// trimmed, scientific notation outside `1e-4 <= |x| < 1e17`.
///
/// Seventeen digits are enough for any `f64` to parse back bit-exactly.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::g17;
    use proptest::prelude::*;

    #[test]
    fn matches_printf_g17() {
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(0.75), "0.75");
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(-2.5), "-2.5");
        assert_eq!(g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(g17(123456.0), "123456");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(1.0 / 3.0), "0.33333333333333331");
    }

    proptest! {
        #[test]
        fn round_trips_exactly(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let back: f64 = g17(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
