/// Formats `x` with 17 significant digits the way C's `%.17g` does:
/// fixed notation for exponents in `[-4, 17)`, scientific otherwise, with
/// trailing zeros removed. Parsing the result gives back `x` exactly.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        strip_zeros(format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa.to_string()), sign, exp.abs())
    }
}

fn strip_zeros(mut s: String) -> String {
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

/// Four-decimal rendering used in human-readable tables.
pub fn fixed4(x: f64) -> String {
    format!("{:.4}", x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matches_printf() {
        assert_eq!(sig17(0.65), "0.65000000000000002");
        assert_eq!(sig17(1.0), "1");
        assert_eq!(sig17(1.13), "1.1299999999999999");
        assert_eq!(sig17(5.0 / 3.0), "1.6666666666666667");
        assert_eq!(sig17(1e-5), "1.0000000000000001e-05");
        assert_eq!(sig17(1e20), "1e+20");
        assert_eq!(sig17(-0.25), "-0.25");
        assert_eq!(sig17(0.0001), "0.0001");
        assert_eq!(sig17(123456.5), "123456.5");
    }

    proptest! {
        #[test]
        fn round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let s = sig17(x);
            prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
