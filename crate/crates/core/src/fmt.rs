//! Float formatting shared by the CSV and JSON writers: six significant
//! digits, `%g` style.

use serde::{Serialize, Serializer};

/// `%g` with precision 6: fixed notation for exponents in `[-5, 6)`,
/// scientific otherwise, trailing zeros removed. NaN prints as `nan`.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    // exponent after rounding to 6 digits
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mantissa), sign, exp.abs())
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Serializes an `f64` rounded to six significant digits; non-finite values
/// become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig6(pub f64);

impl Serialize for Sig6 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(sig6(self.0).parse().expect("sig6 output parses"))
        } else {
            s.serialize_none()
        }
    }
}

/// For `#[serde(serialize_with = "...")]` on plain `f64` fields.
pub fn serialize_sig6<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    Sig6(*x).serialize(s)
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.8, "0.8"),
            (4.0 / 15.0, "0.266667"),
            (1.4641016151377544, "1.4641"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e+06"),
            (0.0001234567, "0.000123457"),
            (0.00001234567, "1.23457e-05"),
            (-2.5, "-2.5"),
            (999999.5, "1e+06"),
            (f64::NAN, "nan"),
        ];
        for (x, want) in cases {
            assert_eq!(sig6(x), want, "{x}");
        }
    }
}
