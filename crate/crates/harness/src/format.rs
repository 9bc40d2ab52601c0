//! Float formatting for persisted artifacts: every float carries exactly 17
//! significant digits, which round-trips any f64 and keeps files diffable.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// `x` with 17 significant digits, in plain decimal notation for moderate
/// magnitudes and scientific notation otherwise.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        return sci;
    }
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let mut out = String::with_capacity(24);
    if negative {
        out.push('-');
    }
    if exp >= 0 {
        let int_len = exp as usize + 1;
        out.push_str(&digits[..int_len]);
        out.push('.');
        let frac = &digits[int_len..];
        out.push_str(if frac.is_empty() { "0" } else { frac });
    } else {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    }
    out
}

/// Compact JSON whose floats go through [`sig17`].
#[derive(Debug, Default, Clone, Copy)]
struct Sig17Formatter;

impl Formatter for Sig17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(sig17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes to a single JSON line (no trailing newline).
pub fn to_json_line<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Sig17Formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(sig17(0.8), "0.80000000000000004");
        assert_eq!(sig17(1.0), "1.0000000000000000");
        assert_eq!(sig17(-0.001), "-0.0010000000000000000");
        assert_eq!(sig17(0.0), "0.0");
        assert_eq!(sig17(1e-8), "1.0000000000000000e-8");
        assert_eq!(sig17(12345.5), "12345.500000000000");
    }

    #[test]
    fn round_trips_through_parse() {
        for x in [
            0.1,
            1.0 / 3.0,
            2.0f64.sqrt(),
            1e-300,
            123456789.123,
            -7.25e-6,
            1.0 - f64::EPSILON / 2.0,
        ] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x, "{x}");
        }
    }

    #[test]
    fn json_lines_use_the_formatter() {
        let line = to_json_line(&serde_json::json!({"a": 0.5, "b": [1, 0.25], "c": null})).unwrap();
        assert_eq!(
            line,
            r#"{"a":0.50000000000000000,"b":[1,0.25000000000000000],"c":null}"#
        );
        let back: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(back["a"], 0.5);
    }
}
