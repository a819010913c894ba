//! Dimension parsing: `pt`, `mm`, `cm`, `sp` lengths and plain decimal fractions.

use std::fmt;

use thiserror::Error;

use crate::fixedmath::Sp;

pub const SP_PER_PT: i64 = 65536;
pub const SP_PER_MM: i64 = 186_467;
pub const SP_PER_CM: i64 = 1_864_679;

/// Fractions are carried in 16.16 fixed point.
pub const FRACTION_ONE: i32 = 65536;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("malformed number `{0}`")]
    Number(String),
    #[error("malformed length `{0}` (expected a number followed by pt, mm, cm or sp)")]
    Length(String),
    #[error("value `{0}` out of range")]
    Range(String),
}

/// A decimal literal split into an integer mantissa and a power-of-ten scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Decimal {
    negative: bool,
    mantissa: i128,
    scale: u32,
}

fn parse_decimal(text: &str) -> Result<Decimal, UnitError> {
    let bad = || UnitError::Number(text.to_string());
    let (negative, body) = match text.as_bytes().first() {
        Some(b'-') => (true, &text[1..]),
        Some(b'+') => (false, &text[1..]),
        _ => (false, text),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if int_part.len() + frac_part.len() > 30 {
        return Err(UnitError::Range(text.to_string()));
    }
    let mut mantissa: i128 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        mantissa = mantissa * 10 + i128::from(b - b'0');
    }
    Ok(Decimal { negative, mantissa, scale: frac_part.len() as u32 })
}

fn to_i32(v: i128, text: &str) -> Result<i32, UnitError> {
    i32::try_from(v)
        .ok()
        .filter(|v| v.unsigned_abs() < (1 << 30))
        .ok_or_else(|| UnitError::Range(text.to_string()))
}

/// Parses a length such as `5pt`, `-2mm`, `.8pt`, `1cm` or `0sp` into sp,
/// truncating toward zero.
pub fn parse_length(text: &str) -> Result<Sp, UnitError> {
    let t = text.trim();
    let split = t.len().saturating_sub(2);
    if !t.is_char_boundary(split) {
        return Err(UnitError::Length(text.to_string()));
    }
    let (number, unit) = t.split_at(split);
    let per_unit: i64 = match unit {
        "pt" => SP_PER_PT,
        "mm" => SP_PER_MM,
        "cm" => SP_PER_CM,
        "sp" => 1,
        _ => return Err(UnitError::Length(text.to_string())),
    };
    let dec = parse_decimal(number.trim()).map_err(|_| UnitError::Length(text.to_string()))?;
    if unit == "sp" && dec.scale > 0 {
        return Err(UnitError::Length(text.to_string()));
    }
    let magnitude = dec.mantissa * i128::from(per_unit) / 10i128.pow(dec.scale);
    to_i32(if dec.negative { -magnitude } else { magnitude }, text)
}

/// Parses a unitless decimal into 16.16 fixed point, rounding half away from zero.
pub fn parse_fraction(text: &str) -> Result<i32, UnitError> {
    let t = text.trim();
    let dec = parse_decimal(t)?;
    let denom = 10i128.pow(dec.scale);
    let magnitude = (dec.mantissa * i128::from(FRACTION_ONE) * 2 + denom) / (2 * denom);
    to_i32(if dec.negative { -magnitude } else { magnitude }, text)
}

/// Parses a plain integer.
pub fn parse_integer(text: &str) -> Result<i32, UnitError> {
    let t = text.trim();
    let dec = parse_decimal(t)?;
    if dec.scale > 0 {
        return Err(UnitError::Number(text.to_string()));
    }
    to_i32(if dec.negative { -dec.mantissa } else { dec.mantissa }, text)
}

/// Formats a 16.16 fraction as the exact decimal it represents.
pub fn format_fraction(raw: i32) -> String {
    let negative = raw < 0;
    let mag = i64::from(raw).unsigned_abs();
    let int = mag / 65536;
    let mut rem = mag % 65536;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&int.to_string());
    if rem != 0 {
        out.push('.');
        while rem != 0 {
            rem *= 10;
            out.push(char::from(b'0' + (rem / 65536) as u8));
            rem %= 65536;
        }
    }
    out
}

/// Formats a length in its canonical `<n>sp` form.
pub fn format_length(sp: Sp) -> String {
    format!("{sp}sp")
}

/// `value * fraction`, truncating toward zero.
pub fn scale_by_fraction(value: Sp, fraction: i32) -> Sp {
    let v = i64::from(value) * i64::from(fraction) / i64::from(FRACTION_ONE);
    v.clamp(i64::from(i32::MIN), i64::from(i32::MAX)) as i32
}

/// Renders sp as points with three decimals, rounding half away from zero.
pub fn format_pt(sp: Sp) -> String {
    let thousandths = {
        let n = i64::from(sp) * 1000;
        let d = SP_PER_PT;
        if n >= 0 {
            (n + d / 2) / d
        } else {
            -((-n + d / 2) / d)
        }
    };
    let sign = if thousandths < 0 { "-" } else { "" };
    let a = thousandths.abs();
    format!("{sign}{}.{:03}", a / 1000, a % 1000)
}

/// Formats a ratio `num/den` as a fixed decimal with four places, for SVG matrices.
pub fn format_ratio(num: i64, den: i64) -> String {
    if den == 0 {
        return "0.0000".to_string();
    }
    let scaled = {
        let n = num * 10_000;
        let q = (n.abs() + den.abs() / 2) / den.abs();
        if (n < 0) != (den < 0) {
            -q
        } else {
            q
        }
    };
    let sign = if scaled < 0 { "-" } else { "" };
    let a = scaled.abs();
    format!("{sign}{}.{:04}", a / 10_000, a % 10_000)
}

/// A parameter value tagged with how it prints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Length(Sp),
    Fraction(i32),
    Integer(i32),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Quantity::Length(v) => f.write_str(&format_length(v)),
            Quantity::Fraction(v) => f.write_str(&format_fraction(v)),
            Quantity::Integer(v) => write!(f, "{v}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths() {
        assert_eq!(parse_length("5pt"), Ok(327_680));
        assert_eq!(parse_length("1cm"), Ok(1_864_679));
        assert_eq!(parse_length("15mm"), Ok(2_797_005));
        assert_eq!(parse_length("-1pt"), Ok(-65536));
        assert_eq!(parse_length(".8pt"), Ok(52_428));
        assert_eq!(parse_length("2.5pt"), Ok(163_840));
        assert_eq!(parse_length("0sp"), Ok(0));
        assert_eq!(parse_length(" 12 pt "), Ok(12 * 65536));
        assert!(parse_length("5").is_err());
        assert!(parse_length("pt").is_err());
        assert!(parse_length("1.5sp").is_err());
        assert!(parse_length("5em").is_err());
        assert!(parse_length("99999pt").is_err());
        assert!(parse_length("é").is_err());
    }

    #[test]
    fn fractions() {
        assert_eq!(parse_fraction(".5"), Ok(32768));
        assert_eq!(parse_fraction("1"), Ok(65536));
        assert_eq!(parse_fraction("0.3"), Ok(19661));
        assert_eq!(parse_fraction("0.7"), Ok(45875));
        assert_eq!(parse_fraction("-.25"), Ok(-16384));
        assert!(parse_fraction("x").is_err());
        assert!(parse_fraction(".").is_err());
    }

    #[test]
    fn fraction_format_round_trips() {
        for raw in [0, 1, 32768, 19661, -16384, 65536 * 3 + 7, -1] {
            assert_eq!(parse_fraction(&format_fraction(raw)), Ok(raw), "{raw}");
        }
    }

    #[test]
    fn pt_formatting() {
        assert_eq!(format_pt(65536), "1.000");
        assert_eq!(format_pt(-32768), "-0.500");
        assert_eq!(format_pt(0), "0.000");
        assert_eq!(format_pt(52_428), "0.800");
        assert_eq!(format_ratio(1, 3), "0.3333");
        assert_eq!(format_ratio(-1, 2), "-0.5000");
    }
}
