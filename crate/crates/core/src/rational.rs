//! Exact rationals used for discount factors, targets and reduction metadata.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Builds `num / den` from machine integers.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_integer(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

/// Nearest `f64` to `r`.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `p/q`, an integer, or a decimal literal (optionally with an
/// exponent) into an exact rational. Non-finite spellings are rejected.
pub fn parse_rational(token: &str) -> Option<Rational> {
    let token = token.trim();
    if let Some((p, q)) = token.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    parse_decimal(token)
}

fn parse_decimal(token: &str) -> Option<Rational> {
    let (mantissa, exponent) = match token.find(['e', 'E']) {
        Some(i) => (&token[..i], token[i + 1..].parse::<i32>().ok()?),
        None => (token, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = all_digits.parse().ok()?;
    if negative {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// `p/q`, or just `p` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn is_open_unit(r: &Rational) -> bool {
    r.is_positive() && r < &Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("24/25"), Some(ratio(24, 25)));
        assert_eq!(parse_rational("0.9"), Some(ratio(9, 10)));
        assert_eq!(parse_rational("-1.25e2"), Some(ratio(-125, 1)));
        assert_eq!(parse_rational("3e-2"), Some(ratio(3, 100)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("6/4"), Some(ratio(3, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("nan"), None);
        assert_eq!(parse_rational("inf"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn f64_conversion_is_correctly_rounded() {
        for s in ["0.9", "0.1", "0.3333333333333333", "1e-300", "123456.789"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(to_f64(&r), s.parse::<f64>().unwrap(), "{s}");
        }
        assert_eq!(to_f64(&ratio(24, 25)), 24.0 / 25.0);
    }

    #[test]
    fn formats_lowest_terms() {
        assert_eq!(format_rational(&ratio(20, 18)), "10/9");
        assert_eq!(format_rational(&ratio(4, 2)), "2");
        assert_eq!(format_rational(&ratio(-1, 3)), "-1/3");
    }
}
