//! Small helpers around the exact number types: construction shortcuts and
//! the wire format (big integers as decimal strings, rationals as `p/q` in
//! lowest terms).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Rational from a big-integer numerator over 1.
pub fn whole(v: BigInt) -> BigRational {
    BigRational::from_integer(v)
}

/// Always `p/q`, reduced, even when the denominator is 1.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `p/q` or a bare integer `p`.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::InvalidParam(format!("malformed rational component `{t}`")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let denom = parse_int(q)?;
            if denom.is_zero() {
                return Err(Error::InvalidParam(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(parse_int(p)?, denom))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

pub fn parse_int(s: &str) -> Result<BigInt> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|_| Error::InvalidParam(format!("malformed integer `{s}`")))
}

/// 10^-9, the default correlation tolerance.
pub fn default_tolerance() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(1_000_000_000u64))
}

/// Serde adapter: one `BigInt` as a decimal string.
pub mod int_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: a vector of `BigInt` as decimal strings.
pub mod int_vec_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<BigInt>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|t| t.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter: one `BigRational` as `p/q`.
pub mod ratio_str {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BigRational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_ratio(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_wire_format_is_lowest_terms() {
        let r = ratio(6, 4);
        assert_eq!(format_ratio(&r), "3/2");
        assert_eq!(format_ratio(&ratio(5, 1)), "5/1");
        assert_eq!(format_ratio(&ratio(0, 7)), "0/1");
    }

    #[test]
    fn parse_accepts_bare_integers_and_fractions() {
        assert_eq!(parse_ratio("3/2").unwrap(), ratio(3, 2));
        assert_eq!(parse_ratio("-9").unwrap(), ratio(-9, 1));
        assert_eq!(parse_ratio(" 10/4 ").unwrap(), ratio(5, 2));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x/2").is_err());
    }
}
