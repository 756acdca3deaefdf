//! Exact rational arithmetic helpers.
//!
//! All costs, tolerances and thresholds in this crate are exact rationals.
//! Values serialize as `"p/q"` strings (always with an explicit denominator,
//! reduced, e.g. `"1/200"`, `"0/1"`).

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational. i128 components keep squared-threshold arithmetic
/// (counts up to 64, user-supplied p/q up to i64) comfortably in range.
pub type Rat = Ratio<i128>;

pub fn rat(num: i128, den: i128) -> Rat {
    Rat::new(num, den)
}

/// Parses `"p/q"` or a bare integer `"p"`. Accepts only non-negative values;
/// every tolerance in this toolkit is a non-negative quantity.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: i64 = num_str
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("invalid rational {s:?}: bad numerator")))?;
    let den: i64 = den_str
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("invalid rational {s:?}: bad denominator")))?;
    if den == 0 {
        return Err(Error::Parse(format!("invalid rational {s:?}: zero denominator")));
    }
    let r = rat(num as i128, den as i128);
    if r.is_negative() {
        return Err(Error::Parse(format!("invalid rational {s:?}: negative value")));
    }
    Ok(r)
}

/// Canonical `"p/q"` form, denominator always explicit.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// True iff `count > sqrt(coeff) * n`, decided exactly as `count^2 > coeff * n^2`.
pub fn exceeds_scaled_sqrt(count: u64, coeff: Rat, n: usize) -> bool {
    debug_assert!(!coeff.is_negative());
    let lhs = Rat::from_integer((count as i128) * (count as i128));
    let rhs = coeff * Rat::from_integer((n as i128) * (n as i128));
    lhs > rhs
}

/// True iff `count <= sqrt(coeff) * n` (the complement of [`exceeds_scaled_sqrt`]).
pub fn within_scaled_sqrt(count: u64, coeff: Rat, n: usize) -> bool {
    !exceeds_scaled_sqrt(count, coeff, n)
}

/// Serde adapter: `Rat` as a `"p/q"` string.
pub mod rat_serde {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, ser: S) -> std::result::Result<S::Ok, S::Error> {
        format_rat(r).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(de)?;
        parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: `Vec<Rat>` as a list of `"p/q"` strings.
pub mod rat_vec_serde {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], ser: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = v.iter().map(format_rat).collect();
        strings.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<Vec<Rat>, D::Error> {
        let strings = Vec::<String>::deserialize(de)?;
        strings
            .iter()
            .map(|s| parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}
