//! Serde adapters. Rationals travel as `"num/den"` strings so that big
//! integers survive JSON untouched.

pub mod rational {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::arith::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
