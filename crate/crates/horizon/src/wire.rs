//! Number formatting and serde adapters shared by the file formats and the
//! HTTP service.

use std::fmt;

use horizon_core::{Confidence, EntryPath, FusionRule};
use serde::de::{self, Deserializer};
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

/// Decimal rendering of `x` with exactly 17 significant digits.
///
/// Seventeen digits are enough for every `f64` to parse back to the same
/// bits. Positional notation is used for exponents in `-7..17`.
pub fn sig17(x: f64) -> String {
    assert!(x.is_finite(), "non-finite value {x}");
    if x == 0.0 {
        return "0.0000000000000000".to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-7..17).contains(&exp) {
        return format!("{sign}{}.{}e{exp}", &digits[..1], &digits[1..]);
    }
    if exp >= 0 {
        let split = exp as usize + 1;
        let frac = &digits[split..];
        let frac = if frac.is_empty() { "0" } else { frac };
        format!("{sign}{}.{frac}", &digits[..split])
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{digits}")
    }
}

/// A real written as a 17-significant-digit JSON number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mass17(pub f64);

impl Serialize for Mass17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom("non-finite mass"));
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mass17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(Mass17)
    }
}

/// A real written as a 17-significant-digit JSON string, so clients that
/// parse JSON numbers as doubles still see the exact engine value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Text17(pub f64);

impl Serialize for Text17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom("non-finite value"));
        }
        s.serialize_str(&sig17(self.0))
    }
}

impl<'de> Deserialize<'de> for Text17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            Num(f64),
            Text(String),
        }
        match Either::deserialize(d)? {
            Either::Num(x) => Ok(Text17(x)),
            Either::Text(t) => t
                .parse::<f64>()
                .map(Text17)
                .map_err(|_| de::Error::custom(format!("not a number: {t:?}"))),
        }
    }
}

impl fmt::Display for Text17 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&sig17(self.0))
    }
}

macro_rules! str_enum_serde {
    ($module:ident, $ty:ty, $what:literal) => {
        pub mod $module {
            use super::*;

            pub fn serialize<S: Serializer>(v: &$ty, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(v.as_str())
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<$ty, D::Error> {
                let text = String::deserialize(d)?;
                text.parse::<$ty>()
                    .map_err(|_| de::Error::custom(format!(concat!("unknown ", $what, " {:?}"), text)))
            }
        }
    };
}

str_enum_serde!(rule, FusionRule, "fusion rule");
str_enum_serde!(confidence, Confidence, "confidence");
str_enum_serde!(entry_path, EntryPath, "entry path");

/// Optional fusion rule, for records where the caller may omit it.
pub mod opt_rule {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<FusionRule>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(r.as_str()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<FusionRule>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| {
                t.parse::<FusionRule>()
                    .map_err(|_| de::Error::custom(format!("unknown fusion rule {t:?}")))
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(sig17(0.8), "0.80000000000000004");
        assert_eq!(sig17(1.0), "1.0000000000000000");
        assert_eq!(sig17(0.0), "0.0000000000000000");
        assert_eq!(sig17(-2.5), "-2.5000000000000000");
        assert_eq!(sig17(1e-9), "1.0000000000000001e-9");
        assert_eq!(sig17(0.0042), "0.0041999999999999997");
        assert_eq!(sig17(123456.0), "123456.00000000000");
    }

    #[test]
    fn round_trips_exactly() {
        for x in [0.1, 0.2 + 0.1, 1.0 / 3.0, 0.9999, 1e-300, 5e-324, 12345.678, f64::MAX] {
            let back: f64 = sig17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x}");
            let json = serde_json::to_string(&Mass17(x)).unwrap();
            let parsed: Mass17 = serde_json::from_str(&json).unwrap();
            assert_eq!(parsed.0.to_bits(), x.to_bits());
            let json = serde_json::to_string(&Text17(x)).unwrap();
            let parsed: Text17 = serde_json::from_str(&json).unwrap();
            assert_eq!(parsed.0.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn text_accepts_numbers_too() {
        let t: Text17 = serde_json::from_str("0.25").unwrap();
        assert_eq!(t.0, 0.25);
        assert!(serde_json::from_str::<Text17>("\"abc\"").is_err());
    }
}
