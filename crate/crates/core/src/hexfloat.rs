//! Hexadecimal floating-point text (`0x1.8p+1`) for bit-exact endpoints, and
//! the serde representation of intervals and boxes built on it.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::Box2;
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{0}` as a binary64 endpoint")]
pub struct ParseEndpointError(pub String);

/// Render a finite f64 exactly.
pub fn to_hex(x: f64) -> String {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut digits = format!("{frac:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let esign = if e >= 0 { "+" } else { "-" };
    if digits.is_empty() {
        format!("{sign}0x{lead}p{esign}{}", e.abs())
    } else {
        format!("{sign}0x{lead}.{digits}p{esign}{}", e.abs())
    }
}

/// Parse hex-float or decimal text. Decimal text rounds to nearest.
pub fn parse_endpoint(s: &str) -> Result<f64, ParseEndpointError> {
    let t = s.trim();
    let body = t.trim_start_matches(['-', '+']);
    let v = if body.starts_with("0x") || body.starts_with("0X") {
        hexf_parse::parse_hexf64(t, false).map_err(|_| ParseEndpointError(s.to_string()))?
    } else {
        t.parse::<f64>().map_err(|_| ParseEndpointError(s.to_string()))?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ParseEndpointError(s.to_string()))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EndpointText {
    Text(String),
    Number(f64),
}

fn endpoint<'de, D: Deserializer<'de>>(e: EndpointText) -> Result<f64, D::Error> {
    match e {
        EndpointText::Text(s) => parse_endpoint(&s).map_err(de::Error::custom),
        EndpointText::Number(v) if v.is_finite() => Ok(v),
        EndpointText::Number(v) => Err(de::Error::custom(format!("non-finite endpoint {v}"))),
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [to_hex(self.lo()), to_hex(self.hi())].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [a, b] = <[EndpointText; 2]>::deserialize(d)?;
        let lo = endpoint::<D>(a)?;
        let hi = endpoint::<D>(b)?;
        Interval::new(lo, hi).map_err(de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxRepr {
    x: Interval,
    y: Interval,
}

impl Serialize for Box2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BoxRepr {
            x: self.x,
            y: self.y,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Box2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = BoxRepr::deserialize(d)?;
        Ok(Box2::new(r.x, r.y))
    }
}

/// Serde adapter for a bare f64 stored as hex text.
pub mod hex_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_hex(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        endpoint::<D>(EndpointText::deserialize(d)?)
    }
}
