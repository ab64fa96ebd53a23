//! Complex-number literals: `1.5`, `-0.5i`, `1-2i`, `i`, or `re,im`.

use std::fmt;
use std::str::FromStr;

use kerrcdo_core::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A complex parameter that reads and writes as a string literal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cplx(pub Complex64);

impl Cplx {
    pub fn new(re: f64, im: f64) -> Self {
        Cplx(Complex64::new(re, im))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cannot parse complex number `{0}`")]
pub struct ParseComplexError(pub String);

fn parse_real(s: &str, whole: &str) -> Result<f64, ParseComplexError> {
    let v: f64 = s.trim().parse().map_err(|_| ParseComplexError(whole.to_string()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ParseComplexError(whole.to_string()))
    }
}

fn parse_imag_coefficient(s: &str, whole: &str) -> Result<f64, ParseComplexError> {
    match s.trim() {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        t => parse_real(t, whole),
    }
}

impl FromStr for Cplx {
    type Err = ParseComplexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(ParseComplexError(s.to_string()));
        }
        if let Some((re, im)) = t.split_once(',') {
            return Ok(Cplx::new(parse_real(re, s)?, parse_real(im, s)?));
        }
        let Some(body) = t.strip_suffix(['i', 'j']) else {
            return Ok(Cplx::new(parse_real(&t, s)?, 0.0));
        };
        // Split at the last sign that is not an exponent sign.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            None => Ok(Cplx::new(0.0, parse_imag_coefficient(body, s)?)),
            Some(k) => Ok(Cplx::new(parse_real(&body[..k], s)?, parse_imag_coefficient(&body[k..], s)?)),
        }
    }
}

impl fmt::Display for Cplx {
    /// Writes `re,im` with shortest round-trip floats.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0.re, self.0.im)
    }
}

impl Serialize for Cplx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Cplx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Pair([f64; 2]),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Real(re) => Ok(Cplx::new(re, 0.0)),
            Repr::Pair([re, im]) => Ok(Cplx::new(re, im)),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
