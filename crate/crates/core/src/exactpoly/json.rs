use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::MultiPoly;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Vec<u32>,
    num: String,
    den: String,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    dim: usize,
    terms: Vec<TermRepr>,
}

impl MultiPoly {
    fn to_repr(&self) -> PolyRepr {
        PolyRepr {
            dim: self.dim(),
            terms: self
                .terms()
                .map(|(e, c)| TermRepr {
                    exp: e.as_slice().to_vec(),
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        }
    }

    fn from_repr(r: PolyRepr) -> Result<MultiPoly> {
        let mut terms = Vec::with_capacity(r.terms.len());
        for t in r.terms {
            let num = BigInt::from_str(&t.num)
                .map_err(|_| Error::InvalidCoefficients(format!("bad numerator {:?}", t.num)))?;
            let den = BigInt::from_str(&t.den)
                .map_err(|_| Error::InvalidCoefficients(format!("bad denominator {:?}", t.den)))?;
            if den == BigInt::from(0) {
                return Err(Error::InvalidCoefficients("zero denominator".into()));
            }
            terms.push((t.exp, BigRational::new(num, den)));
        }
        MultiPoly::from_terms(r.dim, terms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_repr()).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<MultiPoly> {
        MultiPoly::from_repr(serde_json::from_str(s)?)
    }
}

impl Serialize for MultiPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_repr().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(deserializer)?;
        MultiPoly::from_repr(repr).map_err(serde::de::Error::custom)
    }
}
