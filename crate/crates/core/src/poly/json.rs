use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::scalar::{parse_rational, rational_from_f64, rational_to_string};
use crate::Rational;

/// Wire form of a polynomial:
/// `{"n": 3, "degree": 2, "terms": [{"exp": [1, 1, 0], "coef": "1/2"}, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub n: usize,
    pub degree: u32,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coef: CoefJson,
}

/// Coefficients are written as `"p/q"` strings; decimal strings and plain
/// JSON numbers are accepted on input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefJson {
    Text(String),
    Number(f64),
}

impl CoefJson {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            CoefJson::Text(s) => parse_rational(s),
            CoefJson::Number(x) if x.is_finite() => Ok(rational_from_f64(*x)),
            CoefJson::Number(x) => Err(Error::Parse(format!("non-finite coefficient {x}"))),
        }
    }
}

impl From<&MultiPoly<Rational>> for PolyJson {
    fn from(p: &MultiPoly<Rational>) -> Self {
        PolyJson {
            n: p.n(),
            degree: p.degree(),
            terms: p
                .terms()
                .map(|(e, c)| TermJson {
                    exp: e.clone(),
                    coef: CoefJson::Text(rational_to_string(c)),
                })
                .collect(),
        }
    }
}

impl TryFrom<&PolyJson> for MultiPoly<Rational> {
    type Error = Error;
    fn try_from(j: &PolyJson) -> Result<Self> {
        let terms = j
            .terms
            .iter()
            .map(|t| Ok((t.exp.clone(), t.coef.to_rational()?)))
            .collect::<Result<Vec<_>>>()?;
        MultiPoly::from_terms(j.n, j.degree, terms)
    }
}

impl MultiPoly<Rational> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolyJson::from(self)).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: PolyJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        MultiPoly::try_from(&j)
    }
}
