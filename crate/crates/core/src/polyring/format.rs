//! Text and JSON encodings of [`MultiPoly`].
//!
//! Text: terms in graded-lex order joined by `" + "` / `" - "`, factors
//! joined by `*`, powers written `X^e`, e.g. `A*D^2 + B^2*E - B*C*D`.
//!
//! JSON: `{"vars": [...], "terms": [{"coeff": "<decimal>", "exps": [...]}]}`
//! with coefficients as decimal strings.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::{Monomial, MultiPoly};
use crate::{Error, Result};

impl MultiPoly {
    pub fn to_text(&self) -> String {
        self.to_text_with(self.vars())
    }

    /// Renders with substitute variable names (same length as `vars()`).
    pub fn to_text_with(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars(), "name list length mismatch");
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let abs = c.abs();
            let factors = monomial_factors(m, names);
            if factors.is_empty() {
                out.push_str(&abs.to_string());
            } else {
                if !abs.is_one() {
                    out.push_str(&abs.to_string());
                    out.push('*');
                }
                out.push_str(&factors.join("*"));
            }
        }
        out
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            vars: self.vars().to_vec(),
            terms: self
                .terms()
                .map(|(m, c)| TermJson {
                    coeff: c.to_string(),
                    exps: m.exponents().to_vec(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PolyJson) -> Result<MultiPoly> {
        let vars: Arc<[String]> = json.vars.iter().cloned().collect();
        let terms = json
            .terms
            .iter()
            .map(|t| {
                t.coeff
                    .parse::<BigInt>()
                    .map(|c| (t.exps.clone(), c))
                    .map_err(|e| Error::Parse(format!("coefficient `{}`: {e}", t.coeff)))
            })
            .collect::<Result<Vec<_>>>()?;
        MultiPoly::from_terms(vars, terms)
    }
}

fn monomial_factors(m: &Monomial, names: &[String]) -> Vec<String> {
    m.exponents()
        .iter()
        .zip(names)
        .filter(|(&e, _)| e > 0)
        .map(|(&e, n)| {
            if e == 1 {
                n.clone()
            } else {
                format!("{n}^{e}")
            }
        })
        .collect()
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub vars: Vec<String>,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub exps: Vec<u32>,
}

/// Parses the text format. Accepts `+`/`-` separated terms whose factors
/// are integers or `name[^exp]` joined by `*`; whitespace is ignored.
pub fn parse_poly(text: &str, vars: &Arc<[String]>) -> Result<MultiPoly> {
    let src: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if src.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let mut terms = Vec::new();
    let mut pos = 0;
    while pos < src.len() {
        let mut sign = BigInt::one();
        while pos < src.len() && (src[pos] == '+' || src[pos] == '-') {
            if src[pos] == '-' {
                sign = -sign;
            }
            pos += 1;
        }
        let end = (pos..src.len())
            .find(|&i| src[i] == '+' || src[i] == '-')
            .unwrap_or(src.len());
        if end == pos {
            return Err(Error::Parse(format!("empty term at offset {pos}")));
        }
        let term: String = src[pos..end].iter().collect();
        let (exps, coeff) = parse_term(&term, vars)?;
        terms.push((exps, coeff * sign));
        pos = end;
    }
    MultiPoly::from_terms(vars.clone(), terms)
}

fn parse_term(term: &str, vars: &Arc<[String]>) -> Result<(Vec<u32>, BigInt)> {
    let mut exps = vec![0u32; vars.len()];
    let mut coeff = BigInt::one();
    for factor in term.split('*') {
        if factor.is_empty() {
            return Err(Error::Parse(format!("empty factor in `{term}`")));
        }
        if factor.chars().all(|c| c.is_ascii_digit()) {
            coeff *= factor
                .parse::<BigInt>()
                .map_err(|e| Error::Parse(e.to_string()))?;
            continue;
        }
        let (name, e) = match factor.split_once('^') {
            Some((n, e)) => (
                n,
                e.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?,
            ),
            None => (factor, 1),
        };
        let idx = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::Parse(format!("unknown variable `{name}`")))?;
        exps[idx] += e;
    }
    Ok((exps, coeff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::coefficient_vars;

    fn letters(k: usize) -> Arc<[String]> {
        crate::polyring::display_names(k).into()
    }

    #[test]
    fn text_round_trip() {
        let v = letters(5);
        for s in ["A*D^2 + B^2*E - B*C*D", "-3*A + 7", "0", "2*A*B*C*D*E - 1"] {
            let p = parse_poly(s, &v).unwrap();
            assert_eq!(p.to_text(), s);
        }
    }

    #[test]
    fn json_uses_decimal_strings() {
        let v = coefficient_vars(2);
        let p = parse_poly("123456789012345678901234567890*c0 - c1", &v).unwrap();
        let json = serde_json::to_string(&p.to_json()).unwrap();
        assert_eq!(
            json,
            r#"{"vars":["c0","c1"],"terms":[{"coeff":"123456789012345678901234567890","exps":[1,0]},{"coeff":"-1","exps":[0,1]}]}"#
        );
        let back: PolyJson = serde_json::from_str(&json).unwrap();
        assert_eq!(MultiPoly::from_json(&back).unwrap(), p);
    }

    #[test]
    fn parse_errors() {
        let v = letters(2);
        assert!(parse_poly("A + Z", &v).is_err());
        assert!(parse_poly("A**B", &v).is_err());
        assert!(parse_poly("", &v).is_err());
    }

    #[test]
    fn renamed_output() {
        let p = parse_poly("c0*c3 - c1*c2", &coefficient_vars(4)).unwrap();
        assert_eq!(
            p.to_text_with(&crate::polyring::display_names(4)),
            "A*D - B*C"
        );
    }
}
