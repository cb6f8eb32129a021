//! Text and JSON input forms for Laurent polynomials.
//!
//! Text grammar (whitespace insignificant):
//!
//! ```text
//! expr     := sign? term (sign term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := integer | name ('^' exponent)?
//! exponent := sign? integer | '(' sign? integer ')'
//! ```
//!
//! A numeric `p/q` is read as a rational coefficient; dividing by a
//! variable power negates its exponent.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::laurent::ExponentVector;
use crate::scalar::{format_rational, parse_rational};
use crate::{Laurent, Rational};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            d if d.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((Tok::Int(text[start..i].parse().unwrap()), start));
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Name(text[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(ParseError::Syntax {
                    pos: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

/// Variable names appearing in `text`, in index order.
///
/// Names sharing a prefix followed by a positive index (`u1`, `u3`) are read
/// as `u1..u_max`; any other set of names is sorted alphabetically.
pub fn infer_variables(text: &str) -> Result<Vec<String>, ParseError> {
    let mut names: Vec<String> = tokenize(text)?
        .into_iter()
        .filter_map(|(t, _)| match t {
            Tok::Name(n) => Some(n),
            _ => None,
        })
        .collect();
    names.sort();
    names.dedup();
    let indexed: Option<Vec<(String, usize)>> = names
        .iter()
        .map(|n| {
            let split = n.find(|c: char| c.is_ascii_digit())?;
            let (prefix, digits) = n.split_at(split);
            if prefix.is_empty() || digits.starts_with('0') {
                return None;
            }
            Some((prefix.to_string(), digits.parse().ok()?))
        })
        .collect();
    if let Some(indexed) = indexed {
        if let Some((prefix, _)) = indexed.first() {
            if indexed.iter().all(|(p, _)| p == prefix) {
                let max = indexed.iter().map(|(_, k)| *k).max().unwrap();
                return Ok((1..=max).map(|k| format!("{prefix}{k}")).collect());
            }
        }
    }
    Ok(names)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            pos: self.here(),
            message: message.into(),
        }
    }

    fn expr(&mut self) -> Result<Laurent, ParseError> {
        let mut poly = Laurent::zero(self.vars.len());
        let mut sign = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                -1
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let (coeff, exp) = self.term()?;
            let coeff = if sign < 0 { -coeff } else { coeff };
            poly.add_term(exp, coeff);
            match self.peek() {
                Some(Tok::Plus) => sign = 1,
                Some(Tok::Minus) => sign = -1,
                None => break,
                Some(_) => return Err(self.syntax("expected `+`, `-` or end of input")),
            }
            self.pos += 1;
        }
        Ok(poly)
    }

    fn term(&mut self) -> Result<(Rational, ExponentVector), ParseError> {
        let mut coeff = Rational::one();
        let mut exp = vec![0i32; self.vars.len()];
        let mut divide = false;
        loop {
            let at = self.here();
            match self.peek().cloned() {
                Some(Tok::Int(v)) => {
                    self.pos += 1;
                    if divide {
                        if v.is_zero() {
                            return Err(ParseError::Syntax {
                                pos: at,
                                message: "division by zero".into(),
                            });
                        }
                        coeff /= Rational::from_integer(v);
                    } else {
                        coeff *= Rational::from_integer(v);
                    }
                }
                Some(Tok::Name(name)) => {
                    self.pos += 1;
                    let idx = self
                        .vars
                        .iter()
                        .position(|v| *v == name)
                        .ok_or(ParseError::UnknownVariable { name, pos: at })?;
                    let mut e = 1i64;
                    if self.peek() == Some(&Tok::Caret) {
                        self.pos += 1;
                        e = self.exponent()?;
                    }
                    if divide {
                        e = -e;
                    }
                    let total = exp[idx] as i64 + e;
                    exp[idx] = i32::try_from(total).map_err(|_| ParseError::ExponentOverflow { pos: at })?;
                }
                _ => return Err(self.syntax("expected a number or a variable")),
            }
            match self.peek() {
                Some(Tok::Star) => divide = false,
                Some(Tok::Slash) => divide = true,
                _ => break,
            }
            self.pos += 1;
        }
        Ok((coeff, ExponentVector::new(exp)))
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let paren = self.peek() == Some(&Tok::LParen);
        if paren {
            self.pos += 1;
        }
        let neg = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                true
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let at = self.here();
        let v = match self.peek().cloned() {
            Some(Tok::Int(v)) => v,
            _ => return Err(self.syntax("expected an integer exponent")),
        };
        self.pos += 1;
        let v = if neg { -v } else { v };
        let v: i32 = i32::try_from(v).map_err(|_| ParseError::ExponentOverflow { pos: at })?;
        if paren {
            if self.peek() != Some(&Tok::RParen) {
                return Err(self.syntax("expected `)`"));
            }
            self.pos += 1;
        }
        Ok(v as i64)
    }
}

/// Parses an expression over the given variables (inferred when `None`).
pub fn parse_laurent(text: &str, vars: Option<&[String]>) -> Result<Laurent, ParseError> {
    let inferred;
    let vars = match vars {
        Some(v) => v,
        None => {
            inferred = infer_variables(text)?;
            &inferred
        }
    };
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError::Syntax {
            pos: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        vars,
    };
    p.expr()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub coeff: String,
    pub exp: Vec<i32>,
}

/// `{"vars": n, "terms": [{"coeff": "p/q", "exp": [..]}, ..]}`
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolynomialJson {
    pub vars: usize,
    pub terms: Vec<TermJson>,
}

impl PolynomialJson {
    /// Terms are listed in descending graded-lexicographic order.
    pub fn from_polynomial(f: &Laurent) -> Self {
        PolynomialJson {
            vars: f.arity(),
            terms: f
                .terms()
                .rev()
                .map(|(e, c)| TermJson {
                    coeff: format_rational(c),
                    exp: e.entries().to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_polynomial(&self) -> Result<Laurent, ParseError> {
        let mut f = Laurent::zero(self.vars);
        for (i, t) in self.terms.iter().enumerate() {
            if t.exp.len() != self.vars {
                return Err(ParseError::Json(format!(
                    "term {i}: exponent has {} entries, expected {}",
                    t.exp.len(),
                    self.vars
                )));
            }
            let c = parse_rational(&t.coeff).map_err(|e| ParseError::Json(format!("term {i}: {e}")))?;
            f.add_term(ExponentVector::new(t.exp.clone()), c);
        }
        Ok(f)
    }
}

pub fn laurent_from_json(text: &str) -> Result<Laurent, ParseError> {
    let j: PolynomialJson = serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
    j.to_polynomial()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn ev(v: &[i32]) -> ExponentVector {
        ExponentVector::new(v.to_vec())
    }

    #[test]
    fn mirror_of_the_plane() {
        let f = parse_laurent("u1 + u2 + u1^-1*u2^-1", None).unwrap();
        assert_eq!(f.arity(), 2);
        assert_eq!(f.len(), 3);
        for e in [[1, 0], [0, 1], [-1, -1]] {
            assert_eq!(f.coeff(&ev(&e)), Rational::from_i64(1));
        }
    }

    #[test]
    fn zero_takes_arity_from_names() {
        let f = parse_laurent("0", Some(&names(&["u", "v"]))).unwrap();
        assert!(f.is_zero());
        assert_eq!(f.arity(), 2);
    }

    #[test]
    fn cancellation_is_canonical() {
        let f = parse_laurent("3/2*u^2 - 3/2*u^2 + v", Some(&names(&["u", "v"]))).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.coeff(&ev(&[0, 1])), Rational::from_i64(1));
    }

    #[test]
    fn division_and_parenthesised_exponents() {
        let a = parse_laurent("u + v + 1/(u*v)", Some(&names(&["u", "v"])));
        assert!(a.is_err(), "parenthesised denominators are not part of the grammar");
        let b = parse_laurent("u + v + 1/u/v", Some(&names(&["u", "v"]))).unwrap();
        let c = parse_laurent("u+v+u^(-1)*v^-1", Some(&names(&["u", "v"]))).unwrap();
        assert_eq!(b, c);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_laurent("u1 + * u2", None) {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        match parse_laurent("u + w", Some(&names(&["u"]))) {
            Err(ParseError::UnknownVariable { name, pos }) => {
                assert_eq!(name, "w");
                assert_eq!(pos, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_laurent("u^99999999999", None),
            Err(ParseError::ExponentOverflow { .. })
        ));
        assert!(matches!(
            parse_laurent("u^2147483647*u", None),
            Err(ParseError::ExponentOverflow { .. })
        ));
    }

    #[test]
    fn inferred_variable_order() {
        assert_eq!(infer_variables("u2 + u1^-1").unwrap(), names(&["u1", "u2"]));
        assert_eq!(infer_variables("y + x").unwrap(), names(&["x", "y"]));
        assert_eq!(infer_variables("u3").unwrap(), names(&["u1", "u2", "u3"]));
    }

    #[test]
    fn json_form() {
        let f = parse_laurent("u1 - 1/2*u2^-3 + 4", None).unwrap();
        let j = PolynomialJson::from_polynomial(&f);
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(laurent_from_json(&text).unwrap(), f);
        assert!(text.contains("\"-1/2\""));
        let bad = r#"{"vars": 2, "terms": [{"coeff": "1", "exp": [1]}]}"#;
        assert!(matches!(laurent_from_json(bad), Err(ParseError::Json(_))));
    }
}
