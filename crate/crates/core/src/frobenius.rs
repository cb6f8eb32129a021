//! Initial data of the canonical Frobenius structure at the base point: the
//! primitive form du/u, the exponents, the coefficients of [fω°] and the
//! Euler field `E = Σ [(1 + α_min − α(k)) t_k + c_k] ∂_k`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::birkhoff::BirkhoffSolution;
use crate::brieskorn::{ConnectionPencil, SpectrumData};
use crate::error::AnalysisError;
use crate::jacobian::JacobianAlgebra;
use crate::scalar::{format_rational, Scalar};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrimitiveRecord {
    pub index: usize,
    #[serde(serialize_with = "ser_rational")]
    pub alpha_min: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrobeniusInitialData {
    pub primitive_index: usize,
    #[serde(serialize_with = "ser_rational")]
    pub alpha_min: Rational,
    #[serde(serialize_with = "ser_rationals")]
    pub exponents: Vec<Rational>,
    #[serde(serialize_with = "ser_rationals")]
    pub c: Vec<Rational>,
    #[serde(rename = "D", serialize_with = "ser_rational")]
    pub homogeneity: Rational,
    pub euler_field: String,
    /// False when the pencil could not be brought to Birkhoff form and the
    /// data was read from the unnormalized pencil.
    pub pencil_normalized: bool,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

fn ser_rationals<S: serde::Serializer>(qs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(qs.iter().map(format_rational))
}

/// Confirms that du/u is basis entry 0, spans N₀G₀, and that 0 is a spectral
/// number of multiplicity one.
pub fn canonical_primitive(alg: &JacobianAlgebra, spectra: &SpectrumData) -> Result<PrimitiveRecord, AnalysisError> {
    let basis = alg.basis();
    if basis.entries.first().map(|e| e.is_zero()) != Some(true) {
        return Err(AnalysisError::Internal("basis entry 0 is not du/u".into()));
    }
    if alg.piece(0)?.dim() != 1 {
        return Err(AnalysisError::Internal("dim N₀G₀ ≠ 1".into()));
    }
    match spectra.pairs.first() {
        Some((a, 1)) if a.is_zero() => Ok(PrimitiveRecord {
            index: 0,
            alpha_min: Rational::zero(),
        }),
        _ => Err(AnalysisError::Internal("α_min is not 0 with multiplicity 1".into())),
    }
}

/// Euler-field data. With a Birkhoff solution, c is read from column 0 of
/// A_0 (the good basis ε'); otherwise from column 0 of B_0 and the result is
/// flagged as unnormalized. Exponents are Newton degrees in both cases.
pub fn euler_field(
    alg: &JacobianAlgebra,
    spectra: &SpectrumData,
    pencil: &ConnectionPencil,
    solution: Option<&BirkhoffSolution>,
) -> Result<FrobeniusInitialData, AnalysisError> {
    let prim = canonical_primitive(alg, spectra)?;
    let b0 = pencil.coefficient(0);
    let (c, exponents) = match solution {
        Some(sol) => {
            let unipotent = sol.gauge.matrices[0] == crate::QMatrix::identity(b0.rows());
            if unipotent && sol.a0.column(prim.index) != b0.column(prim.index) {
                return Err(AnalysisError::Internal(
                    "A_0 and B_0 disagree on ω° although P(0) = I".into(),
                ));
            }
            (sol.a0.column(prim.index), sol.degrees.clone())
        }
        None => (b0.column(prim.index), alg.basis().degrees()),
    };
    let n = Rational::from_i64(alg.arity() as i64);
    let homogeneity = Rational::from_i64(2) * &prim.alpha_min + Rational::from_i64(2) - n;
    let weights: Vec<Rational> = exponents
        .iter()
        .map(|a| Rational::one() + &prim.alpha_min - a)
        .collect();
    Ok(FrobeniusInitialData {
        primitive_index: prim.index,
        alpha_min: prim.alpha_min,
        euler_field: render_euler(&weights, &c),
        exponents,
        c,
        homogeneity,
        pencil_normalized: solution.is_some(),
    })
}

const MINUS: char = '\u{2212}';

fn subscript(k: usize) -> String {
    k.to_string()
        .chars()
        .map(|d| char::from_u32(0x2080 + d.to_digit(10).unwrap()).unwrap())
        .collect()
}

/// `a·t_k` with the sign split off.
fn linear_part(a: &Rational, k: usize) -> (bool, String) {
    let neg = *a < Rational::zero();
    let mag = if neg { -a.clone() } else { a.clone() };
    let t = format!("t{}", subscript(k));
    if mag.is_one() {
        (neg, t)
    } else {
        (neg, format!("{}·{t}", format_rational(&mag)))
    }
}

/// Renders `Σ (w_k t_k + c_k) ∂_k` such as `t₀∂₀ + 3∂₁ − t₂∂₂`.
pub fn render_euler(weights: &[Rational], c: &[Rational]) -> String {
    let mut pieces: Vec<(bool, String)> = Vec::new();
    for (k, (w, ck)) in weights.iter().zip(c).enumerate() {
        let d = format!("∂{}", subscript(k));
        match (w.is_zero(), ck.is_zero()) {
            (true, true) => {}
            (false, true) => {
                let (neg, body) = linear_part(w, k);
                pieces.push((neg, format!("{body}{d}")));
            }
            (true, false) => {
                let neg = *ck < Rational::zero();
                let mag = if neg { -ck.clone() } else { ck.clone() };
                pieces.push((neg, format!("{}{d}", format_rational(&mag))));
            }
            (false, false) => {
                let (wneg, body) = linear_part(w, k);
                let cneg = *ck < Rational::zero();
                let mag = if cneg { -ck.clone() } else { ck.clone() };
                let lead = if wneg { format!("{MINUS}{body}") } else { body };
                let op = if cneg { MINUS } else { '+' };
                pieces.push((false, format!("({lead} {op} {}){d}", format_rational(&mag))));
            }
        }
    }
    if pieces.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (neg, body)) in pieces.into_iter().enumerate() {
        match (i, neg) {
            (0, false) => out.push_str(&body),
            (0, true) => {
                out.push(MINUS);
                out.push_str(&body);
            }
            (_, false) => out.push_str(&format!(" + {body}")),
            (_, true) => out.push_str(&format!(" {MINUS} {body}")),
        }
    }
    out
}

impl FrobeniusInitialData {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}
