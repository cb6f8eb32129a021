//! The Brieskorn lattice G₀ = Ω^n[θ]/(θd − df∧)Ω^{n−1}[θ] in coordinates
//! over the adapted basis, the action of t = θ²∂_θ, and the spectrum.
//!
//! The defining relation used throughout is `[g·ξ_i f] = θ[ξ_i g]`.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::AnalysisError;
use crate::jacobian::{AdaptedBasis, JacobianAlgebra};
use crate::linalg::UniPoly;
use crate::scalar::{format_rational, Scalar};
use crate::{Laurent, QMatrix, Rational};

pub type ThetaPoly = UniPoly<Rational>;

/// Coordinates `(a_1(θ), …, a_μ(θ))` of `Σ a_i(θ)[ω_i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BrieskornElement {
    pub coords: Vec<ThetaPoly>,
}

impl BrieskornElement {
    pub fn zero(mu: usize) -> Self {
        BrieskornElement {
            coords: vec![ThetaPoly::zero(); mu],
        }
    }

    pub fn basis_vector(mu: usize, i: usize) -> Self {
        let mut e = Self::zero(mu);
        e.coords[i] = ThetaPoly::new(vec![Rational::one()]);
        e
    }

    /// Builds an element from dense coefficient tables `c[i][k]` of θ^k.
    pub fn from_dense(c: Vec<Vec<Rational>>) -> Self {
        BrieskornElement {
            coords: c.into_iter().map(ThetaPoly::new).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(ThetaPoly::is_zero)
    }

    /// Coefficient of θ^k in coordinate i.
    pub fn coeff(&self, i: usize, k: usize) -> Rational {
        self.coords[i].coeffs().get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn theta_degree(&self) -> Option<usize> {
        self.coords.iter().filter_map(ThetaPoly::degree).max()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add_ref(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.sub_ref(b))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        BrieskornElement {
            coords: self
                .coords
                .iter()
                .map(|p| ThetaPoly::new(p.coeffs().iter().map(|x| x.mul_ref(c)).collect()))
                .collect(),
        }
    }

    /// Multiplication by θ^k.
    pub fn shift_theta(&self, k: usize) -> Self {
        BrieskornElement {
            coords: self
                .coords
                .iter()
                .map(|p| {
                    if p.is_zero() {
                        return p.clone();
                    }
                    let mut c = vec![Rational::zero(); k];
                    c.extend(p.coeffs().iter().cloned());
                    ThetaPoly::new(c)
                })
                .collect(),
        }
    }

    /// Whether every coordinate is divisible by θ.
    pub fn divisible_by_theta(&self) -> bool {
        self.coords.iter().all(|p| p.coeffs().first().is_none_or(Zero::is_zero))
    }

    /// `x/θ`, assuming [`Self::divisible_by_theta`].
    pub fn theta_quotient(&self) -> Self {
        BrieskornElement {
            coords: self
                .coords
                .iter()
                .map(|p| ThetaPoly::new(p.coeffs().iter().skip(1).cloned().collect()))
                .collect(),
        }
    }

    fn zip(&self, other: &Self, op: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        assert_eq!(self.len(), other.len());
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                let n = a.coeffs().len().max(b.coeffs().len());
                let zero = Rational::zero();
                ThetaPoly::new(
                    (0..n)
                        .map(|k| op(a.coeffs().get(k).unwrap_or(&zero), b.coeffs().get(k).unwrap_or(&zero)))
                        .collect(),
                )
            })
            .collect();
        BrieskornElement { coords }
    }
}

/// Reduces `Σ θ^k [ω_k]` to adapted-basis coordinates. Each `ω_k` is the
/// coefficient of du/u.
pub fn reduce(alg: &JacobianAlgebra, input: &[(usize, Laurent)]) -> Result<BrieskornElement, AnalysisError> {
    let mu = alg.basis().len();
    let mut dense: Vec<Vec<Rational>> = vec![Vec::new(); mu];
    let mut work: Vec<(usize, Laurent)> = input.iter().rev().cloned().collect();
    while let Some((k, omega)) = work.pop() {
        if omega.is_zero() {
            continue;
        }
        let w = alg.divide(&omega)?;
        for (i, a) in w.coefficients.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if dense[i].len() <= k {
                dense[i].resize(k + 1, Rational::zero());
            }
            dense[i][k] = dense[i][k].add_ref(a);
        }
        work.push((k + 1, w.deta));
    }
    Ok(BrieskornElement::from_dense(dense))
}

pub fn reduce_form(alg: &JacobianAlgebra, omega: &Laurent) -> Result<BrieskornElement, AnalysisError> {
    reduce(alg, &[(0, omega.clone())])
}

/// `max_i (deg a_i + α_i)` over nonzero coordinates; `None` for zero.
pub fn newton_order(x: &BrieskornElement, basis: &AdaptedBasis) -> Option<Rational> {
    x.coords
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.degree().map(|k| Rational::from_i64(k as i64) + basis.degree(i)))
        .max()
}

/// `t·ε = ε·(B_0 + θB_1 + … + θ^m B_m)`; column i holds the coordinates of `t·ε_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionPencil {
    pub matrices: Vec<QMatrix>,
}

impl ConnectionPencil {
    pub fn size(&self) -> usize {
        self.matrices.first().map_or(0, QMatrix::rows)
    }

    pub fn degree(&self) -> usize {
        self.matrices.len().saturating_sub(1)
    }

    /// `B_k`, zero beyond the top degree.
    pub fn coefficient(&self, k: usize) -> QMatrix {
        self.matrices
            .get(k)
            .cloned()
            .unwrap_or_else(|| QMatrix::zeros(self.size(), self.size()))
    }

    /// Action of t on an arbitrary element, using `t(θ^k x) = kθ^{k+1}x + θ^k t(x)`.
    pub fn apply(&self, x: &BrieskornElement) -> BrieskornElement {
        let mu = self.size();
        let mut out = BrieskornElement::zero(mu);
        for (i, p) in x.coords.iter().enumerate() {
            for (k, c) in p.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let own = BrieskornElement::basis_vector(mu, i)
                    .scale(&(c.mul_ref(&Rational::from_i64(k as i64))))
                    .shift_theta(k + 1);
                out = out.add(&own);
                let mut col = vec![Vec::new(); mu];
                for (deg, b) in self.matrices.iter().enumerate() {
                    for (j, cj) in col.iter_mut().enumerate() {
                        cj.resize(deg + k + 1, Rational::zero());
                        cj[deg + k] = b[(j, i)].mul_ref(c);
                    }
                }
                out = out.add(&BrieskornElement::from_dense(col));
            }
        }
        out
    }

    /// Whether `(B_k)_{ji} = 0` whenever `α_j + k > α_i + 1`.
    pub fn respects_filtration(&self, basis: &AdaptedBasis) -> bool {
        let d = basis.scale;
        self.matrices.iter().enumerate().all(|(k, b)| {
            (0..b.rows()).all(|j| {
                (0..b.cols()).all(|i| b[(j, i)].is_zero() || basis.levels[j] + k as i64 * d <= basis.levels[i] + d)
            })
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.matrices.iter().map(matrix_json).collect())
    }
}

pub(crate) fn matrix_json(m: &QMatrix) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.rows())
            .map(|r| {
                serde_json::Value::Array(
                    m.row(r)
                        .iter()
                        .map(|x| serde_json::Value::String(format_rational(x)))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Column i is the reduction of `f·ω_i`.
pub fn t_action_pencil(alg: &JacobianAlgebra) -> Result<ConnectionPencil, AnalysisError> {
    let basis = alg.basis();
    let mu = basis.len();
    let f = alg.polynomial();
    let cols: Vec<BrieskornElement> = basis
        .entries
        .iter()
        .map(|m| reduce_form(alg, &f.shift(m)))
        .collect::<Result<_, _>>()?;
    let top = cols
        .iter()
        .filter_map(BrieskornElement::theta_degree)
        .max()
        .unwrap_or(0);
    let cap = alg.arity() + 1;
    if top > cap {
        return Err(AnalysisError::Internal(format!(
            "pencil degree {top} exceeds n + 1 = {cap}"
        )));
    }
    let matrices = (0..=top)
        .map(|k| {
            let mut b = QMatrix::zeros(mu, mu);
            for (i, c) in cols.iter().enumerate() {
                for j in 0..mu {
                    b[(j, i)] = c.coeff(j, k);
                }
            }
            b
        })
        .collect();
    let pencil = ConnectionPencil { matrices };
    if !pencil.respects_filtration(basis) {
        return Err(AnalysisError::Internal(
            "pencil raises the Newton order by more than 1".into(),
        ));
    }
    Ok(pencil)
}

/// Spectral numbers with multiplicities, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumData {
    pub pairs: Vec<(Rational, usize)>,
}

impl SpectrumData {
    pub fn mu(&self) -> usize {
        self.pairs.iter().map(|(_, n)| n).sum()
    }

    /// The spectrum as a sorted multiset.
    pub fn multiset(&self) -> Vec<Rational> {
        self.pairs
            .iter()
            .flat_map(|(b, n)| std::iter::repeat_n(b.clone(), *n))
            .collect()
    }

    /// `SP(S) = Π (S + β)^{ν_β}`.
    pub fn spectral_polynomial(&self) -> UniPoly<Rational> {
        let neg: Vec<Rational> = self.multiset().iter().map(|b| -b.clone()).collect();
        UniPoly::from_roots(&neg)
    }

    /// Factored form such as `S*(S+1/2)^2*(S+1)`.
    pub fn spectral_polynomial_text(&self) -> String {
        self.pairs
            .iter()
            .map(|(b, n)| {
                let base = if b.is_zero() {
                    "S".to_string()
                } else if *b > Rational::zero() {
                    format!("(S+{})", format_rational(b))
                } else {
                    format!("(S-{})", format_rational(&-b.clone()))
                };
                if *n > 1 {
                    format!("{base}^{n}")
                } else {
                    base
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "pairs": self.pairs.iter().map(|(b, n)| serde_json::json!([format_rational(b), n])).collect::<Vec<_>>(),
            "spectral_polynomial": self.spectral_polynomial_text(),
            "spectral_polynomial_coefficients": self.spectral_polynomial().coeffs().iter().map(format_rational).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for SpectrumData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (b, n) in &self.pairs {
            writeln!(f, "{}: {n}", format_rational(b))?;
        }
        write!(f, "SP(S) = {}", self.spectral_polynomial_text())
    }
}

/// ν_β = dim E_β, with the total-mass, range, symmetry and ν_0 = 1 checks.
pub fn spectrum(alg: &JacobianAlgebra) -> Result<SpectrumData, AnalysisError> {
    let pairs = alg.graded_dims();
    let data = SpectrumData { pairs };
    let n = Rational::from_i64(alg.arity() as i64);
    let suspect = |m: String| Err(AnalysisError::DegeneracySuspected(m));
    if data.mu() as u64 != alg.milnor_number() {
        return suspect(format!(
            "spectrum has mass {} but μ = {}",
            data.mu(),
            alg.milnor_number()
        ));
    }
    if data.pairs.first() != Some(&(Rational::zero(), 1)) {
        return suspect("smallest spectral number is not 0 with multiplicity 1".into());
    }
    for (b, m) in &data.pairs {
        if *b < Rational::zero() || *b > n {
            return suspect(format!("spectral number {b} outside [0, {n}]"));
        }
        let mirror = n.clone() - b;
        let mm = data.pairs.iter().find(|(c, _)| *c == mirror).map_or(0, |(_, k)| *k);
        if mm != *m {
            return suspect(format!("ν_{b} = {m} but ν_{mirror} = {mm}"));
        }
    }
    Ok(data)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceReport {
    pub lhs: Rational,
    pub rhs: Rational,
    pub satisfied: bool,
}

/// `(1/μ) Σ (β − n/2)²` against `n/12`.
pub fn variance_report(spectra: &SpectrumData, n: usize) -> VarianceReport {
    let half = Rational::new((n as i64).into(), 2.into());
    let values = spectra.multiset();
    let mu = Rational::from_i64(values.len() as i64);
    let sum: Rational = values
        .iter()
        .map(|b| {
            let x = b - &half;
            &x * &x
        })
        .fold(Rational::zero(), |a, b| a + b);
    let lhs = if values.is_empty() { Rational::zero() } else { sum / mu };
    let rhs = Rational::new((n as i64).into(), 12.into());
    VarianceReport {
        satisfied: lhs >= rhs,
        lhs,
        rhs,
    }
}

/// Checks, after multiplying by θ to stay inside G₀,
/// `−t[g] + θφ[g] + [(f − ξ_σf)g] + θ[ξ_σg − φg] = 0` with φ = φ_σ(g),
/// ξ_σ = L_σ(u∂_u), and `t[g]` computed from the pencil applied to the
/// coordinates of g.
pub fn check_phig(
    alg: &JacobianAlgebra,
    pencil: &ConnectionPencil,
    g: &Laurent,
    sigma: usize,
) -> Result<bool, AnalysisError> {
    let p = alg.polytope();
    let Some(phi) = p.phi_sigma(g, sigma)? else {
        return Ok(true);
    };
    let form = &p.facets()[sigma].coefficients;
    let f = alg.polynomial();
    let x = reduce_form(alg, g)?;
    let tx = pencil.apply(&x);
    let xi_f = f.weighted_log_derivative(form);
    let xi_g = g.weighted_log_derivative(form);
    let a = reduce_form(alg, &(&(f - &xi_f) * g))?;
    let b = reduce_form(alg, &(&xi_g - &g.scale(&phi)))?;
    let total = tx
        .scale(&-Rational::one())
        .add(&x.scale(&phi).shift_theta(1))
        .add(&a)
        .add(&b.shift_theta(1));
    Ok(total.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_laurent;
    use crate::polytope::newton_polytope;

    fn algebra(s: &str) -> JacobianAlgebra {
        let f = parse_laurent(s, None).unwrap();
        let p = newton_polytope(&f).unwrap();
        JacobianAlgebra::new(&f, &p).unwrap()
    }

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn tp(c: &[i64]) -> ThetaPoly {
        ThetaPoly::new(c.iter().map(|&x| q(x)).collect())
    }

    fn one_var(s: &str) -> Laurent {
        parse_laurent(s, Some(&["u".to_string()])).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let a = algebra("u + u^-1");
        assert_eq!(reduce_form(&a, &one_var("1")).unwrap().coords, vec![tp(&[1]), tp(&[])]);
        assert_eq!(
            reduce_form(&a, &one_var("u^2")).unwrap().coords,
            vec![tp(&[1]), tp(&[0, 1])]
        );
        assert!(reduce_form(&a, &one_var("u - u^-1")).unwrap().is_zero());
    }

    #[test]
    fn newton_order_examples() {
        let a = algebra("u + u^-1");
        let b = a.basis();
        assert_eq!(newton_order(&BrieskornElement::basis_vector(2, 0), b), Some(q(0)));
        let x = BrieskornElement {
            coords: vec![tp(&[]), tp(&[0, 1])],
        };
        assert_eq!(newton_order(&x, b), Some(q(2)));
        assert_eq!(newton_order(&BrieskornElement::zero(2), b), None);
    }

    #[test]
    fn pencil_of_the_segment() {
        let a = algebra("u + u^-1");
        let p = t_action_pencil(&a).unwrap();
        assert_eq!(p.matrices.len(), 2);
        assert_eq!(p.matrices[0], QMatrix::from_i64_rows(&[&[0, 2], &[2, 0]]));
        assert_eq!(p.matrices[1], QMatrix::from_i64_rows(&[&[0, 0], &[0, 1]]));
        // t(θ ε_0) = θ t(ε_0) + θ² ε_0
        let e0 = BrieskornElement::basis_vector(2, 0);
        let lhs = p.apply(&e0.shift_theta(1));
        let rhs = p.apply(&e0).shift_theta(1).add(&e0.shift_theta(2));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pencil_of_the_mirror_plane() {
        let a = algebra("u1 + u2 + u1^-1*u2^-1");
        let p = t_action_pencil(&a).unwrap();
        let b0 = &p.matrices[0];
        assert_eq!(b0, &QMatrix::from_i64_rows(&[&[0, 0, 3], &[3, 0, 0], &[0, 3, 0]]));
        assert_eq!(b0.charpoly().coeffs(), &[q(-27), q(0), q(0), q(1)]);
    }

    #[test]
    fn spectrum_examples() {
        let s = spectrum(&algebra("u + u^-1")).unwrap();
        assert_eq!(s.to_string(), "0: 1\n1: 1\nSP(S) = S*(S+1)");
        let s = spectrum(&algebra("u1 + u2 + u1^-1*u2^-1")).unwrap();
        assert_eq!(s.multiset(), vec![q(0), q(1), q(2)]);
        let s = spectrum(&algebra("u^2 + u^-2")).unwrap();
        assert_eq!(s.spectral_polynomial_text(), "S*(S+1/2)^2*(S+1)");
    }

    #[test]
    fn variance_examples() {
        let v = variance_report(
            &SpectrumData {
                pairs: vec![(q(0), 1), (q(1), 1), (q(2), 1)],
            },
            2,
        );
        assert_eq!(
            (v.lhs.clone(), v.rhs.clone(), v.satisfied),
            (
                Rational::new(2.into(), 3.into()),
                Rational::new(1.into(), 6.into()),
                true
            )
        );
        let v = variance_report(
            &SpectrumData {
                pairs: vec![(q(0), 1), (q(1), 1)],
            },
            1,
        );
        assert_eq!(
            (v.lhs.clone(), v.rhs.clone()),
            (Rational::new(1.into(), 4.into()), Rational::new(1.into(), 12.into()))
        );
        let v = variance_report(&SpectrumData { pairs: vec![(q(1), 3)] }, 2);
        assert!(v.lhs.is_zero() && !v.satisfied);
    }

    #[test]
    fn phig_examples() {
        let a = algebra("u + u^-1");
        let p = t_action_pencil(&a).unwrap();
        let sigma = a
            .polytope()
            .facets()
            .iter()
            .position(|f| f.coefficients == vec![q(1)])
            .unwrap();
        assert!(check_phig(&a, &p, &one_var("u"), sigma).unwrap());
        assert!(check_phig(&a, &p, &one_var("1"), sigma).unwrap());

        let b = algebra("u1 + u2 + u1^-1*u2^-1");
        let pb = t_action_pencil(&b).unwrap();
        let sigma = b
            .polytope()
            .facets()
            .iter()
            .position(|f| f.coefficients == vec![q(1), q(1)])
            .unwrap();
        let g = parse_laurent("u1", Some(&["u1".into(), "u2".into()])).unwrap();
        assert!(check_phig(&b, &pb, &g, sigma).unwrap());
    }

    #[test]
    fn phig_rejects_a_wrong_pencil() {
        let a = algebra("u + u^-1");
        let mut p = t_action_pencil(&a).unwrap();
        p.matrices[1][(1, 1)] = q(2);
        let sigma = 0;
        assert!(!check_phig(&a, &p, &one_var("u"), sigma).unwrap());
    }
}
