//! Sparse Laurent polynomials in `n` torus variables.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::AlgebraError;
use crate::scalar::Scalar;

/// Exponent vector `k ∈ ℤⁿ` of a monomial `u^k`.
///
/// Ordered graded-lexicographically: first by the entry sum, then
/// lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExponentVector(Vec<i32>);

impl ExponentVector {
    pub fn new(entries: Vec<i32>) -> Self {
        ExponentVector(entries)
    }

    pub fn zero(arity: usize) -> Self {
        ExponentVector(vec![0; arity])
    }

    /// The exponent of `u_{i+1}`.
    pub fn unit(arity: usize, i: usize) -> Self {
        let mut v = vec![0; arity];
        v[i] = 1;
        ExponentVector(v)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.arity(), other.arity());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_add(*b))
            .collect::<Option<Vec<_>>>()
            .map(ExponentVector)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("exponent overflow")
    }

    pub fn sub(&self, other: &Self) -> Self {
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Self {
        ExponentVector(self.0.iter().map(|a| -a).collect())
    }

    /// Integer pairing with an integral linear form.
    pub fn dot(&self, form: &[i64]) -> i64 {
        self.0.iter().zip(form).map(|(&a, &b)| a as i64 * b).sum()
    }
}

impl Ord for ExponentVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ExponentVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<i32>> for ExponentVector {
    fn from(v: Vec<i32>) -> Self {
        ExponentVector(v)
    }
}

/// A finite sum `Σ a_k u^k` with `k ∈ ℤⁿ`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct LaurentPolynomial<S> {
    arity: usize,
    terms: BTreeMap<ExponentVector, S>,
}

impl<S: Scalar> LaurentPolynomial<S> {
    pub fn zero(arity: usize) -> Self {
        LaurentPolynomial {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: S) -> Self {
        Self::monomial(ExponentVector::zero(arity), c)
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, S::one())
    }

    pub fn monomial(exp: ExponentVector, c: S) -> Self {
        let arity = exp.arity();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        LaurentPolynomial { arity, terms }
    }

    /// Sums repeated exponents and drops zero results.
    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (ExponentVector, S)>) -> Self {
        let mut p = Self::zero(arity);
        for (e, c) in terms {
            assert_eq!(e.arity(), arity, "exponent arity mismatch");
            p.add_term(e, c);
        }
        p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.is_zero())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&ExponentVector, &S)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &ExponentVector> {
        self.terms.keys()
    }

    pub fn coeff(&self, exp: &ExponentVector) -> S {
        self.terms.get(exp).cloned().unwrap_or_else(S::zero)
    }

    pub fn add_term(&mut self, exp: ExponentVector, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(v) => {
                *v = v.add_ref(&c);
                if v.is_zero() {
                    self.terms.remove(&exp);
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    fn check_arity(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.arity != other.arity {
            return Err(AlgebraError::ArityMismatch {
                left: self.arity,
                right: other.arity,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_arity(other)?;
        let mut out = Self::zero(self.arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1.checked_add(e2).ok_or(AlgebraError::ExponentOverflow)?;
                out.add_term(e, c1.mul_ref(c2));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.arity);
        }
        LaurentPolynomial {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v.mul_ref(c))).collect(),
        }
    }

    /// Multiplies by the monomial `u^exp`.
    pub fn shift(&self, exp: &ExponentVector) -> Self {
        LaurentPolynomial {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, v)| (e.add(exp), v.clone())).collect(),
        }
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.arity);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `u_i ∂/∂u_i` applied to `self`, with `i` zero-based.
    pub fn log_derivative(&self, i: usize) -> Result<Self, AlgebraError> {
        if i >= self.arity {
            return Err(AlgebraError::IndexOutOfRange {
                index: i,
                arity: self.arity,
            });
        }
        Ok(self.weighted_log_derivative_int(&ExponentVector::unit(self.arity, i)))
    }

    /// `Σ_i w_i u_i ∂/∂u_i` for integer weights.
    pub fn weighted_log_derivative_int(&self, weights: &ExponentVector) -> Self {
        let w: Vec<i64> = weights.entries().iter().map(|&x| x as i64).collect();
        let mut out = Self::zero(self.arity);
        for (e, c) in &self.terms {
            let k = e.dot(&w);
            if k != 0 {
                out.terms.insert(e.clone(), c.mul_ref(&S::from_i64(k)));
            }
        }
        out
    }

    /// `Σ_i w_i u_i ∂/∂u_i` for scalar weights.
    pub fn weighted_log_derivative(&self, weights: &[S]) -> Self {
        assert_eq!(weights.len(), self.arity);
        let mut out = Self::zero(self.arity);
        for (e, c) in &self.terms {
            let k = e
                .entries()
                .iter()
                .zip(weights)
                .fold(S::zero(), |acc, (&a, w)| acc + S::from_i64(a as i64).mul_ref(w));
            out.add_term(e.clone(), c.mul_ref(&k));
        }
        out
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LaurentPolynomial<T> {
        LaurentPolynomial::from_terms(self.arity, self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> LaurentDisplay<'a, S> {
        LaurentDisplay { poly: self, names }
    }
}

impl<S: Scalar> std::ops::Add for &LaurentPolynomial<S> {
    type Output = LaurentPolynomial<S>;
    fn add(self, rhs: Self) -> LaurentPolynomial<S> {
        self.try_add(rhs).expect("arity mismatch")
    }
}

impl<S: Scalar> std::ops::Sub for &LaurentPolynomial<S> {
    type Output = LaurentPolynomial<S>;
    fn sub(self, rhs: Self) -> LaurentPolynomial<S> {
        self.try_sub(rhs).expect("arity mismatch")
    }
}

impl<S: Scalar> std::ops::Mul for &LaurentPolynomial<S> {
    type Output = LaurentPolynomial<S>;
    fn mul(self, rhs: Self) -> LaurentPolynomial<S> {
        self.try_mul(rhs).expect("arity mismatch")
    }
}

impl<S: Scalar> std::ops::Neg for &LaurentPolynomial<S> {
    type Output = LaurentPolynomial<S>;
    fn neg(self) -> LaurentPolynomial<S> {
        self.scale(&-S::one())
    }
}

/// Default variable names `u1, …, un`.
pub fn default_names(arity: usize) -> Vec<String> {
    (1..=arity).map(|i| format!("u{i}")).collect()
}

pub struct LaurentDisplay<'a, S> {
    poly: &'a LaurentPolynomial<S>,
    names: &'a [String],
}

impl<S: Scalar> fmt::Display for LaurentDisplay<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        // highest graded-lex term first
        for (idx, (e, c)) in self.poly.terms.iter().rev().enumerate() {
            let text = c.to_string();
            let (neg, mag) = match text.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, text),
            };
            match (idx, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let factors: Vec<String> = e
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        self.names[i].clone()
                    } else {
                        format!("{}^{}", self.names[i], k)
                    }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == "1" {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Display for LaurentPolynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_names(self.arity);
        write!(f, "{}", self.display(&names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Laurent;
    use crate::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn mono(e: &[i32], c: i64) -> Laurent {
        Laurent::monomial(ExponentVector::new(e.to_vec()), q(c))
    }

    #[test]
    fn grlex_orders_by_degree_then_lex() {
        let a = ExponentVector::new(vec![-1, -1]);
        let b = ExponentVector::new(vec![0, 1]);
        let c = ExponentVector::new(vec![1, 0]);
        assert!(a < b && b < c);
    }

    #[test]
    fn binomial_square() {
        let f = &mono(&[1], 1) + &mono(&[-1], 1);
        let sq = f.pow(2);
        let expected = Laurent::from_terms(
            1,
            [
                (ExponentVector::new(vec![2]), q(1)),
                (ExponentVector::new(vec![0]), q(2)),
                (ExponentVector::new(vec![-2]), q(1)),
            ],
        );
        assert_eq!(sq, expected);
        assert_eq!(sq.to_string(), "u1^2 + 2 + u1^-2");
    }

    #[test]
    fn multiplication_by_zero_absorbs() {
        let f = &mono(&[1, 0], 3) + &mono(&[0, -1], 2);
        assert!((&f * &Laurent::zero(2)).is_zero());
    }

    #[test]
    fn log_derivative_monomial_rule() {
        let f = &(&mono(&[1, 0], 1) + &mono(&[0, 1], 1)) + &mono(&[-1, -1], 1);
        let d = f.log_derivative(0).unwrap();
        assert_eq!(d, &mono(&[1, 0], 1) - &mono(&[-1, -1], 1));
        assert!(Laurent::constant(2, q(5)).log_derivative(1).unwrap().is_zero());
        assert!(matches!(
            f.log_derivative(2),
            Err(AlgebraError::IndexOutOfRange { index: 2, arity: 2 })
        ));
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let a = Laurent::one(1);
        let b = Laurent::one(2);
        assert!(matches!(a.try_add(&b), Err(AlgebraError::ArityMismatch { .. })));
    }
}
