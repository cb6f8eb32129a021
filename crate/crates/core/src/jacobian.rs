//! Newton-graded pieces E_α of Ω^n/df∧Ω^{n−1}, the adapted monomial basis,
//! and the graded division algorithms.
//!
//! Forms are identified with their coefficient of du/u = du_1/u_1∧…∧du_n/u_n,
//! so df∧Ω^{n−1} becomes the ideal J(f) = (ξ_1f, …, ξ_nf) with ξ_i = u_i∂/∂u_i.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_traits::Zero;

use crate::error::AnalysisError;
use crate::laurent::ExponentVector;
use crate::linalg::{rank_fraction_free, Rref};
use crate::polytope::NewtonPolytope;
use crate::scalar::Scalar;
use crate::{Laurent, QMatrix, Rational};

/// One Newton level `α = level / d` of the Jacobian quotient.
#[derive(Clone, Debug)]
pub struct GradedPiece {
    /// `d·α`.
    pub level: i64,
    pub alpha: Rational,
    /// Monomials with φ = α, ascending graded-lexicographic.
    pub monomials: Vec<ExponentVector>,
    /// Row labels `(m, i)`: the generator `u^m·ξ_i f` with φ(u^m) = α − 1.
    pub generators: Vec<(ExponentVector, usize)>,
    /// Level-α parts of the generators, one row each.
    pub relations: QMatrix,
    /// Indices into `monomials` of the chosen quotient representatives.
    pub quotient_basis: Vec<usize>,
    echelon: Rref<Rational>,
    index: BTreeMap<ExponentVector, usize>,
}

impl GradedPiece {
    pub fn dim(&self) -> usize {
        self.quotient_basis.len()
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }
}

/// Monomial forms `ω_i = u^{m_i} du/u` whose classes form a graded basis of
/// the Jacobian quotient; entry 0 is always du/u.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedBasis {
    pub entries: Vec<ExponentVector>,
    /// `d·α_i`.
    pub levels: Vec<i64>,
    pub scale: i64,
}

impl AdaptedBasis {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn degree(&self, i: usize) -> Rational {
        Rational::new(self.levels[i].into(), self.scale.into())
    }

    pub fn degrees(&self) -> Vec<Rational> {
        (0..self.len()).map(|i| self.degree(i)).collect()
    }
}

/// Result of dividing ω by J(f): `ω = Σ a_i ω_i + Σ g_i·ξ_i f`.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisionWitness {
    pub coefficients: Vec<Rational>,
    pub cofactors: Vec<Laurent>,
    /// `Σ ξ_i g_i`, the du/u coefficient of dη.
    pub deta: Laurent,
}

pub struct JacobianAlgebra {
    f: Laurent,
    polytope: NewtonPolytope,
    xi_f: Vec<Laurent>,
    mu: u64,
    basis: AdaptedBasis,
    basis_index: BTreeMap<ExponentVector, usize>,
    pieces: Mutex<BTreeMap<i64, Arc<GradedPiece>>>,
}

impl std::fmt::Debug for JacobianAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JacobianAlgebra")
            .field("f", &self.f)
            .field("mu", &self.mu)
            .field("basis", &self.basis)
            .finish()
    }
}

impl JacobianAlgebra {
    /// Computes all graded pieces in [0, n] and the adapted basis; fails with
    /// `DegeneracySuspected` if their dimensions do not add up to μ.
    pub fn new(f: &Laurent, polytope: &NewtonPolytope) -> Result<Self, AnalysisError> {
        let mu = polytope.milnor_number()?;
        if f.arity() != polytope.arity() {
            return Err(crate::AlgebraError::ArityMismatch {
                left: f.arity(),
                right: polytope.arity(),
            }
            .into());
        }
        let xi_f = (0..f.arity()).map(|i| f.log_derivative(i)).collect::<Result<_, _>>()?;
        let mut alg = JacobianAlgebra {
            f: f.clone(),
            polytope: polytope.clone(),
            xi_f,
            mu,
            basis: AdaptedBasis {
                entries: Vec::new(),
                levels: Vec::new(),
                scale: polytope.scale(),
            },
            basis_index: BTreeMap::new(),
            pieces: Mutex::new(BTreeMap::new()),
        };
        let top = polytope.arity() as i64 * polytope.scale();
        for s in 0..=top {
            let piece = alg.piece(s)?;
            for &j in &piece.quotient_basis {
                alg.basis.entries.push(piece.monomials[j].clone());
                alg.basis.levels.push(s);
            }
        }
        let total = alg.basis.len() as u64;
        if total != mu {
            return Err(AnalysisError::DegeneracySuspected(format!(
                "graded dimensions sum to {total} but n!·vol(Γ) = {mu}"
            )));
        }
        alg.basis_index = alg
            .basis
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Ok(alg)
    }

    pub fn polynomial(&self) -> &Laurent {
        &self.f
    }

    pub fn polytope(&self) -> &NewtonPolytope {
        &self.polytope
    }

    pub fn arity(&self) -> usize {
        self.f.arity()
    }

    pub fn milnor_number(&self) -> u64 {
        self.mu
    }

    pub fn basis(&self) -> &AdaptedBasis {
        &self.basis
    }

    /// `ξ_i f` for zero-based `i`.
    pub fn xi_f(&self, i: usize) -> &Laurent {
        &self.xi_f[i]
    }

    /// The graded piece at scaled level `s`, computed on first use.
    pub fn piece(&self, s: i64) -> Result<Arc<GradedPiece>, AnalysisError> {
        if let Some(p) = self.pieces.lock().unwrap().get(&s) {
            return Ok(p.clone());
        }
        let piece = Arc::new(self.build_piece(s)?);
        self.pieces.lock().unwrap().entry(s).or_insert(piece.clone());
        Ok(piece)
    }

    fn build_piece(&self, s: i64) -> Result<GradedPiece, AnalysisError> {
        let p = &self.polytope;
        let d = p.scale();
        let monomials = if s < 0 { Vec::new() } else { p.level_monomials(s) };
        let index: BTreeMap<ExponentVector, usize> =
            monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut generators = Vec::new();
        let mut rows = Vec::new();
        if s >= d {
            for m in p.level_monomials(s - d) {
                for (i, xi) in self.xi_f.iter().enumerate() {
                    let mut row = vec![Rational::zero(); monomials.len()];
                    for (k, c) in xi.terms() {
                        let e = k.add(&m);
                        if let Some(&col) = index.get(&e) {
                            row[col] = c.clone();
                        }
                    }
                    generators.push((m.clone(), i));
                    rows.push(row);
                }
            }
        }
        let relations = if rows.is_empty() {
            QMatrix::zeros(0, monomials.len())
        } else {
            QMatrix::from_rows(rows)
        };
        let echelon = relations.rref();
        if !generators.is_empty() && rank_fraction_free(&relations) != echelon.rank() {
            return Err(AnalysisError::Internal(format!("rank mismatch at level {s}/{d}")));
        }
        let mut quotient_basis = Vec::new();
        let mut pi = 0;
        for c in 0..monomials.len() {
            if pi < echelon.pivots.len() && echelon.pivots[pi] == c {
                pi += 1;
            } else {
                quotient_basis.push(c);
            }
        }
        Ok(GradedPiece {
            level: s,
            alpha: p.level_to_rational(s),
            monomials,
            generators,
            relations,
            quotient_basis,
            echelon,
            index,
        })
    }

    /// All pieces with `E_α ≠ 0`, ascending in α.
    pub fn graded_pieces(&self) -> Result<Vec<Arc<GradedPiece>>, AnalysisError> {
        let mut levels: Vec<i64> = self.basis.levels.clone();
        levels.dedup();
        levels.into_iter().map(|s| self.piece(s)).collect()
    }

    /// `(α, dim E_α)` for every nonzero piece.
    pub fn graded_dims(&self) -> Vec<(Rational, usize)> {
        let mut out: Vec<(Rational, usize)> = Vec::new();
        for (i, &s) in self.basis.levels.iter().enumerate() {
            match out.last_mut() {
                Some((a, n)) if *a == self.basis.degree(i) => *n += 1,
                _ => out.push((self.polytope.level_to_rational(s), 1)),
            }
        }
        out
    }

    /// Graded descent: `ω = Σ a_i ω_i + Σ g_i ξ_i f` with `φ(g_i) ≤ φ(ω) − 1`.
    pub fn divide(&self, omega: &Laurent) -> Result<DivisionWitness, AnalysisError> {
        let n = self.arity();
        if omega.arity() != n {
            return Err(crate::AlgebraError::ArityMismatch {
                left: n,
                right: omega.arity(),
            }
            .into());
        }
        let mut coefficients = vec![Rational::zero(); self.basis.len()];
        let mut cofactors = vec![Laurent::zero(n); n];
        let mut residual = omega.clone();
        while let Some(s) = self.polytope.phi_scaled_poly(&residual) {
            let piece = self.piece(s)?;
            let mut v = vec![Rational::zero(); piece.monomials.len()];
            for (k, c) in residual.terms() {
                if let Some(&col) = piece.index.get(k) {
                    v[col] = c.clone();
                }
            }
            let rr = &piece.echelon;
            let mut subtract = Laurent::zero(n);
            let mut leftover = v.clone();
            for (r, &pc) in rr.pivots.iter().enumerate() {
                let w = &v[pc];
                if w.is_zero() {
                    continue;
                }
                for (c, x) in rr.reduced.row(r).iter().enumerate() {
                    if !x.is_zero() {
                        leftover[c] = leftover[c].sub_ref(&w.mul_ref(x));
                    }
                }
                for (g, t) in rr.transform.row(r).iter().enumerate() {
                    if t.is_zero() {
                        continue;
                    }
                    let (m, i) = &piece.generators[g];
                    let c = w.mul_ref(t);
                    cofactors[*i].add_term(m.clone(), c.clone());
                    subtract = &subtract + &self.xi_f[*i].shift(m).scale(&c);
                }
            }
            for &j in &piece.quotient_basis {
                let a = &leftover[j];
                if a.is_zero() {
                    continue;
                }
                let m = &piece.monomials[j];
                let idx = self.basis_index[m];
                coefficients[idx] = coefficients[idx].add_ref(a);
                subtract.add_term(m.clone(), a.clone());
            }
            residual = &residual - &subtract;
            if self.polytope.phi_scaled_poly(&residual).is_some_and(|t| t >= s) {
                return Err(AnalysisError::Internal(format!(
                    "division did not descend below level {s}/{}",
                    self.polytope.scale()
                )));
            }
        }
        let deta = cofactors
            .iter()
            .enumerate()
            .fold(Laurent::zero(n), |acc, (i, g)| &acc + &g.log_derivative(i).unwrap());
        let witness = DivisionWitness {
            coefficients,
            cofactors,
            deta,
        };
        self.verify_witness(omega, &witness).map_err(AnalysisError::Internal)?;
        Ok(witness)
    }

    /// Cofactors `g_i` with `g = Σ g_i ξ_i f`; fails if g ∉ J(f).
    pub fn kouch_divide(&self, g: &Laurent) -> Result<Vec<Laurent>, AnalysisError> {
        let w = self.divide(g)?;
        if w.coefficients.iter().any(|a| !a.is_zero()) {
            let residue = self.basis_combination(&w.coefficients);
            return Err(AnalysisError::NotInIdeal(residue.to_string()));
        }
        Ok(w.cofactors)
    }

    /// `Σ a_i u^{m_i}`.
    pub fn basis_combination(&self, a: &[Rational]) -> Laurent {
        Laurent::from_terms(self.arity(), self.basis.entries.iter().cloned().zip(a.iter().cloned()))
    }

    /// Reassembly identity and the degree bounds on a witness.
    pub fn verify_witness(&self, omega: &Laurent, w: &DivisionWitness) -> Result<(), String> {
        let p = &self.polytope;
        let d = p.scale();
        let mut rebuilt = self.basis_combination(&w.coefficients);
        for (i, g) in w.cofactors.iter().enumerate() {
            rebuilt = &rebuilt + &(g * &self.xi_f[i]);
        }
        if &rebuilt != omega {
            return Err(format!("reassembly gives {rebuilt}, expected {omega}"));
        }
        let Some(top) = p.phi_scaled_poly(omega) else {
            return if w.cofactors.iter().all(Laurent::is_zero) && w.deta.is_zero() {
                Ok(())
            } else {
                Err("nonzero witness for ω = 0".into())
            };
        };
        for (i, g) in w.cofactors.iter().enumerate() {
            if p.phi_scaled_poly(g).is_some_and(|s| s > top - d) {
                return Err(format!("φ(g_{}) exceeds φ(ω) − 1", i + 1));
            }
            if p.phi_scaled_poly(&(g * &self.xi_f[i])).is_some_and(|s| s > top) {
                return Err(format!("φ(g_{0}·ξ_{0}f) exceeds φ(ω)", i + 1));
            }
        }
        if p.phi_scaled_poly(&w.deta).is_some_and(|s| s > top - d) {
            return Err("φ(dη) exceeds φ(ω) − 1".into());
        }
        for (i, a) in w.coefficients.iter().enumerate() {
            if !a.is_zero() && self.basis.levels[i] > top {
                return Err(format!("a_{i} ≠ 0 above the level of ω"));
            }
        }
        Ok(())
    }
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

    fn poly(s: &str, n: usize) -> Laurent {
        let names: Vec<String> = if n == 1 {
            vec!["u".into()]
        } else {
            (1..=n).map(|i| format!("u{i}")).collect()
        };
        parse_laurent(s, Some(&names)).unwrap()
    }

    fn ev(v: &[i32]) -> ExponentVector {
        ExponentVector::new(v.to_vec())
    }

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn one_variable_basis() {
        let a = algebra("u + u^-1");
        assert_eq!(a.basis().entries, vec![ev(&[0]), ev(&[1])]);
        assert_eq!(a.basis().degrees(), vec![q(0), q(1)]);
        assert_eq!(a.graded_dims(), vec![(q(0), 1), (q(1), 1)]);
    }

    #[test]
    fn mirror_plane_basis() {
        let a = algebra("u1 + u2 + u1^-1*u2^-1");
        assert_eq!(a.basis().entries, vec![ev(&[0, 0]), ev(&[1, 0]), ev(&[2, 0])]);
        assert_eq!(a.graded_dims(), vec![(q(0), 1), (q(1), 1), (q(2), 1)]);
    }

    #[test]
    fn kouch_examples() {
        let a = algebra("u + u^-1");
        let g = a.kouch_divide(&poly("u - u^-1", 1)).unwrap();
        assert_eq!(g, vec![poly("1", 1)]);
        assert_eq!(a.kouch_divide(&Laurent::zero(1)).unwrap(), vec![Laurent::zero(1)]);
        assert!(matches!(
            a.kouch_divide(&poly("u", 1)),
            Err(AnalysisError::NotInIdeal(_))
        ));

        let b = algebra("u1 + u2 + u1^-1*u2^-1");
        let g = b.kouch_divide(&poly("u1 - u1^-1*u2^-1", 2)).unwrap();
        assert_eq!(g, vec![poly("1", 2), Laurent::zero(2)]);
    }

    #[test]
    fn division_examples() {
        let a = algebra("u + u^-1");
        let w = a.divide(&poly("1", 1)).unwrap();
        assert_eq!(w.coefficients, vec![q(1), q(0)]);
        assert!(w.cofactors.iter().all(Laurent::is_zero));

        let w = a.divide(&poly("u^2", 1)).unwrap();
        assert_eq!(w.coefficients, vec![q(1), q(0)]);
        assert_eq!(w.cofactors, vec![poly("u", 1)]);
        assert_eq!(w.deta, poly("u", 1));

        let w = a.divide(&poly("u - u^-1", 1)).unwrap();
        assert_eq!(w.coefficients, vec![q(0), q(0)]);
        assert!(w.deta.is_zero());
    }

    #[test]
    fn mirror_quotient_relations() {
        let a = algebra("u1 + u2 + u1^-1*u2^-1");
        // u2 ≡ u1 and (u1u2)^-1 ≡ u1 in the quotient
        for s in ["u2", "u1^-1*u2^-1"] {
            let w = a.divide(&poly(s, 2)).unwrap();
            assert_eq!(w.coefficients, vec![q(0), q(1), q(0)]);
        }
        // u1^3 ≡ 1 modulo J(f), modulo lower levels
        let w = a.divide(&poly("u1^3", 2)).unwrap();
        assert_eq!(w.coefficients[0], q(1));
    }

    #[test]
    fn two_variable_interior_count() {
        // dim E_α for α < 1 counts interior lattice points at that level
        let a = algebra("u1 + u2 + u1^-1*u2^-2");
        let p = a.polytope();
        for (alpha, dim) in a.graded_dims() {
            if alpha < q(1) {
                let s = (alpha.clone() * q(p.scale())).to_integer();
                let count = p.level_monomials(num_traits::ToPrimitive::to_i64(&s).unwrap()).len();
                assert_eq!(dim, count, "level {alpha}");
            }
        }
        let dims = a.graded_dims();
        let lookup = |x: &Rational| dims.iter().find(|(b, _)| b == x).map_or(0, |(_, n)| *n);
        for (alpha, n) in &dims {
            assert_eq!(*n, lookup(&(q(2) - alpha)));
        }
    }
}
