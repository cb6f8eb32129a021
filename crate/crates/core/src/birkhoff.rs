//! Birkhoff normal form `t·ε' = ε'(A_0 + θA_∞)` reached from the pencil by a
//! filtration-compatible gauge `ε' = εP(θ)`, and the V-, V⁺- and
//! oppositeness checks.
//!
//! The gauge equation is `B·P + θ²P' = P·(A_0 + θA_∞)`. Give the entry
//! `(j, i)` of a θ^k coefficient the defect `α_j + k − α_i`. Defects add under
//! products, B has defects ≤ 1, P has defects ≤ 0 (the compatibility
//! pattern), and θ²∂_θ raises the defect by one. Solving layer by layer in
//! decreasing defect, each layer is linear in the P entries of defect δ − 1
//! and the A_∞ entries of defect δ, with everything of higher defect already
//! fixed. Same-level blocks of A_∞ are fixed to `diag(α)`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::brieskorn::{matrix_json, newton_order, BrieskornElement, ConnectionPencil};
use crate::scalar::{format_rational, Scalar};
use crate::{QMatrix, Rational};

/// `P(θ) = Σ θ^k P_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform {
    pub matrices: Vec<QMatrix>,
}

impl GaugeTransform {
    pub fn identity(mu: usize) -> Self {
        GaugeTransform {
            matrices: vec![QMatrix::identity(mu)],
        }
    }

    pub fn size(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn coefficient(&self, k: usize) -> QMatrix {
        self.matrices
            .get(k)
            .cloned()
            .unwrap_or_else(|| QMatrix::zeros(self.size(), self.size()))
    }

    /// Column i as an element of G₀ in the old basis.
    pub fn column(&self, i: usize) -> BrieskornElement {
        let mu = self.size();
        BrieskornElement::from_dense(
            (0..mu)
                .map(|j| self.matrices.iter().map(|m| m[(j, i)].clone()).collect())
                .collect(),
        )
    }

    /// Whether `(P_k)_{ji} = 0` whenever `α_j + k > α_i`.
    pub fn is_compatible(&self, degrees: &[Rational]) -> bool {
        self.matrices.iter().enumerate().all(|(k, m)| {
            (0..m.rows()).all(|j| {
                (0..m.cols()).all(|i| m[(j, i)].is_zero() || &degrees[j] + Rational::from_i64(k as i64) <= degrees[i])
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BirkhoffSolution {
    pub gauge: GaugeTransform,
    pub a0: QMatrix,
    pub ainf: QMatrix,
    /// `R_∞ = −A_∞`.
    pub rinf: QMatrix,
    /// Newton orders of the new basis vectors.
    pub degrees: Vec<Rational>,
    pub is_v_solution: bool,
    pub is_v_plus: bool,
    pub ainf_semisimple: bool,
    /// Eigenvalues of A_∞ with multiplicity, when they are all rational.
    pub ainf_eigenvalues: Option<Vec<Rational>>,
}

/// The layered linear system had no solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Obstruction {
    /// Defect of the failing layer, as `p/q`.
    pub layer: String,
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    pub augmented_rank: usize,
    /// Indices, within the layer, of equations left unsatisfied by the
    /// least-squares-free (pivot) solution.
    pub unsatisfiable: Vec<usize>,
}

impl std::fmt::Display for Obstruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "no filtration-compatible gauge: layer {} has {} equations in {} unknowns, rank {} < augmented rank {}",
            self.layer, self.equations, self.unknowns, self.rank, self.augmented_rank
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Unknown {
    /// `(P_k)_{ji}`
    Gauge { k: usize, j: usize, i: usize },
    /// `(A_∞)_{ji}`
    Residue { j: usize, i: usize },
}

struct Layered<'a> {
    b: &'a ConnectionPencil,
    p: Vec<QMatrix>,
    a0: QMatrix,
    ainf: QMatrix,
}

impl Layered<'_> {
    fn get_p(&self, k: usize, j: usize, i: usize) -> Rational {
        self.p.get(k).map_or_else(Rational::zero, |m| m[(j, i)].clone())
    }

    /// Entry `(j, i)` of the θ^m coefficient of `BP + θ²P' − P(A_0 + θA_∞)`.
    fn residual(&self, m: usize, j: usize, i: usize) -> Rational {
        let mu = self.a0.rows();
        let mut acc = Rational::zero();
        for k in 0..=m {
            let Some(bm) = self.b.matrices.get(m - k) else {
                continue;
            };
            if k >= self.p.len() {
                break;
            }
            for l in 0..mu {
                let x = &bm[(j, l)];
                if !x.is_zero() {
                    acc += x * &self.p[k][(l, i)];
                }
            }
        }
        if m >= 1 {
            acc += Rational::from_i64(m as i64 - 1) * self.get_p(m - 1, j, i);
        }
        for l in 0..mu {
            let a = &self.a0[(l, i)];
            if !a.is_zero() {
                acc -= self.get_p(m, j, l) * a;
            }
            if m >= 1 {
                let a = &self.ainf[(l, i)];
                if !a.is_zero() {
                    acc -= self.get_p(m - 1, j, l) * a;
                }
            }
        }
        acc
    }

    fn set(&mut self, u: Unknown, v: Rational) {
        match u {
            Unknown::Gauge { k, j, i } => self.p[k][(j, i)] = v,
            Unknown::Residue { j, i } => self.ainf[(j, i)] = v,
        }
    }
}

fn scaled_levels(degrees: &[Rational]) -> (Vec<i64>, i64) {
    let d = crate::scalar::lcm_denominators(degrees.iter());
    let d: i64 = num_traits::ToPrimitive::to_i64(&d).expect("scale fits in i64");
    let s = degrees
        .iter()
        .map(|a| num_traits::ToPrimitive::to_i64(&(a * Rational::from_i64(d)).to_integer()).unwrap())
        .collect();
    (s, d)
}

/// Searches a gauge with `P(0) = I` in the compatibility pattern taking the
/// pencil to Birkhoff form with `A_∞` equal to `diag(α)` on same-level
/// blocks. Free unknowns are set to zero.
pub fn solve_birkhoff(pencil: &ConnectionPencil, degrees: &[Rational]) -> Result<BirkhoffSolution, Obstruction> {
    let mu = degrees.len();
    assert_eq!(pencil.size(), mu, "pencil and degrees disagree on μ");
    let (s, d) = scaled_levels(degrees);
    let smax = s.iter().copied().max().unwrap_or(0);
    let smin = s.iter().copied().min().unwrap_or(0);
    let kp = ((smax - smin) / d) as usize;

    let mut ainf = QMatrix::zeros(mu, mu);
    for j in 0..mu {
        for i in 0..mu {
            if s[j] == s[i] && i == j {
                ainf[(j, i)] = degrees[i].clone();
            }
        }
    }
    let mut state = Layered {
        b: pencil,
        p: (0..=kp)
            .map(|k| {
                if k == 0 {
                    QMatrix::identity(mu)
                } else {
                    QMatrix::zeros(mu, mu)
                }
            })
            .collect(),
        a0: pencil.coefficient(0),
        ainf,
    };

    // unknowns and equations grouped by the layer defect (scaled)
    let mut unknowns: BTreeMap<i64, Vec<Unknown>> = BTreeMap::new();
    for k in 1..=kp {
        for j in 0..mu {
            for i in 0..mu {
                let defect = s[j] + k as i64 * d - s[i];
                if defect <= 0 {
                    unknowns.entry(defect + d).or_default().push(Unknown::Gauge { k, j, i });
                }
            }
        }
    }
    for j in 0..mu {
        for i in 0..mu {
            if s[j] < s[i] {
                unknowns
                    .entry(s[j] + d - s[i])
                    .or_default()
                    .push(Unknown::Residue { j, i });
            }
        }
    }
    let top_m = pencil.degree() + kp + 1;
    let mut equations: BTreeMap<i64, Vec<(usize, usize, usize)>> = BTreeMap::new();
    for m in 0..=top_m {
        for j in 0..mu {
            for i in 0..mu {
                equations.entry(s[j] + m as i64 * d - s[i]).or_default().push((m, j, i));
            }
        }
    }

    let mut layers: Vec<i64> = unknowns.keys().chain(equations.keys()).copied().collect();
    layers.sort_unstable_by(|a, b| b.cmp(a));
    layers.dedup();
    for layer in layers {
        let us = unknowns.get(&layer).cloned().unwrap_or_default();
        let es = equations.get(&layer).cloned().unwrap_or_default();
        if es.is_empty() {
            continue;
        }
        let f0: Vec<Rational> = es.iter().map(|&(m, j, i)| state.residual(m, j, i)).collect();
        if us.is_empty() {
            if f0.iter().any(|x| !x.is_zero()) {
                return Err(obstruction(layer, d, 0, &QMatrix::zeros(es.len(), 0), &f0));
            }
            continue;
        }
        let mut jac = QMatrix::zeros(es.len(), us.len());
        for (c, &u) in us.iter().enumerate() {
            state.set(u, Rational::one());
            for (r, &(m, j, i)) in es.iter().enumerate() {
                jac[(r, c)] = state.residual(m, j, i) - &f0[r];
            }
            state.set(u, Rational::zero());
        }
        let rhs: Vec<Rational> = f0.iter().map(|x| -x.clone()).collect();
        match jac.solve(&rhs) {
            Some(x) => {
                for (u, v) in us.iter().zip(x) {
                    state.set(*u, v);
                }
            }
            None => return Err(obstruction(layer, d, us.len(), &jac, &f0)),
        }
    }

    let gauge = GaugeTransform {
        matrices: trim(state.p),
    };
    let a0 = state.a0;
    let ainf = state.ainf;
    if !birkhoff_identity_holds(pencil, &gauge, &a0, &ainf) {
        return Err(Obstruction {
            layer: "identity".into(),
            unknowns: 0,
            equations: 0,
            rank: 0,
            augmented_rank: 1,
            unsatisfiable: Vec::new(),
        });
    }
    Ok(finish(gauge, a0, ainf, degrees.to_vec(), degrees))
}

fn obstruction(layer: i64, d: i64, unknowns: usize, jac: &QMatrix, f0: &[Rational]) -> Obstruction {
    let rank = jac.rank();
    let mut aug_rows = jac.to_rows();
    for (row, f) in aug_rows.iter_mut().zip(f0) {
        row.push(f.clone());
    }
    let augmented_rank = QMatrix::from_rows(aug_rows).rank();
    let rr = jac.rref();
    let tb = rr.transform.mul_vec(f0);
    let mut unsatisfiable = Vec::new();
    for (r, v) in tb.iter().enumerate().skip(rank) {
        if !v.is_zero() {
            // report the original equation that carries this inconsistent combination
            let row = rr.transform.row(r);
            if let Some(e) = row.iter().position(|x| !x.is_zero()) {
                unsatisfiable.push(e);
            }
        }
    }
    unsatisfiable.sort_unstable();
    unsatisfiable.dedup();
    Obstruction {
        layer: format_rational(&Rational::new(layer.into(), d.into())),
        unknowns,
        equations: f0.len(),
        rank,
        augmented_rank,
        unsatisfiable,
    }
}

fn trim(mut p: Vec<QMatrix>) -> Vec<QMatrix> {
    while p.len() > 1 && p.last().is_some_and(QMatrix::is_zero) {
        p.pop();
    }
    p
}

/// Exact check of `BP + θ²P' = P(A_0 + θA_∞)`.
pub fn birkhoff_identity_holds(
    pencil: &ConnectionPencil,
    gauge: &GaugeTransform,
    a0: &QMatrix,
    ainf: &QMatrix,
) -> bool {
    let mu = a0.rows();
    let top = pencil.degree() + gauge.matrices.len() + 1;
    for m in 0..=top {
        let mut lhs = QMatrix::zeros(mu, mu);
        for k in 0..=m {
            if let (Some(b), Some(p)) = (pencil.matrices.get(m - k), gauge.matrices.get(k)) {
                lhs = &lhs + &(b * p);
            }
        }
        if m >= 1 {
            lhs = &lhs + &gauge.coefficient(m - 1).scale(&Rational::from_i64(m as i64 - 1));
        }
        let mut rhs = &gauge.coefficient(m) * a0;
        if m >= 1 {
            rhs = &rhs + &(&gauge.coefficient(m - 1) * ainf);
        }
        if lhs != rhs {
            return false;
        }
    }
    true
}

fn finish(
    gauge: GaugeTransform,
    a0: QMatrix,
    ainf: QMatrix,
    new_degrees: Vec<Rational>,
    old_degrees: &[Rational],
) -> BirkhoffSolution {
    let rinf = ainf.scale(&-Rational::one());
    let mut sol = BirkhoffSolution {
        gauge,
        a0,
        ainf,
        rinf,
        degrees: new_degrees,
        is_v_solution: false,
        is_v_plus: false,
        ainf_semisimple: false,
        ainf_eigenvalues: None,
    };
    sol.ainf_semisimple = is_semisimple(&sol.ainf);
    sol.ainf_eigenvalues = sol
        .ainf
        .charpoly()
        .rational_roots()
        .filter(|r| r.len() == sol.ainf.rows());
    sol.is_v_solution = verify_v_solution(&sol, old_degrees);
    sol.is_v_plus = sol.is_v_solution && verify_v_plus(&sol, old_degrees);
    sol
}

/// Birkhoff data for an arbitrary new basis `ε'' = εP(θ)` with `P(0)`
/// invertible and `P⁻¹` polynomial; `None` if the transformed pencil is not
/// of the form `A_0 + θA_∞`.
pub fn birkhoff_in_basis(
    pencil: &ConnectionPencil,
    degrees: &[Rational],
    gauge: &GaugeTransform,
) -> Option<BirkhoffSolution> {
    let mu = degrees.len();
    let inv0 = gauge.matrices[0].inverse()?;
    // power-series inverse Q = P⁻¹ up to a degree bound, checked afterwards
    let bound = gauge.matrices.len() * (mu + 1);
    let mut q: Vec<QMatrix> = vec![inv0.clone()];
    for m in 1..=bound {
        let mut acc = QMatrix::zeros(mu, mu);
        for k in 1..=m.min(gauge.matrices.len() - 1) {
            acc = &acc + &(&gauge.matrices[k] * &q[m - k]);
        }
        q.push((&inv0 * &acc).scale(&-Rational::one()));
    }
    let q = trim(q);
    let prod = poly_mul(&gauge.matrices, &q);
    if prod.len() != 1 || prod[0] != QMatrix::identity(mu) {
        return None;
    }
    // B'' = Q(BP + θ²P')
    let mut bp = poly_mul(&pencil.matrices, &gauge.matrices);
    for (k, pk) in gauge.matrices.iter().enumerate() {
        if k + 1 >= bp.len() {
            bp.resize(k + 2, QMatrix::zeros(mu, mu));
        }
        bp[k + 1] = &bp[k + 1] + &pk.scale(&Rational::from_i64(k as i64));
    }
    let bnew = trim(poly_mul(&q, &bp));
    if bnew.len() > 2 {
        return None;
    }
    let a0 = bnew[0].clone();
    let ainf = bnew.get(1).cloned().unwrap_or_else(|| QMatrix::zeros(mu, mu));
    let new_degrees = (0..mu)
        .map(|i| newton_order_with(&gauge.column(i), degrees).unwrap_or_else(Rational::zero))
        .collect();
    Some(finish(gauge.clone(), a0, ainf, new_degrees, degrees))
}

fn poly_mul(a: &[QMatrix], b: &[QMatrix]) -> Vec<QMatrix> {
    let mu = a[0].rows();
    let mut out = vec![QMatrix::zeros(mu, mu); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

fn newton_order_with(x: &BrieskornElement, degrees: &[Rational]) -> Option<Rational> {
    let (levels, scale) = scaled_levels(degrees);
    let basis = crate::jacobian::AdaptedBasis {
        entries: Vec::new(),
        levels,
        scale,
    };
    newton_order(x, &basis)
}

/// Whether the minimal polynomial is squarefree.
pub fn is_semisimple(a: &QMatrix) -> bool {
    let p = a.charpoly();
    let radical = p.div_rem(&p.gcd(&p.derivative())).0;
    a.eval_poly(&radical).is_zero()
}

/// The splitting `G₀∩V_α = ⊕_k θ^k (G₀∩G'⁰∩V_{α−k})` in coordinates: for each
/// level α the vectors `θ^k ε'_i` with `k + α'_i ≤ α` lie in N_αG₀ and span it.
/// `degrees` are the Newton degrees of the adapted basis ε.
pub fn verify_v_solution(sol: &BirkhoffSolution, degrees: &[Rational]) -> bool {
    let mu = degrees.len();
    if mu <= 1 {
        return true;
    }
    let cols: Vec<BrieskornElement> = (0..mu).map(|i| sol.gauge.column(i)).collect();
    for (i, c) in cols.iter().enumerate() {
        if newton_order_with(c, degrees) != Some(sol.degrees[i].clone()) {
            return false;
        }
    }
    let n_top = degrees.iter().max().cloned().unwrap_or_else(Rational::zero);
    let kmax = (n_top.ceil().to_integer() + num_bigint::BigInt::from(2))
        .try_into()
        .unwrap_or(4usize);
    let mut levels: Vec<Rational> = Vec::new();
    for k in 0..=kmax {
        for a in degrees.iter().chain(&sol.degrees) {
            levels.push(a + Rational::from_i64(k as i64));
        }
    }
    levels.sort();
    levels.dedup();
    let width = 2 * kmax
        + num_traits::ToPrimitive::to_usize(&n_top.ceil().to_integer()).unwrap()
        + sol.gauge.matrices.len()
        + 1;
    let count = |deg: &[Rational], alpha: &Rational| -> usize {
        deg.iter()
            .map(|a| {
                let room = alpha - a;
                if room.is_negative() {
                    0
                } else {
                    num_traits::ToPrimitive::to_usize(&room.floor().to_integer()).unwrap() + 1
                }
            })
            .sum()
    };
    for alpha in levels
        .iter()
        .filter(|a| **a <= &n_top + Rational::from_i64(kmax as i64))
    {
        let mut rows = Vec::new();
        for (i, c) in cols.iter().enumerate() {
            let mut k = 0usize;
            while &sol.degrees[i] + Rational::from_i64(k as i64) <= *alpha {
                let v = c.shift_theta(k);
                match newton_order_with(&v, degrees) {
                    Some(o) if o <= *alpha => {}
                    _ => return false,
                }
                let mut row = vec![Rational::zero(); mu * width];
                for j in 0..mu {
                    for (e, x) in v.coords[j].coeffs().iter().enumerate() {
                        row[j * width + e] = x.clone();
                    }
                }
                rows.push(row);
                k += 1;
            }
        }
        let expected = count(degrees, alpha);
        if rows.len() != expected || count(&sol.degrees, alpha) != expected {
            return false;
        }
        if !rows.is_empty() && QMatrix::from_rows(rows).rank() != expected {
            return false;
        }
    }
    true
}

/// `(θ∂_θ − α)(G₀∩G'⁰∩V_α) ⊂ (G₀∩G'⁰∩V_{<α}) ⊕ τ(G₀∩G'⁰∩V_{α+1})` in the
/// ε' basis: `(A_∞ − α'_i)e_i` lies in strictly lower levels and `A_0 e_i` in
/// levels ≤ α'_i + 1. Also requires A_∞ semisimple with rational eigenvalues
/// whose absolute values are the spectrum `degrees`.
pub fn verify_v_plus(sol: &BirkhoffSolution, degrees: &[Rational]) -> bool {
    let b = &sol.degrees;
    let mu = b.len();
    for i in 0..mu {
        for j in 0..mu {
            let mut x = sol.ainf[(j, i)].clone();
            if i == j {
                x -= &b[i];
            }
            if !x.is_zero() && b[j] >= b[i] {
                return false;
            }
            if !sol.a0[(j, i)].is_zero() && b[j] > &b[i] + Rational::one() {
                return false;
            }
        }
    }
    if !sol.ainf_semisimple {
        return false;
    }
    let Some(eig) = &sol.ainf_eigenvalues else {
        return false;
    };
    let mut abs: Vec<Rational> = eig.iter().map(|x| x.abs()).collect();
    abs.sort();
    let mut spectra = degrees.to_vec();
    spectra.sort();
    abs == spectra
}

/// Outcome of the three oppositeness tests on one graded piece.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OppositenessReport {
    pub beta: String,
    pub dim: usize,
    pub decomposition: bool,
    pub pairwise: bool,
    pub stepwise: bool,
    pub nilpotent: bool,
    pub b_opposed: bool,
}

impl OppositenessReport {
    pub fn opposite(&self) -> bool {
        self.decomposition && self.pairwise && self.stepwise
    }
}

fn span_rank(vs: &[Vec<Rational>]) -> usize {
    if vs.is_empty() {
        0
    } else {
        QMatrix::from_rows(vs.to_vec()).rank()
    }
}

fn intersect(a: &[Vec<Rational>], b: &[Vec<Rational>], dim: usize) -> Vec<Vec<Rational>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // columns: a-vectors then b-vectors; kernel gives Σx_i a_i = Σy_j b_j
    let mut m = QMatrix::zeros(dim, a.len() + b.len());
    for (c, v) in a.iter().enumerate() {
        for r in 0..dim {
            m[(r, c)] = v[r].clone();
        }
    }
    for (c, v) in b.iter().enumerate() {
        for r in 0..dim {
            m[(r, a.len() + c)] = -v[r].clone();
        }
    }
    let out: Vec<Vec<Rational>> = m
        .nullspace()
        .into_iter()
        .map(|x| {
            (0..dim)
                .map(|r| a.iter().zip(&x).fold(Rational::zero(), |acc, (v, c)| acc + &v[r] * c))
                .collect()
        })
        .collect();
    let mut basis: Vec<Vec<Rational>> = Vec::new();
    for v in out {
        let mut trial = basis.clone();
        trial.push(v.clone());
        if span_rank(&trial) > basis.len() {
            basis.push(v);
        }
    }
    basis
}

fn contained(sub: &[Vec<Rational>], sup: &[Vec<Rational>]) -> bool {
    let mut all = sup.to_vec();
    all.extend_from_slice(sub);
    span_rank(&all) == span_rank(sup)
}

/// The three equivalent forms of oppositeness for an increasing filtration
/// `F_k` and a decreasing filtration `F'^k` of a `dim`-dimensional space,
/// both given as spanning sets for `k ∈ [lo, hi]` (F_{lo−1} = 0 = F'^{hi+1},
/// F_hi = F'^lo = whole space).
pub fn filtrations_opposite(
    dim: usize,
    lo: i64,
    hi: i64,
    inc: &dyn Fn(i64) -> Vec<Vec<Rational>>,
    dec: &dyn Fn(i64) -> Vec<Vec<Rational>>,
) -> (bool, bool, bool) {
    let f = |k: i64| if k < lo { Vec::new() } else { inc(k.min(hi)) };
    let g = |k: i64| if k > hi { Vec::new() } else { dec(k.max(lo)) };
    let pieces: Vec<Vec<Vec<Rational>>> = (lo..=hi).map(|k| intersect(&f(k), &g(k), dim)).collect();
    let total: usize = pieces.iter().map(Vec::len).sum();
    let union: Vec<Vec<Rational>> = pieces.iter().flatten().cloned().collect();
    let decomposition = total == dim && span_rank(&union) == dim;

    let mut pairwise = true;
    for k in lo - 1..=hi + 1 {
        for l in lo - 1..=hi + 1 {
            if k == l {
                continue;
            }
            let lhs = intersect(&f(k), &g(l), dim);
            let mut rhs = intersect(&f(k - 1), &g(l), dim);
            rhs.extend(intersect(&f(k), &g(l + 1), dim));
            if !contained(&lhs, &rhs) {
                pairwise = false;
            }
        }
    }

    let mut stepwise = true;
    for k in lo - 1..=hi + 1 {
        if !intersect(&f(k - 1), &g(k), dim).is_empty() {
            stepwise = false;
        }
        let mut s = intersect(&f(k), &g(k), dim);
        s.extend(f(k - 1));
        if span_rank(&s) != span_rank(&f(k)) {
            stepwise = false;
        }
    }
    (decomposition, pairwise, stepwise)
}

/// Oppositeness of the filtrations induced by G₀ and by G'⁰ on each
/// `gr_β^V G`, β ∈ [0, 1), together with (B)-opposedness
/// `N(G'^k) ⊂ G'^{k+1}` for the nilpotent part N of the residue.
///
/// The piece `gr_β^V` has basis `h_i = [θ^{β−α_i} ε'_i]` over the indices with
/// fractional degree β; there `G_k` is spanned by `h_i` with ⌊α_i⌋ ≤ k,
/// `G'^k` by `h_i` with ⌊α_i⌋ ≥ k expressed through the leading parts of the
/// gauge, and N is read off the Birkhoff form.
pub fn check_opposite(sol: &BirkhoffSolution, degrees: &[Rational]) -> Vec<OppositenessReport> {
    let mu = degrees.len();
    let frac = |a: &Rational| a - a.floor();
    let floor = |a: &Rational| -> i64 { num_traits::ToPrimitive::to_i64(&a.floor().to_integer()).unwrap() };
    let mut betas: Vec<Rational> = degrees.iter().map(frac).collect();
    betas.sort();
    betas.dedup();
    let mut out = Vec::new();
    for beta in betas {
        let idx: Vec<usize> = (0..mu).filter(|&i| frac(&degrees[i]) == beta).collect();
        let dim = idx.len();
        let pos = |i: usize| idx.iter().position(|&x| x == i);
        // leading part of ε'_i in the h-basis of the old adapted basis
        let lead = |i: usize| -> Vec<Rational> {
            let mut v = vec![Rational::zero(); dim];
            for (k, pk) in sol.gauge.matrices.iter().enumerate() {
                for j in 0..mu {
                    if &degrees[j] + Rational::from_i64(k as i64) == sol.degrees[i] {
                        if let Some(p) = pos(j) {
                            v[p] = v[p].add_ref(&pk[(j, i)]);
                        }
                    }
                }
            }
            v
        };
        let new_idx: Vec<usize> = (0..mu).filter(|&i| frac(&sol.degrees[i]) == beta).collect();
        let leads: Vec<(i64, Vec<Rational>)> = new_idx.iter().map(|&i| (floor(&sol.degrees[i]), lead(i))).collect();
        let olds: Vec<(i64, Vec<Rational>)> = idx
            .iter()
            .enumerate()
            .map(|(p, &i)| {
                let mut e = vec![Rational::zero(); dim];
                e[p] = Rational::one();
                (floor(&degrees[i]), e)
            })
            .collect();
        let lo = olds
            .iter()
            .map(|(f, _)| *f)
            .chain(leads.iter().map(|(f, _)| *f))
            .min()
            .unwrap_or(0);
        let hi = olds
            .iter()
            .map(|(f, _)| *f)
            .chain(leads.iter().map(|(f, _)| *f))
            .max()
            .unwrap_or(0);
        let inc = |k: i64| olds.iter().filter(|(f, _)| *f <= k).map(|(_, v)| v.clone()).collect();
        let dec = |k: i64| leads.iter().filter(|(f, _)| *f >= k).map(|(_, v)| v.clone()).collect();
        let (decomposition, pairwise, stepwise) = filtrations_opposite(dim, lo, hi, &inc, &dec);

        // N on gr_β in the h'-basis: h'_i ↦ α'_i h'_i − Σ_j (A_{α'_i − α'_j + 1})_{ji} h'_j
        let nd = new_idx.len();
        let mut n = QMatrix::zeros(nd, nd);
        for (c, &i) in new_idx.iter().enumerate() {
            for (r, &j) in new_idx.iter().enumerate() {
                let k = &sol.degrees[i] - &sol.degrees[j] + Rational::one();
                let entry = if k == Rational::zero() {
                    sol.a0[(j, i)].clone()
                } else if k == Rational::one() {
                    sol.ainf[(j, i)].clone()
                } else {
                    Rational::zero()
                };
                let diag = if i == j {
                    sol.degrees[i].clone()
                } else {
                    Rational::zero()
                };
                n[(r, c)] = diag - entry;
            }
        }
        let mut power = QMatrix::identity(nd);
        for _ in 0..nd {
            power = &power * &n;
        }
        let nilpotent = power.is_zero();
        // G'^k in h'-coordinates is spanned by unit vectors with ⌊α'_i⌋ ≥ k
        let fl: Vec<i64> = new_idx.iter().map(|&i| floor(&sol.degrees[i])).collect();
        let b_opposed = (lo..=hi).all(|k| {
            (0..nd)
                .filter(|&c| fl[c] >= k)
                .all(|c| (0..nd).all(|r| n[(r, c)].is_zero() || fl[r] > k))
        });
        out.push(OppositenessReport {
            beta: format_rational(&beta),
            dim,
            decomposition,
            pairwise,
            stepwise,
            nilpotent,
            b_opposed,
        });
    }
    out
}

impl BirkhoffSolution {
    pub fn to_json(&self) -> serde_json::Value {
        let eig = self
            .ainf_eigenvalues
            .as_ref()
            .map(|e| e.iter().map(format_rational).collect::<Vec<_>>());
        serde_json::json!({
            "A0": matrix_json(&self.a0),
            "Ainf": matrix_json(&self.ainf),
            "Rinf": matrix_json(&self.rinf),
            "gauge": self.gauge.matrices.iter().map(matrix_json).collect::<Vec<_>>(),
            "degrees": self.degrees.iter().map(format_rational).collect::<Vec<_>>(),
            "A0_charpoly": self.a0.charpoly().coeffs().iter().map(format_rational).collect::<Vec<_>>(),
            "Ainf_eigenvalues": eig,
            "is_v_solution": self.is_v_solution,
            "is_v_plus": self.is_v_plus,
            "ainf_semisimple": self.ainf_semisimple,
        })
    }
}
