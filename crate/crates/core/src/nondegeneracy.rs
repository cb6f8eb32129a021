//! Nondegeneracy of f with respect to Γ(f): for every proper face τ the
//! logarithmic partials of the face polynomial f_τ have no common zero on
//! the torus.
//!
//! Writing f_τ = u^v·h(y) in coordinates y of the face lattice, the condition
//! becomes "h, y_1∂h/∂y_1, …, y_k∂h/∂y_k have no common zero in (ℂ*)^k".
//! Vertices pass trivially, edges reduce to squarefreeness of a univariate
//! polynomial, and faces of dimension ≥ 2 are certified by exhibiting a
//! monomial in the ideal (a torus Nullstellensatz certificate) over a random
//! large prime field.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::AnalysisError;
use crate::linalg::UniPoly;
use crate::polytope::{enumerate_facets, face_restriction, Face, NewtonPolytope};
use crate::scalar::{lcm_denominators, Scalar};
use crate::{Laurent, QMatrix, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Exact,
    Probabilistic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum FaceMethod {
    Monomial,
    SquarefreeEdge,
    ModularCertificate { prime: u64, dilation: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceReport {
    pub dim: usize,
    pub vertices: Vec<Vec<i32>>,
    #[serde(flatten)]
    pub method: FaceMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NondegeneracyCertificate {
    pub exact: bool,
    /// Upper bound on the probability that some modular certificate is spurious.
    pub failure_probability_bound: f64,
    pub faces: Vec<FaceReport>,
}

const MAX_DILATION: usize = 4;

pub fn is_nondegenerate(
    f: &Laurent,
    p: &NewtonPolytope,
    mode: CheckMode,
    seed: u64,
) -> Result<NondegeneracyCertificate, AnalysisError> {
    if !p.is_convenient() {
        return Err(AnalysisError::NotConvenient(
            p.diagnostic().unwrap_or("origin is not interior").to_string(),
        ));
    }
    if mode == CheckMode::Exact && p.arity() > 2 {
        return Err(AnalysisError::ProbabilisticOnly);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut faces = Vec::new();
    let mut bound = 0.0;
    for face in p.faces() {
        let vertices: Vec<Vec<i32>> = face
            .vertex_indices
            .iter()
            .map(|&i| p.vertices()[i].entries().to_vec())
            .collect();
        let method = match face.dim {
            0 => FaceMethod::Monomial,
            1 => {
                check_edge(f, p, face)?;
                FaceMethod::SquarefreeEdge
            }
            _ => {
                let (prime, dilation, b) = certify_face(f, p, face, &mut rng)?;
                bound += b;
                FaceMethod::ModularCertificate { prime, dilation }
            }
        };
        faces.push(FaceReport {
            dim: face.dim,
            vertices,
            method,
        });
    }
    Ok(NondegeneracyCertificate {
        exact: bound == 0.0,
        failure_probability_bound: bound,
        faces,
    })
}

/// Integer row echelon basis of the lattice spanned by `rows`.
fn lattice_basis(mut rows: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    let n = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..n {
        loop {
            let nz: Vec<usize> = (rank..rows.len()).filter(|&r| rows[r][col] != 0).collect();
            let Some(&best) = nz.iter().min_by_key(|&&r| rows[r][col].abs()) else {
                break;
            };
            if nz.len() == 1 {
                rows.swap(best, rank);
                rank += 1;
                break;
            }
            for &r in &nz {
                if r != best {
                    let q = Integer::div_floor(&rows[r][col], &rows[best][col]);
                    let pivot = rows[best].clone();
                    for (x, y) in rows[r].iter_mut().zip(&pivot) {
                        *x -= q * y;
                    }
                }
            }
        }
    }
    rows.truncate(rank);
    rows
}

/// Face polynomial in lattice coordinates: exponent vectors in ℤ^k.
fn face_coordinates(f: &Laurent, p: &NewtonPolytope, face: &Face) -> (usize, Vec<(Vec<i64>, Rational)>) {
    let ft = face_restriction(f, p, face);
    let pts: Vec<(Vec<i64>, Rational)> = ft
        .terms()
        .map(|(k, c)| (k.entries().iter().map(|&x| x as i64).collect(), c.clone()))
        .collect();
    let v0 = pts[0].0.clone();
    let diffs: Vec<Vec<i64>> = pts[1..]
        .iter()
        .map(|(q, _)| q.iter().zip(&v0).map(|(a, b)| a - b).collect())
        .collect();
    let basis = lattice_basis(diffs);
    let k = basis.len();
    let bt = QMatrix::from_rows(
        (0..p.arity())
            .map(|i| basis.iter().map(|b| Rational::from_i64(b[i])).collect())
            .collect(),
    );
    let mut coords: Vec<(Vec<i64>, Rational)> = pts
        .iter()
        .map(|(q, c)| {
            let rhs: Vec<Rational> = q.iter().zip(&v0).map(|(a, b)| Rational::from_i64(a - b)).collect();
            let y = bt.solve(&rhs).expect("face point lies in its lattice");
            (y.iter().map(|r| r.to_integer().to_i64().unwrap()).collect(), c.clone())
        })
        .collect();
    // shift to nonnegative coordinates
    for j in 0..k {
        let m = coords.iter().map(|(y, _)| y[j]).min().unwrap();
        for (y, _) in coords.iter_mut() {
            y[j] -= m;
        }
    }
    (k, coords)
}

fn describe(p: &NewtonPolytope, face: &Face, f: &Laurent) -> String {
    let verts: Vec<String> = face
        .vertex_indices
        .iter()
        .map(|&i| format!("{:?}", p.vertices()[i].entries()))
        .collect();
    format!(
        "face with vertices {} (face polynomial {})",
        verts.join(", "),
        face_restriction(f, p, face)
    )
}

fn check_edge(f: &Laurent, p: &NewtonPolytope, face: &Face) -> Result<(), AnalysisError> {
    let (_, coords) = face_coordinates(f, p, face);
    let deg = coords.iter().map(|(y, _)| y[0]).max().unwrap() as usize;
    let mut c = vec![Rational::zero(); deg + 1];
    for (y, a) in coords {
        c[y[0] as usize] = a;
    }
    let poly = UniPoly::new(c);
    if poly.is_squarefree() {
        Ok(())
    } else {
        let g = poly.gcd(&poly.derivative());
        let root = g
            .rational_roots()
            .and_then(|r| r.first().cloned())
            .map(|r| format!("; common zero along u^w = {r}"))
            .unwrap_or_default();
        Err(AnalysisError::Degenerate(format!(
            "{}: repeated root in edge coordinate{root}",
            describe(p, face, f)
        )))
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A uniformly random prime in [2^61, 2^62).
fn random_prime(rng: &mut ChaCha8Rng) -> u64 {
    loop {
        let c = rng.gen_range(1u64 << 61..1u64 << 62) | 1;
        if is_prime_u64(c) {
            return c;
        }
    }
}

/// Number of primes in [2^61, 2^62), from below (x/ln x bounds).
const PRIMES_IN_RANGE: f64 = 2.6e16;

fn reduce_mod(q: &Rational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let r = |x: &BigInt| -> u64 { x.mod_floor(&pb).to_u64().unwrap() };
    let den = r(q.denom());
    (den != 0).then(|| mul_mod(r(q.numer()), pow_mod(den, p - 2, p), p))
}

/// Reduced row echelon form mod p; returns the reduced rows.
fn rref_mod(rows: &mut [Vec<u64>], p: u64) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(piv, rank);
        let inv = pow_mod(rows[rank][col], p - 2, p);
        for x in rows[rank].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for (x, y) in row.iter_mut().zip(&pivot) {
                if *y != 0 {
                    *x = (*x + p - mul_mod(factor, *y, p)) % p;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Lattice points of `t·Q` where `Q` is given by facet inequalities `a·y ≤ b`.
fn dilate_points(ineqs: &[(Vec<i64>, i64)], lo: &[i64], hi: &[i64], t: i64) -> Vec<Vec<i64>> {
    let k = lo.len();
    let mut out = Vec::new();
    let mut cur: Vec<i64> = lo.iter().map(|x| x * t).collect();
    loop {
        if ineqs
            .iter()
            .all(|(a, b)| a.iter().zip(&cur).map(|(x, y)| x * y).sum::<i64>() <= b * t)
        {
            out.push(cur.clone());
        }
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            if cur[i] < hi[i] * t {
                cur[i] += 1;
                break;
            }
            cur[i] = lo[i] * t;
            i += 1;
        }
    }
}

fn certify_face(
    f: &Laurent,
    p: &NewtonPolytope,
    face: &Face,
    rng: &mut ChaCha8Rng,
) -> Result<(u64, usize, f64), AnalysisError> {
    let (k, coords) = face_coordinates(f, p, face);
    let points: Vec<Vec<i64>> = coords.iter().map(|(y, _)| y.clone()).collect();
    let ineqs = enumerate_facets(&points);
    let lo: Vec<i64> = (0..k).map(|j| points.iter().map(|y| y[j]).min().unwrap()).collect();
    let hi: Vec<i64> = (0..k).map(|j| points.iter().map(|y| y[j]).max().unwrap()).collect();

    // generators h, y_j ∂h/∂y_j with integer coefficients
    let l = lcm_denominators(coords.iter().map(|(_, c)| c));
    let base: Vec<(Vec<i64>, BigInt)> = coords
        .iter()
        .map(|(y, c)| (y.clone(), (c * Rational::from_integer(l.clone())).to_integer()))
        .collect();
    let mut gens: Vec<Vec<(Vec<i64>, BigInt)>> = vec![base.clone()];
    for j in 0..k {
        gens.push(
            base.iter()
                .filter(|(y, _)| y[j] != 0)
                .map(|(y, c)| (y.clone(), c * BigInt::from(y[j])))
                .collect(),
        );
    }

    let prime = loop {
        let q = random_prime(rng);
        if coords.iter().all(|(_, c)| reduce_mod(c, q).is_some()) {
            break q;
        }
    };
    for t in 1..=MAX_DILATION {
        let mults = dilate_points(&ineqs, &lo, &hi, t as i64 - 1);
        let cols = dilate_points(&ineqs, &lo, &hi, t as i64);
        let index: BTreeMap<&Vec<i64>, usize> = cols.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let mut rows = Vec::new();
        let mut log_hadamard = 0.0;
        for m in &mults {
            for g in &gens {
                let mut row = vec![0u64; cols.len()];
                let mut norm2 = 0.0;
                for (y, c) in g {
                    let e: Vec<i64> = y.iter().zip(m).map(|(a, b)| a + b).collect();
                    let col = index[&e];
                    row[col] = reduce_mod(&Rational::from_integer(c.clone()), prime).unwrap();
                    let cf = c.to_f64().unwrap_or(f64::MAX);
                    norm2 += cf * cf;
                }
                log_hadamard += 0.5 * norm2.max(1.0).log2();
                rows.push(row);
            }
        }
        let rank = rref_mod(&mut rows, prime);
        let certified = rows[..rank].iter().any(|r| r.iter().filter(|&&x| x != 0).count() == 1);
        if certified {
            let spurious = (log_hadamard / 61.0).ceil().max(1.0) / PRIMES_IN_RANGE;
            return Ok((prime, t, spurious));
        }
    }
    Err(AnalysisError::DegeneracySuspected(format!(
        "{}: no torus Nullstellensatz certificate up to dilation {MAX_DILATION}",
        describe(p, face, f)
    )))
}
