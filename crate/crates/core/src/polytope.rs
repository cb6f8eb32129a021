//! Newton polytope Γ(f) = conv(Supp f ∖ {0}), its facet forms, the Newton
//! degree φ, sublevel enumeration and the Milnor number n!·vol(Γ).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::AnalysisError;
use crate::laurent::ExponentVector;
use crate::scalar::{format_rational, Scalar};
use crate::{Laurent, QMatrix, Rational};

/// A facet `σ` with supporting inequality `normal·x ≤ offset` on Γ(f).
#[derive(Clone, Debug, PartialEq)]
pub struct FacetForm {
    /// Primitive integer outer normal.
    pub normal: Vec<i64>,
    pub offset: i64,
    /// `L_σ = normal / offset`, so `L_σ ≡ 1` on σ (only meaningful when offset > 0).
    pub coefficients: Vec<Rational>,
    pub vertex_indices: Vec<usize>,
    /// `d·L_σ`, integral for the polytope scale `d`.
    pub scaled: Vec<i64>,
}

/// A proper face of Γ(f), given by the facets containing it.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub dim: usize,
    pub vertex_indices: Vec<usize>,
    pub facet_indices: Vec<usize>,
}

/// Value of φ: `Bottom` for the zero polynomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum NewtonDegree {
    Bottom,
    Value(Rational),
}

impl NewtonDegree {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            NewtonDegree::Bottom => None,
            NewtonDegree::Value(v) => Some(v),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonPolytope {
    arity: usize,
    dimension: usize,
    vertices: Vec<ExponentVector>,
    facets: Vec<FacetForm>,
    faces: Vec<Face>,
    convenient: bool,
    scale: i64,
    diagnostic: Option<String>,
}

fn primitive(v: &[Rational]) -> Vec<i64> {
    let l = crate::scalar::lcm_denominators(v.iter());
    let ints: Vec<BigInt> = v
        .iter()
        .map(|q| (q * Rational::from_integer(l.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    ints.iter()
        .map(|x| (x / &g).to_i64().expect("facet normal fits in i64"))
        .collect()
}

fn affine_rank(points: &[&[i64]]) -> usize {
    let Some((first, rest)) = points.split_first() else {
        return 0;
    };
    if rest.is_empty() {
        return 0;
    }
    let rows = rest
        .iter()
        .map(|p| p.iter().zip(*first).map(|(a, b)| Rational::from_i64(a - b)).collect())
        .collect();
    QMatrix::from_rows(rows).rank()
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Supporting hyperplanes of conv(points), assuming the points span ℝ^m.
/// Every m-subset is tried; the affine rank of each candidate's point set
/// decides whether it is a facet.
pub(crate) fn enumerate_facets(points: &[Vec<i64>]) -> Vec<(Vec<i64>, i64)> {
    let m = points[0].len();
    let mut found: BTreeSet<(Vec<i64>, i64)> = BTreeSet::new();
    let mut subset: Vec<usize> = (0..m).collect();
    let n = points.len();
    if n < m {
        return Vec::new();
    }
    loop {
        let rows = subset
            .iter()
            .map(|&i| {
                let mut r: Vec<Rational> = points[i].iter().map(|&x| Rational::from_i64(x)).collect();
                r.push(Rational::from_i64(-1));
                r
            })
            .collect();
        let ns = QMatrix::from_rows(rows).nullspace();
        if ns.len() == 1 {
            let v = primitive(&ns[0]);
            let (a, b) = (v[..m].to_vec(), v[m]);
            let vals: Vec<i64> = points.iter().map(|p| dot(&a, p)).collect();
            let le = vals.iter().all(|&x| x <= b);
            let ge = vals.iter().all(|&x| x >= b);
            let oriented = if le {
                Some((a, b))
            } else if ge {
                Some((a.iter().map(|x| -x).collect(), -b))
            } else {
                None
            };
            if let Some((a, b)) = oriented {
                let on: Vec<&[i64]> = points.iter().filter(|p| dot(&a, p) == b).map(Vec::as_slice).collect();
                if affine_rank(&on) == m - 1 {
                    found.insert((a, b));
                }
            }
        }
        // next m-subset in lexicographic order
        let mut k = m;
        loop {
            if k == 0 {
                return found.into_iter().collect();
            }
            k -= 1;
            if subset[k] < n - m + k {
                subset[k] += 1;
                for j in k + 1..m {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Extreme points of conv(points) for a full-dimensional point set.
fn extreme_points(points: &[Vec<i64>], facets: &[(Vec<i64>, i64)]) -> Vec<usize> {
    let m = points[0].len();
    (0..points.len())
        .filter(|&i| {
            let normals: Vec<Vec<Rational>> = facets
                .iter()
                .filter(|(a, b)| dot(a, &points[i]) == *b)
                .map(|(a, _)| a.iter().map(|&x| Rational::from_i64(x)).collect())
                .collect();
            !normals.is_empty() && QMatrix::from_rows(normals).rank() == m
        })
        .collect()
}

/// Extreme points of an arbitrary finite set, by projecting onto the
/// coordinates that are affinely independent on its hull.
fn extreme_points_any(points: &[Vec<i64>]) -> (usize, Vec<usize>) {
    let refs: Vec<&[i64]> = points.iter().map(Vec::as_slice).collect();
    let dim = affine_rank(&refs);
    if dim == 0 {
        return (0, vec![0]);
    }
    let diffs = points[1..]
        .iter()
        .map(|p| {
            p.iter()
                .zip(&points[0])
                .map(|(a, b)| Rational::from_i64(a - b))
                .collect()
        })
        .collect();
    // pivot columns of the difference matrix are coordinates independent on the hull
    let coords = QMatrix::from_rows(diffs).rref().pivots;
    let projected: Vec<Vec<i64>> = points.iter().map(|p| coords.iter().map(|&c| p[c]).collect()).collect();
    let facets = enumerate_facets(&projected);
    (dim, extreme_points(&projected, &facets))
}

impl NewtonPolytope {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Dimension of the hull (equals the arity when full-dimensional).
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertices(&self) -> &[ExponentVector] {
        &self.vertices
    }

    pub fn facets(&self) -> &[FacetForm] {
        &self.facets
    }

    /// All proper faces, vertices included, ordered by dimension.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn is_convenient(&self) -> bool {
        self.convenient
    }

    /// Lcm of the denominators of all facet-form coefficients.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn diagnostic(&self) -> Option<&str> {
        self.diagnostic.as_deref()
    }

    fn require_convenient(&self) -> Result<(), AnalysisError> {
        if self.convenient {
            Ok(())
        } else {
            Err(AnalysisError::NotConvenient(
                self.diagnostic
                    .clone()
                    .unwrap_or_else(|| "origin is not interior".into()),
            ))
        }
    }

    /// `d·φ(u^k)`.
    pub fn phi_scaled(&self, k: &ExponentVector) -> i64 {
        self.facets
            .iter()
            .map(|f| k.dot(&f.scaled))
            .max()
            .expect("convenient polytope has facets")
    }

    /// `d·φ(g)`, `None` for g = 0.
    pub fn phi_scaled_poly(&self, g: &Laurent) -> Option<i64> {
        g.support().map(|k| self.phi_scaled(k)).max()
    }

    pub fn level_to_rational(&self, scaled: i64) -> Rational {
        Rational::new(BigInt::from(scaled), BigInt::from(self.scale))
    }

    /// Newton degree `φ(g) = max_σ max_{k ∈ Supp g} L_σ(k)`.
    pub fn phi(&self, g: &Laurent) -> Result<NewtonDegree, AnalysisError> {
        self.require_convenient()?;
        self.check_arity(g)?;
        Ok(match self.phi_scaled_poly(g) {
            None => NewtonDegree::Bottom,
            Some(s) => NewtonDegree::Value(self.level_to_rational(s)),
        })
    }

    /// `φ_σ(g) = max_{k ∈ Supp g} L_σ(k)`; `None` for g = 0.
    pub fn phi_sigma(&self, g: &Laurent, sigma: usize) -> Result<Option<Rational>, AnalysisError> {
        self.check_arity(g)?;
        let facet = self
            .facets
            .get(sigma)
            .ok_or_else(|| AnalysisError::Internal(format!("no facet {sigma}")))?;
        Ok(g.support()
            .map(|k| k.dot(&facet.scaled))
            .max()
            .map(|s| self.level_to_rational(s)))
    }

    fn check_arity(&self, g: &Laurent) -> Result<(), AnalysisError> {
        if g.arity() != self.arity {
            return Err(crate::AlgebraError::ArityMismatch {
                left: self.arity,
                right: g.arity(),
            }
            .into());
        }
        Ok(())
    }

    /// Lattice points of the scaled sublevel `{d·φ ≤ s} = (s/d)·Γ`, ascending grlex.
    pub fn sublevel_scaled(&self, s: i64) -> Vec<ExponentVector> {
        let n = self.arity;
        let d = self.scale;
        let lo: Vec<i64> = (0..n)
            .map(|i| {
                let m = self.vertices.iter().map(|v| v.entries()[i] as i64).min().unwrap();
                Integer::div_floor(&(s * m), &d)
            })
            .collect();
        let hi: Vec<i64> = (0..n)
            .map(|i| {
                let m = self.vertices.iter().map(|v| v.entries()[i] as i64).max().unwrap();
                Integer::div_floor(&(s * m), &d)
            })
            .collect();
        let mut out = Vec::new();
        let mut cur = lo.clone();
        loop {
            let k = ExponentVector::new(cur.iter().map(|&x| x as i32).collect());
            if self.phi_scaled(&k) <= s {
                out.push(k);
            }
            let mut i = 0;
            loop {
                if i == n {
                    out.sort();
                    return out;
                }
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = lo[i];
                i += 1;
            }
        }
    }

    /// Monomials with `d·φ = s` exactly, ascending grlex.
    pub fn level_monomials(&self, s: i64) -> Vec<ExponentVector> {
        self.sublevel_scaled(s)
            .into_iter()
            .filter(|k| self.phi_scaled(k) == s)
            .collect()
    }

    /// Lattice points `k` with `φ(u^k) ≤ α`.
    pub fn enumerate_sublevel(&self, alpha: &Rational) -> Result<Vec<ExponentVector>, AnalysisError> {
        self.require_convenient()?;
        if alpha.is_negative() {
            return Ok(Vec::new());
        }
        let s = (alpha * Rational::from_i64(self.scale)).floor().to_integer();
        let s = s
            .to_i64()
            .ok_or_else(|| AnalysisError::Internal("sublevel too large".into()))?;
        Ok(self.sublevel_scaled(s))
    }

    fn vertex_i64(&self, i: usize) -> Vec<i64> {
        self.vertices[i].entries().iter().map(|&x| x as i64).collect()
    }

    /// Faces of `face` one dimension lower.
    fn subfaces(&self, face: &Face) -> Vec<&Face> {
        let verts: BTreeSet<usize> = face.vertex_indices.iter().copied().collect();
        self.faces
            .iter()
            .filter(|g| g.dim + 1 == face.dim && g.vertex_indices.iter().all(|v| verts.contains(v)))
            .collect()
    }

    /// Pulling triangulation of a face from its smallest vertex; each simplex
    /// is a list of `dim + 1` vertex indices.
    fn triangulate(&self, face: &Face) -> Vec<Vec<usize>> {
        if face.dim == 0 {
            return vec![face.vertex_indices.clone()];
        }
        let apex = face.vertex_indices[0];
        let mut out = Vec::new();
        for g in self.subfaces(face) {
            if g.vertex_indices.contains(&apex) {
                continue;
            }
            for mut s in self.triangulate(g) {
                s.insert(0, apex);
                out.push(s);
            }
        }
        out
    }

    fn abs_det(&self, rows: Vec<Vec<i64>>) -> BigInt {
        let m = QMatrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(Rational::from_i64).collect())
                .collect(),
        );
        m.determinant().abs().to_integer()
    }

    /// `n!·vol(Γ)` as the sum of `|det|` over the cones from the origin on a
    /// triangulation of every facet.
    pub fn milnor_number(&self) -> Result<u64, AnalysisError> {
        self.require_convenient()?;
        let mut total = BigInt::zero();
        for face in self.faces.iter().filter(|f| f.dim + 1 == self.arity) {
            for s in self.triangulate(face) {
                total += self.abs_det(s.iter().map(|&v| self.vertex_i64(v)).collect());
            }
        }
        total
            .to_u64()
            .ok_or_else(|| AnalysisError::Internal("Milnor number overflow".into()))
    }

    /// `n!·vol(Γ)` from a pulling triangulation of Γ itself, independent of
    /// the origin.
    pub fn normalized_volume_by_pulling(&self) -> u64 {
        let apex = 0;
        let a = self.vertex_i64(apex);
        let mut total = BigInt::zero();
        for face in self.faces.iter().filter(|f| f.dim + 1 == self.arity) {
            if face.vertex_indices.contains(&apex) {
                continue;
            }
            for s in self.triangulate(face) {
                let rows = s
                    .iter()
                    .map(|&v| self.vertex_i64(v).iter().zip(&a).map(|(x, y)| x - y).collect())
                    .collect();
                total += self.abs_det(rows);
            }
        }
        total.to_u64().expect("volume fits in u64")
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct FacetJson {
            form: Vec<String>,
            vertices: Vec<usize>,
        }
        serde_json::json!({
            "arity": self.arity,
            "dimension": self.dimension,
            "vertices": self.vertices.iter().map(|v| v.entries().to_vec()).collect::<Vec<_>>(),
            "facets": self.facets.iter().map(|f| FacetJson {
                form: f.coefficients.iter().map(format_rational).collect(),
                vertices: f.vertex_indices.clone(),
            }).collect::<Vec<_>>(),
            "scale": self.scale,
            "convenient": self.convenient,
            "diagnostic": self.diagnostic,
        })
    }
}

/// Builds Γ(f). A hull of dimension below the arity is returned with
/// `convenient = false` and a diagnostic.
pub fn newton_polytope(f: &Laurent) -> Result<NewtonPolytope, AnalysisError> {
    if f.is_zero() {
        return Err(AnalysisError::ZeroPolynomial);
    }
    let n = f.arity();
    let points: Vec<Vec<i64>> = f
        .support()
        .filter(|k| !k.is_zero())
        .map(|k| k.entries().iter().map(|&x| x as i64).collect())
        .collect();
    if points.is_empty() || n == 0 {
        return Err(AnalysisError::ConstantPolynomial);
    }
    let (dimension, vertex_ids) = extreme_points_any(&points);
    let to_ev = |p: &Vec<i64>| ExponentVector::new(p.iter().map(|&x| x as i32).collect());
    if dimension < n {
        let mut vertices: Vec<ExponentVector> = vertex_ids.iter().map(|&i| to_ev(&points[i])).collect();
        vertices.sort();
        return Ok(NewtonPolytope {
            arity: n,
            dimension,
            vertices,
            facets: Vec::new(),
            faces: Vec::new(),
            convenient: false,
            scale: 1,
            diagnostic: Some(format!("Newton polytope has dimension {dimension} < {n}")),
        });
    }
    let raw = enumerate_facets(&points);
    let mut vertex_points: Vec<Vec<i64>> = extreme_points(&points, &raw)
        .into_iter()
        .map(|i| points[i].clone())
        .collect();
    vertex_points.sort_by_key(|p| to_ev(p));
    let vertices: Vec<ExponentVector> = vertex_points.iter().map(to_ev).collect();

    let convenient = raw.iter().all(|(_, b)| *b > 0);
    let scale = raw
        .iter()
        .filter(|(_, b)| *b > 0)
        .flat_map(|(a, b)| a.iter().map(move |x| b / x.gcd(b)))
        .fold(1i64, |l, d| l.lcm(&d));
    let facets: Vec<FacetForm> = raw
        .iter()
        .map(|(a, b)| {
            let coefficients = if *b > 0 {
                a.iter()
                    .map(|&x| Rational::new(BigInt::from(x), BigInt::from(*b)))
                    .collect()
            } else {
                Vec::new()
            };
            let scaled = if *b > 0 {
                a.iter().map(|x| x * scale / b).collect()
            } else {
                Vec::new()
            };
            FacetForm {
                normal: a.clone(),
                offset: *b,
                coefficients,
                vertex_indices: (0..vertices.len())
                    .filter(|&i| dot(a, &vertex_points[i]) == *b)
                    .collect(),
                scaled,
            }
        })
        .collect();

    // face lattice: all nonempty intersections of facets
    let mut sets: BTreeSet<Vec<usize>> = facets.iter().map(|f| f.vertex_indices.clone()).collect();
    let mut frontier: Vec<Vec<usize>> = sets.iter().cloned().collect();
    while let Some(s) = frontier.pop() {
        for f in &facets {
            let inter: Vec<usize> = s.iter().copied().filter(|v| f.vertex_indices.contains(v)).collect();
            if !inter.is_empty() && sets.insert(inter.clone()) {
                frontier.push(inter);
            }
        }
    }
    let mut faces: Vec<Face> = sets
        .into_iter()
        .map(|vs| {
            let pts: Vec<&[i64]> = vs.iter().map(|&i| vertex_points[i].as_slice()).collect();
            Face {
                dim: affine_rank(&pts),
                facet_indices: (0..facets.len())
                    .filter(|&j| vs.iter().all(|v| facets[j].vertex_indices.contains(v)))
                    .collect(),
                vertex_indices: vs,
            }
        })
        .collect();
    faces.sort_by(|a, b| (a.dim, &a.vertex_indices).cmp(&(b.dim, &b.vertex_indices)));

    let diagnostic = (!convenient).then(|| "the origin is not an interior point of the Newton polytope".to_string());
    Ok(NewtonPolytope {
        arity: n,
        dimension,
        vertices,
        facets,
        faces,
        convenient,
        scale,
        diagnostic,
    })
}

/// Points of `Supp f` on a face, keyed by exponent.
pub fn face_restriction(f: &Laurent, p: &NewtonPolytope, face: &Face) -> Laurent {
    let on: BTreeMap<ExponentVector, Rational> = f
        .terms()
        .filter(|(k, _)| {
            face.facet_indices.iter().all(|&j| {
                let fc = &p.facets[j];
                k.dot(&fc.normal) == fc.offset
            })
        })
        .map(|(k, c)| (k.clone(), c.clone()))
        .collect();
    Laurent::from_terms(f.arity(), on)
}
