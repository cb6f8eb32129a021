//! Dense exact linear algebra over a [`Scalar`] field, a fraction-free
//! integer rank, and univariate polynomials.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::Scalar;
use crate::Rational;

#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: fmt::Display> fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[r * self.cols + c])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Reduced row echelon form `R = T·A`.
#[derive(Clone)]
pub struct Rref<S> {
    pub reduced: Matrix<S>,
    pub transform: Matrix<S>,
    pub pivots: Vec<usize>,
}

impl<S: fmt::Display> fmt::Debug for Rref<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rref")
            .field("reduced", &self.reduced)
            .field("pivots", &self.pivots)
            .finish()
    }
}

impl<S> Rref<S> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn diagonal(entries: &[S]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| S::from_i64(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[S]) {
        assert_eq!(v.len(), self.rows);
        for (r, x) in v.iter().enumerate() {
            self[(r, c)] = x.clone();
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn scale(&self, s: &S) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.mul_ref(s)).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = S::zero();
                for (a, b) in self.row(r).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add_ref(&a.mul_ref(b));
                    }
                }
                acc
            })
            .collect()
    }

    /// Submatrix on the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                m[(i, j)] = self[(r, c)].clone();
            }
        }
        m
    }

    /// Gauss–Jordan elimination with the first nonzero entry as pivot,
    /// recording the row operations.
    pub fn rref(&self) -> Rref<S> {
        let mut a = self.clone();
        let mut t = Self::identity(self.rows);
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !a[(r, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(p, row);
            t.swap_rows(p, row);
            let inv = S::one().div_ref(&a[(row, col)]);
            a.scale_row(row, &inv);
            t.scale_row(row, &inv);
            for r in 0..self.rows {
                if r != row && !a[(r, col)].is_zero() {
                    let factor = a[(r, col)].clone();
                    a.axpy_row(r, row, &factor);
                    t.axpy_row(r, row, &factor);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Rref {
            reduced: a,
            transform: t,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank()
    }

    /// Basis of `{x : A·x = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<S>> {
        let rr = self.rref();
        let mut free = Vec::new();
        let mut pi = 0;
        for c in 0..self.cols {
            if pi < rr.pivots.len() && rr.pivots[pi] == c {
                pi += 1;
            } else {
                free.push(c);
            }
        }
        free.iter()
            .map(|&fc| {
                let mut v = vec![S::zero(); self.cols];
                v[fc] = S::one();
                for (r, &pc) in rr.pivots.iter().enumerate() {
                    v[pc] = -rr.reduced[(r, fc)].clone();
                }
                v
            })
            .collect()
    }

    /// A solution of `A·x = b` with every free unknown set to zero.
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        assert_eq!(b.len(), self.rows);
        let rr = self.rref();
        let tb = rr.transform.mul_vec(b);
        if tb[rr.rank()..].iter().any(|x| !x.is_zero()) {
            return None;
        }
        let mut x = vec![S::zero(); self.cols];
        for (r, &pc) in rr.pivots.iter().enumerate() {
            x[pc] = tb[r].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let rr = self.rref();
        (rr.rank() == self.rows).then_some(rr.transform)
    }

    pub fn determinant(&self) -> S {
        assert!(self.is_square());
        let mut a = self.clone();
        let mut det = S::one();
        for col in 0..self.cols {
            let Some(p) = (col..self.rows).find(|&r| !a[(r, col)].is_zero()) else {
                return S::zero();
            };
            if p != col {
                a.swap_rows(p, col);
                det = -det;
            }
            let pivot = a[(col, col)].clone();
            det = det.mul_ref(&pivot);
            for r in col + 1..self.rows {
                if !a[(r, col)].is_zero() {
                    let factor = a[(r, col)].div_ref(&pivot);
                    a.axpy_row(r, col, &factor);
                }
            }
        }
        det
    }

    /// Characteristic polynomial `det(S·I − A)` by Faddeev–LeVerrier.
    pub fn charpoly(&self) -> UniPoly<S> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![S::zero(); n + 1];
        coeffs[n] = S::one();
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            let mut am = self * &m;
            for i in 0..n {
                am[(i, i)] = am[(i, i)].add_ref(&coeffs[n - k + 1]);
            }
            m = am;
            let amk = self * &m;
            let trace = (0..n).fold(S::zero(), |acc, i| acc.add_ref(&amk[(i, i)]));
            coeffs[n - k] = -trace.div_ref(&S::from_i64(k as i64));
        }
        UniPoly::new(coeffs)
    }

    /// Value of a polynomial at this (square) matrix.
    pub fn eval_poly(&self, p: &UniPoly<S>) -> Self {
        let n = self.rows;
        let mut acc = Self::zeros(n, n);
        for c in p.coeffs().iter().rev() {
            acc = &acc * self;
            for i in 0..n {
                acc[(i, i)] = acc[(i, i)].add_ref(c);
            }
        }
        acc
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn scale_row(&mut self, r: usize, s: &S) {
        for c in 0..self.cols {
            let v = &mut self.data[r * self.cols + c];
            if !v.is_zero() {
                *v = v.mul_ref(s);
            }
        }
    }

    /// `row[dst] -= factor · row[src]`
    fn axpy_row(&mut self, dst: usize, src: usize, factor: &S) {
        for c in 0..self.cols {
            let s = &self.data[src * self.cols + c];
            if s.is_zero() {
                continue;
            }
            let delta = s.mul_ref(factor);
            let d = &mut self.data[dst * self.cols + c];
            *d = d.sub_ref(&delta);
        }
    }
}

impl<S> std::ops::Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.cols + c]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.cols + c]
    }
}

impl<S: Scalar> std::ops::Mul for &Matrix<S> {
    type Output = Matrix<S>;
    fn mul(self, rhs: Self) -> Matrix<S> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out: Matrix<S> = Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = &rhs[(k, c)];
                    if !b.is_zero() {
                        out[(r, c)] = out[(r, c)].add_ref(&a.mul_ref(b));
                    }
                }
            }
        }
        out
    }
}

impl<S: Scalar> std::ops::Add for &Matrix<S> {
    type Output = Matrix<S>;
    fn add(self, rhs: Self) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.add_ref(b)).collect(),
        }
    }
}

impl<S: Scalar> std::ops::Sub for &Matrix<S> {
    type Output = Matrix<S>;
    fn sub(self, rhs: Self) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.sub_ref(b)).collect(),
        }
    }
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
#[allow(clippy::needless_range_loop)]
pub fn bareiss_rank(mut rows: Vec<Vec<BigInt>>) -> usize {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(p, rank);
        let pivot = rows[rank][col].clone();
        for r in rank + 1..m {
            let lead = rows[r][col].clone();
            for c in col..n {
                let v = &pivot * &rows[r][c] - &lead * &rows[rank][c];
                rows[r][c] = v / &prev;
            }
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// Fraction-free rank of a rational matrix (rows are cleared of denominators first).
pub fn rank_fraction_free(a: &Matrix<Rational>) -> usize {
    let rows = (0..a.rows())
        .map(|r| {
            let row = a.row(r);
            let l = crate::scalar::lcm_denominators(row.iter());
            row.iter()
                .map(|q| (q * Rational::from_integer(l.clone())).to_integer())
                .collect()
        })
        .collect();
    bareiss_rank(rows)
}

/// Dense univariate polynomial, coefficients from the constant term up, no trailing zeros.
#[derive(Clone, PartialEq, Debug)]
pub struct UniPoly<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> UniPoly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> S {
        self.coeffs.last().cloned().unwrap_or_else(S::zero)
    }

    pub fn eval(&self, x: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc.mul_ref(x).add_ref(c))
    }

    pub fn derivative(&self) -> Self {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.mul_ref(&S::from_i64(k as i64)))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add_ref(&a.mul_ref(b));
            }
        }
        UniPoly::new(out)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let l = self.leading();
        UniPoly::new(self.coeffs.iter().map(|c| c.div_ref(&l)).collect())
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![S::zero(); r.len() - dd];
        let lead = d.leading();
        for k in (0..q.len()).rev() {
            let c = r[k + dd].div_ref(&lead);
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] = r[k + j].sub_ref(&c.mul_ref(dc));
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (UniPoly::new(q), UniPoly::new(r))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree().unwrap_or(0) == 0
    }

    /// Polynomial `Π (S − r)` over the given roots.
    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a S>) -> Self
    where
        S: 'a,
    {
        roots.into_iter().fold(UniPoly::new(vec![S::one()]), |acc, r| {
            acc.mul(&UniPoly::new(vec![-r.clone(), S::one()]))
        })
    }
}

impl UniPoly<Rational> {
    /// Rational roots with multiplicity, ascending. Candidates come from the
    /// rational root theorem, so integer coefficients must stay below 2^63.
    pub fn rational_roots(&self) -> Option<Vec<Rational>> {
        let mut p = self.clone();
        let mut roots = Vec::new();
        while p.coeffs.first().is_some_and(Zero::is_zero) {
            roots.push(Rational::zero());
            p = UniPoly::new(p.coeffs[1..].to_vec());
        }
        if p.degree().unwrap_or(0) == 0 {
            roots.sort();
            return Some(roots);
        }
        let l = crate::scalar::lcm_denominators(p.coeffs.iter());
        let ints: Vec<BigInt> = p
            .coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let a0 = ints[0].abs().to_u64()?;
        let an = ints.last().unwrap().abs().to_u64()?;
        let mut candidates = Vec::new();
        for num in divisors(a0) {
            for den in divisors(an) {
                let q = Rational::new(BigInt::from(num), BigInt::from(den));
                candidates.push(q.clone());
                candidates.push(-q);
            }
        }
        candidates.sort();
        candidates.dedup();
        for c in candidates {
            let lin = UniPoly::new(vec![-c.clone(), Rational::one()]);
            loop {
                let (q, r) = p.div_rem(&lin);
                if !r.is_zero() {
                    break;
                }
                roots.push(c.clone());
                p = q;
            }
        }
        roots.sort();
        Some(roots)
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut k = 1u64;
    while k.saturating_mul(k) <= n {
        if n.is_multiple_of(k) {
            out.push(k);
            if k != n / k {
                out.push(n / k);
            }
        }
        k += 1;
    }
    out.sort_unstable();
    out
}
