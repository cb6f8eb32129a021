#![allow(dead_code)]

use newton_spectra::parse::{infer_variables, parse_laurent};
use newton_spectra::{Laurent, QMatrix, Rational, Scalar};
use num_traits::{Signed, Zero};

pub const CORPUS: &[&str] = &[
    "u+u^-1",
    "u+u^-2",
    "u^2+u^-2",
    "u1+u2+u1^-1*u2^-1",
    "u1+u2+u1^-1+u2^-1",
    "u1+u2+u1^-1*u2^-2",
    "2*u1 + 3/2*u2 + u1^-1*u2^-1 - 1",
    "u1+u2+u3+u1^-1*u2^-1*u3^-1",
    "u1+u2+u3+u1^-1+u2^-1+u3^-1",
    "u1+u2+u3+u1^-1*u2^-1*u3^-2",
];

pub fn mirror(n: usize) -> String {
    if n == 1 {
        return "u+u^-1".into();
    }
    let vars: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
    let inv: Vec<String> = vars.iter().map(|v| format!("{v}^-1")).collect();
    format!("{}+{}", vars.join("+"), inv.join("*"))
}

pub fn poly(s: &str) -> Laurent {
    let vars = infer_variables(s).unwrap();
    parse_laurent(s, Some(&vars)).unwrap()
}

pub fn q(n: i64) -> Rational {
    Rational::from_i64(n)
}

/// Support points of f other than the origin.
fn support(f: &Laurent) -> Vec<Vec<i64>> {
    f.support()
        .filter(|e| !e.is_zero())
        .map(|e| e.entries().iter().map(|&x| x as i64).collect())
        .collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Gauge function of the convex hull of the support: the least Σλ over
/// nonnegative combinations Σλ_j v_j = m, found over basic solutions.
pub struct GaugeOracle {
    cones: Vec<QMatrix>,
    pub n: usize,
    pub radius: i64,
}

impl GaugeOracle {
    pub fn new(f: &Laurent) -> Self {
        let pts = support(f);
        let n = f.arity();
        let mut cones = Vec::new();
        for s in subsets(pts.len(), n) {
            let rows: Vec<Vec<Rational>> = (0..n).map(|r| s.iter().map(|&j| q(pts[j][r])).collect()).collect();
            if let Some(inv) = QMatrix::from_rows(rows).inverse() {
                cones.push(inv);
            }
        }
        let radius = pts.iter().flatten().map(|x| x.abs()).max().unwrap_or(1);
        GaugeOracle { cones, n, radius }
    }

    pub fn phi(&self, m: &[i64]) -> Rational {
        let v: Vec<Rational> = m.iter().map(|&x| q(x)).collect();
        self.cones
            .iter()
            .filter_map(|inv| {
                let lam = inv.mul_vec(&v);
                if lam.iter().any(|x| x.is_negative()) {
                    None
                } else {
                    Some(lam.into_iter().fold(Rational::zero(), |a, b| a + b))
                }
            })
            .min()
            .expect("origin is interior")
    }

    pub fn phi_poly(&self, g: &Laurent) -> Option<Rational> {
        g.support()
            .map(|e| self.phi(&e.entries().iter().map(|&x| x as i64).collect::<Vec<_>>()))
            .max()
    }

    /// Lattice points with φ ≤ bound, by brute force over a box.
    pub fn points_up_to(&self, bound: i64) -> Vec<(Vec<i64>, Rational)> {
        let r = self.radius * bound;
        let mut out = Vec::new();
        let mut m = vec![-r; self.n];
        loop {
            let p = self.phi(&m);
            if p <= q(bound) {
                out.push((m.clone(), p));
            }
            let mut i = 0;
            loop {
                if i == self.n {
                    return out;
                }
                m[i] += 1;
                if m[i] <= r {
                    break;
                }
                m[i] = -r;
                i += 1;
            }
        }
    }
}

/// Spectrum from the Newton Poincaré series: Σ ν_α t^α = (1 − t)^n Σ_m t^{φ(m)},
/// truncated at α ≤ n.
pub fn spectrum_oracle(f: &Laurent) -> Vec<(Rational, usize)> {
    let g = GaugeOracle::new(f);
    let n = g.n;
    let pts = g.points_up_to(n as i64);
    let mut series: std::collections::BTreeMap<Rational, i64> = Default::default();
    for (_, p) in pts {
        *series.entry(p).or_default() += 1;
    }
    let mut out: std::collections::BTreeMap<Rational, i64> = Default::default();
    for (a, c) in &series {
        for k in 0..=n {
            let binom = (0..k).fold(1i64, |acc, j| acc * (n - j) as i64 / (j + 1) as i64);
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let e = a + q(k as i64);
            if e <= q(n as i64) {
                *out.entry(e).or_default() += sign * binom * c;
            }
        }
    }
    out.into_iter()
        .filter(|(_, c)| *c != 0)
        .map(|(a, c)| (a, usize::try_from(c).expect("nonnegative multiplicity")))
        .collect()
}

pub type C = num_complex::Complex64;

fn terms_f64(f: &Laurent) -> Vec<(Vec<i32>, f64)> {
    use num_traits::ToPrimitive;
    f.terms()
        .map(|(e, c)| (e.entries().to_vec(), c.to_f64().unwrap()))
        .collect()
}

fn eval(terms: &[(Vec<i32>, f64)], u: &[C], weight: impl Fn(&[i32]) -> f64) -> C {
    terms.iter().fold(C::new(0.0, 0.0), |acc, (e, c)| {
        let m = e.iter().zip(u).fold(C::new(1.0, 0.0), |a, (&k, &x)| a * x.powi(k));
        acc + m * (c * weight(e))
    })
}

#[allow(clippy::needless_range_loop)]
fn solve_linear(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Option<Vec<C>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[piv][col].norm() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let k = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] = a[r][c] - k * a[col][c];
                }
                b[r] = b[r] - k * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Critical points of f on the torus by Newton's method in log coordinates
/// from many deterministic starts, deduplicated; returns (point, f(point)).
pub fn critical_points(f: &Laurent) -> Vec<(Vec<C>, C)> {
    let t = terms_f64(f);
    let n = f.arity();
    let mut found: Vec<(Vec<C>, C)> = Vec::new();
    let mut seed = 0x2545f4914f6cdd1du64;
    let mut next = || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..400 {
        let mut u: Vec<C> = (0..n)
            .map(|_| {
                let r = 0.3 + 2.0 * next();
                let a = std::f64::consts::TAU * next();
                C::from_polar(r, a)
            })
            .collect();
        let mut ok = false;
        for _ in 0..100 {
            let g: Vec<C> = (0..n).map(|i| eval(&t, &u, |e| e[i] as f64)).collect();
            if g.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-13 {
                ok = true;
                break;
            }
            // Newton step in w = log u: ∂(ξ_i f)/∂w_j = ξ_jξ_i f
            let h: Vec<Vec<C>> = (0..n)
                .map(|i| (0..n).map(|j| eval(&t, &u, |e| (e[i] * e[j]) as f64)).collect())
                .collect();
            let Some(dw) = solve_linear(h, g) else { break };
            for (x, d) in u.iter_mut().zip(dw) {
                *x *= (-d).exp();
            }
            if u.iter().any(|x| x.norm() < 1e-8 || x.norm() > 1e8) {
                break;
            }
        }
        if ok
            && !found
                .iter()
                .any(|(p, _)| p.iter().zip(&u).all(|(a, b)| (a - b).norm() < 1e-7))
        {
            let v = eval(&t, &u, |_| 1.0);
            found.push((u, v));
        }
    }
    found
}

/// Coefficients, low to high, of Π (S − v) over the given values.
pub fn poly_from_roots(values: &[C]) -> Vec<C> {
    let mut p = vec![C::new(1.0, 0.0)];
    for &v in values {
        let mut next = vec![C::new(0.0, 0.0); p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            next[i + 1] += *c;
            next[i] -= c * v;
        }
        p = next;
    }
    p
}
