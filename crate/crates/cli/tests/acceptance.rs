//! One line per acceptance criterion. Exact arithmetic throughout; the
//! numeric oracles only cross-check counts and are compared at 1e-6.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use common::*;
use newton_spectra::birkhoff::{birkhoff_in_basis, solve_birkhoff, verify_v_plus, GaugeTransform};
use newton_spectra::brieskorn::{check_phig, newton_order, reduce_form, spectrum, t_action_pencil, variance_report};
use newton_spectra::frobenius::euler_field;
use newton_spectra::jacobian::JacobianAlgebra;
use newton_spectra::polytope::newton_polytope;
use newton_spectra::report::{random_form, random_lattice_element};
use newton_spectra::scalar::format_rational;
use newton_spectra::{ExponentVector, Laurent, QMatrix, Rational};
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::process::Command;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn algebra(s: &str) -> Result<JacobianAlgebra, String> {
    let f = poly(s);
    let p = newton_polytope(&f).map_err(|e| e.to_string())?;
    JacobianAlgebra::new(&f, &p).map_err(|e| format!("{s}: {e}"))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Verdict {
    let f = poly("u1+u2+u1^-1*u2^-1");
    let p = newton_polytope(&f).map_err(|e| e.to_string())?;
    let vol = p.milnor_number().map_err(|e| e.to_string())?;
    let alg = JacobianAlgebra::new(&f, &p).map_err(|e| e.to_string())?;
    let dim: usize = alg.graded_dims().iter().map(|(_, n)| n).sum();
    ensure(vol == 3 && dim == 3, || format!("n!·vol = {vol}, dim quotient = {dim}"))?;
    Ok("n!·vol = 3, dim Ω²/df∧Ω¹ = 3".into())
}

fn criterion_2() -> Verdict {
    for n in 1..=3usize {
        let s = mirror(n);
        let alg = algebra(&s)?;
        let spectra = spectrum(&alg).map_err(|e| e.to_string())?;
        let expected: Vec<(Rational, usize)> = (0..=n as i64).map(|k| (q(k), 1)).collect();
        ensure(alg.milnor_number() == n as u64 + 1, || {
            format!("{s}: μ = {}", alg.milnor_number())
        })?;
        ensure(spectra.pairs == expected, || {
            format!("{s}: spectrum {:?}", spectra.multiset())
        })?;
        ensure(spectrum_oracle(&poly(&s)) == expected, || {
            format!("{s}: Poincaré-series oracle disagrees")
        })?;
        let crit = critical_points(&poly(&s)).len();
        ensure(crit == n + 1, || format!("{s}: {crit} critical points"))?;
    }
    Ok("n = 1, 2, 3: μ = n+1, spectrum {0..n}, oracle and critical-point count agree".into())
}

fn criterion_3() -> Verdict {
    for s in CORPUS {
        let f = poly(s);
        let alg = algebra(s)?;
        let spectra = spectrum(&alg).map_err(|e| format!("{s}: {e}"))?;
        let n = q(f.arity() as i64);
        let ms = spectra.multiset();
        let mut mirrored: Vec<Rational> = ms.iter().map(|b| &n - b).collect();
        mirrored.sort();
        ensure(ms.iter().all(|b| *b >= Rational::zero() && *b <= n), || {
            format!("{s}: out of range")
        })?;
        ensure(mirrored == ms, || format!("{s}: not symmetric"))?;
        ensure(spectra.mu() as u64 == alg.milnor_number(), || format!("{s}: Σν ≠ μ"))?;
        ensure(spectra.pairs[0] == (q(0), 1), || format!("{s}: ν₀ ≠ 1"))?;
        ensure(spectra.pairs == spectrum_oracle(&f), || {
            format!("{s}: Poincaré-series oracle disagrees")
        })?;
    }
    Ok(format!("{} corpus polynomials", CORPUS.len()))
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for s in CORPUS {
        let f = poly(s);
        let alg = algebra(s)?;
        let oracle = GaugeOracle::new(&f);
        let monomials: Vec<ExponentVector> = oracle
            .points_up_to(3)
            .into_iter()
            .map(|(m, _)| ExponentVector::new(m.iter().map(|&x| x as i32).collect()))
            .collect();
        let xi: Vec<Laurent> = (0..f.arity()).map(|i| f.log_derivative(i).unwrap()).collect();
        for k in 0..200 {
            let omega = random_form(&mut rng, &monomials, 5);
            let w = alg.divide(&omega).map_err(|e| format!("{s} #{k}: {e}"))?;
            alg.verify_witness(&omega, &w).map_err(|e| format!("{s} #{k}: {e}"))?;
            let mut rebuilt = alg.basis_combination(&w.coefficients);
            for (g, x) in w.cofactors.iter().zip(&xi) {
                rebuilt = &rebuilt + &(g * x);
            }
            ensure(rebuilt == omega, || format!("{s} #{k}: reassembly"))?;
            if let Some(top) = oracle.phi_poly(&omega) {
                for (g, x) in w.cofactors.iter().zip(&xi) {
                    if let Some(pg) = oracle.phi_poly(g) {
                        ensure(pg <= &top - Rational::one(), || format!("{s} #{k}: φ(g_i)"))?;
                        ensure(oracle.phi_poly(&(g * x)).unwrap() <= top, || {
                            format!("{s} #{k}: φ(g_i ξ_i f)")
                        })?;
                    }
                }
                if let Some(pd) = oracle.phi_poly(&w.deta) {
                    ensure(pd <= &top - Rational::one(), || format!("{s} #{k}: φ(dη)"))?;
                }
            }
        }
    }
    Ok(format!("200 forms with φ ≤ 3 on each of {} polynomials", CORPUS.len()))
}

fn criterion_5() -> Verdict {
    let mut total = 0;
    for s in CORPUS {
        let f = poly(s);
        let alg = algebra(s)?;
        let pencil = t_action_pencil(&alg).map_err(|e| e.to_string())?;
        for (m, _) in GaugeOracle::new(&f).points_up_to(3) {
            let g = Laurent::monomial(ExponentVector::new(m.iter().map(|&x| x as i32).collect()), q(1));
            for sigma in 0..alg.polytope().facets().len() {
                total += 1;
                let ok = check_phig(&alg, &pencil, &g, sigma).map_err(|e| e.to_string())?;
                ensure(ok, || format!("{s}: monomial {m:?}, facet {sigma}"))?;
            }
        }
    }
    Ok(format!("{total} (monomial, facet) pairs"))
}

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for s in CORPUS {
        let alg = algebra(s)?;
        let pencil = t_action_pencil(&alg).map_err(|e| e.to_string())?;
        let basis = alg.basis();
        for k in 0..200 {
            let x = random_lattice_element(&mut rng, basis.len());
            let ox = newton_order(&x, basis);
            let y = x.shift_theta(1);
            ensure(
                y.divisible_by_theta() && newton_order(&y, basis) == ox.clone().map(|o| o + Rational::one()),
                || format!("{s} #{k}: θ-divisible order law"),
            )?;
            if let (Some(o), Some(t)) = (ox, newton_order(&pencil.apply(&x), basis)) {
                ensure(t <= o + Rational::one(), || format!("{s} #{k}: ord(t·x) > ord(x) + 1"))?;
            }
        }
    }
    Ok(format!("200 elements on each of {} polynomials", CORPUS.len()))
}

fn criterion_7() -> Verdict {
    let mut notes = Vec::new();
    for (s, cp) in [("u+u^-1", vec![-4i64, 0, 1]), ("u1+u2+u1^-1*u2^-1", vec![-27, 0, 0, 1])] {
        let alg = algebra(s)?;
        let pencil = t_action_pencil(&alg).map_err(|e| e.to_string())?;
        let deg = alg.basis().degrees();
        let sol = solve_birkhoff(&pencil, &deg).map_err(|o| format!("{s}: {o}"))?;
        ensure(sol.is_v_solution && sol.is_v_plus, || format!("{s}: V/V⁺ flags false"))?;
        let expected: Vec<Rational> = cp.into_iter().map(q).collect();
        ensure(sol.a0.charpoly().coeffs() == &expected[..], || {
            format!("{s}: char(A₀) wrong")
        })?;
        let mut eig: Vec<Rational> = sol
            .ainf_eigenvalues
            .clone()
            .ok_or(format!("{s}: irrational eigenvalues"))?
            .into_iter()
            .map(|x| if x < Rational::zero() { -x } else { x })
            .collect();
        eig.sort();
        ensure(eig == spectrum(&alg).unwrap().multiset(), || {
            format!("{s}: |eig(A_∞)| ≠ spectrum")
        })?;
    }
    notes.push("mirror n = 1, 2 solved".to_string());

    // the basis (ω°, fω°) of the lattice of u + u⁻¹
    let alg = algebra("u+u^-1")?;
    let pencil = t_action_pencil(&alg).map_err(|e| e.to_string())?;
    let deg = alg.basis().degrees();
    let mut p0 = QMatrix::zeros(2, 2);
    for (i, form) in [Laurent::one(1), alg.polynomial().clone()].iter().enumerate() {
        let c = reduce_form(&alg, form).map_err(|e| e.to_string())?;
        for j in 0..2 {
            p0[(j, i)] = c.coeff(j, 0);
        }
    }
    let sol = birkhoff_in_basis(&pencil, &deg, &GaugeTransform { matrices: vec![p0] })
        .ok_or("{ω°, fω°} does not give a Birkhoff form")?;
    let cp: Vec<String> = sol.ainf.charpoly().coeffs().iter().map(format_rational).collect();
    let passes = verify_v_plus(&sol, &deg);
    ensure(!passes, || {
        format!(
            "{}; {{ω°, fω°}} is a Birkhoff form with A₀ = {:?}, A_∞ = {:?}, char(A_∞) coefficients [{}], and it passes the V⁺ test (expected to fail)",
            notes.join(", "),
            sol.a0,
            sol.ainf,
            cp.join(", ")
        )
    })?;
    notes.push("{ω°, fω°} fails V⁺".into());
    Ok(notes.join(", "))
}

fn criterion_8() -> Verdict {
    for s in CORPUS {
        let alg = algebra(s)?;
        let spectra = spectrum(&alg).map_err(|e| e.to_string())?;
        let pencil = t_action_pencil(&alg).map_err(|e| e.to_string())?;
        let sol = solve_birkhoff(&pencil, &alg.basis().degrees()).ok();
        let fd = euler_field(&alg, &spectra, &pencil, sol.as_ref()).map_err(|e| e.to_string())?;
        ensure(fd.homogeneity == q(2 - alg.arity() as i64), || {
            format!("{s}: D = {}", fd.homogeneity)
        })?;
        if *s == "u1+u2+u1^-1*u2^-1" {
            ensure(fd.c == vec![q(0), q(3), q(0)], || format!("c = {:?}", fd.c))?;
            ensure(fd.euler_field == "t₀∂₀ + 3∂₁ − t₂∂₂", || {
                format!("E = {}", fd.euler_field)
            })?;
        }
    }
    Ok("D = 2−n on the corpus; mirror n = 2: c = (0,3,0), E = t₀∂₀ + 3∂₁ − t₂∂₂".into())
}

fn criterion_9() -> Verdict {
    let mut findings = Vec::new();
    for s in CORPUS {
        let alg = algebra(s)?;
        let v = variance_report(&spectrum(&alg).map_err(|e| e.to_string())?, alg.arity());
        if !v.satisfied {
            findings.push(format!(
                "{s}: {} < {}",
                format_rational(&v.lhs),
                format_rational(&v.rhs)
            ));
        }
    }
    if findings.is_empty() {
        Ok("(1/μ)Σ(α−n/2)² ≥ n/12 on every corpus polynomial".into())
    } else {
        Ok(format!("reported, violated for: {}", findings.join("; ")))
    }
}

fn criterion_10() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_newton-spectra");
    for s in CORPUS {
        let run = || {
            Command::new(bin)
                .args(["analyze", s, "--json"])
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure(a.status.success(), || format!("{s}: exit {:?}", a.status.code()))?;
        ensure(a.stdout == b.stdout, || format!("{s}: outputs differ"))?;
    }
    Ok(format!("analyze --json byte-identical on {} inputs", CORPUS.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("mu of u1+u2+u1^-1*u2^-1 two ways", criterion_1),
        ("mirror family mu and spectrum", criterion_2),
        ("corpus spectrum range, symmetry, mass, nu_0", criterion_3),
        ("division round trip and degree bounds", criterion_4),
        ("phi_sigma relation in G", criterion_5),
        ("Newton-order laws", criterion_6),
        ("Birkhoff normal form", criterion_7),
        ("Frobenius data", criterion_8),
        ("variance inequality (reported)", criterion_9),
        ("determinism of analyze --json", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
