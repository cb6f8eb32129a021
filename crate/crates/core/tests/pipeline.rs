mod common;

use common::*;
use newton_spectra::birkhoff::{birkhoff_in_basis, solve_birkhoff, GaugeTransform};
use newton_spectra::brieskorn::{check_phig, newton_order, reduce_form, spectrum, t_action_pencil, variance_report};
use newton_spectra::frobenius::euler_field;
use newton_spectra::jacobian::JacobianAlgebra;
use newton_spectra::polytope::newton_polytope;
use newton_spectra::report::{random_form, random_lattice_element};
use newton_spectra::{ExponentVector, Laurent, QMatrix, Rational};
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn algebra(s: &str) -> JacobianAlgebra {
    let f = poly(s);
    let p = newton_polytope(&f).unwrap();
    JacobianAlgebra::new(&f, &p).unwrap()
}

#[test]
fn mirror_plane_milnor_number_two_ways() {
    let f = poly("u1+u2+u1^-1*u2^-1");
    let p = newton_polytope(&f).unwrap();
    assert_eq!(p.milnor_number().unwrap(), 3);
    assert_eq!(p.normalized_volume_by_pulling(), 3);
    let alg = JacobianAlgebra::new(&f, &p).unwrap();
    assert_eq!(alg.graded_dims().iter().map(|(_, n)| n).sum::<usize>(), 3);
    assert_eq!(critical_points(&f).len(), 3);
}

#[test]
fn mirror_family_mu_and_spectrum() {
    for n in 1..=3usize {
        let s = mirror(n);
        let alg = algebra(&s);
        assert_eq!(alg.milnor_number(), n as u64 + 1, "{s}");
        let spectra = spectrum(&alg).unwrap();
        let expected: Vec<(Rational, usize)> = (0..=n as i64).map(|k| (q(k), 1)).collect();
        assert_eq!(spectra.pairs, expected, "{s}");
        assert_eq!(spectrum_oracle(&poly(&s)), expected, "{s}");
        assert_eq!(critical_points(&poly(&s)).len(), n + 1, "{s}");
    }
}

#[test]
fn corpus_spectrum_matches_poincare_series() {
    for s in CORPUS {
        let f = poly(s);
        let alg = algebra(s);
        let spectra = spectrum(&alg).unwrap();
        assert_eq!(spectra.pairs, spectrum_oracle(&f), "{s}");
        let n = q(f.arity() as i64);
        let ms = spectra.multiset();
        assert!(ms.iter().all(|b| *b >= Rational::zero() && *b <= n), "{s}");
        let mut mirrored: Vec<Rational> = ms.iter().map(|b| &n - b).collect();
        mirrored.sort();
        assert_eq!(mirrored, ms, "{s}");
        assert_eq!(spectra.mu() as u64, alg.milnor_number(), "{s}");
        assert_eq!(spectra.pairs[0], (q(0), 1), "{s}");
    }
}

#[test]
fn corpus_is_morse_with_mu_critical_points() {
    for s in CORPUS {
        let f = poly(s);
        assert_eq!(critical_points(&f).len() as u64, algebra(s).milnor_number(), "{s}");
    }
}

/// Multiplication by f on the Jacobian quotient is B_0; its eigenvalues are
/// the critical values.
#[test]
fn b0_charpoly_matches_critical_values() {
    for s in CORPUS {
        let f = poly(s);
        let alg = algebra(s);
        let b0 = t_action_pencil(&alg).unwrap().coefficient(0);
        let exact = b0.charpoly();
        let values: Vec<C> = critical_points(&f).into_iter().map(|(_, v)| v).collect();
        let numeric = poly_from_roots(&values);
        assert_eq!(numeric.len(), exact.coeffs().len(), "{s}");
        for (a, b) in exact.coeffs().iter().zip(&numeric) {
            let a = a.to_f64().unwrap();
            assert!(
                (a - b.re).abs() < 1e-6 * (1.0 + a.abs()) && b.im.abs() < 1e-6 * (1.0 + a.abs()),
                "{s}: {a} vs {b:?}"
            );
        }
    }
}

#[test]
fn division_round_trip_on_random_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for s in CORPUS {
        let f = poly(s);
        let alg = algebra(s);
        let oracle = GaugeOracle::new(&f);
        let monomials: Vec<ExponentVector> = oracle
            .points_up_to(3)
            .into_iter()
            .map(|(m, _)| ExponentVector::new(m.iter().map(|&x| x as i32).collect()))
            .collect();
        let xi: Vec<Laurent> = (0..f.arity()).map(|i| f.log_derivative(i).unwrap()).collect();
        for _ in 0..200 {
            let omega = random_form(&mut rng, &monomials, 5);
            let w = alg.divide(&omega).unwrap();
            let mut rebuilt = alg.basis_combination(&w.coefficients);
            for (g, x) in w.cofactors.iter().zip(&xi) {
                rebuilt = &rebuilt + &(g * x);
            }
            assert_eq!(rebuilt, omega, "{s}");
            let Some(top) = oracle.phi_poly(&omega) else { continue };
            for (g, x) in w.cofactors.iter().zip(&xi) {
                if let Some(pg) = oracle.phi_poly(g) {
                    assert!(pg <= &top - Rational::one(), "{s}");
                    assert!(oracle.phi_poly(&(g * x)).unwrap() <= top, "{s}");
                }
            }
            let deta = w
                .cofactors
                .iter()
                .enumerate()
                .fold(Laurent::zero(f.arity()), |a, (i, g)| &a + &g.log_derivative(i).unwrap());
            assert_eq!(deta, w.deta);
            if let Some(pd) = oracle.phi_poly(&deta) {
                assert!(pd <= &top - Rational::one(), "{s}");
            }
            let basis_part = alg.basis_combination(&w.coefficients);
            if let Some(pb) = oracle.phi_poly(&basis_part) {
                assert!(pb <= top, "{s}");
            }
        }
    }
}

#[test]
fn phig_relation_on_monomials_up_to_three() {
    for s in CORPUS {
        let f = poly(s);
        let alg = algebra(s);
        let pencil = t_action_pencil(&alg).unwrap();
        let oracle = GaugeOracle::new(&f);
        for (m, _) in oracle.points_up_to(3) {
            let g = Laurent::monomial(ExponentVector::new(m.iter().map(|&x| x as i32).collect()), q(1));
            for sigma in 0..alg.polytope().facets().len() {
                assert!(
                    check_phig(&alg, &pencil, &g, sigma).unwrap(),
                    "{s}: {m:?} on facet {sigma}"
                );
            }
        }
    }
}

#[test]
fn newton_order_laws_on_random_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for s in CORPUS {
        let alg = algebra(s);
        let pencil = t_action_pencil(&alg).unwrap();
        let basis = alg.basis();
        for _ in 0..200 {
            let x = random_lattice_element(&mut rng, basis.len());
            let ox = newton_order(&x, basis);
            let shifted = x.shift_theta(1);
            assert!(shifted.divisible_by_theta());
            assert_eq!(newton_order(&shifted, basis), ox.clone().map(|o| o + Rational::one()));
            assert_eq!(newton_order(&shifted.theta_quotient(), basis), ox);
            if let Some(o) = ox {
                if let Some(ot) = newton_order(&pencil.apply(&x), basis) {
                    assert!(ot <= o + Rational::one(), "{s}");
                }
            }
        }
    }
}

#[test]
fn birkhoff_on_mirrors() {
    for (s, charpoly) in [("u+u^-1", vec![-4, 0, 1]), ("u1+u2+u1^-1*u2^-1", vec![-27, 0, 0, 1])] {
        let alg = algebra(s);
        let pencil = t_action_pencil(&alg).unwrap();
        let deg = alg.basis().degrees();
        let sol = solve_birkhoff(&pencil, &deg).unwrap();
        assert!(sol.is_v_solution && sol.is_v_plus && sol.ainf_semisimple, "{s}");
        let expected: Vec<Rational> = charpoly.into_iter().map(q).collect();
        assert_eq!(sol.a0.charpoly().coeffs(), &expected[..], "{s}");
        let mut eig: Vec<Rational> = sol
            .ainf_eigenvalues
            .clone()
            .unwrap()
            .into_iter()
            .map(|x| if x < Rational::zero() { -x } else { x })
            .collect();
        eig.sort();
        assert_eq!(eig, spectrum(&alg).unwrap().multiset(), "{s}");
    }
}

#[test]
fn birkhoff_solves_the_corpus() {
    for s in CORPUS {
        let alg = algebra(s);
        let pencil = t_action_pencil(&alg).unwrap();
        let deg = alg.basis().degrees();
        let sol = solve_birkhoff(&pencil, &deg).unwrap();
        assert!(sol.gauge.is_compatible(&deg), "{s}");
        assert!(sol.is_v_plus, "{s}");
        let again = solve_birkhoff(&pencil, &deg).unwrap();
        assert_eq!(sol, again);
        for o in newton_spectra::birkhoff::check_opposite(&sol, &deg) {
            assert!(o.opposite() && o.nilpotent && o.b_opposed, "{s}: {o:?}");
        }
    }
}

/// In the basis (ω°, fω°) of the lattice of u + u⁻¹ one has t·ω° = fω° and
/// t·fω° = 4ω° + θ·fω°, since [u²] = [u⁻²] = [1] + θ[u] in G₀.
#[test]
fn primitive_orbit_basis_of_u_plus_inverse() {
    let alg = algebra("u+u^-1");
    let f = alg.polynomial().clone();
    let pencil = t_action_pencil(&alg).unwrap();
    let deg = alg.basis().degrees();
    let cols = [
        reduce_form(&alg, &Laurent::one(1)).unwrap(),
        reduce_form(&alg, &f).unwrap(),
    ];
    let mut p0 = QMatrix::zeros(2, 2);
    for (i, c) in cols.iter().enumerate() {
        assert_eq!(c.theta_degree(), Some(0));
        for j in 0..2 {
            p0[(j, i)] = c.coeff(j, 0);
        }
    }
    assert_eq!(p0, QMatrix::from_i64_rows(&[&[1, 0], &[0, 2]]));
    let sol = birkhoff_in_basis(&pencil, &deg, &GaugeTransform { matrices: vec![p0] }).unwrap();
    assert_eq!(sol.a0, QMatrix::from_i64_rows(&[&[0, 4], &[1, 0]]));
    assert_eq!(sol.ainf, QMatrix::from_i64_rows(&[&[0, 0], &[0, 1]]));
    assert_eq!(sol.degrees, vec![q(0), q(1)]);
}

#[test]
fn frobenius_data() {
    for s in CORPUS {
        let alg = algebra(s);
        let spectra = spectrum(&alg).unwrap();
        let pencil = t_action_pencil(&alg).unwrap();
        let sol = solve_birkhoff(&pencil, &alg.basis().degrees()).unwrap();
        let fd = euler_field(&alg, &spectra, &pencil, Some(&sol)).unwrap();
        assert_eq!(fd.homogeneity, q(2 - alg.arity() as i64), "{s}");
        let mut ex = fd.exponents.clone();
        ex.sort();
        assert_eq!(ex, spectra.multiset());
    }
    // f − 3u1 = −2·ξ_1 f + ξ_2 f, so [fω°] ≡ 3[u1 ω°] modulo θ
    let f = poly("u1+u2+u1^-1*u2^-1");
    let xi1 = f.log_derivative(0).unwrap();
    let xi2 = f.log_derivative(1).unwrap();
    let u1 = poly("u1+0*u2");
    assert_eq!(&f - &u1.scale(&q(3)), &xi2 - &xi1.scale(&q(2)));
    let alg = algebra("u1+u2+u1^-1*u2^-1");
    assert_eq!(alg.basis().entries[1], ExponentVector::new(vec![1, 0]));
    let spectra = spectrum(&alg).unwrap();
    let pencil = t_action_pencil(&alg).unwrap();
    let sol = solve_birkhoff(&pencil, &alg.basis().degrees()).unwrap();
    let fd = euler_field(&alg, &spectra, &pencil, Some(&sol)).unwrap();
    assert_eq!(fd.c, vec![q(0), q(3), q(0)]);
    assert_eq!(fd.euler_field, "t₀∂₀ + 3∂₁ − t₂∂₂");
    let fd1 = euler_field(
        &algebra("u+u^-1"),
        &spectrum(&algebra("u+u^-1")).unwrap(),
        &t_action_pencil(&algebra("u+u^-1")).unwrap(),
        None,
    )
    .unwrap();
    assert_eq!(fd1.euler_field, "t₀∂₀ + 2∂₁");
    assert!(!fd1.pencil_normalized);
}

#[test]
fn variance_inequality_is_reported() {
    for s in CORPUS {
        let alg = algebra(s);
        let v = variance_report(&spectrum(&alg).unwrap(), alg.arity());
        let spectra = spectrum(&alg).unwrap().multiset();
        let half = Rational::new((alg.arity() as i64).into(), 2.into());
        let lhs = spectra
            .iter()
            .map(|b| (b - &half) * (b - &half))
            .fold(Rational::zero(), |a, b| a + b)
            / q(spectra.len() as i64);
        assert_eq!(v.lhs, lhs);
        assert_eq!(v.rhs, Rational::new((alg.arity() as i64).into(), 12.into()));
        if !v.satisfied {
            eprintln!("finding: variance inequality fails for {s}: {} < {}", v.lhs, v.rhs);
        }
    }
}
