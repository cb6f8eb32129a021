//! The staged pipeline from a Laurent polynomial to Frobenius data, its JSON
//! document, and the invariant suite behind `check`.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::birkhoff::{
    birkhoff_identity_holds, check_opposite, solve_birkhoff, verify_v_plus, verify_v_solution, BirkhoffSolution,
    Obstruction, OppositenessReport,
};
use crate::brieskorn::{
    check_phig, newton_order, spectrum, t_action_pencil, variance_report, BrieskornElement, ConnectionPencil,
    SpectrumData, VarianceReport,
};
use crate::error::AnalysisError;
use crate::frobenius::{euler_field, FrobeniusInitialData};
use crate::jacobian::JacobianAlgebra;
use crate::nondegeneracy::{is_nondegenerate, CheckMode, NondegeneracyCertificate};
use crate::parse::PolynomialJson;
use crate::polytope::{newton_polytope, NewtonPolytope};
use crate::scalar::{format_rational, Scalar};
use crate::{Laurent, Rational};

pub const SCHEMA: &str = "newton-spectra/1";
pub const DEFAULT_SEED: u64 = 0x6e65_7774_6f6e;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Polytope,
    Nondegeneracy,
    Jacobian,
    Spectrum,
    Pencil,
    Birkhoff,
    Frobenius,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Polytope => "polytope",
            Stage::Nondegeneracy => "nondegeneracy",
            Stage::Jacobian => "jacobian",
            Stage::Pencil => "pencil",
            Stage::Spectrum => "spectrum",
            Stage::Birkhoff => "birkhoff",
            Stage::Frobenius => "frobenius",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    pub seed: u64,
    pub assume_nondegenerate: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            seed: DEFAULT_SEED,
            assume_nondegenerate: false,
        }
    }
}

#[derive(Debug)]
pub struct GateFailure {
    pub stage: Stage,
    pub error: AnalysisError,
}

/// Everything computed up to the requested stage or the first failing gate.
#[derive(Debug)]
pub struct FullReport {
    pub polynomial: Laurent,
    pub vars: Vec<String>,
    pub polytope: Option<NewtonPolytope>,
    pub milnor_volume: Option<u64>,
    pub certificate: Option<NondegeneracyCertificate>,
    pub algebra: Option<JacobianAlgebra>,
    pub pencil: Option<ConnectionPencil>,
    pub spectrum: Option<SpectrumData>,
    pub variance: Option<VarianceReport>,
    pub birkhoff: Option<Result<BirkhoffSolution, Obstruction>>,
    pub opposite: Option<Vec<OppositenessReport>>,
    pub frobenius: Option<FrobeniusInitialData>,
    pub failure: Option<GateFailure>,
}

impl FullReport {
    fn fail(mut self, stage: Stage, error: AnalysisError) -> Self {
        self.failure = Some(GateFailure { stage, error });
        self
    }

    pub fn obstruction(&self) -> Option<&Obstruction> {
        self.birkhoff.as_ref().and_then(|r| r.as_ref().err())
    }

    pub fn solution(&self) -> Option<&BirkhoffSolution> {
        self.birkhoff.as_ref().and_then(|r| r.as_ref().ok())
    }
}

/// Runs the pipeline through `until`, stopping at the first failing gate.
pub fn run_pipeline(f: &Laurent, vars: &[String], opts: ReportOptions, until: Stage) -> FullReport {
    let mut r = FullReport {
        polynomial: f.clone(),
        vars: vars.to_vec(),
        polytope: None,
        milnor_volume: None,
        certificate: None,
        algebra: None,
        pencil: None,
        spectrum: None,
        variance: None,
        birkhoff: None,
        opposite: None,
        frobenius: None,
        failure: None,
    };
    let p = match newton_polytope(f) {
        Ok(p) => p,
        Err(e) => return r.fail(Stage::Polytope, e),
    };
    r.polytope = Some(p.clone());
    if !p.is_convenient() {
        let why = p.diagnostic().unwrap_or("origin is not interior").to_string();
        return r.fail(Stage::Polytope, AnalysisError::NotConvenient(why));
    }
    match p.milnor_number() {
        Ok(m) => r.milnor_volume = Some(m),
        Err(e) => return r.fail(Stage::Polytope, e),
    }
    if until == Stage::Polytope {
        return r;
    }
    if !opts.assume_nondegenerate {
        match is_nondegenerate(f, &p, CheckMode::Probabilistic, opts.seed) {
            Ok(c) => r.certificate = Some(c),
            Err(e) => return r.fail(Stage::Nondegeneracy, e),
        }
    }
    if until == Stage::Nondegeneracy {
        return r;
    }
    let alg = match JacobianAlgebra::new(f, &p) {
        Ok(a) => a,
        Err(e) => return r.fail(Stage::Jacobian, e),
    };
    r.algebra = Some(alg);
    let alg = r.algebra.as_ref().unwrap();
    if until == Stage::Jacobian {
        return r;
    }
    // the spectrum only needs graded dimensions; the pencil is computed after
    let spectra = match spectrum(alg) {
        Ok(s) => s,
        Err(e) => return r.fail(Stage::Spectrum, e),
    };
    r.variance = Some(variance_report(&spectra, alg.arity()));
    r.spectrum = Some(spectra);
    if until == Stage::Spectrum {
        return r;
    }
    let pencil = match t_action_pencil(alg) {
        Ok(b) => b,
        Err(e) => return r.fail(Stage::Pencil, e),
    };
    r.pencil = Some(pencil);
    if until == Stage::Pencil {
        return r;
    }
    let pencil = r.pencil.as_ref().unwrap();
    let degrees = alg.basis().degrees();
    let solved = solve_birkhoff(pencil, &degrees);
    if let Ok(sol) = &solved {
        r.opposite = Some(check_opposite(sol, &degrees));
    }
    r.birkhoff = Some(solved);
    if until == Stage::Birkhoff {
        return r;
    }
    let sol = r.birkhoff.as_ref().and_then(|s| s.as_ref().ok());
    match euler_field(alg, r.spectrum.as_ref().unwrap(), pencil, sol) {
        Ok(fd) => r.frobenius = Some(fd),
        Err(e) => return r.fail(Stage::Frobenius, e),
    }
    r
}

/// The whole pipeline.
pub fn full_report(f: &Laurent, vars: &[String], opts: ReportOptions) -> FullReport {
    run_pipeline(f, vars, opts, Stage::Frobenius)
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

impl FullReport {
    pub fn basis_json(&self) -> Option<Value> {
        let alg = self.algebra.as_ref()?;
        let b = alg.basis();
        Some(Value::Array(
            b.entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let m = Laurent::monomial(e.clone(), Rational::one());
                    json!({
                        "monomial": m.display(&self.vars).to_string(),
                        "exp": e.entries(),
                        "degree": format_rational(&b.degree(i)),
                    })
                })
                .collect(),
        ))
    }

    pub fn dims_json(&self) -> Option<Value> {
        let alg = self.algebra.as_ref()?;
        Some(Value::Array(
            alg.graded_dims()
                .iter()
                .map(|(a, n)| json!([format_rational(a), n]))
                .collect(),
        ))
    }

    pub fn birkhoff_json(&self) -> Value {
        match &self.birkhoff {
            None => Value::Null,
            Some(Ok(sol)) => json!({
                "solution": sol.to_json(),
                "opposite": self.opposite,
                "obstruction": Value::Null,
            }),
            Some(Err(o)) => json!({ "solution": Value::Null, "opposite": Value::Null, "obstruction": o }),
        }
    }

    pub fn failure_json(&self) -> Value {
        match &self.failure {
            None => Value::Null,
            Some(g) => json!({ "stage": g.stage.name(), "message": g.error.to_string() }),
        }
    }

    pub fn to_json(&self) -> Value {
        let alg = self.algebra.as_ref();
        json!({
            "schema": SCHEMA,
            "input": {
                "text": self.polynomial.display(&self.vars).to_string(),
                "vars": self.vars,
                "polynomial": PolynomialJson::from_polynomial(&self.polynomial),
            },
            "polytope": self.polytope.as_ref().map(NewtonPolytope::to_json),
            "mu": self.milnor_volume,
            "mu_jacobian": alg.map(|a| a.graded_dims().iter().map(|(_, n)| n).sum::<usize>()),
            "nondegeneracy": self.certificate,
            "basis": self.basis_json(),
            "graded_dims": self.dims_json(),
            "spectrum": self.spectrum.as_ref().map(SpectrumData::to_json),
            "variance": self.variance.as_ref().map(|v| json!({
                "lhs": format_rational(&v.lhs),
                "rhs": format_rational(&v.rhs),
                "satisfied": v.satisfied,
            })),
            "pencil": self.pencil.as_ref().map(ConnectionPencil::to_json),
            "birkhoff": self.birkhoff_json(),
            "frobenius": self.frobenius.as_ref().map(FrobeniusInitialData::to_json),
            "failure": self.failure_json(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// Reported for information, never a failure.
    Info,
}

#[derive(Clone, Debug)]
pub struct InvariantResult {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl InvariantResult {
    fn new(name: &'static str, ok: bool, detail: impl Into<String>) -> Self {
        InvariantResult {
            name,
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
            detail: detail.into(),
        }
    }
}

/// Random element of G₀ with θ-degree ≤ 2 and small integer coefficients.
pub fn random_lattice_element(rng: &mut impl Rng, mu: usize) -> BrieskornElement {
    BrieskornElement::from_dense(
        (0..mu)
            .map(|_| (0..3).map(|_| Rational::from_i64(rng.gen_range(-3..=3))).collect())
            .collect(),
    )
}

/// Random Laurent polynomial supported on monomials with φ ≤ `max_level`.
pub fn random_form(rng: &mut impl Rng, monomials: &[crate::ExponentVector], terms: usize) -> Laurent {
    let arity = monomials[0].arity();
    let mut g = Laurent::zero(arity);
    for _ in 0..terms {
        let m = &monomials[rng.gen_range(0..monomials.len())];
        let c = Rational::new(rng.gen_range(-5i64..=5).into(), rng.gen_range(1i64..=3).into());
        g.add_term(m.clone(), c);
    }
    g
}

/// Runs every module's invariants on f: polytope and μ, nondegeneracy,
/// spectrum, division, the φ_σ relation, Newton-order laws, Birkhoff form
/// and Frobenius data. `max_level` bounds φ for the sampled forms.
pub fn invariant_suite(
    f: &Laurent,
    vars: &[String],
    opts: ReportOptions,
    max_level: &Rational,
) -> Vec<InvariantResult> {
    let mut out = Vec::new();
    let r = full_report(f, vars, opts);
    let Some(p) = r.polytope.as_ref() else {
        out.push(InvariantResult::new("polytope", false, r.failure_json().to_string()));
        return out;
    };
    let forms_ok = p.facets().iter().all(|fc| {
        fc.vertex_indices.iter().all(|&v| {
            let e = &p.vertices()[v];
            fc.coefficients
                .iter()
                .zip(e.entries())
                .fold(Rational::zero(), |a, (c, x)| a + c * Rational::from_i64(*x as i64))
                .is_one()
        })
    });
    out.push(InvariantResult::new(
        "polytope.facet_forms",
        forms_ok,
        format!("{} facets", p.facets().len()),
    ));
    out.push(InvariantResult::new(
        "polytope.convenient",
        p.is_convenient(),
        p.diagnostic().unwrap_or("").to_string(),
    ));
    if let Some(g) = &r.failure {
        out.push(InvariantResult::new(
            "pipeline",
            false,
            format!("{}: {}", g.stage.name(), g.error),
        ));
        return out;
    }
    let pulled = p.normalized_volume_by_pulling();
    let mu = r.milnor_volume.unwrap_or(0);
    out.push(InvariantResult::new(
        "mu.two_triangulations",
        pulled == mu,
        format!("{mu} vs {pulled}"),
    ));
    let alg = r.algebra.as_ref().expect("algebra present without failure");
    let mu_j: usize = alg.graded_dims().iter().map(|(_, n)| n).sum();
    out.push(InvariantResult::new(
        "mu.jacobian_dimension",
        mu_j as u64 == mu,
        format!("{mu_j} vs {mu}"),
    ));
    if let Some(c) = &r.certificate {
        out.push(InvariantResult::new(
            "nondegeneracy.certificate",
            true,
            format!(
                "{} faces, failure bound {:e}",
                c.faces.len(),
                c.failure_probability_bound
            ),
        ));
    }
    let spectra = r.spectrum.as_ref().unwrap();
    let n = alg.arity();
    let nq = Rational::from_i64(n as i64);
    let ms = spectra.multiset();
    let in_range = ms.iter().all(|b| *b >= Rational::zero() && *b <= nq);
    let mut mirrored: Vec<Rational> = ms.iter().map(|b| &nq - b).collect();
    mirrored.sort();
    out.push(InvariantResult::new("spectrum.range", in_range, ""));
    out.push(InvariantResult::new("spectrum.symmetry", mirrored == ms, ""));
    out.push(InvariantResult::new("spectrum.mass", spectra.mu() as u64 == mu, ""));
    out.push(InvariantResult::new(
        "spectrum.nu0",
        spectra.pairs.first() == Some(&(Rational::zero(), 1)),
        "",
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let monomials = p.enumerate_sublevel(max_level).unwrap_or_default();
    let mut bad = 0;
    for _ in 0..50 {
        let g = random_form(&mut rng, &monomials, 4);
        match alg.divide(&g) {
            Ok(w) if alg.verify_witness(&g, &w).is_ok() => {}
            _ => bad += 1,
        }
    }
    out.push(InvariantResult::new(
        "division.round_trip",
        bad == 0,
        format!("{bad} failures in 50"),
    ));

    let pencil = r.pencil.as_ref().unwrap();
    out.push(InvariantResult::new(
        "pencil.sparsity",
        pencil.respects_filtration(alg.basis()),
        "",
    ));
    let mut phig_bad = 0;
    let mut phig_total = 0;
    for m in &monomials {
        let g = Laurent::monomial(m.clone(), Rational::one());
        for s in 0..p.facets().len() {
            phig_total += 1;
            if check_phig(alg, pencil, &g, s) != Ok(true) {
                phig_bad += 1;
            }
        }
    }
    out.push(InvariantResult::new(
        "phig.relation",
        phig_bad == 0,
        format!("{phig_bad} failures in {phig_total}"),
    ));

    let mut order_bad = 0;
    for _ in 0..50 {
        let x = random_lattice_element(&mut rng, alg.milnor_number() as usize);
        let ox = newton_order(&x, alg.basis());
        let tx = pencil.apply(&x);
        if let (Some(a), Some(b)) = (newton_order(&tx, alg.basis()), ox.clone()) {
            if a > b + Rational::one() {
                order_bad += 1;
            }
        }
        let y = x.shift_theta(1);
        if newton_order(&y, alg.basis()) != ox.map(|o| o + Rational::one()) {
            order_bad += 1;
        }
    }
    out.push(InvariantResult::new(
        "newton_order.laws",
        order_bad == 0,
        format!("{order_bad} failures in 100"),
    ));

    let degrees = alg.basis().degrees();
    match &r.birkhoff {
        Some(Ok(sol)) => {
            out.push(InvariantResult::new(
                "birkhoff.identity",
                birkhoff_identity_holds(pencil, &sol.gauge, &sol.a0, &sol.ainf),
                format!("gauge θ-degree {}", sol.gauge.matrices.len() - 1),
            ));
            out.push(InvariantResult::new(
                "birkhoff.compatible",
                sol.gauge.is_compatible(&degrees),
                "",
            ));
            out.push(InvariantResult::new(
                "birkhoff.v_solution",
                verify_v_solution(sol, &degrees),
                "",
            ));
            out.push(InvariantResult::new(
                "birkhoff.v_plus",
                verify_v_plus(sol, &degrees),
                "",
            ));
            let opp = r.opposite.as_deref().unwrap_or_default();
            out.push(InvariantResult::new(
                "birkhoff.opposite",
                opp.iter().all(|o| o.opposite() && o.nilpotent && o.b_opposed),
                format!("{} graded pieces", opp.len()),
            ));
        }
        Some(Err(o)) => out.push(InvariantResult::new("birkhoff.identity", false, o.to_string())),
        None => {}
    }
    if let Some(fd) = &r.frobenius {
        out.push(InvariantResult::new(
            "frobenius.homogeneity",
            fd.homogeneity == Rational::from_i64(2 - n as i64),
            format!("D = {}", format_rational(&fd.homogeneity)),
        ));
        let mut ex = fd.exponents.clone();
        ex.sort();
        out.push(InvariantResult::new("frobenius.exponents", ex == ms, ""));
        out.push(InvariantResult::new(
            "frobenius.c_from_pencil",
            fd.c == pencil.coefficient(0).column(0),
            rationals(&fd.c).join(", "),
        ));
    }
    if let Some(v) = &r.variance {
        out.push(InvariantResult {
            name: "spectrum.variance",
            outcome: Outcome::Info,
            detail: format!(
                "{} {} {}",
                format_rational(&v.lhs),
                if v.satisfied { ">=" } else { "<" },
                format_rational(&v.rhs)
            ),
        });
    }
    out
}
