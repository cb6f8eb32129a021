//! Exact computation of Newton-filtration data for convenient, nondegenerate
//! Laurent polynomials: Newton polytope, Milnor number, graded Jacobian
//! quotient, Brieskorn lattice and its connection, spectrum, Birkhoff normal
//! form and Frobenius initial data.

pub mod birkhoff;
pub mod brieskorn;
pub mod error;
pub mod frobenius;
pub mod jacobian;
pub mod laurent;
pub mod linalg;
pub mod nondegeneracy;
pub mod parse;
pub mod polytope;
pub mod report;
pub mod scalar;

pub use error::{AlgebraError, AnalysisError, ParseError};
pub use laurent::{ExponentVector, LaurentPolynomial};
pub use linalg::{Matrix, UniPoly};
pub use scalar::{Fp, Scalar, F61};

pub type Rational = num_rational::BigRational;
pub type Laurent = LaurentPolynomial<Rational>;
pub type QMatrix = Matrix<Rational>;
