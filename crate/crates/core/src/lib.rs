//! Sharp Bohr-type radii for bounded holomorphic functions on the polydisk.
//!
//! The crate is organised bottom-up:
//!
//! * [`multiindex`] enumerates exponent vectors and their multinomial weights.
//! * [`series`] stores truncated multivariate power series together with a
//!   certified bound on the discarded tail.
//! * [`extremal`] builds the Möbius-of-linear-form functions that attain the
//!   radii, with closed-form values and derivatives.
//! * [`functionals`] evaluates the refined Bohr sums on a series or in closed
//!   form on the extremal family.
//! * [`radii`] solves every radius equation with a sign-change certificate.
//! * [`verify`] turns inequalities and their sharpness into reports.
//! * [`cli`] is the command-line front end used by the `bohr` binary.

pub mod cli;
pub mod error;
pub mod extremal;
pub mod functionals;
pub mod multiindex;
pub mod radii;
pub mod series;
pub mod verify;

mod float;

pub use error::{Error, Result};
pub use extremal::{ExtremalFunction, Form, PointSign};
pub use functionals::{EvalContext, Functional, FunctionalValue};
pub use multiindex::MultiIndex;
pub use radii::{RadiusEquation, RootCertificate};
pub use series::{TailBound, TruncatedSeries};
pub use verify::{Tag, Verdict, VerificationReport};
