//! Exact arithmetic for the congruence product sums
//!
//! ```text
//! S_k(n, m) = sum of a_1 * ... * a_k over reduced a_i in 1..=n with a_1 * ... * a_k = m (mod n)
//! ```
//!
//! together with the Dirichlet character sums, additive character sums and
//! explicit inequalities used to estimate them. Every quantity is computable
//! by at least two independent routes so that the checkers in [`verify`]
//! can compare one against the other.

pub mod arith;
pub mod characters;
mod error;
pub mod expsums;
pub mod sk_engine;
pub mod verify;

pub use arith::{ExactRational, Factorization};
pub use characters::{CharacterGroup, DirichletCharacter, Parity, UnitValue};
pub use error::{Error, Result};
pub use sk_engine::{Method, ResidueTable, SkResult};
pub use verify::{CheckKind, SweepReport, Value, VerificationRecord};
