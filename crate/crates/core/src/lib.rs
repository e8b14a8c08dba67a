//! Numerical toolkit for operator-valued harmonic analysis on matrix algebras.
//!
//! The crate is organised bottom-up:
//!
//! * [`opcore`]: Hermitian arithmetic, functional calculus, Schatten norms and
//!   the Loewner order on `d x d` complex matrices.
//! * [`vvnorms`]: the positive-cone norms `L_p(M; l_inf^+)` and
//!   `L_p(M; l_1^+)` of finite operator sequences, their factorizations and the
//!   trace pairing between them.
//! * [`domsolve`]: minimisation of `||a||_p` over all `a` dominating a finite
//!   family of positive matrices, with dual certificates.
//! * [`avgops`]: matrix-valued functions on a periodic grid and the dyadic
//!   averaging operators acting on them.
//! * [`harness`]: seeded verification suites that check every inequality
//!   against its constant.
//! * [`io`]: the JSON encodings shared by the command-line tool.

pub mod avgops;
pub mod domsolve;
pub mod error;
pub mod harness;
pub mod io;
pub mod opcore;
pub mod random;
pub mod vvnorms;

pub use avgops::{DyadicLevel, GridFunction};
pub use harness::{Suite, SuiteConfig, VerificationReport};
pub use domsolve::{DominantSolution, Method, SolverConfig, StepRule};
pub use error::{Error, Result};
pub use opcore::{Exponent, GeneralOperator, HermitianOperator, Operator, SpectralDecomposition, C64};
pub use vvnorms::{Factorization, L1Factorization, NormResult, OperatorSequence};
