//! Exact-arithmetic tools for Pólya frequency sequences of finite order.
//!
//! Coefficients are `BigRational`s throughout; no floating point enters a
//! decision. The modules build on each other:
//!
//! - [`seqcore`]: coefficient windows, Toeplitz minors, fraction-free determinants.
//! - [`pf_check`]: PF_r tests by full enumeration and by contiguous minors.
//! - [`constructors`]: closed forms for `1/(1-z)^{r^2}` and the certified perturbation.
//! - [`domain`]: polygonal domains and pole sums with a dense singular boundary.
//! - [`deflation`]: `(1 - z/T) f(z)`, its mollifier, and boundary limits.
//! - [`cli`]: the `pf-forge` command-line front end.

pub mod cli;
pub mod constructors;
pub mod deflation;
pub mod domain;
pub mod error;
pub mod pf_check;
pub mod rational;
pub mod seqcore;

pub use error::{PfError, Result};
pub use rational::{ComplexRational, Rational};
pub use seqcore::CoeffSeq;
