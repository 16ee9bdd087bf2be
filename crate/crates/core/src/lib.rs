//! Exact constant-term extraction for Elliott-rational functions.
//!
//! The pipeline has three stages: insert slack variables so denominator
//! factors are pairwise coprime ([`term::add_slack`]), eliminate the
//! constant-term variables one at a time ([`engine::ct_all`]), and finally
//! remove the slack variables by an exponential substitution
//! ([`slack::eliminate_slack`]). [`apps`] builds the input for knapsack
//! counting, linear Diophantine systems and Ehrhart series; [`oracle`]
//! holds brute-force ground truth.

pub mod apps;
pub mod checkpoint;
pub mod engine;
pub mod error;
pub mod field;
pub mod monomial;
pub mod oracle;
pub mod pipeline;
pub mod poly;
pub mod slack;
pub mod system;
pub mod term;
pub mod vars;

pub use apps::{diophantine_count, ehrhart_series, knapsack_count, series_coeffs, EhrhartResult};
pub use engine::{ct_all, ct_var, CtOutcome, EngineOptions, EngineStats, OrderPolicy, SlackPolicy};
pub use error::{Error, Result};
pub use field::{CoefficientRing, Field, Integers, PrimeField, Rationals};
pub use monomial::{Exponents, Monomial, Verdict};
pub use pipeline::{solve, Arithmetic, CtProblem, PipelineOptions, Solution, Value};
pub use poly::LaurentPoly;
pub use slack::{eliminate_slack, ExactValue, LambdaVector, RationalFunction, SlackValue};
pub use system::{magic_square_system, DiophantineSystem, Task};
pub use term::{add_slack, collect_terms, ElliottTerm, Poly, TermSum};
pub use vars::{Role, VarId, Variable, VariableTable};
