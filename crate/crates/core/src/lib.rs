//! Cooperative orienteering with time windows: a team of identical members
//! collects rewards at customers, each of which must be served
//! simultaneously by a given number of members inside its time window.
//!
//! The crate reads benchmark files and augments them with member
//! requirements ([`instance`]), precomputes travel data ([`model`]), checks
//! and schedules routings ([`schedule`]), and solves instances with a
//! savings-based heuristic ([`mcw`]) or an exact search for small cases
//! ([`oracle`]). [`bench`] holds the command-line operations.

pub mod bench;
pub mod error;
pub mod instance;
pub mod mcw;
pub mod model;
pub mod oracle;
pub mod savings;
pub mod schedule;
pub mod solution;

pub use error::{InstanceError, ParseError, SolutionParseError};
pub use instance::{augment, truncate, Instance, RawInstance, Vertex, DEPOT};
pub use mcw::{solve, McwConfig, SolverResult};
pub use model::{DistanceConvention, Model};
pub use oracle::{exact_solve, optimality_gap, BoundMode, OracleConfig, OracleResult};
pub use savings::{calc_saving_pairs, saving_value, SavingParams};
pub use schedule::{check_solution, fixed_point, propagate_schedule, FeasibilityReport};
pub use solution::{objective, read_solution, write_solution, Solution};
