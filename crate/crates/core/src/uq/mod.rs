//! Sampling, surrogate modelling and sensitivity statistics.

pub mod pce;
pub mod sampling;
pub mod stats;

pub use pce::{pce_fit, sobol_main_indices, total_degree_two_basis, PceSurrogate, Term};
pub use sampling::{constituents, lhs_sample, Parameter, ParameterSpace, SampleMatrix};
pub use stats::{average_ranks, correlation, correlation_matrix, summary_stats, Correlation, CorrelationMode, Summary};
