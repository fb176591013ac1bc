//! Dimensions of periodic points, cycle enumeration, the multifractal
//! formalism check and L^q-spectrum estimates on a transition graph.

mod cycles;
mod formalism;
mod lq;
mod path;
mod spectral;

use thiserror::Error;

use crate::field::FieldError;
use crate::graph::GraphError;

pub use cycles::{
    dimension_bounds, pumped_family, simple_cycles, CycleDimension, CycleKind, DimensionBounds,
    PumpedFamily, Trend,
};
pub use formalism::{mf_formalism_check, vector_form, FormalismVerdict};
pub use lq::{concave_conjugate, concavity_defect, lq_spectrum, LqPoint, LqOptions, LqReport};
pub use path::{path_data, PathData};
pub use spectral::{periodic_dimension, spectral_radius, DimensionEstimate, Enclosure};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnalysisError {
    #[error("edge sequence is not an admissible path: {0}")]
    NotAdmissible(String),
    #[error("matrix is {rows}x{cols}, not square")]
    NonSquare { rows: usize, cols: usize },
    #[error("the cycle matrix is nilpotent; no local dimension")]
    ZeroSpectralRadius,
    #[error("path cut exceeded the budget of {0} paths; raise t_min")]
    PathBudgetExceeded(usize),
    #[error("{0}")]
    InvalidOption(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Field(#[from] FieldError),
}
