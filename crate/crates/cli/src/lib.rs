//! Library surface of the command-line front end: model-file parsing and
//! report assembly, kept separate from argument handling for testability.

pub mod model;
pub mod report;

pub use model::{load_model, AnalysisRequest, Model, ModelError, KNOWN_ANALYSES};
pub use report::{run_report, Format, Report, ReportOptions};
