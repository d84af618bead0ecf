//! Command-line front end for the perturbation library: matrix files in,
//! machine-readable reports out.

pub mod commands;
pub mod format;
pub mod report;

pub use commands::{
    cmd_approx, cmd_order, cmd_wihler, ApproxArgs, ApproxMode, CliError, OrderArgs, ProblemArg,
    TolArgs, WihlerArgs, EXIT_ORDER_FAILED, SEED_ENV_VAR,
};
pub use format::{parse_scales, FormatError, MatrixFile, MatrixKind, MAX_DIM};
pub use report::{ConfigEcho, NamedMatrix, RunReport, Summary, ARTIFACT_VERSION};
