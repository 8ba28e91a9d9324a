//! Estimators: square-root Lasso, debiasing, restricted least squares, MCP
//! and orthogonal-complement projections.

mod least_squares;
mod mcp;
mod normalize;
mod projection;
mod sqrt_lasso;
mod threshold;

pub use least_squares::{restricted_least_squares, SelectionMethod, SupportSet};
pub use mcp::{firm_threshold, mcp_fit, mcp_penalty, McpFit, MCP_MAX_SWEEPS};
pub use normalize::{column_normalize, NormalizedDesign, ZERO_COLUMN_NORM};
pub use projection::{debias, numerical_rank, orthogonal_complement_projector, top_k_project, RANK_TOL};
pub use sqrt_lasso::{
    lambda_at_level, soft_threshold, sqrt_lasso, sqrt_lasso_lambda, sqrt_lasso_with, upper_normal_quantile,
    SqrtLassoFit, SqrtLassoOptions, TracePoint,
};
pub use threshold::{threshold_level, threshold_sqrt_lasso};
