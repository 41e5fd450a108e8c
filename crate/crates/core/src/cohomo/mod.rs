//! The cohomological equation `g(Ax) - g(x) = f(x)` for hyperbolic `A`.

mod decomp;
mod formal;
mod pipeline;
mod problem;
mod resonance;
mod series;
mod splitting;

pub use decomp::{exact_part, flat_split, vanishing_split, FlatSplit, ProductBlid, SubspaceBlid, FLAT_FD_STEP, MAX_FLAT_ORDER};
pub use formal::{eval_taylor, solve_formal, solve_formal_all};
pub use pipeline::{
    ball_samples, box_samples, check_flat, globalize, k0_bound, residual_stats, residuals, solve_flat_local,
    strip_entry, GlobalSolution, LocalSolution, ResidualStats, LOCAL_RESIDUAL_LIMIT,
};
pub use problem::{solve_cohomological, CohomoReport, CohomologicalProblem, CohomologicalSolution, FlatTerm, StageResidual};
pub use resonance::{check_resonances, eigenvalues, nearest_resonances, resonance_residual, Resonance, RESONANCE_TOL};
pub use series::{solve_series, solve_series_certified, Direction, GrowthBound, ScalarFn, SeriesValue, MAX_TERMS};
pub use splitting::{split_hyperbolic, HyperbolicSplitting, SplittingDefects, DEFAULT_MARGIN};
