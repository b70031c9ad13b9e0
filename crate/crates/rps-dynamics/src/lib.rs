//! Discretized best-response dynamics of the rock-paper-scissors game.
//!
//! The map under study moves a mixed strategy a fixed fraction of the way
//! toward the current pure best response: `T(x) = λx + (1-λ) BR(x)` on the
//! 2-simplex, for a zero-sum game with win payoff `a` and loss payoff `-b`.
//! Outside a narrow neighborhood of the Nash equilibrium the long-run
//! behavior is a finite family of periodic orbits, one per integer `k` in a
//! closed interval `[head, tail]`, with periods `3k`.
//!
//! The crate computes this structure twice and checks itself:
//!
//! * closed form: branch fixed points `w_k`, the counting polynomial and its
//!   root, head/tail/count formulas, bifurcation values of λ
//!   ([`attractor`]);
//! * brute force: direct iteration of the map, first-return simulation on
//!   the fundamental region and itineraries of the return map
//!   ([`dynamics`], [`symmetry`], [`poincare`]).
//!
//! [`scan`] sweeps parameters and rasterizes basins of attraction, [`verify`]
//! runs the complete cross-validation battery, and [`sample`] provides the
//! seeded randomness underneath it all.

pub mod attractor;
pub mod dynamics;
pub mod error;
pub mod poincare;
pub mod sample;
pub mod scan;
pub mod symmetry;
pub mod verify;

pub use attractor::{
    bifurcation_lambda_sym, count_formula_n1, enumerate_attractor, head_tail_count, in_region_rk,
    limit_count, nash_point, q_poly, r_root, shapley_triangle, w_fixed_point, AttractorReport,
    BranchFixedPoint, HeadTail, LimitCount, PeriodicOrbit,
};
pub use dynamics::{
    best_response, classify_region, iterate_t, payoff_vector, step_t, u_alpha, BestResponse,
    GameParams, PureStrategy, RegionLabel, Strategy, Trajectory, DEFAULT_GAMMA_TOL,
};
pub use error::{Error, Result};
pub use poincare::{
    check_monotonicity, classify_bk, first_return, itinerary, poincare_branch, poincare_step,
    return_time, stabilization_ball, Itinerary, MonotonicityViolation, ReturnStructure,
};
pub use sample::{sample_branch_b, sample_regular, sample_simplex, seeded_rng};
pub use scan::{
    basin_raster, bifurcation_sweep, lambda_grid, render_bifurcation_csv, write_bifurcation_csv,
    write_ppm, write_raster_csv, BasinRaster, BifurcationScan, CellLabel, RasterSummary,
};
pub use symmetry::{
    branch_threshold, classify_branch, cyclic_power, cyclic_shift, lift_orbit, project_pi, step_f,
    step_skew, BranchLabel, ReducedPoint,
};
pub use verify::{run_verify, CheckResult, VerifyOptions, VerifyReport};
