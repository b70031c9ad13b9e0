//! The cyclic symmetry `S(x₁, x₂, x₃) = (x₂, x₃, x₁)`, the quotient
//! projection `π` onto the region `R_1`, and the factor map `f` with its
//! two affine branches.
//!
//! `S` permutes the best-response regions cyclically and commutes with the
//! dynamics, `S∘T = T∘S`, so the full dynamics factors through `R_1`. On
//! `R_1` minus its indifference boundary the factor map has exactly two
//! affine branches, split by the threshold `u_α·x = α(λ⁻¹−1)+1`:
//!
//! * branch A: `f(x) = λx + (1−λ)e₂` (the plain step, orbit stays in `R_1`),
//! * branch B: `f(x) = λS(x) + (1−λ)e₁` (the step leaves `R_1`; one shift
//!   pulls it back).
//!
//! The symbol `σ` records which branch fired (0 on A, 1 on B). Pairing `f`
//! with a mod-3 sheet counter driven by `σ` gives a skew product whose
//! orbits lift back to orbits of `T` by applying `S^{−sheet}`.

use serde::Serialize;

use crate::dynamics::{classify_region, GameParams, RegionLabel, Strategy};
use crate::error::{Error, Result};

/// Applies the cyclic coordinate shift `S(x₁, x₂, x₃) = (x₂, x₃, x₁)`.
///
/// The permutation is exact: coordinates are moved, never recomputed.
pub fn cyclic_shift(x: &Strategy) -> Strategy {
    let [x1, x2, x3] = x.coords();
    Strategy::from_raw([x2, x3, x1])
}

/// Applies `S^k` for any integer power (negative powers use `S⁻¹ = S²`).
pub fn cyclic_power(x: &Strategy, k: i32) -> Strategy {
    let mut y = *x;
    for _ in 0..k.rem_euclid(3) {
        y = cyclic_shift(&y);
    }
    y
}

/// Projects a point of `R_i` to the fundamental region `R_1` via `S^{i−1}`,
/// returning the projected point together with the source region index `i`.
///
/// Fails with `GammaCollision` when the point carries no region label.
pub fn project_pi(g: &GameParams, x: &Strategy) -> Result<(Strategy, u8)> {
    match classify_region(g, x) {
        RegionLabel::R1 => Ok((*x, 1)),
        RegionLabel::R2 => Ok((cyclic_shift(x), 2)),
        RegionLabel::R3 => Ok((cyclic_power(x, 2), 3)),
        RegionLabel::Gamma => Err(Error::GammaCollision {
            detail: crate::dynamics::gamma_detail(g, x),
        }),
    }
}

/// Branch label of a point of `R̄_1` under the factor map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchLabel {
    /// `u_α·x` above the threshold: the image stays in `R_1` directly.
    A,
    /// `u_α·x` below the threshold: the image needs one shift back.
    B,
    /// Within `gamma_tol` of the branch threshold or of `∂R_1`.
    Gamma1,
}

/// The branch threshold `α(λ⁻¹−1) + 1` separating A from B on `R_1`.
pub fn branch_threshold(g: &GameParams) -> f64 {
    g.alpha() * (1.0 / g.lambda() - 1.0) + 1.0
}

/// Classifies a point of `R̄_1` into branch A, branch B, or the boundary
/// band `Gamma1`.
///
/// Points without a strict `R_1` region label are reported as `Gamma1` as
/// well: the factor map is undefined there.
pub fn classify_branch(g: &GameParams, x: &Strategy) -> BranchLabel {
    if classify_region(g, x) != RegionLabel::R1 {
        return BranchLabel::Gamma1;
    }
    let w = dot3(u_alpha_vec(g), x.coords());
    let th = branch_threshold(g);
    if w > th + g.gamma_tol() {
        BranchLabel::A
    } else if w < th - g.gamma_tol() {
        BranchLabel::B
    } else {
        BranchLabel::Gamma1
    }
}

/// One step of the factor map `f` on `R_1`, returning the image and the
/// branch symbol `σ` (0 on A, 1 on B).
///
/// Fails with `GammaCollision` on `Gamma1`.
pub fn step_f(g: &GameParams, x: &Strategy) -> Result<(Strategy, u8)> {
    let lam = g.lambda();
    match classify_branch(g, x) {
        BranchLabel::A => {
            let [x1, x2, x3] = x.coords();
            let y = [lam * x1, lam * x2 + (1.0 - lam), lam * x3];
            Ok((Strategy::renormalized(y), 0))
        }
        BranchLabel::B => {
            let [s1, s2, s3] = cyclic_shift(x).coords();
            let y = [lam * s1 + (1.0 - lam), lam * s2, lam * s3];
            Ok((Strategy::renormalized(y), 1))
        }
        BranchLabel::Gamma1 => Err(Error::GammaCollision {
            detail: crate::dynamics::gamma_detail(g, x),
        }),
    }
}

/// A point of the skew product: a location in `R̄_1` plus the mod-3 sheet
/// index recording which `S`-copy of the fundamental region it came from.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReducedPoint {
    /// Location in the closure of `R_1`.
    pub x: Strategy,
    /// Sheet index in {0, 1, 2}; the original point is `S^{−sheet}(x)`.
    pub sheet: u8,
}

impl ReducedPoint {
    /// Builds a reduced point, validating the sheet range and that `x`
    /// carries the `R_1` label.
    pub fn new(g: &GameParams, x: Strategy, sheet: u8) -> Result<Self> {
        if sheet > 2 {
            return Err(Error::InvalidStrategy(format!(
                "sheet {sheet} outside 0..=2"
            )));
        }
        if classify_region(g, &x) != RegionLabel::R1 {
            return Err(Error::InvalidStrategy(
                "reduced point must lie in region R1".to_string(),
            ));
        }
        Ok(ReducedPoint { x, sheet })
    }

    /// Recovers the simplex point this reduced point represents.
    pub fn unreduced(&self) -> Strategy {
        cyclic_power(&self.x, -(self.sheet as i32))
    }
}

/// One step of the skew product: applies `step_f` and advances the sheet by
/// the branch symbol mod 3.
pub fn step_skew(g: &GameParams, p: &ReducedPoint) -> Result<ReducedPoint> {
    let (y, sigma) = step_f(g, &p.x)?;
    Ok(ReducedPoint {
        x: y,
        sheet: (p.sheet + sigma) % 3,
    })
}

/// Lifts a factor-map orbit back to the simplex orbit it represents.
///
/// `f_orbit` holds pairs `(x_j, σ_j)` where `σ_j` is the branch symbol at
/// `x_j` (the symbol consumed by the step from `x_j` to `x_{j+1}`), exactly
/// as produced by repeated `step_f` calls. The lifted point `j` is
/// `S^{−sheet_j}(x_j)` with `sheet_0 = start_sheet` and
/// `sheet_{j+1} = sheet_j + σ_j (mod 3)`.
pub fn lift_orbit(f_orbit: &[(Strategy, u8)], start_sheet: u8) -> Vec<Strategy> {
    let mut sheet = start_sheet % 3;
    let mut out = Vec::with_capacity(f_orbit.len());
    for (x, sigma) in f_orbit {
        out.push(cyclic_power(x, -(sheet as i32)));
        sheet = (sheet + sigma) % 3;
    }
    out
}

fn u_alpha_vec(g: &GameParams) -> [f64; 3] {
    crate::dynamics::u_alpha(g)
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
