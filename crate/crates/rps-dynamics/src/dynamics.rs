//! Core dynamics: the game, the best-response regions of the simplex and the
//! discretized best-response map `T(x) = λx + (1−λ)BR(x)`.
//!
//! Coordinates are ordered (Rock, Paper, Scissors). The payoff matrix awards
//! `a > 0` for a win and `−b < 0` for a loss, and the single shape parameter
//! `α = a/b` controls all of the geometry. The simplex splits into three open
//! regions `R_1, R_2, R_3` where the best response is constant (Paper,
//! Scissors, Rock respectively); on the indifference set Γ between them the
//! best response ties and the map is undefined.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default half-width of the exclusion band around the indifference set.
pub const DEFAULT_GAMMA_TOL: f64 = 1e-9;

/// Strategies of the underlying one-shot game, in coordinate order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PureStrategy {
    Rock,
    Paper,
    Scissors,
}

impl PureStrategy {
    /// Coordinate index of the pure strategy.
    pub fn index(self) -> usize {
        match self {
            PureStrategy::Rock => 0,
            PureStrategy::Paper => 1,
            PureStrategy::Scissors => 2,
        }
    }

    /// The vertex of the simplex playing this strategy with certainty.
    pub fn vertex(self) -> Strategy {
        let mut c = [0.0; 3];
        c[self.index()] = 1.0;
        Strategy(c)
    }
}

/// Result of a best-response query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BestResponse {
    /// A unique maximizing pure strategy, with margin above `gamma_tol`.
    Pure(PureStrategy),
    /// Two or more pure strategies tie within `gamma_tol`.
    Indifferent,
}

/// Label of a simplex point under the best-response partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionLabel {
    /// Best response Paper.
    R1,
    /// Best response Scissors.
    R2,
    /// Best response Rock.
    R3,
    /// Within `gamma_tol` of an indifference line.
    Gamma,
}

impl RegionLabel {
    /// Region index 1..=3, or `None` for Γ.
    pub fn index(self) -> Option<u8> {
        match self {
            RegionLabel::R1 => Some(1),
            RegionLabel::R2 => Some(2),
            RegionLabel::R3 => Some(3),
            RegionLabel::Gamma => None,
        }
    }

    /// The constant best response on this region.
    pub fn best_response(self) -> Option<PureStrategy> {
        match self {
            RegionLabel::R1 => Some(PureStrategy::Paper),
            RegionLabel::R2 => Some(PureStrategy::Scissors),
            RegionLabel::R3 => Some(PureStrategy::Rock),
            RegionLabel::Gamma => None,
        }
    }
}

/// A mixed strategy: a point of the 2-simplex with coordinates
/// (Rock, Paper, Scissors).
///
/// Construction validates non-negativity and renormalizes the sum to 1, so
/// every held value satisfies the simplex invariants to machine precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "[f64; 3]")]
pub struct Strategy([f64; 3]);

impl From<Strategy> for [f64; 3] {
    fn from(s: Strategy) -> [f64; 3] {
        s.0
    }
}

impl Strategy {
    /// Builds a strategy from raw coordinates.
    ///
    /// Coordinates must be non-negative and finite, and must sum to 1 within
    /// `1e-9`; the stored value is renormalized to sum exactly to 1.
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        let c = [x1, x2, x3];
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidStrategy(format!(
                "non-finite coordinate in {c:?}"
            )));
        }
        if c.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidStrategy(format!(
                "negative coordinate in {c:?}"
            )));
        }
        let sum = x1 + x2 + x3;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidStrategy(format!(
                "coordinates sum to {sum}, not 1"
            )));
        }
        Ok(Strategy([x1 / sum, x2 / sum, x3 / sum]))
    }

    /// Renormalizes raw non-negative coordinates to the simplex.
    ///
    /// Used internally after affine steps, whose output is non-negative by
    /// construction but may drift from unit sum by a few ulp.
    pub(crate) fn renormalized(c: [f64; 3]) -> Self {
        let sum = c[0] + c[1] + c[2];
        Strategy([c[0] / sum, c[1] / sum, c[2] / sum])
    }

    /// Wraps coordinates that already satisfy the simplex invariants, such as
    /// a permutation of a held value. Skips renormalization so that exact
    /// coordinate identities are preserved.
    pub(crate) fn from_raw(c: [f64; 3]) -> Self {
        Strategy(c)
    }

    /// Coordinate array (Rock, Paper, Scissors).
    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    /// Euclidean distance to another strategy.
    pub fn dist(&self, other: &Strategy) -> f64 {
        let d0 = self.0[0] - other.0[0];
        let d1 = self.0[1] - other.0[1];
        let d2 = self.0[2] - other.0[2];
        (d0 * d0 + d1 * d1 + d2 * d2).sqrt()
    }

    /// Maximum coordinate-wise distance to another strategy.
    pub fn dist_max(&self, other: &Strategy) -> f64 {
        (0..3)
            .map(|i| (self.0[i] - other.0[i]).abs())
            .fold(0.0, f64::max)
    }
}

/// Parameters of the discretized best-response dynamics.
///
/// `a, b > 0` are the win/loss payoffs, `α = a/b`, and `λ = 1 − ε ∈ (0, 1)`
/// is the inertia of one update step. `gamma_tol` is the numeric half-width
/// of the indifference-set exclusion band.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GameParams {
    a: f64,
    b: f64,
    alpha: f64,
    lambda: f64,
    epsilon: f64,
    gamma_tol: f64,
}

impl GameParams {
    /// Builds parameters from payoffs `a, b` and inertia `λ`.
    pub fn new(a: f64, b: f64, lambda: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) || !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParams(format!(
                "payoffs must be positive, got a={a}, b={b}"
            )));
        }
        if !(lambda.is_finite() && lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidParams(format!(
                "lambda must lie in (0, 1), got {lambda}"
            )));
        }
        Ok(GameParams {
            a,
            b,
            alpha: a / b,
            lambda,
            epsilon: 1.0 - lambda,
            gamma_tol: DEFAULT_GAMMA_TOL,
        })
    }

    /// Builds parameters from the shape ratio `α` alone, taking `a = α, b = 1`.
    pub fn from_alpha(alpha: f64, lambda: f64) -> Result<Self> {
        GameParams::new(alpha, 1.0, lambda)
    }

    /// Builds parameters from payoffs and step size `ε = 1 − λ`.
    pub fn from_epsilon(a: f64, b: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParams(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        GameParams::new(a, b, 1.0 - epsilon)
    }

    /// Replaces the indifference-band tolerance (default `1e-9`).
    pub fn with_gamma_tol(mut self, gamma_tol: f64) -> Result<Self> {
        if !(gamma_tol.is_finite() && gamma_tol > 0.0 && gamma_tol < 1e-2) {
            return Err(Error::InvalidParams(format!(
                "gamma_tol must lie in (0, 1e-2), got {gamma_tol}"
            )));
        }
        self.gamma_tol = gamma_tol;
        Ok(self)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Shape ratio `α = a/b`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Inertia `λ = 1 − ε`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Step size `ε = 1 − λ`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma_tol(&self) -> f64 {
        self.gamma_tol
    }
}

/// The payoff vector `Ay` of all pure strategies against mixed strategy `y`.
pub fn payoff_vector(g: &GameParams, y: &Strategy) -> [f64; 3] {
    let [y1, y2, y3] = y.coords();
    let (a, b) = (g.a, g.b);
    [
        -b * y2 + a * y3, // Rock: loses to Paper, beats Scissors
        a * y1 - b * y3,  // Paper: beats Rock, loses to Scissors
        -b * y1 + a * y2, // Scissors: loses to Rock, beats Paper
    ]
}

/// Best response against `y`: the payoff-maximizing pure strategy, or
/// `Indifferent` when the top two payoffs tie within `gamma_tol`.
pub fn best_response(g: &GameParams, y: &Strategy) -> BestResponse {
    let p = payoff_vector(g, y);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| p[j].partial_cmp(&p[i]).unwrap());
    if p[order[0]] - p[order[1]] > g.gamma_tol {
        let pure = match order[0] {
            0 => PureStrategy::Rock,
            1 => PureStrategy::Paper,
            _ => PureStrategy::Scissors,
        };
        BestResponse::Pure(pure)
    } else {
        BestResponse::Indifferent
    }
}

/// The normal vector `u_α = (α+2, 1−α, 0)` whose level set `u_α·x = 1`
/// carries one indifference line; its cyclic shifts carry the other two.
pub fn u_alpha(g: &GameParams) -> [f64; 3] {
    [g.alpha + 2.0, 1.0 - g.alpha, 0.0]
}

/// The three region coordinates `(u_α·x, S(u_α)·x, S²(u_α)·x)`.
///
/// On the simplex they sum to 3, and the region conditions are threshold
/// tests of these values against 1.
pub(crate) fn region_dots(g: &GameParams, x: &Strategy) -> [f64; 3] {
    let [x1, x2, x3] = x.coords();
    let (p, q) = (g.alpha + 2.0, 1.0 - g.alpha);
    [
        p * x1 + q * x2, // u_α·x
        q * x1 + p * x3, // S(u_α)·x
        p * x2 + q * x3, // S²(u_α)·x
    ]
}

/// Classifies a simplex point into `R_1`, `R_2`, `R_3` or Γ.
///
/// A region label requires both of its threshold inequalities to hold with
/// margin greater than `gamma_tol`; anything else is Γ. The three region
/// conditions are pairwise contradictory, so at most one can hold.
pub fn classify_region(g: &GameParams, x: &Strategy) -> RegionLabel {
    let [v0, v1, v2] = region_dots(g, x);
    let tol = g.gamma_tol;
    if v0 > 1.0 + tol && v1 < 1.0 - tol {
        RegionLabel::R1
    } else if v2 > 1.0 + tol && v0 < 1.0 - tol {
        RegionLabel::R2
    } else if v1 > 1.0 + tol && v2 < 1.0 - tol {
        RegionLabel::R3
    } else {
        RegionLabel::Gamma
    }
}

/// One step of the discretized best-response map
/// `T(x) = λx + (1−λ) e_{BR(x)}`.
///
/// Fails with `GammaCollision` when `x` lies in the Γ band.
pub fn step_t(g: &GameParams, x: &Strategy) -> Result<Strategy> {
    let region = classify_region(g, x);
    let target = region
        .best_response()
        .ok_or_else(|| Error::GammaCollision {
            detail: gamma_detail(g, x),
        })?;
    let lam = g.lambda;
    let mut c = x.coords();
    for v in &mut c {
        *v *= lam;
    }
    c[target.index()] += 1.0 - lam;
    Ok(Strategy::renormalized(c))
}

/// Names the tied pure strategies for a Γ diagnostic message.
pub(crate) fn gamma_detail(g: &GameParams, x: &Strategy) -> String {
    let p = payoff_vector(g, x);
    let names = ["Rock", "Paper", "Scissors"];
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| p[j].partial_cmp(&p[i]).unwrap());
    let scale = g.gamma_tol * (1.0 + g.a.max(g.b));
    let mut tied = vec![names[order[0]]];
    for &i in &order[1..] {
        if p[order[0]] - p[i] <= scale {
            tied.push(names[i]);
        }
    }
    if tied.len() > 1 {
        format!("best-response tie between {}", tied.join(" and "))
    } else {
        // Margin sits between the payoff scale and the raw region tolerance;
        // report the nearest competitor.
        format!(
            "best response nearly ties between {} and {}",
            names[order[0]], names[order[1]]
        )
    }
}

/// A finite orbit of `T` with per-point region labels.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    /// Visited points, starting with the initial condition.
    pub points: Vec<Strategy>,
    /// Region label of each point in `points`.
    pub labels: Vec<RegionLabel>,
    /// True when iteration stopped early on a Γ point.
    pub hit_gamma: bool,
}

impl Trajectory {
    /// Number of steps actually taken (points.len() − 1).
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

/// Iterates `T` for up to `n` steps, recording points and labels.
///
/// If some iterate lands in the Γ band the trajectory is truncated there and
/// `hit_gamma` is set; no perturbation is applied. Callers that need to
/// continue past Γ perturb or resample explicitly.
pub fn iterate_t(g: &GameParams, x0: &Strategy, n: usize) -> Trajectory {
    let mut points = Vec::with_capacity(n + 1);
    let mut labels = Vec::with_capacity(n + 1);
    let mut x = *x0;
    points.push(x);
    labels.push(classify_region(g, &x));
    for _ in 0..n {
        if labels.last() == Some(&RegionLabel::Gamma) {
            break;
        }
        match step_t(g, &x) {
            Ok(next) => {
                x = next;
                points.push(x);
                labels.push(classify_region(g, &x));
            }
            Err(_) => break,
        }
    }
    let hit_gamma = labels.last() == Some(&RegionLabel::Gamma);
    Trajectory {
        points,
        labels,
        hit_gamma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strat(x1: f64, x2: f64, x3: f64) -> Strategy {
        Strategy::new(x1, x2, x3).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(GameParams::new(1.0, 1.0, 0.8).is_ok());
        assert!(GameParams::new(0.0, 1.0, 0.8).is_err());
        assert!(GameParams::new(1.0, -2.0, 0.8).is_err());
        assert!(GameParams::new(1.0, 1.0, 1.0).is_err());
        assert!(GameParams::new(1.0, 1.0, 0.0).is_err());
        let g = GameParams::from_epsilon(2.0, 1.0, 0.2).unwrap();
        assert!((g.lambda() - 0.8).abs() < 1e-15);
        assert!((g.alpha() - 2.0).abs() < 1e-15);
        assert!(GameParams::from_alpha(0.5, 0.8).unwrap().b() == 1.0);
        assert!(GameParams::new(1.0, 1.0, 0.8)
            .unwrap()
            .with_gamma_tol(0.0)
            .is_err());
    }

    #[test]
    fn strategy_validation() {
        assert!(Strategy::new(0.5, 0.3, 0.2).is_ok());
        assert!(Strategy::new(0.5, 0.6, -0.1).is_err());
        assert!(Strategy::new(0.5, 0.5, 0.5).is_err());
        assert!(Strategy::new(f64::NAN, 0.5, 0.5).is_err());
        // Slightly off sums are renormalized to exactly 1.
        let s = Strategy::new(0.3 + 1e-12, 0.3, 0.4).unwrap();
        let c = s.coords();
        assert!(((c[0] + c[1] + c[2]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn payoff_vector_at_barycenter_is_constant() {
        let g = GameParams::new(2.0, 1.0, 0.5).unwrap();
        let e = strat(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
        let p = payoff_vector(&g, &e);
        for v in p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn best_response_example() {
        let g = GameParams::new(1.0, 1.0, 0.8).unwrap();
        let y = strat(0.6, 0.3, 0.1);
        // Payoffs: Rock −0.2, Paper 0.5, Scissors −0.3.
        assert_eq!(
            best_response(&g, &y),
            BestResponse::Pure(PureStrategy::Paper)
        );
        let e = strat(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
        assert_eq!(best_response(&g, &e), BestResponse::Indifferent);
    }

    #[test]
    fn u_alpha_example() {
        let g = GameParams::from_alpha(0.5, 0.8).unwrap();
        assert_eq!(u_alpha(&g), [2.5, 0.5, 0.0]);
    }

    #[test]
    fn region_examples() {
        let g = GameParams::new(1.0, 1.0, 0.8).unwrap();
        assert_eq!(classify_region(&g, &strat(0.6, 0.3, 0.1)), RegionLabel::R1);
        assert_eq!(classify_region(&g, &strat(0.1, 0.6, 0.3)), RegionLabel::R2);
        assert_eq!(classify_region(&g, &strat(0.3, 0.1, 0.6)), RegionLabel::R3);
        let e = strat(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
        assert_eq!(classify_region(&g, &e), RegionLabel::Gamma);
    }

    #[test]
    fn region_label_matches_best_response() {
        let g = GameParams::new(3.0, 2.0, 0.8).unwrap();
        let x = strat(0.7, 0.2, 0.1);
        let label = classify_region(&g, &x);
        let br = best_response(&g, &x);
        assert_eq!(br, BestResponse::Pure(label.best_response().unwrap()));
    }

    #[test]
    fn step_t_example() {
        let g = GameParams::new(1.0, 1.0, 0.5).unwrap();
        let x = strat(0.6, 0.3, 0.1);
        let y = step_t(&g, &x).unwrap();
        assert!(y.dist(&strat(0.3, 0.65, 0.05)) < 1e-12);
    }

    #[test]
    fn step_t_rejects_gamma() {
        let g = GameParams::new(1.0, 1.0, 0.5).unwrap();
        let e = strat(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
        match step_t(&g, &e) {
            Err(Error::GammaCollision { detail }) => {
                assert!(
                    detail.contains("Rock") && detail.contains("Paper"),
                    "{detail}"
                );
            }
            other => panic!("expected GammaCollision, got {other:?}"),
        }
    }

    #[test]
    fn iterate_t_zero_steps_and_gamma_start() {
        let g = GameParams::new(1.0, 1.0, 0.8).unwrap();
        let x = strat(0.6, 0.3, 0.1);
        let traj = iterate_t(&g, &x, 0);
        assert_eq!(traj.points.len(), 1);
        assert_eq!(traj.steps(), 0);
        assert!(!traj.hit_gamma);

        let e = strat(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
        let traj = iterate_t(&g, &e, 10);
        assert_eq!(traj.points.len(), 1);
        assert!(traj.hit_gamma);
    }

    #[test]
    fn iterate_t_preserves_simplex() {
        let g = GameParams::new(2.0, 1.0, 0.9).unwrap();
        let traj = iterate_t(&g, &strat(0.8, 0.15, 0.05), 500);
        assert!(!traj.hit_gamma);
        assert_eq!(traj.points.len(), 501);
        for p in &traj.points {
            let c = p.coords();
            assert!(((c[0] + c[1] + c[2]) - 1.0).abs() < 1e-12);
            assert!(c.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
