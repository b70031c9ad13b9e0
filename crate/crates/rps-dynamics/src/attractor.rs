//! Closed-form attractor theory: the branch fixed points `w_k`, the
//! quadratic `q_{α,λ}` and its root `r_α(λ)`, the parameter regions
//! `𝓡_k = {r < λ^k < α}`, the head/tail/count functions, full enumeration
//! of the periodic attractor orbits, and the limit objects (Nash point,
//! Shapley triangle, λ→0 and λ→1 counts) used as independent oracles.

use serde::Serialize;

use crate::dynamics::{iterate_t, GameParams, Strategy};
use crate::error::{Error, Result};
use crate::symmetry::{cyclic_power, cyclic_shift};

/// Relative slack under which a floor/ceil argument counts as sitting on a
/// breakpoint, making the orbit count ambiguous at f64 precision.
pub const BREAKPOINT_TOL: f64 = 1e-12;

/// The fixed point of the k-th extended return branch,
/// `w_k = (λ^{k−1}(1−λ^k), 1−λ^{k−1}+λ^{3k−1}−λ^{3k}, λ^{2k−1}(1−λ^k)) / (1−λ^{3k})`.
///
/// Depends on λ only. When `λ^{3k}` underflows below `1e-300` the
/// denominator is taken as exactly 1.
pub(crate) fn w_point(lambda: f64, k: u32) -> Strategy {
    let l = lambda;
    let ki = k as i32;
    let lk1 = l.powi(ki - 1);
    let lk = l.powi(ki);
    let l2k1 = l.powi(2 * ki - 1);
    let l3k1 = l.powi(3 * ki - 1);
    let l3k = l.powi(3 * ki);
    let den = if l3k < 1e-300 { 1.0 } else { 1.0 - l3k };
    Strategy::renormalized([
        lk1 * (1.0 - lk) / den,
        (1.0 - lk1 + l3k1 - l3k) / den,
        l2k1 * (1.0 - lk) / den,
    ])
}

/// A branch fixed point together with its attractor-membership flag.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchFixedPoint {
    pub k: u32,
    pub w: Strategy,
    /// Whether `(α,λ)` lies in `𝓡_k`, i.e. this fixed point anchors one of
    /// the attractor orbits.
    pub is_attractor_member: bool,
}

/// The fixed point `w_k` of the k-th extended return branch.
pub fn w_fixed_point(g: &GameParams, k: u32) -> BranchFixedPoint {
    BranchFixedPoint {
        k,
        w: w_point(g.lambda(), k),
        is_attractor_member: in_region_rk(g, k),
    }
}

/// The membership quadratic
/// `q_{α,λ}(x) = (α−λ⁻¹(α−1))x² + (α−λ⁻¹(2α+1))x + α`.
pub fn q_poly(g: &GameParams, x: f64) -> f64 {
    let (a, l) = (g.alpha(), g.lambda());
    (a - (a - 1.0) / l) * x * x + (a - (2.0 * a + 1.0) / l) * x + a
}

fn r_value(alpha: f64, lambda: f64) -> f64 {
    let (a, l) = (alpha, lambda);
    let den = 2.0 * (a * l - a + 1.0);
    if den.abs() < 1e-12 {
        // The quadratic degenerates to an affine function; its root.
        return a / ((2.0 * a + 1.0) / l - a);
    }
    let disc = (a * a * (4.0 - 3.0 * l * l) + a * (4.0 - 6.0 * l) + 1.0).max(0.0);
    (1.0 + 2.0 * a - a * l - disc.sqrt()) / den
}

/// The unique root `r_α(λ)` of `q_{α,λ}` in (0, 1); satisfies
/// `0 < r < λ` and `r < αλ`.
pub fn r_root(g: &GameParams) -> f64 {
    r_value(g.alpha(), g.lambda())
}

/// Whether `(α,λ)` lies in `𝓡_k = {r_α(λ) < λ^k < α}`, the parameter
/// region where `w_k` anchors an attractor orbit.
pub fn in_region_rk(g: &GameParams, k: u32) -> bool {
    let lk = g.lambda().powi(k as i32);
    r_root(g) < lk && lk < g.alpha()
}

/// Head, tail and count of realized attractor branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HeadTail {
    /// Smallest realized branch index `h`.
    pub head: u32,
    /// Largest realized branch index `t`.
    pub tail: u32,
    /// Number of attractor orbits `N = t − h + 1`.
    pub count: u32,
    /// True when a floor/ceil argument sits within `1e-12` of an integer:
    /// the count is discontinuous there and both neighboring values are
    /// legitimate.
    pub boundary: bool,
}

/// Computes `h = min{k : λ^k < α}`, `t = ⌈log_λ r_α(λ)⌉ − 1` and the orbit
/// count `N = t − h + 1`, flagging breakpoint collisions.
pub fn head_tail_count(g: &GameParams) -> HeadTail {
    let (a, l) = (g.alpha(), g.lambda());
    let mut boundary = false;
    let head = if a >= 1.0 {
        1
    } else {
        let la = a.ln() / l.ln();
        if (la - la.round()).abs() < BREAKPOINT_TOL {
            boundary = true;
        }
        la.floor() as u32 + 1
    };
    let r = r_root(g);
    let lr = r.ln() / l.ln();
    if (lr - lr.round()).abs() < BREAKPOINT_TOL {
        boundary = true;
    }
    let tail = lr.ceil() as u32 - 1;
    assert!(
        tail >= head,
        "tail {tail} < head {head} at alpha={a}, lambda={l}: root ordering violated"
    );
    HeadTail {
        head,
        tail,
        count: tail - head + 1,
        boundary,
    }
}

/// One periodic attractor orbit: the 3k-point simplex cycle through `w_k`.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicOrbit {
    /// Branch index of the anchoring fixed point.
    pub k: u32,
    /// Minimal period, always `3k`.
    pub period: u32,
    /// The orbit points, starting at `w_k`.
    pub points: Vec<Strategy>,
}

impl PeriodicOrbit {
    /// Euclidean distance from `x` to the nearest orbit point.
    pub fn dist_to(&self, x: &Strategy) -> f64 {
        self.points
            .iter()
            .map(|p| p.dist(x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// The full attractor at fixed parameters: every periodic orbit plus the
/// limit objects.
#[derive(Debug, Clone, Serialize)]
pub struct AttractorReport {
    pub head: u32,
    pub tail: u32,
    pub count: u32,
    /// True when the parameters sit on a count breakpoint; the enumeration
    /// below is the one matching the computed (h, t).
    pub boundary: bool,
    /// Orbits for k = head..=tail, ascending.
    pub orbits: Vec<PeriodicOrbit>,
    /// The interior equilibrium (1/3, 1/3, 1/3), the λ→1 attractor limit
    /// for α ≥ 1.
    pub nash: Strategy,
    /// The λ→1 limit triangle for unfavourable games, present when α < 1.
    pub shapley: Option<[Strategy; 3]>,
}

impl AttractorReport {
    /// Euclidean distance from `x` to the nearest point of any orbit.
    pub fn dist_to(&self, x: &Strategy) -> f64 {
        self.orbits
            .iter()
            .map(|o| o.dist_to(x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Enumerates every attractor orbit: for each k in [h, t], lifts `w_k`
/// through 3k steps of the one-step map and checks that the cycle closes to
/// within `1e-10`.
pub fn enumerate_attractor(g: &GameParams) -> Result<AttractorReport> {
    let ht = head_tail_count(g);
    let mut orbits = Vec::with_capacity(ht.count as usize);
    for k in ht.head..=ht.tail {
        let w = w_point(g.lambda(), k);
        let n = 3 * k as usize;
        let traj = iterate_t(g, &w, n);
        if traj.hit_gamma || traj.points.len() != n + 1 {
            return Err(Error::GammaCollision {
                detail: format!("orbit lift for branch {k} hit the indifference set"),
            });
        }
        let residual = traj.points[0].dist(&traj.points[n]);
        if residual > 1e-10 {
            return Err(Error::OrbitClosureFailure { k, residual });
        }
        let mut points = traj.points;
        points.truncate(n);
        orbits.push(PeriodicOrbit {
            k,
            period: 3 * k,
            points,
        });
    }
    Ok(AttractorReport {
        head: ht.head,
        tail: ht.tail,
        count: ht.count,
        boundary: ht.boundary,
        orbits,
        nash: nash_point(),
        shapley: if g.alpha() < 1.0 {
            Some(shapley_triangle(g))
        } else {
            None
        },
    })
}

/// The interior equilibrium `E = (1/3, 1/3, 1/3)`.
pub fn nash_point() -> Strategy {
    Strategy::renormalized([1.0, 1.0, 1.0])
}

/// The triangle `{v_α, S(v_α), S²(v_α)}` with
/// `v_α = (α, 1, α²)/(1+α+α²)`: the λ→1 attractor limit for α < 1.
pub fn shapley_triangle(g: &GameParams) -> [Strategy; 3] {
    let a = g.alpha();
    let v = Strategy::renormalized([a, 1.0, a * a]);
    [v, cyclic_shift(&v), cyclic_power(&v, 2)]
}

/// The symmetric-game orbit count as a single closed formula,
/// `N_1(λ) = ⌈log_λ((3−λ−√(3(1−λ)(3+λ)))/(2λ))⌉ − 1`.
///
/// Independent of `head_tail_count` (no `q`/`r` evaluation), so the two
/// routes cross-validate each other.
pub fn count_formula_n1(lambda: f64) -> u32 {
    let l = lambda;
    let inner = (3.0 - l - (3.0 * (1.0 - l) * (3.0 + l)).sqrt()) / (2.0 * l);
    (inner.ln() / l.ln()).ceil() as u32 - 1
}

/// The λ→1 behavior of the orbit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitCount {
    /// α = 1: the count grows without bound as λ → 1.
    Unbounded,
    /// α > 1: the count converges to `⌈3α/(α−1)⌉ − 1`.
    Finite(u32),
    /// α < 1: the count oscillates between the two values forever.
    Oscillating { liminf: u32, limsup: u32 },
}

/// Closed-form λ→1 limit of the orbit count (the λ→0 limit is 1 for every
/// α). Used as an oracle for large-λ evaluations.
pub fn limit_count(g: &GameParams) -> LimitCount {
    let a = g.alpha();
    if a == 1.0 {
        LimitCount::Unbounded
    } else if a > 1.0 {
        LimitCount::Finite((3.0 * a / (a - 1.0)).ceil() as u32 - 1)
    } else {
        let c = ((1.0 + a + a * a) / (1.0 - a)).ceil() as u32;
        LimitCount::Oscillating {
            liminf: c - 1,
            limsup: c,
        }
    }
}

/// The n-th symmetric-game bifurcation point: the λ where the orbit count
/// `N_1` jumps from n to n+1. The tail index satisfies
/// `t = ⌈log_λ r⌉ − 1`, which steps exactly where `r_1(λ) = λ^{n+1}`; the
/// root is bracketed on (0, 1) and found by bisection to `1e-13`.
pub fn bifurcation_lambda_sym(n: u32) -> Result<f64> {
    let f = |l: f64| r_value(1.0, l) - l.powi(n as i32 + 1);
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-9);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::BracketFailure(format!(
            "no sign change for bifurcation index {n}: f({lo}) = {flo:.3e}, f({hi}) = {fhi:.3e}"
        )));
    }
    for _ in 0..200 {
        if hi - lo < 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
