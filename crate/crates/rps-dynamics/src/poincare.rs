//! First-return structure of the factor map on branch B: return times and
//! their a-priori bound, the partition of B into bands `B_k` by return time,
//! the closed-form return-map branches, itineraries, and the monotonicity
//! predicates that drive itinerary stabilization.
//!
//! The section coordinate of a point `x ∈ B` is `s = S²(u_α)·x`. Return
//! time `k` is equivalent to `b_{k−1} < s < b_k` with thresholds
//! `b_k = λ^{−k−1}α − λ⁻¹(2α+1) + α + 2`, and on that band the k-th return
//! is the affine map `P(x) = λ^k S(x) + λ^{k−1}(1−λ)e₁ + (1−λ^{k−1})e₂`.

use serde::Serialize;

use crate::attractor::w_point;
use crate::dynamics::{region_dots, GameParams, Strategy};
use crate::error::{Error, Result};
use crate::symmetry::{branch_threshold, classify_branch, cyclic_shift, step_f, BranchLabel};

/// Threshold constants of the return-time partition for fixed parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReturnStructure {
    alpha: f64,
    lambda: f64,
    /// Upper bound on every return time.
    pub c_bound: u32,
    /// The smallest k with `λ^k < α`; the floor of realizable attractor
    /// branch indices.
    pub m: u32,
    /// The constant `λ⁻¹(α−1+(1−λ)(α+2))` relating the section coordinate
    /// to pure powers of λ: `b_k + c_al = λ^{−k−1}α`.
    pub c_al: f64,
}

impl ReturnStructure {
    pub fn new(g: &GameParams) -> Self {
        let (a, l) = (g.alpha(), g.lambda());
        // One initial B step, then an A phase of at most
        // ⌈log_λ(α/(2α+1))⌉ − 1 further steps before re-entering B.
        let c_bound = ((a / (2.0 * a + 1.0)).ln() / l.ln()).ceil().max(1.0) as u32;
        let m = 1 + 0f64.max((a.ln() / l.ln()).floor()) as u32;
        let c_al = (a - 1.0 + (1.0 - l) * (a + 2.0)) / l;
        ReturnStructure {
            alpha: a,
            lambda: l,
            c_bound,
            m,
            c_al,
        }
    }

    /// The k-th section threshold `b_k = λ^{−k−1}α − λ⁻¹(2α+1) + α + 2`,
    /// strictly increasing in k; the band of return time k is
    /// `(b_{k−1}, b_k)`.
    pub fn b_threshold(&self, k: u32) -> f64 {
        let (a, l) = (self.alpha, self.lambda);
        l.powi(-(k as i32) - 1) * a - (2.0 * a + 1.0) / l + a + 2.0
    }
}

/// The first return of the factor-map orbit of `x ∈ B` to the closure of B,
/// as `(return time, landing point)`.
///
/// Fails with `NotInBranchB` off the section, `GammaCollision` if the orbit
/// meets an indifference band before returning, and `BoundViolation` if the
/// return would exceed the a-priori bound.
pub fn first_return(g: &GameParams, x: &Strategy) -> Result<(u32, Strategy)> {
    if classify_branch(g, x) != BranchLabel::B {
        return Err(Error::NotInBranchB);
    }
    let c = ReturnStructure::new(g).c_bound;
    let mut y = *x;
    for k in 1..=c {
        y = step_f(g, &y)?.0;
        match classify_branch(g, &y) {
            BranchLabel::B => return Ok((k, y)),
            BranchLabel::Gamma1 => {
                return Err(Error::GammaCollision {
                    detail: crate::dynamics::gamma_detail(g, &y),
                })
            }
            BranchLabel::A => {}
        }
    }
    Err(Error::BoundViolation { bound: c })
}

/// Return time of `x ∈ B`: the least k ≥ 1 with the k-th factor-map iterate
/// back in the closure of B.
pub fn return_time(g: &GameParams, x: &Strategy) -> Result<u32> {
    first_return(g, x).map(|(k, _)| k)
}

/// Band index of `x ∈ B` from the section thresholds alone: the unique k
/// with `b_{k−1} < S²(u_α)·x < b_k`. Agrees with `return_time` without
/// iterating the map.
///
/// Fails with `ThresholdCollision` when the section coordinate lies within
/// `gamma_tol` of a threshold.
pub fn classify_bk(g: &GameParams, x: &Strategy) -> Result<u32> {
    classify_bk_biased(g, x, 0.0)
}

/// `classify_bk` with every threshold shifted by `bias`.
///
/// A nonzero bias deliberately corrupts the band constants; the verification
/// suite uses it to prove that the band/simulation cross-check can actually
/// detect a wrong threshold table. Zero bias is the production path.
pub(crate) fn classify_bk_biased(g: &GameParams, x: &Strategy, bias: f64) -> Result<u32> {
    if classify_branch(g, x) != BranchLabel::B {
        return Err(Error::NotInBranchB);
    }
    let rs = ReturnStructure::new(g);
    let s = region_dots(g, x)[2];
    let tol = g.gamma_tol();
    // b_k + c_al = λ^{−k−1}α, so the band index is the integer part of
    // log_{1/λ}((s + c_al)/α); the two strict inequalities are then checked
    // directly on the neighboring candidates to absorb rounding of the log.
    let z = s + rs.c_al - bias;
    if z <= 0.0 {
        return Err(Error::ThresholdCollision {
            s,
            k: 0,
            threshold: rs.b_threshold(0) + bias,
        });
    }
    let y = (z / g.alpha()).ln() / -g.lambda().ln();
    let k0 = y.floor() as i64;
    for k in [k0 - 1, k0, k0 + 1] {
        if k < 1 {
            continue;
        }
        let k = k as u32;
        if rs.b_threshold(k - 1) + bias + tol < s && s < rs.b_threshold(k) + bias - tol {
            return Ok(k);
        }
    }
    // Within tolerance of some threshold: report the nearest one.
    let (mut k_near, mut d_near) = (0u32, f64::INFINITY);
    for k in [k0 - 1, k0, k0 + 1, k0 + 2] {
        if k < 0 {
            continue;
        }
        let k = k as u32;
        let d = (s - rs.b_threshold(k) - bias).abs();
        if d < d_near {
            (k_near, d_near) = (k, d);
        }
    }
    Err(Error::ThresholdCollision {
        s,
        k: k_near,
        threshold: rs.b_threshold(k_near) + bias,
    })
}

/// The k-th affine return branch
/// `P(x) = λ^k S(x) + λ^{k−1}(1−λ)e₁ + (1−λ^{k−1})e₂`, applied without
/// checking band membership (the extended branch, defined on all of Δ).
pub fn poincare_branch(g: &GameParams, x: &Strategy, k: u32) -> Strategy {
    let l = g.lambda();
    let lk = l.powi(k as i32);
    let lk1 = l.powi(k as i32 - 1);
    let [s1, s2, s3] = cyclic_shift(x).coords();
    Strategy::renormalized([lk * s1 + lk1 * (1.0 - l), lk * s2 + (1.0 - lk1), lk * s3])
}

/// One closed-form step of the return map: classifies the band of `x` and
/// applies the matching branch, returning `(image, band index)`.
pub fn poincare_step(g: &GameParams, x: &Strategy) -> Result<(Strategy, u32)> {
    let k = classify_bk(g, x)?;
    Ok((poincare_branch(g, x, k), k))
}

/// A ball around `w_k` on which permanence in the band `B_k` is certified.
///
/// Returns `(w_k, radius)` where radius is the smallest slack of the five
/// strict inequalities cutting out `B_k` (two region inequalities, the
/// branch-B inequality, and the two band thresholds, each shrunk by
/// `gamma_tol`), divided by the common gradient norm `|u_α|`. Every point of
/// the ball lies in `B_k`, and the branch map contracts the ball into itself
/// (`|P(x) − w_k| = λ^k |x − w_k|`), so an orbit entering the ball keeps
/// band index k forever. A non-positive radius means `w_k` does not lie in
/// the open band and certifies nothing.
pub fn stabilization_ball(g: &GameParams, k: u32) -> (Strategy, f64) {
    let w = w_point(g.lambda(), k);
    let rs = ReturnStructure::new(g);
    let tol = g.gamma_tol();
    let [v0, v1, v2] = region_dots(g, &w);
    let slacks = [
        v0 - (1.0 + tol),
        (1.0 - tol) - v1,
        (branch_threshold(g) - tol) - v0,
        v2 - (rs.b_threshold(k - 1) + tol),
        (rs.b_threshold(k) - tol) - v2,
    ];
    let a = g.alpha();
    let grad_norm = ((a + 2.0) * (a + 2.0) + (1.0 - a) * (1.0 - a)).sqrt();
    let radius = slacks.iter().fold(f64::INFINITY, |m, &s| m.min(s)) / grad_norm;
    (w, radius)
}

/// The sequence of return times along a return-map orbit.
#[derive(Debug, Clone, Serialize)]
pub struct Itinerary {
    /// Band index of each successive return-map iterate of the start point.
    pub entries: Vec<u32>,
    /// First index of the certified-constant tail, if stabilization was
    /// detected (three equal trailing entries plus the contraction-ball
    /// certificate of `stabilization_ball`).
    pub stabilized_at: Option<usize>,
    /// The constant value of the certified tail.
    pub stabilized_value: Option<u32>,
    /// Steps at which a threshold collision was resolved by the documented
    /// `+1e-8` section-direction perturbation.
    pub perturbed_steps: Vec<usize>,
    /// Reason the itinerary stopped before `max_steps`, if it did.
    pub truncated: Option<String>,
}

/// Nudges a point by `1e-8` along the section direction `S²(u_α)` projected
/// onto the simplex plane, to step off a measure-zero threshold.
pub(crate) fn perturb_off_threshold(g: &GameParams, x: &Strategy) -> Strategy {
    let a = g.alpha();
    // S²(u_α) − (mean)·(1,1,1) keeps the coordinate sum unchanged.
    let d = [-1.0, a + 1.0, -a];
    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let c = x.coords();
    let mut y = [0.0; 3];
    for i in 0..3 {
        y[i] = (c[i] + 1e-8 * d[i] / n).max(0.0);
    }
    Strategy::renormalized(y)
}

/// Computes the first `max_steps` return times of `x ∈ B` under the
/// closed-form return map, with stabilization detection.
///
/// A threshold collision is resolved once per step by the documented
/// perturbation (recorded in `perturbed_steps`); a second collision at the
/// same step, or a point leaving the section, truncates the itinerary with
/// the reason recorded.
pub fn itinerary(g: &GameParams, x: &Strategy, max_steps: usize) -> Result<Itinerary> {
    if classify_branch(g, x) != BranchLabel::B {
        return Err(Error::NotInBranchB);
    }
    let mut it = Itinerary {
        entries: Vec::with_capacity(max_steps),
        stabilized_at: None,
        stabilized_value: None,
        perturbed_steps: Vec::new(),
        truncated: None,
    };
    let mut x = *x;
    for n in 0..max_steps {
        let k = match classify_bk(g, &x) {
            Ok(k) => k,
            Err(Error::ThresholdCollision { .. }) => {
                let xp = perturb_off_threshold(g, &x);
                match classify_bk(g, &xp) {
                    Ok(k) => {
                        it.perturbed_steps.push(n);
                        x = xp;
                        k
                    }
                    Err(e) => {
                        it.truncated = Some(e.to_string());
                        break;
                    }
                }
            }
            Err(e) => {
                it.truncated = Some(e.to_string());
                break;
            }
        };
        it.entries.push(k);
        let len = it.entries.len();
        if it.stabilized_at.is_none()
            && len >= 3
            && it.entries[len - 2] == k
            && it.entries[len - 3] == k
        {
            let (w, radius) = stabilization_ball(g, k);
            if radius > 0.0 && x.dist(&w) < radius {
                let mut q = len - 1;
                while q > 0 && it.entries[q - 1] == k {
                    q -= 1;
                }
                it.stabilized_at = Some(q);
                it.stabilized_value = Some(k);
            }
        }
        x = poincare_branch(g, &x, k);
    }
    Ok(it)
}

/// One violated monotonicity clause in an itinerary.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityViolation {
    /// Index of the first entry of the violating window.
    pub index: usize,
    /// Which clause failed (1, 2 or 3).
    pub clause: u8,
    /// The entries of the violating window (two or three values).
    pub values: Vec<u32>,
}

/// Checks the three monotonicity clauses of return-time itineraries against
/// the floor `m` of realizable band indices:
///
/// 1. entries at or above m never drop below m again;
/// 2. above m, a non-increasing pair forces the next entry non-increasing;
/// 3. below m, a non-decreasing pair forces the next entry non-decreasing.
///
/// Returns every violating window; an empty result means the itinerary is
/// consistent with eventual stabilization.
pub fn check_monotonicity(entries: &[u32], m: u32) -> Vec<MonotonicityViolation> {
    let mut out = Vec::new();
    for j in 0..entries.len() {
        if j + 1 < entries.len() && entries[j] >= m && entries[j + 1] < m {
            out.push(MonotonicityViolation {
                index: j,
                clause: 1,
                values: vec![entries[j], entries[j + 1]],
            });
        }
        if j + 2 < entries.len() {
            let (a, b, c) = (entries[j], entries[j + 1], entries[j + 2]);
            if a >= m && b <= a && c > b {
                out.push(MonotonicityViolation {
                    index: j,
                    clause: 2,
                    values: vec![a, b, c],
                });
            }
            if b < m && b >= a && c < b {
                out.push(MonotonicityViolation {
                    index: j,
                    clause: 3,
                    values: vec![a, b, c],
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strat(x1: f64, x2: f64, x3: f64) -> Strategy {
        Strategy::new(x1, x2, x3).unwrap()
    }

    fn params(a: f64, l: f64) -> GameParams {
        GameParams::from_alpha(a, l).unwrap()
    }

    #[test]
    fn return_structure_constants() {
        let rs = ReturnStructure::new(&params(1.0, 0.8));
        assert_eq!(rs.c_bound, 5);
        assert_eq!(rs.m, 1);
        assert!((rs.c_al - 0.75).abs() < 1e-12);
        assert!((rs.b_threshold(0) - 0.5).abs() < 1e-12);
        assert!((rs.b_threshold(1) - 0.8125).abs() < 1e-12);
        for k in 0..20 {
            assert!(rs.b_threshold(k) < rs.b_threshold(k + 1));
        }
        // b_k + c_al = λ^{−k−1}α.
        assert!((rs.b_threshold(0) + rs.c_al - 1.25).abs() < 1e-12);

        assert_eq!(ReturnStructure::new(&params(0.25, 0.3)).c_bound, 2);
        assert_eq!(ReturnStructure::new(&params(0.5, 0.95)).m, 14);
    }

    #[test]
    fn return_bound_covers_initial_b_step() {
        // At (α,λ) = (0.25, 0.3) the fixed point of the second branch has
        // return time exactly 2, so any valid bound must be ≥ 2. The bound
        // keeps one slot for the mandatory B step before the A phase.
        let g = params(0.25, 0.3);
        let w2 = w_point(0.3, 2);
        assert_eq!(classify_branch(&g, &w2), BranchLabel::B);
        assert_eq!(return_time(&g, &w2).unwrap(), 2);
        assert_eq!(ReturnStructure::new(&g).c_bound, 2);
    }

    #[test]
    fn return_time_examples() {
        let g = params(1.0, 0.8);
        let w1 = w_point(0.8, 1);
        assert_eq!(return_time(&g, &w1).unwrap(), 1);
        assert_eq!(return_time(&g, &strat(0.4, 0.5, 0.1)).unwrap(), 3);
        // Off-section points are rejected.
        assert!(matches!(
            return_time(&g, &strat(0.8, 0.2, 0.0)),
            Err(Error::NotInBranchB)
        ));
    }

    #[test]
    fn classify_bk_matches_simulation() {
        let g = params(1.0, 0.8);
        for x in [
            strat(0.4, 0.5, 0.1),
            w_point(0.8, 1),
            w_point(0.8, 2),
            w_point(0.8, 3),
        ] {
            assert_eq!(classify_bk(&g, &x).unwrap(), return_time(&g, &x).unwrap());
        }
    }

    #[test]
    fn classify_bk_threshold_collision() {
        let g = params(1.0, 0.8);
        let rs = ReturnStructure::new(&g);
        let b2 = rs.b_threshold(2);
        // A B-point whose section coordinate sits exactly on b_2.
        let x = strat(0.4, b2 / 3.0, 1.0 - 0.4 - b2 / 3.0);
        assert_eq!(classify_branch(&g, &x), BranchLabel::B);
        match classify_bk(&g, &x) {
            Err(Error::ThresholdCollision { k, .. }) => assert_eq!(k, 2),
            other => panic!("expected ThresholdCollision, got {other:?}"),
        }
        // The documented perturbation steps off the threshold.
        let xp = perturb_off_threshold(&g, &x);
        assert!(classify_bk(&g, &xp).is_ok());
    }

    #[test]
    fn closed_form_matches_iteration() {
        let g = params(1.0, 0.8);
        let x = strat(0.4, 0.5, 0.1);
        let k = classify_bk(&g, &x).unwrap();
        let closed = poincare_branch(&g, &x, k);
        let (k_sim, iterated) = first_return(&g, &x).unwrap();
        assert_eq!(k, k_sim);
        assert!(closed.dist(&iterated) < 1e-12);

        let (y, kk) = poincare_step(&g, &x).unwrap();
        assert_eq!(kk, k);
        assert!(y.dist(&closed) < 1e-15);
    }

    #[test]
    fn itinerary_of_branch_fixed_point_is_constant() {
        let g = params(1.0, 0.8);
        let w2 = w_point(0.8, 2);
        let it = itinerary(&g, &w2, 30).unwrap();
        assert_eq!(it.entries, vec![2; 30]);
        assert_eq!(it.stabilized_at, Some(0));
        assert_eq!(it.stabilized_value, Some(2));
        assert!(it.truncated.is_none());
        assert!(it.perturbed_steps.is_empty());
    }

    #[test]
    fn itinerary_stabilizes_from_generic_point() {
        let g = params(1.0, 0.8);
        let it = itinerary(&g, &strat(0.4, 0.5, 0.1), 50).unwrap();
        assert_eq!(it.entries.len(), 50);
        assert!(it.truncated.is_none());
        let v = it.stabilized_value.expect("itinerary should stabilize");
        assert!((1..=3).contains(&v));
        let q = it.stabilized_at.unwrap();
        assert!(it.entries[q..].iter().all(|&e| e == v));
        assert!(it.entries.iter().all(|&e| (1..=5).contains(&e)));
        assert!(check_monotonicity(&it.entries, 1).is_empty());
    }

    #[test]
    fn stabilization_ball_is_inside_band() {
        let g = params(1.0, 0.8);
        for k in 1..=3 {
            let (w, r) = stabilization_ball(&g, k);
            assert!(r > 0.0, "k={k}");
            assert_eq!(classify_bk(&g, &w).unwrap(), k);
        }
        // Branch 5 is not realized at these parameters: no certificate.
        let (_, r5) = stabilization_ball(&g, 5);
        assert!(r5 <= 0.0);
    }

    #[test]
    fn monotonicity_checker_flags_constructed_counterexamples() {
        assert!(check_monotonicity(&[2, 2, 2, 2], 1).is_empty());
        assert!(check_monotonicity(&[1, 1, 2, 2, 3, 3], 3).is_empty());

        let v = check_monotonicity(&[2, 1, 2], 1);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].clause, v[0].index), (2, 0));

        let v = check_monotonicity(&[3, 1], 2);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].clause, 1);

        let v = check_monotonicity(&[1, 2, 1], 3);
        assert!(v.iter().any(|w| w.clause == 3));
    }
}
