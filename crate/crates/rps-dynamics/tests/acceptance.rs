//! The build's acceptance gate: nine numbered criteria, each implemented as
//! one test that prints a single machine-readable verdict line and then
//! asserts its pinned values and tolerances.
//!
//! Criteria 4 and 9 are known to fail as stated; the verdict lines carry the
//! measured values so the failure is a finding, not a mystery. Run with
//! `cargo test -p rps-dynamics --test acceptance -- --nocapture` to see every
//! verdict line including the passing ones.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::{hausdorff_to_triangle, params};
use rayon::prelude::*;
use rps_dynamics::{
    basin_raster, bifurcation_lambda_sym, bifurcation_sweep, check_monotonicity, classify_bk,
    count_formula_n1, enumerate_attractor, first_return, head_tail_count, itinerary, lambda_grid,
    nash_point, poincare_branch, sample_branch_b, sample_regular, seeded_rng, shapley_triangle,
    step_t, w_fixed_point, ReturnStructure, Strategy,
};

const GRID_ALPHAS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const GRID_LAMBDAS: [f64; 4] = [0.3, 0.5, 0.8, 0.95];

fn full_grid() -> Vec<(f64, f64)> {
    let mut grid = Vec::new();
    for &a in &GRID_ALPHAS {
        for &l in &GRID_LAMBDAS {
            grid.push((a, l));
        }
    }
    grid
}

fn verdict(number: u32, name: &str, passed: bool, detail: &str) {
    println!(
        "ACCEPTANCE {number} {} {name}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_1_symmetric_orbit_counts() {
    let cases = [
        (0.8, 3u32),
        (5.0 / 6.0, 4),
        (25.0 / 28.0, 5),
        (25.0 / 27.0, 6),
    ];
    let mut got = Vec::new();
    let mut slowest = Duration::ZERO;
    for (lambda, _) in cases {
        let g = params(1.0, lambda);
        let t0 = Instant::now();
        let ht = head_tail_count(&g);
        slowest = slowest.max(t0.elapsed());
        got.push(ht.count);
    }
    let want: Vec<u32> = cases.iter().map(|c| c.1).collect();
    let in_time = slowest < Duration::from_millis(1);
    let passed = got == want && in_time;
    verdict(
        1,
        "symmetric orbit counts",
        passed,
        &format!("counts {got:?} (pinned {want:?}), slowest call {slowest:?} (budget 1 ms)"),
    );
    assert_eq!(got, want);
    assert!(
        in_time,
        "each count must return within 1 ms, slowest {slowest:?}"
    );
}

#[test]
fn criterion_2_unfavourable_orbit_counts() {
    let cases = [
        (100.0 / 113.0, 3u32),
        (25.0 / 28.0, 2),
        (100.0 / 111.0, 3),
        (10.0 / 11.0, 2),
    ];
    let got: Vec<u32> = cases
        .iter()
        .map(|&(l, _)| head_tail_count(&params(0.5, l)).count)
        .collect();
    let want: Vec<u32> = cases.iter().map(|c| c.1).collect();
    let passed = got == want;
    verdict(
        2,
        "unfavourable orbit counts",
        passed,
        &format!("counts {got:?} (pinned {want:?}) at alpha 1/2"),
    );
    assert_eq!(got, want);
}

#[test]
fn criterion_3_bifurcation_points() {
    let t0 = Instant::now();
    let l1 = bifurcation_lambda_sym(1).expect("first bifurcation value exists");
    let l2 = bifurcation_lambda_sym(2).expect("second bifurcation value exists");
    let elapsed = t0.elapsed();
    let dev1 = (l1 - 0.39265).abs();
    let dev2 = (l2 - 0.69461).abs();
    let in_time = elapsed < Duration::from_millis(10);
    let passed = dev1 <= 1e-4 && dev2 <= 1e-4 && in_time;
    verdict(
        3,
        "bifurcation points",
        passed,
        &format!(
            "lambda_1 {l1:.10} (pinned 0.39265 +- 1e-4, off by {dev1:.1e}), lambda_2 {l2:.10} (pinned 0.69461 +- 1e-4, off by {dev2:.1e}), both in {elapsed:?} (budget 10 ms)"
        ),
    );
    assert!(dev1 <= 1e-4, "lambda_1 = {l1}");
    assert!(dev2 <= 1e-4, "lambda_2 = {l2}");
    assert!(in_time, "bisection took {elapsed:?}, budget 10 ms");
}

#[test]
fn criterion_4_oscillation_window_on_the_sweep() {
    let alpha = 0.5;
    let grid = lambda_grid(0.9, 0.999, 1000);
    let spacing = grid[1] - grid[0];
    let scan = bifurcation_sweep(alpha, &grid).expect("sweep over valid grid");

    let mut hist: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in &scan.counts {
        *hist.entry(c).or_insert(0) += 1;
    }
    let counts_ok = scan.counts.iter().all(|c| (2..=4).contains(c));

    let first4 = scan
        .counts
        .iter()
        .position(|&c| c == 4)
        .expect("the sweep reaches four orbits");
    let sweep_lambda = scan.lambdas[first4];
    let sweep_period = 3 * scan.heads[first4];

    let pinned = 0.953613;
    let lambda_ok = (sweep_lambda - pinned).abs() <= 1e-3;
    let period_ok = sweep_period == 45;

    // Independent diagnosis: bisect the true 3 -> 4 onset and the window's
    // closing edge to show why the 1000-point sweep cannot see it.
    let count_at = |l: f64| head_tail_count(&params(alpha, l)).count;
    let (mut lo, mut hi) = (0.954, 0.95482);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_at(mid) >= 4 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let onset = hi;
    let onset_period = 3 * head_tail_count(&params(alpha, onset + 1e-9)).head;
    let (mut lo, mut hi) = (0.95482, 0.9549);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_at(mid) >= 4 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let window_width = hi - onset;

    let passed = counts_ok && lambda_ok && period_ok;
    verdict(
        4,
        "oscillation window on the sweep",
        passed,
        &format!(
            "histogram {hist:?} within {{2,3,4}}; smallest sweep lambda with four orbits {sweep_lambda:.16} with least period {sweep_period}, pinned {pinned} +- 1e-3 and least period 45; the true four-orbit onset is {onset:.16} with least period {onset_period}, but that window is only {window_width:.2e} wide versus sweep spacing {spacing:.2e}, so the sweep first detects the following window; no lambda in {pinned} +- 1e-3 yields four orbits (count is 3 throughout)"
        ),
    );
    assert!(
        counts_ok,
        "sweep counts outside {{2,3,4}}: histogram {hist:?}"
    );
    assert!(
        lambda_ok,
        "smallest sweep lambda with four orbits is {sweep_lambda:.16}, not {pinned} +- 1e-3; true onset {onset:.16}"
    );
    assert!(
        period_ok,
        "least period at the sweep's first four-orbit lambda is {sweep_period}, not 45 (45 occurs at the true onset {onset:.16}, which the sweep spacing cannot resolve)"
    );
}

#[test]
fn criterion_5_global_convergence_suite() {
    let alphas = [0.25, 0.5, 1.0, 2.0];
    let lambdas = [0.3, 0.8, 0.95];
    let conv_tol = 1e-8;
    let max_steps = 50_000u32;
    let starts_per_point = 1_000usize;

    let t0 = Instant::now();
    let mut total = 0usize;
    let mut failures = 0usize;
    let mut worst_steps = 0u32;
    for (pi, (&a, &l)) in alphas
        .iter()
        .flat_map(|a| lambdas.iter().map(move |l| (a, l)))
        .enumerate()
    {
        let g = params(a, l);
        let report = enumerate_attractor(&g).expect("attractor enumerates on the grid");
        let mut rng = seeded_rng(505, pi as u64);
        let starts: Vec<Strategy> = (0..starts_per_point)
            .map(|_| sample_regular(&g, &mut rng, 1_000).expect("regular start"))
            .collect();
        let outcomes: Vec<Option<u32>> = starts
            .par_iter()
            .map(|start| {
                let mut x = *start;
                for step in 0..=max_steps {
                    if report.dist_to(&x) < conv_tol {
                        return Some(step);
                    }
                    match step_t(&g, &x) {
                        Ok(y) => x = y,
                        Err(_) => return None,
                    }
                }
                None
            })
            .collect();
        for outcome in outcomes {
            total += 1;
            match outcome {
                Some(steps) => worst_steps = worst_steps.max(steps),
                None => failures += 1,
            }
        }
    }
    let elapsed = t0.elapsed();
    let in_time = elapsed < Duration::from_secs(60);
    let passed = failures == 0 && total == 12 * starts_per_point && in_time;
    verdict(
        5,
        "global convergence suite",
        passed,
        &format!(
            "{total} starts over 12 parameter points, {failures} orphans or escapes, slowest convergence {worst_steps} steps at 1e-8, total {elapsed:?} (budget 60 s)"
        ),
    );
    assert_eq!(total, 12 * starts_per_point);
    assert_eq!(
        failures, 0,
        "every orbit must converge to an enumerated orbit"
    );
    assert!(in_time, "suite took {elapsed:?}, budget 60 s");
}

#[test]
fn criterion_6_oracle_equivalences() {
    let closed_tol = 1e-10;
    let residual_tol = 1e-12;
    let samples = 10_000usize;

    let mut mismatches = 0usize;
    let mut collisions = 0usize;
    let mut max_dev = 0.0f64;
    let mut max_res = 0.0f64;
    let mut tested = 0usize;
    for (gi, (a, l)) in full_grid().into_iter().enumerate() {
        let g = params(a, l);
        let mut rng = seeded_rng(606, gi as u64);
        let starts: Vec<Strategy> = (0..samples)
            .map(|_| sample_branch_b(&g, &mut rng, 100_000).expect("branch B sample"))
            .collect();
        let rows: Vec<(bool, bool, f64)> = starts
            .par_iter()
            .map(|x| {
                let (k_sim, landing) = match first_return(&g, x) {
                    Ok(r) => r,
                    Err(_) => return (false, true, 0.0),
                };
                match classify_bk(&g, x) {
                    Ok(k_cls) if k_cls == k_sim => {
                        (true, false, poincare_branch(&g, x, k_cls).dist(&landing))
                    }
                    Ok(_) => (false, false, 0.0),
                    Err(_) => (false, true, 0.0),
                }
            })
            .collect();
        for (agreed, skipped, dev) in rows {
            if skipped {
                collisions += 1;
            } else if agreed {
                tested += 1;
                max_dev = max_dev.max(dev);
            } else {
                mismatches += 1;
            }
        }
        for k in 1..=50 {
            let w = w_fixed_point(&g, k).w;
            max_res = max_res.max(poincare_branch(&g, &w, k).dist(&w));
        }
    }
    let passed = mismatches == 0 && max_dev < closed_tol && max_res < residual_tol && tested > 0;
    verdict(
        6,
        "oracle equivalences",
        passed,
        &format!(
            "{tested} branch-B samples over 20 grid points: {mismatches} classifier/simulation mismatches, closed-form vs iterated deviation {max_dev:.1e} (tolerance 1e-10), fixed-point residual {max_res:.1e} over k=1..50 (tolerance 1e-12), {collisions} threshold collisions skipped"
        ),
    );
    assert_eq!(mismatches, 0);
    assert!(
        max_dev < closed_tol,
        "closed form deviates by {max_dev:.1e}"
    );
    assert!(max_res < residual_tol, "fixed-point residual {max_res:.1e}");
}

#[test]
fn criterion_7_itinerary_monotonicity() {
    let length = 50usize;
    let per_point = 500usize;

    let mut total = 0usize;
    let mut violations = 0usize;
    let mut deep_floor_points = 0usize;
    for (gi, (a, l)) in full_grid().into_iter().enumerate() {
        let g = params(a, l);
        let rs = ReturnStructure::new(&g);
        if rs.m > 1 {
            deep_floor_points += 1;
        }
        let mut rng = seeded_rng(707, gi as u64);
        let mut sampled = 0usize;
        while sampled < per_point {
            let x = sample_branch_b(&g, &mut rng, 100_000).expect("branch B sample");
            let it = match itinerary(&g, &x, length) {
                Ok(it) if it.truncated.is_none() => it,
                _ => continue,
            };
            sampled += 1;
            total += 1;
            violations += check_monotonicity(&it.entries, rs.m).len();
        }
    }
    let passed = violations == 0 && total == 10_000 && deep_floor_points > 0;
    verdict(
        7,
        "itinerary monotonicity",
        passed,
        &format!(
            "{total} itineraries of length {length} across the grid ({deep_floor_points} parameter points with floor above one), {violations} violations"
        ),
    );
    assert_eq!(total, 10_000);
    assert!(
        deep_floor_points > 0,
        "the grid must exercise floors above one"
    );
    assert_eq!(violations, 0);
}

#[test]
fn criterion_8_limit_oracles() {
    let n2 = head_tail_count(&params(2.0, 0.99999)).count;
    let nhalf = head_tail_count(&params(0.5, 0.99999)).count;
    let n1_low = head_tail_count(&params(1.0, 0.05)).count;
    let n1_formula = count_formula_n1(0.05);

    let g = params(2.0, 0.9999);
    let report = enumerate_attractor(&g).expect("favourable attractor enumerates");
    let nash = nash_point();
    let nash_dev = report
        .orbits
        .iter()
        .flat_map(|o| o.points.iter())
        .map(|p| p.dist(&nash))
        .fold(0.0f64, f64::max);

    let g = params(0.5, 0.9999);
    let report = enumerate_attractor(&g).expect("unfavourable attractor enumerates");
    let tri = shapley_triangle(&g);
    let hausdorff = hausdorff_to_triangle(&report, &tri);

    let passed = n2 == 5
        && (nhalf == 3 || nhalf == 4)
        && n1_low == 1
        && n1_formula == 1
        && nash_dev < 0.02
        && hausdorff < 0.05;
    verdict(
        8,
        "limit oracles",
        passed,
        &format!(
            "counts at lambda 0.99999: favourable {n2} (pinned 5), unfavourable {nhalf} (pinned 3 or 4); count at lambda 0.05: {n1_low} (pinned 1, formula {n1_formula}); at lambda 0.9999: distance to barycenter {nash_dev:.2e} (calibrated bound 0.02), Hausdorff distance to the limit triangle {hausdorff:.2e} (calibrated bound 0.05)"
        ),
    );
    assert_eq!(n2, 5);
    assert!(nhalf == 3 || nhalf == 4, "unfavourable count {nhalf}");
    assert_eq!(n1_low, 1);
    assert_eq!(n1_formula, 1);
    assert!(nash_dev < 0.02, "barycenter deviation {nash_dev}");
    assert!(hausdorff < 0.05, "triangle Hausdorff distance {hausdorff}");
}

#[test]
fn criterion_9_basin_reconstruction() {
    let resolution = 300;
    let iter_budget = 5_000;
    let conv_tol = 1e-6;
    let sets: [(f64, f64, &str); 8] = [
        (1.0, 0.8, "1, 4/5"),
        (1.0, 5.0 / 6.0, "1, 5/6"),
        (1.0, 25.0 / 28.0, "1, 25/28"),
        (1.0, 25.0 / 27.0, "1, 25/27"),
        (0.5, 100.0 / 113.0, "1/2, 100/113"),
        (0.5, 25.0 / 28.0, "1/2, 25/28"),
        (0.5, 100.0 / 111.0, "1/2, 100/111"),
        (0.5, 10.0 / 11.0, "1/2, 10/11"),
    ];

    let mut lines = Vec::new();
    let mut all_labels_ok = true;
    let mut all_fractions_ok = true;
    let mut all_in_time = true;
    for (alpha, lambda, tag) in sets {
        let g = params(alpha, lambda);
        let t0 = Instant::now();
        let raster = basin_raster(&g, resolution, iter_budget, conv_tol)
            .expect("raster computes at figure parameters");
        let elapsed = t0.elapsed();
        let summary = raster.summary();
        let expected = raster.report.count;
        let found: Vec<u32> = summary
            .orbit_cells
            .iter()
            .filter(|row| row.2 > 0)
            .map(|row| row.0)
            .collect();
        let missing: Vec<u32> = summary
            .orbit_cells
            .iter()
            .filter(|row| row.2 == 0)
            .map(|row| row.0)
            .collect();
        let stray = (summary.unresolved + summary.gamma) as f64 / summary.total as f64;
        let labels_ok = found.len() as u32 == expected;
        let fraction_ok = stray < 0.005;
        let in_time = elapsed < Duration::from_secs(120);
        all_labels_ok &= labels_ok;
        all_fractions_ok &= fraction_ok;
        all_in_time &= in_time;
        lines.push(format!(
            "({tag}): {}/{} labels{}, stray {:.3}%, {:?}",
            found.len(),
            expected,
            if missing.is_empty() {
                String::new()
            } else {
                format!(" (no cell reached orbit {missing:?})")
            },
            100.0 * stray,
            elapsed
        ));
    }
    let passed = all_labels_ok && all_fractions_ok && all_in_time;
    verdict(
        9,
        "basin reconstruction",
        passed,
        &format!(
            "R={resolution}, budget {iter_budget}, conv_tol {conv_tol:.0e}: {}",
            lines.join("; ")
        ),
    );
    assert!(
        all_fractions_ok,
        "unresolved plus indifferent cells must stay under 0.5%: {}",
        lines.join("; ")
    );
    assert!(
        all_in_time,
        "each raster must finish within 2 min: {}",
        lines.join("; ")
    );
    assert!(
        all_labels_ok,
        "every enumerated orbit must appear in the resolved raster: {}",
        lines.join("; ")
    );
}
