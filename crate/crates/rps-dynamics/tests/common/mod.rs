#![allow(dead_code)]

use rps_dynamics::{AttractorReport, GameParams, Strategy};

pub fn params(alpha: f64, lambda: f64) -> GameParams {
    GameParams::from_alpha(alpha, lambda).expect("test parameters are valid")
}

pub fn segment_distance(p: &Strategy, s0: &Strategy, s1: &Strategy) -> f64 {
    let (p, a, b) = (p.coords(), s0.coords(), s1.coords());
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let w = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
    let dd = d.iter().map(|v| v * v).sum::<f64>();
    let t = (w.iter().zip(&d).map(|(wi, di)| wi * di).sum::<f64>() / dd).clamp(0.0, 1.0);
    (0..3)
        .map(|i| (p[i] - (a[i] + t * d[i])).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Hausdorff distance between the union of the report's orbit points and the
/// closed triangle boundary through the three given vertices.
pub fn hausdorff_to_triangle(report: &AttractorReport, tri: &[Strategy; 3]) -> f64 {
    let orbit_points: Vec<&Strategy> = report.orbits.iter().flat_map(|o| o.points.iter()).collect();
    let to_triangle = orbit_points
        .iter()
        .map(|p| {
            (0..3)
                .map(|i| segment_distance(p, &tri[i], &tri[(i + 1) % 3]))
                .fold(f64::MAX, f64::min)
        })
        .fold(0.0f64, f64::max);
    let samples_per_edge = 600;
    let mut from_triangle = 0.0f64;
    for i in 0..3 {
        let (a, b) = (tri[i].coords(), tri[(i + 1) % 3].coords());
        for j in 0..=samples_per_edge {
            let t = j as f64 / samples_per_edge as f64;
            let q = [
                a[0] + t * (b[0] - a[0]),
                a[1] + t * (b[1] - a[1]),
                a[2] + t * (b[2] - a[2]),
            ];
            let d = orbit_points
                .iter()
                .map(|p| {
                    let c = p.coords();
                    ((c[0] - q[0]).powi(2) + (c[1] - q[1]).powi(2) + (c[2] - q[2]).powi(2)).sqrt()
                })
                .fold(f64::MAX, f64::min);
            from_triangle = from_triangle.max(d);
        }
    }
    to_triangle.max(from_triangle)
}
