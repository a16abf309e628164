//! Shared fixtures for the criterion benchmarks in `benches/`.

use std::sync::Arc;

use blaschke::sphere::{build_quadrature, SphereQuadrature};
use blaschke::{Body, GridFunction};
use blaschke::convex_analysis::Axis;

/// Vertex count of the benchmark polytope, matching the random-polytope sweeps.
pub const POLYTOPE_POINTS: usize = 20;

pub fn polytope(seed: u64) -> Body {
    Body::random_polytope(3, POLYTOPE_POINTS, seed).expect("valid polytope")
}

pub fn quadrature(n: usize, resolution: usize) -> Arc<SphereQuadrature> {
    Arc::new(build_quadrature(n, resolution).expect("valid quadrature"))
}

/// `½|x|² + |x₁|` sampled on `[−2, 2]ⁿ` with `count` nodes per axis.
pub fn kinked_quadratic(n: usize, count: usize) -> GridFunction {
    let axis = Axis::symmetric(2.0, count).expect("valid axis");
    GridFunction::cube_grid(n, axis, |x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>() + x[0].abs()).expect("valid grid")
}
