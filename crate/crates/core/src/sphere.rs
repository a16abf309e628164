//! Unit vectors, rotations carrying the pole to a direction, and product
//! quadrature rules on `S^{n-1}`.
//!
//! The pole `ē` is always the first canonical basis vector. Quadrature weights
//! are surface-measure weights: they sum to `|S^{n-1}| = n|B^n|`, and callers
//! integrating against the uniform probability measure divide by that total.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::quad1d;

/// Volume of the unit ball `B^n`.
pub fn ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * ball_volume(n - 2),
    }
}

/// Surface measure of `S^{n-1}`, equal to `n|B^n|`.
pub fn sphere_measure(n: usize) -> f64 {
    n as f64 * ball_volume(n)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A direction on `S^{n-1}`; the stored norm is 1 within 1e-12.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Accepts coordinates whose norm is within 1e-9 of 1 and renormalizes them.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let r = norm(&coords);
        if !r.is_finite() || (r - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnit(r));
        }
        Ok(UnitVector(coords.into_iter().map(|x| x / r).collect()))
    }

    /// Normalizes any nonzero finite vector.
    pub fn normalize(coords: &[f64]) -> Result<Self> {
        let r = norm(coords);
        if !r.is_finite() || r < 1e-300 {
            return Err(Error::Degenerate("cannot normalize a zero vector".into()));
        }
        Ok(UnitVector(coords.iter().map(|x| x / r).collect()))
    }

    pub fn pole(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        UnitVector(v)
    }

    /// Uniformly distributed direction.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            if let Ok(u) = Self::normalize(&v) {
                return u;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn neg(&self) -> Self {
        UnitVector(self.0.iter().map(|x| -x).collect())
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A proper rotation; orthogonal and of determinant +1 within 1e-10.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn identity(n: usize) -> Self {
        Rotation { matrix: DMatrix::identity(n, n) }
    }

    /// Wraps a matrix after checking orthogonality and orientation.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::InvalidParameter("rotation matrix must be square".into()));
        }
        let defect = (matrix.transpose() * &matrix - DMatrix::identity(n, n)).amax();
        if defect > 1e-10 || (matrix.determinant() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter("matrix is not a proper rotation".into()));
        }
        Ok(Rotation { matrix })
    }

    /// Haar-random rotation: QR of a Gaussian matrix with sign and orientation fixed.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng));
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        if q.determinant() < 0.0 {
            q.column_mut(0).neg_mut();
        }
        Rotation { matrix: q }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)] * x[j]).sum()).collect()
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.matrix[(j, i)] * x[j]).sum()).collect()
    }

    pub fn inverse(&self) -> Self {
        Rotation { matrix: self.matrix.transpose() }
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        Rotation { matrix: &self.matrix * &other.matrix }
    }
}

/// A rotation `ϑ_u` with `ϑ_u ē = u`.
///
/// Built as the Householder reflection swapping `ē` and `u`, composed with the
/// reflection `x_2 ↦ -x_2` so that the determinant is +1. `u = ē` gives the identity.
pub fn rotation_to(u: &UnitVector) -> Result<Rotation> {
    let n = u.dim();
    let r = norm(u.as_slice());
    if (r - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnit(r));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("rotations need dimension >= 2".into()));
    }
    let mut w = u.as_slice().iter().map(|x| -x).collect::<Vec<_>>();
    w[0] += 1.0;
    let ww = dot(&w, &w);
    if ww < 1e-30 {
        return Ok(Rotation::identity(n));
    }
    let h = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - 2.0 * w[i] * w[j] / ww
    });
    let mut m = h;
    m.column_mut(1).neg_mut();
    Ok(Rotation { matrix: m })
}

/// Columns 1..n of `rotation_to(u)`: an orthonormal basis of `u⊥`.
fn orthonormal_complement(u: &UnitVector) -> Result<Vec<Vec<f64>>> {
    let rot = rotation_to(u)?;
    let n = u.dim();
    Ok((1..n).map(|j| (0..n).map(|i| rot.matrix[(i, j)]).collect()).collect())
}

/// Nodes on the subsphere `S^{n-1} ∩ u⊥` with probability weights.
#[derive(Clone, Debug)]
pub struct SubsphereRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Nodes approximating the invariant probability measure on `S^{n-1} ∩ u⊥`.
///
/// n = 2: the two unit vectors orthogonal to `u`. n = 3: `resolution` equally
/// spaced circle nodes. n ≥ 4: the `n-1`-dimensional product rule carried into
/// `u⊥`, whose weights are not uniform.
pub fn subsphere_nodes(u: &UnitVector, resolution: usize) -> Result<SubsphereRule> {
    let n = u.dim();
    let basis = orthonormal_complement(u)?;
    match n {
        2 => Ok(SubsphereRule {
            nodes: vec![basis[0].clone(), basis[0].iter().map(|x| -x).collect()],
            weights: vec![0.5, 0.5],
        }),
        3 => {
            let m = resolution.max(1);
            let nodes = (0..m)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / m as f64;
                    let (s, c) = a.sin_cos();
                    (0..3).map(|i| c * basis[0][i] + s * basis[1][i]).collect()
                })
                .collect();
            Ok(SubsphereRule { nodes, weights: vec![1.0 / m as f64; m] })
        }
        _ => {
            let q = build_quadrature(n - 1, resolution.max(4))?;
            let total = q.total_weight();
            let nodes = (0..q.len())
                .map(|k| {
                    let v = q.node(k);
                    let mut x = vec![0.0; n];
                    for (j, b) in basis.iter().enumerate() {
                        for i in 0..n {
                            x[i] += v[j] * b[i];
                        }
                    }
                    x
                })
                .collect();
            Ok(SubsphereRule { nodes, weights: q.weights().iter().map(|w| w / total).collect() })
        }
    }
}

/// Latitude rule for `∫_{-1}^{1} g(t) (1-t²)^{(n-3)/2} dt`, ascending in `t`.
///
/// n = 3 uses Gauss–Legendre in `t` on each hemisphere; other dimensions use
/// Gauss–Legendre in the polar angle (where the Jacobian is `sin^{n-2} θ`), again
/// split at the equator so that kinks at `t = 0` are integrated exactly.
pub fn latitude_rule(n: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut t = Vec::with_capacity(2 * m);
    let mut w = Vec::with_capacity(2 * m);
    if n == 3 {
        for (a, b) in [(-1.0, 0.0), (0.0, 1.0)] {
            let (x, wx) = quad1d::gauss_legendre_on(a, b, m);
            t.extend(x);
            w.extend(wx);
        }
    } else {
        for (a, b) in [(PI / 2.0, PI), (0.0, PI / 2.0)] {
            let (th, wth) = quad1d::gauss_legendre_on(a, b, m);
            for (&th, &wt) in th.iter().zip(&wth).rev() {
                t.push(th.cos());
                w.push(wt * th.sin().powi(n as i32 - 2));
            }
        }
    }
    (t, w)
}

#[derive(Clone, Debug, PartialEq)]
enum Layout {
    /// `count` nodes at angles `π k / (count/2)`.
    Circle,
    /// Latitude rings (ascending `t`) times `n_az` uniform azimuths, node index `j*n_az + k`.
    LatLong { lat: Vec<f64>, n_az: usize },
    /// Recursive product or Monte Carlo: no interpolation structure.
    Unstructured,
}

/// Nodes and surface-measure weights on `S^{n-1}`.
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    dim: usize,
    resolution: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    layout: Layout,
    tag: u64,
}

/// Builds the deterministic product rule of the given resolution.
///
/// dim 2: `2·resolution` equally spaced nodes. dim 3: `resolution` Gauss–Legendre
/// latitudes per hemisphere times `2·resolution` azimuths. dim ≥ 4: latitudes of
/// `latitude_rule` times the rule one dimension down.
pub fn build_quadrature(dim: usize, resolution: usize) -> Result<SphereQuadrature> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("sphere quadrature needs dim >= 2, got {dim}")));
    }
    if resolution < 4 {
        return Err(Error::InvalidParameter(format!("resolution must be >= 4, got {resolution}")));
    }
    let q = match dim {
        2 => {
            let count = 2 * resolution;
            let mut nodes = Vec::with_capacity(2 * count);
            for k in 0..count {
                let (s, c) = (PI * k as f64 / resolution as f64).sin_cos();
                nodes.extend([c, s]);
            }
            SphereQuadrature {
                dim,
                resolution,
                nodes,
                weights: vec![2.0 * PI / count as f64; count],
                layout: Layout::Circle,
                tag: 0,
            }
        }
        3 => {
            let (lat, wl) = latitude_rule(3, resolution);
            let n_az = 2 * resolution;
            let wa = 2.0 * PI / n_az as f64;
            let mut nodes = Vec::with_capacity(3 * lat.len() * n_az);
            let mut weights = Vec::with_capacity(lat.len() * n_az);
            for (&t, &w) in lat.iter().zip(&wl) {
                let s = (1.0 - t * t).max(0.0).sqrt();
                for k in 0..n_az {
                    let (sa, ca) = (2.0 * PI * k as f64 / n_az as f64).sin_cos();
                    nodes.extend([t, s * ca, s * sa]);
                    weights.push(w * wa);
                }
            }
            SphereQuadrature { dim, resolution, nodes, weights, layout: Layout::LatLong { lat, n_az }, tag: 0 }
        }
        _ => {
            let lower = build_quadrature(dim - 1, resolution)?;
            let (lat, wl) = latitude_rule(dim, resolution);
            let mut nodes = Vec::with_capacity(dim * lat.len() * lower.len());
            let mut weights = Vec::with_capacity(lat.len() * lower.len());
            for (&t, &w) in lat.iter().zip(&wl) {
                let s = (1.0 - t * t).max(0.0).sqrt();
                for k in 0..lower.len() {
                    nodes.push(t);
                    nodes.extend(lower.node(k).iter().map(|x| s * x));
                    weights.push(w * lower.weights[k]);
                }
            }
            SphereQuadrature { dim, resolution, nodes, weights, layout: Layout::Unstructured, tag: 0 }
        }
    };
    Ok(q)
}

/// Equal-weight Monte Carlo rule, intended for `dim >= 6` where product rules grow too fast.
/// Moments hold only to `O(samples^{-1/2})`; the first moment is symmetrized to vanish.
pub fn build_monte_carlo(dim: usize, samples: usize, seed: u64) -> Result<SphereQuadrature> {
    if dim < 2 || samples < 2 {
        return Err(Error::InvalidParameter("Monte Carlo rule needs dim >= 2 and samples >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = samples / 2;
    let mut nodes = Vec::with_capacity(dim * 2 * half);
    for _ in 0..half {
        let u = UnitVector::random(dim, &mut rng);
        nodes.extend_from_slice(u.as_slice());
        nodes.extend(u.as_slice().iter().map(|x| -x));
    }
    let count = 2 * half;
    Ok(SphereQuadrature {
        dim,
        resolution: samples,
        nodes,
        weights: vec![sphere_measure(dim) / count as f64; count],
        layout: Layout::Unstructured,
        tag: seed.wrapping_add(1),
    })
}

impl SphereQuadrature {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Identifies rules built by the same deterministic recipe.
    pub fn same_rule(&self, other: &SphereQuadrature) -> bool {
        self.dim == other.dim && self.resolution == other.resolution && self.tag == other.tag && self.len() == other.len()
    }

    /// `∫ f(u) du` (surface measure).
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.nodes().zip(&self.weights).map(|(u, w)| w * f(u)).sum()
    }

    /// `∫ f(u) dσ(u)` against the uniform probability measure.
    pub fn average(&self, f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.integrate(f) / self.total_weight()
    }

    /// Samples a function at every node.
    pub fn sample(&self, f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
        self.nodes().map(f).collect()
    }

    /// Interpolates node values at an arbitrary direction: linear in angle on the
    /// circle, bilinear in (latitude, azimuth) for the 3-sphere rule, nearest node otherwise.
    pub fn interpolate(&self, values: &[f64], u: &[f64]) -> f64 {
        match &self.layout {
            Layout::Circle => {
                let count = self.len();
                let step = 2.0 * PI / count as f64;
                let theta = u[1].atan2(u[0]).rem_euclid(2.0 * PI);
                let pos = theta / step;
                let k0 = (pos.floor() as usize) % count;
                let k1 = (k0 + 1) % count;
                let f = pos - pos.floor();
                values[k0] * (1.0 - f) + values[k1] * f
            }
            Layout::LatLong { lat, n_az } => {
                let n_az = *n_az;
                let r = norm(u);
                let t = (u[0] / r).clamp(-1.0, 1.0);
                let phi = u[2].atan2(u[1]).rem_euclid(2.0 * PI);
                let pos = phi / (2.0 * PI / n_az as f64);
                let k0 = (pos.floor() as usize) % n_az;
                let k1 = (k0 + 1) % n_az;
                let fa = pos - pos.floor();
                let ring = |j: usize| values[j * n_az + k0] * (1.0 - fa) + values[j * n_az + k1] * fa;
                let ring_mean = |j: usize| values[j * n_az..(j + 1) * n_az].iter().sum::<f64>() / n_az as f64;
                let last = lat.len() - 1;
                if t <= lat[0] {
                    let f = (t + 1.0) / (lat[0] + 1.0);
                    ring_mean(0) * (1.0 - f) + ring(0) * f
                } else if t >= lat[last] {
                    let f = (1.0 - t) / (1.0 - lat[last]);
                    ring_mean(last) * (1.0 - f) + ring(last) * f
                } else {
                    let j = lat.partition_point(|&x| x <= t) - 1;
                    let f = (t - lat[j]) / (lat[j + 1] - lat[j]);
                    ring(j) * (1.0 - f) + ring(j + 1) * f
                }
            }
            Layout::Unstructured => {
                let best = self
                    .nodes()
                    .enumerate()
                    .map(|(i, v)| (i, dot(v, u)))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                values[best]
            }
        }
    }
}

/// Support-function values at the nodes of a shared quadrature.
#[derive(Clone, Debug)]
pub struct SupportSamples {
    pub quadrature: Arc<SphereQuadrature>,
    pub values: Vec<f64>,
}

impl SupportSamples {
    pub fn new(quadrature: Arc<SphereQuadrature>, values: Vec<f64>) -> Result<Self> {
        if values.len() != quadrature.len() {
            return Err(Error::Dimension { expected: quadrature.len(), found: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("support sample {v} is not finite")));
        }
        Ok(SupportSamples { quadrature, values })
    }

    /// Evaluates the 1-homogeneous extension at any nonzero `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return 0.0;
        }
        r * self.quadrature.interpolate(&self.values, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn moments(q: &SphereQuadrature) -> (f64, Vec<f64>, Vec<f64>) {
        let n = q.dim();
        let mass = q.total_weight();
        let mut first = vec![0.0; n];
        let mut second = vec![0.0; n * n];
        for (u, w) in q.nodes().zip(q.weights()) {
            for i in 0..n {
                first[i] += w * u[i];
                for j in 0..n {
                    second[i * n + j] += w * u[i] * u[j];
                }
            }
        }
        (mass, first, second)
    }

    #[test]
    fn moment_identities_hold_across_dimensions() {
        for (dim, res) in [(2, 4), (2, 64), (3, 4), (3, 32), (4, 8), (5, 6)] {
            let q = build_quadrature(dim, res).unwrap();
            let (mass, first, second) = moments(&q);
            let area = sphere_measure(dim);
            assert!((mass - area).abs() / area < 1e-6, "dim {dim} mass {mass}");
            assert!(first.iter().all(|x| x.abs() < 1e-8), "dim {dim} first {first:?}");
            for i in 0..dim {
                for j in 0..dim {
                    let target = if i == j { area / dim as f64 } else { 0.0 };
                    assert!((second[i * dim + j] - target).abs() < 1e-4 * area, "dim {dim} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn circle_and_sphere_masses() {
        let q = build_quadrature(2, 7).unwrap();
        assert_eq!(q.len(), 14);
        assert!((q.total_weight() - 2.0 * PI).abs() < 1e-14);
        for m in [4, 5, 16, 33] {
            let q = build_quadrature(3, m).unwrap();
            assert!((q.total_weight() - 4.0 * PI).abs() < 1e-10);
        }
    }

    #[test]
    fn absolute_first_coordinate_average() {
        let q = build_quadrature(3, 32).unwrap();
        let v = q.integrate(|u| u[0].abs()) / (4.0 * PI);
        assert!((v - 0.5).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_quadrature(1, 8).is_err());
        assert!(build_quadrature(3, 3).is_err());
        assert!(rotation_to(&UnitVector(vec![1.0, 1.0, 0.0])).is_err());
        assert!(UnitVector::new(vec![0.5, 0.0]).is_err());
    }

    #[test]
    fn rotation_special_cases() {
        let e = UnitVector::pole(3);
        assert_eq!(rotation_to(&e).unwrap(), Rotation::identity(3));
        let r = rotation_to(&e.neg()).unwrap();
        let img = r.apply(e.as_slice());
        assert!((img[0] + 1.0).abs() < 1e-15 && img[1].abs() < 1e-15 && img[2].abs() < 1e-15);
        assert!((r.matrix().determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotations_are_proper_for_many_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 0..10_000 {
            let n = 2 + k % 4;
            let u = UnitVector::random(n, &mut rng);
            let r = rotation_to(&u).unwrap();
            let m = r.matrix();
            let defect = (m.transpose() * m - DMatrix::identity(n, n)).amax();
            assert!(defect < 1e-10);
            assert!((m.determinant() - 1.0).abs() < 1e-10);
            let img = r.apply(UnitVector::pole(n).as_slice());
            let err: f64 = img.iter().zip(u.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-12);
        }
    }

    #[test]
    fn subsphere_examples() {
        let rule = subsphere_nodes(&UnitVector::pole(2), 8).unwrap();
        let mut pts = rule.nodes.clone();
        pts.sort_by(|a, b| a[1].total_cmp(&b[1]));
        assert!((pts[0][1] + 1.0).abs() < 1e-15 && (pts[1][1] - 1.0).abs() < 1e-15);
        assert!(pts.iter().all(|p| p[0].abs() < 1e-15));

        let rule = subsphere_nodes(&UnitVector::basis(3, 2), 12).unwrap();
        assert_eq!(rule.nodes.len(), 12);
        let mut angles: Vec<f64> = rule.nodes.iter().map(|v| v[1].atan2(v[0]).rem_euclid(2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        for w in angles.windows(2) {
            assert!((w[1] - w[0] - PI / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_moment_via_latitude_rule() {
        // ∫ t² (1-t²)^{(n-3)/2} dt · |S^{n-2}| = |S^{n-1}| / n.
        for n in 2..7 {
            let (t, w) = latitude_rule(n, 16);
            let v: f64 = t.iter().zip(&w).map(|(t, w)| w * t * t).sum::<f64>() * sphere_measure(n - 1);
            assert!((v - sphere_measure(n) / n as f64).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn interpolation_reproduces_nodes_and_smooth_functions() {
        let q = Arc::new(build_quadrature(3, 24).unwrap());
        let vals = q.sample(|u| 2.0 + u[0] + 0.5 * u[1] * u[2]);
        let s = SupportSamples::new(q.clone(), vals.clone()).unwrap();
        for i in (0..q.len()).step_by(37) {
            assert!((s.eval(q.node(i)) - vals[i]).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let u = UnitVector::random(3, &mut rng);
            let x = u.as_slice();
            assert!((s.eval(x) - (2.0 + x[0] + 0.5 * x[1] * x[2])).abs() < 2e-2);
        }
    }

    proptest! {
        #[test]
        fn subsphere_nodes_are_orthogonal_unit_vectors(
            coords in proptest::collection::vec(-1.0f64..1.0, 2..6),
            res in 4usize..12,
        ) {
            prop_assume!(norm(&coords) > 1e-3);
            let u = UnitVector::normalize(&coords).unwrap();
            let rule = subsphere_nodes(&u, res).unwrap();
            prop_assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for v in &rule.nodes {
                prop_assert!(dot(v, u.as_slice()).abs() <= 1e-12);
                prop_assert!((norm(v) - 1.0).abs() <= 1e-12);
            }
        }
    }
}
