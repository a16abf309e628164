//! Convex bodies represented by support functions, and the integral
//! functionals of the volume-product theory: volume, polar volume, mean width,
//! Steiner point, Santaló point, gauges and zonoids.
//!
//! Spherical integrals go through one of three routes:
//!
//! * planar polygons: adaptive Gauss–Kronrod on the arcs between edge normals,
//!   where the support function is smooth;
//! * bodies of revolution about `ē`: adaptive quadrature in the polar angle;
//! * everything else: the supplied [`SphereQuadrature`].
//!
//! The first two exist because polar integrands `h^{-n}` of elongated bodies
//! translated close to their boundary are sharply peaked, and a fixed rule
//! resolves such peaks only at prohibitive node counts.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::quad1d;
use crate::sphere::{self, ball_volume, dot, norm, SphereQuadrature, SupportSamples, UnitVector};
use crate::zonal::{self, ZonalMeasure};

/// Relative floor on support values below which polar integrals are refused.
pub const H_MIN_FACTOR: f64 = 1e-6;

const ADAPTIVE_TOL: f64 = 1e-12;

pub type SupportFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tags {
    pub origin_interior: bool,
    pub symmetric: bool,
    pub smooth: bool,
}

#[derive(Clone)]
enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    Polytope { vertices: Vec<Vec<f64>> },
    /// Axis-aligned ellipsoid.
    Ellipsoid { center: Vec<f64>, semi_axes: Vec<f64> },
    /// Rotation of a planar profile about `ē`; `h(x) = h_P(x_1, |x'|)`.
    Revolution { profile: Box<Body> },
    /// `h(x) = Σ w |x·v|`.
    Zonoid { generators: Vec<(Vec<f64>, f64)> },
    Sum(Box<Body>, Box<Body>),
    Translate(Box<Body>, Vec<f64>),
    Scale(Box<Body>, f64),
    /// `A K` with `A` row-major; `h(AK, x) = h(K, Aᵀx)`.
    Linear(Box<Body>, Vec<f64>),
    Reflect(Box<Body>),
    Symmetral(Box<Body>),
    /// Samples on a quadrature, with an optional exact evaluator for off-node directions.
    Sampled { samples: SupportSamples, exact: Option<SupportFn> },
    Custom(SupportFn),
}

/// A convex body in `R^n`.
#[derive(Clone)]
pub struct Body {
    dim: usize,
    shape: Shape,
    exact_volume: Option<f64>,
    tags: Tags,
    label: String,
}

impl fmt::Debug for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Body")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("exact_volume", &self.exact_volume)
            .field("tags", &self.tags)
            .finish()
    }
}

/// Signed inequality margin shared by geometric and functional checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub n: usize,
    pub subject: String,
    pub params: String,
    #[serde(with = "extended_f64")]
    pub lhs: f64,
    #[serde(with = "extended_f64")]
    pub rhs: f64,
    /// `rhs − lhs`; non-negative when the inequality `lhs ≤ rhs` holds.
    #[serde(with = "extended_f64")]
    pub margin: f64,
    #[serde(with = "extended_f64")]
    pub rel_margin: f64,
    pub tol: f64,
    pub pass: bool,
    pub grid: String,
    pub seed: Option<u64>,
    pub millis: u64,
}

/// Floats that survive JSON: non-finite values travel as `"inf"`, `"-inf"`, `"NaN"`.
mod extended_f64 {
    use serde::{de, Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    struct Visitor;

    impl de::Visitor<'_> for Visitor {
        type Value = f64;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"NaN\"")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
            Ok(v)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
            v.trim().parse::<f64>().map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        d.deserialize_any(Visitor)
    }
}

impl InequalityReport {
    /// Evaluates `lhs ≤ rhs` with tolerance `tol` relative to `|rhs|`.
    pub fn new(id: &str, n: usize, subject: &str, params: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = rhs - lhs;
        let scale = rhs.abs().max(f64::MIN_POSITIVE);
        // A divergent right side against a finite left side holds trivially.
        let rel_margin = if rhs == f64::INFINITY && lhs.is_finite() { f64::INFINITY } else { margin / scale };
        InequalityReport {
            id: id.to_string(),
            n,
            subject: subject.to_string(),
            params: params.to_string(),
            lhs,
            rhs,
            margin,
            rel_margin,
            tol,
            pass: rel_margin >= -tol,
            grid: String::new(),
            seed: None,
            millis: 0,
        }
    }

    /// Re-judges the report under a different relative tolerance.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self.pass = self.rel_margin >= -tol;
        self
    }
}

/// A hyperplane `{x : normal·x = offset}` bounding a polytope, `normal` a unit outer normal.
#[derive(Clone, Debug)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub vertices: Vec<usize>,
}

impl Body {
    fn new(dim: usize, shape: Shape, label: impl Into<String>) -> Self {
        Body { dim, shape, exact_volume: None, tags: Tags::default(), label: label.into() }
    }

    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        Self::ball_at(&vec![0.0; n], radius)
    }

    pub fn ball_at(center: &[f64], radius: f64) -> Result<Self> {
        let n = center.len();
        if n < 1 || !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("ball needs dim >= 1 and radius > 0, got {radius}")));
        }
        let mut b = Body::new(n, Shape::Ball { center: center.to_vec(), radius }, "ball");
        b.exact_volume = Some(ball_volume(n) * radius.powi(n as i32));
        b.tags = Tags { origin_interior: norm(center) < radius, symmetric: norm(center) == 0.0, smooth: true };
        Ok(b)
    }

    /// `[-1, 1]^n`.
    pub fn cube(n: usize) -> Result<Self> {
        let mut vertices = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            vertices.push((0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect());
        }
        let mut b = Self::polytope(vertices)?;
        b.exact_volume = Some(2f64.powi(n as i32));
        b.label = "cube".into();
        Ok(b)
    }

    /// `conv{0, e_1, …, e_n}`.
    pub fn simplex(n: usize) -> Result<Self> {
        let mut vertices = vec![vec![0.0; n]];
        for i in 0..n {
            vertices.push(UnitVector::basis(n, i).into_inner());
        }
        let mut b = Self::polytope(vertices)?;
        b.exact_volume = Some(1.0 / (1..=n).map(|k| k as f64).product::<f64>());
        b.label = "simplex".into();
        Ok(b)
    }

    /// Convex hull of the given points (n ≥ 2 points in a common dimension).
    pub fn polytope(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.first().map(|p| p.len()).ok_or_else(|| Error::Degenerate("empty point set".into()))?;
        if points.iter().any(|p| p.len() != n || p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidParameter("points must share one dimension and be finite".into()));
        }
        let vertices = prune_vertices(points);
        let mut b = Body::new(n, Shape::Polytope { vertices }, "polytope");
        b.tags.symmetric = b.is_centrally_symmetric();
        b.tags.origin_interior = b.origin_interior_exact();
        Ok(b)
    }

    /// Axis-aligned ellipsoid centred at the origin.
    pub fn ellipsoid(semi_axes: &[f64]) -> Result<Self> {
        if semi_axes.is_empty() || semi_axes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::InvalidParameter("ellipsoid semi-axes must be positive".into()));
        }
        let n = semi_axes.len();
        let mut b = Body::new(n, Shape::Ellipsoid { center: vec![0.0; n], semi_axes: semi_axes.to_vec() }, "ellipsoid");
        b.exact_volume = Some(ball_volume(n) * semi_axes.iter().product::<f64>());
        b.tags = Tags { origin_interior: true, symmetric: true, smooth: true };
        Ok(b)
    }

    pub fn segment(a: &[f64], b: &[f64]) -> Result<Self> {
        let mut s = Self::polytope(vec![a.to_vec(), b.to_vec()])?;
        s.exact_volume = Some(0.0);
        s.label = "segment".into();
        Ok(s)
    }

    /// Hull of `k` uniform points on the unit sphere; identical for identical seeds.
    pub fn random_polytope(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k < n + 1 {
            return Err(Error::Degenerate(format!("random polytope needs k >= n+1 points, got k={k}, n={n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..k).map(|_| UnitVector::random(n, &mut rng).into_inner()).collect();
        let mut b = Self::polytope(points)?;
        b.label = format!("random-polytope(k={k},seed={seed})");
        Ok(b)
    }

    /// Body of revolution about `ē` generated by a planar profile.
    pub fn revolution(n: usize, profile: Body) -> Result<Self> {
        check_dim(2, profile.dim)?;
        if n < 2 {
            return Err(Error::InvalidParameter("revolution bodies need n >= 2".into()));
        }
        let interior = profile.tags.origin_interior;
        let mut b = Body::new(n, Shape::Revolution { profile: Box::new(profile) }, "revolution");
        b.tags.origin_interior = interior;
        Ok(b)
    }

    pub fn zonoid_from_generators(generators: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let n = generators.first().map(|g| g.0.len()).ok_or_else(|| Error::Degenerate("no generators".into()))?;
        if generators.iter().any(|(v, w)| v.len() != n || *w < 0.0) {
            return Err(Error::InvalidParameter("zonoid generators need a common dimension and weights >= 0".into()));
        }
        let mut b = Body::new(n, Shape::Zonoid { generators }, "zonoid");
        b.tags.symmetric = true;
        Ok(b)
    }

    /// Body given only by a support evaluator.
    pub fn from_support(n: usize, h: SupportFn, label: &str) -> Self {
        Body::new(n, Shape::Custom(h), label)
    }

    /// Body given by samples, with an optional exact evaluator for off-node use.
    pub fn from_samples(samples: SupportSamples, exact: Option<SupportFn>, label: &str) -> Self {
        let n = samples.quadrature.dim();
        let positive = samples.values.iter().all(|v| *v > 0.0);
        let mut b = Body::new(n, Shape::Sampled { samples, exact }, label);
        b.tags.origin_interior = positive;
        b
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn tags(&self) -> Tags {
        self.tags
    }

    pub fn exact_volume(&self) -> Option<f64> {
        self.exact_volume
    }

    /// Vertices for polytopes.
    pub fn vertices(&self) -> Option<&[Vec<f64>]> {
        match &self.shape {
            Shape::Polytope { vertices } => Some(vertices),
            _ => None,
        }
    }

    /// Support function, extended 1-homogeneously to all of `R^n`.
    pub fn support(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => dot(center, x) + radius * norm(x),
            Shape::Polytope { vertices } => vertices.iter().map(|v| dot(v, x)).fold(f64::NEG_INFINITY, f64::max),
            Shape::Ellipsoid { center, semi_axes } => {
                dot(center, x) + x.iter().zip(semi_axes).map(|(xi, a)| (a * xi).powi(2)).sum::<f64>().sqrt()
            }
            Shape::Revolution { profile } => {
                let radial = x[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                profile.support(&[x[0], radial])
            }
            Shape::Zonoid { generators } => generators.iter().map(|(v, w)| w * dot(v, x).abs()).sum(),
            Shape::Sum(a, b) => a.support(x) + b.support(x),
            Shape::Translate(k, y) => k.support(x) + dot(x, y),
            Shape::Scale(k, c) => c * k.support(x),
            Shape::Linear(k, a) => {
                let n = self.dim;
                let at: Vec<f64> = (0..n).map(|j| (0..n).map(|i| a[i * n + j] * x[i]).sum()).collect();
                k.support(&at)
            }
            Shape::Reflect(k) => k.support(&x.iter().map(|v| -v).collect::<Vec<_>>()),
            Shape::Symmetral(k) => {
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                0.5 * (k.support(x) + k.support(&neg))
            }
            Shape::Sampled { samples, exact } => match exact {
                Some(h) => h(x),
                None => samples.eval(x),
            },
            Shape::Custom(h) => h(x),
        }
    }

    /// Support values at every node, reusing stored samples when they live on the same rule.
    pub fn support_at_nodes(&self, quad: &SphereQuadrature) -> Vec<f64> {
        match &self.shape {
            Shape::Sampled { samples, .. } if samples.quadrature.same_rule(quad) => samples.values.clone(),
            Shape::Sum(a, b) => {
                let (ha, hb) = (a.support_at_nodes(quad), b.support_at_nodes(quad));
                ha.iter().zip(&hb).map(|(x, y)| x + y).collect()
            }
            Shape::Translate(k, y) => {
                let h = k.support_at_nodes(quad);
                h.iter().zip(quad.nodes()).map(|(v, u)| v + dot(u, y)).collect()
            }
            Shape::Scale(k, c) => k.support_at_nodes(quad).into_iter().map(|v| c * v).collect(),
            _ => (0..quad.len()).into_par_iter().map(|i| self.support(quad.node(i))).collect(),
        }
    }

    /// Support as a shareable closure.
    pub fn support_fn(&self) -> SupportFn {
        let me = self.clone();
        Arc::new(move |x: &[f64]| me.support(x))
    }

    fn map_vertices(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Option<Vec<Vec<f64>>> {
        self.vertices().map(|vs| vs.iter().map(|v| f(v)).collect())
    }

    /// `K + y`.
    pub fn translate(&self, y: &[f64]) -> Result<Self> {
        check_dim(self.dim, y.len())?;
        let mut out = match (&self.shape, self.map_vertices(|v| v.iter().zip(y).map(|(a, b)| a + b).collect())) {
            (_, Some(vs)) => Body::new(self.dim, Shape::Polytope { vertices: vs }, self.label.clone()),
            (Shape::Ball { center, radius }, None) => Body::new(
                self.dim,
                Shape::Ball { center: center.iter().zip(y).map(|(a, b)| a + b).collect(), radius: *radius },
                self.label.clone(),
            ),
            (Shape::Ellipsoid { center, semi_axes }, None) => Body::new(
                self.dim,
                Shape::Ellipsoid { center: center.iter().zip(y).map(|(a, b)| a + b).collect(), semi_axes: semi_axes.clone() },
                self.label.clone(),
            ),
            (Shape::Revolution { profile }, None) if y[1..].iter().all(|v| *v == 0.0) => {
                let p = profile.translate(&[y[0], 0.0])?;
                Body::new(self.dim, Shape::Revolution { profile: Box::new(p) }, self.label.clone())
            }
            _ => Body::new(self.dim, Shape::Translate(Box::new(self.clone()), y.to_vec()), self.label.clone()),
        };
        out.exact_volume = self.exact_volume;
        out.tags = Tags { origin_interior: false, symmetric: false, smooth: self.tags.smooth };
        out.tags.origin_interior = out.origin_interior_exact();
        Ok(out)
    }

    /// `c K` for `c > 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("scale factor must be positive, got {c}")));
        }
        let mut out = match self.map_vertices(|v| v.iter().map(|x| c * x).collect()) {
            Some(vs) => Body::new(self.dim, Shape::Polytope { vertices: vs }, self.label.clone()),
            None => Body::new(self.dim, Shape::Scale(Box::new(self.clone()), c), self.label.clone()),
        };
        out.exact_volume = self.exact_volume.map(|v| v * c.powi(self.dim as i32));
        out.tags = self.tags;
        Ok(out)
    }

    /// `−K`.
    pub fn reflect(&self) -> Self {
        let mut out = match self.map_vertices(|v| v.iter().map(|x| -x).collect()) {
            Some(vs) => Body::new(self.dim, Shape::Polytope { vertices: vs }, self.label.clone()),
            None => Body::new(self.dim, Shape::Reflect(Box::new(self.clone())), self.label.clone()),
        };
        out.exact_volume = self.exact_volume;
        out.tags = self.tags;
        out
    }

    /// `A K` for a rotation or other invertible linear map.
    pub fn linear_image(&self, a: &DMatrix<f64>) -> Result<Self> {
        let n = self.dim;
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::Dimension { expected: n, found: a.nrows() });
        }
        let det = a.determinant();
        let mut out = match self.map_vertices(|v| (0..n).map(|i| (0..n).map(|j| a[(i, j)] * v[j]).sum()).collect()) {
            Some(vs) => Body::new(n, Shape::Polytope { vertices: vs }, self.label.clone()),
            None => {
                let flat: Vec<f64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
                Body::new(n, Shape::Linear(Box::new(self.clone()), flat), self.label.clone())
            }
        };
        out.exact_volume = self.exact_volume.map(|v| v * det.abs());
        out.tags = self.tags;
        Ok(out)
    }

    fn is_centrally_symmetric(&self) -> bool {
        match self.vertices() {
            Some(vs) => vs.iter().all(|v| vs.iter().any(|w| v.iter().zip(w).all(|(a, b)| (a + b).abs() < 1e-12))),
            None => false,
        }
    }

    /// Origin-interior test from exact data where available.
    fn origin_interior_exact(&self) -> bool {
        match &self.shape {
            Shape::Ball { center, radius } => norm(center) < *radius,
            Shape::Ellipsoid { center, semi_axes } => {
                center.iter().zip(semi_axes).map(|(c, a)| (c / a).powi(2)).sum::<f64>() < 1.0
            }
            Shape::Polytope { vertices } => match self.dim {
                2 => polygon_edges(&hull_2d(vertices)).iter().all(|e| e.offset > 1e-14),
                3 => {
                    let f = facets_3d(vertices);
                    !f.is_empty() && f.iter().all(|f| f.offset > 1e-14)
                }
                _ => false,
            },
            Shape::Revolution { profile } => profile.origin_interior_exact(),
            _ => self.tags.origin_interior,
        }
    }

    /// Facet normals and offsets (planar polygon edges or 3-D facets).
    pub fn facets(&self) -> Option<Vec<Facet>> {
        let vs = self.vertices()?;
        match self.dim {
            2 => {
                let hull = hull_2d(vs);
                (hull.len() >= 3).then(|| polygon_edges(&hull))
            }
            3 => {
                let f = facets_3d(vs);
                (!f.is_empty()).then_some(f)
            }
            _ => None,
        }
    }

    fn revolution_profile(&self) -> Option<&Body> {
        match &self.shape {
            Shape::Revolution { profile } => Some(profile),
            _ => None,
        }
    }

    fn planar_polygon(&self) -> Option<Vec<Vec<f64>>> {
        if self.dim != 2 {
            return None;
        }
        let hull = hull_2d(self.vertices()?);
        (hull.len() >= 3).then_some(hull)
    }
}

/// `h(K + L) = h(K) + h(L)`; vertices are pruned pairwise sums for polytopes.
pub fn minkowski_sum(k: &Body, l: &Body) -> Result<Body> {
    check_dim(k.dim, l.dim)?;
    if let (Some(a), Some(b)) = (k.vertices(), l.vertices()) {
        let sums: Vec<Vec<f64>> =
            a.iter().flat_map(|v| b.iter().map(move |w| v.iter().zip(w).map(|(x, y)| x + y).collect())).collect();
        return Body::polytope(sums).map(|s| s.with_label(format!("{}+{}", k.label, l.label)));
    }
    let mut out = Body::new(k.dim, Shape::Sum(Box::new(k.clone()), Box::new(l.clone())), format!("{}+{}", k.label, l.label));
    out.tags.origin_interior = k.tags.origin_interior && l.tags.origin_interior;
    Ok(out)
}

/// `ΔK = ½(K + (−K))`.
pub fn central_symmetral(k: &Body) -> Result<Body> {
    if let Some(vs) = k.vertices() {
        let mut pts = Vec::with_capacity(vs.len() * vs.len());
        for v in vs {
            for w in vs {
                pts.push(v.iter().zip(w).map(|(a, b)| 0.5 * (a - b)).collect());
            }
        }
        return Body::polytope(pts).map(|b| b.with_label(format!("Δ{}", k.label)));
    }
    let mut out = Body::new(k.dim, Shape::Symmetral(Box::new(k.clone())), format!("Δ{}", k.label));
    out.tags.symmetric = true;
    out.tags.smooth = k.tags.smooth;
    Ok(out)
}

/// Planar convex hull, counter-clockwise, without collinear points.
pub fn hull_2d(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
    if pts.len() < 3 {
        return pts.iter().map(|p| p.to_vec()).collect();
    }
    let scale = pts.iter().fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs())).max(1e-300);
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let eps = 1e-14 * scale * scale;
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|p| p.to_vec()).collect()
}

fn polygon_edges(hull: &[Vec<f64>]) -> Vec<Facet> {
    let m = hull.len();
    (0..m)
        .map(|i| {
            let (a, b) = (&hull[i], &hull[(i + 1) % m]);
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = (dx * dx + dy * dy).sqrt();
            let normal = vec![dy / len, -dx / len];
            Facet { offset: dot(&normal, a), normal, vertices: vec![i, (i + 1) % m] }
        })
        .collect()
}

fn shoelace(hull: &[Vec<f64>]) -> f64 {
    let m = hull.len();
    0.5 * (0..m).map(|i| hull[i][0] * hull[(i + 1) % m][1] - hull[(i + 1) % m][0] * hull[i][1]).sum::<f64>()
}

/// Outward triangles of the hull of a 3-D point set, built incrementally; empty if
/// the points are coplanar.
fn hull_triangles_3d(points: &[Vec<f64>], eps: f64) -> Vec<([usize; 3], [f64; 3], f64)> {
    let k = points.len();
    let sub = |a: &[f64], b: &[f64]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let cross = |u: [f64; 3], v: [f64; 3]| [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let n3 = |u: [f64; 3]| (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    if k < 4 {
        return Vec::new();
    }
    // Initial tetrahedron from extreme points.
    let i0 = 0;
    let i1 = (0..k).max_by(|&a, &b| dist(&points[a], &points[i0]).total_cmp(&dist(&points[b], &points[i0]))).unwrap_or(0);
    let d01 = sub(&points[i1], &points[i0]);
    let i2 = (0..k)
        .max_by(|&a, &b| n3(cross(d01, sub(&points[a], &points[i0]))).total_cmp(&n3(cross(d01, sub(&points[b], &points[i0])))))
        .unwrap_or(0);
    let base = cross(d01, sub(&points[i2], &points[i0]));
    if n3(base) <= eps * n3(d01).max(1e-300) {
        return Vec::new();
    }
    let height = |p: &[f64]| {
        let d = sub(p, &points[i0]);
        (base[0] * d[0] + base[1] * d[1] + base[2] * d[2]) / n3(base)
    };
    let i3 = (0..k).max_by(|&a, &b| height(&points[a]).abs().total_cmp(&height(&points[b]).abs())).unwrap_or(0);
    if height(&points[i3]).abs() <= eps {
        return Vec::new();
    }
    let make = |t: [usize; 3]| -> ([usize; 3], [f64; 3], f64) {
        let c = cross(sub(&points[t[1]], &points[t[0]]), sub(&points[t[2]], &points[t[0]]));
        let cn = n3(c).max(1e-300);
        let normal = [c[0] / cn, c[1] / cn, c[2] / cn];
        let offset = normal[0] * points[t[0]][0] + normal[1] * points[t[0]][1] + normal[2] * points[t[0]][2];
        (t, normal, offset)
    };
    let mut faces: Vec<([usize; 3], [f64; 3], f64)> = Vec::new();
    let tet = [i0, i1, i2, i3];
    for skip in 0..4 {
        let t: Vec<usize> = (0..4).filter(|&j| j != skip).map(|j| tet[j]).collect();
        let mut f = make([t[0], t[1], t[2]]);
        // Orient away from the omitted vertex.
        if dot(&f.1, &points[tet[skip]]) > f.2 {
            f = make([t[0], t[2], t[1]]);
        }
        faces.push(f);
    }
    for (pi, p) in points.iter().enumerate() {
        if tet.contains(&pi) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| dot(&f.1, p) - f.2 > eps).collect();
        if !visible.iter().any(|v| *v) {
            continue;
        }
        let edges: std::collections::BTreeSet<(usize, usize)> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, v)| **v)
            .flat_map(|(f, _)| [(f.0[0], f.0[1]), (f.0[1], f.0[2]), (f.0[2], f.0[0])])
            .collect();
        let horizon: Vec<(usize, usize)> = edges.iter().copied().filter(|&(a, b)| !edges.contains(&(b, a))).collect();
        let mut kept: Vec<_> = faces.iter().zip(&visible).filter(|(_, v)| !**v).map(|(f, _)| *f).collect();
        kept.extend(horizon.into_iter().map(|(a, b)| make([a, b, pi])));
        faces = kept;
    }
    faces
}

/// Facets of the hull of a 3-D point set, coplanar triangles merged; each facet
/// lists every input point on its plane.
pub fn facets_3d(points: &[Vec<f64>]) -> Vec<Facet> {
    let scale = points.iter().fold(0.0f64, |m, p| m.max(norm(p))).max(1e-300);
    let eps = 1e-10 * scale;
    let mut out: Vec<Facet> = Vec::new();
    for (_, normal, _) in hull_triangles_3d(points, eps) {
        let normal = normal.to_vec();
        // Re-derive the offset as the support value so near-degenerate triangles stay supporting.
        let offset = points.iter().map(|p| dot(&normal, p)).fold(f64::NEG_INFINITY, f64::max);
        if out.iter().any(|f| dot(&f.normal, &normal) > 1.0 - 1e-9 && (f.offset - offset).abs() < eps) {
            continue;
        }
        let vertices = (0..points.len()).filter(|&q| (dot(&normal, &points[q]) - offset).abs() <= eps).collect();
        out.push(Facet { normal, offset, vertices });
    }
    out
}

fn facet_area_3d(points: &[Vec<f64>], f: &Facet) -> f64 {
    let pts: Vec<&Vec<f64>> = f.vertices.iter().map(|&i| &points[i]).collect();
    let c: Vec<f64> = (0..3).map(|d| pts.iter().map(|p| p[d]).sum::<f64>() / pts.len() as f64).collect();
    // In-plane basis.
    let n = &f.normal;
    let seed = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let proj = dot(&seed, n);
    let e1 = UnitVector::normalize(&[seed[0] - proj * n[0], seed[1] - proj * n[1], seed[2] - proj * n[2]])
        .expect("nonzero")
        .into_inner();
    let e2 = vec![n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2], n[0] * e1[1] - n[1] * e1[0]];
    let planar: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| {
            let d = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
            vec![dot(&d, &e1), dot(&d, &e2)]
        })
        .collect();
    shoelace(&hull_2d(&planar)).abs()
}

fn volume_3d(points: &[Vec<f64>]) -> Option<f64> {
    let f = facets_3d(points);
    if f.len() < 4 {
        return None;
    }
    Some(f.iter().map(|f| f.offset * facet_area_3d(points, f) / 3.0).sum())
}

fn prune_vertices(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = points[0].len();
    match n {
        2 => {
            let h = hull_2d(&points);
            if h.len() >= 3 {
                h
            } else {
                dedup_points(points)
            }
        }
        3 => {
            let f = facets_3d(&points);
            if f.len() < 4 {
                return dedup_points(points);
            }
            let mut keep: Vec<usize> = Vec::new();
            for (i, p) in points.iter().enumerate() {
                // A point is a vertex iff its incident facet normals span R^3.
                let normals: Vec<&Vec<f64>> = f.iter().filter(|f| f.vertices.contains(&i)).map(|f| &f.normal).collect();
                if normals.len() >= 3 {
                    let m = DMatrix::from_fn(normals.len(), 3, |r, c| normals[r][c]);
                    if m.rank(1e-9) == 3 && !keep.iter().any(|&j| dist(&points[j], p) < 1e-14) {
                        keep.push(i);
                    }
                }
            }
            keep.into_iter().map(|i| points[i].clone()).collect()
        }
        _ => dedup_points(points),
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn dedup_points(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| dist(q, &p) < 1e-14) {
            out.push(p);
        }
    }
    out
}

/// Arcs `[θ_i, θ_{i+1}]` of a CCW polygon on which one vertex attains the support.
fn polygon_arcs(hull: &[Vec<f64>]) -> Vec<(f64, f64, Vec<f64>)> {
    let edges = polygon_edges(hull);
    let m = hull.len();
    let angles: Vec<f64> = edges.iter().map(|e| e.normal[1].atan2(e.normal[0])).collect();
    (0..m)
        .map(|i| {
            // Vertex i lies between edge i-1 and edge i.
            let a = angles[(i + m - 1) % m];
            let mut b = angles[i];
            while b <= a {
                b += 2.0 * PI;
            }
            (a, b, hull[i].clone())
        })
        .collect()
}

/// `∫ F(θ, h(θ)) dθ` over the circle for a polygon, vector-valued.
fn polygon_circle_integral<const K: usize>(hull: &[Vec<f64>], f: impl Fn(f64, f64) -> [f64; K]) -> [f64; K] {
    let mut out = [0.0; K];
    for (a, b, v) in polygon_arcs(hull) {
        for (k, slot) in out.iter_mut().enumerate() {
            let mut g = |th: f64| {
                let h = v[0] * th.cos() + v[1] * th.sin();
                f(th, h)[k]
            };
            let scale = g(0.5 * (a + b)).abs().max(1e-300);
            *slot += quad1d::integrate(&mut g, a, b, &[], ADAPTIVE_TOL * scale);
        }
    }
    out
}

/// Breakpoints in polar angle `θ ∈ [0, π]` where the profile support has kinks.
fn profile_breaks(profile: &Body) -> Vec<f64> {
    match profile.planar_polygon() {
        Some(h) => polygon_edges(&h)
            .iter()
            .map(|e| e.normal[1].atan2(e.normal[0]))
            .filter(|a| *a > 0.0 && *a < PI)
            .collect(),
        None => vec![],
    }
}

/// `∫_{S^{n-1}} F(u·ē, h(u)) du` for a body of revolution, by adaptive quadrature in the polar angle.
fn revolution_integral(body: &Body, profile: &Body, f: impl Fn(f64, f64) -> f64) -> f64 {
    let n = body.dim;
    let breaks = profile_breaks(profile);
    let sub = sphere::sphere_measure(n - 1);
    let mut g = |th: f64| {
        let (s, c) = th.sin_cos();
        f(c, profile.support(&[c, s])) * s.powi(n as i32 - 2)
    };
    let scale = g(0.5 * PI).abs().max(g(0.1).abs()).max(g(PI - 0.1).abs()).max(1e-300);
    sub * quad1d::integrate(&mut g, 0.0, PI, &breaks, ADAPTIVE_TOL * scale)
}

fn check_h_min(h: &[f64]) -> Result<()> {
    let max = h.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let min = h.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let floor = H_MIN_FACTOR * max.max(0.0);
    if !(min > floor) {
        return Err(Error::OriginNotInterior { h_min: min, floor });
    }
    Ok(())
}

/// `|K°| = (1/n) ∫ h(K,u)^{-n} du`.
pub fn polar_volume(k: &Body, quad: &SphereQuadrature) -> Result<f64> {
    let n = k.dim;
    check_dim(n, quad.dim())?;
    if let Some(hull) = k.planar_polygon() {
        let edges = polygon_edges(&hull);
        let hs: Vec<f64> = edges.iter().map(|e| e.offset).collect();
        let hmax = hull.iter().map(|v| norm(v)).fold(0.0, f64::max);
        check_h_min(&[hs.iter().copied().fold(f64::INFINITY, f64::min), hmax])?;
        let [v] = polygon_circle_integral(&hull, |_, h| [h.powi(-2)]);
        return Ok(v / 2.0);
    }
    if let Some(profile) = k.revolution_profile() {
        if let Some(hull) = profile.planar_polygon() {
            let hs: Vec<f64> = polygon_edges(&hull).iter().map(|e| e.offset).collect();
            let hmax = hull.iter().map(|v| norm(v)).fold(0.0, f64::max);
            check_h_min(&[hs.iter().copied().fold(f64::INFINITY, f64::min), hmax])?;
            return Ok(revolution_integral(k, profile, |_, h| h.powi(-(n as i32))) / n as f64);
        }
    }
    let h = k.support_at_nodes(quad);
    check_h_min(&h)?;
    Ok(quad.weights().iter().zip(&h).map(|(w, h)| w * h.powi(-(n as i32))).sum::<f64>() / n as f64)
}

/// `w(K) = 2/(n|B^n|) ∫ h(K,u) du`.
pub fn mean_width(k: &Body, quad: &SphereQuadrature) -> Result<f64> {
    let n = k.dim;
    check_dim(n, quad.dim())?;
    let c = 2.0 / sphere::sphere_measure(n);
    if let Some(hull) = k.planar_polygon() {
        let [v] = polygon_circle_integral(&hull, |_, h| [h]);
        return Ok(c * v);
    }
    if let Some(profile) = k.revolution_profile() {
        return Ok(c * revolution_integral(k, profile, |_, h| h));
    }
    let h = k.support_at_nodes(quad);
    Ok(c * quad.weights().iter().zip(&h).map(|(w, h)| w * h).sum::<f64>())
}

/// `s(K) = (1/|B^n|) ∫ h(K,u) u du`.
pub fn steiner_point(k: &Body, quad: &SphereQuadrature) -> Result<Vec<f64>> {
    let n = k.dim;
    check_dim(n, quad.dim())?;
    let c = 1.0 / ball_volume(n);
    if let Some(hull) = k.planar_polygon() {
        let v = polygon_circle_integral(&hull, |th, h| [h * th.cos(), h * th.sin()]);
        return Ok(vec![c * v[0], c * v[1]]);
    }
    if let Some(profile) = k.revolution_profile() {
        let mut s = vec![0.0; n];
        s[0] = c * revolution_integral(k, profile, |t, h| h * t);
        return Ok(s);
    }
    let h = k.support_at_nodes(quad);
    let mut s = vec![0.0; n];
    for ((u, w), h) in quad.nodes().zip(quad.weights()).zip(&h) {
        for i in 0..n {
            s[i] += c * w * h * u[i];
        }
    }
    Ok(s)
}

/// Radial function `ρ_K(u) = max{r : r u ∈ K}` for `K` with the origin in its interior.
///
/// Uses exact facet data for planar and 3-D polytopes and closed forms for balls and
/// ellipsoids; otherwise [`gauge_radial_search`].
pub fn gauge_radial(k: &Body, u: &UnitVector, quad: &SphereQuadrature) -> Result<f64> {
    check_dim(k.dim, u.dim())?;
    match &k.shape {
        Shape::Ball { center, radius } if norm(center) == 0.0 => return Ok(*radius),
        Shape::Ellipsoid { center, semi_axes } if norm(center) == 0.0 => {
            let g: f64 = u.as_slice().iter().zip(semi_axes).map(|(x, a)| (x / a).powi(2)).sum();
            return Ok(1.0 / g.sqrt());
        }
        _ => {}
    }
    if let Some(f) = k.facets() {
        if f.iter().all(|f| f.offset > 0.0) {
            return Ok(f
                .iter()
                .filter(|f| dot(&f.normal, u.as_slice()) > 0.0)
                .map(|f| f.offset / dot(&f.normal, u.as_slice()))
                .fold(f64::INFINITY, f64::min));
        }
        return Err(Error::OriginNotInterior { h_min: f.iter().map(|f| f.offset).fold(f64::INFINITY, f64::min), floor: 0.0 });
    }
    gauge_radial_search(k, u, quad)
}

/// Generic radial function: `min_{u·v>0} h(v)/(u·v)`.
///
/// The coarse minimum over quadrature nodes is an overestimate. Refinement uses
/// the gnomonic substitution `v ∝ u + y`, `y ∈ u⊥`, under which the objective becomes
/// the convex function `y ↦ h(u + y)`; nested golden-section search minimises it.
pub fn gauge_radial_search(k: &Body, u: &UnitVector, quad: &SphereQuadrature) -> Result<f64> {
    let n = k.dim;
    check_dim(n, quad.dim())?;
    let h = k.support_at_nodes(quad);
    let h_min = h.iter().copied().fold(f64::INFINITY, f64::min);
    if !(h_min > 0.0) {
        return Err(Error::OriginNotInterior { h_min, floor: 0.0 });
    }
    let ux = u.as_slice();
    let (mut best, mut best_v) = (f64::INFINITY, ux.to_vec());
    for (v, hv) in quad.nodes().zip(&h) {
        let c = dot(ux, v);
        if c > 1e-12 && hv / c < best {
            best = hv / c;
            best_v = v.to_vec();
        }
    }
    best = best.min(k.support(ux));
    let basis: Vec<Vec<f64>> = {
        let rot = sphere::rotation_to(u)?;
        (1..n).map(|j| (0..n).map(|i| rot.matrix()[(i, j)]).collect()).collect()
    };
    let c0 = dot(ux, &best_v);
    let y0: Vec<f64> = basis.iter().map(|b| dot(&best_v, b) / c0).collect();
    let radius = 1.5 * best / (0.5 * h_min) + 1.0;
    let g = |y: &[f64]| {
        let mut x = ux.to_vec();
        for (yi, b) in y.iter().zip(&basis) {
            for i in 0..n {
                x[i] += yi * b[i];
            }
        }
        k.support(&x)
    };
    let mut y = y0.clone();
    let refined = nested_golden(&g, &mut y, 0, radius);
    Ok(refined.min(best))
}

fn nested_golden(g: &dyn Fn(&[f64]) -> f64, y: &mut Vec<f64>, level: usize, radius: f64) -> f64 {
    if level == y.len() {
        return g(y);
    }
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (-radius, radius);
    let eval = |t: f64, y: &mut Vec<f64>| {
        y[level] = t;
        nested_golden(g, y, level + 1, radius)
    };
    let (mut c, mut d) = (b - gr * (b - a), a + gr * (b - a));
    let (mut fc, mut fd) = (eval(c, y), eval(d, y));
    let iters = if y.len() - level > 2 { 40 } else { 80 };
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = eval(c, y);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = eval(d, y);
        }
        if b - a < 1e-13 * radius {
            break;
        }
    }
    let t = 0.5 * (a + b);
    eval(t, y)
}

/// `|K|`: exact if known, shoelace / facet formula for polytopes in dimensions 2
/// and 3, polar-angle quadrature for bodies of revolution, and otherwise
/// `(1/n) ∫ ρ^n du` about the Steiner point.
pub fn volume(k: &Body, quad: &SphereQuadrature) -> Result<f64> {
    let n = k.dim;
    if let Some(v) = k.exact_volume {
        return Ok(v);
    }
    if let Some(vs) = k.vertices() {
        match n {
            2 => return Ok(shoelace(&hull_2d(vs)).abs()),
            3 => return volume_3d(vs).ok_or_else(|| Error::Degenerate("polytope is not full-dimensional".into())),
            _ => {}
        }
    }
    let s = steiner_point(k, quad)?;
    let centered = k.translate(&s.iter().map(|x| -x).collect::<Vec<_>>())?;
    if let Some(profile) = centered.revolution_profile() {
        let hull = profile.planar_polygon().ok_or_else(|| Error::Degenerate("profile is not a polygon".into()))?;
        let edges = polygon_edges(&hull);
        if edges.iter().any(|e| e.offset <= 0.0) {
            return Err(Error::OriginNotInterior { h_min: 0.0, floor: 0.0 });
        }
        let rho = |th: f64| {
            let (s, c) = th.sin_cos();
            polygon_radial(&edges, c, s)
        };
        let mut breaks: Vec<f64> = hull.iter().map(|v| v[1].atan2(v[0])).filter(|a| *a > 0.0 && *a < PI).collect();
        breaks.sort_by(f64::total_cmp);
        let mut g = |th: f64| rho(th).powi(n as i32) * th.sin().powi(n as i32 - 2);
        let scale = g(0.5 * PI).abs().max(1e-300);
        let v = sphere::sphere_measure(n - 1) * quad1d::integrate(&mut g, 0.0, PI, &breaks, ADAPTIVE_TOL * scale);
        return Ok(v / n as f64);
    }
    let rho: Vec<f64> = (0..quad.len())
        .into_par_iter()
        .map(|i| gauge_radial(&centered, &UnitVector::new(quad.node(i).to_vec())?, quad))
        .collect::<Result<_>>()?;
    Ok(quad.weights().iter().zip(&rho).map(|(w, r)| w * r.powi(n as i32)).sum::<f64>() / n as f64)
}

fn polygon_radial(edges: &[Facet], c: f64, s: f64) -> f64 {
    edges
        .iter()
        .filter_map(|e| {
            let d = e.normal[0] * c + e.normal[1] * s;
            (d > 0.0).then(|| e.offset / d)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Exact polar volume of a planar or 3-D polytope through its polar vertices `a_f / b_f`.
pub fn polar_volume_exact(k: &Body) -> Result<f64> {
    let f = k.facets().ok_or_else(|| Error::InvalidParameter("exact polar volume needs a 2-D or 3-D polytope".into()))?;
    if f.iter().any(|f| f.offset <= 0.0) {
        return Err(Error::OriginNotInterior { h_min: f.iter().map(|f| f.offset).fold(f64::INFINITY, f64::min), floor: 0.0 });
    }
    let dual: Vec<Vec<f64>> = f.iter().map(|f| f.normal.iter().map(|x| x / f.offset).collect()).collect();
    match k.dim {
        2 => Ok(shoelace(&hull_2d(&dual)).abs()),
        _ => volume_3d(&dual).ok_or_else(|| Error::Degenerate("polar polytope".into())),
    }
}

/// Outcome of the Santaló-point solver.
#[derive(Clone, Debug)]
pub struct SantaloPoint {
    pub point: Vec<f64>,
    /// `|K^z|` at the returned point.
    pub polar_volume: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

/// Minimiser of `z ↦ (1/n) ∫ (h(K,u) − z·u)^{-n} du`, by damped Newton from the Steiner point.
pub fn santalo_point(k: &Body, quad: &SphereQuadrature) -> Result<SantaloPoint> {
    let n = k.dim;
    check_dim(n, quad.dim())?;
    let h = k.support_at_nodes(quad);
    let hmax = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = H_MIN_FACTOR * hmax;
    let nodes: Vec<&[f64]> = quad.nodes().collect();
    let w = quad.weights();

    let gaps = |z: &[f64]| -> Vec<f64> { nodes.iter().zip(&h).map(|(u, h)| h - dot(z, u)).collect() };
    let objective = |g: &[f64]| g.iter().zip(w).map(|(g, w)| w * g.powi(-(n as i32))).sum::<f64>() / n as f64;

    let s = steiner_point(k, quad)?;
    // Fall back to the origin if the quadrature Steiner point is not strictly inside.
    let mut z = if gaps(&s).iter().all(|g| *g > floor) { s } else { vec![0.0; n] };
    let mut g = gaps(&z);
    if g.iter().any(|g| *g <= floor) {
        return Err(Error::OriginNotInterior { h_min: g.iter().copied().fold(f64::INFINITY, f64::min), floor });
    }
    let mut f = objective(&g);
    let max_iter = 100;
    let mut grad_norm = f64::INFINITY;
    for iter in 0..=max_iter {
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        let mut scale = 0.0;
        for ((u, gi), wi) in nodes.iter().zip(&g).zip(w) {
            let p1 = wi * gi.powi(-(n as i32) - 1);
            let p2 = (n as f64 + 1.0) * wi * gi.powi(-(n as i32) - 2);
            scale += p1;
            for i in 0..n {
                grad[i] += p1 * u[i];
                for j in 0..n {
                    hess[(i, j)] += p2 * u[i] * u[j];
                }
            }
        }
        grad_norm = grad.norm();
        if grad_norm <= 1e-9 * scale {
            return Ok(SantaloPoint { point: z, polar_volume: f, gradient_norm: grad_norm, iterations: iter });
        }
        if iter == max_iter {
            break;
        }
        let step = hess.clone().cholesky().map(|c| c.solve(&(-&grad))).unwrap_or_else(|| -&grad / scale);
        let slope = grad.dot(&step);
        // Newton decrement at roundoff level of the objective: the minimiser is resolved.
        if -slope <= 1e-13 * f {
            return Ok(SantaloPoint { point: z, polar_volume: f, gradient_norm: grad_norm, iterations: iter });
        }
        let mut alpha = 1.0;
        loop {
            let cand: Vec<f64> = (0..n).map(|i| z[i] + alpha * step[i]).collect();
            let gc = gaps(&cand);
            if gc.iter().all(|x| *x > floor) {
                let fc = objective(&gc);
                if fc <= f + 1e-4 * alpha * slope || alpha < 1e-12 {
                    z = cand;
                    g = gc;
                    f = fc;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-16 {
                return Err(Error::NoConvergence { iterations: iter, grad_norm });
            }
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, grad_norm })
}

/// Zonoid `h(u) = ∫ |u·v| dμ(v)` of an even zonal measure, discretised on its convolution rule.
pub fn zonoid(mu: &ZonalMeasure, quad: &SphereQuadrature) -> Result<Body> {
    let n = mu.dim();
    check_dim(n, quad.dim())?;
    if !mu.is_nonnegative() {
        return Err(Error::SignedMeasure);
    }
    let atoms = mu.atoms();
    let even_atoms = atoms.iter().all(|a| {
        let mirror: f64 = atoms.iter().filter(|b| (b.t + a.t).abs() < 1e-12).map(|b| b.weight).sum();
        let same: f64 = atoms.iter().filter(|b| (b.t - a.t).abs() < 1e-12).map(|b| b.weight).sum();
        (mirror - same).abs() <= 1e-12 * same.abs().max(1.0)
    });
    let even_density = match mu.density() {
        None => true,
        Some(d) => mu.latitude_nodes().0.iter().all(|&t| (d.eval(t) - d.eval(-t)).abs() <= 1e-12 * (1.0 + d.eval(t).abs())),
    };
    if !even_atoms || !even_density {
        return Err(Error::InvalidParameter("zonoid generating measure must be even".into()));
    }
    let pole = UnitVector::pole(n);
    let sub = sphere::subsphere_nodes(&pole, if n == 3 { 16 * mu.resolution() } else { mu.resolution() })?;
    let mut generators: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut push_ring = |t: f64, w: f64| {
        let s = (1.0 - t * t).max(0.0).sqrt();
        if s == 0.0 {
            generators.push((vec![t].into_iter().chain(std::iter::repeat(0.0).take(n - 1)).collect(), w));
        } else {
            for (v, wv) in sub.nodes.iter().zip(&sub.weights) {
                let x: Vec<f64> = (0..n).map(|i| t * pole.as_slice()[i] + s * v[i]).collect();
                generators.push((x, w * wv));
            }
        }
    };
    for a in atoms {
        push_ring(a.t, a.weight);
    }
    if let Some(d) = mu.density() {
        let (t, w) = mu.latitude_nodes();
        for (t, w) in t.iter().zip(&w) {
            push_ring(*t, w * d.eval(*t));
        }
    }
    Ok(Body::zonoid_from_generators(generators)?.with_label("zonoid"))
}

/// Zonoid of a discrete even measure given as `(direction, weight)` pairs.
pub fn zonoid_from_points(points: &[(Vec<f64>, f64)]) -> Result<Body> {
    let even = points.iter().all(|(v, w)| {
        points.iter().any(|(u, x)| (x - w).abs() <= 1e-12 * w.abs().max(1.0) && v.iter().zip(u).all(|(a, b)| (a + b).abs() < 1e-12))
    });
    if !even {
        return Err(Error::InvalidParameter("zonoid generating measure must be even".into()));
    }
    Body::zonoid_from_generators(points.to_vec())
}

#[derive(Deserialize)]
struct BodyFile {
    kind: String,
    dim: usize,
    #[serde(default)]
    params: serde_json::Map<String, serde_json::Value>,
}

fn param_f64(params: &serde_json::Map<String, serde_json::Value>, key: &str, default: Option<f64>) -> Result<f64> {
    match params.get(key) {
        Some(v) => v.as_f64().ok_or_else(|| Error::Parse(format!("parameter {key} must be a number"))),
        None => default.ok_or_else(|| Error::Parse(format!("missing parameter {key}"))),
    }
}

impl Body {
    /// Parses `{"kind": "ball|cube|simplex|polytope|ellipsoid|Kc|Lc", "dim": n, "params": {...}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: BodyFile = serde_json::from_str(text)?;
        let p = &file.params;
        let n = file.dim;
        match file.kind.as_str() {
            "ball" => Body::ball(n, param_f64(p, "radius", Some(1.0))?),
            "cube" => Body::cube(n),
            "simplex" => Body::simplex(n),
            "polytope" => {
                let pts: Vec<Vec<f64>> = serde_json::from_value(
                    p.get("vertices").cloned().ok_or_else(|| Error::Parse("polytope needs params.vertices".into()))?,
                )?;
                let b = Body::polytope(pts)?;
                check_dim(n, b.dim)?;
                Ok(b)
            }
            "ellipsoid" => {
                let axes: Vec<f64> = serde_json::from_value(
                    p.get("semi_axes").cloned().ok_or_else(|| Error::Parse("ellipsoid needs params.semi_axes".into()))?,
                )?;
                check_dim(n, axes.len())?;
                Body::ellipsoid(&axes)
            }
            "Kc" => {
                check_dim(2, n)?;
                crate::counterexample::kc_body(param_f64(p, "c", None)?)
            }
            "Lc" => crate::counterexample::lc_body(param_f64(p, "c", None)?, n),
            other => Err(Error::Parse(format!("unknown body kind {other}"))),
        }
    }
}

pub type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Precomputed membership test `x ∈ K`, with `1e-12` relative slack on the boundary.
pub fn membership(k: &Body) -> Result<Predicate> {
    match &k.shape {
        Shape::Ball { center, radius } => {
            let (c, r) = (center.clone(), *radius);
            return Ok(Arc::new(move |x: &[f64]| {
                x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= r * (1.0 + MEMBERSHIP_SLACK)
            }));
        }
        Shape::Ellipsoid { center, semi_axes } => {
            let (c, a) = (center.clone(), semi_axes.clone());
            return Ok(Arc::new(move |x: &[f64]| {
                x.iter().zip(&c).zip(&a).map(|((x, c), a)| ((x - c) / a).powi(2)).sum::<f64>() <= 1.0 + 2.0 * MEMBERSHIP_SLACK
            }));
        }
        Shape::Revolution { profile } => {
            let p = membership(profile)?;
            return Ok(Arc::new(move |x: &[f64]| p(&[x[0], x[1..].iter().map(|v| v * v).sum::<f64>().sqrt()])));
        }
        Shape::Translate(inner, y) => {
            let (p, y) = (membership(inner)?, y.clone());
            return Ok(Arc::new(move |x: &[f64]| p(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>())));
        }
        Shape::Scale(inner, c) if *c > 0.0 => {
            let (p, c) = (membership(inner)?, *c);
            return Ok(Arc::new(move |x: &[f64]| p(&x.iter().map(|a| a / c).collect::<Vec<_>>())));
        }
        Shape::Reflect(inner) => {
            let p = membership(inner)?;
            return Ok(Arc::new(move |x: &[f64]| p(&x.iter().map(|a| -a).collect::<Vec<_>>())));
        }
        _ => {}
    }
    if let Some(facets) = k.facets() {
        let scale = k.vertices().map_or(1.0, |vs| vs.iter().map(|v| norm(v)).fold(0.0, f64::max)).max(1e-300);
        return Ok(Arc::new(move |x: &[f64]| {
            facets.iter().all(|f| dot(&f.normal, x) <= f.offset + MEMBERSHIP_SLACK * scale)
        }));
    }
    let g = gauge_fn(k)?;
    Ok(Arc::new(move |x: &[f64]| g(x) <= 1.0 + MEMBERSHIP_SLACK))
}

/// Precomputed Minkowski functional `‖x‖_K = min{r ≥ 0 : x ∈ rK}` for `K` with the origin
/// in its interior.
pub fn gauge_fn(k: &Body) -> Result<SupportFn> {
    match &k.shape {
        Shape::Ball { center, radius } => {
            let (c, r) = (center.clone(), *radius);
            if norm(&c) >= r {
                return Err(Error::OriginNotInterior { h_min: r - norm(&c), floor: 0.0 });
            }
            // Larger root of |x/t − c| = r in 1/t.
            return Ok(Arc::new(move |x: &[f64]| {
                let (xc, xx, cc) = (dot(x, &c), dot(x, x), dot(&c, &c));
                if xx == 0.0 {
                    return 0.0;
                }
                let inv = (xc + (xc * xc + xx * (r * r - cc)).sqrt()) / xx;
                1.0 / inv
            }));
        }
        Shape::Ellipsoid { center, semi_axes } if norm(center) == 0.0 => {
            let a = semi_axes.clone();
            return Ok(Arc::new(move |x: &[f64]| x.iter().zip(&a).map(|(x, a)| (x / a).powi(2)).sum::<f64>().sqrt()));
        }
        Shape::Revolution { profile } => {
            let g = gauge_fn(profile)?;
            return Ok(Arc::new(move |x: &[f64]| g(&[x[0], x[1..].iter().map(|v| v * v).sum::<f64>().sqrt()])));
        }
        Shape::Scale(inner, c) if *c > 0.0 => {
            let (g, c) = (gauge_fn(inner)?, *c);
            return Ok(Arc::new(move |x: &[f64]| g(x) / c));
        }
        _ => {}
    }
    if let Some(facets) = k.facets() {
        if facets.iter().any(|f| f.offset <= 0.0) {
            return Err(Error::OriginNotInterior { h_min: facets.iter().map(|f| f.offset).fold(f64::INFINITY, f64::min), floor: 0.0 });
        }
        return Ok(Arc::new(move |x: &[f64]| facets.iter().map(|f| dot(&f.normal, x) / f.offset).fold(0.0, f64::max)));
    }
    if !k.tags.origin_interior {
        return Err(Error::OriginNotInterior { h_min: 0.0, floor: 0.0 });
    }
    let quad = Arc::new(sphere::build_quadrature(k.dim, 16)?);
    let body = k.clone();
    Ok(Arc::new(move |x: &[f64]| {
        let r = norm(x);
        match UnitVector::normalize(x) {
            Ok(u) => gauge_radial(&body, &u, &quad).map_or(f64::NAN, |rho| r / rho),
            Err(_) => 0.0,
        }
    }))
}

/// Support-function values of `Φ_μ K` as a body; samples live on `quad` and an exact
/// pointwise convolution serves off-node queries.
/// Perimeter of the orthogonal projection of `conv(points)` onto `u^⊥` (`u` a unit vector).
pub fn projected_perimeter_3d(points: &[Vec<f64>], u: &[f64; 3]) -> f64 {
    let pick = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let c = |p: [f64; 3], q: [f64; 3]| [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]];
    let a = c(pick, *u);
    let an = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let a = [a[0] / an, a[1] / an, a[2] / an];
    let b = c(*u, a);
    let mut pts: Vec<[f64; 2]> = points
        .iter()
        .map(|p| [a[0] * p[0] + a[1] * p[1] + a[2] * p[2], b[0] * p[0] + b[1] * p[1] + b[2] * p[2]])
        .collect();
    pts.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
    let turn = |o: [f64; 2], p: [f64; 2], q: [f64; 2]| (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0]);
    // Andrew's monotone chain.
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let h = hull.len();
    (0..h).map(|i| ((hull[(i + 1) % h][0] - hull[i][0]).powi(2) + (hull[(i + 1) % h][1] - hull[i][1]).powi(2)).sqrt()).sum()
}

pub(crate) fn convolved_body(k: &Body, mu: &ZonalMeasure, quad: &Arc<SphereQuadrature>, label: &str) -> Result<Body> {
    let h = k.support_fn();
    let samples = zonal::convolve_support(h.as_ref(), mu, quad, false)?;
    let pointwise = zonal::PointwiseConvolution::new(h, mu)?;
    let exact: SupportFn = Arc::new(move |x: &[f64]| {
        let r = norm(x);
        match UnitVector::normalize(x) {
            Ok(u) => r * pointwise.eval(&u).unwrap_or(f64::NAN),
            Err(_) => 0.0,
        }
    });
    Ok(Body::from_samples(samples, Some(exact), label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::build_quadrature;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn q(n: usize, m: usize) -> SphereQuadrature {
        build_quadrature(n, m).unwrap()
    }

    #[test]
    fn support_examples() {
        let b = Body::ball(3, 2.5).unwrap();
        assert_relative_eq!(b.support(&[0.0, 0.6, 0.8]), 2.5, epsilon = 1e-15);
        let c = Body::cube(3).unwrap();
        assert_relative_eq!(c.support(&[0.3, -0.4, 0.5]), 1.2, epsilon = 1e-15);
        assert_eq!(c.vertices().unwrap().len(), 8);
        let s = Body::simplex(2).unwrap();
        assert_eq!(s.support(&[1.0, 0.0]), 1.0);
        let p = Body::polytope(vec![vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.0, -3.0]]).unwrap();
        assert_eq!(p.support(&[0.0, 1.0]), 2.0);
    }

    #[test]
    fn minkowski_sum_examples() {
        let b = Body::ball(3, 1.0).unwrap();
        let bb = minkowski_sum(&b, &b).unwrap();
        assert_relative_eq!(bb.support(&[0.0, 0.0, 1.0]), 2.0, epsilon = 1e-15);
        let k = Body::cube(2).unwrap();
        let y = [0.3, -0.7];
        let point = Body::polytope(vec![y.to_vec()]).unwrap();
        let ky = minkowski_sum(&k, &point).unwrap();
        let u = [0.6, 0.8];
        assert_relative_eq!(ky.support(&u), k.support(&u) + dot(&u, &y), epsilon = 1e-14);
        let s1 = Body::segment(&[-1.0, 0.0], &[1.0, 0.0]).unwrap();
        let s2 = Body::segment(&[0.0, -1.0], &[0.0, 1.0]).unwrap();
        let sq = minkowski_sum(&s1, &s2).unwrap();
        let mut vs = sq.vertices().unwrap().to_vec();
        vs.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        assert_eq!(vs, vec![vec![-1.0, -1.0], vec![-1.0, 1.0], vec![1.0, -1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn central_symmetral_examples() {
        let hex = central_symmetral(&Body::simplex(2).unwrap()).unwrap();
        assert_eq!(hex.vertices().unwrap().len(), 6);
        let c = Body::cube(3).unwrap();
        let dc = central_symmetral(&c).unwrap();
        let quad = q(3, 8);
        for u in quad.nodes() {
            assert_relative_eq!(dc.support(u), c.support(u), epsilon = 1e-14);
        }
        let k = Body::random_polytope(3, 12, 1).unwrap();
        let ky = k.translate(&[0.2, 0.1, -0.3]).unwrap();
        let (a, b) = (central_symmetral(&k).unwrap(), central_symmetral(&ky).unwrap());
        for u in quad.nodes() {
            assert_relative_eq!(a.support(u), b.support(u), epsilon = 1e-12);
        }
    }

    #[test]
    fn gauge_examples() {
        let quad = q(3, 16);
        let cube = Body::cube(3).unwrap();
        let diag = UnitVector::normalize(&[1.0, 1.0, 1.0]).unwrap();
        assert_relative_eq!(gauge_radial(&cube, &diag, &quad).unwrap(), 3f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(gauge_radial_search(&cube, &diag, &quad).unwrap(), 3f64.sqrt(), max_relative = 1e-6);
        let ball = Body::ball(3, 0.7).unwrap();
        assert_relative_eq!(gauge_radial_search(&ball, &diag, &quad).unwrap(), 0.7, max_relative = 1e-6);
        let kc = crate::counterexample::kc_body(0.5).unwrap().translate(&[-0.1, 0.0]).unwrap();
        let e1 = UnitVector::pole(2);
        // From the interior point (0.1, 0) the vertex (c, 0) sits at distance c − 0.1.
        let q2 = q(2, 64);
        assert_relative_eq!(gauge_radial(&kc, &e1, &q2).unwrap(), 0.4, epsilon = 1e-12);
        assert_relative_eq!(gauge_radial_search(&kc, &e1, &q2).unwrap(), 0.4, max_relative = 1e-6);
        let kc0 = crate::counterexample::kc_body(0.5).unwrap();
        assert!(gauge_radial(&kc0, &e1, &q2).is_err());
    }

    #[test]
    fn volume_examples() {
        let quad = q(3, 24);
        assert_relative_eq!(volume(&Body::ball(3, 1.0).unwrap(), &quad).unwrap(), 4.0 * PI / 3.0, epsilon = 1e-14);
        let cube_pts = Body::polytope(Body::cube(3).unwrap().vertices().unwrap().to_vec()).unwrap();
        assert_relative_eq!(volume(&cube_pts, &quad).unwrap(), 8.0, epsilon = 1e-12);
        let q2 = q(2, 64);
        for c in [0.1, 0.5, 1.0, 3.0] {
            let kc = crate::counterexample::kc_body(c).unwrap();
            assert_relative_eq!(volume(&kc, &q2).unwrap(), 1.0, epsilon = 1e-13);
        }
        // Radial quadrature route against the exact ellipsoid volume.
        let e = Body::ellipsoid(&[1.0, 1.5, 0.8]).unwrap();
        let custom = Body::from_support(3, e.support_fn(), "ellipsoid-support");
        let v = volume(&custom, &quad).unwrap();
        assert_relative_eq!(v, e.exact_volume().unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn polar_volume_examples() {
        let quad = q(3, 32);
        let r = 1.7;
        assert_relative_eq!(
            polar_volume(&Body::ball(3, r).unwrap(), &quad).unwrap(),
            ball_volume(3) / r.powi(3),
            max_relative = 1e-12
        );
        let cube = Body::cube(3).unwrap();
        assert_relative_eq!(polar_volume_exact(&cube).unwrap(), 4.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(polar_volume(&cube, &q(3, 64)).unwrap(), 4.0 / 3.0, max_relative = 1e-3);
        let q2 = q(2, 64);
        for (c, t) in [(1.0, 0.5), (0.5, 0.05), (2.0, 1.3)] {
            let kt = crate::counterexample::kc_body(c).unwrap().translate(&[-t, 0.0]).unwrap();
            let exact = c.powi(3) / (t * (c - t).powi(2));
            assert_relative_eq!(polar_volume(&kt, &q2).unwrap(), exact, max_relative = 1e-9);
            assert_relative_eq!(polar_volume_exact(&kt).unwrap(), exact, max_relative = 1e-12);
        }
        let near_boundary = Body::ball_at(&[0.0, 0.0, 0.999_999_9], 1.0).unwrap();
        assert!(matches!(polar_volume(&near_boundary, &quad), Err(Error::OriginNotInterior { .. })));
    }

    #[test]
    fn mean_width_examples() {
        assert_relative_eq!(mean_width(&Body::ball(3, 0.8).unwrap(), &q(3, 8)).unwrap(), 1.6, epsilon = 1e-12);
        let cube = Body::cube(3).unwrap();
        assert_relative_eq!(mean_width(&cube, &q(3, 256)).unwrap(), 3.0, max_relative = 1e-5);
        let seg = Body::segment(&[-1.0, 0.0], &[1.0, 0.0]).unwrap();
        // A segment is not a polygon; the fixed circle rule applies.
        assert_relative_eq!(mean_width(&seg, &q(2, 512)).unwrap(), 4.0 / PI, max_relative = 1e-5);
    }

    #[test]
    fn steiner_point_examples() {
        let quad = q(3, 16);
        let s = steiner_point(&Body::cube(3).unwrap(), &quad).unwrap();
        assert!(s.iter().all(|x| x.abs() < 1e-8));
        let k = Body::random_polytope(3, 10, 5).unwrap();
        let y = [0.3, -0.2, 0.1];
        let (a, b) = (steiner_point(&k, &quad).unwrap(), steiner_point(&k.translate(&y).unwrap(), &quad).unwrap());
        for i in 0..3 {
            assert_relative_eq!(b[i] - a[i], y[i], epsilon = 1e-8);
        }
        for c in [0.5, 1.0, 2.0] {
            let s = steiner_point(&crate::counterexample::kc_body(c).unwrap(), &q(2, 16)).unwrap();
            assert_relative_eq!(s[0], c / PI * (c * c).atan(), max_relative = 1e-10);
            assert!(s[1].abs() < 1e-12);
        }
    }

    #[test]
    fn santalo_point_examples() {
        let quad = q(3, 16);
        let y = [0.2, -0.1, 0.3];
        let ball = Body::ball_at(&y, 1.0).unwrap();
        let sp = santalo_point(&ball, &quad).unwrap();
        for i in 0..3 {
            assert_relative_eq!(sp.point[i], y[i], epsilon = 1e-8);
        }
        let sp = santalo_point(&Body::cube(3).unwrap(), &quad).unwrap();
        assert!(sp.point.iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn santalo_point_matches_grid_search_on_triangle() {
        let q2 = q(2, 128);
        let kc = crate::counterexample::kc_body(1.0).unwrap();
        let sp = santalo_point(&kc, &q2).unwrap();
        // Grid oracle over the bounding box [0,1]×[-1,1], restricted to interior points.
        let (nx, ny) = (400, 400);
        let (dx, dy) = (1.0 / nx as f64, 2.0 / ny as f64);
        let h = kc.support_at_nodes(&q2);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..nx {
            for j in 0..ny {
                let z = [(i as f64 + 0.5) * dx, -1.0 + (j as f64 + 0.5) * dy];
                let mut acc = 0.0;
                let mut ok = true;
                for ((u, w), hv) in q2.nodes().zip(q2.weights()).zip(&h) {
                    let g = hv - dot(u, &z);
                    if g <= 1e-9 {
                        ok = false;
                        break;
                    }
                    acc += w / (g * g);
                }
                if ok && acc < best.0 {
                    best = (acc, z[0], z[1]);
                }
            }
        }
        assert!((sp.point[0] - best.1).abs() <= 2.0 * dx, "{:?} vs {:?}", sp.point, best);
        assert!((sp.point[1] - best.2).abs() <= 2.0 * dy);
    }

    #[test]
    fn zonoid_examples() {
        let quad = q(3, 16);
        let z = zonoid(&ZonalMeasure::nu(3), &quad).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let u = UnitVector::random(3, &mut rng);
            assert_relative_eq!(z.support(u.as_slice()), u.as_slice()[0].abs(), epsilon = 1e-14);
        }
        let m = 2.5;
        let ball_like = zonoid(&ZonalMeasure::sigma(3).scaled(m), &quad).unwrap();
        // ∫|u·v| dσ(v) = 1/2 in R^3.
        for u in quad.nodes().step_by(97) {
            assert_relative_eq!(ball_like.support(u), m * 0.5, max_relative = 1e-3);
        }
        let odd = ZonalMeasure::from_atoms(3, &[(1.0, 1.0)]).unwrap();
        assert!(zonoid(&odd, &quad).is_err());
        let pairs = zonoid_from_points(&[
            (vec![1.0, 0.0], 0.5),
            (vec![-1.0, 0.0], 0.5),
            (vec![0.0, 1.0], 1.0),
            (vec![0.0, -1.0], 1.0),
        ])
        .unwrap();
        let segs = minkowski_sum(
            &Body::segment(&[-1.0, 0.0], &[1.0, 0.0]).unwrap(),
            &Body::segment(&[0.0, -2.0], &[0.0, 2.0]).unwrap(),
        )
        .unwrap();
        for _ in 0..20 {
            let u = UnitVector::random(2, &mut rng);
            assert_relative_eq!(pairs.support(u.as_slice()), segs.support(u.as_slice()), epsilon = 1e-14);
        }
        assert!(zonoid_from_points(&[(vec![1.0, 0.0], 1.0)]).is_err());
    }

    #[test]
    fn random_polytope_is_deterministic() {
        let a = Body::random_polytope(3, 20, 42).unwrap();
        let b = Body::random_polytope(3, 20, 42).unwrap();
        assert_eq!(a.vertices(), b.vertices());
        assert!(Body::random_polytope(3, 3, 1).is_err());
        assert_relative_eq!(Body::ball(3, 1.0).unwrap().exact_volume().unwrap(), 4.0 * PI / 3.0);
    }

    #[test]
    fn closed_form_supports_are_sublinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let bodies = [
            Body::cube(3).unwrap(),
            Body::ellipsoid(&[1.0, 2.0, 0.5]).unwrap(),
            Body::random_polytope(3, 15, 3).unwrap(),
            crate::counterexample::lc_body(0.7, 3).unwrap(),
            zonoid(&ZonalMeasure::equator(3), &q(3, 8)).unwrap(),
        ];
        for k in &bodies {
            for _ in 0..1000 {
                let u: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                let s: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
                assert!(k.support(&s) <= k.support(&u) + k.support(&v) + 1e-9, "{}", k.label());
            }
        }
    }

    #[test]
    fn body_json() {
        let b = Body::from_json(r#"{"kind": "ellipsoid", "dim": 3, "params": {"semi_axes": [1, 2, 3]}}"#).unwrap();
        assert_relative_eq!(b.exact_volume().unwrap(), 4.0 * PI / 3.0 * 6.0, epsilon = 1e-12);
        let kc = Body::from_json(r#"{"kind": "Kc", "dim": 2, "params": {"c": 0.5}}"#).unwrap();
        assert_eq!(kc.vertices().unwrap().len(), 3);
        assert!(Body::from_json(r#"{"kind": "torus", "dim": 3}"#).is_err());
    }
}
