//! Zonal measures on `S^{n-1}` and the two convolutions built from them:
//! `(h ∗ μ)(u) = ∫ h(ϑ_u v) dμ(v)` for support functions and
//! `(φ ⊛ μ)(x) = ∫ φ(‖x‖ ϑ_x v) dμ(v)` for convex functions on `R^n`.
//!
//! A measure is a list of atoms plus an optional density. An atom `(t, w)` is `w`
//! times the invariant probability measure on the parallel subsphere `{u·ē = t}`
//! (a point mass when `t = ±1`). Densities are taken relative to the uniform
//! probability measure `σ` and are functions of the latitude `t = u·ē` only.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{self, build_quadrature, latitude_rule, norm, SphereQuadrature, SupportSamples, UnitVector};

/// Default resolution of the latitude and subsphere rules used by convolutions.
pub const DEFAULT_RESOLUTION: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub t: f64,
    pub weight: f64,
}

/// Latitude density relative to `σ`.
#[derive(Clone)]
pub enum Density {
    /// `c` (so `Uniform(1)` is `σ`).
    Uniform(f64),
    /// `c·t`.
    Linear(f64),
    /// Piecewise linear through `(nodes[i], values[i])`, constant beyond the ends.
    Table { nodes: Vec<f64>, values: Vec<f64> },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Sum(Vec<Density>),
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Uniform(c) => write!(f, "Uniform({c})"),
            Density::Linear(c) => write!(f, "Linear({c})"),
            Density::Table { nodes, .. } => write!(f, "Table({} nodes)", nodes.len()),
            Density::Custom(_) => write!(f, "Custom"),
            Density::Sum(parts) => f.debug_list().entries(parts).finish(),
        }
    }
}

impl Density {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Density::Uniform(c) => *c,
            Density::Linear(c) => c * t,
            Density::Table { nodes, values } => {
                if t <= nodes[0] {
                    return values[0];
                }
                let last = nodes.len() - 1;
                if t >= nodes[last] {
                    return values[last];
                }
                let j = nodes.partition_point(|&x| x <= t) - 1;
                let f = (t - nodes[j]) / (nodes[j + 1] - nodes[j]);
                values[j] * (1.0 - f) + values[j + 1] * f
            }
            Density::Custom(g) => g(t),
            Density::Sum(parts) => parts.iter().map(|p| p.eval(t)).sum(),
        }
    }

    fn scaled(&self, c: f64) -> Density {
        match self {
            Density::Uniform(a) => Density::Uniform(a * c),
            Density::Linear(a) => Density::Linear(a * c),
            Density::Table { nodes, values } => {
                Density::Table { nodes: nodes.clone(), values: values.iter().map(|v| v * c).collect() }
            }
            Density::Custom(g) => {
                let g = g.clone();
                Density::Custom(Arc::new(move |t| c * g(t)))
            }
            Density::Sum(parts) => Density::Sum(parts.iter().map(|p| p.scaled(c)).collect()),
        }
    }

    /// Splits into (uniform coefficient, linear coefficient, remaining general part).
    fn split(&self) -> (f64, f64, Vec<Density>) {
        match self {
            Density::Uniform(a) => (*a, 0.0, vec![]),
            Density::Linear(b) => (0.0, *b, vec![]),
            Density::Sum(parts) => parts.iter().fold((0.0, 0.0, vec![]), |(a, b, mut rest), p| {
                let (pa, pb, pr) = p.split();
                rest.extend(pr);
                (a + pa, b + pb, rest)
            }),
            other => (0.0, 0.0, vec![other.clone()]),
        }
    }

    fn table_nodes(&self) -> Vec<f64> {
        match self {
            Density::Table { nodes, .. } => nodes.clone(),
            Density::Sum(parts) => parts.iter().flat_map(|p| p.table_nodes()).collect(),
            _ => vec![],
        }
    }
}

/// A zonal (SO(n-1)-invariant) measure.
#[derive(Clone, Debug)]
pub struct ZonalMeasure {
    dim: usize,
    atoms: Vec<Atom>,
    density: Option<Density>,
    signed_ok: bool,
    resolution: usize,
}

impl ZonalMeasure {
    fn build(dim: usize, atoms: Vec<Atom>, density: Option<Density>, signed_ok: bool) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("zonal measures need dim >= 2, got {dim}")));
        }
        for a in &atoms {
            if !a.t.is_finite() || a.t.abs() > 1.0 + 1e-12 || !a.weight.is_finite() {
                return Err(Error::InvalidParameter(format!("atom latitude {} outside [-1, 1]", a.t)));
            }
        }
        if let Some(Density::Table { nodes, values }) = &density {
            if nodes.is_empty() || nodes.len() != values.len() || nodes.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter("density table needs increasing nodes matching values".into()));
            }
        }
        let atoms = atoms.into_iter().map(|a| Atom { t: a.t.clamp(-1.0, 1.0), weight: a.weight }).collect();
        let mu = ZonalMeasure { dim, atoms, density, signed_ok, resolution: DEFAULT_RESOLUTION };
        if !signed_ok && !mu.is_nonnegative() {
            return Err(Error::SignedMeasure);
        }
        Ok(mu)
    }

    /// Non-negative measure from atoms; rejects latitudes outside [-1, 1].
    pub fn from_atoms(dim: usize, atoms: &[(f64, f64)]) -> Result<Self> {
        Self::build(dim, atoms.iter().map(|&(t, weight)| Atom { t, weight }).collect(), None, false)
    }

    /// Non-negative absolutely continuous measure.
    pub fn from_density(dim: usize, density: Density) -> Result<Self> {
        Self::build(dim, vec![], Some(density), false)
    }

    /// Measure that may carry negative parts.
    pub fn signed(dim: usize, atoms: &[(f64, f64)], density: Option<Density>) -> Result<Self> {
        Self::build(dim, atoms.iter().map(|&(t, weight)| Atom { t, weight }).collect(), density, true)
    }

    /// Uniform probability measure `σ`.
    pub fn sigma(dim: usize) -> Self {
        Self::build(dim, vec![], Some(Density::Uniform(1.0)), false).expect("valid")
    }

    /// `ν = ½(δ_ē + δ_{-ē})`.
    pub fn nu(dim: usize) -> Self {
        Self::from_atoms(dim, &[(1.0, 0.5), (-1.0, 0.5)]).expect("valid")
    }

    /// Invariant probability measure on the equator `S^{n-1} ∩ ē⊥`.
    pub fn equator(dim: usize) -> Self {
        Self::from_atoms(dim, &[(0.0, 1.0)]).expect("valid")
    }

    /// `δ_ē − n(ē·u) dσ(u)`, generating `K ↦ K − s(K)`.
    pub fn j_measure(dim: usize) -> Self {
        Self::signed(dim, &[(1.0, 1.0)], Some(Density::Linear(-(dim as f64)))).expect("valid")
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution.max(4);
        self
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.weight *= c;
        }
        out.density = self.density.as_ref().map(|d| d.scaled(c));
        if c < 0.0 {
            out.signed_ok = true;
        }
        out
    }

    /// Sum of two measures of the same dimension.
    pub fn plus(&self, other: &ZonalMeasure) -> Result<Self> {
        crate::error::check_dim(self.dim, other.dim)?;
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let density = match (&self.density, &other.density) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => Some(Density::Sum(vec![a.clone(), b.clone()])),
        };
        let mut mu = Self::build(self.dim, atoms, density, true)?;
        mu.signed_ok = self.signed_ok || other.signed_ok;
        mu.resolution = self.resolution.max(other.resolution);
        Ok(mu)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn signed_ok(&self) -> bool {
        self.signed_ok
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Latitude nodes and σ-weights for the density part; weights sum to 1.
    pub fn latitude_nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim;
        let (t, w) = latitude_rule(n, self.resolution);
        let c = sphere::sphere_measure(n - 1) / sphere::sphere_measure(n);
        (t, w.into_iter().map(|x| x * c).collect())
    }

    fn density_integral(&self, mut g: impl FnMut(f64, f64) -> f64) -> f64 {
        let Some(d) = &self.density else { return 0.0 };
        let (t, w) = self.latitude_nodes();
        t.iter().zip(&w).map(|(&t, &w)| w * g(t, d.eval(t))).sum()
    }

    /// Total mass `μ(S^{n-1})`.
    pub fn mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight).sum();
        let dens = match &self.density {
            None => 0.0,
            Some(d) => {
                let (a, _, rest) = d.split();
                let general = Density::Sum(rest);
                a + self.density_integral(|t, _| general.eval(t))
            }
        };
        atoms + dens
    }

    /// Total variation `|μ|(S^{n-1})`.
    pub fn abs_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum::<f64>() + self.density_integral(|_, d| d.abs())
    }

    /// The ē-component of `∫ u dμ(u)`; other components vanish by symmetry.
    pub fn barycenter(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight * a.t).sum();
        let dens = match &self.density {
            None => 0.0,
            Some(d) => {
                let (_, b, rest) = d.split();
                // ∫ t² dσ = 1/n.
                let general = Density::Sum(rest);
                b / self.dim as f64 + self.density_integral(|t, _| t * general.eval(t))
            }
        };
        atoms + dens
    }

    pub fn is_centered(&self) -> bool {
        self.barycenter().abs() <= 1e-8
    }

    /// Atom weights and density values at the latitude nodes are all non-negative.
    pub fn is_nonnegative(&self) -> bool {
        if self.atoms.iter().any(|a| a.weight < 0.0) {
            return false;
        }
        match &self.density {
            None => true,
            Some(d) => self.monotonicity_nodes().iter().all(|&t| d.eval(t) >= -1e-14),
        }
    }

    fn monotonicity_nodes(&self) -> Vec<f64> {
        let mut t = self.latitude_nodes().0;
        if let Some(d) = &self.density {
            t.extend(d.table_nodes().into_iter().filter(|x| x.abs() < 1.0));
        }
        t
    }

    /// Decomposition used by both convolutions.
    pub fn plan(&self) -> Result<Plan> {
        let n = self.dim;
        let mut rings: Vec<(f64, f64)> = self.atoms.iter().map(|a| (a.t, a.weight)).filter(|r| r.1 != 0.0).collect();
        let (mut uniform, mut linear) = (0.0, 0.0);
        if let Some(d) = &self.density {
            let (a, b, rest) = d.split();
            uniform = a;
            linear = b;
            if !rest.is_empty() {
                let general = Density::Sum(rest);
                let (t, w) = self.latitude_nodes();
                rings.extend(t.iter().zip(&w).map(|(&t, &w)| (t, w * general.eval(t))).filter(|r| r.1 != 0.0));
            }
        }
        let global = if uniform != 0.0 || linear != 0.0 {
            let res = if n == 2 { 16 * self.resolution } else { self.resolution };
            Some(Arc::new(build_quadrature(n, res)?))
        } else {
            None
        };
        let sub_res = match n {
            2 => 2,
            3 => 16 * self.resolution,
            _ => (self.resolution / 2).max(4),
        };
        Ok(Plan { dim: n, rings, uniform, linear, global, sub_res })
    }
}

/// Precomputed decomposition `μ = Σ rings + a·σ + b·t·σ`.
#[derive(Clone, Debug)]
pub struct Plan {
    dim: usize,
    /// `(t, w)`: weight `w` on the probability measure of the parallel subsphere at `t`.
    rings: Vec<(f64, f64)>,
    uniform: f64,
    linear: f64,
    global: Option<Arc<SphereQuadrature>>,
    sub_res: usize,
}

impl Plan {
    /// `∫ f(r ϑ_u v) dμ(v)` excluding the uniform and linear parts.
    fn ring_part(&self, f: &dyn Fn(&[f64]) -> f64, u: &UnitVector, r: f64) -> Result<f64> {
        let n = self.dim;
        let mut total = 0.0;
        let mut x = vec![0.0; n];
        let needs_sub = self.rings.iter().any(|&(t, _)| t.abs() < 1.0);
        let sub = if needs_sub { Some(sphere::subsphere_nodes(u, self.sub_res)?) } else { None };
        for &(t, w) in &self.rings {
            let s = (1.0 - t * t).max(0.0).sqrt();
            let val = if s == 0.0 {
                for i in 0..n {
                    x[i] = r * t * u.as_slice()[i];
                }
                f(&x)
            } else {
                let sub = sub.as_ref().expect("built when needed");
                let mut acc = 0.0;
                for (v, wv) in sub.nodes.iter().zip(&sub.weights) {
                    for i in 0..n {
                        x[i] = r * (t * u.as_slice()[i] + s * v[i]);
                    }
                    acc += wv * f(&x);
                }
                acc
            };
            total += w * val;
        }
        Ok(total)
    }

    /// `(∫ f(r w) dσ(w), ∫ f(r w) w dσ(w))` over the global rule.
    fn global_moments(&self, f: &dyn Fn(&[f64]) -> f64, r: f64) -> (f64, Vec<f64>) {
        let n = self.dim;
        let Some(q) = &self.global else { return (0.0, vec![0.0; n]) };
        let total = q.total_weight();
        let mut m0 = 0.0;
        let mut m1 = vec![0.0; n];
        let mut x = vec![0.0; n];
        for (w, wt) in q.nodes().zip(q.weights()) {
            for i in 0..n {
                x[i] = r * w[i];
            }
            let v = f(&x);
            let p = wt / total * v;
            m0 += p;
            for i in 0..n {
                m1[i] += p * w[i];
            }
        }
        (m0, m1)
    }

    fn combine(&self, ring: f64, moments: &(f64, Vec<f64>), u: &[f64]) -> f64 {
        let mut v = ring;
        if self.uniform != 0.0 {
            v += self.uniform * moments.0;
        }
        if self.linear != 0.0 {
            // ∫ f(ϑ_u v)(ē·v) dσ(v) = u · ∫ f(w) w dσ(w).
            v += self.linear * sphere::dot(u, &moments.1);
        }
        v
    }
}

/// `h ∗ μ` sampled at every node of `quad`.
///
/// `h` is any evaluator of a 1-homogeneous function (closed form or interpolated
/// samples). With `body_result`, a measure with negative parts is rejected.
pub fn convolve_support(
    h: &(dyn Fn(&[f64]) -> f64 + Sync),
    mu: &ZonalMeasure,
    quad: &Arc<SphereQuadrature>,
    body_result: bool,
) -> Result<SupportSamples> {
    crate::error::check_dim(mu.dim, quad.dim())?;
    if body_result && !mu.is_nonnegative() {
        return Err(Error::SignedMeasure);
    }
    let plan = mu.plan()?;
    let moments = plan.global_moments(h, 1.0);
    let values = (0..quad.len())
        .into_par_iter()
        .map(|i| {
            let u = UnitVector::new(quad.node(i).to_vec())?;
            let ring = plan.ring_part(h, &u, 1.0)?;
            Ok(plan.combine(ring, &moments, u.as_slice()))
        })
        .collect::<Result<Vec<f64>>>()?;
    SupportSamples::new(quad.clone(), values)
}

/// `(h ∗ μ)(u)` at a single direction.
pub fn convolve_support_at(h: &dyn Fn(&[f64]) -> f64, plan: &Plan, u: &UnitVector) -> Result<f64> {
    let moments = plan.global_moments(h, 1.0);
    let ring = plan.ring_part(h, u, 1.0)?;
    Ok(plan.combine(ring, &moments, u.as_slice()))
}

pub type ConvexFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Pointwise `h ∗ μ` with the global moments of `h` computed once.
#[derive(Clone)]
pub struct PointwiseConvolution {
    h: ConvexFn,
    plan: Plan,
    moments: (f64, Vec<f64>),
}

impl PointwiseConvolution {
    pub fn new(h: ConvexFn, mu: &ZonalMeasure) -> Result<Self> {
        let plan = mu.plan()?;
        let moments = plan.global_moments(h.as_ref(), 1.0);
        Ok(PointwiseConvolution { h, plan, moments })
    }

    pub fn eval(&self, u: &UnitVector) -> Result<f64> {
        let ring = self.plan.ring_part(self.h.as_ref(), u, 1.0)?;
        Ok(self.plan.combine(ring, &self.moments, u.as_slice()))
    }
}

/// Evaluator of `φ ⊛ μ`.
#[derive(Clone)]
pub struct ConvexConvolution {
    phi: ConvexFn,
    plan: Plan,
    mass: f64,
}

impl fmt::Debug for ConvexConvolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexConvolution").field("plan", &self.plan).field("mass", &self.mass).finish()
    }
}

/// Builds `φ ⊛ μ` for non-negative `μ`. `inradius` is the radius of a ball about
/// the origin inside `dom φ`; there `φ` is continuous, so the liminf defining the
/// origin value is the limit `μ(S^{n-1})·φ(0)`.
pub fn convolve_convex(phi: ConvexFn, mu: &ZonalMeasure, inradius: f64) -> Result<ConvexConvolution> {
    if !mu.is_nonnegative() {
        return Err(Error::SignedMeasure);
    }
    if !(inradius > 0.0 && inradius.is_finite()) {
        return Err(Error::InvalidParameter(format!("domain inradius must be positive, got {inradius}")));
    }
    Ok(ConvexConvolution { phi, plan: mu.plan()?, mass: mu.mass() })
}

impl ConvexConvolution {
    pub fn dim(&self) -> usize {
        self.plan.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return self.mass * (self.phi)(x);
        }
        self.eval_off_origin(x, r)
    }

    fn eval_off_origin(&self, x: &[f64], r: f64) -> f64 {
        let u = match UnitVector::normalize(x) {
            Ok(u) => u,
            Err(_) => return f64::INFINITY,
        };
        let phi = self.phi.as_ref();
        let ring = self.plan.ring_part(phi, &u, r).unwrap_or(f64::INFINITY);
        let moments = self.plan.global_moments(phi, r);
        let v = self.plan.combine(ring, &moments, u.as_slice());
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Result of the weak-monotonicity feasibility scan.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakMonotonicity {
    pub feasible: bool,
    /// Coefficient `λ` of the linear measure `λ(ē·u) du` making `μ` non-negative.
    pub lambda: Option<f64>,
    /// Smallest achievable worst negative part (0 when feasible).
    pub violation: f64,
}

/// Decides whether `μ + λ(ē·u)du` is non-negative for some `λ ∈ R`.
///
/// Zonal linear measures are multiples of `(ē·u)du`, so the search is one-
/// dimensional: 2001 points on `[-Λ, Λ]`, `Λ = 10·|μ|(S^{n-1})`, followed by
/// golden-section refinement of the convex violation function.
pub fn is_weakly_monotone(mu: &ZonalMeasure) -> WeakMonotonicity {
    if mu.atoms.iter().any(|a| a.weight < 0.0) {
        let worst = mu.atoms.iter().map(|a| -a.weight).fold(0.0, f64::max);
        return WeakMonotonicity { feasible: false, lambda: None, violation: worst };
    }
    let Some(d) = &mu.density else {
        return WeakMonotonicity { feasible: true, lambda: Some(0.0), violation: 0.0 };
    };
    let area = sphere::sphere_measure(mu.dim);
    let nodes = mu.monotonicity_nodes();
    let values: Vec<f64> = nodes.iter().map(|&t| d.eval(t)).collect();
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    // λ in du-normalization; relative to σ the linear density is λ·|S|·t.
    let violation = |lambda: f64| {
        nodes.iter().zip(&values).map(|(&t, &v)| (-(v + lambda * area * t)).max(0.0)).fold(0.0, f64::max)
    };
    let big = 10.0 * mu.abs_mass().max(1e-300);
    let steps = 2000;
    let grid: Vec<f64> = (0..=steps).map(|i| -big + 2.0 * big * i as f64 / steps as f64).collect();
    let scores: Vec<f64> = grid.iter().map(|&l| violation(l)).collect();
    let feasible_grid: Vec<usize> = (0..grid.len()).filter(|&i| scores[i] <= tol).collect();
    if let Some(&best) = feasible_grid.iter().min_by(|&&a, &&b| grid[a].abs().total_cmp(&grid[b].abs())) {
        return WeakMonotonicity { feasible: true, lambda: Some(grid[best]), violation: scores[best] };
    }
    let imin = (0..grid.len()).min_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap_or(0);
    let (mut a, mut b) = (grid[imin.saturating_sub(1)], grid[(imin + 1).min(steps)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut e) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fe) = (violation(c), violation(e));
    for _ in 0..200 {
        if fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = violation(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = violation(e);
        }
        if (b - a).abs() <= 1e-15 * big {
            break;
        }
    }
    let lambda = 0.5 * (a + b);
    let v = violation(lambda);
    WeakMonotonicity { feasible: v <= tol, lambda: (v <= tol).then_some(lambda), violation: v }
}

/// Rotation by `π/2` on the plane spanned by orthonormal `a, b` (`a ↦ b`), identity on its complement.
#[derive(Clone, Debug)]
pub struct PlaneQuarterTurn {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PlaneQuarterTurn {
    /// Orthonormalizes the pair by Gram–Schmidt.
    pub fn new(p: &[f64], q: &[f64]) -> Result<Self> {
        let a = UnitVector::normalize(p)?.into_inner();
        let proj = sphere::dot(q, &a);
        let b: Vec<f64> = q.iter().zip(&a).map(|(x, y)| x - proj * y).collect();
        let b = UnitVector::normalize(&b)?.into_inner();
        Ok(PlaneQuarterTurn { a, b })
    }

    pub fn plane(&self) -> (&[f64], &[f64]) {
        (&self.a, &self.b)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let xa = sphere::dot(x, &self.a);
        let xb = sphere::dot(x, &self.b);
        x.iter().enumerate().map(|(i, &xi)| xi - xa * self.a[i] - xb * self.b[i] + xa * self.b[i] - xb * self.a[i]).collect()
    }
}

/// `g(x) = φ(ax + bϑx + ‖x‖z) + φ(ax + bϑx − ‖x‖z)` for `x` in the plane of `ϑ`.
/// Convex on that plane whenever `φ` is convex; this is the pointwise building
/// block of the convexity of `φ ⊛ μ`.
pub fn paired_lift<'a>(
    phi: &'a dyn Fn(&[f64]) -> f64,
    turn: &'a PlaneQuarterTurn,
    z: &'a [f64],
    a: f64,
    b: f64,
) -> impl Fn(&[f64]) -> f64 + 'a {
    move |x: &[f64]| {
        let r = norm(x);
        let jx = turn.apply(x);
        let base: Vec<f64> = x.iter().zip(&jx).map(|(xi, ji)| a * xi + b * ji).collect();
        let plus: Vec<f64> = base.iter().zip(z).map(|(p, zi)| p + r * zi).collect();
        let minus: Vec<f64> = base.iter().zip(z).map(|(p, zi)| p - r * zi).collect();
        phi(&plus) + phi(&minus)
    }
}

#[derive(Serialize, Deserialize)]
struct DensityFile {
    kind: String,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    scale: Option<f64>,
    #[serde(default)]
    nodes: Vec<f64>,
    #[serde(default)]
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureFile {
    dim: usize,
    #[serde(default)]
    atoms: Vec<[f64; 2]>,
    #[serde(default)]
    density: Option<DensityFile>,
    #[serde(default)]
    signed_ok: bool,
    #[serde(default)]
    resolution: Option<usize>,
}

impl ZonalMeasure {
    /// Parses `{"atoms": [[t, w], ...], "density": {"kind": "none|table|named", ...}, "dim": n}`.
    /// Named densities are `"sigma"` (constant) and `"linear"` (`t`), multiplied by `scale`;
    /// all densities are relative to `σ`.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: MeasureFile = serde_json::from_str(text)?;
        let density = match file.density {
            None => None,
            Some(d) => match d.kind.as_str() {
                "none" => None,
                "table" => Some(Density::Table { nodes: d.nodes, values: d.values }),
                "named" => {
                    let scale = d.scale.unwrap_or(1.0);
                    match d.name.as_deref() {
                        Some("sigma") | Some("uniform") => Some(Density::Uniform(scale)),
                        Some("linear") => Some(Density::Linear(scale)),
                        other => return Err(Error::Parse(format!("unknown named density {other:?}"))),
                    }
                }
                other => return Err(Error::Parse(format!("unknown density kind {other:?}"))),
            },
        };
        let atoms: Vec<(f64, f64)> = file.atoms.iter().map(|a| (a[0], a[1])).collect();
        let mut mu = if file.signed_ok {
            Self::signed(file.dim, &atoms, density)?
        } else {
            Self::build(file.dim, atoms.iter().map(|&(t, weight)| Atom { t, weight }).collect(), density, false)?
        };
        if let Some(r) = file.resolution {
            mu = mu.with_resolution(r);
        }
        Ok(mu)
    }

    /// Serializes measures whose density is absent, a table, or uniform/linear.
    pub fn to_json(&self) -> Result<String> {
        let density = match &self.density {
            None => None,
            Some(Density::Table { nodes, values }) => Some(DensityFile {
                kind: "table".into(),
                name: None,
                scale: None,
                nodes: nodes.clone(),
                values: values.clone(),
            }),
            Some(Density::Uniform(c)) => Some(DensityFile {
                kind: "named".into(),
                name: Some("sigma".into()),
                scale: Some(*c),
                nodes: vec![],
                values: vec![],
            }),
            Some(Density::Linear(c)) => Some(DensityFile {
                kind: "named".into(),
                name: Some("linear".into()),
                scale: Some(*c),
                nodes: vec![],
                values: vec![],
            }),
            Some(_) => return Err(Error::InvalidParameter("density has no JSON representation".into())),
        };
        let file = MeasureFile {
            dim: self.dim,
            atoms: self.atoms.iter().map(|a| [a.t, a.weight]).collect(),
            density,
            signed_ok: self.signed_ok,
            resolution: Some(self.resolution),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}
