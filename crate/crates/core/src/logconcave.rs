//! Log-concave functions `f = e^{−φ}` carried together with their support functions
//! `h(f,·) = Lφ`, and the Asplund endomorphisms `h(Ψ_μ f) = h(f) ⊛ μ`.
//!
//! Each side is either a closed form or a grid. Polarity swaps the two sides, so
//! `(f°)° = f` holds exactly in the representation. Integrals of `f` use the primal
//! box, integrals of `f°` the dual box: the primal box contains the sublevel set
//! `{φ ≤ min φ + 25}` (bounded through `φ(x) ≥ s·x − h(s)`), the dual box contains
//! `{h ≤ h(0) + 25}`, and both are padded by 15%.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::bodies::{self, Body};
use crate::convex_analysis::{coercivity_margin, legendre_on, Axis, Coercivity, GridFunction, Truncation};
use crate::error::{check_dim, Error, Result};
use crate::sphere::{self, Rotation};
use crate::zonal::{convolve_convex, ConvexFn, ZonalMeasure};

/// Default nodes per axis for dimensions 1, 2, 3.
pub const DEFAULT_COUNTS: [usize; 3] = [4097, 257, 65];

/// Relative mass allowed outside an integration box.
pub const TAIL_TOL: f64 = 1e-6;

const CAPTURE_LEVEL: f64 = 25.0;
const BOX_PAD: f64 = 1.15;
/// Half-width of the box for Gaussian-weighted integrals.
const GAUSSIAN_BOX: f64 = 8.5;

pub fn default_count(n: usize) -> usize {
    DEFAULT_COUNTS[n.clamp(1, 3) - 1]
}

/// One side of a log-concave function: `φ` or `h(f,·)`.
#[derive(Clone)]
pub enum Field {
    Closed(ConvexFn),
    /// `+∞` outside the grid box.
    Grid(Arc<GridFunction>),
}

impl Field {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let v = match self {
            Field::Closed(f) => f(x),
            Field::Grid(g) => g.eval(x),
        };
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    pub fn as_fn(&self) -> ConvexFn {
        match self {
            Field::Closed(f) => f.clone(),
            Field::Grid(g) => {
                let g = g.clone();
                Arc::new(move |x: &[f64]| g.eval(x))
            }
        }
    }

    pub fn sample(&self, axes: &[Axis]) -> Result<GridFunction> {
        if let Field::Grid(g) = self {
            if g.axes() == axes {
                return Ok((**g).clone());
            }
        }
        GridFunction::from_fn_par(axes.to_vec(), &|x| self.eval(x))
    }

    fn is_closed(&self) -> bool {
        matches!(self, Field::Closed(_))
    }
}

/// `f = e^{−φ}` with `φ` proper, convex and coercive.
#[derive(Clone)]
pub struct LogConcaveFn {
    dim: usize,
    phi: Field,
    h: Field,
    primal: Vec<Axis>,
    dual: Vec<Axis>,
    /// Whether `∫ f° < ∞`, i.e. the origin is interior to `dom φ`.
    polar_finite: bool,
    label: String,
}

impl std::fmt::Debug for LogConcaveFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LogConcaveFn")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("primal", &self.primal)
            .field("dual", &self.dual)
            .finish()
    }
}

fn odd(count: usize) -> usize {
    count.max(3) | 1
}

fn check_supported_dim(n: usize) -> Result<()> {
    if (1..=3).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("log-concave functions are supported for dim 1..=3, got {n}")))
    }
}

fn basis(n: usize, i: usize, scale: f64) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = scale;
    e
}

/// Box containing `{φ ≤ inf φ + T}` from `φ(x) ≥ s·x − h(s)` and `inf φ = −h(0)`.
fn primal_box(h: &Field, n: usize, count: usize) -> Result<Vec<Axis>> {
    let h0 = h.eval(&vec![0.0; n]);
    if !h0.is_finite() {
        return Err(Error::Degenerate("h(f, 0) is infinite: f is not integrable".into()));
    }
    (0..n)
        .map(|i| {
            let extent = |sign: f64| {
                (-10..=20)
                    .map(|k| {
                        let t = 2f64.powi(k);
                        (CAPTURE_LEVEL + h.eval(&basis(n, i, sign * t)) - h0) / t
                    })
                    .fold(f64::INFINITY, f64::min)
            };
            let (lo, hi) = (-extent(-1.0), extent(1.0));
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::Degenerate(format!("cannot bound the mass of f along axis {i}")));
            }
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo) * BOX_PAD);
            Axis::new(mid - half, mid + half, count)
        })
        .collect()
}

fn capture_directions(n: usize) -> Result<Vec<Vec<f64>>> {
    Ok(match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..256).map(|k| {
            let (s, c) = (2.0 * PI * k as f64 / 256.0).sin_cos();
            vec![c, s]
        })
        .collect(),
        _ => sphere::build_quadrature(n, 8)?.nodes().map(|v| v.to_vec()).collect(),
    })
}

fn capture_radius(h: &dyn Fn(&[f64]) -> f64, dirs: &[Vec<f64>], n: usize) -> Option<f64> {
    let h0 = h(&vec![0.0; n]);
    if !h0.is_finite() {
        return None;
    }
    let exits = |r: f64| dirs.iter().all(|u| h(&u.iter().map(|x| x * r).collect::<Vec<_>>()) >= h0 + CAPTURE_LEVEL);
    let mut hi = 1.0 / 64.0;
    while !exits(hi) {
        hi *= 2.0;
        if hi > 1e9 {
            return None;
        }
    }
    let mut lo = hi / 2.0;
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if exits(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Symmetric dual box containing `{h ≤ h(0) + T}` and the slopes carrying the mass of `f`,
/// found from `s ↦ h(s) − s·c` with `c` the primal box centre. The flag reports whether
/// `h` itself grows in every direction, i.e. whether `∫ f°` is finite.
fn dual_box(h: &Field, n: usize, count: usize, primal: &[Axis]) -> Result<(Vec<Axis>, bool)> {
    let dirs = capture_directions(n)?;
    let c: Vec<f64> = primal.iter().map(|a| 0.5 * (a.lo + a.hi)).collect();
    let centred = |s: &[f64]| h.eval(s) - sphere::dot(s, &c);
    // A point mass has every slope; its own box is then irrelevant and a unit box serves.
    let slopes = capture_radius(&centred, &dirs, n).unwrap_or(1.0);
    let own = capture_radius(&|s| h.eval(s), &dirs, n);
    let r = own.unwrap_or(0.0).max(slopes) * BOX_PAD;
    Ok(((0..n).map(|_| Axis::symmetric(r, count)).collect::<Result<_>>()?, own.is_some()))
}

/// Composite Simpson weights (trapezoid on a trailing odd cell).
fn simpson_weights(a: &Axis) -> Vec<f64> {
    let (m, h) = (a.count, a.spacing());
    let mut w = vec![0.0; m];
    let panels = (m - 1) / 2;
    for p in 0..panels {
        w[2 * p] += h / 3.0;
        w[2 * p + 1] += 4.0 * h / 3.0;
        w[2 * p + 2] += h / 3.0;
    }
    if (m - 1) % 2 == 1 {
        w[m - 2] += h / 2.0;
        w[m - 1] += h / 2.0;
    }
    w
}

/// `Σ_nodes w · g(node)` with tensor Simpson weights.
pub(crate) fn tensor_simpson(axes: &[Axis], g: &(dyn Fn(&[f64]) -> f64 + Sync)) -> f64 {
    let weights: Vec<Vec<f64>> = axes.iter().map(simpson_weights).collect();
    let len: usize = axes.iter().map(|a| a.count).product();
    (0..len)
        .into_par_iter()
        .map(|mut idx| {
            let mut x = [0.0; 3];
            let mut w = 1.0;
            for d in (0..axes.len()).rev() {
                let i = idx % axes[d].count;
                idx /= axes[d].count;
                x[d] = axes[d].node(i);
                w *= weights[d][i];
            }
            if w == 0.0 {
                0.0
            } else {
                w * g(&x[..axes.len()])
            }
        })
        .sum()
}

/// `∫ e^{−ψ}` on `axes` with the coercivity tail bound `e^{−β}|S^{n−1}|Γ(n, γR)/γⁿ`,
/// `R` the distance from the origin to the box boundary.
fn exp_integral(psi: &Field, axes: &[Axis], strict: bool, what: &str) -> Result<f64> {
    let total = tensor_simpson(axes, &|x| (-psi.eval(x)).exp());
    if !(total > 0.0) {
        return Err(Error::Degenerate(format!("{what} has zero mass on its grid")));
    }
    let grid = psi.sample(axes)?;
    let n = axes.len();
    let tail = match coercivity_margin(&grid) {
        Coercivity::BoundedDomain { .. } => 0.0,
        Coercivity::NotCoercive => f64::INFINITY,
        Coercivity::Coercive { gamma, beta } => {
            let r = axes.iter().map(|a| (-a.lo).min(a.hi)).fold(f64::INFINITY, f64::min);
            if r <= 0.0 {
                f64::INFINITY
            } else {
                let x = gamma * r;
                let (mut term, mut sum, mut fact) = (1.0, 0.0, 1.0);
                for k in 0..n {
                    if k > 0 {
                        term *= x / k as f64;
                        fact *= k as f64;
                    }
                    sum += term;
                }
                let sphere = if n == 1 { 2.0 } else { sphere::sphere_measure(n) };
                (-beta - x).exp() * sum * fact * sphere / gamma.powi(n as i32)
            }
        }
    };
    if tail > TAIL_TOL * total {
        let msg = format!("{what}: tail bound {tail:.3e} exceeds {TAIL_TOL:e} of mass {total:.6e}");
        if strict {
            return Err(Error::Tail(msg));
        }
        log::warn!("{msg}");
    }
    Ok(total)
}

impl LogConcaveFn {
    fn assemble(dim: usize, phi: Field, h: Field, primal: Option<Vec<Axis>>, label: String) -> Result<Self> {
        check_supported_dim(dim)?;
        let count = default_count(dim);
        let primal = match primal {
            Some(p) => p,
            None => primal_box(&h, dim, count)?,
        };
        let (dual, polar_finite) = dual_box(&h, dim, count, &primal)?;
        Ok(LogConcaveFn { dim, phi, h, primal, dual, polar_finite, label })
    }

    /// `a · exp(−½ (x−y)ᵀ E (x−y))` for positive definite `E`.
    pub fn gaussian(a: f64, y: &[f64], e: &DMatrix<f64>) -> Result<Self> {
        let n = y.len();
        check_dim(n, e.nrows())?;
        check_dim(n, e.ncols())?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("Gaussian amplitude must be positive, got {a}")));
        }
        let einv = e
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidParameter("Gaussian matrix must be positive definite".into()))?
            .inverse();
        fn quad(m: &DMatrix<f64>, v: &[f64]) -> f64 {
            let n = v.len();
            (0..n).map(|i| (0..n).map(|j| v[i] * m[(i, j)] * v[j]).sum::<f64>()).sum()
        }
        let (yp, ep, yh) = (y.to_vec(), e.clone(), y.to_vec());
        let la = a.ln();
        let phi: ConvexFn = Arc::new(move |x: &[f64]| {
            let d: Vec<f64> = x.iter().zip(&yp).map(|(a, b)| a - b).collect();
            0.5 * quad(&ep, &d) - la
        });
        let h: ConvexFn = Arc::new(move |s: &[f64]| la + sphere::dot(s, &yh) + 0.5 * quad(&einv, s));
        Self::assemble(n, Field::Closed(phi), Field::Closed(h), None, format!("gaussian(a={a},y={y:?})"))
    }

    pub fn standard_gaussian(n: usize) -> Result<Self> {
        Self::gaussian(1.0, &vec![0.0; n], &DMatrix::identity(n, n)).map(|f| f.with_label("gaussian"))
    }

    /// `exp(−½|x|² − t·max(x₁, 0)²)`: even only at `t = 0`. The support is
    /// `½|s|² − t/(1+2t)·max(s₁, 0)²`.
    pub fn skewed_gaussian(n: usize, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("skew must be non-negative, got {t}")));
        }
        let phi: ConvexFn = Arc::new(move |x: &[f64]| 0.5 * sphere::dot(x, x) + t * x[0].max(0.0).powi(2));
        let k = t / (1.0 + 2.0 * t);
        let h: ConvexFn = Arc::new(move |s: &[f64]| 0.5 * sphere::dot(s, s) - k * s[0].max(0.0).powi(2));
        Self::assemble(n, Field::Closed(phi), Field::Closed(h), None, format!("skew-gaussian(t={t})"))
    }

    /// `1_K`; the primal box is the bounding box of `K` so that boundary nodes lie on it.
    pub fn indicator(k: &Body) -> Result<Self> {
        let n = k.dim();
        check_supported_dim(n)?;
        let inside = bodies::membership(k)?;
        let phi: ConvexFn = Arc::new(move |x: &[f64]| if inside(x) { 0.0 } else { f64::INFINITY });
        let hk = k.support_fn();
        let count = default_count(n);
        let primal = (0..n)
            .map(|i| Axis::new(-k.support(&basis(n, i, -1.0)), k.support(&basis(n, i, 1.0)), count))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| Error::Degenerate(format!("{} has empty interior", k.label())))?;
        Self::assemble(n, Field::Closed(phi), Field::Closed(hk), Some(primal), format!("1_{}", k.label()))
    }

    /// `exp(−‖x‖_K^p / p)`, `p ≥ 1`, for `K` with the origin in its interior. The support
    /// function is `h_K^q / q` with `1/p + 1/q = 1` (the indicator of `K°` at `p = 1`).
    pub fn norm_power(k: &Body, p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("norm power needs p >= 1, got {p}")));
        }
        let g = bodies::gauge_fn(k)?;
        let phi: ConvexFn = Arc::new(move |x: &[f64]| g(x).powf(p) / p);
        let hk = k.support_fn();
        let h: ConvexFn = if p == 1.0 {
            Arc::new(move |s: &[f64]| if hk(s) <= 1.0 + 1e-12 { 0.0 } else { f64::INFINITY })
        } else {
            let q = p / (p - 1.0);
            Arc::new(move |s: &[f64]| hk(s).max(0.0).powf(q) / q)
        };
        Self::assemble(k.dim(), Field::Closed(phi), Field::Closed(h), None, format!("norm{p}_{}", k.label()))
    }

    /// `e^{−φ}` from closed forms of `φ` and its conjugate `h = Lφ`. The pair is trusted.
    pub fn from_closed(dim: usize, phi: ConvexFn, h: ConvexFn, label: &str) -> Result<Self> {
        Self::assemble(dim, Field::Closed(phi), Field::Closed(h), None, label.to_string())
    }

    /// `e^{−φ}` for a sampled convex coercive `φ`; `f = 0` outside the grid box.
    pub fn from_grid(phi: GridFunction) -> Result<Self> {
        if !phi.is_discretely_convex() {
            return Err(Error::InvalidParameter("grid function is not convex".into()));
        }
        if coercivity_margin(&phi) == Coercivity::NotCoercive {
            return Err(Error::InvalidParameter("grid function is not coercive".into()));
        }
        let n = phi.dim();
        let count = default_count(n);
        let field = Field::Grid(Arc::new(phi.clone()));
        let f0 = field.eval(&vec![0.0; n]);
        let radius = if f0.is_finite() {
            // Mirror of `primal_box`: {h ≤ h_min + T} from h(s) ≥ s·x − φ(x), h_min = −φ(0).
            (0..n)
                .flat_map(|i| [-1.0, 1.0].map(|sign| (i, sign)))
                .map(|(i, sign)| {
                    (-10..=20)
                        .map(|k| {
                            let t = 2f64.powi(k);
                            (CAPTURE_LEVEL + field.eval(&basis(n, i, sign * t)) - f0) / t
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        } else {
            return Err(Error::Degenerate("the origin must lie in the domain of a sampled φ".into()));
        };
        let provisional: Vec<Axis> = (0..n).map(|_| Axis::symmetric(radius * BOX_PAD, count)).collect::<Result<_>>()?;
        let h = legendre_on(&phi, &provisional, Truncation::Keep)?;
        let primal = phi.axes().to_vec();
        Ok(LogConcaveFn {
            dim: n,
            phi: field,
            h: Field::Grid(Arc::new(h)),
            primal,
            dual: provisional,
            polar_finite: true,
            label: "grid".into(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Resamples both integration boxes with `count` nodes per axis (made odd).
    pub fn with_counts(mut self, count: usize) -> Self {
        let c = odd(count);
        for a in self.primal.iter_mut().chain(self.dual.iter_mut()) {
            a.count = c;
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn primal_axes(&self) -> &[Axis] {
        &self.primal
    }

    pub fn dual_axes(&self) -> &[Axis] {
        &self.dual
    }

    pub fn phi_field(&self) -> &Field {
        &self.phi
    }

    pub fn support_field(&self) -> &Field {
        &self.h
    }

    /// `φ = −log f`.
    pub fn phi(&self, x: &[f64]) -> f64 {
        self.phi.eval(x)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (-self.phi(x)).exp()
    }

    /// `h(f, s) = sup_x s·x − φ(x)`.
    pub fn support(&self, s: &[f64]) -> f64 {
        self.h.eval(s)
    }

    pub fn phi_grid(&self) -> Result<GridFunction> {
        self.phi.sample(&self.primal)
    }

    pub fn support_grid(&self) -> Result<GridFunction> {
        self.h.sample(&self.dual)
    }

    /// `∫ f` by tensor Simpson; a tail-bound violation is an error when `strict`.
    pub fn integral(&self, strict: bool) -> Result<f64> {
        exp_integral(&self.phi, &self.primal, strict, &format!("∫{}", self.label))
    }

    pub fn mass(&self) -> Result<f64> {
        self.integral(false)
    }

    /// `∫ f° = ∫ e^{−h(f,·)}`.
    pub fn polar_mass(&self) -> Result<f64> {
        if !self.polar_finite {
            return Err(Error::Degenerate(format!("∫{}° is infinite: the origin is not interior to dom φ", self.label)));
        }
        exp_integral(&self.h, &self.dual, false, &format!("∫{}°", self.label))
    }

    /// `∫ x f / ∫ f`.
    pub fn centroid(&self) -> Result<Vec<f64>> {
        let m = self.mass()?;
        Ok((0..self.dim)
            .map(|i| tensor_simpson(&self.primal, &|x| x[i] * (-self.phi.eval(x)).exp()) / m)
            .collect())
    }

    /// `f(· − y)`: `h` gains the linear term `s·y`.
    pub fn translate(&self, y: &[f64]) -> Result<Self> {
        check_dim(self.dim, y.len())?;
        let (phi, h) = (self.phi.as_fn(), self.h.as_fn());
        let (yp, yh) = (y.to_vec(), y.to_vec());
        let tphi: ConvexFn = Arc::new(move |x: &[f64]| phi(&x.iter().zip(&yp).map(|(a, b)| a - b).collect::<Vec<_>>()));
        let th: ConvexFn = Arc::new(move |s: &[f64]| h(s) + sphere::dot(s, &yh));
        let primal: Vec<Axis> = self.primal.iter().zip(y).map(|(a, t)| Axis { lo: a.lo + t, hi: a.hi + t, count: a.count }).collect();
        let mut out = Self::assemble(self.dim, Field::Closed(tphi), Field::Closed(th), Some(primal), format!("{}(·-{y:?})", self.label))?;
        out.match_counts(self);
        Ok(out)
    }

    /// Pointwise multiple `a f`: `φ − log a` and `h + log a`.
    pub fn scale_values(&self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("value scale must be positive, got {a}")));
        }
        let (phi, h, la) = (self.phi.as_fn(), self.h.as_fn(), a.ln());
        Ok(LogConcaveFn {
            dim: self.dim,
            phi: Field::Closed(Arc::new(move |x: &[f64]| phi(x) - la)),
            h: Field::Closed(Arc::new(move |s: &[f64]| h(s) + la)),
            primal: self.primal.clone(),
            dual: self.dual.clone(),
            polar_finite: self.polar_finite,
            label: format!("{a}*{}", self.label),
        })
    }

    /// `f̄(x) = f(−x)`.
    pub fn reflect(&self) -> Result<Self> {
        let flip = |field: &Field| -> Field {
            if let Field::Grid(g) = field {
                if let Ok(r) = g.reflect() {
                    return Field::Grid(Arc::new(r));
                }
            }
            let f = field.as_fn();
            Field::Closed(Arc::new(move |x: &[f64]| f(&x.iter().map(|v| -v).collect::<Vec<_>>())))
        };
        let neg = |axes: &[Axis]| axes.iter().map(|a| Axis { lo: -a.hi, hi: -a.lo, count: a.count }).collect();
        Ok(LogConcaveFn {
            dim: self.dim,
            phi: flip(&self.phi),
            h: flip(&self.h),
            primal: neg(&self.primal),
            dual: neg(&self.dual),
            polar_finite: self.polar_finite,
            label: format!("reflect({})", self.label),
        })
    }

    /// `(ηf)(x) = f(η⁻¹x)`; `h(ηf, s) = h(f, η⁻¹s)`.
    pub fn rotate(&self, eta: &Rotation) -> Result<Self> {
        check_dim(self.dim, eta.dim())?;
        let rot = |field: &Field| -> Field {
            let (f, e) = (field.as_fn(), eta.clone());
            Field::Closed(Arc::new(move |x: &[f64]| f(&e.apply_transpose(x))))
        };
        let h = rot(&self.h);
        let mut out = Self::assemble(self.dim, rot(&self.phi), h, None, format!("rot({})", self.label))?;
        out.match_counts(self);
        Ok(out)
    }

    /// `f° = e^{−h(f,·)}`; the two sides swap.
    pub fn polar(&self) -> Result<Self> {
        let m = self.mass()?;
        if !(m > 0.0) || !self.polar_finite {
            return Err(Error::Degenerate(format!("{} has no integrable polar", self.label)));
        }
        Ok(LogConcaveFn {
            dim: self.dim,
            phi: self.h.clone(),
            h: self.phi.clone(),
            primal: self.dual.clone(),
            dual: self.primal.clone(),
            polar_finite: true,
            label: format!("({})°", self.label),
        })
    }

    fn match_counts(&mut self, other: &LogConcaveFn) {
        for (a, b) in self.primal.iter_mut().zip(&other.primal) {
            a.count = b.count;
        }
        for (a, b) in self.dual.iter_mut().zip(&other.dual) {
            a.count = b.count;
        }
    }

    /// Builds a function from its support `h` alone: `φ = Lh` on the primal box, with
    /// nodes whose maximiser leaves the dual box set to `+∞`.
    pub fn from_support(dim: usize, h: Field, label: &str, count: Option<usize>) -> Result<Self> {
        check_supported_dim(dim)?;
        let count = odd(count.unwrap_or_else(|| default_count(dim)));
        let primal = primal_box(&h, dim, count)?;
        let (dual, polar_finite) = dual_box(&h, dim, count, &primal)?;
        let sampled = h.sample(&dual)?;
        let phi = legendre_on(&sampled, &primal, Truncation::Infinite)?;
        let h = if h.is_closed() { h } else { Field::Grid(Arc::new(sampled)) };
        Ok(LogConcaveFn { dim, phi: Field::Grid(Arc::new(phi)), h, primal, dual, polar_finite, label: label.to_string() })
    }

    /// `f` from a spec string: `gaussian[:y=..][:a=..]`, `indicator:<body>[:c=..][:r=..]`,
    /// `norm-p:<body>:p=..`, `skew[:t=..]`, `file:<grid path>`. Bodies: cube, ball, simplex, Kc (n = 2),
    /// `ellipsoid:axes=..`; `shift=..` translates the result.
    pub fn from_spec(spec: &str, n: usize) -> Result<Self> {
        if let Some(path) = spec.strip_prefix("file:") {
            return Self::from_grid(GridFunction::load(std::path::Path::new(path))?).map(|f| f.with_label(spec));
        }
        let mut parts = spec.split(':');
        let kind = parts.next().unwrap_or_default();
        let mut body_name = None;
        let mut params: Vec<(String, Vec<f64>)> = Vec::new();
        for p in parts {
            match p.split_once('=') {
                Some((k, v)) => {
                    let vals = v
                        .split(',')
                        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {x} in {spec}"))))
                        .collect::<Result<Vec<_>>>()?;
                    params.push((k.trim().to_string(), vals));
                }
                None => body_name = Some(p.trim().to_string()),
            }
        }
        let get = |k: &str| params.iter().find(|(name, _)| name == k).map(|(_, v)| v.clone());
        let scalar = |k: &str, default: f64| -> Result<f64> {
            match get(k) {
                Some(v) if v.len() == 1 => Ok(v[0]),
                Some(_) => Err(Error::Parse(format!("{k} takes one value in {spec}"))),
                None => Ok(default),
            }
        };
        let body = || -> Result<Body> {
            let name = body_name.clone().ok_or_else(|| Error::Parse(format!("{spec} needs a body")))?;
            match name.as_str() {
                "cube" => Body::cube(n),
                "ball" => Body::ball(n, scalar("r", 1.0)?),
                "simplex" => Body::simplex(n),
                "Kc" => {
                    check_dim(2, n)?;
                    crate::counterexample::kc_body(scalar("c", 0.5)?)
                }
                "ellipsoid" => Body::ellipsoid(&get("axes").ok_or_else(|| Error::Parse("ellipsoid needs axes=".into()))?),
                other => Err(Error::Parse(format!("unknown body {other} in {spec}"))),
            }
        };
        let f = match kind {
            "gaussian" => {
                let y = get("y").unwrap_or_else(|| vec![0.0; n]);
                check_dim(n, y.len())?;
                Self::gaussian(scalar("a", 1.0)?, &y, &DMatrix::identity(n, n))?
            }
            "skew" => Self::skewed_gaussian(n, scalar("t", 1.0)?)?,
            "indicator" => Self::indicator(&body()?)?,
            "norm-p" => Self::norm_power(&body()?, scalar("p", 2.0)?)?,
            other => return Err(Error::Parse(format!("unknown function kind {other}"))),
        };
        let f = match get("shift") {
            Some(y) => f.translate(&y)?,
            None => f,
        };
        Ok(f.with_label(spec))
    }
}

fn sum_fields(a: &Field, b: &Field) -> Result<Field> {
    match (a, b) {
        (Field::Closed(f), Field::Closed(g)) => {
            let (f, g) = (f.clone(), g.clone());
            Ok(Field::Closed(Arc::new(move |x: &[f64]| f(x) + g(x))))
        }
        (Field::Grid(f), Field::Grid(g)) => Ok(Field::Grid(Arc::new(f.add(g)?))),
        (Field::Grid(f), closed) | (closed, Field::Grid(f)) => {
            let other = closed.sample(f.axes())?;
            Ok(Field::Grid(Arc::new(f.add(&other)?)))
        }
    }
}

/// `f ⋆ g = e^{−(φ □ ψ)}` through `h(f ⋆ g) = h(f) + h(g)`. Sampled supports must
/// share a grid.
pub fn asplund_sum(f: &LogConcaveFn, g: &LogConcaveFn) -> Result<LogConcaveFn> {
    check_dim(f.dim, g.dim)?;
    let h = sum_fields(&f.h, &g.h)?;
    let count = f.primal[0].count.max(g.primal[0].count);
    LogConcaveFn::from_support(f.dim, h, &format!("{} ⋆ {}", f.label, g.label), Some(count))
}

/// Asplund scalar multiple `λ·f = f(·/λ)^λ`: `φ ↦ λφ(·/λ)`, `h ↦ λh`.
pub fn scalar_mult(lambda: f64, f: &LogConcaveFn) -> Result<LogConcaveFn> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("Asplund scalar must be positive, got {lambda}")));
    }
    let (phi, h) = (f.phi.as_fn(), f.h.as_fn());
    let sphi: ConvexFn = Arc::new(move |x: &[f64]| lambda * phi(&x.iter().map(|v| v / lambda).collect::<Vec<_>>()));
    let sh: ConvexFn = Arc::new(move |s: &[f64]| lambda * h(s));
    let primal: Vec<Axis> = f.primal.iter().map(|a| Axis { lo: lambda * a.lo, hi: lambda * a.hi, count: a.count }).collect();
    let mut out = LogConcaveFn::assemble(f.dim, Field::Closed(sphi), Field::Closed(sh), Some(primal), format!("{lambda}·{}", f.label))?;
    out.match_counts(f);
    Ok(out)
}

/// `Δ_⋆ f = ½·f ⋆ ½·f̄`.
pub fn difference_function(f: &LogConcaveFn) -> Result<LogConcaveFn> {
    asplund_sum(&scalar_mult(0.5, f)?, &scalar_mult(0.5, &f.reflect()?)?)
}

/// `(2/n) ∫ h(f, x) dγ_n(x)`; `+∞` when `h = +∞` on a set of positive Gaussian measure
/// (convex `h` is bounded below, so the integral is then genuinely infinite).
pub fn gaussian_mean_width(f: &LogConcaveFn) -> Result<f64> {
    let h = f.h.clone();
    Ok(2.0 / f.dim as f64 * gaussian_integral_extended(f.dim, &|x| h.eval(x))?)
}

/// `∫ g dγ_n` by tensor Simpson on `[−8.5, 8.5]ⁿ`. An infinite value at a node of
/// non-negligible Gaussian weight is reported as divergence.
pub fn gaussian_integral(n: usize, g: &(dyn Fn(&[f64]) -> f64 + Sync)) -> Result<f64> {
    let v = gaussian_integral_extended(n, g)?;
    if !v.is_finite() {
        return Err(Error::Degenerate("integrand is infinite on a region of positive Gaussian measure".into()));
    }
    Ok(v)
}

/// [`gaussian_integral`] returning `±∞` instead of failing on divergence.
fn gaussian_integral_extended(n: usize, g: &(dyn Fn(&[f64]) -> f64 + Sync)) -> Result<f64> {
    check_supported_dim(n)?;
    let count = default_count(n);
    let axes: Vec<Axis> = (0..n).map(|_| Axis::symmetric(GAUSSIAN_BOX, count)).collect::<Result<_>>()?;
    let norm = (2.0 * PI).powf(-(n as f64) / 2.0);
    let v = tensor_simpson(&axes, &|x| {
        let w = norm * (-0.5 * x.iter().map(|t| t * t).sum::<f64>()).exp();
        let gx = g(x);
        if gx.is_infinite() && w > 1e-12 {
            f64::INFINITY
        } else if gx.is_infinite() {
            0.0
        } else {
            w * gx
        }
    });
    if v.is_nan() {
        return Err(Error::Degenerate("Gaussian integral is undefined (NaN integrand)".into()));
    }
    Ok(v)
}

/// Resolution of the zonal rules used for `⊛` in each dimension.
fn asplund_resolution(n: usize) -> usize {
    if n >= 3 {
        12
    } else {
        crate::zonal::DEFAULT_RESOLUTION
    }
}

/// Monotone Asplund endomorphism `Ψ_μ` of a non-negative centered zonal measure.
#[derive(Clone, Debug)]
pub struct AsplundEndo {
    mu: ZonalMeasure,
    label: String,
}

impl AsplundEndo {
    pub fn new(mu: ZonalMeasure, label: &str) -> Result<Self> {
        if !mu.is_nonnegative() {
            return Err(Error::SignedMeasure);
        }
        if !mu.is_centered() {
            return Err(Error::InvalidParameter(format!("measure {label} is not centered")));
        }
        let res = asplund_resolution(mu.dim());
        Ok(AsplundEndo { mu: mu.with_resolution(res), label: label.to_string() })
    }

    pub fn sigma(n: usize) -> Result<Self> {
        Self::new(ZonalMeasure::sigma(n), "sigma")
    }

    /// `Δ_⋆`, generated by `ν = ½(δ_ē + δ_{−ē})`.
    pub fn delta(n: usize) -> Result<Self> {
        Self::new(ZonalMeasure::nu(n), "nu")
    }

    pub fn equator(n: usize) -> Result<Self> {
        Self::new(ZonalMeasure::equator(n), "equator")
    }

    /// `sigma | nu | delta | equator | file:<json>`, optionally prefixed by `<factor>*`.
    pub fn from_spec(spec: &str, n: usize) -> Result<Self> {
        let (factor, name) = match spec.split_once('*') {
            Some((f, rest)) => (f.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad factor in {spec}")))?, rest),
            None => (1.0, spec),
        };
        let mu = match name {
            "sigma" => ZonalMeasure::sigma(n),
            "nu" | "delta" => ZonalMeasure::nu(n),
            "equator" => ZonalMeasure::equator(n),
            other => match other.strip_prefix("file:") {
                Some(path) => {
                    let mu = ZonalMeasure::from_json(&std::fs::read_to_string(path)?)?;
                    check_dim(n, mu.dim())?;
                    mu
                }
                None => return Err(Error::Parse(format!("unknown measure {other}"))),
            },
        };
        Self::new(if factor == 1.0 { mu } else { mu.scaled(factor) }, spec)
    }

    pub fn mu(&self) -> &ZonalMeasure {
        &self.mu
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mass(&self) -> f64 {
        self.mu.mass()
    }

    pub fn is_probability(&self) -> bool {
        (self.mass() - 1.0).abs() <= 1e-10
    }

    /// `h(Ψ_μ f) = h(f) ⊛ μ` as an evaluator.
    pub fn support(&self, f: &LogConcaveFn) -> Result<ConvexFn> {
        check_dim(self.dim(), f.dim)?;
        let h = f.h.as_fn();
        let n = f.dim;
        // Inradius of dom h about the origin.
        let mut r = f.dual.iter().map(|a| a.hi.min(-a.lo)).fold(f64::INFINITY, f64::min);
        while (0..n).any(|i| !h(&basis(n, i, r)).is_finite() || !h(&basis(n, i, -r)).is_finite()) {
            r /= 2.0;
            if r < 1e-12 {
                return Err(Error::Degenerate("origin is not interior to dom h(f,·)".into()));
            }
        }
        let conv = convolve_convex(h, &self.mu, r)?;
        Ok(Arc::new(move |x: &[f64]| conv.eval(x)))
    }

    /// `Ψ_μ f`, conjugating `h(f) ⊛ μ` back once.
    pub fn apply(&self, f: &LogConcaveFn) -> Result<LogConcaveFn> {
        let h = self.support(f)?;
        LogConcaveFn::from_support(f.dim, Field::Closed(h), &format!("Psi_{}({})", self.label, f.label), Some(f.primal[0].count))
    }

    /// `∫ (Ψ_μ f)° = ∫ e^{−h(f) ⊛ μ}` on the dual box fitted to the convolved support.
    pub fn polar_mass(&self, f: &LogConcaveFn) -> Result<f64> {
        let h = Field::Closed(self.support(f)?);
        let (dual, finite) = dual_box(&h, f.dim, f.dual[0].count, &f.primal)?;
        if !finite {
            return Err(Error::Degenerate("h(f) ⊛ μ does not grow in every direction".into()));
        }
        exp_integral(&h, &dual, false, &format!("∫(Psi_{} {})°", self.label, f.label))
    }
}

pub fn apply_asplund(psi: &AsplundEndo, f: &LogConcaveFn) -> Result<LogConcaveFn> {
    psi.apply(f)
}
