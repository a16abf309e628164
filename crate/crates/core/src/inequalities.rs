//! Both sides of every volume-product inequality, evaluated numerically.
//!
//! Every report stores the side claimed to be smaller as `lhs`, so a check holds
//! exactly when `rel_margin = (rhs − lhs)/|rhs| ≥ −tol`. Precondition failures
//! (non-normalized endomorphism, odd function passed to the even check, signed
//! measure) come back as `Err`, never as a failing report.

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use nalgebra::DMatrix;

use crate::bodies::{self, Body, InequalityReport};
use crate::endomorphism::MinkowskiEndo;
use crate::error::{check_dim, Error, Result};
use crate::logconcave::{gaussian_mean_width, tensor_simpson, AsplundEndo, LogConcaveFn};
use crate::convex_analysis::Axis;
use crate::sphere::{ball_volume, SphereQuadrature};

/// Relative tolerance of geometric checks.
pub const GEOMETRIC_TOL: f64 = 1e-3;
/// Sphere-rule resolution giving mean widths of polytopes to about 1e-4.
pub const GEOMETRIC_RESOLUTION: usize = 64;
/// Relative mismatch of `∫g` from 1 accepted by [`shannon_gap`].
pub const DENSITY_TOL: f64 = 1e-6;
/// Relative mismatch of `∫f` from `(2π)^{n/2}` accepted without rescaling.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Relative tolerance of functional checks; grids are coarser in higher dimension.
pub fn functional_tol(n: usize) -> f64 {
    if n <= 2 {
        1e-2
    } else {
        5e-2
    }
}

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckId {
    BS,
    URYSOHN,
    DIFFBODY,
    PI1,
    THM1,
    THM2_LEFT,
    THM2_RIGHT,
    FBS_EVEN,
    FBS_GENERAL,
    THM4,
    CHAIN_LEFT,
    CHAIN_RIGHT,
    FUNC_URYSOHN,
    SHANNON_URYSOHN,
}

impl CheckId {
    pub const ALL: [CheckId; 14] = [
        CheckId::BS,
        CheckId::URYSOHN,
        CheckId::DIFFBODY,
        CheckId::PI1,
        CheckId::THM1,
        CheckId::THM2_LEFT,
        CheckId::THM2_RIGHT,
        CheckId::FBS_EVEN,
        CheckId::FBS_GENERAL,
        CheckId::THM4,
        CheckId::CHAIN_LEFT,
        CheckId::CHAIN_RIGHT,
        CheckId::FUNC_URYSOHN,
        CheckId::SHANNON_URYSOHN,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::BS => "BS",
            CheckId::URYSOHN => "URYSOHN",
            CheckId::DIFFBODY => "DIFFBODY",
            CheckId::PI1 => "PI1",
            CheckId::THM1 => "THM1",
            CheckId::THM2_LEFT => "THM2_LEFT",
            CheckId::THM2_RIGHT => "THM2_RIGHT",
            CheckId::FBS_EVEN => "FBS_EVEN",
            CheckId::FBS_GENERAL => "FBS_GENERAL",
            CheckId::THM4 => "THM4",
            CheckId::CHAIN_LEFT => "CHAIN_LEFT",
            CheckId::CHAIN_RIGHT => "CHAIN_RIGHT",
            CheckId::FUNC_URYSOHN => "FUNC_URYSOHN",
            CheckId::SHANNON_URYSOHN => "SHANNON_URYSOHN",
        }
    }

    pub fn is_geometric(self) -> bool {
        (self as usize) <= (CheckId::THM2_RIGHT as usize)
    }

    /// Expands a selector: a single id, `thm2`, `chain`, `geometric`, `functional` or `all`.
    /// Case-insensitive, `-` and `_` interchangeable.
    pub fn parse_group(s: &str) -> Result<Vec<CheckId>> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        let all = CheckId::ALL.iter().copied();
        Ok(match key.as_str() {
            "THM2" => vec![CheckId::THM2_LEFT, CheckId::THM2_RIGHT],
            "CHAIN" => vec![CheckId::CHAIN_LEFT, CheckId::CHAIN_RIGHT],
            "GEOMETRIC" => all.filter(|c| c.is_geometric()).collect(),
            "FUNCTIONAL" => all.filter(|c| !c.is_geometric()).collect(),
            "ALL" => all.collect(),
            _ => vec![key.parse()?],
        })
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        CheckId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == key)
            .ok_or_else(|| Error::Parse(format!("unknown check id {s}")))
    }
}

fn quad_label(quad: &SphereQuadrature) -> String {
    format!("sphere(n={},res={},nodes={})", quad.dim(), quad.resolution(), quad.len())
}

fn cached(cell: &OnceLock<f64>, f: impl FnOnce() -> Result<f64>) -> Result<f64> {
    if let Some(v) = cell.get() {
        return Ok(*v);
    }
    let v = f()?;
    Ok(*cell.get_or_init(|| v))
}

/// A body with lazily cached volume, Santaló polar volume and mean width, shared
/// between the checks run on it.
pub struct GeometricSubject {
    body: Body,
    quad: Arc<SphereQuadrature>,
    volume: OnceLock<f64>,
    santalo_volume: OnceLock<f64>,
    mean_width: OnceLock<f64>,
}

impl GeometricSubject {
    pub fn new(body: Body, quad: Arc<SphereQuadrature>) -> Result<Self> {
        check_dim(body.dim(), quad.dim())?;
        Ok(GeometricSubject { body, quad, volume: OnceLock::new(), santalo_volume: OnceLock::new(), mean_width: OnceLock::new() })
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn quad(&self) -> &Arc<SphereQuadrature> {
        &self.quad
    }

    pub fn volume(&self) -> Result<f64> {
        cached(&self.volume, || bodies::volume(&self.body, &self.quad))
    }

    /// `|K^𝐬| = min_z |K^z|`.
    pub fn santalo_volume(&self) -> Result<f64> {
        cached(&self.santalo_volume, || Ok(bodies::santalo_point(&self.body, &self.quad)?.polar_volume))
    }

    pub fn mean_width(&self) -> Result<f64> {
        cached(&self.mean_width, || bodies::mean_width(&self.body, &self.quad))
    }
}

fn require_endo(id: CheckId, phi: Option<&MinkowskiEndo>, normalized: bool) -> Result<&MinkowskiEndo> {
    let phi = phi.ok_or_else(|| Error::InvalidParameter(format!("{id} needs an endomorphism")))?;
    if !phi.is_monotone() {
        return Err(Error::InvalidParameter(format!("{id} needs a monotone endomorphism; {} has a signed measure", phi.label())));
    }
    let m = phi.mu().mass();
    if !(m > 0.0) {
        return Err(Error::InvalidParameter(format!("{id} needs a non-trivial endomorphism")));
    }
    if normalized && !phi.is_normalized() {
        return Err(Error::InvalidParameter(format!("{id} needs Phi B = B; {} has mass {m}", phi.label())));
    }
    Ok(phi)
}

/// Geometric check on a single body; see [`check_geometric_subject`].
pub fn check_geometric(id: CheckId, k: &Body, phi: Option<&MinkowskiEndo>, quad: &Arc<SphereQuadrature>) -> Result<InequalityReport> {
    check_geometric_subject(id, &GeometricSubject::new(k.clone(), quad.clone())?, phi)
}

/// `lhs ≤ rhs` per id:
/// BS `|K||K^𝐬| ≤ |B|²`; URYSOHN `|K| ≤ (w/2)ⁿ|B|`; DIFFBODY `|K||Δ°K| ≤ |B|²`;
/// PI1 `|K||Π₁°K| ≤ |B|²`; THM1 `|K||Φ°K| ≤ |B||Φ°B|`;
/// THM2_LEFT `|B|(w/2)^{−n} ≤ |Φ°K|`; THM2_RIGHT `|Φ°K| ≤ |K^𝐬|`.
pub fn check_geometric_subject(id: CheckId, subject: &GeometricSubject, phi: Option<&MinkowskiEndo>) -> Result<InequalityReport> {
    let start = Instant::now();
    let k = subject.body();
    let n = k.dim();
    let quad = subject.quad();
    let b = ball_volume(n);
    let mut params = String::new();
    let (lhs, rhs) = match id {
        CheckId::BS => (subject.volume()? * subject.santalo_volume()?, b * b),
        CheckId::URYSOHN => (subject.volume()?, (subject.mean_width()? / 2.0).powi(n as i32) * b),
        CheckId::DIFFBODY => (subject.volume()? * MinkowskiEndo::delta(n)?.polar_endo_volume(k, quad)?, b * b),
        CheckId::PI1 => (subject.volume()? * MinkowskiEndo::pi1(n)?.polar_endo_volume(k, quad)?, b * b),
        CheckId::THM1 => {
            let phi = require_endo(id, phi, false)?;
            params = format!("endo={}", phi.label());
            // ΦB = m·B, so |Φ°B| = |B| m^{−n}.
            let m = phi.mu().mass();
            (subject.volume()? * phi.polar_endo_volume(k, quad)?, b * b * m.powi(-(n as i32)))
        }
        CheckId::THM2_LEFT => {
            let phi = require_endo(id, phi, true)?;
            params = format!("endo={}", phi.label());
            (b * (subject.mean_width()? / 2.0).powi(-(n as i32)), phi.polar_endo_volume(k, quad)?)
        }
        CheckId::THM2_RIGHT => {
            let phi = require_endo(id, phi, true)?;
            params = format!("endo={}", phi.label());
            (phi.polar_endo_volume(k, quad)?, subject.santalo_volume()?)
        }
        other => return Err(Error::InvalidParameter(format!("{other} is a functional check"))),
    };
    let mut report = InequalityReport::new(id.name(), n, k.label(), &params, lhs, rhs, GEOMETRIC_TOL);
    report.grid = quad_label(quad);
    report.millis = start.elapsed().as_millis() as u64;
    Ok(report)
}

#[derive(Clone, Copy, Debug)]
pub struct FunctionalOptions {
    /// FUNC_URYSOHN: rescale `f` to mass `(2π)^{n/2}` instead of rejecting it.
    pub rescale: bool,
    /// Tail-bound violations of `∫f` become errors.
    pub strict: bool,
}

impl Default for FunctionalOptions {
    fn default() -> Self {
        FunctionalOptions { rescale: true, strict: false }
    }
}

fn grid_label(f: &LogConcaveFn) -> String {
    let counts = |axes: &[Axis]| axes.iter().map(|a| a.count.to_string()).collect::<Vec<_>>().join("x");
    format!("primal={} dual={}", counts(f.primal_axes()), counts(f.dual_axes()))
}

/// Rejects `f` unless `h(f, s) = h(f, −s)` on a coarse lattice of the dual box.
fn require_even(f: &LogConcaveFn) -> Result<()> {
    let axes: Vec<Axis> = f.dual_axes().iter().map(|a| Axis { lo: a.lo, hi: a.hi, count: 9 }).collect();
    let probe = crate::convex_analysis::GridFunction::from_fn(axes, |s: &[f64]| {
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let (a, b) = (f.support(s), f.support(&neg));
        if a.is_infinite() && b.is_infinite() {
            0.0
        } else {
            (a - b).abs() / (1.0 + a.abs().min(b.abs()))
        }
    })?;
    let worst = probe.values().iter().copied().fold(0.0, f64::max);
    if worst > 1e-8 {
        return Err(Error::InvalidParameter(format!("FBS_EVEN needs an even function; {} has asymmetry {worst:.3e}", f.label())));
    }
    Ok(())
}

fn require_probability(id: CheckId, mu: Option<&AsplundEndo>) -> Result<&AsplundEndo> {
    let mu = mu.ok_or_else(|| Error::InvalidParameter(format!("{id} needs a zonal measure")))?;
    if !mu.is_probability() {
        return Err(Error::InvalidParameter(format!("{id} needs a probability measure; {} has mass {}", mu.label(), mu.mass())));
    }
    Ok(mu)
}

/// `lhs ≤ rhs` per id, `Ψ_μ` from `mu`:
/// FBS_EVEN `∫f ∫f° ≤ (2π)ⁿ` for even `f`; FBS_GENERAL the same for `f` moved to
/// centroid zero; THM4 `∫f ∫(Ψ_μ f)° ≤ (2π)ⁿ`; CHAIN_LEFT `∫(Ψ_σ f)° ≤ ∫(Ψ_μ f)°`;
/// CHAIN_RIGHT `∫(Ψ_μ f)° ≤ ∫f°`; FUNC_URYSOHN `1 ≤ (2/n)∫h(f)dγ` at mass `(2π)^{n/2}`;
/// SHANNON_URYSOHN `1 − (2/n)log((2π)^{−n/2}∫(Ψ_μ f)°) ≤ (2/n)∫h(f)dγ`.
pub fn check_functional(id: CheckId, f: &LogConcaveFn, mu: Option<&AsplundEndo>, opts: FunctionalOptions) -> Result<InequalityReport> {
    let start = Instant::now();
    let n = f.dim();
    let nf = n as f64;
    let two_pi_n = (2.0 * PI).powi(n as i32);
    let mass = f.integral(opts.strict)?;
    if !(mass > 0.0) {
        return Err(Error::Degenerate(format!("∫{} must be positive", f.label())));
    }
    let mut params = String::new();
    let mut subject = f.label().to_string();
    let (lhs, rhs) = match id {
        CheckId::FBS_EVEN => {
            require_even(f)?;
            (mass * f.polar_mass()?, two_pi_n)
        }
        CheckId::FBS_GENERAL => {
            let c = f.centroid()?;
            params = format!("centroid={c:?}");
            let centered = f.translate(&c.iter().map(|v| -v).collect::<Vec<_>>())?;
            (mass * centered.polar_mass()?, two_pi_n)
        }
        CheckId::THM4 => {
            let mu = require_probability(id, mu)?;
            params = format!("mu={}", mu.label());
            (mass * mu.polar_mass(f)?, two_pi_n)
        }
        CheckId::CHAIN_LEFT => {
            let mu = require_probability(id, mu)?;
            params = format!("mu={}", mu.label());
            (AsplundEndo::sigma(n)?.polar_mass(f)?, mu.polar_mass(f)?)
        }
        CheckId::CHAIN_RIGHT => {
            let mu = require_probability(id, mu)?;
            params = format!("mu={}", mu.label());
            (mu.polar_mass(f)?, f.polar_mass()?)
        }
        CheckId::FUNC_URYSOHN => {
            let target = (2.0 * PI).powf(nf / 2.0);
            let factor = target / mass;
            let g = if (factor - 1.0).abs() <= NORMALIZATION_TOL {
                f.clone()
            } else if opts.rescale {
                subject = format!("{factor}*{}", f.label());
                f.scale_values(factor)?
            } else {
                return Err(Error::Normalization(format!("∫{} = {mass}, expected (2π)^(n/2) = {target}", f.label())));
            };
            params = format!("rescale={factor}");
            (1.0, gaussian_mean_width(&g)?)
        }
        CheckId::SHANNON_URYSOHN => {
            let mu = require_probability(id, mu)?;
            params = format!("mu={}", mu.label());
            let polar = mu.polar_mass(f)?;
            (1.0 - 2.0 / nf * (polar / (2.0 * PI).powf(nf / 2.0)).ln(), gaussian_mean_width(f)?)
        }
        other => return Err(Error::InvalidParameter(format!("{other} is a geometric check"))),
    };
    let mut report = InequalityReport::new(id.name(), n, &subject, &params, lhs, rhs, functional_tol(n));
    report.grid = grid_label(f);
    report.millis = start.elapsed().as_millis() as u64;
    Ok(report)
}

/// `∫g log(1/h) − ∫g log(1/g) + log ∫h ≥ 0` by tensor Simpson on `axes`; `+∞` when
/// `h` vanishes where `g` does not. Needs `g > 0` with `∫g = 1`.
pub fn shannon_gap(axes: &[Axis], g: &(dyn Fn(&[f64]) -> f64 + Sync), h: &(dyn Fn(&[f64]) -> f64 + Sync)) -> Result<f64> {
    let total = tensor_simpson(axes, g);
    if (total - 1.0).abs() > DENSITY_TOL {
        return Err(Error::Normalization(format!("density integrates to {total}, expected 1")));
    }
    let cross = tensor_simpson(axes, &|x| {
        let (gx, hx) = (g(x), h(x));
        if gx <= 0.0 {
            0.0
        } else {
            -gx * hx.ln()
        }
    });
    let entropy = tensor_simpson(axes, &|x| {
        let gx = g(x);
        if gx <= 0.0 {
            0.0
        } else {
            -gx * gx.ln()
        }
    });
    let h_mass = tensor_simpson(axes, &|x| h(x));
    if cross.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(cross - entropy + h_mass.ln())
}

/// One-parameter families probing equality cases.
#[derive(Clone)]
pub enum ScanFamily {
    /// Ellipsoids with semi-axes `(r, 1, …, 1)`; extremal at `r = 1` unless `Φ = Δ`.
    Ellipsoids { n: usize, quad: Arc<SphereQuadrature> },
    /// [`LogConcaveFn::skewed_gaussian`]; even exactly at `t = 0`.
    GaussianSkew { n: usize },
}

#[derive(Clone, Debug)]
pub struct ScanResult {
    pub rows: Vec<InequalityReport>,
    /// Parameter of the claimed extremizer.
    pub extremal: f64,
    /// `|rel_margin|` is non-decreasing (within each row's tolerance) with the
    /// distance of the parameter from `extremal`.
    pub monotone: bool,
}

/// Runs `id` along `params` of `family`.
pub fn equality_margin_scan(
    id: CheckId,
    family: &ScanFamily,
    params: &[f64],
    phi: Option<&MinkowskiEndo>,
    mu: Option<&AsplundEndo>,
) -> Result<ScanResult> {
    let (extremal, distance): (f64, fn(f64) -> f64) = match family {
        ScanFamily::Ellipsoids { .. } => (1.0, |r: f64| r.ln().abs()),
        ScanFamily::GaussianSkew { .. } => (0.0, |t: f64| t.abs()),
    };
    let mut rows = Vec::with_capacity(params.len());
    for &p in params {
        let mut row = match family {
            ScanFamily::Ellipsoids { n, quad } => {
                if !id.is_geometric() {
                    return Err(Error::InvalidParameter(format!("{id} cannot scan ellipsoids")));
                }
                let mut axes = vec![1.0; *n];
                axes[0] = p;
                check_geometric(id, &Body::ellipsoid(&axes)?, phi, quad)?
            }
            ScanFamily::GaussianSkew { n } => {
                if id.is_geometric() {
                    return Err(Error::InvalidParameter(format!("{id} cannot scan functions")));
                }
                check_functional(id, &LogConcaveFn::skewed_gaussian(*n, p)?, mu, FunctionalOptions::default())?
            }
        };
        row.params = if row.params.is_empty() { format!("param={p}") } else { format!("{};param={p}", row.params) };
        rows.push(row);
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| distance(params[a]).total_cmp(&distance(params[b])));
    let monotone = order
        .windows(2)
        .all(|w| rows[w[1]].rel_margin.abs() + rows[w[1]].tol >= rows[w[0]].rel_margin.abs());
    Ok(ScanResult { rows, extremal, monotone })
}

/// Reports as CSV with columns in field order.
pub fn write_reports_csv<W: Write>(w: W, reports: &[InequalityReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in reports {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_reports_csv<R: Read>(r: R) -> Result<Vec<InequalityReport>> {
    csv::Reader::from_reader(r).deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_reports_json<W: Write>(w: W, reports: &[InequalityReport]) -> Result<()> {
    serde_json::to_writer_pretty(w, reports)?;
    Ok(())
}

pub fn read_reports_json<R: Read>(r: R) -> Result<Vec<InequalityReport>> {
    Ok(serde_json::from_reader(r)?)
}

/// Standard Gaussian density `ψ_n`.
pub fn normal_density(n: usize) -> impl Fn(&[f64]) -> f64 + Sync {
    let c = (2.0 * PI).powf(-(n as f64) / 2.0);
    move |x: &[f64]| c * (-0.5 * x.iter().map(|t| t * t).sum::<f64>()).exp()
}

/// A Gaussian with random centre and random positive definite matrix whose
/// eigenvalues lie in `[½, 2]`.
pub fn random_gaussian<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LogConcaveFn> {
    let q = crate::sphere::Rotation::random(n, rng);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.random_range(0.5..2.0)));
    let e = q.matrix() * d * q.matrix().transpose();
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
    LogConcaveFn::gaussian(1.0, &y, &e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::build_quadrature;
    use approx::assert_relative_eq;

    fn quad3() -> Arc<SphereQuadrature> {
        Arc::new(build_quadrature(3, GEOMETRIC_RESOLUTION).unwrap())
    }

    #[test]
    fn ids_parse_case_insensitively() {
        assert_eq!("thm2-left".parse::<CheckId>().unwrap(), CheckId::THM2_LEFT);
        assert_eq!(CheckId::parse_group("Chain").unwrap(), vec![CheckId::CHAIN_LEFT, CheckId::CHAIN_RIGHT]);
        assert_eq!(CheckId::parse_group("geometric").unwrap().len(), 7);
        assert_eq!(CheckId::parse_group("all").unwrap().len(), 14);
        assert!("thm9".parse::<CheckId>().is_err());
        for id in CheckId::ALL {
            assert_eq!(id.name().parse::<CheckId>().unwrap(), id);
        }
    }

    #[test]
    fn ball_is_extremal_for_sigma() {
        let q = quad3();
        let r = check_geometric(CheckId::THM1, &Body::ball(3, 1.0).unwrap(), Some(&MinkowskiEndo::sigma(3).unwrap()), &q).unwrap();
        let b2 = ball_volume(3).powi(2);
        assert_relative_eq!(r.lhs, b2, max_relative = 1e-3);
        assert_relative_eq!(r.rhs, b2, max_relative = 1e-12);
        assert!(r.pass && r.rel_margin.abs() < 1e-3);
    }

    #[test]
    fn ellipsoid_is_extremal_for_difference_body() {
        let q = quad3();
        let r = check_geometric(CheckId::DIFFBODY, &Body::ellipsoid(&[0.7, 1.3, 2.1]).unwrap(), None, &q).unwrap();
        assert!(r.pass && r.rel_margin.abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn cube_urysohn_is_strict() {
        let q = quad3();
        let r = check_geometric(CheckId::URYSOHN, &Body::cube(3).unwrap(), None, &q).unwrap();
        assert_relative_eq!(r.lhs, 8.0, max_relative = 1e-12);
        assert_relative_eq!(r.rhs, 4.5 * PI, max_relative = 1e-3);
        assert!(r.pass && r.rel_margin > 0.4);
    }

    #[test]
    fn preconditions_are_errors() {
        let q = quad3();
        let k = Body::cube(3).unwrap();
        let twice = MinkowskiEndo::new(crate::zonal::ZonalMeasure::sigma(3).scaled(2.0), "2sigma").unwrap();
        assert!(check_geometric(CheckId::THM2_RIGHT, &k, Some(&twice), &q).is_err());
        assert!(check_geometric(CheckId::THM2_LEFT, &k, None, &q).is_err());
        assert!(check_geometric(CheckId::THM1, &k, Some(&MinkowskiEndo::j(3).unwrap()), &q).is_err());
        assert!(check_geometric(CheckId::FBS_EVEN, &k, None, &q).is_err());
        // Scaling Φ rescales the ball bound with it.
        let r = check_geometric(CheckId::THM1, &Body::ball(3, 1.0).unwrap(), Some(&twice), &q).unwrap();
        assert!(r.rel_margin.abs() < 1e-3);
    }

    #[test]
    fn gaussian_functional_equalities() {
        let g = LogConcaveFn::standard_gaussian(2).unwrap();
        let o = FunctionalOptions::default();
        let r = check_functional(CheckId::FBS_EVEN, &g, None, o).unwrap();
        assert!(r.rel_margin.abs() < 1e-2, "{r:?}");
        let r = check_functional(CheckId::FUNC_URYSOHN, &g.scale_values(3.0).unwrap(), None, o).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert_relative_eq!(r.rhs, 1.0, max_relative = 1e-3);
        let strict = FunctionalOptions { rescale: false, strict: false };
        assert!(matches!(check_functional(CheckId::FUNC_URYSOHN, &g.scale_values(3.0).unwrap(), None, strict), Err(Error::Normalization(_))));
        let shifted = g.translate(&[0.4, -0.3]).unwrap();
        let sigma = AsplundEndo::sigma(2).unwrap();
        let r = check_functional(CheckId::THM4, &shifted, Some(&sigma), o).unwrap();
        assert!(r.rel_margin.abs() < 1e-2, "{r:?}");
        let r = check_functional(CheckId::SHANNON_URYSOHN, &shifted, Some(&sigma), o).unwrap();
        assert_relative_eq!(r.lhs, r.rhs, max_relative = 1e-3);
        assert!(check_functional(CheckId::FBS_EVEN, &shifted, None, o).is_err());
        let r = check_functional(CheckId::FBS_GENERAL, &shifted, None, o).unwrap();
        assert!(r.rel_margin.abs() < 1e-2, "{r:?}");
    }

    #[test]
    fn shannon_gap_examples() {
        let axes = vec![Axis::symmetric(30.0, 4001).unwrap()];
        let g = normal_density(1);
        assert!(shannon_gap(&axes, &g, &g).unwrap().abs() < 1e-9);
        assert!(shannon_gap(&axes, &g, &|x| 2.0 * g(x)).unwrap().abs() < 1e-9);
        // E|X| − entropy + log 2 for h = e^{−|x|}.
        let expect = (2.0 / PI).sqrt() - 0.5 * (1.0 + (2.0 * PI).ln()) + 2f64.ln();
        let gap = shannon_gap(&axes, &g, &|x| (-x[0].abs()).exp()).unwrap();
        assert!(gap > 0.0);
        assert_relative_eq!(gap, expect, max_relative = 1e-6);
        assert!(shannon_gap(&axes, &|x| 2.0 * g(x), &g).is_err());
    }

    #[test]
    fn skew_scan_vanishes_at_even_member() {
        let nu = AsplundEndo::delta(2).unwrap();
        let s = equality_margin_scan(CheckId::CHAIN_RIGHT, &ScanFamily::GaussianSkew { n: 2 }, &[0.0, 0.5, 2.0], None, Some(&nu)).unwrap();
        assert!(s.rows[0].rel_margin.abs() < 1e-3, "{:?}", s.rows[0]);
        assert!(s.rows[2].rel_margin > 1e-2);
        assert!(s.monotone);
    }

    #[test]
    fn divergent_gaussian_width_passes_trivially() {
        // e^{-‖x‖_K} has h = 0 on K° and +∞ outside.
        let f = LogConcaveFn::norm_power(&Body::cube(2).unwrap(), 1.0).unwrap();
        let r = check_functional(CheckId::FUNC_URYSOHN, &f, None, FunctionalOptions::default()).unwrap();
        assert_eq!(r.rhs, f64::INFINITY);
        assert!(r.pass);
    }

    #[test]
    fn csv_and_json_roundtrip() {
        let mut r = InequalityReport::new("BS", 3, "cube", "", 1.5, 2.0, 1e-3);
        r.seed = Some(7);
        let divergent = InequalityReport::new("FUNC_URYSOHN", 2, "e^-|x|", "", 1.0, f64::INFINITY, 1e-2);
        assert!(divergent.pass && divergent.rel_margin == f64::INFINITY);
        let reports = vec![r.clone(), InequalityReport::new("THM4", 2, "g", "mu=nu", 1.0, 1.0, 1e-2), divergent];
        let mut buf = Vec::new();
        write_reports_csv(&mut buf, &reports).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,n,subject,params,lhs,rhs,margin,rel_margin,tol,pass,grid,seed,millis"));
        assert_eq!(read_reports_csv(&buf[..]).unwrap(), reports);
        let mut buf = Vec::new();
        write_reports_json(&mut buf, &reports).unwrap();
        assert_eq!(read_reports_json(&buf[..]).unwrap(), reports);
    }
}
