//! The family showing that `|K||J°K|` is unbounded for `JK = K − s(K)`:
//! triangles `K_c = conv{(c,0), (0,1/c), (0,−1/c)}` and their bodies of
//! revolution `L_c ⊂ R^n` about `ē = e_1`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::bodies::{self, Body};
use crate::endomorphism::MinkowskiEndo;
use crate::error::{Error, Result};
use crate::quad1d;
use crate::sphere::{ball_volume, build_quadrature, sphere_measure};
use crate::zonal::DEFAULT_RESOLUTION;

/// Smallest `c` accepted by sweeps; below it `h_min` near the Steiner point is too small.
pub const SWEEP_MIN_C: f64 = 1e-3;

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    Ok(())
}

fn check_t(c: f64, t: f64) -> Result<()> {
    check_c(c)?;
    if !(t > 0.0 && t < c) {
        return Err(Error::InvalidParameter(format!("translation t must lie in (0, c) = (0, {c}), got {t}")));
    }
    Ok(())
}

/// `K_c`, a triangle of unit area.
pub fn kc_body(c: f64) -> Result<Body> {
    check_c(c)?;
    let b = Body::polytope(vec![vec![c, 0.0], vec![0.0, 1.0 / c], vec![0.0, -1.0 / c]])?;
    Ok(b.with_label(format!("K_{c}")))
}

/// `L_c`: `h(L_c, u) = h(K_c, (u·e_1, |u'|))`.
pub fn lc_body(c: f64, n: usize) -> Result<Body> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("L_c needs n >= 3, got {n}")));
    }
    Ok(Body::revolution(n, kc_body(c)?)?.with_label(format!("L_{c}")))
}

/// `|(K_c − (t,0))°| = c³ / (t (c−t)²)`.
pub fn kc_polar_translated_volume(c: f64, t: f64) -> Result<f64> {
    check_t(c, t)?;
    Ok(c.powi(3) / (t * (c - t).powi(2)))
}

/// Exact vertices of `(K_c − (t,0))°`.
pub fn kc_polar_vertices(c: f64, t: f64) -> Result<[[f64; 2]; 3]> {
    check_t(c, t)?;
    Ok([[1.0 / (c - t), c * c / (c - t)], [1.0 / (c - t), -c * c / (c - t)], [-1.0 / t, 0.0]])
}

/// `|K_c||(K_c − s(K_c))°| = π / (a (1 − a/π)²)` with `a = arctan c²`.
pub fn kc_volume_product(c: f64) -> Result<f64> {
    check_c(c)?;
    let a = (c * c).atan();
    Ok(PI / (a * (1.0 - a / PI).powi(2)))
}

/// `s(K_c)·e_1 = (c/π) arctan c²`.
pub fn kc_steiner(c: f64) -> Result<f64> {
    check_c(c)?;
    Ok(c / PI * (c * c).atan())
}

/// `|L_c| = |B^{n−1}| / (n c^{n−2})`.
pub fn lc_volume(c: f64, n: usize) -> Result<f64> {
    check_c(c)?;
    check_n(n)?;
    Ok(ball_volume(n - 1) / (n as f64 * c.powi(n as i32 - 2)))
}

/// `|(L_c − t e_1)°| = (|B^{n−1}|/n) c^{2n−1} / (t (c−t)^n)`.
pub fn lc_polar_translated_volume(c: f64, t: f64, n: usize) -> Result<f64> {
    check_t(c, t)?;
    check_n(n)?;
    Ok(ball_volume(n - 1) / n as f64 * c.powi(2 * n as i32 - 1) / (t * (c - t).powi(n as i32)))
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("L_c needs n >= 3, got {n}")));
    }
    Ok(())
}

/// `g(c)` with `s(L_c)·e_1 = c g(c)`:
///
/// `g(c) = (|S^{n−2}|/|B^n|) (−c^{2n−2} / (n (1+c⁴)^{n/2}) + ∫_{a}^{1} ζ² (1−ζ²)^{(n−3)/2} dζ)`,
/// `a = (1+c⁴)^{−1/2}`. The first term integrates `h = |u'|/c` below the kink
/// at `ζ = a`; above it `h = c ζ`. For `n = 3` this is `½(1 − a)`; for `n = 2`
/// it reduces to `arctan(c²)/π`.
pub fn steiner_g(c: f64, n: usize) -> Result<f64> {
    check_c(c)?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("steiner_g needs n >= 2, got {n}")));
    }
    let q = 1.0 + c.powi(4);
    let a = q.powf(-0.5);
    if n == 3 {
        return Ok(0.5 * (1.0 - a));
    }
    let nf = n as f64;
    let head = -c.powi(2 * n as i32 - 2) / (nf * q.powf(nf / 2.0));
    // ζ = cos φ removes the endpoint singularity at ζ = 1 for n = 2.
    let mut f = |phi: f64| {
        let (s, z) = phi.sin_cos();
        z * z * s.powi(n as i32 - 2)
    };
    let tail = quad1d::integrate(&mut f, 0.0, a.acos(), &[], 1e-14);
    Ok(sphere_measure(n - 1) / ball_volume(n) * (head + tail))
}

/// `|L_c||(L_c − c g e_1)°| = (|B^{n−1}|/n)² / (g (1−g)^n)`; for `n = 2` the `K_c` product.
pub fn lc_volume_product(c: f64, n: usize) -> Result<f64> {
    if n == 2 {
        return kc_volume_product(c);
    }
    check_n(n)?;
    let g = steiner_g(c, n)?;
    Ok((ball_volume(n - 1) / n as f64).powi(2) / (g * (1.0 - g).powi(n as i32)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub c: f64,
    pub closed_form: f64,
    pub pipeline: f64,
    pub ratio: f64,
}

/// Closed-form and pipeline volume products for `K_c` (n = 2) or `L_c` (n ≥ 3).
///
/// The pipeline builds the body, applies `J` and takes `|K| |(JK)°|` with the
/// general `volume` and `polar_volume` routines.
pub fn divergence_sweep(n: usize, cs: &[f64]) -> Result<Vec<SweepRow>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("sweep needs n >= 2, got {n}")));
    }
    if let Some(c) = cs.iter().find(|c| !(**c >= SWEEP_MIN_C)) {
        return Err(Error::InvalidParameter(format!(
            "c = {c} is below the sweep floor {SWEEP_MIN_C}: the polar volume is ill-conditioned there"
        )));
    }
    let quad = std::sync::Arc::new(build_quadrature(n, DEFAULT_RESOLUTION)?);
    let j = MinkowskiEndo::j(n)?;
    cs.iter()
        .map(|&c| {
            let k = if n == 2 { kc_body(c)? } else { lc_body(c, n)? };
            let closed_form = lc_volume_product(c, n)?;
            let jk = j.apply_exact(&k, &quad)?;
            let pipeline = bodies::volume(&k, &quad)? * bodies::polar_volume(&jk, &quad)?;
            Ok(SweepRow { n, c, closed_form, pipeline, ratio: pipeline / closed_form })
        })
        .collect()
}
