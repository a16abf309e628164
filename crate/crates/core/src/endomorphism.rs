//! Minkowski endomorphisms `h(ΦK, ·) = h(K, ·) ∗ μ` for centred zonal measures `μ`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bodies::{self, central_symmetral, Body};
use crate::error::{check_dim, Error, Result};
use crate::sphere::{self, SphereQuadrature};
use crate::zonal::ZonalMeasure;

/// Number of random `(x, y)` pairs in the sublinearity spot check.
pub const SUBLINEARITY_TRIALS: usize = 1000;
/// Tolerated excess `h(x+y) − h(x) − h(y)`, relative to the largest sampled support value.
pub const SUBLINEARITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndoKind {
    /// `Φ_σ K = (w(K)/2) Bⁿ`.
    Sigma,
    /// Central symmetral `ΔK = ½(K − K)`.
    Delta,
    /// Even measure on the equator of `ē`.
    Pi1,
    /// `JK = K − s(K)`, weakly monotone.
    J,
    General,
}

#[derive(Clone, Debug)]
pub struct MinkowskiEndo {
    mu: ZonalMeasure,
    kind: EndoKind,
    label: String,
}

impl MinkowskiEndo {
    /// Endomorphism generated by `mu`, which must be centred.
    pub fn new(mu: ZonalMeasure, label: &str) -> Result<Self> {
        Self::with_kind(mu, EndoKind::General, label)
    }

    fn with_kind(mu: ZonalMeasure, kind: EndoKind, label: &str) -> Result<Self> {
        if !mu.is_centered() {
            return Err(Error::InvalidParameter(format!(
                "generating measure must be centred, barycenter = {:e}",
                mu.barycenter()
            )));
        }
        Ok(MinkowskiEndo { mu, kind, label: label.to_string() })
    }

    pub fn sigma(n: usize) -> Result<Self> {
        Self::with_kind(ZonalMeasure::sigma(n), EndoKind::Sigma, "sigma")
    }

    pub fn delta(n: usize) -> Result<Self> {
        Self::with_kind(ZonalMeasure::nu(n), EndoKind::Delta, "delta")
    }

    pub fn pi1(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("pi1 needs n >= 3, got {n}")));
        }
        Self::with_kind(ZonalMeasure::equator(n), EndoKind::Pi1, "pi1")
    }

    pub fn j(n: usize) -> Result<Self> {
        Self::with_kind(ZonalMeasure::j_measure(n), EndoKind::J, "J")
    }

    /// Parses `"sigma" | "delta" | "pi1" | "J" | "file:<path.json>"`.
    pub fn from_spec(spec: &str, n: usize) -> Result<Self> {
        match spec {
            "sigma" => Self::sigma(n),
            "delta" => Self::delta(n),
            "pi1" => Self::pi1(n),
            "J" | "j" => Self::j(n),
            s if s.starts_with("file:") => {
                let path = &s[5..];
                let mu = ZonalMeasure::from_json(&std::fs::read_to_string(path)?)?;
                check_dim(n, mu.dim())?;
                Self::new(mu, s)
            }
            other => Err(Error::Parse(format!("unknown endomorphism {other}"))),
        }
    }

    pub fn mu(&self) -> &ZonalMeasure {
        &self.mu
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    pub fn kind(&self) -> EndoKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `ΦBⁿ = Bⁿ`, equivalently unit mass.
    pub fn is_normalized(&self) -> bool {
        (self.mu.mass() - 1.0).abs() <= 1e-10
    }

    pub fn is_monotone(&self) -> bool {
        self.mu.is_nonnegative()
    }

    /// Rescales `μ` to unit mass.
    pub fn normalize(&self) -> Result<Self> {
        let m = self.mu.mass();
        if !(m > 0.0) {
            return Err(Error::Degenerate(format!("cannot normalize an endomorphism of mass {m}")));
        }
        if self.is_normalized() {
            return Ok(self.clone());
        }
        Ok(MinkowskiEndo { mu: self.mu.scaled(1.0 / m), kind: self.kind, label: self.label.clone() })
    }

    /// `ΦK` through the generating measure: supports sampled on `quad`, exact pointwise
    /// convolution between nodes. Signed measures are spot-checked for sublinearity.
    pub fn apply(&self, k: &Body, quad: &Arc<SphereQuadrature>) -> Result<Body> {
        check_dim(self.dim(), k.dim())?;
        let out = bodies::convolved_body(k, &self.mu, quad, &format!("{}({})", self.label, k.label()))?;
        if !self.is_monotone() {
            check_sublinear(&out, quad)?;
        }
        Ok(out)
    }

    /// `ΦK` by its closed form where one exists (`Φ_σ`, `Δ`, `J`), else [`apply`](Self::apply).
    pub fn apply_exact(&self, k: &Body, quad: &Arc<SphereQuadrature>) -> Result<Body> {
        check_dim(self.dim(), k.dim())?;
        let m = self.mu.mass();
        match self.kind {
            EndoKind::Sigma => Body::ball(k.dim(), m * bodies::mean_width(k, quad)? / 2.0),
            EndoKind::Delta => {
                let d = central_symmetral(k)?;
                if (m - 1.0).abs() <= 1e-15 {
                    Ok(d)
                } else {
                    d.scale(m)
                }
            }
            EndoKind::J if (m - 1.0).abs() <= 1e-15 => {
                let s = bodies::steiner_point(k, quad)?;
                k.translate(&s.iter().map(|x| -x).collect::<Vec<_>>())
            }
            EndoKind::Pi1 if k.dim() == 3 && k.vertices().is_some() => {
                // Mean of h_K over the great circle u^⊥ is the projected perimeter over 2π.
                let vertices = k.vertices().expect("checked").to_vec();
                let h: bodies::SupportFn = Arc::new(move |x: &[f64]| {
                    let r = sphere::norm(x);
                    if r == 0.0 {
                        return 0.0;
                    }
                    m * r * bodies::projected_perimeter_3d(&vertices, &[x[0] / r, x[1] / r, x[2] / r])
                        / (2.0 * std::f64::consts::PI)
                });
                Ok(Body::from_support(3, h, &format!("{}({})", self.label, k.label())))
            }
            _ => self.apply(k, quad),
        }
    }

    /// `|Φ°K| = |(ΦK)°|`.
    pub fn polar_endo_volume(&self, k: &Body, quad: &Arc<SphereQuadrature>) -> Result<f64> {
        bodies::polar_volume(&self.apply_exact(k, quad)?, quad)
    }
}

/// Rejects `body` if `h(x+y) > h(x) + h(y)` beyond tolerance on random pairs.
pub fn check_sublinear(body: &Body, quad: &SphereQuadrature) -> Result<()> {
    let n = body.dim();
    let scale = body.support_at_nodes(quad).iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let threshold = SUBLINEARITY_TOL * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..SUBLINEARITY_TRIALS {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let excess = body.support(&xy) - body.support(&x) - body.support(&y);
        worst = worst.max(excess);
    }
    if worst > threshold {
        return Err(Error::NotSublinear { excess: worst, threshold });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{mean_width, steiner_point};
    use crate::sphere::{ball_volume, build_quadrature, dot};
    use crate::zonal::Density;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn q(n: usize, m: usize) -> Arc<SphereQuadrature> {
        Arc::new(build_quadrature(n, m).unwrap())
    }

    #[test]
    fn delta_routes_agree() {
        let quad = q(3, 12);
        let k = Body::random_polytope(3, 9, 4).unwrap();
        let d = MinkowskiEndo::delta(3).unwrap();
        let (a, b) = (d.apply(&k, &quad).unwrap(), d.apply_exact(&k, &quad).unwrap());
        let (ha, hb) = (a.support_at_nodes(&quad), b.support_at_nodes(&quad));
        for (x, y) in ha.iter().zip(&hb) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn sigma_gives_mean_width_ball() {
        let quad = q(3, 64);
        let k = Body::ellipsoid(&[1.0, 0.5, 2.0]).unwrap();
        let s = MinkowskiEndo::sigma(3).unwrap();
        let radius = mean_width(&k, &quad).unwrap() / 2.0;
        let h = s.apply(&k, &quad).unwrap().support_at_nodes(&quad);
        for v in &h {
            assert_relative_eq!(*v, radius, max_relative = 1e-6);
        }
        assert_relative_eq!(s.apply_exact(&k, &quad).unwrap().support(&[0.0, 1.0, 0.0]), radius);
    }

    #[test]
    fn j_routes_agree() {
        let quad = q(3, 16);
        let base = Body::ellipsoid(&[1.0, 0.6, 1.4]).unwrap().translate(&[0.3, -0.2, 0.5]).unwrap();
        let poly = Body::random_polytope(3, 14, 9).unwrap().translate(&[0.1, 0.2, -0.4]).unwrap();
        for (k, tol) in [(base, 1e-6), (poly, 1e-4)] {
            let j = MinkowskiEndo::j(3).unwrap();
            let measured = j.apply(&k, &quad).unwrap();
            let s = steiner_point(&k, &q(3, 128)).unwrap();
            for u in quad.nodes().step_by(7) {
                assert_relative_eq!(measured.support(u), k.support(u) - dot(&s, u), epsilon = tol);
            }
        }
    }

    #[test]
    fn weakly_monotone_signed_measure_rejected_when_not_sublinear() {
        let quad = q(3, 12);
        // Centred and signed; maps a segment to h = 2|u·ē| − 3/2, which is not sublinear.
        let mu = ZonalMeasure::signed(3, &[(1.0, 1.0), (-1.0, 1.0)], Some(Density::Uniform(-3.0))).unwrap();
        let phi = MinkowskiEndo::new(mu, "bad").unwrap();
        let seg = Body::segment(&[-1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(phi.apply(&seg, &quad), Err(Error::NotSublinear { .. })));
    }

    #[test]
    fn pi1_examples() {
        let quad = q(3, 16);
        let p = MinkowskiEndo::pi1(3).unwrap();
        let ball = p.apply(&Body::ball(3, 1.0).unwrap(), &quad).unwrap();
        for v in ball.support_at_nodes(&quad) {
            assert_relative_eq!(v, 1.0, epsilon = 1e-6);
        }
        // The equator average of a kinked support converges quadratically in the circle resolution.
        let fine = MinkowskiEndo::new(ZonalMeasure::equator(3).with_resolution(128), "pi1").unwrap();
        let cube = fine.apply(&Body::cube(3).unwrap(), &quad).unwrap();
        assert_relative_eq!(cube.support(&[0.0, 0.0, 1.0]), 4.0 / PI, max_relative = 1e-4);
        let seg = fine.apply(&Body::segment(&[-1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap(), &quad).unwrap();
        for u in quad.nodes().step_by(11) {
            let expected = 2.0 / PI * (1.0 - u[0] * u[0]).max(0.0).sqrt();
            assert_relative_eq!(seg.support(u), expected, epsilon = 1e-4);
        }
        assert!(MinkowskiEndo::pi1(2).is_err());
    }

    #[test]
    fn pi1_perimeter_route_matches_convolution() {
        let quad = q(3, 16);
        let fine = MinkowskiEndo::new(ZonalMeasure::equator(3).with_resolution(128), "pi1").unwrap();
        for k in [Body::cube(3).unwrap(), Body::random_polytope(3, 12, 4).unwrap(), Body::segment(&[-1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap()] {
            let exact = MinkowskiEndo::pi1(3).unwrap().apply_exact(&k, &quad).unwrap();
            let sampled = fine.apply(&k, &quad).unwrap();
            for u in quad.nodes().step_by(7) {
                assert_relative_eq!(exact.support(u), sampled.support(u), epsilon = 1e-4);
            }
        }
        assert_relative_eq!(MinkowskiEndo::pi1(3).unwrap().apply_exact(&Body::cube(3).unwrap(), &quad).unwrap().support(&[0.0, 0.0, 1.0]), 4.0 / PI, epsilon = 1e-14);
    }

    #[test]
    fn normalization() {
        let two_sigma = MinkowskiEndo::new(ZonalMeasure::sigma(3).scaled(2.0), "2sigma").unwrap();
        assert!(!two_sigma.is_normalized());
        let n = two_sigma.normalize().unwrap();
        assert_relative_eq!(n.mu().mass(), 1.0, epsilon = 1e-14);
        let nu = MinkowskiEndo::delta(3).unwrap();
        assert!(nu.is_normalized());
        assert_eq!(nu.normalize().unwrap().mu().atoms(), nu.mu().atoms());
        let zero = MinkowskiEndo::new(ZonalMeasure::sigma(3).scaled(0.0), "zero").unwrap();
        assert!(zero.normalize().is_err());

        let quad = q(3, 16);
        let mix = MinkowskiEndo::new(
            ZonalMeasure::nu(3).scaled(0.7).plus(&ZonalMeasure::equator(3).scaled(1.3)).unwrap(),
            "mix",
        )
        .unwrap()
        .normalize()
        .unwrap();
        // Smooth random bodies, so that the fixed rule integrates both sides accurately.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let axes: Vec<f64> = (0..3).map(|_| rng.random_range(0.3..2.0)).collect();
            let shift: Vec<f64> = (0..3).map(|_| rng.random_range(-0.5..0.5)).collect();
            let rot = crate::sphere::Rotation::random(3, &mut rng);
            let k = Body::ellipsoid(&axes).unwrap().linear_image(rot.matrix()).unwrap().translate(&shift).unwrap();
            let phik = mix.apply(&k, &quad).unwrap();
            assert_relative_eq!(mean_width(&phik, &quad).unwrap(), mean_width(&k, &quad).unwrap(), max_relative = 1e-8);
        }
    }

    #[test]
    fn polar_endo_volume_examples() {
        let quad = q(3, 32);
        let k = Body::random_polytope(3, 12, 2).unwrap();
        let s = MinkowskiEndo::sigma(3).unwrap();
        let w = mean_width(&k, &quad).unwrap();
        assert_relative_eq!(
            s.polar_endo_volume(&k, &quad).unwrap(),
            ball_volume(3) * (w / 2.0).powi(-3),
            max_relative = 1e-12
        );
        let e = Body::ellipsoid(&[1.0, 0.7, 1.5]).unwrap();
        let d = MinkowskiEndo::delta(3).unwrap();
        assert_relative_eq!(
            d.polar_endo_volume(&e, &quad).unwrap(),
            ball_volume(3).powi(2) / e.exact_volume().unwrap(),
            max_relative = 1e-6
        );
        let ball = Body::ball(3, 1.0).unwrap();
        for phi in [MinkowskiEndo::pi1(3).unwrap(), d, s] {
            assert_relative_eq!(phi.polar_endo_volume(&ball, &quad).unwrap(), ball_volume(3), max_relative = 1e-6);
        }
    }

    #[test]
    fn spec_strings() {
        assert_eq!(MinkowskiEndo::from_spec("J", 3).unwrap().kind(), EndoKind::J);
        assert_eq!(MinkowskiEndo::from_spec("delta", 2).unwrap().kind(), EndoKind::Delta);
        assert!(MinkowskiEndo::from_spec("pi2", 3).is_err());
        let uncentred = ZonalMeasure::from_atoms(3, &[(1.0, 1.0)]).unwrap();
        assert!(MinkowskiEndo::new(uncentred, "x").is_err());
    }
}
