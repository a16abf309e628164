//! Spec strings for bodies and log-concave functions.

use anyhow::{anyhow, bail, Context, Result};
use blaschke::counterexample::{kc_body, lc_body};
use blaschke::inequalities::random_gaussian;
use blaschke::{Body, LogConcaveFn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Vertex count of `random-polytope` when `k` is not given.
pub const DEFAULT_POLYTOPE_POINTS: usize = 20;

type Params<'a> = Vec<(&'a str, Vec<f64>)>;

/// `name[:key=v1,v2][:...]` split into the name and its parameters.
fn split_spec(spec: &str) -> Result<(&str, Params<'_>)> {
    let mut parts = spec.split(':');
    let name = parts.next().unwrap_or_default().trim();
    let mut params = Vec::new();
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| anyhow!("expected key=value after {name:?} in {spec:?}, got {p:?}"))?;
        params.push((k.trim(), crate::config::parse_list(v)?));
    }
    Ok((name, params))
}

fn scalar(params: &[(&str, Vec<f64>)], key: &str, default: f64) -> Result<f64> {
    match params.iter().find(|(k, _)| *k == key) {
        None => Ok(default),
        Some((_, v)) if v.len() == 1 => Ok(v[0]),
        Some(_) => bail!("{key} takes a single value"),
    }
}

/// Whether `spec` depends on the seed.
pub fn body_is_random(spec: &str) -> bool {
    spec.starts_with("random-polytope")
}

pub fn parse_body(spec: &str, n: usize, seed: u64) -> Result<Body> {
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading body file {path}"))?;
        let body = Body::from_json(&text)?;
        if body.dim() != n {
            bail!("body file {path} has dimension {}, expected {n}", body.dim());
        }
        return Ok(body);
    }
    let (name, params) = split_spec(spec)?;
    let known: &[&str] = match name {
        "ball" => &["r"],
        "ellipsoid" => &["axes"],
        "random-polytope" => &["k"],
        "Kc" | "Lc" => &["c"],
        _ => &[],
    };
    if let Some((k, _)) = params.iter().find(|(k, _)| !known.contains(k)) {
        bail!("unknown parameter {k:?} for body {name:?}");
    }
    let body = match name {
        "ball" => Body::ball(n, scalar(&params, "r", 1.0)?)?,
        "cube" => Body::cube(n)?,
        "simplex" => Body::simplex(n)?,
        "ellipsoid" => {
            let axes = params.iter().find(|(k, _)| *k == "axes").map(|(_, v)| v.clone()).ok_or_else(|| anyhow!("ellipsoid needs axes="))?;
            if axes.len() != n {
                bail!("ellipsoid has {} axes, expected {n}", axes.len());
            }
            Body::ellipsoid(&axes)?
        }
        "random-polytope" => {
            let k = scalar(&params, "k", DEFAULT_POLYTOPE_POINTS as f64)?;
            if k.fract() != 0.0 || k < 1.0 {
                bail!("random-polytope k must be a positive integer, got {k}");
            }
            Body::random_polytope(n, k as usize, seed)?
        }
        "Kc" => {
            if n != 2 {
                bail!("Kc lives in dimension 2, got --dim {n}");
            }
            kc_body(scalar(&params, "c", 0.5)?)?
        }
        "Lc" => lc_body(scalar(&params, "c", 0.5)?, n)?,
        other => bail!("unknown body {other:?}"),
    };
    Ok(body)
}

pub fn function_is_random(spec: &str) -> bool {
    spec == "random-gaussian"
}

/// `random-gaussian` draws from the seed; every other spec is handled by the core parser.
pub fn parse_function(spec: &str, n: usize, seed: u64, grid: Option<usize>) -> Result<LogConcaveFn> {
    let f = if function_is_random(spec) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_gaussian(n, &mut rng)?.with_label(format!("random-gaussian(seed={seed})"))
    } else {
        LogConcaveFn::from_spec(spec, n)?
    };
    Ok(match grid {
        Some(count) => f.with_counts(count),
        None => f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bodies_parse() {
        assert_eq!(parse_body("ball:r=2", 3, 0).unwrap().support(&[1.0, 0.0, 0.0]), 2.0);
        assert_eq!(parse_body("cube", 2, 0).unwrap().vertices().unwrap().len(), 4);
        let e = parse_body("ellipsoid:axes=1,2,3", 3, 0).unwrap();
        assert_eq!(e.support(&[0.0, 0.0, 1.0]), 3.0);
        let a = parse_body("random-polytope:k=10", 3, 7).unwrap();
        let b = parse_body("random-polytope:k=10", 3, 7).unwrap();
        assert_eq!(a.vertices(), b.vertices());
        assert_ne!(a.vertices(), parse_body("random-polytope:k=10", 3, 8).unwrap().vertices());
        assert!(parse_body("Kc", 3, 0).is_err());
        assert!(parse_body("ellipsoid:axes=1,2", 3, 0).is_err());
        assert!(parse_body("ball:radius=2", 3, 0).is_err());
        assert!(parse_body("dodecahedron", 3, 0).is_err());
    }

    #[test]
    fn functions_parse() {
        let g = parse_function("gaussian", 2, 0, None).unwrap();
        assert_eq!(g.dim(), 2);
        let r = parse_function("random-gaussian", 2, 3, Some(41)).unwrap();
        assert_eq!(r.primal_axes()[0].count, 41);
        assert!(r.label().contains("seed=3"));
    }
}
