//! Extended-real convex functions sampled on rectangular grids in dimensions 1 to 3.
//!
//! `+∞` is stored as `f64::INFINITY` and never takes part in envelopes; `−∞` and NaN
//! are rejected. A grid function is `+∞` outside its box.
//!
//! The Legendre transform is separable: conjugating one axis at a time with the
//! linear-time lower-hull sweep gives the exact discrete conjugate
//! `max_i s·x_i − φ(x_i)` over all grid nodes.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || count < 2 {
            return Err(Error::InvalidParameter(format!("axis needs lo < hi and count >= 2, got [{lo}, {hi}] x {count}")));
        }
        Ok(Axis { lo, hi, count })
    }

    /// Symmetric axis `[-r, r]`.
    pub fn symmetric(r: f64, count: usize) -> Result<Self> {
        Self::new(-r, r, count)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    /// Cell index and fractional offset of `x`, or `None` outside the axis.
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let h = self.spacing();
        let tol = 1e-12 * h;
        if x < self.lo - tol || x > self.hi + tol {
            return None;
        }
        let f = ((x - self.lo) / h).clamp(0.0, (self.count - 1) as f64);
        let i = (f.floor() as usize).min(self.count - 2);
        Some((i, f - i as f64))
    }
}

/// Values on a tensor grid, row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    axes: Vec<Axis>,
    values: Vec<f64>,
}

/// What a bounded dual box does with points whose supremum is not attained inside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// Report the supremum over the box (the input is `+∞` outside its box).
    Keep,
    /// Mark as `+∞` every node whose maximiser sits strictly on the box boundary.
    /// Used when the input is a restriction of a function defined beyond the box.
    Infinite,
}

fn shape_strides(axes: &[Axis]) -> Vec<usize> {
    let mut strides = vec![1; axes.len()];
    for d in (0..axes.len().saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * axes[d + 1].count;
    }
    strides
}

impl GridFunction {
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::Dimension { expected: 3, found: axes.len() });
        }
        let len: usize = axes.iter().map(|a| a.count).product();
        if values.len() != len {
            return Err(Error::InvalidParameter(format!("expected {len} values, got {}", values.len())));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidParameter("grid values must be real or +inf".into()));
        }
        if values.iter().all(|v| v.is_infinite()) {
            return Err(Error::Degenerate("grid function is identically +inf".into()));
        }
        Ok(GridFunction { axes, values })
    }

    pub fn from_fn(axes: Vec<Axis>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let len: usize = axes.iter().map(|a| a.count).product();
        let mut values = Vec::with_capacity(len);
        let mut x = vec![0.0; axes.len()];
        for idx in 0..len {
            Self::fill_node(&axes, idx, &mut x);
            values.push(f(&x));
        }
        Self::new(axes, values)
    }

    /// [`from_fn`](Self::from_fn) with nodes evaluated in parallel.
    pub fn from_fn_par(axes: Vec<Axis>, f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> Result<Self> {
        use rayon::prelude::*;
        let len: usize = axes.iter().map(|a| a.count).product();
        let values = (0..len)
            .into_par_iter()
            .map(|idx| {
                let mut x = vec![0.0; axes.len()];
                Self::fill_node(&axes, idx, &mut x);
                f(&x)
            })
            .collect();
        Self::new(axes, values)
    }

    /// Same axes on every coordinate.
    pub fn cube_grid(n: usize, axis: Axis, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::from_fn(vec![axis; n], f)
    }

    fn fill_node(axes: &[Axis], mut idx: usize, x: &mut [f64]) {
        for d in (0..axes.len()).rev() {
            let c = axes[d].count;
            x[d] = axes[d].node(idx % c);
            idx /= c;
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        Self::fill_node(&self.axes, idx, &mut x);
        x
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for d in (0..self.dim()).rev() {
            out[d] = idx % self.axes[d].count;
            idx /= self.axes[d].count;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.axes).fold(0, |acc, (i, a)| acc * a.count + i)
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing()).product()
    }

    /// Multilinear interpolation; `+∞` outside the box or next to an infinite node.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for d in 0..n {
            match self.axes[d].locate(x[d]) {
                Some((i, f)) => {
                    base[d] = i;
                    frac[d] = f;
                }
                None => return f64::INFINITY,
            }
        }
        let strides = shape_strides(&self.axes);
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = 0;
            for d in 0..n {
                let bit = corner >> d & 1;
                w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
                idx += (base[d] + bit) * strides[d];
            }
            if w == 0.0 {
                continue;
            }
            let v = self.values[idx];
            if v.is_infinite() {
                return f64::INFINITY;
            }
            acc += w * v;
        }
        acc
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Largest difference quotient between finite axis neighbours.
    pub fn lipschitz(&self) -> f64 {
        let strides = shape_strides(&self.axes);
        let mut lip: f64 = 0.0;
        for idx in 0..self.len() {
            let m = self.multi_index(idx);
            for d in 0..self.dim() {
                if m[d] + 1 < self.axes[d].count {
                    let (a, b) = (self.values[idx], self.values[idx + strides[d]]);
                    if a.is_finite() && b.is_finite() {
                        lip = lip.max((b - a).abs() / self.axes[d].spacing());
                    }
                }
            }
        }
        lip
    }

    /// Tolerance for grid equalities: `2 · (largest cell diagonal) · Lip(φ)`.
    pub fn slack(&self) -> f64 {
        let diag = self.axes.iter().map(|a| a.spacing().powi(2)).sum::<f64>().sqrt();
        2.0 * diag * self.lipschitz()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.axes.len() == other.axes.len()
            && self.axes.iter().zip(&other.axes).all(|(a, b)| {
                a.count == b.count && (a.lo - b.lo).abs() <= 1e-12 * a.spacing() && (a.hi - b.hi).abs() <= 1e-12 * a.spacing()
            })
    }

    /// Pointwise sum on a common grid (`∞ + x = ∞`).
    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        if !self.same_grid(other) {
            return Err(Error::InvalidParameter("grid functions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        GridFunction::new(self.axes.clone(), values)
    }

    pub fn map(&self, f: impl Fn(&[f64], f64) -> f64) -> Result<GridFunction> {
        let values = (0..self.len()).map(|i| f(&self.node(i), self.values[i])).collect();
        GridFunction::new(self.axes.clone(), values)
    }

    /// `x ↦ φ(−x)` by index reversal; exact on boxes symmetric about the origin.
    pub fn reflect(&self) -> Result<GridFunction> {
        if self.axes.iter().any(|a| (a.lo + a.hi).abs() > 1e-12 * a.spacing()) {
            return Err(Error::InvalidParameter("reflection needs a box symmetric about the origin".into()));
        }
        let values = (0..self.len())
            .map(|i| {
                let m: Vec<usize> = self.multi_index(i).iter().zip(&self.axes).map(|(j, a)| a.count - 1 - j).collect();
                self.values[self.flat_index(&m)]
            })
            .collect();
        GridFunction::new(self.axes.clone(), values)
    }

    /// Second differences along axes and face diagonals are `≥ −slack`, with
    /// `slack = 1e-9 · (local Lipschitz bound) · step`.
    pub fn is_discretely_convex(&self) -> bool {
        let n = self.dim();
        let mut dirs: Vec<Vec<isize>> = Vec::new();
        for i in 0..n {
            let mut e = vec![0isize; n];
            e[i] = 1;
            dirs.push(e);
            for j in i + 1..n {
                for sj in [1isize, -1] {
                    let mut e = vec![0isize; n];
                    e[i] = 1;
                    e[j] = sj;
                    dirs.push(e);
                }
            }
        }
        let lip = self.lipschitz().max(1.0);
        for idx in 0..self.len() {
            let c = self.values[idx];
            if c.is_infinite() {
                continue;
            }
            let m = self.multi_index(idx);
            for d in &dirs {
                let step = |sign: isize| -> Option<usize> {
                    let mm: Option<Vec<usize>> = m
                        .iter()
                        .zip(d)
                        .zip(&self.axes)
                        .map(|((&mi, &di), a)| {
                            let j = mi as isize + sign * di;
                            (j >= 0 && (j as usize) < a.count).then_some(j as usize)
                        })
                        .collect();
                    mm.map(|mm| self.flat_index(&mm))
                };
                if let (Some(a), Some(b)) = (step(-1), step(1)) {
                    let (fa, fb) = (self.values[a], self.values[b]);
                    if fa.is_finite() && fb.is_finite() {
                        let len: f64 = d.iter().zip(&self.axes).map(|(&k, ax)| (k as f64 * ax.spacing()).powi(2)).sum::<f64>().sqrt();
                        if fa + fb - 2.0 * c < -1e-9 * lip * len {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Exact discrete conjugate of one line: `out[j] = max_i s_j x_i − y_i` over finite `y_i`.
///
/// Returns values (−∞ if every `y_i` is infinite), the maximising input index, and
/// whether the maximum sits strictly on an end of the line.
fn conjugate_line(xa: &Axis, y: &[f64], sa: &Axis, out: &mut [f64], arg: &mut [usize], edge: &mut [bool]) {
    let n = y.len();
    let x = |i: usize| xa.node(i);
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        if y[i].is_infinite() {
            continue;
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b if it lies on or above the chord from a to i.
            if (y[b] - y[a]) * (x(i) - x(a)) >= (y[i] - y[a]) * (x(b) - x(a)) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    if hull.is_empty() {
        out.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
        return;
    }
    let mut k = 0;
    for j in 0..sa.count {
        let s = sa.node(j);
        while k + 1 < hull.len() && y[hull[k + 1]] - y[hull[k]] <= s * (x(hull[k + 1]) - x(hull[k])) {
            k += 1;
        }
        let i = hull[k];
        let v = s * x(i) - y[i];
        out[j] = v;
        arg[j] = i;
        let tol = 1e-10 * (1.0 + v.abs());
        let strictly = |other: Option<usize>| other.map_or(true, |o| v - (s * x(o) - y[o]) > tol);
        edge[j] = (i == 0 && strictly(hull.get(k + 1).copied()))
            || (i + 1 == n && strictly(k.checked_sub(1).map(|q| hull[q])));
    }
}

/// Conjugates axis `d` of a tensor (`sign` multiplies the input first).
fn transform_axis(
    values: &[f64],
    hits: &[bool],
    axes: &[Axis],
    d: usize,
    dual: Axis,
    sign: f64,
) -> (Vec<f64>, Vec<bool>, Vec<Axis>) {
    let mut out_axes = axes.to_vec();
    out_axes[d] = dual;
    let in_strides = shape_strides(axes);
    let out_strides = shape_strides(&out_axes);
    let n_in = axes[d].count;
    let n_out = dual.count;
    let lines: usize = axes.iter().enumerate().filter(|(e, _)| *e != d).map(|(_, a)| a.count).product();
    let out_len: usize = out_axes.iter().map(|a| a.count).product();
    let mut out = vec![0.0; out_len];
    let mut out_hits = vec![false; out_len];
    let (mut line, mut res, mut arg, mut edge) = (vec![0.0; n_in], vec![0.0; n_out], vec![0usize; n_out], vec![false; n_out]);
    let others: Vec<usize> = (0..axes.len()).filter(|e| *e != d).collect();
    for l in 0..lines {
        // Decompose the line number into indices of the other axes.
        let mut rem = l;
        let (mut base_in, mut base_out) = (0, 0);
        for &e in others.iter().rev() {
            let c = axes[e].count;
            let i = rem % c;
            rem /= c;
            base_in += i * in_strides[e];
            base_out += i * out_strides[e];
        }
        for i in 0..n_in {
            let v = values[base_in + i * in_strides[d]];
            line[i] = if v.is_infinite() { f64::INFINITY } else { sign * v };
            if sign < 0.0 && v == f64::NEG_INFINITY {
                line[i] = f64::INFINITY;
            }
        }
        conjugate_line(&axes[d], &line, &dual, &mut res, &mut arg, &mut edge);
        for j in 0..n_out {
            let o = base_out + j * out_strides[d];
            out[o] = res[j];
            out_hits[o] = res[j].is_finite() && (edge[j] || hits[base_in + arg[j] * in_strides[d]]);
        }
    }
    (out, out_hits, out_axes)
}

/// `Lφ(s) = max_x s·x − φ(x)` on the grid `dual`.
pub fn legendre_on(phi: &GridFunction, dual: &[Axis], truncation: Truncation) -> Result<GridFunction> {
    if dual.len() != phi.dim() {
        return Err(Error::Dimension { expected: phi.dim(), found: dual.len() });
    }
    let mut values = phi.values.clone();
    let mut hits = vec![false; values.len()];
    let mut axes = phi.axes.clone();
    for d in 0..phi.dim() {
        let sign = if d == 0 { 1.0 } else { -1.0 };
        let (v, h, a) = transform_axis(&values, &hits, &axes, d, dual[d], sign);
        values = v;
        hits = h;
        axes = a;
    }
    for (v, h) in values.iter_mut().zip(&hits) {
        if *v == f64::NEG_INFINITY || (truncation == Truncation::Infinite && *h) {
            *v = f64::INFINITY;
        }
    }
    GridFunction::new(axes, values)
}

/// Dual axes from the slope range of `φ`, padded by 10%. When `φ` has an
/// infinite node the conjugate grows beyond every slope, and the primal box
/// extents are included. Zero is made a node whenever it lies in range.
pub fn auto_dual_axes(phi: &GridFunction, oversample: usize) -> Vec<Axis> {
    let strides = shape_strides(&phi.axes);
    let bounded_domain = phi.values.iter().any(|v| v.is_infinite());
    (0..phi.dim())
        .map(|d| {
            let ax = phi.axes[d];
            let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
            for idx in 0..phi.len() {
                let m = phi.multi_index(idx);
                if m[d] + 1 < ax.count {
                    let (u, v) = (phi.values[idx], phi.values[idx + strides[d]]);
                    if u.is_finite() && v.is_finite() {
                        let s = (v - u) / ax.spacing();
                        a = a.min(s);
                        b = b.max(s);
                    }
                }
            }
            if !a.is_finite() {
                a = 0.0;
                b = 0.0;
            }
            let pad = 0.1 * (b - a).max(a.abs().max(b.abs())).max(1.0);
            a -= pad;
            b += pad;
            if bounded_domain {
                a = a.min(ax.lo);
                b = b.max(ax.hi);
            }
            zero_aligned(a, b, ax.count * oversample.max(1))
        })
        .collect()
}

fn zero_aligned(a: f64, b: f64, count: usize) -> Axis {
    let count = count.max(3);
    if a < 0.0 && b > 0.0 {
        let h = (b - a) / (count - 1) as f64;
        let lo = (a / h).floor() * h;
        let steps = ((b - lo) / h).ceil() as usize;
        Axis { lo, hi: lo + steps as f64 * h, count: steps + 1 }
    } else {
        Axis { lo: a, hi: b, count }
    }
}

/// Conjugate on an automatically chosen dual grid with as many nodes as the primal.
pub fn legendre(phi: &GridFunction) -> Result<GridFunction> {
    legendre_on(phi, &auto_dual_axes(phi, 1), Truncation::Keep)
}

fn dual_oversample(dim: usize) -> usize {
    match dim {
        1 => 1 << 16,
        2 => 4,
        _ => 1,
    }
}

fn check_same_spacing(phi: &GridFunction, psi: &GridFunction) -> Result<()> {
    if phi.dim() != psi.dim() {
        return Err(Error::Dimension { expected: phi.dim(), found: psi.dim() });
    }
    for (a, b) in phi.axes.iter().zip(&psi.axes) {
        if (a.spacing() - b.spacing()).abs() > 1e-12 * a.spacing() {
            return Err(Error::InvalidParameter(format!(
                "infimal convolution needs equal spacing, got {} and {}",
                a.spacing(),
                b.spacing()
            )));
        }
    }
    Ok(())
}

fn sum_axes(phi: &GridFunction, psi: &GridFunction) -> Vec<Axis> {
    phi.axes
        .iter()
        .zip(&psi.axes)
        .map(|(a, b)| Axis { lo: a.lo + b.lo, hi: a.hi + b.hi, count: a.count + b.count - 1 })
        .collect()
}

/// `(φ □ ψ)(x) = inf_{x₁+x₂=x} φ(x₁) + ψ(x₂)` as `L(Lφ + Lψ)` on the sum box.
///
/// Both grids need equal spacing per axis; the result has `n₁ + n₂ − 1` nodes per axis.
pub fn inf_convolution(phi: &GridFunction, psi: &GridFunction) -> Result<GridFunction> {
    check_same_spacing(phi, psi)?;
    let out_axes = sum_axes(phi, psi);
    let over = dual_oversample(phi.dim());
    let (da, db) = (auto_dual_axes(phi, 1), auto_dual_axes(psi, 1));
    let dual: Vec<Axis> = da
        .iter()
        .zip(&db)
        .zip(&out_axes)
        .map(|((a, b), o)| zero_aligned(a.lo.min(b.lo), a.hi.max(b.hi), o.count * over))
        .collect();
    let sum = legendre_on(phi, &dual, Truncation::Keep)?.add(&legendre_on(psi, &dual, Truncation::Keep)?)?;
    legendre_on(&sum, &out_axes, Truncation::Infinite)
}

/// Direct `O(N₁N₂)` discrete infimal convolution, `min_{i+j=k} φ_i + ψ_j`.
pub fn inf_convolution_direct(phi: &GridFunction, psi: &GridFunction) -> Result<GridFunction> {
    check_same_spacing(phi, psi)?;
    let out_axes = sum_axes(phi, psi);
    let out_len: usize = out_axes.iter().map(|a| a.count).product();
    let mut out = vec![f64::INFINITY; out_len];
    let probe = GridFunction { axes: out_axes.clone(), values: vec![0.0; out_len] };
    for i in 0..phi.len() {
        let (fi, mi) = (phi.values[i], phi.multi_index(i));
        if fi.is_infinite() {
            continue;
        }
        for j in 0..psi.len() {
            let gj = psi.values[j];
            if gj.is_infinite() {
                continue;
            }
            let mj = psi.multi_index(j);
            let m: Vec<usize> = mi.iter().zip(&mj).map(|(a, b)| a + b).collect();
            let k = probe.flat_index(&m);
            out[k] = out[k].min(fi + gj);
        }
    }
    GridFunction::new(out_axes, out)
}

/// Moreau envelope `e_t φ = φ □ ‖·‖²/(2t)` on the grid of `φ`, through
/// `(e_t φ)* = φ* + (t/2)‖·‖²`.
pub fn moreau(phi: &GridFunction, t: f64) -> Result<GridFunction> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("Moreau parameter must be positive, got {t}")));
    }
    let finite_everywhere = phi.values.iter().all(|v| v.is_finite());
    let over = dual_oversample(phi.dim());
    let slopes = auto_dual_axes(phi, 1);
    let dual: Vec<Axis> = phi
        .axes
        .iter()
        .zip(&slopes)
        .map(|(a, s)| {
            // Gradients of e_t φ are (x − prox x)/t, bounded by the box width over t.
            let w = (a.hi - a.lo) / t;
            let (lo, hi) = if finite_everywhere { (s.lo.max(-w), s.hi.min(w)) } else { (-w, w) };
            zero_aligned(lo, hi, a.count * over)
        })
        .collect();
    let conj = legendre_on(phi, &dual, Truncation::Keep)?;
    let shifted = conj.map(|s, v| v + 0.5 * t * s.iter().map(|x| x * x).sum::<f64>())?;
    legendre_on(&shifted, &phi.axes, Truncation::Keep)
}

/// Coercivity constants in `φ(x) ≥ γ‖x‖ + β`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coercivity {
    Coercive { gamma: f64, beta: f64 },
    /// `φ = +∞` on the whole boundary shell: coercive with any slope.
    BoundedDomain { beta: f64 },
    NotCoercive,
}

/// Fits γ as the smallest growth rate `(φ − φ_min)/‖x − x_min‖` over finite boundary-shell
/// nodes, then `β = min_x φ(x) − γ‖x‖`.
pub fn coercivity_margin(phi: &GridFunction) -> Coercivity {
    let xmin = phi.node(phi.argmin());
    let fmin = phi.min_value();
    let mut gamma = f64::INFINITY;
    for idx in 0..phi.len() {
        let m = phi.multi_index(idx);
        let on_shell = m.iter().zip(&phi.axes).any(|(i, a)| *i == 0 || *i + 1 == a.count);
        let v = phi.values[idx];
        if !on_shell || v.is_infinite() {
            continue;
        }
        let x = phi.node(idx);
        let dist = x.iter().zip(&xmin).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if dist > 0.0 {
            gamma = gamma.min((v - fmin) / dist);
        } else {
            gamma = 0.0;
        }
    }
    if gamma == f64::INFINITY {
        return Coercivity::BoundedDomain { beta: fmin };
    }
    if !(gamma > 1e-12 * (1.0 + fmin.abs())) {
        return Coercivity::NotCoercive;
    }
    let beta = (0..phi.len())
        .filter(|&i| phi.values[i].is_finite())
        .map(|i| phi.values[i] - gamma * phi.node(i).iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(f64::INFINITY, f64::min);
    Coercivity::Coercive { gamma, beta }
}

fn header(phi: &GridFunction) -> String {
    let boxes: Vec<String> = phi.axes.iter().map(|a| format!("{:e},{:e}", a.lo, a.hi)).collect();
    let counts: Vec<String> = phi.axes.iter().map(|a| a.count.to_string()).collect();
    format!("# dim={}\n# box={}\n# counts={}\n", phi.dim(), boxes.join(";"), counts.join(","))
}

impl GridFunction {
    /// CSV dump: three `#` header lines (dim, box, counts), then one value per line
    /// in row-major order; `inf` marks `+∞`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(header(self).as_bytes())?;
        for v in &self.values {
            if v.is_infinite() {
                writeln!(w, "inf")?;
            } else {
                writeln!(w, "{v:e}")?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut dim = None;
        let mut boxes: Vec<(f64, f64)> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let mut values = Vec::new();
        let bad = |s: &str| Error::Parse(format!("grid csv: {s}"));
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("dim=") {
                    dim = Some(v.parse::<usize>().map_err(|_| bad("dim"))?);
                } else if let Some(v) = rest.strip_prefix("box=") {
                    for part in v.split(';') {
                        let (a, b) = part.split_once(',').ok_or_else(|| bad("box"))?;
                        boxes.push((a.trim().parse().map_err(|_| bad("box"))?, b.trim().parse().map_err(|_| bad("box"))?));
                    }
                } else if let Some(v) = rest.strip_prefix("counts=") {
                    counts = v.split(',').map(|c| c.trim().parse().map_err(|_| bad("counts"))).collect::<Result<_>>()?;
                }
                continue;
            }
            let v = if line == "inf" { f64::INFINITY } else { line.parse().map_err(|_| bad(line))? };
            values.push(v);
        }
        let dim = dim.ok_or_else(|| bad("missing dim"))?;
        if boxes.len() != dim || counts.len() != dim {
            return Err(bad("header does not match dim"));
        }
        let axes = boxes.iter().zip(&counts).map(|(b, c)| Axis::new(b.0, b.1, *c)).collect::<Result<_>>()?;
        GridFunction::new(axes, values)
    }

    /// Binary dump: `b"BLGF"`, `u32` dim, per axis `f64 lo, f64 hi, u64 count`, then the
    /// `f64` values, all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"BLGF")?;
        w.write_all(&(self.dim() as u32).to_le_bytes())?;
        for a in &self.axes {
            w.write_all(&a.lo.to_le_bytes())?;
            w.write_all(&a.hi.to_le_bytes())?;
            w.write_all(&(a.count as u64).to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"BLGF" {
            return Err(Error::Parse("not a binary grid dump".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let dim = u32::from_le_bytes(b4) as usize;
        if !(1..=3).contains(&dim) {
            return Err(Error::Parse(format!("grid dim {dim} out of range")));
        }
        let mut axes = Vec::with_capacity(dim);
        for _ in 0..dim {
            r.read_exact(&mut b8)?;
            let lo = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            let hi = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            axes.push(Axis::new(lo, hi, u64::from_le_bytes(b8) as usize)?);
        }
        let len: usize = axes.iter().map(|a: &Axis| a.count).product();
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        GridFunction::new(axes, values)
    }

    /// Reads a dump, choosing the format from the leading magic bytes.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(b"BLGF") {
            Self::read_binary(&bytes[..])
        } else {
            Self::read_csv(&bytes[..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sq(x: &[f64]) -> f64 {
        0.5 * x.iter().map(|v| v * v).sum::<f64>()
    }

    #[test]
    fn quadratic_is_self_conjugate() {
        for n in [1usize, 2] {
            let phi = GridFunction::cube_grid(n, Axis::symmetric(5.0, 101).unwrap(), sq).unwrap();
            let l = legendre(&phi).unwrap();
            let h = phi.axes()[0].spacing();
            for i in 0..l.len() {
                let s = l.node(i);
                if s.iter().all(|x| x.abs() <= 4.5) {
                    // Discrete conjugate error is at most h²/8 per coordinate.
                    assert!((l.values()[i] - sq(&s)).abs() <= n as f64 * h * h / 8.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn indicator_conjugate_is_support_function() {
        let phi = GridFunction::cube_grid(2, Axis::symmetric(2.0, 41).unwrap(), |x| {
            if x.iter().all(|v| v.abs() <= 1.0 + 1e-12) {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        let h = legendre(&phi).unwrap();
        for i in 0..h.len() {
            let s = h.node(i);
            assert_relative_eq!(h.values()[i], s[0].abs() + s[1].abs(), epsilon = 1e-12);
        }
    }

    #[test]
    fn norm_power_conjugate() {
        let (p, q) = (3.0, 1.5);
        let phi = GridFunction::cube_grid(2, Axis::symmetric(2.0, 201).unwrap(), |x| {
            x.iter().map(|v| v * v).sum::<f64>().sqrt().powf(p) / p
        })
        .unwrap();
        let l = legendre(&phi).unwrap();
        let slack = phi.slack();
        for i in 0..l.len() {
            let s = l.node(i);
            let r = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r <= 3.0 {
                assert!((l.values()[i] - r.powf(q) / q).abs() <= slack, "{} {}", l.values()[i], r.powf(q) / q);
            }
        }
    }

    #[test]
    fn infimal_convolution_matches_direct() {
        let a = Axis::symmetric(5.0, 64).unwrap();
        let phi = GridFunction::from_fn(vec![a], sq).unwrap();
        let psi = GridFunction::from_fn(vec![a], |x| (x[0] - 0.7).abs() + 0.1 * x[0] * x[0]).unwrap();
        for (f, g) in [(&phi, &phi), (&phi, &psi), (&psi, &psi)] {
            let via = inf_convolution(f, g).unwrap();
            let direct = inf_convolution_direct(f, g).unwrap();
            for (x, y) in via.values().iter().zip(direct.values()) {
                assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
            }
        }
        // ½x² □ ½x² = x²/4 up to discretisation.
        let q = inf_convolution(&phi, &phi).unwrap();
        let h = a.spacing();
        for i in 0..q.len() {
            let x = q.node(i)[0];
            assert!((q.values()[i] - x * x / 4.0).abs() <= h * h / 4.0 + 1e-9);
        }
    }

    #[test]
    fn infimal_convolution_of_indicators_and_points() {
        let a = Axis::symmetric(2.0, 41).unwrap();
        let ind = |r: f64| {
            move |x: &[f64]| if x.iter().all(|v| v.abs() <= r + 1e-12) { 0.0 } else { f64::INFINITY }
        };
        let k = GridFunction::cube_grid(2, a, ind(1.0)).unwrap();
        let l = GridFunction::cube_grid(2, a, ind(0.5)).unwrap();
        let kl = inf_convolution(&k, &l).unwrap();
        let direct = inf_convolution_direct(&k, &l).unwrap();
        for i in 0..kl.len() {
            let x = kl.node(i);
            let inside = x.iter().all(|v| v.abs() <= 1.5 + 1e-9);
            assert_eq!(kl.values()[i].is_finite(), inside, "{x:?}");
            assert_eq!(direct.values()[i].is_finite(), inside);
            if inside {
                assert!(kl.values()[i].abs() < 1e-9);
            }
        }
        // φ □ ι_{y} is φ translated by y.
        let a1 = Axis::symmetric(3.0, 61).unwrap();
        let phi = GridFunction::from_fn(vec![a1], |x| (x[0] - 0.2).powi(2)).unwrap();
        let y = 0.5;
        let point = GridFunction::from_fn(vec![a1], |x| if (x[0] - y).abs() < 1e-9 { 0.0 } else { f64::INFINITY }).unwrap();
        let t = inf_convolution(&phi, &point).unwrap();
        for i in 0..t.len() {
            let x = t.node(i)[0];
            let expected = phi.eval(&[x - y]);
            if expected.is_finite() {
                assert!((t.values()[i] - expected).abs() < 1e-6, "{x}: {} vs {expected}", t.values()[i]);
            } else {
                assert!(t.values()[i].is_infinite());
            }
        }
    }

    #[test]
    fn moreau_examples() {
        let a = Axis::symmetric(5.0, 201).unwrap();
        let phi = GridFunction::from_fn(vec![a], sq).unwrap();
        let t = 0.5;
        let e = moreau(&phi, t).unwrap();
        let slack = phi.slack();
        for i in 0..e.len() {
            let x = e.node(i)[0];
            assert!((e.values()[i] - x * x / (2.0 * (1.0 + t))).abs() <= slack);
            assert!(e.values()[i] <= phi.values()[i] + 1e-9);
        }
        let b = Axis::symmetric(3.0, 121).unwrap();
        let ind = GridFunction::from_fn(vec![b], |x| if x[0].abs() <= 1.0 + 1e-12 { 0.0 } else { f64::INFINITY }).unwrap();
        for t in [0.1, 0.5] {
            let e = moreau(&ind, t).unwrap();
            for i in 0..e.len() {
                let x = e.node(i)[0];
                let d = (x.abs() - 1.0).max(0.0);
                assert!(e.values()[i].is_finite());
                assert!((e.values()[i] - d * d / (2.0 * t)).abs() <= 1e-6, "{x}");
            }
        }
        assert!(moreau(&phi, 0.0).is_err());
    }

    #[test]
    fn moreau_is_monotone_in_t() {
        let a = Axis::symmetric(2.0, 81).unwrap();
        let phi = GridFunction::from_fn(vec![a], |x| (x[0] - 0.3).abs() + x[0].powi(4)).unwrap();
        let (e1, e5) = (moreau(&phi, 0.1).unwrap(), moreau(&phi, 0.5).unwrap());
        for (a, b) in e1.values().iter().zip(e5.values()) {
            assert!(a + 1e-9 >= *b);
        }
    }

    #[test]
    fn coercivity_examples() {
        let a = Axis::symmetric(5.0, 101).unwrap();
        let norm = GridFunction::cube_grid(2, a, |x| x.iter().map(|v| v * v).sum::<f64>().sqrt()).unwrap();
        match coercivity_margin(&norm) {
            Coercivity::Coercive { gamma, .. } => assert_relative_eq!(gamma, 1.0, epsilon = 1e-9),
            other => panic!("{other:?}"),
        }
        let q = GridFunction::from_fn(vec![a], sq).unwrap();
        match coercivity_margin(&q) {
            Coercivity::Coercive { gamma, beta } => {
                assert_relative_eq!(gamma, 2.5, epsilon = 1e-9);
                for i in 0..q.len() {
                    assert!(q.values()[i] >= gamma * q.node(i)[0].abs() + beta - 1e-12);
                }
            }
            other => panic!("{other:?}"),
        }
        let zero = GridFunction::from_fn(vec![a], |_| 0.0).unwrap();
        assert_eq!(coercivity_margin(&zero), Coercivity::NotCoercive);
        let ind = GridFunction::from_fn(vec![a], |x| if x[0].abs() < 1.0 { 0.0 } else { f64::INFINITY }).unwrap();
        assert!(matches!(coercivity_margin(&ind), Coercivity::BoundedDomain { .. }));
    }

    #[test]
    fn rejects_improper_input() {
        let a = Axis::symmetric(1.0, 5).unwrap();
        assert!(GridFunction::from_fn(vec![a], |_| f64::INFINITY).is_err());
        assert!(GridFunction::from_fn(vec![a], |_| f64::NEG_INFINITY).is_err());
        assert!(GridFunction::from_fn(vec![a; 4], |_| 0.0).is_err());
    }

    #[test]
    fn dumps_roundtrip() {
        let phi = GridFunction::cube_grid(2, Axis::new(-1.0, 2.0, 7).unwrap(), |x| {
            if x[0] > 1.5 {
                f64::INFINITY
            } else {
                x[0] * 0.3 - x[1].powi(2) * 0.1 + 1.0 / 3.0
            }
        })
        .unwrap();
        let mut csv = Vec::new();
        phi.write_csv(&mut csv).unwrap();
        assert_eq!(GridFunction::read_csv(&csv[..]).unwrap(), phi);
        let mut bin = Vec::new();
        phi.write_binary(&mut bin).unwrap();
        assert_eq!(GridFunction::read_binary(&bin[..]).unwrap(), phi);
    }

    #[test]
    fn reflection_and_convexity_flags() {
        let a = Axis::symmetric(1.0, 9).unwrap();
        let phi = GridFunction::cube_grid(2, a, |x| (x[0] - 0.25).powi(2) + x[1].abs()).unwrap();
        let r = phi.reflect().unwrap();
        assert_relative_eq!(r.eval(&[0.5, -0.25]), phi.eval(&[-0.5, 0.25]), epsilon = 1e-14);
        assert!(phi.is_discretely_convex());
        let wavy = GridFunction::cube_grid(1, a, |x| (4.0 * x[0]).sin()).unwrap();
        assert!(!wavy.is_discretely_convex());
    }
}
