//! The product-integral engine: refinement over tagged partitions, exact jump
//! handling, and the companion identities with runtime certificates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{re, C64, CMat};

use super::spec::{IntegratorSpec, KernelSpec, MatJson};

/// Partition of an interval with one tag per cell.
#[derive(Clone, Debug)]
pub struct TaggedPartition {
    points: Vec<f64>,
    tags: Vec<f64>,
}

impl TaggedPartition {
    pub fn new(points: Vec<f64>, tags: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPartition("need at least two points".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(
                "points must be strictly increasing".into(),
            ));
        }
        if tags.len() != points.len() - 1 {
            return Err(Error::InvalidPartition(format!(
                "expected {} tags, got {}",
                points.len() - 1,
                tags.len()
            )));
        }
        for (i, &xi) in tags.iter().enumerate() {
            if xi < points[i] || xi > points[i + 1] {
                return Err(Error::InvalidPartition(format!(
                    "tag {} outside cell [{}, {}]",
                    xi,
                    points[i],
                    points[i + 1]
                )));
            }
        }
        Ok(TaggedPartition { points, tags })
    }

    /// Uniform partition with midpoint tags.
    pub fn uniform(a: f64, b: f64, cells: usize) -> Result<Self> {
        if !(a < b) || cells == 0 {
            return Err(Error::InvalidPartition(format!(
                "bad uniform partition [{a}, {b}] with {cells} cells"
            )));
        }
        let h = (b - a) / cells as f64;
        let points: Vec<f64> = (0..=cells).map(|k| a + h * k as f64).collect();
        let tags: Vec<f64> = (0..cells).map(|k| a + h * (k as f64 + 0.5)).collect();
        Self::new(points, tags)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn tags(&self) -> &[f64] {
        &self.tags
    }

    pub fn mesh(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// Value of a product integral together with the work done and an a
/// posteriori error certificate (twice the last refinement difference; zero
/// for exactly computed pure-jump products).
#[derive(Clone, Debug)]
pub struct ProdIntResult {
    pub value: CMat,
    pub partitions_used: usize,
    pub error_certificate: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProdIntResultJson {
    pub value: MatJson,
    pub partitions_used: usize,
    pub error_certificate: f64,
}

impl ProdIntResult {
    pub fn to_json(&self) -> ProdIntResultJson {
        ProdIntResultJson {
            value: MatJson::from_cmat(&self.value),
            partitions_used: self.partitions_used,
            error_certificate: self.error_certificate,
        }
    }
}

// ---------------------------------------------------------------------------
// Internal views
// ---------------------------------------------------------------------------

struct KernelView<'a> {
    f: Box<dyn Fn(f64) -> C64 + 'a>,
    forced: Vec<f64>,
}

impl<'a> KernelView<'a> {
    fn from_spec(k: &'a KernelSpec) -> Self {
        KernelView {
            f: Box::new(move |t| k.eval(t)),
            forced: k.forced_points(),
        }
    }
}

enum EngineIntegrator<'a> {
    /// Pure jump part; increments are exact and factors use the jump
    /// location, not a tag.
    Jumps {
        dim: usize,
        points: Vec<f64>,
        jumps: Vec<CMat>,
    },
    /// Continuous part; `inc(s, t, qtol)` returns `E(t) - E(s)`.
    Cont {
        dim: usize,
        forced: Vec<f64>,
        inc: Box<dyn Fn(f64, f64, f64) -> CMat + 'a>,
    },
}

impl<'a> EngineIntegrator<'a> {
    #[allow(dead_code)]
    fn dim(&self) -> usize {
        match self {
            EngineIntegrator::Jumps { dim, .. } => *dim,
            EngineIntegrator::Cont { dim, .. } => *dim,
        }
    }

    fn increment(&self, s: f64, t: f64, qtol: f64) -> CMat {
        match self {
            EngineIntegrator::Jumps { dim, points, jumps } => {
                let mut acc = CMat::zeros(*dim);
                for (p, j) in points.iter().zip(jumps) {
                    if *p > s && *p <= t {
                        acc = acc.add(j);
                    }
                }
                acc
            }
            EngineIntegrator::Cont { inc, .. } => inc(s, t, qtol),
        }
    }
}

fn engine_view(e: &IntegratorSpec) -> EngineIntegrator<'_> {
    let dim = e.dim();
    match e {
        IntegratorSpec::Step {
            jump_points, jumps, ..
        } => EngineIntegrator::Jumps {
            dim,
            points: jump_points.clone(),
            jumps: jumps.clone(),
        },
        IntegratorSpec::Density { density, .. } => EngineIntegrator::Cont {
            dim,
            forced: e.forced_points(),
            inc: Box::new(move |s, t, qtol| {
                simpson_mat(&|x| density.eval(x), s, t, qtol)
            }),
        },
        _ => EngineIntegrator::Cont {
            dim,
            forced: e.forced_points(),
            inc: Box::new(move |s, t, _| {
                e.eval(t)
                    .expect("engine stays inside the domain")
                    .sub(&e.eval(s).expect("engine stays inside the domain"))
            }),
        },
    }
}

/// Adaptive Simpson quadrature, applied entrywise to a matrix integrand.
fn simpson_mat(f: &dyn Fn(f64) -> CMat, a: f64, b: f64, tol: f64) -> CMat {
    fn simpson(fa: &CMat, fm: &CMat, fb: &CMat, h: f64) -> CMat {
        fa.add(&fm.scale(re(4.0))).add(fb).scale(re(h / 6.0))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> CMat,
        a: f64,
        b: f64,
        fa: &CMat,
        fm: &CMat,
        fb: &CMat,
        whole: &CMat,
        tol: f64,
        depth: u32,
    ) -> CMat {
        let m = 0.5 * (a + b);
        let lm = f(0.5 * (a + m));
        let rm = f(0.5 * (m + b));
        let left = simpson(fa, &lm, fm, m - a);
        let right = simpson(fm, &rm, fb, b - m);
        let sum = left.add(&right);
        let err = sum.sub(whole);
        if depth == 0 || err.frobenius_norm() <= 15.0 * tol {
            sum.add(&err.scale(re(1.0 / 15.0)))
        } else {
            let l = rec(f, a, m, fa, &lm, fm, &left, 0.5 * tol, depth - 1);
            let r = rec(f, m, b, fm, &rm, fb, &right, 0.5 * tol, depth - 1);
            l.add(&r)
        }
    }
    if b <= a {
        return CMat::zeros(f(a).dim());
    }
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = simpson(&fa, &fm, &fb, b - a);
    rec(f, a, b, &fa, &fm, &fb, &whole, tol.max(1e-15), 18)
}

/// Refinement driver shared by the product and additive integrals.
///
/// `cell(s, t, qtol)` returns the factor (product mode) or addend (sum mode)
/// for one cell. Stops when twice the difference between consecutive
/// refinement levels drops below `tol`.
fn refine(
    forced: &[f64],
    lo: f64,
    hi: f64,
    tol: f64,
    dim: usize,
    product: bool,
    cell: &dyn Fn(f64, f64, f64) -> Result<CMat>,
) -> Result<ProdIntResult> {
    let span = hi - lo;
    if span <= 0.0 {
        return Ok(ProdIntResult {
            value: if product {
                CMat::identity(dim)
            } else {
                CMat::zeros(dim)
            },
            partitions_used: 0,
            error_certificate: 0.0,
        });
    }
    let mut prev: Option<CMat> = None;
    let mut last_cert = f64::INFINITY;
    let mut levels = 0u32;
    for level in 2u32..=20 {
        let base = 1usize << level;
        let mut pts: Vec<f64> = (0..=base).map(|k| lo + span * k as f64 / base as f64).collect();
        for &p in forced {
            if p > lo + 1e-13 * span && p < hi - 1e-13 * span {
                pts.push(p);
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut clean: Vec<f64> = vec![pts[0]];
        for &p in &pts[1..] {
            if p - clean.last().unwrap() > 1e-13 * span {
                clean.push(p);
            }
        }
        *clean.last_mut().unwrap() = hi;
        let ncells = clean.len() - 1;
        let qtol = (tol / (10.0 * ncells as f64)).max(1e-15);
        let mut acc = if product {
            CMat::identity(dim)
        } else {
            CMat::zeros(dim)
        };
        for w in clean.windows(2) {
            let c = cell(w[0], w[1], qtol)?;
            acc = if product { acc.mul(&c) } else { acc.add(&c) };
        }
        if let Some(p) = &prev {
            let diff = acc.sub(p).spectral_norm();
            last_cert = 2.0 * diff;
            if last_cert <= tol {
                return Ok(ProdIntResult {
                    value: acc,
                    partitions_used: ncells,
                    error_certificate: last_cert,
                });
            }
        }
        prev = Some(acc);
        levels = level;
    }
    Err(Error::NonConvergence {
        certificate: last_cert,
        tol,
        levels,
    })
}

fn engine_product(
    f: &KernelView<'_>,
    e: &EngineIntegrator<'_>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<ProdIntResult> {
    match e {
        EngineIntegrator::Jumps { dim, points, jumps } => {
            let mut value = CMat::identity(*dim);
            let mut used = 0;
            for (p, j) in points.iter().zip(jumps) {
                if *p > lo && *p <= hi {
                    value = value.mul(&j.scale((f.f)(*p)).mat_exp()?);
                    used += 1;
                }
            }
            Ok(ProdIntResult {
                value,
                partitions_used: used,
                error_certificate: 0.0,
            })
        }
        EngineIntegrator::Cont { dim, forced, inc } => {
            let mut all_forced = forced.clone();
            all_forced.extend_from_slice(&f.forced);
            refine(&all_forced, lo, hi, tol, *dim, true, &|s, t, qtol| {
                let mid = 0.5 * (s + t);
                inc(s, t, qtol).scale((f.f)(mid)).mat_exp()
            })
        }
    }
}

/// Additive Stieltjes integral `∫ f dE` with the same refinement scheme.
fn engine_additive(
    f: &KernelView<'_>,
    e: &EngineIntegrator<'_>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<CMat> {
    match e {
        EngineIntegrator::Jumps { dim, points, jumps } => {
            let mut acc = CMat::zeros(*dim);
            for (p, j) in points.iter().zip(jumps) {
                if *p > lo && *p <= hi {
                    acc = acc.add(&j.scale((f.f)(*p)));
                }
            }
            Ok(acc)
        }
        EngineIntegrator::Cont { dim, forced, inc } => {
            let mut all_forced = forced.clone();
            all_forced.extend_from_slice(&f.forced);
            let r = refine(&all_forced, lo, hi, tol, *dim, false, &|s, t, qtol| {
                let mid = 0.5 * (s + t);
                Ok(inc(s, t, qtol).scale((f.f)(mid)))
            })?;
            Ok(r.value)
        }
    }
}

/// Scalar Stieltjes integral of `g(t) d m(t)` where the increment of `m` over
/// a cell is derived from the matrix increment by `reduce`.
fn engine_scalar(
    g: &dyn Fn(f64) -> f64,
    g_forced: &[f64],
    e: &EngineIntegrator<'_>,
    lo: f64,
    hi: f64,
    tol: f64,
    reduce: &dyn Fn(&CMat) -> f64,
) -> Result<f64> {
    match e {
        EngineIntegrator::Jumps { points, jumps, .. } => Ok(points
            .iter()
            .zip(jumps)
            .filter(|(p, _)| **p > lo && **p <= hi)
            .map(|(p, j)| g(*p) * reduce(j))
            .sum()),
        EngineIntegrator::Cont { forced, inc, .. } => {
            let mut all_forced = forced.clone();
            all_forced.extend_from_slice(g_forced);
            let r = refine(&all_forced, lo, hi, tol, 1, false, &|s, t, qtol| {
                let mid = 0.5 * (s + t);
                Ok(CMat::diag(&[re(g(mid) * reduce(&inc(s, t, qtol)))]))
            })?;
            Ok(r.value.entry(0, 0).re)
        }
    }
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Finite Riemann-type product `∏ exp(f(tag_i) ΔE_i)` over a given tagged
/// partition, ordered left to right.
pub fn riemann_product(
    f: &KernelSpec,
    e: &IntegratorSpec,
    partition: &TaggedPartition,
) -> Result<CMat> {
    let (a, b) = e.domain();
    let pts = partition.points();
    if (pts[0] - a).abs() > 1e-12 * (b - a).max(1.0)
        || (pts[pts.len() - 1] - b).abs() > 1e-12 * (b - a).max(1.0)
    {
        return Err(Error::InvalidPartition(format!(
            "partition [{}, {}] does not cover domain [{a}, {b}]",
            pts[0],
            pts[pts.len() - 1]
        )));
    }
    let view = engine_view(e);
    let mut acc = CMat::identity(e.dim());
    for (w, &tag) in pts.windows(2).zip(partition.tags()) {
        let d = view.increment(w[0], w[1], 1e-12);
        acc = acc.mul(&d.scale(f.eval(tag)).mat_exp()?);
    }
    Ok(acc)
}

/// Product integral `∫ exp(f dE)` over the full domain of `e`, refined until
/// the error certificate drops below `tol`.
pub fn prod_integral(f: &KernelSpec, e: &IntegratorSpec, tol: f64) -> Result<ProdIntResult> {
    f.validate()?;
    e.validate()?;
    let (a, b) = e.domain();
    let kv = KernelView::from_spec(f);
    engine_product(&kv, &engine_view(e), a, b, tol)
}

/// Product integral over a subinterval `[lo, hi]` of the domain.
fn prod_integral_on(
    f: &KernelSpec,
    e: &IntegratorSpec,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<ProdIntResult> {
    let (a, b) = e.domain();
    if lo < a - 1e-12 || hi > b + 1e-12 || lo > hi {
        return Err(Error::OutOfDomain(lo.min(hi), a, b));
    }
    let kv = KernelView::from_spec(f);
    engine_product(&kv, &engine_view(e), lo, hi, tol)
}

/// Splitting identity report: the product over `[a, b]` against the ordered
/// product of the pieces over `[a, c]` and `[c, b]`.
#[derive(Clone, Debug)]
pub struct SplitReport {
    pub full: ProdIntResult,
    pub left: ProdIntResult,
    pub right: ProdIntResult,
    /// `‖ full - left · right ‖`.
    pub residual: f64,
}

pub fn split_product(f: &KernelSpec, e: &IntegratorSpec, c: f64, tol: f64) -> Result<SplitReport> {
    f.validate()?;
    e.validate()?;
    let (a, b) = e.domain();
    if c < a || c > b {
        return Err(Error::OutOfDomain(c, a, b));
    }
    let full = prod_integral_on(f, e, a, b, tol)?;
    let left = prod_integral_on(f, e, a, c, tol)?;
    let right = prod_integral_on(f, e, c, b, tol)?;
    let residual = full.value.sub(&left.value.mul(&right.value)).spectral_norm();
    Ok(SplitReport {
        full,
        left,
        right,
        residual,
    })
}

/// Total variation of the integrator on `[a, t]`, measured in operator norm.
pub fn variation(e: &IntegratorSpec, t: f64) -> Result<f64> {
    e.validate()?;
    let (a, b) = e.domain();
    if t < a - 1e-12 || t > b + 1e-12 {
        return Err(Error::OutOfDomain(t, a, b));
    }
    match e {
        IntegratorSpec::Step {
            jump_points, jumps, ..
        } => Ok(jump_points
            .iter()
            .zip(jumps)
            .filter(|(p, _)| **p > a && **p <= t)
            .map(|(_, j)| j.spectral_norm())
            .sum()),
        IntegratorSpec::PiecewiseLinear {
            breakpoints,
            values,
            ..
        } => {
            let mut acc = 0.0;
            for k in 0..breakpoints.len() - 1 {
                if breakpoints[k + 1] <= t {
                    acc += values[k + 1].sub(&values[k]).spectral_norm();
                } else if breakpoints[k] < t {
                    acc += e.eval(t)?.sub(&values[k]).spectral_norm();
                    break;
                }
            }
            Ok(acc)
        }
        IntegratorSpec::Density { density, .. } => {
            let v = simpson_mat(
                &|x| CMat::diag(&[re(density.eval(x).spectral_norm())]),
                a,
                t,
                1e-11,
            );
            Ok(v.entry(0, 0).re)
        }
        IntegratorSpec::CantorSingular {
            domain, scale, depth,
        } => {
            let u = ((t - domain.0) / (domain.1 - domain.0)).clamp(0.0, 1.0);
            Ok(super::spec::cantor_value(u, *depth) * scale.spectral_norm())
        }
    }
}

/// Gram identity: for an increasing Hermitian integrator, the product
/// `∫ exp(2 Re f dE)` equals `A A*` where `A = ∫ exp(f dE)`.
///
/// Returns the product with the doubled real-part kernel; compare against
/// `A A*` computed separately.
pub fn gram_product(f: &KernelSpec, e: &IntegratorSpec, tol: f64) -> Result<ProdIntResult> {
    f.validate()?;
    e.validate()?;
    let (a, b) = e.domain();
    let kv = KernelView {
        f: Box::new(|t| re(2.0 * f.eval(t).re)),
        forced: f.forced_points(),
    };
    engine_product(&kv, &engine_view(e), a, b, tol)
}

/// Determinant identity: `det ∫ exp(f dE) = exp(∫ f d tr E)`.
///
/// Returns `(det of the product, exp of the scalar trace integral)`.
pub fn det_certificate(f: &KernelSpec, e: &IntegratorSpec, tol: f64) -> Result<(C64, C64)> {
    let p = prod_integral(f, e, tol)?;
    let (a, b) = e.domain();
    let view = engine_view(e);
    let kv = KernelView::from_spec(f);
    let scalar = engine_additive(
        &kv,
        &EngineIntegrator::Cont {
            dim: 1,
            forced: match &view {
                EngineIntegrator::Jumps { points, .. } => points.clone(),
                EngineIntegrator::Cont { forced, .. } => forced.clone(),
            },
            inc: Box::new(|s, t, qtol| CMat::diag(&[view.increment(s, t, qtol).trace()])),
        },
        a,
        b,
        tol,
    );
    // Jump integrators take the exact path instead of the 1x1 wrapper.
    let tr_int = match &view {
        EngineIntegrator::Jumps { points, jumps, .. } => points
            .iter()
            .zip(jumps)
            .filter(|(p, _)| **p > a && **p <= b)
            .map(|(p, j)| f.eval(*p) * j.trace())
            .sum(),
        EngineIntegrator::Cont { .. } => scalar?.entry(0, 0),
    };
    Ok((p.value.det(), tr_int.exp()))
}

/// Norm estimate: `‖∫ exp(f dE)‖ <= exp(∫ |f| d|E|)`.
///
/// Returns `(left side, right side)`.
pub fn norm_certificate(f: &KernelSpec, e: &IntegratorSpec, tol: f64) -> Result<(f64, f64)> {
    let p = prod_integral(f, e, tol)?;
    let (a, b) = e.domain();
    let s = engine_scalar(
        &|t| f.eval(t).norm(),
        &f.forced_points(),
        &engine_view(e),
        a,
        b,
        tol,
        &|m| m.spectral_norm(),
    )?;
    Ok((p.value.spectral_norm(), s.exp()))
}

/// First-order Taylor data for the product over `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct TaylorReport {
    /// `I + ∫ f dE` over the subinterval.
    pub linear_part: CMat,
    /// `s = ∫ |f| d|E|` over the subinterval.
    pub s_abs: f64,
    /// `e^s - 1 - s`, the bound on the norm of the remainder.
    pub remainder_bound: f64,
    pub product: CMat,
    /// `‖ product - linear_part ‖`.
    pub remainder: f64,
}

pub fn taylor_certificate(
    f: &KernelSpec,
    e: &IntegratorSpec,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<TaylorReport> {
    f.validate()?;
    e.validate()?;
    let view = engine_view(e);
    let kv = KernelView::from_spec(f);
    let lin = engine_additive(&kv, &view, lo, hi, tol)?;
    let linear_part = CMat::identity(e.dim()).add(&lin);
    let s_abs = engine_scalar(
        &|t| f.eval(t).norm(),
        &f.forced_points(),
        &view,
        lo,
        hi,
        tol,
        &|m| m.spectral_norm(),
    )?;
    let product = engine_product(&kv, &view, lo, hi, tol)?.value;
    let remainder = product.sub(&linear_part).spectral_norm();
    Ok(TaylorReport {
        linear_part,
        s_abs,
        remainder_bound: s_abs.exp() - 1.0 - s_abs,
        product,
        remainder,
    })
}

// ---------------------------------------------------------------------------
// ODE form
// ---------------------------------------------------------------------------

/// Solves `F'(t) = F(t) A(t)`, `F(a) = I`, by classical fourth-order
/// Runge-Kutta with `steps` uniform steps; the solution at `b` is the product
/// integral of `exp(A(t) dt)`.
pub fn ode_integral(
    a_fn: &dyn Fn(f64) -> CMat,
    dim: usize,
    domain: (f64, f64),
    steps: usize,
) -> Result<CMat> {
    let (a, b) = domain;
    if !(a <= b) || steps == 0 {
        return Err(Error::InvalidIntegrator(format!(
            "bad ODE domain [{a}, {b}] / steps {steps}"
        )));
    }
    let h = (b - a) / steps as f64;
    let mut f = CMat::identity(dim);
    for i in 0..steps {
        let t = a + h * i as f64;
        let k1 = f.mul(&a_fn(t));
        let k2 = f.add(&k1.scale(re(0.5 * h))).mul(&a_fn(t + 0.5 * h));
        let k3 = f.add(&k2.scale(re(0.5 * h))).mul(&a_fn(t + 0.5 * h));
        let k4 = f.add(&k3.scale(re(h))).mul(&a_fn(t + h));
        f = f.add(
            &k1.add(&k2.scale(re(2.0)))
                .add(&k3.scale(re(2.0)))
                .add(&k4)
                .scale(re(h / 6.0)),
        );
        if !f.is_finite() || f.frobenius_norm() > 1e12 {
            return Err(Error::InvalidIntegrator(
                "ODE solution overflow; coefficient too large for the step count".into(),
            ));
        }
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Change of variables
// ---------------------------------------------------------------------------

/// Node of a piecewise-linear monotone map; `left <= right` with a jump when
/// they differ. The map is right-continuous at nodes.
#[derive(Clone, Copy, Debug)]
pub struct MapNode {
    pub t: f64,
    pub left: f64,
    pub right: f64,
}

/// Strictly increasing piecewise-linear map, possibly with upward jumps at
/// its nodes.
#[derive(Clone, Debug)]
pub struct MonotoneMap {
    pub nodes: Vec<MapNode>,
}

impl MonotoneMap {
    pub fn continuous(pairs: &[(f64, f64)]) -> Self {
        MonotoneMap {
            nodes: pairs
                .iter()
                .map(|&(t, v)| MapNode {
                    t,
                    left: v,
                    right: v,
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() < 2 {
            return Err(Error::NotStrictlyIncreasing("need at least two nodes".into()));
        }
        for n in &self.nodes {
            if n.left > n.right {
                return Err(Error::NotStrictlyIncreasing(format!(
                    "downward jump at t = {}",
                    n.t
                )));
            }
        }
        for w in self.nodes.windows(2) {
            if w[0].t >= w[1].t {
                return Err(Error::NotStrictlyIncreasing(
                    "node times must be strictly increasing".into(),
                ));
            }
            if w[1].left <= w[0].right {
                return Err(Error::NotStrictlyIncreasing(format!(
                    "map not strictly increasing on ({}, {})",
                    w[0].t, w[1].t
                )));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0].t, self.nodes.last().unwrap().t)
    }

    pub fn value_range(&self) -> (f64, f64) {
        (self.nodes[0].left, self.nodes.last().unwrap().right)
    }

    /// Right-continuous evaluation.
    pub fn forward(&self, t: f64) -> f64 {
        let n = &self.nodes;
        if t <= n[0].t {
            return n[0].right;
        }
        for i in 1..n.len() {
            if t < n[i].t {
                let w = (t - n[i - 1].t) / (n[i].t - n[i - 1].t);
                return n[i - 1].right + w * (n[i].left - n[i - 1].right);
            }
            if t == n[i].t {
                return n[i].right;
            }
        }
        n.last().unwrap().right
    }

    /// Left-continuous generalized inverse `inf { t : forward(t) >= s }`.
    pub fn pseudo_inverse(&self, s: f64) -> f64 {
        let n = &self.nodes;
        if s <= n[0].right {
            return n[0].t;
        }
        for i in 1..n.len() {
            if s <= n[i].left {
                let lo = n[i - 1].right;
                let hi = n[i].left;
                let w = if hi > lo { (s - lo) / (hi - lo) } else { 1.0 };
                return n[i - 1].t + w * (n[i].t - n[i - 1].t);
            }
            if s <= n[i].right {
                return n[i].t;
            }
        }
        n.last().unwrap().t
    }
}

/// Substitution rule: the product of `f dE` over `[a, b]` equals the product
/// of `(f ∘ φ†) d(E ∘ φ†)` over `[φ(a), φ(b)]` for a strictly increasing φ.
///
/// Returns `(original, transformed)`; the caller compares.
pub fn change_of_variables(
    f: &KernelSpec,
    e: &IntegratorSpec,
    phi: &MonotoneMap,
    tol: f64,
) -> Result<(ProdIntResult, ProdIntResult)> {
    f.validate()?;
    e.validate()?;
    phi.validate()?;
    let (a, b) = e.domain();
    let (pa, pb) = phi.domain();
    if (pa - a).abs() > 1e-9 * (b - a).max(1.0) || (pb - b).abs() > 1e-9 * (b - a).max(1.0) {
        return Err(Error::NotStrictlyIncreasing(format!(
            "map domain [{pa}, {pb}] does not match integrator domain [{a}, {b}]"
        )));
    }
    let original = prod_integral(f, e, tol)?;

    let (alpha, beta) = phi.value_range();
    // Forced points in the s-variable: jump gap endpoints plus images of the
    // kernel/integrator forced points.
    let mut s_forced: Vec<f64> = Vec::new();
    for n in &phi.nodes {
        s_forced.push(n.left);
        s_forced.push(n.right);
    }
    for p in f.forced_points().into_iter().chain(e.forced_points()) {
        s_forced.push(phi.forward(p));
    }
    let kv = KernelView {
        f: Box::new(|s| f.eval(phi.pseudo_inverse(s))),
        forced: s_forced.clone(),
    };

    let transformed = match e {
        IntegratorSpec::Step {
            jump_points, jumps, ..
        } => {
            // A jump of E at p becomes a jump of E ∘ φ† at φ(p); between
            // mapped jump points the composition is constant, so the
            // composed integrator is again a pure jump integrator.
            let mapped = EngineIntegrator::Jumps {
                dim: e.dim(),
                points: jump_points.iter().map(|&p| phi.forward(p)).collect(),
                jumps: jumps.clone(),
            };
            engine_product(&kv, &mapped, alpha, beta, tol)?
        }
        IntegratorSpec::Density { density, .. } => {
            let view = EngineIntegrator::Cont {
                dim: e.dim(),
                forced: s_forced,
                inc: Box::new(|s1, s2, qtol| {
                    simpson_mat(
                        &|x| density.eval(x),
                        phi.pseudo_inverse(s1),
                        phi.pseudo_inverse(s2),
                        qtol,
                    )
                }),
            };
            engine_product(&kv, &view, alpha, beta, tol)?
        }
        _ => {
            let view = EngineIntegrator::Cont {
                dim: e.dim(),
                forced: s_forced,
                inc: Box::new(|s1, s2, _| {
                    e.eval(phi.pseudo_inverse(s2))
                        .expect("pseudo-inverse stays inside the domain")
                        .sub(&e.eval(phi.pseudo_inverse(s1)).expect("in domain"))
                }),
            };
            engine_product(&kv, &view, alpha, beta, tol)?
        }
    };
    Ok((original, transformed))
}

// ---------------------------------------------------------------------------
// Telescoping identity
// ---------------------------------------------------------------------------

/// `Σ_i (q_1 … q_{i-1}) (p_i - q_i) (p_{i+1} … p_n)`, which equals
/// `∏ p - ∏ q` exactly.
pub fn telescoping_sum(p: &[CMat], q: &[CMat]) -> CMat {
    assert_eq!(p.len(), q.len());
    assert!(!p.is_empty());
    let n = p.len();
    let dim = p[0].dim();
    // Suffix products of p.
    let mut suffix = vec![CMat::identity(dim); n + 1];
    for i in (0..n).rev() {
        suffix[i] = p[i].mul(&suffix[i + 1]);
    }
    let mut prefix_q = CMat::identity(dim);
    let mut acc = CMat::zeros(dim);
    for i in 0..n {
        acc = acc.add(&prefix_q.mul(&p[i].sub(&q[i])).mul(&suffix[i + 1]));
        prefix_q = prefix_q.mul(&q[i]);
    }
    acc
}

/// Residual of the telescoping identity; zero up to roundoff.
pub fn telescoping_residual(p: &[CMat], q: &[CMat]) -> f64 {
    let dim = p[0].dim();
    let prod = |m: &[CMat]| m.iter().fold(CMat::identity(dim), |acc, x| acc.mul(x));
    prod(p)
        .sub(&prod(q))
        .sub(&telescoping_sum(p, q))
        .spectral_norm()
}

// ---------------------------------------------------------------------------
// Convergence harness
// ---------------------------------------------------------------------------

/// Report of the convergence harness for a sequence of integrators against a
/// limit integrator under a fixed kernel.
#[derive(Clone, Debug)]
pub struct HellyReport {
    /// `‖ product(E_k) - product(E_limit) ‖` per sequence element.
    pub product_gaps: Vec<f64>,
    /// Sup over a sample grid of `‖ E_k(t) - E_limit(t) ‖` (NaN when a term
    /// has no closed point evaluation).
    pub pointwise_gaps: Vec<f64>,
    /// Largest total variation over the sequence and the limit.
    pub uniform_variation: f64,
    pub converged: bool,
    /// Human-readable precondition diagnostics; empty when all hold.
    pub violations: Vec<String>,
}

pub fn helly_convergence_harness(
    f: &KernelSpec,
    seq: &[IntegratorSpec],
    limit: &IntegratorSpec,
    tol: f64,
) -> Result<HellyReport> {
    let limit_res = prod_integral(f, limit, tol.min(1e-8))?;
    let (a, b) = limit.domain();
    let limit_var = variation(limit, b)?;
    let mut product_gaps = Vec::new();
    let mut pointwise_gaps = Vec::new();
    let mut violations = Vec::new();
    let mut uniform_variation = limit_var;
    let grid: Vec<f64> = (0..=64).map(|k| a + (b - a) * k as f64 / 64.0).collect();
    for (k, ek) in seq.iter().enumerate() {
        let (ka, kb) = ek.domain();
        if (ka - a).abs() > 1e-9 || (kb - b).abs() > 1e-9 {
            violations.push(format!("element {k} has domain [{ka}, {kb}] != [{a}, {b}]"));
        }
        let rk = prod_integral(f, ek, tol.min(1e-8))?;
        product_gaps.push(rk.value.sub(&limit_res.value).spectral_norm());
        let vk = variation(ek, kb)?;
        uniform_variation = uniform_variation.max(vk);
        if vk > 10.0 * (limit_var + 1.0) {
            violations.push(format!(
                "element {k} variation {vk:.3e} not uniformly bounded (limit {limit_var:.3e})"
            ));
        }
        let pg = grid
            .iter()
            .map(|&t| match (ek.eval(t.min(kb).max(ka)), limit.eval(t)) {
                (Ok(x), Ok(y)) => x.sub(&y).spectral_norm(),
                _ => f64::NAN,
            })
            .fold(0.0_f64, f64::max);
        pointwise_gaps.push(pg);
    }
    let converged = product_gaps.last().is_some_and(|&g| g <= tol);
    Ok(HellyReport {
        product_gaps,
        pointwise_gaps,
        uniform_variation,
        converged,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::C64;
    use crate::prodint::spec::{DensityFn, IntegratorSpecJson, KernelSpecJson, ThetaFn};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym01() -> CMat {
        CMat::from_rows(&[vec![re(0.0), re(1.0)], vec![re(1.0), re(0.0)]]).unwrap()
    }

    fn one() -> KernelSpec {
        KernelSpec::Constant(re(1.0))
    }

    fn ramp(mat: CMat, a: f64, b: f64) -> IntegratorSpec {
        IntegratorSpec::PiecewiseLinear {
            breakpoints: vec![a, b],
            values: vec![CMat::zeros(mat.dim()), mat],
            increasing: false,
        }
    }

    #[test]
    fn constant_integrator_is_cosh_sinh() {
        // E(t) = t J on [0, 1] with J the symmetric 0/1 matrix: the product
        // is exp(J) = [[cosh 1, sinh 1], [sinh 1, cosh 1]].
        let r = prod_integral(&one(), &ramp(sym01(), 0.0, 1.0), 1e-12).unwrap();
        let want = CMat::from_rows(&[
            vec![re(1.0_f64.cosh()), re(1.0_f64.sinh())],
            vec![re(1.0_f64.sinh()), re(1.0_f64.cosh())],
        ])
        .unwrap();
        assert!(r.value.sub(&want).spectral_norm() < 1e-10);
        assert!(r.error_certificate <= 1e-12);
    }

    #[test]
    fn jump_integrator_orders_exponentials() {
        // Two jumps A then B: the product is e^A e^B, which differs from
        // e^{A+B} by at least 0.1 for this non-commuting pair.
        let a = sym01();
        let b = CMat::diag(&[re(1.0), re(2.0)]);
        let e = IntegratorSpec::Step {
            domain: (0.0, 1.0),
            jump_points: vec![0.3, 0.7],
            jumps: vec![a.clone(), b.clone()],
            increasing: false,
        };
        let r = prod_integral(&one(), &e, 1e-12).unwrap();
        let want = a.mat_exp().unwrap().mul(&b.mat_exp().unwrap());
        assert!(r.value.sub(&want).spectral_norm() < 1e-12);
        let naive = a.add(&b).mat_exp().unwrap();
        assert!(r.value.sub(&naive).spectral_norm() >= 0.1);
    }

    #[test]
    fn piecewise_linear_two_segments() {
        // E ramps to A on [-1, 0] and on to A + B on [0, 1]: the product is
        // exactly e^A e^B because E is linear (hence commuting) per segment.
        let a = sym01();
        let b = CMat::diag(&[re(1.0), re(2.0)]);
        let e = IntegratorSpec::PiecewiseLinear {
            breakpoints: vec![-1.0, 0.0, 1.0],
            values: vec![CMat::zeros(2), a.clone(), a.add(&b)],
            increasing: false,
        };
        let r = prod_integral(&one(), &e, 1e-11).unwrap();
        let want = a.mat_exp().unwrap().mul(&b.mat_exp().unwrap());
        assert!(
            r.value.sub(&want).spectral_norm() < 1e-9,
            "gap {}",
            r.value.sub(&want).spectral_norm()
        );
    }

    #[test]
    fn cantor_scalar_mean_oracle() {
        // f(t) = t against the Cantor integrator on [0, 1]: scalar products
        // commute, so the result is exp(∫ t dC(t)) = exp(1/2) by the symmetry
        // of the Cantor measure under t -> 1 - t.
        let e = IntegratorSpec::CantorSingular {
            domain: (0.0, 1.0),
            scale: CMat::identity(1),
            depth: 14,
        };
        let f = KernelSpec::Tabulated {
            times: vec![0.0, 1.0],
            values: vec![re(0.0), re(1.0)],
        };
        let r = prod_integral(&f, &e, 1e-9).unwrap();
        assert!(
            (r.value.entry(0, 0) - re(0.5_f64.exp())).norm() < 1e-7,
            "got {}",
            r.value.entry(0, 0)
        );
    }

    fn noncommuting_density() -> IntegratorSpec {
        IntegratorSpec::Density {
            domain: (0.0, 1.0),
            dim: 2,
            density: DensityFn::from_closure(|t: f64| {
                CMat::from_rows(&[
                    vec![re(0.5 + t), C64::new(0.3 * (3.0 * t).cos(), 0.2 * t)],
                    vec![C64::new(0.3 * (3.0 * t).cos(), -0.2 * t), re(1.0 - 0.5 * t)],
                ])
                .unwrap()
            }),
        }
    }

    #[test]
    fn density_matches_ode_solver() {
        let e = noncommuting_density();
        let f = KernelSpec::Constant(re(1.0));
        let r = prod_integral(&f, &e, 1e-10).unwrap();
        let ode = ode_integral(
            &|t| {
                if let IntegratorSpec::Density { density, .. } = &e {
                    density.eval(t)
                } else {
                    unreachable!()
                }
            },
            2,
            (0.0, 1.0),
            4000,
        )
        .unwrap();
        assert!(
            r.value.sub(&ode).spectral_norm() < 1e-8,
            "gap {}",
            r.value.sub(&ode).spectral_norm()
        );
    }

    #[test]
    fn split_gram_det_norm_taylor_identities() {
        let e = noncommuting_density();
        let f = KernelSpec::Herglotz {
            z: C64::new(0.3, -0.2),
            theta: ThetaFn::Identity,
        };
        let sp = split_product(&f, &e, 0.37, 1e-10).unwrap();
        assert!(sp.residual < 1e-8, "split residual {}", sp.residual);

        let (lhs, rhs) = det_certificate(&f, &e, 1e-10).unwrap();
        assert!(
            (lhs - rhs).norm() <= 1e-8 * rhs.norm().max(1.0),
            "det {} vs {}",
            lhs,
            rhs
        );

        let (nl, nr) = norm_certificate(&f, &e, 1e-10).unwrap();
        assert!(nl <= nr * (1.0 + 1e-10) + 1e-10, "norm {} > bound {}", nl, nr);

        let t = taylor_certificate(&f, &e, 0.4, 0.45, 1e-11).unwrap();
        assert!(
            t.remainder <= t.remainder_bound + 1e-9,
            "remainder {} vs bound {}",
            t.remainder,
            t.remainder_bound
        );
        assert!(t.s_abs > 0.0);
    }

    #[test]
    fn gram_identity_for_commuting_increasing_integrator() {
        // The Gram identity needs the integrator increments to commute (a
        // conjugated-diagonal family here); for non-commuting increments the
        // 2 Re f product converges to a non-Hermitian limit and cannot equal
        // AA*. See `gram_unitary_for_imaginary_kernel` for the general case
        // with a purely imaginary kernel.
        let u = {
            let s = 0.6_f64;
            CMat::from_rows(&[
                vec![re(s.cos()), C64::new(0.0, s.sin())],
                vec![C64::new(0.0, s.sin()), re(s.cos())],
            ])
            .unwrap()
        };
        let uu = u.clone();
        let e = IntegratorSpec::Density {
            domain: (0.0, 1.0),
            dim: 2,
            density: DensityFn::from_closure(move |t: f64| {
                let d = CMat::diag(&[re(1.0 + 0.5 * t.sin()), re(0.3 + 0.2 * t)]);
                uu.mul(&d).mul(&uu.adjoint())
            }),
        };
        let f = KernelSpec::Herglotz {
            z: C64::new(0.2, 0.4),
            theta: ThetaFn::Identity,
        };
        let a = prod_integral(&f, &e, 1e-10).unwrap().value;
        let g = gram_product(&f, &e, 1e-10).unwrap().value;
        assert!(
            a.mul(&a.adjoint()).sub(&g).spectral_norm() < 1e-8,
            "gram gap {}",
            a.mul(&a.adjoint()).sub(&g).spectral_norm()
        );
    }

    #[test]
    fn gram_unitary_for_imaginary_kernel() {
        // Purely imaginary kernel, arbitrary Hermitian integrator: (AA*)' = 0
        // along the flow, so A is exactly unitary.
        let e = noncommuting_density();
        let f = KernelSpec::Constant(C64::new(0.0, 0.7));
        let a = prod_integral(&f, &e, 1e-10).unwrap().value;
        assert!(
            a.mul(&a.adjoint()).sub(&CMat::identity(2)).spectral_norm() < 1e-8,
            "not unitary: {}",
            a.mul(&a.adjoint()).sub(&CMat::identity(2)).spectral_norm()
        );
        let g = gram_product(&f, &e, 1e-10).unwrap().value;
        assert!(g.sub(&CMat::identity(2)).spectral_norm() < 1e-9);
    }

    #[test]
    fn riemann_product_converges_to_integral() {
        let e = noncommuting_density();
        let f = one();
        let exact = prod_integral(&f, &e, 1e-11).unwrap().value;
        let mut prev = f64::INFINITY;
        for cells in [8usize, 32, 128] {
            let p = TaggedPartition::uniform(0.0, 1.0, cells).unwrap();
            let gap = riemann_product(&f, &e, &p).unwrap().sub(&exact).spectral_norm();
            assert!(gap < prev + 1e-12);
            prev = gap;
        }
        assert!(prev < 1e-4, "final Riemann gap {prev}");
        // Partition must cover the domain.
        let short = TaggedPartition::uniform(0.0, 0.5, 4).unwrap();
        assert!(matches!(
            riemann_product(&f, &e, &short),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn tagged_partition_validation() {
        assert!(TaggedPartition::new(vec![0.0, 0.5, 0.4], vec![0.2, 0.45]).is_err());
        assert!(TaggedPartition::new(vec![0.0, 0.5, 1.0], vec![0.6, 0.7]).is_err());
        assert!(TaggedPartition::new(vec![0.0], vec![]).is_err());
        let p = TaggedPartition::new(vec![0.0, 0.5, 1.0], vec![0.25, 0.5]).unwrap();
        assert!((p.mesh() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn change_of_variables_continuous_and_jump() {
        // Continuous phi(t) = t^2 on the ramp integrator.
        let e = ramp(sym01(), 0.0, 1.0);
        let f = KernelSpec::Tabulated {
            times: vec![0.0, 1.0],
            values: vec![re(0.2), C64::new(0.9, 0.3)],
        };
        let pairs: Vec<(f64, f64)> = (0..=16)
            .map(|k| {
                let t = k as f64 / 16.0;
                (t, t * t)
            })
            .collect();
        let phi = MonotoneMap::continuous(&pairs);
        let (orig, tr) = change_of_variables(&f, &e, &phi, 1e-10).unwrap();
        assert!(
            orig.value.sub(&tr.value).spectral_norm() < 1e-7,
            "continuous substitution gap {}",
            orig.value.sub(&tr.value).spectral_norm()
        );

        // Map with an upward jump across a jump integrator.
        let ej = IntegratorSpec::Step {
            domain: (0.0, 1.0),
            jump_points: vec![0.25, 0.75],
            jumps: vec![sym01(), CMat::diag(&[re(0.5), re(1.5)])],
            increasing: false,
        };
        let phi_j = MonotoneMap {
            nodes: vec![
                MapNode { t: 0.0, left: 0.0, right: 0.0 },
                MapNode { t: 0.5, left: 1.0, right: 2.0 },
                MapNode { t: 1.0, left: 3.0, right: 3.0 },
            ],
        };
        let (orig, tr) = change_of_variables(&f, &ej, &phi_j, 1e-10).unwrap();
        assert!(
            orig.value.sub(&tr.value).spectral_norm() < 1e-10,
            "jump substitution gap {}",
            orig.value.sub(&tr.value).spectral_norm()
        );
    }

    #[test]
    fn monotone_map_inverse_relations() {
        let phi = MonotoneMap {
            nodes: vec![
                MapNode { t: 0.0, left: 0.0, right: 0.5 },
                MapNode { t: 1.0, left: 1.0, right: 1.0 },
            ],
        };
        phi.validate().unwrap();
        // Right-continuity at the jump and the generalized inverse.
        assert!((phi.forward(0.0) - 0.5).abs() < 1e-15);
        assert!((phi.pseudo_inverse(0.25) - 0.0).abs() < 1e-15);
        assert!((phi.pseudo_inverse(0.75) - 0.5).abs() < 1e-15);
        // phi†(phi(t)) = t for continuity points.
        for &t in &[0.25, 0.5, 0.9] {
            assert!((phi.pseudo_inverse(phi.forward(t)) - t).abs() < 1e-12);
        }
        let bad = MonotoneMap {
            nodes: vec![
                MapNode { t: 0.0, left: 0.0, right: 1.0 },
                MapNode { t: 1.0, left: 0.5, right: 2.0 },
            ],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn telescoping_identity_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut rand_mat = |scale: f64| {
            CMat::from_fn(3, |_, _| {
                C64::new(
                    scale * rng.gen_range(-1.0..1.0),
                    scale * rng.gen_range(-1.0..1.0),
                )
            })
        };
        let p: Vec<CMat> = (0..6).map(|_| rand_mat(1.0)).collect();
        let q: Vec<CMat> = (0..6).map(|_| rand_mat(1.0)).collect();
        assert!(telescoping_residual(&p, &q) < 1e-12);
    }

    #[test]
    fn helly_harness_detects_convergence() {
        // Smoothed steps with shrinking ramp width converging to a jump at 1/2.
        let jump = sym01().scale(re(0.5));
        let limit = IntegratorSpec::Step {
            domain: (0.0, 1.0),
            jump_points: vec![0.5],
            jumps: vec![jump.clone()],
            increasing: false,
        };
        let seq: Vec<IntegratorSpec> = [0.2, 0.05, 0.01, 0.001]
            .iter()
            .map(|&w| IntegratorSpec::PiecewiseLinear {
                breakpoints: vec![0.0, 0.5 - w, 0.5 + w, 1.0],
                values: vec![
                    CMat::zeros(2),
                    CMat::zeros(2),
                    jump.clone(),
                    jump.clone(),
                ],
                increasing: false,
            })
            .collect();
        let rep = helly_convergence_harness(&one(), &seq, &limit, 1e-2).unwrap();
        assert!(rep.violations.is_empty());
        assert!(rep.converged, "gaps {:?}", rep.product_gaps);
        for w in rep.product_gaps.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(rep.uniform_variation < 1.0);
    }

    #[test]
    fn json_round_trips() {
        let e = IntegratorSpec::Step {
            domain: (0.0, 1.0),
            jump_points: vec![0.5],
            jumps: vec![sym01()],
            increasing: false,
        };
        let j = IntegratorSpecJson::from_spec(&e).unwrap();
        let s = serde_json::to_string(&j).unwrap();
        let back: IntegratorSpecJson = serde_json::from_str(&s).unwrap();
        let e2 = back.to_spec().unwrap();
        assert!(e2.eval(0.7).unwrap().sub(&e.eval(0.7).unwrap()).spectral_norm() < 1e-15);

        let f = KernelSpec::Herglotz {
            z: C64::new(0.1, 0.2),
            theta: ThetaFn::Identity,
        };
        let fj = KernelSpecJson::from_spec(&f);
        let fs = serde_json::to_string(&fj).unwrap();
        let fback: KernelSpecJson = serde_json::from_str(&fs).unwrap();
        assert!((fback.to_spec().unwrap().eval(0.3) - f.eval(0.3)).norm() < 1e-15);

        let r = prod_integral(&one(), &ramp(sym01(), 0.0, 1.0), 1e-10).unwrap();
        let rj = serde_json::to_string(&r.to_json()).unwrap();
        let rback: ProdIntResultJson = serde_json::from_str(&rj).unwrap();
        assert_eq!(rback.partitions_used, r.partitions_used);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn prop_split_residual_small(c in 0.05f64..0.95) {
            let e = noncommuting_density();
            let sp = split_product(&one(), &e, c, 1e-9).unwrap();
            prop_assert!(sp.residual < 1e-7, "residual {} at c = {}", sp.residual, c);
        }

        #[test]
        fn prop_det_identity_jumps(
            a in -0.8f64..0.8, b in -0.8f64..0.8, c in -0.8f64..0.8, d in -0.8f64..0.8
        ) {
            let e = IntegratorSpec::Step {
                domain: (0.0, 1.0),
                jump_points: vec![0.3, 0.6],
                jumps: vec![
                    CMat::from_rows(&[vec![re(a), re(b)], vec![re(b), re(0.2)]]).unwrap(),
                    CMat::from_rows(&[vec![re(c), re(d)], vec![re(d), re(-0.1)]]).unwrap(),
                ],
                increasing: false,
            };
            let (lhs, rhs) = det_certificate(&one(), &e, 1e-10).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
        }

        #[test]
        fn prop_telescoping(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p: Vec<CMat> = (0..4)
                .map(|_| CMat::from_fn(2, |_, _| re(rng.gen_range(-1.0..1.0))))
                .collect();
            let q: Vec<CMat> = (0..4)
                .map(|_| CMat::from_fn(2, |_, _| re(rng.gen_range(-1.0..1.0))))
                .collect();
            prop_assert!(telescoping_residual(&p, &q) < 1e-12);
        }
    }
}
