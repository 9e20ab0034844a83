//! Forward constructors for pp-inner, sc-inner and outer matrix functions,
//! inner/outer classification via determinants, the scalar factorization
//! oracle, and the non-uniqueness demonstration.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matcore::{re, C64, CMat};
use crate::mvf::Mvf;
use crate::prodint::{
    herglotz_kernel, prod_integral, DensityFn, IntegratorSpec, KernelSpec, ThetaFn,
};

const TAU: f64 = 2.0 * std::f64::consts::PI;

// ---------------------------------------------------------------------------
// pp-inner
// ---------------------------------------------------------------------------

/// One atomic block of a pp-inner function: a single angle and an increasing
/// integrator on `[0, length]` with `tr E(t) = t`.
#[derive(Clone, Debug)]
pub struct PpBlock {
    pub length: f64,
    pub theta: f64,
    pub integrator: IntegratorSpec,
}

/// `A(z) = U ∏_k ∫₀^{l_k} exp(h_z(θ_k) dE_k(t))`.
#[derive(Clone, Debug)]
pub struct PpInnerSpec {
    pub tail_unitary: CMat,
    pub blocks: Vec<PpBlock>,
}

impl PpInnerSpec {
    pub fn validate(&self) -> Result<()> {
        check_unitary(&self.tail_unitary)?;
        for b in &self.blocks {
            b.integrator.validate()?;
            if b.length <= 0.0 || !(0.0..TAU).contains(&b.theta) {
                return Err(Error::MalformedSpec(format!(
                    "block length {} / angle {} out of range",
                    b.length, b.theta
                )));
            }
            let (a, bb) = b.integrator.domain();
            if a.abs() > 1e-12 || (bb - b.length).abs() > 1e-12 {
                return Err(Error::MalformedSpec(
                    "block integrator domain must be [0, length]".into(),
                ));
            }
            check_trace_normalized(&b.integrator)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.tail_unitary.dim()
    }

    pub fn as_mvf(&self, tol: f64) -> Mvf {
        let spec = self.clone();
        Mvf::new(self.dim(), true, move |z| {
            eval_pp_inner(&spec, z, tol).expect("pp-inner evaluation")
        })
    }
}

fn check_unitary(u: &CMat) -> Result<()> {
    let res = u
        .mul(&u.adjoint())
        .sub(&CMat::identity(u.dim()))
        .spectral_norm();
    if res > 1e-10 {
        return Err(Error::IllConditionedFrame(format!(
            "tail unitarity residual {res:.3e}"
        )));
    }
    Ok(())
}

/// `tr E(t) = t` within 1e-12 at breakpoints (node variants) or via the
/// density trace at samples.
fn check_trace_normalized(e: &IntegratorSpec) -> Result<()> {
    match e {
        IntegratorSpec::PiecewiseLinear {
            breakpoints,
            values,
            increasing,
        } => {
            if !increasing {
                return Err(Error::MalformedSpec(
                    "pp-inner integrator must be flagged increasing".into(),
                ));
            }
            for (t, v) in breakpoints.iter().zip(values) {
                if (v.trace().re - (t - breakpoints[0])).abs() > 1e-12 {
                    return Err(Error::MalformedSpec(format!(
                        "trace normalization violated at t = {t}"
                    )));
                }
            }
            Ok(())
        }
        IntegratorSpec::Density { domain, density, .. } => {
            for k in 0..=32 {
                let t = domain.0 + (domain.1 - domain.0) * k as f64 / 32.0;
                if (density.eval(t).trace().re - 1.0).abs() > 1e-9 {
                    return Err(Error::MalformedSpec(format!(
                        "density trace != 1 at t = {t}"
                    )));
                }
            }
            Ok(())
        }
        _ => Err(Error::MalformedSpec(
            "pp-inner blocks take piecewise-linear or density integrators".into(),
        )),
    }
}

pub fn eval_pp_inner(spec: &PpInnerSpec, z: C64, tol: f64) -> Result<CMat> {
    if z.norm() >= 1.0 {
        return Err(Error::OutOfDomain(z.norm(), 0.0, 1.0));
    }
    let mut acc = spec.tail_unitary.clone();
    for b in &spec.blocks {
        let kernel = KernelSpec::Herglotz {
            z,
            theta: ThetaFn::Steps {
                starts: vec![0.0],
                values: vec![b.theta],
            },
        };
        let p = prod_integral(&kernel, &b.integrator, tol)?;
        acc = acc.mul(&p.value);
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// sc-inner
// ---------------------------------------------------------------------------

/// `A(z) = U ∫₀^{2π} exp(h_z(φ) dS(φ))` with a singular continuous `S`.
#[derive(Clone, Debug)]
pub struct ScInnerSpec {
    pub tail_unitary: CMat,
    /// Increasing continuous integrator on `[0, 2π]`, typically the
    /// finite-depth Cantor variant.
    pub integrator: IntegratorSpec,
}

impl ScInnerSpec {
    pub fn validate(&self) -> Result<()> {
        check_unitary(&self.tail_unitary)?;
        self.integrator.validate()?;
        let (a, b) = self.integrator.domain();
        if a.abs() > 1e-12 || (b - TAU).abs() > 1e-9 {
            return Err(Error::MalformedSpec(
                "sc-inner integrator domain must be [0, 2pi]".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.tail_unitary.dim()
    }
}

pub fn eval_sc_inner(spec: &ScInnerSpec, z: C64, tol: f64) -> Result<CMat> {
    if z.norm() >= 1.0 {
        return Err(Error::OutOfDomain(z.norm(), 0.0, 1.0));
    }
    let kernel = KernelSpec::Herglotz {
        z,
        theta: ThetaFn::Identity,
    };
    let p = prod_integral(&kernel, &spec.integrator, tol)?;
    Ok(spec.tail_unitary.mul(&p.value))
}

// ---------------------------------------------------------------------------
// outer
// ---------------------------------------------------------------------------

/// `A(z) = U ∫₀^{2π} exp(h_z(φ) M(φ) dφ)` for an integrable Hermitian
/// density with least eigenvalue bounded below.
#[derive(Clone)]
pub struct OuterSpec {
    pub tail_unitary: CMat,
    pub density: Arc<dyn Fn(f64) -> CMat + Send + Sync>,
    pub dim: usize,
    pub lower_bound: f64,
}

impl std::fmt::Debug for OuterSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OuterSpec")
            .field("dim", &self.dim)
            .field("lower_bound", &self.lower_bound)
            .finish()
    }
}

impl OuterSpec {
    pub fn validate(&self) -> Result<()> {
        check_unitary(&self.tail_unitary)?;
        for k in 0..64 {
            let m = (self.density)(TAU * k as f64 / 64.0);
            if !m.is_hermitian(1e-10 * m.spectral_norm().max(1.0)) {
                return Err(Error::MalformedSpec("density not Hermitian at sample".into()));
            }
            if m.herm_eigenvalues()[0] < self.lower_bound - 1e-9 {
                return Err(Error::MalformedSpec(
                    "density dips below its declared lower bound".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn as_mvf(&self, tol: f64) -> Mvf {
        let spec = self.clone();
        Mvf::new(self.dim, false, move |z| {
            eval_outer(&spec, z, tol).expect("outer evaluation")
        })
    }
}

/// Evaluates the outer multiplicative integral by a graded Runge-Kutta pass
/// over `F' = F · h_z(φ) M(φ)`: step sizes shrink near the kernel peak at
/// `φ = arg z`, keeping the cost logarithmic in `1/(1 - |z|)`.
pub fn eval_outer(spec: &OuterSpec, z: C64, _tol: f64) -> Result<CMat> {
    if z.norm() >= 1.0 {
        return Err(Error::OutOfDomain(z.norm(), 0.0, 1.0));
    }
    let norm_m = (0..64)
        .map(|k| (spec.density)(TAU * k as f64 / 64.0).spectral_norm())
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let coeff = |phi: f64| (spec.density)(phi).scale(herglotz_kernel(z, phi));
    let local_l = |phi: f64| herglotz_kernel(z, phi).norm() * norm_m;
    let hl_target = 2e-3;
    let mut f = CMat::identity(spec.dim);
    let mut t = 0.0;
    while t < TAU {
        let l0 = local_l(t).max(1e-9);
        let mut h = (hl_target / l0).min(TAU - t).min(TAU / 64.0);
        let lm = local_l(t + 0.5 * h).max(l0);
        h = (hl_target / lm).min(TAU - t).min(TAU / 64.0).max(1e-9);
        let k1 = f.mul(&coeff(t));
        let k2 = f.add(&k1.scale(re(0.5 * h))).mul(&coeff(t + 0.5 * h));
        let k3 = f.add(&k2.scale(re(0.5 * h))).mul(&coeff(t + 0.5 * h));
        let k4 = f.add(&k3.scale(re(h))).mul(&coeff(t + h));
        f = f.add(
            &k1.add(&k2.scale(re(2.0)))
                .add(&k3.scale(re(2.0)))
                .add(&k4)
                .scale(re(h / 6.0)),
        );
        if !f.is_finite() {
            return Err(Error::InvalidIntegrator("outer evaluation overflow".into()));
        }
        t += h;
    }
    Ok(spec.tail_unitary.mul(&f))
}

// ---------------------------------------------------------------------------
// Scalar inner-outer oracle
// ---------------------------------------------------------------------------

/// Scalar factorization handles (1x1 matrix functions): Blaschke part from
/// the listed zeros, singular part from point masses, outer part from the
/// boundary log-modulus.
pub struct ScalarFactorization {
    pub blaschke: Mvf,
    pub singular: Mvf,
    pub outer: Mvf,
}

impl ScalarFactorization {
    pub fn product(&self) -> Mvf {
        self.blaschke
            .compose_mul(&self.singular)
            .compose_mul(&self.outer)
    }
}

/// Builds the three scalar factors. `boundary_log_modulus(φ) = log|f(e^{iφ})|`;
/// `singular_masses` are `(angle, mass > 0)` atoms. The outer part is
/// `exp(-(1/2π) ∫ h_z(φ) log|f| dφ)`, whose boundary modulus reproduces `|f|`.
pub fn scalar_inner_outer(
    boundary_log_modulus: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    zeros: &[C64],
    singular_masses: &[(f64, f64)],
) -> Result<ScalarFactorization> {
    for z in zeros {
        if z.norm() >= 1.0 {
            return Err(Error::MalformedSpec(format!("zero |{z}| outside the disk")));
        }
    }
    for (_, m) in singular_masses {
        if *m < 0.0 {
            return Err(Error::MalformedSpec("negative singular mass".into()));
        }
    }
    // Log-integrability proxy on a sample grid.
    let n = 2048usize;
    let mean: f64 = (0..n)
        .map(|k| boundary_log_modulus(TAU * k as f64 / n as f64))
        .sum::<f64>()
        / n as f64
        * TAU;
    if !mean.is_finite() || mean < -1e6 {
        return Err(Error::LogIntegrability(mean));
    }
    let zeros = zeros.to_vec();
    let blaschke = Mvf::new(1, true, move |z| {
        let v = zeros
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, &z0| acc * crate::blaschke::beta(z0, z));
        CMat::diag(&[v])
    });
    let masses = singular_masses.to_vec();
    let singular = Mvf::new(1, true, move |z| {
        let e: C64 = masses
            .iter()
            .map(|&(th, m)| herglotz_kernel(z, th) * re(m))
            .sum();
        CMat::diag(&[e.exp()])
    });
    let lm = boundary_log_modulus;
    let outer = Mvf::new(1, false, move |z| {
        // Trapezoid over the circle; sample count grows as the evaluation
        // point approaches the boundary so the Poisson peak is resolved.
        let n = ((64.0 / (1.0 - z.norm())) as usize).clamp(2048, 1 << 17);
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            let phi = TAU * k as f64 / n as f64;
            acc += herglotz_kernel(z, phi) * re(lm(phi));
        }
        let g = acc * re(-1.0 / n as f64);
        CMat::diag(&[g.exp()])
    });
    Ok(ScalarFactorization {
        blaschke,
        singular,
        outer,
    })
}

/// Mass of a point atom of a scalar singular inner function: at
/// `z = r e^{iθ₀}` the kernel value is `-(1+r)/(1-r)`, so the mass is
/// exactly `-log|f| (1-r)/(1+r)` for a pure atom.
pub fn recover_singular_mass(f: &Mvf, angle: f64, r: f64) -> f64 {
    let z = Complex::from_polar(r, angle);
    let v = f.eval(z).entry(0, 0).norm();
    -v.ln() * (1.0 - r) / (1.0 + r)
}

// ---------------------------------------------------------------------------
// Classification and maximality
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    InnerLike,
    OuterLike,
    Mixed,
    Undetermined,
}

/// Classifies by the determinant: inner-like when `|det A|` approaches 1 on
/// sampled near-boundary circles, outer-like when `log|det A(0)|` matches
/// the sampled boundary mean of the log-modulus (the atoms that reconcile
/// the two for inner functions are invisible to finite sampling, which is
/// what makes the test discriminating).
pub fn classify_by_det(a: &Mvf) -> Classification {
    let samples = 64usize;
    let r = 0.999;
    let mut unit_dev = 0.0;
    let mut log_mean = 0.0;
    for k in 0..samples {
        let phi = TAU * (k as f64 + 0.31) / samples as f64;
        let d = a.eval(Complex::from_polar(r, phi)).det().norm();
        unit_dev += (1.0 - d).abs();
        log_mean += d.max(1e-300).ln();
    }
    unit_dev /= samples as f64;
    log_mean /= samples as f64;
    let log_at_zero = a.eval(C64::new(0.0, 0.0)).det().norm().max(1e-300).ln();
    let inner_like = unit_dev <= 0.05;
    let outer_like = (log_at_zero - log_mean).abs() <= 1e-3 * (1.0 + log_at_zero.abs());
    match (inner_like, outer_like) {
        (true, false) => Classification::InnerLike,
        (false, true) => Classification::OuterLike,
        (false, false) => Classification::Mixed,
        (true, true) => Classification::Undetermined,
    }
}

/// Maximality of outer functions among all functions with the same boundary
/// Gram data: checks `B*B = A*A` on near-boundary samples (the caller's
/// precondition) and then `A*A - B*B >= 0` on an interior grid.
pub fn outer_maximality_check(
    a: &Mvf,
    b: &Mvf,
    boundary_r: f64,
    boundary_tol: f64,
) -> Result<bool> {
    let mut worst = 0.0_f64;
    for k in 0..32 {
        let z = Complex::from_polar(boundary_r, TAU * (k as f64 + 0.17) / 32.0);
        let av = a.eval(z);
        let bv = b.eval(z);
        let gap = av
            .adjoint()
            .mul(&av)
            .sub(&bv.adjoint().mul(&bv))
            .spectral_norm();
        worst = worst.max(gap);
    }
    if worst > boundary_tol {
        return Err(Error::BoundaryMismatch(worst, boundary_tol));
    }
    for j in 0..=8 {
        for k in 0..8 {
            let z = Complex::from_polar(0.8 * j as f64 / 8.0, TAU * (k as f64 + 0.43) / 8.0);
            let av = a.eval(z);
            let bv = b.eval(z);
            let diff = av.adjoint().mul(&av).sub(&bv.adjoint().mul(&bv));
            if !diff.is_positive(1e-7) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Non-uniqueness demonstration
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct NonUniquenessReport {
    /// Sup over the evaluation grid of the gap between the two functions.
    pub function_gap: f64,
    /// `sup_t ‖E₁(t) - E₂(t)‖`; attained at `t = 1/2` with value 1/4.
    pub integrator_gap: f64,
    /// Gap to the closed form `e^{(z+1)/(2(z-1))} I` on the grid.
    pub closed_form_gap: f64,
}

/// Two distinct increasing integrators, `E₁(t) = diag(t²/2, t - t²/2)` and
/// its swap, generate the same pp-inner function with angle 0.
pub fn nonuniqueness_demo(tol: f64) -> Result<NonUniquenessReport> {
    let spec_for = |swap: bool| -> PpInnerSpec {
        let density = DensityFn::from_closure(move |t: f64| {
            let (a, b) = if swap { (1.0 - t, t) } else { (t, 1.0 - t) };
            CMat::diag(&[re(a), re(b)])
        });
        PpInnerSpec {
            tail_unitary: CMat::identity(2),
            blocks: vec![PpBlock {
                length: 1.0,
                theta: 0.0,
                integrator: IntegratorSpec::Density {
                    domain: (0.0, 1.0),
                    dim: 2,
                    density,
                },
            }],
        }
    };
    let s1 = spec_for(false);
    let s2 = spec_for(true);
    s1.validate()?;
    s2.validate()?;
    let mut function_gap = 0.0_f64;
    let mut closed_form_gap = 0.0_f64;
    for j in 0..50 {
        let z = Complex::from_polar(
            0.8 * (j % 10) as f64 / 10.0,
            TAU * (j as f64 + 0.5) / 50.0,
        );
        let v1 = eval_pp_inner(&s1, z, tol)?;
        let v2 = eval_pp_inner(&s2, z, tol)?;
        function_gap = function_gap.max(v1.sub(&v2).spectral_norm());
        let c = ((z + re(1.0)) / (re(2.0) * (z - re(1.0)))).exp();
        closed_form_gap = closed_form_gap.max(v1.sub(&CMat::identity(2).scale(c)).spectral_norm());
    }
    // E₁(t) - E₂(t) = diag(t² - t, t - t²): sup over a fine grid.
    let mut integrator_gap = 0.0_f64;
    for k in 0..=200 {
        let t = k as f64 / 200.0;
        integrator_gap = integrator_gap.max((t * t - t).abs());
    }
    Ok(NonUniquenessReport {
        function_gap,
        integrator_gap,
        closed_form_gap,
    })
}
