//! Integrator and kernel specifications plus their JSON wire format.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{C64, CMat};

/// Finite-depth Cantor function approximant on `[0, 1]`.
///
/// Sup-distance to the true Cantor function is `2^-depth`.
pub fn cantor_value(x: f64, depth: u32) -> f64 {
    let mut x = x.clamp(0.0, 1.0);
    let mut value = 0.0;
    let mut scale = 1.0;
    for _ in 0..depth {
        x *= 3.0;
        if x < 1.0 {
            scale *= 0.5;
        } else if x <= 2.0 {
            return value + 0.5 * scale;
        } else {
            value += 0.5 * scale;
            x -= 2.0;
            scale *= 0.5;
        }
    }
    value + scale * x
}

/// The Herglotz kernel `h_z(theta) = (z + e^{i theta}) / (z - e^{i theta})`.
pub fn herglotz_kernel(z: C64, theta: f64) -> C64 {
    let e = Complex::from_polar(1.0, theta);
    (z + e) / (z - e)
}

/// Matrix-valued density together with an optional polynomial description
/// used for serialization.
#[derive(Clone)]
pub struct DensityFn {
    f: Arc<dyn Fn(f64) -> CMat + Send + Sync>,
    poly: Option<Vec<CMat>>,
}

impl DensityFn {
    pub fn from_closure(f: impl Fn(f64) -> CMat + Send + Sync + 'static) -> Self {
        DensityFn {
            f: Arc::new(f),
            poly: None,
        }
    }

    /// `M(t) = sum_k coeffs[k] t^k`.
    pub fn from_poly(coeffs: Vec<CMat>) -> Self {
        assert!(!coeffs.is_empty());
        let c = coeffs.clone();
        DensityFn {
            f: Arc::new(move |t| {
                let mut acc = CMat::zeros(c[0].dim());
                let mut p = 1.0;
                for coef in &c {
                    acc = acc.add(&coef.scale(C64::new(p, 0.0)));
                    p *= t;
                }
                acc
            }),
            poly: Some(coeffs),
        }
    }

    pub fn eval(&self, t: f64) -> CMat {
        (self.f)(t)
    }

    pub fn poly_coeffs(&self) -> Option<&[CMat]> {
        self.poly.as_deref()
    }
}

impl std::fmt::Debug for DensityFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DensityFn(poly: {})", self.poly.is_some())
    }
}

/// Symbolic description of a matrix-valued integrator `E(t)`.
#[derive(Clone, Debug)]
pub enum IntegratorSpec {
    /// Pure jump integrator: `E(t) = sum of jumps at points <= t`, `E(a) = 0`.
    Step {
        domain: (f64, f64),
        jump_points: Vec<f64>,
        jumps: Vec<CMat>,
        increasing: bool,
    },
    /// Node values of `E` at breakpoints, linearly interpolated.
    PiecewiseLinear {
        breakpoints: Vec<f64>,
        values: Vec<CMat>,
        increasing: bool,
    },
    /// Absolutely continuous integrator with density `M`: `E(t) = ∫_a^t M`.
    Density {
        domain: (f64, f64),
        dim: usize,
        density: DensityFn,
    },
    /// `E(t) = CantorFunction_depth((t - a)/(b - a)) · scale`.
    CantorSingular {
        domain: (f64, f64),
        scale: CMat,
        depth: u32,
    },
}

impl IntegratorSpec {
    pub fn domain(&self) -> (f64, f64) {
        match self {
            IntegratorSpec::Step { domain, .. } => *domain,
            IntegratorSpec::PiecewiseLinear { breakpoints, .. } => {
                (breakpoints[0], *breakpoints.last().unwrap())
            }
            IntegratorSpec::Density { domain, .. } => *domain,
            IntegratorSpec::CantorSingular { domain, .. } => *domain,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            IntegratorSpec::Step { jumps, .. } => jumps.first().map_or(1, |j| j.dim()),
            IntegratorSpec::PiecewiseLinear { values, .. } => values[0].dim(),
            IntegratorSpec::Density { dim, .. } => *dim,
            IntegratorSpec::CantorSingular { scale, .. } => scale.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.domain();
        if !(a <= b) {
            return Err(Error::InvalidIntegrator(format!("bad domain [{a}, {b}]")));
        }
        match self {
            IntegratorSpec::Step {
                jump_points,
                jumps,
                increasing,
                ..
            } => {
                if jump_points.len() != jumps.len() {
                    return Err(Error::InvalidIntegrator(
                        "jump point / jump matrix count mismatch".into(),
                    ));
                }
                if jump_points.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::InvalidIntegrator("jump points not sorted".into()));
                }
                let n = self.dim();
                for j in jumps {
                    if j.dim() != n {
                        return Err(Error::DimensionMismatch("jump matrix dim".into()));
                    }
                    if !j.is_hermitian(crate::matcore::hermitian_tol(j)) {
                        return Err(Error::InvalidIntegrator("jump not Hermitian".into()));
                    }
                    if *increasing && !j.is_positive(1e-12 * j.spectral_norm().max(1.0)) {
                        return Err(Error::InvalidIntegrator(
                            "increasing flag set but jump not positive".into(),
                        ));
                    }
                }
            }
            IntegratorSpec::PiecewiseLinear {
                breakpoints,
                values,
                increasing,
            } => {
                if breakpoints.len() != values.len() || breakpoints.len() < 2 {
                    return Err(Error::InvalidIntegrator(
                        "need matching breakpoints/values, at least two nodes".into(),
                    ));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidIntegrator(
                        "breakpoints must be strictly increasing".into(),
                    ));
                }
                for v in values {
                    if !v.is_hermitian(crate::matcore::hermitian_tol(v).max(1e-12)) {
                        return Err(Error::InvalidIntegrator("node value not Hermitian".into()));
                    }
                }
                if *increasing {
                    for w in values.windows(2) {
                        let d = w[1].sub(&w[0]);
                        if !d.is_positive(1e-12 * d.spectral_norm().max(1.0)) {
                            return Err(Error::InvalidIntegrator(
                                "increasing flag set but differences not positive".into(),
                            ));
                        }
                    }
                }
            }
            IntegratorSpec::Density { .. } => {}
            IntegratorSpec::CantorSingular { scale, .. } => {
                if !scale.is_positive(1e-10 * scale.spectral_norm().max(1.0)) {
                    return Err(Error::InvalidIntegrator("cantor scale must be >= 0".into()));
                }
            }
        }
        Ok(())
    }

    /// `E(t)` for the point-evaluable variants. Density integrators are
    /// integrated on demand by the engine and have no closed node form here.
    pub fn eval(&self, t: f64) -> Result<CMat> {
        let (a, b) = self.domain();
        if t < a - 1e-12 || t > b + 1e-12 {
            return Err(Error::OutOfDomain(t, a, b));
        }
        match self {
            IntegratorSpec::Step {
                jump_points, jumps, ..
            } => {
                let mut acc = CMat::zeros(self.dim());
                for (p, j) in jump_points.iter().zip(jumps) {
                    if *p <= t {
                        acc = acc.add(j);
                    }
                }
                Ok(acc)
            }
            IntegratorSpec::PiecewiseLinear {
                breakpoints,
                values,
                ..
            } => {
                let k = match breakpoints.partition_point(|&p| p <= t) {
                    0 => 0,
                    k if k >= breakpoints.len() => breakpoints.len() - 2,
                    k => k - 1,
                };
                let (t0, t1) = (breakpoints[k], breakpoints[k + 1]);
                let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                Ok(values[k]
                    .scale(C64::new(1.0 - w, 0.0))
                    .add(&values[k + 1].scale(C64::new(w, 0.0))))
            }
            IntegratorSpec::Density { .. } => Err(Error::InvalidIntegrator(
                "density integrator has no closed point evaluation".into(),
            )),
            IntegratorSpec::CantorSingular {
                domain,
                scale,
                depth,
            } => {
                let u = (t - domain.0) / (domain.1 - domain.0);
                Ok(scale.scale(C64::new(cantor_value(u, *depth), 0.0)))
            }
        }
    }

    /// Points that every partition must contain (integrator kinks and jumps).
    pub fn forced_points(&self) -> Vec<f64> {
        match self {
            IntegratorSpec::Step { jump_points, .. } => jump_points.clone(),
            IntegratorSpec::PiecewiseLinear { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        }
    }
}

/// Scalar integrand specification.
#[derive(Clone, Debug)]
pub enum KernelSpec {
    Constant(C64),
    /// `f(t) = h_z(theta(t))`, `|z| < 1`.
    Herglotz { z: C64, theta: ThetaFn },
    /// Linear interpolation of samples.
    Tabulated { times: Vec<f64>, values: Vec<C64> },
}

/// Angle map fed to the Herglotz kernel.
#[derive(Clone, Debug)]
pub enum ThetaFn {
    /// `theta(t) = t` (integration directly over the angle variable).
    Identity,
    /// Right-continuous increasing step function: `theta(t) = values[i]`
    /// for `starts[i] <= t < starts[i+1]`.
    Steps { starts: Vec<f64>, values: Vec<f64> },
}

impl ThetaFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ThetaFn::Identity => t,
            ThetaFn::Steps { starts, values } => {
                let k = starts.partition_point(|&s| s <= t);
                if k == 0 {
                    values[0]
                } else {
                    values[k - 1]
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ThetaFn::Steps { starts, values } = self {
            if starts.len() != values.len() || starts.is_empty() {
                return Err(Error::InvalidKernel("theta step data mismatch".into()));
            }
            if starts.windows(2).any(|w| w[0] >= w[1])
                || values.windows(2).any(|w| w[0] > w[1])
            {
                return Err(Error::InvalidKernel("theta data must be increasing".into()));
            }
            if values
                .iter()
                .any(|&v| !(0.0..=2.0 * std::f64::consts::PI + 1e-12).contains(&v))
            {
                return Err(Error::InvalidKernel("theta values outside [0, 2pi]".into()));
            }
        }
        Ok(())
    }
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Constant(_) => Ok(()),
            KernelSpec::Herglotz { z, theta } => {
                if z.norm() >= 1.0 {
                    return Err(Error::InvalidKernel(format!("|z| = {} >= 1", z.norm())));
                }
                theta.validate()
            }
            KernelSpec::Tabulated { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return Err(Error::InvalidKernel("tabulated kernel needs >= 2 samples".into()));
                }
                if times.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidKernel("sample times must increase".into()));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, t: f64) -> C64 {
        match self {
            KernelSpec::Constant(c) => *c,
            KernelSpec::Herglotz { z, theta } => herglotz_kernel(*z, theta.eval(t)),
            KernelSpec::Tabulated { times, values } => {
                if t <= times[0] {
                    return values[0];
                }
                if t >= *times.last().unwrap() {
                    return *values.last().unwrap();
                }
                let k = times.partition_point(|&p| p <= t) - 1;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                values[k] * C64::new(1.0 - w, 0.0) + values[k + 1] * C64::new(w, 0.0)
            }
        }
    }

    /// Discontinuity locations the partition must respect.
    pub fn forced_points(&self) -> Vec<f64> {
        match self {
            KernelSpec::Constant(_) => Vec::new(),
            KernelSpec::Herglotz { theta, .. } => match theta {
                ThetaFn::Identity => Vec::new(),
                ThetaFn::Steps { starts, .. } => starts.clone(),
            },
            KernelSpec::Tabulated { times, .. } => times.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// JSON wire format (schema version 1)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatJson {
    pub fn from_cmat(m: &CMat) -> Self {
        let n = m.dim();
        MatJson {
            re: (0..n)
                .map(|i| (0..n).map(|j| m.entry(i, j).re).collect())
                .collect(),
            im: (0..n)
                .map(|i| (0..n).map(|j| m.entry(i, j).im).collect())
                .collect(),
        }
    }

    pub fn to_cmat(&self) -> Result<CMat> {
        let n = self.re.len();
        if n == 0
            || self.im.len() != n
            || self.re.iter().any(|r| r.len() != n)
            || self.im.iter().any(|r| r.len() != n)
        {
            return Err(Error::MalformedSpec("matrix entries not square".into()));
        }
        Ok(CMat::from_fn(n, |i, j| C64::new(self.re[i][j], self.im[i][j])))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum IntegratorSpecJson {
    Step {
        domain: [f64; 2],
        jump_points: Vec<f64>,
        jumps: Vec<MatJson>,
        #[serde(default)]
        increasing: bool,
    },
    PiecewiseLinear {
        breakpoints: Vec<f64>,
        values: Vec<MatJson>,
        #[serde(default)]
        increasing: bool,
    },
    /// Density `M(t) = sum_k coeffs[k] t^k`.
    DensityPoly {
        domain: [f64; 2],
        coeffs: Vec<MatJson>,
    },
    CantorSingular {
        domain: [f64; 2],
        scale: MatJson,
        depth: u32,
    },
}

impl IntegratorSpecJson {
    pub fn to_spec(&self) -> Result<IntegratorSpec> {
        let spec = match self {
            IntegratorSpecJson::Step {
                domain,
                jump_points,
                jumps,
                increasing,
            } => IntegratorSpec::Step {
                domain: (domain[0], domain[1]),
                jump_points: jump_points.clone(),
                jumps: jumps.iter().map(|m| m.to_cmat()).collect::<Result<_>>()?,
                increasing: *increasing,
            },
            IntegratorSpecJson::PiecewiseLinear {
                breakpoints,
                values,
                increasing,
            } => IntegratorSpec::PiecewiseLinear {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|m| m.to_cmat()).collect::<Result<_>>()?,
                increasing: *increasing,
            },
            IntegratorSpecJson::DensityPoly { domain, coeffs } => {
                let mats: Vec<CMat> = coeffs.iter().map(|m| m.to_cmat()).collect::<Result<_>>()?;
                if mats.is_empty() {
                    return Err(Error::MalformedSpec("density polynomial needs coefficients".into()));
                }
                IntegratorSpec::Density {
                    domain: (domain[0], domain[1]),
                    dim: mats[0].dim(),
                    density: DensityFn::from_poly(mats),
                }
            }
            IntegratorSpecJson::CantorSingular {
                domain,
                scale,
                depth,
            } => IntegratorSpec::CantorSingular {
                domain: (domain[0], domain[1]),
                scale: scale.to_cmat()?,
                depth: *depth,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &IntegratorSpec) -> Result<Self> {
        Ok(match spec {
            IntegratorSpec::Step {
                domain,
                jump_points,
                jumps,
                increasing,
            } => IntegratorSpecJson::Step {
                domain: [domain.0, domain.1],
                jump_points: jump_points.clone(),
                jumps: jumps.iter().map(MatJson::from_cmat).collect(),
                increasing: *increasing,
            },
            IntegratorSpec::PiecewiseLinear {
                breakpoints,
                values,
                increasing,
            } => IntegratorSpecJson::PiecewiseLinear {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(MatJson::from_cmat).collect(),
                increasing: *increasing,
            },
            IntegratorSpec::Density { domain, density, .. } => {
                let coeffs = density.poly_coeffs().ok_or_else(|| {
                    Error::MalformedSpec(
                        "closure-backed density has no serializable form".into(),
                    )
                })?;
                IntegratorSpecJson::DensityPoly {
                    domain: [domain.0, domain.1],
                    coeffs: coeffs.iter().map(MatJson::from_cmat).collect(),
                }
            }
            IntegratorSpec::CantorSingular {
                domain,
                scale,
                depth,
            } => IntegratorSpecJson::CantorSingular {
                domain: [domain.0, domain.1],
                scale: MatJson::from_cmat(scale),
                depth: *depth,
            },
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum KernelSpecJson {
    Constant {
        re: f64,
        im: f64,
    },
    Herglotz {
        z: [f64; 2],
        theta: ThetaJson,
    },
    Tabulated {
        times: Vec<f64>,
        values: Vec<[f64; 2]>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaJson {
    Identity,
    Steps { starts: Vec<f64>, values: Vec<f64> },
}

impl KernelSpecJson {
    pub fn to_spec(&self) -> Result<KernelSpec> {
        let spec = match self {
            KernelSpecJson::Constant { re, im } => KernelSpec::Constant(C64::new(*re, *im)),
            KernelSpecJson::Herglotz { z, theta } => KernelSpec::Herglotz {
                z: C64::new(z[0], z[1]),
                theta: match theta {
                    ThetaJson::Identity => ThetaFn::Identity,
                    ThetaJson::Steps { starts, values } => ThetaFn::Steps {
                        starts: starts.clone(),
                        values: values.clone(),
                    },
                },
            },
            KernelSpecJson::Tabulated { times, values } => KernelSpec::Tabulated {
                times: times.clone(),
                values: values.iter().map(|v| C64::new(v[0], v[1])).collect(),
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &KernelSpec) -> Self {
        match spec {
            KernelSpec::Constant(c) => KernelSpecJson::Constant { re: c.re, im: c.im },
            KernelSpec::Herglotz { z, theta } => KernelSpecJson::Herglotz {
                z: [z.re, z.im],
                theta: match theta {
                    ThetaFn::Identity => ThetaJson::Identity,
                    ThetaFn::Steps { starts, values } => ThetaJson::Steps {
                        starts: starts.clone(),
                        values: values.clone(),
                    },
                },
            },
            KernelSpec::Tabulated { times, values } => KernelSpecJson::Tabulated {
                times: times.clone(),
                values: values.iter().map(|v| [v.re, v.im]).collect(),
            },
        }
    }
}
