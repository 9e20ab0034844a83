//! The constructive side of the fundamental representation theorem for inner
//! matrix functions: Cayley transform, Herglotz-mass extraction, rational
//! boundary-unitary approximants, and the conversion of a finite
//! Blaschke-Potapov product into multiplicative-integral step data.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::blaschke::BPProduct;
use crate::error::{Error, Result};
use crate::matcore::{re, C64, CMat};
use crate::mvf::Mvf;
use crate::prodint::{herglotz_kernel, IntegratorSpec, KernelSpec, MatJson, ThetaFn};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Cayley transform `T(z) = i (wI - A(z))^{-1} (wI + A(z))`; maps
/// contractions to functions with positive semidefinite imaginary part.
pub fn cayley_forward(a: &Mvf, z: C64, w: C64) -> Result<CMat> {
    let n = a.dim();
    let az = a.eval(z);
    let wi = CMat::identity(n).scale(w);
    let inv = wi.sub(&az).inverse().ok_or(Error::SingularCayley)?;
    Ok(inv.mul(&wi.add(&az)).scale(C64::new(0.0, 1.0)))
}

/// Algebraic inverse of the Cayley transform: `A = w (T - iI)(T + iI)^{-1}`.
pub fn cayley_inverse(t: &CMat, w: C64) -> Result<CMat> {
    let n = t.dim();
    let i_mat = CMat::identity(n).scale(C64::new(0.0, 1.0));
    let inv = t.add(&i_mat).inverse().ok_or(Error::SingularCayley)?;
    Ok(t.sub(&i_mat).mul(&inv).scale(w))
}

/// Picks the rotation `w` among `n + 1` equally spaced unimodular candidates
/// maximizing `|det(wI - A(0))|`; at most `n` eigenvalues of `A(0)` can
/// collide with candidates, so one always works.
pub fn choose_w(a: &Mvf) -> C64 {
    let n = a.dim();
    let a0 = a.eval(C64::new(0.0, 0.0));
    let mut best = (f64::NEG_INFINITY, C64::new(1.0, 0.0));
    for j in 0..=n {
        let w = Complex::from_polar(1.0, TAU * j as f64 / (n + 1) as f64);
        let d = CMat::identity(n).scale(w).sub(&a0).det().norm();
        if d > best.0 {
            best = (d, w);
        }
    }
    best.1
}

/// Cumulative Herglotz masses extracted on a circle of radius `r`.
#[derive(Clone, Debug)]
pub struct HerglotzMasses {
    /// Cell edges `0 = s_0 < … < s_N = 2π`.
    pub edges: Vec<f64>,
    /// Positive increment of σ over each cell.
    pub increments: Vec<CMat>,
}

impl HerglotzMasses {
    /// `σ(edges[i])`, cumulative from 0.
    pub fn cumulative(&self) -> Vec<CMat> {
        let dim = self.increments.first().map_or(1, |m| m.dim());
        let mut acc = CMat::zeros(dim);
        let mut out = vec![acc.clone()];
        for inc in &self.increments {
            acc = acc.add(inc);
            out.push(acc.clone());
        }
        out
    }

    pub fn total(&self) -> CMat {
        self.cumulative().last().unwrap().clone()
    }
}

/// Extracts `σ^{(r)}(t) = (1/2π) ∫₀ᵗ Im T(r e^{is}) ds` by trapezoid
/// quadrature on `num_angles` cells. Fails if `Im T` dips below `-1e-9` on
/// the sample circle.
pub fn herglotz_extract(t: &Mvf, r: f64, num_angles: usize) -> Result<HerglotzMasses> {
    extract_on_edges(
        t,
        r,
        &(0..=num_angles)
            .map(|k| TAU * k as f64 / num_angles as f64)
            .collect::<Vec<_>>(),
    )
}

fn extract_on_edges(t: &Mvf, r: f64, edges: &[f64]) -> Result<HerglotzMasses> {
    let dim = t.dim();
    let im_at = |s: f64| t.eval(Complex::from_polar(r, s)).im_part();
    let mut min_eig = f64::INFINITY;
    let mut increments = Vec::with_capacity(edges.len() - 1);
    // Trapezoid subsampling per cell; positive semidefiniteness is preserved
    // because every sample is PSD up to tolerance. The Poisson peak width is
    // (1 - r), so the sample spacing must stay a fraction of it or near-atom
    // mass is badly misestimated.
    for w in edges.windows(2) {
        let sub = (8.0 * (w[1] - w[0]) / (1.0 - r)).ceil().max(8.0) as usize;
        let h = (w[1] - w[0]) / sub as f64;
        let mut acc = CMat::zeros(dim);
        for j in 0..=sub {
            let v = im_at(w[0] + h * j as f64);
            min_eig = min_eig.min(v.herm_eigenvalues()[0]);
            let weight = if j == 0 || j == sub { 0.5 } else { 1.0 };
            acc = acc.add(&v.scale(re(weight)));
        }
        increments.push(acc.scale(re(h / TAU)));
    }
    if min_eig < -1e-9 {
        return Err(Error::NegativeImaginaryPart(min_eig));
    }
    Ok(HerglotzMasses {
        edges: edges.to_vec(),
        increments,
    })
}

/// Discrete Herglotz data defining a rational boundary-unitary approximant.
#[derive(Clone, Debug)]
pub struct CayleyData {
    /// Unimodular rotation with `det(wI - A(0)) != 0`.
    pub w: C64,
    /// Hermitian offset `Re T(0)`.
    pub t0: CMat,
    /// Atom angles in `[0, 2π)`, nondecreasing.
    pub angles: Vec<f64>,
    /// Positive jumps of σ at the atoms.
    pub masses: Vec<CMat>,
}

impl CayleyData {
    pub fn validate(&self) -> Result<()> {
        if (self.w.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::MalformedSpec(format!(
                "rotation not unimodular: |w| = {}",
                self.w.norm()
            )));
        }
        if self.angles.len() != self.masses.len() {
            return Err(Error::MalformedSpec("angle/mass count mismatch".into()));
        }
        for m in &self.masses {
            if !m.is_positive(1e-10 * m.spectral_norm().max(1.0)) {
                return Err(Error::MalformedSpec("mass not positive".into()));
            }
        }
        Ok(())
    }

    /// `T_k(z) = T0 + i Σ (e^{it_ν} + z)/(e^{it_ν} - z) Δσ_ν`.
    pub fn t_eval(&self, z: C64) -> CMat {
        let mut acc = self.t0.clone();
        for (th, m) in self.angles.iter().zip(&self.masses) {
            let e = Complex::from_polar(1.0, *th);
            let kernel = (e + z) / (e - z);
            acc = acc.add(&m.scale(C64::new(0.0, 1.0) * kernel));
        }
        acc
    }

    /// `A_k(z) = w (T_k - iI)(T_k + iI)^{-1}`, contractive in the disk and
    /// unitary on the circle.
    pub fn a_eval(&self, z: C64) -> Result<CMat> {
        cayley_inverse(&self.t_eval(z), self.w)
    }

    pub fn to_json(&self) -> CayleyDataJson {
        CayleyDataJson {
            w: [self.w.re, self.w.im],
            t0: MatJson::from_cmat(&self.t0),
            angles: self.angles.clone(),
            masses: self.masses.iter().map(MatJson::from_cmat).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CayleyDataJson {
    pub w: [f64; 2],
    pub t0: MatJson,
    pub angles: Vec<f64>,
    pub masses: Vec<MatJson>,
}

/// Rational approximant at index `k`, certified to track the Cayley
/// transform within `1/k` on the disk of radius `1 - 2^{-k-1}`.
#[derive(Clone, Debug)]
pub struct RationalApproximant {
    pub cayley: CayleyData,
    pub k: u32,
    pub radius: f64,
    /// Measured sup of `‖T - T_k‖` on the certification grid.
    pub certified_gap: f64,
}

impl RationalApproximant {
    pub fn eval(&self, z: C64) -> Result<CMat> {
        self.cayley.a_eval(z)
    }
}

/// Builds the index-`k` rational approximant of a contractive function:
/// extracts Herglotz masses at radius `r_k = 1 - 2^{-k-1}` and refines the
/// angle partition (bisecting the heaviest cells) until `‖T - T_k‖ <= 1/k`
/// on a 16x16 polar grid of the `r_k` disk.
pub fn rational_approximant(a: &Mvf, k: u32) -> Result<RationalApproximant> {
    assert!(k >= 1);
    let w = choose_w(a);
    let t_handle = {
        let a = a.clone();
        Mvf::new(a.dim(), false, move |z| {
            cayley_forward(&a, z, w).expect("rotation chosen off the spectrum")
        })
    };
    let rk = 1.0 - f64::powi(2.0, -(k as i32) - 1);
    let target = 1.0 / k as f64;
    let t0 = t_handle.eval(C64::new(0.0, 0.0)).herm_part();

    // Certification grid: 16 radii x 16 angles, offset to dodge atoms.
    let grid: Vec<C64> = (1..=16)
        .flat_map(|j| {
            (0..16).map(move |m| {
                Complex::from_polar(rk * j as f64 / 16.0, TAU * (m as f64 + 0.37) / 16.0)
            })
        })
        .collect();

    let mut edges: Vec<f64> = (0..=32).map(|j| TAU * j as f64 / 32.0).collect();
    loop {
        let masses = extract_on_edges(&t_handle, rk, &edges)?;
        let angles: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let data = CayleyData {
            w,
            t0: t0.clone(),
            angles,
            masses: masses.increments.clone(),
        };
        let mut sup: f64 = 0.0;
        for &z in &grid {
            let gap = t_handle.eval(z).sub(&data.t_eval(z)).spectral_norm();
            sup = sup.max(gap);
        }
        if sup <= target {
            return Ok(RationalApproximant {
                cayley: data,
                k,
                radius: rk,
                certified_gap: sup,
            });
        }
        if edges.len() - 1 >= 1 << 14 {
            return Err(Error::PartitionBudget {
                achieved: sup,
                target,
            });
        }
        // Bisect every cell whose mass is within half of the heaviest;
        // geometric progress without rebuilding one cell at a time.
        let norms: Vec<f64> = masses
            .increments
            .iter()
            .map(|m| m.spectral_norm())
            .collect();
        let top = norms.iter().cloned().fold(0.0_f64, f64::max);
        let mut new_edges = Vec::with_capacity(edges.len() * 2);
        for (i, w2) in edges.windows(2).enumerate() {
            new_edges.push(w2[0]);
            if norms[i] >= 0.5 * top {
                new_edges.push(0.5 * (w2[0] + w2[1]));
            }
        }
        new_edges.push(TAU);
        edges = new_edges;
    }
}

/// Step data `(θ_j, H_j, t_j)` of a finite product: `H_j = (1 - |z_j|) P_j`,
/// breakpoints are cumulative traces, and the piecewise-linear interpolant
/// `E` of the cumulative sums satisfies `tr E(t) = t`.
#[derive(Clone, Debug)]
pub struct PotapovRepr {
    /// `t_0 = 0 <= … <= t_m = L`.
    pub breakpoints: Vec<f64>,
    /// Angle per step, nondecreasing in `[0, 2π)`.
    pub angles: Vec<f64>,
    /// Positive jump matrices with `tr H_j = t_j - t_{j-1}`.
    pub jumps: Vec<CMat>,
    pub tail_unitary: CMat,
}

impl PotapovRepr {
    pub fn length(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn dim(&self) -> usize {
        self.tail_unitary.dim()
    }

    /// Piecewise-linear integrator with `E(t_j) = Σ_{ν<=j} H_ν`.
    pub fn integrator(&self) -> Result<IntegratorSpec> {
        let dim = self.dim();
        let mut values = vec![CMat::zeros(dim)];
        let mut acc = CMat::zeros(dim);
        for h in &self.jumps {
            acc = acc.add(h);
            values.push(acc.clone());
        }
        let spec = IntegratorSpec::PiecewiseLinear {
            breakpoints: self.breakpoints.clone(),
            values,
            increasing: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Step angle function paired with the evaluation point `z`.
    pub fn kernel_for(&self, z: C64) -> KernelSpec {
        KernelSpec::Herglotz {
            z,
            theta: ThetaFn::Steps {
                starts: self.breakpoints[..self.breakpoints.len() - 1].to_vec(),
                values: self.angles.clone(),
            },
        }
    }

    pub fn to_json(&self) -> PotapovReprJson {
        PotapovReprJson {
            breakpoints: self.breakpoints.clone(),
            angles: self.angles.clone(),
            jumps: self.jumps.iter().map(MatJson::from_cmat).collect(),
            tail_unitary: MatJson::from_cmat(&self.tail_unitary),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotapovReprJson {
    pub breakpoints: Vec<f64>,
    pub angles: Vec<f64>,
    pub jumps: Vec<MatJson>,
    pub tail_unitary: MatJson,
}

/// Converts a finite product into step data. Zeros must be nonzero and
/// sorted by nondecreasing angle.
pub fn bp_to_repr(b: &BPProduct) -> Result<PotapovRepr> {
    let mut breakpoints = vec![0.0];
    let mut angles = Vec::new();
    let mut jumps = Vec::new();
    let mut t = 0.0;
    let mut last_angle = f64::NEG_INFINITY;
    for f in b.factors() {
        let z = f.zero();
        let rho = z.norm();
        if rho < 1e-12 {
            return Err(Error::ZeroAtOrigin);
        }
        let theta = z.arg().rem_euclid(TAU);
        if theta < last_angle - 1e-12 {
            return Err(Error::UnsortedAngles);
        }
        last_angle = last_angle.max(theta);
        let h = f.projection().scale(re(1.0 - rho));
        t += h.trace().re;
        breakpoints.push(t);
        angles.push(theta);
        jumps.push(h);
    }
    Ok(PotapovRepr {
        breakpoints,
        angles,
        jumps,
        tail_unitary: b.tail_unitary().clone(),
    })
}

/// Evaluates the step-data representation: the multiplicative integral
/// reduces exactly to the finite product `∏ exp(h_z(θ_j) H_j)` times the
/// tail, because the kernel is constant on each segment.
pub fn repr_eval(r: &PotapovRepr, z: C64) -> Result<CMat> {
    if z.norm() >= 1.0 {
        return Err(Error::OutOfDomain(z.norm(), 0.0, 1.0));
    }
    let mut acc = CMat::identity(r.dim());
    for (th, h) in r.angles.iter().zip(&r.jumps) {
        acc = acc.mul(&h.scale(herglotz_kernel(z, *th)).mat_exp()?);
    }
    Ok(acc.mul(&r.tail_unitary))
}

/// Same value through the generic product-integral engine; used to
/// cross-check [`repr_eval`].
pub fn repr_eval_via_prodint(r: &PotapovRepr, z: C64, tol: f64) -> Result<CMat> {
    if r.length() == 0.0 {
        return Ok(r.tail_unitary.clone());
    }
    let p = crate::prodint::prod_integral(&r.kernel_for(z), &r.integrator()?, tol)?;
    Ok(p.value.mul(&r.tail_unitary))
}

/// Sup-norm gap between a finite product and its modified (exponential-step)
/// form on the grid `|z| <= r`, together with the a priori bound
/// `C · M(r) · max(1 - |z_ν|)` where `C = Σ (1 - |z_ν|)` and
/// `M(r) = 2/(1-r)² · e^{C(1+r)/(1-r)} · max(1, 2 e^{C(1+r)/(1-r)})`.
///
/// The grid radius is clamped below the smallest zero modulus so the disk is
/// zero-free.
pub fn modified_product_error(b: &BPProduct, r: &PotapovRepr, grid_radius: f64) -> Result<(f64, f64)> {
    if b.factors().is_empty() {
        return Ok((0.0, 0.0));
    }
    let min_rho = b
        .factors()
        .iter()
        .map(|f| f.zero().norm())
        .fold(f64::INFINITY, f64::min);
    let gr = grid_radius.min(0.9 * min_rho);
    let mut measured: f64 = 0.0;
    for j in 0..=12 {
        for m in 0..24 {
            let z = Complex::from_polar(gr * j as f64 / 12.0, TAU * (m as f64 + 0.21) / 24.0);
            let gap = b.eval(z).sub(&repr_eval(r, z)?).spectral_norm();
            measured = measured.max(gap);
        }
    }
    let c: f64 = b.blaschke_sum();
    let max_gap = b
        .factors()
        .iter()
        .map(|f| 1.0 - f.zero().norm())
        .fold(0.0_f64, f64::max);
    let e = (c * (1.0 + gr) / (1.0 - gr)).exp();
    let m_r = 2.0 / ((1.0 - gr) * (1.0 - gr)) * e * (2.0 * e).max(1.0);
    Ok((measured, c * m_r * max_gap))
}
