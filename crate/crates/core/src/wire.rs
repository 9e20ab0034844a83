//! Serializable function classes: a single wire format for every analytic
//! matrix function the tools can evaluate, shared by the CLI and the Python
//! bindings.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::blaschke::{BPProduct, BPProductJson};
use crate::error::{Error, Result};
use crate::factor::{eval_sc_inner, OuterSpec, PpBlock, PpInnerSpec, ScInnerSpec};
use crate::matcore::{C64, CMat};
use crate::mvf::Mvf;
use crate::potapov::{repr_eval, CayleyData, CayleyDataJson, PotapovRepr, PotapovReprJson};
use crate::prodint::{IntegratorSpecJson, MatJson};

/// Serializable analytic matrix functions accepted wherever a command needs
/// an evaluable handle.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpecJson {
    Constant {
        value: MatJson,
    },
    BpProduct(BPProductJson),
    PotapovRepr(PotapovReprJson),
    Cayley(CayleyDataJson),
    PpInner {
        tail_unitary: MatJson,
        blocks: Vec<PpBlockJson>,
    },
    ScInner {
        tail_unitary: MatJson,
        integrator: IntegratorSpecJson,
    },
    /// Outer function with density `M(φ) = Σ_k coeffs[k] φ^k` on `[0, 2π]`.
    OuterPoly {
        tail_unitary: MatJson,
        coeffs: Vec<MatJson>,
        lower_bound: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PpBlockJson {
    pub length: f64,
    pub theta: f64,
    pub integrator: IntegratorSpecJson,
}

impl FunctionSpecJson {
    pub fn to_mvf(&self, tol: f64) -> Result<Mvf> {
        match self {
            FunctionSpecJson::Constant { value } => Ok(Mvf::constant(value.to_cmat()?, false)),
            FunctionSpecJson::BpProduct(j) => Ok(BPProduct::from_json(j)?.as_mvf()),
            FunctionSpecJson::PotapovRepr(j) => {
                let r = PotapovRepr {
                    breakpoints: j.breakpoints.clone(),
                    angles: j.angles.clone(),
                    jumps: j.jumps.iter().map(|m| m.to_cmat()).collect::<Result<_>>()?,
                    tail_unitary: j.tail_unitary.to_cmat()?,
                };
                r.integrator()?; // validates breakpoints and jump positivity
                let dim = r.dim();
                Ok(Mvf::new(dim, true, move |z| {
                    repr_eval(&r, z).expect("step-data evaluation")
                }))
            }
            FunctionSpecJson::Cayley(j) => {
                let d = CayleyData {
                    w: C64::new(j.w[0], j.w[1]),
                    t0: j.t0.to_cmat()?,
                    angles: j.angles.clone(),
                    masses: j.masses.iter().map(|m| m.to_cmat()).collect::<Result<_>>()?,
                };
                d.validate()?;
                let dim = d.t0.dim();
                Ok(Mvf::new(dim, true, move |z| {
                    d.a_eval(z).expect("Cayley evaluation")
                }))
            }
            FunctionSpecJson::PpInner { .. } => Ok(self.to_pp_inner()?.as_mvf(tol)),
            FunctionSpecJson::ScInner { .. } => {
                let s = self.to_sc_inner()?;
                let dim = s.dim();
                Ok(Mvf::new(dim, true, move |z| {
                    eval_sc_inner(&s, z, tol).expect("sc-inner evaluation")
                }))
            }
            FunctionSpecJson::OuterPoly { .. } => Ok(self.to_outer()?.as_mvf(tol)),
        }
    }

    pub fn to_pp_inner(&self) -> Result<PpInnerSpec> {
        match self {
            FunctionSpecJson::PpInner {
                tail_unitary,
                blocks,
            } => {
                let spec = PpInnerSpec {
                    tail_unitary: tail_unitary.to_cmat()?,
                    blocks: blocks
                        .iter()
                        .map(|b| {
                            Ok(PpBlock {
                                length: b.length,
                                theta: b.theta,
                                integrator: b.integrator.to_spec()?,
                            })
                        })
                        .collect::<Result<_>>()?,
                };
                spec.validate()?;
                Ok(spec)
            }
            _ => Err(Error::MalformedSpec("expected a pp_inner function".into())),
        }
    }

    pub fn to_sc_inner(&self) -> Result<ScInnerSpec> {
        match self {
            FunctionSpecJson::ScInner {
                tail_unitary,
                integrator,
            } => {
                let spec = ScInnerSpec {
                    tail_unitary: tail_unitary.to_cmat()?,
                    integrator: integrator.to_spec()?,
                };
                spec.validate()?;
                Ok(spec)
            }
            _ => Err(Error::MalformedSpec("expected an sc_inner function".into())),
        }
    }

    pub fn to_outer(&self) -> Result<OuterSpec> {
        match self {
            FunctionSpecJson::OuterPoly {
                tail_unitary,
                coeffs,
                lower_bound,
            } => {
                if coeffs.is_empty() {
                    return Err(Error::MalformedSpec(
                        "outer density needs coefficients".into(),
                    ));
                }
                let mats: Vec<CMat> = coeffs.iter().map(|m| m.to_cmat()).collect::<Result<_>>()?;
                let dim = mats[0].dim();
                if mats.iter().any(|m| m.dim() != dim) {
                    return Err(Error::MalformedSpec(
                        "density coefficient dims differ".into(),
                    ));
                }
                let spec = OuterSpec {
                    tail_unitary: tail_unitary.to_cmat()?,
                    density: Arc::new(move |phi: f64| {
                        let mut acc = CMat::zeros(dim);
                        let mut p = 1.0;
                        for c in &mats {
                            acc = acc.add(&c.scale(Complex::new(p, 0.0)));
                            p *= phi;
                        }
                        acc
                    }),
                    dim,
                    lower_bound: *lower_bound,
                };
                spec.validate()?;
                Ok(spec)
            }
            _ => Err(Error::MalformedSpec("expected an outer_poly function".into())),
        }
    }
}
