//! Multiplicative (product) integrals over tagged partitions.
//!
//! The central object is the net limit of ordered products
//! `exp(f(tag_1) ΔE_1) · exp(f(tag_2) ΔE_2) · …` over refining tagged
//! partitions of the integrator's domain. [`engine::prod_integral`] computes
//! the limit with a runtime error certificate; the rest of the module provides
//! the companion identities (splitting, determinant, Gram, norm and Taylor
//! estimates, change of variables) as checkable computations.

pub mod engine;
pub mod spec;

pub use engine::{
    change_of_variables, det_certificate, gram_product, helly_convergence_harness,
    norm_certificate, ode_integral, prod_integral, riemann_product, split_product,
    taylor_certificate, telescoping_residual, telescoping_sum, variation, HellyReport,
    MapNode, MonotoneMap, ProdIntResult, ProdIntResultJson, SplitReport, TaggedPartition,
    TaylorReport,
};
pub use spec::{
    cantor_value, herglotz_kernel, DensityFn, IntegratorSpec, IntegratorSpecJson, KernelSpec,
    KernelSpecJson, MatJson, ThetaFn, ThetaJson,
};
