//! Command implementations. Each command reads its inputs from the job
//! file's `inputs` subtree and writes JSON/CSV artifacts into the output
//! directory.

use std::path::Path;

use num_complex::Complex;
use serde::Deserialize;
use serde_json::json;

use potint::blaschke::{detach_max, BPFactor, BPFactorJson, BPProduct, BPProductJson};
use potint::factor::{classify_by_det, nonuniqueness_demo, Classification};
use potint::matcore::{C64, CMat};
use potint::potapov::{bp_to_repr, modified_product_error, rational_approximant};
use potint::prodint::{ode_integral, prod_integral, IntegratorSpecJson, KernelSpecJson, MatJson};
use potint::Error;

use crate::emit::{emit_grid, fmt, write_csv, write_json, GridSpec};
use crate::job::{FunctionSpecJson, JobFile};
use crate::CliError;

#[derive(Deserialize)]
struct ProdintInputs {
    kernel: KernelSpecJson,
    integrator: IntegratorSpecJson,
}

pub fn cmd_prodint(job: &JobFile, out: &Path, tol: f64) -> Result<(), CliError> {
    let inputs: ProdintInputs = job.decode_inputs()?;
    let kernel = inputs.kernel.to_spec()?;
    let integrator = inputs.integrator.to_spec()?;
    let r = prod_integral(&kernel, &integrator, tol)?;
    write_json(
        &out.join("result.json"),
        &json!({
            "schema": crate::job::SCHEMA,
            "result": serde_json::to_value(r.to_json()).expect("result json"),
        }),
    )?;
    write_result_csv(&out.join("result.csv"), &r.value, r.error_certificate)?;
    Ok(())
}

#[derive(Deserialize)]
struct OdeInputs {
    #[serde(default)]
    kernel: Option<KernelSpecJson>,
    coeffs: Vec<MatJson>,
    domain: [f64; 2],
    steps: usize,
}

pub fn cmd_ode(job: &JobFile, out: &Path) -> Result<(), CliError> {
    let inputs: OdeInputs = job.decode_inputs()?;
    if inputs.coeffs.is_empty() {
        return Err(Error::MalformedSpec("ode needs density coefficients".into()).into());
    }
    let mats: Vec<CMat> = inputs
        .coeffs
        .iter()
        .map(|m| m.to_cmat())
        .collect::<Result<_, _>>()?;
    let dim = mats[0].dim();
    let kernel = inputs.kernel.map(|k| k.to_spec()).transpose()?;
    let a_fn = move |t: f64| {
        let f = kernel.as_ref().map_or(C64::new(1.0, 0.0), |k| k.eval(t));
        let mut acc = CMat::zeros(dim);
        let mut p = 1.0;
        for c in &mats {
            acc = acc.add(&c.scale(Complex::new(p, 0.0)));
            p *= t;
        }
        acc.scale(f)
    };
    let value = ode_integral(&a_fn, dim, (inputs.domain[0], inputs.domain[1]), inputs.steps)?;
    write_json(
        &out.join("result.json"),
        &json!({
            "schema": crate::job::SCHEMA,
            "value": serde_json::to_value(MatJson::from_cmat(&value)).expect("matrix json"),
            "steps": inputs.steps,
        }),
    )?;
    write_result_csv(&out.join("result.csv"), &value, 0.0)?;
    Ok(())
}

fn write_result_csv(path: &Path, value: &CMat, certificate: f64) -> std::io::Result<()> {
    let n = value.dim();
    let mut header: Vec<String> = Vec::new();
    let mut row: Vec<String> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            header.push(format!("a{i}{j}_re"));
            header.push(format!("a{i}{j}_im"));
            let e = value.entry(i, j);
            row.push(fmt(e.re));
            row.push(fmt(e.im));
        }
    }
    header.push("error_certificate".into());
    row.push(fmt(certificate));
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    write_csv(path, &header_refs, &[row])
}

#[derive(Deserialize)]
struct BpFactorInputs {
    #[serde(default)]
    factors: Vec<BPFactorJson>,
    #[serde(default)]
    tail_unitary: Option<MatJson>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    grid: Option<GridSpec>,
}

pub fn cmd_bp_factor(job: &JobFile, out: &Path) -> Result<(), CliError> {
    let inputs: BpFactorInputs = job.decode_inputs()?;
    let dim = match (&inputs.tail_unitary, inputs.factors.first(), inputs.dim) {
        (Some(u), _, _) => u.to_cmat()?.dim(),
        (None, Some(f), _) => f.frame.to_cmat()?.dim(),
        (None, None, Some(d)) if d > 0 => d,
        _ => {
            return Err(Error::MalformedSpec(
                "empty factor list needs `dim` or `tail_unitary`".into(),
            )
            .into())
        }
    };
    let tail = match &inputs.tail_unitary {
        Some(u) => u.to_cmat()?,
        None => CMat::identity(dim),
    };
    let factors: Vec<BPFactor> = inputs
        .factors
        .iter()
        .map(|f| BPFactor::new(C64::new(f.zero[0], f.zero[1]), f.frame.to_cmat()?, f.rank))
        .collect::<Result<_, _>>()?;
    let product = BPProduct::new(factors, tail)?;
    write_json(
        &out.join("product.json"),
        &json!({
            "schema": crate::job::SCHEMA,
            "product": serde_json::to_value(product.to_json()).expect("product json"),
            "blaschke_sum": product.blaschke_sum(),
        }),
    )?;
    let grid = inputs.grid.unwrap_or_default();
    grid.validate()?;
    emit_grid(&product.as_mvf(), &grid, &out.join("grid.csv"))?;
    Ok(())
}

#[derive(Deserialize)]
struct BpDetachInputs {
    function: FunctionSpecJson,
    z0: [f64; 2],
    #[serde(default)]
    grid: Option<GridSpec>,
}

pub fn cmd_bp_detach(job: &JobFile, out: &Path, tol: f64) -> Result<(), CliError> {
    let inputs: BpDetachInputs = job.decode_inputs()?;
    let a = inputs.function.to_mvf(tol)?;
    let z0 = C64::new(inputs.z0[0], inputs.z0[1]);
    let (factor, remainder) = detach_max(&a, z0)?;
    write_json(
        &out.join("factor.json"),
        &json!({
            "schema": crate::job::SCHEMA,
            "factor": {
                "zero": [factor.zero().re, factor.zero().im],
                "frame": serde_json::to_value(MatJson::from_cmat(factor.frame()))
                    .expect("frame json"),
                "rank": factor.rank(),
            },
        }),
    )?;
    let grid = inputs.grid.unwrap_or_default();
    grid.validate()?;
    emit_grid(&remainder, &grid, &out.join("remainder_grid.csv"))?;
    Ok(())
}

#[derive(Deserialize)]
struct PotapovReprInputs {
    product: BPProductJson,
    #[serde(default = "default_grid_radius")]
    grid_radius: f64,
}

fn default_grid_radius() -> f64 {
    0.7
}

pub fn cmd_potapov_repr(job: &JobFile, out: &Path) -> Result<(), CliError> {
    let inputs: PotapovReprInputs = job.decode_inputs()?;
    let product = BPProduct::from_json(&inputs.product)?;
    let repr = bp_to_repr(&product)?;
    let (measured, bound) = modified_product_error(&product, &repr, inputs.grid_radius)?;
    write_json(
        &out.join("repr.json"),
        &json!({
            "schema": crate::job::SCHEMA,
            "repr": serde_json::to_value(repr.to_json()).expect("repr json"),
            "modified_product_error": { "measured": measured, "bound": bound },
        }),
    )?;
    Ok(())
}

#[derive(Deserialize)]
struct CayleyApproxInputs {
    function: FunctionSpecJson,
    k_max: u32,
}

pub fn cmd_cayley_approx(job: &JobFile, out: &Path, tol: f64) -> Result<(), CliError> {
    let inputs: CayleyApproxInputs = job.decode_inputs()?;
    if inputs.k_max < 1 {
        return Err(Error::MalformedSpec("k_max must be at least 1".into()).into());
    }
    let a = inputs.function.to_mvf(tol)?;
    let mut rows = Vec::new();
    let mut last = None;
    for k in 1..=inputs.k_max {
        let ap = rational_approximant(&a, k)?;
        // Measured gap to the target function on a fixed interior grid.
        let tau = 2.0 * std::f64::consts::PI;
        let mut sup = 0.0_f64;
        for j in 1..=8 {
            for m in 0..16 {
                let z = Complex::from_polar(0.5 * j as f64 / 8.0, tau * (m as f64 + 0.41) / 16.0);
                sup = sup.max(ap.eval(z)?.sub(&a.eval(z)).spectral_norm());
            }
        }
        rows.push(vec![
            k.to_string(),
            fmt(ap.radius),
            fmt(ap.certified_gap),
            fmt(sup),
            ap.cayley.angles.len().to_string(),
        ]);
        last = Some(ap);
    }
    write_csv(
        &out.join("error_vs_k.csv"),
        &["k", "radius", "certified_gap", "interior_sup_error", "num_atoms"],
        &rows,
    )?;
    let last = last.expect("k_max >= 1");
    write_json(
        &out.join("approximant.json"),
        &json!({
            "schema": crate::job::SCHEMA,
            "k": last.k,
            "radius": last.radius,
            "certified_gap": last.certified_gap,
            "cayley": serde_json::to_value(last.cayley.to_json()).expect("cayley json"),
        }),
    )?;
    Ok(())
}

#[derive(Deserialize)]
struct ConstructInputs {
    function: FunctionSpecJson,
    #[serde(default)]
    grid: Option<GridSpec>,
}

pub fn cmd_construct(job: &JobFile, out: &Path, tol: f64) -> Result<(), CliError> {
    let inputs: ConstructInputs = job.decode_inputs()?;
    // Only forward constructions make sense here; evaluable-but-derived
    // classes (products, step data, Cayley data) have their own commands.
    let kind = match &inputs.function {
        FunctionSpecJson::PpInner { .. } => "pp",
        FunctionSpecJson::ScInner { .. } => "sc",
        FunctionSpecJson::OuterPoly { .. } => "outer",
        _ => {
            return Err(Error::MalformedSpec(
                "construct expects pp_inner, sc_inner or outer_poly".into(),
            )
            .into())
        }
    };
    let a = inputs.function.to_mvf(tol)?;
    let grid = inputs.grid.unwrap_or_default();
    grid.validate()?;
    emit_grid(&a, &grid, &out.join("grid.csv"))?;
    write_json(
        &out.join("construct.json"),
        &json!({
            "schema": crate::job::SCHEMA,
            "kind": kind,
            "dim": a.dim(),
            "function": serde_json::to_value(&inputs.function).expect("function json"),
        }),
    )?;
    Ok(())
}

#[derive(Deserialize)]
struct ClassifyInputs {
    function: FunctionSpecJson,
}

pub fn cmd_classify(job: &JobFile, out: &Path, tol: f64) -> Result<(), CliError> {
    let inputs: ClassifyInputs = job.decode_inputs()?;
    let a = inputs.function.to_mvf(tol)?;
    let label = match classify_by_det(&a) {
        Classification::InnerLike => "inner",
        Classification::OuterLike => "outer",
        Classification::Mixed => "mixed",
        Classification::Undetermined => "undetermined",
    };
    write_json(
        &out.join("classification.json"),
        &json!({ "schema": crate::job::SCHEMA, "classification": label }),
    )?;
    Ok(())
}

pub fn cmd_demo_nonuniqueness(out: &Path, tol: f64) -> Result<(), CliError> {
    let report = nonuniqueness_demo(tol)?;
    write_json(
        &out.join("report.json"),
        &json!({
            "schema": crate::job::SCHEMA,
            "function_gap": report.function_gap,
            "integrator_gap": report.integrator_gap,
            "closed_form_gap": report.closed_form_gap,
        }),
    )?;
    if report.function_gap > 1e-6 || report.integrator_gap < 0.2 {
        return Err(CliError::Numerical(format!(
            "non-uniqueness gaps out of range: function {:.3e}, integrator {:.3e}",
            report.function_gap, report.integrator_gap
        )));
    }
    Ok(())
}
