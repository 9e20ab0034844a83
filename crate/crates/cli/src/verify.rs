//! Randomized invariant suites behind the `verify` command. Each check
//! carries a descriptive identifier; the report lists every instance with
//! its residual and tolerance, and the command exits nonzero if any fails.

use std::path::Path;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use potint::matcore::{norm_lemma_report, re, C64, CMat};
use potint::prodint::{
    det_certificate, gram_product, norm_certificate, ode_integral, prod_integral, split_product,
    taylor_certificate, telescoping_residual, DensityFn, IntegratorSpec, KernelSpec, ThetaFn,
};
use potint::Error;

use crate::emit::{fmt, write_csv, write_json};
use crate::job::JobFile;
use crate::CliError;

const TAU: f64 = 2.0 * std::f64::consts::PI;

pub const SUITES: &[&str] = &[
    "det-formula",
    "split",
    "gram",
    "norm-bound",
    "taylor",
    "ode-cross-check",
    "telescoping",
    "norm-lemma",
];

#[derive(Deserialize)]
struct VerifyInputs {
    suite: String,
    #[serde(default = "default_instances")]
    instances: usize,
}

fn default_instances() -> usize {
    20
}

struct CheckRow {
    check: &'static str,
    instance: usize,
    residual: f64,
    tolerance: f64,
}

impl CheckRow {
    fn pass(&self) -> bool {
        self.residual <= self.tolerance
    }
}

fn random_mat(rng: &mut impl Rng, n: usize) -> CMat {
    CMat::from_fn(n, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMat {
    random_mat(rng, n).herm_part()
}

fn random_unitary(rng: &mut impl Rng, n: usize) -> CMat {
    let (u, _, _) = random_mat(rng, n).svd().unwrap();
    u
}

fn random_density(rng: &mut impl Rng, n: usize) -> DensityFn {
    let a = random_hermitian(rng, n).scale(re(0.35));
    let b = random_hermitian(rng, n).scale(re(0.35));
    let c = random_hermitian(rng, n).scale(re(0.35));
    DensityFn::from_closure(move |t: f64| {
        a.add(&b.scale(re(t.sin())))
            .add(&c.scale(re((2.0 * t).cos())))
    })
}

fn random_kernel(rng: &mut impl Rng) -> KernelSpec {
    if rng.gen_bool(0.5) {
        KernelSpec::Constant(C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    } else {
        KernelSpec::Herglotz {
            z: Complex::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..TAU)),
            theta: ThetaFn::Identity,
        }
    }
}

fn random_integrator(rng: &mut impl Rng, n: usize, which: usize) -> IntegratorSpec {
    match which % 3 {
        0 => {
            let m = rng.gen_range(1..=3);
            let mut pts: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..0.95)).collect();
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            IntegratorSpec::Step {
                domain: (0.0, 1.0),
                jumps: pts.iter().map(|_| random_hermitian(rng, n)).collect(),
                jump_points: pts,
                increasing: false,
            }
        }
        1 => IntegratorSpec::PiecewiseLinear {
            breakpoints: vec![0.0, 0.4, 1.0],
            values: vec![
                CMat::zeros(n),
                random_hermitian(rng, n),
                random_hermitian(rng, n),
            ],
            increasing: false,
        },
        _ => IntegratorSpec::Density {
            domain: (0.0, 1.0),
            dim: n,
            density: random_density(rng, n),
        },
    }
}

/// Increasing integrator whose increments commute (conjugated-diagonal
/// density), the family on which the Gram identity holds.
fn commuting_integrator(rng: &mut impl Rng, n: usize) -> IntegratorSpec {
    let u = random_unitary(rng, n);
    let base: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let slope: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.5)).collect();
    IntegratorSpec::Density {
        domain: (0.0, 1.0),
        dim: n,
        density: DensityFn::from_closure(move |t: f64| {
            let d = CMat::diag(
                &base
                    .iter()
                    .zip(&slope)
                    .map(|(&b, &s)| re(b + s * t))
                    .collect::<Vec<_>>(),
            );
            u.mul(&d).mul(&u.adjoint())
        }),
    }
}

fn run_suite(
    suite: &str,
    instances: usize,
    seed: u64,
    tol: f64,
    rows: &mut Vec<CheckRow>,
) -> Result<(), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (suite.len() as u64));
    match suite {
        "det-formula" => {
            for i in 0..instances {
                let n = 2 + (i % 3);
                let f = random_kernel(&mut rng);
                let e = random_integrator(&mut rng, n, i);
                let (lhs, rhs) = det_certificate(&f, &e, tol.max(1e-8))?;
                rows.push(CheckRow {
                    check: "det-formula",
                    instance: i,
                    residual: (lhs - rhs).norm() / rhs.norm().max(1.0),
                    tolerance: 1e-7,
                });
            }
        }
        "split" => {
            for i in 0..instances {
                let n = 2 + (i % 2);
                let f = random_kernel(&mut rng);
                let e = random_integrator(&mut rng, n, i);
                let c = rng.gen_range(0.1..0.9);
                let sp = split_product(&f, &e, c, tol.max(1e-8))?;
                rows.push(CheckRow {
                    check: "split",
                    instance: i,
                    residual: sp.residual,
                    tolerance: 1e-6,
                });
            }
        }
        "gram" => {
            for i in 0..instances {
                let n = 2 + (i % 2);
                let f = random_kernel(&mut rng);
                let e = commuting_integrator(&mut rng, n);
                let a = prod_integral(&f, &e, tol.max(1e-8))?.value;
                let g = gram_product(&f, &e, tol.max(1e-8))?.value;
                rows.push(CheckRow {
                    check: "gram",
                    instance: i,
                    residual: a.mul(&a.adjoint()).sub(&g).spectral_norm(),
                    tolerance: 1e-6,
                });
            }
        }
        "norm-bound" => {
            for i in 0..instances {
                let n = 2 + (i % 2);
                let f = random_kernel(&mut rng);
                let e = random_integrator(&mut rng, n, i);
                let (nl, nr) = norm_certificate(&f, &e, tol.max(1e-8))?;
                // One-sided bound: only an excess over the bound counts.
                rows.push(CheckRow {
                    check: "norm-bound",
                    instance: i,
                    residual: (nl - nr).max(0.0),
                    tolerance: 1e-6 * nr.max(1.0),
                });
            }
        }
        "taylor" => {
            for i in 0..instances {
                let n = 2 + (i % 2);
                let f = random_kernel(&mut rng);
                let e = random_integrator(&mut rng, n, i);
                let lo = rng.gen_range(0.0..0.4);
                let hi = lo + rng.gen_range(0.05..0.3);
                let t = taylor_certificate(&f, &e, lo, hi, tol.max(1e-9))?;
                rows.push(CheckRow {
                    check: "taylor",
                    instance: i,
                    residual: (t.remainder - t.remainder_bound).max(0.0),
                    tolerance: 1e-7,
                });
            }
        }
        "ode-cross-check" => {
            for i in 0..instances {
                let n = 2 + (i % 2);
                let density = random_density(&mut rng, n);
                let e = IntegratorSpec::Density {
                    domain: (0.0, 1.0),
                    dim: n,
                    density: density.clone(),
                };
                let f = KernelSpec::Constant(re(1.0));
                let p = prod_integral(&f, &e, tol.max(1e-9))?.value;
                let o = ode_integral(&|t| density.eval(t), n, (0.0, 1.0), 2000)?;
                rows.push(CheckRow {
                    check: "ode-cross-check",
                    instance: i,
                    residual: p.sub(&o).spectral_norm(),
                    tolerance: 1e-6,
                });
            }
        }
        "telescoping" => {
            for i in 0..instances {
                let n = 2 + (i % 3);
                let m = rng.gen_range(2..=5);
                let p: Vec<CMat> = (0..m).map(|_| random_mat(&mut rng, n)).collect();
                let q: Vec<CMat> = (0..m).map(|_| random_mat(&mut rng, n)).collect();
                rows.push(CheckRow {
                    check: "telescoping",
                    instance: i,
                    residual: telescoping_residual(&p, &q),
                    tolerance: 1e-10,
                });
            }
        }
        "norm-lemma" => {
            for i in 0..instances {
                let n = 2 + (i % 3);
                let a = random_mat(&mut rng, n);
                let b = random_mat(&mut rng, n);
                let u = random_unitary(&mut rng, n);
                let failed = norm_lemma_report(&a, &b, &u, 1e-10)
                    .into_iter()
                    .filter(|(_, ok)| !ok)
                    .count();
                rows.push(CheckRow {
                    check: "norm-lemma",
                    instance: i,
                    residual: failed as f64,
                    tolerance: 0.0,
                });
            }
        }
        other => {
            return Err(Error::MalformedSpec(format!(
                "unknown verify suite `{other}` (try `all` or one of {SUITES:?})"
            )))
        }
    }
    Ok(())
}

pub fn cmd_verify(job: &JobFile, out: &Path, tol: f64, seed: u64) -> Result<(), CliError> {
    let inputs: VerifyInputs = job.decode_inputs()?;
    let suites: Vec<&str> = if inputs.suite == "all" {
        SUITES.to_vec()
    } else {
        if !SUITES.contains(&inputs.suite.as_str()) {
            return Err(Error::MalformedSpec(format!(
                "unknown verify suite `{}` (try `all` or one of {SUITES:?})",
                inputs.suite
            ))
            .into());
        }
        vec![inputs.suite.as_str()]
    };

    let mut rows = Vec::new();
    for suite in &suites {
        run_suite(suite, inputs.instances, seed, tol, &mut rows)?;
    }

    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.check.to_string(),
                r.instance.to_string(),
                fmt(r.residual),
                fmt(r.tolerance),
                if r.pass() { "pass" } else { "fail" }.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("verify.csv"),
        &["check", "instance", "residual", "tolerance", "status"],
        &csv_rows,
    )?;

    let failures: Vec<&CheckRow> = rows.iter().filter(|r| !r.pass()).collect();
    write_json(
        &out.join("verify.json"),
        &json!({
            "schema": crate::job::SCHEMA,
            "suites": suites,
            "seed": seed,
            "instances": inputs.instances,
            "checks": rows.len(),
            "failures": failures.len(),
        }),
    )?;

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "{} of {} checks failed (see verify.csv)",
            failures.len(),
            rows.len()
        )))
    }
}
