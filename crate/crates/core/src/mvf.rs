//! Evaluable handles for matrix-valued functions on the unit disk.

use std::sync::Arc;

use crate::matcore::{C64, CMat};

/// Black-box evaluable matrix-valued function on the open unit disk.
///
/// Analyticity is trusted, not verified; the `contractive` flag records the
/// caller's declaration and is used to select applicable checks.
#[derive(Clone)]
pub struct Mvf {
    eval: Arc<dyn Fn(C64) -> CMat + Send + Sync>,
    dim: usize,
    contractive: bool,
}

impl Mvf {
    pub fn new(dim: usize, contractive: bool, eval: impl Fn(C64) -> CMat + Send + Sync + 'static) -> Self {
        Mvf {
            eval: Arc::new(eval),
            dim,
            contractive,
        }
    }

    pub fn constant(value: CMat, contractive: bool) -> Self {
        let dim = value.dim();
        Self::new(dim, contractive, move |_| value.clone())
    }

    pub fn eval(&self, z: C64) -> CMat {
        (self.eval)(z)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_declared_contractive(&self) -> bool {
        self.contractive
    }

    /// Pointwise product (left-to-right): `(self * other)(z) = self(z) other(z)`.
    pub fn compose_mul(&self, other: &Mvf) -> Mvf {
        let a = self.clone();
        let b = other.clone();
        Mvf::new(self.dim, self.contractive && other.contractive, move |z| {
            a.eval(z).mul(&b.eval(z))
        })
    }
}

impl std::fmt::Debug for Mvf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mvf")
            .field("dim", &self.dim)
            .field("contractive", &self.contractive)
            .finish()
    }
}
