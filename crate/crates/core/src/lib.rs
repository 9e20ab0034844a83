//! Multiplicative (product) integrals for matrix-valued integrators and the
//! Blaschke-Potapov / inner-outer factorization machinery for bounded analytic
//! matrix-valued functions on the unit disk.
//!
//! The crate is organized around five layers:
//!
//! * [`matcore`] — dense complex matrix kernel (spectral norm, positivity,
//!   matrix exponential, SVD) that everything else builds on,
//! * [`prodint`] — the multiplicative-integral engine over tagged partitions,
//!   with the ODE evaluator and runtime error certificates,
//! * [`blaschke`] — Blaschke-Potapov factors/products, detachability tests and
//!   the SVD-driven factorization into a finite product times a zero-free
//!   remainder,
//! * [`potapov`] — Cayley transform, Herglotz-mass extraction, rational inner
//!   approximants and step-data representations of finite products,
//! * [`factor`] — forward constructors for pp-inner, sc-inner and outer
//!   matrix functions plus classification and verification utilities.

pub mod blaschke;
pub mod error;
pub mod factor;
pub mod matcore;
pub mod mvf;
pub mod potapov;
pub mod prodint;
pub mod wire;

pub use error::Error;
pub use matcore::CMat;
pub use mvf::Mvf;
