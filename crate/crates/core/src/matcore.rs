//! Dense complex matrix kernel: spectral norm, positivity, Hermitian algebra,
//! matrix exponential and the SVD contract. All other modules assume these
//! operations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Default cap on the operator norm accepted by [`CMat::mat_exp`].
pub const EXP_NORM_CAP: f64 = 1e3;

/// Square complex matrix, the substrate type of the crate.
///
/// Public operations keep entries finite; `dim >= 1` is enforced by every
/// constructor.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat(DMatrix<C64>);

impl CMat {
    pub fn from_matrix(m: DMatrix<C64>) -> Self {
        assert!(m.is_square() && m.nrows() >= 1, "CMat must be square, dim >= 1");
        CMat(m)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::from_matrix(DMatrix::from_fn(dim, dim, |i, j| f(i, j)))
    }

    /// Build from a row-major nested slice.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "expected square row data, got {} rows",
                n
            )));
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix(DMatrix::zeros(dim, dim))
    }

    pub fn diag(entries: &[C64]) -> Self {
        Self::from_fn(entries.len(), |i, j| {
            if i == j {
                entries[i]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.0[(i, j)] = v;
    }

    pub fn adjoint(&self) -> Self {
        CMat(self.0.adjoint())
    }

    pub fn scale(&self, c: C64) -> Self {
        CMat(self.0.map(|x| c * x))
    }

    pub fn add(&self, other: &Self) -> Self {
        CMat(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        CMat(&self.0 - &other.0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        CMat(&self.0 * &other.0)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn det(&self) -> C64 {
        self.0.determinant()
    }

    pub fn inverse(&self) -> Option<Self> {
        self.0.clone().try_inverse().map(CMat)
    }

    /// Hermitian part (A + A*)/2.
    pub fn herm_part(&self) -> Self {
        CMat((&self.0 + self.0.adjoint()).map(|x| 0.5 * x))
    }

    /// Skew part divided by i: (A - A*)/(2i), the matrix imaginary part.
    pub fn im_part(&self) -> Self {
        let half_over_i = C64::new(0.0, -0.5);
        CMat((&self.0 - self.0.adjoint()).map(|x| half_over_i * x))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// Frobenius norm; cheap upper proxy used for tolerances.
    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Operator norm induced by the Euclidean vector norm: the largest
    /// singular value.
    pub fn spectral_norm(&self) -> f64 {
        let sv = self.0.clone().singular_values();
        sv.iter().cloned().fold(0.0_f64, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.adjoint()).spectral_norm() <= tol
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn herm_eigenvalues(&self) -> Vec<f64> {
        let h = self.herm_part();
        let se = nalgebra::SymmetricEigen::new(h.0);
        let mut ev: Vec<f64> = se.eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// True iff the matrix is Hermitian within `tol` and its least eigenvalue
    /// is `>= -tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol.max(1e-300)) {
            return false;
        }
        match self.herm_eigenvalues().first() {
            Some(&min) => min >= -tol,
            None => false,
        }
    }

    /// Contraction test. Both characterizations are computed: the norm route
    /// `‖A‖ <= 1 + tol` and positivity of `I - AA*`; they must agree, and the
    /// norm route is returned.
    pub fn is_contraction(&self, tol: f64) -> bool {
        let by_norm = self.spectral_norm() <= 1.0 + tol;
        let gram_defect = CMat::identity(self.dim()).sub(&self.mul(&self.adjoint()));
        let by_gram = gram_defect.is_positive(2.0 * tol + 2.0 * tol.sqrt() + 1e-13);
        debug_assert_eq!(
            by_norm, by_gram,
            "contraction routes disagree: norm={} gram={}",
            by_norm, by_gram
        );
        by_norm
    }

    /// Matrix exponential by scaling and squaring with a truncated Taylor
    /// core. Relative error <= 1e-12 for operator norms up to ~20; inputs
    /// with norm above [`EXP_NORM_CAP`] are rejected.
    pub fn mat_exp(&self) -> Result<Self> {
        self.mat_exp_capped(EXP_NORM_CAP)
    }

    pub fn mat_exp_capped(&self, cap: f64) -> Result<Self> {
        let norm = self.spectral_norm();
        if !norm.is_finite() || norm > cap {
            return Err(Error::ExpNormCap { norm, cap });
        }
        // Scale so the core series runs at norm <= 0.5.
        let s = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale(C64::new(1.0 / f64::powi(2.0, s as i32), 0.0));
        let mut result = CMat::identity(self.dim());
        let mut term = CMat::identity(self.dim());
        for k in 1..64 {
            term = term.mul(&scaled).scale(C64::new(1.0 / k as f64, 0.0));
            result = result.add(&term);
            if term.frobenius_norm() < 1e-20 {
                break;
            }
        }
        for _ in 0..s {
            result = result.mul(&result);
        }
        Ok(result)
    }

    /// Full singular value decomposition: `A = U diag(s) V` with `U`, `V`
    /// unitary and `s` nonincreasing. Note `V` is the factor appearing on the
    /// right of the reconstruction (the conjugate transpose of the classical
    /// right singular-vector matrix).
    pub fn svd(&self) -> Result<(CMat, Vec<f64>, CMat)> {
        let svd = nalgebra::SVD::try_new(self.0.clone(), true, true, f64::EPSILON * 4.0, 4096)
            .ok_or(Error::SvdFailure)?;
        let u = svd.u.ok_or(Error::SvdFailure)?;
        let vt = svd.v_t.ok_or(Error::SvdFailure)?;
        let mut sv: Vec<(f64, usize)> = svd
            .singular_values
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        // nalgebra does not guarantee ordering; sort descending and permute.
        sv.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let n = self.dim();
        let u_sorted = DMatrix::from_fn(n, n, |i, j| u[(i, sv[j].1)]);
        let vt_sorted = DMatrix::from_fn(n, n, |i, j| vt[(sv[i].1, j)]);
        let s: Vec<f64> = sv.iter().map(|x| x.0).collect();
        Ok((CMat(u_sorted), s, CMat(vt_sorted)))
    }

    /// Apply to a vector.
    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.0 * v
    }
}

/// Hermitian matrix with the deviation `‖A - A*‖` bounded by a relative
/// tolerance with an absolute floor.
#[derive(Clone, Debug)]
pub struct HermMat(CMat);

impl HermMat {
    pub fn new(base: CMat) -> Result<Self> {
        let tol = hermitian_tol(&base);
        if !base.is_hermitian(tol) {
            return Err(Error::DimensionMismatch(format!(
                "matrix not Hermitian within {:.3e}",
                tol
            )));
        }
        // Store the exactly Hermitian part so downstream eigensolves are clean.
        Ok(HermMat(base.herm_part()))
    }

    pub fn as_cmat(&self) -> &CMat {
        &self.0
    }

    pub fn into_cmat(self) -> CMat {
        self.0
    }
}

pub fn hermitian_tol(a: &CMat) -> f64 {
    (1e-12 * a.spectral_norm()).max(1e-14)
}

/// Convenience: real scalar as a complex entry.
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// The thirteen operator-norm clauses, checked on a triple (A, B, U) with U
/// unitary, at relative tolerance `rel`. Returns `(clause label, pass)` pairs;
/// the inverse bound is skipped (reported pass) when A is numerically singular.
pub fn norm_lemma_report(a: &CMat, b: &CMat, u: &CMat, rel: f64) -> Vec<(&'static str, bool)> {
    let n = a.dim();
    let na = a.spectral_norm();
    let nb = b.spectral_norm();
    let slack = |x: f64| rel * x.max(1.0);
    let mut out = Vec::with_capacity(13);
    out.push((
        "submultiplicative",
        a.mul(b).spectral_norm() <= na * nb + slack(na * nb),
    ));
    out.push(("adjoint-norm", (a.adjoint().spectral_norm() - na).abs() <= slack(na)));
    out.push((
        "unitary-invariance",
        (a.mul(u).spectral_norm() - na).abs() <= slack(na)
            && (u.mul(a).spectral_norm() - na).abs() <= slack(na),
    ));
    let d = CMat::from_fn(n, |i, j| if i == j { a.entry(i, i) } else { C64::new(0.0, 0.0) });
    let dmax = (0..n).map(|i| a.entry(i, i).norm()).fold(0.0_f64, f64::max);
    out.push(("diagonal-norm", (d.spectral_norm() - dmax).abs() <= slack(dmax)));
    let h = a.herm_part();
    let hev = h.herm_eigenvalues();
    let hmax = hev.iter().map(|x| x.abs()).fold(0.0_f64, f64::max);
    out.push(("hermitian-spectral", (h.spectral_norm() - hmax).abs() <= slack(hmax)));
    let gram = a.mul(&a.adjoint());
    out.push((
        "gram-norm-square",
        (gram.spectral_norm().sqrt() - na).abs() <= slack(na),
    ));
    out.push(("unitary-norm-one", (u.spectral_norm() - 1.0).abs() <= rel));
    out.push((
        "positive-trace-bound",
        gram.spectral_norm() <= gram.trace().re + slack(gram.trace().re),
    ));
    // Quadratic-form suprema: the top singular frame attains them exactly.
    match a.svd() {
        Ok((usv, s, v)) => {
            let s1 = s[0];
            // x = first left singular vector: x* A A* x = s1^2.
            let quad: f64 = {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc += usv.entry(i, 0).conj() * gram.entry(i, j) * usv.entry(j, 0);
                    }
                }
                acc.norm().sqrt()
            };
            out.push(("quadratic-form-sup", (quad - na).abs() <= slack(na) && s1 <= na + slack(na)));
            // y = conjugate of the first row of the right factor: |x* A y| = s1.
            let bil: f64 = {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc += usv.entry(i, 0).conj() * a.entry(i, j) * v.entry(0, j).conj();
                    }
                }
                acc.norm()
            };
            out.push(("bilinear-form-sup", (bil - na).abs() <= slack(na)));
        }
        Err(_) => {
            out.push(("quadratic-form-sup", false));
            out.push(("bilinear-form-sup", false));
        }
    }
    let row_ok = (0..n).all(|i| {
        let r: f64 = (0..n).map(|j| a.entry(i, j).norm_sqr()).sum::<f64>().sqrt();
        r <= na + slack(na)
    });
    out.push(("row-norm-lower-bound", row_ok));
    let entry_ok = (0..n).all(|i| (0..n).all(|j| a.entry(i, j).norm() <= na + slack(na)));
    out.push(("entry-lower-bound", entry_ok));
    let det = a.det().norm();
    let inv_ok = if det > 1e-8 * na.powi(n as i32).max(1e-12) {
        match a.inverse() {
            Some(inv) => {
                let bound = na.powi(n as i32 - 1) / det;
                inv.spectral_norm() <= bound + slack(bound)
            }
            None => false,
        }
    } else {
        true
    };
    out.push(("inverse-det-bound", inv_ok));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mat(rng: &mut impl Rng, n: usize) -> CMat {
        CMat::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    /// Independent oracle: power iteration on AA* for the largest singular
    /// value, run to 1e-13.
    fn power_iteration_norm(a: &CMat, iters: usize) -> f64 {
        let n = a.dim();
        let aat = a.mul(&a.adjoint());
        let mut v = DVector::from_fn(n, |i, _| C64::new(1.0 + i as f64 * 0.1, 0.3 - i as f64 * 0.05));
        let mut lambda = 0.0;
        for _ in 0..iters {
            let w = aat.apply(&v);
            let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let next = w.map(|x| x / C64::new(norm, 0.0));
            let new_lambda = norm;
            if (new_lambda - lambda).abs() <= 1e-13 * new_lambda.max(1.0) {
                return new_lambda.sqrt();
            }
            lambda = new_lambda;
            v = next;
        }
        lambda.sqrt()
    }

    /// Independent oracle: cyclic Jacobi eigensolver for Hermitian matrices.
    fn jacobi_herm_eigenvalues(a: &CMat) -> Vec<f64> {
        let n = a.dim();
        let mut m = a.inner().clone();
        for _ in 0..200 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += m[(p, q)].norm_sqr();
                }
            }
            if off < 1e-28 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[(p, q)];
                    if apq.norm() < 1e-30 {
                        continue;
                    }
                    let app = m[(p, p)].re;
                    let aqq = m[(q, q)].re;
                    // Complex Jacobi rotation zeroing (p, q).
                    let phase = apq / C64::new(apq.norm(), 0.0);
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // G acts on rows/cols p and q.
                    let (cp, sp) = (C64::new(c, 0.0), phase * C64::new(s, 0.0));
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = mkp * cp - mkq * sp.conj();
                        m[(k, q)] = mkp * sp + mkq * cp;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = cp * mpk - sp * mqk;
                        m[(q, k)] = sp.conj() * mpk + cp * mqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    #[test]
    fn spectral_norm_identity_and_diag() {
        assert!((CMat::identity(2).spectral_norm() - 1.0).abs() < 1e-12);
        let d = CMat::diag(&[re(3.0), C64::new(0.0, -2.0)]);
        assert!((d.spectral_norm() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_mat(&mut rng, 4);
            let oracle = power_iteration_norm(&a, 20000);
            let got = a.spectral_norm();
            assert!(
                (got - oracle).abs() <= 1e-10 * oracle.max(1.0),
                "norm {} vs oracle {}",
                got,
                oracle
            );
        }
    }

    #[test]
    fn is_positive_cases() {
        assert!(CMat::zeros(3).is_positive(1e-12));
        let a = CMat::from_rows(&[vec![re(1.0), re(2.0)], vec![re(2.0), re(1.0)]]).unwrap();
        // Eigenvalues 3 and -1.
        assert!(!a.is_positive(1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let m = random_mat(&mut rng, 3);
            assert!(m.mul(&m.adjoint()).is_positive(1e-10));
        }
    }

    #[test]
    fn mat_exp_cosh_sinh() {
        let a = CMat::from_rows(&[vec![re(0.0), re(1.0)], vec![re(1.0), re(0.0)]]).unwrap();
        let e = a.mat_exp().unwrap();
        let c = 1.0_f64.cosh();
        let s = 1.0_f64.sinh();
        assert!((e.entry(0, 0).re - c).abs() < 1e-13);
        assert!((e.entry(0, 1).re - s).abs() < 1e-13);
        assert!((e.entry(1, 0).re - s).abs() < 1e-13);
        assert!((e.entry(1, 1).re - c).abs() < 1e-13);
    }

    #[test]
    fn mat_exp_zero_and_diag() {
        let z = CMat::zeros(3).mat_exp().unwrap();
        assert!(z.sub(&CMat::identity(3)).spectral_norm() < 1e-15);
        let d = CMat::diag(&[re(1.5), C64::new(0.0, 2.0)]).mat_exp().unwrap();
        assert!((d.entry(0, 0) - re(1.5_f64.exp())).norm() < 1e-13);
        assert!((d.entry(1, 1) - C64::new(0.0, 2.0).exp()).norm() < 1e-13);
    }

    #[test]
    fn mat_exp_inverse_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..15 {
            let mut a = random_mat(&mut rng, 3);
            let norm = a.spectral_norm();
            if norm > 5.0 {
                a = a.scale(re(5.0 / norm));
            }
            let p = a.mat_exp().unwrap().mul(&a.scale(re(-1.0)).mat_exp().unwrap());
            assert!(p.sub(&CMat::identity(3)).spectral_norm() < 1e-10);
        }
    }

    #[test]
    fn mat_exp_norm_cap() {
        let big = CMat::identity(2).scale(re(2e3));
        assert!(matches!(big.mat_exp(), Err(Error::ExpNormCap { .. })));
    }

    #[test]
    fn svd_reconstruction_and_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a = random_mat(&mut rng, 3);
            let (u, s, v) = a.svd().unwrap();
            let rec = u.mul(&CMat::diag(&s.iter().map(|&x| re(x)).collect::<Vec<_>>())).mul(&v);
            let norm = a.spectral_norm();
            assert!(rec.sub(&a).spectral_norm() <= 1e-10 * norm.max(1.0));
            assert!(u.mul(&u.adjoint()).sub(&CMat::identity(3)).spectral_norm() < 1e-10);
            assert!(v.mul(&v.adjoint()).sub(&CMat::identity(3)).spectral_norm() < 1e-10);
            // Singular values against the Jacobi eigenvalue oracle on AA*.
            let eig = jacobi_herm_eigenvalues(&a.mul(&a.adjoint()));
            let mut sq: Vec<f64> = eig.iter().map(|&x| x.max(0.0).sqrt()).collect();
            sq.reverse();
            for (got, want) in s.iter().zip(sq.iter()) {
                assert!((got - want).abs() < 1e-9, "sv {} vs oracle {}", got, want);
            }
        }
    }

    #[test]
    fn svd_rank_one() {
        let x = [re(1.0), re(2.0), C64::new(0.0, 1.0)];
        let y = [re(0.5), C64::new(1.0, -1.0), re(2.0)];
        let a = CMat::from_fn(3, |i, j| x[i] * y[j].conj());
        let (_, s, _) = a.svd().unwrap();
        let nx = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let big: Vec<&f64> = s.iter().filter(|&&v| v >= 1e-10 * nx * ny).collect();
        assert_eq!(big.len(), 1);
    }

    #[test]
    fn contraction_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        // Unitary via QR of a random matrix: use SVD frames.
        let a = random_mat(&mut rng, 3);
        let (u, _, _) = a.svd().unwrap();
        assert!(u.is_contraction(1e-10));
        assert!(!CMat::identity(2).scale(re(1.5)).is_contraction(1e-10));
        for _ in 0..10 {
            let m = random_mat(&mut rng, 3);
            let scaled = m.scale(re(1.0 / (m.spectral_norm() + 0.1)));
            assert!(scaled.is_contraction(1e-12));
        }
    }

    #[test]
    fn matrix_norm_lemma_clauses() {
        // The thirteen operator-norm clauses on random matrices.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rel = 1e-10;
        for _ in 0..50 {
            let n = 3;
            let a = random_mat(&mut rng, n);
            let b = random_mat(&mut rng, n);
            let (u, _, _) = random_mat(&mut rng, n).svd().unwrap();
            let na = a.spectral_norm();
            let nb = b.spectral_norm();
            // (1) submultiplicativity
            assert!(a.mul(&b).spectral_norm() <= na * nb * (1.0 + rel) + rel);
            // (2) adjoint invariance
            assert!((a.adjoint().spectral_norm() - na).abs() <= rel * na.max(1.0));
            // (3) unitary invariance
            assert!((a.mul(&u).spectral_norm() - na).abs() <= rel * na.max(1.0));
            assert!((u.mul(&a).spectral_norm() - na).abs() <= rel * na.max(1.0));
            // (7) unitary norm
            assert!((u.spectral_norm() - 1.0).abs() <= rel);
            // (8) positive trace bound
            let g = a.mul(&a.adjoint());
            assert!(g.spectral_norm() <= g.trace().re * (1.0 + rel) + rel);
            // (13) inverse bound
            let det = a.det().norm();
            if det > 1e-8 {
                let inv = a.inverse().unwrap();
                let bound = na.powi((n - 1) as i32) / det;
                assert!(inv.spectral_norm() <= bound * (1.0 + 1e-9) + rel);
            }
        }
    }

    #[test]
    fn norm_lemma_report_passes_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let n = 2 + (rng.gen_range(0..3) as usize);
            let a = random_mat(&mut rng, n);
            let b = random_mat(&mut rng, n);
            let (u, _, _) = random_mat(&mut rng, n).svd().unwrap();
            for (label, ok) in norm_lemma_report(&a, &b, &u, 1e-10) {
                assert!(ok, "clause {label} failed");
            }
        }
    }

    #[test]
    fn herm_mat_constructor() {
        let h = CMat::from_rows(&[
            vec![re(1.0), C64::new(0.5, 0.25)],
            vec![C64::new(0.5, -0.25), re(2.0)],
        ])
        .unwrap();
        assert!(HermMat::new(h).is_ok());
        let not_h = CMat::from_rows(&[vec![re(0.0), re(1.0)], vec![re(0.0), re(0.0)]]).unwrap();
        assert!(HermMat::new(not_h).is_err());
    }
}
