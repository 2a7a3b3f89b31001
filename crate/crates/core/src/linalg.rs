//! Dense linear algebra on the mean-zero strain subspace.
//!
//! Periodic strains `w = u′` satisfy `Σ w = 0`. An orthonormal basis `Z` of
//! that subspace is taken from the Householder reflector `H` that maps the
//! last unit vector onto `𝟙/√N`; the first `N − 1` columns of `H` span `𝟙^⊥`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::energy::HessianCoeffs;

#[derive(Debug, Clone)]
pub struct MeanZeroBasis {
    v: DVector<f64>,
    tau: f64,
}

impl MeanZeroBasis {
    pub fn new(n: usize) -> Self {
        let s = 1.0 / (n as f64).sqrt();
        let mut v = DVector::from_element(n, -s);
        v[n - 1] += 1.0;
        let tau = 2.0 / v.norm_squared();
        Self { v, tau }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// `Z a = H [a; 0]`.
    pub fn lift(&self, a: &DVector<f64>) -> Vec<f64> {
        let n = self.dim();
        let mut x = DVector::zeros(n);
        x.rows_mut(0, n - 1).copy_from(a);
        let dot = self.v.dot(&x);
        x.axpy(-self.tau * dot, &self.v, 1.0);
        x.as_slice().to_vec()
    }

    /// `Zᵀ x`: the first `N − 1` entries of `H x`.
    pub fn restrict(&self, x: &[f64]) -> DVector<f64> {
        let n = self.dim();
        let mut y = DVector::from_column_slice(x);
        let dot = self.v.dot(&y);
        y.axpy(-self.tau * dot, &self.v, 1.0);
        y.rows(0, n - 1).into_owned()
    }

    /// `Zᵀ K Z` from `HKH = K − τ(v qᵀ + q vᵀ) + τ²(vᵀq) v vᵀ`, `q = Kv`.
    pub fn project(&self, k: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let q = k * &self.v;
        let vq = self.v.dot(&q);
        let t = self.tau;
        DMatrix::from_fn(n - 1, n - 1, |i, j| {
            let (vi, vj) = (self.v[i], self.v[j]);
            k[(i, j)] - t * (vi * q[j] + q[i] * vj) + t * t * vq * vi * vj
        })
    }
}

/// Cyclic tridiagonal matrix `K` with `wᵀKw = Σ Ā_ξ w_ξ² + B̄_ξ (w_{ξ+1} − w_ξ)²`.
pub fn strain_form_matrix(coeffs: &HessianCoeffs) -> DMatrix<f64> {
    let n = coeffs.a_bar.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        let b = coeffs.b_bar[i];
        k[(i, i)] += coeffs.a_bar[i] + b;
        k[(j, j)] += b;
        k[(i, j)] -= b;
        k[(j, i)] -= b;
    }
    k
}

/// Smallest eigenpair of a symmetric matrix.
pub fn smallest_eigenpair(m: DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(m);
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("matrix is nonempty");
    (lambda, eig.eigenvectors.column(idx).into_owned())
}

/// Cholesky succeeds exactly when the matrix is (numerically) positive definite.
pub fn is_positive_definite(m: DMatrix<f64>) -> bool {
    Cholesky::new(m).is_some()
}
