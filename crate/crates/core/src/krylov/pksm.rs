//! Polynomial Krylov approximation of `A^p v` for symmetric positive
//! semidefinite `A`.

use nalgebra::{DMatrix, DVector};

use super::{orthogonalize, LaplacianOperator, SymmetricOperator};
use crate::error::{check_len, Error, Result};
use crate::graph::Layer;
use crate::linalg::{norm, scale, sym_eigen_ascending};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PksmOptions {
    /// largest Krylov dimension
    pub max_dim: usize,
    /// stop once successive approximations differ by at most `tol` relative
    pub tol: f64,
}

impl Default for PksmOptions {
    fn default() -> Self {
        Self {
            max_dim: 50,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PksmOutput {
    pub y: Vec<f64>,
    pub steps: usize,
    pub converged: bool,
}

/// `(L_sym + delta I)^p v` for one layer.
pub fn pksm_apply(layer: &Layer, p: f64, v: &[f64], opts: &PksmOptions) -> Result<PksmOutput> {
    pksm_apply_op(&LaplacianOperator(layer), p, v, opts)
}

/// `A^p v` with `p < 0` or `p >= 1`.
///
/// Builds an orthonormal Lanczos basis `V_s` with tridiagonal projection
/// `T_s` and returns `|v| V_s T_s^p e_1`. Growth stops when the coefficient
/// vectors of consecutive steps differ by at most `tol` relative, at an exact
/// invariant subspace, or at `max_dim`.
pub fn pksm_apply_op(
    op: &dyn SymmetricOperator,
    p: f64,
    v: &[f64],
    opts: &PksmOptions,
) -> Result<PksmOutput> {
    if !!(0.0..1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "matrix power must be < 0 or >= 1, got {p}"
        )));
    }
    let n = op.dim();
    check_len(n, v.len())?;
    let vnorm = norm(v);
    if vnorm == 0.0 {
        return Err(Error::InvalidArgument(
            "matrix power applied to the zero vector".into(),
        ));
    }
    let max_dim = opts.max_dim.clamp(1, n);
    let mut q = v.to_vec();
    scale(1.0 / vnorm, &mut q);
    let mut basis = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut prev: Option<DVector<f64>> = None;
    let mut coeffs;
    let mut converged = false;
    loop {
        let j = basis.len() - 1;
        op.apply(&basis[j], &mut w)?;
        let c = orthogonalize(&basis, &mut w);
        alpha.push(c[j]);
        let b = norm(&w);
        coeffs = power_coefficients(&alpha, &beta, p)?;
        let s = alpha.len();
        if let Some(prev) = &prev {
            let mut diff = coeffs.clone();
            for i in 0..prev.len() {
                diff[i] -= prev[i];
            }
            if diff.norm() <= opts.tol * coeffs.norm() {
                converged = true;
                break;
            }
        }
        let tscale = alpha
            .iter()
            .chain(&beta)
            .fold(0.0f64, |a, x| a.max(x.abs()));
        if b <= 1e-14 * tscale.max(f64::MIN_POSITIVE) {
            // exact invariant subspace: the projection is exact
            converged = true;
            break;
        }
        if s == max_dim {
            break;
        }
        prev = Some(coeffs);
        beta.push(b);
        scale(1.0 / b, &mut w);
        basis.push(w.clone());
    }
    let mut y = vec![0.0; n];
    for (qv, &cf) in basis.iter().zip(coeffs.iter()) {
        crate::linalg::axpy(vnorm * cf, qv, &mut y);
    }
    Ok(PksmOutput {
        y,
        steps: alpha.len(),
        converged,
    })
}

/// `T^p e_1` for the symmetric tridiagonal `T` with the given diagonals.
fn power_coefficients(alpha: &[f64], beta: &[f64], p: f64) -> Result<DVector<f64>> {
    let s = alpha.len();
    let mut t = DMatrix::zeros(s, s);
    for i in 0..s {
        t[(i, i)] = alpha[i];
        if i + 1 < s {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let (lam, q) = sym_eigen_ascending(t);
    if lam[0] < -1e-10 {
        return Err(Error::NotPositiveDefinite(lam[0]));
    }
    if p < 0.0 && lam[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite(lam[0]));
    }
    let f = DVector::from_iterator(s, (0..s).map(|i| lam[i].max(0.0).powf(p) * q[(0, i)]));
    Ok(&q * f)
}
