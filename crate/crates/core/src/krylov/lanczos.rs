//! Thick-restart Lanczos with full reorthogonalization.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{orthogonalize, random_orthogonal, SymmetricOperator};
use crate::error::{Error, Result};
use crate::linalg::{norm, scale};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// residual tolerance relative to the largest Ritz value magnitude
    pub tol: f64,
    /// basis size before a restart; `None` picks `max(2k + 1, k + 20)`
    pub max_subspace: Option<usize>,
    pub max_restarts: usize,
    /// seed for the start-vector perturbation and breakdown recovery
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_subspace: None,
            max_restarts: 500,
            seed: 0x5eed,
        }
    }
}

/// Extremal eigenpairs, values in descending order.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<f64>,
    /// `n x k`, orthonormal columns
    pub vectors: DMatrix<f64>,
    /// `|A x_i - theta_i x_i|` estimates at termination
    pub residuals: Vec<f64>,
    pub matvecs: usize,
    pub restarts: usize,
}

/// The `k` largest eigenpairs of a symmetric operator.
pub fn lanczos_largest_eigs(
    op: &dyn SymmetricOperator,
    k: usize,
    opts: &LanczosOptions,
) -> Result<EigenResult> {
    let n = op.dim();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k < n for the eigensolver, got k = {k}, n = {n}"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let mmax = opts
        .max_subspace
        .unwrap_or_else(|| (2 * k + 1).max(k + 20))
        .clamp(k + 1, n);
    let keep = (k + (mmax - k) / 2).min(mmax - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v0: Vec<f64> = (0..n)
        .map(|_| 1.0 + 0.1 * rng.random_range(-1.0..1.0))
        .collect();
    let nv = norm(&v0);
    scale(1.0 / nv, &mut v0);

    let mut basis: Vec<Vec<f64>> = vec![v0];
    let mut h = DMatrix::<f64>::zeros(mmax, mmax);
    let mut w = vec![0.0; n];
    let mut matvecs = 0usize;
    let mut best: Option<Vec<f64>> = None;

    for restart in 0..=opts.max_restarts {
        // expand the basis to mmax columns
        let mut beta;
        let mut residual_vec = vec![0.0; n];
        let mut j = basis.len() - 1;
        loop {
            op.apply(&basis[j], &mut w)?;
            matvecs += 1;
            let coeffs = orthogonalize(&basis, &mut w);
            for (i, &c) in coeffs.iter().enumerate() {
                h[(i, j)] = c;
                h[(j, i)] = c;
            }
            beta = norm(&w);
            let scale_est = h.view((0, 0), (j + 1, j + 1)).amax().max(f64::MIN_POSITIVE);
            let full = basis.len() == n;
            if j + 1 == mmax || full {
                if full {
                    beta = 0.0;
                } else {
                    residual_vec.copy_from_slice(&w);
                }
                break;
            }
            let next = if beta > 1e-12 * scale_est {
                let mut q = w.clone();
                scale(1.0 / beta, &mut q);
                q
            } else {
                // invariant subspace found: continue with a fresh direction
                match random_orthogonal(&basis, n, &mut rng) {
                    Some(q) => q,
                    None => {
                        beta = 0.0;
                        break;
                    }
                }
            };
            basis.push(next);
            j += 1;
        }

        let m = basis.len();
        let hm = h.view((0, 0), (m, m)).clone_owned();
        let (theta, s) = crate::linalg::sym_eigen_ascending(hm);
        // descending order of Ritz values
        let order: Vec<usize> = (0..m).rev().collect();
        let anorm = theta
            .iter()
            .fold(0.0f64, |a, t| a.max(t.abs()))
            .max(f64::MIN_POSITIVE);
        let resid: Vec<f64> = order
            .iter()
            .map(|&c| (beta * s[(m - 1, c)]).abs())
            .collect();
        let converged = resid[..k].iter().all(|&r| r <= opts.tol * anorm);
        if best.as_ref().is_none_or(|b| worst(&resid[..k]) < worst(b)) {
            best = Some(resid[..k].to_vec());
        }
        if converged || beta == 0.0 {
            let vectors = ritz_vectors(&basis, &s, &order[..k]);
            return Ok(EigenResult {
                values: order[..k].iter().map(|&c| theta[c]).collect(),
                vectors,
                residuals: resid[..k].to_vec(),
                matvecs,
                restarts: restart,
            });
        }
        if restart == opts.max_restarts {
            break;
        }
        // thick restart: keep the leading Ritz vectors plus the residual direction
        let kept = ritz_vectors(&basis, &s, &order[..keep]);
        let mut new_basis: Vec<Vec<f64>> = (0..keep)
            .map(|c| kept.column(c).iter().copied().collect())
            .collect();
        h.fill(0.0);
        for (i, &c) in order[..keep].iter().enumerate() {
            h[(i, i)] = theta[c];
        }
        let mut f = residual_vec;
        orthogonalize(&new_basis, &mut f);
        let fnorm = norm(&f);
        if fnorm > 0.0 {
            scale(1.0 / fnorm, &mut f);
            new_basis.push(f);
        } else if let Some(q) = random_orthogonal(&new_basis, n, &mut rng) {
            new_basis.push(q);
        }
        basis = new_basis;
    }
    let residuals = best.unwrap_or_default();
    Err(Error::NotConverged {
        matvecs,
        worst_residual: worst(&residuals),
        residuals,
    })
}

fn worst(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |a: f64, &b| a.max(b))
}

fn ritz_vectors(basis: &[Vec<f64>], s: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    let n = basis[0].len();
    let mut out = DMatrix::zeros(n, cols.len());
    for (dst, &c) in cols.iter().enumerate() {
        let mut col = vec![0.0; n];
        for (q, coef) in basis.iter().zip(s.column(c).iter()) {
            crate::linalg::axpy(*coef, q, &mut col);
        }
        let nc = norm(&col);
        for (i, x) in col.iter().enumerate() {
            out[(i, dst)] = x / nc;
        }
    }
    out
}
