//! Lanczos-based eigensolver and matrix-power evaluation for symmetric operators.

mod lanczos;
mod pksm;

pub use lanczos::{lanczos_largest_eigs, EigenResult, LanczosOptions};
pub use pksm::{pksm_apply, pksm_apply_op, PksmOptions, PksmOutput};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(test)]
use crate::error::Error;
use crate::error::{check_len, Result};
use crate::graph::Layer;
use crate::linalg::dot;

/// A symmetric linear map on `R^n`, accessed only through products.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;

    /// `out = A v`
    fn apply(&self, v: &[f64], out: &mut [f64]) -> Result<()>;
}

impl<T: SymmetricOperator + ?Sized> SymmetricOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).apply(v, out)
    }
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.nrows(), v.len())?;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<F> {
    n: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> SymmetricOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        (self.f)(v, out)
    }
}

/// `L_sym + delta I` of one layer.
pub struct LaplacianOperator<'a>(pub &'a Layer);

impl SymmetricOperator for LaplacianOperator<'_> {
    fn dim(&self) -> usize {
        self.0.n()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let y = self.0.apply_sym_laplacian(v)?;
        out.copy_from_slice(&y);
        Ok(())
    }
}

/// Largest relative asymmetry `|<u, Av> - <Au, v>| / max(|<u, Av>|, |<Au, v>|)`
/// over `probes` random pairs.
pub fn symmetry_defect(op: &dyn SymmetricOperator, probes: usize, seed: u64) -> Result<f64> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let (mut au, mut av) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..probes {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        op.apply(&u, &mut au)?;
        op.apply(&v, &mut av)?;
        let (a, b) = (dot(&u, &av), dot(&au, &v));
        let scale = a.abs().max(b.abs());
        if scale > 0.0 {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    Ok(worst)
}

/// Orthogonalizes `w` against the orthonormal columns in `basis` by two passes
/// of classical Gram–Schmidt and returns the accumulated coefficients.
pub(crate) fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        let pass: Vec<f64> = basis.iter().map(|q| dot(q, w)).collect();
        for (q, &c) in basis.iter().zip(&pass) {
            crate::linalg::axpy(-c, q, w);
        }
        for (acc, c) in coeffs.iter_mut().zip(pass) {
            *acc += c;
        }
    }
    coeffs
}

/// A unit vector orthogonal to `basis`, drawn from `rng`. `None` if the basis
/// already spans the space numerically.
pub(crate) fn random_orthogonal(
    basis: &[Vec<f64>],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<f64>> {
    for _ in 0..5 {
        let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let before = crate::linalg::norm(&w);
        orthogonalize(basis, &mut w);
        let after = crate::linalg::norm(&w);
        if after > 1e-8 * before {
            crate::linalg::scale(1.0 / after, &mut w);
            return Some(w);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightOperator;
    use crate::linalg::sym_eigen_ascending;
    use nalgebra::DVector;

    #[test]
    fn diagonal_operator() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]));
        let r = lanczos_largest_eigs(&a, 2, &LanczosOptions::default()).unwrap();
        assert!((r.values[0] - 4.0).abs() < 1e-12 && (r.values[1] - 3.0).abs() < 1e-12);
        assert!((r.vectors[(3, 0)].abs() - 1.0).abs() < 1e-10);
        assert!((r.vectors[(2, 1)].abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn path_graph_top_pair() {
        let w = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 1., 0., 1., 0., 1., 0.]);
        let layer = Layer::new(crate::graph::WeightOperator::dense(w).unwrap()).unwrap();
        let op = FnOperator::new(3, |v: &[f64], out: &mut [f64]| {
            out.copy_from_slice(&layer.apply_normalized_adjacency(v)?);
            Ok(())
        });
        let r = lanczos_largest_eigs(&op, 1, &LanczosOptions::default()).unwrap();
        assert!((r.values[0] - 1.0).abs() < 1e-12);
        let s: Vec<f64> = layer.degrees().iter().map(|d| d.sqrt()).collect();
        let sn = crate::linalg::norm(&s);
        let overlap: f64 = (0..3).map(|i| r.vectors[(i, 0)] * s[i] / sn).sum();
        assert!((overlap.abs() - 1.0).abs() < 1e-10);
    }

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        (&b + b.transpose()) * 0.5
    }

    #[test]
    fn random_symmetric_against_dense() {
        for seed in 0..3 {
            let a = random_symmetric(100, seed);
            let r = lanczos_largest_eigs(&a, 10, &LanczosOptions::default()).unwrap();
            let (vals, _) = sym_eigen_ascending(a.clone());
            for i in 0..10 {
                assert!((r.values[i] - vals[99 - i]).abs() < 1e-8, "{i}");
                let x = r.vectors.column(i);
                let res = (&a * x - x * r.values[i]).norm();
                assert!(res < 1e-6);
            }
            let gram = r.vectors.transpose() * &r.vectors;
            assert!((gram - DMatrix::identity(10, 10)).amax() < 1e-8);
        }
    }

    #[test]
    fn small_full_space() {
        let a = random_symmetric(6, 9);
        let r = lanczos_largest_eigs(&a, 5, &LanczosOptions::default()).unwrap();
        let (vals, _) = sym_eigen_ascending(a);
        for i in 0..5 {
            assert!((r.values[i] - vals[5 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn start_sign_does_not_matter() {
        let a = random_symmetric(80, 4);
        let r1 = lanczos_largest_eigs(&a, 5, &LanczosOptions::default()).unwrap();
        let neg = FnOperator::new(80, |v: &[f64], out: &mut [f64]| {
            let flipped: Vec<f64> = v.iter().map(|x| -x).collect();
            a.apply(&flipped, out)?;
            out.iter_mut().for_each(|x| *x = -*x);
            Ok(())
        });
        let r2 = lanczos_largest_eigs(&neg, 5, &LanczosOptions::default()).unwrap();
        for i in 0..5 {
            assert!((r1.values[i] - r2.values[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_k_at_least_n_and_reports_nonconvergence() {
        let a = random_symmetric(10, 1);
        assert!(lanczos_largest_eigs(&a, 10, &LanczosOptions::default()).is_err());
        let big = random_symmetric(200, 2);
        let opts = LanczosOptions {
            tol: 1e-14,
            max_subspace: Some(12),
            max_restarts: 1,
            ..LanczosOptions::default()
        };
        match lanczos_largest_eigs(&big, 5, &opts) {
            Err(Error::NotConverged { residuals, .. }) => assert_eq!(residuals.len(), 5),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn symmetry_probe_on_layers() {
        let w = DMatrix::from_fn(20, 20, |i, j| {
            if i == j {
                0.0
            } else {
                1.0 / (1.0 + (i + j) as f64)
            }
        });
        let layer = Layer::new(WeightOperator::dense(w).unwrap()).unwrap();
        assert!(symmetry_defect(&LaplacianOperator(&layer), 5, 1).unwrap() < 1e-12);
    }
}
