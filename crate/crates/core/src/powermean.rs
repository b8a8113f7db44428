//! Power mean Laplacian `L_p = ((1/T) sum_t L_sym^(t)^p)^(1/p)` of a
//! multilayer graph and its smallest eigenpairs.
//!
//! Two matrix-free paths exist: `p = 1` works on `I - L_1`, and `p < 0` works on
//! `L_{p,delta}^p = (1/T) sum_t (L_sym^(t) + delta I)^p` with each power applied
//! by a polynomial Krylov method. Other positive `p` use dense matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::graph::MultilayerGraph;
use crate::krylov::{lanczos_largest_eigs, pksm_apply, FnOperator, LanczosOptions, PksmOptions};
use crate::linalg::{sym_eigen_ascending, sym_matrix_function};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerMeanConfig {
    pub p: f64,
    /// diagonal shift; `None` means `log(1 + |p|)` for `p < 0` and 0 otherwise
    pub delta: Option<f64>,
    /// largest `n` for the dense path
    pub dense_limit: usize,
    pub pksm: PksmOptions,
    pub lanczos: LanczosOptions,
}

impl PowerMeanConfig {
    pub fn new(p: f64) -> Result<Self> {
        let cfg = Self {
            p,
            delta: None,
            dense_limit: 5000,
            pksm: PksmOptions::default(),
            lanczos: LanczosOptions::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = Some(delta);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0.0 || !self.p.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "power must be finite and nonzero, got {}",
                self.p
            )));
        }
        if let Some(d) = self.delta {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "shift must be >= 0, got {d}"
                )));
            }
            if self.p < 0.0 && d == 0.0 {
                return Err(Error::InvalidArgument(
                    "negative powers need a positive shift".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn effective_delta(&self) -> f64 {
        self.delta.unwrap_or(if self.p < 0.0 {
            (1.0 + self.p.abs()).ln()
        } else {
            0.0
        })
    }
}

/// Smallest eigenpairs, values ascending.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub values: DVector<f64>,
    /// `n x k`, orthonormal columns
    pub vectors: DMatrix<f64>,
}

impl SpectralBasis {
    pub fn new(values: DVector<f64>, vectors: DMatrix<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("spectral basis needs k >= 1".into()));
        }
        check_len(values.len(), vectors.ncols())?;
        if values.as_slice().windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be ascending".into(),
            ));
        }
        Ok(Self { values, vectors })
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }
}

/// `(1/T) sum_t D_t^{-1/2} W_t D_t^{-1/2} v`; layer shifts play no role.
pub fn apply_one_minus_l1(graph: &MultilayerGraph, v: &[f64]) -> Result<Vec<f64>> {
    check_len(graph.n(), v.len())?;
    let mut acc = vec![0.0; graph.n()];
    for layer in graph.layers() {
        let y = layer.apply_normalized_adjacency(v)?;
        crate::linalg::axpy(1.0, &y, &mut acc);
    }
    crate::linalg::scale(1.0 / graph.num_layers() as f64, &mut acc);
    Ok(acc)
}

/// `(1/T) sum_t (L_sym^(t) + delta_t I)^p v` with the shifts stored on the layers.
pub fn apply_lp_power(
    graph: &MultilayerGraph,
    p: f64,
    v: &[f64],
    opts: &PksmOptions,
) -> Result<Vec<f64>> {
    if !(p < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "matrix-free power path needs p < 0, got {p}"
        )));
    }
    check_len(graph.n(), v.len())?;
    let mut acc = vec![0.0; graph.n()];
    for (t, layer) in graph.layers().iter().enumerate() {
        if !(layer.shift() > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "layer {t} needs a positive shift for p < 0"
            )));
        }
        let out = pksm_apply(layer, p, v, opts)?;
        if !out.converged {
            log::debug!(
                "layer {t}: power approximation stopped at dimension {}",
                out.steps
            );
        }
        crate::linalg::axpy(1.0, &out.y, &mut acc);
    }
    crate::linalg::scale(1.0 / graph.num_layers() as f64, &mut acc);
    Ok(acc)
}

/// The `k` smallest eigenpairs of `L_p` (or `L_{p,delta}` when shifted).
pub fn power_mean_eigs(
    graph: &MultilayerGraph,
    cfg: &PowerMeanConfig,
    k: usize,
    tol: f64,
) -> Result<SpectralBasis> {
    cfg.validate()?;
    let n = graph.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k < n for the eigensolver, got k = {k}, n = {n}"
        )));
    }
    let delta = cfg.effective_delta();
    let lanczos = LanczosOptions { tol, ..cfg.lanczos };
    if cfg.p == 1.0 {
        let op = FnOperator::new(n, |v: &[f64], out: &mut [f64]| {
            out.copy_from_slice(&apply_one_minus_l1(graph, v)?);
            Ok(())
        });
        let r = lanczos_largest_eigs(&op, k, &lanczos)?;
        let values =
            DVector::from_iterator(k, r.values.iter().map(|mu| (1.0 - mu + delta).max(0.0)));
        return SpectralBasis::new(values, r.vectors);
    }
    if cfg.p < 0.0 {
        let shifted = graph.with_shift(delta)?;
        let p = cfg.p;
        let op = FnOperator::new(n, |v: &[f64], out: &mut [f64]| {
            out.copy_from_slice(&apply_lp_power(&shifted, p, v, &cfg.pksm)?);
            Ok(())
        });
        let r = lanczos_largest_eigs(&op, k, &lanczos)?;
        let mut values = Vec::with_capacity(k);
        for &mu in &r.values {
            if !(mu > 0.0) {
                return Err(Error::NotPositiveDefinite(mu));
            }
            values.push(mu.powf(1.0 / p).max(0.0));
        }
        return SpectralBasis::new(DVector::from_vec(values), r.vectors);
    }
    dense_power_mean_eigs(graph, cfg.p, delta, k, cfg.dense_limit)
}

/// Dense assembly: `M = (1/T) sum_t (L_t + delta I)^p`, eigenvalues of `M^{1/p}`.
pub fn dense_power_mean_eigs(
    graph: &MultilayerGraph,
    p: f64,
    delta: f64,
    k: usize,
    dense_limit: usize,
) -> Result<SpectralBasis> {
    let n = graph.n();
    if n > dense_limit {
        return Err(Error::DenseLimit {
            n,
            limit: dense_limit,
        });
    }
    let m = dense_power_mean_matrix(graph, p, delta)?;
    let (mu, vecs) = sym_eigen_ascending(m);
    // mu -> mu^{1/p} is increasing for p > 0 and decreasing for p < 0
    let idx: Vec<usize> = if p > 0.0 {
        (0..k).collect()
    } else {
        (n - k..n).rev().collect()
    };
    let mut values = Vec::with_capacity(k);
    let mut vectors = DMatrix::zeros(n, k);
    for (dst, &i) in idx.iter().enumerate() {
        let m = mu[i];
        if p < 0.0 && !(m > 0.0) {
            return Err(Error::NotPositiveDefinite(m));
        }
        values.push(m.max(0.0).powf(1.0 / p));
        vectors.set_column(dst, &vecs.column(i));
    }
    SpectralBasis::new(DVector::from_vec(values), vectors)
}

/// `(1/T) sum_t (L_sym^(t) + delta I)^p` as an explicit matrix.
pub fn dense_power_mean_matrix(
    graph: &MultilayerGraph,
    p: f64,
    delta: f64,
) -> Result<DMatrix<f64>> {
    let n = graph.n();
    let mut m = DMatrix::zeros(n, n);
    for layer in graph.layers() {
        let l = layer.with_shift(delta)?.dense_sym_laplacian();
        let lp = if p == 1.0 {
            l
        } else {
            let mut bad = None;
            let r = sym_matrix_function(l, |x| {
                if p < 0.0 && x <= 0.0 {
                    bad = Some(x);
                }
                x.max(0.0).powf(p)
            });
            if let Some(x) = bad {
                return Err(Error::NotPositiveDefinite(x));
            }
            r
        };
        m += lp;
    }
    m /= graph.num_layers() as f64;
    // keep exact symmetry
    let mt = m.transpose();
    Ok((m + mt) * 0.5)
}
