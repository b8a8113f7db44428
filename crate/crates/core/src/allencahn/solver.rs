use nalgebra::{DMatrix, DVector};

use super::nonlinearity::{nonlinearity, well_product};
use super::simplex::simplex_project_in_place;
use crate::error::{check_len, Error, Result};
use crate::krylov::SymmetricOperator;
use crate::powermean::SpectralBasis;

/// Known labels as one-hot rows plus fidelity weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelData {
    /// `n x m`; row `i` is `e_j` for a node known to be in class `j`, else zero
    pub f: DMatrix<f64>,
    /// `omega_0` on labeled nodes, 0 elsewhere
    pub fidelity: DVector<f64>,
}

impl LabelData {
    /// `labels[i] = Some(j)` marks node `i` as known member of class `j` (0-based).
    pub fn from_labels(labels: &[Option<usize>], m: usize, omega0: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least two classes, got {m}"
            )));
        }
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "fidelity weight must be positive, got {omega0}"
            )));
        }
        let n = labels.len();
        let mut f = DMatrix::zeros(n, m);
        let mut fidelity = DVector::zeros(n);
        for (i, l) in labels.iter().enumerate() {
            if let Some(j) = *l {
                if j >= m {
                    return Err(Error::InvalidArgument(format!(
                        "node {i} has class {j} but m = {m}"
                    )));
                }
                f[(i, j)] = 1.0;
                fidelity[i] = omega0;
            }
        }
        Ok(Self { f, fidelity })
    }

    pub fn n(&self) -> usize {
        self.f.nrows()
    }

    pub fn m(&self) -> usize {
        self.f.ncols()
    }

    /// Known class of node `i`, if any.
    pub fn label(&self, i: usize) -> Option<usize> {
        (self.fidelity[i] > 0.0)
            .then(|| (0..self.m()).find(|&j| self.f[(i, j)] == 1.0))
            .flatten()
    }

    pub fn num_labeled(&self) -> usize {
        self.fidelity.iter().filter(|&&w| w > 0.0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllenCahnParams {
    pub epsilon: f64,
    pub omega0: f64,
    pub c: f64,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AllenCahnParams {
    fn default() -> Self {
        let epsilon = 5e-3;
        let omega0 = 1000.0;
        Self {
            epsilon,
            omega0,
            c: omega0 + 3.0 / epsilon,
            dt: 0.01,
            tol: 1e-6,
            max_iter: 300,
        }
    }
}

impl AllenCahnParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.epsilon, self.omega0, self.c, self.dt];
        if positive.iter().any(|x| !(*x > 0.0 && x.is_finite()))
            || !(self.tol >= 0.0)
            || self.max_iter == 0
        {
            return Err(Error::InvalidArgument(format!(
                "Allen-Cahn parameters must be positive: {self:?}"
            )));
        }
        if self.c < self.omega0 + 1.0 / self.epsilon {
            return Err(Error::InvalidArgument(format!(
                "convexity constant c = {} is below omega0 + 1/epsilon = {}",
                self.c,
                self.omega0 + 1.0 / self.epsilon
            )));
        }
        Ok(())
    }
}

/// Class scores, one row per node on the Gibbs simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix(pub DMatrix<f64>);

impl ScoreMatrix {
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn m(&self) -> usize {
        self.0.ncols()
    }

    /// Largest deviation from the simplex over all rows.
    pub fn simplex_defect(&self) -> f64 {
        self.0
            .row_iter()
            .map(|r| {
                let neg = r.iter().fold(0.0f64, |a, &x| a.max(-x));
                neg.max((r.sum() - 1.0).abs())
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct AllenCahnResult {
    pub scores: ScoreMatrix,
    pub iterations: usize,
    /// whether the relative-change test was met before `max_iter`
    pub converged: bool,
    pub last_change: f64,
}

/// Runs the projected spectral iteration until the relative change
/// `max_i |u_i^{l+1} - u_i^l|^2 / max_i |u_i^{l+1}|^2` drops to `tol`.
pub fn allen_cahn_solve(
    basis: &SpectralBasis,
    labels: &LabelData,
    params: &AllenCahnParams,
) -> Result<AllenCahnResult> {
    allen_cahn_solve_observed(basis, labels, params, |_, _| {})
}

/// As [`allen_cahn_solve`], calling `observe(l, U^l)` after every projected step.
pub fn allen_cahn_solve_observed(
    basis: &SpectralBasis,
    labels: &LabelData,
    params: &AllenCahnParams,
    mut observe: impl FnMut(usize, &DMatrix<f64>),
) -> Result<AllenCahnResult> {
    params.validate()?;
    let n = basis.n();
    let m = labels.m();
    check_len(n, labels.n())?;
    let phi = &basis.vectors;
    let AllenCahnParams { epsilon, c, dt, .. } = *params;

    let mut u = DMatrix::from_element(n, m, 1.0 / m as f64);
    for i in 0..n {
        if let Some(j) = labels.label(i) {
            u.row_mut(i).fill(0.0);
            u[(i, j)] = 1.0;
        }
    }
    // Z = [(1 + c dt) I + eps dt Lambda_k]^{-1} Phi_k^T
    let denom = basis.values.map(|l| 1.0 + c * dt + epsilon * dt * l);
    let mut z = phi.transpose();
    for (r, d) in denom.iter().enumerate() {
        z.row_mut(r).scale_mut(1.0 / d);
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut last_change = f64::INFINITY;
    while iterations < params.max_iter {
        let t = nonlinearity(&u);
        let mut rhs = &u * (1.0 + c * dt) - t * (dt / (2.0 * epsilon));
        for i in 0..n {
            let w = labels.fidelity[i];
            if w != 0.0 {
                for j in 0..m {
                    rhs[(i, j)] -= dt * w * (u[(i, j)] - labels.f[(i, j)]);
                }
            }
        }
        let v = &z * rhs;
        let mut next = phi * v;
        iterations += 1;
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::Diverged(iterations));
        }
        for mut row in next.row_iter_mut() {
            let mut buf: Vec<f64> = row.iter().copied().collect();
            simplex_project_in_place(&mut buf)?;
            for (dst, src) in row.iter_mut().zip(buf) {
                *dst = src;
            }
        }
        let diff = (0..n)
            .map(|i| (next.row(i) - u.row(i)).norm_squared())
            .fold(0.0, f64::max);
        let size = (0..n)
            .map(|i| next.row(i).norm_squared())
            .fold(0.0, f64::max);
        last_change = if size > 0.0 { diff / size } else { 0.0 };
        u = next;
        observe(iterations, &u);
        if last_change <= params.tol {
            converged = true;
            break;
        }
    }
    Ok(AllenCahnResult {
        scores: ScoreMatrix(u),
        iterations,
        converged,
        last_change,
    })
}

/// Row-wise argmax, ties going to the lowest class index (0-based).
pub fn predict_labels(u: &ScoreMatrix) -> Vec<usize> {
    u.0.row_iter()
        .map(|r| {
            let mut best = 0;
            for j in 1..r.len() {
                if r[j] > r[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Source of the Dirichlet term `trace(U^T L U)`.
pub enum DirichletTerm<'a> {
    /// truncated: `trace(U^T Phi_k Lambda_k Phi_k^T U)`
    Basis(&'a SpectralBasis),
    /// exact, through products with `L`
    Operator(&'a dyn SymmetricOperator),
}

/// `(eps/2) tr(U^T L U) + (1/(2 eps)) sum_i prod_l (1/4)|u_i - e_l|_1^2
///  + (1/2) sum_i omega_i |f_i - u_i|^2`.
pub fn ginzburg_landau_energy(
    u: &DMatrix<f64>,
    dirichlet: DirichletTerm<'_>,
    labels: &LabelData,
    epsilon: f64,
) -> Result<f64> {
    let (n, m) = u.shape();
    check_len(n, labels.n())?;
    check_len(m, labels.m())?;
    let smooth = match dirichlet {
        DirichletTerm::Basis(b) => {
            check_len(n, b.n())?;
            let coef = b.vectors.transpose() * u;
            (0..b.k())
                .map(|r| b.values[r] * coef.row(r).norm_squared())
                .sum::<f64>()
        }
        DirichletTerm::Operator(op) => {
            check_len(n, op.dim())?;
            let mut acc = 0.0;
            let mut out = vec![0.0; n];
            for j in 0..m {
                let col: Vec<f64> = u.column(j).iter().copied().collect();
                op.apply(&col, &mut out)?;
                acc += crate::linalg::dot(&col, &out);
            }
            acc
        }
    };
    let wells: f64 = u
        .row_iter()
        .map(|r| well_product(&r.iter().copied().collect::<Vec<_>>()))
        .sum();
    let fit: f64 = (0..n)
        .map(|i| labels.fidelity[i] * (labels.f.row(i) - u.row(i)).norm_squared())
        .sum();
    Ok(0.5 * epsilon * smooth + wells / (2.0 * epsilon) + 0.5 * fit)
}
