//! NFFT-based fast summation of radial kernel sums.
//!
//! For nodes `x_j` in the box `[-1/4 + eps_B/2, 1/4 - eps_B/2]^d` and `d <= 3`,
//! `sum_j v_j K(x_i - x_j)` is approximated by a trigonometric polynomial of
//! bandwidth `N` fitted to a smooth 1-periodic version of `K`. Evaluating that
//! polynomial at all nodes costs one adjoint and one forward NFFT, i.e.
//! `O(n + N^d log N)`.
//!
//! The window is Kaiser–Bessel with oversampling `rho = 2`. Kernels with a
//! cusp at the origin are additionally smoothed on a small ball of radius
//! `eps_I = p / N`, and the difference is added back by direct summation over
//! pairs closer than `eps_I`.

mod fft;
mod nfft;
mod regularize;
mod window;

pub use fft::FftNd;
pub use nfft::NfftGeometry;
pub use regularize::{
    centered_indices, default_inner_radius, evaluate_series, kernel_fourier_coefficients,
    wrap_half, InnerPolynomial, PeriodicSquare, RegularizedKernel,
};
pub use window::{bessel_i0, KaiserBessel};

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::kernel::KernelSpec;

/// Node coordinates, `n x d` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    coords: Vec<f64>,
    d: usize,
}

impl PointSet {
    pub fn new(coords: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument(
                "point dimension must be >= 1".into(),
            ));
        }
        if !coords.len().is_multiple_of(d) {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates do not split into rows of width {d}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("coordinate {bad}")));
        }
        Ok(Self { coords, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(1, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("ragged point rows".into()));
        }
        Self::new(rows.concat(), d)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Rows `range` as a new point set.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            coords: self.coords[range.start * self.d..range.end * self.d].to_vec(),
            d: self.d,
        }
    }

    /// Largest admissible coordinate magnitude for regularization length `eps_b`.
    pub fn box_bound(eps_b: f64) -> f64 {
        0.25 - eps_b / 2.0
    }

    /// Fails unless every coordinate satisfies `|x| <= 1/4 - eps_b/2`.
    pub fn check_box(&self, eps_b: f64) -> Result<()> {
        let bound = Self::box_bound(eps_b);
        match self.coords.iter().position(|c| c.abs() > bound) {
            Some(flat) => Err(Error::OutsideBox {
                index: flat / self.d,
                bound,
            }),
            None => Ok(()),
        }
    }
}

/// Tunable parameters of the fast summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastsumParams {
    /// bandwidth `N`, even
    pub bandwidth: usize,
    /// window cutoff `m`
    pub cutoff: usize,
    /// regularization length `eps_B`
    pub eps_b: f64,
    /// smoothness degree `p` of the boundary regularization
    pub degree: usize,
    /// oversampling factor `rho`
    pub oversampling: f64,
}

impl Default for FastsumParams {
    fn default() -> Self {
        Self {
            bandwidth: 64,
            cutoff: 5,
            eps_b: 1.0 / 16.0,
            degree: 5,
            oversampling: 2.0,
        }
    }
}

/// Precomputed state for repeated products with one kernel in dimension `d`.
#[derive(Debug, Clone)]
pub struct FastsumPlan {
    kernel: KernelSpec,
    params: FastsumParams,
    geometry: NfftGeometry,
    coeffs: Vec<Complex64>,
    inner: Option<InnerPolynomial>,
    /// `b_l / D_l^2` at the oversampled-grid slot of each `l in I_N^d`
    multiplier: Vec<(usize, f64)>,
}

impl FastsumPlan {
    pub fn new(kernel: KernelSpec, d: usize, params: FastsumParams) -> Result<Self> {
        let coeffs =
            kernel_fourier_coefficients(&kernel, d, params.bandwidth, params.eps_b, params.degree)?;
        let geometry = NfftGeometry::new(d, params.bandwidth, params.cutoff, params.oversampling)?;
        let multiplier = symmetric_multiplier(&geometry, &coeffs);
        let inner = (!kernel.is_smooth())
            .then(|| {
                InnerPolynomial::new(
                    &kernel,
                    default_inner_radius(params.bandwidth, params.degree),
                    params.degree,
                )
            })
            .transpose()?;
        Ok(Self {
            kernel,
            params,
            geometry,
            coeffs,
            inner,
            multiplier,
        })
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn params(&self) -> &FastsumParams {
        &self.params
    }

    /// Fourier coefficients of the regularized kernel, centered order over `I_N^d`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Inner regularization, present for kernels with a cusp at the origin.
    pub fn inner(&self) -> Option<&InnerPolynomial> {
        self.inner.as_ref()
    }

    pub fn geometry(&self) -> &NfftGeometry {
        &self.geometry
    }

    pub fn window_descriptor(&self) -> String {
        format!(
            "kaiser-bessel(m={}, rho={}, grid={}, shape={:.6})",
            self.params.cutoff,
            self.params.oversampling,
            self.geometry.grid_len(),
            self.geometry.window().shape()
        )
    }

    fn check(&self, points: &PointSet) -> Result<()> {
        if points.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: points.dim(),
            });
        }
        points.check_box(self.params.eps_b)
    }
}

/// Filter applied between the two transforms.
///
/// A frequency with a component at `-N/2` has no partner inside `I_N`, which
/// would leave an imaginary part of order `|b_{-N/2}|` in the output. Its
/// weight is split evenly between `-N/2` and `+N/2` on the oversampled grid,
/// so real input gives real output up to rounding.
fn symmetric_multiplier(geometry: &NfftGeometry, coeffs: &[Complex64]) -> Vec<(usize, f64)> {
    let d = geometry.dim();
    let big_n = geometry.bandwidth() as i64;
    let n = geometry.grid_len() as i64;
    let half = big_n / 2;
    let mut out = Vec::with_capacity(coeffs.len());
    for ((l, (_, dec)), b) in centered_indices(d, big_n as usize)
        .zip(geometry.passband())
        .zip(coeffs)
    {
        let edges: Vec<usize> = (0..d).filter(|&a| l[a] == -half).collect();
        let weight = b.re / (dec * dec) / (1usize << edges.len()) as f64;
        // every sign combination of the edge components
        for mask in 0..(1usize << edges.len()) {
            let mut pos = 0usize;
            for (a, &la) in l.iter().enumerate().take(d) {
                let flip = edges
                    .iter()
                    .position(|&e| e == a)
                    .is_some_and(|bit| mask >> bit & 1 == 1);
                let la = if flip { half } else { la };
                pos = pos * n as usize + la.rem_euclid(n) as usize;
            }
            out.push((pos, weight));
        }
    }
    out
}

/// Adjoint NFFT `h_l ~ sum_j v_j e^{-2 pi i l.x_j}`, `l in I_N^d` in centered order.
pub fn nfft_adjoint(points: &PointSet, v: &[f64], plan: &FastsumPlan) -> Result<Vec<Complex64>> {
    plan.check(points)?;
    plan.geometry.adjoint(points, v)
}

/// Forward NFFT `f(x_i) ~ sum_l c_l e^{2 pi i l.x_i}`.
pub fn nfft_forward(
    coeffs: &[Complex64],
    points: &PointSet,
    plan: &FastsumPlan,
) -> Result<Vec<Complex64>> {
    plan.check(points)?;
    plan.geometry.forward(coeffs, points)
}

/// Result of a fast product together with the discarded imaginary part.
#[derive(Debug, Clone)]
pub struct FastsumOutput {
    pub values: Vec<f64>,
    pub imag_residue: f64,
}

/// `W v` with `W_ij = K(x_i - x_j)` off the diagonal, computed as
/// `W~ v - K(0) v` through the fused adjoint/forward transform.
pub fn fastsum_apply(points: &PointSet, v: &[f64], plan: &FastsumPlan) -> Result<Vec<f64>> {
    let out = fastsum_apply_detailed(points, v, plan)?;
    let vnorm = crate::linalg::norm(v);
    if out.imag_residue > 1e-8 * vnorm {
        log::warn!(
            "fast summation imaginary residue {:.3e} exceeds 1e-8 |v| = {:.3e}",
            out.imag_residue,
            1e-8 * vnorm
        );
    }
    Ok(out.values)
}

pub fn fastsum_apply_detailed(
    points: &PointSet,
    v: &[f64],
    plan: &FastsumPlan,
) -> Result<FastsumOutput> {
    plan.check(points)?;
    check_len(points.len(), v.len())?;
    let geo = &plan.geometry;
    let mut grid = geo.spread(points, v);
    geo.fft().forward(&mut grid);
    let mut filtered = vec![Complex64::new(0.0, 0.0); grid.len()];
    for &(pos, mult) in &plan.multiplier {
        filtered[pos] += grid[pos] * mult;
    }
    geo.fft().inverse(&mut filtered);
    let raw = geo.interpolate(points, &filtered);
    let k0 = match &plan.inner {
        Some(inner) => inner.eval(0.0),
        None => plan.kernel.at_origin(),
    };
    let mut imag_sq = 0.0;
    let values = raw
        .iter()
        .zip(v)
        .map(|(z, &vi)| {
            imag_sq += z.im * z.im;
            z.re - k0 * vi
        })
        .collect();
    let mut values: Vec<f64> = values;
    if let Some(inner) = &plan.inner {
        near_field_correction(points, v, &plan.kernel, inner, &mut values);
    }
    Ok(FastsumOutput {
        values,
        imag_residue: imag_sq.sqrt(),
    })
}

/// Adds `sum_{0 < |x_i - x_j| < eps_I} (K - K_I)(x_i - x_j) v_j` using a cell
/// grid of width `eps_I` over the admissible box.
fn near_field_correction(
    points: &PointSet,
    v: &[f64],
    kernel: &KernelSpec,
    inner: &InnerPolynomial,
    out: &mut [f64],
) {
    let d = points.dim();
    let eps = inner.radius();
    let cells = ((0.5 / eps).ceil() as usize).max(1);
    let cell_of = |x: &[f64]| -> [usize; 3] {
        let mut c = [0usize; 3];
        for a in 0..d {
            c[a] = (((x[a] + 0.25) / eps).floor().max(0.0) as usize).min(cells - 1);
        }
        c
    };
    let flat = |c: [usize; 3]| c.iter().take(d).fold(0, |acc, &ci| acc * cells + ci);
    let total = cells.pow(d as u32);
    // counting sort of nodes by cell
    let keys: Vec<usize> = (0..points.len())
        .map(|i| flat(cell_of(points.point(i))))
        .collect();
    let mut start = vec![0usize; total + 1];
    for &k in &keys {
        start[k + 1] += 1;
    }
    for c in 0..total {
        start[c + 1] += start[c];
    }
    let mut fill = start.clone();
    let mut order = vec![0usize; keys.len()];
    for (i, &k) in keys.iter().enumerate() {
        order[fill[k]] = i;
        fill[k] += 1;
    }
    let eps2 = eps * eps;
    let offsets: Vec<[i64; 3]> = (0..3usize.pow(d as u32))
        .map(|mut f| {
            let mut o = [0i64; 3];
            for a in 0..d {
                o[a] = (f % 3) as i64 - 1;
                f /= 3;
            }
            o
        })
        .collect();
    for i in 0..points.len() {
        let xi = points.point(i);
        let ci = cell_of(xi);
        for off in &offsets {
            let mut cj = [0usize; 3];
            let mut inside = true;
            for a in 0..d {
                let c = ci[a] as i64 + off[a];
                if c < 0 || c >= cells as i64 {
                    inside = false;
                    break;
                }
                cj[a] = c as usize;
            }
            if !inside {
                continue;
            }
            let key = flat(cj);
            for &j in &order[start[key]..start[key + 1]] {
                if j <= i {
                    continue;
                }
                let xj = points.point(j);
                let r2: f64 = (0..d).map(|a| (xi[a] - xj[a]).powi(2)).sum();
                if r2 >= eps2 {
                    continue;
                }
                let corr = kernel.eval_sq(r2) - inner.eval(r2.sqrt());
                out[i] += corr * v[j];
                out[j] += corr * v[i];
            }
        }
    }
}

/// Exact `W v` by direct summation over all pairs, any dimension.
pub fn direct_apply(points: &PointSet, v: &[f64], kernel: &KernelSpec) -> Result<Vec<f64>> {
    check_len(points.len(), v.len())?;
    let n = points.len();
    let d = points.dim();
    let x = points.coords();
    let mut out = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let xi = &x[i * d..(i + 1) * d];
        let rest = &x[(i + 1) * d..];
        let wi = &mut w[..n - i - 1];
        for (wk, xj) in wi.iter_mut().zip(rest.chunks_exact(d)) {
            let mut r2 = 0.0;
            for a in 0..d {
                let t = xi[a] - xj[a];
                r2 += t * t;
            }
            *wk = kernel.eval_sq(r2);
        }
        let vi = v[i];
        let mut acc = 0.0;
        for ((&wk, &vj), oj) in wi.iter().zip(&v[i + 1..]).zip(&mut out[i + 1..]) {
            acc += wk * vj;
            *oj += wk * vi;
        }
        out[i] += acc;
    }
    Ok(out)
}
