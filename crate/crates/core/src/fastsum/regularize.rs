//! Smooth 1-periodic regularization of a radial kernel and its Fourier
//! coefficients on the bandwidth-`N` index set.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::fft::FftNd;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// Periodic replacement for `t^2` on `[-1/2, 1/2)`.
///
/// Equal to `t^2` for `|t| <= 1/2 - eps`. On the outer shell it is an even
/// polynomial in `1/2 - |t|` matching `t^2` and its first `p - 1` derivatives
/// at the junction, so all odd derivatives vanish at `|t| = 1/2` and the
/// periodic extension is `C^{p-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSquare {
    eps: f64,
    coeffs: Vec<f64>,
}

impl PeriodicSquare {
    pub fn new(eps: f64, p: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "regularization length must lie in (0, 1/2), got {eps}"
            )));
        }
        if p == 0 {
            return Err(Error::InvalidArgument(
                "regularization degree must be >= 1".into(),
            ));
        }
        // Q(u) with u = s / eps, s = 1/2 - |t|, against G(u) = (1/2 - eps u)^2
        let targets: Vec<f64> = (0..p)
            .map(|r| match r {
                0 => (0.5 - eps).powi(2),
                1 => -2.0 * eps * (0.5 - eps),
                2 => 2.0 * eps * eps,
                _ => 0.0,
            })
            .collect();
        Ok(Self {
            eps,
            coeffs: even_fit(&targets)?,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = wrap_half(t).abs();
        if t <= 0.5 - self.eps {
            return t * t;
        }
        let u = (0.5 - t) / self.eps;
        eval_even(&self.coeffs, u).max(0.0)
    }
}

/// Smooth replacement of a radial profile `k(r)` on `r < eps` by an even
/// polynomial matching `k` and its first `p - 1` derivatives at `r = eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerPolynomial {
    eps: f64,
    coeffs: Vec<f64>,
}

impl InnerPolynomial {
    pub fn new(kernel: &KernelSpec, eps: f64, p: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) || p == 0 {
            return Err(Error::InvalidArgument(format!(
                "inner regularization needs 0 < eps < 1/2 and p >= 1, got {eps}, {p}"
            )));
        }
        let targets: Vec<f64> = (0..p)
            .map(|r| eps.powi(r as i32) * kernel.radial_derivative(r, eps))
            .collect();
        Ok(Self {
            eps,
            coeffs: even_fit(&targets)?,
        })
    }

    pub fn radius(&self) -> f64 {
        self.eps
    }

    pub fn eval(&self, r: f64) -> f64 {
        eval_even(&self.coeffs, r / self.eps)
    }
}

/// Coefficients `a_j` of `Q(u) = sum_j a_j u^{2j}` with `Q^{(r)}(1) = targets[r]`.
fn even_fit(targets: &[f64]) -> Result<Vec<f64>> {
    let p = targets.len();
    let mut a = DMatrix::zeros(p, p);
    let rhs = DVector::from_column_slice(targets);
    for r in 0..p {
        for j in 0..p {
            let pow = 2 * j;
            if pow >= r {
                a[(r, j)] = falling_factorial(pow, r);
            }
        }
    }
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidArgument("singular regularization system".into()))?;
    Ok(sol.iter().copied().collect())
}

fn eval_even(coeffs: &[f64], u: f64) -> f64 {
    let u2 = u * u;
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u2 + c)
}

fn falling_factorial(n: usize, r: usize) -> f64 {
    (0..r).map(|i| (n - i) as f64).product()
}

/// Maps `t` to its representative in `[-1/2, 1/2)`.
pub fn wrap_half(t: f64) -> f64 {
    t - (t + 0.5).floor()
}

/// Regularized periodic kernel `K_R(y) = k_R(sqrt(sum_i h(y_i)))`, where
/// `k_R` is `k` with an optional smooth inner replacement near `r = 0`.
#[derive(Debug, Clone)]
pub struct RegularizedKernel {
    kernel: KernelSpec,
    h: PeriodicSquare,
    inner: Option<InnerPolynomial>,
}

impl RegularizedKernel {
    pub fn new(kernel: KernelSpec, eps_b: f64, p: usize, eps_i: Option<f64>) -> Result<Self> {
        let inner = eps_i
            .map(|e| InnerPolynomial::new(&kernel, e, p))
            .transpose()?;
        Ok(Self {
            kernel,
            h: PeriodicSquare::new(eps_b, p)?,
            inner,
        })
    }

    pub fn inner(&self) -> Option<&InnerPolynomial> {
        self.inner.as_ref()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let r2: f64 = y.iter().map(|&t| self.h.eval(t)).sum();
        match &self.inner {
            Some(inner) if r2 < inner.radius() * inner.radius() => inner.eval(r2.sqrt()),
            _ => self.kernel.eval_sq(r2),
        }
    }
}

/// Iterates over the multi-indices of `I_N^d` in centered row-major order
/// (last axis fastest), yielding signed frequencies.
pub fn centered_indices(d: usize, big_n: usize) -> impl Iterator<Item = [i64; 3]> {
    let half = (big_n / 2) as i64;
    let total = big_n.pow(d as u32);
    (0..total).map(move |mut flat| {
        let mut idx = [0i64; 3];
        for axis in (0..d).rev() {
            idx[axis] = (flat % big_n) as i64 - half;
            flat /= big_n;
        }
        idx
    })
}

/// Fourier coefficients `b_l = N^{-d} sum_k K_R(k/N) e^{-2 pi i l.k/N}` for
/// `l` in `I_N^d`, stored in centered row-major order. Kernels that are not
/// smooth at the origin get the inner regularization of radius `p / N`.
pub fn kernel_fourier_coefficients(
    kernel: &KernelSpec,
    d: usize,
    big_n: usize,
    eps_b: f64,
    p: usize,
) -> Result<Vec<Complex64>> {
    check_bandwidth(d, big_n)?;
    let eps_i = (!kernel.is_smooth()).then(|| default_inner_radius(big_n, p));
    let reg = RegularizedKernel::new(*kernel, eps_b, p, eps_i)?;
    coefficients_of(|y| reg.eval(y), d, big_n)
}

pub fn default_inner_radius(big_n: usize, p: usize) -> f64 {
    (p as f64 / big_n as f64).min(0.25)
}

pub(crate) fn check_bandwidth(d: usize, big_n: usize) -> Result<()> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidArgument(format!(
            "fast summation supports 1 <= d <= 3, got d = {d}; group features first"
        )));
    }
    if !big_n.is_multiple_of(2) || big_n < 8 {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be even and >= 8, got {big_n}"
        )));
    }
    Ok(())
}

/// Same transform for an arbitrary 1-periodic sample function.
pub(crate) fn coefficients_of(
    f: impl Fn(&[f64]) -> f64,
    d: usize,
    big_n: usize,
) -> Result<Vec<Complex64>> {
    let total = big_n.pow(d as u32);
    // samples in FFT layout: position (k mod N) holds K_R(k/N)
    let mut grid = vec![Complex64::new(0.0, 0.0); total];
    let mut y = [0.0; 3];
    for (flat, slot) in grid.iter_mut().enumerate() {
        let mut rest = flat;
        for axis in (0..d).rev() {
            let k = rest % big_n;
            rest /= big_n;
            let signed = if k >= big_n / 2 {
                k as i64 - big_n as i64
            } else {
                k as i64
            };
            y[axis] = signed as f64 / big_n as f64;
        }
        *slot = Complex64::new(f(&y[..d]), 0.0);
    }
    let fft = FftNd::new(d, big_n);
    fft.forward(&mut grid);
    let scale = 1.0 / total as f64;
    let mut out = Vec::with_capacity(total);
    for idx in centered_indices(d, big_n) {
        let mut pos = 0usize;
        for &l in idx.iter().take(d) {
            pos = pos * big_n + l.rem_euclid(big_n as i64) as usize;
        }
        out.push(grid[pos] * scale);
    }
    Ok(out)
}

/// Evaluates `sum_l b_l e^{2 pi i l.y}` directly; test and diagnostic use.
pub fn evaluate_series(coeffs: &[Complex64], d: usize, big_n: usize, y: &[f64]) -> Complex64 {
    use std::f64::consts::PI;
    centered_indices(d, big_n)
        .zip(coeffs)
        .map(|(l, &b)| {
            let phase: f64 = (0..d).map(|a| l[a] as f64 * y[a]).sum();
            b * Complex64::from_polar(1.0, 2.0 * PI * phase)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn periodic_square_is_smooth_at_the_junction() {
        let eps = 1.0 / 16.0;
        let h = PeriodicSquare::new(eps, 5).unwrap();
        let t0 = 0.5 - eps;
        let step = 1e-4;
        // value and one-sided slopes agree with t^2
        assert!((h.eval(t0) - t0 * t0).abs() < 1e-14);
        let slope = (h.eval(t0 + step) - h.eval(t0)) / step;
        assert!((slope - 2.0 * t0).abs() < 1e-3);
        // even about 1/2 and periodic
        for t in [0.47, 0.49, 0.4999] {
            assert!((h.eval(t) - h.eval(1.0 - t)).abs() < 1e-14);
            assert!((h.eval(t) - h.eval(t - 1.0)).abs() < 1e-14);
        }
        assert!(h.eval(0.5) > 0.0);
    }

    #[test]
    fn constant_kernel_has_single_coefficient() {
        let c = coefficients_of(|_| 1.0, 2, 16).unwrap();
        for (l, b) in centered_indices(2, 16).zip(&c) {
            let expect = if l[0] == 0 && l[1] == 0 { 1.0 } else { 0.0 };
            assert!((b.re - expect).abs() < 1e-12 && b.im.abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_series_reproduces_kernel_1d() {
        let kernel = KernelSpec::gaussian(1.0).unwrap();
        let coeffs = kernel_fourier_coefficients(&kernel, 1, 64, 1.0 / 16.0, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lim = 0.5 - 1.0 / 16.0;
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let y: f64 = rng.random_range(-lim..lim);
            let approx = evaluate_series(&coeffs, 1, 64, &[y]);
            worst = worst.max((approx - kernel.eval_radial(y)).norm());
        }
        assert!(worst <= 1e-4, "sup error {worst}");
    }

    #[test]
    fn error_does_not_grow_with_bandwidth_2d() {
        let kernel = KernelSpec::gaussian(0.3).unwrap();
        let lim = 0.5 - 1.0 / 16.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let probes: Vec<[f64; 2]> = (0..60)
            .filter_map(|_| {
                let y: [f64; 2] = [rng.random_range(-lim..lim), rng.random_range(-lim..lim)];
                (y[0].hypot(y[1]) <= lim).then_some(y)
            })
            .collect();
        let sup = |big_n: usize| {
            let c = kernel_fourier_coefficients(&kernel, 2, big_n, 1.0 / 16.0, 5).unwrap();
            probes
                .iter()
                .map(|y| {
                    (evaluate_series(&c, 2, big_n, y).re - kernel.eval_pair(y, &[0.0, 0.0])).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e32, e64) = (sup(32), sup(64));
        assert!(e64 <= e32 * (1.0 + 1e-9) + 1e-14, "{e32} -> {e64}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        assert!(kernel_fourier_coefficients(&k, 1, 63, 0.1, 5).is_err());
        assert!(kernel_fourier_coefficients(&k, 1, 64, 0.5, 5).is_err());
        assert!(kernel_fourier_coefficients(&k, 1, 64, 0.0, 5).is_err());
        assert!(kernel_fourier_coefficients(&k, 4, 8, 0.1, 5).is_err());
    }
}
