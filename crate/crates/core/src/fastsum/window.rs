//! Kaiser–Bessel window used for gridding and interpolation.

use std::f64::consts::PI;

/// Window with support `|x| <= m / n` on a grid of `n` points per unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaiserBessel {
    m: usize,
    n: usize,
    b: f64,
}

impl KaiserBessel {
    /// `n` is the oversampled grid length, `rho` the oversampling factor.
    pub fn new(m: usize, n: usize, rho: f64) -> Self {
        Self {
            m,
            n,
            b: PI * (2.0 - 1.0 / rho),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.m
    }

    pub fn grid_len(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> f64 {
        self.b
    }

    /// Window value at `x` (unit-length coordinates, not periodized).
    pub fn eval(&self, x: f64) -> f64 {
        let m = self.m as f64;
        let arg = m * m - (self.n as f64 * x).powi(2);
        if arg < 0.0 {
            return 0.0;
        }
        let s = arg.sqrt();
        if s < 1e-8 {
            // sinh(b s) / s -> b
            return self.b / PI;
        }
        (self.b * s).sinh() / (s * PI)
    }

    /// `n` times the continuous Fourier transform at integer frequency `k`,
    /// i.e. the deconvolution factor applied per dimension.
    pub fn deconvolution(&self, k: i64) -> f64 {
        let w = 2.0 * PI * k as f64 / self.n as f64;
        let arg = self.b * self.b - w * w;
        debug_assert!(arg >= 0.0, "frequency outside the passband");
        bessel_i0(self.m as f64 * arg.max(0.0).sqrt())
    }
}

/// Modified Bessel function of the first kind, order zero, by its power series.
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    sum
}
