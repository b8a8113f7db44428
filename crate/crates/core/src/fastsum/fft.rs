//! Unnormalized multi-dimensional FFT over a cube of side `n`, row-major.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct FftNd {
    d: usize,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd")
            .field("d", &self.d)
            .field("n", &self.n)
            .finish()
    }
}

impl FftNd {
    pub fn new(d: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            d,
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `X_k = sum_j x_j e^{-2 pi i j.k / n}`
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(&*self.fwd, data);
    }

    /// `x_j = sum_k X_k e^{+2 pi i j.k / n}` (no `1/n^d` factor)
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(&*self.inv, data);
    }

    fn run(&self, fft: &dyn Fft<f64>, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        let n = self.n;
        // last axis is contiguous
        fft.process(data);
        if self.d == 1 {
            return;
        }
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..self.d - 1 {
            let stride = n.pow((self.d - 1 - axis) as u32);
            let block = stride * n;
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = data[start + i * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (i, v) in line.iter().enumerate() {
                        data[start + i * stride] = *v;
                    }
                }
            }
        }
    }
}
