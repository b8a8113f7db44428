//! Nonequispaced FFT on the torus via Kaiser–Bessel gridding.

use num_complex::Complex64;

use super::fft::FftNd;
use super::regularize::centered_indices;
use super::window::KaiserBessel;
use super::PointSet;
use crate::error::{Error, Result};

/// Transform geometry shared by the adjoint, forward and fused fastsum paths.
#[derive(Debug, Clone)]
pub struct NfftGeometry {
    d: usize,
    big_n: usize,
    window: KaiserBessel,
    fft: FftNd,
    /// per-axis deconvolution factors for `l in I_N`, indexed by `l + N/2`
    deconv: Vec<f64>,
}

/// Window footprint of one point: base grid index and weights per axis.
struct Footprint {
    base: [i64; 3],
    weights: [[f64; 2 * MAX_CUTOFF + 1]; 3],
}

pub(crate) const MAX_CUTOFF: usize = 12;

impl NfftGeometry {
    pub fn new(d: usize, big_n: usize, m: usize, rho: f64) -> Result<Self> {
        if !(2..=MAX_CUTOFF).contains(&m) {
            return Err(Error::InvalidArgument(format!(
                "window cutoff must lie in 2..={MAX_CUTOFF}, got {m}"
            )));
        }
        if !(rho >= 2.0) {
            return Err(Error::InvalidArgument(format!(
                "oversampling must be >= 2, got {rho}"
            )));
        }
        // oversampled grid length, kept even
        let n = 2 * ((rho * big_n as f64 / 2.0).ceil() as usize);
        if 2 * m + 1 > n {
            return Err(Error::InvalidArgument(
                "window wider than the oversampled grid".into(),
            ));
        }
        let window = KaiserBessel::new(m, n, n as f64 / big_n as f64);
        let half = (big_n / 2) as i64;
        let deconv = (-half..half).map(|l| window.deconvolution(l)).collect();
        Ok(Self {
            d,
            big_n,
            window,
            fft: FftNd::new(d, n),
            deconv,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn bandwidth(&self) -> usize {
        self.big_n
    }

    pub fn window(&self) -> &KaiserBessel {
        &self.window
    }

    pub fn grid_len(&self) -> usize {
        self.window.grid_len()
    }

    fn grid_total(&self) -> usize {
        self.fft.len()
    }

    fn footprint(&self, x: &[f64]) -> Footprint {
        let n = self.grid_len() as f64;
        let m = self.window.cutoff();
        let mut fp = Footprint {
            base: [0; 3],
            weights: [[0.0; 2 * MAX_CUTOFF + 1]; 3],
        };
        for a in 0..self.d {
            let base = (n * x[a] - m as f64).ceil() as i64;
            fp.base[a] = base;
            for i in 0..=2 * m {
                let l = base + i as i64;
                fp.weights[a][i] = self.window.eval(x[a] - l as f64 / n);
            }
        }
        fp
    }

    /// Calls `f(flat_grid_index, weight)` for every grid point in the footprint.
    fn for_each_in_footprint(&self, fp: &Footprint, mut f: impl FnMut(usize, f64)) {
        let n = self.grid_len() as i64;
        let w = 2 * self.window.cutoff() + 1;
        let wrap = |a: usize, i: usize| (fp.base[a] + i as i64).rem_euclid(n) as usize;
        let nu = n as usize;
        match self.d {
            1 => {
                for i in 0..w {
                    f(wrap(0, i), fp.weights[0][i]);
                }
            }
            2 => {
                for i in 0..w {
                    let row = wrap(0, i) * nu;
                    let wi = fp.weights[0][i];
                    for j in 0..w {
                        f(row + wrap(1, j), wi * fp.weights[1][j]);
                    }
                }
            }
            _ => {
                for i in 0..w {
                    let plane = wrap(0, i) * nu * nu;
                    let wi = fp.weights[0][i];
                    for j in 0..w {
                        let row = plane + wrap(1, j) * nu;
                        let wij = wi * fp.weights[1][j];
                        for k in 0..w {
                            f(row + wrap(2, k), wij * fp.weights[2][k]);
                        }
                    }
                }
            }
        }
    }

    fn check_points(&self, points: &PointSet) -> Result<()> {
        if points.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: points.dim(),
            });
        }
        Ok(())
    }

    /// `g_l = sum_j v_j phi~(x_j - l/n)` on the oversampled grid.
    pub(crate) fn spread(&self, points: &PointSet, v: &[f64]) -> Vec<Complex64> {
        let mut grid = vec![Complex64::new(0.0, 0.0); self.grid_total()];
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            let fp = self.footprint(points.point(j));
            self.for_each_in_footprint(&fp, |idx, w| grid[idx].re += vj * w);
        }
        grid
    }

    pub(crate) fn interpolate(&self, points: &PointSet, grid: &[Complex64]) -> Vec<Complex64> {
        (0..points.len())
            .map(|i| {
                let fp = self.footprint(points.point(i));
                let mut acc = Complex64::new(0.0, 0.0);
                self.for_each_in_footprint(&fp, |idx, w| acc += grid[idx] * w);
                acc
            })
            .collect()
    }

    pub(crate) fn fft(&self) -> &FftNd {
        &self.fft
    }

    /// Pairs each `l in I_N^d` (centered order) with its oversampled-grid slot
    /// and its total deconvolution factor.
    pub(crate) fn passband(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let n = self.grid_len() as i64;
        let half = (self.big_n / 2) as i64;
        centered_indices(self.d, self.big_n).map(move |l| {
            let mut pos = 0usize;
            let mut dec = 1.0;
            for &la in l.iter().take(self.d) {
                pos = pos * n as usize + la.rem_euclid(n) as usize;
                dec *= self.deconv[(la + half) as usize];
            }
            (pos, dec)
        })
    }

    /// `h_l ~ sum_j v_j e^{-2 pi i l.x_j}` for `l in I_N^d`, centered order.
    pub fn adjoint(&self, points: &PointSet, v: &[f64]) -> Result<Vec<Complex64>> {
        self.check_points(points)?;
        crate::error::check_len(points.len(), v.len())?;
        let mut grid = self.spread(points, v);
        self.fft.forward(&mut grid);
        Ok(self.passband().map(|(pos, dec)| grid[pos] / dec).collect())
    }

    /// `f(x_i) ~ sum_l c_l e^{2 pi i l.x_i}` with `c` in centered order.
    pub fn forward(&self, coeffs: &[Complex64], points: &PointSet) -> Result<Vec<Complex64>> {
        self.check_points(points)?;
        crate::error::check_len(self.big_n.pow(self.d as u32), coeffs.len())?;
        let mut grid = vec![Complex64::new(0.0, 0.0); self.grid_total()];
        for ((pos, dec), &c) in self.passband().zip(coeffs) {
            grid[pos] = c / dec;
        }
        self.fft.inverse(&mut grid);
        Ok(self.interpolate(points, &grid))
    }
}
