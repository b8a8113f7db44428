//! Radial kernels `K(y) = k(|y|)` defining feature-based edge weights.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    /// `exp(-|y|^2 / sigma^2)`
    Gaussian,
    /// `exp(-|y| / sigma)`
    LaplacianRbf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    sigma: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kernel scale must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self { family, sigma })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, sigma)
    }

    pub fn laplacian_rbf(sigma: f64) -> Result<Self> {
        Self::new(KernelFamily::LaplacianRbf, sigma)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Same family with the scale multiplied by `factor`; used when features
    /// are rescaled isotropically.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.family, self.sigma * factor)
    }

    /// Kernel value as a function of the squared distance.
    #[inline]
    pub fn eval_sq(&self, r2: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian => (-r2 * (1.0 / (self.sigma * self.sigma))).exp(),
            KernelFamily::LaplacianRbf => (-r2.sqrt() / self.sigma).exp(),
        }
    }

    #[inline]
    pub fn eval_radial(&self, r: f64) -> f64 {
        self.eval_sq(r * r)
    }

    /// Whether the radial profile is smooth at the origin.
    pub fn is_smooth(&self) -> bool {
        matches!(self.family, KernelFamily::Gaussian)
    }

    /// `order`-th derivative of the radial profile `k(r)`.
    pub fn radial_derivative(&self, order: usize, r: f64) -> f64 {
        let s = self.sigma;
        match self.family {
            KernelFamily::LaplacianRbf => (-1.0 / s).powi(order as i32) * (-r / s).exp(),
            KernelFamily::Gaussian => {
                // d^n/dr^n exp(-(r/s)^2) = (-1/s)^n H_n(r/s) exp(-(r/s)^2)
                let x = r / s;
                let (mut h0, mut h1) = (1.0, 2.0 * x);
                let hn = match order {
                    0 => h0,
                    _ => {
                        for k in 1..order {
                            let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
                            h0 = h1;
                            h1 = h2;
                        }
                        h1
                    }
                };
                (-1.0 / s).powi(order as i32) * hn * (-x * x).exp()
            }
        }
    }

    /// `K(0)`; both families are normalized to one at the origin.
    pub fn at_origin(&self) -> f64 {
        1.0
    }

    /// `K(x - y)` for two feature vectors.
    #[inline]
    pub fn eval_pair(&self, x: &[f64], y: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        self.eval_sq(r2)
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(KernelFamily::Gaussian),
            "laplacian-rbf" | "laplacian" => Ok(KernelFamily::LaplacianRbf),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel family '{other}'"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_evaluate_expected_profiles() {
        let g = KernelSpec::gaussian(2.0).unwrap();
        assert!((g.eval_radial(2.0) - (-1.0f64).exp()).abs() < 1e-15);
        let l = KernelSpec::laplacian_rbf(2.0).unwrap();
        assert!((l.eval_radial(2.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.eval_pair(&[1.0, 1.0], &[1.0, 1.0]), 1.0);
    }

    #[test]
    fn radial_derivatives_match_finite_differences() {
        for k in [
            KernelSpec::gaussian(0.7).unwrap(),
            KernelSpec::laplacian_rbf(0.7).unwrap(),
        ] {
            let h = 1e-5;
            for order in 0..4 {
                let r = 0.4;
                let fd = (k.radial_derivative(order, r + h) - k.radial_derivative(order, r - h))
                    / (2.0 * h);
                let exact = k.radial_derivative(order + 1, r);
                assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0), "{order}");
            }
            assert!((k.radial_derivative(0, 0.3) - k.eval_radial(0.3)).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(KernelSpec::gaussian(0.0).is_err());
        assert!(KernelSpec::gaussian(f64::NAN).is_err());
        assert!(KernelSpec::laplacian_rbf(-1.0).is_err());
    }
}
