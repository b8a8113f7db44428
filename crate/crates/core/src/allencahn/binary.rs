//! Two-class scheme on a single score vector with values near `-1` and `1`.

use nalgebra::DVector;

use crate::error::{check_len, Error, Result};
use crate::powermean::SpectralBasis;

use super::AllenCahnParams;

#[derive(Debug, Clone)]
pub struct BinaryResult {
    pub u: Vec<f64>,
    /// `+1` or `-1` per node; zero scores count as `+1`
    pub classes: Vec<i8>,
    pub iterations: usize,
    pub converged: bool,
}

/// Convexity-splitting iteration on the coefficients `v` of `u = Phi_k v`:
///
/// `v_r <- [(1 + c dt + dt/eps) v_r - (dt/eps) b_r - dt d_r] / (1 + eps lambda_r dt + c dt)`
///
/// with `b = Phi_k^T (Phi_k v)^3` and `d = Phi_k^T omega (Phi_k v - f)`. The
/// fidelity weight is `omega_0` wherever `f != 0`; the start is `u^0 = f`.
pub fn binary_allen_cahn_solve(
    basis: &SpectralBasis,
    f: &[f64],
    params: &AllenCahnParams,
) -> Result<BinaryResult> {
    params.validate()?;
    let n = basis.n();
    check_len(n, f.len())?;
    if let Some(i) = f.iter().position(|&x| x != 0.0 && x != 1.0 && x != -1.0) {
        return Err(Error::InvalidArgument(format!(
            "label vector entry {i} is not -1, 0 or 1"
        )));
    }
    let phi = &basis.vectors;
    let AllenCahnParams { epsilon, c, dt, .. } = *params;
    let fv = DVector::from_column_slice(f);
    let omega = fv.map(|x| if x != 0.0 { params.omega0 } else { 0.0 });
    let denom = basis.values.map(|l| 1.0 + epsilon * l * dt + c * dt);
    let mut v = phi.transpose() * &fv;
    let mut u = phi * &v;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        let b = phi.transpose() * u.map(|x| x * x * x);
        let d = phi.transpose() * (&u - &fv).component_mul(&omega);
        let next = (&v * (1.0 + c * dt + dt / epsilon) - b * (dt / epsilon) - d * dt)
            .component_div(&denom);
        let next_u = phi * &next;
        iterations += 1;
        if next_u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Diverged(iterations));
        }
        let diff = (&next_u - &u).norm_squared();
        let size = next_u.norm_squared();
        let change = if size > 0.0 { diff / size } else { 0.0 };
        v = next;
        u = next_u;
        if change <= params.tol {
            converged = true;
            break;
        }
    }
    let classes = u.iter().map(|&x| if x >= 0.0 { 1 } else { -1 }).collect();
    Ok(BinaryResult {
        u: u.iter().copied().collect(),
        classes,
        iterations,
        converged,
    })
}
