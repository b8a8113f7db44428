//! Euclidean projection onto the Gibbs simplex by sorting and thresholding.

use crate::error::{Error, Result};

/// Closest point of `{x : x >= 0, sum x = 1}` to `row`.
pub fn simplex_project(row: &[f64]) -> Result<Vec<f64>> {
    let mut out = row.to_vec();
    simplex_project_in_place(&mut out)?;
    Ok(out)
}

pub fn simplex_project_in_place(row: &mut [f64]) -> Result<()> {
    if row.is_empty() {
        return Err(Error::InvalidArgument("cannot project an empty row".into()));
    }
    if row.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("simplex projection input".into()));
    }
    let mut sorted = row.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    for x in row.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
    // absorb rounding in the sum into the largest entry
    let sum: f64 = row.iter().sum();
    let imax = row
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    row[imax] += 1.0 - sum;
    Ok(())
}
