//! Gradient of the multi-well potential `sum_i prod_l (1/4)|u_i - e_l|_1^2`.

use nalgebra::DMatrix;

/// Row `i`, column `j`:
/// `sum_q (1/2)(1 - 2 delta_jq) |u_i - e_q|_1 prod_{p != q} (1/4)|u_i - e_p|_1^2`.
pub fn nonlinearity(u: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = u.shape();
    let mut out = DMatrix::zeros(n, m);
    let mut a = vec![0.0; m];
    let mut others = vec![0.0; m];
    let mut row = vec![0.0; m];
    for i in 0..n {
        for (j, r) in row.iter_mut().enumerate() {
            *r = u[(i, j)];
        }
        nonlinearity_row(&row, &mut a, &mut others);
        let half_sum: f64 = 0.5 * a.iter().zip(&others).map(|(x, y)| x * y).sum::<f64>();
        for j in 0..m {
            out[(i, j)] = half_sum - a[j] * others[j];
        }
    }
    out
}

/// `a[q] = |u - e_q|_1` and `others[q] = prod_{p != q} a[p]^2 / 4`, the latter
/// through prefix and suffix products so zero distances need no division.
fn nonlinearity_row(u: &[f64], a: &mut [f64], others: &mut [f64]) {
    let m = u.len();
    let l1: f64 = u.iter().map(|x| x.abs()).sum();
    for q in 0..m {
        a[q] = l1 - u[q].abs() + (u[q] - 1.0).abs();
    }
    let mut prefix = 1.0;
    for q in 0..m {
        others[q] = prefix;
        prefix *= 0.25 * a[q] * a[q];
    }
    let mut suffix = 1.0;
    for q in (0..m).rev() {
        others[q] *= suffix;
        suffix *= 0.25 * a[q] * a[q];
    }
}

/// `prod_l (1/4)|u - e_l|_1^2` for one row.
pub fn well_product(u: &[f64]) -> f64 {
    let l1: f64 = u.iter().map(|x| x.abs()).sum();
    u.iter()
        .map(|&x| {
            let a = l1 - x.abs() + (x - 1.0).abs();
            0.25 * a * a
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Term-by-term evaluation of the defining double sum.
    fn literal(u: &[f64]) -> Vec<f64> {
        let m = u.len();
        let dist = |q: usize| -> f64 {
            (0..m)
                .map(|p| (u[p] - if p == q { 1.0 } else { 0.0 }).abs())
                .sum()
        };
        (0..m)
            .map(|j| {
                (0..m)
                    .map(|q| {
                        let sign = if j == q { -1.0 } else { 1.0 };
                        let prod: f64 = (0..m)
                            .filter(|&p| p != q)
                            .map(|p| 0.25 * dist(p).powi(2))
                            .product();
                        0.5 * sign * dist(q) * prod
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn hand_values() {
        let t = nonlinearity(&DMatrix::from_row_slice(2, 2, &[0.75, 0.25, 0.5, 0.5]));
        assert!((t[(0, 0)] + 0.09375).abs() < 1e-15 && (t[(0, 1)] - 0.09375).abs() < 1e-15);
        assert!(t[(1, 0)].abs() < 1e-15 && t[(1, 1)].abs() < 1e-15);
    }

    #[test]
    fn corners_give_zero_rows() {
        let u = DMatrix::from_row_slice(3, 3, &[1., 0., 0., 0., 1., 0., 0., 0., 1.]);
        assert!(nonlinearity(&u).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn matches_literal_formula() {
        let rows = [
            vec![0.2, 0.3, 0.5],
            vec![0.1, 0.0, 0.7, 0.2],
            vec![1.2, -0.1, -0.1],
            vec![0.6, 0.4],
        ];
        for r in rows {
            let t = nonlinearity(&DMatrix::from_row_slice(1, r.len(), &r));
            for (j, e) in literal(&r).iter().enumerate() {
                assert!((t[(0, j)] - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn is_gradient_of_well_product() {
        let u = [0.2, 0.5, 0.3];
        let t = nonlinearity(&DMatrix::from_row_slice(1, 3, &u));
        let h = 1e-6;
        for j in 0..3 {
            let mut up = u;
            up[j] += h;
            let mut dn = u;
            dn[j] -= h;
            let fd = (well_product(&up) - well_product(&dn)) / (2.0 * h);
            assert!((fd - t[(0, j)]).abs() < 1e-8, "{j}: {fd} vs {}", t[(0, j)]);
        }
    }
}
