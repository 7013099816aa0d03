//! Independent reference solutions for the projection tests.

use nalgebra::{DMatrix, DVector};

/// Lawson-Hanson non-negative least squares: `argmin_{x >= 0} |A x - b|`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let tol = 1e-12 * a.amax().max(1.0) * b.amax().max(1.0);
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    for _ in 0..(3 * n + 10) {
        let w = a.transpose() * (b - a * &x);
        let next = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        match next {
            Some(j) if w[j] > tol => passive[j] = true,
            _ => break,
        }
        loop {
            let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = a.select_columns(&cols);
            let zp = sub
                .clone()
                .svd(true, true)
                .solve(b, 1e-13)
                .expect("svd solve");
            let mut z = DVector::zeros(n);
            for (k, &j) in cols.iter().enumerate() {
                z[j] = zp[k];
            }
            if cols.iter().all(|&j| z[j] > tol) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for &j in &cols {
                if z[j] <= tol {
                    alpha = alpha.min(x[j] / (x[j] - z[j]));
                }
            }
            x += (z - &x) * alpha;
            for &j in &cols {
                if x[j] <= tol {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x
}

/// Exact Euclidean projection of `v` onto `{l : l[lo] <= l[hi]}` for every
/// pair, solved through its dual (an NNLS problem in the multipliers).
pub fn qp_project(v: &[f64], pairs: &[(usize, usize)]) -> Vec<f64> {
    let n = v.len();
    // column c of At is the constraint normal e_lo - e_hi
    let mut at = DMatrix::zeros(n, pairs.len());
    for (c, &(lo, hi)) in pairs.iter().enumerate() {
        at[(lo, c)] = 1.0;
        at[(hi, c)] = -1.0;
    }
    let vv = DVector::from_column_slice(v);
    let mu = nnls(&at, &vv);
    (vv - at * mu).iter().copied().collect()
}

/// Pool-adjacent-violators fit of a non-decreasing sequence.
pub fn pav(v: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &x in v {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let (m2, c2) = blocks[blocks.len() - 1];
            let (m1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let last = blocks.last_mut().expect("two blocks");
            *last = ((m1 * c1 as f64 + m2 * c2 as f64) / (c1 + c2) as f64, c1 + c2);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, c)| std::iter::repeat_n(m, c))
        .collect()
}
