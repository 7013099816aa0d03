use super::ConstraintSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DykstraOutcome {
    /// Completed sweeps over the constraint set.
    pub iterations: usize,
    /// Euclidean change of the last sweep.
    pub last_change: f64,
    pub converged: bool,
}

/// Dykstra's alternating projection of `values` onto
/// `{v : v[lo] <= v[hi] for every pair}`.
///
/// Each sweep visits the constraints in order. For constraint `i` with
/// correction `p_i` it forms `s = v + p_i`, projects `s` onto the half-space
/// (a violated pair moves both entries to their mean), stores
/// `p_i = s - proj(s)` and continues from the projection. Sweeps stop once the
/// iterate moves less than `tol` in Euclidean norm or after `max_iter` sweeps.
///
/// A pairwise constraint only touches two coordinates, so each correction is
/// stored as the two values it adds at `lo` and `hi`.
pub fn dykstra_project(
    values: &mut [f64],
    constraints: &ConstraintSet,
    max_iter: usize,
    tol: f64,
) -> DykstraOutcome {
    let pairs = constraints.pairs();
    if pairs.is_empty() {
        return DykstraOutcome {
            iterations: 0,
            last_change: 0.0,
            converged: true,
        };
    }
    let mut corrections = vec![(0.0f64, 0.0f64); pairs.len()];
    let mut previous = values.to_vec();
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    while iterations < max_iter.max(1) {
        for (&(lo, hi), p) in pairs.iter().zip(corrections.iter_mut()) {
            let s_lo = values[lo] + p.0;
            let s_hi = values[hi] + p.1;
            let (r_lo, r_hi) = if s_lo > s_hi {
                let mid = 0.5 * (s_lo + s_hi);
                (mid, mid)
            } else {
                (s_lo, s_hi)
            };
            *p = (s_lo - r_lo, s_hi - r_hi);
            values[lo] = r_lo;
            values[hi] = r_hi;
        }
        iterations += 1;
        last_change = values
            .iter()
            .zip(&previous)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if last_change < tol {
            break;
        }
        previous.copy_from_slice(values);
    }
    DykstraOutcome {
        iterations,
        last_change,
        converged: last_change < tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_point_is_unchanged() {
        let mut v = vec![0.0, 1.0];
        dykstra_project(&mut v, &ConstraintSet::chain(2), 10, 1e-12);
        assert_eq!(v, vec![0.0, 1.0]);
    }

    #[test]
    fn single_violation_meets_in_the_middle() {
        let mut v = vec![1.0, 0.0];
        dykstra_project(&mut v, &ConstraintSet::chain(2), 10, 1e-12);
        assert_eq!(v, vec![0.5, 0.5]);
    }

    #[test]
    fn reversed_chain_pools_to_mean() {
        let mut v = vec![2.0, 1.0, 0.0];
        let out = dykstra_project(&mut v, &ConstraintSet::chain(3), 1000, 1e-14);
        assert!(out.converged);
        for x in v {
            assert!((x - 1.0).abs() < 1e-9);
        }
    }
}
