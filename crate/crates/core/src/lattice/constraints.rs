use super::{LatticeParams, Monotonicity};

/// Pairwise constraints `values[lo] - values[hi] <= 0`, one per row of the
/// sparse constraint matrix. Pairs are kept in ascending `(lo, hi)` order,
/// which is also the order Dykstra's algorithm visits them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSet {
    pairs: Vec<(usize, usize)>,
}

impl ConstraintSet {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        ConstraintSet { pairs }
    }

    /// `v[0] <= v[1] <= ... <= v[n-1]`.
    pub fn chain(n: usize) -> Self {
        ConstraintSet::new((1..n).map(|i| (i - 1, i)).collect())
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Largest `values[lo] - values[hi]`, or 0 when every constraint holds.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        self.pairs
            .iter()
            .map(|&(lo, hi)| values[lo] - values[hi])
            .fold(0.0, f64::max)
    }
}

/// Monotonicity constraints of a lattice: along an increasing dimension `j`,
/// `λ(a, b) <= λ(a+1, b)` for every `a <= M_j - 2` and every `b`; decreasing
/// dimensions reverse each pair.
pub fn build_constraints(params: &LatticeParams) -> ConstraintSet {
    let sizes = params.sizes();
    let total: usize = sizes.iter().product();
    let mut pairs = Vec::new();
    for (dim, dir) in params.monotonicity().iter().enumerate() {
        if !dir.is_constrained() {
            continue;
        }
        for idx in 0..total {
            let coords = params.coords(idx);
            if coords[dim] + 1 >= sizes[dim] {
                continue;
            }
            let mut next = coords.clone();
            next[dim] += 1;
            let up = params.index(&next);
            pairs.push(match dir {
                Monotonicity::Increasing => (idx, up),
                _ => (up, idx),
            });
        }
    }
    ConstraintSet::new(pairs)
}
