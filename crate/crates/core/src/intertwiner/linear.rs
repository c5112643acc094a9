//! Sparse exact Gaussian elimination with several right-hand sides.
//!
//! Rows are fed one at a time and kept in echelon form keyed by their
//! leading column; a row that reduces to `0 = b` with `b ≠ 0` is reported.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::algebra::GaussianRational;

/// Right-hand sides are indexed by a key (here: parameter degrees).
pub(crate) type Rhs = BTreeMap<Vec<u32>, GaussianRational>;

#[derive(Clone, Debug, Default)]
pub(crate) struct Row {
    pub cols: BTreeMap<usize, GaussianRational>,
    pub rhs: Rhs,
}

fn axpy<K: Ord + Clone>(target: &mut BTreeMap<K, GaussianRational>, factor: &GaussianRational, source: &BTreeMap<K, GaussianRational>) {
    for (k, v) in source {
        let delta = factor * v;
        let entry = target.entry(k.clone()).or_insert_with(|| GaussianRational::from(0));
        *entry = &*entry + &delta;
        if entry.is_zero() {
            target.remove(k);
        }
    }
}

impl Row {
    fn sub_scaled(&mut self, factor: &GaussianRational, other: &Row) {
        let neg = -factor;
        axpy(&mut self.cols, &neg, &other.cols);
        axpy(&mut self.rhs, &neg, &other.rhs);
    }

    fn scale(&mut self, c: &GaussianRational) {
        for v in self.cols.values_mut().chain(self.rhs.values_mut()) {
            *v = &*v * c;
        }
    }
}

#[derive(Debug)]
pub(crate) struct Echelon {
    ncols: usize,
    pivots: BTreeMap<usize, Row>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Echelon {
            ncols,
            pivots: BTreeMap::new(),
        }
    }

    /// Adds an equation; returns the nonzero remainder of the right-hand
    /// side if the equation contradicts the ones already present.
    pub fn insert(&mut self, mut row: Row) -> Option<Rhs> {
        loop {
            let Some((&c, lead)) = row.cols.first_key_value() else {
                return (!row.rhs.is_empty()).then_some(row.rhs);
            };
            match self.pivots.get(&c) {
                Some(p) => {
                    let lead = lead.clone();
                    row.sub_scaled(&lead, p);
                }
                None => {
                    let inv = lead.inv().expect("nonzero pivot");
                    row.scale(&inv);
                    self.pivots.insert(c, row);
                    return None;
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn nullity(&self) -> usize {
        self.ncols - self.rank()
    }

    /// Back substitution with free columns set to zero.
    pub fn solve(&self) -> BTreeMap<usize, Rhs> {
        let mut values: BTreeMap<usize, Rhs> = BTreeMap::new();
        for (&c, row) in self.pivots.iter().rev() {
            let mut v = row.rhs.clone();
            for (&j, a) in row.cols.range(c + 1..) {
                if let Some(xj) = values.get(&j) {
                    axpy(&mut v, &-a, xj);
                }
            }
            if !v.is_empty() {
                values.insert(c, v);
            }
        }
        values
    }
}
