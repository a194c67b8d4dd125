//! Exact sparse linear algebra over ℚ.
//!
//! Rows are sparse maps column → rational.  [`Rref`] maintains a reduced row
//! echelon basis incrementally, which answers rank, span membership and null
//! space questions exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Exact rational number.
pub type Q = BigRational;

/// A sparse row: column → nonzero coefficient.
pub type SparseRow = BTreeMap<usize, Q>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Reduced row echelon basis of a growing row space.
#[derive(Clone, Debug, Default)]
pub struct Rref {
    /// pivot column → basis row (normalized so the pivot entry is 1)
    rows: BTreeMap<usize, SparseRow>,
}

impl Rref {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &usize> {
        self.rows.keys()
    }

    /// Reduces `r` against the current basis; returns the remainder.
    pub fn reduce(&self, r: &SparseRow) -> SparseRow {
        let mut r = r.clone();
        for (p, row) in &self.rows {
            if let Some(f) = r.get(p).cloned() {
                axpy(&mut r, &(-f), row);
            }
        }
        r
    }

    /// Whether `r` lies in the span of the inserted rows.
    pub fn contains(&self, r: &SparseRow) -> bool {
        self.reduce(r).is_empty()
    }

    /// Inserts a row; returns true if the rank grew.
    pub fn insert(&mut self, r: &SparseRow) -> bool {
        let mut r = self.reduce(r);
        let Some((&p, f)) = r.iter().next() else { return false };
        let inv = f.recip();
        for v in r.values_mut() {
            *v *= &inv;
        }
        for row in self.rows.values_mut() {
            if let Some(g) = row.get(&p).cloned() {
                axpy(row, &(-g), &r);
            }
        }
        self.rows.insert(p, std::mem::take(&mut r));
        true
    }

    /// Basis of the functionals on `n` columns vanishing on the row space:
    /// one vector per free column.
    pub fn annihilator(&self, n: usize) -> Vec<Vec<Q>> {
        let free: Vec<usize> = (0..n).filter(|c| !self.rows.contains_key(c)).collect();
        free.iter()
            .map(|&f| {
                let mut w = vec![Q::zero(); n];
                w[f] = Q::one();
                for (p, row) in &self.rows {
                    if let Some(x) = row.get(&f) {
                        w[*p] = -x.clone();
                    }
                }
                w
            })
            .collect()
    }
}

/// r += f·s, dropping zeros.
pub fn axpy(r: &mut SparseRow, f: &Q, s: &SparseRow) {
    for (c, v) in s {
        let e = r.entry(*c).or_insert_with(Q::zero);
        *e += f * v;
        if e.is_zero() {
            r.remove(c);
        }
    }
}

/// Dot product of a sparse row with a dense vector.
pub fn dot(r: &SparseRow, w: &[Q]) -> Q {
    r.iter().map(|(c, v)| v * &w[*c]).fold(Q::zero(), |a, b| a + b)
}

/// Rank of a dense integer matrix by fraction-free (Bareiss) elimination;
/// an independent route used to cross-check [`Rref`].
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, piv);
        for r in rank + 1..rows {
            for j in c + 1..cols {
                let v = (&m[rank][c] * &m[r][j] - &m[r][c] * &m[rank][j]) / &prev;
                m[r][j] = v;
            }
            m[r][c] = BigInt::zero();
        }
        prev = m[rank][c].abs();
        if prev.is_zero() {
            prev = BigInt::one();
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[(usize, i64)]) -> SparseRow {
        v.iter().map(|(c, x)| (*c, q(*x))).collect()
    }

    #[test]
    fn rank_and_annihilator() {
        let mut r = Rref::new();
        assert!(r.insert(&row(&[(0, 1), (1, -1)])));
        assert!(r.insert(&row(&[(1, 1), (2, 1)])));
        assert!(!r.insert(&row(&[(0, 1), (2, 1)])));
        assert_eq!(r.rank(), 2);
        let ann = r.annihilator(3);
        assert_eq!(ann.len(), 1);
        assert!(dot(&row(&[(0, 1), (1, -1)]), &ann[0]).is_zero());
        assert!(dot(&row(&[(1, 1), (2, 1)]), &ann[0]).is_zero());
    }

    #[test]
    fn bareiss_agrees() {
        let m = vec![
            vec![BigInt::from(2), BigInt::from(4), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(2), BigInt::from(3)],
            vec![BigInt::from(3), BigInt::from(6), BigInt::from(4)],
        ];
        assert_eq!(bareiss_rank(m), 2);
    }
}
