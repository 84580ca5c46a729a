//! Small dense square matrices over machine integers.
//!
//! Arithmetic is overflow-checked; an overflow panics instead of wrapping.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn scalar(n: usize, value: i64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = value;
        }
        m
    }

    /// Builds a matrix from row vectors. Returns `None` unless the rows form a square.
    pub fn from_rows(rows: &[Vec<i64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(IntMatrix {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub(crate) fn from_flat(n: usize, data: Vec<i64>) -> Self {
        assert_eq!(data.len(), n * n, "flat data does not match dimension");
        IntMatrix { n, data }
    }

    /// Permutation matrix `P` with `P[i][perm[i]] = 1`, so `(P A Pᵀ)[i][j] = A[perm[i]][perm[j]]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = Self::zeros(n);
        for (i, &p) in perm.iter().enumerate() {
            m.data[i * n + p] = 1;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_flat(&self) -> &[i64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (i + 1..n).all(|j| self.data[i * n + j] == self.data[j * n + i]))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&x| x >= 0)
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix product");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.data[k * n + j];
                    if b == 0 {
                        continue;
                    }
                    let prod = a.checked_mul(b).expect("matrix entry overflow");
                    let cell = &mut out.data[i * n + j];
                    *cell = cell.checked_add(prod).expect("matrix entry overflow");
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix sum");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.checked_add(*b).expect("matrix entry overflow"))
            .collect();
        IntMatrix { n: self.n, data }
    }

    pub fn scale(&self, k: i64) -> IntMatrix {
        let data = self
            .data
            .iter()
            .map(|a| a.checked_mul(k).expect("matrix entry overflow"))
            .collect();
        IntMatrix { n: self.n, data }
    }

    /// `self += k * rhs`
    pub fn add_scaled(&mut self, k: i64, rhs: &IntMatrix) {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix sum");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            let prod = b.checked_mul(k).expect("matrix entry overflow");
            *a = a.checked_add(prod).expect("matrix entry overflow");
        }
    }

    /// `P A Pᵀ` for the permutation matrix of `perm`; entry `(i, j)` is `A[perm[i]][perm[j]]`.
    pub fn conjugate(&self, perm: &[usize]) -> IntMatrix {
        let n = self.n;
        assert_eq!(perm.len(), n);
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[i * n + j] = self.data[perm[i] * n + perm[j]];
            }
        }
        out
    }

    /// Principal submatrix on the given (ordered) index set.
    pub fn submatrix(&self, idx: &[usize]) -> IntMatrix {
        let m = idx.len();
        let mut out = Self::zeros(m);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.data[a * m + b] = self.get(i, j);
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// True for a 0/1 matrix with exactly one 1 per row and column.
    pub fn is_permutation(&self) -> bool {
        let n = self.n;
        let ok_vals = self.data.iter().all(|&x| x == 0 || x == 1);
        ok_vals
            && (0..n).all(|i| (0..n).map(|j| self.get(i, j)).sum::<i64>() == 1)
            && (0..n).all(|j| (0..n).map(|i| self.get(i, j)).sum::<i64>() == 1)
    }

    /// For a permutation matrix, `sigma[i]` is the column of the 1 in row `i`.
    pub fn as_permutation(&self) -> Option<Vec<usize>> {
        if !self.is_permutation() {
            return None;
        }
        Some(
            (0..self.n)
                .map(|i| (0..self.n).find(|&j| self.get(i, j) == 1).unwrap())
                .collect(),
        )
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(d)?;
        IntMatrix::from_rows(&rows).ok_or_else(|| serde::de::Error::custom("matrix is not square"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_matches_explicit_product() {
        let a = IntMatrix::from_rows(&[vec![1, 2, 0], vec![0, 1, 3], vec![4, 0, 1]]).unwrap();
        let perm = [2, 0, 1];
        let p = IntMatrix::permutation(&perm);
        assert_eq!(a.conjugate(&perm), p.mul(&a).mul(&p.transpose()));
    }

    #[test]
    #[should_panic(expected = "overflow")]
    fn overflow_panics() {
        let a = IntMatrix::scalar(1, i64::MAX);
        let _ = a.add(&a);
    }

    #[test]
    fn permutation_round_trip() {
        let p = IntMatrix::permutation(&[1, 0, 2]);
        assert!(p.is_permutation());
        assert_eq!(p.as_permutation().unwrap(), vec![1, 0, 2]);
        assert!(!IntMatrix::scalar(2, 2).is_permutation());
    }
}
