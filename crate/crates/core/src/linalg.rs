//! Dense and banded complex linear algebra on top of `faer`.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = Mat<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn zeros(n: usize, m: usize) -> CMat {
    Mat::zeros(n, m)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn scale(a: &CMat, s: C64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

/// `a + s * b`.
pub fn axpy(a: &CMat, s: C64, b: &CMat) -> CMat {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + s * b[(i, j)])
}

pub fn add_in_place(a: &mut CMat, s: C64, b: &CMat) {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            a[(i, j)] += s * b[(i, j)];
        }
    }
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    a * b
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn transpose(a: &CMat) -> CMat {
    a.transpose().to_owned()
}

pub fn conj(a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].conj())
}

pub fn trace(a: &CMat) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// `Tr(a^dagger b)`, the Hilbert-Schmidt inner product.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut s = ZERO;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].conj() * b[(i, j)];
        }
    }
    s
}

pub fn frobenius(a: &CMat) -> f64 {
    a.norm_l2()
}

pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn norm_one(a: &CMat) -> f64 {
    (0..a.ncols()).map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Column-stacking vectorisation: entry `(i, j)` lands at `j * nrows + i`.
pub fn vec(a: &CMat) -> Vec<C64> {
    let mut v = Vec::with_capacity(a.nrows() * a.ncols());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            v.push(a[(i, j)]);
        }
    }
    v
}

pub fn unvec(v: &[C64], n: usize) -> CMat {
    assert_eq!(v.len(), n * n);
    Mat::from_fn(n, n, |i, j| v[j * n + i])
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn solve_dense(a: &CMat, b: &CMat) -> CMat {
    a.partial_piv_lu().solve(b)
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    a.eigenvalues().map_err(|e| Error::Numerical(format!("eigenvalue decomposition failed: {e:?}")))
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    let h = Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    h.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Numerical(format!("hermitian eigensolver failed: {e:?}")))
}

/// Trace distance `||a - b||_1 / 2` between two density operators.
pub fn trace_distance(a: &CMat, b: &CMat) -> Result<f64> {
    let d = axpy(a, -ONE, b);
    Ok(0.5 * hermitian_eigenvalues(&d)?.iter().map(|x| x.abs()).sum::<f64>())
}

/// Trace norm (sum of singular values) of a general matrix.
pub fn trace_norm(a: &CMat) -> Result<f64> {
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    a.singular_values().map(|s| s.iter().sum()).map_err(|e| Error::Numerical(format!("singular value decomposition failed: {e:?}")))
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by degree-13 Padé approximation with scaling and squaring.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    if n == 0 {
        return zeros(0, 0);
    }
    let norm = norm_one(a);
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = scale(a, C64::from(0.5f64.powi(s)));
    let b = |k: usize| C64::from(PADE13[k]);
    let id = identity(n);
    let a2 = matmul(&a, &a);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a4, &a2);

    let mut inner = scale(&a6, b(13));
    add_in_place(&mut inner, b(11), &a4);
    add_in_place(&mut inner, b(9), &a2);
    let mut u = matmul(&a6, &inner);
    add_in_place(&mut u, b(7), &a6);
    add_in_place(&mut u, b(5), &a4);
    add_in_place(&mut u, b(3), &a2);
    add_in_place(&mut u, b(1), &id);
    let u = matmul(&a, &u);

    let mut inner = scale(&a6, b(12));
    add_in_place(&mut inner, b(10), &a4);
    add_in_place(&mut inner, b(8), &a2);
    let mut v = matmul(&a6, &inner);
    add_in_place(&mut v, b(6), &a6);
    add_in_place(&mut v, b(4), &a4);
    add_in_place(&mut v, b(2), &a2);
    add_in_place(&mut v, b(0), &id);

    let mut r = solve_dense(&axpy(&v, -ONE, &u), &axpy(&v, ONE, &u));
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    r
}

/// Compressed sparse row matrix, used for superoperators.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl Csr {
    /// Builds from triplets. Duplicates are summed in input order, so two
    /// triplet lists that agree on a prefix produce bitwise identical sums.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Vec<(usize, usize, C64)>) -> Self {
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<C64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Csr { nrows, ncols, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        Csr::from_triplets(n, n, (0..n).map(|i| (i, i, ONE)).collect())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            t.extend(self.row(r).map(|(c, v)| (r, c, v)));
        }
        t
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        match self.indices[a..b].binary_search(&c) {
            Ok(k) => self.values[a + k],
            Err(_) => ZERO,
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn from_dense(m: &CMat) -> Self {
        let mut t = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != ZERO {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Csr::from_triplets(m.nrows(), m.ncols(), t)
    }

    pub fn adjoint(&self) -> Self {
        let t = self.triplets().into_iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Csr::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s * other`.
    pub fn add(&self, s: C64, other: &Csr) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = self.triplets();
        t.extend(other.triplets().into_iter().map(|(r, c, v)| (r, c, s * v)));
        Csr::from_triplets(self.nrows, self.ncols, t)
    }

    /// Principal submatrix on the given index set, as a dense matrix.
    pub fn principal_dense(&self, idx: &[usize]) -> CMat {
        let mut pos = vec![usize::MAX; self.ncols];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = zeros(idx.len(), idx.len());
        for (k, &r) in idx.iter().enumerate() {
            for (c, v) in self.row(r) {
                if pos[c] != usize::MAX {
                    m[(k, pos[c])] = v;
                }
            }
        }
        m
    }

    /// Principal submatrix on the given index set, kept sparse.
    pub fn principal(&self, idx: &[usize]) -> Csr {
        let mut pos = vec![usize::MAX; self.ncols];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut t = Vec::new();
        for (k, &r) in idx.iter().enumerate() {
            for (c, v) in self.row(r) {
                if pos[c] != usize::MAX {
                    t.push((k, pos[c], v));
                }
            }
        }
        Csr::from_triplets(idx.len(), idx.len(), t)
    }

    /// Largest `|r - c|` over stored nonzeros, split into (below, above) the diagonal.
    pub fn bandwidth(&self) -> (usize, usize) {
        let (mut lo, mut hi) = (0, 0);
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                if v == ZERO {
                    continue;
                }
                if r > c {
                    lo = lo.max(r - c);
                } else {
                    hi = hi.max(c - r);
                }
            }
        }
        (lo, hi)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// LU factorisation with partial pivoting of a banded matrix.
///
/// Row interchanges grow the upper bandwidth to `ku + kl`; storage is
/// row-wise with that extended width.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    ab: Vec<C64>,
    piv: Vec<usize>,
    min_pivot: f64,
}

impl BandedLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    pub fn factor(a: &Csr) -> Result<Self> {
        let (kl, ku) = a.bandwidth();
        Self::factor_with_bands(a, kl, ku)
    }

    pub fn factor_with_bands(a: &Csr, kl: usize, ku: usize) -> Result<Self> {
        let n = a.nrows;
        assert_eq!(n, a.ncols);
        let width = 2 * kl + ku + 1;
        let mut lu = BandedLu { n, kl, ku, width, ab: vec![ZERO; n * width], piv: vec![0; n], min_pivot: f64::INFINITY };
        for r in 0..n {
            for (c, v) in a.row(r) {
                if r > c + kl || c > r + ku {
                    if v != ZERO {
                        return Err(Error::Numerical(format!("entry ({r},{c}) outside declared band")));
                    }
                    continue;
                }
                let k = lu.at(r, c);
                lu.ab[k] = v;
            }
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.ab[lu.at(k, k)].norm();
            for i in k + 1..=last_row {
                let v = lu.ab[lu.at(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            lu.piv[k] = p;
            lu.min_pivot = lu.min_pivot.min(best / scale);
            if best == 0.0 {
                return Err(Error::Numerical(format!("banded LU: exactly singular at column {k}")));
            }
            if p != k {
                for j in k..=last_col {
                    let (x, y) = (lu.at(k, j), lu.at(p, j));
                    lu.ab.swap(x, y);
                }
            }
            let pivot = lu.ab[lu.at(k, k)];
            for i in k + 1..=last_row {
                let ik = lu.at(i, k);
                let m = lu.ab[ik] / pivot;
                lu.ab[ik] = m;
                if m == ZERO {
                    continue;
                }
                for j in k + 1..=last_col {
                    let (ij, kj) = (lu.at(i, j), lu.at(k, j));
                    let u = lu.ab[kj];
                    lu.ab[ij] -= m * u;
                }
            }
        }
        Ok(lu)
    }

    /// Smallest pivot magnitude relative to the largest input entry.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn solve(&self, b: &mut [C64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            if bk == ZERO {
                continue;
            }
            for i in k + 1..=(k + self.kl).min(n - 1) {
                b[i] -= self.ab[self.at(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + self.ku + self.kl).min(n - 1) {
                s -= self.ab[self.at(k, j)] * b[j];
            }
            b[k] = s / self.ab[self.at(k, k)];
        }
    }

    /// Solves `A^dagger x = b` in place using the factorisation of `A`.
    pub fn solve_adjoint(&self, b: &mut [C64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let w = self.ku + self.kl;
        for k in 0..n {
            let mut s = b[k];
            for j in k.saturating_sub(w)..k {
                s -= self.ab[self.at(j, k)].conj() * b[j];
            }
            b[k] = s / self.ab[self.at(k, k)].conj();
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                s -= self.ab[self.at(i, k)].conj() * b[i];
            }
            b[k] = s;
            b.swap(k, self.piv[k]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pseudo_random(n: usize, m: usize, seed: u64) -> CMat {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut out = zeros(n, m);
        for j in 0..m {
            for i in 0..n {
                out[(i, j)] = c(next(), next());
            }
        }
        out
    }

    #[test]
    fn expm_of_diagonal() {
        let mut a = zeros(3, 3);
        a[(0, 0)] = c(1.0, 0.5);
        a[(1, 1)] = c(-2.0, 0.0);
        a[(2, 2)] = c(0.0, 30.0);
        let e = expm(&a);
        for k in 0..3 {
            assert!((e[(k, k)] - a[(k, k)].exp()).norm() < 1e-13 * a[(k, k)].exp().norm().max(1.0));
        }
        assert_eq!(e[(0, 1)], ZERO);
    }

    #[test]
    fn expm_of_nilpotent_is_finite_series() {
        let mut a = zeros(3, 3);
        a[(0, 1)] = c(2.0, 0.0);
        a[(1, 2)] = c(3.0, 0.0);
        let e = expm(&a);
        // I + A + A^2/2
        assert!((e[(0, 2)] - c(3.0, 0.0)).norm() < 1e-13);
        assert!((e[(0, 1)] - c(2.0, 0.0)).norm() < 1e-13);
        assert!((e[(1, 1)] - ONE).norm() < 1e-13);
    }

    #[test]
    fn expm_rotation() {
        // exp(theta [[0,-1],[1,0]]) is a rotation.
        let theta = 7.3;
        let mut a = zeros(2, 2);
        a[(0, 1)] = c(-theta, 0.0);
        a[(1, 0)] = c(theta, 0.0);
        let e = expm(&a);
        assert!((e[(0, 0)] - c(theta.cos(), 0.0)).norm() < 1e-12);
        assert!((e[(1, 0)] - c(theta.sin(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn expm_group_property() {
        let a = pseudo_random(6, 6, 3);
        let e1 = expm(&scale(&a, c(3.0, 0.0)));
        let e2 = expm(&a);
        let e3 = matmul(&matmul(&e2, &e2), &e2);
        assert!(max_abs(&axpy(&e1, -ONE, &e3)) < 1e-11 * max_abs(&e1));
    }

    #[test]
    fn kron_matches_vec_identity() {
        let a = pseudo_random(3, 3, 1);
        let b = pseudo_random(3, 3, 2);
        let x = pseudo_random(3, 3, 4);
        let lhs = vec(&matmul(&matmul(&a, &x), &b));
        let rhs = kron(&transpose(&b), &a);
        let v = vec(&x);
        let prod: Vec<C64> = (0..9).map(|i| (0..9).map(|j| rhs[(i, j)] * v[j]).sum()).collect();
        for (p, q) in lhs.iter().zip(prod.iter()) {
            assert!((p - q).norm() < 1e-14);
        }
    }

    fn banded(n: usize, kl: usize, ku: usize, seed: u64) -> Csr {
        let d = pseudo_random(n, n, seed);
        let mut t = Vec::new();
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                t.push((i, j, d[(i, j)]));
            }
        }
        Csr::from_triplets(n, n, t)
    }

    #[test]
    fn banded_lu_matches_dense_solve() {
        for (n, kl, ku, seed) in [(1, 0, 0, 1), (7, 2, 1, 2), (40, 5, 5, 3), (33, 0, 4, 4), (25, 6, 0, 5)] {
            let a = banded(n, kl, ku, seed);
            let lu = BandedLu::factor(&a).unwrap();
            let b: Vec<C64> = (0..n).map(|i| c(i as f64 + 1.0, -(i as f64) * 0.5)).collect();
            let mut x = b.clone();
            lu.solve(&mut x);
            // random triangular factors are badly conditioned, so check the
            // backward error rather than the raw residual
            let r = a.matvec(&x);
            let scale = a.max_abs() * x.iter().map(|v| v.norm()).fold(0.0, f64::max) * n as f64;
            let err: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max) / scale;
            assert!(err < 1e-14, "n={n} err={err}");

            let mut y = b.clone();
            lu.solve_adjoint(&mut y);
            let r = a.adjoint().matvec(&y);
            let scale = a.max_abs() * y.iter().map(|v| v.norm()).fold(0.0, f64::max) * n as f64;
            let err: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max) / scale;
            assert!(err < 1e-14, "adjoint n={n} err={err}");
        }
    }

    #[test]
    fn banded_lu_needs_pivoting() {
        // Zero leading diagonal entry forces a row swap.
        let t = vec![(0, 1, ONE), (1, 0, ONE), (1, 1, c(2.0, 0.0)), (1, 2, ONE), (2, 1, ONE), (2, 2, c(3.0, 0.0))];
        let a = Csr::from_triplets(3, 3, t);
        let lu = BandedLu::factor(&a).unwrap();
        let mut x = vec![ONE, ONE, ONE];
        lu.solve(&mut x);
        let r = a.matvec(&x);
        for v in r {
            assert!((v - ONE).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_banded_is_an_error() {
        let a = Csr::from_triplets(2, 2, vec![(0, 0, ONE), (1, 0, ONE)]);
        assert!(BandedLu::factor(&a).is_err());
    }

    #[test]
    fn csr_duplicates_sum_in_order() {
        let a = Csr::from_triplets(2, 2, vec![(0, 0, c(1.0, 0.0)), (1, 1, ONE), (0, 0, c(2.0, 0.0))]);
        assert_eq!(a.get(0, 0), c(3.0, 0.0));
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.bandwidth(), (0, 0));
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states() {
        let mut a = zeros(2, 2);
        let mut b = zeros(2, 2);
        a[(0, 0)] = ONE;
        b[(1, 1)] = ONE;
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
        assert!(trace_distance(&a, &a).unwrap() < 1e-15);
    }
}
