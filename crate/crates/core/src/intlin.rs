//! Exact integer linear algebra: Hermite and Smith normal forms, lattice
//! membership, and coset canonicalization.
//!
//! Everything here is over Z with arbitrary precision. Matrices are small
//! (vertex ranks in practice are below ten), so the implementations favor
//! clarity over asymptotics.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub fn vec_i64(xs: &[i64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn vadd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vsub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vneg(a: &[BigInt]) -> Vec<BigInt> {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero_vec(a: &[BigInt]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// Dense integer matrix, row major.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Mat{}x{}[", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.at(r, c))?;
            }
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Mat {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Mat { rows, cols, data }
    }

    pub fn zero(rows: usize, cols: usize) -> Mat {
        Mat::new(rows, cols, vec![BigInt::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<BigInt>]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().cloned());
        }
        Mat::new(r, c, data)
    }

    pub fn from_i64(rows: &[&[i64]]) -> Mat {
        let converted: Vec<Vec<BigInt>> = rows.iter().map(|r| vec_i64(r)).collect();
        Mat::from_rows(&converted)
    }

    pub fn at(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut BigInt {
        &mut self.data[r * self.cols + c]
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * &x[j]).sum())
            .collect()
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Mat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BigInt::zero();
                for k in 0..self.cols {
                    acc += self.at(i, k) * other.at(k, j);
                }
                *out.at_mut(i, j) = acc;
            }
        }
        out
    }

    /// Fraction-free Gaussian elimination (Bareiss). Exact over Z.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m.at(k, k).is_zero() {
                let swap = (k + 1..n).find(|&i| !m.at(i, k).is_zero());
                match swap {
                    Some(i) => {
                        m.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j);
                    *m.at_mut(i, j) = num / &prev;
                }
                *m.at_mut(i, k) = BigInt::zero();
            }
            prev = m.at(k, k).clone();
        }
        sign * m.at(n - 1, n - 1).clone()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            let ja = a * self.cols + j;
            let jb = b * self.cols + j;
            self.data.swap(ja, jb);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            let ia = i * self.cols + a;
            let ib = i * self.cols + b;
            self.data.swap(ia, ib);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self.at(i, j).clone();
            *self.at_mut(i, j) = v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.at(i, j).clone();
            *self.at_mut(i, j) = v;
        }
    }

    /// col_j -= q * col_k
    fn col_sub(&mut self, j: usize, k: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = self.at(i, j) - q * self.at(i, k);
            *self.at_mut(i, j) = v;
        }
    }

    /// row_i -= q * row_k
    fn row_sub(&mut self, i: usize, k: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = self.at(i, j) - q * self.at(k, j);
            *self.at_mut(i, j) = v;
        }
    }

    /// row_k += row_i
    fn row_acc(&mut self, k: usize, i: usize) {
        for j in 0..self.cols {
            let v = self.at(k, j) + self.at(i, j);
            *self.at_mut(k, j) = v;
        }
    }

    /// Unimodular 2x2 op on columns: (ci, cj) <- (s*ci + t*cj, p*ci + q*cj).
    fn col_op(&mut self, ci: usize, cj: usize, s: &BigInt, t: &BigInt, p: &BigInt, q: &BigInt) {
        for r in 0..self.rows {
            let a = self.at(r, ci).clone();
            let b = self.at(r, cj).clone();
            *self.at_mut(r, ci) = s * &a + t * &b;
            *self.at_mut(r, cj) = p * &a + q * &b;
        }
    }

    /// Unimodular 2x2 op on rows: (ri, rj) <- (s*ri + t*rj, p*ri + q*rj).
    fn row_op(&mut self, ri: usize, rj: usize, s: &BigInt, t: &BigInt, p: &BigInt, q: &BigInt) {
        for c in 0..self.cols {
            let a = self.at(ri, c).clone();
            let b = self.at(rj, c).clone();
            *self.at_mut(ri, c) = s * &a + t * &b;
            *self.at_mut(rj, c) = p * &a + q * &b;
        }
    }
}

fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let r = a.extended_gcd(b);
    if r.gcd.is_negative() {
        (-r.gcd, -r.x, -r.y)
    } else {
        (r.gcd, r.x, r.y)
    }
}

/// Index of a sublattice of Z^m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeIndex {
    Finite(BigInt),
    Infinite,
}

/// Column Hermite form of an integer matrix: `h = a * u` with `u` unimodular.
///
/// Pivot rows strictly increase left to right, pivots are positive, a pivot
/// row is zero to the right of its pivot and reduced into `[0, pivot)` to the
/// left. Column space is preserved, which is all the lattice operations need.
#[derive(Clone, Debug)]
pub struct Hnf {
    pub h: Mat,
    pub u: Mat,
    /// pivots[k] = row of the pivot in column k.
    pub pivots: Vec<usize>,
}

pub fn hnf(a: &Mat) -> Hnf {
    let (m, n) = (a.rows, a.cols);
    let mut h = a.clone();
    let mut u = Mat::identity(n);
    let mut pivots = Vec::new();
    let mut next = 0;
    for row in 0..m {
        if next == n {
            break;
        }
        if (next..n).all(|j| h.at(row, j).is_zero()) {
            continue;
        }
        for j in next + 1..n {
            if h.at(row, j).is_zero() {
                continue;
            }
            let a0 = h.at(row, next).clone();
            let b0 = h.at(row, j).clone();
            if a0.is_zero() {
                h.swap_cols(next, j);
                u.swap_cols(next, j);
                continue;
            }
            let (g, s, t) = ext_gcd(&a0, &b0);
            let p = -(&b0 / &g);
            let q = &a0 / &g;
            h.col_op(next, j, &s, &t, &p, &q);
            u.col_op(next, j, &s, &t, &p, &q);
        }
        if h.at(row, next).is_negative() {
            h.negate_col(next);
            u.negate_col(next);
        }
        let pivot = h.at(row, next).clone();
        for j in 0..next {
            let q = h.at(row, j).div_floor(&pivot);
            if !q.is_zero() {
                h.col_sub(j, next, &q);
                u.col_sub(j, next, &q);
            }
        }
        pivots.push(row);
        next += 1;
    }
    Hnf { h, u, pivots }
}

impl Hnf {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Index of the column span inside the ambient Z^rows.
    pub fn index(&self) -> LatticeIndex {
        if self.pivots.len() != self.h.rows {
            return LatticeIndex::Infinite;
        }
        let mut prod = BigInt::one();
        for (k, &p) in self.pivots.iter().enumerate() {
            prod *= self.h.at(p, k);
        }
        LatticeIndex::Finite(prod)
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.decompose_h(x).is_some()
    }

    /// Coefficients of `x` in the Hermite basis, if `x` lies in the span.
    fn decompose_h(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(x.len(), self.h.rows);
        let mut res = x.to_vec();
        let mut coeffs = vec![BigInt::zero(); self.h.cols];
        for (k, &p) in self.pivots.iter().enumerate() {
            let pivot = self.h.at(p, k);
            let (q, r) = res[p].div_rem(pivot);
            if !r.is_zero() {
                return None;
            }
            for i in p..self.h.rows {
                let v = &res[i] - &q * self.h.at(i, k);
                res[i] = v;
            }
            coeffs[k] = q;
        }
        if is_zero_vec(&res) {
            Some(coeffs)
        } else {
            None
        }
    }

    /// Coefficients of `x` against the original matrix columns, if any.
    /// When the matrix embeds Z^r, this is the preimage of `x`.
    pub fn decompose(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        self.decompose_h(x).map(|c| self.u.mul_vec(&c))
    }

    /// Canonical representative of `x` modulo the column span: pivot-row
    /// entries land in `[0, pivot)` via floor division, other entries are
    /// whatever remains. Two vectors are congruent iff their reps are equal.
    pub fn canonical_rep(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.h.rows);
        let mut res = x.to_vec();
        for (k, &p) in self.pivots.iter().enumerate() {
            let pivot = self.h.at(p, k);
            let q = res[p].div_floor(pivot);
            if q.is_zero() {
                continue;
            }
            for i in p..self.h.rows {
                let v = &res[i] - &q * self.h.at(i, k);
                res[i] = v;
            }
        }
        res
    }
}

pub fn lattice_index(a: &Mat) -> LatticeIndex {
    hnf(a).index()
}

/// Canonical coset representative of `v` modulo the column span of `m`.
/// One-shot convenience; callers with a cached [`Hnf`] should use
/// [`Hnf::canonical_rep`] directly.
pub fn coset_canonical(m: &Mat, v: &[BigInt]) -> Vec<BigInt> {
    hnf(m).canonical_rep(v)
}

/// `n^i * v` by repeated application. Iteration counts stay small here, so
/// there is nothing to gain from square-and-multiply on the matrix.
pub fn mat_pow_apply(n: &Mat, v: &[BigInt], i: u64) -> Vec<BigInt> {
    assert_eq!(n.rows, n.cols, "mat_pow_apply needs a square matrix");
    let mut x = v.to_vec();
    for _ in 0..i {
        x = n.mul_vec(&x);
    }
    x
}

/// Smith normal form: `u * a * v = d` with `u`, `v` unimodular and `d`
/// diagonal, each diagonal entry dividing the next.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: Mat,
    pub d: Mat,
    pub v: Mat,
}

pub fn smith(a: &Mat) -> Smith {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = Mat::identity(m);
    let mut v = Mat::identity(n);
    let mut k = 0;
    while k < m.min(n) {
        let mut best: Option<(usize, usize)> = None;
        for i in k..m {
            for j in k..n {
                if d.at(i, j).is_zero() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, bj)) => d.at(i, j).abs() < d.at(bi, bj).abs(),
                };
                if better {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap_rows(k, pi);
        u.swap_rows(k, pi);
        d.swap_cols(k, pj);
        v.swap_cols(k, pj);

        loop {
            let mut dirty = false;
            for i in k + 1..m {
                if d.at(i, k).is_zero() {
                    continue;
                }
                let a0 = d.at(k, k).clone();
                let b0 = d.at(i, k).clone();
                if (&b0 % &a0).is_zero() {
                    let q = &b0 / &a0;
                    d.row_sub(i, k, &q);
                    u.row_sub(i, k, &q);
                } else {
                    let (g, s, t) = ext_gcd(&a0, &b0);
                    let p = -(&b0 / &g);
                    let q = &a0 / &g;
                    d.row_op(k, i, &s, &t, &p, &q);
                    u.row_op(k, i, &s, &t, &p, &q);
                    dirty = true;
                }
            }
            for j in k + 1..n {
                if d.at(k, j).is_zero() {
                    continue;
                }
                let a0 = d.at(k, k).clone();
                let b0 = d.at(k, j).clone();
                if (&b0 % &a0).is_zero() {
                    let q = &b0 / &a0;
                    d.col_sub(j, k, &q);
                    v.col_sub(j, k, &q);
                } else {
                    let (g, s, t) = ext_gcd(&a0, &b0);
                    let p = -(&b0 / &g);
                    let q = &a0 / &g;
                    d.col_op(k, j, &s, &t, &p, &q);
                    v.col_op(k, j, &s, &t, &p, &q);
                    dirty = true;
                }
            }
            let col_clear = (k + 1..m).all(|i| d.at(i, k).is_zero());
            let row_clear = (k + 1..n).all(|j| d.at(k, j).is_zero());
            if col_clear && row_clear && !dirty {
                break;
            }
        }

        // The remaining block must be divisible by the pivot for the chain
        // condition; folding an offending row into row k and re-clearing
        // strictly shrinks the pivot, so this terminates.
        let pivot = d.at(k, k).clone();
        let offender = (k + 1..m)
            .flat_map(|i| (k + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| !(d.at(i, j) % &pivot).is_zero());
        if let Some((i, _)) = offender {
            d.row_acc(k, i);
            u.row_acc(k, i);
            continue;
        }
        if d.at(k, k).is_negative() {
            d.negate_row(k);
            u.negate_row(k);
        }
        k += 1;
    }
    Smith { u, d, v }
}

/// Solve `a * x = b` over the integers. The returned solution is verified
/// against the inputs before it leaves this function.
pub fn solve(a: &Mat, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(b.len(), a.rows);
    let s = smith(a);
    let c = s.u.mul_vec(b);
    let r = a.rows.min(a.cols);
    let mut y = vec![BigInt::zero(); a.cols];
    for i in 0..a.rows {
        if i < r && !s.d.at(i, i).is_zero() {
            let (q, rem) = c[i].div_rem(s.d.at(i, i));
            if !rem.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !c[i].is_zero() {
            return None;
        }
    }
    let x = s.v.mul_vec(&y);
    debug_assert_eq!(a.mul_vec(&x), b.to_vec());
    Some(x)
}
