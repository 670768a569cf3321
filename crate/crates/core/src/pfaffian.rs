//! Pfaffians of real skew-symmetric matrices.
//!
//! [`pfaffian_signed_log`] uses Parlett-Reid tridiagonalization with partial
//! pivoting and returns the result as a [`SignedLog`]. [`pfaffian_brute`]
//! sums over perfect matchings and serves as a small-size oracle.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Pivots smaller than this multiple of the largest input entry count as zero.
pub const ZERO_PIVOT_RTOL: f64 = 1e-12;

/// Largest dimension accepted by [`pfaffian_brute`].
pub const BRUTE_MAX: usize = 8;

/// A real antisymmetric matrix stored densely in row-major order.
///
/// Writes go through [`SkewMatrix::set`] or [`SkewMatrix::add`], which
/// update both triangles, so `A^T = -A` holds by construction.
#[derive(Clone, PartialEq)]
pub struct SkewMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SkewMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds from a dense row-major array, rejecting non-antisymmetric input.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::LengthMismatch {
                what: "dense matrix",
                expected: n * n,
                got: data.len(),
            });
        }
        for i in 0..n {
            for j in i..n {
                if data[i * n + j] != -data[j * n + i] {
                    return Err(Error::NotAntisymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds from a closure giving the entry `(i, j)` for `i < j`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets `A[i][j] = v` and `A[j][i] = -v`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i != j || v == 0.0, "diagonal of a skew matrix is zero");
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = -v;
    }

    /// Adds `v` to `A[i][j]` and subtracts it from `A[j][i]`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            return;
        }
        self.data[i * self.n + j] += v;
        self.data[j * self.n + i] -= v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `P A P^T` where row `k` of the result is row `perm[k]` of `A`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        assert_eq!(perm.len(), n);
        let mut out = Self::zeros(n);
        for (i, &pi) in perm.iter().enumerate() {
            for (j, &pj) in perm.iter().enumerate() {
                out.data[i * n + j] = self.data[pi * n + pj];
            }
        }
        out
    }

    /// Trailing principal block starting at index `start`.
    pub fn trailing(&self, start: usize) -> Self {
        let m = self.n - start;
        let mut out = Self::zeros(m);
        for i in 0..m {
            let src = (start + i) * self.n + start;
            out.data[i * m..(i + 1) * m].copy_from_slice(&self.data[src..src + m]);
        }
        out
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

impl fmt::Debug for SkewMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SkewMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n.min(12) {
            let row: Vec<String> = (0..self.n.min(12))
                .map(|j| format!("{:7.3}", self.get(i, j)))
                .collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// A real number stored as `sign * exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: i8,
    pub log_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        log_abs: 0.0,
    };

    pub fn from_f64(x: f64) -> Self {
        match x.partial_cmp(&0.0) {
            Some(Ordering::Greater) => Self {
                sign: 1,
                log_abs: x.ln(),
            },
            Some(Ordering::Less) => Self {
                sign: -1,
                log_abs: (-x).ln(),
            },
            _ => Self::ZERO,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_abs.exp()
        }
    }

    pub fn mul(self, other: SignedLog) -> SignedLog {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        SignedLog {
            sign: self.sign * other.sign,
            log_abs: self.log_abs + other.log_abs,
        }
    }

    pub fn neg(self) -> SignedLog {
        SignedLog {
            sign: -self.sign,
            log_abs: self.log_abs,
        }
    }

    /// `self / other`; `None` when `other` is zero.
    pub fn div(self, other: SignedLog) -> Option<SignedLog> {
        if other.sign == 0 {
            return None;
        }
        if self.sign == 0 {
            return Some(Self::ZERO);
        }
        Some(SignedLog {
            sign: self.sign * other.sign,
            log_abs: self.log_abs - other.log_abs,
        })
    }

    /// Sum of signed terms, computed relative to the largest magnitude.
    pub fn sum(terms: &[SignedLog]) -> SignedLog {
        let shift = terms
            .iter()
            .filter(|t| t.sign != 0)
            .map(|t| t.log_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let s: f64 = terms
            .iter()
            .filter(|t| t.sign != 0)
            .map(|t| f64::from(t.sign) * (t.log_abs - shift).exp())
            .sum();
        let mut out = Self::from_f64(s);
        if out.sign != 0 {
            out.log_abs += shift;
        }
        out
    }
}

/// Pf(A) via Parlett-Reid with partial pivoting.
pub fn pfaffian_signed_log(m: &SkewMatrix) -> Result<SignedLog> {
    if m.dim() % 2 == 1 {
        return Err(Error::OddDimension(m.dim()));
    }
    let scale = m.max_abs();
    let mut work = m.clone();
    Ok(pfaffian_in_place(&mut work, scale))
}

/// Pf of `a`, treating pivots below `ZERO_PIVOT_RTOL * scale` as zero.
/// `a` is overwritten.
pub(crate) fn pfaffian_in_place(a: &mut SkewMatrix, scale: f64) -> SignedLog {
    let n = a.dim();
    debug_assert!(n.is_multiple_of(2));
    match eliminate(a, n, n, ZERO_PIVOT_RTOL * scale) {
        Some(pf) => pf,
        None => SignedLog::ZERO,
    }
}

/// Runs `steps` Parlett-Reid steps (`steps` even), pivoting only among the
/// first `pivot_end` indices. On return the block from index `steps` on holds
/// the Schur complement, and the product of eliminated pivots is returned.
/// Only the upper triangle of `a` is kept current. `None` signals a pivot
/// whose magnitude does not exceed `floor`.
pub(crate) fn eliminate(
    a: &mut SkewMatrix,
    steps: usize,
    pivot_end: usize,
    floor: f64,
) -> Option<SignedLog> {
    let n = a.dim();
    debug_assert!(steps.is_multiple_of(2) && steps <= pivot_end && pivot_end <= n);
    let mut sign: i8 = 1;
    let mut log_abs = 0.0;
    let mut tau = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut support: Vec<usize> = Vec::with_capacity(n);

    for k in (0..steps).step_by(2) {
        let mut kp = k + 1;
        let mut best = a.data[k * n + k + 1].abs();
        for j in k + 2..pivot_end {
            let v = a.data[k * n + j].abs();
            if v > best {
                best = v;
                kp = j;
            }
        }
        if kp != k + 1 {
            swap_upper(a, k, k + 1, kp);
            sign = -sign;
        }
        let piv = a.data[k * n + k + 1];
        if !(piv.abs() > floor) {
            return None;
        }
        if piv < 0.0 {
            sign = -sign;
        }
        log_abs += piv.abs().ln();

        let start = k + 2;
        if start >= n {
            continue;
        }
        support.clear();
        for j in start..n {
            tau[j] = a.data[k * n + j] / piv;
            w[j] = a.data[(k + 1) * n + j];
            if tau[j] != 0.0 || w[j] != 0.0 {
                support.push(j);
            }
        }
        if 4 * support.len() < n - start {
            // Sparse rank-2 update restricted to the nonzero pattern.
            for (pos, &i) in support.iter().enumerate() {
                let (ti, wi) = (tau[i], w[i]);
                let row = i * n;
                for &j in &support[pos + 1..] {
                    a.data[row + j] += wi * tau[j] - ti * w[j];
                }
            }
        } else {
            for &i in &support {
                let (ti, wi) = (tau[i], w[i]);
                let row = &mut a.data[i * n + i + 1..(i + 1) * n];
                for ((x, &tj), &wj) in row.iter_mut().zip(&tau[i + 1..n]).zip(&w[i + 1..n]) {
                    *x += wi * tj - ti * wj;
                }
            }
        }
    }
    Some(SignedLog { sign, log_abs })
}

/// Swaps indices `r < s` in an upper-triangle-only skew matrix, touching
/// only rows and columns from `from` on.
fn swap_upper(a: &mut SkewMatrix, from: usize, r: usize, s: usize) {
    let n = a.dim();
    let d = &mut a.data;
    for m in from..r {
        d.swap(m * n + r, m * n + s);
    }
    for m in r + 1..s {
        let x = d[r * n + m];
        d[r * n + m] = -d[m * n + s];
        d[m * n + s] = -x;
    }
    d[r * n + s] = -d[r * n + s];
    for m in s + 1..n {
        d.swap(r * n + m, s * n + m);
    }
}

/// Copies the upper triangle of the trailing block into a fresh full
/// skew matrix.
pub(crate) fn trailing_from_upper(a: &SkewMatrix, start: usize) -> SkewMatrix {
    let n = a.dim();
    let m = n - start;
    SkewMatrix::from_upper(m, |i, j| a.data[(start + i) * n + start + j])
}

/// Exact Pfaffian by expansion over perfect matchings.
pub fn pfaffian_brute(m: &SkewMatrix) -> Result<f64> {
    let n = m.dim();
    if n > BRUTE_MAX {
        return Err(Error::BruteForceTooLarge { n, max: BRUTE_MAX });
    }
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(brute_rec(m, &idx))
}

fn brute_rec(m: &SkewMatrix, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let first = idx[0];
    let mut total = 0.0;
    for j in 1..idx.len() {
        let a = m.get(first, idx[j]);
        if a == 0.0 {
            continue;
        }
        let rest: Vec<usize> = idx[1..]
            .iter()
            .enumerate()
            .filter(|&(k, _)| k + 1 != j)
            .map(|(_, &v)| v)
            .collect();
        let sgn = if j % 2 == 1 { 1.0 } else { -1.0 };
        total += sgn * a * brute_rec(m, &rest);
    }
    total
}
