//! Complex Hadamard matrices and mutually unbiased bases.
//!
//! These are the unitary atoms spliced into design incidence structures by
//! the frame builders: the character table of a cyclic group (DFT matrix)
//! supplies a complex Hadamard matrix of every order, the Sylvester
//! doubling construction supplies real ones at powers of two, and for prime
//! dimensions a full family of p+1 mutually unbiased bases is available.

use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UnitaryError {
    #[error("matrix order must be at least 1")]
    ZeroOrder,
    #[error("order {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("{0} is not prime")]
    NotPrime(usize),
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: Complex64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Largest |a_ij - b_ij| over all entries.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Character table of the cyclic group of order `r`: entry (j, k) is
/// omega^(jk) with omega = exp(2*pi*i/r).  Rows are orthogonal and every
/// entry has unit modulus, so H * H^dagger = r * I.
pub fn dft_matrix(r: usize) -> Result<ComplexMatrix, UnitaryError> {
    if r == 0 {
        return Err(UnitaryError::ZeroOrder);
    }
    Ok(ComplexMatrix::from_fn(r, r, |j, k| {
        // reduce the exponent mod r before touching floats
        let e = (j * k) % r;
        Complex64::from_polar(1.0, TAU * e as f64 / r as f64)
    }))
}

/// Sylvester Hadamard matrix of the given power-of-two order, entries
/// exactly +1/-1, first row and column all ones.
pub fn sylvester(order: usize) -> Result<ComplexMatrix, UnitaryError> {
    if order == 0 {
        return Err(UnitaryError::ZeroOrder);
    }
    if !order.is_power_of_two() {
        return Err(UnitaryError::NotPowerOfTwo(order));
    }
    // entry (j, k) = (-1)^(popcount(j & k))
    Ok(ComplexMatrix::from_fn(order, order, |j, k| {
        if (j & k).count_ones() % 2 == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    }))
}

/// True iff every entry has modulus within `tol` of 1 and the rows are
/// orthogonal: max-entry of H * H^dagger - r * I at most `tol * r`.
pub fn is_complex_hadamard(h: &ComplexMatrix, tol: f64) -> bool {
    if h.rows() != h.cols() || h.rows() == 0 {
        return false;
    }
    let r = h.rows();
    for j in 0..r {
        for k in 0..r {
            let m = h.get(j, k).norm();
            if (m - 1.0).abs() > tol {
                return false;
            }
        }
    }
    let gram = h.mul(&h.dagger());
    let mut target = ComplexMatrix::zeros(r, r);
    for i in 0..r {
        target.set(i, i, Complex64::new(r as f64, 0.0));
    }
    gram.max_abs_diff(&target) <= tol * r as f64
}

pub(crate) fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Full family of p+1 mutually unbiased bases of dimension p for prime p,
/// returned as unitary matrices with the basis vectors as columns and the
/// identity first.  For odd p the t-th non-identity basis has entries
/// omega^(t*j^2 + k*j) / sqrt(p); p = 2 uses the standard qubit triple.
pub fn mub_family(p: usize) -> Result<Vec<ComplexMatrix>, UnitaryError> {
    if !is_prime(p) {
        return Err(UnitaryError::NotPrime(p));
    }
    let mut bases = vec![ComplexMatrix::identity(p)];
    if p == 2 {
        let s = 1.0 / 2f64.sqrt();
        bases.push(ComplexMatrix::from_fn(2, 2, |j, k| {
            if j == 1 && k == 1 {
                Complex64::new(-s, 0.0)
            } else {
                Complex64::new(s, 0.0)
            }
        }));
        bases.push(ComplexMatrix::from_fn(2, 2, |j, k| match (j, k) {
            (0, _) => Complex64::new(s, 0.0),
            (1, 0) => Complex64::new(0.0, s),
            _ => Complex64::new(0.0, -s),
        }));
        return Ok(bases);
    }
    let scale = 1.0 / (p as f64).sqrt();
    for t in 1..=p {
        bases.push(ComplexMatrix::from_fn(p, p, |j, k| {
            let e = (t * j * j + k * j) % p;
            Complex64::from_polar(scale, TAU * e as f64 / p as f64)
        }));
    }
    Ok(bases)
}

/// Max deviation of cross-basis overlap moduli from 1/sqrt(p) over every
/// unordered pair of distinct bases.
pub fn unbiasedness_defect(bases: &[ComplexMatrix]) -> f64 {
    let p = bases[0].rows();
    let expect = 1.0 / (p as f64).sqrt();
    let mut worst = 0.0f64;
    for i in 0..bases.len() {
        for j in i + 1..bases.len() {
            let overlap = bases[i].dagger().mul(&bases[j]);
            for a in 0..p {
                for b in 0..p {
                    worst = worst.max((overlap.get(a, b).norm() - expect).abs());
                }
            }
        }
    }
    worst
}
