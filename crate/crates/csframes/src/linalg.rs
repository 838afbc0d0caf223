//! Minimal dense numerics for desk-scale problems: Hermitian Cholesky,
//! normal-equation least squares, and a textbook two-phase simplex used as
//! the exact-LP cross-check on real frames.

use num_complex::Complex64;

use crate::unitary::ComplexMatrix;

#[derive(Debug, PartialEq)]
pub(crate) enum LinalgError {
    NotPositiveDefinite,
    Unbounded,
    Infeasible,
    CycleLimit,
}

/// Cholesky factor L (lower triangular) of a Hermitian positive definite
/// matrix, a = L L^dagger.
pub(crate) fn cholesky(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let mut l = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k).conj();
            }
            if i == j {
                let d = sum.re;
                if d <= 0.0 || !d.is_finite() {
                    return Err(LinalgError::NotPositiveDefinite);
                }
                l.set(i, j, Complex64::new(d.sqrt(), 0.0));
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solve (L L^dagger) x = b in place given the Cholesky factor.
pub(crate) fn cholesky_solve(l: &ComplexMatrix, b: &mut [Complex64]) {
    let n = l.rows();
    // forward: L y = b
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l.get(i, k) * b[k];
        }
        b[i] = sum / l.get(i, i);
    }
    // backward: L^dagger x = y
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in i + 1..n {
            sum -= l.get(k, i).conj() * b[k];
        }
        b[i] = sum / l.get(i, i);
    }
}

/// Least squares min ||A x - y||_2 for a tall dense A (n x t, t small)
/// via the normal equations.
pub(crate) fn lstsq(a: &ComplexMatrix, y: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
    let n = a.rows();
    let t = a.cols();
    assert_eq!(n, y.len());
    let mut gram = ComplexMatrix::zeros(t, t);
    for i in 0..t {
        for j in 0..t {
            let mut sum = Complex64::new(0.0, 0.0);
            for r in 0..n {
                sum += a.get(r, i).conj() * a.get(r, j);
            }
            gram.set(i, j, sum);
        }
    }
    let mut rhs: Vec<Complex64> = (0..t)
        .map(|i| {
            let mut sum = Complex64::new(0.0, 0.0);
            for r in 0..n {
                sum += a.get(r, i).conj() * y[r];
            }
            sum
        })
        .collect();
    let l = cholesky(&gram)?;
    cholesky_solve(&l, &mut rhs);
    Ok(rhs)
}

const LP_EPS: f64 = 1e-9;

/// min c.z subject to A z = b, z >= 0, by the two-phase tableau simplex
/// with Bland's rule.  Returns the optimal z.
pub(crate) fn lp_min(
    a: &[Vec<f64>],
    b: &[f64],
    c: &[f64],
) -> Result<Vec<f64>, LinalgError> {
    let n = a.len();
    let m = c.len();
    assert!(a.iter().all(|row| row.len() == m));
    assert_eq!(b.len(), n);

    // tableau columns: m structural + n artificial + 1 rhs
    let width = m + n + 1;
    let mut t = vec![vec![0.0f64; width]; n];
    for i in 0..n {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..m {
            t[i][j] = flip * a[i][j];
        }
        t[i][m + i] = 1.0;
        t[i][width - 1] = flip * b[i];
    }
    let mut basis: Vec<usize> = (m..m + n).collect();

    // phase 1: minimize the sum of artificials
    let mut obj = vec![0.0f64; width];
    for j in m..m + n {
        obj[j] = 1.0;
    }
    price_out(&mut obj, &t, &basis);
    simplex_iterate(&mut t, &mut basis, &mut obj, m + n)?;
    if -obj[width - 1] > 1e-7 {
        return Err(LinalgError::Infeasible);
    }
    // drive artificials out of the basis where possible
    for i in 0..n {
        if basis[i] >= m {
            if let Some(j) = (0..m).find(|&j| t[i][j].abs() > LP_EPS) {
                pivot(&mut t, i, j);
                basis[i] = j;
            }
        }
    }

    // phase 2: original objective over structural columns only
    let mut obj2 = vec![0.0f64; width];
    obj2[..m].copy_from_slice(c);
    price_out(&mut obj2, &t, &basis);
    simplex_iterate(&mut t, &mut basis, &mut obj2, m)?;

    let mut z = vec![0.0f64; m];
    for (i, &bj) in basis.iter().enumerate() {
        if bj < m {
            z[bj] = t[i][width - 1];
        }
    }
    Ok(z)
}

fn price_out(obj: &mut [f64], t: &[Vec<f64>], basis: &[usize]) {
    let width = obj.len();
    for (i, &bj) in basis.iter().enumerate() {
        let coeff = obj[bj];
        if coeff != 0.0 {
            for j in 0..width {
                obj[j] -= coeff * t[i][j];
            }
        }
    }
}

fn pivot(t: &mut [Vec<f64>], row: usize, col: usize) {
    let width = t[row].len();
    let p = t[row][col];
    for j in 0..width {
        t[row][j] /= p;
    }
    for i in 0..t.len() {
        if i != row {
            let f = t[i][col];
            if f != 0.0 {
                for j in 0..width {
                    t[i][j] -= f * t[row][j];
                }
            }
        }
    }
}

fn simplex_iterate(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    obj: &mut [f64],
    n_cols: usize,
) -> Result<(), LinalgError> {
    let width = obj.len();
    for _ in 0..50_000 {
        // Bland: entering = lowest-index column with negative reduced cost
        let enter = (0..n_cols).find(|&j| obj[j] < -LP_EPS);
        let Some(enter) = enter else { return Ok(()) };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..t.len() {
            if t[i][enter] > LP_EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                if ratio < best - LP_EPS
                    || (ratio < best + LP_EPS
                        && leave.is_some_and(|l| basis[i] < basis[l]))
                {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return Err(LinalgError::Unbounded);
        };
        pivot(t, leave, enter);
        basis[leave] = enter;
        let coeff = obj[enter];
        if coeff != 0.0 {
            for j in 0..width {
                obj[j] -= coeff * t[leave][j];
            }
        }
    }
    Err(LinalgError::CycleLimit)
}
