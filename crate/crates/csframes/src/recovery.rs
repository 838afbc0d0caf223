//! Sparse recovery solvers and the synthetic trial harness.
//!
//! Basis pursuit (min l1 subject to frame * x = y) runs as an operator
//! splitting: alternate exact projection onto the affine feasible set with
//! complex soft-thresholding.  Row-normalized tight frames make the
//! projection a single adjoint multiply because frame * frame^dagger is a
//! scalar; anything else goes through a Cholesky factor of the row Gram.
//! A greedy matching pursuit and a brute-force minimal-support oracle sit
//! alongside as cross-checks, plus an exact LP route for real frames.
//!
//! Trials draw per-trial random state from a stream keyed by (seed, trial
//! index), so a run is reproducible and independent of how trials are
//! scheduled across threads; statistics reduce in trial order.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::combin::{binomial, for_each_combination};
use crate::frame::FrameMatrix;
use crate::linalg::{self, LinalgError};
use crate::par;
use crate::tol;
use crate::unitary::ComplexMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum RecoveryError {
    #[error("measurement length {got} does not match frame rows {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("measurement vector contains a non-finite entry")]
    NonFinite,
    #[error("frame rows are linearly dependent; projection is undefined")]
    RankDeficient,
    #[error("sparsity level must be between 1 and the column count")]
    InvalidSparsity,
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("support enumeration too large: C({n_cols}, {t}) exceeds {guard}")]
    Guard {
        n_cols: usize,
        t: usize,
        guard: u128,
    },
    #[error("selected columns are linearly dependent")]
    DependentColumns,
    #[error("exact LP route requires a real frame and real measurements")]
    NotReal,
    #[error("lp solver failed: {0}")]
    LpFailed(String),
}

/// Exactly-t-sparse complex signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    pub len: usize,
    pub support: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl SparseSignal {
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); self.len];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            x[i] = v;
        }
        x
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BpParams {
    pub rho: f64,
    pub opt_tol: f64,
    pub feas_tol: f64,
    pub max_iters: usize,
}

impl Default for BpParams {
    fn default() -> Self {
        BpParams {
            rho: 1.0,
            opt_tol: 1e-9,
            feas_tol: 1e-8,
            max_iters: 50_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BpSolution {
    pub x: Vec<Complex64>,
    pub iters: usize,
    /// false means the iteration cap was hit; x is the best iterate
    pub converged: bool,
    pub feas_residual: f64,
}

enum Projector {
    /// row Gram is alpha * I; the inverse is a scalar
    Scalar(f64),
    Cholesky(ComplexMatrix),
}

fn build_projector(frame: &FrameMatrix) -> Result<Projector, RecoveryError> {
    let gram = frame.gram_rows();
    let n = frame.n_rows();
    let alpha = (0..n).map(|i| gram.get(i, i).re).sum::<f64>() / n as f64;
    if alpha > 0.0 {
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j {
                    Complex64::new(alpha, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                dev = dev.max((gram.get(i, j) - target).norm());
            }
        }
        if dev <= tol::GRAM * alpha {
            return Ok(Projector::Scalar(1.0 / alpha));
        }
    }
    match linalg::cholesky(&gram) {
        Ok(l) => Ok(Projector::Cholesky(l)),
        Err(LinalgError::NotPositiveDefinite) => Err(RecoveryError::RankDeficient),
        Err(_) => Err(RecoveryError::RankDeficient),
    }
}

impl Projector {
    /// solve (frame frame^dagger) w = r
    fn solve(&self, r: &[Complex64]) -> Vec<Complex64> {
        match self {
            Projector::Scalar(inv) => r.iter().map(|z| z * *inv).collect(),
            Projector::Cholesky(l) => {
                let mut w = r.to_vec();
                linalg::cholesky_solve(l, &mut w);
                w
            }
        }
    }
}

fn soft_threshold(w: &[Complex64], kappa: f64) -> Vec<Complex64> {
    w.iter()
        .map(|z| {
            let m = z.norm();
            if m <= kappa {
                Complex64::new(0.0, 0.0)
            } else {
                z * ((m - kappa) / m)
            }
        })
        .collect()
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn diff_norm2(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Minimum-l1 solve of frame * x = y by projection/soft-threshold
/// splitting.  Deterministic: fixed iteration order, no data races.
pub fn bp_solve(
    frame: &FrameMatrix,
    y: &[Complex64],
    params: &BpParams,
) -> Result<BpSolution, RecoveryError> {
    let n = frame.n_rows();
    let n_cols = frame.n_cols();
    if y.len() != n {
        return Err(RecoveryError::DimensionMismatch {
            got: y.len(),
            want: n,
        });
    }
    if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(RecoveryError::NonFinite);
    }
    let projector = build_projector(frame)?;
    // affine projection: v - A^dagger (A A^dagger)^{-1} (A v - y)
    let project = |v: &[Complex64]| -> Vec<Complex64> {
        let av = frame.apply(v);
        let resid: Vec<Complex64> = av.iter().zip(y).map(|(a, b)| a - b).collect();
        let w = projector.solve(&resid);
        let corr = frame.apply_adjoint(&w);
        v.iter().zip(&corr).map(|(a, b)| a - b).collect()
    };

    let kappa = 1.0 / params.rho;
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; n_cols];
    let mut z = vec![zero; n_cols];
    let mut u = vec![zero; n_cols];
    let mut iters = 0;
    let mut converged = false;
    while iters < params.max_iters {
        iters += 1;
        let v: Vec<Complex64> = z.iter().zip(&u).map(|(a, b)| a - b).collect();
        let x_new = project(&v);
        let w: Vec<Complex64> = x_new.iter().zip(&u).map(|(a, b)| a + b).collect();
        let z_new = soft_threshold(&w, kappa);
        u = w.iter().zip(&z_new).map(|(a, b)| a - b).collect();
        let step = diff_norm2(&x_new, &x).max(diff_norm2(&x_new, &z_new));
        let scale = 1.0 + norm2(&x_new);
        x = x_new;
        z = z_new;
        if step <= params.opt_tol * scale {
            converged = true;
            break;
        }
    }
    let ax = frame.apply(&x);
    let y_norm = norm2(y);
    let feas_residual = if y_norm > 0.0 {
        ax.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt() / y_norm
    } else {
        norm2(&ax)
    };
    Ok(BpSolution {
        x,
        iters,
        converged,
        feas_residual,
    })
}

/// Greedy matching pursuit: pick the column most correlated with the
/// residual, refit on the chosen support by least squares, repeat t times
/// (or until the residual vanishes).  Ties resolve to the lowest index.
pub fn omp_solve(
    frame: &FrameMatrix,
    y: &[Complex64],
    t: usize,
) -> Result<Vec<Complex64>, RecoveryError> {
    let n = frame.n_rows();
    let n_cols = frame.n_cols();
    if y.len() != n {
        return Err(RecoveryError::DimensionMismatch {
            got: y.len(),
            want: n,
        });
    }
    if t == 0 || t > n_cols {
        return Err(RecoveryError::InvalidSparsity);
    }
    let cols: Vec<Vec<Complex64>> = (0..n_cols).map(|c| frame.column(c)).collect();
    let norms: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    if norms.contains(&0.0) {
        return Err(RecoveryError::DependentColumns);
    }
    let mut support: Vec<usize> = Vec::new();
    let mut residual = y.to_vec();
    let mut coeffs: Vec<Complex64> = Vec::new();
    let y_norm = norm2(y);
    for _ in 0..t {
        let mut best = usize::MAX;
        let mut best_score = -1.0;
        for j in 0..n_cols {
            if support.contains(&j) {
                continue;
            }
            let score = cols[j]
                .iter()
                .zip(&residual)
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                .norm()
                / norms[j];
            if score > best_score {
                best_score = score;
                best = j;
            }
        }
        if best == usize::MAX {
            break;
        }
        support.push(best);
        let sub = frame.submatrix(&support);
        coeffs = linalg::lstsq(&sub, y).map_err(|_| RecoveryError::DependentColumns)?;
        residual = y.to_vec();
        for r in 0..n {
            for (si, &col) in support.iter().enumerate() {
                residual[r] -= frame.get(r, col) * coeffs[si];
            }
        }
        if norm2(&residual) <= 1e-12 * y_norm.max(1e-300) {
            break;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n_cols];
    for (si, &col) in support.iter().enumerate() {
        x[col] = coeffs[si];
    }
    Ok(x)
}

const L0_GUARD: u128 = 1_000_000;
const L0_RESIDUAL_REL: f64 = 1e-8;

/// Exhaustive minimal-support fit: enumerate supports in increasing size
/// (lexicographic within a size), least-squares each, and return the first
/// whose residual is at most 1e-8 * |y|.  None when no support of size at
/// most t_max fits.
pub fn l0_oracle(
    frame: &FrameMatrix,
    y: &[Complex64],
    t_max: usize,
) -> Result<Option<Vec<Complex64>>, RecoveryError> {
    let n = frame.n_rows();
    let n_cols = frame.n_cols();
    if y.len() != n {
        return Err(RecoveryError::DimensionMismatch {
            got: y.len(),
            want: n,
        });
    }
    let subsets = binomial(n_cols as u128, t_max as u128).unwrap_or(u128::MAX);
    if subsets > L0_GUARD {
        return Err(RecoveryError::Guard {
            n_cols,
            t: t_max,
            guard: L0_GUARD,
        });
    }
    let y_norm = norm2(y);
    if y_norm == 0.0 {
        return Ok(Some(vec![Complex64::new(0.0, 0.0); n_cols]));
    }
    let budget = L0_RESIDUAL_REL * y_norm;
    for size in 1..=t_max.min(n_cols) {
        let mut found: Option<Vec<Complex64>> = None;
        for_each_combination(n_cols, size, |combo| {
            let sub = frame.submatrix(combo);
            let Ok(coeffs) = linalg::lstsq(&sub, y) else {
                return true;
            };
            let mut residual = 0.0f64;
            for r in 0..n {
                let mut fit = Complex64::new(0.0, 0.0);
                for (si, &col) in combo.iter().enumerate() {
                    fit += frame.get(r, col) * coeffs[si];
                }
                residual += (y[r] - fit).norm_sqr();
            }
            if residual.sqrt() <= budget {
                let mut x = vec![Complex64::new(0.0, 0.0); n_cols];
                for (si, &col) in combo.iter().enumerate() {
                    x[col] = coeffs[si];
                }
                found = Some(x);
                return false;
            }
            true
        });
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Exact l1 minimization on a real frame via the split LP
/// min 1.(p + q) subject to A(p - q) = y, p, q >= 0.
pub fn l1_lp_solve_real(frame: &FrameMatrix, y: &[Complex64]) -> Result<Vec<f64>, RecoveryError> {
    let n = frame.n_rows();
    let n_cols = frame.n_cols();
    if y.len() != n {
        return Err(RecoveryError::DimensionMismatch {
            got: y.len(),
            want: n,
        });
    }
    if !frame.is_real() || y.iter().any(|z| z.im != 0.0) {
        return Err(RecoveryError::NotReal);
    }
    let mut a = vec![vec![0.0f64; 2 * n_cols]; n];
    for r in 0..n {
        for c in 0..n_cols {
            let e = frame.get(r, c).re;
            a[r][c] = e;
            a[r][n_cols + c] = -e;
        }
    }
    let b: Vec<f64> = y.iter().map(|z| z.re).collect();
    let cost = vec![1.0; 2 * n_cols];
    let z = linalg::lp_min(&a, &b, &cost).map_err(|e| RecoveryError::LpFailed(format!("{e:?}")))?;
    Ok((0..n_cols).map(|c| z[c] - z[n_cols + c]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Bp,
    Omp,
    L0,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverKind::Bp => write!(f, "bp"),
            SolverKind::Omp => write!(f, "omp"),
            SolverKind::L0 => write!(f, "l0"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryTrialStats {
    pub trials: usize,
    pub successes: usize,
    pub max_rel_error: f64,
    pub median_rel_error: f64,
    pub solver: SolverKind,
    pub seed: u64,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub rel_error: f64,
    pub iters: usize,
    pub success: bool,
}

/// The exactly-t-sparse signal for (seed, trial): a uniform random size-t
/// support and Gaussian values kept away from zero (modulus at least 0.1),
/// real-valued when the frame is real.
pub fn sample_signal(
    n_cols: usize,
    t: usize,
    seed: u64,
    trial: usize,
    real_valued: bool,
) -> SparseSignal {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    let mut support: Vec<usize> =
        rand::seq::index::sample(&mut rng, n_cols, t).into_iter().collect();
    support.sort_unstable();
    let normal = StandardNormal;
    let values: Vec<Complex64> = (0..t)
        .map(|_| loop {
            let re: f64 = normal.sample(&mut rng);
            let im: f64 = if real_valued {
                0.0
            } else {
                normal.sample(&mut rng)
            };
            let z = Complex64::new(re, im);
            if z.norm() >= 0.1 {
                break z;
            }
        })
        .collect();
    SparseSignal {
        len: n_cols,
        support,
        values,
    }
}

fn run_one(
    frame: &FrameMatrix,
    t: usize,
    seed: u64,
    trial: usize,
    solver: SolverKind,
    success_tol: f64,
    real_valued: bool,
) -> Result<TrialOutcome, RecoveryError> {
    let signal = sample_signal(frame.n_cols(), t, seed, trial, real_valued);
    let x_true = signal.to_dense();
    let y = frame.apply(&x_true);
    let (x_hat, iters) = match solver {
        SolverKind::Bp => {
            let sol = bp_solve(frame, &y, &BpParams::default())?;
            (sol.x, sol.iters)
        }
        SolverKind::Omp => (omp_solve(frame, &y, t)?, t),
        SolverKind::L0 => {
            let found = l0_oracle(frame, &y, t)?;
            (
                found.unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); frame.n_cols()]),
                0,
            )
        }
    };
    let rel_error = diff_norm2(&x_hat, &x_true) / norm2(&x_true);
    Ok(TrialOutcome {
        trial,
        rel_error,
        iters,
        success: rel_error <= success_tol,
    })
}

fn summarize(
    outcomes: Vec<Result<TrialOutcome, RecoveryError>>,
    solver: SolverKind,
    seed: u64,
    t: usize,
) -> Result<(RecoveryTrialStats, Vec<TrialOutcome>), RecoveryError> {
    let mut rows = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        rows.push(o?);
    }
    let successes = rows.iter().filter(|o| o.success).count();
    let max_rel_error = rows.iter().map(|o| o.rel_error).fold(0.0, f64::max);
    let mut sorted: Vec<f64> = rows.iter().map(|o| o.rel_error).collect();
    sorted.sort_by(f64::total_cmp);
    let median_rel_error = if sorted.is_empty() {
        0.0
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    Ok((
        RecoveryTrialStats {
            trials: rows.len(),
            successes,
            max_rel_error,
            median_rel_error,
            solver,
            seed,
            t,
        },
        rows,
    ))
}

/// Run `trials` synthetic recovery trials.  Per-trial randomness is keyed
/// by (seed, trial index) and the reduction is by trial order, so the
/// output is identical whether trials run on one thread or many.
pub fn run_trials(
    frame: &FrameMatrix,
    t: usize,
    trials: usize,
    seed: u64,
    solver: SolverKind,
    success_tol: f64,
) -> Result<(RecoveryTrialStats, Vec<TrialOutcome>), RecoveryError> {
    if t == 0 || t > frame.n_cols() {
        return Err(RecoveryError::InvalidSparsity);
    }
    if trials == 0 {
        return Err(RecoveryError::NoTrials);
    }
    let real = frame.is_real();
    let outcomes = par::indexed_map(trials, |i| {
        run_one(frame, t, seed, i, solver, success_tol, real)
    });
    summarize(outcomes, solver, seed, t)
}

/// Sequential twin of [`run_trials`]; same results bit for bit.
pub fn run_trials_seq(
    frame: &FrameMatrix,
    t: usize,
    trials: usize,
    seed: u64,
    solver: SolverKind,
    success_tol: f64,
) -> Result<(RecoveryTrialStats, Vec<TrialOutcome>), RecoveryError> {
    if t == 0 || t > frame.n_cols() {
        return Err(RecoveryError::InvalidSparsity);
    }
    if trials == 0 {
        return Err(RecoveryError::NoTrials);
    }
    let real = frame.is_real();
    let outcomes = par::indexed_map_seq(trials, |i| {
        run_one(frame, t, seed, i, solver, success_tol, real)
    });
    summarize(outcomes, solver, seed, t)
}
