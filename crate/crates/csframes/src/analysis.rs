//! Coherence analysis: mutual incoherence, Welch bound, equiangularity
//! defect, tightness, and the sparsity levels those certify.
//!
//! The pairwise scan is exhaustive (O(N^2 n)) and exact rather than built
//! on an eigendecomposition; at the scales this crate targets that is both
//! simpler and fast enough.  The scan parallelizes over the left column
//! index and reduces per-index results in index order, so reports are
//! bitwise identical however many threads run.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::design::{Design, DesignKind, DesignStats};
use crate::frame::{ConstructionTag, FrameMatrix};
use crate::par;
use crate::tol;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("need at least 2 columns and N >= n >= 1, got n={n}, N={n_cols}")]
    Degenerate { n: usize, n_cols: usize },
    #[error("column {0} has zero norm")]
    ZeroColumn(usize),
    #[error("bound chain is defined for CON0 and CON1 frames only")]
    UnsupportedConstruction,
    #[error("design has no blocks")]
    EmptyDesign,
    #[error("point {0} lies in no block (zero replication)")]
    ZeroReplication(usize),
    #[error("design does not satisfy its pair-coverage invariant")]
    InvalidDesign,
}

/// Welch lower bound on the coherence of an n x N unit-column matrix:
/// sqrt((N - n) / ((N - 1) n)).
pub fn welch_bound(n: usize, n_cols: usize) -> Result<f64, AnalysisError> {
    if n == 0 || n_cols < 2 || n_cols < n {
        return Err(AnalysisError::Degenerate { n, n_cols });
    }
    Ok((((n_cols - n) as f64) / (((n_cols - 1) * n) as f64)).sqrt())
}

fn columns_and_norms(
    frame: &FrameMatrix,
) -> Result<(Vec<Vec<Complex64>>, Vec<f64>), AnalysisError> {
    let n_cols = frame.n_cols();
    if n_cols < 2 || frame.n_rows() == 0 {
        return Err(AnalysisError::Degenerate {
            n: frame.n_rows(),
            n_cols,
        });
    }
    let cols: Vec<Vec<Complex64>> = (0..n_cols).map(|c| frame.column(c)).collect();
    let mut norms = Vec::with_capacity(n_cols);
    for (c, col) in cols.iter().enumerate() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(AnalysisError::ZeroColumn(c));
        }
        norms.push(norm);
    }
    Ok((cols, norms))
}

fn scan_one(cols: &[Vec<Complex64>], norms: &[f64], i: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let ci = &cols[i];
    for j in i + 1..cols.len() {
        let cj = &cols[j];
        let ip: Complex64 = ci.iter().zip(cj).map(|(a, b)| a.conj() * b).sum();
        let mu = ip.norm() / (norms[i] * norms[j]);
        lo = lo.min(mu);
        hi = hi.max(mu);
    }
    (lo, hi)
}

fn reduce_extremes(parts: Vec<(f64, f64)>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (l, h) in parts {
        lo = lo.min(l);
        hi = hi.max(h);
    }
    (lo, hi)
}

/// (min, max) of the normalized |inner product| over all distinct column
/// pairs.
pub fn inner_product_extremes(frame: &FrameMatrix) -> Result<(f64, f64), AnalysisError> {
    let (cols, norms) = columns_and_norms(frame)?;
    let parts = par::indexed_map(cols.len() - 1, |i| scan_one(&cols, &norms, i));
    Ok(reduce_extremes(parts))
}

/// Sequential twin of [`inner_product_extremes`]; same result bit for bit.
pub fn inner_product_extremes_seq(frame: &FrameMatrix) -> Result<(f64, f64), AnalysisError> {
    let (cols, norms) = columns_and_norms(frame)?;
    let parts = par::indexed_map_seq(cols.len() - 1, |i| scan_one(&cols, &norms, i));
    Ok(reduce_extremes(parts))
}

/// Mutual incoherence: the maximum normalized |inner product|.
pub fn mip(frame: &FrameMatrix) -> Result<f64, AnalysisError> {
    Ok(inner_product_extremes(frame)?.1)
}

/// (min, max) over pairs whose normalized |inner product| exceeds
/// `zero_tol`; `None` when every pair is orthogonal.
pub fn nonzero_inner_extremes(
    frame: &FrameMatrix,
    zero_tol: f64,
) -> Result<Option<(f64, f64)>, AnalysisError> {
    let (cols, norms) = columns_and_norms(frame)?;
    let parts = par::indexed_map(cols.len() - 1, |i| {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for j in i + 1..cols.len() {
            let ip: Complex64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
            let mu = ip.norm() / (norms[i] * norms[j]);
            if mu > zero_tol {
                lo = lo.min(mu);
                hi = hi.max(mu);
            }
        }
        (lo, hi)
    });
    let (lo, hi) = reduce_extremes(parts);
    Ok((hi > 0.0).then_some((lo, hi)))
}

fn epsilon_from(extremes: (f64, f64), welch: f64) -> f64 {
    let (lo, hi) = extremes;
    if welch == 0.0 {
        return if hi == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (1.0 - lo / welch).max(hi / welch - 1.0).max(0.0)
}

/// Smallest eps with (1-eps) mu <= |inner| <= (1+eps) mu for every distinct
/// column pair, mu the Welch bound.  Infinite when the Welch bound is zero
/// but some pair is not orthogonal.
pub fn epsilon_equiangular(frame: &FrameMatrix) -> Result<f64, AnalysisError> {
    let extremes = inner_product_extremes(frame)?;
    let welch = welch_bound(frame.n_rows(), frame.n_cols())?;
    Ok(epsilon_from(extremes, welch))
}

/// Largest sparsity t certified by a coherence value: the biggest integer
/// strictly below 1/(2 mu) + 1/2, resolved with a guard band so exact
/// rational coherences land deterministically.  Zero when mu >= 1; usize::MAX
/// stands in for "no coherence ceiling" when mu <= 0.
///
/// Coherence certificates cannot clear roughly sqrt(n) for an n-row frame
/// (the Welch bound floors mu near 1/sqrt(n) once N is a constant multiple
/// of n), so t values from this route always sit at or below that ceiling;
/// frames may well recover sparser signals than the certificate promises.
pub fn recoverability_t(mu: f64) -> usize {
    if mu <= 0.0 {
        return usize::MAX;
    }
    let bound = 1.0 / (2.0 * mu) + 0.5;
    let t = (bound - tol::BOUNDARY_GUARD).floor();
    if t <= 0.0 {
        0
    } else if t >= usize::MAX as f64 {
        usize::MAX
    } else {
        t as usize
    }
}

/// Sparsity certified by an equiangularity defect: floor(sqrt(n) / (2(1+eps))).
pub fn sparsity_from_epsilon(n: usize, eps: f64) -> usize {
    if !eps.is_finite() {
        return 0;
    }
    ((n as f64).sqrt() / (2.0 * (1.0 + eps))).floor() as usize
}

/// Row Gram proportional to the identity within `rel_tol` (max-entry,
/// relative to the mean diagonal).
pub fn is_tight(frame: &FrameMatrix, rel_tol: f64) -> Result<bool, AnalysisError> {
    if frame.n_rows() == 0 || frame.n_cols() == 0 {
        return Err(AnalysisError::Degenerate {
            n: frame.n_rows(),
            n_cols: frame.n_cols(),
        });
    }
    let gram = frame.gram_rows();
    let n = frame.n_rows();
    let alpha = (0..n).map(|i| gram.get(i, i).re).sum::<f64>() / n as f64;
    if alpha <= 0.0 {
        return Ok(false);
    }
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
    Ok(dev <= rel_tol * alpha)
}

/// Tight and equiangular: every pairwise |inner product| sits at the Welch
/// bound (eps below `tol`).
pub fn is_etf(frame: &FrameMatrix, tol: f64) -> Result<bool, AnalysisError> {
    Ok(is_tight(frame, tol)? && epsilon_equiangular(frame)? <= tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceReport {
    pub n: usize,
    #[serde(rename = "N")]
    pub n_cols: usize,
    pub mip: f64,
    pub welch: f64,
    pub epsilon: f64,
    pub t_mip: usize,
    pub t_eps: usize,
    pub tight: bool,
    pub etf: bool,
    pub min_inner: f64,
    pub max_inner: f64,
}

/// One-stop report over a frame, using the crate default tolerances.
pub fn coherence_report(frame: &FrameMatrix) -> Result<CoherenceReport, AnalysisError> {
    let (min_inner, max_inner) = inner_product_extremes(frame)?;
    let welch = welch_bound(frame.n_rows(), frame.n_cols())?;
    let epsilon = epsilon_from((min_inner, max_inner), welch);
    let tight = is_tight(frame, tol::GRAM)?;
    Ok(CoherenceReport {
        n: frame.n_rows(),
        n_cols: frame.n_cols(),
        mip: max_inner,
        welch,
        epsilon,
        t_mip: recoverability_t(max_inner),
        t_eps: sparsity_from_epsilon(frame.n_rows(), epsilon),
        tight,
        etf: tight && epsilon <= tol::GRAM,
        min_inner,
        max_inner,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundHypotheses {
    /// every block has at least 2 points
    pub k_min_at_least_2: bool,
    /// K_max <= sqrt(2) (K_min - 1); sufficient for the Welch anchor but
    /// not necessary, and reported separately from it
    pub spread_condition: bool,
    /// 2n - 1 <= N
    pub column_surplus: bool,
    /// K_max / (2(v-1)) <= Welch bound, verified directly on (n, N)
    pub welch_anchor: bool,
}

/// The bound chain a design certifies for a construction before any frame
/// is built, plus the certified equiangularity defect when the applicable
/// hypotheses hold.
#[derive(Debug, Clone, Serialize)]
pub struct BoundChain {
    pub construction: ConstructionTag,
    pub k_min: usize,
    pub k_max: usize,
    pub replication_min: f64,
    pub replication_max: f64,
    pub blocks_min: f64,
    pub blocks_max: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub n_cols: usize,
    pub mip_lower: f64,
    pub mip_upper: f64,
    pub hypotheses: BoundHypotheses,
    pub certified_epsilon: Option<f64>,
}

/// Bound chain for the incidence-splice constructions on a PBD.
///
/// For CON0 the certified defect is 1: same-point columns are orthogonal,
/// so no defect below 1 is possible, and the chain
/// K_max / (2(v-1)) <= welch <= MIP <= K_max / (v-1) pins the upper side.
/// The anchor inequality is checked directly on the design's (n, N) rather
/// than through the sufficient spread condition, which constant-block-size
/// triple systems narrowly miss; both flags are reported.  For CON1 the
/// certified defect is (K_max - K_min) / (K_min - 1), which degenerates to
/// an ETF certificate when all blocks have one size.
pub fn theoretical_bounds(
    design: &Design,
    construction: ConstructionTag,
) -> Result<BoundChain, AnalysisError> {
    if !matches!(construction, ConstructionTag::Con0 | ConstructionTag::Con1) {
        return Err(AnalysisError::UnsupportedConstruction);
    }
    if design.kind() != DesignKind::Pbd || !design.validate().ok {
        return Err(AnalysisError::InvalidDesign);
    }
    let stats = design.stats();
    let (Some(k_min), Some(k_max)) = (stats.k_min(), stats.k_max()) else {
        return Err(AnalysisError::EmptyDesign);
    };
    let v = design.v() as f64;
    let n = stats.n_blocks;
    let n_cols = match construction {
        ConstructionTag::Con0 => stats.sum_block_sizes,
        _ => stats.sum_block_sizes + design.v(),
    };
    let welch = welch_bound(n, n_cols)?;
    let (mip_lower, mip_upper, certified, hypotheses) = match construction {
        ConstructionTag::Con0 => {
            let upper = k_max as f64 / (v - 1.0);
            let lower = 0.5 * upper;
            let hyp = BoundHypotheses {
                k_min_at_least_2: k_min >= 2,
                spread_condition: k_max as f64 <= 2f64.sqrt() * (k_min as f64 - 1.0),
                column_surplus: 2 * n <= n_cols + 1,
                welch_anchor: lower <= welch + tol::EXACT_REL,
            };
            let certified =
                (hyp.k_min_at_least_2 && hyp.welch_anchor).then_some(1.0);
            (lower, upper, certified, hyp)
        }
        _ => {
            let lower = (k_min as f64 - 1.0) / (v + k_min as f64 - 2.0);
            let upper = (k_max as f64 - 1.0) / (v + k_min as f64 - 2.0);
            let hyp = BoundHypotheses {
                k_min_at_least_2: k_min >= 2,
                spread_condition: k_max as f64 <= 2f64.sqrt() * (k_min as f64 - 1.0),
                column_surplus: 2 * n <= n_cols + 1,
                welch_anchor: lower <= welch + tol::EXACT_REL,
            };
            let certified = hyp
                .k_min_at_least_2
                .then_some((k_max - k_min) as f64 / (k_min as f64 - 1.0));
            (lower, upper, certified, hyp)
        }
    };
    Ok(BoundChain {
        construction,
        k_min,
        k_max,
        replication_min: (v - 1.0) / (k_max as f64 - 1.0),
        replication_max: (v - 1.0) / (k_min as f64 - 1.0),
        blocks_min: v * (v - 1.0) / ((k_max * (k_max - 1)) as f64),
        blocks_max: v * (v - 1.0) / ((k_min * (k_min - 1)) as f64),
        n,
        n_cols,
        mip_lower,
        mip_upper,
        hypotheses,
        certified_epsilon: certified,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PackingBound {
    /// smallest tau with r_x >= (v-1) / (tau (K_min - 1)) for every point
    pub tau: f64,
    /// certified sparsity floor(sqrt(n) / (4 tau))
    pub t: usize,
    pub replication_min: usize,
    pub n_blocks: usize,
}

/// Replication-slack certificate for a packing (a PBD counts, with tau = 1
/// at constant block size).
pub fn packing_bound(design: &Design) -> Result<PackingBound, AnalysisError> {
    if !design.validate().ok {
        return Err(AnalysisError::InvalidDesign);
    }
    let stats = design.stats();
    let Some(k_min) = stats.k_min() else {
        return Err(AnalysisError::EmptyDesign);
    };
    let r_min = stats.replication_min().unwrap_or(0);
    if r_min == 0 {
        let p = stats.replication.iter().position(|&r| r == 0).unwrap();
        return Err(AnalysisError::ZeroReplication(p));
    }
    let tau = (design.v() as f64 - 1.0) / ((k_min - 1) as f64 * r_min as f64);
    let t = ((stats.n_blocks as f64).sqrt() / (4.0 * tau)).floor() as usize;
    Ok(PackingBound {
        tau,
        t,
        replication_min: r_min,
        n_blocks: stats.n_blocks,
    })
}

/// Stats helper reused by the CLI: the column count a construction yields.
pub fn construction_columns(stats: &DesignStats, tag: ConstructionTag, v: usize) -> usize {
    match tag {
        ConstructionTag::Con1 => stats.sum_block_sizes + v,
        _ => stats.sum_block_sizes,
    }
}
