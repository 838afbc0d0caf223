//! Block-type arithmetic: how many blocks of each size a decomposition of
//! the complete graph can use.
//!
//! A type over sizes (k_1, .., k_s) is a vector of non-negative block
//! counts; its pair count F = sum alpha_i * C(k_i, 2) must equal C(v, 2)
//! for the type to be feasible on v points.  The planner searches the
//! one-parameter families of types with a prescribed block total and column
//! total for one whose pair count is triangular, then certifies the result
//! with the inequality system and an exact non-negative integer solution of
//! M X = alpha for the applicable unimodular M.
//!
//! Everything here is exact integer arithmetic (u128 with checked
//! binomials); a `PlanResult` is an arithmetic-feasibility certificate
//! only and is never fed to a constructor.

use serde::Serialize;
use thiserror::Error;

use crate::combin::{binomial, choose2};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlannerError {
    #[error("sizes and counts must be non-empty and the same length")]
    ShapeMismatch,
    #[error("block sizes must be at least 2 and strictly increasing")]
    BadSizes,
    #[error("operation needs sizes (k-1, k, k+1) for some k >= 2")]
    NotConsecutiveTriple,
    #[error("swap would drive a block count negative")]
    InfeasibleSwap,
    #[error("k must exceed 3")]
    KTooSmall,
    #[error("n must be at least 1")]
    NTooSmall,
    #[error("h must be a rational number greater than 3")]
    HOutOfRange,
    #[error("cannot parse `{0}` as a rational")]
    BadRational(String),
    #[error("arithmetic overflow")]
    Overflow,
}

/// Exact rational, normalized with a positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

fn gcd64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self, PlannerError> {
        if den == 0 {
            return Err(PlannerError::BadRational(format!("{num}/{den}")));
        }
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd64(num, den).max(1);
        Ok(Rational {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    /// Accepts `7`, `9/2`, and decimal forms like `4.5`.
    pub fn parse(text: &str) -> Result<Self, PlannerError> {
        let bad = || PlannerError::BadRational(text.to_string());
        let text = text.trim();
        if let Some((a, b)) = text.split_once('/') {
            let num: i64 = a.trim().parse().map_err(|_| bad())?;
            let den: i64 = b.trim().parse().map_err(|_| bad())?;
            return Rational::new(num, den);
        }
        if let Some((int_part, frac_part)) = text.split_once('.') {
            if frac_part.is_empty() || frac_part.len() > 12 {
                return Err(bad());
            }
            let negative = int_part.trim_start().starts_with('-');
            let int: i64 = if int_part == "-" {
                0
            } else {
                int_part.parse().map_err(|_| bad())?
            };
            let frac: i64 = frac_part.parse().map_err(|_| bad())?;
            if frac < 0 {
                return Err(bad());
            }
            let den = 10i64.checked_pow(frac_part.len() as u32).ok_or_else(bad)?;
            let mag = int
                .checked_abs()
                .and_then(|i| i.checked_mul(den))
                .and_then(|i| i.checked_add(frac))
                .ok_or_else(bad)?;
            let num = if negative || int < 0 { -mag } else { mag };
            return Rational::new(num, den);
        }
        let num: i64 = text.parse().map_err(|_| bad())?;
        Rational::new(num, 1)
    }

    fn greater_than_int(&self, k: i64) -> bool {
        self.num > k * self.den
    }
}

/// Block counts per size for a candidate decomposition of K_v.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockType {
    pub sizes: Vec<u64>,
    pub counts: Vec<u64>,
}

impl BlockType {
    pub fn new(sizes: Vec<u64>, counts: Vec<u64>) -> Result<Self, PlannerError> {
        if sizes.is_empty() || sizes.len() != counts.len() {
            return Err(PlannerError::ShapeMismatch);
        }
        if sizes[0] < 2 || sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PlannerError::BadSizes);
        }
        Ok(BlockType { sizes, counts })
    }

    /// Number of point pairs the blocks cover: sum alpha_i * C(k_i, 2).
    pub fn pair_count(&self) -> Result<u128, PlannerError> {
        let mut total: u128 = 0;
        for (&k, &a) in self.sizes.iter().zip(&self.counts) {
            let per = binomial(k as u128, 2).ok_or(PlannerError::Overflow)?;
            total = per
                .checked_mul(a as u128)
                .and_then(|x| total.checked_add(x))
                .ok_or(PlannerError::Overflow)?;
        }
        Ok(total)
    }

    /// Total number of blocks.
    pub fn n_blocks(&self) -> u128 {
        self.counts.iter().map(|&a| a as u128).sum()
    }

    /// Column total sum k_i * alpha_i.
    pub fn column_total(&self) -> u128 {
        self.sizes
            .iter()
            .zip(&self.counts)
            .map(|(&k, &a)| k as u128 * a as u128)
            .sum()
    }

    /// The middle size when the sizes are (k-1, k, k+1).
    fn consecutive_k(&self) -> Result<u64, PlannerError> {
        if self.sizes.len() == 3
            && self.sizes[1] == self.sizes[0] + 1
            && self.sizes[2] == self.sizes[1] + 1
        {
            Ok(self.sizes[1])
        } else {
            Err(PlannerError::NotConsecutiveTriple)
        }
    }
}

/// Trade 2t middle blocks for t of each neighbor size: the pair count
/// moves by exactly t while the block and column totals stay fixed.
pub fn binom_swap(ty: &BlockType, t: i64) -> Result<BlockType, PlannerError> {
    ty.consecutive_k()?;
    let adjust = |a: u64, d: i64| -> Result<u64, PlannerError> {
        let x = a as i128 + d as i128;
        u64::try_from(x).map_err(|_| PlannerError::InfeasibleSwap)
    };
    let counts = vec![
        adjust(ty.counts[0], t)?,
        adjust(ty.counts[1], -2 * t)?,
        adjust(ty.counts[2], t)?,
    ];
    BlockType::new(ty.sizes.clone(), counts)
}

/// Swap 2k-1 middle blocks for k of size k-1 plus k-1 of size k+1 (or the
/// inverse), changing the column total by -1 (+1) per step while the pair
/// count and block total stay fixed.  `delta_columns` is the requested
/// change in the column total.
pub fn column_swap_plan(ty: &BlockType, delta_columns: i64) -> Result<BlockType, PlannerError> {
    let k = ty.consecutive_k()? as i128;
    let steps = (delta_columns as i128).unsigned_abs();
    let (d_lo, d_mid, d_hi) = if delta_columns <= 0 {
        // forward: consume middle blocks
        (k * steps as i128, -(2 * k - 1) * steps as i128, (k - 1) * steps as i128)
    } else {
        (-k * steps as i128, (2 * k - 1) * steps as i128, -(k - 1) * steps as i128)
    };
    let adjust = |a: u64, d: i128| -> Result<u64, PlannerError> {
        u64::try_from(a as i128 + d).map_err(|_| PlannerError::InfeasibleSwap)
    };
    let counts = vec![
        adjust(ty.counts[0], d_lo)?,
        adjust(ty.counts[1], d_mid)?,
        adjust(ty.counts[2], d_hi)?,
    ];
    BlockType::new(ty.sizes.clone(), counts)
}

/// Pair-count feasibility on v points: F(alpha) = C(v, 2).
pub fn feasible(v: u64, ty: &BlockType) -> Result<bool, PlannerError> {
    Ok(ty.pair_count()? == choose2(v as u128))
}

#[derive(Debug, Clone, Serialize)]
pub struct ExistenceCheck {
    pub ok: bool,
    pub violated: Vec<String>,
}

/// The inequality system for consecutive-size types: the middle count
/// dominates each neighbor, the neighbors together dominate the middle,
/// and the pair count is exactly C(v, 2).
pub fn designexistence_check(ty: &BlockType, v: u64) -> Result<ExistenceCheck, PlannerError> {
    ty.consecutive_k()?;
    let (a, b, c) = (ty.counts[0], ty.counts[1], ty.counts[2]);
    let mut violated = Vec::new();
    if b < a {
        violated.push("alpha_k >= alpha_{k-1}".to_string());
    }
    if b < c {
        violated.push("alpha_k >= alpha_{k+1}".to_string());
    }
    if (a as u128) + (c as u128) < b as u128 {
        violated.push("alpha_{k-1} + alpha_{k+1} >= alpha_k".to_string());
    }
    if !feasible(v, ty)? {
        violated.push("pair count equals C(v,2)".to_string());
    }
    Ok(ExistenceCheck {
        ok: violated.is_empty(),
        violated,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MxOutcome {
    /// Non-negative integer solution of M X = alpha, when one exists.
    pub solution: Option<Vec<u64>>,
    /// Column hypothesis: in every column of M the row indices (k_i - 1)
    /// of the nonzero entries have gcd 1.
    pub gcd_hypothesis: bool,
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact non-negative integer solution of M X = alpha for a non-negative
/// integer matrix M whose rows are indexed by k_i - 1.  Square invertible
/// systems are solved exactly by fraction-free elimination; otherwise a
/// bounded enumeration runs (desk scale).  The column-gcd hypothesis is
/// evaluated either way; a failing hypothesis does not stop the solve.
pub fn solve_mx(m: &[Vec<u64>], row_sizes: &[u64], alpha: &[u64]) -> MxOutcome {
    let s = m.len();
    assert!(s > 0 && m.iter().all(|r| r.len() == m[0].len()));
    assert_eq!(row_sizes.len(), s);
    assert_eq!(alpha.len(), s);
    let t = m[0].len();

    let mut gcd_hypothesis = true;
    for c in 0..t {
        let mut g: u64 = 0;
        for r in 0..s {
            if m[r][c] != 0 {
                g = gcd_u64(g, row_sizes[r] - 1);
            }
        }
        if g != 1 {
            gcd_hypothesis = false;
        }
    }

    let solution = if s == t {
        solve_square_exact(m, alpha).or_else(|| enumerate_solution(m, alpha))
    } else {
        enumerate_solution(m, alpha)
    };
    MxOutcome {
        solution,
        gcd_hypothesis,
    }
}

/// Cramer's rule in i128; `None` when singular, non-integer, or negative.
fn solve_square_exact(m: &[Vec<u64>], alpha: &[u64]) -> Option<Vec<u64>> {
    let s = m.len();
    let det = det_i128(&to_i128(m));
    if det == 0 {
        return None;
    }
    let mut out = Vec::with_capacity(s);
    for j in 0..s {
        let mut mj = to_i128(m);
        for r in 0..s {
            mj[r][j] = alpha[r] as i128;
        }
        let dj = det_i128(&mj);
        if dj % det != 0 {
            return None;
        }
        let x = dj / det;
        if x < 0 {
            return None;
        }
        out.push(x as u64);
    }
    Some(out)
}

fn to_i128(m: &[Vec<u64>]) -> Vec<Vec<i128>> {
    m.iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect()
}

fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    match n {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => {
            // expansion by the first row; planner matrices stay tiny
            let mut acc = 0i128;
            for j in 0..n {
                if m[0][j] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i128>> = (1..n)
                    .map(|r| {
                        (0..n)
                            .filter(|&c| c != j)
                            .map(|c| m[r][c])
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                acc += sign * m[0][j] * det_i128(&minor);
            }
            acc
        }
    }
}

/// Bounded depth-first enumeration of non-negative integer solutions.
fn enumerate_solution(m: &[Vec<u64>], alpha: &[u64]) -> Option<Vec<u64>> {
    let s = m.len();
    let t = m[0].len();
    let mut x = vec![0u64; t];
    let mut rem: Vec<u64> = alpha.to_vec();
    fn rec(
        m: &[Vec<u64>],
        s: usize,
        t: usize,
        j: usize,
        x: &mut Vec<u64>,
        rem: &mut Vec<u64>,
    ) -> bool {
        if j == t {
            return rem.iter().all(|&r| r == 0);
        }
        // upper bound from the tightest row this column touches
        let mut hi = u64::MAX;
        let mut touches = false;
        for i in 0..s {
            if let Some(q) = rem[i].checked_div(m[i][j]) {
                touches = true;
                hi = hi.min(q);
            }
        }
        if !touches {
            // a zero column contributes nothing; pin it to zero
            x[j] = 0;
            return rec(m, s, t, j + 1, x, rem);
        }
        for val in 0..=hi {
            x[j] = val;
            let mut ok = true;
            for i in 0..s {
                let used = m[i][j].checked_mul(val);
                match used {
                    Some(u) if u <= rem[i] => rem[i] -= u,
                    _ => {
                        for r in 0..i {
                            rem[r] += m[r][j] * val;
                        }
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                if rec(m, s, t, j + 1, x, rem) {
                    return true;
                }
                for i in 0..s {
                    rem[i] += m[i][j] * val;
                }
            }
        }
        x[j] = 0;
        false
    }
    rec(m, s, t, 0, &mut x, &mut rem).then_some(x)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanCertificates {
    pub feasible: bool,
    pub inequalities: bool,
    pub mx_solution: Option<Vec<u64>>,
    #[serde(skip)]
    pub gcd_hypothesis: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanResult {
    pub v: u64,
    pub k_values: Vec<u64>,
    pub alpha: Vec<u64>,
    pub n: u64,
    #[serde(rename = "N")]
    pub n_cols: u64,
    pub tau: u64,
    pub certificates: PlanCertificates,
    pub existence: &'static str,
}

const EXISTENCE_CAVEAT: &str = "asymptotic-only";

/// The inequality-system matrix for consecutive sizes.
fn m_primary() -> Vec<Vec<u64>> {
    vec![vec![1, 0, 1], vec![1, 1, 1], vec![0, 1, 1]]
}

/// The alternate matrix used when the column surplus is large.
fn m_alternate() -> Vec<Vec<u64>> {
    vec![vec![1, 0, 0], vec![5, 1, 1], vec![0, 1, 2]]
}

/// Largest v with C(v, 2) <= f, and whether C(v, 2) == f.
fn triangular_root(f: u128) -> (u64, bool) {
    let mut v = (((8.0 * f as f64 + 1.0).sqrt() - 1.0) / 2.0).floor() as u128 + 1;
    while choose2(v) > f {
        v -= 1;
    }
    while choose2(v + 1) <= f {
        v += 1;
    }
    (v as u64, choose2(v) == f)
}

/// Type (n/4 + tau, n/2 - 2tau, n/4 + tau) search over sizes
/// (k-1, k, k+1): equal outer counts pin the column total to k n, the
/// inequality window gives outer counts in [ceil(n/4), floor(n/3)], and
/// the pair count walks that window one step per unit, so the search looks
/// for the first triangular number in a length-n/12 interval.  `tau` is the
/// offset above the window's low end.
pub fn plan_integer(n: u64, k: u64) -> Result<Option<PlanResult>, PlannerError> {
    if k <= 3 {
        return Err(PlannerError::KTooSmall);
    }
    if n == 0 {
        return Err(PlannerError::NTooSmall);
    }
    let a_lo = n.div_ceil(4);
    let a_hi = n / 3;
    if a_lo > a_hi {
        return Ok(None);
    }
    let base = (n as u128)
        .checked_mul(choose2(k as u128))
        .ok_or(PlannerError::Overflow)?;
    let f_lo = base + a_lo as u128;
    let f_hi = base + a_hi as u128;
    let (mut v, exact) = triangular_root(f_lo);
    if !exact {
        v += 1;
    }
    let f_star = choose2(v as u128);
    if f_star > f_hi {
        return Ok(None);
    }
    let a = (f_star - base) as u64;
    let ty = BlockType::new(vec![k - 1, k, k + 1], vec![a, n - 2 * a, a])?;
    let result = certify(ty, v, n, k * n, a - a_lo)?;
    Ok(Some(result))
}

fn certify(
    ty: BlockType,
    v: u64,
    n: u64,
    n_cols: u64,
    tau: u64,
) -> Result<PlanResult, PlannerError> {
    debug_assert_eq!(ty.n_blocks(), n as u128);
    debug_assert_eq!(ty.column_total(), n_cols as u128);
    let feas = feasible(v, &ty)?;
    let ineq = designexistence_check(&ty, v)?;
    let (matrix, row_sizes): (Vec<Vec<u64>>, Vec<u64>) = if ineq.ok {
        (m_primary(), ty.sizes.clone())
    } else {
        (m_alternate(), ty.sizes.clone())
    };
    let mx = solve_mx(&matrix, &row_sizes, &ty.counts);
    let inequalities = ineq.ok || mx.solution.is_some();
    Ok(PlanResult {
        v,
        k_values: ty.sizes.clone(),
        alpha: ty.counts.clone(),
        n,
        n_cols,
        tau,
        certificates: PlanCertificates {
            feasible: feas,
            inequalities,
            mx_solution: mx.solution,
            gcd_hypothesis: mx.gcd_hypothesis,
        },
        existence: EXISTENCE_CAVEAT,
    })
}

/// Rational-ratio search: k is the integer nearest to h (half ties round
/// down), sigma = |floor(h n) - k n| is the column surplus, and the type
/// family (tau, n - sigma - 2tau, sigma + tau) is scanned over the window
/// the applicable inequality system allows.  Small surpluses (sigma at
/// most n/4) use the primary matrix; larger ones switch to the alternate
/// matrix exactly at sigma > n/4.  Negative surpluses mirror the roles of
/// k-1 and k+1.
pub fn plan_rational(n: u64, h: Rational) -> Result<Option<PlanResult>, PlannerError> {
    if !h.greater_than_int(3) {
        return Err(PlannerError::HOutOfRange);
    }
    if n == 0 {
        return Err(PlannerError::NTooSmall);
    }
    let floor = h.num.div_euclid(h.den);
    let frac2 = 2 * h.num.rem_euclid(h.den);
    let k = if frac2 > h.den { floor + 1 } else { floor } as u64;
    let n_cols_i = (h.num as i128 * n as i128).div_euclid(h.den as i128);
    let s = n_cols_i - (k as i128 * n as i128);
    if s == 0 {
        // exact integer ratio
        return plan_integer(n, k);
    }
    let sigma = s.unsigned_abs() as u64;
    let mirror = s < 0;
    let n_cols = u64::try_from(n_cols_i).map_err(|_| PlannerError::Overflow)?;

    // canonical sizes run ascending for s > 0 and descending for s < 0;
    // the parameterized counts (tau, n - sigma - 2tau, sigma + tau) and the
    // inequality windows are identical in both orientations
    let sizes_canonical: Vec<u64> = if mirror {
        vec![k + 1, k, k - 1]
    } else {
        vec![k - 1, k, k + 1]
    };

    let in_primary_regime = 4 * sigma <= n;
    let (tau_lo, tau_hi) = if in_primary_regime {
        let span = n - 2 * sigma;
        (span.div_ceil(4), span / 3)
    } else {
        let lo = if n > 2 * sigma {
            (n - 2 * sigma).div_ceil(8)
        } else {
            0
        };
        let hi_num = 2u128 * n as u128;
        let hi = if hi_num > 3 * sigma as u128 {
            ((hi_num - 3 * sigma as u128) / 15) as u64
        } else {
            return Ok(None);
        };
        (lo, hi)
    };
    // counts must stay non-negative
    let tau_cap = (n - sigma) / 2;
    let tau_hi = tau_hi.min(tau_cap);
    if tau_lo > tau_hi {
        return Ok(None);
    }

    // pair count at tau, walked one step per unit of tau
    let base = (n as u128)
        .checked_mul(choose2(k as u128))
        .ok_or(PlannerError::Overflow)?;
    let shift = if mirror {
        // F = n C(k,2) - sigma (k-1) + tau
        base.checked_sub(sigma as u128 * (k as u128 - 1))
            .ok_or(PlannerError::Overflow)?
    } else {
        // F = n C(k,2) + sigma k + tau
        base.checked_add(sigma as u128 * k as u128)
            .ok_or(PlannerError::Overflow)?
    };
    let f_lo = shift + tau_lo as u128;
    let f_hi = shift + tau_hi as u128;
    let (mut v, exact) = triangular_root(f_lo);
    if !exact {
        v += 1;
    }
    let f_star = choose2(v as u128);
    if f_star > f_hi {
        return Ok(None);
    }
    let tau = (f_star - shift) as u64;
    let counts_canonical = vec![tau, n - sigma - 2 * tau, sigma + tau];

    // certificates run in the canonical orientation (mirroring swaps the
    // outer rows of the system); the reported type lists sizes ascending
    let matrix = if in_primary_regime {
        m_primary()
    } else {
        m_alternate()
    };
    let mx = solve_mx(&matrix, &sizes_canonical, &counts_canonical);

    let (sizes, counts) = if mirror {
        (
            vec![k - 1, k, k + 1],
            vec![counts_canonical[2], counts_canonical[1], counts_canonical[0]],
        )
    } else {
        (sizes_canonical, counts_canonical)
    };
    let ty = BlockType::new(sizes, counts)?;
    debug_assert_eq!(ty.n_blocks(), n as u128);
    debug_assert_eq!(ty.column_total(), n_cols as u128);
    let feas = feasible(v, &ty)?;
    let inequalities = if in_primary_regime {
        designexistence_check(&ty, v)?.ok
    } else {
        mx.solution.is_some()
    };
    Ok(Some(PlanResult {
        v,
        k_values: ty.sizes.clone(),
        alpha: ty.counts.clone(),
        n,
        n_cols,
        tau,
        certificates: PlanCertificates {
            feasible: feas,
            inequalities,
            mx_solution: mx.solution,
            gcd_hypothesis: mx.gcd_hypothesis,
        },
        existence: EXISTENCE_CAVEAT,
    }))
}
