//! Exhaustive exact-cover search for small PBDs and seeded greedy packings.
//!
//! The exact-cover view: each unordered point pair is an element to cover,
//! each candidate block covers the pairs inside it, and a PBD is an exact
//! cover of the pair universe.  The search runs Algorithm X with a
//! fewest-candidates-first column choice and lexicographic row order, so
//! results are reproducible without a seed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::{Design, DesignError, DesignKind};
use crate::combin::{binomial, for_each_combination};

const SEARCH_GUARD_V: usize = 30;
const PACKING_CANDIDATE_GUARD: u128 = 2_000_000;

struct PairSpace {
    v: usize,
    words: usize,
}

impl PairSpace {
    fn new(v: usize) -> Self {
        let pairs = v * (v - 1) / 2;
        PairSpace {
            v,
            words: pairs.div_ceil(64),
        }
    }

    fn pairs(&self) -> usize {
        self.v * (self.v - 1) / 2
    }

    fn index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < b && b < self.v);
        a * (2 * self.v - a - 1) / 2 + (b - a - 1)
    }

    fn block_mask(&self, block: &[usize]) -> Vec<u64> {
        let mut mask = vec![0u64; self.words];
        for i in 0..block.len() {
            for j in i + 1..block.len() {
                let (a, b) = (block[i].min(block[j]), block[i].max(block[j]));
                let p = self.index(a, b);
                mask[p / 64] |= 1 << (p % 64);
            }
        }
        mask
    }
}

fn disjoint(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & y == 0)
}

fn union_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d |= s;
    }
}

fn remove_from(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d &= !s;
    }
}

fn normalize_sizes(v: usize, k_set: &[usize]) -> Result<Vec<usize>, DesignError> {
    let mut sizes: Vec<usize> = k_set.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.is_empty() || sizes.iter().any(|&k| k < 2 || k > v) {
        return Err(DesignError::BadSizeSet);
    }
    Ok(sizes)
}

/// Non-negative integer combination reachability for the pair-count
/// equation: can `target` be written as a sum of C(k, 2) steps?
fn pair_count_solvable(target: usize, sizes: &[usize]) -> bool {
    let mut reachable = vec![false; target + 1];
    reachable[0] = true;
    for &k in sizes {
        let step = k * (k - 1) / 2;
        for s in step..=target {
            if reachable[s - step] {
                reachable[s] = true;
            }
        }
    }
    reachable[target]
}

/// Exhaustive search for a PBD(v, K, 1), honoring `forced` blocks, which
/// are kept verbatim in the result.  Returns `Ok(None)` when the search
/// space is exhausted without a cover.  The pair-count equation is checked
/// before searching and its infeasibility is an error, not a miss.
pub fn pbd_exact_cover(
    v: usize,
    k_set: &[usize],
    forced: &[Vec<usize>],
) -> Result<Option<Design>, DesignError> {
    if v == 0 {
        return Err(DesignError::EmptyPointSet);
    }
    if v > SEARCH_GUARD_V {
        return Err(DesignError::SearchGuard {
            v,
            guard: SEARCH_GUARD_V,
        });
    }
    let sizes = normalize_sizes(v, k_set)?;
    let space = PairSpace::new(v);
    let total_pairs = space.pairs();

    // forced blocks: structural check + pairwise disjoint coverage
    let mut covered = vec![0u64; space.words];
    let mut forced_sorted = Vec::with_capacity(forced.len());
    for block in forced {
        let probe = Design::new(v, vec![block.clone()], DesignKind::Pbd)?;
        let block = probe.blocks()[0].clone();
        let mask = space.block_mask(&block);
        if !disjoint(&covered, &mask) {
            return Err(DesignError::ForcedConflict);
        }
        union_into(&mut covered, &mask);
        forced_sorted.push(block);
    }
    let covered_count: usize = covered.iter().map(|w| w.count_ones() as usize).sum();

    if !pair_count_solvable(total_pairs - covered_count, &sizes) {
        return Err(DesignError::PairCountInfeasible { v });
    }

    // candidate blocks: sizes ascending, lexicographic within a size, and
    // never touching a pair the forced blocks already cover
    let mut cand_blocks: Vec<Vec<usize>> = Vec::new();
    let mut cand_masks: Vec<Vec<u64>> = Vec::new();
    for &k in &sizes {
        for_each_combination(v, k, |combo| {
            let mask = space.block_mask(combo);
            if disjoint(&covered, &mask) {
                cand_blocks.push(combo.to_vec());
                cand_masks.push(mask);
            }
            true
        });
    }

    // per-pair candidate lists in global (lexicographic) order
    let mut by_pair: Vec<Vec<usize>> = vec![Vec::new(); total_pairs];
    for (ci, mask) in cand_masks.iter().enumerate() {
        for (w, word) in mask.iter().enumerate() {
            let mut bits = *word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                by_pair[w * 64 + b].push(ci);
                bits &= bits - 1;
            }
        }
    }

    let mut chosen: Vec<usize> = Vec::new();
    let found = cover_rec(
        &mut covered,
        total_pairs,
        covered_count,
        &cand_masks,
        &by_pair,
        &mut chosen,
    );
    if !found {
        return Ok(None);
    }
    let mut blocks = forced_sorted;
    blocks.extend(chosen.iter().map(|&ci| cand_blocks[ci].clone()));
    let design = Design::new(v, blocks, DesignKind::Pbd)?;
    debug_assert!(design.validate().ok);
    Ok(Some(design))
}

fn cover_rec(
    covered: &mut Vec<u64>,
    total_pairs: usize,
    covered_count: usize,
    cand_masks: &[Vec<u64>],
    by_pair: &[Vec<usize>],
    chosen: &mut Vec<usize>,
) -> bool {
    if covered_count == total_pairs {
        return true;
    }
    // fewest-candidates-first over uncovered pairs, lowest index on ties
    let mut best_pair = usize::MAX;
    let mut best_active: Option<Vec<usize>> = None;
    for p in 0..total_pairs {
        if covered[p / 64] >> (p % 64) & 1 == 1 {
            continue;
        }
        let active: Vec<usize> = by_pair[p]
            .iter()
            .copied()
            .filter(|&ci| disjoint(covered, &cand_masks[ci]))
            .collect();
        if active.is_empty() {
            return false;
        }
        if best_active.as_ref().is_none_or(|b| active.len() < b.len()) {
            best_pair = p;
            best_active = Some(active);
            if best_active.as_ref().unwrap().len() == 1 {
                break;
            }
        }
    }
    debug_assert!(best_pair != usize::MAX);
    let active = best_active.unwrap();
    for ci in active {
        let mask = &cand_masks[ci];
        let gained: usize = mask.iter().map(|w| w.count_ones() as usize).sum();
        union_into(covered, mask);
        chosen.push(ci);
        if cover_rec(
            covered,
            total_pairs,
            covered_count + gained,
            cand_masks,
            by_pair,
            chosen,
        ) {
            return true;
        }
        chosen.pop();
        remove_from(covered, mask);
    }
    false
}

const PACKING_RESTARTS: usize = 32;

/// Maximal-under-greedy packing: enumerate every candidate block with size
/// in K, shuffle with a seeded generator, and take blocks greedily whenever
/// all their pairs are still free.  A single pass is maximal because adding
/// a block never frees a pair; the pass is restarted on fresh shuffles and
/// the densest result wins, all driven by one seeded stream.
pub fn greedy_packing(v: usize, k_set: &[usize], seed: u64) -> Result<Design, DesignError> {
    if v == 0 {
        return Err(DesignError::EmptyPointSet);
    }
    let sizes = normalize_sizes(v, k_set)?;
    let mut total: u128 = 0;
    for &k in &sizes {
        total += binomial(v as u128, k as u128).unwrap_or(u128::MAX);
        if total > PACKING_CANDIDATE_GUARD {
            return Err(DesignError::SearchGuard {
                v,
                guard: SEARCH_GUARD_V,
            });
        }
    }
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(total as usize);
    for &k in &sizes {
        for_each_combination(v, k, |combo| {
            candidates.push(combo.to_vec());
            true
        });
    }
    let space = PairSpace::new(v);
    let masks: Vec<Vec<u64>> = candidates.iter().map(|b| space.block_mask(b)).collect();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut best: Vec<usize> = Vec::new();
    for _ in 0..PACKING_RESTARTS {
        order.shuffle(&mut rng);
        let mut covered = vec![0u64; space.words];
        let mut picked = Vec::new();
        for &ci in &order {
            if disjoint(&covered, &masks[ci]) {
                union_into(&mut covered, &masks[ci]);
                picked.push(ci);
            }
        }
        if picked.len() > best.len() {
            best = picked;
        }
    }
    let blocks = best.iter().map(|&ci| candidates[ci].clone()).collect();
    let design = Design::new(v, blocks, DesignKind::Packing)?;
    debug_assert!(design.validate().ok);
    Ok(design)
}
