//! Pairwise balanced designs and packings.
//!
//! A design is a point set {0, .., v-1} together with a list of blocks
//! (point subsets of size >= 2).  A PBD covers every unordered point pair
//! exactly once; a packing covers every pair at most once.  Blocks are
//! stored as sorted index sequences and two designs compare equal when
//! their sorted block multisets agree; no isomorphism testing happens here.
//!
//! Generators cover the catalog the rest of the crate needs: Steiner triple
//! systems via the Bose construction, projective and affine planes over
//! prime fields, exhaustive exact-cover search at desk scale, and seeded
//! greedy packings.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

pub mod search;

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("v must be at least 1")]
    EmptyPointSet,
    #[error("block {index} has fewer than 2 points")]
    BlockTooSmall { index: usize },
    #[error("point {point} out of range for v={v}")]
    OutOfRange { point: usize, v: usize },
    #[error("block {index} repeats point {point}")]
    DuplicatePoint { index: usize, point: usize },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("v={v} exceeds the exhaustive search guard ({guard})")]
    SearchGuard { v: usize, guard: usize },
    #[error("no non-negative block counts solve the pair-count equation for v={v}")]
    PairCountInfeasible { v: usize },
    #[error("forced blocks cover a pair twice")]
    ForcedConflict,
    #[error("block size set is empty or contains k < 2 or k > v")]
    BadSizeSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    Pbd,
    Packing,
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignKind::Pbd => write!(f, "PBD"),
            DesignKind::Packing => write!(f, "PACKING"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Design {
    v: usize,
    blocks: Vec<Vec<usize>>,
    kind: DesignKind,
}

impl Design {
    /// Structural checks only: point ranges, block sizes, duplicates.
    /// Pair-coverage (the lambda condition) is diagnosed by [`validate`],
    /// never enforced here, so invalid designs can be represented and
    /// reported on.
    ///
    /// [`validate`]: Design::validate
    pub fn new(
        v: usize,
        blocks: Vec<Vec<usize>>,
        kind: DesignKind,
    ) -> Result<Self, DesignError> {
        if v == 0 {
            return Err(DesignError::EmptyPointSet);
        }
        let mut sorted = Vec::with_capacity(blocks.len());
        for (index, mut block) in blocks.into_iter().enumerate() {
            if block.len() < 2 {
                return Err(DesignError::BlockTooSmall { index });
            }
            block.sort_unstable();
            for w in block.windows(2) {
                if w[0] == w[1] {
                    return Err(DesignError::DuplicatePoint {
                        index,
                        point: w[0],
                    });
                }
            }
            if let Some(&p) = block.last() {
                if p >= v {
                    return Err(DesignError::OutOfRange { point: p, v });
                }
            }
            sorted.push(block);
        }
        Ok(Design {
            v,
            blocks: sorted,
            kind,
        })
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    /// Diagnose the pair-coverage invariant.  For a PBD every pair must be
    /// covered exactly once and both uncovered and doubly covered pairs are
    /// violations; a packing only forbids double coverage.
    pub fn validate(&self) -> ValidationReport {
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for block in &self.blocks {
            for i in 0..block.len() {
                for j in i + 1..block.len() {
                    *counts.entry((block[i], block[j])).or_insert(0) += 1;
                }
            }
        }
        let mut violations = Vec::new();
        match self.kind {
            DesignKind::Pbd => {
                for a in 0..self.v {
                    for b in a + 1..self.v {
                        let c = counts.get(&(a, b)).copied().unwrap_or(0);
                        if c != 1 {
                            violations.push(PairCoverage {
                                pair: (a, b),
                                count: c,
                            });
                        }
                    }
                }
            }
            DesignKind::Packing => {
                let mut bad: Vec<PairCoverage> = counts
                    .iter()
                    .filter(|&(_, &c)| c > 1)
                    .map(|(&pair, &count)| PairCoverage { pair, count })
                    .collect();
                bad.sort_by_key(|p| p.pair);
                violations = bad;
            }
        }
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    /// Block counts, block-size multiset, per-point replication numbers and
    /// the column total sum |B_1| + ... + |B_n|.
    pub fn stats(&self) -> DesignStats {
        let mut replication = vec![0usize; self.v];
        let mut block_size_counts = BTreeMap::new();
        let mut sum_block_sizes = 0usize;
        for block in &self.blocks {
            *block_size_counts.entry(block.len()).or_insert(0usize) += 1;
            sum_block_sizes += block.len();
            for &p in block {
                replication[p] += 1;
            }
        }
        DesignStats {
            n_blocks: self.blocks.len(),
            block_size_counts,
            replication,
            sum_block_sizes,
        }
    }

    fn canonical_blocks(&self) -> Vec<Vec<usize>> {
        let mut b = self.blocks.clone();
        b.sort();
        b
    }
}

impl PartialEq for Design {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v
            && self.kind == other.kind
            && self.canonical_blocks() == other.canonical_blocks()
    }
}

impl Eq for Design {}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct PairCoverage {
    pub pair: (usize, usize),
    pub count: usize,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<PairCoverage>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DesignStats {
    pub n_blocks: usize,
    pub block_size_counts: BTreeMap<usize, usize>,
    pub replication: Vec<usize>,
    pub sum_block_sizes: usize,
}

impl DesignStats {
    pub fn k_min(&self) -> Option<usize> {
        self.block_size_counts.keys().next().copied()
    }

    pub fn k_max(&self) -> Option<usize> {
        self.block_size_counts.keys().next_back().copied()
    }

    pub fn replication_min(&self) -> Option<usize> {
        self.replication.iter().min().copied()
    }

    pub fn constant_replication(&self) -> Option<usize> {
        let first = *self.replication.first()?;
        self.replication
            .iter()
            .all(|&r| r == first)
            .then_some(first)
    }
}

/// Steiner triple system on v = 6t+3 points by the Bose construction over
/// Z_{2t+1} x {0,1,2}.
pub fn steiner_triple_bose(v: usize) -> Result<Design, DesignError> {
    if v < 3 || v % 6 != 3 {
        return Err(DesignError::InvalidParameter(format!(
            "Bose construction needs v congruent to 3 mod 6, got {v}"
        )));
    }
    let n = v / 3; // odd
    let idx = |i: usize, j: usize| 3 * i + j;
    let half = n.div_ceil(2); // inverse of 2 mod n (n odd)
    let mut blocks = Vec::new();
    for i in 0..n {
        blocks.push(vec![idx(i, 0), idx(i, 1), idx(i, 2)]);
    }
    for i in 0..n {
        for k in i + 1..n {
            let mid = ((i + k) * half) % n;
            for r in 0..3 {
                blocks.push(vec![idx(i, r), idx(k, r), idx(mid, (r + 1) % 3)]);
            }
        }
    }
    Design::new(v, blocks, DesignKind::Pbd)
}

fn require_prime(q: usize) -> Result<(), DesignError> {
    if !crate::unitary::is_prime(q) {
        return Err(DesignError::InvalidParameter(format!(
            "plane generators need a prime order, got {q}"
        )));
    }
    Ok(())
}

/// Projective plane PG(2, q) for prime q: q^2+q+1 points and lines, every
/// line has q+1 points.
pub fn projective_plane(q: usize) -> Result<Design, DesignError> {
    require_prime(q)?;
    let mut reps: Vec<[usize; 3]> = Vec::new();
    for a in 0..q {
        for b in 0..q {
            reps.push([1, a, b]);
        }
    }
    for a in 0..q {
        reps.push([0, 1, a]);
    }
    reps.push([0, 0, 1]);
    let v = reps.len();
    let mut blocks = Vec::with_capacity(v);
    for line in &reps {
        let block: Vec<usize> = reps
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                (line[0] * p[0] + line[1] * p[1] + line[2] * p[2]) % q == 0
            })
            .map(|(i, _)| i)
            .collect();
        blocks.push(block);
    }
    Design::new(v, blocks, DesignKind::Pbd)
}

/// Affine plane AG(2, q) for prime q: q^2 points, q^2+q lines of size q.
pub fn affine_plane(q: usize) -> Result<Design, DesignError> {
    require_prime(q)?;
    let v = q * q;
    let idx = |x: usize, y: usize| x * q + y;
    let mut blocks = Vec::with_capacity(v + q);
    for m in 0..q {
        for b in 0..q {
            blocks.push((0..q).map(|x| idx(x, (m * x + b) % q)).collect());
        }
    }
    for c in 0..q {
        blocks.push((0..q).map(|y| idx(c, y)).collect());
    }
    Design::new(v, blocks, DesignKind::Pbd)
}

/// Parse the `.pbd` text format: header `v <count> <PBD|PACKING>`, then one
/// block of space-separated 0-based point indices per non-empty line.
/// `#` starts a comment.
pub fn parse_design(text: &str) -> Result<Design, DesignError> {
    let mut v: Option<(usize, DesignKind)> = None;
    let mut blocks = Vec::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match v {
            None => {
                if toks.len() != 3 || toks[0] != "v" {
                    return Err(DesignError::Malformed {
                        line: line_no + 1,
                        msg: "expected header `v <count> <PBD|PACKING>`".into(),
                    });
                }
                let count: usize = toks[1].parse().map_err(|_| DesignError::Malformed {
                    line: line_no + 1,
                    msg: format!("bad point count `{}`", toks[1]),
                })?;
                let kind = match toks[2] {
                    "PBD" => DesignKind::Pbd,
                    "PACKING" => DesignKind::Packing,
                    other => {
                        return Err(DesignError::Malformed {
                            line: line_no + 1,
                            msg: format!("unknown design kind `{other}`"),
                        })
                    }
                };
                v = Some((count, kind));
            }
            Some(_) => {
                let mut block = Vec::with_capacity(toks.len());
                for t in toks {
                    let p: usize = t.parse().map_err(|_| DesignError::Malformed {
                        line: line_no + 1,
                        msg: format!("bad point index `{t}`"),
                    })?;
                    block.push(p);
                }
                if block.len() < 2 {
                    return Err(DesignError::Malformed {
                        line: line_no + 1,
                        msg: "a block needs at least 2 points".into(),
                    });
                }
                blocks.push(block);
            }
        }
    }
    let Some((v, kind)) = v else {
        return Err(DesignError::Malformed {
            line: 0,
            msg: "missing header line".into(),
        });
    };
    Design::new(v, blocks, kind)
}

/// Render to the `.pbd` text format with blocks sorted lexicographically.
pub fn format_design(design: &Design) -> String {
    let mut out = format!("v {} {}\n", design.v(), design.kind());
    for block in design.canonical_blocks() {
        let row: Vec<String> = block.iter().map(|p| p.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_design(path: &Path) -> Result<Design, DesignError> {
    parse_design(&fs::read_to_string(path)?)
}

pub fn write_design(design: &Design, path: &Path) -> Result<(), DesignError> {
    Ok(fs::write(path, format_design(design))?)
}
