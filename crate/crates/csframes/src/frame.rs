//! Measurement frames built from block designs.
//!
//! The incidence-splice constructions: transpose the design's incidence
//! matrix (rows = blocks, columns = points), then expand each point column
//! into a group of columns by replacing its incidence 1s with distinct rows
//! of a unimodular Hadamard matrix scaled to unit column norm.  Columns of
//! a frame are labelled (point, basis, sub) and the row order follows the
//! design's block order; points ascend, then basis index, then Hadamard
//! column, so exports are reproducible.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;
use thiserror::Error;

use crate::design::{Design, DesignKind};
use crate::unitary::{self, ComplexMatrix, UnitaryError};

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("design does not satisfy its pair-coverage invariant")]
    InvalidDesign,
    #[error("point {0} lies in no block (zero replication)")]
    ZeroReplication(usize),
    #[error("hadamard policy cannot supply order {order}: {source}")]
    Policy {
        order: usize,
        source: UnitaryError,
    },
    #[error("replication numbers are not constant (found {0} and {1})")]
    NonConstantReplication(usize, usize),
    #[error("constant replication {0} is not prime; no MUB family available")]
    NonprimeReplication(usize),
    #[error("basis count {e} out of range 1..={max}")]
    MubIndexOutOfRange { e: usize, max: usize },
    #[error("row {0} is zero; cannot normalize")]
    ZeroRow(usize),
    #[error("normalization target must be positive, got {0}")]
    BadScale(f64),
    #[error("construction {0} requires a PBD")]
    RequiresPbd(&'static str),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed frame file: {0}")]
    MalformedFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HadamardPolicy {
    /// Character-table (DFT) matrix of the required order.
    Dft,
    /// Real Sylvester matrix; the order must be a power of two.
    Sylvester,
    /// Sylvester when the order is a power of two, DFT otherwise.
    Auto,
}

impl HadamardPolicy {
    fn supply(&self, order: usize) -> Result<ComplexMatrix, FrameError> {
        let build = |r| -> Result<ComplexMatrix, FrameError> {
            unitary::dft_matrix(r).map_err(|source| FrameError::Policy { order: r, source })
        };
        match self {
            HadamardPolicy::Dft => build(order),
            HadamardPolicy::Sylvester => unitary::sylvester(order)
                .map_err(|source| FrameError::Policy { order, source }),
            HadamardPolicy::Auto => {
                if order.is_power_of_two() {
                    unitary::sylvester(order)
                        .map_err(|source| FrameError::Policy { order, source })
                } else {
                    build(order)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstructionTag {
    #[serde(rename = "CON0")]
    Con0,
    #[serde(rename = "CON1")]
    Con1,
    #[serde(rename = "MUB_EXT")]
    MubExt,
    #[serde(rename = "CUSTOM")]
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnLabel {
    pub point: usize,
    pub basis: usize,
    pub sub: usize,
}

/// Dense complex n x N frame with per-column provenance labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<Complex64>, // row-major
    labels: Vec<ColumnLabel>,
    tag: ConstructionTag,
}

impl FrameMatrix {
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        entries: Vec<Complex64>,
        labels: Vec<ColumnLabel>,
        tag: ConstructionTag,
    ) -> Self {
        assert_eq!(entries.len(), n_rows * n_cols);
        assert_eq!(labels.len(), n_cols);
        FrameMatrix {
            n_rows,
            n_cols,
            entries,
            labels,
            tag,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.n_cols + c]
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.entries[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn labels(&self) -> &[ColumnLabel] {
        &self.labels
    }

    pub fn tag(&self) -> ConstructionTag {
        self.tag
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.n_rows).map(|r| self.get(r, c)).collect()
    }

    pub fn column_norm(&self, c: usize) -> f64 {
        (0..self.n_rows)
            .map(|r| self.get(r, c).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// Row Gram matrix, frame * frame^dagger (n x n).
    pub fn gram_rows(&self) -> ComplexMatrix {
        let n = self.n_rows;
        let mut g = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut sum = Complex64::new(0.0, 0.0);
                for c in 0..self.n_cols {
                    sum += self.get(i, c) * self.get(j, c).conj();
                }
                g.set(i, j, sum);
            }
        }
        g
    }

    /// y = frame * x.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|r| {
                let row = self.row(r);
                row.iter().zip(x).map(|(a, xi)| a * xi).sum()
            })
            .collect()
    }

    /// z = frame^dagger * w.
    pub fn apply_adjoint(&self, w: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(w.len(), self.n_rows);
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_cols];
        for r in 0..self.n_rows {
            let wr = w[r];
            if wr == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * wr;
            }
        }
        out
    }

    /// Gather the n x |cols| submatrix of the given columns.
    pub(crate) fn submatrix(&self, cols: &[usize]) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n_rows, cols.len(), |r, j| self.get(r, cols[j]))
    }
}

struct Incidence {
    replication: Vec<usize>,
    /// blocks containing each point, in design block order
    incident: Vec<Vec<usize>>,
}

fn incidence(design: &Design) -> Incidence {
    let mut incident = vec![Vec::new(); design.v()];
    for (bi, block) in design.blocks().iter().enumerate() {
        for &p in block {
            incident[p].push(bi);
        }
    }
    let replication = incident.iter().map(|v| v.len()).collect();
    Incidence {
        replication,
        incident,
    }
}

fn checked(design: &Design) -> Result<Incidence, FrameError> {
    if !design.validate().ok {
        return Err(FrameError::InvalidDesign);
    }
    let inc = incidence(design);
    if let Some(p) = inc.replication.iter().position(|&r| r == 0) {
        return Err(FrameError::ZeroReplication(p));
    }
    Ok(inc)
}

/// Incidence splice: each 1 in point column x becomes a distinct row of
/// (1/sqrt(r_x)) H_x, giving r_x unit-norm columns per point.  Accepts PBDs
/// and packings.
pub fn build_con0(design: &Design, policy: HadamardPolicy) -> Result<FrameMatrix, FrameError> {
    let inc = checked(design)?;
    let n = design.blocks().len();
    let n_cols: usize = inc.replication.iter().sum();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n_cols];
    let mut labels = Vec::with_capacity(n_cols);
    let mut col = 0;
    for x in 0..design.v() {
        let r = inc.replication[x];
        let h = policy.supply(r)?;
        let scale = 1.0 / (r as f64).sqrt();
        for c in 0..r {
            for (slot, &bi) in inc.incident[x].iter().enumerate() {
                entries[bi * n_cols + col] = h.get(slot, c) * scale;
            }
            labels.push(ColumnLabel {
                point: x,
                basis: 0,
                sub: c,
            });
            col += 1;
        }
    }
    Ok(FrameMatrix::from_parts(
        n,
        n_cols,
        entries,
        labels,
        ConstructionTag::Con0,
    ))
}

/// Variant splice with matrices of order r_x + 1 whose first row is
/// constant: each incidence 1 becomes a distinct non-initial row of
/// (1/sqrt(r_x+1)) H_x and every point contributes r_x + 1 columns of
/// squared norm r_x / (r_x + 1).
pub fn build_con1(design: &Design, policy: HadamardPolicy) -> Result<FrameMatrix, FrameError> {
    if design.kind() != DesignKind::Pbd {
        return Err(FrameError::RequiresPbd("con1"));
    }
    let inc = checked(design)?;
    let n = design.blocks().len();
    let n_cols: usize = inc.replication.iter().map(|r| r + 1).sum();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n_cols];
    let mut labels = Vec::with_capacity(n_cols);
    let mut col = 0;
    for x in 0..design.v() {
        let r = inc.replication[x];
        let h = policy.supply(r + 1)?;
        let scale = 1.0 / ((r + 1) as f64).sqrt();
        for c in 0..r + 1 {
            for (slot, &bi) in inc.incident[x].iter().enumerate() {
                // rows 1..=r of h; row 0 is the constant row
                entries[bi * n_cols + col] = h.get(slot + 1, c) * scale;
            }
            labels.push(ColumnLabel {
                point: x,
                basis: 0,
                sub: c,
            });
            col += 1;
        }
    }
    Ok(FrameMatrix::from_parts(
        n,
        n_cols,
        entries,
        labels,
        ConstructionTag::Con1,
    ))
}

/// Concatenation of e incidence-splice frames, one per non-identity member
/// of the MUB family of the (constant, prime) replication number.  Each
/// basis M_i is used at unimodular scale sqrt(r) * M_i, so after the
/// 1/sqrt(r) column scaling the frame entries are exactly the entries of
/// M_i and columns keep unit norm.
pub fn build_mub_extended(design: &Design, e: usize) -> Result<FrameMatrix, FrameError> {
    if design.kind() != DesignKind::Pbd {
        return Err(FrameError::RequiresPbd("mub extension"));
    }
    let inc = checked(design)?;
    let r = inc.replication[0];
    if let Some(&other) = inc.replication.iter().find(|&&x| x != r) {
        return Err(FrameError::NonConstantReplication(r, other));
    }
    if !unitary::is_prime(r) {
        return Err(FrameError::NonprimeReplication(r));
    }
    let bases = unitary::mub_family(r).expect("primality checked");
    let max = bases.len() - 1;
    if e == 0 || e > max {
        return Err(FrameError::MubIndexOutOfRange { e, max });
    }
    let n = design.blocks().len();
    let n_cols = e * r * design.v();
    let mut entries = vec![Complex64::new(0.0, 0.0); n * n_cols];
    let mut labels = Vec::with_capacity(n_cols);
    let mut col = 0;
    for x in 0..design.v() {
        for basis in 1..=e {
            let m = &bases[basis];
            for c in 0..r {
                for (slot, &bi) in inc.incident[x].iter().enumerate() {
                    entries[bi * n_cols + col] = m.get(slot, c);
                }
                labels.push(ColumnLabel {
                    point: x,
                    basis,
                    sub: c,
                });
                col += 1;
            }
        }
    }
    Ok(FrameMatrix::from_parts(
        n,
        n_cols,
        entries,
        labels,
        ConstructionTag::MubExt,
    ))
}

/// Rescale every row to l2 norm `c`.
pub fn normalize_rows(frame: &FrameMatrix, c: f64) -> Result<FrameMatrix, FrameError> {
    if !c.is_finite() || c <= 0.0 {
        return Err(FrameError::BadScale(c));
    }
    let mut entries = frame.entries.clone();
    for r in 0..frame.n_rows {
        let norm = frame
            .row(r)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            return Err(FrameError::ZeroRow(r));
        }
        let s = c / norm;
        for e in &mut entries[r * frame.n_cols..(r + 1) * frame.n_cols] {
            *e *= s;
        }
    }
    Ok(FrameMatrix {
        n_rows: frame.n_rows,
        n_cols: frame.n_cols,
        entries,
        labels: frame.labels.clone(),
        tag: frame.tag,
    })
}

/// On-disk frame format ("FMF"): a JSON object with the dimensions, tag,
/// column labels, and row-major entry arrays split into real and imaginary
/// parts.  serde_json prints shortest round-trip decimals, so write/read
/// is bit-exact.
#[derive(Serialize, Deserialize)]
struct FmfFile {
    n: usize,
    #[serde(rename = "N")]
    n_cols: usize,
    tag: ConstructionTag,
    labels: Vec<(usize, usize, usize)>,
    re: Vec<f64>,
    im: Vec<f64>,
}

pub fn to_fmf_json(frame: &FrameMatrix) -> String {
    let file = FmfFile {
        n: frame.n_rows,
        n_cols: frame.n_cols,
        tag: frame.tag,
        labels: frame
            .labels
            .iter()
            .map(|l| (l.point, l.basis, l.sub))
            .collect(),
        re: frame.entries.iter().map(|z| z.re).collect(),
        im: frame.entries.iter().map(|z| z.im).collect(),
    };
    serde_json::to_string(&file).expect("frame serialization cannot fail")
}

pub fn from_fmf_json(text: &str) -> Result<FrameMatrix, FrameError> {
    let file: FmfFile =
        serde_json::from_str(text).map_err(|e| FrameError::MalformedFile(e.to_string()))?;
    let len = file.n * file.n_cols;
    if file.re.len() != len || file.im.len() != len {
        return Err(FrameError::MalformedFile(format!(
            "entry arrays have length {}/{}, expected {len}",
            file.re.len(),
            file.im.len()
        )));
    }
    if file.labels.len() != file.n_cols {
        return Err(FrameError::MalformedFile(format!(
            "{} labels for {} columns",
            file.labels.len(),
            file.n_cols
        )));
    }
    let entries = file
        .re
        .iter()
        .zip(&file.im)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    let labels = file
        .labels
        .iter()
        .map(|&(point, basis, sub)| ColumnLabel { point, basis, sub })
        .collect();
    Ok(FrameMatrix::from_parts(
        file.n,
        file.n_cols,
        entries,
        labels,
        file.tag,
    ))
}

pub fn write_frame(frame: &FrameMatrix, path: &Path) -> Result<(), FrameError> {
    Ok(fs::write(path, to_fmf_json(frame))?)
}

pub fn read_frame(path: &Path) -> Result<FrameMatrix, FrameError> {
    from_fmf_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design;
    use crate::tol;

    fn fano() -> Design {
        design::projective_plane(2).unwrap()
    }

    fn inner(frame: &FrameMatrix, i: usize, j: usize) -> Complex64 {
        (0..frame.n_rows())
            .map(|r| frame.get(r, i).conj() * frame.get(r, j))
            .sum()
    }

    #[test]
    fn con0_fano_shape_and_entries() {
        let f = build_con0(&fano(), HadamardPolicy::Dft).unwrap();
        assert_eq!((f.n_rows(), f.n_cols()), (7, 21));
        let third = 1.0 / 3f64.sqrt();
        for r in 0..7 {
            for c in 0..21 {
                let m = f.get(r, c).norm();
                assert!(
                    m == 0.0 || (m - third).abs() < 1e-14,
                    "entry ({r},{c}) has modulus {m}"
                );
            }
        }
        for c in 0..21 {
            assert!((f.column_norm(c) - 1.0).abs() < tol::EXACT_REL);
        }
    }

    #[test]
    fn con0_column_group_structure() {
        // columns of the same point are orthogonal; columns of distinct
        // points overlap in exactly one row (the unique common block)
        let f = build_con0(&fano(), HadamardPolicy::Dft).unwrap();
        for i in 0..f.n_cols() {
            for j in i + 1..f.n_cols() {
                let ip = inner(&f, i, j).norm();
                if f.labels()[i].point == f.labels()[j].point {
                    assert!(ip < 1e-14, "same-point pair ({i},{j}): {ip}");
                } else {
                    assert!((ip - 1.0 / 3.0).abs() < tol::EXACT_REL);
                }
            }
        }
    }

    #[test]
    fn con0_nonzero_rows_match_blocks() {
        let d = fano();
        let f = build_con0(&d, HadamardPolicy::Dft).unwrap();
        for (c, label) in f.labels().iter().enumerate() {
            let nonzero_rows: Vec<usize> = (0..f.n_rows())
                .filter(|&r| f.get(r, c).norm() > 0.0)
                .collect();
            let expect: Vec<usize> = d
                .blocks()
                .iter()
                .enumerate()
                .filter(|(_, b)| b.contains(&label.point))
                .map(|(i, _)| i)
                .collect();
            assert_eq!(nonzero_rows, expect);
        }
    }

    #[test]
    fn con0_single_block_is_all_ones() {
        let d = Design::new(3, vec![vec![0, 1, 2]], DesignKind::Pbd).unwrap();
        let f = build_con0(&d, HadamardPolicy::Dft).unwrap();
        assert_eq!((f.n_rows(), f.n_cols()), (1, 3));
        for c in 0..3 {
            assert_eq!(f.get(0, c), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn con0_ag23_sylvester_is_real_half_valued() {
        let d = design::affine_plane(3).unwrap();
        let f = build_con0(&d, HadamardPolicy::Sylvester).unwrap();
        assert_eq!((f.n_rows(), f.n_cols()), (12, 36));
        assert!(f.is_real());
        for r in 0..12 {
            for c in 0..36 {
                let e = f.get(r, c).re;
                assert!(e == 0.0 || e == 0.5 || e == -0.5);
            }
        }
    }

    #[test]
    fn con0_auto_policy_matches_power_of_two() {
        let d = design::affine_plane(3).unwrap(); // r = 4
        let auto = build_con0(&d, HadamardPolicy::Auto).unwrap();
        let syl = build_con0(&d, HadamardPolicy::Sylvester).unwrap();
        assert_eq!(auto, syl);
    }

    #[test]
    fn con0_rejects_invalid_design() {
        let broken = Design::new(4, vec![vec![0, 1], vec![0, 1, 2]], DesignKind::Pbd).unwrap();
        assert!(matches!(
            build_con0(&broken, HadamardPolicy::Dft),
            Err(FrameError::InvalidDesign)
        ));
    }

    #[test]
    fn con1_fano_sylvester() {
        let f = build_con1(&fano(), HadamardPolicy::Sylvester).unwrap();
        assert_eq!((f.n_rows(), f.n_cols()), (7, 28));
        for c in 0..28 {
            let norm2 = f.column_norm(c).powi(2);
            assert!((norm2 - 0.75).abs() < tol::EXACT_REL);
        }
    }

    #[test]
    fn con1_single_block() {
        let d = Design::new(3, vec![vec![0, 1, 2]], DesignKind::Pbd).unwrap();
        let f = build_con1(&d, HadamardPolicy::Auto).unwrap();
        assert_eq!((f.n_rows(), f.n_cols()), (1, 6));
        let s = 1.0 / 2f64.sqrt();
        for c in 0..6 {
            let e = f.get(0, c);
            assert!(e.im == 0.0 && (e.re - s).abs() < 1e-15 || (e.re + s).abs() < 1e-15);
        }
    }

    #[test]
    fn con1_ag23_dft_shape() {
        let d = design::affine_plane(3).unwrap(); // r = 4, order 5 DFT
        let f = build_con1(&d, HadamardPolicy::Dft).unwrap();
        assert_eq!((f.n_rows(), f.n_cols()), (12, 45));
    }

    #[test]
    fn con1_sylvester_needs_power_of_two() {
        let d = design::affine_plane(3).unwrap(); // r + 1 = 5
        assert!(matches!(
            build_con1(&d, HadamardPolicy::Sylvester),
            Err(FrameError::Policy { order: 5, .. })
        ));
    }

    #[test]
    fn mub_extension_shapes_and_errors() {
        let f = build_mub_extended(&fano(), 3).unwrap();
        assert_eq!((f.n_rows(), f.n_cols()), (7, 63));
        assert_eq!(f.tag(), ConstructionTag::MubExt);

        let ag = design::affine_plane(3).unwrap(); // r = 4 is not prime
        assert!(matches!(
            build_mub_extended(&ag, 1),
            Err(FrameError::NonprimeReplication(4))
        ));
        assert!(matches!(
            build_mub_extended(&fano(), 4),
            Err(FrameError::MubIndexOutOfRange { e: 4, max: 3 })
        ));
        assert!(matches!(
            build_mub_extended(&fano(), 0),
            Err(FrameError::MubIndexOutOfRange { e: 0, .. })
        ));
    }

    #[test]
    fn mub_extension_rejects_mixed_replication() {
        let d = design::search::pbd_exact_cover(11, &[3, 5], &[vec![0, 1, 2, 3, 4]])
            .unwrap()
            .unwrap();
        assert!(matches!(
            build_mub_extended(&d, 1),
            Err(FrameError::NonConstantReplication(_, _))
        ));
    }

    #[test]
    fn normalize_rows_unit_gram() {
        let f = build_con0(&fano(), HadamardPolicy::Dft).unwrap();
        let g = normalize_rows(&f, 1.0).unwrap();
        let gram = g.gram_rows();
        let id = ComplexMatrix::identity(7);
        assert!(gram.max_abs_diff(&id) < 1e-12);
        // normalizing twice is a fixed point
        let g2 = normalize_rows(&g, 1.0).unwrap();
        assert!(g
            .entries
            .iter()
            .zip(&g2.entries)
            .all(|(a, b)| (a - b).norm() < 1e-15));
        // scaling to c = 2 scales the Gram by 4
        let g4 = normalize_rows(&f, 2.0).unwrap().gram_rows();
        let mut four_id = ComplexMatrix::zeros(7, 7);
        for i in 0..7 {
            four_id.set(i, i, Complex64::new(4.0, 0.0));
        }
        assert!(g4.max_abs_diff(&four_id) < 1e-12);
    }

    #[test]
    fn normalize_rejects_bad_scale() {
        let f = build_con0(&fano(), HadamardPolicy::Dft).unwrap();
        assert!(matches!(
            normalize_rows(&f, 0.0),
            Err(FrameError::BadScale(_))
        ));
    }

    #[test]
    fn fmf_round_trip_is_bit_exact() {
        let f = build_con0(&design::steiner_triple_bose(9).unwrap(), HadamardPolicy::Dft)
            .unwrap();
        let text = to_fmf_json(&f);
        let back = from_fmf_json(&text).unwrap();
        assert_eq!(f.labels(), back.labels());
        assert_eq!(f.tag(), back.tag());
        for (a, b) in f.entries.iter().zip(&back.entries) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        // and the decimal form itself is stable
        assert_eq!(text, to_fmf_json(&back));
    }

    #[test]
    fn fmf_rejects_inconsistent_lengths() {
        let f = build_con0(&fano(), HadamardPolicy::Dft).unwrap();
        let mut text = to_fmf_json(&f);
        text = text.replacen("\"n\":7", "\"n\":8", 1);
        assert!(matches!(
            from_fmf_json(&text),
            Err(FrameError::MalformedFile(_))
        ));
    }

    #[test]
    fn packing_frame_bounded_overlap() {
        let d = design::search::greedy_packing(13, &[4], 5).unwrap();
        let f = build_con0(&d, HadamardPolicy::Auto);
        // greedy packings can leave a point uncovered; both outcomes are fine,
        // but a built frame must keep the <=1 shared row property
        if let Ok(f) = f {
            let stats = d.stats();
            for i in 0..f.n_cols() {
                for j in i + 1..f.n_cols() {
                    let (pi, pj) = (f.labels()[i].point, f.labels()[j].point);
                    if pi == pj {
                        continue;
                    }
                    let bound = 1.0
                        / ((stats.replication[pi] * stats.replication[pj]) as f64).sqrt();
                    assert!(inner(&f, i, j).norm() <= bound + 1e-12);
                }
            }
        }
    }
}
