//! Two-level analytic hierarchy process.
//!
//! Level 0 compares the four QoS criteria for a slice; level 1 compares the
//! three access alternatives under each criterion. The final score of an
//! alternative is the level-1 weight matrix applied to the level-0 weights.
//! Weights come from the approximate column-normalisation method, not the
//! principal eigenvector.

mod profile;
pub mod tables;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use profile::{AhpData, Level1Source, SliceProfile};

/// Reciprocity tolerance for rounded, hand-entered matrices.
pub const RECIPROCITY_TOLERANCE: f64 = 0.15;
/// Consistency ratios at or above this are flagged.
pub const CR_THRESHOLD: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum AhpError {
    #[error("priority {index} is {value}; priorities must be strictly positive")]
    NonPositivePriority { index: usize, value: f64 },
    #[error("matrix must be square and non-empty, got {rows} rows with a row of length {cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry ({row},{col}) = {value} is not strictly positive and finite")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },
    #[error("diagonal entry ({index},{index}) = {value}, expected 1")]
    Diagonal { index: usize, value: f64 },
    #[error("entries ({row},{col}) and ({col},{row}) are not reciprocal (product {product:.3})")]
    NotReciprocal { row: usize, col: usize, product: f64 },
    #[error("random index is only tabulated for orders 3 and 4, got {0}")]
    UnsupportedOrder(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("level-1 weights for {criterion} sum to {sum:.4}, expected 1 \u{b1} 0.02")]
    Level1Sum { criterion: Criterion, sum: f64 },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("`{key}`: {reason}")]
    BadEntry { key: String, reason: String },
}

/// Level-0 criteria, in the order used for every weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Criterion {
    DataRate,
    Reliability,
    Latency,
    Jitter,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::DataRate,
        Criterion::Reliability,
        Criterion::Latency,
        Criterion::Jitter,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Criterion::DataRate => "data_rate",
            Criterion::Reliability => "reliability",
            Criterion::Latency => "latency",
            Criterion::Jitter => "jitter",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Criterion {
    type Err = AhpError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.key() == s)
            .ok_or_else(|| AhpError::Unknown {
                kind: "criterion",
                name: s.to_string(),
            })
    }
}

/// Level-1 alternatives. `D2d` covers both relayed modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Alternative {
    Lte,
    Nr,
    D2d,
}

impl Alternative {
    /// Also the tie-break order.
    pub const ALL: [Alternative; 3] = [Alternative::Lte, Alternative::Nr, Alternative::D2d];

    pub fn key(self) -> &'static str {
        match self {
            Alternative::Lte => "lte",
            Alternative::Nr => "nr",
            Alternative::D2d => "d2d",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alternative::Lte => "LTE",
            Alternative::Nr => "NR",
            Alternative::D2d => "D2D",
        })
    }
}

impl FromStr for Alternative {
    type Err = AhpError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Alternative::ALL
            .into_iter()
            .find(|a| a.key() == s)
            .ok_or_else(|| AhpError::Unknown {
                kind: "alternative",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slice {
    Embb,
    Urllc,
    Mmtc,
}

impl Slice {
    pub const ALL: [Slice; 3] = [Slice::Embb, Slice::Urllc, Slice::Mmtc];

    pub fn key(self) -> &'static str {
        match self {
            Slice::Embb => "embb",
            Slice::Urllc => "urllc",
            Slice::Mmtc => "mmtc",
        }
    }
}

impl fmt::Display for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Slice {
    type Err = AhpError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        Slice::ALL
            .into_iter()
            .find(|sl| sl.key() == lower)
            .ok_or_else(|| AhpError::Unknown {
                kind: "slice",
                name: s.to_string(),
            })
    }
}

/// Square matrix of pairwise preferences; `x[i][j] > 1` means item `i` is
/// preferred over item `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl ComparisonMatrix {
    /// Validated construction: positive entries, unit diagonal and
    /// approximate reciprocity.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self, AhpError> {
        let m = Self::from_table(rows)?;
        if let Some((row, col, product)) = m.worst_reciprocity() {
            if (product - 1.0).abs() > RECIPROCITY_TOLERANCE {
                return Err(AhpError::NotReciprocal { row, col, product });
            }
        }
        Ok(m)
    }

    /// Accepts a matrix as printed, skipping the reciprocity check. Some of
    /// the published level-1 tables are far from reciprocal; use
    /// [`ComparisonMatrix::reciprocity_error`] to report it.
    pub fn from_table(rows: &[Vec<f64>]) -> Result<Self, AhpError> {
        let n = rows.len();
        if n == 0 {
            return Err(AhpError::NotSquare { rows: 0, cols: 0 });
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(AhpError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (j, &value) in row.iter().enumerate() {
                if !(value.is_finite() && value > 0.0) {
                    return Err(AhpError::NonPositiveEntry { row: i, col: j, value });
                }
                if i == j && (value - 1.0).abs() > 1e-12 {
                    return Err(AhpError::Diagonal { index: i, value });
                }
                entries.push(value);
            }
        }
        Ok(ComparisonMatrix { n, entries })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).sum())
            .collect()
    }

    /// Largest `|x_ij * x_ji - 1|` over the upper triangle.
    pub fn reciprocity_error(&self) -> f64 {
        self.worst_reciprocity()
            .map(|(_, _, p)| (p - 1.0).abs())
            .unwrap_or(0.0)
    }

    fn worst_reciprocity(&self) -> Option<(usize, usize, f64)> {
        let mut worst: Option<(usize, usize, f64)> = None;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let p = self.get(i, j) * self.get(j, i);
                if worst.map_or(true, |(_, _, w)| (p - 1.0).abs() > (w - 1.0).abs()) {
                    worst = Some((i, j, p));
                }
            }
        }
        worst
    }
}

/// Priority weights; non-negative and summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedMatrix {
    n: usize,
    entries: Vec<f64>,
    pub weights: WeightVector,
}

impl NormalizedMatrix {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn order(&self) -> usize {
        self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    pub lambda_max: f64,
    pub ci: f64,
    pub cr: f64,
    pub ri: f64,
    pub consistent: bool,
}

/// Saaty's random index for the orders we support.
pub fn random_index(n: usize) -> Result<f64, AhpError> {
    match n {
        3 => Ok(0.58),
        4 => Ok(0.90),
        _ => Err(AhpError::UnsupportedOrder(n)),
    }
}

/// Exact-ratio comparison matrix, `x_ij = p_i / p_j`.
pub fn build_pcm_from_priorities(priorities: &[f64]) -> Result<ComparisonMatrix, AhpError> {
    if priorities.is_empty() {
        return Err(AhpError::NotSquare { rows: 0, cols: 0 });
    }
    for (index, &value) in priorities.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(AhpError::NonPositivePriority { index, value });
        }
    }
    let n = priorities.len();
    let mut entries = Vec::with_capacity(n * n);
    for &pi in priorities {
        for &pj in priorities {
            entries.push(pi / pj);
        }
    }
    // x_ii = p/p is exactly 1 in IEEE arithmetic.
    Ok(ComparisonMatrix { n, entries })
}

/// Column-normalises the matrix and averages each row into a weight.
pub fn normalize(pcm: &ComparisonMatrix) -> NormalizedMatrix {
    let n = pcm.n;
    let sums = pcm.column_sums();
    let entries: Vec<f64> = (0..n * n).map(|idx| pcm.entries[idx] / sums[idx % n]).collect();
    let weights = (0..n)
        .map(|i| entries[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    NormalizedMatrix {
        n,
        entries,
        weights: WeightVector(weights),
    }
}

/// `lambda_max` is the column-sum row vector dotted with the weights.
pub fn consistency(
    pcm: &ComparisonMatrix,
    weights: &WeightVector,
) -> Result<ConsistencyReport, AhpError> {
    let n = pcm.order();
    if weights.len() != n {
        return Err(AhpError::Dimension(format!(
            "matrix of order {n} with {} weights",
            weights.len()
        )));
    }
    let ri = random_index(n)?;
    let lambda_max: f64 = pcm
        .column_sums()
        .iter()
        .zip(weights.values())
        .map(|(s, w)| s * w)
        .sum();
    let ci = (lambda_max - n as f64) / (n as f64 - 1.0);
    let cr = ci / ri;
    Ok(ConsistencyReport {
        lambda_max,
        ci,
        cr,
        ri,
        consistent: cr < CR_THRESHOLD,
    })
}

/// Level-1 weights: `p[alternative][criterion]`. Each criterion column is a
/// weight vector over the three alternatives.
pub type Level1Matrix = [[f64; 4]; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTable {
    pub scores: [f64; 3],
    pub ranks: [u8; 3],
}

impl RankTable {
    pub fn from_scores(scores: [f64; 3]) -> Self {
        let mut order = [0usize, 1, 2];
        // Stable sort keeps LTE < NR < D2D on ties.
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let mut ranks = [0u8; 3];
        for (pos, &alt) in order.iter().enumerate() {
            ranks[alt] = pos as u8 + 1;
        }
        RankTable { scores, ranks }
    }

    pub fn score(&self, alt: Alternative) -> f64 {
        self.scores[alt.index()]
    }

    pub fn rank(&self, alt: Alternative) -> u8 {
        self.ranks[alt.index()]
    }

    /// Alternatives from rank 1 to rank 3.
    pub fn ordering(&self) -> [Alternative; 3] {
        let mut out = [Alternative::Lte; 3];
        for alt in Alternative::ALL {
            out[self.rank(alt) as usize - 1] = alt;
        }
        out
    }
}

pub fn synthesize_rank(level1: &Level1Matrix, level0: &WeightVector) -> Result<RankTable, AhpError> {
    if level0.len() != Criterion::ALL.len() {
        return Err(AhpError::Dimension(format!(
            "expected {} level-0 weights, got {}",
            Criterion::ALL.len(),
            level0.len()
        )));
    }
    for criterion in Criterion::ALL {
        let sum: f64 = level1.iter().map(|row| row[criterion.index()]).sum();
        if (sum - 1.0).abs() > 0.02 {
            return Err(AhpError::Level1Sum { criterion, sum });
        }
    }
    let mut scores = [0.0; 3];
    for (score, row) in scores.iter_mut().zip(level1) {
        *score = row.iter().zip(level0.values()).map(|(p, w)| p * w).sum();
    }
    Ok(RankTable::from_scores(scores))
}

/// Everything `slice_ranking` computed along the way, for reporting.
#[derive(Debug, Clone)]
pub struct SliceRanking {
    pub slice: Slice,
    pub source: Level1Source,
    pub level0: (ComparisonMatrix, NormalizedMatrix, ConsistencyReport),
    /// Per-criterion level-1 diagnostics; only present when recomputed.
    pub level1: Vec<(Criterion, NormalizedMatrix, ConsistencyReport, f64)>,
    pub level1_weights: Level1Matrix,
    pub rank: RankTable,
    pub warnings: Vec<String>,
}

pub fn slice_ranking(profile: &SliceProfile, data: &AhpData) -> Result<SliceRanking, AhpError> {
    let pcm = build_pcm_from_priorities(&profile.priorities)?;
    let ncm = normalize(&pcm);
    let report = consistency(&pcm, &ncm.weights)?;
    let mut warnings = Vec::new();
    if !report.consistent {
        warnings.push(format!(
            "level-0 matrix for {} has CR {:.4} >= {CR_THRESHOLD}",
            profile.slice, report.cr
        ));
    }

    let mut level1 = Vec::new();
    let level1_weights = match profile.level1_source {
        Level1Source::Printed => data.level1,
        Level1Source::Recomputed => {
            let mut p = [[0.0; 4]; 3];
            for criterion in Criterion::ALL {
                let m = ComparisonMatrix::from_table(&tables::level1_pcm(criterion))?;
                let recip = m.reciprocity_error();
                if recip > RECIPROCITY_TOLERANCE {
                    warnings.push(format!(
                        "level-1 matrix for {criterion} deviates from reciprocity by {recip:.3}"
                    ));
                }
                let n = normalize(&m);
                let r = consistency(&m, &n.weights)?;
                if !r.consistent {
                    warnings.push(format!(
                        "level-1 matrix for {criterion} has CR {:.4} >= {CR_THRESHOLD}",
                        r.cr
                    ));
                }
                for (row, w) in p.iter_mut().zip(n.weights.values()) {
                    row[criterion.index()] = *w;
                }
                level1.push((criterion, n, r, recip));
            }
            p
        }
    };
    let rank = synthesize_rank(&level1_weights, &ncm.weights)?;
    Ok(SliceRanking {
        slice: profile.slice,
        source: profile.level1_source,
        level0: (pcm, ncm, report),
        level1,
        level1_weights,
        rank,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn embb_priorities_give_table_row() {
        let m = build_pcm_from_priorities(&[10.0, 5.0, 2.0, 1.0]).unwrap();
        assert_eq!(
            (0..4).map(|j| m.get(0, j)).collect::<Vec<_>>(),
            vec![1.0, 2.0, 5.0, 10.0]
        );
    }

    #[test]
    fn urllc_priorities_ratio_entries() {
        let m = build_pcm_from_priorities(&[3.0, 6.0, 7.0, 1.0]).unwrap();
        assert_eq!(m.get(0, 1), 0.5);
        assert!(close(m.get(0, 2), 3.0 / 7.0, 1e-15));
        assert!(close(m.get(0, 2), 0.4286, 1e-4));
        assert_eq!(m.get(0, 3), 3.0);
    }

    #[test]
    fn equal_priorities_all_ones() {
        let m = build_pcm_from_priorities(&[1.0, 1.0, 1.0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), 1.0);
            }
        }
        let n = normalize(&m);
        for w in n.weights.values() {
            assert!(close(*w, 1.0 / 3.0, 1e-15));
        }
    }

    #[test]
    fn nonpositive_priority_rejected() {
        assert_eq!(
            build_pcm_from_priorities(&[1.0, 0.0, 2.0]),
            Err(AhpError::NonPositivePriority { index: 1, value: 0.0 })
        );
        assert!(build_pcm_from_priorities(&[1.0, -3.0]).is_err());
    }

    #[test]
    fn exact_ratio_embb_weights() {
        // Hand column-normalisation: every column is p / sum(p).
        let m = build_pcm_from_priorities(&[10.0, 5.0, 2.0, 1.0]).unwrap();
        let n = normalize(&m);
        let expected = [10.0 / 18.0, 5.0 / 18.0, 2.0 / 18.0, 1.0 / 18.0];
        for (w, e) in n.weights.values().iter().zip(expected) {
            assert!(close(*w, e, 1e-12));
        }
        let r = consistency(&m, &n.weights).unwrap();
        assert!(close(r.lambda_max, 4.0, 1e-9));
        assert!(close(r.cr, 0.0, 1e-9));
        assert!(r.consistent);
    }

    #[test]
    fn printed_embb_matrix() {
        let m = ComparisonMatrix::new(&tables::embb_level0_pcm()).unwrap();
        let n = normalize(&m);
        let expected = [0.55, 0.28, 0.10, 0.05];
        for (w, e) in n.weights.values().iter().zip(expected) {
            assert!(close(*w, e, 0.01), "{w} vs {e}");
        }
        // Full-precision weights reproduce the table header value; the
        // rounded printed weights reproduce the value quoted in the text.
        let full = consistency(&m, &n.weights).unwrap();
        assert!(close(full.lambda_max, 3.98, 0.01));
        let printed = consistency(&m, &WeightVector(tables::EMBB_PRINTED_W.to_vec())).unwrap();
        assert!(close(printed.lambda_max, 3.8, 0.05));
        assert!(printed.consistent);
    }

    #[test]
    fn printed_urllc_matrix() {
        let m = ComparisonMatrix::new(&tables::urllc_level0_pcm()).unwrap();
        let n = normalize(&m);
        for (w, e) in n.weights.values().iter().zip([0.176, 0.354, 0.412, 0.056]) {
            assert!(close(*w, e, 0.005), "{w} vs {e}");
        }
        let r = consistency(&m, &n.weights).unwrap();
        assert!(close(r.lambda_max, 3.94, 0.02));
        assert!(close(r.ci, -0.01, 0.01));
    }

    #[test]
    fn unsupported_order() {
        let m = build_pcm_from_priorities(&[1.0, 2.0]).unwrap();
        let n = normalize(&m);
        assert_eq!(consistency(&m, &n.weights), Err(AhpError::UnsupportedOrder(2)));
        let m5 = build_pcm_from_priorities(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(
            consistency(&m5, &normalize(&m5).weights),
            Err(AhpError::UnsupportedOrder(5))
        );
    }

    #[test]
    fn matrix_validation() {
        assert!(matches!(
            ComparisonMatrix::new(&[vec![1.0, 2.0], vec![0.5]]),
            Err(AhpError::NotSquare { .. })
        ));
        assert!(matches!(
            ComparisonMatrix::new(&[vec![2.0, 2.0], vec![0.5, 1.0]]),
            Err(AhpError::Diagonal { .. })
        ));
        assert!(matches!(
            ComparisonMatrix::new(&[vec![1.0, -2.0], vec![0.5, 1.0]]),
            Err(AhpError::NonPositiveEntry { .. })
        ));
        assert!(matches!(
            ComparisonMatrix::new(&[vec![1.0, 2.0], vec![0.9, 1.0]]),
            Err(AhpError::NotReciprocal { .. })
        ));
        // Printed reliability table: 0.5 * 0.6 is far from 1.
        let rel = tables::level1_pcm(Criterion::Reliability);
        assert!(ComparisonMatrix::new(&rel).is_err());
        let m = ComparisonMatrix::from_table(&rel).unwrap();
        assert!(close(m.reciprocity_error(), 0.7, 1e-9));
    }

    #[test]
    fn synthesis_with_printed_level1() {
        let p = tables::PRINTED_LEVEL1;
        let urllc = synthesize_rank(&p, &WeightVector(vec![0.176, 0.354, 0.412, 0.056])).unwrap();
        assert_eq!(urllc.ordering(), [Alternative::D2d, Alternative::Nr, Alternative::Lte]);

        let mmtc_w = normalize(&ComparisonMatrix::new(&tables::mmtc_level0_pcm()).unwrap()).weights;
        let mmtc = synthesize_rank(&p, &mmtc_w).unwrap();
        assert_eq!(mmtc.ordering(), [Alternative::D2d, Alternative::Lte, Alternative::Nr]);

        // Direct matrix-vector product with the printed eMBB weights.
        let embb = synthesize_rank(&p, &WeightVector(tables::EMBB_PRINTED_W.to_vec())).unwrap();
        assert!(close(embb.score(Alternative::Lte), 0.276, 0.001));
        assert!(close(embb.score(Alternative::Nr), 0.280, 0.001));
        assert!(close(embb.score(Alternative::D2d), 0.416, 0.001));
        assert_eq!(embb.rank(Alternative::Lte), 3);
    }

    #[test]
    fn identical_rows_tie_break() {
        let row = [1.0 / 3.0; 4];
        let r = synthesize_rank(&[row, row, row], &WeightVector(vec![0.25; 4])).unwrap();
        assert_eq!(r.ranks, [1, 2, 3]);
    }

    #[test]
    fn synthesis_errors() {
        assert!(matches!(
            synthesize_rank(&tables::PRINTED_LEVEL1, &WeightVector(vec![0.5, 0.5])),
            Err(AhpError::Dimension(_))
        ));
        let mut bad = tables::PRINTED_LEVEL1;
        bad[0][0] = 0.9;
        assert!(matches!(
            synthesize_rank(&bad, &WeightVector(vec![0.25; 4])),
            Err(AhpError::Level1Sum { criterion: Criterion::DataRate, .. })
        ));
    }

    #[test]
    fn slice_rankings() {
        let data = AhpData::default();
        for source in [Level1Source::Printed, Level1Source::Recomputed] {
            let embb = slice_ranking(&data.profile(Slice::Embb, source), &data).unwrap();
            assert_eq!(embb.rank.rank(Alternative::Lte), 3, "{source:?}");
            let mmtc = slice_ranking(&data.profile(Slice::Mmtc, source), &data).unwrap();
            assert_eq!(mmtc.rank.rank(Alternative::D2d), 1, "{source:?}");
        }
        let urllc = slice_ranking(&data.profile(Slice::Urllc, Level1Source::Printed), &data).unwrap();
        assert_eq!(urllc.rank.rank(Alternative::D2d), 1);
        assert!(urllc.warnings.is_empty());

        let rec = slice_ranking(&data.profile(Slice::Embb, Level1Source::Recomputed), &data).unwrap();
        assert_eq!(rec.level1.len(), 4);
        assert!(rec.warnings.iter().any(|w| w.contains("reciprocity")));
    }
}
