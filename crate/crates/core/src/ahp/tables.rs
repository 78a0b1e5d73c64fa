//! Published comparison tables, entered exactly as printed (rounding and
//! all). Used as reference inputs and for the recomputed level-1 source.

use super::{Criterion, Level1Matrix};

/// Level-0 matrix for eMBB.
pub fn embb_level0_pcm() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 2.0, 5.0, 10.0],
        vec![0.5, 1.0, 3.0, 5.0],
        vec![0.2, 0.3, 1.0, 2.0],
        vec![0.1, 0.2, 0.5, 1.0],
    ]
}

/// Level-0 matrix for uRLLc.
pub fn urllc_level0_pcm() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 0.5, 0.42, 3.0],
        vec![2.0, 1.0, 0.85, 6.0],
        vec![2.3, 1.16, 1.0, 7.0],
        vec![0.3, 0.16, 0.14, 1.0],
    ]
}

/// Level-0 matrix for mMTC.
pub fn mmtc_level0_pcm() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 0.3, 0.16, 0.1],
        vec![3.0, 1.0, 0.5, 0.3],
        vec![6.0, 2.0, 1.0, 0.6],
        vec![9.0, 3.0, 1.5, 1.0],
    ]
}

/// Rounded eMBB criterion weights as printed.
pub const EMBB_PRINTED_W: [f64; 4] = [0.55, 0.28, 0.10, 0.05];
/// Rounded uRLLc criterion weights as printed.
pub const URLLC_PRINTED_W: [f64; 4] = [0.176, 0.354, 0.412, 0.056];
/// Rounded mMTC criterion weights as printed. The second entry does not
/// follow from the printed matrix (column arithmetic gives about 0.156).
pub const MMTC_PRINTED_W: [f64; 4] = [0.052, 0.121, 0.325, 0.5];

/// Printed level-1 weights, rows LTE/NR/D2D, columns data rate,
/// reliability, latency, jitter.
pub const PRINTED_LEVEL1: Level1Matrix = [
    [0.30, 0.28, 0.149, 0.35],
    [0.30, 0.29, 0.254, 0.16],
    [0.39, 0.42, 0.596, 0.48],
];

/// Printed final scores (LTE, NR, D2D) per slice.
pub const PRINTED_SCORES_EMBB: [f64; 3] = [0.199, 0.41, 0.24];
pub const PRINTED_SCORES_URLLC: [f64; 3] = [0.205, 0.27, 0.470];
pub const PRINTED_SCORES_MMTC: [f64; 3] = [0.262, 0.224, 0.495];

/// Published final scores, indexed like [`Alternative`](super::Alternative).
pub fn printed_scores(slice: super::Slice) -> [f64; 3] {
    match slice {
        super::Slice::Embb => PRINTED_SCORES_EMBB,
        super::Slice::Urllc => PRINTED_SCORES_URLLC,
        super::Slice::Mmtc => PRINTED_SCORES_MMTC,
    }
}

/// Printed level-1 comparison matrix (LTE, NR, D2D) for one criterion.
pub fn level1_pcm(criterion: Criterion) -> Vec<Vec<f64>> {
    match criterion {
        Criterion::DataRate => vec![
            vec![1.0, 0.33, 0.5],
            vec![3.0, 1.0, 2.0],
            vec![2.0, 0.5, 1.0],
        ],
        Criterion::Reliability => vec![
            vec![1.0, 0.5, 0.33],
            vec![0.6, 1.0, 0.5],
            vec![3.0, 2.0, 1.0],
        ],
        Criterion::Latency => vec![
            vec![1.0, 0.5, 0.25],
            vec![2.0, 1.0, 0.3],
            vec![4.0, 2.0, 1.0],
        ],
        Criterion::Jitter => vec![
            vec![1.0, 2.0, 0.75],
            vec![0.5, 1.0, 0.3],
            vec![1.5, 2.5, 1.0],
        ],
    }
}
