//! Mode selectors: the AHP x sigmoid(RSRP) selector and three baselines.
//!
//! Selectors are pure functions of a candidate list and a per-UE
//! [`SelectionState`]. A handover is any change of attachment: the serving
//! node for direct modes, the relay UE for relayed modes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ahp::{Alternative, RankTable};
use crate::radio::RatKind;

pub type NodeId = usize;
pub type UeId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum SelectError {
    #[error("no candidate links")]
    NoCandidates,
    #[error("unknown selector `{0}`")]
    UnknownSelector(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    LteDirect,
    NrDirect,
    LteViaD2d,
    NrViaD2d,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::LteDirect, Mode::NrDirect, Mode::LteViaD2d, Mode::NrViaD2d];

    pub fn option(self) -> Alternative {
        match self {
            Mode::LteDirect => Alternative::Lte,
            Mode::NrDirect => Alternative::Nr,
            Mode::LteViaD2d | Mode::NrViaD2d => Alternative::D2d,
        }
    }

    pub fn is_relayed(self) -> bool {
        matches!(self, Mode::LteViaD2d | Mode::NrViaD2d)
    }

    /// Technology of the infrastructure hop.
    pub fn infra_rat(self) -> RatKind {
        match self {
            Mode::LteDirect | Mode::LteViaD2d => RatKind::Lte,
            Mode::NrDirect | Mode::NrViaD2d => RatKind::Nr,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Mode::LteDirect => "lte_direct",
            Mode::NrDirect => "nr_direct",
            Mode::LteViaD2d => "lte_via_d2d",
            Mode::NrViaD2d => "nr_via_d2d",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attachment {
    Node(NodeId),
    Relay(UeId),
}

impl fmt::Display for Attachment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attachment::Node(n) => write!(f, "node{n}"),
            Attachment::Relay(u) => write!(f, "ue{u}"),
        }
    }
}

/// Predicted quality of one hop or of a whole candidate path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkQuality {
    pub rsrp_dbm: f64,
    pub snr_db: f64,
    pub throughput_bps: f64,
    pub ber: f64,
}

impl LinkQuality {
    /// Bottleneck combination of two hops.
    pub fn chain(a: &LinkQuality, b: &LinkQuality) -> LinkQuality {
        LinkQuality {
            rsrp_dbm: a.rsrp_dbm.min(b.rsrp_dbm),
            snr_db: a.snr_db.min(b.snr_db),
            throughput_bps: a.throughput_bps.min(b.throughput_bps),
            ber: 1.0 - (1.0 - a.ber) * (1.0 - b.ber),
        }
    }
}

/// A UE's link to one base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfraLink {
    pub node: NodeId,
    pub rat: RatKind,
    pub quality: LinkQuality,
}

/// A potential relay and the D2D hop to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub ue: UeId,
    pub distance_m: f64,
    pub d2d: LinkQuality,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub mode: Mode,
    /// Base station carrying the traffic (the relay's node when relayed).
    pub node: NodeId,
    pub relay: Option<UeId>,
    /// End-to-end quality; RSRP, SNR and throughput are hop minima.
    pub quality: LinkQuality,
}

impl Candidate {
    pub fn attachment(&self) -> Attachment {
        match self.relay {
            Some(r) => Attachment::Relay(r),
            None => Attachment::Node(self.node),
        }
    }

    pub fn rsrp_dbm(&self) -> f64 {
        self.quality.rsrp_dbm
    }
}

fn strongest(links: &[InfraLink], rat: RatKind) -> Option<&InfraLink> {
    links
        .iter()
        .filter(|l| l.rat == rat)
        .fold(None, |best: Option<&InfraLink>, l| match best {
            Some(b) if b.quality.rsrp_dbm >= l.quality.rsrp_dbm => Some(b),
            _ => Some(l),
        })
}

/// Candidate links for one UE.
///
/// `own` lists the UE's links to every base station, `infra_of(u)` gives the
/// same for another UE, and `neighbors` the D2D hops (filtered here to
/// `max_d2d_m`). One direct candidate per RAT uses the strongest node; each
/// relayed mode keeps the relay with the best bottleneck RSRP. `keep` adds
/// the currently serving attachment back when it was not the best, so a
/// selector can decide to stay.
pub fn enumerate_candidates<'a>(
    own: &[InfraLink],
    neighbors: &[Neighbor],
    infra_of: impl Fn(UeId) -> &'a [InfraLink],
    max_d2d_m: f64,
    keep: Option<(Mode, Attachment)>,
) -> Vec<Candidate> {
    let mut out = Vec::with_capacity(5);
    for mode in [Mode::LteDirect, Mode::NrDirect] {
        if let Some(l) = strongest(own, mode.infra_rat()) {
            out.push(Candidate { mode, node: l.node, relay: None, quality: l.quality });
        }
    }
    let relayed = |mode: Mode, nb: &Neighbor| -> Option<Candidate> {
        if !(nb.distance_m <= max_d2d_m) {
            return None;
        }
        let hop2 = strongest(infra_of(nb.ue), mode.infra_rat())?;
        Some(Candidate {
            mode,
            node: hop2.node,
            relay: Some(nb.ue),
            quality: LinkQuality::chain(&nb.d2d, &hop2.quality),
        })
    };
    for mode in [Mode::LteViaD2d, Mode::NrViaD2d] {
        let best = neighbors
            .iter()
            .filter_map(|nb| relayed(mode, nb))
            .fold(None, |best: Option<Candidate>, c| match best {
                Some(b) if b.rsrp_dbm() >= c.rsrp_dbm() => Some(b),
                _ => Some(c),
            });
        out.extend(best);
    }
    if let Some((mode, att)) = keep {
        if !out.iter().any(|c| c.mode == mode && c.attachment() == att) {
            let extra = match att {
                Attachment::Node(node) if !mode.is_relayed() => own
                    .iter()
                    .find(|l| l.node == node && l.rat == mode.infra_rat())
                    .map(|l| Candidate { mode, node, relay: None, quality: l.quality }),
                Attachment::Relay(r) if mode.is_relayed() => neighbors
                    .iter()
                    .find(|nb| nb.ue == r)
                    .and_then(|nb| relayed(mode, nb)),
                _ => None,
            };
            out.extend(extra);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SelectorKind {
    Proposed,
    RsrpMax,
    SdnJoint,
    Jmsra,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 4] = [
        SelectorKind::Proposed,
        SelectorKind::RsrpMax,
        SelectorKind::SdnJoint,
        SelectorKind::Jmsra,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SelectorKind::Proposed => "proposed",
            SelectorKind::RsrpMax => "rsrp_max",
            SelectorKind::SdnJoint => "sdn_joint",
            SelectorKind::Jmsra => "jmsra",
        }
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SelectorKind {
    type Err = SelectError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        SelectorKind::ALL
            .into_iter()
            .find(|k| k.key() == norm)
            .ok_or_else(|| SelectError::UnknownSelector(s.to_string()))
    }
}

/// Thresholds for all selectors (`select.*` config keys).
#[derive(Debug, Clone, PartialEq)]
pub struct SelectParams {
    pub hysteresis_db: f64,
    pub sigmoid_center_dbm: f64,
    pub sigmoid_scale_db: f64,
    pub sdn_hom_cqi: u32,
    pub sdn_ttt_steps: u32,
    pub jmsra_ber_threshold: f64,
    pub jmsra_rate_min_bps: f64,
}

impl Default for SelectParams {
    fn default() -> Self {
        SelectParams {
            hysteresis_db: 0.6,
            sigmoid_center_dbm: -90.0,
            sigmoid_scale_db: 10.0,
            sdn_hom_cqi: 1,
            sdn_ttt_steps: 3,
            jmsra_ber_threshold: 1e-3,
            jmsra_rate_min_bps: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Serving {
    pub mode: Mode,
    pub attachment: Attachment,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelectionState {
    pub current: Option<Serving>,
    /// Consecutive steps the SDN handover condition has held per target.
    pub ttt: BTreeMap<Attachment, u32>,
}

impl SelectionState {
    fn commit(&mut self, chosen: &Candidate) -> bool {
        let att = chosen.attachment();
        let handover = self.current.is_some_and(|s| s.attachment != att);
        if self.current.map(|s| s.attachment) != Some(att) {
            self.ttt.clear();
        }
        self.current = Some(Serving { mode: chosen.mode, attachment: att });
        handover
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeDecision {
    pub chosen: Candidate,
    /// The selector's own figure of merit for the chosen candidate.
    pub combined_score: f64,
    pub handover: bool,
}

/// Logistic of the affinely rescaled RSRP.
pub fn sigmoid_norm(rsrp_dbm: f64, center_dbm: f64, scale_db: f64) -> f64 {
    1.0 / (1.0 + (-(rsrp_dbm - center_dbm) / scale_db).exp())
}

/// CQI 0..15 from SNR over the -6..22 dB range.
pub fn cqi(snr_db: f64) -> u32 {
    (15.0 * (snr_db + 6.0) / 28.0).round().clamp(0.0, 15.0) as u32
}

/// Index of the best score; ties go to the earlier mode, then earlier
/// position.
fn argmax(candidates: &[Candidate], scores: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..candidates.len() {
        let (s, b) = (scores[i], scores[best]);
        if s > b || (s == b && candidates[i].mode < candidates[best].mode) {
            best = i;
        }
    }
    best
}

/// The candidate matching the serving attachment, preferring the same mode.
fn serving_index(candidates: &[Candidate], scores: &[f64], serving: &Serving) -> Option<usize> {
    let same: Vec<usize> = (0..candidates.len())
        .filter(|&i| candidates[i].attachment() == serving.attachment)
        .collect();
    same.iter()
        .copied()
        .find(|&i| candidates[i].mode == serving.mode)
        .or_else(|| same.into_iter().reduce(|a, b| if scores[b] > scores[a] { b } else { a }))
}

/// Argmax with RSRP-domain hysteresis against the serving attachment.
fn gated(
    candidates: &[Candidate],
    scores: &[f64],
    state: &mut SelectionState,
    hysteresis_db: f64,
) -> Result<ModeDecision, SelectError> {
    if candidates.is_empty() {
        return Err(SelectError::NoCandidates);
    }
    let best = argmax(candidates, scores);
    let pick = match state.current.and_then(|s| serving_index(candidates, scores, &s)) {
        Some(cur) if candidates[best].attachment() == candidates[cur].attachment() => best,
        Some(cur) if candidates[best].rsrp_dbm() >= candidates[cur].rsrp_dbm() + hysteresis_db => best,
        Some(cur) => cur,
        None => best,
    };
    let chosen = candidates[pick];
    Ok(ModeDecision { chosen, combined_score: scores[pick], handover: state.commit(&chosen) })
}

/// Static slice score times sigmoid-normalized RSRP, argmax, hysteresis.
pub fn proposed_select(
    rank: &RankTable,
    candidates: &[Candidate],
    state: &mut SelectionState,
    params: &SelectParams,
) -> Result<ModeDecision, SelectError> {
    let scores: Vec<f64> = candidates
        .iter()
        .map(|c| {
            rank.score(c.mode.option())
                * sigmoid_norm(c.rsrp_dbm(), params.sigmoid_center_dbm, params.sigmoid_scale_db)
        })
        .collect();
    gated(candidates, &scores, state, params.hysteresis_db)
}

pub fn rsrp_select(
    candidates: &[Candidate],
    state: &mut SelectionState,
    params: &SelectParams,
) -> Result<ModeDecision, SelectError> {
    let scores: Vec<f64> = candidates.iter().map(Candidate::rsrp_dbm).collect();
    gated(candidates, &scores, state, params.hysteresis_db)
}

/// CQI handover margin with time-to-trigger. Unattached UEs take the best
/// CQI at once, as do UEs whose serving link disappeared.
pub fn sdn_select(
    candidates: &[Candidate],
    state: &mut SelectionState,
    params: &SelectParams,
) -> Result<ModeDecision, SelectError> {
    if candidates.is_empty() {
        return Err(SelectError::NoCandidates);
    }
    // Ties in CQI fall back to SNR, then mode order.
    let scores: Vec<f64> = candidates.iter().map(|c| cqi(c.quality.snr_db) as f64).collect();
    let fine: Vec<f64> = candidates
        .iter()
        .map(|c| cqi(c.quality.snr_db) as f64 * 1e3 + c.quality.snr_db)
        .collect();
    let best = argmax(candidates, &fine);
    let cur = state.current.and_then(|s| serving_index(candidates, &scores, &s));
    let pick = match cur {
        None => best,
        Some(cur) if candidates[best].attachment() == candidates[cur].attachment() => {
            state.ttt.clear();
            best
        }
        Some(cur) => {
            let target = candidates[best].attachment();
            if scores[best] >= scores[cur] + params.sdn_hom_cqi as f64 {
                let held = state.ttt.get(&target).copied().unwrap_or(0) + 1;
                state.ttt.clear();
                state.ttt.insert(target, held);
                if held >= params.sdn_ttt_steps {
                    best
                } else {
                    cur
                }
            } else {
                state.ttt.clear();
                cur
            }
        }
    };
    let chosen = candidates[pick];
    Ok(ModeDecision { chosen, combined_score: scores[pick], handover: state.commit(&chosen) })
}

/// Greedy stand-in for the joint mode selection and resource allocation
/// program: maximise predicted throughput subject to BER and minimum rate.
/// No hysteresis.
pub fn jmsra_select(
    candidates: &[Candidate],
    state: &mut SelectionState,
    params: &SelectParams,
) -> Result<ModeDecision, SelectError> {
    if candidates.is_empty() {
        return Err(SelectError::NoCandidates);
    }
    let feasible = |c: &Candidate| {
        c.quality.ber <= params.jmsra_ber_threshold && c.quality.throughput_bps >= params.jmsra_rate_min_bps
    };
    let better = |a: &Candidate, b: &Candidate| {
        a.quality.throughput_bps > b.quality.throughput_bps
            || (a.quality.throughput_bps == b.quality.throughput_bps && a.rsrp_dbm() > b.rsrp_dbm())
    };
    let mut pick: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        if feasible(c) && pick.map_or(true, |p| better(c, &candidates[p])) {
            pick = Some(i);
        }
    }
    let pick = pick.unwrap_or_else(|| {
        (1..candidates.len()).fold(0, |p, i| {
            if candidates[i].quality.ber < candidates[p].quality.ber {
                i
            } else {
                p
            }
        })
    });
    let chosen = candidates[pick];
    Ok(ModeDecision {
        chosen,
        combined_score: chosen.quality.throughput_bps,
        handover: state.commit(&chosen),
    })
}

/// Dispatches to the configured selector.
pub fn select(
    kind: SelectorKind,
    rank: &RankTable,
    candidates: &[Candidate],
    state: &mut SelectionState,
    params: &SelectParams,
) -> Result<ModeDecision, SelectError> {
    match kind {
        SelectorKind::Proposed => proposed_select(rank, candidates, state, params),
        SelectorKind::RsrpMax => rsrp_select(candidates, state, params),
        SelectorKind::SdnJoint => sdn_select(candidates, state, params),
        SelectorKind::Jmsra => jmsra_select(candidates, state, params),
    }
}

/// How a D2D pair's SDN decisions in one step combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairHandover {
    None,
    Half,
    Full,
}

pub fn classify_pair(a: &ModeDecision, b: &ModeDecision) -> PairHandover {
    match (a.handover, b.handover) {
        (true, true) => PairHandover::Full,
        (false, false) => PairHandover::None,
        _ => PairHandover::Half,
    }
}
