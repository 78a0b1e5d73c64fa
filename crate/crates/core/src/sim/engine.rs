use std::collections::{HashMap, VecDeque};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mobility::{step_mobility, Walker};
use super::topology::{distance, place, uniform_point, Topology};
use super::{stream, Scenario, SimError};
use crate::ldpc::{modem, CalibrationSet, Decoder, LdpcCode, Modulation};
use crate::radio::{self, HopPrediction, LatencyInputs, LinkBudget, RatKind};
use crate::seeds::derive_seed;
use crate::selection::{
    classify_pair, enumerate_candidates, select, Attachment, Candidate, InfraLink, LinkQuality, Mode,
    ModeDecision, Neighbor, NodeId, PairHandover, SelectionState, UeId,
};

/// Per-run KPI means (over UEs within a step, then over steps); the
/// handover figure is a total.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunSummary {
    pub throughput_bps: f64,
    pub ber: f64,
    pub latency_ms: f64,
    pub jitter_ms: f64,
    pub handover_count: f64,
    pub effective_snr_db: f64,
    pub delivered_ratio: f64,
    pub relayed_ratio: f64,
    pub half_handovers: u64,
    pub full_handovers: u64,
    /// UE-steps dropped because a module returned an error.
    pub ue_errors: u64,
}

impl RunSummary {
    pub fn kpi(&self, kpi: super::Kpi) -> f64 {
        use super::Kpi::*;
        match kpi {
            Throughput => self.throughput_bps,
            Ber => self.ber,
            Latency => self.latency_ms,
            Jitter => self.jitter_ms,
            Handovers => self.handover_count,
        }
    }
}

/// One row of the optional step log.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub ue: UeId,
    pub mode: Mode,
    pub attachment: Attachment,
    pub rsrp_dbm: f64,
    pub snr_db: f64,
    pub effective_snr_db: f64,
    pub modulation: Modulation,
    pub bler: f64,
    pub ber: f64,
    pub throughput_bps: f64,
    pub latency_ms: f64,
    pub jitter_ms: f64,
    pub delivered: bool,
    pub handover: bool,
}

impl StepRecord {
    pub const HEADER: &'static str =
        "step,ue,mode,attachment,rsrp_dbm,snr_db,effective_snr_db,mcs,bler,ber,throughput_bps,latency_ms,jitter_ms,delivered,handover";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.step,
            self.ue,
            self.mode,
            self.attachment,
            self.rsrp_dbm,
            self.snr_db,
            self.effective_snr_db,
            self.modulation,
            self.bler,
            self.ber,
            self.throughput_bps,
            self.latency_ms,
            self.jitter_ms,
            u8::from(self.delivered),
            u8::from(self.handover)
        )
    }
}

struct Ue {
    walker: Walker,
    selection: SelectionState,
    window: VecDeque<f64>,
}

/// Static log-normal shadowing per (UE, node) and per UE pair.
struct Shadowing {
    node: Vec<Vec<f64>>,
    ue: Vec<Vec<f64>>,
}

impl Shadowing {
    #[allow(clippy::needless_range_loop)]
    fn draw(rng: &mut ChaCha8Rng, n_ue: usize, n_nodes: usize, sigma: f64) -> Self {
        let mut normal = || -> f64 {
            let z: f64 = StandardNormal.sample(&mut *rng);
            sigma * z
        };
        let node = (0..n_ue).map(|_| (0..n_nodes).map(|_| normal()).collect()).collect();
        let mut ue = vec![vec![0.0; n_ue]; n_ue];
        for i in 0..n_ue {
            for j in i + 1..n_ue {
                let s = normal();
                ue[i][j] = s;
                ue[j][i] = s;
            }
        }
        Shadowing { node, ue }
    }
}

/// Link-level tables for one step.
struct Snapshot {
    infra: Vec<Vec<InfraLink>>,
    infra_pred: Vec<Vec<HopPrediction>>,
    neighbors: Vec<Vec<Neighbor>>,
    d2d_pred: HashMap<(UeId, UeId), HopPrediction>,
}

fn quality(p: &HopPrediction) -> LinkQuality {
    LinkQuality {
        rsrp_dbm: p.budget.rsrp_dbm,
        snr_db: p.budget.snr_db,
        throughput_bps: p.throughput_bps,
        ber: p.mcs.ber,
    }
}

struct Hop<'a> {
    pred: &'a HopPrediction,
    load: f64,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    throughput_bps: f64,
    bler: f64,
    ber: f64,
    latency_ms: f64,
    delivered: bool,
    effective_snr_db: f64,
    modulation: Modulation,
}

struct BlockCoder {
    code: LdpcCode,
    decoder: Decoder,
}

impl BlockCoder {
    /// One coded block through AWGN: (block error, message bit error rate).
    fn trial(&self, m: Modulation, snr_db: f64, rng: &mut ChaCha8Rng, max_iters: usize) -> Result<(bool, f64), SimError> {
        let msg: Vec<u8> = (0..self.code.k()).map(|_| rng.random_range(0..2u8)).collect();
        let cw = self.code.encode(&msg)?;
        let llrs = modem::transmit_awgn_with(&cw, m, snr_db, rng);
        let out = self.decoder.decode(&llrs, max_iters)?;
        let errors = out.message.iter().zip(&msg).filter(|(a, b)| a != b).count();
        Ok((errors > 0, errors as f64 / msg.len() as f64))
    }
}

struct Ctx<'a> {
    sc: &'a Scenario,
    curves: &'a CalibrationSet,
    coder: Option<BlockCoder>,
}

impl Ctx<'_> {
    fn snapshot(&self, topo: &Topology, ues: &[Ue], shadow: &Shadowing) -> Result<Snapshot, SimError> {
        let phy = &self.sc.phy;
        let speed = self.sc.engine.speed_mps;
        let n = ues.len();
        let mut infra = Vec::with_capacity(n);
        let mut infra_pred = Vec::with_capacity(n);
        for (u, ue) in ues.iter().enumerate() {
            let mut links = Vec::with_capacity(topo.nodes.len());
            let mut preds = Vec::with_capacity(topo.nodes.len());
            for node in &topo.nodes {
                let d = distance(ue.walker.position, node.position);
                let budget = LinkBudget::compute(phy.rat(node.rat), d, shadow.node[u][node.id], phy)?;
                let pred = radio::predict_hop(budget, speed, self.curves, phy)?;
                links.push(InfraLink { node: node.id, rat: node.rat, quality: quality(&pred) });
                preds.push(pred);
            }
            infra.push(links);
            infra_pred.push(preds);
        }
        let mut neighbors = vec![Vec::new(); n];
        let mut d2d_pred = HashMap::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = distance(ues[i].walker.position, ues[j].walker.position);
                if d > phy.max_d2d_m {
                    continue;
                }
                let budget = LinkBudget::compute(&phy.d2d, d, shadow.ue[i][j], phy)?;
                let pred = radio::predict_hop(budget, speed, self.curves, phy)?;
                neighbors[i].push(Neighbor { ue: j, distance_m: d, d2d: quality(&pred) });
                neighbors[j].push(Neighbor { ue: i, distance_m: d, d2d: quality(&pred) });
                d2d_pred.insert((i, j), pred);
            }
        }
        Ok(Snapshot { infra, infra_pred, neighbors, d2d_pred })
    }

    fn outcome(&self, hops: &[Hop<'_>], rng: &mut ChaCha8Rng) -> Result<Outcome, SimError> {
        let phy = &self.sc.phy;
        let eng = &self.sc.engine;
        let mut out = Outcome {
            throughput_bps: f64::INFINITY,
            bler: 0.0,
            ber: 0.0,
            latency_ms: 0.0,
            delivered: true,
            effective_snr_db: f64::INFINITY,
            modulation: Modulation::Qam256,
        };
        for hop in hops {
            let p = hop.pred;
            let rat = phy.rat(p.budget.rat);
            let (mut bler, mut ber, mut tput) = (p.mcs.bler, p.mcs.ber, p.throughput_bps);
            if let Some(coder) = &self.coder {
                let (failed, measured) = coder.trial(p.mcs.modulation, p.mcs.effective_snr_db, rng, self.curves.max_iters)?;
                bler = if failed { 1.0 } else { 0.0 };
                ber = measured;
                tput = radio::throughput(p.mcs.modulation, bler, rat, phy);
            }
            let lat = radio::packet_latency(
                &LatencyInputs {
                    packet_bits: eng.packet_bits,
                    throughput_bps: tput,
                    bler,
                    modulation: p.mcs.modulation,
                    load_factor: hop.load,
                    speed_mps: eng.speed_mps,
                    distance_m: p.budget.distance_m,
                },
                rat,
                phy,
            );
            out.throughput_bps = out.throughput_bps.min(tput);
            out.bler = 1.0 - (1.0 - out.bler) * (1.0 - bler);
            out.ber = 1.0 - (1.0 - out.ber) * (1.0 - ber);
            out.latency_ms += lat.latency_ms;
            out.delivered &= lat.delivered;
            if p.mcs.effective_snr_db < out.effective_snr_db {
                out.effective_snr_db = p.mcs.effective_snr_db;
                out.modulation = p.mcs.modulation;
            }
        }
        out.latency_ms = if out.delivered { out.latency_ms.min(phy.latency_cap_ms) } else { phy.latency_cap_ms };
        Ok(out)
    }
}

fn validate(sc: &Scenario, curves: &CalibrationSet) -> Result<(), SimError> {
    let e = &sc.engine;
    let bad = |m: &str| Err(SimError::Config(m.to_string()));
    if e.steps == 0 {
        return bad("engine.steps must be at least 1");
    }
    if !(e.dt_s > 0.0) {
        return bad("engine.dt_s must be positive");
    }
    if !(e.node_capacity > 0.0) {
        return bad("engine.node_capacity must be positive");
    }
    if !(e.packet_bits > 0.0) {
        return bad("engine.packet_bits must be positive");
    }
    if !(e.speed_mps >= 0.0) {
        return bad("speed must be non-negative");
    }
    for m in Modulation::ALL {
        if RatKind::ALL.iter().any(|&r| sc.phy.rat(r).max_modulation >= m) {
            curves.curve(m)?;
        }
    }
    Ok(())
}

/// Runs one replication. `log`, when given, receives one record per UE per
/// step.
pub fn run(
    sc: &Scenario,
    curves: &CalibrationSet,
    seed: u64,
    log: Option<&mut Vec<StepRecord>>,
) -> Result<RunSummary, SimError> {
    let eng = &sc.engine;
    let topo = place(derive_seed(seed, &[stream::PLACEMENT]), eng.area_m, eng.n_ue, eng.n_enb, eng.n_gnb)?;
    run_on(sc, curves, &topo, seed, log)
}

/// Like [`run`] but on a given topology; `engine.n_ue`, `n_enb` and `n_gnb`
/// are ignored and `engine.area_m` only bounds mobility.
pub fn run_on(
    sc: &Scenario,
    curves: &CalibrationSet,
    topo: &Topology,
    seed: u64,
    mut log: Option<&mut Vec<StepRecord>>,
) -> Result<RunSummary, SimError> {
    validate(sc, curves)?;
    let eng = &sc.engine;
    if topo.ues.is_empty() || topo.nodes.iter().enumerate().any(|(i, nd)| nd.id != i) {
        return Err(SimError::Config("topology needs at least one UE and node ids matching their index".into()));
    }
    let n = topo.ues.len();
    let mut shadow_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[stream::SHADOWING]));
    let shadow = Shadowing::draw(&mut shadow_rng, n, topo.nodes.len(), sc.phy.shadow_sigma_db);
    let mut mob_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[stream::MOBILITY]));
    let mut chan_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[stream::CHANNEL]));
    let coder = if eng.per_packet_decode {
        let code = LdpcCode::new(curves.n, curves.code_rate(), curves.code_seed)?;
        let decoder = Decoder::new(&code);
        Some(BlockCoder { code, decoder })
    } else {
        None
    };
    let ctx = Ctx { sc, curves, coder };
    let partners = topo.partners();
    let mut ues: Vec<Ue> = topo
        .ues
        .iter()
        .map(|&p| Ue {
            walker: Walker { position: p, waypoint: uniform_point(&mut mob_rng, eng.area_m) },
            selection: SelectionState::default(),
            window: VecDeque::with_capacity(sc.phy.jitter_window + 1),
        })
        .collect();

    let mut sums = RunSummary::default();
    let mut counted_steps = 0usize;
    for step in 0..eng.steps {
        if step > 0 {
            for ue in &mut ues {
                ue.walker = step_mobility(ue.walker, eng.speed_mps, eng.dt_s, eng.area_m, &mut mob_rng);
            }
        }
        let snap = match ctx.snapshot(topo, &ues, &shadow) {
            Ok(s) => s,
            Err(_) => {
                sums.ue_errors += n as u64;
                continue;
            }
        };
        let decisions: Vec<Option<ModeDecision>> = (0..n)
            .map(|u| {
                let keep = ues[u].selection.current.map(|s| (s.mode, s.attachment));
                let cands: Vec<Candidate> = enumerate_candidates(
                    &snap.infra[u],
                    &snap.neighbors[u],
                    |r| snap.infra[r].as_slice(),
                    sc.phy.max_d2d_m,
                    keep,
                );
                select(sc.selector, &sc.rank, &cands, &mut ues[u].selection, &sc.select).ok()
            })
            .collect();
        for (u, p) in partners.iter().enumerate() {
            if let (Some(p), Some(a)) = (*p, &decisions[u]) {
                if u < p {
                    if let Some(b) = &decisions[p] {
                        match classify_pair(a, b) {
                            PairHandover::Half => sums.half_handovers += 1,
                            PairHandover::Full => sums.full_handovers += 1,
                            PairHandover::None => {}
                        }
                    }
                }
            }
        }
        let mut node_load = vec![0usize; topo.nodes.len()];
        let mut relay_load = vec![0usize; n];
        for d in decisions.iter().flatten() {
            node_load[d.chosen.node] += 1;
            if let Some(r) = d.chosen.relay {
                relay_load[r] += 1;
            }
        }
        let load = |count: usize| count as f64 / eng.node_capacity;

        let mut step_sum = RunSummary::default();
        let mut counted = 0usize;
        for (u, d) in decisions.iter().enumerate() {
            let Some(d) = d else {
                sums.ue_errors += 1;
                continue;
            };
            let c = &d.chosen;
            let node: NodeId = c.node;
            let result = match c.relay {
                None => ctx.outcome(&[Hop { pred: &snap.infra_pred[u][node], load: load(node_load[node]) }], &mut chan_rng),
                Some(r) => {
                    let d2d = &snap.d2d_pred[&(u.min(r), u.max(r))];
                    ctx.outcome(
                        &[
                            Hop { pred: d2d, load: load(relay_load[r]) },
                            Hop { pred: &snap.infra_pred[r][node], load: load(node_load[node]) },
                        ],
                        &mut chan_rng,
                    )
                }
            };
            let Ok(o) = result else {
                sums.ue_errors += 1;
                continue;
            };
            let w = &mut ues[u].window;
            w.push_back(o.latency_ms);
            while w.len() > sc.phy.jitter_window.max(1) {
                w.pop_front();
            }
            let jitter = radio::jitter(w.make_contiguous());
            step_sum.throughput_bps += o.throughput_bps;
            step_sum.ber += o.ber;
            step_sum.latency_ms += o.latency_ms;
            step_sum.jitter_ms += jitter;
            step_sum.effective_snr_db += o.effective_snr_db;
            step_sum.delivered_ratio += f64::from(u8::from(o.delivered));
            step_sum.relayed_ratio += f64::from(u8::from(c.relay.is_some()));
            sums.handover_count += f64::from(u8::from(d.handover));
            counted += 1;
            if let Some(log) = log.as_deref_mut() {
                log.push(StepRecord {
                    step,
                    ue: u,
                    mode: c.mode,
                    attachment: c.attachment(),
                    rsrp_dbm: c.quality.rsrp_dbm,
                    snr_db: c.quality.snr_db,
                    effective_snr_db: o.effective_snr_db,
                    modulation: o.modulation,
                    bler: o.bler,
                    ber: o.ber,
                    throughput_bps: o.throughput_bps,
                    latency_ms: o.latency_ms,
                    jitter_ms: jitter,
                    delivered: o.delivered,
                    handover: d.handover,
                });
            }
        }
        if counted == 0 {
            continue;
        }
        let k = counted as f64;
        sums.throughput_bps += step_sum.throughput_bps / k;
        sums.ber += step_sum.ber / k;
        sums.latency_ms += step_sum.latency_ms / k;
        sums.jitter_ms += step_sum.jitter_ms / k;
        sums.effective_snr_db += step_sum.effective_snr_db / k;
        sums.delivered_ratio += step_sum.delivered_ratio / k;
        sums.relayed_ratio += step_sum.relayed_ratio / k;
        counted_steps += 1;
    }
    if counted_steps == 0 {
        return Err(SimError::Config("no UE produced a result in any step".into()));
    }
    let s = counted_steps as f64;
    Ok(RunSummary {
        throughput_bps: sums.throughput_bps / s,
        ber: sums.ber / s,
        latency_ms: sums.latency_ms / s,
        jitter_ms: sums.jitter_ms / s,
        effective_snr_db: sums.effective_snr_db / s,
        delivered_ratio: sums.delivered_ratio / s,
        relayed_ratio: sums.relayed_ratio / s,
        ..sums
    })
}
