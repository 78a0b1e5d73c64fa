//! Link budget, link adaptation and per-packet KPIs.
//!
//! Path loss follows the 3GPP TR 38.901 urban-macro model. SNR comes from
//! RSRP against thermal noise plus the receiver noise figure; the effective
//! SNR then loses a speed penalty and a modulation penalty before the
//! calibrated BLER curves are consulted.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ldpc::{CalibrationSet, LdpcError, Modulation};

/// Thermal noise density, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;
const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("distance must be at least 1 m, got {0}")]
    Distance(f64),
    #[error(transparent)]
    Calibration(#[from] LdpcError),
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RatKind {
    Nr,
    Lte,
    D2d,
}

impl RatKind {
    pub const ALL: [RatKind; 3] = [RatKind::Nr, RatKind::Lte, RatKind::D2d];

    pub fn key(self) -> &'static str {
        match self {
            RatKind::Nr => "nr",
            RatKind::Lte => "lte",
            RatKind::D2d => "d2d",
        }
    }
}

impl fmt::Display for RatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for RatKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RatKind::ALL
            .into_iter()
            .find(|r| r.key() == s)
            .ok_or_else(|| format!("unknown RAT `{s}`"))
    }
}

/// Per-technology radio parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rat {
    pub kind: RatKind,
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub scs_khz: f64,
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub max_modulation: Modulation,
    pub diversity_bonus_db: f64,
}

impl Rat {
    pub fn defaults(kind: RatKind) -> Self {
        match kind {
            RatKind::Nr => Rat {
                kind,
                carrier_ghz: 5.5,
                bandwidth_hz: 20e6,
                scs_khz: 30.0,
                tx_power_dbm: 35.0,
                noise_figure_db: 6.0,
                max_modulation: Modulation::Qam256,
                diversity_bonus_db: 0.0,
            },
            RatKind::Lte => Rat {
                kind,
                carrier_ghz: 2.1,
                bandwidth_hz: 20e6,
                scs_khz: 15.0,
                tx_power_dbm: 35.0,
                noise_figure_db: 7.0,
                max_modulation: Modulation::Qam64,
                diversity_bonus_db: 0.0,
            },
            RatKind::D2d => Rat {
                kind,
                carrier_ghz: 2.4,
                bandwidth_hz: 20e6,
                scs_khz: 15.0,
                tx_power_dbm: 15.0,
                noise_figure_db: 5.0,
                max_modulation: Modulation::Qam64,
                diversity_bonus_db: 0.0,
            },
        }
    }

    /// Slot duration: 1 ms at 15 kHz, halving with each SCS doubling.
    pub fn tti_ms(&self) -> f64 {
        15.0 / self.scs_khz
    }

    pub fn noise_floor_dbm(&self) -> f64 {
        THERMAL_NOISE_DBM_HZ + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }
}

/// PHY abstraction constants. Everything here is a `phy.*` config key.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyParams {
    pub nr: Rat,
    pub lte: Rat,
    pub d2d: Rat,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
    pub shadow_sigma_db: f64,
    pub max_d2d_m: f64,
    pub speed_penalty_db_per_mps: f64,
    /// Indexed by [`Modulation::index`].
    pub modulation_penalty_db: [f64; 4],
    pub overhead: f64,
    pub code_rate: f64,
    pub bler_target: f64,
    pub sched_tti: f64,
    pub decode_tti: f64,
    pub harq_rtt_tti: f64,
    pub queue_base_ms: f64,
    pub queue_speed_ref_mps: f64,
    /// Latency charged to undeliverable packets, and the ceiling for all
    /// others.
    pub latency_cap_ms: f64,
    pub jitter_window: usize,
}

impl Default for PhyParams {
    fn default() -> Self {
        PhyParams {
            nr: Rat::defaults(RatKind::Nr),
            lte: Rat::defaults(RatKind::Lte),
            d2d: Rat::defaults(RatKind::D2d),
            bs_height_m: 25.0,
            ue_height_m: 1.5,
            shadow_sigma_db: 6.0,
            max_d2d_m: 80.0,
            speed_penalty_db_per_mps: 0.2,
            modulation_penalty_db: [0.0, 0.5, 1.0, 1.5],
            overhead: 0.14,
            code_rate: 0.5,
            bler_target: 0.1,
            sched_tti: 0.5,
            decode_tti: 0.1,
            harq_rtt_tti: 8.0,
            queue_base_ms: 2.0,
            queue_speed_ref_mps: 10.0,
            latency_cap_ms: 100.0,
            jitter_window: 20,
        }
    }
}

impl PhyParams {
    pub fn rat(&self, kind: RatKind) -> &Rat {
        match kind {
            RatKind::Nr => &self.nr,
            RatKind::Lte => &self.lte,
            RatKind::D2d => &self.d2d,
        }
    }

    pub fn rat_mut(&mut self, kind: RatKind) -> &mut Rat {
        match kind {
            RatKind::Nr => &mut self.nr,
            RatKind::Lte => &mut self.lte,
            RatKind::D2d => &mut self.d2d,
        }
    }
}

/// TR 38.901 UMa path loss in dB. `distance_m` is the 3D distance.
///
/// The NLOS value is `max(PL_LOS, PL'_NLOS)` as the model prescribes.
pub fn pathloss_uma(
    carrier_ghz: f64,
    distance_m: f64,
    bs_height_m: f64,
    ue_height_m: f64,
    los: bool,
) -> Result<f64, RadioError> {
    if !(distance_m >= 1.0) {
        return Err(RadioError::Distance(distance_m));
    }
    if !(carrier_ghz > 0.0) {
        return Err(RadioError::Invalid(format!("carrier {carrier_ghz} GHz")));
    }
    let fc = 20.0 * carrier_ghz.log10();
    let d = distance_m.log10();
    // Breakpoint with effective heights h - 1 m.
    let h_bs = (bs_height_m - 1.0).max(0.1);
    let h_ue = (ue_height_m - 1.0).max(0.1);
    let d_bp = 4.0 * h_bs * h_ue * carrier_ghz * 1e9 / SPEED_OF_LIGHT;
    let pl_los = if distance_m <= d_bp {
        28.0 + 22.0 * d + fc
    } else {
        28.0 + 40.0 * d + fc
            - 9.0 * (d_bp * d_bp + (bs_height_m - ue_height_m).powi(2)).log10()
    };
    if los {
        return Ok(pl_los);
    }
    let pl_nlos = 13.54 + 39.08 * d + fc - 0.6 * (ue_height_m - 1.5);
    Ok(pl_los.max(pl_nlos))
}

/// Received reference-signal power for one link; all links are NLOS.
pub fn rsrp(rat: &Rat, distance_m: f64, shadow_db: f64, bs_height_m: f64, ue_height_m: f64) -> Result<f64, RadioError> {
    Ok(rat.tx_power_dbm - pathloss_uma(rat.carrier_ghz, distance_m, bs_height_m, ue_height_m, false)? - shadow_db)
}

pub fn snr(rsrp_dbm: f64, rat: &Rat) -> f64 {
    rsrp_dbm - rat.noise_floor_dbm()
}

pub fn effective_snr(snr_db: f64, speed_mps: f64, modulation: Modulation, rat: &Rat, phy: &PhyParams) -> f64 {
    snr_db - phy.speed_penalty_db_per_mps * speed_mps.max(0.0)
        - phy.modulation_penalty_db[modulation.index()]
        + rat.diversity_bonus_db
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsChoice {
    pub modulation: Modulation,
    pub effective_snr_db: f64,
    pub bler: f64,
    pub ber: f64,
}

/// Highest-order modulation up to the RAT cap whose BLER at its own
/// effective SNR meets the target; QPSK otherwise.
pub fn select_mcs(
    snr_db: f64,
    speed_mps: f64,
    rat: &Rat,
    curves: &CalibrationSet,
    phy: &PhyParams,
) -> Result<McsChoice, RadioError> {
    let choice = |m: Modulation| -> Result<McsChoice, RadioError> {
        let eff = effective_snr(snr_db, speed_mps, m, rat, phy);
        let curve = curves.curve(m)?;
        Ok(McsChoice {
            modulation: m,
            effective_snr_db: eff,
            bler: curve.bler_at(eff),
            ber: curve.ber_at(eff),
        })
    };
    for m in Modulation::ALL.into_iter().rev() {
        if m > rat.max_modulation || m == Modulation::Qpsk {
            continue;
        }
        let c = choice(m)?;
        if c.bler <= phy.bler_target {
            return Ok(c);
        }
    }
    choice(Modulation::Qpsk)
}

pub fn spectral_efficiency(modulation: Modulation, phy: &PhyParams) -> f64 {
    modulation.bits_per_symbol() as f64 * phy.code_rate * (1.0 - phy.overhead)
}

pub fn throughput(modulation: Modulation, bler: f64, rat: &Rat, phy: &PhyParams) -> f64 {
    (rat.bandwidth_hz * spectral_efficiency(modulation, phy) * (1.0 - bler.clamp(0.0, 1.0))).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyInputs {
    pub packet_bits: f64,
    pub throughput_bps: f64,
    pub bler: f64,
    pub modulation: Modulation,
    pub load_factor: f64,
    pub speed_mps: f64,
    pub distance_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyBreakdown {
    pub tx_ms: f64,
    pub sched_ms: f64,
    pub decode_ms: f64,
    pub harq_ms: f64,
    pub queue_ms: f64,
    pub prop_ms: f64,
}

impl LatencyBreakdown {
    pub fn total(&self) -> f64 {
        self.tx_ms + self.sched_ms + self.decode_ms + self.harq_ms + self.queue_ms + self.prop_ms
    }
}

/// Six-term latency model. `None` when the packet cannot be delivered
/// (BLER of one or zero throughput).
pub fn latency_terms(input: &LatencyInputs, rat: &Rat, phy: &PhyParams) -> Option<LatencyBreakdown> {
    if !(input.throughput_bps > 0.0) || input.bler >= 1.0 {
        return None;
    }
    let tti = rat.tti_ms();
    let bler = input.bler.max(0.0);
    Some(LatencyBreakdown {
        tx_ms: input.packet_bits / input.throughput_bps * 1e3,
        sched_ms: phy.sched_tti * tti,
        // Order index counts from 1 for QPSK.
        decode_ms: phy.decode_tti * tti * (2.0 + input.modulation.index() as f64),
        harq_ms: bler / (1.0 - bler) * phy.harq_rtt_tti * tti,
        queue_ms: phy.queue_base_ms * input.load_factor.max(0.0) * (1.0 + input.speed_mps.max(0.0) / phy.queue_speed_ref_mps),
        prop_ms: input.distance_m.max(0.0) / SPEED_OF_LIGHT * 1e3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyOutcome {
    pub latency_ms: f64,
    pub delivered: bool,
}

pub fn packet_latency(input: &LatencyInputs, rat: &Rat, phy: &PhyParams) -> LatencyOutcome {
    match latency_terms(input, rat, phy) {
        Some(t) => LatencyOutcome {
            latency_ms: t.total().min(phy.latency_cap_ms),
            delivered: true,
        },
        None => LatencyOutcome {
            latency_ms: phy.latency_cap_ms,
            delivered: false,
        },
    }
}

/// Sample standard deviation (n - 1); zero for fewer than two samples.
pub fn jitter(window: &[f64]) -> f64 {
    let n = window.len();
    if n < 2 {
        return 0.0;
    }
    let mean = window.iter().sum::<f64>() / n as f64;
    let var = window.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    var.sqrt()
}

/// One radio hop, from geometry to the chosen MCS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub rat: RatKind,
    pub distance_m: f64,
    pub shadow_db: f64,
    pub rsrp_dbm: f64,
    pub snr_db: f64,
}

impl LinkBudget {
    /// `distance_2d_m` is the ground distance; heights come from the RAT
    /// (UE-to-UE for D2D, BS-to-UE otherwise).
    pub fn compute(rat: &Rat, distance_2d_m: f64, shadow_db: f64, phy: &PhyParams) -> Result<Self, RadioError> {
        let tx_height = if rat.kind == RatKind::D2d { phy.ue_height_m } else { phy.bs_height_m };
        let dz = tx_height - phy.ue_height_m;
        let distance_m = (distance_2d_m * distance_2d_m + dz * dz).sqrt().max(1.0);
        let rsrp_dbm = rsrp(rat, distance_m, shadow_db, tx_height, phy.ue_height_m)?;
        Ok(LinkBudget {
            rat: rat.kind,
            distance_m,
            shadow_db,
            rsrp_dbm,
            snr_db: snr(rsrp_dbm, rat),
        })
    }
}

/// Link-adapted prediction for one hop (no load or latency yet).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopPrediction {
    pub budget: LinkBudget,
    pub mcs: McsChoice,
    pub throughput_bps: f64,
}

pub fn predict_hop(
    budget: LinkBudget,
    speed_mps: f64,
    curves: &CalibrationSet,
    phy: &PhyParams,
) -> Result<HopPrediction, RadioError> {
    let rat = phy.rat(budget.rat);
    let mcs = select_mcs(budget.snr_db, speed_mps, rat, curves, phy)?;
    Ok(HopPrediction {
        budget,
        mcs,
        throughput_bps: throughput(mcs.modulation, mcs.bler, rat, phy),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::{BlerCurve, CurvePoint};

    /// Step-like curves: BLER 1 below `threshold`, 0 above, linear in a 2 dB
    /// band.
    pub(crate) fn synthetic_curves() -> CalibrationSet {
        let thresholds = [1.0, 6.0, 11.0, 16.0];
        let curves = Modulation::ALL
            .iter()
            .zip(thresholds)
            .map(|(&m, t)| BlerCurve {
                modulation: m,
                code_rate: 0.5,
                points: vec![
                    CurvePoint { snr_db: t - 1.0, bler: 1.0, ber: 0.1, hard_ber: 0.2, trials: 100 },
                    CurvePoint { snr_db: t + 1.0, bler: 0.0, ber: 0.0, hard_ber: 0.05, trials: 100 },
                ],
            })
            .collect();
        CalibrationSet { n: 512, k: 256, code_seed: 0, channel_seed: 0, max_iters: 50, curves }
    }

    #[test]
    fn uma_nlos_reference_points() {
        // 13.54 + 39.08 log10(d) + 20 log10(5.5) with h_UT = 1.5 m.
        let oracle = |d: f64| 13.54 + 39.08 * d.log10() + 20.0 * 5.5f64.log10();
        let pl100 = pathloss_uma(5.5, 100.0, 25.0, 1.5, false).unwrap();
        assert!((pl100 - oracle(100.0)).abs() < 1e-9);
        assert!((pl100 - 106.5).abs() < 0.05);
        let pl1000 = pathloss_uma(5.5, 1000.0, 25.0, 1.5, false).unwrap();
        assert!((pl1000 - 145.6).abs() < 0.05);
        assert!((pl1000 - pl100 - 39.08).abs() < 1e-9);
    }

    #[test]
    fn pathloss_monotone_and_validated() {
        for i in 0..200 {
            let d = 10.0 + 25.0 * i as f64;
            for f in [2.1, 2.4, 5.5] {
                let a = pathloss_uma(f, d, 25.0, 1.5, false).unwrap();
                let b = pathloss_uma(f, 2.0 * d, 25.0, 1.5, false).unwrap();
                assert!(b > a);
                let a = pathloss_uma(f, d, 1.5, 1.5, false).unwrap();
                let b = pathloss_uma(f, 2.0 * d, 1.5, 1.5, false).unwrap();
                assert!(b > a);
            }
        }
        assert_eq!(pathloss_uma(5.5, 0.5, 25.0, 1.5, false), Err(RadioError::Distance(0.5)));
        assert!(pathloss_uma(5.5, -3.0, 25.0, 1.5, false).is_err());
    }

    #[test]
    fn rsrp_and_snr_chain() {
        let nr = Rat::defaults(RatKind::Nr);
        let r = rsrp(&nr, 100.0, 0.0, 25.0, 1.5).unwrap();
        assert!((r - (-71.5)).abs() < 0.05);
        let shadowed = rsrp(&nr, 100.0, 6.0, 25.0, 1.5).unwrap();
        assert!((r - shadowed - 6.0).abs() < 1e-12);
        assert!((nr.noise_floor_dbm() - (-94.99)).abs() < 0.01);
        assert!((snr(-71.5, &nr) - 23.49).abs() < 0.01);
        let lte = Rat::defaults(RatKind::Lte);
        assert!((snr(-71.5, &nr) - snr(-71.5, &lte) - 1.0).abs() < 1e-12);
        assert_eq!(snr(nr.noise_floor_dbm(), &nr), 0.0);
        let d2d = Rat::defaults(RatKind::D2d);
        assert!(rsrp(&d2d, 80.0, 0.0, 1.5, 1.5).unwrap().is_finite());
    }

    #[test]
    fn tti_from_scs() {
        assert_eq!(Rat::defaults(RatKind::Nr).tti_ms(), 0.5);
        assert_eq!(Rat::defaults(RatKind::Lte).tti_ms(), 1.0);
        assert_eq!(Rat::defaults(RatKind::D2d).tti_ms(), 1.0);
    }

    #[test]
    fn effective_snr_penalties() {
        let phy = PhyParams::default();
        let nr = phy.nr;
        assert_eq!(effective_snr(12.0, 0.0, Modulation::Qpsk, &nr, &phy), 12.0);
        assert!((effective_snr(12.0, 10.0, Modulation::Qpsk, &nr, &phy) - 10.0).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for m in Modulation::ALL {
            for s in [0.0, 2.0, 4.0, 6.0, 8.0, 10.0] {
                let e = effective_snr(12.0, s, m, &nr, &phy);
                assert!(e <= effective_snr(12.0, 0.0, m, &nr, &phy));
                let _ = e;
            }
            let e = effective_snr(12.0, 0.0, m, &nr, &phy);
            assert!(e <= prev);
            prev = e;
        }
    }

    #[test]
    fn mcs_caps_and_fallback() {
        let phy = PhyParams::default();
        let curves = synthetic_curves();
        let top = select_mcs(40.0, 0.0, &phy.nr, &curves, &phy).unwrap();
        assert_eq!(top.modulation, Modulation::Qam256);
        assert_eq!(top.bler, 0.0);
        for rat in [&phy.lte, &phy.d2d] {
            assert_eq!(select_mcs(40.0, 0.0, rat, &curves, &phy).unwrap().modulation, Modulation::Qam64);
        }
        let low = select_mcs(-10.0, 0.0, &phy.nr, &curves, &phy).unwrap();
        assert_eq!(low.modulation, Modulation::Qpsk);
        assert_eq!(low.bler, 1.0);
        let mut missing = curves.clone();
        missing.curves.retain(|c| c.modulation != Modulation::Qam256);
        assert!(matches!(
            select_mcs(40.0, 0.0, &phy.nr, &missing, &phy),
            Err(RadioError::Calibration(LdpcError::MissingCurve(Modulation::Qam256)))
        ));
    }

    #[test]
    fn higher_speed_never_raises_modulation() {
        let phy = PhyParams::default();
        let curves = synthetic_curves();
        for snr10 in -100..400 {
            let snr_db = snr10 as f64 / 10.0;
            let mut prev = Modulation::Qam256;
            for s in [0.0, 2.0, 4.0, 6.0, 8.0, 10.0] {
                let m = select_mcs(snr_db, s, &phy.nr, &curves, &phy).unwrap().modulation;
                assert!(m <= prev);
                prev = m;
            }
        }
    }

    #[test]
    fn throughput_values() {
        let phy = PhyParams::default();
        assert_eq!(throughput(Modulation::Qam64, 1.0, &phy.lte, &phy), 0.0);
        let q = throughput(Modulation::Qpsk, 0.0, &phy.lte, &phy);
        assert!((q - 17.2e6).abs() < 1e-6);
        let q256 = throughput(Modulation::Qam256, 0.0, &phy.lte, &phy);
        assert!((q256 - 4.0 * q).abs() < 1e-6);
    }

    fn inputs() -> LatencyInputs {
        LatencyInputs {
            packet_bits: 12000.0,
            throughput_bps: 17.2e6,
            bler: 0.0,
            modulation: Modulation::Qpsk,
            load_factor: 0.0,
            speed_mps: 0.0,
            distance_m: 0.0,
        }
    }

    #[test]
    fn latency_term_by_term() {
        let phy = PhyParams::default();
        let lte = phy.lte;
        // 0.698 tx + 0.5 sched + 0.2 decode.
        let t = latency_terms(&inputs(), &lte, &phy).unwrap();
        assert!((t.tx_ms - 0.697_674).abs() < 1e-6);
        assert!((t.decode_ms - 0.2).abs() < 1e-12);
        assert!((t.total() - 1.3977).abs() < 1e-3);
        let q256 = LatencyInputs { modulation: Modulation::Qam256, ..inputs() };
        assert!((latency_terms(&q256, &lte, &phy).unwrap().decode_ms - 0.5).abs() < 1e-12);
    }

    #[test]
    fn harq_and_monotonicity() {
        let phy = PhyParams::default();
        let lte = phy.lte;
        let half = LatencyInputs { bler: 0.5, ..inputs() };
        let d = packet_latency(&half, &lte, &phy).latency_ms - packet_latency(&inputs(), &lte, &phy).latency_ms;
        assert!((d - 8.0).abs() < 1e-9);
        let mut prev = 0.0;
        for i in 0..20 {
            let l = packet_latency(&LatencyInputs { load_factor: i as f64 * 0.1, ..inputs() }, &lte, &phy).latency_ms;
            assert!(l > prev);
            prev = l;
        }
        let mut prev = 0.0;
        for i in 0..9 {
            let l = packet_latency(&LatencyInputs { bler: i as f64 * 0.1, ..inputs() }, &lte, &phy).latency_ms;
            assert!(l > prev);
            prev = l;
        }
    }

    #[test]
    fn undeliverable_is_capped() {
        let phy = PhyParams::default();
        let out = packet_latency(&LatencyInputs { bler: 1.0, ..inputs() }, &phy.lte, &phy);
        assert!(!out.delivered);
        assert_eq!(out.latency_ms, phy.latency_cap_ms);
        let out = packet_latency(&LatencyInputs { throughput_bps: 0.0, ..inputs() }, &phy.lte, &phy);
        assert!(!out.delivered);
    }

    #[test]
    fn jitter_examples() {
        assert_eq!(jitter(&[5.0, 5.0, 5.0, 5.0]), 0.0);
        assert!((jitter(&[10.0, 20.0]) - 7.0711).abs() < 1e-4);
        assert_eq!(jitter(&[3.0]), 0.0);
        let w = [1.0, 4.0, 2.5, 9.0];
        let scaled: Vec<f64> = w.iter().map(|x| x * 3.0).collect();
        assert!((jitter(&scaled) - 3.0 * jitter(&w)).abs() < 1e-12);
    }
}
