//! Flat `key = value` simulation config.
//!
//! Every setting has a documented key; values are layered defaults < file <
//! `MODESEL_*` environment variables < command-line flags. Unknown keys and
//! out-of-range values are rejected with the key named in the message.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ahp::{slice_ranking, AhpData, AhpError, Level1Source, Slice, SliceRanking};
use crate::kv::{self, KvError};
use crate::ldpc::{calibration, CalibrationParams, Modulation};
use crate::radio::PhyParams;
use crate::selection::{SelectParams, SelectorKind};
use crate::sim::{EngineParams, Scenario, SweepPlan, SweepVar};

/// Prefix for environment overrides: `MODESEL_ENGINE__RUNS=5` sets
/// `engine.runs` (`__` becomes `.`, the rest is lower-cased).
pub const ENV_PREFIX: &str = "MODESEL_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{origin}: {source}")]
    Syntax {
        origin: String,
        #[source]
        source: KvError,
    },
    #[error("{origin}: unknown config key `{key}`")]
    UnknownKey { origin: String, key: String },
    #[error("{origin}: invalid value `{value}` for `{key}`: {reason}")]
    Invalid {
        origin: String,
        key: String,
        value: String,
        reason: String,
    },
    #[error("inconsistent config: {0}")]
    Inconsistent(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ahp(#[from] AhpError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub slice: Slice,
    pub level1_source: Level1Source,
    pub selectors: Vec<SelectorKind>,
    pub sweep: SweepVar,
    pub speed_values: Vec<f64>,
    pub user_values: Vec<f64>,
    pub engine: EngineParams,
    pub step_log: bool,
    pub phy: PhyParams,
    pub ldpc_n: usize,
    pub ldpc_rate: f64,
    pub ldpc_code_seed: u64,
    pub ldpc_max_iters: usize,
    pub calib_channel_seed: u64,
    pub calib_trials: usize,
    pub calib_snr_min_db: f64,
    pub calib_snr_max_db: f64,
    pub calib_snr_step_db: f64,
    pub calib_file: String,
    pub select: SelectParams,
    pub ahp: AhpData,
}

impl Default for SimConfig {
    fn default() -> Self {
        let calib = CalibrationParams::default();
        SimConfig {
            seed: 1,
            slice: Slice::Embb,
            level1_source: Level1Source::Printed,
            selectors: SelectorKind::ALL.to_vec(),
            sweep: SweepVar::Speed,
            speed_values: SweepVar::Speed.default_values(),
            user_values: SweepVar::Users.default_values(),
            engine: EngineParams::default(),
            step_log: false,
            phy: PhyParams::default(),
            ldpc_n: calib.n,
            ldpc_rate: calib.rate,
            ldpc_code_seed: calib.code_seed,
            ldpc_max_iters: calib.max_iters,
            calib_channel_seed: calib.channel_seed,
            calib_trials: calib.trials,
            calib_snr_min_db: -4.0,
            calib_snr_max_db: 22.0,
            calib_snr_step_db: 1.0,
            calib_file: "calibration.txt".into(),
            select: SelectParams::default(),
            ahp: AhpData::default(),
        }
    }
}

trait Value: Sized {
    fn parse_value(s: &str) -> Result<Self, String>;
    fn render(&self) -> String;
    fn magnitude(&self) -> Option<f64> {
        None
    }
}

impl Value for f64 {
    fn parse_value(s: &str) -> Result<Self, String> {
        match s {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            _ => s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| "not a finite number".to_string()),
        }
    }
    fn render(&self) -> String {
        if self.is_infinite() {
            "inf".into()
        } else {
            self.to_string()
        }
    }
    fn magnitude(&self) -> Option<f64> {
        Some(*self)
    }
}

macro_rules! integer_value {
    ($($t:ty),*) => {$(
        impl Value for $t {
            fn parse_value(s: &str) -> Result<Self, String> {
                s.parse::<$t>().map_err(|_| "not a non-negative integer".to_string())
            }
            fn render(&self) -> String {
                self.to_string()
            }
            fn magnitude(&self) -> Option<f64> {
                Some(*self as f64)
            }
        }
    )*};
}
integer_value!(usize, u32, u64);

impl Value for bool {
    fn parse_value(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" | "on" => Ok(true),
            "false" | "0" | "no" | "off" => Ok(false),
            _ => Err("expected true or false".into()),
        }
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Value for String {
    fn parse_value(s: &str) -> Result<Self, String> {
        if s.is_empty() {
            Err("must not be empty".into())
        } else {
            Ok(s.to_string())
        }
    }
    fn render(&self) -> String {
        self.clone()
    }
}

macro_rules! parsed_value {
    ($($t:ty),*) => {$(
        impl Value for $t {
            fn parse_value(s: &str) -> Result<Self, String> {
                s.parse::<$t>().map_err(|e| e.to_string())
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
parsed_value!(Slice, Level1Source, SweepVar, Modulation);

impl Value for Vec<SelectorKind> {
    fn parse_value(s: &str) -> Result<Self, String> {
        if s.trim() == "all" {
            return Ok(SelectorKind::ALL.to_vec());
        }
        let mut out: Vec<SelectorKind> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let k: SelectorKind = part.parse().map_err(|e: crate::selection::SelectError| e.to_string())?;
            if out.contains(&k) {
                return Err(format!("selector `{part}` listed twice"));
            }
            out.push(k);
        }
        if out.is_empty() {
            return Err("need at least one selector".into());
        }
        Ok(out)
    }
    fn render(&self) -> String {
        self.iter().map(|k| k.key()).collect::<Vec<_>>().join(",")
    }
}

impl Value for Vec<f64> {
    fn parse_value(s: &str) -> Result<Self, String> {
        let out = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(f64::parse_value)
            .collect::<Result<Vec<_>, _>>()?;
        if out.is_empty() {
            return Err("need at least one value".into());
        }
        Ok(out)
    }
    fn render(&self) -> String {
        self.iter().map(|v| v.render()).collect::<Vec<_>>().join(",")
    }
}

#[derive(Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
    lo_open: bool,
}

const fn closed(lo: f64, hi: f64) -> Range {
    Range { lo, hi, lo_open: false }
}

const fn above(lo: f64, hi: f64) -> Range {
    Range { lo, hi, lo_open: true }
}

const ANY: Range = closed(f64::NEG_INFINITY, f64::INFINITY);

impl Range {
    fn check(&self, v: f64) -> Result<(), String> {
        let lo_ok = if self.lo_open { v > self.lo } else { v >= self.lo };
        if lo_ok && v <= self.hi {
            Ok(())
        } else {
            let open = if self.lo_open { "(" } else { "[" };
            Err(format!("out of range {open}{}, {}]", self.lo.render(), self.hi.render()))
        }
    }
}

type Setter = Box<dyn Fn(&mut SimConfig, &str) -> Result<(), String>>;

struct Field {
    key: String,
    get: Box<dyn Fn(&SimConfig) -> String>,
    set: Setter,
}

macro_rules! field {
    ($out:ident, $key:expr, $range:expr, |$c:ident| $place:expr) => {{
        let range: Range = $range;
        $out.push(Field {
            key: $key.to_string(),
            get: Box::new(|$c: &SimConfig| Value::render(&$place)),
            set: Box::new(move |$c: &mut SimConfig, v: &str| {
                let x = Value::parse_value(v)?;
                if let Some(m) = Value::magnitude(&x) {
                    range.check(m)?;
                }
                $place = x;
                Ok(())
            }),
        });
    }};
}

macro_rules! rat_fields {
    ($out:ident, $name:literal, $rat:ident) => {
        field!($out, concat!("phy.", $name, ".carrier_ghz"), above(0.0, 100.0), |c| c.phy.$rat.carrier_ghz);
        field!($out, concat!("phy.", $name, ".bandwidth_hz"), closed(1e5, 1e9), |c| c.phy.$rat.bandwidth_hz);
        field!($out, concat!("phy.", $name, ".scs_khz"), closed(15.0, 480.0), |c| c.phy.$rat.scs_khz);
        field!($out, concat!("phy.", $name, ".tx_power_dbm"), closed(-30.0, 60.0), |c| c.phy.$rat.tx_power_dbm);
        field!($out, concat!("phy.", $name, ".noise_figure_db"), closed(0.0, 30.0), |c| c.phy.$rat.noise_figure_db);
        field!($out, concat!("phy.", $name, ".max_modulation"), ANY, |c| c.phy.$rat.max_modulation);
        field!($out, concat!("phy.", $name, ".diversity_bonus_db"), closed(-20.0, 20.0), |c| c.phy.$rat.diversity_bonus_db);
    };
}

fn fields() -> Vec<Field> {
    let mut f = Vec::new();
    field!(f, "seed", ANY, |c| c.seed);
    field!(f, "slice", ANY, |c| c.slice);
    field!(f, "ahp.level1_source", ANY, |c| c.level1_source);
    field!(f, "selectors", ANY, |c| c.selectors);
    field!(f, "sweep", ANY, |c| c.sweep);
    f.push(list_field("sweep.speed_values", closed(0.0, 50.0), false, |c| &mut c.speed_values));
    f.push(list_field("sweep.user_values", closed(1.0, 1000.0), true, |c| &mut c.user_values));

    field!(f, "engine.area_width_m", closed(10.0, 1e5), |c| c.engine.area_m.0);
    field!(f, "engine.area_height_m", closed(10.0, 1e5), |c| c.engine.area_m.1);
    field!(f, "engine.n_ue", closed(1.0, 1000.0), |c| c.engine.n_ue);
    field!(f, "engine.n_enb", closed(1.0, 50.0), |c| c.engine.n_enb);
    field!(f, "engine.n_gnb", closed(1.0, 50.0), |c| c.engine.n_gnb);
    field!(f, "engine.steps", closed(1.0, 1e6), |c| c.engine.steps);
    field!(f, "engine.dt_s", above(0.0, 60.0), |c| c.engine.dt_s);
    field!(f, "engine.runs", closed(2.0, 1e5), |c| c.engine.runs);
    field!(f, "engine.speed_mps", closed(0.0, 50.0), |c| c.engine.speed_mps);
    field!(f, "engine.node_capacity", closed(1.0, 1e5), |c| c.engine.node_capacity);
    field!(f, "engine.packet_bits", closed(8.0, 1e8), |c| c.engine.packet_bits);
    field!(f, "engine.per_packet_decode", ANY, |c| c.engine.per_packet_decode);
    field!(f, "engine.workers", closed(0.0, 1024.0), |c| c.engine.workers);
    field!(f, "engine.step_log", ANY, |c| c.step_log);

    rat_fields!(f, "nr", nr);
    rat_fields!(f, "lte", lte);
    rat_fields!(f, "d2d", d2d);
    field!(f, "phy.bs_height_m", closed(1.0, 150.0), |c| c.phy.bs_height_m);
    field!(f, "phy.ue_height_m", closed(1.0, 22.5), |c| c.phy.ue_height_m);
    field!(f, "phy.shadow_sigma_db", closed(0.0, 20.0), |c| c.phy.shadow_sigma_db);
    field!(f, "phy.max_d2d_m", closed(1.0, 1e4), |c| c.phy.max_d2d_m);
    field!(f, "phy.speed_penalty_db_per_mps", closed(0.0, 10.0), |c| c.phy.speed_penalty_db_per_mps);
    for m in Modulation::ALL {
        let i = m.index();
        f.push(Field {
            key: format!("phy.modulation_penalty_db.{}", m.key()),
            get: Box::new(move |c| c.phy.modulation_penalty_db[i].render()),
            set: Box::new(move |c, v| {
                let x = f64::parse_value(v)?;
                closed(0.0, 20.0).check(x)?;
                c.phy.modulation_penalty_db[i] = x;
                Ok(())
            }),
        });
    }
    field!(f, "phy.overhead", closed(0.0, 0.95), |c| c.phy.overhead);
    field!(f, "phy.code_rate", above(0.0, 1.0), |c| c.phy.code_rate);
    field!(f, "phy.bler_target", above(0.0, 1.0), |c| c.phy.bler_target);
    field!(f, "phy.sched_tti", closed(0.0, 100.0), |c| c.phy.sched_tti);
    field!(f, "phy.decode_tti", closed(0.0, 100.0), |c| c.phy.decode_tti);
    field!(f, "phy.harq_rtt_tti", closed(0.0, 1000.0), |c| c.phy.harq_rtt_tti);
    field!(f, "phy.queue_base_ms", closed(0.0, 1e4), |c| c.phy.queue_base_ms);
    field!(f, "phy.queue_speed_ref_mps", above(0.0, 1e4), |c| c.phy.queue_speed_ref_mps);
    field!(f, "phy.latency_cap_ms", above(0.0, 1e6), |c| c.phy.latency_cap_ms);
    field!(f, "phy.jitter_window", closed(2.0, 1e5), |c| c.phy.jitter_window);

    field!(f, "phy.ldpc.n", closed(16.0, 65536.0), |c| c.ldpc_n);
    field!(f, "phy.ldpc.rate", closed(0.05, 0.95), |c| c.ldpc_rate);
    field!(f, "phy.ldpc.code_seed", ANY, |c| c.ldpc_code_seed);
    field!(f, "phy.ldpc.max_iters", closed(1.0, 10_000.0), |c| c.ldpc_max_iters);
    field!(f, "phy.calib.channel_seed", ANY, |c| c.calib_channel_seed);
    field!(f, "phy.calib.trials", closed(100.0, 1e8), |c| c.calib_trials);
    field!(f, "phy.calib.snr_min_db", closed(-40.0, 60.0), |c| c.calib_snr_min_db);
    field!(f, "phy.calib.snr_max_db", closed(-40.0, 60.0), |c| c.calib_snr_max_db);
    field!(f, "phy.calib.snr_step_db", closed(0.05, 20.0), |c| c.calib_snr_step_db);
    field!(f, "phy.calib.file", ANY, |c| c.calib_file);

    field!(f, "select.hysteresis_db", closed(0.0, f64::INFINITY), |c| c.select.hysteresis_db);
    field!(f, "select.sigmoid.center", closed(-200.0, 0.0), |c| c.select.sigmoid_center_dbm);
    field!(f, "select.sigmoid.scale", above(0.0, 100.0), |c| c.select.sigmoid_scale_db);
    field!(f, "select.sdn.hom_cqi", closed(0.0, 15.0), |c| c.select.sdn_hom_cqi);
    field!(f, "select.sdn.ttt_steps", closed(1.0, 1e4), |c| c.select.sdn_ttt_steps);
    field!(f, "select.jmsra.ber_threshold", above(0.0, 0.5), |c| c.select.jmsra_ber_threshold);
    field!(f, "select.jmsra.rate_min_bps", above(0.0, 1e11), |c| c.select.jmsra_rate_min_bps);
    f
}

fn list_field(key: &str, range: Range, integer: bool, place: fn(&mut SimConfig) -> &mut Vec<f64>) -> Field {
    Field {
        key: key.to_string(),
        get: Box::new(move |c: &SimConfig| {
            let mut c = c.clone();
            place(&mut c).render()
        }),
        set: Box::new(move |c: &mut SimConfig, v: &str| {
            let values = Vec::<f64>::parse_value(v)?;
            for &x in &values {
                range.check(x)?;
                if integer && x.fract() != 0.0 {
                    return Err(format!("{x} is not an integer"));
                }
            }
            *place(c) = values;
            Ok(())
        }),
    }
}

impl SimConfig {
    /// Every recognised key, in echo order. AHP data keys come last.
    pub fn keys() -> Vec<String> {
        let mut keys: Vec<String> = fields().into_iter().map(|f| f.key).collect();
        keys.extend(AhpData::default().entries().into_iter().map(|(k, _)| k));
        keys
    }

    /// Sets one key; `origin` names the source in error messages.
    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<(), ConfigError> {
        let invalid = |reason: String| ConfigError::Invalid {
            origin: origin.to_string(),
            key: key.to_string(),
            value: value.to_string(),
            reason,
        };
        if let Some(field) = fields().into_iter().find(|f| f.key == key) {
            return (field.set)(self, value).map_err(invalid);
        }
        match self.ahp.apply(key, value) {
            Ok(true) => Ok(()),
            Ok(false) => Err(ConfigError::UnknownKey { origin: origin.to_string(), key: key.to_string() }),
            Err(AhpError::BadEntry { reason, .. }) if reason == "unrecognised key" => {
                Err(ConfigError::UnknownKey { origin: origin.to_string(), key: key.to_string() })
            }
            Err(e) => Err(invalid(e.to_string())),
        }
    }

    /// Applies every entry of a `key = value` text.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        let entries = kv::parse(text).map_err(|source| ConfigError::Syntax { origin: origin.to_string(), source })?;
        for (line, k, v) in &entries.entries {
            self.set(k, v, &format!("{origin}:{line}"))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Applies `MODESEL_*` variables from `vars`.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut matched: Vec<(String, String, String)> = vars
            .into_iter()
            .filter_map(|(k, v)| {
                let name = k.as_ref();
                let rest = name.strip_prefix(ENV_PREFIX)?;
                Some((env_key(rest), v.as_ref().to_string(), name.to_string()))
            })
            .collect();
        // Deterministic order regardless of the environment's.
        matched.sort();
        for (key, value, name) in matched {
            self.set(&key, &value, &format!("environment {name}"))?;
        }
        Ok(())
    }

    /// Defaults, then an optional file, then the environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg = SimConfig::default();
        if let Some(p) = path {
            cfg.apply_file(p)?;
        }
        cfg.apply_env(std::env::vars())?;
        Ok(cfg)
    }

    /// Cross-key checks that single-key ranges cannot express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Inconsistent(m));
        if self.calib_snr_max_db <= self.calib_snr_min_db {
            return bad("phy.calib.snr_max_db must exceed phy.calib.snr_min_db".into());
        }
        if self.ldpc_n % 2 != 0 {
            return bad(format!("phy.ldpc.n must be even, got {}", self.ldpc_n));
        }
        self.ahp.validate()?;
        Ok(())
    }

    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = fields().into_iter().map(|f| (f.key.clone(), (f.get)(self))).collect();
        out.extend(self.ahp.entries());
        out
    }

    /// The effective config in the file format it was read from.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# modesel effective config\n");
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// SHA-256 of [`to_text`](Self::to_text), hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn calibration_params(&self) -> CalibrationParams {
        CalibrationParams {
            n: self.ldpc_n,
            rate: self.ldpc_rate,
            code_seed: self.ldpc_code_seed,
            channel_seed: self.calib_channel_seed,
            trials: self.calib_trials,
            max_iters: self.ldpc_max_iters,
            snr_grid: calibration::grid(self.calib_snr_min_db, self.calib_snr_max_db, self.calib_snr_step_db),
        }
    }

    pub fn ranking(&self) -> Result<SliceRanking, ConfigError> {
        Ok(slice_ranking(&self.ahp.profile(self.slice, self.level1_source), &self.ahp)?)
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        self.validate()?;
        Ok(Scenario {
            engine: self.engine.clone(),
            phy: self.phy.clone(),
            select: self.select.clone(),
            selector: self.selectors[0],
            slice: self.slice,
            rank: self.ranking()?.rank,
        })
    }

    pub fn sweep_values(&self) -> &[f64] {
        match self.sweep {
            SweepVar::Speed => &self.speed_values,
            SweepVar::Users => &self.user_values,
        }
    }

    pub fn sweep_plan(&self) -> SweepPlan {
        SweepPlan {
            var: self.sweep,
            values: self.sweep_values().to_vec(),
            selectors: self.selectors.clone(),
            runs: self.engine.runs,
            seed: self.seed,
        }
    }
}

/// `ENGINE__RUNS` -> `engine.runs`.
pub fn env_key(rest: &str) -> String {
    rest.to_ascii_lowercase().replace("__", ".")
}
