//! SNR to BLER/BER curves measured by Monte-Carlo simulation of the coded
//! link, and the plain-text calibration file that stores them.

use std::fmt::Write as _;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::code::LdpcCode;
use super::decoder::Decoder;
use super::{modem, LdpcError, Modulation};
use crate::seeds::derive_seed;

const FILE_MAGIC: &str = "# modesel calibration v1";
const COLUMNS: &str = "modulation snr_db bler ber hard_ber trials";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub snr_db: f64,
    /// Block error rate after isotonic smoothing.
    pub bler: f64,
    /// Post-decoding message-bit error rate after isotonic smoothing.
    pub ber: f64,
    /// Raw hard-decision (pre-decoding) bit error rate.
    pub hard_ber: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlerCurve {
    pub modulation: Modulation,
    pub code_rate: f64,
    pub points: Vec<CurvePoint>,
}

impl BlerCurve {
    pub fn bler_at(&self, snr_db: f64) -> f64 {
        self.interpolate(snr_db, |p| p.bler)
    }

    pub fn ber_at(&self, snr_db: f64) -> f64 {
        self.interpolate(snr_db, |p| p.ber)
    }

    /// Linear in dB, clamped to the end points.
    fn interpolate(&self, snr_db: f64, field: impl Fn(&CurvePoint) -> f64) -> f64 {
        let pts = &self.points;
        let first = &pts[0];
        let last = &pts[pts.len() - 1];
        if snr_db.is_nan() || snr_db <= first.snr_db {
            return field(first);
        }
        if snr_db >= last.snr_db {
            return field(last);
        }
        let hi = pts.partition_point(|p| p.snr_db <= snr_db);
        let (a, b) = (&pts[hi - 1], &pts[hi]);
        let t = (snr_db - a.snr_db) / (b.snr_db - a.snr_db);
        field(a) + t * (field(b) - field(a))
    }
}

/// Pool-adjacent-violators fit of a non-increasing sequence.
pub fn isotonic_non_increasing(values: &[f64]) -> Vec<f64> {
    // Blocks of (mean, weight).
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = ((m1 * w1 as f64 + m2 * w2 as f64) / w as f64, w);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, w)| std::iter::repeat(m).take(w))
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
struct PointCounts {
    block_errors: usize,
    bit_errors: usize,
    hard_errors: usize,
}

fn simulate_point(
    code: &LdpcCode,
    decoder: &Decoder,
    modulation: Modulation,
    snr_db: f64,
    trials: usize,
    max_iters: usize,
    seed: u64,
) -> PointCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = PointCounts::default();
    let mut message = vec![0u8; code.k()];
    for _ in 0..trials {
        for b in &mut message {
            *b = rng.random_range(0..2u8);
        }
        let cw = code.encode(&message).expect("message length matches k");
        let llrs = modem::transmit_awgn_with(&cw, modulation, snr_db, &mut rng);
        counts.hard_errors += modem::hard_decision(&llrs)
            .iter()
            .zip(&cw)
            .filter(|(a, b)| a != b)
            .count();
        let result = decoder.decode(&llrs, max_iters).expect("llr length matches n");
        let errs = result.message.iter().zip(&message).filter(|(a, b)| a != b).count();
        counts.bit_errors += errs;
        counts.block_errors += usize::from(errs > 0);
    }
    counts
}

/// Measures one curve over `snr_grid` (strictly increasing, dB).
pub fn calibrate(
    code: &LdpcCode,
    modulation: Modulation,
    snr_grid: &[f64],
    trials: usize,
    max_iters: usize,
    seed: u64,
) -> Result<BlerCurve, LdpcError> {
    if snr_grid.is_empty() {
        return Err(LdpcError::Calibration("empty SNR grid".into()));
    }
    if snr_grid.windows(2).any(|w| w[1] <= w[0]) || snr_grid.iter().any(|s| !s.is_finite()) {
        return Err(LdpcError::Calibration("SNR grid must be finite and strictly increasing".into()));
    }
    if trials == 0 {
        return Err(LdpcError::Calibration("trials must be positive".into()));
    }
    let decoder = Decoder::new(code);
    let counts: Vec<PointCounts> = snr_grid
        .par_iter()
        .enumerate()
        .map(|(i, &snr)| {
            let s = derive_seed(seed, &[modulation.index() as u64, i as u64]);
            simulate_point(code, &decoder, modulation, snr, trials, max_iters, s)
        })
        .collect();
    let raw_bler: Vec<f64> = counts.iter().map(|c| c.block_errors as f64 / trials as f64).collect();
    let raw_ber: Vec<f64> = counts
        .iter()
        .map(|c| c.bit_errors as f64 / (trials * code.k()) as f64)
        .collect();
    let bler = isotonic_non_increasing(&raw_bler);
    let ber = isotonic_non_increasing(&raw_ber);
    let points = snr_grid
        .iter()
        .zip(&counts)
        .zip(bler.iter().zip(&ber))
        .map(|((&snr_db, c), (&bler, &ber))| CurvePoint {
            snr_db,
            bler: bler.clamp(0.0, 1.0),
            ber: ber.clamp(0.0, 0.5),
            hard_ber: c.hard_errors as f64 / (trials * code.n()) as f64,
            trials,
        })
        .collect();
    Ok(BlerCurve {
        modulation,
        code_rate: code.rate(),
        points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationParams {
    pub n: usize,
    pub rate: f64,
    pub code_seed: u64,
    pub channel_seed: u64,
    pub trials: usize,
    pub max_iters: usize,
    pub snr_grid: Vec<f64>,
}

impl Default for CalibrationParams {
    fn default() -> Self {
        CalibrationParams {
            n: 512,
            rate: 0.5,
            code_seed: 7,
            channel_seed: 11,
            trials: 1000,
            max_iters: super::decoder::DEFAULT_MAX_ITERS,
            snr_grid: grid(-4.0, 22.0, 1.0),
        }
    }
}

/// Inclusive grid `lo, lo + step, ..., hi`.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || hi < lo {
        return Vec::new();
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| lo + step * i as f64).collect()
}

/// Curves for every modulation, plus the code metadata they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSet {
    pub n: usize,
    pub k: usize,
    pub code_seed: u64,
    pub channel_seed: u64,
    pub max_iters: usize,
    pub curves: Vec<BlerCurve>,
}

impl CalibrationSet {
    pub fn generate(params: &CalibrationParams) -> Result<Self, LdpcError> {
        let code = LdpcCode::new(params.n, params.rate, params.code_seed)?;
        let curves = Modulation::ALL
            .iter()
            .map(|&m| {
                calibrate(
                    &code,
                    m,
                    &params.snr_grid,
                    params.trials,
                    params.max_iters,
                    params.channel_seed,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CalibrationSet {
            n: code.n(),
            k: code.k(),
            code_seed: params.code_seed,
            channel_seed: params.channel_seed,
            max_iters: params.max_iters,
            curves,
        })
    }

    pub fn code_rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn curve(&self, m: Modulation) -> Result<&BlerCurve, LdpcError> {
        self.curves
            .iter()
            .find(|c| c.modulation == m)
            .ok_or(LdpcError::MissingCurve(m))
    }

    pub fn to_text(&self) -> String {
        self.to_text_with_comments(&[])
    }

    /// Like [`to_text`](Self::to_text) with extra `# ` lines after the code
    /// line; [`from_text`](Self::from_text) skips them.
    pub fn to_text_with_comments(&self, comments: &[String]) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{FILE_MAGIC}");
        let _ = writeln!(
            s,
            "# code n={} k={} code_seed={} channel_seed={} max_iters={}",
            self.n, self.k, self.code_seed, self.channel_seed, self.max_iters
        );
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "{COLUMNS}");
        for c in &self.curves {
            for p in &c.points {
                let _ = writeln!(
                    s,
                    "{} {} {:e} {:e} {:e} {}",
                    c.modulation.key(),
                    p.snr_db,
                    p.bler,
                    p.ber,
                    p.hard_ber,
                    p.trials
                );
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, LdpcError> {
        let bad = |line: usize, msg: &str| LdpcError::Format {
            line,
            message: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == FILE_MAGIC => {}
            _ => return Err(bad(1, "missing calibration header")),
        }
        let (idx, meta) = lines.next().ok_or_else(|| bad(2, "missing code line"))?;
        let meta = meta
            .strip_prefix("# code ")
            .ok_or_else(|| bad(idx + 1, "expected `# code ...`"))?;
        let mut fields = std::collections::BTreeMap::new();
        for tok in meta.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| bad(idx + 1, "bad code field"))?;
            let v: u64 = v.parse().map_err(|_| bad(idx + 1, "non-integer code field"))?;
            fields.insert(k.to_string(), v);
        }
        let field = |k: &str| fields.get(k).copied().ok_or_else(|| bad(idx + 1, &format!("missing {k}")));
        let n = field("n")? as usize;
        let k = field("k")? as usize;
        if k == 0 || k >= n {
            return Err(bad(idx + 1, "need 0 < k < n"));
        }
        let code_rate = k as f64 / n as f64;
        let (cidx, cols) = lines
            .by_ref()
            .find(|(_, l)| !l.starts_with('#'))
            .ok_or_else(|| bad(3, "missing column line"))?;
        if cols.split_whitespace().collect::<Vec<_>>().join(" ") != COLUMNS {
            return Err(bad(cidx + 1, "unexpected column header"));
        }
        let mut curves: Vec<BlerCurve> = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 6 {
                return Err(bad(line_no, "expected 6 columns"));
            }
            let modulation: Modulation =
                toks[0].parse().map_err(|_| bad(line_no, "unknown modulation"))?;
            let num = |t: &str| t.parse::<f64>().map_err(|_| bad(line_no, "bad number"));
            let point = CurvePoint {
                snr_db: num(toks[1])?,
                bler: num(toks[2])?,
                ber: num(toks[3])?,
                hard_ber: num(toks[4])?,
                trials: toks[5].parse().map_err(|_| bad(line_no, "bad trial count"))?,
            };
            if !(0.0..=1.0).contains(&point.bler) || !(0.0..=0.5).contains(&point.ber) {
                return Err(bad(line_no, "bler/ber out of range"));
            }
            match curves.iter_mut().find(|c| c.modulation == modulation) {
                Some(c) => {
                    if c.points.last().is_some_and(|p| p.snr_db >= point.snr_db) {
                        return Err(bad(line_no, "snr_db must increase within a curve"));
                    }
                    c.points.push(point);
                }
                None => curves.push(BlerCurve {
                    modulation,
                    code_rate,
                    points: vec![point],
                }),
            }
        }
        if curves.is_empty() {
            return Err(bad(3, "no curve rows"));
        }
        Ok(CalibrationSet {
            n,
            k,
            code_seed: field("code_seed")?,
            channel_seed: field("channel_seed")?,
            max_iters: field("max_iters")? as usize,
            curves,
        })
    }
}
