//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
//! criterion fails. Runs the full default calibration (about two minutes on
//! one core) and two default-config speed sweeps.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use modesel::ahp::{
    build_pcm_from_priorities, consistency, normalize, slice_ranking, tables, Alternative, ComparisonMatrix,
    Level1Source, Slice, WeightVector,
};
use modesel::config::SimConfig;
use modesel::ldpc::{CalibrationSet, Modulation};
use modesel::selection::SelectorKind;
use modesel::sim::{aggregate, run_sweep, Kpi, SweepResult};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into(), notes: Vec::new() }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn criterion_1() -> Verdict {
    let embb = ComparisonMatrix::new(&tables::embb_level0_pcm()).unwrap();
    let embb_n = normalize(&embb);
    let w_ok = embb_n.weights.values().iter().zip([0.55, 0.28, 0.10, 0.05]).all(|(w, e)| close(*w, e, 0.01));
    // The quoted 3.8 follows from the rounded weights; full precision gives 3.98.
    let lambda_printed = consistency(&embb, &WeightVector(tables::EMBB_PRINTED_W.to_vec())).unwrap().lambda_max;
    let lambda_full = consistency(&embb, &embb_n.weights).unwrap().lambda_max;

    let urllc = ComparisonMatrix::new(&tables::urllc_level0_pcm()).unwrap();
    let urllc_n = normalize(&urllc);
    let cw_ok = urllc_n.weights.values().iter().zip([0.176, 0.354, 0.412, 0.056]).all(|(w, e)| close(*w, e, 0.005));
    let lambda_urllc = consistency(&urllc, &urllc_n.weights).unwrap().lambda_max;

    let pass = w_ok && cw_ok && close(lambda_printed, 3.8, 0.05) && close(lambda_urllc, 3.94, 0.02);
    let mut v = Verdict::new(
        pass,
        format!(
            "eMBB W {} lambda {lambda_printed:.3}; uRLLc W {} lambda {lambda_urllc:.3}",
            fmt(embb_n.weights.values()),
            fmt(urllc_n.weights.values())
        ),
    );
    v.notes.push(format!("eMBB lambda with unrounded weights is {lambda_full:.3}"));
    v
}

fn criterion_2() -> Verdict {
    let data = SimConfig::default().ahp;
    let ranking = |s: Slice| slice_ranking(&data.profile(s, Level1Source::Printed), &data).unwrap().rank;
    // Oracle: printed level-1 table times printed level-0 weights.
    let oracle = |w: [f64; 4]| -> [f64; 3] {
        let mut out = [0.0; 3];
        for (o, row) in out.iter_mut().zip(tables::PRINTED_LEVEL1) {
            *o = row.iter().zip(w).map(|(p, w)| p * w).sum();
        }
        out
    };
    let (u, m, e) = (ranking(Slice::Urllc), ranking(Slice::Mmtc), ranking(Slice::Embb));
    use Alternative::*;
    let order_ok = u.ordering() == [D2d, Nr, Lte] && m.ordering() == [D2d, Lte, Nr] && e.rank(Lte) == 3;
    let near = |got: [f64; 3], want: [f64; 3]| got.iter().zip(want).all(|(g, w)| close(*g, w, 0.05));
    let scores_ok = near(u.scores, oracle(tables::URLLC_PRINTED_W))
        && near(m.scores, oracle(tables::MMTC_PRINTED_W))
        && near(u.scores, [0.233, 0.269, 0.490])
        && near(m.scores, [0.273, 0.213, 0.505]);
    Verdict::new(
        order_ok && scores_ok,
        format!("uRLLc {} mMTC {} eMBB {} (LTE rank {})", fmt(&u.scores), fmt(&m.scores), fmt(&e.scores), e.rank(Lte)),
    )
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_cr: f64 = 0.0;
    let mut worst_w: f64 = 0.0;
    for _ in 0..500 {
        let n = if rng.random_range(0..2u8) == 0 { 3 } else { 4 };
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..=10.0)).collect();
        let pcm = build_pcm_from_priorities(&p).unwrap();
        let w = normalize(&pcm).weights;
        let r = consistency(&pcm, &w).unwrap();
        worst_cr = worst_cr.max(r.cr.abs());
        let total: f64 = p.iter().sum();
        for (wi, pi) in w.values().iter().zip(&p) {
            worst_w = worst_w.max((wi - pi / total).abs());
        }
    }
    Verdict::new(worst_cr <= 1e-9 && worst_w <= 1e-9, format!("max |CR| {worst_cr:.2e}, max weight error {worst_w:.2e}"))
}

fn criterion_4(cfg: &SimConfig) -> (Verdict, CalibrationSet) {
    let params = cfg.calibration_params();
    let start = Instant::now();
    let set = CalibrationSet::generate(&params).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut problems = Vec::new();
    for c in &set.curves {
        if c.points.windows(2).any(|w| w[1].bler > w[0].bler) {
            problems.push(format!("{} BLER not monotone", c.modulation));
        }
        for p in c.points.iter().filter(|p| p.bler < 0.9) {
            if p.ber > p.hard_ber {
                problems.push(format!("{} at {} dB: BER {} > hard BER {}", c.modulation, p.snr_db, p.ber, p.hard_ber));
            }
        }
    }
    let qpsk10 = set.curve(Modulation::Qpsk).unwrap().bler_at(10.0);
    if qpsk10 >= 1e-2 {
        problems.push(format!("QPSK BLER at 10 dB is {qpsk10}"));
    }
    if secs > 300.0 {
        problems.push(format!("took {secs:.0} s"));
    }
    let mut v = Verdict::new(
        problems.is_empty(),
        format!("{} trials/point, QPSK BLER@10dB {qpsk10:.1e}, {secs:.1} s", params.trials),
    );
    v.notes.extend(problems);
    let fixture = CalibrationSet::from_text(include_str!("data/calibration.txt")).unwrap();
    v.notes.push(format!("matches tests/data/calibration.txt: {}", fixture == set));
    (v, set)
}

fn sweep(cfg: &SimConfig, slice: Slice, curves: &CalibrationSet) -> Vec<SweepResult> {
    let mut cfg = cfg.clone();
    cfg.slice = slice;
    cfg.selectors = SelectorKind::ALL.to_vec();
    let plan = cfg.sweep_plan();
    run_sweep(&cfg.scenario().unwrap(), &plan, curves, None).unwrap()
}

fn series(results: &[SweepResult], sel: SelectorKind, kpi: Kpi) -> Vec<(f64, f64, f64)> {
    results
        .iter()
        .filter(|r| r.selector == sel)
        .map(|r| (r.value, r.kpi(kpi).mean, r.kpi(kpi).ci_halfwidth))
        .collect()
}

fn criterion_5(cfg: &SimConfig, curves: &CalibrationSet) -> Verdict {
    use SelectorKind::*;
    let start = Instant::now();
    let embb = sweep(cfg, Slice::Embb, curves);
    let urllc = sweep(cfg, Slice::Urllc, curves);
    let secs = start.elapsed().as_secs_f64();
    let mut parts = Vec::new();
    let mut notes = Vec::new();
    let mut check = |name: &str, ok: bool, note: String| {
        parts.push(format!("{name} {}", if ok { "ok" } else { "FAIL" }));
        notes.push(format!("({name}) {note}"));
        ok
    };

    let ho = series(&embb, Proposed, Kpi::Handovers);
    let a = ho.windows(2).all(|w| w[1].1 + w[0].2.max(w[1].2) >= w[0].1);
    let ho_means: Vec<f64> = ho.iter().map(|x| x.1).collect();
    let a = check("a", a, format!("proposed handovers by speed {}", fmt(&ho_means)));

    let at10 = |sel| embb.iter().find(|r| r.selector == sel && r.value == 10.0).map(|r| r.kpi(Kpi::Handovers).mean);
    let b = match (at10(SdnJoint), at10(Proposed), at10(Jmsra)) {
        (Some(s), Some(p), Some(j)) => check("b", s <= p && p <= j, format!("handovers at 10 m/s: sdn {s:.1}, proposed {p:.1}, jmsra {j:.1}")),
        _ => check("b", false, "10 m/s not in the sweep".into()),
    };

    let lat: Vec<f64> = series(&embb, Proposed, Kpi::Latency).iter().map(|x| x.1).collect();
    let c = check("c", lat.iter().all(|l| (5.0..=70.0).contains(l)), format!("proposed eMBB latency {}", fmt(&lat)));

    let tp = series(&embb, Proposed, Kpi::Throughput);
    let tsdn = series(&embb, SdnJoint, Kpi::Throughput);
    let d = tp.iter().zip(&tsdn).all(|(p, s)| p.1 >= s.1);
    let mbps = |v: &[(f64, f64, f64)]| fmt(&v.iter().map(|x| x.1 / 1e6).collect::<Vec<_>>());
    let d = check("d", d, format!("eMBB throughput Mbps proposed {} sdn_joint {}", mbps(&tp), mbps(&tsdn)));

    let lp = series(&urllc, Proposed, Kpi::Latency);
    let baselines = [RsrpMax, SdnJoint, Jmsra].map(|s| series(&urllc, s, Kpi::Latency));
    let wins = (0..lp.len()).filter(|&i| baselines.iter().all(|b| lp[i].1 <= b[i].1)).count();
    let best_baseline: Vec<f64> =
        (0..lp.len()).map(|i| baselines.iter().map(|b| b[i].1).fold(f64::INFINITY, f64::min)).collect();
    let e = check(
        "e",
        wins >= 4,
        format!(
            "uRLLc latency proposed {} best baseline {} ({wins}/{} points)",
            fmt(&lp.iter().map(|x| x.1).collect::<Vec<_>>()),
            fmt(&best_baseline),
            lp.len()
        ),
    );
    let within_time = secs <= 600.0;
    let mut v = Verdict::new(a && b && c && d && e && within_time, format!("{} ({:.1} s, {} runs/point)", parts.join(", "), secs, cfg.engine.runs));
    v.notes = notes;
    v
}

fn criterion_6() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let calib = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/calibration.txt");
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_modesel"))
            .args(["sweep", "--calibration", calib, "--out", out.to_str().unwrap()])
            .args(["--set", "engine.runs=3", "--set", "engine.steps=30", "--seed", "99"])
            .env_remove("MODESEL_CONFIG")
            .output()
            .map_err(|e| e.to_string())?;
        if !o.status.success() {
            return Err(String::from_utf8_lossy(&o.stderr).into_owned());
        }
        fs::read(out.join("results.csv")).map_err(|e| e.to_string())
    };
    match (run("a"), run("b")) {
        (Ok(a), Ok(b)) => Verdict::new(a == b, format!("two sweeps, {} bytes each, identical: {}", a.len(), a == b)),
        (Err(e), _) | (_, Err(e)) => Verdict::new(false, format!("sweep failed: {e}")),
    }
}

fn criterion_7() -> Verdict {
    match aggregate(&[8.0, 12.0]) {
        Ok(a) => Verdict::new(
            a.mean == 10.0 && close(a.ci_halfwidth, 3.92, 0.01) && a.n_runs == 2,
            format!("mean {} ci_halfwidth {:.4}", a.mean, a.ci_halfwidth),
        ),
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn main() -> ExitCode {
    let cfg = SimConfig::default();
    let mut verdicts = vec![(1, criterion_1()), (2, criterion_2()), (3, criterion_3())];
    let (v4, curves) = criterion_4(&cfg);
    verdicts.push((4, v4));
    verdicts.push((5, criterion_5(&cfg, &curves)));
    verdicts.push((6, criterion_6()));
    verdicts.push((7, criterion_7()));
    let mut failed = 0;
    for (n, v) in &verdicts {
        println!("criterion {n}: {} - {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        for note in &v.notes {
            println!("    {note}");
        }
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
