use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use modesel::ahp::{Alternative, Level1Source, Slice};
use modesel::config::{ConfigError, SimConfig};
use modesel::ldpc::CalibrationSet;
use modesel::output;
use modesel::sim::{self, Kpi};

#[derive(Parser)]
#[command(name = "modesel", version, about = "Slice-aware D2D mode selection simulator")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Flat key=value config file.
    #[arg(long, global = true, env = "MODESEL_CONFIG")]
    config: Option<PathBuf>,
    /// Override any config key (repeatable), e.g. --set engine.runs=20.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// embb, urllc or mmtc.
    #[arg(long, global = true)]
    slice: Option<String>,
    /// speed or users.
    #[arg(long, global = true)]
    sweep: Option<String>,
    /// Comma-separated subset of proposed,rsrp_max,sdn_joint,jmsra, or all.
    #[arg(long, global = true)]
    selectors: Option<String>,
    /// Output file (calibrate) or directory (sweep).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate BLER/BER curves for every modulation.
    Calibrate,
    /// Run every selector over the sweep and write CSV and plot data.
    Sweep {
        /// Calibration file; defaults to phy.calib.file.
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Print the AHP ranking for a slice.
    Rank {
        slice: Option<String>,
        /// printed or recomputed.
        #[arg(long)]
        level1: Option<String>,
    },
    /// Print the effective config.
    Config,
}

fn load_config(g: &GlobalOpts) -> Result<SimConfig, ConfigError> {
    let mut cfg = SimConfig::load(g.config.as_deref())?;
    for (key, value) in [("seed", g.seed.map(|s| s.to_string())), ("slice", g.slice.clone()), ("sweep", g.sweep.clone()), ("selectors", g.selectors.clone())] {
        if let Some(v) = value {
            cfg.set(key, &v, &format!("--{key}"))?;
        }
    }
    for kv in &g.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError::Invalid {
            origin: "--set".into(),
            key: kv.clone(),
            value: String::new(),
            reason: "expected KEY=VALUE".into(),
        })?;
        cfg.set(k.trim(), v.trim(), "--set")?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Calibrate => calibrate(&cfg, cli.global.out.as_deref()),
        Command::Sweep { calibration } => sweep(&cfg, calibration.as_deref(), cli.global.out.as_deref()),
        Command::Rank { slice, level1 } => rank(cfg, slice.as_deref(), level1.as_deref()),
        Command::Config => {
            print!("{}", cfg.to_text());
            println!("# config_sha256={}", cfg.hash());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn calibrate(cfg: &SimConfig, out: Option<&Path>) -> Result<(), String> {
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&cfg.calib_file));
    let params = cfg.calibration_params();
    eprintln!(
        "calibrating n={} rate={} over {} SNR points x {} trials x 4 modulations",
        params.n,
        params.rate,
        params.snr_grid.len(),
        params.trials
    );
    let start = Instant::now();
    let set = CalibrationSet::generate(&params).map_err(|e| e.to_string())?;
    let text = set.to_text_with_comments(&[format!("config_sha256={}", cfg.hash())]);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    output::write_atomic(&path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))?;
    for c in &set.curves {
        let threshold = c.points.iter().find(|p| p.bler <= cfg.phy.bler_target).map(|p| p.snr_db);
        match threshold {
            Some(t) => eprintln!("  {:<7} BLER <= {} from {t} dB", c.modulation.key(), cfg.phy.bler_target),
            None => eprintln!("  {:<7} never reaches BLER {} on this grid", c.modulation.key(), cfg.phy.bler_target),
        }
    }
    eprintln!("wrote {} in {:.1} s", path.display(), start.elapsed().as_secs_f64());
    Ok(())
}

fn load_calibration(path: &Path) -> Result<CalibrationSet, String> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(format!(
                "calibration file `{}` not found; generate it with `modesel calibrate` (or point phy.calib.file at an existing one)",
                path.display()
            ))
        }
        Err(e) => return Err(format!("{}: {e}", path.display())),
    };
    CalibrationSet::from_text(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn sweep(cfg: &SimConfig, calibration: Option<&Path>, out: Option<&Path>) -> Result<(), String> {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("results"));
    let run = || -> Result<(), String> {
        let calib_path = calibration.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&cfg.calib_file));
        let curves = load_calibration(&calib_path)?;
        if curves.n != cfg.ldpc_n || curves.code_seed != cfg.ldpc_code_seed || curves.max_iters != cfg.ldpc_max_iters {
            eprintln!(
                "warning: {} was made with n={} code_seed={} max_iters={}, config says n={} code_seed={} max_iters={}",
                calib_path.display(),
                curves.n,
                curves.code_seed,
                curves.max_iters,
                cfg.ldpc_n,
                cfg.ldpc_code_seed,
                cfg.ldpc_max_iters
            );
        }
        let base = cfg.scenario().map_err(|e| e.to_string())?;
        let plan = cfg.sweep_plan();
        let hash = cfg.hash();
        fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        output::clear_failed(&dir).map_err(|e| e.to_string())?;
        let log_dir = dir.join("steplog");
        if cfg.step_log {
            fs::create_dir_all(&log_dir).map_err(|e| e.to_string())?;
        }
        let var = plan.var.key();
        let sink = |job: &sim::sweep::Job, records: &[sim::StepRecord]| -> Result<(), String> {
            let p = log_dir.join(output::step_log_name(job, var));
            output::write_atomic(&p, output::step_log(records, &hash).as_bytes()).map_err(|e| format!("{}: {e}", p.display()))
        };
        let start = Instant::now();
        let results = sim::run_sweep(&base, &plan, &curves, if cfg.step_log { Some(&sink) } else { None })
            .map_err(|e| e.to_string())?;
        output::write_sweep_outputs(&dir, &results, &cfg.to_text(), &hash).map_err(|e| e.to_string())?;
        println!("slice={} sweep={} runs={} ({:.1} s)", cfg.slice, plan.var, plan.runs, start.elapsed().as_secs_f64());
        println!("{:<10} {:>6} {:>12} {:>10} {:>11} {:>10} {:>9}", "selector", var, "tput_Mbps", "ber", "latency_ms", "jitter_ms", "handovers");
        for r in &results {
            println!(
                "{:<10} {:>6} {:>12.2} {:>10.2e} {:>11.2} {:>10.2} {:>9.1}",
                r.selector.key(),
                r.value,
                r.kpi(Kpi::Throughput).mean / 1e6,
                r.kpi(Kpi::Ber).mean,
                r.kpi(Kpi::Latency).mean,
                r.kpi(Kpi::Jitter).mean,
                r.kpi(Kpi::Handovers).mean
            );
        }
        println!("wrote {}", dir.join(output::RESULTS_FILE).display());
        Ok(())
    };
    run().inspect_err(|e| {
        let _ = output::mark_failed(&dir, e);
    })
}

fn rank(mut cfg: SimConfig, slice: Option<&str>, level1: Option<&str>) -> Result<(), String> {
    if let Some(s) = slice {
        cfg.slice = s.parse::<Slice>().map_err(|e| e.to_string())?;
    }
    if let Some(l) = level1 {
        cfg.level1_source = l.parse::<Level1Source>().map_err(|e| e.to_string())?;
    }
    let r = cfg.ranking().map_err(|e| e.to_string())?;
    let (pcm, ncm, rep) = &r.level0;
    println!("slice {} (level-1 weights: {})", r.slice, r.source);
    println!("criterion priorities: {:?}", cfg.ahp.priorities[cfg.slice as usize]);
    println!("level-0 comparison matrix:");
    for i in 0..pcm.order() {
        let row: Vec<String> = (0..pcm.order()).map(|j| format!("{:>7.3}", pcm.get(i, j))).collect();
        println!("  {}", row.join(" "));
    }
    let w: Vec<String> = ncm.weights.0.iter().map(|x| format!("{x:.4}")).collect();
    println!("criterion weights W = [{}]", w.join(", "));
    println!("lambda_max = {:.4}  CI = {:.4}  CR = {:.4}  (RI {})  consistent = {}", rep.lambda_max, rep.ci, rep.cr, rep.ri, rep.consistent);
    for (criterion, n, c, recip) in &r.level1 {
        let w: Vec<String> = n.weights.0.iter().map(|x| format!("{x:.3}")).collect();
        println!(
            "  level-1 {criterion:<11} weights [{}]  lambda_max {:.4}  CR {:.4}  reciprocity error {recip:.3}",
            w.join(", "),
            c.lambda_max,
            c.cr
        );
    }
    println!("{:<5} {:>7} {:>5}", "mode", "score", "rank");
    for alt in Alternative::ALL {
        println!("{:<5} {:>7.4} {:>5}", alt.to_string(), r.rank.score(alt), r.rank.rank(alt));
    }
    let order: Vec<String> = r.rank.ordering().iter().map(|a| a.to_string()).collect();
    println!("ordering: {}", order.join(" > "));
    if r.source == Level1Source::Recomputed {
        let printed = modesel::ahp::slice_ranking(&cfg.ahp.profile(cfg.slice, Level1Source::Printed), &cfg.ahp)
            .map_err(|e| e.to_string())?;
        let reference = modesel::ahp::tables::printed_scores(cfg.slice);
        println!("note: recomputed level-1 weights differ from the printed ones");
        for alt in Alternative::ALL {
            println!(
                "  {:<4} recomputed {:.3}  printed-weights {:.3}  published {:.3}",
                alt.to_string(),
                r.rank.score(alt),
                printed.rank.score(alt),
                reference[alt.index()]
            );
        }
        let pub_rank = modesel::ahp::RankTable::from_scores(reference);
        if pub_rank.ordering() != r.rank.ordering() {
            let o: Vec<String> = pub_rank.ordering().iter().map(|a| a.to_string()).collect();
            println!("  published ordering {} is not reproduced", o.join(" > "));
        }
    }
    for w in &r.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
