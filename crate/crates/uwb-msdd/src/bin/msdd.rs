//! Thin command-line front end over the library's simulation harness.

use clap::{Args, Parser, Subcommand};
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use uwb_msdd::sim::{
    run_ber_sweep_multi, run_complexity_report, run_relative_metrics, run_validation,
    write_ber_csv, write_complexity_csv, write_json_summary, write_relative_csv, DetectorKind,
    KvMap, SimConfig,
};

#[derive(Parser)]
#[command(name = "msdd", about = "Noncoherent DSTBC UWB multiple-symbol detection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Key-value config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Detector chain (dd, glrt, bp, va-hmsdd, va-smsdd, rake, coded-glrt,
    /// idd-bp, idd-va-smsdd).
    #[arg(long)]
    detector: Option<String>,
    /// Observation window order M.
    #[arg(long)]
    m: Option<usize>,
    /// Viterbi memory depth L (defaults to M).
    #[arg(long)]
    l: Option<usize>,
    /// Receive antennas.
    #[arg(long)]
    q: Option<usize>,
    /// Information symbols per burst.
    #[arg(long)]
    n_symbols: Option<usize>,
    /// Comma-separated Eb/N0 grid in dB.
    #[arg(long)]
    ebn0: Option<String>,
    /// Master seed (also via MSDD_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Per-point information-bit budget.
    #[arg(long)]
    max_bits: Option<u64>,
    /// Per-point bit-error target.
    #[arg(long)]
    min_errors: Option<u64>,
    /// Worker threads (also via MSDD_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
    /// Extra `key=value` overrides for any config key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// BER records CSV path (stdout when omitted).
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// JSON run summary path.
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Per-burst decision log for error recounting.
    #[arg(long)]
    audit_log: Option<PathBuf>,
}

impl ConfigArgs {
    fn build(&self) -> Result<SimConfig, uwb_msdd::Error> {
        let mut kv = match &self.config {
            Some(path) => KvMap::parse(&fs::read_to_string(path)?)?,
            None => KvMap::default(),
        };
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                kv.0.insert(k.to_string(), v);
            }
        };
        put("detector", self.detector.clone());
        put("m", self.m.map(|v| v.to_string()));
        put("l", self.l.map(|v| v.to_string()));
        put("q", self.q.map(|v| v.to_string()));
        put("n_symbols", self.n_symbols.map(|v| v.to_string()));
        put("ebn0_db", self.ebn0.clone());
        put("master_seed", self.seed.map(|v| v.to_string()));
        put("max_bits", self.max_bits.map(|v| v.to_string()));
        put("min_errors", self.min_errors.map(|v| v.to_string()));
        put("workers", self.workers.map(|v| v.to_string()));
        for pair in &self.set {
            let (k, v) = pair.split_once('=').ok_or_else(|| {
                uwb_msdd::Error::invalid_config(format!("--set expects KEY=VALUE, got '{pair}'"))
            })?;
            kv.0.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut cfg = SimConfig::from_kv(&kv)?;
        if let Some(p) = &self.out_csv {
            cfg.out_csv = Some(p.clone());
        }
        if let Some(p) = &self.out_json {
            cfg.out_json = Some(p.clone());
        }
        if let Some(p) = &self.audit_log {
            cfg.audit_log = Some(p.clone());
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured chain over the configured SNR grid.
    Simulate(ConfigArgs),
    /// Run several chains over shared bursts and a common grid.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated chain list, e.g. "dd,glrt,bp".
        #[arg(long)]
        detectors: String,
    },
    /// Run the quick self-check suites.
    Validate,
    /// Emit the multiplication-unit complexity report.
    Complexity {
        /// Window orders, e.g. "2,3,4,5".
        #[arg(long, default_value = "2,3,4,5")]
        m: String,
        /// Memory depths, e.g. "2,3".
        #[arg(long, default_value = "2,3")]
        l: String,
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
    /// Relative BER/complexity of chains against the exhaustive hard
    /// detector at matched settings.
    Relative {
        #[command(flatten)]
        config: ConfigArgs,
        /// Chains to compare against the baseline, e.g. "bp,va-hmsdd,va-smsdd".
        #[arg(long, default_value = "bp,va-hmsdd,va-smsdd")]
        detectors: String,
    },
}

fn parse_detectors(list: &str) -> Result<Vec<DetectorKind>, uwb_msdd::Error> {
    list.split(',').map(|s| DetectorKind::parse(s.trim())).collect()
}

fn parse_usize_list(list: &str) -> Result<Vec<usize>, uwb_msdd::Error> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| uwb_msdd::Error::invalid_config(format!("bad list entry '{s}'")))
        })
        .collect()
}

fn emit_records(cfg: &SimConfig, records: &[uwb_msdd::sim::BerRecord]) -> Result<(), uwb_msdd::Error> {
    match &cfg.out_csv {
        Some(path) => {
            let mut f = fs::File::create(path)?;
            write_ber_csv(&mut f, records)?;
            eprintln!("wrote {}", path.display());
        }
        None => write_ber_csv(&mut std::io::stdout().lock(), records)?,
    }
    if let Some(path) = &cfg.out_json {
        let mut f = fs::File::create(path)?;
        write_json_summary(&mut f, cfg, records)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn run_with_audit(
    cfg: &SimConfig,
    chains: &[DetectorKind],
) -> Result<Vec<uwb_msdd::sim::BerRecord>, uwb_msdd::Error> {
    match &cfg.audit_log {
        Some(path) => {
            let mut f = fs::File::create(path)?;
            let records = run_ber_sweep_multi(cfg, chains, Some(&mut f))?;
            eprintln!("wrote {}", path.display());
            Ok(records)
        }
        None => run_ber_sweep_multi(cfg, chains, None),
    }
}

fn real_main() -> Result<bool, uwb_msdd::Error> {
    match Cli::parse().command {
        Cmd::Simulate(args) => {
            let cfg = args.build()?;
            let records = run_with_audit(&cfg, &[cfg.detector])?;
            emit_records(&cfg, &records)?;
        }
        Cmd::Sweep { config, detectors } => {
            let cfg = config.build()?;
            let chains = parse_detectors(&detectors)?;
            // Coded and uncoded chains use different Eb accounting; group them.
            let (coded, uncoded): (Vec<_>, Vec<_>) =
                chains.into_iter().partition(|c| c.is_coded());
            let mut records = Vec::new();
            if !uncoded.is_empty() {
                records.extend(run_with_audit(&cfg, &uncoded)?);
            }
            if !coded.is_empty() {
                records.extend(run_with_audit(&cfg, &coded)?);
            }
            emit_records(&cfg, &records)?;
        }
        Cmd::Validate => {
            let mut all_ok = true;
            for v in run_validation()? {
                println!("[{}] {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
                all_ok &= v.passed;
            }
            return Ok(all_ok);
        }
        Cmd::Complexity { m, l, out_csv } => {
            let report = run_complexity_report(&parse_usize_list(&m)?, &parse_usize_list(&l)?)?;
            match out_csv {
                Some(path) => {
                    let mut f = fs::File::create(&path)?;
                    write_complexity_csv(&mut f, &report)?;
                    eprintln!("wrote {}", path.display());
                }
                None => write_complexity_csv(&mut std::io::stdout().lock(), &report)?,
            }
        }
        Cmd::Relative { config, detectors } => {
            let cfg = config.build()?;
            let compared = parse_detectors(&detectors)?;
            if compared.iter().any(|c| c.is_coded()) {
                return Err(uwb_msdd::Error::invalid_config(
                    "relative metrics compare uncoded chains against the hard baseline",
                ));
            }
            let mut chains = vec![DetectorKind::Glrt];
            chains.extend(compared.iter().copied().filter(|&c| c != DetectorKind::Glrt));
            let records = run_ber_sweep_multi(&cfg, &chains, None)?;
            let baseline: Vec<_> =
                records.iter().filter(|r| r.detector == "glrt").cloned().collect();
            let rest: Vec<_> = records.iter().filter(|r| r.detector != "glrt").cloned().collect();
            let rel = run_relative_metrics(&baseline, &rest)?;
            write_relative_csv(&mut std::io::stdout().lock(), &rel)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::FAILURE
        }
    }
}
