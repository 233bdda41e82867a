//! Multiplication-unit complexity accounting: formula values, instrumented
//! counts, and relative BER/complexity percentages against the exhaustive
//! hard detector.
//!
//! Run with: `cargo run --release -p uwb-msdd --example complexity_report`

use uwb_msdd::sim::{
    run_ber_sweep_multi, run_complexity_report, run_relative_metrics, write_complexity_csv,
    write_relative_csv, DetectorKind, SimConfig,
};

fn main() {
    let report = run_complexity_report(&[2, 3, 4, 5], &[2, 3]).unwrap();
    let mut csv = Vec::new();
    write_complexity_csv(&mut csv, &report).unwrap();
    println!("{}", String::from_utf8(csv).unwrap());

    // Relative metrics at one operating point, (M, L) = (3, 2).
    let mut cfg = SimConfig::default();
    cfg.m = 3;
    cfg.l = 2;
    cfg.n_symbols = 50;
    cfg.master_seed = 99;
    cfg.max_bits = 40_000;
    cfg.min_errors = 80;
    cfg.ebn0_db = vec![17.0];
    let chains = [
        DetectorKind::Glrt,
        DetectorKind::Bp,
        DetectorKind::VaHmsdd,
        DetectorKind::VaSmsdd,
    ];
    let records = run_ber_sweep_multi(&cfg, &chains, None).unwrap();
    let baseline: Vec<_> = records.iter().filter(|r| r.detector == "glrt").cloned().collect();
    let rest: Vec<_> = records.iter().filter(|r| r.detector != "glrt").cloned().collect();
    let rel = run_relative_metrics(&baseline, &rest).unwrap();
    let mut csv = Vec::new();
    write_relative_csv(&mut csv, &rel).unwrap();
    println!("relative metrics against the exhaustive hard detector at 17 dB:");
    println!("{}", String::from_utf8(csv).unwrap());
}
