//! Seeded Monte Carlo BER sweep over several chains, with CSV and JSON
//! emission (the same machinery behind `msdd simulate` / `msdd sweep`).
//!
//! Run with: `cargo run --release -p uwb-msdd --example ber_sweep`

use uwb_msdd::sim::{
    interpolate_snr_at_ber, run_ber_sweep_multi, write_ber_csv, write_json_summary, DetectorKind,
    SimConfig,
};

fn main() {
    let mut cfg = SimConfig::default();
    cfg.m = 2;
    cfg.l = 2;
    cfg.n_symbols = 50;
    cfg.master_seed = 7;
    cfg.max_bits = 30_000;
    cfg.min_errors = 60;
    cfg.ebn0_db = vec![14.0, 16.0, 18.0, 20.0];

    let chains = [DetectorKind::Dd, DetectorKind::Glrt, DetectorKind::Bp];
    let records = run_ber_sweep_multi(&cfg, &chains, None).unwrap();

    let mut csv = Vec::new();
    write_ber_csv(&mut csv, &records).unwrap();
    println!("{}", String::from_utf8(csv).unwrap());

    for name in ["dd", "glrt", "bp"] {
        let curve: Vec<_> = records.iter().filter(|r| r.detector == name).cloned().collect();
        if let Some(snr) = interpolate_snr_at_ber(&curve, 1e-2) {
            println!("{name}: BER 1e-2 at about {snr:.2} dB");
        }
    }

    let mut json = Vec::new();
    write_json_summary(&mut json, &cfg, &records).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    println!("\nJSON summary: build {} with {} records", v["build"], v["records"].as_array().unwrap().len());
}
