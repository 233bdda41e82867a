//! Coherent rake reference versus the noncoherent soft detector, plus a
//! finger-count sweep.
//!
//! Run with: `cargo run --release -p uwb-msdd --example rake_baseline`

use uwb_msdd::channel::{gen_channel, ChannelProfile};
use uwb_msdd::rng::{derive_seed, substream, Stream};
use uwb_msdd::sim::{rake_detect, run_ber_sweep_multi, DetectorKind, SimConfig};
use uwb_msdd::stc::{diff_encode, CodeMatrix, DiffMatrix};
use uwb_msdd::waveform::synthesize_received;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn main() {
    let mut cfg = SimConfig::default();
    cfg.m = 2;
    cfg.n_symbols = 30;
    cfg.master_seed = 11;
    cfg.max_bits = 20_000;
    cfg.min_errors = 40;
    cfg.ebn0_db = vec![10.0, 13.0, 16.0];
    let records =
        run_ber_sweep_multi(&cfg, &[DetectorKind::Bp, DetectorKind::Rake], None).unwrap();
    println!("coherent floor (12 fingers, genie channel) vs noncoherent soft detection:");
    for db in &cfg.ebn0_db {
        let bp = records.iter().find(|r| r.detector == "bp" && r.ebn0_db == *db).unwrap();
        let rk = records.iter().find(|r| r.detector == "rake" && r.ebn0_db == *db).unwrap();
        println!("  {db:>5} dB: rake {:.3e}   soft {:.3e}", rk.ber, bp.ber);
    }

    // Finger sweep on a fixed workload.
    println!("\nfinger sweep at 10 dB (symbol error rate):");
    let n0 = cfg.n0_for_ebn0_db(10.0);
    for fingers in [1usize, 4, 8, 12, 24, usize::MAX] {
        let mut errs = 0u64;
        let mut total = 0u64;
        for b in 0..300u64 {
            let ch = gen_channel(
                derive_seed(500, &[b]),
                &ChannelProfile::clustered_default(),
                &cfg.timing,
                1,
            )
            .unwrap();
            let mut drng = StdRng::seed_from_u64(b);
            let syms: Vec<CodeMatrix> =
                (0..20).map(|_| CodeMatrix::from_index(drng.gen_range(0..4)).unwrap()).collect();
            let diff = diff_encode(&syms, DiffMatrix::reference()).unwrap();
            let mut nrng = substream(b, &[Stream::Noise as u64]);
            let burst = synthesize_received(&diff, &ch, n0, &mut nrng).unwrap();
            let hat = rake_detect(&burst, &ch, fingers).unwrap();
            errs += hat.iter().zip(&syms).filter(|(a, b)| a != b).count() as u64;
            total += syms.len() as u64;
        }
        let label =
            if fingers == usize::MAX { "all".to_string() } else { format!("{fingers:3}") };
        println!("  {label} fingers: {:.3e}", errs as f64 / total as f64);
    }
}
