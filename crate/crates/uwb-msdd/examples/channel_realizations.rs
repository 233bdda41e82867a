//! Stochastic multipath channel generation and CSV export.
//!
//! Run with: `cargo run --release -p uwb-msdd --example channel_realizations`

use uwb_msdd::channel::{gen_channel, ChannelProfile};
use uwb_msdd::waveform::FrameTiming;

fn main() {
    let timing = FrameTiming::defaults();

    for (name, profile) in [
        ("clustered", ChannelProfile::clustered_default()),
        ("single-exponential", ChannelProfile::single_exponential_default()),
        ("single-path", ChannelProfile::single_path(10e-9, 1.0)),
    ] {
        let ch = gen_channel(7, &profile, &timing, 2).unwrap();
        println!("{name} profile, Q = 2:");
        for p in 0..2 {
            for q in 0..2 {
                println!(
                    "  antenna pair ({p},{q}): {:3} taps, integrated energy {:.3}",
                    ch.taps(p, q).len(),
                    ch.eps(p, q)
                );
            }
        }
        println!("  total energy xi = {:.3}\n", ch.xi());
    }

    // The generator normalizes the ensemble so E[xi] = 2 Q.
    let profile = ChannelProfile::clustered_default();
    let trials = 2000;
    let mean: f64 =
        (0..trials).map(|s| gen_channel(s, &profile, &timing, 1).unwrap().xi()).sum::<f64>()
            / trials as f64;
    println!("mean xi over {trials} clustered realizations (Q = 1): {mean:.3} (target 2.0)");

    // Tap list export, one row per (p, q, l).
    let ch = gen_channel(42, &profile, &timing, 1).unwrap();
    let mut csv = Vec::new();
    ch.export_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    println!("\nfirst lines of the realization CSV:");
    for line in text.lines().take(6) {
        println!("  {line}");
    }
}
