//! Autocorrelation-receiver sampling: sliding observation windows, the
//! noiseless sample identity, and the energy estimate.
//!
//! Run with: `cargo run --release -p uwb-msdd --example correlator_windows`

use rand_chacha::rand_core::SeedableRng;
use uwb_msdd::acr::{estimate_xi_calibrated, sample_windows};
use uwb_msdd::channel::{ChannelRealization, Tap};
use uwb_msdd::stc::{diff_encode, product_of_symbols, CodeMatrix, DiffMatrix};
use uwb_msdd::waveform::{pulse_energy, synthesize_received, FrameTiming};

fn main() {
    let timing = FrameTiming::defaults();
    // Two orthogonal unit-energy single-tap channels make the sample
    // identity exact.
    let gain = (1.0 / pulse_energy(timing.tm)).sqrt();
    let ch = ChannelRealization::from_taps(
        vec![
            vec![vec![Tap { delay_s: 6e-9, gain }]],
            vec![vec![Tap { delay_s: 26e-9, gain }]],
        ],
        timing,
    );
    let xi = ch.xi();

    let syms: Vec<CodeMatrix> =
        [2usize, 0, 3, 1, 2].iter().map(|&f| CodeMatrix::from_index(f).unwrap()).collect();
    let diff = diff_encode(&syms, DiffMatrix::reference()).unwrap();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
    let burst = synthesize_received(&diff, &ch, 0.0, &mut rng).unwrap();

    let set = sample_windows(&burst, 3).unwrap();
    println!("windows slide one symbol at a time; early lag sets are truncated:");
    for w in set.windows() {
        let lags: Vec<usize> = w.lags.iter().map(|s| s.m).collect();
        println!("  window {} carries lags {:?}", w.i, lags);
    }

    // Noiseless samples equal xi times the transposed symbol product.
    println!("\nnoiseless sample identity (xi = {xi:.3}):");
    for m in 1..=3usize {
        let y = set.get(3, m);
        let t = product_of_symbols(&syms[3 - m..3]).transpose();
        println!(
            "  Y(3,{m}) = [{:6.3} {:6.3}; {:6.3} {:6.3}]  expected xi * {:?}-transpose pattern",
            y.0[0][0],
            y.0[0][1],
            y.0[1][0],
            y.0[1][1],
            t.transpose().index()
        );
    }

    println!("\ncalibrated energy estimate: {:.4} (genie {:.4})", estimate_xi_calibrated(&set), xi);

    let mut csv = Vec::new();
    set.export_csv(&mut csv).unwrap();
    println!("\nfirst lines of the window CSV:");
    for line in String::from_utf8(csv).unwrap().lines().take(5) {
        println!("  {line}");
    }
}
