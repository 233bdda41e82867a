//! Soft multiple-symbol detection on one noisy burst: forward/backward
//! messages over the tuple trellis, per-bit posteriors, and LLR splits.
//!
//! Run with: `cargo run --release -p uwb-msdd --example bp_detection`

use uwb_msdd::acr::{sample_windows, NoiseModel};
use uwb_msdd::channel::{gen_channel, ChannelProfile};
use uwb_msdd::rng::{substream, Stream};
use uwb_msdd::stc::{diff_encode, CodeMatrix, DiffMatrix};
use uwb_msdd::trellis::{bp_detect, BitPriors, Trellis};
use uwb_msdd::waveform::{synthesize_received, FrameTiming};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn main() {
    let timing = FrameTiming::defaults();
    let m = 2usize;
    let n = 10usize;
    let n0 = 0.06;

    let ch = gen_channel(21, &ChannelProfile::clustered_default(), &timing, 1).unwrap();
    let mut drng = StdRng::seed_from_u64(3);
    let syms: Vec<CodeMatrix> =
        (0..n).map(|_| CodeMatrix::from_index(drng.gen_range(0..4)).unwrap()).collect();
    let diff = diff_encode(&syms, DiffMatrix::reference()).unwrap();
    let mut nrng = substream(8, &[Stream::Noise as u64]);
    let burst = synthesize_received(&diff, &ch, n0, &mut nrng).unwrap();

    let set = sample_windows(&burst, m).unwrap();
    let noise = NoiseModel::genie(&ch, n0, burst.w).unwrap();
    let trellis = Trellis::new(m).unwrap();
    println!(
        "trellis: M = {m}, {} states, {} transitions per stage",
        trellis.num_states,
        trellis.num_transitions()
    );

    let out = bp_detect(&trellis, &set, &noise, &BitPriors::uniform(n)).unwrap();
    println!("\nper-symbol posteriors (true symbol starred):");
    for (i, app) in out.symbol_app.iter().enumerate() {
        let marks: Vec<String> = app
            .iter()
            .enumerate()
            .map(|(f, p)| {
                format!("{}{f}:{p:.3}", if f == syms[i].index() { "*" } else { " " })
            })
            .collect();
        println!("  symbol {:2}: {}", i + 1, marks.join("  "));
    }

    println!("\nper-bit statistics (decision statistic = P1 - P0):");
    for s in out.stats.iter().take(8) {
        println!(
            "  bit ({:2},{}): extrinsic LLR {:+8.2}, P(1) = {:.4}, decision {}",
            s.symbol, s.k, s.extrinsic_llr, s.app1, s.decision
        );
    }

    let hat = out.hard_symbols();
    let errors = hat.iter().zip(&syms).filter(|(a, b)| a != b).count();
    println!("\nsymbol errors on this burst: {errors}/{n}");
}
