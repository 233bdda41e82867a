//! Hard and soft Viterbi detection over the truncated window metric, and
//! their relation to exhaustive window search.
//!
//! Run with: `cargo run --release -p uwb-msdd --example viterbi_detection`

use uwb_msdd::acr::{sample_windows, NoiseModel};
use uwb_msdd::channel::{gen_channel, ChannelProfile};
use uwb_msdd::glrt::glrt_detect;
use uwb_msdd::ops::OpCounter;
use uwb_msdd::rng::{substream, Stream};
use uwb_msdd::stc::{diff_encode, CodeMatrix, DiffMatrix};
use uwb_msdd::trellis::BitPriors;
use uwb_msdd::viterbi::{va_hmsdd, va_smsdd, SoftCombine};
use uwb_msdd::waveform::{synthesize_received, FrameTiming};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn main() {
    let timing = FrameTiming::defaults();
    let m = 3usize;
    let n = 24usize;
    let n0 = 0.08;

    let ch = gen_channel(5, &ChannelProfile::clustered_default(), &timing, 1).unwrap();
    let mut drng = StdRng::seed_from_u64(11);
    let syms: Vec<CodeMatrix> =
        (0..n).map(|_| CodeMatrix::from_index(drng.gen_range(0..4)).unwrap()).collect();
    let diff = diff_encode(&syms, DiffMatrix::reference()).unwrap();
    let mut nrng = substream(17, &[Stream::Noise as u64]);
    let burst = synthesize_received(&diff, &ch, n0, &mut nrng).unwrap();
    let set = sample_windows(&burst, m).unwrap();

    let errors = |hat: &[CodeMatrix]| hat.iter().zip(&syms).filter(|(a, b)| a != b).count();

    let mut ops = OpCounter::new();
    let exhaustive = glrt_detect(&set, &mut ops).unwrap();
    println!("exhaustive window search:    {} symbol errors, {} units", errors(&exhaustive), ops.units);

    for l in 1..=m {
        let mut ops = OpCounter::new();
        let hat = va_hmsdd(&set, l, &mut ops).unwrap();
        let same = hat == exhaustive;
        println!(
            "hard Viterbi  L = {l}:        {} symbol errors, {:5} units{}",
            errors(&hat),
            ops.units,
            if same { "  (identical to exhaustive)" } else { "" }
        );
    }

    // Soft statistics from the reduced-memory detector.
    let noise = NoiseModel::genie(&ch, n0, burst.w).unwrap();
    let mut ops = OpCounter::new();
    let soft = va_smsdd(&set, m - 1, &noise, &BitPriors::uniform(n), SoftCombine::Max, &mut ops)
        .unwrap();
    let bit_errors = soft
        .iter()
        .filter(|b| b.decision != syms[b.symbol - 1].bit(b.k))
        .count();
    println!("\nsoft Viterbi L = {} decision statistics (first symbols):", m - 1);
    for b in soft.iter().take(6) {
        println!("  bit ({:2},{}): iota {:+9.2}, extrinsic {:+9.2}", b.symbol, b.k, b.iota, b.extrinsic_llr);
    }
    println!("soft Viterbi bit errors: {bit_errors}/{}", 2 * n);
}
