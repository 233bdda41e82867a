//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)] // each test binary uses a different subset

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use uwb_msdd::acr::{sample_windows, NoiseModel, SampleSet};
use uwb_msdd::channel::{ChannelProfile, ChannelRealization, Tap};
use uwb_msdd::rng::{derive_seed, substream, Stream};
use uwb_msdd::stc::{diff_encode, CodeMatrix, DiffMatrix};
use uwb_msdd::waveform::{pulse_energy, synthesize_received, FrameTiming, ReceivedBurst};

/// Two orthogonal single-tap transmit channels with exactly balanced unit
/// energies; the ideal-sample identity is exact up to discretization.
pub fn orthogonal_channel(timing: &FrameTiming, num_rx: usize) -> ChannelRealization {
    let gain = (1.0 / pulse_energy(timing.tm)).sqrt();
    let mut taps = vec![vec![Vec::new(); num_rx], vec![Vec::new(); num_rx]];
    for q in 0..num_rx {
        taps[0][q].push(Tap { delay_s: 6e-9, gain });
        taps[1][q].push(Tap { delay_s: 26e-9, gain });
    }
    ChannelRealization::from_taps(taps, *timing)
}

pub fn random_symbols(n: usize, rng: &mut StdRng) -> Vec<CodeMatrix> {
    (0..n).map(|_| CodeMatrix::from_index(rng.gen_range(0..4)).unwrap()).collect()
}

pub fn symbols_to_bits(syms: &[CodeMatrix]) -> Vec<u8> {
    syms.iter()
        .flat_map(|u| {
            let (a, b) = u.bits();
            [a, b]
        })
        .collect()
}

/// Synthesizes one burst over the given channel.
pub fn make_burst(
    syms: &[CodeMatrix],
    ch: &ChannelRealization,
    n0: f64,
    noise_rng: &mut ChaCha12Rng,
) -> ReceivedBurst {
    let diff = diff_encode(syms, DiffMatrix::reference()).unwrap();
    synthesize_received(&diff, ch, n0, noise_rng).unwrap()
}

/// Random clustered-channel burst with genie noise model and window samples.
pub struct TestBurst {
    pub syms: Vec<CodeMatrix>,
    pub set: SampleSet,
    pub noise: NoiseModel,
    pub xi: f64,
}

pub fn random_clustered_burst(
    n: usize,
    m: usize,
    q: usize,
    n0: f64,
    seed: u64,
) -> TestBurst {
    let timing = FrameTiming::defaults();
    let profile = ChannelProfile::clustered_default();
    let ch = uwb_msdd::channel::gen_channel(
        derive_seed(seed, &[Stream::Channel as u64]),
        &profile,
        &timing,
        q,
    )
    .unwrap();
    let mut drng = StdRng::seed_from_u64(derive_seed(seed, &[Stream::Data as u64]));
    let syms = random_symbols(n, &mut drng);
    let mut nrng = substream(seed, &[Stream::Noise as u64]);
    let burst = make_burst(&syms, &ch, n0, &mut nrng);
    let noise = NoiseModel::genie(&ch, n0.max(1e-4), burst.w).unwrap();
    let set = sample_windows(&burst, m).unwrap();
    TestBurst { syms, set, noise, xi: ch.xi() }
}
