//! Pulse shape, frame timing, and waveform-level burst synthesis.
//!
//! The simulation grid is locked to the frame: the nominal sample step is
//! `Tm / 16`, rounded so that one frame is an integer number of samples.
//! That keeps frame shifts exact on the grid and makes the synthesis
//! linearity and shifting invariants hold to machine precision.
//!
//! Additive noise is band-limited white Gaussian noise of two-sided power
//! spectral density `N0 / 2` and one-sided bandwidth `W`.  `W` defaults to
//! `2 / Tm` (realized exactly as `1 / (8 dt)` on the grid), so noise samples
//! at Nyquist spacing `1 / (2 W) = 4 dt` are i.i.d. `N(0, N0 W)` and the grid
//! process is their band-limited interpolation.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::channel::ChannelRealization;
use crate::error::Error;
use crate::stc::DiffMatrix;

use std::f64::consts::PI;

/// Second-derivative-of-Gaussian monocycle, peak-normalized: `w(0) = 1`.
pub fn monocycle(t: f64, tm: f64) -> f64 {
    let x = t / tm;
    (1.0 - 4.0 * PI * x * x) * (-2.0 * PI * x * x).exp()
}

/// Pulse half-support used when rendering: `|w(t)| < 1e-15` beyond `2.5 Tm`.
pub const PULSE_HALF_SUPPORT_TM: f64 = 2.5;

/// Pulse energy `∫ w²(t) dt`; closed form `3 Tm / 8`.
pub fn pulse_energy(tm: f64) -> f64 {
    0.375 * tm
}

/// Frame/symbol timing and the derived simulation grid.
#[derive(Debug, Clone, Copy)]
pub struct FrameTiming {
    /// Pulse duration `Tm` (s).
    pub tm: f64,
    /// Frame duration `Tf` (s); one pulse per frame, two frames per symbol.
    pub tf: f64,
    /// Maximum excess delay `Tn` (s) of the channel.
    pub tn: f64,
    /// Correlator integration interval `Ti` (s).
    pub ti: f64,
    /// Samples per frame; `dt = tf / samples_per_frame`.
    pub samples_per_frame: usize,
    /// Sample step (s).
    pub dt: f64,
}

impl FrameTiming {
    /// Builds a timing grid.  `oversampling` is the nominal number of samples
    /// per pulse duration (default 16); the step is then adjusted so a frame
    /// is an integer number of samples.
    pub fn new(tm: f64, tf: f64, tn: f64, ti: f64, oversampling: usize) -> Result<Self, Error> {
        if tm <= 0.0 || tf <= 0.0 || tn <= 0.0 || ti <= 0.0 {
            return Err(Error::invalid_config("all durations must be positive"));
        }
        if tn > tf {
            return Err(Error::invalid_config(format!(
                "max excess delay {tn:e} s exceeds frame duration {tf:e} s"
            )));
        }
        if ti > tf {
            // The correlator segments one frame at a time; integration past the
            // frame boundary would mix adjacent pulses.
            return Err(Error::invalid_config(format!(
                "integration interval {ti:e} s exceeds frame duration {tf:e} s"
            )));
        }
        if oversampling < 4 {
            return Err(Error::invalid_config("oversampling must be at least 4"));
        }
        let nominal_dt = tm / oversampling as f64;
        let samples_per_frame = (tf / nominal_dt).round() as usize;
        // Nyquist spacing for W = 1/(8 dt) must divide the grid; force a
        // multiple of 4 samples per frame.
        let samples_per_frame = samples_per_frame.next_multiple_of(4);
        let dt = tf / samples_per_frame as f64;
        Ok(Self { tm, tf, tn, ti, samples_per_frame, dt })
    }

    /// Default experiment timing: `Tm = 0.287 ns`, `Tf = 80 ns`,
    /// `Tn = Ti = 40 ns`, 16 samples per pulse.
    pub fn defaults() -> Self {
        Self::new(0.287e-9, 80e-9, 40e-9, 40e-9, 16).expect("default timing is valid")
    }

    /// Symbol duration `Ts = 2 Tf`.
    pub fn ts(&self) -> f64 {
        2.0 * self.tf
    }

    pub fn samples_per_symbol(&self) -> usize {
        2 * self.samples_per_frame
    }

    /// Number of grid samples spanned by the integration interval.
    pub fn ti_samples(&self) -> usize {
        (self.ti / self.dt).round() as usize
    }

    /// Number of grid samples spanned by the maximum excess delay.
    pub fn tn_samples(&self) -> usize {
        (self.tn / self.dt).round() as usize
    }

    /// Pulse half-support in samples.
    pub fn pulse_pad_samples(&self) -> usize {
        (PULSE_HALF_SUPPORT_TM * self.tm / self.dt).ceil() as usize
    }

    /// One-sided noise bandwidth `W = 1/(8 dt)` (close to `2 / Tm`).
    pub fn noise_bandwidth(&self) -> f64 {
        1.0 / (8.0 * self.dt)
    }
}

/// Sampled received waveforms for one burst: the reference symbol plus `N`
/// information symbols, one waveform per receive antenna.
#[derive(Debug, Clone)]
pub struct ReceivedBurst {
    /// `y[q][sample]`.
    pub y: Vec<Vec<f64>>,
    /// Number of information symbols `N` (the burst spans `N + 1` symbols).
    pub n_symbols: usize,
    pub timing: FrameTiming,
    /// Noise power spectral density parameter `N0`.
    pub n0: f64,
    /// One-sided noise bandwidth `W` (Hz).
    pub w: f64,
}

impl ReceivedBurst {
    /// Start sample of frame `j`.
    pub fn frame_start(&self, j: usize) -> usize {
        j * self.timing.samples_per_frame
    }

    /// Segment of antenna `q` covering `[j Tf, j Tf + Ti]` inclusive of both
    /// endpoints (`ti_samples + 1` samples, ready for the trapezoid rule).
    pub fn frame_segment(&self, q: usize, j: usize) -> &[f64] {
        let s = self.frame_start(j);
        &self.y[q][s..=s + self.timing.ti_samples()]
    }

    pub fn num_frames(&self) -> usize {
        2 * (self.n_symbols + 1)
    }
}

/// Synthesizes the received burst for a differentially encoded symbol matrix
/// sequence over a fixed channel realization (quasi-static for the burst).
///
/// `diff` must contain the reference matrix followed by the encoded symbols
/// (`N + 1` matrices).  With `n0 = 0` the output is noiseless; otherwise the
/// RNG drives the band-limited noise.
pub fn synthesize_received(
    diff: &[DiffMatrix],
    ch: &ChannelRealization,
    n0: f64,
    rng: &mut ChaCha12Rng,
) -> Result<ReceivedBurst, Error> {
    if diff.is_empty() {
        return Err(Error::invalid_input("symbol sequence must not be empty"));
    }
    let timing = ch.timing;
    let spf = timing.samples_per_frame;
    let pad = timing.pulse_pad_samples();
    let n_frames = 2 * diff.len();
    let len = n_frames * spf + timing.tn_samples() + 2 * pad;
    let q_count = ch.num_rx();

    let mut y = vec![vec![0.0f64; len]; q_count];
    for (q, yq) in y.iter_mut().enumerate() {
        for p in 0..2 {
            let g = ch.composite(p, q);
            if g.samples.is_empty() {
                continue;
            }
            for (i, d) in diff.iter().enumerate() {
                let entries = d.entries();
                for n in 0..2 {
                    let amp = entries[p][n] as f64;
                    if amp == 0.0 {
                        continue;
                    }
                    let j = 2 * i + n;
                    // The composite starts g.start samples before the frame
                    // start (leading pulse tail).
                    let base = (j * spf) as i64 + g.start;
                    for (k, &gs) in g.samples.iter().enumerate() {
                        let idx = base + k as i64;
                        if idx >= 0 && (idx as usize) < len {
                            yq[idx as usize] += amp * gs;
                        }
                    }
                }
            }
        }
    }

    let w = timing.noise_bandwidth();
    if n0 > 0.0 {
        for yq in y.iter_mut() {
            add_bandlimited_noise(yq, n0, w, rng);
        }
    }

    Ok(ReceivedBurst { y, n_symbols: diff.len() - 1, timing, n0, w })
}

/// Interpolation kernel half-length in Nyquist samples.
const NOISE_KERNEL_HALF: usize = 12;
/// Grid samples per Nyquist sample (`1/(2W) = 4 dt`).
const NOISE_UPSAMPLE: usize = 4;

fn bessel_i0(x: f64) -> f64 {
    // Power series; converges quickly for the window arguments used here.
    let mut term = 1.0;
    let mut sum = 1.0;
    let half_x2 = 0.25 * x * x;
    for k in 1..40 {
        term *= half_x2 / ((k * k) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Polyphase kernel for band-limited interpolation from Nyquist-rate noise
/// samples to the grid; each phase is renormalized to unit energy so the
/// sample variance is preserved exactly.
fn noise_kernel() -> [Vec<f64>; NOISE_UPSAMPLE] {
    let beta = 10.0;
    let denom = bessel_i0(beta);
    let k = NOISE_KERNEL_HALF as f64;
    std::array::from_fn(|phase| {
        let frac = phase as f64 / NOISE_UPSAMPLE as f64;
        let mut taps: Vec<f64> = (-(NOISE_KERNEL_HALF as i64)..=NOISE_KERNEL_HALF as i64)
            .map(|j| {
                let x = j as f64 + frac;
                let win_arg = (x / k).clamp(-1.0, 1.0);
                let win = bessel_i0(beta * (1.0 - win_arg * win_arg).sqrt()) / denom;
                sinc(x) * win
            })
            .collect();
        let energy: f64 = taps.iter().map(|t| t * t).sum();
        let scale = 1.0 / energy.sqrt();
        for t in taps.iter_mut() {
            *t *= scale;
        }
        taps
    })
}

/// Adds band-limited white Gaussian noise (PSD `N0/2`, bandwidth `W`) to a
/// grid-sampled waveform.
pub fn add_bandlimited_noise(y: &mut [f64], n0: f64, w: f64, rng: &mut ChaCha12Rng) {
    let sigma = (n0 * w).sqrt();
    let kernel = noise_kernel();
    let n_nyq = y.len().div_ceil(NOISE_UPSAMPLE) + 2 * NOISE_KERNEL_HALF + 2;
    let nyq: Vec<f64> = (0..n_nyq)
        .map(|_| {
            // Box-Muller on ChaCha output keeps the stream layout stable.
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen::<f64>();
            sigma * (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
        })
        .collect();
    for (i, yi) in y.iter_mut().enumerate() {
        let m = i / NOISE_UPSAMPLE;
        let phase = i % NOISE_UPSAMPLE;
        let taps = &kernel[phase];
        // y(t) = sum_j x[m - j] h_phase[j], with x index offset so that the
        // kernel never runs off the front of the Nyquist buffer.
        let base = m + NOISE_KERNEL_HALF; // maps j = -K..K to base-j
        let mut acc = 0.0;
        for (jj, &h) in taps.iter().enumerate() {
            acc += h * nyq[base + NOISE_KERNEL_HALF - jj];
        }
        *yi = *yi + acc;
    }
}
