//! Iterative detection and decoding.
//!
//! One burst carries `N` symbols = `2N` coded bits = `N - 6` information
//! bits (rate 1/2, six termination bits).  Each round exchanges extrinsic
//! information only: the detector's extrinsic bit LLRs are deinterleaved and
//! fed to the decoder; the decoder's extrinsic LLRs on the coded bits are
//! interleaved back and become the detector's a-priori probabilities for the
//! next round.  Feeding either side's full posterior back would re-circulate
//! a-priori information; a regression test guards the split.

use crate::acr::{NoiseModel, SampleSet};
use crate::coding::{siso_decode, ConvCode, Interleaver, SisoAlgo};
use crate::error::Error;
use crate::ops::OpCounter;
use crate::trellis::{bp_detect, BitPriors, Trellis};
use crate::viterbi::{va_smsdd, SoftCombine};

/// Which soft detector drives the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoftDetector {
    /// Forward/backward detector on the full `4^M`-state tuple trellis.
    Bp,
    /// Soft Viterbi detector with the given memory depth.
    VaSmsdd { l: usize },
}

/// Loop configuration.
#[derive(Debug, Clone, Copy)]
pub struct IddConfig {
    pub detector: SoftDetector,
    /// Number of detector/decoder rounds (1 = no feedback).
    pub iterations: usize,
    /// Aggregation rule for the soft Viterbi statistic.
    pub combine: SoftCombine,
    /// Prior clamp keeping log priors finite.
    pub prior_clamp: f64,
    pub siso: SisoAlgo,
    /// When false, feed the detector's full posterior back instead of the
    /// extrinsic part (diagnostic only; detectably worse).
    pub extrinsic_only: bool,
}

impl IddConfig {
    pub fn new(detector: SoftDetector, iterations: usize) -> Self {
        Self {
            detector,
            iterations,
            combine: SoftCombine::Max,
            prior_clamp: 1e-12,
            siso: SisoAlgo::MaxLog,
            extrinsic_only: true,
        }
    }
}

/// Per-iteration decoder decisions plus the final hard output.
#[derive(Debug, Clone)]
pub struct IddResult {
    /// Decoder hard information decisions after each round.
    pub per_iteration: Vec<Vec<u8>>,
    pub info_bits: Vec<u8>,
    /// Detector extrinsic LLRs per round (coded-bit order before
    /// deinterleaving), kept for convergence inspection.
    pub detector_extrinsics: Vec<Vec<f64>>,
}

/// Writes per-iteration LLR histograms as CSV (`iteration,bin_low,count`)
/// for convergence-chart style inspection.
pub fn write_llr_histograms_csv<W: std::io::Write>(
    out: &mut W,
    per_iteration_llrs: &[Vec<f64>],
    bins: usize,
    range: f64,
) -> Result<(), Error> {
    if bins == 0 || !(range > 0.0) {
        return Err(Error::invalid_input("histogram needs bins and a positive range"));
    }
    writeln!(out, "iteration,bin_low,count")?;
    let width = 2.0 * range / bins as f64;
    for (it, llrs) in per_iteration_llrs.iter().enumerate() {
        let mut counts = vec![0u64; bins];
        for &l in llrs {
            let idx = (((l + range) / width).floor() as i64).clamp(0, bins as i64 - 1) as usize;
            counts[idx] += 1;
        }
        for (b, c) in counts.iter().enumerate() {
            writeln!(out, "{},{:.6},{}", it + 1, -range + b as f64 * width, c)?;
        }
    }
    Ok(())
}

/// Number of information bits carried by a burst of `n_symbols` symbols.
pub fn info_bits_per_burst(code: &ConvCode, n_symbols: usize) -> Result<usize, Error> {
    if n_symbols <= code.memory {
        return Err(Error::invalid_config(format!(
            "burst of {n_symbols} symbols cannot carry the {}-bit termination tail",
            code.memory
        )));
    }
    Ok(n_symbols - code.memory)
}

/// Runs the iterative detection-and-decoding loop on one burst's samples.
pub fn idd_loop(
    set: &SampleSet,
    noise: &NoiseModel,
    code: &ConvCode,
    interleaver: &Interleaver,
    cfg: &IddConfig,
    ops: &mut OpCounter,
) -> Result<IddResult, Error> {
    if cfg.iterations < 1 {
        return Err(Error::invalid_input("at least one iteration required"));
    }
    let n = set.n_symbols;
    if interleaver.len() != 2 * n {
        return Err(Error::invalid_input(format!(
            "interleaver length {} must equal coded length {}",
            interleaver.len(),
            2 * n
        )));
    }
    info_bits_per_burst(code, n)?;

    let trellis = match cfg.detector {
        SoftDetector::Bp => Some(Trellis::new(set.m_order)?),
        SoftDetector::VaSmsdd { .. } => None,
    };

    let mut priors = BitPriors::uniform(n);
    let mut per_iteration = Vec::with_capacity(cfg.iterations);
    let mut detector_extrinsics = Vec::with_capacity(cfg.iterations);
    for _ in 0..cfg.iterations {
        // Detector pass: extrinsic LLR per coded bit, interleaved order.
        let det_ext: Vec<f64> = match cfg.detector {
            SoftDetector::Bp => {
                let out = bp_detect(trellis.as_ref().unwrap(), set, noise, &priors)?;
                out.stats
                    .iter()
                    .map(|s| {
                        if cfg.extrinsic_only {
                            s.extrinsic_llr
                        } else {
                            s.apriori_llr + s.extrinsic_llr
                        }
                    })
                    .collect()
            }
            SoftDetector::VaSmsdd { l } => {
                let bits = va_smsdd(set, l, noise, &priors, cfg.combine, ops)?;
                bits.iter()
                    .map(|b| if cfg.extrinsic_only { b.extrinsic_llr } else { b.llr })
                    .collect()
            }
        };
        if matches!(cfg.detector, SoftDetector::Bp) {
            // Unit accounting for the soft trellis pass.
            let m = set.m_order as u64;
            ops.add_units(n as u64 * m * (m + 1) * (1 << m) / 2);
        }

        detector_extrinsics.push(det_ext.clone());
        let decoder_in = interleaver.deinterleave(&det_ext);
        let dec = siso_decode(code, &decoder_in, cfg.siso)?;
        per_iteration.push(dec.info_bits.clone());

        // Decoder extrinsics become the detector priors for the next round.
        let fed_back = interleaver.interleave(&dec.coded_extrinsic);
        let mut p1 = Vec::with_capacity(n);
        for i in 0..n {
            let pr = |llr: f64| -> f64 {
                let p = 1.0 / (1.0 + (-llr).exp());
                p.clamp(cfg.prior_clamp, 1.0 - cfg.prior_clamp)
            };
            p1.push([pr(fed_back[2 * i]), pr(fed_back[2 * i + 1])]);
        }
        priors = BitPriors::new(p1)?;
    }

    let info_bits = per_iteration.last().cloned().unwrap();
    Ok(IddResult { per_iteration, info_bits, detector_extrinsics })
}

/// Non-iterative coded reception with a hard detector: the hard decisions
/// enter the decoder as fixed-confidence LLRs.
pub fn decode_hard_bits(
    code: &ConvCode,
    interleaver: &Interleaver,
    detected_bits: &[u8],
    siso: SisoAlgo,
) -> Result<Vec<u8>, Error> {
    let llrs: Vec<f64> = detected_bits.iter().map(|&b| if b == 1 { 2.0 } else { -2.0 }).collect();
    let decoder_in = interleaver.deinterleave(&llrs);
    Ok(siso_decode(code, &decoder_in, siso)?.info_bits)
}
