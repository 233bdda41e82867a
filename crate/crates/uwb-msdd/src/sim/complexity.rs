//! Multiplication-unit complexity accounting and relative metrics.
//!
//! Formula values follow the standard per-window/per-stage unit counts of
//! the four detectors; instrumented counts come from the detectors' own
//! counters on a reference workload.  Because the code book is quaternary,
//! the report also prints the candidate-tuple state count `4^M` next to the
//! binary-convention count `2^M` the formulas are expressed in.

use crate::acr::{sample_windows, NoiseModel};
use crate::channel::gen_channel;
use crate::error::Error;
use crate::glrt::glrt_detect;
use crate::ops::OpCounter;
use crate::rng::{derive_seed, substream, Stream};
use crate::sim::config::{DetectorKind, SimConfig};
use crate::sim::sweep::BerRecord;
use crate::stc::{diff_encode, CodeMatrix, DiffMatrix};
use crate::trellis::{bp_detect, BitPriors, Trellis};
use crate::viterbi::{va_hmsdd, va_smsdd, SoftCombine};

use rand::Rng;
use serde::Serialize;

/// Formula multiplication units per window/stage.
pub fn formula_units(kind: DetectorKind, m: usize, l: usize) -> u64 {
    let m = m as u64;
    let l = l as u64;
    match kind {
        DetectorKind::Glrt | DetectorKind::CodedGlrt => (m + 1) << m,
        DetectorKind::VaHmsdd => (l + 1) << l,
        DetectorKind::Bp | DetectorKind::IddBp => m * (m + 1) << m,
        DetectorKind::VaSmsdd | DetectorKind::IddVaSmsdd => m * (l + 1) << l,
        DetectorKind::Dd => 4,
        DetectorKind::Rake => 0,
    }
}

/// One row of the complexity report.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexityRow {
    pub detector: String,
    pub m: usize,
    pub l: usize,
    /// Formula multiplication units.
    pub formula_units: u64,
    /// Instrumented units per window/stage on the reference workload.
    pub measured_units_per_stage: f64,
    /// Raw executed 2x2 inner products per stage (shared-trace
    /// implementation).
    pub measured_trace_evals_per_stage: f64,
    /// State count in the binary convention the formulas use.
    pub states_binary: u64,
    /// Candidate-tuple state count of the quaternary code book.
    pub states_tuple: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexityReport {
    pub rows: Vec<ComplexityRow>,
}

fn measured_counts(kind: DetectorKind, m: usize, l: usize, seed: u64) -> Result<(f64, f64), Error> {
    // Reference workload: one moderate burst, dense channel.
    let cfg = SimConfig::default();
    let n = 24usize;
    let timing = cfg.timing;
    let ch = gen_channel(derive_seed(seed, &[m as u64, l as u64]), &cfg.profile, &timing, 1)?;
    let mut rng = substream(seed, &[Stream::Data as u64, m as u64, l as u64]);
    let syms: Vec<CodeMatrix> =
        (0..n).map(|_| CodeMatrix::from_index(rng.gen_range(0..4)).unwrap()).collect();
    let diff = diff_encode(&syms, DiffMatrix::reference())?;
    let mut nrng = substream(seed, &[Stream::Noise as u64, m as u64]);
    let n0 = cfg.n0_for_ebn0_db(12.0);
    let burst = crate::waveform::synthesize_received(&diff, &ch, n0, &mut nrng)?;
    let set = sample_windows(&burst, m)?;
    let noise = NoiseModel::genie(&ch, n0, burst.w)?;

    let mut ops = OpCounter::new();
    let stages: f64;
    match kind {
        DetectorKind::Glrt => {
            glrt_detect(&set, &mut ops)?;
            stages = (n - m + 1) as f64; // sliding window anchors
        }
        DetectorKind::Bp => {
            let trellis = Trellis::new(m)?;
            bp_detect(&trellis, &set, &noise, &BitPriors::uniform(n))?;
            let mu = m as u64;
            ops.add_units(n as u64 * mu * (mu + 1) * (1 << mu) / 2);
            // Residual (Frobenius) evaluations the stage tables execute:
            // one per (tuple, lag), with truncated lag sets at the start.
            let lags: u64 = (1..=n as u64).map(|i| i.min(mu)).sum();
            ops.add_trace_evals(lags * (1 << (2 * m)));
            stages = n as f64;
        }
        DetectorKind::VaHmsdd => {
            va_hmsdd(&set, l, &mut ops)?;
            stages = (n - m + 1) as f64; // sliding window anchors
        }
        DetectorKind::VaSmsdd => {
            va_smsdd(&set, l, &noise, &BitPriors::uniform(n), SoftCombine::Max, &mut ops)?;
            stages = n as f64;
        }
        other => {
            return Err(Error::invalid_input(format!(
                "no instrumented workload for {}",
                other.label()
            )))
        }
    }
    Ok((ops.units as f64 / stages, ops.trace_evals as f64 / stages))
}

/// Builds the complexity report over ranges of `M` (and `L` for the
/// truncated detectors; rows with `L > M` are skipped).
pub fn run_complexity_report(m_range: &[usize], l_range: &[usize]) -> Result<ComplexityReport, Error> {
    if m_range.is_empty() || l_range.is_empty() {
        return Err(Error::invalid_input("empty parameter range"));
    }
    let mut rows = Vec::new();
    for &m in m_range {
        for kind in [DetectorKind::Glrt, DetectorKind::Bp] {
            let (units, traces) = measured_counts(kind, m, m, 11)?;
            rows.push(ComplexityRow {
                detector: kind.label().to_string(),
                m,
                l: m,
                formula_units: formula_units(kind, m, m),
                measured_units_per_stage: units,
                measured_trace_evals_per_stage: traces,
                states_binary: 1 << m,
                states_tuple: 1 << (2 * m),
            });
        }
        for &l in l_range {
            if l > m {
                continue;
            }
            for kind in [DetectorKind::VaHmsdd, DetectorKind::VaSmsdd] {
                let (units, traces) = measured_counts(kind, m, l, 13)?;
                rows.push(ComplexityRow {
                    detector: kind.label().to_string(),
                    m,
                    l,
                    formula_units: formula_units(kind, m, l),
                    measured_units_per_stage: units,
                    measured_trace_evals_per_stage: traces,
                    states_binary: 1 << l,
                    states_tuple: 1 << (2 * l),
                });
            }
        }
    }
    Ok(ComplexityReport { rows })
}

/// Relative complexity and BER of a chain against the exhaustive hard
/// detector at matched `(M, L, SNR)`.
#[derive(Debug, Clone, Serialize)]
pub struct RelativeRecord {
    pub detector: String,
    pub m: usize,
    pub l: usize,
    pub ebn0_db: f64,
    /// `(C_compared - C_baseline) / C_baseline * 100`.
    pub rel_complexity_pct: f64,
    /// `(B_baseline - B_compared) / B_baseline * 100`; `None` when the
    /// baseline BER is zero (undefined rather than infinite).
    pub rel_ber_pct: Option<f64>,
}

/// Pairs baseline (exhaustive hard detection) records with a compared
/// chain's records at matched SNR points.
pub fn run_relative_metrics(
    baseline: &[BerRecord],
    compared: &[BerRecord],
) -> Result<Vec<RelativeRecord>, Error> {
    let mut out = Vec::new();
    for c in compared {
        let b = baseline
            .iter()
            .find(|b| b.ebn0_db == c.ebn0_db && b.m == c.m && b.q == c.q)
            .ok_or_else(|| {
                Error::invalid_input(format!(
                    "no baseline record at Eb/N0 = {} dB for M = {}",
                    c.ebn0_db, c.m
                ))
            })?;
        let kind = DetectorKind::parse(&c.detector)?;
        let base_units = formula_units(DetectorKind::Glrt, b.m, b.l) as f64;
        let comp_units = formula_units(kind, c.m, c.l) as f64;
        let rel_c = (comp_units - base_units) / base_units * 100.0;
        let rel_b = if b.ber > 0.0 { Some((b.ber - c.ber) / b.ber * 100.0) } else { None };
        out.push(RelativeRecord {
            detector: c.detector.clone(),
            m: c.m,
            l: c.l,
            ebn0_db: c.ebn0_db,
            rel_complexity_pct: rel_c,
            rel_ber_pct: rel_b,
        });
    }
    Ok(out)
}
