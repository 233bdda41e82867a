//! Seeded Monte Carlo BER sweeps.
//!
//! Per SNR point, bursts are processed in fixed-size batches distributed
//! over a worker pool.  Every burst derives its channel, data, and noise
//! streams from `(master seed, point index, burst index)` alone, and batch
//! results are reduced in burst order, so a sweep is bit-reproducible for
//! any worker count.  A point stops once every requested chain has collected
//! `min_errors` bit errors or the bit budget is exhausted, whichever comes
//! first.
//!
//! Several chains can run over the same bursts in one pass (they share the
//! synthesized waveforms and correlation samples), producing one record per
//! (chain, SNR point).

use crate::acr::{estimate_xi_calibrated, sample_windows, NoiseModel, SampleSet};
use crate::channel::gen_channel;
use crate::coding::{ConvCode, Interleaver};
use crate::error::Error;
use crate::glrt::{dd_detect, glrt_detect};
use crate::idd::{decode_hard_bits, idd_loop, IddConfig, SoftDetector};
use crate::ops::OpCounter;
use crate::rng::{derive_seed, substream, Stream};
use crate::sim::config::{DetectorKind, SimConfig, XiMode};
use crate::sim::rake::rake_detect;
use crate::stc::{diff_encode, CodeMatrix, DiffMatrix};
use crate::trellis::{bp_detect, BitPriors, Trellis};
use crate::viterbi::{va_hmsdd, va_smsdd};
use crate::waveform::synthesize_received;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::time::Instant;

/// One (chain, SNR point) result row.
#[derive(Debug, Clone, Serialize)]
pub struct BerRecord {
    pub detector: String,
    pub m: usize,
    pub l: usize,
    pub q: usize,
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    /// 95% confidence half width (binomial normal approximation).
    pub ci95: f64,
    /// Accumulated metric multiplication units.
    pub ops: u64,
    pub wall_s: f64,
}

impl BerRecord {
    pub fn ci_overlaps(&self, other: &BerRecord) -> bool {
        (self.ber - other.ber).abs() <= self.ci95 + other.ci95
    }
}

/// Decisions of one chain on one burst (for the audit log).
#[derive(Debug, Clone)]
struct BurstDecisions {
    detector: &'static str,
    truth: Vec<u8>,
    decided: Vec<u8>,
}

#[derive(Debug, Clone, Default)]
struct BurstOutcome {
    /// Per requested chain: (errors, bits).
    tallies: Vec<(u64, u64)>,
    ops: Vec<OpCounter>,
    decisions: Vec<BurstDecisions>,
}

/// Runs one burst through every requested chain.
fn run_burst(
    cfg: &SimConfig,
    chains: &[DetectorKind],
    point: usize,
    burst: usize,
    n0: f64,
    keep_decisions: bool,
) -> Result<BurstOutcome, Error> {
    let seed = cfg.master_seed;
    let tags = |s: Stream| [point as u64, burst as u64, s as u64];
    let ch_seed = derive_seed(seed, &tags(Stream::Channel));
    let ch = gen_channel(ch_seed, &cfg.profile, &cfg.timing, cfg.q)?;

    let mut data_rng = substream(seed, &tags(Stream::Data));
    let code = ConvCode::standard();
    let any_coded = chains.iter().any(|c| c.is_coded());
    let any_uncoded = chains.iter().any(|c| !c.is_coded());
    if any_coded && any_uncoded {
        return Err(Error::invalid_config(
            "coded and uncoded chains use different Eb accounting; run them separately",
        ));
    }

    // Transmitted bits: either raw symbol bits or interleaved coded bits.
    let (info_bits, symbol_bits, interleaver) = if any_coded {
        let k = cfg.n_symbols - code.memory;
        let info: Vec<u8> = (0..k).map(|_| data_rng.gen_range(0..2u8)).collect();
        let coded = code.encode(&info);
        let il = Interleaver::random(coded.len(), derive_seed(seed, &tags(Stream::Interleaver)));
        let tx = il.interleave(&coded);
        (info, tx, Some(il))
    } else {
        let bits: Vec<u8> = (0..2 * cfg.n_symbols).map(|_| data_rng.gen_range(0..2u8)).collect();
        (bits.clone(), bits, None)
    };
    let syms: Vec<CodeMatrix> =
        symbol_bits.chunks(2).map(|b| CodeMatrix::from_bits(b[0], b[1])).collect();
    let diff = diff_encode(&syms, DiffMatrix::reference())?;

    let mut noise_rng = substream(seed, &tags(Stream::Noise));
    let rx = synthesize_received(&diff, &ch, n0, &mut noise_rng)?;

    // Sample sets shared between chains that use the same window order.
    let need_m = chains.iter().any(|c| {
        matches!(
            c,
            DetectorKind::Glrt
                | DetectorKind::Bp
                | DetectorKind::VaHmsdd
                | DetectorKind::VaSmsdd
                | DetectorKind::CodedGlrt
                | DetectorKind::IddBp
                | DetectorKind::IddVaSmsdd
        )
    });
    let set_m: Option<SampleSet> = if need_m { Some(sample_windows(&rx, cfg.m)?) } else { None };
    let reuse_for_dd = cfg.m == 1 && set_m.is_some();
    let set_1: Option<SampleSet> = if chains.contains(&DetectorKind::Dd) && !reuse_for_dd {
        Some(sample_windows(&rx, 1)?)
    } else {
        None
    };

    let noise_for = |set: &SampleSet| -> Result<NoiseModel, Error> {
        let xi = match cfg.xi_mode {
            XiMode::Genie => ch.xi(),
            XiMode::Estimated => estimate_xi_calibrated(set),
        };
        NoiseModel::new(xi, n0.max(1e-12), rx.w, cfg.timing.ti, cfg.q)
    };

    let mut out = BurstOutcome::default();
    for &chain in chains {
        let mut ops = OpCounter::new();
        let decided_bits: Vec<u8> = match chain {
            DetectorKind::Dd => {
                let set = set_1.as_ref().or(set_m.as_ref()).unwrap();
                symbols_to_bits(&dd_detect(set, &mut ops)?)
            }
            DetectorKind::Glrt => symbols_to_bits(&glrt_detect(set_m.as_ref().unwrap(), &mut ops)?),
            DetectorKind::Bp => {
                let set = set_m.as_ref().unwrap();
                let trellis = Trellis::new(cfg.m)?;
                let noise = noise_for(set)?;
                let det = bp_detect(&trellis, set, &noise, &BitPriors::uniform(cfg.n_symbols))?;
                let m = cfg.m as u64;
                ops.add_units(cfg.n_symbols as u64 * m * (m + 1) * (1 << m) / 2);
                det.hard_bits()
            }
            DetectorKind::VaHmsdd => {
                symbols_to_bits(&va_hmsdd(set_m.as_ref().unwrap(), cfg.l, &mut ops)?)
            }
            DetectorKind::VaSmsdd => {
                let set = set_m.as_ref().unwrap();
                let noise = noise_for(set)?;
                va_smsdd(set, cfg.l, &noise, &BitPriors::uniform(cfg.n_symbols), cfg.combine, &mut ops)?
                    .iter()
                    .map(|b| b.decision)
                    .collect()
            }
            DetectorKind::Rake => symbols_to_bits(&rake_detect(&rx, &ch, cfg.rake_fingers)?),
            DetectorKind::CodedGlrt => {
                let set = set_m.as_ref().unwrap();
                let hard = symbols_to_bits(&glrt_detect(set, &mut ops)?);
                decode_hard_bits(&code, interleaver.as_ref().unwrap(), &hard, cfg.siso)?
            }
            DetectorKind::IddBp | DetectorKind::IddVaSmsdd => {
                let set = set_m.as_ref().unwrap();
                let noise = noise_for(set)?;
                let det = if chain == DetectorKind::IddBp {
                    SoftDetector::Bp
                } else {
                    SoftDetector::VaSmsdd { l: cfg.l }
                };
                let mut icfg = IddConfig::new(det, cfg.iterations);
                icfg.combine = cfg.combine;
                icfg.siso = cfg.siso;
                idd_loop(set, &noise, &code, interleaver.as_ref().unwrap(), &icfg, &mut ops)?
                    .info_bits
            }
        };
        let truth: &[u8] = if chain.is_coded() { &info_bits } else { &symbol_bits };
        let errors = truth.iter().zip(&decided_bits).filter(|(a, b)| a != b).count() as u64;
        out.tallies.push((errors, truth.len() as u64));
        out.ops.push(ops);
        if keep_decisions {
            out.decisions.push(BurstDecisions {
                detector: chain.label(),
                truth: truth.to_vec(),
                decided: decided_bits,
            });
        }
    }
    Ok(out)
}

fn symbols_to_bits(syms: &[CodeMatrix]) -> Vec<u8> {
    syms.iter()
        .flat_map(|u| {
            let (b1, b2) = u.bits();
            [b1, b2]
        })
        .collect()
}

fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

/// Runs several chains over shared bursts, one record per (chain, point).
///
/// `audit` receives one line per (burst, chain) with the true and decided
/// bit strings, enough to recount every reported error.
pub fn run_ber_sweep_multi(
    cfg: &SimConfig,
    chains: &[DetectorKind],
    mut audit: Option<&mut dyn Write>,
) -> Result<Vec<BerRecord>, Error> {
    if chains.is_empty() {
        return Err(Error::invalid_input("no chains requested"));
    }
    cfg.validate()?;
    if let Some(w) = audit.as_deref_mut() {
        writeln!(w, "point,ebn0_db,burst,detector,truth,decided")?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::invalid_config(format!("worker pool: {e}")))?;

    let batch: usize = 64;
    let mut records = Vec::new();
    for (point, &db) in cfg.ebn0_db.iter().enumerate() {
        let started = Instant::now();
        let n0 = cfg.n0_for_ebn0_db(db);
        let mut errors = vec![0u64; chains.len()];
        let mut bits = vec![0u64; chains.len()];
        let mut ops = vec![OpCounter::new(); chains.len()];
        let mut next_burst = 0usize;
        loop {
            let done_bits = bits.iter().copied().max().unwrap_or(0) >= cfg.max_bits;
            let done_errors = errors.iter().all(|&e| e >= cfg.min_errors);
            if done_bits || (done_errors && next_burst > 0) {
                break;
            }
            let range: Vec<usize> = (next_burst..next_burst + batch).collect();
            next_burst += batch;
            let keep = audit.is_some();
            let outcomes: Vec<(usize, Result<BurstOutcome, Error>)> = pool.install(|| {
                range
                    .par_iter()
                    .map(|&b| (b, run_burst(cfg, chains, point, b, n0, keep)))
                    .collect()
            });
            // Reduce strictly in burst order.
            for (b, res) in outcomes {
                let outcome = res?;
                for (c, &(e, n)) in outcome.tallies.iter().enumerate() {
                    errors[c] += e;
                    bits[c] += n;
                    ops[c].merge(&outcome.ops[c]);
                }
                if let Some(w) = audit.as_deref_mut() {
                    for d in &outcome.decisions {
                        writeln!(
                            w,
                            "{point},{db},{b},{},{},{}",
                            d.detector,
                            bits_to_string(&d.truth),
                            bits_to_string(&d.decided)
                        )?;
                    }
                }
            }
        }
        let wall = started.elapsed().as_secs_f64();
        for (c, &chain) in chains.iter().enumerate() {
            let ber = if bits[c] > 0 { errors[c] as f64 / bits[c] as f64 } else { f64::NAN };
            records.push(BerRecord {
                detector: chain.label().to_string(),
                m: if chain == DetectorKind::Dd { 1 } else { cfg.m },
                l: effective_l(chain, cfg),
                q: cfg.q,
                ebn0_db: db,
                bits: bits[c],
                errors: errors[c],
                ber,
                ci95: crate::util::binomial_ci95_half_width(errors[c], bits[c]),
                ops: ops[c].units,
                wall_s: wall,
            });
        }
    }
    Ok(records)
}

fn effective_l(chain: DetectorKind, cfg: &SimConfig) -> usize {
    match chain {
        DetectorKind::Dd => 1,
        DetectorKind::VaHmsdd | DetectorKind::VaSmsdd | DetectorKind::IddVaSmsdd => cfg.l,
        _ => cfg.m,
    }
}

/// Runs the sweep for the configured detector alone.
pub fn run_ber_sweep(cfg: &SimConfig) -> Result<Vec<BerRecord>, Error> {
    run_ber_sweep_multi(cfg, &[cfg.detector], None)
}

/// Coherent rake reference sweep (genie channel knowledge).
pub fn run_rake_baseline(cfg: &SimConfig) -> Result<Vec<BerRecord>, Error> {
    let mut c = cfg.clone();
    c.detector = DetectorKind::Rake;
    run_ber_sweep_multi(&c, &[DetectorKind::Rake], None)
}

/// Log-linear interpolation of the SNR (dB) at which a chain's BER curve
/// crosses `target`.  Records must belong to one chain, sorted by SNR.
pub fn interpolate_snr_at_ber(records: &[BerRecord], target: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.ber > 0.0 && r.ber.is_finite())
        .map(|r| (r.ebn0_db, r.ber.log10()))
        .collect();
    let t = target.log10();
    for w in pts.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if (y0 - t) * (y1 - t) <= 0.0 && y0 != y1 {
            return Some(x0 + (t - y0) * (x1 - x0) / (y1 - y0));
        }
    }
    None
}

/// Recounts an audit log and checks it against the reported records.
pub fn verify_audit_log(text: &str, records: &[BerRecord]) -> Result<(), Error> {
    use std::collections::BTreeMap;
    let mut tally: BTreeMap<(String, String), (u64, u64)> = BTreeMap::new();
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::invalid_input(format!("malformed audit line: {line}")));
        }
        let key = (fields[1].to_string(), fields[3].to_string());
        let truth = fields[4].as_bytes();
        let decided = fields[5].as_bytes();
        if truth.len() != decided.len() {
            return Err(Error::invalid_input("audit bit strings differ in length"));
        }
        let e = truth.iter().zip(decided).filter(|(a, b)| a != b).count() as u64;
        let entry = tally.entry(key).or_insert((0, 0));
        entry.0 += e;
        entry.1 += truth.len() as u64;
    }
    for r in records {
        let key = (format!("{}", r.ebn0_db), r.detector.clone());
        let (e, n) = tally.get(&key).copied().ok_or_else(|| {
            Error::invalid_input(format!("audit log missing point {key:?}"))
        })?;
        if e != r.errors || n != r.bits {
            return Err(Error::invalid_input(format!(
                "audit mismatch for {key:?}: log has {e}/{n}, record has {}/{}",
                r.errors, r.bits
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> SimConfig {
        let mut cfg = SimConfig::default();
        cfg.n_symbols = 10;
        cfg.ebn0_db = vec![60.0];
        cfg.max_bits = 2000;
        cfg.min_errors = 1;
        cfg.master_seed = 7;
        cfg
    }

    #[test]
    fn noiseless_limit_all_detectors_error_free() {
        let cfg = tiny_cfg();
        let chains = [
            DetectorKind::Dd,
            DetectorKind::Glrt,
            DetectorKind::Bp,
            DetectorKind::VaHmsdd,
            DetectorKind::VaSmsdd,
            DetectorKind::Rake,
        ];
        let records = run_ber_sweep_multi(&cfg, &chains, None).unwrap();
        for r in &records {
            assert_eq!(r.errors, 0, "{} at 60 dB", r.detector);
            assert!(r.bits >= 2000);
        }
    }

    #[test]
    fn coded_noiseless_limit_error_free() {
        let mut cfg = tiny_cfg();
        cfg.n_symbols = 20;
        cfg.detector = DetectorKind::IddBp;
        cfg.iterations = 2;
        let records =
            run_ber_sweep_multi(&cfg, &[DetectorKind::CodedGlrt, DetectorKind::IddBp], None)
                .unwrap();
        for r in &records {
            assert_eq!(r.errors, 0, "{}", r.detector);
        }
    }

    #[test]
    fn mixed_coded_uncoded_rejected() {
        let cfg = tiny_cfg();
        assert!(run_ber_sweep_multi(&cfg, &[DetectorKind::Glrt, DetectorKind::CodedGlrt], None)
            .is_err());
    }

    #[test]
    fn reproducible_across_worker_counts() {
        let mut cfg = tiny_cfg();
        cfg.ebn0_db = vec![10.0];
        cfg.max_bits = 4000;
        cfg.min_errors = 30;
        cfg.workers = Some(1);
        let a = run_ber_sweep_multi(&cfg, &[DetectorKind::Glrt, DetectorKind::Bp], None).unwrap();
        cfg.workers = Some(4);
        let b = run_ber_sweep_multi(&cfg, &[DetectorKind::Glrt, DetectorKind::Bp], None).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.bits, x.errors, x.ops), (y.bits, y.errors, y.ops));
        }
    }

    #[test]
    fn audit_log_recount_matches() {
        let mut cfg = tiny_cfg();
        cfg.ebn0_db = vec![8.0];
        cfg.max_bits = 1500;
        cfg.min_errors = 5;
        let mut audit = Vec::new();
        let records = run_ber_sweep_multi(
            &cfg,
            &[DetectorKind::Dd, DetectorKind::Glrt],
            Some(&mut audit),
        )
        .unwrap();
        let text = String::from_utf8(audit).unwrap();
        verify_audit_log(&text, &records).unwrap();
    }

    #[test]
    fn interpolation_crosses_target() {
        let rec = |db: f64, ber: f64| BerRecord {
            detector: "x".into(),
            m: 2,
            l: 2,
            q: 1,
            ebn0_db: db,
            bits: 1000,
            errors: 10,
            ber,
            ci95: 0.0,
            ops: 0,
            wall_s: 0.0,
        };
        let records = vec![rec(10.0, 1e-2), rec(12.0, 1e-3), rec(14.0, 1e-4)];
        let snr = interpolate_snr_at_ber(&records, 1e-3).unwrap();
        assert!((snr - 12.0).abs() < 1e-9);
        let mid = interpolate_snr_at_ber(&records, 3.16e-3).unwrap();
        assert!(mid > 10.0 && mid < 12.0);
    }
}
