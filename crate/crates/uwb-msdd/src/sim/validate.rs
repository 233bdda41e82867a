//! Programmatic self-checks for the `validate` CLI subcommand.
//!
//! These are fast spot checks of the core identities (the full suites live
//! in the crate's tests): exact differential identities, message-passing
//! versus exhaustive marginalization, survivor-path optimality at full
//! memory depth, the branch-metric/window-metric identity, and noiseless
//! end-to-end detection.

use crate::acr::{sample_windows, window_log_likelihood, NoiseModel, SampleSet};
use crate::channel::{ChannelRealization, Tap};
use crate::error::Error;
use crate::glrt::{glrt_detect, glrt_metric};
use crate::ops::OpCounter;
use crate::rng::{substream, Stream};
use crate::stc::{diff_encode, product_of_symbols, CodeMatrix, DiffMatrix};
use crate::trellis::{bp_detect, BitPriors, Trellis};
use crate::util::log_sum_exp;
use crate::viterbi::{va_branch_metric, va_hmsdd};
use crate::waveform::{synthesize_received, FrameTiming};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Debug, Clone)]
pub struct ValidationOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn orthogonal_channel(timing: &FrameTiming) -> ChannelRealization {
    let gain = (1.0 / crate::waveform::pulse_energy(timing.tm)).sqrt();
    let taps = vec![
        vec![vec![Tap { delay_s: 6e-9, gain }]],
        vec![vec![Tap { delay_s: 26e-9, gain }]],
    ];
    ChannelRealization::from_taps(taps, *timing)
}

fn random_symbols(n: usize, rng: &mut StdRng) -> Vec<CodeMatrix> {
    (0..n).map(|_| CodeMatrix::from_index(rng.gen_range(0..4)).unwrap()).collect()
}

fn make_set(syms: &[CodeMatrix], m: usize, n0: f64, seed: u64) -> (SampleSet, NoiseModel) {
    let timing = FrameTiming::defaults();
    let ch = orthogonal_channel(&timing);
    let diff = diff_encode(syms, DiffMatrix::reference()).unwrap();
    let mut rng = substream(seed, &[Stream::Noise as u64]);
    let burst = synthesize_received(&diff, &ch, n0, &mut rng).unwrap();
    let noise = NoiseModel::genie(&ch, n0.max(1e-3), burst.w).unwrap();
    (sample_windows(&burst, m).unwrap(), noise)
}

fn differential_identities(trials: usize) -> ValidationOutcome {
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..trials {
        let n = rng.gen_range(1..=10);
        let syms = random_symbols(n, &mut rng);
        let d = diff_encode(&syms, DiffMatrix::reference()).unwrap();
        for i in 1..=n {
            for m in 1..=i {
                let lhs = d[i].times_transpose(d[i - m]);
                let p = product_of_symbols(&syms[i - m..i]).entries();
                if lhs != [[2 * p[0][0], 2 * p[0][1]], [2 * p[1][0], 2 * p[1][1]]] {
                    return ValidationOutcome {
                        name: "differential-identity",
                        passed: false,
                        detail: format!("mismatch at sequence length {n}, i {i}, lag {m}"),
                    };
                }
            }
        }
    }
    ValidationOutcome {
        name: "differential-identity",
        passed: true,
        detail: format!("{trials} random sequences, exact"),
    }
}

fn bp_oracle(instances: usize) -> ValidationOutcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for t in 0..instances {
        let n = rng.gen_range(3..=5);
        let m = rng.gen_range(1..=3);
        let syms = random_symbols(n, &mut rng);
        let (set, noise) = make_set(&syms, m, 5e-3, 900 + t as u64);
        let priors = BitPriors::uniform(n);
        let trellis = Trellis::new(m).unwrap();
        let out = bp_detect(&trellis, &set, &noise, &priors).unwrap();

        // Brute force marginalization.
        let total = 1usize << (2 * n);
        let mut log_joint = Vec::with_capacity(total);
        for code in 0..total {
            let seq: Vec<CodeMatrix> =
                (0..n).map(|j| CodeMatrix::from_index((code >> (2 * j)) & 3).unwrap()).collect();
            let mut lp = 0.0;
            for i in 1..=n {
                let win = set.window(i);
                let lags = win.lags.len();
                lp += window_log_likelihood(&win, &seq[i - lags..i], &noise).unwrap();
            }
            log_joint.push(lp);
        }
        let z = log_sum_exp(&log_joint);
        let mut apps = vec![[0.0f64; 4]; n];
        for (code, lp) in log_joint.iter().enumerate() {
            let p = (lp - z).exp();
            for (j, app) in apps.iter_mut().enumerate() {
                app[(code >> (2 * j)) & 3] += p;
            }
        }
        for (got, want) in out.symbol_app.iter().zip(&apps) {
            for f in 0..4 {
                worst = worst.max((got[f] - want[f]).abs());
            }
        }
    }
    ValidationOutcome {
        name: "bp-vs-exhaustive",
        passed: worst <= 1e-9,
        detail: format!("{instances} instances, max |APP error| = {worst:.2e}"),
    }
}

fn survivor_optimality(trials: usize) -> ValidationOutcome {
    // At L = M the sliding Viterbi detector must reproduce the exhaustive
    // window-search decisions bit for bit.
    let mut rng = StdRng::seed_from_u64(3);
    let mut mismatches = 0usize;
    for t in 0..trials {
        let n = 6;
        let m = 2 + (t % 2);
        let syms = random_symbols(n, &mut rng);
        let (set, _) = make_set(&syms, m, 0.8, 500 + t as u64);
        let mut ops = OpCounter::new();
        let hat = va_hmsdd(&set, m, &mut ops).unwrap();
        let exhaustive = glrt_detect(&set, &mut ops).unwrap();
        if hat != exhaustive {
            mismatches += 1;
        }
    }
    ValidationOutcome {
        name: "survivor-vs-exhaustive",
        passed: mismatches == 0,
        detail: format!("{trials} bursts, {mismatches} mismatches"),
    }
}

fn metric_identity() -> ValidationOutcome {
    let mut rng = StdRng::seed_from_u64(4);
    let m = 2;
    let syms = random_symbols(m, &mut rng);
    let (set, _) = make_set(&syms, m, 0.3, 40);
    let mut worst = 0.0f64;
    for code in 0..16usize {
        let cand = [
            CodeMatrix::from_index(code >> 2).unwrap(),
            CodeMatrix::from_index(code & 3).unwrap(),
        ];
        let lambda = glrt_metric(&set, m, &cand).unwrap();
        let acc = va_branch_metric(&set, 0, m, 1, &[], cand[0]).unwrap()
            + va_branch_metric(&set, 0, m, 2, &[cand[0]], cand[1]).unwrap();
        worst = worst.max((lambda - acc).abs() / lambda.abs().max(1.0));
    }
    ValidationOutcome {
        name: "branch-sum-equals-window-metric",
        passed: worst <= 1e-12,
        detail: format!("exhaustive at M = L = 2, max rel error = {worst:.2e}"),
    }
}

fn noiseless_chain() -> ValidationOutcome {
    let mut rng = StdRng::seed_from_u64(5);
    let syms = random_symbols(8, &mut rng);
    let (set, noise) = make_set(&syms, 2, 0.0, 60);
    let mut ops = OpCounter::new();
    let trellis = Trellis::new(2).unwrap();
    let g = glrt_detect(&set, &mut ops).unwrap();
    let v = va_hmsdd(&set, 2, &mut ops).unwrap();
    let b = bp_detect(&trellis, &set, &noise, &BitPriors::uniform(8)).unwrap().hard_symbols();
    let ok = g == syms && v == syms && b == syms;
    ValidationOutcome {
        name: "noiseless-chain",
        passed: ok,
        detail: if ok { "all detectors error free".into() } else { "detector errors".into() },
    }
}

/// Runs the quick validation suites.
pub fn run_all() -> Result<Vec<ValidationOutcome>, Error> {
    Ok(vec![
        differential_identities(200),
        bp_oracle(6),
        survivor_optimality(20),
        metric_identity(),
        noiseless_chain(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_quick_validations_pass() {
        for v in run_all().unwrap() {
            assert!(v.passed, "{}: {}", v.name, v.detail);
        }
    }
}
