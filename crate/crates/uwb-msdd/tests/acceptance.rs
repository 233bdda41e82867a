//! Acceptance suite: one test per release criterion, each printing a
//! `[PASS] criterion N` line (run with `--nocapture` to see them).
//!
//! The Monte Carlo criteria pin their seeds, budgets, and tolerances here;
//! every expected value is either exact (integer identities, formula
//! columns) or derived from an independent oracle computed inside the test.

mod common;

use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use std::time::Instant;

use uwb_msdd::acr::{correlate, sample_windows, window_log_likelihood, NoiseModel};
use uwb_msdd::channel::{gen_channel, ChannelProfile};
use uwb_msdd::coding::{ConvCode, Interleaver, SisoAlgo};
use uwb_msdd::glrt::{glrt_detect, glrt_metric};
use uwb_msdd::idd::{decode_hard_bits, idd_loop, IddConfig, SoftDetector};
use uwb_msdd::ops::OpCounter;
use uwb_msdd::rng::{derive_seed, substream, Stream};
use uwb_msdd::sim::{
    formula_units, interpolate_snr_at_ber, run_ber_sweep_multi, run_complexity_report,
    run_relative_metrics, verify_audit_log, write_ber_csv, DetectorKind, SimConfig,
};
use uwb_msdd::stc::{diff_encode, product_of_symbols, CodeMatrix, DiffMatrix};
use uwb_msdd::trellis::{bp_detect, BitPriors, Trellis};
use uwb_msdd::util::log_sum_exp;
use uwb_msdd::viterbi::{va_branch_metric, va_hmsdd, va_smsdd, SoftCombine};
use uwb_msdd::waveform::{synthesize_received, FrameTiming};

fn pass(n: usize, detail: &str) {
    println!("[PASS] criterion {n}: {detail}");
}

/// Criterion 1: message-passing APPs equal exhaustive marginalization of the
/// factorized posterior to 1e-9 over 200 random instances (N <= 6,
/// M in {1,2,3}, Q = 1), within two minutes.
#[test]
fn criterion_01_bp_matches_exhaustive_marginalization() {
    let started = Instant::now();
    let worst = (0..200u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = StdRng::seed_from_u64(10_000 + t);
            let n = rng.gen_range(3..=6);
            let m = 1 + (t % 3) as usize;
            let n0 = [2e-3, 8e-3, 3e-2][(t % 3) as usize];
            let tb = random_clustered_burst(n, m, 1, n0, 31_000 + t);
            let priors = if t % 2 == 0 {
                BitPriors::uniform(n)
            } else {
                BitPriors::new(
                    (0..n).map(|_| [rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)]).collect(),
                )
                .unwrap()
            };
            let trellis = Trellis::new(m).unwrap();
            let out = bp_detect(&trellis, &tb.set, &tb.noise, &priors).unwrap();

            // Independent oracle: enumerate all 4^N sequences and marginalize.
            let total = 1usize << (2 * n);
            let mut log_joint = Vec::with_capacity(total);
            for code in 0..total {
                let seq: Vec<CodeMatrix> = (0..n)
                    .map(|j| CodeMatrix::from_index((code >> (2 * j)) & 3).unwrap())
                    .collect();
                let mut lp = 0.0;
                for i in 1..=n {
                    let win = tb.set.window(i);
                    let lags = win.lags.len();
                    lp += window_log_likelihood(&win, &seq[i - lags..i], &tb.noise).unwrap();
                    lp += priors.log_symbol(i, seq[i - 1].index());
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
            let mut worst = 0.0f64;
            for (got, want) in out.symbol_app.iter().zip(&apps) {
                for f in 0..4 {
                    worst = worst.max((got[f] - want[f]).abs());
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let secs = started.elapsed().as_secs_f64();
    assert!(worst <= 1e-9, "max APP error {worst:.3e}");
    assert!(secs <= 120.0, "criterion 1 took {secs:.1}s");
    pass(1, &format!("200 instances, max |APP error| = {worst:.2e}, {secs:.1}s"));
}

/// Criterion 2: the reduced-memory survivor detector at L = M decides
/// identically to exhaustive window search over 1000 random noisy bursts,
/// zero mismatches.
#[test]
fn criterion_02_va_equals_exhaustive_at_full_depth() {
    let mismatches: usize = (0..1000u64)
        .into_par_iter()
        .map(|t| {
            let m = 2 + (t % 2) as usize;
            let n0 = [0.02, 0.05, 0.15][(t % 3) as usize];
            let tb = random_clustered_burst(8, m, 1, n0, 52_000 + t);
            let mut ops = OpCounter::new();
            let va = va_hmsdd(&tb.set, m, &mut ops).unwrap();
            let exhaustive = glrt_detect(&tb.set, &mut ops).unwrap();
            usize::from(va != exhaustive)
        })
        .sum();
    assert_eq!(mismatches, 0, "{mismatches} of 1000 bursts disagreed");
    pass(2, "1000 bursts, M in {2,3}: survivor decisions identical to exhaustive argmax");
}

/// Criterion 3: the accumulated branch metrics at L = M reproduce the
/// exhaustive window metric for every candidate, exhaustively for M <= 3,
/// to 1e-12 relative.
#[test]
fn criterion_03_branch_metric_identity() {
    let mut worst = 0.0f64;
    for m in 1..=3usize {
        for trial in 0..10u64 {
            let tb = random_clustered_burst(m + 2, m, 1, 0.08, 63_000 + trial);
            for anchor in m..=m + 2 {
                let base = anchor - m;
                for code in 0..1usize << (2 * m) {
                    let cand: Vec<CodeMatrix> = (0..m)
                        .map(|j| CodeMatrix::from_index((code >> (2 * j)) & 3).unwrap())
                        .collect();
                    let mut acc = 0.0;
                    for stage in 1..=m {
                        let mut memory: Vec<CodeMatrix> = cand[..stage - 1].to_vec();
                        memory.reverse();
                        acc +=
                            va_branch_metric(&tb.set, base, m, stage, &memory, cand[stage - 1])
                                .unwrap();
                    }
                    let lambda = glrt_metric(&tb.set, anchor, &cand).unwrap();
                    worst = worst.max((acc - lambda).abs() / lambda.abs().max(1e-30));
                }
            }
        }
    }
    assert!(worst <= 1e-12, "max relative deviation {worst:.3e}");
    pass(3, &format!("exhaustive M <= 3, max relative deviation = {worst:.2e}"));
}

/// Criterion 4: the empirical variance of the correlator noise component at
/// fixed channel matches `N0 xi + Q W Ti N0^2 / 2` within 5% over 1e5
/// correlator output entries.
#[test]
fn criterion_04_noise_variance_law() {
    let timing = FrameTiming::defaults();
    let profile = ChannelProfile::clustered_default();
    let ch = gen_channel(424_242, &profile, &timing, 1).unwrap();
    let xi = ch.xi();
    let n_sym = 25usize;
    let n0 = 0.05;
    let w = timing.noise_bandwidth();
    let expected = n0 * xi + w * timing.ti * n0 * n0 / 2.0;

    let bursts = 1000u64; // 25 windows x 4 entries x 1000 = 1e5 entries
    let (sum, sum_sq, count) = (0..bursts)
        .into_par_iter()
        .map(|b| {
            let mut drng = StdRng::seed_from_u64(derive_seed(77, &[b, Stream::Data as u64]));
            let syms = random_symbols(n_sym, &mut drng);
            let diff = diff_encode(&syms, DiffMatrix::reference()).unwrap();
            let mut quiet = substream(77, &[b, 99]);
            let clean = synthesize_received(&diff, &ch, 0.0, &mut quiet).unwrap();
            let mut nrng = substream(77, &[b, Stream::Noise as u64]);
            let noisy = synthesize_received(&diff, &ch, n0, &mut nrng).unwrap();
            let mut s = 0.0;
            let mut s2 = 0.0;
            let mut c = 0u64;
            for i in 1..=n_sym {
                let yn = correlate(&noisy, i, 1).unwrap().y;
                let yc = correlate(&clean, i, 1).unwrap().y;
                for r in 0..2 {
                    for v in 0..2 {
                        let d = yn.0[r][v] - yc.0[r][v];
                        s += d;
                        s2 += d * d;
                        c += 1;
                    }
                }
            }
            (s, s2, c)
        })
        .reduce(|| (0.0, 0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    assert!(count >= 100_000);
    let mean = sum / count as f64;
    let var = sum_sq / count as f64 - mean * mean;
    let rel = (var - expected).abs() / expected;
    assert!(rel < 0.05, "Var[N] = {var:.4e} vs sigma^2 = {expected:.4e} ({rel:.3})");
    pass(4, &format!("{count} entries: Var[N] within {:.2}% of the variance law", rel * 100.0));
}

/// Criterion 5: the exact integer differential identity on 1e4 random
/// sequences, and the noiseless correlator reproducing the ideal sample
/// template within 1e-3 relative (discretization only).
#[test]
fn criterion_05_differential_identities() {
    // Integer identity D_i D_{i-m}' = 2 prod U_z.
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=8);
        let syms = random_symbols(n, &mut rng);
        let d = diff_encode(&syms, DiffMatrix::reference()).unwrap();
        let i = rng.gen_range(1..=n);
        let m = rng.gen_range(1..=i);
        let lhs = d[i].times_transpose(d[i - m]);
        let p = product_of_symbols(&syms[i - m..i]).entries();
        assert_eq!(lhs, [[2 * p[0][0], 2 * p[0][1]], [2 * p[1][0], 2 * p[1][1]]]);
    }

    // Noiseless correlator: Y_{i,m} = xi (prod U)' with xi the total
    // integrated energy (the per-antenna energy enters twice), exact up to
    // grid discretization on an orthogonal balanced channel.
    let timing = FrameTiming::defaults();
    let ch = orthogonal_channel(&timing, 1);
    let xi = ch.xi();
    let mut worst = 0.0f64;
    for trial in 0..20u64 {
        let mut srng = StdRng::seed_from_u64(600 + trial);
        let syms = random_symbols(5, &mut srng);
        let mut nrng = substream(trial, &[Stream::Noise as u64]);
        let burst = make_burst(&syms, &ch, 0.0, &mut nrng);
        let set = sample_windows(&burst, 3).unwrap();
        for i in 1..=5usize {
            for m in 1..=3.min(i) {
                let y = set.get(i, m);
                let t = product_of_symbols(&syms[i - m..i]).transpose().entries();
                let mut err = 0.0f64;
                let mut scale = 0.0f64;
                for r in 0..2 {
                    for c in 0..2 {
                        err += (y.0[r][c] - xi * t[r][c] as f64).powi(2);
                        scale += (xi * t[r][c] as f64).powi(2);
                    }
                }
                worst = worst.max((err / scale).sqrt());
            }
        }
    }
    assert!(worst <= 1e-3, "noiseless correlator deviation {worst:.3e}");
    pass(5, &format!("1e4 integer identities exact; correlator deviation {worst:.2e} <= 1e-3"));
}

/// Criterion 6: BER ordering and soft-vs-hard gap at M = 2, Q = 1: at the
/// SNR where the exhaustive hard detector reaches ~1e-3, the ordering
/// soft < hard < one-symbol holds with non-overlapping 95% CIs, every point
/// carries at least 1e5 information bits, and the soft detector's SNR
/// advantage at that BER is 0.2..0.8 dB by interpolation.
#[test]
fn criterion_06_ber_ordering_and_gap() {
    let started = Instant::now();
    let mut cfg = SimConfig::default();
    cfg.m = 2;
    cfg.l = 2;
    cfg.q = 1;
    cfg.n_symbols = 50;
    cfg.master_seed = 31;
    cfg.max_bits = 300_000;
    cfg.min_errors = 400;
    cfg.ebn0_db = vec![17.0, 18.5, 20.0, 21.5];
    let chains = [DetectorKind::Dd, DetectorKind::Glrt, DetectorKind::Bp];
    let records = run_ber_sweep_multi(&cfg, &chains, None).unwrap();
    for r in &records {
        assert!(r.bits >= 100_000, "{} at {} dB has only {} bits", r.detector, r.ebn0_db, r.bits);
    }
    let per = |name: &str| -> Vec<_> {
        records.iter().filter(|r| r.detector == name).cloned().collect()
    };
    let (dd, glrt, bp) = (per("dd"), per("glrt"), per("bp"));

    let snr_glrt = interpolate_snr_at_ber(&glrt, 1e-3).expect("hard curve crosses 1e-3");
    let at = cfg
        .ebn0_db
        .iter()
        .copied()
        .min_by(|a, b| (a - snr_glrt).abs().partial_cmp(&(b - snr_glrt).abs()).unwrap())
        .unwrap();
    let pick = |set: &[uwb_msdd::sim::BerRecord]| {
        set.iter().find(|r| r.ebn0_db == at).cloned().unwrap()
    };
    let (rd, rg, rb) = (pick(&dd), pick(&glrt), pick(&bp));
    assert!(
        rb.ber + rb.ci95 < rg.ber - rg.ci95,
        "soft vs hard not separated at {at} dB: {:.3e}±{:.1e} vs {:.3e}±{:.1e}",
        rb.ber,
        rb.ci95,
        rg.ber,
        rg.ci95
    );
    assert!(
        rg.ber + rg.ci95 < rd.ber - rd.ci95,
        "hard vs one-symbol not separated at {at} dB"
    );

    let snr_bp = interpolate_snr_at_ber(&bp, 1e-3).expect("soft curve crosses 1e-3");
    let gap = snr_glrt - snr_bp;
    assert!(
        (0.2..=0.8).contains(&gap),
        "soft-vs-hard gap {gap:.3} dB outside 0.2..0.8 (glrt {snr_glrt:.2}, bp {snr_bp:.2})"
    );
    let secs = started.elapsed().as_secs_f64();
    assert!(secs <= 1800.0, "criterion 6 took {secs:.0}s");
    pass(
        6,
        &format!(
            "ordering separated at {at} dB; gap {gap:.2} dB in [0.2, 0.8]; {secs:.0}s"
        ),
    );
}

/// Criterion 7: with the rate-1/2 code and four detector/decoder rounds, the
/// iterative soft-trellis receiver beats the non-iterative coded hard
/// receiver at matched SNR with non-overlapping CIs; per-iteration BER is
/// non-increasing within CIs; the iterative soft Viterbi receiver at
/// L = M - 1 lands between the two.
#[test]
fn criterion_07_iterative_detection_gain() {
    let m = 3usize;
    let l = 2usize;
    let rounds = 4usize;
    let mut cfg = SimConfig::default();
    cfg.detector = DetectorKind::IddBp;
    cfg.m = m;
    cfg.l = l;
    cfg.n_symbols = 50;
    cfg.master_seed = 77;
    cfg.iterations = rounds;
    let db = 16.0;
    let n0 = cfg.n0_for_ebn0_db(db);
    let code = ConvCode::standard();
    let k = cfg.n_symbols - code.memory;
    let bursts = 2200u64;

    #[derive(Default, Clone)]
    struct Tally {
        coded_glrt: u64,
        bp_iter: [u64; 4],
        va_iter: [u64; 4],
        bits: u64,
    }
    let total: Tally = (0..bursts)
        .into_par_iter()
        .map(|b| {
            let seed = cfg.master_seed;
            let tags = |s: Stream| [0u64, b, s as u64];
            let ch = gen_channel(
                derive_seed(seed, &tags(Stream::Channel)),
                &cfg.profile,
                &cfg.timing,
                cfg.q,
            )
            .unwrap();
            let mut drng = substream(seed, &tags(Stream::Data));
            let info: Vec<u8> = (0..k).map(|_| drng.gen_range(0..2u8)).collect();
            let coded = code.encode(&info);
            let il =
                Interleaver::random(coded.len(), derive_seed(seed, &tags(Stream::Interleaver)));
            let tx = il.interleave(&coded);
            let syms: Vec<CodeMatrix> =
                tx.chunks(2).map(|c| CodeMatrix::from_bits(c[0], c[1])).collect();
            let diff = diff_encode(&syms, DiffMatrix::reference()).unwrap();
            let mut nrng = substream(seed, &tags(Stream::Noise));
            let rx = synthesize_received(&diff, &ch, n0, &mut nrng).unwrap();
            let set = sample_windows(&rx, m).unwrap();
            let noise = NoiseModel::genie(&ch, n0, rx.w).unwrap();
            let mut ops = OpCounter::new();

            let mut t = Tally { bits: k as u64, ..Default::default() };
            let hard: Vec<u8> = glrt_detect(&set, &mut ops)
                .unwrap()
                .iter()
                .flat_map(|u| {
                    let (a, b) = u.bits();
                    [a, b]
                })
                .collect();
            let cg = decode_hard_bits(&code, &il, &hard, SisoAlgo::MaxLog).unwrap();
            t.coded_glrt = cg.iter().zip(&info).filter(|(x, y)| x != y).count() as u64;

            let bp = idd_loop(&set, &noise, &code, &il, &IddConfig::new(SoftDetector::Bp, rounds), &mut ops)
                .unwrap();
            for (r, bits) in bp.per_iteration.iter().enumerate() {
                t.bp_iter[r] = bits.iter().zip(&info).filter(|(x, y)| x != y).count() as u64;
            }
            let va = idd_loop(
                &set,
                &noise,
                &code,
                &il,
                &IddConfig::new(SoftDetector::VaSmsdd { l }, rounds),
                &mut ops,
            )
            .unwrap();
            for (r, bits) in va.per_iteration.iter().enumerate() {
                t.va_iter[r] = bits.iter().zip(&info).filter(|(x, y)| x != y).count() as u64;
            }
            t
        })
        .reduce(Tally::default, |mut a, b| {
            a.coded_glrt += b.coded_glrt;
            a.bits += b.bits;
            for r in 0..4 {
                a.bp_iter[r] += b.bp_iter[r];
                a.va_iter[r] += b.va_iter[r];
            }
            a
        });

    let bits = total.bits as f64;
    let ber = |e: u64| e as f64 / bits;
    let ci = |e: u64| uwb_msdd::util::binomial_ci95_half_width(e, total.bits);
    let cg = ber(total.coded_glrt);
    let bp4 = ber(total.bp_iter[rounds - 1]);
    let va4 = ber(total.va_iter[rounds - 1]);
    let (cg_ci, bp_ci, va_ci) = (
        ci(total.coded_glrt),
        ci(total.bp_iter[rounds - 1]),
        ci(total.va_iter[rounds - 1]),
    );

    assert!(
        bp4 + bp_ci < cg - cg_ci,
        "iterative soft trellis {bp4:.3e}±{bp_ci:.1e} not separated below coded hard {cg:.3e}±{cg_ci:.1e}"
    );
    assert!(
        bp4 - bp_ci <= va4 + va_ci && va4 - va_ci <= cg + cg_ci,
        "iterative soft Viterbi {va4:.3e} not between {bp4:.3e} and {cg:.3e}"
    );
    for seq in [&total.bp_iter, &total.va_iter] {
        for r in 0..rounds - 1 {
            let (b0, b1) = (ber(seq[r]), ber(seq[r + 1]));
            let slack = ci(seq[r]) + ci(seq[r + 1]);
            assert!(
                b1 <= b0 + slack,
                "iteration {} -> {}: BER rose {b0:.3e} -> {b1:.3e} beyond CI slack",
                r + 1,
                r + 2
            );
        }
    }
    pass(
        7,
        &format!(
            "at {db} dB over {} bits: iterative soft {bp4:.2e} < soft Viterbi {va4:.2e} < coded hard {cg:.2e}; per-iteration non-increasing within CIs",
            total.bits
        ),
    );
}

/// Criterion 8: the complexity report's formula columns take the reference
/// values exactly, and the instrumented unit-counter growth ratios match the
/// formula ratios within 10% for the exhaustive and soft-trellis detectors.
#[test]
fn criterion_08_complexity_report() {
    assert_eq!(formula_units(DetectorKind::Glrt, 3, 3), 32);
    assert_eq!(formula_units(DetectorKind::Bp, 3, 3), 96);
    assert_eq!(formula_units(DetectorKind::VaHmsdd, 3, 3), 32);
    assert_eq!(formula_units(DetectorKind::VaSmsdd, 3, 2), 36);

    let report = run_complexity_report(&[2, 3, 4], &[2, 3]).unwrap();
    for name in ["glrt", "bp"] {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.detector == name).collect();
        assert!(rows.len() >= 3);
        for w in rows.windows(2) {
            let measured_ratio = w[1].measured_units_per_stage / w[0].measured_units_per_stage;
            let formula_ratio = w[1].formula_units as f64 / w[0].formula_units as f64;
            let rel = (measured_ratio - formula_ratio).abs() / formula_ratio;
            assert!(
                rel < 0.10,
                "{name} M {} -> {}: measured ratio {measured_ratio:.3} vs formula {formula_ratio:.3}",
                w[0].m,
                w[1].m
            );
        }
    }
    // Truncated-detector counts never exceed the exhaustive detector's for
    // L <= M.
    for m in 1..=6 {
        for l in 1..=m {
            assert!(
                formula_units(DetectorKind::VaHmsdd, m, l) <= formula_units(DetectorKind::Glrt, m, m)
            );
        }
    }
    pass(8, "formula columns exact; measured unit growth tracks formula ratios within 10%");
}

/// Criterion 9: relative BER/complexity sign pattern at
/// (M, L) in {(3,2), (4,3), (5,3)}: the soft-trellis detector improves BER
/// at increased complexity, the truncated hard detector reduces complexity
/// at a BER loss, and the soft Viterbi detector is bounded by the two on
/// both axes.
#[test]
fn criterion_09_relative_metrics_sign_pattern() {
    for (m, l) in [(3usize, 2usize), (4, 3), (5, 3)] {
        let mut cfg = SimConfig::default();
        cfg.m = m;
        cfg.l = l;
        cfg.n_symbols = 50;
        cfg.master_seed = 99;
        cfg.max_bits = 120_000;
        cfg.min_errors = 200;
        cfg.ebn0_db = vec![17.0];
        let chains = [
            DetectorKind::Glrt,
            DetectorKind::Bp,
            DetectorKind::VaHmsdd,
            DetectorKind::VaSmsdd,
        ];
        let records = run_ber_sweep_multi(&cfg, &chains, None).unwrap();
        let baseline: Vec<_> = records.iter().filter(|r| r.detector == "glrt").cloned().collect();
        let rest: Vec<_> = records.iter().filter(|r| r.detector != "glrt").cloned().collect();
        let rel = run_relative_metrics(&baseline, &rest).unwrap();
        let get = |name: &str| rel.iter().find(|r| r.detector == name).unwrap().clone();
        let (bp, vah, vas) = (get("bp"), get("va-hmsdd"), get("va-smsdd"));

        assert!(bp.rel_ber_pct.unwrap() > 0.0, "({m},{l}): soft trellis must improve BER");
        assert!(bp.rel_complexity_pct > 0.0, "({m},{l}): soft trellis costs more");
        assert!(vah.rel_ber_pct.unwrap() < 0.0, "({m},{l}): truncated hard loses BER");
        assert!(vah.rel_complexity_pct < 0.0, "({m},{l}): truncated hard costs less");
        assert!(
            vah.rel_complexity_pct <= vas.rel_complexity_pct
                && vas.rel_complexity_pct <= bp.rel_complexity_pct,
            "({m},{l}): soft Viterbi complexity not bounded"
        );
        // BER boundedness with CI slack on each side.
        let ber = |name: &str| records.iter().find(|r| r.detector == name).unwrap().clone();
        let (rb, rh, rs) = (ber("bp"), ber("va-hmsdd"), ber("va-smsdd"));
        assert!(
            rb.ber - rb.ci95 <= rs.ber + rs.ci95 && rs.ber - rs.ci95 <= rh.ber + rh.ci95,
            "({m},{l}): soft Viterbi BER {:.3e} not between {:.3e} and {:.3e}",
            rs.ber,
            rb.ber,
            rh.ber
        );
        println!(
            "  (M={m}, L={l}) rel: bp=({:+.1}% ber, {:+.1}% cx) va-hmsdd=({:+.1}%, {:+.1}%) va-smsdd=({:+.1}%, {:+.1}%)",
            bp.rel_ber_pct.unwrap(),
            bp.rel_complexity_pct,
            vah.rel_ber_pct.unwrap(),
            vah.rel_complexity_pct,
            vas.rel_ber_pct.unwrap(),
            vas.rel_complexity_pct
        );
    }

    // Informational: the sum-combine soft statistic as written, next to the
    // max form the assertions above use.
    let tb = random_clustered_burst(50, 3, 1, SimConfig::default().n0_for_ebn0_db(17.0), 4242);
    let mut ops = OpCounter::new();
    let truth = symbols_to_bits(&tb.syms);
    for combine in [SoftCombine::Sum, SoftCombine::Max] {
        let bits = va_smsdd(&tb.set, 2, &tb.noise, &BitPriors::uniform(50), combine, &mut ops).unwrap();
        let errs = bits.iter().map(|b| b.decision).zip(&truth).filter(|(a, b)| a != *b).count();
        println!("  soft-combine {combine:?}: {errs}/100 bit errors on a sample burst");
    }
    pass(9, "sign patterns and boundedness hold at (3,2), (4,3), (5,3)");
}

/// Criterion 10: sweeps are bit-reproducible: the same seed yields identical
/// records for any worker count (CSV rows compared with the wall-clock
/// column stripped, which is the only non-deterministic field), and the
/// audit log recount matches the reported errors.
#[test]
fn criterion_10_determinism_and_audit() {
    let mut cfg = SimConfig::default();
    cfg.m = 2;
    cfg.n_symbols = 20;
    cfg.master_seed = 123;
    cfg.max_bits = 8000;
    cfg.min_errors = 30;
    cfg.ebn0_db = vec![12.0, 16.0];
    let chains = [DetectorKind::Dd, DetectorKind::Glrt, DetectorKind::Bp];

    let strip_wall = |records: &[uwb_msdd::sim::BerRecord]| -> String {
        let mut buf = Vec::new();
        write_ber_csv(&mut buf, records).unwrap();
        String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    };

    cfg.workers = Some(1);
    let mut audit = Vec::new();
    let a = run_ber_sweep_multi(&cfg, &chains, Some(&mut audit)).unwrap();
    cfg.workers = Some(3);
    let b = run_ber_sweep_multi(&cfg, &chains, None).unwrap();
    cfg.workers = Some(1);
    let c = run_ber_sweep_multi(&cfg, &chains, None).unwrap();

    assert_eq!(strip_wall(&a), strip_wall(&b), "1 vs 3 workers");
    assert_eq!(strip_wall(&a), strip_wall(&c), "re-run with same seed");
    verify_audit_log(&String::from_utf8(audit).unwrap(), &a).unwrap();
    pass(10, "byte-identical rows across worker counts; audit recount matches");
}
