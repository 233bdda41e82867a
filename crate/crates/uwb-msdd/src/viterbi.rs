//! Reduced-memory trellis detection: a hard Viterbi detector over the
//! truncated window metric, and a soft forward/backward variant.
//!
//! The truncation keeps only cross-correlation pairs at most `L` symbols
//! apart.  The branch metric at window stage `i'`,
//!
//! `lambda_{i'} = sum_{l=max(0, i'-L)}^{i'-1} tr( (prod U) Ypair(base+i', base+l) )`,
//!
//! depends only on the last `L - 1` symbols (the state memory) plus the
//! input, so the search runs over `4^(L-1)` states.  At `L = M` the
//! accumulated metric equals the exhaustive window metric term for term and
//! the survivor is the exact window argmax.
//!
//! The hard detector mirrors the exhaustive detector's sliding structure:
//! one Viterbi search per observation window, each window deciding its
//! oldest undecided symbol (the final window decides its tail).  That makes
//! it decision-identical to exhaustive search at `L = M` and a strictly
//! truncated approximation below.
//!
//! The soft variant is the reduced-memory analog of the message-passing
//! detector: forward and backward max-accumulated path metrics over the
//! whole pilot-anchored burst, per-bit statistics from the transition
//! scores, and a-priori feedback folded into the branch metrics for the
//! iterative receiver.  Its branch metrics are scaled by `2 xi / sigma^2` so
//! the statistics live on the decoder's log-likelihood-ratio scale.

use crate::acr::{NoiseModel, SampleSet};
use crate::error::Error;
use crate::glrt::TraceTable;
use crate::ops::OpCounter;
use crate::stc::CodeMatrix;
use crate::trellis::BitPriors;

use std::io::Write;

/// How the soft detector aggregates path metrics over the transitions that
/// carry a given bit value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoftCombine {
    /// Sum of forward+backward path metrics over the partition (the
    /// formulation as written; both partitions always hold equally many
    /// transitions, so the difference is well defined).
    Sum,
    /// Max over the partition (max-log statistic; this is what the iterative
    /// receiver feeds to the decoder).
    Max,
}

/// Soft output for one transmitted bit.
#[derive(Debug, Clone, Copy)]
pub struct SoftVaBit {
    pub symbol: usize,
    pub k: usize,
    /// Decision statistic under the configured combine rule.
    pub iota: f64,
    /// Max-log total LLR (always computed; equals `iota` under `Max`).
    pub llr: f64,
    /// `llr` minus the bit's a-priori LLR.
    pub extrinsic_llr: f64,
    /// 1 iff `iota >= 0`.
    pub decision: u8,
}

fn mem_states(l: usize) -> usize {
    if l <= 1 {
        1
    } else {
        1 << (2 * (l - 1))
    }
}

fn next_mem(state: usize, input: usize, l: usize) -> usize {
    if l <= 1 {
        0
    } else {
        let keep = if l == 2 { 0 } else { state % (1 << (2 * (l - 2))) };
        keep * 4 + input
    }
}

fn mem_digit(state: usize, k: usize) -> usize {
    (state >> (2 * k)) & 3
}

/// Truncated branch metric at stage `i'` of the window starting after symbol
/// `base` (stage `i'` inputs symbol `base + i'`).
///
/// `memory` holds the previous in-window symbols newest first
/// (`memory[0] = U_{base+i'-1}`), at least `min(i', L) - 1` entries.
pub fn va_branch_metric(
    set: &SampleSet,
    base: usize,
    l: usize,
    stage: usize,
    memory: &[CodeMatrix],
    input: CodeMatrix,
) -> Result<f64, Error> {
    if l < 1 {
        return Err(Error::invalid_input("memory depth L must be at least 1"));
    }
    if l > set.m_order {
        return Err(Error::invalid_input(format!(
            "memory depth {l} exceeds available lag order {}",
            set.m_order
        )));
    }
    let lags = l.min(stage);
    if memory.len() + 1 < lags {
        return Err(Error::invalid_input("state memory shorter than the lag span"));
    }
    let mut acc = 0.0;
    let mut e = input.exponent();
    for m in 1..=lags {
        if m > 1 {
            e = (e + memory[m - 2].exponent()) % 4;
        }
        acc += set.get(base + stage, m).trace_pow(e);
    }
    Ok(acc)
}

fn branch_from_ids(
    trace: &TraceTable,
    base: usize,
    l: usize,
    stage: usize,
    state: usize,
    input: usize,
) -> f64 {
    let lags = l.min(stage);
    let mut acc = 0.0;
    let mut e = CodeMatrix::from_index(input).unwrap().exponent();
    for m in 1..=lags {
        if m > 1 {
            e = (e + CodeMatrix::from_index(mem_digit(state, m - 2)).unwrap().exponent()) % 4;
        }
        acc += trace.value(base + stage, m, e);
    }
    acc
}

fn validate_depth(set: &SampleSet, l: usize) -> Result<(), Error> {
    if l < 1 {
        return Err(Error::invalid_input("memory depth L must be at least 1"));
    }
    if l > set.m_order {
        return Err(Error::invalid_input(format!(
            "memory depth {l} exceeds the sample set's window order {}",
            set.m_order
        )));
    }
    Ok(())
}

/// Viterbi search over one observation window: survivor symbols
/// `U_{anchor-len+1} .. U_{anchor}` (oldest first) and the survivor metric.
pub fn va_window(
    set: &SampleSet,
    trace: &TraceTable,
    anchor: usize,
    len: usize,
    l: usize,
    ops: &mut OpCounter,
) -> Result<(Vec<CodeMatrix>, f64), Error> {
    validate_depth(set, l)?;
    if len == 0 || len > anchor {
        return Err(Error::invalid_input(format!(
            "window length {len} invalid at anchor {anchor}"
        )));
    }
    // Unit accounting: (L+1) pair/combine units per surviving rotation
    // class; the sliding structure extends the survivor lattice by one
    // stage per window.
    ops.add_units(((l as u64) + 1) << l);

    let base = anchor - len;
    let states = mem_states(l);
    let mut metric = vec![f64::NEG_INFINITY; states];
    metric[0] = 0.0;
    let mut back: Vec<Vec<(u32, u8)>> = Vec::with_capacity(len);
    for stage in 1..=len {
        let mut next = vec![f64::NEG_INFINITY; states];
        let mut bp = vec![(u32::MAX, 0u8); states];
        for (s, &ms) in metric.iter().enumerate() {
            if ms == f64::NEG_INFINITY {
                continue;
            }
            for f in 0..4usize {
                let cand = ms + branch_from_ids(trace, base, l, stage, s, f);
                let ns = next_mem(s, f, l);
                if cand > next[ns] {
                    next[ns] = cand;
                    bp[ns] = (s as u32, f as u8);
                }
            }
        }
        metric = next;
        back.push(bp);
    }

    // Traceback from the best final state (smallest index wins ties).
    let mut state = 0usize;
    let mut best = f64::NEG_INFINITY;
    for (s, &m) in metric.iter().enumerate() {
        if m > best {
            best = m;
            state = s;
        }
    }
    let mut rev = Vec::with_capacity(len);
    for stage in (0..len).rev() {
        let (prev, input) = back[stage][state];
        rev.push(CodeMatrix::from_index(input as usize).unwrap());
        state = prev as usize;
    }
    rev.reverse();
    Ok((rev, best))
}

/// Optional survivor dump for debugging (`anchor,position,symbol`).
pub struct SurvivorDump<'a, W: Write>(pub &'a mut W);

/// Sliding-window hard Viterbi detection of the whole burst.
///
/// Mirrors the exhaustive detector's sliding rule: window `i` decides symbol
/// `i - M + 1`, the final window decides its tail, and short bursts are
/// decided by a single window.  At `L = M` the decisions coincide with
/// exhaustive window search; smaller `L` trades accuracy for a
/// `4^(L-1)`-state search.
pub fn va_hmsdd(set: &SampleSet, l: usize, ops: &mut OpCounter) -> Result<Vec<CodeMatrix>, Error> {
    va_hmsdd_impl::<std::io::Sink>(set, l, ops, None)
}

/// As [`va_hmsdd`], additionally dumping each window's survivor as CSV.
pub fn va_hmsdd_traced<W: Write>(
    set: &SampleSet,
    l: usize,
    ops: &mut OpCounter,
    dump: SurvivorDump<'_, W>,
) -> Result<Vec<CodeMatrix>, Error> {
    writeln!(dump.0, "anchor,position,symbol")?;
    va_hmsdd_impl(set, l, ops, Some(dump))
}

fn va_hmsdd_impl<W: Write>(
    set: &SampleSet,
    l: usize,
    ops: &mut OpCounter,
    mut dump: Option<SurvivorDump<'_, W>>,
) -> Result<Vec<CodeMatrix>, Error> {
    validate_depth(set, l)?;
    let n = set.n_symbols;
    let m = set.m_order;
    let trace = TraceTable::build(set, ops);
    let mut decisions: Vec<Option<CodeMatrix>> = vec![None; n];
    let record = |anchor: usize, syms: &[CodeMatrix], dump: &mut Option<SurvivorDump<'_, W>>| {
        if let Some(d) = dump.as_mut() {
            for (j, u) in syms.iter().enumerate() {
                let _ = writeln!(d.0, "{anchor},{},{}", j + 1, u.index());
            }
        }
    };
    if n <= m {
        let (syms, _) = va_window(set, &trace, n, n, l.min(n), ops)?;
        record(n, &syms, &mut dump);
        for (j, &u) in syms.iter().enumerate() {
            decisions[j] = Some(u);
        }
    } else {
        for i in m..=n {
            let (syms, _) = va_window(set, &trace, i, m, l, ops)?;
            record(i, &syms, &mut dump);
            decisions[i - m] = Some(syms[0]);
            if i == n {
                for (j, &u) in syms.iter().enumerate().skip(1) {
                    decisions[i - m + j] = Some(u);
                }
            }
        }
    }
    Ok(decisions.into_iter().map(Option::unwrap).collect())
}

/// Soft Viterbi detection: forward/backward max path metrics over the whole
/// burst and per-bit decision statistics.  `priors` supplies the a-priori
/// feedback (uniform on the first pass); `combine` selects the aggregation
/// rule for `iota`.
pub fn va_smsdd(
    set: &SampleSet,
    l: usize,
    noise: &NoiseModel,
    priors: &BitPriors,
    combine: SoftCombine,
    ops: &mut OpCounter,
) -> Result<Vec<SoftVaBit>, Error> {
    validate_depth(set, l)?;
    if priors.len() != set.n_symbols {
        return Err(Error::invalid_input("priors must cover every symbol"));
    }
    let n = set.n_symbols;
    let states = mem_states(l);
    let mut count_ops = OpCounter::new();
    let trace = TraceTable::build(set, &mut count_ops);
    // The soft detector is charged M (L+1) 2^L units per stage: its branch
    // metrics enter every window position a symbol participates in.
    count_ops.add_units(n as u64 * (set.m_order as u64) * (((l as u64) + 1) << l));
    ops.merge(&count_ops);

    let cal = 2.0 * noise.xi / noise.sigma2;
    let lam = |b: usize, s: usize, f: usize| -> f64 {
        cal * branch_from_ids(&trace, 0, l, b, s, f) + priors.log_symbol(b, f)
    };

    // Forward max metrics, stage 0..=n, anchored by the known reference.
    let mut uf = vec![vec![f64::NEG_INFINITY; states]; n + 1];
    uf[0][0] = 0.0;
    for b in 1..=n {
        for s in 0..states {
            if uf[b - 1][s] == f64::NEG_INFINITY {
                continue;
            }
            for f in 0..4usize {
                let ns = next_mem(s, f, l);
                let cand = uf[b - 1][s] + lam(b, s, f);
                if cand > uf[b][ns] {
                    uf[b][ns] = cand;
                }
            }
        }
        let mx = uf[b].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        uf[b].iter_mut().for_each(|v| *v -= mx);
    }

    // Backward max metrics; ub[b][s] is the best suffix score from state s
    // after stage b.
    let mut ub = vec![vec![0.0f64; states]; n + 1];
    for b in (1..=n).rev() {
        let mut cur = vec![f64::NEG_INFINITY; states];
        for (s, out) in cur.iter_mut().enumerate() {
            for f in 0..4usize {
                let ns = next_mem(s, f, l);
                let cand = lam(b, s, f) + ub[b][ns];
                if cand > *out {
                    *out = cand;
                }
            }
        }
        let mx = cur.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        cur.iter_mut().for_each(|v| *v -= mx);
        ub[b - 1] = cur;
    }

    let mut out = Vec::with_capacity(2 * n);
    for i in 1..=n {
        // Transition scores partitioned by each bit of the input symbol.
        let mut sums = [[0.0f64; 2]; 2];
        let mut maxes = [[f64::NEG_INFINITY; 2]; 2];
        for s in 0..states {
            if uf[i - 1][s] == f64::NEG_INFINITY {
                continue;
            }
            for f in 0..4usize {
                let ns = next_mem(s, f, l);
                let score = uf[i - 1][s] + lam(i, s, f) + ub[i][ns];
                let bits = [(f >> 1) as usize, (f & 1) as usize];
                for k in 0..2 {
                    sums[k][bits[k]] += score;
                    if score > maxes[k][bits[k]] {
                        maxes[k][bits[k]] = score;
                    }
                }
            }
        }
        for k in 0..2 {
            let llr = maxes[k][1] - maxes[k][0];
            let iota = match combine {
                SoftCombine::Sum => sums[k][1] - sums[k][0],
                SoftCombine::Max => llr,
            };
            out.push(SoftVaBit {
                symbol: i,
                k,
                iota,
                llr,
                extrinsic_llr: llr - priors.apriori_llr(i, k),
                decision: u8::from(iota >= 0.0),
            });
        }
    }
    Ok(out)
}
