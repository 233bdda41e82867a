//! Hard multiple-symbol detection by exhaustive likelihood maximization,
//! and the one-symbol differential detector it degenerates to at `M = 1`.
//!
//! The window metric is the trace form of the log likelihood: for the window
//! ending at symbol `i` with candidates `U_{i-M+1} .. U_i`,
//!
//! `Lambda = sum_{i-M <= a < b <= i} tr( (prod_{z=a+1}^{b} U_z) Ypair(b, a) )`
//!
//! i.e. every ordered symbol pair inside the window contributes one
//! cross-correlation term.  Because the code book is a group, the product is
//! always one of four matrices and each pair term is `+-` one of two base
//! traces; the implementation shares those base traces across all candidates
//! and resolves candidates by exponent prefix sums.
//!
//! Burst detection slides the window one symbol at a time; every window
//! decides its oldest still-undecided symbol and the last window decides its
//! remaining tail.  Ties in the argmax go to the lexicographically smallest
//! candidate.

use crate::acr::SampleSet;
use crate::error::Error;
use crate::ops::OpCounter;
use crate::stc::CodeMatrix;

/// Base traces `tr(Y)` and `tr(R Y)` for every stored sample; all candidate
/// pair terms are sign flips of these.
#[derive(Debug, Clone)]
pub struct TraceTable {
    /// `b[i-1][m-1] = (tr(Y_{i,m}), tr(R Y_{i,m}))`.
    b: Vec<Vec<(f64, f64)>>,
}

impl TraceTable {
    pub fn build(set: &SampleSet, ops: &mut OpCounter) -> Self {
        let mut b = Vec::with_capacity(set.n_symbols);
        for i in 1..=set.n_symbols {
            let row: Vec<(f64, f64)> = (1..=set.lag_count(i))
                .map(|m| {
                    let y = set.get(i, m);
                    (y.trace(), y.trace_rot())
                })
                .collect();
            ops.add_trace_evals(2 * row.len() as u64);
            b.push(row);
        }
        Self { b }
    }

    /// `tr(R^e Y_{i,m})` for the pair `(later = i, earlier = i - m)`.
    pub fn value(&self, i: usize, m: usize, e: u8) -> f64 {
        let (b0, b1) = self.b[i - 1][m - 1];
        match e % 4 {
            0 => b0,
            1 => b1,
            2 => -b0,
            _ => -b1,
        }
    }
}

/// Exhaustive window metric for a candidate stretch `U_{i-L+1} .. U_i`
/// (oldest first, `L = candidate.len()`).
pub fn glrt_metric(set: &SampleSet, i: usize, candidate: &[CodeMatrix]) -> Result<f64, Error> {
    let l = candidate.len();
    if l == 0 || l > i || l > set.m_order {
        return Err(Error::invalid_input(format!(
            "candidate length {l} not supported by window {i} with order {}",
            set.m_order
        )));
    }
    // Exponent prefix sums over the candidate stretch.
    let mut prefix = vec![0u8; l + 1];
    for (j, u) in candidate.iter().enumerate() {
        prefix[j + 1] = (prefix[j] + u.exponent()) % 4;
    }
    let base = i - l; // symbol index of prefix position 0
    let mut acc = 0.0;
    for beta in 1..=l {
        for alpha in 0..beta {
            let e = (4 + prefix[beta] - prefix[alpha]) % 4;
            let later = base + beta;
            let m = beta - alpha;
            let y = set.get(later, m);
            acc += y.trace_pow(e);
        }
    }
    Ok(acc)
}

/// Result of one exhaustive window search.
#[derive(Debug, Clone)]
pub struct WindowDecision {
    /// Window anchor (newest symbol index).
    pub i: usize,
    /// Decided stretch `U_{i-L+1} .. U_i`, oldest first.
    pub symbols: Vec<CodeMatrix>,
    pub metric: f64,
}

/// Exhaustive argmax over all `4^len` candidate stretches for the window
/// anchored at symbol `i`.
pub fn glrt_detect_window(
    set: &SampleSet,
    trace: &TraceTable,
    i: usize,
    len: usize,
    ops: &mut OpCounter,
) -> Result<WindowDecision, Error> {
    if len == 0 || len > i || len > set.m_order {
        return Err(Error::invalid_input(format!(
            "window length {len} invalid at anchor {i} (order {})",
            set.m_order
        )));
    }
    // Unit accounting: (len + 1) pair/combine units per candidate rotation
    // class, 2^len classes per window.
    ops.add_units(((len as u64) + 1) << len);

    let base = i - len;
    let total = 1usize << (2 * len);
    let mut best_code = 0usize;
    let mut best_metric = f64::NEG_INFINITY;
    // Candidate code: oldest symbol in the most significant digit pair, so
    // ascending codes enumerate candidates in lexicographic order.
    let mut prefix = vec![0u8; len + 1];
    for code in 0..total {
        for j in 0..len {
            let f = (code >> (2 * (len - 1 - j))) & 3;
            prefix[j + 1] = (prefix[j] + CodeMatrix::from_index(f).unwrap().exponent()) % 4;
        }
        let mut acc = 0.0;
        for beta in 1..=len {
            let later = base + beta;
            for alpha in 0..beta {
                let e = (4 + prefix[beta] - prefix[alpha]) % 4;
                acc += trace.value(later, beta - alpha, e);
            }
        }
        if acc > best_metric {
            best_metric = acc;
            best_code = code;
        }
    }
    let symbols = (0..len)
        .map(|j| CodeMatrix::from_index((best_code >> (2 * (len - 1 - j))) & 3).unwrap())
        .collect();
    Ok(WindowDecision { i, symbols, metric: best_metric })
}

/// Sliding-window hard detection of the whole burst.
///
/// Window `i` (for `i = M..=N`) decides symbol `i - M + 1`; the final window
/// also decides its remaining tail.  Short bursts (`N <= M`) are decided by a
/// single exhaustive window.  `M = 1` is the conventional one-symbol
/// differential detector.
pub fn glrt_detect(set: &SampleSet, ops: &mut OpCounter) -> Result<Vec<CodeMatrix>, Error> {
    let n = set.n_symbols;
    let m = set.m_order;
    let trace = TraceTable::build(set, ops);
    let mut decisions: Vec<Option<CodeMatrix>> = vec![None; n];
    if n <= m {
        let w = glrt_detect_window(set, &trace, n, n, ops)?;
        for (j, &u) in w.symbols.iter().enumerate() {
            decisions[j] = Some(u);
        }
    } else {
        for i in m..=n {
            let w = glrt_detect_window(set, &trace, i, m, ops)?;
            // Oldest symbol of this window.
            decisions[i - m] = Some(w.symbols[0]);
            if i == n {
                for (j, &u) in w.symbols.iter().enumerate().skip(1) {
                    decisions[i - m + j] = Some(u);
                }
            }
        }
    }
    Ok(decisions.into_iter().map(Option::unwrap).collect())
}

/// Conventional one-symbol differential detection (adjacent-lag argmax).
pub fn dd_detect(set: &SampleSet, ops: &mut OpCounter) -> Result<Vec<CodeMatrix>, Error> {
    if set.m_order < 1 {
        return Err(Error::invalid_input("sample set must carry at least lag 1"));
    }
    ops.add_units(4 * set.n_symbols as u64); // (1+1) * 2^1 per window
    let mut out = Vec::with_capacity(set.n_symbols);
    for i in 1..=set.n_symbols {
        let y = set.get(i, 1);
        let mut best = 0usize;
        let mut best_v = f64::NEG_INFINITY;
        for u in CodeMatrix::all() {
            let v = y.trace_pow(u.exponent());
            if v > best_v {
                best_v = v;
                best = u.index();
            }
        }
        out.push(CodeMatrix::from_index(best).unwrap());
    }
    Ok(out)
}
