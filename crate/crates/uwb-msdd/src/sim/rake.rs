//! Coherent rake reference receiver with genie channel knowledge.
//!
//! Per antenna pair the receiver matched-filters each frame against a
//! template built from the strongest taps (default 12 fingers), combines
//! across receive antennas, detects each transmit matrix coherently among
//! the four matrices reachable from the reference, and recovers the
//! information symbols differentially.  It serves as the coherent
//! performance floor for the noncoherent chains.

use crate::channel::{ChannelRealization, SampledComposite, Tap};
use crate::error::Error;
use crate::stc::{CodeMatrix, DiffMatrix};
use crate::util::trapezoid_product;
use crate::waveform::{monocycle, ReceivedBurst, PULSE_HALF_SUPPORT_TM};

/// The four transmit matrices reachable from the reference.
fn transmit_candidates() -> [DiffMatrix; 4] {
    let d0 = DiffMatrix::reference();
    [0, 1, 2, 3].map(|f| d0.mul_symbol(CodeMatrix::from_index(f).unwrap()))
}

fn strongest_taps(taps: &[Tap], fingers: usize) -> Vec<Tap> {
    let mut sorted: Vec<Tap> = taps.to_vec();
    sorted.sort_by(|a, b| b.gain.abs().partial_cmp(&a.gain.abs()).unwrap());
    sorted.truncate(fingers);
    sorted
}

fn render_template(taps: &[Tap], ch: &ChannelRealization) -> SampledComposite {
    let timing = ch.timing;
    let pad = timing.pulse_pad_samples() as i64;
    let span = timing.tn_samples().max(timing.ti_samples()) as i64;
    let start = -pad;
    let len = (span + 2 * pad + 1) as usize;
    let mut samples = vec![0.0f64; len];
    let half = PULSE_HALF_SUPPORT_TM * timing.tm;
    for tap in taps {
        let lo = (((tap.delay_s - half) / timing.dt).floor() as i64).max(start);
        let hi = (((tap.delay_s + half) / timing.dt).ceil() as i64).min(start + len as i64 - 1);
        for idx in lo..=hi {
            let t = idx as f64 * timing.dt - tap.delay_s;
            samples[(idx - start) as usize] += tap.gain * monocycle(t, timing.tm);
        }
    }
    SampledComposite { start, samples }
}

/// Coherent detection of all information symbols of a burst.
pub fn rake_detect(
    burst: &ReceivedBurst,
    ch: &ChannelRealization,
    fingers: usize,
) -> Result<Vec<CodeMatrix>, Error> {
    if fingers < 1 {
        return Err(Error::invalid_input("rake needs at least one finger"));
    }
    let timing = burst.timing;
    let num_rx = ch.num_rx();
    let ti = timing.ti_samples();

    // Truncated matched-filter templates over [0, Ti].
    let mut templates: Vec<Vec<Vec<f64>>> = Vec::with_capacity(2);
    for p in 0..2 {
        let mut row = Vec::with_capacity(num_rx);
        for q in 0..num_rx {
            let sel = strongest_taps(ch.taps(p, q), fingers);
            let c = render_template(&sel, ch);
            let from = (-c.start) as usize;
            let to = (from + ti).min(c.samples.len().saturating_sub(1));
            row.push(c.samples[from..=to].to_vec());
        }
        templates.push(row);
    }

    // Per-frame matched filter outputs, combined over receive antennas.
    let n_frames = burst.num_frames();
    let mut r = vec![[0.0f64; 2]; n_frames]; // r[j][p]
    for (j, rj) in r.iter_mut().enumerate() {
        for (p, rp) in rj.iter_mut().enumerate() {
            for q in 0..num_rx {
                let seg = burst.frame_segment(q, j);
                let tpl = &templates[p][q];
                *rp += trapezoid_product(&seg[..tpl.len()], tpl, timing.dt);
            }
        }
    }

    // Coherent per-symbol detection of the transmit matrix, then
    // differential recovery of the information symbols.
    let candidates = transmit_candidates();
    let n = burst.n_symbols;
    let mut d_hat = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut best = 0usize;
        let mut best_v = f64::NEG_INFINITY;
        for (c, cand) in candidates.iter().enumerate() {
            let e = cand.entries();
            let mut v = 0.0;
            for p in 0..2 {
                for nn in 0..2 {
                    v += e[p][nn] as f64 * r[2 * i + nn][p];
                }
            }
            if v > best_v {
                best_v = v;
                best = c;
            }
        }
        d_hat.push(candidates[best]);
    }

    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        // U_i = (1/2) D_{i-1}' D_i, exact in the code book.
        let prod = d_hat[i - 1].times_transpose(d_hat[i]);
        // times_transpose gives D_{i-1} D_i'; we need its transpose halved.
        let m = [[prod[0][0] / 2, prod[1][0] / 2], [prod[0][1] / 2, prod[1][1] / 2]];
        let u = CodeMatrix::all()
            .into_iter()
            .find(|u| u.entries() == m)
            .ok_or_else(|| Error::invalid_input("differential recovery left the code book"))?;
        out.push(u);
    }
    Ok(out)
}
