//! Autocorrelation-receiver sampling and the Gaussian window likelihood.
//!
//! For window index `i` and lag `m`, the receiver correlates the two frames
//! of symbol `i` against the two frames of symbol `i - m`, summed over
//! receive antennas:
//!
//! `Y_{i,m}(u,v) = sum_q int_0^Ti y_q(t + (2i+u-1) Tf) y_q(t + (2(i-m)+v-1) Tf) dt`
//!
//! Rows index the newer symbol's frames, columns the older symbol's frames.
//! For an ideal channel (orthogonal transmit channels, balanced energies)
//! the noiseless sample is `xi * (prod U_z)'` where the product runs over the
//! information symbols between the two positions and `xi` is the total
//! integrated channel energy.  The additive part has per-entry variance
//! `sigma^2 = N0 xi + Q W Ti N0^2 / 2` conditioned on the channel.
//!
//! Windows slide one symbol duration at a time.  Early windows (`i < M`)
//! carry the truncated lag set `{1..i}`; lag `m = i` reaches the known
//! reference symbol, which anchors detection at the start of the burst.

use crate::channel::ChannelRealization;
use crate::error::Error;
use crate::stc::{product_of_symbols, CodeMatrix};
use crate::util::trapezoid_product;
use crate::waveform::ReceivedBurst;

use std::io::Write;

/// Dense 2x2 real matrix used for correlation samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0; 2]; 2]);

    pub fn frob_norm_sq(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum()
    }

    /// `tr(self)`.
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    /// `tr(R self)` with `R = [[0,1],[-1,0]]`.
    pub fn trace_rot(&self) -> f64 {
        self.0[1][0] - self.0[0][1]
    }

    /// `tr(R^e self)` for a code-book exponent `e`.
    pub fn trace_pow(&self, e: u8) -> f64 {
        match e % 4 {
            0 => self.trace(),
            1 => self.trace_rot(),
            2 => -self.trace(),
            _ => -self.trace_rot(),
        }
    }

    /// Squared Frobenius distance to `xi * U'` for a code-book member `U`.
    pub fn dist_sq_to_template(&self, xi: f64, prod: CodeMatrix) -> f64 {
        let t = prod.transpose().entries();
        let mut acc = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let d = self.0[r][c] - xi * t[r][c] as f64;
                acc += d * d;
            }
        }
        acc
    }
}

/// One correlation sample `Y_{i,m}`.
#[derive(Debug, Clone, Copy)]
pub struct CorrelationSample {
    /// Window (newer symbol) index, `1..=N`.
    pub i: usize,
    /// Lag in symbol durations, `1..=min(i, M)`.
    pub m: usize,
    pub y: Mat2,
}

/// The lag samples of one observation window.
#[derive(Debug, Clone)]
pub struct ObservationWindow {
    pub i: usize,
    /// Samples for lags `1..=min(i, M)`, ascending lag order.
    pub lags: Vec<CorrelationSample>,
}

/// All correlation samples of a burst for a given window order `M`.
///
/// Samples are stored once and shared between the sliding windows, so
/// overlapping windows read identical values by construction.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub m_order: usize,
    pub n_symbols: usize,
    pub num_rx: usize,
    /// `samples[i-1][m-1]`.
    samples: Vec<Vec<Mat2>>,
}

impl SampleSet {
    /// Builds a sample set from precomputed matrices; `samples[i-1]` holds
    /// the lags `1..=len` of window `i`.
    pub fn from_raw(m_order: usize, num_rx: usize, samples: Vec<Vec<Mat2>>) -> Self {
        let n_symbols = samples.len();
        Self { m_order, n_symbols, num_rx, samples }
    }

    /// `Y_{i,m}`.
    pub fn get(&self, i: usize, m: usize) -> &Mat2 {
        &self.samples[i - 1][m - 1]
    }

    /// Sample pairing symbol `later` (rows) against symbol `earlier`
    /// (columns); requires `later - earlier <= min(later, M)`.
    pub fn pair(&self, later: usize, earlier: usize) -> &Mat2 {
        self.get(later, later - earlier)
    }

    pub fn lag_count(&self, i: usize) -> usize {
        self.samples[i - 1].len()
    }

    /// Copy of window `i` (lags `1..=min(i, M)`).
    pub fn window(&self, i: usize) -> ObservationWindow {
        ObservationWindow {
            i,
            lags: (1..=self.lag_count(i))
                .map(|m| CorrelationSample { i, m, y: self.samples[i - 1][m - 1] })
                .collect(),
        }
    }

    pub fn windows(&self) -> Vec<ObservationWindow> {
        (1..=self.n_symbols).map(|i| self.window(i)).collect()
    }

    /// Sum of squared Frobenius norms over all stored samples.
    pub fn total_frob_sq(&self) -> f64 {
        self.samples.iter().flatten().map(Mat2::frob_norm_sq).sum()
    }

    pub fn sample_count(&self) -> usize {
        self.samples.iter().map(Vec::len).sum()
    }

    /// Writes all samples as CSV with columns `i, m, Y11, Y12, Y21, Y22`.
    pub fn export_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "i,m,Y11,Y12,Y21,Y22")?;
        for i in 1..=self.n_symbols {
            for m in 1..=self.lag_count(i) {
                let y = self.get(i, m).0;
                writeln!(
                    out,
                    "{},{},{:.15e},{:.15e},{:.15e},{:.15e}",
                    i, m, y[0][0], y[0][1], y[1][0], y[1][1]
                )?;
            }
        }
        Ok(())
    }
}

/// Computes a single correlation sample `Y_{i,m}` by the trapezoid rule on
/// the waveform grid.
pub fn correlate(burst: &ReceivedBurst, i: usize, m: usize) -> Result<CorrelationSample, Error> {
    if m < 1 || m > i {
        return Err(Error::invalid_input(format!("lag {m} out of range 1..={i}")));
    }
    if i > burst.n_symbols {
        return Err(Error::invalid_input(format!(
            "window index {i} exceeds burst symbols {}",
            burst.n_symbols
        )));
    }
    let dt = burst.timing.dt;
    let mut y = [[0.0f64; 2]; 2];
    for q in 0..burst.y.len() {
        for (u, row) in y.iter_mut().enumerate() {
            let seg_new = burst.frame_segment(q, 2 * i + u);
            for (v, val) in row.iter_mut().enumerate() {
                let seg_old = burst.frame_segment(q, 2 * (i - m) + v);
                *val += trapezoid_product(seg_new, seg_old, dt);
            }
        }
    }
    Ok(CorrelationSample { i, m, y: Mat2(y) })
}

/// Computes every window's lag samples for the burst: windows `i = 1..=N`,
/// lags `m = 1..=min(i, M)`.
pub fn sample_windows(burst: &ReceivedBurst, m_order: usize) -> Result<SampleSet, Error> {
    if m_order < 1 {
        return Err(Error::invalid_input("window order M must be at least 1"));
    }
    let n = burst.n_symbols;
    let mut samples = Vec::with_capacity(n);
    for i in 1..=n {
        let lags = (1..=m_order.min(i))
            .map(|m| correlate(burst, i, m).map(|s| s.y))
            .collect::<Result<Vec<_>, _>>()?;
        samples.push(lags);
    }
    Ok(SampleSet { m_order, n_symbols: n, num_rx: burst.y.len(), samples })
}

/// Energy statistic `sqrt(sum_{i,m} ||Y_{i,m}||_F^2) / Nf` over all stored
/// samples (`Nf = 2` frames per symbol).
///
/// The statistic is homogeneous of degree one in the samples; its relation to
/// the genie energy depends on the number of samples aggregated, so the
/// calibrated variant below is what the simulator feeds to the detectors.
pub fn estimate_xi(samples: &SampleSet) -> f64 {
    samples.total_frob_sq().sqrt() / 2.0
}

/// Per-sample-normalized energy estimate: `sqrt(mean ||Y||_F^2 / 2)`.
///
/// For the ideal noiseless channel every sample has `||Y||_F^2 = 2 xi^2`, so
/// this recovers `xi`; additive noise biases it upward by
/// `~ sigma^2 / xi` at low SNR.
pub fn estimate_xi_calibrated(samples: &SampleSet) -> f64 {
    let k = samples.sample_count();
    if k == 0 {
        return 0.0;
    }
    (samples.total_frob_sq() / (2.0 * k as f64)).sqrt()
}

/// Energy and conditional-variance model used by the soft metrics.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    /// Total integrated channel energy `xi` (genie or estimated).
    pub xi: f64,
    /// Conditional per-entry variance `sigma^2 = N0 xi + Q W Ti N0^2 / 2`.
    pub sigma2: f64,
    pub n0: f64,
    pub w: f64,
    pub ti: f64,
    pub q: usize,
}

impl NoiseModel {
    pub fn new(xi: f64, n0: f64, w: f64, ti: f64, q: usize) -> Result<Self, Error> {
        let sigma2 = n0 * xi + q as f64 * w * ti * n0 * n0 / 2.0;
        if !(sigma2 > 0.0) {
            return Err(Error::invalid_input(format!(
                "conditional variance must be positive, got {sigma2:e}"
            )));
        }
        Ok(Self { xi, sigma2, n0, w, ti, q })
    }

    /// Genie model: `xi` from the channel realization.
    pub fn genie(ch: &ChannelRealization, n0: f64, w: f64) -> Result<Self, Error> {
        Self::new(ch.xi(), n0, w, ch.timing.ti, ch.num_rx())
    }
}

/// Log-likelihood of one observation window for a candidate symbol stretch.
///
/// `candidate` is `[U_{i-L+1}, ..., U_i]` (oldest first) where `L` is the
/// window's lag count.  Returns
/// `sum_m -||Y_{i,m} - xi (prod_{z=i-m+1}^{i} U_z)'||_F^2 / sigma^2`,
/// i.e. the log of the Gaussian window likelihood up to a candidate-
/// independent constant.
pub fn window_log_likelihood(
    win: &ObservationWindow,
    candidate: &[CodeMatrix],
    noise: &NoiseModel,
) -> Result<f64, Error> {
    if candidate.len() != win.lags.len() {
        return Err(Error::invalid_input(format!(
            "candidate length {} must equal window lag count {}",
            candidate.len(),
            win.lags.len()
        )));
    }
    let mut acc = 0.0;
    for sample in &win.lags {
        let prod = product_of_symbols(&candidate[candidate.len() - sample.m..]);
        acc -= sample.y.dist_sq_to_template(noise.xi, prod) / noise.sigma2;
    }
    Ok(acc)
}
