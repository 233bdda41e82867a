//! Simulation configuration: flat key-value files, defaults, environment
//! overrides.
//!
//! The config file is a plain text `key = value` format, one pair per line,
//! `#` comments allowed.  Lists (the SNR grid) are comma-separated.  Every
//! key has a default; CLI flags override file values, and the environment
//! variables `MSDD_SEED` / `MSDD_WORKERS` override the master seed and
//! worker count.

use crate::channel::{ChannelProfile, ProfileKind};
use crate::coding::SisoAlgo;
use crate::error::Error;
use crate::viterbi::SoftCombine;
use crate::waveform::FrameTiming;

use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Which receiver chain a record describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    /// One-symbol differential detection (window order 1).
    Dd,
    /// Sliding exhaustive hard window detection.
    Glrt,
    /// Soft forward/backward detection, hard decisions from the APPs.
    Bp,
    /// Hard Viterbi over the truncated metric.
    VaHmsdd,
    /// Soft Viterbi, hard decisions from the soft statistic.
    VaSmsdd,
    /// Coherent rake reference with genie channel knowledge.
    Rake,
    /// Hard window detection plus convolutional decoding (no feedback).
    CodedGlrt,
    /// Iterative detection and decoding with the soft trellis detector.
    IddBp,
    /// Iterative detection and decoding with the soft Viterbi detector.
    IddVaSmsdd,
}

impl DetectorKind {
    pub fn is_coded(self) -> bool {
        matches!(self, DetectorKind::CodedGlrt | DetectorKind::IddBp | DetectorKind::IddVaSmsdd)
    }

    pub fn label(self) -> &'static str {
        match self {
            DetectorKind::Dd => "dd",
            DetectorKind::Glrt => "glrt",
            DetectorKind::Bp => "bp",
            DetectorKind::VaHmsdd => "va-hmsdd",
            DetectorKind::VaSmsdd => "va-smsdd",
            DetectorKind::Rake => "rake",
            DetectorKind::CodedGlrt => "coded-glrt",
            DetectorKind::IddBp => "idd-bp",
            DetectorKind::IddVaSmsdd => "idd-va-smsdd",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "dd" => Ok(DetectorKind::Dd),
            "glrt" => Ok(DetectorKind::Glrt),
            "bp" => Ok(DetectorKind::Bp),
            "va-hmsdd" => Ok(DetectorKind::VaHmsdd),
            "va-smsdd" => Ok(DetectorKind::VaSmsdd),
            "rake" => Ok(DetectorKind::Rake),
            "coded-glrt" => Ok(DetectorKind::CodedGlrt),
            "idd-bp" => Ok(DetectorKind::IddBp),
            "idd-va-smsdd" => Ok(DetectorKind::IddVaSmsdd),
            other => Err(Error::invalid_config(format!("unknown detector '{other}'"))),
        }
    }
}

/// Source of the energy parameter fed to the soft metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum XiMode {
    /// From the channel realization (oracle tests).
    Genie,
    /// From the received samples (deployable receiver).
    Estimated,
}

/// Full simulation parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    pub detector: DetectorKind,
    pub m: usize,
    pub l: usize,
    pub q: usize,
    /// Information symbols per burst.
    pub n_symbols: usize,
    pub ebn0_db: Vec<f64>,
    #[serde(skip)]
    pub profile: ChannelProfile,
    pub profile_name: String,
    pub xi_mode: XiMode,
    /// Detector/decoder rounds for the iterative chains.
    pub iterations: usize,
    #[serde(skip)]
    pub combine: SoftCombine,
    #[serde(skip)]
    pub siso: SisoAlgo,
    pub master_seed: u64,
    /// Per-point budget: stop after this many information bits.
    pub max_bits: u64,
    /// Per-point target: stop once every detector has this many bit errors.
    pub min_errors: u64,
    pub rake_fingers: usize,
    pub workers: Option<usize>,
    #[serde(skip)]
    pub timing: FrameTiming,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub audit_log: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            detector: DetectorKind::Bp,
            m: 2,
            l: 2,
            q: 1,
            n_symbols: 50,
            ebn0_db: vec![8.0, 10.0, 12.0, 14.0, 16.0],
            profile: ChannelProfile::clustered_default(),
            profile_name: "clustered".to_string(),
            xi_mode: XiMode::Genie,
            iterations: 4,
            combine: SoftCombine::Max,
            siso: SisoAlgo::MaxLog,
            master_seed: 1,
            max_bits: 200_000,
            min_errors: 100,
            rake_fingers: 12,
            workers: None,
            timing: FrameTiming::defaults(),
            out_csv: None,
            out_json: None,
            audit_log: None,
        }
    }
}

/// Parsed key-value file.
#[derive(Debug, Clone, Default)]
pub struct KvMap(pub BTreeMap<String, String>);

impl KvMap {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::invalid_config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parse_as<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Error> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::invalid_config(format!("bad value for '{key}': '{v}'"))),
        }
    }
}

/// Builds a channel profile from config keys (rates per ns, decays in ns).
pub fn profile_from_kv(kv: &KvMap) -> Result<(ChannelProfile, String), Error> {
    let name = kv.get("profile").unwrap_or("clustered").to_string();
    let mut profile = match name.as_str() {
        "clustered" => ChannelProfile::clustered_default(),
        "single_exp" => ChannelProfile::single_exponential_default(),
        "single_path" => ChannelProfile::single_path(10e-9, 1.0),
        other => return Err(Error::invalid_config(format!("unknown profile '{other}'"))),
    };
    if let Some(v) = kv.parse_as::<f64>("cluster_rate_per_ns")? {
        profile.cluster_rate = v * 1e9;
    }
    if let Some(v) = kv.parse_as::<f64>("ray_rate_per_ns")? {
        profile.ray_rate = v * 1e9;
    }
    if let Some(v) = kv.parse_as::<f64>("cluster_decay_ns")? {
        profile.cluster_decay = v * 1e-9;
    }
    if let Some(v) = kv.parse_as::<f64>("ray_decay_ns")? {
        profile.ray_decay = v * 1e-9;
    }
    if let Some(v) = kv.parse_as::<f64>("path_delay_ns")? {
        profile.path_delay = v * 1e-9;
    }
    if let Some(v) = kv.parse_as::<f64>("path_energy")? {
        profile.path_energy = v;
    }
    if profile.kind != ProfileKind::SinglePath
        && (profile.ray_rate <= 0.0 || profile.ray_decay <= 0.0)
    {
        return Err(Error::invalid_config("ray rate and decay must be positive"));
    }
    Ok((profile, name))
}

impl SimConfig {
    /// Loads a config from key-value text, starting from the defaults.
    pub fn from_kv_text(text: &str) -> Result<Self, Error> {
        let kv = KvMap::parse(text)?;
        Self::from_kv(&kv)
    }

    pub fn from_kv(kv: &KvMap) -> Result<Self, Error> {
        let mut cfg = SimConfig::default();
        if let Some(v) = kv.get("detector") {
            cfg.detector = DetectorKind::parse(v)?;
        }
        if let Some(v) = kv.parse_as::<usize>("m")? {
            cfg.m = v;
        }
        cfg.l = cfg.m; // default L tracks M unless given
        if let Some(v) = kv.parse_as::<usize>("l")? {
            cfg.l = v;
        }
        if let Some(v) = kv.parse_as::<usize>("q")? {
            cfg.q = v;
        }
        if let Some(v) = kv.parse_as::<usize>("n_symbols")? {
            cfg.n_symbols = v;
        }
        if let Some(grid) = kv.get("ebn0_db") {
            cfg.ebn0_db = grid
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Error::invalid_config(format!("bad ebn0_db grid '{grid}'")))?;
        }
        let (profile, name) = profile_from_kv(kv)?;
        cfg.profile = profile;
        cfg.profile_name = name;
        if let Some(v) = kv.get("xi_mode") {
            cfg.xi_mode = match v {
                "genie" => XiMode::Genie,
                "estimated" => XiMode::Estimated,
                other => return Err(Error::invalid_config(format!("unknown xi_mode '{other}'"))),
            };
        }
        if let Some(v) = kv.parse_as::<usize>("iterations")? {
            cfg.iterations = v;
        }
        if let Some(v) = kv.get("combine") {
            cfg.combine = match v {
                "max" => SoftCombine::Max,
                "sum" => SoftCombine::Sum,
                other => return Err(Error::invalid_config(format!("unknown combine '{other}'"))),
            };
        }
        if let Some(v) = kv.get("siso") {
            cfg.siso = match v {
                "maxlog" => SisoAlgo::MaxLog,
                "logmap" => SisoAlgo::LogMap,
                other => return Err(Error::invalid_config(format!("unknown siso '{other}'"))),
            };
        }
        if let Some(v) = kv.parse_as::<u64>("master_seed")? {
            cfg.master_seed = v;
        }
        if let Some(v) = kv.parse_as::<u64>("max_bits")? {
            cfg.max_bits = v;
        }
        if let Some(v) = kv.parse_as::<u64>("min_errors")? {
            cfg.min_errors = v;
        }
        if let Some(v) = kv.parse_as::<usize>("rake_fingers")? {
            cfg.rake_fingers = v;
        }
        if let Some(v) = kv.parse_as::<usize>("workers")? {
            cfg.workers = Some(v);
        }
        let tm = kv.parse_as::<f64>("tm_ns")?.unwrap_or(0.287) * 1e-9;
        let tf = kv.parse_as::<f64>("tf_ns")?.unwrap_or(80.0) * 1e-9;
        let tn = kv.parse_as::<f64>("tn_ns")?.unwrap_or(40.0) * 1e-9;
        let ti = kv.parse_as::<f64>("ti_ns")?.unwrap_or(40.0) * 1e-9;
        let ovs = kv.parse_as::<usize>("oversampling")?.unwrap_or(16);
        cfg.timing = FrameTiming::new(tm, tf, tn, ti, ovs)?;
        if let Some(v) = kv.get("out_csv") {
            cfg.out_csv = Some(PathBuf::from(v));
        }
        if let Some(v) = kv.get("out_json") {
            cfg.out_json = Some(PathBuf::from(v));
        }
        if let Some(v) = kv.get("audit_log") {
            cfg.audit_log = Some(PathBuf::from(v));
        }
        cfg.apply_env();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies the `MSDD_SEED` / `MSDD_WORKERS` environment overrides.
    pub fn apply_env(&mut self) {
        if let Ok(v) = std::env::var("MSDD_SEED") {
            if let Ok(seed) = v.parse() {
                self.master_seed = seed;
            }
        }
        if let Ok(v) = std::env::var("MSDD_WORKERS") {
            if let Ok(w) = v.parse() {
                self.workers = Some(w);
            }
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.m < 1 {
            return Err(Error::invalid_config("window order M must be at least 1"));
        }
        if self.l < 1 || self.l > self.m {
            return Err(Error::invalid_config(format!(
                "memory depth L = {} must satisfy 1 <= L <= M = {}",
                self.l, self.m
            )));
        }
        if self.q < 1 {
            return Err(Error::invalid_config("at least one receive antenna"));
        }
        if self.n_symbols < 1 {
            return Err(Error::invalid_config("at least one symbol per burst"));
        }
        if self.ebn0_db.is_empty() {
            return Err(Error::invalid_config("empty SNR grid"));
        }
        if matches!(self.detector, DetectorKind::Bp | DetectorKind::IddBp) {
            // Surface the state-cap error at config time.
            crate::trellis::Trellis::new(self.m)?;
        }
        if self.detector.is_coded() && self.n_symbols < 8 {
            return Err(Error::invalid_config(
                "coded chains need bursts longer than the termination tail",
            ));
        }
        if self.detector.is_coded() && self.iterations < 1 {
            return Err(Error::invalid_config("iterative chains need at least one round"));
        }
        if self.detector == DetectorKind::Rake && self.rake_fingers < 1 {
            return Err(Error::invalid_config("rake needs at least one finger"));
        }
        Ok(())
    }

    /// Information bits carried per burst for this chain.
    pub fn info_bits_per_burst(&self) -> u64 {
        if self.detector.is_coded() {
            (self.n_symbols - crate::coding::ConvCode::standard().memory) as u64
        } else {
            2 * self.n_symbols as u64
        }
    }

    /// Noise PSD parameter for a target Eb/N0 in dB.
    ///
    /// Eb is the expected energy per information bit captured by a single
    /// receive antenna (per-pair normalization `E[eps] = 1`, two transmit
    /// antennas, two pulses per symbol), including the reference-symbol
    /// overhead and, for coded chains, the code rate and termination tail.
    /// Additional receive antennas contribute array gain on top of the
    /// fixed Eb/N0, which is how the receive-diversity trend shows up.
    pub fn n0_for_ebn0_db(&self, ebn0_db: f64) -> f64 {
        let burst_energy = 4.0 * (self.n_symbols + 1) as f64;
        let eb = burst_energy / self.info_bits_per_burst() as f64;
        eb / 10f64.powf(ebn0_db / 10.0)
    }
}
