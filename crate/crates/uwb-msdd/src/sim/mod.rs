//! Simulation harness: configuration, Monte Carlo BER sweeps, baselines,
//! complexity accounting, and result emission.

pub mod complexity;
pub mod config;
pub mod output;
pub mod rake;
pub mod sweep;
pub mod validate;

pub use complexity::{formula_units, run_complexity_report, run_relative_metrics, ComplexityReport, RelativeRecord};
pub use config::{DetectorKind, KvMap, SimConfig, XiMode};
pub use output::{build_description, write_ber_csv, write_complexity_csv, write_json_summary, write_relative_csv};
pub use rake::rake_detect;
pub use sweep::{
    interpolate_snr_at_ber, run_ber_sweep, run_ber_sweep_multi, run_rake_baseline,
    verify_audit_log, BerRecord,
};
pub use validate::{run_all as run_validation, ValidationOutcome};
