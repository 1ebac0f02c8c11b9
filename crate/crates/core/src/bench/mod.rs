//! Data ingestion, unit normalization, gap analysis against a bound, and
//! CSV/SVG output. The `rabound` binary is a thin layer over this module.

pub mod emit;
pub mod gap;
pub mod io;
pub mod units;

pub use emit::{curve_csv, parse_curve_csv, report_csv, series_csv, Plot};
pub use gap::{
    bound_rate_at_accuracy, gap_factor, gap_report, GapEntry, GapFactor, GapReport, GapSummary,
};
pub use io::{load_pmf, load_sota, parse_pmf, parse_sota};
pub use units::{
    from_bits_per_image, to_bits_per_image, Metric, RateUnit, Resolution, SotaPoint, SotaSeries,
};
