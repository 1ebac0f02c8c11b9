//! Rate-accuracy bounds for discrete analysis tasks.
//!
//! A classifier with `K` classes whose input is coded at `R` bits per
//! instance behaves like a lossy code for a discrete memoryless source over
//! the class labels, with accuracy `A = 1 - D` under Hamming distortion. The
//! rate-distortion function of that source is therefore the best any codec
//! can do, whatever it transmits.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`dms`] | closed-form `R(D)` for a uniform source, its inverse and large-`K` approximations |
//! | [`blahut_arimoto`] | `R(D)` for arbitrary sources and distortion matrices |
//! | [`achievability`] | fixed-length, Huffman and block codes turned into achievable points |
//! | [`config_count`] | exact counting of detection output configurations |
//! | [`bench`] | file formats, unit conversion, gap reports, CSV and SVG output |

pub mod achievability;
pub mod bench;
pub mod blahut_arimoto;
pub mod config_count;
pub mod dms;
mod error;

pub use error::{Error, Result};

pub use achievability::{
    block_fixed_rate, block_huffman_rate, canonical_code, classify_then_code_point,
    fixed_length_rate, huffman_code, AchievablePoint, CodeEntry, Codebook, Method,
};
pub use blahut_arimoto::{
    ba_curve, ba_curve_with, ba_point, d_max, entropy, hamming_matrix, BaCurve, BaSolution,
    DistortionSpec, SweepConfig,
};
pub use config_count::{
    bits_per_pixel, detection_config_count, log2_of_count, BigCount, DetectionModel,
};
pub use dms::{
    accuracy_at_rate, accuracy_slope_approx, binary_entropy, closed_form_curve, closed_form_rate,
    linear_rate_approx, AccuracyAtRate, CurveKind, Pmf, RaCurve, RaPoint,
};
