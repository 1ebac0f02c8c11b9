//! Published rate-accuracy measurements and their rate units.
//!
//! Bits per image (one task instance) is the canonical unit. Bits per pixel
//! and bits per point are presentation units that need the image resolution
//! or the point-cloud size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateUnit {
    BitsPerImage,
    BitsPerPoint,
    BitsPerPixel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Resolution {
    Image { width: u64, height: u64 },
    PointCloud { points: u64 },
}

/// What the `accuracy` column of a series measures. Only classification
/// accuracy can be compared against a rate-accuracy bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Accuracy,
    #[serde(alias = "mAP")]
    Map,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SotaPoint {
    pub rate: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SotaSeries {
    pub dataset: String,
    pub method: String,
    pub unit: RateUnit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<Resolution>,
    #[serde(default)]
    pub metric: Metric,
    pub points: Vec<SotaPoint>,
}

impl SotaSeries {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidSeries(format!("{}: no points", self.method)));
        }
        for p in &self.points {
            if !(0.0..=1.0).contains(&p.accuracy) {
                return Err(Error::InvalidSeries(format!(
                    "{}: accuracy {} outside [0, 1]",
                    self.method, p.accuracy
                )));
            }
            if !p.rate.is_finite() || p.rate < 0.0 {
                return Err(Error::InvalidSeries(format!(
                    "{}: rate {} is not >= 0",
                    self.method, p.rate
                )));
            }
        }
        scale(self.unit, self.resolution.as_ref()).map(|_| ())
    }
}

/// Multiplier from `unit` to bits per image.
fn scale(unit: RateUnit, resolution: Option<&Resolution>) -> Result<f64> {
    match (unit, resolution) {
        (RateUnit::BitsPerImage, _) => Ok(1.0),
        (RateUnit::BitsPerPixel, Some(Resolution::Image { width, height }))
            if *width > 0 && *height > 0 =>
        {
            Ok(*width as f64 * *height as f64)
        }
        (RateUnit::BitsPerPoint, Some(Resolution::PointCloud { points })) if *points > 0 => {
            Ok(*points as f64)
        }
        (RateUnit::BitsPerPixel, _) => Err(Error::InvalidSeries(
            "bits_per_pixel needs a resolution {width, height} with both >= 1".into(),
        )),
        (RateUnit::BitsPerPoint, _) => Err(Error::InvalidSeries(
            "bits_per_point needs a resolution {points} >= 1".into(),
        )),
    }
}

/// Express every rate in bits per image.
pub fn to_bits_per_image(series: &SotaSeries) -> Result<SotaSeries> {
    let factor = scale(series.unit, series.resolution.as_ref())?;
    let mut out = series.clone();
    for p in &mut out.points {
        p.rate *= factor;
    }
    out.unit = RateUnit::BitsPerImage;
    Ok(out)
}

/// Convert a rate in bits per image to `unit`.
pub fn from_bits_per_image(
    bits: f64,
    unit: RateUnit,
    resolution: Option<&Resolution>,
) -> Result<f64> {
    Ok(bits / scale(unit, resolution)?)
}
