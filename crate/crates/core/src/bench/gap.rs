//! Distance between measured operating points and a bound.
//!
//! The gap factor is the horizontal distance at matched accuracy:
//! `measured rate / bound rate`. Bound rates come from monotone
//! piecewise-linear interpolation of the curve in `(accuracy, rate)`.

use crate::bench::units::{to_bits_per_image, Metric, SotaSeries};
use crate::dms::{closed_form_curve, RaCurve};
use crate::error::{domain, Result};

/// Grid used when a closed-form bound is sampled for interpolation.
pub const DEFAULT_BOUND_GRID: usize = 1001;

/// Dense closed-form bound for `K` equiprobable classes.
pub fn closed_form_bound(k: u64) -> Result<RaCurve> {
    closed_form_curve(k, DEFAULT_BOUND_GRID)
}

/// Accuracies this close to the zero-rate end count as chance level; the
/// endpoint itself carries rounding from `1 - (1 - 1/K)`.
const CHANCE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundLookup {
    /// Bound rate at the accuracy; `clamped` when the accuracy exceeded the
    /// curve's maximum and the maximum was used.
    Rate { rate: f64, clamped: bool },
    /// At or below the curve's zero-rate accuracy; no finite factor exists.
    AtOrBelowChance,
}

/// Bound rate needed for `accuracy`.
pub fn bound_rate_at_accuracy(bound: &RaCurve, accuracy: f64) -> Result<BoundLookup> {
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(domain(format!("accuracy {accuracy} outside [0, 1]")));
    }
    let pts = bound.points();
    if accuracy <= bound.min_accuracy() + CHANCE_SLACK {
        return Ok(BoundLookup::AtOrBelowChance);
    }
    if accuracy >= bound.max_accuracy() {
        return Ok(BoundLookup::Rate {
            rate: pts[0].rate,
            clamped: accuracy > bound.max_accuracy(),
        });
    }
    // accuracy descends along the curve
    let i = pts.partition_point(|p| p.accuracy >= accuracy);
    let (hi, lo) = (pts[i - 1], pts[i]);
    let t = (accuracy - lo.accuracy) / (hi.accuracy - lo.accuracy);
    let rate = lo.rate + t * (hi.rate - lo.rate);
    if rate <= 0.0 {
        return Ok(BoundLookup::AtOrBelowChance);
    }
    Ok(BoundLookup::Rate {
        rate,
        clamped: false,
    })
}

/// Highest accuracy the bound allows at `rate` bits, by interpolation.
pub fn bound_accuracy_at_rate(bound: &RaCurve, rate: f64) -> f64 {
    let pts = bound.points();
    if rate >= pts[0].rate {
        return pts[0].accuracy;
    }
    // rate is non-increasing along the curve; find the first point at or below `rate`
    let i = pts.partition_point(|p| p.rate > rate);
    if i >= pts.len() {
        return pts[pts.len() - 1].accuracy;
    }
    let (hi, lo) = (pts[i - 1], pts[i]);
    if hi.rate == lo.rate {
        return lo.accuracy;
    }
    let t = (rate - lo.rate) / (hi.rate - lo.rate);
    lo.accuracy + t * (hi.accuracy - lo.accuracy)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapFactor {
    Finite {
        factor: f64,
        bound_rate: f64,
        clamped: bool,
    },
    Undefined,
}

impl GapFactor {
    pub fn factor(&self) -> Option<f64> {
        match self {
            GapFactor::Finite { factor, .. } => Some(*factor),
            GapFactor::Undefined => None,
        }
    }
}

/// `rate / bound_rate(accuracy)` for a point with rate in bits per image.
pub fn gap_factor(bound: &RaCurve, rate_bits: f64, accuracy: f64) -> Result<GapFactor> {
    if rate_bits.is_nan() || rate_bits < 0.0 {
        return Err(domain(format!("rate {rate_bits} is negative")));
    }
    Ok(match bound_rate_at_accuracy(bound, accuracy)? {
        BoundLookup::Rate { rate, clamped } => GapFactor::Finite {
            factor: rate_bits / rate,
            bound_rate: rate,
            clamped,
        },
        BoundLookup::AtOrBelowChance => GapFactor::Undefined,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapEntry {
    pub accuracy: f64,
    pub sota_rate_bits: f64,
    pub bound_rate_bits: Option<f64>,
    pub gap_factor: Option<f64>,
    pub clamped: bool,
    /// Bound accuracy at the measured rate minus the measured accuracy.
    pub accuracy_gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSummary {
    pub min: f64,
    pub max: f64,
    pub geometric_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub dataset: String,
    pub method: String,
    pub metric: Metric,
    pub entries: Vec<GapEntry>,
    /// Over the finite factors; `None` when there are none.
    pub summary: Option<GapSummary>,
}

/// Gap factors for every point of a series. Series measured in mAP are
/// carried through with no bound or factor, since mAP is not classification
/// accuracy.
pub fn gap_report(bound: &RaCurve, series: &SotaSeries) -> Result<GapReport> {
    let series = to_bits_per_image(series)?;
    let mut entries = Vec::with_capacity(series.points.len());
    for p in &series.points {
        let entry = if series.metric == Metric::Map {
            GapEntry {
                accuracy: p.accuracy,
                sota_rate_bits: p.rate,
                bound_rate_bits: None,
                gap_factor: None,
                clamped: false,
                accuracy_gap: None,
            }
        } else {
            let g = gap_factor(bound, p.rate, p.accuracy)?;
            let (bound_rate, factor, clamped) = match g {
                GapFactor::Finite {
                    factor,
                    bound_rate,
                    clamped,
                } => (Some(bound_rate), Some(factor), clamped),
                GapFactor::Undefined => (None, None, false),
            };
            GapEntry {
                accuracy: p.accuracy,
                sota_rate_bits: p.rate,
                bound_rate_bits: bound_rate,
                gap_factor: factor,
                clamped,
                accuracy_gap: Some(bound_accuracy_at_rate(bound, p.rate) - p.accuracy),
            }
        };
        entries.push(entry);
    }
    let factors: Vec<f64> = entries.iter().filter_map(|e| e.gap_factor).collect();
    let summary = (!factors.is_empty()).then(|| GapSummary {
        min: factors.iter().copied().fold(f64::INFINITY, f64::min),
        max: factors.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        geometric_mean: (factors.iter().map(|f| f.ln()).sum::<f64>() / factors.len() as f64).exp(),
    });
    Ok(GapReport {
        dataset: series.dataset,
        method: series.method,
        metric: series.metric,
        entries,
        summary,
    })
}
