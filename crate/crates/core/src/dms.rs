//! Closed-form rate-accuracy mathematics for a uniform discrete memoryless
//! source under Hamming distortion.
//!
//! For `K` equiprobable labels the rate-distortion function is
//!
//! ```text
//! R(D) = log2 K - D log2(K-1) - H(D)     0 <= D <= 1 - 1/K
//! R(D) = 0                               D >= 1 - 1/K
//! ```
//!
//! where `H` is the binary entropy. Accuracy is `A = 1 - D`. All rates are in
//! bits per source symbol (one task instance).

use crate::error::{domain, Error, Result};

/// Tolerance on `sum(probs) == 1`.
pub const PMF_SUM_TOLERANCE: f64 = 1e-12;

/// Bisection stops once the accuracy bracket is narrower than this.
pub const BISECTION_TOLERANCE: f64 = 1e-10;

/// Slack allowed when checking that rate is non-increasing along a curve.
/// Numerically solved curves carry errors around 1e-10 bits.
pub const CURVE_RATE_SLACK: f64 = 1e-9;

/// A finite probability distribution over task labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPmf("empty distribution".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidPmf(format!("entry {i} is {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PMF_SUM_TOLERANCE {
            return Err(Error::InvalidPmf(format!("entries sum to {sum}")));
        }
        Ok(Self {
            probs,
            labels: None,
        })
    }

    pub fn with_labels(probs: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::InvalidPmf(format!(
                "{} labels for {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        let mut pmf = Self::new(probs)?;
        pmf.labels = Some(labels);
        Ok(pmf)
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPmf("empty distribution".into()));
        }
        Self::new(vec![1.0 / k as f64; k])
    }

    /// Normalizes non-negative integer counts. At least one count must be
    /// positive.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u128 = counts.iter().map(|&c| c as u128).sum();
        if total == 0 {
            return Err(Error::InvalidPmf("all counts are zero".into()));
        }
        let total = total as f64;
        Self::new(counts.iter().map(|&c| c as f64 / total).collect())
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display name of label `i`: the supplied name, or the index.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(names) => names[i].clone(),
            None => i.to_string(),
        }
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_uniform(&self) -> bool {
        let first = self.probs[0];
        self.probs.iter().all(|&p| p == first)
    }
}

/// One point of a rate-accuracy curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaPoint {
    pub rate: f64,
    pub distortion: f64,
    pub accuracy: f64,
}

impl RaPoint {
    pub fn new(rate: f64, distortion: f64) -> Self {
        Self {
            rate,
            distortion,
            accuracy: 1.0 - distortion,
        }
    }
}

/// Where the points of a curve came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    ClosedFormUniform,
    BlahutArimoto,
    Achievable,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::ClosedFormUniform => "closed-form-uniform",
            CurveKind::BlahutArimoto => "blahut-arimoto",
            CurveKind::Achievable => "achievable",
        }
    }
}

/// Rate-accuracy points sorted by strictly increasing distortion with
/// non-increasing rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RaCurve {
    points: Vec<RaPoint>,
    kind: CurveKind,
}

impl RaCurve {
    pub fn new(points: Vec<RaPoint>, kind: CurveKind) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidCurve("no points".into()));
        }
        for p in &points {
            if !p.rate.is_finite() || p.rate < 0.0 {
                return Err(Error::InvalidCurve(format!("rate {} is not >= 0", p.rate)));
            }
            if !(0.0..=1.0).contains(&p.distortion) {
                return Err(Error::InvalidCurve(format!(
                    "distortion {} outside [0, 1]",
                    p.distortion
                )));
            }
        }
        for w in points.windows(2) {
            if w[1].distortion.is_nan() || w[1].distortion <= w[0].distortion {
                return Err(Error::InvalidCurve(format!(
                    "distortion not strictly increasing at D = {}",
                    w[1].distortion
                )));
            }
            if w[1].rate > w[0].rate + CURVE_RATE_SLACK {
                return Err(Error::InvalidCurve(format!(
                    "rate increases from {} to {} at D = {}",
                    w[0].rate, w[1].rate, w[1].distortion
                )));
            }
        }
        Ok(Self { points, kind })
    }

    pub fn points(&self) -> &[RaPoint] {
        &self.points
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Highest accuracy on the curve (the lowest-distortion point).
    pub fn max_accuracy(&self) -> f64 {
        self.points[0].accuracy
    }

    /// Lowest accuracy on the curve, reached at zero rate for a bound.
    pub fn min_accuracy(&self) -> f64 {
        self.points[self.points.len() - 1].accuracy
    }
}

/// `-p log2 p - (1-p) log2 (1-p)`, with `0 log2 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("binary entropy of {p}")));
    }
    Ok(xlog2x(p) + xlog2x(1.0 - p))
}

#[inline]
pub(crate) fn xlog2x(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn check_classes(k: u64) -> Result<()> {
    if k < 2 {
        return Err(domain(format!("need at least 2 classes, got {k}")));
    }
    Ok(())
}

/// Zero-rate threshold `1 - 1/K`.
pub fn zero_rate_distortion(k: u64) -> f64 {
    1.0 - 1.0 / k as f64
}

/// Exact `R(D)` for `K` equiprobable labels under Hamming distortion.
pub fn closed_form_rate(k: u64, distortion: f64) -> Result<f64> {
    check_classes(k)?;
    if !(0.0..=1.0).contains(&distortion) {
        return Err(domain(format!("distortion {distortion} outside [0, 1]")));
    }
    if distortion >= zero_rate_distortion(k) {
        return Ok(0.0);
    }
    let kf = k as f64;
    let rate = kf.log2() - distortion * (kf - 1.0).log2() - binary_entropy(distortion)?;
    // rounding leaves a residue of order 1e-16 just below the threshold
    Ok(rate.max(0.0))
}

/// `grid_size` points with distortion evenly spaced on `[0, 1 - 1/K]`.
pub fn closed_form_curve(k: u64, grid_size: usize) -> Result<RaCurve> {
    check_classes(k)?;
    if grid_size < 2 {
        return Err(domain(format!("grid size must be >= 2, got {grid_size}")));
    }
    let d_end = zero_rate_distortion(k);
    let last = (grid_size - 1) as f64;
    let points = (0..grid_size)
        .map(|i| {
            let d = if i == grid_size - 1 {
                d_end
            } else {
                d_end * i as f64 / last
            };
            closed_form_rate(k, d).map(|r| RaPoint::new(r, d))
        })
        .collect::<Result<Vec<_>>>()?;
    RaCurve::new(points, CurveKind::ClosedFormUniform)
}

/// Result of inverting the closed-form bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyAtRate {
    pub accuracy: f64,
    /// The requested rate exceeded `log2 K`; accuracy was clamped to 1.
    pub saturated: bool,
}

/// Best achievable accuracy at `rate` bits for `K` equiprobable labels.
///
/// Bisects `closed_form_rate(K, 1 - A) = rate` on `A in [1/K, 1]`, where the
/// left side is strictly increasing in `A`.
pub fn accuracy_at_rate(k: u64, rate: f64) -> Result<AccuracyAtRate> {
    check_classes(k)?;
    if rate.is_nan() || rate < 0.0 {
        return Err(domain(format!("rate {rate} is negative")));
    }
    let full = (k as f64).log2();
    if rate >= full {
        return Ok(AccuracyAtRate {
            accuracy: 1.0,
            saturated: rate > full,
        });
    }
    let chance = 1.0 / k as f64;
    if rate == 0.0 {
        return Ok(AccuracyAtRate {
            accuracy: chance,
            saturated: false,
        });
    }
    let (mut lo, mut hi) = (chance, 1.0);
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if closed_form_rate(k, 1.0 - mid)? < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(AccuracyAtRate {
        accuracy: 0.5 * (lo + hi),
        saturated: false,
    })
}

/// Large-`K` accuracy gained per extra bit, `1 / log2 K`.
pub fn accuracy_slope_approx(k: u64) -> Result<f64> {
    check_classes(k)?;
    Ok(1.0 / (k as f64).log2())
}

/// Large-`K` linear rate approximation `A log2 K`.
pub fn linear_rate_approx(k: u64, accuracy: f64) -> Result<f64> {
    check_classes(k)?;
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(domain(format!("accuracy {accuracy} outside [0, 1]")));
    }
    Ok(accuracy * (k as f64).log2())
}
