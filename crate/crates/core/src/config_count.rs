//! Object detection modelled as classification over output configurations.
//!
//! An image holds between 1 and `N` objects, each at a distinct one of `P`
//! anchor positions and each of one of `M` classes, giving
//! `K = Σ_{i=1}^{N} C(P, i) M^i` configurations. Counts are exact.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionModel {
    pub positions: u64,
    pub classes: u64,
    pub max_objects: u64,
}

impl DetectionModel {
    pub fn new(positions: u64, classes: u64, max_objects: u64) -> Result<Self> {
        if positions < 1 || classes < 1 || max_objects < 1 || max_objects > positions {
            return Err(domain(format!(
                "need P >= 1, M >= 1, 1 <= N <= P; got P={positions} M={classes} N={max_objects}"
            )));
        }
        Ok(Self {
            positions,
            classes,
            max_objects,
        })
    }

    /// The YOLO-on-COCO configuration: 98 anchors, 80 classes, up to 15 objects.
    pub fn coco_yolo() -> Self {
        Self {
            positions: 98,
            classes: 80,
            max_objects: 15,
        }
    }
}

/// Exact non-negative integer count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// Decimal scientific notation rounded half-up to `digits` significant
    /// digits, e.g. `6.4e45`.
    pub fn scientific(&self, digits: usize) -> String {
        let digits = digits.max(1);
        let s = self.0.to_string();
        if s.len() <= digits {
            let exp = s.len() - 1;
            let (head, tail) = s.split_at(1);
            return if tail.is_empty() {
                format!("{head}e{exp}")
            } else {
                format!("{head}.{tail}e{exp}")
            };
        }
        let mut kept: Vec<u8> = s.as_bytes()[..digits].iter().map(|b| b - b'0').collect();
        let mut exp = s.len() - 1;
        if s.as_bytes()[digits] >= b'5' {
            let mut i = digits;
            loop {
                if i == 0 {
                    kept.insert(0, 1);
                    kept.pop();
                    exp += 1;
                    break;
                }
                i -= 1;
                if kept[i] == 9 {
                    kept[i] = 0;
                } else {
                    kept[i] += 1;
                    break;
                }
            }
        }
        let mut out = String::new();
        out.push((b'0' + kept[0]) as char);
        if digits > 1 {
            out.push('.');
            out.extend(kept[1..].iter().map(|d| (b'0' + d) as char));
        }
        format!("{out}e{exp}")
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `Σ_{i=1}^{N} C(P, i) M^i`.
pub fn detection_config_count(model: &DetectionModel) -> BigCount {
    let p = BigUint::from(model.positions);
    let m = BigUint::from(model.classes);
    let mut binom = BigUint::one();
    let mut power = BigUint::one();
    let mut total = BigUint::zero();
    for i in 1..=model.max_objects {
        // C(P, i) = C(P, i-1) (P - i + 1) / i, exact at every step
        binom = binom * (&p - (i - 1)) / i;
        power *= &m;
        total += &binom * &power;
    }
    BigCount(total)
}

/// `log2` of an exact count from its bit length and top 64 bits.
pub fn log2_of_count(count: &BigCount) -> Result<f64> {
    let n = &count.0;
    if n.is_zero() {
        return Err(domain("log2 of zero"));
    }
    let bits = n.bits();
    if n.count_ones() == 1 {
        return Ok((bits - 1) as f64);
    }
    if bits <= 64 {
        return Ok(n
            .to_u64()
            .expect("fits in 64 bits")
            .to_f64()
            .expect("finite")
            .log2());
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("64 bits");
    // top in [2^63, 2^64): log2 = 63 + log2(top / 2^63)
    let mantissa = top as f64 / 2f64.powi(63);
    Ok(63.0 + mantissa.log2() + shift as f64)
}

/// Rate in bits per pixel for a `width x height` image.
pub fn bits_per_pixel(bits_per_image: f64, width: u64, height: u64) -> Result<f64> {
    if width == 0 || height == 0 {
        return Err(domain("image dimensions must be >= 1"));
    }
    if bits_per_image.is_nan() || bits_per_image < 0.0 {
        return Err(domain(format!(
            "bits per image {bits_per_image} is negative"
        )));
    }
    Ok(bits_per_image / (width as f64 * height as f64))
}
