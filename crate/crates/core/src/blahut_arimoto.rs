//! Rate-distortion function of an arbitrary finite source by Blahut-Arimoto
//! alternating minimization.
//!
//! A point on the curve is parameterized by the Lagrange slope `s < 0`
//! (natural-log units per unit distortion). For a reconstruction marginal `q`
//! the optimal test channel is `Q(t̂|t) = q(t̂) e^{s d(t,t̂)} / Z_t` and the
//! update is `q ← q · c` with `c(t̂) = Σ_t p(t) e^{s d(t,t̂)} / Z_t`. Iteration
//! stops when the classical pair of bounds
//!
//! ```text
//! upper = s D - Σ_t p(t) ln Z_t - Σ_t̂ q(t̂) c(t̂) ln c(t̂)     (= I(p, Q))
//! lower = s D - Σ_t p(t) ln Z_t - max_t̂ ln c(t̂)
//! ```
//!
//! are within [`RATE_GAP_TOLERANCE`] bits of each other.
//!
//! Since every row of `d` has a zero, the row maximum of `s d` is 0 and the
//! table `e^{s d}` can be formed once per slope without overflow; entries
//! that underflow at steep slopes are exactly the negligible ones. If some
//! `Z_t` still underflows the point is recomputed fully in log space.
//!
//! Before iterating, the bounds are checked at the point mass on the best
//! constant reconstruction. Past the critical slope that point is optimal
//! and certifies `R = 0` immediately.

use rayon::prelude::*;

use crate::dms::{xlog2x, CurveKind, Pmf, RaCurve, RaPoint};
use crate::error::{domain, Error, Result};

/// Certified rate error at which a point is accepted, in bits.
pub const RATE_GAP_TOLERANCE: f64 = 1e-10;

pub const MAX_ITERATIONS: usize = 10_000;

/// Interior curve points whose distortions are closer than this collapse.
pub const DEDUP_DISTORTION: f64 = 1e-9;

/// Square non-negative distortion matrix, row = source label, column =
/// reconstruction label.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionSpec {
    size: usize,
    entries: Vec<f64>,
}

impl DistortionSpec {
    /// Row-major entries of a `size x size` matrix.
    pub fn new(size: usize, entries: Vec<f64>) -> Result<Self> {
        if size == 0 || entries.len() != size * size {
            return Err(Error::InvalidDistortion(format!(
                "{} entries do not form a non-empty square matrix of side {size}",
                entries.len()
            )));
        }
        if let Some(e) = entries.iter().find(|e| !e.is_finite() || **e < 0.0) {
            return Err(Error::InvalidDistortion(format!("entry {e} is not >= 0")));
        }
        for (t, row) in entries.chunks(size).enumerate() {
            if !row.contains(&0.0) {
                return Err(Error::InvalidDistortion(format!(
                    "row {t} has no zero entry"
                )));
            }
        }
        Ok(Self { size, entries })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::InvalidDistortion("matrix is not square".into()));
        }
        Self::new(size, rows.into_iter().flatten().collect())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, t: usize, t_hat: usize) -> f64 {
        self.entries[t * self.size + t_hat]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.entries[t * self.size..(t + 1) * self.size]
    }

    /// True when every source label has exactly one zero-distortion
    /// reconstruction and no two labels share it. Then `D = 0` forces an
    /// invertible channel and `R(0)` is the source entropy.
    pub fn zero_pattern_is_injective(&self) -> bool {
        let mut seen = vec![false; self.size];
        for t in 0..self.size {
            let mut zeros = self.row(t).iter().enumerate().filter(|(_, d)| **d == 0.0);
            match (zeros.next(), zeros.next()) {
                (Some((j, _)), None) if !seen[j] => seen[j] = true,
                _ => return false,
            }
        }
        true
    }
}

/// `K x K` Hamming distortion: 0 on the diagonal, 1 elsewhere.
pub fn hamming_matrix(k: usize) -> DistortionSpec {
    let mut entries = vec![1.0; k * k];
    for t in 0..k {
        entries[t * k + t] = 0.0;
    }
    DistortionSpec { size: k, entries }
}

/// `-Σ p log2 p` in bits.
pub fn entropy(source: &Pmf) -> f64 {
    source.probs().iter().map(|&p| xlog2x(p)).sum()
}

/// Smallest distortion reachable at zero rate: `min_t̂ Σ_t p(t) d(t, t̂)`.
pub fn d_max(source: &Pmf, distortion: &DistortionSpec) -> Result<f64> {
    check_dims(source, distortion)?;
    Ok(zero_rate_column(source, distortion).1)
}

fn zero_rate_column(source: &Pmf, distortion: &DistortionSpec) -> (usize, f64) {
    let k = distortion.size();
    let mut best = (0, f64::INFINITY);
    for j in 0..k {
        let e: f64 = source
            .probs()
            .iter()
            .enumerate()
            .map(|(t, &p)| {
                if p > 0.0 {
                    p * distortion.get(t, j)
                } else {
                    0.0
                }
            })
            .sum();
        if e < best.1 {
            best = (j, e);
        }
    }
    best
}

fn check_dims(source: &Pmf, distortion: &DistortionSpec) -> Result<()> {
    if source.len() != distortion.size() {
        return Err(Error::DimensionMismatch {
            source_len: source.len(),
            rows: distortion.size(),
            cols: distortion.size(),
        });
    }
    Ok(())
}

/// One solved point of the rate-distortion curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BaSolution {
    pub slope: f64,
    /// Bits per source symbol.
    pub rate: f64,
    pub distortion: f64,
    pub output_marginal: Pmf,
    pub iterations: usize,
    /// Final upper-minus-lower rate bound, in bits.
    pub gap: f64,
    pub converged: bool,
    /// Source labels with zero probability, dropped before solving.
    pub pruned: Vec<usize>,
}

/// Per-iteration state handed to an observer.
#[derive(Debug, Clone, Copy)]
pub struct IterationState {
    pub iteration: usize,
    /// The alternating-minimization objective `-Σ_t p(t) ln Z_t`, in nats.
    pub objective: f64,
    pub upper_bits: f64,
    pub lower_bits: f64,
    pub distortion: f64,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Solve the curve point at slope `s` starting from the uniform marginal.
pub fn ba_point(source: &Pmf, distortion: &DistortionSpec, slope: f64) -> Result<BaSolution> {
    ba_point_observed(source, distortion, slope, |_| {})
}

/// Support-restricted view of one problem instance.
struct Problem<'a> {
    distortion: &'a DistortionSpec,
    slope: f64,
    rows: Vec<usize>,
    p: Vec<f64>,
    pruned: Vec<usize>,
}

impl Problem<'_> {
    fn solution(
        &self,
        rate: f64,
        dist: f64,
        marginal: Vec<f64>,
        iterations: usize,
        gap: f64,
    ) -> Result<BaSolution> {
        let total: f64 = marginal.iter().sum();
        Ok(BaSolution {
            slope: self.slope,
            rate: rate.max(0.0),
            distortion: dist,
            output_marginal: Pmf::new(marginal.iter().map(|x| x / total).collect())?,
            iterations,
            gap,
            converged: gap <= RATE_GAP_TOLERANCE,
            pruned: self.pruned.clone(),
        })
    }
}

/// Bounds from the per-iteration quantities, in bits.
fn bounds(
    slope: f64,
    dist: f64,
    objective: f64,
    weighted_log_c: f64,
    max_log_c: f64,
) -> (f64, f64) {
    let base = slope * dist + objective;
    (
        (base - weighted_log_c) / std::f64::consts::LN_2,
        (base - max_log_c) / std::f64::consts::LN_2,
    )
}

/// [`ba_point`] that reports every iteration to `observe`.
pub fn ba_point_observed(
    source: &Pmf,
    distortion: &DistortionSpec,
    slope: f64,
    mut observe: impl FnMut(&IterationState),
) -> Result<BaSolution> {
    check_dims(source, distortion)?;
    if !slope.is_finite() || slope >= 0.0 {
        return Err(domain(format!("slope must be finite and < 0, got {slope}")));
    }
    let k = distortion.size();
    let rows: Vec<usize> = (0..k).filter(|&t| source.probs()[t] > 0.0).collect();
    let problem = Problem {
        distortion,
        slope,
        p: rows.iter().map(|&t| source.probs()[t]).collect(),
        pruned: (0..k).filter(|&t| source.probs()[t] == 0.0).collect(),
        rows,
    };
    if let Some(sol) = zero_rate_certificate(&problem, source, &mut observe)? {
        return Ok(sol);
    }
    match iterate_linear(&problem, &mut observe)? {
        Some(sol) => Ok(sol),
        None => iterate_log(&problem, &mut observe),
    }
}

/// Evaluates the bounds at the point mass on the best constant
/// reconstruction. A zero gap there proves `R = 0` at this slope, which
/// the uniform start would only approach sublinearly.
fn zero_rate_certificate(
    problem: &Problem,
    source: &Pmf,
    observe: &mut impl FnMut(&IterationState),
) -> Result<Option<BaSolution>> {
    let (j_star, top) = zero_rate_column(source, problem.distortion);
    let k = problem.distortion.size();
    let max_log_c = (0..k)
        .map(|j| {
            log_sum_exp(problem.rows.iter().zip(&problem.p).map(|(&t, &p)| {
                let d = problem.distortion.row(t);
                p.ln() + problem.slope * (d[j] - d[j_star])
            }))
        })
        .fold(f64::NEG_INFINITY, f64::max);
    // here Z_t = e^{s d(t, j*)}, so s D - Σ p ln Z = 0 and c(j*) = 1
    let gap = (max_log_c / std::f64::consts::LN_2).max(0.0);
    if gap > RATE_GAP_TOLERANCE {
        return Ok(None);
    }
    observe(&IterationState {
        iteration: 0,
        objective: -problem.slope * top,
        upper_bits: 0.0,
        lower_bits: -gap,
        distortion: top,
    });
    let mut marginal = vec![0.0; k];
    marginal[j_star] = 1.0;
    problem.solution(0.0, top, marginal, 0, gap).map(Some)
}

/// Main loop on the table `e^{s d}`. Every row has a zero entry, so the
/// row maximum of `s d` is 0 and the table needs no further shift. Returns
/// `None` if some `Z_t` underflows.
fn iterate_linear(
    problem: &Problem,
    observe: &mut impl FnMut(&IterationState),
) -> Result<Option<BaSolution>> {
    let k = problem.distortion.size();
    let n = problem.rows.len();
    let mut e = Vec::with_capacity(n * k);
    let mut ed = Vec::with_capacity(n * k);
    for &t in &problem.rows {
        for &d in problem.distortion.row(t) {
            let w = (problem.slope * d).exp();
            e.push(w);
            ed.push(w * d);
        }
    }
    let mut q = vec![1.0 / k as f64; k];
    let mut c = vec![0.0; k];
    let mut iteration = 0;
    loop {
        iteration += 1;
        c.iter_mut().for_each(|x| *x = 0.0);
        let mut dist = 0.0;
        let mut objective = 0.0;
        for i in 0..n {
            let (e_row, ed_row) = (&e[i * k..(i + 1) * k], &ed[i * k..(i + 1) * k]);
            let mut z = 0.0;
            let mut num = 0.0;
            for j in 0..k {
                z += q[j] * e_row[j];
                num += q[j] * ed_row[j];
            }
            if z.is_nan() || z < f64::MIN_POSITIVE {
                return Ok(None);
            }
            let p = problem.p[i];
            dist += p * num / z;
            objective -= p * z.ln();
            let w = p / z;
            for (cj, ej) in c.iter_mut().zip(e_row) {
                *cj += w * ej;
            }
        }
        let mut weighted_log_c = 0.0;
        let mut max_c = 0.0f64;
        for (qj, cj) in q.iter().zip(&c) {
            if *cj > 0.0 {
                weighted_log_c += qj * cj * cj.ln();
            }
            max_c = max_c.max(*cj);
        }
        let (upper, lower) = bounds(problem.slope, dist, objective, weighted_log_c, max_c.ln());
        let gap = (upper - lower).max(0.0);
        observe(&IterationState {
            iteration,
            objective,
            upper_bits: upper,
            lower_bits: lower,
            distortion: dist,
        });
        if gap <= RATE_GAP_TOLERANCE || iteration >= MAX_ITERATIONS {
            // marginal of the channel just evaluated: q·c
            let r = q.iter().zip(&c).map(|(a, b)| a * b).collect();
            return problem.solution(upper, dist, r, iteration, gap).map(Some);
        }
        let mut total = 0.0;
        for (qj, cj) in q.iter_mut().zip(&c) {
            *qj *= cj;
            total += *qj;
        }
        q.iter_mut().for_each(|x| *x /= total);
    }
}

/// Same iteration carried out entirely in log space.
fn iterate_log(problem: &Problem, observe: &mut impl FnMut(&IterationState)) -> Result<BaSolution> {
    let k = problem.distortion.size();
    let log_p: Vec<f64> = problem.p.iter().map(|p| p.ln()).collect();
    let sd: Vec<Vec<f64>> = problem
        .rows
        .iter()
        .map(|&t| {
            problem
                .distortion
                .row(t)
                .iter()
                .map(|&d| problem.slope * d)
                .collect()
        })
        .collect();

    let mut log_q = vec![-(k as f64).ln(); k];
    let mut log_z = vec![0.0; sd.len()];
    let mut log_c = vec![0.0; k];
    let mut iteration = 0;
    loop {
        iteration += 1;
        for (i, row) in sd.iter().enumerate() {
            log_z[i] = log_sum_exp(row.iter().zip(&log_q).map(|(a, b)| a + b));
        }
        for (j, lc) in log_c.iter_mut().enumerate() {
            *lc = log_sum_exp(
                sd.iter()
                    .zip(log_p.iter().zip(&log_z))
                    .map(|(row, (lp, lz))| lp + row[j] - lz),
            );
        }
        let mut dist = 0.0;
        for (i, row) in sd.iter().enumerate() {
            let d_row = problem.distortion.row(problem.rows[i]);
            let mut acc = 0.0;
            for j in 0..k {
                let w = log_q[j] + row[j] - log_z[i];
                if w > f64::NEG_INFINITY {
                    acc += w.exp() * d_row[j];
                }
            }
            dist += problem.p[i] * acc;
        }
        let objective: f64 = -problem
            .p
            .iter()
            .zip(&log_z)
            .map(|(a, b)| a * b)
            .sum::<f64>();
        let weighted_log_c: f64 = log_q
            .iter()
            .zip(&log_c)
            .map(|(lq, lc)| {
                let r = (lq + lc).exp();
                if r > 0.0 {
                    r * lc
                } else {
                    0.0
                }
            })
            .sum();
        let max_log_c = log_c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (upper, lower) = bounds(problem.slope, dist, objective, weighted_log_c, max_log_c);
        let gap = (upper - lower).max(0.0);
        observe(&IterationState {
            iteration,
            objective,
            upper_bits: upper,
            lower_bits: lower,
            distortion: dist,
        });
        if gap <= RATE_GAP_TOLERANCE || iteration >= MAX_ITERATIONS {
            let r = log_q
                .iter()
                .zip(&log_c)
                .map(|(a, b)| (a + b).exp())
                .collect();
            return problem.solution(upper, dist, r, iteration, gap);
        }
        for (lq, lc) in log_q.iter_mut().zip(&log_c) {
            *lq += lc;
        }
        let norm = log_sum_exp(log_q.iter().copied());
        for lq in log_q.iter_mut() {
            *lq -= norm;
        }
    }
}

/// Slope sweep for [`ba_curve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Total points including the two analytic endpoints.
    pub num_points: usize,
    /// Smallest `|s|` (flat end, near `D_max`).
    pub min_abs_slope: f64,
    /// Largest `|s|` (steep end, near `D = 0`).
    pub max_abs_slope: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            num_points: 64,
            min_abs_slope: 1e-2,
            max_abs_slope: 1e3,
        }
    }
}

impl SweepConfig {
    pub fn with_points(num_points: usize) -> Self {
        Self {
            num_points,
            ..Self::default()
        }
    }

    /// Interior slopes, geometrically spaced in magnitude, steepest first.
    pub fn slopes(&self) -> Vec<f64> {
        let n = self.num_points.saturating_sub(2);
        let (lo, hi) = (self.min_abs_slope.ln(), self.max_abs_slope.ln());
        (0..n)
            .map(|i| {
                let t = if n == 1 {
                    0.0
                } else {
                    i as f64 / (n - 1) as f64
                };
                -(hi + t * (lo - hi)).exp()
            })
            .collect()
    }
}

/// A solved curve with the interior solutions that produced it.
#[derive(Debug, Clone)]
pub struct BaCurve {
    pub curve: RaCurve,
    /// Interior solutions in sweep order, including any that were collapsed
    /// during de-duplication.
    pub solutions: Vec<BaSolution>,
}

impl BaCurve {
    pub fn non_converged(&self) -> impl Iterator<Item = &BaSolution> {
        self.solutions.iter().filter(|s| !s.converged)
    }

    pub fn all_converged(&self) -> bool {
        self.solutions.iter().all(|s| s.converged)
    }
}

/// Curve traced with the default sweep and `num_points` points.
pub fn ba_curve(source: &Pmf, distortion: &DistortionSpec, num_points: usize) -> Result<BaCurve> {
    ba_curve_with(source, distortion, &SweepConfig::with_points(num_points))
}

pub fn ba_curve_with(
    source: &Pmf,
    distortion: &DistortionSpec,
    config: &SweepConfig,
) -> Result<BaCurve> {
    check_dims(source, distortion)?;
    if config.num_points < 2 {
        return Err(domain(format!(
            "need at least 2 curve points, got {}",
            config.num_points
        )));
    }
    if !(config.min_abs_slope > 0.0 && config.max_abs_slope >= config.min_abs_slope) {
        return Err(domain("slope range must satisfy 0 < min <= max"));
    }
    let solutions: Vec<BaSolution> = config
        .slopes()
        .par_iter()
        .map(|&s| ba_point(source, distortion, s))
        .collect::<Result<_>>()?;

    let top = d_max(source, distortion)?;
    let start = if distortion.zero_pattern_is_injective() {
        RaPoint::new(entropy(source), 0.0)
    } else {
        // several zero-cost reconstructions: R(0) is the s → -∞ limit
        let steep = ba_point(source, distortion, -config.max_abs_slope.max(1e3))?;
        RaPoint::new(steep.rate, 0.0)
    };
    let end = RaPoint::new(0.0, top);

    let mut interior: Vec<RaPoint> = solutions
        .iter()
        .map(|s| RaPoint::new(s.rate, s.distortion))
        .filter(|p| p.distortion > DEDUP_DISTORTION && p.distortion < top - DEDUP_DISTORTION)
        .collect();
    interior.sort_by(|a, b| {
        a.distortion
            .total_cmp(&b.distortion)
            .then(a.rate.total_cmp(&b.rate))
    });
    let mut points = vec![start];
    for p in interior {
        let interior_tail = points.len() > 1;
        let last = points.last_mut().expect("start point present");
        if interior_tail && p.distortion - last.distortion < DEDUP_DISTORTION {
            if p.rate < last.rate {
                *last = p;
            }
        } else {
            points.push(p);
        }
    }
    if top > DEDUP_DISTORTION {
        points.push(end);
    }
    let curve = RaCurve::new(points, CurveKind::BlahutArimoto)?;
    Ok(BaCurve { curve, solutions })
}
