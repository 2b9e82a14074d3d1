//! Measures on the modular surface: the three algebraic limit measures,
//! empirical orbit measures, Lipschitz bump families, integration against
//! each measure kind, and discrepancy verdicts.
//!
//! Evaluation of a bump or ball at a point minimizes the surrogate distance
//! over precomputed integer translates of the center. Translates that can
//! never come within reach of a reduced point are dropped at construction,
//! and cheap per-translate bounds on the height ratio and frame angle prune
//! the rest, so pairing a large point cloud against a family stays fast.

use rayon::prelude::*;
use thiserror::Error;

use crate::flow::{collect_orbit, FlowError, OrbitSpec};
use crate::sl2::{dist_candidates, fixed_norm, reduce_point, GroupElement, IwasawaPoint, Sl2Error};

/// Mass above this reduced height is booked as escaped toward the cusp.
pub const CUSP_CUTOFF: f64 = 1e3;

/// Frobenius-vs-fixed-norm constant: |E|_F <= 1.15 |E|_fixed.
const NORM_RATIO: f64 = 1.15;

/// Lowest height of a reduced point.
const DOMAIN_FLOOR_Y: f64 = 0.866;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("integration budget {0} is below the minimum of 1000")]
    BudgetTooSmall(usize),
    #[error("a, b, q must have trivial common divisor")]
    GcdViolation,
    #[error("q2 = {given} does not match the reduced denominator {expected}")]
    InconsistentModulus { given: i64, expected: i64 },
    #[error("test family contains an indicator; discrepancy needs finite Lipschitz norms")]
    InfiniteLipschitz,
    #[error("bump radius must be positive and finite")]
    BadRadius,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Sl2(#[from] Sl2Error),
}

// ---------------------------------------------------------------------------
// Matrix helpers on flat 2x2 arrays
// ---------------------------------------------------------------------------

#[inline]
fn mul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

#[inline]
fn dist_to_identity(m: &[f64; 4]) -> f64 {
    let d1 = fixed_norm(m[0] - 1.0, m[1], m[2], m[3] - 1.0);
    // the inverse of a determinant-one matrix is its adjugate
    let d2 = fixed_norm(m[3] - 1.0, -m[1], -m[2], m[0] - 1.0);
    d1.min(d2)
}

/// Point prepared for repeated surrogate-distance evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PreparedPoint {
    inv: [f64; 4],
    theta: f64,
    sqrt_y: f64,
    y: f64,
}

impl PreparedPoint {
    pub(crate) fn new(p: &IwasawaPoint) -> PreparedPoint {
        let g = p.to_group();
        let [a, b, c, d] = g.entries();
        PreparedPoint {
            inv: [d, -b, -c, a],
            theta: p.theta(),
            sqrt_y: p.y().sqrt(),
            y: p.y(),
        }
    }
}

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestShape {
    /// max(0, 1 - dist/radius) around a reduced center.
    Bump { center: IwasawaPoint, radius: f64 },
    /// Indicator of dist <= radius.
    BallIndicator { center: IwasawaPoint, radius: f64 },
    /// Indicator of height y >= y_min.
    HeightIndicator { y_min: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Translate {
    m: [f64; 4],
    theta: f64,
    sqrt_y: f64,
}

#[derive(Debug, Clone)]
pub struct TestFunction {
    shape: TestShape,
    translates: Vec<Translate>,
    /// Angle window for the prefilter, pi when inactive.
    theta_window: f64,
}

impl TestFunction {
    pub fn bump(center: IwasawaPoint, radius: f64) -> Result<TestFunction, MeasureError> {
        Self::with_center(center, radius, true)
    }

    pub fn ball_indicator(center: IwasawaPoint, radius: f64) -> Result<TestFunction, MeasureError> {
        Self::with_center(center, radius, false)
    }

    pub fn height_indicator(y_min: f64) -> TestFunction {
        TestFunction {
            shape: TestShape::HeightIndicator { y_min },
            translates: Vec::new(),
            theta_window: std::f64::consts::PI,
        }
    }

    fn with_center(
        center: IwasawaPoint,
        radius: f64,
        smooth: bool,
    ) -> Result<TestFunction, MeasureError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(MeasureError::BadRadius);
        }
        let center = reduce_point(&center)?;
        let shape = if smooth {
            TestShape::Bump { center, radius }
        } else {
            TestShape::BallIndicator { center, radius }
        };
        let g = center.to_group();
        let slack = NORM_RATIO * radius;
        let mut translates = Vec::new();
        for gamma in dist_candidates() {
            let c = gamma.compose(&g);
            let p = c.iwasawa();
            // keep only translates a reduced point could reach within the
            // radius: the height-ratio bound confines matches to a y-band,
            // and matching matrices live in a compact entry box
            if slack < 0.9 {
                let y_reach = p.y() / (1.0 - slack).powi(2);
                if y_reach < DOMAIN_FLOOR_Y * (1.0 - 1e-6) {
                    continue;
                }
                let y_hi = (p.y() * (1.0 + slack).powi(2)).max(DOMAIN_FLOOR_Y);
                let margin = frob(&c) * slack * 1.5 + 0.05;
                let cd_cap = 1.0 / DOMAIN_FLOOR_Y.sqrt() + margin;
                let ab_cap = 0.51 / DOMAIN_FLOOR_Y.sqrt() + y_hi.sqrt() + margin;
                let [a, b, cc, d] = c.entries();
                if cc.abs() > cd_cap || d.abs() > cd_cap || a.abs() > ab_cap || b.abs() > ab_cap {
                    continue;
                }
            }
            let [a, b, cc, d] = c.entries();
            translates.push(Translate {
                m: [a, b, cc, d],
                theta: p.theta(),
                sqrt_y: p.y().sqrt(),
            });
        }
        let theta_window = (std::f64::consts::PI * slack + 1e-9).min(std::f64::consts::PI);
        Ok(TestFunction {
            shape,
            translates,
            theta_window,
        })
    }

    pub fn shape(&self) -> &TestShape {
        &self.shape
    }

    /// 1 + 1/radius for bumps; indicators carry an infinite norm and are
    /// excluded from discrepancy verdicts.
    pub fn lipschitz_norm(&self) -> f64 {
        match self.shape {
            TestShape::Bump { radius, .. } => 1.0 + 1.0 / radius,
            _ => f64::INFINITY,
        }
    }

    /// Evaluate at an arbitrary point (reduced internally).
    pub fn eval(&self, p: &IwasawaPoint) -> f64 {
        let q = reduce_point(p).expect("test evaluation needs a reducible point");
        self.eval_prepared(&PreparedPoint::new(&q))
    }

    pub(crate) fn eval_prepared(&self, prep: &PreparedPoint) -> f64 {
        match self.shape {
            TestShape::HeightIndicator { y_min } => {
                if prep.y >= y_min {
                    1.0
                } else {
                    0.0
                }
            }
            TestShape::Bump { radius, .. } => {
                let d = self.dist_within(prep, radius);
                if d >= radius {
                    0.0
                } else {
                    1.0 - d / radius
                }
            }
            TestShape::BallIndicator { radius, .. } => {
                if self.dist_within(prep, radius) <= radius {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Minimum surrogate distance to the center translates, exact whenever it
    /// is at most `cutoff`; larger values may be over-reported because of the
    /// prefilters, which only skip translates provably beyond the cutoff.
    fn dist_within(&self, prep: &PreparedPoint, cutoff: f64) -> f64 {
        let ratio_slack = NORM_RATIO * cutoff + 1e-9;
        let mut best = f64::INFINITY;
        for t in &self.translates {
            // the bottom-row direction turns by at most pi |E|_F
            let dtheta = crate::sl2::wrap_angle(prep.theta - t.theta).abs();
            if dtheta > self.theta_window {
                continue;
            }
            // height-ratio bound: sqrt(y1/y2) within 1 +- |E|_F one way round
            let r1 = prep.sqrt_y / t.sqrt_y - 1.0;
            let r2 = t.sqrt_y / prep.sqrt_y - 1.0;
            if r1.abs() > ratio_slack && r2.abs() > ratio_slack {
                continue;
            }
            let m = mul(&prep.inv, &t.m);
            let d = dist_to_identity(&m);
            if d < best {
                best = d;
            }
        }
        best
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        match self.shape {
            TestShape::Bump { center, radius } => format!(
                "bump(x={:.4},y={:.4},theta={:.4},r={})",
                center.x(),
                center.y(),
                center.theta(),
                radius
            ),
            TestShape::BallIndicator { center, radius } => format!(
                "ball(x={:.4},y={:.4},theta={:.4},r={})",
                center.x(),
                center.y(),
                center.theta(),
                radius
            ),
            TestShape::HeightIndicator { y_min } => format!("height(y_min={y_min})"),
        }
    }
}

fn frob(g: &GroupElement) -> f64 {
    let [a, b, c, d] = g.entries();
    (a * a + b * b + c * c + d * d).sqrt()
}

// ---------------------------------------------------------------------------
// Algebraic measures
// ---------------------------------------------------------------------------

/// The three limit measures of the flow: volume, a closed horocycle at a
/// fixed height, or finitely many equally weighted periodic points.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraicMeasure {
    Volume,
    ClosedHorocycle { y: f64 },
    PeriodicPoints { points: Vec<IwasawaPoint> },
}

/// Build the discrete algebraic measure on ((A + Bn)/q mod 1) + iy for
/// n mod q2, reduced to the fundamental domain. q2 must equal the reduced
/// denominator of B/q, and A, B, q must be jointly coprime.
pub fn build_discrete_algebraic(
    a: i64,
    b: i64,
    q: i64,
    y: f64,
    q2: i64,
) -> Result<AlgebraicMeasure, MeasureError> {
    assert!(q >= 1 && y > 0.0);
    let g = gcd_u(gcd_u(a.unsigned_abs(), b.unsigned_abs()), q as u64);
    if g != 1 {
        return Err(MeasureError::GcdViolation);
    }
    let expected = q / gcd_u(b.unsigned_abs(), q as u64).max(1) as i64;
    if q2 != expected {
        return Err(MeasureError::InconsistentModulus {
            given: q2,
            expected,
        });
    }
    let mut points = Vec::with_capacity(q2 as usize);
    for n in 0..q2 {
        let residue = (a as i128 + b as i128 * n as i128).rem_euclid(q as i128);
        let x = residue as f64 / q as f64;
        let p = IwasawaPoint::new(x, y, 0.0)?;
        points.push(reduce_point(&p)?);
    }
    Ok(AlgebraicMeasure::PeriodicPoints { points })
}

fn gcd_u(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// Empirical measures
// ---------------------------------------------------------------------------

/// Weighted point cloud in the fundamental domain. Weights plus the escaped
/// mass sum to one; points above the cusp cutoff carry their weight in
/// `escaped_mass` and are dropped from the cloud.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    points: Vec<IwasawaPoint>,
    weights: Vec<f64>,
    escaped_mass: f64,
    low_precision: u64,
}

impl EmpiricalMeasure {
    pub fn points(&self) -> &[IwasawaPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn escaped_mass(&self) -> f64 {
        self.escaped_mass
    }

    /// Number of emitted points whose pre-reduction height fell below the
    /// precision floor.
    pub fn low_precision(&self) -> u64 {
        self.low_precision
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Equal-weight cloud from explicit points, with the given cusp cutoff.
    pub fn from_points(raw: Vec<IwasawaPoint>, cusp_cutoff: f64) -> EmpiricalMeasure {
        let total = raw.len().max(1) as f64;
        let w = 1.0 / total;
        let mut points = Vec::with_capacity(raw.len());
        let mut escaped = 0u64;
        for p in raw {
            if p.y() > cusp_cutoff {
                escaped += 1;
            } else {
                points.push(p);
            }
        }
        let weights = vec![w; points.len()];
        EmpiricalMeasure {
            points,
            weights,
            escaped_mass: escaped as f64 * w,
            low_precision: 0,
        }
    }
}

/// Empirical orbit measure with the default cusp cutoff.
pub fn empirical_measure(spec: &OrbitSpec) -> Result<EmpiricalMeasure, MeasureError> {
    empirical_measure_with_cutoff(spec, CUSP_CUTOFF)
}

pub fn empirical_measure_with_cutoff(
    spec: &OrbitSpec,
    cusp_cutoff: f64,
) -> Result<EmpiricalMeasure, MeasureError> {
    let orbit = collect_orbit(spec)?;
    let w = 1.0 / orbit.len() as f64;
    let mut points = Vec::with_capacity(orbit.len());
    let mut escaped = 0u64;
    let mut low_precision = 0u64;
    for op in orbit {
        if op.low_precision {
            low_precision += 1;
        }
        if op.point.y() > cusp_cutoff {
            escaped += 1;
        } else {
            points.push(op.point);
        }
    }
    let weights = vec![w; points.len()];
    Ok(EmpiricalMeasure {
        points,
        weights,
        escaped_mass: escaped as f64 * w,
        low_precision,
    })
}

/// Expectation of f against the cloud; escaped mass contributes zero.
pub fn pair_with(mu: &EmpiricalMeasure, f: &TestFunction) -> f64 {
    pair_family(mu, std::slice::from_ref(f))[0]
}

/// Expectations of a whole family, sharing the per-point preparation.
/// Chunked so the parallel reduction is deterministic.
pub fn pair_family(mu: &EmpiricalMeasure, family: &[TestFunction]) -> Vec<f64> {
    if family.is_empty() || mu.points.is_empty() {
        return vec![0.0; family.len()];
    }
    let chunk = 8192;
    let ranges: Vec<(usize, usize)> = (0..mu.points.len())
        .step_by(chunk)
        .map(|s| (s, (s + chunk).min(mu.points.len())))
        .collect();
    let partials: Vec<Vec<f64>> = ranges
        .par_iter()
        .map(|&(s, e)| {
            let mut acc = vec![0.0; family.len()];
            for i in s..e {
                let prep = PreparedPoint::new(&mu.points[i]);
                let w = mu.weights[i];
                for (k, f) in family.iter().enumerate() {
                    acc[k] += w * f.eval_prepared(&prep);
                }
            }
            acc
        })
        .collect();
    let mut out = vec![0.0; family.len()];
    for part in partials {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Heuristic scale of the quadrature error: substream spread for the
    /// volume rule, refinement difference for the horocycle rule, zero for
    /// finite sums.
    pub error_estimate: f64,
}

const HALTON_BASES: [u64; 3] = [2, 3, 5];
const U_MAX: f64 = 1.154_700_538_379_251_7; // 2/sqrt(3)

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Deterministic low-discrepancy stream over the chart (x, u = 1/y, theta)
/// of the fundamental domain; the chart density dx du dtheta/pi is exactly
/// the volume measure.
fn volume_samples(budget: usize) -> Vec<IwasawaPoint> {
    let mut out = Vec::with_capacity(budget);
    let mut i = 1u64;
    while out.len() < budget {
        let x = halton(i, HALTON_BASES[0]) - 0.5;
        let u = halton(i, HALTON_BASES[1]) * U_MAX;
        let theta = halton(i, HALTON_BASES[2]) * 2.0 * std::f64::consts::PI - std::f64::consts::PI;
        i += 1;
        if u <= 0.0 || u * u * (1.0 - x * x) > 1.0 {
            continue;
        }
        out.push(IwasawaPoint::new(x, 1.0 / u, theta).expect("chart point is valid"));
    }
    out
}

/// Estimate of the unnormalized chart mass of the fundamental domain
/// (analytically 2 pi / 3), from the same rejection stream the volume rule
/// uses.
pub fn volume_chart_mass(budget: usize) -> f64 {
    let mut accepted = 0usize;
    for i in 1..=(budget as u64) {
        let x = halton(i, HALTON_BASES[0]) - 0.5;
        let u = halton(i, HALTON_BASES[1]) * U_MAX;
        if u > 0.0 && u * u * (1.0 - x * x) <= 1.0 {
            accepted += 1;
        }
    }
    // box mass of dx du dtheta/pi over [-1/2,1/2] x [0,U_MAX] x [-pi,pi)
    accepted as f64 / budget as f64 * (U_MAX * 2.0)
}

pub fn integrate(
    f: &TestFunction,
    mu: &AlgebraicMeasure,
    budget: usize,
) -> Result<Integral, MeasureError> {
    Ok(integrate_family(std::slice::from_ref(f), mu, budget)?[0])
}

/// Integrals of a family against an algebraic measure with a shared sample
/// stream. Volume uses quasi-Monte Carlo over the compactified chart,
/// closed horocycles a midpoint rule in x, periodic sets the exact mean.
pub fn integrate_family(
    family: &[TestFunction],
    mu: &AlgebraicMeasure,
    budget: usize,
) -> Result<Vec<Integral>, MeasureError> {
    if budget < 1000 {
        return Err(MeasureError::BudgetTooSmall(budget));
    }
    match mu {
        AlgebraicMeasure::Volume => {
            let samples = volume_samples(budget);
            let sums = eval_family_sums(family, &samples, 8);
            Ok(sums
                .into_iter()
                .map(|(total, subs)| {
                    let value = total / budget as f64;
                    let sub_means: Vec<f64> = subs
                        .iter()
                        .map(|&(s, n)| if n > 0 { s / n as f64 } else { value })
                        .collect();
                    let var = sub_means
                        .iter()
                        .map(|m| (m - value) * (m - value))
                        .sum::<f64>()
                        / sub_means.len() as f64;
                    Integral {
                        value,
                        error_estimate: (var / sub_means.len() as f64).sqrt(),
                    }
                })
                .collect())
        }
        AlgebraicMeasure::ClosedHorocycle { y } => {
            assert!(*y > 0.0);
            let points: Result<Vec<IwasawaPoint>, Sl2Error> = (0..budget)
                .into_par_iter()
                .map(|j| {
                    let x = (j as f64 + 0.5) / budget as f64;
                    reduce_point(&IwasawaPoint::new(x, *y, 0.0)?)
                })
                .collect();
            let points = points?;
            let sums = eval_family_sums(family, &points, 2);
            Ok(sums
                .into_iter()
                .map(|(total, subs)| {
                    let value = total / budget as f64;
                    // refinement estimate from the even-index half
                    let half = subs[0].0 / subs[0].1.max(1) as f64;
                    Integral {
                        value,
                        error_estimate: (value - half).abs(),
                    }
                })
                .collect())
        }
        AlgebraicMeasure::PeriodicPoints { points } => {
            assert!(!points.is_empty());
            let sums = eval_family_sums(family, points, 1);
            Ok(sums
                .into_iter()
                .map(|(total, _)| Integral {
                    value: total / points.len() as f64,
                    error_estimate: 0.0,
                })
                .collect())
        }
    }
}

/// Family sums over a point list, with per-substream partial sums
/// (substreams interleave by index). Deterministic chunked reduction.
fn eval_family_sums(
    family: &[TestFunction],
    points: &[IwasawaPoint],
    substreams: usize,
) -> Vec<(f64, Vec<(f64, usize)>)> {
    let chunk = 8192;
    let ranges: Vec<(usize, usize)> = (0..points.len())
        .step_by(chunk)
        .map(|s| (s, (s + chunk).min(points.len())))
        .collect();
    let partials: Vec<Vec<(f64, Vec<(f64, usize)>)>> = ranges
        .par_iter()
        .map(|&(s, e)| {
            let mut acc: Vec<(f64, Vec<(f64, usize)>)> = family
                .iter()
                .map(|_| (0.0, vec![(0.0, 0usize); substreams]))
                .collect();
            for i in s..e {
                let prep = PreparedPoint::new(&points[i]);
                let lane = i % substreams;
                for (k, f) in family.iter().enumerate() {
                    let v = f.eval_prepared(&prep);
                    acc[k].0 += v;
                    acc[k].1[lane].0 += v;
                    acc[k].1[lane].1 += 1;
                }
            }
            acc
        })
        .collect();
    let mut out: Vec<(f64, Vec<(f64, usize)>)> = family
        .iter()
        .map(|_| (0.0, vec![(0.0, 0usize); substreams]))
        .collect();
    for part in partials {
        for (o, p) in out.iter_mut().zip(part) {
            o.0 += p.0;
            for (ol, pl) in o.1.iter_mut().zip(p.1) {
                ol.0 += pl.0;
                ol.1 += pl.1;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Discrepancy
// ---------------------------------------------------------------------------

/// Outcome of a delta-equidistribution check over a finite test family.
#[derive(Debug, Clone)]
pub struct EquidistributionVerdict {
    pub delta: f64,
    pub measure: AlgebraicMeasure,
    pub max_discrepancy: f64,
    pub worst_test: TestFunction,
    /// Lipschitz-normalized discrepancy per family member.
    pub per_test: Vec<f64>,
    pub pass: bool,
}

/// Max over the family of |E_mu f - int f dnu| / |f|_Lip, judged against
/// delta. Every family member must have finite Lipschitz norm.
pub fn discrepancy(
    mu: &EmpiricalMeasure,
    nu: &AlgebraicMeasure,
    family: &[TestFunction],
    delta: f64,
    budget: usize,
) -> Result<EquidistributionVerdict, MeasureError> {
    assert!(!family.is_empty());
    if family.iter().any(|f| !f.lipschitz_norm().is_finite()) {
        return Err(MeasureError::InfiniteLipschitz);
    }
    let empirical = pair_family(mu, family);
    let integrals = integrate_family(family, nu, budget)?;
    let mut per_test = Vec::with_capacity(family.len());
    let mut worst = 0usize;
    let mut worst_val = -1.0;
    for (k, (e, i)) in empirical.iter().zip(&integrals).enumerate() {
        let d = (e - i.value).abs() / family[k].lipschitz_norm();
        if d > worst_val {
            worst = k;
            worst_val = d;
        }
        per_test.push(d);
    }
    Ok(EquidistributionVerdict {
        delta,
        measure: nu.clone(),
        max_discrepancy: worst_val,
        worst_test: family[worst].clone(),
        per_test,
        pass: worst_val < delta,
    })
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

/// Bumps of the given radius on a deterministic grid over the part of the
/// fundamental domain with y <= y_cap. Realizes the supremum over
/// 1-Lipschitz tests by a finite family.
pub fn standard_test_family(spacing: f64, radius: f64, y_cap: f64) -> Vec<TestFunction> {
    grid_family(spacing, radius, y_cap, true)
}

/// Ball indicators on the same grid, for ratio experiments.
pub fn ball_family(spacing: f64, radius: f64, y_cap: f64) -> Vec<TestFunction> {
    grid_family(spacing, radius, y_cap, false)
}

fn grid_family(spacing: f64, radius: f64, y_cap: f64, smooth: bool) -> Vec<TestFunction> {
    assert!(spacing > 0.0 && spacing <= radius, "need spacing <= radius");
    assert!(y_cap > DOMAIN_FLOOR_Y);
    let mut out = Vec::new();
    let nx = (1.0 / spacing).ceil() as usize;
    // a frame-angle offset of delta costs 2 delta in the fixed norm, so the
    // theta grid uses half the nominal spacing
    let ntheta = (4.0 * std::f64::consts::PI / spacing).ceil() as usize;
    let mut y = 0.9;
    while y <= y_cap {
        for ix in 0..nx {
            let x = -0.5 + (ix as f64 + 0.5) / nx as f64;
            if x * x + y * y < 1.0 + 1e-9 {
                continue;
            }
            for it in 0..ntheta {
                let theta = -std::f64::consts::PI
                    + (it as f64 + 0.5) * 2.0 * std::f64::consts::PI / ntheta as f64;
                let point = IwasawaPoint::new(x, y, theta).expect("grid point is valid");
                let f = if smooth {
                    TestFunction::bump(point, radius)
                } else {
                    TestFunction::ball_indicator(point, radius)
                };
                out.push(f.expect("grid center is valid"));
            }
        }
        y *= spacing.exp();
    }
    out
}
