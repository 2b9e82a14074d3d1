//! Diophantine side of the flow: torus distance, rational approximation
//! scales, continued fractions, Farey arcs, the fundamental period of a
//! piece (closed formula and exhaustive search), and the condition checkers
//! that decide whether a finite orbit is close to a periodic configuration.

use num_integer::Integer;
use num_rational::Ratio;
use rayon::prelude::*;
use thiserror::Error;

use crate::flow::flow_point;
use crate::sieve::divisor_tau;
use crate::sl2::{
    reduce_point, reduction_trajectory, GroupElement, IntegerMatrix, IwasawaPoint, Sl2Error,
};

/// Exact rational with i128 parts; plenty for Farey arcs and convergents
/// that carry double-precision meaning.
pub type Rational = Ratio<i128>;

/// Largest divisor count that can occur for the moduli the checkers inspect;
/// used to pre-screen candidates before factorizing.
const TAU_CAP: f64 = 1536.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiophError {
    #[error("discrete condition needs step s > 1/(N delta)")]
    StepTooSmall,
    #[error(transparent)]
    Sl2(#[from] Sl2Error),
}

// ---------------------------------------------------------------------------
// Torus distance
// ---------------------------------------------------------------------------

/// Nearest integer, signed fractional part in [-1/2, 1/2], and distance to
/// the integers. Half-integers round to even.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusValue {
    pub integral: i64,
    pub fractional: f64,
    pub norm: f64,
}

pub fn torus_parts(alpha: f64) -> TorusValue {
    assert!(alpha.is_finite());
    let nearest = alpha.round_ties_even();
    let fractional = alpha - nearest;
    TorusValue {
        integral: nearest as i64,
        fractional,
        norm: fractional.abs(),
    }
}

/// Distance from alpha to the nearest integer.
pub fn torus_norm(alpha: f64) -> f64 {
    let nearest = alpha.round_ties_even();
    (alpha - nearest).abs()
}

// ---------------------------------------------------------------------------
// Continued fractions and kappa_U
// ---------------------------------------------------------------------------

/// Convergents p_k/q_k of the regular continued fraction of alpha, at most
/// `depth` of them. Stops early when the expansion terminates (rational
/// input) or when the denominators exhaust double precision.
pub fn continued_fraction(alpha: f64, depth: usize) -> Vec<Rational> {
    assert!(depth >= 1 && alpha.is_finite());
    let mut convergents = Vec::new();
    let mut h_prev2: i128 = 0;
    let mut h_prev1: i128 = 1;
    let mut k_prev2: i128 = 1;
    let mut k_prev1: i128 = 0;
    let mut x = alpha;
    for _ in 0..depth {
        let a = x.floor();
        if !(-1e30..=1e30).contains(&a) {
            break;
        }
        let a = a as i128;
        let (h, k) = match (
            a.checked_mul(h_prev1).and_then(|v| v.checked_add(h_prev2)),
            a.checked_mul(k_prev1).and_then(|v| v.checked_add(k_prev2)),
        ) {
            (Some(h), Some(k)) => (h, k),
            _ => break,
        };
        convergents.push(Ratio::new(h, k));
        h_prev2 = h_prev1;
        h_prev1 = h;
        k_prev2 = k_prev1;
        k_prev1 = k;
        let frac = x - a as f64;
        // past ~2^53 the expansion of a double is noise
        if frac.abs() < 1e-15 || k > (1i128 << 53) {
            break;
        }
        x = 1.0 / frac;
    }
    convergents
}

/// Least m >= 1 with |m alpha| within 1/u of an integer, found by walking
/// the convergent denominators (the record minima of m -> torus_norm(m a)).
/// Returns None when the expansion loses precision before crossing the
/// threshold.
pub fn kappa_u_via_convergents(alpha: f64, u: f64) -> Option<u64> {
    let threshold = 1.0 / u;
    for conv in continued_fraction(alpha, 64) {
        let q = *conv.denom();
        if q <= 0 || q > 1 << 40 {
            return None;
        }
        if torus_norm(q as f64 * alpha) <= threshold {
            return Some(q as u64);
        }
    }
    None
}

/// Brute-force scan for the same quantity.
pub fn kappa_u_by_scan(alpha: f64, u: f64) -> u64 {
    let threshold = 1.0 / u;
    let cap = u.ceil() as u64 + 1;
    for m in 1..=cap {
        if torus_norm(m as f64 * alpha) <= threshold {
            return m;
        }
    }
    unreachable!("Dirichlet guarantees a denominator at most ceil(u)+1");
}

/// The rational-approximation scale kappa_U(alpha): least m >= 1 with
/// torus_norm(m alpha) <= 1/U. Supports U up to about 1e8, past which the
/// comparison outruns double precision.
pub fn kappa_u(alpha: f64, u: f64) -> u64 {
    assert!(u > 1.0 && u <= 1e8, "kappa_u domain: 1 < U <= 1e8");
    let m = kappa_u_via_convergents(alpha, u).unwrap_or_else(|| kappa_u_by_scan(alpha, u));
    assert!(m <= u.ceil() as u64 + 1, "Dirichlet bound violated");
    m
}

// ---------------------------------------------------------------------------
// Farey arcs
// ---------------------------------------------------------------------------

/// Arc of the order-K Farey dissection around a/q. Interior boundaries are
/// the mediants with the neighbouring fractions; the arcs around 0/1 and 1/1
/// are clipped to [0, 1], so together the arcs partition [0, 1) exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct FareyArc {
    pub a: i64,
    pub q: i64,
    pub left: Rational,
    pub right: Rational,
}

impl FareyArc {
    pub fn fraction(&self) -> Rational {
        Ratio::new(self.a as i128, self.q as i128)
    }

    pub fn length(&self) -> Rational {
        self.right - self.left
    }
}

/// The Farey fractions of order k on [0, 1], ascending.
fn farey_fractions(k: i64) -> Vec<(i64, i64)> {
    let mut out = vec![(0, 1)];
    if k == 1 {
        out.push((1, 1));
        return out;
    }
    let (mut a, mut b) = (0i64, 1i64);
    let (mut c, mut d) = (1i64, k);
    out.push((c, d));
    while c != 1 || d != 1 {
        let step = (k + b) / d;
        let e = step * c - a;
        let f = step * d - b;
        a = c;
        b = d;
        c = e;
        d = f;
        out.push((c, d));
    }
    out
}

/// Dissect [0, 1) into arcs around the Farey fractions of order k.
pub fn farey_arcs(k: u32) -> Vec<FareyArc> {
    assert!(k >= 1);
    let fr = farey_fractions(k as i64);
    let n = fr.len();
    let mut arcs = Vec::with_capacity(n);
    for i in 0..n {
        let (a, q) = fr[i];
        let center = Ratio::new(a as i128, q as i128);
        let left = if i == 0 {
            Ratio::new(0, 1)
        } else {
            let qp = fr[i - 1].1 as i128;
            center - Ratio::new(1, q as i128 * (q as i128 + qp))
        };
        let right = if i + 1 == n {
            Ratio::new(1, 1)
        } else {
            let qn = fr[i + 1].1 as i128;
            center + Ratio::new(1, q as i128 * (q as i128 + qn))
        };
        arcs.push(FareyArc { a, q, left, right });
    }
    arcs
}

// ---------------------------------------------------------------------------
// Fundamental period
// ---------------------------------------------------------------------------

/// Closed formula for the fundamental period height of the length-T piece
/// through g: min(y, R/T^2) + min(U/kappa, (1/U)/torus_norm(kappa alpha))^2/T
/// with U = sqrt(T/R), evaluated on the reduced representative. On the
/// degenerate line theta = 0 the piece lies on a closed horocycle and the
/// value is y itself.
pub fn fundamental_period_formula(g: &GroupElement, t: f64) -> Result<f64, DiophError> {
    assert!(t > 0.0 && t.is_finite());
    let p = reduce_point(&g.iwasawa())?;
    let s = p.theta().sin();
    if s == 0.0 {
        return Ok(p.y());
    }
    let r = p.y() / (s * s);
    let first = p.y().min(r / (t * t));
    let w = p.theta().cos() / s;
    let alpha = p.x() - p.y() * w;
    let u = (t / r).sqrt();
    if !alpha.is_finite() || u == 0.0 {
        return Ok(first);
    }
    let kappa = if u <= 1.0 { 1 } else { kappa_u(alpha, u) };
    let knorm = torus_norm(kappa as f64 * alpha);
    let branch_a = u / kappa as f64;
    let branch_b = if knorm > 0.0 {
        (1.0 / u) / knorm
    } else {
        f64::INFINITY
    };
    let second = branch_a.min(branch_b).powi(2) / t;
    Ok(first + second)
}

/// Which extreme of the best translate realizes the minimum height.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodEndpoint {
    Start,
    End,
}

/// Result of the exhaustive fundamental-period search: the achieved height,
/// the achieving integer translate, which endpoint realizes it, and the
/// highest-position parameters. The tangency data is absent when the peak
/// sits exactly on the degenerate line theta = 0.
#[derive(Debug, Clone)]
pub struct PeriodReport {
    pub y_t: f64,
    pub gamma: IntegerMatrix,
    pub endpoint: PeriodEndpoint,
    pub peak: IwasawaPoint,
    pub x_t: f64,
    pub theta_t: f64,
    pub alpha_t: Option<f64>,
    pub w_t: Option<f64>,
}

/// Exhaustive search for the fundamental period: maximize the piece minimum
/// height over integer translates. The minimum height of gamma g h([0,T])
/// depends only on the bottom row of gamma, so the search enumerates coprime
/// (c, d) with |c|, |d| <= entry_bound and lifts the winner to a full matrix
/// with |b| minimal. The peak x-coordinate is normalized into (-1/2, 1/2].
pub fn fundamental_period_oracle(g: &GroupElement, t: f64, entry_bound: i64) -> PeriodReport {
    assert!(entry_bound >= 1);
    assert!(t >= 0.0 && t.is_finite());
    let [ag, bg, cg, dg] = g.entries();

    // per-candidate piece minimum height from the bottom row of gamma * g
    let height = |c: i64, d: i64| -> f64 {
        let u = c as f64 * ag + d as f64 * cg;
        let v = c as f64 * bg + d as f64 * dg;
        let vt = u * t + v;
        let y_start = 1.0 / (u * u + v * v);
        let y_end = 1.0 / (u * u + vt * vt);
        y_start.min(y_end)
    };

    // (c, d) and (-c, -d) give the same heights; scan the half-space
    let best = (0..=entry_bound)
        .into_par_iter()
        .map(|c| {
            let mut best_y = f64::NEG_INFINITY;
            let mut best_cd = (0i64, 1i64);
            for d in -entry_bound..=entry_bound {
                if c == 0 && d != 1 {
                    continue;
                }
                if c > 0 && (c.gcd(&d.abs()) != 1) {
                    continue;
                }
                let y = height(c, d);
                if y > best_y {
                    best_y = y;
                    best_cd = (c, d);
                }
            }
            (best_y, best_cd)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::NEG_INFINITY, (0i64, 1i64)), |acc, item| {
            if item.0 > acc.0 {
                item
            } else {
                acc
            }
        });

    let (c, d) = best.1;
    let gamma = lift_bottom_row(c, d);
    let translated = gamma.to_group().compose(g);
    let u = c as f64 * ag + d as f64 * cg;
    let v = c as f64 * bg + d as f64 * dg;
    let vt = u * t + v;
    let y_start = 1.0 / (u * u + v * v);
    let y_end = 1.0 / (u * u + vt * vt);
    let endpoint = if y_start <= y_end {
        PeriodEndpoint::Start
    } else {
        PeriodEndpoint::End
    };
    let mut peak = match endpoint {
        PeriodEndpoint::Start => translated.iwasawa(),
        PeriodEndpoint::End => flow_point(&translated, t),
    };
    let mut gamma = gamma;
    let shift = (peak.x() - 0.5).ceil();
    if shift != 0.0 {
        peak = IwasawaPoint::new(peak.x() - shift, peak.y(), peak.theta()).expect("valid peak");
        gamma = IntegerMatrix::translation(-shift as i64).compose(&gamma);
    }
    let (alpha_t, w_t) = match crate::flow::horocycle_params(&peak) {
        Ok(h) => (Some(h.alpha), Some(h.w)),
        Err(_) => (None, None),
    };
    PeriodReport {
        y_t: peak.y(),
        gamma,
        endpoint,
        peak,
        x_t: peak.x(),
        theta_t: peak.theta(),
        alpha_t,
        w_t,
    }
}

/// Lift a coprime bottom row to an SL(2,Z) matrix with |b| minimal.
fn lift_bottom_row(c: i64, d: i64) -> IntegerMatrix {
    if c == 0 {
        // d must be +-1; with d = 1 the lift is the identity family
        assert!(d == 1 || d == -1);
        return if d == 1 {
            IntegerMatrix::identity()
        } else {
            IntegerMatrix::from_i64(-1, 0, 0, -1).expect("unimodular")
        };
    }
    if d == 0 {
        assert!(c == 1 || c == -1);
        return IntegerMatrix::from_i64(0, -c.signum(), c, 0).expect("unimodular");
    }
    // solve a d - b c = 1, then slide (a, b) -> (a + kc, b + kd) to minimize |b|
    let (g, a0, neg_b0) = ext_gcd(d, c);
    debug_assert_eq!(g, 1);
    let a0 = a0 as i128;
    let b0 = -(neg_b0 as i128);
    let k = (-(b0 as f64) / d as f64).round() as i128;
    let a = a0 + k * c as i128;
    let b = b0 + k * d as i128;
    IntegerMatrix::new(a.into(), b.into(), c.into(), d.into()).expect("unimodular lift")
}

/// Extended gcd: returns (g, x, y) with x*a + y*b = g.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        return (a.abs(), a.signum(), 0);
    }
    let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
    (g, y, x - (a.div_euclid(b)) * y)
}

// ---------------------------------------------------------------------------
// Dani condition checkers
// ---------------------------------------------------------------------------

/// Substitutions for the unspecified O(1) exponents of the condition
/// checkers: witness sizes are bounded by base^c_witness and right-hand
/// sides scale as base^c_bound, with base = 1/delta or tau(q2)/delta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentConfig {
    pub c_witness: f64,
    pub c_bound: f64,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        ExponentConfig {
            c_witness: 2.0,
            c_bound: 2.0,
        }
    }
}

/// Which inequality family a verdict refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DaniKind {
    Continuous,
    DiscreteModulus,
    DiscreteRepresentative,
}

/// Outcome of a condition check, with enough witness data to re-verify the
/// inequalities independently.
#[derive(Debug, Clone)]
pub struct DaniConditionVerdict {
    pub kind: DaniKind,
    pub satisfied: bool,
    pub witness_q: Option<u64>,
    pub witness_gamma: Option<IntegerMatrix>,
    pub witness_point: Option<IwasawaPoint>,
    pub exponents: ExponentConfig,
    /// Left side of the winning inequality (sum of terms for the
    /// representative condition).
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    /// Degenerate input: the orbit rides a closed horocycle exactly.
    pub degenerate: bool,
}

impl DaniConditionVerdict {
    fn unsatisfied(kind: DaniKind, exponents: ExponentConfig) -> Self {
        DaniConditionVerdict {
            kind,
            satisfied: false,
            witness_q: None,
            witness_gamma: None,
            witness_point: None,
            exponents,
            lhs: None,
            rhs: None,
            degenerate: false,
        }
    }
}

/// Tangency point of the horocycle through p, or None on the degenerate
/// line.
fn tangency(p: &IwasawaPoint) -> Option<f64> {
    let s = p.theta().sin();
    if s == 0.0 {
        return None;
    }
    let alpha = p.x() - p.y() * p.theta().cos() / s;
    alpha.is_finite().then_some(alpha)
}

/// Continuous-orbit condition: some q <= delta^-c_witness has
/// torus_norm(q alpha) < delta^-c_bound / T. A base exactly on a closed
/// horocycle is reported satisfied and degenerate.
pub fn dani_condition_continuous(
    g0: &GroupElement,
    t: f64,
    delta: f64,
    exponents: ExponentConfig,
) -> DaniConditionVerdict {
    assert!(delta > 0.0 && delta < 0.5);
    assert!(t > 0.0);
    let p = g0.iwasawa();
    let alpha = match tangency(&p) {
        Some(a) => a,
        None => {
            return DaniConditionVerdict {
                satisfied: true,
                degenerate: true,
                ..DaniConditionVerdict::unsatisfied(DaniKind::Continuous, exponents)
            };
        }
    };
    let q_cap = delta.powf(-exponents.c_witness).ceil().min(1e9) as u64;
    let rhs = delta.powf(-exponents.c_bound) / t;
    for q in 1..=q_cap.max(1) {
        let lhs = torus_norm(q as f64 * alpha);
        if lhs < rhs {
            return DaniConditionVerdict {
                kind: DaniKind::Continuous,
                satisfied: true,
                witness_q: Some(q),
                witness_gamma: None,
                witness_point: Some(p),
                exponents,
                lhs: Some(lhs),
                rhs: Some(rhs),
                degenerate: false,
            };
        }
    }
    DaniConditionVerdict::unsatisfied(DaniKind::Continuous, exponents)
}

/// Scan limits for the discrete checkers.
#[derive(Debug, Clone, Copy)]
pub struct DaniScanOptions {
    /// Hard cap on the scanned moduli q and q'.
    pub q_scan_cap: u64,
    /// Moduli whose reduced denominator exceeds this are skipped; their
    /// divisor count is out of desk-scale reach.
    pub q2_cap: u64,
    /// Also evaluate the modulus-form condition and report agreement.
    pub check_modulus_form: bool,
}

impl Default for DaniScanOptions {
    fn default() -> Self {
        DaniScanOptions {
            q_scan_cap: 20_000,
            q2_cap: 1_000_000_000,
            check_modulus_form: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DaniDiscreteReport {
    /// Representative-form condition: a low Gamma-translate (x + iy, theta)
    /// admits a modulus q' near y^(-1/2) making q'x, N q'sy and the angle
    /// term simultaneously small.
    pub representative: DaniConditionVerdict,
    /// Modulus-form condition on q s/R and [q s/R] alpha, when requested.
    pub modulus: Option<DaniConditionVerdict>,
    /// Whether the two verdicts agree, when both were evaluated.
    pub agree: Option<bool>,
}

/// Denominator of the reduced fraction num/den, den >= 1.
fn reduced_denominator(num: i128, den: i128) -> i128 {
    debug_assert!(den >= 1);
    den / num.abs().gcd(&den)
}

fn check_representative(
    traj: &[(IwasawaPoint, IntegerMatrix)],
    s: f64,
    n: u64,
    delta: f64,
    exponents: ExponentConfig,
    opts: &DaniScanOptions,
) -> DaniConditionVerdict {
    let nf = n as f64;
    let sn2 = (s * nf) * (s * nf);
    for (pt, gamma) in traj {
        let y = pt.y();
        if y >= 1.0 {
            continue;
        }
        let x = pt.x();
        let th = pt.theta().abs();
        let inv_sqrt_y = 1.0 / y.sqrt();
        let max_mw = (TAU_CAP / delta).powf(exponents.c_witness);
        let q_hi = (inv_sqrt_y * max_mw).min(opts.q_scan_cap as f64) as u64;
        for qp in 1..=q_hi.max(1) {
            let qsy = qp as f64 * s * y;
            if !qsy.is_finite() || qsy.abs() > 1e15 {
                continue;
            }
            let near = qsy.round_ties_even() as i128;
            let q2p = reduced_denominator(near, qp as i128);
            if q2p > opts.q2_cap as i128 {
                continue;
            }
            // cheap pre-screen with the largest possible divisor count
            let lhs = torus_norm(qp as f64 * x)
                + nf * (qsy - near as f64).abs()
                + sn2 * qp as f64 * th * y;
            let rhs_cap = y.sqrt() * (TAU_CAP / delta).powf(exponents.c_bound);
            if lhs >= rhs_cap {
                continue;
            }
            let tau = divisor_tau(q2p as u64) as f64;
            let mw = (tau / delta).powf(exponents.c_witness);
            if (qp as f64) < inv_sqrt_y / mw || (qp as f64) > inv_sqrt_y * mw {
                continue;
            }
            let rhs = y.sqrt() * (tau / delta).powf(exponents.c_bound);
            if lhs < rhs {
                return DaniConditionVerdict {
                    kind: DaniKind::DiscreteRepresentative,
                    satisfied: true,
                    witness_q: Some(qp),
                    witness_gamma: Some(gamma.clone()),
                    witness_point: Some(*pt),
                    exponents,
                    lhs: Some(lhs),
                    rhs: Some(rhs),
                    degenerate: false,
                };
            }
        }
    }
    DaniConditionVerdict::unsatisfied(DaniKind::DiscreteRepresentative, exponents)
}

fn check_modulus(
    traj: &[(IwasawaPoint, IntegerMatrix)],
    s: f64,
    n: u64,
    delta: f64,
    exponents: ExponentConfig,
    opts: &DaniScanOptions,
) -> DaniConditionVerdict {
    let nf = n as f64;
    for (pt, gamma) in traj {
        let sin_t = pt.theta().sin();
        if sin_t == 0.0 {
            // diameter undefined; the representative form covers this rep
            continue;
        }
        let r = pt.y() / (sin_t * sin_t);
        let alpha = match tangency(pt) {
            Some(a) => a,
            None => continue,
        };
        let gamma_entry =
            num_traits::ToPrimitive::to_f64(&gamma.max_abs_entry()).unwrap_or(f64::INFINITY);
        let max_m = (TAU_CAP / delta).powf(exponents.c_witness);
        let q_hi = max_m.min(opts.q_scan_cap as f64) as u64;
        for q in 1..=q_hi.max(1) {
            let qsr = q as f64 * s / r;
            if !qsr.is_finite() || qsr.abs() > 1e15 {
                continue;
            }
            let near = qsr.round_ties_even() as i128;
            let cond1_lhs = (qsr - near as f64).abs();
            let prod = near as f64 * alpha;
            if !prod.is_finite() {
                continue;
            }
            let near_alpha = prod.round_ties_even();
            let cond2_lhs = (prod - near_alpha).abs();
            // q2 from the two nested reduced fractions
            let q2tilde = if near == 0 {
                1
            } else {
                reduced_denominator(near_alpha as i128, near.abs())
            };
            let den = match (q as i128)
                .checked_mul(q2tilde)
                .and_then(|v| v.checked_mul(q2tilde))
            {
                Some(v) => v,
                None => continue,
            };
            let q2 = reduced_denominator(near, den);
            if q2 > opts.q2_cap as i128 {
                continue;
            }
            // pre-screen before factorizing
            let cap_m = (TAU_CAP / delta).powf(exponents.c_bound);
            if cond1_lhs >= cap_m / nf || cond2_lhs >= cap_m / (s * nf * nf) {
                continue;
            }
            let tau = divisor_tau(q2 as u64) as f64;
            let mw = (tau / delta).powf(exponents.c_witness);
            if q as f64 > mw || gamma_entry > mw {
                continue;
            }
            let m = (tau / delta).powf(exponents.c_bound);
            if cond1_lhs < m / nf && cond2_lhs < m / (s * nf * nf) {
                return DaniConditionVerdict {
                    kind: DaniKind::DiscreteModulus,
                    satisfied: true,
                    witness_q: Some(q),
                    witness_gamma: Some(gamma.clone()),
                    witness_point: Some(*pt),
                    exponents,
                    lhs: Some(cond1_lhs.max(cond2_lhs * s * nf)),
                    rhs: Some(m / nf),
                    degenerate: false,
                };
            }
        }
    }
    DaniConditionVerdict::unsatisfied(DaniKind::DiscreteModulus, exponents)
}

/// Discrete-orbit condition checker. Scans the reduction trajectory of the
/// base point for a low representative (x + iy, theta) with y < 1 and a
/// modulus q' in a window around y^(-1/2) making
/// torus_norm(q'x) + N torus_norm(q'sy) + (sN)^2 q' |theta| y small against
/// sqrt(y) (tau(q2')/delta)^c. Optionally also evaluates the modulus form on
/// q s/R and reports whether the two verdicts agree.
pub fn dani_condition_discrete(
    g0: &GroupElement,
    s: f64,
    n: u64,
    delta: f64,
    exponents: ExponentConfig,
    opts: &DaniScanOptions,
) -> Result<DaniDiscreteReport, DiophError> {
    assert!(delta > 0.0 && delta < 0.5);
    assert!(n >= 1);
    if !(s > 1.0 / (n as f64 * delta)) {
        return Err(DiophError::StepTooSmall);
    }
    let traj = reduction_trajectory(&g0.iwasawa())?;
    let representative = check_representative(&traj, s, n, delta, exponents, opts);
    let modulus = opts
        .check_modulus_form
        .then(|| check_modulus(&traj, s, n, delta, exponents, opts));
    let agree = modulus
        .as_ref()
        .map(|m| m.satisfied == representative.satisfied);
    Ok(DaniDiscreteReport {
        representative,
        modulus,
        agree,
    })
}

/// Reduced modulus q2' of the representative form: the denominator of
/// [q' s y] / q' in lowest terms, for a witness point and modulus.
pub fn representative_q2(point: &IwasawaPoint, s: f64, q_prime: u64) -> u64 {
    let near = (q_prime as f64 * s * point.y()).round_ties_even() as i128;
    reduced_denominator(near, q_prime as i128) as u64
}

/// Reduced modulus q2 of the modulus form: the nested reduced-fraction
/// denominator built from q s/R and alpha at a witness point.
pub fn modulus_q2(point: &IwasawaPoint, s: f64, q: u64) -> Option<u64> {
    let sin_t = point.theta().sin();
    if sin_t == 0.0 {
        return None;
    }
    let r = point.y() / (sin_t * sin_t);
    let alpha = tangency(point)?;
    let near = (q as f64 * s / r).round_ties_even() as i128;
    let near_alpha = (near as f64 * alpha).round_ties_even();
    let q2tilde = if near == 0 {
        1
    } else {
        reduced_denominator(near_alpha as i128, near.abs())
    };
    let den = (q as i128).checked_mul(q2tilde)?.checked_mul(q2tilde)?;
    Some(reduced_denominator(near, den) as u64)
}

/// Re-verify a satisfied verdict from its stored witnesses alone. Returns
/// false for unsatisfied or degenerate verdicts and for any inequality that
/// fails to reproduce.
pub fn verify_witness(verdict: &DaniConditionVerdict, t_or_n: f64, s: f64, delta: f64) -> bool {
    if !verdict.satisfied || verdict.degenerate {
        return false;
    }
    let exp = verdict.exponents;
    match verdict.kind {
        DaniKind::Continuous => {
            let (Some(q), Some(p)) = (verdict.witness_q, verdict.witness_point) else {
                return false;
            };
            let Some(alpha) = tangency(&p) else {
                return false;
            };
            torus_norm(q as f64 * alpha) < delta.powf(-exp.c_bound) / t_or_n
        }
        DaniKind::DiscreteRepresentative => {
            let (Some(qp), Some(p)) = (verdict.witness_q, verdict.witness_point) else {
                return false;
            };
            let n = t_or_n;
            let y = p.y();
            if y >= 1.0 {
                return false;
            }
            let qsy = qp as f64 * s * y;
            let near = qsy.round_ties_even() as i128;
            let q2p = reduced_denominator(near, qp as i128);
            let tau = divisor_tau(q2p as u64) as f64;
            let mw = (tau / delta).powf(exp.c_witness);
            let inv_sqrt_y = 1.0 / y.sqrt();
            if (qp as f64) < inv_sqrt_y / mw || (qp as f64) > inv_sqrt_y * mw {
                return false;
            }
            let lhs = torus_norm(qp as f64 * p.x())
                + n * (qsy - near as f64).abs()
                + (s * n) * (s * n) * qp as f64 * p.theta().abs() * y;
            lhs < y.sqrt() * (tau / delta).powf(exp.c_bound)
        }
        DaniKind::DiscreteModulus => {
            let (Some(q), Some(p)) = (verdict.witness_q, verdict.witness_point) else {
                return false;
            };
            let n = t_or_n;
            let sin_t = p.theta().sin();
            if sin_t == 0.0 {
                return false;
            }
            let r = p.y() / (sin_t * sin_t);
            let Some(alpha) = tangency(&p) else {
                return false;
            };
            let qsr = q as f64 * s / r;
            let near = qsr.round_ties_even() as i128;
            let near_alpha = (near as f64 * alpha).round_ties_even();
            let q2tilde = if near == 0 {
                1
            } else {
                reduced_denominator(near_alpha as i128, near.abs())
            };
            let q2 = reduced_denominator(near, (q as i128) * q2tilde * q2tilde);
            let tau = divisor_tau(q2 as u64) as f64;
            let m = (tau / delta).powf(exp.c_bound);
            (qsr - near as f64).abs() < m / n
                && (near as f64 * alpha - near_alpha).abs() < m / (s * n * n)
        }
    }
}
