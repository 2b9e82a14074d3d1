//! Hecke points of degree N: the periodic orbit base, enumeration of the
//! correspondence classes, the b1 statistic of an integer matrix, and the
//! prime-density experiments built on them.

use rayon::prelude::*;
use thiserror::Error;

use crate::measures::{
    integrate_family, pair_family, AlgebraicMeasure, EmpiricalMeasure, MeasureError, TestFunction,
    TestShape, CUSP_CUTOFF,
};
use crate::sieve::{hecke_orbit_point, PrimeTable};
use crate::sl2::{dist_x, reduce_point, GroupElement, IwasawaPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeckeError {
    #[error("a = {a} is not invertible modulo d1 = {d1}")]
    NonInvertible { a: i64, d1: u64 },
    #[error("prime table limit {limit} is below N = {n}")]
    TableTooSmall { limit: u64, n: u64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Base point of the degree-N periodic orbit: the diagonal element whose
/// h-orbit runs along the closed horocycle of length N.
pub fn hecke_base(n: u64) -> GroupElement {
    assert!(n >= 1);
    GroupElement::a(1.0 / n as f64)
}

// ---------------------------------------------------------------------------
// Correspondence representatives
// ---------------------------------------------------------------------------

/// Upper-triangular representative (1/sqrt(N)) [[a, b], [0, d]] with
/// a d = N and 0 <= b < d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeckeRep {
    pub a: u64,
    pub b: u64,
    pub d: u64,
    pub n: u64,
}

impl HeckeRep {
    /// The projected point h(b/d) a(a/d) in the upper half-plane chart.
    pub fn point(&self) -> IwasawaPoint {
        IwasawaPoint::new(
            self.b as f64 / self.d as f64,
            self.a as f64 / self.d as f64,
            0.0,
        )
        .expect("representative point is valid")
    }
}

/// All sigma_1(N) = sum of divisors representatives of degree N.
pub fn enumerate_cn(n: u64) -> Vec<HeckeRep> {
    assert!(n >= 1);
    let mut out = Vec::new();
    for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        let a = n / d;
        for b in 0..d {
            out.push(HeckeRep { a, b, d, n });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// The b1 statistic
// ---------------------------------------------------------------------------

/// a1 = gcd(a, N), d1 = N / a1, and the residue b1 = inverse(a) * b mod d1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct B1Result {
    pub a1: u64,
    pub d1: u64,
    pub b1: u64,
}

fn gcd_u(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u(b, a % b)
    }
}

/// Modular inverse in [1, q] when it exists.
fn inv_mod(a: i64, q: u64) -> Option<u64> {
    if q == 1 {
        return Some(1);
    }
    let a = a.rem_euclid(q as i64) as u64;
    if gcd_u(a, q) != 1 {
        return None;
    }
    // extended Euclid
    let (mut r0, mut r1) = (q as i64, a as i64);
    let (mut s0, mut s1) = (0i64, 1i64);
    while r1 != 0 {
        let quo = r0 / r1;
        (r0, r1) = (r1, r0 - quo * r1);
        (s0, s1) = (s1, s0 - quo * s1);
    }
    let inv = s0.rem_euclid(q as i64) as u64;
    Some(if inv == 0 { q } else { inv })
}

/// The b1 statistic for a top row (a, b) of an integer matrix with
/// determinant N. Fails when a is not invertible modulo d1.
pub fn b1_of(a: i64, b: i64, n: u64) -> Result<B1Result, HeckeError> {
    assert!(n >= 1);
    let a1 = gcd_u(a.unsigned_abs(), n);
    let a1 = if a1 == 0 { n } else { a1 };
    let d1 = n / a1;
    let Some(abar) = inv_mod(a, d1) else {
        return Err(HeckeError::NonInvertible { a, d1 });
    };
    let b1 = ((abar as i128 * b as i128).rem_euclid(d1.max(1) as i128)) as u64;
    Ok(B1Result { a1, d1, b1 })
}

/// b1 of a correspondence representative.
pub fn rep_b1(rep: &HeckeRep) -> Result<B1Result, HeckeError> {
    b1_of(rep.a as i64, rep.b as i64, rep.n)
}

// ---------------------------------------------------------------------------
// Ratio experiments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BallRatio {
    pub label: String,
    pub mass: f64,
    pub empirical: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct RatioReport {
    pub n: u64,
    pub point_count: usize,
    pub escaped_mass: f64,
    pub entries: Vec<BallRatio>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Empirical-to-volume mass ratios of a point cloud over every family
/// member whose volume mass clears the floor.
pub fn ball_ratio_report(
    mu: &EmpiricalMeasure,
    n: u64,
    family: &[TestFunction],
    mass_floor: f64,
    budget: usize,
) -> Result<RatioReport, MeasureError> {
    let masses = integrate_family(family, &AlgebraicMeasure::Volume, budget)?;
    let empirical = pair_family(mu, family);
    let mut entries = Vec::new();
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    for ((f, m), e) in family.iter().zip(&masses).zip(&empirical) {
        if m.value < mass_floor {
            continue;
        }
        let ratio = e / m.value;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        entries.push(BallRatio {
            label: f.label(),
            mass: m.value,
            empirical: *e,
            ratio,
        });
    }
    Ok(RatioReport {
        n,
        point_count: mu.len(),
        escaped_mass: mu.escaped_mass(),
        entries,
        min_ratio,
        max_ratio,
    })
}

/// The degree-N orbit sampled at prime indices p < N, as a measure.
pub fn prime_hecke_measure(n: u64, table: &PrimeTable) -> Result<EmpiricalMeasure, HeckeError> {
    if table.limit() < n {
        return Err(HeckeError::TableTooSmall {
            limit: table.limit(),
            n,
        });
    }
    let cut = table.primes().partition_point(|&p| p < n);
    let points: Vec<IwasawaPoint> = table.primes()[..cut]
        .par_iter()
        .map(|&p| hecke_orbit_point(n, p))
        .collect();
    Ok(EmpiricalMeasure::from_points(points, CUSP_CUTOFF))
}

/// The full degree-N orbit (all indices j < N), as a measure.
pub fn full_hecke_measure(n: u64) -> EmpiricalMeasure {
    let points: Vec<IwasawaPoint> = (0..n)
        .into_par_iter()
        .map(|j| hecke_orbit_point(n, j))
        .collect();
    EmpiricalMeasure::from_points(points, CUSP_CUTOFF)
}

/// Ball ratios of the prime-index degree-N orbit against the volume.
pub fn prime_hecke_experiment(
    n: u64,
    family: &[TestFunction],
    mass_floor: f64,
    budget: usize,
    table: &PrimeTable,
) -> Result<RatioReport, HeckeError> {
    let mu = prime_hecke_measure(n, table)?;
    Ok(ball_ratio_report(&mu, n, family, mass_floor, budget)?)
}

// ---------------------------------------------------------------------------
// Projection counts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct LinnikReport {
    pub n: u64,
    pub rep_count: u64,
    /// Representatives whose projection lands in the target ball.
    pub total_in_u: u64,
    /// Among those, representatives with prime b1.
    pub b1_prime: u64,
    /// Among those, representatives with no invertible a mod d1.
    pub noninvertible_in_u: u64,
    /// Representatives discarded above the height bound.
    pub escaped: u64,
    /// b1_prime / total_in_u.
    pub prime_fraction: Option<f64>,
    /// prime_fraction * log N, to compare against an O(1) window.
    pub normalized: Option<f64>,
}

/// Count degree-N representatives projecting into a ball, and how many of
/// them carry a prime b1. The prime table must cover b1 < N.
pub fn linnik_projection_experiment(
    n: u64,
    ball_center: &IwasawaPoint,
    radius: f64,
    height_bound: f64,
    table: &PrimeTable,
) -> Result<LinnikReport, HeckeError> {
    if table.limit() < n {
        return Err(HeckeError::TableTooSmall {
            limit: table.limit(),
            n,
        });
    }
    let reps = enumerate_cn(n);
    let counts: Vec<(u64, u64, u64, u64)> = reps
        .par_chunks(1024)
        .map(|chunk| {
            let mut in_u = 0u64;
            let mut prime = 0u64;
            let mut noninv = 0u64;
            let mut escaped = 0u64;
            for rep in chunk {
                let reduced = reduce_point(&rep.point()).expect("representative reducible");
                if reduced.y() > height_bound {
                    escaped += 1;
                    continue;
                }
                if dist_x(ball_center, &reduced) > radius {
                    continue;
                }
                in_u += 1;
                match rep_b1(rep) {
                    Ok(b1) => {
                        if b1.b1 <= table.limit() && table.is_prime(b1.b1) {
                            prime += 1;
                        }
                    }
                    Err(_) => noninv += 1,
                }
            }
            (in_u, prime, noninv, escaped)
        })
        .collect();
    let total_in_u: u64 = counts.iter().map(|c| c.0).sum();
    let b1_prime: u64 = counts.iter().map(|c| c.1).sum();
    let noninvertible_in_u: u64 = counts.iter().map(|c| c.2).sum();
    let escaped: u64 = counts.iter().map(|c| c.3).sum();
    let prime_fraction = (total_in_u > 0).then(|| b1_prime as f64 / total_in_u as f64);
    let normalized = prime_fraction.map(|f| f * (n as f64).ln());
    Ok(LinnikReport {
        n,
        rep_count: reps.len() as u64,
        total_in_u,
        b1_prime,
        noninvertible_in_u,
        escaped,
        prime_fraction,
        normalized,
    })
}

/// Family members paired with their ball radius, used by experiments that
/// need the geometric radius back from a family.
pub fn family_radius(f: &TestFunction) -> Option<f64> {
    match f.shape() {
        TestShape::Bump { radius, .. } | TestShape::BallIndicator { radius, .. } => Some(*radius),
        TestShape::HeightIndicator { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::flow_point;
    use crate::sieve::{divisor_sigma1, primes_up_to};
    use crate::sl2::surrogate_dist;

    #[test]
    fn base_orbit_periodicity() {
        let n = 64u64;
        let base = hecke_base(n);
        for j in [0u64, 3, 17] {
            let a = reduce_point(&flow_point(&base, j as f64)).unwrap();
            let b = reduce_point(&flow_point(&base, (j + n) as f64)).unwrap();
            assert!(dist_x(&a, &b) < 1e-7, "period broken at j={j}");
        }
    }

    #[test]
    fn base_is_identity_at_one() {
        let p = hecke_base(1).iwasawa();
        assert!(p.x().abs() < 1e-12 && (p.y() - 1.0).abs() < 1e-12);
        // N = 4, j = 2 sits at (1/2, 1/4)
        let p = flow_point(&hecke_base(4), 2.0);
        assert!((p.x() - 0.5).abs() < 1e-12 && (p.y() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_cn(1).len(), 1);
        assert_eq!(enumerate_cn(6).len(), 12);
        for p in [2u64, 3, 5, 101] {
            assert_eq!(enumerate_cn(p).len() as u64, p + 1);
        }
        for n in 1..=2000u64 {
            assert_eq!(enumerate_cn(n).len() as u64, divisor_sigma1(n), "N={n}");
        }
    }

    #[test]
    fn rep_point_matches_projected_matrix() {
        for rep in enumerate_cn(36) {
            let scale = (rep.n as f64).sqrt();
            let m = GroupElement::new(
                rep.a as f64 / scale,
                rep.b as f64 / scale,
                0.0,
                rep.d as f64 / scale,
            )
            .unwrap();
            let d = surrogate_dist(&rep.point().to_group(), &m);
            assert!(d < 1e-9, "rep {rep:?} dist {d}");
        }
    }

    #[test]
    fn b1_hand_examples() {
        // [[2,1],[0,3]] with N = 6: a1 = 2, d1 = 3, inverse(2) = 2, b1 = 2
        let r = b1_of(2, 1, 6).unwrap();
        assert_eq!((r.a1, r.d1, r.b1), (2, 3, 2));

        // [[1,b],[0,N]]: b1 = b mod N
        for b in [0i64, 3, 7, 12] {
            let r = b1_of(1, b, 8).unwrap();
            assert_eq!((r.a1, r.d1), (1, 8));
            assert_eq!(r.b1 as i64, b.rem_euclid(8));
        }

        // [[N,0],[0,1]]: everything modulo 1
        let r = b1_of(9, 0, 9).unwrap();
        assert_eq!((r.a1, r.d1, r.b1), (9, 1, 0));

        // gcd(a, d1) > 1 has no inverse
        assert_eq!(
            b1_of(2, 1, 4),
            Err(HeckeError::NonInvertible { a: 2, d1: 2 })
        );
    }

    #[test]
    fn b1_depends_only_on_b_mod_d1() {
        for n in 1..=1000u64 {
            for d in (1..=n).filter(|d| n % d == 0) {
                let a = (n / d) as i64;
                let d1 = match b1_of(a, 0, n) {
                    Ok(r) => r.d1,
                    Err(_) => continue,
                };
                for b in 0..(2 * d as i64) {
                    let lhs = b1_of(a, b, n).unwrap().b1;
                    let rhs = b1_of(a, b.rem_euclid(d1 as i64), n).unwrap().b1;
                    assert_eq!(lhs, rhs, "N={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn linnik_prime_degree_counts_without_dynamics() {
        // N prime: reps (1, b, N) have b1 = b, the diagonal rep has b1 = 0,
        // so a full-space ball counts exactly pi(N) prime values
        let n = 997u64;
        let table = primes_up_to(n).unwrap();
        let center = IwasawaPoint::new(0.0, 1.2, 0.0).unwrap();
        let rep = linnik_projection_experiment(n, &center, 1e6, 1e9, &table).unwrap();
        assert_eq!(rep.rep_count, n + 1);
        assert_eq!(rep.escaped, 0);
        assert_eq!(rep.total_in_u, n + 1);
        assert_eq!(rep.b1_prime, table.pi(n));
        assert_eq!(rep.noninvertible_in_u, 0);
    }

    #[test]
    fn prime_hecke_ratio_smoke() {
        let n = 4003u64; // prime
        let table = primes_up_to(n).unwrap();
        let family = crate::measures::ball_family(0.5, 0.5, 2.0);
        let report = prime_hecke_experiment(n, &family, 0.03, 20_000, &table).unwrap();
        assert!(!report.entries.is_empty());
        assert!(report.min_ratio > 0.0, "min ratio {}", report.min_ratio);
        assert!(report.max_ratio < 4.0, "max ratio {}", report.max_ratio);
    }
}
