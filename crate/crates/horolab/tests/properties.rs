//! Cross-module properties that back the experiments but do not map onto a
//! single acceptance criterion.

use horolab::flow::{IndexSet, OrbitSpec};
use horolab::hecke::full_hecke_measure;
use horolab::measures::{discrepancy, empirical_measure, standard_test_family, AlgebraicMeasure};
use horolab::sl2::IwasawaPoint;

#[test]
fn hecke_horocycle_discrepancy_refines_monotonically() {
    // the degree-N orbit fills the surface as N grows; discrepancy against
    // the volume may not rise by more than 10% per decade
    let family = standard_test_family(0.4, 0.5, 2.0);
    let mut last = f64::INFINITY;
    for n in [1_000u64, 10_000, 100_000] {
        let mu = full_hecke_measure(n);
        let v = discrepancy(&mu, &AlgebraicMeasure::Volume, &family, 0.5, 200_000).unwrap();
        assert!(
            v.max_discrepancy <= last * 1.1,
            "N={n}: {} after {last}",
            v.max_discrepancy
        );
        last = v.max_discrepancy;
    }
    assert!(last < 0.01, "N=1e5 closed horocycle should be well spread");
}

#[test]
fn escaped_mass_stays_small_for_generic_orbits() {
    let base = IwasawaPoint::new(
        std::f64::consts::SQRT_2 - 1.0,
        1.0,
        std::f64::consts::FRAC_PI_2,
    )
    .unwrap()
    .to_group();
    let spec = OrbitSpec::new(base, 1.0, 1_000_000).with_index_set(IndexSet::All);
    let mu = empirical_measure(&spec).unwrap();
    // equidistribution keeps almost no weight above the cusp cutoff
    assert!(
        mu.escaped_mass() < 0.05,
        "escaped mass {}",
        mu.escaped_mass()
    );
    assert_eq!(
        mu.low_precision(),
        0,
        "no point fell below the precision floor"
    );
}
