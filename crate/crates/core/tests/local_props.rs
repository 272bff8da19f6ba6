use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nslimit_core::local::experiments::region_mass_experiment;
use nslimit_core::local::{
    integrate_halfannulus, pseudonorm, ChartPoint, ChartSystem, LaurentFamily, OptimizerSpec, QuadratureSpec, Side,
};
use nslimit_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64)
        .prop_filter("nonzero", |(re, im)| re.abs() + im.abs() > 0.1)
        .prop_map(|(re, im)| Complex64::new(re, im))
}

/// A family with a pole of order m dominating up to two lower order terms by a factor of two,
/// so that its zeros stay away from the charts.
fn family(m: u32) -> impl Strategy<Value = LaurentFamily> {
    (complex(), proptest::collection::vec((1..=m, complex()), 0..3)).prop_map(move |(lead, rest)| {
        let others: f64 = rest.iter().map(|(_, c)| c.norm()).sum();
        let lead = if lead.norm() >= 2.0 * others { lead } else { lead * (2.0 * others / lead.norm()) };
        let mut terms = BTreeMap::from([((0, 0), lead)]);
        for (beta, c) in rest {
            *terms.entry((0, beta)).or_default() += c;
        }
        LaurentFamily::new(m, 1, terms).unwrap()
    })
}

#[test]
fn log_polar_quadrature_is_exact_for_the_cylinder() {
    for l in [10.0, 1e2, 1e3, 1e4] {
        let v = integrate_halfannulus(|_, _| 1.0, l, &QuadratureSpec::default()).unwrap();
        assert!((v / (PI * l) - 1.0).abs() < 1e-9, "{l}: {v}");
    }
}

#[test]
fn constant_area_density() {
    // |w|² per ds dφ is the euclidean area element
    for l in [1.0, 10.0, 1e3] {
        let v = integrate_halfannulus(|s, _| (-2.0 * s).exp(), l, &QuadratureSpec::default()).unwrap();
        let exact = PI * (1.0 - (-l).exp());
        assert!((v / exact - 1.0).abs() < 1e-9, "{l}: {v} vs {exact}");
    }
}

#[test]
fn weighted_region_mass() {
    let fams = [LaurentFamily::monomial(2, 2).unwrap(), LaurentFamily::monomial(2, 1).unwrap()];
    let r = region_mass_experiment(
        &fams,
        (0.1, 0.3),
        &|u| u,
        &[1e3],
        &QuadratureSpec::default(),
        &OptimizerSpec::default(),
    )
    .unwrap();
    assert!((r.reference[0] - 0.04).abs() < 1e-12);
    assert!(r.relative_error[0] < 0.05, "{:?}", r.observed);
}

#[test]
fn longer_chains_halve_the_region_mass() {
    let fams: Vec<_> = [LaurentFamily::monomial(2, 2).unwrap(), LaurentFamily::monomial(2, 1).unwrap()]
        .into_iter()
        .map(|f| f.with_chain_length(2).unwrap())
        .collect();
    let r = region_mass_experiment(
        &fams,
        (0.2, 0.4),
        &|_| 1.0,
        &[1e3],
        &QuadratureSpec::default(),
        &OptimizerSpec::default(),
    )
    .unwrap();
    assert!((r.reference[0] - 0.1).abs() < 1e-12);
    assert!(r.relative_error[0] < 0.05, "{:?}", r.observed);
}

#[test]
fn a_zero_inside_the_chart_is_reported() {
    // |θ| vanishes at w = −1/2, so |θ|^{2/m} has a cusp there
    let f = LaurentFamily::perturbed_pole(2, 2.0).unwrap();
    let err = pseudonorm(&[(Complex64::new(1.0, 0.0), f.clone())], 50.0, &QuadratureSpec::default()).unwrap_err();
    assert!(matches!(err, Error::NonConvergence(_)), "{err}");
    let loose = QuadratureSpec::default().with_tolerance(1e-5);
    assert!(pseudonorm(&[(Complex64::new(1.0, 0.0), f)], 50.0, &loose).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pseudonorm_is_homogeneous(f in family(3), lambda in complex(), l in 5.0..200.0f64) {
        let spec = QuadratureSpec::default();
        let base = pseudonorm(&[(Complex64::new(1.0, 0.0), f.clone())], l, &spec).unwrap();
        let scaled = pseudonorm(&[(lambda, f)], l, &spec).unwrap();
        prop_assert!((scaled / (lambda.norm() * base) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn density_dominates_every_normalized_section(
        c in proptest::collection::vec(complex(), 2),
        s in 0.0..10.0f64,
        phi in 0.0..TAU,
        z_side in any::<bool>(),
    ) {
        let fams = [LaurentFamily::perturbed_pole(2, 0.3).unwrap(), LaurentFamily::monomial(2, 1).unwrap()];
        let system = ChartSystem::new(&fams, 20.0, &QuadratureSpec::default(), &OptimizerSpec::default()).unwrap();
        let p = ChartPoint { side: if z_side { Side::Z } else { Side::W }, s, phi };
        let v: Complex64 = system.values_at(p).iter().zip(&c).map(|(v, c)| v * c).sum();
        let candidate = v.norm() / system.integral(&c);
        let best = system.density(p, None).unwrap().value;
        prop_assert!(best >= candidate * (1.0 - 1e-9), "{best} < {candidate}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn density_depends_only_on_the_span(l0 in complex(), l1 in complex(), s in 0.5..8.0f64) {
        let fams = [LaurentFamily::perturbed_pole(2, 0.3).unwrap(), LaurentFamily::monomial(2, 1).unwrap()];
        let scaled = [fams[0].scaled(l0).unwrap(), fams[1].scaled(l1).unwrap()];
        let spec = QuadratureSpec::default();
        let opt = OptimizerSpec::default();
        let p = ChartPoint::w(s, 1.0);
        let a = ChartSystem::new(&fams, 20.0, &spec, &opt).unwrap().density(p, None).unwrap().value;
        let b = ChartSystem::new(&scaled, 20.0, &spec, &opt).unwrap().density(p, None).unwrap().value;
        prop_assert!((a / b - 1.0).abs() < 1e-7, "{a} vs {b}");
    }

    #[test]
    fn pairing_is_hermitian_and_positive(f in family(2), l in 10.0..40.0f64) {
        let fams = [f, LaurentFamily::monomial(2, 1).unwrap()];
        let system = ChartSystem::new(&fams, l, &QuadratureSpec::default(), &OptimizerSpec::default()).unwrap();
        let a = system.pairing().unwrap();
        prop_assert!(a.hermitian_defect() < 1e-10);
        prop_assert!(a.is_positive_definite());
    }
}
