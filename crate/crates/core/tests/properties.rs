use proptest::prelude::*;

use critcyc::capacity::{critical_alpha_capacity, CapacityInput, CriticalOptions};
use critcyc::cyclicity::{chain_critical_alpha, default_u_grid, measured_dimension, opt_approximant_distance, ChainCase};
use critcyc::sets::{CantorSpec, IntervalSet};
use critcyc::{Complex64, PowerSeries};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn battery() -> Vec<PowerSeries> {
    vec![
        PowerSeries::from_terms(1, &[(0, 0, c(1.0)), (1, 0, c(-1.0))]),
        PowerSeries::from_terms(1, &[(0, 0, c(1.0)), (1, 0, c(-0.5))]),
        PowerSeries::from_terms(2, &[(0, 0, c(1.0)), (1, 1, c(-1.0))]),
        PowerSeries::from_terms(1, &[(0, 0, c(1.0)), (1, 0, c(-0.5f64.sqrt())), (0, 1, c(-0.5f64.sqrt()))]),
    ]
}

#[test]
fn square_is_no_closer_than_its_factor() {
    for f in battery() {
        let deg = f.degree();
        let g = f.multiply(&f, 2 * deg);
        for alpha in [0.0, 1.0, 1.5] {
            let df = opt_approximant_distance(&f, alpha, 8 + deg).unwrap().distances;
            let dg = opt_approximant_distance(&g, alpha, 8).unwrap().distances;
            for d in 0..=8 {
                // p f² = (p f) f with deg(p f) <= d + deg f.
                assert!(dg[d] >= df[d + deg] - 1e-10, "alpha {alpha} D {d}: {} < {}", dg[d], df[d + deg]);
                assert!(dg[d] >= df[d] - 1e-10, "alpha {alpha} D {d}: {} < {}", dg[d], df[d]);
            }
        }
    }
}

#[test]
fn both_sides_agree_on_a_built_set() {
    let spec = CantorSpec::middle_thirds(13);
    let d = measured_dimension(&spec.build().unwrap()).unwrap();
    assert!((d - spec.dimension()).abs() < 0.03, "{d}");
    for case in [ChainCase::Transversal, ChainCase::Ctangential] {
        let chain = chain_critical_alpha(case, d, &default_u_grid()).unwrap();
        let cap = critical_alpha_capacity(&CapacityInput::Cantor(spec), case.capacity_case(), CriticalOptions::default())
            .unwrap()
            .alpha_c;
        assert!((chain - cap).abs() < 0.1, "{case:?}: {chain} vs {cap}");
    }
}

#[test]
fn artifacts_round_trip_through_json() {
    let spec = CantorSpec::middle_thirds(5);
    let e = spec.build().unwrap();
    let back: IntervalSet = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
    assert_eq!(back, e);
    let listed: Vec<(f64, f64)> = serde_json::from_str(&e.to_json()).unwrap();
    assert_eq!(listed, e.intervals());
    let s: CantorSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(s, spec);
    let f = battery().remove(2);
    assert_eq!(PowerSeries::from_json(&f.to_json()).unwrap(), f);
}

fn polynomial() -> impl Strategy<Value = PowerSeries> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6).prop_map(|v| {
        let idx = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
        let mut terms: Vec<(usize, usize, Complex64)> =
            idx.iter().zip(&v).map(|(&(a, b), &(re, im))| (a, b, Complex64::new(re, im))).collect();
        terms[0].2 += c(1.5);
        PowerSeries::from_terms(2, &terms)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn approximant_distances_never_increase(f in polynomial(), alpha in 0.0f64..2.0) {
        let d = opt_approximant_distance(&f, alpha, 6).unwrap().distances;
        for w in d.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10, "{:?}", d);
        }
    }
}
