//! Cross-module checks: stored artifacts rebuild their inputs, execution
//! policies agree, and towers from the induction tile the interval.

use iet_skew::cocycle::{sample_cocycle, CocycleDescriptor};
use iet_skew::ergolab::{
    fiber_histograms_merged, generic_fixture, translation_invariance_probe, ProbeConfig,
};
use iet_skew::good_returns::{certify, CertifyRequest, IntervalSet};
use iet_skew::iet::{sample_iet, IetDescriptor, SampleConfig};
use iet_skew::par::Exec;
use iet_skew::renorm::{run_rauzy, towers};
use iet_skew::spectrum::{deviation_scan, log_grid};
use iet_skew::{Error, Iet, Permutation, QuadSqrt5, Rational, Scalar};
use num_bigint::BigInt;
use proptest::prelude::*;
use serde_json::Value;

const CERTIFICATE: &str = include_str!("fixtures/certificate_seed7.json");

#[test]
fn stored_certificate_rebuilds_its_inputs() {
    let cert: Value = serde_json::from_str(CERTIFICATE).unwrap();
    let iet: IetDescriptor = serde_json::from_value(cert["iet"].clone()).unwrap();
    assert_eq!(iet.build::<QuadSqrt5>().unwrap(), Iet::golden());
    let cocycle: CocycleDescriptor = serde_json::from_value(cert["cocycle"].clone()).unwrap();
    let sampled = sample_cocycle::<QuadSqrt5>(7, 2, &QuadSqrt5::one()).unwrap();
    assert_eq!(cocycle.build::<QuadSqrt5>().unwrap(), sampled);
    let set = IntervalSet::<QuadSqrt5>::parse(cert["query_set"].as_str().unwrap()).unwrap();
    assert_eq!(set, IntervalSet::parse("0.2:0.3").unwrap());
    assert_eq!(cert["verification"]["method"], "hierarchy");
}

#[test]
fn certify_rejects_small_bound_before_any_search() {
    let f = sample_cocycle::<QuadSqrt5>(7, 2, &QuadSqrt5::one()).unwrap();
    let req = CertifyRequest {
        query_set: IntervalSet::full(),
        birkhoff_bound: QuadSqrt5::from_ratio(3, 2),
        n_min: BigInt::from(10),
        eta: 64.0,
        epsilon: 0.5,
        budget: 10_000,
        times: Default::default(),
        search: Default::default(),
    };
    let err = certify(&Iet::golden(), &f, &req).unwrap_err();
    assert!(matches!(err, Error::PreconditionD { .. }));
    assert_eq!(err.code(), "PRECONDITION_D");
}

#[test]
fn deviation_scan_is_policy_independent() {
    let iet = Iet::golden_f64();
    let f = sample_cocycle::<f64>(2, 3, &1.0).unwrap();
    let grid = log_grid(10, 5_000, 4);
    let par = deviation_scan(&iet, &f, &grid, 8, Exec::Parallel).unwrap();
    let seq = deviation_scan(&iet, &f, &grid, 8, Exec::Sequential).unwrap();
    assert_eq!(par, seq);
}

#[test]
fn probe_is_policy_independent() {
    let fx = generic_fixture().unwrap();
    let cfg = |exec| ProbeConfig {
        n: 20_000,
        windows: 8,
        bins: 64,
        exec,
        ..fx.probe.clone()
    };
    let a = translation_invariance_probe(&fx.iet, &fx.f, &cfg(Exec::Parallel)).unwrap();
    let b = translation_invariance_probe(&fx.iet, &fx.f, &cfg(Exec::Sequential)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn merged_histograms_count_every_visit() {
    let iet = Iet::golden_f64();
    let f = sample_cocycle::<f64>(5, 2, &1.0).unwrap();
    let starts = [0.05, 0.45, 0.85];
    let h =
        fiber_histograms_merged(&iet, &f, &starts, 3_000, 0.25, 2.0, 32, Exec::Parallel).unwrap();
    let total: u64 = h.iter().map(|w| w.total).sum();
    assert_eq!(total, 9_000);
}

fn arb_iet() -> impl Strategy<Value = Iet<Rational>> {
    (2usize..6, any::<u64>())
        .prop_map(|(d, seed)| sample_iet(seed, &Permutation::reversal(d), &SampleConfig::default()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn towers_tile_the_interval(t in arb_iet(), n in 1usize..7) {
        let state = run_rauzy(&t, n).unwrap();
        let dec = towers(&state);
        prop_assert_eq!(dec.area(), Rational::one());
        prop_assert!(dec.verify_partition(&t, 1 << 16).unwrap());
    }

    #[test]
    fn descriptors_round_trip_through_json(t in arb_iet()) {
        let json = serde_json::to_string(&IetDescriptor::from_iet(&t)).unwrap();
        let back: IetDescriptor = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.build::<Rational>().unwrap(), t);
    }
}
