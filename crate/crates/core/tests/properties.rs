//! Property tests for the serialization and blending invariants.

use proptest::prelude::*;

use crashgan_core::cgan::normalize;
use crashgan_core::data::Dataset;
use crashgan_core::nn::{network_from_str, network_to_string, Activation, DenseLayer, DenseNetwork};
use crashgan_core::spf::eb_estimate;

fn finite_feature() -> impl Strategy<Value = f64> {
    // Values a crash dataset could plausibly hold.
    prop_oneof![
        -1e6..1e6f64,
        Just(0.0),
        Just(1.0),
        (-1e-3..1e-3f64),
    ]
}

proptest! {
    #[test]
    fn dataset_csv_round_trips(
        rows in prop::collection::vec(prop::collection::vec(finite_feature(), 3), 0..25),
        counts_seed in prop::collection::vec(0u32..40, 0..25),
        with_lambda in any::<bool>(),
        flags in prop::collection::vec(any::<bool>(), 0..25),
    ) {
        let n = rows.len().min(counts_seed.len()).min(flags.len());
        let rows: Vec<Vec<f64>> = rows[..n].to_vec();
        let counts: Vec<u32> = counts_seed[..n].to_vec();
        let mut ds = Dataset::new(
            vec!["x1".into(), "x2".into(), "x3".into()],
            rows,
            counts,
        ).unwrap();
        ds.synthetic = flags[..n].to_vec();
        if with_lambda {
            ds.true_means = Some((0..n).map(|i| 0.1 + i as f64).collect());
        }
        let back = Dataset::from_csv(&ds.to_csv()).unwrap();
        prop_assert_eq!(ds, back);
    }

    #[test]
    fn network_text_round_trips_bitwise(
        seed in 0u64..5000,
        dims in prop::collection::vec(1usize..6, 2..5),
        act_pick in prop::collection::vec(0usize..4, 1..4),
    ) {
        let mut rng = crashgan_core::rng::stream(seed, "prop-serialize", 0);
        let acts = [Activation::Elu, Activation::Relu, Activation::Sigmoid, Activation::Identity];
        let mut layers = Vec::new();
        for (i, w) in dims.windows(2).enumerate() {
            let act = acts[act_pick[i % act_pick.len()]];
            layers.push(DenseLayer::glorot(w[0], w[1], act, &mut rng).unwrap());
        }
        let net = DenseNetwork::stack(layers).unwrap();
        let back = network_from_str(&network_to_string(&net)).unwrap();
        prop_assert_eq!(net.flat_params(), back.flat_params());
        prop_assert_eq!(net, back);
    }

    #[test]
    fn eb_estimate_stays_between_prediction_and_observation(
        mu in 1e-6..50.0f64,
        y in 0u32..100,
        alpha in 0.0..10.0f64,
    ) {
        let e = eb_estimate(mu, y, alpha).unwrap();
        let lo = mu.min(f64::from(y));
        let hi = mu.max(f64::from(y));
        prop_assert!(e.eb >= lo - 1e-9 && e.eb <= hi + 1e-9);
        prop_assert!(e.weight > 0.0 && e.weight <= 1.0);
    }

    #[test]
    fn normalization_round_trips(
        rows in prop::collection::vec(prop::collection::vec(-1e4..1e4f64, 2), 1..30),
    ) {
        let (scaled, stats) = normalize(&rows, None).unwrap();
        for (orig, norm) in rows.iter().zip(&scaled) {
            prop_assert!(norm.iter().all(|v| (-1e-9..=1.0 + 1e-9).contains(v)));
            let back = stats.invert_row(norm);
            for (j, (a, b)) in orig.iter().zip(&back).enumerate() {
                // Degenerate columns legitimately collapse to the minimum.
                if stats.maxs[j] > stats.mins[j] {
                    prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
                }
            }
        }
    }
}
