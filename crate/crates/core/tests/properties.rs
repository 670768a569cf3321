use proptest::prelude::*;
use toric_ci::ci_engine::{ci_sample_value, sample_gauge};
use toric_ci::lattice::{build_torus, gauge_transform, GaugeConfig};
use toric_ci::majorana::{sector_pfaffians, t1, SectorSolver};
use toric_ci::stabilizer_oracle::{exact_ci, renyi_ci, rotated_surface, toric_code, ChannelKind, PauliChannel};

fn kind() -> impl Strategy<Value = ChannelKind> {
    prop_oneof![
        Just(ChannelKind::Bitflip),
        Just(ChannelKind::Phase),
        Just(ChannelKind::BitflipPhase),
        Just(ChannelKind::Depolarizing),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn per_sample_ci_is_gauge_invariant(mask in 0u64..1 << 18, tau in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 9), p in 0.01f64..0.3) {
        let lat = build_torus(3, 3).unwrap();
        let eta = GaugeConfig::from_mask(&lat, mask);
        let moved = gauge_transform(&lat, &eta, &tau).unwrap();
        let a = ci_sample_value(&lat, p, &eta).unwrap();
        let b = ci_sample_value(&lat, p, &moved).unwrap();
        prop_assert_eq!(a.clamped, b.clamped);
        prop_assert!((a.value - b.value).abs() < 1e-9, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn per_sample_ci_never_exceeds_two(mask in 0u64..1 << 32, p in 0.001f64..0.5) {
        let lat = build_torus(4, 4).unwrap();
        let s = ci_sample_value(&lat, p, &GaugeConfig::from_mask(&lat, mask)).unwrap();
        prop_assert!(s.value <= 2.0 + 1e-12);
    }

    #[test]
    fn fast_path_matches_dense_pfaffians(mask in 0u64..1 << 32, p in 0.01f64..0.49) {
        let lat = build_torus(4, 4).unwrap();
        let eta = GaugeConfig::from_mask(&lat, mask);
        let fast = SectorSolver::new(&lat).solve(t1(p), &eta).unwrap();
        let dense = sector_pfaffians(&lat, t1(p), &eta).unwrap();
        match (fast.parity_ratio(), dense.parity_ratio()) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b),
            (a, b) => prop_assert_eq!(a.is_some(), b.is_some()),
        }
    }

    #[test]
    fn gauge_sampling_is_deterministic(seed in any::<u64>(), index in 0u64..1000, p in 0.0f64..0.5) {
        let lat = build_torus(4, 4).unwrap();
        let a = sample_gauge(&lat, p, seed, index).unwrap();
        let b = sample_gauge(&lat, p, seed, index).unwrap();
        prop_assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn stabilizer_ci_respects_bounds(kind in kind(), p in 0.0f64..=1.0) {
        for code in [toric_code(2, 2).unwrap(), rotated_surface(3).unwrap()] {
            let ch = PauliChannel::new(kind, p).unwrap();
            let k = code.k_logical() as f64;
            let ci = exact_ci(&code, &ch).unwrap();
            prop_assert!((-k - 1e-9..=k + 1e-9).contains(&ci), "{}", ci);
            let r2 = renyi_ci(&code, &ch, 2).unwrap();
            prop_assert!((-k - 1e-9..=k + 1e-9).contains(&r2), "{}", r2);
        }
    }
}
