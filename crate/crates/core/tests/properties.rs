use ddla::activity::{activity_distribution, line_activity_oracle, line_hit_sum};
use ddla::dynamics::{run_continuous, run_dfpp, run_discrete, Acceptance, ContinuousMode, Sampler};
use ddla::influence::{run_colored, truncated_line, DEFAULT_WINDOW};
use ddla::io::{self, Meta, Snapshot};
use ddla::{Cluster, Dyadic, HarrisSystem, Site, Weight};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

fn sampler() -> impl Strategy<Value = Sampler> {
    prop_oneof![Just(Sampler::Line), Just(Sampler::Edge), Just(Sampler::Exact)]
}

fn grown(seed: u64, n: u64, sampler: Sampler) -> (Cluster, ddla::dynamics::GrowthTrace) {
    let mut c = Cluster::origin();
    let t = run_discrete(&mut c, n, sampler, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    (c, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn discrete_growth_keeps_cluster_invariants(seed in any::<u64>(), n in 0u64..300, s in sampler()) {
        let (c, t) = grown(seed, n, s);
        prop_assert_eq!(c.len() as u64, n + 1);
        prop_assert!(c.check_invariants().is_ok());
        prop_assert!(t.check_invariants().is_ok());
        prop_assert_eq!(t.final_cluster().sorted_sites(), c.sorted_sites());
        // Every added site sits directly above an earlier one.
        let mut seen = Cluster::origin();
        for a in &t.additions {
            prop_assert!(!seen.contains(a.site));
            prop_assert!(seen.contains(Site::new(a.site.a - 1, a.site.b)) || seen.contains(Site::new(a.site.a, a.site.b - 1)));
            seen.insert(a.site);
        }
    }

    #[test]
    fn discrete_growth_is_reproducible(seed in any::<u64>(), s in sampler()) {
        let (a, ta) = grown(seed, 150, s);
        let (b, tb) = grown(seed, 150, s);
        prop_assert_eq!(a.sorted_sites(), b.sorted_sites());
        prop_assert_eq!(ta, tb);
    }

    #[test]
    fn height_floor_holds(seed in any::<u64>(), n in 1u64..2000) {
        let (c, _) = grown(seed, n, Sampler::Line);
        let h = c.height() as f64;
        prop_assert!(h >= (2.0 * n as f64).sqrt() - 2.0);
        prop_assert!(c.height() as u64 <= n && c.dabs() as u64 <= n);
    }

    #[test]
    fn line_identities_hold_exactly(seed in any::<u64>(), n in 0u64..40) {
        let (c, _) = grown(seed, n, Sampler::Line);
        let total = activity_distribution::<Dyadic>(&c).unwrap().total;
        prop_assert_eq!(line_activity_oracle::<Dyadic>(&c).unwrap(), total);
        let h = c.height();
        let base = line_hit_sum::<Dyadic>(&c, h).unwrap();
        for k in [h + 1, h + 2, h + 7] {
            prop_assert_eq!(line_hit_sum::<Dyadic>(&c, k).unwrap(), base);
        }
    }

    #[test]
    fn exact_and_float_activities_agree(seed in any::<u64>(), n in 0u64..40) {
        let (c, _) = grown(seed, n, Sampler::Edge);
        let exact = activity_distribution::<Dyadic>(&c).unwrap();
        let float = activity_distribution::<f64>(&c).unwrap();
        prop_assert!((exact.total.to_f64() - float.total).abs() < 1e-9);
        // Activity is positive and at most twice the cluster size.
        prop_assert!(float.total > 0.0 && float.total <= 2.0 * c.len() as f64);
    }

    #[test]
    fn harris_replay_is_reproducible(seed in any::<u64>(), horizon in 0.0f64..6.0) {
        let a = run_continuous(&Cluster::origin(), horizon, ContinuousMode::Harris, seed).unwrap();
        let b = run_continuous(&Cluster::origin(), horizon, ContinuousMode::Harris, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.check_invariants().is_ok());
        prop_assert!(a.additions.windows(2).all(|w| w[0].time <= w[1].time));
        prop_assert!(a.additions.iter().all(|x| x.time <= horizon));
    }

    #[test]
    fn gillespie_traces_are_consistent(seed in any::<u64>(), exact in any::<bool>()) {
        let acc = if exact { Acceptance::ExactProbability } else { Acceptance::Walk };
        let t = run_continuous(&Cluster::origin(), 4.0, ContinuousMode::Gillespie(acc), seed).unwrap();
        prop_assert!(t.check_invariants().is_ok());
        let t2 = run_continuous(&Cluster::origin(), 4.0, ContinuousMode::Gillespie(acc), seed).unwrap();
        prop_assert_eq!(t, t2);
    }

    #[test]
    fn dfpp_dominates_ddla(seed in any::<u64>()) {
        let harris = HarrisSystem::new(seed);
        let ddla = run_continuous(&Cluster::origin(), 6.0, ContinuousMode::Harris, seed).unwrap();
        let dfpp = run_dfpp(&Cluster::origin(), 6.0, &harris).unwrap();
        let at: FxHashMap<Site, f64> = dfpp.additions.iter().map(|a| (a.site, a.time)).collect();
        for a in &ddla.additions {
            prop_assert!(at.get(&a.site).is_some_and(|&t| t <= a.time), "{} at {}", a.site, a.time);
        }
    }

    #[test]
    fn red_sites_stay_inside_the_window(seed in any::<u64>(), dx in -3i64..=3) {
        let f = [Site::from_height_deviation(0, 2 * dx).unwrap()];
        match run_colored(&f, 3.0, &HarrisSystem::new(seed), DEFAULT_WINDOW) {
            Ok(t) => {
                let s = t.final_state();
                prop_assert!(s.red.iter().all(|p| p.deviation().abs() < DEFAULT_WINDOW - 2));
                prop_assert!(s.black.is_disjoint(&s.red));
                let line = truncated_line(DEFAULT_WINDOW);
                prop_assert!(line.sites().iter().all(|p| s.black.contains(p) || s.red.contains(p)));
            }
            Err(ddla::Error::WindowBreach { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn snapshot_round_trip_is_byte_identical(seed in any::<u64>(), n in 0u64..200) {
        let (c, t) = grown(seed, n, Sampler::Line);
        let meta = Meta::new().with("seed", seed).with("n", n);
        let text = Snapshot::new(meta, c.sorted_sites()).to_text();
        let back = Snapshot::parse("mem", &text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        let csv = io::trace_to_csv(&t, &Meta::new());
        let (_, t2) = io::trace_from_csv("mem", &csv).unwrap();
        prop_assert_eq!(t2.final_cluster().sorted_sites(), c.sorted_sites());
        prop_assert_eq!(t2.failed_attempts, t.failed_attempts);
        prop_assert_eq!(io::trace_to_csv(&t2, &Meta::new()), csv);
    }
}
