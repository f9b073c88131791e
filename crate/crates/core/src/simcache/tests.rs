use super::*;
use crate::trace::{generate_synthetic_trace, Renewal, SizeModel, SyntheticWorkloadSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn trace(ids: &[&str]) -> Vec<TraceRecord> {
    ids.iter().enumerate().map(|(i, id)| TraceRecord::new(i as f64, *id, 1, true)).collect()
}

fn run_steps(records: &[TraceRecord], config: &CacheConfig, truth: Option<&GroundTruth>) -> (Vec<Outcome>, SimulationResult) {
    let mut sim = Simulator::new(config, truth).unwrap();
    let outcomes = records.iter().map(|r| sim.step(r).unwrap()).collect();
    (outcomes, sim.finish())
}

#[test]
fn infinite_capacity_misses_only_first_requests() {
    let records = trace(&["a", "b", "a", "c", "a", "b", "d", "d"]);
    for policy in [Policy::Lru, Policy::ZipfConstruction] {
        let r = simulate(&records, &CacheConfig::new(policy, Capacity::Unbounded), None).unwrap();
        // k = 8, p = 4
        assert_eq!(r.hit_ratio, 4.0 / 8.0, "{policy}");
        assert!(r.evictions.is_empty());
    }
}

#[test]
fn single_slot_alternation_never_hits() {
    let ids: Vec<&str> = (0..40).map(|i| if i % 2 == 0 { "a" } else { "b" }).collect();
    let records = trace(&ids);
    let r = simulate(&records, &CacheConfig::objects(Policy::Lru, 1), None).unwrap();
    assert_eq!(r.hits, 0);
    assert_eq!(r.hit_ratio, 0.0);
}

#[test]
fn lru_matches_hand_executed_table() {
    let ids = ["A", "B", "C", "A", "D", "B", "E", "A", "C", "D", "A", "B", "F", "A", "B", "C", "D", "E", "A", "B"];
    let hits_at = [4, 11, 14, 15];
    let evicted = ["B", "C", "A", "D", "B", "E", "C", "D", "F", "A", "B", "C", "D"];
    let records = trace(&ids);
    let (outcomes, result) = run_steps(&records, &CacheConfig::objects(Policy::Lru, 3), None);
    for (i, o) in outcomes.iter().enumerate() {
        let expect = if hits_at.contains(&(i + 1)) { Outcome::Hit } else { Outcome::Miss };
        assert_eq!(*o, expect, "request {}", i + 1);
    }
    let got: Vec<&str> = result.evictions.iter().map(|e| e.object_id.as_str()).collect();
    assert_eq!(got, evicted);
    // A fetched at request 1, hit at 4, evicted at 7
    assert_eq!(result.evictions[2], Eviction { object_id: "A".into(), insert_ts: 0.0, evict_ts: 6.0, count: 2 });
    assert_eq!(result.hit_ratio, 0.2);
}

#[test]
fn repeat_request_promotes_to_kernel() {
    let cfg = CacheConfig::objects(Policy::ZipfConstruction, 3);
    let mut sim = Simulator::new(&cfg, None).unwrap();
    let r = trace(&["A", "A"]);
    assert_eq!(sim.step(&r[0]).unwrap(), Outcome::Miss);
    assert_eq!(sim.part_of("A"), Some(Part::Accessory));
    assert_eq!(sim.step(&r[1]).unwrap(), Outcome::Hit);
    assert_eq!(sim.part_of("A"), Some(Part::Kernel));
    assert_eq!(sim.request_count("A"), Some(2));
}

#[test]
fn returning_object_goes_straight_to_kernel() {
    // kernel 1 slot, accessory 2 slots
    let cfg = CacheConfig::objects(Policy::ZipfConstruction, 3);
    let (outcomes, _) = run_steps(&trace(&["A", "B", "C"]), &cfg, None);
    assert!(outcomes.iter().all(|o| *o == Outcome::Miss));
    let mut sim = Simulator::new(&cfg, None).unwrap();
    for r in trace(&["A", "B", "C", "A"]).iter().take(3) {
        sim.step(r).unwrap();
    }
    assert_eq!(sim.part_of("A"), None, "accessory pressure evicts the oldest insertion");
    assert_eq!(sim.request_count("A"), Some(1), "statistics survive eviction");
    let outcome = sim.step(&TraceRecord::new(3.0, "A", 1, true)).unwrap();
    assert_eq!(outcome, Outcome::Miss);
    assert_eq!(sim.part_of("A"), Some(Part::Kernel));
    assert_eq!(sim.request_count("A"), Some(2));
    sim.check_invariants().unwrap();
}

#[test]
fn kernel_evicts_lowest_count_then_least_recent() {
    // kernel 3 slots, accessory 3 slots
    let cfg = CacheConfig::objects(Policy::ZipfConstruction, 6).with_kernel_fraction(0.5);
    let mut sim = Simulator::new(&cfg, None).unwrap();
    let ids = ["X", "X", "X", "Y", "Y", "Z", "Z", "W", "W"];
    for (i, id) in ids.iter().enumerate() {
        sim.step(&TraceRecord::new(i as f64, *id, 1, true)).unwrap();
    }
    // X has count 3; Y and Z count 2 with Y older; W's promotion evicts Y
    assert_eq!(sim.part_of("Y"), None);
    assert_eq!(sim.part_of("X"), Some(Part::Kernel));
    assert_eq!(sim.part_of("Z"), Some(Part::Kernel));
    assert_eq!(sim.part_of("W"), Some(Part::Kernel));
    assert_eq!(sim.evictions().last().unwrap().object_id, "Y");
}

#[test]
fn managing_part_drops_stalest_ghost_only() {
    let cfg = CacheConfig::objects(Policy::ZipfConstruction, 3).with_managing_capacity(Some(3));
    let mut sim = Simulator::new(&cfg, None).unwrap();
    for (i, id) in ["A", "B", "C", "D"].iter().enumerate() {
        sim.step(&TraceRecord::new(i as f64, *id, 1, true)).unwrap();
        sim.check_invariants().unwrap();
    }
    // C evicted A; D's new entry overflowed the managing part and dropped
    // ghost A, then D's admission evicted B, which stays as a ghost
    assert_eq!(sim.managing_len(), 3);
    assert_eq!(sim.request_count("A"), None);
    let state = sim.snapshot();
    assert!(!state.managing["B"].resident);
    assert!(state.managing["C"].resident && state.managing["D"].resident);
    // A returns as a first-time object, into the accessory, and ghost B is dropped
    sim.step(&TraceRecord::new(10.0, "A", 1, true)).unwrap();
    assert_eq!(sim.part_of("A"), Some(Part::Accessory));
    assert_eq!(sim.request_count("B"), None);
    sim.check_invariants().unwrap();
}

#[test]
fn managing_bound_yields_when_everything_is_resident() {
    let cfg = CacheConfig::new(Policy::ZipfConstruction, Capacity::Unbounded).with_managing_capacity(Some(2));
    let mut sim = Simulator::new(&cfg, None).unwrap();
    for (i, id) in ["A", "B", "C"].iter().enumerate() {
        sim.step(&TraceRecord::new(i as f64, *id, 1, true)).unwrap();
    }
    assert_eq!(sim.managing_len(), 3);
    sim.check_invariants().unwrap();
}

#[test]
fn stale_copy_is_refetched_in_place() {
    let mut truth = GroundTruth::default();
    truth.push_change("A", 5.0);
    let records: Vec<_> = [0.0, 2.0, 6.0, 7.0].iter().map(|&t| TraceRecord::new(t, "A", 10, true)).collect();
    for policy in [Policy::Lru, Policy::ZipfConstruction] {
        let cfg = CacheConfig::new(policy, Capacity::Units(100));
        let (outcomes, result) = run_steps(&records, &cfg, Some(&truth));
        assert_eq!(outcomes, [Outcome::Miss, Outcome::Hit, Outcome::Stale, Outcome::Hit], "{policy}");
        assert!(result.evictions.is_empty());
        assert_eq!(result.stale_refetches, 1);
        assert_eq!(result.hit_ratio, 0.5);
    }
}

#[test]
fn oversized_objects_bypass() {
    let records = vec![TraceRecord::new(0.0, "big", 500, true), TraceRecord::new(1.0, "big", 500, true)];
    for policy in [Policy::Lru, Policy::ZipfConstruction] {
        let r = simulate(&records, &CacheConfig::new(policy, Capacity::Units(100)), None).unwrap();
        assert_eq!(r.bypassed, 2);
        assert_eq!(r.hits, 0);
    }
}

#[test]
fn uncacheable_requests_are_counted_not_stored() {
    let mut records = trace(&["a", "a"]);
    records.insert(1, TraceRecord::new(0.5, "u", 1, false));
    records.push(TraceRecord::new(3.0, "u", 1, false));
    let r = simulate(&records, &CacheConfig::new(Policy::Lru, Capacity::Unbounded), None).unwrap();
    assert_eq!((r.requests, r.uncacheable, r.hits), (4, 2, 1));
    assert_eq!(r.hit_ratio, 0.25);
}

#[test]
fn unordered_and_empty_inputs() {
    let mut records = trace(&["a", "b"]);
    records.swap(0, 1);
    let cfg = CacheConfig::objects(Policy::Lru, 2);
    assert!(matches!(simulate(&records, &cfg, None), Err(Error::Unordered { .. })));
    assert!(matches!(compare_policies(&trace(&["a"]), &[], None), Err(Error::NoConfigs)));
}

#[test]
fn table1_row_field_names() {
    let r = simulate(&trace(&["a", "a"]), &CacheConfig::objects(Policy::Lru, 2), None).unwrap();
    let json = serde_json::to_value(r.table1_row()).unwrap();
    let keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
    for k in ["S_eff/nu_int", "nu_out", "nu_int", "H", "nu_B_out", "nu_B_int", "H_B", "E(C)", "E(S)", "T_st"] {
        assert!(keys.iter().any(|x| x == k), "missing {k}");
    }
}

fn random_trace(seed: u64, events: usize, objects: u32, max_size: u64) -> Vec<TraceRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<u64> = (0..objects).map(|_| rng.gen_range(1..=max_size)).collect();
    let mut t = 0.0;
    (0..events)
        .map(|_| {
            t += rng.gen_range(0.0..60.0);
            // skewed object choice
            let u: f64 = rng.gen();
            let obj = ((u * u * u) * objects as f64) as u32;
            let cacheable = rng.gen_bool(0.9);
            TraceRecord::new(t, format!("o{obj}"), sizes[obj as usize], cacheable)
        })
        .collect()
}

#[test]
fn step_replay_equals_whole_trace_run() {
    for seed in 0..4 {
        let records = random_trace(seed, 10_000, 2_000, 5_000);
        for policy in [Policy::Lru, Policy::ZipfConstruction] {
            let cfg = CacheConfig::new(policy, Capacity::Units(400_000)).with_managing_capacity(Some(600));
            let whole = simulate(&records, &cfg, None).unwrap();
            let mut sim = Simulator::new(&cfg, None).unwrap();
            let mut hits = 0;
            for r in &records {
                if sim.step(r).unwrap().is_hit() {
                    hits += 1;
                }
                sim.check_invariants().unwrap();
            }
            let stepped = sim.finish();
            assert_eq!(stepped, whole);
            assert_eq!(stepped.hits, hits);
            assert_eq!(
                stepped.hits + stepped.misses + stepped.stale_refetches + stepped.bypassed + stepped.uncacheable,
                records.len() as u64
            );
            assert!(stepped.nu_int.unwrap() <= stepped.nu_out.unwrap());
        }
    }
}

#[test]
fn compare_runs_each_config_in_order() {
    let records = random_trace(9, 3_000, 500, 100);
    let configs = vec![
        CacheConfig::new(Policy::Lru, Capacity::Units(5_000)),
        CacheConfig::new(Policy::ZipfConstruction, Capacity::Units(5_000)),
        CacheConfig::new(Policy::Lru, Capacity::Units(20_000)),
    ];
    let serial = compare_policies(&records, &configs, None).unwrap();
    let parallel = compare_policies_parallel(&records, &configs, None, 3).unwrap();
    assert_eq!(serial, parallel);
    assert_eq!(serial[0], simulate(&records, &configs[0], None).unwrap());
    assert_eq!(compare_policies(&records, &configs[..1], None).unwrap().len(), 1);
}

#[test]
fn renewal_never_raises_hit_ratio() {
    let spec = SyntheticWorkloadSpec {
        universe_size: 5_000,
        zipf_alpha: 0.75,
        clients: 20,
        per_client_rate: 500.0,
        horizon_days: 5.0,
        renewal: Renewal::RankDependent { alpha_r: 0.7, t_st_days: 5.0 },
        size_model: SizeModel::Constant(1),
        seed: 3,
        ..Default::default()
    };
    let t = generate_synthetic_trace(&spec).unwrap();
    assert!(!t.ground_truth.is_empty());
    for policy in [Policy::Lru, Policy::ZipfConstruction] {
        let cfg = CacheConfig::objects(policy, 800);
        let with = simulate(&t.records, &cfg, Some(&t.ground_truth)).unwrap();
        let without = simulate(&t.records, &cfg, None).unwrap();
        assert!(with.hit_ratio <= without.hit_ratio, "{policy}");
        assert!(with.stale_refetches > 0);
    }
}

#[test]
fn eviction_and_occupancy_csv() {
    let ids = ["A", "B", "C", "D"];
    let r = simulate(&trace(&ids), &CacheConfig::objects(Policy::Lru, 2), None).unwrap();
    let mut out = Vec::new();
    r.write_evictions_csv(&mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "object_id,insert_ts,evict_ts,count\nA,0,2,1\nB,1,3,1\n");
    let mut out = Vec::new();
    r.write_occupancy_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("timestamp_s,kernel_units,accessory_units,managing_entries\n"));
    assert_eq!(text.lines().count(), 3, "{text}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lru_hit_ratio_grows_with_capacity(seed in 0u64..1000, small in 1u64..50, extra in 1u64..50) {
        let mut records = random_trace(seed, 2_000, 200, 1);
        for r in &mut records {
            r.cacheable = true;
        }
        let lo = simulate(&records, &CacheConfig::objects(Policy::Lru, small), None).unwrap();
        let hi = simulate(&records, &CacheConfig::objects(Policy::Lru, small + extra), None).unwrap();
        prop_assert!(lo.hit_ratio <= hi.hit_ratio);
    }

    #[test]
    fn simulation_is_deterministic(seed in 0u64..1000) {
        let records = random_trace(seed, 1_000, 100, 1_000);
        let cfg = CacheConfig::new(Policy::ZipfConstruction, Capacity::Units(20_000));
        prop_assert_eq!(simulate(&records, &cfg, None).unwrap(), simulate(&records, &cfg, None).unwrap());
    }
}
