mod common;

use ownbm::edge_weighted::{valuation, AuctionState, EdgePipeline};
use ownbm::format::{parse, serialize};
use ownbm::generators::{GeneratorConfig, WeightDist};
use ownbm::oracle::{self, enumerate_matchings_capped, OracleConfig};
use ownbm::vertex_weighted::{perturbed_score, VertexPipeline};
use ownbm::{measure, stream, Instance, Matching, Pick, Structure, WeightMode};
use proptest::prelude::*;

fn config_strategy(mode: WeightMode, max_n: usize) -> impl Strategy<Value = GeneratorConfig> {
    (1..=max_n, 0usize..=4, 0.0f64..=1.0, any::<u64>(), prop::bool::ANY).prop_map(move |(n, d, p, seed, ints)| {
        let weights = if ints {
            WeightDist::UniformInt { lo: 0, hi: 9 }
        } else {
            WeightDist::Uniform { lo: 0.0, hi: 5.0 }
        };
        GeneratorConfig::random(n, d, p, mode, weights, seed)
    })
}

fn any_mode() -> impl Strategy<Value = WeightMode> {
    prop_oneof![Just(WeightMode::Edge), Just(WeightMode::Vertex)]
}

fn instance_strategy(max_n: usize) -> impl Strategy<Value = Instance> {
    any_mode().prop_flat_map(move |m| config_strategy(m, max_n)).prop_map(|c| c.generate().unwrap())
}

fn geometric_strategy() -> impl Strategy<Value = Instance> {
    (1usize..=15, 0usize..=5, 1.0f64..3.0, any::<u64>(), any_mode())
        .prop_map(|(n, d, tau, seed, mode)| GeneratorConfig::geometric(n, d, tau, mode, seed).generate().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_instances_are_valid(inst in prop_oneof![instance_strategy(14), geometric_strategy()]) {
        prop_assert!(inst.validate().is_ok());
    }

    #[test]
    fn serialization_round_trips(inst in prop_oneof![instance_strategy(14), geometric_strategy()]) {
        let text = serialize(&inst);
        prop_assert_eq!(parse(&text).unwrap(), inst.clone());
        prop_assert_eq!(serialize(&parse(&text).unwrap()), text);
    }

    #[test]
    fn stream_reveals_each_edge_once(inst in instance_strategy(14)) {
        let events = stream(&inst).unwrap();
        prop_assert_eq!(events.len(), inst.n);
        let mut seen = 0;
        for (t, ev) in events.iter().enumerate() {
            prop_assert_eq!(ev.time, t + 1);
            prop_assert_eq!(ev.vertex, t + 1);
            for e in &ev.revealed {
                prop_assert_eq!(e.origin, ev.time);
                seen += 1;
            }
        }
        prop_assert_eq!(seen, inst.edges.len());
    }

    #[test]
    fn measure_is_additive(inst in instance_strategy(10).prop_filter("small", |i| i.edges.len() <= 16), split in any::<u64>()) {
        let g = inst.index().unwrap();
        // any matching, split into two disjoint halves
        let masks = common::matching_masks(&inst);
        let mask = masks[(split as usize) % masks.len()];
        let picks: Vec<Pick> = (0..inst.edges.len())
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| Pick::new(inst.edges[k].origin, inst.edges[k].terminal, inst.edges[k].origin))
            .collect();
        let (a, b): (Vec<_>, Vec<_>) = picks.iter().enumerate().partition(|(k, _)| (split >> (k % 64)) & 1 == 0);
        let ma = Matching { entries: a.into_iter().map(|(_, p)| *p).collect() };
        let mb = Matching { entries: b.into_iter().map(|(_, p)| *p).collect() };
        let whole = Matching { entries: picks };
        let sum = measure(&g, Structure::Matching(&ma)).unwrap() + measure(&g, Structure::Matching(&mb)).unwrap();
        let w = measure(&g, Structure::Matching(&whole)).unwrap();
        prop_assert!((w - sum).abs() < 1e-9);
        prop_assert!((w - common::mask_value(&inst, mask)).abs() < 1e-9);
        prop_assert_eq!(measure(&g, Structure::Matching(&Matching::default())).unwrap(), 0.0);
    }

    #[test]
    fn edge_pipeline_outputs_validate(cfg in config_strategy(WeightMode::Edge, 14), seed in any::<u64>()) {
        let inst = cfg.generate().unwrap();
        let p = EdgePipeline::new(&inst).unwrap();
        let run = p.run(seed).unwrap();
        prop_assert!(p.validate(&run).is_ok(), "{}", p.validate(&run));
        prop_assert_eq!(run.deadline_violations(inst.d), 0);
        prop_assert!((run.semi_weight - run.allocation_value).abs() < 1e-9);
        prop_assert!(run.matching_weight <= run.semi_weight + 1e-9);
        for e in &run.semi.entries {
            prop_assert_eq!(e.time, e.terminal + inst.d);
        }
    }

    #[test]
    fn vertex_pipeline_outputs_validate(cfg in prop_oneof![
        config_strategy(WeightMode::Vertex, 14).boxed(),
        (1usize..=15, 0usize..=5, any::<u64>()).prop_map(|(n, d, s)| GeneratorConfig::geometric(n, d, 1.5, WeightMode::Vertex, s)).boxed(),
    ], seed in any::<u64>()) {
        let inst = cfg.generate().unwrap();
        let p = VertexPipeline::new(&inst).unwrap();
        let run = p.run(seed).unwrap();
        prop_assert!(p.validate(&run).is_ok(), "{}", p.validate(&run));
        prop_assert_eq!(run.deadline_violations(inst.d), 0);
        prop_assert!(run.three_weight >= run.half_weight);
        // every vertex touched by the semi-matching is still placed
        let placed: std::collections::HashSet<_> = run.three.sets.iter().flatten().copied().collect();
        for e in &run.semi.entries {
            prop_assert!(placed.contains(&e.origin) && placed.contains(&e.terminal));
        }
        prop_assert_eq!(placed.len(), run.three.sets.iter().map(Vec::len).sum::<usize>());
        let g = p.graph();
        prop_assert_eq!(measure(g, Structure::ThreeMatching(&run.three)).unwrap(), run.three_weight);
    }

    #[test]
    fn submodular_valuations(inst in instance_strategy(12).prop_filter("edge mode", |i| i.mode == WeightMode::Edge),
                             bidder in 1usize..=12, t_mask in any::<u16>(), s_mask in any::<u16>(), item in 1usize..=12) {
        let g = inst.index().unwrap();
        let bidder = 1 + (bidder - 1) % inst.n;
        let item = 1 + (item - 1) % inst.n;
        let t: Vec<usize> = (1..=inst.n).filter(|v| t_mask >> (v - 1) & 1 == 1).collect();
        let s: Vec<usize> = t.iter().copied().filter(|v| s_mask >> (v - 1) & 1 == 1).collect();
        let with = |set: &[usize]| { let mut x = set.to_vec(); x.push(item); x };
        let gain_t = valuation(&g, bidder, &with(&t)).unwrap() - valuation(&g, bidder, &t).unwrap();
        let gain_s = valuation(&g, bidder, &with(&s)).unwrap() - valuation(&g, bidder, &s).unwrap();
        prop_assert!(gain_t <= gain_s + 1e-12);
        prop_assert_eq!(valuation(&g, bidder, &t).unwrap(), common::bundle_value(&inst, bidder, &t));
    }

    #[test]
    fn auction_state_stays_consistent(cfg in config_strategy(WeightMode::Edge, 12)) {
        let inst = cfg.generate().unwrap();
        let g = inst.index().unwrap();
        let mut state = AuctionState::new(inst.n);
        for item in 1..=inst.n {
            let before = state.total_valuation();
            let winner = state.allocate_item(&g, item).unwrap();
            prop_assert!(state.is_consistent(&g));
            prop_assert!(state.total_valuation() >= before);
            if let Some(b) = winner {
                prop_assert!(b < item && item - b <= inst.d);
                prop_assert_eq!(state.owner(item), Some(b));
            }
        }
    }

    #[test]
    fn perturbed_score_range(w in 0.0f64..100.0, y1 in 0.0f64..=1.0, y2 in 0.0f64..=1.0) {
        let cap = w * (1.0 - (-1.0f64).exp());
        let (lo, hi) = if y1 <= y2 { (y1, y2) } else { (y2, y1) };
        let a = perturbed_score(w, lo).unwrap();
        let b = perturbed_score(w, hi).unwrap();
        prop_assert!(a >= -1e-12 && a <= cap + 1e-12);
        prop_assert!(b <= a + 1e-12);
    }

    #[test]
    fn oracles_agree(inst in instance_strategy(10)) {
        let exhaustive = oracle::opt(&inst, &OracleConfig::exhaustive_uncapped()).unwrap();
        let bnb = oracle::opt(&inst, &OracleConfig::branch_and_bound()).unwrap();
        prop_assert!((exhaustive.weight - bnb.weight).abs() < 1e-9);
        let g = inst.index().unwrap();
        prop_assert!(ownbm::validate_matching(&g, &exhaustive.witness).is_ok());
        prop_assert!((measure(&g, Structure::Matching(&bnb.witness)).unwrap() - bnb.weight).abs() < 1e-9);
        if inst.edges.len() <= 16 {
            prop_assert!((common::brute_force_opt(&inst) - exhaustive.weight).abs() < 1e-9);
        }
    }

    #[test]
    fn enumeration_matches_brute_force(inst in instance_strategy(9).prop_filter("small", |i| i.edges.len() <= 14)) {
        let listed: Vec<Vec<usize>> = enumerate_matchings_capped(&inst, 20).unwrap().collect();
        let masks: std::collections::BTreeSet<u32> = listed
            .iter()
            .map(|m| m.iter().fold(0u32, |acc, &k| acc | 1 << k))
            .collect();
        prop_assert_eq!(masks.len(), listed.len());
        let brute: std::collections::BTreeSet<u32> = common::matching_masks(&inst).into_iter().collect();
        prop_assert_eq!(masks, brute);
    }

    #[test]
    fn optimum_is_monotone(inst in instance_strategy(9), extra in any::<u64>()) {
        let cfg = OracleConfig::exhaustive_uncapped();
        let base = oracle::opt(&inst, &cfg).unwrap().weight;
        // add one missing admissible edge, if any
        let missing: Vec<(usize, usize)> = (2..=inst.n)
            .flat_map(|j| (j.saturating_sub(inst.d).max(1)..j).map(move |i| (j, i)))
            .filter(|&(j, i)| !inst.edges.iter().any(|e| e.origin == j && e.terminal == i))
            .collect();
        if !missing.is_empty() {
            let (j, i) = missing[(extra as usize) % missing.len()];
            let mut bigger = inst.clone();
            bigger.edges.push(ownbm::Edge { origin: j, terminal: i, weight: (inst.mode == WeightMode::Edge).then_some(1.0) });
            prop_assert!(oracle::opt(&bigger, &cfg).unwrap().weight >= base);
        }
        // drop every edge at one vertex
        let v = 1 + (extra as usize) % inst.n;
        let mut smaller = inst.clone();
        smaller.edges.retain(|e| e.origin != v && e.terminal != v);
        prop_assert!(oracle::opt(&smaller, &cfg).unwrap().weight <= base);
    }
}

#[test]
fn exact_weights_follow_the_same_paths() {
    for seed in 0..50 {
        let cfg = GeneratorConfig::random(9, 3, 0.6, WeightMode::Edge, WeightDist::UniformInt { lo: 1, hi: 20 }, seed);
        let inst = cfg.generate().unwrap();
        let exact: ownbm::ExactInstance = inst.cast().unwrap();
        let a = EdgePipeline::new(&inst).unwrap().run(seed).unwrap();
        let b = EdgePipeline::new(&exact).unwrap().run(seed).unwrap();
        assert_eq!(a.semi, b.semi);
        assert_eq!(a.matching, b.matching);
        assert_eq!(b.semi_weight.to_integer() as f64, a.semi_weight);
    }
}
