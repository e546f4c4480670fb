use std::collections::BTreeMap;

use msdpool::analytic::{parallel_expected_time, sequential_expected_time, RusParams};
use msdpool::distillation::{
    choose_pool_distance, logical_error_rate, run_pipeline, CompletionDistribution, Mitigation, PipelineConfig,
};
use msdpool::distselect::{build_dag, execute, schedule, DistSelectParams};
use msdpool::experiments::{tradeoff_table, DistSelectRow};
use msdpool::randcircuit::{
    coupling_groups, generate_circuit, scheduled_run, segments_intersect, Coupling, Qubit, RandomCircuitParams,
};
use proptest::prelude::*;

fn qubit() -> impl Strategy<Value = Qubit> {
    (0u32..12, 0u32..12).prop_map(|(x, y)| Qubit::new(x, y))
}

fn ds_params() -> impl Strategy<Value = DistSelectParams> {
    (0u32..3, 0u32..4, 1u32..5, 1u32..6, 0u32..3, 0u64..3, 1u64..4).prop_map(|(mlog, extra, p, f, pool, slack, d)| {
        let m = 1 << mlog;
        DistSelectParams {
            d: 2 * d + 1,
            num_factories: f,
            m,
            p,
            n: 4,
            l: u64::from(m) << (extra + 1),
            distillation_period: 10,
            consumption_period: 10 + 3 * slack,
            pool_entries: pool,
            ..DistSelectParams::desk(1)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rus_parallel_between_one_attempt_and_sequential(n in 1u32..200, p in 0.0f64..0.9) {
        let params = RusParams::new(n, p).unwrap();
        let par = parallel_expected_time(params).unwrap();
        let seq = sequential_expected_time(params).unwrap();
        prop_assert!(par >= 1.0 / (1.0 - p) - 1e-9);
        prop_assert!(par <= seq + 1e-9);
        let more = parallel_expected_time(RusParams::new(n + 1, p).unwrap()).unwrap();
        prop_assert!(more >= par - 1e-9);
    }

    #[test]
    fn segment_intersection_is_symmetric(a in qubit(), b in qubit(), c in qubit(), d in qubit()) {
        prop_assume!(a != b && c != d);
        let (s, t) = (Coupling::new(a, b), Coupling::new(c, d));
        prop_assert_eq!(segments_intersect(&s, &t), segments_intersect(&t, &s));
        prop_assert!(segments_intersect(&s, &s));
    }

    #[test]
    fn layers_are_valid_and_maximal(w in 1u32..9, h in 1u32..9, dc in 1u32..5, seed in any::<u64>()) {
        let params = RandomCircuitParams { d: 1, width: w, height: h, layers: 3, coupling_distance: dc, p_fail: 0.0, seed };
        for layer in generate_circuit(&params).unwrap() {
            prop_assert_eq!(layer.check(h, dc), Ok(()));
            let groups = coupling_groups(&layer);
            let members: usize = groups.iter().map(|g| g.members.len()).sum();
            prop_assert_eq!(members, layer.couplings.len());
            // Crossing couplings share a group.
            let group_of = |c: &Coupling| groups.iter().position(|g| g.members.contains(c)).unwrap();
            for s in &layer.couplings {
                for t in &layer.couplings {
                    if segments_intersect(s, t) {
                        prop_assert_eq!(group_of(s), group_of(t));
                    }
                }
            }
        }
    }

    #[test]
    fn scheduled_cost_scales_with_d(w in 1u32..7, h in 1u32..7, seed in any::<u64>(), d in 1u64..6) {
        let base = RandomCircuitParams { d: 1, width: w, height: h, layers: 4, coupling_distance: 2, p_fail: 0.0, seed };
        let circuit = msdpool::randcircuit::Circuit::generate(&base).unwrap();
        prop_assert_eq!(scheduled_run(&circuit, d).total(), d * scheduled_run(&circuit, 1).total());
    }

    #[test]
    fn schedules_are_valid_and_replay_exactly(params in ds_params()) {
        let dag = build_dag(&params);
        let s = schedule(&dag, &params);
        prop_assert!(s.validate(&dag, &params).is_ok());
        let run = execute(&dag, &s, &params, &CompletionDistribution::point_mass(0), 3).unwrap();
        prop_assert_eq!(run.total, s.scheduled_cost);
    }

    #[test]
    fn execution_is_deterministic_and_never_early(params in ds_params(), seed in any::<u64>()) {
        let dist = CompletionDistribution::from_probabilities(BTreeMap::from([(0, 0.7), (5, 0.2), (30, 0.1)])).unwrap();
        let dag = build_dag(&params);
        let s = schedule(&dag, &params);
        let a = execute(&dag, &s, &params, &dist, seed).unwrap();
        let b = execute(&dag, &s, &params, &dist, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.total >= s.scheduled_cost);
        for node in &dag.nodes {
            prop_assert!(a.completion[node.id] >= s.clock[node.id] + node.duration);
        }
    }

    #[test]
    fn pool_distance_is_smallest_fitting(l in 1u64..(1 << 30), e in 1.0f64..1000.0, d in 1u64..40) {
        let d = 2 * d + 1;
        let result = choose_pool_distance(l, e, d, 1e-3, 0.005, 1.8e-10);
        if (l as f64) * 1.8e-10 >= 0.005 {
            let exhausted = matches!(result, Err(msdpool::Error::BudgetExhausted { .. }));
            prop_assert!(exhausted);
            return Ok(());
        }
        let got = result.unwrap();
        let fits = |dp: u64| (l as f64) * (3.0 * (e + d as f64) * logical_error_rate(dp, 1e-3).unwrap() + 1.8e-10) < 0.005;
        prop_assert!(got % 2 == 1 && got >= 3);
        prop_assert!(fits(got));
        prop_assert!(got == 3 || !fits(got - 2));
    }

    #[test]
    fn pipeline_outputs_spaced_by_period(seed in any::<u64>(), extra in 0u32..3, racing in any::<bool>()) {
        let mitigation = match (extra, racing) {
            (0, false) => Mitigation::None,
            (0, true) => Mitigation::Racing,
            (n, _) => Mitigation::ExcessiveL1(n),
        };
        let config = PipelineConfig { mitigation, ..PipelineConfig::default() };
        let run = run_pipeline(&config, 200, seed).unwrap();
        prop_assert!(run.output_times.windows(2).all(|w| w[1] - w[0] >= config.period));
        prop_assert!(run.l1_consumed.iter().all(|&c| c % config.l1_states_per_output() == 0));
    }

    #[test]
    fn completion_counts_normalise(counts in prop::collection::btree_map(0u64..50, 1u64..100, 1..10)) {
        let dist = CompletionDistribution::from_counts(&counts).unwrap();
        let sum: f64 = dist.histogram.values().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        let total: u64 = counts.values().sum();
        let mean = counts.iter().map(|(&k, &c)| (k * c) as f64).sum::<f64>() / total as f64;
        prop_assert!((dist.mean_extra - mean).abs() < 1e-9);
    }

    #[test]
    fn pareto_flags_match_brute_force(points in prop::collection::vec((1u64..50, 1u32..50, 0usize..2), 1..12)) {
        let rows: Vec<DistSelectRow> = points.iter().map(|&(s, t, f)| DistSelectRow {
            num_factories: 1,
            pool_entries: 0,
            d_pool: 23,
            consumption_period: 60,
            scheduled: 1,
            mean_delay: 0.0,
            total: f64::from(t),
            rel_delay: 0.0,
            rel_cost_increase: 0.0,
            spatial_qubits: s,
            family: ["a", "b"][f].into(),
        }).collect();
        let table = tradeoff_table(&rows);
        prop_assert_eq!(table.len(), rows.len());
        for r in &table {
            let beaten = |q: &&DistSelectRow| q.spatial_qubits <= r.spatial_qubits && q.total <= r.total
                && (q.spatial_qubits < r.spatial_qubits || q.total < r.total);
            prop_assert_eq!(r.pareto, !rows.iter().any(|q| beaten(&q)));
            prop_assert_eq!(r.pareto_in_family, !rows.iter().filter(|q| q.family == r.family).any(|q| beaten(&q)));
        }
    }
}
