use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uav_pricing::deployment::{
    best_single_hotspot, best_single_hotspot_continuous, compositions, evaluate_profile, forking_condition,
    hotspot_profit, hotspot_profit_continuous, optimal_deployment, optimal_deployment_continuous, route_oracle,
    route_oracle_continuous, routing_assumption_holds, FleetConfig, Hotspot, RouteInstance,
};
use uav_pricing::ValuationModel;

fn fleet(count: usize) -> FleetConfig {
    FleetConfig {
        count,
        budget: 20.0,
        service_cost: 2.0,
        valuation: ValuationModel::exponential(1.0).unwrap(),
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (1..=k).fold(1, |acc, i| acc * (n + 1 - i) / i)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn pooling_never_hurts(alpha in 0.05f64..=1.0, distance in 0.0f64..18.0) {
        let h = Hotspot::new(alpha, distance);
        let mut last = 0.0;
        for n in 1..=6 {
            let d = hotspot_profit(&h, n, &fleet(n)).unwrap();
            prop_assert!(d.profit + 1e-9 >= last);
            let residual = 20.0 - distance;
            let pooled = 2.0 / n as f64;
            prop_assert!(d.k_star as f64 <= residual / (1.0 + pooled) + 1e-9);
            if d.k_star > 0 {
                prop_assert_eq!(d.t_star, (residual - pooled * d.k_star as f64 + 1e-9).floor());
            }
            last = d.profit;
        }
    }

    #[test]
    fn continuous_pooling_never_hurts(rate in 0.05f64..4.0, distance in 0.0f64..18.0) {
        let h = Hotspot::new(rate, distance);
        let profits: Vec<f64> = (1..=6).map(|n| hotspot_profit_continuous(&h, n, &fleet(n)).unwrap().profit).collect();
        prop_assert!(profits.windows(2).all(|w| w[1] + 1e-12 >= w[0]));
    }
}

#[test]
fn every_profile_is_visited_once() {
    for parts in 1..=4 {
        for total in 0..=6 {
            let all: Vec<Vec<usize>> = compositions(total, parts).collect();
            assert_eq!(all.len(), binomial(total + parts - 1, parts - 1));
            assert!(all.iter().all(|c| c.iter().sum::<usize>() == total));
            assert!(all.windows(2).all(|w| w[0] > w[1]));
        }
    }
    let hotspots = [
        Hotspot::new(0.5, 5.0),
        Hotspot::new(0.9, 25.0),
        Hotspot::new(0.4, 8.0),
        Hotspot::new(0.7, 3.0),
    ];
    let plan = optimal_deployment(&hotspots, &fleet(4)).unwrap();
    assert_eq!(plan.profiles_evaluated, binomial(4 + 3 - 1, 3 - 1));
}

#[test]
fn memoized_search_matches_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..8 {
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=4);
        let hotspots: Vec<Hotspot> = (0..m)
            .map(|_| Hotspot::new(rng.gen_range(0.05..1.0), rng.gen_range(0.0..16.0)))
            .collect();
        let plan = optimal_deployment(&hotspots, &fleet(n)).unwrap();
        let mut best = f64::NEG_INFINITY;
        for counts in compositions(n, m) {
            let direct = evaluate_profile(&hotspots, &fleet(n), &counts).unwrap();
            best = best.max(direct.total_profit);
            if counts == plan.profile.counts {
                assert_eq!(direct.total_profit, plan.total_profit);
                assert_eq!(direct.per_hotspot, plan.per_hotspot);
            }
        }
        assert!((best - plan.total_profit).abs() <= 1e-12 * best.max(1.0));
    }
}

fn random_instance(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> RouteInstance {
    let alphas: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..0.95) * scale).collect();
    let points: Vec<(f64, f64)> = (0..m)
        .map(|_| (rng.gen_range(-7.0..7.0), rng.gen_range(-7.0..7.0)))
        .collect();
    RouteInstance::from_points(&alphas, &points).unwrap()
}

#[test]
fn one_uav_serves_one_hotspot() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in [2, 2, 2, 3, 3] {
        let instance = random_instance(&mut rng, m, 1.0);
        let route = route_oracle(&instance, &fleet(1), 1.0).unwrap();
        let single = best_single_hotspot(instance.hotspots(), &fleet(1)).unwrap();
        assert!((route.profit - single.decision.profit).abs() < 1e-9, "{route:?} vs {single:?}");

        let instance = random_instance(&mut rng, m, 2.0);
        if routing_assumption_holds(instance.hotspots(), &fleet(1), 0.5).unwrap() {
            let route = route_oracle_continuous(&instance, &fleet(1), 0.5).unwrap();
            let single = best_single_hotspot_continuous(instance.hotspots(), &fleet(1)).unwrap();
            assert!((route.profit - single.decision.profit).abs() < 1e-9);
        }
    }
}

#[test]
fn weak_hotspot_on_the_way_is_bypassed() {
    let instance = RouteInstance::from_points(&[0.1, 0.9], &[(3.0, 0.0), (8.0, 0.0)]).unwrap();
    let route = route_oracle(&instance, &fleet(1), 1.0).unwrap();
    assert_eq!(route.route, vec![1]);
    assert_eq!(route.energy, vec![12.0]);
    assert_eq!(best_single_hotspot(instance.hotspots(), &fleet(1)).unwrap().index, 1);
}

#[test]
fn forking_condition_is_sufficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut held = 0;
    for i in 0..30 {
        let n = [2, 3, 5][i % 3];
        let mut pair = [
            Hotspot::new(rng.gen_range(0.2..3.0), rng.gen_range(0.0..12.0)),
            Hotspot::new(rng.gen_range(0.2..3.0), rng.gen_range(0.0..12.0)),
        ];
        let single = best_single_hotspot_continuous(&pair, &fleet(1)).unwrap();
        if single.index == 1 {
            pair.swap(0, 1);
        }
        let check = forking_condition(&pair[0], &pair[1], &fleet(n)).unwrap();
        if check.holds {
            held += 1;
            let plan = optimal_deployment_continuous(&pair, &fleet(n)).unwrap();
            assert_eq!(plan.profile.served_hotspots(), 2, "{pair:?} {check:?}");
        }
    }
    assert!(held > 0);
}

#[test]
fn forking_favours_nearby_second_hotspots() {
    let first = Hotspot::new(2.0, 0.0);
    let holds: Vec<bool> = (0..38)
        .map(|i| {
            let second = Hotspot::new(1.0, i as f64 * 0.5);
            forking_condition(&first, &second, &fleet(3)).unwrap().holds
        })
        .collect();
    let end = holds.iter().rposition(|&h| h).expect("condition holds somewhere");
    assert!(holds[..=end].iter().all(|&h| h), "{holds:?}");
    assert!(!holds[end + 1..].is_empty(), "condition never fails: {holds:?}");
}

fn figure_instance(second_distance: f64) -> Vec<Hotspot> {
    vec![
        Hotspot::new(0.9, 4.0),
        Hotspot::new(0.3, second_distance),
        Hotspot::new(0.05, 14.0),
        Hotspot::new(0.05, 15.0),
        Hotspot::new(0.05, 16.0),
    ]
}

#[test]
fn distant_second_hotspot_stops_the_fork() {
    let near = optimal_deployment(&figure_instance(5.0), &fleet(5)).unwrap();
    let far = optimal_deployment(&figure_instance(17.0), &fleet(5)).unwrap();
    assert!(near.profile.counts[1] > 0, "{:?}", near.profile);
    assert_eq!(far.profile.counts, vec![5, 0, 0, 0, 0]);
}

#[test]
fn larger_fleets_spread_out() {
    let hotspots = [
        Hotspot::new(0.9, 4.0),
        Hotspot::new(0.8, 5.0),
        Hotspot::new(0.6, 8.0),
        Hotspot::new(0.5, 10.0),
        Hotspot::new(0.4, 12.0),
    ];
    let served: Vec<usize> = (2..=9)
        .map(|n| optimal_deployment(&hotspots, &fleet(n)).unwrap().profile.served_hotspots())
        .collect();
    assert!(served.windows(2).all(|w| w[1] >= w[0]), "{served:?}");
}
