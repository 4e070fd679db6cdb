use sop_core::booking::{fill_schedule, optimize_travel_time, replay, snapshot_at_fill, FillEvent, Scenario};
use sop_core::instance::{generate_instance, GenConfig, Instance, Setup};

fn instance(seed: u64, vehicles: usize, setup: Setup) -> Instance {
    generate_instance(&GenConfig {
        seed,
        pool_size: 400,
        vehicles,
        setup,
        ..GenConfig::default()
    })
    .unwrap()
}

#[test]
fn more_vehicles_accept_more() {
    for seed in 0..4 {
        let counts: Vec<_> = [2, 4, 6]
            .iter()
            .map(|&v| fill_schedule(&instance(seed, v, Setup::I), Scenario::NonOptimized).p_hat())
            .collect();
        assert!(counts.windows(2).all(|w| w[0] < w[1]), "seed {seed}: {counts:?}");
    }
}

#[test]
fn snapshots_are_feasible_and_nested() {
    for setup in [Setup::I, Setup::II, Setup::III] {
        let inst = instance(11, 3, setup);
        for scenario in [Scenario::NonOptimized, Scenario::Optimized] {
            let traj = fill_schedule(&inst, scenario);
            let mut prev: Vec<u32> = Vec::new();
            for f in [0.25, 0.5, 0.85, 1.0] {
                let s = snapshot_at_fill(&inst, &traj, f).unwrap();
                assert!(s.is_feasible());
                assert_eq!(s.order_count(), traj.orders_at(f).unwrap());
                let mut ids: Vec<u32> = s.context().orders().map(|o| o.id.0).collect();
                ids.sort_unstable();
                assert!(prev.iter().all(|id| ids.binary_search(id).is_ok()));
                prev = ids;
            }
        }
    }
}

#[test]
fn accepted_orders_keep_their_preferred_window() {
    let inst = instance(3, 3, Setup::II);
    let traj = fill_schedule(&inst, Scenario::Optimized);
    let s = replay(&inst, &traj, traj.p_hat()).unwrap();
    for o in s.context().orders() {
        let pooled = inst.pool.iter().find(|p| p.id == o.id).unwrap();
        assert_eq!(o.window, pooled.window);
    }
}

#[test]
fn optimized_snapshots_are_local_optima() {
    let inst = instance(5, 3, Setup::I);
    let traj = fill_schedule(&inst, Scenario::Optimized);
    assert!(traj.events.iter().any(|e| matches!(e, FillEvent::Move(_))));
    let mut s = snapshot_at_fill(&inst, &traj, 0.9).unwrap();
    assert!(optimize_travel_time(&mut s).is_empty());
}

#[test]
fn optimizing_never_lengthens_tours() {
    let inst = instance(6, 3, Setup::III);
    let traj = fill_schedule(&inst, Scenario::NonOptimized);
    let mut s = replay(&inst, &traj, traj.p_hat()).unwrap();
    let before = s.total_travel_time();
    let moves = optimize_travel_time(&mut s);
    assert!(s.is_feasible());
    assert!(s.total_travel_time() <= before);
    assert_eq!(moves.is_empty(), s.total_travel_time() == before);
}
