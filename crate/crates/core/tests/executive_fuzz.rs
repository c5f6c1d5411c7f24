use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use proptest::prelude::*;
use qsmodels_core::arena::{load_map, step, ArenaRules, Command, Direction, WorldState};
use qsmodels_core::executive::{
    DeferredPlanner, Event, Executive, ExecutiveConfig, Mode, PlanRequest, PlanResponse,
    PlanService,
};
use qsmodels_core::solver::OracleBackend;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAP: &str = "\
###########
#.........#
#.###.###.#
#.........#
#.###.###.#
#.........#
###########
waypoints: w0 1 1 ; w1 5 1 ; w2 9 1 ; w3 1 3 ; w4 5 3 ; w5 9 3 ; w6 1 5 ; w7 5 5 ; w8 9 5
edges: w0 w1 ; w1 w2 ; w0 w3 ; w1 w4 ; w2 w5 ; w3 w4 ; w4 w5 ; w3 w6 ; w4 w7 ; w5 w8 ; w6 w7 ; w7 w8
items: h1 health w4 ; a1 ammo w6 ; g2 weapon2 w2
spawn: bot w0 ; enemy w8
";

static PLANS: AtomicI64 = AtomicI64::new(0);

/// Counts requests handed to the inner planner and not yet answered.
struct Counting {
    inner: DeferredPlanner,
    in_flight: Arc<AtomicI64>,
}

impl PlanService for Counting {
    fn submit(&mut self, request: PlanRequest) {
        self.in_flight.fetch_add(1, Ordering::SeqCst);
        self.inner.submit(request);
    }

    fn poll(&mut self, now_tick: u64) -> Option<PlanResponse> {
        let r = self.inner.poll(now_tick);
        if r.is_some() {
            self.in_flight.fetch_sub(1, Ordering::SeqCst);
        }
        r
    }
}

fn random_command(rng: &mut ChaCha8Rng) -> Command {
    let d = [Direction::N, Direction::E, Direction::S, Direction::W][rng.random_range(0..4)];
    match rng.random_range(0..10) {
        0..=5 => Command::MoveStep(d),
        6 | 7 => Command::Fire,
        8 => Command::Turn(d),
        _ => Command::Idle,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn executive_invariants_hold(seed: u64, horizon in 1usize..=8) {
        let spec = load_map(MAP).unwrap();
        let mut world = WorldState::new(&spec, ArenaRules::default(), seed);
        let in_flight = Arc::new(AtomicI64::new(0));
        let planner = Counting {
            inner: DeferredPlanner::new(Arc::new(OracleBackend), 100),
            in_flight: in_flight.clone(),
        };
        let config = ExecutiveConfig { horizon_max: horizon, ..ExecutiveConfig::default() };
        let mut exec = Executive::new(config, world.arena.clone(), Box::new(planner));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..400 {
            if world.is_over() {
                break;
            }
            let cmd = exec.tick(&world);
            prop_assert!(exec.check_invariants().is_ok(), "{:?}", exec.check_invariants());
            prop_assert!(in_flight.load(Ordering::SeqCst) <= 1);
            prop_assert_eq!(exec.outstanding_request().is_some(), in_flight.load(Ordering::SeqCst) == 1);
            if let Some(plan) = exec.plan() {
                prop_assert!(plan.actions().last().is_some_and(|a| a.is_attack()));
                prop_assert_eq!(exec.mode(), Mode::Executing);
                let table = exec.preemption_table().unwrap();
                prop_assert_eq!(table.len(), plan.len() * 3);
            }
            for e in exec.drain_events() {
                prop_assert_eq!(e.tick(), world.tick);
                if let Event::PlanReady { horizon: h, plan, .. } = &e {
                    PLANS.fetch_add(1, Ordering::SeqCst);
                    prop_assert!(*h <= horizon);
                    prop_assert_eq!(plan.last().map(String::as_str), Some("attack"));
                }
            }
            let enemy = random_command(&mut rng);
            world = step(&world, cmd, enemy);
        }
    }
}

#[test]
fn fuzz_sees_plans() {
    executive_invariants_hold();
    assert!(PLANS.load(Ordering::SeqCst) > 0);
}
