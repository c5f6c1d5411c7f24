mod support;

use proptest::prelude::*;
use qsmodels_core::arena::{load_map, ArenaRules, WorldState};
use qsmodels_core::encoder::{decode_plan, PlannedAction};
use qsmodels_core::opponent::OpponentModel;
use qsmodels_core::perception::{sense, to_fluents, Fluent, HealthThresholds};
use qsmodels_core::solver::term::parse_term;
use qsmodels_core::solver::{
    parse_answer_set, solve_oracle, GroundAtom, SolveResult, SolverOutput, Term,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        "[a-z][a-z0-9_]{0,6}".prop_map(Term::Const),
        (-1000i64..1000).prop_map(Term::Int),
        "[a-zA-Z0-9 ,()\"\\\\]{0,8}".prop_map(Term::Str),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            (
                "[a-z][a-z0-9_]{0,6}",
                prop::collection::vec(inner.clone(), 1..4)
            )
                .prop_map(|(n, a)| Term::Func(n, a)),
            prop::collection::vec(inner, 2..4).prop_map(|a| Term::Func(String::new(), a)),
        ]
    })
}

proptest! {
    #[test]
    fn terms_round_trip(t in term()) {
        prop_assert_eq!(parse_term(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn models_round_trip(atoms in prop::collection::vec(("[a-z][a-z_]{0,5}", prop::collection::vec(term(), 0..3)), 0..8)) {
        let set: qsmodels_core::solver::AnswerSet = atoms.into_iter().map(|(p, a)| GroundAtom::new(p, a)).collect();
        for text in [
            format!("Answer: 1\n{}\nSATISFIABLE\n", set.render()),
            format!("Answer: 1\nStable Model: {}\nTrue\n", set.render()),
        ] {
            prop_assert_eq!(parse_answer_set(&text).unwrap(), SolverOutput::Model(set.clone()));
        }
    }

    #[test]
    fn snapshots_are_well_formed(seed: u64, moves in prop::collection::vec(0u8..5, 0..60)) {
        let spec = load_map(
            "#########\n#.......#\n#.##.##.#\n#.......#\n#########\n\
             waypoints: a 1 1 ; b 4 1 ; c 7 3 ; d 1 3\nedges: a b ; b c ; a d ; d c\n\
             items: h1 health b ; g2 weapon2 d\nspawn: bot a ; enemy c\n",
        )
        .unwrap();
        let mut world = WorldState::new(&spec, ArenaRules::default(), seed);
        let mut memory = None;
        let mut opp = OpponentModel::default();
        use qsmodels_core::arena::{step, Command, Direction};
        for m in moves {
            let cmd = match m {
                0 => Command::Fire,
                d => Command::MoveStep([Direction::N, Direction::E, Direction::S, Direction::W][(d - 1) as usize]),
            };
            world = step(&world, Command::Idle, cmd);
            let p = sense(&world, memory.as_ref());
            if let Some(s) = &p.enemy_visible {
                opp.observe(world.arena.nearest_waypoint(s.cell).unwrap(), world.tick);
            }
            let snap = to_fluents(&p, &opp, &world.arena, &HealthThresholds::default());
            prop_assert!(snap.check().is_ok(), "{:?}", snap.check());
            let count = |f: fn(&Fluent) -> bool| snap.fluents.iter().filter(|x| f(x)).count();
            prop_assert_eq!(count(|f| matches!(f, Fluent::At(_))), 1);
            prop_assert_eq!(count(|f| matches!(f, Fluent::HealthLevel(_))), 1);
            prop_assert!(count(|f| matches!(f, Fluent::EnemyExpected(_))) <= 1);
            prop_assert!(count(|f| matches!(f, Fluent::EnemyLastSeen(_))) <= 1);
            memory = Some(p);
        }
    }
}

#[test]
fn action_terms_round_trip_through_text() {
    let actions = [
        "attack",
        "elude(w3)",
        "move_towards(w0)",
        "pick_ammo(g2)",
        "pick_health(h1)",
    ];
    for text in actions {
        let a = PlannedAction::from_term(&parse_term(text).unwrap()).unwrap();
        assert_eq!(a.to_string(), text);
        assert_eq!(a.to_term().to_string(), text);
    }
    assert!(PlannedAction::from_term(&parse_term("jump(w1)").unwrap()).is_none());
    assert!(PlannedAction::from_term(&parse_term("elude(1)").unwrap()).is_none());
}

#[test]
fn oracle_models_survive_printing_and_parsing() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = support::graph(6, &support::shapes(6)[1].1);
    let mut checked = 0;
    for _ in 0..40 {
        let p = support::random_problem(&g, &mut rng)
            .with_horizon(3)
            .unwrap();
        if let SolveResult::Sat(m) = solve_oracle(&p) {
            let printed = format!("clingo version 5\nAnswer: 1\n{}\nSATISFIABLE\n", m.render());
            let SolverOutput::Model(back) = parse_answer_set(&printed).unwrap() else {
                panic!("unsat")
            };
            assert_eq!(back, m);
            assert_eq!(decode_plan(&back).unwrap(), decode_plan(&m).unwrap());
            checked += 1;
        }
    }
    assert!(checked > 0);
}
