use super::*;
use crate::game::Strategy;
use crate::game::Strategy::{Cooperate as C, Defect as D};
use proptest::prelude::*;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

fn rules(set: ActionSet, mobility: f64, epsilon: f64) -> Rules {
    Rules::new(
        set,
        PayoffParams::new(1.4).unwrap(),
        LearningParams::new(0.75, 0.8, epsilon).unwrap(),
        mobility,
    )
    .unwrap()
}

fn placed(side: usize, cells: &[((usize, usize), Strategy)], rules: Rules) -> World<ChaCha8Rng> {
    let placements: Vec<_> = cells
        .iter()
        .map(|&((r, c), s)| (SiteIndex::new(r, c), s))
        .collect();
    World::from_placements(side, &placements, rules, ChaCha8Rng::seed_from_u64(5)).unwrap()
}

const FOCAL: AgentId = AgentId(0);

#[test]
fn strategy_examples() {
    // focal at (2,2), two cooperating neighbours
    let mut w = placed(
        5,
        &[((2, 2), C), ((1, 2), C), ((2, 3), C)],
        rules(ActionSet::Static, 0.0, 0.0),
    );
    let o = w.act_strategy(FOCAL, D);
    assert!((o.reward - 2.8).abs() < 1e-12);
    assert_eq!(o.next_state, D);
    assert_eq!(w.agent(FOCAL).strategy, D);
    assert!((w.agent(FOCAL).last_payoff - 2.8).abs() < 1e-12);

    let mut w = placed(5, &[((2, 2), D)], rules(ActionSet::Static, 0.0, 0.0));
    assert_eq!(
        w.act_strategy(FOCAL, C),
        Outcome {
            reward: 0.0,
            next_state: C
        }
    );

    let mut w = placed(
        5,
        &[
            ((2, 2), D),
            ((1, 2), D),
            ((3, 2), D),
            ((2, 1), D),
            ((2, 3), D),
        ],
        rules(ActionSet::Static, 0.0, 0.0),
    );
    assert_eq!(
        w.act_strategy(FOCAL, C),
        Outcome {
            reward: 0.0,
            next_state: C
        }
    );
}

#[test]
fn move_never_happens_without_mobility() {
    let mut w = placed(
        5,
        &[((2, 2), C), ((1, 2), C)],
        rules(ActionSet::Mobile, 0.0, 0.0),
    );
    for _ in 0..1000 {
        assert_eq!(w.act_move(FOCAL), MoveOutcome::Skipped);
    }
    assert_eq!(w.agent(FOCAL).site, SiteIndex::new(2, 2));
    assert_eq!(w.agent(FOCAL).last_payoff, 0.0);
}

#[test]
fn move_with_single_vacancy() {
    // neighbours of (2,2): N (1,2), S (3,2), W (2,1) occupied; E (2,3) empty.
    // At (2,3) the focal will meet the cooperator at (1,3).
    let cells = [
        ((2, 2), D),
        ((1, 2), C),
        ((3, 2), C),
        ((2, 1), C),
        ((1, 3), C),
    ];
    for seed in 0..50 {
        let placements: Vec<_> = cells
            .iter()
            .map(|&((r, c), s)| (SiteIndex::new(r, c), s))
            .collect();
        let mut w = World::from_placements(
            5,
            &placements,
            rules(ActionSet::Mobile, 1.0, 0.0),
            ChaCha8Rng::seed_from_u64(seed),
        )
        .unwrap();
        let o = w.act_move(FOCAL);
        // at (2,3): N (1,3) = C, S (3,3) empty, W (2,2) now empty, E (2,4) empty
        assert_eq!(
            o,
            MoveOutcome::Moved(Outcome {
                reward: 1.4,
                next_state: D
            })
        );
        assert_eq!(w.agent(FOCAL).site, SiteIndex::new(2, 3));
        assert!(!w.lattice().is_occupied(SiteIndex::new(2, 2)));
        assert_eq!(w.agent(FOCAL).last_payoff, 1.4);
        w.audit().unwrap();
    }
}

#[test]
fn move_blocked_on_full_lattice() {
    let r = rules(ActionSet::Mobile, 1.0, 0.0);
    let mut w = World::populate(6, 1.0, InitMode::Random, r, ChaCha8Rng::seed_from_u64(3)).unwrap();
    let before: Vec<_> = w.agents().to_vec();
    for i in 0..36 {
        assert_eq!(w.act_move(AgentId(i)), MoveOutcome::Skipped);
    }
    assert_eq!(w.agents(), &before[..]);
}

#[test]
fn copy_best_examples() {
    let set = ActionSet::Best;
    let mut w = placed(5, &[((2, 2), C), ((1, 2), D)], rules(set, 0.0, 0.0));
    w.agent_mut(FOCAL).last_payoff = 2.0;
    w.agent_mut(AgentId(1)).last_payoff = 2.8;
    let o = w.act_copy_best(FOCAL);
    assert_eq!(o.next_state, D);
    assert_eq!(w.agent(FOCAL).strategy, D);
    // defector next to a defector earns nothing
    assert_eq!(o.reward, 0.0);

    let mut w = placed(5, &[((2, 2), C)], rules(set, 0.0, 0.0));
    assert_eq!(
        w.act_copy_best(FOCAL),
        Outcome {
            reward: 0.0,
            next_state: C
        }
    );

    let mut w = placed(
        5,
        &[((2, 2), C), ((1, 2), D), ((3, 2), D)],
        rules(set, 0.0, 0.0),
    );
    w.agent_mut(FOCAL).last_payoff = 1.4;
    w.agent_mut(AgentId(1)).last_payoff = 1.4;
    w.agent_mut(AgentId(2)).last_payoff = 0.5;
    for _ in 0..100 {
        assert_eq!(w.act_copy_best(FOCAL).next_state, C);
        w.agent_mut(FOCAL).last_payoff = 1.4;
    }
}

#[test]
fn copy_best_neighbour_ties_are_uniform() {
    let mut w = placed(
        5,
        &[((2, 2), D), ((1, 2), C), ((3, 2), D)],
        rules(ActionSet::Best, 0.0, 0.0),
    );
    let mut adopted_c = 0;
    let n = 20_000;
    for _ in 0..n {
        w.agent_mut(FOCAL).strategy = D;
        w.agent_mut(FOCAL).last_payoff = 0.0;
        w.agent_mut(AgentId(1)).last_payoff = 3.0;
        w.agent_mut(AgentId(2)).last_payoff = 3.0;
        if w.act_copy_best(FOCAL).next_state == C {
            adopted_c += 1;
        }
    }
    let share = adopted_c as f64 / n as f64;
    assert!((share - 0.5).abs() < 0.02, "{share}");
}

#[test]
fn persist_examples() {
    let mut w = placed(
        5,
        &[((2, 2), C), ((1, 2), D)],
        rules(ActionSet::PersistBest, 1.0, 0.0),
    );
    w.agent_mut(FOCAL).last_payoff = 3.0;
    assert_eq!(
        w.act_persist(FOCAL),
        Outcome {
            reward: 3.0,
            next_state: C
        }
    );
    assert_eq!(w.agent(FOCAL).site, SiteIndex::new(2, 2));
    assert_eq!(w.agent(FOCAL).last_payoff, 3.0);

    let mut w = placed(5, &[((2, 2), D)], rules(ActionSet::PersistBest, 1.0, 0.0));
    assert_eq!(
        w.act_persist(FOCAL),
        Outcome {
            reward: 0.0,
            next_state: D
        }
    );
}

#[test]
fn single_agent_is_always_sampled() {
    let mut w = placed(4, &[((1, 1), C)], rules(ActionSet::Static, 0.0, 0.5));
    for _ in 0..100 {
        assert_eq!(w.sample_step().agent, FOCAL);
    }
}

#[test]
fn skipped_move_leaves_agent_untouched() {
    let mut w = placed(
        5,
        &[((2, 2), C), ((1, 2), C)],
        rules(ActionSet::Mobile, 0.0, 0.0),
    );
    // make M the unique greedy choice for a cooperator
    w.agent_mut(FOCAL).qtable.set(C, ActionKind::Move, 1.0);
    let before = w.agent(FOCAL).clone();
    for _ in 0..50 {
        let r = w.step_agent(FOCAL);
        assert_eq!(r.selection.action, ActionKind::Move);
        assert_eq!(r.outcome, None);
    }
    assert_eq!(w.agent(FOCAL), &before);
}

#[test]
fn failed_move_can_learn_zero() {
    let r = rules(ActionSet::Mobile, 0.0, 0.0).with_failed_move(FailedMove::LearnZero);
    let mut w = placed(5, &[((2, 2), C), ((1, 2), C)], r);
    w.agent_mut(FOCAL).qtable.set(C, ActionKind::Move, 1.0);
    let report = w.step_agent(FOCAL);
    assert_eq!(
        report.outcome,
        Some(Outcome {
            reward: 0.0,
            next_state: C
        })
    );
    // 0.25 * 1 + 0.75 * (0 + 0.8 * 1)
    assert!((w.agent(FOCAL).qtable.get(C, ActionKind::Move) - 0.85).abs() < 1e-12);
    assert_eq!(w.agent(FOCAL).last_action, ActionKind::Move);
    assert_eq!(w.agent(FOCAL).site, SiteIndex::new(2, 2));
}

#[test]
fn step_applies_q_update_and_state() {
    let mut w = placed(
        5,
        &[((2, 2), C), ((1, 2), C), ((3, 2), C)],
        rules(ActionSet::Static, 0.0, 0.0),
    );
    w.agent_mut(FOCAL).qtable.set(C, ActionKind::Defect, 0.1);
    let r = w.step_agent(FOCAL);
    assert_eq!(r.selection.action, ActionKind::Defect);
    let a = w.agent(FOCAL);
    assert_eq!(a.strategy, D);
    assert_eq!(a.last_action, ActionKind::Defect);
    // 0.25 * 0.1 + 0.75 * (2.8 + 0.8 * max(D row = 0))
    assert!((a.qtable.get(C, ActionKind::Defect) - 2.125).abs() < 1e-12);
}

#[test]
fn persist_step_reuses_stale_payoff() {
    let mut w = placed(
        5,
        &[((2, 2), C), ((1, 2), C)],
        rules(ActionSet::PersistBest, 0.5, 0.0),
    );
    w.agent_mut(FOCAL).last_payoff = 3.0;
    w.agent_mut(FOCAL).qtable.set(C, ActionKind::Persist, 1.0);
    w.step_agent(FOCAL);
    let a = w.agent(FOCAL);
    assert_eq!(a.last_action, ActionKind::Persist);
    assert_eq!(a.last_payoff, 3.0);
    // 0.25 * 1 + 0.75 * (3 + 0.8 * 1)
    assert!((a.qtable.get(C, ActionKind::Persist) - 3.1).abs() < 1e-12);
}

#[test]
fn mcs_is_side_squared_samples() {
    let r = rules(ActionSet::Mobile, 0.3, 0.1);
    let base = World::populate(10, 0.5, InitMode::Random, r, ChaCha8Rng::seed_from_u64(8)).unwrap();
    let mut by_mcs = base.clone();
    let mut by_steps = base;
    by_mcs.mcs();
    for _ in 0..100 {
        by_steps.sample_step();
    }
    assert_eq!(by_mcs.agents(), by_steps.agents());
    assert_eq!(by_mcs.clock(), 1);
    assert_eq!(by_steps.clock(), 0);
}

#[test]
fn sampling_is_uniform_over_players() {
    let r = rules(ActionSet::Static, 0.0, 0.02);
    let mut w =
        World::populate(10, 0.5, InitMode::Random, r, ChaCha8Rng::seed_from_u64(9)).unwrap();
    let mut counts = [0u64; 50];
    let n_mcs = 2000;
    for _ in 0..n_mcs * 100 {
        counts[w.sample_step().agent.index()] += 1;
    }
    let per_mcs = counts.iter().sum::<u64>() as f64 / (n_mcs as f64 * 50.0);
    assert_eq!(per_mcs, 2.0);
    let expected = 2.0 * n_mcs as f64;
    let chi: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 49 degrees of freedom, 0.999 quantile is about 85.4
    assert!(chi < 85.4, "chi2 {chi}");
}

#[test]
fn greedy_defectors_stay_defectors() {
    let r = rules(ActionSet::Static, 0.0, 0.0);
    let mut w =
        World::populate(10, 1.0, InitMode::Random, r, ChaCha8Rng::seed_from_u64(10)).unwrap();
    for i in 0..100 {
        let a = w.agent_mut(AgentId(i));
        a.strategy = D;
        a.qtable.set(D, ActionKind::Defect, 1.0);
    }
    for _ in 0..5 {
        w.mcs();
    }
    assert!(w.agents().iter().all(|a| a.strategy == D));
}

#[test]
fn striped_initialisation() {
    let r = rules(ActionSet::Best, 0.01, 0.15);
    let w = World::populate(20, 1.0, InitMode::Striped, r, ChaCha8Rng::seed_from_u64(0)).unwrap();
    for a in w.agents() {
        let expected = if (a.site.row / 2) % 2 == 0 { C } else { D };
        assert_eq!(a.strategy, expected);
        assert_eq!(a.last_action, ActionKind::CopyBest);
    }
    let w = World::populate(5, 1.0, InitMode::Striped, r, ChaCha8Rng::seed_from_u64(0)).unwrap();
    for a in w.agents() {
        assert_eq!(a.strategy, if a.site.row % 2 == 0 { C } else { D });
    }
}

#[test]
fn initial_state() {
    let r = rules(ActionSet::Mobile, 0.1, 0.02);
    let w = World::populate(30, 0.7, InitMode::Random, r, ChaCha8Rng::seed_from_u64(12)).unwrap();
    assert_eq!(w.player_count(), 630);
    let coop = w.agents().iter().filter(|a| a.strategy == C).count();
    // fair coin, 630 draws: 4.5 sigma band
    assert!((coop as f64 - 315.0).abs() < 4.5 * 12.6, "{coop}");
    for a in w.agents() {
        assert_eq!(a.last_payoff, 0.0);
        assert_eq!(a.last_action, ActionKind::from_strategy(a.strategy));
        assert!(a.qtable.iter().all(|v| v == 0.0));
    }
    w.audit().unwrap();
}

#[test]
fn placement_errors() {
    let r = rules(ActionSet::Static, 0.0, 0.0);
    let rng = || ChaCha8Rng::seed_from_u64(0);
    assert_eq!(
        World::from_placements(4, &[], r, rng()).unwrap_err(),
        ParamError::NoPlayers
    );
    assert!(matches!(
        World::from_placements(4, &[(SiteIndex::new(4, 0), C)], r, rng()),
        Err(ParamError::SiteOutOfRange { .. })
    ));
    assert!(matches!(
        World::from_placements(
            4,
            &[(SiteIndex::new(1, 1), C), (SiteIndex::new(1, 1), D)],
            r,
            rng()
        ),
        Err(ParamError::DuplicateSite { .. })
    ));
    assert_eq!(
        Rules::new(
            ActionSet::Mobile,
            PayoffParams::new(1.4).unwrap(),
            LearningParams::new(0.5, 0.5, 0.1).unwrap(),
            1.5
        )
        .unwrap_err(),
        ParamError::Mobility(1.5)
    );
}

#[test]
fn same_seed_same_world() {
    let r = rules(ActionSet::PersistBest, 0.1, 0.15);
    let run = || {
        let mut w =
            World::populate(12, 0.6, InitMode::Random, r, ChaCha8Rng::seed_from_u64(77)).unwrap();
        for _ in 0..20 {
            w.mcs();
        }
        w.agents().to_vec()
    };
    assert_eq!(run(), run());
}

fn arb_set() -> impl proptest::strategy::Strategy<Value = ActionSet> {
    prop::sample::select(ActionSet::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_step_keeps_bijection_and_coherence(
        seed in any::<u64>(),
        set in arb_set(),
        rho in 0.1f64..=1.0,
        p_d in 0.0f64..=1.0,
        eps in 0.0f64..=1.0,
    ) {
        let r = rules(set, p_d, eps);
        let mut w = World::populate(6, rho, InitMode::Random, r, ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let n = w.player_count();
        let cap = 4.0 * 1.4;
        for _ in 0..400 {
            let report = w.sample_step();
            w.audit().unwrap();
            prop_assert_eq!(w.player_count(), n);
            prop_assert_eq!(w.lattice().player_count(), n);
            let a = w.agent(report.agent);
            if let Some(o) = report.outcome {
                prop_assert_eq!(a.strategy, o.next_state);
                prop_assert_eq!(a.last_action, report.selection.action);
            }
            prop_assert!((0.0..=cap + 1e-12).contains(&a.last_payoff));
            prop_assert!(a.qtable.iter().all(|v| v.is_finite() && v >= 0.0 && v <= cap / 0.2 + 1e-9));
        }
    }

    #[test]
    fn mobile_worlds_conserve_players(seed in any::<u64>(), rho in 0.2f64..0.9, p_d in 0.0f64..=1.0) {
        let r = rules(ActionSet::Mobile, p_d, 0.05);
        let mut w = World::populate(5, rho, InitMode::Random, r, ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let n = w.player_count();
        for _ in 0..50 {
            w.mcs();
            prop_assert_eq!(w.lattice().occupied().count(), n);
        }
        w.audit().unwrap();
    }
}
