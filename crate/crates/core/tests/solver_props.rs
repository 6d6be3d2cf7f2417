use std::collections::HashSet;

use mns_core::aog::SpecFilter;
use mns_core::generator::{generate_problem, Problem};
use mns_core::solver::{
    check_hypothesis, enumerate_hypotheses, solve, solve_for_missing, solve_ordered, stream_len, stream_position,
    Consistency, Mode, Order, ProblemView, SolveStatus,
};

fn problems(n: u64) -> Vec<Problem> {
    (0..n).map(|s| generate_problem(s, &SpecFilter::default()).unwrap()).collect()
}

/// Panel 3 restored and placed where panel 2 was, so a rule that holds on
/// panels 1 and 3 checks as consistent.
fn completed_view(p: &Problem) -> ProblemView {
    let mut v = p.view().unwrap();
    let mut third = v.panels[2].clone();
    let masked = v.masked();
    third[masked] = Some(p.answer);
    v.panels[1] = third;
    v
}

#[test]
fn context_stream_is_subset_of_pure() {
    let mut checked = 0;
    for p in problems(400) {
        let v = p.view().unwrap();
        if stream_len(&v, Mode::Pure) > 300_000 {
            continue;
        }
        let pure: HashSet<String> = enumerate_hypotheses(&v, Mode::Pure).map(|h| h.to_string()).collect();
        let ctx: Vec<String> = enumerate_hypotheses(&v, Mode::Context).map(|h| h.to_string()).collect();
        assert!(ctx.iter().all(|h| pure.contains(h)), "{}", p.id);
        // and in the same relative order
        let positions: Vec<u64> = enumerate_hypotheses(&v, Mode::Context)
            .map(|h| stream_position(&v, Mode::Pure, &h).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        checked += 1;
        if checked == 100 {
            break;
        }
    }
    assert_eq!(checked, 100);
}

#[test]
fn stream_positions_are_indices() {
    for p in problems(60) {
        let v = p.view().unwrap();
        for mode in [Mode::Pure, Mode::Context] {
            for (i, h) in enumerate_hypotheses(&v, mode).take(2_000).enumerate() {
                assert_eq!(stream_position(&v, mode, &h), Some(i as u64));
            }
        }
    }
}

#[test]
fn context_reaches_generating_rule_no_later_than_pure() {
    for p in problems(1_000) {
        let v = p.view().unwrap();
        let ctx = stream_position(&v, Mode::Context, &p.generating_rule).expect("rule in context stream");
        let pure = stream_position(&v, Mode::Pure, &p.generating_rule).expect("rule in pure stream");
        assert!(ctx <= pure, "{}", p.id);
    }
}

#[test]
fn context_search_is_complete() {
    for p in problems(300) {
        let v = p.view().unwrap();
        let pos = stream_position(&v, Mode::Context, &p.generating_rule).unwrap();
        let r = solve(&v, Mode::Context, pos + 1).unwrap();
        assert!(matches!(r.status, SolveStatus::Solved { .. }), "{}", p.id);
        assert!(r.steps_used <= pos + 1);
    }
}

#[test]
fn solved_answers_are_sound() {
    for p in problems(500) {
        let v = p.view().unwrap();
        for mode in [Mode::Pure, Mode::Context] {
            let r = solve(&v, mode, 1_000).unwrap();
            assert!(r.steps_used <= r.budget);
            if let SolveStatus::Solved { answer, hypothesis } = r.status {
                assert!(matches!(check_hypothesis(&hypothesis, &v), Consistency::Consistent { .. }));
                let mut restored = p.clone();
                restored.answer = answer;
                assert!(
                    matches!(check_hypothesis(&hypothesis, &completed_view(&restored)), Consistency::Consistent { .. }),
                    "{} {hypothesis}",
                    p.id
                );
            }
        }
    }
}

#[test]
fn budgets_are_monotone() {
    for p in problems(300) {
        let v = p.view().unwrap();
        for mode in [Mode::Pure, Mode::Context] {
            let big = solve(&v, mode, 2_000).unwrap();
            for b in [1, 5, 10, 50, 100, 500] {
                let small = solve(&v, mode, b).unwrap();
                if small.answer().is_some() {
                    assert_eq!(small.status, big.status);
                    assert_eq!(small.steps_used, big.steps_used);
                } else {
                    assert_eq!(small.steps_used, b);
                }
            }
        }
    }
}

#[test]
fn step_accounting_matches_manual_search() {
    for p in problems(300) {
        let v = p.view().unwrap();
        for mode in [Mode::Pure, Mode::Context] {
            let budget = 1_000u64;
            let mut checks = 0u64;
            let mut found = None;
            for h in enumerate_hypotheses(&v, mode).take(budget as usize) {
                checks += 1;
                if let Consistency::Consistent { .. } = check_hypothesis(&h, &v) {
                    if let Some(x) = solve_for_missing(&h, &v) {
                        found = Some((x, h));
                        break;
                    }
                }
            }
            let r = solve(&v, mode, budget).unwrap();
            assert_eq!(r.steps_used, checks, "{}", p.id);
            match (r.status, found) {
                (SolveStatus::Solved { answer, hypothesis }, Some((x, h))) => {
                    assert_eq!((answer, hypothesis), (x, h));
                }
                (SolveStatus::Unsolved, None) => {}
                (s, f) => panic!("{}: {s:?} vs {f:?}", p.id),
            }
        }
    }
}

#[test]
fn shuffled_order_is_sound_and_seeded() {
    for p in problems(100) {
        let v = p.view().unwrap();
        let a = solve_ordered(&v, Mode::Pure, 500, Order::Shuffled(9)).unwrap();
        let b = solve_ordered(&v, Mode::Pure, 500, Order::Shuffled(9)).unwrap();
        assert_eq!(a, b);
        if let SolveStatus::Solved { hypothesis, .. } = &a.status {
            assert!(matches!(check_hypothesis(hypothesis, &v), Consistency::Consistent { .. }));
        }
    }
}
