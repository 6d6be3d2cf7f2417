use std::collections::BTreeMap;

use mns_core::aog::{ConstantMode, Interpretation, InterpretationKind, LayoutAttrs, SpecFilter};
use mns_core::generator::{generate_problem, mask_answer, Panel, Problem};
use mns_core::layout::{self, groupings_for};
use mns_core::solver::{ConstantRole, Hypothesis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Evaluates an infix rule text like `((a*c)-b)` over `vals` with every
/// intermediate kept in [1, 99] and exact division.
fn eval_text(expr: &str, vals: &[i64]) -> Option<i64> {
    fn go(b: &[u8], i: &mut usize, vals: &[i64]) -> Option<i64> {
        if b[*i] == b'(' {
            *i += 1;
            let l = go(b, i, vals)?;
            let op = b[*i];
            *i += 1;
            let r = go(b, i, vals)?;
            *i += 1;
            let v = match op {
                b'+' => l + r,
                b'-' => l - r,
                b'*' => l * r,
                b'/' => (l % r == 0).then(|| l / r)?,
                _ => return None,
            };
            (1..=99).contains(&v).then_some(v)
        } else {
            let v = vals[(b[*i] - b'a') as usize];
            *i += 1;
            Some(v)
        }
    }
    go(expr.as_bytes(), &mut 0, vals)
}

fn validate(p: &Problem) -> Result<(), String> {
    let geom = layout::geometry(p.spec.problem_type, &p.spec.layout).map_err(|e| e.to_string())?;
    let order = layout::canonical_order(&geom.slots);
    let rule = &p.generating_rule;
    // the stored rule must survive the hypothesis codec
    let reparsed: Hypothesis = rule.to_string().parse().map_err(|e| format!("{e}"))?;
    if &reparsed != rule {
        return Err("rule does not round-trip".into());
    }
    let expr = rule.expr.to_string();
    let panels = p.completed_panels();
    let mut latent = None;
    for panel in &panels {
        let value_at = |pos: u8| -> Option<i64> {
            let id = order[pos as usize];
            if geom.slots[id as usize].is_center { panel.shown_constant } else { panel.values[&id] }.map(i64::from)
        };
        let target = match rule.constant {
            ConstantRole::ShownAt(pos) => {
                if !geom.slots[order[pos as usize] as usize].is_center {
                    return Err("shown constant not at center".into());
                }
                Some(value_at(pos).ok_or("missing constant")?)
            }
            ConstantRole::Latent => latent,
        };
        for group in &rule.groups {
            let vals: Vec<i64> = group.iter().map(|&pos| value_at(pos).unwrap()).collect();
            if vals.iter().any(|v| !(1..=99).contains(v)) {
                return Err("value out of range".into());
            }
            let v = eval_text(&expr, &vals).ok_or("rule fails on a group")?;
            match target.or(latent) {
                Some(t) if t != v => return Err(format!("group gives {v}, expected {t}")),
                _ => {}
            }
            if rule.constant == ConstantRole::Latent {
                latent = Some(v);
            }
        }
    }
    Ok(())
}

#[test]
fn generated_problems_pass_independent_validator() {
    for seed in 0..2_000 {
        let p = generate_problem(seed, &SpecFilter::default()).unwrap();
        validate(&p).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!((1..=99).contains(&p.answer));
        assert!(p.panels[2].values[&p.masked_slot].is_none());
    }
}

#[test]
fn analytic_groups_come_from_layout_groupings() {
    let filter = SpecFilter { interpretation: Some(InterpretationKind::Analytic), ..SpecFilter::default() };
    for seed in 0..1_000 {
        let p = generate_problem(seed, &filter).unwrap();
        let Interpretation::Analytic { parts, .. } = p.spec.algebra.interpretation else {
            panic!("seed {seed} not analytic");
        };
        assert!((2..=4).contains(&p.generating_rule.groups.len()));
        let geom = layout::geometry(p.spec.problem_type, &p.spec.layout).unwrap();
        let order = layout::canonical_order(&geom.slots);
        let mut groups: Vec<Vec<u8>> = p
            .generating_rule
            .groups
            .iter()
            .map(|g| {
                let mut s: Vec<u8> = g.iter().map(|&pos| order[pos as usize]).collect();
                s.sort_unstable();
                s
            })
            .collect();
        groups.sort();
        let known = groupings_for(p.spec.problem_type, &p.spec.layout, parts);
        assert!(known.iter().any(|g| g.parts == groups), "seed {seed}: {groups:?}");
    }
}

#[test]
fn masking_is_uniform_on_four_slots() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts = BTreeMap::new();
    for _ in 0..10_000 {
        let mut panel = Panel { values: (0..4).map(|s| (s, Some(s + 1))).collect(), shown_constant: None };
        let (slot, answer) = mask_answer(&mut panel, &mut rng).unwrap();
        assert_eq!(answer, slot + 1);
        *counts.entry(slot).or_insert(0) += 1;
    }
    for (slot, c) in counts {
        assert!((2_350..=2_650).contains(&c), "slot {slot}: {c}");
    }
}

#[test]
fn constant_modes_follow_center() {
    for seed in 0..500 {
        let p = generate_problem(seed, &SpecFilter::default()).unwrap();
        let center = layout::has_center(&p.spec.layout);
        assert_eq!(p.spec.algebra.constant_mode == ConstantMode::ShownVarying, center);
        if center {
            assert!(matches!(p.generating_rule.constant, ConstantRole::ShownAt(_)));
        }
        // the center is never masked
        assert!(!matches!(p.spec.layout, LayoutAttrs::Partition { .. }) || p.masked_slot < p.spec.layout.operand_slots());
    }
}
