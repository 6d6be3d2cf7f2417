use mns_core::calc_tree::{
    catalan, decompositions, enumerate_skeleton_shapes, invert_leaf, programs, sample_values, shapes, CalcNode,
    CalcTree, Op, Skeleton, TreeShape,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain recursive evaluation with range and exactness checks.
fn oracle_eval(node: &CalcNode) -> Option<i64> {
    match node {
        CalcNode::Leaf { value } => (1..=99).contains(value).then_some(*value),
        CalcNode::Op { op, left, right, .. } => {
            let (l, r) = (oracle_eval(left)?, oracle_eval(right)?);
            let v = match op {
                Op::Add => l + r,
                Op::Sub => l - r,
                Op::Mul => l * r,
                Op::Div => {
                    if l % r != 0 {
                        return None;
                    }
                    l / r
                }
            };
            (1..=99).contains(&v).then_some(v)
        }
    }
}

fn oracle_shape_eval(shape: &TreeShape, ops: &[Op], leaves: &[i64], offset: usize) -> Option<i64> {
    match shape {
        TreeShape::Leaf => Some(leaves[offset]),
        TreeShape::Node(l, r) => {
            let nl = l.leaf_count();
            let a = oracle_shape_eval(l, ops, leaves, offset)?;
            let b = oracle_shape_eval(r, ops, leaves, offset + nl)?;
            let v = match ops[offset + nl - 1] {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => (a % b == 0).then(|| a / b)?,
            };
            (1..=99).contains(&v).then_some(v)
        }
    }
}

#[test]
fn decompositions_match_brute_force() {
    for op in Op::ALL {
        for v in 1..=99i64 {
            let mut brute = Vec::new();
            for l in 1..=99i64 {
                for r in 1..=99i64 {
                    let ok = match op {
                        Op::Add => l + r == v,
                        Op::Sub => l - r == v,
                        Op::Mul => l * r == v,
                        Op::Div => l % r == 0 && l / r == v,
                    };
                    if ok {
                        brute.push((l as u8, r as u8));
                    }
                }
            }
            assert_eq!(decompositions(op, v), brute.as_slice(), "{op:?} {v}");
        }
    }
}

#[test]
fn catalan_counts() {
    let expected = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430];
    for (n, &c) in (1..=9).zip(expected.iter()) {
        assert_eq!(enumerate_skeleton_shapes(n).unwrap().len() as u64, c);
        assert_eq!(catalan(n - 1), c);
    }
    assert!(enumerate_skeleton_shapes(0).is_err());
    assert!(enumerate_skeleton_shapes(10).is_err());
}

#[test]
fn sampled_trees_evaluate_to_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ok = 0;
    for _ in 0..10_000 {
        let n = rng.gen_range(2..=6);
        let shape = shapes(n)[rng.gen_range(0..shapes(n).len())].clone();
        let ops: Vec<Op> = (0..n - 1).map(|_| Op::ALL[rng.gen_range(0..4)]).collect();
        let root = rng.gen_range(1..=99);
        let sk = Skeleton::new(shape, ops).unwrap();
        if let Ok(tree) = sample_values(&sk, root, &mut rng) {
            assert_eq!(oracle_eval(&tree.root), Some(root));
            ok += 1;
        }
    }
    assert!(ok > 5_000, "only {ok} samples succeeded");
}

fn arb_rule() -> impl Strategy<Value = (usize, usize, Vec<Op>, Vec<u8>)> {
    (2usize..=5).prop_flat_map(|n| {
        (
            Just(n),
            0..shapes(n).len(),
            prop::collection::vec(prop::sample::select(Op::ALL.to_vec()), n - 1),
            prop::collection::vec(1u8..=99, n),
        )
    })
}

proptest! {
    #[test]
    fn program_matches_oracle((n, s, ops, leaves) in arb_rule()) {
        let wide: Vec<i64> = leaves.iter().map(|&v| v as i64).collect();
        let expect = oracle_shape_eval(&shapes(n)[s], &ops, &wide, 0).map(|v| v as u8);
        prop_assert_eq!(programs(n)[s].eval(&ops, |i| leaves[i]), expect);
    }

    #[test]
    fn inversion_matches_scan((n, s, ops, leaves) in arb_rule(), target in 0usize..5, goal in 1u8..=99) {
        let target = target % n;
        let shape = &shapes(n)[s];
        let hits: Vec<u8> = (1..=99u8)
            .filter(|&x| {
                let mut l: Vec<i64> = leaves.iter().map(|&v| v as i64).collect();
                l[target] = x as i64;
                oracle_shape_eval(shape, &ops, &l, 0) == Some(goal as i64)
            })
            .collect();
        let got = invert_leaf(shape, &ops, target, goal, &|i| leaves[i]);
        match got {
            Some(x) => prop_assert!(hits.contains(&x)),
            None => prop_assert!(hits.is_empty()),
        }
    }

    #[test]
    fn validate_accepts_sampled((n, s, ops, _leaves) in arb_rule(), root in 1i64..=99, seed in any::<u64>()) {
        let sk = Skeleton::new(shapes(n)[s].clone(), ops).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Ok(tree) = sample_values(&sk, root, &mut rng) {
            prop_assert!(tree.validate().is_ok());
            prop_assert_eq!(mns_core::calc_tree::evaluate(&CalcTree { root: tree.root.clone() }), Ok(root));
        }
    }
}
