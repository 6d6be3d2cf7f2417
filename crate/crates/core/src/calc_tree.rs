//! Calculation trees: in-order binary expression trees whose root is a panel
//! constant and whose every node holds an integer in `[1, 99]`.
//!
//! Skeleton shapes (parenthesizations) are enumerated in a fixed canonical
//! order, left-deep first. Operators of a skeleton are stored in in-order
//! position, so `ops[i]` is the operator written between leaf `i` and leaf
//! `i + 1`.

use std::fmt;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Smallest value any node may hold.
pub const VALUE_MIN: u8 = 1;
/// Largest value any node may hold.
pub const VALUE_MAX: u8 = 99;
/// Largest supported leaf count.
pub const MAX_LEAVES: usize = 9;
/// Restarts of a single tree before [`SampleFailure`] is reported.
pub const TREE_RETRY_BUDGET: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CalcError {
    #[error("leaf count {0} outside [1, {MAX_LEAVES}]")]
    OutOfRangeLeaves(usize),
    #[error("value {0} outside [{VALUE_MIN}, {VALUE_MAX}]")]
    OutOfRange(i64),
    #[error("{0} / {1} is not an exact integer division")]
    NonIntegerDivision(i64, i64),
    #[error("skeleton has {ops} operators for {leaves} leaves")]
    OperatorCount { ops: usize, leaves: usize },
}

/// One of the four elementary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "+")]
    Add,
    #[serde(rename = "-")]
    Sub,
    #[serde(rename = "*")]
    Mul,
    #[serde(rename = "/")]
    Div,
}

impl Op {
    /// All operators in canonical enumeration order.
    pub const ALL: [Op; 4] = [Op::Add, Op::Sub, Op::Mul, Op::Div];

    pub fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Sub => '-',
            Op::Mul => '*',
            Op::Div => '/',
        }
    }

    pub fn from_symbol(c: char) -> Option<Op> {
        match c {
            '+' => Some(Op::Add),
            '-' | '−' => Some(Op::Sub),
            '*' | '×' | 'x' => Some(Op::Mul),
            '/' | '÷' => Some(Op::Div),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Exact integer application. Division by zero and inexact division are errors;
    /// the result is not range-checked.
    pub fn apply(self, left: i64, right: i64) -> Result<i64, CalcError> {
        match self {
            Op::Add => Ok(left + right),
            Op::Sub => Ok(left - right),
            Op::Mul => Ok(left * right),
            Op::Div => {
                if right == 0 || left % right != 0 {
                    Err(CalcError::NonIntegerDivision(left, right))
                } else {
                    Ok(left / right)
                }
            }
        }
    }

    /// Application restricted to the node range; `None` when the result is not a
    /// legal node value.
    #[inline]
    pub fn apply_in_range(self, left: u8, right: u8) -> Option<u8> {
        let (l, r) = (left as u16, right as u16);
        let v = match self {
            Op::Add => l + r,
            Op::Sub => l.checked_sub(r)?,
            Op::Mul => l * r,
            Op::Div => {
                if r == 0 || l % r != 0 {
                    return None;
                }
                l / r
            }
        };
        in_range(v as i64).then_some(v as u8)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[inline]
pub fn in_range(v: i64) -> bool {
    (VALUE_MIN as i64..=VALUE_MAX as i64).contains(&v)
}

/// Shape of a binary tree over ordered leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TreeShape {
    Leaf,
    Node(Box<TreeShape>, Box<TreeShape>),
}

impl TreeShape {
    pub fn leaf_count(&self) -> usize {
        match self {
            TreeShape::Leaf => 1,
            TreeShape::Node(l, r) => l.leaf_count() + r.leaf_count(),
        }
    }

    pub fn node(left: TreeShape, right: TreeShape) -> TreeShape {
        TreeShape::Node(Box::new(left), Box::new(right))
    }

    /// Writes the shape as a fully parenthesized infix string using `leaf` for
    /// operand labels and `op` for the operator at each in-order position.
    pub fn write_infix(
        &self,
        out: &mut String,
        leaf: &mut dyn FnMut(usize) -> String,
        op: &dyn Fn(usize) -> char,
    ) {
        fn go(
            shape: &TreeShape,
            offset: usize,
            out: &mut String,
            leaf: &mut dyn FnMut(usize) -> String,
            op: &dyn Fn(usize) -> char,
        ) {
            match shape {
                TreeShape::Leaf => out.push_str(&leaf(offset)),
                TreeShape::Node(l, r) => {
                    let nl = l.leaf_count();
                    out.push('(');
                    go(l, offset, out, leaf, op);
                    out.push(op(offset + nl - 1));
                    go(r, offset + nl, out, leaf, op);
                    out.push(')');
                }
            }
        }
        go(self, 0, out, leaf, op);
    }
}

/// Catalan number `C(k)`.
pub fn catalan(k: usize) -> u64 {
    let mut c = 1u64;
    for i in 0..k as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

/// All binary tree shapes over `n` ordered leaves, left-deep first.
pub fn enumerate_skeleton_shapes(n: usize) -> Result<Vec<TreeShape>, CalcError> {
    if !(1..=MAX_LEAVES).contains(&n) {
        return Err(CalcError::OutOfRangeLeaves(n));
    }
    Ok(shapes(n).to_vec())
}

/// Cached form of [`enumerate_skeleton_shapes`]. Panics when `n` is out of range.
pub fn shapes(n: usize) -> &'static [TreeShape] {
    static CACHE: [OnceLock<Vec<TreeShape>>; MAX_LEAVES + 1] = [const { OnceLock::new() }; MAX_LEAVES + 1];
    assert!((1..=MAX_LEAVES).contains(&n), "leaf count {n} out of range");
    CACHE[n].get_or_init(|| {
        if n == 1 {
            return vec![TreeShape::Leaf];
        }
        let mut out = Vec::new();
        for left in (1..n).rev() {
            for l in shapes(left) {
                for r in shapes(n - left) {
                    out.push(TreeShape::node(l.clone(), r.clone()));
                }
            }
        }
        out
    })
}

/// Index of `shape` within `shapes(shape.leaf_count())`.
pub fn shape_index(shape: &TreeShape) -> Option<usize> {
    let n = shape.leaf_count();
    if n > MAX_LEAVES {
        return None;
    }
    shapes(n).iter().position(|s| s == shape)
}

/// Postfix program for a shape; evaluates without recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    steps: Vec<Step>,
    leaves: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Leaf(u8),
    Op(u8),
}

impl Program {
    pub fn compile(shape: &TreeShape) -> Program {
        fn go(shape: &TreeShape, offset: usize, steps: &mut Vec<Step>) {
            match shape {
                TreeShape::Leaf => steps.push(Step::Leaf(offset as u8)),
                TreeShape::Node(l, r) => {
                    let nl = l.leaf_count();
                    go(l, offset, steps);
                    go(r, offset + nl, steps);
                    steps.push(Step::Op((offset + nl - 1) as u8));
                }
            }
        }
        let mut steps = Vec::new();
        go(shape, 0, &mut steps);
        Program { steps, leaves: shape.leaf_count() }
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves
    }

    /// Evaluates with every intermediate constrained to `[1, 99]`.
    /// `leaf(i)` yields the value of operand `i`.
    #[inline]
    pub fn eval(&self, ops: &[Op], mut leaf: impl FnMut(usize) -> u8) -> Option<u8> {
        let mut stack = [0u8; MAX_LEAVES];
        let mut top = 0usize;
        for step in &self.steps {
            match *step {
                Step::Leaf(i) => {
                    stack[top] = leaf(i as usize);
                    top += 1;
                }
                Step::Op(i) => {
                    let r = stack[top - 1];
                    let l = stack[top - 2];
                    top -= 1;
                    stack[top - 1] = ops[i as usize].apply_in_range(l, r)?;
                }
            }
        }
        Some(stack[0])
    }
}

/// Cached programs, parallel to [`shapes`].
pub fn programs(n: usize) -> &'static [Program] {
    static CACHE: [OnceLock<Vec<Program>>; MAX_LEAVES + 1] = [const { OnceLock::new() }; MAX_LEAVES + 1];
    if n == 0 {
        return &[];
    }
    CACHE[n].get_or_init(|| shapes(n).iter().map(Program::compile).collect())
}

/// Solves for operand `target` so that the expression over `shape` evaluates to
/// `goal`, all other operands fixed. Every intermediate stays in `[1, 99]`.
pub fn invert_leaf(
    shape: &TreeShape,
    ops: &[Op],
    target: usize,
    goal: u8,
    leaf: &dyn Fn(usize) -> u8,
) -> Option<u8> {
    fn value(shape: &TreeShape, offset: usize, ops: &[Op], leaf: &dyn Fn(usize) -> u8) -> Option<u8> {
        match shape {
            TreeShape::Leaf => Some(leaf(offset)),
            TreeShape::Node(l, r) => {
                let nl = l.leaf_count();
                let lv = value(l, offset, ops, leaf)?;
                let rv = value(r, offset + nl, ops, leaf)?;
                ops[offset + nl - 1].apply_in_range(lv, rv)
            }
        }
    }
    fn go(
        shape: &TreeShape,
        offset: usize,
        ops: &[Op],
        target: usize,
        goal: i64,
        leaf: &dyn Fn(usize) -> u8,
    ) -> Option<u8> {
        if !in_range(goal) {
            return None;
        }
        match shape {
            TreeShape::Leaf => Some(goal as u8),
            TreeShape::Node(l, r) => {
                let nl = l.leaf_count();
                let op = ops[offset + nl - 1];
                if target < offset + nl {
                    let rv = value(r, offset + nl, ops, leaf)? as i64;
                    let need = match op {
                        Op::Add => goal - rv,
                        Op::Sub => goal + rv,
                        Op::Mul => {
                            if goal % rv != 0 {
                                return None;
                            }
                            goal / rv
                        }
                        Op::Div => goal * rv,
                    };
                    go(l, offset, ops, target, need, leaf)
                } else {
                    let lv = value(l, offset, ops, leaf)? as i64;
                    let need = match op {
                        Op::Add => goal - lv,
                        Op::Sub => lv - goal,
                        Op::Mul => {
                            if goal % lv != 0 {
                                return None;
                            }
                            goal / lv
                        }
                        Op::Div => {
                            if lv % goal != 0 {
                                return None;
                            }
                            lv / goal
                        }
                    };
                    go(r, offset + nl, ops, target, need, leaf)
                }
            }
        }
    }
    go(shape, 0, ops, target, goal as i64, leaf)
}

/// Expression skeleton: a shape plus one operator per internal node (in-order).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Skeleton {
    pub shape: TreeShape,
    pub ops: Vec<Op>,
}

impl Skeleton {
    pub fn new(shape: TreeShape, ops: Vec<Op>) -> Result<Skeleton, CalcError> {
        let leaves = shape.leaf_count();
        if ops.len() + 1 != leaves {
            return Err(CalcError::OperatorCount { ops: ops.len(), leaves });
        }
        Ok(Skeleton { shape, ops })
    }

    pub fn leaf_count(&self) -> usize {
        self.shape.leaf_count()
    }
}

impl fmt::Display for Skeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.shape.write_infix(
            &mut s,
            &mut |i| ((b'a' + i as u8) as char).to_string(),
            &|i| self.ops[i].symbol(),
        );
        f.write_str(&s)
    }
}

/// A node of an instantiated calculation tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CalcNode {
    Leaf { value: i64 },
    Op { op: Op, value: i64, left: Box<CalcNode>, right: Box<CalcNode> },
}

impl CalcNode {
    pub fn value(&self) -> i64 {
        match self {
            CalcNode::Leaf { value } | CalcNode::Op { value, .. } => *value,
        }
    }

    fn collect_leaves(&self, out: &mut Vec<i64>) {
        match self {
            CalcNode::Leaf { value } => out.push(*value),
            CalcNode::Op { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    fn leaf_count(&self) -> usize {
        match self {
            CalcNode::Leaf { .. } => 1,
            CalcNode::Op { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

/// An instantiated calculation tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CalcTree {
    pub root: CalcNode,
}

impl CalcTree {
    pub fn root_value(&self) -> i64 {
        self.root.value()
    }

    /// Leaf values in in-order.
    pub fn leaves(&self) -> Vec<i64> {
        let mut out = Vec::new();
        self.root.collect_leaves(&mut out);
        out
    }

    /// Checks every tree invariant: node ranges, exact parent-child arithmetic
    /// and leaf count.
    pub fn validate(&self) -> Result<(), CalcError> {
        fn go(node: &CalcNode) -> Result<(), CalcError> {
            if !in_range(node.value()) {
                return Err(CalcError::OutOfRange(node.value()));
            }
            if let CalcNode::Op { op, value, left, right } = node {
                go(left)?;
                go(right)?;
                let v = op.apply(left.value(), right.value())?;
                if v != *value {
                    return Err(CalcError::OutOfRange(v));
                }
            }
            Ok(())
        }
        let n = self.root.leaf_count();
        if !(1..=MAX_LEAVES).contains(&n) {
            return Err(CalcError::OutOfRangeLeaves(n));
        }
        go(&self.root)
    }
}

/// Recomputes the root from the leaves with exact arithmetic. Any inexact
/// division or intermediate outside `[1, 99]` is an error.
pub fn evaluate(tree: &CalcTree) -> Result<i64, CalcError> {
    fn go(node: &CalcNode) -> Result<i64, CalcError> {
        let v = match node {
            CalcNode::Leaf { value } => *value,
            CalcNode::Op { op, left, right, .. } => op.apply(go(left)?, go(right)?)?,
        };
        if in_range(v) {
            Ok(v)
        } else {
            Err(CalcError::OutOfRange(v))
        }
    }
    go(&tree.root)
}

/// Every `(left, right)` pair in `[1, 99]²` with `op(left, right) == parent`,
/// ordered by `left` then `right`. Empty for a parent outside the range.
pub fn decompositions(op: Op, parent: i64) -> &'static [(u8, u8)] {
    static TABLE: OnceLock<Vec<Vec<(u8, u8)>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![Vec::new(); 4 * (VALUE_MAX as usize + 1)];
        for op in Op::ALL {
            for l in VALUE_MIN..=VALUE_MAX {
                for r in VALUE_MIN..=VALUE_MAX {
                    if let Some(v) = op.apply_in_range(l, r) {
                        t[op.index() * (VALUE_MAX as usize + 1) + v as usize].push((l, r));
                    }
                }
            }
        }
        t
    });
    if !in_range(parent) {
        return &[];
    }
    &table[op.index() * (VALUE_MAX as usize + 1) + parent as usize]
}

/// Retry budget exhausted without finding a valid instantiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no valid instantiation of the skeleton for root {root} after {attempts} attempts")]
pub struct SampleFailure {
    pub root: i64,
    pub attempts: usize,
}

/// Instantiates `skeleton` with root `root_value`, sampling top-down and
/// left-to-right, each node's child pair uniform over its decompositions.
pub fn sample_values<R: Rng + ?Sized>(
    skeleton: &Skeleton,
    root_value: i64,
    rng: &mut R,
) -> Result<CalcTree, SampleFailure> {
    fn build<R: Rng + ?Sized>(
        shape: &TreeShape,
        offset: usize,
        ops: &[Op],
        value: i64,
        rng: &mut R,
    ) -> Option<CalcNode> {
        match shape {
            TreeShape::Leaf => Some(CalcNode::Leaf { value }),
            TreeShape::Node(l, r) => {
                let nl = l.leaf_count();
                let op = ops[offset + nl - 1];
                let pairs = decompositions(op, value);
                if pairs.is_empty() {
                    return None;
                }
                let (lv, rv) = pairs[rng.gen_range(0..pairs.len())];
                let left = build(l, offset, ops, lv as i64, rng)?;
                let right = build(r, offset + nl, ops, rv as i64, rng)?;
                Some(CalcNode::Op { op, value, left: Box::new(left), right: Box::new(right) })
            }
        }
    }
    let fail = SampleFailure { root: root_value, attempts: TREE_RETRY_BUDGET };
    if !in_range(root_value) {
        return Err(fail);
    }
    for _ in 0..TREE_RETRY_BUDGET {
        if let Some(root) = build(&skeleton.shape, 0, &skeleton.ops, root_value, rng) {
            return Ok(CalcTree { root });
        }
    }
    Err(fail)
}
