//! Step-budgeted symbolic search over candidate rules.
//!
//! A hypothesis names the constant's role, a partition of the remaining reading
//! positions into equal groups, and one expression (shape, operators, operand
//! order) applied to every group. Checking one fully specified hypothesis
//! against the two complete panels is one search step.
//!
//! Hypotheses are visited in blocks. Blocks are ordered by group size, then
//! by number of groups (holistic first), then constant role, then grouping in
//! lexicographic order; inside a block by shape index (left-deep first),
//! operator tuple (`+ - * /` lexicographic) and operand permutation
//! (identity first). Pure search enumerates every constant role, every equal
//! partition and every operand order; context-guided search keeps only the
//! known constant role, the layout's perceptual groupings and the reading
//! order, so its stream is a subsequence of the pure stream.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::aog::{LayoutAttrs, ProblemType};
use crate::calc_tree::{self, invert_leaf, programs, shapes, Op, TreeShape, MAX_LEAVES};
use crate::layout::{self, equal_partitions, LayoutError};

/// Where the panel constant comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstantRole {
    /// One hidden constant shared by every panel.
    Latent,
    /// The value displayed at this reading position.
    ShownAt(u8),
}

impl fmt::Display for ConstantRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantRole::Latent => f.write_str("latent"),
            ConstantRole::ShownAt(p) => write!(f, "shown@{p}"),
        }
    }
}

impl FromStr for ConstantRole {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "latent" {
            return Ok(ConstantRole::Latent);
        }
        s.strip_prefix("shown@")
            .and_then(|p| p.parse().ok())
            .map(ConstantRole::ShownAt)
            .ok_or_else(|| CodecError(format!("bad constant role `{s}`")))
    }
}

/// Expression applied to each group. Operand `i` of the expression is the
/// group member at index `perm[i]` (members sorted by reading position).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupExpr {
    pub shape: usize,
    pub ops: Vec<Op>,
    pub perm: Vec<u8>,
}

impl GroupExpr {
    pub fn leaf_count(&self) -> usize {
        self.perm.len()
    }

    pub fn tree_shape(&self) -> &'static TreeShape {
        &shapes(self.leaf_count())[self.shape]
    }

    pub fn identity(shape: usize, ops: Vec<Op>) -> GroupExpr {
        let n = ops.len() + 1;
        GroupExpr { shape, ops, perm: (0..n as u8).collect() }
    }
}

impl fmt::Display for GroupExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.tree_shape().write_infix(
            &mut s,
            &mut |i| ((b'a' + self.perm[i]) as char).to_string(),
            &|i| self.ops[i].symbol(),
        );
        f.write_str(&s)
    }
}

impl FromStr for GroupExpr {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        fn parse(chars: &[char], pos: &mut usize, perm: &mut Vec<u8>, ops: &mut Vec<Op>) -> Result<TreeShape, CodecError> {
            let err = |m: &str, at: usize| CodecError(format!("{m} at offset {at}"));
            match chars.get(*pos) {
                Some('(') => {
                    *pos += 1;
                    let left = parse(chars, pos, perm, ops)?;
                    let op = chars.get(*pos).and_then(|&c| Op::from_symbol(c)).ok_or_else(|| err("expected operator", *pos))?;
                    *pos += 1;
                    // the operator's in-order slot is fixed by the left subtree's leaves
                    let slot = perm.len() - 1;
                    if ops.len() <= slot {
                        ops.resize(slot + 1, Op::Add);
                    }
                    ops[slot] = op;
                    let right = parse(chars, pos, perm, ops)?;
                    if chars.get(*pos) != Some(&')') {
                        return Err(err("expected `)`", *pos));
                    }
                    *pos += 1;
                    Ok(TreeShape::node(left, right))
                }
                Some(&c) if c.is_ascii_lowercase() => {
                    *pos += 1;
                    perm.push(c as u8 - b'a');
                    Ok(TreeShape::Leaf)
                }
                _ => Err(err("expected `(` or operand", *pos)),
            }
        }
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (mut pos, mut perm, mut ops) = (0usize, Vec::new(), Vec::new());
        let shape = parse(&chars, &mut pos, &mut perm, &mut ops)?;
        if pos != chars.len() {
            return Err(CodecError(format!("trailing input in `{s}`")));
        }
        let n = perm.len();
        if n > MAX_LEAVES {
            return Err(CodecError(format!("too many operands in `{s}`")));
        }
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        if sorted != (0..n as u8).collect::<Vec<_>>() {
            return Err(CodecError(format!("operands of `{s}` are not a permutation")));
        }
        let shape = calc_tree::shape_index(&shape).expect("parsed shapes are enumerable");
        Ok(GroupExpr { shape, ops, perm })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("hypothesis codec: {0}")]
pub struct CodecError(pub String);

/// A fully specified candidate rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    pub constant: ConstantRole,
    /// Reading positions per group, each ascending, ordered by first element.
    pub groups: Vec<Vec<u8>>,
    pub expr: GroupExpr,
}

impl Hypothesis {
    pub fn is_holistic(&self) -> bool {
        self.groups.len() == 1
    }

    /// Checks the structural invariants for a view with `n` positions.
    pub fn is_well_formed(&self, n: usize) -> bool {
        let g = self.expr.leaf_count();
        if g < 2 || self.expr.ops.len() + 1 != g || self.expr.shape >= shapes(g).len() {
            return false;
        }
        if self.groups.is_empty() || self.groups.len() > 4 || self.groups.iter().any(|p| p.len() != g) {
            return false;
        }
        let mut seen = vec![false; n];
        if let ConstantRole::ShownAt(p) = self.constant {
            match seen.get_mut(p as usize) {
                Some(s) => *s = true,
                None => return false,
            }
        }
        for &p in self.groups.iter().flatten() {
            match seen.get_mut(p as usize) {
                Some(s) if !*s => *s = true,
                _ => return false,
            }
        }
        seen.iter().all(|&s| s) && self.groups.iter().all(|p| p.windows(2).all(|w| w[0] < w[1]))
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.constant)?;
        for g in &self.groups {
            let items: Vec<String> = g.iter().map(|p| p.to_string()).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        write!(f, " {}", self.expr)
    }
}

impl FromStr for Hypothesis {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split_whitespace();
        let (Some(c), Some(g), Some(e), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(CodecError(format!("expected `<constant> <groups> <expr>`, got `{s}`")));
        };
        let constant = c.parse()?;
        let groups = g
            .strip_prefix('{')
            .and_then(|g| g.strip_suffix('}'))
            .ok_or_else(|| CodecError(format!("bad groups `{g}`")))?
            .split("}{")
            .map(|grp| {
                grp.split(',')
                    .map(|p| p.parse::<u8>().map_err(|_| CodecError(format!("bad position `{p}`"))))
                    .collect::<Result<Vec<u8>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Hypothesis { constant, groups, expr: e.parse()? })
    }
}

impl Serialize for Hypothesis {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Hypothesis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Layout knowledge available to context-guided search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutContext {
    pub problem_type: ProblemType,
    pub layout: LayoutAttrs,
    /// Slot id at each reading position.
    pub order: Vec<u8>,
    /// Reading position of the center slot.
    pub center: Option<u8>,
    /// Perceptual groupings in reading positions, keyed by part count.
    pub groupings: Vec<(u8, Vec<Vec<Vec<u8>>>)>,
}

/// What a solver sees of one problem: integers by reading position (panel 3
/// has exactly one unknown) plus layout context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemView {
    pub panels: [Vec<Option<u8>>; 3],
    pub context: LayoutContext,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("panel values do not match the layout's slots")]
    SlotMismatch,
    #[error("panel 3 must have exactly one unknown and panels 1-2 none")]
    MaskMismatch,
    #[error("a view needs at least two integers per panel")]
    TooFewIntegers,
    #[error("step budget must be at least 1")]
    ZeroBudget,
}

impl ProblemView {
    /// Builds a view from per-slot values (indexed by slot id, center included).
    pub fn build(
        ptype: ProblemType,
        layout_attrs: &LayoutAttrs,
        by_slot: &[Vec<Option<u8>>; 3],
    ) -> Result<ProblemView, SolveError> {
        let geom = layout::geometry(ptype, layout_attrs)?;
        let n = geom.slots.len();
        if by_slot.iter().any(|p| p.len() != n) {
            return Err(SolveError::SlotMismatch);
        }
        if n < 2 {
            return Err(SolveError::TooFewIntegers);
        }
        let order = layout::canonical_order(&geom.slots);
        let mut position = vec![0u8; n];
        for (pos, &id) in order.iter().enumerate() {
            position[id as usize] = pos as u8;
        }
        let panels = [0, 1, 2].map(|k| order.iter().map(|&id| by_slot[k][id as usize]).collect::<Vec<_>>());
        let unknown = |p: &Vec<Option<u8>>| p.iter().filter(|v| v.is_none()).count();
        if unknown(&panels[0]) != 0 || unknown(&panels[1]) != 0 || unknown(&panels[2]) != 1 {
            return Err(SolveError::MaskMismatch);
        }
        let center = geom.center().map(|s| position[s.id as usize]);
        let groupings = (2..=4u8)
            .map(|k| {
                let mut list: Vec<Vec<Vec<u8>>> = layout::groupings_of(&geom, k)
                    .into_iter()
                    .map(|g| {
                        let mut parts: Vec<Vec<u8>> = g
                            .parts
                            .iter()
                            .map(|p| {
                                let mut q: Vec<u8> = p.iter().map(|&id| position[id as usize]).collect();
                                q.sort_unstable();
                                q
                            })
                            .collect();
                        parts.sort();
                        parts
                    })
                    .collect();
                list.sort();
                (k, list)
            })
            .collect();
        Ok(ProblemView {
            panels,
            context: LayoutContext { problem_type: ptype, layout: *layout_attrs, order, center, groupings },
        })
    }

    pub fn positions(&self) -> usize {
        self.panels[0].len()
    }

    /// Reading position of the unknown in panel 3.
    pub fn masked(&self) -> usize {
        self.panels[2].iter().position(|v| v.is_none()).expect("validated on construction")
    }

    fn context_groupings(&self, k: u8) -> &[Vec<Vec<u8>>] {
        self.context.groupings.iter().find(|(p, _)| *p == k).map(|(_, g)| g.as_slice()).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pure,
    Context,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Pure => "pure",
            Mode::Context => "context",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "pure" => Some(Mode::Pure),
            "context" | "context-guided" => Some(Mode::Context),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Block visiting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    Canonical,
    /// Blocks shuffled with a seeded generator; for robustness studies.
    Shuffled(u64),
}

/// All `n!` permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> &'static [Vec<u8>] {
    static CACHE: [OnceLock<Vec<Vec<u8>>>; MAX_LEAVES + 1] = [const { OnceLock::new() }; MAX_LEAVES + 1];
    CACHE[n].get_or_init(|| {
        let mut out = Vec::new();
        let mut cur: Vec<u8> = (0..n as u8).collect();
        loop {
            out.push(cur.clone());
            // next lexicographic permutation
            let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
            let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    })
}

fn permutation_rank(perm: &[u8]) -> u64 {
    let n = perm.len();
    let mut rank = 0u64;
    for i in 0..n {
        let smaller = perm[i + 1..].iter().filter(|&&v| v < perm[i]).count() as u64;
        rank = rank * (n - i) as u64 + smaller;
    }
    rank
}

fn pow4(e: usize) -> u64 {
    4u64.pow(e as u32)
}

fn ops_from_index(mut idx: u64, count: usize, out: &mut Vec<Op>) {
    out.clear();
    out.resize(count, Op::Add);
    for slot in (0..count).rev() {
        out[slot] = Op::ALL[(idx % 4) as usize];
        idx /= 4;
    }
}

fn ops_index(ops: &[Op]) -> u64 {
    ops.iter().fold(0, |acc, op| acc * 4 + op.index() as u64)
}

/// One (constant role, grouping) pair; expands to shape × operators × orders.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Block {
    constant: ConstantRole,
    groups: Vec<Vec<u8>>,
    leaves: usize,
    all_orders: bool,
}

impl Block {
    fn orders(&self) -> u64 {
        if self.all_orders {
            permutations(self.leaves).len() as u64
        } else {
            1
        }
    }

    fn size(&self) -> u64 {
        shapes(self.leaves).len() as u64 * pow4(self.leaves - 1) * self.orders()
    }

    fn hypothesis(&self, inner: u64) -> Hypothesis {
        let orders = self.orders();
        let perm_idx = inner % orders;
        let rest = inner / orders;
        let ops_count = pow4(self.leaves - 1);
        let mut ops = Vec::new();
        ops_from_index(rest % ops_count, self.leaves - 1, &mut ops);
        Hypothesis {
            constant: self.constant,
            groups: self.groups.clone(),
            expr: GroupExpr {
                shape: (rest / ops_count) as usize,
                ops,
                perm: permutations(self.leaves)[perm_idx as usize].clone(),
            },
        }
    }
}

fn blocks(view: &ProblemView, mode: Mode, order: Order) -> Vec<Block> {
    let n = view.positions();
    let roles: Vec<ConstantRole> = match mode {
        Mode::Pure => std::iter::once(ConstantRole::Latent)
            .chain((0..n as u8).map(ConstantRole::ShownAt))
            .collect(),
        Mode::Context => vec![view.context.center.map_or(ConstantRole::Latent, ConstantRole::ShownAt)],
    };
    let mut out = Vec::new();
    for g in 2..=n.min(MAX_LEAVES) {
        for k in 1..=4usize {
            for &role in &roles {
                let operands: Vec<u8> = (0..n as u8).filter(|&p| role != ConstantRole::ShownAt(p)).collect();
                if operands.len() != g * k {
                    continue;
                }
                let groupings: Vec<Vec<Vec<u8>>> = if k == 1 {
                    vec![vec![operands]]
                } else {
                    match mode {
                        Mode::Pure => equal_partitions(&operands, k),
                        Mode::Context => view.context_groupings(k as u8).to_vec(),
                    }
                };
                for groups in groupings {
                    out.push(Block { constant: role, groups, leaves: g, all_orders: mode == Mode::Pure });
                }
            }
        }
    }
    if let Order::Shuffled(seed) = order {
        out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    out
}

/// Deterministic, exhaustive stream of hypotheses for the view.
pub struct HypothesisStream {
    blocks: Vec<Block>,
    block: usize,
    inner: u64,
}

impl Iterator for HypothesisStream {
    type Item = Hypothesis;

    fn next(&mut self) -> Option<Hypothesis> {
        loop {
            let b = self.blocks.get(self.block)?;
            if self.inner < b.size() {
                let h = b.hypothesis(self.inner);
                self.inner += 1;
                return Some(h);
            }
            self.block += 1;
            self.inner = 0;
        }
    }
}

pub fn enumerate_hypotheses(view: &ProblemView, mode: Mode) -> HypothesisStream {
    enumerate_hypotheses_ordered(view, mode, Order::Canonical)
}

pub fn enumerate_hypotheses_ordered(view: &ProblemView, mode: Mode, order: Order) -> HypothesisStream {
    HypothesisStream { blocks: blocks(view, mode, order), block: 0, inner: 0 }
}

/// Total length of the stream.
pub fn stream_len(view: &ProblemView, mode: Mode) -> u64 {
    blocks(view, mode, Order::Canonical).iter().map(Block::size).sum()
}

/// Zero-based index of `h` in the canonical stream, if it occurs.
pub fn stream_position(view: &ProblemView, mode: Mode, h: &Hypothesis) -> Option<u64> {
    let g = h.expr.leaf_count();
    let mut offset = 0u64;
    for b in blocks(view, mode, Order::Canonical) {
        if b.leaves == g && b.constant == h.constant && b.groups == h.groups {
            let perm = if b.all_orders {
                permutation_rank(&h.expr.perm)
            } else if h.expr.perm.iter().enumerate().all(|(i, &p)| p as usize == i) {
                0
            } else {
                return None;
            };
            let inner = (h.expr.shape as u64 * pow4(g - 1) + ops_index(&h.expr.ops)) * b.orders() + perm;
            return Some(offset + inner);
        }
        offset += b.size();
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consistency {
    /// Holds on panels 1 and 2; `latent` carries the shared constant for
    /// latent hypotheses.
    Consistent { latent: Option<u8> },
    Inconsistent,
}

/// Evaluates one hypothesis against one panel. Returns the common group value
/// when every group evaluates to the same in-range integer that also matches
/// the shown constant (if any).
fn panel_value(
    panel: &[Option<u8>],
    constant: ConstantRole,
    groups: &[Vec<u8>],
    program: &calc_tree::Program,
    ops: &[Op],
    perm: &[u8],
) -> Option<u8> {
    let mut common = match constant {
        ConstantRole::Latent => None,
        ConstantRole::ShownAt(p) => Some(panel[p as usize]?),
    };
    for group in groups {
        let v = program.eval(ops, |i| panel[group[perm[i] as usize] as usize].unwrap_or(0))?;
        match common {
            Some(c) if c != v => return None,
            _ => common = Some(v),
        }
    }
    common
}

fn check_parts(
    view: &ProblemView,
    constant: ConstantRole,
    groups: &[Vec<u8>],
    program: &calc_tree::Program,
    ops: &[Op],
    perm: &[u8],
) -> Consistency {
    let Some(first) = panel_value(&view.panels[0], constant, groups, program, ops, perm) else {
        return Consistency::Inconsistent;
    };
    let Some(second) = panel_value(&view.panels[1], constant, groups, program, ops, perm) else {
        return Consistency::Inconsistent;
    };
    match constant {
        ConstantRole::Latent if first == second => Consistency::Consistent { latent: Some(first) },
        ConstantRole::Latent => Consistency::Inconsistent,
        ConstantRole::ShownAt(_) => Consistency::Consistent { latent: None },
    }
}

/// Exact check of `h` on panels 1 and 2. One call is one search step.
pub fn check_hypothesis(h: &Hypothesis, view: &ProblemView) -> Consistency {
    if !h.is_well_formed(view.positions()) {
        return Consistency::Inconsistent;
    }
    let program = &programs(h.expr.leaf_count())[h.expr.shape];
    check_parts(view, h.constant, &h.groups, program, &h.expr.ops, &h.expr.perm)
}

fn missing_value(
    view: &ProblemView,
    constant: ConstantRole,
    latent: Option<u8>,
    groups: &[Vec<u8>],
    expr_shape: &TreeShape,
    program: &calc_tree::Program,
    ops: &[Op],
    perm: &[u8],
) -> Option<u8> {
    let panel = &view.panels[2];
    let masked = view.masked() as u8;
    let target = match constant {
        ConstantRole::Latent => latent?,
        ConstantRole::ShownAt(p) if p == masked => {
            // the unknown is the constant itself
            return panel_value(panel, ConstantRole::Latent, groups, program, ops, perm);
        }
        ConstantRole::ShownAt(p) => panel[p as usize]?,
    };
    let mut answer = None;
    for group in groups {
        match group.iter().position(|&p| p == masked) {
            None => {
                if program.eval(ops, |i| panel[group[perm[i] as usize] as usize].unwrap_or(0))? != target {
                    return None;
                }
            }
            Some(member) => {
                let leaf = perm.iter().position(|&m| m as usize == member)?;
                let value = |i: usize| panel[group[perm[i] as usize] as usize].unwrap_or(0);
                let x = invert_leaf(expr_shape, ops, leaf, target, &value)?;
                let check = program.eval(ops, |i| if i == leaf { x } else { value(i) });
                if check != Some(target) {
                    return None;
                }
                answer = Some(x);
            }
        }
    }
    answer
}

/// Applies a hypothesis that holds on panels 1-2 to panel 3 and returns the
/// unique value for the unknown, or `None` when no value in `[1, 99]` works.
pub fn solve_for_missing(h: &Hypothesis, view: &ProblemView) -> Option<u8> {
    let latent = match check_hypothesis(h, view) {
        Consistency::Consistent { latent } => latent,
        Consistency::Inconsistent => return None,
    };
    let g = h.expr.leaf_count();
    missing_value(
        view,
        h.constant,
        latent,
        &h.groups,
        &shapes(g)[h.expr.shape],
        &programs(g)[h.expr.shape],
        &h.expr.ops,
        &h.expr.perm,
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    Solved { answer: u8, hypothesis: Hypothesis },
    Unsolved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub steps_used: u64,
    pub budget: u64,
}

impl SolveResult {
    pub fn answer(&self) -> Option<u8> {
        match &self.status {
            SolveStatus::Solved { answer, .. } => Some(*answer),
            SolveStatus::Unsolved => None,
        }
    }
}

/// Searches the canonical stream until a hypothesis holds on panels 1-2 and
/// yields a value for panel 3, or the budget runs out.
pub fn solve(view: &ProblemView, mode: Mode, max_steps: u64) -> Result<SolveResult, SolveError> {
    solve_ordered(view, mode, max_steps, Order::Canonical)
}

pub fn solve_ordered(
    view: &ProblemView,
    mode: Mode,
    max_steps: u64,
    order: Order,
) -> Result<SolveResult, SolveError> {
    if max_steps == 0 {
        return Err(SolveError::ZeroBudget);
    }
    if view.positions() < 2 {
        return Err(SolveError::TooFewIntegers);
    }
    let mut steps = 0u64;
    let mut ops = Vec::with_capacity(MAX_LEAVES);
    for block in blocks(view, mode, order) {
        let g = block.leaves;
        let op_count = pow4(g - 1);
        let perms: &[Vec<u8>] = if block.all_orders { permutations(g) } else { &permutations(g)[..1] };
        for (si, program) in programs(g).iter().enumerate() {
            for oi in 0..op_count {
                ops_from_index(oi, g - 1, &mut ops);
                for perm in perms {
                    if steps == max_steps {
                        return Ok(SolveResult { status: SolveStatus::Unsolved, steps_used: steps, budget: max_steps });
                    }
                    steps += 1;
                    let Consistency::Consistent { latent } =
                        check_parts(view, block.constant, &block.groups, program, &ops, perm)
                    else {
                        continue;
                    };
                    let shape = &shapes(g)[si];
                    if let Some(answer) =
                        missing_value(view, block.constant, latent, &block.groups, shape, program, &ops, perm)
                    {
                        let hypothesis = Hypothesis {
                            constant: block.constant,
                            groups: block.groups.clone(),
                            expr: GroupExpr { shape: si, ops: ops.clone(), perm: perm.clone() },
                        };
                        return Ok(SolveResult {
                            status: SolveStatus::Solved { answer, hypothesis },
                            steps_used: steps,
                            budget: max_steps,
                        });
                    }
                }
            }
        }
    }
    Ok(SolveResult { status: SolveStatus::Unsolved, steps_used: steps, budget: max_steps })
}
