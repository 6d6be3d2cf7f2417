//! And-Or graph over problem attributes.
//!
//! The root Or-node picks a problem type; each type is an And-node over a
//! layout component (shape, type-specific second attribute) and an algebra
//! component (interpretation, operators, constant mode). Sampling walks the
//! Or-nodes in a fixed order and picks uniformly among the children that still
//! admit at least one complete, valid assignment.

use std::fmt;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calc_tree::Op;
use crate::layout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemType {
    Combination,
    Composition,
    Partition,
}

impl ProblemType {
    pub const ALL: [ProblemType; 3] =
        [ProblemType::Combination, ProblemType::Composition, ProblemType::Partition];

    pub fn name(self) -> &'static str {
        match self {
            ProblemType::Combination => "combination",
            ProblemType::Composition => "composition",
            ProblemType::Partition => "partition",
        }
    }

    pub fn parse(s: &str) -> Option<ProblemType> {
        ProblemType::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for ProblemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Triangle,
    Square,
    Circle,
    Hexagon,
    Rectangle,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 5] = [
        ShapeKind::Triangle,
        ShapeKind::Square,
        ShapeKind::Circle,
        ShapeKind::Hexagon,
        ShapeKind::Rectangle,
    ];
}

/// Spatial relation joining the figures of a combination problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Overlap,
    Include,
    TangentTriple,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::Overlap, Relation::Include, Relation::TangentTriple];

    /// Number of figures the relation joins.
    pub fn figure_count(self) -> usize {
        match self {
            Relation::Overlap | Relation::Include => 2,
            Relation::TangentTriple => 3,
        }
    }

    /// Legal number-slot counts.
    pub fn slot_options(self) -> &'static [u8] {
        match self {
            Relation::Overlap | Relation::Include => &[2, 4],
            Relation::TangentTriple => &[3],
        }
    }
}

/// Outline traced by the small figures of a composition problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arrangement {
    Line,
    Cross,
    Triangle,
    Square,
    Circle,
}

impl Arrangement {
    pub const ALL: [Arrangement; 5] = [
        Arrangement::Line,
        Arrangement::Cross,
        Arrangement::Triangle,
        Arrangement::Square,
        Arrangement::Circle,
    ];

    /// Legal non-center slot counts.
    pub fn slot_options(self) -> &'static [u8] {
        match self {
            Arrangement::Line | Arrangement::Cross => &[4],
            Arrangement::Triangle => &[6],
            Arrangement::Square => &[8],
            Arrangement::Circle => &[6, 8],
        }
    }
}

pub const PART_COUNT_MIN: u8 = 2;
pub const PART_COUNT_MAX: u8 = 8;

/// Layout component of a problem. `slots` counts non-center number slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LayoutAttrs {
    Combination { shape: ShapeKind, relation: Relation, slots: u8 },
    Composition { shape: ShapeKind, arrangement: Arrangement, slots: u8 },
    Partition { shape: ShapeKind, part_count: u8 },
}

impl LayoutAttrs {
    pub fn problem_type(&self) -> ProblemType {
        match self {
            LayoutAttrs::Combination { .. } => ProblemType::Combination,
            LayoutAttrs::Composition { .. } => ProblemType::Composition,
            LayoutAttrs::Partition { .. } => ProblemType::Partition,
        }
    }

    pub fn shape(&self) -> ShapeKind {
        match *self {
            LayoutAttrs::Combination { shape, .. }
            | LayoutAttrs::Composition { shape, .. }
            | LayoutAttrs::Partition { shape, .. } => shape,
        }
    }

    pub fn second(&self) -> SecondAttr {
        match *self {
            LayoutAttrs::Combination { relation, .. } => SecondAttr::Relation(relation),
            LayoutAttrs::Composition { arrangement, .. } => SecondAttr::Arrangement(arrangement),
            LayoutAttrs::Partition { part_count, .. } => SecondAttr::PartCount(part_count),
        }
    }

    /// Non-center number slots.
    pub fn operand_slots(&self) -> u8 {
        match *self {
            LayoutAttrs::Combination { slots, .. } | LayoutAttrs::Composition { slots, .. } => slots,
            LayoutAttrs::Partition { part_count, .. } => part_count,
        }
    }
}

/// Value of the type-specific second layout attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondAttr {
    Relation(Relation),
    Arrangement(Arrangement),
    PartCount(u8),
}

impl SecondAttr {
    pub fn slot_options(&self) -> Vec<u8> {
        match *self {
            SecondAttr::Relation(r) => r.slot_options().to_vec(),
            SecondAttr::Arrangement(a) => a.slot_options().to_vec(),
            SecondAttr::PartCount(p) => vec![p],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpretationKind {
    Holistic,
    Analytic,
}

impl InterpretationKind {
    pub const ALL: [InterpretationKind; 2] = [InterpretationKind::Holistic, InterpretationKind::Analytic];

    pub fn name(self) -> &'static str {
        match self {
            InterpretationKind::Holistic => "holistic",
            InterpretationKind::Analytic => "analytic",
        }
    }

    pub fn parse(s: &str) -> Option<InterpretationKind> {
        InterpretationKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for InterpretationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Interpretation {
    Holistic,
    /// `grouping_id` indexes `layout::groupings_for(.., parts)`.
    Analytic { parts: u8, grouping_id: u8 },
}

impl Interpretation {
    pub fn kind(&self) -> InterpretationKind {
        match self {
            Interpretation::Holistic => InterpretationKind::Holistic,
            Interpretation::Analytic { .. } => InterpretationKind::Analytic,
        }
    }

    pub fn parts(&self) -> u8 {
        match self {
            Interpretation::Holistic => 1,
            Interpretation::Analytic { parts, .. } => *parts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    /// A per-panel constant is displayed at the layout center.
    ShownVarying,
    /// One latent constant is shared by every panel.
    HiddenFixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraAttrs {
    pub interpretation: Interpretation,
    pub operator_domain: Vec<Op>,
    pub constant_mode: ConstantMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub problem_type: ProblemType,
    pub layout: LayoutAttrs,
    pub algebra: AlgebraAttrs,
    pub seed: u64,
}

impl ProblemSpec {
    /// Integers displayed per panel, the center constant included.
    pub fn integer_count(&self) -> usize {
        self.layout.operand_slots() as usize
            + usize::from(self.algebra.constant_mode == ConstantMode::ShownVarying)
    }
}

/// Finite domain of every Or-node under one problem-type And-node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DomainTable {
    pub problem_type: ProblemType,
    pub shapes: Vec<ShapeKind>,
    pub second: Vec<SecondAttr>,
    pub interpretations: Vec<InterpretationKind>,
    pub analytic_parts: Vec<u8>,
    pub operators: Vec<Op>,
    pub constant_modes: Vec<ConstantMode>,
}

impl DomainTable {
    pub fn relations(&self) -> Vec<Relation> {
        self.second
            .iter()
            .filter_map(|s| match s {
                SecondAttr::Relation(r) => Some(*r),
                _ => None,
            })
            .collect()
    }

    pub fn arrangements(&self) -> Vec<Arrangement> {
        self.second
            .iter()
            .filter_map(|s| match s {
                SecondAttr::Arrangement(a) => Some(*a),
                _ => None,
            })
            .collect()
    }

    pub fn part_counts(&self) -> Vec<u8> {
        self.second
            .iter()
            .filter_map(|s| match s {
                SecondAttr::PartCount(p) => Some(*p),
                _ => None,
            })
            .collect()
    }
}

pub fn attribute_domains(ptype: ProblemType) -> DomainTable {
    let second = match ptype {
        ProblemType::Combination => Relation::ALL.map(SecondAttr::Relation).to_vec(),
        ProblemType::Composition => Arrangement::ALL.map(SecondAttr::Arrangement).to_vec(),
        ProblemType::Partition => {
            (PART_COUNT_MIN..=PART_COUNT_MAX).map(SecondAttr::PartCount).collect()
        }
    };
    DomainTable {
        problem_type: ptype,
        shapes: ShapeKind::ALL.to_vec(),
        second,
        interpretations: InterpretationKind::ALL.to_vec(),
        analytic_parts: vec![2, 3, 4],
        operators: Op::ALL.to_vec(),
        constant_modes: vec![ConstantMode::ShownVarying, ConstantMode::HiddenFixed],
    }
}

/// Optional constraints applied while sampling.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecFilter {
    pub problem_type: Option<ProblemType>,
    pub interpretation: Option<InterpretationKind>,
    pub parts: Option<u8>,
    pub shape: Option<ShapeKind>,
    pub part_count: Option<u8>,
    /// Integers per panel, center included.
    pub integer_count: Option<u8>,
}

impl SpecFilter {
    pub fn of_type(ptype: ProblemType) -> SpecFilter {
        SpecFilter { problem_type: Some(ptype), ..SpecFilter::default() }
    }

    pub fn admits(&self, spec: &ProblemSpec) -> bool {
        let layout_parts = match spec.layout {
            LayoutAttrs::Partition { part_count, .. } => Some(part_count),
            _ => None,
        };
        self.problem_type.is_none_or(|t| t == spec.problem_type)
            && self.interpretation.is_none_or(|k| k == spec.algebra.interpretation.kind())
            && self.parts.is_none_or(|p| {
                matches!(spec.algebra.interpretation, Interpretation::Analytic { parts, .. } if parts == p)
            })
            && self.shape.is_none_or(|s| s == spec.layout.shape())
            && self.part_count.is_none_or(|p| layout_parts == Some(p))
            && self.integer_count.is_none_or(|n| n as usize == spec.integer_count())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AogError {
    #[error("filter admits no valid attribute assignment: {0:?}")]
    UnsatisfiableFilter(SpecFilter),
}

/// Every valid joint assignment, in domain order, with `seed` zeroed.
pub fn all_assignments() -> &'static [ProblemSpec] {
    static ALL: OnceLock<Vec<ProblemSpec>> = OnceLock::new();
    ALL.get_or_init(|| {
        let mut out = Vec::new();
        for ptype in ProblemType::ALL {
            let domains = attribute_domains(ptype);
            for &shape in &domains.shapes {
                for second in &domains.second {
                    for slots in second.slot_options() {
                        let layout = match *second {
                            SecondAttr::Relation(relation) => {
                                LayoutAttrs::Combination { shape, relation, slots }
                            }
                            SecondAttr::Arrangement(arrangement) => {
                                LayoutAttrs::Composition { shape, arrangement, slots }
                            }
                            SecondAttr::PartCount(part_count) => {
                                LayoutAttrs::Partition { shape, part_count }
                            }
                        };
                        let constant_mode = layout::center_mode_for(ptype, &layout);
                        let mut interps = vec![Interpretation::Holistic];
                        for &parts in &domains.analytic_parts {
                            let n = layout::groupings_for(ptype, &layout, parts).len();
                            for gid in 0..n {
                                interps.push(Interpretation::Analytic { parts, grouping_id: gid as u8 });
                            }
                        }
                        for interpretation in interps {
                            out.push(ProblemSpec {
                                problem_type: ptype,
                                layout,
                                algebra: AlgebraAttrs {
                                    interpretation,
                                    operator_domain: Op::ALL.to_vec(),
                                    constant_mode,
                                },
                                seed: 0,
                            });
                        }
                    }
                }
            }
        }
        out
    })
}

/// Samples one path through the graph. Deterministic in `(seed, filter)`.
pub fn sample_problem_spec(seed: u64, filter: &SpecFilter) -> Result<ProblemSpec, AogError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<&ProblemSpec> =
        all_assignments().iter().filter(|s| filter.admits(s)).collect();
    if candidates.is_empty() {
        return Err(AogError::UnsatisfiableFilter(filter.clone()));
    }

    // Or-nodes in sampling order; each key function names the child taken.
    type Key = fn(&ProblemSpec) -> (u8, u8);
    let keys: [Key; 7] = [
        |s| (s.problem_type as u8, 0),
        |s| (s.algebra.interpretation.kind() as u8, 0),
        |s| (s.layout.shape() as u8, 0),
        |s| match s.layout.second() {
            SecondAttr::Relation(r) => (r as u8, 0),
            SecondAttr::Arrangement(a) => (a as u8, 0),
            SecondAttr::PartCount(p) => (p, 0),
        },
        |s| (s.layout.operand_slots(), 0),
        |s| (s.algebra.interpretation.parts(), 0),
        |s| match s.algebra.interpretation {
            Interpretation::Holistic => (0, 0),
            Interpretation::Analytic { grouping_id, .. } => (grouping_id, 1),
        },
    ];
    for key in keys {
        let mut children: Vec<(u8, u8)> = Vec::new();
        for c in &candidates {
            let k = key(c);
            if !children.contains(&k) {
                children.push(k);
            }
        }
        let pick = children[rng.gen_range(0..children.len())];
        candidates.retain(|c| key(c) == pick);
    }
    debug_assert_eq!(candidates.len(), 1);
    let mut spec = candidates[0].clone();
    spec.seed = seed;
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Violation {
    LayoutTypeMismatch,
    InvalidSlotCount,
    InvalidPartCount,
    InvalidParts,
    UnknownGrouping,
    CenterUnavailable,
    CenterHidden,
    EmptyOperatorDomain,
    DuplicateOperator,
}

/// Lists every invariant the spec breaks; empty means valid.
pub fn validate_spec(spec: &ProblemSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if spec.layout.problem_type() != spec.problem_type {
        out.push(Violation::LayoutTypeMismatch);
    }
    match spec.layout {
        LayoutAttrs::Partition { part_count, .. } => {
            if !(PART_COUNT_MIN..=PART_COUNT_MAX).contains(&part_count) {
                out.push(Violation::InvalidPartCount);
            }
        }
        _ => {
            if !spec.layout.second().slot_options().contains(&spec.layout.operand_slots()) {
                out.push(Violation::InvalidSlotCount);
            }
        }
    }
    if let Interpretation::Analytic { parts, grouping_id } = spec.algebra.interpretation {
        if !(2..=4).contains(&parts) {
            out.push(Violation::InvalidParts);
        } else if out.is_empty() {
            let n = layout::groupings_for(spec.problem_type, &spec.layout, parts).len();
            if grouping_id as usize >= n {
                out.push(Violation::UnknownGrouping);
            }
        }
    }
    let center = layout::has_center(&spec.layout);
    match spec.algebra.constant_mode {
        ConstantMode::ShownVarying if !center => out.push(Violation::CenterUnavailable),
        ConstantMode::HiddenFixed if center => out.push(Violation::CenterHidden),
        _ => {}
    }
    let ops = &spec.algebra.operator_domain;
    if ops.is_empty() {
        out.push(Violation::EmptyOperatorDomain);
    }
    for (i, op) in ops.iter().enumerate() {
        if ops[..i].contains(op) {
            out.push(Violation::DuplicateOperator);
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_examples() {
        let comb = attribute_domains(ProblemType::Combination);
        assert_eq!(
            comb.relations(),
            vec![Relation::Overlap, Relation::Include, Relation::TangentTriple]
        );
        assert_eq!(attribute_domains(ProblemType::Composition).arrangements().len(), 5);
        assert_eq!(attribute_domains(ProblemType::Partition).part_counts(), (2..=8).collect::<Vec<_>>());
        for t in ProblemType::ALL {
            let d = attribute_domains(t);
            assert_eq!(d.shapes.len(), 5);
            assert_eq!(d, attribute_domains(t));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let f = SpecFilter::of_type(ProblemType::Combination);
        let a = sample_problem_spec(0, &f).unwrap();
        assert_eq!(a, sample_problem_spec(0, &f).unwrap());
        assert_eq!(a.problem_type, ProblemType::Combination);
        assert!(validate_spec(&a).is_empty());
    }

    #[test]
    fn pigeonhole_filter_is_unsatisfiable() {
        let f = SpecFilter {
            problem_type: Some(ProblemType::Partition),
            interpretation: Some(InterpretationKind::Analytic),
            parts: Some(4),
            part_count: Some(3),
            ..SpecFilter::default()
        };
        assert!(matches!(sample_problem_spec(1, &f), Err(AogError::UnsatisfiableFilter(_))));
    }

    #[test]
    fn every_cell_is_reachable() {
        for t in ProblemType::ALL {
            for k in InterpretationKind::ALL {
                let f = SpecFilter { problem_type: Some(t), interpretation: Some(k), ..Default::default() };
                let s = sample_problem_spec(7, &f).unwrap();
                assert_eq!((s.problem_type, s.algebra.interpretation.kind()), (t, k));
            }
        }
    }

    #[test]
    fn validation_flags_bad_specs() {
        let mut s = sample_problem_spec(3, &SpecFilter::of_type(ProblemType::Composition)).unwrap();
        s.algebra.interpretation = Interpretation::Analytic { parts: 5, grouping_id: 0 };
        assert_eq!(validate_spec(&s), vec![Violation::InvalidParts]);

        let mut s = sample_problem_spec(3, &SpecFilter::of_type(ProblemType::Combination)).unwrap();
        s.algebra.constant_mode = ConstantMode::ShownVarying;
        assert_eq!(validate_spec(&s), vec![Violation::CenterUnavailable]);

        let mut s = s.clone();
        s.algebra.constant_mode = ConstantMode::HiddenFixed;
        s.algebra.operator_domain.clear();
        assert_eq!(validate_spec(&s), vec![Violation::EmptyOperatorDomain]);
    }

    #[test]
    fn type_is_uniform() {
        let mut counts = [0usize; 3];
        for seed in 0..10_000 {
            let s = sample_problem_spec(seed, &SpecFilter::default()).unwrap();
            counts[s.problem_type as usize] += 1;
        }
        assert!(counts.iter().all(|&c| c >= 2_000), "{counts:?}");
    }
}
