//! Three-panel problem instantiation, answer masking and the problem document
//! format.
//!
//! One rule is fixed per problem: the grouping, one expression shared by all
//! groups, and its operators. Panels differ only in their integers (and the
//! shown center constant under [`ConstantMode::ShownVarying`]).

use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aog::{
    self, sample_problem_spec, AlgebraAttrs, AogError, ConstantMode, Interpretation, LayoutAttrs,
    ProblemSpec, ProblemType, Relation, ShapeKind, SpecFilter,
};
use crate::calc_tree::{sample_values, shapes, Op, Skeleton, VALUE_MAX, VALUE_MIN};
use crate::layout::{self, Geometry, LayoutError};
use crate::solver::{ConstantRole, GroupExpr, Hypothesis, ProblemView, SolveError};

pub const SCHEMA_VERSION: u32 = 1;

/// Rule/constant re-draws allowed per seed before giving up.
pub const RESTART_BUDGET: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error(transparent)]
    Spec(#[from] AogError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("seed {seed}: no valid instantiation after {restarts} restarts")]
    GenerationExhausted { seed: u64, restarts: usize },
}

/// Integers of one panel. `values` covers every non-center slot; the masked
/// slot of panel 3 holds `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Panel {
    pub values: BTreeMap<u8, Option<u8>>,
    pub shown_constant: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub id: String,
    pub seed: u64,
    pub spec: ProblemSpec,
    /// Positions in the rule index the layout's reading order.
    pub generating_rule: Hypothesis,
    pub panels: [Panel; 3],
    pub masked_slot: u8,
    pub answer: u8,
}

/// Stable id: zero-padded seed plus a digest prefix of the spec.
pub fn problem_id(spec: &ProblemSpec) -> String {
    let json = serde_json::to_vec(spec).expect("specs always serialize");
    let digest = hex::encode(Sha256::digest(&json));
    format!("{:020}-{}", spec.seed, &digest[..8])
}

/// Picks the masked slot uniformly among the filled slots of `panel` and
/// returns `(slot, removed value)`.
pub fn mask_answer<R: Rng + ?Sized>(panel: &mut Panel, rng: &mut R) -> Option<(u8, u8)> {
    let filled: Vec<u8> = panel.values.iter().filter(|(_, v)| v.is_some()).map(|(&k, _)| k).collect();
    if filled.is_empty() {
        return None;
    }
    let slot = filled[rng.gen_range(0..filled.len())];
    let answer = panel.values.insert(slot, None).flatten()?;
    Some((slot, answer))
}

/// Slot id of each reading position, and the inverse.
fn reading_maps(geom: &Geometry) -> (Vec<u8>, Vec<u8>) {
    let order = layout::canonical_order(&geom.slots);
    let mut position = vec![0u8; order.len()];
    for (p, &id) in order.iter().enumerate() {
        position[id as usize] = p as u8;
    }
    (order, position)
}

/// Generates the problem for `seed`. Deterministic in `(seed, filter)`.
pub fn generate_problem(seed: u64, filter: &SpecFilter) -> Result<Problem, GenerateError> {
    let spec = sample_problem_spec(seed, filter)?;
    instantiate(spec)
}

/// Instantiates a sampled spec: rule, constants, panel values, mask.
pub fn instantiate(spec: ProblemSpec) -> Result<Problem, GenerateError> {
    let geom = layout::geometry(spec.problem_type, &spec.layout)?;
    let (order, position) = reading_maps(&geom);
    let center = geom.center().map(|s| s.id);
    let slot_groups: Vec<Vec<u8>> = match spec.algebra.interpretation {
        Interpretation::Holistic => vec![geom.operand_ids()],
        Interpretation::Analytic { parts, grouping_id } => layout::groupings_of(&geom, parts)
            .get(grouping_id as usize)
            .ok_or(GenerateError::Layout(LayoutError::IncompatibleLayout {
                ptype: spec.problem_type,
                layout: spec.layout,
            }))?
            .parts
            .clone(),
    };
    // each group's members in reading order
    let mut groups: Vec<Vec<u8>> = slot_groups
        .iter()
        .map(|g| {
            let mut p: Vec<u8> = g.iter().map(|&id| position[id as usize]).collect();
            p.sort_unstable();
            p
        })
        .collect();
    groups.sort();
    let leaves = groups[0].len();
    let constant = match (spec.algebra.constant_mode, center) {
        (ConstantMode::ShownVarying, Some(c)) => ConstantRole::ShownAt(position[c as usize]),
        _ => ConstantRole::Latent,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let domain = &spec.algebra.operator_domain;
    'restart: for _ in 0..RESTART_BUDGET {
        let shape = rng.gen_range(0..shapes(leaves).len());
        let ops: Vec<Op> = (0..leaves - 1).map(|_| domain[rng.gen_range(0..domain.len())]).collect();
        let skeleton = Skeleton::new(shapes(leaves)[shape].clone(), ops.clone()).expect("shape matches ops");
        let roots: [u8; 3] = match constant {
            ConstantRole::Latent => [rng.gen_range(VALUE_MIN..=VALUE_MAX); 3],
            ConstantRole::ShownAt(_) => {
                let picks = index::sample(&mut rng, (VALUE_MAX - VALUE_MIN + 1) as usize, 3);
                [0, 1, 2].map(|i| picks.index(i) as u8 + VALUE_MIN)
            }
        };
        let mut panels: Vec<Panel> = Vec::with_capacity(3);
        for &root in &roots {
            let mut values = BTreeMap::new();
            for group in &groups {
                let Ok(tree) = sample_values(&skeleton, root as i64, &mut rng) else {
                    continue 'restart;
                };
                for (&pos, v) in group.iter().zip(tree.leaves()) {
                    values.insert(order[pos as usize], Some(v as u8));
                }
            }
            let shown_constant = matches!(constant, ConstantRole::ShownAt(_)).then_some(root);
            panels.push(Panel { values, shown_constant });
        }
        let (masked_slot, answer) = mask_answer(&mut panels[2], &mut rng).expect("panel 3 has operand slots");
        let panels: [Panel; 3] = panels.try_into().expect("three panels");
        return Ok(Problem {
            id: problem_id(&spec),
            seed: spec.seed,
            generating_rule: Hypothesis { constant, groups, expr: GroupExpr::identity(shape, ops) },
            spec,
            panels,
            masked_slot,
            answer,
        });
    }
    Err(GenerateError::GenerationExhausted { seed: spec.seed, restarts: RESTART_BUDGET })
}

/// The worked example: two overlapping circles, hidden constant 76,
/// rule `a + b`, panels (54, 22), (67, 9), (17, ?).
pub fn fig1_problem() -> Problem {
    let spec = ProblemSpec {
        problem_type: ProblemType::Combination,
        layout: LayoutAttrs::Combination { shape: ShapeKind::Circle, relation: Relation::Overlap, slots: 2 },
        algebra: AlgebraAttrs {
            interpretation: Interpretation::Holistic,
            operator_domain: Op::ALL.to_vec(),
            constant_mode: ConstantMode::HiddenFixed,
        },
        seed: 0,
    };
    let panel = |a: Option<u8>, b: Option<u8>| Panel {
        values: BTreeMap::from([(0, a), (1, b)]),
        shown_constant: None,
    };
    Problem {
        id: "fig1".to_string(),
        seed: 0,
        spec,
        generating_rule: "latent {0,1} (a+b)".parse().expect("valid rule"),
        panels: [panel(Some(54), Some(22)), panel(Some(67), Some(9)), panel(Some(17), None)],
        masked_slot: 1,
        answer: 59,
    }
}

impl Problem {
    pub fn problem_type(&self) -> ProblemType {
        self.spec.problem_type
    }

    pub fn integer_count(&self) -> usize {
        self.spec.integer_count()
    }

    /// Panel 3 with the answer restored.
    pub fn completed_panels(&self) -> [Panel; 3] {
        let mut panels = self.panels.clone();
        panels[2].values.insert(self.masked_slot, Some(self.answer));
        panels
    }

    /// The record shown to solvers and people: no answer, no rule, no algebra.
    pub fn public(&self) -> PublicProblem {
        PublicProblem {
            id: self.id.clone(),
            problem_type: self.spec.problem_type,
            layout: self.spec.layout,
            panels: self.panels.iter().map(PanelDoc::from).collect(),
            masked_slot: self.masked_slot,
        }
    }

    pub fn view(&self) -> Result<ProblemView, SolveError> {
        self.public().view()
    }

    pub fn to_json(&self) -> String {
        let doc = ProblemDoc {
            schema_version: SCHEMA_VERSION,
            id: self.id.clone(),
            seed: self.seed,
            problem_type: self.spec.problem_type,
            layout: self.spec.layout,
            algebra: self.spec.algebra.clone(),
            generating_rule: RuleDoc::from(&self.generating_rule),
            panels: self.panels.iter().map(PanelDoc::from).collect(),
            masked_slot: self.masked_slot,
            answer: self.answer,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Problem, SchemaViolation> {
        let doc: ProblemDoc = parse_doc(text)?;
        doc.into_problem()
    }
}

/// Malformed problem document; `path` is a JSON pointer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("schema violation at {path}: {message}")]
pub struct SchemaViolation {
    pub path: String,
    pub message: String,
}

impl SchemaViolation {
    fn at(path: impl Into<String>, message: impl Into<String>) -> SchemaViolation {
        SchemaViolation { path: path.into(), message: message.into() }
    }
}

fn parse_doc<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, SchemaViolation> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let mut path = String::new();
        for seg in e.path().iter() {
            use serde_path_to_error::Segment;
            match seg {
                Segment::Seq { index } => path.push_str(&format!("/{index}")),
                Segment::Map { key } => path.push_str(&format!("/{key}")),
                Segment::Enum { variant } => path.push_str(&format!("/{variant}")),
                Segment::Unknown => {}
            }
        }
        let message = e.inner().to_string();
        // a missing field is reported at its parent; point at the field itself
        if let Some(rest) = message.strip_prefix("missing field `") {
            if let Some(field) = rest.split('`').next() {
                path.push('/');
                path.push_str(field);
            }
        }
        if path.is_empty() {
            path.push('/');
        }
        SchemaViolation { path, message }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelDoc {
    pub values: BTreeMap<u8, Option<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shown_constant: Option<u8>,
}

impl From<&Panel> for PanelDoc {
    fn from(p: &Panel) -> PanelDoc {
        PanelDoc { values: p.values.clone(), shown_constant: p.shown_constant }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    constant: String,
    groups: Vec<Vec<u8>>,
    expr: String,
}

impl From<&Hypothesis> for RuleDoc {
    fn from(h: &Hypothesis) -> RuleDoc {
        RuleDoc { constant: h.constant.to_string(), groups: h.groups.clone(), expr: h.expr.to_string() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    schema_version: u32,
    id: String,
    seed: u64,
    #[serde(rename = "type")]
    problem_type: ProblemType,
    layout: LayoutAttrs,
    algebra: AlgebraAttrs,
    generating_rule: RuleDoc,
    panels: Vec<PanelDoc>,
    masked_slot: u8,
    answer: u8,
}

fn in_value_range(v: u8) -> bool {
    (VALUE_MIN..=VALUE_MAX).contains(&v)
}

/// Checks panel shape against the layout; shared by full and public documents.
fn check_panels(
    ptype: ProblemType,
    layout_attrs: &LayoutAttrs,
    panels: &[PanelDoc],
    masked_slot: u8,
) -> Result<Geometry, SchemaViolation> {
    let geom = layout::geometry(ptype, layout_attrs).map_err(|e| SchemaViolation::at("/layout", e.to_string()))?;
    if panels.len() != 3 {
        return Err(SchemaViolation::at("/panels", format!("expected 3 panels, found {}", panels.len())));
    }
    let operands = geom.operand_ids();
    let has_center = geom.center().is_some();
    for (i, p) in panels.iter().enumerate() {
        let keys: Vec<u8> = p.values.keys().copied().collect();
        if keys != operands {
            return Err(SchemaViolation::at(format!("/panels/{i}/values"), format!("expected slots {operands:?}")));
        }
        for (&slot, v) in &p.values {
            let masked_here = i == 2 && slot == masked_slot;
            match v {
                None if !masked_here => {
                    return Err(SchemaViolation::at(format!("/panels/{i}/values/{slot}"), "missing value"));
                }
                Some(_) if masked_here => {
                    return Err(SchemaViolation::at(format!("/panels/{i}/values/{slot}"), "masked slot must be null"));
                }
                Some(v) if !in_value_range(*v) => {
                    return Err(SchemaViolation::at(format!("/panels/{i}/values/{slot}"), "value out of range"));
                }
                _ => {}
            }
        }
        match p.shown_constant {
            Some(c) if !has_center || !in_value_range(c) => {
                return Err(SchemaViolation::at(format!("/panels/{i}/shown_constant"), "unexpected constant"));
            }
            None if has_center => {
                return Err(SchemaViolation::at(format!("/panels/{i}/shown_constant"), "missing constant"));
            }
            _ => {}
        }
    }
    if !operands.contains(&masked_slot) {
        return Err(SchemaViolation::at("/masked_slot", "not an operand slot"));
    }
    Ok(geom)
}

impl ProblemDoc {
    fn into_problem(self) -> Result<Problem, SchemaViolation> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SchemaViolation::at("/schema_version", format!("unsupported version {}", self.schema_version)));
        }
        if self.layout.problem_type() != self.problem_type {
            return Err(SchemaViolation::at("/layout", "layout does not match type"));
        }
        let geom = check_panels(self.problem_type, &self.layout, &self.panels, self.masked_slot)?;
        if !in_value_range(self.answer) {
            return Err(SchemaViolation::at("/answer", "value out of range"));
        }
        let rule_text = format!(
            "{} {} {}",
            self.generating_rule.constant,
            self.generating_rule
                .groups
                .iter()
                .map(|g| format!("{{{}}}", g.iter().map(u8::to_string).collect::<Vec<_>>().join(",")))
                .collect::<String>(),
            self.generating_rule.expr
        );
        let rule: Hypothesis =
            rule_text.parse().map_err(|e: crate::solver::CodecError| SchemaViolation::at("/generating_rule", e.0))?;
        if !rule.is_well_formed(geom.slots.len()) {
            return Err(SchemaViolation::at("/generating_rule", "rule does not fit the layout"));
        }
        let panels: Vec<Panel> = self
            .panels
            .into_iter()
            .map(|p| Panel { values: p.values, shown_constant: p.shown_constant })
            .collect();
        Ok(Problem {
            id: self.id,
            seed: self.seed,
            spec: ProblemSpec {
                problem_type: self.problem_type,
                layout: self.layout,
                algebra: self.algebra,
                seed: self.seed,
            },
            generating_rule: rule,
            panels: panels.try_into().expect("length checked"),
            masked_slot: self.masked_slot,
            answer: self.answer,
        })
    }
}

/// Problem as served to solvers and the quiz UI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublicProblem {
    pub id: String,
    #[serde(rename = "type")]
    pub problem_type: ProblemType,
    pub layout: LayoutAttrs,
    pub panels: Vec<PanelDoc>,
    pub masked_slot: u8,
}

impl PublicProblem {
    pub fn from_json(text: &str) -> Result<PublicProblem, SchemaViolation> {
        let p: PublicProblem = parse_doc(text)?;
        check_panels(p.problem_type, &p.layout, &p.panels, p.masked_slot)?;
        Ok(p)
    }

    /// Solver input; values indexed by slot id with the center constant filled in.
    pub fn view(&self) -> Result<ProblemView, SolveError> {
        let geom = layout::geometry(self.problem_type, &self.layout)?;
        if self.panels.len() != 3 {
            return Err(SolveError::SlotMismatch);
        }
        let by_slot = [0, 1, 2].map(|k| {
            geom.slots
                .iter()
                .map(|s| {
                    if s.is_center {
                        self.panels[k].shown_constant
                    } else {
                        self.panels[k].values.get(&s.id).copied().flatten()
                    }
                })
                .collect::<Vec<_>>()
        });
        ProblemView::build(self.problem_type, &self.layout, &by_slot)
    }
}

/// Re-validates the spec part of a problem.
pub fn spec_violations(p: &Problem) -> Vec<aog::Violation> {
    aog::validate_spec(&p.spec)
}
