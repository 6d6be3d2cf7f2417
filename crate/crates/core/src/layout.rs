//! Concrete geometry for every legal layout: number slots, figure outlines,
//! reading order and the perceptual groupings used by analytic problems.
//!
//! Coordinates are normalized to the unit square with `y` pointing down.
//! Groupings are built from two declared relations per layout: adjacency
//! (proximity) and symmetry (similarity). A part is valid when its slots are
//! connected under adjacency, or pairwise related under symmetry; all parts of
//! a grouping must follow the same law. Groupings that map onto each other
//! under the layout's rotation are reported once.

use std::collections::HashSet;
use std::f64::consts::TAU;

use serde::Serialize;

use crate::aog::{
    all_assignments, Arrangement, ConstantMode, LayoutAttrs, ProblemType, Relation, ShapeKind,
};

/// Minimum distance between any two slot centers.
pub const MIN_SEPARATION: f64 = 0.08;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slot {
    pub id: u8,
    pub x: f64,
    pub y: f64,
    pub is_center: bool,
    pub region: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Grouping {
    /// Disjoint parts, each sorted, ordered by first element.
    pub parts: Vec<Vec<u8>>,
}

/// A drawable outline.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Outline {
    Figure { shape: ShapeKind, cx: f64, cy: f64, r: f64 },
    Segment { x1: f64, y1: f64, x2: f64, y2: f64 },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LayoutError {
    #[error("layout {layout:?} is not valid for problem type {ptype}")]
    IncompatibleLayout { ptype: ProblemType, layout: LayoutAttrs },
}

/// Full geometry of one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub slots: Vec<Slot>,
    pub outlines: Vec<Outline>,
    adjacent: Vec<(u8, u8)>,
    symmetric: Vec<(u8, u8)>,
    /// Slot permutation generating the layout's rotations.
    rotation: Option<Vec<u8>>,
}

impl Geometry {
    pub fn center(&self) -> Option<&Slot> {
        self.slots.iter().find(|s| s.is_center)
    }

    pub fn operand_ids(&self) -> Vec<u8> {
        self.slots.iter().filter(|s| !s.is_center).map(|s| s.id).collect()
    }

    pub fn is_adjacent(&self, a: u8, b: u8) -> bool {
        self.adjacent.contains(&(a.min(b), a.max(b)))
    }

    pub fn is_symmetric(&self, a: u8, b: u8) -> bool {
        self.symmetric.contains(&(a.min(b), a.max(b)))
    }
}

/// Whether the layout leaves its center free for a shown constant.
pub fn has_center(layout: &LayoutAttrs) -> bool {
    match *layout {
        LayoutAttrs::Combination { .. } => false,
        LayoutAttrs::Composition { arrangement, .. } => arrangement == Arrangement::Cross,
        LayoutAttrs::Partition { part_count, .. } => part_count <= 4,
    }
}

pub fn center_mode_for(_ptype: ProblemType, layout: &LayoutAttrs) -> ConstantMode {
    if has_center(layout) {
        ConstantMode::ShownVarying
    } else {
        ConstantMode::HiddenFixed
    }
}

pub fn slots_for(ptype: ProblemType, layout: &LayoutAttrs) -> Result<Vec<Slot>, LayoutError> {
    geometry(ptype, layout).map(|g| g.slots)
}

fn slot(id: u8, x: f64, y: f64, region: &str) -> Slot {
    Slot { id, x: round6(x), y: round6(y), is_center: false, region: region.to_string() }
}

fn center_slot(id: u8) -> Slot {
    Slot { id, x: 0.5, y: 0.5, is_center: true, region: "center".to_string() }
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

fn pairs(list: &[(u8, u8)]) -> Vec<(u8, u8)> {
    let mut v: Vec<(u8, u8)> = list.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn ring_adjacency(n: u8) -> Vec<(u8, u8)> {
    pairs(&(0..n).map(|i| (i, (i + 1) % n)).filter(|(a, b)| a != b).collect::<Vec<_>>())
}

fn ring_pairs_at(n: u8, distances: &[u8]) -> Vec<(u8, u8)> {
    let mut out = Vec::new();
    for i in 0..n {
        for &d in distances {
            let j = (i + d) % n;
            if i != j {
                out.push((i, j));
            }
        }
    }
    pairs(&out)
}

/// Distances around an `n`-ring whose slot pairs are related by rotational
/// symmetry of order 2 or 3 (and order 4 for rings of eight).
fn ring_symmetric_distances(n: u8) -> Vec<u8> {
    match n {
        2 => vec![1],
        3 => vec![1, 2],
        4 => vec![2],
        6 => vec![2, 3, 4],
        8 => vec![2, 4, 6],
        _ => Vec::new(),
    }
}

fn ring_rotation(n: u8, step: u8, extra: &[u8]) -> Vec<u8> {
    let mut v: Vec<u8> = (0..n).map(|i| (i + step) % n).collect();
    v.extend_from_slice(extra);
    v
}

/// Angle clockwise from 12 o'clock, in `[0, 2π)`.
fn angle_of(x: f64, y: f64) -> f64 {
    let a = (x - 0.5).atan2(-(y - 0.5));
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

fn polar(theta: f64, r: f64) -> (f64, f64) {
    (0.5 + r * theta.sin(), 0.5 - r * theta.cos())
}

/// Vertices of a polygonal figure; `None` for circles.
pub fn figure_vertices(shape: ShapeKind, cx: f64, cy: f64, r: f64) -> Option<Vec<(f64, f64)>> {
    let regular = |n: usize, start_deg: f64| {
        (0..n)
            .map(|k| {
                let t = (start_deg + 360.0 * k as f64 / n as f64).to_radians();
                (cx + r * t.cos(), cy + r * t.sin())
            })
            .collect::<Vec<_>>()
    };
    match shape {
        ShapeKind::Circle => None,
        ShapeKind::Triangle => Some(regular(3, -90.0)),
        ShapeKind::Square => Some(regular(4, -135.0)),
        ShapeKind::Hexagon => Some(regular(6, 0.0)),
        ShapeKind::Rectangle => {
            let (hw, hh) = (0.92 * r, 0.6 * r);
            Some(vec![(cx - hw, cy - hh), (cx + hw, cy - hh), (cx + hw, cy + hh), (cx - hw, cy + hh)])
        }
    }
}

/// Distance from the figure center to its boundary along `theta`
/// (clockwise from 12 o'clock).
pub fn boundary_distance(shape: ShapeKind, r: f64, theta: f64) -> f64 {
    let Some(verts) = figure_vertices(shape, 0.0, 0.0, r) else {
        return r;
    };
    let (dx, dy) = (theta.sin(), -theta.cos());
    let mut best = f64::INFINITY;
    for i in 0..verts.len() {
        let (ax, ay) = verts[i];
        let (bx, by) = verts[(i + 1) % verts.len()];
        let (ex, ey) = (bx - ax, by - ay);
        let den = dx * ey - dy * ex;
        if den.abs() < 1e-12 {
            continue;
        }
        let t = (ax * ey - ay * ex) / den;
        let s = (ax * dy - ay * dx) / den;
        if t > 0.0 && (-1e-9..=1.0 + 1e-9).contains(&s) {
            best = best.min(t);
        }
    }
    best
}

pub fn geometry(ptype: ProblemType, layout: &LayoutAttrs) -> Result<Geometry, LayoutError> {
    let bad = || LayoutError::IncompatibleLayout { ptype, layout: *layout };
    if layout.problem_type() != ptype {
        return Err(bad());
    }
    let shape = layout.shape();
    let fig = |cx: f64, cy: f64, r: f64| Outline::Figure { shape, cx, cy, r };
    let geom = match *layout {
        LayoutAttrs::Combination { relation, slots, .. } => match (relation, slots) {
            (Relation::Overlap, 2) => Geometry {
                slots: vec![slot(0, 0.25, 0.55, "left"), slot(1, 0.75, 0.55, "right")],
                outlines: vec![fig(0.33, 0.5, 0.27), fig(0.67, 0.5, 0.27)],
                adjacent: vec![],
                symmetric: vec![(0, 1)],
                rotation: None,
            },
            (Relation::Overlap, 4) => Geometry {
                slots: vec![
                    slot(0, 0.27, 0.44, "left-upper"),
                    slot(1, 0.27, 0.62, "left-lower"),
                    slot(2, 0.73, 0.44, "right-upper"),
                    slot(3, 0.73, 0.62, "right-lower"),
                ],
                outlines: vec![fig(0.33, 0.5, 0.27), fig(0.67, 0.5, 0.27)],
                adjacent: pairs(&[(0, 1), (2, 3)]),
                symmetric: pairs(&[(0, 2), (1, 3)]),
                rotation: None,
            },
            (Relation::Include, 2) => Geometry {
                slots: vec![slot(0, 0.5, 0.27, "outer"), slot(1, 0.5, 0.6, "inner")],
                outlines: vec![fig(0.5, 0.5, 0.43), fig(0.5, 0.57, 0.19)],
                adjacent: vec![],
                symmetric: vec![],
                rotation: None,
            },
            (Relation::Include, 4) => Geometry {
                slots: vec![
                    slot(0, 0.42, 0.29, "outer-left"),
                    slot(1, 0.58, 0.29, "outer-right"),
                    slot(2, 0.41, 0.6, "inner-left"),
                    slot(3, 0.59, 0.6, "inner-right"),
                ],
                outlines: vec![fig(0.5, 0.5, 0.43), fig(0.5, 0.57, 0.19)],
                adjacent: pairs(&[(0, 1), (2, 3)]),
                symmetric: pairs(&[(0, 1), (2, 3)]),
                rotation: None,
            },
            (Relation::TangentTriple, 3) => {
                let c = [(0.5, 0.29), (0.7, 0.636), (0.3, 0.636)];
                Geometry {
                    slots: vec![
                        slot(0, c[0].0, c[0].1, "top"),
                        slot(1, c[1].0, c[1].1, "lower-right"),
                        slot(2, c[2].0, c[2].1, "lower-left"),
                    ],
                    outlines: c.iter().map(|&(x, y)| fig(x, y, 0.2)).collect(),
                    adjacent: ring_adjacency(3),
                    symmetric: pairs(&[(1, 2)]),
                    rotation: Some(vec![1, 2, 0]),
                }
            }
            _ => return Err(bad()),
        },
        LayoutAttrs::Composition { arrangement, slots, .. } => {
            if !arrangement.slot_options().contains(&slots) {
                return Err(bad());
            }
            let small = 0.09;
            let (points, regions, adjacent, symmetric, rotation): (
                Vec<(f64, f64)>,
                Vec<String>,
                Vec<(u8, u8)>,
                Vec<(u8, u8)>,
                Option<Vec<u8>>,
            ) = match arrangement {
                Arrangement::Line => (
                    vec![(0.2, 0.5), (0.4, 0.5), (0.6, 0.5), (0.8, 0.5)],
                    (0..4).map(|i| format!("line-{i}")).collect(),
                    pairs(&[(0, 1), (1, 2), (2, 3)]),
                    pairs(&[(0, 3), (1, 2)]),
                    None,
                ),
                Arrangement::Cross => (
                    vec![(0.5, 0.2), (0.8, 0.5), (0.5, 0.8), (0.2, 0.5)],
                    ["top", "right", "bottom", "left"].map(String::from).to_vec(),
                    ring_adjacency(4),
                    ring_pairs_at(4, &[2]),
                    Some(ring_rotation(4, 1, &[4])),
                ),
                Arrangement::Triangle => {
                    let (cx, cy, r) = (0.5, 0.54, 0.38);
                    let v: Vec<(f64, f64)> = (0..3)
                        .map(|k| {
                            let t = (-90.0 + 120.0 * k as f64).to_radians();
                            (cx + r * t.cos(), cy + r * t.sin())
                        })
                        .collect();
                    let mid = |a: (f64, f64), b: (f64, f64)| ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
                    (
                        vec![v[0], mid(v[0], v[1]), v[1], mid(v[1], v[2]), v[2], mid(v[2], v[0])],
                        ["apex", "right-side", "right-corner", "base", "left-corner", "left-side"]
                            .map(String::from)
                            .to_vec(),
                        ring_adjacency(6),
                        ring_pairs_at(6, &[2, 4]),
                        Some(ring_rotation(6, 2, &[])),
                    )
                }
                Arrangement::Square => (
                    vec![
                        (0.5, 0.16),
                        (0.84, 0.16),
                        (0.84, 0.5),
                        (0.84, 0.84),
                        (0.5, 0.84),
                        (0.16, 0.84),
                        (0.16, 0.5),
                        (0.16, 0.16),
                    ],
                    (0..8).map(|i| format!("square-{i}")).collect(),
                    ring_adjacency(8),
                    ring_pairs_at(8, &[2, 4, 6]),
                    Some(ring_rotation(8, 2, &[])),
                ),
                Arrangement::Circle => (
                    (0..slots).map(|k| polar(TAU * k as f64 / slots as f64, 0.34)).collect(),
                    (0..slots).map(|i| format!("ring-{i}")).collect(),
                    ring_adjacency(slots),
                    ring_pairs_at(slots, &ring_symmetric_distances(slots)),
                    Some(ring_rotation(slots, 1, &[])),
                ),
            };
            let mut slot_list: Vec<Slot> = points
                .iter()
                .zip(&regions)
                .enumerate()
                .map(|(i, (&(x, y), region))| slot(i as u8, x, y, region))
                .collect();
            let mut outlines: Vec<Outline> = points.iter().map(|&(x, y)| fig(x, y, small)).collect();
            if arrangement == Arrangement::Cross {
                slot_list.push(center_slot(4));
                outlines.push(fig(0.5, 0.5, small));
            }
            Geometry { slots: slot_list, outlines, adjacent, symmetric, rotation }
        }
        LayoutAttrs::Partition { part_count, .. } => {
            if !(crate::aog::PART_COUNT_MIN..=crate::aog::PART_COUNT_MAX).contains(&part_count) {
                return Err(bad());
            }
            let (outer, inner) = (0.43, 0.13);
            let center = has_center(layout);
            let p = part_count as usize;
            let mut outlines = vec![fig(0.5, 0.5, outer)];
            if center {
                outlines.push(fig(0.5, 0.5, inner));
            }
            for k in 0..p {
                let t = TAU * k as f64 / p as f64;
                let from = if center { boundary_distance(shape, inner, t) } else { 0.0 };
                let to = boundary_distance(shape, outer, t);
                let (x1, y1) = polar(t, from);
                let (x2, y2) = polar(t, to);
                outlines.push(Outline::Segment { x1: round6(x1), y1: round6(y1), x2: round6(x2), y2: round6(y2) });
            }
            let mut slot_list: Vec<Slot> = (0..p)
                .map(|k| {
                    let t = TAU * (k as f64 + 0.5) / p as f64;
                    let d_out = boundary_distance(shape, outer, t);
                    let d = if center {
                        (boundary_distance(shape, inner, t) + d_out) / 2.0
                    } else {
                        0.6 * d_out
                    };
                    let (x, y) = polar(t, d);
                    slot(k as u8, x, y, &format!("part-{k}"))
                })
                .collect();
            let mut center_ids = Vec::new();
            if center {
                slot_list.push(center_slot(part_count));
                center_ids.push(part_count);
            }
            Geometry {
                slots: slot_list,
                outlines,
                adjacent: ring_adjacency(part_count),
                symmetric: ring_pairs_at(part_count, &ring_symmetric_distances(part_count)),
                rotation: Some(ring_rotation(part_count, 1, &center_ids)),
            }
        }
    };
    Ok(geom)
}

/// Reading order: non-center slots by angle clockwise from 12 o'clock, then
/// by distance from the panel center; the center slot last.
pub fn canonical_order(slots: &[Slot]) -> Vec<u8> {
    let key = |s: &Slot| {
        let a = (angle_of(s.x, s.y) * 1e9).round() / 1e9;
        let a = if a >= (TAU * 1e9).round() / 1e9 { 0.0 } else { a };
        let r = ((s.x - 0.5).hypot(s.y - 0.5) * 1e9).round() / 1e9;
        (a, r)
    };
    let mut others: Vec<&Slot> = slots.iter().filter(|s| !s.is_center).collect();
    others.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(a.id.cmp(&b.id))
    });
    let mut out: Vec<u8> = others.iter().map(|s| s.id).collect();
    out.extend(slots.iter().filter(|s| s.is_center).map(|s| s.id));
    out
}

/// Every partition of `items` into `k` parts of equal size, each part in
/// ascending order, parts ordered by first element. Lexicographic order.
pub fn equal_partitions(items: &[u8], k: usize) -> Vec<Vec<Vec<u8>>> {
    fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
        fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == r {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, r, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(0, n, r, &mut Vec::new(), &mut out);
        out
    }
    fn rec(rest: &[u8], size: usize, acc: &mut Vec<Vec<u8>>, out: &mut Vec<Vec<Vec<u8>>>) {
        if rest.is_empty() {
            out.push(acc.clone());
            return;
        }
        let tail = &rest[1..];
        for combo in combinations(tail.len(), size - 1) {
            let mut part = vec![rest[0]];
            part.extend(combo.iter().map(|&i| tail[i]));
            let remaining: Vec<u8> =
                tail.iter().enumerate().filter(|(i, _)| !combo.contains(i)).map(|(_, &v)| v).collect();
            acc.push(part);
            rec(&remaining, size, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 || items.is_empty() || items.len() % k != 0 {
        return out;
    }
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    rec(&sorted, items.len() / k, &mut Vec::new(), &mut out);
    out
}

fn is_connected(part: &[u8], geom: &Geometry) -> bool {
    let mut seen = vec![part[0]];
    let mut frontier = vec![part[0]];
    while let Some(a) = frontier.pop() {
        for &b in part {
            if !seen.contains(&b) && geom.is_adjacent(a, b) {
                seen.push(b);
                frontier.push(b);
            }
        }
    }
    seen.len() == part.len()
}

fn is_symmetric_clique(part: &[u8], geom: &Geometry) -> bool {
    part.iter().enumerate().all(|(i, &a)| part[i + 1..].iter().all(|&b| geom.is_symmetric(a, b)))
}

fn normalize(parts: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let mut v: Vec<Vec<u8>> = parts
        .iter()
        .map(|p| {
            let mut p = p.clone();
            p.sort_unstable();
            p
        })
        .collect();
    v.sort();
    v
}

/// Groupings of the non-center slots into `parts` equal parts of at least two
/// slots, following one perceptual law, one representative per rotation class.
pub fn groupings_for(ptype: ProblemType, layout: &LayoutAttrs, parts: u8) -> Vec<Grouping> {
    let Ok(geom) = geometry(ptype, layout) else {
        return Vec::new();
    };
    groupings_of(&geom, parts)
}

pub fn groupings_of(geom: &Geometry, parts: u8) -> Vec<Grouping> {
    let ids = geom.operand_ids();
    let k = parts as usize;
    if !(2..=4).contains(&k) || ids.len() % k != 0 || ids.len() / k < 2 {
        return Vec::new();
    }
    let mut seen: HashSet<Vec<Vec<u8>>> = HashSet::new();
    let mut out = Vec::new();
    for cand in equal_partitions(&ids, k) {
        let proximity = cand.iter().all(|p| is_connected(p, geom));
        let similarity = cand.iter().all(|p| is_symmetric_clique(p, geom));
        if !(proximity || similarity) {
            continue;
        }
        let norm = normalize(&cand);
        if seen.contains(&norm) {
            continue;
        }
        let mut cur = norm.clone();
        loop {
            seen.insert(cur.clone());
            let Some(rot) = &geom.rotation else { break };
            let next = normalize(
                &cur.iter().map(|p| p.iter().map(|&s| rot[s as usize]).collect()).collect::<Vec<_>>(),
            );
            if next == norm {
                break;
            }
            cur = next;
        }
        out.push(Grouping { parts: norm });
    }
    out
}

/// Layout tables as a JSON document, one entry per legal layout.
pub fn layout_table_json() -> serde_json::Value {
    let mut seen: Vec<LayoutAttrs> = Vec::new();
    let mut entries = Vec::new();
    for spec in all_assignments() {
        if seen.contains(&spec.layout) {
            continue;
        }
        seen.push(spec.layout);
        let geom = geometry(spec.problem_type, &spec.layout).expect("enumerated layouts are legal");
        let groupings: serde_json::Map<String, serde_json::Value> = (2..=4u8)
            .map(|k| {
                let g: Vec<_> = groupings_of(&geom, k).into_iter().map(|g| g.parts).collect();
                (k.to_string(), serde_json::json!(g))
            })
            .collect();
        entries.push(serde_json::json!({
            "layout": spec.layout,
            "constant_mode": center_mode_for(spec.problem_type, &spec.layout),
            "slots": geom.slots,
            "canonical_order": canonical_order(&geom.slots),
            "groupings": groupings,
        }));
    }
    serde_json::Value::Array(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn layouts() -> Vec<(ProblemType, LayoutAttrs)> {
        let mut v: Vec<(ProblemType, LayoutAttrs)> = Vec::new();
        for s in all_assignments() {
            if !v.iter().any(|(_, l)| *l == s.layout) {
                v.push((s.problem_type, s.layout));
            }
        }
        v
    }

    fn partition(p: u8) -> LayoutAttrs {
        LayoutAttrs::Partition { shape: ShapeKind::Circle, part_count: p }
    }

    fn composition(arrangement: Arrangement, slots: u8) -> LayoutAttrs {
        LayoutAttrs::Composition { shape: ShapeKind::Square, arrangement, slots }
    }

    #[test]
    fn overlap_has_two_slots_and_no_center() {
        let l = LayoutAttrs::Combination { shape: ShapeKind::Circle, relation: Relation::Overlap, slots: 2 };
        let slots = slots_for(ProblemType::Combination, &l).unwrap();
        assert_eq!(slots.len(), 2);
        assert!(slots.iter().all(|s| !s.is_center));
        assert_eq!(center_mode_for(ProblemType::Combination, &l), ConstantMode::HiddenFixed);
    }

    #[test]
    fn partition_of_four_has_center() {
        let slots = slots_for(ProblemType::Partition, &partition(4)).unwrap();
        assert_eq!(slots.len(), 5);
        assert_eq!(slots.iter().filter(|s| s.is_center).count(), 1);
        assert_eq!(center_mode_for(ProblemType::Partition, &partition(4)), ConstantMode::ShownVarying);
        assert_eq!(center_mode_for(ProblemType::Partition, &partition(5)), ConstantMode::HiddenFixed);
    }

    #[test]
    fn cross_order_is_clockwise_then_center() {
        let slots = slots_for(ProblemType::Composition, &composition(Arrangement::Cross, 4)).unwrap();
        assert_eq!(slots.len(), 5);
        let by_region = |r: &str| slots.iter().find(|s| s.region == r).unwrap().id;
        assert_eq!(
            canonical_order(&slots),
            vec![by_region("top"), by_region("right"), by_region("bottom"), by_region("left"), by_region("center")]
        );
        assert_eq!(
            center_mode_for(ProblemType::Composition, &composition(Arrangement::Cross, 4)),
            ConstantMode::ShownVarying
        );
    }

    #[test]
    fn overlap_order_puts_right_region_first() {
        let l = LayoutAttrs::Combination { shape: ShapeKind::Circle, relation: Relation::Overlap, slots: 2 };
        let slots = slots_for(ProblemType::Combination, &l).unwrap();
        // right region sits at 90 degrees, left region at 270 degrees
        assert_eq!(canonical_order(&slots), vec![1, 0]);
        assert_eq!(canonical_order(&slots[..1]), vec![0]);
    }

    #[test]
    fn incompatible_layouts_are_rejected() {
        assert!(slots_for(ProblemType::Combination, &partition(4)).is_err());
        assert!(slots_for(ProblemType::Partition, &partition(9)).is_err());
        let bad = LayoutAttrs::Combination { shape: ShapeKind::Circle, relation: Relation::TangentTriple, slots: 2 };
        assert!(slots_for(ProblemType::Combination, &bad).is_err());
    }

    #[test]
    fn square_of_four_has_two_groupings() {
        let g = groupings_for(ProblemType::Partition, &partition(4), 2);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].parts, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(g[1].parts, vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(groupings_for(ProblemType::Composition, &composition(Arrangement::Cross, 4), 2).len(), 2);
    }

    #[test]
    fn too_few_slots_for_parts() {
        let l = LayoutAttrs::Combination { shape: ShapeKind::Circle, relation: Relation::TangentTriple, slots: 3 };
        assert!(groupings_for(ProblemType::Combination, &l, 4).is_empty());
        assert!(groupings_for(ProblemType::Partition, &partition(5), 2).is_empty());
    }

    #[test]
    fn ring_of_eight_pairs_includes_adjacent_pairs() {
        let g = groupings_for(ProblemType::Composition, &composition(Arrangement::Circle, 8), 4);
        assert!(g.iter().any(|g| g.parts == vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]]));
    }

    #[test]
    fn equal_partition_counts() {
        let items: Vec<u8> = (0..8).collect();
        assert_eq!(equal_partitions(&items, 4).len(), 105);
        assert_eq!(equal_partitions(&items, 2).len(), 35);
        assert_eq!(equal_partitions(&items[..6], 3).len(), 15);
        assert_eq!(equal_partitions(&items[..6], 2).len(), 10);
        assert_eq!(equal_partitions(&items[..4], 2).len(), 3);
        assert_eq!(equal_partitions(&items[..4], 2)[0], vec![vec![0, 1], vec![2, 3]]);
        assert!(equal_partitions(&items[..5], 2).is_empty());
    }

    #[test]
    fn every_layout_respects_slot_invariants() {
        for (t, l) in layouts() {
            let g = geometry(t, &l).unwrap();
            let n = g.slots.len();
            for (i, s) in g.slots.iter().enumerate() {
                assert_eq!(s.id as usize, i);
                assert!((0.05..=0.95).contains(&s.x) && (0.05..=0.95).contains(&s.y), "{l:?} {s:?}");
                for o in &g.slots[i + 1..] {
                    let d = (s.x - o.x).hypot(s.y - o.y);
                    assert!(d >= MIN_SEPARATION, "{l:?}: slots {} and {} are {d:.3} apart", s.id, o.id);
                }
            }
            assert!(g.slots.iter().filter(|s| s.is_center).count() <= 1);
            assert_eq!(g.center().is_some(), has_center(&l));
            let mut order = canonical_order(&g.slots);
            order.sort_unstable();
            assert_eq!(order, (0..n as u8).collect::<Vec<_>>());
        }
    }

    #[test]
    fn ring_layouts_read_in_ring_order() {
        for l in [
            composition(Arrangement::Triangle, 6),
            composition(Arrangement::Square, 8),
            composition(Arrangement::Circle, 6),
            composition(Arrangement::Circle, 8),
            partition(6),
        ] {
            let slots = slots_for(l.problem_type(), &l).unwrap();
            assert_eq!(canonical_order(&slots), (0..slots.len() as u8).collect::<Vec<_>>(), "{l:?}");
        }
    }

    #[test]
    fn groupings_partition_the_operands() {
        for (t, l) in layouts() {
            let g = geometry(t, &l).unwrap();
            let mut ids = g.operand_ids();
            ids.sort_unstable();
            for k in 2..=4 {
                for grouping in groupings_of(&g, k) {
                    assert_eq!(grouping.parts.len(), k as usize);
                    let mut all: Vec<u8> = grouping.parts.concat();
                    all.sort_unstable();
                    assert_eq!(all, ids);
                    let proximity = grouping.parts.iter().all(|p| is_connected(p, &g));
                    let similarity = grouping.parts.iter().all(|p| is_symmetric_clique(p, &g));
                    assert!(proximity || similarity);
                }
            }
        }
    }

    #[test]
    fn boundary_distance_of_regular_figures() {
        assert!((boundary_distance(ShapeKind::Circle, 0.4, 1.0) - 0.4).abs() < 1e-12);
        // square vertices sit on the diagonals
        assert!((boundary_distance(ShapeKind::Square, 0.4, PI / 4.0) - 0.4).abs() < 1e-9);
        assert!((boundary_distance(ShapeKind::Square, 0.4, 0.0) - 0.4 / 2f64.sqrt()).abs() < 1e-9);
        // triangle apex points up
        assert!((boundary_distance(ShapeKind::Triangle, 0.4, 0.0) - 0.4).abs() < 1e-9);
        assert!((boundary_distance(ShapeKind::Triangle, 0.4, PI) - 0.2).abs() < 1e-9);
    }

    #[test]
    fn table_dump_lists_every_layout() {
        let v = layout_table_json();
        assert_eq!(v.as_array().unwrap().len(), layouts().len());
    }
}
