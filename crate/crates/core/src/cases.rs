//! Base-case triangulations and the 256-entry lookup table.
//!
//! Each of the 23 rotation classes of corner patterns carries a hand-authored
//! triangulation of the closed surface around one component: interface
//! triangles (tag `I`) plus the pieces of the cube faces (tags `W..U`).
//! Cases 01-16 enclose component 1, cases 17-21 enclose component 0, and
//! cases 00 and 22 have no surface. The lookup table rewrites these lists
//! through the rotation that carries each base pattern onto every config.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::sync::OnceLock;

use thiserror::Error;

use crate::measure::triangle_measures;
use crate::point::Point3;
use crate::topology::{rotations, Config, EdgeId, Face, Rotation, VertexId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("case id {0} out of range 0..=22")]
    UnknownCase(u8),
    #[error("case {case:02}: {detail}")]
    InconsistentCase { case: u8, detail: String },
    #[error("base patterns do not partition the configurations into rotation orbits: {0}")]
    OrbitMismatch(String),
    #[error("config {0} is not reachable from any base case")]
    Unresolved(Config),
    #[error("mixed triangle winding: {positive} parts positive, {negative} negative")]
    MixedWinding { positive: usize, negative: usize },
    #[error("config {config}: surface is not closed: {detail}")]
    NotWatertight { config: Config, detail: String },
}

/// A surface-polygon vertex: a cube corner or the crossing on a cube edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRef {
    Vertex(VertexId),
    Crossing(EdgeId),
}

impl NodeRef {
    pub fn rotated(self, r: &Rotation) -> NodeRef {
        match self {
            NodeRef::Vertex(v) => NodeRef::Vertex(r.move_vertex(v)),
            NodeRef::Crossing(e) => NodeRef::Crossing(r.move_edge(e)),
        }
    }

    pub fn on_face(self, f: Face) -> bool {
        match self {
            NodeRef::Vertex(v) => f.contains_vertex(v),
            NodeRef::Crossing(e) => f.contains_edge(e),
        }
    }

    /// Slot in a 20-element node array: corners first, then edge crossings.
    pub fn slot(self) -> usize {
        match self {
            NodeRef::Vertex(v) => v.index(),
            NodeRef::Crossing(e) => 8 + e.index(),
        }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Vertex(v) => v.fmt(f),
            NodeRef::Crossing(e) => e.fmt(f),
        }
    }
}

/// Where a triangle lies: on the interface or on one cube face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Interface,
    Face(Face),
}

impl Tag {
    pub fn letter(self) -> char {
        match self {
            Tag::Interface => 'I',
            Tag::Face(f) => f.letter(),
        }
    }

    pub fn rotated(self, r: &Rotation) -> Tag {
        match self {
            Tag::Interface => Tag::Interface,
            Tag::Face(f) => Tag::Face(r.move_face(f)),
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TriangleRef {
    pub nodes: [NodeRef; 3],
    pub tag: Tag,
}

impl TriangleRef {
    pub fn rotated(&self, r: &Rotation) -> TriangleRef {
        TriangleRef {
            nodes: self.nodes.map(|n| n.rotated(r)),
            tag: self.tag.rotated(r),
        }
    }

    pub fn reversed(&self) -> TriangleRef {
        let [a, b, c] = self.nodes;
        TriangleRef {
            nodes: [a, c, b],
            tag: self.tag,
        }
    }

    pub fn is_interface(&self) -> bool {
        self.tag == Tag::Interface
    }
}

impl fmt::Display for TriangleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.nodes;
        write!(f, "{{{a},{b},{c},{}}}", self.tag)
    }
}

/// One connected closed surface of a case.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CasePart {
    pub triangles: Vec<TriangleRef>,
}

impl CasePart {
    pub fn interface_triangles(&self) -> impl Iterator<Item = &TriangleRef> {
        self.triangles.iter().filter(|t| t.is_interface())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Zero,
    One,
}

impl Component {
    pub fn bit(self) -> u8 {
        match self {
            Component::Zero => 0,
            Component::One => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseEntry {
    pub case_id: u8,
    /// Component bounded by the surface; `None` for the empty and full cases.
    pub enclosed: Option<Component>,
    pub parts: Vec<CasePart>,
}

impl CaseEntry {
    pub fn triangle_count(&self) -> usize {
        self.parts.iter().map(|p| p.triangles.len()).sum()
    }

    pub fn triangles(&self) -> impl Iterator<Item = &TriangleRef> {
        self.parts.iter().flat_map(|p| p.triangles.iter())
    }

    pub fn rotated(&self, r: &Rotation) -> CaseEntry {
        CaseEntry {
            case_id: self.case_id,
            enclosed: self.enclosed,
            parts: self
                .parts
                .iter()
                .map(|p| CasePart {
                    triangles: p.triangles.iter().map(|t| t.rotated(r)).collect(),
                })
                .collect(),
        }
    }

    fn reversed(&self) -> CaseEntry {
        CaseEntry {
            parts: self
                .parts
                .iter()
                .map(|p| CasePart {
                    triangles: p.triangles.iter().map(TriangleRef::reversed).collect(),
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Checks every reference against the corner pattern `config`: crossings
    /// must sit on straddling edges, corners must belong to the enclosed
    /// component, face-tagged triangles must lie on their face and interface
    /// triangles must use crossings only.
    pub fn check_references(&self, config: Config) -> Result<(), String> {
        let Some(enclosed) = self.enclosed else {
            return if self.parts.is_empty() {
                Ok(())
            } else {
                Err("surface listed for a case without enclosed component".into())
            };
        };
        for t in self.triangles() {
            let [a, b, c] = t.nodes;
            if a == b || b == c || a == c {
                return Err(format!("{t}: repeated node"));
            }
            for n in t.nodes {
                match n {
                    NodeRef::Crossing(e) if !config.straddles(e) => {
                        return Err(format!("{t}: {e} does not straddle in {config}"));
                    }
                    NodeRef::Vertex(v) if config.component(v) != enclosed.bit() => {
                        return Err(format!("{t}: {v} is outside the enclosed component"));
                    }
                    NodeRef::Vertex(_) if t.is_interface() => {
                        return Err(format!("{t}: interface triangle uses a corner"));
                    }
                    _ => {}
                }
                if let Tag::Face(f) = t.tag {
                    if !n.on_face(f) {
                        return Err(format!("{t}: {n} is not on face {f}"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A correction to the base triangle lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Erratum {
    pub case_id: u8,
    pub index: usize,
    pub listed: TriangleRef,
    pub corrected: TriangleRef,
    pub note: &'static str,
}

mod data {
    use super::{NodeRef, Tag, TriangleRef};
    use crate::topology::{EdgeId, Face, VertexId};

    const fn v(i: u8) -> NodeRef {
        NodeRef::Vertex(VertexId::from_u8(i))
    }
    const fn e(i: u8) -> NodeRef {
        NodeRef::Crossing(EdgeId::from_u8(i))
    }
    pub(super) const fn t(a: NodeRef, b: NodeRef, c: NodeRef, tag: Tag) -> TriangleRef {
        TriangleRef {
            nodes: [a, b, c],
            tag,
        }
    }

    const V0: NodeRef = v(0);
    const V1: NodeRef = v(1);
    const V2: NodeRef = v(2);
    pub(super) const V3: NodeRef = v(3);
    const V4: NodeRef = v(4);
    const V5: NodeRef = v(5);
    const V6: NodeRef = v(6);
    pub(super) const V7: NodeRef = v(7);
    const E0: NodeRef = e(0);
    const E1: NodeRef = e(1);
    const E2: NodeRef = e(2);
    pub(super) const E3: NodeRef = e(3);
    const E4: NodeRef = e(4);
    const E5: NodeRef = e(5);
    const E6: NodeRef = e(6);
    pub(super) const E7: NodeRef = e(7);
    const E8: NodeRef = e(8);
    const E9: NodeRef = e(9);
    const E10: NodeRef = e(10);
    const E11: NodeRef = e(11);

    const I: Tag = Tag::Interface;
    pub(super) const W: Tag = Tag::Face(Face::W);
    const E: Tag = Tag::Face(Face::E);
    const S: Tag = Tag::Face(Face::S);
    const N: Tag = Tag::Face(Face::N);
    const D: Tag = Tag::Face(Face::D);
    const U: Tag = Tag::Face(Face::U);

    pub(super) const VERBATIM_CASES: [&[TriangleRef]; 23] = [
        // Case 00: N/A
        &[],
        // Case 01
        &[
            t(E0, E3, E8, I), t(V0, E8, E3, W), t(V0, E0, E8, S), t(V0, E3, E0, D),
        ],
        // Case 02
        &[
            t(E3, E8, E9, I), t(E1, E3, E9, I), t(V0, E8, E3, W), t(V1, E1, E9, E),
            t(V0, E9, E8, S), t(V0, V1, E9, S), t(V0, E3, E1, D), t(V0, E1, V1, D),
        ],
        // Case 03
        &[
            t(E0, E3, E8, I), t(V0, E8, E3, W), t(V0, E0, E8, S), t(V0, E3, E0, D),
            t(E4, E5, E9, I), t(V5, E9, E5, E), t(V5, E4, E9, S), t(V5, E5, E4, U),
        ],
        // Case 04
        &[
            t(E0, E3, E8, I), t(V0, E8, E3, W), t(V0, E0, E8, S), t(V0, E3, E0, D),
            t(E5, E6, E10, I), t(V6, E5, E10, E), t(V6, E10, E6, N), t(V6, E6, E5, U),
        ],
        // Case 05
        &[
            t(E0, E9, E3, I), t(E9, E11, E3, I), t(E9, E10, E11, I), t(V3, E3, E11, W),
            t(V1, V2, E9, E), t(V2, E10, E9, E), t(V1, E9, E0, S), t(V2, V3, E11, N),
            t(V2, E11, E10, N), t(V1, E0, V2, D), t(V2, E0, E3, D), t(V2, E3, V3, D),
        ],
        // Case 06
        &[
            t(E3, E8, E1, I), t(E1, E8, E9, I), t(V0, E8, E3, W), t(V1, E1, E9, E),
            t(V0, E9, E8, S), t(V0, V1, E9, S), t(V0, E3, E1, D), t(V0, E1, V1, D),
            t(E5, E6, E10, I), t(V6, E5, E10, E), t(V6, E10, E6, N), t(V6, E6, E5, U),
        ],
        // Case 07
        &[
            t(E4, E8, E7, I), t(V4, E7, E8, W), t(V4, E8, E4, S), t(V4, E4, E7, U),
            t(E0, E9, E1, I), t(V1, E1, E9, E), t(V1, E9, E0, S), t(V1, E0, E1, D),
            t(E5, E6, E10, I), t(V6, E5, E10, E), t(V6, E10, E6, N), t(V6, E6, E5, U),
        ],
        // Case 08
        &[
            t(E8, E10, E11, I), t(E8, E9, E10, I), t(V0, E8, E11, W), t(V0, E11, V3, W),
            t(V1, E10, E9, E), t(V1, V2, E10, E), t(V0, E9, E8, S), t(V0, V1, E9, S),
            t(V2, V3, E10, N), t(V3, E11, E10, N), t(V0, V3, V2, D), t(V0, V2, V1, D),
        ],
        // Case 09
        &[
            t(E0, E7, E8, I), t(E0, E6, E7, I), t(E0, E1, E6, I), t(E1, E10, E6, I),
            t(V3, V0, E8, W), t(V3, E8, E7, W), t(V3, E7, V7, W), t(V2, E10, E1, E),
            t(V0, E0, E8, S), t(V3, V7, E6, N), t(V3, E6, E10, N), t(V3, E10, V2, N),
            t(V3, E0, V0, D), t(V3, E1, E0, D), t(V3, V2, E1, D), t(V7, E7, E6, U),
        ],
        // Case 10
        &[
            t(E3, E6, E7, I), t(E2, E6, E3, I), t(V3, E3, E7, W), t(V3, E7, V7, W),
            t(V3, V7, E6, N), t(V3, E6, E2, N), t(V3, E2, E3, D), t(V7, E7, E6, U),
            t(E0, E4, E5, I), t(E0, E5, E1, I), t(V1, E5, V5, E), t(V1, E1, E5, E),
            t(V1, V5, E4, S), t(V1, E4, E0, S), t(V1, E0, E1, D), t(V5, E5, E4, U),
        ],
        // Case 11
        &[
            t(E0, E11, E8, I), t(E0, E5, E11, I), t(E0, E1, E5, I), t(E5, E6, E11, I),
            t(V0, E8, E11, W), t(V0, E11, V3, W), t(V2, E5, E1, E), t(V2, V6, E5, E),
            t(V0, E0, E8, S), t(V2, V3, E11, N), t(V2, E11, E6, N), t(V2, E6, V6, N),
            t(V3, E0, V0, D), t(V3, E1, E0, D), t(V3, V2, E1, D), t(V6, E6, E5, U),
        ],
        // Case 12
        &[
            t(E4, E8, E7, I), t(V4, E7, E8, W), t(V4, E8, E4, S), t(V4, E4, E7, U),
            t(E0, E9, E3, I), t(E3, E9, E11, I), t(E9, E10, E11, I), t(V3, E3, E11, W),
            t(V1, E10, E9, E), t(V1, V2, E10, E), t(V1, E9, E0, S), t(V2, V3, E11, N),
            t(V2, E11, E10, N), t(V1, E0, V2, D), t(V2, E0, E3, D), t(V2, E3, V3, D),
        ],
        // Case 13
        &[
            t(E4, E8, E7, I), t(V4, E7, E8, W), t(V4, E8, E4, S), t(V4, E4, E7, U),
            t(E0, E9, E1, I), t(V1, E1, E9, E), t(V1, E9, E0, S), t(V1, E0, E1, D),
            t(E5, E6, E10, I), t(V6, E5, E10, E), t(V6, E10, E6, N), t(V6, E6, E5, U),
            t(E2, E11, E3, I), t(V3, E3, E11, W), t(V3, E11, E2, N), t(V3, E2, E3, D),
        ],
        // Case 14
        &[
            t(E0, E7, E3, I), t(E0, E10, E7, I), t(E0, E9, E10, I), t(E6, E7, E10, I),
            t(V7, E3, E7, W), t(V3, E3, E7, W), t(V1, V2, E9, E), t(V2, E10, E9, E),
            t(V1, E9, E0, S), t(V3, V7, E6, N), t(V3, E6, E10, N), t(V2, V3, E10, N),
            t(V2, E3, V3, D), t(V2, E0, E3, D), t(V2, V1, E0, D), t(V7, E7, E6, U),
        ],
        // Case 15
        &[
            t(E0, E7, E8, I), t(E0, E6, E7, I), t(E0, E1, E6, I), t(E1, E10, E6, I),
            t(V3, V0, E8, W), t(V3, E8, E7, W), t(V3, E7, V7, W), t(V2, E10, E1, E),
            t(V0, E0, E8, S), t(V3, V7, E6, N), t(V3, E6, E10, N), t(V3, E10, V2, N),
            t(V3, E0, V0, D), t(V3, E1, E0, D), t(V3, V2, E1, D), t(V7, E7, E6, U),
            t(E4, E5, E9, I), t(V5, E9, E5, E), t(V5, E4, E9, S), t(V5, E5, E4, U),
        ],
        // Case 16
        &[
            t(E1, E10, E3, I), t(E3, E10, E6, I), t(E3, E6, E8, I), t(E5, E8, E6, I),
            t(E5, E9, E8, I), t(V4, V7, E8, W), t(V7, E3, E8, W), t(V3, E3, V7, W),
            t(V2, E10, E1, E), t(V5, E9, E5, E), t(V4, E8, V5, S), t(V5, E8, E9, S),
            t(V2, V3, E10, N), t(V3, E6, E10, N), t(V3, V7, E6, N), t(V2, E1, E3, D),
            t(V2, E3, V3, D), t(V4, V5, E5, U), t(V4, E5, E6, U), t(V4, E6, V7, U),
        ],
        // Case 17
        &[
            t(E0, E9, E3, I), t(E3, E9, E11, I), t(E9, E10, E11, I), t(V3, E3, E11, W),
            t(V1, V2, E9, E), t(V2, E10, E9, E), t(V1, E9, E0, S), t(V2, V3, E10, N),
            t(V3, E11, E10, N), t(V1, E0, V2, D), t(V2, E0, E3, D), t(V2, E3, V3, D),
        ],
        // Case 18
        &[
            t(E0, E3, E8, I), t(V0, E8, E3, W), t(V0, E0, E8, S), t(V0, E3, E0, D),
            t(E5, E6, E10, I), t(V6, E5, E10, E), t(V6, E10, E6, N), t(V6, E6, E5, U),
        ],
        // Case 19
        &[
            t(E0, E3, E9, I), t(E3, E8, E4, I), t(E3, E4, E5, I), t(E3, E5, E9, I),
            t(V0, E8, E3, W), t(V5, E9, E5, E), t(V0, E0, E8, S), t(E0, E9, E8, S),
            t(E4, E8, E9, S), t(V5, E4, E9, S), t(V0, E3, E0, D), t(V5, E5, E4, U),
        ],
        // Case 20
        &[
            t(E3, E8, E9, I), t(E1, E3, E9, I), t(V0, E8, E3, W), t(V1, E1, E9, E),
            t(V0, E9, E8, S), t(V0, V1, E9, S), t(V0, E3, E1, D), t(V0, E1, V1, D),
        ],
        // Case 21
        &[
            t(E0, E3, E8, I), t(V0, E8, E3, W), t(V0, E0, E8, S), t(V0, E3, E0, D),
        ],
        // Case 22: N/A
        &[],
    ];
}

/// Base lists that fail closure. Case 14 lists its West-face quad as
/// `{v7,e3,e7}` and `{v3,e3,e7}`, which overlap along `e3 -> e7` and leave
/// the `v3-v7` side uncovered; replacing the second node triple with
/// `{v3,e3,v7}` tiles the quad `v3,e3,e7,v7` with the same outward winding.
pub const ERRATA: [Erratum; 1] = [Erratum {
    case_id: 14,
    index: 5,
    listed: data::t(data::V3, data::E3, data::E7, data::W),
    corrected: data::t(data::V3, data::E3, data::V7, data::W),
    note: "West-face triangles of case 14 overlap; second triangle re-cut along e3-v7",
}];

pub const CASE_COUNT: usize = 23;

/// The triangle list as given, before errata.
pub fn verbatim_case(case_id: u8) -> Result<&'static [TriangleRef], TableError> {
    data::VERBATIM_CASES
        .get(case_id as usize)
        .copied()
        .ok_or(TableError::UnknownCase(case_id))
}

/// Lists are written part by part, each part starting with its interface
/// triangles, so a new part begins wherever an interface triangle follows a
/// face triangle.
fn split_parts(triangles: &[TriangleRef]) -> Vec<CasePart> {
    let mut parts: Vec<CasePart> = Vec::new();
    for (i, t) in triangles.iter().enumerate() {
        let starts_part = i == 0 || (t.is_interface() && !triangles[i - 1].is_interface());
        if starts_part {
            parts.push(CasePart::default());
        }
        parts.last_mut().expect("part started").triangles.push(*t);
    }
    parts
}

/// Base case `case_id` with errata applied, split into connected parts.
pub fn base_case(case_id: u8) -> Result<CaseEntry, TableError> {
    let mut triangles = verbatim_case(case_id)?.to_vec();
    for fix in ERRATA.iter().filter(|f| f.case_id == case_id) {
        debug_assert_eq!(triangles[fix.index], fix.listed);
        triangles[fix.index] = fix.corrected;
    }
    let enclosed = match case_id {
        0 | 22 => None,
        1..=16 => Some(Component::One),
        _ => Some(Component::Zero),
    };
    Ok(CaseEntry {
        case_id,
        enclosed,
        parts: split_parts(&triangles),
    })
}

/// Recovers which corners carry component 1 in a base case from the corners
/// its triangles reference, and checks that the referenced crossings are
/// exactly the straddling edges of that pattern.
pub fn base_pattern(entry: &CaseEntry) -> Result<Config, TableError> {
    let fail = |detail: String| TableError::InconsistentCase {
        case: entry.case_id,
        detail,
    };
    let Some(enclosed) = entry.enclosed else {
        return match (entry.case_id, entry.parts.is_empty()) {
            (0, true) => Ok(Config::EMPTY),
            (22, true) => Ok(Config::FULL),
            _ => Err(fail("unexpected surface for a trivial case".into())),
        };
    };
    let referenced = Config::from_vertices(entry.triangles().flat_map(|t| {
        t.nodes.into_iter().filter_map(|n| match n {
            NodeRef::Vertex(v) => Some(v),
            NodeRef::Crossing(_) => None,
        })
    }));
    let pattern = match enclosed {
        Component::One => referenced,
        Component::Zero => referenced.complement(),
    };
    entry.check_references(pattern).map_err(fail)?;
    for e in EdgeId::all() {
        let used = entry
            .triangles()
            .any(|t| t.nodes.contains(&NodeRef::Crossing(e)));
        if pattern.straddles(e) && !used {
            return Err(fail(format!("straddling edge {e} has no crossing in the list")));
        }
    }
    Ok(pattern)
}

/// A segment shared by the wrong number of triangles, or with mismatched
/// directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentViolation {
    pub part: usize,
    pub a: NodeRef,
    pub b: NodeRef,
    /// Triangles traversing `a -> b`.
    pub forward: usize,
    /// Triangles traversing `b -> a`.
    pub backward: usize,
}

impl SegmentViolation {
    pub fn incident(&self) -> usize {
        self.forward + self.backward
    }
}

impl fmt::Display for SegmentViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "part {}: segment {}-{} has {} incident triangles ({} forward, {} backward)",
            self.part,
            self.a,
            self.b,
            self.incident(),
            self.forward,
            self.backward
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartClosure {
    pub triangles: usize,
    pub segments: usize,
    pub connected: bool,
    /// |sum of n dA| over the realized part relative to its total area; zero
    /// for a closed surface up to rounding.
    pub normal_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WatertightReport {
    pub parts: Vec<PartClosure>,
    pub violations: Vec<SegmentViolation>,
}

impl WatertightReport {
    pub fn is_watertight(&self) -> bool {
        self.violations.is_empty()
            && self
                .parts
                .iter()
                .all(|p| p.connected && p.normal_residual <= 1e-12)
    }
}

/// Position of a node in the unit cube for the given crossing parameters,
/// measured from each edge's canonical first endpoint.
pub fn unit_node_position(node: NodeRef, params: &[f64; 12]) -> Point3 {
    let corner = |v: VertexId| Point3::from(v.offset().map(f64::from));
    match node {
        NodeRef::Vertex(v) => corner(v),
        NodeRef::Crossing(e) => {
            let (a, b) = e.endpoints();
            corner(a).lerp(corner(b), params[e.index()])
        }
    }
}

/// Every undirected segment of each part must be used by exactly one
/// triangle in each direction, and each part must be connected.
pub fn validate_watertight(entry: &CaseEntry, params: &[f64; 12]) -> WatertightReport {
    let mut report = WatertightReport::default();
    for (index, part) in entry.parts.iter().enumerate() {
        let mut directed: BTreeMap<(NodeRef, NodeRef), usize> = BTreeMap::new();
        for t in &part.triangles {
            for k in 0..3 {
                *directed.entry((t.nodes[k], t.nodes[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut undirected: BTreeMap<(NodeRef, NodeRef), (usize, usize)> = BTreeMap::new();
        for (&(a, b), &n) in &directed {
            let (key, forward) = if a < b { ((a, b), true) } else { ((b, a), false) };
            let slot = undirected.entry(key).or_default();
            if forward {
                slot.0 += n;
            } else {
                slot.1 += n;
            }
        }
        for (&(a, b), &(forward, backward)) in &undirected {
            if forward != 1 || backward != 1 {
                report.violations.push(SegmentViolation {
                    part: index,
                    a,
                    b,
                    forward,
                    backward,
                });
            }
        }

        let (mut area, mut normal) = (0.0, Point3::ZERO);
        for t in &part.triangles {
            let [p0, p1, p2] = t.nodes.map(|n| unit_node_position(n, params));
            let m = triangle_measures(p0, p1, p2);
            area += m.area;
            normal += m.normal;
        }
        let normal_residual = if area > 0.0 { normal.norm() / area } else { 0.0 };

        report.parts.push(PartClosure {
            triangles: part.triangles.len(),
            segments: undirected.len(),
            connected: is_connected(&part.triangles),
            normal_residual,
        });
    }
    report
}

fn is_connected(triangles: &[TriangleRef]) -> bool {
    if triangles.is_empty() {
        return true;
    }
    // Triangles are adjacent when they share a segment.
    let mut owners: HashMap<(NodeRef, NodeRef), Vec<usize>> = HashMap::new();
    for (i, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t.nodes[k], t.nodes[(k + 1) % 3]);
            owners.entry((a.min(b), a.max(b))).or_default().push(i);
        }
    }
    let mut seen = vec![false; triangles.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        let t = &triangles[i];
        for k in 0..3 {
            let (a, b) = (t.nodes[k], t.nodes[(k + 1) % 3]);
            for &j in &owners[&(a.min(b), a.max(b))] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// One resolved lookup entry and where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    pub config: Config,
    pub case_id: u8,
    /// Index into the rotation list.
    pub rotation_index: usize,
    pub entry: CaseEntry,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildReport {
    pub base_patterns: [Config; CASE_COUNT],
    pub orbit_sizes: [usize; CASE_COUNT],
    /// Set when every listed surface came out inward and the whole table
    /// was re-wound.
    pub winding_flipped: bool,
    pub errata: Vec<Erratum>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupTable {
    entries: Vec<TableEntry>,
    report: BuildReport,
}

impl LookupTable {
    /// Resolves all 256 configs against the base cases and validates the
    /// result: orbit structure, references, winding and closure.
    pub fn build() -> Result<LookupTable, TableError> {
        let bases: Vec<CaseEntry> = (0..CASE_COUNT as u8)
            .map(base_case)
            .collect::<Result<_, _>>()?;
        let mut base_patterns = [Config::EMPTY; CASE_COUNT];
        for (slot, base) in base_patterns.iter_mut().zip(&bases) {
            *slot = base_pattern(base)?;
        }

        let rots = rotations();
        let mut owner: [Option<u8>; 256] = [None; 256];
        let mut orbit_sizes = [0usize; CASE_COUNT];
        for (case_id, &pattern) in base_patterns.iter().enumerate() {
            for r in rots {
                let c = r.rotate_config(pattern);
                match owner[c.0 as usize] {
                    None => {
                        owner[c.0 as usize] = Some(case_id as u8);
                        orbit_sizes[case_id] += 1;
                    }
                    Some(other) if other as usize != case_id => {
                        return Err(TableError::OrbitMismatch(format!(
                            "cases {other:02} and {case_id:02} share config {c}"
                        )));
                    }
                    Some(_) => {}
                }
            }
        }

        let mut entries = Vec::with_capacity(256);
        for bits in 0..=255u8 {
            let config = Config(bits);
            let case_id = owner[bits as usize].ok_or(TableError::Unresolved(config))?;
            let pattern = base_patterns[case_id as usize];
            let rotation_index = rots
                .iter()
                .position(|r| r.rotate_config(pattern) == config)
                .ok_or(TableError::Unresolved(config))?;
            let entry = bases[case_id as usize].rotated(&rots[rotation_index]);
            entries.push(TableEntry {
                config,
                case_id,
                rotation_index,
                entry,
            });
        }

        let (positive, negative) = winding_census(&entries);
        let winding_flipped = match (positive, negative) {
            (_, 0) => false,
            (0, _) => {
                for e in &mut entries {
                    e.entry = e.entry.reversed();
                }
                true
            }
            _ => return Err(TableError::MixedWinding { positive, negative }),
        };

        let mid = [0.5; 12];
        for e in &entries {
            e.entry
                .check_references(e.config)
                .map_err(|detail| TableError::NotWatertight {
                    config: e.config,
                    detail,
                })?;
            let closure = validate_watertight(&e.entry, &mid);
            if !closure.is_watertight() {
                let detail = closure
                    .violations
                    .first()
                    .map(ToString::to_string)
                    .unwrap_or_else(|| "disconnected part or open surface".into());
                return Err(TableError::NotWatertight {
                    config: e.config,
                    detail,
                });
            }
        }

        Ok(LookupTable {
            entries,
            report: BuildReport {
                base_patterns,
                orbit_sizes,
                winding_flipped,
                errata: ERRATA.to_vec(),
            },
        })
    }

    pub fn entry(&self, config: Config) -> &TableEntry {
        &self.entries[config.0 as usize]
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn report(&self) -> &BuildReport {
        &self.report
    }

    /// `(case id, rotation index)` for a config.
    pub fn classify(&self, config: Config) -> (u8, usize) {
        let e = self.entry(config);
        (e.case_id, e.rotation_index)
    }

    /// Text listing of every entry: config, provenance and triangles.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let _ = write!(
                s,
                "{} {:08b} case {:02} rotation {:02}",
                e.config, e.config.0, e.case_id, e.rotation_index
            );
            match e.entry.enclosed {
                Some(c) => {
                    let _ = writeln!(s, " component {}", c.bit());
                }
                None => {
                    let _ = writeln!(s, " empty");
                }
            }
            for (i, part) in e.entry.parts.iter().enumerate() {
                let tris: Vec<String> = part.triangles.iter().map(ToString::to_string).collect();
                let _ = writeln!(s, "  part {i}: {}", tris.join(", "));
            }
        }
        s
    }
}

fn winding_census(entries: &[TableEntry]) -> (usize, usize) {
    let mid = [0.5; 12];
    let (mut positive, mut negative) = (0, 0);
    for e in entries {
        for part in &e.entry.parts {
            let volume: f64 = part
                .triangles
                .iter()
                .map(|t| {
                    let [a, b, c] = t.nodes.map(|n| unit_node_position(n, &mid));
                    triangle_measures(a, b, c).volume
                })
                .sum();
            if volume > 0.0 {
                positive += 1;
            } else {
                negative += 1;
            }
        }
    }
    (positive, negative)
}

/// The shared lookup table, built on first use.
///
/// Panics if the built-in case data fails validation, which the unit tests
/// rule out.
pub fn lookup_table() -> &'static LookupTable {
    static TABLE: OnceLock<LookupTable> = OnceLock::new();
    TABLE.get_or_init(|| LookupTable::build().expect("built-in case tables are consistent"))
}

pub fn classify_config(config: Config) -> (u8, usize) {
    lookup_table().classify(config)
}
