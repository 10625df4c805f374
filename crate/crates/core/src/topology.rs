//! Cube labeling and rotation symmetry.
//!
//! Corners sit at the unit-cube positions
//!
//! ```text
//!   v0 = (0,0,0)  v1 = (1,0,0)  v2 = (1,1,0)  v3 = (0,1,0)
//!   v4 = (0,0,1)  v5 = (1,0,1)  v6 = (1,1,1)  v7 = (0,1,1)
//! ```
//!
//! Edges `e0..e3` walk the bottom loop, `e4..e7` the top loop and `e8..e11`
//! are the verticals. Faces are named by compass direction: `W`/`E` are
//! x = 0/1, `S`/`N` are y = 0/1 and `D`/`U` are z = 0/1.
//!
//! A rotation is stored as the vertex permutation `p` listed in the rotation
//! table: after rotating, position `i` holds the vertex that was at `p[i]`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("vertex index {0} out of range 0..8")]
    BadVertex(usize),
    #[error("edge index {0} out of range 0..12")]
    BadEdge(usize),
    #[error("unknown face letter {0:?}")]
    BadFace(char),
    #[error("permutation {0:?} is not a bijection of the 8 corners")]
    NotBijection([u8; 8]),
    #[error("permutation {perm:?} sends edge e{edge} onto non-edge corners v{a}, v{b}")]
    NotAnEdge { perm: [u8; 8], edge: usize, a: u8, b: u8 },
    #[error("permutation {perm:?} does not map face {face} onto a face")]
    NotAFace { perm: [u8; 8], face: Face },
}

/// A cube corner `v0..v7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(u8);

impl VertexId {
    pub const COUNT: usize = 8;

    pub const fn new(index: u8) -> Option<Self> {
        if index < 8 {
            Some(VertexId(index))
        } else {
            None
        }
    }

    pub(crate) const fn from_u8(index: u8) -> Self {
        assert!(index < 8);
        VertexId(index)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = VertexId> {
        (0..8).map(VertexId)
    }

    /// Unit-cube coordinates of this corner.
    pub const fn offset(self) -> [u8; 3] {
        const OFFSETS: [[u8; 3]; 8] = [
            [0, 0, 0],
            [1, 0, 0],
            [1, 1, 0],
            [0, 1, 0],
            [0, 0, 1],
            [1, 0, 1],
            [1, 1, 1],
            [0, 1, 1],
        ];
        OFFSETS[self.0 as usize]
    }

    pub fn from_offset(offset: [u8; 3]) -> Option<Self> {
        VertexId::all().find(|v| v.offset() == offset)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A cube edge `e0..e11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(u8);

const EDGE_ENDPOINTS: [[u8; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

impl EdgeId {
    pub const COUNT: usize = 12;

    pub const fn new(index: u8) -> Option<Self> {
        if index < 12 {
            Some(EdgeId(index))
        } else {
            None
        }
    }

    pub(crate) const fn from_u8(index: u8) -> Self {
        assert!(index < 12);
        EdgeId(index)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = EdgeId> {
        (0..12).map(EdgeId)
    }

    /// Canonical ordered endpoints, following the loop direction of the labeling.
    pub const fn endpoints(self) -> (VertexId, VertexId) {
        let [a, b] = EDGE_ENDPOINTS[self.0 as usize];
        (VertexId(a), VertexId(b))
    }

    /// Endpoints ordered by increasing coordinate along the edge's axis.
    pub fn low_high(self) -> (VertexId, VertexId) {
        let (a, b) = self.endpoints();
        let axis = self.axis();
        if a.offset()[axis] < b.offset()[axis] {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// 0, 1 or 2 for edges parallel to x, y or z.
    pub fn axis(self) -> usize {
        let (a, b) = self.endpoints();
        let (pa, pb) = (a.offset(), b.offset());
        (0..3).find(|&k| pa[k] != pb[k]).expect("edge endpoints differ")
    }

    /// The edge joining `a` and `b` in either order, if they are adjacent.
    pub fn between(a: VertexId, b: VertexId) -> Option<EdgeId> {
        EdgeId::all().find(|e| {
            let (p, q) = e.endpoints();
            (p == a && q == b) || (p == b && q == a)
        })
    }

    pub fn touches(self, v: VertexId) -> bool {
        let (a, b) = self.endpoints();
        a == v || b == v
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Face {
    W,
    E,
    S,
    N,
    D,
    U,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::W, Face::E, Face::S, Face::N, Face::D, Face::U];

    /// Corner cycle as written in the labeling convention.
    pub const fn corners(self) -> [VertexId; 4] {
        let c = match self {
            Face::W => [0, 3, 7, 4],
            Face::E => [1, 2, 6, 5],
            Face::S => [0, 1, 5, 4],
            Face::N => [3, 2, 6, 7],
            Face::D => [0, 1, 2, 3],
            Face::U => [4, 5, 6, 7],
        };
        [VertexId(c[0]), VertexId(c[1]), VertexId(c[2]), VertexId(c[3])]
    }

    /// Axis normal to the face and which side (0 = low, 1 = high) it sits on.
    pub const fn axis_side(self) -> (usize, u8) {
        match self {
            Face::W => (0, 0),
            Face::E => (0, 1),
            Face::S => (1, 0),
            Face::N => (1, 1),
            Face::D => (2, 0),
            Face::U => (2, 1),
        }
    }

    pub fn from_axis_side(axis: usize, side: u8) -> Face {
        Face::ALL
            .into_iter()
            .find(|f| f.axis_side() == (axis, side))
            .expect("axis < 3 and side < 2")
    }

    pub fn opposite(self) -> Face {
        let (axis, side) = self.axis_side();
        Face::from_axis_side(axis, 1 - side)
    }

    pub fn contains_vertex(self, v: VertexId) -> bool {
        let (axis, side) = self.axis_side();
        v.offset()[axis] == side
    }

    pub fn contains_edge(self, e: EdgeId) -> bool {
        let (a, b) = e.endpoints();
        self.contains_vertex(a) && self.contains_vertex(b)
    }

    pub const fn letter(self) -> char {
        match self {
            Face::W => 'W',
            Face::E => 'E',
            Face::S => 'S',
            Face::N => 'N',
            Face::D => 'D',
            Face::U => 'U',
        }
    }

    pub fn from_letter(c: char) -> Result<Face, TopologyError> {
        Face::ALL
            .into_iter()
            .find(|f| f.letter() == c)
            .ok_or(TopologyError::BadFace(c))
    }

    pub const fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Corner component pattern; bit `i` is the component (0 or 1) of `vi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Config(pub u8);

impl Config {
    pub const EMPTY: Config = Config(0x00);
    pub const FULL: Config = Config(0xFF);

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub const fn component(self, v: VertexId) -> u8 {
        (self.0 >> v.0) & 1
    }

    pub const fn complement(self) -> Config {
        Config(!self.0)
    }

    pub fn from_vertices(vs: impl IntoIterator<Item = VertexId>) -> Config {
        Config(vs.into_iter().fold(0u8, |acc, v| acc | (1 << v.0)))
    }

    pub fn vertices(self) -> impl Iterator<Item = VertexId> {
        VertexId::all().filter(move |&v| self.component(v) == 1)
    }

    pub fn count_ones(self) -> u32 {
        self.0.count_ones()
    }

    /// True if the edge joins corners of different components.
    pub fn straddles(self, e: EdgeId) -> bool {
        let (a, b) = e.endpoints();
        self.component(a) != self.component(b)
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{:02X}", self.0)
    }
}

pub fn edge_endpoints(e: EdgeId) -> (VertexId, VertexId) {
    e.endpoints()
}

/// Edge permutation induced by mapping each corner `v` to `perm[v]`.
pub fn induced_edge_perm(perm: [u8; 8]) -> Result<[EdgeId; 12], TopologyError> {
    check_bijection(perm)?;
    let mut out = [EdgeId(0); 12];
    for e in EdgeId::all() {
        let (a, b) = e.endpoints();
        let (ia, ib) = (perm[a.index()], perm[b.index()]);
        out[e.index()] = EdgeId::between(VertexId(ia), VertexId(ib)).ok_or(
            TopologyError::NotAnEdge {
                perm,
                edge: e.index(),
                a: ia,
                b: ib,
            },
        )?;
    }
    Ok(out)
}

/// Face permutation induced by mapping each corner `v` to `perm[v]`.
pub fn induced_face_perm(perm: [u8; 8]) -> Result<[Face; 6], TopologyError> {
    check_bijection(perm)?;
    let mut out = [Face::W; 6];
    for face in Face::ALL {
        let image: Vec<VertexId> = face
            .corners()
            .iter()
            .map(|v| VertexId(perm[v.index()]))
            .collect();
        out[face.index()] = Face::ALL
            .into_iter()
            .find(|g| image.iter().all(|&v| g.contains_vertex(v)))
            .ok_or(TopologyError::NotAFace { perm, face })?;
    }
    Ok(out)
}

fn check_bijection(perm: [u8; 8]) -> Result<(), TopologyError> {
    let mut seen = 0u8;
    for &p in &perm {
        if p >= 8 || seen & (1 << p) != 0 {
            return Err(TopologyError::NotBijection(perm));
        }
        seen |= 1 << p;
    }
    Ok(())
}

fn invert(perm: [u8; 8]) -> [u8; 8] {
    let mut inv = [0u8; 8];
    for (i, &p) in perm.iter().enumerate() {
        inv[p as usize] = i as u8;
    }
    inv
}

/// A proper rotation of the cube together with its induced edge and face maps.
///
/// `perm[i]` is the corner whose contents end up at corner `i`. The
/// `moved_*` maps send a label of the unrotated cube to the label it occupies
/// afterwards, which is what rewriting a triangulation needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rotation {
    perm: [u8; 8],
    moved_vertex: [u8; 8],
    moved_edge: [EdgeId; 12],
    moved_face: [Face; 6],
}

impl Rotation {
    pub fn from_perm(perm: [u8; 8]) -> Result<Rotation, TopologyError> {
        check_bijection(perm)?;
        let moved_vertex = invert(perm);
        Ok(Rotation {
            perm,
            moved_vertex,
            moved_edge: induced_edge_perm(moved_vertex)?,
            moved_face: induced_face_perm(moved_vertex)?,
        })
    }

    pub fn identity() -> Rotation {
        Rotation::from_perm([0, 1, 2, 3, 4, 5, 6, 7]).expect("identity is a rotation")
    }

    pub fn perm(&self) -> [u8; 8] {
        self.perm
    }

    pub fn is_identity(&self) -> bool {
        self.perm == [0, 1, 2, 3, 4, 5, 6, 7]
    }

    pub fn move_vertex(&self, v: VertexId) -> VertexId {
        VertexId(self.moved_vertex[v.index()])
    }

    pub fn move_edge(&self, e: EdgeId) -> EdgeId {
        self.moved_edge[e.index()]
    }

    pub fn move_face(&self, f: Face) -> Face {
        self.moved_face[f.index()]
    }

    /// `self.then(other)` applies `self` first, then `other`.
    pub fn then(&self, other: &Rotation) -> Rotation {
        let mut perm = [0u8; 8];
        for (i, slot) in perm.iter_mut().enumerate() {
            *slot = self.perm[other.perm[i] as usize];
        }
        Rotation::from_perm(perm).expect("composition of rotations is a rotation")
    }

    pub fn inverse(&self) -> Rotation {
        Rotation::from_perm(self.moved_vertex).expect("inverse of a rotation is a rotation")
    }

    /// Result bit `i` is the input bit at `perm[i]`.
    pub fn rotate_config(&self, c: Config) -> Config {
        let mut out = 0u8;
        for i in 0..8 {
            out |= ((c.0 >> self.perm[i]) & 1) << i;
        }
        Config(out)
    }
}

pub fn rotate_config(r: &Rotation, c: Config) -> Config {
    r.rotate_config(c)
}

/// The 24 proper rotations of the cube, in table order.
pub const ROTATION_TABLE: [[u8; 8]; 24] = [
    [0, 1, 2, 3, 4, 5, 6, 7], // self
    [4, 5, 1, 0, 7, 6, 2, 3], // opposite face: x 90
    [7, 6, 5, 4, 3, 2, 1, 0], // opposite face: x 180
    [3, 2, 6, 7, 0, 1, 5, 4], // opposite face: x 270
    [4, 0, 3, 7, 5, 1, 2, 6], // opposite face: y 90
    [5, 4, 7, 6, 1, 0, 3, 2], // opposite face: y 180
    [1, 5, 6, 2, 0, 4, 7, 3], // opposite face: y 270
    [3, 0, 1, 2, 7, 4, 5, 6], // opposite face: z 90
    [2, 3, 0, 1, 6, 7, 4, 5], // opposite face: z 180
    [1, 2, 3, 0, 5, 6, 7, 4], // opposite face: z 270
    [0, 4, 5, 1, 3, 7, 6, 2], // opposite vertices: v0-v6
    [0, 3, 7, 4, 1, 2, 6, 5], // opposite vertices: v0-v6
    [2, 1, 5, 6, 3, 0, 4, 7], // opposite vertices: v1-v7
    [5, 1, 0, 4, 6, 2, 3, 7], // opposite vertices: v1-v7
    [5, 6, 2, 1, 4, 7, 3, 0], // opposite vertices: v2-v4
    [7, 3, 2, 6, 4, 0, 1, 5], // opposite vertices: v2-v4
    [2, 6, 7, 3, 1, 5, 4, 0], // opposite vertices: v3-v5
    [7, 4, 0, 3, 6, 5, 1, 2], // opposite vertices: v3-v5
    [1, 0, 4, 5, 2, 3, 7, 6], // opposite lines: e0-e6
    [3, 7, 4, 0, 2, 6, 5, 1], // opposite lines: e3-e5
    [6, 7, 3, 2, 5, 4, 0, 1], // opposite lines: e2-e4
    [6, 2, 1, 5, 7, 3, 0, 4], // opposite lines: e1-e7
    [4, 7, 6, 5, 0, 3, 2, 1], // opposite lines: e8-e10
    [6, 5, 4, 7, 2, 1, 0, 3], // opposite lines: e9-e11
];

/// The 24 rotations, built once from [`ROTATION_TABLE`].
pub fn rotations() -> &'static [Rotation; 24] {
    use std::sync::OnceLock;
    static ROTATIONS: OnceLock<[Rotation; 24]> = OnceLock::new();
    ROTATIONS.get_or_init(|| {
        ROTATION_TABLE.map(|p| Rotation::from_perm(p).expect("rotation table entries are rotations"))
    })
}

/// A property of the rotation set that failed to hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupViolation {
    NotBijection { index: usize, perm: [u8; 8] },
    Duplicate { first: usize, second: usize, perm: [u8; 8] },
    MissingIdentity,
    NotClosed { a: usize, b: usize, product: [u8; 8] },
    EdgeMap { index: usize, perm: [u8; 8], detail: String },
    FaceMap { index: usize, perm: [u8; 8], detail: String },
    NotRigid { index: usize, perm: [u8; 8] },
    Improper { index: usize, perm: [u8; 8], determinant: i32 },
}

impl fmt::Display for GroupViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupViolation::NotBijection { index, perm } => {
                write!(f, "rotation {index} {perm:?}: not a bijection")
            }
            GroupViolation::Duplicate { first, second, perm } => {
                write!(f, "rotations {first} and {second} {perm:?}: not distinct")
            }
            GroupViolation::MissingIdentity => write!(f, "identity missing"),
            GroupViolation::NotClosed { a, b, product } => {
                write!(f, "composition of {a} and {b} gives {product:?}, not in the set")
            }
            GroupViolation::EdgeMap { index, perm, detail } => {
                write!(f, "rotation {index} {perm:?}: {detail}")
            }
            GroupViolation::FaceMap { index, perm, detail } => {
                write!(f, "rotation {index} {perm:?}: {detail}")
            }
            GroupViolation::NotRigid { index, perm } => {
                write!(f, "rotation {index} {perm:?}: not induced by an affine map of the cube")
            }
            GroupViolation::Improper { index, perm, determinant } => {
                write!(f, "rotation {index} {perm:?}: orientation determinant {determinant}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupReport {
    pub checked: usize,
    pub violations: Vec<GroupViolation>,
}

impl GroupReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Linear part of the corner map `v -> perm[v]` and whether the map is affine.
fn linear_part(perm: [u8; 8]) -> ([[i32; 3]; 3], bool) {
    let pos = |v: u8| VertexId(v).offset().map(i32::from);
    let base = pos(perm[0]);
    // Images of the unit axes: v1 = x, v3 = y, v4 = z.
    let mut cols = [[0i32; 3]; 3];
    for (k, &unit) in [1u8, 3, 4].iter().enumerate() {
        let p = pos(perm[unit as usize]);
        cols[k] = [p[0] - base[0], p[1] - base[1], p[2] - base[2]];
    }
    let affine = VertexId::all().all(|v| {
        let o = v.offset().map(i32::from);
        let img = pos(perm[v.index()]);
        (0..3).all(|r| base[r] + cols[0][r] * o[0] + cols[1][r] * o[1] + cols[2][r] * o[2] == img[r])
    });
    (cols, affine)
}

fn determinant(c: [[i32; 3]; 3]) -> i32 {
    // columns c[0], c[1], c[2]: det = c0 . (c1 x c2)
    let cross = [
        c[1][1] * c[2][2] - c[1][2] * c[2][1],
        c[1][2] * c[2][0] - c[1][0] * c[2][2],
        c[1][0] * c[2][1] - c[1][1] * c[2][0],
    ];
    c[0][0] * cross[0] + c[0][1] * cross[1] + c[0][2] * cross[2]
}

/// Checks that `perms` is the proper rotation group of the cube.
pub fn validate_rotation_group(perms: &[[u8; 8]]) -> GroupReport {
    let mut report = GroupReport {
        checked: perms.len(),
        violations: Vec::new(),
    };
    let valid: Vec<bool> = perms.iter().map(|&p| check_bijection(p).is_ok()).collect();
    for (index, &perm) in perms.iter().enumerate() {
        if !valid[index] {
            report.violations.push(GroupViolation::NotBijection { index, perm });
            continue;
        }
        if let Some(first) = perms[..index].iter().position(|&q| q == perm) {
            report.violations.push(GroupViolation::Duplicate {
                first,
                second: index,
                perm,
            });
        }
        if let Err(err) = induced_edge_perm(perm) {
            report.violations.push(GroupViolation::EdgeMap {
                index,
                perm,
                detail: err.to_string(),
            });
        }
        if let Err(err) = induced_face_perm(perm) {
            report.violations.push(GroupViolation::FaceMap {
                index,
                perm,
                detail: err.to_string(),
            });
        }
        let (cols, affine) = linear_part(perm);
        if !affine {
            report.violations.push(GroupViolation::NotRigid { index, perm });
        } else {
            let det = determinant(cols);
            if det != 1 {
                report.violations.push(GroupViolation::Improper {
                    index,
                    perm,
                    determinant: det,
                });
            }
        }
    }
    if !perms.contains(&[0, 1, 2, 3, 4, 5, 6, 7]) {
        report.violations.push(GroupViolation::MissingIdentity);
    }
    for (a, &pa) in perms.iter().enumerate() {
        for (b, &pb) in perms.iter().enumerate() {
            if !(valid[a] && valid[b]) {
                continue;
            }
            let product: [u8; 8] = std::array::from_fn(|i| pa[pb[i] as usize]);
            if !perms.contains(&product) {
                report.violations.push(GroupViolation::NotClosed { a, b, product });
            }
        }
    }
    report
}

/// Orbits of all 256 configurations under the rotation table, each sorted,
/// ordered by smallest member.
pub fn config_orbits() -> Vec<Vec<Config>> {
    let mut seen = [false; 256];
    let mut orbits = Vec::new();
    for c in 0..=255u8 {
        if seen[c as usize] {
            continue;
        }
        let mut orbit: Vec<Config> = rotations()
            .iter()
            .map(|r| r.rotate_config(Config(c)))
            .collect();
        orbit.sort();
        orbit.dedup();
        for m in &orbit {
            seen[m.0 as usize] = true;
        }
        orbits.push(orbit);
    }
    orbits
}

/// Text dump of the labeling, one item per line.
pub fn describe_labeling() -> String {
    use std::fmt::Write;
    let mut s = String::new();
    for v in VertexId::all() {
        let o = v.offset();
        let _ = writeln!(s, "{v} = ({}, {}, {})", o[0], o[1], o[2]);
    }
    for e in EdgeId::all() {
        let (a, b) = e.endpoints();
        let _ = writeln!(s, "{e} = {a}-{b}");
    }
    for f in Face::ALL {
        let c = f.corners();
        let _ = writeln!(s, "{f} = {{{}, {}, {}, {}}}", c[0], c[1], c[2], c[3]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(i: u8) -> EdgeId {
        EdgeId::new(i).unwrap()
    }
    fn vx(i: u8) -> VertexId {
        VertexId::new(i).unwrap()
    }

    #[test]
    fn edge_endpoint_examples() {
        assert_eq!(edge_endpoints(edge(0)), (vx(0), vx(1)));
        assert_eq!(edge_endpoints(edge(8)), (vx(0), vx(4)));
        assert_eq!(edge_endpoints(edge(6)), (vx(6), vx(7)));
    }

    #[test]
    fn edges_join_unit_neighbours() {
        for e in EdgeId::all() {
            let (a, b) = e.endpoints();
            let diff: u8 = (0..3).map(|k| a.offset()[k].abs_diff(b.offset()[k])).sum();
            assert_eq!(diff, 1, "{e}");
        }
    }

    #[test]
    fn opposite_edge_pairs_are_parallel_and_disjoint() {
        for (a, b) in [(0, 6), (3, 5), (2, 4), (1, 7), (8, 10), (9, 11)] {
            let (ea, eb) = (edge(a), edge(b));
            assert_eq!(ea.axis(), eb.axis());
            let (p, q) = ea.endpoints();
            assert!(!eb.touches(p) && !eb.touches(q));
            // Not on a common face either.
            assert!(Face::ALL.iter().all(|f| !(f.contains_edge(ea) && f.contains_edge(eb))));
        }
    }

    #[test]
    fn faces_match_coordinates() {
        for f in Face::ALL {
            for v in f.corners() {
                assert!(f.contains_vertex(v));
            }
            assert_eq!(VertexId::all().filter(|&v| f.contains_vertex(v)).count(), 4);
            assert_eq!(EdgeId::all().filter(|&e| f.contains_edge(e)).count(), 4);
            assert_eq!(f.opposite().opposite(), f);
        }
    }

    #[test]
    fn case01_uses_the_edges_at_v0() {
        let at_v0: Vec<_> = EdgeId::all().filter(|e| e.touches(vx(0))).collect();
        assert_eq!(at_v0, vec![edge(0), edge(3), edge(8)]);
    }

    #[test]
    fn induced_edge_perm_examples() {
        let id = induced_edge_perm([0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
        assert!(EdgeId::all().all(|e| id[e.index()] == e));
        let z270 = induced_edge_perm([1, 2, 3, 0, 5, 6, 7, 4]).unwrap();
        assert_eq!(z270[0], edge(1));
        let x180 = induced_edge_perm([7, 6, 5, 4, 3, 2, 1, 0]).unwrap();
        assert_eq!(x180[0], edge(6));
    }

    #[test]
    fn induced_edge_perm_rejects_non_rigid_perm() {
        // swap v0 and v6 only: e0 = v0v1 goes to v6v1, not an edge
        let err = induced_edge_perm([6, 1, 2, 3, 4, 5, 0, 7]).unwrap_err();
        assert!(matches!(err, TopologyError::NotAnEdge { edge: 0, .. }));
        assert!(matches!(
            induced_edge_perm([0, 0, 2, 3, 4, 5, 6, 7]),
            Err(TopologyError::NotBijection(_))
        ));
    }

    #[test]
    fn rotate_config_fixed_points() {
        let id = Rotation::identity();
        for c in 0..=255u8 {
            assert_eq!(id.rotate_config(Config(c)), Config(c));
        }
        for r in rotations() {
            assert_eq!(r.rotate_config(Config::EMPTY), Config::EMPTY);
            assert_eq!(r.rotate_config(Config::FULL), Config::FULL);
        }
    }

    #[test]
    fn rotate_config_matches_moved_vertices() {
        for r in rotations() {
            for v in VertexId::all() {
                let c = Config::from_vertices([v]);
                assert_eq!(r.rotate_config(c), Config::from_vertices([r.move_vertex(v)]));
            }
        }
    }

    #[test]
    fn rotation_table_is_the_rotation_group() {
        let report = validate_rotation_group(&ROTATION_TABLE);
        assert!(report.is_ok(), "{:?}", report.violations);
        assert_eq!(report.checked, 24);
    }

    #[test]
    fn duplicated_rotation_is_reported() {
        let mut perms = ROTATION_TABLE;
        perms[5] = perms[4];
        let report = validate_rotation_group(&perms);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, GroupViolation::Duplicate { first: 4, second: 5, .. })));
    }

    #[test]
    fn reflection_is_reported_as_improper() {
        let mut perms = ROTATION_TABLE;
        // mirror x -> 1 - x
        perms[7] = [1, 0, 3, 2, 5, 4, 7, 6];
        let report = validate_rotation_group(&perms);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, GroupViolation::Improper { index: 7, determinant: -1, .. })));
    }

    #[test]
    fn composition_agrees_with_edge_maps() {
        for a in rotations() {
            for b in rotations() {
                let ab = a.then(b);
                for e in EdgeId::all() {
                    assert_eq!(ab.move_edge(e), b.move_edge(a.move_edge(e)));
                }
                for f in Face::ALL {
                    assert_eq!(ab.move_face(f), b.move_face(a.move_face(f)));
                }
                for c in [0x01u8, 0x13, 0x5A, 0xC7] {
                    assert_eq!(
                        ab.rotate_config(Config(c)),
                        b.rotate_config(a.rotate_config(Config(c)))
                    );
                }
            }
        }
    }

    #[test]
    fn induced_perm_of_composition_is_composition_of_induced_perms() {
        for a in ROTATION_TABLE {
            for b in ROTATION_TABLE {
                let ab: [u8; 8] = std::array::from_fn(|i| a[b[i] as usize]);
                let (ea, eb, eab) = (
                    induced_edge_perm(a).unwrap(),
                    induced_edge_perm(b).unwrap(),
                    induced_edge_perm(ab).unwrap(),
                );
                for e in 0..12 {
                    assert_eq!(eab[e], ea[eb[e].index()]);
                }
            }
        }
    }

    #[test]
    fn there_are_23_orbits() {
        let orbits = config_orbits();
        assert_eq!(orbits.len(), 23);
        assert_eq!(orbits.iter().map(Vec::len).sum::<usize>(), 256);
        let mut sizes: Vec<usize> = orbits.iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(
            sizes,
            vec![1, 1, 2, 4, 4, 6, 6, 8, 8, 8, 8, 8, 12, 12, 12, 12, 12, 12, 24, 24, 24, 24, 24]
        );
    }
}
