//! Per-cell surface integrals.
//!
//! With `f = (x, y, z)` the divergence is 3, so the volume enclosed by a
//! closed, outward-wound triangle surface is `(1/3) * sum of the flux of f`
//! through its triangles. On a planar triangle `n . f` is linear, so the
//! centroid rule is exact and each triangle contributes
//! `p0 . (p1 x p2) / 6`.

use thiserror::Error;

use crate::cases::{lookup_table, CaseEntry, Component, LookupTable, NodeRef, Tag};
use crate::point::Point3;
use crate::topology::{Config, EdgeId, VertexId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("non-finite scalar {value} at corner v{corner}")]
    NonFiniteScalar { corner: usize, value: f64 },
    #[error("non-finite isolevel {0}")]
    NonFiniteIso(f64),
    #[error("cell bounds {lo} .. {hi} must be finite with positive extents")]
    BadBounds { lo: Point3, hi: Point3 },
}

/// Crossing on a cube edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePoint {
    pub point: Point3,
    /// Fraction of the way from `a` to `b`, clamped to [0, 1].
    pub t: f64,
    /// Set when `fa == fb` forced the midpoint fallback.
    pub guarded: bool,
}

/// Linear interpolation of the isolevel crossing between `a` and `b`.
pub fn interpolate_edge_point(a: Point3, b: Point3, fa: f64, fb: f64, iso: f64) -> EdgePoint {
    let denom = fb - fa;
    if denom == 0.0 {
        return EdgePoint {
            point: a.lerp(b, 0.5),
            t: 0.5,
            guarded: true,
        };
    }
    let t = ((iso - fa) / denom).clamp(0.0, 1.0);
    EdgePoint {
        point: a.lerp(b, t),
        t,
        guarded: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TriangleMeasures {
    /// `(1/3) * flux of (x, y, z)`, i.e. the signed volume of the tetrahedron
    /// spanned with the origin.
    pub volume: f64,
    pub area: f64,
    /// Integral of the unit normal, `(p1 - p0) x (p2 - p0) / 2`.
    pub normal: Point3,
    /// Integral of position, `area * centroid`.
    pub moment: Point3,
}

pub fn triangle_measures(p0: Point3, p1: Point3, p2: Point3) -> TriangleMeasures {
    let normal = (p1 - p0).cross(p2 - p0) * 0.5;
    let area = normal.norm();
    TriangleMeasures {
        volume: p0.dot(p1.cross(p2)) / 6.0,
        area,
        normal,
        moment: (p0 + p1 + p2) * (area / 3.0),
    }
}

/// An axis-aligned cell with scalars at its corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    lo: Point3,
    hi: Point3,
    values: [f64; 8],
    iso: f64,
}

impl CellGeometry {
    pub fn new(lo: Point3, hi: Point3, values: [f64; 8], iso: f64) -> Result<Self, MeasureError> {
        check_bounds(lo, hi)?;
        if !iso.is_finite() {
            return Err(MeasureError::NonFiniteIso(iso));
        }
        if let Some(corner) = values.iter().position(|v| !v.is_finite()) {
            return Err(MeasureError::NonFiniteScalar {
                corner,
                value: values[corner],
            });
        }
        Ok(CellGeometry { lo, hi, values, iso })
    }

    /// Unit cube at the origin.
    pub fn unit(values: [f64; 8], iso: f64) -> Result<Self, MeasureError> {
        CellGeometry::new(Point3::ZERO, Point3::new(1.0, 1.0, 1.0), values, iso)
    }

    pub fn lo(&self) -> Point3 {
        self.lo
    }

    pub fn hi(&self) -> Point3 {
        self.hi
    }

    pub fn values(&self) -> [f64; 8] {
        self.values
    }

    pub fn iso(&self) -> f64 {
        self.iso
    }

    pub fn corner(&self, v: VertexId) -> Point3 {
        corner_position(self.lo, self.hi, v)
    }

    pub fn box_volume(&self) -> f64 {
        box_volume(self.lo, self.hi)
    }

    /// Corner `vi` is component 1 iff its scalar is at or above the isolevel.
    pub fn config(&self) -> Config {
        Config::from_vertices(VertexId::all().filter(|v| self.values[v.index()] >= self.iso))
    }

    /// Crossing on edge `e`, always interpolated from the edge's low-coordinate
    /// end so that neighbouring cells produce bit-identical points.
    pub fn crossing(&self, e: EdgeId) -> EdgePoint {
        let (a, b) = e.low_high();
        let (fa, fb) = (self.values[a.index()], self.values[b.index()]);
        let mut p = interpolate_edge_point(self.corner(a), self.corner(b), fa, fb, self.iso);
        // Only the edge's own axis moves; pin the others to the corner values.
        let axis = e.axis();
        let along = p.point[axis];
        p.point = self.corner(a).with(axis, along);
        p
    }

    /// Crossing parameters measured from each edge's first listed endpoint;
    /// non-straddling edges report 0.5.
    pub fn crossing_parameters(&self) -> [f64; 12] {
        let config = self.config();
        std::array::from_fn(|i| {
            let e = EdgeId::new(i as u8).expect("index < 12");
            if !config.straddles(e) {
                return 0.5;
            }
            let t = self.crossing(e).t;
            if e.low_high().0 == e.endpoints().0 {
                t
            } else {
                1.0 - t
            }
        })
    }

    /// Nodes relative to `lo`, with each crossing placed at `t` times the
    /// edge length from its low end.
    fn local_nodes(&self, config: Config) -> [Point3; 20] {
        let size = self.hi - self.lo;
        let mut nodes = [Point3::ZERO; 20];
        for v in VertexId::all() {
            nodes[v.index()] = corner_position(Point3::ZERO, size, v);
        }
        for e in EdgeId::all().filter(|&e| config.straddles(e)) {
            let (a, _) = e.low_high();
            let axis = e.axis();
            nodes[8 + e.index()] = nodes[a.index()].with(axis, self.crossing(e).t * size[axis]);
        }
        nodes
    }

    fn realize_nodes(&self, config: Config) -> [Point3; 20] {
        let mut nodes = [Point3::ZERO; 20];
        for v in VertexId::all() {
            nodes[v.index()] = self.corner(v);
        }
        for e in EdgeId::all().filter(|&e| config.straddles(e)) {
            nodes[8 + e.index()] = self.crossing(e).point;
        }
        nodes
    }
}

fn check_bounds(lo: Point3, hi: Point3) -> Result<(), MeasureError> {
    let ok = lo.is_finite() && hi.is_finite() && (0..3).all(|k| hi[k] > lo[k]);
    if ok {
        Ok(())
    } else {
        Err(MeasureError::BadBounds { lo, hi })
    }
}

fn corner_position(lo: Point3, hi: Point3, v: VertexId) -> Point3 {
    let o = v.offset();
    let pick = |k: usize| if o[k] == 0 { lo[k] } else { hi[k] };
    Point3::new(pick(0), pick(1), pick(2))
}

fn box_volume(lo: Point3, hi: Point3) -> f64 {
    (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z)
}

/// Node positions for an explicit set of crossing parameters, each measured
/// from the edge's first listed endpoint.
pub fn nodes_from_parameters(lo: Point3, hi: Point3, params: &[f64; 12]) -> [Point3; 20] {
    let mut nodes = [Point3::ZERO; 20];
    for v in VertexId::all() {
        nodes[v.index()] = corner_position(lo, hi, v);
    }
    for e in EdgeId::all() {
        let (a, b) = e.endpoints();
        nodes[8 + e.index()] = corner_position(lo, hi, a).lerp(corner_position(lo, hi, b), params[e.index()]);
    }
    nodes
}

/// Integrals over one connected part of the cell surface.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PartMeasures {
    /// Volume of this part of the enclosed component.
    pub volume: f64,
    pub area: f64,
    /// Interface normal integral, oriented out of component 1.
    pub normal_integral: Point3,
    pub first_moment: Point3,
    pub triangles: usize,
    pub interface_triangles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMeasures {
    pub config: Config,
    pub case_id: u8,
    pub enclosed: Option<Component>,
    pub box_volume: f64,
    pub volume1: f64,
    pub volume0: f64,
    pub interface_area: f64,
    /// `integral of n ds` over the interface, pointing out of component 1.
    pub normal_integral: Point3,
    /// `integral of x ds` over the interface (not divided by the area).
    pub first_moment: Point3,
    pub parts: Vec<PartMeasures>,
}

impl CellMeasures {
    /// `first_moment / area`, undefined for an empty interface.
    pub fn interface_centroid(&self) -> Option<Point3> {
        (self.interface_area > 0.0).then(|| self.first_moment / self.interface_area)
    }

    pub fn volume(&self, component: Component) -> f64 {
        match component {
            Component::One => self.volume1,
            Component::Zero => self.volume0,
        }
    }

    /// Area-weighted mean unit normal, undefined for an empty interface.
    pub fn mean_normal(&self) -> Option<Point3> {
        let n = self.normal_integral.norm();
        (n > 0.0).then(|| self.normal_integral / n)
    }
}

/// Sums the triangle integrals of `entry` with nodes realized at `nodes`.
///
/// The volume flux is taken of `x - reference`, which has the same
/// divergence as `x`; a reference on the cell keeps the per-triangle terms at
/// the scale of the cell wherever the cell sits.
pub fn measure_entry(
    config: Config,
    case_id: u8,
    entry: &CaseEntry,
    nodes: &[Point3; 20],
    reference: Point3,
    box_volume: f64,
) -> CellMeasures {
    let orient = if entry.enclosed == Some(Component::Zero) { -1.0 } else { 1.0 };
    let mut parts = Vec::with_capacity(entry.parts.len());
    for part in &entry.parts {
        let mut pm = PartMeasures {
            triangles: part.triangles.len(),
            ..PartMeasures::default()
        };
        for t in &part.triangles {
            let [p0, p1, p2] = t.nodes.map(|n| nodes[n.slot()]);
            let m = triangle_measures(p0, p1, p2);
            pm.volume += triangle_measures(p0 - reference, p1 - reference, p2 - reference).volume;
            if t.tag == Tag::Interface {
                pm.area += m.area;
                pm.normal_integral += m.normal * orient;
                pm.first_moment += m.moment;
                pm.interface_triangles += 1;
            }
        }
        parts.push(pm);
    }

    let mut measured = 0.0;
    let mut interface_area = 0.0;
    let mut normal_integral = Point3::ZERO;
    let mut first_moment = Point3::ZERO;
    for p in &parts {
        measured += p.volume;
        interface_area += p.area;
        normal_integral += p.normal_integral;
        first_moment += p.first_moment;
    }
    let (volume1, volume0) = match entry.enclosed {
        Some(Component::One) => (measured, box_volume - measured),
        Some(Component::Zero) => (box_volume - measured, measured),
        None if config == Config::FULL => (box_volume, 0.0),
        None => (0.0, box_volume),
    };
    CellMeasures {
        config,
        case_id,
        enclosed: entry.enclosed,
        box_volume,
        volume1,
        volume0,
        interface_area,
        normal_integral,
        first_moment,
        parts,
    }
}

/// Measures nodes given relative to `lo`; only the first moments depend on
/// where the cell sits.
fn measure_local(
    config: Config,
    case_id: u8,
    entry: &CaseEntry,
    local: &[Point3; 20],
    lo: Point3,
    box_volume: f64,
) -> CellMeasures {
    let mut m = measure_entry(config, case_id, entry, local, Point3::ZERO, box_volume);
    for p in &mut m.parts {
        p.first_moment += lo * p.area;
    }
    m.first_moment += lo * m.interface_area;
    m
}

/// Partial volumes and interface integrals of one cell, using the shared
/// lookup table.
pub fn measure_cell(g: &CellGeometry) -> CellMeasures {
    measure_cell_with(lookup_table(), g)
}

pub fn measure_cell_with(table: &LookupTable, g: &CellGeometry) -> CellMeasures {
    let config = g.config();
    let e = table.entry(config);
    let nodes = g.local_nodes(config);
    measure_local(config, e.case_id, &e.entry, &nodes, g.lo(), g.box_volume())
}

/// Measures a config with explicit crossing parameters on the box `lo..hi`.
pub fn measure_config(
    config: Config,
    params: &[f64; 12],
    lo: Point3,
    hi: Point3,
) -> Result<CellMeasures, MeasureError> {
    check_bounds(lo, hi)?;
    let e = lookup_table().entry(config);
    let nodes = nodes_from_parameters(Point3::ZERO, hi - lo, params);
    Ok(measure_local(config, e.case_id, &e.entry, &nodes, lo, box_volume(lo, hi)))
}

/// A triangle with realized coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizedTriangle {
    pub points: [Point3; 3],
    pub nodes: [NodeRef; 3],
    pub tag: Tag,
    pub part: usize,
}

/// Triangles of `entry` placed at `nodes`, in table order and winding
/// (outward from the enclosed component).
pub fn realize_entry(entry: &CaseEntry, nodes: &[Point3; 20]) -> Vec<RealizedTriangle> {
    entry
        .parts
        .iter()
        .enumerate()
        .flat_map(|(part, p)| {
            p.triangles.iter().map(move |t| RealizedTriangle {
                points: t.nodes.map(|n| nodes[n.slot()]),
                nodes: t.nodes,
                tag: t.tag,
                part,
            })
        })
        .collect()
}

/// Closed triangles around the region of one component for a config with
/// explicit crossing parameters, and that component. Uniform configs give
/// component 1 with the box boundary or nothing.
pub fn component_surface(
    config: Config,
    params: &[f64; 12],
    lo: Point3,
    hi: Point3,
) -> (Component, Vec<[Point3; 3]>) {
    let e = &lookup_table().entry(config).entry;
    match e.enclosed {
        Some(c) => {
            let tris = realize_entry(e, &nodes_from_parameters(lo, hi, params));
            (c, tris.iter().map(|t| t.points).collect())
        }
        None if config == Config::FULL => (Component::One, crate::oracles::box_surface(lo, hi)),
        None => (Component::One, Vec::new()),
    }
}

/// Realized surface of a cell as classified from its scalars.
pub fn realize_cell(g: &CellGeometry) -> (Config, Vec<RealizedTriangle>) {
    let config = g.config();
    let e = lookup_table().entry(config);
    (config, realize_entry(&e.entry, &g.realize_nodes(config)))
}
