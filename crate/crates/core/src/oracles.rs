//! Independent reference computations: Monte Carlo ray parity, exact
//! half-space clipping of a box, and the corner tetrahedron.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::point::{CompensatedSum, Point3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("ray parity at {point} did not settle after {attempts} attempts")]
    UnstableParity { point: Point3, attempts: usize },
    #[error("need at least one sample")]
    NoSamples,
    #[error("box {lo} .. {hi} is empty or not finite")]
    BadBox { lo: Point3, hi: Point3 },
    #[error("plane normal {0} is zero or not finite")]
    BadNormal(Point3),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    /// Zero for exact oracles.
    pub standard_error: f64,
    pub sample_count: usize,
}

impl OracleResult {
    fn exact(value: f64) -> Self {
        OracleResult {
            value,
            standard_error: 0.0,
            sample_count: 0,
        }
    }

    /// `|value - x|` measured in standard errors; infinite when the
    /// estimate is exact and differs.
    pub fn sigmas(&self, x: f64) -> f64 {
        let d = (self.value - x).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.standard_error
        }
    }
}

fn check_box(lo: Point3, hi: Point3) -> Result<(), OracleError> {
    if lo.is_finite() && hi.is_finite() && lo.x < hi.x && lo.y < hi.y && lo.z < hi.z {
        Ok(())
    } else {
        Err(OracleError::BadBox { lo, hi })
    }
}

/// Samples per independently seeded stream.
pub const MC_CHUNK: usize = 1 << 16;
/// Direction draws per sample before giving up.
pub const MC_ATTEMPTS: usize = 16;

// Rays closer than this to a triangle's plane (|cos|), or hitting within
// this barycentric distance of an edge, are redrawn.
const GRAZE: f64 = 1e-6;
const EDGE_EPS: f64 = 1e-9;

struct Tri {
    a: Point3,
    e1: Point3,
    e2: Point3,
    unit_normal: Point3,
    scale: f64,
}

enum Hit {
    Miss,
    /// The line crosses the interior at this ray parameter.
    Cross(f64),
    Degenerate,
}

impl Tri {
    fn new([a, b, c]: [Point3; 3]) -> Option<Tri> {
        let (e1, e2) = (b - a, c - a);
        let n = e1.cross(e2);
        let len = n.norm();
        (len > 0.0).then(|| Tri {
            a,
            e1,
            e2,
            unit_normal: n / len,
            scale: e1.norm().max(e2.norm()),
        })
    }

    // Moller-Trumbore against the whole line through `o`.
    fn hit(&self, o: Point3, d: Point3) -> Hit {
        if self.unit_normal.dot(d).abs() < GRAZE {
            let dist = self.unit_normal.dot(o - self.a).abs();
            return if dist < GRAZE * self.scale { Hit::Degenerate } else { Hit::Miss };
        }
        let p = d.cross(self.e2);
        let inv = 1.0 / self.e1.dot(p);
        let s = o - self.a;
        let u = s.dot(p) * inv;
        if !(-EDGE_EPS..=1.0 + EDGE_EPS).contains(&u) {
            return Hit::Miss;
        }
        let q = s.cross(self.e1);
        let v = d.dot(q) * inv;
        if v < -EDGE_EPS || u + v > 1.0 + EDGE_EPS {
            return Hit::Miss;
        }
        let t = self.e2.dot(q) * inv;
        if u < EDGE_EPS || v < EDGE_EPS || u + v > 1.0 - EDGE_EPS || t.abs() < EDGE_EPS * self.scale {
            return Hit::Degenerate;
        }
        Hit::Cross(t)
    }
}

fn random_direction(rng: &mut ChaCha8Rng) -> Point3 {
    loop {
        let d = Point3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = d.norm();
        if n > 1e-3 && n <= 1.0 {
            return d / n;
        }
    }
}

/// Crossing parities of the rays `o + t d` for `t > 0` and `t < 0`.
fn parities(tris: &[Tri], o: Point3, d: Point3) -> Option<(bool, bool)> {
    let (mut ahead, mut behind) = (false, false);
    for t in tris {
        match t.hit(o, d) {
            Hit::Miss => {}
            Hit::Cross(t) if t > 0.0 => ahead = !ahead,
            Hit::Cross(_) => behind = !behind,
            Hit::Degenerate => return None,
        }
    }
    Some((ahead, behind))
}

/// Parity along a random line through `o`, which must match in both
/// directions. Degenerate lines are redrawn; a clean line with mismatched
/// halves means the surface has a hole.
fn inside(tris: &[Tri], o: Point3, rng: &mut ChaCha8Rng) -> Result<bool, OracleError> {
    for attempt in 1..=MC_ATTEMPTS {
        match parities(tris, o, random_direction(rng)) {
            None => continue,
            Some((a, b)) if a == b => return Ok(a),
            Some(_) => return Err(OracleError::UnstableParity { point: o, attempts: attempt }),
        }
    }
    Err(OracleError::UnstableParity {
        point: o,
        attempts: MC_ATTEMPTS,
    })
}

/// Volume enclosed by a closed triangle set inside the box `lo..hi`,
/// estimated from `n` uniform samples classified by ray parity.
///
/// Samples are drawn in chunks of [`MC_CHUNK`]; chunk `c` uses a ChaCha8
/// stream keyed by `seed` with stream number `c`, so the estimate depends
/// only on the inputs.
pub fn mc_point_in_mesh_volume(
    triangles: &[[Point3; 3]],
    lo: Point3,
    hi: Point3,
    n: usize,
    seed: u64,
) -> Result<OracleResult, OracleError> {
    check_box(lo, hi)?;
    if n == 0 {
        return Err(OracleError::NoSamples);
    }
    let box_volume = (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z);
    let tris: Vec<Tri> = triangles.iter().filter_map(|&t| Tri::new(t)).collect();
    let hits: usize = if tris.is_empty() {
        0
    } else {
        let chunks = n.div_ceil(MC_CHUNK);
        let counts: Vec<Result<usize, OracleError>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c as u64);
                let len = MC_CHUNK.min(n - c * MC_CHUNK);
                let mut count = 0;
                for _ in 0..len {
                    let p = Point3::new(
                        rng.gen_range(lo.x..hi.x),
                        rng.gen_range(lo.y..hi.y),
                        rng.gen_range(lo.z..hi.z),
                    );
                    if inside(&tris, p, &mut rng)? {
                        count += 1;
                    }
                }
                Ok(count)
            })
            .collect();
        counts.into_iter().sum::<Result<usize, _>>()?
    };
    let p = hits as f64 / n as f64;
    Ok(OracleResult {
        value: p * box_volume,
        standard_error: box_volume * (p * (1.0 - p) / n as f64).sqrt(),
        sample_count: n,
    })
}

/// Exact result of cutting a box by a plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneClip {
    /// Volume of `{x : n . x >= d}` inside the box.
    pub volume: f64,
    /// Area of the plane inside the box.
    pub section_area: f64,
    /// Faces of the clipped polyhedron, the cut polygon last when present.
    pub faces: Vec<Vec<Point3>>,
}

fn box_faces(lo: Point3, hi: Point3) -> Vec<Vec<Point3>> {
    let c = |i: u8| {
        Point3::new(
            if i & 1 != 0 { hi.x } else { lo.x },
            if i & 2 != 0 { hi.y } else { lo.y },
            if i & 4 != 0 { hi.z } else { lo.z },
        )
    };
    [
        [0, 4, 6, 2],
        [1, 3, 7, 5],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 2, 3, 1],
        [4, 5, 7, 6],
    ]
    .iter()
    .map(|f| f.iter().map(|&i| c(i)).collect())
    .collect()
}

/// Area of a planar convex polygon, fanned from its vertex mean.
fn polygon_area(poly: &[Point3]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let c = poly.iter().fold(Point3::ZERO, |s, &p| s + p) / poly.len() as f64;
    let mut s = CompensatedSum::default();
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        s.add((a - c).cross(b - c).norm() * 0.5);
    }
    s.value()
}

/// Exact volume of `{x : normal . x >= offset}` within `lo..hi`, by
/// clipping each box face against the half-space and closing the result
/// with the cut polygon.
pub fn plane_clip_box(normal: Point3, offset: f64, lo: Point3, hi: Point3) -> Result<PlaneClip, OracleError> {
    check_box(lo, hi)?;
    if !normal.is_finite() || normal.norm() == 0.0 || !offset.is_finite() {
        return Err(OracleError::BadNormal(normal));
    }
    let side = |p: Point3| normal.dot(p) - offset;
    let mut faces = Vec::new();
    let mut cut = Vec::new();
    for poly in box_faces(lo, hi) {
        let mut out = Vec::new();
        for k in 0..poly.len() {
            let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
            let (sa, sb) = (side(a), side(b));
            if sa >= 0.0 {
                out.push(a);
            }
            if sa == 0.0 {
                cut.push(a);
            }
            if (sa > 0.0 && sb < 0.0) || (sa < 0.0 && sb > 0.0) {
                let p = a.lerp(b, sa / (sa - sb));
                out.push(p);
                cut.push(p);
            }
        }
        if out.len() >= 3 {
            faces.push(out);
        }
    }

    // Order the cut points around their mean within the plane.
    let mut section_area = 0.0;
    if !cut.is_empty() {
        let n = normal / normal.norm();
        let helper = if n.x.abs() < 0.9 {
            Point3::new(1.0, 0.0, 0.0)
        } else {
            Point3::new(0.0, 1.0, 0.0)
        };
        let u = n.cross(helper);
        let u = u / u.norm();
        let v = n.cross(u);
        let c = cut.iter().fold(Point3::ZERO, |s, &p| s + p) / cut.len() as f64;
        cut.sort_by(|a, b| {
            let (da, db) = (*a - c, *b - c);
            da.dot(v).atan2(da.dot(u)).total_cmp(&db.dot(v).atan2(db.dot(u)))
        });
        cut.dedup();
        section_area = polygon_area(&cut);
        if cut.len() >= 3 {
            faces.push(cut);
        }
    }

    let mut volume = CompensatedSum::default();
    let count: usize = faces.iter().map(Vec::len).sum();
    if count > 0 {
        let apex = faces.iter().flatten().fold(Point3::ZERO, |s, &p| s + p) / count as f64;
        for f in &faces {
            for k in 1..f.len().saturating_sub(1) {
                let (a, b, c) = (f[0] - apex, f[k] - apex, f[k + 1] - apex);
                volume.add(a.dot(b.cross(c)).abs() / 6.0);
            }
        }
    }
    Ok(PlaneClip {
        volume: volume.value(),
        section_area,
        faces,
    })
}

pub fn plane_clip_box_volume(normal: Point3, offset: f64, lo: Point3, hi: Point3) -> Result<OracleResult, OracleError> {
    plane_clip_box(normal, offset, lo, hi).map(|c| OracleResult::exact(c.volume))
}

/// Right tetrahedron cut from a cell corner at fractions `t` of the three
/// edges of lengths `spacing`.
pub fn corner_tetra_volume(t: [f64; 3], spacing: [f64; 3]) -> f64 {
    (t[0] * spacing[0]) * (t[1] * spacing[1]) * (t[2] * spacing[2]) / 6.0
}

/// The 12 boundary triangles of a box, wound outward.
pub fn box_surface(lo: Point3, hi: Point3) -> Vec<[Point3; 3]> {
    box_faces(lo, hi)
        .into_iter()
        .flat_map(|f| [[f[0], f[1], f[2]], [f[0], f[2], f[3]]])
        .collect()
}
