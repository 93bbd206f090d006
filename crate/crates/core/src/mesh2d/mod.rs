//! Triangulations of polygons with newest-vertex bisection and
//! corner-graded local refinement.

pub mod domains;
mod locate;
mod refine;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub use locate::PointLocator;
pub use refine::{
    bisect_marked, corner_refine, corner_refine_scaled, corner_step_count, newest_vertex_bisection,
    refine_to_width,
};

/// A point of the spatial domain.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x1 + other.x1), 0.5 * (self.x2 + other.x2))
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

/// Boundary condition carried by a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
}

/// A singular corner with its grading weight and cut-off radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerSpec {
    pub location: Point2,
    pub delta: f64,
    pub radius: f64,
}

impl CornerSpec {
    pub fn new(location: Point2, delta: f64, radius: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::param(alloc::format!(
                "corner weight {delta} not in [0, 1)"
            )));
        }
        if !(radius > 0.0) || !location.is_finite() {
            return Err(Error::param(alloc::format!(
                "corner radius {radius} must be positive"
            )));
        }
        Ok(CornerSpec {
            location,
            delta,
            radius,
        })
    }

    /// Corners whose radius is half the distance to the nearest other corner.
    pub fn with_default_radii(locations: &[Point2], delta: f64) -> Result<Vec<CornerSpec>> {
        locations
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let nearest = locations
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &o)| c.dist(o))
                    .fold(f64::INFINITY, f64::min);
                if !nearest.is_finite() {
                    return Err(Error::param("a single corner needs an explicit radius"));
                }
                CornerSpec::new(c, delta, 0.5 * nearest)
            })
            .collect()
    }
}

/// A triangle of the mesh, vertices in counter-clockwise order.
///
/// Local edge `i` joins vertex `i` to vertex `(i + 1) % 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    pub vertex_ids: [usize; 3],
    pub refinement_edge: usize,
    pub subdomain_id: usize,
    pub generation: usize,
}

impl Triangle {
    pub fn edge(&self, i: usize) -> (usize, usize) {
        (self.vertex_ids[i], self.vertex_ids[(i + 1) % 3])
    }
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Summary of a mesh's size and quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStatistics {
    pub element_count: usize,
    pub h_min: f64,
    pub h_max: f64,
    /// Largest ratio of diameter to inradius.
    pub shape_regularity: f64,
}

/// A triangulation with boundary tags, wave-speed subdomains and corner data.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMesh {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<Triangle>,
    pub corners: Vec<CornerSpec>,
    pub subdomain_speeds: Vec<f64>,
    boundary: BTreeMap<(usize, usize), BoundaryTag>,
    midpoints: BTreeMap<(usize, usize), usize>,
}

impl SpatialMesh {
    /// Builds a mesh from raw data. Triangles are reoriented counter-clockwise;
    /// a `None` refinement edge selects the longest edge.
    pub fn new(
        vertices: Vec<Point2>,
        triangles: Vec<([usize; 3], Option<usize>, usize)>,
        boundary_edges: Vec<((usize, usize), BoundaryTag)>,
        subdomain_speeds: Vec<f64>,
    ) -> Result<Self> {
        let mut tris = Vec::with_capacity(triangles.len());
        for (k, (mut v, refedge, sub)) in triangles.into_iter().enumerate() {
            if v.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::Validation(alloc::format!(
                    "triangle {k} references a missing vertex"
                )));
            }
            let mut r = match refedge {
                Some(r) if r < 3 => r,
                Some(r) => {
                    return Err(Error::Validation(alloc::format!(
                        "triangle {k}: refinement edge {r}"
                    )))
                }
                None => longest_edge(&vertices, v),
            };
            if signed_area(&vertices, v) < 0.0 {
                // Swapping vertices 1 and 2 maps edge 0 -> 2, 1 -> 1, 2 -> 0.
                v.swap(1, 2);
                r = 2 - r;
            }
            tris.push(Triangle {
                vertex_ids: v,
                refinement_edge: r,
                subdomain_id: sub,
                generation: 0,
            });
        }
        let mut boundary = BTreeMap::new();
        for ((a, b), tag) in boundary_edges {
            boundary.insert(edge_key(a, b), tag);
        }
        let mesh = SpatialMesh {
            vertices,
            triangles: tris,
            corners: Vec::new(),
            subdomain_speeds,
            boundary,
            midpoints: BTreeMap::new(),
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Rebuilds a mesh from stored parts without reorienting triangles;
    /// `midpoints` lists `(a, b, m)` for every bisected edge `(a, b)`.
    pub fn from_parts(
        vertices: Vec<Point2>,
        triangles: Vec<Triangle>,
        boundary_edges: Vec<((usize, usize), BoundaryTag)>,
        subdomain_speeds: Vec<f64>,
        corners: Vec<CornerSpec>,
        midpoints: Vec<(usize, usize, usize)>,
    ) -> Result<Self> {
        for (k, t) in triangles.iter().enumerate() {
            if t.vertex_ids.iter().any(|&i| i >= vertices.len()) || t.refinement_edge > 2 {
                return Err(Error::Validation(alloc::format!(
                    "triangle {k} is malformed"
                )));
            }
            if signed_area(&vertices, t.vertex_ids) <= 0.0 {
                return Err(Error::Validation(alloc::format!(
                    "triangle {k} is not counter-clockwise"
                )));
            }
        }
        if midpoints
            .iter()
            .any(|&(a, b, m)| a.max(b).max(m) >= vertices.len())
        {
            return Err(Error::Validation(
                "midpoint references a missing vertex".into(),
            ));
        }
        let mesh = SpatialMesh {
            vertices,
            triangles,
            corners,
            subdomain_speeds,
            boundary: boundary_edges
                .into_iter()
                .map(|((a, b), t)| (edge_key(a, b), t))
                .collect(),
            midpoints: midpoints
                .into_iter()
                .map(|(a, b, m)| (edge_key(a, b), m))
                .collect(),
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Bisected edges `(a, b)` with `a < b` and their midpoint vertex.
    pub fn midpoints(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.midpoints.iter().map(|(&(a, b), &m)| (a, b, m))
    }

    pub fn with_corners(mut self, corners: Vec<CornerSpec>) -> Self {
        self.corners = corners;
        self
    }

    /// Replaces every boundary tag.
    pub fn with_uniform_boundary(mut self, tag: BoundaryTag) -> Self {
        for t in self.boundary.values_mut() {
            *t = tag;
        }
        self
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle_points(&self, k: usize) -> [Point2; 3] {
        let v = self.triangles[k].vertex_ids;
        [
            self.vertices[v[0]],
            self.vertices[v[1]],
            self.vertices[v[2]],
        ]
    }

    pub fn area(&self, k: usize) -> f64 {
        signed_area(&self.vertices, self.triangles[k].vertex_ids)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.len()).map(|k| self.area(k)).sum()
    }

    /// Diameter (longest edge) of triangle `k`.
    pub fn diameter(&self, k: usize) -> f64 {
        let [a, b, c] = self.triangle_points(k);
        a.dist(b).max(b.dist(c)).max(c.dist(a))
    }

    pub fn centroid(&self, k: usize) -> Point2 {
        let [a, b, c] = self.triangle_points(k);
        Point2::new((a.x1 + b.x1 + c.x1) / 3.0, (a.x2 + b.x2 + c.x2) / 3.0)
    }

    pub fn speed(&self, k: usize) -> f64 {
        self.subdomain_speeds[self.triangles[k].subdomain_id]
    }

    /// Euclidean distance from triangle `k` (as a closed set) to `p`.
    pub fn distance_to(&self, k: usize, p: Point2) -> f64 {
        let [a, b, c] = self.triangle_points(k);
        let lam = barycentric(a, b, c, p);
        if lam.iter().all(|&l| l >= 0.0) {
            return 0.0;
        }
        segment_distance(a, b, p)
            .min(segment_distance(b, c, p))
            .min(segment_distance(c, a, p))
    }

    /// Boundary edges, keyed by sorted vertex pair.
    pub fn boundary_edges(&self) -> impl Iterator<Item = ((usize, usize), BoundaryTag)> + '_ {
        self.boundary.iter().map(|(&e, &t)| (e, t))
    }

    pub fn boundary_tag(&self, a: usize, b: usize) -> Option<BoundaryTag> {
        self.boundary.get(&edge_key(a, b)).copied()
    }

    /// Vertex created by bisecting edge `(a, b)`, if any.
    pub fn midpoint_of(&self, a: usize, b: usize) -> Option<usize> {
        self.midpoints.get(&edge_key(a, b)).copied()
    }

    /// Whether some edge of triangle `k` has been split by a neighbor.
    pub fn has_hanging_node(&self, k: usize) -> bool {
        let t = &self.triangles[k];
        (0..3).any(|i| {
            let (a, b) = t.edge(i);
            self.midpoint_of(a, b).is_some()
        })
    }

    pub fn hanging_node_count(&self) -> usize {
        (0..self.len())
            .filter(|&k| self.has_hanging_node(k))
            .count()
    }

    /// Scans every vertex against every edge for vertices lying strictly
    /// inside an edge; an independent check of conformity.
    pub fn geometric_hanging_nodes(&self) -> usize {
        let mut count = 0;
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for t in &self.triangles {
            for i in 0..3 {
                let (a, b) = t.edge(i);
                edges.push(edge_key(a, b));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let used: alloc::collections::BTreeSet<usize> =
            self.triangles.iter().flat_map(|t| t.vertex_ids).collect();
        for &(a, b) in &edges {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let len = pa.dist(pb);
            for &v in &used {
                if v == a || v == b {
                    continue;
                }
                let p = self.vertices[v];
                if segment_distance(pa, pb, p) < 1e-12 * len
                    && p.dist(pa) > 1e-12 * len
                    && p.dist(pb) > 1e-12 * len
                {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn statistics(&self) -> MeshStatistics {
        mesh_statistics(self)
    }

    /// Checks orientation, indices, subdomain ids and boundary coverage.
    pub fn validate(&self) -> Result<()> {
        for (k, t) in self.triangles.iter().enumerate() {
            if t.refinement_edge > 2 || t.vertex_ids.iter().any(|&v| v >= self.vertices.len()) {
                return Err(Error::Validation(alloc::format!(
                    "triangle {k} is malformed"
                )));
            }
            if self.area(k) <= 0.0 {
                return Err(Error::Validation(alloc::format!(
                    "triangle {k} has non-positive area"
                )));
            }
            if t.subdomain_id >= self.subdomain_speeds.len() {
                return Err(Error::Validation(alloc::format!(
                    "triangle {k} has subdomain {} but only {} speeds",
                    t.subdomain_id,
                    self.subdomain_speeds.len()
                )));
            }
        }
        if let Some(c) = self.subdomain_speeds.iter().find(|&&c| !(c > 0.0)) {
            return Err(Error::Validation(alloc::format!(
                "wave speed {c} is not positive"
            )));
        }
        for c in &self.corners {
            if !(0.0..1.0).contains(&c.delta) || !(c.radius > 0.0) {
                return Err(Error::Validation("corner data out of range".into()));
            }
        }
        // Each edge seen once is on the boundary unless it is part of a
        // split edge whose other side is coarser.
        let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in &self.triangles {
            for i in 0..3 {
                let (a, b) = t.edge(i);
                *count.entry(edge_key(a, b)).or_insert(0) += 1;
            }
        }
        let mut sub_edges = alloc::collections::BTreeSet::new();
        for (&(p, q), &m) in &self.midpoints {
            sub_edges.insert(edge_key(p, m));
            sub_edges.insert(edge_key(m, q));
        }
        for (&(a, b), &n) in &count {
            let covered = self.boundary.contains_key(&(a, b))
                || self.midpoint_of(a, b).is_some()
                || sub_edges.contains(&(a, b));
            if n == 1 && !covered {
                return Err(Error::Validation(alloc::format!(
                    "boundary edge ({a}, {b}) carries no tag"
                )));
            }
        }
        Ok(())
    }
}

/// Element count and extremal diameters of a mesh.
pub fn mesh_statistics(mesh: &SpatialMesh) -> MeshStatistics {
    let mut h_min = f64::INFINITY;
    let mut h_max: f64 = 0.0;
    let mut shape: f64 = 0.0;
    for k in 0..mesh.len() {
        let [a, b, c] = mesh.triangle_points(k);
        let h = mesh.diameter(k);
        let perimeter = a.dist(b) + b.dist(c) + c.dist(a);
        let inradius = 2.0 * mesh.area(k) / perimeter;
        h_min = h_min.min(h);
        h_max = h_max.max(h);
        shape = shape.max(h / inradius);
    }
    MeshStatistics {
        element_count: mesh.len(),
        h_min,
        h_max,
        shape_regularity: shape,
    }
}

pub(crate) fn signed_area(vertices: &[Point2], v: [usize; 3]) -> f64 {
    let (a, b, c) = (vertices[v[0]], vertices[v[1]], vertices[v[2]]);
    0.5 * ((b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2))
}

fn longest_edge(vertices: &[Point2], v: [usize; 3]) -> usize {
    let mut best = 0;
    let mut best_len = -1.0;
    let mut best_opp = usize::MAX;
    for i in 0..3 {
        let len = vertices[v[i]].dist(vertices[v[(i + 1) % 3]]);
        let opposite = v[(i + 2) % 3];
        if len > best_len * (1.0 + 1e-12)
            || ((len - best_len).abs() <= 1e-12 * len && opposite < best_opp)
        {
            best = i;
            best_len = len;
            best_opp = opposite;
        }
    }
    best
}

/// Barycentric coordinates of `p` in the triangle `(a, b, c)`.
pub fn barycentric(a: Point2, b: Point2, c: Point2, p: Point2) -> [f64; 3] {
    let det = (b.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (b.x2 - a.x2);
    let l1 = ((p.x1 - a.x1) * (c.x2 - a.x2) - (c.x1 - a.x1) * (p.x2 - a.x2)) / det;
    let l2 = ((b.x1 - a.x1) * (p.x2 - a.x2) - (p.x1 - a.x1) * (b.x2 - a.x2)) / det;
    [1.0 - l1 - l2, l1, l2]
}

fn segment_distance(a: Point2, b: Point2, p: Point2) -> f64 {
    let (dx, dy) = (b.x1 - a.x1, b.x2 - a.x2);
    let len2 = dx * dx + dy * dy;
    let s = (((p.x1 - a.x1) * dx + (p.x2 - a.x2) * dy) / len2).clamp(0.0, 1.0);
    p.dist(Point2::new(a.x1 + s * dx, a.x2 + s * dy))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn right_triangle() -> SpatialMesh {
        SpatialMesh::new(
            alloc::vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0)
            ],
            alloc::vec![([0, 1, 2], None, 0)],
            alloc::vec![
                ((0, 1), BoundaryTag::Dirichlet),
                ((1, 2), BoundaryTag::Dirichlet),
                ((2, 0), BoundaryTag::Neumann)
            ],
            alloc::vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn longest_edge_is_hypotenuse() {
        let m = right_triangle();
        assert_eq!(m.triangles[0].refinement_edge, 1);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let m = SpatialMesh::new(
            alloc::vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0)
            ],
            alloc::vec![([0, 2, 1], None, 0)],
            alloc::vec![
                ((0, 1), BoundaryTag::Dirichlet),
                ((1, 2), BoundaryTag::Dirichlet),
                ((2, 0), BoundaryTag::Dirichlet)
            ],
            alloc::vec![1.0],
        )
        .unwrap();
        assert!(m.area(0) > 0.0);
        let (a, b) = m.triangles[0].edge(m.triangles[0].refinement_edge);
        assert_eq!(edge_key(a, b), (1, 2));
    }

    #[test]
    fn single_triangle_statistics() {
        let s = right_triangle().statistics();
        assert_eq!(s.element_count, 1);
        assert!((s.h_max - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn point_triangle_distance() {
        let m = right_triangle();
        assert_eq!(m.distance_to(0, Point2::new(0.2, 0.2)), 0.0);
        assert_eq!(m.distance_to(0, Point2::new(0.0, 0.0)), 0.0);
        assert!((m.distance_to(0, Point2::new(-1.0, 0.5)) - 1.0).abs() < 1e-15);
        assert!((m.distance_to(0, Point2::new(1.0, 1.0)) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn missing_boundary_tag_is_rejected() {
        let r = SpatialMesh::new(
            alloc::vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0)
            ],
            alloc::vec![([0, 1, 2], None, 0)],
            alloc::vec![((0, 1), BoundaryTag::Dirichlet)],
            alloc::vec![1.0],
        );
        assert!(r.is_err());
    }

    #[test]
    fn corner_validation() {
        assert!(CornerSpec::new(Point2::new(0.0, 0.0), 1.0, 0.2).is_err());
        assert!(CornerSpec::new(Point2::new(0.0, 0.0), 0.3, 0.0).is_err());
        let cs = CornerSpec::with_default_radii(
            &[
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 3.0),
            ],
            0.2,
        )
        .unwrap();
        assert!((cs[0].radius - 0.5).abs() < 1e-15);
        assert!((cs[2].radius - 1.5).abs() < 1e-15);
    }
}
