//! Tensor-product space–time meshes, face classification and the corner
//! element partition.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::mesh2d::{edge_key, BoundaryTag, Point2, SpatialMesh};
use crate::{Error, Result};

/// Breakpoints `0 = t_0 < t_1 < … < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalPartition {
    breakpoints: Vec<f64>,
}

impl TemporalPartition {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::param("a temporal partition needs at least one slab"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param(
                "temporal breakpoints must be strictly increasing",
            ));
        }
        Ok(TemporalPartition { breakpoints })
    }

    pub fn uniform(t_end: f64, slabs: usize) -> Result<Self> {
        if slabs == 0 || !(t_end > 0.0) {
            return Err(Error::param("uniform partition needs T > 0 and N >= 1"));
        }
        Self::new(
            (0..=slabs)
                .map(|n| t_end * n as f64 / slabs as f64)
                .collect(),
        )
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Number of slabs `N`.
    pub fn len(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().expect("non-empty")
    }

    /// Interval `(t_{n}, t_{n+1})` of slab `n` (zero-based).
    pub fn slab(&self, n: usize) -> (f64, f64) {
        (self.breakpoints[n], self.breakpoints[n + 1])
    }

    pub fn step(&self, n: usize) -> f64 {
        self.breakpoints[n + 1] - self.breakpoints[n]
    }

    pub fn max_step(&self) -> f64 {
        (0..self.len()).map(|n| self.step(n)).fold(0.0, f64::max)
    }

    /// Index `n` with `t == t_n`, if `t` is a breakpoint (relative tolerance 1e-12).
    pub fn breakpoint_index(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * self.end().abs().max(1.0);
        self.breakpoints.iter().position(|&b| (b - t).abs() <= tol)
    }
}

/// How a spatial edge meets the rest of the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Shared by `minus` and `plus`; the normal points from `minus` to `plus`.
    Interior { minus: usize, plus: usize },
    /// On the boundary of `element`; the normal points outward.
    Boundary { element: usize, tag: BoundaryTag },
}

/// A spatial edge `F_x`; time-like faces are `F_x × I_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialFace {
    pub a: Point2,
    pub b: Point2,
    pub kind: EdgeKind,
    pub normal: [f64; 2],
    pub length: f64,
    pub corner_flag: bool,
}

impl SpatialFace {
    pub fn point(&self, s: f64) -> Point2 {
        Point2::new(
            self.a.x1 + s * (self.b.x1 - self.a.x1),
            self.a.x2 + s * (self.b.x2 - self.a.x2),
        )
    }

    pub fn elements(&self) -> (usize, Option<usize>) {
        match self.kind {
            EdgeKind::Interior { minus, plus } => (minus, Some(plus)),
            EdgeKind::Boundary { element, .. } => (element, None),
        }
    }
}

/// Classification of a space–time face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    /// Interior slab interface at `t_n`, `1 <= n <= N - 1`.
    SpaceLike(usize),
    TimeLike,
    Dirichlet,
    Neumann,
    Initial,
    Final,
}

/// A face of the space–time mesh. Space–time element ids are
/// `slab * n_spatial + triangle`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub kind: FaceKind,
    pub slab: usize,
    /// Spatial face for time-like and boundary faces, triangle for space-like ones.
    pub spatial_index: usize,
    pub owner: usize,
    pub neighbor: Option<usize>,
    pub normal_x: [f64; 2],
    pub normal_t: f64,
    pub corner_flag: bool,
    /// Edge length × slab length, or triangle area.
    pub measure: f64,
}

/// `T^x × T^t` with classified faces.
#[derive(Debug, Clone)]
pub struct SpaceTimeMesh {
    pub spatial: SpatialMesh,
    pub temporal: TemporalPartition,
    pub spatial_faces: Vec<SpatialFace>,
    /// Per triangle, whether its closure contains a corner.
    pub corner_elements: Vec<bool>,
    /// Per triangle, the indices of the spatial faces on its boundary.
    pub element_faces: Vec<Vec<usize>>,
}

/// Builds the space–time mesh and its face structure.
pub fn build_spacetime(spatial: SpatialMesh, temporal: TemporalPartition) -> Result<SpaceTimeMesh> {
    spatial.validate()?;
    let corner_elements = corner_flags(&spatial);
    let spatial_faces = extract_faces(&spatial, &corner_elements)?;
    let mut element_faces = vec![Vec::new(); spatial.len()];
    for (f, face) in spatial_faces.iter().enumerate() {
        let (m, p) = face.elements();
        element_faces[m].push(f);
        if let Some(p) = p {
            element_faces[p].push(f);
        }
    }
    Ok(SpaceTimeMesh {
        spatial,
        temporal,
        spatial_faces,
        corner_elements,
        element_faces,
    })
}

fn corner_flags(mesh: &SpatialMesh) -> Vec<bool> {
    (0..mesh.len())
        .map(|k| {
            let tol = 1e-12 * mesh.diameter(k);
            mesh.corners
                .iter()
                .any(|c| mesh.distance_to(k, c.location) <= tol)
        })
        .collect()
}

fn extract_faces(mesh: &SpatialMesh, corner: &[bool]) -> Result<Vec<SpatialFace>> {
    let mut owners: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, t) in mesh.triangles.iter().enumerate() {
        for i in 0..3 {
            let (a, b) = t.edge(i);
            owners.entry(edge_key(a, b)).or_default().push(k);
        }
    }
    let mut faces = Vec::new();
    for (k, t) in mesh.triangles.iter().enumerate() {
        for i in 0..3 {
            let (a, b) = t.edge(i);
            collect_edge(mesh, &owners, corner, k, a, b, &mut faces)?;
        }
    }
    Ok(faces)
}

fn collect_edge(
    mesh: &SpatialMesh,
    owners: &BTreeMap<(usize, usize), Vec<usize>>,
    corner: &[bool],
    k: usize,
    a: usize,
    b: usize,
    faces: &mut Vec<SpatialFace>,
) -> Result<()> {
    let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
    let length = pa.dist(pb);
    let normal = [(pb.x2 - pa.x2) / length, -(pb.x1 - pa.x1) / length];
    let face = |kind, flag| SpatialFace {
        a: pa,
        b: pb,
        kind,
        normal,
        length,
        corner_flag: flag,
    };
    let key = edge_key(a, b);
    let others: Vec<usize> = owners
        .get(&key)
        .map(|v| v.iter().copied().filter(|&o| o != k).collect())
        .unwrap_or_default();
    if let Some(&other) = others.first() {
        // Shared edge: emitted once, from the lower id, unless `k` is the
        // coarse side reached through recursion.
        let owns = owners.get(&key).is_some_and(|v| v.contains(&k));
        if !owns || k < other {
            let kind = EdgeKind::Interior {
                minus: k,
                plus: other,
            };
            faces.push(face(kind, corner[k] || corner[other]));
        }
        return Ok(());
    }
    if let Some(tag) = mesh.boundary_tag(a, b) {
        faces.push(face(EdgeKind::Boundary { element: k, tag }, corner[k]));
        return Ok(());
    }
    if let Some(m) = mesh.midpoint_of(a, b) {
        collect_edge(mesh, owners, corner, k, a, m, faces)?;
        collect_edge(mesh, owners, corner, k, m, b, faces)?;
        return Ok(());
    }
    let owns = owners.get(&key).is_some_and(|v| v.contains(&k));
    if owns {
        // Fine side of a hanging node: the coarse neighbour emits this face.
        return Ok(());
    }
    Err(Error::Validation(alloc::format!(
        "edge ({a}, {b}) of element {k} has no neighbour or tag"
    )))
}

impl SpaceTimeMesh {
    pub fn n_spatial(&self) -> usize {
        self.spatial.len()
    }

    pub fn n_slabs(&self) -> usize {
        self.temporal.len()
    }

    pub fn element_count(&self) -> usize {
        self.n_spatial() * self.n_slabs()
    }

    pub fn element_id(&self, slab: usize, triangle: usize) -> usize {
        slab * self.n_spatial() + triangle
    }

    /// Whether the space–time element `id` belongs to `T^∠`.
    pub fn is_corner_element(&self, id: usize) -> bool {
        self.corner_elements[id % self.n_spatial()]
    }

    /// All faces, enumerated slab by slab.
    pub fn faces(&self) -> Vec<Face> {
        let nx = self.n_spatial();
        let nt = self.n_slabs();
        let mut out = Vec::new();
        for n in 0..nt {
            let h = self.temporal.step(n);
            for (f, sf) in self.spatial_faces.iter().enumerate() {
                let (kind, owner, neighbor) = match sf.kind {
                    EdgeKind::Interior { minus, plus } => {
                        (FaceKind::TimeLike, minus, Some(plus + n * nx))
                    }
                    EdgeKind::Boundary {
                        element,
                        tag: BoundaryTag::Dirichlet,
                    } => (FaceKind::Dirichlet, element, None),
                    EdgeKind::Boundary {
                        element,
                        tag: BoundaryTag::Neumann,
                    } => (FaceKind::Neumann, element, None),
                };
                out.push(Face {
                    kind,
                    slab: n,
                    spatial_index: f,
                    owner: owner + n * nx,
                    neighbor,
                    normal_x: sf.normal,
                    normal_t: 0.0,
                    corner_flag: sf.corner_flag,
                    measure: sf.length * h,
                });
            }
            for k in 0..nx {
                let area = self.spatial.area(k);
                let corner_flag = self.corner_elements[k];
                if n == 0 {
                    out.push(Face {
                        kind: FaceKind::Initial,
                        slab: 0,
                        spatial_index: k,
                        owner: k,
                        neighbor: None,
                        normal_x: [0.0, 0.0],
                        normal_t: 1.0,
                        corner_flag,
                        measure: area,
                    });
                }
                let kind = if n + 1 == nt {
                    FaceKind::Final
                } else {
                    FaceKind::SpaceLike(n + 1)
                };
                out.push(Face {
                    kind,
                    slab: n,
                    spatial_index: k,
                    owner: k + n * nx,
                    neighbor: (n + 1 < nt).then(|| k + (n + 1) * nx),
                    normal_x: [0.0, 0.0],
                    normal_t: 1.0,
                    corner_flag,
                    measure: area,
                });
            }
        }
        out
    }
}

/// Splits the space–time elements into corner (`T^∠`) and regular sets.
pub fn classify_corner_elements(mesh: &SpaceTimeMesh) -> (Vec<usize>, Vec<usize>) {
    (0..mesh.element_count()).partition(|&id| mesh.is_corner_element(id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh2d::{bisect_marked, corner_refine, domains, refine_to_width};

    fn count(faces: &[Face], pred: impl Fn(&Face) -> bool) -> usize {
        faces.iter().filter(|f| pred(f)).count()
    }

    #[test]
    fn partition_validation() {
        assert!(TemporalPartition::new(vec![0.0]).is_err());
        assert!(TemporalPartition::new(vec![0.0, 0.5, 0.5]).is_err());
        let p = TemporalPartition::uniform(1.0, 4).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.breakpoint_index(0.75), Some(3));
        assert_eq!(p.breakpoint_index(0.7), None);
    }

    #[test]
    fn square_face_counts() {
        let m = build_spacetime(
            domains::unit_square(BoundaryTag::Dirichlet),
            TemporalPartition::uniform(1.0, 4).unwrap(),
        )
        .unwrap();
        assert_eq!(m.element_count(), 8);
        let faces = m.faces();
        assert_eq!(count(&faces, |f| f.kind == FaceKind::TimeLike), 4);
        assert_eq!(
            count(&faces, |f| matches!(f.kind, FaceKind::SpaceLike(_))),
            6
        );
        assert_eq!(count(&faces, |f| f.kind == FaceKind::Initial), 2);
        assert_eq!(count(&faces, |f| f.kind == FaceKind::Final), 2);
        assert_eq!(count(&faces, |f| f.kind == FaceKind::Neumann), 0);
        for f in &faces {
            match f.kind {
                FaceKind::SpaceLike(_) | FaceKind::Initial | FaceKind::Final => {
                    assert_eq!(f.normal_x, [0.0, 0.0]);
                    assert_eq!(f.normal_t, 1.0);
                }
                _ => assert_eq!(f.normal_t, 0.0),
            }
        }
        let single = build_spacetime(
            domains::unit_square(BoundaryTag::Dirichlet),
            TemporalPartition::uniform(1.0, 1).unwrap(),
        )
        .unwrap();
        assert_eq!(
            count(&single.faces(), |f| matches!(
                f.kind,
                FaceKind::SpaceLike(_)
            )),
            0
        );
    }

    fn check_partition(m: &SpaceTimeMesh) {
        // Every element's boundary measure equals the sum of its faces.
        let faces = m.faces();
        let mut measure = vec![0.0; m.element_count()];
        for f in &faces {
            measure[f.owner] += f.measure;
            if let Some(nb) = f.neighbor {
                measure[nb] += f.measure;
            }
        }
        for n in 0..m.n_slabs() {
            let h = m.temporal.step(n);
            for k in 0..m.n_spatial() {
                let [a, b, c] = m.spatial.triangle_points(k);
                let expect = 2.0 * m.spatial.area(k) + h * (a.dist(b) + b.dist(c) + c.dist(a));
                let got = measure[m.element_id(n, k)];
                assert!(
                    ((got - expect) / expect).abs() < 1e-13,
                    "element {k} slab {n}"
                );
            }
        }
    }

    #[test]
    fn faces_partition_element_boundaries() {
        let base =
            refine_to_width(&domains::gamma_domain(BoundaryTag::Neumann), 0.25, true).unwrap();
        let t = TemporalPartition::uniform(1.0, 3).unwrap();
        check_partition(&build_spacetime(base.clone(), t.clone()).unwrap());
        let hanging = bisect_marked(&base, &[0, 7, 11], false).unwrap();
        assert!(hanging.geometric_hanging_nodes() > 0);
        let m = build_spacetime(hanging, t).unwrap();
        check_partition(&m);
    }

    #[test]
    fn face_to_element_width_ratio() {
        let base =
            corner_refine(&domains::gamma_domain(BoundaryTag::Neumann), 0.25, 1, true).unwrap();
        let m = build_spacetime(base, TemporalPartition::uniform(1.0, 1).unwrap()).unwrap();
        for f in &m.spatial_faces {
            let (a, b) = f.elements();
            for k in core::iter::once(a).chain(b) {
                let r = f.length / m.spatial.diameter(k);
                assert!(r <= 1.0 + 1e-12 && r > 0.2, "ratio {r}");
            }
        }
    }

    #[test]
    fn corner_elements() {
        let fan = build_spacetime(
            domains::gamma_domain(BoundaryTag::Neumann),
            TemporalPartition::uniform(1.0, 2).unwrap(),
        )
        .unwrap();
        let (corner, regular) = classify_corner_elements(&fan);
        assert_eq!(corner.len(), 12);
        assert!(regular.is_empty());

        let square = build_spacetime(
            domains::unit_square(BoundaryTag::Dirichlet),
            TemporalPartition::uniform(1.0, 2).unwrap(),
        )
        .unwrap();
        assert!(classify_corner_elements(&square).0.is_empty());

        let refined =
            refine_to_width(&domains::gamma_domain(BoundaryTag::Neumann), 0.25, true).unwrap();
        let incident = refined
            .triangles
            .iter()
            .filter(|t| {
                t.vertex_ids
                    .iter()
                    .any(|&v| refined.vertices[v] == Point2::new(0.0, 0.0))
            })
            .count();
        let m = build_spacetime(refined, TemporalPartition::uniform(1.0, 4).unwrap()).unwrap();
        let (corner, regular) = classify_corner_elements(&m);
        assert_eq!(corner.len(), incident * 4);
        assert_eq!(corner.len() + regular.len(), m.element_count());
    }
}
