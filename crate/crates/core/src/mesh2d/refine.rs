use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{edge_key, SpatialMesh, Triangle};
use crate::{Error, Result};

const WIDTH_TOL: f64 = 1e-12;

impl SpatialMesh {
    fn midpoint_vertex(&mut self, a: usize, b: usize) -> usize {
        let key = edge_key(a, b);
        if let Some(&m) = self.midpoints.get(&key) {
            return m;
        }
        let m = self.vertices.len();
        self.vertices
            .push(self.vertices[a].midpoint(self.vertices[b]));
        self.midpoints.insert(key, m);
        if let Some(tag) = self.boundary.remove(&key) {
            self.boundary.insert(edge_key(a, m), tag);
            self.boundary.insert(edge_key(m, b), tag);
        }
        m
    }

    fn children(&mut self, t: Triangle) -> [Triangle; 2] {
        let r = t.refinement_edge;
        let v = t.vertex_ids;
        let (a, b, c) = (v[r], v[(r + 1) % 3], v[(r + 2) % 3]);
        let m = self.midpoint_vertex(a, b);
        let child = |vertex_ids, refinement_edge| Triangle {
            vertex_ids,
            refinement_edge,
            subdomain_id: t.subdomain_id,
            generation: t.generation + 1,
        };
        [child([a, m, c], 2), child([m, b, c], 1)]
    }

    /// One bisection of every marked element; children replace their parent
    /// in the element order.
    pub(crate) fn bisect_pass(&mut self, marked: &[bool]) {
        let old = core::mem::take(&mut self.triangles);
        let mut new = Vec::with_capacity(old.len() + marked.iter().filter(|&&m| m).count());
        for (k, t) in old.into_iter().enumerate() {
            if marked[k] {
                new.extend(self.children(t));
            } else {
                new.push(t);
            }
        }
        self.triangles = new;
    }

    fn marks_where(&self, pred: impl Fn(usize) -> bool) -> Vec<bool> {
        (0..self.len()).map(pred).collect()
    }

    fn violates_one_irregularity(&self, k: usize) -> bool {
        let t = &self.triangles[k];
        (0..3).any(|i| {
            let (a, b) = t.edge(i);
            match self.midpoint_of(a, b) {
                Some(m) => self.midpoint_of(a, m).is_some() || self.midpoint_of(m, b).is_some(),
                None => false,
            }
        })
    }

    pub(crate) fn bisect_marked_in_place(&mut self, marked: &[bool], conforming: bool) {
        if !marked.iter().any(|&m| m) {
            return;
        }
        self.bisect_pass(marked);
        loop {
            let next = if conforming {
                self.marks_where(|k| self.has_hanging_node(k))
            } else {
                self.marks_where(|k| self.violates_one_irregularity(k))
            };
            if !next.iter().any(|&m| m) {
                break;
            }
            self.bisect_pass(&next);
        }
    }
}

/// Bisects element `element_id` across its refinement edge.
pub fn newest_vertex_bisection(mesh: &SpatialMesh, element_id: usize) -> Result<SpatialMesh> {
    if element_id >= mesh.len() {
        return Err(Error::InvalidElement(element_id));
    }
    let mut out = mesh.clone();
    let mut marked = vec![false; mesh.len()];
    marked[element_id] = true;
    out.bisect_pass(&marked);
    Ok(out)
}

/// Bisects the marked elements. With `conforming`, the closure loop bisects
/// elements with hanging nodes until none remain; otherwise hanging nodes are
/// kept, at most one per coarse edge.
pub fn bisect_marked(
    mesh: &SpatialMesh,
    marked: &[usize],
    conforming: bool,
) -> Result<SpatialMesh> {
    let mut flags = vec![false; mesh.len()];
    for &k in marked {
        if k >= mesh.len() {
            return Err(Error::InvalidElement(k));
        }
        flags[k] = true;
    }
    let mut out = mesh.clone();
    out.bisect_marked_in_place(&flags, conforming);
    Ok(out)
}

/// Bisects until every element diameter is at most `h`.
pub fn refine_to_width(mesh: &SpatialMesh, h: f64, conforming: bool) -> Result<SpatialMesh> {
    if !(h > 0.0) {
        return Err(Error::param(alloc::format!(
            "mesh width {h} must be positive"
        )));
    }
    let mut out = mesh.clone();
    refine_width_in_place(&mut out, h, conforming);
    Ok(out)
}

fn refine_width_in_place(mesh: &mut SpatialMesh, h: f64, conforming: bool) {
    loop {
        let marked = mesh.marks_where(|k| mesh.diameter(k) > h * (1.0 + WIDTH_TOL));
        if !marked.iter().any(|&m| m) {
            break;
        }
        mesh.bisect_marked_in_place(&marked, conforming);
    }
}

/// Number of grading steps `J` for mesh width `h_x`, degree `p` and weight
/// `delta`.
pub fn corner_step_count(h_x: f64, p: usize, delta: f64) -> usize {
    let x = -h_x.log2() * (p as f64 + 1.0) / (1.0 - delta) - 1.0;
    let j = (x - 1e-9).ceil();
    if j < 0.0 {
        0
    } else {
        j as usize
    }
}

/// Uniform refinement to width `h_x` followed by grading towards each corner.
pub fn corner_refine(
    mesh0: &SpatialMesh,
    h_x: f64,
    p_sigma_x: usize,
    conforming: bool,
) -> Result<SpatialMesh> {
    corner_refine_scaled(mesh0, h_x, p_sigma_x, conforming, 1.0)
}

/// As [`corner_refine`], with element diameters measured in units of
/// `length_scale`.
pub fn corner_refine_scaled(
    mesh0: &SpatialMesh,
    h_x: f64,
    p_sigma_x: usize,
    conforming: bool,
    length_scale: f64,
) -> Result<SpatialMesh> {
    if !(h_x > 0.0 && h_x <= 1.0) {
        return Err(Error::param(alloc::format!(
            "mesh width {h_x} not in (0, 1]"
        )));
    }
    if !(length_scale > 0.0) {
        return Err(Error::param("length scale must be positive"));
    }
    for c in &mesh0.corners {
        if !(0.0..1.0).contains(&c.delta) {
            return Err(Error::param(alloc::format!(
                "corner weight {} not in [0, 1)",
                c.delta
            )));
        }
        if !(c.radius > 0.0) {
            return Err(Error::param("corner radius must be positive"));
        }
    }
    let mut mesh = mesh0.clone();
    refine_width_in_place(&mut mesh, h_x * length_scale, conforming);
    let p = p_sigma_x as f64;
    for corner in mesh0.corners.clone() {
        let steps = corner_step_count(h_x, p_sigma_x, corner.delta);
        for j in 0..=(2 * steps + 1) {
            let jf = j as f64;
            let radius = 2f64.powf(-jf / 2.0) * corner.radius;
            let width =
                h_x * length_scale * 2f64.powf(-jf * (p + corner.delta) / (2.0 * (p + 1.0)));
            let marked = mesh.marks_where(|k| {
                mesh.distance_to(k, corner.location) <= radius
                    && mesh.diameter(k) > width * (1.0 + WIDTH_TOL)
            });
            mesh.bisect_marked_in_place(&marked, conforming);
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::super::{domains, BoundaryTag, CornerSpec, Point2};
    use super::*;

    fn right_triangle() -> SpatialMesh {
        SpatialMesh::new(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
            ],
            vec![([0, 1, 2], None, 0)],
            vec![
                ((0, 1), BoundaryTag::Dirichlet),
                ((1, 2), BoundaryTag::Dirichlet),
                ((2, 0), BoundaryTag::Dirichlet),
            ],
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn bisection_of_right_triangle() {
        let m = newest_vertex_bisection(&right_triangle(), 0).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.vertices[3], Point2::new(0.5, 0.5));
        for k in 0..2 {
            assert!((m.area(k) - 0.25).abs() < 1e-15);
            assert!(m.triangles[k].vertex_ids.contains(&3));
            assert_eq!(m.triangles[k].generation, 1);
            let (a, b) = m.triangles[k].edge(m.triangles[k].refinement_edge);
            assert!(a != 3 && b != 3, "refinement edge must face the new vertex");
        }
        assert_eq!(m.boundary_edges().count(), 4);
        m.validate().unwrap();
    }

    #[test]
    fn invalid_id_is_rejected() {
        assert_eq!(
            newest_vertex_bisection(&right_triangle(), 1),
            Err(Error::InvalidElement(1))
        );
        assert!(bisect_marked(&right_triangle(), &[5], true).is_err());
    }

    #[test]
    fn repeated_bisection_preserves_area() {
        let mut m = right_triangle();
        for k in 1..=8 {
            let all: Vec<usize> = (0..m.len()).collect();
            m = bisect_marked(&m, &all, false).unwrap();
            assert_eq!(m.len(), 1 << k);
            assert!(((m.total_area() - 0.5) / 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = domains::unit_square(BoundaryTag::Dirichlet);
        assert_eq!(bisect_marked(&m, &[], true).unwrap(), m);
    }

    #[test]
    fn conforming_closure_leaves_no_hanging_nodes() {
        let m = domains::unit_square(BoundaryTag::Dirichlet);
        let m = refine_to_width(&m, 0.5, true).unwrap();
        for k in [0, 3, 5] {
            let r = bisect_marked(&m, &[k], true).unwrap();
            assert_eq!(r.hanging_node_count(), 0);
            assert_eq!(r.geometric_hanging_nodes(), 0);
            r.validate().unwrap();
        }
    }

    #[test]
    fn nonconforming_pass_bisects_each_marked_once() {
        let m =
            bisect_marked(&domains::unit_square(BoundaryTag::Dirichlet), &[0, 1], true).unwrap();
        assert_eq!(m.len(), 4);
        let r = bisect_marked(&m, &[0, 1, 2, 3], false).unwrap();
        assert_eq!(r.len(), 8);
        let one = bisect_marked(&r, &[0], false).unwrap();
        assert_eq!(one.len(), 9);
        assert!(one.geometric_hanging_nodes() > 0);
        one.validate().unwrap();
    }

    #[test]
    fn uniform_square_levels() {
        let m0 = domains::unit_square(BoundaryTag::Dirichlet);
        for l in 0..5 {
            let m = refine_to_width(&m0, 2f64.sqrt() * 0.5f64.powi(l), true).unwrap();
            assert_eq!(m.len(), 2 * 4usize.pow(l as u32));
            assert!(m.statistics().h_max <= 2f64.sqrt() * 0.5f64.powi(l) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn step_counts() {
        assert_eq!(corner_step_count(0.25, 1, 1.0 / 3.0), 5);
        assert_eq!(corner_step_count(0.125, 2, 1.0 / 3.0), 13);
        assert_eq!(corner_step_count(0.5, 1, 0.0), 1);
        assert_eq!(corner_step_count(0.0625, 2, 0.4), 19);
    }

    #[test]
    fn corner_refine_rejects_bad_parameters() {
        let m = domains::gamma_domain(BoundaryTag::Neumann);
        assert!(corner_refine(&m, 0.0, 1, true).is_err());
        assert!(corner_refine(&m, 1.5, 1, true).is_err());
        let mut bad = m.clone();
        bad.corners = vec![CornerSpec {
            location: Point2::new(0.0, 0.0),
            delta: 1.0,
            radius: 0.2,
        }];
        assert!(corner_refine(&bad, 0.25, 1, true).is_err());
    }

    #[test]
    fn nonconforming_corner_refine_is_one_irregular() {
        let m = domains::gamma_domain(BoundaryTag::Neumann);
        let r = corner_refine(&m, 0.25, 1, false).unwrap();
        for k in 0..r.len() {
            assert!(!r.violates_one_irregularity(k));
        }
        assert!((r.total_area() - 0.75).abs() < 1e-13);
        r.validate().unwrap();
    }
}
