use alloc::vec;
use alloc::vec::Vec;

use super::{BoundaryTag, CornerSpec, Point2, SpatialMesh};

/// The unit square split along the diagonal (0,0)–(1,1).
pub fn unit_square(tag: BoundaryTag) -> SpatialMesh {
    let vertices = vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
    ];
    let boundary = vec![((0, 1), tag), ((1, 2), tag), ((2, 3), tag), ((3, 0), tag)];
    SpatialMesh::new(
        vertices,
        vec![([0, 1, 2], None, 0), ([0, 2, 3], None, 0)],
        boundary,
        vec![1.0],
    )
    .expect("unit square is valid")
}

/// The Γ-shaped domain (−½,½)² \ (0,½)×(−½,0) as a six-triangle fan around
/// the re-entrant corner (0,0), with that corner registered.
pub fn gamma_domain(tag: BoundaryTag) -> SpatialMesh {
    gamma_domain_with_corner(tag, 1.0 / 3.0, 0.245)
}

pub fn gamma_domain_with_corner(tag: BoundaryTag, delta: f64, radius: f64) -> SpatialMesh {
    let ring = [
        (0.5, 0.0),
        (0.5, 0.5),
        (0.0, 0.5),
        (-0.5, 0.5),
        (-0.5, 0.0),
        (-0.5, -0.5),
        (0.0, -0.5),
    ];
    let mut vertices = vec![Point2::new(0.0, 0.0)];
    vertices.extend(ring.iter().map(|&(x, y)| Point2::new(x, y)));
    let triangles = (1..7).map(|i| ([0, i, i + 1], None, 0)).collect();
    let mut boundary: Vec<_> = (1..7).map(|i| ((i, i + 1), tag)).collect();
    boundary.push(((0, 1), tag));
    boundary.push(((7, 0), tag));
    let corner = CornerSpec::new(Point2::new(0.0, 0.0), delta, radius).expect("valid corner");
    SpatialMesh::new(vertices, triangles, boundary, vec![1.0])
        .expect("gamma domain is valid")
        .with_corners(vec![corner])
}

/// Structured triangulation of a rectangle with the given break lines; each
/// cell is split along its (x0,y0)–(x1,y1) diagonal. `subdomain_of` maps a
/// triangle centroid to a subdomain id.
pub fn structured_rectangle(
    xs: &[f64],
    ys: &[f64],
    speeds: Vec<f64>,
    subdomain_of: impl Fn(Point2) -> usize,
    tag: BoundaryTag,
) -> SpatialMesh {
    let nx = xs.len();
    let ny = ys.len();
    let id = |i: usize, j: usize| j * nx + i;
    let mut vertices = Vec::with_capacity(nx * ny);
    for &y in ys {
        for &x in xs {
            vertices.push(Point2::new(x, y));
        }
    }
    let mut triangles = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            for tri in [[a, b, c], [a, c, d]] {
                let p = tri.map(|v| vertices[v]);
                let centroid = Point2::new(
                    (p[0].x1 + p[1].x1 + p[2].x1) / 3.0,
                    (p[0].x2 + p[1].x2 + p[2].x2) / 3.0,
                );
                triangles.push((tri, None, subdomain_of(centroid)));
            }
        }
    }
    let mut boundary = Vec::new();
    for i in 0..nx - 1 {
        boundary.push(((id(i, 0), id(i + 1, 0)), tag));
        boundary.push(((id(i, ny - 1), id(i + 1, ny - 1)), tag));
    }
    for j in 0..ny - 1 {
        boundary.push(((id(0, j), id(0, j + 1)), tag));
        boundary.push(((id(nx - 1, j), id(nx - 1, j + 1)), tag));
    }
    SpatialMesh::new(vertices, triangles, boundary, speeds).expect("structured mesh is valid")
}

/// Break lines of the (0,2)² meshes, aligned with the interfaces x1 = 1.2 and
/// x2 = 1.
pub const BOX_XS: [f64; 5] = [0.0, 0.6, 1.2, 1.6, 2.0];
pub const BOX_YS: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_fan_geometry() {
        let m = gamma_domain(BoundaryTag::Neumann);
        assert_eq!(m.len(), 6);
        assert!((m.total_area() - 0.75).abs() < 1e-15);
        assert_eq!(m.boundary_edges().count(), 8);
        for k in 0..6 {
            assert!(m.triangles[k].vertex_ids.contains(&0));
            // Neighbouring fan triangles share their refinement edge.
            let (a, b) = m.triangles[k].edge(m.triangles[k].refinement_edge);
            assert!(a == 0 || b == 0);
        }
    }

    #[test]
    fn box_mesh_respects_interfaces() {
        let m = structured_rectangle(
            &BOX_XS,
            &BOX_YS,
            vec![1.0, 3.0],
            |c| usize::from(c.x1 > 1.2),
            BoundaryTag::Dirichlet,
        );
        assert_eq!(m.len(), 32);
        assert!((m.total_area() - 4.0).abs() < 1e-14);
        for k in 0..m.len() {
            let right = m.triangle_points(k).iter().all(|p| p.x1 >= 1.2);
            assert_eq!(m.speed(k) == 3.0, right);
        }
    }
}
