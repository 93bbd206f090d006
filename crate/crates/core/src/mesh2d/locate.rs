use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{barycentric, Point2, SpatialMesh};

/// Bucket grid for locating the element containing a point.
#[derive(Debug, Clone)]
pub struct PointLocator {
    min: Point2,
    cell: (f64, f64),
    dims: (usize, usize),
    buckets: Vec<Vec<usize>>,
    triangles: Vec<[Point2; 3]>,
}

impl PointLocator {
    pub fn new(mesh: &SpatialMesh) -> Self {
        let (mut lo, mut hi) = (
            Point2::new(f64::INFINITY, f64::INFINITY),
            Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for t in &mesh.triangles {
            for &v in &t.vertex_ids {
                let p = mesh.vertices[v];
                lo = Point2::new(lo.x1.min(p.x1), lo.x2.min(p.x2));
                hi = Point2::new(hi.x1.max(p.x1), hi.x2.max(p.x2));
            }
        }
        let n = ((mesh.len() as f64).sqrt().ceil() as usize).max(1);
        let cell = (
            ((hi.x1 - lo.x1) / n as f64).max(1e-300),
            ((hi.x2 - lo.x2) / n as f64).max(1e-300),
        );
        let mut locator = PointLocator {
            min: lo,
            cell,
            dims: (n, n),
            buckets: vec![Vec::new(); n * n],
            triangles: (0..mesh.len()).map(|k| mesh.triangle_points(k)).collect(),
        };
        for k in 0..mesh.len() {
            let p = locator.triangles[k];
            let bx0 = p.iter().map(|q| q.x1).fold(f64::INFINITY, f64::min);
            let bx1 = p.iter().map(|q| q.x1).fold(f64::NEG_INFINITY, f64::max);
            let by0 = p.iter().map(|q| q.x2).fold(f64::INFINITY, f64::min);
            let by1 = p.iter().map(|q| q.x2).fold(f64::NEG_INFINITY, f64::max);
            let (i0, j0) = locator.cell_of(Point2::new(bx0, by0));
            let (i1, j1) = locator.cell_of(Point2::new(bx1, by1));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    locator.buckets[j * n + i].push(k);
                }
            }
        }
        locator
    }

    fn cell_of(&self, p: Point2) -> (usize, usize) {
        let fi = ((p.x1 - self.min.x1) / self.cell.0).floor();
        let fj = ((p.x2 - self.min.x2) / self.cell.1).floor();
        let clamp = |f: f64, n: usize| -> usize {
            if f < 0.0 {
                0
            } else {
                (f as usize).min(n - 1)
            }
        };
        (clamp(fi, self.dims.0), clamp(fj, self.dims.1))
    }

    /// The lowest-numbered element whose closure contains `p`, allowing a
    /// relative tolerance `1e-12` on the barycentric coordinates.
    pub fn locate(&self, p: Point2) -> Option<usize> {
        let (i, j) = self.cell_of(p);
        let bucket = &self.buckets[j * self.dims.0 + i];
        // Buckets are filled in element order, so the first hit is the lowest id.
        bucket.iter().copied().find(|&k| {
            let [a, b, c] = self.triangles[k];
            barycentric(a, b, c, p).iter().all(|&l| l >= -1e-12)
        })
    }
}
