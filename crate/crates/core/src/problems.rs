//! The benchmark problems: smooth and singular manufactured solutions and
//! Gaussian pulses in layered media.

use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dg_assembly::ProblemData;
use crate::mesh2d::{domains, BoundaryTag, CornerSpec, Point2, SpatialMesh};
use crate::{Error, Result};

const SQRT2_PI: f64 = core::f64::consts::SQRT_2 * PI;

/// Which benchmark to set up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemId {
    /// Smooth standing wave on the unit square.
    Test1,
    /// Corner singularity on the Γ-shaped domain.
    Test2,
    /// Gaussian pulse crossing one material interface.
    Test3,
    /// Gaussian pulse near a four-material corner.
    Test4,
    /// Linear exact solution with mixed boundary conditions.
    Custom,
}

impl ProblemId {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "test1" => Ok(ProblemId::Test1),
            "test2" => Ok(ProblemId::Test2),
            "test3" => Ok(ProblemId::Test3),
            "test4" => Ok(ProblemId::Test4),
            "custom" => Ok(ProblemId::Custom),
            _ => Err(Error::UnknownProblem(s.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Test1 => "test1",
            ProblemId::Test2 => "test2",
            ProblemId::Test3 => "test3",
            ProblemId::Test4 => "test4",
            ProblemId::Custom => "custom",
        }
    }
}

/// A problem together with its coarse mesh and final time.
pub struct Problem {
    pub id: ProblemId,
    pub mesh0: SpatialMesh,
    pub t_end: f64,
    pub data: Box<dyn ProblemData>,
    /// Mesh width of the coarse mesh, the reference for level `l` widths
    /// `h0 · 2^{-l}`.
    pub h0: f64,
    /// Unit in which corner-grading distances and widths are measured.
    pub length_scale: f64,
}

impl core::fmt::Debug for Problem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Problem")
            .field("id", &self.id)
            .field("elements", &self.mesh0.len())
            .field("t_end", &self.t_end)
            .finish()
    }
}

pub fn make_problem(id: ProblemId) -> Problem {
    match id {
        ProblemId::Test1 => Problem {
            id,
            mesh0: domains::unit_square(BoundaryTag::Dirichlet),
            t_end: 1.0,
            data: Box::new(StandingWave),
            h0: core::f64::consts::SQRT_2,
            length_scale: 1.0,
        },
        ProblemId::Test2 => Problem {
            id,
            mesh0: domains::gamma_domain(BoundaryTag::Neumann),
            t_end: 1.0,
            data: Box::new(CornerWave),
            h0: 1.0,
            length_scale: 1.0,
        },
        ProblemId::Test3 => Problem {
            id,
            mesh0: test3_mesh(),
            t_end: 1.0,
            data: Box::new(GaussianPulse::new(Point2::new(1.0, 1.0), 0.01)),
            h0: 0.8,
            length_scale: 2.0 * core::f64::consts::SQRT_2,
        },
        ProblemId::Test4 => Problem {
            id,
            mesh0: test4_mesh(0.4, 0.392),
            t_end: 0.3,
            data: Box::new(GaussianPulse::new(Point2::new(1.0, 1.125), 0.01)),
            h0: 0.8,
            length_scale: 2.0 * core::f64::consts::SQRT_2,
        },
        ProblemId::Custom => Problem {
            id,
            mesh0: mixed_square(),
            t_end: 1.0,
            data: Box::new(LinearWave),
            h0: core::f64::consts::SQRT_2,
            length_scale: 1.0,
        },
    }
}

/// `(0,2)²` with `c = 1` for `x1 ≤ 1.2` and `c = 3` otherwise.
pub fn test3_mesh() -> SpatialMesh {
    domains::structured_rectangle(
        &domains::BOX_XS,
        &domains::BOX_YS,
        vec![1.0, 3.0],
        |p| usize::from(p.x1 > 1.2),
        BoundaryTag::Dirichlet,
    )
}

/// `(0,2)²` with four materials meeting at `(1.2, 1)`, registered as a
/// corner with weight `delta` and radius `radius`.
pub fn test4_mesh(delta: f64, radius: f64) -> SpatialMesh {
    let m = domains::structured_rectangle(
        &domains::BOX_XS,
        &domains::BOX_YS,
        vec![3.0, 1.0, 3.0, 1.0],
        |p| match (p.x1 > 1.2, p.x2 > 1.0) {
            (true, true) => 0,
            (false, true) => 1,
            (false, false) => 2,
            (true, false) => 3,
        },
        BoundaryTag::Dirichlet,
    );
    let corner = CornerSpec::new(Point2::new(1.2, 1.0), delta, radius).expect("valid corner");
    m.with_corners(vec![corner])
}

/// Unit square with Dirichlet data on the bottom and left edges and Neumann
/// data on the others.
pub fn mixed_square() -> SpatialMesh {
    let vertices = vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
    ];
    SpatialMesh::new(
        vertices,
        vec![([0, 1, 2], None, 0), ([0, 2, 3], None, 0)],
        vec![
            ((0, 1), BoundaryTag::Dirichlet),
            ((1, 2), BoundaryTag::Neumann),
            ((2, 3), BoundaryTag::Neumann),
            ((3, 0), BoundaryTag::Dirichlet),
        ],
        vec![1.0],
    )
    .expect("mixed square is valid")
}

/// `u = sin(πx1) sin(πx2) sin(√2πt)`, `v = ∂t u`, `σ = −∇u`.
#[derive(Debug, Clone, Copy)]
pub struct StandingWave;

impl StandingWave {
    pub fn solution(x: Point2, t: f64) -> [f64; 3] {
        let (s1, c1) = (PI * x.x1).sin_cos();
        let (s2, c2) = (PI * x.x2).sin_cos();
        let (st, ct) = (SQRT2_PI * t).sin_cos();
        [
            SQRT2_PI * s1 * s2 * ct,
            -PI * c1 * s2 * st,
            -PI * s1 * c2 * st,
        ]
    }
}

impl ProblemData for StandingWave {
    fn v0(&self, x: Point2) -> f64 {
        Self::solution(x, 0.0)[0]
    }
    fn sigma0(&self, _: Point2) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn source(&self, _: Point2, _: f64) -> f64 {
        0.0
    }
    fn dirichlet(&self, _: Point2, _: f64) -> f64 {
        0.0
    }
    fn neumann(&self, x: Point2, t: f64, n: [f64; 2]) -> f64 {
        let s = Self::solution(x, t);
        s[1] * n[0] + s[2] * n[1]
    }
    fn exact(&self, x: Point2, t: f64) -> Option<[f64; 3]> {
        Some(Self::solution(x, t))
    }
}

/// `u = r^γ sin(γθ) sin(√2πt)` with `γ = 2/3`, `θ ∈ [0, 2π)` measured from
/// the positive `x1` axis around the re-entrant corner at the origin.
#[derive(Debug, Clone, Copy)]
pub struct CornerWave;

impl CornerWave {
    pub const GAMMA: f64 = 2.0 / 3.0;

    pub fn polar(x: Point2) -> (f64, f64) {
        let r = (x.x1 * x.x1 + x.x2 * x.x2).sqrt();
        let mut th = x.x2.atan2(x.x1);
        if th < 0.0 {
            th += 2.0 * PI;
        }
        (r, th)
    }

    pub fn u(x: Point2, t: f64) -> f64 {
        let (r, th) = Self::polar(x);
        r.powf(Self::GAMMA) * (Self::GAMMA * th).sin() * (SQRT2_PI * t).sin()
    }

    pub fn solution(x: Point2, t: f64) -> [f64; 3] {
        let g = Self::GAMMA;
        let (r, th) = Self::polar(x);
        if r == 0.0 {
            return [0.0; 3];
        }
        let (st, ct) = (SQRT2_PI * t).sin_cos();
        let v = SQRT2_PI * r.powf(g) * (g * th).sin() * ct;
        // ∇(r^γ sin γθ) = γ r^{γ−1} (sin((γ−1)θ), cos((γ−1)θ)).
        let a = g * r.powf(g - 1.0) * st;
        [v, -a * ((g - 1.0) * th).sin(), -a * ((g - 1.0) * th).cos()]
    }
}

impl ProblemData for CornerWave {
    fn v0(&self, x: Point2) -> f64 {
        Self::solution(x, 0.0)[0]
    }
    fn sigma0(&self, _: Point2) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn source(&self, x: Point2, t: f64) -> f64 {
        -2.0 * PI * PI * Self::u(x, t)
    }
    fn dirichlet(&self, x: Point2, t: f64) -> f64 {
        Self::solution(x, t)[0]
    }
    fn neumann(&self, x: Point2, t: f64, n: [f64; 2]) -> f64 {
        let s = Self::solution(x, t);
        s[1] * n[0] + s[2] * n[1]
    }
    fn exact(&self, x: Point2, t: f64) -> Option<[f64; 3]> {
        Some(Self::solution(x, t))
    }
    fn singular_points(&self) -> Vec<Point2> {
        vec![Point2::new(0.0, 0.0)]
    }
}

/// `u0 = exp(−|x − x0|²/δ²)`, `v0 = 0`, `σ0 = −∇u0`, homogeneous data.
#[derive(Debug, Clone, Copy)]
pub struct GaussianPulse {
    pub center: Point2,
    pub width: f64,
}

impl GaussianPulse {
    pub fn new(center: Point2, width: f64) -> Self {
        GaussianPulse { center, width }
    }

    pub fn u0(&self, x: Point2) -> f64 {
        let d2 = (x.x1 - self.center.x1).powi(2) + (x.x2 - self.center.x2).powi(2);
        (-d2 / (self.width * self.width)).exp()
    }
}

impl ProblemData for GaussianPulse {
    fn v0(&self, _: Point2) -> f64 {
        0.0
    }
    fn sigma0(&self, x: Point2) -> [f64; 2] {
        let s = 2.0 * self.u0(x) / (self.width * self.width);
        [s * (x.x1 - self.center.x1), s * (x.x2 - self.center.x2)]
    }
    fn source(&self, _: Point2, _: f64) -> f64 {
        0.0
    }
    fn dirichlet(&self, _: Point2, _: f64) -> f64 {
        0.0
    }
    fn neumann(&self, _: Point2, _: f64, _: [f64; 2]) -> f64 {
        0.0
    }
    fn localized_initial_data(&self) -> Option<(Point2, f64)> {
        Some((self.center, self.width))
    }
}

/// `v = x1`, `σ = (−t, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct LinearWave;

impl ProblemData for LinearWave {
    fn v0(&self, x: Point2) -> f64 {
        x.x1
    }
    fn sigma0(&self, _: Point2) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn source(&self, _: Point2, _: f64) -> f64 {
        0.0
    }
    fn dirichlet(&self, x: Point2, _: f64) -> f64 {
        x.x1
    }
    fn neumann(&self, _: Point2, t: f64, n: [f64; 2]) -> f64 {
        -t * n[0]
    }
    fn exact(&self, x: Point2, t: f64) -> Option<[f64; 3]> {
        Some([x.x1, -t, 0.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn ids_round_trip() {
        for id in [
            ProblemId::Test1,
            ProblemId::Test2,
            ProblemId::Test3,
            ProblemId::Test4,
            ProblemId::Custom,
        ] {
            assert_eq!(ProblemId::parse(id.name()).unwrap(), id);
        }
        assert!(matches!(
            ProblemId::parse("test9"),
            Err(Error::UnknownProblem(_))
        ));
    }

    #[test]
    fn test1_initial_data() {
        let x = Point2::new(0.3, 0.7);
        let want = SQRT2_PI * (PI * 0.3).sin() * (PI * 0.7).sin();
        assert!(close(StandingWave.v0(x), want, 1e-15));
        assert_eq!(StandingWave.sigma0(x), [0.0, 0.0]);
    }

    #[test]
    fn test2_value_and_time_derivative() {
        let (r, th, t) = (0.5f64, PI / 2.0, 0.25);
        let x = Point2::new(r * th.cos(), r * th.sin());
        let want = SQRT2_PI * r.powf(2.0 / 3.0) * (PI / 3.0).sin() * (SQRT2_PI / 4.0).cos();
        let got = CornerWave::solution(x, t)[0];
        assert!(close(got, want, 1e-14));
        let eps = 1e-6;
        let fd = (CornerWave::u(x, t + eps) - CornerWave::u(x, t - eps)) / (2.0 * eps);
        assert!(close(got, fd, 1e-8));
    }

    #[test]
    fn test2_sigma_is_minus_gradient() {
        let eps = 1e-6;
        for &(x1, x2) in &[(-0.3, 0.2), (0.1, 0.4), (-0.2, -0.35), (0.45, 0.01)] {
            let x = Point2::new(x1, x2);
            let s = CornerWave::solution(x, 0.4);
            let d1 = (CornerWave::u(Point2::new(x1 + eps, x2), 0.4)
                - CornerWave::u(Point2::new(x1 - eps, x2), 0.4))
                / (2.0 * eps);
            let d2 = (CornerWave::u(Point2::new(x1, x2 + eps), 0.4)
                - CornerWave::u(Point2::new(x1, x2 - eps), 0.4))
                / (2.0 * eps);
            assert!(close(s[1], -d1, 1e-7) && close(s[2], -d2, 1e-7));
        }
    }

    #[test]
    fn test3_materials() {
        let p = make_problem(ProblemId::Test3);
        p.mesh0.validate().unwrap();
        for k in 0..p.mesh0.len() {
            let c = p.mesh0.centroid(k);
            let want = if c.x1 > 1.2 { 3.0 } else { 1.0 };
            assert_eq!(p.mesh0.speed(k), want);
            let pts = p.mesh0.triangle_points(k);
            assert!(pts
                .iter()
                .all(|q| (q.x1 <= 1.2) == (c.x1 <= 1.2) || q.x1 == 1.2));
        }
        assert_eq!(p.t_end, 1.0);
    }

    #[test]
    fn test4_quadrant_speeds() {
        let p = make_problem(ProblemId::Test4);
        let probe = |x1, x2| {
            let k = (0..p.mesh0.len())
                .find(|&k| p.mesh0.distance_to(k, Point2::new(x1, x2)) == 0.0)
                .unwrap();
            p.mesh0.speed(k)
        };
        assert_eq!(probe(1.5, 1.5), 3.0);
        assert_eq!(probe(0.5, 1.5), 1.0);
        assert_eq!(probe(0.5, 0.5), 3.0);
        assert_eq!(probe(1.5, 0.5), 1.0);
        assert_eq!(p.mesh0.corners[0].location, Point2::new(1.2, 1.0));
    }

    #[test]
    fn gaussian_sigma_is_minus_gradient() {
        let g = GaussianPulse::new(Point2::new(1.0, 1.0), 0.01);
        let x = Point2::new(1.004, 0.993);
        let eps = 1e-7;
        let d1 = (g.u0(Point2::new(x.x1 + eps, x.x2)) - g.u0(Point2::new(x.x1 - eps, x.x2)))
            / (2.0 * eps);
        let d2 = (g.u0(Point2::new(x.x1, x.x2 + eps)) - g.u0(Point2::new(x.x1, x.x2 - eps)))
            / (2.0 * eps);
        let s = g.sigma0(x);
        assert!(close(s[0], -d1, 1e-6) && close(s[1], -d2, 1e-6));
    }
}
