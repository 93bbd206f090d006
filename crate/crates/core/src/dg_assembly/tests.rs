use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::mesh2d::{bisect_marked, refine_to_width, BoundaryTag, SpatialMesh};
use crate::spacetime::{build_spacetime, TemporalPartition};

/// Unit square, Dirichlet on the bottom and left edges, Neumann on the others.
fn mixed_square(speeds: Vec<f64>) -> SpatialMesh {
    let vertices = vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
    ];
    let sub = if speeds.len() > 1 { 1 } else { 0 };
    SpatialMesh::new(
        vertices,
        vec![([0, 1, 2], None, 0), ([0, 2, 3], None, sub)],
        vec![
            ((0, 1), BoundaryTag::Dirichlet),
            ((1, 2), BoundaryTag::Neumann),
            ((2, 3), BoundaryTag::Neumann),
            ((3, 0), BoundaryTag::Dirichlet),
        ],
        speeds,
    )
    .unwrap()
}

struct Zero;

impl ProblemData for Zero {
    fn v0(&self, _: Point2) -> f64 {
        0.0
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
    fn neumann(&self, _: Point2, _: f64, _: [f64; 2]) -> f64 {
        0.0
    }
}

/// `v = x1`, `σ = (−t, 0)`: `∇v + ∂tσ = 0` and `∇·σ + c⁻²∂tv = 0`.
struct Linear;

impl ProblemData for Linear {
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

fn random_field(disc: &Discretization<'_>, rng: &mut ChaCha8Rng) -> DiscreteField {
    let mut f = disc.zero_field();
    for s in &mut f.slabs {
        for x in s.iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
    }
    f
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn zero_data_gives_zero_solution() {
    let m = refine_to_width(&mixed_square(vec![1.0]), 0.5, true).unwrap();
    for slabs in [2, 4] {
        let st =
            build_spacetime(m.clone(), TemporalPartition::uniform(1.0, slabs).unwrap()).unwrap();
        let flux = FluxParams::from_mode(&st, FluxMode::Constant { a: 1.0, b: 1.0 }).unwrap();
        let disc = Discretization::new(&st, DegreeSpec::uniform(1), flux).unwrap();
        let u = march(&disc, &Zero).unwrap();
        assert!(u.coefficient_norm() < 1e-12);
    }
}

#[test]
fn linear_solution_is_reproduced() {
    for degrees in [
        DegreeSpec::uniform(1),
        DegreeSpec::new(2, 1, 1, 1),
        DegreeSpec::new(1, 2, 2, 2),
    ] {
        let m = refine_to_width(&mixed_square(vec![1.0, 2.0]), 0.5, true).unwrap();
        let st = build_spacetime(m, TemporalPartition::uniform(1.0, 3).unwrap()).unwrap();
        let flux = FluxParams::from_mode(&st, FluxMode::Constant { a: 1.0, b: 1.0 }).unwrap();
        let disc = Discretization::new(&st, degrees, flux).unwrap();
        let u = march(&disc, &Linear).unwrap();
        for k in 0..disc.n_spatial() {
            let c = disc.mesh.spatial.centroid(k);
            for slab in 0..3 {
                let (a, b) = disc.mesh.temporal.slab(slab);
                for t in [a, 0.5 * (a + b), b] {
                    let got = disc.evaluate(&u, k, slab, c, t);
                    let want = Linear.exact(c, t).unwrap();
                    for i in 0..3 {
                        assert!(
                            (got[i] - want[i]).abs() < 1e-10,
                            "{degrees:?} k={k} t={t}: {got:?}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn single_slab_march_matches_direct_solve() {
    let m = refine_to_width(&mixed_square(vec![1.0]), 0.5, true).unwrap();
    let st = build_spacetime(m, TemporalPartition::uniform(0.5, 1).unwrap()).unwrap();
    let flux = FluxParams::from_mode(&st, FluxMode::FaceScaled { a: 1.0, b: 1.0 }).unwrap();
    let disc = Discretization::new(&st, DegreeSpec::uniform(2), flux).unwrap();
    let marched = march(&disc, &Linear).unwrap();
    let sys = assemble_slab(&disc, 0, &Trace::initial(&disc, &Linear), &Linear).unwrap();
    let direct = sys.solve().unwrap();
    for (a, b) in marched.slabs[0].iter().zip(&direct) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn forms_agree_on_random_fields() {
    let m = refine_to_width(&mixed_square(vec![1.0, 3.0]), 0.5, false).unwrap();
    let m = bisect_marked(&m, &[0, 5], false).unwrap();
    assert!(m.geometric_hanging_nodes() > 0);
    let st = build_spacetime(m, TemporalPartition::new(vec![0.0, 0.3, 0.5, 1.0]).unwrap()).unwrap();
    let flux = FluxParams::from_mode(&st, FluxMode::FaceScaled { a: 2.0, b: 0.5 }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for degrees in [
        DegreeSpec::uniform(1),
        DegreeSpec::new(2, 1, 1, 1),
        DegreeSpec::new(1, 0, 2, 0),
    ] {
        let disc = Discretization::new(&st, degrees, flux.clone()).unwrap();
        for _ in 0..5 {
            let u = random_field(&disc, &mut rng);
            let z = random_field(&disc, &mut rng);
            let primal = apply_bilinear(&disc, BilinearForm::Primal, &u, &z).unwrap();
            let ibp = apply_bilinear(&disc, BilinearForm::IntegratedByParts, &u, &z).unwrap();
            let mat = apply_bilinear_matrix(&disc, &u, &z).unwrap();
            assert!(rel(primal, ibp) < 1e-11, "{primal} vs {ibp}");
            assert!(rel(primal, mat) < 1e-11, "{primal} vs {mat}");
        }
        let u = random_field(&disc, &mut rng);
        assert_eq!(
            apply_bilinear(&disc, BilinearForm::Primal, &disc.zero_field(), &u).unwrap(),
            0.0
        );
    }
}

#[test]
fn shape_mismatch_is_reported() {
    let m = mixed_square(vec![1.0]);
    let st = build_spacetime(m, TemporalPartition::uniform(1.0, 2).unwrap()).unwrap();
    let flux = FluxParams::from_mode(&st, FluxMode::Constant { a: 1.0, b: 1.0 }).unwrap();
    let disc = Discretization::new(&st, DegreeSpec::uniform(1), flux).unwrap();
    let other = DiscreteField::zeros(DegreeSpec::uniform(2), 2, 2);
    assert!(matches!(
        apply_bilinear(&disc, BilinearForm::Primal, &other, &disc.zero_field()),
        Err(Error::ShapeMismatch(_))
    ));
}

#[test]
fn refined_scaled_uses_mean_speed() {
    let m = mixed_square(vec![1.0, 3.0]);
    let st = build_spacetime(m, TemporalPartition::uniform(1.0, 1).unwrap()).unwrap();
    let flux = FluxParams::from_mode(&st, FluxMode::RefinedScaled { h_x: 0.5 }).unwrap();
    for (f, face) in st.spatial_faces.iter().enumerate() {
        if let EdgeKind::Interior { .. } = face.kind {
            assert!((flux.alpha[f] - 0.5 / (2.0 * face.length)).abs() < 1e-14);
            assert!((flux.beta[f] - 2.0 * face.length / 0.5).abs() < 1e-14);
        }
    }
}

#[test]
fn degree_validation() {
    assert!(DegreeSpec::new(1, 1, 1, 1).validate().is_ok());
    assert!(DegreeSpec::new(4, 1, 3, 1).validate().is_ok());
    assert!(DegreeSpec::new(2, 1, 0, 1).validate().is_err());
    assert!(DegreeSpec::new(2, 1, 2, 0).validate().is_err());
}

#[test]
fn layout_sizes() {
    let l = Layout::new(&DegreeSpec::new(1, 1, 1, 1));
    assert_eq!(l.block(), 18);
    let l = Layout::new(&DegreeSpec::new(4, 1, 3, 1));
    assert_eq!(l.block(), (15 + 20) * 2);
    assert_eq!(l.sigma(1, 0, 0), (15 + 10) * 2);
}

#[test]
fn flux_rejects_non_positive_values() {
    let p = FluxParams {
        alpha: vec![1.0, 0.0],
        beta: vec![1.0, 1.0],
    };
    assert!(p.validate().is_err());
}
