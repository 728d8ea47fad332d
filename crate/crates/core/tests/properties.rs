//! Invariants checked on every small mesh, plus randomized versions.

use elastmix::assembly::{Material, RefTables};
use elastmix::converge::level_mesh;
use elastmix::mesh::MacroMesh;
use elastmix::spaces::{DisplacementSpace, StressFamily, StressSpace};
use elastmix::verify::certificate::{certificate_on, min_angle_deg, MIN_ANGLE_DEG};
use elastmix::verify::properties::{DIV_TOL, PATCH_TOL, RM_TOL};
use elastmix::verify::unisolvence::{check_triangle, RCOND_TOL};
use elastmix::verify::{
    bubble_rm_orthogonality, div_containment, patch_test, patch_test_with, piola_divergence_residual, AffineMap,
};
use proptest::prelude::*;

fn ci_meshes() -> Vec<(StressFamily, MacroMesh)> {
    use StressFamily::*;
    [(TwoDP2, 1), (TwoDP2, 2), (ThreeDP3, 1), (ThreeDP2, 1), (ThreeDP2Flat, 1), (ThreeDP2Flat, 2)]
        .into_iter()
        .map(|(f, l)| (f, level_mesh(f, l).unwrap()))
        .collect()
}

#[test]
fn divergence_lands_in_displacement_space() {
    for (f, mm) in ci_meshes() {
        let space = StressSpace::new(&mm, f).unwrap();
        let disp = DisplacementSpace::new(&mm.fine, f.degree()).unwrap();
        let tables = RefTables::new(f.dim(), f.degree()).unwrap();
        let r = div_containment(&space, &disp, &mm, &tables);
        assert!(r < DIV_TOL, "{f}: {r:e}");
    }
}

#[test]
fn bubbles_are_orthogonal_to_rigid_motions() {
    for (f, mm) in ci_meshes() {
        let r = bubble_rm_orthogonality(&mm, f).unwrap();
        assert!(r < RM_TOL, "{f}: {r:e}");
    }
}

#[test]
fn linear_displacements_are_reproduced() {
    for (f, mm) in ci_meshes() {
        let p = patch_test(&mm, f).unwrap();
        assert!(p.pass, "{f}: {p:?}");
    }
}

fn triangle() -> impl Strategy<Value = Vec<[f64; 3]>> {
    proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), 3)
        .prop_map(|v| v.into_iter().map(|(x, y)| [x, y, 0.0]).collect::<Vec<_>>())
        .prop_filter("well shaped", |p| min_angle_deg(2, p) >= MIN_ANGLE_DEG)
}

fn tetrahedron() -> impl Strategy<Value = Vec<[f64; 3]>> {
    proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64), 4)
        .prop_map(|v| v.into_iter().map(|(x, y, z)| [x, y, z]).collect::<Vec<_>>())
        .prop_filter("well shaped", |p| min_angle_deg(3, p) >= MIN_ANGLE_DEG)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn piola_intertwines_divergence(
        m in proptest::array::uniform9(-2.0..2.0f64),
        b in proptest::array::uniform3(-1.0..1.0f64),
        x in proptest::array::uniform3(-1.0..1.0f64),
        dim in 2usize..=3,
    ) {
        let mut mat = [[m[0], m[1], m[2]], [m[3], m[4], m[5]], [m[6], m[7], m[8]]];
        if dim == 2 {
            mat[2] = [0.0; 3];
            mat[0][2] = 0.0;
            mat[1][2] = 0.0;
        }
        let Ok(map) = AffineMap::new(dim, mat, b) else { return Ok(()) };
        prop_assume!(map.det.abs() > 0.05);
        prop_assert!(piola_divergence_residual(&map, &[x]) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn random_triangles_certify(pts in triangle()) {
        let c = certificate_on(StressFamily::TwoDP2, &pts).unwrap();
        prop_assert!(c.pass, "{:?}", c);
        prop_assert!(c.rm_residual < RM_TOL);
        let h = check_triangle(&pts).unwrap();
        prop_assert!(h.pass && h.rcond > RCOND_TOL, "{:?}", h);
    }

    #[test]
    fn random_tetrahedra_certify(pts in tetrahedron(), p3 in any::<bool>()) {
        let f = if p3 { StressFamily::ThreeDP3 } else { StressFamily::ThreeDP2 };
        let c = certificate_on(f, &pts).unwrap();
        prop_assert!(c.pass, "{:?}", c);
        prop_assert!(c.rm_residual < RM_TOL);
    }

    #[test]
    fn patch_test_with_random_data(
        a in proptest::array::uniform3(-2.0..2.0f64),
        g in proptest::array::uniform9(-2.0..2.0f64),
        mu in 0.1..5.0f64,
        lambda in 0.0..50.0f64,
    ) {
        let mm = level_mesh(StressFamily::TwoDP2, 1).unwrap();
        let g = [[g[0], g[1], g[2]], [g[3], g[4], g[5]], [g[6], g[7], g[8]]];
        let p = patch_test_with(&mm, StressFamily::TwoDP2, &Material::new(mu, lambda, 2), a, g).unwrap();
        prop_assert!(p.stress_error < PATCH_TOL && p.displacement_error < PATCH_TOL, "{:?}", p);
    }
}
