use dribem::bem::{build_box_mesh, IntegrationOptions};
use dribem::drm::{collocation_rows, derivative_rows, DrmSurface, RbfSystem};
use dribem::kernels::Side;
use dribem::model::{BcValue, BilayerScenario, FaceBc, MaterialProps, TimeControl};
use dribem::Vec3;

mod common;
use common::volume_integral;

fn scenario() -> BilayerScenario {
    BilayerScenario {
        origin: [0.0, 0.0],
        la: 1.0,
        lb: 1.0,
        h1: 1.0,
        h2: 1.0,
        upper: MaterialProps::new(4.0, 10.0),
        lower: MaterialProps::new(2.0, 3.0),
        bcs: [
            FaceBc::dirichlet(BcValue::Constant { value: 1.0 }),
            FaceBc::dirichlet(BcValue::Constant { value: 0.0 }),
            FaceBc::adiabatic(),
            FaceBc::adiabatic(),
            FaceBc::adiabatic(),
            FaceBc::adiabatic(),
        ],
        time: TimeControl::Steady,
        u0: 0.0,
    }
}

#[test]
fn surface_conversion_matches_volume_integral() {
    let sc = scenario();
    let mesh = build_box_mesh(&sc, 4, 4, 4, 4).unwrap();
    let surface = DrmSurface::new(&mesh, &sc, 4);
    let centers = vec![[0.3, 0.6, 0.4], [0.8, 0.1, -0.7], [0.5, 0.5, 0.0]];
    let sys = RbfSystem::new(centers.clone(), sc.length_scale());
    let opts = IntegrationOptions::default();
    let points: Vec<Vec3<f64>> = vec![[0.45, 0.35, 0.6], [0.2, 0.7, -0.3], [0.5, 0.5, 0.05]];
    let rows: Vec<(Vec3<f64>, Side)> = points.iter().map(|p| (*p, Side::of(p[2]))).collect();
    let coll = collocation_rows(&rows, &surface, &sys, &sc.bimaterial(), &opts);
    for (r, x) in points.iter().enumerate() {
        let der = derivative_rows(x, &[[0, 0, 0]], &surface, &sys, &sc, &opts).unwrap();
        for (m, xm) in centers.iter().enumerate() {
            let vol = volume_integral(&sc, x, &sys.rbf, xm);
            let reg = coll[(r, m)];
            assert!((der[(0, m)] - vol).abs() < 2e-4 * vol.abs(), "unregularized {r},{m}: {} vs {vol}", der[(0, m)]);
            assert!((reg - vol).abs() < 2e-4 * vol.abs(), "regularized {r},{m}: {reg} vs {vol}");
        }
    }
}

#[test]
fn boundary_node_conversion_matches_volume_integral() {
    let sc = scenario();
    let mesh = build_box_mesh(&sc, 4, 4, 4, 4).unwrap();
    let surface = DrmSurface::new(&mesh, &sc, 4);
    let centers = vec![[0.3, 0.6, 0.4], [0.7, 0.2, -0.5]];
    let sys = RbfSystem::new(centers.clone(), sc.length_scale());
    let opts = IntegrationOptions::default();
    let nodes: Vec<usize> = (0..mesh.num_nodes()).step_by(7).collect();
    let rows: Vec<(Vec3<f64>, Side)> = nodes.iter().map(|&n| (mesh.nodes[n], Side::of(mesh.nodes[n][2]))).collect();
    let coll = collocation_rows(&rows, &surface, &sys, &sc.bimaterial(), &opts);
    for (r, (x, _)) in rows.iter().enumerate() {
        for (m, xm) in centers.iter().enumerate() {
            let vol = volume_integral(&sc, x, &sys.rbf, xm);
            assert!((coll[(r, m)] - vol).abs() < 5e-4 * vol.abs(), "node {x:?}: {} vs {vol}", coll[(r, m)]);
        }
    }
}
