use dribem_oracle::{
    compare_fields, fd_solve_harmonic, fd_solve_steady, fd_solve_transient, probe_complex, slab_step_response, two_layer_harmonic,
    FaceCondition, FdGrid,
};

fn faces(top: f64, bottom: f64) -> [FaceCondition; 6] {
    [
        FaceCondition::temperature(top),
        FaceCondition::temperature(bottom),
        FaceCondition::insulated(),
        FaceCondition::insulated(),
        FaceCondition::insulated(),
        FaceCondition::insulated(),
    ]
}

#[test]
fn homogeneous_step_response_matches_series() {
    let g = FdGrid::new([0.0; 3], [1.0, 1.0, 2.0], [1, 1, 80], |_| (1.0, 2.0), faces(1.0, 0.0)).unwrap();
    let probes: Vec<[f64; 3]> = [0.5, 1.0, 1.5].iter().map(|z| [0.5, 0.5, *z]).collect();
    let (series, _) = fd_solve_transient(&g, 0.0, 0.0, 0.5, 8, 10, &probes).unwrap();
    for (n, t) in series.times.iter().enumerate() {
        let exact: Vec<f64> = probes.iter().map(|p| slab_step_response(2.0, 1.0, 2.0, p[2], *t, 50)).collect();
        let r = compare_fields(&series.values[n], &exact, None).unwrap();
        assert!(r.max_rel < 5e-3, "t = {t}: {r:?}");
    }
}

#[test]
fn bimaterial_steady_flux() {
    // Al2O3 over Ni, 100 K across 10 mm
    let (k1, k2) = (30.1, 90.7);
    let g = FdGrid::new(
        [0.0, 0.0, -0.005],
        [0.0025, 0.0025, 0.005],
        [2, 2, 40],
        |x| if x[2] >= 0.0 { (k1, 3.96e6) } else { (k2, 4.32e6) },
        faces(400.0, 300.0),
    )
    .unwrap();
    let u = fd_solve_steady(&g, 0.0).unwrap();
    let q = -2.0 * 100.0 * k1 * k2 / (0.01 * (k1 + k2));
    for z in [-0.004, -0.001, 0.002, 0.0045] {
        let v = g.probe_flux3(&u, &[0.001, 0.001, z]);
        assert!((v - q).abs() < 1e-8 * q.abs(), "{v} vs {q}");
    }
    assert!((q + 4.52e5).abs() < 0.005e5);
}

#[test]
fn refinement_is_second_order() {
    // steady conduction with a lateral Dirichlet variation: u = sinh-type 2-D field
    let exact = |x: &[f64; 3]| (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[2]).sinh() / std::f64::consts::PI.sinh();
    let err = |n: usize| {
        let f = [
            FaceCondition::Dirichlet(std::sync::Arc::new(move |x, _| (std::f64::consts::PI * x[0]).sin())),
            FaceCondition::temperature(0.0),
            FaceCondition::temperature(0.0),
            FaceCondition::temperature(0.0),
            FaceCondition::insulated(),
            FaceCondition::insulated(),
        ];
        let g = FdGrid::new([0.0; 3], [1.0, 1.0, 1.0], [n, 1, n], |_| (1.0, 1.0), f).unwrap();
        let u = fd_solve_steady(&g, 0.0).unwrap();
        let p = [0.5, 0.5, 0.5];
        (g.probe(&u, &p) - exact(&p)).abs()
    };
    let (e1, e2) = (err(20), err(40));
    let order = (e1 / e2).log2();
    assert!(order > 1.7 && order < 2.5, "observed order {order} ({e1}, {e2})");
}

#[test]
fn harmonic_two_layer_matches_closed_form() {
    for omega in [0.1, 1.0, 10.0] {
        let g = FdGrid::new(
            [0.0, 0.0, -1.0],
            [1.0, 1.0, 1.0],
            [1, 1, 400],
            |x| if x[2] >= 0.0 { (4.0, 10.0) } else { (2.0, 3.0) },
            faces(1.0, 0.0),
        )
        .unwrap();
        let u = fd_solve_harmonic(&g, omega).unwrap();
        let exact = two_layer_harmonic(4.0, 10.0, 1.0, 2.0, 3.0, 1.0, omega, 1.0, 0.0);
        let mut amax: f64 = 0.0;
        let zs: Vec<f64> = (1..20).map(|i| -1.0 + 0.1 * i as f64).collect();
        for &z in &zs {
            amax = amax.max(exact.at(z).norm());
        }
        for &z in &zs {
            let fd = probe_complex(&g, &u, &[0.5, 0.5, z]);
            let ex = exact.at(z);
            assert!((fd - ex).norm() < 2e-3 * amax, "ω = {omega}, z = {z}: {fd} vs {ex}");
        }
        let conj = fd_solve_harmonic(&g, -omega).unwrap();
        assert!(u.iter().zip(&conj).all(|(a, b)| (a - b.conj()).norm() < 1e-9));
    }
}
