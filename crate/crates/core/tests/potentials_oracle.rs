use dribem::kernels::{greens_with_source_gradient, Bimaterial, Side};
use dribem::multi_index;
use dribem::potentials::oracle::{ellipsoid_integral, phi_quadrature_oracle};
use dribem::potentials::{phi_tensor, Ellipsoid};
use dribem::eshelby::eshelby;

fn densities() -> Vec<[u8; 3]> {
    multi_index::all()[..10].to_vec()
}

#[test]
fn spheroid_potentials_match_cubature() {
    let e = Ellipsoid::new([0.05, -0.02, 0.3], [0.2, 0.2, 0.1]);
    for x in [[0.4, 0.1, 0.2], [0.05, -0.02, 0.55], [-0.3, 0.2, 0.1], [0.1, 0.05, 0.33]] {
        let closed = phi_tensor(&x, &e, 2, 0).unwrap();
        let q = phi_quadrature_oracle(&x, &e, &densities(), 1e-9).unwrap();
        for (r, v) in q.iter().enumerate() {
            let c = closed.phi[r].value();
            assert!((c - v).abs() <= 1e-7 * q.iter().fold(0.0f64, |m, v| m.max(v.abs())), "x={x:?} ρ={r}: {c} vs {v}");
        }
    }
}

#[test]
fn prolate_and_triaxial_potentials_match_cubature() {
    for a in [[0.1, 0.1, 0.25], [0.3, 0.2, 0.1]] {
        let e = Ellipsoid::new([0.0, 0.0, 0.5], a);
        for x in [[0.35, 0.1, 0.6], [0.02, 0.01, 0.52]] {
            let closed = phi_tensor(&x, &e, 2, 0).unwrap();
            let q = phi_quadrature_oracle(&x, &e, &densities(), 1e-9).unwrap();
            let scale = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (r, v) in q.iter().enumerate() {
                assert!((closed.phi[r].value() - v).abs() <= 1e-7 * scale, "a={a:?} x={x:?} ρ={r}");
            }
        }
    }
}

#[test]
fn d_and_l_match_kernel_cubature() {
    let mat = Bimaterial::new(4.0, 2.0);
    let e = Ellipsoid::new([0.05, -0.02, 0.3], [0.2, 0.2, 0.1]);
    let ks = 4.0;
    for x in [[0.4, 0.1, 0.2], [0.1, 0.3, -0.2], [0.1, 0.0, 0.32]] {
        let side = Side::of(x[2]);
        let ev = eshelby(&x, side, &e, &mat, 2, 0).unwrap();
        let q = ellipsoid_integral(&x, &e, 40, 1e-8, |y, out| {
            let (g, grad) = greens_with_source_gradient(&x, side, y, Side::Upper, &mat);
            let rel = e.relative(y);
            for (r, m) in densities().iter().enumerate() {
                let rho = rel[0].powi(m[0] as i32) * rel[1].powi(m[1] as i32) * rel[2].powi(m[2] as i32);
                out[r] = g * rho;
                for i in 0..3 {
                    out[10 + 3 * r + i] = ks * grad[i] * rho;
                }
            }
        })
        .unwrap();
        let scale = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for r in 0..10 {
            assert!((ev.l[r].value() - q[r]).abs() < 1e-6 * scale, "L x={x:?} ρ={r}: {} vs {}", ev.l[r].value(), q[r]);
            for i in 0..3 {
                let v = ev.d[r][i].value();
                assert!((v - q[10 + 3 * r + i]).abs() < 1e-6 * scale, "D x={x:?} ρ={r} i={i}: {v} vs {}", q[10 + 3 * r + i]);
            }
        }
    }
}
