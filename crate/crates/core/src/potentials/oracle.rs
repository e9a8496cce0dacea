//! Brute-force cubature over an ellipsoid, used as an independent check of
//! the closed-form potentials and Eshelby tensors.
//!
//! Interior field points use rays from the field point (the `ρ²` Jacobian
//! absorbs `1/r` and `1/r²` kernels); exterior points use scaled spherical
//! coordinates about the center. Both use composite Gauss–Legendre rules with
//! global panel doubling until the requested tolerance is met.

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::quadrature::gauss_legendre;
use crate::scalar::Vec3;

use super::Ellipsoid;

const ORDER: usize = 10;
const MAX_PANELS: usize = 32;

/// `∫_Ω f(x') dV'` for a vector-valued integrand of length `n_out`; `f` may be
/// weakly singular (`|x - x'|^{-2}` or milder) at `x`.
pub fn ellipsoid_integral<F>(x: &Vec3<f64>, e: &Ellipsoid<f64>, n_out: usize, tol: f64, f: F) -> Result<Vec<f64>>
where
    F: Fn(&Vec3<f64>, &mut [f64]),
{
    let interior = e.xi(x) < 1.0;
    let mut panels = 2;
    let mut prev = eval(x, e, n_out, panels, interior, &f);
    while panels < MAX_PANELS {
        panels *= 2;
        let next = eval(x, e, n_out, panels, interior, &f);
        let scale = next.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let diff = next.iter().zip(&prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if diff <= tol * scale {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Accuracy(format!("ellipsoid cubature at {x:?} did not reach {tol:e}")))
}

fn eval<F>(x: &Vec3<f64>, e: &Ellipsoid<f64>, n_out: usize, panels: usize, interior: bool, f: &F) -> Vec<f64>
where
    F: Fn(&Vec3<f64>, &mut [f64]),
{
    let rule = gauss_legendre(ORDER);
    let pts = |a: f64, b: f64, np: usize| -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(np * ORDER);
        let h = (b - a) / np as f64;
        for p in 0..np {
            let lo = a + p as f64 * h;
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                out.push((lo + 0.5 * h * (t + 1.0), 0.5 * h * w));
            }
        }
        out
    };
    let pi = std::f64::consts::PI;
    let th = pts(0.0, pi, panels);
    let ph = pts(0.0, 2.0 * pi, 2 * panels);
    let radial = pts(0.0, 1.0, panels.div_ceil(2));
    let mut acc = vec![0.0; n_out];
    let mut buf = vec![0.0; n_out];
    let a = e.semi_axes;
    let x0 = e.relative(x);
    for &(t, wt) in &th {
        let (st, ct) = t.sin_cos();
        for &(p, wp) in &ph {
            let (sp, cp) = p.sin_cos();
            let w_ang = wt * wp * st;
            if interior {
                let om = [st * cp, st * sp, ct];
                let qa: f64 = (0..3).map(|k| (om[k] / a[k]).powi(2)).sum();
                let qb: f64 = (0..3).map(|k| x0[k] * om[k] / (a[k] * a[k])).sum();
                let qc: f64 = (0..3).map(|k| (x0[k] / a[k]).powi(2)).sum::<f64>() - 1.0;
                let rmax = (-qb + (qb * qb - qa * qc).sqrt()) / qa;
                for &(s, ws) in &radial {
                    let rho = s * rmax;
                    let y = [x[0] + rho * om[0], x[1] + rho * om[1], x[2] + rho * om[2]];
                    buf.iter_mut().for_each(|v| *v = 0.0);
                    f(&y, &mut buf);
                    let w = w_ang * ws * rmax * rho * rho;
                    for (o, b) in acc.iter_mut().zip(&buf) {
                        *o += w * b;
                    }
                }
            } else {
                for &(s, ws) in &radial {
                    let y = [
                        e.center[0] + a[0] * s * st * cp,
                        e.center[1] + a[1] * s * st * sp,
                        e.center[2] + a[2] * s * ct,
                    ];
                    buf.iter_mut().for_each(|v| *v = 0.0);
                    f(&y, &mut buf);
                    let w = w_ang * ws * a[0] * a[1] * a[2] * s * s;
                    for (o, b) in acc.iter_mut().zip(&buf) {
                        *o += w * b;
                    }
                }
            }
        }
    }
    acc
}

/// `∫_Ω (x' - c)^ρ / |x - x'| dV'` for each requested density multi-index.
pub fn phi_quadrature_oracle(x: &Vec3<f64>, e: &Ellipsoid<f64>, densities: &[MultiIndex], tol: f64) -> Result<Vec<f64>> {
    ellipsoid_integral(x, e, densities.len(), tol, |y, out| {
        let r = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
        let rel = e.relative(y);
        for (o, m) in out.iter_mut().zip(densities) {
            *o = rel[0].powi(m[0] as i32) * rel[1].powi(m[1] as i32) * rel[2].powi(m[2] as i32) / r;
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_center_and_exterior() {
        let e = Ellipsoid::new([0.0; 3], [1.0; 3]);
        let v = phi_quadrature_oracle(&[0.0; 3], &e, &[[0, 0, 0]], 1e-10).unwrap();
        assert_relative_eq!(v[0], 2.0 * std::f64::consts::PI, max_relative = 1e-9);
        let v = phi_quadrature_oracle(&[2.0, 0.0, 0.0], &e, &[[0, 0, 0]], 1e-10).unwrap();
        assert_relative_eq!(v[0], 4.0 * std::f64::consts::PI / 6.0, max_relative = 1e-9);
    }
}
