//! Newtonian potentials of a solid ellipsoid with polynomial densities,
//! `Φ_ρ(x) = ∫_Ω (x' - c)^ρ / |x - x'| dV'`, for density multi-indices
//! `|ρ| <= 2`, as Taylor jets in the field point.
//!
//! With `W_n(x) = π a1 a2 a3 ∫_λ^∞ (1 - U(s))^n / Δ(s) ds`,
//! `U(s) = Σ X_k²/(a_k² + s)`, `Δ(s) = Π (a_k² + s)^{1/2}`:
//!
//! * `Φ = W_1`
//! * `Φ_p = -(a_p²/4) ∂_p W_2`
//! * `Φ_pq = δ_pq a_q² W_2 / 4 + (a_p² a_q² / 24) ∂_p ∂_q W_3`

pub mod iintegrals;
pub mod lambda;
pub mod oracle;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::multi_index::{self, MultiIndex};
use crate::scalar::{Scalar, Vec3};

pub use lambda::lambda_of;

/// Relative tolerance for treating semi-axes as equal.
const AXIS_EQ_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Sphere,
    /// `a1 = a2`, symmetry axis along `x3`.
    Spheroid,
    Triaxial,
}

impl Shape {
    pub fn classify<T: Scalar>(a: &Vec3<T>) -> Shape {
        let eq = |p: T, q: T| (p - q).abs() <= T::lit(AXIS_EQ_TOL) * p.max(q);
        if eq(a[0], a[1]) && eq(a[1], a[2]) {
            Shape::Sphere
        } else if eq(a[0], a[1]) {
            Shape::Spheroid
        } else {
            Shape::Triaxial
        }
    }
}

/// Axis-aligned ellipsoid.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Ellipsoid<T> {
    pub center: Vec3<T>,
    pub semi_axes: Vec3<T>,
}

impl<T: Scalar> Ellipsoid<T> {
    pub fn new(center: Vec3<T>, semi_axes: Vec3<T>) -> Self {
        Self { center, semi_axes }
    }

    pub fn mirrored(&self) -> Self {
        Self {
            center: [self.center[0], self.center[1], -self.center[2]],
            semi_axes: self.semi_axes,
        }
    }

    pub fn volume(&self) -> T {
        T::lit(4.0 / 3.0) * T::PI() * self.semi_axes[0] * self.semi_axes[1] * self.semi_axes[2]
    }

    /// `Σ ((x_k - c_k)/a_k)²`
    pub fn xi(&self, x: &Vec3<T>) -> T {
        lambda::xi(&self.relative(x), &self.semi_axes)
    }

    pub fn contains(&self, x: &Vec3<T>) -> bool {
        self.xi(x) <= T::one()
    }

    pub fn relative(&self, x: &Vec3<T>) -> Vec3<T> {
        [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]]
    }

    pub fn shape(&self) -> Shape {
        Shape::classify(&self.semi_axes)
    }
}

/// Highest field-derivative order supported for the potentials.
pub const MAX_DERIV_ORDER: usize = 4;

/// Potentials for all densities `|ρ| <= density_order` (graded order), each
/// a jet of degree `deriv_order` in the field point.
#[derive(Clone, Debug)]
pub struct PotentialSet<T> {
    pub density_order: usize,
    pub deriv_order: usize,
    pub phi: Vec<Jet<T>>,
}

impl<T: Scalar> PotentialSet<T> {
    pub fn get(&self, density: &MultiIndex) -> &Jet<T> {
        &self.phi[multi_index::index_of(density)]
    }

    /// `∂^β Φ_ρ`
    pub fn derivative(&self, density: &MultiIndex, beta: &MultiIndex) -> T {
        self.get(density).derivative(beta)
    }
}

pub fn phi_tensor<T: Scalar>(
    x: &Vec3<T>,
    ellipsoid: &Ellipsoid<T>,
    density_order: usize,
    deriv_order: usize,
) -> Result<PotentialSet<T>> {
    if density_order > 2 {
        return Err(Error::Unsupported(format!("density order {density_order} > 2")));
    }
    if deriv_order > MAX_DERIV_ORDER {
        return Err(Error::Unsupported(format!("potential derivative order {deriv_order} > {MAX_DERIV_ORDER}")));
    }
    let a = ellipsoid.semi_axes;
    if a.iter().any(|v| *v <= T::zero()) {
        return Err(Error::Domain(format!("non-positive semi-axes {a:?}")));
    }
    if ellipsoid.shape() == Shape::Triaxial {
        log::debug!("triaxial ellipsoid {a:?}: J-integrals by quadrature");
    }
    let x0 = ellipsoid.relative(x);
    let degree = deriv_order + density_order;
    let lam = lambda::lambda_jet(&x0, &a, degree);
    let nmax = density_order + 1;

    let xs: Vec<Jet<T>> = (0..3).map(|k| Jet::variable(x0[k], k, degree)).collect();
    // X_k^{2e} for e = 0..=nmax
    let powers: Vec<Vec<Jet<T>>> = xs
        .iter()
        .map(|v| {
            let sq = v * v;
            let mut out = vec![Jet::constant(T::one(), degree)];
            for e in 1..=nmax {
                let next = &out[e - 1] * &sq;
                out.push(next);
            }
            out
        })
        .collect();

    let nj = multi_index::count_up_to(nmax);
    let js: Vec<Jet<T>> = multi_index::all()[..nj]
        .iter()
        .map(|m| iintegrals::j_jet(m, &a, lam.as_ref(), degree))
        .collect();

    let prefactor = T::PI() * a[0] * a[1] * a[2];
    let w = |n: usize| -> Jet<T> {
        let mut acc = Jet::zero(degree);
        for (mi, m) in multi_index::all()[..multi_index::count_up_to(n)].iter().enumerate() {
            let j = multi_index::order(m);
            let coef = binomial(n, j) * multinomial(m) * if j.is_multiple_of(2) { 1.0 } else { -1.0 };
            let mono = &(&powers[0][m[0] as usize] * &powers[1][m[1] as usize]) * &powers[2][m[2] as usize];
            acc.axpy(T::lit(coef), &(&mono * &js[mi]));
        }
        acc.scale(prefactor)
    };

    let mut phi = Vec::with_capacity(multi_index::count_up_to(density_order));
    phi.push(w(1).truncate(deriv_order));
    if density_order >= 1 {
        let w2 = w(2);
        for p in 0..3 {
            phi.push(w2.partial(p).truncate(deriv_order).scale(-a[p] * a[p] / T::lit(4.0)));
        }
        if density_order >= 2 {
            let w3 = w(3);
            let w2t = w2.truncate(deriv_order);
            for m in &multi_index::all()[4..10] {
                let (p, q) = pair(m);
                let mut j = w3.partial(p).partial(q).scale(a[p] * a[p] * a[q] * a[q] / T::lit(24.0));
                if p == q {
                    j.axpy(a[q] * a[q] / T::lit(4.0), &w2t);
                }
                phi.push(j);
            }
        }
    }
    Ok(PotentialSet {
        density_order,
        deriv_order,
        phi,
    })
}

/// Cartesian index pair of a second-order multi-index, `p <= q`.
pub fn pair(m: &MultiIndex) -> (usize, usize) {
    let mut idx = [0usize; 2];
    let mut k = 0;
    for (axis, &c) in m.iter().enumerate() {
        for _ in 0..c {
            idx[k] = axis;
            k += 1;
        }
    }
    (idx[0], idx[1])
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn multinomial(m: &MultiIndex) -> f64 {
    let n = multi_index::order(m);
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    fact(n) / multi_index::factorial(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_sphere() -> Ellipsoid<f64> {
        Ellipsoid::new([0.0; 3], [1.0; 3])
    }

    #[test]
    fn sphere_classics() {
        let s = phi_tensor(&[0.0; 3], &unit_sphere(), 2, 2).unwrap();
        assert_relative_eq!(s.get(&[0, 0, 0]).value(), 2.0 * PI, max_relative = 1e-14);
        for p in 0..3 {
            assert!(s.get(&multi_index::unit(p)).value().abs() < 1e-15);
        }
        assert_relative_eq!(s.get(&[2, 0, 0]).value(), PI / 3.0, max_relative = 1e-13);
        let lap = s.derivative(&[0, 0, 0], &[2, 0, 0]) + s.derivative(&[0, 0, 0], &[0, 2, 0])
            + s.derivative(&[0, 0, 0], &[0, 0, 2]);
        assert_relative_eq!(lap, -4.0 * PI, max_relative = 1e-13);
        let ext = phi_tensor(&[2.0, 0.0, 0.0], &unit_sphere(), 0, 2).unwrap();
        assert_relative_eq!(ext.get(&[0, 0, 0]).value(), 4.0 * PI / 6.0, max_relative = 1e-14);
        assert_relative_eq!(ext.derivative(&[0, 0, 0], &[1, 0, 0]), -4.0 * PI / 12.0, max_relative = 1e-13);
    }

    #[test]
    fn exterior_dipole_far_field() {
        // ∫ x'_1 / |x - x'| dV' = (4π/15) x_1 / r³ for a unit sphere
        let x = [1.5, 0.7, -0.4];
        let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let s = phi_tensor(&x, &unit_sphere(), 1, 0).unwrap();
        assert_relative_eq!(s.get(&[1, 0, 0]).value(), 4.0 * PI / 15.0 * x[0] / r.powi(3), max_relative = 1e-13);
    }

    #[test]
    fn continuity_across_surface() {
        let e = Ellipsoid::new([0.1, -0.2, 0.3], [0.2, 0.2, 0.1]);
        let dir = [0.3f64, -0.5, 0.8];
        let n = (dir.iter().map(|v| v * v).sum::<f64>()).sqrt();
        // surface point along dir
        let t = 1.0 / ((dir[0] / n / 0.2).powi(2) + (dir[1] / n / 0.2).powi(2) + (dir[2] / n / 0.1).powi(2)).sqrt();
        let at = |s: f64| [0.1 + s * t * dir[0] / n, -0.2 + s * t * dir[1] / n, 0.3 + s * t * dir[2] / n];
        let inside = phi_tensor(&at(1.0 - 1e-9), &e, 2, 1).unwrap();
        let outside = phi_tensor(&at(1.0 + 1e-9), &e, 2, 1).unwrap();
        for (pi, po) in inside.phi.iter().zip(&outside.phi) {
            for (ci, co) in pi.coeffs().iter().zip(po.coeffs()) {
                assert!((ci - co).abs() < 1e-8 * (1e-3 + ci.abs()), "{ci} vs {co}");
            }
        }
    }
}
