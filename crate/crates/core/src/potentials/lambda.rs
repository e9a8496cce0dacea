//! The ellipsoidal parameter `λ(x)`: zero inside the ellipsoid, otherwise the
//! largest root of `Σ X_k²/(a_k² + λ) = 1` with `X = x - c`.

use crate::jet::Jet;
use crate::scalar::{Scalar, Vec3};

use super::Shape;

/// `Σ X_k² / a_k²`
pub fn xi<T: Scalar>(x: &Vec3<T>, a: &Vec3<T>) -> T {
    (0..3).map(|k| (x[k] / a[k]).powi(2)).sum()
}

/// `λ` for the relative position `x` (already centered).
pub fn lambda_of<T: Scalar>(x: &Vec3<T>, a: &Vec3<T>) -> T {
    if xi(x, a) <= T::one() {
        return T::zero();
    }
    match Shape::classify(a) {
        Shape::Sphere => (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - a[0] * a[0]).max(T::zero()),
        Shape::Spheroid => {
            let rho2 = x[0] * x[0] + x[1] * x[1];
            let z2 = x[2] * x[2];
            let (a2, b2) = (a[0] * a[0], a[2] * a[2]);
            let b = a2 + b2 - rho2 - z2;
            let c = a2 * b2 - rho2 * b2 - z2 * a2;
            root_of_quadratic(b, c).max(T::zero())
        }
        Shape::Triaxial => triaxial_root(x, a),
    }
}

/// Larger root of `λ² + bλ + c = 0` with `c <= 0`, in the cancellation-free form.
fn root_of_quadratic<T: Scalar>(b: T, c: T) -> T {
    let disc = (b * b - T::lit(4.0) * c).max(T::zero()).sqrt();
    if b > T::zero() {
        -T::lit(2.0) * c / (b + disc)
    } else {
        T::lit(0.5) * (disc - b)
    }
}

fn triaxial_root<T: Scalar>(x: &Vec3<T>, a: &Vec3<T>) -> T {
    let f = |l: T| (0..3).map(|k| x[k] * x[k] / (a[k] * a[k] + l)).sum::<T>() - T::one();
    let df = |l: T| -(0..3).map(|k| x[k] * x[k] / (a[k] * a[k] + l).powi(2)).sum::<T>();
    let mut lo = T::zero();
    let mut hi = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let mut l = T::lit(0.5) * hi;
    for _ in 0..200 {
        let fl = f(l);
        if fl > T::zero() {
            lo = l;
        } else {
            hi = l;
        }
        let step = fl / df(l);
        let mut next = l - step;
        if !(next > lo && next < hi) {
            next = T::lit(0.5) * (lo + hi);
        }
        if (next - l).abs() <= T::epsilon() * T::lit(4.0) * next.abs().max(T::min_positive_value()) {
            return next;
        }
        l = next;
    }
    l
}

/// Taylor jet of `λ` about the centered point `x0`; `None` when `x0` is
/// inside (or within `1e-12·a²` of the surface), where `λ ≡ 0`.
pub fn lambda_jet<T: Scalar>(x0: &Vec3<T>, a: &Vec3<T>, degree: usize) -> Option<Jet<T>> {
    let l0 = lambda_of(x0, a);
    let amin = a[0].min(a[1]).min(a[2]);
    if l0 < T::lit(1e-12) * amin * amin {
        return None;
    }
    let xs: Vec<Jet<T>> = (0..3).map(|k| Jet::variable(x0[k], k, degree)).collect();
    let sq: Vec<Jet<T>> = xs.iter().map(|v| v * v).collect();
    let jet = match Shape::classify(a) {
        Shape::Sphere => (&(&sq[0] + &sq[1]) + &sq[2]).add_const(-a[0] * a[0]),
        Shape::Spheroid => {
            let (a2, b2) = (a[0] * a[0], a[2] * a[2]);
            let rho2 = &sq[0] + &sq[1];
            let b = (&rho2 + &sq[2]).scale(-T::one()).add_const(a2 + b2);
            let c = (&rho2.scale(-b2) - &sq[2].scale(a2)).add_const(a2 * b2);
            let disc = (&(&b * &b) - &c.scale(T::lit(4.0))).sqrt();
            if b.value() > T::zero() {
                (&c.scale(-T::lit(2.0))) * &(&b + &disc).recip()
            } else {
                (&disc - &b).scale(T::lit(0.5))
            }
        }
        Shape::Triaxial => {
            // fixed-slope Newton: each sweep fixes one more Taylor degree
            let slope: T = -(0..3).map(|k| x0[k] * x0[k] / (a[k] * a[k] + l0).powi(2)).sum::<T>();
            let mut lam = Jet::constant(l0, degree);
            for _ in 0..=degree {
                let mut f = Jet::constant(-T::one(), degree);
                for k in 0..3 {
                    let inv = lam.clone().add_const(a[k] * a[k]).recip();
                    f.axpy(T::one(), &(&sq[k] * &inv));
                }
                lam.axpy(-T::one() / slope, &f);
            }
            lam
        }
    };
    Some(jet)
}
