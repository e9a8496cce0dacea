//! The ellipsoidal integrals
//! `J_m(λ) = ∫_λ^∞ Π_k (a_k² + s)^{-(m_k + 1/2)} ds`
//! and their Taylor jets in the field point through `λ(x)`.

use crate::jet::Jet;
use crate::multi_index::MultiIndex;
use crate::quadrature;
use crate::scalar::{Scalar, Vec3};

use super::Shape;

/// Below this `|a² - b²| / (b² + λ)` the spheroid recurrences lose digits to
/// cancellation and the substituted quadrature is used instead.
const SPHEROID_CLOSED_FORM_MIN_RATIO: f64 = 0.05;

pub fn j_value<T: Scalar>(m: &MultiIndex, a: &Vec3<T>, lambda: T) -> T {
    match Shape::classify(a) {
        Shape::Sphere => {
            let p = T::lit(f64::from(m[0] + m[1] + m[2]) + 0.5);
            (a[0] * a[0] + lambda).powf(-p) / p
        }
        Shape::Spheroid => {
            let a2 = a[0] * a[0];
            let b2 = a[2] * a[2];
            let d = a2 - b2;
            let u0sq = b2 + lambda;
            if (d / u0sq).abs() < T::lit(SPHEROID_CLOSED_FORM_MIN_RATIO) {
                j_numeric(m, a, lambda)
            } else {
                spheroid_closed(usize::from(m[0] + m[1]) + 1, usize::from(m[2]), d, u0sq.sqrt())
            }
        }
        Shape::Triaxial => j_numeric(m, a, lambda),
    }
}

/// `2 F(p, k)` with `F(p, k) = ∫_{u0}^∞ (u² + d)^{-p} u^{-2k} du`, the
/// spheroid integral after `u = √(b² + s)`.
fn spheroid_closed<T: Scalar>(p: usize, k: usize, d: T, u0: T) -> T {
    let two = T::lit(2.0);
    // F(q, 0) for q = 0..=p (F(0,0) unused)
    let mut f0 = vec![T::zero(); p + 1];
    f0[1] = if d > T::zero() {
        let sd = d.sqrt();
        (sd / u0).atan() / sd
    } else {
        let e = (-d).sqrt();
        (e / u0).atanh() / e
    };
    for q in 1..p {
        let qf = T::lit(q as f64);
        f0[q + 1] = -u0 / (two * qf * d * (u0 * u0 + d).powi(q as i32))
            + (two * qf - T::one()) / (two * qf * d) * f0[q];
    }
    // table[q][j] = F(q, j)
    let mut table = vec![vec![T::zero(); k + 1]; p + 1];
    for (q, row) in table.iter_mut().enumerate() {
        row[0] = f0[q];
    }
    for j in 1..=k {
        let jf = T::lit(j as f64);
        table[0][j] = u0.powf(T::one() - two * jf) / (two * jf - T::one());
        for q in 1..=p {
            table[q][j] = (table[q - 1][j] - table[q][j - 1]) / d;
        }
    }
    two * table[p][k]
}

/// Substitution `s = λ + A(1/τ² - 1)` with `A = a_min² + λ`, giving a smooth
/// integrand `2A τ^{2|m|} Π (A + δ_k τ²)^{-(m_k+1/2)}` on `[0, 1]`.
fn j_numeric<T: Scalar>(m: &MultiIndex, a: &Vec3<T>, lambda: T) -> T {
    let a2: Vec<f64> = a.iter().map(|v| v.to_f64_lossy().powi(2)).collect();
    let lam = lambda.to_f64_lossy();
    let amin2 = a2.iter().cloned().fold(f64::INFINITY, f64::min);
    let big_a = amin2 + lam;
    let delta: Vec<f64> = a2.iter().map(|v| v - amin2).collect();
    let mtot = i32::from(m[0] + m[1] + m[2]);
    let mut f = |t: f64| {
        let t2 = t * t;
        let mut v = 2.0 * big_a * t2.powi(mtot);
        for k in 0..3 {
            v *= (big_a + delta[k] * t2).powf(-(f64::from(m[k]) + 0.5));
        }
        v
    };
    T::lit(quadrature::adaptive(&mut f, 0.0, 1.0, 16, 1e-15, 30))
}

/// Univariate Taylor coefficients in `τ` of `Π_k (A_k + τ)^{-(m_k + 1/2)}`
/// with `A_k = a_k² + λ0`.
fn integrand_series<T: Scalar>(m: &MultiIndex, a: &Vec3<T>, lambda0: T, n: usize) -> Vec<T> {
    let mut acc = vec![T::zero(); n];
    acc[0] = T::one();
    for k in 0..3 {
        let base = a[k] * a[k] + lambda0;
        let p = T::lit(f64::from(m[k]) + 0.5);
        let mut s = Vec::with_capacity(n);
        let mut c = base.powf(-p);
        for t in 0..n {
            s.push(c);
            let tf = T::lit(t as f64);
            c = c * (-p - tf) / ((tf + T::one()) * base);
        }
        let mut out = vec![T::zero(); n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] += acc[i] * s[j];
            }
        }
        acc = out;
    }
    acc
}

/// Jet of `J_m(λ(x))` given the jet of `λ` (or the constant `J_m(0)` inside).
pub fn j_jet<T: Scalar>(m: &MultiIndex, a: &Vec3<T>, lambda: Option<&Jet<T>>, degree: usize) -> Jet<T> {
    match lambda {
        None => Jet::constant(j_value(m, a, T::zero()), degree),
        Some(lam) => {
            let l0 = lam.value();
            let f = integrand_series(m, a, l0, degree.max(1));
            let mut taylor = Vec::with_capacity(degree + 1);
            taylor.push(j_value(m, a, l0));
            for t in 1..=degree {
                taylor.push(-f[t - 1] / T::lit(t as f64));
            }
            lam.compose(&taylor)
        }
    }
}
