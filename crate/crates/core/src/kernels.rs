//! Steady bimaterial Green's function for two bonded half-spaces split by
//! the plane `x3 = 0`, built from the full-space `1/r` and one image term.
//!
//! `G(x, x')` solves `∇'·(K(x')∇'G) = -δ(x - x')` with continuity of `G` and
//! of `K ∂G/∂x3` across the interface.

use crate::error::{Error, Result};
use crate::multi_index::{self, MultiIndex};
use crate::scalar::{Scalar, Vec3};

/// Reflection signs across the interface plane.
pub const MIRROR: [f64; 3] = [1.0, 1.0, -1.0];

pub fn image_point<T: Scalar>(x: &Vec3<T>) -> Vec3<T> {
    [x[0], x[1], -x[2]]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    /// `x3 >= 0` belongs to the upper half-space.
    #[inline]
    pub fn of<T: Scalar>(x3: T) -> Side {
        if x3 >= T::zero() {
            Side::Upper
        } else {
            Side::Lower
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Upper => Side::Lower,
            Side::Lower => Side::Upper,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bimaterial<T> {
    pub k_upper: T,
    pub k_lower: T,
}

/// `G = direct·φ(x - x') + image·φ(x - Mx')`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Branch<T> {
    pub direct: T,
    pub image: T,
}

impl<T: Scalar> Bimaterial<T> {
    pub fn new(k_upper: T, k_lower: T) -> Self {
        Self { k_upper, k_lower }
    }

    #[inline]
    pub fn k(&self, side: Side) -> T {
        match side {
            Side::Upper => self.k_upper,
            Side::Lower => self.k_lower,
        }
    }

    /// `(K_s - K_b)/(K_s + K_b)` for a source on `source_side`.
    #[inline]
    pub fn kappa(&self, source_side: Side) -> T {
        let ks = self.k(source_side);
        let kb = self.k(source_side.other());
        (ks - kb) / (ks + kb)
    }

    #[inline]
    pub fn branch(&self, field_side: Side, source_side: Side) -> Branch<T> {
        let ks = self.k(source_side);
        let kb = self.k(source_side.other());
        let four_pi = T::lit(4.0) * T::PI();
        if field_side == source_side {
            Branch {
                direct: T::one() / (four_pi * ks),
                image: (ks - kb) / ((ks + kb) * four_pi * ks),
            }
        } else {
            Branch {
                direct: T::one() / (T::lit(2.0) * T::PI() * (ks + kb)),
                image: T::zero(),
            }
        }
    }
}

/// `G(x, x')` with sides taken from the sign of `x3`.
pub fn greens<T: Scalar>(x: &Vec3<T>, xs: &Vec3<T>, mat: &Bimaterial<T>) -> Result<T> {
    let d = [x[0] - xs[0], x[1] - xs[1], x[2] - xs[2]];
    if d[0] == T::zero() && d[1] == T::zero() && d[2] == T::zero() {
        return Err(Error::Singular(format!("x = x' = {x:?}")));
    }
    Ok(greens_sided(x, Side::of(x[2]), xs, Side::of(xs[2]), mat))
}

/// `G(x, x')` with explicit half-space membership (one-sided limits on the
/// interface). No coincidence check.
#[inline]
pub fn greens_sided<T: Scalar>(x: &Vec3<T>, sx: Side, xs: &Vec3<T>, ss: Side, mat: &Bimaterial<T>) -> T {
    let b = mat.branch(sx, ss);
    let r = ((x[0] - xs[0]).powi(2) + (x[1] - xs[1]).powi(2) + (x[2] - xs[2]).powi(2)).sqrt();
    let mut g = b.direct / r;
    if b.image != T::zero() {
        let rb = ((x[0] - xs[0]).powi(2) + (x[1] - xs[1]).powi(2) + (x[2] + xs[2]).powi(2)).sqrt();
        g += b.image / rb;
    }
    g
}

/// `G` and its source-point gradient `∂G/∂x'_j`.
#[inline]
pub fn greens_with_source_gradient<T: Scalar>(
    x: &Vec3<T>,
    sx: Side,
    xs: &Vec3<T>,
    ss: Side,
    mat: &Bimaterial<T>,
) -> (T, Vec3<T>) {
    let b = mat.branch(sx, ss);
    let d = [x[0] - xs[0], x[1] - xs[1], x[2] - xs[2]];
    let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let r = r2.sqrt();
    let ir3 = T::one() / (r2 * r);
    let mut g = b.direct / r;
    // ∂φ(x - x')/∂x'_j = d_j / r³
    let mut grad = [b.direct * d[0] * ir3, b.direct * d[1] * ir3, b.direct * d[2] * ir3];
    if b.image != T::zero() {
        let e = [d[0], d[1], x[2] + xs[2]];
        let rb2 = e[0] * e[0] + e[1] * e[1] + e[2] * e[2];
        let rb = rb2.sqrt();
        let irb3 = T::one() / (rb2 * rb);
        g += b.image / rb;
        // ∂φ(x - Mx')/∂x'_j = M_j e_j / r̄³
        grad[0] += b.image * e[0] * irb3;
        grad[1] += b.image * e[1] * irb3;
        grad[2] -= b.image * e[2] * irb3;
    }
    (g, grad)
}

/// Field-point derivatives `∂^α (1/|d|)` for all `|α| <= order <= 4`, in
/// graded multi-index order.
pub fn inv_r_derivs<T: Scalar>(d: &Vec3<T>, order: usize) -> Vec<T> {
    assert!(order <= 4, "1/r derivatives implemented up to order 4");
    let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let r = r2.sqrt();
    let ir = T::one() / r;
    let ir2 = ir * ir;
    let ir3 = ir * ir2;
    let ir5 = ir3 * ir2;
    let ir7 = ir5 * ir2;
    let ir9 = ir7 * ir2;
    let del = |a: usize, b: usize| if a == b { T::one() } else { T::zero() };
    let n = multi_index::count_up_to(order);
    let mut out = Vec::with_capacity(n);
    let mut idx = [0usize; 4];
    for m in &multi_index::all()[..n] {
        let k = expand(m, &mut idx);
        let v = match k {
            0 => ir,
            1 => -d[idx[0]] * ir3,
            2 => {
                let (i, j) = (idx[0], idx[1]);
                (T::lit(3.0) * d[i] * d[j] - r2 * del(i, j)) * ir5
            }
            3 => {
                let (i, j, l) = (idx[0], idx[1], idx[2]);
                -(T::lit(15.0) * d[i] * d[j] * d[l]
                    - T::lit(3.0) * r2 * (del(i, j) * d[l] + del(i, l) * d[j] + del(j, l) * d[i]))
                    * ir7
            }
            _ => {
                let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
                let quad = del(i, j) * d[k] * d[l]
                    + del(i, k) * d[j] * d[l]
                    + del(i, l) * d[j] * d[k]
                    + del(j, k) * d[i] * d[l]
                    + del(j, l) * d[i] * d[k]
                    + del(k, l) * d[i] * d[j];
                let dd = del(i, j) * del(k, l) + del(i, k) * del(j, l) + del(i, l) * del(j, k);
                (T::lit(105.0) * d[i] * d[j] * d[k] * d[l] - T::lit(15.0) * r2 * quad
                    + T::lit(3.0) * r2 * r2 * dd)
                    * ir9
            }
        };
        out.push(v);
    }
    out
}

fn expand(m: &MultiIndex, idx: &mut [usize; 4]) -> usize {
    let mut k = 0;
    for (axis, &c) in m.iter().enumerate() {
        for _ in 0..c {
            idx[k] = axis;
            k += 1;
        }
    }
    k
}

/// Derivatives of `G` with respect to the field point (`g`) and of the
/// source-point gradient `∂G/∂x'_j` with respect to the field point
/// (`g_src[j]`), all in graded multi-index order up to `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelEval<T> {
    pub order: usize,
    pub g: Vec<T>,
    pub g_src: [Vec<T>; 3],
}

impl<T: Scalar> KernelEval<T> {
    pub fn value(&self) -> T {
        self.g[0]
    }

    pub fn field(&self, m: &MultiIndex) -> T {
        self.g[multi_index::index_of(m)]
    }

    pub fn source(&self, j: usize, m: &MultiIndex) -> T {
        self.g_src[j][multi_index::index_of(m)]
    }
}

/// Analytic derivatives of `G` up to `max_order <= 3` in the field point
/// (source gradient derivatives need one order more of `1/r`).
pub fn greens_derivs<T: Scalar>(
    x: &Vec3<T>,
    sx: Side,
    xs: &Vec3<T>,
    ss: Side,
    mat: &Bimaterial<T>,
    max_order: usize,
) -> Result<KernelEval<T>> {
    if max_order > 3 {
        return Err(Error::Unsupported(format!("kernel derivative order {max_order} > 3")));
    }
    let d = [x[0] - xs[0], x[1] - xs[1], x[2] - xs[2]];
    if d.iter().all(|v| *v == T::zero()) {
        return Err(Error::Singular(format!("x = x' = {x:?}")));
    }
    let b = mat.branch(sx, ss);
    let phi = inv_r_derivs(&d, max_order + 1);
    let phib = if b.image != T::zero() {
        Some(inv_r_derivs(&[d[0], d[1], x[2] + xs[2]], max_order + 1))
    } else {
        None
    };
    let n = multi_index::count_up_to(max_order);
    let list = multi_index::all();
    let mut g = Vec::with_capacity(n);
    let mut g_src: [Vec<T>; 3] = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for m in &list[..n] {
        let i = multi_index::index_of(m);
        let mut v = b.direct * phi[i];
        if let Some(pb) = &phib {
            v += b.image * pb[i];
        }
        g.push(v);
        for (j, gs) in g_src.iter_mut().enumerate() {
            let up = multi_index::index_of(&multi_index::add(m, &multi_index::unit(j)));
            let mut v = -b.direct * phi[up];
            if let Some(pb) = &phib {
                v -= b.image * T::lit(MIRROR[j]) * pb[up];
            }
            gs.push(v);
        }
    }
    Ok(KernelEval {
        order: max_order,
        g,
        g_src,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mat() -> Bimaterial<f64> {
        Bimaterial::new(4.0, 2.0)
    }

    #[test]
    fn image_is_involution() {
        assert_eq!(image_point(&[1.0, 2.0, 3.0]), [1.0, 2.0, -3.0]);
        assert_eq!(image_point(&image_point(&[0.3, -1.0, 2.0])), [0.3, -1.0, 2.0]);
    }

    #[test]
    fn hand_values() {
        let g = greens(&[0.0, 0.0, 0.3], &[0.0, 0.0, 0.1], &mat()).unwrap();
        assert_relative_eq!(g, (5.0 + 2.5 / 3.0) / (16.0 * std::f64::consts::PI), max_relative = 1e-14);
        let g = greens(&[0.0, 0.0, -0.1], &[0.0, 0.0, 0.1], &mat()).unwrap();
        assert_relative_eq!(g, 1.0 / (2.0 * std::f64::consts::PI * 6.0 * 0.2), max_relative = 1e-14);
        assert!(greens(&[0.1, 0.0, 0.0], &[0.1, 0.0, 0.0], &mat()).is_err());
    }

    #[test]
    fn derivs_match_jets() {
        use crate::jet::Jet;
        let x = [0.2, 0.1, 0.4];
        let xs = [-0.1, 0.05, 0.1];
        let ev = greens_derivs(&x, Side::Upper, &xs, Side::Upper, &mat(), 3).unwrap();
        let b = mat().branch(Side::Upper, Side::Upper);
        let deg = 4;
        let jet_phi = |c: [f64; 3]| {
            let r2 = (0..3)
                .map(|k| {
                    let v = Jet::variable(x[k] - c[k], k, deg);
                    &v * &v
                })
                .fold(Jet::zero(deg), |a, b| &a + &b);
            r2.powf(-0.5)
        };
        let g = &jet_phi(xs).scale(b.direct) + &jet_phi(image_point(&xs)).scale(b.image);
        for (i, m) in multi_index::all()[..multi_index::count_up_to(3)].iter().enumerate() {
            assert_relative_eq!(ev.g[i], g.derivative(m), max_relative = 1e-12, epsilon = 1e-12);
        }
        let lap = ev.field(&[2, 0, 0]) + ev.field(&[0, 2, 0]) + ev.field(&[0, 0, 2]);
        assert!(lap.abs() < 1e-10 * ev.value());
    }

    #[test]
    fn source_gradient_matches_finite_difference() {
        let x = [0.2, 0.1, -0.4];
        let xs = [-0.1, 0.05, -0.15];
        let (_, grad) = greens_with_source_gradient(&x, Side::Lower, &xs, Side::Lower, &mat());
        let ev = greens_derivs(&x, Side::Lower, &xs, Side::Lower, &mat(), 0).unwrap();
        let h = 1e-6;
        for j in 0..3 {
            let mut p = xs;
            p[j] += h;
            let mut q = xs;
            q[j] -= h;
            let fd = (greens_sided(&x, Side::Lower, &p, Side::Lower, &mat())
                - greens_sided(&x, Side::Lower, &q, Side::Lower, &mat()))
                / (2.0 * h);
            assert_relative_eq!(grad[j], fd, max_relative = 1e-7);
            assert_relative_eq!(grad[j], ev.g_src[j][0], max_relative = 1e-13);
        }
    }
}
