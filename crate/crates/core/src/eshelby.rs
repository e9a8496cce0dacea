//! Bimaterial Eshelby tensors for polynomial eigen-fields on an ellipsoid:
//!
//! * `D_{iρ}(x) = K_s ∫_Ω ∂G/∂x'_i (x' - c)^ρ dV'`
//! * `L_ρ(x) = ∫_Ω G (x' - c)^ρ dV'`
//!
//! assembled from the potentials of the ellipsoid and of its mirror image.
//! `K_s` is the conductivity on the inclusion's side.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::kernels::{Bimaterial, Side};
use crate::multi_index::{self, MultiIndex};
use crate::potentials::{phi_tensor, Ellipsoid};
use crate::scalar::{Scalar, Vec3};

#[derive(Clone, Debug)]
pub struct EshelbyEval<T> {
    pub density_order: usize,
    pub deriv_order: usize,
    /// `d[ρ][i]`: jet of `D_{iρ}` in the field point.
    pub d: Vec<[Jet<T>; 3]>,
    /// `l[ρ]`: jet of `L_ρ` in the field point.
    pub l: Vec<Jet<T>>,
}

impl<T: Scalar> EshelbyEval<T> {
    pub fn d(&self, i: usize, density: &MultiIndex) -> &Jet<T> {
        &self.d[multi_index::index_of(density)][i]
    }

    pub fn l(&self, density: &MultiIndex) -> &Jet<T> {
        &self.l[multi_index::index_of(density)]
    }
}

/// `(-1)^{ρ_3}`: the mirror sign of a density monomial.
#[inline]
pub fn mirror_sign(density: &MultiIndex) -> f64 {
    if density[2].is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Side of an inclusion; errors if it touches the interface plane.
pub fn inclusion_side<T: Scalar>(e: &Ellipsoid<T>) -> Result<Side> {
    let c3 = e.center[2];
    if c3.abs() <= e.semi_axes[2] {
        return Err(Error::Validation(format!(
            "ellipsoid at {:?} with semi-axes {:?} crosses the interface",
            e.center, e.semi_axes
        )));
    }
    Ok(Side::of(c3))
}

/// `D` and `L` for all densities `|ρ| <= density_order`, as jets of degree
/// `deriv_order <= 3` at `x`, with `x` on `field_side`.
pub fn eshelby<T: Scalar>(
    x: &Vec3<T>,
    field_side: Side,
    e: &Ellipsoid<T>,
    mat: &Bimaterial<T>,
    density_order: usize,
    deriv_order: usize,
) -> Result<EshelbyEval<T>> {
    if deriv_order > 3 {
        return Err(Error::Unsupported(format!("Eshelby derivative order {deriv_order} > 3")));
    }
    let side = inclusion_side(e)?;
    let ks = mat.k(side);
    let kb = mat.k(side.other());
    let pi = T::PI();
    let phi = phi_tensor(x, e, density_order, deriv_order + 1)?;
    let nd = multi_index::count_up_to(density_order);
    let densities = &multi_index::all()[..nd];
    let mut d = Vec::with_capacity(nd);
    let mut l = Vec::with_capacity(nd);
    if field_side == side {
        let kappa = (ks - kb) / (ks + kb);
        let img = phi_tensor(x, &e.mirrored(), density_order, deriv_order + 1)?;
        let cd = -T::one() / (T::lit(4.0) * pi);
        let cl = T::one() / (T::lit(4.0) * pi * ks);
        for (r, m) in densities.iter().enumerate() {
            let mr = T::lit(mirror_sign(m));
            let comp = |i: usize| {
                let mi = T::lit(crate::kernels::MIRROR[i]);
                let mut j = phi.phi[r].partial(i);
                j.axpy(kappa * mi * mr, &img.phi[r].partial(i));
                j.scale(cd)
            };
            d.push([comp(0), comp(1), comp(2)]);
            let mut lj = phi.phi[r].truncate(deriv_order);
            lj.axpy(kappa * mr, &img.phi[r].truncate(deriv_order));
            l.push(lj.scale(cl));
        }
    } else {
        let cd = -ks / (T::lit(2.0) * pi * (ks + kb));
        let cl = T::one() / (T::lit(2.0) * pi * (ks + kb));
        for r in 0..nd {
            let comp = |i: usize| phi.phi[r].partial(i).scale(cd);
            d.push([comp(0), comp(1), comp(2)]);
            l.push(phi.phi[r].truncate(deriv_order).scale(cl));
        }
    }
    Ok(EshelbyEval {
        density_order,
        deriv_order,
        d,
        l,
    })
}
