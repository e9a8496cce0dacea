//! Equivalent inclusion coupling. Each inhomogeneity is replaced by matrix
//! material carrying a polynomial eigen-temperature-gradient `u*` and
//! eigen-heat-source `Q*` about its centre:
//!
//! `u*_i = u0_i + u1_ip x_p + u2_ipq x_p x_q`, `Q* = Q0 + Q1_p x_p + Q2_pq x_p x_q`
//!
//! with `x` relative to the centre and `u2`, `Q2` symmetric in `p, q`. The
//! disturbance they cause is `u' = Σ_ρ D_iρ u*_iρ + C_s Σ_ρ L_ρ ∂Q*_ρ/∂t`.

use faer::Mat;

use crate::error::{Error, Result};
use crate::eshelby::eshelby;
use crate::kernels::Side;
use crate::model::{BilayerScenario, EigenOrder, Inclusion};
use crate::multi_index::{self, MultiIndex};
use crate::scalar::Vec3;

/// One eigen coefficient: which field, which monomial, and the storage
/// weight (2 for off-diagonal symmetric pairs kept once).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficient {
    Gradient { i: usize, density: MultiIndex, weight: f64 },
    Source { density: MultiIndex, weight: f64 },
}

impl Coefficient {
    pub fn density(&self) -> MultiIndex {
        match *self {
            Coefficient::Gradient { density, .. } | Coefficient::Source { density, .. } => density,
        }
    }

    pub fn weight(&self) -> f64 {
        match *self {
            Coefficient::Gradient { weight, .. } | Coefficient::Source { weight, .. } => weight,
        }
    }

    /// `∂^ρ` of the coefficient's monomial at the centre, per unit value.
    pub fn taylor_factor(&self) -> f64 {
        self.weight() * multi_index::factorial(&self.density())
    }
}

const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Coefficient order of one inclusion: `[u0, Q0]`, then `[u1 (i-major), Q1]`,
/// then `[u2 (i, p<=q), Q2 (p<=q)]`.
pub fn coefficients(order: EigenOrder) -> Vec<Coefficient> {
    let mut out = Vec::with_capacity(order.num());
    for i in 0..3 {
        out.push(Coefficient::Gradient { i, density: [0, 0, 0], weight: 1.0 });
    }
    out.push(Coefficient::Source { density: [0, 0, 0], weight: 1.0 });
    if order.degree() >= 1 {
        for i in 0..3 {
            for p in 0..3 {
                out.push(Coefficient::Gradient { i, density: multi_index::unit(p), weight: 1.0 });
            }
        }
        for p in 0..3 {
            out.push(Coefficient::Source { density: multi_index::unit(p), weight: 1.0 });
        }
    }
    if order.degree() >= 2 {
        let quad = |(p, q): (usize, usize)| (multi_index::add(&multi_index::unit(p), &multi_index::unit(q)), if p == q { 1.0 } else { 2.0 });
        for i in 0..3 {
            for pq in PAIRS {
                let (density, weight) = quad(pq);
                out.push(Coefficient::Gradient { i, density, weight });
            }
        }
        for pq in PAIRS {
            let (density, weight) = quad(pq);
            out.push(Coefficient::Source { density, weight });
        }
    }
    debug_assert_eq!(out.len(), order.num());
    out
}

/// Column offsets of each inclusion's coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenLayout {
    pub offsets: Vec<usize>,
    pub total: usize,
}

impl EigenLayout {
    pub fn new(inclusions: &[Inclusion]) -> Self {
        let mut offsets = Vec::with_capacity(inclusions.len());
        let mut total = 0;
        for inc in inclusions {
            offsets.push(total);
            total += inc.order.num();
        }
        Self { offsets, total }
    }

    pub fn range(&self, j: usize, inclusions: &[Inclusion]) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j] + inclusions[j].order.num()
    }
}

/// `∂^β u'(x)` per eigen coefficient: `(gradient part, source part)`, the
/// latter multiplying `∂Q*/∂t` (or `-iω Q̃*`).
pub fn disturbance_rows(
    x: &Vec3<f64>,
    betas: &[MultiIndex],
    inclusions: &[Inclusion],
    layout: &EigenLayout,
    scenario: &BilayerScenario,
) -> Result<(Mat<f64>, Mat<f64>)> {
    let nb = betas.len();
    let order = betas.iter().map(multi_index::order).max().unwrap_or(0);
    let mat = scenario.bimaterial();
    let sx = Side::of(x[2]);
    let mut stat = Mat::zeros(nb, layout.total);
    let mut dynm = Mat::zeros(nb, layout.total);
    for (j, inc) in inclusions.iter().enumerate() {
        let ev = eshelby(x, sx, &inc.ellipsoid, &mat, inc.order.degree(), order)?;
        let cs = inc.side_props(scenario).cp;
        for (c, coef) in coefficients(inc.order).iter().enumerate() {
            let col = layout.offsets[j] + c;
            match *coef {
                Coefficient::Gradient { i, density, weight } => {
                    let jet = ev.d(i, &density);
                    for (k, b) in betas.iter().enumerate() {
                        stat[(k, col)] = weight * jet.derivative(b);
                    }
                }
                Coefficient::Source { density, weight } => {
                    let jet = ev.l(&density);
                    for (k, b) in betas.iter().enumerate() {
                        dynm[(k, col)] = cs * weight * jet.derivative(b);
                    }
                }
            }
        }
    }
    Ok((stat, dynm))
}

/// `∂^β u'(x)` for given `u*` coefficients and `∂Q*/∂t` coefficients (both
/// laid out per [`EigenLayout`]; entries of the other kind are ignored).
pub fn eval_disturbance(
    x: &Vec3<f64>,
    betas: &[MultiIndex],
    inclusions: &[Inclusion],
    layout: &EigenLayout,
    scenario: &BilayerScenario,
    ustar: &[f64],
    qdot: &[f64],
) -> Result<Vec<f64>> {
    if ustar.len() != layout.total || qdot.len() != layout.total {
        return Err(Error::Validation(format!(
            "eigen coefficient vectors of length {}/{} for layout of {}",
            ustar.len(),
            qdot.len(),
            layout.total
        )));
    }
    let (stat, dynm) = disturbance_rows(x, betas, inclusions, layout, scenario)?;
    Ok((0..betas.len())
        .map(|k| (0..layout.total).map(|c| stat[(k, c)] * ustar[c] + dynm[(k, c)] * qdot[c]).sum())
        .collect())
}

/// One equivalence condition at an inclusion centre:
/// `factor · ∂^β u(x_c) - diag · coefficient = 0`, or `coefficient = 0` when
/// `factor` is `None` (no capacity on either side).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EimCondition {
    pub beta: MultiIndex,
    pub factor: Option<f64>,
    pub diag: f64,
}

/// Conditions in coefficient order: gradient coefficients match
/// `-K_s(∇u - u*) = -K_I ∇u`, source coefficients `C_s(u - Q*) = C_I u`, both
/// differentiated to the coefficient's monomial at the centre.
pub fn eim_conditions(inc: &Inclusion, scenario: &BilayerScenario) -> Vec<EimCondition> {
    let m = inc.side_props(scenario);
    coefficients(inc.order)
        .iter()
        .map(|c| match *c {
            Coefficient::Gradient { i, density, .. } => EimCondition {
                beta: multi_index::add(&density, &multi_index::unit(i)),
                factor: Some(1.0 - inc.props.k / m.k),
                diag: c.taylor_factor(),
            },
            Coefficient::Source { density, .. } => EimCondition {
                beta: density,
                factor: (m.cp > 0.0).then(|| 1.0 - inc.props.cp / m.cp),
                diag: c.taylor_factor(),
            },
        })
        .collect()
}

/// Field derivative orders needed at an inclusion centre.
pub fn needed_betas(order: EigenOrder) -> Vec<MultiIndex> {
    multi_index::all()[..multi_index::count_up_to(order.degree() + 1)].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{tests::section4, MaterialProps};

    #[test]
    fn coefficient_counts_and_factors() {
        for o in [EigenOrder::Uniform, EigenOrder::Linear, EigenOrder::Quadratic] {
            assert_eq!(coefficients(o).len(), o.num());
        }
        let q = coefficients(EigenOrder::Quadratic);
        // ∂_p∂_q of the stored monomial is 2 for both diagonal and mixed pairs
        for c in &q[16..] {
            assert_eq!(c.taylor_factor(), 2.0);
        }
        assert_eq!(q[4].taylor_factor(), 1.0);
    }

    #[test]
    fn zero_coefficients_give_zero_disturbance() {
        let sc = section4();
        let incs = vec![Inclusion::new([0.5, 0.5, 0.3], [0.1; 3], MaterialProps::new(10.0, 1.0), EigenOrder::Linear)];
        let layout = EigenLayout::new(&incs);
        let z = vec![0.0; layout.total];
        let v = eval_disturbance(&[0.2, 0.4, 0.6], &needed_betas(EigenOrder::Linear), &incs, &layout, &sc, &z, &z).unwrap();
        assert!(v.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn dilute_sphere_full_space() {
        let mut sc = section4();
        sc.lower = sc.upper;
        let km = sc.upper.k;
        let ki = 10.0 * km;
        let inc = Inclusion::new([0.5, 0.5, 0.5], [0.05; 3], MaterialProps::new(ki, sc.upper.cp), EigenOrder::Uniform);
        let incs = vec![inc.clone()];
        let layout = EigenLayout::new(&incs);
        // u = g x1 + u'; rows (1 - KI/Km) u_{,1} - u*_1 = 0
        let betas = [[1, 0, 0]];
        let (stat, _) = disturbance_rows(&inc.center(), &betas, &incs, &layout, &sc).unwrap();
        let cond = eim_conditions(&inc, &sc);
        let f = cond[0].factor.unwrap();
        let g = 1.0;
        let ustar = f * g / (cond[0].diag - f * stat[(0, 0)]);
        let expect = -3.0 * (ki - km) / (ki + 2.0 * km) * g;
        assert!((ustar - expect).abs() < 1e-12, "{ustar} vs {expect}");
        let interior = g + stat[(0, 0)] * ustar;
        assert!((interior - 3.0 * km / (ki + 2.0 * km)).abs() < 1e-12);
    }

    #[test]
    fn capacity_free_source_rows_are_identity() {
        let mut sc = section4();
        sc.upper.cp = 0.0;
        let inc = Inclusion::new([0.5, 0.5, 0.5], [0.1; 3], MaterialProps::new(1.0, 0.0), EigenOrder::Uniform);
        let cond = eim_conditions(&inc, &sc);
        assert_eq!(cond[3].factor, None);
        assert_eq!(cond[0].beta, [1, 0, 0]);
    }

    /// Solves the gradient conditions of one full-space sphere under a remote
    /// harmonic field `u0` (given by its derivatives at the centre) and
    /// returns `∇u` at `probe` inside.
    fn solve_single(order: EigenOrder, ki: f64, remote: impl Fn(&MultiIndex, &Vec3<f64>) -> f64, probe: Vec3<f64>) -> Vec3<f64> {
        let mut sc = section4();
        sc.lower = sc.upper;
        let c = [0.5, 0.5, 0.5];
        let inc = Inclusion::new(c, [0.05; 3], MaterialProps::new(ki, sc.upper.cp), order);
        let incs = vec![inc.clone()];
        let layout = EigenLayout::new(&incs);
        let betas = needed_betas(order);
        let (stat, _) = disturbance_rows(&c, &betas, &incs, &layout, &sc).unwrap();
        let conds = eim_conditions(&inc, &sc);
        let coefs = coefficients(order);
        let grad: Vec<usize> = (0..coefs.len()).filter(|&i| matches!(coefs[i], Coefficient::Gradient { .. })).collect();
        let n = grad.len();
        let a = Mat::<f64>::from_fn(n, n, |r, k| {
            let cond = conds[grad[r]];
            let b = betas.iter().position(|b| *b == cond.beta).unwrap();
            let f = cond.factor.unwrap();
            f * stat[(b, grad[k])] - if r == k { cond.diag } else { 0.0 }
        });
        let rhs = Mat::<f64>::from_fn(n, 1, |r, _| {
            let cond = conds[grad[r]];
            -cond.factor.unwrap() * remote(&cond.beta, &c)
        });
        let sol = faer::linalg::solvers::Solve::solve(&a.partial_piv_lu(), &rhs);
        let mut coef = vec![0.0; layout.total];
        for (k, &g) in grad.iter().enumerate() {
            coef[g] = sol[(k, 0)];
        }
        let zero = vec![0.0; layout.total];
        let d = eval_disturbance(&probe, &[[1, 0, 0], [0, 1, 0], [0, 0, 1]], &incs, &layout, &sc, &coef, &zero).unwrap();
        [0, 1, 2].map(|i| remote(&multi_index::unit(i), &probe) + d[i])
    }

    #[test]
    fn sphere_interior_field_ratios_by_degree() {
        let (km, ki) = (4.0, 40.0);
        // degree-2 harmonic x1 x2 (about the centre): linear order is exact
        let quad = |b: &MultiIndex, x: &Vec3<f64>| {
            let (p, q) = (x[0] - 0.5, x[1] - 0.5);
            match b {
                [0, 0, 0] => p * q,
                [1, 0, 0] => q,
                [0, 1, 0] => p,
                [1, 1, 0] => 1.0,
                _ => 0.0,
            }
        };
        let probe = [0.51, 0.52, 0.49];
        let ratio2 = 5.0 * km / (2.0 * ki + 3.0 * km);
        for order in [EigenOrder::Linear, EigenOrder::Quadratic] {
            let g = solve_single(order, ki, quad, probe);
            assert!((g[0] - ratio2 * (probe[1] - 0.5)).abs() < 1e-10, "{order:?} {g:?}");
            assert!((g[1] - ratio2 * (probe[0] - 0.5)).abs() < 1e-10);
        }
        // degree-3 harmonic x1 x2 x3: quadratic order is exact
        let cubic = |b: &MultiIndex, x: &Vec3<f64>| {
            let r = [x[0] - 0.5, x[1] - 0.5, x[2] - 0.5];
            let mut v = 1.0;
            for a in 0..3 {
                match b[a] {
                    0 => v *= r[a],
                    1 => {}
                    _ => return 0.0,
                }
            }
            v
        };
        let ratio3 = 7.0 * km / (3.0 * ki + 4.0 * km);
        let g = solve_single(EigenOrder::Quadratic, ki, cubic, probe);
        let r = [probe[0] - 0.5, probe[1] - 0.5, probe[2] - 0.5];
        assert!((g[2] - ratio3 * r[0] * r[1]).abs() < 1e-10 * r[0].abs(), "{g:?} vs {}", ratio3 * r[0] * r[1]);
        assert!((g[0] - ratio3 * r[1] * r[2]).abs() < 1e-12);
    }
}
