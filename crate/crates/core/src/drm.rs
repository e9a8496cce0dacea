//! Dual reciprocity: radial basis `χ = 1 + r/ℓ + (r/ℓ)²` with particular
//! solution `Γ = r²/6 + r³/(12ℓ) + r⁴/(20ℓ²)` (`∇²Γ = χ`), and conversion of
//! the capacity-weighted domain integrals
//!
//! `V_m(x) = ∫_{D⁺} C_p' G χ_m dV' + ∫_{D⁻} C_p'' G χ_m dV'`
//!
//! into surface integrals over `∂D⁺` and `∂D⁻`. Each subdomain boundary
//! includes its side of the interface plane; the two interface sheets do not
//! cancel when `C_p' ≠ C_p''` or because `∂G/∂x3` jumps there.
//!
//! Per subdomain, Green's second identity gives
//! `∫ C_p G ∇²Γ = ∮ C_p (G ∂_nΓ - Γ ∂_nG) - c(x) (C_p/K)(x) Γ(x)`.
//! On the boundary the free term is eliminated by subtracting `Γ(x)` inside
//! the double-layer integral.

use faer::Mat;
use rayon::prelude::*;

use crate::bem::integrate::{adapted_points, is_regular, standard_points, IntegrationOptions};
use crate::bem::BoundaryMesh;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::kernels::{greens_derivs, greens_with_source_gradient, Bimaterial, Side};
use crate::model::BilayerScenario;
use crate::multi_index::{self, MultiIndex};
use crate::scalar::Vec3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rbf {
    /// Length scale `ℓ`.
    pub ell: f64,
}

impl Rbf {
    pub fn new(ell: f64) -> Self {
        Self { ell }
    }

    #[inline]
    pub fn chi_r(&self, r: f64) -> f64 {
        let s = r / self.ell;
        1.0 + s + s * s
    }

    #[inline]
    pub fn gamma_r(&self, r: f64) -> f64 {
        let l = self.ell;
        r * r * (1.0 / 6.0 + r / (12.0 * l) + r * r / (20.0 * l * l))
    }

    /// `∇Γ = gamma_grad_coeff(r) · (x - x^m)`
    #[inline]
    pub fn gamma_grad_coeff(&self, r: f64) -> f64 {
        let l = self.ell;
        1.0 / 3.0 + r / (4.0 * l) + r * r / (5.0 * l * l)
    }

    pub fn chi(&self, x: &Vec3<f64>, xm: &Vec3<f64>) -> f64 {
        self.chi_r(crate::scalar::dist3(x, xm))
    }

    /// `(Γ, ∇Γ)` at `x` for centre `xm`.
    pub fn gamma(&self, x: &Vec3<f64>, xm: &Vec3<f64>) -> (f64, Vec3<f64>) {
        let d = crate::scalar::sub3(x, xm);
        let r = crate::scalar::norm3(&d);
        let c = self.gamma_grad_coeff(r);
        (self.gamma_r(r), [c * d[0], c * d[1], c * d[2]])
    }

    /// Taylor jet of `Γ(· - xm)` about `x` (derivatives up to `degree`).
    pub fn gamma_jet(&self, x: &Vec3<f64>, xm: &Vec3<f64>, degree: usize) -> Jet<f64> {
        let r2 = (0..3)
            .map(|k| {
                let v = Jet::variable(x[k] - xm[k], k, degree);
                &v * &v
            })
            .fold(Jet::zero(degree), |a, b| &a + &b);
        let l = self.ell;
        let mut g = r2.scale(1.0 / 6.0);
        g.axpy(1.0 / (20.0 * l * l), &(&r2 * &r2));
        if r2.value() > 0.0 {
            let r3 = r2.powf(1.5);
            g.axpy(1.0 / (12.0 * l), &r3);
        }
        g
    }
}

/// Point on one side of a conversion surface with its capacity weight.
#[derive(Clone, Copy, Debug)]
pub struct DrmPoint {
    pub x: Vec3<f64>,
    /// Outward normal of the subdomain this sheet bounds.
    pub normal: Vec3<f64>,
    pub side: Side,
    /// `C_p` of that subdomain times the quadrature weight.
    pub cw: f64,
}

/// A panel of `∂D⁺ ∪ ∂D⁻` with one or two sheets.
#[derive(Clone, Debug)]
pub struct DrmPanel {
    pub corners: [Vec3<f64>; 4],
    /// `(side, C_p, outward normal)` per sheet.
    pub sheets: Vec<(Side, f64, Vec3<f64>)>,
}

#[derive(Clone, Debug)]
pub struct DrmSurface {
    pub panels: Vec<DrmPanel>,
    /// Standard points of all panels, grouped by panel.
    pub points: Vec<DrmPoint>,
    pub ranges: Vec<std::ops::Range<usize>>,
    pub order: usize,
}

impl DrmSurface {
    pub fn new(mesh: &BoundaryMesh, scenario: &BilayerScenario, order: usize) -> Self {
        let mut panels = Vec::with_capacity(mesh.elements.len() + mesh.interface.len());
        for e in &mesh.elements {
            panels.push(DrmPanel {
                corners: mesh.corners(e),
                sheets: vec![(e.side, scenario.props(e.side).cp, e.face.normal())],
            });
        }
        for q in &mesh.interface {
            panels.push(DrmPanel {
                corners: *q,
                sheets: vec![
                    (Side::Upper, scenario.upper.cp, [0.0, 0.0, -1.0]),
                    (Side::Lower, scenario.lower.cp, [0.0, 0.0, 1.0]),
                ],
            });
        }
        let mut points = Vec::new();
        let mut ranges = Vec::with_capacity(panels.len());
        for p in &panels {
            let start = points.len();
            for qp in standard_points(&p.corners, order) {
                for &(side, cp, normal) in &p.sheets {
                    points.push(DrmPoint {
                        x: qp.x,
                        normal,
                        side,
                        cw: cp * qp.weight,
                    });
                }
            }
            ranges.push(start..points.len());
        }
        Self {
            panels,
            points,
            ranges,
            order,
        }
    }

    /// Points adapted to `x` on panel `i`.
    pub fn adapted(&self, i: usize, x: &Vec3<f64>, opts: &IntegrationOptions) -> Vec<DrmPoint> {
        let p = &self.panels[i];
        let mut out = Vec::new();
        for qp in adapted_points(&p.corners, x, opts) {
            for &(side, cp, normal) in &p.sheets {
                out.push(DrmPoint {
                    x: qp.x,
                    normal,
                    side,
                    cw: cp * qp.weight,
                });
            }
        }
        out
    }

    pub fn special_panels(&self, x: &Vec3<f64>, opts: &IntegrationOptions) -> Vec<usize> {
        (0..self.panels.len())
            .filter(|&i| !is_regular(&self.panels[i].corners, x, opts))
            .collect()
    }
}

/// Interpolation centres (boundary nodes then interior points) and `ℓ`.
#[derive(Clone, Debug)]
pub struct RbfSystem {
    pub centers: Vec<Vec3<f64>>,
    pub rbf: Rbf,
}

impl RbfSystem {
    pub fn new(centers: Vec<Vec3<f64>>, ell: f64) -> Self {
        Self {
            centers,
            rbf: Rbf::new(ell),
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `F_km = χ(x_k, x^m)`
    pub fn interpolation_matrix(&self) -> Mat<f64> {
        let n = self.len();
        Mat::from_fn(n, n, |k, m| self.rbf.chi(&self.centers[k], &self.centers[m]))
    }

    /// `Γ_m(x)` for all centres.
    pub fn gamma_row(&self, x: &Vec3<f64>) -> Vec<f64> {
        self.centers.iter().map(|c| self.rbf.gamma(x, c).0).collect()
    }

    /// `B_qm = n_q·∇Γ_m(x_q)`, `C_qm = Γ_m(x_q)`.
    pub fn surface_matrices(&self, pts: &[DrmPoint]) -> (Mat<f64>, Mat<f64>) {
        let m = self.len();
        let mut b = Mat::zeros(pts.len(), m);
        let mut c = Mat::zeros(pts.len(), m);
        for (q, p) in pts.iter().enumerate() {
            for (j, xm) in self.centers.iter().enumerate() {
                let (g, grad) = self.rbf.gamma(&p.x, xm);
                b[(q, j)] = p.normal[0] * grad[0] + p.normal[1] * grad[1] + p.normal[2] * grad[2];
                c[(q, j)] = g;
            }
        }
        (b, c)
    }
}

/// Solves `F α = u` (explicit interpolation; the global system keeps `α` as
/// unknowns instead).
pub fn assemble_interpolation(sys: &RbfSystem, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != sys.len() {
        return Err(Error::Validation(format!("{} values for {} centres", u.len(), sys.len())));
    }
    for i in 0..sys.len() {
        for j in i + 1..sys.len() {
            if sys.centers[i] == sys.centers[j] {
                return Err(Error::Numerical(format!("duplicate interpolation centres {i} and {j}")));
            }
        }
    }
    let f = sys.interpolation_matrix();
    let rhs = Mat::from_fn(u.len(), 1, |i, _| u[i]);
    let lu = f.partial_piv_lu();
    let sol = faer::linalg::solvers::Solve::solve(&lu, &rhs);
    Ok((0..u.len()).map(|i| sol[(i, 0)]).collect())
}

#[inline]
fn ab_weights(x: &Vec3<f64>, sx: Side, p: &DrmPoint, mat: &Bimaterial<f64>) -> (f64, f64) {
    let (g, grad) = greens_with_source_gradient(x, sx, &p.x, p.side, mat);
    let dn = p.normal[0] * grad[0] + p.normal[1] * grad[1] + p.normal[2] * grad[2];
    (p.cw * g, p.cw * dn)
}

/// `V` rows at collocation points (boundary nodes or interior points) in the
/// regularized form, which needs no free term.
pub fn collocation_rows(
    rows: &[(Vec3<f64>, Side)],
    surface: &DrmSurface,
    sys: &RbfSystem,
    mat: &Bimaterial<f64>,
    opts: &IntegrationOptions,
) -> Mat<f64> {
    let (bmat, cmat) = sys.surface_matrices(&surface.points);
    let nq = surface.points.len();
    let m = sys.len();
    let mut out = Mat::<f64>::zeros(rows.len(), m);
    const CHUNK: usize = 256;
    for start in (0..rows.len()).step_by(CHUNK) {
        let end = (start + CHUNK).min(rows.len());
        let nr = end - start;
        let mut aw = Mat::<f64>::zeros(nr, nq);
        let mut bw = Mat::<f64>::zeros(nr, nq);
        let specials: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|r| {
                let (x, sx) = rows[r];
                let special = surface.special_panels(&x, opts);
                let mut extra = vec![0.0; m];
                let gx = sys.gamma_row(&x);
                for &i in &special {
                    for p in surface.adapted(i, &x, opts) {
                        let (a, b) = ab_weights(&x, sx, &p, mat);
                        for (j, xm) in sys.centers.iter().enumerate() {
                            let (g, grad) = sys.rbf.gamma(&p.x, xm);
                            let dn = p.normal[0] * grad[0] + p.normal[1] * grad[1] + p.normal[2] * grad[2];
                            extra[j] += a * dn - b * (g - gx[j]);
                        }
                    }
                }
                extra
            })
            .collect();
        let weights: Vec<(Vec<f64>, Vec<f64>)> = (start..end)
            .into_par_iter()
            .map(|r| {
                let (x, sx) = rows[r];
                let special = surface.special_panels(&x, opts);
                let mut a = vec![0.0; nq];
                let mut b = vec![0.0; nq];
                for (i, range) in surface.ranges.iter().enumerate() {
                    if special.binary_search(&i).is_ok() {
                        continue;
                    }
                    for q in range.clone() {
                        let (wa, wb) = ab_weights(&x, sx, &surface.points[q], mat);
                        a[q] = wa;
                        b[q] = wb;
                    }
                }
                (a, b)
            })
            .collect();
        let mut bsum = vec![0.0; nr];
        for (i, (a, b)) in weights.iter().enumerate() {
            for q in 0..nq {
                aw[(i, q)] = a[q];
                bw[(i, q)] = b[q];
            }
            bsum[i] = b.iter().sum();
        }
        let block = &aw * &bmat - &bw * &cmat;
        for i in 0..nr {
            let (x, _) = rows[start + i];
            let gx = sys.gamma_row(&x);
            for j in 0..m {
                out[(start + i, j)] = block[(i, j)] + bsum[i] * gx[j] + specials[i][j];
            }
        }
    }
    out
}

/// `∂^β V_m(x)` at an interior point, unregularized:
/// `Σ_q (∂^β a_q) B_qm - (∂^β b_q) C_qm - (C_p/K)(x) ∂^β Γ_m(x)`.
pub fn derivative_rows(
    x: &Vec3<f64>,
    betas: &[MultiIndex],
    surface: &DrmSurface,
    sys: &RbfSystem,
    scenario: &BilayerScenario,
    opts: &IntegrationOptions,
) -> Result<Mat<f64>> {
    let (bmat, cmat) = sys.surface_matrices(&surface.points);
    derivative_rows_with(x, betas, surface, sys, scenario, opts, &bmat, &cmat)
}

#[allow(clippy::too_many_arguments)]
pub fn derivative_rows_with(
    x: &Vec3<f64>,
    betas: &[MultiIndex],
    surface: &DrmSurface,
    sys: &RbfSystem,
    scenario: &BilayerScenario,
    opts: &IntegrationOptions,
    bmat: &Mat<f64>,
    cmat: &Mat<f64>,
) -> Result<Mat<f64>> {
    let mat = scenario.bimaterial();
    let sx = Side::of(x[2]);
    let order = betas.iter().map(multi_index::order).max().unwrap_or(0);
    let nb = betas.len();
    let nq = surface.points.len();
    let m = sys.len();
    let special = surface.special_panels(x, opts);
    let mut aw = Mat::<f64>::zeros(nb, nq);
    let mut bw = Mat::<f64>::zeros(nb, nq);
    let mut extra = Mat::<f64>::zeros(nb, m);
    let eval = |p: &DrmPoint| -> Result<(Vec<f64>, Vec<f64>)> {
        let ev = greens_derivs(x, sx, &p.x, p.side, &mat, order)?;
        let a = betas.iter().map(|b| p.cw * ev.field(b)).collect();
        let b = betas
            .iter()
            .map(|b| p.cw * (0..3).map(|j| p.normal[j] * ev.source(j, b)).sum::<f64>())
            .collect();
        Ok((a, b))
    };
    for (i, range) in surface.ranges.iter().enumerate() {
        if special.binary_search(&i).is_ok() {
            for p in surface.adapted(i, x, opts) {
                let (a, b) = eval(&p)?;
                for (j, xm) in sys.centers.iter().enumerate() {
                    let (g, grad) = sys.rbf.gamma(&p.x, xm);
                    let dn = p.normal[0] * grad[0] + p.normal[1] * grad[1] + p.normal[2] * grad[2];
                    for k in 0..nb {
                        extra[(k, j)] += a[k] * dn - b[k] * g;
                    }
                }
            }
            continue;
        }
        for q in range.clone() {
            let (a, b) = eval(&surface.points[q])?;
            for k in 0..nb {
                aw[(k, q)] = a[k];
                bw[(k, q)] = b[k];
            }
        }
    }
    let props = scenario.props(sx);
    let ratio = props.cp / props.k;
    let mut out = &aw * bmat - &bw * cmat + extra;
    for (j, xm) in sys.centers.iter().enumerate() {
        let jet = sys.rbf.gamma_jet(x, xm, order);
        for (k, b) in betas.iter().enumerate() {
            out[(k, j)] -= ratio * jet.derivative(b);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rbf_values_and_laplacian() {
        let rbf = Rbf::new(1.0);
        assert_eq!(rbf.chi_r(0.0), 1.0);
        assert_eq!(rbf.gamma_r(0.0), 0.0);
        assert_relative_eq!(rbf.chi_r(1.0), 3.0);
        assert_relative_eq!(rbf.gamma_r(1.0), 0.3, max_relative = 1e-15);
        let rbf = Rbf::new(0.37);
        let xm = [0.1, -0.2, 0.3];
        for x in [[0.5, 0.2, -0.1], [1.0, 1.0, 1.0], [0.11, -0.19, 0.31]] {
            let j = rbf.gamma_jet(&x, &xm, 2);
            let lap = j.derivative(&[2, 0, 0]) + j.derivative(&[0, 2, 0]) + j.derivative(&[0, 0, 2]);
            assert_relative_eq!(lap, rbf.chi(&x, &xm), max_relative = 1e-12);
            let (g, grad) = rbf.gamma(&x, &xm);
            assert_relative_eq!(g, j.value(), max_relative = 1e-14);
            assert_relative_eq!(grad[1], j.derivative(&[0, 1, 0]), max_relative = 1e-13);
        }
    }

    #[test]
    fn interpolation_reproduces_samples() {
        let centers: Vec<Vec3<f64>> = (0..20)
            .map(|i| {
                let t = i as f64;
                [(0.37 * t).sin(), (0.71 * t).cos(), (0.13 * t).sin() * 0.5]
            })
            .collect();
        let sys = RbfSystem::new(centers.clone(), 2.0);
        let u: Vec<f64> = centers.iter().map(|c| 1.0 + c[0] * c[1] - c[2]).collect();
        let alpha = assemble_interpolation(&sys, &u).unwrap();
        for (k, c) in centers.iter().enumerate() {
            let v: f64 = sys.centers.iter().zip(&alpha).map(|(m, a)| sys.rbf.chi(c, m) * a).sum();
            assert_relative_eq!(v, u[k], max_relative = 1e-10);
        }
        let one = RbfSystem::new(vec![[0.0; 3]], 1.0);
        assert_eq!(assemble_interpolation(&one, &[2.5]).unwrap(), vec![2.5]);
        let dup = RbfSystem::new(vec![[0.0; 3], [0.0; 3]], 1.0);
        assert!(assemble_interpolation(&dup, &[1.0, 1.0]).is_err());
    }
}
