//! Cell-centred finite volumes on a uniform grid. Face conductances use the
//! harmonic mean of the adjacent cells, boundary faces a half-cell
//! conductance to the prescribed temperature.

use std::sync::Arc;

use num_complex::Complex64;

use crate::krylov::{cocg, pcg};
use crate::{OracleError, Result};

pub type FaceFn = Arc<dyn Fn(&[f64; 3], f64) -> f64 + Send + Sync>;

/// Boundary data as a function of position and time (for harmonic solves,
/// called with `t = 0` and read as the real amplitude).
#[derive(Clone)]
pub enum FaceCondition {
    Dirichlet(FaceFn),
    /// Prescribed outward heat flux.
    Flux(FaceFn),
}

impl FaceCondition {
    pub fn temperature(v: f64) -> Self {
        FaceCondition::Dirichlet(Arc::new(move |_, _| v))
    }

    pub fn insulated() -> Self {
        FaceCondition::Flux(Arc::new(|_, _| 0.0))
    }
}

/// Faces in the order `[z max, z min, x min, x max, y min, y max]`.
#[derive(Clone)]
pub struct FdGrid {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub n: [usize; 3],
    pub h: [f64; 3],
    pub k: Vec<f64>,
    pub cp: Vec<f64>,
    pub faces: [FaceCondition; 6],
    gface: [Vec<f64>; 3],
    diag_l: Vec<f64>,
}

/// Probe values per output time.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSeries {
    pub times: Vec<f64>,
    /// `values[time][probe]`
    pub values: Vec<Vec<f64>>,
    /// `q3` at the probes, same layout.
    pub flux3: Vec<Vec<f64>>,
}

impl FdGrid {
    /// Samples `material(x) -> (K, C_p)` at cell centres.
    pub fn new(lo: [f64; 3], hi: [f64; 3], n: [usize; 3], material: impl Fn(&[f64; 3]) -> (f64, f64), faces: [FaceCondition; 6]) -> Result<Self> {
        if n.contains(&0) || (0..3).any(|a| !(hi[a] > lo[a])) {
            return Err(OracleError::Input(format!("bad grid {n:?} over {lo:?}..{hi:?}")));
        }
        let h = [0, 1, 2].map(|a| (hi[a] - lo[a]) / n[a] as f64);
        let total = n[0] * n[1] * n[2];
        let mut k = Vec::with_capacity(total);
        let mut cp = Vec::with_capacity(total);
        for kz in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    let x = [lo[0] + (i as f64 + 0.5) * h[0], lo[1] + (j as f64 + 0.5) * h[1], lo[2] + (kz as f64 + 0.5) * h[2]];
                    let (kk, c) = material(&x);
                    if !(kk > 0.0) || !(c >= 0.0) {
                        return Err(OracleError::Input(format!("material at {x:?}: K = {kk}, Cp = {c}")));
                    }
                    k.push(kk);
                    cp.push(c);
                }
            }
        }
        let mut g = Self {
            lo,
            hi,
            n,
            h,
            k,
            cp,
            faces,
            gface: [Vec::new(), Vec::new(), Vec::new()],
            diag_l: Vec::new(),
        };
        g.precompute();
        Ok(g)
    }

    /// Errors unless a feature of size `diameter` spans at least six cells in
    /// every direction.
    pub fn check_resolution(&self, diameter: f64) -> Result<()> {
        let worst = self.h.iter().cloned().fold(0.0, f64::max);
        if diameter / worst < 6.0 {
            return Err(OracleError::Resolution(format!(
                "feature of size {diameter} spans {:.2} cells (< 6)",
                diameter / worst
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n[1] + j) * self.n[0] + i
    }

    pub fn center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [
            self.lo[0] + (i as f64 + 0.5) * self.h[0],
            self.lo[1] + (j as f64 + 0.5) * self.h[1],
            self.lo[2] + (k as f64 + 0.5) * self.h[2],
        ]
    }

    fn area(&self, axis: usize) -> f64 {
        self.h[(axis + 1) % 3] * self.h[(axis + 2) % 3]
    }

    fn volume(&self) -> f64 {
        self.h[0] * self.h[1] * self.h[2]
    }

    fn precompute(&mut self) {
        let n = self.n;
        for axis in 0..3 {
            let a = self.area(axis);
            let mut g = vec![0.0; self.len()];
            for kz in 0..n[2] {
                for j in 0..n[1] {
                    for i in 0..n[0] {
                        let mut c = [i, j, kz];
                        if c[axis] + 1 >= n[axis] {
                            continue;
                        }
                        let p = self.idx(c[0], c[1], c[2]);
                        c[axis] += 1;
                        let q = self.idx(c[0], c[1], c[2]);
                        let (ka, kb) = (self.k[p], self.k[q]);
                        g[p] = a / (0.5 * self.h[axis] / ka + 0.5 * self.h[axis] / kb);
                    }
                }
            }
            self.gface[axis] = g;
        }
        let mut d = vec![0.0; self.len()];
        self.for_each_boundary(|g, _, p, cond, _| {
            if let FaceCondition::Dirichlet(_) = cond {
                d[p] += g;
            }
        });
        self.diag_l = d;
    }

    /// Calls `f(conductance, area, cell, condition, face point)` for every
    /// boundary face of every boundary cell.
    fn for_each_boundary(&self, mut f: impl FnMut(f64, f64, usize, &FaceCondition, [f64; 3])) {
        let n = self.n;
        // (axis, at max?, face index)
        let faces = [(2, true, 0), (2, false, 1), (0, false, 2), (0, true, 3), (1, false, 4), (1, true, 5)];
        for (axis, at_max, fi) in faces {
            let a = self.area(axis);
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            for iu in 0..n[u] {
                for iv in 0..n[v] {
                    let mut c = [0usize; 3];
                    c[axis] = if at_max { n[axis] - 1 } else { 0 };
                    c[u] = iu;
                    c[v] = iv;
                    let p = self.idx(c[0], c[1], c[2]);
                    let mut x = self.center(c[0], c[1], c[2]);
                    x[axis] = if at_max { self.hi[axis] } else { self.lo[axis] };
                    let g = a * self.k[p] / (0.5 * self.h[axis]);
                    f(g, a, p, &self.faces[fi], x);
                }
            }
        }
    }

    /// `L u`: net conductive outflow, including Dirichlet faces.
    fn apply_l<T>(&self, u: &[T], out: &mut [T])
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::AddAssign + std::ops::SubAssign,
    {
        for (p, o) in out.iter_mut().enumerate() {
            *o = u[p] * self.diag_l[p];
        }
        let n = self.n;
        let stride = [1, n[0], n[0] * n[1]];
        for axis in 0..3 {
            let g = &self.gface[axis];
            for p in 0..self.len() {
                let gp = g[p];
                if gp == 0.0 {
                    continue;
                }
                let q = p + stride[axis];
                let f = (u[p] - u[q]) * gp;
                out[p] += f;
                out[q] -= f;
            }
        }
    }

    fn l_diagonal(&self) -> Vec<f64> {
        let n = self.n;
        let stride = [1, n[0], n[0] * n[1]];
        let mut d = self.diag_l.clone();
        for axis in 0..3 {
            for p in 0..self.len() {
                let gp = self.gface[axis][p];
                if gp != 0.0 {
                    d[p] += gp;
                    d[p + stride[axis]] += gp;
                }
            }
        }
        d
    }

    /// Boundary load at time `t`.
    fn load(&self, t: f64) -> Vec<f64> {
        let mut b = vec![0.0; self.len()];
        self.for_each_boundary(|g, a, p, cond, x| match cond {
            FaceCondition::Dirichlet(f) => b[p] += g * f(&x, t),
            FaceCondition::Flux(f) => b[p] -= a * f(&x, t),
        });
        b
    }

    fn has_dirichlet(&self) -> bool {
        self.faces.iter().any(|f| matches!(f, FaceCondition::Dirichlet(_)))
    }

    fn column_value(&self, u: &[f64], i: usize, j: usize, z: f64) -> f64 {
        let n = self.n;
        let s = (z - self.lo[2]) / self.h[2] - 0.5;
        if s <= 0.0 {
            return u[self.idx(i, j, 0)];
        }
        if s >= (n[2] - 1) as f64 {
            return u[self.idx(i, j, n[2] - 1)];
        }
        let k = (s.floor() as usize).min(n[2] - 2);
        let f = s - k as f64;
        let (p, q) = (self.idx(i, j, k), self.idx(i, j, k + 1));
        if self.k[p] == self.k[q] {
            return u[p] * (1.0 - f) + u[q] * f;
        }
        // piecewise linear through the face value fixed by flux continuity
        let uf = (self.k[p] * u[p] + self.k[q] * u[q]) / (self.k[p] + self.k[q]);
        if f <= 0.5 {
            u[p] + (uf - u[p]) * 2.0 * f
        } else {
            uf + (u[q] - uf) * 2.0 * (f - 0.5)
        }
    }

    fn column_flux3(&self, u: &[f64], i: usize, j: usize, z: f64) -> f64 {
        let n = self.n;
        let face_flux = |k: usize| {
            let p = self.idx(i, j, k);
            let q = self.idx(i, j, k + 1);
            -self.gface[2][p] * (u[q] - u[p]) / self.area(2)
        };
        if n[2] < 2 {
            return 0.0;
        }
        // faces between cells k and k+1 sit at lo + (k+1) h
        let s = (z - self.lo[2]) / self.h[2] - 1.0;
        let k = (s.floor().max(0.0) as usize).min(n[2] - 2);
        if k + 1 > n[2] - 2 || s < 0.0 {
            return face_flux(k);
        }
        let f = (s - k as f64).clamp(0.0, 1.0);
        face_flux(k) * (1.0 - f) + face_flux(k + 1) * f
    }

    fn lateral_weights(&self, x: &[f64; 3]) -> [(usize, usize, f64); 4] {
        let axis_w = |a: usize| {
            let s = (x[a] - self.lo[a]) / self.h[a] - 0.5;
            let m = self.n[a];
            if m == 1 || s <= 0.0 {
                (0, 0, 0.0)
            } else if s >= (m - 1) as f64 {
                (m - 1, m - 1, 0.0)
            } else {
                let i = s.floor() as usize;
                (i, i + 1, s - i as f64)
            }
        };
        let (i0, i1, fx) = axis_w(0);
        let (j0, j1, fy) = axis_w(1);
        [
            (i0, j0, (1.0 - fx) * (1.0 - fy)),
            (i1, j0, fx * (1.0 - fy)),
            (i0, j1, (1.0 - fx) * fy),
            (i1, j1, fx * fy),
        ]
    }

    /// Temperature at `x` (bilinear laterally; through the thickness,
    /// piecewise linear with the flux-continuous face value at material
    /// jumps). Beyond the outermost centres the nearest centre is used, which
    /// is second-order accurate on symmetry planes.
    pub fn probe(&self, u: &[f64], x: &[f64; 3]) -> f64 {
        self.lateral_weights(x).iter().map(|&(i, j, w)| w * self.column_value(u, i, j, x[2])).sum()
    }

    /// `q3 = -K ∂u/∂x3` at `x`, interpolated between face fluxes.
    pub fn probe_flux3(&self, u: &[f64], x: &[f64; 3]) -> f64 {
        self.lateral_weights(x).iter().map(|&(i, j, w)| w * self.column_flux3(u, i, j, x[2])).sum()
    }
}

/// Implicit stepping from a uniform `u0`: second-order backward
/// differentiation on `substeps` sub-steps per output step (first sub-step
/// first order). Returns probe series and the final field.
#[allow(clippy::too_many_arguments)]
pub fn fd_solve_transient(
    grid: &FdGrid,
    u0: f64,
    t0: f64,
    dt: f64,
    steps: usize,
    substeps: usize,
    probes: &[[f64; 3]],
) -> Result<(ProbeSeries, Vec<f64>)> {
    if !(dt > 0.0) || substeps == 0 {
        return Err(OracleError::Input(format!("dt = {dt}, substeps = {substeps}")));
    }
    let h = dt / substeps as f64;
    let vol = grid.volume();
    let mass: Vec<f64> = grid.cp.iter().map(|c| c * vol).collect();
    let ldiag = grid.l_diagonal();
    let mut prev2 = vec![u0; grid.len()];
    let mut prev = vec![u0; grid.len()];
    let mut series = ProbeSeries {
        times: Vec::with_capacity(steps),
        values: Vec::with_capacity(steps),
        flux3: Vec::with_capacity(steps),
    };
    let mut t = t0;
    let mut count = 0usize;
    let mut tmp = vec![0.0; grid.len()];
    for _ in 0..steps {
        for _ in 0..substeps {
            t += h;
            let (w0, w1, w2) = if count == 0 { (1.0, -1.0, 0.0) } else { (1.5, -2.0, 0.5) };
            let mut b = grid.load(t);
            for p in 0..grid.len() {
                b[p] -= mass[p] / h * (w1 * prev[p] + w2 * prev2[p]);
            }
            let diag: Vec<f64> = ldiag.iter().zip(&mass).map(|(l, m)| l + w0 * m / h).collect();
            let mut x = prev.clone();
            let apply = |v: &[f64], out: &mut [f64]| {
                grid.apply_l(v, out);
                for p in 0..v.len() {
                    out[p] += w0 * mass[p] / h * v[p];
                }
            };
            pcg(apply, &diag, &b, &mut x, 1e-11, 20 * grid.len() + 100)?;
            tmp.copy_from_slice(&prev);
            prev2.copy_from_slice(&tmp);
            prev = x;
            count += 1;
        }
        series.times.push(t);
        series.values.push(probes.iter().map(|p| grid.probe(&prev, p)).collect());
        series.flux3.push(probes.iter().map(|p| grid.probe_flux3(&prev, p)).collect());
    }
    Ok((series, prev))
}

/// Steady field with boundary data at time `t`.
pub fn fd_solve_steady(grid: &FdGrid, t: f64) -> Result<Vec<f64>> {
    if !grid.has_dirichlet() {
        return Err(OracleError::Input("steady problem without a prescribed temperature".into()));
    }
    let b = grid.load(t);
    let mut x = vec![0.0; grid.len()];
    pcg(|v, o| grid.apply_l(v, o), &grid.l_diagonal(), &b, &mut x, 1e-12, 20 * grid.len() + 100)?;
    Ok(x)
}

/// Complex amplitudes for `Re[ũ e^{-iωt}]`: `(L - iω M) ũ = b`.
pub fn fd_solve_harmonic(grid: &FdGrid, omega: f64) -> Result<Vec<Complex64>> {
    let vol = grid.volume();
    let shift: Vec<Complex64> = grid.cp.iter().map(|c| Complex64::new(0.0, -omega * c * vol)).collect();
    let b: Vec<Complex64> = grid.load(0.0).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let diag: Vec<Complex64> = grid.l_diagonal().iter().zip(&shift).map(|(l, s)| l + s).collect();
    let mut x = vec![Complex64::new(0.0, 0.0); grid.len()];
    let apply = |v: &[Complex64], out: &mut [Complex64]| {
        grid.apply_l(v, out);
        for p in 0..v.len() {
            out[p] += shift[p] * v[p];
        }
    };
    cocg(apply, &diag, &b, &mut x, 1e-12, 40 * grid.len() + 200)?;
    Ok(x)
}

/// Probe of a complex field (real and imaginary parts interpolated alike).
pub fn probe_complex(grid: &FdGrid, u: &[Complex64], x: &[f64; 3]) -> Complex64 {
    let re: Vec<f64> = u.iter().map(|c| c.re).collect();
    let im: Vec<f64> = u.iter().map(|c| c.im).collect();
    Complex64::new(grid.probe(&re, x), grid.probe(&im, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slab(n: usize, k2: f64) -> FdGrid {
        FdGrid::new(
            [0.0, 0.0, -1.0],
            [1.0, 1.0, 1.0],
            [2, 2, n],
            |x| if x[2] >= 0.0 { (4.0, 10.0) } else { (k2, 3.0) },
            [
                FaceCondition::temperature(10.0),
                FaceCondition::temperature(0.0),
                FaceCondition::insulated(),
                FaceCondition::insulated(),
                FaceCondition::insulated(),
                FaceCondition::insulated(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn steady_bilayer_exact() {
        let g = slab(20, 2.0);
        let u = fd_solve_steady(&g, 0.0).unwrap();
        let ui = 40.0 / 6.0;
        assert!((g.probe(&u, &[0.5, 0.5, 0.0]) - ui).abs() < 1e-9);
        assert!((g.probe(&u, &[0.3, 0.6, 0.5]) - (ui + 0.5 * (10.0 - ui))).abs() < 1e-9);
        assert!((g.probe_flux3(&u, &[0.5, 0.5, -0.4]) + 2.0 * ui).abs() < 1e-8);
    }

    #[test]
    fn resolution_check() {
        let g = slab(20, 2.0);
        assert!(g.check_resolution(0.2).is_err());
        assert!(g.check_resolution(3.0).is_ok());
    }

    #[test]
    fn harmonic_zero_frequency_is_steady() {
        let g = slab(10, 2.0);
        let s = fd_solve_steady(&g, 0.0).unwrap();
        let h = fd_solve_harmonic(&g, 0.0).unwrap();
        assert!(s.iter().zip(&h).all(|(a, b)| (a - b.re).abs() < 1e-8 && b.im.abs() < 1e-8));
    }
}
