//! Global system: boundary-integral rows at nodes and interior points,
//! interpolation constraints for the source densities `α`, and equivalent
//! inclusion rows, over unknowns
//! `[boundary (one per node) | interior temperatures | α | eigen coefficients]`.
//!
//! Temperatures are solved relative to the initial temperature `u0`. The
//! operator splits into a static part and a part multiplying time rates
//! (`α̇`, `Q̇*`), so `A = A_s + s A_d` with `s` the rate factor of the scheme.

mod harmonic;
mod steady;
mod transient;

pub use harmonic::{solve_harmonic, HarmonicSolution};
pub use steady::{solve_steady, solve_steady_bem};
pub use transient::{step_transient, Snapshot, TimeState, TransientRun};

use std::ops::Range;

use faer::Mat;

use crate::bem::assembly::{assemble_rows, row_integrals, BcLayout, SlotKind};
use crate::bem::{build_box_mesh, interior_interpolation_points, BoundaryMesh, IntegrationOptions};
use crate::drm::{collocation_rows, derivative_rows_with, DrmSurface, RbfSystem};
use crate::eim::{disturbance_rows, eim_conditions, needed_betas, EigenLayout};
use crate::error::{Error, Result};
use crate::kernels::Side;
use crate::model::{validate_scenario, BilayerScenario, Face, Inclusion};
use crate::scalar::Vec3;

/// Discretization controls.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshSpec {
    /// Elements along `x1`, `x2`, and through the upper and lower layers.
    pub divisions: [usize; 4],
    /// Interior interpolation grid; the `x3` count must be even.
    pub interior: [usize; 3],
    /// Gauss order per direction on dual-reciprocity panels.
    pub drm_order: usize,
    pub integration: IntegrationOptions,
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self {
            divisions: [6, 6, 6, 6],
            interior: [4, 4, 8],
            drm_order: 4,
            integration: IntegrationOptions::default(),
        }
    }
}

/// Column ranges of the raw (pre-partition) operator: node temperatures,
/// per-face flux slots, interior temperatures, `α`, eigen coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Columns {
    pub nodes: Range<usize>,
    pub slots: Range<usize>,
    pub interior: Range<usize>,
    pub alpha: Range<usize>,
    pub eigen: Range<usize>,
    pub total: usize,
}

/// Geometry, discretization and bookkeeping shared by all solution modes.
#[derive(Clone, Debug)]
pub struct Model {
    pub scenario: BilayerScenario,
    pub inclusions: Vec<Inclusion>,
    pub mesh: BoundaryMesh,
    pub bc: BcLayout,
    pub interior: Vec<Vec3<f64>>,
    pub surface: DrmSurface,
    pub rbf: RbfSystem,
    pub eigen: EigenLayout,
    pub opts: IntegrationOptions,
    pub cols: Columns,
    /// Raw column of each unknown.
    pub unknown_cols: Vec<usize>,
    /// Raw columns with prescribed values.
    pub known_cols: Vec<usize>,
}

impl Model {
    pub fn new(scenario: &BilayerScenario, inclusions: &[Inclusion], spec: &MeshSpec) -> Result<Self> {
        validate_scenario(scenario, inclusions)?;
        let [nx, ny, nzu, nzl] = spec.divisions;
        let mesh = build_box_mesh(scenario, nx, ny, nzu, nzl)?;
        let bc = BcLayout::new(&mesh, scenario);
        let interior = interior_interpolation_points(scenario, spec.interior, inclusions)?;
        let surface = DrmSurface::new(&mesh, scenario, spec.drm_order);
        let centers: Vec<Vec3<f64>> = mesh.nodes.iter().chain(interior.iter()).copied().collect();
        let rbf = RbfSystem::new(centers, scenario.length_scale());
        let eigen = EigenLayout::new(inclusions);
        let nn = mesh.num_nodes();
        let ns = interior.len();
        let nslots = bc.num_slots();
        let cols = {
            let nodes = 0..nn;
            let slots = nn..nn + nslots;
            let interior = slots.end..slots.end + ns;
            let alpha = interior.end..interior.end + nn + ns;
            let eig = alpha.end..alpha.end + eigen.total;
            let total = eig.end;
            Columns {
                nodes,
                slots,
                interior,
                alpha,
                eigen: eig,
                total,
            }
        };
        let mut unknown_cols = Vec::with_capacity(nn + ns + nn + ns + eigen.total);
        for n in 0..nn {
            match bc.node_dirichlet[n] {
                Some(face) => unknown_cols.push(cols.slots.start + bc.slot(n, face)),
                None => unknown_cols.push(n),
            }
        }
        unknown_cols.extend(cols.interior.clone());
        unknown_cols.extend(cols.alpha.clone());
        unknown_cols.extend(cols.eigen.clone());
        let mut is_unknown = vec![false; cols.total];
        for &c in &unknown_cols {
            is_unknown[c] = true;
        }
        let known_cols = (0..cols.total).filter(|c| !is_unknown[*c]).collect();
        Ok(Self {
            scenario: scenario.clone(),
            inclusions: inclusions.to_vec(),
            mesh,
            bc,
            interior,
            surface,
            rbf,
            eigen,
            opts: spec.integration,
            cols,
            unknown_cols,
            known_cols,
        })
    }

    pub fn num_unknowns(&self) -> usize {
        self.unknown_cols.len()
    }

    /// Prescribed values of the known columns at time `t` (relative to
    /// `u0`), or the real amplitudes for harmonic loading.
    pub fn known_values(&self, t: f64, harmonic: bool) -> Vec<f64> {
        self.known_cols
            .iter()
            .map(|&c| {
                if c < self.cols.nodes.end {
                    let face = self.bc.node_dirichlet[c].expect("known node");
                    let x = &self.mesh.nodes[c];
                    let v = &self.scenario.bc(face).value;
                    if harmonic {
                        v.amplitude(x)
                    } else {
                        v.at(x, t) - self.scenario.u0
                    }
                } else {
                    let slot = &self.bc.slots[c - self.cols.slots.start];
                    match slot.kind {
                        SlotKind::KnownGradient(g) => g,
                        SlotKind::KnownFlux => {
                            let v = &self.scenario.bc(slot.face).value;
                            let x = &self.mesh.nodes[slot.node];
                            if harmonic {
                                v.amplitude(x)
                            } else {
                                v.at(x, t)
                            }
                        }
                        SlotKind::Unknown => unreachable!("unknown slot in known set"),
                    }
                }
            })
            .collect()
    }

    /// Full raw-column vector from unknowns and known values.
    pub fn expand(&self, unknowns: &[f64], known: &[f64]) -> Vec<f64> {
        let mut raw = vec![0.0; self.cols.total];
        for (u, &c) in self.unknown_cols.iter().enumerate() {
            raw[c] = unknowns[u];
        }
        for (k, &c) in self.known_cols.iter().enumerate() {
            raw[c] = known[k];
        }
        raw
    }

    /// Face on which a slot's flux is reported.
    pub fn slot_face(&self, slot: usize) -> Face {
        self.bc.slots[slot].face
    }

    pub fn collocation_points(&self) -> Vec<(Vec3<f64>, Side)> {
        self.rbf.centers.iter().map(|x| (*x, Side::of(x[2]))).collect()
    }
}

/// Raw operator split into static and rate parts.
#[derive(Clone, Debug)]
pub struct GlobalSystem {
    pub model: Model,
    pub a_static: Mat<f64>,
    pub a_rate: Mat<f64>,
}

impl GlobalSystem {
    pub fn num_rows(&self) -> usize {
        self.a_static.nrows()
    }

    /// `A_s + s A_d` over unknown columns.
    pub fn operator(&self, s: f64) -> Mat<f64> {
        let cols = &self.model.unknown_cols;
        Mat::from_fn(self.num_rows(), cols.len(), |i, j| self.a_static[(i, cols[j])] + s * self.a_rate[(i, cols[j])])
    }

    /// `-A_s[:, known] · values`.
    pub fn known_rhs(&self, known: &[f64]) -> Vec<f64> {
        let mut rhs = vec![0.0; self.num_rows()];
        for (k, &c) in self.model.known_cols.iter().enumerate() {
            let v = known[k];
            if v == 0.0 {
                continue;
            }
            for (i, r) in rhs.iter_mut().enumerate() {
                *r -= self.a_static[(i, c)] * v;
            }
        }
        rhs
    }

    /// `A_d[:, unknown] · z`.
    pub fn rate_product(&self, z: &[f64]) -> Vec<f64> {
        let m = &self.model;
        let mut out = vec![0.0; self.num_rows()];
        for (u, &c) in m.unknown_cols.iter().enumerate() {
            if !(m.cols.alpha.contains(&c) || m.cols.eigen.contains(&c)) || z[u] == 0.0 {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.a_rate[(i, c)] * z[u];
            }
        }
        out
    }
}

/// Assembles the raw operator of `model`.
pub fn build_global(model: Model) -> Result<GlobalSystem> {
    let m = &model;
    let nn = m.mesh.num_nodes();
    let ns = m.interior.len();
    let np = nn + ns;
    let ne = m.eigen.total;
    let rows = nn + ns + np + ne;
    if rows != m.num_unknowns() {
        return Err(Error::Numerical(format!("{rows} rows for {} unknowns", m.num_unknowns())));
    }
    let c = &m.cols;
    let mut a_s = Mat::<f64>::zeros(rows, c.total);
    let mut a_d = Mat::<f64>::zeros(rows, c.total);

    let (h, g) = assemble_rows(&m.mesh, &m.bc, &m.scenario, &m.interior, &m.opts)?;
    for i in 0..np {
        for j in 0..nn {
            a_s[(i, c.nodes.start + j)] = h[(i, j)];
        }
        for j in 0..m.bc.num_slots() {
            a_s[(i, c.slots.start + j)] = g[(i, j)];
        }
    }
    for k in 0..ns {
        a_s[(nn + k, c.interior.start + k)] = 1.0;
    }

    let colloc = m.collocation_points();
    let v = collocation_rows(&colloc, &m.surface, &m.rbf, &m.scenario.bimaterial(), &m.opts);
    for i in 0..np {
        for j in 0..np {
            a_d[(i, c.alpha.start + j)] = v[(i, j)];
        }
    }
    if ne > 0 {
        for (i, (x, _)) in colloc.iter().enumerate() {
            let (st, dy) = disturbance_rows(x, &[[0, 0, 0]], &m.inclusions, &m.eigen, &m.scenario)?;
            for j in 0..ne {
                a_s[(i, c.eigen.start + j)] = -st[(0, j)];
                a_d[(i, c.eigen.start + j)] = -dy[(0, j)];
            }
        }
    }

    for k in 0..np {
        let r = np + k;
        for (j, xm) in m.rbf.centers.iter().enumerate() {
            a_s[(r, c.alpha.start + j)] = m.rbf.rbf.chi(&m.rbf.centers[k], xm);
        }
        let col = if k < nn { c.nodes.start + k } else { c.interior.start + k - nn };
        a_s[(r, col)] -= 1.0;
    }

    if ne > 0 {
        let (bmat, cmat) = m.rbf.surface_matrices(&m.surface.points);
        for (inc_idx, inc) in m.inclusions.iter().enumerate() {
            let x = inc.center();
            let betas = needed_betas(inc.order);
            let rep = representation_rows(m, &x, &betas, Some((&bmat, &cmat)))?;
            let range = m.eigen.range(inc_idx, &m.inclusions);
            for (ci, cond) in eim_conditions(inc, &m.scenario).iter().enumerate() {
                let r = 2 * np + range.start + ci;
                let own = c.eigen.start + range.start + ci;
                match cond.factor {
                    Some(f) => {
                        let b = betas.iter().position(|b| *b == cond.beta).expect("beta listed");
                        for j in 0..c.total {
                            a_s[(r, j)] = f * rep.0[(b, j)];
                            a_d[(r, j)] = f * rep.1[(b, j)];
                        }
                        a_s[(r, own)] -= cond.diag;
                    }
                    None => a_s[(r, own)] = cond.diag,
                }
            }
        }
    }
    Ok(GlobalSystem {
        model,
        a_static: a_s,
        a_rate: a_d,
    })
}

/// `∂^β u(x)` at an interior point as (static, rate) rows over raw columns:
/// `u = -H u_b - G q_b - V α̇ + D u* + C_s L Q̇*`.
pub(crate) fn representation_rows(
    m: &Model,
    x: &Vec3<f64>,
    betas: &[crate::multi_index::MultiIndex],
    drm: Option<(&Mat<f64>, &Mat<f64>)>,
) -> Result<(Mat<f64>, Mat<f64>)> {
    let c = &m.cols;
    let nb = betas.len();
    let sx = Side::of(x[2]);
    let mut st = Mat::<f64>::zeros(nb, c.total);
    let mut dy = Mat::<f64>::zeros(nb, c.total);
    let ri = row_integrals(x, sx, betas, &m.mesh, &m.bc, &m.scenario, &m.opts)?;
    for k in 0..nb {
        for (j, v) in ri.h[k].iter().enumerate() {
            st[(k, c.nodes.start + j)] = -v;
        }
        for (j, v) in ri.gm[k].iter().enumerate() {
            st[(k, c.slots.start + j)] = -v;
        }
    }
    if let Some((bmat, cmat)) = drm {
        let v = derivative_rows_with(x, betas, &m.surface, &m.rbf, &m.scenario, &m.opts, bmat, cmat)?;
        for k in 0..nb {
            for j in 0..m.rbf.len() {
                dy[(k, c.alpha.start + j)] = -v[(k, j)];
            }
        }
    }
    if m.eigen.total > 0 {
        let (ds, dd) = disturbance_rows(x, betas, &m.inclusions, &m.eigen, &m.scenario)?;
        for k in 0..nb {
            for j in 0..m.eigen.total {
                st[(k, c.eigen.start + j)] = ds[(k, j)];
                dy[(k, c.eigen.start + j)] = dd[(k, j)];
            }
        }
    }
    Ok((st, dy))
}

/// LU factorization of a real operator with a singularity check.
pub(crate) fn factor(a: &Mat<f64>) -> Result<faer::linalg::solvers::PartialPivLu<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Numerical(format!("operator is {}×{}", a.nrows(), a.ncols())));
    }
    let lu = a.partial_piv_lu();
    let u = lu.U();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 1e-14 * max) || !max.is_finite() {
        return Err(Error::Singular(format!(
            "operator of size {} is singular to working precision (pivot range {min:.3e}..{max:.3e})",
            a.nrows()
        )));
    }
    Ok(lu)
}

pub(crate) fn solve_with(lu: &faer::linalg::solvers::PartialPivLu<f64>, rhs: &[f64]) -> Vec<f64> {
    use faer::linalg::solvers::Solve;
    let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    (0..rhs.len()).map(|i| x[(i, 0)]).collect()
}
