//! Boundary integral rows: for a field point `x`,
//! `H_n = Σ_e K_e ∫_e N_a ∂G/∂n'` per node and the single-layer coefficients
//! per boundary-condition slot. Boundary rows use the constant-field
//! identity for `c(x) + H_xx`.

use std::collections::HashMap;

use faer::Mat;
use rayon::prelude::*;

use crate::bem::integrate::{adapted_points, is_regular, standard_points, IntegrationOptions, QuadPoint};
use crate::bem::BoundaryMesh;
use crate::error::Result;
use crate::kernels::{greens_derivs, greens_with_source_gradient, Side};
use crate::model::{BcKind, BilayerScenario, Face};
use crate::multi_index::{self, MultiIndex};
use crate::scalar::Vec3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SlotKind {
    /// Normal derivative `∂u/∂n` solved for.
    Unknown,
    /// Normal derivative fixed by the tangential gradient of a neighbouring
    /// Dirichlet face.
    KnownGradient(f64),
    /// Prescribed outward flux from a Neumann face.
    KnownFlux,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slot {
    pub node: usize,
    pub face: Face,
    pub kind: SlotKind,
}

/// Per-node, per-face flux slots and which nodes carry known temperatures.
#[derive(Clone, Debug)]
pub struct BcLayout {
    pub slots: Vec<Slot>,
    pub node_slots: Vec<Vec<usize>>,
    /// First Dirichlet face of a node in [`Face::ALL`] order.
    pub node_dirichlet: Vec<Option<Face>>,
    map: HashMap<(usize, Face), usize>,
}

impl BcLayout {
    pub fn new(mesh: &BoundaryMesh, scenario: &BilayerScenario) -> Self {
        let mut slots = Vec::new();
        let mut node_slots = Vec::with_capacity(mesh.num_nodes());
        let mut node_dirichlet = Vec::with_capacity(mesh.num_nodes());
        let mut map = HashMap::new();
        for (n, faces) in mesh.node_faces.iter().enumerate() {
            let primary = faces.iter().copied().find(|f| scenario.bc(*f).kind == BcKind::Dirichlet);
            node_dirichlet.push(primary);
            let mut list = Vec::with_capacity(faces.len());
            for &face in faces {
                let bc = scenario.bc(face);
                let kind = match bc.kind {
                    BcKind::Neumann => SlotKind::KnownFlux,
                    BcKind::Dirichlet if Some(face) == primary => SlotKind::Unknown,
                    BcKind::Dirichlet => {
                        let p = primary.expect("primary Dirichlet face");
                        let grad = scenario.bc(p).value.gradient();
                        let nrm = face.normal();
                        SlotKind::KnownGradient(grad[0] * nrm[0] + grad[1] * nrm[1] + grad[2] * nrm[2])
                    }
                };
                map.insert((n, face), slots.len());
                list.push(slots.len());
                slots.push(Slot { node: n, face, kind });
            }
            node_slots.push(list);
        }
        Self {
            slots,
            node_slots,
            node_dirichlet,
            map,
        }
    }

    pub fn slot(&self, node: usize, face: Face) -> usize {
        self.map[&(node, face)]
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn node_known(&self, node: usize) -> bool {
        self.node_dirichlet[node].is_some()
    }
}

/// Coefficients of one field point: `h[β][node]`, `gm[β][slot]`.
#[derive(Clone, Debug)]
pub struct RowIntegrals {
    pub h: Vec<Vec<f64>>,
    pub gm: Vec<Vec<f64>>,
}

fn element_points(q: &[Vec3<f64>; 4], x: &Vec3<f64>, opts: &IntegrationOptions) -> Vec<QuadPoint> {
    if is_regular(q, x, opts) {
        standard_points(q, opts.base_order)
    } else {
        adapted_points(q, x, opts)
    }
}

/// Integrals for field derivatives `∂^β` (the zero index gives the plain
/// row) at `x` on side `sx`. Free terms and closure are left to the caller.
pub fn row_integrals(
    x: &Vec3<f64>,
    sx: Side,
    betas: &[MultiIndex],
    mesh: &BoundaryMesh,
    layout: &BcLayout,
    scenario: &BilayerScenario,
    opts: &IntegrationOptions,
) -> Result<RowIntegrals> {
    let mat = scenario.bimaterial();
    let nb = betas.len();
    let mut h = vec![vec![0.0; mesh.num_nodes()]; nb];
    let mut gm = vec![vec![0.0; layout.num_slots()]; nb];
    let plain = nb == 1 && betas[0] == [0, 0, 0];
    let order = betas.iter().map(multi_index::order).max().unwrap_or(0);
    let mut gv = vec![0.0; nb];
    let mut dv = vec![0.0; nb];
    for e in &mesh.elements {
        let q = mesh.corners(e);
        let ke = scenario.props(e.side).k;
        let nrm = e.face.normal();
        let slots = e.nodes.map(|n| layout.slot(n, e.face));
        for p in element_points(&q, x, opts) {
            if plain {
                let (g, grad) = greens_with_source_gradient(x, sx, &p.x, e.side, &mat);
                gv[0] = g;
                dv[0] = nrm[0] * grad[0] + nrm[1] * grad[1] + nrm[2] * grad[2];
            } else {
                let ev = greens_derivs(x, sx, &p.x, e.side, &mat, order)?;
                for (k, b) in betas.iter().enumerate() {
                    gv[k] = ev.field(b);
                    dv[k] = (0..3).map(|j| nrm[j] * ev.source(j, b)).sum();
                }
            }
            for a in 0..4 {
                let w = p.weight * p.shape[a];
                let s = slots[a];
                let single = match layout.slots[s].kind {
                    SlotKind::KnownFlux => w,
                    _ => -ke * w,
                };
                for k in 0..nb {
                    h[k][e.nodes[a]] += ke * w * dv[k];
                    gm[k][s] += single * gv[k];
                }
            }
        }
    }
    Ok(RowIntegrals { h, gm })
}

/// Plain rows at all boundary nodes followed by `interior` points. Boundary
/// rows hold `c + H` (closure applied); interior rows hold `H` only.
pub fn assemble_rows(
    mesh: &BoundaryMesh,
    layout: &BcLayout,
    scenario: &BilayerScenario,
    interior: &[Vec3<f64>],
    opts: &IntegrationOptions,
) -> Result<(Mat<f64>, Mat<f64>)> {
    let nn = mesh.num_nodes();
    let rows: Vec<(Vec3<f64>, Option<usize>)> = mesh
        .nodes
        .iter()
        .enumerate()
        .map(|(i, x)| (*x, Some(i)))
        .chain(interior.iter().map(|x| (*x, None)))
        .collect();
    let results: Vec<Result<RowIntegrals>> = rows
        .par_iter()
        .map(|(x, node)| {
            let mut r = row_integrals(x, Side::of(x[2]), &[[0, 0, 0]], mesh, layout, scenario, opts)?;
            if let Some(i) = node {
                let off: f64 = r.h[0].iter().enumerate().filter(|(j, _)| j != i).map(|(_, v)| v).sum();
                r.h[0][*i] = -off;
            }
            Ok(r)
        })
        .collect();
    let mut h = Mat::zeros(rows.len(), nn);
    let mut g = Mat::zeros(rows.len(), layout.num_slots());
    for (i, r) in results.into_iter().enumerate() {
        let r = r?;
        for j in 0..nn {
            h[(i, j)] = r.h[0][j];
        }
        for j in 0..layout.num_slots() {
            g[(i, j)] = r.gm[0][j];
        }
    }
    Ok((h, g))
}
