//! Steady solves: the full operator without rate terms, and an independent
//! reduced assembly (boundary rows and inclusion rows only, no interior
//! points or source densities).

use faer::Mat;

use super::{factor, representation_rows, solve_with, GlobalSystem, Model};
use super::transient::Snapshot;
use crate::bem::assembly::assemble_rows;
use crate::eim::{disturbance_rows, eim_conditions, needed_betas, Coefficient};
use crate::error::Result;

/// `A_s z = b(t)` on the full system.
pub fn solve_steady(system: &GlobalSystem, t: f64) -> Result<Snapshot> {
    let lu = factor(&system.operator(0.0))?;
    let known = system.model.known_values(t, false);
    let z = solve_with(&lu, &system.known_rhs(&known));
    Ok(Snapshot {
        t,
        values: system.model.expand(&z, &known),
        rates: vec![0.0; system.model.cols.total],
    })
}

/// Steady boundary-element solution with its own assembly. Interior,
/// density and eigen-source entries of the returned raw vector are zero
/// (interior temperatures are left unset).
pub fn solve_steady_bem(model: &Model, t: f64) -> Result<Snapshot> {
    let nn = model.mesh.num_nodes();
    let ne = model.eigen.total;
    let c = &model.cols;
    let (h, g) = assemble_rows(&model.mesh, &model.bc, &model.scenario, &[], &model.opts)?;
    let rows = nn + ne;
    let mut raw = Mat::<f64>::zeros(rows, c.total);
    for i in 0..nn {
        for j in 0..nn {
            raw[(i, c.nodes.start + j)] = h[(i, j)];
        }
        for j in 0..model.bc.num_slots() {
            raw[(i, c.slots.start + j)] = g[(i, j)];
        }
        if ne > 0 {
            let (st, _) = disturbance_rows(&model.mesh.nodes[i], &[[0, 0, 0]], &model.inclusions, &model.eigen, &model.scenario)?;
            for j in 0..ne {
                raw[(i, c.eigen.start + j)] = -st[(0, j)];
            }
        }
    }
    if ne > 0 {
        for (idx, inc) in model.inclusions.iter().enumerate() {
            let betas = needed_betas(inc.order);
            let (rep, _) = representation_rows(model, &inc.center(), &betas, None)?;
            let range = model.eigen.range(idx, &model.inclusions);
            let coefs = crate::eim::coefficients(inc.order);
            for (ci, cond) in eim_conditions(inc, &model.scenario).iter().enumerate() {
                let r = nn + range.start + ci;
                let own = c.eigen.start + range.start + ci;
                // source coefficients do not act in a steady field
                if matches!(coefs[ci], Coefficient::Source { .. }) {
                    raw[(r, own)] = 1.0;
                    continue;
                }
                let f = cond.factor.expect("gradient condition factor");
                let b = betas.iter().position(|b| *b == cond.beta).expect("beta listed");
                for j in 0..c.total {
                    raw[(r, j)] = f * rep[(b, j)];
                }
                raw[(r, own)] -= cond.diag;
            }
        }
    }
    let unknown: Vec<usize> = model.unknown_cols[..nn].iter().copied().chain(c.eigen.clone()).collect();
    let op = Mat::from_fn(rows, unknown.len(), |i, j| raw[(i, unknown[j])]);
    let known = model.known_values(t, false);
    let mut rhs = vec![0.0; rows];
    for (k, &col) in model.known_cols.iter().enumerate() {
        for (i, r) in rhs.iter_mut().enumerate() {
            *r -= raw[(i, col)] * known[k];
        }
    }
    let z = solve_with(&factor(&op)?, &rhs);
    let mut values = vec![0.0; c.total];
    for (k, &col) in model.known_cols.iter().enumerate() {
        values[col] = known[k];
    }
    for (u, &col) in unknown.iter().enumerate() {
        values[col] = z[u];
    }
    Ok(Snapshot {
        t,
        values,
        rates: vec![0.0; c.total],
    })
}
