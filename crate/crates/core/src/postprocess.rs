//! Field evaluation at interior points, layer averages and export.

use std::fmt::Write as _;
use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::bem::assembly::row_integrals;
use crate::eim::disturbance_rows;
use crate::error::{Error, Result};
use crate::kernels::{greens_derivs, Side};
use crate::multi_index::MultiIndex;
use crate::scalar::Vec3;
use crate::solver::{Model, Snapshot};

/// Which material a sample lies in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Upper,
    Lower,
    Inclusion(usize),
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Upper => write!(f, "upper"),
            Phase::Lower => write!(f, "lower"),
            Phase::Inclusion(i) => write!(f, "inclusion{i}"),
        }
    }
}

impl std::str::FromStr for Phase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(Phase::Upper),
            "lower" => Ok(Phase::Lower),
            _ => s
                .strip_prefix("inclusion")
                .and_then(|n| n.parse().ok())
                .map(Phase::Inclusion)
                .ok_or_else(|| Error::Config(format!("unknown phase tag '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    pub x: Vec3<f64>,
    pub t: f64,
    /// Absolute temperature.
    pub u: f64,
    pub q: Vec3<f64>,
    pub phase: Phase,
}

/// Evaluates `u` and `∇u` from a fixed set of snapshots. Surface products of
/// the densities are formed once, so each point costs one pass over the
/// boundary and conversion surface.
pub struct FieldEvaluator<'a> {
    model: &'a Model,
    times: Vec<f64>,
    values: Mat<f64>,
    rates: Mat<f64>,
    balpha: Mat<f64>,
    calpha: Mat<f64>,
    alpha_rates: Mat<f64>,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(model: &'a Model, snapshots: &[&Snapshot]) -> Self {
        let nt = snapshots.len();
        let total = model.cols.total;
        let values = Mat::from_fn(total, nt, |i, j| snapshots[j].values[i]);
        let rates = Mat::from_fn(total, nt, |i, j| snapshots[j].rates[i]);
        let a0 = model.cols.alpha.start;
        let alpha_rates = Mat::from_fn(model.rbf.len(), nt, |i, j| snapshots[j].rates[a0 + i]);
        let (bmat, cmat) = model.rbf.surface_matrices(&model.surface.points);
        let balpha = &bmat * &alpha_rates;
        let calpha = &cmat * &alpha_rates;
        Self {
            model,
            times: snapshots.iter().map(|s| s.t).collect(),
            values,
            rates,
            balpha,
            calpha,
            alpha_rates,
        }
    }

    pub fn model(&self) -> &'a Model {
        self.model
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `∂^β u(x)` relative to `u0`, one column per snapshot.
    pub fn derivatives(&self, x: &Vec3<f64>, betas: &[MultiIndex]) -> Result<Mat<f64>> {
        let m = self.model;
        if !m.scenario.contains(x) || on_boundary(m, x) {
            return Err(Error::Domain(format!("evaluation point {x:?} is not strictly inside the box")));
        }
        let nb = betas.len();
        let nt = self.times.len();
        let c = &m.cols;
        let sx = Side::of(x[2]);
        let mut out = Mat::<f64>::zeros(nb, nt);
        let ri = row_integrals(x, sx, betas, &m.mesh, &m.bc, &m.scenario, &m.opts)?;
        for k in 0..nb {
            for t in 0..nt {
                let mut s = 0.0;
                for (j, v) in ri.h[k].iter().enumerate() {
                    s -= v * self.values[(c.nodes.start + j, t)];
                }
                for (j, v) in ri.gm[k].iter().enumerate() {
                    s -= v * self.values[(c.slots.start + j, t)];
                }
                out[(k, t)] = s;
            }
        }
        self.add_drm(x, sx, betas, &mut out)?;
        if m.eigen.total > 0 {
            let (ds, dd) = disturbance_rows(x, betas, &m.inclusions, &m.eigen, &m.scenario)?;
            for k in 0..nb {
                for t in 0..nt {
                    let mut s = 0.0;
                    for j in 0..m.eigen.total {
                        s += ds[(k, j)] * self.values[(c.eigen.start + j, t)] + dd[(k, j)] * self.rates[(c.eigen.start + j, t)];
                    }
                    out[(k, t)] += s;
                }
            }
        }
        Ok(out)
    }

    /// Adds `-∂^β V α̇`. The plain value uses the regularized double layer
    /// (`Γ(x')` replaced by `Γ(x') - Γ(x)`), which stays valid on the
    /// interface plane where the conversion surfaces meet the point.
    fn add_drm(&self, x: &Vec3<f64>, sx: Side, betas: &[MultiIndex], out: &mut Mat<f64>) -> Result<()> {
        let m = self.model;
        let nt = self.times.len();
        let order = betas.iter().map(crate::multi_index::order).max().unwrap_or(0);
        let mat = m.scenario.bimaterial();
        let surf = &m.surface;
        let special = surf.special_panels(x, &m.opts);
        let mut gx = vec![0.0; nt];
        for (j, xm) in m.rbf.centers.iter().enumerate() {
            let g = m.rbf.rbf.gamma(x, xm).0;
            for t in 0..nt {
                gx[t] += g * self.alpha_rates[(j, t)];
            }
        }
        let plain: Vec<bool> = betas.iter().map(|b| *b == [0, 0, 0]).collect();
        let mut acc = |p: &crate::drm::DrmPoint, bsum: &dyn Fn(usize) -> f64, csum: &dyn Fn(usize) -> f64| -> Result<()> {
            let ev = greens_derivs(x, sx, &p.x, p.side, &mat, order)?;
            for (k, b) in betas.iter().enumerate() {
                let a = p.cw * ev.field(b);
                let bb = p.cw * (0..3).map(|j| p.normal[j] * ev.source(j, b)).sum::<f64>();
                for t in 0..nt {
                    let c = if plain[k] { csum(t) - gx[t] } else { csum(t) };
                    out[(k, t)] -= a * bsum(t) - bb * c;
                }
            }
            Ok(())
        };
        for (i, range) in surf.ranges.iter().enumerate() {
            if special.binary_search(&i).is_ok() {
                for p in surf.adapted(i, x, &m.opts) {
                    let mut bs = vec![0.0; nt];
                    let mut cs = vec![0.0; nt];
                    for (j, xm) in m.rbf.centers.iter().enumerate() {
                        let (g, grad) = m.rbf.rbf.gamma(&p.x, xm);
                        let dn = p.normal[0] * grad[0] + p.normal[1] * grad[1] + p.normal[2] * grad[2];
                        for t in 0..nt {
                            bs[t] += dn * self.alpha_rates[(j, t)];
                            cs[t] += g * self.alpha_rates[(j, t)];
                        }
                    }
                    acc(&p, &|t| bs[t], &|t| cs[t])?;
                }
                continue;
            }
            for q in range.clone() {
                acc(&surf.points[q], &|t| self.balpha[(q, t)], &|t| self.calpha[(q, t)])?;
            }
        }
        let props = m.scenario.props(sx);
        let ratio = props.cp / props.k;
        if ratio != 0.0 && plain.iter().any(|p| !p) {
            for (j, xm) in m.rbf.centers.iter().enumerate() {
                let jet = m.rbf.rbf.gamma_jet(x, xm, order);
                for (k, b) in betas.iter().enumerate() {
                    if plain[k] {
                        continue;
                    }
                    let d = jet.derivative(b);
                    for t in 0..nt {
                        out[(k, t)] += ratio * d * self.alpha_rates[(j, t)];
                    }
                }
            }
        }
        Ok(())
    }

    /// Temperature and flux at `x` for every snapshot.
    pub fn sample(&self, x: &Vec3<f64>) -> Result<Vec<FieldSample>> {
        let m = self.model;
        let x = nudge_off_surfaces(m, x);
        let on_interface = x[2].abs() <= 1e-12 * m.scenario.length_scale();
        let d = if on_interface {
            // upper-side limit of the gradient, extrapolated from two offsets
            let mut d = self.derivatives(&x, &[[0, 0, 0]])?;
            let eps = 1e-3 * m.scenario.h1.min(m.scenario.h2);
            let g1 = self.derivatives(&[x[0], x[1], eps], &[[1, 0, 0], [0, 1, 0], [0, 0, 1]])?;
            let g2 = self.derivatives(&[x[0], x[1], 2.0 * eps], &[[1, 0, 0], [0, 1, 0], [0, 0, 1]])?;
            let mut full = Mat::<f64>::zeros(4, d.ncols());
            for t in 0..d.ncols() {
                full[(0, t)] = d[(0, t)];
                for a in 0..3 {
                    full[(a + 1, t)] = 2.0 * g1[(a, t)] - g2[(a, t)];
                }
            }
            d = full;
            d
        } else {
            self.derivatives(&x, &[[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])?
        };
        let phase = phase_of(m, &x);
        let k = match phase {
            Phase::Inclusion(i) => m.inclusions[i].props.k,
            Phase::Upper => m.scenario.upper.k,
            Phase::Lower => m.scenario.lower.k,
        };
        Ok((0..self.times.len())
            .map(|t| FieldSample {
                x,
                t: self.times[t],
                u: m.scenario.u0 + d[(0, t)],
                q: [-k * d[(1, t)], -k * d[(2, t)], -k * d[(3, t)]],
                phase,
            })
            .collect())
    }

    /// `-K_s(∇u - u*)` inside inclusion `i` (the matrix-side route to the
    /// flux), for every snapshot.
    pub fn equivalent_flux(&self, i: usize, x: &Vec3<f64>) -> Result<Vec<Vec3<f64>>> {
        let m = self.model;
        let inc = &m.inclusions[i];
        let d = self.derivatives(x, &[[1, 0, 0], [0, 1, 0], [0, 0, 1]])?;
        let ks = inc.side_props(&m.scenario).k;
        let rel = inc.ellipsoid.relative(x);
        let start = m.cols.eigen.start + m.eigen.offsets[i];
        let coefs = crate::eim::coefficients(inc.order);
        Ok((0..self.times.len())
            .map(|t| {
                let mut ustar = [0.0; 3];
                for (c, coef) in coefs.iter().enumerate() {
                    if let crate::eim::Coefficient::Gradient { i, density, weight } = *coef {
                        let mono: f64 = (0..3).map(|a| rel[a].powi(density[a] as i32)).product();
                        ustar[i] += weight * mono * self.values[(start + c, t)];
                    }
                }
                [0, 1, 2].map(|a| -ks * (d[(a, t)] - ustar[a]))
            })
            .collect())
    }
}

fn on_boundary(m: &Model, x: &Vec3<f64>) -> bool {
    let (lo, hi) = (m.scenario.lo(), m.scenario.hi());
    let tol = 1e-12 * m.scenario.length_scale();
    (0..3).any(|k| (x[k] - lo[k]).abs() <= tol || (x[k] - hi[k]).abs() <= tol)
}

pub fn phase_of(m: &Model, x: &Vec3<f64>) -> Phase {
    for (i, inc) in m.inclusions.iter().enumerate() {
        if inc.ellipsoid.contains(x) {
            return Phase::Inclusion(i);
        }
    }
    match Side::of(x[2]) {
        Side::Upper => Phase::Upper,
        Side::Lower => Phase::Lower,
    }
}

/// Moves points lying within `1e-6` (relative) of an inclusion surface just
/// outside it along the radial direction from the centre.
pub fn nudge_off_surfaces(m: &Model, x: &Vec3<f64>) -> Vec3<f64> {
    let mut y = *x;
    for inc in &m.inclusions {
        let s = inc.ellipsoid.xi(&y).sqrt();
        if (s - 1.0).abs() < 1e-6 {
            let c = inc.center();
            let f = (1.0 + 1e-6) / s;
            y = [c[0] + f * (y[0] - c[0]), c[1] + f * (y[1] - c[1]), c[2] + f * (y[2] - c[2])];
        }
    }
    y
}

/// Layer-averaged temperature and `q3` at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerProfile {
    pub t: f64,
    pub centers: Vec<f64>,
    pub u: Vec<f64>,
    pub q3: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Cube-centre samples of one layer: `per_layer` cubes per direction.
pub fn layer_points(m: &Model, layers: usize, per_layer: [usize; 3]) -> Vec<Vec<Vec3<f64>>> {
    let (lo, hi) = (m.scenario.lo(), m.scenario.hi());
    let dz = (hi[2] - lo[2]) / layers as f64;
    (0..layers)
        .map(|l| {
            let z0 = lo[2] + l as f64 * dz;
            let mut pts = Vec::with_capacity(per_layer.iter().product());
            for k in 0..per_layer[2] {
                for j in 0..per_layer[1] {
                    for i in 0..per_layer[0] {
                        pts.push([
                            lo[0] + (i as f64 + 0.5) * (hi[0] - lo[0]) / per_layer[0] as f64,
                            lo[1] + (j as f64 + 0.5) * (hi[1] - lo[1]) / per_layer[1] as f64,
                            z0 + (k as f64 + 0.5) * dz / per_layer[2] as f64,
                        ]);
                    }
                }
            }
            pts
        })
        .collect()
}

/// Equal-weight averages over `layers` slabs through the thickness, one
/// profile per snapshot of the evaluator.
pub fn layer_average(eval: &FieldEvaluator<'_>, layers: usize, per_layer: [usize; 3]) -> Result<Vec<LayerProfile>> {
    let m = eval.model;
    let (lo, hi) = (m.scenario.lo(), m.scenario.hi());
    let dz = (hi[2] - lo[2]) / layers as f64;
    let nt = eval.times().len();
    let mut profiles: Vec<LayerProfile> = eval
        .times()
        .iter()
        .map(|&t| LayerProfile {
            t,
            centers: (0..layers).map(|l| lo[2] + (l as f64 + 0.5) * dz).collect(),
            u: vec![0.0; layers],
            q3: vec![0.0; layers],
            counts: vec![0; layers],
        })
        .collect();
    for (l, pts) in layer_points(m, layers, per_layer).iter().enumerate() {
        let samples: Vec<Result<Vec<FieldSample>>> = {
            use rayon::prelude::*;
            pts.par_iter().map(|x| eval.sample(x)).collect()
        };
        for s in samples {
            let s = s?;
            for t in 0..nt {
                profiles[t].u[l] += s[t].u;
                profiles[t].q3[l] += s[t].q[2];
                profiles[t].counts[l] += 1;
            }
        }
    }
    for p in &mut profiles {
        for l in 0..layers {
            let n = p.counts[l].max(1) as f64;
            p.u[l] /= n;
            p.q3[l] /= n;
        }
    }
    Ok(profiles)
}

/// Points of an `n2 × n3` cube-centre grid on the plane `x1 = const`.
pub fn plane_grid(m: &Model, x1: f64, n2: usize, n3: usize) -> Vec<Vec3<f64>> {
    let (lo, hi) = (m.scenario.lo(), m.scenario.hi());
    let mut pts = Vec::with_capacity(n2 * n3);
    for k in 0..n3 {
        for j in 0..n2 {
            pts.push([
                x1,
                lo[1] + (j as f64 + 0.5) * (hi[1] - lo[1]) / n2 as f64,
                lo[2] + (k as f64 + 0.5) * (hi[2] - lo[2]) / n3 as f64,
            ]);
        }
    }
    pts
}

const HEADER: [&str; 9] = ["x1", "x2", "x3", "t", "u", "q1", "q2", "q3", "phase"];

pub fn write_samples_csv(path: &Path, samples: &[FieldSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(HEADER).map_err(|e| csv_error(path, e))?;
    for s in samples {
        let rec = [s.x[0], s.x[1], s.x[2], s.t, s.u, s.q[0], s.q[1], s.q[2]].map(|v| v.to_string());
        let phase = s.phase.to_string();
        w.write_record(rec.iter().map(String::as_str).chain(std::iter::once(phase.as_str())))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_samples_csv(path: &Path) -> Result<Vec<FieldSample>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() != HEADER.len() {
            return Err(Error::Config(format!("{}: expected {} fields", path.display(), HEADER.len())));
        }
        let f = |i: usize| -> Result<f64> {
            if rec[i].is_empty() {
                return Ok(f64::NAN);
            }
            rec[i]
                .parse()
                .map_err(|_| Error::Config(format!("{}: bad number '{}'", path.display(), &rec[i])))
        };
        out.push(FieldSample {
            x: [f(0)?, f(1)?, f(2)?],
            t: f(3)?,
            u: f(4)?,
            q: [f(5)?, f(6)?, f(7)?],
            phase: rec[8].parse()?,
        });
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

/// Whitespace-separated matrix (rows of equal length) for contour plots.
pub fn write_matrix(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut s = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Sizes and diagnostics of a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: serde_json::Value,
    pub mode: String,
    pub boundary_nodes: usize,
    pub boundary_elements: usize,
    pub interior_points: usize,
    pub eigen_coefficients: usize,
    pub unknowns: usize,
    pub timings: Vec<(String, f64)>,
    pub residual: Option<f64>,
}

impl RunSummary {
    pub fn new(m: &Model, mode: &str) -> Self {
        Self {
            scenario: serde_json::json!({
                "scenario": m.scenario,
                "inclusions": m.inclusions,
            }),
            mode: mode.to_string(),
            boundary_nodes: m.mesh.num_nodes(),
            boundary_elements: m.mesh.elements.len(),
            interior_points: m.interior.len(),
            eigen_coefficients: m.eigen.total,
            unknowns: m.num_unknowns(),
            timings: Vec::new(),
            residual: None,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Numerical(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
