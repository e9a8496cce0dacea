//! Structured quadrilateral surface mesh of the bilayer box.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kernels::Side;
use crate::model::{BilayerScenario, Face, Inclusion};
use crate::scalar::Vec3;

/// Bilinear quadrilateral; node order gives the outward normal by the
/// right-hand rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Element {
    pub nodes: [usize; 4],
    pub face: Face,
    pub side: Side,
}

#[derive(Clone, Debug)]
pub struct BoundaryMesh {
    pub nodes: Vec<Vec3<f64>>,
    pub elements: Vec<Element>,
    /// Faces each node lies on, sorted.
    pub node_faces: Vec<Vec<Face>>,
    /// Virtual quadrilaterals tiling the interface plane (never part of the
    /// boundary; used only for the subdomain-wise domain-to-boundary
    /// conversion).
    pub interface: Vec<[Vec3<f64>; 4]>,
    pub divisions: [usize; 4],
}

impl BoundaryMesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn corners(&self, e: &Element) -> [Vec3<f64>; 4] {
        e.nodes.map(|n| self.nodes[n])
    }

    /// Plain-text listing: nodes, then elements with outward normals.
    pub fn export_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# nodes {}", self.nodes.len());
        for (i, x) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "{i} {:.17e} {:.17e} {:.17e}", x[0], x[1], x[2]);
        }
        let _ = writeln!(s, "# elements {}", self.elements.len());
        for (i, e) in self.elements.iter().enumerate() {
            let n = e.face.normal();
            let _ = writeln!(
                s,
                "{i} {} {} {} {} {:?} {} {} {}",
                e.nodes[0], e.nodes[1], e.nodes[2], e.nodes[3], e.face, n[0], n[1], n[2]
            );
        }
        s
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Tangent axes `(t1, t2)` with `t1 × t2` = outward normal, and the fixed
/// axis with its grid index selector.
fn face_axes(face: Face) -> (usize, usize, usize, bool) {
    match face {
        Face::Top => (0, 1, 2, true),
        Face::Bottom => (1, 0, 2, false),
        Face::XMax => (1, 2, 0, true),
        Face::XMin => (2, 1, 0, false),
        Face::YMax => (2, 0, 1, true),
        Face::YMin => (0, 2, 1, false),
    }
}

pub fn build_box_mesh(scenario: &BilayerScenario, nx: usize, ny: usize, nz_upper: usize, nz_lower: usize) -> Result<BoundaryMesh> {
    if nx == 0 || ny == 0 || nz_upper == 0 || nz_lower == 0 {
        return Err(Error::Validation("mesh subdivision counts must be >= 1".into()));
    }
    let (lo, hi) = (scenario.lo(), scenario.hi());
    let axes = [
        grid(lo[0], hi[0], nx),
        grid(lo[1], hi[1], ny),
        {
            let mut z = grid(-scenario.h2, 0.0, nz_lower);
            z.extend(grid(0.0, scenario.h1, nz_upper).into_iter().skip(1));
            z
        },
    ];
    let n = [nx, ny, nz_upper + nz_lower];
    let mut ids: HashMap<[usize; 3], usize> = HashMap::new();
    let mut nodes = Vec::new();
    let mut node_faces: Vec<Vec<Face>> = Vec::new();
    let mut elements = Vec::new();
    for face in Face::ALL {
        let (a1, a2, fixed, at_max) = face_axes(face);
        let fi = if at_max { n[fixed] } else { 0 };
        let mut node_id = |u: usize, v: usize, nodes: &mut Vec<Vec3<f64>>, node_faces: &mut Vec<Vec<Face>>| {
            let mut g = [0usize; 3];
            g[a1] = u;
            g[a2] = v;
            g[fixed] = fi;
            let id = *ids.entry(g).or_insert_with(|| {
                nodes.push([axes[0][g[0]], axes[1][g[1]], axes[2][g[2]]]);
                node_faces.push(Vec::new());
                nodes.len() - 1
            });
            if !node_faces[id].contains(&face) {
                node_faces[id].push(face);
            }
            id
        };
        for v in 0..n[a2] {
            for u in 0..n[a1] {
                let q = [
                    node_id(u, v, &mut nodes, &mut node_faces),
                    node_id(u + 1, v, &mut nodes, &mut node_faces),
                    node_id(u + 1, v + 1, &mut nodes, &mut node_faces),
                    node_id(u, v + 1, &mut nodes, &mut node_faces),
                ];
                let zc: f64 = q.iter().map(|&i| nodes[i][2]).sum::<f64>() / 4.0;
                elements.push(Element {
                    nodes: q,
                    face,
                    side: Side::of(zc),
                });
            }
        }
    }
    for f in &mut node_faces {
        f.sort();
    }
    let mut interface = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = |i: usize, j: usize| [axes[0][i], axes[1][j], 0.0];
            interface.push([p(i, j), p(i + 1, j), p(i + 1, j + 1), p(i, j + 1)]);
        }
    }
    Ok(BoundaryMesh {
        nodes,
        elements,
        node_faces,
        interface,
        divisions: [nx, ny, nz_upper, nz_lower],
    })
}

/// Regular grid of `counts[0] × counts[1] × counts[2]` cell-centered points,
/// half of the `x3` layers in each phase (mirror-symmetric about `x3 = 0`
/// when `h1 = h2`). Points falling inside an inclusion are moved to the
/// nearest offset (in quarter-spacing steps) outside all inclusions.
pub fn interior_interpolation_points(
    scenario: &BilayerScenario,
    counts: [usize; 3],
    inclusions: &[Inclusion],
) -> Result<Vec<Vec3<f64>>> {
    if counts.contains(&0) || !counts[2].is_multiple_of(2) {
        return Err(Error::Validation(format!("interior grid {counts:?}: need positive counts and an even x3 count")));
    }
    let lo = scenario.lo();
    let half = counts[2] / 2;
    let h = [scenario.la / counts[0] as f64, scenario.lb / counts[1] as f64];
    let hz = [scenario.h2 / half as f64, scenario.h1 / half as f64];
    let mut pts = Vec::with_capacity(counts.iter().product());
    let mut moved = 0usize;
    let clear = |x: &Vec3<f64>| {
        inclusions.iter().all(|inc| inc.ellipsoid.xi(x) > 1.0 + 1e-6)
    };
    for k in 0..counts[2] {
        let (z, dz) = if k < half {
            (-scenario.h2 + (k as f64 + 0.5) * hz[0], hz[0])
        } else {
            ((k - half) as f64 * hz[1] + 0.5 * hz[1], hz[1])
        };
        for j in 0..counts[1] {
            for i in 0..counts[0] {
                let x = [lo[0] + (i as f64 + 0.5) * h[0], lo[1] + (j as f64 + 0.5) * h[1], z];
                if clear(&x) {
                    pts.push(x);
                    continue;
                }
                let mut best: Option<(f64, Vec3<f64>)> = None;
                for s in 1..=4i32 {
                    for dk in -s..=s {
                        for dj in -s..=s {
                            for di in -s..=s {
                                if di.abs().max(dj.abs()).max(dk.abs()) != s {
                                    continue;
                                }
                                let off = [0.25 * di as f64 * h[0], 0.25 * dj as f64 * h[1], 0.25 * dk as f64 * dz];
                                let y = [x[0] + off[0], x[1] + off[1], x[2] + off[2]];
                                let inside_half = (y[2] > 0.0) == (z > 0.0) && y[2] != 0.0;
                                let inside_box = (0..3).all(|a| y[a] > scenario.lo()[a] && y[a] < scenario.hi()[a]);
                                if inside_half && inside_box && clear(&y) {
                                    let d2 = off.iter().map(|v| v * v).sum::<f64>();
                                    if best.is_none_or(|(b, _)| d2 < b) {
                                        best = Some((d2, y));
                                    }
                                }
                            }
                        }
                    }
                    if best.is_some() {
                        break;
                    }
                }
                match best {
                    Some((_, y)) => {
                        log::debug!("interpolation point {x:?} inside an inclusion moved to {y:?}");
                        moved += 1;
                        pts.push(y);
                    }
                    None => {
                        return Err(Error::Validation(format!("cannot move interpolation point {x:?} out of the inclusions")));
                    }
                }
            }
        }
    }
    if moved > 0 {
        log::info!("{moved} interpolation points moved out of inclusions");
    }
    Ok(pts)
}
