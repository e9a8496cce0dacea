//! Quadrature point generation on bilinear quadrilaterals: tensor Gauss on
//! regular elements, distance-driven subdivision on nearly singular ones and
//! a vertex-centred triangle fan with the Duffy map on singular ones.

use crate::quadrature::gauss_legendre;
use crate::scalar::{cross3, norm3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct IntegrationOptions {
    pub base_order: usize,
    pub duffy_order: usize,
    /// Subdivide while `size / distance` exceeds this ratio.
    pub ratio: f64,
    pub max_depth: u32,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            base_order: 4,
            duffy_order: 8,
            ratio: 0.5,
            max_depth: 10,
        }
    }
}

/// A weighted point on an element, with the parent element's bilinear shape
/// functions evaluated there and the unit normal.
#[derive(Clone, Copy, Debug)]
pub struct QuadPoint {
    pub x: Vec3<f64>,
    pub normal: Vec3<f64>,
    pub weight: f64,
    pub shape: [f64; 4],
}

const PARENT: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

fn shape(xi: f64, eta: f64) -> [f64; 4] {
    PARENT.map(|p| 0.25 * (1.0 + p[0] * xi) * (1.0 + p[1] * eta))
}

fn eval(q: &[Vec3<f64>; 4], xi: f64, eta: f64) -> (Vec3<f64>, Vec3<f64>, f64, [f64; 4]) {
    let n = shape(xi, eta);
    let mut x = [0.0; 3];
    let mut dxi = [0.0; 3];
    let mut deta = [0.0; 3];
    for a in 0..4 {
        let (pa, pb) = (PARENT[a][0], PARENT[a][1]);
        let nxi = 0.25 * pa * (1.0 + pb * eta);
        let neta = 0.25 * pb * (1.0 + pa * xi);
        for k in 0..3 {
            x[k] += n[a] * q[a][k];
            dxi[k] += nxi * q[a][k];
            deta[k] += neta * q[a][k];
        }
    }
    let c = cross3(&dxi, &deta);
    let j = norm3(&c);
    (x, [c[0] / j, c[1] / j, c[2] / j], j, n)
}

/// Largest corner-to-corner distance.
pub fn element_size(q: &[Vec3<f64>; 4]) -> f64 {
    let mut s: f64 = 0.0;
    for a in 0..4 {
        for b in a + 1..4 {
            s = s.max(crate::scalar::dist3(&q[a], &q[b]));
        }
    }
    s
}

/// Distance from `x` to the axis-aligned bounding box of the corners (exact
/// for the box meshes used here).
pub fn distance_to(q: &[Vec3<f64>; 4], x: &Vec3<f64>) -> f64 {
    let mut d2 = 0.0;
    for k in 0..3 {
        let lo = q.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi = q.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        let e = if x[k] < lo {
            lo - x[k]
        } else if x[k] > hi {
            x[k] - hi
        } else {
            0.0
        };
        d2 += e * e;
    }
    d2.sqrt()
}

/// Vertex of `q` coinciding with `x`, if any.
pub fn vertex_of(q: &[Vec3<f64>; 4], x: &Vec3<f64>) -> Option<usize> {
    let tol = 1e-12 * element_size(q);
    q.iter().position(|p| crate::scalar::dist3(p, x) <= tol)
}

/// Whether the plain tensor rule is adequate for `x`.
pub fn is_regular(q: &[Vec3<f64>; 4], x: &Vec3<f64>, opts: &IntegrationOptions) -> bool {
    let d = distance_to(q, x);
    d > 0.0 && element_size(q) <= opts.ratio * d
}

/// The plain `order × order` tensor Gauss rule.
pub fn standard_points(q: &[Vec3<f64>; 4], order: usize) -> Vec<QuadPoint> {
    let r = gauss_legendre(order);
    let mut out = Vec::with_capacity(order * order);
    for (&eta, &we) in r.nodes.iter().zip(&r.weights) {
        for (&xi, &wx) in r.nodes.iter().zip(&r.weights) {
            let (x, normal, j, shape) = eval(q, xi, eta);
            out.push(QuadPoint {
                x,
                normal,
                weight: wx * we * j,
                shape,
            });
        }
    }
    out
}

/// Points adapted to the field point `x`: Duffy fan when `x` is a vertex,
/// recursive subdivision when `x` is close, plain rule otherwise.
pub fn adapted_points(q: &[Vec3<f64>; 4], x: &Vec3<f64>, opts: &IntegrationOptions) -> Vec<QuadPoint> {
    if let Some(v) = vertex_of(q, x) {
        return duffy_points(q, v, opts.duffy_order);
    }
    let mut out = Vec::new();
    subdivide(q, x, [-1.0, 1.0, -1.0, 1.0], opts, opts.max_depth, &mut out);
    out
}

fn subdivide(q: &[Vec3<f64>; 4], x: &Vec3<f64>, b: [f64; 4], opts: &IntegrationOptions, depth: u32, out: &mut Vec<QuadPoint>) {
    let corners = [
        eval(q, b[0], b[2]).0,
        eval(q, b[1], b[2]).0,
        eval(q, b[1], b[3]).0,
        eval(q, b[0], b[3]).0,
    ];
    let d = distance_to(&corners, x);
    if depth > 0 && element_size(&corners) > opts.ratio * d {
        if let Some(v) = vertex_of(&corners, x) {
            // x on a sub-element corner: integrate that piece singularly
            let r = gauss_legendre(opts.duffy_order);
            fan(q, b, v, r, out);
            return;
        }
        let xm = 0.5 * (b[0] + b[1]);
        let em = 0.5 * (b[2] + b[3]);
        for sub in [[b[0], xm, b[2], em], [xm, b[1], b[2], em], [xm, b[1], em, b[3]], [b[0], xm, em, b[3]]] {
            subdivide(q, x, sub, opts, depth - 1, out);
        }
        return;
    }
    if depth == 0 && element_size(&corners) > opts.ratio * d {
        log::debug!("near-singular subdivision depth exhausted at {x:?}");
    }
    let r = gauss_legendre(opts.base_order);
    let hx = 0.5 * (b[1] - b[0]);
    let he = 0.5 * (b[3] - b[2]);
    for (&eta, &we) in r.nodes.iter().zip(&r.weights) {
        for (&xi, &wx) in r.nodes.iter().zip(&r.weights) {
            let (p, normal, j, shape) = eval(q, b[0] + hx * (xi + 1.0), b[2] + he * (eta + 1.0));
            out.push(QuadPoint {
                x: p,
                normal,
                weight: wx * we * j * hx * he,
                shape,
            });
        }
    }
}

/// Triangle fan about parent vertex `v` with the Duffy map
/// `P = A + u[(B - A) + w(C - B)]`, Jacobian `u·|det(B - A, C - B)|`.
pub fn duffy_points(q: &[Vec3<f64>; 4], v: usize, order: usize) -> Vec<QuadPoint> {
    let mut out = Vec::with_capacity(2 * order * order);
    fan(q, [-1.0, 1.0, -1.0, 1.0], v, gauss_legendre(order), &mut out);
    out
}

fn fan(q: &[Vec3<f64>; 4], b: [f64; 4], v: usize, r: &crate::quadrature::GaussRule, out: &mut Vec<QuadPoint>) {
    let corner = |i: usize| -> [f64; 2] {
        let p = PARENT[i % 4];
        [
            if p[0] < 0.0 { b[0] } else { b[1] },
            if p[1] < 0.0 { b[2] } else { b[3] },
        ]
    };
    let a = corner(v);
    for t in 0..2 {
        let bb = corner(v + 1 + t);
        let cc = corner(v + 2 + t);
        let e1 = [bb[0] - a[0], bb[1] - a[1]];
        let e2 = [cc[0] - bb[0], cc[1] - bb[1]];
        let det = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
        for (&su, &wu) in r.nodes.iter().zip(&r.weights) {
            let u = 0.5 * (su + 1.0);
            for (&sw, &ww) in r.nodes.iter().zip(&r.weights) {
                let w = 0.5 * (sw + 1.0);
                let xi = a[0] + u * (e1[0] + w * e2[0]);
                let eta = a[1] + u * (e1[1] + w * e2[1]);
                let (p, normal, j, shape) = eval(q, xi, eta);
                out.push(QuadPoint {
                    x: p,
                    normal,
                    weight: 0.25 * wu * ww * u * det * j,
                    shape,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_square() -> [Vec3<f64>; 4] {
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]
    }

    fn single_layer(pts: &[QuadPoint], x: &Vec3<f64>) -> f64 {
        pts.iter().map(|p| p.weight / (4.0 * PI * crate::scalar::dist3(&p.x, x))).sum()
    }

    #[test]
    fn constant_integrates_to_area() {
        let q = [[0.0, 0.0, 1.0], [2.0, 0.0, 1.0], [2.0, 3.0, 1.0], [0.0, 3.0, 1.0]];
        let a: f64 = standard_points(&q, 4).iter().map(|p| p.weight).sum();
        assert_relative_eq!(a, 6.0, max_relative = 1e-14);
        let a: f64 = duffy_points(&q, 2, 6).iter().map(|p| p.weight).sum();
        assert_relative_eq!(a, 6.0, max_relative = 1e-14);
        assert_relative_eq!(standard_points(&q, 2)[0].normal[2], 1.0);
    }

    #[test]
    fn corner_singular_single_layer() {
        let q = unit_square();
        let exact = 2.0 * (1.0 + 2f64.sqrt()).ln() / (4.0 * PI);
        for v in 0..4 {
            let got = single_layer(&duffy_points(&q, v, 8), &q[v]);
            assert_relative_eq!(got, exact, max_relative = 1e-10);
        }
        // homogeneity: doubling the element doubles the integral
        let q2 = q.map(|p| [2.0 * p[0], 2.0 * p[1], 0.0]);
        assert_relative_eq!(single_layer(&duffy_points(&q2, 0, 8), &q2[0]), 2.0 * exact, max_relative = 1e-10);
    }

    #[test]
    fn far_field_and_near_convergence() {
        let q = unit_square();
        let far = [0.5, 0.5, 10.0];
        assert_relative_eq!(single_layer(&standard_points(&q, 4), &far), 1.0 / (4.0 * PI * 10.0), max_relative = 1e-2);
        let near = [0.3, 0.6, 0.01];
        let opts = IntegrationOptions::default();
        let a = single_layer(&adapted_points(&q, &near, &opts), &near);
        let finer = IntegrationOptions { ratio: 0.25, ..opts };
        let b = single_layer(&adapted_points(&q, &near, &finer), &near);
        assert!((a - b).abs() < 1e-6 * b, "{a} vs {b}");
    }
}
