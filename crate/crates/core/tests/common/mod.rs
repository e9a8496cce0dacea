//! Helpers shared by integration tests.

use dribem::drm::Rbf;
use dribem::kernels::{greens_sided, Side};
use dribem::model::BilayerScenario;
use dribem::quadrature::gauss_legendre;
use dribem::Vec3;

/// `∫_box C_p G χ_m dV` by pyramids from `x` to every face.
pub fn volume_integral(sc: &BilayerScenario, x: &Vec3<f64>, rbf: &Rbf, xm: &Vec3<f64>) -> f64 {
    let mat = sc.bimaterial();
    let sx = Side::of(x[2]);
    let (lo, hi) = (sc.lo(), sc.hi());
    let gl = gauss_legendre(12);
    let sub = 6;
    let f = |y: &Vec3<f64>| {
        let s = Side::of(y[2]);
        sc.props(s).cp * greens_sided(x, sx, y, s, &mat) * rbf.chi(y, xm)
    };
    let mut total = 0.0;
    for axis in 0..3 {
        for (val, sign) in [(lo[axis], -1.0), (hi[axis], 1.0)] {
            let h = (sign * (val - x[axis])).max(0.0);
            if h == 0.0 {
                continue;
            }
            let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
            let (da, db) = ((hi[a] - lo[a]) / sub as f64, (hi[b] - lo[b]) / sub as f64);
            for ia in 0..sub {
                for ib in 0..sub {
                    for (ua, wa) in gl.nodes.iter().zip(&gl.weights) {
                        for (ub, wb) in gl.nodes.iter().zip(&gl.weights) {
                            let mut y = [0.0; 3];
                            y[axis] = val;
                            y[a] = lo[a] + da * (ia as f64 + 0.5 * (ua + 1.0));
                            y[b] = lo[b] + db * (ib as f64 + 0.5 * (ub + 1.0));
                            let w = wa * wb * 0.25 * da * db * h;
                            let mut cuts = vec![0.0, 1.0];
                            let denom = y[2] - x[2];
                            if denom != 0.0 {
                                let t = -x[2] / denom;
                                if t > 1e-14 && t < 1.0 - 1e-14 {
                                    cuts.insert(1, t);
                                }
                            }
                            let mut line = 0.0;
                            for c in cuts.windows(2) {
                                for (ut, wt) in gl.nodes.iter().zip(&gl.weights) {
                                    let t = c[0] + (c[1] - c[0]) * 0.5 * (ut + 1.0);
                                    let p = [x[0] + t * (y[0] - x[0]), x[1] + t * (y[1] - x[1]), x[2] + t * (y[2] - x[2])];
                                    line += wt * 0.5 * (c[1] - c[0]) * t * t * f(&p);
                                }
                            }
                            total += w * line;
                        }
                    }
                }
            }
        }
    }
    total
}

