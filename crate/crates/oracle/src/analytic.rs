//! Closed-form one-dimensional solutions.

use num_complex::Complex64;

/// Homogeneous slab `0 <= z <= l`, initially 0, with `u(l) = 1` and
/// `u(0) = 0` for `t > 0`: Fourier sine series with `terms` terms.
pub fn slab_step_response(l: f64, k: f64, cp: f64, z: f64, t: f64, terms: usize) -> f64 {
    let d = k / cp;
    let pi = std::f64::consts::PI;
    let mut u = z / l;
    for n in 1..=terms {
        let nf = n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        u += 2.0 / (nf * pi) * sign * (nf * pi * z / l).sin() * (-(nf * pi / l).powi(2) * d * t).exp();
    }
    u
}

/// Complex amplitude of `Re[ũ e^{-iωt}]` through a two-layer slab: upper
/// layer `0 <= z <= h1` (conductivity `k1`, capacity `c1`), lower layer
/// `-h2 <= z <= 0`, amplitudes `top` at `z = h1` and `bottom` at `z = -h2`.
#[derive(Clone, Copy, Debug)]
pub struct TwoLayerHarmonic {
    k1: Complex64,
    k2: Complex64,
    a: Complex64,
    b: Complex64,
    d: Complex64,
    cond1: f64,
    cond2: f64,
}

fn cosh_sinh_over(k: Complex64, z: f64) -> (Complex64, Complex64) {
    let kz = k * z;
    let s = if kz.norm() < 1e-8 { Complex64::new(z, 0.0) } else { (kz).sinh() / k };
    (kz.cosh(), s)
}

/// Solves the four matching conditions (two boundary values, continuity of
/// temperature and of `K ∂u/∂z` at the interface) by Gaussian elimination.
#[allow(clippy::too_many_arguments)]
pub fn two_layer_harmonic(k1: f64, c1: f64, h1: f64, k2: f64, c2: f64, h2: f64, omega: f64, top: f64, bottom: f64) -> TwoLayerHarmonic {
    let i = Complex64::new(0.0, 1.0);
    let w1 = (-i * omega * c1 / k1).sqrt();
    let w2 = (-i * omega * c2 / k2).sqrt();
    let (ch1, sh1) = cosh_sinh_over(w1, h1);
    let (ch2, sh2) = cosh_sinh_over(w2, -h2);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // unknowns [A1, B1, A2, B2]: u1 = A1 cosh + B1 sinh/k, u2 likewise
    let mut m = [
        [ch1, sh1, zero, zero, Complex64::new(top, 0.0)],
        [zero, zero, ch2, sh2, Complex64::new(bottom, 0.0)],
        [one, zero, -one, zero, zero],
        [zero, Complex64::new(k1, 0.0), zero, Complex64::new(-k2, 0.0), zero],
    ];
    for col in 0..4 {
        let piv = (col..4).max_by(|a, b| m[*a][col].norm().partial_cmp(&m[*b][col].norm()).unwrap()).unwrap();
        m.swap(col, piv);
        for r in 0..4 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..5 {
                    let v = m[col][c];
                    m[r][c] -= f * v;
                }
            }
        }
    }
    let sol: Vec<Complex64> = (0..4).map(|r| m[r][4] / m[r][r]).collect();
    TwoLayerHarmonic {
        k1: w1,
        k2: w2,
        a: sol[0],
        b: sol[1],
        d: sol[3],
        cond1: k1,
        cond2: k2,
    }
}

impl TwoLayerHarmonic {
    pub fn at(&self, z: f64) -> Complex64 {
        if z >= 0.0 {
            let (c, s) = cosh_sinh_over(self.k1, z);
            self.a * c + self.b * s
        } else {
            let (c, s) = cosh_sinh_over(self.k2, z);
            self.a * c + self.d * s
        }
    }

    /// Complex amplitude of `q3 = -K ∂u/∂z`.
    pub fn flux(&self, z: f64) -> Complex64 {
        let (k, kk, b) = if z >= 0.0 { (self.k1, self.cond1, self.b) } else { (self.k2, self.cond2, self.d) };
        let kz = k * z;
        -kk * (self.a * k * kz.sinh() + b * kz.cosh())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_response_limits() {
        assert!((slab_step_response(2.0, 1.0, 1.0, 1.0, 1e6, 50) - 0.5).abs() < 1e-12);
        assert!(slab_step_response(2.0, 1.0, 1.0, 1.0, 1e-4, 2000).abs() < 1e-3);
    }

    #[test]
    fn zero_frequency_is_piecewise_linear() {
        let s = two_layer_harmonic(4.0, 10.0, 1.0, 2.0, 3.0, 1.0, 0.0, 10.0, 0.0);
        let ui = 10.0 * 4.0 / 6.0;
        assert!((s.at(0.0).re - ui).abs() < 1e-12);
        assert!((s.at(0.5).re - (ui + 0.5 * (10.0 - ui))).abs() < 1e-12);
        assert!((s.flux(0.3) - s.flux(-0.3)).norm() < 1e-12);
    }

    #[test]
    fn matching_conditions_hold() {
        let s = two_layer_harmonic(4.0, 10.0, 1.0, 2.0, 3.0, 1.0, 1.0, 1.0, 0.5);
        assert!((s.at(1.0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((s.at(-1.0) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((s.flux(1e-12) - s.flux(-1e-12)).norm() < 1e-9);
        // conjugate symmetry in ω
        let t = two_layer_harmonic(4.0, 10.0, 1.0, 2.0, 3.0, 1.0, -1.0, 1.0, 0.5);
        assert!((t.at(0.3) - s.at(0.3).conj()).norm() < 1e-12);
    }
}
