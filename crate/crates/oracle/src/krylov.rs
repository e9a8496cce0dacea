//! Jacobi-preconditioned conjugate gradients (real SPD) and conjugate
//! orthogonal conjugate gradients (complex symmetric).

use num_complex::Complex64;

use crate::{OracleError, Result};

pub fn pcg(apply: impl Fn(&[f64], &mut [f64]), diag: &[f64], b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<usize> {
    let n = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn <= tol * bnorm {
            return Ok(it);
        }
        apply(&p, &mut ap);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(OracleError::Convergence(format!("CG: {max_iter} iterations")))
}

pub fn cocg(
    apply: impl Fn(&[Complex64], &mut [Complex64]),
    diag: &[Complex64],
    b: &[Complex64],
    x: &mut [Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<usize> {
    let n = b.len();
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let dot = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<Complex64>();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        return Ok(0);
    }
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<Complex64> = r.iter().zip(diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![Complex64::new(0.0, 0.0); n];
    for it in 0..max_iter {
        if norm(&r) <= tol * bnorm {
            return Ok(it);
        }
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(OracleError::Convergence(format!("COCG: {max_iter} iterations")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap1d(x: &[f64], y: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let l = if i > 0 { x[i - 1] } else { 0.0 };
            let r = if i + 1 < n { x[i + 1] } else { 0.0 };
            y[i] = 2.0 * x[i] - l - r;
        }
    }

    #[test]
    fn cg_solves_tridiagonal() {
        let n = 50;
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        pcg(lap1d, &vec![2.0; n], &b, &mut x, 1e-12, 500).unwrap();
        let mut y = vec![0.0; n];
        lap1d(&x, &mut y);
        assert!(y.iter().zip(&b).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn cocg_solves_shifted() {
        let n = 40;
        let shift = Complex64::new(0.0, -0.3);
        let apply = |x: &[Complex64], y: &mut [Complex64]| {
            for i in 0..n {
                let l = if i > 0 { x[i - 1] } else { Complex64::new(0.0, 0.0) };
                let r = if i + 1 < n { x[i + 1] } else { Complex64::new(0.0, 0.0) };
                y[i] = (2.0 + shift) * x[i] - l - r;
            }
        };
        let b = vec![Complex64::new(1.0, 0.0); n];
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        cocg(apply, &vec![2.0 + shift; n], &b, &mut x, 1e-12, 500).unwrap();
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        apply(&x, &mut y);
        assert!(y.iter().zip(&b).all(|(a, b)| (a - b).norm() < 1e-9));
    }
}
