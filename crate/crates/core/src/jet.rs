//! Truncated multivariate Taylor polynomials ("jets") in three variables.
//!
//! A jet of degree `N` stores the coefficients `c_α` of
//! `f(x0 + h) ≈ Σ_{|α| ≤ N} c_α h^α` in graded multi-index order, so
//! `∂^α f(x0) = α! c_α`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::multi_index::{self, MultiIndex};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T> {
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn constant(value: T, degree: usize) -> Self {
        let mut coeffs = vec![T::zero(); multi_index::count_up_to(degree)];
        coeffs[0] = value;
        Self { degree, coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        Self::constant(T::zero(), degree)
    }

    /// The coordinate function `x_axis` expanded about `value`.
    pub fn variable(value: T, axis: usize, degree: usize) -> Self {
        let mut j = Self::constant(value, degree);
        if degree > 0 {
            j.coeffs[1 + axis] = T::one();
        }
        j
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, m: &MultiIndex) -> T {
        let i = multi_index::index_of(m);
        if i < self.coeffs.len() {
            self.coeffs[i]
        } else {
            T::zero()
        }
    }

    /// `∂^m f` at the expansion point.
    pub fn derivative(&self, m: &MultiIndex) -> T {
        self.coeff(m) * T::lit(multi_index::factorial(m))
    }

    /// All derivatives up to the jet degree, in graded order.
    pub fn derivatives(&self) -> Vec<T> {
        multi_index::all()[..self.coeffs.len()]
            .iter()
            .zip(&self.coeffs)
            .map(|(m, &c)| c * T::lit(multi_index::factorial(m)))
            .collect()
    }

    /// `∂f/∂x_axis` as a jet of one lower degree.
    pub fn partial(&self, axis: usize) -> Self {
        assert!(self.degree > 0, "cannot differentiate a degree-0 jet");
        let degree = self.degree - 1;
        let n = multi_index::count_up_to(degree);
        let list = multi_index::all();
        let coeffs = (0..n)
            .map(|i| {
                let mut up = list[i];
                up[axis] += 1;
                self.coeffs[multi_index::index_of(&up)] * T::lit(f64::from(up[axis]))
            })
            .collect();
        Self { degree, coeffs }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add_const(mut self, s: T) -> Self {
        self.coeffs[0] += s;
        self
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: T, other: &Self) {
        debug_assert_eq!(self.degree, other.degree);
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    pub fn mul_jet(&self, other: &Self) -> Self {
        debug_assert_eq!(self.degree, other.degree);
        let mut coeffs = vec![T::zero(); self.coeffs.len()];
        for &(i, j, k) in multi_index::product_table(self.degree) {
            coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Self {
            degree: self.degree,
            coeffs,
        }
    }

    /// `f(self)` given the univariate Taylor coefficients `t[k] = f^{(k)}(a0)/k!`
    /// of `f` at `a0 = self.value()`.
    pub fn compose(&self, taylor: &[T]) -> Self {
        let mut h = self.clone();
        h.coeffs[0] = T::zero();
        let n = taylor.len().min(self.degree + 1);
        let mut out = Self::constant(taylor[n - 1], self.degree);
        for k in (0..n - 1).rev() {
            out = out.mul_jet(&h);
            out.coeffs[0] += taylor[k];
        }
        out
    }

    /// `self^p` for real `p`; the value must be positive unless `p` is a
    /// non-negative integer.
    pub fn powf(&self, p: T) -> Self {
        let a0 = self.value();
        let mut t = Vec::with_capacity(self.degree + 1);
        let mut c = a0.powf(p);
        for k in 0..=self.degree {
            t.push(c);
            let kk = T::lit(k as f64);
            c = c * (p - kk) / ((kk + T::one()) * a0);
        }
        self.compose(&t)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(T::lit(0.5))
    }

    pub fn recip(&self) -> Self {
        let a0 = self.value();
        let mut t = Vec::with_capacity(self.degree + 1);
        let mut c = a0.recip();
        for _ in 0..=self.degree {
            t.push(c);
            c = -c / a0;
        }
        self.compose(&t)
    }

    pub fn truncate(&self, degree: usize) -> Self {
        assert!(degree <= self.degree);
        Self {
            degree,
            coeffs: self.coeffs[..multi_index::count_up_to(degree)].to_vec(),
        }
    }
}

impl<T: Scalar> Add for &Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: Self) -> Jet<T> {
        let mut out = self.clone();
        out.axpy(T::one(), rhs);
        out
    }
}

impl<T: Scalar> Sub for &Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: Self) -> Jet<T> {
        let mut out = self.clone();
        out.axpy(-T::one(), rhs);
        out
    }
}

impl<T: Scalar> Mul for &Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: Self) -> Jet<T> {
        self.mul_jet(rhs)
    }
}

impl<T: Scalar> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.scale(-T::one())
    }
}
