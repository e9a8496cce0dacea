//! Time-harmonic loading `Re[ũ e^{-iωt}]`: one complex solve of
//! `(A_s - iω A_d) z̃ = b̃`.

use faer::{c64, Mat};

use super::transient::Snapshot;
use super::GlobalSystem;
use crate::error::{Error, Result};

/// Real and imaginary parts of the complex amplitudes over raw columns.
/// Rates hold `-iω` times the amplitudes, split the same way.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicSolution {
    pub omega: f64,
    pub re: Snapshot,
    pub im: Snapshot,
}

impl HarmonicSolution {
    pub fn value(&self, col: usize) -> c64 {
        c64::new(self.re.values[col], self.im.values[col])
    }
}

pub fn solve_harmonic(system: &GlobalSystem, omega: f64) -> Result<HarmonicSolution> {
    if !omega.is_finite() {
        return Err(Error::Validation(format!("invalid angular frequency {omega}")));
    }
    let model = &system.model;
    let cols = &model.unknown_cols;
    let n = cols.len();
    let op = Mat::<c64>::from_fn(system.num_rows(), n, |i, j| {
        c64::new(system.a_static[(i, cols[j])], -omega * system.a_rate[(i, cols[j])])
    });
    let known = model.known_values(0.0, true);
    let rhs = system.known_rhs(&known);
    let lu = op.partial_piv_lu();
    let u = lu.U();
    let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].norm()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 1e-14 * max) {
        return Err(Error::Singular(format!("harmonic operator singular at ω = {omega}")));
    }
    let b = Mat::<c64>::from_fn(n, 1, |i, _| c64::new(rhs[i], 0.0));
    let z = faer::linalg::solvers::Solve::solve(&lu, &b);
    let re_u: Vec<f64> = (0..n).map(|i| z[(i, 0)].re).collect();
    let im_u: Vec<f64> = (0..n).map(|i| z[(i, 0)].im).collect();
    let re_values = model.expand(&re_u, &known);
    let im_values = model.expand(&im_u, &vec![0.0; known.len()]);
    let mut re_rates = vec![0.0; model.cols.total];
    let mut im_rates = vec![0.0; model.cols.total];
    for &c in cols {
        re_rates[c] = omega * im_values[c];
        im_rates[c] = -omega * re_values[c];
    }
    Ok(HarmonicSolution {
        omega,
        re: Snapshot {
            t: 0.0,
            values: re_values,
            rates: re_rates,
        },
        im: Snapshot {
            t: 0.0,
            values: im_values,
            rates: im_rates,
        },
    })
}
