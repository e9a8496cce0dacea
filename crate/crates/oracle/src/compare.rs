//! Probe-set comparison and CSV output.

use std::path::Path;

use crate::{OracleError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub max_abs: f64,
    /// `max |a - b| / max |b|`
    pub max_rel: f64,
    /// `‖a - b‖₂ / ‖b‖₂`
    pub l2_rel: f64,
    pub worst: usize,
}

impl ErrorReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel <= tol
    }
}

/// Compares `a` against reference `b` at shared probes. Phase tags, when
/// given, must agree probe by probe.
pub fn compare_fields(a: &[f64], b: &[f64], tags: Option<(&[String], &[String])>) -> Result<ErrorReport> {
    if a.len() != b.len() || a.is_empty() {
        return Err(OracleError::Compare(format!("probe counts {} and {}", a.len(), b.len())));
    }
    if let Some((ta, tb)) = tags {
        if ta.len() != a.len() || tb.len() != b.len() {
            return Err(OracleError::Compare("tag count differs from probe count".into()));
        }
        if let Some(i) = (0..ta.len()).find(|&i| ta[i] != tb[i]) {
            return Err(OracleError::Compare(format!("probe {i}: phase '{}' vs '{}'", ta[i], tb[i])));
        }
    }
    let mut worst = 0;
    let mut max_abs = 0.0;
    let mut d2 = 0.0;
    let mut b2 = 0.0;
    let mut bmax: f64 = 0.0;
    for i in 0..a.len() {
        let d = (a[i] - b[i]).abs();
        if d > max_abs {
            max_abs = d;
            worst = i;
        }
        d2 += d * d;
        b2 += b[i] * b[i];
        bmax = bmax.max(b[i].abs());
    }
    let rel = |num: f64, den: f64| if den > 0.0 { num / den } else if num == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(ErrorReport {
        max_abs,
        max_rel: rel(max_abs, bmax),
        l2_rel: rel(d2.sqrt(), b2.sqrt()),
        worst,
    })
}

/// Probe CSV with the column layout `x1,x2,x3,t,u,q1,q2,q3,phase`, time
/// major; flux components not computed are written as empty fields.
/// `phases` holds one tag per probe.
pub fn write_probe_csv(path: &Path, probes: &[[f64; 3]], times: &[f64], u: &[Vec<f64>], q3: &[Vec<f64>], phases: &[String]) -> Result<()> {
    if phases.len() != probes.len() {
        return Err(OracleError::Compare(format!("{} phase tags for {} probes", phases.len(), probes.len())));
    }
    let io = |e: String| OracleError::Io {
        path: path.display().to_string(),
        message: e,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| io(e.to_string()))?;
    w.write_record(["x1", "x2", "x3", "t", "u", "q1", "q2", "q3", "phase"]).map_err(|e| io(e.to_string()))?;
    for (n, t) in times.iter().enumerate() {
        for (p, x) in probes.iter().enumerate() {
            let rec = [
                x[0].to_string(),
                x[1].to_string(),
                x[2].to_string(),
                t.to_string(),
                u[n][p].to_string(),
                String::new(),
                String::new(),
                q3[n][p].to_string(),
                phases[p].clone(),
            ];
            w.write_record(&rec).map_err(|e| io(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| io(e.to_string()))
}
