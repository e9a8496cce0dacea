//! Scenario geometry, phases, boundary conditions and inclusions.
//!
//! The box spans `x1 ∈ [o1, o1 + la]`, `x2 ∈ [o2, o2 + lb]`,
//! `x3 ∈ [-h2, h1]`; the bonded interface is the plane `x3 = 0`.
//! Temperatures are stored as changes from the initial temperature `u0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Bimaterial, Side};
use crate::potentials::Ellipsoid;
use crate::scalar::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialProps {
    /// Thermal conductivity, W/(m·K).
    pub k: f64,
    /// Volumetric heat capacity, J/(m³·K).
    pub cp: f64,
}

impl MaterialProps {
    pub fn new(k: f64, cp: f64) -> Self {
        Self { k, cp }
    }

    fn check(&self, what: &str) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Validation(format!("{what}: conductivity must be positive, got {}", self.k)));
        }
        if !(self.cp >= 0.0 && self.cp.is_finite()) {
            return Err(Error::Validation(format!("{what}: heat capacity must be non-negative, got {}", self.cp)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    Top,
    Bottom,
    XMin,
    XMax,
    YMin,
    YMax,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::Top, Face::Bottom, Face::XMin, Face::XMax, Face::YMin, Face::YMax];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn normal(self) -> Vec3<f64> {
        match self {
            Face::Top => [0.0, 0.0, 1.0],
            Face::Bottom => [0.0, 0.0, -1.0],
            Face::XMin => [-1.0, 0.0, 0.0],
            Face::XMax => [1.0, 0.0, 0.0],
            Face::YMin => [0.0, -1.0, 0.0],
            Face::YMax => [0.0, 1.0, 0.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcKind {
    /// Prescribed temperature.
    Dirichlet,
    /// Prescribed outward heat flux `q·n`.
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BcValue {
    Constant { value: f64 },
    /// `amplitude · sin(2π t / period)`
    Sinusoid { amplitude: f64, period: f64 },
    /// `offset + gradient · x`
    Linear { offset: f64, gradient: Vec3<f64> },
}

impl BcValue {
    pub fn at(&self, x: &Vec3<f64>, t: f64) -> f64 {
        match *self {
            BcValue::Constant { value } => value,
            BcValue::Sinusoid { amplitude, period } => amplitude * (2.0 * std::f64::consts::PI * t / period).sin(),
            BcValue::Linear { offset, gradient } => offset + gradient[0] * x[0] + gradient[1] * x[1] + gradient[2] * x[2],
        }
    }

    /// Complex amplitude (real-valued) used by time-harmonic runs.
    pub fn amplitude(&self, x: &Vec3<f64>) -> f64 {
        match *self {
            BcValue::Sinusoid { amplitude, .. } => amplitude,
            _ => self.at(x, 0.0),
        }
    }

    /// Spatial gradient of the prescribed field.
    pub fn gradient(&self) -> Vec3<f64> {
        match *self {
            BcValue::Linear { gradient, .. } => gradient,
            _ => [0.0; 3],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceBc {
    pub kind: BcKind,
    pub value: BcValue,
}

impl FaceBc {
    pub fn dirichlet(value: BcValue) -> Self {
        Self {
            kind: BcKind::Dirichlet,
            value,
        }
    }

    pub fn neumann(value: BcValue) -> Self {
        Self {
            kind: BcKind::Neumann,
            value,
        }
    }

    pub fn adiabatic() -> Self {
        Self::neumann(BcValue::Constant { value: 0.0 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum TimeControl {
    Transient { t0: f64, dt: f64, steps: usize },
    Harmonic { omega: f64 },
    Steady,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilayerScenario {
    /// Lower corner `(o1, o2)` of the box footprint.
    pub origin: [f64; 2],
    pub la: f64,
    pub lb: f64,
    pub h1: f64,
    pub h2: f64,
    pub upper: MaterialProps,
    pub lower: MaterialProps,
    /// Indexed by [`Face::index`].
    pub bcs: [FaceBc; 6],
    pub time: TimeControl,
    /// Initial (reference) temperature, K.
    pub u0: f64,
}

impl BilayerScenario {
    pub fn bc(&self, face: Face) -> &FaceBc {
        &self.bcs[face.index()]
    }

    pub fn lo(&self) -> Vec3<f64> {
        [self.origin[0], self.origin[1], -self.h2]
    }

    pub fn hi(&self) -> Vec3<f64> {
        [self.origin[0] + self.la, self.origin[1] + self.lb, self.h1]
    }

    pub fn props(&self, side: Side) -> MaterialProps {
        match side {
            Side::Upper => self.upper,
            Side::Lower => self.lower,
        }
    }

    pub fn bimaterial(&self) -> Bimaterial<f64> {
        Bimaterial::new(self.upper.k, self.lower.k)
    }

    pub fn contains(&self, x: &Vec3<f64>) -> bool {
        let (lo, hi) = (self.lo(), self.hi());
        (0..3).all(|k| x[k] >= lo[k] && x[k] <= hi[k])
    }

    /// DRM length scale `max(la, lb, h1 + h2)`.
    pub fn length_scale(&self) -> f64 {
        self.la.max(self.lb).max(self.h1 + self.h2)
    }
}

/// Matrix-phase properties at `x` (`x3 >= 0` is upper).
pub fn material_at(x: &Vec3<f64>, scenario: &BilayerScenario) -> Result<MaterialProps> {
    if !scenario.contains(x) {
        return Err(Error::Domain(format!("point {x:?} outside the box")));
    }
    Ok(scenario.props(Side::of(x[2])))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenOrder {
    Uniform,
    Linear,
    Quadratic,
}

impl EigenOrder {
    pub fn degree(self) -> usize {
        match self {
            EigenOrder::Uniform => 0,
            EigenOrder::Linear => 1,
            EigenOrder::Quadratic => 2,
        }
    }

    /// Unknown eigen coefficients per inclusion.
    pub fn num(self) -> usize {
        match self {
            EigenOrder::Uniform => 4,
            EigenOrder::Linear => 16,
            EigenOrder::Quadratic => 40,
        }
    }
}

impl std::str::FromStr for EigenOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "linear" => Ok(Self::Linear),
            "quadratic" => Ok(Self::Quadratic),
            other => Err(Error::Config(format!("unknown eigen order '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inclusion {
    pub ellipsoid: Ellipsoid<f64>,
    pub props: MaterialProps,
    pub order: EigenOrder,
}

impl Inclusion {
    pub fn new(center: Vec3<f64>, semi_axes: Vec3<f64>, props: MaterialProps, order: EigenOrder) -> Self {
        Self {
            ellipsoid: Ellipsoid::new(center, semi_axes),
            props,
            order,
        }
    }

    pub fn center(&self) -> Vec3<f64> {
        self.ellipsoid.center
    }

    pub fn side(&self) -> Side {
        Side::of(self.ellipsoid.center[2])
    }

    fn aabb(&self) -> (Vec3<f64>, Vec3<f64>) {
        let c = self.ellipsoid.center;
        let a = self.ellipsoid.semi_axes;
        ([c[0] - a[0], c[1] - a[1], c[2] - a[2]], [c[0] + a[0], c[1] + a[1], c[2] + a[2]])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Smallest gap between an inclusion and the plane `x3 = 0`.
    pub min_interface_clearance: Option<f64>,
    /// Smallest gap between two inclusion bounding boxes on the same side.
    pub min_pair_clearance: Option<f64>,
}

pub fn validate_scenario(scenario: &BilayerScenario, inclusions: &[Inclusion]) -> Result<ValidationReport> {
    for (v, name) in [(scenario.la, "la"), (scenario.lb, "lb"), (scenario.h1, "h1"), (scenario.h2, "h2")] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Validation(format!("{name} must be positive, got {v}")));
        }
    }
    scenario.upper.check("upper phase")?;
    scenario.lower.check("lower phase")?;
    match scenario.time {
        TimeControl::Transient { dt, steps, .. } => {
            if !(dt > 0.0) {
                return Err(Error::Validation(format!("time step must be positive, got {dt}")));
            }
            if steps == 0 {
                return Err(Error::Validation("transient run needs at least one step".into()));
            }
        }
        TimeControl::Harmonic { omega } => {
            if !omega.is_finite() {
                return Err(Error::Validation(format!("invalid angular frequency {omega}")));
            }
        }
        TimeControl::Steady => {}
    }
    for face in Face::ALL {
        if let BcValue::Sinusoid { period, .. } = scenario.bc(face).value {
            if !(period > 0.0) {
                return Err(Error::Validation(format!("{face:?}: sinusoid period must be positive")));
            }
        }
    }
    let (lo, hi) = (scenario.lo(), scenario.hi());
    let mut min_if: Option<f64> = None;
    for (n, inc) in inclusions.iter().enumerate() {
        let a = inc.ellipsoid.semi_axes;
        if a.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Validation(format!("inclusion {n}: semi-axes must be positive, got {a:?}")));
        }
        inc.props.check(&format!("inclusion {n}"))?;
        if inc.props.cp > 0.0 && inc.side_props(scenario).cp == 0.0 {
            return Err(Error::Validation(format!(
                "inclusion {n}: heat capacity mismatch cannot be represented in a capacity-free matrix"
            )));
        }
        let (blo, bhi) = inc.aabb();
        if (0..3).any(|k| blo[k] <= lo[k] || bhi[k] >= hi[k]) {
            return Err(Error::Validation(format!("inclusion {n} is not strictly inside the box")));
        }
        let gap = inc.ellipsoid.center[2].abs() - a[2];
        if gap <= 0.0 {
            return Err(Error::Validation(format!("inclusion {n} crosses the interface x3 = 0")));
        }
        min_if = Some(min_if.map_or(gap, |m| m.min(gap)));
    }
    let mut min_pair: Option<f64> = None;
    for i in 0..inclusions.len() {
        for j in i + 1..inclusions.len() {
            let (p, q) = (&inclusions[i], &inclusions[j]);
            if p.side() != q.side() {
                continue;
            }
            let (plo, phi) = p.aabb();
            let (qlo, qhi) = q.aabb();
            let sep = (0..3).map(|k| (qlo[k] - phi[k]).max(plo[k] - qhi[k])).fold(f64::NEG_INFINITY, f64::max);
            if sep <= 0.0 && ellipsoids_intersect(&p.ellipsoid, &q.ellipsoid) {
                return Err(Error::Validation(format!("inclusions {i} and {j} intersect")));
            }
            min_pair = Some(min_pair.map_or(sep, |m| m.min(sep)));
        }
    }
    Ok(ValidationReport {
        min_interface_clearance: min_if,
        min_pair_clearance: min_pair,
    })
}

impl Inclusion {
    /// Matrix properties surrounding the inclusion.
    pub fn side_props(&self, scenario: &BilayerScenario) -> MaterialProps {
        scenario.props(self.side())
    }
}

/// Sampled surface test; exact for the sphere pairs that dominate in practice
/// (center distance against radii) and conservative to the sampling density
/// otherwise.
fn ellipsoids_intersect(p: &Ellipsoid<f64>, q: &Ellipsoid<f64>) -> bool {
    let d = crate::scalar::dist3(&p.center, &q.center);
    let rmin = |e: &Ellipsoid<f64>| e.semi_axes.iter().cloned().fold(f64::INFINITY, f64::min);
    let rmax = |e: &Ellipsoid<f64>| e.semi_axes.iter().cloned().fold(0.0, f64::max);
    if d < rmin(p) + rmin(q) {
        return true;
    }
    if d >= rmax(p) + rmax(q) {
        return false;
    }
    if p.contains(&q.center) || q.contains(&p.center) {
        return true;
    }
    let (nt, np) = (64, 128);
    for i in 0..=nt {
        let th = std::f64::consts::PI * i as f64 / nt as f64;
        for j in 0..np {
            let ph = 2.0 * std::f64::consts::PI * j as f64 / np as f64;
            let a = p.semi_axes;
            let x = [
                p.center[0] + a[0] * th.sin() * ph.cos(),
                p.center[1] + a[1] * th.sin() * ph.sin(),
                p.center[2] + a[2] * th.cos(),
            ];
            if q.contains(&x) {
                return true;
            }
        }
    }
    false
}

/// Layered particle arrangement approximating a linearly graded composite.
///
/// The box is tiled by cubes of side `s = 2L/div` (`L` = full sample length;
/// `L = 2·la` for a quarter sample). Each cube holds a sphere at its center
/// whose volume fraction is `f = (1 - |x3|/H)/2` at the cube-center
/// elevation (`H` = height of that half), i.e. 0.5 at the interface and 0 at
/// the outer faces. Particles in the upper half carry the lower-phase
/// properties and vice versa.
pub fn build_fgm_inclusions(div: usize, scenario: &BilayerScenario, quarter: bool, order: EigenOrder) -> Result<Vec<Inclusion>> {
    let per_length = if quarter { 4 } else { 2 };
    if div < 4 || !div.is_multiple_of(per_length) {
        return Err(Error::Validation(format!(
            "div = {div}: must be >= 4 and divisible by {per_length}"
        )));
    }
    let full = if quarter { 2.0 * scenario.la } else { scenario.la };
    let s = 2.0 * full / div as f64;
    let count = |len: f64, what: &str| -> Result<usize> {
        let n = len / s;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) || n.round() < 1.0 {
            return Err(Error::Validation(format!("{what} = {len} is not a multiple of the cube side {s}")));
        }
        Ok(n.round() as usize)
    };
    let nx = count(scenario.la, "la")?;
    let ny = count(scenario.lb, "lb")?;
    let nzu = count(scenario.h1, "h1")?;
    let nzl = count(scenario.h2, "h2")?;
    let mut out = Vec::with_capacity(nx * ny * (nzu + nzl));
    let mut layers: Vec<(f64, f64)> = Vec::new();
    for k in 0..nzl {
        let z = -scenario.h2 + (k as f64 + 0.5) * s;
        layers.push((z, 0.5 * (1.0 - z.abs() / scenario.h2)));
    }
    for k in 0..nzu {
        let z = (k as f64 + 0.5) * s;
        layers.push((z, 0.5 * (1.0 - z / scenario.h1)));
    }
    for &(z, f) in &layers {
        let r = s * (3.0 * f / (4.0 * std::f64::consts::PI)).cbrt();
        if r >= 0.5 * s {
            return Err(Error::Validation(format!("particle radius {r} reaches half the cube side {s}")));
        }
        let props = if z >= 0.0 { scenario.lower } else { scenario.upper };
        for j in 0..ny {
            for i in 0..nx {
                let c = [
                    scenario.origin[0] + (i as f64 + 0.5) * s,
                    scenario.origin[1] + (j as f64 + 0.5) * s,
                    z,
                ];
                out.push(Inclusion::new(c, [r; 3], props, order));
            }
        }
    }
    Ok(out)
}
