//! Scenario files: TOML with `[geometry]`, `[upper]`, `[lower]`, `[bc.<face>]`,
//! `[time]`, `[mesh]`, `[[inclusions]]` or `[fgm]`, `[output]`, `[oracle]`.
//! Faces without a `[bc.*]` table are adiabatic.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bem::IntegrationOptions;
use crate::error::{Error, Result};
use crate::model::{build_fgm_inclusions, BilayerScenario, EigenOrder, Face, FaceBc, Inclusion, MaterialProps, TimeControl};
use crate::solver::MeshSpec;
use crate::Vec3;

pub const BUNDLED: [(&str, &str); 3] = [
    ("verify_bie", include_str!("../scenarios/verify_bie.toml")),
    ("verify_two_spheres", include_str!("../scenarios/verify_two_spheres.toml")),
    ("fgm_desk", include_str!("../scenarios/fgm_desk.toml")),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub u0: f64,
    pub geometry: Geometry,
    pub upper: MaterialProps,
    pub lower: MaterialProps,
    #[serde(default)]
    pub bc: BTreeMap<Face, FaceBc>,
    pub time: TimeControl,
    #[serde(default)]
    pub mesh: MeshFile,
    #[serde(default)]
    pub inclusions: Vec<InclusionFile>,
    pub fgm: Option<FgmFile>,
    #[serde(default)]
    pub output: OutputFile,
    #[serde(default)]
    pub oracle: OracleFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    #[serde(default)]
    pub origin: [f64; 2],
    pub la: f64,
    pub lb: f64,
    pub h1: f64,
    pub h2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshFile {
    pub divisions: [usize; 4],
    pub interior: [usize; 3],
    pub drm_order: usize,
    pub integration: IntegrationOptions,
}

impl Default for MeshFile {
    fn default() -> Self {
        let d = MeshSpec::default();
        Self {
            divisions: d.divisions,
            interior: d.interior,
            drm_order: d.drm_order,
            integration: d.integration,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionFile {
    pub center: Vec3<f64>,
    pub semi_axes: Vec3<f64>,
    pub k: f64,
    pub cp: f64,
    #[serde(default = "default_order")]
    pub order: EigenOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FgmFile {
    pub div: usize,
    #[serde(default)]
    pub quarter: bool,
    #[serde(default = "default_order")]
    pub order: EigenOrder,
}

fn default_order() -> EigenOrder {
    EigenOrder::Uniform
}

/// Plane contour grid `x1 = const`, `n2 × n3` cube centres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneFile {
    pub x1: f64,
    pub n2: usize,
    pub n3: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputFile {
    pub probes: Vec<Vec3<f64>>,
    /// Output times for transient runs; empty means every step.
    pub times: Vec<f64>,
    /// Number of averaging layers through the thickness (0 = none).
    pub layers: usize,
    pub per_layer: Option<[usize; 3]>,
    pub plane: Option<PlaneFile>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleFile {
    /// Voxel counts; derived from the geometry when absent.
    pub cells: Option<[usize; 3]>,
    pub substeps: Option<usize>,
    /// Gate on the maximum relative probe temperature discrepancy.
    pub tolerance: Option<f64>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a file, or a bundled scenario by name when no such file exists.
    pub fn load(path_or_name: &str) -> Result<Self> {
        let path = Path::new(path_or_name);
        if !path.exists() {
            if let Some((_, text)) = BUNDLED.iter().find(|(n, _)| *n == path_or_name) {
                return Self::parse(text);
            }
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn scenario(&self) -> BilayerScenario {
        let g = &self.geometry;
        BilayerScenario {
            origin: g.origin,
            la: g.la,
            lb: g.lb,
            h1: g.h1,
            h2: g.h2,
            upper: self.upper,
            lower: self.lower,
            bcs: Face::ALL.map(|f| self.bc.get(&f).copied().unwrap_or_else(FaceBc::adiabatic)),
            time: self.time,
            u0: self.u0,
        }
    }

    pub fn mesh_spec(&self) -> MeshSpec {
        MeshSpec {
            divisions: self.mesh.divisions,
            interior: self.mesh.interior,
            drm_order: self.mesh.drm_order,
            integration: self.mesh.integration,
        }
    }

    /// Explicit inclusions followed by generated FGM particles. `order`
    /// overrides every eigen order when given.
    pub fn inclusions(&self, scenario: &BilayerScenario, order: Option<EigenOrder>) -> Result<Vec<Inclusion>> {
        let mut out: Vec<Inclusion> = self
            .inclusions
            .iter()
            .map(|i| Inclusion::new(i.center, i.semi_axes, MaterialProps::new(i.k, i.cp), order.unwrap_or(i.order)))
            .collect();
        if let Some(f) = &self.fgm {
            out.extend(build_fgm_inclusions(f.div, scenario, f.quarter, order.unwrap_or(f.order))?);
        }
        Ok(out)
    }
}
