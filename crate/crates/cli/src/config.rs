//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use pffrac_core::constitutive::MaterialParams;
use pffrac_core::stagger::{Axis, BcKind, BoundaryConditions, DirichletRule, LoadSchedule};
use pffrac_core::tensors::PlanarMode;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}:{column}: {message}", path.display())]
    Syntax {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}: field `{field}`: {message}", path.display())]
    Invalid {
        path: PathBuf,
        field: String,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    PlaneStress,
    PlaneStrain,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(rename = "E")]
    pub e: f64,
    pub nu: f64,
    #[serde(rename = "Gc")]
    pub gc: f64,
    pub ls: f64,
    pub eta: f64,
    pub mode: ModeName,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub v_max: f64,
    pub dv_coarse: f64,
    pub dv_fine: f64,
    pub switch_at: f64,
    pub max_inner: usize,
    pub stag_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Zero,
    Ramp,
}

fn one() -> f64 {
    1.0
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletConfig {
    pub tag: String,
    pub axis: u8,
    pub kind: KindName,
    #[serde(default = "one")]
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Free text; ignored by the solver.
    #[serde(default)]
    pub description: Option<String>,
    /// Relative paths are resolved against the config file's directory.
    pub mesh_path: PathBuf,
    pub material: MaterialConfig,
    pub schedule: ScheduleConfig,
    pub dirichlet: Vec<DirichletConfig>,
    pub load_tag: String,
    /// Relative paths are resolved against the working directory.
    pub out_dir: PathBuf,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub clamp_s: bool,
}

/// A parsed config with everything converted to solver types.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub raw: RunConfig,
    pub mesh_path: PathBuf,
    pub material: MaterialParams,
    pub schedule: LoadSchedule,
    pub bcs: BoundaryConditions,
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// Validates values and converts them to solver types.
    pub fn resolve(self, path: &Path) -> Result<ResolvedConfig, ConfigError> {
        let invalid = |field: &str, message: String| ConfigError::Invalid {
            path: path.to_path_buf(),
            field: field.to_string(),
            message,
        };
        let mat = &self.material;
        let mode = match mat.mode {
            ModeName::PlaneStress => PlanarMode::PlaneStress,
            ModeName::PlaneStrain => PlanarMode::PlaneStrain,
        };
        let material = MaterialParams::new(mat.e, mat.nu, mat.gc, mat.ls, mat.eta, mode)
            .map_err(|e| invalid("material", e.to_string()))?;

        let sc = &self.schedule;
        let schedule = LoadSchedule {
            v_max: sc.v_max,
            dv_coarse: sc.dv_coarse,
            dv_fine: sc.dv_fine,
            switch_at: sc.switch_at,
            max_inner: sc.max_inner,
            stag_tol: sc.stag_tol,
        };
        schedule
            .validate()
            .map_err(|e| invalid("schedule", e.to_string()))?;

        if self.snapshot_stride == 0 {
            return Err(invalid("snapshot_stride", "must be at least 1".into()));
        }
        if self.dirichlet.is_empty() {
            return Err(invalid(
                "dirichlet",
                "at least one entry is required".into(),
            ));
        }
        let mut rules = Vec::with_capacity(self.dirichlet.len());
        for (i, d) in self.dirichlet.iter().enumerate() {
            let axis = match d.axis {
                0 => Axis::X,
                1 => Axis::Y,
                other => {
                    return Err(invalid(
                        &format!("dirichlet[{i}].axis"),
                        format!("must be 0 or 1, got {other}"),
                    ))
                }
            };
            if !d.scale.is_finite() {
                return Err(invalid(
                    &format!("dirichlet[{i}].scale"),
                    "must be finite".into(),
                ));
            }
            let kind = match d.kind {
                KindName::Zero => BcKind::Zero,
                KindName::Ramp => BcKind::Ramp { scale: d.scale },
            };
            rules.push(DirichletRule {
                tag: d.tag.clone(),
                axis,
                kind,
            });
        }

        let base = path.parent().unwrap_or(Path::new("."));
        let mesh_path = if self.mesh_path.is_absolute() {
            self.mesh_path.clone()
        } else {
            base.join(&self.mesh_path)
        };
        Ok(ResolvedConfig {
            mesh_path,
            material,
            schedule,
            bcs: BoundaryConditions { rules },
            raw: self,
        })
    }
}
