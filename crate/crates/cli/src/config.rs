//! Job configuration files.
//!
//! A configuration is a JSON object with `schema: 1`. Complex numbers are
//! written as `[re, im]`. Example:
//!
//! ```json
//! {
//!   "schema": 1,
//!   "model": { "type": "Barrier", "z": [5.0, 0.0], "length": 1.0 },
//!   "grid": { "min": 0.1, "max": 10.0, "count": 200, "spacing": "log" }
//! }
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use serde::Deserialize;

use scatter1d::grid::Spacing;
use scatter1d::models::{MatchingMatrix, PointInteraction, PotentialModel};
use scatter1d::spectra::Rect;
use scatter1d::C64;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
pub struct Complex(pub f64, pub f64);

impl From<Complex> for C64 {
    fn from(c: Complex) -> C64 {
        C64::new(c.0, c.1)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub schema: u32,
    #[serde(default)]
    pub command: Option<String>,
    /// Parsed further by [`ModelConfig::from_value`].
    #[serde(default)]
    pub model: Option<serde_json::Value>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub rect: Option<RectConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub laser: Option<LaserConfig>,
    #[serde(default)]
    pub profile: Option<ProfileConfig>,
    #[serde(default)]
    pub symmetry: SymmetryConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Deliberate corruption of the model's transfer matrices, for testing
    /// the verification pipeline.
    #[serde(default)]
    pub fault: Option<FaultConfig>,
}

/// A model description. The JSON object carries a `type` tag naming the
/// variant; the remaining fields are variant-specific.
#[derive(Debug, Clone)]
pub enum ModelConfig {
    Delta(DeltaConfig),
    MultiDelta(MultiDeltaConfig),
    Barrier(BarrierConfig),
    PointInteractions(PointInteractionsConfig),
    LocallyPeriodic(LocallyPeriodicConfig),
    Sampled(SampledConfig),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaConfig {
    pub z: Complex,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiDeltaConfig {
    #[serde(default = "one")]
    pub eps: f64,
    pub couplings: Vec<Complex>,
    pub centers: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierConfig {
    pub z: Complex,
    #[serde(default)]
    pub x0: f64,
    pub length: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointInteractionsConfig {
    pub points: Vec<PointConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocallyPeriodicConfig {
    pub length: f64,
    pub coefficients: Vec<FourierTerm>,
    #[serde(default = "default_spp")]
    pub slices_per_period: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledConfig {
    /// Tagged by `kind`; see [`Shape`].
    pub shape: serde_json::Value,
    pub a: f64,
    pub b: f64,
    pub slices: usize,
}

/// Splits off the string tag `key` and hands the rest to `dispatch`; errors
/// are reported under the path `at`.
fn tagged<T>(
    mut value: serde_json::Value,
    key: &str,
    at: &str,
    dispatch: impl FnOnce(&str, serde_json::Value) -> Option<Result<T, CliError>>,
) -> Result<T, CliError> {
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Validation(format!("{at}: expected an object")))?;
    let tag = match obj.remove(key) {
        Some(serde_json::Value::String(t)) => t,
        Some(_) => {
            return Err(CliError::Validation(format!(
                "{at}.{key}: expected a string"
            )))
        }
        None => return Err(CliError::Validation(format!("{at}.{key}: missing"))),
    };
    dispatch(&tag, value).unwrap_or_else(|| {
        Err(CliError::Validation(format!(
            "{at}.{key}: unknown variant {tag:?}"
        )))
    })
}

fn field<T: serde::de::DeserializeOwned>(
    value: serde_json::Value,
    at: &str,
) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." {
            at.to_string()
        } else {
            format!("{at}.{path}")
        };
        CliError::Validation(format!("{path}: {}", e.into_inner()))
    })
}

impl ModelConfig {
    pub fn from_value(value: serde_json::Value) -> Result<Self, CliError> {
        const AT: &str = "model";
        tagged(value, "type", AT, |tag, v| {
            Some(match tag {
                "Delta" => field(v, AT).map(ModelConfig::Delta),
                "MultiDelta" => field(v, AT).map(ModelConfig::MultiDelta),
                "Barrier" => field(v, AT).map(ModelConfig::Barrier),
                "PointInteractions" => field(v, AT).map(ModelConfig::PointInteractions),
                "LocallyPeriodic" => field(v, AT).map(ModelConfig::LocallyPeriodic),
                "Sampled" => field(v, AT).map(ModelConfig::Sampled),
                _ => return None,
            })
        })
    }
}

fn one() -> f64 {
    1.0
}

fn default_spp() -> usize {
    scatter1d::models::DEFAULT_SLICES_PER_PERIOD
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub center: f64,
    /// Constant matching matrix, row-major.
    pub matrix: [[Complex; 2]; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub n: i32,
    pub z: Complex,
}

/// Potential profiles available to `Sampled` models, tagged by `kind`.
#[derive(Debug, Clone)]
pub enum Shape {
    Constant {
        z: Complex,
    },
    /// `−depth · exp(−x²/(2 width²))`.
    Gaussian {
        depth: f64,
        width: f64,
    },
    /// `−zeta / cosh²(alpha x)`.
    Sech2 {
        zeta: f64,
        alpha: f64,
    },
    /// `z` for `x < 0`, `z*` for `x ≥ 0`.
    MirroredPair {
        z: Complex,
    },
    /// Piecewise-constant values on equal subintervals of `[a, b]`.
    Table {
        values: Vec<Complex>,
    },
}

impl Shape {
    fn from_value(value: serde_json::Value) -> Result<Self, CliError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Z {
            z: Complex,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Gaussian {
            depth: f64,
            width: f64,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Sech2 {
            zeta: f64,
            alpha: f64,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Table {
            values: Vec<Complex>,
        }
        const AT: &str = "model.shape";
        tagged(value, "kind", AT, |tag, v| {
            Some(match tag {
                "constant" => field::<Z>(v, AT).map(|s| Shape::Constant { z: s.z }),
                "gaussian" => field::<Gaussian>(v, AT).map(|s| Shape::Gaussian {
                    depth: s.depth,
                    width: s.width,
                }),
                "sech2" => field::<Sech2>(v, AT).map(|s| Shape::Sech2 {
                    zeta: s.zeta,
                    alpha: s.alpha,
                }),
                "mirrored_pair" => field::<Z>(v, AT).map(|s| Shape::MirroredPair { z: s.z }),
                "table" => field::<Table>(v, AT).map(|s| Shape::Table { values: s.values }),
                _ => return None,
            })
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SpacingConfig {
    #[serde(alias = "lin")]
    Linear,
    Log,
}

impl From<SpacingConfig> for Spacing {
    fn from(s: SpacingConfig) -> Spacing {
        match s {
            SpacingConfig::Linear => Spacing::Linear,
            SpacingConfig::Log => Spacing::Log,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default = "default_spacing")]
    pub spacing: SpacingConfig,
}

fn default_spacing() -> SpacingConfig {
    SpacingConfig::Linear
}

impl std::str::FromStr for GridConfig {
    type Err = String;

    /// Parses `min,max,count,log|lin`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!("expected min,max,count,log|lin, got {s:?}"));
        }
        let num = |p: &str, what: &str| p.parse::<f64>().map_err(|e| format!("grid {what}: {e}"));
        let spacing = match parts[3] {
            "log" => SpacingConfig::Log,
            "lin" | "linear" => SpacingConfig::Linear,
            other => return Err(format!("grid spacing must be log or lin, got {other:?}")),
        };
        Ok(GridConfig {
            min: num(parts[0], "min")?,
            max: num(parts[1], "max")?,
            count: parts[2].parse().map_err(|e| format!("grid count: {e}"))?,
            spacing,
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RectConfig {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    #[serde(default)]
    pub nx: Option<usize>,
    #[serde(default)]
    pub ny: Option<usize>,
}

impl RectConfig {
    pub fn rect(&self) -> Rect {
        Rect::new(self.re_min, self.re_max, self.im_min, self.im_max)
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub identity: Option<f64>,
    pub symmetry: Option<f64>,
    pub root_residual: Option<f64>,
    pub root_separation: Option<f64>,
    pub self_dual: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LaserConfig {
    pub length: f64,
    pub mode: u32,
    /// Fixed real part of the refractive index.
    #[serde(default)]
    pub eta0: Option<f64>,
    /// Fixed emission wavenumber; exclusive with `eta0`.
    #[serde(default)]
    pub k0: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub damping: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub k: f64,
    /// Coefficients `(A, B)` of `A e^{ikx} + B e^{−ikx}` left of the system.
    pub left: [Complex; 2],
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SymmetryConfig {
    /// Extra reflection centers for P and PT about a point.
    #[serde(default)]
    pub about: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FaultConfig {
    /// Factor applied to the first row of every transfer matrix.
    pub det_scale: Complex,
}

pub fn parse(text: &str) -> Result<JobConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: JobConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Validation(format!("{path}: {}", e.into_inner()))
    })?;
    if cfg.schema != SCHEMA_VERSION {
        return Err(CliError::Validation(format!(
            "schema: unsupported version {}, expected {SCHEMA_VERSION}",
            cfg.schema
        )));
    }
    Ok(cfg)
}

impl ModelConfig {
    pub fn build(&self) -> Result<PotentialModel, CliError> {
        let model = match self.clone() {
            ModelConfig::Delta(DeltaConfig { z }) => PotentialModel::delta(z.into()),
            ModelConfig::MultiDelta(MultiDeltaConfig {
                eps,
                couplings,
                centers,
            }) => PotentialModel::MultiDelta {
                eps,
                couplings: couplings.into_iter().map(C64::from).collect(),
                centers,
            },
            ModelConfig::Barrier(BarrierConfig { z, x0, length }) => PotentialModel::Barrier {
                z: z.into(),
                x0,
                length,
            },
            ModelConfig::PointInteractions(PointInteractionsConfig { points }) => {
                PotentialModel::PointInteractions {
                    points: points
                        .into_iter()
                        .map(|p| PointInteraction {
                            center: p.center,
                            matrix: MatchingMatrix::Constant(
                                p.matrix.map(|row| row.map(C64::from)),
                            ),
                        })
                        .collect(),
                }
            }
            ModelConfig::LocallyPeriodic(LocallyPeriodicConfig {
                length,
                coefficients,
                slices_per_period,
            }) => PotentialModel::LocallyPeriodic {
                length,
                coefficients: coefficients
                    .into_iter()
                    .map(|t| (t.n, t.z.into()))
                    .collect(),
                slices_per_period,
            },
            ModelConfig::Sampled(SampledConfig {
                shape,
                a,
                b,
                slices,
            }) => sampled(Shape::from_value(shape)?, a, b, slices)?,
        };
        model
            .validate()
            .map_err(|e| CliError::Validation(format!("model: {e}")))?;
        Ok(model)
    }
}

fn sampled(shape: Shape, a: f64, b: f64, slices: usize) -> Result<PotentialModel, CliError> {
    Ok(match shape {
        Shape::Constant { z } => {
            let z = C64::from(z);
            PotentialModel::sampled(move |_| z, a, b, slices)
        }
        Shape::Gaussian { depth, width } => {
            if !(width > 0.0) {
                return Err(CliError::Validation(format!(
                    "model.shape.width: must be positive, got {width}"
                )));
            }
            PotentialModel::sampled(
                move |x| C64::new(-depth * (-(x * x) / (2.0 * width * width)).exp(), 0.0),
                a,
                b,
                slices,
            )
        }
        Shape::Sech2 { zeta, alpha } => PotentialModel::sampled(
            move |x| {
                let c = (alpha * x).cosh();
                C64::new(-zeta / (c * c), 0.0)
            },
            a,
            b,
            slices,
        ),
        Shape::MirroredPair { z } => {
            let z = C64::from(z);
            PotentialModel::sampled(move |x| if x < 0.0 { z } else { z.conj() }, a, b, slices)
        }
        Shape::Table { values } => {
            if values.is_empty() {
                return Err(CliError::Validation(
                    "model.shape.values: empty table".into(),
                ));
            }
            let values: Arc<Vec<C64>> = Arc::new(values.into_iter().map(C64::from).collect());
            let n = values.len();
            let h = (b - a) / n as f64;
            PotentialModel::sampled(
                move |x| values[(((x - a) / h).floor().max(0.0) as usize).min(n - 1)],
                a,
                b,
                slices,
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_model_tag() {
        let models = [
            r#"{"type":"Delta","z":[0,2]}"#,
            r#"{"type":"MultiDelta","couplings":[[1,0],[0,1]],"centers":[0,1]}"#,
            r#"{"type":"Barrier","z":[5,0],"length":1}"#,
            r#"{"type":"PointInteractions","points":[{"center":0,"matrix":[[[1,0],[0.5,0]],[[0,0],[1,0]]]}]}"#,
            r#"{"type":"LocallyPeriodic","length":1,"coefficients":[{"n":1,"z":[0.01,0]}]}"#,
            r#"{"type":"Sampled","shape":{"kind":"gaussian","depth":1,"width":1},"a":-5,"b":5,"slices":100}"#,
            r#"{"type":"Sampled","shape":{"kind":"table","values":[[1,0],[2,0]]},"a":0,"b":1,"slices":2}"#,
        ];
        for m in models {
            let cfg = parse(&format!(r#"{{"schema":1,"model":{m}}}"#)).unwrap();
            ModelConfig::from_value(cfg.model.unwrap())
                .unwrap()
                .build()
                .unwrap();
        }
    }

    #[test]
    fn errors_name_the_field() {
        let model = |m: &str| {
            let cfg = parse(&format!(r#"{{"schema":1,"model":{m}}}"#)).unwrap();
            ModelConfig::from_value(cfg.model.unwrap())
        };
        let e = model(r#"{"type":"Delta","z":[0,"x"]}"#).unwrap_err();
        assert!(e.to_string().contains("model.z"), "{e}");
        let e = model(r#"{"type":"Blob"}"#).unwrap_err();
        assert!(e.to_string().contains("Blob"), "{e}");
        let e = model(r#"{"type":"Barrier","z":[1,0]}"#).unwrap_err();
        assert!(e.to_string().contains("length"), "{e}");
        let e = model(r#"{"type":"Sampled","shape":{"kind":"gaussian","depth":"deep","width":1},"a":0,"b":1,"slices":4}"#)
            .unwrap()
            .build()
            .unwrap_err();
        assert!(e.to_string().contains("model.shape.depth"), "{e}");
        let e = parse(r#"{"schema":2}"#).unwrap_err();
        assert!(e.to_string().contains("schema"), "{e}");
        let e = model(r#"{"type":"MultiDelta","couplings":[[1,0],[1,0]],"centers":[1,0]}"#)
            .unwrap()
            .build()
            .unwrap_err();
        assert!(e.to_string().contains("centers"), "{e}");
    }

    #[test]
    fn grid_flag() {
        let g: GridConfig = "0.5,4,8,lin".parse().unwrap();
        assert_eq!(g.count, 8);
        assert_eq!(g.spacing, SpacingConfig::Linear);
        assert!("1,2,3".parse::<GridConfig>().is_err());
        assert!("1,2,3,cubic".parse::<GridConfig>().is_err());
    }
}
