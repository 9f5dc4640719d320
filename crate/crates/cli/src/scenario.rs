//! Scenario and map files: versioned JSON, unknown keys rejected.

use std::collections::BTreeMap;
use std::path::Path;

use meromap::converge::{ConvergeOptions, Notion, Verdict};
use meromap::graphgeom::{CompactRegion, Shape};
use meromap::meromap::{MapFamily, ProductMap, RationalMap, Source};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA: u32 = 1;

/// A complex number written as `[re, im]`.
pub type Pair = [f64; 2];

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// One target projective space; coefficients may use `n`.
    Components(Vec<String>),
    /// A product of projective spaces.
    Factors(Vec<Vec<String>>),
    /// Iterates `f^n` of a self-map.
    Iterates(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Polydisc {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<Pair>>,
        radii: Vec<f64>,
    },
    Ball { center: Vec<Pair>, radius: f64 },
    Annulus { center: Vec<Pair>, inner: Vec<f64>, outer: Vec<f64> },
    Hartogs { r: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Excluded {
    pub center: Vec<Pair>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub shape: ShapeSpec,
    #[serde(default)]
    pub chart: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclude: Vec<Excluded>,
}

fn complex(v: &[Pair]) -> Vec<C64> {
    v.iter().map(|p| C64::new(p[0], p[1])).collect()
}

impl RegionSpec {
    pub fn build(&self) -> CompactRegion {
        let shape = match &self.shape {
            ShapeSpec::Polydisc { center, radii } => Shape::Polydisc {
                center: center.as_deref().map_or_else(|| vec![C64::new(0.0, 0.0); radii.len()], complex),
                radii: radii.clone(),
            },
            ShapeSpec::Ball { center, radius } => Shape::Ball { center: complex(center), radius: *radius },
            ShapeSpec::Annulus { center, inner, outer } => {
                Shape::PolyAnnulus { center: complex(center), inner: inner.clone(), outer: outer.clone() }
            }
            ShapeSpec::Hartogs { r } => Shape::Hartogs { r: *r },
        };
        self.exclude
            .iter()
            .fold(CompactRegion::new(self.chart, shape), |r, e| r.excluding(complex(&e.center), e.radius))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// `A<n>` for `C^n`, `P<n>` for `CP^n`.
    pub source: String,
    pub family: FamilySpec,
    /// Known limit map, as factors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Expected verdict per notion, checked in assertion mode.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expect: BTreeMap<String, String>,
}

/// A single map, for the thin drivers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub schema: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub source: String,
    /// Components of a map into one projective space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<String>>,
    /// Components per factor of a product target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
}

/// Which part of the graph volume `volume` reports as its value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeNormalization {
    /// Only the terms carrying `f^* omega_FS`: the area swept in the target.
    #[default]
    Pullback,
    /// The full graph volume, including the volume of the source region.
    Graph,
}

impl std::str::FromStr for VolumeNormalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pullback" => Ok(Self::Pullback),
            "graph" => Ok(Self::Graph),
            other => Err(format!("unknown volume normalization `{other}` (pullback or graph)")),
        }
    }
}

/// Command-line overrides, applied over scenario values.
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub workers: Option<usize>,
    pub exclude_indeterminacy: bool,
    pub volume_normalization: VolumeNormalization,
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, path: &str) -> Result<T, ScenarioError> {
    serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn check_schema(schema: u32, path: &str) -> Result<(), ScenarioError> {
    if schema == SCHEMA {
        Ok(())
    } else {
        Err(ScenarioError::Invalid { path: path.into(), message: format!("unsupported schema {schema}, expected {SCHEMA}") })
    }
}

fn parse_source(s: &str, path: &str) -> Result<Source, ScenarioError> {
    s.parse().map_err(|message| ScenarioError::Invalid { path: path.into(), message })
}

fn owned(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn invalid(path: &str) -> impl Fn(meromap::meromap::MapError) -> ScenarioError + '_ {
    move |e| ScenarioError::Invalid { path: path.into(), message: e.to_string() }
}

impl Scenario {
    pub fn parse(text: &str, path: &str) -> Result<Self, ScenarioError> {
        let s: Self = parse_json(text, path)?;
        check_schema(s.schema, path)?;
        s.family(path)?;
        if let Some(n) = s.expect.keys().find(|k| k.parse::<Notion>().is_err()) {
            return Err(ScenarioError::Invalid { path: path.into(), message: format!("unknown notion `{n}` in expect") });
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        Self::parse(&read(path)?, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn source(&self, path: &str) -> Result<Source, ScenarioError> {
        parse_source(&self.source, path)
    }

    pub fn family(&self, path: &str) -> Result<MapFamily, ScenarioError> {
        let source = self.source(path)?;
        let fam = match &self.family {
            FamilySpec::Components(c) => MapFamily::parse(source, &owned(c)),
            FamilySpec::Factors(f) => MapFamily::parse_factors(source, f),
            FamilySpec::Iterates(c) => RationalMap::parse(source, &owned(c)).and_then(MapFamily::iterates_of),
        };
        fam.map_err(invalid(path))
    }

    pub fn is_iterates(&self) -> bool {
        matches!(self.family, FamilySpec::Iterates(_))
    }

    pub fn limit(&self, path: &str) -> Result<Option<ProductMap>, ScenarioError> {
        let Some(factors) = &self.limit else { return Ok(None) };
        let source = self.source(path)?;
        let maps = factors.iter().map(|c| RationalMap::parse(source, &owned(c))).collect::<Result<Vec<_>, _>>();
        Ok(Some(maps.and_then(ProductMap::new).map_err(invalid(path))?))
    }

    /// The scenario region, or the unit polydisc of the source dimension.
    pub fn region(&self, path: &str) -> Result<CompactRegion, ScenarioError> {
        Ok(match &self.region {
            Some(r) => r.build(),
            None => CompactRegion::unit_polydisc(self.source(path)?.dim()),
        })
    }

    pub fn schedule(&self) -> Vec<usize> {
        self.schedule.clone().unwrap_or_else(|| {
            if self.is_iterates() {
                (1..=10).map(|k| 2 * k).collect()
            } else {
                vec![10, 20, 40, 80, 120, 160, 200]
            }
        })
    }

    pub fn options(&self, run: &RunConfig) -> ConvergeOptions {
        let d = ConvergeOptions::default();
        ConvergeOptions {
            tol: run.tol.or(self.tol).unwrap_or(d.tol),
            tail: self.tail.unwrap_or(d.tail),
            samples: run.samples.or(self.samples).unwrap_or(d.samples),
            seed: run.seed.or(self.seed).unwrap_or(d.seed),
            ..d
        }
    }

    pub fn expected(&self, notion: Notion) -> Option<Verdict> {
        self.expect.iter().find(|(k, _)| k.parse::<Notion>().ok() == Some(notion)).and_then(|(_, v)| match v.as_str() {
            "converges" => Some(Verdict::Converges),
            "diverges" => Some(Verdict::Diverges),
            "undecided" => Some(Verdict::Undecided),
            _ => None,
        })
    }
}

impl MapSpec {
    pub fn parse(text: &str, path: &str) -> Result<Self, ScenarioError> {
        let m: Self = parse_json(text, path)?;
        check_schema(m.schema, path)?;
        m.product(path)?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        Self::parse(&read(path)?, &path.display().to_string())
    }

    pub fn product(&self, path: &str) -> Result<ProductMap, ScenarioError> {
        let source = parse_source(&self.source, path)?;
        let maps = match (&self.components, &self.factors) {
            (Some(c), None) => vec![RationalMap::parse(source, &owned(c)).map_err(invalid(path))?],
            (None, Some(f)) => {
                f.iter().map(|c| RationalMap::parse(source, &owned(c))).collect::<Result<_, _>>().map_err(invalid(path))?
            }
            _ => {
                return Err(ScenarioError::Invalid {
                    path: path.into(),
                    message: "exactly one of `components` and `factors` is required".into(),
                })
            }
        };
        ProductMap::new(maps).map_err(invalid(path))
    }

    /// The map, when the target is a single projective space.
    pub fn map(&self, path: &str) -> Result<RationalMap, ScenarioError> {
        let p = self.product(path)?;
        p.as_single().cloned().ok_or_else(|| ScenarioError::Invalid { path: path.into(), message: "expected a single target factor".into() })
    }

    pub fn region(&self, path: &str) -> Result<CompactRegion, ScenarioError> {
        Ok(match &self.region {
            Some(r) => r.build(),
            None => CompactRegion::unit_polydisc(parse_source(&self.source, path)?.dim()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MOVING_POLE: &str = r#"{
        "schema": 1,
        "name": "moving_pole",
        "source": "A1",
        "family": {"components": ["z0", "z1 - {1/n}*z0"]},
        "region": {"shape": {"kind": "polydisc", "radii": [1.0]}},
        "schedule": [10, 20, 40],
        "expect": {"def1": "diverges"}
    }"#;

    #[test]
    fn scenario_round_trips() {
        let s = Scenario::parse(MOVING_POLE, "x").unwrap();
        assert_eq!(Scenario::parse(&s.to_json(), "y").unwrap(), s);
        assert_eq!(s.expected(Notion::Def1Series), Some(Verdict::Diverges));
        assert_eq!(s.region("x").unwrap(), CompactRegion::unit_polydisc(1));
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_position() {
        let bad = MOVING_POLE.replace("\"schedule\"", "\"shedule\"");
        match Scenario::parse(&bad, "s.json") {
            Err(ScenarioError::Parse { line, column, message, .. }) => {
                assert_eq!(line, 7);
                assert!(column > 0);
                assert!(message.contains("shedule"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(Scenario::parse("{ \"schema\": 1,", "t"), Err(ScenarioError::Parse { .. })));
    }

    #[test]
    fn bad_polynomials_and_schemas_are_invalid() {
        let bad = MOVING_POLE.replace("z1 - {1/n}*z0", "z1^2 - z0");
        assert!(matches!(Scenario::parse(&bad, "x"), Err(ScenarioError::Invalid { .. })));
        let bad = MOVING_POLE.replace("\"schema\": 1", "\"schema\": 2");
        assert!(matches!(Scenario::parse(&bad, "x"), Err(ScenarioError::Invalid { .. })));
    }

    #[test]
    fn map_files_need_exactly_one_target_description() {
        let m = r#"{"schema": 1, "name": "id", "source": "A1", "components": ["z1", "z0"]}"#;
        assert!(MapSpec::parse(m, "m").unwrap().map("m").is_ok());
        let both = r#"{"schema": 1, "name": "id", "source": "A1", "components": ["z1", "z0"], "factors": [["z1", "z0"]]}"#;
        assert!(MapSpec::parse(both, "m").is_err());
    }
}
