//! Scene specifications: the JSON documents that configure a run.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use synthgeom::body::{ConvexBody, P2};
use synthgeom::constructions::{BaseQuadrilateral, ExactEuclidean, MAX_NET_DEPTH};
use synthgeom::line_systems::LineSystem;
use synthgeom::metric::StraightPlane;
use synthgeom::rat::RatPoint;

pub const SCENE_SCHEMA: &str = include_str!("../schema/scene_spec.schema.json");

/// Upper bound on `cases`, to keep a single run finite.
pub const MAX_CASES: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Desargues,
    Harmonic,
    Net,
    Psi,
    Phi,
    Hilbert,
    Pasch,
    Moulton,
    Render,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Desargues => "desargues",
            Suite::Harmonic => "harmonic",
            Suite::Net => "net",
            Suite::Psi => "psi",
            Suite::Phi => "phi",
            Suite::Hilbert => "hilbert",
            Suite::Pasch => "pasch",
            Suite::Moulton => "moulton",
            Suite::Render => "render",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RenderTarget {
    Net,
    Desargues,
    Quadrangle,
    Moulton,
    Phi,
}

impl RenderTarget {
    pub fn name(self) -> &'static str {
        match self {
            RenderTarget::Net => "net",
            RenderTarget::Desargues => "desargues",
            RenderTarget::Quadrangle => "quadrangle",
            RenderTarget::Moulton => "moulton",
            RenderTarget::Phi => "phi",
        }
    }
}

/// Optional overrides of a suite's default tolerances.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Bound on the suite's main residual.
    #[serde(default)]
    pub residual: Option<f64>,
    /// φ only: how close a recovered preimage must map to its target.
    #[serde(default)]
    pub preimage: Option<f64>,
    /// φ only: grid resolution of the injectivity hash.
    #[serde(default)]
    pub hash: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub suite: Suite,
    #[serde(default)]
    pub target: Option<RenderTarget>,
    #[serde(default)]
    pub plane: Option<StraightPlane>,
    #[serde(default)]
    pub system: Option<LineSystem>,
    /// Corners `a, b, y, x` of a base quadrilateral.
    #[serde(default)]
    pub base: Option<[[f64; 2]; 4]>,
    /// Triangle `a, b, c` for φ.
    #[serde(default)]
    pub triangle: Option<[[f64; 2]; 3]>,
    #[serde(default)]
    pub cases: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub depth: Option<u32>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Net suite only: also write the net itself, as JSON or CSV by extension.
    #[serde(default)]
    pub net_export: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(serde_json::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> SpecError {
    SpecError::Invalid(msg.into())
}

fn scene_validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let schema: serde_json::Value = serde_json::from_str(SCENE_SCHEMA).expect("bundled schema parses");
        jsonschema::validator_for(&schema).expect("bundled schema compiles")
    })
}

impl SceneSpec {
    pub fn new(suite: Suite) -> Self {
        SceneSpec {
            suite,
            target: None,
            plane: None,
            system: None,
            base: None,
            triangle: None,
            cases: None,
            seed: None,
            depth: None,
            tolerances: Tolerances::default(),
            output: None,
            net_export: None,
            format: None,
        }
    }

    /// Parses and schema-checks a document. Semantic checks are left to
    /// [`SceneSpec::validate`], which should run after any overrides.
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(SpecError::Json)?;
        let errors: Vec<String> = scene_validator()
            .iter_errors(&value)
            .map(|e| format!("{} at '{}'", e, e.instance_path()))
            .collect();
        if !errors.is_empty() {
            return Err(SpecError::Schema(errors.join("; ")));
        }
        serde_json::from_value(value).map_err(|e| invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Read { path: path.into(), source })?;
        Self::parse(&text)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(if self.suite == Suite::Render { Format::Svg } else { Format::Json })
    }

    pub fn default_cases(&self) -> u64 {
        match self.suite {
            Suite::Desargues | Suite::Psi | Suite::Pasch => 1000,
            Suite::Harmonic => 100,
            Suite::Phi | Suite::Hilbert => 10_000,
            Suite::Net | Suite::Moulton | Suite::Render => 1,
        }
    }

    pub fn cases(&self) -> u64 {
        self.cases.unwrap_or_else(|| self.default_cases())
    }

    pub fn depth(&self) -> u32 {
        self.depth.unwrap_or(match (self.suite, self.target) {
            (Suite::Psi, _) => 6,
            (Suite::Render, _) => 3,
            _ => 4,
        })
    }

    /// The plane a metric suite runs in.
    pub fn plane(&self) -> StraightPlane {
        self.plane.clone().unwrap_or_else(|| match (self.suite, self.target) {
            (Suite::Harmonic, _) | (Suite::Render, Some(RenderTarget::Net)) => StraightPlane::Euclidean,
            _ => StraightPlane::hilbert_disk(),
        })
    }

    /// Whether the net-style suites should run over exact rationals.
    pub fn exact_plane(&self) -> bool {
        matches!(self.plane(), StraightPlane::Euclidean)
    }

    pub fn system(&self) -> LineSystem {
        self.system.clone().unwrap_or_else(|| LineSystem::moulton(synthgeom::rat::int(2)).expect("bend 2 is valid"))
    }

    pub fn base_corners(&self) -> [P2; 4] {
        match self.base {
            Some(c) => c.map(|[x, y]| P2::new(x, y)),
            None if self.exact_plane() => {
                [P2::new(0.0, 0.0), P2::new(1.0, 0.0), P2::new(1.0, 1.0), P2::new(0.0, 1.0)]
            }
            None => [P2::new(-0.3, -0.25), P2::new(0.28, -0.3), P2::new(0.3, 0.32), P2::new(-0.25, 0.27)],
        }
    }

    pub fn metric_base(&self) -> BaseQuadrilateral<P2> {
        let [a, b, y, x] = self.base_corners();
        BaseQuadrilateral::new(a, b, y, x)
    }

    /// The base read exactly; every finite double is a dyadic rational.
    pub fn exact_base(&self) -> BaseQuadrilateral<RatPoint> {
        let [a, b, y, x] = self.base_corners().map(|p| RatPoint::from_f64(&p).expect("finite corner"));
        BaseQuadrilateral::new(a, b, y, x)
    }

    pub fn triangle_corners(&self) -> [P2; 3] {
        self.triangle
            .map(|t| t.map(|[x, y]| P2::new(x, y)))
            .unwrap_or([P2::new(-0.55, -0.35), P2::new(0.6, -0.25), P2::new(0.05, 0.65)])
    }

    /// Semantic checks the schema cannot express.
    pub fn validate(&self) -> Result<(), SpecError> {
        let s = self.suite;
        match (s, self.target) {
            (Suite::Render, None) => return Err(invalid("render needs a target")),
            (Suite::Render, Some(_)) | (_, None) => {}
            (_, Some(_)) => return Err(invalid(format!("target is only meaningful for render, not {}", s.name()))),
        }
        match (s, self.format()) {
            (Suite::Render, Format::Svg) => {}
            (Suite::Render, f) => return Err(invalid(format!("render writes svg, not {}", f.extension()))),
            (_, Format::Svg) => return Err(invalid(format!("{} writes a report; svg is for render", s.name()))),
            _ => {}
        }
        if let Some(c) = self.cases {
            if c == 0 || c > MAX_CASES {
                return Err(invalid(format!("cases must be in 1..={MAX_CASES}")));
            }
        }
        if self.depth() > MAX_NET_DEPTH {
            return Err(invalid(format!("depth {} exceeds {MAX_NET_DEPTH}", self.depth())));
        }
        let t = &self.tolerances;
        for v in [t.residual, t.preimage, t.hash].into_iter().flatten() {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("tolerance {v} is not a positive number")));
            }
        }
        if (t.preimage.is_some() || t.hash.is_some()) && s != Suite::Phi {
            return Err(invalid("preimage and hash tolerances apply to phi only"));
        }
        if self.net_export.is_some() && s != Suite::Net {
            return Err(invalid("net_export applies to the net suite only"));
        }
        let uses_plane = !matches!(s, Suite::Desargues | Suite::Pasch | Suite::Moulton)
            && !matches!(self.target, Some(RenderTarget::Desargues | RenderTarget::Quadrangle | RenderTarget::Moulton));
        if self.plane.is_some() && !uses_plane {
            return Err(invalid(format!("{} does not take a plane", s.name())));
        }
        let uses_system = matches!(s, Suite::Pasch | Suite::Moulton) || self.target == Some(RenderTarget::Moulton);
        if self.system.is_some() && !uses_system {
            return Err(invalid(format!("{} does not take a line system", s.name())));
        }
        if (s == Suite::Moulton || self.target == Some(RenderTarget::Moulton))
            && !matches!(self.system(), LineSystem::Moulton(_))
        {
            return Err(invalid("the Moulton witness needs a moulton system"));
        }
        if s == Suite::Hilbert && !matches!(self.plane(), StraightPlane::HilbertWeak { .. }) {
            return Err(invalid("the hilbert suite needs a hilbert_weak plane"));
        }
        if let Some(ConvexBody::Strip { .. }) = self.plane().domain() {
            if matches!(s, Suite::Hilbert | Suite::Harmonic | Suite::Phi) {
                return Err(invalid("sampling needs a bounded domain"));
            }
        }
        let uses_base = matches!(s, Suite::Net | Suite::Psi) || self.target == Some(RenderTarget::Net);
        if self.base.is_some() && !uses_base {
            return Err(invalid(format!("{} does not take a base quadrilateral", s.name())));
        }
        if uses_base {
            let base_ok = if self.exact_plane() {
                self.exact_base().validate(&ExactEuclidean).map_err(|e| e.to_string())
            } else {
                self.metric_base().validate(&self.plane()).map_err(|e| e.to_string())
            };
            base_ok.map_err(|e| invalid(format!("base quadrilateral: {e}")))?;
            if s == Suite::Psi && self.exact_plane() {
                return Err(invalid("psi runs in a metric plane, not the exact Euclidean one"));
            }
        }
        let uses_triangle = s == Suite::Phi || self.target == Some(RenderTarget::Phi);
        if self.triangle.is_some() && !uses_triangle {
            return Err(invalid(format!("{} does not take a triangle", s.name())));
        }
        if uses_triangle {
            let plane = self.plane();
            let [a, b, c] = self.triangle_corners();
            if ![a, b, c].iter().all(|p| plane.in_carrier(p)) {
                return Err(invalid("triangle vertex outside the plane's carrier"));
            }
            let area = (b - a).perp(&(c - a));
            if area.abs() < 1e-9 {
                return Err(invalid("triangle is degenerate"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_spec() {
        let s = SceneSpec::parse(r#"{"suite": "desargues", "cases": 10, "seed": 7}"#).unwrap();
        assert_eq!(s.cases(), 10);
        assert_eq!(s.seed(), 7);
        s.validate().unwrap();
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(matches!(SceneSpec::parse(r#"{"suite": "net", "colour": 1}"#), Err(SpecError::Schema(_))));
        let nested = r#"{"suite": "net", "tolerances": {"residual": 1e-3, "slack": 1}}"#;
        assert!(SceneSpec::parse(nested).is_err());
    }

    #[test]
    fn nested_plane_and_system() {
        let s = SceneSpec::parse(
            r#"{"suite": "pasch", "system": {"kind": "moulton", "bend": "5/2"}}"#,
        )
        .unwrap();
        s.validate().unwrap();
        let s = SceneSpec::parse(
            r#"{"suite": "hilbert", "plane": {"kind": "hilbert_weak",
                "domain": {"kind": "polygon", "vertices": [["-1","-1"],["1","-1"],["1","1"],["-1","1"]]}}}"#,
        )
        .unwrap();
        s.validate().unwrap();
    }

    #[test]
    fn semantic_checks() {
        let bad = [
            r#"{"suite": "render"}"#,
            r#"{"suite": "net", "target": "net"}"#,
            r#"{"suite": "net", "depth": 11}"#,
            r#"{"suite": "desargues", "format": "svg"}"#,
            r#"{"suite": "render", "target": "net", "format": "json"}"#,
            r#"{"suite": "hilbert", "plane": {"kind": "euclidean"}}"#,
            r#"{"suite": "moulton", "system": {"kind": "euclidean_chords", "body": {"kind": "disk", "center": [0, 0], "radius": 1}}}"#,
            r#"{"suite": "net", "base": [[0, 0], [1, 0], [0, 1], [1, 1]], "plane": {"kind": "euclidean"}}"#,
            r#"{"suite": "phi", "triangle": [[0, 0], [0.5, 0], [1, 0]]}"#,
            r#"{"suite": "psi", "tolerances": {"residual": -1}}"#,
        ];
        for text in bad {
            let r = SceneSpec::parse(text).and_then(|s| s.validate());
            assert!(r.is_err(), "{text} accepted");
        }
    }
}
