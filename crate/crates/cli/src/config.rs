//! Experiment configuration: a flat `key = value` text format with
//! `[section]` headers. `#` starts a comment.
//!
//! ```text
//! [surface]
//! rho0 = 0.6
//! term = 0.05 2 0        # amplitude l m, repeatable
//!
//! [surface_tilde]        # optional, identity correspondence only
//! rho0 = 0.6
//! term = 0.08 2 0
//!
//! [isometry]
//! kind = boost           # identity | rotation | boost | reflect
//! rapidity = 0.25
//! axis = 1 0 0
//!
//! [quadrature]
//! n_theta = 64
//! n_phi = 128
//! regraph = 32x64
//!
//! [tolerances]
//! integral_rel = 1e-6
//!
//! [suites]
//! reflection = false
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use dsrigid_core::ambient::AmbientIsometry;
use dsrigid_core::hypersurface::SurfaceDescriptor;
use dsrigid_core::integrals::Tolerances;
use nalgebra::Vector3;
use thiserror::Error;

pub const MIN_DEGREE: usize = 16;
pub const MAX_RAPIDITY: f64 = 1.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsometryChoice {
    Identity,
    Rotation,
    Boost,
    Reflect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometryConfig {
    pub kind: IsometryChoice,
    pub rapidity: f64,
    pub angle: f64,
    pub axis: [f64; 3],
}

impl IsometryConfig {
    pub fn build(&self) -> Result<AmbientIsometry, ConfigError> {
        let axis = Vector3::from(self.axis);
        let err = |e| invalid(format!("isometry: {e}"));
        match self.kind {
            IsometryChoice::Identity => Ok(AmbientIsometry::identity()),
            IsometryChoice::Rotation => AmbientIsometry::rotation(axis, self.angle).map_err(err),
            IsometryChoice::Boost => AmbientIsometry::boost(self.rapidity, axis).map_err(err),
            IsometryChoice::Reflect => Ok(AmbientIsometry::reflect_equator()),
        }
    }
}

/// Tolerances used by the command-line suites: the integral tolerances plus
/// the pointwise geometry checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliTolerances {
    pub core: Tolerances,
    pub newton: f64,
    pub deriv_v: f64,
    pub reflection: f64,
}

impl Default for CliTolerances {
    fn default() -> Self {
        Self { core: Tolerances::default(), newton: 1e-6, deriv_v: 1e-10, reflection: 1e-8 }
    }
}

impl CliTolerances {
    pub const NAMES: [&'static str; 9] = [
        "integral_rel",
        "pointwise",
        "metric",
        "w_mismatch",
        "rigidity_rel",
        "landing",
        "newton",
        "deriv_v",
        "reflection",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(invalid(format!("tolerance {name} must be positive, got {value}")));
        }
        let slot = match name {
            "integral_rel" => &mut self.core.integral_rel,
            "pointwise" => &mut self.core.pointwise,
            "metric" => &mut self.core.metric,
            "w_mismatch" => &mut self.core.w_mismatch,
            "rigidity_rel" => &mut self.core.rigidity_rel,
            "landing" => &mut self.core.landing,
            "newton" => &mut self.newton,
            "deriv_v" => &mut self.deriv_v,
            "reflection" => &mut self.reflection,
            _ => return Err(invalid(format!("unknown tolerance {name} (known: {})", Self::NAMES.join(", ")))),
        };
        *slot = value;
        Ok(())
    }

    pub fn get(&self, name: &str) -> f64 {
        match name {
            "integral_rel" => self.core.integral_rel,
            "pointwise" => self.core.pointwise,
            "metric" => self.core.metric,
            "w_mismatch" => self.core.w_mismatch,
            "rigidity_rel" => self.core.rigidity_rel,
            "landing" => self.core.landing,
            "newton" => self.newton,
            "deriv_v" => self.deriv_v,
            "reflection" => self.reflection,
            _ => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub surface: SurfaceDescriptor,
    pub surface_tilde: Option<SurfaceDescriptor>,
    pub isometry: Option<IsometryConfig>,
    pub quadrature: (usize, usize),
    pub regraph: (usize, usize),
    pub tolerances: CliTolerances,
    pub suites: BTreeMap<String, bool>,
}

/// Suites run by `geometry`, all enabled unless switched off.
pub const GEOMETRY_SUITES: [&str; 5] =
    ["pre_integral", "sigma2_curvature", "newton_divergence", "deriv_v", "reflection"];
/// Suites run by `verify-identities`.
pub const PAIR_SUITES: [&str; 2] = ["identities", "tilde_symmetry"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Geometry,
    VerifyIdentities,
    Rigidity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Geometry => "geometry",
            Command::VerifyIdentities => "verify-identities",
            Command::Rigidity => "rigidity",
        }
    }

    fn is_pair(self) -> bool {
        !matches!(self, Command::Geometry)
    }
}

pub fn parse_resolution(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.trim().split_once(['x', 'X'])?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn parse_f64(v: &str, line: usize) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ConfigError::Parse { line, msg: format!("expected a finite number, got {v:?}") })
}

fn parse_usize(v: &str, line: usize) -> Result<usize, ConfigError> {
    v.parse().map_err(|_| ConfigError::Parse { line, msg: format!("expected an integer, got {v:?}") })
}

fn parse_bool(v: &str, line: usize) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::Parse { line, msg: format!("expected true/false, got {v:?}") }),
    }
}

#[derive(Default)]
struct IsometryBuilder {
    kind: Option<IsometryChoice>,
    rapidity: Option<f64>,
    angle: Option<f64>,
    axis: Option<[f64; 3]>,
}

#[derive(Default)]
struct SurfaceBuilder {
    rho0: Option<f64>,
    terms: Vec<(f64, u32, i32)>,
}

impl SurfaceBuilder {
    fn set(&mut self, key: &str, v: &str, line: usize) -> Result<(), ConfigError> {
        match key {
            "rho0" => self.rho0 = Some(parse_f64(v, line)?),
            "term" => {
                let parts: Vec<&str> = v.split_whitespace().collect();
                let bad = || ConfigError::Parse { line, msg: format!("term expects `amplitude l m`, got {v:?}") };
                if parts.len() != 3 {
                    return Err(bad());
                }
                let a = parse_f64(parts[0], line)?;
                let l: u32 = parts[1].parse().map_err(|_| bad())?;
                let m: i32 = parts[2].parse().map_err(|_| bad())?;
                if m.unsigned_abs() > l {
                    return Err(ConfigError::Parse { line, msg: format!("term needs |m| <= l, got l={l} m={m}") });
                }
                self.terms.push((a, l, m));
            }
            _ => return Err(ConfigError::Parse { line, msg: format!("unknown surface key {key:?}") }),
        }
        Ok(())
    }

    fn build(self, section: &str) -> Result<SurfaceDescriptor, ConfigError> {
        let rho0 = self.rho0.ok_or_else(|| invalid(format!("[{section}] needs rho0")))?;
        Ok(self.terms.into_iter().fold(SurfaceDescriptor::slice(rho0), |d, (a, l, m)| d.with_term(a, l, m)))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut section = String::new();
        let mut surface: Option<SurfaceBuilder> = None;
        let mut surface_tilde: Option<SurfaceBuilder> = None;
        let mut isometry: Option<IsometryBuilder> = None;
        let mut quadrature = (64, 128);
        let mut regraph = (32, 64);
        let mut tolerances = CliTolerances::default();
        let mut suites = BTreeMap::new();
        let mut seen = Vec::<String>::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim().to_string();
                if seen.contains(&name) {
                    return Err(ConfigError::Parse { line, msg: format!("section [{name}] repeated") });
                }
                match name.as_str() {
                    "surface" => surface = Some(SurfaceBuilder::default()),
                    "surface_tilde" => surface_tilde = Some(SurfaceBuilder::default()),
                    "isometry" => isometry = Some(IsometryBuilder::default()),
                    "quadrature" | "tolerances" | "suites" => {}
                    _ => return Err(ConfigError::Parse { line, msg: format!("unknown section [{name}]") }),
                }
                seen.push(name.clone());
                section = name;
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| ConfigError::Parse { line, msg: format!("expected `key = value`, got {content:?}") })?;
            match section.as_str() {
                "surface" => surface.as_mut().unwrap().set(key, value, line)?,
                "surface_tilde" => surface_tilde.as_mut().unwrap().set(key, value, line)?,
                "isometry" => {
                    let iso = isometry.as_mut().unwrap();
                    match key {
                        "kind" => {
                            iso.kind = Some(match value {
                                "identity" => IsometryChoice::Identity,
                                "rotation" => IsometryChoice::Rotation,
                                "boost" => IsometryChoice::Boost,
                                "reflect" => IsometryChoice::Reflect,
                                _ => {
                                    return Err(ConfigError::Parse {
                                        line,
                                        msg: format!("unknown isometry kind {value:?}"),
                                    })
                                }
                            })
                        }
                        "rapidity" => iso.rapidity = Some(parse_f64(value, line)?),
                        "angle" => iso.angle = Some(parse_f64(value, line)?),
                        "axis" => {
                            let v: Vec<f64> =
                                value.split_whitespace().map(|x| parse_f64(x, line)).collect::<Result<_, _>>()?;
                            let a: [f64; 3] = v
                                .try_into()
                                .map_err(|_| ConfigError::Parse { line, msg: "axis expects three numbers".into() })?;
                            iso.axis = Some(a);
                        }
                        _ => return Err(ConfigError::Parse { line, msg: format!("unknown isometry key {key:?}") }),
                    }
                }
                "quadrature" => match key {
                    "n_theta" => quadrature.0 = parse_usize(value, line)?,
                    "n_phi" => quadrature.1 = parse_usize(value, line)?,
                    "regraph" => {
                        regraph = parse_resolution(value).ok_or_else(|| ConfigError::Parse {
                            line,
                            msg: format!("regraph expects NxM, got {value:?}"),
                        })?
                    }
                    _ => return Err(ConfigError::Parse { line, msg: format!("unknown quadrature key {key:?}") }),
                },
                "tolerances" => {
                    let v = parse_f64(value, line)?;
                    tolerances.set(key, v).map_err(|e| ConfigError::Parse { line, msg: e.to_string() })?;
                }
                "suites" => {
                    if !GEOMETRY_SUITES.contains(&key) && !PAIR_SUITES.contains(&key) {
                        return Err(ConfigError::Parse { line, msg: format!("unknown suite {key:?}") });
                    }
                    suites.insert(key.to_string(), parse_bool(value, line)?);
                }
                _ => return Err(ConfigError::Parse { line, msg: "key outside of any section".into() }),
            }
        }

        let surface = surface.ok_or_else(|| invalid("missing [surface] section"))?.build("surface")?;
        let surface_tilde = surface_tilde.map(|b| b.build("surface_tilde")).transpose()?;
        let isometry = isometry
            .map(|IsometryBuilder { kind, rapidity, angle, axis }| -> Result<IsometryConfig, ConfigError> {
                let kind = kind.ok_or_else(|| invalid("[isometry] needs kind"))?;
                if kind == IsometryChoice::Boost && rapidity.is_none() {
                    return Err(invalid("boost needs rapidity"));
                }
                if kind == IsometryChoice::Rotation && angle.is_none() {
                    return Err(invalid("rotation needs angle"));
                }
                if matches!(kind, IsometryChoice::Boost | IsometryChoice::Rotation) && axis.is_none() {
                    return Err(invalid("boost and rotation need axis"));
                }
                Ok(IsometryConfig {
                    kind,
                    rapidity: rapidity.unwrap_or(0.0),
                    angle: angle.unwrap_or(0.0),
                    axis: axis.unwrap_or([1.0, 0.0, 0.0]),
                })
            })
            .transpose()?;
        let cfg = Self { surface, surface_tilde, isometry, quadrature, regraph, tolerances, suites };
        cfg.validate_common()?;
        Ok(cfg)
    }

    pub fn from_file(path: &str) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_string(), source })?;
        Self::parse(&text)
    }

    fn validate_common(&self) -> Result<(), ConfigError> {
        let (nt, np) = self.quadrature;
        if nt < MIN_DEGREE || np < MIN_DEGREE {
            return Err(invalid(format!("quadrature degrees must be >= {MIN_DEGREE}, got {nt}x{np}")));
        }
        let (gt, gp) = self.regraph;
        if gt < 4 || gp < 4 || gp % 2 != 0 {
            return Err(invalid(format!("regraph grid must be at least 4x4 with even N_phi, got {gt}x{gp}")));
        }
        if let Some(iso) = &self.isometry {
            if iso.rapidity.abs() > MAX_RAPIDITY {
                return Err(invalid(format!("|rapidity| must be <= {MAX_RAPIDITY}, got {}", iso.rapidity)));
            }
            if matches!(iso.kind, IsometryChoice::Boost | IsometryChoice::Rotation) && Vector3::from(iso.axis).norm() == 0.0
            {
                return Err(invalid("axis must be non-zero"));
            }
        }
        Ok(())
    }

    /// Checks the surface/isometry count against the command.
    pub fn validate_for(&self, cmd: Command) -> Result<(), ConfigError> {
        self.validate_common()?;
        if cmd.is_pair() {
            let iso = self
                .isometry
                .as_ref()
                .ok_or_else(|| invalid(format!("{} needs exactly one [isometry] section", cmd.name())))?;
            if self.surface_tilde.is_some() && iso.kind != IsometryChoice::Identity {
                return Err(invalid("[surface_tilde] is only allowed with kind = identity"));
            }
        } else {
            if self.surface_tilde.is_some() {
                return Err(invalid("geometry takes exactly one surface; remove [surface_tilde]"));
            }
            if self.isometry.is_some() {
                return Err(invalid("geometry takes no [isometry] section"));
            }
        }
        Ok(())
    }

    pub fn suite_enabled(&self, name: &str) -> bool {
        self.suites.get(name).copied().unwrap_or(true)
    }

    /// Canonical `key=value` echo, in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let desc = |d: &SurfaceDescriptor| {
            let mut s = format!("rho0={}", d.rho0);
            for t in &d.terms {
                let _ = write!(s, " term({},{},{})", t.amplitude, t.l, t.m);
            }
            s
        };
        out.push(("surface".into(), desc(&self.surface)));
        if let Some(t) = &self.surface_tilde {
            out.push(("surface_tilde".into(), desc(t)));
        }
        if let Some(iso) = &self.isometry {
            let kind = match iso.kind {
                IsometryChoice::Identity => "identity",
                IsometryChoice::Rotation => "rotation",
                IsometryChoice::Boost => "boost",
                IsometryChoice::Reflect => "reflect",
            };
            out.push((
                "isometry".into(),
                format!(
                    "kind={kind} rapidity={} angle={} axis=({},{},{})",
                    iso.rapidity, iso.angle, iso.axis[0], iso.axis[1], iso.axis[2]
                ),
            ));
        }
        out.push(("quadrature".into(), format!("{}x{}", self.quadrature.0, self.quadrature.1)));
        out.push(("regraph".into(), format!("{}x{}", self.regraph.0, self.regraph.1)));
        for name in CliTolerances::NAMES {
            out.push((format!("tol.{name}"), format!("{:e}", self.tolerances.get(name))));
        }
        for (k, v) in &self.suites {
            out.push((format!("suite.{k}"), v.to_string()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAIR: &str = "[surface]\nrho0 = 0.6\nterm = 0.05 2 0 # Y20\n\n[isometry]\nkind = boost\nrapidity = 0.25\naxis = 1 0 0\n\n[quadrature]\nn_theta = 32\nn_phi = 64\n";

    #[test]
    fn parses_pair_config() {
        let c = ExperimentConfig::parse(PAIR).unwrap();
        assert_eq!(c.surface.rho0, 0.6);
        assert_eq!(c.surface.terms.len(), 1);
        assert_eq!(c.quadrature, (32, 64));
        let iso = c.isometry.as_ref().unwrap();
        assert_eq!(iso.kind, IsometryChoice::Boost);
        assert_eq!(iso.rapidity, 0.25);
        c.validate_for(Command::Rigidity).unwrap();
        assert!(c.validate_for(Command::Geometry).is_err());
    }

    #[test]
    fn rejects_coarse_quadrature() {
        let text = PAIR.replace("n_theta = 32", "n_theta = 8");
        assert!(matches!(ExperimentConfig::parse(&text), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn rejects_large_rapidity() {
        let text = PAIR.replace("rapidity = 0.25", "rapidity = 1.5");
        assert!(matches!(ExperimentConfig::parse(&text), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn reports_line_numbers() {
        let err = ExperimentConfig::parse("[surface]\nrho0 = abc\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err}");
        let err = ExperimentConfig::parse("[surface]\nrho0 = 0.5\n[bogus]\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn surface_count_matches_command() {
        let text = "[surface]\nrho0 = 0.5\n[surface_tilde]\nrho0 = 0.5\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert!(c.validate_for(Command::Geometry).is_err());
        assert!(c.validate_for(Command::Rigidity).is_err());
        let with_iso = format!("{text}[isometry]\nkind = identity\n");
        ExperimentConfig::parse(&with_iso).unwrap().validate_for(Command::Rigidity).unwrap();
    }

    #[test]
    fn tolerance_override() {
        let mut t = CliTolerances::default();
        t.set("newton", 1e-4).unwrap();
        assert_eq!(t.get("newton"), 1e-4);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("newton", -1.0).is_err());
    }

    #[test]
    fn resolution_syntax() {
        assert_eq!(parse_resolution("64x128"), Some((64, 128)));
        assert_eq!(parse_resolution("64"), None);
    }
}
