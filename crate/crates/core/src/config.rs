//! Scenario files.
//!
//! ```toml
//! solver = "general"
//! format = "csv"
//! outputs = ["spectrum", "features"]
//!
//! [layout]
//! kind = "separate"
//! atoms = 3
//! points = 2
//! theta = "0.35pi"
//!
//! [sweep]
//! min = -10.0
//! max = 10.0
//! count = 2001
//! ```
//!
//! Detunings are in units of the layout's bare decay `γ`. Phases are either
//! plain radians or strings such as `"pi/4"`, `"0.35pi"`, `"3pi/2"`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::layout::{build_braided_array, build_nested_array, build_separate_array};
use crate::model::{classify_configuration, AtomArray, Configuration, CouplingPoint, GiantAtom, Regime};
use crate::ssh::{build_ssh_probe_array, SshSpec};
use crate::sweep::{Grid, Solver};

/// A phase in radians, optionally written as a multiple of π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Phase {
    Radians(f64),
    Expr(String),
}

impl Phase {
    pub fn pi_multiple(x: f64) -> Self {
        Phase::Expr(format!("{x}pi"))
    }

    pub fn radians(&self) -> Result<f64> {
        match self {
            Phase::Radians(x) => Ok(*x),
            Phase::Expr(s) => parse_phase(s),
        }
    }
}

impl From<f64> for Phase {
    fn from(x: f64) -> Self {
        Phase::Radians(x)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Radians(x) => write!(f, "{x}"),
            Phase::Expr(s) => f.write_str(s),
        }
    }
}

/// Parse `"1.2"`, `"pi"`, `"0.35pi"`, `"3*pi/2"`, `"-pi/4"`, `"2π"`.
pub fn parse_phase(text: &str) -> Result<f64> {
    let bad = || Error::InvalidConfig(format!("cannot parse phase `{text}`"));
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace('π', "pi");
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().map_err(|_| bad())?),
        None => (s.clone(), 1.0),
    };
    let value = if let Some(coeff) = num.strip_suffix("pi") {
        let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
        let c = match coeff {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        c * PI
    } else {
        num.parse::<f64>().map_err(|_| bad())?
    };
    let out = value / den;
    if out.is_finite() {
        Ok(out)
    } else {
        Err(bad())
    }
}

fn default_gamma() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitAtom {
    /// `ω_i - ω_a` in units of `γ`.
    #[serde(default)]
    pub detuning: f64,
    /// `(phase at ω_a, bare decay)` pairs.
    pub points: Vec<(Phase, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayoutConfig {
    Separate {
        atoms: usize,
        points: usize,
        theta: Phase,
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    Braided {
        atoms: usize,
        theta: Phase,
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    Nested {
        atoms: usize,
        theta: Phase,
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    Ssh {
        atoms: usize,
        phi1: Phase,
        phi2: Phase,
        epsilon: Phase,
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    Explicit {
        atoms: Vec<ExplicitAtom>,
    },
}

impl LayoutConfig {
    /// The rate that detunings are measured in.
    pub fn gamma(&self) -> f64 {
        match self {
            LayoutConfig::Separate { gamma, .. }
            | LayoutConfig::Braided { gamma, .. }
            | LayoutConfig::Nested { gamma, .. }
            | LayoutConfig::Ssh { gamma, .. } => *gamma,
            LayoutConfig::Explicit { atoms } => {
                let decays: Vec<f64> = atoms
                    .iter()
                    .flat_map(|a| a.points.iter().map(|p| p.1))
                    .filter(|&g| g > 0.0)
                    .collect();
                if decays.is_empty() {
                    1.0
                } else {
                    decays.iter().sum::<f64>() / decays.len() as f64
                }
            }
        }
    }

    /// Whether the layout is parameterized by a single spacing `θ`.
    pub fn has_theta(&self) -> bool {
        matches!(
            self,
            LayoutConfig::Separate { .. } | LayoutConfig::Braided { .. } | LayoutConfig::Nested { .. }
        )
    }

    pub fn theta(&self) -> Option<Result<f64>> {
        match self {
            LayoutConfig::Separate { theta, .. }
            | LayoutConfig::Braided { theta, .. }
            | LayoutConfig::Nested { theta, .. } => Some(theta.radians()),
            _ => None,
        }
    }

    /// Copy with the spacing replaced (no-op for layouts without one).
    pub fn with_theta(&self, value: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            LayoutConfig::Separate { theta, .. }
            | LayoutConfig::Braided { theta, .. }
            | LayoutConfig::Nested { theta, .. } => *theta = Phase::Radians(value),
            _ => {}
        }
        out
    }

    pub fn ssh_spec(&self) -> Option<Result<SshSpec>> {
        match self {
            LayoutConfig::Ssh {
                atoms,
                phi1,
                phi2,
                epsilon,
                gamma,
            } => Some((|| SshSpec::new(*atoms, phi1.radians()?, phi2.radians()?, epsilon.radians()?, *gamma))()),
            _ => None,
        }
    }

    /// Build the array with reference frequency `ω_a` (absolute units).
    pub fn build(&self, reference_frequency: f64) -> Result<AtomArray> {
        match self {
            LayoutConfig::Separate {
                atoms,
                points,
                theta,
                gamma,
            } => build_separate_array(*atoms, *points, theta.radians()?, *gamma, reference_frequency),
            LayoutConfig::Braided { atoms, theta, gamma } => {
                build_braided_array(*atoms, theta.radians()?, *gamma, reference_frequency)
            }
            LayoutConfig::Nested { atoms, theta, gamma } => {
                build_nested_array(*atoms, theta.radians()?, *gamma, reference_frequency)
            }
            LayoutConfig::Ssh { .. } => {
                build_ssh_probe_array(&self.ssh_spec().expect("ssh layout")?, reference_frequency)
            }
            LayoutConfig::Explicit { atoms } => {
                let unit = self.gamma();
                let atoms = atoms
                    .iter()
                    .map(|a| {
                        let points = a
                            .points
                            .iter()
                            .map(|(p, g)| Ok(CouplingPoint::new(p.radians()?, *g)))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(GiantAtom::new(a.detuning * unit, points))
                    })
                    .collect::<Result<Vec<_>>>()?;
                AtomArray::markovian(atoms, reference_frequency)
            }
        }
    }
}

/// Spacings to repeat the sweep at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseScan {
    Range { min: Phase, max: Phase, count: usize },
    List { values: Vec<Phase> },
}

impl PhaseScan {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            PhaseScan::Range { min, max, count } => {
                let g = Grid::new(min.radians()?, max.radians()?, *count)?;
                Ok(g.points())
            }
            PhaseScan::List { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidConfig("phase list is empty".into()));
                }
                values.iter().map(Phase::radians).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Spectrum,
    Modes,
    Features,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn default_outputs() -> Vec<Output> {
    vec![Output::Spectrum]
}

fn default_reference_frequency() -> f64 {
    1000.0
}

fn is_default<T: Default + PartialEq>(value: &T) -> bool {
    *value == T::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub solver: Solver,
    #[serde(default, skip_serializing_if = "is_default")]
    pub format: Format,
    #[serde(default, skip_serializing_if = "is_default")]
    pub regime: Regime,
    /// `ω_a` in units of `γ`; only matters in the non-Markovian regime.
    #[serde(default = "default_reference_frequency")]
    pub reference_frequency: f64,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
    pub layout: LayoutConfig,
    /// Detuning grid in units of `γ`.
    pub sweep: Grid,
    /// Repeat the sweep for each of these spacings (overrides `layout.theta`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<PhaseScan>,
}

impl ScenarioConfig {
    pub fn new(layout: LayoutConfig, sweep: Grid) -> Self {
        Self {
            name: None,
            description: None,
            solver: Solver::General,
            format: Format::Csv,
            regime: Regime::Markovian,
            reference_frequency: default_reference_frequency(),
            outputs: default_outputs(),
            layout,
            sweep,
            scan: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn wants(&self, output: Output) -> bool {
        self.outputs.contains(&output)
    }

    /// Spacings to evaluate: the scan, or the layout's own `θ` (if any).
    pub fn thetas(&self) -> Result<Vec<Option<f64>>> {
        match &self.scan {
            Some(scan) => Ok(scan.values()?.into_iter().map(Some).collect()),
            None => Ok(vec![None]),
        }
    }

    /// The array for one scan entry.
    pub fn build_array(&self, theta: Option<f64>) -> Result<AtomArray> {
        let layout = match theta {
            Some(t) => self.layout.with_theta(t),
            None => self.layout.clone(),
        };
        let gamma = self.layout.gamma();
        Ok(layout
            .build(self.reference_frequency * gamma)?
            .with_regime(self.regime))
    }

    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        if !(self.reference_frequency > 0.0 && self.reference_frequency.is_finite()) {
            return Err(Error::InvalidConfig("reference_frequency must be positive".into()));
        }
        if self.scan.is_some() && !self.layout.has_theta() {
            return Err(Error::InvalidConfig("a phase scan needs a separate, braided or nested layout".into()));
        }
        for theta in self.thetas()? {
            let array = self.build_array(theta)?;
            match self.solver {
                Solver::Cascade if classify_configuration(&array) != Configuration::Separate => {
                    return Err(Error::InvalidConfig(format!(
                        "cascade solver needs a separate layout, got {:?}",
                        classify_configuration(&array)
                    )))
                }
                Solver::ClosedForm => {
                    crate::transfer::PeriodicStructure::detect(&array).map_err(|e| {
                        Error::InvalidConfig(format!("closed-form solver needs a periodic separate layout: {e}"))
                    })?;
                }
                _ => {}
            }
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidConfig("no outputs requested".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_strings() {
        let cases = [
            ("pi", PI),
            ("0.35pi", 0.35 * PI),
            ("3pi/2", 1.5 * PI),
            ("3*pi/2", 1.5 * PI),
            ("-pi/4", -0.25 * PI),
            ("2π", 2.0 * PI),
            ("1.25", 1.25),
            (" pi / 3 ", PI / 3.0),
        ];
        for (s, v) in cases {
            assert!((parse_phase(s).unwrap() - v).abs() < 1e-15, "{s}");
        }
        assert!(parse_phase("tau").is_err());
        assert!(parse_phase("pi/0").is_err());
    }

    const EXAMPLE: &str = r#"
name = "demo"
solver = "all"
outputs = ["spectrum", "modes", "features"]

[layout]
kind = "separate"
atoms = 3
points = 2
theta = "0.35pi"

[sweep]
min = -10.0
max = 10.0
count = 201
"#;

    #[test]
    fn parse_example() {
        let c = ScenarioConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(c.solver, Solver::All);
        assert_eq!(c.outputs.len(), 3);
        assert_eq!(c.layout.gamma(), 1.0);
        assert!((c.layout.theta().unwrap().unwrap() - 0.35 * PI).abs() < 1e-15);
        assert_eq!(c.build_array(None).unwrap().len(), 3);
    }

    #[test]
    fn round_trip() {
        let mut c = ScenarioConfig::from_toml_str(EXAMPLE).unwrap();
        c.scan = Some(PhaseScan::List {
            values: vec![Phase::Radians(0.0), Phase::Expr("pi/2".into())],
        });
        c.regime = Regime::NonMarkovian;
        let text = c.to_toml_string().unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), c);

        let explicit = ScenarioConfig::new(
            LayoutConfig::Explicit {
                atoms: vec![
                    ExplicitAtom { detuning: 0.1, points: vec![(Phase::Radians(0.0), 1.0), (Phase::Expr("pi/2".into()), 0.5)] },
                    ExplicitAtom { detuning: 0.0, points: vec![(Phase::Radians(3.0), 1.0)] },
                ],
            },
            Grid::new(-2.0, 2.0, 11).unwrap(),
        );
        let text = explicit.to_toml_string().unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), explicit);

        let ssh = ScenarioConfig::new(
            LayoutConfig::Ssh {
                atoms: 16,
                phi1: Phase::Expr("0.2pi".into()),
                phi2: Phase::Expr("0.3pi".into()),
                epsilon: Phase::Expr("0.1pi".into()),
                gamma: 1.0,
            },
            Grid::new(-3.0, 3.0, 11).unwrap(),
        );
        let text = ssh.to_toml_string().unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), ssh);
    }

    #[test]
    fn invalid_pairings() {
        let bad = EXAMPLE.replace("\"all\"", "\"cascade\"").replace("separate\"\natoms = 3\npoints = 2", "braided\"\natoms = 3");
        assert!(matches!(ScenarioConfig::from_toml_str(&bad), Err(Error::InvalidConfig(_))));
        let bad = EXAMPLE.replace("count = 201", "count = 1");
        assert!(ScenarioConfig::from_toml_str(&bad).is_err());
        let bad = EXAMPLE.replace("min = -10.0", "min = 10.0");
        assert!(ScenarioConfig::from_toml_str(&bad).is_err());
    }
}
