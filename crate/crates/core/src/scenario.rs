//! Running a [`ScenarioConfig`]: sweeps, mode tables and feature reports.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{fit_lorentzian, max_symmetry_features, FeatureKind, LorentzianFit, SpectralFeature};
use crate::config::{LayoutConfig, Output, ScenarioConfig};
use crate::error::Result;
use crate::model::{characteristics, classify_configuration, Configuration};
use crate::modes::{collective_modes, CollectiveMode};
use crate::output::{modes_data, spectrum_data, DataTable};
use crate::ssh::{edge_state_model, gap_modes, gap_regime, gap_spectrum_approx, ssh_bands, EdgeModel, GapMode, GapRegime, SshBands};
use crate::sweep::{sweep, Execution, SpectrumTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SshReport {
    pub edge: EdgeModel,
    pub regime: GapRegime,
    /// `4|𝒥|/Γ_L`.
    pub ratio: f64,
    /// Band width and gap (`K = 0` branch values).
    pub bands: SshBands,
    pub dressed_modes: Option<[GapMode; 2]>,
}

/// Everything in units of the layout's `γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureReport {
    pub configuration: Configuration,
    pub lamb_shifts: Vec<f64>,
    pub effective_decays: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralFeature>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<LorentzianFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ssh: Option<SshReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_flux_defect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<CollectiveMode>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureReport>,
    /// Three-level approximation of `r` on the sweep grid (SSH layouts).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_approximation: Option<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Rate unit `γ` of the tables.
    pub unit: f64,
    pub panels: Vec<Panel>,
    pub notices: Vec<String>,
}

impl ScenarioReport {
    fn scanned(&self) -> bool {
        self.panels.iter().any(|p| p.theta.is_some())
    }

    /// All spectra stacked; a `theta` column is added for scans and mode
    /// columns are padded with NaN to a common width.
    pub fn spectrum_data(&self) -> Option<DataTable> {
        let width = self
            .panels
            .iter()
            .filter_map(|p| p.spectrum.as_ref().map(|s| s.mode_count()))
            .max()?;
        let mut out: Option<DataTable> = None;
        for p in &self.panels {
            let Some(s) = &p.spectrum else { continue };
            let mut s = s.clone();
            for row in &mut s.rows {
                row.mode_weights.resize(width, f64::NAN);
            }
            let mut table = spectrum_data(&s, if self.scanned() { p.theta } else { None });
            if let Some(approx) = &p.gap_approximation {
                table.columns.extend(["re_r_approx".into(), "im_r_approx".into(), "R_approx".into()]);
                for (row, r) in table.rows.iter_mut().zip(approx) {
                    row.extend([r.re, r.im, r.norm_sqr()]);
                }
            }
            match &mut out {
                None => out = Some(table),
                Some(acc) => acc.append(table),
            }
        }
        out
    }

    pub fn modes_data(&self) -> Option<DataTable> {
        let mut out: Option<DataTable> = None;
        for p in &self.panels {
            let Some(m) = &p.modes else { continue };
            let table = modes_data(m, self.unit, if self.scanned() { p.theta } else { None });
            match &mut out {
                None => out = Some(table),
                Some(acc) => acc.append(table),
            }
        }
        out
    }

    pub fn features(&self) -> Vec<(Option<f64>, &FeatureReport)> {
        self.panels
            .iter()
            .filter_map(|p| p.features.as_ref().map(|f| (p.theta, f)))
            .collect()
    }
}

fn layout_features(config: &ScenarioConfig, theta: Option<f64>) -> Result<Option<SpectralFeature>> {
    if let LayoutConfig::Separate { atoms, points, theta: t, .. } = &config.layout {
        let theta = match theta {
            Some(t) => t,
            None => t.radians()?,
        };
        // transient domain errors (e.g. a single atom with N-1 = 0 minima) are not features
        return Ok(max_symmetry_features(*atoms, *points, theta, 1.0).ok());
    }
    Ok(None)
}

fn ssh_report(config: &ScenarioConfig) -> Result<Option<SshReport>> {
    let Some(spec) = config.layout.ssh_spec() else { return Ok(None) };
    let spec = spec?;
    let unit = spec.gamma;
    let mut edge = edge_state_model(&spec)?;
    edge.j1 /= unit;
    edge.j2 /= unit;
    edge.coupling /= unit;
    edge.gamma_l /= unit;
    Ok(Some(SshReport {
        regime: gap_regime(edge.coupling, edge.gamma_l),
        ratio: 4.0 * edge.coupling.abs() / edge.gamma_l,
        bands: ssh_bands(edge.j1, edge.j2, 0.0),
        dressed_modes: gap_modes(edge.coupling, edge.gamma_l, spec.epsilon).ok(),
        edge,
    }))
}

pub fn run_scenario(config: &ScenarioConfig, execution: Execution) -> Result<ScenarioReport> {
    config.validate()?;
    let unit = config.layout.gamma();
    let grid = config.sweep.scaled(unit);
    let mut notices = Vec::new();
    let mut panels = Vec::new();
    let ssh = ssh_report(config)?;

    for theta in config.thetas()? {
        let array = config.build_array(theta)?;
        let label = theta.map(|t| format!("θ = {t:.6}: ")).unwrap_or_default();

        let modes = if config.wants(Output::Modes) {
            match collective_modes(&array) {
                Ok(m) => Some(m),
                Err(e) => {
                    notices.push(format!("{label}modes unavailable: {e}"));
                    None
                }
            }
        } else {
            None
        };

        let spectrum = if config.wants(Output::Spectrum) || config.wants(Output::Features) {
            let mut table = sweep(&array, &grid, config.solver, false, execution)?;
            if let Some(m) = &modes {
                for row in &mut table.rows {
                    row.mode_weights = m.iter().map(|x| x.reflection_channel(row.delta).norm_sqr()).collect();
                }
            }
            notices.extend(table.notices.iter().map(|n| format!("{label}{n}")));
            Some(table)
        } else {
            None
        };

        let gap_approximation = match (&ssh, &spectrum) {
            (Some(report), Some(table)) => {
                let spec = config.layout.ssh_spec().expect("ssh layout")?;
                Some(
                    table
                        .rows
                        .iter()
                        .map(|r| {
                            gap_spectrum_approx(report.edge.coupling, report.edge.gamma_l, spec.epsilon, r.delta / unit)
                                .map(|g| g.r)
                        })
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            _ => None,
        };

        let features = if config.wants(Output::Features) {
            let c = characteristics(&array);
            let spectral = layout_features(config, theta)?;
            let fit = match (&spectral, &spectrum) {
                (Some(f), Some(table)) if f.kind == FeatureKind::Superradiant => {
                    let x: Vec<f64> = table.rows.iter().map(|r| r.delta / unit).collect();
                    match fit_lorentzian(&x, &table.reflectance()) {
                        Ok(fit) => Some(fit),
                        Err(e) => {
                            notices.push(format!("{label}Lorentzian fit failed: {e}"));
                            None
                        }
                    }
                }
                _ => None,
            };
            Some(FeatureReport {
                configuration: classify_configuration(&array),
                lamb_shifts: c.lamb_shift.iter().map(|x| x / unit).collect(),
                effective_decays: c.effective_decay.iter().map(|x| x / unit).collect(),
                spectral,
                fit,
                ssh: ssh.clone(),
                max_flux_defect: spectrum.as_ref().map(SpectrumTable::max_flux_defect),
            })
        } else {
            None
        };

        panels.push(Panel {
            theta,
            spectrum: spectrum.filter(|_| config.wants(Output::Spectrum)),
            modes,
            features,
            gap_approximation: gap_approximation.filter(|_| config.wants(Output::Spectrum)),
        });
    }

    Ok(ScenarioReport {
        name: config.name.clone(),
        unit,
        panels,
        notices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Phase, PhaseScan};
    use crate::sweep::Grid;

    fn superradiant() -> ScenarioConfig {
        let mut c = ScenarioConfig::new(
            LayoutConfig::Separate {
                atoms: 3,
                points: 2,
                theta: Phase::Expr("pi/2".into()),
                gamma: 1.0,
            },
            Grid::new(-20.0, 20.0, 801).unwrap(),
        );
        c.outputs = vec![Output::Spectrum, Output::Modes, Output::Features];
        c
    }

    #[test]
    fn superradiant_features_and_fit() {
        let report = run_scenario(&superradiant(), Execution::Parallel).unwrap();
        let f = report.panels[0].features.as_ref().unwrap();
        let spectral = f.spectral.as_ref().unwrap();
        assert_eq!(spectral.kind, FeatureKind::Superradiant);
        let fit = f.fit.as_ref().unwrap();
        assert!((fit.center - 1.0).abs() < 1e-6 && (fit.fwhm - 6.0).abs() < 1e-6);
        let table = report.spectrum_data().unwrap();
        assert_eq!(table.columns.len(), 7 + 3);
        assert_eq!(table.rows.len(), 801);
        assert_eq!(report.modes_data().unwrap().rows.len(), 3);
        // the grid hits Δ_L = γ exactly
        assert_eq!(report.notices.len(), 1);
    }

    #[test]
    fn scans_stack_panels() {
        let mut c = superradiant();
        c.outputs = vec![Output::Spectrum];
        c.sweep = Grid::new(-5.0, 5.0, 11).unwrap();
        c.scan = Some(PhaseScan::Range {
            min: Phase::Radians(0.0),
            max: Phase::Expr("2pi".into()),
            count: 5,
        });
        let report = run_scenario(&c, Execution::Sequential).unwrap();
        let t = report.spectrum_data().unwrap();
        assert_eq!(t.columns[0], "theta");
        assert_eq!(t.rows.len(), 55);
    }

    #[test]
    fn ssh_scenario_has_approximation() {
        let mut c = ScenarioConfig::new(
            LayoutConfig::Ssh {
                atoms: 16,
                phi1: Phase::Expr("0.2pi".into()),
                phi2: Phase::Expr("0.3pi".into()),
                epsilon: Phase::Expr("0.1pi".into()),
                gamma: 1.0,
            },
            Grid::new(-0.06, 0.06, 41).unwrap(),
        );
        c.outputs = vec![Output::Spectrum, Output::Features];
        let report = run_scenario(&c, Execution::Parallel).unwrap();
        let ssh = report.panels[0].features.as_ref().unwrap().ssh.as_ref().unwrap();
        assert_eq!(ssh.regime, GapRegime::Ats);
        let t = report.spectrum_data().unwrap();
        assert!(t.columns.contains(&"R_approx".to_string()));
    }
}
