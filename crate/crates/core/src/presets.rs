//! Named figure presets, `fig2a` … `fig11h`.
//!
//! Spectrum panels are ordinary [`ScenarioConfig`]s; panels that plot
//! something other than a spectrum (mode trajectories, scaling fits, SSH
//! parameter maps) are [`Study`]s producing a single table.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::analysis::band_gap_width;
use crate::config::{LayoutConfig, Output, Phase, PhaseScan, ScenarioConfig};
use crate::engine::build_system_matrices;
use crate::error::{Error, Result};
use crate::layout::build_separate_array;
use crate::linalg::eigenvalues;
use crate::model::single_atom_characteristics;
use crate::output::DataTable;
use crate::ssh::{build_ssh_probe_array, SshSpec};
use crate::sweep::{map_points, Execution, Grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "study", rename_all = "snake_case")]
pub enum Study {
    /// Collective-mode energies and decays of an `N × M` array vs `θ`.
    ModesVsPhase { atoms: usize, points: usize, count: usize },
    /// Most subradiant decay vs `N`, with a power-law fit.
    SubradiantScaling { points: usize, theta: f64, atoms: Vec<usize> },
    /// Band-gap width at `θ = π/2M` vs `M`.
    GapVsPoints { atoms: usize, points: Vec<usize> },
    /// `J1 - J2` over the `(φ1, φ2)` square.
    SshPhaseMap { count: usize },
    /// Real spectrum of the unprobed SSH chain along `φ1 + φ2 = π/2`.
    SshLevels { atoms: usize, count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Preset {
    Scenario(Box<ScenarioConfig>),
    Study { description: String, study: Study },
}

impl Preset {
    pub fn description(&self) -> String {
        match self {
            Preset::Scenario(c) => c.description.clone().unwrap_or_default(),
            Preset::Study { description, .. } => description.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub table: DataTable,
    pub summary: BTreeMap<String, f64>,
}

pub const PRESET_IDS: &[&str] = &[
    "fig2a", "fig2b", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f", "fig4a", "fig4b", "fig4c",
    "fig4d", "fig4e", "fig4f", "fig5a", "fig5b", "fig5c", "fig5d", "fig7c", "fig7d", "fig8c", "fig8d",
    "fig8e", "fig8f", "fig10a", "fig10b", "fig10c", "fig10d", "fig10e", "fig10f", "fig10g", "fig10h",
    "fig10i", "fig10j", "fig11a", "fig11b", "fig11c", "fig11d", "fig11e", "fig11f", "fig11g", "fig11h",
];

fn pi(x: f64) -> Phase {
    Phase::pi_multiple(x)
}

fn scenario(
    id: &str,
    description: String,
    layout: LayoutConfig,
    sweep: (f64, f64, usize),
    outputs: &[Output],
    scan: Option<PhaseScan>,
) -> Result<Preset> {
    let mut c = ScenarioConfig::new(layout, Grid::new(sweep.0, sweep.1, sweep.2)?);
    c.name = Some(id.to_string());
    c.description = Some(description);
    c.outputs = outputs.to_vec();
    c.scan = scan;
    Ok(Preset::Scenario(Box::new(c)))
}

fn separate(atoms: usize, points: usize, theta: Phase) -> LayoutConfig {
    LayoutConfig::Separate { atoms, points, theta, gamma: 1.0 }
}

fn full_turn(count: usize) -> Option<PhaseScan> {
    Some(PhaseScan::Range { min: Phase::Radians(0.0), max: pi(2.0), count })
}

fn list(values: &[f64]) -> Option<PhaseScan> {
    Some(PhaseScan::List { values: values.iter().map(|&x| pi(x)).collect() })
}

fn ssh(phi1: Phase, phi2: Phase) -> LayoutConfig {
    LayoutConfig::Ssh { atoms: 16, phi1, phi2, epsilon: pi(0.1), gamma: 1.0 }
}

pub fn preset(id: &str) -> Result<Preset> {
    use Output::*;
    let spectrum = [Spectrum, Features];
    let decomposed = [Spectrum, Modes, Features];
    let study = |description: &str, study: Study| Ok(Preset::Study { description: description.into(), study });

    match id {
        "fig2a" | "fig2b" => {
            let m = if id == "fig2a" { 2 } else { 3 };
            scenario(
                id,
                format!("R(Δ, θ) map, separate atoms with maximum symmetry, N=3, M={m}"),
                separate(3, m, Phase::Radians(0.0)),
                (-10.0, 10.0, 401),
                &[Spectrum],
                full_turn(201),
            )
        }
        "fig3a" => scenario(
            id,
            "superradiant Lorentzians, N=3, M=2, θ ∈ {0, π/2, 3π/2}".into(),
            separate(3, 2, Phase::Radians(0.0)),
            (-40.0, 40.0, 1601),
            &spectrum,
            list(&[0.0, 0.5, 1.5]),
        ),
        "fig3b" => scenario(
            id,
            "superradiant Lorentzians, N=3, M=3, θ ∈ {0, π/3, π}".into(),
            separate(3, 3, Phase::Radians(0.0)),
            (-40.0, 40.0, 1601),
            &spectrum,
            list(&[0.0, 1.0 / 3.0, 1.0]),
        ),
        "fig3c" | "fig3e" => study(
            "collective-mode detunings and decays vs θ, N=3, M=2",
            Study::ModesVsPhase { atoms: 3, points: 2, count: 401 },
        ),
        "fig3d" | "fig3f" => study(
            "collective-mode detunings and decays vs θ, N=3, M=3",
            Study::ModesVsPhase { atoms: 3, points: 3, count: 401 },
        ),
        "fig4a" | "fig4b" | "fig4c" | "fig4d" | "fig4e" | "fig4f" => {
            let (theta, label) = match id {
                "fig4a" | "fig4d" => (0.35, "0.35π"),
                "fig4b" | "fig4e" => (1.0 / 6.0, "π/6"),
                _ => (0.25, "π/4"),
            };
            let modes = matches!(id, "fig4d" | "fig4e" | "fig4f");
            scenario(
                id,
                format!(
                    "reflection minima, N=3, M=2, θ={label}{}",
                    if modes { ", collective components" } else { "" }
                ),
                separate(3, 2, pi(theta)),
                (-10.0, 10.0, 2001),
                if modes { &decomposed } else { &spectrum },
                None,
            )
        }
        "fig5a" | "fig5b" => scenario(
            id,
            format!(
                "photonic band gap, N=10, M=2, θ=π/4{}",
                if id == "fig5b" { ", collective components" } else { "" }
            ),
            separate(10, 2, pi(0.25)),
            (-6.0, 8.0, 4001),
            if id == "fig5b" { &decomposed } else { &spectrum },
            None,
        ),
        "fig5c" => study(
            "most subradiant decay vs N, M=2, θ=π/4, power-law fit",
            Study::SubradiantScaling { points: 2, theta: PI / 4.0, atoms: (8..=24).collect() },
        ),
        "fig5d" => study(
            "band-gap width at θ=π/(2M) vs M, N=10",
            Study::GapVsPoints { atoms: 10, points: (2..=20).collect() },
        ),
        "fig7c" => study("J1 - J2 over (φ1, φ2)", Study::SshPhaseMap { count: 101 }),
        "fig7d" => study(
            "SSH levels vs β along φ1 + φ2 = π/2, N=16",
            Study::SshLevels { atoms: 16, count: 201 },
        ),
        "fig8c" | "fig8d" => scenario(
            id,
            format!(
                "SSH probe, N=16, φ1=0.2π, φ2=0.3π, ε=0.1π (Autler–Townes){}",
                if id == "fig8d" { ", gap detail" } else { "" }
            ),
            ssh(pi(0.2), pi(0.3)),
            if id == "fig8c" { (-3.0, 3.0, 6001) } else { (-0.1, 0.1, 2001) },
            if id == "fig8d" { &decomposed } else { &spectrum },
            None,
        ),
        "fig8e" | "fig8f" => scenario(
            id,
            format!(
                "SSH probe, N=16, φ1=π/6, φ2=π/3, ε=0.1π (EIT){}",
                if id == "fig8f" { ", gap detail" } else { "" }
            ),
            ssh(Phase::Expr("pi/6".into()), Phase::Expr("pi/3".into())),
            if id == "fig8e" { (-3.0, 3.0, 6001) } else { (-0.1, 0.1, 2001) },
            if id == "fig8f" { &decomposed } else { &spectrum },
            None,
        ),
        _ if id.starts_with("fig10") || id.starts_with("fig11") => {
            let braided = id.starts_with("fig10");
            let panel = id.chars().last().expect("non-empty");
            let cuts: &[f64] = if braided { &[0.0, 0.25, 0.35, 0.75] } else { &[0.0, 0.25, 0.5] };
            let k = cuts.len();
            let index = (panel as u8).checked_sub(b'a').map(usize::from);
            let (atoms, cut) = match index {
                Some(0) => (3, None),
                Some(1) => (4, None),
                Some(i) if i >= 2 && i < 2 + 2 * k => (if i < 2 + k { 3 } else { 4 }, Some(cuts[(i - 2) % k])),
                _ => return Err(Error::UnknownPreset(id.into())),
            };
            let name = if braided { "braided" } else { "nested" };
            let theta = cut.map(pi).unwrap_or(Phase::Radians(0.0));
            let layout = if braided {
                LayoutConfig::Braided { atoms, theta, gamma: 1.0 }
            } else {
                LayoutConfig::Nested { atoms, theta, gamma: 1.0 }
            };
            match cut {
                None => scenario(
                    id,
                    format!("R(Δ, θ) map, {name} atoms, N={atoms}, M=2"),
                    layout,
                    (-10.0, 10.0, 401),
                    &[Spectrum],
                    full_turn(201),
                ),
                Some(c) => scenario(
                    id,
                    format!("{name} atoms, N={atoms}, M=2, θ={c}π"),
                    layout,
                    (-20.0, 20.0, 2001),
                    &decomposed,
                    None,
                ),
            }
        }
        _ => Err(Error::UnknownPreset(id.into())),
    }
}

/// `(id, description)` for every preset.
pub fn catalog() -> Vec<(&'static str, String)> {
    PRESET_IDS
        .iter()
        .map(|&id| (id, preset(id).map(|p| p.description()).unwrap_or_default()))
        .collect()
}

fn sorted_by_decay(values: Vec<num_complex::Complex64>) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = values.into_iter().map(|z| (z.re, -2.0 * z.im)).collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    v
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn run_study(study: &Study, execution: Execution) -> Result<StudyReport> {
    let mut summary = BTreeMap::new();
    let table = match study {
        Study::ModesVsPhase { atoms, points, count } => {
            let mut columns = vec!["theta".to_string(), "lamb_shift".into(), "effective_decay".into()];
            columns.extend((1..=*atoms).map(|k| format!("delta_{k}")));
            columns.extend((1..=*atoms).map(|k| format!("decay_{k}")));
            let thetas = Grid::new(0.0, 2.0 * PI, *count)?.points();
            let rows = map_points(&thetas, execution, |theta| -> Result<Vec<f64>> {
                let a = build_separate_array(*atoms, *points, theta, 1.0, 1e3)?;
                let (lamb, decay) = single_atom_characteristics(&a, 0)?;
                let modes = sorted_by_decay(eigenvalues(&build_system_matrices(&a, 0.0).hamiltonian));
                let mut row = vec![theta, lamb, decay];
                row.extend(modes.iter().map(|m| m.0));
                row.extend(modes.iter().map(|m| m.1));
                Ok(row)
            });
            let mut t = DataTable::new(columns);
            for r in rows {
                t.push(r?);
            }
            t
        }
        Study::SubradiantScaling { points, theta, atoms } => {
            let mut t = DataTable::new(vec!["atoms".into(), "subradiant_decay".into()]);
            for &n in atoms {
                let a = build_separate_array(n, *points, *theta, 1.0, 1e3)?;
                let modes = sorted_by_decay(eigenvalues(&build_system_matrices(&a, 0.0).hamiltonian));
                t.push(vec![n as f64, modes[0].1]);
            }
            let x: Vec<f64> = t.rows.iter().map(|r| r[0].ln()).collect();
            let y: Vec<f64> = t.rows.iter().map(|r| r[1].ln()).collect();
            let (slope, intercept) = linear_fit(&x, &y);
            summary.insert("exponent".into(), slope);
            summary.insert("prefactor".into(), intercept.exp());
            t
        }
        Study::GapVsPoints { atoms, points } => {
            let mut t = DataTable::new(vec![
                "points".into(),
                "width_estimate".into(),
                "width_asymptotic".into(),
                "width_large_m".into(),
            ]);
            for &m in points {
                let g = band_gap_width(m, 0, 1.0, *atoms)?;
                t.push(vec![m as f64, g.estimate, g.asymptotic, g.large_m]);
            }
            t
        }
        Study::SshPhaseMap { count } => {
            let mut t = DataTable::new(vec!["phi1".into(), "phi2".into(), "j1_minus_j2".into(), "topological".into()]);
            let phis = Grid::new(0.0, PI, *count)?.points();
            for &p1 in &phis {
                for &p2 in &phis {
                    let d = p1.sin() - p2.sin();
                    t.push(vec![p1, p2, d, if d < 0.0 { 1.0 } else { 0.0 }]);
                }
            }
            t
        }
        Study::SshLevels { atoms, count } => {
            let mut columns = vec!["beta".to_string()];
            columns.extend((1..=*atoms).map(|k| format!("E_{k}")));
            let betas: Vec<f64> = (0..*count).map(|k| -PI / 2.0 + PI * (k as f64 + 0.5) / *count as f64).collect();
            let rows = map_points(&betas, execution, |beta| -> Result<Vec<f64>> {
                let spec = SshSpec::new(*atoms, PI / 4.0 - beta / 2.0, PI / 4.0 + beta / 2.0, 0.0, 1.0)?;
                let a = build_ssh_probe_array(&spec, 1e3)?;
                let mut levels: Vec<f64> =
                    eigenvalues(&build_system_matrices(&a, 0.0).hamiltonian).iter().map(|z| z.re).collect();
                levels.sort_by(f64::total_cmp);
                let mut row = vec![beta];
                row.extend(levels);
                Ok(row)
            });
            let mut t = DataTable::new(columns);
            for r in rows {
                t.push(r?);
            }
            t
        }
    };
    Ok(StudyReport { table, summary })
}
