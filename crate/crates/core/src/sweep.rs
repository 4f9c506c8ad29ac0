//! Detuning sweeps over the solvers, in parallel when the `parallel` feature
//! is on. Rows are computed independently and collected in grid order, so
//! the output does not depend on the number of workers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::scatter;
use crate::error::{Error, Result};
use crate::linalg::eigenvalues;
use crate::model::{self_terms, AtomArray, Regime};
use crate::modes::{collective_modes, CollectiveMode};
use crate::transfer::{cascade_scatter, PeriodicStructure};

/// Grid points closer than this (in units of the rate unit) to a pole are
/// moved off it by the same amount.
pub const POLE_OFFSET: f64 = 1e-9;

/// Uniform detuning grid, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        let grid = Self { min, max, count };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidConfig(format!("grid needs at least 2 points, got {}", self.count)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::InvalidConfig(format!(
                "grid bounds must be finite with min < max, got {}..{}",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, unit: f64) -> Self {
        Self {
            min: self.min * unit,
            max: self.max * unit,
            count: self.count,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| if k + 1 == self.count { self.max } else { self.min + k as f64 * step })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// `f` over `points`, in order.
pub fn map_points<T, F>(points: &[f64], execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            points.par_iter().map(|&d| f(d)).collect()
        }
        _ => points.iter().map(|&d| f(d)).collect(),
    }
}

/// Cap the global worker pool. Only the first call has an effect.
#[cfg(feature = "parallel")]
pub fn init_thread_pool(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
pub fn init_thread_pool(_threads: usize) -> Result<()> {
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    #[default]
    General,
    Cascade,
    ClosedForm,
    /// All applicable solvers; rows hold the general solution and the table
    /// records the deviations of the others.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub delta: f64,
    pub t: Complex64,
    pub r: Complex64,
    pub transmittance: f64,
    pub reflectance: f64,
    /// `|L_n(Δ)|²` per collective mode, when requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mode_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDeviation {
    pub solver: Solver,
    pub max_t: f64,
    pub max_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    /// Unit the detunings are expressed in (`Δ/unit` is written out).
    pub unit: f64,
    pub solver: Solver,
    pub rows: Vec<SpectrumRow>,
    #[serde(default)]
    pub deviations: Vec<SolverDeviation>,
    #[serde(default)]
    pub notices: Vec<String>,
}

impl SpectrumTable {
    pub fn deltas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.delta).collect()
    }

    pub fn reflectance(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.reflectance).collect()
    }

    pub fn mode_count(&self) -> usize {
        self.rows.first().map_or(0, |r| r.mode_weights.len())
    }

    pub fn max_flux_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.transmittance + r.reflectance - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Detunings where some solver is singular: Lamb-shifted single-atom
/// resonances (transfer poles) and real eigenvalues of `H` (Markovian only).
pub fn pole_detunings(array: &AtomArray) -> Vec<f64> {
    let mut poles: Vec<f64> = array
        .atoms()
        .iter()
        .map(|a| a.detuning + self_terms(&a.points, 1.0).0)
        .collect();
    if array.regime() == Regime::Markovian {
        let h = crate::engine::build_system_matrices(array, 0.0).hamiltonian;
        let tol = 1e-12 * array.rate_unit();
        poles.extend(eigenvalues(&h).into_iter().filter(|z| z.im.abs() < tol).map(|z| z.re));
    }
    poles
}

/// Shift grid points sitting on a pole; returns the notices.
pub fn offset_poles(points: &mut [f64], poles: &[f64], unit: f64) -> Vec<String> {
    let offset = POLE_OFFSET * unit;
    let mut notices = Vec::new();
    for d in points.iter_mut() {
        if let Some(p) = poles.iter().find(|&&p| (*d - p).abs() < 0.5 * offset) {
            let moved = p + offset;
            notices.push(format!(
                "grid point {:.12} sits on a pole at {:.12}; evaluated at {:.12} instead",
                *d / unit,
                p / unit,
                moved / unit
            ));
            *d = moved;
        }
    }
    notices
}

fn solve_one(
    array: &AtomArray,
    solver: Solver,
    periodic: Option<&PeriodicStructure>,
    delta: f64,
) -> Result<(Complex64, Complex64)> {
    match solver {
        Solver::General | Solver::All => scatter(array, delta).map(|s| (s.t, s.r)),
        Solver::Cascade => cascade_scatter(array, delta).map(|c| (c.t, c.r)),
        Solver::ClosedForm => periodic
            .ok_or_else(|| Error::NotPeriodic("closed form requested".into()))?
            .amplitudes(delta),
    }
}

/// Sweep `array` over `grid` (absolute detunings).
pub fn sweep(
    array: &AtomArray,
    grid: &Grid,
    solver: Solver,
    with_modes: bool,
    execution: Execution,
) -> Result<SpectrumTable> {
    grid.validate()?;
    let unit = array.rate_unit();
    let periodic = match solver {
        Solver::ClosedForm => Some(PeriodicStructure::detect(array)?),
        Solver::Cascade => {
            crate::transfer::cascade_matrix(array, grid.min)
                .map(|_| ())
                .or_else(|e| if matches!(e, Error::Pole { .. }) { Ok(()) } else { Err(e) })?;
            None
        }
        Solver::All => PeriodicStructure::detect(array).ok(),
        Solver::General => None,
    };
    let separate = matches!(solver, Solver::All)
        && crate::model::classify_configuration(array) == crate::model::Configuration::Separate;

    let mut points = grid.points();
    let notices = offset_poles(&mut points, &pole_detunings(array), unit);
    let modes: Vec<CollectiveMode> = if with_modes { collective_modes(array)? } else { Vec::new() };

    type Row = Result<(SpectrumRow, [Option<(f64, f64)>; 2])>;
    let rows: Vec<Row> = map_points(&points, execution, |d| {
        let (t, r) = solve_one(array, solver, periodic.as_ref(), d)?;
        let mut extra = [None, None];
        if separate {
            let c = cascade_scatter(array, d)?;
            extra[0] = Some(((c.t - t).norm(), (c.r - r).norm()));
        }
        if let (Solver::All, Some(p)) = (solver, periodic.as_ref()) {
            let (tc, rc) = p.amplitudes(d)?;
            extra[1] = Some(((tc - t).norm(), (rc - r).norm()));
        }
        Ok((
            SpectrumRow {
                delta: d,
                t,
                r,
                transmittance: t.norm_sqr(),
                reflectance: r.norm_sqr(),
                mode_weights: modes.iter().map(|m| m.reflection_channel(d).norm_sqr()).collect(),
            },
            extra,
        ))
    });

    let mut out = Vec::with_capacity(rows.len());
    let mut deviations = [
        (Solver::Cascade, separate, 0.0f64, 0.0f64),
        (Solver::ClosedForm, solver == Solver::All && periodic.is_some(), 0.0, 0.0),
    ];
    for row in rows {
        let (row, extra) = row?;
        for (dev, e) in deviations.iter_mut().zip(extra) {
            if let Some((dt, dr)) = e {
                dev.2 = dev.2.max(dt);
                dev.3 = dev.3.max(dr);
            }
        }
        out.push(row);
    }
    Ok(SpectrumTable {
        unit,
        solver,
        rows: out,
        deviations: deviations
            .into_iter()
            .filter(|d| d.1)
            .map(|(solver, _, max_t, max_r)| SolverDeviation { solver, max_t, max_r })
            .collect(),
        notices,
    })
}
