//! Domain types for giant-atom arrays and the waveguide-mediated
//! characteristic quantities (Lamb shift, effective decay, exchange
//! coupling and collective decay).
//!
//! Units: rates and detunings are expressed in whatever unit the bare decays
//! use (normally a common bare decay `γ = 1`). Coupling-point positions are
//! stored as the propagation phase `θ = ω_a x / v_g` at the reference
//! frequency, kept unwrapped.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold below which an effective decay is labelled decoupled.
/// Only used where a discrete label is needed, never inside numerics.
pub const DECOUPLING_THRESHOLD: f64 = 1e-12;

/// Propagation phase `ω x / v_g` accumulated from the origin to `position`.
pub fn phase_delay(position: f64, frequency: f64, group_velocity: f64) -> f64 {
    debug_assert!(group_velocity > 0.0);
    frequency * position / group_velocity
}

/// One connection point of a giant atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPoint {
    /// Phase `θ = ω_a x / v_g` at the reference frequency (unwrapped).
    pub phase: f64,
    /// Bare decay rate `γ_im = 2 V_im² / v_g` through this point.
    pub bare_decay: f64,
}

impl CouplingPoint {
    pub fn new(phase: f64, bare_decay: f64) -> Self {
        Self { phase, bare_decay }
    }

    /// Physical position for a given group velocity and reference frequency.
    pub fn position(&self, group_velocity: f64, reference_frequency: f64) -> f64 {
        self.phase * group_velocity / reference_frequency
    }
}

/// A two-level emitter coupled to the waveguide at one or more points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiantAtom {
    /// Transition frequency measured from the array's reference frequency,
    /// `ω_i - ω_a`.
    pub detuning: f64,
    pub points: Vec<CouplingPoint>,
}

impl GiantAtom {
    pub fn new(detuning: f64, points: Vec<CouplingPoint>) -> Self {
        Self { detuning, points }
    }

    /// Resonant atom (`ω_i = ω_a`) with equal bare decays at the given phases.
    pub fn uniform(phases: &[f64], bare_decay: f64) -> Self {
        Self::new(
            0.0,
            phases
                .iter()
                .map(|&p| CouplingPoint::new(p, bare_decay))
                .collect(),
        )
    }

    /// Leftmost and rightmost phase.
    pub fn extent(&self) -> (f64, f64) {
        let first = self.points.first().map_or(0.0, |p| p.phase);
        let last = self.points.last().map_or(0.0, |p| p.phase);
        (first, last)
    }

    fn validate(&self, index: usize) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidArray(format!(
                "atom {index} has no coupling points"
            )));
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidArray(format!(
                "atom {index} has a non-finite frequency"
            )));
        }
        for (m, p) in self.points.iter().enumerate() {
            if !p.phase.is_finite() || !p.bare_decay.is_finite() {
                return Err(Error::InvalidArray(format!(
                    "atom {index}, point {m}: non-finite phase or decay"
                )));
            }
            if p.bare_decay < 0.0 {
                return Err(Error::InvalidArray(format!(
                    "atom {index}, point {m}: negative bare decay {}",
                    p.bare_decay
                )));
            }
        }
        if self.points.windows(2).any(|w| w[1].phase < w[0].phase) {
            return Err(Error::InvalidArray(format!(
                "atom {index}: coupling points must be ordered by position"
            )));
        }
        Ok(())
    }
}

/// Whether propagation phases are frozen at `ω_a` or follow the probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[default]
    Markovian,
    NonMarkovian,
}

/// A complete waveguide system: atoms plus propagation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomArray {
    atoms: Vec<GiantAtom>,
    group_velocity: f64,
    reference_frequency: f64,
    regime: Regime,
}

impl AtomArray {
    pub fn new(
        atoms: Vec<GiantAtom>,
        group_velocity: f64,
        reference_frequency: f64,
        regime: Regime,
    ) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArray("array has no atoms".into()));
        }
        if !(group_velocity > 0.0 && group_velocity.is_finite()) {
            return Err(Error::InvalidArray(format!(
                "group velocity must be positive, got {group_velocity}"
            )));
        }
        if !(reference_frequency > 0.0 && reference_frequency.is_finite()) {
            return Err(Error::InvalidArray(format!(
                "reference frequency must be positive, got {reference_frequency}"
            )));
        }
        for (i, atom) in atoms.iter().enumerate() {
            atom.validate(i)?;
        }
        Ok(Self {
            atoms,
            group_velocity,
            reference_frequency,
            regime,
        })
    }

    /// Markovian array with `v_g = 1`.
    pub fn markovian(atoms: Vec<GiantAtom>, reference_frequency: f64) -> Result<Self> {
        Self::new(atoms, 1.0, reference_frequency, Regime::Markovian)
    }

    pub fn atoms(&self) -> &[GiantAtom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> Result<&GiantAtom> {
        self.atoms.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.atoms.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn group_velocity(&self) -> f64 {
        self.group_velocity
    }

    pub fn reference_frequency(&self) -> f64 {
        self.reference_frequency
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }

    pub fn with_reference_frequency(mut self, reference_frequency: f64) -> Result<Self> {
        if !(reference_frequency > 0.0 && reference_frequency.is_finite()) {
            return Err(Error::InvalidArray(format!(
                "reference frequency must be positive, got {reference_frequency}"
            )));
        }
        self.reference_frequency = reference_frequency;
        Ok(self)
    }

    /// Factor converting stored phases into phases at probe detuning `delta`.
    pub fn phase_scale(&self, delta: f64) -> f64 {
        match self.regime {
            Regime::Markovian => 1.0,
            Regime::NonMarkovian => (self.reference_frequency + delta) / self.reference_frequency,
        }
    }

    /// Typical bare decay, used to turn relative tolerances into absolute ones.
    pub fn rate_unit(&self) -> f64 {
        let (sum, count) = self
            .atoms
            .iter()
            .flat_map(|a| a.points.iter())
            .filter(|p| p.bare_decay > 0.0)
            .fold((0.0, 0usize), |(s, c), p| (s + p.bare_decay, c + 1));
        if count == 0 {
            1.0
        } else {
            sum / count as f64
        }
    }

    pub fn total_points(&self) -> usize {
        self.atoms.iter().map(|a| a.points.len()).sum()
    }
}

/// Single-atom and pairwise waveguide-mediated quantities of a whole array,
/// with phases evaluated at the reference frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Characteristics {
    pub lamb_shift: Vec<f64>,
    pub effective_decay: Vec<f64>,
    /// Exchange couplings `g_ij`; the diagonal is zero.
    pub exchange: DMatrix<f64>,
    /// Collective decays `Γ_coll,ij`; the diagonal is zero.
    pub collective_decay: DMatrix<f64>,
}

/// `(Δ_L, Γ_eff)` of one atom with phases multiplied by `scale`.
pub(crate) fn self_terms(points: &[CouplingPoint], scale: f64) -> (f64, f64) {
    let mut lamb = 0.0;
    for (m, p) in points.iter().enumerate() {
        for q in &points[m + 1..] {
            // the (m, m') and (m', m) terms are equal, hence no factor 1/2
            lamb += (p.bare_decay * q.bare_decay).sqrt() * (scale * (q.phase - p.phase)).abs().sin();
        }
    }
    let amplitude: Complex64 = points
        .iter()
        .map(|p| Complex64::from_polar(p.bare_decay.sqrt(), scale * p.phase))
        .sum();
    (lamb, amplitude.norm_sqr())
}

/// `(g_ij, Γ_coll,ij)` between two atoms with phases multiplied by `scale`.
pub(crate) fn pair_terms(a: &[CouplingPoint], b: &[CouplingPoint], scale: f64) -> (f64, f64) {
    let mut exchange = 0.0;
    let mut collective = 0.0;
    for p in a {
        for q in b {
            let weight = (p.bare_decay * q.bare_decay).sqrt();
            let diff = scale * (p.phase - q.phase);
            exchange += weight * diff.abs().sin();
            collective += weight * diff.cos();
        }
    }
    (0.5 * exchange, collective)
}

/// Lamb shift `Δ_L,i` and effective decay `Γ_eff,i` of atom `i`.
pub fn single_atom_characteristics(array: &AtomArray, i: usize) -> Result<(f64, f64)> {
    Ok(self_terms(&array.atom(i)?.points, 1.0))
}

/// Exchange coupling `g_ij` and collective decay `Γ_coll,ij` between atoms
/// `i != j`.
pub fn pair_characteristics(array: &AtomArray, i: usize, j: usize) -> Result<(f64, f64)> {
    if i == j {
        return Err(Error::SameAtom(i));
    }
    let a = array.atom(i)?;
    let b = array.atom(j)?;
    Ok(pair_terms(&a.points, &b.points, 1.0))
}

pub fn characteristics(array: &AtomArray) -> Characteristics {
    let n = array.len();
    let mut lamb_shift = Vec::with_capacity(n);
    let mut effective_decay = Vec::with_capacity(n);
    let mut exchange = DMatrix::zeros(n, n);
    let mut collective_decay = DMatrix::zeros(n, n);
    for (i, a) in array.atoms().iter().enumerate() {
        let (l, g) = self_terms(&a.points, 1.0);
        lamb_shift.push(l);
        effective_decay.push(g);
        for (j, b) in array.atoms().iter().enumerate().skip(i + 1) {
            let (g_ij, c_ij) = pair_terms(&a.points, &b.points, 1.0);
            exchange[(i, j)] = g_ij;
            exchange[(j, i)] = g_ij;
            collective_decay[(i, j)] = c_ij;
            collective_decay[(j, i)] = c_ij;
        }
    }
    Characteristics {
        lamb_shift,
        effective_decay,
        exchange,
        collective_decay,
    }
}

/// Coupling-point topology of an array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Configuration {
    Separate,
    Braided,
    Nested,
    Mixed,
}

/// Classify the array by how the atoms' extents `[first, last]` overlap.
///
/// Coincident endpoints (shared positions) make the topology ambiguous and
/// are reported as `Mixed`.
pub fn classify_configuration(array: &AtomArray) -> Configuration {
    let extents: Vec<(f64, f64)> = array.atoms().iter().map(GiantAtom::extent).collect();
    let mut partial = false;
    let mut nested = false;
    let mut ambiguous = false;
    for (i, &(a0, a1)) in extents.iter().enumerate() {
        for &(b0, b1) in &extents[i + 1..] {
            if a1 < b0 || b1 < a0 {
                continue;
            }
            if a0 == b0 || a1 == b1 || a1 == b0 || b1 == a0 {
                ambiguous = true;
            } else if (a0 < b0 && b1 < a1) || (b0 < a0 && a1 < b1) {
                nested = true;
            } else {
                partial = true;
            }
        }
    }
    match (ambiguous, partial, nested) {
        (true, _, _) => Configuration::Mixed,
        (false, false, false) => Configuration::Separate,
        (false, true, false) => Configuration::Braided,
        (false, false, true) => Configuration::Nested,
        (false, true, true) => Configuration::Mixed,
    }
}
