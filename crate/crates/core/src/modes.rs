//! Collective-mode decomposition of the scattering amplitudes.
//!
//! With `H` evaluated at `ω_a`, each biorthonormal eigenpair contributes one
//! Lorentzian channel:
//!
//! ```text
//! t = 1 + Σ η_n / (Δ - δ̃_n + iΓ̃_n/2),   r = Σ η̃_n / (Δ - δ̃_n + iΓ̃_n/2)
//! η_n  = -i (V† U_n^R)(U_n^L† V)
//! η̃_n = -i (Vᵀ U_n^R)(U_n^L† V)
//! ```

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::build_system_matrices;
use crate::error::Result;
use crate::linalg::biorthogonal_eigensystem;
use crate::model::AtomArray;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigenvalues closer than this (in units of the array's rate unit) are
/// treated as one degenerate cluster.
pub const DEGENERACY_RADIUS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectiveMode {
    /// Absolute complex eigenvalue `λ_n` of `H`.
    pub eigenvalue: Complex64,
    /// `δ̃_n = Re λ_n - ω_a`.
    pub energy_detuning: f64,
    /// `Γ̃_n = -2 Im λ_n`.
    pub decay: f64,
    pub right_vec: Vec<Complex64>,
    pub left_vec: Vec<Complex64>,
    /// Transmission weight `η_n`.
    pub weight_t: Complex64,
    /// Reflection weight `η̃_n`.
    pub weight_r: Complex64,
}

impl CollectiveMode {
    /// Lorentzian denominator `Δ - δ̃_n + iΓ̃_n/2`.
    fn denominator(&self, delta: f64) -> Complex64 {
        Complex64::new(delta - self.energy_detuning, 0.5 * self.decay)
    }

    /// Reflection channel `L_n(Δ) = η̃_n / (Δ - δ̃_n + iΓ̃_n/2)`.
    pub fn reflection_channel(&self, delta: f64) -> Complex64 {
        self.weight_r / self.denominator(delta)
    }

    pub fn transmission_channel(&self, delta: f64) -> Complex64 {
        self.weight_t / self.denominator(delta)
    }
}

/// Collective modes of `H(ω_a)`, sorted by decay rate (most subradiant first).
pub fn collective_modes(array: &AtomArray) -> Result<Vec<CollectiveMode>> {
    let sys = build_system_matrices(&array.clone().with_regime(crate::model::Regime::Markovian), 0.0);
    let es = biorthogonal_eigensystem(&sys.hamiltonian, DEGENERACY_RADIUS * array.rate_unit())?;
    let v = &sys.drive;
    let omega_a = array.reference_frequency();

    let mut modes: Vec<CollectiveMode> = es
        .values
        .iter()
        .zip(es.right.iter().zip(es.left.iter()))
        .map(|(&lambda, (right, left))| {
            let projection = left.dotc(v);
            CollectiveMode {
                eigenvalue: lambda + omega_a,
                energy_detuning: lambda.re,
                decay: -2.0 * lambda.im,
                right_vec: right.iter().copied().collect(),
                left_vec: left.iter().copied().collect(),
                weight_t: -I * v.dotc(right) * projection,
                weight_r: -I * v.dot(right) * projection,
            }
        })
        .collect();
    modes.sort_by(|a, b| {
        a.decay
            .total_cmp(&b.decay)
            .then(a.energy_detuning.total_cmp(&b.energy_detuning))
    });
    Ok(modes)
}

/// Rebuild `(t, r)` at detuning `delta` from the Lorentzian channels.
pub fn reconstruct_from_modes(modes: &[CollectiveMode], delta: f64) -> (Complex64, Complex64) {
    modes.iter().fold(
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        |(t, r), m| (t + m.transmission_channel(delta), r + m.reflection_channel(delta)),
    )
}

/// `max |L_n† R_m - δ_nm|` over all mode pairs.
pub fn biorthonormality_residual(modes: &[CollectiveMode]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, ma) in modes.iter().enumerate() {
        let left = DVector::from_column_slice(&ma.left_vec);
        for (b, mb) in modes.iter().enumerate() {
            let right = DVector::from_column_slice(&mb.right_vec);
            let expected = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((left.dotc(&right) - expected).norm());
        }
    }
    worst
}

/// `Σ_n (L_n† x) R_n`, which equals `x` for a complete biorthonormal basis.
pub fn expand_in_modes(modes: &[CollectiveMode], x: &[Complex64]) -> Vec<Complex64> {
    let x = DVector::from_column_slice(x);
    let mut acc = DVector::zeros(x.len());
    for m in modes {
        let coeff = DVector::from_column_slice(&m.left_vec).dotc(&x);
        acc += DVector::from_column_slice(&m.right_vec) * coeff;
    }
    acc.iter().copied().collect()
}
