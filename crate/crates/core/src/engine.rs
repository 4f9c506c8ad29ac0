//! Real-space scattering solution for an arbitrary giant-atom array.
//!
//! With drive vector `V_i = Σ_m √(γ_im/2) e^{iθ_im}` and effective
//! non-Hermitian Hamiltonian `H`, the atomic amplitudes solve
//! `(ω - H) f = V` and
//!
//! ```text
//! t = 1 - i V† f,    r = -i Vᵀ f.
//! ```
//!
//! Everything is computed in the frame rotating at `ω_a`: the stored
//! Hamiltonian is `H - ω_a`, and probes are given as detunings `Δ = ω - ω_a`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::AtomArray;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Drive vector and effective Hamiltonian at one probe detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub drive: DVector<Complex64>,
    /// `H - ω_a I` (complex symmetric, not Hermitian).
    pub hamiltonian: DMatrix<Complex64>,
    /// Probe detuning `Δ = ω - ω_a` the phases were evaluated at.
    pub detuning: f64,
}

impl SystemMatrices {
    pub fn probe_frequency(&self, reference_frequency: f64) -> f64 {
        reference_frequency + self.detuning
    }
}

pub fn build_system_matrices(array: &AtomArray, delta: f64) -> SystemMatrices {
    let scale = array.phase_scale(delta);
    let n = array.len();
    let atoms = array.atoms();

    let drive = DVector::from_iterator(
        n,
        atoms.iter().map(|a| {
            a.points
                .iter()
                .map(|p| Complex64::from_polar((0.5 * p.bare_decay).sqrt(), scale * p.phase))
                .sum::<Complex64>()
        }),
    );

    let mut hamiltonian = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut sum = Complex64::new(0.0, 0.0);
            for p in &atoms[i].points {
                for q in &atoms[j].points {
                    let weight = (p.bare_decay * q.bare_decay).sqrt();
                    sum += Complex64::from_polar(weight, (scale * (p.phase - q.phase)).abs());
                }
            }
            let mut h = -0.5 * I * sum;
            if i == j {
                h += atoms[i].detuning;
            }
            hamiltonian[(i, j)] = h;
            hamiltonian[(j, i)] = h;
        }
    }

    SystemMatrices {
        drive,
        hamiltonian,
        detuning: delta,
    }
}

/// Scattering amplitudes and atomic excitations at one probe detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringResult {
    pub detuning: f64,
    pub t: Complex64,
    pub r: Complex64,
    /// Atomic excitation amplitudes in units where `v_g = 1`.
    pub f: Vec<Complex64>,
    pub transmittance: f64,
    pub reflectance: f64,
}

impl ScatteringResult {
    pub fn from_amplitudes(detuning: f64, t: Complex64, r: Complex64, f: Vec<Complex64>) -> Self {
        Self {
            detuning,
            t,
            r,
            f,
            transmittance: t.norm_sqr(),
            reflectance: r.norm_sqr(),
        }
    }

    pub fn flux_defect(&self) -> f64 {
        self.transmittance + self.reflectance - 1.0
    }
}

/// Solve for `t`, `r` and `f` at detuning `delta`.
pub fn scatter(array: &AtomArray, delta: f64) -> Result<ScatteringResult> {
    let sys = build_system_matrices(array, delta);
    scatter_matrices(&sys)
}

pub fn scatter_matrices(sys: &SystemMatrices) -> Result<ScatteringResult> {
    let n = sys.drive.len();
    let resolvent = DMatrix::from_diagonal_element(n, n, Complex64::from(sys.detuning))
        - &sys.hamiltonian;
    let f = resolvent
        .lu()
        .solve(&sys.drive)
        .filter(|f| f.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
        .ok_or_else(|| singular_error(sys))?;

    let t = Complex64::new(1.0, 0.0) - I * sys.drive.dotc(&f);
    let r = -I * sys.drive.dot(&f);
    Ok(ScatteringResult::from_amplitudes(
        sys.detuning,
        t,
        r,
        f.iter().copied().collect(),
    ))
}

fn singular_error(sys: &SystemMatrices) -> Error {
    let probe = Complex64::from(sys.detuning);
    let eigenvalue = linalg::eigenvalues(&sys.hamiltonian)
        .into_iter()
        .min_by(|a, b| (a - probe).norm().total_cmp(&(b - probe).norm()))
        .unwrap_or(probe);
    Error::SingularSystem {
        detuning: sys.detuning,
        eigenvalue,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{build_braided_array, build_separate_array};
    use crate::model::{GiantAtom, Regime};
    use std::f64::consts::PI;

    #[test]
    fn single_small_atom_matrices() {
        let a = build_separate_array(1, 1, 0.0, 1.0, 50.0).unwrap();
        let s = build_system_matrices(&a, 0.3);
        assert!((s.drive[0] - Complex64::new(0.5f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((s.hamiltonian[(0, 0)] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert_eq!(s.probe_frequency(50.0), 50.3);
    }

    #[test]
    fn decoupled_two_point_atom_is_real() {
        let a = AtomArray::markovian(vec![GiantAtom::uniform(&[0.0, PI], 1.0)], 50.0).unwrap();
        let h = build_system_matrices(&a, 0.0).hamiltonian[(0, 0)];
        assert!(h.norm() < 1e-15);
    }

    #[test]
    fn small_atom_resonance_and_half_width() {
        let a = build_separate_array(1, 1, 0.0, 1.0, 50.0).unwrap();
        let s = scatter(&a, 0.0).unwrap();
        assert!(s.t.norm() < 1e-15);
        assert!((s.r + 1.0).norm() < 1e-15);
        let s = scatter(&a, 0.5).unwrap();
        assert!((s.reflectance - 0.5).abs() < 1e-15);
        assert!(s.flux_defect().abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_is_complex_symmetric() {
        let a = build_braided_array(4, 0.77, 1.0, 50.0).unwrap();
        let h = build_system_matrices(&a, 0.0).hamiltonian;
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn braided_decoupled_has_no_reflection() {
        let a = build_braided_array(3, PI / 3.0, 1.0, 50.0).unwrap();
        for k in 0..50 {
            let d = -5.0 + 0.2137 * k as f64;
            assert!(scatter(&a, d).unwrap().reflectance < 1e-12);
        }
    }

    #[test]
    fn exact_singularity_is_reported() {
        // a fully decoupled atom with zero Lamb shift has H = 0 exactly
        let a = AtomArray::markovian(
            vec![GiantAtom::new(0.25, vec![crate::model::CouplingPoint::new(0.0, 0.0)])],
            50.0,
        )
        .unwrap();
        match scatter(&a, 0.25) {
            Err(Error::SingularSystem { eigenvalue, .. }) => {
                assert!((eigenvalue - Complex64::new(0.25, 0.0)).norm() < 1e-12)
            }
            other => panic!("expected singular system, got {other:?}"),
        }
    }

    #[test]
    fn non_markovian_phases_follow_probe() {
        let a = build_separate_array(1, 2, PI / 2.0, 1.0, 10.0)
            .unwrap()
            .with_regime(Regime::NonMarkovian);
        let s = build_system_matrices(&a, 10.0);
        // ω = 2ω_a doubles the spacing to π: decoupled drive
        assert!(s.drive[0].norm() < 1e-15);
    }
}
