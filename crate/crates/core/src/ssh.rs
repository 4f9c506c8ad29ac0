//! SSH chain of braided two-point giant atoms.
//!
//! Every atom has its two points a phase `π` apart, so it is decoupled from
//! the waveguide and has no Lamb shift, while neighbours interact through the
//! braided overlap: `J = γ sin φ`, alternating between `φ1` and `φ2`. Moving
//! the leftmost point by `ε` opens a weak probe channel on atom 1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{AtomArray, CouplingPoint, GiantAtom};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SshSpec {
    pub n_atoms: usize,
    pub phi1: f64,
    pub phi2: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl SshSpec {
    pub fn new(n_atoms: usize, phi1: f64, phi2: f64, epsilon: f64, gamma: f64) -> Result<Self> {
        let spec = Self {
            n_atoms,
            phi1,
            phi2,
            epsilon,
            gamma,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn beta(&self) -> f64 {
        self.phi2 - self.phi1
    }

    pub fn couplings(&self) -> (f64, f64) {
        (self.gamma * self.phi1.sin(), self.gamma * self.phi2.sin())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArray(msg));
        if self.n_atoms < 2 || !self.n_atoms.is_multiple_of(2) {
            return bad(format!("SSH chain needs an even number of atoms, got {}", self.n_atoms));
        }
        for (name, phi) in [("phi1", self.phi1), ("phi2", self.phi2)] {
            if !(phi > 0.0 && phi < PI) {
                return bad(format!("{name} must lie in (0, π), got {phi}"));
            }
        }
        // keeps atoms i and i+2 apart, so only nearest neighbours interact
        if self.phi1 + self.phi2 >= PI {
            return bad("phi1 + phi2 must be below π".into());
        }
        if !(self.epsilon >= 0.0 && self.epsilon < PI - self.phi1) {
            return bad(format!("epsilon must lie in [0, π - phi1), got {}", self.epsilon));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("bare decay must be positive, got {}", self.gamma));
        }
        Ok(())
    }
}

/// The probed chain. Atom 1 spans `[ε, π]` and is detuned by `-γ sin ε` to
/// cancel its Lamb shift; all other atoms sit at `ω_a`.
pub fn build_ssh_probe_array(spec: &SshSpec, reference_frequency: f64) -> Result<AtomArray> {
    spec.validate()?;
    let mut first = 0.0;
    let atoms = (0..spec.n_atoms)
        .map(|i| {
            let a = first;
            first += PI - if i % 2 == 0 { spec.phi1 } else { spec.phi2 };
            if i == 0 {
                GiantAtom::new(
                    -spec.gamma * spec.epsilon.sin(),
                    vec![
                        CouplingPoint::new(a + spec.epsilon, spec.gamma),
                        CouplingPoint::new(a + PI, spec.gamma),
                    ],
                )
            } else {
                GiantAtom::uniform(&[a, a + PI], spec.gamma)
            }
        })
        .collect();
    AtomArray::markovian(atoms, reference_frequency)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SshBands {
    /// Upper and lower branch, relative to `ω_a`.
    pub upper: f64,
    pub lower: f64,
    /// Total spectrum width `2(J1+J2)`.
    pub width: f64,
    /// Band gap `2|J1-J2|`.
    pub gap: f64,
}

pub fn ssh_bands(j1: f64, j2: f64, k: f64) -> SshBands {
    let e = (j1 * j1 + j2 * j2 + 2.0 * j1 * j2 * k.cos()).max(0.0).sqrt();
    SshBands {
        upper: e,
        lower: -e,
        width: 2.0 * (j1 + j2),
        gap: 2.0 * (j1 - j2).abs(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeModel {
    pub j1: f64,
    pub j2: f64,
    /// `J1/J2`.
    pub mu: f64,
    /// Effective edge–edge coupling `𝒥`.
    pub coupling: f64,
    /// Left edge-state decay `Γ_L`.
    pub gamma_l: f64,
    pub psi_l: Vec<f64>,
    pub psi_r: Vec<f64>,
    /// `false` when the edge splitting is comparable to the bulk gap and the
    /// edge-state picture is unreliable.
    pub deep_in_gap: bool,
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

pub fn edge_state_model(spec: &SshSpec) -> Result<EdgeModel> {
    spec.validate()?;
    let (j1, j2) = spec.couplings();
    let mu = j1 / j2;
    if mu >= 1.0 {
        return Err(Error::NonTopological { mu });
    }
    let n = spec.n_atoms;
    // 0-based site k is site k+1 in the usual 1-based labelling
    let psi_l = normalized(
        (0..n)
            .map(|k| if k % 2 == 0 { (-mu).powi(k as i32 / 2) } else { 0.0 })
            .collect(),
    );
    let psi_r = normalized(
        (0..n)
            .map(|k| if k % 2 == 1 { (-mu).powi(((n - 1 - k) / 2) as i32) } else { 0.0 })
            .collect(),
    );
    let coupling = j2 * (mu * mu - 1.0) * (-mu).powi((n / 2) as i32);
    let gamma_eff1 = 2.0 * spec.gamma * (1.0 - spec.epsilon.cos());
    let gamma_l = (1.0 - mu * mu) * gamma_eff1;
    let bands = ssh_bands(j1, j2, PI);
    Ok(EdgeModel {
        j1,
        j2,
        mu,
        coupling,
        gamma_l,
        psi_l,
        psi_r,
        deep_in_gap: bands.gap >= 4.0 * coupling.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapRegime {
    /// Autler–Townes splitting, `4|𝒥|/Γ_L > 1`.
    Ats,
    /// Electromagnetically induced transparency.
    Eit,
}

pub fn gap_regime(coupling: f64, gamma_l: f64) -> GapRegime {
    if 4.0 * coupling.abs() / gamma_l > 1.0 {
        GapRegime::Ats
    } else {
        GapRegime::Eit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapMode {
    /// Complex pole `Z` relative to `ω_a`.
    pub pole: Complex64,
    pub weight_t: Complex64,
    pub weight_r: Complex64,
}

/// The two dressed edge modes. Labelled by the square-root branch, not by
/// edge-state identity.
pub fn gap_modes(coupling: f64, gamma_l: f64, epsilon: f64) -> Result<[GapMode; 2]> {
    if !(gamma_l > 0.0) {
        return Err(Error::Domain(format!("Γ_L must be positive, got {gamma_l}")));
    }
    let root = Complex64::new(16.0 * coupling * coupling - gamma_l * gamma_l, 0.0).sqrt();
    if root.norm() <= 1e-12 * gamma_l {
        return Err(Error::Domain("4|𝒥| = Γ_L is an exceptional point".into()));
    }
    let zp = 0.25 * (-I * gamma_l + root);
    let zm = 0.25 * (-I * gamma_l - root);
    let phase = -Complex64::from_polar(1.0, epsilon);
    let mode = |z: Complex64, other: Complex64| {
        let eta = (zp + zm) * z / (z - other);
        GapMode {
            pole: z,
            weight_t: eta,
            weight_r: phase * eta,
        }
    };
    Ok([mode(zp, zm), mode(zm, zp)])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSpectrum {
    pub t: Complex64,
    pub r: Complex64,
    pub regime: GapRegime,
}

/// Three-level approximation of `t` and `r` near `Δ = 0`.
pub fn gap_spectrum_approx(coupling: f64, gamma_l: f64, epsilon: f64, delta: f64) -> Result<GapSpectrum> {
    if !(gamma_l > 0.0) {
        return Err(Error::Domain(format!("Γ_L must be positive, got {gamma_l}")));
    }
    let d = Complex64::new(delta, 0.0);
    let den = d * (d + 0.5 * I * gamma_l) - coupling * coupling;
    Ok(GapSpectrum {
        t: (d * d - coupling * coupling) / den,
        r: I * (0.5 * gamma_l) * d * Complex64::from_polar(1.0, epsilon) / den,
        regime: gap_regime(coupling, gamma_l),
    })
}
