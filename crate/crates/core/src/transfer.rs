//! Transfer-matrix solvers for separate giant atoms.
//!
//! A separate atom acts like a small atom with frequency shift `Δ_L,i`, decay
//! `Γ_eff,i` and an effective position phase `α_i`. Amplitudes on both sides
//! of atom `i` are related by `T_α⁻¹ T_i T_α` with
//!
//! ```text
//! T_i = [[1 + iξ,  iξ ], [-iξ, 1 - iξ]],   ξ_i = Γ_eff,i / (2 (Δ_i - Δ_L,i))
//! T_α = diag(e^{iα}, e^{-iα}),             e^{2iα_i} = (Σ_m √γ_im e^{iθ_im})² / Γ_eff,i
//! ```
//!
//! and the whole chain satisfies `(1, r)ᵀ = P (t, 0)ᵀ`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    classify_configuration, self_terms, AtomArray, Configuration, CouplingPoint,
    DECOUPLING_THRESHOLD,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Bare single-atom transfer matrix `[[1+iξ, iξ], [-iξ, 1-iξ]]`.
pub fn block_matrix(xi: f64) -> Matrix2<Complex64> {
    Matrix2::new(c(1.0) + I * xi, I * xi, -I * xi, c(1.0) - I * xi)
}

fn phase_matrix(alpha: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::from_polar(1.0, alpha),
        c(0.0),
        c(0.0),
        Complex64::from_polar(1.0, -alpha),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomBlock {
    pub xi: f64,
    pub alpha: f64,
    pub matrix: Matrix2<Complex64>,
    /// `Γ_eff` vanished; `alpha` is then meaningless and `matrix` ≈ identity.
    pub decoupled: bool,
}

impl AtomBlock {
    /// `T_α⁻¹ T T_α`, the block in absolute coordinates.
    pub fn dressed(&self) -> Matrix2<Complex64> {
        phase_matrix(-self.alpha) * self.matrix * phase_matrix(self.alpha)
    }
}

/// `(ξ, α, Γ_eff)` pieces of one atom's block at detuning `delta`.
fn block_parts(
    points: &[CouplingPoint],
    atom_detuning: f64,
    scale: f64,
    delta: f64,
) -> (f64, f64, f64, f64) {
    let (lamb, gamma) = self_terms(points, scale);
    let amplitude: Complex64 = points
        .iter()
        .map(|p| Complex64::from_polar(p.bare_decay.sqrt(), scale * p.phase))
        .sum();
    let sq = amplitude * amplitude;
    let alpha = 0.5 * sq.im.atan2(sq.re);
    let detuning = delta - atom_detuning - lamb;
    (gamma / (2.0 * detuning), alpha, gamma, detuning)
}

/// Transfer block of atom `i` at probe detuning `delta`.
pub fn atom_block(array: &AtomArray, i: usize, delta: f64) -> Result<AtomBlock> {
    let atom = array.atom(i)?;
    let scale = array.phase_scale(delta);
    let (xi, alpha, gamma, detuning) = block_parts(&atom.points, atom.detuning, scale, delta);
    if detuning == 0.0 {
        return Err(Error::Pole { atom: i, detuning: delta });
    }
    Ok(AtomBlock {
        xi,
        alpha,
        matrix: block_matrix(xi),
        decoupled: gamma < DECOUPLING_THRESHOLD * array.rate_unit(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeResult {
    pub t: Complex64,
    pub r: Complex64,
    /// Effective phases `α_i` in spatial order.
    pub alphas: Vec<f64>,
}

/// Atom indices sorted by their leftmost coupling point.
fn spatial_order(array: &AtomArray) -> Vec<usize> {
    let mut order: Vec<usize> = (0..array.len()).collect();
    order.sort_by(|&a, &b| array.atoms()[a].extent().0.total_cmp(&array.atoms()[b].extent().0));
    order
}

/// Full cascade product `P = Π_i T_αi⁻¹ T_i T_αi` in spatial order.
pub fn cascade_matrix(array: &AtomArray, delta: f64) -> Result<(Matrix2<Complex64>, Vec<f64>)> {
    if classify_configuration(array) != Configuration::Separate {
        return Err(Error::NotSeparate);
    }
    let mut product = Matrix2::identity();
    let mut alphas = Vec::with_capacity(array.len());
    let mut previous = 0.0;
    for i in spatial_order(array) {
        let mut block = atom_block(array, i, delta)?;
        if block.decoupled {
            block.alpha = previous;
        }
        previous = block.alpha;
        alphas.push(block.alpha);
        product *= block.dressed();
    }
    Ok((product, alphas))
}

/// Scattering amplitudes of a separate array from the cascade product.
pub fn cascade_scatter(array: &AtomArray, delta: f64) -> Result<CascadeResult> {
    let (m, alphas) = cascade_matrix(array, delta)?;
    Ok(CascadeResult {
        t: m[(0, 0)].inv(),
        r: m[(1, 0)] / m[(0, 0)],
        alphas,
    })
}

/// Chebyshev polynomial of the second kind, `U_n(y)`, by three-term recurrence.
pub fn chebyshev_u_recurrence(n: usize, y: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..n {
        let next = 2.0 * y * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `U_n(y)` from the trigonometric (`|y| < 1`) or hyperbolic (`|y| > 1`) form.
pub fn chebyshev_u_closed(n: usize, y: f64) -> f64 {
    let k = (n + 1) as f64;
    let sign = if y < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let ay = y.abs();
    if ay == 1.0 {
        sign * k
    } else if ay < 1.0 {
        let lambda = y.acos();
        (k * lambda).sin() / lambda.sin()
    } else {
        let lambda = (ay + (ay * ay - 1.0).sqrt()).ln();
        sign * (k * lambda).sinh() / lambda.sinh()
    }
}

/// `U_n(y)` for any real `y`. Recurrence up to degree 64, closed form above
/// (falling back to the recurrence where the closed form loses accuracy
/// near `|y| = 1`).
pub fn chebyshev_u(n: usize, y: f64) -> f64 {
    if n <= 64 || (y.abs() - 1.0).abs() < 1e-6 {
        chebyshev_u_recurrence(n, y)
    } else {
        chebyshev_u_closed(n, y)
    }
}

/// `U_{n}` allowing `n = -1` (where it vanishes).
fn chebyshev_u_signed(n: isize, y: f64) -> f64 {
    if n < 0 {
        0.0
    } else {
        chebyshev_u(n as usize, y)
    }
}

/// Transmittance and reflectance of `n` identical periodic cells:
/// `T = 1 / (1 + ξ² U²_{n-1}(y))`, `R = 1 - T`.
pub fn periodic_reflectance(n: usize, xi: f64, y: f64) -> (f64, f64) {
    let u = chebyshev_u_signed(n as isize - 1, y);
    let q = xi * xi * u * u;
    (1.0 / (1.0 + q), q / (1.0 + q))
}

/// Unit cell `T̃ = T_i · diag(e^{-iφ}, e^{iφ})` of a periodic chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCell {
    pub xi: f64,
    pub phi: f64,
    /// Half trace, `cos φ + ξ sin φ`.
    pub y: f64,
    pub cell: Matrix2<Complex64>,
}

impl PeriodicCell {
    pub fn new(xi: f64, phi: f64) -> Self {
        let cell = block_matrix(xi) * phase_matrix(-phi);
        Self {
            xi,
            phi,
            y: phi.cos() + xi * phi.sin(),
            cell,
        }
    }

    /// `T̃^n = U_{n-1}(y) T̃ - U_{n-2}(y) I`.
    pub fn power(&self, n: usize) -> Matrix2<Complex64> {
        let a = chebyshev_u_signed(n as isize - 1, self.y);
        let b = chebyshev_u_signed(n as isize - 2, self.y);
        self.cell * c(a) - Matrix2::identity() * c(b)
    }
}

/// An array of identical, equally spaced, separate atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicStructure {
    pub n: usize,
    /// Phase between equivalent points of neighbouring atoms, at `ω_a`.
    pub lattice_phase: f64,
    /// Shared atomic frequency offset `ω_i - ω_a`.
    pub detuning: f64,
    /// Coupling points of the leftmost atom.
    pub cell_points: Vec<CouplingPoint>,
    phase_scale_reference: f64,
    non_markovian: bool,
}

const PERIODIC_TOL: f64 = 1e-9;

impl PeriodicStructure {
    /// Detect periodicity; fails unless every atom is a translated copy of the
    /// first by a common lattice phase.
    pub fn detect(array: &AtomArray) -> Result<Self> {
        if classify_configuration(array) != Configuration::Separate {
            return Err(Error::NotSeparate);
        }
        let order = spatial_order(array);
        let atoms = array.atoms();
        let first = &atoms[order[0]];
        let lattice = if order.len() > 1 {
            atoms[order[1]].points[0].phase - first.points[0].phase
        } else {
            0.0
        };
        for (k, &i) in order.iter().enumerate() {
            let atom = &atoms[i];
            if atom.points.len() != first.points.len() {
                return Err(Error::NotPeriodic(format!("atom {i} has a different point count")));
            }
            if (atom.detuning - first.detuning).abs() > PERIODIC_TOL {
                return Err(Error::NotPeriodic(format!("atom {i} has a different frequency")));
            }
            let shift = k as f64 * lattice;
            for (p, q) in atom.points.iter().zip(&first.points) {
                if (p.phase - q.phase - shift).abs() > PERIODIC_TOL * (1.0 + shift.abs())
                    || (p.bare_decay - q.bare_decay).abs() > PERIODIC_TOL
                {
                    return Err(Error::NotPeriodic(format!(
                        "atom {i} is not a translated copy of the first atom"
                    )));
                }
            }
        }
        Ok(Self {
            n: atoms.len(),
            lattice_phase: lattice,
            detuning: first.detuning,
            cell_points: first.points.clone(),
            phase_scale_reference: array.reference_frequency(),
            non_markovian: array.regime() == crate::model::Regime::NonMarkovian,
        })
    }

    fn scale(&self, delta: f64) -> f64 {
        if self.non_markovian {
            (self.phase_scale_reference + delta) / self.phase_scale_reference
        } else {
            1.0
        }
    }

    /// Single-atom `(Δ_L, Γ_eff)` of the repeated cell at `ω_a`.
    pub fn cell_characteristics(&self) -> (f64, f64) {
        self_terms(&self.cell_points, 1.0)
    }

    /// `(ξ, y)` at detuning `delta`; `None` on the pole `Δ = Δ_L`.
    pub fn xi_and_y(&self, delta: f64) -> Option<(f64, f64)> {
        let s = self.scale(delta);
        let (xi, _, _, detuning) = block_parts(&self.cell_points, self.detuning, s, delta);
        if detuning == 0.0 {
            return None;
        }
        let phi = s * self.lattice_phase;
        Some((xi, phi.cos() + xi * phi.sin()))
    }

    /// `(T, R)` from the Chebyshev closed form. On the pole the limit is
    /// total reflection unless the cell is decoupled.
    pub fn reflectance(&self, delta: f64) -> (f64, f64) {
        match self.xi_and_y(delta) {
            Some((xi, y)) => periodic_reflectance(self.n, xi, y),
            None => {
                let (_, gamma) = self_terms(&self.cell_points, self.scale(delta));
                if gamma > 0.0 {
                    (0.0, 1.0)
                } else {
                    (1.0, 0.0)
                }
            }
        }
    }

    /// Complex `(t, r)` from `T̃^N`, expressed in the array's own coordinates.
    pub fn amplitudes(&self, delta: f64) -> Result<(Complex64, Complex64)> {
        let s = self.scale(delta);
        let (xi, alpha, _, detuning) = block_parts(&self.cell_points, self.detuning, s, delta);
        if detuning == 0.0 {
            return Err(Error::Pole { atom: 0, detuning: delta });
        }
        let phi = s * self.lattice_phase;
        let power = PeriodicCell::new(xi, phi).power(self.n);
        let t = Complex64::from_polar(1.0, -(self.n as f64) * phi) / power[(0, 0)];
        let r = power[(1, 0)] / power[(0, 0)] * Complex64::from_polar(1.0, 2.0 * alpha);
        Ok((t, r))
    }
}
