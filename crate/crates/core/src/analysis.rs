//! Closed-form spectral features of maximum-symmetry separate arrays
//! (`N` identical atoms, `M` points each, uniform spacing `θ`), plus a
//! small Lorentzian fitter.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::layout::build_separate_array;
use crate::model::{self_terms, CouplingPoint};
use crate::transfer::{chebyshev_u, PeriodicStructure};

const PHASE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Decoupled,
    Superradiant,
    MinimaSet,
    BandGap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFeature {
    pub kind: FeatureKind,
    pub center: f64,
    pub width: f64,
    pub minima: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Superradiance {
    Decoupled,
    Superradiant { lamb_shift: f64, effective_decay: f64 },
}

/// Single-atom `(Δ_L^sup, Γ_eff^sup)` at `θ = nπ/M`, or decoupling.
pub fn superradiance_params(m: usize, n: u64, gamma: f64) -> Result<Superradiance> {
    if m == 0 {
        return Err(Error::Domain("atoms need at least one point".into()));
    }
    let mf = m as f64;
    if n % 2 == 1 {
        let x = n as f64 * PI / (2.0 * mf);
        Ok(Superradiance::Superradiant {
            lamb_shift: 0.5 * mf * gamma / x.tan(),
            effective_decay: gamma / x.sin().powi(2),
        })
    } else if (n / 2).is_multiple_of(m as u64) {
        Ok(Superradiance::Superradiant {
            lamb_shift: 0.0,
            effective_decay: mf * mf * gamma,
        })
    } else {
        Ok(Superradiance::Decoupled)
    }
}

/// `n` with `θ = nπ/M`, if `θ` has that form.
fn multiple_of(theta: f64, m: usize) -> Option<u64> {
    if !(theta.is_finite() && theta >= 0.0) {
        return None;
    }
    let x = theta * m as f64 / PI;
    let n = x.round();
    ((x - n).abs() <= PHASE_TOL * x.max(1.0)).then_some(n as u64)
}

/// [`superradiance_params`] with `θ` given directly.
pub fn superradiance_at_phase(m: usize, theta: f64, gamma: f64) -> Result<Superradiance> {
    let n = multiple_of(theta, m)
        .ok_or_else(|| Error::Domain(format!("θ = {theta} is not a multiple of π/{m}")))?;
    superradiance_params(m, n, gamma)
}

/// Lorentzian reflectance with unit peak, `(w/2)² / ((Δ-c)² + (w/2)²)`.
pub fn lorentzian_r(delta: f64, center: f64, full_width: f64) -> f64 {
    let h = 0.5 * full_width;
    h * h / ((delta - center).powi(2) + h * h)
}

fn cell_points(m: usize, theta: f64, gamma: f64) -> Vec<CouplingPoint> {
    (0..m).map(|k| CouplingPoint::new(k as f64 * theta, gamma)).collect()
}

/// `Δ_s` for each `s = 1..N-1` (in order of `s`); `None` where
/// `cos Mθ = y_s` and the minimum does not exist.
fn minima_by_index(n: usize, m: usize, theta: f64, gamma: f64) -> Result<Vec<Option<f64>>> {
    if n == 0 || m == 0 || !(gamma > 0.0) {
        return Err(Error::Domain("need N ≥ 1, M ≥ 1 and γ > 0".into()));
    }
    if multiple_of(theta, m).is_some() {
        return Err(Error::Domain(format!(
            "θ = {theta} is a multiple of π/{m}: superradiant or decoupled, no minima"
        )));
    }
    let (lamb, decay) = self_terms(&cell_points(m, theta, gamma), 1.0);
    let phi = m as f64 * theta;
    Ok((1..n)
        .map(|s| {
            let y = (s as f64 * PI / n as f64).cos();
            let gap = y - phi.cos();
            (gap.abs() > PHASE_TOL).then(|| lamb + phi.sin() * decay / (2.0 * gap))
        })
        .collect())
}

/// Zero-reflection detunings of a maximum-symmetry array, sorted.
pub fn reflection_minima(n: usize, m: usize, theta: f64, gamma: f64) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = minima_by_index(n, m, theta, gamma)?.into_iter().flatten().collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Zeros of `R` in `[lo, hi]` found by bracketing `ξ U_{N-1}(y)` on a grid
/// of `count` points and bisecting to `tol`. Brackets across the `ξ` pole are
/// discarded by checking the closed-form reflectance at the root.
pub fn numerical_minima(
    structure: &PeriodicStructure,
    lo: f64,
    hi: f64,
    count: usize,
    tol: f64,
) -> Vec<f64> {
    let g = |d: f64| {
        structure
            .xi_and_y(d)
            .map(|(xi, y)| xi * chebyshev_u(structure.n - 1, y))
            .unwrap_or(f64::INFINITY)
    };
    let step = (hi - lo) / (count.max(2) - 1) as f64;
    let mut roots = Vec::new();
    let mut a = lo;
    let mut ga = g(a);
    for k in 1..count.max(2) {
        let b = lo + k as f64 * step;
        let gb = g(b);
        if ga == 0.0 {
            roots.push(a);
        } else if ga.is_finite() && gb.is_finite() && ga * gb < 0.0 {
            let (mut x0, mut x1, mut g0) = (a, b, ga);
            while x1 - x0 > tol {
                let mid = 0.5 * (x0 + x1);
                let gm = g(mid);
                if !gm.is_finite() {
                    break;
                }
                if g0 * gm <= 0.0 {
                    x1 = mid;
                } else {
                    x0 = mid;
                    g0 = gm;
                }
            }
            let root = 0.5 * (x0 + x1);
            if structure.reflectance(root).1 < 1e-10 {
                roots.push(root);
            }
        }
        a = b;
        ga = gb;
    }
    roots
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandGap {
    /// `|Δ_1 - Δ_{N-1}|` from the minima positions.
    pub estimate: f64,
    /// Large-`N` limit, `Γ_eff = γ / (1 - cos θ)`.
    pub asymptotic: f64,
    /// Large-`M` limit `8M²γ/π²`.
    pub large_m: f64,
    pub center: f64,
}

/// Band-gap width at `θ = (2m+1)π/(2M)`.
pub fn band_gap_width(m_points: usize, m: usize, gamma: f64, n: usize) -> Result<BandGap> {
    if n < 3 {
        return Err(Error::Domain("the band gap needs N ≥ 3".into()));
    }
    if m_points < 2 {
        return Err(Error::Domain("the band gap needs M ≥ 2".into()));
    }
    let theta = (2 * m + 1) as f64 * PI / (2.0 * m_points as f64);
    let minima = minima_by_index(n, m_points, theta, gamma)?;
    let (first, last) = match (minima[0], minima[n - 2]) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Domain("edge minima do not exist".into())),
    };
    let (lamb, _) = self_terms(&cell_points(m_points, theta, gamma), 1.0);
    let mf = m_points as f64;
    Ok(BandGap {
        estimate: (first - last).abs(),
        asymptotic: gamma / (1.0 - theta.cos()),
        large_m: 8.0 * mf * mf * gamma / (PI * PI),
        center: lamb,
    })
}

/// Qualitative feature of an `N × M` maximum-symmetry array at spacing `θ`.
pub fn max_symmetry_features(n: usize, m: usize, theta: f64, gamma: f64) -> Result<SpectralFeature> {
    if let Some(k) = multiple_of(theta, m) {
        return Ok(match superradiance_params(m, k, gamma)? {
            Superradiance::Decoupled => SpectralFeature {
                kind: FeatureKind::Decoupled,
                center: 0.0,
                width: 0.0,
                minima: Vec::new(),
            },
            Superradiance::Superradiant {
                lamb_shift,
                effective_decay,
            } => SpectralFeature {
                kind: FeatureKind::Superradiant,
                center: lamb_shift,
                width: n as f64 * effective_decay,
                minima: Vec::new(),
            },
        });
    }
    let minima = reflection_minima(n, m, theta, gamma)?;
    let x = 2.0 * theta * m as f64 / PI;
    let is_gap = n >= 3 && m >= 2 && (x - x.round()).abs() < PHASE_TOL * x.max(1.0) && x.round() as u64 % 2 == 1;
    // only the first branch θ < π (m < M) of (2m+1)π/2M is tabulated by band_gap_width
    if is_gap {
        let mm = ((x.round() as u64 - 1) / 2) as usize;
        if mm < m {
            let gap = band_gap_width(m, mm, gamma, n)?;
            return Ok(SpectralFeature {
                kind: FeatureKind::BandGap,
                center: gap.center,
                width: gap.estimate,
                minima,
            });
        }
    }
    let (lamb, decay) = self_terms(&cell_points(m, theta, gamma), 1.0);
    Ok(SpectralFeature {
        kind: FeatureKind::MinimaSet,
        center: lamb,
        width: decay,
        minima,
    })
}

/// Array used by the closed forms above.
pub fn max_symmetry_array(n: usize, m: usize, theta: f64, gamma: f64) -> Result<crate::model::AtomArray> {
    build_separate_array(n, m, theta, gamma, 1e3 * gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorentzianFit {
    pub center: f64,
    pub fwhm: f64,
    pub peak: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 500;

/// Levenberg–Marquardt fit of `A (w/2)² / ((x-c)² + (w/2)²)`.
pub fn fit_lorentzian(x: &[f64], y: &[f64]) -> Result<LorentzianFit> {
    if x.len() != y.len() || x.len() < 4 {
        return Err(Error::NonConvergence {
            iterations: 0,
            trace: Vec::new(),
        });
    }
    let (imax, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    if !(ymax > 0.0) || ymax - ymin < 1e-14 * ymax.abs().max(1.0) {
        return Err(Error::NonConvergence {
            iterations: 0,
            trace: vec![0.0],
        });
    }
    // initial half width from the half-maximum crossings
    let half = 0.5 * ymax;
    let left = (0..imax).rev().find(|&i| y[i] < half).map(|i| x[i]).unwrap_or(x[0]);
    let right = (imax..y.len()).find(|&i| y[i] < half).map(|i| x[i]).unwrap_or(x[x.len() - 1]);
    let span = x[x.len() - 1] - x[0];
    let mut p = Vector3::new(x[imax], (0.5 * (right - left)).max(1e-3 * span.abs()), ymax);

    let model = |p: &Vector3<f64>, xi: f64| {
        let (c, h, a) = (p[0], p[1], p[2]);
        let d = xi - c;
        let den = d * d + h * h;
        (a * h * h / den, d, den)
    };
    let cost = |p: &Vector3<f64>| -> f64 {
        x.iter().zip(y).map(|(&xi, &yi)| (model(p, xi).0 - yi).powi(2)).sum()
    };

    let mut lambda = 1e-3;
    let mut current = cost(&p);
    let mut trace = vec![current];
    for iteration in 1..=MAX_ITERATIONS {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (&xi, &yi) in x.iter().zip(y) {
            let (f, d, den) = model(&p, xi);
            let (h, a) = (p[1], p[2]);
            let grad = Vector3::new(
                2.0 * a * h * h * d / (den * den),
                2.0 * a * h * d * d / (den * den),
                h * h / den,
            );
            jtj += grad * grad.transpose();
            jtr += grad * (yi - f);
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut damped = jtj;
            for k in 0..3 {
                damped[(k, k)] *= 1.0 + lambda;
            }
            let Some(step) = damped.try_inverse().map(|inv| inv * jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let c = cost(&trial);
            if c.is_finite() && c <= current {
                let converged = step.norm() <= 1e-15 * p.norm().max(1.0) || current - c <= 1e-30;
                p = trial;
                current = c;
                lambda = (lambda * 0.1).max(1e-15);
                accepted = true;
                trace.push(current);
                if converged {
                    return Ok(finish(p, current, x.len(), iteration));
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step left: at a minimum to machine precision
            if current.sqrt() <= 1e-6 * ymax * (x.len() as f64).sqrt() {
                return Ok(finish(p, current, x.len(), iteration));
            }
            return Err(Error::NonConvergence {
                iterations: iteration,
                trace,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
        trace,
    })
}

fn finish(p: Vector3<f64>, cost: f64, n: usize, iterations: usize) -> LorentzianFit {
    LorentzianFit {
        center: p[0],
        fwhm: 2.0 * p[1].abs(),
        peak: p[2],
        residual: (cost / n as f64).sqrt(),
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::scatter;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn superradiance_examples() {
        assert_eq!(superradiance_params(2, 2, 1.0).unwrap(), Superradiance::Decoupled);
        match superradiance_params(2, 1, 1.0).unwrap() {
            Superradiance::Superradiant { lamb_shift, effective_decay } => {
                assert!((lamb_shift - 1.0).abs() < 1e-14 && (effective_decay - 2.0).abs() < 1e-14)
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            superradiance_params(2, 0, 1.0).unwrap(),
            Superradiance::Superradiant { lamb_shift: 0.0, effective_decay: 4.0 }
        );
        assert!(superradiance_at_phase(2, 0.3, 1.0).is_err());
        assert_eq!(superradiance_at_phase(3, 2.0 * PI / 3.0, 1.0).unwrap(), Superradiance::Decoupled);
    }

    #[test]
    fn superradiance_agrees_with_single_atom_sums() {
        for m in 1..6 {
            for n in 0..(4 * m as u64) {
                let theta = n as f64 * PI / m as f64;
                let (l, g) = self_terms(&cell_points(m, theta, 0.7), 1.0);
                match superradiance_params(m, n, 0.7).unwrap() {
                    Superradiance::Decoupled => assert!(g.abs() < 1e-12, "m={m} n={n}"),
                    Superradiance::Superradiant { lamb_shift, effective_decay } => {
                        assert!((l - lamb_shift).abs() < 1e-12 && (g - effective_decay).abs() < 1e-12)
                    }
                }
            }
        }
    }

    #[test]
    fn lorentzian_shape() {
        assert_eq!(lorentzian_r(0.3, 0.3, 2.0), 1.0);
        assert!((lorentzian_r(1.3, 0.3, 2.0) - 0.5).abs() < 1e-15);
        assert!((lorentzian_r(-0.7, 0.3, 2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn superradiant_spectrum_is_lorentzian() {
        let a = max_symmetry_array(3, 2, PI / 2.0, 1.0).unwrap();
        for d in grid(-10.0, 10.0, 201) {
            let r = scatter(&a, d).unwrap().reflectance;
            assert!((r - lorentzian_r(d, 1.0, 6.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn minima_are_zeros_of_reflection() {
        for (n, m, theta) in [(3, 2, 0.35 * PI), (5, 3, 0.21 * PI), (4, 2, 0.6 * PI)] {
            let minima = reflection_minima(n, m, theta, 1.0).unwrap();
            assert_eq!(minima.len(), n - 1);
            let a = max_symmetry_array(n, m, theta, 1.0).unwrap();
            for d in minima {
                assert!(scatter(&a, d).unwrap().reflectance < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_minimum_dropped() {
        // Mθ = π/N makes cos Mθ = y_1, so that minimum does not exist
        let n = 3;
        let theta = PI / (3.0 * 2.0);
        let minima = reflection_minima(n, 2, theta, 1.0).unwrap();
        assert_eq!(minima.len(), n - 2);
        assert!(reflection_minima(3, 2, PI / 2.0, 1.0).is_err());
    }

    #[test]
    fn symmetric_minima_for_odd_n() {
        let theta = PI / 4.0;
        let minima = reflection_minima(5, 2, theta, 1.0).unwrap();
        let (lamb, _) = self_terms(&cell_points(2, theta, 1.0), 1.0);
        assert_eq!(minima.len(), 4);
        for k in 0..2 {
            assert!((minima[k] + minima[3 - k] - 2.0 * lamb).abs() < 1e-12);
        }
    }

    #[test]
    fn numerical_minima_match_analytic() {
        let (n, m, theta) = (4, 2, 0.35 * PI);
        let a = max_symmetry_array(n, m, theta, 1.0).unwrap();
        let p = PeriodicStructure::detect(&a).unwrap();
        let analytic = reflection_minima(n, m, theta, 1.0).unwrap();
        let found = numerical_minima(&p, -20.0, 20.0, 4001, 1e-12);
        assert_eq!(found.len(), analytic.len());
        for (x, y) in found.iter().zip(&analytic) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn band_gap_estimates() {
        let g = band_gap_width(2, 0, 1.0, 10).unwrap();
        assert!((g.asymptotic - 1.0 / (1.0 - (PI / 4.0).cos())).abs() < 1e-12);
        assert!((g.estimate / g.asymptotic - 1.0).abs() < 0.1);
        let g = band_gap_width(2, 0, 1.0, 40).unwrap();
        assert!((g.estimate / g.asymptotic - 1.0).abs() < 0.05);
        let g = band_gap_width(20, 0, 1.0, 10).unwrap();
        assert!((g.asymptotic / g.large_m - 1.0).abs() < 0.02);
    }

    #[test]
    fn features_classification() {
        assert_eq!(max_symmetry_features(3, 2, PI, 1.0).unwrap().kind, FeatureKind::Decoupled);
        let f = max_symmetry_features(3, 2, PI / 2.0, 1.0).unwrap();
        assert_eq!(f.kind, FeatureKind::Superradiant);
        assert!((f.width - 6.0).abs() < 1e-12 && (f.center - 1.0).abs() < 1e-12);
        assert_eq!(max_symmetry_features(10, 2, PI / 4.0, 1.0).unwrap().kind, FeatureKind::BandGap);
        assert_eq!(max_symmetry_features(3, 2, 0.35 * PI, 1.0).unwrap().kind, FeatureKind::MinimaSet);
    }

    #[test]
    fn fit_recovers_exact_lorentzian() {
        let x = grid(-4.0, 6.0, 301);
        let y: Vec<f64> = x.iter().map(|&d| 0.8 * lorentzian_r(d, 1.234, 1.7)).collect();
        let fit = fit_lorentzian(&x, &y).unwrap();
        assert!((fit.center - 1.234).abs() < 1e-8);
        assert!((fit.fwhm - 1.7).abs() < 1e-8);
        assert!((fit.peak - 0.8).abs() < 1e-8);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_rejects_flat_input() {
        let x = grid(-1.0, 1.0, 50);
        let y = vec![0.0; 50];
        assert!(matches!(fit_lorentzian(&x, &y), Err(Error::NonConvergence { .. })));
    }
}
