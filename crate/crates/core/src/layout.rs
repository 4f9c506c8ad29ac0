//! Canonical coupling-point layouts. The first coupling point always sits at
//! phase 0.

use crate::error::{Error, Result};
use crate::model::{AtomArray, GiantAtom};

fn check(n: usize, min_n: usize, gamma: f64, theta: f64) -> Result<()> {
    if n < min_n {
        return Err(Error::InvalidArray(format!(
            "layout needs at least {min_n} atoms, got {n}"
        )));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArray(format!(
            "bare decay must be positive, got {gamma}"
        )));
    }
    if !theta.is_finite() || theta < 0.0 {
        return Err(Error::InvalidArray(format!(
            "phase spacing must be finite and non-negative, got {theta}"
        )));
    }
    Ok(())
}

/// `n` identical atoms with `m` points each, every neighbouring pair of
/// points spaced by `theta` (lattice phase `m·theta`).
pub fn build_separate_array(
    n: usize,
    m: usize,
    theta: f64,
    gamma: f64,
    reference_frequency: f64,
) -> Result<AtomArray> {
    check(n, 1, gamma, theta)?;
    if m == 0 {
        return Err(Error::InvalidArray("atoms need at least one point".into()));
    }
    let atoms = (0..n)
        .map(|i| {
            let phases: Vec<f64> = (0..m).map(|k| (i * m + k) as f64 * theta).collect();
            GiantAtom::uniform(&phases, gamma)
        })
        .collect();
    AtomArray::markovian(atoms, reference_frequency)
}

/// Chain of two-point atoms where every neighbouring pair is braided:
/// `θ_{i,2} - θ_{i+1,1} = θ_{i+2,1} - θ_{i,2} = theta`, so first points are
/// spaced by `2θ` and each atom spans `3θ`.
pub fn build_braided_array(
    n: usize,
    theta: f64,
    gamma: f64,
    reference_frequency: f64,
) -> Result<AtomArray> {
    check(n, 2, gamma, theta)?;
    let atoms = (0..n)
        .map(|i| {
            let first = 2.0 * i as f64 * theta;
            GiantAtom::uniform(&[first, first + 3.0 * theta], gamma)
        })
        .collect();
    AtomArray::markovian(atoms, reference_frequency)
}

/// Point order `1a, 2a, …, Na, Nb, …, 2b, 1b`, uniformly spaced by `theta`.
pub fn build_nested_array(
    n: usize,
    theta: f64,
    gamma: f64,
    reference_frequency: f64,
) -> Result<AtomArray> {
    check(n, 2, gamma, theta)?;
    let atoms = (0..n)
        .map(|i| {
            let a = i as f64 * theta;
            let b = (2 * n - 1 - i) as f64 * theta;
            GiantAtom::uniform(&[a, b], gamma)
        })
        .collect();
    AtomArray::markovian(atoms, reference_frequency)
}
