//! CHSH scores for two-qubit states with spin measurements in the x–z plane.

use serde::Serialize;
use std::f64::consts::PI;

use super::BipartiteState;
use crate::par::{self, Execution};
use crate::qmat::pauli;
use crate::{Error, Result};

/// Angles for Alice (`a`, `a′`) and Bob (`b`, `b′`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshSettings {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshSettings {
    /// Maximizing settings for the singlet under
    /// `E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)`: score `+2√2`.
    pub fn canonical() -> Self {
        Self {
            a: 0.0,
            a_prime: PI / 2.0,
            b: 5.0 * PI / 4.0,
            b_prime: 3.0 * PI / 4.0,
        }
    }
}

fn check_qubits(state: &BipartiteState) -> Result<()> {
    if state.dims() != (2, 2) {
        return Err(Error::DimensionMismatch("CHSH needs a 2⊗2 state".into()));
    }
    Ok(())
}

/// `tr[ρ (S(θa) ⊗ S(θb))]` with `S(θ) = cos θ σ_z + sin θ σ_x`.
pub fn correlation(state: &BipartiteState, theta_a: f64, theta_b: f64) -> Result<f64> {
    check_qubits(state)?;
    let obs = pauli::spin_xz(theta_a).tensor(&pauli::spin_xz(theta_b));
    Ok(state.rho().matmul(&obs).trace().re)
}

pub fn chsh_score(state: &BipartiteState, s: &ChshSettings) -> Result<f64> {
    Ok(correlation(state, s.a, s.b)? + correlation(state, s.a, s.b_prime)?
        + correlation(state, s.a_prime, s.b)?
        - correlation(state, s.a_prime, s.b_prime)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMax {
    pub max_abs_score: f64,
    pub settings: ChshSettings,
}

/// Maximum `|S|` over all four angles on a uniform grid of `[0, 2π)`.
///
/// The correlation is bilinear in `(cos θ, sin θ)`, so it is tabulated once
/// from the 2×2 correlation tensor. For fixed `(a, a′)` the choices of `b`
/// and `b′` decouple, which makes the search cubic in the grid size.
pub fn chsh_grid_max(state: &BipartiteState, step_deg: f64, exec: Execution) -> Result<GridMax> {
    check_qubits(state)?;
    if !(step_deg > 0.0 && step_deg <= 180.0) {
        return Err(Error::InvalidParameter(format!("grid step {step_deg}° out of range")));
    }
    let n = (360.0 / step_deg).round() as usize;
    let angles: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();

    // t[k][l] = ⟨σ_k ⊗ σ_l⟩ with k, l ∈ {z, x}
    let ops = [pauli::z(), pauli::x()];
    let mut t = [[0.0; 2]; 2];
    for (k, ok) in ops.iter().enumerate() {
        for (l, ol) in ops.iter().enumerate() {
            t[k][l] = state.rho().matmul(&ok.tensor(ol)).trace().re;
        }
    }
    let dirs: Vec<[f64; 2]> = angles.iter().map(|a| [a.cos(), a.sin()]).collect();
    let table: Vec<Vec<f64>> = dirs
        .iter()
        .map(|u| {
            dirs.iter()
                .map(|v| (0..2).map(|k| (0..2).map(|l| u[k] * t[k][l] * v[l]).sum::<f64>()).sum())
                .collect()
        })
        .collect();

    let best_per_a = par::map_indices(exec, n, |i| {
        let mut best = (f64::NEG_INFINITY, (0, 0, 0, 0));
        for j in 0..n {
            let (mut hi_b, mut lo_b) = ((f64::NEG_INFINITY, 0), (f64::INFINITY, 0));
            let (mut hi_bp, mut lo_bp) = ((f64::NEG_INFINITY, 0), (f64::INFINITY, 0));
            for (k, (x, y)) in table[i].iter().zip(&table[j]).enumerate() {
                let (plus, minus) = (x + y, x - y);
                if plus > hi_b.0 {
                    hi_b = (plus, k);
                }
                if plus < lo_b.0 {
                    lo_b = (plus, k);
                }
                if minus > hi_bp.0 {
                    hi_bp = (minus, k);
                }
                if minus < lo_bp.0 {
                    lo_bp = (minus, k);
                }
            }
            let top = hi_b.0 + hi_bp.0;
            let bottom = -(lo_b.0 + lo_bp.0);
            if top > best.0 {
                best = (top, (i, j, hi_b.1, hi_bp.1));
            }
            if bottom > best.0 {
                best = (bottom, (i, j, lo_b.1, lo_bp.1));
            }
        }
        best
    });
    let (max_abs_score, (i, j, k, l)) = best_per_a
        .into_iter()
        .fold((f64::NEG_INFINITY, (0, 0, 0, 0)), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(GridMax {
        max_abs_score,
        settings: ChshSettings {
            a: angles[i],
            a_prime: angles[j],
            b: angles[k],
            b_prime: angles[l],
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entangle::epr_singlet;
    use crate::random::{self, seeded};

    #[test]
    fn singlet_correlation_closed_form() {
        let s = epr_singlet();
        for (a, b) in [(0.0, 0.0), (0.3, 1.1), (2.0, -0.7)] {
            let e: f64 = correlation(&s, a, b).unwrap();
            assert!((e + (a - b).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn canonical_singlet_reaches_tsirelson() {
        let score = chsh_score(&epr_singlet(), &ChshSettings::canonical()).unwrap();
        assert!((score - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn grid_agrees_with_reported_settings() {
        let g = chsh_grid_max(&epr_singlet(), 15.0, Execution::Sequential).unwrap();
        assert!((g.max_abs_score - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let direct = chsh_score(&epr_singlet(), &g.settings).unwrap();
        assert!((direct.abs() - g.max_abs_score).abs() < 1e-12);
        let p = chsh_grid_max(&epr_singlet(), 15.0, Execution::Parallel).unwrap();
        assert_eq!(g, p);
    }

    #[test]
    fn product_states_stay_classical() {
        let mut rng = seeded(3);
        for _ in 0..5 {
            let ra = random::density(2, 2, &mut rng);
            let rb = random::density(2, 1, &mut rng);
            let state = BipartiteState::product(&ra, &rb).unwrap();
            let g = chsh_grid_max(&state, 10.0, Execution::Parallel).unwrap();
            assert!(g.max_abs_score <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn rejects_non_qubit_pairs() {
        let s = BipartiteState::new(crate::qmat::ComplexMatrix::identity(6).scale_real(1.0 / 6.0), (3, 2)).unwrap();
        assert!(chsh_score(&s, &ChshSettings::canonical()).is_err());
        assert!(chsh_grid_max(&epr_singlet(), 0.0, Execution::Sequential).is_err());
    }
}
