//! Action-angle functionals built from B-operator amplitudes, the
//! conjugate-variable function, and the commuting-charge evidence suite.
//!
//! The angle/action pair presupposes a scalar reading of the operator
//! `B(u)`; the scalarization here takes the vacuum one-magnon amplitude at
//! the lowest populated site for the phase and the squared norm of
//! `B(u)|all-down>` for the magnitude. That rule is a library choice,
//! recorded as such.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monodromy::{build_monodromy, transfer_matrix, ModelParams};

/// One evaluated sample of the action-angle pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionAngleSample {
    pub u: (f64, f64),
    pub b_abs2: f64,
    /// `-arg(amplitude)`, principal branch.
    pub phi: f64,
    /// `(1/pi) log(1 + epsilon b_abs2)`.
    pub rho: f64,
    pub epsilon: i32,
}

/// Vacuum one-magnon amplitude and squared norm of `B(u)|all-down>`.
pub fn b_scalarization(u: C64, params: &ModelParams) -> Result<(C64, f64)> {
    let space = params.space()?;
    let blocks = build_monodromy(u, params)?;
    let dim = space.dimension();
    let mut vac = vec![C64::new(0.0, 0.0); dim];
    vac[space.vacuum_index()] = C64::new(1.0, 0.0);
    let bv = blocks.b().apply(&vac)?;
    let b_abs2: f64 = bv.iter().map(|z| z.norm_sqr()).sum();
    if b_abs2.sqrt() < 1e-13 {
        return Err(Error::Degenerate(
            "B(u) annihilates the vacuum (s(2 eta) = 0?)".into(),
        ));
    }
    // One-magnon basis state with the up spin at site k sits at index
    // vacuum - 2^{N-k}; scan k upward for the first populated amplitude.
    let n = space.n_sites();
    let amplitude = (1..=n)
        .map(|k| bv[space.vacuum_index() - (1 << (n - k))])
        .find(|amp| amp.norm() > 1e-13)
        .ok_or_else(|| Error::Degenerate("no populated one-magnon amplitude".into()))?;
    Ok((amplitude, b_abs2))
}

/// Evaluate `phi(u)` and `rho(u, epsilon)` from the scalarization.
pub fn action_angle_sample(u: C64, params: &ModelParams, epsilon: i32) -> Result<ActionAngleSample> {
    if epsilon != 1 && epsilon != -1 {
        return Err(Error::Domain(format!("epsilon must be +-1, got {epsilon}")));
    }
    let (amplitude, b_abs2) = b_scalarization(u, params)?;
    let radicand = 1.0 + f64::from(epsilon) * b_abs2;
    if radicand <= 0.0 {
        return Err(Error::Domain(format!(
            "1 + epsilon |B|^2 = {radicand} is not positive"
        )));
    }
    Ok(ActionAngleSample {
        u: (u.re, u.im),
        b_abs2,
        phi: -amplitude.arg(),
        rho: radicand.ln() / std::f64::consts::PI,
        epsilon,
    })
}

/// The conjugate-variable structure check: with `f(x) = (1/pi) log(1 + eps x)`
/// the product `f'(x) (1 + eps x)` collapses to `eps / pi` identically.
/// Returns that product from the closed-form derivative.
pub fn conjugate_function_check(x: f64, epsilon: i32) -> Result<f64> {
    if epsilon != 1 && epsilon != -1 {
        return Err(Error::Domain(format!("epsilon must be +-1, got {epsilon}")));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("squared magnitude must be nonnegative, got {x}")));
    }
    let eps = f64::from(epsilon);
    let arg = 1.0 + eps * x;
    if arg <= 0.0 {
        return Err(Error::Domain(format!("1 + eps x = {arg} leaves the log domain")));
    }
    let f_prime = eps / (std::f64::consts::PI * arg);
    Ok(f_prime * arg)
}

/// Pairwise commutator norms of the transfer family over a spectral grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChargesEvidence {
    pub grid: Vec<(f64, f64)>,
    /// Row-major `grid.len() x grid.len()` commutator norms.
    pub norms: Vec<Vec<f64>>,
    pub max_norm: f64,
    pub pass: bool,
}

/// Evidence that the spectral data generating the action-angle pair derives
/// from a commuting family: all pairwise `[t(u_i), t(u_j)]` vanish.
pub fn commuting_charges_evidence(
    params: &ModelParams,
    u_grid: &[C64],
    tol: f64,
) -> Result<ChargesEvidence> {
    if u_grid.is_empty() {
        return Err(Error::Domain("empty spectral grid".into()));
    }
    let transfers: Vec<_> = u_grid
        .iter()
        .map(|&u| transfer_matrix(u, params))
        .collect::<Result<_>>()?;
    let n = transfers.len();
    let mut norms = vec![vec![0.0f64; n]; n];
    let mut max_norm = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let norm = transfers[i].commutator(&transfers[j])?.max_abs();
            norms[i][j] = norm;
            norms[j][i] = norm;
            max_norm = max_norm.max(norm);
        }
    }
    Ok(ChargesEvidence {
        grid: u_grid.iter().map(|u| (u.re, u.im)).collect(),
        norms,
        max_norm,
        pass: max_norm < tol,
    })
}
