//! Bethe-equation residuals, auxiliary functions, a damped-Newton root
//! solver, the eigenvalue formula, Bethe-state construction, and the
//! eigencheck against the transfer matrix.
//!
//! Every object in this module runs in one declared kernel convention; the
//! hyperbolic flag reproduces the sinh displays and the trigonometric flag
//! substitutes sin throughout.
//!
//! The transfer matrix used by the eigencheck is built from the
//! Baxter-weight L-operator (per-site blocks `diag(a, b)`, `s(eta) sigma+-`,
//! `diag(b, a)` with `a = s(eta - (u - v_k))`, `b = s(u - v_k)`): this is the
//! unique normalization whose vacuum eigenvalue reproduces the closed-form
//! zero-magnon eigenvalue exactly, field factors included. The spectral
//! argument handed to the creation operator for a Bethe root is calibrated
//! rather than assumed; see [`SpectralMap`].

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, Convention, QuantumSpace};

/// Everything a Bethe-sector computation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheConfig {
    pub n_sites: usize,
    pub n_roots: usize,
    pub eta: C64,
    pub h_field: f64,
    pub inhomogeneities: Vec<C64>,
    pub convention: Convention,
}

impl BetheConfig {
    pub fn new(
        n_sites: usize,
        n_roots: usize,
        eta: C64,
        h_field: f64,
        inhomogeneities: Vec<C64>,
        convention: Convention,
    ) -> Result<Self> {
        if n_roots > n_sites {
            return Err(Error::Domain(format!(
                "root count {n_roots} exceeds site count {n_sites}"
            )));
        }
        if inhomogeneities.len() != n_sites {
            return Err(Error::Shape(format!(
                "{} inhomogeneities for {} sites",
                inhomogeneities.len(),
                n_sites
            )));
        }
        Ok(Self { n_sites, n_roots, eta, h_field, inhomogeneities, convention })
    }

    pub fn space(&self) -> Result<QuantumSpace> {
        QuantumSpace::new(self.n_sites)
    }
}

/// An ordered, deduplicated set of Bethe roots for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetheRoots {
    alpha: Vec<C64>,
    pub config: BetheConfig,
}

/// Roots closer than this are treated as coinciding and rejected.
pub const COINCIDENCE_TOL: f64 = 1e-8;

impl BetheRoots {
    pub fn new(mut alpha: Vec<C64>, config: BetheConfig) -> Result<Self> {
        if alpha.len() != config.n_roots {
            return Err(Error::Shape(format!(
                "{} roots for a configuration expecting {}",
                alpha.len(),
                config.n_roots
            )));
        }
        for i in 0..alpha.len() {
            for j in (i + 1)..alpha.len() {
                if (alpha[i] - alpha[j]).norm() < COINCIDENCE_TOL {
                    return Err(Error::Degenerate(format!(
                        "roots {i} and {j} coincide within {COINCIDENCE_TOL}"
                    )));
                }
            }
        }
        alpha.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        Ok(Self { alpha, config })
    }

    pub fn alpha(&self) -> &[C64] {
        &self.alpha
    }
}

const POLE_TOL: f64 = 1e-12;

fn checked_ratio(num: C64, den: C64, what: &str) -> Result<C64> {
    if den.norm() < POLE_TOL {
        return Err(Error::Domain(format!("{what}: denominator factor vanishes")));
    }
    if num.norm() < POLE_TOL {
        return Err(Error::Domain(format!("{what}: numerator factor vanishes, log diverges")));
    }
    Ok(num / den)
}

/// `psi_+(alpha + i u) = log[ s(eta/2 + u - i alpha) / s(eta/2 - u + i alpha) ]`.
pub fn psi_plus(alpha: C64, u: C64, eta: C64, convention: Convention) -> Result<C64> {
    Ok(exp_psi_plus(alpha, u, eta, convention)?.ln())
}

/// The ratio under the `psi_+` logarithm, computed directly.
pub fn exp_psi_plus(alpha: C64, u: C64, eta: C64, convention: Convention) -> Result<C64> {
    let i = C64::new(0.0, 1.0);
    let num = convention.s(eta / 2.0 + u - i * alpha);
    let den = convention.s(eta / 2.0 - u + i * alpha);
    checked_ratio(num, den, "psi_plus")
}

/// `psi_-(alpha + i u) = log[ s(3 eta/2 - u + i alpha) / s(u - eta/2 - i alpha) ]`.
pub fn psi_minus(alpha: C64, u: C64, eta: C64, convention: Convention) -> Result<C64> {
    Ok(exp_psi_minus(alpha, u, eta, convention)?.ln())
}

/// The ratio under the `psi_-` logarithm.
pub fn exp_psi_minus(alpha: C64, u: C64, eta: C64, convention: Convention) -> Result<C64> {
    let i = C64::new(0.0, 1.0);
    let num = convention.s(eta * 1.5 - u + i * alpha);
    let den = convention.s(u - eta / 2.0 - i * alpha);
    checked_ratio(num, den, "psi_minus")
}

/// Bare one-magnon momentum `p(alpha) = log[ s(eta/2 + i alpha) / s(eta/2 - i alpha) ]`.
pub fn momentum_p(alpha: C64, eta: C64, convention: Convention) -> Result<C64> {
    let i = C64::new(0.0, 1.0);
    let num = convention.s(eta / 2.0 + i * alpha);
    let den = convention.s(eta / 2.0 - i * alpha);
    Ok(checked_ratio(num, den, "momentum_p")?.ln())
}

/// Two-root scattering ratio `Theta(alpha - beta) = -s(i(alpha-beta) + eta) / s(i(alpha-beta) - eta)`.
pub fn theta(alpha: C64, beta: C64, eta: C64, convention: Convention) -> Result<C64> {
    let i = C64::new(0.0, 1.0);
    let w = i * (alpha - beta);
    let num = convention.s(w + eta);
    let den = convention.s(w - eta);
    if den.norm() < POLE_TOL {
        return Err(Error::Domain("theta: s(i(alpha-beta) - eta) vanishes".into()));
    }
    Ok(-num / den)
}

/// Per-root residuals of the Bethe system in ratio form:
/// `prod_k s(eta/2 + i a_j - v_k)/s(eta/2 - i a_j + v_k)
///  - e^{2HN} prod_{m != j} s(i(a_j - a_m) + eta)/s(i(a_j - a_m) - eta)`.
pub fn bethe_residual(roots: &BetheRoots) -> Result<Vec<C64>> {
    let cfg = &roots.config;
    let i = C64::new(0.0, 1.0);
    let conv = cfg.convention;
    let twist = C64::new((2.0 * cfg.h_field * cfg.n_sites as f64).exp(), 0.0);
    let mut out = Vec::with_capacity(roots.alpha.len());
    for (j, &aj) in roots.alpha.iter().enumerate() {
        let mut lhs = C64::new(1.0, 0.0);
        for (k, &vk) in cfg.inhomogeneities.iter().enumerate() {
            let num = conv.s(cfg.eta / 2.0 + i * aj - vk);
            let den = conv.s(cfg.eta / 2.0 - i * aj + vk);
            if den.norm() < POLE_TOL {
                return Err(Error::Domain(format!("site factor (j={j}, k={k}) at a pole")));
            }
            lhs *= num / den;
        }
        let mut rhs = twist;
        for (m, &am) in roots.alpha.iter().enumerate() {
            if m == j {
                continue;
            }
            let w = i * (aj - am);
            let den = conv.s(w - cfg.eta);
            if den.norm() < POLE_TOL {
                return Err(Error::Domain(format!("root factor (j={j}, m={m}) at a pole")));
            }
            rhs *= conv.s(w + cfg.eta) / den;
        }
        out.push(lhs - rhs);
    }
    Ok(out)
}

/// Cleared-denominator form of the Bethe system; polynomial-like in the
/// kernel values, free of poles, used by the Newton iteration.
fn bethe_cleared(alpha: &[C64], cfg: &BetheConfig) -> Vec<C64> {
    let i = C64::new(0.0, 1.0);
    let conv = cfg.convention;
    let half_twist = C64::new((cfg.h_field * cfg.n_sites as f64).exp(), 0.0);
    alpha
        .iter()
        .enumerate()
        .map(|(j, &aj)| {
            let mut left = C64::new(1.0, 0.0) / half_twist;
            let mut right = half_twist;
            for &vk in &cfg.inhomogeneities {
                left *= conv.s(cfg.eta / 2.0 + i * aj - vk);
                right *= conv.s(cfg.eta / 2.0 - i * aj + vk);
            }
            for (m, &am) in alpha.iter().enumerate() {
                if m == j {
                    continue;
                }
                let w = i * (aj - am);
                left *= conv.s(w - cfg.eta);
                right *= conv.s(w + cfg.eta);
            }
            left - right
        })
        .collect()
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solve a small dense complex linear system by Gaussian elimination with
/// partial pivoting. Returns None when the pivot collapses.
fn solve_linear(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Option<Vec<C64>> {
    let n = b.len();
    for col in 0..n {
        let (pivot, pmax) = (col..n)
            .map(|r| (r, a[r][col].norm()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal))?;
        if pmax < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col].clone();
        for row in (col + 1)..n {
            let f = a[row][col] / pivot_row[col];
            for (dst, src) in a[row][col..].iter_mut().zip(pivot_row[col..].iter()) {
                *dst -= f * src;
            }
            let sub = f * b[col];
            b[row] -= sub;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in (row + 1)..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Why one seed failed to produce a root.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub roots: Vec<BetheRoots>,
    pub failures: Vec<SeedFailure>,
}

pub const NEWTON_MAX_ITER: usize = 200;
pub const NEWTON_STEP_TOL: f64 = 1e-12;
/// Distinct solutions are separated by at least this much.
pub const DEDUP_TOL: f64 = 1e-6;

/// Damped Newton iteration on the cleared Bethe system from every seed;
/// converged, deduplicated, residual-revalidated roots come back along with
/// per-seed failure entries. A failed seed is never a global error.
pub fn solve_bethe(cfg: &BetheConfig, seeds: &[Vec<C64>], residual_tol: f64) -> Result<SolveOutcome> {
    if cfg.n_roots == 0 {
        let empty = BetheRoots::new(Vec::new(), cfg.clone())?;
        return Ok(SolveOutcome { roots: vec![empty], failures: Vec::new() });
    }
    let n = cfg.n_roots;
    let mut found: Vec<BetheRoots> = Vec::new();
    let mut failures = Vec::new();
    'seed: for (seed_index, seed) in seeds.iter().enumerate() {
        if seed.len() != n || seed.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            failures.push(SeedFailure {
                seed_index,
                reason: format!("seed must be {n} finite values"),
            });
            continue;
        }
        let mut alpha = seed.clone();
        let mut residual = bethe_cleared(&alpha, cfg);
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            // Central-difference Jacobian of the cleared system.
            let h = 1e-7;
            let mut jac = vec![vec![C64::new(0.0, 0.0); n]; n];
            for col in 0..n {
                let mut plus = alpha.clone();
                plus[col] += C64::new(h, 0.0);
                let mut minus = alpha.clone();
                minus[col] -= C64::new(h, 0.0);
                let fp = bethe_cleared(&plus, cfg);
                let fm = bethe_cleared(&minus, cfg);
                for row in 0..n {
                    jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
                }
            }
            let rhs: Vec<C64> = residual.iter().map(|z| -z).collect();
            let Some(step) = solve_linear(jac, rhs) else {
                failures.push(SeedFailure {
                    seed_index,
                    reason: "singular Jacobian".into(),
                });
                continue 'seed;
            };
            // Damping: halve on residual increase.
            let base_norm = vec_norm(&residual);
            let mut lambda = 1.0f64;
            let mut accepted = false;
            while lambda > 1e-6 {
                let trial: Vec<C64> =
                    alpha.iter().zip(step.iter()).map(|(a, d)| a + d * lambda).collect();
                let trial_res = bethe_cleared(&trial, cfg);
                if vec_norm(&trial_res) <= base_norm || base_norm == 0.0 {
                    alpha = trial;
                    residual = trial_res;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                failures.push(SeedFailure {
                    seed_index,
                    reason: "damping collapsed without residual decrease".into(),
                });
                continue 'seed;
            }
            if lambda * vec_norm(&step) < NEWTON_STEP_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            failures.push(SeedFailure {
                seed_index,
                reason: format!("no convergence within {NEWTON_MAX_ITER} iterations"),
            });
            continue;
        }
        let candidate = match BetheRoots::new(alpha, cfg.clone()) {
            Ok(r) => r,
            Err(e) => {
                failures.push(SeedFailure { seed_index, reason: e.to_string() });
                continue;
            }
        };
        // Revalidate on the ratio form.
        match bethe_residual(&candidate) {
            Ok(res) => {
                let worst = res.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if worst > residual_tol {
                    failures.push(SeedFailure {
                        seed_index,
                        reason: format!("converged point fails revalidation ({worst:.3e})"),
                    });
                    continue;
                }
            }
            Err(e) => {
                failures.push(SeedFailure { seed_index, reason: e.to_string() });
                continue;
            }
        }
        let duplicate = found.iter().any(|r| {
            r.alpha()
                .iter()
                .zip(candidate.alpha().iter())
                .all(|(a, b)| (a - b).norm() < DEDUP_TOL)
        });
        if !duplicate {
            found.push(candidate);
        }
    }
    Ok(SolveOutcome { roots: found, failures })
}

/// Default one-root seed grid over `[-2, 2]^2` in the complex alpha plane.
pub fn grid_seeds_one_root(per_axis: usize) -> Vec<Vec<C64>> {
    let mut seeds = Vec::with_capacity(per_axis * per_axis);
    for i in 0..per_axis {
        for j in 0..per_axis {
            let t = |k: usize| -2.0 + 4.0 * (k as f64 + 0.5) / per_axis as f64;
            seeds.push(vec![C64::new(t(i), t(j))]);
        }
    }
    seeds
}

/// Which site count the second eigenvalue product runs over. The display
/// indexes it by the root count; the all-sites reading is the one the
/// zero-magnon operator oracle confirms, and is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaSiteProduct {
    AllSites,
    RootCount,
}

/// Transfer-matrix eigenvalue for a root set:
/// `e^{NH} prod_k s(eta - u + v_k) prod_j e^{psi_+(a_j + iu)}
///  + e^{-NH} prod_k s(u - v_k) prod_j e^{psi_-(a_j + iu)}`.
pub fn eigenvalue_lambda(roots: &BetheRoots, u: C64, which: LambdaSiteProduct) -> Result<C64> {
    let cfg = &roots.config;
    let conv = cfg.convention;
    let nh = cfg.h_field * cfg.n_sites as f64;
    let mut term1 = C64::new(nh.exp(), 0.0);
    for &vk in &cfg.inhomogeneities {
        term1 *= conv.s(cfg.eta - u + vk);
    }
    for &aj in roots.alpha() {
        term1 *= exp_psi_plus(aj, u, cfg.eta, conv)?;
    }
    let second_sites = match which {
        LambdaSiteProduct::AllSites => cfg.n_sites,
        LambdaSiteProduct::RootCount => cfg.n_roots,
    };
    let mut term2 = C64::new((-nh).exp(), 0.0);
    for &vk in cfg.inhomogeneities.iter().take(second_sites) {
        term2 *= conv.s(u - vk);
    }
    for &aj in roots.alpha() {
        term2 *= exp_psi_minus(aj, u, cfg.eta, conv)?;
    }
    Ok(term1 + term2)
}

/// Per-site L-operator of the Baxter-weight normalization, as positional
/// 2x2 blocks over the auxiliary space acting on site `k`.
fn bethe_l_blocks(mu: C64, k: usize, cfg: &BetheConfig) -> Result<[[ComplexMatrix; 2]; 2]> {
    use crate::tensor::{embed_site, SiteOperator};
    let space = cfg.space()?;
    let conv = cfg.convention;
    let v = cfg.inhomogeneities[k - 1];
    let w = mu - v;
    let a = conv.s(cfg.eta - w);
    let b = conv.s(w);
    let c = conv.s(cfg.eta);
    let dim = space.dimension();
    let mut diag_a = vec![C64::new(0.0, 0.0); dim];
    let mut diag_d = vec![C64::new(0.0, 0.0); dim];
    for idx in 0..dim {
        if space.spin_at(idx, k) > 0 {
            diag_a[idx] = a;
            diag_d[idx] = b;
        } else {
            diag_a[idx] = b;
            diag_d[idx] = a;
        }
    }
    let t11 = ComplexMatrix::diag(&diag_a)?;
    let t22 = ComplexMatrix::diag(&diag_d)?;
    let t12 = embed_site(SiteOperator::SigmaMinus, k, space)?.scale(c);
    let t21 = embed_site(SiteOperator::SigmaPlus, k, space)?.scale(c);
    Ok([[t11, t12], [t21, t22]])
}

/// Monodromy of the Baxter-weight family with the horizontal-field dressing
/// `diag(e^{-H}, e^{+H})` applied per site on the auxiliary space.
fn bethe_monodromy(mu: C64, cfg: &BetheConfig) -> Result<[[ComplexMatrix; 2]; 2]> {
    let em = C64::new((-cfg.h_field).exp(), 0.0);
    let ep = C64::new(cfg.h_field.exp(), 0.0);
    let dress = |mut t: [[ComplexMatrix; 2]; 2]| {
        t[0][0] = t[0][0].scale(em);
        t[0][1] = t[0][1].scale(em);
        t[1][0] = t[1][0].scale(ep);
        t[1][1] = t[1][1].scale(ep);
        t
    };
    let n = cfg.n_sites;
    let mut t = dress(bethe_l_blocks(mu, n, cfg)?);
    for k in (1..n).rev() {
        let l = dress(bethe_l_blocks(mu, k, cfg)?);
        let new11 = t[0][0].matmul(&l[0][0])?.add(&t[0][1].matmul(&l[1][0])?)?;
        let new12 = t[0][0].matmul(&l[0][1])?.add(&t[0][1].matmul(&l[1][1])?)?;
        let new21 = t[1][0].matmul(&l[0][0])?.add(&t[1][1].matmul(&l[1][0])?)?;
        let new22 = t[1][0].matmul(&l[0][1])?.add(&t[1][1].matmul(&l[1][1])?)?;
        t = [[new11, new12], [new21, new22]];
    }
    Ok(t)
}

/// Transfer matrix of the Bethe-sector family at spectral point `u`.
pub fn bethe_transfer(u: C64, cfg: &BetheConfig) -> Result<ComplexMatrix> {
    let t = bethe_monodromy(u, cfg)?;
    t[0][0].add(&t[1][1])
}

/// Magnon-creation operator of the Bethe-sector family at spectral point `mu`.
pub fn bethe_b_operator(mu: C64, cfg: &BetheConfig) -> Result<ComplexMatrix> {
    Ok(bethe_monodromy(mu, cfg)?[1][0].clone())
}

/// Map from a Bethe root to the spectral argument handed to the creation
/// operator. The displays never pin this; the candidates below are
/// calibrated once per convention on a reference configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralMap {
    Alpha,
    AlphaPlusHalfEta,
    AlphaPlusHalfEtaI,
    IAlpha,
    IAlphaPlusHalfEta,
    IAlphaPlusHalfEtaI,
}

impl SpectralMap {
    pub const ALL: [SpectralMap; 6] = [
        SpectralMap::Alpha,
        SpectralMap::AlphaPlusHalfEta,
        SpectralMap::AlphaPlusHalfEtaI,
        SpectralMap::IAlpha,
        SpectralMap::IAlphaPlusHalfEta,
        SpectralMap::IAlphaPlusHalfEtaI,
    ];

    pub fn apply(self, alpha: C64, eta: C64) -> C64 {
        let i = C64::new(0.0, 1.0);
        match self {
            SpectralMap::Alpha => alpha,
            SpectralMap::AlphaPlusHalfEta => alpha + eta / 2.0,
            SpectralMap::AlphaPlusHalfEtaI => alpha + i * eta / 2.0,
            SpectralMap::IAlpha => i * alpha,
            SpectralMap::IAlphaPlusHalfEta => i * alpha + eta / 2.0,
            SpectralMap::IAlphaPlusHalfEtaI => i * alpha + i * eta / 2.0,
        }
    }
}

impl std::fmt::Display for SpectralMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpectralMap::Alpha => write!(f, "alpha"),
            SpectralMap::AlphaPlusHalfEta => write!(f, "alpha + eta/2"),
            SpectralMap::AlphaPlusHalfEtaI => write!(f, "alpha + i eta/2"),
            SpectralMap::IAlpha => write!(f, "i alpha"),
            SpectralMap::IAlphaPlusHalfEta => write!(f, "i alpha + eta/2"),
            SpectralMap::IAlphaPlusHalfEtaI => write!(f, "i alpha + i eta/2"),
        }
    }
}

/// Unnormalized Bethe state: the ordered product of creation operators at
/// the mapped root arguments applied to the all-down vacuum.
pub fn bethe_state_with_map(roots: &BetheRoots, map: SpectralMap) -> Result<Vec<C64>> {
    let cfg = &roots.config;
    let space = cfg.space()?;
    let dim = space.dimension();
    let mut psi = vec![C64::new(0.0, 0.0); dim];
    psi[space.vacuum_index()] = C64::new(1.0, 0.0);
    for &aj in roots.alpha() {
        let b = bethe_b_operator(map.apply(aj, cfg.eta), cfg)?;
        psi = b.apply(&psi)?;
    }
    let norm = vec_norm(&psi);
    if !norm.is_finite() || norm < 1e-200 {
        return Err(Error::Degenerate(format!("Bethe state collapsed to norm {norm}")));
    }
    Ok(psi)
}

/// Relative eigencheck residual `|t(u) psi - Lambda psi| / (|t(u) psi| + |Lambda psi|)`.
pub fn eigencheck_with_map(roots: &BetheRoots, u: C64, map: SpectralMap) -> Result<f64> {
    let psi = bethe_state_with_map(roots, map)?;
    let t = bethe_transfer(u, &roots.config)?;
    let tpsi = t.apply(&psi)?;
    let lambda = eigenvalue_lambda(roots, u, LambdaSiteProduct::AllSites)?;
    let lpsi: Vec<C64> = psi.iter().map(|z| z * lambda).collect();
    let num = vec_norm(&tpsi.iter().zip(lpsi.iter()).map(|(a, b)| a - b).collect::<Vec<_>>());
    let den = vec_norm(&tpsi) + vec_norm(&lpsi);
    if den == 0.0 {
        return Err(Error::Degenerate("eigencheck on a null state".into()));
    }
    Ok(num / den)
}

/// Calibration record for the root-to-spectral-argument map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralMapCalibration {
    pub chosen: SpectralMap,
    /// Mean eigencheck residual per candidate, reference configuration.
    pub residuals: Vec<(String, f64)>,
}

/// Calibrate the spectral map on the reference configuration
/// `N = 2, n = 1, eta = 0.6, H = 0, v = (0.1, -0.1)` by minimizing the
/// one-magnon eigencheck residual.
pub fn calibrate_spectral_map(convention: Convention) -> Result<SpectralMapCalibration> {
    let cfg = BetheConfig::new(
        2,
        1,
        C64::new(0.6, 0.0),
        0.0,
        vec![C64::new(0.1, 0.0), C64::new(-0.1, 0.0)],
        convention,
    )?;
    let outcome = solve_bethe(&cfg, &grid_seeds_one_root(5), 1e-9)?;
    let roots = outcome
        .roots
        .first()
        .ok_or_else(|| Error::Degenerate("calibration solve produced no roots".into()))?;
    let probes = [C64::new(0.17, 0.05), C64::new(-0.23, 0.11), C64::new(0.31, -0.07)];
    let mut residuals = Vec::new();
    let mut best = (SpectralMap::IAlphaPlusHalfEta, f64::INFINITY);
    for map in SpectralMap::ALL {
        let mut acc = 0.0;
        let mut ok = true;
        for &u in &probes {
            match eigencheck_with_map(roots, u, map) {
                Ok(r) => acc += r,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        let mean = if ok { acc / probes.len() as f64 } else { f64::INFINITY };
        residuals.push((map.to_string(), mean));
        if mean < best.1 {
            best = (map, mean);
        }
    }
    if !best.1.is_finite() {
        return Err(Error::Degenerate("no spectral map candidate produced a finite residual".into()));
    }
    Ok(SpectralMapCalibration { chosen: best.0, residuals })
}

/// The calibrated default map; the choice is pinned by a test against
/// `calibrate_spectral_map` so a silent drift cannot pass.
pub const DEFAULT_SPECTRAL_MAP: SpectralMap = SpectralMap::IAlphaPlusHalfEta;

/// Bethe state under the calibrated default spectral map.
pub fn bethe_state(roots: &BetheRoots) -> Result<Vec<C64>> {
    bethe_state_with_map(roots, DEFAULT_SPECTRAL_MAP)
}

/// Eigencheck under the calibrated default spectral map.
pub fn eigencheck(roots: &BetheRoots, u: C64) -> Result<f64> {
    eigencheck_with_map(roots, u, DEFAULT_SPECTRAL_MAP)
}

fn cothangent(z: C64, convention: Convention) -> C64 {
    match convention {
        Convention::Trigonometric => z.cos() / z.sin(),
        Convention::Hyperbolic => z.cosh() / z.sinh(),
    }
}

/// True logarithmic derivatives of the four Bethe-system factor functions.
///
/// `U1 = d/dv log s(eta/2 + i alpha - v) = -ct(eta/2 + i alpha - v)`,
/// `U2 = d/dv log s(eta/2 - i alpha + v) = +ct(eta/2 - i alpha + v)`,
/// and for the root-pair factors the derivative is taken in the rotated
/// variable `w = i beta`:
/// `U3 = -ct(i(alpha - beta) + eta)`, `U4 = -ct(i(alpha - beta) - eta)`,
/// where `ct` is `cot` or `coth` per convention. The second pair keeps the
/// printed magnitude for `U3`; the printed sign of `U4` does not survive the
/// finite-difference check and is corrected here.
pub fn log_derivative_functions(
    alpha: C64,
    v: C64,
    beta: C64,
    eta: C64,
    convention: Convention,
) -> Result<(C64, C64, C64, C64)> {
    let i = C64::new(0.0, 1.0);
    let args = [
        eta / 2.0 + i * alpha - v,
        eta / 2.0 - i * alpha + v,
        i * (alpha - beta) + eta,
        i * (alpha - beta) - eta,
    ];
    for (idx, z) in args.iter().enumerate() {
        if convention.s(*z).norm() < POLE_TOL {
            return Err(Error::Domain(format!("F{} vanishes at the evaluation point", idx + 1)));
        }
    }
    Ok((
        -cothangent(args[0], convention),
        cothangent(args[1], convention),
        -cothangent(args[2], convention),
        -cothangent(args[3], convention),
    ))
}

/// Basis coefficients with `F1/F2 = S1 F1 + S2 F2` and `F3/F4 = S3 F3 + S4 F4`,
/// where `F1 = s(eta/2 + i alpha - v)`, `F2 = s(eta/2 - i alpha + v)`,
/// `F3 = s(i(alpha - beta) + eta)`, `F4 = s(i(alpha - beta) - eta)`.
///
/// The exponential-split closed forms follow the root-pair displays; the
/// site-pair pair is printed with one kernel argument swapped and is used
/// here in the form that actually satisfies the decomposition identity.
pub fn basis_coefficients(
    alpha: C64,
    v: C64,
    beta: C64,
    eta: C64,
    convention: Convention,
) -> Result<(C64, C64, C64, C64)> {
    let i = C64::new(0.0, 1.0);
    // tau rotates the exponential split: s(z) = (e^{tau z} - e^{-tau z}) / (2 tau).
    let tau = match convention {
        Convention::Trigonometric => i,
        Convention::Hyperbolic => C64::new(1.0, 0.0),
    };
    let x = eta / 2.0 + i * alpha - v;
    let y = eta / 2.0 - i * alpha + v;
    let w = i * (alpha - beta);
    let sx = convention.s(x);
    let sy = convention.s(y);
    let swp = convention.s(w + eta);
    let swm = convention.s(w - eta);
    for (z, name) in [(sx, "s(eta/2 + i alpha - v)"), (sy, "s(eta/2 - i alpha + v)"), (swp, "s(i(alpha-beta) + eta)"), (swm, "s(i(alpha-beta) - eta)")] {
        if z.norm() < POLE_TOL {
            return Err(Error::Domain(format!("basis coefficient denominator {name} vanishes")));
        }
    }
    let two_tau = tau * 2.0;
    let s1 = -(-tau * x).exp() / (two_tau * sx * sy);
    let s2 = (tau * x).exp() / (two_tau * sy * sy);
    let s3 = (tau * (w + eta)).exp() / (two_tau * swp * swm);
    let s4 = -(-tau * (w + eta)).exp() / (two_tau * swm * swm);
    Ok((s1, s2, s3, s4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Convention::{Hyperbolic, Trigonometric};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    struct Xor(u64);
    impl Xor {
        fn unit(&mut self) -> f64 {
            self.0 ^= self.0 << 13;
            self.0 ^= self.0 >> 7;
            self.0 ^= self.0 << 17;
            (self.0 >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        }
        fn c64(&mut self) -> C64 {
            c(self.unit(), self.unit())
        }
    }

    fn cfg_n(n_sites: usize, n_roots: usize, conv: Convention) -> BetheConfig {
        let v: Vec<C64> =
            (0..n_sites).map(|k| c(0.08 * (k as f64 + 1.0) - 0.1, 0.0)).collect();
        BetheConfig::new(n_sites, n_roots, c(0.6, 0.0), 0.0, v, conv).unwrap()
    }

    #[test]
    fn psi_plus_symmetric_point() {
        // u = i alpha makes the ratio s(eta/2)/s(eta/2) = 1, log = 0.
        let alpha = c(0.3, 0.1);
        let u = c(0.0, 1.0) * alpha;
        for conv in [Trigonometric, Hyperbolic] {
            let val = psi_plus(alpha, u, c(0.7, 0.0), conv).unwrap();
            assert!(val.norm() < 1e-14);
        }
    }

    #[test]
    fn psi_round_trip() {
        let mut rng = Xor(0x123456789);
        for conv in [Trigonometric, Hyperbolic] {
            for _ in 0..8 {
                let (alpha, u, eta) = (rng.c64(), rng.c64(), c(0.8, 0.1));
                let direct = exp_psi_plus(alpha, u, eta, conv).unwrap();
                let via_log = psi_plus(alpha, u, eta, conv).unwrap().exp();
                assert!((direct - via_log).norm() < 1e-12 * direct.norm().max(1.0));
            }
        }
    }

    #[test]
    fn psi_minus_forced_pole() {
        // u = eta/2 + i alpha zeroes the denominator s(u - eta/2 - i alpha).
        let alpha = c(0.2, -0.4);
        let eta = c(0.9, 0.0);
        let u = eta / 2.0 + c(0.0, 1.0) * alpha;
        assert!(matches!(psi_minus(alpha, u, eta, Hyperbolic), Err(Error::Domain(_))));
    }

    #[test]
    fn momentum_odd_and_zero() {
        assert!(momentum_p(c(0.0, 0.0), c(0.7, 0.0), Hyperbolic).unwrap().norm() < 1e-14);
        let mut rng = Xor(0xdeadbeef);
        for _ in 0..8 {
            let alpha = rng.c64().scale(0.3);
            let p = momentum_p(alpha, c(0.7, 0.0), Hyperbolic).unwrap();
            let pm = momentum_p(-alpha, c(0.7, 0.0), Hyperbolic).unwrap();
            assert!((p + pm).norm() < 1e-12);
        }
        // Forced pole at i alpha = -eta/2.
        let eta = c(0.7, 0.0);
        let bad = eta / 2.0 * c(0.0, 1.0); // i alpha = -eta/2 -> alpha = i eta/2
        assert!(matches!(momentum_p(bad, eta, Hyperbolic), Err(Error::Domain(_))));
    }

    #[test]
    fn theta_reflection_and_diagonal() {
        let eta = c(0.55, 0.0);
        assert!((theta(c(0.3, 0.1), c(0.3, 0.1), eta, Hyperbolic).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        let mut rng = Xor(0xfaceb00c);
        for _ in 0..8 {
            let (a, b) = (rng.c64().scale(0.5), rng.c64().scale(0.5));
            let t1 = theta(a, b, eta, Hyperbolic).unwrap();
            let t2 = theta(b, a, eta, Hyperbolic).unwrap();
            assert!((t1 * t2 - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn theta_momentum_consistency() {
        // The momentum-space middle expression
        //   [1 + e^{p(a)+p(b)} - 2 Delta e^{p(a)}] / [1 + e^{p(a)+p(b)} - 2 Delta e^{p(b)}]
        // reproduces the kernel ratio with Delta the disorder parameter of
        // the Baxter family (-cosh eta, or -cos eta under the trig flag).
        // The defined p is already i times the real phase, so the displayed
        // exp(i p) reads as exp(p) of the defined function.
        let eta = c(0.62, 0.0);
        let mut rng = Xor(0x77aa77aa);
        for conv in [Hyperbolic, Trigonometric] {
            let delta = match conv {
                Hyperbolic => -eta.cosh(),
                Trigonometric => -eta.cos(),
            };
            let mut checked = 0;
            while checked < 10 {
                let a = c(0.6 * rng.unit(), 0.0);
                let b = c(0.6 * rng.unit(), 0.0);
                if (a - b).norm() < 0.05 || a.norm() < 0.05 || b.norm() < 0.05 {
                    continue;
                }
                checked += 1;
                let ea = momentum_p(a, eta, conv).unwrap().exp();
                let eb = momentum_p(b, eta, conv).unwrap().exp();
                let middle = (c(1.0, 0.0) + ea * eb - delta * ea * 2.0)
                    / (c(1.0, 0.0) + ea * eb - delta * eb * 2.0);
                let ratio = theta(a, b, eta, conv).unwrap();
                assert!(
                    (middle - ratio).norm() < 1e-10,
                    "{conv}: middle {middle} vs ratio {ratio} at a={a}, b={b}"
                );
            }
        }
    }

    #[test]
    fn residual_empty_and_symmetric_cases() {
        let cfg = cfg_n(2, 0, Hyperbolic);
        let roots = BetheRoots::new(vec![], cfg).unwrap();
        assert!(bethe_residual(&roots).unwrap().is_empty());

        // n = 1, H = 0, N = 2, v = (0, 0): alpha = 0 solves exactly.
        let cfg = BetheConfig::new(2, 1, c(0.6, 0.0), 0.0, vec![c(0.0, 0.0); 2], Hyperbolic).unwrap();
        let roots = BetheRoots::new(vec![c(0.0, 0.0)], cfg).unwrap();
        let res = bethe_residual(&roots).unwrap();
        assert!(res[0].norm() < 1e-14);
    }

    #[test]
    fn coinciding_roots_rejected() {
        let cfg = cfg_n(3, 2, Hyperbolic);
        assert!(matches!(
            BetheRoots::new(vec![c(0.1, 0.2), c(0.1, 0.2)], cfg),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn residual_invariant_under_root_permutation() {
        let cfg = cfg_n(3, 2, Hyperbolic);
        let r1 = BetheRoots::new(vec![c(0.4, 0.1), c(-0.2, 0.3)], cfg.clone()).unwrap();
        let r2 = BetheRoots::new(vec![c(-0.2, 0.3), c(0.4, 0.1)], cfg).unwrap();
        // Canonicalization makes the stored order identical, so the residual
        // vectors agree entrywise.
        let v1 = bethe_residual(&r1).unwrap();
        let v2 = bethe_residual(&r2).unwrap();
        for (a, b) in v1.iter().zip(v2.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn solver_zero_roots() {
        let cfg = cfg_n(2, 0, Hyperbolic);
        let out = solve_bethe(&cfg, &[], 1e-10).unwrap();
        assert_eq!(out.roots.len(), 1);
        assert!(out.roots[0].alpha().is_empty());
    }

    #[test]
    fn solver_dedups_duplicate_seeds() {
        let cfg = cfg_n(2, 1, Hyperbolic);
        let seed = vec![c(0.1, 0.4)];
        let out = solve_bethe(&cfg, &[seed.clone(), seed], 1e-10).unwrap();
        assert!(out.roots.len() <= 1, "duplicate seeds must not double-count roots");
    }

    #[test]
    fn solver_finds_one_magnon_roots() {
        for conv in [Hyperbolic, Trigonometric] {
            let cfg = BetheConfig::new(
                2,
                1,
                c(0.6, 0.0),
                0.0,
                vec![c(0.1, 0.0), c(-0.1, 0.0)],
                conv,
            )
            .unwrap();
            let out = solve_bethe(&cfg, &grid_seeds_one_root(5), 1e-10).unwrap();
            assert!(!out.roots.is_empty(), "{conv}: no roots found");
            for roots in &out.roots {
                let res = bethe_residual(roots).unwrap();
                assert!(res[0].norm() < 1e-10);
            }
        }
    }

    #[test]
    fn vacuum_lambda_matches_transfer_diagonal() {
        let mut rng = Xor(0xabc123);
        for conv in [Hyperbolic, Trigonometric] {
            for n in 2..=5 {
                let v: Vec<C64> = (0..n).map(|_| rng.c64().scale(0.2)).collect();
                let cfg = BetheConfig::new(n, 0, c(0.7, 0.0), 0.0, v, conv).unwrap();
                let roots = BetheRoots::new(vec![], cfg.clone()).unwrap();
                let u = rng.c64().scale(0.3);
                let lambda = eigenvalue_lambda(&roots, u, LambdaSiteProduct::AllSites).unwrap();
                let t = bethe_transfer(u, &cfg).unwrap();
                let space = cfg.space().unwrap();
                let vac = space.vacuum_index();
                let diag = t.get(vac, vac);
                assert!(
                    (lambda - diag).norm() < 1e-12 * lambda.norm().max(1.0),
                    "{conv} N={n}: Lambda_0 {lambda} vs <vac|t|vac> {diag}"
                );
                // And the vacuum is an exact eigenvector.
                let mut psi = vec![c(0.0, 0.0); space.dimension()];
                psi[vac] = c(1.0, 0.0);
                let tpsi = t.apply(&psi).unwrap();
                let dev: f64 = tpsi
                    .iter()
                    .enumerate()
                    .map(|(i, z)| if i == vac { (z - lambda).norm_sqr() } else { z.norm_sqr() })
                    .sum::<f64>()
                    .sqrt();
                assert!(dev < 1e-12 * lambda.norm().max(1.0));
            }
        }
    }

    #[test]
    fn vacuum_lambda_with_field() {
        // The e^{+-NH} pairing in the closed form matches the dressed
        // operator for H != 0 as well.
        let cfg = BetheConfig::new(
            3,
            0,
            c(0.55, 0.0),
            0.3,
            vec![c(0.05, 0.0), c(-0.12, 0.0), c(0.02, 0.0)],
            Hyperbolic,
        )
        .unwrap();
        let roots = BetheRoots::new(vec![], cfg.clone()).unwrap();
        let u = c(0.21, 0.13);
        let lambda = eigenvalue_lambda(&roots, u, LambdaSiteProduct::AllSites).unwrap();
        let t = bethe_transfer(u, &cfg).unwrap();
        let vac = cfg.space().unwrap().vacuum_index();
        assert!((lambda - t.get(vac, vac)).norm() < 1e-12 * lambda.norm().max(1.0));
    }

    #[test]
    fn site_product_readings_discriminated_by_vacuum_oracle() {
        // The root-count reading of the second product disagrees with the
        // operator at n = 0 for generic inhomogeneities.
        let mut rng = Xor(0x5eed);
        let v: Vec<C64> = (0..3).map(|_| rng.c64().scale(0.2)).collect();
        let cfg = BetheConfig::new(3, 0, c(0.7, 0.0), 0.0, v, Hyperbolic).unwrap();
        let roots = BetheRoots::new(vec![], cfg.clone()).unwrap();
        let u = c(0.4, 0.2);
        let all = eigenvalue_lambda(&roots, u, LambdaSiteProduct::AllSites).unwrap();
        let trunc = eigenvalue_lambda(&roots, u, LambdaSiteProduct::RootCount).unwrap();
        let t = bethe_transfer(u, &cfg).unwrap();
        let vac = cfg.space().unwrap().vacuum_index();
        let diag = t.get(vac, vac);
        assert!((all - diag).norm() < 1e-12 * diag.norm().max(1.0));
        assert!((trunc - diag).norm() > 1e-3, "readings must differ at n = 0");
    }

    #[test]
    fn calibration_selects_rotated_half_shift() {
        for conv in [Hyperbolic, Trigonometric] {
            let cal = calibrate_spectral_map(conv).unwrap();
            assert_eq!(
                cal.chosen, DEFAULT_SPECTRAL_MAP,
                "{conv}: calibration drifted: {:?}",
                cal.residuals
            );
        }
    }

    #[test]
    fn one_magnon_state_lives_in_one_up_sector() {
        let cfg = cfg_n(3, 1, Hyperbolic);
        let out = solve_bethe(&cfg, &grid_seeds_one_root(5), 1e-10).unwrap();
        let roots = &out.roots[0];
        let psi = bethe_state(roots).unwrap();
        let space = cfg.space().unwrap();
        let mut outside = 0.0f64;
        let mut inside = 0.0f64;
        for (idx, amp) in psi.iter().enumerate() {
            if space.up_count(idx) == 1 {
                inside += amp.norm_sqr();
            } else {
                outside += amp.norm_sqr();
            }
        }
        assert!(outside.sqrt() < 1e-13);
        assert!(inside > 0.0);
    }

    #[test]
    fn state_symmetric_under_root_order() {
        // Creation operators at distinct parameters commute, so the two
        // application orders give collinear states.
        let cfg = cfg_n(3, 2, Hyperbolic);
        let a1 = c(0.35, 0.4);
        let a2 = c(-0.15, -0.2);
        let map = DEFAULT_SPECTRAL_MAP;
        let apply_in_order = |first: C64, second: C64| -> Vec<C64> {
            let space = cfg.space().unwrap();
            let mut psi = vec![c(0.0, 0.0); space.dimension()];
            psi[space.vacuum_index()] = c(1.0, 0.0);
            for mu in [first, second] {
                let b = bethe_b_operator(map.apply(mu, cfg.eta), &cfg).unwrap();
                psi = b.apply(&psi).unwrap();
            }
            psi
        };
        let p12 = apply_in_order(a1, a2);
        let p21 = apply_in_order(a2, a1);
        let dot = |x: &[C64], y: &[C64]| -> C64 {
            x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
        };
        let n12 = vec_norm(&p12);
        let n21 = vec_norm(&p21);
        let overlap = dot(&p12, &p21).norm() / (n12 * n21);
        assert!((overlap - 1.0).abs() < 1e-10, "collinearity broke: {overlap}");
    }

    #[test]
    fn eigencheck_on_shell_and_detector() {
        let mut rng = Xor(0xc0ffee);
        for conv in [Hyperbolic, Trigonometric] {
            for n in [2usize, 3] {
                let v: Vec<C64> = (0..n).map(|_| c(0.2 * rng.unit(), 0.0)).collect();
                let cfg = BetheConfig::new(n, 1, c(0.6, 0.0), 0.0, v, conv).unwrap();
                let out = solve_bethe(&cfg, &grid_seeds_one_root(5), 1e-10).unwrap();
                assert!(!out.roots.is_empty(), "{conv} N={n}: no roots");
                let roots = &out.roots[0];
                for _ in 0..3 {
                    let u = rng.c64().scale(0.3);
                    let r = eigencheck(roots, u).unwrap();
                    assert!(r < 1e-8, "{conv} N={n}: eigencheck residual {r}");
                }
                // Off-shell perturbation must be loud.
                let shifted = BetheRoots::new(
                    roots.alpha().iter().map(|a| a + c(0.05, 0.0)).collect(),
                    cfg.clone(),
                )
                .unwrap();
                let r = eigencheck(&shifted, c(0.17, 0.09)).unwrap();
                assert!(r > 1e-2, "{conv} N={n}: detector too quiet: {r}");
            }
        }
    }

    #[test]
    fn log_derivatives_match_finite_differences() {
        let h = 1e-5;
        let mut rng = Xor(0x1a2b3c4d);
        for conv in [Hyperbolic, Trigonometric] {
            let mut checked = 0;
            while checked < 10 {
                let alpha = rng.c64().scale(0.6);
                let beta = rng.c64().scale(0.6);
                let v = rng.c64().scale(0.6);
                let eta = c(0.7, 0.0);
                let i = c(0.0, 1.0);
                // Pole margin 0.1 on every factor argument.
                let args = [
                    eta / 2.0 + i * alpha - v,
                    eta / 2.0 - i * alpha + v,
                    i * (alpha - beta) + eta,
                    i * (alpha - beta) - eta,
                ];
                if args.iter().any(|z| conv.s(*z).norm() < 0.1) {
                    continue;
                }
                checked += 1;
                let (u1, u2, u3, u4) =
                    log_derivative_functions(alpha, v, beta, eta, conv).unwrap();
                let f1 = |vv: C64| conv.s(eta / 2.0 + i * alpha - vv);
                let f2 = |vv: C64| conv.s(eta / 2.0 - i * alpha + vv);
                let fd1 = (f1(v + h) - f1(v - h)) / (2.0 * h) / f1(v);
                let fd2 = (f2(v + h) - f2(v - h)) / (2.0 * h) / f2(v);
                assert!((fd1 - u1).norm() < 1e-6, "{conv} U1: {fd1} vs {u1}");
                assert!((fd2 - u2).norm() < 1e-6, "{conv} U2: {fd2} vs {u2}");
                // Root-pair factors differentiate in the rotated variable
                // w = i beta: stepping w by +-h steps beta by -+ i h.
                let f3 = |bb: C64| conv.s(i * (alpha - bb) + eta);
                let f4 = |bb: C64| conv.s(i * (alpha - bb) - eta);
                let ih = c(0.0, h);
                let fd3 = (f3(beta - ih) - f3(beta + ih)) / (2.0 * h) / f3(beta);
                let fd4 = (f4(beta - ih) - f4(beta + ih)) / (2.0 * h) / f4(beta);
                assert!((fd3 - u3).norm() < 1e-6, "{conv} U3: {fd3} vs {u3}");
                assert!((fd4 - u4).norm() < 1e-6, "{conv} U4: {fd4} vs {u4}");
            }
        }
    }

    #[test]
    fn u3_at_coincident_roots() {
        let (_, _, u3, _) =
            log_derivative_functions(c(0.3, 0.0), c(0.1, 0.0), c(0.3, 0.0), c(0.7, 0.0), Hyperbolic)
                .unwrap();
        let expect = -(c(0.7, 0.0).cosh() / c(0.7, 0.0).sinh());
        assert!((u3 - expect).norm() < 1e-14);
    }

    #[test]
    fn derivative_ratio_reproduces_mapped_system() {
        // (U1 F1)/(U2 F2) equals the finite-difference quotient dF1/dF2.
        let h = 1e-5;
        let mut rng = Xor(0x9f8e7d6c);
        let conv = Hyperbolic;
        let eta = c(0.65, 0.0);
        let i = c(0.0, 1.0);
        let mut checked = 0;
        while checked < 10 {
            let alpha = rng.c64().scale(0.5);
            let v = rng.c64().scale(0.5);
            let args = [eta / 2.0 + i * alpha - v, eta / 2.0 - i * alpha + v];
            if args.iter().any(|z| conv.s(*z).norm() < 0.1) {
                continue;
            }
            checked += 1;
            let (u1, u2, _, _) =
                log_derivative_functions(alpha, v, c(0.9, 0.0), eta, conv).unwrap();
            let f1 = |vv: C64| conv.s(eta / 2.0 + i * alpha - vv);
            let f2 = |vv: C64| conv.s(eta / 2.0 - i * alpha + vv);
            let df1 = (f1(v + h) - f1(v - h)) / (2.0 * h);
            let df2 = (f2(v + h) - f2(v - h)) / (2.0 * h);
            let lhs = df1 / df2;
            let rhs = (u1 * f1(v)) / (u2 * f2(v));
            assert!((lhs - rhs).norm() < 1e-8, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn basis_decomposition_identities() {
        let mut rng = Xor(0x44556677);
        for conv in [Hyperbolic, Trigonometric] {
            let eta = c(0.7, 0.0);
            let i = c(0.0, 1.0);
            let mut checked = 0;
            while checked < 10 {
                let alpha = rng.c64().scale(0.6);
                let beta = rng.c64().scale(0.6);
                let v = rng.c64().scale(0.6);
                let x = eta / 2.0 + i * alpha - v;
                let y = eta / 2.0 - i * alpha + v;
                let w = i * (alpha - beta);
                if [x, y, w + eta, w - eta].iter().any(|z| conv.s(*z).norm() < 0.1) {
                    continue;
                }
                checked += 1;
                let (s1, s2, s3, s4) = basis_coefficients(alpha, v, beta, eta, conv).unwrap();
                let (f1, f2) = (conv.s(x), conv.s(y));
                let (f3, f4) = (conv.s(w + eta), conv.s(w - eta));
                let lhs12 = s1 * f1 + s2 * f2 - f1 / f2;
                let lhs34 = s3 * f3 + s4 * f4 - f3 / f4;
                assert!(lhs12.norm() < 1e-10, "{conv} F1/F2 residual {lhs12}");
                assert!(lhs34.norm() < 1e-10, "{conv} F3/F4 residual {lhs34}");
            }
        }
    }

    #[test]
    fn basis_coefficients_forced_pole() {
        // exp(2(eta/2 + i alpha - v)) = 1 means s(x) = 0.
        let eta = c(0.7, 0.0);
        let alpha = c(0.0, 0.35); // i alpha = -0.35 -> x = 0
        let v = c(0.0, 0.0);
        assert!(matches!(
            basis_coefficients(alpha, v, c(0.5, 0.0), eta, Hyperbolic),
            Err(Error::Domain(_))
        ));
    }
}
