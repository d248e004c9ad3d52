//! Spectral quantities and the theoretical bounds they are checked against:
//! the inf-sup constant, eigenvalues of the scaled Schur complement and of
//! the block-diagonal preconditioned operator, and the closed-form MINRES /
//! GMRES residual bounds.
//!
//! All builders use the sparse direct factor of `A` to form pressure-sized
//! dense operators, then a dense symmetric eigensolver. Full-system spectra
//! are limited to coarse meshes; extreme eigenvalues of larger systems fall
//! back to (deflated) power iteration.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::krylov::dot;
use crate::sparse::incomplete_cholesky;
use crate::system::RegularizedSystem;

/// Hard cap for dense full-system eigensolves.
pub const DENSE_EIG_LIMIT: usize = 6000;

/// An eigenvalue reported outside its predicted region.
#[derive(Debug, Clone)]
pub struct Violation {
    pub eigenvalue: f64,
    /// Distance to the nearest allowed region (positive = outside).
    pub margin: f64,
    pub context: String,
}

/// Aggregate spectral report for one system configuration.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub beta: f64,
    pub gamma_min_pos: f64,
    pub gamma_max: f64,
    /// Near-zero eigenvalue of the preconditioned operator, when computed.
    pub lambda1_mu: Option<f64>,
    /// Predicted eigenvalue intervals (diag-preconditioned operator).
    pub intervals: Vec<(f64, f64)>,
    pub violations: Vec<Violation>,
}

/// Pressure-sized dense symmetric operator
/// `M_p^{-1/2} B° A^{-1} (B°)^T M_p^{-1/2}` (no regularization term).
pub fn schur_core_dense(sys: &RegularizedSystem) -> Result<DMatrix<f64>> {
    let np = sys.n_pressure();
    let nv = sys.n_velocity();
    let factor = incomplete_cholesky(&sys.blocks.a, 0.0, true)?;
    let mp = &sys.blocks.mp;
    let mut t = DMatrix::zeros(np, np);
    let mut bt = vec![0.0; nv];
    let mut ainv = vec![0.0; nv];
    let mut col = vec![0.0; np];
    for j in 0..np {
        bt.iter_mut().for_each(|v| *v = 0.0);
        // Column j of B0^T M_p^{-1/2}: scaled row j of B0.
        let scale = 1.0 / mp[j].sqrt();
        let (ci, cv) = sys.blocks.b0.row(j);
        for (&c, &v) in ci.iter().zip(cv) {
            bt[c] = v * scale;
        }
        factor.solve_into(&bt, &mut ainv);
        sys.blocks.b0.matvec(&ainv, &mut col);
        for i in 0..np {
            t[(i, j)] = col[i] / mp[i].sqrt();
        }
    }
    // Symmetrize against factorization roundoff.
    let tt = t.transpose();
    Ok((t + tt) * 0.5)
}

/// Result of the inf-sup computation.
#[derive(Debug, Clone)]
pub struct InfSupReport {
    pub beta: f64,
    /// All eigenvalues `gamma` of `M_p^{-1} B° A^{-1} (B°)^T`, ascending.
    pub gammas: Vec<f64>,
    /// `‖T v_1‖` for the known null vector `v_1` (should be ~0).
    pub v1_residual: f64,
}

/// Inf-sup constant: `beta^2` is the smallest positive eigenvalue of the
/// scaled Schur core; the single zero eigenvalue (constant pressures) is
/// excluded by deflating the known null vector
/// `v_1 = (|K_1|^{1/2}, ..., |K_N|^{1/2}) / |Ω|^{1/2}`.
pub fn infsup_beta(sys: &RegularizedSystem) -> Result<InfSupReport> {
    let np = sys.n_pressure();
    if np > DENSE_EIG_LIMIT {
        return infsup_beta_iterative(sys);
    }
    let t = schur_core_dense(sys)?;
    let omega = sys.omega_measure();
    let v1 = DVector::from_iterator(np, sys.blocks.mp.iter().map(|&m| (m / omega).sqrt()));
    let v1_residual = (&t * &v1).norm();

    let mut gammas: Vec<f64> = t.symmetric_eigenvalues().iter().cloned().collect();
    gammas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Deflate exactly one (near-)zero eigenvalue.
    let gamma_min_pos = *gammas
        .get(1)
        .ok_or_else(|| Error::Eigensolver("pressure space too small".into()))?;
    if gamma_min_pos <= 0.0 {
        return Err(Error::Eigensolver(format!(
            "second-smallest Schur eigenvalue is not positive: {gamma_min_pos}"
        )));
    }
    Ok(InfSupReport { beta: gamma_min_pos.sqrt(), gammas, v1_residual })
}

/// Deflated power/inverse iteration fallback for large pressure spaces:
/// `gamma_max` by power iteration, `beta^2` by inverse iteration with
/// conjugate gradients on the deflated operator. Accuracy is limited by the
/// clustering of the lower Schur spectrum; expect ~1e-4 relative for beta.
fn infsup_beta_iterative(sys: &RegularizedSystem) -> Result<InfSupReport> {
    let np = sys.n_pressure();
    let nv = sys.n_velocity();
    let factor = incomplete_cholesky(&sys.blocks.a, 0.0, true)?;
    let omega = sys.omega_measure();
    let v1: Vec<f64> = sys.blocks.mp.iter().map(|&m| (m / omega).sqrt()).collect();

    let apply_t = |p: &[f64], out: &mut [f64]| {
        let mut bt = vec![0.0; nv];
        let mut ainv = vec![0.0; nv];
        let scaled: Vec<f64> = p
            .iter()
            .zip(&sys.blocks.mp)
            .map(|(&v, &m)| v / m.sqrt())
            .collect();
        sys.blocks.b0.matvec_transpose_add(1.0, &scaled, &mut bt);
        factor.solve_into(&bt, &mut ainv);
        let mut col = vec![0.0; np];
        sys.blocks.b0.matvec(&ainv, &mut col);
        for ((o, &c), &m) in out.iter_mut().zip(&col).zip(&sys.blocks.mp) {
            *o = c / m.sqrt();
        }
    };
    let deflate = |x: &mut [f64]| {
        let c = dot(x, &v1);
        for (xi, vi) in x.iter_mut().zip(&v1) {
            *xi -= c * vi;
        }
    };

    // Power iteration for gamma_max.
    let mut x: Vec<f64> = (0..np).map(|i| ((i * 2654435761) % 1000) as f64 / 1000.0 - 0.5).collect();
    deflate(&mut x);
    let mut gamma_max = 0.0;
    let mut y = vec![0.0; np];
    for _ in 0..200 {
        let nx = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        apply_t(&x, &mut y);
        deflate(&mut y);
        let next = dot(&x, &y);
        if (next - gamma_max).abs() <= 1e-10 * next.abs().max(1e-300) {
            gamma_max = next;
            break;
        }
        gamma_max = next;
        std::mem::swap(&mut x, &mut y);
    }

    // Inverse iteration for the smallest positive eigenvalue: solve
    // T z = x on the deflated subspace by CG (T is SPD there), estimate the
    // eigenvalue by the Rayleigh quotient of the iterate.
    let mut x: Vec<f64> = (0..np).map(|i| ((i * 40503) % 997) as f64 / 997.0 - 0.5).collect();
    deflate(&mut x);
    let mut beta2 = 0.0;
    let mut tz = vec![0.0; np];
    for _ in 0..200 {
        let nx = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        // CG on T z = x.
        let mut z = vec![0.0; np];
        let mut r = x.clone();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        let mut tp = vec![0.0; np];
        for _ in 0..400 {
            apply_t(&p, &mut tp);
            deflate(&mut tp);
            let alpha = rr / dot(&p, &tp);
            for (zi, pi) in z.iter_mut().zip(&p) {
                *zi += alpha * pi;
            }
            for (ri, ti) in r.iter_mut().zip(&tp) {
                *ri -= alpha * ti;
            }
            let rr_new = dot(&r, &r);
            if rr_new.sqrt() <= 1e-12 {
                break;
            }
            let bta = rr_new / rr;
            rr = rr_new;
            for (pi, ri) in p.iter_mut().zip(&r) {
                *pi = ri + bta * *pi;
            }
        }
        deflate(&mut z);
        let nz = dot(&z, &z).sqrt();
        z.iter_mut().for_each(|v| *v /= nz);
        apply_t(&z, &mut tz);
        deflate(&mut tz);
        let next = dot(&z, &tz);
        let settled = (next - beta2).abs() <= 1e-12 * next.abs().max(1e-300);
        beta2 = next;
        if settled {
            break;
        }
        x = z;
    }

    Ok(InfSupReport {
        beta: beta2.sqrt(),
        gammas: vec![0.0, beta2, gamma_max],
        v1_residual: f64::NAN,
    })
}

/// Spectrum of `M_p^{-1} S` with the Schur eigenvalue bounds checked.
#[derive(Debug, Clone)]
pub struct SchurSpectrum {
    /// Ascending eigenvalues of `M_p^{-1} S`.
    pub eigenvalues: Vec<f64>,
    pub lambda1: f64,
    pub beta2: f64,
    /// `[mu d11/|Ω|, mu d11/|K1|]` for `lambda_1`.
    pub lambda1_interval: (f64, f64),
    /// `[beta^2 - mu d11/|K1|, d + mu d11/|K1|]` for the rest.
    pub cluster_interval: (f64, f64),
    pub violations: Vec<Violation>,
}

/// Dense eigensolve of the scaled Schur complement
/// `mu M_p^{-1/2} D M_p^{-1/2} + M_p^{-1/2} B° A^{-1} (B°)^T M_p^{-1/2}`,
/// with the bound check at `1e-8` absolute slack. At `mu = 0` the single
/// zero eigenvalue is expected (deflated from the cluster check).
pub fn eig_schur(sys: &RegularizedSystem) -> Result<SchurSpectrum> {
    let np = sys.n_pressure();
    if np > DENSE_EIG_LIMIT {
        return Err(Error::Eigensolver(format!(
            "pressure space of size {np} exceeds the dense eigensolver limit"
        )));
    }
    let mut t = schur_core_dense(sys)?;
    // beta^2 from the unperturbed core.
    let mut gammas: Vec<f64> = t.symmetric_eigenvalues().iter().cloned().collect();
    gammas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let beta2 = gammas[1];

    let rho = sys.scaled_regularization_norm();
    t[(sys.pinned_index, sys.pinned_index)] += rho;
    let mut eigenvalues: Vec<f64> = t.symmetric_eigenvalues().iter().cloned().collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let d = sys.blocks.dim as f64;
    let lambda1_interval = (
        sys.mu * sys.d11 / sys.omega_measure(),
        sys.mu * sys.d11 / sys.k1_measure(),
    );
    let cluster_interval = (beta2 - rho, d + rho);
    let slack = 1e-8;

    let mut violations = Vec::new();
    let lambda1 = eigenvalues[0];
    if sys.mu > 0.0
        && (lambda1 < lambda1_interval.0 - slack || lambda1 > lambda1_interval.1 + slack)
    {
        // Membership in the union still counts when the intervals overlap.
        let in_cluster =
            lambda1 >= cluster_interval.0 - slack && lambda1 <= cluster_interval.1 + slack;
        if !in_cluster {
            let margin = (lambda1_interval.0 - lambda1)
                .max(lambda1 - lambda1_interval.1)
                .min((cluster_interval.0 - lambda1).max(lambda1 - cluster_interval.1));
            violations.push(Violation {
                eigenvalue: lambda1,
                margin,
                context: format!(
                    "lambda_1 outside [{:.3e}, {:.3e}] ∪ [{:.3e}, {:.3e}]",
                    lambda1_interval.0, lambda1_interval.1, cluster_interval.0, cluster_interval.1
                ),
            });
        }
    }
    for &ev in eigenvalues.iter().skip(1) {
        let in_cluster = ev >= cluster_interval.0 - slack && ev <= cluster_interval.1 + slack;
        let in_lambda1 = sys.mu > 0.0
            && ev >= lambda1_interval.0 - slack
            && ev <= lambda1_interval.1 + slack;
        if !in_cluster && !in_lambda1 {
            violations.push(Violation {
                eigenvalue: ev,
                margin: (cluster_interval.0 - ev).max(ev - cluster_interval.1),
                context: format!(
                    "cluster eigenvalue outside [{:.3e}, {:.3e}]",
                    cluster_interval.0, cluster_interval.1
                ),
            });
        }
    }

    Ok(SchurSpectrum {
        eigenvalues,
        lambda1,
        beta2,
        lambda1_interval,
        cluster_interval,
        violations,
    })
}

/// Spectrum of the symmetrically preconditioned operator
/// `P_d^{-1/2} 𝒜 P_d^{-1/2}` with the three-region bound check.
#[derive(Debug, Clone)]
pub struct DiagPrecondSpectrum {
    pub eigenvalues: Vec<f64>,
    /// The single near-zero eigenvalue `lambda_1(mu)`.
    pub lambda1_mu: f64,
    /// First-order prediction `-mu d11 / |Ω|`.
    pub lambda1_predicted: f64,
    /// Negative and positive regions (each widened by `mu d11/|K1|`).
    pub regions: [(f64, f64); 2],
    pub beta2: f64,
    pub violations: Vec<Violation>,
}

/// Dense eigensolve of `P_d^{-1/2} 𝒜 P_d^{-1/2}` (coarse meshes only).
pub fn eig_diag_preconditioned(sys: &RegularizedSystem) -> Result<DiagPrecondSpectrum> {
    let n = sys.n_total();
    if n > DENSE_EIG_LIMIT {
        return Err(Error::Eigensolver(format!(
            "system of size {n} exceeds the dense eigensolver limit"
        )));
    }
    let nv = sys.n_velocity();
    let np = sys.n_pressure();

    // A^{-1/2} via a dense symmetric eigendecomposition.
    let a = sys.blocks.a.to_dense();
    let ae = nalgebra::SymmetricEigen::new(a);
    let mut inv_sqrt = DMatrix::zeros(nv, nv);
    for (i, &ev) in ae.eigenvalues.iter().enumerate() {
        if ev <= 0.0 {
            return Err(Error::Eigensolver(format!("A has nonpositive eigenvalue {ev}")));
        }
        let s = 1.0 / ev.sqrt();
        let q = ae.eigenvectors.column(i);
        // inv_sqrt += s * q q^T  (rank-one accumulation)
        for r in 0..nv {
            let qr = q[r] * s;
            if qr == 0.0 {
                continue;
            }
            for c in 0..nv {
                inv_sqrt[(r, c)] += qr * q[c];
            }
        }
    }

    let full = sys.to_dense();
    let mut scaled = full.clone();
    // Rows/cols 0..nv by A^{-1/2}; rows/cols nv.. by M_p^{-1/2}.
    let a12 = &inv_sqrt;
    let a_block = scaled.view((0, 0), (nv, nv)).clone_owned();
    let tmp = a12 * a_block * a12;
    scaled.view_mut((0, 0), (nv, nv)).copy_from(&tmp);
    let b_block = full.view((nv, 0), (np, nv)).clone_owned();
    let b_scaled = {
        let mut b = b_block * a12;
        for i in 0..np {
            let s = 1.0 / sys.blocks.mp[i].sqrt();
            for j in 0..nv {
                b[(i, j)] *= s;
            }
        }
        b
    };
    scaled.view_mut((nv, 0), (np, nv)).copy_from(&b_scaled);
    scaled.view_mut((0, nv), (nv, np)).copy_from(&b_scaled.transpose());
    for i in 0..np {
        for j in 0..np {
            let v = full[(nv + i, nv + j)]
                / (sys.blocks.mp[i].sqrt() * sys.blocks.mp[j].sqrt());
            scaled[(nv + i, nv + j)] = v;
        }
    }
    let sym = (&scaled + scaled.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = sym.symmetric_eigenvalues().iter().cloned().collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let infsup = infsup_beta(sys)?;
    let beta2 = infsup.beta * infsup.beta;
    let d = sys.blocks.dim as f64;
    let rho = sys.scaled_regularization_norm();
    let neg = (
        0.5 * (1.0 - (1.0 + 4.0 * d).sqrt()) - rho,
        0.5 * (1.0 - (1.0 + 4.0 * beta2).sqrt()) + rho,
    );
    let pos = (
        0.5 * (1.0 + (1.0 + 4.0 * beta2).sqrt()) - rho,
        0.5 * (1.0 + (1.0 + 4.0 * d).sqrt()) + rho,
    );
    let lambda1_predicted = -sys.mu * sys.d11 / sys.omega_measure();

    // The near-zero eigenvalue: smallest magnitude.
    let lambda1_mu = eigenvalues
        .iter()
        .cloned()
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .unwrap();

    let slack = 1e-8;
    let mut violations = Vec::new();
    for &ev in &eigenvalues {
        let in_neg = ev >= neg.0 - slack && ev <= neg.1 + slack;
        let in_pos = ev >= pos.0 - slack && ev <= pos.1 + slack;
        let near_zero = (ev - lambda1_mu).abs() <= slack;
        if !(in_neg || in_pos || near_zero) {
            let margin = (neg.0 - ev)
                .max(ev - neg.1)
                .min((pos.0 - ev).max(ev - pos.1));
            violations.push(Violation {
                eigenvalue: ev,
                margin,
                context: format!(
                    "outside [{:.4}, {:.4}] ∪ {{λ1}} ∪ [{:.4}, {:.4}]",
                    neg.0, neg.1, pos.0, pos.1
                ),
            });
        }
    }

    Ok(DiagPrecondSpectrum {
        eigenvalues,
        lambda1_mu,
        lambda1_predicted,
        regions: [neg, pos],
        beta2,
        violations,
    })
}

/// Which closed-form residual bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// MINRES with `P_d`: bound on `‖r_{2k+1}‖ / ‖r_0‖`.
    MinresProp1,
    /// GMRES with `P_t = P_{L-}`: bound on `‖r_k‖ / ‖r_0‖` for `k >= 2`.
    GmresProp2,
    /// General lower block triangular preconditioners `P_{L±}`.
    TriangularLower,
    /// General upper block triangular preconditioners `P_{U±}`.
    TriangularUpper,
}

/// Inputs of the bound formulas.
#[derive(Debug, Clone)]
pub struct BoundParams {
    /// Spatial dimension `d` (2 or 3).
    pub d: f64,
    pub beta2: f64,
    pub mu: f64,
    pub d11: f64,
    /// `|K_1|`.
    pub k1: f64,
    /// `|Ω|`.
    pub omega: f64,
    /// `lambda_max(M_p)` (largest element measure).
    pub lambda_max_mp: f64,
    /// `lambda_min(A)`.
    pub lambda_min_a: f64,
    /// `‖A^{-1} B^T‖` (triangular-preconditioner bounds).
    pub norm_a_inv_bt: f64,
    /// `‖Ŝ^{-1} S‖` or `‖S Ŝ^{-1}‖` (triangular-preconditioner bounds).
    pub norm_shat_inv_s: f64,
    /// Condition number of `Ŝ` (similarity constant of the surrogate).
    pub cond_shat: f64,
    /// Eigenvalues of `Ŝ^{-1} S`, ascending (triangular-preconditioner bounds).
    pub schur_eigenvalues: Vec<f64>,
}

/// Shifted-Chebyshev quantity `((sqrt(b) - sqrt(a)) / (sqrt(b) + sqrt(a)))`.
fn cheb_rate(a: f64, b: f64) -> f64 {
    if a <= 0.0 {
        return 1.0;
    }
    ((b.sqrt() - a.sqrt()) / (b.sqrt() + a.sqrt())).max(0.0)
}

/// Chebyshev surrogate for `min_{p(0)=1, deg <= k-1} max |p(λ_i)|` over a
/// positive spectrum with a possible small outlier `λ_1`: the better of the
/// plain interval bound and the outlier-extracted bound from the proofs.
fn minpoly_surrogate(eigs: &[f64], k: usize) -> f64 {
    if k == 0 || eigs.is_empty() {
        return 1.0;
    }
    let lam1 = eigs[0];
    let hi = *eigs.last().unwrap();
    let mut best = 1.0f64;
    // Plain interval [λ_1, λ_N], polynomial degree k-1.
    best = best.min(2.0 * cheb_rate(lam1, hi).powi(k as i32 - 1));
    // Outlier extraction: one linear factor spent on λ_1, Chebyshev on
    // [λ_2, λ_N] with degree k-2.
    if eigs.len() >= 2 && k >= 2 && lam1 > 0.0 {
        let lam2 = eigs[1];
        let lead = (hi - lam1) / lam1;
        best = best.min(lead * 2.0 * cheb_rate(lam2, hi).powi(k as i32 - 2));
    }
    best
}

/// Evaluates the requested residual bound at step `k` (for `MinresProp1`,
/// the bound applies to the residual at step `2k+1`). Errors when the
/// parameter regime assumed by the bound does not hold.
pub fn evaluate_bounds(kind: BoundKind, params: &BoundParams, k: usize) -> Result<f64> {
    let ratio = params.mu * params.d11 / params.k1;
    match kind {
        BoundKind::MinresProp1 => {
            if ratio >= params.beta2 {
                return Err(Error::RegimeViolation { ratio, beta2: params.beta2 });
            }
            let constant = 2.0
                * params.omega
                * (params.d + ratio + params.mu * params.d11 / params.omega)
                / (params.mu * params.d11);
            let rate = (params.d.sqrt() - params.beta2.sqrt())
                / (params.d.sqrt() + params.beta2.sqrt());
            Ok(constant * rate.powi(k as i32))
        }
        BoundKind::GmresProp2 => {
            if ratio >= params.beta2 {
                return Err(Error::RegimeViolation { ratio, beta2: params.beta2 });
            }
            let inner = params.d + 2.0 + (params.d * params.lambda_max_mp / params.lambda_min_a).sqrt();
            let constant = 2.0 * params.omega * (params.d + 1.0) * inner / (params.mu * params.d11);
            let rate = (params.d.sqrt() - params.beta2.sqrt())
                / (params.d.sqrt() + params.beta2.sqrt());
            Ok(constant * rate.powi(k as i32 - 2))
        }
        BoundKind::TriangularLower | BoundKind::TriangularUpper => {
            let lead = 1.0 + params.norm_a_inv_bt + params.norm_shat_inv_s;
            let similarity = params.cond_shat.sqrt();
            Ok(lead * similarity * minpoly_surrogate(&params.schur_eigenvalues, k))
        }
    }
}

/// Writes eigenvalues as a one-column CSV.
pub fn write_eigenvalue_csv<W: Write>(out: &mut W, eigenvalues: &[f64]) -> Result<()> {
    writeln!(out, "eigenvalue")?;
    for ev in eigenvalues {
        writeln!(out, "{ev:.12e}")?;
    }
    Ok(())
}

/// Plain-text bound-check summary.
pub fn write_bound_summary<W: Write>(
    out: &mut W,
    label: &str,
    violations: &[Violation],
) -> Result<()> {
    if violations.is_empty() {
        writeln!(out, "{label}: all eigenvalues within predicted regions")?;
    } else {
        writeln!(out, "{label}: {} violation(s)", violations.len())?;
        for v in violations {
            writeln!(
                out,
                "  eigenvalue {:+.12e} outside by {:.3e} ({})",
                v.eigenvalue, v.margin, v.context
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble;
    use crate::mesh::generate_structured_mesh;
    use crate::system::{regularize_and_scale, D11Mode};

    #[test]
    fn iterative_infsup_matches_dense() {
        let mesh = generate_structured_mesh(2, 8).unwrap();
        let (_, blocks) =
            assemble(&mesh, 1.0, |_| [0.0; 3], |_| [0.0; 3]).unwrap();
        let sys = regularize_and_scale(blocks, 1.0, D11Mode::One).unwrap();
        let dense = infsup_beta(&sys).unwrap();
        let iter = infsup_beta_iterative(&sys).unwrap();
        assert!(
            (iter.beta - dense.beta).abs() <= 1e-4 * dense.beta,
            "beta {} vs {}",
            iter.beta,
            dense.beta
        );
        let g_dense = *dense.gammas.last().unwrap();
        let g_iter = *iter.gammas.last().unwrap();
        // The top of the spectrum is tightly clustered, which caps what
        // unshifted power iteration can resolve.
        assert!(
            (g_iter - g_dense).abs() <= 1e-2 * g_dense,
            "gamma_max {g_iter} vs {g_dense}"
        );
    }

    #[test]
    fn minpoly_surrogate_basics() {
        // Single point spectrum: one step annihilates it.
        assert_eq!(minpoly_surrogate(&[2.0], 0), 1.0);
        assert!(minpoly_surrogate(&[2.0], 1) == 0.0 || minpoly_surrogate(&[2.0], 1) <= 1.0);
        // Tight cluster: rapid decay once the outlier is extracted.
        let eigs = [1e-4, 0.9, 1.0, 1.1];
        let s3 = minpoly_surrogate(&eigs, 3);
        let s6 = minpoly_surrogate(&eigs, 6);
        assert!(s6 < s3);
        assert!(minpoly_surrogate(&eigs, 1) <= 1.0);
    }
}
