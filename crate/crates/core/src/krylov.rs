//! In-house Krylov solvers and the block Schur complement preconditioners.
//!
//! MINRES stops on the preconditioned relative residual (the quantity its
//! recurrence minimizes in the `P^{-1}` norm); GMRES on the residual of the
//! preconditioned system (left) or the true residual (right). Both histories
//! are recorded per iteration so convergence claims are auditable against
//! either convention.

use std::cell::Cell;
use std::io::Write;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::sparse::{incomplete_cholesky, CsrMatrix, IctFactor};
use crate::system::RegularizedSystem;

/// A matrix-free linear operator `y = A x`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Application of a preconditioner inverse `z = P^{-1} r`.
pub trait Preconditioner {
    fn dim(&self) -> usize;
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()>;
    /// Total inner iterations spent so far (for nested iterative solves).
    fn inner_iterations(&self) -> usize {
        0
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.nrows, self.ncols);
        self.nrows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

impl LinearOperator for nalgebra::DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let v = self * nalgebra::DVector::from_column_slice(x);
        y.copy_from_slice(v.as_slice());
    }
}

/// Identity preconditioner (unpreconditioned iteration).
pub struct IdentityPrecond(pub usize);

impl Preconditioner for IdentityPrecond {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(r);
        Ok(())
    }
}

/// Triangular-factor preconditioner (incomplete or exact Cholesky).
impl Preconditioner for IctFactor {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.solve_into(r, z);
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Convergence record of one solver run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    /// Preconditioned relative residuals, entry 0 is the initial 1.0.
    pub residual_history: Vec<f64>,
    /// True (unpreconditioned) relative residuals `‖b - A x_k‖ / ‖b‖`.
    pub true_residual_history: Vec<f64>,
    pub converged: bool,
    /// GMRES made no progress over a full restart cycle.
    pub stagnated: bool,
    pub inner_iterations_total: usize,
    pub wall_time: Duration,
}

impl SolveReport {
    fn new() -> Self {
        SolveReport {
            iterations: 0,
            residual_history: vec![1.0],
            true_residual_history: vec![1.0],
            converged: false,
            stagnated: false,
            inner_iterations_total: 0,
            wall_time: Duration::ZERO,
        }
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&1.0)
    }

    pub fn final_true_residual(&self) -> f64 {
        *self.true_residual_history.last().unwrap_or(&1.0)
    }

    /// CSV export: `iteration,preconditioned_residual,true_residual`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "iteration,preconditioned_residual,true_residual")?;
        for (k, (pr, tr)) in self
            .residual_history
            .iter()
            .zip(&self.true_residual_history)
            .enumerate()
        {
            writeln!(out, "{k},{pr:.12e},{tr:.12e}")?;
        }
        Ok(())
    }
}

/// Preconditioned MINRES for symmetric (possibly indefinite) operators with
/// an SPD preconditioner. Stops when the preconditioned relative residual
/// drops below `tol`; the true residual is recorded alongside.
pub fn minres(
    op: &dyn LinearOperator,
    precond: &dyn Preconditioner,
    b: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = op.dim();
    let mut report = SolveReport::new();
    let mut x = vec![0.0; n];
    let norm_b = norm(b);
    if norm_b == 0.0 {
        report.converged = true;
        report.wall_time = start.elapsed();
        return Ok((x, report));
    }

    let mut v_prev = vec![0.0; n];
    let mut v = b.to_vec();
    let mut z = vec![0.0; n];
    precond.apply(&v, &mut z)?;
    let gamma_sq = dot(&z, &v);
    if gamma_sq < 0.0 {
        return Err(Error::PrecondNotSpd { iter: 0 });
    }
    let mut gamma = gamma_sq.sqrt();
    if gamma == 0.0 {
        report.converged = true;
        report.wall_time = start.elapsed();
        return Ok((x, report));
    }
    let gamma0 = gamma;
    let mut gamma_prev = 1.0;
    let mut eta = gamma;
    let (mut s_prev, mut s) = (0.0, 0.0);
    let (mut c_prev, mut c) = (1.0, 1.0);
    let mut w = vec![0.0; n];
    let mut w_prev = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut r_true = vec![0.0; n];

    for iter in 1..=maxit {
        // Lanczos step on the preconditioned operator.
        let zs: Vec<f64> = z.iter().map(|&zi| zi / gamma).collect();
        op.apply(&zs, &mut q);
        let delta = dot(&q, &zs);
        // v_new = q - (delta/gamma) v - (gamma/gamma_prev) v_prev
        let mut v_new = q.clone();
        axpy(&mut v_new, -delta / gamma, &v);
        axpy(&mut v_new, -gamma / gamma_prev, &v_prev);
        let mut z_new = vec![0.0; n];
        precond.apply(&v_new, &mut z_new)?;
        let gamma_new_sq = dot(&z_new, &v_new);
        if gamma_new_sq < -1e-14 * dot(&v_new, &v_new).max(1.0) {
            return Err(Error::PrecondNotSpd { iter });
        }
        let gamma_new = gamma_new_sq.max(0.0).sqrt();

        // Givens rotations.
        let alpha0 = c * delta - c_prev * s * gamma;
        let alpha1 = (alpha0 * alpha0 + gamma_new * gamma_new).sqrt();
        let alpha2 = s * delta + c_prev * c * gamma;
        let alpha3 = s_prev * gamma;
        if alpha1 == 0.0 {
            return Err(Error::MinresBreakdown { iter });
        }
        let c_new = alpha0 / alpha1;
        let s_new = gamma_new / alpha1;

        // Direction update and solution step.
        let mut w_new = zs.clone();
        axpy(&mut w_new, -alpha3, &w_prev);
        axpy(&mut w_new, -alpha2, &w);
        for t in w_new.iter_mut() {
            *t /= alpha1;
        }
        axpy(&mut x, c_new * eta, &w_new);
        eta *= -s_new;

        report.iterations = iter;
        report.residual_history.push(eta.abs() / gamma0);
        op.apply(&x, &mut r_true);
        for (ri, bi) in r_true.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        report.true_residual_history.push(norm(&r_true) / norm_b);

        if eta.abs() / gamma0 <= tol {
            report.converged = true;
            break;
        }
        if gamma_new == 0.0 {
            // Invariant Krylov subspace: the iterate is exact.
            report.converged = report.final_residual() <= tol || report.final_true_residual() <= tol;
            if !report.converged {
                return Err(Error::MinresBreakdown { iter });
            }
            break;
        }

        std::mem::swap(&mut v_prev, &mut v);
        std::mem::swap(&mut v, &mut v_new);
        z = z_new;
        gamma_prev = gamma;
        gamma = gamma_new;
        std::mem::swap(&mut w_prev, &mut w);
        std::mem::swap(&mut w, &mut w_new);
        c_prev = c;
        c = c_new;
        s_prev = s;
        s = s_new;
    }

    report.inner_iterations_total = precond.inner_iterations();
    report.wall_time = start.elapsed();
    Ok((x, report))
}

/// Which side the preconditioner is applied on in GMRES.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondSide {
    Left,
    Right,
}

/// Restarted GMRES with modified Gram-Schmidt and a conditional second
/// orthogonalization pass. Left preconditioning iterates on `P^{-1} A` and
/// reports preconditioned residuals; right preconditioning iterates on
/// `A P^{-1}` and its recurrence residual is the true residual.
pub fn gmres(
    op: &dyn LinearOperator,
    precond: &dyn Preconditioner,
    side: PrecondSide,
    b: &[f64],
    restart: usize,
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = op.dim();
    let m = restart.max(1);
    let mut report = SolveReport::new();
    let mut x = vec![0.0; n];
    let norm_b = norm(b);
    if norm_b == 0.0 {
        report.converged = true;
        report.wall_time = start.elapsed();
        return Ok((x, report));
    }

    let mut denom = 0.0; // ‖P^{-1} b‖ (left) or ‖b‖ (right)
    let mut total_iters = 0usize;
    let mut work = vec![0.0; n];
    let mut scratch = vec![0.0; n];

    'outer: while total_iters < maxit {
        // (Preconditioned) residual of the current iterate.
        op.apply(&x, &mut work);
        for (wi, bi) in work.iter_mut().zip(b) {
            *wi = bi - *wi;
        }
        let r0: Vec<f64> = match side {
            PrecondSide::Left => {
                precond.apply(&work, &mut scratch)?;
                scratch.clone()
            }
            PrecondSide::Right => work.clone(),
        };
        let beta = norm(&r0);
        if denom == 0.0 {
            denom = beta;
            if denom == 0.0 {
                report.converged = true;
                break;
            }
        }
        let cycle_start_res = beta / denom;
        if cycle_start_res <= tol {
            report.converged = true;
            break;
        }

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r0.iter().map(|&v| v / beta).collect());
        // Hessenberg columns after Givens, plus rotation/sine-cosine storage.
        let mut h_cols: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs = Vec::with_capacity(m);
        let mut sn = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;

        let mut j = 0;
        while j < m && total_iters < maxit {
            // w = P^{-1} A v_j (left) or A P^{-1} v_j (right).
            match side {
                PrecondSide::Left => {
                    op.apply(&basis[j], &mut scratch);
                    precond.apply(&scratch, &mut work)?;
                }
                PrecondSide::Right => {
                    precond.apply(&basis[j], &mut scratch)?;
                    op.apply(&scratch, &mut work);
                }
            }
            let norm_before = norm(&work);
            let mut h = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &work);
                h[i] = hij;
                axpy(&mut work, -hij, v);
            }
            // Second orthogonalization pass when cancellation is detected.
            let drift: f64 = basis.iter().map(|v| dot(v, &work).abs()).sum();
            if drift > 1e-8 * norm_before.max(1e-300) {
                for (i, v) in basis.iter().enumerate() {
                    let corr = dot(v, &work);
                    h[i] += corr;
                    axpy(&mut work, -corr, v);
                }
            }
            let h_last = norm(&work);
            h[j + 1] = h_last;
            let happy = h_last <= 1e-14 * norm_before.max(1e-300);
            if !happy {
                basis.push(work.iter().map(|&v| v / h_last).collect());
            }

            // Apply previous Givens rotations to the new column.
            for i in 0..j {
                let (ci, si): (f64, f64) = (cs[i], sn[i]);
                let tmp = ci * h[i] + si * h[i + 1];
                h[i + 1] = -si * h[i] + ci * h[i + 1];
                h[i] = tmp;
            }
            let (ci, si) = if h[j + 1] == 0.0 {
                (1.0, 0.0)
            } else {
                let r = h[j].hypot(h[j + 1]);
                (h[j] / r, h[j + 1] / r)
            };
            let hjj = ci * h[j] + si * h[j + 1];
            h[j] = hjj;
            h[j + 1] = 0.0;
            g[j + 1] = -si * g[j];
            g[j] *= ci;
            cs.push(ci);
            sn.push(si);
            h_cols.push(h);

            total_iters += 1;
            report.iterations = total_iters;
            let rel = g[j + 1].abs() / denom;
            report.residual_history.push(rel);

            // True residual of the would-be iterate (extra matvec; the inner
            // block solves dominate at the scales this crate targets).
            let y = solve_upper_triangular(&h_cols, &g, j + 1);
            let mut x_try = x.clone();
            update_solution(&mut x_try, &basis, &y, side, precond, &mut scratch, &mut work)?;
            op.apply(&x_try, &mut work);
            for (wi, bi) in work.iter_mut().zip(b) {
                *wi = bi - *wi;
            }
            report.true_residual_history.push(norm(&work) / norm_b);

            if rel <= tol || happy {
                x = x_try;
                report.converged = true;
                break 'outer;
            }
            j += 1;
        }

        // End of cycle: form the iterate and restart.
        if j > 0 {
            let y = solve_upper_triangular(&h_cols, &g, j);
            update_solution(&mut x, &basis, &y, side, precond, &mut scratch, &mut work)?;
        }
        // Stagnation is only meaningful over a full restart cycle.
        let cycle_end_res = g[j.min(m)].abs() / denom;
        if j == m && cycle_end_res >= cycle_start_res * (1.0 - 1e-12) {
            report.stagnated = true;
            break;
        }
    }

    report.inner_iterations_total = precond.inner_iterations();
    report.wall_time = start.elapsed();
    Ok((x, report))
}

fn solve_upper_triangular(h_cols: &[Vec<f64>], g: &[f64], k: usize) -> Vec<f64> {
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in (i + 1)..k {
            s -= h_cols[j][i] * y[j];
        }
        y[i] = s / h_cols[i][i];
    }
    y
}

fn update_solution(
    x: &mut [f64],
    basis: &[Vec<f64>],
    y: &[f64],
    side: PrecondSide,
    precond: &dyn Preconditioner,
    scratch: &mut [f64],
    work: &mut [f64],
) -> Result<()> {
    work.iter_mut().for_each(|v| *v = 0.0);
    for (yi, v) in y.iter().zip(basis) {
        axpy(work, *yi, v);
    }
    match side {
        PrecondSide::Left => axpy(x, 1.0, work),
        PrecondSide::Right => {
            precond.apply(work, scratch)?;
            axpy(x, 1.0, scratch);
        }
    }
    Ok(())
}

/// Preconditioned conjugate gradients for SPD operators. Stops on the true
/// relative residual; negative curvature is reported as a distinct error.
pub fn pcg(
    op: &dyn LinearOperator,
    precond: &dyn Preconditioner,
    b: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = op.dim();
    let mut report = SolveReport::new();
    let mut x = vec![0.0; n];
    let norm_b = norm(b);
    if norm_b == 0.0 {
        report.converged = true;
        report.wall_time = start.elapsed();
        return Ok((x, report));
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z)?;
    let mut rz = dot(&r, &z);
    if rz < 0.0 {
        return Err(Error::PrecondNotSpd { iter: 0 });
    }
    let mut p = z.clone();
    let mut ap = vec![0.0; n];

    for iter in 1..=maxit {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NegativeCurvature { iter });
        }
        let alpha = rz / pap;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let rel = norm(&r) / norm_b;
        report.iterations = iter;
        report.residual_history.push(rel);
        report.true_residual_history.push(rel);
        if rel <= tol {
            report.converged = true;
            break;
        }
        precond.apply(&r, &mut z)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }

    report.wall_time = start.elapsed();
    Ok((x, report))
}

/// How `A`-block solves inside a preconditioner are carried out.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InnerSolve {
    /// Sparse direct factorization (complete Cholesky with RCM ordering).
    #[default]
    Direct,
    /// PCG preconditioned with an incomplete Cholesky factor.
    Pcg { droptol: f64, tol: f64 },
}

/// Solver for the velocity block, shared by all block preconditioners.
pub struct InnerASolver<'a> {
    a: &'a CsrMatrix,
    factor: IctFactor,
    mode: InnerSolve,
    count: Cell<usize>,
}

impl<'a> InnerASolver<'a> {
    pub fn new(a: &'a CsrMatrix, mode: InnerSolve) -> Result<Self> {
        let droptol = match mode {
            InnerSolve::Direct => 0.0,
            InnerSolve::Pcg { droptol, .. } => droptol,
        };
        let factor = incomplete_cholesky(a, droptol, true)?;
        Ok(InnerASolver { a, factor, mode, count: Cell::new(0) })
    }

    pub fn solve(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        match self.mode {
            InnerSolve::Direct => {
                self.factor.solve_into(b, x);
                Ok(())
            }
            InnerSolve::Pcg { tol, .. } => {
                let maxit = 1000;
                let (sol, rep) = pcg(self.a, &self.factor, b, tol, maxit)?;
                self.count.set(self.count.get() + rep.iterations);
                if !rep.converged {
                    return Err(Error::InnerSolveFailed {
                        maxit,
                        residual: rep.final_residual(),
                    });
                }
                x.copy_from_slice(&sol);
                Ok(())
            }
        }
    }

    pub fn iterations(&self) -> usize {
        self.count.get()
    }
}

/// Block structure of the Schur complement preconditioners.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    /// `P_d = diag(A, ±M_p)`; SPD with the plus sign, as MINRES requires.
    BlockDiag,
    /// `P_L± = [[A, 0], [-B°, ±M_p]]`.
    BlockLower,
    /// `P_U± = [[A, -(B°)^T], [0, ±M_p]]`.
    BlockUpper,
}

/// Sign of the Schur block `±M_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(&self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// A fully configured block Schur complement preconditioner.
pub struct BlockSchurPrecond<'a> {
    sys: &'a RegularizedSystem,
    pub kind: PrecondKind,
    pub sign: Sign,
    inner: InnerASolver<'a>,
}

impl<'a> BlockSchurPrecond<'a> {
    pub fn new(
        sys: &'a RegularizedSystem,
        kind: PrecondKind,
        sign: Sign,
        inner_mode: InnerSolve,
    ) -> Result<Self> {
        let inner = InnerASolver::new(&sys.blocks.a, inner_mode)?;
        Ok(BlockSchurPrecond { sys, kind, sign, inner })
    }
}

impl Preconditioner for BlockSchurPrecond<'_> {
    fn dim(&self) -> usize {
        self.sys.n_total()
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let nv = self.sys.n_velocity();
        let (r1, r2) = r.split_at(nv);
        let sgn = self.sign.factor();
        let mp = &self.sys.blocks.mp;
        match self.kind {
            PrecondKind::BlockDiag => {
                let (z1, z2) = z.split_at_mut(nv);
                self.inner.solve(r1, z1)?;
                for ((zi, ri), mi) in z2.iter_mut().zip(r2).zip(mp) {
                    *zi = sgn * ri / mi;
                }
            }
            PrecondKind::BlockLower => {
                // Solve A z1 = r1, then ±M_p z2 = r2 - C z1 with C = -B°.
                let (z1, z2) = z.split_at_mut(nv);
                self.inner.solve(r1, z1)?;
                let mut t = r2.to_vec();
                self.sys.blocks.b0.matvec_add(1.0, z1, &mut t);
                for ((zi, ti), mi) in z2.iter_mut().zip(&t).zip(mp) {
                    *zi = sgn * ti / mi;
                }
            }
            PrecondKind::BlockUpper => {
                // z2 = ±M_p^{-1} r2, then A z1 = r1 - B^T z2 with B^T = -(B°)^T.
                let (z1, z2) = z.split_at_mut(nv);
                for ((zi, ri), mi) in z2.iter_mut().zip(r2).zip(mp) {
                    *zi = sgn * ri / mi;
                }
                let mut t = r1.to_vec();
                self.sys.blocks.b0.matvec_transpose_add(1.0, z2, &mut t);
                self.inner.solve(&t, z1)?;
            }
        }
        Ok(())
    }

    fn inner_iterations(&self) -> usize {
        self.inner.iterations()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag_op(d: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    #[test]
    fn minres_identity_converges_in_one_iteration() {
        let a = diag_op(&[1.0, 1.0, 1.0]);
        let b = vec![1.0, -2.0, 0.5];
        let (x, rep) = minres(&a, &IdentityPrecond(3), &b, 1e-12, 10).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn minres_two_by_two_diagonal() {
        let a = diag_op(&[1.0, 4.0]);
        let b = vec![1.0, 1.0];
        let (x, rep) = minres(&a, &IdentityPrecond(2), &b, 1e-12, 10).unwrap();
        assert!(rep.converged && rep.iterations <= 2);
        assert!((x[0] - 1.0).abs() < 1e-10);
        assert!((x[1] - 0.25).abs() < 1e-10);
    }

    #[test]
    fn minres_residual_history_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0301);
        for _ in 0..10 {
            let n = 30;
            let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let sym = (&m + m.transpose()) * 0.5;
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (_, rep) = minres(&sym, &IdentityPrecond(n), &b, 1e-12, 60).unwrap();
            for w in rep.residual_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-14, "history not monotone: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn minres_indefinite_system_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0302);
        let n = 40;
        let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let sym = (&m + m.transpose()) * 0.5 + DMatrix::identity(n, n) * 0.3;
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (x, rep) = minres(&sym, &IdentityPrecond(n), &b, 1e-12, 300).unwrap();
        assert!(rep.converged, "final residual {}", rep.final_residual());
        let xd = sym.clone().lu().solve(&nalgebra::DVector::from_column_slice(&b)).unwrap();
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn gmres_identity_one_iteration() {
        let a = diag_op(&[1.0; 4]);
        let b = vec![2.0, -1.0, 0.0, 3.0];
        let (x, rep) = gmres(&a, &IdentityPrecond(4), PrecondSide::Left, &b, 30, 1e-12, 100).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn gmres_nilpotent_plus_identity_two_iterations() {
        // (I + N) with N^2 = 0: minimal polynomial degree 2.
        let mut a = DMatrix::<f64>::identity(4, 4);
        a[(0, 2)] = 0.7;
        a[(1, 3)] = -0.4;
        let b = vec![1.0, 2.0, 3.0, 4.0];
        let (x, rep) = gmres(&a, &IdentityPrecond(4), PrecondSide::Left, &b, 30, 1e-12, 100).unwrap();
        assert!(rep.converged && rep.iterations <= 2, "iters {}", rep.iterations);
        let xd = a.clone().lu().solve(&nalgebra::DVector::from_column_slice(&b)).unwrap();
        for i in 0..4 {
            assert!((x[i] - xd[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn gmres_restarted_solves_nonsymmetric_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0303);
        let n = 50;
        let m = DMatrix::<f64>::from_fn(n, n, |i, j| {
            if i == j {
                4.0
            } else {
                0.4 * rng.gen_range(-1.0..1.0)
            }
        });
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (x, rep) = gmres(&m, &IdentityPrecond(n), PrecondSide::Left, &b, 10, 1e-10, 500).unwrap();
        assert!(rep.converged);
        let xd = m.clone().lu().solve(&nalgebra::DVector::from_column_slice(&b)).unwrap();
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-7);
        }
        // Within each restart cycle the recurrence residual is nonincreasing.
        for w in rep.residual_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    /// Brute-force optimality oracle: GMRES residual at step k equals the
    /// minimal residual over the explicitly built Krylov basis.
    #[test]
    fn gmres_is_optimal_on_small_dense_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0304);
        for _ in 0..10 {
            let n = 20;
            let m = DMatrix::<f64>::from_fn(n, n, |i, j| {
                if i == j {
                    2.0 + rng.gen_range(0.0..1.0)
                } else {
                    rng.gen_range(-0.5..0.5)
                }
            });
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (_, rep) =
                gmres(&m, &IdentityPrecond(n), PrecondSide::Left, &b, 40, 1e-14, 12).unwrap();
            let bv = nalgebra::DVector::from_column_slice(&b);
            let norm_b = bv.norm();
            // Krylov basis by brute force, orthonormalized for conditioning.
            let mut cols: Vec<nalgebra::DVector<f64>> = vec![bv.clone()];
            for _ in 1..12 {
                let next = &m * cols.last().unwrap();
                cols.push(next);
            }
            for k in 1..=8usize {
                if k >= rep.residual_history.len() {
                    break;
                }
                let mut basis = nalgebra::DMatrix::zeros(n, k);
                for (j, c) in cols.iter().take(k).enumerate() {
                    basis.set_column(j, c);
                }
                let amk = &m * &basis;
                // Least squares min ‖b - (A K) y‖ via SVD.
                let svd = nalgebra::SVD::new(amk, true, true);
                let y = svd.solve(&bv, 1e-13).expect("least squares");
                let best = (&bv - &m * (&basis * &y)).norm() / norm_b;
                let got = rep.residual_history[k];
                assert!(
                    got <= best + 1e-10,
                    "step {k}: gmres {got} vs brute-force optimum {best}"
                );
            }
        }
    }

    #[test]
    fn pcg_identity_and_perfect_preconditioner() {
        let a = diag_op(&[1.0; 5]);
        let b = vec![1.0; 5];
        let (_, rep) = pcg(&a, &IdentityPrecond(5), &b, 1e-12, 10).unwrap();
        assert_eq!(rep.iterations, 1);

        let d: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let a = diag_op(&d);
        // M = A: preconditioned system is the identity.
        struct DiagInv(Vec<f64>);
        impl Preconditioner for DiagInv {
            fn dim(&self) -> usize {
                self.0.len()
            }
            fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.0) {
                    *zi = ri / di;
                }
                Ok(())
            }
        }
        let b = vec![1.0; 10];
        let (_, rep) = pcg(&a, &DiagInv(d), &b, 1e-12, 20).unwrap();
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn pcg_detects_indefiniteness() {
        let a = diag_op(&[1.0, -1.0]);
        let b = vec![1.0, 1.0];
        let err = pcg(&a, &IdentityPrecond(2), &b, 1e-12, 10).unwrap_err();
        assert!(matches!(err, Error::NegativeCurvature { .. }));
    }

    #[test]
    fn gmres_reports_stagnation_over_a_full_cycle() {
        // Pure rotation: with restart 1 the single-vector residual
        // minimization makes no progress (A r0 is orthogonal to r0).
        let mut a = DMatrix::<f64>::zeros(2, 2);
        a[(0, 1)] = 1.0;
        a[(1, 0)] = -1.0;
        let b = vec![1.0, 0.0];
        let (_, rep) = gmres(&a, &IdentityPrecond(2), PrecondSide::Left, &b, 1, 1e-12, 50).unwrap();
        assert!(rep.stagnated);
        assert!(!rep.converged);
        // With restart 2 the same system is solved exactly.
        let (x, rep) = gmres(&a, &IdentityPrecond(2), PrecondSide::Left, &b, 2, 1e-12, 50).unwrap();
        assert!(rep.converged && !rep.stagnated);
        assert!((x[0] - 0.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn report_csv_layout() {
        let a = diag_op(&[1.0, 4.0]);
        let b = vec![1.0, 1.0];
        let (_, rep) = minres(&a, &IdentityPrecond(2), &b, 1e-12, 10).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iteration,preconditioned_residual,true_residual"));
        assert!(text.lines().count() >= 2);
    }
}
