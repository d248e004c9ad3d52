//! Pressure-pinning regularization and the rescaled saddle-point operator.
//!
//! The assembled system is singular: constant pressures lie in the null
//! space of `(B°)^T`. Adding `D = diag(d11, 0, ..., 0)` to the (2,2)-block
//! pins the pressure of the first element to zero without changing the
//! solution. All Krylov runs use the rescaled form
//!
//! ```text
//!   [ A      -(B°)^T ] [ mu u ]   [ b1    ]
//!   [ -B°    -mu D   ] [ p    ] = [ mu b2 ]
//! ```
//!
//! whose blocks are viscosity-free except for the regularization term.

use nalgebra::DMatrix;

use crate::assembly::{SaddleBlocks, WgSolution};
use crate::error::{Error, Result};
use crate::krylov::LinearOperator;

/// Choice of the regularization weight `d11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum D11Mode {
    /// `d11 = 1`.
    One,
    /// `d11 = |K_1|`, the measure of the pinned element.
    CellMeasure,
}

impl D11Mode {
    pub fn label(&self) -> &'static str {
        match self {
            D11Mode::One => "one",
            D11Mode::CellMeasure => "cell",
        }
    }
}

/// The regularized, rescaled saddle system.
#[derive(Debug, Clone)]
pub struct RegularizedSystem {
    pub blocks: SaddleBlocks,
    pub mu: f64,
    pub d11: f64,
    pub d11_mode: D11Mode,
    /// Pressure index whose value is pinned (the first element).
    pub pinned_index: usize,
}

/// Builds the regularized system; `mu = 0` is allowed for spectral studies
/// but cannot be solved or unscaled.
pub fn regularize_and_scale(blocks: SaddleBlocks, mu: f64, mode: D11Mode) -> Result<RegularizedSystem> {
    if mu < 0.0 {
        return Err(Error::InvalidViscosity(mu));
    }
    let d11 = match mode {
        D11Mode::One => 1.0,
        D11Mode::CellMeasure => blocks.mp[0],
    };
    if d11 <= 0.0 || d11.is_nan() {
        return Err(Error::InvalidRegularization(d11));
    }
    Ok(RegularizedSystem {
        blocks,
        mu,
        d11,
        d11_mode: mode,
        pinned_index: 0,
    })
}

impl RegularizedSystem {
    pub fn n_velocity(&self) -> usize {
        self.blocks.n_velocity()
    }

    pub fn n_pressure(&self) -> usize {
        self.blocks.n_pressure()
    }

    pub fn n_total(&self) -> usize {
        self.n_velocity() + self.n_pressure()
    }

    pub fn k1_measure(&self) -> f64 {
        self.blocks.mp[0]
    }

    pub fn omega_measure(&self) -> f64 {
        self.blocks.omega_measure()
    }

    /// Right-hand side of the rescaled system, `(b1, mu b2)`.
    pub fn rhs(&self) -> Vec<f64> {
        let mut rhs = Vec::with_capacity(self.n_total());
        rhs.extend_from_slice(&self.blocks.b1);
        rhs.extend(self.blocks.b2.iter().map(|&v| self.mu * v));
        rhs
    }

    /// Matrix-free product `y = [A v - B0^T q; -B0 v - mu D q]`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nv = self.n_velocity();
        let (xv, xp) = x.split_at(nv);
        let (yv, yp) = y.split_at_mut(nv);
        self.blocks.a.matvec(xv, yv);
        self.blocks.b0.matvec_transpose_add(-1.0, xp, yv);
        self.blocks.b0.matvec(xv, yp);
        for v in yp.iter_mut() {
            *v = -*v;
        }
        yp[self.pinned_index] -= self.mu * self.d11 * xp[self.pinned_index];
    }

    /// Recovers `(u, p)` from a solution `(mu u, p)` of the rescaled system.
    pub fn unscale(&self, x: &[f64]) -> Result<WgSolution> {
        if self.mu == 0.0 {
            return Err(Error::ZeroViscosity(self.mu));
        }
        let nv = self.n_velocity();
        Ok(WgSolution {
            velocity: x[..nv].iter().map(|&v| v / self.mu).collect(),
            pressure: x[nv..].to_vec(),
        })
    }

    /// Schur-complement product `(mu D + B0 A^{-1} B0^T) p`, with `A^{-1}`
    /// applied by the given velocity-block solver.
    pub fn schur_apply<S>(&self, p: &[f64], mut inner: S, out: &mut [f64]) -> Result<()>
    where
        S: FnMut(&[f64], &mut [f64]) -> Result<()>,
    {
        let nv = self.n_velocity();
        let mut bt_p = vec![0.0; nv];
        self.blocks.b0.matvec_transpose_add(1.0, p, &mut bt_p);
        let mut a_inv = vec![0.0; nv];
        inner(&bt_p, &mut a_inv)?;
        self.blocks.b0.matvec(&a_inv, out);
        out[self.pinned_index] += self.mu * self.d11 * p[self.pinned_index];
        Ok(())
    }

    /// Dense coefficient matrix of the rescaled regularized system.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (nv, np) = (self.n_velocity(), self.n_pressure());
        let n = nv + np;
        let mut m = DMatrix::zeros(n, n);
        let a = self.blocks.a.to_dense();
        m.view_mut((0, 0), (nv, nv)).copy_from(&a);
        for r in 0..np {
            for k in self.blocks.b0.indptr[r]..self.blocks.b0.indptr[r + 1] {
                let c = self.blocks.b0.indices[k];
                let v = self.blocks.b0.values[k];
                m[(nv + r, c)] -= v;
                m[(c, nv + r)] -= v;
            }
        }
        m[(nv + self.pinned_index, nv + self.pinned_index)] -= self.mu * self.d11;
        m
    }

    /// Dense coefficient matrix of the unregularized rescaled system
    /// (zero (2,2)-block); singular by the constant-pressure null space.
    pub fn to_dense_unregularized(&self) -> DMatrix<f64> {
        let mut m = self.to_dense();
        let i = self.n_velocity() + self.pinned_index;
        m[(i, i)] += self.mu * self.d11;
        m
    }

    /// Dense coefficient matrix of the unscaled regularized system
    /// `[[mu A, -B0^T], [-B0, -D]]` (test oracle).
    pub fn to_dense_unscaled(&self) -> DMatrix<f64> {
        let (nv, np) = (self.n_velocity(), self.n_pressure());
        let mut m = self.to_dense();
        {
            let mut a = m.view_mut((0, 0), (nv, nv));
            a *= self.mu;
        }
        let i = nv + self.pinned_index;
        m[(i, i)] += self.mu * self.d11;
        m[(i, i)] -= self.d11;
        let _ = np;
        m
    }

    /// The `(2,2)` regularization as a dense pressure-space matrix `mu D`
    /// scaled by `M_p^{-1/2}` on both sides (used in spectral checks):
    /// a single entry `mu d11 / |K_1|`.
    pub fn scaled_regularization_norm(&self) -> f64 {
        self.mu * self.d11 / self.k1_measure()
    }
}

/// The rescaled saddle operator as a matrix-free linear operator.
impl LinearOperator for RegularizedSystem {
    fn dim(&self) -> usize {
        self.n_total()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        RegularizedSystem::apply(self, x, y)
    }
}

/// Extracts the discrete solution produced by a direct dense solve of the
/// rescaled system (test/diagnostic path).
pub fn solve_dense(sys: &RegularizedSystem) -> Result<WgSolution> {
    let m = sys.to_dense();
    let rhs = nalgebra::DVector::from_vec(sys.rhs());
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Eigensolver("dense LU solve failed".into()))?;
    sys.unscale(x.as_slice())
}
