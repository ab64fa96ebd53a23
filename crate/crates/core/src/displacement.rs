//! Exact exponential of the truncated displacement generator.
//!
//! With `beta = |beta| e^{i phi}`, the truncated generator factors as
//! `beta a^+ - beta^* a = U (-i |beta| X) U^+` where `X = a + a^+` is real
//! symmetric tridiagonal and `U = diag(e^{i n (phi + pi/2)})`. Diagonalizing
//! `X = Q diag(lambda) Q^T` once per dimension turns every displacement into
//! two real basis changes and a diagonal phase, so the result is unitary to
//! machine precision.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::fock::FockDim;
use crate::linalg::{cis, C64};

#[derive(Clone, Debug)]
pub struct DisplacementKernel {
    dim: FockDim,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl DisplacementKernel {
    pub fn new(dim: FockDim) -> Self {
        let d = dim.get();
        let x = DMatrix::<f64>::from_fn(d, d, |i, j| {
            if j == i + 1 {
                (j as f64).sqrt()
            } else if i == j + 1 {
                (i as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(x);
        DisplacementKernel { dim, eigenvalues: eig.eigenvalues, eigenvectors: eig.eigenvectors }
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    fn frame_phases(&self, beta: C64) -> Vec<C64> {
        let step = beta.arg() + FRAC_PI_2;
        (0..self.dim.get()).map(|n| cis(n as f64 * step)).collect()
    }

    fn spectral_phases(&self, beta: C64) -> Vec<C64> {
        let r = beta.norm();
        self.eigenvalues.iter().map(|&l| cis(-r * l)).collect()
    }

    /// Dense `D(beta)`.
    pub fn matrix(&self, beta: C64) -> DMatrix<C64> {
        let d = self.dim.get();
        if beta == C64::new(0.0, 0.0) {
            return DMatrix::identity(d, d);
        }
        let u = self.frame_phases(beta);
        let e = self.spectral_phases(beta);
        let q = &self.eigenvectors;
        // Q diag(e) Q^T, built column by column over the spectral index.
        let mut core = DMatrix::<C64>::zeros(d, d);
        for k in 0..d {
            let qk = q.column(k);
            for n in 0..d {
                let w = e[k] * qk[n];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut col = core.column_mut(n);
                for m in 0..d {
                    col[m] += w * qk[m];
                }
            }
        }
        DMatrix::from_fn(d, d, |m, n| u[m] * core[(m, n)] * u[n].conj())
    }

    /// `D(beta) v` in `O(d^2)`.
    pub fn apply(&self, beta: C64, v: &DVector<C64>) -> DVector<C64> {
        assert_eq!(v.len(), self.dim.get(), "state dimension differs from kernel dimension");
        if beta == C64::new(0.0, 0.0) {
            return v.clone();
        }
        let u = self.frame_phases(beta);
        let e = self.spectral_phases(beta);
        let rotated = DVector::from_fn(v.len(), |n, _| u[n].conj() * v[n]);
        let (re, im) = split(&rotated);
        let qt = self.eigenvectors.transpose();
        let (sre, sim) = (&qt * re, &qt * im);
        let spectral = DVector::from_fn(v.len(), |k, _| e[k] * C64::new(sre[k], sim[k]));
        let (re, im) = split(&spectral);
        let (ore, oim) = (&self.eigenvectors * re, &self.eigenvectors * im);
        DVector::from_fn(v.len(), |m, _| u[m] * C64::new(ore[m], oim[m]))
    }
}

fn split(v: &DVector<C64>) -> (DVector<f64>, DVector<f64>) {
    (v.map(|z| z.re), v.map(|z| z.im))
}
