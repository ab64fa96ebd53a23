//! Unitary building blocks: ladder operators, displacement, Kerr cross-phase,
//! the 50/50 dual-rail beam splitter and the phase shifter.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::displacement::DisplacementKernel;
use crate::error::{Error, Result};
use crate::fock::{displacement_guard, FockDim, RailPattern, ThreeSystemState};
use crate::linalg::{self, cis, C64, ONE, ZERO};

/// Space an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorDims {
    Single(FockDim),
    /// Joint `(a, b)` space, indexed `n_a * dim_b + n_b`.
    Pair(FockDim, FockDim),
}

impl OperatorDims {
    pub fn total(self) -> usize {
        match self {
            OperatorDims::Single(d) => d.get(),
            OperatorDims::Pair(a, b) => a.get() * b.get(),
        }
    }
}

/// Dense operator with unitarity and diagonality metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    dims: OperatorDims,
    elements: DMatrix<C64>,
    unitary: bool,
    diagonal: bool,
}

impl OperatorMatrix {
    /// Wrap a matrix, deriving both flags numerically.
    pub fn from_matrix(dims: OperatorDims, elements: DMatrix<C64>) -> Result<Self> {
        let n = dims.total();
        if elements.nrows() != n || elements.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: elements.nrows() });
        }
        let unitary = linalg::unitarity_defect(&elements) < 1e-10;
        let diagonal = linalg::is_diagonal(&elements, 0.0);
        Ok(OperatorMatrix { dims, elements, unitary, diagonal })
    }

    fn single(d: FockDim, elements: DMatrix<C64>, unitary: bool, diagonal: bool) -> Self {
        OperatorMatrix { dims: OperatorDims::Single(d), elements, unitary, diagonal }
    }

    pub fn dims(&self) -> OperatorDims {
        self.dims
    }

    pub fn elements(&self) -> &DMatrix<C64> {
        &self.elements
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix { elements: self.elements.adjoint(), ..self.clone() }
    }

    /// `self * rhs`; flags are carried only when both factors have them.
    pub fn compose(&self, rhs: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.dims != rhs.dims {
            return Err(Error::DimensionMismatch { expected: self.dims.total(), found: rhs.dims.total() });
        }
        Ok(OperatorMatrix {
            dims: self.dims,
            elements: &self.elements * &rhs.elements,
            unitary: self.unitary && rhs.unitary,
            diagonal: self.diagonal && rhs.diagonal,
        })
    }

    /// `max |(U^+ U - I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.elements)
    }

    /// Lift a single-mode operator on `a` to the pair space `(a, b)`.
    pub fn on_mode_a_of_pair(&self, dim_b: FockDim) -> Result<OperatorMatrix> {
        let OperatorDims::Single(da) = self.dims else {
            return Err(Error::InvalidParameter("operator is already two-mode"));
        };
        let db = dim_b.get();
        let elements = self.elements.kronecker(&DMatrix::<C64>::identity(db, db));
        Ok(OperatorMatrix { dims: OperatorDims::Pair(da, dim_b), elements, ..self.clone() })
    }
}

pub fn identity(d: FockDim) -> OperatorMatrix {
    OperatorMatrix::single(d, DMatrix::identity(d.get(), d.get()), true, true)
}

/// `<m|a|n> = sqrt(n) delta_{m, n-1}`.
pub fn annihilation(d: FockDim) -> OperatorMatrix {
    let elements = DMatrix::from_fn(d.get(), d.get(), |m, n| {
        if n == m + 1 {
            C64::new((n as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    OperatorMatrix::single(d, elements, false, false)
}

pub fn creation(d: FockDim) -> OperatorMatrix {
    annihilation(d).adjoint()
}

pub fn number(d: FockDim) -> OperatorMatrix {
    let diag = DVector::from_fn(d.get(), |n, _| C64::new(n as f64, 0.0));
    OperatorMatrix::single(d, DMatrix::from_diagonal(&diag), false, true)
}

/// `D(alpha) = exp(alpha a^+ - alpha^* a)` on the truncated space.
pub fn displacement(alpha: C64, d: FockDim) -> Result<OperatorMatrix> {
    displacement_guard(alpha, d)?;
    Ok(displacement_with(&DisplacementKernel::new(d), alpha))
}

/// [`displacement`] reusing a precomputed kernel. The caller is responsible
/// for the truncation guard.
pub fn displacement_with(kernel: &DisplacementKernel, alpha: C64) -> OperatorMatrix {
    let diagonal = alpha == ZERO;
    OperatorMatrix::single(kernel.dim(), kernel.matrix(alpha), true, diagonal)
}

/// Kerr cross-phase shift per photon pair, `theta = K l / v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KerrParams {
    theta: f64,
}

impl KerrParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta.abs() > PI {
            return Err(Error::InvalidParameter("Kerr phase must be finite with |theta| <= pi"));
        }
        Ok(KerrParams { theta })
    }

    pub fn theta(self) -> f64 {
        self.theta
    }
}

/// `exp(-i theta n_a n_b)` as a diagonal two-mode operator.
pub fn kerr_unitary(p: KerrParams, d_a: FockDim, d_b: FockDim) -> OperatorMatrix {
    let db = d_b.get();
    let n = d_a.get() * db;
    let diag = DVector::from_fn(n, |k, _| cis(-p.theta * ((k / db) * (k % db)) as f64));
    OperatorMatrix {
        dims: OperatorDims::Pair(d_a, d_b),
        elements: DMatrix::from_diagonal(&diag),
        unitary: true,
        diagonal: true,
    }
}

/// 2x2 operator on the dual-rail register, in the basis
/// `(|0>_b|1>_c, |1>_b|0>_c)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualRailOp {
    m: [[C64; 2]; 2],
}

impl DualRailOp {
    pub fn new(m: [[C64; 2]; 2]) -> Self {
        DualRailOp { m }
    }

    /// Symmetric 50/50 splitter with `i` on the reflected term:
    /// `|01> -> (|01> + i|10>)/sqrt2`, `|10> -> (|10> + i|01>)/sqrt2`.
    pub fn beam_splitter() -> Self {
        let t = C64::new(FRAC_1_SQRT_2, 0.0);
        let r = C64::new(0.0, FRAC_1_SQRT_2);
        DualRailOp { m: [[t, r], [r, t]] }
    }

    /// Phase `e^{i eta}` on the `c` arm, i.e. on the `|0>_b|1>_c` amplitude.
    pub fn phase_shifter(eta: f64) -> Self {
        DualRailOp { m: [[cis(eta), ZERO], [ZERO, ONE]] }
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        self.m
    }

    pub fn apply(&self, s: &ThreeSystemState) -> ThreeSystemState {
        let [u, v] = s.blocks();
        let m = &self.m;
        ThreeSystemState::from_vectors(u * m[0][0] + v * m[0][1], u * m[1][0] + v * m[1][1])
    }

    pub fn then(&self, next: &DualRailOp) -> DualRailOp {
        let (a, b) = (&next.m, &self.m);
        let mut m = [[ZERO; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        DualRailOp { m }
    }
}

/// Apply the 50/50 splitter to the dual-rail register, blockwise in mode `a`.
pub fn bs5050_dualrail(s: &ThreeSystemState) -> ThreeSystemState {
    DualRailOp::beam_splitter().apply(s)
}

pub fn phase_shifter(eta: f64) -> DualRailOp {
    DualRailOp::phase_shifter(eta)
}

/// Amplitude of one rail pattern after a dual-rail operator, for a register
/// that starts in `from`.
pub fn rail_amplitude(op: &DualRailOp, from: RailPattern, to: RailPattern) -> C64 {
    op.m[to.index()][from.index()]
}
