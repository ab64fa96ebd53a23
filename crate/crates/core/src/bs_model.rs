//! Physical model of a displacing beam splitter: a weakly reflecting
//! splitter whose second port carries a bright coherent state.
//!
//! The splitter conserves total photon number, so its unitary is stored as
//! one small block per total photon number `N = n_a + n_b` rather than as a
//! `(d_a d_b)^2` dense matrix.

use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{coherent_state, displacement_guard, tensor, ApplyToMode, FockDim, Mode, ModeState, TwoModeState};
use crate::linalg::{self, expm, C64, ZERO};
use crate::optics::displacement;

/// Ancilla amplitude `gamma` and reflection coefficient `R`; the signal is
/// displaced by `alpha = R gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BsDisplacementParams {
    gamma: C64,
    reflectance: f64,
}

impl BsDisplacementParams {
    pub fn new(gamma: C64, reflectance: f64) -> Result<Self> {
        if !(reflectance > 0.0 && reflectance < 1.0) {
            return Err(Error::InvalidParameter("reflectance must lie in (0, 1)"));
        }
        Ok(BsDisplacementParams { gamma, reflectance })
    }

    pub fn gamma(&self) -> C64 {
        self.gamma
    }

    pub fn reflectance(&self) -> f64 {
        self.reflectance
    }

    pub fn alpha(&self) -> C64 {
        self.gamma * self.reflectance
    }

    /// Mixing angle with `sin(angle) = R`.
    pub fn mixing_angle(&self) -> f64 {
        self.reflectance.asin()
    }

    /// Smallest ancilla dimension passing the guard for `gamma`.
    pub fn min_ancilla_dim(&self) -> FockDim {
        FockDim::for_amplitude(self.gamma.norm())
    }
}

#[derive(Clone, Debug)]
struct Block {
    /// Lowest signal photon number present in this block.
    na_min: usize,
    unitary: DMatrix<C64>,
}

/// `exp(angle (a^+ b - a b^+))` on truncated modes `(a, b)`.
#[derive(Clone, Debug)]
pub struct BeamSplitterUnitary {
    dim_a: FockDim,
    dim_b: FockDim,
    blocks: Vec<Block>,
}

impl BeamSplitterUnitary {
    pub fn new(angle: f64, dim_a: FockDim, dim_b: FockDim) -> Self {
        let (da, db) = (dim_a.get(), dim_b.get());
        let blocks = (0..da + db - 1)
            .map(|total| {
                let na_min = total.saturating_sub(db - 1);
                let na_max = total.min(da - 1);
                let size = na_max - na_min + 1;
                let mut g = DMatrix::<C64>::zeros(size, size);
                for j in 0..size {
                    let na = na_min + j;
                    let nb = total - na;
                    if j + 1 < size {
                        // a^+ b: |na, nb> -> sqrt((na + 1) nb) |na + 1, nb - 1>
                        g[(j + 1, j)] = C64::new(angle * (((na + 1) * nb) as f64).sqrt(), 0.0);
                    }
                    if j > 0 {
                        // -a b^+: |na, nb> -> -sqrt(na (nb + 1)) |na - 1, nb + 1>
                        g[(j - 1, j)] = C64::new(-angle * ((na * (nb + 1)) as f64).sqrt(), 0.0);
                    }
                }
                Block { na_min, unitary: expm(&g) }
            })
            .collect();
        BeamSplitterUnitary { dim_a, dim_b, blocks }
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.blocks.iter().map(|b| linalg::unitarity_defect(&b.unitary)).fold(0.0, f64::max)
    }

    pub fn apply(&self, s: &TwoModeState) -> Result<TwoModeState> {
        if s.dim_a() != self.dim_a || s.dim_b() != self.dim_b {
            return Err(Error::DimensionMismatch {
                expected: self.dim_a.get() * self.dim_b.get(),
                found: s.dim_a().get() * s.dim_b().get(),
            });
        }
        let mut out = DMatrix::<C64>::zeros(self.dim_a.get(), self.dim_b.get());
        for (total, block) in self.blocks.iter().enumerate() {
            let size = block.unitary.nrows();
            for j in 0..size {
                let (na, nb) = (block.na_min + j, total - block.na_min - j);
                let mut acc = ZERO;
                for k in 0..size {
                    acc += block.unitary[(j, k)] * s.amplitude(block.na_min + k, total - block.na_min - k);
                }
                out[(na, nb)] = acc;
            }
        }
        Ok(TwoModeState::from_matrix(out))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BsValidationReport {
    pub alpha: C64,
    pub reflectance: f64,
    pub ancilla_dim: usize,
    /// `<target| rho_a |target>` with `target = D(alpha) input`.
    pub fidelity: f64,
    pub reduced_purity: f64,
}

/// Send `input (x) |gamma>` through the physical splitter, trace out the
/// ancilla and compare the signal with the ideal displacement of `input`.
pub fn bs_displacement_validation(
    p: &BsDisplacementParams,
    input: &ModeState,
    ancilla_dim: FockDim,
) -> Result<BsValidationReport> {
    input.require_normalized()?;
    displacement_guard(p.gamma(), ancilla_dim)?;
    let dim_a = input.dim();
    let target = input.apply_to_mode(&displacement(p.alpha(), dim_a)?, Mode::A)?;
    let joint = tensor(input, &coherent_state(p.gamma(), ancilla_dim)?);
    let out = BeamSplitterUnitary::new(p.mixing_angle(), dim_a, ancilla_dim).apply(&joint)?;
    let rho = out.reduced_a();
    Ok(BsValidationReport {
        alpha: p.alpha(),
        reflectance: p.reflectance(),
        ancilla_dim: ancilla_dim.get(),
        fidelity: rho.fidelity_to_pure(&target)?.clamp(0.0, 1.0),
        reduced_purity: rho.purity(),
    })
}
