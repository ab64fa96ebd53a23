//! Mach-Zehnder interferometer with a dual-rail photon, a phase shifter and
//! the conditional displacement device in the `b` arm.
//!
//! The register starts in `|psi>_a |0>_b |1>_c`. After the first splitter,
//! the phase shifter and the device, the second splitter leaves
//!
//! ```text
//! (1/2) e^{-i theta |alpha|^2} { |0>_b|1>_c [e^{i xi} - D(beta)] |psi>
//!                             + i |1>_b|0>_c [e^{i xi} + D(beta)] |psi> }
//! ```
//!
//! with `xi = eta + theta |alpha|^2`, so detecting `|1>_b|0>_c` (D1 fires)
//! heralds `|psi> + D(beta)|psi>` and `|0>_b|1>_c` (D2 fires) heralds the
//! difference once the phase shifter is set to `eta = -theta |alpha|^2`.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::DVector;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::cdo::{exact_block_operator, CdoParams};
use crate::displacement::DisplacementKernel;
use crate::error::{Error, Result};
use crate::fock::{displacement_guard, DensityMatrix, FockDim, ModeState, RailPattern, Sign, ThreeSystemState};
use crate::linalg::{cis, C64};
use crate::optics::DualRailOp;

/// Branch probabilities below this cannot be normalized.
pub const POSTSELECTION_THRESHOLD: f64 = 1e-12;

/// Which model of the device sits in the `b` arm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CdoMode {
    /// `e^{-i theta |alpha|^2 n_b} D(n_b beta)`.
    Ideal,
    /// Full conjugated Kerr evolution at finite `theta`.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MziParams {
    eta: f64,
    cdo: CdoParams,
    mode: CdoMode,
}

impl MziParams {
    pub fn new(eta: f64, cdo: CdoParams, mode: CdoMode) -> Self {
        MziParams { eta, cdo, mode }
    }

    /// Phase shifter chosen so that `xi = xi0`.
    pub fn with_xi(xi0: f64, cdo: CdoParams, mode: CdoMode) -> Self {
        MziParams { eta: xi0 - cdo.kerr_phase(), cdo, mode }
    }

    /// `eta = -theta |alpha|^2`, i.e. `xi = 0`.
    pub fn balanced(cdo: CdoParams, mode: CdoMode) -> Self {
        MziParams::with_xi(0.0, cdo, mode)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn cdo(&self) -> &CdoParams {
        &self.cdo
    }

    pub fn mode(&self) -> CdoMode {
        self.mode
    }

    pub fn xi(&self) -> f64 {
        self.eta + self.cdo.kerr_phase()
    }
}

/// Detector click pattern at the output of the second splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DetectionEvent {
    /// `|1>_b|0>_c`
    D1Fires,
    /// `|0>_b|1>_c`
    D2Fires,
}

impl DetectionEvent {
    pub fn pattern(self) -> RailPattern {
        match self {
            DetectionEvent::D1Fires => RailPattern::OneZero,
            DetectionEvent::D2Fires => RailPattern::ZeroOne,
        }
    }

    /// Event heralding `|psi> + sign D(beta)|psi>` at `xi = 0`.
    pub fn for_sign(sign: Sign) -> Self {
        match sign {
            Sign::Plus => DetectionEvent::D1Fires,
            Sign::Minus => DetectionEvent::D2Fires,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionOutcome {
    pub event: DetectionEvent,
    pub probability: f64,
    /// Normalized mode-`a` state, global phase fixed so that its largest
    /// amplitude is real and positive.
    pub conditional_state: ModeState,
}

/// `|psi>_a |0>_b |1>_c`.
pub fn build_mzi_input(psi: &ModeState) -> Result<ThreeSystemState> {
    psi.require_normalized()?;
    let zero = DVector::zeros(psi.dim().get());
    Ok(ThreeSystemState::from_vectors(psi.vector().clone(), zero))
}

fn guard(p: &MziParams, dim_a: FockDim) -> Result<()> {
    displacement_guard(p.cdo.beta(), dim_a)
}

/// Device action on the register: only the `|1>_b` block is touched.
pub(crate) fn apply_cdo_stage(kernel: &DisplacementKernel, p: &MziParams, s: &ThreeSystemState) -> ThreeSystemState {
    let dim_a = s.dim_a();
    s.map_blocks(|pattern, v| match pattern {
        RailPattern::ZeroOne => v.clone(),
        RailPattern::OneZero => match p.mode {
            CdoMode::Ideal => kernel.apply(p.cdo.beta(), v) * cis(-p.cdo.kerr_phase()),
            CdoMode::Exact => exact_block_operator(&p.cdo, 1, dim_a) * v,
        },
    })
}

pub(crate) fn run_mzi_with(kernel: &DisplacementKernel, p: &MziParams, psi: &DVector<C64>) -> ThreeSystemState {
    let zero = DVector::zeros(psi.len());
    let input = ThreeSystemState::from_vectors(psi.clone(), zero);
    let bs = DualRailOp::beam_splitter();
    let before = bs.then(&DualRailOp::phase_shifter(p.eta)).apply(&input);
    let after = apply_cdo_stage(kernel, p, &before);
    bs.apply(&after)
}

/// Full pipeline: BS1, phase shifter, device, BS2.
pub fn run_mzi(p: &MziParams, psi: &ModeState) -> Result<ThreeSystemState> {
    psi.require_normalized()?;
    guard(p, psi.dim())?;
    let kernel = DisplacementKernel::new(psi.dim());
    Ok(run_mzi_with(&kernel, p, psi.vector()))
}

pub(crate) fn probabilities_with(
    kernel: &DisplacementKernel,
    p: &MziParams,
    components: &[(f64, ModeState)],
) -> (f64, f64) {
    components.iter().fold((0.0, 0.0), |(p01, p10), (w, psi)| {
        let out = run_mzi_with(kernel, p, psi.vector());
        (
            p01 + w * out.branch_probability(RailPattern::ZeroOne),
            p10 + w * out.branch_probability(RailPattern::OneZero),
        )
    })
}

/// `(P01, P10)` from running every pure component of `rho` through the
/// interferometer.
pub fn detection_probabilities(p: &MziParams, rho: &DensityMatrix) -> Result<(f64, f64)> {
    guard(p, rho.dim())?;
    let kernel = DisplacementKernel::new(rho.dim());
    Ok(probabilities_with(&kernel, p, &rho.pure_components()))
}

/// Project the rail register onto the clicked pattern.
pub fn postselect(s: &ThreeSystemState, event: DetectionEvent) -> Result<DetectionOutcome> {
    let probability = s.branch_probability(event.pattern()) / s.norm_sqr();
    if probability < POSTSELECTION_THRESHOLD {
        return Err(Error::DegeneratePostselection(probability));
    }
    let conditional_state = s.block(event.pattern()).normalize()?.canonical_phase();
    Ok(DetectionOutcome { event, probability, conditional_state })
}

/// Herald `|psi> + sign D(beta)|psi>` (normalized). The phase shifter in `p`
/// must already balance the Kerr phase, see [`MziParams::balanced`].
pub fn prepare_superposition(psi: &ModeState, sign: Sign, p: &MziParams) -> Result<DetectionOutcome> {
    let xi = p.xi();
    let wrapped = xi - (xi / TAU).round() * TAU;
    if wrapped.abs() > 1e-9 {
        return Err(Error::PhaseNotBalanced(xi));
    }
    let out = run_mzi(p, psi)?;
    postselect(&out, DetectionEvent::for_sign(sign))
}

/// Analytic `|psi> + sign D(beta)|psi>`, normalized with canonical phase.
pub fn superposition_target(psi: &ModeState, beta: C64, sign: Sign) -> Result<ModeState> {
    displacement_guard(beta, psi.dim())?;
    let kernel = DisplacementKernel::new(psi.dim());
    let displaced = kernel.apply(beta, psi.vector());
    let sum = psi.vector() + displaced * C64::new(sign.value(), 0.0);
    Ok(ModeState::from_vector(sum).normalize()?.canonical_phase())
}

/// Both heralded outcomes, for completeness checks.
pub fn both_outcomes(s: &ThreeSystemState) -> Vec<Result<DetectionOutcome>> {
    [DetectionEvent::D1Fires, DetectionEvent::D2Fires].iter().map(|&e| postselect(s, e)).collect()
}
