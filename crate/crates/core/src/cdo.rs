//! Conditional displacement from a cross-Kerr medium between two displacing
//! beam splitters.
//!
//! The device applies `D_a^+(alpha) exp(-i theta n_a n_b) D_a(alpha)`. Because
//! the conjugation only shifts `a -> a + alpha`, this equals
//! `exp(-i theta (a^+ + alpha^*)(a + alpha) n_b)` exactly. Per `b`-photon
//! number the mode-`a` action is therefore
//!
//! ```text
//! e^{-i theta |alpha|^2 n_b} exp(n_b (beta a^+ - beta^* a - i theta a^+ a)),  beta = -i theta alpha
//! ```
//!
//! whose generator stays small even when `|alpha|` is far beyond what a
//! truncated `D(alpha)` could represent. Dropping the `-i theta a^+ a` term
//! leaves the ideal gate `e^{-i theta |alpha|^2 n_b} D_a(n_b beta)`.

use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::displacement::DisplacementKernel;
use crate::error::{Error, Result};
use crate::fock::{displacement_guard, ApplyToMode, FockDim, Mode, TwoModeState};
use crate::linalg::{cis, expm, C64, ZERO};
use crate::optics::{displacement, kerr_unitary, KerrParams, OperatorMatrix};

/// Device setting: beam-splitter displacement `alpha` and Kerr phase `theta`.
/// The conditional amplitude `beta = -i theta alpha` is always derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdoParams {
    alpha: C64,
    kerr: KerrParams,
}

impl CdoParams {
    pub fn new(alpha: C64, theta: f64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::InvalidParameter("alpha must be finite"));
        }
        Ok(CdoParams { alpha, kerr: KerrParams::new(theta)? })
    }

    /// Choose `alpha = i beta / theta` so the device realizes `beta`.
    pub fn from_beta(beta: C64, theta: f64) -> Result<Self> {
        if theta == 0.0 {
            return Err(Error::InvalidParameter("a vanishing Kerr phase cannot produce a nonzero beta"));
        }
        CdoParams::new(C64::new(0.0, 1.0) * beta / theta, theta)
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.kerr.theta()
    }

    pub fn kerr(&self) -> KerrParams {
        self.kerr
    }

    pub fn beta(&self) -> C64 {
        C64::new(0.0, -self.theta()) * self.alpha
    }

    /// `theta |alpha|^2`, the phase per `b` photon that accompanies the gate.
    pub fn kerr_phase(&self) -> f64 {
        self.theta() * self.alpha.norm_sqr()
    }
}

fn number_guard(beta: C64, s: &TwoModeState) -> Result<()> {
    displacement_guard(beta * (s.dim_b().get() - 1) as f64, s.dim_a())
}

/// Mode-`a` operator applied by the exact device when mode `b` holds `n_b`
/// photons.
pub fn exact_block_operator(p: &CdoParams, n_b: usize, dim_a: FockDim) -> DMatrix<C64> {
    let d = dim_a.get();
    if n_b == 0 {
        return DMatrix::identity(d, d);
    }
    let nb = n_b as f64;
    let beta = p.beta();
    let theta = p.theta();
    let generator = DMatrix::from_fn(d, d, |m, n| {
        if m == n {
            C64::new(0.0, -theta * nb * n as f64)
        } else if m == n + 1 {
            beta * (nb * (m as f64).sqrt())
        } else if n == m + 1 {
            -beta.conj() * (nb * (n as f64).sqrt())
        } else {
            ZERO
        }
    });
    expm(&generator) * cis(-p.kerr_phase() * nb)
}

/// Exact device evolution of a two-mode state.
pub fn exact_cdo(p: &CdoParams, s: &TwoModeState) -> Result<TwoModeState> {
    number_guard(p.beta(), s)?;
    let da = s.dim_a();
    let mut out = s.matrix().clone();
    for n_b in 1..s.dim_b().get() {
        let block = exact_block_operator(p, n_b, da) * s.matrix().column(n_b);
        out.set_column(n_b, &block);
    }
    Ok(TwoModeState::from_matrix(out))
}

/// Exact device evolution staged as `D(alpha)`, then the Kerr unitary, then
/// `D^+(alpha)`. Needs `|alpha|^2 <= dim_a / 4`.
pub fn exact_cdo_staged(p: &CdoParams, s: &TwoModeState) -> Result<TwoModeState> {
    let dop = displacement(p.alpha(), s.dim_a())?;
    let kerr = kerr_unitary(p.kerr(), s.dim_a(), s.dim_b());
    let s = s.apply_to_mode(&dop, Mode::A)?;
    let s = s.apply_pair(&kerr)?;
    s.apply_to_mode(&dop.adjoint(), Mode::A)
}

/// `D^+(alpha) U_K D(alpha)` composed into one two-mode operator.
pub fn conjugated_kerr_operator(p: &CdoParams, dim_a: FockDim, dim_b: FockDim) -> Result<OperatorMatrix> {
    let d = displacement(p.alpha(), dim_a)?.on_mode_a_of_pair(dim_b)?;
    let k = kerr_unitary(p.kerr(), dim_a, dim_b);
    d.adjoint().compose(&k)?.compose(&d)
}

/// Ideal gate `e^{-i kerr_phase n_b} U_CD(beta)`: mode `a` is displaced by
/// `n_b beta` inside each `b`-photon-number block.
pub fn ideal_cdo(beta: C64, kerr_phase: f64, s: &TwoModeState) -> Result<TwoModeState> {
    number_guard(beta, s)?;
    let kernel = DisplacementKernel::new(s.dim_a());
    Ok(ideal_cdo_with(&kernel, beta, kerr_phase, s))
}

pub(crate) fn ideal_cdo_with(kernel: &DisplacementKernel, beta: C64, kerr_phase: f64, s: &TwoModeState) -> TwoModeState {
    let mut out = s.matrix().clone();
    for n_b in 1..s.dim_b().get() {
        let nb = n_b as f64;
        let col = s.matrix().column(n_b).into_owned();
        let block = kernel.apply(beta * nb, &col) * cis(-kerr_phase * nb);
        out.set_column(n_b, &block);
    }
    TwoModeState::from_matrix(out)
}

/// `1 - |<exact|ideal>|^2` for the two evolutions of `s`.
pub fn cdo_infidelity(p: &CdoParams, s: &TwoModeState) -> Result<f64> {
    let exact = exact_cdo(p, s)?;
    let ideal = ideal_cdo(p.beta(), p.kerr_phase(), s)?;
    let overlap = exact.overlap(&ideal)?.norm_sqr() / (exact.norm_sqr() * ideal.norm_sqr());
    Ok((1.0 - overlap).max(0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub theta: f64,
    pub alpha: C64,
    pub infidelity: f64,
    /// `ln(I_prev / I) / ln(theta_prev / theta)` against the previous row.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceScan {
    pub beta: C64,
    pub rows: Vec<ScanRow>,
    /// Infidelity strictly decreases as `|theta|` decreases.
    pub monotone_decreasing: bool,
}

impl ConvergenceScan {
    pub fn estimated_order(&self) -> Option<f64> {
        self.rows.iter().rev().find_map(|r| r.order)
    }
}

/// Infidelity of the device against the ideal gate at fixed `beta` over a
/// list of Kerr phases, with `alpha = i beta / theta`. A zero phase produces
/// `beta = 0` for any `alpha` and is evaluated at `alpha = 0`.
pub fn convergence_scan(beta: C64, thetas: &[f64], probe: &TwoModeState) -> Result<ConvergenceScan> {
    if thetas.is_empty() {
        return Err(Error::InvalidParameter("theta list is empty"));
    }
    let mut rows: Vec<ScanRow> = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let p = if theta == 0.0 { CdoParams::new(ZERO, 0.0)? } else { CdoParams::from_beta(beta, theta)? };
        let infidelity = cdo_infidelity(&p, probe)?;
        let order = rows.last().and_then(|prev| {
            let ratio = prev.theta / theta;
            (prev.infidelity > 0.0 && infidelity > 0.0 && ratio > 0.0 && ratio != 1.0)
                .then(|| (prev.infidelity / infidelity).ln() / ratio.ln())
        });
        rows.push(ScanRow { theta, alpha: p.alpha(), infidelity, order });
    }
    let mut sorted: Vec<&ScanRow> = rows.iter().collect();
    sorted.sort_by(|a, b| b.theta.abs().total_cmp(&a.theta.abs()));
    let monotone_decreasing = sorted.windows(2).all(|w| w[1].theta.abs() < w[0].theta.abs() && w[1].infidelity < w[0].infidelity);
    Ok(ConvergenceScan { beta, rows, monotone_decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, fock_state, tensor, ModeState};
    use crate::linalg::ONE;
    use core::f64::consts::FRAC_1_SQRT_2;
    use proptest::prelude::*;

    fn dim(d: usize) -> FockDim {
        FockDim::new(d).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn plus_b() -> ModeState {
        ModeState::from_amplitudes(alloc::vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap()
    }

    fn probe(n_a: usize, da: usize) -> TwoModeState {
        tensor(&fock_state(n_a, dim(da)).unwrap(), &plus_b())
    }

    #[test]
    fn beta_is_derived() {
        let p = CdoParams::new(c(50.0, 0.0), 0.01).unwrap();
        assert!((p.beta() - c(0.0, -0.5)).norm() < 1e-15);
        let q = CdoParams::from_beta(c(0.0, -0.5), 0.01).unwrap();
        assert!((q.alpha() - c(50.0, 0.0)).norm() < 1e-12);
        assert!(CdoParams::from_beta(ONE, 0.0).is_err());
    }

    #[test]
    fn exact_cdo_trivial_cases() {
        let s = tensor(&coherent_state(c(0.5, 0.2), dim(16)).unwrap(), &plus_b());
        // theta = 0
        let p = CdoParams::new(c(1.2, -0.4), 0.0).unwrap();
        assert!(exact_cdo(&p, &s).unwrap().max_abs_diff(&s) < 1e-14);
        // b in |0>
        let s0 = tensor(&coherent_state(c(0.5, 0.2), dim(16)).unwrap(), &fock_state(0, dim(2)).unwrap());
        let p = CdoParams::new(c(1.2, -0.4), 0.3).unwrap();
        assert_eq!(exact_cdo(&p, &s0).unwrap(), s0);
        // alpha = 0 -> pure Kerr
        let p = CdoParams::new(ZERO, 0.3).unwrap();
        let kerr = s.apply_pair(&kerr_unitary(p.kerr(), dim(16), dim(2))).unwrap();
        assert!(exact_cdo(&p, &s).unwrap().max_abs_diff(&kerr) < 1e-13);
    }

    #[test]
    fn generator_route_matches_staged_and_composed_routes() {
        let s = tensor(
            &coherent_state(c(0.3, -0.2), dim(32)).unwrap(),
            &ModeState::from_amplitudes(alloc::vec![c(0.6, 0.0), c(0.0, 0.8), ZERO]).unwrap(),
        );
        let s = TwoModeState::from_fn(dim(32), dim(3), |a, b| {
            if b == 2 { c(0.1, 0.0) * s.amplitude(a, 0) } else { s.amplitude(a, b) }
        });
        let s_norm = s.norm_sqr().sqrt();
        let s = TwoModeState::from_fn(dim(32), dim(3), |a, b| s.amplitude(a, b) / s_norm);
        let p = CdoParams::new(c(0.8, 0.5), 0.2).unwrap();
        let generator = exact_cdo(&p, &s).unwrap();
        let staged = exact_cdo_staged(&p, &s).unwrap();
        let composed = s.apply_pair(&conjugated_kerr_operator(&p, dim(32), dim(3)).unwrap()).unwrap();
        assert!(generator.max_abs_diff(&staged) < 1e-10, "{}", generator.max_abs_diff(&staged));
        assert!(generator.max_abs_diff(&composed) < 1e-10);
        assert!(staged.max_abs_diff(&composed) < 1e-12);
    }

    #[test]
    fn staged_route_needs_alpha_guard() {
        let p = CdoParams::from_beta(c(0.0, -0.5), 0.01).unwrap();
        assert!(matches!(exact_cdo_staged(&p, &probe(1, 32)), Err(Error::TruncationRisk { .. })));
        assert!(exact_cdo(&p, &probe(1, 32)).is_ok());
    }

    #[test]
    fn ideal_cdo_blocks() {
        let d = dim(24);
        let psi = coherent_state(c(0.4, 0.3), d).unwrap();
        let beta = c(0.7, -0.2);
        let phase = 1.9;
        let s0 = tensor(&psi, &fock_state(0, dim(3)).unwrap());
        assert_eq!(ideal_cdo(beta, phase, &s0).unwrap(), s0);

        let s1 = tensor(&psi, &fock_state(1, dim(3)).unwrap());
        let want = psi.apply_to_mode(&displacement(beta, d).unwrap(), Mode::A).unwrap().scale(cis(-phase));
        let got = ideal_cdo(beta, phase, &s1).unwrap();
        assert!(got.max_abs_diff(&tensor(&want, &fock_state(1, dim(3)).unwrap())) < 1e-12);

        let s2 = tensor(&psi, &fock_state(2, dim(3)).unwrap());
        let want = psi.apply_to_mode(&displacement(beta * 2.0, d).unwrap(), Mode::A).unwrap().scale(cis(-2.0 * phase));
        let got = ideal_cdo(beta, phase, &s2).unwrap();
        assert!(got.max_abs_diff(&tensor(&want, &fock_state(2, dim(3)).unwrap())) < 1e-12);
    }

    #[test]
    fn ideal_cdo_guard_scales_with_b_photons() {
        let s = tensor(&fock_state(0, dim(16)).unwrap(), &fock_state(0, dim(3)).unwrap());
        // |2 beta|^2 = 9 > 4
        assert!(matches!(ideal_cdo(c(1.5, 0.0), 0.0, &s), Err(Error::TruncationRisk { .. })));
    }

    #[test]
    fn infidelity_trivial_cases() {
        let s = probe(1, 32);
        assert!(cdo_infidelity(&CdoParams::new(c(3.0, 1.0), 0.0).unwrap(), &s).unwrap() < 1e-12);
        let s0 = tensor(&fock_state(1, dim(32)).unwrap(), &fock_state(0, dim(2)).unwrap());
        assert!(cdo_infidelity(&CdoParams::new(c(20.0, 0.0), 0.02).unwrap(), &s0).unwrap() < 1e-12);
    }

    // Regression fixture: probe |1>_a (|0>+|1>)_b / sqrt2 at fixed beta = -0.5i.
    #[test]
    fn infidelity_decreases_with_theta() {
        let s = probe(1, 32);
        let beta = c(0.0, -0.5);
        let i4 = cdo_infidelity(&CdoParams::from_beta(beta, 0.04).unwrap(), &s).unwrap();
        let i2 = cdo_infidelity(&CdoParams::from_beta(beta, 0.02).unwrap(), &s).unwrap();
        assert!(i2 < i4, "{i2} vs {i4}");
    }

    #[test]
    fn scan_degenerate_inputs() {
        let s = probe(1, 32);
        let one = convergence_scan(c(0.0, -0.5), &[0.02], &s).unwrap();
        assert_eq!(one.rows.len(), 1);
        assert_eq!(one.estimated_order(), None);
        let zero = convergence_scan(ZERO, &[0.04, 0.02, 0.01], &s).unwrap();
        // only the residual Kerr phase e^{-i theta n_a n_b} remains
        for r in &zero.rows {
            assert!((r.infidelity - (r.theta / 2.0).sin().powi(2)).abs() < 1e-12, "{r:?}");
        }
        assert!(convergence_scan(ZERO, &[], &s).is_err());
        let with_zero = convergence_scan(c(0.0, -0.5), &[0.02, 0.0], &s).unwrap();
        assert_eq!(with_zero.rows[1].infidelity, 0.0);
    }

    #[test]
    fn composed_operator_is_unitary_pair() {
        let p = CdoParams::new(c(0.5, 0.0), 0.1).unwrap();
        let op = conjugated_kerr_operator(&p, dim(20), dim(2)).unwrap();
        assert_eq!(op.dims(), crate::optics::OperatorDims::Pair(dim(20), dim(2)));
        assert!(op.is_unitary());
    }

    proptest! {
        #[test]
        fn both_evolutions_preserve_norm(
            amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
            b0 in 0.05f64..1.0, b1 in 0.05f64..1.0,
            theta in 0.005f64..0.1, bre in -1.0f64..1.0, bim in -1.0f64..1.0,
        ) {
            let psi = ModeState::from_amplitudes(
                amps.iter().enumerate().map(|(n, &(x, y))| c(x, y) * (-0.5 * n as f64).exp()).collect()
            ).unwrap();
            let psi = psi.embed(dim(32)).unwrap().normalize().unwrap();
            let phi = ModeState::from_amplitudes(alloc::vec![c(b0, 0.0), c(0.0, b1)]).unwrap().normalize().unwrap();
            let s = tensor(&psi, &phi);
            let p = CdoParams::from_beta(c(bre, bim), theta).unwrap();
            let exact = exact_cdo(&p, &s).unwrap();
            let ideal = ideal_cdo(p.beta(), p.kerr_phase(), &s).unwrap();
            prop_assert!((exact.norm_sqr() - 1.0).abs() < 1e-10);
            prop_assert!((ideal.norm_sqr() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn ideal_block_identity(re in -1.0f64..1.0, im in -1.0f64..1.0, n_b in 0usize..3, phase in -10.0f64..10.0) {
            let d = dim(32);
            let psi = coherent_state(c(0.3 * re, -0.5 * im), d).unwrap();
            let beta = c(re, im);
            let s = tensor(&psi, &fock_state(n_b, dim(3)).unwrap());
            let out = ideal_cdo(beta, phase, &s).unwrap();
            let want = psi.apply_to_mode(&displacement(beta * n_b as f64, d).unwrap(), Mode::A).unwrap();
            let got = out.b_component(n_b);
            let ov = crate::fock::inner_product(&want, &got).unwrap();
            prop_assert!((ov.norm() - 1.0).abs() < 1e-10);
            let aligned = want.scale(ov);
            prop_assert!(aligned.amplitudes().iter().zip(got.amplitudes()).all(|(x, y)| (x - y).norm() < 1e-10));
        }
    }
}
