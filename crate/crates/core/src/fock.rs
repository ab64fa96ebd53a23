//! States on truncated Fock spaces and the generic linear algebra acting on them.
//!
//! Mode `a` is the signal mode. Modes `b` and `c` are the two rails of the
//! interferometer and, in [`ThreeSystemState`], are only ever populated in the
//! single-photon patterns `|0>_b|1>_c` and `|1>_b|0>_c`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, ONE, ZERO};
use crate::optics::{OperatorDims, OperatorMatrix};

/// Top-decile tail mass below which a state counts as physical.
pub const PHYSICAL_TAIL_THRESHOLD: f64 = 1e-8;

/// Tolerance used when a precondition asks for a normalized input.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Number of retained Fock levels, `|0>..|dim-1>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockDim(usize);

impl FockDim {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(FockDim(dim))
    }

    #[inline]
    pub const fn get(self) -> usize {
        self.0
    }

    /// Smallest dimension whose displacement guard admits `|amplitude|`.
    pub fn for_amplitude(amplitude: f64) -> FockDim {
        // Shave rounding noise so that e.g. |4 sqrt 2|^2 maps to 128, not 129.
        let needed = (4.0 * amplitude * amplitude * (1.0 - 1e-12)).ceil() as usize;
        FockDim(needed.max(2))
    }

    /// Number of levels making up the top decile, at least one.
    pub fn tail_levels(self) -> usize {
        (self.0 + 9) / 10
    }
}

/// Truncation guard `|alpha|^2 <= dim / 4` used by every displacement.
pub fn displacement_guard(alpha: C64, dim: FockDim) -> Result<()> {
    let amplitude_sq = alpha.norm_sqr();
    if amplitude_sq > 0.25 * dim.get() as f64 * (1.0 + 1e-12) {
        return Err(Error::TruncationRisk { amplitude_sq, dim: dim.get() });
    }
    Ok(())
}

/// Which tensor factor an operator targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    A,
    B,
    C,
}

/// Pure state of a single truncated mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeState {
    amplitudes: DVector<C64>,
}

impl ModeState {
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        FockDim::new(amplitudes.len())?;
        Ok(ModeState { amplitudes: DVector::from_vec(amplitudes) })
    }

    pub(crate) fn from_vector(amplitudes: DVector<C64>) -> Self {
        debug_assert!(amplitudes.len() >= 2);
        ModeState { amplitudes }
    }

    pub fn dim(&self) -> FockDim {
        FockDim(self.amplitudes.len())
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amplitudes[n]
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub(crate) fn vector(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        linalg::norm_sqr(&self.amplitudes)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.norm_sqr()))
        }
    }

    pub fn normalize(&self) -> Result<ModeState> {
        let n = self.norm_sqr();
        if n <= f64::MIN_POSITIVE {
            return Err(Error::ZeroNorm);
        }
        Ok(ModeState { amplitudes: &self.amplitudes * C64::new(1.0 / n.sqrt(), 0.0) })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum::<f64>()
            / self.norm_sqr()
    }

    /// Probability held by the top-decile levels, relative to the total.
    pub fn tail_mass(&self) -> f64 {
        let d = self.amplitudes.len();
        let start = d - self.dim().tail_levels();
        let tail: f64 = self.amplitudes.iter().skip(start).map(|z| z.norm_sqr()).sum();
        tail / self.norm_sqr()
    }

    pub fn is_physical(&self) -> bool {
        self.tail_mass() < PHYSICAL_TAIL_THRESHOLD
    }

    pub fn scale(&self, factor: C64) -> ModeState {
        ModeState { amplitudes: &self.amplitudes * factor }
    }

    /// Copy into a larger (or equal) dimension, padding with zeros.
    pub fn embed(&self, dim: FockDim) -> Result<ModeState> {
        let d = self.amplitudes.len();
        if dim.get() < d {
            return Err(Error::DimensionMismatch { expected: d, found: dim.get() });
        }
        let mut v = DVector::zeros(dim.get());
        v.rows_mut(0, d).copy_from(&self.amplitudes);
        Ok(ModeState { amplitudes: v })
    }

    /// Multiply by the phase that makes the largest-magnitude amplitude real
    /// and positive.
    pub fn canonical_phase(&self) -> ModeState {
        let (_, pivot) = self
            .amplitudes
            .iter()
            .enumerate()
            .fold((0.0, ZERO), |(m, p), (_, z)| if z.norm() > m { (z.norm(), *z) } else { (m, p) });
        if pivot.norm() == 0.0 {
            return self.clone();
        }
        self.scale(pivot.conj() / pivot.norm())
    }
}

/// `|n>` in dimension `d`.
pub fn fock_state(n: usize, d: FockDim) -> Result<ModeState> {
    if n >= d.get() {
        return Err(Error::LevelOutOfRange { level: n, dim: d.get() });
    }
    let mut v = DVector::zeros(d.get());
    v[n] = ONE;
    Ok(ModeState { amplitudes: v })
}

/// Unnormalized coherent amplitudes `alpha^n e^{-|alpha|^2/2} / sqrt(n!)`,
/// built by recurrence.
pub(crate) fn coherent_amplitudes(alpha: C64, d: usize) -> DVector<C64> {
    let mut v = DVector::zeros(d);
    v[0] = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 1..d {
        v[n] = v[n - 1] * alpha / (n as f64).sqrt();
    }
    v
}

/// Coherent state `|alpha>` renormalized on the truncated space.
///
/// The tail mass of the result is available through [`ModeState::tail_mass`].
pub fn coherent_state(alpha: C64, d: FockDim) -> Result<ModeState> {
    displacement_guard(alpha, d)?;
    ModeState { amplitudes: coherent_amplitudes(alpha, d.get()) }.normalize()
}

/// Sign of a two-branch superposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Even (`Plus`) or odd (`Minus`) cat `(|a0> +- |-a0>)`, normalized.
pub fn cat_state(alpha0: C64, sign: Sign, d: FockDim) -> Result<ModeState> {
    displacement_guard(alpha0, d)?;
    let plus = coherent_amplitudes(alpha0, d.get());
    let minus = coherent_amplitudes(-alpha0, d.get());
    ModeState { amplitudes: plus + minus * C64::new(sign.value(), 0.0) }.normalize()
}

fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `<x|y>`, conjugate-linear in `x`.
pub fn inner_product(x: &ModeState, y: &ModeState) -> Result<C64> {
    check_same_dim(x.amplitudes.len(), y.amplitudes.len())?;
    Ok(linalg::dot(&x.amplitudes, &y.amplitudes))
}

/// `|<x|y>|^2`, clamped to `[0, 1]`.
pub fn fidelity(x: &ModeState, y: &ModeState) -> Result<f64> {
    Ok(inner_product(x, y)?.norm_sqr().clamp(0.0, 1.0))
}

/// Pure state of modes `(a, b)`, stored as a `dim_a x dim_b` matrix of
/// amplitudes indexed by `(n_a, n_b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState {
    amplitudes: DMatrix<C64>,
}

impl TwoModeState {
    pub fn from_fn(dim_a: FockDim, dim_b: FockDim, f: impl FnMut(usize, usize) -> C64) -> Self {
        TwoModeState { amplitudes: DMatrix::from_fn(dim_a.get(), dim_b.get(), f) }
    }

    pub(crate) fn from_matrix(amplitudes: DMatrix<C64>) -> Self {
        TwoModeState { amplitudes }
    }

    pub fn dim_a(&self) -> FockDim {
        FockDim(self.amplitudes.nrows())
    }

    pub fn dim_b(&self) -> FockDim {
        FockDim(self.amplitudes.ncols())
    }

    pub fn amplitude(&self, n_a: usize, n_b: usize) -> C64 {
        self.amplitudes[(n_a, n_b)]
    }

    pub(crate) fn matrix(&self) -> &DMatrix<C64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Unnormalized mode-`a` amplitudes of the `|n_b>` component.
    pub fn b_component(&self, n_b: usize) -> ModeState {
        ModeState { amplitudes: self.amplitudes.column(n_b).into_owned() }
    }

    /// Reduced state of mode `a` after tracing out `b`.
    pub fn reduced_a(&self) -> DensityMatrix {
        DensityMatrix { elements: &self.amplitudes * self.amplitudes.adjoint() }
    }

    pub fn overlap(&self, other: &TwoModeState) -> Result<C64> {
        check_same_dim(self.amplitudes.nrows(), other.amplitudes.nrows())?;
        check_same_dim(self.amplitudes.ncols(), other.amplitudes.ncols())?;
        Ok(self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(x, y)| x.conj() * y).sum())
    }

    pub fn max_abs_diff(&self, other: &TwoModeState) -> f64 {
        linalg::max_abs_diff(&self.amplitudes, &other.amplitudes)
    }

    /// Apply an operator on the joint `(a, b)` space, indexed `n_a * dim_b + n_b`.
    pub fn apply_pair(&self, op: &OperatorMatrix) -> Result<TwoModeState> {
        let (da, db) = (self.amplitudes.nrows(), self.amplitudes.ncols());
        match op.dims() {
            OperatorDims::Pair(a, b) if a.get() == da && b.get() == db => {}
            other => {
                return Err(Error::DimensionMismatch { expected: da * db, found: other.total() })
            }
        }
        let flat = DVector::from_fn(da * db, |k, _| self.amplitudes[(k / db, k % db)]);
        let out = op.elements() * flat;
        Ok(TwoModeState { amplitudes: DMatrix::from_fn(da, db, |i, j| out[i * db + j]) })
    }
}

/// `|a> (x) |b>`.
pub fn tensor(a: &ModeState, b: &ModeState) -> TwoModeState {
    TwoModeState { amplitudes: &a.amplitudes * b.amplitudes.transpose() }
}

/// Dual-rail pattern of the interferometer modes `(b, c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RailPattern {
    /// `|0>_b |1>_c`
    ZeroOne,
    /// `|1>_b |0>_c`
    OneZero,
}

impl RailPattern {
    pub(crate) const fn index(self) -> usize {
        match self {
            RailPattern::ZeroOne => 0,
            RailPattern::OneZero => 1,
        }
    }

    /// Photon number in mode `b`.
    pub const fn photons_b(self) -> usize {
        self.index()
    }

    pub const fn photons_c(self) -> usize {
        1 - self.index()
    }
}

/// Mode `a` entangled with a dual-rail photon in `(b, c)`: one mode-`a`
/// amplitude block per rail pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeSystemState {
    blocks: [DVector<C64>; 2],
}

impl ThreeSystemState {
    pub fn from_blocks(zero_one: ModeState, one_zero: ModeState) -> Result<Self> {
        check_same_dim(zero_one.amplitudes.len(), one_zero.amplitudes.len())?;
        Ok(ThreeSystemState { blocks: [zero_one.amplitudes, one_zero.amplitudes] })
    }

    pub(crate) fn from_vectors(zero_one: DVector<C64>, one_zero: DVector<C64>) -> Self {
        ThreeSystemState { blocks: [zero_one, one_zero] }
    }

    /// Build from full amplitudes indexed `((n_a * 2) + n_b) * 2 + n_c` with
    /// `n_b, n_c` in `{0, 1}`. Fails if `|0>_b|0>_c` or `|1>_b|1>_c` carries
    /// amplitude above `1e-12`.
    pub fn from_full(dim_a: FockDim, amplitudes: &[C64]) -> Result<Self> {
        let d = dim_a.get();
        check_same_dim(4 * d, amplitudes.len())?;
        let at = |na: usize, nb: usize, nc: usize| amplitudes[(na * 2 + nb) * 2 + nc];
        let leak = (0..d)
            .map(|na| at(na, 0, 0).norm_sqr() + at(na, 1, 1).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if leak > 1e-12 {
            return Err(Error::InvalidSubspace(leak));
        }
        Ok(ThreeSystemState {
            blocks: [DVector::from_fn(d, |na, _| at(na, 0, 1)), DVector::from_fn(d, |na, _| at(na, 1, 0))],
        })
    }

    pub fn dim_a(&self) -> FockDim {
        FockDim(self.blocks[0].len())
    }

    pub fn block(&self, pattern: RailPattern) -> ModeState {
        ModeState { amplitudes: self.blocks[pattern.index()].clone() }
    }

    pub(crate) fn blocks(&self) -> &[DVector<C64>; 2] {
        &self.blocks
    }

    pub fn branch_probability(&self, pattern: RailPattern) -> f64 {
        linalg::norm_sqr(&self.blocks[pattern.index()])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.branch_probability(RailPattern::ZeroOne) + self.branch_probability(RailPattern::OneZero)
    }

    pub(crate) fn map_blocks(&self, mut f: impl FnMut(RailPattern, &DVector<C64>) -> DVector<C64>) -> Self {
        ThreeSystemState {
            blocks: [
                f(RailPattern::ZeroOne, &self.blocks[0]),
                f(RailPattern::OneZero, &self.blocks[1]),
            ],
        }
    }
}

/// Linear action of a single-mode operator on one tensor factor.
pub trait ApplyToMode: Sized {
    fn apply_to_mode(&self, op: &OperatorMatrix, target: Mode) -> Result<Self>;
}

fn single_dim(op: &OperatorMatrix) -> Result<usize> {
    match op.dims() {
        OperatorDims::Single(d) => Ok(d.get()),
        OperatorDims::Pair(..) => Err(Error::InvalidParameter("two-mode operator applied to a single mode")),
    }
}

impl ApplyToMode for ModeState {
    fn apply_to_mode(&self, op: &OperatorMatrix, target: Mode) -> Result<Self> {
        if target != Mode::A {
            return Err(Error::UnsupportedMode(target));
        }
        check_same_dim(self.amplitudes.len(), single_dim(op)?)?;
        Ok(ModeState { amplitudes: op.elements() * &self.amplitudes })
    }
}

impl ApplyToMode for TwoModeState {
    fn apply_to_mode(&self, op: &OperatorMatrix, target: Mode) -> Result<Self> {
        let d = single_dim(op)?;
        match target {
            Mode::A => {
                check_same_dim(self.amplitudes.nrows(), d)?;
                Ok(TwoModeState { amplitudes: op.elements() * &self.amplitudes })
            }
            Mode::B => {
                check_same_dim(self.amplitudes.ncols(), d)?;
                Ok(TwoModeState { amplitudes: &self.amplitudes * op.elements().transpose() })
            }
            Mode::C => Err(Error::UnsupportedMode(target)),
        }
    }
}

impl ApplyToMode for ThreeSystemState {
    fn apply_to_mode(&self, op: &OperatorMatrix, target: Mode) -> Result<Self> {
        let d = single_dim(op)?;
        let m = op.elements();
        match target {
            Mode::A => {
                check_same_dim(self.blocks[0].len(), d)?;
                Ok(self.map_blocks(|_, v| m * v))
            }
            Mode::B | Mode::C => {
                check_same_dim(2, d)?;
                // A rail operator keeps the register inside the dual-rail
                // subspace only through its diagonal part.
                let photons = |p: RailPattern| if target == Mode::B { p.photons_b() } else { p.photons_c() };
                let mut leak = 0.0;
                for p in [RailPattern::ZeroOne, RailPattern::OneZero] {
                    let n = photons(p);
                    leak += m[(1 - n, n)].norm_sqr() * linalg::norm_sqr(&self.blocks[p.index()]);
                }
                if leak.sqrt() > 1e-12 {
                    return Err(Error::InvalidSubspace(leak.sqrt()));
                }
                Ok(self.map_blocks(|p, v| v * m[(photons(p), photons(p))]))
            }
        }
    }
}

/// Density matrix of a single truncated mode.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    elements: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace within `1e-10` and eigenvalues
    /// above `-1e-8`.
    pub fn from_matrix(elements: DMatrix<C64>) -> Result<Self> {
        let d = elements.nrows();
        if elements.ncols() != d {
            return Err(Error::InvalidDensity("matrix is not square"));
        }
        FockDim::new(d)?;
        if linalg::max_abs_diff(&elements, &elements.adjoint()) > 1e-10 {
            return Err(Error::InvalidDensity("matrix is not Hermitian"));
        }
        if (elements.trace() - ONE).norm() > 1e-10 {
            return Err(Error::InvalidDensity("trace differs from one"));
        }
        let eig = SymmetricEigen::new(elements.clone());
        if eig.eigenvalues.iter().any(|&l| l < -1e-8) {
            return Err(Error::InvalidDensity("negative eigenvalue"));
        }
        Ok(DensityMatrix { elements })
    }

    /// Convex mixture of normalized pure states.
    pub fn mixture(components: &[(f64, ModeState)]) -> Result<Self> {
        let first = components.first().ok_or(Error::InvalidDensity("empty mixture"))?;
        let d = first.1.amplitudes.len();
        let mut m = DMatrix::zeros(d, d);
        for (w, s) in components {
            check_same_dim(d, s.amplitudes.len())?;
            s.require_normalized()?;
            if *w < 0.0 {
                return Err(Error::InvalidDensity("negative mixture weight"));
            }
            m += &s.amplitudes * s.amplitudes.adjoint() * C64::new(*w, 0.0);
        }
        DensityMatrix::from_matrix(m)
    }

    pub fn dim(&self) -> FockDim {
        FockDim(self.elements.nrows())
    }

    pub fn elements(&self) -> &DMatrix<C64> {
        &self.elements
    }

    pub fn trace(&self) -> C64 {
        self.elements.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.elements * &self.elements).trace().re
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_to_pure(&self, psi: &ModeState) -> Result<f64> {
        check_same_dim(self.elements.nrows(), psi.amplitudes.len())?;
        Ok(linalg::dot(&psi.amplitudes, &(&self.elements * &psi.amplitudes)).re)
    }

    /// Decompose into weighted pure states, dropping weights below `1e-14`.
    /// Rank-one matrices are handled without an eigensolve.
    pub fn pure_components(&self) -> Vec<(f64, ModeState)> {
        let d = self.elements.nrows();
        if (self.purity() - 1.0).abs() < 1e-12 {
            let (k, _) = (0..d).fold((0, -1.0), |(bk, bv), k| {
                let v = self.elements[(k, k)].re;
                if v > bv { (k, v) } else { (bk, bv) }
            });
            let scale = 1.0 / self.elements[(k, k)].re.sqrt();
            let v = self.elements.column(k).map(|z| z * scale);
            return alloc::vec![(1.0, ModeState { amplitudes: v })];
        }
        let eig = SymmetricEigen::new(self.elements.clone());
        eig.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 1e-14)
            .map(|(k, &w)| (w, ModeState { amplitudes: eig.eigenvectors.column(k).into_owned() }))
            .collect()
    }
}

/// `|s><s|`.
pub fn density_from_pure(s: &ModeState) -> DensityMatrix {
    DensityMatrix { elements: &s.amplitudes * s.amplitudes.adjoint() }
}

/// `U rho U^dagger`.
pub fn evolve(rho: &DensityMatrix, u: &OperatorMatrix) -> Result<DensityMatrix> {
    check_same_dim(rho.elements.nrows(), single_dim(u)?)?;
    let m = u.elements();
    Ok(DensityMatrix { elements: m * &rho.elements * m.adjoint() })
}

/// `Tr(rho op)`.
pub fn expectation(rho: &DensityMatrix, op: &OperatorMatrix) -> Result<C64> {
    check_same_dim(rho.elements.nrows(), single_dim(op)?)?;
    Ok((&rho.elements * op.elements()).trace())
}

/// Thermal state with mean photon number `nbar`, renormalized on the
/// truncated space.
pub fn thermal_state(nbar: f64, d: FockDim) -> Result<DensityMatrix> {
    if !(nbar >= 0.0) {
        return Err(Error::InvalidParameter("mean photon number must be non-negative"));
    }
    let ratio = nbar / (1.0 + nbar);
    let weights: Vec<f64> = (0..d.get()).map(|n| ratio.powi(n as i32)).collect();
    let total: f64 = weights.iter().sum();
    let diag = DVector::from_iterator(d.get(), weights.iter().map(|w| C64::new(w / total, 0.0)));
    Ok(DensityMatrix { elements: DMatrix::from_diagonal(&diag) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{identity, number};
    use approx::assert_abs_diff_eq;

    fn dim(d: usize) -> FockDim {
        FockDim::new(d).unwrap()
    }

    #[test]
    fn dim_below_two_rejected() {
        assert_eq!(FockDim::new(1), Err(Error::InvalidDimension(1)));
        assert_eq!(FockDim::new(0), Err(Error::InvalidDimension(0)));
    }

    #[test]
    fn fock_basis_kets() {
        let v = fock_state(0, dim(8)).unwrap();
        assert_eq!(v.amplitude(0), ONE);
        assert!(v.amplitudes()[1..].iter().all(|z| *z == ZERO));
        let v = fock_state(3, dim(8)).unwrap();
        assert_eq!(v.amplitude(3), ONE);
        assert_eq!(v.norm_sqr(), 1.0);
        assert_eq!(fock_state(8, dim(8)), Err(Error::LevelOutOfRange { level: 8, dim: 8 }));
    }

    #[test]
    fn coherent_vacuum_limit_and_closed_form() {
        assert_eq!(coherent_state(ZERO, dim(16)).unwrap(), fock_state(0, dim(16)).unwrap());
        let c = coherent_state(ONE, dim(32)).unwrap();
        // e^{-1/2}
        assert_abs_diff_eq!(c.amplitude(0).re, 0.6065306597126334, epsilon = 1e-14);
        // alpha^n e^{-1/2} / sqrt(n!) at n = 4: e^{-1/2} / sqrt(24)
        assert_abs_diff_eq!(c.amplitude(4).re, 0.6065306597126334 / 24f64.sqrt(), epsilon = 1e-14);
        assert!(c.is_physical());
    }

    #[test]
    fn coherent_guard() {
        assert!(matches!(
            coherent_state(C64::new(3.0, 0.0), dim(16)),
            Err(Error::TruncationRisk { .. })
        ));
        assert!(coherent_state(C64::new(2.0, 0.0), dim(16)).is_ok());
    }

    #[test]
    fn tail_mass_flags_truncated_states() {
        let flat = ModeState::from_amplitudes(alloc::vec![C64::new(0.5, 0.0); 4]).unwrap();
        assert_abs_diff_eq!(flat.tail_mass(), 0.25, epsilon = 1e-15);
        assert!(!flat.is_physical());
    }

    #[test]
    fn inner_products() {
        let d = dim(16);
        let v0 = fock_state(0, d).unwrap();
        let v1 = fock_state(1, d).unwrap();
        assert_eq!(inner_product(&v0, &v0).unwrap(), ONE);
        assert_eq!(inner_product(&v0, &v1).unwrap(), ZERO);
        let c = coherent_state(ONE, d).unwrap();
        assert_abs_diff_eq!(inner_product(&c, &v0).unwrap().re, (-0.5f64).exp(), epsilon = 1e-12);
        let i = C64::new(0.0, 1.0);
        let ci = coherent_state(i, d).unwrap();
        // conjugate-linear in the first slot
        let lhs = inner_product(&ci.scale(i), &v1).unwrap();
        let rhs = inner_product(&ci, &v1).unwrap() * (-i);
        assert!((lhs - rhs).norm() < 1e-15);
        assert!(matches!(inner_product(&v0, &fock_state(0, dim(8)).unwrap()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fidelity_examples() {
        let d = dim(32);
        let s = coherent_state(C64::new(0.7, -0.2), d).unwrap();
        assert_abs_diff_eq!(fidelity(&s, &s).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(fidelity(&fock_state(0, d).unwrap(), &fock_state(1, d).unwrap()).unwrap(), 0.0);
        let p = coherent_state(ONE, d).unwrap();
        let m = coherent_state(-ONE, d).unwrap();
        // e^{-|1-(-1)|^2}
        assert_abs_diff_eq!(fidelity(&p, &m).unwrap(), (-4f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn tensor_examples() {
        let d = dim(4);
        let t = tensor(&fock_state(0, d).unwrap(), &fock_state(0, d).unwrap());
        assert_eq!(t.amplitude(0, 0), ONE);
        let t = tensor(&fock_state(1, d).unwrap(), &fock_state(2, d).unwrap());
        assert_eq!(t.amplitude(1, 2), ONE);
        assert_eq!(t.norm_sqr(), 1.0);
    }

    #[test]
    fn apply_identity_and_number() {
        let d = dim(5);
        let s = tensor(&fock_state(1, d).unwrap(), &fock_state(2, d).unwrap());
        assert_eq!(s.apply_to_mode(&identity(d), Mode::A).unwrap(), s);
        let n = number(d);
        assert_eq!(s.apply_to_mode(&n, Mode::A).unwrap(), s);
        let nb = s.apply_to_mode(&n, Mode::B).unwrap();
        assert!(nb.max_abs_diff(&TwoModeState::from_matrix(s.matrix() * C64::new(2.0, 0.0))) < 1e-15);
        assert!(matches!(s.apply_to_mode(&n, Mode::C), Err(Error::UnsupportedMode(Mode::C))));
        assert!(matches!(s.apply_to_mode(&number(dim(4)), Mode::A), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn three_system_rail_ops() {
        let d = dim(4);
        let s = ThreeSystemState::from_blocks(
            fock_state(0, d).unwrap().scale(C64::new(0.6, 0.0)),
            fock_state(2, d).unwrap().scale(C64::new(0.0, 0.8)),
        )
        .unwrap();
        let nb = s.apply_to_mode(&number(dim(2)), Mode::B).unwrap();
        assert_eq!(nb.branch_probability(RailPattern::ZeroOne), 0.0);
        assert_abs_diff_eq!(nb.branch_probability(RailPattern::OneZero), 0.64, epsilon = 1e-15);
        let create = crate::optics::creation(dim(2));
        assert!(matches!(s.apply_to_mode(&create, Mode::C), Err(Error::InvalidSubspace(_))));
        let na = s.apply_to_mode(&number(d), Mode::A).unwrap();
        assert_eq!(na.block(RailPattern::OneZero).amplitude(2), C64::new(0.0, 1.6));
    }

    #[test]
    fn three_system_from_full_rejects_leaks() {
        let d = dim(2);
        let mut amps = alloc::vec![ZERO; 8];
        amps[(1 * 2 + 0) * 2 + 1] = ONE;
        let s = ThreeSystemState::from_full(d, &amps).unwrap();
        assert_eq!(s.block(RailPattern::ZeroOne).amplitude(1), ONE);
        amps[(0 * 2 + 1) * 2 + 1] = C64::new(1e-6, 0.0);
        assert!(matches!(ThreeSystemState::from_full(d, &amps), Err(Error::InvalidSubspace(_))));
    }

    #[test]
    fn density_basics() {
        let d = dim(6);
        let vac = density_from_pure(&fock_state(0, d).unwrap());
        assert_eq!(vac.elements()[(0, 0)], ONE);
        assert_eq!(evolve(&vac, &identity(d)).unwrap(), vac);
        assert_eq!(expectation(&vac, &number(d)).unwrap(), ZERO);
        let th = thermal_state(0.5, d).unwrap();
        assert_abs_diff_eq!(th.trace().re, 1.0, epsilon = 1e-14);
        assert!(DensityMatrix::from_matrix(th.elements().clone()).is_ok());
        let mut bad = th.elements().clone();
        bad[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::from_matrix(bad).is_err());
    }

    #[test]
    fn pure_components_reassemble() {
        let d = dim(6);
        let a = coherent_state(C64::new(0.4, 0.3), d).unwrap();
        let b = fock_state(3, d).unwrap();
        let rho = DensityMatrix::mixture(&[(0.3, a.clone()), (0.7, b)]).unwrap();
        let comps = rho.pure_components();
        let back = DensityMatrix::mixture(&comps).unwrap();
        assert!(linalg::max_abs_diff(back.elements(), rho.elements()) < 1e-12);
        let pure = density_from_pure(&a);
        let comps = pure.pure_components();
        assert_eq!(comps.len(), 1);
        assert_abs_diff_eq!(fidelity(&comps[0].1, &a).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cat_normalization_constant() {
        let a0 = 1.5;
        let cat = cat_state(C64::new(a0, 0.0), Sign::Plus, dim(40)).unwrap();
        // (|a> + |-a>) / sqrt(2 + 2 e^{-2 a^2}): vacuum amplitude 2 e^{-a^2/2} / N
        let n = (2.0 + 2.0 * (-2.0 * a0 * a0).exp()).sqrt();
        assert_abs_diff_eq!(cat.amplitude(0).re, 2.0 * (-0.5 * a0 * a0).exp() / n, epsilon = 1e-12);
        assert!(cat.amplitudes().iter().skip(1).step_by(2).all(|z| z.norm() < 1e-15));
    }
}
