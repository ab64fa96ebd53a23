//! Characteristic-function measurement from interferometer click statistics
//! and Wigner reconstruction by direct Fourier summation.
//!
//! At interferometric phase `xi0` the click imbalance is
//! `dP(beta, xi0) = P10 - P01 = Re[e^{-i xi0} chi(beta)]`, so the two settings
//! `xi0 = 0` and `xi0 = pi/2` give `chi(beta) = dP(beta, 0) + i dP(beta, pi/2)`.
//! The Wigner function follows from
//!
//! ```text
//! W(z) = (1/pi^2) \int d^2 beta chi(beta) exp(z beta^* - z^* beta)
//! ```
//!
//! evaluated as a Riemann sum over a square `beta` lattice.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cdo::CdoParams;
use crate::displacement::DisplacementKernel;
use crate::error::{Error, Result};
use crate::fock::{displacement_guard, DensityMatrix, FockDim, ModeState};
use crate::linalg::{cis, C64, ZERO};
use crate::mzi::{probabilities_with, CdoMode, MziParams};

/// Imaginary residue above which a reconstructed grid is flagged.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-6;

/// Kerr phase and device model shared by every point of a measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TomographySetup {
    pub theta: f64,
    pub mode: CdoMode,
}

impl Default for TomographySetup {
    fn default() -> Self {
        TomographySetup { theta: crate::DEFAULT_THETA, mode: CdoMode::Ideal }
    }
}

impl TomographySetup {
    /// Interferometer setting realizing `beta` at phase `xi0`: `alpha = i beta / theta`
    /// and `eta = xi0 - theta |alpha|^2`.
    pub fn params(&self, beta: C64, xi0: f64) -> Result<MziParams> {
        Ok(MziParams::with_xi(xi0, CdoParams::from_beta(beta, self.theta)?, self.mode))
    }
}

/// A state prepared once for many interferometer runs.
struct Prepared {
    kernel: DisplacementKernel,
    components: Vec<(f64, ModeState)>,
}

impl Prepared {
    fn new(rho: &DensityMatrix) -> Self {
        Prepared { kernel: DisplacementKernel::new(rho.dim()), components: rho.pure_components() }
    }

    fn p10(&self, setup: &TomographySetup, beta: C64, xi0: f64) -> Result<f64> {
        let (p01, p10) = probabilities_with(&self.kernel, &setup.params(beta, xi0)?, &self.components);
        Ok(p10 / (p01 + p10))
    }

    fn delta_p(&self, setup: &TomographySetup, beta: C64, xi0: f64) -> Result<f64> {
        Ok(2.0 * self.p10(setup, beta, xi0)? - 1.0)
    }
}

/// `Tr[rho D(beta)]` from the dense truncated displacement matrix.
pub fn chi_direct(rho: &DensityMatrix, beta: C64) -> Result<C64> {
    displacement_guard(beta, rho.dim())?;
    Ok(chi_direct_with(&DisplacementKernel::new(rho.dim()), rho, beta))
}

/// [`chi_direct`] reusing a kernel built for `rho.dim()`.
pub fn chi_direct_with(kernel: &DisplacementKernel, rho: &DensityMatrix, beta: C64) -> C64 {
    let d = kernel.matrix(beta);
    let r = rho.elements();
    let n = r.nrows();
    let mut acc = ZERO;
    for m in 0..n {
        for k in 0..n {
            acc += r[(k, m)] * d[(m, k)];
        }
    }
    acc
}

/// `P10 - P01` from the simulated interferometer.
pub fn delta_p(setup: &TomographySetup, rho: &DensityMatrix, beta: C64, xi0: f64) -> Result<f64> {
    displacement_guard(beta, rho.dim())?;
    Prepared::new(rho).delta_p(setup, beta, xi0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSample {
    pub beta: C64,
    pub chi: C64,
    /// `dP(beta, 0)`
    pub dp0: f64,
    /// `dP(beta, pi/2)`
    pub dp_half_pi: f64,
    /// Shots per setting, absent for exact probabilities.
    pub shots: Option<u64>,
}

impl ChiSample {
    fn from_delta_p(beta: C64, dp0: f64, dp_half_pi: f64, shots: Option<u64>) -> Self {
        ChiSample { beta, chi: C64::new(dp0, dp_half_pi), dp0, dp_half_pi, shots }
    }

    /// Sample at `-beta`, which follows from `chi(-beta) = chi(beta)^*`.
    pub fn mirrored(&self) -> Self {
        ChiSample {
            beta: -self.beta,
            chi: self.chi.conj(),
            dp0: self.dp0,
            dp_half_pi: -self.dp_half_pi,
            shots: self.shots,
        }
    }
}

/// `chi(beta) = dP(beta, 0) + i dP(beta, pi/2)` from two interferometer runs.
pub fn chi_from_probabilities(setup: &TomographySetup, rho: &DensityMatrix, beta: C64) -> Result<ChiSample> {
    displacement_guard(beta, rho.dim())?;
    let prepared = Prepared::new(rho);
    Ok(ChiSample::from_delta_p(
        beta,
        prepared.delta_p(setup, beta, 0.0)?,
        prepared.delta_p(setup, beta, FRAC_PI_2)?,
        None,
    ))
}

/// Monte Carlo settings for a simulated measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotSettings {
    pub shots: u64,
    pub seed: u64,
    /// Probability that a click is registered, in `(0, 1]`.
    pub efficiency: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Binomial standard error `2 sqrt(p (1 - p) / n)` of the estimate.
    pub sigma: f64,
    pub registered: u64,
}

fn validate_shots(s: &ShotSettings) -> Result<()> {
    if s.shots == 0 {
        return Err(Error::InvalidParameter("at least one shot is required"));
    }
    if !(s.efficiency > 0.0 && s.efficiency <= 1.0) {
        return Err(Error::InvalidParameter("efficiency must lie in (0, 1]"));
    }
    Ok(())
}

/// Draw `shots` Bernoulli(P10) clicks; each attempt is registered with
/// probability `efficiency` and otherwise discarded.
fn draw_delta_p(p10: f64, s: &ShotSettings, stream: u64) -> Result<Estimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    rng.set_stream(stream);
    let p10 = p10.clamp(0.0, 1.0);
    let (mut registered, mut successes) = (0u64, 0u64);
    for _ in 0..s.shots {
        let click = rng.gen::<f64>() < p10;
        if s.efficiency < 1.0 && rng.gen::<f64>() >= s.efficiency {
            continue;
        }
        registered += 1;
        successes += u64::from(click);
    }
    if registered == 0 {
        return Err(Error::InsufficientStatistics);
    }
    let p = successes as f64 / registered as f64;
    Ok(Estimate { value: 2.0 * p - 1.0, sigma: 2.0 * (p * (1.0 - p) / registered as f64).sqrt(), registered })
}

/// Shot-noise-limited estimate of `dP(beta, xi0)`. Deterministic in `seed`.
pub fn monte_carlo_delta_p(
    setup: &TomographySetup,
    rho: &DensityMatrix,
    beta: C64,
    xi0: f64,
    shots: ShotSettings,
) -> Result<Estimate> {
    validate_shots(&shots)?;
    displacement_guard(beta, rho.dim())?;
    let p10 = Prepared::new(rho).p10(setup, beta, xi0)?;
    draw_delta_p(p10, &shots, 0)
}

/// Square lattice `beta = h (i + i j)`, `-n <= i, j <= n`, stored row by row
/// in `j` then `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiGrid {
    pub spacing: f64,
    pub half_points: usize,
    pub samples: Vec<ChiSample>,
}

impl ChiGrid {
    pub fn side(&self) -> usize {
        2 * self.half_points + 1
    }

    pub fn half_extent(&self) -> f64 {
        self.spacing * self.half_points as f64
    }

    pub fn index(&self, i: isize, j: isize) -> usize {
        let n = self.half_points as isize;
        ((j + n) * (2 * n + 1) + (i + n)) as usize
    }

    pub fn at(&self, i: isize, j: isize) -> &ChiSample {
        &self.samples[self.index(i, j)]
    }

    pub fn shots(&self) -> Option<u64> {
        self.samples.first().and_then(|s| s.shots)
    }

    /// Build an exact grid from a closed-form characteristic function.
    pub fn from_fn(half_extent: f64, spacing: f64, mut chi: impl FnMut(C64) -> C64) -> Result<Self> {
        let (n, spacing) = lattice(half_extent, spacing)?;
        let side = 2 * n + 1;
        let samples = (0..side * side)
            .map(|k| {
                let beta = lattice_point(k, n, spacing);
                let c = chi(beta);
                ChiSample::from_delta_p(beta, c.re, c.im, None)
            })
            .collect();
        Ok(ChiGrid { spacing, half_points: n, samples })
    }

    /// `max |chi(beta)^* - chi(-beta)|` over the lattice.
    pub fn conjugation_defect(&self) -> f64 {
        let last = self.samples.len() - 1;
        (0..self.samples.len())
            .map(|k| (self.samples[k].chi.conj() - self.samples[last - k].chi).norm())
            .fold(0.0, f64::max)
    }
}

fn lattice(half_extent: f64, spacing: f64) -> Result<(usize, f64)> {
    if !(half_extent > 0.0 && spacing > 0.0) || !half_extent.is_finite() {
        return Err(Error::InvalidParameter("grid extent and spacing must be positive"));
    }
    let n = (half_extent / spacing).round();
    if n < 1.0 {
        return Err(Error::InvalidParameter("grid spacing exceeds its extent"));
    }
    Ok((n as usize, spacing))
}

fn lattice_point(k: usize, n: usize, spacing: f64) -> C64 {
    let side = 2 * n + 1;
    let i = (k % side) as f64 - n as f64;
    let j = (k / side) as f64 - n as f64;
    C64::new(i * spacing, j * spacing)
}

/// Sample `chi` on the lattice. Only the half with `k >= center` is
/// measured; the other half is filled by conjugation. With `shots`, each
/// `dP` is a Monte Carlo estimate whose stream is derived from the master
/// seed and the point index.
pub fn sample_chi_grid(
    setup: &TomographySetup,
    rho: &DensityMatrix,
    half_extent: f64,
    spacing: f64,
    shots: Option<ShotSettings>,
) -> Result<ChiGrid> {
    let (n, spacing) = lattice(half_extent, spacing)?;
    let corner = C64::new(n as f64 * spacing, n as f64 * spacing);
    displacement_guard(corner, rho.dim())?;
    if let Some(s) = &shots {
        validate_shots(s)?;
    }
    let prepared = Prepared::new(rho);
    let side = 2 * n + 1;
    let total = side * side;
    let center = total / 2;
    let mut measured = Vec::with_capacity(total - center);
    for k in center..total {
        let beta = lattice_point(k, n, spacing);
        let sample = match &shots {
            None => ChiSample::from_delta_p(
                beta,
                prepared.delta_p(setup, beta, 0.0)?,
                prepared.delta_p(setup, beta, FRAC_PI_2)?,
                None,
            ),
            Some(s) => {
                let stream = 2 * k as u64;
                let re = draw_delta_p(prepared.p10(setup, beta, 0.0)?, s, stream)?;
                let im = draw_delta_p(prepared.p10(setup, beta, FRAC_PI_2)?, s, stream + 1)?;
                ChiSample::from_delta_p(beta, re.value, im.value, Some(s.shots))
            }
        };
        measured.push(sample);
    }
    let mut samples = Vec::with_capacity(total);
    samples.extend(measured[1..].iter().rev().map(ChiSample::mirrored));
    samples.extend_from_slice(&measured);
    Ok(ChiGrid { spacing, half_points: n, samples })
}

/// Wigner values on a square `z` lattice, same layout as [`ChiGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub spacing: f64,
    pub half_points: usize,
    pub values: Vec<f64>,
    /// Largest `|Im W|` discarded during reconstruction.
    pub max_imaginary_residue: f64,
    /// Source lattice parameters `(half extent, spacing)`.
    pub source: (f64, f64),
}

impl WignerGrid {
    pub fn side(&self) -> usize {
        2 * self.half_points + 1
    }

    pub fn point(&self, k: usize) -> C64 {
        lattice_point(k, self.half_points, self.spacing)
    }

    pub fn at(&self, i: isize, j: isize) -> f64 {
        let n = self.half_points as isize;
        self.values[((j + n) * (2 * n + 1) + (i + n)) as usize]
    }

    /// Riemann sum `sum W g^2`.
    pub fn normalization(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing * self.spacing
    }

    pub fn is_consistent(&self) -> bool {
        self.max_imaginary_residue <= IMAGINARY_RESIDUE_LIMIT
    }
}

/// Riemann-sum inversion of a characteristic-function grid.
///
/// With `z = x + i y` and `beta = u + i v` the kernel
/// `exp(z beta^* - z^* beta) = e^{2i y u} e^{-2i x v}` separates, so the sum
/// runs as two one-dimensional passes.
pub fn wigner_from_chi(grid: &ChiGrid, half_extent: f64, spacing: f64) -> Result<WignerGrid> {
    let (m, spacing) = lattice(half_extent, spacing)?;
    let z_extent = m as f64 * spacing;
    let product = grid.spacing * 2.0 * z_extent;
    if product >= PI {
        return Err(Error::NyquistViolation(product));
    }
    let n = grid.half_points;
    let beta_side = 2 * n + 1;
    let z_side = 2 * m + 1;
    let coord = |k: usize, half: usize, h: f64| (k as f64 - half as f64) * h;

    // partial[v][y] = sum_u chi(u, v) e^{2i y u}
    let mut partial = alloc::vec![ZERO; beta_side * z_side];
    for v in 0..beta_side {
        for y in 0..z_side {
            let yv = coord(y, m, spacing);
            let mut acc = ZERO;
            for u in 0..beta_side {
                acc += grid.samples[v * beta_side + u].chi * cis(2.0 * yv * coord(u, n, grid.spacing));
            }
            partial[v * z_side + y] = acc;
        }
    }
    let weight = grid.spacing * grid.spacing / (PI * PI);
    let mut values = Vec::with_capacity(z_side * z_side);
    let mut residue: f64 = 0.0;
    for y in 0..z_side {
        for x in 0..z_side {
            let xv = coord(x, m, spacing);
            let mut acc = ZERO;
            for v in 0..beta_side {
                acc += partial[v * z_side + y] * cis(-2.0 * xv * coord(v, n, grid.spacing));
            }
            let w = acc * weight;
            residue = residue.max(w.im.abs());
            values.push(w.re);
        }
    }
    Ok(WignerGrid {
        spacing,
        half_points: m,
        values,
        max_imaginary_residue: residue,
        source: (grid.half_extent(), grid.spacing),
    })
}

/// `W(z) = (2/pi) Tr[rho D(z) P D^+(z)]` with `P` the photon-number parity.
pub fn wigner_direct(rho: &DensityMatrix, z: C64) -> Result<f64> {
    displacement_guard(z, rho.dim())?;
    let kernel = DisplacementKernel::new(rho.dim());
    Ok(wigner_direct_with(&kernel, &rho.pure_components(), z))
}

/// Direct Wigner values at many points, reusing one kernel and decomposition.
pub fn wigner_direct_many(rho: &DensityMatrix, points: &[C64]) -> Result<Vec<f64>> {
    let dim = rho.dim();
    for z in points {
        displacement_guard(*z, dim)?;
    }
    let kernel = DisplacementKernel::new(dim);
    let comps = rho.pure_components();
    Ok(points.iter().map(|z| wigner_direct_with(&kernel, &comps, *z)).collect())
}

fn wigner_direct_with(kernel: &DisplacementKernel, comps: &[(f64, ModeState)], z: C64) -> f64 {
    let parity: f64 = comps
        .iter()
        .map(|(w, psi)| {
            let shifted = kernel.apply(-z, psi.vector());
            w * shifted
                .iter()
                .enumerate()
                .map(|(n, a)| if n % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
                .sum::<f64>()
        })
        .sum();
    2.0 / PI * parity
}

/// Dimension needed for a `beta` lattice of half extent `b` to pass the guard
/// at its corners.
pub fn dim_for_grid(half_extent: f64) -> FockDim {
    FockDim::for_amplitude(half_extent * core::f64::consts::SQRT_2)
}
