//! Scene geometry to discrete FT channel matrices, channel application and
//! receiver noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::centered_kernel;
use crate::error::{ensure, Result};
use crate::grid::GridSpec;
use crate::rng::complex_normal;
use crate::units::{db_to_linear, BOLTZMANN, SPEED_OF_LIGHT, T0_KELVIN};
use crate::waveform::{Domain, GridSignal};

/// One-way free-space power gain `(c / (4π f0 R))²`.
pub fn friis_gain(f0: f64, range: f64) -> f64 {
    (SPEED_OF_LIGHT / (4.0 * PI * f0 * range)).powi(2)
}

/// Two-way radar-equation power gain `Γ c² / ((4π)³ f0² R⁴)`.
pub fn radar_gain(rcs: f64, f0: f64, range: f64) -> f64 {
    rcs * SPEED_OF_LIGHT.powi(2) / ((4.0 * PI).powi(3) * f0.powi(2) * range.powi(4))
}

/// Thermal noise power per subcarrier, `k T0 Δf F`.
pub fn thermal_noise(delta_f: f64, noise_figure_db: f64) -> f64 {
    BOLTZMANN * T0_KELVIN * delta_f * db_to_linear(noise_figure_db)
}

/// One communication path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSpec {
    /// Mean-square amplitude `σ²`.
    pub variance: f64,
    /// Delay (s).
    pub delay: f64,
    /// Doppler shift (Hz).
    pub doppler: f64,
    /// Amplitude beam gain `ζ`.
    pub beam_gain: f64,
}

impl PathSpec {
    pub fn new(variance: f64, delay: f64, doppler: f64, beam_gain: f64) -> Result<Self> {
        ensure!(variance.is_finite() && variance >= 0.0, Scene, "path variance must be non-negative");
        ensure!(delay.is_finite() && delay >= 0.0, Scene, "path delay must be non-negative");
        ensure!(doppler.is_finite(), Scene, "path Doppler must be finite");
        ensure!(beam_gain.is_finite() && beam_gain >= 0.0, Scene, "beam gain must be non-negative");
        Ok(Self { variance, delay, doppler, beam_gain })
    }

    /// Line-of-sight path at `range` moving at radial `velocity`, Friis loss.
    pub fn line_of_sight(f0: f64, range: f64, velocity: f64, beam_gain: f64) -> Result<Self> {
        ensure!(range.is_finite() && range > 0.0, Scene, "path range must be positive, got {range}");
        Self::new(friis_gain(f0, range), range / SPEED_OF_LIGHT, f0 * velocity / SPEED_OF_LIGHT, beam_gain)
    }

    /// `σ² ζ²`
    pub fn gain(&self) -> f64 {
        self.variance * self.beam_gain * self.beam_gain
    }
}

/// A point target seen through the two-way sensing path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetSpec {
    /// Radar cross-section `Γ` (m²).
    pub rcs: f64,
    /// Range (m).
    pub range: f64,
    /// Radial velocity (m/s), positive when approaching.
    pub velocity: f64,
    /// Amplitude beam gain `ζ_q` (Tx and Rx combined).
    pub beam_gain: f64,
}

impl TargetSpec {
    pub fn new(rcs: f64, range: f64, velocity: f64, beam_gain: f64) -> Result<Self> {
        ensure!(rcs.is_finite() && rcs > 0.0, Scene, "target RCS must be positive, got {rcs}");
        ensure!(range.is_finite() && range > 0.0, Scene, "target range must be positive, got {range}");
        ensure!(velocity.is_finite(), Scene, "target velocity must be finite");
        ensure!(beam_gain.is_finite() && beam_gain >= 0.0, Scene, "beam gain must be non-negative");
        Ok(Self { rcs, range, velocity, beam_gain })
    }

    /// Target placed at exact delay and Doppler, for analytic checks.
    pub fn at_delay_doppler(f0: f64, delay: f64, doppler: f64, beam_gain: f64) -> Result<Self> {
        Self::new(1.0, delay * SPEED_OF_LIGHT / 2.0, doppler * SPEED_OF_LIGHT / (2.0 * f0), beam_gain)
    }

    /// Round-trip delay `2R/c`.
    pub fn delay(&self) -> f64 {
        2.0 * self.range / SPEED_OF_LIGHT
    }

    /// Two-way Doppler `2 f0 V / c`.
    pub fn doppler(&self, f0: f64) -> f64 {
        2.0 * f0 * self.velocity / SPEED_OF_LIGHT
    }

    /// Echo variance `σ_q²` from the radar equation.
    pub fn variance(&self, f0: f64) -> f64 {
        radar_gain(self.rcs, f0, self.range)
    }

    /// `κ_q² = σ_q² ζ_q²`
    pub fn gain(&self, f0: f64) -> f64 {
        self.variance(f0) * self.beam_gain * self.beam_gain
    }

    /// Delay in DD bins.
    pub fn delay_bins(&self, grid: &GridSpec) -> f64 {
        self.delay() / grid.resolution().delta_tau
    }

    /// Doppler in DD bins.
    pub fn doppler_bins(&self, grid: &GridSpec) -> f64 {
        self.doppler(grid.f0()) / grid.resolution().delta_nu
    }
}

/// UEs (each a list of paths) and sensing targets.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Scene {
    pub ues: Vec<Vec<PathSpec>>,
    pub targets: Vec<TargetSpec>,
}

impl Scene {
    /// `κ_k² = Σ_u σ_u² ζ_u²` for UE `k`.
    pub fn ue_gain(&self, k: usize) -> f64 {
        self.ues[k].iter().map(PathSpec::gain).sum()
    }

    /// `κ_sen² = Σ_q κ_q²`.
    pub fn sensing_gain(&self, f0: f64) -> f64 {
        self.targets.iter().map(|t| t.gain(f0)).sum()
    }

    pub fn max_target_range(&self) -> Option<f64> {
        self.targets.iter().map(|t| t.range).reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSpec {
    /// Per-bin noise power at one antenna (W).
    pub sigma_z2: f64,
    /// Antenna count `L`.
    pub antennas: usize,
}

impl NoiseSpec {
    pub fn new(sigma_z2: f64, antennas: usize) -> Result<Self> {
        ensure!(sigma_z2.is_finite() && sigma_z2 >= 0.0, Config, "noise power must be non-negative");
        ensure!(antennas >= 1, Config, "antenna count must be at least 1");
        Ok(Self { sigma_z2, antennas })
    }

    pub fn thermal(grid: &GridSpec, noise_figure_db: f64, antennas: usize) -> Result<Self> {
        Self::new(thermal_noise(grid.delta_f(), noise_figure_db), antennas)
    }

    pub fn variance(&self, side: Side) -> f64 {
        match side {
            Side::Ue => self.sigma_z2,
            Side::Bs => self.sigma_z2 * self.antennas as f64,
        }
    }
}

/// Which receiver the noise is added at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Ue,
    /// After receive beamforming over `L` antennas.
    Bs,
}

/// Spectrum `G(mΔf)` of the pulse-shaping/matched-filter cascade, normalized
/// to `G(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PulseShape {
    /// `G ≡ 1` across the band, so the delay response is the DFT kernel.
    #[default]
    Flat,
    /// `g(t) = rect(t/Δτ)`, i.e. `G(mΔf) = sinc(m/M)`.
    RectInDelay,
    /// Raised-cosine spectrum with the given roll-off, unit gain in the
    /// flat part of the band.
    RaisedCosine { rolloff: f64 },
}

impl PulseShape {
    pub fn spectrum(&self, grid: &GridSpec, m: i64) -> f64 {
        let x = m as f64 / grid.m() as f64;
        match *self {
            PulseShape::Flat => 1.0,
            PulseShape::RectInDelay => {
                if m == 0 {
                    1.0
                } else {
                    (PI * x).sin() / (PI * x)
                }
            }
            PulseShape::RaisedCosine { rolloff } => {
                let b = rolloff.clamp(0.0, 1.0);
                let edge = (1.0 - b) / 2.0;
                let ax = x.abs();
                if ax <= edge || b == 0.0 {
                    1.0
                } else if ax <= (1.0 + b) / 2.0 {
                    0.5 * (1.0 + (PI / b * (ax - edge)).cos())
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, PulseShape::Flat)
    }

    /// Delay response `g(x) = Σ_m G(mΔf) e^{j2πmx/M}` at fractional bin `x`.
    pub fn delay_response(&self, grid: &GridSpec, x: f64) -> Complex64 {
        if self.is_flat() {
            return centered_kernel(x, grid.m());
        }
        let mf = grid.m() as f64;
        grid.subcarriers()
            .map(|m| Complex64::from_polar(self.spectrum(grid, m), 2.0 * PI * m as f64 * x / mf))
            .sum()
    }

    fn spectrum_table(&self, grid: &GridSpec) -> Vec<f64> {
        grid.subcarriers().map(|m| self.spectrum(grid, m)).collect()
    }
}

/// `Σ_u a_u e^{j2π(ν_u nT − mΔf τ_u)} G(mΔf)` with complex weights `a_u`.
fn phase_sum_channel(grid: &GridSpec, pulse: &PulseShape, terms: &[(Complex64, f64, f64)]) -> GridSignal {
    let g = pulse.spectrum_table(grid);
    let mut out = GridSignal::zeros(*grid, Domain::Ft);
    let (rows, cols) = (grid.m(), grid.n());
    let data = out.data_mut();
    for &(weight, delay, doppler) in terms {
        // delay and Doppler phases in turns, so large arguments lose no precision
        let f_turns = grid.delta_f() * delay;
        let t_turns = doppler * grid.t();
        let freq: Vec<Complex64> = (0..rows)
            .map(|row| {
                let m = grid.subcarrier(row) as f64;
                Complex64::from_polar(g[row], -2.0 * PI * (m * f_turns).fract())
            })
            .collect();
        for col in 0..cols {
            let n = grid.symbol(col) as f64;
            let w = weight * Complex64::from_polar(1.0, 2.0 * PI * (n * t_turns).fract());
            for (row, f) in freq.iter().enumerate() {
                data[col * rows + row] += w * f;
            }
        }
    }
    out
}

/// Communication channel with fixed path amplitudes `α_u`.
pub fn comm_channel_ft_fixed(
    grid: &GridSpec,
    paths: &[PathSpec],
    alphas: &[Complex64],
    pulse: &PulseShape,
) -> Result<GridSignal> {
    ensure!(!paths.is_empty(), Scene, "a UE needs at least one path");
    ensure!(alphas.len() == paths.len(), Scene, "{} amplitudes for {} paths", alphas.len(), paths.len());
    let terms: Vec<_> = paths.iter().zip(alphas).map(|(p, a)| (a * p.beam_gain, p.delay, p.doppler)).collect();
    Ok(phase_sum_channel(grid, pulse, &terms))
}

/// Communication channel `H_k^FT` with `α_u ~ CN(0, σ_u²)` drawn fresh.
pub fn comm_channel_ft<R: Rng + ?Sized>(
    grid: &GridSpec,
    paths: &[PathSpec],
    pulse: &PulseShape,
    rng: &mut R,
) -> Result<GridSignal> {
    ensure!(!paths.is_empty(), Scene, "a UE needs at least one path");
    let alphas: Vec<_> = paths.iter().map(|p| complex_normal(rng, p.variance)).collect();
    comm_channel_ft_fixed(grid, paths, &alphas, pulse)
}

/// Sensing channel with fixed echo amplitudes `β_q`.
pub fn sensing_channel_ft_fixed(
    grid: &GridSpec,
    targets: &[TargetSpec],
    betas: &[Complex64],
    pulse: &PulseShape,
) -> Result<GridSignal> {
    ensure!(!targets.is_empty(), Scene, "sensing needs at least one target");
    ensure!(betas.len() == targets.len(), Scene, "{} amplitudes for {} targets", betas.len(), targets.len());
    let terms: Vec<_> =
        targets.iter().zip(betas).map(|(t, b)| (b * t.beam_gain, t.delay(), t.doppler(grid.f0()))).collect();
    Ok(phase_sum_channel(grid, pulse, &terms))
}

/// Sensing channel `H_sen^FT` with `β_q ~ CN(0, σ_q²)` drawn fresh.
pub fn sensing_channel_ft<R: Rng + ?Sized>(
    grid: &GridSpec,
    targets: &[TargetSpec],
    pulse: &PulseShape,
    rng: &mut R,
) -> Result<GridSignal> {
    ensure!(!targets.is_empty(), Scene, "sensing needs at least one target");
    let betas: Vec<_> = targets.iter().map(|t| complex_normal(rng, t.variance(grid.f0()))).collect();
    sensing_channel_ft_fixed(grid, targets, &betas, pulse)
}

/// Deterministic amplitudes `√σ²` with zero phase, for nominal-gain runs.
pub fn nominal_betas(grid: &GridSpec, targets: &[TargetSpec]) -> Vec<Complex64> {
    targets.iter().map(|t| Complex64::new(t.variance(grid.f0()).sqrt(), 0.0)).collect()
}

pub fn nominal_alphas(paths: &[PathSpec]) -> Vec<Complex64> {
    paths.iter().map(|p| Complex64::new(p.variance.sqrt(), 0.0)).collect()
}

/// `Y = H ⊙ X`.
pub fn apply_channel(h: &GridSignal, x: &GridSignal) -> Result<GridSignal> {
    h.require_domain(Domain::Ft)?;
    h.try_hadamard(x)
}

/// Adds circular complex Gaussian noise of the side's per-bin variance.
pub fn add_noise<R: Rng + ?Sized>(y: &GridSignal, noise: &NoiseSpec, side: Side, rng: &mut R) -> GridSignal {
    let variance = noise.variance(side);
    let mut out = y.clone();
    if variance > 0.0 {
        for v in out.data_mut() {
            *v += complex_normal(rng, variance);
        }
    }
    out
}

/// Noise-only matrix of the side's variance.
pub fn noise_matrix<R: Rng + ?Sized>(grid: &GridSpec, noise: &NoiseSpec, side: Side, rng: &mut R) -> GridSignal {
    add_noise(&GridSignal::zeros(*grid, Domain::Ft), noise, side, rng)
}

/// Analytic DD sensing channel for fixed `β_q`:
/// `(MN)^{-1/2} Σ_q β_q ζ_q g(ℓ − τ_q/Δτ) K_N(ν_q/Δν − p)`, where `K_N` is the
/// centered Doppler kernel whose modulus is the Dirichlet kernel.
pub fn dd_sensing_channel(
    grid: &GridSpec,
    targets: &[TargetSpec],
    betas: &[Complex64],
    pulse: &PulseShape,
) -> Result<GridSignal> {
    ensure!(betas.len() == targets.len(), Scene, "{} amplitudes for {} targets", betas.len(), targets.len());
    let norm = 1.0 / (grid.len() as f64).sqrt();
    let mut out = GridSignal::zeros(*grid, Domain::Dd);
    let (rows, cols) = (grid.m(), grid.n());
    for (t, b) in targets.iter().zip(betas) {
        let (tau_bins, nu_bins) = (t.delay_bins(grid), t.doppler_bins(grid));
        let delay: Vec<Complex64> = (0..rows).map(|ell| pulse.delay_response(grid, ell as f64 - tau_bins)).collect();
        let w = b * t.beam_gain * norm;
        let data = out.data_mut();
        for col in 0..cols {
            let p = grid.symbol(col) as f64;
            let dop = w * centered_kernel(nu_bins - p, cols);
            for (ell, d) in delay.iter().enumerate() {
                data[col * rows + ell] += dop * d;
            }
        }
    }
    Ok(out)
}
