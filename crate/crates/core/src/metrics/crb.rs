//! Two-target delay and Doppler Fisher information for a per-resource power
//! allocation, and OFDM versus dual-domain CRB comparisons.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::grid::{allocate_users, AllocationScheme, GridSpec};
use crate::rng::seeded;
use crate::waveform::PowerPlan;

/// Noise covariance seen by the delay/Doppler estimator.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    /// `R = σ_z² I`
    White { sigma_z2: f64 },
    /// `R = σ_z² I + (|β1|² + |β2|²) diag(p_com)`: the communication echo
    /// acts as interference to the sensing signal.
    DualDomainColored { sigma_z2: f64, p_com: Vec<f64> },
}

impl NoiseModel {
    pub fn tag(&self) -> &'static str {
        match self {
            NoiseModel::White { .. } => "white",
            NoiseModel::DualDomainColored { .. } => "dual-domain-colored",
        }
    }
}

/// Two point targets in delay-Doppler with complex amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTargets {
    pub beta1: Complex64,
    pub beta2: Complex64,
    pub tau1: f64,
    pub tau2: f64,
    pub nu1: f64,
    pub nu2: f64,
}

impl TwoTargets {
    pub fn single(beta: Complex64, tau: f64, nu: f64) -> Self {
        Self { beta1: beta, beta2: Complex64::new(0.0, 0.0), tau1: tau, tau2: tau, nu1: nu, nu2: nu }
    }
}

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FimReport {
    pub i_tau: Mat2,
    pub i_nu: Mat2,
    pub crb_tau: Mat2,
    pub crb_nu: Mat2,
    pub singular_tau: bool,
    pub singular_nu: bool,
    pub noise_model: &'static str,
}

/// Relative determinant below which a 2×2 FIM counts as singular.
const SINGULAR_TOL: f64 = 1e-12;

/// Inverse of a symmetric PSD 2×2 FIM. A target with no information gets an
/// infinite bound; a rank-deficient coupled matrix gets infinite bounds
/// everywhere.
pub fn invert_fim(i: &Mat2) -> (Mat2, bool) {
    let (a, b, d) = (i[0][0], i[0][1], i[1][1]);
    let det = a * d - b * b;
    if a > 0.0 && d > 0.0 && det > SINGULAR_TOL * a * d {
        return ([[d / det, -b / det], [-b / det, a / det]], false);
    }
    let inv = |x: f64| if x > 0.0 { 1.0 / x } else { f64::INFINITY };
    if b.abs() <= SINGULAR_TOL * (a.abs() + d.abs()) {
        return ([[inv(a), 0.0], [0.0, inv(d)]], true);
    }
    ([[f64::INFINITY; 2]; 2], true)
}

/// Delay and Doppler FIM blocks for two targets observed through per-resource
/// power `p` (grid storage order).
///
/// With `w = p / R` per resource and the cross phase
/// `φ = e^{j2πmΔf(τ1−τ2)} e^{−j2πnT(ν1−ν2)}`:
/// `I_τiτi = 2|βi|² Σ w (2πmΔf)²`, `I_τ1τ2 = 2 Σ w (2πmΔf)² Re{β1*β2 φ}` and
/// likewise for Doppler with `(2πnT)²`.
pub fn fim_two_targets(p: &[f64], grid: &GridSpec, targets: &TwoTargets, noise: &NoiseModel) -> Result<FimReport> {
    ensure!(p.len() == grid.len(), Domain, "power vector has {} entries, grid has {}", p.len(), grid.len());
    ensure!(p.iter().all(|v| v.is_finite() && *v >= 0.0), Domain, "powers must be non-negative");
    let b1 = targets.beta1.norm_sqr();
    let b2 = targets.beta2.norm_sqr();
    let cross = targets.beta1.conj() * targets.beta2;
    let (rows, cols) = (grid.m(), grid.n());
    let t = grid.t();
    let weights: Vec<f64> = match noise {
        NoiseModel::White { sigma_z2 } => {
            ensure!(*sigma_z2 > 0.0, Config, "noise power must be positive");
            p.iter().map(|v| v / sigma_z2).collect()
        }
        NoiseModel::DualDomainColored { sigma_z2, p_com } => {
            ensure!(*sigma_z2 > 0.0, Config, "noise power must be positive");
            ensure!(p_com.len() == grid.len(), Domain, "communication power vector has the wrong length");
            p.iter().zip(p_com).map(|(v, c)| v / (sigma_z2 + (b1 + b2) * c)).collect()
        }
    };
    let dtau_turns = grid.delta_f() * (targets.tau1 - targets.tau2);
    let dnu_turns = t * (targets.nu1 - targets.nu2);
    let fphase: Vec<Complex64> = (0..rows)
        .map(|row| Complex64::from_polar(1.0, 2.0 * PI * (grid.subcarrier(row) as f64 * dtau_turns).fract()))
        .collect();

    let (mut tt, mut tc, mut nn, mut nc) = (0.0, 0.0, 0.0, 0.0);
    for col in 0..cols {
        let n = grid.symbol(col) as f64;
        let tphase = Complex64::from_polar(1.0, -2.0 * PI * (n * dnu_turns).fract());
        let cn = cross * tphase;
        let n2 = n * n;
        for (row, fp) in fphase.iter().enumerate() {
            let w = weights[col * rows + row];
            if w == 0.0 {
                continue;
            }
            let m = grid.subcarrier(row) as f64;
            let re = (cn * fp).re;
            tt += w * m * m;
            tc += w * m * m * re;
            nn += w * n2;
            nc += w * n2 * re;
        }
    }
    let kt = 2.0 * (2.0 * PI * grid.delta_f()).powi(2);
    let kn = 2.0 * (2.0 * PI * t).powi(2);
    let i_tau = [[kt * b1 * tt, kt * tc], [kt * tc, kt * b2 * tt]];
    let i_nu = [[kn * b1 * nn, kn * nc], [kn * nc, kn * b2 * nn]];
    let (crb_tau, singular_tau) = invert_fim(&i_tau);
    let (crb_nu, singular_nu) = invert_fim(&i_nu);
    Ok(FimReport { i_tau, i_nu, crb_tau, crb_nu, singular_tau, singular_nu, noise_model: noise.tag() })
}

/// Equal-total-power comparison setup.
#[derive(Debug, Clone, PartialEq)]
pub struct CrbSetup {
    pub grid: GridSpec,
    /// Total emitted power (W).
    pub p_tot: f64,
    /// Per-subcarrier sensing-to-communication power ratio `r`.
    pub sensing_ratio: f64,
    pub sigma_z2: f64,
    pub targets: TwoTargets,
    pub scheme: AllocationScheme,
    /// Model the communication echo as interference for the dual-domain
    /// estimator.
    pub colored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrbPoint {
    pub m_com: usize,
    pub eta: f64,
    /// CRB on `τ1` (s²).
    pub crb_ofdm: f64,
    pub crb_dual: f64,
    /// `10 log10(√CRB_ofdm / √CRB_dual)`.
    pub ratio_db: f64,
}

/// Communication subcarrier count for a bandwidth fraction.
pub fn m_com_for(grid: &GridSpec, fraction: f64) -> usize {
    ((fraction * grid.m() as f64).round() as usize).clamp(1, grid.m())
}

/// Root-CRB ratio (dB) between OFDM using all of `p_tot` on its allocation and
/// the dual-domain waveform splitting `p_tot` by the sensing-ratio rule.
pub fn crb_ratio_point(setup: &CrbSetup, m_com: usize, eta: f64) -> Result<CrbPoint> {
    let grid = &setup.grid;
    ensure!(setup.p_tot > 0.0, Config, "total power must be positive");
    ensure!(setup.sensing_ratio > 0.0, Config, "sensing ratio must be positive for a dual-domain comparison");
    let allocation = allocate_users(grid, 1, m_com, eta, setup.scheme, 0, &mut seeded(0))
        .map_err(|e| crate::Error::Config(e.to_string()))?;

    let ofdm = PowerPlan::ofdm_only(grid, &allocation, setup.p_tot)?;
    let p_ofdm = ofdm.comm_power_grid(grid, &allocation);
    let white = NoiseModel::White { sigma_z2: setup.sigma_z2 };
    let fim_ofdm = fim_two_targets(&p_ofdm, grid, &setup.targets, &white)?;

    let dual = PowerPlan::from_total(grid, &allocation, setup.p_tot, setup.sensing_ratio)?;
    let p_dual = vec![dual.sigma_sen_ft().powi(2); grid.len()];
    let noise = if setup.colored {
        NoiseModel::DualDomainColored { sigma_z2: setup.sigma_z2, p_com: dual.comm_power_grid(grid, &allocation) }
    } else {
        white
    };
    let fim_dual = fim_two_targets(&p_dual, grid, &setup.targets, &noise)?;
    let (a, b) = (fim_ofdm.crb_tau[0][0], fim_dual.crb_tau[0][0]);
    Ok(CrbPoint {
        m_com,
        eta: allocation.eta(),
        crb_ofdm: a,
        crb_dual: b,
        ratio_db: 5.0 * (a / b).log10(),
    })
}

/// Sweep axis for [`crb_ratio_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "kebab-case", tag = "axis", content = "values")]
pub enum CrbAxis {
    /// Occupancy `η` at a fixed band fraction.
    Eta(Vec<f64>),
    /// Band fraction `M_com/M` at a fixed occupancy.
    BandFraction(Vec<f64>),
    /// Second-target delay offset in delay bins.
    Separation(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrbRow {
    pub axis_value: f64,
    pub point: CrbPoint,
}

/// Evaluates the ratio along one axis; the other parameters stay at
/// `band_fraction` and `eta`.
pub fn crb_ratio_sweep(setup: &CrbSetup, axis: &CrbAxis, band_fraction: f64, eta: f64) -> Result<Vec<CrbRow>> {
    let grid = setup.grid;
    match axis {
        CrbAxis::Eta(values) => values
            .iter()
            .map(|&e| Ok(CrbRow { axis_value: e, point: crb_ratio_point(setup, m_com_for(&grid, band_fraction), e)? }))
            .collect(),
        CrbAxis::BandFraction(values) => values
            .iter()
            .map(|&f| Ok(CrbRow { axis_value: f, point: crb_ratio_point(setup, m_com_for(&grid, f), eta)? }))
            .collect(),
        CrbAxis::Separation(values) => {
            let dtau = grid.resolution().delta_tau;
            values
                .iter()
                .map(|&s| {
                    let mut shifted = setup.clone();
                    shifted.targets.tau2 = setup.targets.tau1 + s * dtau;
                    Ok(CrbRow {
                        axis_value: s,
                        point: crb_ratio_point(&shifted, m_com_for(&grid, band_fraction), eta)?,
                    })
                })
                .collect()
        }
    }
}
