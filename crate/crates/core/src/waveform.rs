//! Transmit waveform synthesis: OFDM data on the allocated FT resources plus a
//! delay-Doppler impulse mapped to a 2D FT sinusoid, superposed on one grid.

use std::f64::consts::PI;
use std::io::{self, Read, Write};

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::dsp::{CenteredDft, Rotation};
use crate::error::{ensure, Result};
use crate::grid::{Allocation, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Domain {
    /// Frequency-time
    Ft,
    /// Delay-Doppler
    Dd,
    /// Time-delay
    Td,
}

/// An `M × N` complex matrix on a grid, tagged with its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    grid: GridSpec,
    domain: Domain,
    data: Vec<Complex64>,
}

impl GridSignal {
    pub fn zeros(grid: GridSpec, domain: Domain) -> Self {
        Self { grid, domain, data: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_data(grid: GridSpec, domain: Domain, data: Vec<Complex64>) -> Result<Self> {
        ensure!(
            data.len() == grid.len(),
            Domain,
            "expected {} samples for a {}x{} grid, got {}",
            grid.len(),
            grid.m(),
            grid.n(),
            data.len()
        );
        Ok(Self { grid, domain, data })
    }

    /// FT signal with entry `(m, n)` given by `f(m, n)`.
    pub fn from_ft_fn(grid: GridSpec, mut f: impl FnMut(i64, i64) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for col in 0..grid.n() {
            let n = grid.symbol(col);
            for row in 0..grid.m() {
                data.push(f(grid.subcarrier(row), n));
            }
        }
        Self { grid, domain: Domain::Ft, data }
    }

    /// DD signal with entry `(ℓ, p)` given by `f(ℓ, p)`.
    pub fn from_dd_fn(grid: GridSpec, mut f: impl FnMut(usize, i64) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for col in 0..grid.n() {
            let p = grid.symbol(col);
            for ell in 0..grid.m() {
                data.push(f(ell, p));
            }
        }
        Self { grid, domain: Domain::Dd, data }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Column-major samples (see [`crate::grid`] for the index layout).
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn ft(&self, m: i64, n: i64) -> Complex64 {
        self.data[self.grid.ft_index(m, n)]
    }

    pub fn dd(&self, ell: usize, p: i64) -> Complex64 {
        self.data[self.grid.dd_index(ell, p)]
    }

    /// Squared Frobenius norm.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { grid: self.grid, domain: self.domain, data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn require_domain(&self, domain: Domain) -> Result<()> {
        ensure!(self.domain == domain, Domain, "expected a {domain:?} signal, got {:?}", self.domain);
        Ok(())
    }

    pub fn require_compatible(&self, other: &GridSignal) -> Result<()> {
        ensure!(self.grid == other.grid, Domain, "signals live on different grids");
        ensure!(
            self.domain == other.domain,
            Domain,
            "cannot combine {:?} and {:?} signals",
            self.domain,
            other.domain
        );
        Ok(())
    }

    pub fn try_add(&self, other: &GridSignal) -> Result<Self> {
        self.require_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, domain: self.domain, data })
    }

    pub fn try_sub(&self, other: &GridSignal) -> Result<Self> {
        self.require_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, domain: self.domain, data })
    }

    /// Element-wise product.
    pub fn try_hadamard(&self, other: &GridSignal) -> Result<Self> {
        self.require_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Ok(Self { grid: self.grid, domain: self.domain, data })
    }

    pub fn max_abs_diff(&self, other: &GridSignal) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Square QAM constellation normalized to unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Qam {
    order: usize,
    points: Vec<Complex64>,
}

impl Qam {
    pub fn new(order: usize) -> Result<Self> {
        ensure!(
            matches!(order, 4 | 16 | 64 | 256),
            Config,
            "QAM order must be one of 4, 16, 64, 256, got {order}"
        );
        let side = (order as f64).sqrt() as usize;
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let level = |i: usize| (2.0 * i as f64 - (side as f64 - 1.0)) / scale;
        let points = (0..side).flat_map(|i| (0..side).map(move |q| Complex64::new(level(i), level(q)))).collect();
        Ok(Self { order, points })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        self.points[rng.random_range(0..self.order)]
    }
}

/// Communication and sensing amplitudes, with the bandwidth-integrated powers
/// `P_com = ‖Σ_com‖²_F / N` and `P_sen = M·σ_sen²` they imply.
///
/// `sigma_sen_ft` is the per-resource amplitude of the sensing sinusoid in FT,
/// so every FT bin carries sensing power `σ_sen²` and the DD impulse has
/// amplitude `σ_sen·√(MN)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerPlan {
    sigma_com: Vec<f64>,
    sigma_sen_ft: f64,
    p_com: f64,
    p_sen: f64,
}

impl PowerPlan {
    pub fn new(grid: &GridSpec, allocation: &Allocation, sigma_com: Vec<f64>, sigma_sen_ft: f64) -> Result<Self> {
        ensure!(
            sigma_com.len() == allocation.users(),
            Config,
            "{} UE amplitudes supplied for {} UEs",
            sigma_com.len(),
            allocation.users()
        );
        ensure!(
            sigma_com.iter().all(|s| s.is_finite() && *s >= 0.0),
            Config,
            "communication amplitudes must be non-negative"
        );
        ensure!(
            sigma_sen_ft.is_finite() && sigma_sen_ft >= 0.0,
            Config,
            "sensing amplitude must be non-negative"
        );
        let p_com = allocation
            .user_sets()
            .iter()
            .zip(&sigma_com)
            .map(|(set, s)| set.len() as f64 * s * s)
            .sum::<f64>()
            / grid.n() as f64;
        let p_sen = grid.m() as f64 * sigma_sen_ft * sigma_sen_ft;
        Ok(Self { sigma_com, sigma_sen_ft, p_com, p_sen })
    }

    /// Splits `p_tot` with equal power on every allocated resource and a
    /// per-subcarrier sensing-to-communication ratio `ratio`, following
    /// `P_com + (M/M_com)·ratio·P_com = P_tot`.
    pub fn from_total(grid: &GridSpec, allocation: &Allocation, p_tot: f64, ratio: f64) -> Result<Self> {
        ensure!(p_tot.is_finite() && p_tot >= 0.0, Config, "total power must be non-negative");
        ensure!(ratio.is_finite() && ratio >= 0.0, Config, "sensing ratio must be non-negative");
        if allocation.allocated() == 0 {
            let sigma_sen = (p_tot / grid.m() as f64).sqrt();
            return Self::new(grid, allocation, vec![0.0; allocation.users()], sigma_sen);
        }
        let m_com = allocation.m_com() as f64;
        let p_com = p_tot / (1.0 + grid.m() as f64 / m_com * ratio);
        let per_resource = p_com * grid.n() as f64 / allocation.allocated() as f64;
        let sigma_sen2 = ratio * p_com / m_com;
        Self::new(grid, allocation, vec![per_resource.sqrt(); allocation.users()], sigma_sen2.sqrt())
    }

    /// Pure OFDM: all of `p_tot` on the allocated resources.
    pub fn ofdm_only(grid: &GridSpec, allocation: &Allocation, p_tot: f64) -> Result<Self> {
        Self::from_total(grid, allocation, p_tot, 0.0)
    }

    pub fn sigma_com(&self) -> &[f64] {
        &self.sigma_com
    }

    pub fn sigma_sen_ft(&self) -> f64 {
        self.sigma_sen_ft
    }

    /// DD impulse amplitude, `(σ_sen^DD)² = MN·(σ_sen^FT)²`.
    pub fn sigma_sen_dd(&self, grid: &GridSpec) -> f64 {
        self.sigma_sen_ft * (grid.len() as f64).sqrt()
    }

    pub fn p_com(&self) -> f64 {
        self.p_com
    }

    pub fn p_sen(&self) -> f64 {
        self.p_sen
    }

    pub fn p_tot(&self) -> f64 {
        self.p_com + self.p_sen
    }

    /// In-band power: communication plus the sensing share inside the band.
    pub fn p_ib(&self, allocation: &Allocation) -> f64 {
        self.p_com + allocation.m_com() as f64 * self.sigma_sen_ft.powi(2)
    }

    /// Out-of-band power: the sensing sinusoid outside the communication band.
    pub fn p_ob(&self, allocation: &Allocation) -> f64 {
        allocation.m_ob() as f64 * self.sigma_sen_ft.powi(2)
    }

    /// `‖Σ_com‖²_F`.
    pub fn comm_energy(&self, allocation: &Allocation) -> f64 {
        allocation.user_sets().iter().zip(&self.sigma_com).map(|(set, s)| set.len() as f64 * s * s).sum()
    }

    /// Per-resource communication power `Σ_com ⊙ Σ_com` in storage order.
    pub fn comm_power_grid(&self, grid: &GridSpec, allocation: &Allocation) -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        for (set, s) in allocation.user_sets().iter().zip(&self.sigma_com) {
            for &(m, n) in set {
                out[grid.ft_index(m, n)] = s * s;
            }
        }
        out
    }
}

/// `Σ_com ⊙ S_com`: unit-energy QAM symbols on each UE's resources, scaled by
/// that UE's amplitude; zero elsewhere.
pub fn synth_comm<R: Rng + ?Sized>(
    grid: &GridSpec,
    allocation: &Allocation,
    qam: &Qam,
    plan: &PowerPlan,
    rng: &mut R,
) -> Result<GridSignal> {
    ensure!(
        plan.sigma_com().len() == allocation.users(),
        Config,
        "power plan does not match the allocation"
    );
    let mut out = GridSignal::zeros(*grid, Domain::Ft);
    for (set, &sigma) in allocation.user_sets().iter().zip(plan.sigma_com()) {
        for &(m, n) in set {
            out.data[grid.ft_index(m, n)] = qam.sample(rng) * sigma;
        }
    }
    Ok(out)
}

/// Unit DD impulse at delay bin `ell`, Doppler bin `p`.
pub fn synth_sensing_dd(grid: &GridSpec, ell: usize, p: i64) -> Result<GridSignal> {
    ensure!(ell < grid.m(), Config, "impulse delay bin {ell} outside [0, {}]", grid.m() - 1);
    ensure!(
        (grid.n_min()..=grid.n_max()).contains(&p),
        Config,
        "impulse Doppler bin {p} outside [{}, {}]",
        grid.n_min(),
        grid.n_max()
    );
    let mut out = GridSignal::zeros(*grid, Domain::Dd);
    out.data[grid.dd_index(ell, p)] = Complex64::new(1.0, 0.0);
    Ok(out)
}

/// Closed-form FT image of a unit DD impulse at `(ℓ_i, p_i)`:
/// `(MN)^{-1/2} exp(j2π(n p_i/N − m ℓ_i/M))`.
pub fn sensing_sinusoid(grid: &GridSpec, ell: usize, p: i64) -> GridSignal {
    let (mf, nf) = (grid.m() as i64, grid.n() as i64);
    let norm = 1.0 / (grid.len() as f64).sqrt();
    GridSignal::from_ft_fn(*grid, |m, n| {
        let doppler_turns = (n * p).rem_euclid(nf) as f64 / nf as f64;
        let delay_turns = (m * ell as i64).rem_euclid(mf) as f64 / mf as f64;
        Complex64::from_polar(norm, 2.0 * PI * (doppler_turns - delay_turns))
    })
}

/// `F_M S F_N^H`: unitary DFT along delay, unitary inverse DFT along Doppler.
pub fn dd_to_ft(sig: &GridSignal) -> Result<GridSignal> {
    sig.require_domain(Domain::Dd)?;
    let grid = sig.grid;
    let mut data = sig.data.clone();
    let mut planner = FftPlanner::new();
    let (m, n) = (grid.m(), grid.n());
    CenteredDft { len: m, rotation: Rotation::Negative, in_offset: 0, out_offset: m / 2 }
        .apply(&mut planner, &mut data, n, m, 1);
    CenteredDft { len: n, rotation: Rotation::Positive, in_offset: n / 2, out_offset: n / 2 }
        .apply(&mut planner, &mut data, m, 1, m);
    Ok(GridSignal { grid, domain: Domain::Ft, data })
}

/// `F_M^H Y F_N`, the exact inverse of [`dd_to_ft`].
pub fn ft_to_dd(sig: &GridSignal) -> Result<GridSignal> {
    sig.require_domain(Domain::Ft)?;
    let grid = sig.grid;
    let mut data = sig.data.clone();
    let mut planner = FftPlanner::new();
    let (m, n) = (grid.m(), grid.n());
    CenteredDft { len: m, rotation: Rotation::Positive, in_offset: m / 2, out_offset: 0 }
        .apply(&mut planner, &mut data, n, m, 1);
    CenteredDft { len: n, rotation: Rotation::Negative, in_offset: n / 2, out_offset: n / 2 }
        .apply(&mut planner, &mut data, m, 1, m);
    Ok(GridSignal { grid, domain: Domain::Dd, data })
}

/// The superposed transmit matrix and its power bookkeeping.
#[derive(Debug, Clone)]
pub struct TxSignal {
    pub x: GridSignal,
    pub p_com: f64,
    pub p_sen: f64,
}

impl TxSignal {
    /// `‖X‖²_F / N` measured on the synthesized matrix.
    pub fn measured_power(&self) -> f64 {
        self.x.energy() / self.x.grid().n() as f64
    }
}

/// `X = Σ_com ⊙ S_com + σ_sen^DD · S_sen^FT`, where `comm` already carries the
/// per-UE amplitudes (see [`synth_comm`]) and `sensing_ft` is the unit-energy
/// FT image of the DD impulse.
pub fn compose_tx(comm: &GridSignal, plan: &PowerPlan, sensing_ft: &GridSignal) -> Result<TxSignal> {
    comm.require_domain(Domain::Ft)?;
    comm.require_compatible(sensing_ft)?;
    let amp = plan.sigma_sen_dd(comm.grid());
    let data = comm.data.iter().zip(&sensing_ft.data).map(|(c, s)| c + s * amp).collect();
    Ok(TxSignal {
        x: GridSignal { grid: comm.grid, domain: Domain::Ft, data },
        p_com: plan.p_com(),
        p_sen: plan.p_sen(),
    })
}

/// Serializes an FT matrix: per symbol, an `M`-point unitary inverse DFT over
/// the centered subcarriers, preceded by a cyclic prefix of
/// [`GridSpec::cp_samples`] samples. Output length is `N·(M + M_cp)`.
pub fn to_time_domain(x: &GridSignal) -> Result<Vec<Complex64>> {
    x.require_domain(Domain::Ft)?;
    let grid = x.grid;
    let (m, n) = (grid.m(), grid.n());
    let cp = grid.cp_samples();
    let mut symbols = x.data.clone();
    let mut planner = FftPlanner::new();
    CenteredDft { len: m, rotation: Rotation::Positive, in_offset: m / 2, out_offset: 0 }
        .apply(&mut planner, &mut symbols, n, m, 1);
    let mut stream = Vec::with_capacity(n * (m + cp));
    for sym in symbols.chunks_exact(m) {
        // the prefix may be longer than a symbol; wrap cyclically
        stream.extend((0..cp).map(|i| sym[(m - cp % m + i) % m]));
        stream.extend_from_slice(sym);
    }
    Ok(stream)
}

/// Writes samples as interleaved little-endian `f64` I/Q pairs.
pub fn write_iq<W: Write>(samples: &[Complex64], mut out: W) -> io::Result<()> {
    let mut buf = Vec::with_capacity(samples.len() * 16);
    for z in samples {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    out.write_all(&buf)
}

pub fn read_iq<R: Read>(mut input: R) -> io::Result<Vec<Complex64>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() % 16 != 0 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "I/Q stream length is not a multiple of 16"));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect())
}
