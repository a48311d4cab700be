//! Frequency-time and delay-Doppler resource lattices.
//!
//! Frequency-time (FT) indices are signed and centered on the carrier:
//! subcarrier `m ∈ [−M/2, M/2−1]`, symbol `n ∈ [−N/2, N/2−1]`. Delay-Doppler
//! (DD) indices are delay bin `ℓ ∈ [0, M−1]` and Doppler bin
//! `p ∈ [−N/2, N/2−1]`. Matrices are stored column-major with FT entry
//! `(m, n)` at row `m + M/2`, column `n + N/2` (DD entry `(ℓ, p)` at row `ℓ`,
//! column `p + N/2`), so a column is one OFDM symbol.

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::units::SPEED_OF_LIGHT;

/// The FT/DD lattice: `M` subcarriers spaced `delta_f` apart, `N` symbols of
/// duration `T = T' + T_cp` with `T' = 1/delta_f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    m: usize,
    n: usize,
    delta_f: f64,
    t_prime: f64,
    t_cp: f64,
    f0: f64,
}

/// Delay, Doppler, range and velocity bin sizes of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DdResolution {
    pub delta_tau: f64,
    pub delta_nu: f64,
    pub delta_range: f64,
    pub delta_velocity: f64,
}

impl GridSpec {
    pub fn new(m: usize, n: usize, delta_f: f64, t_cp: f64, f0: f64) -> Result<Self> {
        ensure!(m >= 2, Config, "subcarrier count M must be >= 2, got {m}");
        ensure!(n >= 2, Config, "symbol count N must be >= 2, got {n}");
        ensure!(
            delta_f.is_finite() && delta_f > 0.0,
            Config,
            "subcarrier spacing must be positive, got {delta_f}"
        );
        ensure!(
            t_cp.is_finite() && t_cp >= 0.0,
            Config,
            "cyclic prefix duration must be non-negative, got {t_cp}"
        );
        ensure!(f0.is_finite() && f0 > 0.0, Config, "carrier frequency must be positive, got {f0}");
        Ok(Self { m, n, delta_f, t_prime: 1.0 / delta_f, t_cp, f0 })
    }

    /// Reference grid: 1 GHz over 1024 subcarriers, 128 symbols,
    /// 0.102 µs cyclic prefix at 30 GHz.
    pub fn reference() -> Self {
        Self::new(1024, 128, 1e9 / 1024.0, 0.102e-6, 30e9).expect("reference grid is valid")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    /// Useful symbol duration `T' = 1/Δf`.
    pub fn t_prime(&self) -> f64 {
        self.t_prime
    }

    pub fn t_cp(&self) -> f64 {
        self.t_cp
    }

    /// Full symbol duration including the cyclic prefix.
    pub fn t(&self) -> f64 {
        self.t_prime + self.t_cp
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn bandwidth(&self) -> f64 {
        self.m as f64 * self.delta_f
    }

    pub fn len(&self) -> usize {
        self.m * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn resolution(&self) -> DdResolution {
        let delta_tau = 1.0 / (self.m as f64 * self.delta_f);
        let delta_nu = 1.0 / (self.n as f64 * self.t());
        DdResolution {
            delta_tau,
            delta_nu,
            delta_range: SPEED_OF_LIGHT / 2.0 * delta_tau,
            delta_velocity: SPEED_OF_LIGHT / (2.0 * self.f0) * delta_nu,
        }
    }

    /// Cyclic-prefix length in samples, `round(T_cp / T' · M)`.
    pub fn cp_samples(&self) -> usize {
        (self.t_cp / self.t_prime * self.m as f64).round() as usize
    }

    pub fn m_offset(&self) -> i64 {
        (self.m / 2) as i64
    }

    pub fn n_offset(&self) -> i64 {
        (self.n / 2) as i64
    }

    pub fn m_min(&self) -> i64 {
        -self.m_offset()
    }

    pub fn m_max(&self) -> i64 {
        self.m as i64 - 1 - self.m_offset()
    }

    pub fn n_min(&self) -> i64 {
        -self.n_offset()
    }

    pub fn n_max(&self) -> i64 {
        self.n as i64 - 1 - self.n_offset()
    }

    /// Signed subcarrier index of storage row `row`.
    pub fn subcarrier(&self, row: usize) -> i64 {
        row as i64 - self.m_offset()
    }

    /// Signed symbol (or Doppler bin) index of storage column `col`.
    pub fn symbol(&self, col: usize) -> i64 {
        col as i64 - self.n_offset()
    }

    pub fn subcarriers(&self) -> impl Iterator<Item = i64> + Clone {
        self.m_min()..=self.m_max()
    }

    pub fn symbols(&self) -> impl Iterator<Item = i64> + Clone {
        self.n_min()..=self.n_max()
    }

    pub fn contains_ft(&self, m: i64, n: i64) -> bool {
        (self.m_min()..=self.m_max()).contains(&m) && (self.n_min()..=self.n_max()).contains(&n)
    }

    /// Column-major storage index of FT entry `(m, n)`.
    pub fn ft_index(&self, m: i64, n: i64) -> usize {
        debug_assert!(self.contains_ft(m, n));
        let row = (m + self.m_offset()) as usize;
        let col = (n + self.n_offset()) as usize;
        row + self.m * col
    }

    /// Column-major storage index of DD entry `(ℓ, p)`.
    pub fn dd_index(&self, ell: usize, p: i64) -> usize {
        debug_assert!(ell < self.m);
        let col = (p + self.n_offset()) as usize;
        ell + self.m * col
    }

    /// Largest range whose round-trip delay still fits in the cyclic prefix.
    pub fn max_unambiguous_cp_range(&self) -> f64 {
        SPEED_OF_LIGHT * self.t_cp / 2.0
    }
}

/// Inclusive axis-aligned index rectangle on the FT lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRect {
    pub m_lo: i64,
    pub m_hi: i64,
    pub n_lo: i64,
    pub n_hi: i64,
}

impl IndexRect {
    pub fn full(grid: &GridSpec) -> Self {
        Self { m_lo: grid.m_min(), m_hi: grid.m_max(), n_lo: grid.n_min(), n_hi: grid.n_max() }
    }

    pub fn width(&self) -> usize {
        (self.m_hi - self.m_lo + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.n_hi - self.n_lo + 1) as usize
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, m: i64, n: i64) -> bool {
        (self.m_lo..=self.m_hi).contains(&m) && (self.n_lo..=self.n_hi).contains(&n)
    }

    pub fn contains_rect(&self, other: &IndexRect) -> bool {
        self.contains(other.m_lo, other.n_lo) && self.contains(other.m_hi, other.n_hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum AllocationScheme {
    /// Evenly spaced resources, each UE receiving a contiguous run in
    /// subcarrier-major order.
    ContiguousBlocks,
    /// Uniformly random subset, randomly partitioned among UEs.
    RandomUniform,
}

/// Per-UE resource sets on the FT grid plus the communication band they live in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    user_sets: Vec<Vec<(i64, i64)>>,
    hull: IndexRect,
    eta: f64,
    m_com: usize,
    m_ob: usize,
}

impl Allocation {
    /// Builds an allocation from explicit user sets inside a declared band.
    pub fn from_sets(grid: &GridSpec, user_sets: Vec<Vec<(i64, i64)>>, hull: IndexRect) -> Result<Self> {
        ensure!(
            IndexRect::full(grid).contains_rect(&hull),
            Allocation,
            "communication band {hull:?} exceeds the grid"
        );
        ensure!(
            hull.height() == grid.n(),
            Allocation,
            "communication band must span all {} symbols",
            grid.n()
        );
        let mut seen = vec![false; grid.len()];
        let mut used = 0usize;
        for (k, set) in user_sets.iter().enumerate() {
            for &(m, n) in set {
                ensure!(hull.contains(m, n), Allocation, "UE {k} resource ({m},{n}) outside band");
                let idx = grid.ft_index(m, n);
                ensure!(!seen[idx], Allocation, "resource ({m},{n}) assigned twice");
                seen[idx] = true;
                used += 1;
            }
        }
        let m_com = hull.width();
        Ok(Self {
            user_sets,
            hull,
            eta: used as f64 / (m_com * grid.n()) as f64,
            m_com,
            m_ob: grid.m() - m_com,
        })
    }

    /// An allocation with no UEs and a zero-width band. The grid is fully
    /// out-of-band.
    pub fn empty(grid: &GridSpec) -> Self {
        Self {
            user_sets: Vec::new(),
            hull: IndexRect { m_lo: 0, m_hi: -1, n_lo: grid.n_min(), n_hi: grid.n_max() },
            eta: 0.0,
            m_com: 0,
            m_ob: grid.m(),
        }
    }

    pub fn user_sets(&self) -> &[Vec<(i64, i64)>] {
        &self.user_sets
    }

    pub fn users(&self) -> usize {
        self.user_sets.len()
    }

    pub fn hull(&self) -> IndexRect {
        self.hull
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn m_com(&self) -> usize {
        self.m_com
    }

    pub fn m_ob(&self) -> usize {
        self.m_ob
    }

    pub fn allocated(&self) -> usize {
        self.user_sets.iter().map(Vec::len).sum()
    }

    /// Boolean occupancy mask in grid storage order.
    pub fn mask(&self, grid: &GridSpec) -> Vec<bool> {
        let mut mask = vec![false; grid.len()];
        for set in &self.user_sets {
            for &(m, n) in set {
                mask[grid.ft_index(m, n)] = true;
            }
        }
        mask
    }
}

/// Centered communication band of `m_com` subcarriers, shifted by `offset`.
pub fn centered_band(grid: &GridSpec, m_com: usize, offset: i64) -> Result<IndexRect> {
    ensure!(
        (1..=grid.m()).contains(&m_com),
        Allocation,
        "M_com must lie in [1, {}], got {m_com}",
        grid.m()
    );
    let lo = -((m_com / 2) as i64) + offset;
    let hull = IndexRect { m_lo: lo, m_hi: lo + m_com as i64 - 1, n_lo: grid.n_min(), n_hi: grid.n_max() };
    ensure!(
        IndexRect::full(grid).contains_rect(&hull),
        Allocation,
        "band offset {offset} pushes the {m_com}-subcarrier band outside the grid"
    );
    Ok(hull)
}

/// Number of allocated resources for occupancy `eta`: nearest integer, ties up.
pub fn allocated_count(eta: f64, m_com: usize, n: usize) -> usize {
    (eta * (m_com * n) as f64 + 0.5).floor() as usize
}

/// Splits the communication band among `k` UEs with occupancy `eta`.
pub fn allocate_users<R: Rng + ?Sized>(
    grid: &GridSpec,
    k: usize,
    m_com: usize,
    eta: f64,
    scheme: AllocationScheme,
    band_offset: i64,
    rng: &mut R,
) -> Result<Allocation> {
    ensure!(k >= 1, Allocation, "at least one UE is required");
    ensure!(eta > 0.0 && eta <= 1.0, Allocation, "occupancy eta must lie in (0, 1], got {eta}");
    let hull = centered_band(grid, m_com, band_offset)?;
    let capacity = m_com * grid.n();
    let count = allocated_count(eta, m_com, grid.n()).min(capacity);
    ensure!(
        count >= k,
        Allocation,
        "eta·M_com·N = {count} resources cannot serve {k} UEs"
    );

    // subcarrier-major enumeration of the band
    let band: Vec<(i64, i64)> = (hull.m_lo..=hull.m_hi)
        .flat_map(|m| (hull.n_lo..=hull.n_hi).map(move |n| (m, n)))
        .collect();

    let chosen: Vec<(i64, i64)> = match scheme {
        AllocationScheme::ContiguousBlocks => {
            (0..count).map(|i| band[i * capacity / count]).collect()
        }
        AllocationScheme::RandomUniform => {
            let mut picks: Vec<usize> = index::sample(rng, capacity, count).into_vec();
            picks.shuffle(rng);
            picks.into_iter().map(|i| band[i]).collect()
        }
    };

    let mut user_sets = Vec::with_capacity(k);
    for u in 0..k {
        let lo = u * count / k;
        let hi = (u + 1) * count / k;
        let mut set = chosen[lo..hi].to_vec();
        set.sort_unstable();
        user_sets.push(set);
    }
    Allocation::from_sets(grid, user_sets, hull)
}

/// Smallest axis-aligned rectangle containing every allocated resource.
pub fn hull_of(sets: &[Vec<(i64, i64)>], grid: &GridSpec) -> Result<IndexRect> {
    let mut points = sets.iter().flatten().peekable();
    let Some(&&(m0, n0)) = points.peek() else {
        return Err(Error::Allocation("hull of an empty allocation".into()));
    };
    let mut rect = IndexRect { m_lo: m0, m_hi: m0, n_lo: n0, n_hi: n0 };
    for &(m, n) in points {
        ensure!(grid.contains_ft(m, n), Allocation, "resource ({m},{n}) outside the grid");
        rect.m_lo = rect.m_lo.min(m);
        rect.m_hi = rect.m_hi.max(m);
        rect.n_lo = rect.n_lo.min(n);
        rect.n_hi = rect.n_hi.max(n);
    }
    Ok(rect)
}
