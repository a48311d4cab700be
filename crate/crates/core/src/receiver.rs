//! UE communication reception and BS sensing reception.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel, noise_matrix, NoiseSpec, PulseShape, Side, TargetSpec};
use crate::dsp::centered_kernel;
use crate::error::{ensure, Result};
use crate::grid::{Allocation, GridSpec};
use crate::units::{linear_to_db, SPEED_OF_LIGHT};
use crate::waveform::{dd_to_ft, ft_to_dd, Domain, GridSignal, PowerPlan};

/// The three additive parts of a UE's received FT signal, kept separate so the
/// SDNR can be measured directly.
#[derive(Debug, Clone)]
pub struct UeComponents {
    /// `H_k ⊙ Σ_com ⊙ S_com`
    pub signal: GridSignal,
    /// `H_k ⊙ σ_sen S_sen`
    pub distortion: GridSignal,
    pub noise: GridSignal,
}

impl UeComponents {
    /// Pushes the transmit parts through `h` and draws UE noise.
    pub fn receive<R: Rng + ?Sized>(
        h: &GridSignal,
        comm: &GridSignal,
        sensing: &GridSignal,
        noise: &NoiseSpec,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(Self {
            signal: apply_channel(h, comm)?,
            distortion: apply_channel(h, sensing)?,
            noise: noise_matrix(h.grid(), noise, Side::Ue, rng),
        })
    }

    pub fn total(&self) -> Result<GridSignal> {
        self.signal.try_add(&self.distortion)?.try_add(&self.noise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UeReport {
    /// Measured SDNR over the UE's resources (linear, may be +inf).
    pub sdnr_ft: f64,
    /// `κ²σ_k² / (κ²σ_sen² + σ_z²)`, or without the sensing term when cancelling.
    pub sdnr_ft_bound: f64,
    /// Achievable rate at the measured SDNR (bit/s/Hz).
    pub rate: f64,
    pub cancellation: bool,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Mean signal energy over mean distortion-plus-noise energy on `set`.
pub fn ue_sdnr(components: &UeComponents, set: &[(i64, i64)], cancellation: bool) -> Result<f64> {
    ensure!(!set.is_empty(), Allocation, "UE has no allocated resources");
    let grid = components.signal.grid();
    let (mut num, mut den) = (0.0, 0.0);
    for &(m, n) in set {
        let i = grid.ft_index(m, n);
        num += components.signal.data()[i].norm_sqr();
        let mut d = components.noise.data()[i];
        if !cancellation {
            d += components.distortion.data()[i];
        }
        den += d.norm_sqr();
    }
    Ok(ratio(num, den))
}

/// Closed-form FT SDNR bound with `κ² = Σ_u σ_u² ζ_u²`.
pub fn ue_sdnr_bound(kappa2: f64, sigma_k2: f64, sigma_sen2: f64, sigma_z2: f64, cancellation: bool) -> f64 {
    let den = if cancellation { sigma_z2 } else { kappa2 * sigma_sen2 + sigma_z2 };
    ratio(kappa2 * sigma_k2, den)
}

/// `T′/(T′ + T_cp) · log2(1 + sdnr)`.
pub fn achievable_rate(sdnr: f64, grid: &GridSpec) -> f64 {
    grid.t_prime() / grid.t() * (1.0 + sdnr.max(0.0)).log2()
}

#[allow(clippy::too_many_arguments)]
pub fn ue_report(
    grid: &GridSpec,
    components: &UeComponents,
    allocation: &Allocation,
    plan: &PowerPlan,
    k: usize,
    kappa2: f64,
    noise: &NoiseSpec,
    cancellation: bool,
) -> Result<UeReport> {
    ensure!(k < allocation.users(), Allocation, "UE index {k} out of range");
    let sdnr_ft = ue_sdnr(components, &allocation.user_sets()[k], cancellation)?;
    let bound = ue_sdnr_bound(
        kappa2,
        plan.sigma_com()[k].powi(2),
        plan.sigma_sen_ft().powi(2),
        noise.sigma_z2,
        cancellation,
    );
    Ok(UeReport { sdnr_ft, sdnr_ft_bound: bound, rate: achievable_rate(sdnr_ft, grid), cancellation })
}

/// BS processing into the DD domain, `F_M Y F_N^H`.
pub fn bs_dd_receive(y_ft: &GridSignal) -> Result<GridSignal> {
    ft_to_dd(y_ft)
}

/// Genie removal of the known communication echo.
pub fn cancel_ofdm(y_ft: &GridSignal, known_comm: &GridSignal) -> Result<GridSignal> {
    y_ft.try_sub(known_comm)
}

/// Whether the cyclic prefix covers the round trip to `range`.
pub fn cp_covers(grid: &GridSpec, range: f64) -> bool {
    grid.t_cp() >= 2.0 * range / SPEED_OF_LIGHT
}

/// Sub-bin refinement applied after the grid search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Refinement {
    /// Report bin centres.
    #[default]
    None,
    /// Three-point parabola on log-power along each axis.
    Parabolic,
    /// Maximize the continuous periodogram around each peak.
    Mle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodogramConfig {
    pub max_targets: usize,
    /// Minimum Chebyshev distance in bins between reported peaks.
    pub min_separation: usize,
    /// Linear gate above the median-based noise floor.
    pub threshold: f64,
    pub refinement: Refinement,
}

impl Default for PeriodogramConfig {
    fn default() -> Self {
        Self { max_targets: 1, min_separation: 2, threshold: 0.0, refinement: Refinement::None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    /// Delay in bins, impulse offset removed.
    pub delay_bin: f64,
    /// Doppler in bins, impulse offset removed.
    pub doppler_bin: f64,
    pub tau: f64,
    pub nu: f64,
    pub range: f64,
    pub velocity: f64,
    /// `|Y_DD|²` at the peak bin.
    pub peak_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensingEstimate {
    /// Sorted by descending peak power.
    pub detections: Vec<Detection>,
    pub noise_floor: f64,
    pub refinement: Refinement,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

/// Peaks further than this below the strongest are floating-point residue.
const DYNAMIC_RANGE: f64 = 1e-15;

/// 2D periodogram peak search on a DD map. Power is read after circularly
/// shifting by the impulse position, so bin `(ℓ̃, p̃)` corresponds to delay
/// `ℓ̃Δτ` and Doppler `p̃Δν`.
pub fn periodogram_estimate(
    y_dd: &GridSignal,
    impulse: (usize, i64),
    cfg: &PeriodogramConfig,
) -> Result<SensingEstimate> {
    y_dd.require_domain(Domain::Dd)?;
    ensure!(cfg.max_targets >= 1, Config, "at least one target must be searched for");
    let grid = *y_dd.grid();
    let (rows, cols) = (grid.m(), grid.n());
    let (ell_i, p_i) = impulse;
    ensure!(ell_i < rows, Config, "impulse delay bin {ell_i} out of range");
    ensure!((grid.n_min()..=grid.n_max()).contains(&p_i), Config, "impulse Doppler bin {p_i} out of range");
    let p_shift = p_i.rem_euclid(cols as i64) as usize;

    // shifted power map, column-major over (ℓ̃, column of p̃)
    let mut power = vec![0.0; grid.len()];
    for col in 0..cols {
        let src_col = (col + p_shift) % cols;
        for ell in 0..rows {
            power[col * rows + ell] = y_dd.data()[src_col * rows + (ell + ell_i) % rows].norm_sqr();
        }
    }
    let floor = median(power.clone()) / std::f64::consts::LN_2;
    let max_power = power.iter().copied().fold(0.0, f64::max);
    let gate = (cfg.threshold * floor).max(max_power * DYNAMIC_RANGE);

    let at = |ell: isize, col: isize| -> f64 {
        power[col.rem_euclid(cols as isize) as usize * rows + ell.rem_euclid(rows as isize) as usize]
    };
    let mut peaks = Vec::new();
    for col in 0..cols as isize {
        for ell in 0..rows as isize {
            let v = at(ell, col);
            if v <= 0.0 || v <= gate {
                continue;
            }
            let idx = col * rows as isize + ell;
            let mut is_max = true;
            'nb: for dc in -1..=1isize {
                for dl in -1..=1isize {
                    if dc == 0 && dl == 0 {
                        continue;
                    }
                    let (nl, nc) = ((ell + dl).rem_euclid(rows as isize), (col + dc).rem_euclid(cols as isize));
                    let w = at(nl, nc);
                    // plateaus resolve to their first bin in storage order
                    if w > v || (w == v && nc * rows as isize + nl < idx) {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                peaks.push((v, ell as usize, col as usize));
            }
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let circ = |a: usize, b: usize, len: usize| {
        let d = a.abs_diff(b);
        d.min(len - d)
    };
    let mut chosen: Vec<(f64, usize, usize)> = Vec::new();
    for pk in peaks {
        if chosen.len() == cfg.max_targets {
            break;
        }
        let far = chosen.iter().all(|c| circ(c.1, pk.1, rows).max(circ(c.2, pk.2, cols)) >= cfg.min_separation);
        if far {
            chosen.push(pk);
        }
    }

    let y_ft = match cfg.refinement {
        Refinement::Mle if !chosen.is_empty() => Some(dd_to_ft(y_dd)?),
        _ => None,
    };
    let res = grid.resolution();
    let detections = chosen
        .into_iter()
        .map(|(peak_power, ell, col)| {
            let p = grid.symbol(col);
            let (d_ell, d_p) = match cfg.refinement {
                Refinement::None => (0.0, 0.0),
                Refinement::Parabolic => (
                    parabolic(at(ell as isize - 1, col as isize), peak_power, at(ell as isize + 1, col as isize)),
                    parabolic(at(ell as isize, col as isize - 1), peak_power, at(ell as isize, col as isize + 1)),
                ),
                Refinement::Mle => {
                    let y = y_ft.as_ref().expect("FT copy exists for MLE refinement");
                    let (x, yb) = refine_mle(y, (ell + ell_i) as f64, (p + p_i) as f64);
                    (x - (ell + ell_i) as f64, yb - (p + p_i) as f64)
                }
            };
            let delay_bin = ell as f64 + d_ell;
            let doppler_bin = p as f64 + d_p;
            let tau = delay_bin * res.delta_tau;
            let nu = doppler_bin * res.delta_nu;
            Detection {
                delay_bin,
                doppler_bin,
                tau,
                nu,
                range: tau * SPEED_OF_LIGHT / 2.0,
                velocity: nu * SPEED_OF_LIGHT / (2.0 * grid.f0()),
                peak_power,
            }
        })
        .collect();
    Ok(SensingEstimate { detections, noise_floor: floor, refinement: cfg.refinement })
}

fn parabolic(a: f64, b: f64, c: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 || c <= 0.0 {
        return 0.0;
    }
    let (a, b, c) = (a.ln(), b.ln(), c.ln());
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return 0.0;
    }
    (0.5 * (a - c) / den).clamp(-0.5, 0.5)
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Coordinate ascent on `|Σ Y[m,n] e^{j2πmx/M} e^{−j2πny/N}|²` within one
/// bin of `(x0, y0)`, the single-target white-noise MLE in continuous
/// delay and Doppler.
fn refine_mle(y_ft: &GridSignal, x0: f64, y0: f64) -> (f64, f64) {
    let grid = *y_ft.grid();
    let (rows, cols) = (grid.m(), grid.n());
    let (mf, nf) = (rows as f64, cols as f64);
    let ms: Vec<f64> = grid.subcarriers().map(|m| m as f64).collect();
    let ns: Vec<f64> = grid.symbols().map(|n| n as f64).collect();
    let data = y_ft.data();
    let (mut x, mut y) = (x0, y0);
    for _ in 0..4 {
        // collapse Doppler at the current y, then search delay
        let a: Vec<Complex64> = (0..rows)
            .map(|row| {
                (0..cols)
                    .map(|col| data[col * rows + row] * Complex64::from_polar(1.0, -2.0 * PI * ns[col] * y / nf))
                    .sum()
            })
            .collect();
        let fx = |xv: f64| {
            a.iter()
                .zip(&ms)
                .map(|(v, m)| v * Complex64::from_polar(1.0, 2.0 * PI * m * xv / mf))
                .sum::<Complex64>()
                .norm_sqr()
        };
        x = golden_max(fx, x - 1.0, x + 1.0, 48);
        let b: Vec<Complex64> = (0..cols)
            .map(|col| {
                (0..rows)
                    .map(|row| data[col * rows + row] * Complex64::from_polar(1.0, 2.0 * PI * ms[row] * x / mf))
                    .sum()
            })
            .collect();
        let fy = |yv: f64| {
            b.iter()
                .zip(&ns)
                .map(|(v, n)| v * Complex64::from_polar(1.0, -2.0 * PI * n * yv / nf))
                .sum::<Complex64>()
                .norm_sqr()
        };
        y = golden_max(fy, y - 1.0, y + 1.0, 48);
    }
    (x, y)
}

/// Detections as CSV with columns `tau_s,nu_hz,range_m,velocity_mps,peak_db`.
pub fn detections_csv(detections: &[Detection]) -> String {
    let mut s = String::from("tau_s,nu_hz,range_m,velocity_mps,peak_db\n");
    for d in detections {
        let _ = writeln!(s, "{},{},{},{},{}", d.tau, d.nu, d.range, d.velocity, linear_to_db(d.peak_power));
    }
    s
}

/// Normalized delay-Doppler coupling between two responses offset by
/// `(dtau_bins, dnu_bins)`; 1 when they coincide.
pub fn coupling_factor(grid: &GridSpec, pulse: &PulseShape, dtau_bins: f64, dnu_bins: f64) -> f64 {
    let g0 = pulse.delay_response(grid, 0.0).norm_sqr();
    let g = pulse.delay_response(grid, dtau_bins).norm_sqr();
    let d = centered_kernel(dnu_bins, grid.n()).norm_sqr() / (grid.n() as f64).powi(2);
    if g0 == 0.0 {
        return 0.0;
    }
    (g / g0 * d).clamp(0.0, 1.0)
}

/// `χ_{q,j}` for every target pair.
pub fn coupling_matrix(grid: &GridSpec, targets: &[TargetSpec], pulse: &PulseShape) -> Vec<Vec<f64>> {
    targets
        .iter()
        .map(|q| {
            targets
                .iter()
                .map(|j| {
                    coupling_factor(
                        grid,
                        pulse,
                        q.delay_bins(grid) - j.delay_bins(grid),
                        q.doppler_bins(grid) - j.doppler_bins(grid),
                    )
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensingSdnr {
    /// Expected peak power at the nearest bin over the expected disturbance.
    pub sdnr: Vec<f64>,
    /// Closed form with the peak taken at its full on-grid value.
    pub bound: Vec<f64>,
    pub coupling: Vec<Vec<f64>>,
}

/// Expected DD-domain SDNR per target: numerator `κ_q² (σ_sen^DD)²` scaled by
/// the straddle loss at the nearest bin, denominator
/// `Σ_{j≠q} κ_j² χ_{q,j} (σ_sen^DD)² + κ_sen² ‖Σ_com‖²/(MN) + L σ_z²`.
#[allow(clippy::too_many_arguments)]
pub fn sensing_sdnr(
    grid: &GridSpec,
    targets: &[TargetSpec],
    plan: &PowerPlan,
    allocation: &Allocation,
    noise: &NoiseSpec,
    pulse: &PulseShape,
    impulse: (usize, i64),
    cancellation: bool,
) -> SensingSdnr {
    let f0 = grid.f0();
    let coupling = coupling_matrix(grid, targets, pulse);
    let sen_dd2 = plan.sigma_sen_dd(grid).powi(2);
    let kappa_sen2: f64 = targets.iter().map(|t| t.gain(f0)).sum();
    let comm_dd2 = if cancellation { 0.0 } else { plan.comm_energy(allocation) / grid.len() as f64 };
    let noise_bs = noise.variance(Side::Bs);
    let mut sdnr = Vec::with_capacity(targets.len());
    let mut bound = Vec::with_capacity(targets.len());
    for (q, t) in targets.iter().enumerate() {
        let leak: f64 = targets
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != q)
            .map(|(j, tj)| tj.gain(f0) * coupling[q][j] * sen_dd2)
            .sum();
        let den = leak + kappa_sen2 * comm_dd2 + noise_bs;
        let peak = t.gain(f0) * sen_dd2;
        let x = t.delay_bins(grid) + impulse.0 as f64;
        let y = t.doppler_bins(grid) + impulse.1 as f64;
        let straddle = coupling_factor(grid, pulse, x - x.round(), y - y.round());
        sdnr.push(ratio(peak * straddle, den));
        bound.push(ratio(peak, den));
    }
    SensingSdnr { sdnr, bound, coupling }
}
