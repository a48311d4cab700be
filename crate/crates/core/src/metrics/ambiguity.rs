//! Ambiguity function `χ(τ,ν) = Σ_{m,n} p[m,n] e^{−j2πmΔfτ} e^{−j2πnT_sν}`
//! of a per-resource power allocation, and the main-lobe energy ratio.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::grid::GridSpec;

/// Which symbol period the Doppler response uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum WaveformKind {
    Ofdm,
    DualDomain,
    /// Full occupation with no cyclic prefix: Doppler uses `T′`.
    Otfs,
}

impl WaveformKind {
    pub fn symbol_period(&self, grid: &GridSpec) -> f64 {
        match self {
            WaveformKind::Ofdm | WaveformKind::DualDomain => grid.t(),
            WaveformKind::Otfs => grid.t_prime(),
        }
    }
}

/// `|χ|` sampled on a `(τ, ν)` lattice, stored row-major over `τ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbiguityMap {
    pub values: Vec<f64>,
    pub tau_axis: Vec<f64>,
    pub nu_axis: Vec<f64>,
    pub kind: WaveformKind,
    /// `Σ p`, the value at the origin.
    pub peak: f64,
    /// `∫∫ |χ|²` over one period in delay and Doppler.
    pub total_energy: f64,
    /// `∫ |χ(τ,0)|²` over one delay period.
    pub cut_total_energy: f64,
}

impl AmbiguityMap {
    pub fn at(&self, tau_idx: usize, nu_idx: usize) -> f64 {
        self.values[tau_idx * self.nu_axis.len() + nu_idx]
    }
}

/// Per-resource power of a flat allocation over every bin.
pub fn flat_power(grid: &GridSpec, per_resource: f64) -> Vec<f64> {
    vec![per_resource; grid.len()]
}

/// Flat power on the `m_com` centered subcarriers only.
pub fn band_power(grid: &GridSpec, m_com: usize, per_resource: f64) -> Vec<f64> {
    let lo = -((m_com / 2) as i64);
    let hi = lo + m_com as i64 - 1;
    let mut p = vec![0.0; grid.len()];
    for n in grid.symbols() {
        for m in lo..=hi {
            p[grid.ft_index(m, n)] = per_resource;
        }
    }
    p
}

fn energies(p: &[f64], grid: &GridSpec, kind: WaveformKind) -> (f64, f64) {
    let ts = kind.symbol_period(grid);
    let total = p.iter().map(|v| v * v).sum::<f64>() / (grid.delta_f() * ts);
    let cut: f64 = (0..grid.m())
        .map(|row| (0..grid.n()).map(|col| p[col * grid.m() + row]).sum::<f64>().powi(2))
        .sum::<f64>()
        / grid.delta_f();
    (total, cut)
}

/// Direct evaluation of `|χ|` on arbitrary axes. Delays may be negative down
/// to `−T′` so the main lobe can be sampled symmetrically.
pub fn ambiguity(
    p: &[f64],
    grid: &GridSpec,
    kind: WaveformKind,
    tau_axis: &[f64],
    nu_axis: &[f64],
) -> Result<AmbiguityMap> {
    ensure!(p.len() == grid.len(), Domain, "power vector has {} entries, grid has {}", p.len(), grid.len());
    ensure!(p.iter().all(|v| v.is_finite() && *v >= 0.0), Domain, "powers must be non-negative");
    let ts = kind.symbol_period(grid);
    let tol = 1e-9;
    let t_lim = grid.t_prime() * (1.0 + tol);
    let nu_lim = 0.5 / ts * (1.0 + tol);
    ensure!(tau_axis.iter().all(|t| t.abs() <= t_lim), Domain, "delay outside [−T′, T′]");
    ensure!(nu_axis.iter().all(|v| v.abs() <= nu_lim), Domain, "Doppler outside ±1/(2T)");

    let (rows, cols) = (grid.m(), grid.n());
    let ms: Vec<f64> = grid.subcarriers().map(|m| m as f64).collect();
    let ns: Vec<f64> = grid.symbols().map(|n| n as f64).collect();
    let mut values = Vec::with_capacity(tau_axis.len() * nu_axis.len());
    for &tau in tau_axis {
        // collapse the delay axis first: A[n] = Σ_m p[m,n] e^{−j2πmΔfτ}
        let turns = grid.delta_f() * tau;
        let delay: Vec<Complex64> =
            ms.iter().map(|m| Complex64::from_polar(1.0, -2.0 * PI * (m * turns).fract())).collect();
        let a: Vec<Complex64> = (0..cols)
            .map(|col| p[col * rows..(col + 1) * rows].iter().zip(&delay).map(|(v, d)| d * *v).sum())
            .collect();
        for &nu in nu_axis {
            let dturns = ts * nu;
            let chi: Complex64 = a
                .iter()
                .zip(&ns)
                .map(|(v, n)| v * Complex64::from_polar(1.0, -2.0 * PI * (n * dturns).fract()))
                .sum();
            values.push(chi.norm());
        }
    }
    let (total_energy, cut_total_energy) = energies(p, grid, kind);
    Ok(AmbiguityMap {
        values,
        tau_axis: tau_axis.to_vec(),
        nu_axis: nu_axis.to_vec(),
        kind,
        peak: p.iter().sum(),
        total_energy,
        cut_total_energy,
    })
}

/// FFT evaluation on the aligned lattice `τ_k = k/(o_τ MΔf)`, `k ∈ [0, o_τM)`
/// and `ν_l = l/(o_ν N T_s)`, `l ∈ [−o_νN/2, o_νN/2)`: one full period.
pub fn ambiguity_aligned(
    p: &[f64],
    grid: &GridSpec,
    kind: WaveformKind,
    tau_oversample: usize,
    nu_oversample: usize,
) -> Result<AmbiguityMap> {
    ensure!(p.len() == grid.len(), Domain, "power vector has {} entries, grid has {}", p.len(), grid.len());
    ensure!(tau_oversample >= 1 && nu_oversample >= 1, Domain, "oversampling factors must be >= 1");
    let (rows, cols) = (grid.m(), grid.n());
    let (lt, ln) = (tau_oversample * rows, nu_oversample * cols);
    let ts = kind.symbol_period(grid);

    // buffer indexed [l][k]: k (delay) contiguous
    let mut buf = vec![Complex64::new(0.0, 0.0); lt * ln];
    for col in 0..cols {
        let n = grid.symbol(col).rem_euclid(ln as i64) as usize;
        for row in 0..rows {
            let m = grid.subcarrier(row).rem_euclid(lt as i64) as usize;
            buf[n * lt + m] = Complex64::new(p[col * rows + row], 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    let fft_t = planner.plan_fft_forward(lt);
    for lane in buf.chunks_exact_mut(lt) {
        fft_t.process(lane);
    }
    let fft_n = planner.plan_fft_forward(ln);
    let mut lane = vec![Complex64::new(0.0, 0.0); ln];
    for k in 0..lt {
        for (l, v) in lane.iter_mut().enumerate() {
            *v = buf[l * lt + k];
        }
        fft_n.process(&mut lane);
        for (l, v) in lane.iter().enumerate() {
            buf[l * lt + k] = *v;
        }
    }

    let half = (ln / 2) as i64;
    let nu_idx: Vec<i64> = (-half..ln as i64 - half).collect();
    let tau_axis: Vec<f64> = (0..lt).map(|k| k as f64 / (lt as f64 * grid.delta_f())).collect();
    let nu_axis: Vec<f64> = nu_idx.iter().map(|&l| l as f64 / (ln as f64 * ts)).collect();
    let mut values = Vec::with_capacity(lt * ln);
    for k in 0..lt {
        for &l in &nu_idx {
            values.push(buf[l.rem_euclid(ln as i64) as usize * lt + k].norm());
        }
    }
    let (total_energy, cut_total_energy) = energies(p, grid, kind);
    Ok(AmbiguityMap { values, tau_axis, nu_axis, kind, peak: p.iter().sum(), total_energy, cut_total_energy })
}

/// How the main-lobe-to-total ratio is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum MterVariant {
    /// `∫∫_main |χ|² / ∫∫_period |χ|²`.
    Energy2d,
    /// Square root of [`MterVariant::Energy2d`].
    Sqrt2d,
    /// Energy ratio of the zero-Doppler delay cut `|χ(τ, 0)|²`.
    #[default]
    DelayCut,
}

/// Lowest sample count per main-lobe axis accepted by [`mter`].
pub const MIN_LOBE_SAMPLES: usize = 8;

/// Symmetric axis of `samples` points spanning `[−half, half]`.
pub fn symmetric_axis(half: f64, samples: usize) -> Vec<f64> {
    if samples == 1 {
        return vec![0.0];
    }
    (0..samples).map(|i| -half + 2.0 * half * i as f64 / (samples - 1) as f64).collect()
}

/// `|χ|` on the main-lobe rectangle `|τ| ≤ Δτ/2`, `|ν| ≤ Δν/2`, where the
/// resolutions come from the full band and the waveform's symbol period.
pub fn main_lobe_map(p: &[f64], grid: &GridSpec, kind: WaveformKind, samples: usize) -> Result<AmbiguityMap> {
    let (dtau, dnu) = main_lobe_half_widths(grid, kind);
    ambiguity(p, grid, kind, &symmetric_axis(dtau, samples), &symmetric_axis(dnu, samples))
}

fn main_lobe_half_widths(grid: &GridSpec, kind: WaveformKind) -> (f64, f64) {
    let dtau = 1.0 / (grid.m() as f64 * grid.delta_f());
    let dnu = 1.0 / (grid.n() as f64 * kind.symbol_period(grid));
    (dtau / 2.0, dnu / 2.0)
}

/// Composite Simpson weights for `n` uniform samples, with a 3/8 panel at the
/// end when the interval count is odd.
fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    let simpson_end = if (n - 1).is_multiple_of(2) { n - 1 } else { n - 4 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if simpson_end != n - 1 {
        let s = simpson_end;
        for (j, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[s + j] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

fn lobe_axis_weights(axis: &[f64], half: f64, name: &str) -> Result<Vec<f64>> {
    ensure!(
        axis.len() >= MIN_LOBE_SAMPLES,
        Resolution,
        "{} samples across the {name} main lobe, need at least {MIN_LOBE_SAMPLES}",
        axis.len()
    );
    let h = axis[1] - axis[0];
    let tol = 1e-9 * half;
    ensure!(
        (axis[0] + half).abs() <= tol && (axis[axis.len() - 1] - half).abs() <= tol,
        Resolution,
        "{name} axis must span exactly the main lobe"
    );
    ensure!(
        axis.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs()),
        Resolution,
        "{name} axis must be uniformly spaced"
    );
    Ok(simpson_weights(axis.len(), h))
}

/// Main-lobe-to-total energy ratio of a map produced by [`main_lobe_map`].
pub fn mter(map: &AmbiguityMap, grid: &GridSpec, variant: MterVariant) -> Result<f64> {
    let (half_tau, half_nu) = main_lobe_half_widths(grid, map.kind);
    let wt = lobe_axis_weights(&map.tau_axis, half_tau, "delay")?;
    match variant {
        MterVariant::Energy2d | MterVariant::Sqrt2d => {
            let wn = lobe_axis_weights(&map.nu_axis, half_nu, "Doppler")?;
            let mut e = 0.0;
            for (i, a) in wt.iter().enumerate() {
                for (j, b) in wn.iter().enumerate() {
                    e += a * b * map.at(i, j).powi(2);
                }
            }
            if map.total_energy == 0.0 {
                return Ok(0.0);
            }
            let r = (e / map.total_energy).clamp(0.0, 1.0);
            Ok(if variant == MterVariant::Sqrt2d { r.sqrt() } else { r })
        }
        MterVariant::DelayCut => {
            let zero = map.nu_axis.iter().position(|&v| v.abs() <= 1e-12 * half_nu);
            let Some(j) = zero else {
                return Err(crate::Error::Resolution("Doppler axis has no zero sample".into()));
            };
            let e: f64 = wt.iter().enumerate().map(|(i, w)| w * map.at(i, j).powi(2)).sum();
            if map.cut_total_energy == 0.0 {
                return Ok(0.0);
            }
            Ok((e / map.cut_total_energy).clamp(0.0, 1.0))
        }
    }
}

/// Convenience: build the main-lobe map at `samples` per axis and reduce it.
pub fn mter_of(p: &[f64], grid: &GridSpec, kind: WaveformKind, variant: MterVariant, samples: usize) -> Result<f64> {
    let map = main_lobe_map(p, grid, kind, samples)?;
    mter(&map, grid, variant)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GridSpec {
        GridSpec::new(16, 8, 1e6, 0.25e-6, 28e9).unwrap()
    }

    #[test]
    fn origin_equals_total_power() {
        let g = small();
        let p: Vec<f64> = (0..g.len()).map(|i| (i % 7) as f64 * 0.1).collect();
        let map = ambiguity(&p, &g, WaveformKind::Ofdm, &[0.0], &[0.0]).unwrap();
        assert!((map.values[0] - p.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn flat_delay_cut_is_dirichlet() {
        let g = small();
        let p = flat_power(&g, 0.5);
        let taus: Vec<f64> = (0..40).map(|i| i as f64 * 0.024e-6).collect();
        let map = ambiguity(&p, &g, WaveformKind::DualDomain, &taus, &[0.0]).unwrap();
        let total = 0.5 * g.len() as f64;
        for (i, &tau) in taus.iter().enumerate() {
            let x = tau * g.m() as f64 * g.delta_f();
            let expect = total * crate::dsp::dirichlet(x, g.m()).abs() / g.m() as f64;
            assert!((map.at(i, 0) - expect).abs() < 1e-9, "tau={tau}");
        }
    }

    #[test]
    fn narrow_band_first_null() {
        let g = GridSpec::new(64, 4, 1e6, 0.0, 28e9).unwrap();
        let p = band_power(&g, 16, 1.0);
        let null = 1.0 / (16.0 * g.delta_f());
        let map = ambiguity(&p, &g, WaveformKind::Ofdm, &[null * 0.999, null, null * 1.001], &[0.0]).unwrap();
        assert!(map.at(1, 0) < 1e-9);
        assert!(map.at(0, 0) > 0.0);
    }

    #[test]
    fn out_of_range_rejected() {
        let g = small();
        let p = flat_power(&g, 1.0);
        assert!(ambiguity(&p, &g, WaveformKind::Ofdm, &[2.0 * g.t_prime()], &[0.0]).is_err());
        assert!(ambiguity(&p, &g, WaveformKind::Ofdm, &[0.0], &[1.0 / g.t()]).is_err());
    }

    #[test]
    fn fft_path_matches_direct() {
        let g = small();
        let p: Vec<f64> = (0..g.len()).map(|i| ((i * 37) % 11) as f64).collect();
        for kind in [WaveformKind::Ofdm, WaveformKind::Otfs] {
            let fast = ambiguity_aligned(&p, &g, kind, 2, 3).unwrap();
            let direct = ambiguity(&p, &g, kind, &fast.tau_axis, &fast.nu_axis).unwrap();
            let err = fast.values.iter().zip(&direct.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "{err}");
        }
    }

    #[test]
    fn parseval_total_matches_quadrature() {
        let g = GridSpec::new(8, 4, 1e6, 0.0, 28e9).unwrap();
        let p: Vec<f64> = (0..g.len()).map(|i| 1.0 + (i % 3) as f64).collect();
        let map = ambiguity_aligned(&p, &g, WaveformKind::Ofdm, 1, 1).unwrap();
        // on the critical lattice the rectangle rule is exact for the period
        let cell = 1.0 / (g.m() as f64 * g.delta_f()) / (g.n() as f64 * g.t());
        let quad: f64 = map.values.iter().map(|v| v * v).sum::<f64>() * cell;
        assert!((quad / map.total_energy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_resource_is_area_ratio() {
        let g = small();
        let mut p = vec![0.0; g.len()];
        p[g.ft_index(2, -1)] = 3.0;
        let r = mter_of(&p, &g, WaveformKind::DualDomain, MterVariant::Energy2d, 33).unwrap();
        assert!((r - 1.0 / g.len() as f64).abs() < 1e-12);
        let c = mter_of(&p, &g, WaveformKind::DualDomain, MterVariant::DelayCut, 33).unwrap();
        assert!((c - 1.0 / g.m() as f64).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples_rejected() {
        let g = small();
        let p = flat_power(&g, 1.0);
        let r = mter_of(&p, &g, WaveformKind::DualDomain, MterVariant::Energy2d, 7);
        assert!(matches!(r, Err(crate::Error::Resolution(_))));
        assert!(mter_of(&p, &g, WaveformKind::DualDomain, MterVariant::Energy2d, 8).is_ok());
    }

    #[test]
    fn simpson_integrates_cubics_exactly() {
        for n in [9usize, 10, 33, 34] {
            let h = 1.0 / (n - 1) as f64;
            let w = simpson_weights(n, h);
            let integral: f64 = w.iter().enumerate().map(|(i, wi)| wi * (i as f64 * h).powi(3)).sum();
            assert!((integral - 0.25).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn variants_are_related() {
        let g = small();
        let p = flat_power(&g, 1.0);
        let e = mter_of(&p, &g, WaveformKind::DualDomain, MterVariant::Energy2d, 33).unwrap();
        let s = mter_of(&p, &g, WaveformKind::DualDomain, MterVariant::Sqrt2d, 33).unwrap();
        assert!((s * s - e).abs() < 1e-12);
        assert!(e > 0.0 && e < 1.0);
    }
}
