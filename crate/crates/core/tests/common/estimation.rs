//! Periodogram estimator checks against exact placements and the CRB.

use ddisac::channel::{apply_channel, sensing_channel_ft_fixed, PulseShape, TargetSpec};
use ddisac::grid::GridSpec;
use ddisac::metrics::{fim_two_targets, NoiseModel, TwoTargets};
use ddisac::receiver::{bs_dd_receive, periodogram_estimate, PeriodogramConfig, Refinement};
use ddisac::rng::{complex_normal, trial_rng};
use ddisac::waveform::{sensing_sinusoid, GridSignal};
use num_complex::Complex64;

/// Noise-free echo of a unit-energy DD impulse off one target at
/// `(ell, p)` bins.
pub fn echo(grid: &GridSpec, impulse: (usize, i64), ell: f64, p: f64, beta: Complex64) -> GridSignal {
    let res = grid.resolution();
    let target = TargetSpec::at_delay_doppler(grid.f0(), ell * res.delta_tau, p * res.delta_nu, 1.0).unwrap();
    let h = sensing_channel_ft_fixed(grid, &[target], &[beta], &PulseShape::Flat).unwrap();
    apply_channel(&h, &sensing_sinusoid(grid, impulse.0, impulse.1)).unwrap()
}

/// Placements on a 16×8 grid whose noiseless estimate misses the true bin.
pub fn exhaustive_misses() -> Vec<String> {
    let grid = GridSpec::new(16, 8, 1e6, 0.2e-6, 28e9).unwrap();
    let beta = Complex64::new(0.6, -0.3);
    let mut misses = Vec::new();
    for impulse in [(0usize, 0i64), (5, -3)] {
        for refinement in [Refinement::None, Refinement::Mle] {
            let cfg = PeriodogramConfig { refinement, ..Default::default() };
            // delay bin 0 would sit on the direct path; every other bin is in frame
            for ell in 1..grid.m() {
                for p in grid.n_min()..=grid.n_max() {
                    let y = echo(&grid, impulse, ell as f64, p as f64, beta);
                    let est = periodogram_estimate(&bs_dd_receive(&y).unwrap(), impulse, &cfg).unwrap();
                    let hit = est.detections.first().is_some_and(|d| {
                        (d.delay_bin - ell as f64).abs() < 1e-6 && (d.doppler_bin - p as f64).abs() < 1e-6
                    });
                    if !hit {
                        misses.push(format!("impulse {impulse:?} {refinement:?} at ({ell}, {p})"));
                    }
                }
            }
        }
    }
    misses
}

pub struct RmseReport {
    pub rmse: f64,
    pub root_crb: f64,
    /// `20 log10(RMSE / root-CRB)`
    pub gap_db: f64,
}

/// Delay RMSE of the refined periodogram over `trials` noisy looks at one
/// on-grid target, against the single-target CRB.
pub fn rmse_vs_crb(snr_db: f64, trials: u64) -> RmseReport {
    let grid = GridSpec::new(64, 16, 1e6, 0.2e-6, 28e9).unwrap();
    let res = grid.resolution();
    let (ell, p) = (10.0, 3.0);
    let beta = Complex64::new(1.0, 0.0);
    // post-gain SNR |β|² ‖x‖² / σ² with unit transmit energy
    let sigma2 = 10f64.powf(-snr_db / 10.0);
    let clean = echo(&grid, (0, 0), ell, p, beta);
    let cfg = PeriodogramConfig { refinement: Refinement::Mle, ..Default::default() };

    let mut sq = 0.0;
    for t in 0..trials {
        let mut rng = trial_rng(99, t);
        let mut y = clean.clone();
        for v in y.data_mut() {
            *v += complex_normal(&mut rng, sigma2);
        }
        let est = periodogram_estimate(&bs_dd_receive(&y).unwrap(), (0, 0), &cfg).unwrap();
        let err = est.detections[0].tau - ell * res.delta_tau;
        sq += err * err;
    }
    let rmse = (sq / trials as f64).sqrt();

    let p_flat = vec![1.0 / grid.len() as f64; grid.len()];
    let single = TwoTargets::single(beta, ell * res.delta_tau, p * res.delta_nu);
    let fim = fim_two_targets(&p_flat, &grid, &single, &NoiseModel::White { sigma_z2: sigma2 }).unwrap();
    let root_crb = fim.crb_tau[0][0].sqrt();
    RmseReport { rmse, root_crb, gap_db: 20.0 * (rmse / root_crb).log10() }
}
