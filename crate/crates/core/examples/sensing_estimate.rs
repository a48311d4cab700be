//! Two targets through the sensing channel, DD processing at the BS and a
//! periodogram search with sub-bin refinement.

use ddisac::channel::{add_noise, apply_channel, sensing_channel_ft_fixed, NoiseSpec, PulseShape, Side, TargetSpec};
use ddisac::grid::GridSpec;
use ddisac::receiver::{bs_dd_receive, detections_csv, periodogram_estimate, PeriodogramConfig, Refinement};
use ddisac::rng::seeded;
use ddisac::waveform::sensing_sinusoid;
use num_complex::Complex64;

fn main() -> ddisac::Result<()> {
    let grid = GridSpec::new(128, 32, 1e6, 1e-6, 28e9)?;
    let res = grid.resolution();
    let at = |ell: f64, p: f64| TargetSpec::at_delay_doppler(grid.f0(), ell * res.delta_tau, p * res.delta_nu, 1.0);
    let targets = [at(12.4, 3.3)?, at(23.0, -5.6)?];
    for t in &targets {
        println!("truth: {:.2} delay bins, {:.2} Doppler bins", t.delay_bins(&grid), t.doppler_bins(&grid));
    }
    let betas = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.7)];
    let h = sensing_channel_ft_fixed(&grid, &targets, &betas, &PulseShape::Flat)?;
    let x = sensing_sinusoid(&grid, 0, 0).scaled(Complex64::new((grid.len() as f64).sqrt(), 0.0));
    let y = add_noise(&apply_channel(&h, &x)?, &NoiseSpec::new(1.0, 1)?, Side::Bs, &mut seeded(3));

    let cfg = PeriodogramConfig { max_targets: 2, threshold: 10.0, refinement: Refinement::Mle, ..Default::default() };
    let est = periodogram_estimate(&bs_dd_receive(&y)?, (0, 0), &cfg)?;
    for d in &est.detections {
        println!("found: {:.2} delay bins, {:.2} Doppler bins", d.delay_bin, d.doppler_bin);
    }
    print!("{}", detections_csv(&est.detections));
    Ok(())
}
