use ddisac::channel::{
    add_noise, apply_channel, comm_channel_ft_fixed, nominal_alphas, sensing_channel_ft_fixed, NoiseSpec, PathSpec,
    PulseShape, Side, TargetSpec,
};
use ddisac::grid::{allocate_users, AllocationScheme, GridSpec};
use ddisac::receiver::{bs_dd_receive, ue_sdnr, ue_sdnr_bound, UeComponents};
use ddisac::rng::{seeded, trial_rng};
use ddisac::waveform::{sensing_sinusoid, synth_comm, PowerPlan, Qam};
use num_complex::Complex64;

#[test]
fn empirical_ue_sdnr_stays_under_the_bound() {
    let grid = GridSpec::new(64, 16, 1e6, 0.2e-6, 28e9).unwrap();
    let alloc = allocate_users(&grid, 1, 32, 0.5, AllocationScheme::RandomUniform, 0, &mut seeded(1)).unwrap();
    let plan = PowerPlan::from_total(&grid, &alloc, 1.0, 0.05).unwrap();
    let qam = Qam::new(16).unwrap();
    let path = PathSpec::new(2.0, 30e-9, 500.0, 1.0).unwrap();
    let h = comm_channel_ft_fixed(&grid, &[path], &nominal_alphas(&[path]), &PulseShape::Flat).unwrap();
    let kappa2 = path.gain();
    let sensing = sensing_sinusoid(&grid, 0, 0).scaled(Complex64::new(plan.sigma_sen_dd(&grid), 0.0));
    let noise = NoiseSpec::new(kappa2 * plan.sigma_sen_ft().powi(2), 1).unwrap();
    let set = &alloc.user_sets()[0];
    let tol = 3.0 / (set.len() as f64).sqrt();

    for cancellation in [false, true] {
        let bound =
            ue_sdnr_bound(kappa2, plan.sigma_com()[0].powi(2), plan.sigma_sen_ft().powi(2), noise.sigma_z2, cancellation);
        let trials = 400;
        let mut under = 0;
        for t in 0..trials {
            let mut rng = trial_rng(17, t);
            let comm = synth_comm(&grid, &alloc, &qam, &plan, &mut rng).unwrap();
            let comp = UeComponents::receive(&h, &comm, &sensing, &noise, &mut rng).unwrap();
            if ue_sdnr(&comp, set, cancellation).unwrap() <= bound * (1.0 + tol) {
                under += 1;
            }
        }
        let frac = under as f64 / trials as f64;
        assert!(frac >= 0.95, "cancellation={cancellation}: only {frac} of trials under the bound");
    }
}

/// Mean DD peak power over mean off-peak power, averaged over trials.
fn peak_to_floor(n: usize) -> f64 {
    let grid = GridSpec::new(16, n, 1e6, 0.2e-6, 28e9).unwrap();
    let res = grid.resolution();
    let target = TargetSpec::at_delay_doppler(grid.f0(), 4.0 * res.delta_tau, 2.0 * res.delta_nu, 1.0).unwrap();
    // fixed per-resource FT sensing power, so the DD impulse energy grows with N
    let x = sensing_sinusoid(&grid, 0, 0).scaled(Complex64::new((grid.len() as f64).sqrt(), 0.0));
    let h = sensing_channel_ft_fixed(&grid, &[target], &[Complex64::new(1.0, 0.0)], &PulseShape::Flat).unwrap();
    let clean = apply_channel(&h, &x).unwrap();
    let noise = NoiseSpec::new(1.0, 1).unwrap();
    let peak_idx = grid.dd_index(4, 2);
    let (mut peak, mut floor) = (0.0, 0.0);
    let trials = 40;
    for t in 0..trials {
        let y = add_noise(&clean, &noise, Side::Bs, &mut trial_rng(5, t));
        let dd = bs_dd_receive(&y).unwrap();
        peak += dd.data()[peak_idx].norm_sqr();
        floor += dd.data().iter().enumerate().filter(|(i, _)| *i != peak_idx).map(|(_, v)| v.norm_sqr()).sum::<f64>()
            / (grid.len() - 1) as f64;
    }
    peak / floor
}

#[test]
fn dd_peak_gains_three_db_per_doppler_doubling() {
    let ns = [32usize, 64, 128, 256];
    let pts: Vec<(f64, f64)> = ns.iter().map(|&n| ((n as f64).log2(), 10.0 * peak_to_floor(n).log10())).collect();
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / k, sy / k);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let worst = pts.iter().map(|(x, y)| (y - (my + slope * (x - mx))).abs()).fold(0.0, f64::max);
    assert!((slope - 10.0 * 2f64.log10()).abs() < 0.5, "slope {slope} dB per doubling");
    assert!(worst < 0.5, "fit error {worst} dB");
}
