//! Root-CRB delay ratio of band-limited OFDM over the dual-domain waveform at
//! equal total power.

use ddisac::channel::{NoiseSpec, Side, TargetSpec};
use ddisac::grid::{AllocationScheme, GridSpec};
use ddisac::metrics::{crb_ratio_sweep, CrbAxis, CrbSetup, TwoTargets};
use ddisac::units::dbm_to_watts;
use num_complex::Complex64;

fn main() -> ddisac::Result<()> {
    let grid = GridSpec::reference();
    let target = TargetSpec::new(1.0, 50.0, 10.0, 100.0)?;
    let beta = Complex64::new(target.gain(grid.f0()).sqrt(), 0.0);
    let mut setup = CrbSetup {
        grid,
        p_tot: dbm_to_watts(43.0),
        sensing_ratio: 1e-3,
        sigma_z2: NoiseSpec::thermal(&grid, 10.0, 100)?.variance(Side::Bs),
        targets: TwoTargets::single(beta, target.delay(), target.doppler(grid.f0())),
        scheme: AllocationScheme::RandomUniform,
        colored: true,
    };
    let axis = CrbAxis::BandFraction(vec![0.05, 0.1, 0.2, 0.4, 0.8]);
    for row in crb_ratio_sweep(&setup, &axis, 0.1, 1.0)? {
        println!("single target, M_com/M {:>4}: {:+.2} dB", row.axis_value, row.point.ratio_db);
    }
    setup.targets.beta2 = beta;
    for row in crb_ratio_sweep(&setup, &CrbAxis::Separation(vec![0.25, 0.5, 1.0, 2.0]), 0.1, 0.5)? {
        println!("two targets, separation {:>4} bins: {:+.2} dB", row.axis_value, row.point.ratio_db);
    }
    Ok(())
}
