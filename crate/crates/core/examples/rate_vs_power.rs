//! UE achievable rate for pure OFDM and the dual-domain waveform, with and
//! without cancelling the known sensing sinusoid at the UE.

use ddisac::channel::{friis_gain, NoiseSpec, Side};
use ddisac::grid::{allocate_users, AllocationScheme, GridSpec};
use ddisac::receiver::{achievable_rate, ue_sdnr_bound};
use ddisac::rng::seeded;
use ddisac::units::dbm_to_watts;
use ddisac::waveform::PowerPlan;

fn main() -> ddisac::Result<()> {
    let grid = GridSpec::reference();
    let alloc = allocate_users(&grid, 1, 512, 0.5, AllocationScheme::RandomUniform, 0, &mut seeded(0))?;
    let sigma_z2 = NoiseSpec::thermal(&grid, 10.0, 100)?.variance(Side::Ue);
    let kappa2 = friis_gain(grid.f0(), 50.0) * 100.0;
    println!("P_tot dBm   OFDM   dual   dual+cancel");
    for p_dbm in (0..=60).step_by(10) {
        let p = dbm_to_watts(p_dbm as f64);
        let ofdm = PowerPlan::ofdm_only(&grid, &alloc, p)?;
        let dual = PowerPlan::from_total(&grid, &alloc, p, 1e-3)?;
        let (sc, ss) = (dual.sigma_com()[0].powi(2), dual.sigma_sen_ft().powi(2));
        let r = |s| achievable_rate(s, &grid);
        println!(
            "{p_dbm:>9} {:>6.2} {:>6.2} {:>9.2}",
            r(ue_sdnr_bound(kappa2, ofdm.sigma_com()[0].powi(2), 0.0, sigma_z2, false)),
            r(ue_sdnr_bound(kappa2, sc, ss, sigma_z2, false)),
            r(ue_sdnr_bound(kappa2, sc, ss, sigma_z2, true)),
        );
    }
    Ok(())
}
