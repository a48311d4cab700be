//! Builds one transmit frame: allocation, power split, QAM plus DD impulse,
//! then the CP-OFDM time-domain samples written as raw I/Q.

use ddisac::grid::{allocate_users, AllocationScheme, GridSpec};
use ddisac::rng::seeded;
use ddisac::units::{db_to_linear, dbm_to_watts};
use ddisac::waveform::{compose_tx, sensing_sinusoid, synth_comm, to_time_domain, write_iq, PowerPlan, Qam};

fn main() -> ddisac::Result<()> {
    let grid = GridSpec::new(256, 32, 3.90625e6, 25.6e-9, 30e9)?;
    let mut rng = seeded(7);
    let alloc = allocate_users(&grid, 2, 128, 0.5, AllocationScheme::RandomUniform, 0, &mut rng)?;
    let plan = PowerPlan::from_total(&grid, &alloc, dbm_to_watts(30.0), db_to_linear(-20.0))?;
    let comm = synth_comm(&grid, &alloc, &Qam::new(16)?, &plan, &mut rng)?;
    let tx = compose_tx(&comm, &plan, &sensing_sinusoid(&grid, 0, 0))?;
    println!("P_com {:.4} W, P_sen {:.4} W, measured {:.4} W", tx.p_com, tx.p_sen, tx.measured_power());
    println!("in-band {:.4} W, out-of-band {:.4} W", plan.p_ib(&alloc), plan.p_ob(&alloc));

    let samples = to_time_domain(&tx.x)?;
    let mut bytes = Vec::new();
    write_iq(&samples, &mut bytes).expect("in-memory write");
    println!("{} samples, {} bytes of interleaved f64 I/Q", samples.len(), bytes.len());
    Ok(())
}
