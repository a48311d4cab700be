//! Main-lobe energy ratio of the full-band DD impulse against OFDM on
//! shrinking bands.

use ddisac::grid::GridSpec;
use ddisac::metrics::{band_power, flat_power, m_com_for, mter_of, MterVariant, WaveformKind};

fn main() -> ddisac::Result<()> {
    let grid = GridSpec::reference();
    let dual = mter_of(&flat_power(&grid, 1.0), &grid, WaveformKind::DualDomain, MterVariant::DelayCut, 33)?;
    println!("dual-domain  MTER {dual:.4}");
    for f in [1.0, 0.5, 0.3, 0.1] {
        let p = band_power(&grid, m_com_for(&grid, f), 1.0);
        let v = mter_of(&p, &grid, WaveformKind::Ofdm, MterVariant::DelayCut, 33)?;
        println!("OFDM {f:>4}   MTER {v:.4}");
    }
    Ok(())
}
