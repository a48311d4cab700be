//! DD↔FT round trip and the closed-form image of a DD impulse.

use ddisac::grid::GridSpec;
use ddisac::waveform::{dd_to_ft, ft_to_dd, sensing_sinusoid, synth_sensing_dd};

fn main() -> ddisac::Result<()> {
    let grid = GridSpec::new(64, 16, 1e6, 0.1e-6, 28e9)?;
    let impulse = synth_sensing_dd(&grid, 5, -2)?;
    let ft = dd_to_ft(&impulse)?;
    let closed = sensing_sinusoid(&grid, 5, -2);
    println!("FT energy {:.6} (DD energy {:.6})", ft.energy(), impulse.energy());
    println!("max |FFT − closed form| = {:.2e}", ft.max_abs_diff(&closed));
    println!("round trip error {:.2e}", ft_to_dd(&ft)?.max_abs_diff(&impulse));
    println!("every FT entry has magnitude {:.6} = 1/sqrt(MN)", ft.max_abs());
    Ok(())
}
