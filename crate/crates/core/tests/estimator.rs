mod common;

use common::estimation::{exhaustive_misses, rmse_vs_crb};

#[test]
fn noiseless_on_grid_targets_are_recovered_everywhere() {
    let misses = exhaustive_misses();
    assert!(misses.is_empty(), "{misses:?}");
}

#[test]
fn delay_rmse_tracks_crb_at_high_snr() {
    let r = rmse_vs_crb(25.0, 200);
    assert!(r.gap_db.abs() <= 3.0, "RMSE {:e} vs root-CRB {:e} ({:+.2} dB)", r.rmse, r.root_crb, r.gap_db);
}
