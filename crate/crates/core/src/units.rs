//! Physical constants and dB helpers. Everything inside the library is linear SI;
//! conversions happen at the configuration boundary.

/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant (J/K), exact since the 2019 SI redefinition.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Reference noise temperature (K).
pub const T0_KELVIN: f64 = 290.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_round_trip() {
        assert!((dbm_to_watts(43.0) - 19.952_623_149_688_8).abs() < 1e-9);
        assert!((watts_to_dbm(1.0) - 30.0).abs() < 1e-12);
        assert!((db_to_linear(-30.0) - 1e-3).abs() < 1e-18);
    }
}
