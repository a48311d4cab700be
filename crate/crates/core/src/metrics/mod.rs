//! Sensing-quality metrics: ambiguity function, main-lobe energy ratio, and
//! delay/Doppler Cramér-Rao bounds.

pub mod ambiguity;
pub mod crb;

pub use ambiguity::{
    ambiguity, ambiguity_aligned, band_power, flat_power, main_lobe_map, mter, mter_of, AmbiguityMap,
    MterVariant, WaveformKind,
};
pub use crb::{
    crb_ratio_point, crb_ratio_sweep, fim_two_targets, invert_fim, m_com_for, CrbAxis, CrbPoint, CrbRow,
    CrbSetup, FimReport, NoiseModel, TwoTargets,
};
